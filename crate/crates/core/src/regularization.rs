//! Thermophoretic mobility `h`, its cubic cutoff `h_eps`, and the discrete
//! mollifier.

use crate::error::{Error, Result};
use crate::grid::{Boundary, BoundaryTrace, CellField, FaceField, Side, UniformGrid};
use crate::par;
use serde::{Deserialize, Serialize};

/// `h(z) = z+ (1 - z)+`.
pub fn h(z: f64) -> f64 {
    z.max(0.0) * (1.0 - z).max(0.0)
}

/// Derivative of `h` away from the kinks at 0 and 1.
pub fn h_deriv(z: f64) -> f64 {
    if z > 0.0 && z < 1.0 {
        1.0 - 2.0 * z
    } else {
        0.0
    }
}

/// Piecewise cubic approximation of `h` for `0 < eps <= 1/4`.
pub fn h_eps(z: f64, eps: f64) -> Result<f64> {
    Ok(CutoffFamily::new(eps)?.eval(z))
}

pub fn h_eps_deriv(z: f64, eps: f64) -> Result<f64> {
    Ok(CutoffFamily::new(eps)?.deriv(z))
}

/// The cutoff `h_eps` for one fixed `eps`.
///
/// On `[eps, 1 - eps]` it equals `h`; on the two outer strips it is the
/// cubic that joins `h` in a C¹ fashion and vanishes with zero slope at 0 and
/// 1 respectively. Outside `[0, 1]` it is identically zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffFamily {
    epsilon: f64,
}

impl CutoffFamily {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 0.25) {
            return Err(Error::InvalidEpsilon { epsilon });
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eval(&self, z: f64) -> f64 {
        let e = self.epsilon;
        let e2 = e * e;
        if !(0.0..=1.0).contains(&z) {
            0.0
        } else if z < e {
            -z * z * z / e2 + (2.0 / e - 1.0) * z * z
        } else if z <= 1.0 - e {
            h(z)
        } else {
            z * z * z / e2 + (-3.0 / e2 + 2.0 / e - 1.0) * z * z + (3.0 / e2 - 4.0 / e + 2.0) * z
                - 1.0 / e2
                + 2.0 / e
                - 1.0
        }
    }

    pub fn deriv(&self, z: f64) -> f64 {
        let e = self.epsilon;
        let e2 = e * e;
        if !(0.0..=1.0).contains(&z) {
            0.0
        } else if z < e {
            -3.0 * z * z / e2 + 2.0 * (2.0 / e - 1.0) * z
        } else if z <= 1.0 - e {
            1.0 - 2.0 * z
        } else {
            3.0 * z * z / e2 + 2.0 * (-3.0 / e2 + 2.0 / e - 1.0) * z + (3.0 / e2 - 4.0 / e + 2.0)
        }
    }

    /// `sup |h_eps'| = (2 - eps)^2 / 3`, attained on the lower cubic at
    /// `z = (2 eps - eps^2) / 3`. It exceeds 1 for every admissible `eps`.
    pub fn lipschitz_constant(&self) -> f64 {
        let e = self.epsilon;
        (2.0 - e) * (2.0 - e) / 3.0
    }

    /// The uniform bound `eps - eps^2` on `|h - h_eps|`.
    pub fn approximation_bound(&self) -> f64 {
        self.epsilon - self.epsilon * self.epsilon
    }
}

/// Unnormalized bump profile `exp(1 / (r^2 - 1))` on the unit ball.
fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        (1.0 / (r2 - 1.0)).exp()
    } else {
        0.0
    }
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Mass of the 2-D bump over the unit disc, by composite Gauss-Legendre in
/// the radius: `2 pi * int_0^1 r exp(1/(r^2-1)) dr`.
pub fn unit_ball_mass() -> f64 {
    let panels = 256;
    let width = 1.0 / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let a = k as f64 * width;
        let mid = a + 0.5 * width;
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            let r = mid + 0.5 * width * x;
            total += 0.5 * width * w * r * bump(r * r);
        }
    }
    2.0 * std::f64::consts::PI * total
}

/// Same integral by a different route: substituting `s = 1 - r^2` gives
/// `pi * int_0^1 exp(-1/s) ds`, evaluated with composite Simpson.
pub fn unit_ball_mass_simpson(intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let step = 1.0 / n as f64;
    let g = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let mut sum = g(0.0) + g(1.0);
    for k in 1..n {
        let s = k as f64 * step;
        sum += if k % 2 == 1 { 4.0 * g(s) } else { 2.0 * g(s) };
    }
    std::f64::consts::PI * sum * step / 3.0
}

/// Discrete mollifier `m_eps` on the grid lattice.
///
/// Weights are the continuous kernel sampled at lattice offsets strictly
/// inside the radius, then rescaled so that `sum(weights) * cell_area == 1`.
#[derive(Debug, Clone)]
pub struct MollifierKernel {
    epsilon: f64,
    normalization: f64,
    cell_area: f64,
    /// `(di, dj, weight)`, weight already multiplied by the cell area.
    taps: Vec<(i32, i32, f64)>,
}

impl MollifierKernel {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Quadrature constant `C` making the continuous kernel integrate to one.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Density weights (without the cell-area factor).
    pub fn weights(&self) -> impl Iterator<Item = (i32, i32, f64)> + '_ {
        let area = self.cell_area;
        self.taps.iter().map(move |&(i, j, w)| (i, j, w / area))
    }

    /// `sum(weights) * cell_area`.
    pub fn mass(&self) -> f64 {
        self.taps.iter().map(|t| t.2).sum()
    }

    pub fn tap_count(&self) -> usize {
        self.taps.len()
    }

    /// Largest lattice offset with a nonzero weight along each axis.
    pub fn reach(&self) -> (i32, i32) {
        self.taps
            .iter()
            .fold((0, 0), |(a, b), &(i, j, _)| (a.max(i.abs()), b.max(j.abs())))
    }

    /// Convolution of a lattice of size `mx * my` (row-major, `x` fastest)
    /// with zero extension, evaluated at lattice point `(i, j)`. The point may
    /// lie outside the lattice.
    fn apply_at(&self, values: &[f64], mx: usize, my: usize, i: i64, j: i64) -> f64 {
        let mut acc = 0.0;
        for &(di, dj, w) in &self.taps {
            let ii = i - di as i64;
            let jj = j - dj as i64;
            if ii >= 0 && jj >= 0 && (ii as usize) < mx && (jj as usize) < my {
                acc += w * values[jj as usize * mx + ii as usize];
            }
        }
        acc
    }

    fn apply_lattice(&self, values: &[f64], mx: usize, my: usize) -> Vec<f64> {
        par::map_indexed(mx * my, |k| {
            self.apply_at(values, mx, my, (k % mx) as i64, (k / mx) as i64)
        })
    }
}

/// Sample the mollifier of radius `epsilon` on the lattice of `grid`.
pub fn build_kernel(epsilon: f64, grid: &UniformGrid) -> Result<MollifierKernel> {
    let minimum = 2.0 * grid.hx().max(grid.hy());
    if !(epsilon.is_finite() && epsilon >= minimum * (1.0 - 1e-12)) {
        return Err(Error::KernelTooNarrow {
            radius: epsilon,
            minimum,
        });
    }
    let normalization = 1.0 / unit_ball_mass();
    let (hx, hy) = (grid.hx(), grid.hy());
    let rx = (epsilon / hx).ceil() as i32;
    let ry = (epsilon / hy).ceil() as i32;
    let mut taps = Vec::new();
    for dj in -ry..=ry {
        for di in -rx..=rx {
            let x = di as f64 * hx / epsilon;
            let y = dj as f64 * hy / epsilon;
            let w = normalization * bump(x * x + y * y) / (epsilon * epsilon);
            if w > 0.0 {
                taps.push((di, dj, w));
            }
        }
    }
    let area = grid.cell_area();
    let raw_mass: f64 = taps.iter().map(|t| t.2).sum::<f64>() * area;
    for t in &mut taps {
        t.2 = t.2 / raw_mass * area;
    }
    Ok(MollifierKernel {
        epsilon,
        normalization,
        cell_area: area,
        taps,
    })
}

/// Mollify a cell field extended by zero outside the domain.
///
/// The result carries the convolution evaluated at the ghost cell centres
/// just outside each side, so differences across boundary faces see the
/// mollified function itself.
pub fn mollify(field: &CellField, kernel: &MollifierKernel) -> Result<CellField> {
    if !field.is_finite() {
        return Err(Error::NonFinite("mollifier input"));
    }
    let (nx, ny) = field.shape();
    let values = kernel.apply_lattice(field.values(), nx, ny);
    let at = |i: i64, j: i64| kernel.apply_at(field.values(), nx, ny, i, j);
    let trace = BoundaryTrace::from_parts(
        (0..ny).map(|j| at(-1, j as i64)).collect(),
        (0..ny).map(|j| at(nx as i64, j as i64)).collect(),
        (0..nx).map(|i| at(i as i64, -1)).collect(),
        (0..nx).map(|i| at(i as i64, ny as i64)).collect(),
    );
    Ok(CellField::from_parts(nx, ny, values, Boundary::Ghost(trace)))
}

/// Mollify both components of a face field, each on its own lattice.
pub fn mollify_faces(field: &FaceField, kernel: &MollifierKernel) -> Result<FaceField> {
    if !field.is_finite() {
        return Err(Error::NonFinite("mollifier input"));
    }
    let (nx, ny) = field.shape();
    let x = kernel.apply_lattice(field.x(), nx + 1, ny);
    let y = kernel.apply_lattice(field.y(), nx, ny + 1);
    FaceField::from_vecs(nx, ny, x, y)
}

/// Continuation of the temperature beyond the walls before it is mollified
/// for the thermophoretic drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemperatureExtension {
    /// Odd reflection across the wall. The mollified gradient is then
    /// accurate up to the wall.
    #[default]
    Odd,
    /// Extension by zero. The mollified gradient is off by O(1) in a strip of
    /// width `eps` along the walls, which limits the coupled scheme to first
    /// order when `eps` is proportional to the spacing.
    Zero,
}

/// Value of `field` continued beyond the walls by point reflection through
/// its Dirichlet trace: the exterior cell mirrored across a wall holds
/// `2 b - a`. For a zero trace this is the odd extension.
fn reflected(field: &CellField, trace: &BoundaryTrace, i: i64, j: i64) -> f64 {
    let (nx, ny) = field.shape();
    let (mx, my) = (nx as i64, ny as i64);
    let mirror = |k: i64, m: i64| if k < 0 { -1 - k } else { 2 * m - 1 - k };
    let out_x = i < 0 || i >= mx;
    let out_y = j < 0 || j >= my;
    if out_x && out_y {
        // through the corner value extrapolated from both traces, which is
        // exact for linear data
        let (ci, cj) = (i.clamp(0, mx - 1) as usize, j.clamp(0, my - 1) as usize);
        let sx = if i < 0 { Side::Left } else { Side::Right };
        let sy = if j < 0 { Side::Bottom } else { Side::Top };
        let corner = trace.get(sx, cj) + trace.get(sy, ci) - field.at(ci, cj);
        2.0 * corner - reflected(field, trace, mirror(i, mx), mirror(j, my))
    } else if out_x {
        let side = if i < 0 { Side::Left } else { Side::Right };
        2.0 * trace.get(side, j as usize) - reflected(field, trace, mirror(i, mx), j)
    } else if out_y {
        let side = if j < 0 { Side::Bottom } else { Side::Top };
        2.0 * trace.get(side, i as usize) - reflected(field, trace, i, mirror(j, my))
    } else {
        field.at(i as usize, j as usize)
    }
}

/// Mollify `map(E a)`, where `E a` continues the Dirichlet field `a` beyond
/// the walls by reflection through its trace.
///
/// Like [`mollify`], the result carries the convolution at the ghost cell
/// centres.
pub fn mollify_reflected(
    field: &CellField,
    kernel: &MollifierKernel,
    map: impl Fn(f64) -> f64 + Sync + Send,
) -> Result<CellField> {
    if !field.is_finite() {
        return Err(Error::NonFinite("mollifier input"));
    }
    let trace = match field.boundary() {
        Boundary::Dirichlet(t) => t.clone(),
        _ => {
            return Err(Error::Precondition(
                "reflected mollification needs a Dirichlet trace".into(),
            ))
        }
    };
    let (nx, ny) = field.shape();
    let at = |i: i64, j: i64| {
        kernel
            .taps
            .iter()
            .map(|&(di, dj, w)| w * map(reflected(field, &trace, i - di as i64, j - dj as i64)))
            .sum::<f64>()
    };
    let values = par::map_indexed(nx * ny, |k| at((k % nx) as i64, (k / nx) as i64));
    let ghosts = BoundaryTrace::from_parts(
        (0..ny).map(|j| at(-1, j as i64)).collect(),
        (0..ny).map(|j| at(nx as i64, j as i64)).collect(),
        (0..nx).map(|i| at(i as i64, -1)).collect(),
        (0..nx).map(|i| at(i as i64, ny as i64)).collect(),
    );
    Ok(CellField::from_parts(nx, ny, values, Boundary::Ghost(ghosts)))
}

/// `|<f, m*g> - <m*f, g>|` with cell-area inner products.
pub fn adjoint_identity_check(
    grid: &UniformGrid,
    f: &CellField,
    g: &CellField,
    kernel: &MollifierKernel,
) -> Result<f64> {
    let mf = mollify(f, kernel)?;
    let mg = mollify(g, kernel)?;
    let lhs = grid.cell_dot(f.values(), mg.values());
    let rhs = grid.cell_dot(mf.values(), g.values());
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_supremum_matches_closed_form() {
        for eps in [0.25, 0.1, 0.01] {
            let c = CutoffFamily::new(eps).unwrap();
            let sampled = (0..=200_000)
                .map(|k| c.deriv(-0.25 + 1.5 * k as f64 / 200_000.0).abs())
                .fold(0.0f64, f64::max);
            assert!(sampled <= c.lipschitz_constant() + 1e-12);
            assert!(c.lipschitz_constant() - sampled < 1e-6, "{eps}: {sampled}");
        }
    }

    #[test]
    fn h_examples() {
        assert_eq!(h(0.5), 0.25);
        assert_eq!(h(-0.3), 0.0);
        assert_eq!(h(1.2), 0.0);
    }

    #[test]
    fn h_eps_examples() {
        assert_eq!(h_eps(0.5, 0.25).unwrap(), 0.25);
        assert_eq!(h_eps(-0.1, 0.25).unwrap(), 0.0);
        // -0.125^3 / 0.0625 + 7 * 0.125^2 = -0.03125 + 0.109375
        assert!((h_eps(0.125, 0.25).unwrap() - 0.078125).abs() < 1e-15);
    }

    #[test]
    fn h_eps_rejects_bad_epsilon() {
        for eps in [0.0, -0.1, 0.3, f64::NAN] {
            assert!(matches!(h_eps(0.5, eps), Err(Error::InvalidEpsilon { .. })));
            assert!(h_eps_deriv(0.5, eps).is_err());
        }
    }

    #[test]
    fn h_eps_deriv_examples() {
        assert_eq!(h_eps_deriv(0.5, 0.25).unwrap(), 0.0);
        assert_eq!(h_eps_deriv(-1.0, 0.1).unwrap(), 0.0);
        let step = 1e-6;
        let fd = (h_eps(0.1 + step, 0.2).unwrap() - h_eps(0.1 - step, 0.2).unwrap()) / (2.0 * step);
        assert!((h_eps_deriv(0.1, 0.2).unwrap() - fd).abs() < 1e-6);
    }

    #[test]
    fn cutoff_is_c1_at_joints() {
        for eps in [0.25, 0.1, 0.05, 0.01] {
            let c = CutoffFamily::new(eps).unwrap();
            for z in [0.0, eps, 1.0 - eps, 1.0] {
                let d = 1e-9;
                assert!((c.eval(z + d) - c.eval(z - d)).abs() < 1e-8, "jump at {z}");
                assert!((c.deriv(z + d) - c.deriv(z - d)).abs() < 1e-6, "kink at {z}");
            }
        }
    }

    #[test]
    fn quadrature_rules_agree() {
        let a = unit_ball_mass();
        let b = unit_ball_mass_simpson(200_000);
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn kernel_rejects_narrow_radius() {
        let g = UniformGrid::unit_square(16).unwrap();
        assert!(matches!(build_kernel(0.0, &g), Err(Error::KernelTooNarrow { .. })));
        match build_kernel(0.1, &g) {
            Err(Error::KernelTooNarrow { minimum, .. }) => assert_eq!(minimum, 0.125),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kernel_unit_mass_and_symmetry() {
        let g = UniformGrid::unit_square(32).unwrap();
        let k = build_kernel(0.15, &g).unwrap();
        assert!((k.mass() - 1.0).abs() < 1e-12);
        let taps: Vec<_> = k.weights().collect();
        for &(i, j, w) in &taps {
            assert!(w > 0.0);
            let mirror = taps.iter().find(|t| t.0 == -i && t.1 == j).unwrap();
            assert_eq!(mirror.2, w);
            let swapped = taps.iter().find(|t| t.0 == j && t.1 == i).unwrap();
            assert_eq!(swapped.2, w);
        }
    }

    #[test]
    fn mollify_zero_and_constant() {
        let g = UniformGrid::unit_square(32).unwrap();
        let k = build_kernel(0.125, &g).unwrap();
        let z = mollify(&CellField::zeros(&g), &k).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let one = mollify(&CellField::constant(&g, 1.0), &k).unwrap();
        for j in 0..32 {
            for i in 0..32 {
                let (x, y) = g.cell_center(i, j);
                if x.min(y).min(1.0 - x).min(1.0 - y) > 0.125 {
                    assert!((one.at(i, j) - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn adjoint_identity_small_cases() {
        let g = UniformGrid::unit_square(8).unwrap();
        let k = build_kernel(0.25, &g).unwrap();
        let f = CellField::from_fn(&g, |x, y| (3.0 * x).sin() + y * y);
        assert_eq!(adjoint_identity_check(&g, &f, &f, &k).unwrap(), 0.0);

        // supports separated by more than the radius
        let left = CellField::from_fn(&g, |x, _| if x < 0.2 { 1.0 } else { 0.0 });
        let right = CellField::from_fn(&g, |x, _| if x > 0.8 { 1.0 } else { 0.0 });
        let ml = mollify(&left, &k).unwrap();
        assert_eq!(g.cell_dot(ml.values(), right.values()), 0.0);
    }

    #[test]
    fn reflection_reproduces_linear_fields() {
        let g = UniformGrid::unit_square(16).unwrap();
        let k = build_kernel(0.25, &g).unwrap();
        let lin = |x: f64, y: f64| 0.2 + 0.5 * x - 0.3 * y;
        let a = CellField::from_fn(&g, lin).with_dirichlet(BoundaryTrace::from_fn(&g, lin));
        let m = mollify_reflected(&a, &k, |v| v).unwrap();
        let err = m.sub(&a).max_abs();
        assert!(err < 1e-12, "{err:e}");
        let doubled = mollify_reflected(&a, &k, |v| 2.0 * v + 1.0).unwrap();
        assert!(doubled.values().iter().zip(a.values()).all(|(d, v)| (d - 2.0 * v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn odd_reflection_vanishes_on_walls() {
        let g = UniformGrid::unit_square(32).unwrap();
        let k = build_kernel(0.125, &g).unwrap();
        let f = |x: f64, y: f64| (3.0 * x).sin() * (2.0 * y + 0.3).cos() * x * (1.0 - x) * y * (1.0 - y) + x * y;
        let a = CellField::from_fn(&g, f).with_zero_dirichlet();
        let m = mollify_reflected(&a, &k, |v| v).unwrap();
        // away from the corners the mollified field is odd about the wall
        for j in 5..27 {
            let wall = 0.5 * (m.at(0, j) + m.ghost(Side::Left, j));
            assert!(wall.abs() < 1e-12, "{wall:e}");
        }
        assert!(mollify_reflected(&CellField::zeros(&g), &k, |v| v).is_err());
    }
}
