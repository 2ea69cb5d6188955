//! Manufactured solutions of the unregularized stationary system.
//!
//! Substituting closed-form fields `(phi*, T*, u*, p*)` into
//!
//! ```text
//! u.grad(phi) + div j                                   = s
//! u.grad((1+phi) T) + div(T j) - div(k grad T)          = f
//! u.grad((1+phi) u) + div(u (x) j) - div(mu D(u)) + grad p + beta T e_g = g
//! j = -grad(phi) - h(phi) grad(T) / T_inf,   D(u) = grad u + grad u^T
//! ```
//!
//! yields the forcings `s`, `f`, `g` and the boundary fraction `b = phi*`.
//! The particle source `s` is not part of the physical model; it vanishes
//! for the constant case. Derivatives are taken twice: with second-order
//! jets and with nested eighth-order central differences of the flux
//! expressions, and the two must agree before any study runs.

use super::jet::Jet;
use crate::error::{Error, Result};
use crate::grid::{BoundaryTrace, CellField, FaceField, UniformGrid};
use crate::params::{ModelParams, PhysicalCoefficients};
use crate::regularization::{h, h_deriv};
use crate::subproblems::SolverState;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MmsCase {
    /// `phi* = value`, `T* = 0`, `u* = 0`, `p* = 0`.
    Constant { value: f64 },
    /// `phi* = 0.5 + 0.25 sin(pi x) sin(pi y)`, `T* = sin(pi x) sin(pi y)`,
    /// `u* = curl(sin^2(pi x) sin^2(pi y) / pi)`, `p* = cos(pi x) cos(pi y)`
    /// on the unit square.
    Trig,
}

/// Exact fields and their first and second derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct ExactJets {
    pub phi: Jet,
    pub temperature: Jet,
    pub velocity: [Jet; 2],
    pub pressure: Jet,
}

/// Forcings at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointForcing {
    pub phi: f64,
    pub heat: f64,
    pub momentum: [f64; 2],
}

impl PointForcing {
    fn max_diff(&self, o: &PointForcing) -> f64 {
        (self.phi - o.phi)
            .abs()
            .max((self.heat - o.heat).abs())
            .max((self.momentum[0] - o.momentum[0]).abs())
            .max((self.momentum[1] - o.momentum[1]).abs())
    }
}

impl MmsCase {
    pub fn name(&self) -> &'static str {
        match self {
            MmsCase::Constant { .. } => "constant",
            MmsCase::Trig => "trig",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MmsCase::Constant { value } if !(0.0..=1.0).contains(&value) => Err(Error::InvalidParameter(
                format!("constant case needs a fraction in [0, 1], got {value}"),
            )),
            _ => Ok(()),
        }
    }

    /// Whether the case is posed on the unit square only.
    fn needs_unit_square(&self) -> bool {
        matches!(self, MmsCase::Trig)
    }

    pub fn jets(&self, x: f64, y: f64) -> ExactJets {
        match *self {
            MmsCase::Constant { value } => ExactJets {
                phi: Jet::constant(value),
                temperature: Jet::constant(0.0),
                velocity: [Jet::constant(0.0); 2],
                pressure: Jet::constant(0.0),
            },
            MmsCase::Trig => {
                let px = (Jet::variable(x, 0) * PI).sin();
                let py = (Jet::variable(y, 1) * PI).sin();
                let cx = (Jet::variable(x, 0) * PI).cos();
                let cy = (Jet::variable(y, 1) * PI).cos();
                let s2x = (Jet::variable(x, 0) * (2.0 * PI)).sin();
                let s2y = (Jet::variable(y, 1) * (2.0 * PI)).sin();
                ExactJets {
                    phi: px * py * 0.25 + 0.5,
                    temperature: px * py,
                    velocity: [px * px * s2y, -(s2x * py * py)],
                    pressure: cx * cy,
                }
            }
        }
    }

    /// Stream function of the exact velocity, `u = (d_y psi, -d_x psi)`.
    pub fn stream(&self, x: f64, y: f64) -> f64 {
        match self {
            MmsCase::Constant { .. } => 0.0,
            MmsCase::Trig => {
                let s = (PI * x).sin() * (PI * y).sin();
                s * s / PI
            }
        }
    }

    /// Forcings from the jets and the expanded product rules.
    pub fn forcing_at(&self, x: f64, y: f64, c: &PhysicalCoefficients) -> PointForcing {
        let e = self.jets(x, y);
        let (phi, t, p) = (e.phi, e.temperature, e.pressure);
        let u = e.velocity;
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        let uv = [u[0].v, u[1].v];

        let (hv, hd) = (h(phi.v), h_deriv(phi.v));
        let j = [
            -phi.d[0] - hv * t.d[0] / c.t_inf,
            -phi.d[1] - hv * t.d[1] / c.t_inf,
        ];
        let div_j = -phi.laplacian() - (hd * dot(phi.d, t.d) + hv * t.laplacian()) / c.t_inf;
        let s = dot(uv, phi.d) + div_j;

        let (k, dk) = (c.conductivity.eval(phi.v), c.conductivity.c1);
        let eta_t = [
            phi.d[0] * t.v + (1.0 + phi.v) * t.d[0],
            phi.d[1] * t.v + (1.0 + phi.v) * t.d[1],
        ];
        let f = dot(uv, eta_t) + dot(t.d, j) + t.v * div_j
            - (dk * dot(phi.d, t.d) + k * t.laplacian());

        let (mu, dmu) = (c.viscosity.eval(phi.v), c.viscosity.c1);
        let gravity = [c.gravity.0, c.gravity.1];
        let mut g = [0.0; 2];
        for i in 0..2 {
            let ui = u[i];
            let rho_u = [
                phi.d[0] * ui.v + (1.0 + phi.v) * ui.d[0],
                phi.d[1] * ui.v + (1.0 + phi.v) * ui.d[1],
            ];
            let strain = [ui.d[0] + u[0].d[i], ui.d[1] + u[1].d[i]];
            let viscous = dmu * dot(phi.d, strain) + mu * ui.laplacian();
            g[i] = dot(uv, rho_u) + dot(ui.d, j) + ui.v * div_j - viscous
                + p.d[i]
                + c.beta * t.v * gravity[i];
        }
        PointForcing {
            phi: s,
            heat: f,
            momentum: g,
        }
    }

    /// Forcings from nested central differences of the divergence-form
    /// fluxes, using only point values of the exact fields.
    pub fn forcing_by_differences(&self, x: f64, y: f64, c: &PhysicalCoefficients, step: f64) -> PointForcing {
        let value = |x: f64, y: f64| {
            let e = self.jets(x, y);
            [e.phi.v, e.temperature.v, e.velocity[0].v, e.velocity[1].v, e.pressure.v]
        };
        let grad = |k: usize, x: f64, y: f64| -> [f64; 2] {
            [
                diff(|s| value(x + s, y)[k], step),
                diff(|s| value(x, y + s)[k], step),
            ]
        };
        let flux = |x: f64, y: f64| -> [f64; 2] {
            let v = value(x, y);
            let (gp, gt) = (grad(0, x, y), grad(1, x, y));
            [
                -gp[0] - h(v[0]) * gt[0] / c.t_inf,
                -gp[1] - h(v[0]) * gt[1] / c.t_inf,
            ]
        };
        let divergence = |q: &dyn Fn(f64, f64) -> [f64; 2]| -> f64 {
            diff(|s| q(x + s, y)[0], step) + diff(|s| q(x, y + s)[1], step)
        };

        let v = value(x, y);
        let uv = [v[2], v[3]];
        let gp = grad(0, x, y);
        let s = uv[0] * gp[0] + uv[1] * gp[1] + divergence(&flux);

        let heat_flux = |x: f64, y: f64| -> [f64; 2] {
            let v = value(x, y);
            let j = flux(x, y);
            let gt = grad(1, x, y);
            let k = c.conductivity.eval(v[0]);
            [
                (1.0 + v[0]) * v[1] * v[2] + v[1] * j[0] - k * gt[0],
                (1.0 + v[0]) * v[1] * v[3] + v[1] * j[1] - k * gt[1],
            ]
        };
        let f = divergence(&heat_flux);

        let gravity = [c.gravity.0, c.gravity.1];
        let gpress = grad(4, x, y);
        let mut g = [0.0; 2];
        for i in 0..2 {
            let momentum_flux = |x: f64, y: f64| -> [f64; 2] {
                let v = value(x, y);
                let j = flux(x, y);
                let gi = grad(2 + i, x, y);
                let g0 = grad(2, x, y);
                let g1 = grad(3, x, y);
                let mu = c.viscosity.eval(v[0]);
                let ui = v[2 + i];
                [
                    (1.0 + v[0]) * ui * v[2] + ui * j[0] - mu * (gi[0] + g0[i]),
                    (1.0 + v[0]) * ui * v[3] + ui * j[1] - mu * (gi[1] + g1[i]),
                ]
            };
            g[i] = divergence(&momentum_flux) + gpress[i] + c.beta * v[1] * gravity[i];
        }
        PointForcing {
            phi: s,
            heat: f,
            momentum: g,
        }
    }

    /// Largest disagreement between the two differentiation paths over a
    /// 7 x 7 lattice of interior points, relative to the forcing scale.
    pub fn forcing_cross_check(&self, c: &PhysicalCoefficients) -> f64 {
        let mut worst = 0.0f64;
        for a in 1..=7 {
            for b in 1..=7 {
                let (x, y) = (a as f64 / 8.0 - 0.03, b as f64 / 8.0 + 0.02);
                let exact = self.forcing_at(x, y, c);
                let fd = self.forcing_by_differences(x, y, c, 1e-2);
                let scale = exact
                    .phi
                    .abs()
                    .max(exact.heat.abs())
                    .max(exact.momentum[0].abs())
                    .max(exact.momentum[1].abs())
                    .max(1.0);
                worst = worst.max(exact.max_diff(&fd) / scale);
            }
        }
        worst
    }
}

/// Eighth-order central difference of `f` at 0.
fn diff(f: impl Fn(f64) -> f64, step: f64) -> f64 {
    const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    W.iter()
        .enumerate()
        .map(|(m, w)| {
            let s = (m + 1) as f64 * step;
            w * (f(s) - f(-s))
        })
        .sum::<f64>()
        / step
}

fn check_domain(case: &MmsCase, grid: &UniformGrid) -> Result<()> {
    case.validate()?;
    if case.needs_unit_square() && (grid.origin() != (0.0, 0.0) || grid.extent() != (1.0, 1.0)) {
        return Err(Error::Precondition(format!(
            "case {} is posed on the unit square",
            case.name()
        )));
    }
    Ok(())
}

/// Problem data reproducing `case`: boundary fraction, heat source, body
/// force and particle source sampled on the grid.
pub fn mms_forcing(case: &MmsCase, grid: &UniformGrid, coefficients: &PhysicalCoefficients) -> Result<ModelParams> {
    check_domain(case, grid)?;
    coefficients.validate()?;
    let at = |x, y| case.forcing_at(x, y, coefficients);
    let heat_source = CellField::from_fn(grid, |x, y| at(x, y).heat);
    let body_force = FaceField::from_fns(grid, |x, y| at(x, y).momentum[0], |x, y| at(x, y).momentum[1]);
    let phi_source = match case {
        MmsCase::Constant { .. } => None,
        MmsCase::Trig => Some(CellField::from_fn(grid, |x, y| at(x, y).phi)),
    };
    Ok(ModelParams {
        coefficients: *coefficients,
        boundary: BoundaryTrace::from_fn(grid, |x, y| case.jets(x, y).phi.v),
        heat_source,
        body_force,
        phi_source,
    })
}

/// The exact fields sampled on the grid: cell values for the scalars, stream
/// function differences for the velocity (discretely divergence free), and
/// the pressure shifted to zero mean.
pub fn exact_state(case: &MmsCase, grid: &UniformGrid, epsilon: f64) -> Result<SolverState> {
    check_domain(case, grid)?;
    let phi = CellField::from_fn(grid, |x, y| case.jets(x, y).phi.v)
        .with_dirichlet(BoundaryTrace::from_fn(grid, |x, y| case.jets(x, y).phi.v));
    let temperature = CellField::from_fn(grid, |x, y| case.jets(x, y).temperature.v);
    let (hx, hy) = (grid.hx(), grid.hy());
    let mut velocity = FaceField::from_fns(
        grid,
        |x, y| (case.stream(x, y + 0.5 * hy) - case.stream(x, y - 0.5 * hy)) / hy,
        |x, y| -(case.stream(x + 0.5 * hx, y) - case.stream(x - 0.5 * hx, y)) / hx,
    );
    velocity.zero_normal_boundary();
    let pressure = CellField::from_fn(grid, |x, y| case.jets(x, y).pressure.v);
    let mean = pressure.mean();
    let pressure = pressure.map(|p| p - mean);
    Ok(SolverState::from_fields(phi, temperature, velocity, pressure, epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::div;
    use crate::params::LinearCoefficient;

    fn coefficients() -> PhysicalCoefficients {
        PhysicalCoefficients {
            conductivity: LinearCoefficient::new(1.0, 0.5),
            viscosity: LinearCoefficient::new(1.0, 0.3),
            beta: 0.7,
            t_inf: 1.5,
            ..PhysicalCoefficients::default()
        }
    }

    #[test]
    fn differentiation_paths_agree() {
        let d = MmsCase::Trig.forcing_cross_check(&coefficients());
        assert!(d < 1e-8, "{d:e}");
    }

    #[test]
    fn constant_case_is_homogeneous() {
        let g = UniformGrid::unit_square(6).unwrap();
        let c = PhysicalCoefficients::default();
        let p = mms_forcing(&MmsCase::Constant { value: 0.3 }, &g, &c).unwrap();
        assert_eq!(p.heat_source.max_abs(), 0.0);
        assert_eq!(p.body_force.max_abs(), 0.0);
        assert!(p.boundary.iter().all(|b| b == 0.3));
        assert!(p.phi_source.is_none());
    }

    #[test]
    fn trig_case_invariants() {
        let g = UniformGrid::unit_square(16).unwrap();
        let p = mms_forcing(&MmsCase::Trig, &g, &coefficients()).unwrap();
        assert!(p.boundary.iter().all(|b| (b - 0.5).abs() < 1e-15));
        let s = exact_state(&MmsCase::Trig, &g, 0.25).unwrap();
        assert!(div(&g, &s.velocity).max_abs() < 1e-12);
        assert!(s.phi.min() > 0.0 && s.phi.max() < 1.0);
        let e = MmsCase::Trig.jets(0.3, 0.8);
        assert!((e.velocity[0].d[0] + e.velocity[1].d[1]).abs() < 1e-13);
    }

    #[test]
    fn trig_case_needs_unit_square() {
        let g = UniformGrid::new(8, 8, (0.0, 0.0), (2.0, 1.0)).unwrap();
        assert!(matches!(
            mms_forcing(&MmsCase::Trig, &g, &coefficients()),
            Err(Error::Precondition(_))
        ));
    }
}
