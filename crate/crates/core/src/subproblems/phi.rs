use super::scalar::{assemble_scalar, transport_face_values, ScalarProblem};
use super::{Context, SolverState};
use crate::error::{Error, Result};
use crate::grid::{div, grad, AdvectionScheme, BoundaryTrace, CellField, FaceField, Side, UniformGrid};
use crate::linalg::{linear_solve, norm2, CsrMatrix, LinearSystem, SolverOptions, TripletBuilder};
use crate::params::ModelParams;
use crate::regularization::{CutoffFamily, mollify, mollify_faces, mollify_reflected, TemperatureExtension};

/// Output of the fraction solve.
#[derive(Debug, Clone)]
pub struct PhiSolution {
    /// New fraction, Dirichlet trace attached.
    pub phi: CellField,
    /// Mollified and projected velocity that transported it.
    pub transport: FaceField,
    /// Thermophoretic drift `h_eps(phi) grad(m * T_old) / T_inf` on faces,
    /// evaluated at the new fraction.
    pub thermophoretic: FaceField,
    pub scheme: AdvectionScheme,
    /// Relative algebraic residual of the last Newton correction.
    pub linear_residual: f64,
    pub newton_iterations: usize,
    /// `max |div transport|`.
    pub transport_divergence: f64,
    /// `max |rhs|` of the cell balance, drift divergence included.
    pub rhs_scale: f64,
    pub min: f64,
    pub max: f64,
}

impl PhiSolution {
    /// Distance of the extrema from `[0, 1]` (zero inside).
    pub fn bound_violation(&self) -> f64 {
        (-self.min).max(self.max - 1.0).max(0.0)
    }
}

/// Particle flux and total transport of one map evaluation.
#[derive(Debug, Clone)]
pub struct FluxSolution {
    /// `j_p = -grad phi - thermophoretic drift`.
    pub flux: FaceField,
    /// `phi_face * transport + j_p`.
    pub total: FaceField,
    /// `max |div total - phi source|`.
    pub defect: f64,
    pub threshold: f64,
}

/// The fraction system `div(w phi_face) - lap phi = div(drift) + s` with
/// Dirichlet data `boundary`.
pub fn phi_system(
    grid: &UniformGrid,
    transport: &FaceField,
    drift: &FaceField,
    boundary: &BoundaryTrace,
    scheme: AdvectionScheme,
    source: Option<&CellField>,
) -> LinearSystem {
    let mut rhs = div(grid, drift).into_values();
    if let Some(s) = source {
        rhs.iter_mut().zip(s.values()).for_each(|(r, s)| *r += s);
    }
    let ones = FaceField::from_fns(grid, |_, _| 1.0, |_, _| 1.0);
    assemble_scalar(
        grid,
        &ScalarProblem {
            diffusivity: &ones,
            transport: Some(transport),
            scheme,
            boundary,
            source: &rhs,
        },
    )
}

/// Solve for the new fraction given the previous iterate.
///
/// The cutoff in the drift is evaluated at the new fraction, which makes the
/// problem nonlinear; it is solved by Newton's method started from the
/// previous iterate. At a fixed point this coincides with evaluating it at
/// the previous iterate. Under upwinding the drift uses the Engquist-Osher
/// flux of `h_eps`, which is monotone, so the discrete solution stays in
/// `[0, 1]` for boundary data in `[0, 1]` and no particle source.
pub fn solve_phi(ctx: &Context, old: &SolverState, params: &ModelParams) -> Result<PhiSolution> {
    let grid = ctx.grid();
    old.check_admissible(grid, ctx.bound_tol)?;
    if (old.epsilon - ctx.epsilon()).abs() > 1e-14 * ctx.epsilon() {
        return Err(Error::Precondition(format!(
            "state regularization {} does not match kernel {}",
            old.epsilon,
            ctx.epsilon()
        )));
    }
    let w = ctx.projector().project(&mollify_faces(&old.velocity, ctx.kernel())?)?;
    let transport_divergence = div(grid, &w).max_abs();
    if transport_divergence > 1e-8 {
        log::warn!("mollified transport is not divergence free: {transport_divergence:e}");
    }
    let mollified_t = match ctx.temperature_extension {
        TemperatureExtension::Odd => {
            mollify_reflected(&old.temperature.clone().with_zero_dirichlet(), ctx.kernel(), |t| t)?
        }
        TemperatureExtension::Zero => mollify(&old.temperature, ctx.kernel())?,
    };
    let slope = grad(grid, &mollified_t).scale(1.0 / params.coefficients.t_inf);
    let base = phi_system(
        grid,
        &w,
        &FaceField::zeros(grid),
        &params.boundary,
        ctx.scheme,
        params.phi_source.as_ref(),
    );
    let drift_flux = DriftFlux {
        grid,
        cutoff: ctx.cutoff(),
        slope: &slope,
        boundary: &params.boundary,
        scheme: ctx.scheme,
    };
    let start = old.phi.values().iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let (values, newton_iterations, linear_residual) = solve_nonlinear(&base, &drift_flux, start, &ctx.solver)?;
    let phi = CellField::from_values(grid, values)?.with_dirichlet(params.boundary.clone());
    let drift = drift_flux.evaluate(&phi);
    let mut rhs = base.rhs.clone();
    rhs.iter_mut().zip(div(grid, &drift).values()).for_each(|(r, d)| *r += d);
    Ok(PhiSolution {
        min: phi.min(),
        max: phi.max(),
        phi,
        transport: w,
        thermophoretic: drift,
        scheme: ctx.scheme,
        linear_residual,
        newton_iterations,
        transport_divergence,
        rhs_scale: rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())),
    })
}

/// Particle flux of a fraction solve, certified by the discrete balance
/// `div(phi_face w + j_p) = s` to `10 tol max(1, max |rhs|)`.
pub fn compute_flux(ctx: &Context, sol: &PhiSolution, params: &ModelParams) -> Result<FluxSolution> {
    let grid = ctx.grid();
    let flux = grad(grid, &sol.phi).add(&sol.thermophoretic).scale(-1.0);
    let faces = transport_face_values(grid, &sol.phi, &sol.transport, sol.scheme);
    let total = sol.transport.mul(&faces).add(&flux);
    let mut balance = div(grid, &total);
    if let Some(s) = &params.phi_source {
        balance = balance.sub(s);
    }
    let defect = balance.max_abs();
    let threshold = 10.0 * ctx.solver.tolerance * sol.rhs_scale.max(1.0);
    if !(defect <= threshold) {
        return Err(Error::FluxCertification { defect, threshold });
    }
    Ok(FluxSolution {
        flux,
        total,
        defect,
        threshold,
    })
}

/// Face drift `H(phi) * slope` with its numerical flux `H` chosen by scheme.
#[derive(Clone, Copy)]
struct DriftFlux<'a> {
    grid: &'a UniformGrid,
    cutoff: &'a CutoffFamily,
    slope: &'a FaceField,
    boundary: &'a BoundaryTrace,
    scheme: AdvectionScheme,
}

/// One face: its drift value and the derivatives with respect to the cells on
/// either side (`None` outside the domain).
struct FaceTerm {
    value: f64,
    inner: Option<(usize, f64)>,
    outer: Option<(usize, f64)>,
}

impl DriftFlux<'_> {
    /// Increasing and decreasing parts of the cutoff, split at its maximum.
    fn rising(&self, z: f64) -> (f64, f64) {
        let z = z.min(0.5);
        (self.cutoff.eval(z), self.cutoff.deriv(z))
    }

    fn falling(&self, z: f64) -> (f64, f64) {
        let z = z.max(0.5);
        (self.cutoff.eval(z) - self.cutoff.eval(0.5), self.cutoff.deriv(z))
    }

    /// Flux through a face with values `lo` below and `hi` above, slope `s`.
    /// Returns the value and the derivatives in `lo` and `hi`.
    fn numerical(&self, lo: f64, hi: f64, s: f64) -> (f64, f64, f64) {
        match self.scheme {
            AdvectionScheme::Centered => {
                let (a, b) = (self.cutoff.eval(lo), self.cutoff.eval(hi));
                (0.5 * s * (a + b), 0.5 * s * self.cutoff.deriv(lo), 0.5 * s * self.cutoff.deriv(hi))
            }
            AdvectionScheme::Upwind => {
                // the particles move along `-s`, so the upstream side is `hi` for `s > 0`
                let (up, down, flip) = if s >= 0.0 { (hi, lo, true) } else { (lo, hi, false) };
                let (r, dr) = self.rising(up);
                let (f, df) = self.falling(down);
                let (du, dd) = (s * dr, s * df);
                if flip {
                    (s * (r + f), dd, du)
                } else {
                    (s * (r + f), du, dd)
                }
            }
        }
    }

    /// Wall face next to cell value `a` with boundary value `b`; `a_low` if
    /// the cell lies below the face along the normal.
    fn wall(&self, a: f64, b: f64, s: f64, a_low: bool) -> (f64, f64) {
        // centered: mean with the reflected ghost; upwind: the boundary value
        let (other, chain) = match self.scheme {
            AdvectionScheme::Centered => (2.0 * b - a, -1.0),
            AdvectionScheme::Upwind => (b, 0.0),
        };
        let (lo, hi) = if a_low { (a, other) } else { (other, a) };
        let (v, dlo, dhi) = self.numerical(lo, hi, s);
        let d = if a_low { dlo + chain * dhi } else { dhi + chain * dlo };
        (v, d)
    }

    fn x_term(&self, phi: &[f64], i: usize, j: usize) -> FaceTerm {
        let (nx, g) = (self.grid.nx(), self.grid);
        let s = self.slope.at_x(i, j);
        if i == 0 {
            let c = g.cell(0, j);
            let (v, d) = self.wall(phi[c], self.boundary.get(Side::Left, j), s, false);
            FaceTerm { value: v, inner: None, outer: Some((c, d)) }
        } else if i == nx {
            let c = g.cell(nx - 1, j);
            let (v, d) = self.wall(phi[c], self.boundary.get(Side::Right, j), s, true);
            FaceTerm { value: v, inner: Some((c, d)), outer: None }
        } else {
            let (l, r) = (g.cell(i - 1, j), g.cell(i, j));
            let (v, dl, dr) = self.numerical(phi[l], phi[r], s);
            FaceTerm { value: v, inner: Some((l, dl)), outer: Some((r, dr)) }
        }
    }

    fn y_term(&self, phi: &[f64], i: usize, j: usize) -> FaceTerm {
        let (ny, g) = (self.grid.ny(), self.grid);
        let s = self.slope.at_y(i, j);
        if j == 0 {
            let c = g.cell(i, 0);
            let (v, d) = self.wall(phi[c], self.boundary.get(Side::Bottom, i), s, false);
            FaceTerm { value: v, inner: None, outer: Some((c, d)) }
        } else if j == ny {
            let c = g.cell(i, ny - 1);
            let (v, d) = self.wall(phi[c], self.boundary.get(Side::Top, i), s, true);
            FaceTerm { value: v, inner: Some((c, d)), outer: None }
        } else {
            let (b, t) = (g.cell(i, j - 1), g.cell(i, j));
            let (v, db, dt) = self.numerical(phi[b], phi[t], s);
            FaceTerm { value: v, inner: Some((b, db)), outer: Some((t, dt)) }
        }
    }

    fn evaluate(&self, phi: &CellField) -> FaceField {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let v = phi.values();
        let x = (0..ny).flat_map(|j| (0..=nx).map(move |i| (i, j))).map(|(i, j)| self.x_term(v, i, j).value);
        let y = (0..=ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| self.y_term(v, i, j).value);
        FaceField::from_vecs(nx, ny, x.collect(), y.collect()).expect("face layout")
    }

    /// Residual `A phi - b - div(drift(phi))` and the Jacobian of the drift
    /// divergence.
    fn linearize(&self, base: &LinearSystem, phi: &[f64]) -> (Vec<f64>, CsrMatrix) {
        let g = self.grid;
        let (nx, ny, n) = (g.nx(), g.ny(), g.cell_count());
        let mut residual = base.matrix.residual(phi, &base.rhs);
        let mut jac = TripletBuilder::new(n, n);
        let mut apply = |term: FaceTerm, width: f64| {
            // the face is an outflow face of `inner` and an inflow face of `outer`
            for (cell, sign) in [(term.inner, 1.0), (term.outer, -1.0)]
                .iter()
                .filter_map(|(c, s)| c.map(|(c, _)| (c, *s)))
            {
                residual[cell] -= sign * term.value / width;
                for (wrt, d) in [term.inner, term.outer].into_iter().flatten() {
                    jac.add(cell, wrt, sign * d / width);
                }
            }
        };
        for j in 0..ny {
            for i in 0..=nx {
                apply(self.x_term(phi, i, j), g.hx());
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                apply(self.y_term(phi, i, j), g.hy());
            }
        }
        (residual, jac.build())
    }
}

/// Newton's method on the full drift; if it stalls, continuation in the drift
/// strength from zero. Returns the solution, the total Newton steps and the
/// residual of the last linear solve.
fn solve_nonlinear(
    base: &LinearSystem,
    drift: &DriftFlux<'_>,
    start: Vec<f64>,
    options: &SolverOptions,
) -> Result<(Vec<f64>, usize, f64)> {
    let first = match newton(base, drift, start.clone(), options, 30) {
        Err(Error::IterationCap { .. }) => None,
        other => Some(other?),
    };
    if let Some(done) = first {
        return Ok(done);
    }
    let mut phi = start;
    let (mut reached, mut step, mut total) = (0.0f64, 0.25f64, 30);
    let mut last = f64::NAN;
    while reached < 1.0 {
        let target = (reached + step).min(1.0);
        let scaled = drift.slope.scale(target);
        let stage = DriftFlux {
            slope: &scaled,
            ..*drift
        };
        match newton(base, &stage, phi.clone(), options, 15) {
            Ok((next, steps, res)) => {
                phi = next;
                total += steps;
                last = res;
                reached = target;
                step *= 2.0;
            }
            Err(Error::IterationCap { residual, .. }) => {
                total += 15;
                step /= 4.0;
                if step < 1e-4 {
                    if drift.scheme == AdvectionScheme::Centered {
                        log::warn!("centered fraction solve failed under strong drift; the upwind scheme is monotone");
                    }
                    return Err(Error::IterationCap {
                        iterations: total,
                        residual,
                    });
                }
            }
            Err(e) => return Err(e),
        }
    }
    log::debug!("fraction solve needed drift continuation ({total} Newton steps)");
    Ok((phi, total, last))
}

/// Newton's method for `A phi - div(drift(phi)) = b`, with backtracking on
/// the residual norm.
fn newton(
    base: &LinearSystem,
    drift: &DriftFlux<'_>,
    mut phi: Vec<f64>,
    options: &SolverOptions,
    max_steps: usize,
) -> Result<(Vec<f64>, usize, f64)> {
    let n = phi.len();
    let scale = norm2(&base.rhs).max(1.0);
    let target = options.tolerance * scale;
    let (mut residual, mut dd) = drift.linearize(base, &phi);
    let mut norm = norm2(&residual);
    let mut linear_residual = 0.0;
    // past the target, keep stepping while the residual still halves so the
    // balance is certified at round-off level
    let mut polish = 0;
    for step in 0..max_steps {
        if norm <= target {
            polish += 1;
            if polish > 3 {
                return Ok((phi, step, linear_residual));
            }
        }
        let mut jac = TripletBuilder::new(n, n);
        for r in 0..n {
            for (c, v) in base.matrix.row(r) {
                jac.add(r, c, v);
            }
            for (c, v) in dd.row(r) {
                jac.add(r, c, -v);
            }
        }
        let rhs: Vec<f64> = residual.iter().map(|r| -r).collect();
        let correction = linear_solve(&LinearSystem::new(jac.build(), rhs, base.unknowns), options)?;
        let mut damping = 1.0;
        loop {
            let trial: Vec<f64> = phi.iter().zip(&correction.x).map(|(p, d)| p + damping * d).collect();
            let (r, j) = drift.linearize(base, &trial);
            let trial_norm = norm2(&r);
            if polish > 0 {
                if trial_norm < 0.5 * norm {
                    (phi, residual, dd, norm) = (trial, r, j, trial_norm);
                    linear_residual = correction.residual;
                    break;
                }
                return Ok((phi, step, linear_residual));
            }
            if trial_norm < norm || damping < 1e-3 {
                (phi, residual, dd, norm) = (trial, r, j, trial_norm);
                linear_residual = correction.residual;
                break;
            }
            damping *= 0.5;
        }
    }
    if norm <= target {
        return Ok((phi, max_steps, linear_residual));
    }
    Err(Error::IterationCap {
        iterations: max_steps,
        residual: norm / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jacobian_defect(scheme: AdvectionScheme) -> f64 {
        let grid = UniformGrid::unit_square(6).unwrap();
        let cutoff = CutoffFamily::new(0.2).unwrap();
        let slope = FaceField::from_fns(&grid, |x, y| (3.0 * x + y).sin() - 0.3, |x, y| (x - 2.0 * y).cos() - 0.4);
        let boundary = BoundaryTrace::from_fn(&grid, |x, y| 0.3 + 0.2 * (x * y));
        let flux = DriftFlux {
            grid: &grid,
            cutoff: &cutoff,
            slope: &slope,
            boundary: &boundary,
            scheme,
        };
        let w = FaceField::zeros(&grid);
        let base = phi_system(&grid, &w, &FaceField::zeros(&grid), &boundary, scheme, None);
        let phi: Vec<f64> = (0..grid.cell_count()).map(|k| 0.5 + 0.45 * (k as f64 * 1.7).sin()).collect();
        let (r0, dd) = flux.linearize(&base, &phi);
        let step = 1e-7;
        let mut worst: f64 = 0.0;
        for c in 0..phi.len() {
            let mut p = phi.clone();
            p[c] += step;
            let (r1, _) = flux.linearize(&base, &p);
            for r in 0..phi.len() {
                let fd = (r1[r] - r0[r]) / step;
                let exact = base.matrix.get(r, c) - dd.get(r, c);
                worst = worst.max((fd - exact).abs());
            }
        }
        worst
    }

    #[test]
    fn drift_jacobian_matches_differences() {
        for scheme in [AdvectionScheme::Centered, AdvectionScheme::Upwind] {
            let d = jacobian_defect(scheme);
            assert!(d < 1e-4, "{scheme:?}: {d}");
        }
    }
}
