use nanoflux_core::driver::{picard_solve, PicardConfig};
use nanoflux_core::grid::AdvectionScheme;
use nanoflux_core::linalg::{linear_solve, SolverOptions};
use nanoflux_core::subproblems::{phi_system, stokes_system, Context, SolverState, StokesOptions, ViscousForm};
use nanoflux_core::verify::*;
use nanoflux_core::{BoundaryTrace, CellField, Error, FaceField, ModelParams, PhysicalCoefficients, UniformGrid};

fn study(kind: StudyKind, grids: Vec<usize>) -> StudyConfig {
    StudyConfig {
        case: MmsCase::Trig,
        kind,
        grids,
        epsilon: EpsPolicy::Proportional { factor: 2.0 },
        coefficients: PhysicalCoefficients::default(),
        picard: PicardConfig::default(),
        temperature_extension: Default::default(),
    }
}

#[test]
fn trivial_state_passes_every_invariant() {
    let g = UniformGrid::unit_square(16).unwrap();
    let p = ModelParams::trivial(&g, 0.4);
    let ctx = Context::new(&g, 0.25).unwrap();
    let x = SolverState::initial(&g, &p, 0.25).unwrap();
    let report = invariant_suite(&ctx, &x, &p);
    assert!(report.passed(), "{:?}", report.failures());
    for name in ["phi_bounds", "temperature_energy", "velocity_energy", "velocity_divergence"] {
        let item = report.item(name).unwrap();
        assert_eq!(item.measured, 0.0, "{name}");
    }
}

#[test]
fn corrupted_fraction_fails_only_the_bound() {
    let g = UniformGrid::unit_square(16).unwrap();
    let p = ModelParams::small_data(&g);
    let ctx = Context::new(&g, 0.25).unwrap();
    let x = SolverState::initial(&g, &p, 0.25).unwrap();
    let mut state = picard_solve(&ctx, x, &p, &PicardConfig::default()).unwrap().state;
    assert!(invariant_suite(&ctx, &state, &p).passed());
    state.phi.map_in_place(|v| 1.2 * v + 0.45);
    let report = invariant_suite(&ctx, &state, &p);
    assert_eq!(report.failures(), vec!["phi_bounds"]);
    assert!(report.item("phi_bounds").unwrap().slack < 0.0);
}

#[test]
fn constant_case_has_no_forcing() {
    let g = UniformGrid::unit_square(12).unwrap();
    let p = mms_forcing(&MmsCase::Constant { value: 0.35 }, &g, &PhysicalCoefficients::default()).unwrap();
    assert_eq!(p.heat_source.max_abs(), 0.0);
    assert_eq!(p.body_force.max_abs(), 0.0);
    assert!(p.boundary.iter().all(|b| b == 0.35));
}

#[test]
fn trig_case_has_half_boundary_and_agreeing_forcings() {
    let g = UniformGrid::unit_square(12).unwrap();
    let c = PhysicalCoefficients::default();
    let p = mms_forcing(&MmsCase::Trig, &g, &c).unwrap();
    assert!(p.boundary.iter().all(|b| (b - 0.5).abs() < 1e-15));
    assert!(MmsCase::Trig.forcing_cross_check(&c) <= 1e-8);
}

#[test]
fn two_grids_are_rejected() {
    let err = convergence_study(&study(StudyKind::Temperature, vec![8, 16])).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)), "{err}");
}

#[test]
fn decoupled_temperature_is_second_order() {
    let r = convergence_study(&study(StudyKind::Temperature, vec![16, 32, 64])).unwrap();
    let order = r.orders.temperature.unwrap();
    assert!((order - 2.0).abs() <= 0.1, "order {order}");
}

#[test]
fn oracle_agrees_on_small_fraction_system() {
    let g = UniformGrid::unit_square(8).unwrap();
    let w = FaceField::from_fns(&g, |x, y| (3.0 * y).sin() * x, |x, y| (x - 0.5) * y);
    let drift = FaceField::from_fns(&g, |x, _| x, |_, y| -y);
    let trace = BoundaryTrace::from_fn(&g, |x, y| 0.5 + 0.2 * x * y);
    for scheme in [AdvectionScheme::Centered, AdvectionScheme::Upwind] {
        let sys = phi_system(&g, &w, &drift, &trace, scheme, None);
        let main = linear_solve(&sys, &SolverOptions::default()).unwrap().x;
        let dense = dense_oracle(&sys).unwrap();
        assert!(relative_distance(&main, &dense) <= 1e-10);
    }
}

#[test]
fn oracle_agrees_on_small_stokes_system() {
    let g = UniformGrid::unit_square(6).unwrap();
    let mu = CellField::from_fn(&g, |x, y| 1.0 + x * y);
    let forcing = FaceField::from_fns(&g, |_, y| y, |x, _| -x);
    let carrier = FaceField::from_fns(&g, |x, y| x * (1.0 - x) * y, |x, y| -0.5 * y * y * (1.0 - 2.0 * x));
    let sys = stokes_system(&g, &mu, ViscousForm::Symmetric, Some(&carrier), &forcing, StokesOptions::default());
    let main = linear_solve(&sys, &SolverOptions::default()).unwrap().x;
    let dense = dense_oracle(&sys).unwrap();
    assert!(relative_distance(&main, &dense) <= 1e-10);
}
