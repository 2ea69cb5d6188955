use nanoflux_core::grid::{div, leray_project, sbp_check, AdvectionScheme};
use nanoflux_core::regularization::{build_kernel, h, mollify, mollify_reflected};
use nanoflux_core::subproblems::{solve_phi, Context, SolverState};
use nanoflux_core::{BoundaryTrace, CellField, CutoffFamily, FaceField, ModelParams, UniformGrid};
use proptest::prelude::*;

fn grid(n: usize) -> UniformGrid {
    UniformGrid::unit_square(n).unwrap()
}

fn cells(g: &UniformGrid, v: &[f64]) -> CellField {
    CellField::from_values(g, v.to_vec()).unwrap()
}

fn faces(n: usize, v: &[f64]) -> FaceField {
    let nx = (n + 1) * n;
    FaceField::from_vecs(n, n, v[..nx].to_vec(), v[nx..].to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cutoff_stays_close_to_mobility(eps in 0.005f64..0.25, z in -0.5f64..1.5) {
        let c = CutoffFamily::new(eps).unwrap();
        let v = c.eval(z);
        prop_assert!((0.0..=0.25).contains(&v));
        prop_assert!((v - h(z)).abs() <= c.approximation_bound() + 1e-15);
        if (eps..=1.0 - eps).contains(&z) {
            prop_assert_eq!(v, h(z));
        }
        prop_assert!((v - c.eval(1.0 - z)).abs() <= 1e-12);
    }

    #[test]
    fn cutoff_slope_is_bounded(eps in 0.005f64..0.25, a in -0.2f64..1.2, b in -0.2f64..1.2) {
        let c = CutoffFamily::new(eps).unwrap();
        let lip = c.lipschitz_constant();
        prop_assert!((c.eval(a) - c.eval(b)).abs() <= lip * (a - b).abs() + 1e-14);
        prop_assert!(c.deriv(a).abs() <= lip + 1e-12);
    }

    #[test]
    fn mollifier_is_linear_and_positive(
        a in prop::collection::vec(-1.0f64..1.0, 144),
        b in prop::collection::vec(0.0f64..1.0, 144),
        s in -3.0f64..3.0,
        eps in 0.17f64..0.25,
    ) {
        let g = grid(12);
        let k = build_kernel(eps, &g).unwrap();
        let (fa, fb) = (cells(&g, &a), cells(&g, &b));
        let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + y).collect();
        let lhs = mollify(&cells(&g, &combo), &k).unwrap();
        let (ma, mb) = (mollify(&fa, &k).unwrap(), mollify(&fb, &k).unwrap());
        for i in 0..144 {
            prop_assert!((lhs.values()[i] - (s * ma.values()[i] + mb.values()[i])).abs() <= 1e-13);
            prop_assert!(mb.values()[i] >= 0.0 && mb.values()[i] <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn reflection_reproduces_linear_fields(c0 in -1.0f64..1.0, cx in -2.0f64..2.0, cy in -2.0f64..2.0, eps in 0.17f64..0.25) {
        let g = grid(12);
        let k = build_kernel(eps, &g).unwrap();
        let lin = move |x: f64, y: f64| c0 + cx * x + cy * y;
        let f = CellField::from_fn(&g, lin).with_dirichlet(BoundaryTrace::from_fn(&g, lin));
        let m = mollify_reflected(&f, &k, |v| v).unwrap();
        for (a, b) in m.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn summation_by_parts(a in prop::collection::vec(-1.0f64..1.0, 100), w in prop::collection::vec(-1.0f64..1.0, 220)) {
        let g = grid(10);
        let a = cells(&g, &a).with_zero_dirichlet();
        let mut w = faces(10, &w);
        w.zero_normal_boundary();
        prop_assert!(sbp_check(&g, &a, &w).unwrap() <= 1e-13);
    }

    #[test]
    fn projection_is_divergence_free_and_idempotent(w in prop::collection::vec(-1.0f64..1.0, 220)) {
        let g = grid(10);
        let w = faces(10, &w);
        let p = leray_project(&g, &w).unwrap();
        prop_assert!(div(&g, &p).max_abs() <= 1e-10);
        prop_assert!(p.normal_trace_max() == 0.0);
        let pp = leray_project(&g, &p).unwrap();
        prop_assert!(pp.sub(&p).max_abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn upwind_fraction_stays_in_unit_interval(
        b in 0.0f64..1.0,
        phi in prop::collection::vec(0.0f64..1.0, 144),
        t in prop::collection::vec(-5.0f64..5.0, 144),
        w in prop::collection::vec(-3.0f64..3.0, 312),
        eps in 0.17f64..0.25,
    ) {
        let g = grid(12);
        let mut p = ModelParams::small_data(&g);
        p.boundary = BoundaryTrace::constant(&g, b);
        let phi = cells(&g, &phi).with_dirichlet(p.boundary.clone());
        let t = cells(&g, &t).with_zero_dirichlet();
        let ctx = Context::new(&g, eps).unwrap().with_scheme(AdvectionScheme::Upwind);
        let state = SolverState::from_fields(phi, t, faces(12, &w), CellField::zeros(&g), eps);
        let sol = solve_phi(&ctx, &state, &p).unwrap();
        prop_assert!(sol.bound_violation() <= 1e-10, "violation {}", sol.bound_violation());
    }
}
