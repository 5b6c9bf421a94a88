use num_complex::Complex64;
use proptest::prelude::*;

use rydmix_core::hamiltonian::{build_original, build_rotated, hermiticity_error};
use rydmix_core::lindblad::{dissipator, steady_state};
use rydmix_core::optimizer::{optimize, ConstraintBox};
use rydmix_core::system::solve_rf_resonance;
use rydmix_core::{
    bessel_j, build_effective, second_order_bound, second_order_shift, Matrix4c, SystemParams,
};

fn hermitian(entries: &[f64]) -> Matrix4c {
    let g = Matrix4c::from_fn(|i, j| Complex64::new(entries[4 * i + j], entries[16 + 4 * i + j]));
    g + g.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bessel_parity(n in 0i32..=60, x in 0.0f64..60.0) {
        let j = bessel_j(n, x).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((bessel_j(-n, x).unwrap() - sign * j).abs() <= 1e-14);
    }

    #[test]
    fn bessel_recurrence(n in -30i32..=30, x in 0.1f64..40.0) {
        let lhs = bessel_j(n - 1, x).unwrap() + bessel_j(n + 1, x).unwrap();
        let rhs = 2.0 * n as f64 / x * bessel_j(n, x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn bessel_square_sum(x in 0.0f64..40.0) {
        let top = x.ceil() as i32 + 40;
        let sum: f64 = (-top..=top).map(|n| bessel_j(n, x).unwrap().powi(2)).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12, "{sum}");
    }

    #[test]
    fn dissipator_is_trace_free(entries in prop::collection::vec(-1.0f64..1.0, 32)) {
        let rho = hermitian(&entries);
        let rates = SystemParams::reference().decay;
        prop_assert!(dissipator(&rho, &rates).trace().norm() <= 1e-14);
    }

    #[test]
    fn builders_hermitian(t in 0.0f64..5.0) {
        let p = SystemParams::reference();
        let h = build_original(&p, t, Complex64::new(40.0, 0.0));
        prop_assert!(hermiticity_error(&h) <= 1e-14 * h.norm());
        let r = build_rotated(&p, t, 40).unwrap();
        prop_assert!(hermiticity_error(&r) <= 1e-14 * r.norm());
    }

    #[test]
    fn steady_state_is_physical(dp in -30.0f64..30.0, mw in 0.0f64..80.0) {
        let mut p = SystemParams::reference();
        p.delta_p = dp;
        p.omega_local = mw;
        let (h, _) = build_effective(&p, 1, true).unwrap();
        let rho = steady_state(&h, &p.decay).unwrap();
        prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() <= 1e-10);
        prop_assert!(rho.hermiticity_error() <= 1e-10);
        prop_assert!(rho.min_eigenvalue() >= -1e-8);
    }

    #[test]
    fn shift_is_quadratic(scale in 0.1f64..3.0) {
        let p = SystemParams::reference();
        let mut q = p.clone();
        q.omega_local *= scale;
        let base = second_order_shift(&p, 1, 50).unwrap();
        let scaled = second_order_shift(&q, 1, 50).unwrap();
        prop_assert!((scaled - scale * scale * base).abs() <= 1e-12 * base.abs().max(1.0));
    }

    #[test]
    fn bound_tail_converged(ratio in 0.05f64..10.0, k in 0i32..=3) {
        let a = second_order_bound(ratio, k, 50).unwrap();
        let b = second_order_bound(ratio, k, 80).unwrap();
        if a.is_finite() {
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        }
    }

    #[test]
    fn tuning_closes(delta in 300.0f64..1500.0, ratio in 0.2f64..2.5, k in 0i32..=2) {
        let p = SystemParams::reference();
        let t = solve_rf_resonance(delta, ratio, k, &p).unwrap();
        prop_assert!(t.residual(delta).abs() <= 1e-9);
    }

    #[test]
    fn optimum_satisfies_box(delta in 50.0f64..3000.0, a_max in 100.0f64..1500.0, lo in 50.0f64..300.0, width in 0.0f64..400.0) {
        let bx = ConstraintBox::new(a_max, lo, lo + width).unwrap();
        if let Ok(r) = optimize(delta, &bx) {
            prop_assert!((r.a_star + r.k_star as f64 * r.omega_star - delta).abs() <= 1e-6);
            prop_assert!(r.a_star > 0.0 && r.a_star <= a_max * (1.0 + 1e-12));
            prop_assert!(r.omega_star >= bx.omega_min && r.omega_star <= bx.omega_max);
            prop_assert!(r.eta_m > 0.0 && r.eta_m <= 1.0);
        }
    }

    #[test]
    fn larger_box_never_worse(delta in 50.0f64..2500.0, a_max in 100.0f64..1000.0, extra_a in 0.0f64..500.0, extra_w in 0.0f64..300.0) {
        let small = ConstraintBox::new(a_max, 100.0, 400.0).unwrap();
        let large = ConstraintBox::new(a_max + extra_a, 100.0, 400.0 + extra_w).unwrap();
        if let Ok(s) = optimize(delta, &small) {
            let l = optimize(delta, &large).unwrap();
            prop_assert!(l.eta_m >= s.eta_m - 1e-9, "{} < {}", l.eta_m, s.eta_m);
        }
    }
}
