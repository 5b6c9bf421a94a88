//! Constrained maximization of the sensitivity modification coefficient
//! `eta_m = max |J_k(a/omega)|` subject to `Delta_M = a + k*omega`.

use rayon::prelude::*;
use thiserror::Error;

use crate::search::golden_section_max;
use crate::special_functions::jn;
use crate::system::{solve_rf_resonance, RfTuning, SystemParams, TuningError};

/// Points in the bracketing grid of each sideband branch.
pub const BRANCH_GRID_POINTS: usize = 2001;
pub const REFINE_TOLERANCE: f64 = 1e-9;
/// Two branches closer than this in `eta_m` are treated as equal.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("invalid constraint box: {0}")]
    Box(String),
    #[error("no (k, omega) satisfies the constraints at Delta_M = {0}")]
    Infeasible(f64),
    #[error("detuning range must be sorted ascending")]
    UnsortedRange,
}

/// Limits on the RF parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintBox {
    pub a_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl ConstraintBox {
    pub fn new(a_max: f64, omega_min: f64, omega_max: f64) -> Result<Self, OptimizeError> {
        let b = Self {
            a_max,
            omega_min,
            omega_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        let finite = self.a_max.is_finite() && self.omega_min.is_finite() && self.omega_max.is_finite();
        if !finite || self.a_max <= 0.0 || self.omega_min <= 0.0 || self.omega_min > self.omega_max {
            return Err(OptimizeError::Box(format!(
                "need a_max > 0 and 0 < omega_min <= omega_max, got a_max = {}, omega = [{}, {}]",
                self.a_max, self.omega_min, self.omega_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    pub delta_m: f64,
    pub eta_m: f64,
    pub a_star: f64,
    pub omega_star: f64,
    pub k_star: u32,
}

/// Feasible `omega` interval of branch `k`, if any.
pub fn branch_interval(delta_m: f64, k: u32, bx: &ConstraintBox) -> Option<(f64, f64)> {
    let (lo, hi) = if k == 0 {
        if delta_m > bx.a_max {
            return None;
        }
        (bx.omega_min, bx.omega_max)
    } else {
        let kf = k as f64;
        (
            bx.omega_min.max((delta_m - bx.a_max) / kf),
            bx.omega_max.min(delta_m / kf),
        )
    };
    // a = Delta_M - k*omega must stay positive, so omega = Delta_M/k is excluded.
    if lo > hi || (k > 0 && lo >= delta_m / k as f64) {
        return None;
    }
    Some((lo, hi))
}

fn branch_objective(delta_m: f64, k: u32) -> impl Fn(f64) -> f64 {
    move |omega: f64| {
        let a = delta_m - k as f64 * omega;
        if a <= 0.0 {
            return 0.0;
        }
        jn(k as i32, a / omega).abs()
    }
}

/// Best `omega` of one branch on `[lo, hi]`: dense grid, then golden section
/// around the best grid point.
fn maximize_branch(delta_m: f64, k: u32, lo: f64, hi: f64) -> (f64, f64) {
    let f = branch_objective(delta_m, k);
    if hi - lo <= REFINE_TOLERANCE * hi.abs().max(1.0) {
        return (lo, f(lo));
    }
    let step = (hi - lo) / (BRANCH_GRID_POINTS - 1) as f64;
    let mut best = (0, f(lo));
    for i in 1..BRANCH_GRID_POINTS {
        let v = f(lo + step * i as f64);
        if v > best.1 {
            best = (i, v);
        }
    }
    let i = best.0;
    let a = lo + step * i.saturating_sub(1) as f64;
    let b = (lo + step * (i + 1) as f64).min(hi);
    let (x, v) = golden_section_max(&f, a, b, REFINE_TOLERANCE);
    if v > best.1 {
        (x, v)
    } else {
        (lo + step * i as f64, best.1)
    }
}

/// Maximize `|J_k((Delta_M - k*omega)/omega)|` over `k >= 0` and `omega` in
/// the box. `delta_M` itself is left out of the constraint.
pub fn optimize(delta_m: f64, bx: &ConstraintBox) -> Result<OptimizationResult, OptimizeError> {
    bx.validate()?;
    if !(delta_m.is_finite() && delta_m > 0.0) {
        return Err(OptimizeError::Infeasible(delta_m));
    }
    let k_top = (delta_m / bx.omega_min).ceil() as u32;
    let mut best: Option<OptimizationResult> = None;
    for k in 0..=k_top {
        let Some((lo, hi)) = branch_interval(delta_m, k, bx) else {
            continue;
        };
        let (omega, eta) = maximize_branch(delta_m, k, lo, hi);
        let a = delta_m - k as f64 * omega;
        if a <= 0.0 {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => eta > b.eta_m + TIE_TOLERANCE,
        };
        if better {
            best = Some(OptimizationResult {
                delta_m,
                eta_m: eta,
                a_star: a,
                omega_star: omega,
                k_star: k,
            });
        }
    }
    best.ok_or(OptimizeError::Infeasible(delta_m))
}

/// `optimize` over a sorted detuning range; infeasible points are kept as errors.
pub fn sensitivity_map(
    deltas: &[f64],
    bx: &ConstraintBox,
) -> Result<Vec<Result<OptimizationResult, OptimizeError>>, OptimizeError> {
    bx.validate()?;
    if deltas.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(OptimizeError::UnsortedRange);
    }
    Ok(deltas.par_iter().map(|&d| optimize(d, bx)).collect())
}

/// Sensitivity in the units of `resonant_baseline`, degraded by `1/eta_m`.
///
/// `resonant_baseline` must be positive.
pub fn sensitivity_in_field_units(result: &OptimizationResult, resonant_baseline: f64) -> f64 {
    debug_assert!(resonant_baseline > 0.0);
    resonant_baseline / result.eta_m
}

/// Re-solve the RF resonance at the optimum's `a/omega`, now including `delta_M`.
pub fn retune(result: &OptimizationResult, params: &SystemParams) -> Result<RfTuning, TuningError> {
    solve_rf_resonance(
        result.delta_m,
        result.a_star / result.omega_star,
        result.k_star as i32,
        params,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn narrow() -> ConstraintBox {
        ConstraintBox::new(500.0, 100.0, 500.0).unwrap()
    }

    #[test]
    fn k0_branch_closed_form() {
        let r = optimize(300.0, &narrow()).unwrap();
        assert_eq!(r.k_star, 0);
        assert!((r.omega_star - 500.0).abs() < 1e-6);
        assert!((r.eta_m - 0.912004863497210782).abs() < 1e-9);
    }

    #[test]
    fn k1_reaches_bessel_maximum() {
        let r = optimize(700.0, &narrow()).unwrap();
        assert_eq!(r.k_star, 1);
        assert!((r.eta_m - 0.58186522428159638).abs() < 1e-4);
        assert!((r.a_star / r.omega_star - 1.84118378134065930).abs() < 1e-3);
    }

    #[test]
    fn degenerate_interval_is_used() {
        let bx = ConstraintBox::new(1000.0, 100.0, 500.0).unwrap();
        assert_eq!(branch_interval(2000.0, 2, &bx), Some((500.0, 500.0)));
        let r = optimize(2000.0, &bx).unwrap();
        assert!((r.eta_m - 0.352834028615637719).abs() < 1e-9);
        assert_eq!((r.k_star, r.omega_star), (2, 500.0));
    }

    #[test]
    fn constraint_identity() {
        for d in [150.0, 480.0, 777.0, 1234.5, 1999.0] {
            let r = optimize(d, &narrow()).unwrap();
            assert!((r.a_star + r.k_star as f64 * r.omega_star - d).abs() < 1e-6);
            assert!(r.a_star > 0.0 && r.a_star <= 500.0 + 1e-9);
            assert!(r.omega_star >= 100.0 && r.omega_star <= 500.0);
            let eta = jn(r.k_star as i32, r.a_star / r.omega_star).abs();
            assert!((eta - r.eta_m).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_requests() {
        assert!(matches!(optimize(0.0, &narrow()), Err(OptimizeError::Infeasible(_))));
        assert!(matches!(optimize(-5.0, &narrow()), Err(OptimizeError::Infeasible(_))));
        let tight = ConstraintBox::new(10.0, 100.0, 100.0).unwrap();
        assert!(matches!(optimize(150.0, &tight), Err(OptimizeError::Infeasible(_))));
        assert!(ConstraintBox::new(1.0, 5.0, 4.0).is_err());
        assert!(ConstraintBox::new(0.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn map_keeps_failures() {
        let tight = ConstraintBox::new(10.0, 100.0, 100.0).unwrap();
        let out = sensitivity_map(&[5.0, 150.0, 205.0], &tight).unwrap();
        assert!(out[0].is_ok());
        assert!(out[1].is_err());
        assert!(out[2].is_ok());
        assert_eq!(
            sensitivity_map(&[2.0, 1.0], &tight).unwrap_err(),
            OptimizeError::UnsortedRange
        );
    }

    #[test]
    fn field_units() {
        let mut r = optimize(300.0, &narrow()).unwrap();
        r.eta_m = 1.0;
        assert_eq!(sensitivity_in_field_units(&r, 20.0), 20.0);
        r.eta_m = 0.5;
        assert_eq!(sensitivity_in_field_units(&r, 20.0), 40.0);
    }
}
