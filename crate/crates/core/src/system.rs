//! Parameter containers and the RF tuning algebra.
//!
//! Every frequency-like quantity is stored as a numeral `v` in MHz whose
//! physical angular frequency is `2*pi*v` Mrad/s. Times are in microseconds, so
//! a phase accumulates as `2*pi*v*t`.

use thiserror::Error;

use crate::special_functions::{jn, MAX_ORDER};

/// Default sideband truncation for second-order sums.
pub const DEFAULT_M_MAX: i32 = 50;

/// A sideband whose detuning falls below this (MHz) is treated as resonant.
pub const SINGULAR_DETUNING: f64 = 1e-6;

/// Maximum fixed-point iterations when solving the resonance condition.
pub const TUNING_MAX_ITER: usize = 100;

/// Residual (MHz) at which the resonance condition counts as satisfied.
pub const TUNING_TOLERANCE: f64 = 1e-9;

/// `|J_k|` below this makes the second-order bound diverge.
pub const BOUND_ZERO_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be finite and non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("modulation frequency omega must be positive, got {0}")]
    NonPositiveOmega(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TuningError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("sideband truncation m_max = {m_max} must be at least |k| + 5 = {need} and at most {MAX_ORDER}")]
    Truncation { m_max: i32, need: i32 },
    #[error("sideband m = {m} is itself resonant (detuning {detuning:e} MHz)")]
    SingularSideband { m: i32, detuning: f64 },
    #[error("invalid tuning request: {0}")]
    InvalidRequest(String),
    #[error("resonance condition did not converge after {iterations} iterations (residual {residual:e} MHz)")]
    NonConvergence { iterations: usize, residual: f64 },
}

/// Decay rates of the four levels, in MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    pub gamma: [f64; 4],
}

impl DecayRates {
    pub fn new(g1: f64, g2: f64, g3: f64, g4: f64) -> Self {
        Self {
            gamma: [g1, g2, g3, g4],
        }
    }

    /// Coherence damping `(gamma_i + gamma_j) / 2` for zero-based levels.
    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.gamma[i] + self.gamma[j])
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        const NAMES: [&str; 4] = ["gamma1", "gamma2", "gamma3", "gamma4"];
        for (name, &g) in NAMES.iter().zip(&self.gamma) {
            non_negative(name, g)?;
        }
        Ok(())
    }
}

/// All laser, microwave, RF and decay parameters of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Probe Rabi frequency, levels 1-2.
    pub omega_p_rabi: f64,
    /// Coupling Rabi frequency, levels 2-3.
    pub omega_c_rabi: f64,
    pub delta_p: f64,
    pub delta_c: f64,
    /// Local-oscillator microwave Rabi frequency.
    pub omega_local: f64,
    /// Signal microwave Rabi frequency.
    pub omega_signal: f64,
    /// Local/signal frequency difference.
    pub delta_f: f64,
    /// Microwave detuning `omega_34 - omega_M`.
    pub delta_mw: f64,
    /// Stark amplitude `A` of level 3.
    pub stark_3: f64,
    /// Stark amplitude `A'` of level 4.
    pub stark_4: f64,
    /// Control modulation frequency (twice the RF frequency).
    pub omega: f64,
    pub decay: DecayRates,
}

impl SystemParams {
    /// Parameter set of the reference far-detuned configuration: probe 0.1,
    /// coupling 10, microwave 40 detuned by 600, `A = 5`, `a = 0.5*omega`
    /// with `omega = 401.209` on the `k = 1` sideband.
    pub fn reference() -> Self {
        let omega = 401.209;
        let stark_3 = 5.0;
        Self {
            omega_p_rabi: 0.1,
            omega_c_rabi: 10.0,
            delta_p: 0.0,
            delta_c: 5.0 + 1.8135 / 2.0,
            omega_local: 40.0,
            omega_signal: 0.0,
            delta_f: 1e-3,
            delta_mw: 600.0,
            stark_3,
            stark_4: stark_3 + 0.5 * omega,
            omega,
            decay: DecayRates::new(0.0, 5.0, 0.003, 0.003),
        }
    }

    /// `a = A' - A`.
    #[inline]
    pub fn differential_stark(&self) -> f64 {
        self.stark_4 - self.stark_3
    }

    /// Microwave Rabi magnitude at zero beat phase, `Omega_L + Omega_s`.
    #[inline]
    pub fn static_mw_rabi(&self) -> f64 {
        self.omega_local + self.omega_signal
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        non_negative("omega_p_rabi", self.omega_p_rabi)?;
        non_negative("omega_c_rabi", self.omega_c_rabi)?;
        non_negative("omega_local", self.omega_local)?;
        non_negative("omega_signal", self.omega_signal)?;
        finite("delta_p", self.delta_p)?;
        finite("delta_c", self.delta_c)?;
        finite("delta_f", self.delta_f)?;
        finite("delta_mw", self.delta_mw)?;
        finite("stark_3", self.stark_3)?;
        finite("stark_4", self.stark_4)?;
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(ParamError::NonPositiveOmega(self.omega));
        }
        self.decay.validate()?;
        if !self.is_far_detuned() {
            log::warn!(
                "microwave Rabi {} is not far detuned from delta_M = {}",
                self.static_mw_rabi(),
                self.delta_mw
            );
        }
        Ok(())
    }

    /// `|Omega_L + Omega_s| <= 0.2 |Delta_M|`.
    pub fn is_far_detuned(&self) -> bool {
        self.static_mw_rabi().abs() <= 0.2 * self.delta_mw.abs()
    }

    /// Copy with the RF field set to `tuning` and the coupling laser moved to
    /// `A + delta_M / 2`.
    pub fn with_tuning(&self, tuning: &RfTuning) -> Self {
        let mut p = self.clone();
        p.omega = tuning.omega;
        p.stark_4 = p.stark_3 + tuning.a;
        p.delta_c = tuning.delta_c;
        p
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ParamError::Negative { name, value })
    }
}

fn finite(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::NonFinite { name, value })
    }
}

/// Effective detunings of the time-independent model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDetunings {
    /// Second-order shift `delta_M`.
    pub delta_m_shift: f64,
    /// `delta_c = Delta_c - A - delta_M / 2`.
    pub delta_c_eff: f64,
    /// `Delta_M^eff = Delta_M - a - k*omega + delta_M`.
    pub delta_m_eff: f64,
    pub a: f64,
    pub k: i32,
}

/// Which detuning enters the off-resonant sideband denominators of `delta_M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftDenominator {
    /// `(k - m) * omega`: the high-frequency part only, with the residual
    /// `Delta_M - a - k*omega` of the retained sideband treated as low frequency.
    #[default]
    Floquet,
    /// `Delta_M - a - m*omega`: the full sideband detuning.
    Detuned,
}

fn check_truncation(k: i32, m_max: i32) -> Result<(), TuningError> {
    let need = k.abs() + 5;
    if m_max < need || m_max > MAX_ORDER {
        return Err(TuningError::Truncation { m_max, need });
    }
    Ok(())
}

/// Raw second-order sum for an explicit geometry.
pub(crate) fn shift_sum(
    omega_mw: f64,
    delta_mw: f64,
    a: f64,
    omega: f64,
    k: i32,
    m_max: i32,
    denominator: ShiftDenominator,
) -> Result<f64, TuningError> {
    let ratio = a / omega;
    let mut sum = 0.0;
    for m in -m_max..=m_max {
        if m == k {
            continue;
        }
        let detuning = delta_mw - a - m as f64 * omega;
        if detuning.abs() < SINGULAR_DETUNING {
            return Err(TuningError::SingularSideband { m, detuning });
        }
        let denom = match denominator {
            ShiftDenominator::Floquet => (k - m) as f64 * omega,
            ShiftDenominator::Detuned => detuning,
        };
        let j = jn(m, ratio);
        sum += j * j / (2.0 * denom);
    }
    Ok(omega_mw * omega_mw * sum)
}

/// Second-order quantum-mixing shift `delta_M` (MHz) for sideband `k`.
///
/// Uses the static microwave magnitude `Omega_L + Omega_s`.
pub fn second_order_shift(params: &SystemParams, k: i32, m_max: i32) -> Result<f64, TuningError> {
    second_order_shift_with(params, k, m_max, ShiftDenominator::Floquet)
}

pub fn second_order_shift_with(
    params: &SystemParams,
    k: i32,
    m_max: i32,
    denominator: ShiftDenominator,
) -> Result<f64, TuningError> {
    params.validate()?;
    check_truncation(k, m_max)?;
    shift_sum(
        params.static_mw_rabi(),
        params.delta_mw,
        params.differential_stark(),
        params.omega,
        k,
        m_max,
        denominator,
    )
}

/// Effective detunings for sideband `k`; `include_second_order = false` zeroes
/// `delta_M` everywhere.
pub fn effective_detunings(
    params: &SystemParams,
    k: i32,
    m_max: i32,
    include_second_order: bool,
) -> Result<EffectiveDetunings, TuningError> {
    let shift = if include_second_order {
        second_order_shift(params, k, m_max)?
    } else {
        params.validate()?;
        0.0
    };
    Ok(detunings_for_shift(params, k, shift))
}

pub(crate) fn detunings_for_shift(params: &SystemParams, k: i32, shift: f64) -> EffectiveDetunings {
    let a = params.differential_stark();
    EffectiveDetunings {
        delta_m_shift: shift,
        delta_c_eff: params.delta_c - params.stark_3 - 0.5 * shift,
        delta_m_eff: params.delta_mw - a - k as f64 * params.omega + shift,
        a,
        k,
    }
}

/// RF parameters that put sideband `k` on resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfTuning {
    pub omega: f64,
    pub a: f64,
    pub delta_m_shift: f64,
    /// Coupling detuning `A + delta_M / 2` that zeroes `delta_c`.
    pub delta_c: f64,
    pub k: i32,
    pub iterations: usize,
}

impl RfTuning {
    /// `a + k*omega - delta_M - Delta_M`.
    pub fn residual(&self, delta_mw: f64) -> f64 {
        self.a + self.k as f64 * self.omega - self.delta_m_shift - delta_mw
    }
}

/// Solve `Delta_M = a + k*omega - delta_M` for `omega` at fixed `a/omega`.
///
/// `delta_M` depends on `omega`, so the relation is iterated by plain
/// substitution, re-evaluating the shift at each step. The microwave
/// magnitude, `A` and decay rates are taken from `params`.
pub fn solve_rf_resonance(
    delta_mw: f64,
    ratio: f64,
    k: i32,
    params: &SystemParams,
) -> Result<RfTuning, TuningError> {
    solve_rf_resonance_with(delta_mw, ratio, k, params, DEFAULT_M_MAX, ShiftDenominator::Floquet)
}

pub fn solve_rf_resonance_with(
    delta_mw: f64,
    ratio: f64,
    k: i32,
    params: &SystemParams,
    m_max: i32,
    denominator: ShiftDenominator,
) -> Result<RfTuning, TuningError> {
    if k < 0 {
        return Err(TuningError::InvalidRequest(format!("k must be >= 0, got {k}")));
    }
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(TuningError::InvalidRequest(format!("a/omega must be > 0, got {ratio}")));
    }
    if !(delta_mw.is_finite() && delta_mw > 0.0) {
        return Err(TuningError::InvalidRequest(format!("Delta_M must be > 0, got {delta_mw}")));
    }
    check_truncation(k, m_max)?;
    let omega_mw = params.static_mw_rabi();
    let scale = ratio + k as f64;
    let mut omega = delta_mw / scale;
    let mut residual = f64::INFINITY;
    for iteration in 1..=TUNING_MAX_ITER {
        let a = ratio * omega;
        let shift = shift_sum(omega_mw, delta_mw, a, omega, k, m_max, denominator)?;
        residual = a + k as f64 * omega - shift - delta_mw;
        if residual.abs() <= TUNING_TOLERANCE {
            return Ok(RfTuning {
                omega,
                a,
                delta_m_shift: shift,
                delta_c: params.stark_3 + 0.5 * shift,
                k,
                iterations: iteration,
            });
        }
        omega = (delta_mw + shift) / scale;
    }
    Err(TuningError::NonConvergence {
        iterations: TUNING_MAX_ITER,
        residual,
    })
}

/// Upper bound on `|delta_M / (J_k(a/omega) Omega_M)|` when
/// `Omega_M J_k <= 0.1 omega`.
///
/// Returns `f64::INFINITY` where `|J_k(ratio)| < 1e-12`.
pub fn second_order_bound(ratio: f64, k: i32, m_max: i32) -> Result<f64, TuningError> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(TuningError::InvalidRequest(format!("a/omega must be > 0, got {ratio}")));
    }
    check_truncation(k, m_max)?;
    let jk = jn(k, ratio);
    if jk.abs() < BOUND_ZERO_THRESHOLD {
        return Ok(f64::INFINITY);
    }
    let mut sum = 0.0;
    for m in -m_max..=m_max {
        if m == k {
            continue;
        }
        let jm = jn(m, ratio);
        sum += 0.1 * jm * jm / (-2.0 * (m - k) as f64);
    }
    Ok((sum / (jk * jk)).abs())
}
