//! Adiabatic heterodyne signal `dT(t)` and its beat amplitude.
//!
//! The microwave field is the sum of a local oscillator and a weak signal
//! offset by `delta_f`. For `delta_f` far below every other rate the atoms
//! follow the instantaneous field magnitude, so each sample is a steady state
//! of the effective model.

use std::f64::consts::TAU;

use log::warn;
use rayon::prelude::*;
use thiserror::Error;

use crate::hamiltonian::{effective_matrix, HamiltonianError, ModelVariant};
use crate::lindblad::{steady_state, LindbladError};
use crate::spectroscopy::linear_grid;
use crate::system::{
    detunings_for_shift, second_order_shift, EffectiveDetunings, SystemParams, DEFAULT_M_MAX,
};

pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 256;
pub const MIN_SAMPLES_PER_PERIOD: usize = 64;

/// Coarse probe scan used to pick the operating point.
pub const OPERATING_SCAN_POINTS: usize = 121;
pub const OPERATING_SCAN_HALF_WIDTH: f64 = 30.0;
/// Slopes within this relative distance of the steepest count as ties; the
/// smallest detuning among them wins.
pub const OPERATING_TIE_TOLERANCE: f64 = 1e-3;
/// Finite-difference step for the slope, relative to `Omega_L`.
const SLOPE_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeterodyneError {
    #[error("variant {0:?} has no adiabatic heterodyne model; use an effective variant")]
    Variant(ModelVariant),
    #[error("invalid settings: {0}")]
    Settings(String),
    #[error("hamiltonian: {0}")]
    Hamiltonian(#[from] HamiltonianError),
    #[error("lindblad: {0}")]
    Lindblad(#[from] LindbladError),
    #[error("trace spans {span} us, shorter than one beat period {period} us")]
    InsufficientSpan { span: f64, period: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeterodyneSettings {
    pub k: i32,
    pub m_max: i32,
    pub samples_per_period: usize,
    /// Number of beat periods `1/delta_f` to synthesize.
    pub periods: usize,
    /// Transmission scale applied to `Im rho_21`.
    pub kappa: f64,
    /// Probe detuning; `None` selects the steepest-slope operating point.
    pub delta_p_probe: Option<f64>,
}

impl Default for HeterodyneSettings {
    fn default() -> Self {
        Self {
            k: 1,
            m_max: DEFAULT_M_MAX,
            samples_per_period: DEFAULT_SAMPLES_PER_PERIOD,
            periods: 2,
            kappa: 1.0,
            delta_p_probe: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeterodyneTrace {
    /// `(t [us], dT)` samples.
    pub points: Vec<(f64, f64)>,
    pub kappa: f64,
    pub variant: ModelVariant,
    pub delta_p_probe: f64,
    /// Beat period `1/delta_f` in us.
    pub period: f64,
}

impl HeterodyneTrace {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }
}

/// `|Omega_L + Omega_s exp(i phase)|`.
pub fn beat_magnitude(omega_local: f64, omega_signal: f64, phase: f64) -> f64 {
    (omega_local * omega_local
        + omega_signal * omega_signal
        + 2.0 * omega_local * omega_signal * phase.cos())
    .sqrt()
}

fn check_settings(settings: &HeterodyneSettings) -> Result<(), HeterodyneError> {
    if settings.samples_per_period < MIN_SAMPLES_PER_PERIOD {
        return Err(HeterodyneError::Settings(format!(
            "samples_per_period must be >= {MIN_SAMPLES_PER_PERIOD}, got {}",
            settings.samples_per_period
        )));
    }
    if settings.periods == 0 {
        return Err(HeterodyneError::Settings("periods must be >= 1".into()));
    }
    if !settings.kappa.is_finite() {
        return Err(HeterodyneError::Settings(format!("kappa must be finite, got {}", settings.kappa)));
    }
    Ok(())
}

/// Detunings of `variant`, with the shift evaluated at the static magnitude.
fn variant_detunings(
    params: &SystemParams,
    variant: ModelVariant,
    k: i32,
    m_max: i32,
) -> Result<EffectiveDetunings, HeterodyneError> {
    params.validate().map_err(HamiltonianError::from)?;
    let shift = match variant {
        ModelVariant::Effective => {
            second_order_shift(params, k, m_max).map_err(HamiltonianError::from)?
        }
        ModelVariant::EffectiveNo2nd => 0.0,
        other => return Err(HeterodyneError::Variant(other)),
    };
    Ok(detunings_for_shift(params, k, shift))
}

fn im_rho21(
    params: &SystemParams,
    detunings: &EffectiveDetunings,
    magnitude: f64,
) -> Result<f64, HeterodyneError> {
    let h = effective_matrix(params, magnitude, detunings);
    Ok(steady_state(&h, &params.decay)?.rho21().im)
}

/// Probe detuning of steepest `|d Im rho_21 / d Omega_M|` at `Omega_M = Omega_L`.
pub fn operating_point(
    params: &SystemParams,
    settings: &HeterodyneSettings,
) -> Result<f64, HeterodyneError> {
    let detunings = variant_detunings(params, ModelVariant::Effective, settings.k, settings.m_max)?;
    let h = SLOPE_STEP * params.omega_local.abs().max(1.0);
    let grid = linear_grid(
        -OPERATING_SCAN_HALF_WIDTH,
        OPERATING_SCAN_HALF_WIDTH,
        OPERATING_SCAN_POINTS,
    );
    let slopes = grid
        .par_iter()
        .map(|&dp| {
            let mut p = params.clone();
            p.delta_p = dp;
            let d = detunings_for_shift(&p, settings.k, detunings.delta_m_shift);
            let up = im_rho21(&p, &d, params.omega_local + h)?;
            let down = im_rho21(&p, &d, params.omega_local - h)?;
            Ok(((up - down) / (2.0 * h)).abs())
        })
        .collect::<Result<Vec<f64>, HeterodyneError>>()?;
    let steepest = slopes.iter().copied().fold(0.0, f64::max);
    let pick = grid
        .iter()
        .zip(&slopes)
        .find(|(_, &s)| s >= steepest * (1.0 - OPERATING_TIE_TOLERANCE))
        .map(|(&dp, _)| dp)
        .unwrap_or(0.0);
    Ok(pick)
}

/// Synthesize `dT(t) = kappa (Im rho_21(t) - Im rho_21|_{Omega_s = 0})`.
pub fn synthesize(
    params: &SystemParams,
    variant: ModelVariant,
    settings: &HeterodyneSettings,
) -> Result<HeterodyneTrace, HeterodyneError> {
    check_settings(settings)?;
    if !matches!(variant, ModelVariant::Effective | ModelVariant::EffectiveNo2nd) {
        return Err(HeterodyneError::Variant(variant));
    }
    if !(params.delta_f > 0.0) {
        return Err(HeterodyneError::Settings(format!(
            "delta_f must be > 0, got {}",
            params.delta_f
        )));
    }
    if params.delta_f > params.decay.gamma[1] / 100.0 {
        warn!(
            "delta_f = {} exceeds gamma2/100; the adiabatic trace may be inaccurate",
            params.delta_f
        );
    }
    let delta_p = match settings.delta_p_probe {
        Some(dp) => dp,
        None => operating_point(params, settings)?,
    };
    let mut p = params.clone();
    p.delta_p = delta_p;
    let detunings = variant_detunings(&p, variant, settings.k, settings.m_max)?;
    let baseline = im_rho21(&p, &detunings, beat_magnitude(p.omega_local, 0.0, 0.0))?;

    let period = 1.0 / p.delta_f;
    let n = settings.samples_per_period * settings.periods + 1;
    let dt = period / settings.samples_per_period as f64;
    let points = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 * dt;
            let magnitude = beat_magnitude(p.omega_local, p.omega_signal, TAU * p.delta_f * t);
            let value = im_rho21(&p, &detunings, magnitude)?;
            Ok((t, settings.kappa * (value - baseline)))
        })
        .collect::<Result<Vec<_>, HeterodyneError>>()?;
    Ok(HeterodyneTrace {
        points,
        kappa: settings.kappa,
        variant,
        delta_p_probe: delta_p,
        period,
    })
}

/// Half the peak-to-peak excursion of `dT` over the first beat period.
pub fn amplitude(trace: &HeterodyneTrace) -> Result<f64, HeterodyneError> {
    let (t0, t_last) = match (trace.points.first(), trace.points.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => {
            return Err(HeterodyneError::InsufficientSpan {
                span: 0.0,
                period: trace.period,
            })
        }
    };
    let span = t_last - t0;
    if !(span >= trace.period * (1.0 - 1e-9)) {
        return Err(HeterodyneError::InsufficientSpan {
            span,
            period: trace.period,
        });
    }
    let end = t0 + trace.period * (1.0 + 1e-9);
    let (lo, hi) = trace
        .points
        .iter()
        .take_while(|p| p.0 <= end)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.1), hi.max(p.1))
        });
    Ok(0.5 * (hi - lo))
}
