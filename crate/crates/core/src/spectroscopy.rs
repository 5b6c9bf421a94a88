//! Probe-detuning sweeps of `Im rho_21` and Autler-Townes splitting extraction.

use rayon::prelude::*;
use thiserror::Error;

use crate::hamiltonian::{
    build_effective_truncated, HamiltonianError, ModelVariant, OriginalModel, RotatedModel,
    TimeDependentHamiltonian, DEFAULT_N_MAX,
};
use crate::lindblad::{
    max_step, propagate_recording, rho21_observable, steady_state, time_averaged_observable,
    DensityMatrix, LindbladError, Recording,
};
use crate::system::{SystemParams, DEFAULT_M_MAX};

/// Default probe grid: 401 points over [-30, 30] MHz.
pub const DEFAULT_GRID_POINTS: usize = 401;
pub const DEFAULT_GRID_HALF_WIDTH: f64 = 30.0;

/// Fraction of the global maximum a local maximum must exceed to count as a peak.
pub const PEAK_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("hamiltonian: {0}")]
    Hamiltonian(#[from] HamiltonianError),
    #[error("lindblad: {0}")]
    Lindblad(#[from] LindbladError),
    #[error("expected exactly 2 peaks above {PEAK_THRESHOLD} of the maximum, found {found}")]
    PeakCount { found: usize },
    #[error("time-dependent variants need gamma2 > 0 to set the burn-in")]
    NoBurnIn,
}

/// Numerical knobs for spectrum sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    /// Sideband retained by the effective model.
    pub k: i32,
    pub m_max: i32,
    pub n_max: i32,
    /// Burn-in before averaging (us); `None` means `10 / gamma2`.
    pub burn_in: Option<f64>,
    /// Number of `1/omega` periods averaged after the burn-in.
    pub averaging_periods: usize,
    /// Requested integration step (us); `None` uses the stability limit.
    /// A step above the limit is rejected by the propagator.
    pub max_dt: Option<f64>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            k: 1,
            m_max: DEFAULT_M_MAX,
            n_max: DEFAULT_N_MAX,
            burn_in: None,
            averaging_periods: 200,
            max_dt: None,
        }
    }
}

/// `n` evenly spaced points over `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

pub fn default_grid() -> Vec<f64> {
    linear_grid(-DEFAULT_GRID_HALF_WIDTH, DEFAULT_GRID_HALF_WIDTH, DEFAULT_GRID_POINTS)
}

/// `Im rho_21` (or a derived signal) sampled against probe detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub variant: ModelVariant,
    pub points: Vec<(f64, f64)>,
    pub meta: SystemParams,
}

impl SpectrumTrace {
    pub fn new(
        variant: ModelVariant,
        points: Vec<(f64, f64)>,
        meta: SystemParams,
    ) -> Result<Self, SpectrumError> {
        check_grid(points.iter().map(|p| p.0))?;
        Ok(Self {
            variant,
            points,
            meta,
        })
    }

    pub fn detunings(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn peak(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Transmission-like signal `max(v) - v`: its peaks are the transparency
    /// windows of the absorption spectrum.
    pub fn transparency(&self) -> SpectrumTrace {
        let top = self.peak();
        SpectrumTrace {
            variant: self.variant,
            points: self.points.iter().map(|&(x, v)| (x, top - v)).collect(),
            meta: self.meta.clone(),
        }
    }

    /// `sum x v / sum v`.
    pub fn center_of_mass(&self) -> f64 {
        let (num, den) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(n, d), &(x, v)| (n + x * v, d + v));
        num / den
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let pts = &self.points;
        if x < pts[0].0 || x > pts[pts.len() - 1].0 {
            return None;
        }
        let idx = pts.partition_point(|p| p.0 <= x);
        if idx == 0 {
            return Some(pts[0].1);
        }
        if idx == pts.len() {
            return Some(pts[pts.len() - 1].1);
        }
        let (x0, y0) = pts[idx - 1];
        let (x1, y1) = pts[idx];
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }
}

fn check_grid<I: IntoIterator<Item = f64>>(grid: I) -> Result<(), SpectrumError> {
    let mut count = 0usize;
    let mut prev = f64::NEG_INFINITY;
    for x in grid {
        if !x.is_finite() || x <= prev {
            return Err(SpectrumError::Grid(
                "detunings must be finite and strictly increasing".into(),
            ));
        }
        prev = x;
        count += 1;
    }
    if count < 3 {
        return Err(SpectrumError::Grid(format!("need at least 3 points, got {count}")));
    }
    Ok(())
}

/// Sweep `Im rho_21` of `variant` over the probe detunings in `grid`.
///
/// Effective variants are solved for their steady state. Time-dependent
/// variants are propagated from the ground state in their periodic frame,
/// burned in, and averaged over whole modulation periods.
pub fn sweep_spectrum(
    params: &SystemParams,
    variant: ModelVariant,
    grid: &[f64],
    settings: &SweepSettings,
) -> Result<SpectrumTrace, SpectrumError> {
    check_grid(grid.iter().copied())?;
    params.validate().map_err(HamiltonianError::from)?;
    let points = grid
        .par_iter()
        .map(|&dp| {
            let mut p = params.clone();
            p.delta_p = dp;
            probe_coherence(&p, variant, settings).map(|rho21| (dp, rho21.im))
        })
        .collect::<Result<Vec<_>, _>>()?;
    SpectrumTrace::new(variant, points, params.clone())
}

/// Quasi-stationary `rho_21` of one model at the probe detuning in `params`.
pub fn probe_coherence(
    params: &SystemParams,
    variant: ModelVariant,
    settings: &SweepSettings,
) -> Result<num_complex::Complex64, SpectrumError> {
    match variant {
        ModelVariant::Effective | ModelVariant::EffectiveNo2nd => {
            let include = variant == ModelVariant::Effective;
            let (h, _) = build_effective_truncated(params, settings.k, include, settings.m_max)?;
            Ok(steady_state(&h, &params.decay)?.rho21())
        }
        ModelVariant::Original => {
            let model = OriginalModel::new(params)?.corotating();
            averaged_rho21(&model, params, settings)
        }
        ModelVariant::Rotated => {
            let model = RotatedModel::new(params, settings.n_max)?.corotating();
            averaged_rho21(&model, params, settings)
        }
    }
}

fn averaged_rho21<H: TimeDependentHamiltonian>(
    model: &H,
    params: &SystemParams,
    settings: &SweepSettings,
) -> Result<num_complex::Complex64, SpectrumError> {
    let period = 1.0 / params.omega;
    let burn_in = match settings.burn_in {
        Some(b) => b,
        None if params.decay.gamma[1] > 0.0 => 10.0 / params.decay.gamma[1],
        None => return Err(SpectrumError::NoBurnIn),
    };
    let step = settings.max_dt.unwrap_or_else(|| max_step(model));
    let steps_per_period = (period / step).ceil().max(1.0);
    let dt = period / steps_per_period;
    let t_start = (burn_in / period).ceil() * period;
    let t_end = t_start + settings.averaging_periods.max(1) as f64 * period;
    let trajectory = propagate_recording(
        model,
        &params.decay,
        &DensityMatrix::ground(),
        t_end,
        dt,
        Recording {
            from: t_start,
            stride: 1,
        },
    )?;
    Ok(time_averaged_observable(
        &trajectory,
        &rho21_observable(),
        t_start,
        period,
    )?)
}

/// Autler-Townes splitting read off two peaks of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtSplitting {
    pub splitting: f64,
    pub peaks: [f64; 2],
}

/// Distance between the two qualifying local maxima of `trace`, each refined
/// by a three-point parabola.
///
/// Apply it to [`SpectrumTrace::transparency`] to measure the splitting of
/// the transparency windows of an absorption spectrum.
pub fn extract_at_splitting(trace: &SpectrumTrace) -> Result<AtSplitting, SpectrumError> {
    let pts = &trace.points;
    let top = trace.peak();
    let threshold = PEAK_THRESHOLD * top;
    let mut peaks = Vec::new();
    for i in 1..pts.len() - 1 {
        let (v0, v1, v2) = (pts[i - 1].1, pts[i].1, pts[i + 1].1);
        if v1 > v0 && v1 >= v2 && v1 > threshold {
            peaks.push(refine_peak(pts[i - 1], pts[i], pts[i + 1]));
        }
    }
    if peaks.len() != 2 {
        return Err(SpectrumError::PeakCount { found: peaks.len() });
    }
    Ok(AtSplitting {
        splitting: (peaks[1] - peaks[0]).abs(),
        peaks: [peaks[0], peaks[1]],
    })
}

fn refine_peak(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let (x0, y0) = a;
    let (x1, y1) = b;
    let (x2, y2) = c;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature == 0.0 {
        return x1;
    }
    // Vertex of the interpolating parabola.
    0.5 * (x0 + x1) - d01 / (2.0 * curvature)
}
