//! Four-level Hamiltonians: the driven original model, its Bessel-expanded
//! rotated form, and the time-independent effective model.
//!
//! Matrices hold `H / (2*pi*hbar)` in MHz. The master equation multiplies them
//! by `2*pi` when forming the generator.

use std::f64::consts::TAU;

use nalgebra::Matrix4;
use num_complex::Complex64;
use thiserror::Error;

use crate::special_functions::{jn, MAX_ORDER};
use crate::system::{
    detunings_for_shift, second_order_shift, EffectiveDetunings, ParamError, SystemParams,
    TuningError, DEFAULT_M_MAX,
};

pub type Matrix4c = Matrix4<Complex64>;

/// Alias for a 4x4 Hamiltonian in MHz.
pub type HamiltonianMatrix = Matrix4c;

/// Default Bessel sideband truncation for the rotated model.
pub const DEFAULT_N_MAX: i32 = 40;

/// Sidebands with a coefficient below this (MHz) are ignored when estimating
/// the fastest frequency of the rotated model.
const NEGLIGIBLE_SIDEBAND: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HamiltonianError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Tuning(#[from] TuningError),
    #[error("sideband truncation n_max = {n_max} must be in [{need}, {MAX_ORDER}]")]
    Truncation { n_max: i32, need: i32 },
}

/// The model variants compared in the spectra and heterodyne traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelVariant {
    Original,
    Rotated,
    Effective,
    EffectiveNo2nd,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::Original,
        ModelVariant::Rotated,
        ModelVariant::Effective,
        ModelVariant::EffectiveNo2nd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::Original => "original",
            ModelVariant::Rotated => "rotated",
            ModelVariant::Effective => "effective",
            ModelVariant::EffectiveNo2nd => "effective_no2nd",
        }
    }

    pub fn is_time_dependent(self) -> bool {
        matches!(self, ModelVariant::Original | ModelVariant::Rotated)
    }
}

/// A Hamiltonian that can be sampled at any time (microseconds).
pub trait TimeDependentHamiltonian: Sync {
    fn at(&self, t: f64) -> Matrix4c;

    /// Largest frequency (MHz) present, used to bound integration steps.
    fn max_frequency(&self) -> f64;
}

/// A constant Hamiltonian.
#[derive(Debug, Clone, Copy)]
pub struct StaticHamiltonian(pub Matrix4c);

impl TimeDependentHamiltonian for StaticHamiltonian {
    fn at(&self, _t: f64) -> Matrix4c {
        self.0
    }

    fn max_frequency(&self) -> f64 {
        // Eigenvalue spread is bounded by twice the largest absolute row sum.
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            let row: f64 = (0..4).map(|j| self.0[(i, j)].norm()).sum();
            worst = worst.max(row);
        }
        2.0 * worst
    }
}

#[inline]
fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

fn set_coupling(h: &mut Matrix4c, i: usize, j: usize, value: Complex64) {
    h[(i, j)] += value;
    h[(j, i)] += value.conj();
}

/// Driven four-level Hamiltonian in the interaction picture at time `t`.
///
/// `omega_mw` is the instantaneous complex microwave Rabi frequency.
pub fn build_original(params: &SystemParams, t: f64, omega_mw: Complex64) -> Matrix4c {
    let mut h = Matrix4c::zeros();
    set_coupling(
        &mut h,
        0,
        1,
        cis(TAU * params.delta_p * t) * (-0.5 * params.omega_p_rabi),
    );
    set_coupling(
        &mut h,
        1,
        2,
        cis(TAU * params.delta_c * t) * (-0.5 * params.omega_c_rabi),
    );
    set_coupling(&mut h, 2, 3, cis(TAU * params.delta_mw * t) * omega_mw * -0.5);
    let modulation = 1.0 + (TAU * params.omega * t).cos();
    h[(2, 2)] = Complex64::new(params.stark_3 * modulation, 0.0);
    h[(3, 3)] = Complex64::new(params.stark_4 * modulation, 0.0);
    h
}

/// The original model with a static microwave field `Omega_L + Omega_s`.
#[derive(Debug, Clone)]
pub struct OriginalModel {
    pub params: SystemParams,
    pub omega_mw: Complex64,
}

impl OriginalModel {
    pub fn new(params: &SystemParams) -> Result<Self, HamiltonianError> {
        params.validate()?;
        Ok(Self {
            params: params.clone(),
            omega_mw: Complex64::new(params.static_mw_rabi(), 0.0),
        })
    }

    /// Frame that removes every laser and microwave phase, leaving a model
    /// periodic in `1/omega` whose level-1/level-2 coherence is stationary.
    pub fn corotating(self) -> CoRotating<Self> {
        let p = &self.params;
        let f2 = p.delta_p;
        let f3 = f2 + p.delta_c;
        let f4 = f3 + p.delta_mw;
        CoRotating::new(self, [0.0, f2, f3, f4])
    }
}

impl TimeDependentHamiltonian for OriginalModel {
    fn at(&self, t: f64) -> Matrix4c {
        build_original(&self.params, t, self.omega_mw)
    }

    fn max_frequency(&self) -> f64 {
        let p = &self.params;
        [
            p.delta_p.abs(),
            p.delta_c.abs(),
            p.delta_mw.abs(),
            p.omega,
            2.0 * p.stark_3.abs(),
            2.0 * p.stark_4.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// One term `coef * exp(i 2 pi freq t)` of a sideband-expanded coupling.
#[derive(Debug, Clone, Copy)]
struct Sideband {
    coef: f64,
    freq: f64,
}

/// Hamiltonian after removing the control field by `U(t) = exp(-i int H_C)`,
/// with the Bessel expansion truncated at `|n|, |m| <= n_max`.
#[derive(Debug, Clone)]
pub struct RotatedModel {
    pub params: SystemParams,
    pub n_max: i32,
    coupling: Vec<Sideband>,
    microwave: Vec<Sideband>,
}

/// Smallest admissible truncation for the rotated model.
pub fn min_rotated_truncation(params: &SystemParams) -> i32 {
    let a = params.differential_stark();
    let largest = (params.stark_3 / params.omega)
        .abs()
        .max((a / params.omega).abs());
    largest.ceil() as i32 + 20
}

impl RotatedModel {
    pub fn new(params: &SystemParams, n_max: i32) -> Result<Self, HamiltonianError> {
        params.validate()?;
        let need = min_rotated_truncation(params);
        if n_max < need || n_max > MAX_ORDER {
            return Err(HamiltonianError::Truncation { n_max, need });
        }
        let p = params;
        let a = p.differential_stark();
        let coupling = (-n_max..=n_max)
            .map(|n| Sideband {
                coef: -0.5 * p.omega_c_rabi * jn(n, p.stark_3 / p.omega),
                freq: p.delta_c - p.stark_3 - n as f64 * p.omega,
            })
            .collect();
        let omega_mw = p.static_mw_rabi();
        let microwave = (-n_max..=n_max)
            .map(|m| Sideband {
                coef: -0.5 * omega_mw * jn(m, a / p.omega),
                freq: p.delta_mw - a - m as f64 * p.omega,
            })
            .collect();
        Ok(Self {
            params: params.clone(),
            n_max,
            coupling,
            microwave,
        })
    }

    /// Co-rotating frame in which the rotated model is `1/omega` periodic.
    pub fn corotating(self) -> CoRotating<Self> {
        let p = &self.params;
        let a = p.differential_stark();
        let nearest = ((p.delta_mw - a) / p.omega).round();
        let f2 = p.delta_p;
        let f3 = f2 + p.delta_c - p.stark_3;
        let f4 = f3 + p.delta_mw - a - nearest * p.omega;
        CoRotating::new(self, [0.0, f2, f3, f4])
    }
}

fn sideband_sum(terms: &[Sideband], t: f64) -> Complex64 {
    terms
        .iter()
        .map(|s| cis(TAU * s.freq * t) * s.coef)
        .sum()
}

impl TimeDependentHamiltonian for RotatedModel {
    fn at(&self, t: f64) -> Matrix4c {
        let p = &self.params;
        let mut h = Matrix4c::zeros();
        set_coupling(&mut h, 0, 1, cis(TAU * p.delta_p * t) * (-0.5 * p.omega_p_rabi));
        set_coupling(&mut h, 1, 2, sideband_sum(&self.coupling, t));
        set_coupling(&mut h, 2, 3, sideband_sum(&self.microwave, t));
        h
    }

    fn max_frequency(&self) -> f64 {
        self.coupling
            .iter()
            .chain(&self.microwave)
            .filter(|s| s.coef.abs() > NEGLIGIBLE_SIDEBAND)
            .map(|s| s.freq.abs())
            .fold(self.params.delta_p.abs(), f64::max)
    }
}

/// `build_rotated` at a single time.
pub fn build_rotated(params: &SystemParams, t: f64, n_max: i32) -> Result<Matrix4c, HamiltonianError> {
    Ok(RotatedModel::new(params, n_max)?.at(t))
}

/// A model seen from the diagonal frame `V(t) = diag(exp(-i 2 pi f_j t))`.
///
/// The transformed generator is `exp(i 2 pi (f_i - f_j) t) H_ij - delta_ij f_j`.
#[derive(Debug, Clone)]
pub struct CoRotating<H> {
    pub inner: H,
    pub freqs: [f64; 4],
}

impl<H> CoRotating<H> {
    pub fn new(inner: H, freqs: [f64; 4]) -> Self {
        Self { inner, freqs }
    }

    /// `V(t)` itself, mapping frame states back to the inner picture.
    pub fn frame(&self, t: f64) -> Matrix4c {
        Matrix4c::from_diagonal(&nalgebra::Vector4::from_fn(|j, _| {
            cis(-TAU * self.freqs[j] * t)
        }))
    }
}

impl<H: TimeDependentHamiltonian> TimeDependentHamiltonian for CoRotating<H> {
    fn at(&self, t: f64) -> Matrix4c {
        let mut h = self.inner.at(t);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    h[(i, j)] *= cis(TAU * (self.freqs[i] - self.freqs[j]) * t);
                }
            }
            h[(i, i)] -= Complex64::new(self.freqs[i], 0.0);
        }
        h
    }

    fn max_frequency(&self) -> f64 {
        self.inner.max_frequency()
    }
}

/// Closed-form control-field propagator `exp(-(i/hbar) int_0^t H_C)`.
pub fn control_frame(params: &SystemParams, t: f64) -> Matrix4c {
    let integral = t + (TAU * params.omega * t).sin() / (TAU * params.omega);
    let mut u = Matrix4c::identity();
    u[(2, 2)] = cis(-TAU * params.stark_3 * integral);
    u[(3, 3)] = cis(-TAU * params.stark_4 * integral);
    u
}

/// Time-independent effective Hamiltonian for sideband `k` using the static
/// microwave magnitude and the default sideband truncation.
pub fn build_effective(
    params: &SystemParams,
    k: i32,
    include_second_order: bool,
) -> Result<(Matrix4c, EffectiveDetunings), HamiltonianError> {
    build_effective_truncated(params, k, include_second_order, DEFAULT_M_MAX)
}

/// [`build_effective`] with an explicit truncation of the second-order sum.
pub fn build_effective_truncated(
    params: &SystemParams,
    k: i32,
    include_second_order: bool,
    m_max: i32,
) -> Result<(Matrix4c, EffectiveDetunings), HamiltonianError> {
    params.validate()?;
    let shift = if include_second_order {
        second_order_shift(params, k, m_max)?
    } else {
        0.0
    };
    let detunings = detunings_for_shift(params, k, shift);
    Ok((
        effective_matrix(params, params.static_mw_rabi(), &detunings),
        detunings,
    ))
}

/// Effective matrix for an explicit microwave magnitude and detunings.
pub fn effective_matrix(
    params: &SystemParams,
    mw_magnitude: f64,
    detunings: &EffectiveDetunings,
) -> Matrix4c {
    let coupling = jn(0, params.stark_3 / params.omega) * params.omega_c_rabi;
    let microwave = jn(detunings.k, detunings.a / params.omega) * mw_magnitude;
    let dp = params.delta_p;
    let d3 = dp + detunings.delta_c_eff;
    let d4 = d3 + detunings.delta_m_eff;
    let r = |x: f64| Complex64::new(-x, 0.0);
    let mut h = Matrix4c::zeros();
    h[(0, 1)] = r(0.5 * params.omega_p_rabi);
    h[(1, 0)] = h[(0, 1)];
    h[(1, 2)] = r(0.5 * coupling);
    h[(2, 1)] = h[(1, 2)];
    h[(2, 3)] = r(0.5 * microwave);
    h[(3, 2)] = h[(2, 3)];
    h[(1, 1)] = r(dp);
    h[(2, 2)] = r(d3);
    h[(3, 3)] = r(d4);
    h
}

/// Effective microwave Rabi frequency `J_k(a/omega) * Omega_M`.
pub fn effective_mw_rabi(params: &SystemParams, k: i32, mw_magnitude: f64) -> f64 {
    jn(k, params.differential_stark() / params.omega) * mw_magnitude
}

/// Largest entry of `H - H^dagger`.
pub fn hermiticity_error(h: &Matrix4c) -> f64 {
    let diff = h - h.adjoint();
    diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Schrodinger propagator `U(t_end)` of `h` from `U(0) = 1`, classical RK4.
pub fn unitary_propagator<H: TimeDependentHamiltonian + ?Sized>(h: &H, t_end: f64, dt: f64) -> Matrix4c {
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let minus_i_tau = Complex64::new(0.0, -TAU);
    let rhs = |t: f64, u: &Matrix4c| (h.at(t) * u) * minus_i_tau;
    let mut u = Matrix4c::identity();
    for step in 0..steps {
        let t = step as f64 * dt;
        let k1 = rhs(t, &u);
        let k2 = rhs(t + 0.5 * dt, &(u + k1 * Complex64::from(0.5 * dt)));
        let k3 = rhs(t + 0.5 * dt, &(u + k2 * Complex64::from(0.5 * dt)));
        let k4 = rhs(t + dt, &(u + k3 * Complex64::from(dt)));
        u += (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4)
            * Complex64::from(dt / 6.0);
    }
    u
}
