//! Master-equation engine.
//!
//! The density matrix obeys `drho/dt = 2*pi * (-i [H, rho] + D(rho))` with `H`
//! and the decay rates in MHz and `t` in microseconds. `D` is the cascade
//! dissipator: populations relax `4 -> 3 -> 2 -> 1` and every coherence
//! `rho_ij` is damped at `(gamma_i + gamma_j) / 2`.

use std::f64::consts::TAU;

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::hamiltonian::{Matrix4c, TimeDependentHamiltonian};
use crate::system::DecayRates;

pub type Liouvillian = SMatrix<Complex64, 16, 16>;

/// Steps per period of the fastest frequency the integrator must resolve.
pub const MIN_STEPS_PER_CYCLE: f64 = 50.0;

/// Relative singular-value cutoff used to count the Liouvillian rank.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LindbladError {
    #[error("Liouvillian null space is degenerate (numerical rank {rank} < 15)")]
    DegenerateNullSpace { rank: usize },
    #[error("steady-state linear system is singular")]
    Singular,
    #[error("time step {dt} us exceeds 1/(50 * {max_frequency} MHz) = {limit} us")]
    StepTooLarge {
        dt: f64,
        max_frequency: f64,
        limit: f64,
    },
    #[error("invalid propagation request: {0}")]
    InvalidRequest(String),
    #[error("averaging window {available} us is shorter than one period {period} us")]
    WindowTooShort { available: f64, period: f64 },
}

/// A 4x4 density matrix, levels indexed from zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Matrix4c);

impl DensityMatrix {
    /// `|level><level|`.
    pub fn pure(level: usize) -> Self {
        let mut m = Matrix4c::zeros();
        m[(level, level)] = Complex64::new(1.0, 0.0);
        Self(m)
    }

    pub fn ground() -> Self {
        Self::pure(0)
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// The probe coherence `rho_21 = <2|rho|1>`.
    pub fn rho21(&self) -> Complex64 {
        self.0[(1, 0)]
    }

    pub fn population(&self, level: usize) -> f64 {
        self.0[(level, level)].re
    }

    pub fn hermiticity_error(&self) -> f64 {
        crate::hamiltonian::hermiticity_error(&self.0)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().min()
    }

    /// Expectation `tr(rho * observable)`.
    pub fn expect(&self, observable: &Matrix4c) -> Complex64 {
        (self.0 * observable).trace()
    }
}

/// Observable whose expectation is `rho_21`.
pub fn rho21_observable() -> Matrix4c {
    let mut o = Matrix4c::zeros();
    o[(0, 1)] = Complex64::new(1.0, 0.0);
    o
}

/// Cascade dissipator in MHz (without the `2*pi`).
pub fn dissipator(rho: &Matrix4c, rates: &DecayRates) -> Matrix4c {
    let g = &rates.gamma;
    let mut out = Matrix4c::zeros();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                out[(i, j)] = rho[(i, j)] * -rates.pair(i, j);
            }
        }
    }
    let pop = |i: usize| rho[(i, i)];
    out[(0, 0)] = pop(1) * g[1];
    out[(1, 1)] = pop(2) * g[2] - pop(1) * g[1];
    out[(2, 2)] = pop(3) * g[3] - pop(2) * g[2];
    out[(3, 3)] = pop(3) * -g[3];
    out
}

/// Time derivative of `rho` under `h` and the dissipator.
#[inline]
pub fn generator(h: &Matrix4c, rates: &DecayRates, rho: &Matrix4c) -> Matrix4c {
    let commutator = h * rho - rho * h;
    (commutator * Complex64::new(0.0, -1.0) + dissipator(rho, rates)) * Complex64::new(TAU, 0.0)
}

#[inline]
fn vec_index(i: usize, j: usize) -> usize {
    i + 4 * j
}

/// Superoperator of `generator` acting on column-stacked `vec(rho)`.
pub fn liouvillian(h: &Matrix4c, rates: &DecayRates) -> Liouvillian {
    let mut l = Liouvillian::zeros();
    for j in 0..4 {
        for i in 0..4 {
            let mut basis = Matrix4c::zeros();
            basis[(i, j)] = Complex64::new(1.0, 0.0);
            let image = generator(h, rates, &basis);
            let col = vec_index(i, j);
            for q in 0..4 {
                for p in 0..4 {
                    l[(vec_index(p, q), col)] = image[(p, q)];
                }
            }
        }
    }
    l
}

/// Numerical rank of the Liouvillian.
pub fn liouvillian_rank(l: &Liouvillian) -> usize {
    let sv = l.singular_values();
    let largest = sv.max();
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * largest).count()
}

/// Steady state of a time-independent model.
///
/// The first row of the Liouvillian is replaced by the trace condition and
/// the resulting 16x16 system is solved directly.
pub fn steady_state(h: &Matrix4c, rates: &DecayRates) -> Result<DensityMatrix, LindbladError> {
    let mut l = liouvillian(h, rates);
    let rank = liouvillian_rank(&l);
    if rank < 15 {
        return Err(LindbladError::DegenerateNullSpace { rank });
    }
    for c in 0..16 {
        l[(0, c)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..4 {
        l[(0, vec_index(i, i))] = Complex64::new(1.0, 0.0);
    }
    let mut rhs = SVector::<Complex64, 16>::zeros();
    rhs[0] = Complex64::new(1.0, 0.0);
    let x = l.lu().solve(&rhs).ok_or(LindbladError::Singular)?;
    let mut rho = Matrix4c::from_fn(|i, j| x[vec_index(i, j)]);
    rho = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(DensityMatrix(rho))
}

/// Sampled density-matrix trajectory on a uniform time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// State at `t_end`, recorded or not.
    pub last: DensityMatrix,
}

/// Which steps of a propagation are stored.
#[derive(Debug, Clone, Copy)]
pub struct Recording {
    /// Steps earlier than this time (us) are not stored.
    pub from: f64,
    /// Store every `stride`-th step.
    pub stride: usize,
}

impl Default for Recording {
    fn default() -> Self {
        Self { from: 0.0, stride: 1 }
    }
}

/// Largest admissible step for `h`.
pub fn max_step<H: TimeDependentHamiltonian + ?Sized>(h: &H) -> f64 {
    let f = h.max_frequency();
    if f > 0.0 {
        1.0 / (MIN_STEPS_PER_CYCLE * f)
    } else {
        f64::INFINITY
    }
}

/// Integrate the master equation from `rho0` to `t_end` with classical RK4,
/// storing every step.
pub fn propagate<H: TimeDependentHamiltonian + ?Sized>(
    h: &H,
    rates: &DecayRates,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory, LindbladError> {
    propagate_recording(h, rates, rho0, t_end, dt, Recording::default())
}

pub fn propagate_recording<H: TimeDependentHamiltonian + ?Sized>(
    h: &H,
    rates: &DecayRates,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
    recording: Recording,
) -> Result<Trajectory, LindbladError> {
    if !(dt.is_finite() && dt > 0.0) || !(t_end.is_finite() && t_end >= 0.0) {
        return Err(LindbladError::InvalidRequest(format!(
            "need dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let limit = max_step(h);
    // Allow rounding in callers that derive dt from the limit itself.
    if dt > limit * (1.0 + 1e-12) {
        return Err(LindbladError::StepTooLarge {
            dt,
            max_frequency: h.max_frequency(),
            limit,
        });
    }
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps > 0 { t_end / steps as f64 } else { dt };
    let stride = recording.stride.max(1);

    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut rho = rho0.0;
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    for step in 0..=steps {
        let t = step as f64 * dt;
        if t >= recording.from - 0.5 * dt && (step % stride == 0) {
            times.push(t);
            states.push(DensityMatrix(rho));
        }
        if step == steps {
            break;
        }
        let h0 = h.at(t);
        let hm = h.at(t + 0.5 * dt);
        let h1 = h.at(t + dt);
        let k1 = generator(&h0, rates, &rho);
        let k2 = generator(&hm, rates, &(rho + k1 * half));
        let k3 = generator(&hm, rates, &(rho + k2 * half));
        let k4 = generator(&h1, rates, &(rho + k3 * full));
        rho += (k1 + k2 * two + k3 * two + k4) * sixth;
    }
    Ok(Trajectory {
        dt,
        times,
        states,
        last: DensityMatrix(rho),
    })
}

/// Mean of `tr(rho * observable)` over the largest whole number of `period`s
/// recorded from `t_start` onwards.
pub fn time_averaged_observable(
    trajectory: &Trajectory,
    observable: &Matrix4c,
    t_start: f64,
    period: f64,
) -> Result<Complex64, LindbladError> {
    if !(period.is_finite() && period > 0.0) {
        return Err(LindbladError::InvalidRequest(format!(
            "averaging period must be > 0, got {period}"
        )));
    }
    let dt = trajectory.dt;
    let first = trajectory
        .times
        .iter()
        .position(|&t| t >= t_start - 0.5 * dt)
        .ok_or(LindbladError::WindowTooShort {
            available: 0.0,
            period,
        })?;
    let stride_dt = if trajectory.times.len() > first + 1 {
        trajectory.times[first + 1] - trajectory.times[first]
    } else {
        dt
    };
    let available = trajectory.times.last().copied().unwrap_or(t_start) - trajectory.times[first]
        + stride_dt;
    let periods = ((available + 1e-9 * period) / period).floor();
    if periods < 1.0 {
        return Err(LindbladError::WindowTooShort { available, period });
    }
    let count = ((periods * period / stride_dt).round() as usize)
        .min(trajectory.states.len() - first)
        .max(1);
    let sum: Complex64 = trajectory.states[first..first + count]
        .iter()
        .map(|rho| rho.expect(observable))
        .sum();
    Ok(sum / count as f64)
}
