//! Quick self-checks of the numerical core, one line per check.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rydmix_core::hamiltonian::{control_frame, unitary_propagator};
use rydmix_core::lindblad::{dissipator, generator, propagate};
use rydmix_core::{
    bessel_j, build_effective, optimize, steady_state, ConstraintBox, DensityMatrix, Error,
    Matrix4c, OriginalModel, RotatedModel, StaticHamiltonian, SystemParams,
};

use crate::config::RunConfig;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, limit: f64) -> Check {
    Check {
        name,
        pass: value <= limit,
        detail: format!("{value:.3e} (limit {limit:.0e})"),
    }
}

fn max_abs(m: &Matrix4c) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn bessel_oracle() -> Result<Check, Error> {
    let mut worst: f64 = 0.0;
    for n in 0..=20 {
        for xi in 1..=40 {
            let x = 0.75 * xi as f64;
            let steps = 512;
            let quad = (0..steps)
                .map(|j| {
                    let t = TAU * j as f64 / steps as f64;
                    (n as f64 * t - x * t.sin()).cos()
                })
                .sum::<f64>()
                / steps as f64;
            worst = worst.max((bessel_j(n, x)? - quad).abs());
        }
    }
    Ok(check("bessel vs quadrature", worst, 1e-10))
}

fn mixed_state(seed: f64) -> Matrix4c {
    let g = Matrix4c::from_fn(|i, j| {
        let s = seed + (4 * i + j) as f64;
        Complex64::new((1.3 * s).sin(), (0.7 * s).cos())
    });
    let rho = g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

fn dissipator_trace(p: &SystemParams) -> Check {
    let worst = (0..50)
        .map(|s| dissipator(&mixed_state(s as f64), &p.decay).trace().norm())
        .fold(0.0, f64::max);
    check("dissipator trace", worst, 1e-14)
}

fn trace_preservation(p: &SystemParams, k: i32) -> Result<Check, Error> {
    let (h, _) = build_effective(p, k, true)?;
    let model = StaticHamiltonian(h);
    let dt = 1.0 / (50.0 * rydmix_core::TimeDependentHamiltonian::max_frequency(&model));
    let traj = propagate(&model, &p.decay, &DensityMatrix::ground(), 10.0, dt)?;
    let drift = (traj.last.trace() - Complex64::new(1.0, 0.0))
        .norm()
        .max(traj.last.hermiticity_error());
    Ok(check("trace preservation (10 us)", drift, 1e-8))
}

fn steady_state_residual(p: &SystemParams, k: i32) -> Result<Check, Error> {
    let (h, _) = build_effective(p, k, true)?;
    let rho = steady_state(&h, &p.decay)?;
    let residual = max_abs(&generator(&h, &p.decay, &rho.0));
    Ok(check("steady-state residual", residual, 1e-10))
}

fn unitary_equivalence(p: &SystemParams, n_max: i32) -> Result<Check, Error> {
    let original = OriginalModel::new(p)?;
    let rotated = RotatedModel::new(p, n_max)?;
    let t_end = 1.0;
    let dt = 2e-6;
    let (po, pr) = rayon::join(
        || unitary_propagator(&original, t_end, dt),
        || unitary_propagator(&rotated, t_end, dt),
    );
    let err = max_abs(&(pr - control_frame(p, t_end).adjoint() * po));
    Ok(check("rotated vs original propagator (1 us)", err, 1e-6))
}

fn optimizer_closed_form() -> Result<Check, Error> {
    let bx = ConstraintBox::new(500.0, 100.0, 500.0)?;
    let r = optimize(300.0, &bx)?;
    let exact = bessel_j(0, 0.6)?;
    Ok(check("optimizer k = 0 closed form", (r.eta_m - exact).abs(), 1e-9))
}

pub fn run(cfg: &RunConfig) -> Result<Vec<Check>, Error> {
    let p = &cfg.params;
    Ok(vec![
        bessel_oracle()?,
        dissipator_trace(p),
        trace_preservation(p, cfg.k)?,
        steady_state_residual(p, cfg.k)?,
        unitary_equivalence(p, cfg.numerics.n_max)?,
        optimizer_closed_form()?,
    ])
}
