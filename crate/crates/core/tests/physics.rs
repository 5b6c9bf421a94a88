use num_complex::Complex64;

use rydmix_core::heterodyne::{amplitude, synthesize, HeterodyneSettings};
use rydmix_core::lindblad::{propagate, steady_state, DensityMatrix};
use rydmix_core::spectroscopy::{extract_at_splitting, linear_grid, sweep_spectrum, SweepSettings};
use rydmix_core::{
    bessel_j, build_effective, solve_rf_resonance, DecayRates, ModelVariant, StaticHamiltonian,
    SystemParams,
};

fn tuned() -> SystemParams {
    let p = SystemParams::reference();
    let t = solve_rf_resonance(600.0, 0.5, 1, &p).unwrap();
    p.with_tuning(&t)
}

fn max_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.0 - b.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn steady_state_matches_long_propagation() {
    let p = SystemParams::reference();
    let (h, _) = build_effective(&p, 1, true).unwrap();
    let ss = steady_state(&h, &p.decay).unwrap();
    let traj = propagate(&StaticHamiltonian(h), &p.decay, &DensityMatrix::ground(), 5.0, 5e-4).unwrap();
    assert_eq!(traj.times.len(), 10_001);
    assert!((traj.last.rho21().im - ss.rho21().im).abs() < 1e-6);
}

#[test]
fn steady_state_is_stationary_under_propagation() {
    let p = SystemParams::reference();
    let (h, _) = build_effective(&p, 1, true).unwrap();
    let ss = steady_state(&h, &p.decay).unwrap();
    let traj = propagate(&StaticHamiltonian(h), &p.decay, &ss, 1.0, 5e-4).unwrap();
    assert!(max_diff(&traj.last, &ss) < 1e-8);
}

#[test]
fn steady_state_independent_of_time_unit() {
    let p = SystemParams::reference();
    let (h, _) = build_effective(&p, 1, true).unwrap();
    let c = 1000.0;
    let g = p.decay.gamma;
    let scaled_rates = DecayRates::new(c * g[0], c * g[1], c * g[2], c * g[3]);
    let a = steady_state(&h, &p.decay).unwrap();
    let b = steady_state(&(h * Complex64::from(c)), &scaled_rates).unwrap();
    assert!(max_diff(&a, &b) < 1e-10);
}

#[test]
fn eit_window_suppresses_absorption() {
    let mut p = SystemParams::reference();
    p.omega_local = 0.0;
    p.omega_signal = 0.0;
    p.delta_c = p.stark_3;
    p.decay = DecayRates::new(0.0, 5.0, 1e-6, 0.003);
    let (h, _) = build_effective(&p, 1, true).unwrap();
    let with_coupling = steady_state(&h, &p.decay).unwrap().rho21().im.abs();
    p.omega_c_rabi = 0.0;
    let (h, _) = build_effective(&p, 1, true).unwrap();
    let without = steady_state(&h, &p.decay).unwrap().rho21().im.abs();
    assert!(without > 100.0 * with_coupling, "{without} vs {with_coupling}");
}

#[test]
fn propagation_converges_at_fourth_order() {
    let p = SystemParams::reference();
    let (h, _) = build_effective(&p, 1, true).unwrap();
    let model = StaticHamiltonian(h);
    let coarse = propagate(&model, &p.decay, &DensityMatrix::ground(), 1.0, 1e-3).unwrap();
    let fine = propagate(&model, &p.decay, &DensityMatrix::ground(), 1.0, 5e-4).unwrap();
    assert!(max_diff(&coarse.last, &fine.last) < 1e-8);
    for rho in &fine.states {
        assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-8);
    }
}

#[test]
fn splitting_at_narrow_linewidth() {
    let mut p = tuned();
    p.decay.gamma[1] = 0.5;
    let grid = linear_grid(-15.0, 15.0, 1201);
    let trace = sweep_spectrum(&p, ModelVariant::Effective, &grid, &SweepSettings::default()).unwrap();
    let at = extract_at_splitting(&trace.transparency()).unwrap();
    let expected = bessel_j(1, 0.5).unwrap() * 40.0;
    assert!((at.splitting - expected).abs() < 0.3, "{} vs {expected}", at.splitting);
}

#[test]
fn splitting_grows_with_microwave_field() {
    let mut p = tuned();
    p.decay.gamma[1] = 0.5;
    let grid = linear_grid(-30.0, 30.0, 1201);
    let mut last = 0.0;
    for mw in [20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0] {
        p.omega_local = mw;
        let trace = sweep_spectrum(&p, ModelVariant::Effective, &grid, &SweepSettings::default()).unwrap();
        let s = extract_at_splitting(&trace.transparency()).unwrap().splitting;
        assert!(s >= last, "splitting {s} at {mw} below {last}");
        last = s;
    }
}

#[test]
fn neglecting_shift_breaks_symmetry() {
    let p = tuned();
    let grid = linear_grid(-30.0, 30.0, 401);
    let s = SweepSettings::default();
    let eff = sweep_spectrum(&p, ModelVariant::Effective, &grid, &s).unwrap();
    let no2 = sweep_spectrum(&p, ModelVariant::EffectiveNo2nd, &grid, &s).unwrap();
    let asymmetry = |t: &rydmix_core::SpectrumTrace| {
        let v = t.values();
        let n = v.len();
        (0..n).map(|i| (v[i] - v[n - 1 - i]).abs()).fold(0.0, f64::max) / t.peak()
    };
    assert!(asymmetry(&eff) < 0.02);
    assert!(asymmetry(&no2) > 0.1);
    // The central absorption line moves off the EIT centre.
    let central = |t: &rydmix_core::SpectrumTrace| {
        t.points
            .iter()
            .filter(|p| p.0.abs() <= 3.0)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0
    };
    assert_eq!(central(&eff), 0.0);
    assert!(central(&no2).abs() >= 0.3, "{}", central(&no2));
}

fn heterodyne_params(signal: f64) -> SystemParams {
    let mut p = SystemParams::reference();
    p.omega_local = 40.0 - signal;
    p.omega_signal = signal;
    p
}

#[test]
fn heterodyne_is_linear_in_small_signal() {
    let settings = HeterodyneSettings {
        delta_p_probe: Some(-6.5),
        samples_per_period: 128,
        ..Default::default()
    };
    let mut amps = Vec::new();
    for signal in [0.5, 1.0] {
        let mut p = heterodyne_params(1.0);
        p.omega_signal = signal;
        amps.push(amplitude(&synthesize(&p, ModelVariant::Effective, &settings).unwrap()).unwrap());
    }
    let ratio = amps[0] / amps[1];
    assert!((ratio - 0.5).abs() < 0.05, "{ratio}");
}

#[test]
fn heterodyne_scales_with_effective_rabi_frequency() {
    // Two sideband geometries driven to the same effective microwave Rabi
    // frequency give the same beat, so the bare signal needed for a given
    // response scales as 1/J_1(a/omega).
    let settings = HeterodyneSettings {
        samples_per_period: 64,
        ..Default::default()
    };
    let target_rabi = bessel_j(1, 0.5).unwrap() * 40.0;
    let mut amps = Vec::new();
    for ratio in [0.5, 1.841_183_781_340_659] {
        let base = SystemParams::reference();
        let j1 = bessel_j(1, ratio).unwrap();
        let total = target_rabi / j1;
        let mut p = base.clone();
        p.omega_local = total * 39.0 / 40.0;
        p.omega_signal = total / 40.0;
        let t = solve_rf_resonance(600.0, ratio, 1, &p).unwrap();
        let p = p.with_tuning(&t);
        let trace = synthesize(&p, ModelVariant::Effective, &settings).unwrap();
        amps.push(amplitude(&trace).unwrap());
    }
    assert!((amps[1] / amps[0] - 1.0).abs() < 0.1, "{amps:?}");
}
