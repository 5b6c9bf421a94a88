use log::info;
use rydmix_core::heterodyne::synthesize;
use rydmix_core::optimizer::retune;
use rydmix_core::spectroscopy::linear_grid;
use rydmix_core::{
    optimize, second_order_bound, sensitivity_in_field_units, sensitivity_map, sweep_spectrum,
    Error, ModelVariant, OptimizationResult,
};

use crate::config::RunConfig;
use crate::csv::{num, Table};

pub fn spectrum(cfg: &RunConfig) -> Result<String, Error> {
    let (lo, hi, n) = cfg.sweep;
    let grid = linear_grid(lo, hi, n);
    let mut traces = Vec::new();
    for variant in [
        ModelVariant::Original,
        ModelVariant::Effective,
        ModelVariant::EffectiveNo2nd,
    ] {
        info!("sweeping {} over {n} points", variant.name());
        traces.push(sweep_spectrum(&cfg.params, variant, &grid, &cfg.numerics)?);
    }
    let mut t = Table::new(&[
        "delta_p_MHz",
        "im_rho21_original",
        "im_rho21_effective",
        "im_rho21_no2nd",
    ]);
    for (i, &dp) in grid.iter().enumerate() {
        t.row(&[
            num(dp),
            num(traces[0].points[i].1),
            num(traces[1].points[i].1),
            num(traces[2].points[i].1),
        ]);
    }
    Ok(t.finish())
}

pub fn heterodyne(cfg: &RunConfig) -> Result<String, Error> {
    let eff = synthesize(&cfg.params, ModelVariant::Effective, &cfg.heterodyne)?;
    info!("probe operating point {} MHz", eff.delta_p_probe);
    let mut settings = cfg.heterodyne.clone();
    settings.delta_p_probe = Some(eff.delta_p_probe);
    let no2 = synthesize(&cfg.params, ModelVariant::EffectiveNo2nd, &settings)?;
    let mut t = Table::new(&["t_us", "dT_effective", "dT_no2nd"]);
    for (a, b) in eff.points.iter().zip(&no2.points) {
        t.row(&[num(a.0), num(a.1), num(b.1)]);
    }
    Ok(t.finish())
}

pub fn bound(cfg: &RunConfig) -> Result<String, Error> {
    let (lo, hi, n) = cfg.bound;
    let mut t = Table::new(&["a_over_omega", "upper_bound"]);
    for r in linear_grid(lo, hi, n) {
        t.row(&[num(r), num(second_order_bound(r, cfg.k, cfg.numerics.m_max)?)]);
    }
    Ok(t.finish())
}

const MAP_HEADER: [&str; 6] = [
    "delta_M_MHz",
    "eta_m",
    "a_star_MHz",
    "omega_star_MHz",
    "k_star",
    "sensitivity_nV",
];

fn map_cells(delta: f64, r: Option<&OptimizationResult>, baseline: f64) -> Vec<String> {
    match r {
        Some(r) => vec![
            num(delta),
            num(r.eta_m),
            num(r.a_star),
            num(r.omega_star),
            r.k_star.to_string(),
            num(sensitivity_in_field_units(r, baseline)),
        ],
        None => {
            let mut cells = vec![num(delta)];
            cells.extend(std::iter::repeat_n("nan".to_string(), 5));
            cells
        }
    }
}

pub fn map(cfg: &RunConfig) -> Result<String, Error> {
    let (lo, hi, step) = cfg.map;
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let deltas: Vec<f64> = (0..=n).map(|i| lo + step * i as f64).collect();
    let results = sensitivity_map(&deltas, &cfg.bx)?;
    let mut t = Table::new(&MAP_HEADER);
    for (d, r) in deltas.iter().zip(&results) {
        if let Err(e) = r {
            info!("{e}");
        }
        t.row(&map_cells(*d, r.as_ref().ok(), cfg.baseline));
    }
    Ok(t.finish())
}

pub fn optimize_one(cfg: &RunConfig) -> Result<String, Error> {
    let delta = cfg.params.delta_mw;
    let r = optimize(delta, &cfg.bx)?;
    let tuning = retune(&r, &cfg.params)?;
    let mut header = MAP_HEADER.to_vec();
    header.extend(["delta_M_shift_MHz", "omega_retuned_MHz", "delta_c_retuned_MHz"]);
    let mut t = Table::new(&header);
    let mut cells = map_cells(delta, Some(&r), cfg.baseline);
    cells.extend([
        num(tuning.delta_m_shift),
        num(tuning.omega),
        num(tuning.delta_c),
    ]);
    t.row(&cells);
    Ok(t.finish())
}
