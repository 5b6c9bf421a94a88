//! Flat `dotted.key = value` configuration files.
//!
//! Frequencies are MHz numerals (a value `x` means `2*pi*x` rad/us). Every key
//! is optional; missing keys take the reference values.

use std::collections::BTreeMap;

use rydmix_core::{ConstraintBox, DecayRates, SweepSettings, SystemParams};
use rydmix_core::heterodyne::HeterodyneSettings;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("key `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
}

pub const KEYS: &[&str] = &[
    "probe.omega_p",
    "probe.delta_p",
    "coupling.omega_c",
    "coupling.delta_c",
    "mw.omega_L",
    "mw.omega_s",
    "mw.delta_f",
    "mw.delta_M",
    "rf.A",
    "rf.A_prime",
    "rf.a",
    "rf.omega",
    "rf.k",
    "decay.gamma1",
    "decay.gamma2",
    "decay.gamma3",
    "decay.gamma4",
    "box.a_max",
    "box.omega_min",
    "box.omega_max",
    "sweep.min",
    "sweep.max",
    "sweep.points",
    "map.min",
    "map.max",
    "map.step",
    "bound.min",
    "bound.max",
    "bound.points",
    "numerics.n_max",
    "numerics.m_max",
    "numerics.averaging_periods",
    "numerics.burn_in",
    "numerics.dt",
    "heterodyne.samples_per_period",
    "heterodyne.periods",
    "heterodyne.kappa",
    "heterodyne.delta_p",
    "sensitivity.baseline",
];

/// Everything a run needs besides the command and output path.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: SystemParams,
    pub k: i32,
    pub bx: ConstraintBox,
    pub sweep: (f64, f64, usize),
    pub map: (f64, f64, f64),
    pub bound: (f64, f64, usize),
    pub numerics: SweepSettings,
    pub heterodyne: HeterodyneSettings,
    pub baseline: f64,
}

/// Split the file into a key/value map, rejecting unknown or repeated keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                msg: format!("expected `key = value`, got `{body}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::Syntax {
                line,
                msg: format!("unknown key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                msg: format!("missing value for `{key}`"),
            });
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigError::Syntax {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(out)
}

struct Pairs(BTreeMap<String, String>);

impl Pairs {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ConfigError::Value {
                key: key.into(),
                msg: format!("cannot parse `{v}`"),
            }),
        }
    }

    fn float(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.get::<f64>(key)?.unwrap_or(default);
        if !v.is_finite() {
            return Err(ConfigError::Value {
                key: key.into(),
                msg: "must be finite".into(),
            });
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.get::<usize>(key)?.unwrap_or(default))
    }
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let pairs = Pairs(parse_pairs(text)?);
        let r = SystemParams::reference();

        let omega = pairs.float("rf.omega", r.omega)?;
        let stark_3 = pairs.float("rf.A", r.stark_3)?;
        let stark_4 = match (pairs.get::<f64>("rf.a")?, pairs.get::<f64>("rf.A_prime")?) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid(
                    "set at most one of `rf.a` and `rf.A_prime`".into(),
                ))
            }
            (Some(a), None) => stark_3 + a,
            (None, Some(ap)) => ap,
            (None, None) => stark_3 + 0.5 * omega,
        };
        let params = SystemParams {
            omega_p_rabi: pairs.float("probe.omega_p", r.omega_p_rabi)?,
            omega_c_rabi: pairs.float("coupling.omega_c", r.omega_c_rabi)?,
            delta_p: pairs.float("probe.delta_p", r.delta_p)?,
            delta_c: pairs.float("coupling.delta_c", r.delta_c)?,
            omega_local: pairs.float("mw.omega_L", 39.0)?,
            omega_signal: pairs.float("mw.omega_s", 1.0)?,
            delta_f: pairs.float("mw.delta_f", r.delta_f)?,
            delta_mw: pairs.float("mw.delta_M", r.delta_mw)?,
            stark_3,
            stark_4,
            omega,
            decay: DecayRates::new(
                pairs.float("decay.gamma1", r.decay.gamma[0])?,
                pairs.float("decay.gamma2", r.decay.gamma[1])?,
                pairs.float("decay.gamma3", r.decay.gamma[2])?,
                pairs.float("decay.gamma4", r.decay.gamma[3])?,
            ),
        };
        params
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("parameters: {e}")))?;

        let k = pairs.get::<i32>("rf.k")?.unwrap_or(1);
        let bx = ConstraintBox::new(
            pairs.float("box.a_max", 1000.0)?,
            pairs.float("box.omega_min", 100.0)?,
            pairs.float("box.omega_max", 500.0)?,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

        let sweep = (
            pairs.float("sweep.min", -30.0)?,
            pairs.float("sweep.max", 30.0)?,
            pairs.count("sweep.points", 401)?,
        );
        if sweep.2 < 3 || sweep.0 >= sweep.1 {
            return Err(ConfigError::Invalid(
                "sweep needs min < max and at least 3 points".into(),
            ));
        }
        let map = (
            pairs.float("map.min", 100.0)?,
            pairs.float("map.max", 2000.0)?,
            pairs.float("map.step", 10.0)?,
        );
        if map.2 <= 0.0 || map.0 > map.1 || map.0 <= 0.0 {
            return Err(ConfigError::Invalid(
                "map needs 0 < min <= max and step > 0".into(),
            ));
        }
        let bound = (
            pairs.float("bound.min", 0.05)?,
            pairs.float("bound.max", 8.0)?,
            pairs.count("bound.points", 800)?,
        );
        if bound.2 < 2 || bound.0 <= 0.0 || bound.0 >= bound.1 {
            return Err(ConfigError::Invalid(
                "bound needs 0 < min < max and at least 2 points".into(),
            ));
        }

        let defaults = SweepSettings::default();
        let numerics = SweepSettings {
            k,
            m_max: pairs.get("numerics.m_max")?.unwrap_or(defaults.m_max),
            n_max: pairs.get("numerics.n_max")?.unwrap_or(defaults.n_max),
            burn_in: pairs.get("numerics.burn_in")?,
            averaging_periods: pairs.count("numerics.averaging_periods", defaults.averaging_periods)?,
            max_dt: pairs.get("numerics.dt")?,
        };
        if numerics.max_dt.is_some_and(|dt| !(dt > 0.0)) {
            return Err(ConfigError::Value {
                key: "numerics.dt".into(),
                msg: "must be > 0".into(),
            });
        }
        let hd = HeterodyneSettings::default();
        let heterodyne = HeterodyneSettings {
            k,
            m_max: numerics.m_max,
            samples_per_period: pairs.count("heterodyne.samples_per_period", hd.samples_per_period)?,
            periods: pairs.count("heterodyne.periods", hd.periods)?,
            kappa: pairs.float("heterodyne.kappa", hd.kappa)?,
            delta_p_probe: pairs.get("heterodyne.delta_p")?,
        };
        let baseline = pairs.float("sensitivity.baseline", 20.0)?;
        if baseline <= 0.0 {
            return Err(ConfigError::Value {
                key: "sensitivity.baseline".into(),
                msg: "must be > 0".into(),
            });
        }
        Ok(Self {
            params,
            k,
            bx,
            sweep,
            map,
            bound,
            numerics,
            heterodyne,
            baseline,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference() {
        let c = RunConfig::from_text("").unwrap();
        assert_eq!(c.params.omega_local + c.params.omega_signal, 40.0);
        assert_eq!(c.params.omega, 401.209);
        assert_eq!(c.params.stark_4 - c.params.stark_3, 0.5 * 401.209);
        assert_eq!(c.sweep.2, 401);
    }

    #[test]
    fn comments_and_overrides() {
        let c = RunConfig::from_text("# header\nmw.omega_L = 20 # trailing\n\nrf.a=100\n").unwrap();
        assert_eq!(c.params.omega_local, 20.0);
        assert_eq!(c.params.stark_4, 105.0);
    }

    #[test]
    fn errors_name_the_line() {
        let e = RunConfig::from_text("mw.omega_L = 1\nnonsense\n").unwrap_err();
        assert!(e.to_string().starts_with("line 2:"), "{e}");
        let e = RunConfig::from_text("mw.bogus = 1").unwrap_err();
        assert!(e.to_string().contains("unknown key"));
        let e = RunConfig::from_text("rf.k = two").unwrap_err();
        assert!(e.to_string().contains("rf.k"));
        assert!(RunConfig::from_text("rf.a = 1\nrf.A_prime = 2").is_err());
        assert!(RunConfig::from_text("decay.gamma2 = -1").is_err());
    }
}
