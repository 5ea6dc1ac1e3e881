//! Plain-text run configurations: `key = value` lines, `#` comments.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::physics::{CoefficientSet, CouplingFamily};
use crate::solver::{Profile, RunConfig, Schedule};

/// Every accepted key; `coeff.<family>` stands for the eight coupling families.
pub const KEYS: [&str; 19] = [
    "half_extent",
    "n",
    "cfl",
    "t0",
    "t_final",
    "epsilon",
    "profile",
    "seed",
    "coeff.<family>",
    "schedule",
    "schedule.ds",
    "monitor_order",
    "slice_slack",
    "support_tol",
    "decay_window",
    "energy_window",
    "residual",
    "keep_every",
    "transform_at",
];

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

fn config_err(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_err(line, key, format!("cannot parse '{value}'")))
}

fn list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| number(line, key, v.trim()))
        .collect()
}

fn pair(line: usize, key: &str, value: &str) -> Result<[f64; 2]> {
    match list(line, key, value)?[..] {
        [a, b] => Ok([a, b]),
        _ => Err(config_err(line, key, "expected two comma-separated values")),
    }
}

fn optional<T>(value: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
    if value.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        f(value).map(Some)
    }
}

/// A single value fills the whole family; a list sets its entries row by row.
fn set_coefficients(
    c: &mut CoefficientSet,
    family: CouplingFamily,
    line: usize,
    key: &str,
    value: &str,
) -> Result<()> {
    let values = list(line, key, value)?;
    if let [v] = values[..] {
        c.set_family(family, v);
        return Ok(());
    }
    let slots: Vec<&mut f64> = match family {
        CouplingFamily::Mu => vec![&mut c.mu],
        CouplingFamily::Mv => vec![&mut c.mv],
        CouplingFamily::MuA => c.mu_a.iter_mut().collect(),
        CouplingFamily::NuA => c.nu_a.iter_mut().collect(),
        CouplingFamily::MvA => c.mv_a.iter_mut().collect(),
        CouplingFamily::NvA => c.nv_a.iter_mut().collect(),
        CouplingFamily::NuAb => c.nu_ab.iter_mut().flatten().collect(),
        CouplingFamily::NvAb => c.nv_ab.iter_mut().flatten().collect(),
    };
    if slots.len() != values.len() {
        return Err(config_err(
            line,
            key,
            format!("expected 1 or {} values, got {}", slots.len(), values.len()),
        ));
    }
    for (slot, v) in slots.into_iter().zip(values) {
        *slot = v;
    }
    Ok(())
}

/// Parses and validates a configuration; unset keys take their defaults.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut epsilon = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(config_err(line, content, "expected 'key = value'"));
        };
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        if let Some(first) = seen.insert(key.clone(), line) {
            return Err(config_err(
                line,
                &key,
                format!("duplicate key, first set on line {first}"),
            ));
        }
        let c = &mut config;
        match key.as_str() {
            "half_extent" => c.half_extent = number(line, &key, value)?,
            "n" => c.n = number(line, &key, value)?,
            "cfl" => c.cfl = number(line, &key, value)?,
            "t0" => c.t0 = number(line, &key, value)?,
            "t_final" => c.t_final = number(line, &key, value)?,
            "epsilon" => {
                c.epsilon = number(line, &key, value)?;
                epsilon = true;
            }
            "profile" => {
                c.profile = value
                    .parse::<Profile>()
                    .map_err(|e| config_err(line, &key, e.to_string()))?
            }
            "seed" => c.seed = number(line, &key, value)?,
            "schedule" => {
                c.schedule = if value.eq_ignore_ascii_case("auto") {
                    Schedule::Auto { ds: 0.25 }
                } else if value.eq_ignore_ascii_case("none") {
                    Schedule::Explicit(Vec::new())
                } else {
                    Schedule::Explicit(list(line, &key, value)?)
                }
            }
            "schedule.ds" => {
                c.schedule = Schedule::Auto {
                    ds: number(line, &key, value)?,
                }
            }
            "monitor_order" => c.monitor_order = number(line, &key, value)?,
            "slice_slack" => c.slice_slack = number(line, &key, value)?,
            "support_tol" => c.support_tol = number(line, &key, value)?,
            "decay_window" => c.decay_window = pair(line, &key, value)?,
            "energy_window" => c.energy_window = optional(value, |v| pair(line, &key, v))?,
            "residual" => c.residual = number(line, &key, value)?,
            "keep_every" => c.keep_every = optional(value, |v| number(line, &key, v))?,
            "transform_at" => c.transform_at = optional(value, |v| number(line, &key, v))?,
            other => match other
                .strip_prefix("coeff.")
                .map(str::parse::<CouplingFamily>)
            {
                Some(Ok(family)) => {
                    set_coefficients(&mut c.coefficients, family, line, &key, value)?
                }
                _ => return Err(config_err(line, other, "unknown key")),
            },
        }
    }
    if seen.contains_key("schedule") && seen.contains_key("schedule.ds") {
        return Err(config_err(
            seen["schedule.ds"],
            "schedule.ds",
            "conflicts with an explicit schedule",
        ));
    }
    if !epsilon {
        return Err(Error::EpsilonRequired);
    }
    let line_of = |key: &str| {
        seen.iter()
            .filter(|(k, _)| k.as_str() == key || k.starts_with(&format!("{key}.")))
            .map(|(_, &l)| l)
            .min()
            .unwrap_or(0)
    };
    if let Some((key, message)) = config.violation() {
        return Err(config_err(line_of(key), key, message));
    }
    match config.validate() {
        Err(e @ Error::InsufficientHistory { .. }) => {
            Err(config_err(line_of("schedule"), "schedule", e.to_string()))
        }
        other => other.map(|_| config),
    }
}

/// Text that [`parse_config_str`] turns back into exactly `config`.
pub fn emit_config(config: &RunConfig) -> String {
    let mut out = String::new();
    let join = |v: &mut dyn Iterator<Item = &f64>| {
        v.map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
    };
    let mut put = |key: &str, value: String| {
        let _ = writeln!(out, "{key} = {value}");
    };
    put("half_extent", format!("{}", config.half_extent));
    put("n", config.n.to_string());
    put("cfl", format!("{}", config.cfl));
    put("t0", format!("{}", config.t0));
    put("t_final", format!("{}", config.t_final));
    put("epsilon", format!("{}", config.epsilon));
    put("profile", config.profile.to_string());
    put("seed", config.seed.to_string());
    let c = &config.coefficients;
    for family in CouplingFamily::ALL {
        let value = match family {
            CouplingFamily::Mu => join(&mut [c.mu].iter()),
            CouplingFamily::Mv => join(&mut [c.mv].iter()),
            CouplingFamily::MuA => join(&mut c.mu_a.iter()),
            CouplingFamily::NuA => join(&mut c.nu_a.iter()),
            CouplingFamily::MvA => join(&mut c.mv_a.iter()),
            CouplingFamily::NvA => join(&mut c.nv_a.iter()),
            CouplingFamily::NuAb => join(&mut c.nu_ab.iter().flatten()),
            CouplingFamily::NvAb => join(&mut c.nv_ab.iter().flatten()),
        };
        put(&format!("coeff.{family}"), value);
    }
    match &config.schedule {
        Schedule::Auto { ds } => put("schedule.ds", format!("{ds}")),
        Schedule::Explicit(list) if list.is_empty() => put("schedule", "none".into()),
        Schedule::Explicit(list) => put("schedule", join(&mut list.iter())),
    }
    put("monitor_order", config.monitor_order.to_string());
    put("slice_slack", format!("{}", config.slice_slack));
    put("support_tol", format!("{}", config.support_tol));
    put("decay_window", join(&mut config.decay_window.iter()));
    put(
        "energy_window",
        config
            .energy_window
            .map_or("none".into(), |w| join(&mut w.iter())),
    );
    put("residual", config.residual.to_string());
    put(
        "keep_every",
        config.keep_every.map_or("none".into(), |k| k.to_string()),
    );
    put(
        "transform_at",
        config
            .transform_at
            .map_or("none".into(), |t| format!("{t}")),
    );
    out
}
