//! Named experiments and the acceptance checks each one carries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{CoefficientSet, CouplingFamily};
use crate::solver::{Profile, RunConfig, Schedule};

/// Node count of the reference resolution; runs below it use the widened smoke bands.
pub const REFERENCE_N: usize = 160;

/// Acceptance checks a preset is judged by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Bounded `|u| t (t - r)^(1/2)` for the free wave.
    WaveDecay,
    /// `sup |v| ~ t^(-3/2)` for the free Klein-Gordon field.
    KgDecay,
    /// Flat decay monitors and slow bootstrap growth of the nonlinear run.
    Bootstrap,
    /// Energy and conformal inequality margins, flat ratio series.
    Margins,
    Support,
    /// Transform residual reduction under halving of `(h, dt)`.
    Transform,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PresetKind {
    Single,
    /// The base config at `n` and `2n - 1` nodes, once per coefficient set.
    Refinement {
        sets: Vec<(String, CoefficientSet)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPreset {
    pub name: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub kind: PresetKind,
}

/// The reference box: `L = 44`, `n = 160`, `t_final = 40`, `epsilon = 0.01`.
fn reference(coefficients: CoefficientSet) -> RunConfig {
    RunConfig {
        epsilon: 0.01,
        coefficients,
        ..RunConfig::default()
    }
}

/// The nine coefficient sets of the transform study.
pub fn refinement_sets() -> Vec<(String, CoefficientSet)> {
    let mut sets: Vec<(String, CoefficientSet)> = CouplingFamily::ALL
        .into_iter()
        .map(|f| (f.name().to_string(), CoefficientSet::single(f)))
        .collect();
    sets.push(("all-ones".into(), CoefficientSet::all_ones()));
    sets
}

/// Coarse grid of the refinement pair: `h = 0.1`, `dt = 0.04`, with the
/// residual taken at the level `t = 2.4` of both grids.
///
/// The `cap` profile keeps the data's high derivatives moderate, so both
/// grids sit in the asymptotic regime of the fourth-order scheme; the box
/// only has to hold the run up to `t = 2.5`.
pub fn refinement_config() -> RunConfig {
    RunConfig {
        half_extent: 4.5,
        n: 91,
        t_final: 2.5,
        epsilon: 0.01,
        profile: Profile::Cap,
        schedule: Schedule::Explicit(Vec::new()),
        transform_at: Some(2.4),
        ..RunConfig::default()
    }
}

pub fn preset_names() -> Vec<String> {
    let mut names: Vec<String> = ["free-wave", "free-kg", "headline-nonlinear"]
        .map(String::from)
        .to_vec();
    names.extend(CouplingFamily::ALL.map(|f| format!("single-{f}")));
    names.push("refinement-pair".into());
    names
}

pub fn preset(name: &str) -> Result<ExperimentPreset> {
    use Check::*;
    let single = |config, checks: &[Check]| ExperimentPreset {
        name: name.to_string(),
        config,
        checks: checks.to_vec(),
        kind: PresetKind::Single,
    };
    Ok(match name {
        "free-wave" => single(
            reference(CoefficientSet::zero()),
            &[WaveDecay, Margins, Support],
        ),
        "free-kg" => single(
            reference(CoefficientSet::zero()),
            &[KgDecay, Margins, Support],
        ),
        "headline-nonlinear" => single(
            reference(CoefficientSet::all_ones()),
            &[Bootstrap, Margins, Support],
        ),
        "refinement-pair" => ExperimentPreset {
            name: name.to_string(),
            config: refinement_config(),
            checks: vec![Transform, Support],
            kind: PresetKind::Refinement {
                sets: refinement_sets(),
            },
        },
        other => match other
            .strip_prefix("single-")
            .map(str::parse::<CouplingFamily>)
        {
            Some(Ok(f)) => single(reference(CoefficientSet::single(f)), &[Margins, Support]),
            _ => return Err(Error::UnknownPreset(other.to_string())),
        },
    })
}
