//! On-disk solution format.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{self, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use ski_tail::{ProblemConfig, PurchaseDistribution, SolveResult, SolverKind, Termination, World};

/// An `f64` written as a decimal with 17 significant digits, enough for an
/// exact round trip.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dec(pub f64);

impl fmt::Display for Dec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

impl Serialize for Dec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(ser::Error::custom(format!("non-finite number {}", self.0)));
        }
        let raw = RawValue::from_string(self.to_string()).map_err(ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if v.is_finite() {
            Ok(Dec(v))
        } else {
            Err(de::Error::custom("non-finite number"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub a: Dec,
    pub gamma: Dec,
    pub delta: Dec,
    pub tau: Dec,
    pub epsilon: Dec,
    pub x_max: Dec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEcho {
    pub tau: Dec,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDiagnostics {
    pub solver: String,
    pub iterations: usize,
    pub bracket: [Dec; 2],
    pub termination: Option<Termination>,
    pub clamp_count: usize,
    pub notes: Vec<String>,
    pub structure_pass: bool,
    pub p: Option<Dec>,
    pub suffix_mass: Dec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub config: ConfigEcho,
    pub grid: GridEcho,
    pub masses: Vec<Dec>,
    pub mass_inf: Dec,
    pub opt: Dec,
    pub world: u8,
    pub diagnostics: FileDiagnostics,
}

pub fn solver_label(kind: SolverKind) -> &'static str {
    match kind {
        SolverKind::BinarySearch => "binsearch",
        SolverKind::Lp => "lp",
    }
}

impl SolutionFile {
    pub fn from_result(cfg: &ProblemConfig, r: &SolveResult) -> Self {
        let f = &r.distribution;
        Self {
            config: ConfigEcho {
                a: Dec(cfg.a),
                gamma: Dec(cfg.gamma),
                delta: Dec(cfg.delta),
                tau: Dec(cfg.tau),
                epsilon: Dec(cfg.epsilon),
                x_max: Dec(cfg.x_max),
            },
            grid: GridEcho {
                tau: Dec(f.tau),
                count: f.len(),
            },
            masses: f.masses.iter().map(|&m| Dec(m)).collect(),
            mass_inf: Dec(f.mass_inf),
            opt: Dec(r.opt_estimate),
            world: r.world.number(),
            diagnostics: FileDiagnostics {
                solver: solver_label(r.solver).to_string(),
                iterations: r.iterations,
                bracket: [Dec(r.bracket.0), Dec(r.bracket.1)],
                termination: r.diagnostics.termination,
                clamp_count: r.diagnostics.clamp_count,
                notes: r.diagnostics.notes.clone(),
                structure_pass: r.report.pass,
                p: r.report.p.map(Dec),
                suffix_mass: Dec(r.report.suffix_mass),
            },
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn config(&self) -> Result<ProblemConfig, ski_tail::ConfigError> {
        let c = &self.config;
        ProblemConfig::new(c.a.0, c.gamma.0, c.delta.0, c.tau.0, c.epsilon.0)?.with_x_max(c.x_max.0)
    }

    /// The stored distribution, without requiring it to sum to one.
    pub fn distribution(&self) -> Result<PurchaseDistribution, ski_tail::DistributionError> {
        PurchaseDistribution::unnormalized(
            self.grid.tau.0,
            self.masses.iter().map(|d| d.0).collect(),
            self.mass_inf.0,
        )
    }

    pub fn world(&self) -> Option<World> {
        match self.world {
            1 => Some(World::World1),
            2 => Some(World::World2),
            _ => None,
        }
    }
}
