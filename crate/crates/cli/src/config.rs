use std::collections::BTreeSet;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use symbreak::layered::SyntheticDescription;
use symbreak::scheme::WindowPolicy;
use symbreak::{generate, Error, FamilySpec, LayeredGraph, Result};

/// Where the graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyArg {
    Builtin(FamilySpec),
    /// `threads:<strands>x<depth>`
    Threads {
        strands: usize,
        depth: usize,
    },
    /// `synthetic:<path>` to a JSON `{"sphere_sizes": [...], "edges": [...]}`.
    Synthetic(PathBuf),
    /// `graph:<path>` to a layered graph file.
    Graph(PathBuf),
}

impl FromStr for FamilyArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(p) = s.strip_prefix("synthetic:") {
            return Ok(FamilyArg::Synthetic(p.into()));
        }
        if let Some(p) = s.strip_prefix("graph:") {
            return Ok(FamilyArg::Graph(p.into()));
        }
        if let Some(t) = s.strip_prefix("threads:") {
            let bad = || Error::InvalidFamily(format!("expected threads:<strands>x<depth>, got `{s}`"));
            let (a, b) = t.split_once('x').ok_or_else(bad)?;
            let strands = a.parse().map_err(|_| bad())?;
            let depth = b.parse().map_err(|_| bad())?;
            if strands == 0 || depth == 0 {
                return Err(bad());
            }
            return Ok(FamilyArg::Threads { strands, depth });
        }
        s.parse().map(FamilyArg::Builtin)
    }
}

impl FamilyArg {
    pub fn load(&self, radius: usize) -> Result<LayeredGraph> {
        match self {
            FamilyArg::Builtin(spec) => generate(spec, radius),
            FamilyArg::Threads { strands, depth } => {
                generate(&FamilySpec::Synthetic(SyntheticDescription::threads(*strands, *depth)), radius)
            }
            FamilyArg::Synthetic(path) => {
                let desc: SyntheticDescription = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                generate(&FamilySpec::Synthetic(desc), radius)
            }
            FamilyArg::Graph(path) => {
                let g = LayeredGraph::read(path)?;
                if radius > g.radius() {
                    return Err(Error::InvalidParameter(format!(
                        "radius {radius} exceeds the radius {} of {}",
                        g.radius(),
                        path.display()
                    )));
                }
                g.truncate(radius)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CMode {
    Auto,
    Value(f64),
}

impl FromStr for CMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(CMode::Auto);
        }
        match s.parse::<f64>() {
            Ok(c) if c > 0.0 && c.is_finite() => Ok(CMode::Value(c)),
            _ => Err(Error::InvalidParameter(format!("--c expects `auto` or a positive number, got `{s}`"))),
        }
    }
}

impl Serialize for CMode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CMode::Auto => s.serialize_str("auto"),
            CMode::Value(c) => s.serialize_f64(*c),
        }
    }
}

impl CMode {
    pub fn value(self) -> Option<f64> {
        match self {
            CMode::Auto => None,
            CMode::Value(c) => Some(c),
        }
    }
}

/// `auto`, `strict`, or a maximum window length.
pub fn parse_window(s: &str) -> Result<WindowPolicy> {
    match s {
        "auto" => Ok(WindowPolicy::Capped { max_window: None }),
        "strict" => Ok(WindowPolicy::Strict),
        n => match n.parse::<usize>() {
            Ok(k) if k > 0 => Ok(WindowPolicy::Capped { max_window: Some(k) }),
            _ => Err(Error::InvalidParameter(format!(
                "--window expects `auto`, `strict` or a positive length, got `{s}`"
            ))),
        },
    }
}

/// `auto` or a comma-separated list of strictly increasing sphere indices.
pub fn parse_levels(s: &str) -> Result<Option<Vec<usize>>> {
    if s == "auto" {
        return Ok(None);
    }
    let levels = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::InvalidParameter(format!("--levels expects `auto` or a list like 5,10, got `{s}`")))?;
    if levels.windows(2).any(|w| w[0] >= w[1]) || levels.iter().collect::<BTreeSet<_>>().len() != levels.len() {
        return Err(Error::InvalidParameter(format!("--levels must be strictly increasing, got `{s}`")));
    }
    Ok(Some(levels))
}

pub fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon must lie in (0,1), got {epsilon}")))
    }
}

pub fn check_radius(radius: usize) -> Result<()> {
    if radius >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("radius must be at least 1".into()))
    }
}

/// Fully resolved run configuration, embedded in every report. Output paths
/// are left out so that reruns into different locations compare equal.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<CMode>,
    pub seed: u64,
    pub force: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Levels>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tries: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lab: Option<LabConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Levels {
    Auto(&'static str),
    List(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LabConfig {
    pub instances: usize,
    pub min_points: usize,
    pub max_points: usize,
    pub generators: usize,
    pub group_cap: usize,
    pub trials: u64,
}
