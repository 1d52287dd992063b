//! Experiment configuration files.
//!
//! A config is a JSON document:
//!
//! ```json
//! {
//!   "name": "half-plane equality",
//!   "domain": {"kind": "half_space"},
//!   "norm": {"kind": "euclidean"},
//!   "params": {"n": 2, "p": 1.5, "a": 2.0, "h": [0.25, 0.5], "eps": []},
//!   "fixture": {"kind": "extremal"},
//!   "checks": ["bbl_gap", "derived_gap"],
//!   "tolerances": {"bbl_gap": 0.0},
//!   "quadrature": {"box": 6.0, "resolution": 49, "levels": 2, "step": 0.1},
//!   "output": {"report": "out/report.json", "curves": "out/curves", "timings": "out/timings.json"}
//! }
//! ```
//!
//! Only `checks` needs to be present; `domain` and `params` are required once it is
//! non-empty. Relative output and grid-file paths resolve against the config's directory.

use crate::bblcheck::AdmissibilityParams;
use crate::error::{Error, Result};
use crate::extgrid::DomainSpec;
use crate::transforms::NormSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// The closed set of checks a config may request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    BblGap,
    DerivedGap,
    AppendixLimit,
    Semigroup,
    HjQuotient,
    TraceGn,
    WeightedTrace,
    Constants,
    Admissibility,
    EquivalenceScan,
}

impl CheckName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::BblGap => "bbl_gap",
            CheckName::DerivedGap => "derived_gap",
            CheckName::AppendixLimit => "appendix_limit",
            CheckName::Semigroup => "semigroup",
            CheckName::HjQuotient => "hj_quotient",
            CheckName::TraceGn => "trace_gn",
            CheckName::WeightedTrace => "weighted_trace",
            CheckName::Constants => "constants",
            CheckName::Admissibility => "admissibility",
            CheckName::EquivalenceScan => "equivalence_scan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub n: usize,
    pub p: f64,
    pub a: f64,
    #[serde(default)]
    pub h: Vec<f64>,
    #[serde(default)]
    pub eps: Vec<f64>,
}

/// What g, W (or f for the trace checks) are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FixtureSpec {
    /// The equality pair g = W(· + e), W = C‖·‖^q/q; f is the trace extremal.
    #[default]
    Extremal,
    /// The extremal g plus a bump; f is the bump itself.
    Bump { center: Vec<f64>, radius: f64, amp: f64 },
    /// g and W read from grid files (grid checks only).
    GridFile { g: PathBuf, w: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Half-width R of the sampling box.
    #[serde(rename = "box", default = "default_box")]
    pub half_width: f64,
    /// Nodes per axis of the finest grid (odd).
    #[serde(default = "default_res")]
    pub resolution: usize,
    /// Number of grid or quadrature levels in refinement curves.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Step of the mapped quadrature rule.
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_box() -> f64 {
    6.0
}
fn default_res() -> usize {
    49
}
fn default_levels() -> usize {
    2
}
fn default_step() -> f64 {
    0.1
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { half_width: default_box(), resolution: default_res(), levels: default_levels(), step: default_step() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub curves: Option<PathBuf>,
    #[serde(default)]
    pub timings: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default = "euclidean")]
    pub norm: NormSpec,
    #[serde(default)]
    pub params: Option<ParamSpec>,
    #[serde(default)]
    pub fixture: FixtureSpec,
    #[serde(default)]
    pub checks: Vec<CheckName>,
    /// Extra slack added to each check's built-in tolerance.
    #[serde(default)]
    pub tolerances: BTreeMap<CheckName, f64>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub admissibility: Option<AdmissibilityParams>,
    /// Runs a built-in acceptance matrix after the checks.
    #[serde(default)]
    pub suite: Option<SuiteName>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

fn euclidean() -> NormSpec {
    NormSpec::Euclidean
}

fn default_seed() -> u64 {
    super::suite::SUITE_SEED
}

impl ExperimentConfig {
    /// Parses JSON text; errors carry the line and column of the offending token.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |m| m.0).to_string();
            Error::Parse(format!("{origin}: line {}, column {}: {msg}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: line 0, column 0: cannot read config: {e}", path.display())))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    /// Structural checks that do not depend on theorem hypotheses.
    fn validate(&self) -> Result<()> {
        if !self.checks.is_empty() && (self.domain.is_none() || self.params.is_none()) {
            return Err(Error::Parse("a config with checks needs `domain` and `params`".into()));
        }
        let q = &self.quadrature;
        if !(q.half_width > 1.0) || q.resolution < 5 || q.levels == 0 || !(q.step > 0.0) {
            return Err(Error::Parse("quadrature needs box > 1, resolution >= 5, levels >= 1 and step > 0".into()));
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let FixtureSpec::GridFile { g, w } = &mut self.fixture {
            fix(g);
            fix(w);
        }
        for p in [&mut self.output.report, &mut self.output.curves, &mut self.output.timings].into_iter().flatten() {
            fix(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_and_full_configs() {
        let c = ExperimentConfig::parse(r#"{"checks": []}"#, "t").unwrap();
        assert!(c.checks.is_empty() && c.fixture == FixtureSpec::Extremal);
        let c = ExperimentConfig::parse(
            r#"{"domain": {"kind": "cone", "params": [1.0]}, "params": {"n": 2, "p": 1.5, "a": 2.5},
                "fixture": {"kind": "bump", "center": [0, 0.5], "radius": 1, "amp": 2},
                "checks": ["trace_gn", "constants"], "tolerances": {"trace_gn": 0.01}}"#,
            "t",
        )
        .unwrap();
        assert_eq!(c.checks, vec![CheckName::TraceGn, CheckName::Constants]);
        assert_eq!(c.tolerances[&CheckName::TraceGn], 0.01);
    }

    #[test]
    fn unknown_check_has_position() {
        let text = "{\n  \"domain\": {\"kind\": \"half_space\"},\n  \"params\": {\"n\": 2, \"p\": 1.5, \"a\": 2},\n  \"checks\": [\"bbl_gap\", \"bogus\"]\n}";
        let e = ExperimentConfig::parse(text, "cfg.json").unwrap_err().to_string();
        assert!(e.contains("line 4") && e.contains("column") && e.contains("bogus"), "{e}");
    }

    #[test]
    fn unknown_field_and_missing_params() {
        assert!(ExperimentConfig::parse(r#"{"checks": [], "colour": 1}"#, "t").is_err());
        let e = ExperimentConfig::parse(r#"{"checks": ["constants"]}"#, "t").unwrap_err().to_string();
        assert!(e.contains("domain"));
    }
}
