//! Machine-readable run reports.
//!
//! Reports are versioned (`finslerlab/1`), carry the convention-table
//! digest, and serialize floats with 17 significant digits so archived
//! numbers round-trip exactly. Serialization is fully deterministic: maps
//! are ordered, and a fixed seed reproduces a run byte for byte.

use crate::conventions::conventions_digest;
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io;

pub const SCHEMA: &str = "finslerlab/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Registry of check identities: every [`CheckRecord::anchor`] must be one
/// of these keys. The descriptions say what each check verifies, so a
/// report is self-describing.
pub const REGISTRY: &[(&str, &str)] = &[
    (
        "fundamental-invariants",
        "homogeneity invariants of the fundamental tensors: g(y,y) = F^2, l(y) = F, h(y,.) = 0",
    ),
    (
        "matsumoto-vanishing",
        "the Matsumoto torsion vanishes for Randers-type metrics",
    ),
    (
        "torsion-reducibility",
        "the Cartan torsion equals its mean spread over the angular metric",
    ),
    (
        "landsberg-reconstruction",
        "the Landsberg curvature equals its mean spread over the angular metric",
    ),
    (
        "flag-curvature-constancy",
        "the flag curvature is independent of the chosen flag at a sample",
    ),
    (
        "flag-curvature-value",
        "the flag curvature matches the chart's reference constant",
    ),
    (
        "three-index-closed-form",
        "closed form of the three-index curvature on scalar-flag charts",
    ),
    (
        "adjusted-ricci-closed-form",
        "printed closed form of the adjusted Ricci tensor on scalar-flag charts",
    ),
    (
        "adjusted-ricci-companion",
        "substitution-derived closed form of the adjusted Ricci tensor on scalar-flag charts",
    ),
    (
        "asymmetry-defect",
        "the contracted asymmetry of the adjusted tensor equals minus K F^2 times the mean torsion",
    ),
    (
        "asymmetry-witness",
        "the contracted asymmetry is bounded away from zero on curved non-Riemannian charts",
    ),
    (
        "ricci-symmetry",
        "the Ricci tensor is symmetric on scalar-flag charts",
    ),
    (
        "berwald-chain",
        "Berwald charts: the Berwald curvature vanishes while the hh-curvature does not",
    ),
    (
        "flat-chain",
        "flat charts: the whole curvature chain vanishes",
    ),
    (
        "curvature-bridge",
        "spray-side and connection-side curvature agree after the ledger sign",
    ),
    (
        "hh-antisymmetry",
        "the hh-curvature is antisymmetric in its last index pair",
    ),
    (
        "connection-compatibility",
        "the connection coefficients contract to the nonlinear connection and the spray",
    ),
    (
        "contraction-identities",
        "algebraic contraction identities of the adjusted tensor",
    ),
    (
        "first-integral",
        "the norm of the velocity is a first integral of the geodesic flow",
    ),
    (
        "transport-invariance",
        "the metric pairing of a transported vector is constant along geodesics",
    ),
    (
        "berwald-transport-isometry",
        "transport preserves the norm functional on Berwald charts",
    ),
    (
        "kinematic-identity",
        "the mean Landsberg trace is the time derivative of the mean Cartan trace",
    ),
    (
        "berwald-trace-statics",
        "Berwald charts transport the mean torsion trace unchanged",
    ),
    (
        "linear-evolution",
        "linear evolution of the mean Cartan trace while the Landsberg trace stays constant",
    ),
    (
        "reversal",
        "backward integration returns the transported frame to its start",
    ),
    (
        "torsion-norm-bound",
        "claimed bound of the mean torsion norm in terms of the covector norm",
    ),
    (
        "torsion-norm-strict",
        "claimed dimension-only bound of the mean torsion norm",
    ),
    (
        "ad-fd-agreement",
        "seeded jet derivatives agree with the finite-difference oracle",
    ),
    (
        "classification",
        "metric class flags at sampled points",
    ),
    (
        "determinism",
        "a fixed seed reproduces the report bytes exactly",
    ),
];

/// Default tolerances, overridable per run with `NAME=VALUE` specs.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    let defaults: &[(&str, f64)] = &[
        ("fundamental", 1e-10),
        ("matsumoto", 1e-9),
        ("c-reducibility", 1e-9),
        ("landsberg-reconstruction", 1e-9),
        ("flag-constancy", 1e-7),
        ("flag-value", 1e-6),
        ("scalar-flag-detect", 1e-6),
        ("three-index-closed-form", 1e-6),
        ("adjusted-closed-form", 1e-6),
        ("adjusted-companion", 1e-6),
        ("defect-identity", 1e-6),
        ("defect-floor", 1e-3),
        ("ricci-symmetry", 1e-8),
        ("berwald-flat", 1e-9),
        ("curvature-floor", 1e-2),
        ("flat-chain", 1e-10),
        ("curvature-bridge", 1e-8),
        ("hh-antisymmetry", 1e-9),
        ("connection-compat", 1e-9),
        ("contraction-identities", 1e-10),
        ("first-integral", 1e-8),
        ("transport-g-drift", 1e-8),
        ("transport-f-drift", 1e-8),
        ("kinematic", 1e-4),
        ("berwald-j", 1e-8),
        ("berwald-i-drift", 1e-7),
        ("linear-law", 1e-7),
        ("linear-law-hypothesis", 1e-8),
        ("reversal", 1e-7),
        ("torsion-bound", 1e-9),
        ("ad-fd", 1e-5),
        ("classifier", 1e-8),
    ];
    defaults
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect()
}

/// Apply `NAME=VALUE` override specs; unknown names are configuration
/// errors so typos cannot silently loosen a run.
pub fn apply_overrides(tols: &mut BTreeMap<String, f64>, specs: &[String]) -> Result<()> {
    for spec in specs {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("tolerance override '{spec}' is not NAME=VALUE")))?;
        if !tols.contains_key(name) {
            return Err(Error::Config(format!("unknown tolerance name '{name}'")));
        }
        let parsed: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("tolerance value '{value}' is not a number")))?;
        if !(parsed > 0.0) {
            return Err(Error::Config(format!(
                "tolerance value '{value}' must be positive"
            )));
        }
        tols.insert(name.to_string(), parsed);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "not-applicable")]
    NotApplicable,
}

/// The sample at which a residual was largest.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Key into [`REGISTRY`].
    pub anchor: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    /// Pass/fail record from a residual measured against a tolerance.
    pub fn measured(
        name: impl Into<String>,
        anchor: &'static str,
        residual: f64,
        tolerance: f64,
        witness: Option<Witness>,
    ) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            anchor,
            status: if residual <= tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            residual: Some(residual),
            tolerance: Some(tolerance),
            witness,
            note: None,
        }
    }

    pub fn not_applicable(
        name: impl Into<String>,
        anchor: &'static str,
        note: impl Into<String>,
    ) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            anchor,
            status: Status::NotApplicable,
            residual: None,
            tolerance: None,
            witness: None,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> CheckRecord {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool_version: &'static str,
    /// Hex digest of the convention table.
    pub conventions: String,
    pub command: String,
    pub chart: String,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    /// Free-form measured facts (classification flags, magnitudes, stats).
    pub facts: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(command: &str, chart: &str, dim: usize, samples: usize, seed: u64) -> Report {
        Report {
            schema: SCHEMA,
            tool_version: TOOL_VERSION,
            conventions: format!("{:016x}", conventions_digest()),
            command: command.to_string(),
            chart: chart.to_string(),
            dim,
            samples,
            seed,
            tolerances: BTreeMap::new(),
            facts: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    pub fn has_failure(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    /// Every check anchor must name a registry entry.
    pub fn validate(&self) -> Result<()> {
        for check in &self.checks {
            if !REGISTRY.iter().any(|(key, _)| *key == check.anchor) {
                return Err(Error::Config(format!(
                    "check '{}' uses unregistered anchor '{}'",
                    check.name, check.anchor
                )));
            }
        }
        Ok(())
    }
}

/// Pretty JSON with every f64 printed as `{:.16e}` (17 significant digits).
struct SciFormatter {
    indent: usize,
    has_value: bool,
}

impl SciFormatter {
    fn new() -> SciFormatter {
        SciFormatter {
            indent: 0,
            has_value: false,
        }
    }

    fn newline<W: ?Sized + io::Write>(&self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b"\n")?;
        for _ in 0..self.indent {
            writer.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        writer.write_all(b"[")
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(writer)?;
        }
        writer.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        writer.write_all(b"{")
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(writer)?;
        }
        writer.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }
}

/// Serialize a report (or any value) to the canonical byte form.
pub fn to_canonical_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter::new());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Config(format!("report serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_at_full_precision() {
        let mut report = Report::new("tensors", "funk_ball", 2, 10, 42);
        let value = 0.1 + 0.2;
        report
            .facts
            .insert("probe".into(), serde_json::json!([value, -0.25, 1.0e-300]));
        let bytes = to_canonical_bytes(&report).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["facts"]["probe"][0].as_f64().unwrap(), value);
        assert_eq!(parsed["facts"]["probe"][1].as_f64().unwrap(), -0.25);
        assert_eq!(parsed["facts"]["probe"][2].as_f64().unwrap(), 1.0e-300);
        assert!(text.contains("3.0000000000000004e-1"));
    }

    #[test]
    fn serialization_is_deterministic() {
        let build = || {
            let mut r = Report::new("verify", "funk_ball", 2, 5, 7);
            r.tolerances = default_tolerances();
            r.checks.push(CheckRecord::measured(
                "matsumoto",
                "matsumoto-vanishing",
                1e-12,
                1e-9,
                Some(Witness {
                    x: vec![0.1, 0.2],
                    y: vec![0.3, 0.4],
                }),
            ));
            r
        };
        assert_eq!(
            to_canonical_bytes(&build()).unwrap(),
            to_canonical_bytes(&build()).unwrap()
        );
    }

    #[test]
    fn anchors_must_be_registered() {
        let mut r = Report::new("verify", "funk_ball", 2, 5, 7);
        r.checks.push(CheckRecord {
            name: "bogus".into(),
            anchor: "no-such-anchor",
            status: Status::Pass,
            residual: None,
            tolerance: None,
            witness: None,
            note: None,
        });
        assert!(r.validate().is_err());
        r.checks.clear();
        r.checks
            .push(CheckRecord::not_applicable("law", "linear-evolution", "hypothesis violated"));
        r.validate().unwrap();
    }

    #[test]
    fn overrides_reject_unknown_names_and_bad_values() {
        let mut tols = default_tolerances();
        apply_overrides(&mut tols, &["kinematic=2e-4".to_string()]).unwrap();
        assert_eq!(tols["kinematic"], 2e-4);
        assert!(apply_overrides(&mut tols, &["nope=1".to_string()]).is_err());
        assert!(apply_overrides(&mut tols, &["kinematic".to_string()]).is_err());
        assert!(apply_overrides(&mut tols, &["kinematic=-1".to_string()]).is_err());
    }

    #[test]
    fn status_strings_are_tri_state() {
        let json = serde_json::to_string(&[Status::Pass, Status::Fail, Status::NotApplicable])
            .unwrap();
        assert_eq!(json, r#"["pass","fail","not-applicable"]"#);
    }
}
