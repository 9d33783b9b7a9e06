//! Reports: the JSON result of one command, with certificates that re-verify on reload.

use std::collections::BTreeMap;
use std::time::Duration;

use gca_core::ca::{check_certificate, Certificate, DecisionReport, Verdict};
use gca_core::language::{member, verify_membership, Budget, Membership, Refutation};
use gca_core::presentation::GroupShiftPresentation;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::problem::{Problem, RawBudget, RawConfig, RawPattern, RawShift};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: String,
    pub inputs: Inputs,
    pub verdicts: Vec<VerdictEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub presentations: BTreeMap<String, RawShift>,
    pub stats: ReportStats,
    pub version: String,
    pub budget: RawBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub file: String,
    pub args: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictEntry {
    pub property: String,
    /// `true`/`false` for decided properties, `"budget-exceeded"`, or a class name or number.
    pub verdict: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportStats {
    pub wall_ms: f64,
    pub shifts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CertJson {
    Pattern { pattern: RawPattern },
    /// Equal to the pattern on its cells and to the identity elsewhere.
    Finite { pattern: RawPattern },
    Configuration { configuration: RawConfig },
    /// Space-time torus; the last axis is time.
    Orbit { configuration: RawConfig },
    Shift { shift: RawShift },
    Index { index: usize },
    /// The pattern has no extension to the box of this radius, or (without a radius) no
    /// path in the one-dimensional automaton.
    Refutation { radius: Option<usize> },
}

pub fn verdict_value(v: Verdict) -> Value {
    match v {
        Verdict::True => Value::Bool(true),
        Verdict::False => Value::Bool(false),
        Verdict::BudgetExceeded => Value::String("budget-exceeded".into()),
    }
}

pub fn parse_verdict(v: &Value) -> Option<Verdict> {
    match v {
        Value::Bool(b) => Some(Verdict::from_bool(*b)),
        Value::String(s) if s == "budget-exceeded" => Some(Verdict::BudgetExceeded),
        _ => None,
    }
}

impl CertJson {
    pub fn from_certificate(c: &Certificate, problem: &Problem) -> Self {
        match c {
            Certificate::Pattern(p) => CertJson::Pattern { pattern: RawPattern::from_pattern(p) },
            Certificate::Finite(p) => CertJson::Finite { pattern: RawPattern::from_pattern(p) },
            Certificate::Configuration(c) => CertJson::Configuration { configuration: RawConfig::from_config(c) },
            Certificate::Orbit(c) => CertJson::Orbit { configuration: RawConfig::from_config(c) },
            Certificate::Shift(x) => CertJson::Shift { shift: problem.raw_shift(x) },
            Certificate::Index(k) => CertJson::Index { index: *k },
        }
    }

    /// Reads the certificate back over the alphabet of `x`.
    pub fn to_certificate(&self, problem: &Problem, x: &GroupShiftPresentation) -> Result<Option<Certificate>> {
        let (g, d) = (x.group(), x.dim());
        Ok(Some(match self {
            CertJson::Pattern { pattern } => Certificate::Pattern(pattern.to_pattern(g, d)?),
            CertJson::Finite { pattern } => Certificate::Finite(pattern.to_pattern(g, d)?),
            CertJson::Configuration { configuration } => Certificate::Configuration(configuration.to_config(g)?),
            CertJson::Orbit { configuration } => Certificate::Orbit(configuration.to_config(g)?),
            CertJson::Shift { shift } => Certificate::Shift(problem.build_shift(shift)?),
            CertJson::Index { index } => Certificate::Index(*index),
            CertJson::Refutation { .. } => return Ok(None),
        }))
    }
}

impl VerdictEntry {
    pub fn new(property: &str, verdict: Value) -> Self {
        VerdictEntry { property: property.into(), verdict, certificate: None, details: None }
    }

    pub fn from_decision(r: &DecisionReport, problem: &Problem) -> Self {
        let mut details = serde_json::Map::new();
        if let Some((n, p)) = r.period {
            details.insert("preperiod".into(), n.into());
            details.insert("period".into(), p.into());
        }
        if let Some(route) = r.route {
            details.insert("route".into(), format!("{route:?}").to_lowercase().into());
        }
        details.insert("wall_ms".into(), millis(r.stats.wall).into());
        VerdictEntry {
            property: r.property.clone(),
            verdict: verdict_value(r.verdict),
            certificate: r.certificate.as_ref().map(|c| CertJson::from_certificate(c, problem)),
            details: Some(Value::Object(details)),
        }
    }
}

pub fn millis(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

impl Report {
    pub fn new(command: &str, problem: &Problem, args: &[String], budget: &Budget) -> Self {
        Report {
            command: command.into(),
            inputs: Inputs { file: problem.path.clone(), args: args.to_vec() },
            verdicts: Vec::new(),
            presentations: BTreeMap::new(),
            stats: ReportStats::default(),
            version: VERSION.into(),
            budget: (*budget).into(),
        }
    }

    pub fn verdict(&self, property: &str) -> Option<&VerdictEntry> {
        self.verdicts.iter().find(|v| v.property == property)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(path: &str, text: &str) -> Result<Self> {
        crate::problem::parse_json(path, text)
    }

    pub fn budget(&self) -> Result<Budget> {
        Budget::new(self.budget.period, self.budget.max_box, self.budget.steps).map_err(|e| CliError::context("report budget", e))
    }
}

/// Re-checks every certificate of a report against the problem file it was computed from.
/// Returns one `(property, holds)` pair per certificate.
pub fn verify_certificates(report: &Report, problem: &Problem) -> Result<Vec<(String, bool)>> {
    let budget = report.budget()?;
    let arg = |i: usize| {
        report.inputs.args.get(i).map(String::as_str).ok_or_else(|| CliError::validation("report is missing an input"))
    };
    let mut out = Vec::new();
    for v in &report.verdicts {
        let Some(cert) = &v.certificate else { continue };
        let ok = match report.command.as_str() {
            "analyze" => {
                let f = &problem.map(arg(0)?)?.hom;
                let verdict = parse_verdict(&v.verdict).ok_or_else(|| CliError::validation("certificate on an undecided verdict"))?;
                match cert.to_certificate(problem, f.domain())? {
                    Some(c) => check_certificate(f, &v.property, verdict, &c, &budget)?,
                    None => false,
                }
            }
            "member" => {
                let x = &problem.shift(arg(0)?)?.presentation;
                let p = problem.pattern(arg(1)?, x)?;
                let m = match cert {
                    CertJson::Refutation { radius: None } => Membership::No(Refutation::NoPath),
                    CertJson::Refutation { radius: Some(n) } => Membership::No(Refutation::Box(*n)),
                    CertJson::Configuration { configuration } => Membership::Yes(Some(configuration.to_config(x.group())?)),
                    _ => return Err(CliError::validation("unexpected membership certificate")),
                };
                verify_membership(&p, x, &m) && m.is_member() == (v.verdict == Value::Bool(true))
            }
            "compare" => {
                // a pattern of the first shift that the second misses
                let (a, b) = match v.property.as_str() {
                    "contained" => (arg(0)?, arg(1)?),
                    _ => (arg(1)?, arg(0)?),
                };
                let (a, b) = (&problem.shift(a)?.presentation, &problem.shift(b)?.presentation);
                match cert.to_certificate(problem, a)? {
                    Some(Certificate::Pattern(p)) => {
                        member(&p, a, &budget)?.is_member() && !member(&p, b, &budget)?.is_member()
                    }
                    _ => false,
                }
            }
            other => return Err(CliError::validation(format!("command {other} emits no certificates"))),
        };
        out.push((v.property.clone(), ok));
    }
    Ok(out)
}
