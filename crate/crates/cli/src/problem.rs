//! Problem files: named groups, shifts, maps, patterns and configurations in strict JSON.

use std::collections::BTreeMap;
use std::path::Path;

use gca_core::group::FiniteGroup;
use gca_core::language::{default_groupness_radius, groupness_check, Budget};
use gca_core::maps::GroupShiftHom;
use gca_core::presentation::GroupShiftPresentation;
use gca_core::shape::{Pattern, PeriodicConfiguration, Shape};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProblem {
    #[serde(default)]
    pub groups: BTreeMap<String, RawGroup>,
    #[serde(default)]
    pub shifts: BTreeMap<String, RawShift>,
    #[serde(default)]
    pub maps: BTreeMap<String, RawMap>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub patterns: BTreeMap<String, RawPattern>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub configs: BTreeMap<String, RawConfig>,
    #[serde(default)]
    pub defaults: RawDefaults,
}

/// Either `{"preset": name}` or `{"cayley": rows}`; the identity comes first, so the first
/// row lists the elements in table order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGroup {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cayley: Option<Vec<Vec<String>>>,
}

/// A shift given by forbidden patterns; also the form in which reports print shifts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawShift {
    pub group: String,
    pub dim: usize,
    #[serde(default)]
    pub forbidden: Vec<RawPattern>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMap {
    pub domain: String,
    /// Word expression such as `x[0] + x[1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighborhood: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<RawEntry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEntry {
    #[serde(rename = "in")]
    pub input: Vec<String>,
    pub out: String,
}

/// Parallel arrays of cells and element labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPattern {
    pub cells: Vec<Vec<i64>>,
    pub values: Vec<String>,
}

/// Fundamental box in row-major order, one inner list per row along the last axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub periods: Vec<usize>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDefaults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<RawBudget>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBudget {
    pub period: usize,
    #[serde(rename = "box")]
    pub max_box: usize,
    pub steps: u64,
}

impl From<Budget> for RawBudget {
    fn from(b: Budget) -> Self {
        RawBudget { period: b.max_period, max_box: b.max_box, steps: b.max_steps }
    }
}

impl RawPattern {
    pub fn from_pattern(p: &Pattern) -> Self {
        let (cells, values) = p.entries().map(|(c, v)| (c.clone(), p.group().label(v))).unzip();
        RawPattern { cells, values }
    }

    pub fn to_pattern(&self, g: &FiniteGroup, dim: usize) -> Result<Pattern> {
        if self.cells.len() != self.values.len() {
            return Err(CliError::validation(format!(
                "pattern has {} cells but {} values",
                self.cells.len(),
                self.values.len()
            )));
        }
        if let Some(c) = self.cells.iter().find(|c| c.len() != dim) {
            return Err(CliError::validation(format!("cell {c:?} is not {dim}-dimensional")));
        }
        let entries = self
            .cells
            .iter()
            .zip(&self.values)
            .map(|(c, v)| Ok((c.clone(), parse_label(g, v)?)))
            .collect::<Result<Vec<_>>>()?;
        Pattern::from_cells(g, dim, entries).map_err(|e| CliError::context("pattern", e))
    }
}

impl RawConfig {
    pub fn from_config(c: &PeriodicConfiguration) -> Self {
        let row = c.periods().last().copied().unwrap_or(1);
        let rows = c.fundamental().chunks(row).map(|r| r.iter().map(|&v| c.group().label(v)).collect()).collect();
        RawConfig { periods: c.periods().to_vec(), rows }
    }

    pub fn to_config(&self, g: &FiniteGroup) -> Result<PeriodicConfiguration> {
        let row = self.periods.last().copied().unwrap_or(1);
        if self.rows.iter().any(|r| r.len() != row) {
            return Err(CliError::validation(format!("configuration rows must have length {row}")));
        }
        let values = self.rows.iter().flatten().map(|v| parse_label(g, v)).collect::<Result<Vec<_>>>()?;
        PeriodicConfiguration::new(g, self.periods.clone(), values).map_err(|e| CliError::context("configuration", e))
    }
}

fn parse_label(g: &FiniteGroup, s: &str) -> Result<usize> {
    g.parse_label(s).ok_or_else(|| CliError::validation(format!("{s:?} is not an element of {}", g.name())))
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(path: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

#[derive(Clone, Debug)]
pub struct Shift {
    pub group: String,
    pub presentation: GroupShiftPresentation,
}

#[derive(Clone, Debug)]
pub struct Map {
    pub domain: String,
    pub hom: GroupShiftHom,
}

/// A validated problem file: groups checked, shifts normalized and closed under the group
/// operation on a test box, maps verified as homomorphisms.
#[derive(Clone, Debug)]
pub struct Problem {
    pub path: String,
    pub raw: RawProblem,
    pub groups: BTreeMap<String, FiniteGroup>,
    pub shifts: BTreeMap<String, Shift>,
    pub maps: BTreeMap<String, Map>,
    pub budget: Budget,
}

impl Problem {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        Self::from_str(&path.display().to_string(), &text)
    }

    pub fn from_str(path: &str, text: &str) -> Result<Self> {
        let raw: RawProblem = parse_json(path, text)?;
        Self::from_raw(path, raw)
    }

    pub fn from_raw(path: &str, raw: RawProblem) -> Result<Self> {
        let budget = match raw.defaults.budget {
            Some(b) => Budget::new(b.period, b.max_box, b.steps).map_err(|e| CliError::context("defaults", e))?,
            None => Budget::default(),
        };
        let mut groups = BTreeMap::new();
        for (name, g) in &raw.groups {
            groups.insert(name.clone(), build_group(name, g)?);
        }
        let mut p = Problem { path: path.to_string(), raw: raw.clone(), groups, shifts: BTreeMap::new(), maps: BTreeMap::new(), budget };
        for (name, s) in &raw.shifts {
            let presentation = p.build_shift(s).map_err(|e| prefix(&format!("shift {name}"), e))?;
            p.shifts.insert(name.clone(), Shift { group: s.group.clone(), presentation });
        }
        for (name, m) in &raw.maps {
            let hom = p.build_map(m).map_err(|e| prefix(&format!("map {name}"), e))?;
            p.maps.insert(name.clone(), Map { domain: m.domain.clone(), hom });
        }
        for (name, pat) in &raw.patterns {
            if pat.cells.len() != pat.values.len() {
                return Err(CliError::validation(format!("pattern {name}: cells and values differ in length")));
            }
        }
        for (name, c) in &raw.configs {
            let volume: usize = c.periods.iter().product();
            if c.rows.iter().map(Vec::len).sum::<usize>() != volume {
                return Err(CliError::validation(format!("configuration {name}: expected {volume} values")));
            }
        }
        Ok(p)
    }

    pub fn group(&self, name: &str) -> Result<&FiniteGroup> {
        self.groups.get(name).ok_or_else(|| unresolved("group", name))
    }

    pub fn shift(&self, name: &str) -> Result<&Shift> {
        self.shifts.get(name).ok_or_else(|| unresolved("shift", name))
    }

    pub fn map(&self, name: &str) -> Result<&Map> {
        self.maps.get(name).ok_or_else(|| unresolved("map", name))
    }

    /// A named pattern read over the alphabet and dimension of `x`.
    pub fn pattern(&self, name: &str, x: &GroupShiftPresentation) -> Result<Pattern> {
        let raw = self.raw.patterns.get(name).ok_or_else(|| unresolved("pattern", name))?;
        raw.to_pattern(x.group(), x.dim()).map_err(|e| prefix(&format!("pattern {name}"), e))
    }

    pub fn config(&self, name: &str, x: &GroupShiftPresentation) -> Result<PeriodicConfiguration> {
        let raw = self.raw.configs.get(name).ok_or_else(|| unresolved("configuration", name))?;
        if raw.periods.len() != x.dim() {
            return Err(CliError::validation(format!("configuration {name} is not {}-dimensional", x.dim())));
        }
        raw.to_config(x.group()).map_err(|e| prefix(&format!("configuration {name}"), e))
    }

    /// The problem-file name of a group, for printing derived shifts.
    pub fn group_name(&self, g: &FiniteGroup) -> String {
        self.groups.iter().find(|(_, h)| *h == g).map(|(n, _)| n.clone()).unwrap_or_else(|| g.name().to_string())
    }

    /// A shift in problem-file form, listing the forbidden windows.
    pub fn raw_shift(&self, x: &GroupShiftPresentation) -> RawShift {
        RawShift {
            group: self.group_name(x.group()),
            dim: x.dim(),
            forbidden: x.forbidden_patterns().iter().map(RawPattern::from_pattern).collect(),
        }
    }

    pub fn build_shift(&self, s: &RawShift) -> Result<GroupShiftPresentation> {
        let g = self.group(&s.group)?;
        if s.dim == 0 {
            return Err(CliError::validation("dimension must be at least 1"));
        }
        let forbidden = s.forbidden.iter().map(|p| p.to_pattern(g, s.dim)).collect::<Result<Vec<_>>>()?;
        let x = GroupShiftPresentation::from_forbidden(g, s.dim, &forbidden).map_err(|e| CliError::context("presentation", e))?;
        // the test box shrinks until the budget can enumerate it
        let mut witness = None;
        for r in (1..=default_groupness_radius(&x)).rev() {
            match groupness_check(&x, r, &self.budget) {
                Ok(check) => {
                    witness = check.witness;
                    break;
                }
                Err(e) if e.is_budget() => continue,
                Err(e) => return Err(CliError::context("groupness", e)),
            }
        }
        if let Some((a, b)) = witness {
            return Err(CliError::validation(format!(
                "not a group shift: allowed patterns {} and {} have a forbidden product",
                a.describe(),
                b.describe()
            )));
        }
        Ok(x)
    }

    fn build_map(&self, m: &RawMap) -> Result<GroupShiftHom> {
        let x = &self.shift(&m.domain)?.presentation;
        let b = &self.budget;
        let hom = match (&m.rule, &m.neighborhood, &m.table) {
            (Some(rule), None, None) => {
                if m.target.is_some() {
                    return Err(CliError::validation("a rule expression maps into the domain alphabet; drop \"target\""));
                }
                GroupShiftHom::from_expr(x, rule, b)
            }
            (None, Some(cells), Some(table)) => {
                let target = match &m.target {
                    Some(t) => self.group(t)?.clone(),
                    None => x.group().clone(),
                };
                let nbhd = Shape::new(x.dim(), cells.clone()).map_err(|e| CliError::context("neighborhood", e))?;
                let entries = table
                    .iter()
                    .map(|e| {
                        let inp = e.input.iter().map(|v| parse_label(x.group(), v)).collect::<Result<Vec<_>>>()?;
                        Ok((inp, parse_label(&target, &e.out)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                GroupShiftHom::from_table(x, &target, nbhd, &entries, b)
            }
            _ => return Err(CliError::validation("give either \"rule\" or both \"neighborhood\" and \"table\"")),
        };
        hom.and_then(|h| h.verify(b)).map_err(|e| CliError::context("local rule", e))
    }
}

fn build_group(name: &str, g: &RawGroup) -> Result<FiniteGroup> {
    match (&g.preset, &g.cayley) {
        (Some(p), None) => FiniteGroup::preset(p).ok_or_else(|| CliError::validation(format!("group {name}: unknown preset {p:?}"))),
        (None, Some(rows)) => {
            let labels = rows.first().cloned().unwrap_or_default();
            let index = |s: &String| {
                labels.iter().position(|l| l == s).ok_or_else(|| CliError::validation(format!("group {name}: entry {s:?} is not in the first row")))
            };
            if rows.iter().enumerate().any(|(i, r)| r.first() != labels.get(i)) {
                return Err(CliError::validation(format!("group {name}: the first row and column must belong to the identity")));
            }
            let mul = rows.iter().map(|r| r.iter().map(index).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
            FiniteGroup::from_table(name, labels, mul).map_err(|e| CliError::context(&format!("group {name}"), e))
        }
        _ => Err(CliError::validation(format!("group {name}: give exactly one of \"preset\" and \"cayley\""))),
    }
}

fn unresolved(kind: &str, name: &str) -> CliError {
    CliError::validation(format!("unresolved reference: no {kind} named {name:?}"))
}

fn prefix(what: &str, e: CliError) -> CliError {
    match e {
        CliError::Validation(m) => CliError::Validation(format!("{what}: {m}")),
        other => other,
    }
}
