//! Dispatch of the command-line commands to the engine.

use std::time::Instant;

use gca_core::ca::{
    entropy_1d, limit_set, spacetime_shift, trace_shift, transient_length, Analysis, MixingMode, NonMixing,
    SensitivityClass,
};
use gca_core::error::Error;
use gca_core::language::{compare, member, Budget, Membership, Refutation};
use gca_core::maps::{cross_check_image, image_shift, kernel};
use gca_core::oracle::{oracle_decide, oracle_member, OracleMembership, TorusProperty, DEFAULT_K, DEFAULT_K_2D};
use gca_core::projection::project_slice;
use gca_core::shape::Shape;
use serde_json::{json, Value};

use crate::error::Result;
use crate::problem::{Problem, RawConfig};
use crate::render::{orbit_rows, render, Format};
use crate::report::{millis, CertJson, Report, VerdictEntry};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Member { shift: String, pattern: String },
    Compare { first: String, second: String },
    Project { shift: String, width: usize },
    Image { map: String, shift: Option<String> },
    Kernel { map: String },
    Spacetime { map: String },
    Trace { map: String, side: usize },
    Limitset { map: String },
    Analyze { map: String, max_side: usize },
    Entropy { shift: String },
    Orbit { map: String, config: String, steps: usize, format: Format },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    pub budget: Budget,
    pub cross_check: bool,
}

/// A report, plus the rendered diagram for `orbit`.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub artifact: Option<Vec<u8>>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Member { .. } => "member",
            Command::Compare { .. } => "compare",
            Command::Project { .. } => "project",
            Command::Image { .. } => "image",
            Command::Kernel { .. } => "kernel",
            Command::Spacetime { .. } => "spacetime",
            Command::Trace { .. } => "trace",
            Command::Limitset { .. } => "limitset",
            Command::Analyze { .. } => "analyze",
            Command::Entropy { .. } => "entropy",
            Command::Orbit { .. } => "orbit",
        }
    }

    fn args(&self) -> Vec<String> {
        match self {
            Command::Member { shift, pattern } => vec![shift.clone(), pattern.clone()],
            Command::Compare { first, second } => vec![first.clone(), second.clone()],
            Command::Project { shift, width } => vec![shift.clone(), width.to_string()],
            Command::Image { map, shift } => std::iter::once(map.clone()).chain(shift.clone()).collect(),
            Command::Kernel { map } | Command::Spacetime { map } | Command::Limitset { map } => vec![map.clone()],
            Command::Trace { map, side } => vec![map.clone(), side.to_string()],
            Command::Analyze { map, max_side } => vec![map.clone(), max_side.to_string()],
            Command::Entropy { shift } => vec![shift.clone()],
            Command::Orbit { map, config, steps, .. } => vec![map.clone(), config.clone(), steps.to_string()],
        }
    }
}

fn bool_entry(property: &str, b: bool) -> VerdictEntry {
    VerdictEntry::new(property, Value::Bool(b))
}

fn oracle_k(dim: usize) -> usize {
    if dim == 1 {
        DEFAULT_K
    } else {
        DEFAULT_K_2D
    }
}

pub fn run(cmd: &Command, problem: &Problem, opts: &Options) -> Result<Outcome> {
    let start = Instant::now();
    let b = &opts.budget;
    let mut r = Report::new(cmd.name(), problem, &cmd.args(), b);
    let mut artifact = None;
    match cmd {
        Command::Member { shift, pattern } => {
            let x = &problem.shift(shift)?.presentation;
            let p = problem.pattern(pattern, x)?;
            let m = member(&p, x, b)?;
            let mut e = bool_entry("member", m.is_member());
            e.certificate = match &m {
                Membership::Yes(Some(c)) => Some(CertJson::Configuration { configuration: RawConfig::from_config(c) }),
                Membership::Yes(None) => None,
                Membership::No(Refutation::NoPath) => Some(CertJson::Refutation { radius: None }),
                Membership::No(Refutation::Box(n)) => Some(CertJson::Refutation { radius: Some(*n) }),
            };
            r.verdicts.push(e);
            if opts.cross_check {
                let k = oracle_k(x.dim());
                let o = oracle_member(&p, x, k);
                // tori only ever confirm membership
                let mut e = bool_entry("oracle agrees", !o.found() || m.is_member());
                e.details = Some(match o {
                    OracleMembership::Found(_) => json!({ "oracle": "found", "k": k }),
                    OracleMembership::NotFoundUpTo(k) => json!({ "oracle": "not found", "k": k }),
                });
                r.verdicts.push(e);
            }
        }
        Command::Compare { first, second } => {
            let a = &problem.shift(first)?.presentation;
            let bb = &problem.shift(second)?.presentation;
            let c = compare(a, bb, b)?;
            for (property, holds, big, small) in [("contained", c.subset_12, a, bb), ("contains", c.subset_21, bb, a)] {
                let mut e = bool_entry(property, holds);
                if !holds {
                    e.certificate = gca_core::ca::missing_pattern(big, small, b)?
                        .map(|p| CertJson::Pattern { pattern: crate::problem::RawPattern::from_pattern(&p) });
                }
                r.verdicts.push(e);
            }
            r.verdicts.push(bool_entry("equal", c.equal()));
        }
        Command::Project { shift, width } => {
            let x = &problem.shift(shift)?.presentation;
            let y = project_slice(x, *width, b)?;
            r.presentations.insert("slice".into(), problem.raw_shift(&y));
        }
        Command::Image { map, shift } => {
            let f = &problem.map(map)?.hom;
            let x = match shift {
                Some(s) => &problem.shift(s)?.presentation,
                None => f.domain(),
            };
            r.presentations.insert("image".into(), problem.raw_shift(&image_shift(f, x, b)?));
            if opts.cross_check {
                r.verdicts.push(bool_entry("routes agree", cross_check_image(f, x, b)?));
            }
        }
        Command::Kernel { map } => {
            let f = &problem.map(map)?.hom;
            r.presentations.insert("kernel".into(), problem.raw_shift(&kernel(f)?));
        }
        Command::Spacetime { map } => {
            let f = &problem.map(map)?.hom;
            r.presentations.insert("spacetime".into(), problem.raw_shift(&spacetime_shift(f)?));
        }
        Command::Trace { map, side } => {
            let f = &problem.map(map)?.hom;
            let d = f.dim();
            let shape = Shape::boxed(&vec![0; d], &vec![*side; d]);
            r.presentations.insert("trace".into(), problem.raw_shift(&trace_shift(f, &shape, b)?));
        }
        Command::Limitset { map } => {
            let f = &problem.map(map)?.hom;
            let l = limit_set(f, b)?;
            let mut e = VerdictEntry::new("cross-checked", l.cross_checked.map_or(Value::String("skipped".into()), Value::Bool));
            let mut details = json!({ "route": format!("{:?}", l.route).to_lowercase() });
            match transient_length(f, b) {
                Ok(t) => details["transient"] = t.k.into(),
                Err(e) if e.is_budget() => {}
                Err(e) => return Err(e.into()),
            }
            e.details = Some(details);
            r.verdicts.push(e);
            r.presentations.insert("limit set".into(), problem.raw_shift(&l.shift));
        }
        Command::Analyze { map, max_side } => analyze(problem, map, *max_side, opts, &mut r)?,
        Command::Entropy { shift } => {
            let x = &problem.shift(shift)?.presentation;
            let h = entropy_1d(x, 1e-12)?;
            let mut e = VerdictEntry::new("entropy", json!(h.value));
            e.details = Some(json!({
                "method": format!("{:?}", h.method).to_lowercase(),
                "block_counts": h.block_counts.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            }));
            r.verdicts.push(e);
        }
        Command::Orbit { map, config, steps, format } => {
            let f = &problem.map(map)?.hom;
            let c0 = problem.config(config, f.domain())?;
            let rows = orbit_rows(f, &c0, *steps)?;
            let g = f.domain().group();
            artifact = Some(render(&rows, g.identity(), g.order(), *format));
        }
    }
    r.stats.shifts += r.presentations.len();
    r.stats.wall_ms = millis(start.elapsed());
    Ok(Outcome { report: r, artifact })
}

fn budget_or<T>(r: std::result::Result<T, Error>, f: impl FnOnce(T) -> Value) -> Result<Value> {
    match r {
        Ok(v) => Ok(f(v)),
        Err(e) if e.is_budget() => Ok(Value::String("budget-exceeded".into())),
        Err(e) => Err(e.into()),
    }
}

/// The full battery of deciders on one automaton.
fn analyze(problem: &Problem, map: &str, max_side: usize, opts: &Options, r: &mut Report) -> Result<()> {
    let f = &problem.map(map)?.hom;
    let a = Analysis::new(f, &opts.budget)?;
    let mut decisions = vec![a.injective()?, a.surjective()?, a.nilpotent()?, a.eventually_periodic()?, a.periodic()?];
    if f.dim() == 1 {
        decisions.push(a.preinjective()?);
    }
    for d in &decisions {
        r.stats.shifts += d.stats.shifts;
        r.verdicts.push(VerdictEntry::from_decision(d, problem));
    }
    let class = budget_or(a.sensitivity_class(), |c| {
        Value::String(match c {
            SensitivityClass::Equicontinuous => "equicontinuous",
            SensitivityClass::Sensitive => "sensitive",
        }
        .into())
    })?;
    r.verdicts.push(VerdictEntry::new("sensitivity", class));
    for (property, mode) in [("non-transitive", MixingMode::Transitive), ("non-mixing", MixingMode::Mixing)] {
        let mut details = None;
        let v = budget_or(a.nonmixing(mode, max_side), |w| match w {
            NonMixing::Witness(s) => {
                details = Some(json!({ "trace window": s.cells() }));
                Value::Bool(true)
            }
            NonMixing::NoWitnessWithinBudget => {
                details = Some(json!({ "max side": max_side }));
                Value::String("no witness".into())
            }
        })?;
        let mut e = VerdictEntry::new(property, v);
        e.details = details;
        r.verdicts.push(e);
    }
    if opts.cross_check {
        let k = oracle_k(f.dim());
        for (property, t) in
            [("injective", TorusProperty::Injective), ("surjective", TorusProperty::Surjective), ("nilpotent", TorusProperty::Nilpotent)]
        {
            let o = oracle_decide(f, t, k);
            let engine = r.verdict(property).and_then(|v| v.verdict.as_bool());
            // the tori can only refute; an injective or nilpotent map stays so on every torus
            let agrees = match (engine, o.conclusive) {
                (Some(true), Some(false)) => false,
                (Some(true), _) if t != TorusProperty::Surjective => o.holds_on_tori,
                _ => true,
            };
            let mut e = bool_entry(&format!("oracle agrees: {property}"), agrees);
            e.details = Some(json!({ "k": k, "holds on tori": o.holds_on_tori, "conclusive": o.conclusive }));
            r.verdicts.push(e);
        }
    }
    Ok(())
}
