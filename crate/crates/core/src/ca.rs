//! Cellular automata on group shifts: space-time shifts, traces, limit sets and the
//! decision procedures built on them.

use std::cell::OnceCell;
use std::collections::HashSet;
use std::time::{Duration, Instant};

use crate::automaton::{DeBruijnAutomaton, Edge};
use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup};
use crate::language::{allowed_codes, is_subshift, member, shifts_equal, Budget, Membership};
use crate::maps::{image_shift, kernel, GroupShiftHom};
use crate::presentation::GroupShiftPresentation;
use crate::projection::project_general;
use crate::shape::{code_space, decode, lcm, Cell, Extents, Pattern, PeriodicConfiguration, Shape};

/// Longest chain of images followed before giving up on stabilization.
pub const MAX_TRANSIENT: usize = 64;

/// The shift containing only the identity configuration.
pub fn identity_shift(g: &FiniteGroup, dim: usize) -> GroupShiftPresentation {
    GroupShiftPresentation::from_allowed(g, vec![1; dim], vec![g.identity() as u64]).expect("single-cell window")
}

fn at_time(p: &Pattern, t: i64) -> Pattern {
    let entries = p.entries().map(|(c, v)| (c.iter().copied().chain([t]).collect(), v)).collect();
    Pattern::from_cells(p.group(), p.dim() + 1, entries).expect("distinct cells stay distinct")
}

fn require_verified_ca(f: &GroupShiftHom) -> Result<()> {
    if !f.is_verified() {
        return Err(Error::Invalid("map has not been verified".into()));
    }
    if !f.is_ca() {
        return Err(Error::Invalid("map does not preserve the alphabet".into()));
    }
    Ok(())
}

/// All orbits of `F` stacked along a new last axis: every row lies in the domain and each
/// row is the image of the one below it.
pub fn spacetime_shift(f: &GroupShiftHom) -> Result<GroupShiftPresentation> {
    require_verified_ca(f)?;
    let x = f.domain();
    let g = x.group();
    let d = x.dim();
    let mut forbidden: Vec<Pattern> = x.forbidden_patterns().iter().map(|p| at_time(p, 0)).collect();
    let nbhd = f.neighborhood();
    let origin: Cell = vec![0; d];
    for (code, value) in f.entries() {
        let q = decode(g.order(), code, nbhd.len());
        for a in g.elements().filter(|&a| a != value) {
            let mut entries: Vec<(Cell, Elem)> = nbhd.cells().iter().cloned().map(|c| c.into_iter().chain([0]).collect()).zip(q.iter().copied()).collect();
            entries.push((origin.iter().copied().chain([1]).collect(), a));
            forbidden.push(Pattern::from_cells(g, d + 1, entries)?);
        }
    }
    GroupShiftPresentation::from_forbidden(g, d + 1, &forbidden)
}

/// Number of update-error patterns in the space-time presentation.
pub fn update_error_count(f: &GroupShiftHom) -> usize {
    f.entries().count() * (f.domain().group().order() - 1)
}

/// The one-dimensional shift over `G^D` of the states seen in `D` along orbits.
pub fn trace_shift(f: &GroupShiftHom, domain: &Shape, budget: &Budget) -> Result<GroupShiftPresentation> {
    let st = spacetime_shift(f)?;
    project_general(&st, 1, domain, budget)
}

/// Limit set as the time-zero rows of the space-time shift.
pub fn limit_set_projection(f: &GroupShiftHom, budget: &Budget) -> Result<GroupShiftPresentation> {
    let st = spacetime_shift(f)?;
    let d = f.dim();
    // time becomes the first axis, sliced with width one
    let perm: Vec<usize> = std::iter::once(d).chain(0..d).collect();
    let st = st.permute_axes(&perm)?;
    project_general(&st, d, &Shape::new(1, vec![vec![0]])?, budget)
}

/// The chain `X ⊋ F(X) ⊋ … ⊋ F^k(X) = F^{k+1}(X)`.
#[derive(Clone, Debug)]
pub struct Transient {
    pub k: usize,
    pub chain: Vec<GroupShiftPresentation>,
}

impl Transient {
    pub fn limit(&self) -> &GroupShiftPresentation {
        &self.chain[self.k]
    }

    /// `F(X)`, which is the limit itself when `k = 0`.
    pub fn image(&self) -> &GroupShiftPresentation {
        &self.chain[self.k.min(1)]
    }
}

/// Least `k` with `F^{k+1}(X) = F^k(X)`, by iterating images.
pub fn transient_length(f: &GroupShiftHom, budget: &Budget) -> Result<Transient> {
    require_verified_ca(f)?;
    let mut chain = vec![f.domain().clone()];
    for k in 0..MAX_TRANSIENT {
        let next = image_shift(f, &chain[k], budget)?;
        // images only shrink, so one inclusion decides equality
        if is_subshift(&chain[k], &next, budget)? {
            return Ok(Transient { k, chain });
        }
        chain.push(next);
    }
    Err(Error::BudgetExceeded(format!("images not stable after {MAX_TRANSIENT} steps")))
}

/// Which construction produced a limit set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Projection of the space-time shift.
    Projection,
    /// Iterated images until they stabilize.
    Iteration,
}

#[derive(Clone, Debug)]
pub struct LimitSet {
    pub shift: GroupShiftPresentation,
    pub route: Route,
    /// Whether the other route was also completed and agreed.
    pub cross_checked: Option<bool>,
}

/// Limit set by projection, falling back to iterated images when the projection exceeds
/// the budget; the other route is attempted as a cross-check.
pub fn limit_set(f: &GroupShiftHom, budget: &Budget) -> Result<LimitSet> {
    let proj = limit_set_projection(f, budget);
    let iter = transient_length(f, budget);
    combine_routes(proj, iter.map(|t| t.limit().clone()), budget)
}

fn combine_routes(
    proj: Result<GroupShiftPresentation>,
    iter: Result<GroupShiftPresentation>,
    budget: &Budget,
) -> Result<LimitSet> {
    match (proj, iter) {
        (Ok(a), Ok(b)) => {
            if !shifts_equal(&a, &b, budget)? {
                return Err(Error::Inconsistent("limit set routes disagree".into()));
            }
            Ok(LimitSet { shift: a, route: Route::Projection, cross_checked: Some(true) })
        }
        (Ok(a), Err(e)) if e.is_budget() => Ok(LimitSet { shift: a, route: Route::Projection, cross_checked: None }),
        (Err(e), Ok(b)) if e.is_budget() => Ok(LimitSet { shift: b, route: Route::Iteration, cross_checked: None }),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    True,
    False,
    BudgetExceeded,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Verdict::True => Some(true),
            Verdict::False => Some(false),
            Verdict::BudgetExceeded => None,
        }
    }
}

/// Evidence attached to a verdict; see [`check_certificate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Pattern(Pattern),
    /// The configuration equal to the pattern on its cells and to the identity elsewhere.
    Finite(Pattern),
    Configuration(PeriodicConfiguration),
    /// A space-time torus whose rows form a periodic orbit.
    Orbit(PeriodicConfiguration),
    /// A computed shift, for verdicts established by comparison.
    Shift(GroupShiftPresentation),
    /// Number of steps after which the map is constant.
    Index(usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub wall: Duration,
    /// Presentations built along the way.
    pub shifts: usize,
}

#[derive(Clone, Debug)]
pub struct DecisionReport {
    pub property: String,
    pub verdict: Verdict,
    pub certificate: Option<Certificate>,
    pub route: Option<Route>,
    /// Preperiod and period, for eventual periodicity.
    pub period: Option<(usize, usize)>,
    pub stats: Stats,
}

impl DecisionReport {
    fn new(property: &str, verdict: Verdict) -> Self {
        DecisionReport { property: property.into(), verdict, certificate: None, route: None, period: None, stats: Stats::default() }
    }

    fn budget(property: &str) -> Self {
        Self::new(property, Verdict::BudgetExceeded)
    }
}

/// Equicontinuity versus sensitivity; every group automaton is exactly one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SensitivityClass {
    Equicontinuous,
    Sensitive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixingMode {
    Transitive,
    Mixing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonMixing {
    /// A shape whose trace is not transitive (or not mixing).
    Witness(Shape),
    NoWitnessWithinBudget,
}

fn shared<T: Clone>(cell: &OnceCell<Result<T>>, init: impl FnOnce() -> Result<T>) -> Result<&T> {
    cell.get_or_init(init).as_ref().map_err(Clone::clone)
}

fn decide(property: &str, body: impl FnOnce(&mut DecisionReport) -> Result<Verdict>) -> Result<DecisionReport> {
    let start = Instant::now();
    let mut r = DecisionReport::new(property, Verdict::BudgetExceeded);
    match body(&mut r) {
        Ok(v) => r.verdict = v,
        Err(e) if e.is_budget() => {
            r = DecisionReport::budget(property);
        }
        Err(e) => return Err(e),
    }
    r.stats.wall = start.elapsed();
    Ok(r)
}

/// A periodic non-identity point of a nontrivial group shift.
fn nonidentity_point(x: &GroupShiftPresentation, budget: &Budget) -> Result<Option<PeriodicConfiguration>> {
    let g = x.group();
    let cell = Shape::new(x.dim(), vec![vec![0; x.dim()]])?;
    let Some(a) = allowed_codes(x, &cell, budget)?.into_iter().find(|&c| c as Elem != g.identity()) else {
        return Ok(None);
    };
    let p = Pattern::new(g, cell, vec![a as Elem])?;
    match member(&p, x, budget)? {
        Membership::Yes(Some(c)) => Ok(Some(c)),
        _ => Err(Error::Inconsistent(format!("allowed symbol {} has no periodic point", g.label(a as Elem)))),
    }
}

/// A box pattern in the language of `x` but not of `y`, on the smallest box tried.
pub fn missing_pattern(x: &GroupShiftPresentation, y: &GroupShiftPresentation, budget: &Budget) -> Result<Option<Pattern>> {
    let d = x.dim();
    let top = y.window().iter().chain(x.window()).copied().max().unwrap_or(1);
    for side in 1..=top {
        let ext: Vec<usize> = y.window().iter().map(|&w| w.min(side)).collect();
        let shape = Shape::boxed(&vec![0; d], &ext);
        let mut theirs = allowed_codes(y, &shape, budget)?;
        theirs.sort_unstable();
        if let Some(c) = allowed_codes(x, &shape, budget)?.into_iter().find(|c| theirs.binary_search(c).is_err()) {
            return Ok(Some(Pattern::new(x.group(), shape.clone(), decode(x.group().order(), c, shape.len()))?));
        }
    }
    Ok(None)
}

/// Runs the deciders on one automaton, sharing the shifts they have in common.
pub struct Analysis<'a> {
    f: &'a GroupShiftHom,
    budget: Budget,
    kernel: OnceCell<Result<GroupShiftPresentation>>,
    transient: OnceCell<Result<Transient>>,
    limit: OnceCell<Result<LimitSet>>,
    trace: OnceCell<Result<GroupShiftPresentation>>,
}

impl<'a> Analysis<'a> {
    pub fn new(f: &'a GroupShiftHom, budget: &Budget) -> Result<Self> {
        require_verified_ca(f)?;
        Ok(Analysis {
            f,
            budget: *budget,
            kernel: OnceCell::new(),
            transient: OnceCell::new(),
            limit: OnceCell::new(),
            trace: OnceCell::new(),
        })
    }

    fn trivial(&self) -> GroupShiftPresentation {
        identity_shift(self.f.domain().group(), self.f.dim())
    }

    pub fn kernel(&self) -> Result<&GroupShiftPresentation> {
        shared(&self.kernel, || kernel(self.f))
    }

    pub fn transient(&self) -> Result<&Transient> {
        shared(&self.transient, || transient_length(self.f, &self.budget))
    }

    pub fn limit_set(&self) -> Result<&LimitSet> {
        shared(&self.limit, || {
            let proj = limit_set_projection(self.f, &self.budget);
            let iter = self.transient().map(|t| t.limit().clone());
            combine_routes(proj, iter, &self.budget)
        })
    }

    /// The trace at the origin.
    pub fn trace(&self) -> Result<&GroupShiftPresentation> {
        shared(&self.trace, || {
            let d = self.f.dim();
            trace_shift(self.f, &Shape::new(d, vec![vec![0; d]])?, &self.budget)
        })
    }

    /// Injective exactly when the kernel is trivial.
    pub fn injective(&self) -> Result<DecisionReport> {
        decide("injective", |r| {
            let k = self.kernel()?;
            r.stats.shifts = 1;
            if is_subshift(k, &self.trivial(), &self.budget)? {
                r.certificate = Some(Certificate::Shift(k.clone()));
                return Ok(Verdict::True);
            }
            let c = nonidentity_point(k, &self.budget)?.ok_or_else(|| Error::Inconsistent("kernel has no symbol".into()))?;
            r.certificate = Some(Certificate::Configuration(c));
            Ok(Verdict::False)
        })
    }

    /// Surjective exactly when the limit set is the whole shift.
    pub fn surjective(&self) -> Result<DecisionReport> {
        decide("surjective", |r| {
            let x = self.f.domain();
            let l = self.limit_set()?;
            r.route = Some(l.route);
            r.stats.shifts = 2;
            if is_subshift(x, &l.shift, &self.budget)? {
                r.certificate = Some(Certificate::Shift(l.shift.clone()));
                return Ok(Verdict::True);
            }
            // a pattern missing from F(X) is missing from the limit set as well
            let image = match self.transient() {
                Ok(t) => t.image(),
                Err(e) if e.is_budget() => &l.shift,
                Err(e) => return Err(e),
            };
            let p = missing_pattern(x, image, &self.budget)?
                .ok_or_else(|| Error::Inconsistent("image differs from the shift but no pattern is missing".into()))?;
            r.certificate = Some(Certificate::Pattern(p));
            Ok(Verdict::False)
        })
    }

    /// Nilpotent exactly when the limit set is the identity configuration alone.
    pub fn nilpotent(&self) -> Result<DecisionReport> {
        decide("nilpotent", |r| {
            let l = self.limit_set()?;
            r.route = Some(l.route);
            r.stats.shifts = 1;
            if is_subshift(&l.shift, &self.trivial(), &self.budget)? {
                match self.transient() {
                    Ok(t) => r.certificate = Some(Certificate::Index(t.k)),
                    Err(e) if e.is_budget() => {}
                    Err(e) => return Err(e),
                }
                return Ok(Verdict::True);
            }
            let c = nonidentity_point(&l.shift, &self.budget)?.ok_or_else(|| Error::Inconsistent("limit set has no symbol".into()))?;
            let cell = Shape::new(self.f.dim(), vec![vec![0; self.f.dim()]])?;
            let p = c.pattern(&cell);
            r.certificate = Some(match jointly_periodic_sample(self.f, &p, &self.budget) {
                Ok(orbit) => Certificate::Orbit(orbit),
                Err(e) if e.is_budget() => Certificate::Pattern(p),
                Err(e) => return Err(e),
            });
            Ok(Verdict::False)
        })
    }

    /// Eventually periodic exactly when the trace at the origin is finite; the preperiod is
    /// the transient length and the period the least common multiple of the trace cycles.
    pub fn eventually_periodic(&self) -> Result<DecisionReport> {
        decide("eventually periodic", |r| {
            let t = DeBruijnAutomaton::build(self.trace()?)?;
            r.stats.shifts = 1;
            let Some(cycles) = t.cycle_lengths() else {
                return Ok(Verdict::False);
            };
            let p = cycles.into_iter().fold(1, lcm);
            match self.transient() {
                Ok(tr) => r.period = Some((tr.k, p)),
                Err(e) if e.is_budget() => {}
                Err(e) => return Err(e),
            }
            Ok(Verdict::True)
        })
    }

    /// Periodic exactly when injective and eventually periodic.
    pub fn periodic(&self) -> Result<DecisionReport> {
        let inj = self.injective()?;
        let ep = self.eventually_periodic()?;
        let mut r = DecisionReport::new("periodic", Verdict::BudgetExceeded);
        r.stats.wall = inj.stats.wall + ep.stats.wall;
        r.period = ep.period;
        r.verdict = match (inj.verdict, ep.verdict) {
            (Verdict::True, Verdict::True) => Verdict::True,
            (Verdict::False, _) => {
                r.certificate = inj.certificate;
                Verdict::False
            }
            (_, Verdict::False) => Verdict::False,
            _ => Verdict::BudgetExceeded,
        };
        Ok(r)
    }

    pub fn sensitivity_class(&self) -> Result<SensitivityClass> {
        match self.eventually_periodic()?.verdict {
            Verdict::True => Ok(SensitivityClass::Equicontinuous),
            Verdict::False => Ok(SensitivityClass::Sensitive),
            Verdict::BudgetExceeded => Err(Error::BudgetExceeded("trace finiteness undecided".into())),
        }
    }

    /// Not pre-injective exactly when some kernel configuration other than the identity
    /// is asymptotic to it, i.e. the kernel automaton leaves the identity state along a
    /// non-identity edge and comes back.
    pub fn preinjective(&self) -> Result<DecisionReport> {
        if self.f.dim() != 1 {
            return Err(Error::NotOneDimensional);
        }
        decide("pre-injective", |r| {
            let k = self.kernel()?;
            let ell = k.window()[0].max(2);
            let a = DeBruijnAutomaton::build(&k.normalize_to(&[ell])?)?;
            r.stats.shifts = 1;
            let g = k.group();
            let id = g.identity();
            let plain = |e: usize| (0..ell).all(|i| a.symbol(e, i) == id);
            let s0 = (0..a.num_edges())
                .find(|&e| plain(e))
                .map(|e| a.edges()[e].src)
                .ok_or_else(|| Error::Inconsistent("kernel misses the identity".into()))?;
            for e in (0..a.num_edges()).filter(|&e| !plain(e)) {
                let Edge { src, dst, .. } = a.edges()[e];
                let (Some(there), Some(back)) = (a.connect(s0, src), a.connect(dst, s0)) else {
                    continue;
                };
                let path: Vec<usize> = there.into_iter().chain([e]).chain(back).collect();
                let mut word = vec![id; ell - 1];
                word.extend(path.iter().map(|&e| a.symbol(e, ell - 1)));
                r.certificate = Some(Certificate::Finite(Pattern::word(g, 0, &word)));
                return Ok(Verdict::False);
            }
            Ok(Verdict::True)
        })
    }

    /// Looks for a box whose trace is not transitive (or not mixing), over boxes of side up
    /// to `max_side`.
    pub fn nonmixing(&self, mode: MixingMode, max_side: usize) -> Result<NonMixing> {
        let d = self.f.dim();
        for side in 1..=max_side {
            let shape = Shape::boxed(&vec![0; d], &vec![side; d]);
            let tr = trace_shift(self.f, &shape, &self.budget)?;
            let class = DeBruijnAutomaton::build(&tr)?.mixing_class();
            let holds = match mode {
                MixingMode::Transitive => class.transitive,
                MixingMode::Mixing => class.mixing,
            };
            if !holds {
                return Ok(NonMixing::Witness(shape));
            }
        }
        Ok(NonMixing::NoWitnessWithinBudget)
    }
}

pub fn decide_injective(f: &GroupShiftHom, budget: &Budget) -> Result<DecisionReport> {
    Analysis::new(f, budget)?.injective()
}

pub fn decide_surjective(f: &GroupShiftHom, budget: &Budget) -> Result<DecisionReport> {
    Analysis::new(f, budget)?.surjective()
}

pub fn decide_nilpotent(f: &GroupShiftHom, budget: &Budget) -> Result<DecisionReport> {
    Analysis::new(f, budget)?.nilpotent()
}

pub fn decide_eventual_periodicity(f: &GroupShiftHom, budget: &Budget) -> Result<DecisionReport> {
    Analysis::new(f, budget)?.eventually_periodic()
}

pub fn decide_periodic(f: &GroupShiftHom, budget: &Budget) -> Result<DecisionReport> {
    Analysis::new(f, budget)?.periodic()
}

pub fn decide_sensitivity_class(f: &GroupShiftHom, budget: &Budget) -> Result<SensitivityClass> {
    Analysis::new(f, budget)?.sensitivity_class()
}

pub fn decide_preinjective_1d(f: &GroupShiftHom, budget: &Budget) -> Result<DecisionReport> {
    Analysis::new(f, budget)?.preinjective()
}

pub fn semidecide_nonmixing(f: &GroupShiftHom, mode: MixingMode, max_side: usize, budget: &Budget) -> Result<NonMixing> {
    Analysis::new(f, budget)?.nonmixing(mode, max_side)
}

/// A space-time torus (spatially periodic, temporally periodic) whose time-zero row
/// contains `p`.
pub fn jointly_periodic_sample(f: &GroupShiftHom, p: &Pattern, budget: &Budget) -> Result<PeriodicConfiguration> {
    let st = spacetime_shift(f)?;
    if p.shape().is_empty() {
        return Ok(PeriodicConfiguration::uniform(p.group(), p.dim() + 1, p.group().identity()));
    }
    if let Some(c) = periodic_orbit_through(f, p, budget) {
        return Ok(c);
    }
    match member(&at_time(p, 0), &st, budget)? {
        Membership::Yes(Some(c)) => Ok(c),
        Membership::Yes(None) => Err(Error::Inconsistent("membership found no torus".into())),
        Membership::No(_) => Err(Error::Invalid(format!("{} is not in the limit set", p.describe()))),
    }
}

/// Searches cubic spatial tori of small volume. On the eventual image of `F` over a torus
/// `F` is bijective, so every point there is temporally periodic.
fn periodic_orbit_through(f: &GroupShiftHom, p: &Pattern, budget: &Budget) -> Option<PeriodicConfiguration> {
    let x = f.domain();
    let g = x.group();
    let d = x.dim();
    let reach = p.shape().bounding_extents().into_iter().max().unwrap_or(1);
    let mut work = 0u64;
    for side in reach..=budget.max_period.max(reach) {
        let periods = vec![side; d];
        let vol = periods.iter().product::<usize>();
        let count = match code_space(g.order(), vol) {
            Some(n) if work + n <= budget.max_steps => n,
            _ => return None,
        };
        work += count;
        let mut level: HashSet<Vec<Elem>> = (0..count)
            .map(|code| PeriodicConfiguration::new(g, periods.clone(), decode(g.order(), code, vol)).expect("torus fits"))
            .filter(|c| x.torus_member(c))
            .map(|c| c.fundamental().to_vec())
            .collect();
        loop {
            let next: HashSet<Vec<Elem>> = level
                .iter()
                .filter_map(|v| {
                    let c = PeriodicConfiguration::new(g, periods.clone(), v.clone()).ok()?;
                    f.apply_periodic(&c).ok().map(|c| c.fundamental().to_vec())
                })
                .collect();
            work += level.len() as u64;
            let stable = next.len() == level.len();
            level = next;
            if stable || work > budget.max_steps {
                break;
            }
        }
        let torus = Extents::new(periods.clone());
        for v in &level {
            let c = PeriodicConfiguration::new(g, periods.clone(), v.clone()).expect("torus fits");
            let Some(t) = torus.cells().find(|t| {
                p.entries().all(|(cell, a)| c.get(&cell.iter().zip(t).map(|(u, w)| u + w).collect::<Cell>()) == a)
            }) else {
                continue;
            };
            let start = c.translate(&t);
            let mut rows = vec![start.clone()];
            loop {
                let next = f.apply_periodic(rows.last().expect("nonempty")).ok()?;
                if next == start {
                    break;
                }
                if rows.len() > level.len() {
                    return None;
                }
                rows.push(next);
            }
            let steps = rows.len();
            let vals = torus.cells().flat_map(|u| rows.iter().map(move |r| r.get(&u))).collect();
            let mut st_periods = periods.clone();
            st_periods.push(steps);
            return PeriodicConfiguration::new(g, st_periods, vals).ok();
        }
    }
    None
}

/// Row `t` of a space-time configuration, as a configuration of one dimension less.
pub fn time_slice(st: &PeriodicConfiguration, t: i64) -> PeriodicConfiguration {
    let d = st.dim() - 1;
    let periods = st.periods()[..d].to_vec();
    let vals = crate::shape::Extents::new(periods.clone())
        .cells()
        .map(|c| st.get(&c.into_iter().chain([t]).collect::<Cell>()))
        .collect();
    PeriodicConfiguration::new(st.group(), periods, vals).expect("periods are positive")
}

fn iterate(f: &GroupShiftHom, p: &Pattern, k: usize) -> Option<Pattern> {
    let mut q = p.clone();
    for _ in 0..k {
        q = f.apply_pattern(&q)?;
    }
    Some(q)
}

/// Applies `test` to generators of the allowed patterns on a box around the origin large
/// enough for `k` steps; a test respecting products then holds on all of them.
fn on_generators(f: &GroupShiftHom, k: usize, budget: &Budget, mut test: impl FnMut(&Pattern) -> bool) -> Result<bool> {
    let x = f.domain();
    let g = x.group();
    let (lo, hi) = f.neighborhood().bounds().expect("neighbourhood is nonempty");
    let k = k as i64;
    let from: Cell = lo.iter().map(|&a| (a * k).min(0)).collect();
    let ext: Vec<usize> = hi.iter().zip(&from).map(|(&b, &a)| ((b * k).max(0) - a + 1) as usize).collect();
    let shape = Shape::boxed(&from, &ext);
    let ar = crate::language::CodeArith::new(g, shape.len());
    let space = crate::shape::code_space(g.order(), shape.len()).expect("checked by allowed_codes");
    let codes = allowed_codes(x, &shape, budget)?;
    let mut sub = crate::language::CodeSubgroup::new(&ar, space);
    for c in codes {
        if sub.contains(c) {
            continue;
        }
        sub.add(c);
        if !test(&Pattern::new(g, shape.clone(), decode(g.order(), c, shape.len()))?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True when `F^a = F^b` on the domain.
pub fn powers_agree(f: &GroupShiftHom, a: usize, b: usize, budget: &Budget) -> Result<bool> {
    let origin: Cell = vec![0; f.dim()];
    on_generators(f, a.max(b), budget, |p| {
        let va = iterate(f, p, a).and_then(|q| q.get(&origin));
        let vb = iterate(f, p, b).and_then(|q| q.get(&origin));
        va.is_some() && va == vb
    })
}

/// True when `F^k` maps everything to the identity.
pub fn power_is_trivial(f: &GroupShiftHom, k: usize, budget: &Budget) -> Result<bool> {
    let origin: Cell = vec![0; f.dim()];
    let id = f.domain().group().identity();
    on_generators(f, k, budget, |p| iterate(f, p, k).and_then(|q| q.get(&origin)) == Some(id))
}

/// Checks a certificate without the construction that produced it.
pub fn check_certificate(
    f: &GroupShiftHom,
    property: &str,
    verdict: Verdict,
    cert: &Certificate,
    budget: &Budget,
) -> Result<bool> {
    let x = f.domain();
    let g = x.group();
    Ok(match (property, verdict, cert) {
        ("injective" | "periodic", Verdict::False, Certificate::Configuration(c)) => {
            !c.is_identity() && x.torus_member(c) && f.apply_periodic(c)?.is_identity()
        }
        ("injective", Verdict::True, Certificate::Shift(k)) => {
            shifts_equal(k, &identity_shift(g, f.dim()), budget)? && shifts_equal(k, &kernel(f)?, budget)?
        }
        ("surjective", Verdict::False, Certificate::Pattern(p)) => {
            member(p, x, budget)?.is_member() && !member(p, &image_shift(f, x, budget)?, budget)?.is_member()
        }
        ("surjective", Verdict::True, Certificate::Shift(l)) => {
            shifts_equal(l, x, budget)? && is_subshift(x, &image_shift(f, x, budget)?, budget)?
        }
        ("nilpotent", Verdict::True, Certificate::Index(k)) => power_is_trivial(f, *k, budget)?,
        ("nilpotent", Verdict::False, Certificate::Orbit(st)) => {
            let rows: Vec<PeriodicConfiguration> = (0..=st.periods()[f.dim()] as i64).map(|t| time_slice(st, t)).collect();
            !rows[0].is_identity()
                && x.torus_member(&rows[0])
                && rows.windows(2).all(|w| f.apply_periodic(&w[0]).is_ok_and(|n| n == w[1]))
        }
        ("nilpotent", Verdict::False, Certificate::Pattern(p)) => {
            !p.is_identity() && member(p, &limit_set(f, budget)?.shift, budget)?.is_member()
        }
        ("pre-injective", Verdict::False, Certificate::Finite(p)) => {
            let pad = x.window()[0].max(f.span()[0] + 1) as i64;
            let (lo, hi) = p.shape().bounds().expect("nonempty certificate");
            let word: Vec<Elem> = (lo[0] - pad..=hi[0] + pad).map(|u| p.get(&[u]).unwrap_or(g.identity())).collect();
            let wide = Pattern::word(g, lo[0] - pad, &word);
            !p.is_identity()
                && x.locally_admissible(&wide)
                && f.apply_pattern(&wide).is_some_and(|q| q.is_identity())
        }
        _ => false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyMethod {
    /// Perron eigenvalue of the automaton by power iteration.
    Spectral,
    /// Growth of the last two block counts, when power iteration did not settle.
    BlockGrowth,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    /// Natural logarithm units.
    pub value: f64,
    /// Number of words of length `1..=8`.
    pub block_counts: Vec<u128>,
    pub method: EntropyMethod,
}

const BLOCK_COUNTS: usize = 8;
const POWER_ITERATIONS: usize = 1_000_000;

fn block_counts(a: &DeBruijnAutomaton, up_to: usize) -> Vec<u128> {
    let l = a.word_length();
    let order = a.group().order() as u64;
    let mut out = Vec::with_capacity(up_to);
    for n in 1..=up_to.min(l) {
        let div = order.pow((l - n) as u32);
        let mut prefixes: Vec<u64> = a.edges().iter().map(|e| e.code / div).collect();
        prefixes.sort_unstable();
        prefixes.dedup();
        out.push(prefixes.len() as u128);
    }
    // longer words are paths of edges
    let mut ending = vec![0u128; a.num_states()];
    for e in a.edges() {
        ending[e.dst] += 1;
    }
    for _ in l + 1..=up_to {
        let mut next = vec![0u128; a.num_states()];
        for e in a.edges() {
            next[e.dst] += ending[e.src];
        }
        ending = next;
        out.push(ending.iter().sum());
    }
    out
}

/// Topological entropy of a one-dimensional shift.
pub fn entropy_1d(x: &GroupShiftPresentation, tolerance: f64) -> Result<EntropyEstimate> {
    if x.dim() != 1 {
        return Err(Error::NotOneDimensional);
    }
    let a = DeBruijnAutomaton::build(x)?;
    if a.is_empty() {
        return Err(Error::EmptyAutomaton);
    }
    let counts = block_counts(&a, BLOCK_COUNTS);
    let m = a.num_states();
    // iterate with A + I, which has the same Perron vector and no rotating peripheral part
    let mut v = vec![1.0 / m as f64; m];
    let mut prev = f64::NAN;
    let mut settled = None;
    for i in 0..POWER_ITERATIONS {
        let mut w = v.clone();
        for e in a.edges() {
            w[e.dst] += v[e.src];
        }
        let mu: f64 = w.iter().sum();
        w.iter_mut().for_each(|y| *y /= mu);
        v = w;
        if i >= 16 && (mu - prev).abs() <= tolerance * 1e-3 * mu {
            settled = Some(mu - 1.0);
            break;
        }
        prev = mu;
    }
    let (value, method) = match settled {
        Some(lambda) => (lambda.max(1.0).ln(), EntropyMethod::Spectral),
        None => {
            let n = counts.len();
            ((counts[n - 1] as f64 / counts[n - 2] as f64).ln().max(0.0), EntropyMethod::BlockGrowth)
        }
    };
    Ok(EntropyEstimate { value, block_counts: counts, method })
}

/// The entropy addition formula and the Moore implication on one automaton.
#[derive(Clone, Debug, PartialEq)]
pub struct GoeReport {
    pub h_domain: f64,
    pub h_image: f64,
    pub h_kernel: f64,
    pub addition_error: f64,
    pub addition_holds: bool,
    pub surjective: Verdict,
    pub preinjective: Verdict,
    /// Surjective implies pre-injective on this instance.
    pub moore_holds: bool,
}

pub fn goe_entropy_check(f: &GroupShiftHom, tolerance: f64, budget: &Budget) -> Result<GoeReport> {
    if f.dim() != 1 {
        return Err(Error::NotOneDimensional);
    }
    let an = Analysis::new(f, budget)?;
    let x = f.domain();
    let h_domain = entropy_1d(x, tolerance)?.value;
    let image = image_shift(f, x, budget)?;
    let h_image = entropy_1d(&image, tolerance)?.value;
    let h_kernel = entropy_1d(an.kernel()?, tolerance)?.value;
    let addition_error = (h_domain - h_image - h_kernel).abs();
    // onto exactly when the image already contains the domain
    let surjective = Verdict::from_bool(is_subshift(x, &image, budget)?);
    let preinjective = an.preinjective()?.verdict;
    Ok(GoeReport {
        h_domain,
        h_image,
        h_kernel,
        addition_error,
        addition_holds: addition_error < tolerance,
        surjective,
        preinjective,
        moore_holds: surjective != Verdict::True || preinjective == Verdict::True,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn b() -> Budget {
        Budget::default()
    }

    fn z(n: usize) -> FiniteGroup {
        FiniteGroup::cyclic(n)
    }

    fn origin() -> Shape {
        Shape::new(1, vec![vec![0]]).unwrap()
    }

    fn eq(a: &GroupShiftPresentation, c: &GroupShiftPresentation) -> bool {
        shifts_equal(a, c, &b()).unwrap()
    }

    fn full(n: usize) -> GroupShiftPresentation {
        GroupShiftPresentation::full(&z(n), 1)
    }

    fn checked(f: &GroupShiftHom, r: &DecisionReport) -> bool {
        let c = r.certificate.as_ref().expect("certificate");
        check_certificate(f, &r.property, r.verdict, c, &b()).unwrap()
    }

    #[test]
    fn spacetime_presentations() {
        assert_eq!(update_error_count(&zoo::xor()), 4);
        let st = spacetime_shift(&zoo::identity()).unwrap();
        let g = z(2);
        let rise = Pattern::from_cells(&g, 2, vec![(vec![0, 0], 0), (vec![0, 1], 1)]).unwrap();
        assert!(!member(&rise, &st, &b()).unwrap().is_member());
        let flat = Pattern::from_cells(&g, 2, vec![(vec![0, 0], 1), (vec![0, 1], 1), (vec![1, 0], 0)]).unwrap();
        assert!(member(&flat, &st, &b()).unwrap().is_member());
        // a one in the two-point example has no preimage, so no orbit passes through it
        let st = spacetime_shift(&zoo::two_point_collapse()).unwrap();
        let one = Pattern::from_cells(&g, 2, vec![(vec![0, 0], 1)]).unwrap();
        assert!(!member(&one, &st, &b()).unwrap().is_member());
    }

    #[test]
    fn traces_at_the_origin() {
        assert!(eq(&trace_shift(&zoo::shift_map(), &origin(), &b()).unwrap(), &full(2)));
        assert!(eq(&trace_shift(&zoo::identity(), &origin(), &b()).unwrap(), &zoo::two_point()));
        assert!(eq(&trace_shift(&zoo::xor(), &origin(), &b()).unwrap(), &full(2)));
    }

    #[test]
    fn limit_sets_and_transients() {
        let zero2 = identity_shift(&z(2), 1);
        let l = limit_set(&zoo::xor(), &b()).unwrap();
        assert!(eq(&l.shift, &full(2)));
        assert_eq!(l.cross_checked, Some(true));
        assert!(eq(&limit_set(&zoo::two_point_collapse(), &b()).unwrap().shift, &zero2));
        assert!(eq(&limit_set(&zoo::doubling(), &b()).unwrap().shift, &identity_shift(&z(4), 1)));
        assert_eq!(transient_length(&zoo::identity(), &b()).unwrap().k, 0);
        assert_eq!(transient_length(&zoo::two_point_collapse(), &b()).unwrap().k, 1);
        let t = transient_length(&zoo::doubling(), &b()).unwrap();
        assert_eq!(t.k, 2);
        let evens = GroupShiftPresentation::from_allowed(&z(4), vec![1], vec![0, 2]).unwrap();
        assert!(eq(&t.chain[1], &evens));
    }

    #[test]
    fn injectivity() {
        let f = zoo::shift_map();
        let r = decide_injective(&f, &b()).unwrap();
        assert_eq!(r.verdict, Verdict::True);
        assert!(checked(&f, &r));
        for f in [zoo::xor(), zoo::two_point_collapse()] {
            let r = decide_injective(&f, &b()).unwrap();
            assert_eq!(r.verdict, Verdict::False);
            assert_eq!(r.certificate, Some(Certificate::Configuration(PeriodicConfiguration::uniform(&z(2), 1, 1))));
            assert!(checked(&f, &r));
        }
    }

    #[test]
    fn surjectivity() {
        for f in [zoo::xor(), zoo::identity()] {
            let r = decide_surjective(&f, &b()).unwrap();
            assert_eq!(r.verdict, Verdict::True);
            assert!(checked(&f, &r));
        }
        let f = zoo::two_point_collapse();
        let r = decide_surjective(&f, &b()).unwrap();
        assert_eq!(r.verdict, Verdict::False);
        assert_eq!(r.certificate, Some(Certificate::Pattern(Pattern::word(&z(2), 0, &[1]))));
        assert!(checked(&f, &r));
    }

    #[test]
    fn nilpotency() {
        let f = zoo::annihilator();
        let r = decide_nilpotent(&f, &b()).unwrap();
        assert_eq!((r.verdict, r.certificate.clone()), (Verdict::True, Some(Certificate::Index(1))));
        assert!(checked(&f, &r));
        let f = zoo::doubling();
        let r = decide_nilpotent(&f, &b()).unwrap();
        assert_eq!((r.verdict, r.certificate.clone()), (Verdict::True, Some(Certificate::Index(2))));
        assert!(checked(&f, &r));
        assert!(!power_is_trivial(&f, 1, &b()).unwrap());
        let f = zoo::xor();
        let r = decide_nilpotent(&f, &b()).unwrap();
        assert_eq!(r.verdict, Verdict::False);
        assert!(matches!(r.certificate, Some(Certificate::Orbit(_))));
        assert!(checked(&f, &r));
    }

    #[test]
    fn eventual_periodicity() {
        let r = decide_eventual_periodicity(&zoo::identity(), &b()).unwrap();
        assert_eq!((r.verdict, r.period), (Verdict::True, Some((0, 1))));
        assert_eq!(decide_periodic(&zoo::identity(), &b()).unwrap().verdict, Verdict::True);
        let f = zoo::two_point_collapse();
        let r = decide_eventual_periodicity(&f, &b()).unwrap();
        assert_eq!((r.verdict, r.period), (Verdict::True, Some((1, 1))));
        assert!(powers_agree(&f, 2, 1, &b()).unwrap());
        assert_eq!(decide_periodic(&f, &b()).unwrap().verdict, Verdict::False);
        assert_eq!(decide_eventual_periodicity(&zoo::xor(), &b()).unwrap().verdict, Verdict::False);
    }

    #[test]
    fn sensitivity() {
        use SensitivityClass::*;
        assert_eq!(decide_sensitivity_class(&zoo::identity(), &b()).unwrap(), Equicontinuous);
        assert_eq!(decide_sensitivity_class(&zoo::shift_map(), &b()).unwrap(), Sensitive);
        assert_eq!(decide_sensitivity_class(&zoo::doubling(), &b()).unwrap(), Equicontinuous);
    }

    #[test]
    fn preinjectivity() {
        let f = zoo::annihilator();
        let r = decide_preinjective_1d(&f, &b()).unwrap();
        assert_eq!(r.verdict, Verdict::False);
        let Some(Certificate::Finite(p)) = &r.certificate else { panic!("finite certificate expected") };
        assert_eq!(p.values().iter().filter(|&&v| v != 0).count(), 1);
        assert!(checked(&f, &r));
        for f in [zoo::two_point_collapse(), zoo::xor3()] {
            assert_eq!(decide_preinjective_1d(&f, &b()).unwrap().verdict, Verdict::True);
        }
    }

    #[test]
    fn nontransitive_traces() {
        let f = zoo::identity();
        assert_eq!(semidecide_nonmixing(&f, MixingMode::Transitive, 3, &b()).unwrap(), NonMixing::Witness(origin()));
        // orbits are bi-infinite, so only the zero configuration leaves a trace
        let f = zoo::two_point_collapse();
        assert_eq!(semidecide_nonmixing(&f, MixingMode::Transitive, 3, &b()).unwrap(), NonMixing::NoWitnessWithinBudget);
        assert_eq!(
            semidecide_nonmixing(&zoo::xor(), MixingMode::Transitive, 3, &b()).unwrap(),
            NonMixing::NoWitnessWithinBudget
        );
    }

    #[test]
    fn entropies() {
        let e = entropy_1d(&full(2), 1e-12).unwrap();
        assert!((e.value - 2f64.ln()).abs() < 1e-9);
        assert_eq!(e.block_counts, (1..=8).map(|n| 1u128 << n).collect::<Vec<_>>());
        assert!(entropy_1d(&zoo::two_point(), 1e-12).unwrap().value.abs() < 1e-9);
        let evens = GroupShiftPresentation::from_allowed(&z(4), vec![1], vec![0, 2]).unwrap();
        assert!((entropy_1d(&evens, 1e-12).unwrap().value - 2f64.ln()).abs() < 1e-9);
        let golden = zoo::forbid_words(&z(2), &[&[1, 1]]).unwrap();
        let e = entropy_1d(&golden, 1e-12).unwrap();
        assert!((e.value - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-9);
        for (n, &c) in e.block_counts.iter().enumerate() {
            assert!(e.value <= (c as f64).ln() / (n + 1) as f64 + 1e-12);
        }
    }

    #[test]
    fn entropy_addition() {
        let ln2 = 2f64.ln();
        let r = goe_entropy_check(&zoo::xor(), 1e-8, &b()).unwrap();
        assert!(r.addition_holds && r.moore_holds);
        assert!((r.h_image - ln2).abs() < 1e-9 && r.h_kernel.abs() < 1e-9);
        assert_eq!((r.surjective, r.preinjective), (Verdict::True, Verdict::True));
        let r = goe_entropy_check(&zoo::two_point_collapse(), 1e-8, &b()).unwrap();
        assert!(r.addition_holds && r.moore_holds);
        assert_eq!((r.surjective, r.preinjective), (Verdict::False, Verdict::True));
        let r = goe_entropy_check(&zoo::annihilator(), 1e-8, &b()).unwrap();
        assert!(r.addition_holds && (r.h_kernel - ln2).abs() < 1e-9 && r.h_image.abs() < 1e-9);
    }

    #[test]
    fn jointly_periodic_orbits() {
        let g = z(2);
        let c = jointly_periodic_sample(&zoo::identity(), &Pattern::word(&g, 0, &[0, 1]), &b()).unwrap();
        assert_eq!(c.periods(), &[2, 1]);
        let c = jointly_periodic_sample(&zoo::shift_map(), &Pattern::word(&g, 0, &[0, 1]), &b()).unwrap();
        assert_eq!(c.periods(), &[2, 2]);
        let f = zoo::xor();
        let c = jointly_periodic_sample(&f, &Pattern::word(&g, 0, &[1]), &b()).unwrap();
        assert_eq!(c.periods(), &[3, 3]);
        let rows: Vec<_> = (0..4).map(|t| time_slice(&c, t)).collect();
        assert!(rows.windows(2).all(|w| f.apply_periodic(&w[0]).unwrap() == w[1]));
        assert!(jointly_periodic_sample(&zoo::two_point_collapse(), &Pattern::word(&g, 0, &[1]), &b()).is_err());
    }
}
