//! Languages of group shifts: membership, allowed-pattern subgroups, comparison.

use fixedbitset::FixedBitSet;

use crate::automaton::{DeBruijnAutomaton, MixingClass};
use crate::dovetail::{box_search, dovetail, Dovetail, Steps};
use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup, Subgroup, DEFAULT_POWER_LIMIT};
use crate::presentation::{GroupShiftPresentation, ENUM_CAP};
use crate::shape::{code_space, decode, encode, Cell, Extents, Pattern, PeriodicConfiguration, Shape};

/// Resource bounds for the semi-decision procedures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_period: usize,
    pub max_box: usize,
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_period: 8, max_box: 8, max_steps: 5_000_000 }
    }
}

impl Budget {
    pub fn new(max_period: usize, max_box: usize, max_steps: u64) -> Result<Self> {
        if max_period == 0 || max_box == 0 || max_steps == 0 {
            return Err(Error::Invalid("budget bounds must be positive".into()));
        }
        Ok(Budget { max_period, max_box, max_steps })
    }
}

/// Why a pattern is not in the language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Refutation {
    /// No path of the one-dimensional automaton reads the pattern.
    NoPath,
    /// Every extension to `{−n,…,n}^d` contains a forbidden window.
    Box(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// A totally periodic configuration containing the pattern at its own cells, when
    /// one exists (always for group shifts).
    Yes(Option<PeriodicConfiguration>),
    No(Refutation),
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Yes(_))
    }
}

fn check_pattern(p: &Pattern, x: &GroupShiftPresentation) -> Result<()> {
    if p.group() != x.group() {
        return Err(Error::ShapeMismatch);
    }
    if p.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: p.dim() });
    }
    Ok(())
}

pub fn member(p: &Pattern, x: &GroupShiftPresentation, budget: &Budget) -> Result<Membership> {
    check_pattern(p, x)?;
    if p.shape().is_empty() {
        return Ok(Membership::Yes(None));
    }
    match x.dim() {
        0 => {
            let v = p.values()[0];
            Ok(if x.subgroup().expect("dimension 0").contains(v) {
                Membership::Yes(Some(PeriodicConfiguration::new(x.group(), vec![], vec![v])?))
            } else {
                Membership::No(Refutation::NoPath)
            })
        }
        1 => Ok(member_1d(&DeBruijnAutomaton::build(x)?, p)),
        _ => member_nd(p, x, budget),
    }
}

/// Membership through the automaton; `p` must be one-dimensional.
pub fn member_1d(a: &DeBruijnAutomaton, p: &Pattern) -> Membership {
    let (lo, hi) = p.shape().bounds().map(|(l, h)| (l[0], h[0])).expect("nonempty pattern");
    let mut constraint = vec![None; (hi - lo + 1) as usize];
    for (c, v) in p.entries() {
        constraint[(c[0] - lo) as usize] = Some(v);
    }
    match a.find_path(&constraint) {
        None => Membership::No(Refutation::NoPath),
        Some(path) => Membership::Yes(a.close_walk(&path).map(|w| a.periodic_from_walk(&w, lo))),
    }
}

fn member_nd(p: &Pattern, x: &GroupShiftPresentation, budget: &Budget) -> Result<Membership> {
    let mut steps = Steps::new(budget.max_steps);
    match dovetail(x, p, budget.max_period, budget.max_box, &mut steps) {
        Dovetail::Found(c) => Ok(Membership::Yes(Some(c))),
        Dovetail::Refuted(n) => Ok(Membership::No(Refutation::Box(n))),
        Dovetail::Exhausted { max_period, max_radius } => Err(Error::BudgetExceeded(format!(
            "membership of {} undecided after tori up to period {max_period} and boxes up to radius {} ({} steps)",
            p.describe(),
            max_radius.map_or("none".to_string(), |n| n.to_string()),
            steps.used
        ))),
    }
}

/// Independent check of a membership certificate.
pub fn verify_membership(p: &Pattern, x: &GroupShiftPresentation, m: &Membership) -> bool {
    match m {
        Membership::Yes(Some(c)) => x.torus_member(c) && c.pattern(p.shape()) == *p,
        Membership::Yes(None) => p.shape().is_empty() || x.dim() == 1,
        Membership::No(Refutation::NoPath) => match x.dim() {
            0 => !x.subgroup().expect("dimension 0").contains(p.values()[0]),
            1 => DeBruijnAutomaton::build(x).map(|a| !member_1d(&a, p).is_member()).unwrap_or(false),
            _ => false,
        },
        Membership::No(Refutation::Box(n)) => {
            x.dim() >= 1 && matches!(box_search(x, p, *n, &mut Steps::new(u64::MAX)), Ok(false))
        }
    }
}

/// Cellwise arithmetic on codes of patterns over a fixed shape.
#[derive(Clone, Debug)]
pub struct CodeArith {
    group: FiniteGroup,
    len: usize,
}

impl CodeArith {
    pub fn new(group: &FiniteGroup, len: usize) -> Self {
        CodeArith { group: group.clone(), len }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let o = self.group.order();
        let (x, y) = (decode(o, a, self.len), decode(o, b, self.len));
        let z: Vec<Elem> = x.iter().zip(&y).map(|(&u, &v)| self.group.mul(u, v)).collect();
        encode(o, &z)
    }

    pub fn inv(&self, a: u64) -> u64 {
        let o = self.group.order();
        let z: Vec<Elem> = decode(o, a, self.len).into_iter().map(|u| self.group.inv(u)).collect();
        encode(o, &z)
    }

    pub fn identity(&self) -> u64 {
        encode(self.group.order(), &vec![self.group.identity(); self.len])
    }
}

fn space_for(g: &FiniteGroup, len: usize) -> Result<u64> {
    match code_space(g.order(), len) {
        Some(s) if s <= ENUM_CAP => Ok(s),
        _ => Err(Error::PowerTooLarge {
            order: (g.order() as f64).powi(len as i32).min(u128::MAX as f64) as u128,
            limit: ENUM_CAP as u128,
        }),
    }
}

/// Codes (in the shape's cell order) of the patterns on `shape` in the language.
pub fn allowed_codes(x: &GroupShiftPresentation, shape: &Shape, budget: &Budget) -> Result<Vec<u64>> {
    allowed_codes_with(x, shape, budget, true)
}

/// As [`allowed_codes`], testing every candidate individually; does not rely on the
/// presented shift being a group.
pub fn allowed_codes_exhaustive(x: &GroupShiftPresentation, shape: &Shape, budget: &Budget) -> Result<Vec<u64>> {
    allowed_codes_with(x, shape, budget, false)
}

fn allowed_codes_with(x: &GroupShiftPresentation, shape: &Shape, budget: &Budget, batched: bool) -> Result<Vec<u64>> {
    if shape.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: shape.dim() });
    }
    let g = x.group();
    match x.dim() {
        0 => Ok(x.subgroup().expect("dimension 0").members().iter().map(|&a| a as u64).collect()),
        // the automaton lists words without scanning the code space
        1 if code_space(g.order(), shape.len()).is_some() => allowed_codes_1d(&DeBruijnAutomaton::build(x)?, shape),
        _ if batched => {
            space_for(g, shape.len())?;
            allowed_codes_batched(x, shape, budget)
        }
        _ => {
            space_for(g, shape.len())?;
            let mut out = Vec::new();
            for code in candidates(x, shape)? {
                let p = Pattern::new(g, shape.clone(), decode(g.order(), code, shape.len()))?;
                if member_nd(&p, x, budget)?.is_member() {
                    out.push(code);
                }
            }
            Ok(out)
        }
    }
}

/// Words of the automaton restricted to a one-dimensional shape.
pub fn allowed_codes_1d(a: &DeBruijnAutomaton, shape: &Shape) -> Result<Vec<u64>> {
    let Some((lo, hi)) = shape.bounds() else {
        return Ok(vec![0]);
    };
    let n = (hi[0] - lo[0] + 1) as usize;
    let words = a.words(n, ENUM_CAP as usize)?;
    if n == shape.len() {
        return Ok(words);
    }
    let o = a.group().order();
    let pos: Vec<usize> = shape.cells().iter().map(|c| (c[0] - lo[0]) as usize).collect();
    let mut out: Vec<u64> = words
        .iter()
        .map(|&w| {
            let v = decode(o, w, n);
            encode(o, &pos.iter().map(|&i| v[i]).collect::<Vec<_>>())
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Codes that are not ruled out by windows inside the shape.
fn candidates(x: &GroupShiftPresentation, shape: &Shape) -> Result<Vec<u64>> {
    let ext = shape.bounding_extents();
    let is_box = ext.iter().product::<usize>() == shape.len();
    if is_box && ext.iter().zip(x.window()).all(|(a, b)| a >= b) {
        x.admissible_codes(&ext)
    } else {
        Ok((0..space_for(x.group(), shape.len())?).collect())
    }
}

/// Uses the subgroup structure: members found by torus search generate a subgroup `H`
/// (together with every window of the torus), and each refuted pattern rules out its
/// whole coset.
fn allowed_codes_batched(x: &GroupShiftPresentation, shape: &Shape, budget: &Budget) -> Result<Vec<u64>> {
    let g = x.group();
    let len = shape.len();
    let space = space_for(g, len)?;
    let ar = CodeArith::new(g, len);
    let mut h = CodeSubgroup::new(&ar, space);
    let mut non = FixedBitSet::with_capacity(space as usize);
    let mut reps: Vec<u64> = Vec::new();
    let cand = candidates(x, shape)?;
    for code in cand {
        if h.contains(code) || non.contains(code as usize) {
            continue;
        }
        let p = Pattern::new(g, shape.clone(), decode(g.order(), code, len))?;
        match member_nd(&p, x, budget)? {
            Membership::Yes(c) => {
                let before = h.len();
                h.add(code);
                if let Some(c) = c {
                    for w in harvest(&c, shape) {
                        h.add(w);
                    }
                }
                if h.len() != before {
                    for &r in &reps {
                        for &e in h.elements() {
                            non.insert(ar.mul(r, e) as usize);
                        }
                    }
                }
            }
            Membership::No(_) => {
                reps.push(code);
                for &e in h.elements() {
                    non.insert(ar.mul(code, e) as usize);
                }
            }
        }
    }
    let mut out = h.elements().to_vec();
    out.sort_unstable();
    Ok(out)
}

/// Codes of all translates of `shape` read from a periodic configuration.
pub fn harvest(c: &PeriodicConfiguration, shape: &Shape) -> Vec<u64> {
    let o = c.group().order();
    let mut out: Vec<u64> = Extents::new(c.periods().to_vec())
        .cells()
        .map(|t| {
            let vals: Vec<Elem> = shape
                .cells()
                .iter()
                .map(|x| {
                    let s: Cell = x.iter().zip(&t).map(|(a, b)| a + b).collect();
                    c.get(&s)
                })
                .collect();
            encode(o, &vals)
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// A subgroup of a pattern group, grown by right coset enumeration.
pub struct CodeSubgroup<'a> {
    ar: &'a CodeArith,
    elems: Vec<u64>,
    gens: Vec<u64>,
    set: FixedBitSet,
}

impl<'a> CodeSubgroup<'a> {
    pub fn new(ar: &'a CodeArith, space: u64) -> Self {
        let mut set = FixedBitSet::with_capacity(space as usize);
        let id = ar.identity();
        set.insert(id as usize);
        CodeSubgroup { ar, elems: vec![id], gens: Vec::new(), set }
    }

    pub fn contains(&self, c: u64) -> bool {
        self.set.contains(c as usize)
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[u64] {
        &self.elems
    }

    /// Adds a generator; returns whether the subgroup grew.
    pub fn add(&mut self, g: u64) -> bool {
        if self.contains(g) {
            return false;
        }
        self.gens.push(g);
        let old: Vec<u64> = self.elems.clone();
        let mut reps = vec![self.ar.identity()];
        let mut i = 0;
        while i < reps.len() {
            let r = reps[i];
            i += 1;
            for k in 0..self.gens.len() {
                let t = self.ar.mul(r, self.gens[k]);
                if !self.contains(t) {
                    for &h in &old {
                        let e = self.ar.mul(h, t);
                        self.set.insert(e as usize);
                        self.elems.push(e);
                    }
                    reps.push(t);
                }
            }
        }
        true
    }
}

/// The allowed patterns on `shape` as a subgroup of the power group `G^shape`.
pub fn allowed_patterns(x: &GroupShiftPresentation, shape: &Shape, budget: &Budget) -> Result<Subgroup> {
    let codes = allowed_codes(x, shape, budget)?;
    let pg = x.group().power(shape.len(), DEFAULT_POWER_LIMIT)?;
    Ok(Subgroup::from_sorted_unchecked(&pg, codes.into_iter().map(|c| c as Elem).collect()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub subset_12: bool,
    pub subset_21: bool,
}

impl Comparison {
    pub fn equal(&self) -> bool {
        self.subset_12 && self.subset_21
    }
}

/// True if the shift of `a` is contained in that of `b`.
pub fn is_subshift(a: &GroupShiftPresentation, b: &GroupShiftPresentation, budget: &Budget) -> Result<bool> {
    if a.group() != b.group() || a.dim() != b.dim() {
        return Err(Error::ShapeMismatch);
    }
    if a.dim() == 0 {
        return Ok(a.subgroup().expect("dim 0").is_subset_of(b.subgroup().expect("dim 0")));
    }
    let codes = allowed_codes(a, &b.window_shape(), budget)?;
    Ok(codes.iter().all(|&c| b.is_allowed_code(c)))
}

pub fn compare(a: &GroupShiftPresentation, b: &GroupShiftPresentation, budget: &Budget) -> Result<Comparison> {
    Ok(Comparison { subset_12: is_subshift(a, b, budget)?, subset_21: is_subshift(b, a, budget)? })
}

pub fn shifts_equal(a: &GroupShiftPresentation, b: &GroupShiftPresentation, budget: &Budget) -> Result<bool> {
    Ok(is_subshift(a, b, budget)? && is_subshift(b, a, budget)?)
}

pub fn mixing_class_1d(x: &GroupShiftPresentation) -> Result<MixingClass> {
    Ok(DeBruijnAutomaton::build(x)?.mixing_class())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Groupness {
    pub closed: bool,
    pub witness: Option<(Pattern, Pattern)>,
    pub allowed: usize,
}

/// Checks that the allowed patterns on the box `{0,…,r}^d` form a subgroup.
pub fn groupness_check(x: &GroupShiftPresentation, r: usize, budget: &Budget) -> Result<Groupness> {
    if x.dim() == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let shape = Shape::boxed(&vec![0; x.dim()], &vec![r + 1; x.dim()]);
    let codes = allowed_codes_exhaustive(x, &shape, budget)?;
    let g = x.group();
    let ar = CodeArith::new(g, shape.len());
    let pat = |c: u64| Pattern::new(g, shape.clone(), decode(g.order(), c, shape.len())).expect("code fits");
    if codes.binary_search(&ar.identity()).is_err() {
        let id = ar.identity();
        return Ok(Groupness { closed: false, witness: Some((pat(id), pat(id))), allowed: codes.len() });
    }
    for &a in &codes {
        for &b in &codes {
            if codes.binary_search(&ar.mul(a, b)).is_err() {
                return Ok(Groupness { closed: false, witness: Some((pat(a), pat(b))), allowed: codes.len() });
            }
        }
    }
    Ok(Groupness { closed: true, witness: None, allowed: codes.len() })
}

/// Default radius for [`groupness_check`].
pub fn default_groupness_radius(x: &GroupShiftPresentation) -> usize {
    x.width() + 1
}
