//! Brute-force reference answers over periodic configurations.
//!
//! Everything here unrolls definitions directly: tori are enumerated symbol by symbol,
//! windows are looked up in the presentation's allowed set and rules in the rule table.
//! Nothing from the automata, projections or searches is used.

use std::collections::{BTreeSet, HashSet};

use crate::group::{Elem, FiniteGroup};
use crate::maps::GroupShiftHom;
use crate::presentation::GroupShiftPresentation;
use crate::shape::{code_space, decode, encode, Cell, Extents, Pattern, PeriodicConfiguration};

/// Default period cap for one-dimensional shifts.
pub const DEFAULT_K: usize = 8;
/// Default period cap per axis in two dimensions.
pub const DEFAULT_K_2D: usize = 4;

fn wrap(c: &[i64], periods: &[usize]) -> Cell {
    c.iter().zip(periods).map(|(&a, &p)| a.rem_euclid(p as i64)).collect()
}

/// Fundamental domains of all configurations with the given periods, as value vectors.
struct Tori<'a> {
    x: &'a GroupShiftPresentation,
    torus: Extents,
    /// For each torus cell, the cells of the window anchored there.
    windows: Vec<Vec<usize>>,
}

impl<'a> Tori<'a> {
    fn new(x: &'a GroupShiftPresentation, periods: &[usize]) -> Self {
        let torus = Extents::new(periods.to_vec());
        let wcells: Vec<Cell> = Extents::new(x.window().to_vec()).cells().collect();
        let windows = torus
            .cells()
            .map(|t| {
                wcells
                    .iter()
                    .map(|w| torus.index(&wrap(&w.iter().zip(&t).map(|(a, b)| a + b).collect::<Cell>(), periods)))
                    .collect()
            })
            .collect();
        Tori { x, torus, windows }
    }

    fn valid(&self, vals: &[Elem]) -> bool {
        let order = self.x.group().order() as u64;
        self.windows.iter().all(|w| self.x.is_allowed_code(w.iter().fold(0, |acc, &i| acc * order + vals[i] as u64)))
    }

    /// Calls `visit` on every valid torus; stops early when it returns false.
    fn each(&self, mut visit: impl FnMut(&[Elem]) -> bool) {
        let order = self.x.group().order();
        let vol = self.torus.volume();
        let mut vals = vec![0; vol];
        loop {
            if self.valid(&vals) && !visit(&vals) {
                return;
            }
            let mut i = vol;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                vals[i] += 1;
                if vals[i] < order {
                    break;
                }
                vals[i] = 0;
            }
        }
    }
}

/// Period vectors in `[1, k]^d`.
fn period_vectors(dim: usize, k: usize) -> Vec<Vec<usize>> {
    Extents::new(vec![k; dim]).cells().map(|c| c.iter().map(|&a| a as usize + 1).collect()).collect()
}

/// Every configuration of `x` with all periods at most `k`, grouped by period vector.
#[derive(Clone, Debug)]
pub struct TorusEnsemble {
    group: FiniteGroup,
    dim: usize,
    k: usize,
    /// Fundamental domains as codes, per period vector.
    classes: Vec<(Vec<usize>, Vec<u64>)>,
}

impl TorusEnsemble {
    pub fn new(x: &GroupShiftPresentation, k: usize) -> Self {
        let classes = period_vectors(x.dim(), k)
            .into_iter()
            .map(|periods| {
                let mut members = Vec::new();
                Tori::new(x, &periods).each(|v| {
                    members.push(encode(x.group().order(), v));
                    true
                });
                (periods, members)
            })
            .collect();
        TorusEnsemble { group: x.group().clone(), dim: x.dim(), k, classes }
    }

    pub fn cap(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of (period vector, configuration) pairs.
    pub fn len(&self) -> usize {
        self.classes.iter().map(|(_, m)| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn configurations(&self) -> impl Iterator<Item = PeriodicConfiguration> + '_ {
        self.classes.iter().flat_map(move |(p, ms)| {
            let vol = p.iter().product();
            ms.iter().map(move |&c| {
                PeriodicConfiguration::new(&self.group, p.clone(), decode(self.group.order(), c, vol)).expect("torus fits")
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleMembership {
    Found(PeriodicConfiguration),
    NotFoundUpTo(usize),
}

impl OracleMembership {
    pub fn found(&self) -> bool {
        matches!(self, OracleMembership::Found(_))
    }
}

/// Searches every torus with periods at most `k` for one containing `p` at its own cells.
pub fn oracle_member(p: &Pattern, x: &GroupShiftPresentation, k: usize) -> OracleMembership {
    let g = x.group();
    for periods in period_vectors(x.dim(), k) {
        let tori = Tori::new(x, &periods);
        let pins: Vec<(usize, Elem)> = p.entries().map(|(c, v)| (tori.torus.index(&wrap(c, &periods)), v)).collect();
        let mut hit = None;
        tori.each(|v| {
            if pins.iter().all(|&(i, a)| v[i] == a) {
                hit = Some(v.to_vec());
                false
            } else {
                true
            }
        });
        if let Some(v) = hit {
            return OracleMembership::Found(PeriodicConfiguration::new(g, periods, v).expect("torus fits"));
        }
    }
    OracleMembership::NotFoundUpTo(k)
}

/// The rule table of `F` wired to the cells of one torus.
struct TorusRule {
    order: u64,
    /// Rule values by neighbourhood code; `None` off the allowed patterns.
    table: Vec<Option<Elem>>,
    /// For each torus cell, the cells of its neighbourhood.
    nbrs: Vec<Vec<usize>>,
}

impl TorusRule {
    fn new(f: &GroupShiftHom, periods: &[usize]) -> Self {
        let order = f.domain().group().order();
        let space = code_space(order, f.neighborhood().len()).expect("small neighbourhood") as usize;
        let mut table = vec![None; space];
        for (c, v) in f.entries() {
            table[c as usize] = Some(v);
        }
        let torus = Extents::new(periods.to_vec());
        let nbrs = torus
            .cells()
            .map(|u| {
                f.neighborhood()
                    .cells()
                    .iter()
                    .map(|n| torus.index(&wrap(&u.iter().zip(n).map(|(a, b)| a + b).collect::<Cell>(), periods)))
                    .collect()
            })
            .collect();
        TorusRule { order: order as u64, table, nbrs }
    }

    /// `F` applied by looking up the rule at every cell.
    fn apply(&self, vals: &[Elem]) -> Option<Vec<Elem>> {
        self.nbrs.iter().map(|n| self.cell(vals, n)).collect()
    }

    /// Code of the image, without materialising it.
    fn apply_code(&self, vals: &[Elem]) -> Option<u64> {
        self.nbrs.iter().try_fold(0, |acc, n| Some(acc * self.order + self.cell(vals, n)? as u64))
    }

    fn cell(&self, vals: &[Elem], n: &[usize]) -> Option<Elem> {
        self.table[n.iter().fold(0, |acc, &i| acc * self.order + vals[i] as u64) as usize]
    }
}

fn cyclic_words(vals: &[Elem], len: usize) -> impl Iterator<Item = Vec<Elem>> + '_ {
    let p = vals.len();
    (0..p).map(move |s| (0..len).map(|j| vals[(s + j) % p]).collect())
}

/// Words of length `len` read from images of one-dimensional tori with periods at most `k`.
pub fn oracle_image_words(f: &GroupShiftHom, len: usize, k: usize) -> BTreeSet<Vec<Elem>> {
    assert_eq!(f.dim(), 1, "image words are one-dimensional");
    let mut out = BTreeSet::new();
    for p in 1..=k {
        let rule = TorusRule::new(f, &[p]);
        Tori::new(f.domain(), &[p]).each(|v| {
            if let Some(img) = rule.apply(v) {
                out.extend(cyclic_words(&img, len));
            }
            true
        });
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorusProperty {
    Injective,
    Surjective,
    Nilpotent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleWitness {
    Configuration(PeriodicConfiguration),
    Pattern(Pattern),
}

/// Exact verdict on the tori, and what it implies for the automaton itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleDecision {
    pub property: TorusProperty,
    pub k: usize,
    pub holds_on_tori: bool,
    /// The property for `F` on the whole shift, when the tori settle it.
    pub conclusive: Option<bool>,
    pub witness: Option<OracleWitness>,
}

/// Longest word tested for having no preimage.
const GOE_LEN: usize = 4;

/// A word of a torus of `x` with no locally admissible preimage word.
fn garden_of_eden_word(f: &GroupShiftHom, k: usize) -> Option<Vec<Elem>> {
    let x = f.domain();
    let g = x.group();
    let span = f.span()[0];
    let lo = f.neighborhood().bounds().expect("nonempty neighbourhood").0[0];
    let w = x.window()[0];
    let max_len = GOE_LEN.min(k);
    // words of every torus, read cyclically
    let order = g.order() as u64;
    let mut seen: Vec<Vec<bool>> =
        (0..=max_len).map(|len| vec![false; code_space(g.order(), len).expect("short word") as usize]).collect();
    for p in 1..=k {
        Tori::new(x, &[p]).each(|v| {
            for s in 0..p {
                let mut code = 0;
                for (len, set) in seen.iter_mut().enumerate().skip(1) {
                    code = code * order + v[(s + len - 1) % p] as u64;
                    set[code as usize] = true;
                }
            }
            true
        });
    }
    for len in 1..=max_len {
        let n = len + span;
        let mut images = HashSet::new();
        let mut u = vec![0; n];
        'words: loop {
            let admissible = n < w || (0..=n - w).all(|s| x.is_allowed_code(encode(g.order(), &u[s..s + w])));
            if admissible {
                let img: Option<Vec<Elem>> = (0..len)
                    .map(|j| {
                        let nv: Vec<Elem> =
                            f.neighborhood().cells().iter().map(|c| u[(j as i64 + c[0] - lo) as usize]).collect();
                        f.rule(&nv)
                    })
                    .collect();
                if let Some(img) = img {
                    images.insert(img);
                }
            }
            let mut i = n;
            loop {
                if i == 0 {
                    break 'words;
                }
                i -= 1;
                u[i] += 1;
                if u[i] < g.order() {
                    break;
                }
                u[i] = 0;
            }
        }
        // words without a preimage, kept only if some torus shows them
        if let Some(word) = (0..code_space(g.order(), len).expect("short word"))
            .map(|c| decode(g.order(), c, len))
            .find(|w| !images.contains(w) && seen[len][encode(g.order(), w) as usize])
        {
            return Some(word);
        }
    }
    None
}

/// Decides a property of `F` restricted to the tori with periods at most `k` per axis.
///
/// Only refutations carry over to `F`: a non-identity torus in the kernel, a torus word with
/// no preimage, or a non-identity torus surviving every iterate.
pub fn oracle_decide(f: &GroupShiftHom, property: TorusProperty, k: usize) -> OracleDecision {
    let x = f.domain();
    let g = x.group();
    let id = g.identity();
    let mut d = OracleDecision { property, k, holds_on_tori: true, conclusive: None, witness: None };
    let config = |p: &[usize], v: &[Elem]| PeriodicConfiguration::new(g, p.to_vec(), v.to_vec()).expect("torus fits");
    let order = g.order();
    for periods in period_vectors(x.dim(), k) {
        let vol: usize = periods.iter().product();
        let rule = TorusRule::new(f, &periods);
        // codes come out in increasing order
        let mut class: Vec<u64> = Vec::new();
        let mut images: Vec<Option<u64>> = Vec::new();
        Tori::new(x, &periods).each(|v| {
            class.push(encode(order, v));
            images.push(rule.apply_code(v));
            true
        });
        let image = |c: u64| class.binary_search(&c).ok().and_then(|i| images[i]);
        let one = encode(order, &vec![id; vol]);
        let refute = |d: &mut OracleDecision, c: u64| {
            d.holds_on_tori = false;
            d.witness = Some(OracleWitness::Configuration(config(&periods, &decode(order, c, vol))));
        };
        match property {
            TorusProperty::Injective => {
                if let Some((&c, _)) = class.iter().zip(&images).find(|&(&c, &i)| c != one && i == Some(one)) {
                    refute(&mut d, c);
                    d.conclusive = Some(false);
                    return d;
                }
            }
            TorusProperty::Surjective => {
                let mut hit = vec![false; class.len()];
                for i in images.iter().flatten() {
                    if let Ok(j) = class.binary_search(i) {
                        hit[j] = true;
                    }
                }
                if d.holds_on_tori {
                    if let Some((&c, _)) = class.iter().zip(&hit).find(|&(_, &h)| !h) {
                        refute(&mut d, c);
                    }
                }
            }
            TorusProperty::Nilpotent => {
                let mut current: HashSet<u64> = class.iter().copied().collect();
                loop {
                    let next: HashSet<u64> = current.iter().filter_map(|&c| image(c)).collect();
                    if next == current {
                        break;
                    }
                    current = next;
                }
                if let Some(&c) = current.iter().filter(|&&c| c != one).min() {
                    refute(&mut d, c);
                    d.conclusive = Some(false);
                    return d;
                }
            }
        }
    }
    if property == TorusProperty::Surjective && x.dim() == 1 {
        if let Some(word) = garden_of_eden_word(f, k) {
            d.conclusive = Some(false);
            d.witness = Some(OracleWitness::Pattern(Pattern::word(g, 0, &word)));
        }
    }
    d
}
