//! Track splits of product alphabets and the one-dimensional route for cellwise
//! projections: label the de Bruijn automaton, then recover a finite-type presentation.

use std::collections::{HashMap, HashSet};

use crate::automaton::DeBruijnAutomaton;
use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup};
use crate::presentation::{GroupShiftPresentation, ENUM_CAP};
use crate::shape::{code_space, decode, encode};

/// A split of a product alphabet into the atomic factors at `keep` and the rest.
#[derive(Clone, Debug)]
pub struct TrackSplit {
    parent: FiniteGroup,
    keep: Vec<usize>,
    rest: Vec<usize>,
    first: FiniteGroup,
    second: FiniteGroup,
}

/// The group formed by the atomic factors at the given positions.
pub fn select_group(parent: &FiniteGroup, positions: &[usize]) -> Result<FiniteGroup> {
    let flats = parent.flat_factors();
    match positions {
        [] => Ok(FiniteGroup::trivial()),
        [p] => Ok(flats[*p].clone()),
        _ if positions.len() == flats.len() && positions.iter().enumerate().all(|(i, &p)| i == p) => Ok(parent.clone()),
        _ => FiniteGroup::product(positions.iter().map(|&p| flats[p].clone()).collect()),
    }
}

impl TrackSplit {
    pub fn new(parent: &FiniteGroup, keep: Vec<usize>) -> Result<Self> {
        let n = parent.flat_len();
        if keep.iter().any(|&p| p >= n) || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("track positions must be increasing and in range".into()));
        }
        let rest: Vec<usize> = (0..n).filter(|p| !keep.contains(p)).collect();
        Ok(TrackSplit {
            first: select_group(parent, &keep)?,
            second: select_group(parent, &rest)?,
            parent: parent.clone(),
            keep,
            rest,
        })
    }

    /// Split of a binary product `G1 × G2` into its two direct factors.
    pub fn halves(parent: &FiniteGroup) -> Result<Self> {
        let fs = parent.factors();
        if fs.len() != 2 || parent.is_atomic() {
            return Err(Error::Invalid(format!("{} is not a product of two factors", parent.name())));
        }
        let mut split = Self::new(parent, (0..fs[0].flat_len()).collect())?;
        split.first = fs[0].clone();
        split.second = fs[1].clone();
        Ok(split)
    }

    /// The same split applied blockwise to `parent^n`.
    pub fn blocks(&self, n: usize) -> Result<Self> {
        let pn = self.parent.pow(n)?;
        let w = self.parent.flat_len();
        let keep = (0..n).flat_map(|b| self.keep.iter().map(move |&p| b * w + p)).collect();
        let mut s = Self::new(&pn, keep)?;
        s.first = self.first.pow(n)?;
        s.second = self.second.pow(n)?;
        Ok(s)
    }

    /// Split of `base^n` keeping the blocks `from..to`.
    pub fn block_range(base: &FiniteGroup, n: usize, from: usize, to: usize) -> Result<Self> {
        if from > to || to > n {
            return Err(Error::Invalid(format!("block range {from}..{to} outside 0..{n}")));
        }
        let w = base.flat_len();
        let mut s = Self::new(&base.pow(n)?, (from * w..to * w).collect())?;
        s.first = base.pow(to - from)?;
        s.second = base.pow(n - (to - from))?;
        Ok(s)
    }

    /// Replaces the first group by an isomorphic presentation with the same flat factors.
    pub(crate) fn with_first(mut self, first: FiniteGroup) -> Self {
        debug_assert_eq!(first.flat_factors(), self.first.flat_factors());
        self.first = first;
        self
    }

    pub fn parent(&self) -> &FiniteGroup {
        &self.parent
    }

    pub fn first_group(&self) -> &FiniteGroup {
        &self.first
    }

    pub fn second_group(&self) -> &FiniteGroup {
        &self.second
    }

    pub fn keep(&self) -> &[usize] {
        &self.keep
    }

    pub fn first(&self, a: Elem) -> Elem {
        let v = self.parent.decode_flat(a);
        encode_in(&self.first, &self.keep.iter().map(|&p| v[p]).collect::<Vec<_>>())
    }

    pub fn second(&self, a: Elem) -> Elem {
        let v = self.parent.decode_flat(a);
        encode_in(&self.second, &self.rest.iter().map(|&p| v[p]).collect::<Vec<_>>())
    }

    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        let mut v = vec![0; self.parent.flat_len()];
        for (&p, x) in self.keep.iter().zip(self.first.decode_flat(a)) {
            v[p] = x;
        }
        for (&p, x) in self.rest.iter().zip(self.second.decode_flat(b)) {
            v[p] = x;
        }
        self.parent.encode_flat(&v)
    }

    /// The swapped split (keeping the rest).
    pub fn swap(&self) -> Result<Self> {
        let mut s = Self::new(&self.parent, self.rest.clone())?;
        s.first = self.second.clone();
        s.second = self.first.clone();
        Ok(s)
    }

    /// Lookup table of the first projection.
    pub fn first_table(&self) -> Vec<Elem> {
        self.parent.elements().map(|a| self.first(a)).collect()
    }
}

fn encode_in(g: &FiniteGroup, parts: &[Elem]) -> Elem {
    if parts.is_empty() {
        g.identity()
    } else {
        g.encode_flat(parts)
    }
}

/// A graph with edges labelled by symbols; the sofic shift of its bi-infinite label sequences.
#[derive(Clone, Debug)]
pub struct LabeledGraph {
    states: usize,
    out: Vec<Vec<(usize, Elem)>>,
}

impl LabeledGraph {
    /// Labels each automaton edge by the image of its last symbol.
    pub fn from_automaton(a: &DeBruijnAutomaton, label: impl Fn(Elem) -> Elem) -> Self {
        let l = a.word_length();
        let mut out = vec![Vec::new(); a.num_states()];
        for (i, e) in a.edges().iter().enumerate() {
            out[e.src].push((e.dst, label(a.symbol(i, l - 1))));
        }
        for o in &mut out {
            o.sort_unstable();
            o.dedup();
        }
        LabeledGraph { states: a.num_states(), out }
    }

    /// Graph on `states` states from `(source, target, label)` triples.
    pub fn from_edges(states: usize, edges: impl IntoIterator<Item = (usize, usize, Elem)>) -> Self {
        let mut out = vec![Vec::new(); states];
        for (s, d, l) in edges {
            out[s].push((d, l));
        }
        for o in &mut out {
            o.sort_unstable();
            o.dedup();
        }
        LabeledGraph { states, out }
    }

    fn step(&self, set: &[usize], sym: Elem) -> Vec<usize> {
        let mut next: Vec<usize> = set
            .iter()
            .flat_map(|&s| self.out[s].iter().filter(move |(_, l)| *l == sym).map(|(d, _)| *d))
            .collect();
        next.sort_unstable();
        next.dedup();
        next
    }

    fn labels_from(&self, set: &[usize]) -> Vec<Elem> {
        let mut ls: Vec<Elem> = set.iter().flat_map(|&s| self.out[s].iter().map(|(_, l)| *l)).collect();
        ls.sort_unstable();
        ls.dedup();
        ls
    }

    /// Words of length `n` (as codes over an alphabet of the given order).
    pub fn words(&self, n: usize, order: usize, cap: usize) -> Result<Vec<u64>> {
        let all: Vec<usize> = (0..self.states).collect();
        let mut out = Vec::new();
        let mut stack = vec![(all, 0u64, 0usize)];
        while let Some((set, code, len)) = stack.pop() {
            if len == n {
                out.push(code);
                if out.len() > cap {
                    return Err(Error::BudgetExceeded(format!("more than {cap} words of length {n}")));
                }
                continue;
            }
            for sym in self.labels_from(&set) {
                let next = self.step(&set, sym);
                stack.push((next, code * order as u64 + sym as u64, len + 1));
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// True if every word of `other` is a word of `self`.
    pub fn includes(&self, other: &LabeledGraph, max_pairs: usize) -> Result<bool> {
        let all: Vec<usize> = (0..self.states).collect();
        let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::new();
        let mut stack: Vec<(usize, Vec<usize>)> = (0..other.states).map(|z| (z, all.clone())).collect();
        while let Some((z, set)) = stack.pop() {
            if !seen.insert((z, set.clone())) {
                continue;
            }
            if seen.len() > max_pairs {
                return Err(Error::BudgetExceeded("language inclusion exploration too large".into()));
            }
            for &(d, sym) in &other.out[z] {
                let next = self.step(&set, sym);
                if next.is_empty() {
                    return Ok(false);
                }
                if !seen.contains(&(d, next.clone())) {
                    stack.push((d, next));
                }
            }
        }
        Ok(true)
    }
}

/// Limits for the one-dimensional projection route.
const MAX_BLOCK: usize = 24;
const MAX_PAIRS: usize = 2_000_000;

/// Image of a one-dimensional presentation under a cellwise map into `target`, as a
/// finite-type presentation. Returns the presentation and the block length found.
pub fn map_cellwise_1d(
    x: &GroupShiftPresentation,
    target: &FiniteGroup,
    f: impl Fn(Elem) -> Elem,
) -> Result<GroupShiftPresentation> {
    let a = DeBruijnAutomaton::build(x)?;
    if a.is_empty() {
        return Err(Error::EmptyAutomaton);
    }
    let table: Vec<Elem> = x.group().elements().map(&f).collect();
    let img = LabeledGraph::from_automaton(&a, |s| table[s]);
    sofic_to_sft(&img, target)
}

/// Least block length `ℓ` whose block shift equals the sofic shift of `img`.
pub fn sofic_to_sft(img: &LabeledGraph, target: &FiniteGroup) -> Result<GroupShiftPresentation> {
    for l in 1..=MAX_BLOCK {
        if code_space(target.order(), l).map_or(true, |s| s > ENUM_CAP) {
            break;
        }
        let words = img.words(l, target.order(), ENUM_CAP as usize)?;
        let z = GroupShiftPresentation::from_allowed(target, vec![l], words)?;
        let za = DeBruijnAutomaton::build(&z)?;
        let zg = LabeledGraph::from_automaton(&za, |s| s);
        if img.includes(&zg, MAX_PAIRS)? {
            return Ok(z);
        }
    }
    Err(Error::BudgetExceeded("no finite-type presentation of the image within the block limit".into()))
}

/// Track projection of a one-dimensional presentation.
pub fn project_track_1d(x: &GroupShiftPresentation, split: &TrackSplit) -> Result<GroupShiftPresentation> {
    if x.dim() != 1 {
        return Err(Error::NotOneDimensional);
    }
    let table = split.first_table();
    map_cellwise_1d(x, split.first_group(), |a| table[a])
}

/// Applies `f` to each cell of every allowed window code.
pub fn map_codes(codes: &[u64], from: usize, to: usize, len: usize, f: impl Fn(Elem) -> Elem) -> Vec<u64> {
    let mut cache: HashMap<u64, u64> = HashMap::new();
    let mut out: Vec<u64> = codes
        .iter()
        .map(|&c| {
            *cache.entry(c).or_insert_with(|| {
                let v: Vec<Elem> = decode(from, c, len).into_iter().map(&f).collect();
                encode(to, &v)
            })
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}
