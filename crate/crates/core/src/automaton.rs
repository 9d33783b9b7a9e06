//! The de Bruijn automaton of a one-dimensional presentation.
//!
//! States are allowed words of length `ℓ−1`, edges are allowed `ℓ`-words. After
//! trimming, every edge lies on a bi-infinite path, so words read along paths are
//! exactly the language of the shift.

use std::collections::{HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup};
use crate::presentation::GroupShiftPresentation;
use crate::shape::{gcd, PeriodicConfiguration};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub code: u64,
}

#[derive(Clone, Debug)]
pub struct DeBruijnAutomaton {
    group: FiniteGroup,
    word_length: usize,
    states: Vec<u64>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    scc: Vec<usize>,
    scc_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MixingClass {
    pub transitive: bool,
    pub mixing: bool,
    pub finite: bool,
}

impl DeBruijnAutomaton {
    pub fn build(x: &GroupShiftPresentation) -> Result<Self> {
        if x.dim() != 1 {
            return Err(Error::NotOneDimensional);
        }
        let order = x.group().order() as u64;
        let l = x.width();
        let suffix_mod = order.pow(l as u32 - 1);
        let mut ids: HashMap<u64, usize> = HashMap::new();
        let mut states = Vec::new();
        let mut raw = Vec::new();
        for &w in x.allowed().codes() {
            let mut id = |s: u64| {
                *ids.entry(s).or_insert_with(|| {
                    states.push(s);
                    states.len() - 1
                })
            };
            let src = id(w / order);
            let dst = id(w % suffix_mod);
            raw.push(Edge { src, dst, code: w });
        }
        Ok(Self::assemble(x.group(), l, states, raw))
    }

    fn assemble(group: &FiniteGroup, word_length: usize, states: Vec<u64>, raw: Vec<Edge>) -> Self {
        // iteratively drop states without incoming or outgoing edges
        let n = states.len();
        let mut indeg = vec![0usize; n];
        let mut outdeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, e) in raw.iter().enumerate() {
            outdeg[e.src] += 1;
            indeg[e.dst] += 1;
            out[e.src].push(i);
            inc[e.dst].push(i);
        }
        let mut alive = vec![true; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&s| indeg[s] == 0 || outdeg[s] == 0).collect();
        while let Some(s) = queue.pop_front() {
            if !alive[s] {
                continue;
            }
            alive[s] = false;
            for &e in &out[s] {
                let d = raw[e].dst;
                if alive[d] {
                    indeg[d] -= 1;
                    if indeg[d] == 0 {
                        queue.push_back(d);
                    }
                }
            }
            for &e in &inc[s] {
                let d = raw[e].src;
                if alive[d] {
                    outdeg[d] -= 1;
                    if outdeg[d] == 0 {
                        queue.push_back(d);
                    }
                }
            }
        }
        let mut remap = vec![usize::MAX; n];
        let mut kept = Vec::new();
        for s in 0..n {
            if alive[s] {
                remap[s] = kept.len();
                kept.push(states[s]);
            }
        }
        let edges: Vec<Edge> = raw
            .iter()
            .filter(|e| alive[e.src] && alive[e.dst])
            .map(|e| Edge { src: remap[e.src], dst: remap[e.dst], code: e.code })
            .collect();
        let mut out = vec![Vec::new(); kept.len()];
        let mut inc = vec![Vec::new(); kept.len()];
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(kept.len(), edges.len());
        for _ in 0..kept.len() {
            g.add_node(());
        }
        for (i, e) in edges.iter().enumerate() {
            out[e.src].push(i);
            inc[e.dst].push(i);
            g.add_edge((e.src as u32).into(), (e.dst as u32).into(), ());
        }
        let comps = tarjan_scc(&g);
        let mut scc = vec![0; kept.len()];
        for (c, comp) in comps.iter().enumerate() {
            for v in comp {
                scc[v.index()] = c;
            }
        }
        DeBruijnAutomaton {
            group: group.clone(),
            word_length,
            states: kept,
            edges,
            out,
            inc,
            scc,
            scc_count: comps.len(),
        }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn word_length(&self) -> usize {
        self.word_length
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, s: usize) -> &[usize] {
        &self.out[s]
    }

    pub fn in_edges(&self, s: usize) -> &[usize] {
        &self.inc[s]
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn scc_of(&self, s: usize) -> usize {
        self.scc[s]
    }

    pub fn scc_count(&self) -> usize {
        self.scc_count
    }

    /// Symbol at offset `i` of the edge word.
    pub fn symbol(&self, e: usize, i: usize) -> Elem {
        let order = self.group.order() as u64;
        let shift = (self.word_length - 1 - i) as u32;
        ((self.edges[e].code / order.pow(shift)) % order) as Elem
    }

    /// Edges whose source and target share a strongly connected component.
    pub fn internal(&self, e: usize) -> bool {
        let Edge { src, dst, .. } = self.edges[e];
        self.scc[src] == self.scc[dst]
    }

    /// Components as lists of states.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comps = vec![Vec::new(); self.scc_count];
        for (s, &c) in self.scc.iter().enumerate() {
            comps[c].push(s);
        }
        comps
    }

    /// All words of length `n ≥ 1` in the language, as codes (first symbol most significant).
    pub fn words(&self, n: usize, cap: usize) -> Result<Vec<u64>> {
        let order = self.group.order() as u64;
        let l = self.word_length;
        let mut out = Vec::new();
        if n <= l {
            let div = order.pow((l - n) as u32);
            out = self.edges.iter().map(|e| e.code / div).collect();
            out.sort_unstable();
            out.dedup();
            return Ok(out);
        }
        // words of length n ↔ paths of n−l+1 edges
        let mut stack: Vec<(usize, u64, usize)> = self.edges.iter().enumerate().map(|(i, e)| (i, e.code, l)).collect();
        while let Some((e, code, len)) = stack.pop() {
            if len == n {
                out.push(code);
                if out.len() > cap {
                    return Err(Error::BudgetExceeded(format!("more than {cap} words of length {n}")));
                }
                continue;
            }
            for &f in &self.out[self.edges[e].dst] {
                stack.push((f, code * order + self.symbol(f, l - 1) as u64, len + 1));
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// A path of edges reading `constraint` from its first position; `None` entries are free.
    /// Windows start at offsets `0..=max(0, len−ℓ)`.
    pub fn find_path(&self, constraint: &[Option<Elem>]) -> Option<Vec<usize>> {
        let l = self.word_length;
        let steps = constraint.len().saturating_sub(l) + 1;
        let fits = |e: usize, start: usize| {
            (0..l).all(|i| match constraint.get(start + i).copied().flatten() {
                Some(v) => self.symbol(e, i) == v,
                None => true,
            })
        };
        let mut back: Vec<Vec<usize>> = Vec::with_capacity(steps);
        let mut layer: Vec<usize> = vec![usize::MAX; self.edges.len()];
        let mut current: Vec<usize> = Vec::new();
        for e in 0..self.edges.len() {
            if fits(e, 0) {
                layer[e] = e;
                current.push(e);
            }
        }
        back.push(layer);
        for step in 1..steps {
            let mut layer = vec![usize::MAX; self.edges.len()];
            let mut next = Vec::new();
            for &e in &current {
                for &f in &self.out[self.edges[e].dst] {
                    if layer[f] == usize::MAX && fits(f, step) {
                        layer[f] = e;
                        next.push(f);
                    }
                }
            }
            back.push(layer);
            current = next;
        }
        let &last = current.first()?;
        let mut path = vec![last];
        for step in (1..steps).rev() {
            let prev = back[step][*path.last().expect("nonempty")];
            path.push(prev);
        }
        path.reverse();
        Some(path)
    }

    /// Shortest edge path from state `a` to state `b` (empty when equal).
    pub fn connect(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        if a == b {
            return Some(Vec::new());
        }
        let mut via = vec![usize::MAX; self.states.len()];
        let mut queue = VecDeque::from([a]);
        let mut seen = vec![false; self.states.len()];
        seen[a] = true;
        while let Some(s) = queue.pop_front() {
            for &e in &self.out[s] {
                let d = self.edges[e].dst;
                if !seen[d] {
                    seen[d] = true;
                    via[d] = e;
                    if d == b {
                        let mut path = Vec::new();
                        let mut cur = b;
                        while cur != a {
                            let e = via[cur];
                            path.push(e);
                            cur = self.edges[e].src;
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(d);
                }
            }
        }
        None
    }

    /// Periodic configuration read along a closed walk, with walk position 0 at cell `offset`.
    pub fn periodic_from_walk(&self, walk: &[usize], offset: i64) -> PeriodicConfiguration {
        let len = walk.len();
        let fundamental = (0..len)
            .map(|i| {
                let j = (i as i64 - offset).rem_euclid(len as i64) as usize;
                self.symbol(walk[j], 0)
            })
            .collect();
        PeriodicConfiguration::new(&self.group, vec![len], fundamental).expect("walk is nonempty")
    }

    /// Closes a path into a cycle if both ends share a component.
    pub fn close_walk(&self, path: &[usize]) -> Option<Vec<usize>> {
        let first = self.edges[*path.first()?].src;
        let last = self.edges[*path.last()?].dst;
        let back = self.connect(last, first)?;
        let mut walk = path.to_vec();
        walk.extend(back);
        Some(walk)
    }

    /// Period (gcd of cycle lengths) of each component; 0 for components without cycles.
    pub fn component_periods(&self) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.states.len()];
        let mut period = vec![0usize; self.scc_count];
        for root in 0..self.states.len() {
            if level[root] != usize::MAX {
                continue;
            }
            let c = self.scc[root];
            level[root] = 0;
            let mut queue = VecDeque::from([root]);
            while let Some(s) = queue.pop_front() {
                for &e in &self.out[s] {
                    let d = self.edges[e].dst;
                    if self.scc[d] != c {
                        continue;
                    }
                    if level[d] == usize::MAX {
                        level[d] = level[s] + 1;
                        queue.push_back(d);
                    } else {
                        let diff = (level[s] + 1).abs_diff(level[d]);
                        period[c] = gcd(period[c], diff);
                    }
                }
            }
        }
        period
    }

    pub fn mixing_class(&self) -> MixingClass {
        if self.is_empty() {
            return MixingClass { transitive: false, mixing: false, finite: true };
        }
        let transitive = self.scc_count == 1;
        let mixing = transitive && self.component_periods()[0] == 1;
        let mut internal_edges = vec![0usize; self.scc_count];
        let mut sizes = vec![0usize; self.scc_count];
        for &c in &self.scc {
            sizes[c] += 1;
        }
        let mut crossing = false;
        for e in 0..self.edges.len() {
            if self.internal(e) {
                internal_edges[self.scc[self.edges[e].src]] += 1;
            } else {
                crossing = true;
            }
        }
        let finite = !crossing && (0..self.scc_count).all(|c| internal_edges[c] == sizes[c]);
        MixingClass { transitive, mixing, finite }
    }

    /// Number of configurations when the shift is finite.
    pub fn finite_count(&self) -> Option<usize> {
        self.mixing_class().finite.then_some(self.states.len())
    }

    /// Simple cycle lengths of a finite shift, one per component.
    pub fn cycle_lengths(&self) -> Option<Vec<usize>> {
        if !self.mixing_class().finite {
            return None;
        }
        let mut sizes = vec![0usize; self.scc_count];
        for &c in &self.scc {
            sizes[c] += 1;
        }
        Some(sizes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::Pattern;

    fn z2() -> FiniteGroup {
        FiniteGroup::cyclic(2)
    }

    fn forbid(words: &[&[Elem]]) -> GroupShiftPresentation {
        let ps: Vec<Pattern> = words.iter().map(|w| Pattern::word(&z2(), 0, w)).collect();
        GroupShiftPresentation::from_forbidden(&z2(), 1, &ps).unwrap()
    }

    #[test]
    fn full_shift_width_two() {
        let x = GroupShiftPresentation::full(&z2(), 1).normalize_to(&[2]).unwrap();
        let a = DeBruijnAutomaton::build(&x).unwrap();
        assert_eq!((a.num_states(), a.num_edges()), (2, 4));
        let m = a.mixing_class();
        assert!(m.transitive && m.mixing && !m.finite);
    }

    #[test]
    fn two_fixed_points() {
        let a = DeBruijnAutomaton::build(&forbid(&[&[0, 1], &[1, 0]])).unwrap();
        assert_eq!((a.num_states(), a.num_edges()), (2, 2));
        assert!(a.edges().iter().all(|e| e.src == e.dst));
        assert_eq!(a.mixing_class(), MixingClass { transitive: false, mixing: false, finite: true });
        assert_eq!(a.finite_count(), Some(2));
    }

    #[test]
    fn trimming_removes_dead_states() {
        // allowed 3-words: 001, 010, 100, 111
        let a = DeBruijnAutomaton::build(&forbid(&[&[0, 0, 0], &[1, 0, 1], &[0, 1, 1], &[1, 1, 0]])).unwrap();
        // 11 -> 11 via 111; 00 -> 01 -> 10 -> 00 cycle
        assert_eq!(a.num_states(), 4);
        assert_eq!(a.num_edges(), 4);
        // allowed 3-words {000, 001}: the path 00 -> 01 dies after trimming
        let b = DeBruijnAutomaton::build(&forbid(&[&[0, 1, 0], &[0, 1, 1], &[1, 0, 0], &[1, 0, 1], &[1, 1, 0], &[1, 1, 1]])).unwrap();
        assert_eq!((b.num_states(), b.num_edges()), (1, 1));
    }

    #[test]
    fn period_three_kernel() {
        let odd: Vec<Vec<Elem>> = (0..8u64)
            .map(|c| crate::shape::decode(2, c, 3))
            .filter(|w| w.iter().sum::<usize>() % 2 == 1)
            .collect();
        let refs: Vec<&[Elem]> = odd.iter().map(|w| w.as_slice()).collect();
        let a = DeBruijnAutomaton::build(&forbid(&refs)).unwrap();
        let m = a.mixing_class();
        assert!(!m.transitive && !m.mixing && m.finite);
        assert_eq!(a.finite_count(), Some(4));
        let mut cycles = a.cycle_lengths().unwrap();
        cycles.sort();
        assert_eq!(cycles, vec![1, 3]);
    }

    #[test]
    fn words_and_paths() {
        let a = DeBruijnAutomaton::build(&forbid(&[&[1, 1]])).unwrap();
        // golden-mean words of length 4
        assert_eq!(a.words(4, 100).unwrap().len(), 8);
        assert_eq!(a.words(1, 100).unwrap(), vec![0, 1]);
        let path = a.find_path(&[Some(1), None, Some(1)]).unwrap();
        let walk = a.close_walk(&path).unwrap();
        let c = a.periodic_from_walk(&walk, 0);
        assert_eq!(c.get(&[0]), 1);
        assert_eq!(c.get(&[2]), 1);
        assert!(a.find_path(&[Some(1), Some(1)]).is_none());
    }
}
