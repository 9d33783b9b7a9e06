//! Backtracking over cells constrained by allowed window contents.
//!
//! Cells are chosen most-constrained first. After each choice, windows are revised until
//! every remaining value of every open cell is supported by some allowed window content
//! consistent with the other domains. Failures carry the set of assigned cells
//! responsible, so the search jumps back over choices that played no part in a conflict.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

use crate::dovetail::{OutOfSteps, Steps};
use crate::group::Elem;
use crate::presentation::CodeSet;
use crate::shape::decode;

const OPEN: usize = usize::MAX;

/// Largest alphabet handled by the bitmask domains.
pub const MAX_ORDER: usize = 128;

/// Largest number of allowed window contents indexed for support revision; beyond it
/// only windows with a single open cell are filtered.
const SUPPORT_CAP: usize = 1 << 16;

/// For each window position and symbol, the allowed contents having that symbol there.
struct Supports {
    words: usize,
    bits: Vec<Vec<Vec<u64>>>,
}

impl Supports {
    fn new(order: usize, allowed: &CodeSet, positions: usize) -> Option<Self> {
        let codes = allowed.codes();
        if codes.len() > SUPPORT_CAP {
            return None;
        }
        let words = codes.len().div_ceil(64).max(1);
        let mut bits = vec![vec![vec![0u64; words]; order]; positions];
        for (k, &c) in codes.iter().enumerate() {
            for (j, v) in decode(order, c, positions).into_iter().enumerate() {
                bits[j][v][k / 64] |= 1 << (k % 64);
            }
        }
        Some(Supports { words, bits })
    }
}

pub struct WindowCsp<'a> {
    order: usize,
    full: u128,
    allowed: &'a CodeSet,
    supports: Option<Supports>,
    windows: Vec<Vec<usize>>,
    distinct: Vec<Vec<usize>>,
    cell_windows: Vec<Vec<usize>>,
    vals: Vec<usize>,
    open: Vec<usize>,
    dom: Vec<u128>,
    /// Assigned cells whose choices pruned each domain.
    reason: Vec<FixedBitSet>,
    trail: Vec<(usize, u128, FixedBitSet)>,
}

impl<'a> WindowCsp<'a> {
    /// `windows` lists cell indices in window order; a cell may repeat inside a window.
    pub fn new(order: usize, allowed: &'a CodeSet, cells: usize, windows: Vec<Vec<usize>>) -> Self {
        assert!(order <= MAX_ORDER, "alphabet too large for bitmask domains");
        let mut distinct = Vec::with_capacity(windows.len());
        let mut cell_windows = vec![Vec::new(); cells];
        for (w, idx) in windows.iter().enumerate() {
            let mut d = idx.clone();
            d.sort_unstable();
            d.dedup();
            for &c in &d {
                cell_windows[c].push(w);
            }
            distinct.push(d);
        }
        let open = distinct.iter().map(|d| d.len()).collect();
        let full = if order == 128 { u128::MAX } else { (1u128 << order) - 1 };
        let supports = windows.first().and_then(|w| Supports::new(order, allowed, w.len()));
        WindowCsp {
            order,
            full,
            allowed,
            supports,
            windows,
            distinct,
            cell_windows,
            vals: vec![OPEN; cells],
            open,
            dom: vec![full; cells],
            reason: vec![FixedBitSet::with_capacity(cells); cells],
            trail: Vec::new(),
        }
    }

    /// Restricts a cell to a single value before solving; false on an immediate clash.
    pub fn pin(&mut self, c: usize, v: Elem) -> bool {
        self.dom[c] &= 1u128 << v;
        self.dom[c] != 0
    }

    fn code(&self, w: usize) -> u64 {
        self.windows[w].iter().fold(0u64, |acc, &j| acc * self.order as u64 + self.vals[j] as u64)
    }

    fn assigned_cells(&self, w: usize) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.vals.len());
        for &u in &self.distinct[w] {
            if self.vals[u] != OPEN {
                set.insert(u);
            }
        }
        set
    }

    /// Cells whose current state explains the domains seen by window `w`, except `skip`.
    fn explanation(&self, w: usize, skip: usize) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.vals.len());
        for &u in &self.distinct[w] {
            if u == skip {
                continue;
            }
            if self.vals[u] != OPEN {
                set.insert(u);
            } else {
                set.union_with(&self.reason[u]);
            }
        }
        set
    }

    fn restrict(&mut self, u: usize, keep: u128, why: &FixedBitSet) {
        let mut r = self.reason[u].clone();
        r.union_with(why);
        let prev = std::mem::replace(&mut self.reason[u], r);
        self.trail.push((u, self.dom[u], prev));
        self.dom[u] = keep;
    }

    /// Support revision of one window; returns the cells whose domains shrank.
    fn revise(&mut self, w: usize) -> Result<Vec<usize>, FixedBitSet> {
        let Some(sup) = &self.supports else { return Ok(Vec::new()) };
        let mut live: Option<Vec<u64>> = None;
        for (j, &u) in self.windows[w].iter().enumerate() {
            let d = self.dom[u];
            if d == self.full {
                continue;
            }
            let mut col = vec![0u64; sup.words];
            let mut bits = d;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                for (a, b) in col.iter_mut().zip(&sup.bits[j][v]) {
                    *a |= b;
                }
            }
            match &mut live {
                None => live = Some(col),
                Some(l) => l.iter_mut().zip(&col).for_each(|(a, b)| *a &= b),
            }
        }
        let Some(live) = live else { return Ok(Vec::new()) };
        if live.iter().all(|&x| x == 0) {
            return Err(self.explanation(w, usize::MAX));
        }
        let mut keeps: Vec<(usize, u128)> = Vec::new();
        for (j, &u) in self.windows[w].iter().enumerate() {
            if self.vals[u] != OPEN {
                continue;
            }
            let mut keep = 0u128;
            let mut bits = self.dom[u];
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if live.iter().zip(&sup.bits[j][v]).any(|(a, b)| a & b != 0) {
                    keep |= 1 << v;
                }
            }
            match keeps.iter_mut().find(|(c, _)| *c == u) {
                Some((_, k)) => *k &= keep,
                None => keeps.push((u, keep)),
            }
        }
        let mut changed = Vec::new();
        for (u, keep) in keeps {
            if keep != self.dom[u] {
                let why = self.explanation(w, u);
                self.restrict(u, keep, &why);
                if keep == 0 {
                    return Err(self.reason[u].clone());
                }
                changed.push(u);
            }
        }
        Ok(changed)
    }

    /// Revises windows until no domain changes.
    fn propagate(&mut self, mut queue: VecDeque<usize>) -> Result<(), FixedBitSet> {
        let mut queued = vec![false; self.windows.len()];
        for &w in &queue {
            queued[w] = true;
        }
        while let Some(w) = queue.pop_front() {
            queued[w] = false;
            for u in self.revise(w)? {
                for &w2 in &self.cell_windows[u] {
                    if w2 != w && !queued[w2] {
                        queued[w2] = true;
                        queue.push_back(w2);
                    }
                }
            }
        }
        Ok(())
    }

    /// Assigns `a` to `c`; on failure returns the cells involved in the conflict.
    fn assign(&mut self, c: usize, a: usize) -> Result<(), FixedBitSet> {
        self.vals[c] = a;
        for &w in &self.cell_windows[c] {
            self.open[w] -= 1;
        }
        if self.dom[c] != 1 << a {
            let none = FixedBitSet::with_capacity(self.vals.len());
            self.restrict(c, 1 << a, &none);
        }
        for k in 0..self.cell_windows[c].len() {
            let w = self.cell_windows[c][k];
            match self.open[w] {
                0 => {
                    if !self.allowed.contains(self.code(w)) {
                        return Err(self.assigned_cells(w));
                    }
                }
                1 if self.supports.is_none() => {
                    let u = *self.distinct[w].iter().find(|&&u| self.vals[u] == OPEN).expect("one open cell");
                    let old = self.dom[u];
                    let mut keep = 0u128;
                    let mut bits = old;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        self.vals[u] = b;
                        if self.allowed.contains(self.code(w)) {
                            keep |= 1u128 << b;
                        }
                    }
                    self.vals[u] = OPEN;
                    if keep != old {
                        let why = self.assigned_cells(w);
                        self.restrict(u, keep, &why);
                    }
                    if keep == 0 {
                        return Err(self.reason[u].clone());
                    }
                }
                _ => {}
            }
        }
        if self.supports.is_some() {
            self.propagate(self.cell_windows[c].iter().copied().collect())?;
        }
        Ok(())
    }

    fn unassign(&mut self, c: usize, mark: usize) {
        for &w in &self.cell_windows[c] {
            self.open[w] += 1;
        }
        self.vals[c] = OPEN;
        while self.trail.len() > mark {
            let (u, old, why) = self.trail.pop().expect("above mark");
            self.dom[u] = old;
            self.reason[u] = why;
        }
    }

    /// Finds one complete assignment.
    pub fn solve(&mut self, steps: &mut Steps) -> Result<Option<Vec<Elem>>, OutOfSteps> {
        if self.supports.is_some() {
            let touched: VecDeque<usize> = (0..self.windows.len())
                .filter(|&w| self.distinct[w].iter().any(|&u| self.dom[u] != self.full))
                .collect();
            if self.propagate(touched).is_err() {
                return Ok(None);
            }
        }
        match self.search(steps)? {
            Ok(()) => Ok(Some(self.vals.clone())),
            Err(_) => Ok(None),
        }
    }

    fn search(&mut self, steps: &mut Steps) -> Result<Result<(), FixedBitSet>, OutOfSteps> {
        let mut best = None;
        let mut best_count = u32::MAX;
        for c in 0..self.vals.len() {
            if self.vals[c] == OPEN {
                let n = self.dom[c].count_ones();
                if n < best_count {
                    best_count = n;
                    best = Some(c);
                    if n <= 1 {
                        break;
                    }
                }
            }
        }
        let Some(c) = best else { return Ok(Ok(())) };
        let mut conflict = self.reason[c].clone();
        let mut bits = self.dom[c];
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            steps.tick()?;
            let mark = self.trail.len();
            let outcome = match self.assign(c, b) {
                Ok(()) => self.search(steps)?,
                Err(cs) => Err(cs),
            };
            let Err(cs) = outcome else { return Ok(Ok(())) };
            self.unassign(c, mark);
            if !cs.contains(c) {
                return Ok(Err(cs));
            }
            conflict.union_with(&cs);
        }
        conflict.set(c, false);
        Ok(Err(conflict))
    }
}
