//! Semi-decision procedures for membership in dimension two and up.
//!
//! The positive side searches tori of increasing periods containing the pattern; the
//! negative side extends the pattern to growing boxes until every extension fails.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::csp::{WindowCsp, MAX_ORDER};
use crate::group::Elem;
use crate::presentation::{window_checks, GroupShiftPresentation};
use crate::shape::{code_space, Cell, Extents, Pattern, PeriodicConfiguration};

/// Step counter shared by the searches.
#[derive(Clone, Copy, Debug)]
pub struct Steps {
    pub used: u64,
    pub limit: u64,
}

impl Steps {
    pub fn new(limit: u64) -> Self {
        Steps { used: 0, limit }
    }

    pub fn remaining(&self) -> u64 {
        self.limit.saturating_sub(self.used)
    }

    /// A sub-counter allowed at most `cap` more steps.
    fn child(&self, cap: u64) -> Steps {
        Steps { used: self.used, limit: self.used + cap.min(self.remaining()) }
    }

    pub(crate) fn tick(&mut self) -> Result<(), OutOfSteps> {
        self.used += 1;
        if self.used > self.limit {
            Err(OutOfSteps)
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutOfSteps;

/// Periods in `[1, max]^d` ordered by maximum, then sum, then lexicographically.
pub fn period_schedule(dim: usize, max: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = Extents::new(vec![max; dim])
        .cells()
        .map(|c| c.iter().map(|&x| x as usize + 1).collect())
        .collect();
    all.sort_by_key(|k: &Vec<usize>| (*k.iter().max().unwrap_or(&1), k.iter().sum::<usize>(), k.clone()));
    all
}

struct Search<'a> {
    order: usize,
    allowed: &'a crate::presentation::CodeSet,
    checks: Vec<Vec<Vec<usize>>>,
    pinned: Vec<Option<Elem>>,
    vals: Vec<Elem>,
}

impl Search<'_> {
    fn ok_at(&self, i: usize) -> bool {
        self.checks[i].iter().all(|idx| {
            let code = idx.iter().fold(0u64, |acc, &j| acc * self.order as u64 + self.vals[j] as u64);
            self.allowed.contains(code)
        })
    }

    fn candidates(&self, i: usize) -> std::ops::Range<Elem> {
        match self.pinned[i] {
            Some(v) => v..v + 1,
            None => 0..self.order,
        }
    }
}

/// Looks for a configuration of the given periods containing `p` at its own cells.
pub fn torus_search(
    x: &GroupShiftPresentation,
    p: &Pattern,
    periods: &[usize],
    steps: &mut Steps,
) -> Result<Option<PeriodicConfiguration>, OutOfSteps> {
    let ext = x.extents().expect("dimension at least one");
    let torus = Extents::new(periods.to_vec());
    let vol = torus.volume();
    let mut pinned = vec![None; vol];
    for (c, v) in p.entries() {
        let w: Cell = c.iter().zip(periods).map(|(&a, &k)| a.rem_euclid(k as i64)).collect();
        let i = torus.index(&w);
        match pinned[i] {
            Some(u) if u != v => return Ok(None),
            _ => pinned[i] = Some(v),
        }
    }
    let wcells: Vec<Cell> = ext.cells().collect();
    let windows: Vec<Vec<usize>> = torus
        .cells()
        .map(|t| {
            wcells
                .iter()
                .map(|c| {
                    let s: Cell = c.iter().zip(&t).zip(periods).map(|((a, b), &k)| (a + b).rem_euclid(k as i64)).collect();
                    torus.index(&s)
                })
                .collect()
        })
        .collect();
    let order = x.group().order();
    let found = if order <= MAX_ORDER {
        let mut csp = WindowCsp::new(order, x.allowed(), vol, windows);
        for (i, v) in pinned.iter().enumerate() {
            if let Some(v) = v {
                if !csp.pin(i, *v) {
                    return Ok(None);
                }
            }
        }
        csp.solve(steps)?
    } else {
        let mut checks = vec![Vec::new(); vol];
        for idx in windows {
            let last = *idx.iter().max().expect("nonempty window");
            checks[last].push(idx);
        }
        let mut s = Search { order, allowed: x.allowed(), checks, pinned, vals: vec![0; vol] };
        fill_torus(&mut s, 0, steps)?.then_some(s.vals)
    };
    Ok(found.map(|v| PeriodicConfiguration::new(x.group(), periods.to_vec(), v).expect("torus fits")))
}

fn fill_torus(s: &mut Search, i: usize, steps: &mut Steps) -> Result<bool, OutOfSteps> {
    if i == s.vals.len() {
        return Ok(true);
    }
    for a in s.candidates(i) {
        steps.tick()?;
        s.vals[i] = a;
        if s.ok_at(i) && fill_torus(s, i + 1, steps)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Looks for a configuration with periods `cross` on every axis but `free` and some period
/// along `free`: a closed walk through `p` in the graph whose states are stacks of
/// cross-sections, one window height minus one tall.
pub fn cylinder_search(
    x: &GroupShiftPresentation,
    p: &Pattern,
    free: usize,
    cross: &[usize],
    steps: &mut Steps,
) -> Result<Option<PeriodicConfiguration>, OutOfSteps> {
    let d = x.dim();
    // the free axis goes last
    let perm: Vec<usize> = (0..d).filter(|&a| a != free).chain([free]).collect();
    let (y, q) = if free + 1 == d {
        (x.clone(), p.clone())
    } else {
        (x.permute_axes(&perm).expect("a permutation"), p.permute_axes(&perm))
    };
    let Some(found) = Cylinder::new(&y, &q, cross).and_then(|c| c.search(steps).transpose()).transpose()? else {
        return Ok(None);
    };
    // back to the original axes
    let mut periods = vec![0; d];
    for (i, &a) in perm.iter().enumerate() {
        periods[a] = found.periods()[i];
    }
    let vals = Extents::new(periods.clone())
        .cells()
        .map(|u| found.get(&perm.iter().map(|&a| u[a]).collect::<Cell>()))
        .collect();
    let c = PeriodicConfiguration::new(x.group(), periods, vals).expect("torus fits");
    Ok((x.torus_member(&c) && c.pattern(p.shape()) == *p).then_some(c))
}

/// Transfer graph along the last axis, with the cross-section wrapped on a torus.
struct Cylinder<'a> {
    x: &'a GroupShiftPresentation,
    order: usize,
    /// Cells per cross-section.
    vol: usize,
    /// Cross-sections per state.
    height: usize,
    /// For each cell of a new cross-section, the windows (as strip indices) it completes.
    checks: Vec<Vec<Vec<usize>>>,
    /// Pinned values by cross-section, counted from the lowest row of `p`.
    rows: Vec<Vec<Option<Elem>>>,
    lo: i64,
    cross: Vec<usize>,
}

impl<'a> Cylinder<'a> {
    fn new(x: &'a GroupShiftPresentation, p: &Pattern, cross: &[usize]) -> Option<Self> {
        let d = x.dim();
        let ext = x.window();
        let height = ext[d - 1].saturating_sub(1).max(1);
        let section = Extents::new(cross.to_vec());
        let vol = section.volume();
        let (lo, hi) = p.shape().bounds()?;
        let (lo, hi) = (lo[d - 1], hi[d - 1]);
        let mut rows = vec![vec![None; vol]; (hi - lo + 1) as usize];
        for (c, v) in p.entries() {
            let w: Cell = c[..d - 1].iter().zip(cross).map(|(&a, &k)| a.rem_euclid(k as i64)).collect();
            let slot = &mut rows[(c[d - 1] - lo) as usize][section.index(&w)];
            match *slot {
                Some(u) if u != v => return None,
                _ => *slot = Some(v),
            }
        }
        // windows with their top cross-section in the new row of a strip `height + 1` tall
        let top = (height + 1 - ext[d - 1]) as i64;
        let wcells: Vec<Cell> = Extents::new(ext.to_vec()).cells().collect();
        let mut checks = vec![Vec::new(); vol];
        for a in section.cells() {
            let idx: Vec<usize> = wcells
                .iter()
                .map(|o| {
                    let w: Cell = a.iter().zip(o).zip(cross).map(|((&u, &v), &k)| (u + v).rem_euclid(k as i64)).collect();
                    (top + o[d - 1]) as usize * vol + section.index(&w)
                })
                .collect();
            let last = idx.iter().filter(|&&i| i >= height * vol).max().expect("window reaches the new row") - height * vol;
            checks[last].push(idx);
        }
        Some(Cylinder { x, order: x.group().order(), vol, height, checks, rows, lo, cross: cross.to_vec() })
    }

    /// Cross-sections that may follow `state`, agreeing with `pins` where given.
    fn successors(&self, state: &[Elem], pins: &[Option<Elem>], steps: &mut Steps) -> Result<Vec<Vec<Elem>>, OutOfSteps> {
        let mut strip = state.to_vec();
        strip.resize(state.len() + self.vol, 0);
        let mut out = Vec::new();
        self.fill(&mut strip, 0, pins, &mut out, steps)?;
        Ok(out)
    }

    fn fill(&self, strip: &mut [Elem], j: usize, pins: &[Option<Elem>], out: &mut Vec<Vec<Elem>>, steps: &mut Steps) -> Result<(), OutOfSteps> {
        let base = self.height * self.vol;
        if j == self.vol {
            out.push(strip[base..].to_vec());
            return Ok(());
        }
        let range = match pins[j] {
            Some(v) => v..v + 1,
            None => 0..self.order,
        };
        for a in range {
            steps.tick()?;
            strip[base + j] = a;
            let ok = self.checks[j].iter().all(|idx| {
                self.x.is_allowed_code(idx.iter().fold(0u64, |acc, &i| acc * self.order as u64 + strip[i] as u64))
            });
            if ok {
                self.fill(strip, j + 1, pins, out, steps)?;
            }
        }
        Ok(())
    }

    fn search(&self, steps: &mut Steps) -> Result<Option<PeriodicConfiguration>, OutOfSteps> {
        let free = vec![None; self.vol];
        let pins = |k: usize| self.rows.get(k).unwrap_or(&free);
        // starting stacks, one cross-section at a time
        let mut starts: Vec<Vec<Elem>> = vec![Vec::new()];
        for k in 0..self.height {
            let mut next = Vec::new();
            for s in &starts {
                let mut strip = vec![0; self.vol];
                self.enumerate_row(&mut strip, 0, pins(k), &mut next, s, steps)?;
            }
            starts = next;
        }
        for s0 in starts {
            // the remaining rows of `p`, then any walk back to `s0`
            let mut paths = vec![s0.clone()];
            for k in self.height..self.rows.len() {
                let mut next = Vec::new();
                for path in &paths {
                    let state = &path[path.len() - self.height * self.vol..];
                    for r in self.successors(state, pins(k), steps)? {
                        let mut longer = path.clone();
                        longer.extend(r);
                        next.push(longer);
                    }
                }
                paths = next;
            }
            for path in paths {
                if let Some(tail) = self.walk_back(&path[path.len() - self.height * self.vol..], &s0, steps)? {
                    return Ok(Some(self.torus(&path, &tail)));
                }
            }
        }
        Ok(None)
    }

    /// Cross-sections free of windows among themselves, as stacks extending `prefix`.
    fn enumerate_row(
        &self,
        row: &mut [Elem],
        j: usize,
        pins: &[Option<Elem>],
        out: &mut Vec<Vec<Elem>>,
        prefix: &[Elem],
        steps: &mut Steps,
    ) -> Result<(), OutOfSteps> {
        if j == self.vol {
            let mut s = prefix.to_vec();
            s.extend_from_slice(row);
            out.push(s);
            return Ok(());
        }
        let range = match pins[j] {
            Some(v) => v..v + 1,
            None => 0..self.order,
        };
        for a in range {
            steps.tick()?;
            row[j] = a;
            self.enumerate_row(row, j + 1, pins, out, prefix, steps)?;
        }
        Ok(())
    }

    /// Rows of a nonempty walk from `from` to `to`, by breadth-first search.
    fn walk_back(&self, from: &[Elem], to: &[Elem], steps: &mut Steps) -> Result<Option<Vec<Elem>>, OutOfSteps> {
        let free = vec![None; self.vol];
        let shift = |state: &[Elem], r: &[Elem]| -> Vec<Elem> { state[self.vol..].iter().chain(r).copied().collect() };
        let mut parent: HashMap<Vec<Elem>, (Vec<Elem>, Vec<Elem>)> = HashMap::new();
        let mut queue = VecDeque::from([from.to_vec()]);
        while let Some(state) = queue.pop_front() {
            steps.tick()?;
            for r in self.successors(&state, &free, steps)? {
                let next = shift(&state, &r);
                if parent.contains_key(&next) {
                    continue;
                }
                parent.insert(next.clone(), (state.clone(), r));
                if next == to {
                    let mut rows = Vec::new();
                    let mut at = next;
                    loop {
                        let (prev, r) = parent[&at].clone();
                        rows.push(r);
                        if prev == from {
                            break;
                        }
                        at = prev;
                    }
                    rows.reverse();
                    return Ok(Some(rows.concat()));
                }
                queue.push_back(next);
            }
        }
        Ok(None)
    }

    /// The periodic configuration whose rows, from the lowest row of `p` on, repeat
    /// `path` and `tail` minus the closing stack.
    fn torus(&self, path: &[Elem], tail: &[Elem]) -> PeriodicConfiguration {
        let all: Vec<Elem> = path.iter().chain(tail).copied().collect();
        let t = all.len() / self.vol - self.height;
        let mut periods = self.cross.clone();
        periods.push(t);
        let vals = Extents::new(periods.clone())
            .cells()
            .map(|u| {
                let d = u.len();
                let k = (u[d - 1] - self.lo).rem_euclid(t as i64) as usize;
                let w: Cell = u[..d - 1].to_vec();
                all[k * self.vol + Extents::new(self.cross.clone()).index(&w)]
            })
            .collect();
        PeriodicConfiguration::new(self.x.group(), periods, vals).expect("torus fits")
    }
}

/// True if `p` extends to a locally admissible pattern on `{−n,…,n}^d`.
pub fn box_search(x: &GroupShiftPresentation, p: &Pattern, n: usize, steps: &mut Steps) -> Result<bool, OutOfSteps> {
    let ext = x.extents().expect("dimension at least one");
    let d = x.dim();
    let side = 2 * n + 1;
    let bx = Extents::new(vec![side; d]);
    let mut pinned = vec![None; bx.volume()];
    for (c, v) in p.entries() {
        let s: Cell = c.iter().map(|&a| a + n as i64).collect();
        if !bx.contains(&s) {
            return Ok(true);
        }
        pinned[bx.index(&s)] = Some(v);
    }
    let order = x.group().order();
    if order <= MAX_ORDER {
        let windows: Vec<Vec<usize>> = window_checks(ext, &bx).into_iter().flatten().collect();
        let mut csp = WindowCsp::new(order, x.allowed(), bx.volume(), windows);
        for (i, v) in pinned.iter().enumerate() {
            if let Some(v) = v {
                if !csp.pin(i, *v) {
                    return Ok(false);
                }
            }
        }
        return Ok(csp.solve(steps)?.is_some());
    }
    let checks = window_checks(ext, &bx);
    let slice = bx.volume() / side;
    let mut s = Search { order: x.group().order(), allowed: x.allowed(), checks, pinned, vals: vec![0; bx.volume()] };
    let mut dead = HashSet::new();
    fill_box(&mut s, 0, slice, ext.ext()[0] - 1, &mut dead, steps)
}

fn fill_box(
    s: &mut Search,
    i: usize,
    slice: usize,
    keep: usize,
    dead: &mut HashSet<(usize, Vec<Elem>)>,
    steps: &mut Steps,
) -> Result<bool, OutOfSteps> {
    if i == s.vals.len() {
        return Ok(true);
    }
    let key = (i % slice == 0).then(|| {
        let from = i.saturating_sub(keep * slice);
        (i, s.vals[from..i].to_vec())
    });
    if let Some(k) = &key {
        if dead.contains(k) {
            return Ok(false);
        }
    }
    for a in s.candidates(i) {
        steps.tick()?;
        s.vals[i] = a;
        if s.ok_at(i) && fill_box(s, i + 1, slice, keep, dead, steps)? {
            return Ok(true);
        }
    }
    if let Some(k) = key {
        dead.insert(k);
    }
    Ok(false)
}

/// Outcome of the dovetailed search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dovetail {
    Found(PeriodicConfiguration),
    Refuted(usize),
    Exhausted { max_period: usize, max_radius: Option<usize> },
}

/// Alternates torus attempts of growing period with box attempts of growing radius.
pub fn dovetail(
    x: &GroupShiftPresentation,
    p: &Pattern,
    max_period: usize,
    max_box: usize,
    steps: &mut Steps,
) -> Dovetail {
    let d = x.dim();
    let reach = p
        .shape()
        .cells()
        .iter()
        .flat_map(|c| c.iter().map(|a| a.unsigned_abs() as usize))
        .max()
        .unwrap_or(0);
    let wmax = x.window().iter().copied().max().unwrap_or(1);
    let n0 = reach.max(wmax / 2);
    let last_radius = n0.max(max_box);
    let schedule = period_schedule(d, max_period);
    let mut next_period = 0;
    let mut negative_live = true;
    let mut tried_radius = None;
    for round in 1.. {
        let mut progressed = false;
        while next_period < schedule.len() && *schedule[next_period].iter().max().expect("d ≥ 1") <= round {
            progressed = true;
            let mut sub = steps.child(steps.remaining() / 2 + 1);
            let r = torus_search(x, p, &schedule[next_period], &mut sub);
            steps.used = sub.used;
            next_period += 1;
            if let Ok(Some(c)) = r {
                return Dovetail::Found(c);
            }
            if steps.remaining() == 0 {
                break;
            }
        }
        let n = n0 + round - 1;
        if negative_live && n <= last_radius && steps.remaining() > 0 {
            progressed = true;
            let mut sub = steps.child(steps.remaining() / 2 + 1);
            let r = box_search(x, p, n, &mut sub);
            steps.used = sub.used;
            match r {
                Ok(false) => return Dovetail::Refuted(n),
                Ok(true) => tried_radius = Some(n),
                Err(OutOfSteps) => negative_live = false,
            }
        }
        // after the box, so patterns refuted early never pay for cylinders
        let stacks = (d >= 2)
            .then(|| code_space(x.group().order(), round.pow(d as u32 - 1) * x.window()[d - 1].saturating_sub(1).max(1)))
            .flatten();
        if round <= max_period && stacks.is_some_and(|n| n <= steps.remaining()) {
            progressed = true;
            for free in 0..d {
                let mut sub = steps.child(steps.remaining() / 2 + 1);
                let r = cylinder_search(x, p, free, &vec![round; d - 1], &mut sub);
                steps.used = sub.used;
                if let Ok(Some(c)) = r {
                    return Dovetail::Found(c);
                }
            }
        }
        if !progressed || steps.remaining() == 0 {
            break;
        }
    }
    let max_period = schedule[..next_period].last().map_or(0, |k| *k.iter().max().expect("d ≥ 1"));
    Dovetail::Exhausted { max_period, max_radius: tried_radius }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;

    fn ledrappier() -> GroupShiftPresentation {
        let g = FiniteGroup::cyclic(2);
        let mut ps = Vec::new();
        for c in 0..8u64 {
            let v = crate::shape::decode(2, c, 3);
            if v.iter().sum::<usize>() % 2 == 1 {
                ps.push(Pattern::from_cells(&g, 2, vec![(vec![0, 0], v[0]), (vec![1, 0], v[1]), (vec![0, 1], v[2])]).unwrap());
            }
        }
        GroupShiftPresentation::from_forbidden(&g, 2, &ps).unwrap()
    }

    #[test]
    fn schedule_order() {
        let s = period_schedule(2, 2);
        assert_eq!(s, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
    }

    #[test]
    fn ledrappier_domino_has_a_torus() {
        let x = ledrappier();
        let g = x.group().clone();
        let p = Pattern::from_cells(&g, 2, vec![(vec![0, 0], 1), (vec![1, 0], 1)]).unwrap();
        let mut st = Steps::new(100_000);
        match dovetail(&x, &p, 4, 4, &mut st) {
            Dovetail::Found(c) => {
                assert!(x.torus_member(&c));
                assert_eq!(c.pattern(p.shape()), p);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cylinders_reach_long_periods() {
        // needs a torus of periods 6 and 6; no smaller one contains it
        let x = ledrappier();
        let g = x.group().clone();
        let p = Pattern::from_cells(&g, 2, vec![(vec![0, 0], 0), (vec![0, 1], 0), (vec![1, 0], 0), (vec![1, 1], 1)]).unwrap();
        for free in 0..2 {
            let mut st = Steps::new(1_000_000);
            let c = cylinder_search(&x, &p, free, &[6], &mut st).unwrap().expect("a cylinder of width 6");
            assert!(x.torus_member(&c));
            assert_eq!(c.pattern(p.shape()), p);
        }
        let mut st = Steps::new(1_000_000);
        assert_eq!(cylinder_search(&x, &p, 1, &[4], &mut st), Ok(None));
    }

    #[test]
    fn forbidden_triple_is_refuted() {
        let x = ledrappier();
        let g = x.group().clone();
        let p = Pattern::from_cells(&g, 2, vec![(vec![0, 0], 1), (vec![1, 0], 0), (vec![0, 1], 0)]).unwrap();
        let mut st = Steps::new(100_000);
        assert_eq!(dovetail(&x, &p, 4, 4, &mut st), Dovetail::Refuted(1));
    }
}
