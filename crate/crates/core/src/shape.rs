//! Cells, shapes, patterns and totally periodic configurations.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup};

/// A point of `Z^d`.
pub type Cell = Vec<i64>;

/// Finite set of cells in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    dim: usize,
    cells: Vec<Cell>,
}

impl Shape {
    pub fn new(dim: usize, mut cells: Vec<Cell>) -> Result<Self> {
        if let Some(c) = cells.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: c.len() });
        }
        cells.sort();
        let before = cells.len();
        cells.dedup();
        if cells.len() != before {
            return Err(Error::Invalid("duplicate cells in shape".into()));
        }
        Ok(Shape { dim, cells })
    }

    pub fn empty(dim: usize) -> Self {
        Shape { dim, cells: Vec::new() }
    }

    /// The box `lo + [0, ext)` in lexicographic order.
    pub fn boxed(lo: &[i64], ext: &[usize]) -> Self {
        let cells = Extents::new(ext.to_vec())
            .cells()
            .map(|c| c.iter().zip(lo).map(|(x, l)| x + l).collect())
            .collect();
        Shape { dim: lo.len(), cells }
    }

    /// One-dimensional interval `{lo, …, hi}`.
    pub fn interval(lo: i64, hi: i64) -> Self {
        Shape { dim: 1, cells: (lo..=hi).map(|x| vec![x]).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index_of(&self, c: &[i64]) -> Option<usize> {
        self.cells.binary_search_by(|x| x.as_slice().cmp(c)).ok()
    }

    /// Componentwise minimum and maximum.
    pub fn bounds(&self) -> Option<(Cell, Cell)> {
        let first = self.cells.first()?;
        let (mut lo, mut hi) = (first.clone(), first.clone());
        for c in &self.cells {
            for i in 0..self.dim {
                lo[i] = lo[i].min(c[i]);
                hi[i] = hi[i].max(c[i]);
            }
        }
        Some((lo, hi))
    }

    /// Extents of the bounding box (all ones for the empty shape).
    pub fn bounding_extents(&self) -> Vec<usize> {
        match self.bounds() {
            Some((lo, hi)) => lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect(),
            None => vec![1; self.dim],
        }
    }

    /// Shape shifted by `-t`.
    pub fn translate(&self, t: &[i64]) -> Shape {
        let cells = self
            .cells
            .iter()
            .map(|c| c.iter().zip(t).map(|(x, s)| x - s).collect())
            .collect();
        Shape { dim: self.dim, cells }
    }

    pub fn union(&self, other: &Shape) -> Shape {
        let mut cells = self.cells.clone();
        cells.extend(other.cells.iter().cloned());
        cells.sort();
        cells.dedup();
        Shape { dim: self.dim, cells }
    }

    /// Minkowski sum `D + N`.
    pub fn sum(&self, other: &Shape) -> Shape {
        let mut cells: Vec<Cell> = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                cells.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        cells.sort();
        cells.dedup();
        Shape { dim: self.dim, cells }
    }

    /// Reorders coordinates: new axis `i` is old axis `perm[i]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Shape {
        let cells = self.cells.iter().map(|c| perm.iter().map(|&p| c[p]).collect()).collect();
        Shape::new(self.dim, cells).expect("permutation keeps cells distinct")
    }
}

/// Extents of an origin-anchored box with row-major (axis 1 slowest) indexing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Extents {
    ext: Vec<usize>,
    strides: Vec<usize>,
}

impl Extents {
    pub fn new(ext: Vec<usize>) -> Self {
        let mut strides = vec![1; ext.len()];
        for i in (0..ext.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * ext[i + 1];
        }
        Extents { ext, strides }
    }

    pub fn ext(&self) -> &[usize] {
        &self.ext
    }

    pub fn dim(&self) -> usize {
        self.ext.len()
    }

    pub fn volume(&self) -> usize {
        self.ext.iter().product()
    }

    pub fn index(&self, c: &[i64]) -> usize {
        c.iter().zip(&self.strides).map(|(&x, &s)| x as usize * s).sum()
    }

    pub fn coords(&self, mut i: usize) -> Cell {
        let mut out = vec![0; self.ext.len()];
        for (k, &s) in self.strides.iter().enumerate() {
            out[k] = (i / s) as i64;
            i %= s;
        }
        out
    }

    pub fn contains(&self, c: &[i64]) -> bool {
        c.iter().zip(&self.ext).all(|(&x, &e)| x >= 0 && (x as usize) < e)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.volume()).map(move |i| self.coords(i))
    }

    pub fn shape(&self) -> Shape {
        Shape::boxed(&vec![0; self.dim()], &self.ext)
    }
}

/// Encodes a sequence of elements in mixed radix, first entry most significant.
pub fn encode(order: usize, values: &[Elem]) -> u64 {
    values.iter().fold(0u64, |acc, &v| acc * order as u64 + v as u64)
}

pub fn decode(order: usize, mut code: u64, len: usize) -> Vec<Elem> {
    let mut out = vec![0; len];
    for i in (0..len).rev() {
        out[i] = (code % order as u64) as Elem;
        code /= order as u64;
    }
    out
}

/// `order^len`, or `None` past `u64`.
pub fn code_space(order: usize, len: usize) -> Option<u64> {
    (order as u64).checked_pow(len as u32)
}

/// An assignment of group elements to the cells of a shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    group: FiniteGroup,
    shape: Shape,
    values: Vec<Elem>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    Product,
    Inverse,
}

impl Pattern {
    pub fn new(group: &FiniteGroup, shape: Shape, values: Vec<Elem>) -> Result<Self> {
        if shape.len() != values.len() {
            return Err(Error::ShapeMismatch);
        }
        if values.iter().any(|&v| v >= group.order()) {
            return Err(Error::Invalid("pattern value out of range".into()));
        }
        Ok(Pattern { group: group.clone(), shape, values })
    }

    /// Builds a pattern from unsorted `(cell, value)` pairs.
    pub fn from_cells(group: &FiniteGroup, dim: usize, entries: Vec<(Cell, Elem)>) -> Result<Self> {
        let map: BTreeMap<Cell, Elem> = entries.iter().cloned().collect();
        if map.len() != entries.len() {
            return Err(Error::Invalid("duplicate cells in pattern".into()));
        }
        let shape = Shape::new(dim, map.keys().cloned().collect())?;
        Pattern::new(group, shape, map.into_values().collect())
    }

    /// One-dimensional word on cells `start, start+1, …`.
    pub fn word(group: &FiniteGroup, start: i64, values: &[Elem]) -> Self {
        let shape = Shape::interval(start, start + values.len() as i64 - 1);
        Pattern::new(group, shape, values.to_vec()).expect("word fits its interval")
    }

    /// Identity pattern on a shape.
    pub fn identity(group: &FiniteGroup, shape: Shape) -> Self {
        let values = vec![group.identity(); shape.len()];
        Pattern { group: group.clone(), shape, values }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn values(&self) -> &[Elem] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn get(&self, c: &[i64]) -> Option<Elem> {
        self.shape.index_of(c).map(|i| self.values[i])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Cell, Elem)> {
        self.shape.cells().iter().zip(self.values.iter().copied())
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().all(|&v| v == self.group.identity())
    }

    /// Cellwise product `p·q` or cellwise inverse `p⁻¹`.
    pub fn combine(kind: Combine, p: &Pattern, q: Option<&Pattern>) -> Result<Pattern> {
        let g = &p.group;
        match kind {
            Combine::Inverse => Ok(Pattern {
                group: g.clone(),
                shape: p.shape.clone(),
                values: p.values.iter().map(|&a| g.inv(a)).collect(),
            }),
            Combine::Product => {
                let q = q.ok_or(Error::ShapeMismatch)?;
                if q.shape != p.shape || q.group != p.group {
                    return Err(Error::ShapeMismatch);
                }
                Ok(Pattern {
                    group: g.clone(),
                    shape: p.shape.clone(),
                    values: p.values.iter().zip(&q.values).map(|(&a, &b)| g.mul(a, b)).collect(),
                })
            }
        }
    }

    pub fn mul(&self, other: &Pattern) -> Result<Pattern> {
        Pattern::combine(Combine::Product, self, Some(other))
    }

    pub fn inv(&self) -> Pattern {
        Pattern::combine(Combine::Inverse, self, None).expect("inverse never fails")
    }

    /// Pattern seen after pulling cell `t` to the origin.
    pub fn translate(&self, t: &[i64]) -> Pattern {
        Pattern { group: self.group.clone(), shape: self.shape.translate(t), values: self.values.clone() }
    }

    /// Restriction to a sub-shape; `None` if the sub-shape is not contained.
    pub fn restrict(&self, sub: &Shape) -> Option<Pattern> {
        let values = sub.cells().iter().map(|c| self.get(c)).collect::<Option<Vec<_>>>()?;
        Some(Pattern { group: self.group.clone(), shape: sub.clone(), values })
    }

    pub fn map_group(&self, target: &FiniteGroup, f: impl Fn(Elem) -> Elem) -> Pattern {
        Pattern { group: target.clone(), shape: self.shape.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn permute_axes(&self, perm: &[usize]) -> Pattern {
        let entries = self
            .entries()
            .map(|(c, v)| (perm.iter().map(|&p| c[p]).collect(), v))
            .collect();
        Pattern::from_cells(&self.group, self.dim(), entries).expect("permutation keeps cells distinct")
    }

    /// Lifts a pattern over `base^n` in dimension `d−1` to a pattern over `base`
    /// on `{1,…,n} × D` in dimension `d`.
    pub fn hat_lift(&self, base: &FiniteGroup) -> Result<Pattern> {
        let n = power_exponent(&self.group, base).ok_or(Error::NotPowerAlphabet)?;
        let mut entries = Vec::with_capacity(n * self.values.len());
        for (cell, v) in self.entries() {
            let parts = if n == 1 { vec![v] } else { self.group.decode_factors(v) };
            for (i, &x) in parts.iter().enumerate() {
                let mut c = Vec::with_capacity(cell.len() + 1);
                c.push(i as i64 + 1);
                c.extend_from_slice(cell);
                entries.push((c, x));
            }
        }
        Pattern::from_cells(base, self.dim() + 1, entries)
    }

    /// Inverse of [`Pattern::hat_lift`]: reads the first coordinate `1..=n` as a tuple index.
    pub fn unlift(&self, power: &FiniteGroup) -> Result<Pattern> {
        let n = power_exponent(power, &self.group).ok_or(Error::NotPowerAlphabet)?;
        let d = self.dim();
        if d == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let mut slices: BTreeMap<Cell, Vec<Option<Elem>>> = BTreeMap::new();
        for (c, v) in self.entries() {
            let i = c[0] - 1;
            if i < 0 || i as usize >= n {
                return Err(Error::ShapeMismatch);
            }
            slices.entry(c[1..].to_vec()).or_insert_with(|| vec![None; n])[i as usize] = Some(v);
        }
        let mut entries = Vec::new();
        for (cell, parts) in slices {
            let parts: Vec<Elem> = parts.into_iter().collect::<Option<_>>().ok_or(Error::ShapeMismatch)?;
            let v = if n == 1 { parts[0] } else { power.encode_factors(&parts) };
            entries.push((cell, v));
        }
        Pattern::from_cells(power, d - 1, entries)
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .entries()
            .map(|(c, v)| format!("{:?}:{}", c, self.group.label(v)))
            .collect();
        format!("{{{}}}", parts.join(" "))
    }
}

/// `Some(n)` when `g` is `base^n` (with `base^1 = base`).
pub fn power_exponent(g: &FiniteGroup, base: &FiniteGroup) -> Option<usize> {
    if g == base {
        return Some(1);
    }
    let fs = g.factors();
    if fs.len() > 1 && fs.iter().all(|f| f == base) {
        Some(fs.len())
    } else {
        None
    }
}

/// Totally periodic configuration with periods `k_i e_i`, stored on its fundamental box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicConfiguration {
    group: FiniteGroup,
    periods: Vec<usize>,
    fundamental: Vec<Elem>,
    ext: Extents,
}

impl PeriodicConfiguration {
    pub fn new(group: &FiniteGroup, periods: Vec<usize>, fundamental: Vec<Elem>) -> Result<Self> {
        if periods.iter().any(|&k| k == 0) {
            return Err(Error::Invalid("periods must be positive".into()));
        }
        let ext = Extents::new(periods.clone());
        if ext.volume() != fundamental.len() {
            return Err(Error::ShapeMismatch);
        }
        if fundamental.iter().any(|&v| v >= group.order()) {
            return Err(Error::Invalid("configuration value out of range".into()));
        }
        Ok(PeriodicConfiguration { group: group.clone(), periods, fundamental, ext })
    }

    pub fn uniform(group: &FiniteGroup, dim: usize, value: Elem) -> Self {
        PeriodicConfiguration::new(group, vec![1; dim], vec![value]).expect("uniform configuration")
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn periods(&self) -> &[usize] {
        &self.periods
    }

    pub fn fundamental(&self) -> &[Elem] {
        &self.fundamental
    }

    pub fn get(&self, c: &[i64]) -> Elem {
        let wrapped: Cell = c.iter().zip(&self.periods).map(|(&x, &k)| x.rem_euclid(k as i64)).collect();
        self.fundamental[self.ext.index(&wrapped)]
    }

    pub fn is_identity(&self) -> bool {
        self.fundamental.iter().all(|&v| v == self.group.identity())
    }

    /// `τ^t`: the configuration with cell `t` pulled to the origin.
    pub fn translate(&self, t: &[i64]) -> PeriodicConfiguration {
        let fundamental = self
            .ext
            .cells()
            .map(|c| {
                let s: Cell = c.iter().zip(t).map(|(x, y)| x + y).collect();
                self.get(&s)
            })
            .collect();
        PeriodicConfiguration { fundamental, ..self.clone() }
    }

    /// Restriction to a shape.
    pub fn pattern(&self, shape: &Shape) -> Pattern {
        let values = shape.cells().iter().map(|c| self.get(c)).collect();
        Pattern::new(&self.group, shape.clone(), values).expect("values match shape")
    }

    /// True if `p` occurs at some translate.
    pub fn contains_pattern(&self, p: &Pattern) -> bool {
        if p.group() != &self.group {
            return false;
        }
        self.ext.cells().any(|t| {
            p.entries().all(|(c, v)| {
                let s: Cell = c.iter().zip(&t).map(|(x, y)| x + y).collect();
                self.get(&s) == v
            })
        })
    }

    pub fn cellwise(&self, other: &PeriodicConfiguration, f: impl Fn(Elem, Elem) -> Elem) -> PeriodicConfiguration {
        let periods: Vec<usize> = self.periods.iter().zip(&other.periods).map(|(&a, &b)| lcm(a, b)).collect();
        let ext = Extents::new(periods.clone());
        let fundamental = ext.cells().map(|c| f(self.get(&c), other.get(&c))).collect();
        PeriodicConfiguration { group: self.group.clone(), periods, fundamental, ext }
    }

    /// Rows of a one- or two-dimensional configuration, labels joined by spaces.
    pub fn describe(&self) -> String {
        let labels: Vec<String> = self.fundamental.iter().map(|&v| self.group.label(v)).collect();
        format!("periods {:?}: [{}]", self.periods, labels.join(" "))
    }
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z2() -> FiniteGroup {
        FiniteGroup::cyclic(2)
    }

    #[test]
    fn combine_over_z2_and_s3() {
        let p = Pattern::word(&z2(), 0, &[0, 1]);
        let q = Pattern::word(&z2(), 0, &[1, 1]);
        assert_eq!(p.mul(&q).unwrap().values(), &[1, 0]);
        let id = Pattern::identity(&z2(), Shape::interval(0, 2));
        assert_eq!(id.inv(), id);
        let s3 = FiniteGroup::s3();
        let r = Pattern::word(&s3, 0, &[1, 3, 5]);
        assert!(r.mul(&r.inv()).unwrap().is_identity());
        let other = Pattern::word(&z2(), 1, &[0, 1]);
        assert_eq!(p.mul(&other), Err(Error::ShapeMismatch));
    }

    #[test]
    fn translation() {
        let p = Pattern::word(&z2(), 0, &[0, 1]);
        let t = p.translate(&[1]);
        assert_eq!(t.shape().cells(), &[vec![-1], vec![0]]);
        assert_eq!(t.values(), p.values());
        assert_eq!(p.translate(&[0]), p);
        assert_eq!(t.translate(&[-1]), p);
    }

    #[test]
    fn hat_lift_examples() {
        let g2 = z2().pow(2).unwrap();
        let ab = g2.encode_factors(&[1, 0]);
        let p0 = Pattern::new(&g2, Shape::new(0, vec![vec![]]).unwrap(), vec![ab]).unwrap();
        let l = p0.hat_lift(&z2()).unwrap();
        assert_eq!(l.shape().cells(), &[vec![1], vec![2]]);
        assert_eq!(l.values(), &[1, 0]);
        // n = 1 only reindexes
        let w = Pattern::word(&z2(), 0, &[1, 0]);
        let lw = w.hat_lift(&z2()).unwrap();
        assert_eq!(lw.values(), &[1, 0]);
        assert_eq!(lw.shape().cells(), &[vec![1, 0], vec![1, 1]]);
        // 1D over Z2^2 on {0,1} with (0,1),(1,0) gives columns 01 and 10
        let p = Pattern::word(&g2, 0, &[g2.encode_factors(&[0, 1]), g2.encode_factors(&[1, 0])]);
        let h = p.hat_lift(&z2()).unwrap();
        assert_eq!(h.get(&[1, 0]), Some(0));
        assert_eq!(h.get(&[2, 0]), Some(1));
        assert_eq!(h.get(&[1, 1]), Some(1));
        assert_eq!(h.get(&[2, 1]), Some(0));
        assert_eq!(Pattern::word(&FiniteGroup::cyclic(4), 0, &[1]).hat_lift(&z2()), Err(Error::NotPowerAlphabet));
    }

    #[test]
    fn periodic_configuration_access() {
        let c = PeriodicConfiguration::new(&z2(), vec![2], vec![0, 1]).unwrap();
        assert_eq!(c.get(&[-1]), 1);
        assert_eq!(c.get(&[4]), 0);
        assert!(c.contains_pattern(&Pattern::word(&z2(), 7, &[1, 0, 1])));
        assert!(!c.contains_pattern(&Pattern::word(&z2(), 0, &[1, 1])));
        assert_eq!(c.translate(&[1]).fundamental(), &[1, 0]);
    }

    proptest! {
        #[test]
        fn lift_then_unlift_is_identity(vals in proptest::collection::vec(0usize..8, 1..5)) {
            let g3 = z2().pow(3).unwrap();
            let p = Pattern::word(&g3, -1, &vals);
            let lifted = p.hat_lift(&z2()).unwrap();
            prop_assert_eq!(lifted.len_cells(), 3 * vals.len());
            prop_assert_eq!(lifted.unlift(&g3).unwrap(), p);
        }

        #[test]
        fn patterns_on_a_shape_form_a_group(a in proptest::collection::vec(0usize..6, 3), b in proptest::collection::vec(0usize..6, 3), c in proptest::collection::vec(0usize..6, 3)) {
            let s3 = FiniteGroup::s3();
            let (p, q, r) = (Pattern::word(&s3, 0, &a), Pattern::word(&s3, 0, &b), Pattern::word(&s3, 0, &c));
            prop_assert_eq!(p.mul(&q).unwrap().mul(&r).unwrap(), p.mul(&q.mul(&r).unwrap()).unwrap());
            // agrees with the power group's multiplication
            let g = s3.pow(3).unwrap();
            let prod = g.mul(g.encode_factors(&a), g.encode_factors(&b));
            prop_assert_eq!(g.decode_factors(prod), p.mul(&q).unwrap().values().to_vec());
        }
    }

    impl Pattern {
        fn len_cells(&self) -> usize {
            self.shape.len()
        }
    }
}
