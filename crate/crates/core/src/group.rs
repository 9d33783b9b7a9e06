//! Finite groups given by Cayley tables, direct products and power groups.
//!
//! Elements are dense indices `0..order`. A product group encodes its
//! elements in mixed radix over its direct factors, first factor most
//! significant, so nested products and flat factor lists agree on indices.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Element index inside a [`FiniteGroup`].
pub type Elem = usize;

/// Products up to this order get a materialized Cayley table.
pub const DEFAULT_TABLE_CAP: usize = 256;

/// Default bound on the order of a power group.
pub const DEFAULT_POWER_LIMIT: u128 = 1 << 40;

#[derive(Debug)]
struct Table {
    mul: Vec<u32>,
    inv: Vec<u32>,
}

#[derive(Debug)]
enum Kind {
    Atomic { labels: Vec<String> },
    Product(Vec<FiniteGroup>),
}

#[derive(Debug)]
struct GroupData {
    name: String,
    order: usize,
    identity: Elem,
    abelian: bool,
    kind: Kind,
    table: Option<Table>,
    /// Flat list of atomic factors (empty for atomic groups).
    flat: Vec<FiniteGroup>,
}

/// A validated finite group. Cheap to clone.
#[derive(Clone)]
pub struct FiniteGroup(Arc<GroupData>);

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.0.name, self.0.order)
    }
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.order() != other.order() {
            return false;
        }
        match (self.is_atomic(), other.is_atomic()) {
            (true, true) => {
                let (a, b) = (self.table(), other.table());
                a.mul == b.mul
            }
            _ => {
                let (fa, fb) = (self.flat_factors(), other.flat_factors());
                fa.len() == fb.len()
                    && fa.len() > 1
                    && fa.iter().zip(fb).all(|(x, y)| x == y)
            }
        }
    }
}

impl Eq for FiniteGroup {}

impl FiniteGroup {
    /// Validates a Cayley table given over a label set.
    ///
    /// Checks identity, inverses and associativity exhaustively; errors name
    /// the offending element or triple.
    pub fn from_table(name: &str, labels: Vec<String>, mul: Vec<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty label set".into()));
        }
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != n {
            return Err(Error::InvalidGroup("labels are not distinct".into()));
        }
        if mul.len() != n || mul.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidGroup(format!("table is not {n}x{n}")));
        }
        if let Some(&bad) = mul.iter().flatten().find(|&&v| v >= n) {
            return Err(Error::InvalidGroup(format!("table entry {bad} out of range")));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| mul[e][a] == a && mul[a][e] == a))
            .ok_or(Error::NoIdentity)?;
        let mut inv = vec![0u32; n];
        for a in 0..n {
            let b = (0..n)
                .find(|&b| mul[a][b] == identity && mul[b][a] == identity)
                .ok_or_else(|| Error::NoInverse(labels[a].clone()))?;
            inv[a] = b as u32;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::NonAssociative(
                            labels[a].clone(),
                            labels[b].clone(),
                            labels[c].clone(),
                        ));
                    }
                }
            }
        }
        let abelian = (0..n).all(|a| (0..n).all(|b| mul[a][b] == mul[b][a]));
        let flat_mul = mul.iter().flatten().map(|&v| v as u32).collect();
        Ok(Self::atomic(name, labels, identity, abelian, Table { mul: flat_mul, inv }))
    }

    fn atomic(name: &str, labels: Vec<String>, identity: Elem, abelian: bool, table: Table) -> Self {
        let data = GroupData {
            name: name.to_string(),
            order: labels.len(),
            identity,
            abelian,
            kind: Kind::Atomic { labels },
            table: Some(table),
            flat: Vec::new(),
        };
        FiniteGroup(Arc::new(data))
    }

    /// Cyclic group of order `n` with labels `0..n`.
    pub fn cyclic(n: usize) -> Self {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(&format!("Z{n}"), labels, mul).expect("cyclic group table")
    }

    /// Trivial group of order one.
    pub fn trivial() -> Self {
        Self::from_table("1", vec!["e".into()], vec![vec![0]]).expect("trivial group")
    }

    /// Symmetric group on three points, elements as permutations of `012`.
    pub fn s3() -> Self {
        let perms = permutations(3);
        Self::from_permutations("S3", &perms)
    }

    /// Dihedral group of order 8 (symmetries of a square).
    pub fn d4() -> Self {
        let r = [1, 2, 3, 0];
        let s = [0, 3, 2, 1];
        let perms = generate_permutations(&[r.to_vec(), s.to_vec()]);
        Self::from_permutations("D4", &perms)
    }

    /// Quaternion group with labels `1,-1,i,-i,j,-j,k,-k`.
    pub fn q8() -> Self {
        // (sign, unit) with unit in {1,i,j,k}
        let units = ["1", "i", "j", "k"];
        let unit_mul = |a: usize, b: usize| -> (bool, usize) {
            // returns (negate, unit)
            match (a, b) {
                (0, x) | (x, 0) => (false, x),
                (x, y) if x == y => (true, 0),
                (1, 2) => (false, 3),
                (2, 1) => (true, 3),
                (2, 3) => (false, 1),
                (3, 2) => (true, 1),
                (3, 1) => (false, 2),
                (1, 3) => (true, 2),
                _ => unreachable!(),
            }
        };
        let index = |neg: bool, u: usize| 2 * u + usize::from(neg);
        let mut labels = Vec::new();
        for u in units {
            labels.push(u.to_string());
            labels.push(format!("-{u}"));
        }
        let mut mul = vec![vec![0; 8]; 8];
        for a in 0..8 {
            for b in 0..8 {
                let (n, u) = unit_mul(a / 2, b / 2);
                let neg = (a % 2 == 1) ^ (b % 2 == 1) ^ n;
                mul[a][b] = index(neg, u);
            }
        }
        Self::from_table("Q8", labels, mul).expect("Q8 table")
    }

    /// Looks up a shipped preset by name.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "Z2" => Some(Self::cyclic(2)),
            "Z3" => Some(Self::cyclic(3)),
            "Z4" => Some(Self::cyclic(4)),
            "Z2xZ2" | "Z2×Z2" | "V4" => Some(Self::cyclic(2).direct_product(&Self::cyclic(2))),
            "S3" => Some(Self::s3()),
            "D4" => Some(Self::d4()),
            "Q8" => Some(Self::q8()),
            "1" | "trivial" => Some(Self::trivial()),
            _ => match name.strip_prefix('Z')?.parse::<usize>() {
                Ok(n) if (1..=256).contains(&n) => Some(Self::cyclic(n)),
                _ => None,
            },
        }
    }

    fn from_permutations(name: &str, perms: &[Vec<usize>]) -> Self {
        let labels: Vec<String> = perms
            .iter()
            .map(|p| p.iter().map(|d| d.to_string()).collect())
            .collect();
        let find = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed set");
        let mul = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| find(&b.iter().map(|&i| a[i]).collect()))
                    .collect()
            })
            .collect();
        Self::from_table(name, labels, mul).expect("permutation group table")
    }

    /// Componentwise product of the given factors.
    pub fn product(factors: Vec<FiniteGroup>) -> Result<Self> {
        Self::product_with_caps(factors, DEFAULT_POWER_LIMIT, DEFAULT_TABLE_CAP)
    }

    fn product_with_caps(factors: Vec<FiniteGroup>, limit: u128, table_cap: usize) -> Result<Self> {
        let order: u128 = factors.iter().map(|f| f.order() as u128).product();
        if order > limit || order > usize::MAX as u128 / 2 {
            return Err(Error::PowerTooLarge { order, limit });
        }
        let order = order as usize;
        let name = factors.iter().map(|f| f.name().to_string()).collect::<Vec<_>>().join("x");
        let abelian = factors.iter().all(|f| f.is_abelian());
        let mut flat = Vec::new();
        for f in &factors {
            flat.extend(f.flat_factors().iter().cloned());
        }
        let mut g = FiniteGroup(Arc::new(GroupData {
            name,
            order,
            identity: 0,
            abelian,
            kind: Kind::Product(factors),
            table: None,
            flat,
        }));
        let identity = g.encode_factors(&g.factors().iter().map(|f| f.identity()).collect::<Vec<_>>());
        Arc::get_mut(&mut g.0).expect("fresh arc").identity = identity;
        if order <= table_cap {
            let mut mul = vec![0u32; order * order];
            for a in 0..order {
                for b in 0..order {
                    mul[a * order + b] = g.mul(a, b) as u32;
                }
            }
            let inv = (0..order).map(|a| g.inv(a) as u32).collect();
            Arc::get_mut(&mut g.0).expect("fresh arc").table = Some(Table { mul, inv });
        }
        Ok(g)
    }

    /// `G1 × G2`.
    pub fn direct_product(&self, other: &FiniteGroup) -> Self {
        Self::product(vec![self.clone(), other.clone()]).expect("product of two groups fits")
    }

    /// `G^n`, refusing orders above `limit`. `G^1` is `G` itself.
    pub fn power(&self, n: usize, limit: u128) -> Result<Self> {
        if n == 0 {
            return Ok(Self::trivial());
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let order = (self.order() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if order > limit {
            return Err(Error::PowerTooLarge { order, limit });
        }
        Self::product_with_caps(vec![self.clone(); n], limit, DEFAULT_TABLE_CAP)
    }

    /// `G^n` under the default limit.
    pub fn pow(&self, n: usize) -> Result<Self> {
        self.power(n, DEFAULT_POWER_LIMIT)
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn identity(&self) -> Elem {
        self.0.identity
    }

    pub fn is_abelian(&self) -> bool {
        self.0.abelian
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.0.kind, Kind::Atomic { .. })
    }

    fn table(&self) -> &Table {
        self.0.table.as_ref().expect("atomic groups carry a table")
    }

    /// Direct factors (a single-element list for an atomic group).
    pub fn factors(&self) -> &[FiniteGroup] {
        match &self.0.kind {
            Kind::Atomic { .. } => std::slice::from_ref(self),
            Kind::Product(f) => f,
        }
    }

    /// Atomic factors in order.
    pub fn flat_factors(&self) -> &[FiniteGroup] {
        if self.is_atomic() {
            std::slice::from_ref(self)
        } else {
            &self.0.flat
        }
    }

    pub fn flat_len(&self) -> usize {
        self.flat_factors().len()
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if let Some(t) = &self.0.table {
            return t.mul[a * self.0.order + b] as Elem;
        }
        let fs = self.factors();
        let (da, db) = (self.decode_factors(a), self.decode_factors(b));
        let prod: Vec<Elem> = fs.iter().enumerate().map(|(i, f)| f.mul(da[i], db[i])).collect();
        self.encode_factors(&prod)
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        if let Some(t) = &self.0.table {
            return t.inv[a] as Elem;
        }
        let fs = self.factors();
        let da = self.decode_factors(a);
        let v: Vec<Elem> = fs.iter().enumerate().map(|(i, f)| f.inv(da[i])).collect();
        self.encode_factors(&v)
    }

    /// Splits an element into its direct-factor components.
    pub fn decode_factors(&self, mut a: Elem) -> Vec<Elem> {
        let fs = self.factors();
        let mut out = vec![0; fs.len()];
        for i in (0..fs.len()).rev() {
            let o = fs[i].order();
            out[i] = a % o;
            a /= o;
        }
        out
    }

    pub fn encode_factors(&self, parts: &[Elem]) -> Elem {
        self.factors()
            .iter()
            .zip(parts)
            .fold(0, |acc, (f, &p)| acc * f.order() + p)
    }

    /// Splits an element into atomic components.
    pub fn decode_flat(&self, mut a: Elem) -> Vec<Elem> {
        let fs = self.flat_factors();
        let mut out = vec![0; fs.len()];
        for i in (0..fs.len()).rev() {
            let o = fs[i].order();
            out[i] = a % o;
            a /= o;
        }
        out
    }

    pub fn encode_flat(&self, parts: &[Elem]) -> Elem {
        self.flat_factors()
            .iter()
            .zip(parts)
            .fold(0, |acc, (f, &p)| acc * f.order() + p)
    }

    /// Projection onto direct factor `i`.
    pub fn project_factor(&self, a: Elem, i: usize) -> Elem {
        self.decode_factors(a)[i]
    }

    pub fn label(&self, a: Elem) -> String {
        match &self.0.kind {
            Kind::Atomic { labels } => labels[a].clone(),
            Kind::Product(fs) => {
                let parts = self.decode_factors(a);
                let inner: Vec<String> = fs.iter().zip(parts).map(|(f, p)| f.label(p)).collect();
                format!("({})", inner.join(","))
            }
        }
    }

    /// Parses a label produced by [`FiniteGroup::label`].
    pub fn parse_label(&self, s: &str) -> Option<Elem> {
        let s = s.trim();
        match &self.0.kind {
            Kind::Atomic { labels } => labels.iter().position(|l| l == s),
            Kind::Product(fs) => {
                let inner = s.strip_prefix('(')?.strip_suffix(')')?;
                let parts = split_top_level(inner);
                if parts.len() != fs.len() {
                    return None;
                }
                let mut v = Vec::with_capacity(fs.len());
                for (f, p) in fs.iter().zip(parts) {
                    v.push(f.parse_label(p)?);
                }
                Some(self.encode_factors(&v))
            }
        }
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.order()
    }

    /// Power `a^k` for any integer `k`.
    pub fn pow_elem(&self, a: Elem, k: i64) -> Elem {
        let base = if k < 0 { self.inv(a) } else { a };
        let mut acc = self.identity();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(acc, base);
        }
        acc
    }

    /// Smallest subgroup containing `seed`.
    pub fn subgroup_closure(&self, seed: &[Elem]) -> Subgroup {
        let members = closure(self, &[self.identity()], seed);
        Subgroup { parent: self.clone(), members }
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup { parent: self.clone(), members: self.elements().collect() }
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn generate_permutations(gens: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let id: Vec<usize> = (0..gens[0].len()).collect();
    let mut seen = BTreeSet::from([id.clone()]);
    let mut frontier = vec![id];
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q: Vec<usize> = g.iter().map(|&i| p[i]).collect();
            if seen.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    seen.into_iter().collect()
}

/// BFS closure of `start ∪ gens` under multiplication by generators.
fn closure(g: &FiniteGroup, start: &[Elem], gens: &[Elem]) -> Vec<Elem> {
    let mut seen: BTreeSet<Elem> = start.iter().copied().collect();
    seen.insert(g.identity());
    let mut gens: Vec<Elem> = gens.to_vec();
    gens.extend(start.iter().copied());
    let mut queue: Vec<Elem> = seen.iter().copied().collect();
    while let Some(a) = queue.pop() {
        for &s in &gens {
            let b = g.mul(a, s);
            if seen.insert(b) {
                queue.push(b);
            }
        }
    }
    seen.into_iter().collect()
}

/// A subgroup, stored as the sorted set of member indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    parent: FiniteGroup,
    members: Vec<Elem>,
}

impl Subgroup {
    /// Checks closure and builds a subgroup; returns `None` if `members` is not one.
    pub fn from_members(parent: &FiniteGroup, members: impl IntoIterator<Item = Elem>) -> Option<Self> {
        let set: BTreeSet<Elem> = members.into_iter().collect();
        if !set.contains(&parent.identity()) {
            return None;
        }
        for &a in &set {
            if !set.contains(&parent.inv(a)) {
                return None;
            }
            for &b in &set {
                if !set.contains(&parent.mul(a, b)) {
                    return None;
                }
            }
        }
        Some(Subgroup { parent: parent.clone(), members: set.into_iter().collect() })
    }

    /// Trusted constructor for sets already known to be subgroups.
    pub(crate) fn from_sorted_unchecked(parent: &FiniteGroup, members: Vec<Elem>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Subgroup { parent: parent.clone(), members }
    }

    pub fn trivial(parent: &FiniteGroup) -> Self {
        Subgroup { parent: parent.clone(), members: vec![parent.identity()] }
    }

    pub fn parent(&self) -> &FiniteGroup {
        &self.parent
    }

    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, a: Elem) -> bool {
        self.members.binary_search(&a).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&a| other.contains(a))
    }

    /// Image under an element map into `target`, which must be a homomorphism on this subgroup.
    pub fn image(&self, target: &FiniteGroup, hom: impl Fn(Elem) -> Elem) -> Result<Subgroup> {
        let g = &self.parent;
        for &a in &self.members {
            for &b in &self.members {
                if hom(g.mul(a, b)) != target.mul(hom(a), hom(b)) {
                    return Err(Error::NotHomomorphism(g.label(a), g.label(b)));
                }
            }
        }
        Ok(self.image_unchecked(target, hom))
    }

    /// Image without the homomorphism check (for projections known to be homomorphisms).
    pub fn image_unchecked(&self, target: &FiniteGroup, hom: impl Fn(Elem) -> Elem) -> Subgroup {
        let set: BTreeSet<Elem> = self.members.iter().map(|&a| hom(a)).collect();
        Subgroup { parent: target.clone(), members: set.into_iter().collect() }
    }
}
