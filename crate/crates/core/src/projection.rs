//! Slice projections, track projections and the constructions built from them.
//!
//! A slice of width `n` reads `n` consecutive cells along the first axis as one symbol of
//! `G^n`, giving a shift of one dimension less. Track projections keep some of the atomic
//! factors of a product alphabet.

use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup, Subgroup};
use crate::language::{allowed_codes, shifts_equal, Budget};
use crate::presentation::GroupShiftPresentation;
use crate::shape::{decode, encode, Extents, Shape};
use crate::track::{map_codes, project_track_1d, TrackSplit};

/// Width of the window along the first axis.
pub fn slice_width(x: &GroupShiftPresentation) -> Result<usize> {
    if x.dim() == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    Ok(x.window()[0])
}

/// Radius found by the synchronization search, with the target shift it certifies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynchronizationRadius {
    pub m: usize,
    pub r: usize,
    /// Slices of width `m` of the cut shift.
    pub u: GroupShiftPresentation,
}

impl SynchronizationRadius {
    /// Slice width used by the generic track projection.
    pub fn slice_width(&self) -> usize {
        self.m + 2 * self.r + 1
    }
}

/// The shift of width-`n` slices along the first axis, over `G^n`.
pub fn project_slice(x: &GroupShiftPresentation, n: usize, budget: &Budget) -> Result<GroupShiftPresentation> {
    let m = slice_width(x)?;
    if n == 0 {
        return Err(Error::Invalid("slice width must be positive".into()));
    }
    let g = x.group();
    let gn = g.pow(n)?;
    if x.dim() == 1 {
        let mut codes = allowed_codes(x, &Shape::interval(0, n as i64 - 1), budget)?;
        codes.sort_unstable();
        let members = codes.into_iter().map(|c| c as Elem).collect();
        return Ok(GroupShiftPresentation::from_subgroup(Subgroup::from_sorted_unchecked(&gn, members)));
    }
    if n < m {
        let wide = project_slice(x, m, budget)?;
        return project_track(&wide, &TrackSplit::block_range(g, m, 0, n)?, budget);
    }
    let cross0 = &x.window()[1..];
    for i in 1..=budget.max_box {
        let cross: Vec<usize> = cross0.iter().map(|&e| e + i - 1).collect();
        let xq = slice_candidate(x, n, &cross, &gn, budget)?;
        if n == 1 || slice_halts(&xq, g, n, budget)? {
            return Ok(xq);
        }
    }
    Err(Error::BudgetExceeded(format!(
        "slice projection of width {n} not stabilized up to cross-section boxes of side {}",
        cross0.iter().max().copied().unwrap_or(1) + budget.max_box - 1
    )))
}

/// The shift over `G^n` allowing exactly the width-`n` slices of `X` on the box `cross`.
fn slice_candidate(
    x: &GroupShiftPresentation,
    n: usize,
    cross: &[usize],
    gn: &FiniteGroup,
    budget: &Budget,
) -> Result<GroupShiftPresentation> {
    let order = x.group().order();
    let mut ext = vec![n];
    ext.extend_from_slice(cross);
    let vol_c: usize = cross.iter().product();
    let shape = Shape::boxed(&vec![0; ext.len()], &ext);
    let codes = allowed_codes(x, &shape, budget)?;
    let transposed = codes
        .iter()
        .map(|&c| {
            let v = decode(order, c, n * vol_c);
            let cols: Vec<Elem> = (0..vol_c)
                .map(|j| encode(order, &(0..n).map(|k| v[k * vol_c + j]).collect::<Vec<_>>()) as Elem)
                .collect();
            encode(gn.order(), &cols)
        })
        .collect();
    GroupShiftPresentation::from_allowed(gn, cross.to_vec(), transposed)
}

/// The halting test: dropping the last block gives the same shift as dropping the first.
fn slice_halts(xq: &GroupShiftPresentation, g: &FiniteGroup, n: usize, budget: &Budget) -> Result<bool> {
    let left = project_track(xq, &TrackSplit::block_range(g, n, 0, n - 1)?, budget)?;
    let right = project_track(xq, &TrackSplit::block_range(g, n, 1, n)?, budget)?;
    shifts_equal(&left, &right, budget)
}

/// Image under the cellwise projection onto the kept track.
///
/// Dimension one uses the automaton route; higher dimensions use the radius of
/// synchronization and compare slices.
pub fn project_track(x: &GroupShiftPresentation, split: &TrackSplit, budget: &Budget) -> Result<GroupShiftPresentation> {
    check_split(x, split)?;
    match x.dim() {
        0 => Ok(subgroup_image(x, split)),
        1 => project_track_1d(x, split),
        _ => project_track_generic(x, split, budget),
    }
}

fn check_split(x: &GroupShiftPresentation, split: &TrackSplit) -> Result<()> {
    if x.group() != split.parent() {
        return Err(Error::Invalid(format!(
            "track split over {} does not match alphabet {}",
            split.parent().name(),
            x.group().name()
        )));
    }
    Ok(())
}

fn subgroup_image(x: &GroupShiftPresentation, split: &TrackSplit) -> GroupShiftPresentation {
    let sub = x.subgroup().expect("dimension 0");
    GroupShiftPresentation::from_subgroup(sub.image_unchecked(split.first_group(), |a| split.first(a)))
}

/// Track projection by growing boxes, halting once the width-`n` slices agree with the
/// slices of the true image; valid in every dimension at least one.
pub fn project_track_generic(
    x: &GroupShiftPresentation,
    split: &TrackSplit,
    budget: &Budget,
) -> Result<GroupShiftPresentation> {
    check_split(x, split)?;
    if x.dim() == 0 {
        return Ok(subgroup_image(x, split));
    }
    let sync = radius_of_sync(x, split, budget)?;
    let n = sync.slice_width();
    let target = project_track(&project_slice(x, n, budget)?, &split.blocks(n)?, budget)?;
    let g = x.group();
    let table = split.first_table();
    let base = x.window().to_vec();
    for i in 1..=budget.max_box {
        let ext: Vec<usize> = base.iter().map(|&e| e + i - 1).collect();
        let shape = Shape::boxed(&vec![0; ext.len()], &ext);
        let codes = allowed_codes(x, &shape, budget)?;
        let kept = map_codes(&codes, g.order(), split.first_group().order(), shape.len(), |a| table[a]);
        let xq = GroupShiftPresentation::from_allowed(split.first_group(), ext, kept)?;
        if shifts_equal(&project_slice(&xq, n, budget)?, &target, budget)? {
            return Ok(xq);
        }
    }
    Err(Error::BudgetExceeded(format!(
        "track projection not stabilized up to windows enlarged by {}",
        budget.max_box - 1
    )))
}

/// Configurations over the second track whose first track is the identity everywhere.
pub fn cut_shift(u: &GroupShiftPresentation, split: &TrackSplit) -> Result<GroupShiftPresentation> {
    check_split(u, split)?;
    let g1 = split.first_group();
    let g2 = split.second_group();
    if u.dim() == 0 {
        let sub = u.subgroup().expect("dimension 0");
        let members = g2.elements().filter(|&b| sub.contains(split.join(g1.identity(), b)));
        let cut = Subgroup::from_members(g2, members).ok_or_else(|| Error::Inconsistent("cut is not a subgroup".into()))?;
        return Ok(GroupShiftPresentation::from_subgroup(cut));
    }
    let order = u.group().order();
    let vol: usize = u.window().iter().product();
    let codes = u
        .allowed()
        .codes()
        .iter()
        .filter_map(|&c| {
            let v = decode(order, c, vol);
            v.iter()
                .all(|&a| split.first(a) == g1.identity())
                .then(|| encode(g2.order(), &v.iter().map(|&a| split.second(a)).collect::<Vec<_>>()))
        })
        .collect();
    GroupShiftPresentation::from_allowed(g2, u.window().to_vec(), codes)
}

/// Least `r` for which the central width-`m` slices of the cut of wider slices agree
/// with the slices of the cut.
pub fn radius_of_sync(x: &GroupShiftPresentation, split: &TrackSplit, budget: &Budget) -> Result<SynchronizationRadius> {
    check_split(x, split)?;
    let m = slice_width(x)?;
    let g2 = split.second_group();
    let u = project_slice(&cut_shift(x, split)?, m, budget)?;
    for r in 1..=budget.max_box {
        let n = m + 2 * r;
        let v = project_slice(x, n, budget)?;
        let c = cut_shift(&v, &split.blocks(n)?)?;
        let ur = project_track(&c, &TrackSplit::block_range(g2, n, r, r + m)?, budget)?;
        if shifts_equal(&ur, &u, budget)? {
            return Ok(SynchronizationRadius { m, r, u });
        }
    }
    Err(Error::BudgetExceeded(format!("no radius of synchronization up to {}", budget.max_box)))
}

/// Projection onto `D × Z^k`: the `k`-dimensional shift over `G^D` reading the cells of
/// `D` (in the first `d − k` coordinates) at each position of the last `k` coordinates.
pub fn project_general(
    x: &GroupShiftPresentation,
    k: usize,
    domain: &Shape,
    budget: &Budget,
) -> Result<GroupShiftPresentation> {
    let d = x.dim();
    if k >= d {
        return Err(Error::Invalid(format!("target dimension {k} must be below {d}")));
    }
    let s = d - k;
    if domain.dim() != s {
        return Err(Error::DimensionMismatch { expected: s, got: domain.dim() });
    }
    let Some((lo, _)) = domain.bounds() else {
        return Err(Error::Invalid("projection domain is empty".into()));
    };
    let dom = domain.translate(&lo);
    let e = dom.bounding_extents();
    // The last sliced axis becomes the most significant block, so slice the domain axes
    // in reverse to make block order agree with the lexicographic cell order.
    let perm: Vec<usize> = (0..s).rev().chain(s..d).collect();
    let mut y = x.permute_axes(&perm)?;
    for j in (0..s).rev() {
        y = project_slice(&y, e[j], budget)?;
    }
    let g = x.group();
    let w = g.flat_len();
    let bx = Extents::new(e);
    let keep: Vec<usize> = dom.cells().iter().flat_map(|c| bx.index(c) * w..(bx.index(c) + 1) * w).collect();
    if keep.len() == y.group().flat_len() {
        return Ok(y);
    }
    let split = TrackSplit::new(y.group(), keep)?.with_first(g.pow(dom.len())?);
    project_track(&y, &split, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{forbid_words, graph_1d, ledrappier, xor_graph, z2};

    fn budget() -> Budget {
        Budget::default()
    }

    fn members(x: &GroupShiftPresentation) -> Vec<Elem> {
        x.subgroup().unwrap().members().to_vec()
    }

    #[test]
    fn slices_in_dimension_one() {
        let full = GroupShiftPresentation::full(&z2(), 1);
        assert_eq!(members(&project_slice(&full, 2, &budget()).unwrap()), vec![0, 1, 2, 3]);
        let diag = forbid_words(&z2(), &[&[0, 1], &[1, 0]]);
        assert_eq!(members(&project_slice(&diag, 2, &budget()).unwrap()), vec![0, 3]);
    }

    #[test]
    fn ledrappier_rows_are_free() {
        let y = project_slice(&ledrappier(), 1, &budget()).unwrap();
        assert_eq!(y.dim(), 1);
        assert!(shifts_equal(&y, &GroupShiftPresentation::full(&z2(), 1), &budget()).unwrap());
    }

    #[test]
    fn ledrappier_double_rows() {
        // a pair of rows (r0, r1) is allowed iff r1 is the XOR image of r0
        let y = project_slice(&ledrappier(), 2, &budget()).unwrap();
        let z4 = z2().pow(2).unwrap();
        assert_eq!(y.group(), &z4);
        let words = crate::language::allowed_codes(&y, &Shape::interval(0, 1), &budget()).unwrap();
        let expect: Vec<u64> = (0..16u64)
            .filter(|&c| {
                let v = decode(4, c, 2);
                let (a0, a1) = (v[0] / 2, v[0] % 2);
                let b0 = v[1] / 2;
                a1 == (a0 + b0) % 2
            })
            .collect();
        assert_eq!(words, expect);
    }

    #[test]
    fn cut_examples() {
        let g = z2().direct_product(&z2());
        let split = TrackSplit::halves(&g).unwrap();
        let full = GroupShiftPresentation::full(&g, 1);
        assert_eq!(cut_shift(&full, &split).unwrap(), GroupShiftPresentation::full(&z2(), 1));
        let diag = graph_1d(&z2(), &z2(), 1, |w| w[0]);
        let cut = cut_shift(&diag, &split).unwrap();
        assert_eq!(cut.allowed().codes(), &[0]);
        let shift_map = graph_1d(&z2(), &z2(), 2, |w| w[1]);
        let cut = cut_shift(&shift_map, &split).unwrap();
        assert!(shifts_equal(&cut, &GroupShiftPresentation::from_allowed(&z2(), vec![1], vec![0]).unwrap(), &budget()).unwrap());
    }

    #[test]
    fn sync_radius_examples() {
        let g = z2().direct_product(&z2());
        let split = TrackSplit::halves(&g).unwrap();
        let full = GroupShiftPresentation::full(&g, 1);
        assert_eq!(radius_of_sync(&full, &split, &budget()).unwrap().r, 1);
        let diag = graph_1d(&z2(), &z2(), 1, |w| w[0]);
        let s = radius_of_sync(&diag, &split, &budget()).unwrap();
        assert_eq!((s.m, s.r), (1, 1));
        assert_eq!(members(&s.u), vec![0]);
    }

    #[test]
    fn generic_track_projection_agrees_in_dimension_one() {
        let b = budget();
        for x in [xor_graph(), graph_1d(&z2(), &z2(), 1, |w| w[0]), graph_1d(&z2(), &z2(), 3, |w| (w[0] + w[2]) % 2)] {
            let split = TrackSplit::halves(x.group()).unwrap().swap().unwrap();
            let fast = project_track(&x, &split, &b).unwrap();
            let generic = project_track_generic(&x, &split, &b).unwrap();
            assert!(shifts_equal(&fast, &generic, &b).unwrap());
            assert!(shifts_equal(&fast, &GroupShiftPresentation::full(&z2(), 1), &b).unwrap());
        }
    }

    #[test]
    fn general_projection_examples() {
        let b = budget();
        let full2 = GroupShiftPresentation::full(&z2(), 2);
        let col = Shape::interval(0, 0);
        let y = project_general(&full2, 1, &col, &b).unwrap();
        assert!(shifts_equal(&y, &GroupShiftPresentation::full(&z2(), 1), &b).unwrap());
        let y = project_general(&ledrappier(), 1, &col, &b).unwrap();
        assert!(shifts_equal(&y, &GroupShiftPresentation::full(&z2(), 1), &b).unwrap());
        let diag = forbid_words(&z2(), &[&[0, 1], &[1, 0]]);
        let y = project_general(&diag, 0, &Shape::interval(0, 1), &b).unwrap();
        assert_eq!(members(&y), vec![0, 3]);
    }

    #[test]
    fn sparse_domain_keeps_selected_cells() {
        // columns 0 and 2 of a Ledrappier configuration: the second is c + σ²c of the first
        let b = budget();
        let dom = Shape::new(1, vec![vec![0], vec![2]]).unwrap();
        let y = project_general(&forbid_words(&z2(), &[&[0, 1], &[1, 0]]), 0, &dom, &b).unwrap();
        assert_eq!(members(&y), vec![0, 3]);
        let y = project_general(&ledrappier(), 1, &dom, &b).unwrap();
        assert_eq!(y.group(), &z2().pow(2).unwrap());
        let expect = graph_1d(&z2(), &z2(), 3, |w| (w[0] + w[2]) % 2);
        assert!(shifts_equal(&y, &expect, &b).unwrap());
    }

    #[test]
    fn two_dimensional_track_projection() {
        // first track constant along the second axis, second track the first one shifted
        let b = budget();
        let g = z2().direct_product(&z2());
        let mut codes = Vec::new();
        for c in 0..256u64 {
            let v = decode(4, c, 4);
            let (f, s): (Vec<Elem>, Vec<Elem>) = v.iter().map(|&a| (a / 2, a % 2)).unzip();
            if f[0] == f[1] && f[2] == f[3] && s[0] == f[2] {
                codes.push(c);
            }
        }
        let x = GroupShiftPresentation::from_allowed(&g, vec![2, 2], codes).unwrap();
        let columns = GroupShiftPresentation::from_allowed(&z2(), vec![1, 2], vec![0, 3]).unwrap();
        let split = TrackSplit::halves(&g).unwrap();
        let first = project_track(&x, &split, &b).unwrap();
        assert!(shifts_equal(&first, &columns, &b).unwrap());
        let second = project_track(&x, &split.swap().unwrap(), &b).unwrap();
        assert!(shifts_equal(&second, &columns, &b).unwrap());
        let sync = radius_of_sync(&x, &split, &b).unwrap();
        assert_eq!(sync.r, 1);
    }
}
