//! Small reference shifts and automata used throughout the tests and the command line.

use crate::error::Result;
use crate::group::{Elem, FiniteGroup};
use crate::language::Budget;
use crate::maps::GroupShiftHom;
use crate::presentation::GroupShiftPresentation;
use crate::shape::{decode, Pattern, Shape};

/// One-dimensional shift forbidding the given words.
pub fn forbid_words(g: &FiniteGroup, words: &[&[Elem]]) -> Result<GroupShiftPresentation> {
    let ps: Vec<Pattern> = words.iter().map(|w| Pattern::word(g, 0, w)).collect();
    GroupShiftPresentation::from_forbidden(g, 1, &ps)
}

/// The two constant binary configurations.
pub fn two_point() -> GroupShiftPresentation {
    forbid_words(&FiniteGroup::cyclic(2), &[&[0, 1], &[1, 0]]).expect("binary words")
}

/// Binary configurations with `x(u) + x(u + e1) + x(u + e2) = 0`.
pub fn ledrappier() -> GroupShiftPresentation {
    let g = FiniteGroup::cyclic(2);
    let ps: Vec<Pattern> = (0..8u64)
        .map(|c| decode(2, c, 3))
        .filter(|v| v.iter().sum::<usize>() % 2 == 1)
        .map(|v| Pattern::from_cells(&g, 2, vec![(vec![0, 0], v[0]), (vec![1, 0], v[1]), (vec![0, 1], v[2])]).expect("distinct cells"))
        .collect();
    GroupShiftPresentation::from_forbidden(&g, 2, &ps).expect("three-cell patterns")
}

/// A verified cellular automaton on `domain` given by a word expression.
pub fn ca(domain: &GroupShiftPresentation, expr: &str) -> Result<GroupShiftHom> {
    let b = Budget::default();
    GroupShiftHom::from_expr(domain, expr, &b)?.verify(&b)
}

/// A verified cellular automaton given by a function of the neighbourhood values.
pub fn ca_fn(domain: &GroupShiftPresentation, nbhd: Shape, f: impl Fn(&[Elem]) -> Elem) -> Result<GroupShiftHom> {
    let b = Budget::default();
    GroupShiftHom::from_fn(domain, domain.group(), nbhd, f, &b)?.verify(&b)
}

fn full(n: usize) -> GroupShiftPresentation {
    GroupShiftPresentation::full(&FiniteGroup::cyclic(n), 1)
}

/// `c_u + c_{u+1}` on the binary full shift.
pub fn xor() -> GroupShiftHom {
    ca(&full(2), "x[0] + x[1]").expect("xor rule")
}

/// Both constant configurations map to zero.
pub fn two_point_collapse() -> GroupShiftHom {
    ca(&two_point(), "0").expect("constant rule")
}

/// The left shift `c_{u+1}`.
pub fn shift_map() -> GroupShiftHom {
    ca(&full(2), "x[1]").expect("shift rule")
}

/// The identity on the binary full shift.
pub fn identity() -> GroupShiftHom {
    ca(&full(2), "x[0]").expect("identity rule")
}

/// `x ↦ 2x` cellwise on the full shift over Z4.
pub fn doubling() -> GroupShiftHom {
    ca(&full(4), "x[0] + x[0]").expect("doubling rule")
}

/// Every configuration maps to the identity.
pub fn annihilator() -> GroupShiftHom {
    ca(&full(2), "0").expect("constant rule")
}

/// `c_{u−1} + c_u + c_{u+1}` on the binary full shift.
pub fn xor3() -> GroupShiftHom {
    ca(&full(2), "x[-1] + x[0] + x[1]").expect("three-term rule")
}

/// The small example automata, by name.
pub fn examples() -> Vec<(&'static str, GroupShiftHom)> {
    vec![
        ("xor", xor()),
        ("two-point collapse", two_point_collapse()),
        ("shift", shift_map()),
        ("identity", identity()),
        ("doubling", doubling()),
        ("annihilator", annihilator()),
        ("xor3", xor3()),
    ]
}

/// One automaton of the generated corpus.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub map: GroupShiftHom,
}

fn linear(domain: &GroupShiftPresentation, n: usize, [a, b, c]: [usize; 3]) -> Result<GroupShiftHom> {
    ca_fn(domain, Shape::interval(-1, 1), move |v| (a * v[0] + b * v[1] + c * v[2]) % n)
}

fn coefficient_triples(n: usize) -> Vec<[usize; 3]> {
    let all = (0..n * n * n).map(|i| [i / (n * n), i / n % n, i % n]);
    if n <= 4 {
        all.collect()
    } else {
        // outer coefficients 0 or 1, any centre, and a few with larger outer terms
        all.filter(|&[a, _, c]| a <= 1 && c <= 1).chain([[2, 1, 3], [n - 1, 0, 1], [2, 2, 2]]).collect()
    }
}

/// Verified automata with neighbourhood inside `{−1, 0, 1}`: linear rules over `Z2..Z6`
/// on full shifts, automorphism and sign rules over S3, and linear rules on kernels of
/// some of the former.
pub fn corpus_1d() -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for n in 2..=6 {
        let x = full(n);
        for t in coefficient_triples(n) {
            out.push(CorpusEntry { name: format!("Z{n} {t:?}"), map: linear(&x, n, t)? });
        }
    }
    let s3 = FiniteGroup::s3();
    let x = GroupShiftPresentation::full(&s3, 1);
    let nb = Shape::interval(-1, 1);
    for r in s3.elements() {
        for off in 0..3 {
            let g = s3.clone();
            let map = ca_fn(&x, nb.clone(), move |v| g.mul(g.mul(g.inv(r), v[off]), r))?;
            out.push(CorpusEntry { name: format!("S3 conjugation by {} at {}", s3.label(r), off as i64 - 1), map });
        }
    }
    let tau = s3.elements().find(|&a| a != 0 && s3.mul(a, a) == 0).expect("a transposition");
    let odd = |a: Elem| usize::from(a != 0 && s3.mul(a, a) == 0);
    for mask in 0..8usize {
        let g = s3.clone();
        let map = ca_fn(&x, nb.clone(), move |v| {
            let k: usize = (0..3).filter(|i| mask >> i & 1 == 1).map(|i| odd(v[i])).sum();
            g.pow_elem(tau, k as i64)
        })?;
        out.push(CorpusEntry { name: format!("S3 sign mask {mask:03b}"), map });
    }
    let kernels = [(2, [0, 1, 1]), (2, [1, 0, 1]), (3, [0, 1, 1]), (4, [0, 2, 0]), (4, [0, 1, 2]), (6, [0, 3, 0])];
    let rules = [[0, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 0], [0, 1, 1], [1, 1, 0], [1, 1, 1], [1, 0, 1], [0, 2, 0]];
    for (n, t) in kernels {
        let k = crate::maps::kernel(&linear(&full(n), n, t)?)?;
        for r in rules {
            // linear rules commute, so each preserves the kernel of another
            out.push(CorpusEntry { name: format!("ker Z{n} {t:?}: {r:?}"), map: linear(&k, n, r)? });
        }
    }
    Ok(out)
}
