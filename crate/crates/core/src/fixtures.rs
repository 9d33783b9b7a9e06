//! Small shifts shared by unit tests.

use crate::group::{Elem, FiniteGroup};
use crate::presentation::GroupShiftPresentation;
use crate::shape::{encode, Pattern};

pub fn z2() -> FiniteGroup {
    FiniteGroup::cyclic(2)
}

pub fn forbid_words(g: &FiniteGroup, words: &[&[Elem]]) -> GroupShiftPresentation {
    let ps: Vec<Pattern> = words.iter().map(|w| Pattern::word(g, 0, w)).collect();
    GroupShiftPresentation::from_forbidden(g, 1, &ps).unwrap()
}

/// `x(u) + x(u + e1) + x(u + e2) = 0` over Z2.
pub fn ledrappier() -> GroupShiftPresentation {
    let g = z2();
    let mut ps = Vec::new();
    for c in 0..8u64 {
        let v = crate::shape::decode(2, c, 3);
        if v.iter().sum::<usize>() % 2 == 1 {
            ps.push(Pattern::from_cells(&g, 2, vec![(vec![0, 0], v[0]), (vec![1, 0], v[1]), (vec![0, 1], v[2])]).unwrap());
        }
    }
    GroupShiftPresentation::from_forbidden(&g, 2, &ps).unwrap()
}

/// Graph `{(c, F(c))}` of a one-dimensional block map with the given neighbourhood width.
pub fn graph_1d(g: &FiniteGroup, h: &FiniteGroup, width: usize, f: impl Fn(&[Elem]) -> Elem) -> GroupShiftPresentation {
    let gh = g.direct_product(h);
    let mut codes = Vec::new();
    for c in 0..(g.order() as u64).pow(width as u32) {
        let xs = crate::shape::decode(g.order(), c, width);
        let fx = f(&xs);
        for t in 0..(h.order() as u64).pow(width as u32 - 1) {
            let mut ys = vec![fx];
            ys.extend(crate::shape::decode(h.order(), t, width - 1));
            let w: Vec<Elem> = xs.iter().zip(&ys).map(|(&a, &b)| gh.encode_factors(&[a, b])).collect();
            codes.push(encode(gh.order(), &w));
        }
    }
    GroupShiftPresentation::from_allowed(&gh, vec![width], codes).unwrap()
}

/// Graph of the XOR map `c ↦ c + σc` on the binary full shift.
pub fn xor_graph() -> GroupShiftPresentation {
    graph_1d(&z2(), &z2(), 2, |w| (w[0] + w[1]) % 2)
}
