//! Homomorphisms of group shifts given by local rules, their kernels, preimages and images.

use std::collections::HashMap;

use crate::automaton::DeBruijnAutomaton;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::group::{Elem, FiniteGroup};
use crate::language::{allowed_codes, shifts_equal, Budget, CodeArith, CodeSubgroup};
use crate::presentation::{window_checks, GroupShiftPresentation};
use crate::projection::project_track_generic;
use crate::shape::{code_space, decode, encode, Cell, Extents, Pattern, PeriodicConfiguration, Shape};
use crate::track::{sofic_to_sft, LabeledGraph, TrackSplit};

/// A sliding block map `F(c)_u = f(c|_{u+N})` from a group shift into `H^{Z^d}`.
#[derive(Clone, Debug)]
pub struct GroupShiftHom {
    domain: GroupShiftPresentation,
    target: FiniteGroup,
    nbhd: Shape,
    lo: Cell,
    span: Vec<usize>,
    codes: Vec<u64>,
    values: Vec<Elem>,
    verified: bool,
}

impl GroupShiftHom {
    /// Tabulates `f` on the allowed patterns of the neighbourhood.
    pub fn from_fn(
        domain: &GroupShiftPresentation,
        target: &FiniteGroup,
        nbhd: Shape,
        mut f: impl FnMut(&[Elem]) -> Elem,
        budget: &Budget,
    ) -> Result<Self> {
        if domain.dim() == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if nbhd.dim() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: nbhd.dim() });
        }
        let Some((lo, hi)) = nbhd.bounds() else {
            return Err(Error::Invalid("neighbourhood is empty".into()));
        };
        let span = lo.iter().zip(&hi).map(|(a, b)| (b - a) as usize).collect();
        let codes = allowed_codes(domain, &nbhd, budget)?;
        let order = domain.group().order();
        let values = codes
            .iter()
            .map(|&c| {
                let v = f(&decode(order, c, nbhd.len()));
                if v < target.order() {
                    Ok(v)
                } else {
                    Err(Error::Invalid(format!("rule value {v} outside {}", target.name())))
                }
            })
            .collect::<Result<_>>()?;
        Ok(GroupShiftHom { domain: domain.clone(), target: target.clone(), nbhd, lo, span, codes, values, verified: false })
    }

    /// Rule given by explicit entries; every allowed neighbourhood pattern needs one.
    pub fn from_table(
        domain: &GroupShiftPresentation,
        target: &FiniteGroup,
        nbhd: Shape,
        entries: &[(Vec<Elem>, Elem)],
        budget: &Budget,
    ) -> Result<Self> {
        let table: HashMap<&[Elem], Elem> = entries.iter().map(|(k, v)| (k.as_slice(), *v)).collect();
        let g = domain.group().clone();
        let missing = std::cell::Cell::new(None);
        let hom = Self::from_fn(
            domain,
            target,
            nbhd.clone(),
            |vals| {
                table.get(vals).copied().unwrap_or_else(|| {
                    if missing.get().is_none() {
                        missing.set(Some(encode(g.order(), vals)));
                    }
                    target.identity()
                })
            },
            budget,
        )?;
        if let Some(code) = missing.get() {
            let p = Pattern::new(&g, nbhd.clone(), decode(g.order(), code, nbhd.len()))?;
            return Err(Error::IncompleteRule(format!("no entry for {}", p.describe())));
        }
        Ok(hom)
    }

    /// Rule given by a word expression in the neighbourhood variables; the target is the
    /// domain alphabet.
    pub fn from_expr(domain: &GroupShiftPresentation, src: &str, budget: &Budget) -> Result<Self> {
        let g = domain.group().clone();
        let e = Expr::parse(src, &g)?;
        let nbhd = e.neighborhood(domain.dim())?;
        let n2 = nbhd.clone();
        Self::from_fn(domain, &g, nbhd, |vals| e.eval(&g, &n2, vals), budget)
    }

    pub fn domain(&self) -> &GroupShiftPresentation {
        &self.domain
    }

    pub fn target(&self) -> &FiniteGroup {
        &self.target
    }

    pub fn neighborhood(&self) -> &Shape {
        &self.nbhd
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Extents of the neighbourhood's bounding box minus one.
    pub fn span(&self) -> &[usize] {
        &self.span
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    /// True when the map is into the same alphabet, so it can be iterated.
    pub fn is_ca(&self) -> bool {
        &self.target == self.domain.group()
    }

    /// Allowed neighbourhood patterns (as codes) with their rule values.
    pub fn entries(&self) -> impl Iterator<Item = (u64, Elem)> + '_ {
        self.codes.iter().copied().zip(self.values.iter().copied())
    }

    fn rule_code(&self, code: u64) -> Option<Elem> {
        self.codes.binary_search(&code).ok().map(|i| self.values[i])
    }

    /// Rule value on a neighbourhood pattern (values in neighbourhood cell order).
    pub fn rule(&self, vals: &[Elem]) -> Option<Elem> {
        self.rule_code(encode(self.domain.group().order(), vals))
    }

    /// Images on a box of extents `ext`; output cell `v` reads the input cells
    /// `v + N − lo`, i.e. sits at input position `v − lo`.
    pub fn apply_box(&self, ext: &[usize], vals: &[Elem]) -> Option<Vec<Elem>> {
        let input = Extents::new(ext.to_vec());
        let out = Extents::new(ext.iter().zip(&self.span).map(|(e, s)| e.checked_sub(*s)).collect::<Option<_>>()?);
        let offsets: Vec<Cell> = self.nbhd.cells().iter().map(|c| c.iter().zip(&self.lo).map(|(a, l)| a - l).collect()).collect();
        out.cells()
            .map(|v| {
                let nv: Vec<Elem> = offsets
                    .iter()
                    .map(|o| vals[input.index(&v.iter().zip(o).map(|(a, b)| a + b).collect::<Cell>())])
                    .collect();
                self.rule(&nv)
            })
            .collect()
    }

    /// Image of a pattern on the cells `u` with `u + N` inside its shape.
    pub fn apply_pattern(&self, p: &Pattern) -> Option<Pattern> {
        let mut entries = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for c in p.shape().cells() {
            for n in self.nbhd.cells() {
                let u: Cell = c.iter().zip(n).map(|(a, b)| a - b).collect();
                if !seen.insert(u.clone()) {
                    continue;
                }
                let vals: Option<Vec<Elem>> = self
                    .nbhd
                    .cells()
                    .iter()
                    .map(|m| p.get(&u.iter().zip(m).map(|(a, b)| a + b).collect::<Cell>()))
                    .collect();
                if let Some(vals) = vals {
                    entries.push((u, self.rule(&vals)?));
                }
            }
        }
        Pattern::from_cells(&self.target, self.dim(), entries).ok()
    }

    /// Image of a periodic configuration (same periods).
    pub fn apply_periodic(&self, c: &PeriodicConfiguration) -> Result<PeriodicConfiguration> {
        let fund = Extents::new(c.periods().to_vec());
        let vals = fund
            .cells()
            .map(|u| {
                let nv: Vec<Elem> =
                    self.nbhd.cells().iter().map(|n| c.get(&u.iter().zip(n).map(|(a, b)| a + b).collect::<Cell>())).collect();
                self.rule(&nv).ok_or(Error::ConfigNotInShift)
            })
            .collect::<Result<Vec<_>>>()?;
        PeriodicConfiguration::new(&self.target, c.periods().to_vec(), vals)
    }

    /// The same rule on a subshift of the domain, verified again there (a verified
    /// endomorphism of the domain need not map `y` into itself).
    pub fn restrict(&self, y: &GroupShiftPresentation, budget: &Budget) -> Result<Self> {
        if y.group() != self.domain.group() || y.dim() != self.dim() {
            return Err(Error::ShapeMismatch);
        }
        let mut missing = false;
        let mut h = Self::from_fn(y, &self.target, self.nbhd.clone(), |v| self.rule(v).unwrap_or_else(|| {
            missing = true;
            0
        }), budget)?;
        if missing {
            return Err(Error::Invalid("shift is not contained in the map's domain".into()));
        }
        if self.verified {
            h = h.verify(budget)?;
        }
        Ok(h)
    }

    /// Patterns of the image on the box `ext_out`: images of the domain patterns on the box
    /// enlarged by the neighbourhood span.
    pub fn image_codes(&self, x: &GroupShiftPresentation, ext_out: &[usize], budget: &Budget) -> Result<Vec<u64>> {
        let ext_in: Vec<usize> = ext_out.iter().zip(&self.span).map(|(a, b)| a + b).collect();
        let shape = Shape::boxed(&vec![0; ext_in.len()], &ext_in);
        let g = x.group().order();
        let mut out = allowed_codes(x, &shape, budget)?
            .into_iter()
            .map(|c| {
                let img = self
                    .apply_box(&ext_in, &decode(g, c, shape.len()))
                    .ok_or_else(|| Error::Invalid("shift is not contained in the map's domain".into()))?;
                Ok(encode(self.target.order(), &img))
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Checks the homomorphism law and, for maps into the domain alphabet, that the image
    /// stays inside the domain.
    pub fn verify_hom(&self, budget: &Budget) -> Result<()> {
        let g = self.domain.group();
        let h = &self.target;
        let len = self.nbhd.len();
        let ar = CodeArith::new(g, len);
        let space = code_space(g.order(), len).ok_or_else(|| Error::BudgetExceeded("neighbourhood too large".into()))?;
        // checking against generators suffices: f(ag) = f(a)f(g) for all a and generators g
        // gives f(ab) = f(a)f(b) by induction on the length of b
        let mut sub = CodeSubgroup::new(&ar, space);
        let mut gens = Vec::new();
        for &c in &self.codes {
            if sub.add(c) {
                gens.push(c);
            }
        }
        let pat = |c: u64| Pattern::new(g, self.nbhd.clone(), decode(g.order(), c, len)).expect("code fits").describe();
        for (&a, &fa) in self.codes.iter().zip(&self.values) {
            for &b in &gens {
                let fb = self.rule_code(b).expect("generator is allowed");
                match self.rule_code(ar.mul(a, b)) {
                    Some(fab) if fab == h.mul(fa, fb) => {}
                    Some(_) => return Err(Error::NotGroupHom(pat(a), pat(b))),
                    None => {
                        return Err(Error::Inconsistent(format!(
                            "allowed neighbourhood patterns are not closed under products: {} and {}",
                            pat(a),
                            pat(b)
                        )))
                    }
                }
            }
        }
        if self.is_ca() {
            let ext = self.domain.window().to_vec();
            for c in self.image_codes(&self.domain, &ext, budget)? {
                if !self.domain.is_allowed_code(c) {
                    return Err(Error::NotEndomorphism(self.domain.window_pattern(c).describe()));
                }
            }
        }
        Ok(())
    }

    /// Verifies and marks the map as verified.
    pub fn verify(mut self, budget: &Budget) -> Result<Self> {
        self.verify_hom(budget)?;
        self.verified = true;
        Ok(self)
    }

    fn ensure_verified(&self) -> Result<()> {
        if self.verified {
            Ok(())
        } else {
            Err(Error::Invalid("map has not been verified".into()))
        }
    }
}

/// The shift `{c ∈ X : F(c) ∈ Y}`.
pub fn preimage_shift(f: &GroupShiftHom, y: &GroupShiftPresentation) -> Result<GroupShiftPresentation> {
    f.ensure_verified()?;
    if y.group() != f.target() || y.dim() != f.dim() {
        return Err(Error::ShapeMismatch);
    }
    let x = f.domain();
    let ext: Vec<usize> = x.window().iter().zip(y.window()).zip(f.span()).map(|((a, b), s)| *a.max(&(b + s))).collect();
    let out = Extents::new(ext.iter().zip(f.span()).map(|(a, s)| a - s).collect());
    let checks: Vec<Vec<usize>> = window_checks(y.extents().expect("dimension at least one"), &out).into_iter().flatten().collect();
    let order = x.group().order();
    let vol: usize = ext.iter().product();
    let ho = f.target().order();
    let kept = x
        .admissible_codes(&ext)?
        .into_iter()
        .filter(|&c| {
            f.apply_box(&ext, &decode(order, c, vol)).is_some_and(|img| {
                checks.iter().all(|idx| y.is_allowed_code(encode(ho, &idx.iter().map(|&i| img[i]).collect::<Vec<_>>())))
            })
        })
        .collect();
    GroupShiftPresentation::from_allowed(x.group(), ext, kept)
}

/// The shift of configurations mapped to the identity.
pub fn kernel(f: &GroupShiftHom) -> Result<GroupShiftPresentation> {
    let h = f.target();
    let one = GroupShiftPresentation::from_allowed(h, vec![1; f.dim()], vec![h.identity() as u64])?;
    preimage_shift(f, &one)
}

/// The graph `{(c, F(c)) : c ∈ X}` over `G × H`.
pub fn graph_shift(f: &GroupShiftHom, x: &GroupShiftPresentation) -> Result<GroupShiftPresentation> {
    if x.group() != f.domain().group() || x.dim() != f.dim() {
        return Err(Error::ShapeMismatch);
    }
    let g = x.group();
    let h = f.target();
    let gh = g.direct_product(h);
    // the window must see each output cell together with its neighbourhood
    let ext: Vec<usize> = (0..f.dim())
        .map(|k| {
            let (lo, hi) = (f.lo[k].min(0), (f.lo[k] + f.span[k] as i64).max(0));
            x.window()[k].max((hi - lo + 1) as usize)
        })
        .collect();
    let bx = Extents::new(ext.clone());
    let reads: Vec<(usize, Vec<usize>)> = bx
        .cells()
        .filter_map(|p| {
            let idx: Option<Vec<usize>> = f
                .nbhd
                .cells()
                .iter()
                .map(|n| {
                    let q: Cell = p.iter().zip(n).map(|(a, b)| a + b).collect();
                    bx.contains(&q).then(|| bx.index(&q))
                })
                .collect();
            idx.map(|idx| (bx.index(&p), idx))
        })
        .collect();
    let fixed: Vec<usize> = reads.iter().map(|(i, _)| *i).collect();
    let free: Vec<usize> = (0..bx.volume()).filter(|i| !fixed.contains(i)).collect();
    let n_free = code_space(h.order(), free.len()).ok_or_else(|| Error::BudgetExceeded("graph window too large".into()))?;
    let mut codes = Vec::new();
    for c in x.admissible_codes(&ext)? {
        let xs = decode(g.order(), c, bx.volume());
        let mut ys = vec![h.identity(); bx.volume()];
        let ok = reads.iter().all(|(i, idx)| {
            let vals: Vec<Elem> = idx.iter().map(|&j| xs[j]).collect();
            f.rule(&vals).map(|v| ys[*i] = v).is_some()
        });
        if !ok {
            continue;
        }
        for t in 0..n_free {
            for (&i, v) in free.iter().zip(decode(h.order(), t, free.len())) {
                ys[i] = v;
            }
            let w: Vec<Elem> = xs.iter().zip(&ys).map(|(&a, &b)| gh.encode_factors(&[a, b])).collect();
            codes.push(encode(gh.order(), &w));
        }
    }
    GroupShiftPresentation::from_allowed(&gh, ext, codes)
}

/// How an image was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageRoute {
    /// Graph shift followed by a track projection (any dimension).
    Generic,
    /// Labelled de Bruijn automaton and finite-type recovery (dimension one).
    Automaton,
}

/// `F(X)` for a subshift `X` of the domain, by the route suited to the dimension.
pub fn image_shift(f: &GroupShiftHom, x: &GroupShiftPresentation, budget: &Budget) -> Result<GroupShiftPresentation> {
    let route = if f.dim() == 1 { ImageRoute::Automaton } else { ImageRoute::Generic };
    image_shift_via(f, x, route, budget)
}

pub fn image_shift_via(
    f: &GroupShiftHom,
    x: &GroupShiftPresentation,
    route: ImageRoute,
    budget: &Budget,
) -> Result<GroupShiftPresentation> {
    f.ensure_verified()?;
    match route {
        ImageRoute::Generic => {
            let graph = graph_shift(f, x)?;
            // the generic projection even in dimension one, so the routes stay independent
            project_track_generic(&graph, &TrackSplit::halves(graph.group())?.swap()?, budget)
        }
        ImageRoute::Automaton => image_1d(f, x),
    }
}

fn image_1d(f: &GroupShiftHom, x: &GroupShiftPresentation) -> Result<GroupShiftPresentation> {
    if f.dim() != 1 || x.dim() != 1 {
        return Err(Error::NotOneDimensional);
    }
    let len = x.window()[0].max(f.span()[0] + 1);
    let a = DeBruijnAutomaton::build(&x.normalize_to(&[len])?)?;
    let offsets: Vec<usize> = f.nbhd.cells().iter().map(|c| (c[0] - f.lo[0]) as usize).collect();
    let edges = a.edges().iter().enumerate().filter_map(|(i, e)| {
        let vals: Vec<Elem> = offsets.iter().map(|&o| a.symbol(i, o)).collect();
        f.rule(&vals).map(|l| (e.src, e.dst, l))
    });
    let g = LabeledGraph::from_edges(a.num_states(), edges.collect::<Vec<_>>());
    sofic_to_sft(&g, f.target())
}

/// Computes the image by both routes (dimension one) and reports whether they agree.
pub fn cross_check_image(f: &GroupShiftHom, x: &GroupShiftPresentation, budget: &Budget) -> Result<bool> {
    let a = image_shift_via(f, x, ImageRoute::Automaton, budget)?;
    let b = image_shift_via(f, x, ImageRoute::Generic, budget)?;
    shifts_equal(&a, &b, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn b() -> Budget {
        Budget::default()
    }

    fn z(n: usize) -> FiniteGroup {
        FiniteGroup::cyclic(n)
    }

    fn eq(a: &GroupShiftPresentation, b_: &GroupShiftPresentation) -> bool {
        shifts_equal(a, b_, &b()).unwrap()
    }

    fn sub_full(g: &FiniteGroup, members: &[u64]) -> GroupShiftPresentation {
        GroupShiftPresentation::from_allowed(g, vec![1], members.to_vec()).unwrap()
    }

    #[test]
    fn verification() {
        assert!(zoo::xor().is_verified());
        assert!(zoo::two_point_collapse().is_verified());
        let s3 = FiniteGroup::s3();
        let full = GroupShiftPresentation::full(&s3, 1);
        let f = GroupShiftHom::from_expr(&full, "x[0]*x[1]", &b()).unwrap();
        assert!(matches!(f.verify_hom(&b()), Err(Error::NotGroupHom(_, _))));
        // the shift map leaves the two-point shift but x[0]+1 does not respect it as a group map
        let f = GroupShiftHom::from_expr(&zoo::two_point(), "x[0]+1", &b()).unwrap();
        assert!(matches!(f.verify_hom(&b()), Err(Error::NotGroupHom(_, _))));
    }

    #[test]
    fn non_endomorphism_is_rejected() {
        // keeping the first coordinate leaves the diagonal of Z2 × Z2
        let v4 = z(2).direct_product(&z(2));
        let diag = GroupShiftPresentation::from_allowed(&v4, vec![1], vec![0, 3]).unwrap();
        let f = GroupShiftHom::from_fn(&diag, &v4, Shape::interval(0, 0), |v| v[0] & 2, &b()).unwrap();
        assert!(matches!(f.verify_hom(&b()), Err(Error::NotEndomorphism(_))));
        let g = GroupShiftHom::from_fn(&diag, &v4, Shape::interval(0, 0), |v| v[0], &b()).unwrap();
        assert!(g.verify_hom(&b()).is_ok());
    }

    #[test]
    fn restriction_is_verified_again() {
        let s3 = FiniteGroup::s3();
        let full = GroupShiftPresentation::full(&s3, 1);
        let r = s3.elements().find(|&a| a != 0 && s3.mul(a, a) != 0).unwrap();
        let t = s3.elements().find(|&a| a != 0 && s3.mul(a, a) == 0).unwrap();
        let conj = GroupShiftHom::from_fn(&full, &s3, Shape::interval(0, 0), |v| s3.mul(s3.mul(s3.inv(r), v[0]), r), &b())
            .unwrap()
            .verify(&b())
            .unwrap();
        // configurations over {e, t}: conjugation moves t to another transposition
        let y = GroupShiftPresentation::from_allowed(&s3, vec![1], vec![0, t as u64]).unwrap();
        assert!(matches!(conj.restrict(&y, &b()), Err(Error::NotEndomorphism(_))));
        let two = zoo::xor().restrict(&zoo::two_point(), &b()).unwrap();
        assert!(two.is_verified());
    }

    #[test]
    fn kernels() {
        let k = kernel(&zoo::identity()).unwrap();
        assert!(eq(&k, &sub_full(&z(2), &[0])));
        let k = kernel(&zoo::xor()).unwrap();
        assert!(eq(&k, &zoo::two_point()));
        let k = kernel(&zoo::doubling()).unwrap();
        assert!(eq(&k, &sub_full(&z(4), &[0, 2])));
        let k = kernel(&zoo::xor3()).unwrap();
        let a = DeBruijnAutomaton::build(&k).unwrap();
        assert_eq!(a.finite_count(), Some(4));
    }

    #[test]
    fn images_by_both_routes() {
        let cases = [
            (zoo::xor(), GroupShiftPresentation::full(&z(2), 1)),
            (zoo::annihilator(), sub_full(&z(2), &[0])),
            (zoo::doubling(), sub_full(&z(4), &[0, 2])),
            (zoo::two_point_collapse(), sub_full(&z(2), &[0])),
            (zoo::shift_map(), GroupShiftPresentation::full(&z(2), 1)),
            (zoo::xor3(), GroupShiftPresentation::full(&z(2), 1)),
        ];
        for (f, expect) in cases {
            for route in [ImageRoute::Automaton, ImageRoute::Generic] {
                let img = image_shift_via(&f, f.domain(), route, &b()).unwrap();
                assert!(eq(&img, &expect), "{route:?} {}", img.describe());
            }
        }
    }

    #[test]
    fn preimage_of_subshift() {
        // XOR preimage of the two-point shift: XOR(c) constant means c or its flip is (01)^∞ or constant
        let f = zoo::xor();
        let p = preimage_shift(&f, &zoo::two_point()).unwrap();
        let a = DeBruijnAutomaton::build(&p).unwrap();
        assert_eq!(a.finite_count(), Some(4));
    }

    #[test]
    fn applying_to_configurations() {
        let f = zoo::xor();
        let c = PeriodicConfiguration::new(&z(2), vec![3], vec![0, 1, 1]).unwrap();
        assert_eq!(f.apply_periodic(&c).unwrap().fundamental(), &[1, 0, 1]);
        let p = Pattern::word(&z(2), 0, &[0, 1, 1]);
        assert_eq!(f.apply_pattern(&p).unwrap(), Pattern::word(&z(2), 0, &[1, 0]));
        let g = zoo::xor3();
        assert_eq!(g.apply_pattern(&p).unwrap(), Pattern::word(&z(2), 1, &[0]));
    }

    #[test]
    fn tables_must_cover_the_language() {
        let x = GroupShiftPresentation::full(&z(2), 1);
        let err = GroupShiftHom::from_table(&x, &z(2), Shape::interval(0, 0), &[(vec![0], 0)], &b()).unwrap_err();
        assert!(matches!(err, Error::IncompleteRule(_)));
        let ok = GroupShiftHom::from_table(&x, &z(2), Shape::interval(0, 0), &[(vec![0], 0), (vec![1], 1)], &b()).unwrap();
        assert!(ok.verify(&b()).is_ok());
    }
}
