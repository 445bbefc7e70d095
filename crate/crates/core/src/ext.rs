//! Finite extensions `L/K` kept in tower shape: an unramified extension
//! enlarges the constant field, a ramified quadratic one replaces the
//! uniformizer `t_j` by `theta` with `theta^2 = c * t_j`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::class::{SquareClass, Subgroup};
use crate::elem::{Elem, Frac, Laurent};
use crate::error::{Error, Result};
use crate::field::FieldDesc;
use crate::finite::FiniteEmbedding;
use crate::testing::Mutation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtKind {
    Unramified,
    Ramified,
}

#[derive(Clone)]
pub struct Extension(Arc<Inner>);

struct Inner {
    base: FieldDesc,
    top: FieldDesc,
    d: SquareClass,
    degree: u32,
    kind: ExtKind,
    /// Layer whose uniformizer is replaced (ramified case only).
    layer: usize,
    /// `theta^2 = c * t_layer`, with `c` a monomial of level `layer - 1`.
    c: Option<Elem>,
    finite: Option<FiniteEmbedding>,
    class_image: Vec<SquareClass>,
    class_norm: Vec<SquareClass>,
    sqrt_d: Option<Elem>,
}

impl fmt::Debug for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {} ({:?}, d = {})", self.0.top, self.0.base, self.0.kind, self.0.d)
    }
}

impl Extension {
    /// `K(sqrt d)` for the class `d`.
    pub fn quadratic(base: &FieldDesc, d: SquareClass) -> Result<Extension> {
        if d.is_trivial() {
            return Err(Error::TrivialExtension);
        }
        if d.0 >> (base.height() + 1) != 0 {
            return Err(Error::FieldMismatch);
        }
        match d.top_t() {
            None => Self::unramified_with(base, 2, d),
            Some(j) => Self::ramified(base, d, j),
        }
    }

    /// The constant extension of the given degree.
    pub fn unramified(base: &FieldDesc, degree: u32) -> Result<Extension> {
        if degree < 2 {
            return Err(Error::TrivialExtension);
        }
        let d = if degree == 2 { SquareClass::U } else { SquareClass::ONE };
        Self::unramified_with(base, degree, d)
    }

    fn unramified_with(base: &FieldDesc, degree: u32, d: SquareClass) -> Result<Extension> {
        let emb = FiniteEmbedding::new(base.base_arc().clone(), degree)?;
        let top = base.derived(emb.big.clone(), base.towers().to_vec());
        let sqrt_d = (degree == 2).then(|| {
            let s = emb.big.sqrt(emb.embed(base.base().nonsquare())).expect("nonsquare becomes a square");
            top.constant(s)
        });
        Self::finish(Inner {
            base: base.clone(),
            top,
            d,
            degree,
            kind: ExtKind::Unramified,
            layer: 0,
            c: None,
            finite: Some(emb),
            class_image: vec![],
            class_norm: vec![],
            sqrt_d,
        })
    }

    fn ramified(base: &FieldDesc, d: SquareClass, j: usize) -> Result<Extension> {
        let lc = if d.has_u() { base.base().nonsquare() } else { 1 };
        let exps: Vec<i64> = (1..j).map(|i| d.has_t(i) as i64).collect();
        let c = base.arith().monomial(j - 1, lc, &exps);
        let mut towers = base.towers().to_vec();
        let mut name = format!("{}'", towers[j - 1]);
        while towers.contains(&name) {
            name.push('\'');
        }
        towers[j - 1] = name;
        let top = base.derived(base.base_arc().clone(), towers);
        let sqrt_d = Some(top.t(j));
        Self::finish(Inner {
            base: base.clone(),
            top,
            d,
            degree: 2,
            kind: ExtKind::Ramified,
            layer: j,
            c: Some(c),
            finite: None,
            class_image: vec![],
            class_norm: vec![],
            sqrt_d,
        })
    }

    fn finish(mut inner: Inner) -> Result<Extension> {
        let partial = Extension(Arc::new(Inner {
            base: inner.base.clone(),
            top: inner.top.clone(),
            d: inner.d,
            degree: inner.degree,
            kind: inner.kind,
            layer: inner.layer,
            c: inner.c.clone(),
            finite: inner.finite.take(),
            class_image: vec![],
            class_norm: vec![],
            sqrt_d: inner.sqrt_d.clone(),
        }));
        let k = &inner.base;
        let l = &inner.top;
        let class_image = k
            .classes()
            .map(|c| l.square_class(&partial.embed(&k.class_rep(c))))
            .collect::<Result<Vec<_>>>()?;
        let class_norm = l
            .classes()
            .map(|c| k.square_class(&partial.norm(&l.class_rep(c))))
            .collect::<Result<Vec<_>>>()?;
        let mut full = Arc::try_unwrap(partial.0).ok().expect("no other handles yet");
        full.class_image = class_image;
        full.class_norm = class_norm;
        Ok(Extension(Arc::new(full)))
    }

    pub fn base(&self) -> &FieldDesc {
        &self.0.base
    }

    pub fn top(&self) -> &FieldDesc {
        &self.0.top
    }

    pub fn d(&self) -> SquareClass {
        self.0.d
    }

    pub fn degree(&self) -> u32 {
        self.0.degree
    }

    pub fn kind(&self) -> ExtKind {
        self.0.kind
    }

    pub fn is_ramified(&self) -> bool {
        self.0.kind == ExtKind::Ramified
    }

    /// Ramified for the top valuation, i.e. `d` involves the top uniformizer.
    pub fn is_ramified_at_top(&self) -> bool {
        self.is_ramified() && self.0.layer == self.0.base.height()
    }

    /// The new uniformizer (ramified case).
    pub fn theta(&self) -> Option<Elem> {
        self.is_ramified().then(|| self.0.top.t(self.0.layer))
    }

    /// `c` with `theta^2 = c * t_j`, as an element of `K` (ramified case).
    pub fn c(&self) -> Option<Elem> {
        let c = self.0.c.clone()?;
        Some(self.0.base.arith().lift(self.0.base.height(), self.0.layer - 1, c))
    }

    /// An element of `L` squaring to the canonical representative of `d`.
    pub fn sqrt_d(&self) -> Option<&Elem> {
        self.0.sqrt_d.as_ref()
    }

    pub fn embed(&self, x: &Elem) -> Elem {
        self.embed_at(self.0.base.height(), x)
    }

    /// The generator of `Gal(L/K)` applied once.
    pub fn conj(&self, y: &Elem) -> Elem {
        self.conj_at(self.0.top.height(), y)
    }

    pub fn conj_pow(&self, y: &Elem, e: u32) -> Elem {
        (0..e % self.0.degree).fold(y.clone(), |acc, _| self.conj(&acc))
    }

    /// Inverse of [`embed`](Self::embed) on `K`; `None` if `y` is not fixed.
    pub fn descend(&self, y: &Elem) -> Option<Elem> {
        self.descend_at(self.0.top.height(), y)
    }

    pub fn norm(&self, y: &Elem) -> Elem {
        let l = &self.0.top;
        let prod = (1..self.0.degree).fold(y.clone(), |acc, e| l.mul(&acc, &self.conj_pow(y, e)));
        let n = self.descend(&prod).expect("norm lies in the base");
        if self.0.base.mutation() == Mutation::SkewNorm {
            let k = &self.0.base;
            return k.mul(&n, &k.constant(k.base().nonsquare()));
        }
        n
    }

    pub fn trace(&self, y: &Elem) -> Elem {
        let l = &self.0.top;
        let sum = (1..self.0.degree).fold(y.clone(), |acc, e| l.add(&acc, &self.conj_pow(y, e)));
        self.descend(&sum).expect("trace lies in the base")
    }

    /// Coordinates `(a, b)` of `y = a + b * sqrt_d` over `K` (quadratic case).
    pub fn coords(&self, y: &Elem) -> Result<(Elem, Elem)> {
        let s = self.sqrt_d().ok_or_else(|| Error::Precondition("not a quadratic extension".into()))?;
        let l = &self.0.top;
        let cy = self.conj(y);
        let two = l.from_int(2);
        let a = l.div(&l.add(y, &cy), &two)?;
        let b = l.div(&l.sub(y, &cy), &l.mul(&two, s))?;
        Ok((self.descend(&a).expect("symmetric part"), self.descend(&b).expect("antisymmetric part")))
    }

    /// `a + b * sqrt_d` (quadratic case).
    pub fn from_coords(&self, a: &Elem, b: &Elem) -> Elem {
        let l = &self.0.top;
        let s = self.sqrt_d().expect("quadratic extension");
        l.add(&self.embed(a), &l.mul(&self.embed(b), s))
    }

    pub fn image_class(&self, c: SquareClass) -> SquareClass {
        self.0.class_image[c.0 as usize]
    }

    pub fn norm_class(&self, c: SquareClass) -> SquareClass {
        self.0.class_norm[c.0 as usize]
    }

    pub fn image_subgroup(&self, s: &Subgroup) -> Subgroup {
        Subgroup::span(self.0.top.height(), s.basis().iter().map(|&c| self.image_class(c)))
    }

    /// Norm image of a subgroup of `L*/L*^2`, computed on every element so
    /// that a corrupted norm map is not silently linearized.
    pub fn norm_subgroup(&self, s: &Subgroup) -> Subgroup {
        Subgroup::span(self.0.base.height(), s.elements().into_iter().map(|c| self.norm_class(c)))
    }

    fn embed_at(&self, l: usize, x: &Elem) -> Elem {
        let inner = &*self.0;
        match inner.kind {
            ExtKind::Unramified => {
                let emb = inner.finite.as_ref().unwrap();
                structural(l, x, &|c| Elem::Fin(emb.embed(c)), &|l1, y| self.embed_at(l1, y))
            }
            ExtKind::Ramified => {
                let j = inner.layer;
                if l < j {
                    return x.clone();
                }
                if l > j {
                    return structural(l, x, &|_| unreachable!(), &|l1, y| self.embed_at(l1, y));
                }
                let a = inner.top.arith();
                let cinv = a.inv(j - 1, inner.c.as_ref().unwrap()).unwrap();
                let spread = |p: &Laurent| {
                    let mut coeffs = Vec::with_capacity(2 * p.coeffs.len());
                    for (i, co) in p.coeffs.iter().enumerate() {
                        if i > 0 {
                            coeffs.push(a.zero(j - 1));
                        }
                        let e = p.low + i as i64;
                        coeffs.push(a.mul(j - 1, co, &a.pow(j - 1, &cinv, e)));
                    }
                    Laurent { low: 2 * p.low, coeffs }
                };
                let f = x.frac();
                a.fraction(j, spread(&f.num), spread(&f.den))
            }
        }
    }

    fn conj_at(&self, l: usize, y: &Elem) -> Elem {
        let inner = &*self.0;
        match inner.kind {
            ExtKind::Unramified => {
                let emb = inner.finite.as_ref().unwrap();
                structural(l, y, &|c| Elem::Fin(emb.sigma(c, 1)), &|l1, z| self.conj_at(l1, z))
            }
            ExtKind::Ramified => {
                let j = inner.layer;
                if l < j {
                    return y.clone();
                }
                if l > j {
                    return structural(l, y, &|_| unreachable!(), &|l1, z| self.conj_at(l1, z));
                }
                let a = inner.top.arith();
                let flip = |p: &Laurent| Laurent {
                    low: p.low,
                    coeffs: p
                        .coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, co)| if (p.low + i as i64) % 2 != 0 { a.neg(j - 1, co) } else { co.clone() })
                        .collect(),
                };
                let f = y.frac();
                Elem::Ser(Box::new(Frac { num: flip(&f.num), den: flip(&f.den) }))
            }
        }
    }

    fn descend_at(&self, l: usize, y: &Elem) -> Option<Elem> {
        let inner = &*self.0;
        let ramified = inner.kind == ExtKind::Ramified;
        if ramified && l < inner.layer {
            return Some(y.clone());
        }
        if l == 0 {
            let emb = inner.finite.as_ref().unwrap();
            return emb.descend(y.code()).map(Elem::Fin);
        }
        let la = inner.top.arith();
        let ka = inner.base.arith();
        let f = y.frac();
        let one = Laurent { low: 0, coeffs: vec![la.one(l - 1)] };
        let poly = |p: &Laurent| Elem::Ser(Box::new(Frac { num: p.clone(), den: one.clone() }));
        let (num, den) = (poly(&f.num), poly(&f.den));
        let mut others = la.one(l);
        let mut cur = den.clone();
        for _ in 1..inner.degree {
            cur = self.conj_at(l, &cur);
            others = la.mul(l, &others, &cur);
        }
        let n = la.mul(l, &num, &others);
        let d = la.mul(l, &den, &others);
        let (n, d) = (&n.frac().num, &d.frac().num);
        let down = |p: &Laurent| -> Option<Laurent> {
            if ramified && l == inner.layer {
                let c = inner.c.as_ref().unwrap();
                if p.low.rem_euclid(2) != 0 {
                    return None;
                }
                let mut coeffs = vec![];
                for (i, co) in p.coeffs.iter().enumerate() {
                    if i % 2 == 1 {
                        if !la.is_zero(l - 1, co) {
                            return None;
                        }
                        continue;
                    }
                    let e = (p.low + i as i64) / 2;
                    coeffs.push(ka.mul(l - 1, co, &ka.pow(l - 1, c, e)));
                }
                Some(Laurent { low: p.low / 2, coeffs })
            } else {
                let coeffs = p.coeffs.iter().map(|co| self.descend_at(l - 1, co)).collect::<Option<Vec<_>>>()?;
                Some(Laurent { low: p.low, coeffs })
            }
        };
        Some(ka.fraction(l, down(n)?, down(d)?))
    }
}

/// Applies a coefficientwise ring embedding or automorphism without
/// renormalizing; such maps preserve the normal form.
fn structural(l: usize, x: &Elem, fin: &dyn Fn(u32) -> Elem, rec: &dyn Fn(usize, &Elem) -> Elem) -> Elem {
    match x {
        Elem::Fin(c) => fin(*c),
        Elem::Ser(f) => {
            let map = |p: &Laurent| Laurent { low: p.low, coeffs: p.coeffs.iter().map(|c| rec(l - 1, c)).collect() };
            Elem::Ser(Box::new(Frac { num: map(&f.num), den: map(&f.den) }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f3t() -> FieldDesc {
        FieldDesc::tower(3, &["t"]).unwrap()
    }

    #[test]
    fn extension_shapes() {
        let k = f3t();
        let l = Extension::quadratic(&k, SquareClass::U).unwrap();
        assert_eq!(l.top().base().order(), 9);
        assert_eq!(l.kind(), ExtKind::Unramified);
        let l = Extension::quadratic(&k, SquareClass(0b10)).unwrap();
        assert_eq!(l.top().base().order(), 3);
        assert_eq!(l.kind(), ExtKind::Ramified);
        assert!(matches!(Extension::quadratic(&k, SquareClass::ONE), Err(Error::TrivialExtension)));
    }

    #[test]
    fn uniformizer_substitution() {
        let k = f3t();
        // -1 is the canonical nonsquare of F_3, so [-t] = u*t
        let ext = Extension::quadratic(&k, SquareClass(0b11)).unwrap();
        let l = ext.top();
        let theta = ext.theta().unwrap();
        assert!(l.eq(&ext.embed(&k.t(1)), &l.neg(&l.square(&theta))));
        assert!(l.eq(&l.square(ext.sqrt_d().unwrap()), &ext.embed(&k.class_rep(ext.d()))));
    }

    #[test]
    fn norm_examples() {
        let k = f3t();
        let ext = Extension::quadratic(&k, SquareClass(0b10)).unwrap();
        let n = ext.norm(&ext.theta().unwrap());
        assert!(k.eq(&n, &k.neg(&k.t(1))));
        let unr = Extension::quadratic(&k, SquareClass::U).unwrap();
        let l = unr.top();
        let w = l.add(&l.constant(4), &l.t(1));
        let (_, r) = k.valuation_residue(&unr.norm(&w)).unwrap();
        let emb = FiniteEmbedding::new(k.base_arc().clone(), 2).unwrap();
        assert_eq!(r.code(), emb.norm(4));
    }

    #[test]
    fn ring_map_properties() {
        let k = FieldDesc::tower(5, &["t"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..4 {
            let ext = Extension::quadratic(&k, SquareClass(d)).unwrap();
            let l = ext.top();
            for _ in 0..20 {
                let x = k.random_nonzero(&mut rng, 2, 3);
                let y = l.random_nonzero(&mut rng, 2, 3);
                let z = l.random_nonzero(&mut rng, 2, 3);
                assert!(k.eq(&ext.norm(&ext.embed(&x)), &k.square(&x)));
                assert!(k.eq(&ext.norm(&l.mul(&y, &z)), &k.mul(&ext.norm(&y), &ext.norm(&z))));
                assert!(k.eq(&ext.trace(&l.add(&y, &z)), &k.add(&ext.trace(&y), &ext.trace(&z))));
                assert!(l.eq(&ext.conj(&ext.conj(&y)), &y));
                let (a, b) = ext.coords(&y).unwrap();
                assert!(l.eq(&ext.from_coords(&a, &b), &y));
                assert!(ext.descend(&ext.embed(&x)).is_some_and(|x2| k.eq(&x2, &x)));
            }
        }
    }

    #[test]
    fn ramified_unit_norms_are_squares() {
        let k = f3t();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [0b10, 0b11] {
            let ext = Extension::quadratic(&k, SquareClass(d)).unwrap();
            let l = ext.top();
            for _ in 0..30 {
                let y = l.random_nonzero(&mut rng, 2, 3);
                let (v, _) = l.valuation_residue(&y).unwrap();
                let unit = l.mul(&y, &l.pow(&ext.theta().unwrap(), -v));
                assert!(k.is_square(&ext.norm(&unit)).unwrap());
            }
        }
    }

    #[test]
    fn cubic_and_height_two() {
        let k = f3t();
        let ext = Extension::unramified(&k, 3).unwrap();
        assert_eq!(ext.top().base().order(), 27);
        let l = ext.top();
        let w = l.add(&l.constant(5), &l.t(1));
        assert!(ext.descend(&l.mul(&w, &l.mul(&ext.conj(&w), &ext.conj_pow(&w, 2)))).is_some());
        let k2 = FieldDesc::tower(3, &["t", "s"]).unwrap();
        // ramified at the lower layer: theta^2 = u * t
        let ext = Extension::quadratic(&k2, SquareClass(0b011)).unwrap();
        let l2 = ext.top();
        assert_eq!(l2.towers(), ["t'", "s"]);
        let x = k2.add(&k2.t(1), &k2.mul(&k2.t(2), &k2.t(1)));
        assert!(k2.eq(&ext.norm(&ext.embed(&x)), &k2.square(&x)));
        assert!(l2.eq(&l2.square(ext.sqrt_d().unwrap()), &ext.embed(&k2.class_rep(ext.d()))));
    }
}
