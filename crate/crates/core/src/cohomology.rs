//! The discriminant algebra `Z = X[delta]/(delta^2 - d)` of an even-dimensional
//! form and finite models of `H^1(X, mu)`: `Z*/Z*^2` when `n = dim/2` is even,
//! `U(X)/U_0(X)` with `U = {(f, z) : f^4 = N(z)}` and `U_0 = {(N(w), w^4)}`
//! when `n` is odd.
//!
//! Elements of `Z` are pairs `(a, b)` meaning `a + b*delta`. The same formulas
//! cover the split and the field case; the shape only matters for square
//! classes and fourth powers, which go through split coordinates or through
//! the extension field.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::class::{SquareClass, Subgroup};
use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::ext::Extension;
use crate::field::FieldDesc;
use crate::quadform::QuadForm;

#[derive(Clone, Debug)]
pub struct ZElem {
    pub a: Elem,
    pub b: Elem,
}

#[derive(Clone, Debug)]
pub enum Shape {
    /// `s^2 = d` in `X`.
    Split { s: Elem },
    /// `delta = m * sqrt(d')` inside `E = X(sqrt d')` with `d'` canonical.
    Field { ext: Extension, m: Elem },
}

/// Square classes of `Z*`: a pair of `X`-classes in split coordinates, or a
/// class of the extension field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZClass {
    Pair(SquareClass, SquareClass),
    Ext(SquareClass),
}

impl fmt::Display for ZClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZClass::Pair(a, b) => write!(f, "({a}, {b})"),
            ZClass::Ext(c) => write!(f, "[{c}]"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Etale {
    field: FieldDesc,
    d: Elem,
    d_class: SquareClass,
    shape: Shape,
}

/// A square root of a monomial square.
fn monomial_sqrt(field: &FieldDesc, x: &Elem) -> Result<Elem> {
    let (exps, lc) = field.leading(x)?;
    let not_square = || Error::Precondition("expected a monomial square".into());
    if exps.iter().any(|e| e % 2 != 0) {
        return Err(not_square());
    }
    let r = field.base().sqrt(lc).ok_or_else(not_square)?;
    let s = field.monomial(r, &exps.iter().map(|e| e / 2).collect::<Vec<_>>());
    if !field.eq(&field.square(&s), x) {
        return Err(not_square());
    }
    Ok(s)
}

impl Etale {
    /// `X[delta]/(delta^2 - d)` for a nonzero monomial `d`.
    pub fn new(field: &FieldDesc, d: Elem) -> Result<Etale> {
        let d_class = field.square_class(&d)?;
        let shape = if d_class.is_trivial() {
            Shape::Split { s: monomial_sqrt(field, &d)? }
        } else {
            let ext = Extension::quadratic(field, d_class)?;
            let m = monomial_sqrt(field, &field.div(&d, &field.class_rep(d_class))?)?;
            Shape::Field { ext, m }
        };
        Ok(Etale { field: field.clone(), d, d_class, shape })
    }

    /// The discriminant algebra of an even-dimensional form.
    pub fn of_form(q: &QuadForm) -> Result<Etale> {
        if q.dim() % 2 == 1 || q.dim() == 0 {
            return Err(Error::Precondition("discriminant algebra needs positive even dimension".into()));
        }
        Etale::new(q.field(), q.field().class_rep(q.disc()))
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn d(&self) -> &Elem {
        &self.d
    }

    pub fn d_class(&self) -> SquareClass {
        self.d_class
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_split(&self) -> bool {
        matches!(self.shape, Shape::Split { .. })
    }

    pub fn ext(&self) -> Option<&Extension> {
        match &self.shape {
            Shape::Field { ext, .. } => Some(ext),
            Shape::Split { .. } => None,
        }
    }

    pub fn one(&self) -> ZElem {
        ZElem { a: self.field.one(), b: self.field.zero() }
    }

    pub fn from_base(&self, f: &Elem) -> ZElem {
        ZElem { a: f.clone(), b: self.field.zero() }
    }

    pub fn delta(&self) -> ZElem {
        ZElem { a: self.field.zero(), b: self.field.one() }
    }

    pub fn mul(&self, x: &ZElem, y: &ZElem) -> ZElem {
        let k = &self.field;
        let a = k.add(&k.mul(&x.a, &y.a), &k.mul(&self.d, &k.mul(&x.b, &y.b)));
        let b = k.add(&k.mul(&x.a, &y.b), &k.mul(&x.b, &y.a));
        ZElem { a, b }
    }

    pub fn scale(&self, x: &ZElem, f: &Elem) -> ZElem {
        ZElem { a: self.field.mul(&x.a, f), b: self.field.mul(&x.b, f) }
    }

    pub fn add(&self, x: &ZElem, y: &ZElem) -> ZElem {
        ZElem { a: self.field.add(&x.a, &y.a), b: self.field.add(&x.b, &y.b) }
    }

    /// `N_{Z/X}(a + b delta) = a^2 - d b^2`.
    pub fn norm(&self, x: &ZElem) -> Elem {
        let k = &self.field;
        k.sub(&k.square(&x.a), &k.mul(&self.d, &k.square(&x.b)))
    }

    pub fn psi(&self, x: &ZElem) -> ZElem {
        ZElem { a: x.a.clone(), b: self.field.neg(&x.b) }
    }

    pub fn inv(&self, x: &ZElem) -> Result<ZElem> {
        let n = self.norm(x);
        let ni = self.field.inv(&n)?;
        Ok(self.scale(&self.psi(x), &ni))
    }

    pub fn div(&self, x: &ZElem, y: &ZElem) -> Result<ZElem> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    pub fn pow(&self, x: &ZElem, e: i64) -> Result<ZElem> {
        let base = if e < 0 { self.inv(x)? } else { x.clone() };
        Ok((0..e.unsigned_abs()).fold(self.one(), |acc, _| self.mul(&acc, &base)))
    }

    pub fn eq(&self, x: &ZElem, y: &ZElem) -> bool {
        self.field.eq(&x.a, &y.a) && self.field.eq(&x.b, &y.b)
    }

    /// `(a + b s, a - b s)` for split `Z`.
    pub fn to_split(&self, x: &ZElem) -> Option<(Elem, Elem)> {
        let Shape::Split { s } = &self.shape else { return None };
        let k = &self.field;
        let bs = k.mul(&x.b, s);
        Some((k.add(&x.a, &bs), k.sub(&x.a, &bs)))
    }

    pub fn from_split(&self, x: &Elem, y: &Elem) -> ZElem {
        let Shape::Split { s } = &self.shape else { panic!("Z is not split") };
        let k = &self.field;
        let two = k.from_int(2);
        let a = k.div(&k.add(x, y), &two).unwrap();
        let b = k.div(&k.sub(x, y), &k.mul(&two, s)).unwrap();
        ZElem { a, b }
    }

    pub fn to_ext(&self, x: &ZElem) -> Option<Elem> {
        let Shape::Field { ext, m } = &self.shape else { return None };
        Some(ext.from_coords(&x.a, &self.field.mul(&x.b, m)))
    }

    pub fn from_ext(&self, e: &Elem) -> ZElem {
        let Shape::Field { ext, m } = &self.shape else { panic!("Z is split") };
        let (a, b) = ext.coords(e).expect("quadratic extension");
        ZElem { a, b: self.field.div(&b, m).unwrap() }
    }

    pub fn class(&self, x: &ZElem) -> Result<ZClass> {
        match &self.shape {
            Shape::Split { .. } => {
                let (p, q) = self.to_split(x).unwrap();
                Ok(ZClass::Pair(self.field.square_class(&p)?, self.field.square_class(&q)?))
            }
            Shape::Field { ext, .. } => Ok(ZClass::Ext(ext.top().square_class(&self.to_ext(x).unwrap())?)),
        }
    }

    pub fn class_rep(&self, c: ZClass) -> ZElem {
        match (c, &self.shape) {
            (ZClass::Pair(p, q), Shape::Split { .. }) => self.from_split(&self.field.class_rep(p), &self.field.class_rep(q)),
            (ZClass::Ext(c), Shape::Field { ext, .. }) => self.from_ext(&ext.top().class_rep(c)),
            _ => panic!("class does not match the shape of Z"),
        }
    }

    pub fn classes(&self) -> Vec<ZClass> {
        match &self.shape {
            Shape::Split { .. } => self
                .field
                .classes()
                .flat_map(|p| self.field.classes().map(move |q| ZClass::Pair(p, q)))
                .collect(),
            Shape::Field { ext, .. } => ext.top().classes().map(ZClass::Ext).collect(),
        }
    }

    pub fn is_fourth_power(&self, x: &ZElem) -> Result<bool> {
        match &self.shape {
            Shape::Split { .. } => {
                let (p, q) = self.to_split(x).unwrap();
                Ok(self.field.is_fourth_power(&p)? && self.field.is_fourth_power(&q)?)
            }
            Shape::Field { ext, .. } => ext.top().is_fourth_power(&self.to_ext(x).unwrap()),
        }
    }

    /// Leading coefficients of `N(zeta)` for the fourth roots of unity of `Z`.
    fn norms_of_mu4(&self) -> Vec<u32> {
        match &self.shape {
            Shape::Split { .. } => self.field.base().mu4(),
            Shape::Field { ext, .. } => {
                let e = ext.top();
                let mut out: Vec<u32> = e
                    .base()
                    .mu4()
                    .into_iter()
                    .map(|z| self.field.leading(&self.norm(&self.from_ext(&e.constant(z)))).unwrap().1)
                    .collect();
                out.sort();
                out.dedup();
                out
            }
        }
    }

    /// Leading data of `N(w)` for one fourth root `w` of `c`, or `None` when
    /// `c` is not a fourth power.
    fn norm_of_fourth_root(&self, c: &ZElem) -> Result<Option<(Vec<i64>, u32)>> {
        let k = &self.field;
        let root = |x: &Elem, f: &FieldDesc| -> Result<Option<Elem>> {
            if !f.is_fourth_power(x)? {
                return Ok(None);
            }
            let (exps, lc) = f.leading(x)?;
            let r = f.base().fourth_root(lc).expect("fourth power");
            Ok(Some(f.monomial(r, &exps.iter().map(|e| e / 4).collect::<Vec<_>>())))
        };
        let n = match &self.shape {
            Shape::Split { .. } => {
                let (p, q) = self.to_split(c).unwrap();
                match (root(&p, k)?, root(&q, k)?) {
                    (Some(wp), Some(wq)) => k.mul(&wp, &wq),
                    _ => return Ok(None),
                }
            }
            Shape::Field { ext, .. } => match root(&self.to_ext(c).unwrap(), ext.top())? {
                Some(w) => self.norm(&self.from_ext(&w)),
                None => return Ok(None),
            },
        };
        Ok(Some(k.leading(&n)?))
    }
}

/// A class in `H^1(X, mu)` given by a representative.
#[derive(Clone, Debug)]
pub enum H1Mu {
    Even(ZElem),
    Odd { f: Elem, z: ZElem },
}

/// `H^1(X, mu)` for a form of dimension `2n` over `X`.
#[derive(Clone, Debug)]
pub struct H1Context {
    etale: Etale,
    odd: bool,
}

impl H1Context {
    pub fn new(field: &FieldDesc, d: Elem, odd: bool) -> Result<H1Context> {
        Ok(H1Context { etale: Etale::new(field, d)?, odd })
    }

    pub fn for_form(q: &QuadForm) -> Result<H1Context> {
        let etale = Etale::of_form(q)?;
        Ok(H1Context { etale, odd: (q.dim() / 2) % 2 == 1 })
    }

    /// The same data over `L`, with `d` embedded so that corestriction can
    /// be computed by conjugating coordinates.
    pub fn base_change(&self, ext: &Extension) -> Result<H1Context> {
        if ext.base() != self.field() {
            return Err(Error::FieldMismatch);
        }
        H1Context::new(ext.top(), ext.embed(self.etale.d()), self.odd)
    }

    pub fn field(&self) -> &FieldDesc {
        &self.etale.field
    }

    pub fn etale(&self) -> &Etale {
        &self.etale
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }

    pub fn one(&self) -> H1Mu {
        if self.odd {
            H1Mu::Odd { f: self.field().one(), z: self.etale.one() }
        } else {
            H1Mu::Even(self.etale.one())
        }
    }

    pub fn validate(&self, x: &H1Mu) -> Result<()> {
        let k = self.field();
        match (x, self.odd) {
            (H1Mu::Even(z), false) => {
                if k.is_zero(&self.etale.norm(z)) {
                    return Err(Error::Malformed("representative is not invertible".into()));
                }
            }
            (H1Mu::Odd { f, z }, true) => {
                if k.is_zero(f) || !k.eq(&k.pow(f, 4), &self.etale.norm(z)) {
                    return Err(Error::Malformed("f^4 != N(z)".into()));
                }
            }
            _ => return Err(Error::Malformed("parity does not match the context".into())),
        }
        Ok(())
    }

    pub fn mul(&self, x: &H1Mu, y: &H1Mu) -> H1Mu {
        let z = &self.etale;
        match (x, y) {
            (H1Mu::Even(a), H1Mu::Even(b)) => H1Mu::Even(z.mul(a, b)),
            (H1Mu::Odd { f: f1, z: z1 }, H1Mu::Odd { f: f2, z: z2 }) => {
                H1Mu::Odd { f: self.field().mul(f1, f2), z: z.mul(z1, z2) }
            }
            _ => panic!("parity mismatch"),
        }
    }

    pub fn inv(&self, x: &H1Mu) -> Result<H1Mu> {
        Ok(match x {
            H1Mu::Even(a) => H1Mu::Even(self.etale.inv(a)?),
            H1Mu::Odd { f, z } => H1Mu::Odd { f: self.field().inv(f)?, z: self.etale.inv(z)? },
        })
    }

    /// Equality in `H^1`; in the odd case, decides whether the quotient lies in `U_0`.
    pub fn equal(&self, x: &H1Mu, y: &H1Mu) -> Result<bool> {
        self.validate(x)?;
        self.validate(y)?;
        let z = &self.etale;
        match (x, y) {
            (H1Mu::Even(a), H1Mu::Even(b)) => Ok(z.class(a)? == z.class(b)?),
            (H1Mu::Odd { f: f1, z: z1 }, H1Mu::Odd { f: f2, z: z2 }) => {
                let k = self.field();
                let g = k.div(f2, f1)?;
                let c = z.div(z2, z1)?;
                let Some((exps, lc)) = z.norm_of_fourth_root(&c)? else { return Ok(false) };
                let (g_exps, g_lc) = k.leading(&g)?;
                if g_exps != exps {
                    return Err(Error::Malformed("f^4 = N(z) fails at the leading term".into()));
                }
                let ff = k.base();
                let x4 = ff.mul(g_lc, ff.inv(lc).unwrap());
                Ok(z.norms_of_mu4().contains(&x4))
            }
            _ => Err(Error::Malformed("parity mismatch".into())),
        }
    }

    pub fn is_trivial(&self, x: &H1Mu) -> Result<bool> {
        self.equal(x, &self.one())
    }

    pub fn map_i(&self, f: &Elem) -> H1Mu {
        if self.odd {
            H1Mu::Odd { f: f.clone(), z: self.etale.from_base(&self.field().square(f)) }
        } else {
            H1Mu::Even(self.etale.from_base(f))
        }
    }

    pub fn map_i_class(&self, c: SquareClass) -> H1Mu {
        self.map_i(&self.field().class_rep(c))
    }

    pub fn map_j(&self, x: &H1Mu) -> Result<SquareClass> {
        self.validate(x)?;
        let k = self.field();
        let z = &self.etale;
        match x {
            H1Mu::Even(a) => k.square_class(&z.norm(a)),
            H1Mu::Odd { f, z: w } => {
                let c = z.div(w, &z.from_base(&k.square(f)))?;
                let n = match z.to_split(&c) {
                    Some((c1, _)) => c1,
                    None => {
                        let minus_one = z.from_base(&k.from_int(-1));
                        let z0 = if z.eq(&c, &minus_one) { z.delta() } else { z.add(&z.one(), &c) };
                        z.norm(&z0)
                    }
                };
                k.square_class(&n)
            }
        }
    }

    /// Corestriction `H^1(L, mu) -> H^1(K, mu)`; `self` is the context over
    /// `K` and `upper` its base change to `L`.
    pub fn norm_from(&self, ext: &Extension, upper: &H1Context, x: &H1Mu) -> Result<H1Mu> {
        upper.validate(x)?;
        let zl = &upper.etale;
        let core = |w: &ZElem| -> Result<ZElem> {
            let mut prod = w.clone();
            let mut cur = w.clone();
            for _ in 1..ext.degree() {
                cur = ZElem { a: ext.conj(&cur.a), b: ext.conj(&cur.b) };
                prod = zl.mul(&prod, &cur);
            }
            let down = |e: &Elem| ext.descend(e).ok_or_else(|| Error::Malformed("norm is not Galois-fixed".into()));
            Ok(ZElem { a: down(&prod.a)?, b: down(&prod.b)? })
        };
        Ok(match x {
            H1Mu::Even(w) => H1Mu::Even(core(w)?),
            H1Mu::Odd { f, z } => H1Mu::Odd { f: ext.norm(f), z: core(z)? },
        })
    }

    /// Restriction `H^1(K, mu) -> H^1(L, mu)`.
    pub fn restrict(&self, ext: &Extension, x: &H1Mu) -> H1Mu {
        let up = |w: &ZElem| ZElem { a: ext.embed(&w.a), b: ext.embed(&w.b) };
        match x {
            H1Mu::Even(w) => H1Mu::Even(up(w)),
            H1Mu::Odd { f, z } => H1Mu::Odd { f: ext.embed(f), z: up(z) },
        }
    }

    /// All classes, one representative each.
    pub fn enumerate(&self) -> Result<Vec<H1Mu>> {
        let z = &self.etale;
        if !self.odd {
            return Ok(z.classes().into_iter().map(|c| H1Mu::Even(z.class_rep(c))).collect());
        }
        // one section per norm class, then translate by the image of i
        let mut sections: BTreeMap<SquareClass, ZElem> = BTreeMap::new();
        for c in z.classes() {
            let z0 = z.class_rep(c);
            let lambda = self.field().square_class(&z.norm(&z0))?;
            sections.entry(lambda).or_insert(z0);
        }
        let mut out: Vec<H1Mu> = vec![];
        for z0 in sections.values() {
            let s = H1Mu::Odd { f: self.field().one(), z: z.div(z0, &z.psi(z0))? };
            for f in self.field().classes() {
                let x = self.mul(&s, &self.map_i_class(f));
                if !self.contains(&out, &x)? {
                    out.push(x);
                }
            }
        }
        Ok(out)
    }

    pub fn contains(&self, list: &[H1Mu], x: &H1Mu) -> Result<bool> {
        for y in list {
            if self.equal(x, y)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `H(X)`: the classes whose `j`-image is a similarity factor.
    pub fn subgroup_h(&self, similarity: &Subgroup) -> Result<Vec<H1Mu>> {
        let mut out = vec![];
        for x in self.enumerate()? {
            if similarity.contains(self.map_j(&x)?) {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Top valuation `2k` of `d`, required to be even.
    fn d_shift(&self) -> Result<i64> {
        let (v, _) = self.field().valuation_residue(self.etale.d())?;
        if v % 2 != 0 {
            return Err(Error::Precondition("Z is ramified".into()));
        }
        Ok(v / 2)
    }

    /// The context over the residue field, for unramified or split `Z`.
    pub fn residue_context(&self) -> Result<H1Context> {
        let k = self.field();
        let shift = self.d_shift()?;
        let theta = k.t(k.height());
        let unit_d = k.div(self.etale.d(), &k.pow(&theta, 2 * shift))?;
        H1Context::new(&k.residue_field()?, k.reduce(&unit_d)?, self.odd)
    }

    /// Reduction of a class given by unit data.
    pub fn specialize(&self, x: &H1Mu) -> Result<H1Mu> {
        let k = self.field();
        let shift = self.d_shift()?;
        let theta_k = k.pow(&k.t(k.height()), shift);
        let red = |w: &ZElem| -> Result<ZElem> { Ok(ZElem { a: k.reduce(&w.a)?, b: k.reduce(&k.mul(&w.b, &theta_k))? }) };
        let unit = |e: &Elem| -> Result<()> {
            if k.valuation_residue(e)?.0 != 0 {
                return Err(Error::Precondition("representative is not a unit".into()));
            }
            Ok(())
        };
        let out = match x {
            H1Mu::Even(w) => {
                unit(&self.etale.norm(w))?;
                H1Mu::Even(red(w)?)
            }
            H1Mu::Odd { f, z } => {
                unit(f)?;
                H1Mu::Odd { f: k.reduce(f)?, z: red(z)? }
            }
        };
        Ok(out)
    }

    /// Constant lift of a class of the residue context.
    pub fn lift(&self, x: &H1Mu) -> Result<H1Mu> {
        let k = self.field();
        let a = k.arith();
        let r = k.height();
        let shift = self.d_shift()?;
        let theta_k = k.pow(&k.t(r), shift);
        let up = |e: &Elem| a.constant(r, e.clone());
        let up_z = |w: &ZElem| -> Result<ZElem> { Ok(ZElem { a: up(&w.a), b: k.div(&up(&w.b), &theta_k)? }) };
        Ok(match x {
            H1Mu::Even(w) => H1Mu::Even(up_z(w)?),
            H1Mu::Odd { f, z } => H1Mu::Odd { f: up(f), z: up_z(z)? },
        })
    }

    /// Classes with unit representatives, as lifts of the residue classes.
    pub fn unit_classes(&self) -> Result<Vec<H1Mu>> {
        let res = self.residue_context()?;
        res.enumerate()?.iter().map(|x| self.lift(x)).collect()
    }

    /// Writes `u = u' * i(theta^eps)` with `u'` given by unit data, for `Z`
    /// unramified or split and `j(u)` a unit class.
    pub fn decompose_unramified(&self, u: &H1Mu) -> Result<(H1Mu, i64)> {
        let k = self.field();
        let r = k.height();
        if r == 0 {
            return Err(Error::Precondition("needs a valued field".into()));
        }
        if self.etale.d_class().has_t(r) {
            return Err(Error::Precondition("Z is ramified".into()));
        }
        if self.map_j(u)?.has_t(r) {
            return Err(Error::Precondition("j(u) is not a unit class".into()));
        }
        let theta = k.t(r);
        let v = |e: &Elem| k.valuation_residue(e).map(|(v, _)| v);
        let tp = |e: i64| k.pow(&theta, -e);
        let z = &self.etale;
        let (u1, eps) = match (u, z.shape()) {
            (H1Mu::Even(w), Shape::Split { .. }) => {
                let (x, y) = z.to_split(w).unwrap();
                let (vx, vy) = (v(&x)?, v(&y)?);
                (H1Mu::Even(z.from_split(&k.mul(&x, &tp(vx)), &k.mul(&y, &tp(vy)))), vx)
            }
            (H1Mu::Even(w), Shape::Field { ext, .. }) => {
                let e = ext.top();
                let ze = z.to_ext(w).unwrap();
                let ve = e.valuation_residue(&ze)?.0;
                (H1Mu::Even(z.from_ext(&e.mul(&ze, &e.pow(&e.t(r), -ve)))), ve)
            }
            (H1Mu::Odd { f, z: w }, Shape::Field { .. }) => {
                let eps = v(f)?;
                (H1Mu::Odd { f: k.mul(f, &tp(eps)), z: z.scale(w, &tp(2 * eps)) }, eps)
            }
            (H1Mu::Odd { f, z: w }, Shape::Split { .. }) => {
                let (x, y) = z.to_split(w).unwrap();
                let (vx, vy) = (v(&x)?, v(&y)?);
                if vx % 2 != 0 {
                    return Err(Error::Malformed("odd valuation in the first coordinate".into()));
                }
                let eps = (vx / 2).rem_euclid(2);
                let (a, b) = ((vx - 2 * eps) / 4, (vy - 2 * eps) / 4);
                let f1 = k.mul(f, &tp(a + b + eps));
                let z1 = z.from_split(&k.mul(&x, &tp(4 * a + 2 * eps)), &k.mul(&y, &tp(4 * b + 2 * eps)));
                (H1Mu::Odd { f: f1, z: z1 }, eps)
            }
        };
        Ok((u1, eps))
    }

    pub fn to_json(&self, x: &H1Mu) -> Value {
        let k = self.field();
        let zj = |w: &ZElem| json!([k.elem_to_json(&w.a), k.elem_to_json(&w.b)]);
        match x {
            H1Mu::Even(w) => json!({"parity": "even", "data": {"z": zj(w)}}),
            H1Mu::Odd { f, z } => json!({"parity": "odd", "data": {"f": k.elem_to_json(f), "z": zj(z)}}),
        }
    }

    pub fn from_json(&self, v: &Value) -> Result<H1Mu> {
        let k = self.field();
        let bad = |s: &str| Error::Parse(format!("H^1 class: {s}"));
        let data = v.get("data").ok_or_else(|| bad("missing data"))?;
        let zp = |w: &Value| -> Result<ZElem> {
            let arr = w.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("z must be a pair"))?;
            Ok(ZElem { a: k.elem_from_json(&arr[0])?, b: k.elem_from_json(&arr[1])? })
        };
        let x = match v.get("parity").and_then(Value::as_str) {
            Some("even") => H1Mu::Even(zp(data.get("z").ok_or_else(|| bad("missing z"))?)?),
            Some("odd") => H1Mu::Odd {
                f: k.elem_from_json(data.get("f").ok_or_else(|| bad("missing f"))?)?,
                z: zp(data.get("z").ok_or_else(|| bad("missing z"))?)?,
            },
            _ => return Err(bad("parity must be even or odd")),
        };
        self.validate(&x)?;
        Ok(x)
    }
}
