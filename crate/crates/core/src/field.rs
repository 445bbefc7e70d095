//! Field descriptors `F_q((t_1))...((t_r))` and the operations on their
//! elements that only need valuations and residues: square classes, fourth
//! powers, Hilbert symbols and norm groups.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::class::{SquareClass, Subgroup};
use crate::elem::{Arith, Elem, Laurent};
use crate::error::{Error, Result};
use crate::finite::{prime_power, FiniteField};
use crate::testing::Mutation;

/// A finite base field with `r` Laurent layers on top. Cheap to clone.
#[derive(Clone)]
pub struct FieldDesc {
    finite: Arc<FiniteField>,
    towers: Arc<[String]>,
    mutation: Mutation,
}

impl PartialEq for FieldDesc {
    fn eq(&self, other: &Self) -> bool {
        *self.finite == *other.finite && self.towers == other.towers && self.mutation == other.mutation
    }
}
impl Eq for FieldDesc {}

impl fmt::Debug for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.finite.order())?;
        for t in self.towers.iter() {
            write!(f, "(({t}))")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct BaseJson {
    pub q: u32,
    /// Defining polynomial, low degree first; empty picks the default one.
    #[serde(default)]
    pub modulus: Vec<u32>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct FieldJson {
    pub base: BaseJson,
    #[serde(default)]
    pub towers: Vec<String>,
}

impl FieldDesc {
    pub fn new(finite: Arc<FiniteField>, towers: Vec<String>) -> Result<FieldDesc> {
        for (i, t) in towers.iter().enumerate() {
            if t.is_empty() || towers[..i].contains(t) {
                return Err(Error::InvalidField(format!("uniformizer symbols {towers:?} must be distinct and nonempty")));
            }
        }
        if towers.len() > 30 {
            return Err(Error::InvalidField("tower too tall".into()));
        }
        Ok(FieldDesc { finite, towers: towers.into(), mutation: Mutation::None })
    }

    /// `F_q` with its default modulus.
    pub fn finite(q: u32) -> Result<FieldDesc> {
        FieldDesc::tower(q, &[])
    }

    /// `F_q((t_1))...` with the given uniformizer names.
    pub fn tower(q: u32, names: &[&str]) -> Result<FieldDesc> {
        let (p, k) = prime_power(q).ok_or_else(|| Error::InvalidField(format!("{q} is not a prime power")))?;
        if p == 2 {
            return Err(Error::InvalidField("characteristic 2 is not supported".into()));
        }
        FieldDesc::new(FiniteField::shared(p, k)?, names.iter().map(|s| s.to_string()).collect())
    }

    #[doc(hidden)]
    pub fn with_mutation(mut self, mutation: Mutation) -> FieldDesc {
        self.mutation = mutation;
        self
    }

    pub fn mutation(&self) -> Mutation {
        self.mutation
    }

    pub fn height(&self) -> usize {
        self.towers.len()
    }

    pub fn base(&self) -> &FiniteField {
        &self.finite
    }

    pub fn base_arc(&self) -> &Arc<FiniteField> {
        &self.finite
    }

    pub fn towers(&self) -> &[String] {
        &self.towers
    }

    pub fn arith(&self) -> Arith<'_> {
        Arith::new(&self.finite)
    }

    /// Same base with the top layer removed.
    pub fn residue_field(&self) -> Result<FieldDesc> {
        if self.height() == 0 {
            return Err(Error::Precondition("a finite field has no residue field".into()));
        }
        Ok(FieldDesc {
            finite: self.finite.clone(),
            towers: self.towers[..self.height() - 1].into(),
            mutation: self.mutation,
        })
    }

    /// Replaces the base and the layer names, keeping the mutation hook.
    pub(crate) fn derived(&self, finite: Arc<FiniteField>, towers: Vec<String>) -> FieldDesc {
        FieldDesc { finite, towers: towers.into(), mutation: self.mutation }
    }

    pub fn zero(&self) -> Elem {
        self.arith().zero(self.height())
    }

    pub fn one(&self) -> Elem {
        self.arith().one(self.height())
    }

    pub fn from_int(&self, n: i64) -> Elem {
        self.arith().from_int(self.height(), n)
    }

    /// `t_j`, `1 <= j <= r`.
    pub fn t(&self, j: usize) -> Elem {
        let a = self.arith();
        a.lift(self.height(), j, a.uniformizer(j))
    }

    pub fn constant(&self, code: u32) -> Elem {
        self.arith().lift(self.height(), 0, Elem::Fin(code))
    }

    pub fn monomial(&self, lc: u32, exps: &[i64]) -> Elem {
        self.arith().monomial(self.height(), lc, exps)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        self.arith().add(self.height(), a, b)
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.arith().sub(self.height(), a, b)
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        self.arith().mul(self.height(), a, b)
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        self.arith().neg(self.height(), a)
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem> {
        self.arith().inv(self.height(), a).ok_or(Error::DivisionByZero)
    }

    pub fn div(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        self.arith().div(self.height(), a, b).ok_or(Error::DivisionByZero)
    }

    pub fn pow(&self, a: &Elem, e: i64) -> Elem {
        self.arith().pow(self.height(), a, e)
    }

    pub fn square(&self, a: &Elem) -> Elem {
        self.mul(a, a)
    }

    pub fn eq(&self, a: &Elem, b: &Elem) -> bool {
        self.arith().eq(self.height(), a, b)
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        self.arith().is_zero(self.height(), a)
    }

    /// `x = t^v * w` with `w` a unit whose residue is returned.
    pub fn valuation_residue(&self, x: &Elem) -> Result<(i64, Elem)> {
        if self.height() == 0 {
            return Err(Error::Precondition("finite fields carry no valuation".into()));
        }
        let a = self.arith();
        let v = a.valuation(x).ok_or(Error::ZeroInput("valuation"))?;
        let r = a.residue(self.height(), x).ok_or(Error::ZeroInput("residue"))?;
        Ok((v, r))
    }

    /// Reduction of an integral element to the residue field.
    pub fn reduce(&self, x: &Elem) -> Result<Elem> {
        self.arith()
            .reduce(self.height(), x)
            .ok_or_else(|| Error::Precondition("element is not integral".into()))
    }

    /// `(e_1..e_r, lc)` with `x = lc * prod t_j^e_j * (1 + higher terms)`.
    pub fn leading(&self, x: &Elem) -> Result<(Vec<i64>, u32)> {
        self.arith().leading(self.height(), x).ok_or(Error::ZeroInput("leading term"))
    }

    pub fn square_class(&self, x: &Elem) -> Result<SquareClass> {
        let (exps, lc) = self.leading(x)?;
        Ok(class_of_leading(&self.finite, &exps, lc))
    }

    pub fn is_square(&self, x: &Elem) -> Result<bool> {
        Ok(self.square_class(x)?.is_trivial())
    }

    pub fn is_fourth_power(&self, x: &Elem) -> Result<bool> {
        let (exps, lc) = self.leading(x)?;
        Ok(exps.iter().all(|e| e.rem_euclid(4) == 0) && self.finite.is_fourth_power(lc))
    }

    /// Canonical representative `u^a * prod t_j^{e_j}` of a class.
    pub fn class_rep(&self, c: SquareClass) -> Elem {
        let lc = if c.has_u() { self.finite.nonsquare() } else { 1 };
        let exps: Vec<i64> = (1..=self.height()).map(|j| c.has_t(j) as i64).collect();
        self.monomial(lc, &exps)
    }

    pub fn classes(&self) -> impl Iterator<Item = SquareClass> {
        SquareClass::all(self.height())
    }

    pub fn class_count(&self) -> usize {
        1 << (self.height() + 1)
    }

    pub fn minus_one_class(&self) -> SquareClass {
        if self.finite.is_square(self.finite.neg(1)) {
            SquareClass::ONE
        } else {
            SquareClass::U
        }
    }

    /// Hilbert symbol on square classes, computed by peeling off one layer at
    /// a time: the tame residue at the top layer decides unless it is trivial,
    /// in which case the symbol equals the one of the residues.
    pub fn hilbert_class(&self, a: SquareClass, b: SquareClass) -> i8 {
        let r = self.height();
        let mut s = hilbert_at(r, self.minus_one_class(), a, b);
        if self.mutation == Mutation::FlipHilbert && r > 0 && a.has_t(r) && b.has_t(r) {
            s = -s;
        }
        s
    }

    pub fn hilbert_symbol(&self, a: &Elem, b: &Elem) -> Result<i8> {
        Ok(self.hilbert_class(self.square_class(a)?, self.square_class(b)?))
    }

    /// Classes that are norms from `K(sqrt d)`.
    pub fn norm_group(&self, d: SquareClass) -> Subgroup {
        Subgroup::span(self.height(), self.classes().filter(|&c| self.hilbert_class(c, d) == 1))
    }

    pub fn full_group(&self) -> Subgroup {
        Subgroup::full(self.height())
    }

    pub fn to_json(&self) -> FieldJson {
        FieldJson {
            base: BaseJson { q: self.finite.order(), modulus: self.finite.modulus().to_vec() },
            towers: self.towers.to_vec(),
        }
    }

    pub fn from_json(j: &FieldJson) -> Result<FieldDesc> {
        let (p, _) = prime_power(j.base.q).ok_or_else(|| Error::InvalidField(format!("{} is not a prime power", j.base.q)))?;
        if j.base.modulus.is_empty() {
            return FieldDesc::new(FiniteField::shared(p, prime_power(j.base.q).unwrap().1)?, j.towers.clone());
        }
        let ff = FiniteField::new(p, j.base.modulus.clone())?;
        if ff.order() != j.base.q {
            return Err(Error::InvalidField(format!("modulus degree does not match q = {}", j.base.q)));
        }
        let shared = FiniteField::shared(p, ff.degree())?;
        let finite = if *shared == ff { shared } else { Arc::new(ff) };
        FieldDesc::new(finite, j.towers.clone())
    }

    /// Elements as nested objects: a finite-field element is its coefficient
    /// list over F_p; a series element is `{num, den}` with each side
    /// `{low, coeffs}`.
    pub fn elem_to_json(&self, x: &Elem) -> Value {
        elem_json(&self.finite, self.height(), x)
    }

    pub fn elem_from_json(&self, v: &Value) -> Result<Elem> {
        elem_parse(&self.finite, self.height(), v)
    }

    /// A random element with small support, for tests and sampling.
    pub fn random_elem(&self, rng: &mut impl Rng, spread: i64, terms: usize) -> Elem {
        random_at(&self.finite, self.height(), rng, spread, terms)
    }

    pub fn random_nonzero(&self, rng: &mut impl Rng, spread: i64, terms: usize) -> Elem {
        loop {
            let x = self.random_elem(rng, spread, terms);
            if !self.is_zero(&x) {
                return x;
            }
        }
    }
}

pub(crate) fn class_of_leading(ff: &FiniteField, exps: &[i64], lc: u32) -> SquareClass {
    let mut bits = (!ff.is_square(lc)) as u32;
    for (i, e) in exps.iter().enumerate() {
        bits |= (e.rem_euclid(2) as u32) << (i + 1);
    }
    SquareClass(bits)
}

fn hilbert_at(l: usize, minus_one: SquareClass, a: SquareClass, b: SquareClass) -> i8 {
    if l == 0 {
        return 1;
    }
    let (alpha, beta) = (a.has_t(l), b.has_t(l));
    let (a0, b0) = (a.truncate(l - 1), b.truncate(l - 1));
    let mut tame = SquareClass::ONE;
    if alpha && beta {
        tame = tame * minus_one;
    }
    if beta {
        tame = tame * a0;
    }
    if alpha {
        tame = tame * b0;
    }
    if tame.is_trivial() {
        hilbert_at(l - 1, minus_one, a0, b0)
    } else {
        -1
    }
}

fn elem_json(ff: &FiniteField, l: usize, x: &Elem) -> Value {
    match x {
        Elem::Fin(c) => json!(ff.coefficients(*c)),
        Elem::Ser(f) => {
            let side = |p: &Laurent| {
                json!({"low": p.low, "coeffs": p.coeffs.iter().map(|c| elem_json(ff, l - 1, c)).collect::<Vec<_>>()})
            };
            json!({"num": side(&f.num), "den": side(&f.den)})
        }
    }
}

fn elem_parse(ff: &FiniteField, l: usize, v: &Value) -> Result<Elem> {
    let bad = |what: &str| Error::Parse(format!("element at level {l}: {what}"));
    if l == 0 {
        let coeffs: Vec<u32> = serde_json::from_value(v.clone()).map_err(|e| bad(&e.to_string()))?;
        return ff.from_coefficients(&coeffs).map(Elem::Fin);
    }
    let side = |key: &str| -> Result<Laurent> {
        let s = v.get(key).ok_or_else(|| bad(&format!("missing {key}")))?;
        let low = s.get("low").and_then(Value::as_i64).ok_or_else(|| bad("missing low"))?;
        let coeffs = s
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing coeffs"))?
            .iter()
            .map(|c| elem_parse(ff, l - 1, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Laurent { low, coeffs })
    };
    let a = Arith::new(ff);
    let (num, mut den) = (side("num")?, side("den")?);
    a.lp_trim(l - 1, &mut den);
    if den.coeffs.is_empty() {
        return Err(Error::DivisionByZero);
    }
    Ok(a.fraction(l, num, den))
}

fn random_at(ff: &FiniteField, l: usize, rng: &mut impl Rng, spread: i64, terms: usize) -> Elem {
    let a = Arith::new(ff);
    if l == 0 {
        return Elem::Fin(rng.gen_range(0..ff.order()));
    }
    let len = rng.gen_range(1..=terms.max(1));
    let num = Laurent {
        low: rng.gen_range(-spread..=spread),
        coeffs: (0..len).map(|_| random_at(ff, l - 1, rng, spread, terms)).collect(),
    };
    let den = if rng.gen_bool(0.5) {
        Laurent { low: 0, coeffs: vec![a.one(l - 1)] }
    } else {
        let mut coeffs = vec![a.one(l - 1)];
        coeffs.extend((0..rng.gen_range(1..=2)).map(|_| random_at(ff, l - 1, rng, spread, terms)));
        Laurent { low: 0, coeffs }
    };
    a.fraction(l, num, den)
}
