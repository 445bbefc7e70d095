//! Exact elements of `F_q((t_1))...((t_r))`.
//!
//! A level-0 element is a finite-field code. A level-`l` element is a fraction
//! of finitely supported Laurent polynomials in `t_l` whose coefficients are
//! level-`(l-1)` elements. Fractions are kept with a denominator of valuation
//! zero and leading coefficient one; exact quotients are divided out so that
//! anything equal to a Laurent polynomial is stored as one.

use crate::finite::FiniteField;

#[derive(Clone, Debug)]
pub enum Elem {
    Fin(u32),
    Ser(Box<Frac>),
}

#[derive(Clone, Debug)]
pub struct Frac {
    pub num: Laurent,
    pub den: Laurent,
}

/// `sum_i coeffs[i] * t^(low + i)`; trimmed so that both ends are nonzero.
#[derive(Clone, Debug)]
pub struct Laurent {
    pub low: i64,
    pub coeffs: Vec<Elem>,
}

impl Elem {
    pub fn code(&self) -> u32 {
        match self {
            Elem::Fin(c) => *c,
            Elem::Ser(_) => panic!("expected a finite-field element"),
        }
    }

    pub fn frac(&self) -> &Frac {
        match self {
            Elem::Ser(f) => f,
            Elem::Fin(_) => panic!("expected a series element"),
        }
    }
}

/// Arithmetic over the tower with finite base `ff`; every call names the
/// level of its operands.
#[derive(Clone, Copy)]
pub struct Arith<'a> {
    pub ff: &'a FiniteField,
}

impl<'a> Arith<'a> {
    pub fn new(ff: &'a FiniteField) -> Self {
        Arith { ff }
    }

    pub fn zero(&self, l: usize) -> Elem {
        if l == 0 {
            Elem::Fin(0)
        } else {
            Elem::Ser(Box::new(Frac { num: Laurent { low: 0, coeffs: vec![] }, den: self.lp_one(l - 1) }))
        }
    }

    pub fn one(&self, l: usize) -> Elem {
        if l == 0 {
            Elem::Fin(1)
        } else {
            self.constant(l, self.one(l - 1))
        }
    }

    fn lp_one(&self, c: usize) -> Laurent {
        Laurent { low: 0, coeffs: vec![self.one(c)] }
    }

    /// Embeds a level-`(l-1)` element as a constant of level `l`.
    pub fn constant(&self, l: usize, c: Elem) -> Elem {
        let mut num = Laurent { low: 0, coeffs: vec![c] };
        self.lp_trim(l - 1, &mut num);
        Elem::Ser(Box::new(Frac { num, den: self.lp_one(l - 1) }))
    }

    /// Lifts a level-`from` element to level `to >= from`.
    pub fn lift(&self, to: usize, from: usize, mut x: Elem) -> Elem {
        for l in from + 1..=to {
            x = self.constant(l, x);
        }
        x
    }

    /// `t_l` as a level-`l` element.
    pub fn uniformizer(&self, l: usize) -> Elem {
        Elem::Ser(Box::new(Frac {
            num: Laurent { low: 1, coeffs: vec![self.one(l - 1)] },
            den: self.lp_one(l - 1),
        }))
    }

    pub fn from_int(&self, l: usize, n: i64) -> Elem {
        self.lift(l, 0, Elem::Fin(self.ff.from_int(n)))
    }

    /// `lc * t_1^e_1 * ... * t_l^e_l`.
    pub fn monomial(&self, l: usize, lc: u32, exps: &[i64]) -> Elem {
        assert_eq!(exps.len(), l);
        if l == 0 {
            return Elem::Fin(lc);
        }
        let inner = self.monomial(l - 1, lc, &exps[..l - 1]);
        let mut num = Laurent { low: exps[l - 1], coeffs: vec![inner] };
        self.lp_trim(l - 1, &mut num);
        Elem::Ser(Box::new(Frac { num, den: self.lp_one(l - 1) }))
    }

    pub fn is_zero(&self, l: usize, x: &Elem) -> bool {
        match x {
            Elem::Fin(c) => {
                debug_assert_eq!(l, 0);
                *c == 0
            }
            Elem::Ser(f) => f.num.coeffs.is_empty(),
        }
    }

    /// Structural test; exact for normalized values.
    pub fn is_one(&self, l: usize, x: &Elem) -> bool {
        match x {
            Elem::Fin(c) => *c == 1,
            Elem::Ser(f) => {
                self.lp_is_one(l - 1, &f.den) && self.lp_is_one(l - 1, &f.num)
            }
        }
    }

    fn lp_is_one(&self, c: usize, p: &Laurent) -> bool {
        p.low == 0 && p.coeffs.len() == 1 && self.is_one(c, &p.coeffs[0])
    }

    pub fn eq(&self, l: usize, a: &Elem, b: &Elem) -> bool {
        match (a, b) {
            (Elem::Fin(x), Elem::Fin(y)) => x == y,
            (Elem::Ser(x), Elem::Ser(y)) => {
                let c = l - 1;
                if self.lp_is_one(c, &x.den) && self.lp_is_one(c, &y.den) {
                    self.lp_eq(c, &x.num, &y.num)
                } else {
                    let lhs = self.lp_mul(c, &x.num, &y.den);
                    let rhs = self.lp_mul(c, &y.num, &x.den);
                    self.lp_eq(c, &lhs, &rhs)
                }
            }
            _ => panic!("level mismatch"),
        }
    }

    pub fn neg(&self, l: usize, a: &Elem) -> Elem {
        match a {
            Elem::Fin(x) => Elem::Fin(self.ff.neg(*x)),
            Elem::Ser(f) => Elem::Ser(Box::new(Frac { num: self.lp_neg(l - 1, &f.num), den: f.den.clone() })),
        }
    }

    pub fn add(&self, l: usize, a: &Elem, b: &Elem) -> Elem {
        match (a, b) {
            (Elem::Fin(x), Elem::Fin(y)) => Elem::Fin(self.ff.add(*x, *y)),
            (Elem::Ser(x), Elem::Ser(y)) => {
                let c = l - 1;
                if self.lp_is_one(c, &x.den) && self.lp_is_one(c, &y.den) {
                    let mut num = self.lp_add(c, &x.num, &y.num);
                    self.lp_trim(c, &mut num);
                    return Elem::Ser(Box::new(Frac { num, den: x.den.clone() }));
                }
                let num = self.lp_add(c, &self.lp_mul(c, &x.num, &y.den), &self.lp_mul(c, &y.num, &x.den));
                let den = self.lp_mul(c, &x.den, &y.den);
                self.fraction(l, num, den)
            }
            _ => panic!("level mismatch"),
        }
    }

    pub fn sub(&self, l: usize, a: &Elem, b: &Elem) -> Elem {
        self.add(l, a, &self.neg(l, b))
    }

    pub fn mul(&self, l: usize, a: &Elem, b: &Elem) -> Elem {
        match (a, b) {
            (Elem::Fin(x), Elem::Fin(y)) => Elem::Fin(self.ff.mul(*x, *y)),
            (Elem::Ser(x), Elem::Ser(y)) => {
                let c = l - 1;
                let num = self.lp_mul(c, &x.num, &y.num);
                if self.lp_is_one(c, &x.den) && self.lp_is_one(c, &y.den) {
                    return Elem::Ser(Box::new(Frac { num, den: x.den.clone() }));
                }
                let den = self.lp_mul(c, &x.den, &y.den);
                self.fraction(l, num, den)
            }
            _ => panic!("level mismatch"),
        }
    }

    pub fn inv(&self, l: usize, a: &Elem) -> Option<Elem> {
        if self.is_zero(l, a) {
            return None;
        }
        Some(match a {
            Elem::Fin(x) => Elem::Fin(self.ff.inv(*x).unwrap()),
            Elem::Ser(f) => self.fraction(l, f.den.clone(), f.num.clone()),
        })
    }

    pub fn div(&self, l: usize, a: &Elem, b: &Elem) -> Option<Elem> {
        Some(self.mul(l, a, &self.inv(l, b)?))
    }

    pub fn pow(&self, l: usize, a: &Elem, e: i64) -> Elem {
        let base = if e < 0 { self.inv(l, a).expect("negative power of zero") } else { a.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = self.one(l);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(l, &acc, &sq);
            }
            e >>= 1;
            if e > 0 {
                sq = self.mul(l, &sq, &sq);
            }
        }
        acc
    }

    pub fn scale(&self, l: usize, a: &Elem, c: &Elem) -> Elem {
        self.mul(l, a, &self.constant(l, c.clone()))
    }

    /// Top valuation of a nonzero level-`l >= 1` element.
    pub fn valuation(&self, x: &Elem) -> Option<i64> {
        let f = x.frac();
        (!f.num.coeffs.is_empty()).then(|| f.num.low - f.den.low)
    }

    /// Leading coefficient of the unit part, a level-`(l-1)` element.
    pub fn residue(&self, l: usize, x: &Elem) -> Option<Elem> {
        let f = x.frac();
        let n = f.num.coeffs.first()?;
        self.div(l - 1, n, &f.den.coeffs[0])
    }

    /// Image in the residue field of an integral element (zero on the maximal ideal).
    pub fn reduce(&self, l: usize, x: &Elem) -> Option<Elem> {
        match self.valuation(x) {
            None => Some(self.zero(l - 1)),
            Some(v) if v > 0 => Some(self.zero(l - 1)),
            Some(0) => self.residue(l, x),
            Some(_) => None,
        }
    }

    /// Iterated valuations `(e_1, ..., e_l)` and the final finite-field
    /// leading coefficient, so that `x = lc * prod t_i^e_i * (iterated one-unit)`.
    pub fn leading(&self, l: usize, x: &Elem) -> Option<(Vec<i64>, u32)> {
        if l == 0 {
            let c = x.code();
            return (c != 0).then(|| (vec![], c));
        }
        let v = self.valuation(x)?;
        let r = self.residue(l, x)?;
        let (mut exps, lc) = self.leading(l - 1, &r)?;
        exps.push(v);
        Some((exps, lc))
    }

    /// Normalized `num / den` at level `l`; `den` must be nonzero.
    pub fn fraction(&self, l: usize, mut num: Laurent, mut den: Laurent) -> Elem {
        let c = l - 1;
        self.lp_trim(c, &mut num);
        self.lp_trim(c, &mut den);
        assert!(!den.coeffs.is_empty(), "zero denominator");
        if num.coeffs.is_empty() {
            return self.zero(l);
        }
        num.low -= den.low;
        den.low = 0;
        if !self.is_one(c, &den.coeffs[0]) {
            let inv = self.inv(c, &den.coeffs[0]).unwrap();
            num = self.lp_scale(c, &num, &inv);
            den = self.lp_scale(c, &den, &inv);
        }
        if den.coeffs.len() > 1 {
            if let Some(q) = self.lp_div_exact(c, &num, &den) {
                num = q;
                den = self.lp_one(c);
            }
        }
        Elem::Ser(Box::new(Frac { num, den }))
    }

    pub fn lp_trim(&self, c: usize, p: &mut Laurent) {
        while p.coeffs.last().is_some_and(|x| self.is_zero(c, x)) {
            p.coeffs.pop();
        }
        let lead = p.coeffs.iter().take_while(|x| self.is_zero(c, x)).count();
        if lead > 0 {
            p.coeffs.drain(..lead);
            p.low += lead as i64;
        }
        if p.coeffs.is_empty() {
            p.low = 0;
        }
    }

    fn lp_eq(&self, c: usize, a: &Laurent, b: &Laurent) -> bool {
        a.low == b.low
            && a.coeffs.len() == b.coeffs.len()
            && a.coeffs.iter().zip(&b.coeffs).all(|(x, y)| self.eq(c, x, y))
    }

    fn lp_neg(&self, c: usize, a: &Laurent) -> Laurent {
        Laurent { low: a.low, coeffs: a.coeffs.iter().map(|x| self.neg(c, x)).collect() }
    }

    fn lp_add(&self, c: usize, a: &Laurent, b: &Laurent) -> Laurent {
        if a.coeffs.is_empty() {
            return b.clone();
        }
        if b.coeffs.is_empty() {
            return a.clone();
        }
        let low = a.low.min(b.low);
        let high = (a.low + a.coeffs.len() as i64).max(b.low + b.coeffs.len() as i64);
        let coeffs = (low..high)
            .map(|e| {
                fn get(p: &Laurent, e: i64) -> Option<&Elem> {
                    let i = e - p.low;
                    (i >= 0 && (i as usize) < p.coeffs.len()).then(|| &p.coeffs[i as usize])
                }
                match (get(a, e), get(b, e)) {
                    (Some(x), Some(y)) => self.add(c, x, y),
                    (Some(x), None) | (None, Some(x)) => x.clone(),
                    (None, None) => self.zero(c),
                }
            })
            .collect();
        let mut out = Laurent { low, coeffs };
        self.lp_trim(c, &mut out);
        out
    }

    pub fn lp_mul(&self, c: usize, a: &Laurent, b: &Laurent) -> Laurent {
        if a.coeffs.is_empty() || b.coeffs.is_empty() {
            return Laurent { low: 0, coeffs: vec![] };
        }
        let n = a.coeffs.len() + b.coeffs.len() - 1;
        let mut coeffs: Vec<Option<Elem>> = vec![None; n];
        for (i, x) in a.coeffs.iter().enumerate() {
            if self.is_zero(c, x) {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if self.is_zero(c, y) {
                    continue;
                }
                let prod = self.mul(c, x, y);
                coeffs[i + j] = Some(match coeffs[i + j].take() {
                    Some(acc) => self.add(c, &acc, &prod),
                    None => prod,
                });
            }
        }
        let mut out = Laurent {
            low: a.low + b.low,
            coeffs: coeffs.into_iter().map(|x| x.unwrap_or_else(|| self.zero(c))).collect(),
        };
        self.lp_trim(c, &mut out);
        out
    }

    fn lp_scale(&self, c: usize, a: &Laurent, k: &Elem) -> Laurent {
        let mut out = Laurent { low: a.low, coeffs: a.coeffs.iter().map(|x| self.mul(c, x, k)).collect() };
        self.lp_trim(c, &mut out);
        out
    }

    /// `num / den` when `den` has `low = 0`, constant term one, and divides `num`.
    fn lp_div_exact(&self, c: usize, num: &Laurent, den: &Laurent) -> Option<Laurent> {
        let n = num.coeffs.len();
        let m = den.coeffs.len();
        if n < m {
            return None;
        }
        let qlen = n - m + 1;
        let mut q: Vec<Elem> = Vec::with_capacity(qlen);
        for i in 0..n {
            let mut acc = num.coeffs[i].clone();
            for j in 1..m.min(i + 1) {
                if i - j < q.len() {
                    acc = self.sub(c, &acc, &self.mul(c, &den.coeffs[j], &q[i - j]));
                }
            }
            if i < qlen {
                q.push(acc);
            } else if !self.is_zero(c, &acc) {
                return None;
            }
        }
        let mut out = Laurent { low: num.low, coeffs: q };
        self.lp_trim(c, &mut out);
        Some(out)
    }

    /// Applies `f` to every coefficient of a level-`l` fraction, keeping the
    /// exponents; `f` must be a ring map on level `l-1`.
    pub fn map_coeffs(&self, l: usize, x: &Elem, f: &dyn Fn(&Elem) -> Elem) -> Elem {
        let fr = x.frac();
        let num = Laurent { low: fr.num.low, coeffs: fr.num.coeffs.iter().map(f).collect() };
        let den = Laurent { low: fr.den.low, coeffs: fr.den.coeffs.iter().map(f).collect() };
        self.fraction(l, num, den)
    }
}
