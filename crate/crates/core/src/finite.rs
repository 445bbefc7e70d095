//! Finite fields `F_q = F_p[x]/(m(x))` with log/exp tables.
//!
//! Elements are encoded as `u32` codes `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`
//! where `c_i` is the coefficient of `x^i`. The code order is the fixed
//! enumeration used to pick the canonical nonsquare.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest field size we build tables for.
pub const MAX_ORDER: u32 = 1 << 16;

#[derive(Debug)]
pub struct FiniteField {
    p: u32,
    degree: u32,
    q: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    nonsquare: u32,
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}
impl Eq for FiniteField {}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q = p^k`, returning `(p, k)`.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while !q.is_multiple_of(p) {
        p += 1;
    }
    if !is_prime(p) {
        return None;
    }
    let (mut r, mut k) = (q, 0);
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let lead_inv = modpow(*b.last().unwrap(), p - 2, p);
    while r.len() >= b.len() {
        let c = (*r.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
        let shift = r.len() - b.len();
        for (i, &bi) in b.iter().enumerate() {
            let idx = shift + i;
            r[idx] = ((r[idx] as u64 + (p - c) as u64 * bi as u64) % p as u64) as u32;
        }
        r = trim(r);
    }
    r
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn modpow(b: u32, mut e: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut base = b as u64 % p as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

/// Ben-Or: `m` of degree `k` is irreducible iff `gcd(x^(p^i) - x, m) = 1` for `i <= k/2`.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let k = m.len() - 1;
    let mut xp = vec![0, 1];
    for _ in 1..=k / 2 {
        // xp <- xp^p mod m
        let mut acc = vec![1];
        for _ in 0..p {
            acc = poly_mulmod(&acc, &xp, m, p);
        }
        xp = acc;
        let mut diff = xp.clone();
        diff.resize(k.max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        let g = poly_gcd(&diff, m, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn digits(mut code: u32, p: u32, k: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    for _ in 0..k {
        out.push(code % p);
        code /= p;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Multiplies two residues modulo the monic polynomial `modulus` over `F_p`.
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let k = modulus.len() - 1;
    let mut prod = vec![0u64; 2 * k.max(1)];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    for deg in (k..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (i, &m) in modulus[..k].iter().enumerate() {
            let idx = deg - k + i;
            prod[idx] = (prod[idx] + (p as u64 - m as u64) * c) % p as u64;
        }
    }
    prod.truncate(k);
    prod.into_iter().map(|c| c as u32).collect()
}

impl FiniteField {
    /// Builds `F_p[x]/(modulus)`; `modulus` is monic, lowest coefficient first.
    /// Fails unless the quotient ring is a field.
    pub fn new(p: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p) || p == 2 {
            return Err(Error::InvalidField(format!("characteristic {p} must be an odd prime")));
        }
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField(format!("modulus {modulus:?} is not a monic polynomial over F_{p}")));
        }
        let degree = (modulus.len() - 1) as u32;
        let q = (p as u64).pow(degree);
        if q > MAX_ORDER as u64 {
            return Err(Error::InvalidField(format!("field of order {q} is too large")));
        }
        let q = q as u32;
        let k = degree;
        if !is_irreducible(&modulus, p) {
            return Err(Error::InvalidField(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        // search a generator of the unit group; none exists unless the ring is a field
        let one = digits(1, p, k);
        let mut generator = None;
        'search: for g in 1..q {
            let gd = digits(g, p, k);
            let mut cur = gd.clone();
            for order in 1..q {
                if cur == one {
                    if order == q - 1 {
                        generator = Some(gd);
                        break 'search;
                    }
                    continue 'search;
                }
                cur = poly_mulmod(&cur, &gd, &modulus, p);
            }
        }
        let g = generator.ok_or_else(|| {
            Error::InvalidField(format!("modulus {modulus:?} is reducible over F_{p}"))
        })?;
        let mut exp = Vec::with_capacity(q as usize - 1);
        let mut log = vec![0u32; q as usize];
        let mut cur = one;
        for i in 0..q - 1 {
            let code = undigits(&cur, p);
            exp.push(code);
            log[code as usize] = i;
            cur = poly_mulmod(&cur, &g, &modulus, p);
        }
        let mut field = FiniteField { p, degree, q, modulus, exp, log, nonsquare: 0 };
        field.nonsquare = (1..q).find(|&c| !field.is_square(c)).expect("odd q has nonsquares");
        Ok(field)
    }

    /// `F_q` with the lexicographically first irreducible modulus.
    pub fn with_order(q: u32) -> Result<Self> {
        let (p, k) = prime_power(q)
            .ok_or_else(|| Error::InvalidField(format!("{q} is not a prime power")))?;
        if p == 2 {
            return Err(Error::InvalidField("residue characteristic 2 is not supported".into()));
        }
        Self::with_degree(p, k)
    }

    /// Cached `F_{p^k}` with the default modulus.
    pub fn shared(p: u32, k: u32) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<FiniteField>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(f) = cache.lock().unwrap().get(&(p, k)) {
            return Ok(f.clone());
        }
        let f = Arc::new(Self::with_degree(p, k)?);
        cache.lock().unwrap().insert((p, k), f.clone());
        Ok(f)
    }

    pub fn with_degree(p: u32, k: u32) -> Result<Self> {
        if k == 1 {
            return Self::new(p, vec![0, 1]);
        }
        let count = (p as u64).pow(k);
        if count > MAX_ORDER as u64 {
            return Err(Error::InvalidField(format!("field of order {count} is too large")));
        }
        for code in 0..count as u32 {
            let mut m = digits(code, p, k);
            if m[0] == 0 {
                continue;
            }
            m.push(1);
            if is_irreducible(&m, p) {
                return Self::new(p, m);
            }
        }
        Err(Error::InvalidField(format!("no irreducible polynomial of degree {k} over F_{p}")))
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn order(&self) -> u32 {
        self.q
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    /// The canonical nonsquare `u`: least nonsquare code.
    pub fn nonsquare(&self) -> u32 {
        self.nonsquare
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.degree == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b, mut out, mut pw) = (a, b, 0, 1);
        for _ in 0..self.degree {
            out += ((a % self.p + b % self.p) % self.p) * pw;
            a /= self.p;
            b /= self.p;
            pw *= self.p;
        }
        out
    }

    pub fn neg(&self, a: u32) -> u32 {
        let (mut a, mut out, mut pw) = (a, 0, 1);
        for _ in 0..self.degree {
            out += ((self.p - a % self.p) % self.p) * pw;
            a /= self.p;
            pw *= self.p;
        }
        out
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.q - 1;
        self.exp[((self.log[a as usize] as u64 + self.log[b as usize] as u64) % n as u64) as usize]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let n = self.q - 1;
        Some(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    pub fn pow(&self, a: u32, e: i64) -> u32 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let n = (self.q - 1) as i64;
        let l = (self.log[a as usize] as i64 * e.rem_euclid(n)).rem_euclid(n);
        self.exp[l as usize]
    }

    /// Discrete log with respect to the tabulated generator.
    pub fn log(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }

    pub fn is_square(&self, a: u32) -> bool {
        a != 0 && self.log[a as usize].is_multiple_of(2)
    }

    pub fn is_fourth_power(&self, a: u32) -> bool {
        let g = gcd(4, self.q - 1);
        a != 0 && self.log[a as usize].is_multiple_of(g)
    }

    /// Some square root of a square.
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return Some(0);
        }
        let l = self.log[a as usize];
        l.is_multiple_of(2).then(|| self.exp[(l / 2) as usize])
    }

    /// Some fourth root of a fourth power.
    pub fn fourth_root(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return Some(0);
        }
        let l = self.log[a as usize] as u64;
        let n = (self.q - 1) as u64;
        (0..n).find(|&y| (4 * y) % n == l).map(|y| self.exp[y as usize])
    }

    /// Fourth roots of unity.
    pub fn mu4(&self) -> Vec<u32> {
        (1..self.q).filter(|&x| self.pow(x, 4) == 1).collect()
    }

    /// `a^(p^e)`.
    pub fn frobenius(&self, a: u32, e: u32) -> u32 {
        if a == 0 {
            return 0;
        }
        let n = (self.q - 1) as u64;
        let mut l = self.log[a as usize] as u64;
        for _ in 0..e {
            l = l * self.p as u64 % n;
        }
        self.exp[l as usize]
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.q
    }

    pub fn coefficients(&self, a: u32) -> Vec<u32> {
        digits(a, self.p, self.degree)
    }

    pub fn from_coefficients(&self, c: &[u32]) -> Result<u32> {
        if c.len() != self.degree as usize || c.iter().any(|&x| x >= self.p) {
            return Err(Error::Parse(format!("bad finite-field coefficients {c:?}")));
        }
        Ok(undigits(c, self.p))
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The constant-field embedding `F_q -> F_{q^n}` fixed by sending `x` to the
/// least-code root of the small modulus.
#[derive(Debug)]
pub struct FiniteEmbedding {
    pub small: Arc<FiniteField>,
    pub big: Arc<FiniteField>,
    /// `[F_{q^n} : F_q]`
    pub relative_degree: u32,
    image: Vec<u32>,
    preimage: Vec<u32>,
}

impl FiniteEmbedding {
    pub fn new(small: Arc<FiniteField>, relative_degree: u32) -> Result<Self> {
        let big = FiniteField::shared(small.p, small.degree * relative_degree)?;
        let m = small.modulus();
        let root = big
            .elements()
            .find(|&a| m.iter().rev().fold(0, |acc, &c| big.add(big.mul(acc, a), c)) == 0)
            .ok_or_else(|| Error::InvalidField("small modulus has no root in the extension".into()))?;
        let mut image = Vec::with_capacity(small.q as usize);
        let mut preimage = vec![u32::MAX; big.q as usize];
        for code in small.elements() {
            let coeffs = small.coefficients(code);
            let img = coeffs.iter().rev().fold(0, |acc, &c| big.add(big.mul(acc, root), c));
            image.push(img);
            preimage[img as usize] = code;
        }
        Ok(FiniteEmbedding { small, big, relative_degree, image, preimage })
    }

    pub fn embed(&self, a: u32) -> u32 {
        self.image[a as usize]
    }

    /// Inverse of [`embed`](Self::embed) on its image.
    pub fn descend(&self, a: u32) -> Option<u32> {
        let c = self.preimage[a as usize];
        (c != u32::MAX).then_some(c)
    }

    /// The generator `x -> x^q` of `Gal(F_{q^n}/F_q)`, applied `e` times.
    pub fn sigma(&self, a: u32, e: u32) -> u32 {
        self.big.frobenius(a, self.small.degree * e)
    }

    /// `N_{F_{q^n}/F_q}`.
    pub fn norm(&self, a: u32) -> u32 {
        let mut acc = 1;
        for e in 0..self.relative_degree {
            acc = self.big.mul(acc, self.sigma(a, e));
        }
        self.descend(acc).expect("norm lies in the subfield")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_basics() {
        let f = FiniteField::with_order(5).unwrap();
        assert_eq!(f.mul(3, 4), 2);
        assert_eq!(f.inv(2), Some(3));
        assert_eq!(f.nonsquare(), 2);
        assert!(f.is_square(4));
        assert!(f.is_fourth_power(1));
        assert!(!f.is_fourth_power(4));
        assert_eq!(f.mu4().len(), 4);
    }

    #[test]
    fn f9_has_square_root_of_minus_one() {
        let f = FiniteField::with_order(9).unwrap();
        let m1 = f.neg(1);
        assert!(f.is_square(m1));
        let s = f.sqrt(m1).unwrap();
        assert_eq!(f.mul(s, s), m1);
        // brute force square count
        let squares = (1..9).filter(|&a| (1..9).any(|b| f.mul(b, b) == a)).count();
        assert_eq!(squares, 4);
        assert_eq!((1..9).filter(|&a| f.is_square(a)).count(), 4);
    }

    #[test]
    fn reducible_modulus_rejected() {
        // x^2 - 1 = (x-1)(x+1) over F_3
        assert!(FiniteField::new(3, vec![2, 0, 1]).is_err());
        assert!(FiniteField::with_order(4).is_err());
        assert!(FiniteField::with_order(6).is_err());
    }

    #[test]
    fn embedding_is_a_ring_map() {
        let small = Arc::new(FiniteField::with_order(9).unwrap());
        for n in [2, 3] {
            let e = FiniteEmbedding::new(small.clone(), n).unwrap();
            for a in small.elements() {
                for b in small.elements() {
                    assert_eq!(e.embed(small.mul(a, b)), e.big.mul(e.embed(a), e.embed(b)));
                    assert_eq!(e.embed(small.add(a, b)), e.big.add(e.embed(a), e.embed(b)));
                }
                assert_eq!(e.sigma(e.embed(a), 1), e.embed(a));
            }
            // the norm is onto F_q^*
            let norms: std::collections::BTreeSet<_> =
                (1..e.big.order()).map(|a| e.norm(a)).collect();
            assert_eq!(norms.len() as u32, small.order() - 1);
        }
    }
}
