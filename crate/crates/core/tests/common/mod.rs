//! Independent oracles: plain modular arithmetic and exhaustive searches that
//! do not go through the crate's invariants.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use qnp::cohomology::{H1Mu, ZElem};
use qnp::finite::FiniteField;
use qnp::{Elem, FieldDesc, SquareClass};

/// Integer coefficient of the canonical representative of a unit class over F_p.
pub fn unit_coeff(p: u32, c: SquareClass) -> i64 {
    if c.has_u() {
        (2..p as i64).find(|&a| !is_square_mod(p, a)).unwrap()
    } else {
        1
    }
}

pub fn is_square_mod(p: u32, a: i64) -> bool {
    let a = a.rem_euclid(p as i64);
    (0..p as i64).any(|x| (x * x - a).rem_euclid(p as i64) == 0)
}

/// Nontrivial zero of `sum a_i x_i^2` over F_p by exhaustive search.
pub fn isotropic_mod_p(p: u32, coeffs: &[i64]) -> bool {
    let p = p as i64;
    let n = coeffs.len() as u32;
    (1..p.pow(n)).any(|mut code| {
        let mut s = 0;
        for &a in coeffs {
            let x = code % p;
            code /= p;
            s += a * x * x;
        }
        s.rem_euclid(p) == 0
    })
}

/// All polynomials over F_p of degree `<= deg`, little-endian.
pub fn polys(p: u32, deg: usize) -> Vec<Vec<i64>> {
    let p = p as i64;
    let n = deg + 1;
    (0..p.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let c = code % p;
                    code /= p;
                    c
                })
                .collect()
        })
        .collect()
}

fn poly_mul(p: i64, a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

fn add_into(p: i64, acc: &mut Vec<i64>, x: &[i64], shift: usize) {
    if acc.len() < x.len() + shift {
        acc.resize(x.len() + shift, 0);
    }
    for (i, c) in x.iter().enumerate() {
        acc[i + shift] = (acc[i + shift] + c).rem_euclid(p);
    }
}

fn key(mut v: Vec<i64>) -> Vec<i64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// `sum c_i t^{s_i} v_i^2` for polynomial `v_i`.
fn form_value(p: i64, entries: &[(Vec<i64>, usize)], vs: &[&Vec<i64>]) -> Vec<i64> {
    let mut acc = vec![];
    for ((c, s), v) in entries.iter().zip(vs) {
        add_into(p, &mut acc, &poly_mul(p, c, &poly_mul(p, v, v)), *s);
    }
    key(acc)
}

fn all_tuples(pool: &[Vec<i64>], n: usize) -> Vec<Vec<&Vec<i64>>> {
    let mut out: Vec<Vec<&Vec<i64>>> = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|t| pool.iter().map(move |v| {
            let mut t = t.clone();
            t.push(v);
            t
        })).collect();
    }
    out
}

/// Searches a nontrivial polynomial zero of degree `<= deg` of
/// `sum c_i t^{s_i} x_i^2` (each `c_i` a polynomial) by meet in the middle.
pub fn poly_isotropic(p: u32, entries: &[(Vec<i64>, usize)], deg: usize) -> bool {
    let pool = polys(p, deg);
    let pi = p as i64;
    let half = entries.len() / 2;
    let (left, right) = entries.split_at(half);
    // value -> reached by a nonzero left vector
    let mut seen: HashMap<Vec<i64>, bool> = HashMap::new();
    for t in all_tuples(&pool, left.len()) {
        let nonzero = t.iter().any(|v| v.iter().any(|&c| c != 0));
        let val = form_value(pi, left, &t);
        let e = seen.entry(val).or_insert(false);
        *e |= nonzero;
    }
    for t in all_tuples(&pool, right.len()) {
        let nonzero = t.iter().any(|v| v.iter().any(|&c| c != 0));
        let val = form_value(pi, right, &t);
        let neg = key(val.iter().map(|c| (-c).rem_euclid(pi)).collect());
        match seen.get(&neg) {
            Some(&left_nonzero) if nonzero || left_nonzero => return true,
            _ => {}
        }
    }
    false
}

/// `a x^2 + b y^2 = z^2` with polynomials of degree `<= deg`, `(x, y) != 0`.
pub fn conic_solvable(p: u32, a: &[i64], b: &[i64], deg: usize) -> bool {
    let pi = p as i64;
    let pool = polys(p, deg);
    let squares: HashSet<Vec<i64>> = pool.iter().map(|z| key(poly_mul(pi, z, z))).collect();
    let entries = [(a.to_vec(), 0), (b.to_vec(), 0)];
    for x in &pool {
        for y in &pool {
            if x.iter().chain(y).all(|&c| c == 0) {
                continue;
            }
            if squares.contains(&form_value(pi, &entries, &[x, y])) {
                return true;
            }
        }
    }
    false
}

/// Field element of `F_p((t))` from a polynomial in `t` times `t^shift`.
pub fn series(k: &FieldDesc, poly: &[i64], shift: i64) -> Elem {
    let ff = k.base();
    poly.iter().enumerate().fold(k.zero(), |acc, (i, &c)| {
        let c = ff.from_int(c);
        if c == 0 {
            acc
        } else {
            k.add(&acc, &k.monomial(c, &[shift + i as i64]))
        }
    })
}

/// Brute-force `U/U_0` over a finite field for `Z = F[x]/(x^2 - d)`:
/// returns the elements of `U` as `(f, (a, b))` and an equivalence oracle.
pub struct FiniteU {
    pub ff: FiniteField,
    pub d: u32,
    pub elements: Vec<(u32, (u32, u32))>,
    u0: HashSet<(u32, (u32, u32))>,
}

impl FiniteU {
    pub fn new(q: u32, d: u32) -> FiniteU {
        let ff = FiniteField::with_order(q).unwrap();
        let all: Vec<u32> = ff.elements().collect();
        let mut out = FiniteU { ff, d, elements: vec![], u0: HashSet::new() };
        for &a in &all {
            for &b in &all {
                let n = out.norm((a, b));
                if n == 0 {
                    continue;
                }
                for &f in &all {
                    if f != 0 && out.ff.pow(f, 4) == n {
                        out.elements.push((f, (a, b)));
                    }
                }
                let w4 = out.pow4((a, b));
                out.u0.insert((n, w4));
            }
        }
        out
    }

    pub fn mul(&self, x: (u32, u32), y: (u32, u32)) -> (u32, u32) {
        let f = &self.ff;
        (
            f.add(f.mul(x.0, y.0), f.mul(self.d, f.mul(x.1, y.1))),
            f.add(f.mul(x.0, y.1), f.mul(x.1, y.0)),
        )
    }

    pub fn norm(&self, x: (u32, u32)) -> u32 {
        let f = &self.ff;
        f.sub(f.mul(x.0, x.0), f.mul(self.d, f.mul(x.1, x.1)))
    }

    fn pow4(&self, x: (u32, u32)) -> (u32, u32) {
        let x2 = self.mul(x, x);
        self.mul(x2, x2)
    }

    fn inv(&self, x: (u32, u32)) -> (u32, u32) {
        let f = &self.ff;
        let ni = f.inv(self.norm(x)).unwrap();
        (f.mul(x.0, ni), f.mul(f.neg(x.1), ni))
    }

    pub fn equivalent(&self, x: (u32, (u32, u32)), y: (u32, (u32, u32))) -> bool {
        let f = &self.ff;
        let g = f.mul(y.0, f.inv(x.0).unwrap());
        let c = self.mul(y.1, self.inv(x.1));
        self.u0.contains(&(g, c))
    }

    /// Number of classes.
    pub fn class_count(&self) -> usize {
        let mut reps: Vec<(u32, (u32, u32))> = vec![];
        for &x in &self.elements {
            if !reps.iter().any(|&r| self.equivalent(r, x)) {
                reps.push(x);
            }
        }
        reps.len()
    }

    pub fn to_h1(&self, x: (u32, (u32, u32))) -> H1Mu {
        H1Mu::Odd { f: Elem::Fin(x.0), z: ZElem { a: Elem::Fin(x.1 .0), b: Elem::Fin(x.1 .1) } }
    }
}
