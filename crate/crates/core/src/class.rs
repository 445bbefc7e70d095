//! Square classes as bit-vectors over the basis `[u, t_1, ..., t_r]`, and
//! subgroups of `K*/K*^2` as F_2 spans.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Bit 0 is the canonical nonsquare unit `u`; bit `j` is the uniformizer `t_j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SquareClass(pub u32);

impl SquareClass {
    pub const ONE: SquareClass = SquareClass(0);
    pub const U: SquareClass = SquareClass(1);

    pub fn t(j: usize) -> SquareClass {
        SquareClass(1 << j)
    }

    pub fn is_trivial(self) -> bool {
        self.0 == 0
    }

    pub fn has_u(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn has_t(self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    /// Largest `j >= 1` with the `t_j` bit set.
    pub fn top_t(self) -> Option<usize> {
        let t_bits = self.0 & !1;
        (t_bits != 0).then(|| 31 - t_bits.leading_zeros() as usize)
    }

    /// Keeps the basis elements that live at level `l` (`u, t_1..t_l`).
    pub fn truncate(self, l: usize) -> SquareClass {
        SquareClass(self.0 & ((1u32 << (l + 1)) - 1))
    }

    pub fn is_unit(self) -> bool {
        self.0 <= 1
    }

    /// All `2^(r+1)` classes of a height-`r` field.
    pub fn all(height: usize) -> impl Iterator<Item = SquareClass> {
        (0..1u32 << (height + 1)).map(SquareClass)
    }

    /// `[u_bit, e_1, ..., e_r]`.
    pub fn to_bits(self, height: usize) -> Vec<u8> {
        (0..=height).map(|j| (self.0 >> j & 1) as u8).collect()
    }

    pub fn from_bits(bits: &[u8]) -> SquareClass {
        SquareClass(bits.iter().enumerate().map(|(j, &b)| ((b & 1) as u32) << j).sum())
    }
}

impl std::ops::Mul for SquareClass {
    type Output = SquareClass;
    fn mul(self, rhs: SquareClass) -> SquareClass {
        SquareClass(self.0 ^ rhs.0)
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "1");
        }
        let mut parts = vec![];
        if self.has_u() {
            parts.push("u".to_string());
        }
        for j in 1..32 {
            if self.has_t(j) {
                parts.push(format!("t{j}"));
            }
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// An F_2-subspace of `K*/K*^2` with a reduced echelon basis, so two equal
/// subgroups have identical bases.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subgroup {
    height: usize,
    basis: Vec<SquareClass>,
}

impl Subgroup {
    pub fn trivial(height: usize) -> Subgroup {
        Subgroup { height, basis: vec![] }
    }

    pub fn full(height: usize) -> Subgroup {
        Subgroup::span(height, (0..=height).map(|j| SquareClass(1 << j)))
    }

    pub fn span(height: usize, gens: impl IntoIterator<Item = SquareClass>) -> Subgroup {
        let mut basis: Vec<SquareClass> = vec![];
        for g in gens {
            let r = reduce(&basis, g);
            if !r.is_trivial() {
                let pivot = 31 - r.0.leading_zeros();
                for b in basis.iter_mut() {
                    if b.0 >> pivot & 1 == 1 {
                        *b = *b * r;
                    }
                }
                basis.push(r);
                basis.sort_by(|a, b| b.cmp(a));
            }
        }
        Subgroup { height, basis }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn basis(&self) -> &[SquareClass] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn order(&self) -> usize {
        1 << self.basis.len()
    }

    /// Index in the full class group.
    pub fn index(&self) -> usize {
        1 << (self.height + 1 - self.basis.len())
    }

    pub fn contains(&self, c: SquareClass) -> bool {
        reduce(&self.basis, c).is_trivial()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.height + 1
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.basis.iter().all(|&b| other.contains(b))
    }

    pub fn join(&self, other: &Subgroup) -> Subgroup {
        Subgroup::span(self.height, self.basis.iter().chain(&other.basis).copied())
    }

    pub fn elements(&self) -> Vec<SquareClass> {
        let mut out: Vec<SquareClass> = (0..1u32 << self.basis.len())
            .map(|mask| {
                self.basis
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .fold(SquareClass::ONE, |acc, (_, &b)| acc * b)
            })
            .collect();
        out.sort();
        out
    }
}

fn reduce(basis: &[SquareClass], mut c: SquareClass) -> SquareClass {
    for &b in basis {
        let pivot = 31 - b.0.leading_zeros();
        if c.0 >> pivot & 1 == 1 {
            c = c * b;
        }
    }
    c
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let els: Vec<String> = self.elements().iter().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", els.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_basis_is_independent_of_generator_order() {
        let a = Subgroup::span(2, [SquareClass(3), SquareClass(5)]);
        let b = Subgroup::span(2, [SquareClass(6), SquareClass(3), SquareClass(0)]);
        assert_eq!(a, b);
        assert_eq!(a.order(), 4);
        assert_eq!(a.index(), 2);
        assert!(a.contains(SquareClass(6)));
        assert!(!a.contains(SquareClass(1)));
    }

    #[test]
    fn display_names_basis() {
        assert_eq!(SquareClass(3).to_string(), "u*t1");
        assert_eq!(SquareClass::from_bits(&[1, 0, 1]), SquareClass(5));
        assert_eq!(SquareClass(5).to_bits(2), vec![1, 0, 1]);
        assert_eq!(SquareClass(6).top_t(), Some(2));
        assert_eq!(SquareClass(1).top_t(), None);
    }

    proptest! {
        #[test]
        fn span_is_closed_and_minimal(gens in proptest::collection::vec(0u32..8, 0..5)) {
            let gens: Vec<SquareClass> = gens.into_iter().map(SquareClass).collect();
            let s = Subgroup::span(2, gens.clone());
            let els = s.elements();
            prop_assert_eq!(els.len(), s.order());
            for &a in &els {
                for &b in &els {
                    prop_assert!(s.contains(a * b));
                }
            }
            for g in gens {
                prop_assert!(s.contains(g));
            }
        }
    }
}
