//! Diagonal quadratic forms with entries stored as square classes, their
//! Witt classes via the Springer decomposition, and the subgroups of
//! `K*/K*^2` attached to them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::class::{SquareClass, Subgroup};
use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::ext::Extension;
use crate::field::{FieldDesc, FieldJson};

#[derive(Clone, PartialEq, Eq)]
pub struct QuadForm {
    field: FieldDesc,
    entries: Vec<SquareClass>,
}

/// Anisotropic forms over a finite field, up to isometry: `0, <1>, <u>, <1,-u>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiniteWitt {
    Zero,
    One,
    U,
    Aniso2,
}

/// Element of `W(K)`: a finite-field class, or the pair of residue classes
/// of the even and odd parts with respect to the top uniformizer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WittClass {
    Finite(FiniteWitt),
    Tower(Box<WittClass>, Box<WittClass>),
}

impl WittClass {
    pub fn is_zero(&self) -> bool {
        self.aniso_dim() == 0
    }

    pub fn aniso_dim(&self) -> usize {
        match self {
            WittClass::Finite(FiniteWitt::Zero) => 0,
            WittClass::Finite(FiniteWitt::One | FiniteWitt::U) => 1,
            WittClass::Finite(FiniteWitt::Aniso2) => 2,
            WittClass::Tower(a, b) => a.aniso_dim() + b.aniso_dim(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct FormJson {
    pub field: FieldJson,
    pub entries: Vec<Vec<u8>>,
}

/// A binary subform `f` and its complement `g` with `f ⊥ g ≅ Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaSplit {
    pub f: QuadForm,
    pub g: QuadForm,
}

impl fmt::Debug for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} over {}", self.field)
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.entries.iter().map(|c| c.to_string()).collect();
        write!(f, "<{}>", e.join(", "))
    }
}

fn finite_witt(minus_one: SquareClass, entries: &[SquareClass]) -> FiniteWitt {
    let n = entries.len();
    let mut disc = entries.iter().fold(SquareClass::ONE, |acc, &c| acc * c.truncate(0));
    if (n * n.saturating_sub(1) / 2) % 2 == 1 {
        disc = disc * minus_one;
    }
    match (n % 2, disc.is_trivial()) {
        (0, true) => FiniteWitt::Zero,
        (0, false) => FiniteWitt::Aniso2,
        (_, true) => FiniteWitt::One,
        (_, false) => FiniteWitt::U,
    }
}

fn witt_at(level: usize, minus_one: SquareClass, entries: &[SquareClass]) -> WittClass {
    if level == 0 {
        return WittClass::Finite(finite_witt(minus_one, entries));
    }
    let (odd, even): (Vec<SquareClass>, Vec<SquareClass>) = entries.iter().partition(|c| c.has_t(level));
    let even: Vec<SquareClass> = even.iter().map(|c| c.truncate(level - 1)).collect();
    let odd: Vec<SquareClass> = odd.iter().map(|c| c.truncate(level - 1)).collect();
    WittClass::Tower(Box::new(witt_at(level - 1, minus_one, &even)), Box::new(witt_at(level - 1, minus_one, &odd)))
}

fn witt_entries(level: usize, minus_one: SquareClass, w: &WittClass, out: &mut Vec<SquareClass>) {
    match w {
        WittClass::Finite(f) => out.extend(match f {
            FiniteWitt::Zero => vec![],
            FiniteWitt::One => vec![SquareClass::ONE],
            FiniteWitt::U => vec![SquareClass::U],
            FiniteWitt::Aniso2 => vec![SquareClass::ONE, minus_one * SquareClass::U],
        }),
        WittClass::Tower(a, b) => {
            witt_entries(level - 1, minus_one, a, out);
            let start = out.len();
            witt_entries(level - 1, minus_one, b, out);
            for c in &mut out[start..] {
                *c = *c * SquareClass::t(level);
            }
        }
    }
}

impl QuadForm {
    pub fn new(field: &FieldDesc, entries: Vec<SquareClass>) -> Result<QuadForm> {
        if let Some(c) = entries.iter().find(|c| c.0 >> (field.height() + 1) != 0) {
            return Err(Error::Precondition(format!("entry {c} does not belong to {field}")));
        }
        Ok(QuadForm { field: field.clone(), entries })
    }

    pub fn from_elems(field: &FieldDesc, xs: &[Elem]) -> Result<QuadForm> {
        let entries = xs.iter().map(|x| field.square_class(x)).collect::<Result<Vec<_>>>()?;
        QuadForm::new(field, entries)
    }

    /// The hyperbolic form of dimension `2m`.
    pub fn hyperbolic(field: &FieldDesc, m: usize) -> QuadForm {
        let plane = [SquareClass::ONE, field.minus_one_class()];
        QuadForm { field: field.clone(), entries: plane.iter().copied().cycle().take(2 * m).collect() }
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn entries(&self) -> &[SquareClass] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn det(&self) -> SquareClass {
        self.entries.iter().fold(SquareClass::ONE, |acc, &c| acc * c)
    }

    /// `(-1)^(n(n-1)/2) * det`.
    pub fn disc(&self) -> SquareClass {
        let n = self.dim();
        if (n * n.saturating_sub(1) / 2) % 2 == 1 {
            self.det() * self.field.minus_one_class()
        } else {
            self.det()
        }
    }

    pub fn orth(&self, other: &QuadForm) -> QuadForm {
        assert_eq!(self.field, other.field, "forms over different fields");
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        QuadForm { field: self.field.clone(), entries }
    }

    pub fn scale(&self, lambda: SquareClass) -> QuadForm {
        QuadForm { field: self.field.clone(), entries: self.entries.iter().map(|&c| c * lambda).collect() }
    }

    pub fn neg(&self) -> QuadForm {
        self.scale(self.field.minus_one_class())
    }

    /// Residue forms of the unit entries and of the `t`-divided entries, with
    /// respect to the top uniformizer.
    pub fn springer_decompose(&self) -> Result<(QuadForm, QuadForm)> {
        let r = self.field.height();
        if r == 0 {
            return Err(Error::Precondition("Springer decomposition needs a valued field".into()));
        }
        let k = self.field.residue_field()?;
        let (odd, even): (Vec<SquareClass>, Vec<SquareClass>) = self.entries.iter().partition(|c| c.has_t(r));
        let strip = |v: Vec<SquareClass>| QuadForm { field: k.clone(), entries: v.iter().map(|c| c.truncate(r - 1)).collect() };
        Ok((strip(even), strip(odd)))
    }

    pub fn witt_class(&self) -> WittClass {
        witt_at(self.field.height(), self.field.minus_one_class(), &self.entries)
    }

    /// The canonical anisotropic form in the Witt class.
    pub fn anisotropic_part(&self) -> QuadForm {
        QuadForm::from_witt(&self.field, &self.witt_class())
    }

    pub fn from_witt(field: &FieldDesc, w: &WittClass) -> QuadForm {
        let mut entries = vec![];
        witt_entries(field.height(), field.minus_one_class(), w, &mut entries);
        QuadForm { field: field.clone(), entries }
    }

    pub fn aniso_dim(&self) -> usize {
        self.witt_class().aniso_dim()
    }

    pub fn is_isotropic(&self) -> bool {
        self.aniso_dim() < self.dim()
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.aniso_dim() == 0
    }

    pub fn witt_index(&self) -> usize {
        (self.dim() - self.aniso_dim()) / 2
    }

    pub fn is_isometric(&self, other: &QuadForm) -> bool {
        self.field == other.field && self.dim() == other.dim() && self.witt_class() == other.witt_class()
    }

    pub fn represents(&self, c: SquareClass) -> bool {
        let minus_c = c * self.field.minus_one_class();
        self.orth(&QuadForm { field: self.field.clone(), entries: vec![minus_c] }).is_isotropic()
    }

    /// `D(Q)`: the classes of nonzero values.
    pub fn represented_classes(&self) -> Vec<SquareClass> {
        self.field.classes().filter(|&c| self.represents(c)).collect()
    }

    /// `Sn(Q)`, spanned by products of two represented classes.
    pub fn spinor_norm_group(&self) -> Result<Subgroup> {
        if self.dim() < 2 {
            return Err(Error::Precondition("spinor norms need dimension at least 2".into()));
        }
        let d = self.represented_classes();
        Ok(Subgroup::span(self.field.height(), d.iter().flat_map(|&a| d.iter().map(move |&b| a * b))))
    }

    /// `G(Q) = {lambda : lambda Q ≅ Q}`.
    pub fn similarity_group(&self) -> Subgroup {
        let w = self.witt_class();
        Subgroup::span(self.field.height(), self.field.classes().filter(|&c| self.scale(c).witt_class() == w))
    }

    pub fn base_change(&self, ext: &Extension) -> QuadForm {
        assert_eq!(&self.field, ext.base(), "form is not over the base of the extension");
        QuadForm { field: ext.top().clone(), entries: self.entries.iter().map(|&c| ext.image_class(c)).collect() }
    }

    /// Span of the norm groups of quadratic extensions that make `Q` hyperbolic.
    pub fn hyp2_subgroup(&self) -> Result<Subgroup> {
        if self.dim() % 2 == 1 {
            return Err(Error::Precondition("Hyp is only defined for even dimension".into()));
        }
        let mut out = Subgroup::trivial(self.field.height());
        for d in self.field.classes().filter(|d| !d.is_trivial()) {
            let ext = Extension::quadratic(&self.field, d)?;
            if self.base_change(&ext).is_hyperbolic() {
                out = out.join(&self.field.norm_group(d));
            }
        }
        Ok(out)
    }

    /// Splits `Q ≅ f ⊥ g` with `f` binary so that both `f` and `g` stay
    /// similar to themselves under `lambda` over `L`.
    pub fn find_lambda_splitting(&self, lambda: SquareClass, ext: &Extension) -> Result<LambdaSplit> {
        if lambda.is_trivial() || lambda.has_t(self.field.height()) {
            return Err(Error::Precondition(format!("{lambda} must be a nonsquare unit class")));
        }
        let (q, p) = self.springer_decompose()?;
        if q.dim() == p.dim() {
            return Err(Error::Precondition("the unit and t-parts have equal dimension".into()));
        }
        let q_l = self.base_change(ext);
        if !q_l.similarity_group().contains(ext.image_class(lambda)) {
            return Err(Error::Precondition(format!("{lambda} is not a similarity factor over L")));
        }
        if self.dim() < 2 {
            return Err(Error::Precondition("dimension below 2".into()));
        }
        let classes: Vec<SquareClass> = self.field.classes().collect();
        for (i, &alpha) in classes.iter().enumerate() {
            for &beta in &classes[i..] {
                let f = QuadForm { field: self.field.clone(), entries: vec![alpha, beta] };
                if self.orth(&f.neg()).witt_index() < 2 || !f.scale(lambda).is_isometric(&f) {
                    continue;
                }
                let g = self.complement(&f);
                let g_l = g.base_change(ext);
                if !g_l.scale(ext.image_class(lambda)).is_isometric(&g_l) {
                    continue;
                }
                if f.orth(&g).is_isometric(self) {
                    return Ok(LambdaSplit { f, g });
                }
            }
        }
        Err(Error::NotFound(format!("no binary lambda-stable subform of {self} for lambda = {lambda}")))
    }

    /// The form `g` of dimension `dim Q - dim f` with `f ⊥ g ≅ Q`, assuming
    /// `f` is a subform.
    pub fn complement(&self, f: &QuadForm) -> QuadForm {
        let aniso = self.orth(&f.neg()).anisotropic_part();
        let planes = (self.dim() - f.dim() - aniso.dim()) / 2;
        aniso.orth(&QuadForm::hyperbolic(&self.field, planes))
    }

    /// Brute-force isotropic vector over a finite field.
    pub fn isotropic_vector(&self) -> Result<Option<Vec<u32>>> {
        if self.field.height() != 0 {
            return Err(Error::Precondition("vector search is only available over finite fields".into()));
        }
        let ff = self.field.base();
        let coeffs: Vec<u32> = self.entries.iter().map(|c| if c.has_u() { ff.nonsquare() } else { 1 }).collect();
        let q = ff.order() as u64;
        let n = self.dim() as u32;
        let total = q.checked_pow(n).ok_or_else(|| Error::Precondition("search space too large".into()))?;
        for code in 1..total {
            let mut rest = code;
            let v: Vec<u32> = (0..n).map(|_| {
                let x = (rest % q) as u32;
                rest /= q;
                x
            }).collect();
            let value = v.iter().zip(&coeffs).fold(0, |acc, (&x, &a)| ff.add(acc, ff.mul(a, ff.mul(x, x))));
            if value == 0 {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    pub fn to_json(&self) -> FormJson {
        FormJson {
            field: self.field.to_json(),
            entries: self.entries.iter().map(|c| c.to_bits(self.field.height())).collect(),
        }
    }

    pub fn from_json(j: &FormJson) -> Result<QuadForm> {
        let field = FieldDesc::from_json(&j.field)?;
        QuadForm::from_entries_json(&field, &j.entries)
    }

    pub fn from_entries_json(field: &FieldDesc, entries: &[Vec<u8>]) -> Result<QuadForm> {
        let r = field.height();
        let entries = entries
            .iter()
            .map(|bits| {
                if bits.len() != r + 1 || bits.iter().any(|&b| b > 1) {
                    Err(Error::Parse(format!("entry {bits:?} is not a {}-bit class vector", r + 1)))
                } else {
                    Ok(SquareClass::from_bits(bits))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        QuadForm::new(field, entries)
    }
}
