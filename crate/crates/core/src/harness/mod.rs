//! Named checks over a grid of (field, form, extension) cells, the sweep
//! runner and the JSON report.

mod checks;

pub use checks::{expected_ker_i, splitting_lambdas, verify_splitting};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::class::SquareClass;
use crate::error::{Error, Result};
use crate::ext::Extension;
use crate::field::{FieldDesc, FieldJson};
use crate::quadform::QuadForm;
use crate::testing::Mutation;

pub const REPORT_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    Scharlau,
    Knebusch,
    HStability,
    SqCommutes,
    Lemma42,
    Lemma53,
    Lemma55,
    Lemma56,
    KerI,
    Exactness,
    IsotropicSnFull,
    OddDegreeInjectivity,
}

impl CheckId {
    pub const ALL: [CheckId; 12] = [
        CheckId::Scharlau,
        CheckId::Knebusch,
        CheckId::HStability,
        CheckId::SqCommutes,
        CheckId::Lemma42,
        CheckId::Lemma53,
        CheckId::Lemma55,
        CheckId::Lemma56,
        CheckId::KerI,
        CheckId::Exactness,
        CheckId::IsotropicSnFull,
        CheckId::OddDegreeInjectivity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::Scharlau => "scharlau",
            CheckId::Knebusch => "knebusch",
            CheckId::HStability => "h_stability",
            CheckId::SqCommutes => "sq_commutes",
            CheckId::Lemma42 => "lemma42",
            CheckId::Lemma53 => "lemma53",
            CheckId::Lemma55 => "lemma55",
            CheckId::Lemma56 => "lemma56",
            CheckId::KerI => "ker_i",
            CheckId::Exactness => "exactness",
            CheckId::IsotropicSnFull => "isotropic_sn_full",
            CheckId::OddDegreeInjectivity => "odd_degree_injectivity",
        }
    }

    /// Which extension the cell needs.
    pub fn ext_need(self) -> ExtNeed {
        match self {
            CheckId::Scharlau
            | CheckId::Knebusch
            | CheckId::HStability
            | CheckId::SqCommutes
            | CheckId::Lemma53
            | CheckId::Lemma55
            | CheckId::Lemma56 => ExtNeed::Quadratic,
            CheckId::OddDegreeInjectivity => ExtNeed::Cubic,
            CheckId::Lemma42 | CheckId::KerI | CheckId::Exactness | CheckId::IsotropicSnFull => ExtNeed::None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtNeed {
    None,
    Quadratic,
    Cubic,
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<CheckId> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown check `{s}`")))
    }
}

/// Assumption about `H^1(X, Spin(Q))` for the fields in play.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `H^1(X, Spin(Q)) = 1`; only valid up to height 1.
    TrivialKernel,
    /// Only necessary conditions are checked; the rest is reported skipped.
    Partial,
}

impl Regime {
    pub fn default_for(height: usize) -> Regime {
        if height <= 1 {
            Regime::TrivialKernel
        } else {
            Regime::Partial
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtSpec {
    /// `K(sqrt d)`, `d` given as a class bit vector.
    Quadratic { d: Vec<u8> },
    /// The unramified cubic extension.
    Cubic,
}

impl ExtSpec {
    pub fn quadratic(field: &FieldDesc, d: SquareClass) -> ExtSpec {
        ExtSpec::Quadratic { d: d.to_bits(field.height()) }
    }

    pub fn build(&self, field: &FieldDesc) -> Result<Extension> {
        match self {
            ExtSpec::Quadratic { d } => {
                if d.len() != field.height() + 1 || d.iter().any(|&b| b > 1) {
                    return Err(Error::Parse(format!("extension class {d:?} has the wrong shape")));
                }
                Extension::quadratic(field, SquareClass::from_bits(d))
            }
            ExtSpec::Cubic => Extension::unramified(field, 3),
        }
    }
}

impl FromStr for ExtSpec {
    type Err = Error;

    /// `cubic` or a JSON bit vector such as `[1,0]`.
    fn from_str(s: &str) -> Result<ExtSpec> {
        if s.trim() == "cubic" {
            return Ok(ExtSpec::Cubic);
        }
        let d: Vec<u8> = serde_json::from_str(s).map_err(|e| Error::Parse(format!("extension `{s}`: {e}")))?;
        Ok(ExtSpec::Quadratic { d })
    }
}

/// Everything needed to replay one cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellParams {
    pub check: CheckId,
    pub field: FieldJson,
    pub form: Vec<Vec<u8>>,
    #[serde(default)]
    pub ext: Option<ExtSpec>,
    #[serde(default)]
    pub regime: Option<Regime>,
    #[serde(default)]
    pub mutation: Mutation,
    #[serde(default)]
    pub seed: u64,
}

impl CellParams {
    fn sort_key(&self) -> (CheckId, String) {
        (self.check, serde_json::to_string(self).expect("params serialize"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail { reason: String },
    Skipped { reason: String },
}

impl Verdict {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: CheckId,
    pub params: CellParams,
    pub verdict: Verdict,
    /// Counterexamples on failure, auxiliary data otherwise.
    pub witnesses: Vec<Value>,
    /// Number of elements actually examined.
    pub tested: usize,
    pub regime: Option<Regime>,
    pub elapsed_ms: u64,
}

/// A cell with its parsed objects.
pub struct Cell {
    pub params: CellParams,
    pub field: FieldDesc,
    pub form: QuadForm,
    pub ext: Option<Extension>,
    pub regime: Regime,
}

impl Cell {
    pub fn new(params: CellParams) -> Result<Cell> {
        let field = FieldDesc::from_json(&params.field)?.with_mutation(params.mutation);
        let form = QuadForm::from_entries_json(&field, &params.form)?;
        let ext = params.ext.as_ref().map(|e| e.build(&field)).transpose()?;
        let need = params.check.ext_need();
        let ok = matches!(
            (need, &params.ext),
            (ExtNeed::None, _)
                | (ExtNeed::Quadratic, Some(ExtSpec::Quadratic { .. }))
                | (ExtNeed::Cubic, Some(ExtSpec::Cubic))
        );
        if !ok {
            return Err(Error::Config(format!("check {} needs a {:?} extension", params.check, need)));
        }
        let regime = params.regime.unwrap_or_else(|| Regime::default_for(field.height()));
        if regime == Regime::TrivialKernel && field.height() >= 2 {
            return Err(Error::Config("the trivial-kernel regime is only valid up to height 1".into()));
        }
        Ok(Cell { params, field, form, ext, regime })
    }

    pub fn ext(&self) -> &Extension {
        self.ext.as_ref().expect("checked in Cell::new")
    }
}

/// Result of a check body before timing is attached.
pub(crate) struct Outcome {
    verdict: Verdict,
    witnesses: Vec<Value>,
    tested: usize,
}

impl Outcome {
    pub(crate) fn from_failures(tested: usize, reason: &str, bad: Vec<Value>) -> Outcome {
        if bad.is_empty() {
            Outcome { verdict: Verdict::Pass, witnesses: vec![], tested }
        } else {
            Outcome { verdict: Verdict::Fail { reason: format!("{reason} ({} counterexamples)", bad.len()) }, witnesses: bad, tested }
        }
    }

    pub(crate) fn skipped(reason: impl Into<String>, tested: usize) -> Outcome {
        Outcome { verdict: Verdict::Skipped { reason: reason.into() }, witnesses: vec![], tested }
    }

    pub(crate) fn with_witnesses(mut self, extra: Vec<Value>) -> Outcome {
        self.witnesses.extend(extra);
        self
    }
}

/// Runs one cell. `Err` only for configuration errors; failures inside the
/// check become verdicts.
pub fn run_cell(params: &CellParams) -> Result<CheckReport> {
    let start = Instant::now();
    let cell = Cell::new(params.clone())?;
    let outcome = match checks::run(&cell) {
        Ok(o) => o,
        Err(Error::Config(msg)) => return Err(Error::Config(msg)),
        Err(Error::Precondition(msg)) => Outcome::skipped(msg, 0),
        Err(e) => Outcome { verdict: Verdict::Fail { reason: e.to_string() }, witnesses: vec![], tested: 0 },
    };
    let outcome = match outcome.verdict {
        Verdict::Pass if outcome.tested == 0 => Outcome::skipped("no elements were tested", 0),
        _ => outcome,
    };
    Ok(CheckReport {
        check: params.check,
        params: params.clone(),
        verdict: outcome.verdict,
        witnesses: outcome.witnesses,
        tested: outcome.tested,
        regime: (params.check == CheckId::SqCommutes).then_some(cell.regime),
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

fn default_fields() -> Vec<u32> {
    vec![3, 5]
}

fn default_height() -> usize {
    1
}

fn default_max_dim() -> usize {
    6
}

fn default_true() -> bool {
    true
}

fn default_checks() -> Vec<CheckId> {
    CheckId::ALL.to_vec()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_fields")]
    pub fields: Vec<u32>,
    #[serde(default = "default_height")]
    pub height: usize,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    /// Adds the unramified cubic extension (used by the odd-degree check).
    #[serde(default = "default_true")]
    pub cubic: bool,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckId>,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 lets rayon decide.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub regime: Option<Regime>,
    #[serde(default)]
    pub mutation: Mutation,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            fields: default_fields(),
            height: default_height(),
            max_dim: default_max_dim(),
            cubic: true,
            checks: default_checks(),
            seed: 0,
            threads: 0,
            regime: None,
            mutation: Mutation::None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        for &q in &self.fields {
            match crate::finite::prime_power(q) {
                Some((p, _)) if p != 2 => {}
                _ => return Err(Error::Config(format!("{q} is not an odd prime power"))),
            }
        }
        if !(1..=2).contains(&self.height) {
            return Err(Error::Config("height must be 1 or 2".into()));
        }
        if self.height == 2 && self.max_dim > 4 {
            return Err(Error::Config("height 2 supports forms of dimension at most 4".into()));
        }
        if self.max_dim < 2 {
            return Err(Error::Config("max_dim must be at least 2".into()));
        }
        if self.regime == Some(Regime::TrivialKernel) && self.height >= 2 {
            return Err(Error::Config("the trivial-kernel regime is only valid up to height 1".into()));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn field(&self, q: u32) -> Result<FieldDesc> {
        let names: Vec<String> = (1..=self.height)
            .map(|j| if j == self.height { "t".to_string() } else { format!("s{j}") })
            .collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        Ok(FieldDesc::tower(q, &names)?.with_mutation(self.mutation))
    }

    /// Every cell of the grid, sorted.
    pub fn cells(&self) -> Result<Vec<CellParams>> {
        self.validate()?;
        let mut out = vec![];
        for &q in &self.fields {
            let field = self.field(q)?;
            let mut forms = vec![];
            for dim in (2..=self.max_dim).step_by(2) {
                forms.extend(grid_forms(&field, dim));
            }
            let taus: Vec<QuadForm> = (1..=(self.max_dim / 2).min(3))
                .flat_map(|n| multisets(&unit_classes(&field), n))
                .map(|e| QuadForm::new(&field, e).unwrap())
                .collect();
            let mut exts: Vec<ExtSpec> = field
                .classes()
                .filter(|d| !d.is_trivial())
                .map(|d| ExtSpec::quadratic(&field, d))
                .collect();
            if self.cubic {
                exts.push(ExtSpec::Cubic);
            }
            let base = |check: CheckId, form: &QuadForm, ext: Option<ExtSpec>| CellParams {
                check,
                field: field.to_json(),
                form: form.entries().iter().map(|c| c.to_bits(field.height())).collect(),
                ext,
                regime: if check == CheckId::SqCommutes { self.regime } else { None },
                mutation: self.mutation,
                seed: self.seed,
            };
            for &check in &self.checks {
                let list: &[QuadForm] = if check == CheckId::Lemma42 { &taus } else { &forms };
                for form in list {
                    match check.ext_need() {
                        ExtNeed::None => out.push(base(check, form, None)),
                        ExtNeed::Quadratic => {
                            for e in exts.iter().filter(|e| matches!(e, ExtSpec::Quadratic { .. })) {
                                out.push(base(check, form, Some(e.clone())));
                            }
                        }
                        ExtNeed::Cubic => {
                            if self.cubic {
                                out.push(base(check, form, Some(ExtSpec::Cubic)));
                            }
                        }
                    }
                }
            }
        }
        out.sort_by_cached_key(CellParams::sort_key);
        Ok(out)
    }
}

/// Classes that are units for the top valuation.
pub fn unit_classes(field: &FieldDesc) -> Vec<SquareClass> {
    let r = field.height();
    field.classes().filter(|c| !c.has_t(r)).collect()
}

/// Sorted multisets of size `n` drawn from `items`.
pub fn multisets(items: &[SquareClass], n: usize) -> Vec<Vec<SquareClass>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for (i, &c) in items.iter().enumerate() {
        for mut rest in multisets(&items[i..], n - 1) {
            rest.insert(0, c);
            out.push(rest);
        }
    }
    out
}

/// All forms `q ⊥ t p` of dimension `dim` with canonical unit entries.
pub fn grid_forms(field: &FieldDesc, dim: usize) -> Vec<QuadForm> {
    let units = unit_classes(field);
    let t = SquareClass::t(field.height());
    let mut out = vec![];
    for dq in 0..=dim {
        for q in multisets(&units, dq) {
            for p in multisets(&units, dim - dq) {
                let entries: Vec<SquareClass> = q.iter().copied().chain(p.iter().map(|&c| c * t)).collect();
                out.push(QuadForm::new(field, entries).unwrap());
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub cells: usize,
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    /// Elements examined over all cells.
    pub tested: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: String,
    pub config_digest: String,
    pub cells: Vec<CheckReport>,
    pub coverage: BTreeMap<CheckId, Coverage>,
}

impl SweepReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.cells.iter().filter(|c| c.verdict.is_fail())
    }

    pub fn has_failures(&self) -> bool {
        self.failures().next().is_some()
    }

    /// Copy with timing fields zeroed, for comparing runs.
    pub fn without_timing(&self) -> SweepReport {
        let mut r = self.clone();
        for c in &mut r.cells {
            c.elapsed_ms = 0;
        }
        r
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let cells = config.cells()?;
    let run = || cells.par_iter().map(run_cell).collect::<Result<Vec<_>>>();
    let reports = if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run)?
    } else {
        run()?
    };
    let mut coverage: BTreeMap<CheckId, Coverage> = config.checks.iter().map(|&c| (c, Coverage::default())).collect();
    for r in &reports {
        let c = coverage.entry(r.check).or_default();
        c.cells += 1;
        c.tested += r.tested;
        match r.verdict {
            Verdict::Pass => c.pass += 1,
            Verdict::Fail { .. } => c.fail += 1,
            Verdict::Skipped { .. } => c.skipped += 1,
        }
    }
    Ok(SweepReport { version: REPORT_VERSION.into(), config_digest: config.digest(), cells: reports, coverage })
}
