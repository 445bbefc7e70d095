use std::process::Command;

use qnp::class::SquareClass;
use qnp::harness::{run_cell, run_sweep, CellParams, CheckId, ExtSpec, Regime, SweepConfig, Verdict};
use qnp::testing::Mutation;
use qnp::{Error, FieldDesc};

fn params(check: CheckId, q: u32, form: &[u32], ext: Option<ExtSpec>) -> CellParams {
    let k = FieldDesc::tower(q, &["t"]).unwrap();
    CellParams {
        check,
        field: k.to_json(),
        form: form.iter().map(|&c| SquareClass(c).to_bits(1)).collect(),
        ext,
        regime: None,
        mutation: Mutation::None,
        seed: 0,
    }
}

fn quad(d: u32) -> Option<ExtSpec> {
    Some(ExtSpec::Quadratic { d: SquareClass(d).to_bits(1) })
}

const ONE: u32 = 0;
const U: u32 = 1;
const T: u32 = 2;

#[test]
fn documented_cells_pass() {
    // <1,1,t,t> over F_3((t)); -t = u t over F_3
    let q = [ONE, ONE, T, T];
    for (check, ext) in [
        (CheckId::Scharlau, quad(U)),
        (CheckId::Knebusch, quad(U)),
        (CheckId::HStability, quad(U | T)),
        (CheckId::SqCommutes, quad(U | T)),
        (CheckId::Exactness, None),
        (CheckId::KerI, None),
    ] {
        let r = run_cell(&params(check, 3, &q, ext)).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{check}: {:?}", r.witnesses);
        assert!(r.tested > 0);
    }
    let r = run_cell(&params(CheckId::HStability, 3, &q, quad(U | T))).unwrap();
    assert!(r.tested >= 16);
    let r = run_cell(&params(CheckId::IsotropicSnFull, 3, &[ONE, U, T], None)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let r = run_cell(&params(CheckId::Lemma42, 3, &[ONE, ONE], None)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let r = run_cell(&params(CheckId::Lemma42, 5, &[ONE, ONE, ONE], None)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    let r = run_cell(&params(CheckId::Lemma55, 3, &[ONE, ONE, ONE, T, T, T], quad(T))).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.witnesses);
}

#[test]
fn violated_preconditions_are_skipped_with_reason() {
    let r = run_cell(&params(CheckId::Lemma55, 3, &[ONE, ONE, T, T], quad(U))).unwrap();
    assert!(matches!(r.verdict, Verdict::Skipped { ref reason } if reason.contains("unramified")));
    // <1,1,t,t> is anisotropic over F_3((t))
    let r = run_cell(&params(CheckId::IsotropicSnFull, 3, &[ONE, ONE, T, T], None)).unwrap();
    assert!(matches!(r.verdict, Verdict::Skipped { ref reason } if reason.contains("anisotropic")));
}

#[test]
fn trivial_kernel_is_rejected_at_height_two() {
    let k = FieldDesc::tower(3, &["s", "t"]).unwrap();
    let p = CellParams {
        check: CheckId::SqCommutes,
        field: k.to_json(),
        form: vec![SquareClass::ONE.to_bits(2), SquareClass::ONE.to_bits(2)],
        ext: Some(ExtSpec::quadratic(&k, SquareClass::U)),
        regime: Some(Regime::TrivialKernel),
        mutation: Mutation::None,
        seed: 0,
    };
    assert!(matches!(run_cell(&p), Err(Error::Config(_))));
    let p = CellParams { regime: None, ..p };
    let r = run_cell(&p).unwrap();
    assert_eq!(r.regime, Some(Regime::Partial));
    assert!(!r.verdict.is_fail());
}

#[test]
fn sweep_is_deterministic() {
    let cfg = SweepConfig { fields: vec![3], max_dim: 4, ..Default::default() };
    let a = run_sweep(&cfg).unwrap();
    let b = run_sweep(&SweepConfig { threads: 1, ..cfg.clone() }).unwrap();
    let (a0, b0) = (a.without_timing(), b.without_timing());
    assert_eq!(a0.cells, b0.cells);
    assert_eq!(a0.coverage, b0.coverage);
    assert_eq!(a.config_digest, cfg.digest());
    assert!(!a.has_failures());
    // reports come back sorted by check id
    let ids: Vec<_> = a.cells.iter().map(|c| c.check).collect();
    assert!(ids.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn mutants_fail_and_replay() {
    for mutation in [Mutation::FlipHilbert, Mutation::SkewNorm] {
        let cfg = SweepConfig { fields: vec![3], max_dim: 4, mutation, ..Default::default() };
        let report = run_sweep(&cfg).unwrap();
        let fail = report.failures().next().unwrap_or_else(|| panic!("{mutation:?} went unnoticed"));
        assert!(!fail.witnesses.is_empty());
        let params: CellParams = serde_json::from_value(serde_json::to_value(&fail.params).unwrap()).unwrap();
        let replay = run_cell(&params).unwrap();
        assert_eq!(replay.verdict, fail.verdict);
        assert_eq!(replay.witnesses, fail.witnesses);
    }
}

fn qnp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qnp"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("report.json");

    std::fs::write(&cfg, r#"{"checks": []}"#).unwrap();
    let st = qnp().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["cells"].as_array().unwrap().len(), 0);
    assert!(report["config_digest"].as_str().unwrap().len() == 64);

    std::fs::write(&cfg, r#"{"fields": [3], "max_dim": 2, "checks": ["exactness", "lemma42"]}"#).unwrap();
    let st = qnp().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));

    let st = qnp().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).args(["--mutant", "flip_hilbert"]).status().unwrap();
    assert_eq!(st.code(), Some(1));

    std::fs::write(&cfg, r#"{"height": 2, "max_dim": 4, "regime": "trivial_kernel"}"#).unwrap();
    let st = qnp().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));

    std::fs::write(&cfg, r#"{"fields": [4]}"#).unwrap();
    let st = qnp().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn cli_single_commands() {
    let field = r#"{"base":{"q":3},"towers":["t"]}"#;
    let form = "[[0,0],[0,0],[0,1],[0,1]]";
    let out = qnp().args(["check", "scharlau", "--field", field, "--form", form, "--ext", "[1,0]"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"]["status"], "pass");

    let out = qnp().args(["form", "gq", "--field", field, "--form", form]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));

    let out = qnp().args(["h1", "enumerate", "--field", field, "--form", form]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["count"], 16);

    let out = qnp().args(["check", "nonsense", "--field", field, "--form", form]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

