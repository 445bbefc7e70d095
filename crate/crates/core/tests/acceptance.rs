//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Run with `cargo test -p qnp --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use qnp::class::SquareClass;
use qnp::ext::Extension;
use qnp::harness::{
    grid_forms, multisets, run_cell, run_sweep, splitting_lambdas, verify_splitting, CheckId, SweepConfig, SweepReport,
};
use qnp::quadform::QuadForm;
use qnp::testing::Mutation;
use qnp::FieldDesc;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, Box<dyn Fn() -> Outcome>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn laurent(q: u32) -> FieldDesc {
    FieldDesc::tower(q, &["t"]).unwrap()
}

fn sweep(checks: &[CheckId]) -> SweepConfig {
    SweepConfig { fields: vec![3, 5], max_dim: 6, cubic: false, checks: checks.to_vec(), ..Default::default() }
}

/// Zero failures, and at least one cell per check actually examined something.
fn clean(report: &SweepReport) -> Outcome {
    if let Some(f) = report.failures().next() {
        return Err(format!(
            "{} failures, first: {} {}",
            report.failures().count(),
            serde_json::to_string(&f.params).unwrap(),
            serde_json::to_string(&f.verdict).unwrap()
        ));
    }
    let mut parts = vec![];
    for (id, c) in &report.coverage {
        ensure(c.pass > 0 && c.tested > 0, || format!("{id}: nothing was tested"))?;
        parts.push(format!("{id} {}/{} pass, {} skipped", c.pass, c.cells, c.skipped));
    }
    Ok(parts.join("; "))
}

fn square_classes() -> Outcome {
    let fields =
        [FieldDesc::finite(3).unwrap(), FieldDesc::finite(5).unwrap(), FieldDesc::finite(9).unwrap(), laurent(3), laurent(5)];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in &fields {
        for _ in 0..1000 {
            let x = k.random_nonzero(&mut rng, 3, 3);
            let y = k.random_nonzero(&mut rng, 3, 3);
            let cx = k.square_class(&x).map_err(|e| e.to_string())?;
            let cxy2 = k.square_class(&k.mul(&x, &k.square(&y))).map_err(|e| e.to_string())?;
            ensure(cx == cxy2, || format!("{k}: class(x y^2) != class(x) for x = {x:?}"))?;
        }
        for a in k.classes() {
            ensure(k.square_class(&k.class_rep(a)).unwrap() == a, || format!("{k}: rep of {a}"))?;
            for b in k.classes() {
                let c = k.square_class(&k.mul(&k.class_rep(a), &k.class_rep(b))).unwrap();
                ensure(c == a * b, || format!("{k}: class({a} * {b}) = {c}"))?;
            }
        }
    }
    Ok("5 fields x 1000 pairs".into())
}

fn isotropy() -> Outcome {
    let mut n = 0;
    for p in [3u32, 5] {
        let k = FieldDesc::finite(p).unwrap();
        for dim in 1..=4 {
            for entries in multisets(&[SquareClass::ONE, SquareClass::U], dim) {
                let coeffs: Vec<i64> = entries.iter().map(|&c| unit_coeff(p, c)).collect();
                let q = QuadForm::new(&k, entries).unwrap();
                ensure(q.is_isotropic() == isotropic_mod_p(p, &coeffs), || format!("{q} over F_{p}"))?;
                n += 1;
            }
        }
    }
    let p = 3;
    let k = laurent(p);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut found = 0;
    for _ in 0..500 {
        let dim = rng.gen_range(2..=4);
        let entries: Vec<(Vec<i64>, usize)> = (0..dim)
            .map(|_| {
                let mut c = vec![rng.gen_range(1..p as i64), rng.gen_range(0..p as i64)];
                if c[1] == 0 {
                    c.pop();
                }
                (c, rng.gen_range(0..2))
            })
            .collect();
        let classes: Vec<SquareClass> =
            entries.iter().map(|(c, s)| k.square_class(&series(&k, c, *s as i64)).unwrap()).collect();
        let q = QuadForm::new(&k, classes).unwrap();
        if poly_isotropic(p, &entries, 3) {
            found += 1;
            ensure(q.is_isotropic(), || format!("{q} has a polynomial zero but is reported anisotropic"))?;
        }
    }
    ensure(found > 0, || "degree-bounded search found no zero at all".into())?;
    Ok(format!("{n} finite forms, 500 Laurent forms ({found} with polynomial zeros)"))
}

fn hilbert() -> Outcome {
    for k in [FieldDesc::finite(3).unwrap(), FieldDesc::finite(5).unwrap(), laurent(3), laurent(5)] {
        let m1 = k.minus_one_class();
        for a in k.classes() {
            ensure(k.hilbert_class(a, a * m1) == 1, || format!("{k}: ({a}, -{a}) != 1"))?;
            for b in k.classes() {
                ensure(k.hilbert_class(a, b) == k.hilbert_class(b, a), || format!("{k}: not symmetric at {a}, {b}"))?;
                for c in k.classes() {
                    ensure(k.hilbert_class(a, b * c) == k.hilbert_class(a, b) * k.hilbert_class(a, c), || {
                        format!("{k}: not bimultiplicative at {a}, {b}, {c}")
                    })?;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut solved = 0;
    for i in 0..500 {
        let (p, deg) = if i % 2 == 0 { (3u32, 2) } else { (5, 1) };
        let k = laurent(p);
        let mut poly = || -> (Vec<i64>, i64) {
            let mut c: Vec<i64> = (0..2).map(|_| rng.gen_range(0..p as i64)).collect();
            c[0] = rng.gen_range(1..p as i64);
            (c, rng.gen_range(0..2))
        };
        let (a, ea) = poly();
        let (b, eb) = poly();
        let symbol = k.hilbert_symbol(&series(&k, &a, ea), &series(&k, &b, eb)).map_err(|e| e.to_string())?;
        let shift = |c: &[i64], e: i64| -> Vec<i64> { std::iter::repeat_n(0, e as usize).chain(c.iter().copied()).collect() };
        if conic_solvable(p, &shift(&a, ea), &shift(&b, eb), deg) {
            solved += 1;
            ensure(symbol == 1, || format!("F_{p}((t)): conic solvable but symbol -1 for {a:?} t^{ea}, {b:?} t^{eb}"))?;
        }
    }
    ensure(solved > 0, || "no conic was solved".into())?;
    Ok(format!("exhaustive laws on 4 fields, 500 pairs ({solved} solved conics)"))
}

fn lambda_splitting() -> Outcome {
    let mut triples = vec![];
    for q in [3, 5] {
        let k = laurent(q);
        let exts: Vec<Extension> = k
            .classes()
            .filter(|d| d.has_t(1))
            .map(|d| Extension::quadratic(&k, d).unwrap())
            .collect();
        for dim in [2, 4, 6] {
            for form in grid_forms(&k, dim) {
                for (ei, ext) in exts.iter().enumerate() {
                    if let Ok(lambdas) = splitting_lambdas(&form, ext) {
                        triples.extend(lambdas.into_iter().map(|l| (form.clone(), l, q, ei)));
                    }
                }
            }
        }
    }
    let total = triples.len();
    ensure(total >= 100, || format!("only {total} triples satisfy the preconditions"))?;
    triples.shuffle(&mut ChaCha8Rng::seed_from_u64(10));
    let mut not_found = vec![];
    for (form, lambda, q, ei) in triples.into_iter().take(100) {
        let k = form.field().clone();
        let ext = Extension::quadratic(&k, k.classes().filter(|d| d.has_t(1)).nth(ei).unwrap()).unwrap();
        if let Err(w) = verify_splitting(&form, lambda, &ext) {
            not_found.push(format!("F_{q}((t)) {form} {lambda}: {w}"));
        }
    }
    ensure(not_found.is_empty(), || format!("{} not found, first: {}", not_found.len(), not_found[0]))?;
    Ok(format!("100 of {total} triples verified"))
}

fn sq_and_h_stability() -> Outcome {
    let h1 = clean(&run_sweep(&sweep(&[CheckId::SqCommutes, CheckId::HStability])).map_err(|e| e.to_string())?)?;
    let cfg = SweepConfig { fields: vec![3], height: 2, max_dim: 4, checks: vec![CheckId::SqCommutes], ..Default::default() };
    let report = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let fails = report.failures().count();
    ensure(fails == 0, || format!("height 2 partial regime: {fails} failures"))?;
    let c = &report.coverage[&CheckId::SqCommutes];
    Ok(format!("{h1}; height 2: {} pass, {} skipped", c.pass, c.skipped))
}

fn mutations() -> Outcome {
    let mut parts = vec![];
    for mutation in [Mutation::FlipHilbert, Mutation::SkewNorm] {
        let cfg = SweepConfig { fields: vec![3], max_dim: 4, mutation, ..Default::default() };
        let report = run_sweep(&cfg).map_err(|e| e.to_string())?;
        let fail = report.failures().next().ok_or_else(|| format!("{mutation:?} caused no failure"))?;
        let replay = run_cell(&fail.params).map_err(|e| e.to_string())?;
        ensure(replay.verdict == fail.verdict && replay.witnesses == fail.witnesses && !fail.witnesses.is_empty(), || {
            format!("{mutation:?}: failing cell does not replay")
        })?;
        let mut named: Vec<&str> = report.failures().map(|r| r.check.as_str()).collect();
        named.dedup();
        parts.push(format!("{mutation:?} caught by {}", named.join(",")));
    }
    Ok(parts.join("; "))
}

fn sweep_criterion(checks: &'static [CheckId]) -> impl Fn() -> Outcome {
    move || clean(&run_sweep(&sweep(checks)).map_err(|e| e.to_string())?)
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("square-class soundness", 5, Box::new(square_classes)),
        ("isotropy oracle equivalence", 30, Box::new(isotropy)),
        ("hilbert symbol laws", 10, Box::new(hilbert)),
        ("scharlau norm containment", 60, Box::new(sweep_criterion(&[CheckId::Scharlau]))),
        ("knebusch norm containment", 60, Box::new(sweep_criterion(&[CheckId::Knebusch]))),
        ("isotropic forms have full spinor norms", 10, Box::new(sweep_criterion(&[CheckId::IsotropicSnFull]))),
        ("exactness and ker i", 30, Box::new(sweep_criterion(&[CheckId::Exactness, CheckId::KerI]))),
        ("unramified decomposition recomposes", 30, Box::new(sweep_criterion(&[CheckId::Lemma53]))),
        ("unit-level norms are trivial", 30, Box::new(sweep_criterion(&[CheckId::Lemma55]))),
        ("lambda splitting found and verified", 60, Box::new(lambda_splitting)),
        ("r-triviality certificate", 60, Box::new(sweep_criterion(&[CheckId::Lemma42]))),
        ("norm stability and sq commutativity", 60, Box::new(sq_and_h_stability)),
        ("mutation sensitivity", 60, Box::new(mutations)),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(info) if elapsed > Duration::from_secs(*limit) => Err(format!("{info}; over the {limit} s budget")),
            r => r,
        };
        let (tag, info) = match &result {
            Ok(info) => ("PASS", info),
            Err(info) => ("FAIL", info),
        };
        println!("[{tag}] {:>2} {name} ({:.2}s): {info}", i + 1, elapsed.as_secs_f64());
        failed += result.is_err() as usize;
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
