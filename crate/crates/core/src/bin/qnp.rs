use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use qnp::cohomology::H1Context;
use qnp::field::FieldJson;
use qnp::harness::{run_cell, run_sweep, CellParams, CheckId, ExtSpec, Regime, SweepConfig};
use qnp::quadform::QuadForm;
use qnp::testing::Mutation;
use qnp::{Error, FieldDesc};

#[derive(Parser)]
#[command(name = "qnp", version, about = "Square classes, quadratic forms and H^1(-, mu) over Laurent series towers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check over a grid and write a JSON report.
    Sweep {
        /// JSON config; defaults apply to missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Test-only corruption: flip_hilbert or skew_norm.
        #[arg(long)]
        mutant: Option<String>,
    },
    /// Run one check on one cell and print its report.
    Check {
        id: String,
        /// Field JSON, e.g. {"base":{"q":3},"towers":["t"]}.
        #[arg(long)]
        field: String,
        /// Entries as class bit vectors, e.g. [[0,0],[1,0],[0,1]].
        #[arg(long)]
        form: String,
        /// `cubic` or a class bit vector such as [1,0].
        #[arg(long)]
        ext: Option<String>,
        #[arg(long)]
        regime: Option<String>,
        #[arg(long)]
        mutant: Option<String>,
    },
    /// Invariants of a single form.
    Form {
        #[arg(value_parser = ["invariants", "isotropy", "sn", "gq"])]
        what: String,
        #[arg(long)]
        field: String,
        #[arg(long)]
        form: String,
    },
    /// H^1(K, mu) of the discriminant algebra of a form.
    H1 {
        #[arg(value_parser = ["enumerate"])]
        what: String,
        #[arg(long)]
        field: String,
        #[arg(long)]
        form: String,
    },
}

fn parse<T: DeserializeOwned>(what: &str, s: &str) -> qnp::Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn parse_word<T: DeserializeOwned>(what: &str, s: &str) -> qnp::Result<T> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn load_form(field: &str, form: &str) -> qnp::Result<QuadForm> {
    let field = FieldDesc::from_json(&parse::<FieldJson>("field", field)?)?;
    QuadForm::from_entries_json(&field, &parse::<Vec<Vec<u8>>>("form", form)?)
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn run(cli: Cli) -> qnp::Result<bool> {
    match cli.command {
        Command::Sweep { config, out, mutant } => {
            let mut cfg: SweepConfig = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
                }
                None => SweepConfig::default(),
            };
            if let Some(m) = mutant {
                cfg.mutation = parse_word::<Mutation>("mutant", &m)?;
            }
            let report = run_sweep(&cfg)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            std::fs::write(&out, text).map_err(|e| Error::Config(format!("{}: {e}", out.display())))?;
            for (check, c) in &report.coverage {
                eprintln!("{check:<24} cells {:>5}  pass {:>5}  fail {:>4}  skipped {:>5}", c.cells, c.pass, c.fail, c.skipped);
            }
            Ok(!report.has_failures())
        }
        Command::Check { id, field, form, ext, regime, mutant } => {
            let params = CellParams {
                check: id.parse::<CheckId>()?,
                field: parse("field", &field)?,
                form: parse("form", &form)?,
                ext: ext.map(|e| e.parse::<ExtSpec>()).transpose()?,
                regime: regime.map(|r| parse_word::<Regime>("regime", &r)).transpose()?,
                mutation: mutant.map(|m| parse_word::<Mutation>("mutant", &m)).transpose()?.unwrap_or_default(),
                seed: 0,
            };
            let report = run_cell(&params)?;
            print(&serde_json::to_value(&report).expect("report serializes"));
            Ok(!report.verdict.is_fail())
        }
        Command::Form { what, field, form } => {
            let q = load_form(&field, &form)?;
            let v = match what.as_str() {
                "invariants" => json!({
                    "form": q.to_string(),
                    "dim": q.dim(),
                    "det": q.det().to_string(),
                    "disc": q.disc().to_string(),
                    "witt_class": q.witt_class(),
                    "witt_index": q.witt_index(),
                }),
                "isotropy" => json!({"isotropic": q.is_isotropic(), "hyperbolic": q.is_hyperbolic(), "anisotropic_dim": q.aniso_dim()}),
                "sn" => json!({"spinor_norms": q.spinor_norm_group()?.to_string()}),
                _ => json!({"similarity_factors": q.similarity_group().to_string()}),
            };
            print(&v);
            Ok(true)
        }
        Command::H1 { field, form, .. } => {
            let q = load_form(&field, &form)?;
            let h = H1Context::for_form(&q)?;
            let classes = h.enumerate()?;
            let mut rows = vec![];
            for x in &classes {
                rows.push(json!({"class": h.to_json(x), "j": h.map_j(x)?.to_string()}));
            }
            print(&json!({
                "parity": if h.is_odd() { "odd" } else { "even" },
                "d": h.etale().d_class().to_string(),
                "count": classes.len(),
                "classes": rows,
            }));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
