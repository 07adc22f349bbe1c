//! Command-line front end: seeded, reproducible runs of the two worked
//! applications, the Cramer-Rao identity suite, Pauli twirling, and the
//! measurement-strategy simulator, all emitting JSON (or CSV) reports.
//!
//! Exit codes: 0 all checks pass; 2 a proven bound or pass criterion was
//! violated; 3 invalid input.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use symtwirl_core::apps::{run_app1, run_app2, run_qcrb_suite, App1Report, App2Report, GroupSelector};
use symtwirl_core::groups::{fourier_state, sigma_x, sigma_z, translation_rep, PauliString};
use symtwirl_core::linalg::{ComplexMatrix, DensityMatrix, HermitianOperator, C64};
use symtwirl_core::rng::{flat_dirichlet, rng_from_seed};
use symtwirl_core::sampler::strategy_comparison;
use symtwirl_core::twirl::{sym_pauli_dense, twirl_sn_pauli};
use symtwirl_core::Error;

#[derive(Parser)]
#[command(name = "symtwirl", version, about = "Symmetrized-observable estimation toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GroupArg {
    Z2,
    Translation,
    Permutation,
}

impl From<GroupArg> for GroupSelector {
    fn from(g: GroupArg) -> Self {
        match g {
            GroupArg::Z2 => GroupSelector::Z2,
            GroupArg::Translation => GroupSelector::Translation,
            GroupArg::Permutation => GroupSelector::Permutation,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Random translation-invariant states vs the product observable
    /// (sigma_x + sigma_z) on every site.
    App1 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Per-weight GHZ variance table, typical-Pauli census, ratio bound.
    /// A `.csv` output path emits the table as CSV, anything else JSON.
    App2 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cramer-Rao identity check over random observables and states.
    Qcrb {
        #[arg(long, value_enum)]
        group: GroupArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Permutation-twirl a Pauli string and print its class data.
    Twirl {
        #[arg(long)]
        pauli: String,
        #[arg(long, value_enum)]
        group: GroupArg,
    },
    /// Compare measuring X directly against its translation twirl on a
    /// random translation-invariant state.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SYMTWIRL_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// 2 for violated mathematical bounds, 3 for anything the caller got wrong.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::BoundViolation(_) => 2,
        _ => 3,
    }
}

fn meta(command: &str, seed: u64) -> Value {
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "timestamp": timestamp,
    })
}

fn wrap(command: &str, seed: u64, data: Value) -> String {
    let mut doc =
        serde_json::to_string_pretty(&json!({ "meta": meta(command, seed), "data": data }))
            .expect("report serialization");
    doc.push('\n');
    doc
}

/// Write via a sibling temp file plus rename, so readers never observe a
/// partial report.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    let dim = m.dim();
    let grid = |f: fn(C64) -> f64| -> Vec<Vec<f64>> {
        (0..dim)
            .map(|r| (0..dim).map(|c| f(m.get(r, c))).collect())
            .collect()
    };
    json!({ "re": grid(|z| z.re), "im": grid(|z| z.im) })
}

fn app1_csv(report: &App1Report) -> String {
    let mut s = String::from("trial,var_x,var_y,gap,gap_residual,bounds_ok\n");
    for (i, r) in report.records.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{}",
            r.var_x, r.var_y, r.gap, r.gap_residual, r.bounds_ok
        );
    }
    s
}

fn app2_csv(report: &App2Report) -> String {
    let mut s = String::from("n,k_weight,l_parity,varX,varY_num,varY_den,varY_float,ratio\n");
    for r in &report.table {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.n, r.k_weight, r.l_parity, r.var_x, r.var_y_num, r.var_y_den, r.var_y_float, r.ratio
        );
    }
    s
}

fn run(cmd: Cmd) -> Result<ExitCode, Error> {
    match cmd {
        Cmd::App1 { n, trials, seed, out, format } => {
            let report = run_app1(n, trials, seed)?;
            let contents = match format {
                Format::Json => wrap("app1", seed, serde_json::to_value(&report)?),
                Format::Csv => app1_csv(&report),
            };
            write_atomic(&out, &contents)?;
            println!("app1: n={n}, {} records -> {}", report.records.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::App2 { n, delta, out } => {
            let report = run_app2(n, delta)?;
            let contents = if out.extension().is_some_and(|e| e == "csv") {
                app2_csv(&report)
            } else {
                wrap("app2", 0, serde_json::to_value(&report)?)
            };
            write_atomic(&out, &contents)?;
            println!(
                "app2: n={n}, typical count {} >= bound {:.1} -> {}",
                report.census.typical_count,
                report.census.bound,
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Qcrb { group, n, trials, seed, tol } => {
            let report = run_qcrb_suite(group.into(), n, trials, seed, tol)?;
            print!("{}", wrap("qcrb", seed, serde_json::to_value(&report)?));
            if report.pass {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "qcrb: max residual {:.3e} exceeds tolerance {:.3e}",
                    report.max_residual, report.tol
                );
                Ok(ExitCode::from(2))
            }
        }
        Cmd::Twirl { pauli, group } => {
            if group != GroupArg::Permutation {
                return Err(Error::UnsupportedSize(
                    "the twirl subcommand supports --group permutation".into(),
                ));
            }
            let p = PauliString::parse(&pauli)?;
            let sym = twirl_sn_pauli(&p);
            let class_size = u64::try_from(sym.class_size())
                .map_err(|_| Error::TooLarge("class size exceeds u64".into()))?;
            let mut data = json!({
                "pauli": pauli,
                "n": p.n(),
                "k_weight": p.k_weight(),
                "l_weight": p.l_weight(),
                "type_counts": sym.type_counts(),
                "class_size": class_size,
                "phase": { "re": sym.phase().re, "im": sym.phase().im },
            });
            if p.n() <= 8 {
                let dense = sym_pauli_dense(&sym)?;
                data["matrix"] = matrix_json(dense.matrix());
            }
            print!("{}", wrap("twirl", 0, data));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Simulate { n, shots, reps, seed } => {
            let rep = translation_rep(n)?;
            let dim = 1usize << n;
            let weights = flat_dirichlet(dim, &mut rng_from_seed(seed));
            let mut rho_flat = vec![C64::new(0.0, 0.0); dim * dim];
            for (j, &w) in weights.iter().enumerate() {
                let f = fourier_state(n, j)?;
                for a in 0..dim {
                    for b in 0..dim {
                        rho_flat[a * dim + b] += f[a] * f[b].conj() * C64::new(w, 0.0);
                    }
                }
            }
            let rho = DensityMatrix::new(ComplexMatrix::from_rows(dim, &rho_flat)?)?;
            let factor = HermitianOperator::new(sigma_x().matrix().add(sigma_z().matrix())?)?;
            let mut x = HermitianOperator::identity(1);
            for _ in 0..n {
                x = HermitianOperator::new(x.matrix().kron(factor.matrix()))?;
            }
            let cmp = strategy_comparison(&rho, &x, &rep, shots, reps, seed)?;
            print!("{}", wrap("simulate", seed, serde_json::to_value(&cmp)?));
            Ok(ExitCode::SUCCESS)
        }
    }
}
