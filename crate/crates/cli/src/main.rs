//! `isc`: shadows, `u*`, decompositions, supporting curves and the increasing
//! supermartingale coupling for instance files of two discrete measures.
//!
//! Exit codes: 0 on success (and, for checking commands, when every check
//! passes), 1 when a verification fails, 2 on malformed input or when the
//! measures are not in the order a command requires.

mod io;

use std::fs;
use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use isc_core::coupling::{
    antitone_coupling, increasing_coupling, quantile_coupling, spence_mirrlees_cost, verify, Coupling,
};
use isc_core::curves::SupportCurves;
use isc_core::gen::InstanceGenerator;
use isc_core::num::{one, rat};
use isc_core::oracle::{max_over_couplings, min_over_couplings, TransportConstraint};
use isc_core::regime::{decompose, ustar};
use isc_core::shadow::{shadow, shadow_is_minimal};
use isc_core::{DiscreteMeasure, Error};
use serde_json::{json, Value};

use crate::io::Instance;

#[derive(Debug, Parser)]
#[command(name = "isc", version, about = "Exact shadows and increasing supermartingale couplings")]
struct Cli {
    /// Instance file (`{"mu": [...], "nu": [...]}`); `-` reads standard input.
    #[arg(short, long, global = true)]
    input: Option<PathBuf>,
    /// Write the result here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Generate a random instance from this seed when no input file is given.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Increasing,
    Antitone,
    Quantile,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleCheck {
    /// The shadow of `mu` in `nu` against the LP minimum of every put test function.
    Minimality,
    /// The cost of the increasing coupling against the supermartingale transport LP.
    Optimality,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The shadow of `mu` in `nu` and its mean excess.
    Shadow,
    /// A coupling of `mu` and `nu`.
    Couple {
        #[arg(long, value_enum, default_value = "increasing")]
        method: Method,
        /// Also run the verification battery; exit 1 if any check fails.
        #[arg(long)]
        verify: bool,
    },
    /// The regime-switching level `u*`.
    Ustar,
    /// The irreducible decomposition of `(mu, nu)`.
    Decompose,
    /// `(G, R, S, T, phi)` on an evenly spaced grid of quantile levels.
    Curves {
        /// Number of interior grid points `k/(N+1)`, `k = 1..=N`.
        #[arg(long, default_value_t = 64)]
        grid: u32,
        /// Emit CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Run the verification battery on a coupling (the increasing one by default).
    Verify {
        /// Coupling file: `couple` output or a list of `{x, y, p}` joint masses.
        #[arg(long)]
        coupling: Option<PathBuf>,
    },
    /// Certify results with the independent LP oracle.
    Oracle {
        #[arg(long, value_enum)]
        check: OracleCheck,
    },
    /// Print the instance used (useful with `--seed`).
    Instance,
}

/// A command result: the document to print and whether its checks passed.
struct Outcome {
    body: String,
    verified: bool,
}

impl Outcome {
    fn json(v: Value) -> Self {
        Self { body: serde_json::to_string_pretty(&v).expect("serializable"), verified: true }
    }

    fn checked(v: Value, verified: bool) -> Self {
        Self { verified, ..Self::json(v) }
    }
}

fn load_instance(cli: &Cli, needs_equal_mass: bool) -> anyhow::Result<Instance> {
    match (&cli.input, cli.seed) {
        (Some(path), _) => {
            let text = if path.as_os_str() == "-" {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
                s
            } else {
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
            };
            Instance::parse(&text)
        }
        (None, Some(seed)) => {
            let mut g = InstanceGenerator::new(seed);
            let (mu, nu) = if needs_equal_mass { g.cd_instance() } else { g.pcd_instance() };
            Ok(Instance { mu, nu })
        }
        (None, None) => Err(Error::Parse("either --input or --seed is required".into()).into()),
    }
}

fn require_probabilities(inst: &Instance) -> anyhow::Result<()> {
    for (name, m) in [("mu", &inst.mu), ("nu", &inst.nu)] {
        if m.mass() != one() {
            return Err(Error::Domain(format!("{name} must be a probability measure (mass {})", m.mass())).into());
        }
    }
    Ok(())
}

fn couple(mu: &DiscreteMeasure, nu: &DiscreteMeasure, method: Method) -> isc_core::Result<Coupling> {
    match method {
        Method::Increasing => increasing_coupling(mu, nu),
        Method::Antitone => antitone_coupling(mu, nu),
        Method::Quantile => quantile_coupling(mu, nu),
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let equal_mass = !matches!(cli.command, Command::Shadow | Command::Oracle { check: OracleCheck::Minimality });
    let inst = load_instance(cli, equal_mass)?;
    let (mu, nu) = (&inst.mu, &inst.nu);
    Ok(match &cli.command {
        Command::Instance => Outcome::json(inst.to_json()),
        Command::Shadow => {
            let r = shadow(mu, nu)?;
            Outcome::json(json!({ "shadow": io::measure_json(&r.shadow), "excess": io::rational(&r.excess) }))
        }
        Command::Couple { method, verify: check } => {
            require_probabilities(&inst)?;
            let pi = couple(mu, nu, *method)?;
            let mut doc = json!({ "coupling": io::coupling_json(&pi) });
            if *check {
                let report = verify(&pi, mu, nu);
                doc["report"] = io::report_json(&report);
                Outcome::checked(doc, report.all_ok())
            } else {
                Outcome::json(doc)
            }
        }
        Command::Ustar => Outcome { body: ustar(mu, nu)?.to_string(), verified: true },
        Command::Decompose => Outcome::json(io::decomposition_json(&decompose(mu, nu)?)),
        Command::Curves { grid, csv } => {
            require_probabilities(&inst)?;
            let curves = SupportCurves::new(mu, nu)?;
            let n = i64::from(*grid);
            let triples = (1..=n).map(|k| curves.triple_at(&rat(k, n + 1))).collect::<isc_core::Result<Vec<_>>>()?;
            if *csv {
                Outcome { body: io::triples_csv(&triples), verified: true }
            } else {
                Outcome::json(json!({
                    "u_star": io::rational(curves.u_star()),
                    "null_levels": curves.null_levels().iter().map(io::rational).collect::<Vec<_>>(),
                    "points": triples.iter().map(io::triple_json).collect::<Vec<_>>(),
                }))
            }
        }
        Command::Verify { coupling } => {
            let pi = match coupling {
                Some(path) => {
                    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    io::parse_coupling(&text)?
                }
                None => {
                    require_probabilities(&inst)?;
                    increasing_coupling(mu, nu)?
                }
            };
            let report = verify(&pi, mu, nu);
            Outcome::checked(io::report_json(&report), report.all_ok())
        }
        Command::Oracle { check: OracleCheck::Minimality } => {
            let r = shadow(mu, nu)?;
            let ok = shadow_is_minimal(mu, nu, &r)?;
            Outcome::checked(json!({ "shadow": io::measure_json(&r.shadow), "minimal": ok }), ok)
        }
        Command::Oracle { check: OracleCheck::Optimality } => {
            require_probabilities(&inst)?;
            let cost = spence_mirrlees_cost(mu, nu);
            let own = increasing_coupling(mu, nu)?.cost(&cost)?;
            let min = min_over_couplings(mu, nu, &cost, TransportConstraint::Supermartingale)?.value;
            let max = max_over_couplings(mu, nu, &cost, TransportConstraint::Supermartingale)?.value;
            let ok = own == min;
            Outcome::checked(
                json!({
                    "cost": io::rational(&own),
                    "lp_minimum": io::rational(&min),
                    "lp_maximum": io::rational(&max),
                    "optimal": ok,
                }),
                ok,
            )
        }
    })
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Internal(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let mut body = outcome.body;
            if !body.ends_with('\n') {
                body.push('\n');
            }
            let written = match &cli.output {
                Some(path) => fs::write(path, &body).with_context(|| format!("writing {}", path.display())),
                None => {
                    print!("{body}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if outcome.verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
