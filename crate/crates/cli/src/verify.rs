//! The `verify` subcommand: bound checks and update-formula oracles as
//! JSON lines.

use std::io::Write;
use std::path::PathBuf;

use barstat::incremental::{cvtsi_after_insert, tsi_after_delete_bar, tsi_after_insert};
use barstat::metrics::{
    check_cvtsi_stability_bound, check_equal_cardinality_bound, check_popoviciu_bound, check_tsi_empty_bound,
};
use barstat::summaries::tsi;
use barstat::{entropy, Barcode64, Error, PNorm, RngSeed, RunningStats64, TrialRng};
use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use crate::{load_diagram, select_degrees, CliResult, Failure};

/// Relative slack for the update formulas against direct recomputation.
const ORACLE_TOLERANCE: f64 = 1e-9;

/// Random stream reserved for `verify --random`.
const RANDOM_STREAM: u32 = u32::MAX - 1;

#[derive(Args)]
pub struct VerifyArgs {
    /// Diagram CSV; `-` reads stdin.
    #[arg(required_unless_present = "random", conflicts_with = "random")]
    diagram: Option<PathBuf>,
    /// Second diagram for the two-barcode bounds.
    #[arg(long, requires = "diagram")]
    other: Option<PathBuf>,
    /// Random barcodes with N bars, each paired with a perturbed copy.
    #[arg(long, num_args = 2, value_names = ["N", "TRIALS"])]
    random: Option<Vec<u32>>,
    /// Restrict to these checks (repeatable).
    #[arg(long, value_enum)]
    bound: Vec<Check>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Homology degree of the bars to check.
    #[arg(short, long, default_value_t = 1)]
    degree: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    WassersteinEmpty,
    Popoviciu,
    TsiInsert,
    TsiDelete,
    CvtsiInsert,
    EqualCardinality,
    CvtsiStability,
}

impl Check {
    fn needs_pair(self) -> bool {
        matches!(self, Check::EqualCardinality | Check::CvtsiStability)
    }
}

struct Record {
    bound: String,
    lhs: f64,
    rhs: f64,
    holds: bool,
}

impl Record {
    fn oracle(bound: &str, formula: f64, direct: f64) -> Self {
        let lhs = (formula - direct).abs();
        let rhs = ORACLE_TOLERANCE * direct.abs().max(1.0);
        Record { bound: bound.to_string(), lhs, rhs, holds: lhs <= rhs }
    }

    fn to_json(&self) -> Value {
        json!({ "bound": self.bound, "lhs": self.lhs, "rhs": self.rhs, "holds": self.holds })
    }
}

impl From<barstat::BoundCheck<f64>> for Record {
    fn from(c: barstat::BoundCheck<f64>) -> Self {
        Record { bound: c.bound, lhs: c.lhs, rhs: c.rhs, holds: c.holds }
    }
}

fn run_check(check: Check, b: &Barcode64, other: Option<&Barcode64>) -> barstat::Result<Vec<Record>> {
    let stats = RunningStats64::from_barcode(b);
    let extended = |ell: f64| {
        let mut l = b.lifetimes().to_vec();
        l.push(ell);
        Barcode64::from_lifetimes(b.degree(), &l)
    };
    // a new bar away from the mean, so the update term is not trivial
    let probe = b.mean_lifetime().unwrap_or(0.0) + b.max_lifetime().unwrap_or(0.0);
    Ok(match check {
        Check::WassersteinEmpty => vec![
            check_tsi_empty_bound(b, PNorm::Finite(2.0))?.into(),
            check_tsi_empty_bound(b, PNorm::Infinity)?.into(),
        ],
        Check::Popoviciu => vec![check_popoviciu_bound(b)?.into()],
        Check::TsiInsert => {
            vec![Record::oracle("tsi_insert", tsi_after_insert(&stats, probe)?, tsi(&extended(probe)?))]
        }
        Check::TsiDelete => {
            let longest = b.max_lifetime().ok_or_else(|| Error::Undefined("deletion from an empty barcode".into()))?;
            let mut rest = b.lifetimes().to_vec();
            let at = rest.iter().position(|&l| l == longest).expect("max is a member");
            rest.swap_remove(at);
            let direct = tsi(&Barcode64::from_lifetimes(b.degree(), &rest)?);
            vec![Record::oracle("tsi_delete", tsi_after_delete_bar(b, longest)?, direct)]
        }
        Check::CvtsiInsert => {
            let direct = entropy::cvtsi(&extended(probe)?)?;
            vec![Record::oracle("cvtsi_insert", cvtsi_after_insert(&stats, probe)?, direct)]
        }
        Check::EqualCardinality => vec![check_equal_cardinality_bound(b, other.expect("pair check"))?.into()],
        Check::CvtsiStability => vec![check_cvtsi_stability_bound(b, other.expect("pair check"))?.into()],
    })
}

/// Same bar count; every endpoint moves by at most 0.05.
fn perturb(b: &Barcode64, rng: &mut TrialRng) -> barstat::Result<Barcode64> {
    let iv: Vec<(f64, f64)> = b
        .bars()
        .iter()
        .map(|x| {
            let birth = x.birth() + 0.1 * (rng.uniform() - 0.5);
            (birth, (x.death() + 0.1 * (rng.uniform() - 0.5)).max(birth))
        })
        .collect();
    Barcode64::from_intervals(b.degree(), &iv)
}

fn random_barcode(n: u32, degree: usize, rng: &mut TrialRng) -> barstat::Result<Barcode64> {
    let iv: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let birth = 5.0 * rng.uniform();
            (birth, birth + 10.0 * rng.uniform())
        })
        .collect();
    Barcode64::from_intervals(degree, &iv)
}

pub fn run(args: VerifyArgs) -> CliResult {
    let explicit = !args.bound.is_empty();
    let checks: Vec<Check> = if explicit { args.bound.clone() } else { Check::value_variants().to_vec() };

    let mut cases: Vec<(Option<u32>, Barcode64, Option<Barcode64>)> = Vec::new();
    if let Some(r) = &args.random {
        let (n, trials) = (r[0], r[1]);
        for t in 0..trials {
            let mut rng = RngSeed(args.seed).trial(RANDOM_STREAM, t);
            let b = random_barcode(n, args.degree, &mut rng)?;
            let other = perturb(&b, &mut rng)?;
            cases.push((Some(t), b, Some(other)));
        }
    } else {
        let path = args.diagram.as_ref().expect("clap enforces a diagram");
        let b = select_degrees(&load_diagram(path, barstat::InfinitePolicy::Exclude)?, &[args.degree])?.remove(0);
        let other = match &args.other {
            Some(p) => Some(select_degrees(&load_diagram(p, barstat::InfinitePolicy::Exclude)?, &[args.degree])?.remove(0)),
            None => None,
        };
        if explicit && other.is_none() && checks.iter().any(|c| c.needs_pair()) {
            return Err(Failure::usage("two-barcode bounds need --other"));
        }
        cases.push((None, b, other));
    }

    let mut out: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| Failure::domain(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::BufWriter::new(std::io::stdout().lock())),
    };
    let mut failed = 0usize;
    for (trial, b, other) in &cases {
        for &check in &checks {
            if check.needs_pair() && other.is_none() {
                continue;
            }
            let records = match run_check(check, b, other.as_ref()) {
                Ok(r) => r,
                // a cardinality mismatch is a usage error even for default checks
                Err(e @ Error::CardinalityMismatch { .. }) => return Err(e.into()),
                Err(e) if explicit => return Err(e.into()),
                Err(e) => {
                    eprintln!("skipping {:?}: {e}", check.to_possible_value().expect("named").get_name());
                    continue;
                }
            };
            for r in records {
                failed += usize::from(!r.holds);
                let mut v = r.to_json();
                if let Some(t) = trial {
                    v["trial"] = json!(t);
                }
                writeln!(out, "{v}")?;
            }
        }
    }
    out.flush()?;
    if failed > 0 {
        eprintln!("barstat: {failed} checks failed");
        return Err(Failure::silent());
    }
    Ok(())
}
