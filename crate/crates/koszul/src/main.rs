//! Command-line front end: load structure definitions or catalog fixtures,
//! run identity suites, print derived objects, emit reports.
//!
//! Exit codes: 0 success / expected verdicts met, 1 verdict mismatch,
//! 2 input error, 3 a theorem-violated verdict occurred (an implementation
//! bug by construction).

use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use koszul::catalog::{self, Fixture};
use koszul::definition::{build_structure, parse_definition, Structure};
use koszul::derive::{derive_object, DerivedObject};
use koszul::report::{
    CheckReport, ResidualContext, Verdict, DEFAULT_POINTS, DEFAULT_SEED, TOL_IDENTITY,
};
use koszul::sample::sample_points;
use koszul::suites::{run_suite, Suite};

#[derive(Parser)]
#[command(
    name = "koszul",
    about = "Residual verification for bivector-vector pairs, contact and conformally symplectic structures, and their metric compatibility",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an identity suite against a fixture or definition file.
    Check(CheckArgs),
    /// Print derived objects of a structure in the expression grammar.
    Derive(DeriveArgs),
    /// List the built-in fixtures and their expected verdicts.
    Catalog {
        /// Machine-readable output.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct CheckArgs {
    /// Catalog fixture name or path to a definition file.
    target: String,
    /// Suite to run.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Sample points per check.
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Sampling seed; identical seeds give byte-identical reports.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Residual tolerance.
    #[arg(long, default_value_t = TOL_IDENTITY)]
    tol: f64,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
    /// What verdicts count as success.
    #[arg(long, value_enum, default_value_t = Expectation::Pass)]
    expect: Expectation,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Expectation {
    /// Every check must pass.
    Pass,
    /// Checks must match the fixture's committed expected-verdict table.
    Fixture,
}

#[derive(Args)]
struct DeriveArgs {
    /// Catalog fixture name or path to a definition file.
    target: String,
    /// Derived object to print.
    #[arg(long, value_enum)]
    object: DeriveObject,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DeriveObject {
    Reeb,
    Pi,
    Lambda,
    Sharp,
    Christoffel,
    D,
    J,
    Defects,
}

impl From<DeriveObject> for DerivedObject {
    fn from(o: DeriveObject) -> DerivedObject {
        match o {
            DeriveObject::Reeb => DerivedObject::Reeb,
            DeriveObject::Pi => DerivedObject::Pi,
            DeriveObject::Lambda => DerivedObject::Lambda,
            DeriveObject::Sharp => DerivedObject::Sharp,
            DeriveObject::Christoffel => DerivedObject::Christoffel,
            DeriveObject::D => DerivedObject::ContravariantD,
            DeriveObject::J => DerivedObject::ComplexEndo,
            DeriveObject::Defects => DerivedObject::Defects,
        }
    }
}

enum Target {
    Fixture(Box<Fixture>),
    File { name: String, structure: Structure },
}

impl Target {
    fn name(&self) -> &str {
        match self {
            Target::Fixture(f) => &f.name,
            Target::File { name, .. } => name,
        }
    }

    fn structure(&self) -> &Structure {
        match self {
            Target::Fixture(f) => &f.structure,
            Target::File { structure, .. } => structure,
        }
    }
}

fn load_target(spec: &str) -> Result<Target, String> {
    if catalog::names().contains(&spec) {
        let fixture = catalog::load(spec).map_err(|e| e.to_string())?;
        return Ok(Target::Fixture(Box::new(fixture)));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(format!(
            "`{spec}` is neither a catalog fixture ({}) nor a file",
            catalog::names().join(", ")
        ));
    }
    let text = std::fs::read_to_string(path).map_err(|e| format!("{spec}: {e}"))?;
    let def = parse_definition(&text).map_err(|e| format!("{spec}: {e}"))?;
    let structure = build_structure(&def).map_err(|e| format!("{spec}: {e}"))?;
    let name = def.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned()
    });
    Ok(Target::File { name, structure })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Derive(args) => cmd_derive(args),
        Command::Catalog { json } => cmd_catalog(json),
    }
}

fn cmd_check(args: CheckArgs) -> ExitCode {
    let Some(suite) = Suite::parse(&args.suite) else {
        eprintln!(
            "unknown suite `{}`; choose one of {}",
            args.suite,
            Suite::NAMES.join(", ")
        );
        return ExitCode::from(2);
    };
    let target = match load_target(&args.target) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if args.expect == Expectation::Fixture && !matches!(target, Target::Fixture(_)) {
        eprintln!("--expect fixture only applies to catalog fixtures");
        return ExitCode::from(2);
    }
    let structure = target.structure();
    let points = match sample_points(structure.chart(), args.points, args.seed) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("sampling failed: {e}");
            return ExitCode::from(2);
        }
    };
    let ctx = ResidualContext::new(points, args.seed, args.tol);
    let reports = match run_suite(structure, suite, &ctx) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };

    let expected_for = |name: &str| -> Verdict {
        match (&target, args.expect) {
            (Target::Fixture(f), Expectation::Fixture) => f.expected_verdict(name),
            _ => Verdict::Pass,
        }
    };
    let mut mismatch = false;
    let mut violated = false;
    for report in &reports {
        if report.verdict == Verdict::TheoremViolated {
            violated = true;
        }
        if report.verdict != expected_for(&report.name) {
            mismatch = true;
        }
    }

    if args.json {
        let checks: Vec<_> = reports
            .iter()
            .map(|r| {
                json!({
                    "name": r.name,
                    "anchor": r.anchor,
                    "residual": r.residual,
                    "tol": r.tol,
                    "verdict": r.verdict.to_string(),
                })
            })
            .collect();
        let doc = json!({
            "structure": target.name(),
            "suite": suite.as_str(),
            "seed": args.seed,
            "points": args.points,
            "checks": checks,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("serializable")
        );
    } else {
        println!(
            "structure {}  suite {}  points {}  seed {}",
            target.name(),
            suite.as_str(),
            args.points,
            args.seed
        );
        for report in &reports {
            print_report_line(report, expected_for(&report.name));
        }
    }

    if violated {
        ExitCode::from(3)
    } else if mismatch {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn print_report_line(report: &CheckReport, expected: Verdict) {
    let marker = if report.verdict == expected {
        "ok"
    } else {
        "MISMATCH"
    };
    println!(
        "{:<8} {:<22} {:<32} residual {:>12.3e}  tol {:>8.0e}   {}",
        marker,
        report.verdict.to_string(),
        report.name,
        report.residual,
        report.tol,
        report.anchor
    );
}

fn cmd_derive(args: DeriveArgs) -> ExitCode {
    let target = match load_target(&args.target) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match derive_object(target.structure(), args.object.into(), args.json) {
        Ok(output) => {
            println!("{output}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_catalog(as_json: bool) -> ExitCode {
    if as_json {
        let entries: Vec<_> = catalog::FIXTURES
            .iter()
            .map(|spec| {
                let deviations: Vec<_> = spec
                    .expected_deviations
                    .iter()
                    .map(|(name, v)| json!({ "check": name, "verdict": v.to_string() }))
                    .collect();
                json!({
                    "name": spec.name,
                    "kind": kind_of(spec.name),
                    "counterexample": spec.counterexample,
                    "expected_deviations": deviations,
                })
            })
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "fixtures": entries })).expect("serializable")
        );
        return ExitCode::SUCCESS;
    }
    println!(
        "{:<20} {:<24} {:<16} expected deviations from pass",
        "name", "kind", "counterexample"
    );
    for spec in catalog::FIXTURES {
        let deviations = if spec.expected_deviations.is_empty() {
            "none".to_string()
        } else {
            spec.expected_deviations
                .iter()
                .map(|(n, v)| format!("{n}={v}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        println!(
            "{:<20} {:<24} {:<16} {}",
            spec.name,
            kind_of(spec.name),
            spec.counterexample,
            deviations
        );
    }
    ExitCode::SUCCESS
}

fn kind_of(name: &str) -> &'static str {
    match catalog::load(name) {
        Ok(f) => f.kind.as_str(),
        Err(_) => "invalid",
    }
}
