//! `kings`: command-line front end for the King's Problem toolkit.

mod manifest;

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kings_core::bounds::{
    bound_p, overlap_target, BoundFormula, BoundReport, RelaxedConfig, TABLE1_DIMS,
};
use kings_core::cube::{
    always_guess_baseline, conventional_cube_optimize, quoted_optimum_angle_deg, vaa_overlap_table,
    vaa_prediction_table, vaa_success, verify_bell_decompositions, CubeGameSetup,
    CubeOptimizeConfig,
};
use kings_core::game::{simulate, GameMode};
use kings_core::io::{read_basis_csv, read_basis_json, write_basis_csv, write_family_csv};
use kings_core::search::{
    certify_d3_impossible, certify_optimal_strategy, find_measurement_bases, find_signal_states,
    membership_counts, verify_phase_lattice, ImpossibilityConfig,
};
use kings_core::strategy::{complement_strategy, success_exact};
use kings_core::tables::{
    table3_from, table4_from, table5, write_rows_csv, write_table5_csv, write_tables,
};
use kings_core::verify::{run_criteria, Fault, Profile};
use kings_core::{certify_family, construct_mub, ConventionalStrategy, OrthonormalBasis};
use manifest::{Emitter, Format, RunManifest};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "kings",
    version,
    about = "Conventional strategies for the King's Problem"
)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Tolerance for pass/fail comparisons.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tolerance: f64,
    /// Comma-separated output formats: text, json, csv.
    #[arg(long, global = true, value_delimiter = ',', default_value = "text")]
    emit: Vec<String>,
    /// Directory for emitted files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct and certify a complete family of mutually unbiased bases.
    Mub {
        #[arg(long)]
        d: usize,
        /// Emit only this basis, in the format `eval --control` reads.
        #[arg(long)]
        basis: Option<usize>,
    },
    /// Upper bounds on the success probability.
    Bound(BoundArgs),
    /// Exact success probability of an eigenstate-preparation strategy.
    Eval(EvalArgs),
    /// Exhaustive saturation search (d=4) or impossibility certificate (d=3).
    Search(SearchArgs),
    /// The cube-diagonal qubit variant.
    Cube {
        #[command(subcommand)]
        which: CubeCommand,
    },
    /// Monte Carlo simulation of a strategy.
    Simulate {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
    },
    /// Write the reference tables as CSV with full-precision JSON siblings.
    Tables {
        /// Comma-separated table numbers.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        which: Vec<usize>,
    },
    /// Run the acceptance criteria.
    Verify {
        #[arg(long, value_enum, default_value = "full")]
        profile: ProfileArg,
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long, required_unless_present = "table1")]
    d: Option<usize>,
    /// Number of guessed bases for a general preparation.
    #[arg(long)]
    r: Option<usize>,
    /// Print the bound for the tabulated dimensions.
    #[arg(long, conflicts_with_all = ["d", "r"])]
    table1: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    d: usize,
    /// `optimal`, `basis:N`, or a basis file (.json or .csv).
    #[arg(long, default_value = "optimal")]
    control: String,
    #[arg(long, default_value_t = 0)]
    prep_basis: usize,
    #[arg(long, default_value_t = 0)]
    prep_index: usize,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long)]
    d: usize,
    /// Grid step (degrees) for the off-lattice phase check in d=4.
    #[arg(long)]
    lattice_grid_deg: Option<f64>,
    /// Phase grid step (degrees) for the d=3 certificate.
    #[arg(long, default_value_t = 0.5)]
    grid_deg: f64,
    /// Multi-start count for the d=3 certificate.
    #[arg(long, default_value_t = 32)]
    starts: usize,
    /// Deviation threshold for the d=3 certificate.
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
}

#[derive(Subcommand, Debug)]
enum CubeCommand {
    /// Entanglement-assisted solution with the VAA basis.
    Vaa,
    /// Best spin measurement with a single-qubit preparation along n1.
    Conventional {
        #[arg(long, default_value_t = 0.25)]
        grid_deg: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    D2,
    D4,
    CubeVaa,
    CubeConv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProfileArg {
    Quick,
    Full,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FaultArg {
    Table2,
}

/// Failure of a check, as opposed to an error in running it.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .downcast_ref::<kings_core::Error>()
                .is_some_and(|e| e.is_usage())
                || e.downcast_ref::<UsageError>().is_some();
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

fn parse_formats(raw: &[String]) -> Result<Vec<Format>> {
    raw.iter()
        .map(|s| match s.trim() {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" | "table5" => Ok(Format::Csv),
            other => Err(usage(format!("unknown --emit format `{other}`"))),
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    let formats = parse_formats(&cli.emit)?;
    if !(cli.tolerance > 0.0 && cli.tolerance.is_finite()) {
        return Err(usage("--tolerance must be positive"));
    }
    let (name, params) = describe(&cli.command);
    let em = Emitter {
        formats,
        out: cli.out.clone(),
        manifest: RunManifest::new(name, params, cli.seed, cli.tolerance),
    };
    match cli.command {
        Command::Mub { d, basis } => cmd_mub(&em, d, basis, cli.tolerance),
        Command::Bound(a) => cmd_bound(&em, &a),
        Command::Eval(a) => cmd_eval(&em, &a),
        Command::Search(a) => cmd_search(&em, &a, cli.seed),
        Command::Cube { which } => cmd_cube(&em, &which),
        Command::Simulate { mode, trials } => cmd_simulate(&em, mode, trials, cli.seed),
        Command::Tables { which } => cmd_tables(&em, &which, cli.out.as_deref()),
        Command::Verify {
            profile,
            inject_fault,
        } => cmd_verify(&em, profile, inject_fault, cli.seed),
    }
}

fn describe(c: &Command) -> (&'static str, serde_json::Value) {
    match c {
        Command::Mub { d, basis } => ("mub", json!({ "d": d, "basis": basis })),
        Command::Bound(a) => ("bound", json!({ "d": a.d, "r": a.r, "table1": a.table1 })),
        Command::Eval(a) => (
            "eval",
            json!({ "d": a.d, "control": a.control, "prep_basis": a.prep_basis, "prep_index": a.prep_index }),
        ),
        Command::Search(a) => (
            "search",
            json!({ "d": a.d, "lattice_grid_deg": a.lattice_grid_deg, "grid_deg": a.grid_deg,
                    "starts": a.starts, "delta": a.delta }),
        ),
        Command::Cube {
            which: CubeCommand::Vaa,
        } => ("cube vaa", json!({})),
        Command::Cube {
            which: CubeCommand::Conventional { grid_deg },
        } => ("cube conventional", json!({ "grid_deg": grid_deg })),
        Command::Simulate { mode, trials } => (
            "simulate",
            json!({ "mode": value_name(*mode), "trials": trials }),
        ),
        Command::Tables { which } => ("tables", json!({ "which": which })),
        Command::Verify {
            profile,
            inject_fault,
        } => (
            "verify",
            json!({ "profile": value_name(*profile), "inject_fault": inject_fault.map(value_name) }),
        ),
    }
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .map_or_else(String::new, |p| p.get_name().to_owned())
}

fn cmd_mub(em: &Emitter, d: usize, basis: Option<usize>, tolerance: f64) -> Result<()> {
    let family = construct_mub(d)?;
    let report = certify_family(&family);
    let passed = report.max_orthonormality_deviation < tolerance
        && report.max_unbiasedness_deviation < tolerance;
    em.text(&format!(
        "d={d}: {} bases, orthonormality deviation {:.2e}, unbiasedness deviation {:.2e}: {}",
        family.bases().len(),
        report.max_orthonormality_deviation,
        report.max_unbiasedness_deviation,
        if passed { "certified" } else { "FAILED" }
    ));
    match basis {
        Some(label) => {
            let b = family.basis(label)?;
            let stem = format!("mub_d{d}_basis{label}");
            em.json(&stem, b)?;
            em.csv(&stem, |w| write_basis_csv(b, w))?;
        }
        None => {
            em.json(&format!("mub_d{d}"), &family)?;
            em.json(&format!("mub_d{d}.certification"), &report)?;
            em.csv(&format!("mub_d{d}"), |w| write_family_csv(&family, w))?;
        }
    }
    if !passed {
        bail!(CheckFailed(format!(
            "family for d={d} failed certification"
        )));
    }
    Ok(())
}

fn cmd_bound(em: &Emitter, a: &BoundArgs) -> Result<()> {
    if a.table1 {
        let rows: Vec<BoundReport> = TABLE1_DIMS
            .iter()
            .map(|&d| BoundReport::eigenstate(d))
            .collect::<Result<_, _>>()?;
        let mut text = String::from("d  bound");
        for r in &rows {
            text.push_str(&format!("\n{:<2} {:.4}", r.d, r.value));
        }
        em.text(&text);
        em.json("bound_table1", &rows)?;
        return em.csv("bound_table1", |w| write_rows_csv(&rows, w));
    }
    let d = a.d.ok_or_else(|| usage("--d is required"))?;
    let report = match a.r {
        Some(r) => BoundReport::split(d, r)?,
        None => BoundReport::eigenstate(d)?,
    };
    let kind = match report.formula {
        BoundFormula::Eq1 => "eigenstate preparation",
        BoundFormula::A8 => "no split",
        _ => "guess/control split",
    };
    em.text(&format!(
        "d={d}{}: bound {:.6} ({kind})",
        a.r.map_or(String::new(), |r| format!(" r={r}")),
        report.value
    ));
    em.json("bound", &report)?;
    em.csv("bound", |w| {
        write_rows_csv(std::slice::from_ref(&report), w)
    })
}

fn load_control(d: usize, control: &str) -> Result<ControlChoice> {
    if control == "optimal" {
        return match d {
            2 => Ok(ControlChoice::Strategy(
                ConventionalStrategy::qubit_optimal()?,
            )),
            4 => {
                let family = construct_mub(4)?;
                let states = find_signal_states(&family)?;
                let bases = find_measurement_bases(&states);
                Ok(ControlChoice::Strategy(certify_optimal_strategy(
                    &bases[0], &states, &family,
                )?))
            }
            _ => Err(usage(format!(
                "no known optimal control for d={d}; use basis:N or a file"
            ))),
        };
    }
    if let Some(n) = control.strip_prefix("basis:") {
        let label: usize = n
            .parse()
            .map_err(|_| usage(format!("bad basis label `{n}`")))?;
        let family = construct_mub(d)?;
        return Ok(ControlChoice::Basis(family.basis(label)?.clone()));
    }
    let path = Path::new(control);
    let file =
        File::open(path).with_context(|| format!("opening control basis {}", path.display()))?;
    let basis = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => read_basis_json(file)?,
        Some("csv") => read_basis_csv(file)?,
        _ => return Err(usage("control file must end in .json or .csv")),
    };
    Ok(ControlChoice::Basis(basis))
}

enum ControlChoice {
    Strategy(ConventionalStrategy),
    Basis(OrthonormalBasis),
}

fn cmd_eval(em: &Emitter, a: &EvalArgs) -> Result<()> {
    let strategy = match load_control(a.d, &a.control)? {
        ControlChoice::Strategy(s) => {
            if (a.prep_basis, a.prep_index) != (0, 0) {
                return Err(usage(
                    "--control optimal fixes the preparation to basis 0, state 0",
                ));
            }
            s
        }
        ControlChoice::Basis(b) => {
            if b.dim() != a.d {
                return Err(usage(format!(
                    "control basis has dimension {}, expected {}",
                    b.dim(),
                    a.d
                )));
            }
            ConventionalStrategy::eigenstate(construct_mub(a.d)?, a.prep_basis, a.prep_index, b)?
        }
    };
    let breakdown = success_exact(&strategy)?;
    let complement = complement_strategy(&strategy)?.success()?;
    let bound = bound_p(a.d)?;
    let pd = overlap_target(a.d)? * a.d as f64;
    let mut text = format!(
        "d={}: success {:.6} (bound {:.6}), complement {:.6}",
        a.d, breakdown.total, bound, complement
    );
    for (k, f) in &breakdown.per_signal {
        text.push_str(&format!("\n  F({k}) = {f:.6} (limit {pd:.6})"));
    }
    em.text(&text);
    em.json(
        "eval",
        &json!({ "success": breakdown, "complement_success": complement, "bound": bound,
                 "assignment": strategy.assignment(), "control": strategy.control() }),
    )
}

fn cmd_search(em: &Emitter, a: &SearchArgs, seed: u64) -> Result<()> {
    match a.d {
        4 => {
            let family = construct_mub(4)?;
            let states = find_signal_states(&family)?;
            let bases = find_measurement_bases(&states);
            let counts = membership_counts(&bases, states.len());
            let mut text = format!(
                "{} signal states, {} orthonormal bases; memberships per state: {:?}",
                states.len(),
                bases.len(),
                counts.iter().collect::<std::collections::BTreeSet<_>>()
            );
            let lattice = match a.lattice_grid_deg {
                Some(g) => {
                    let r = verify_phase_lattice(&family, &states, g)?;
                    text.push_str(&format!(
                        "\nphase lattice: max shift {:.1e} rad, {} off-lattice solutions, nearest miss {:.4}",
                        r.max_shift,
                        r.additional.len(),
                        r.min_off_lattice_deviation
                    ));
                    Some(r)
                }
                None => None,
            };
            em.text(&text);
            em.json(
                "search_d4",
                &json!({ "signal_states": states, "bases": bases, "lattice": lattice }),
            )?;
            em.csv("search_d4_states", |w| {
                write_rows_csv(&table3_from(&states), w)
            })?;
            em.csv("search_d4_bases", |w| {
                write_rows_csv(&table4_from(&bases), w)
            })
        }
        3 => {
            let family = construct_mub(3)?;
            let config = ImpossibilityConfig {
                delta: a.delta,
                starts: a.starts,
                grid_deg: a.grid_deg,
                seed,
            };
            let report = certify_d3_impossible(&family, &config)?;
            let relaxed =
                kings_core::bounds::relaxed_f_max(&family, 0, &RelaxedConfig::default(), seed)?;
            em.text(&format!(
                "27 tuples; worst-case minimal deviation {:.10} vs delta {}: {}\nrelaxed max F {:.6}, 3p {:.6}, gap {:.6}",
                report.worst_case_min,
                report.delta,
                if report.passed { "no saturating control state" } else { "NOT CERTIFIED" },
                relaxed.value,
                relaxed.relaxed_bound,
                relaxed.gap()
            ));
            em.json(
                "search_d3",
                &json!({ "impossibility": report, "relaxed": relaxed }),
            )?;
            if !report.passed {
                bail!(CheckFailed("d=3 impossibility not certified".into()));
            }
            Ok(())
        }
        d => Err(usage(format!("search supports d=3 and d=4, got {d}"))),
    }
}

fn cmd_cube(em: &Emitter, which: &CubeCommand) -> Result<()> {
    let setup = CubeGameSetup::new();
    match which {
        CubeCommand::Vaa => {
            let bell = verify_bell_decompositions(&setup);
            let predictions = vaa_prediction_table(&setup)?;
            let success = vaa_success(&setup, &predictions);
            let rows = table5();
            let mut text = format!(
                "Bell decompositions: {} (wrong-pairing margin {:.3})\nVAA success {:.3}",
                if bell.passed { "ok" } else { "FAILED" },
                bell.margin,
                success.total
            );
            for (k, signs) in predictions.signs.iter().enumerate() {
                let s: Vec<&str> = signs.iter().map(|s| s.symbol()).collect();
                text.push_str(&format!("\n  chi{} predicts ({})", k + 1, s.join(",")));
            }
            em.text(&text);
            em.json(
                "cube_vaa",
                &json!({ "bell": bell, "overlaps": vaa_overlap_table(&setup), "predictions": predictions,
                         "success": success }),
            )?;
            em.csv("table5", |w| write_table5_csv(&rows, w))
        }
        CubeCommand::Conventional { grid_deg } => {
            let o = conventional_cube_optimize(
                &setup,
                &CubeOptimizeConfig {
                    grid_deg: *grid_deg,
                    ..Default::default()
                },
            )?;
            let d = o.best.direction;
            em.text(&format!(
                "optimum {:.6} at m = ({:.6}, {:.6}, {:.6}), {:.3} deg from n1 (arctan form {:.3}), great circle n1-n{}\n{} equivalent optima; always-guess baseline {:.3}",
                o.best.value,
                d.x,
                d.y,
                d.z,
                o.best.angle_deg,
                quoted_optimum_angle_deg(),
                o.best.great_circle_partner.map_or("?".into(), |k| k.to_string()),
                o.local_optima.len(),
                always_guess_baseline(&setup)
            ));
            em.json("cube_conventional", &o)
        }
    }
}

fn cmd_simulate(em: &Emitter, mode: Mode, trials: u64, seed: u64) -> Result<()> {
    let mode = match mode {
        Mode::D2 => GameMode::D2,
        Mode::D4 => GameMode::D4,
        Mode::CubeVaa => GameMode::CubeVaa,
        Mode::CubeConv => GameMode::CubeConv,
    };
    let r = simulate(&mode.strategy()?, trials, seed)?;
    em.text(&format!(
        "{}: {} / {} = {:.5} +/- {:.5} (exact {:.5}, z {:.2})",
        r.strategy,
        r.successes,
        r.trials,
        r.estimate,
        r.stderr,
        r.exact,
        r.z_score()
    ));
    em.json("simulate", &r)?;
    em.csv("simulate", |w| write_rows_csv(&r.per_basis, w))
}

fn cmd_tables(em: &Emitter, which: &[usize], out: Option<&Path>) -> Result<()> {
    let dir = out.unwrap_or(Path::new("tables"));
    let paths = write_tables(which, dir)?;
    let em = Emitter {
        out: Some(dir.to_path_buf()),
        formats: em.formats.clone(),
        manifest: em.manifest.clone(),
    };
    em.write_manifest("tables")?;
    let listed: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
    println!("{}", listed.join("\n"));
    Ok(())
}

fn cmd_verify(em: &Emitter, profile: ProfileArg, fault: Option<FaultArg>, seed: u64) -> Result<()> {
    let profile = match profile {
        ProfileArg::Quick => Profile::Quick,
        ProfileArg::Full => Profile::Full,
    };
    let fault = fault.map(|f| match f {
        FaultArg::Table2 => Fault::Table2,
    });
    let outcomes = run_criteria(profile, seed, fault);
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let mut text: Vec<String> = outcomes.iter().map(|o| o.line()).collect();
    text.push(format!(
        "{} passed, {failed} failed",
        outcomes.len() - failed
    ));
    em.text(&text.join("\n"));
    em.json("verify", &outcomes)?;
    if failed > 0 {
        bail!(CheckFailed(format!("{failed} criteria failed")));
    }
    Ok(())
}
