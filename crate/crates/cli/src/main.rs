//! `slitcut` command-line front end.
//!
//! Exit codes: 0 on success, 2 when the stock is insufficient, no admissible
//! solution was found or a checked assignment violates a constraint, 1 on
//! usage, input or configuration errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use slitcut::engine::{solve, EngineConfig, SolveError, SolveReport};
use slitcut::generate::{generate_document, GeneratorSpec};
use slitcut::io::{parse_assignment_str, parse_instance_str, report_to_json, ReportDoc};
use slitcut::metric::{self, MetricDoc};
use slitcut::model::{self, ConstraintSet, Instance};

#[derive(Parser)]
#[command(
    name = "slitcut",
    version,
    about = "Roll-slitting cutting-stock solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write a JSON report.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Report file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every instance in a directory and score the results.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated seeds; overrides --seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Metric table as CSV. With several seeds one file per seed is
        /// written, named `<stem>.seed<S>.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Full benchmark report as JSON; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random instance from a spec file or a preset
    /// (`default`, `medium`, `tiny`).
    Gen {
        spec: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an assignment (or a report's best) against an instance.
    Verify {
        instance: PathBuf,
        assignment: PathBuf,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Engine configuration JSON; missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel lanes (capped by SLITCUT_THREADS).
    #[arg(long)]
    k: Option<usize>,
    /// Time budget in seconds.
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    max_epochs: Option<u64>,
    /// Leave wall-clock data out of reports.
    #[arg(long)]
    no_timing: bool,
}

enum Failure {
    Usage(String),
    Infeasible(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Prints to stdout; a closed pipe on the reader's side is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n"))
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => emit(text),
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn build_config(run: &RunArgs) -> Result<EngineConfig, Failure> {
    let mut cfg = match &run.config {
        Some(p) => serde_json::from_str::<EngineConfig>(&read(p)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        None => EngineConfig::default(),
    };
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    if let Some(k) = run.k {
        cfg.k = k;
    }
    if let Some(t) = run.tmax {
        cfg.t_max_secs = t;
    }
    if let Some(m) = run.max_epochs {
        cfg.max_epochs = Some(m);
    }
    if let Some(cap) = std::env::var("SLITCUT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        if cap >= 1 && cfg.k > cap {
            eprintln!("note: k capped from {} to {cap} by SLITCUT_THREADS", cfg.k);
            cfg.k = cap;
        }
    }
    if cfg.main_capacity < cfg.k {
        eprintln!(
            "warning: main pool capacity {} is below k = {}; some lanes stay idle",
            cfg.main_capacity, cfg.k
        );
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn run_solve(instance: &Instance, cfg: &EngineConfig) -> Result<SolveReport, Failure> {
    solve(instance, cfg).map_err(|e| match e {
        SolveError::Infeasible(inf) => Failure::Infeasible(format!("{}: {inf}", instance.name())),
        other => Failure::Usage(other.to_string()),
    })
}

fn cmd_solve(path: &Path, run: &RunArgs, out: Option<&Path>) -> Result<(), Failure> {
    let instance = load_instance(path)?;
    let cfg = build_config(run)?;
    let report = run_solve(&instance, &cfg)?;
    write_or_print(out, &report_to_json(&report, !run.no_timing))?;
    match report.best_cost {
        Some(c) => {
            eprintln!(
                "{}: best cost {} after {} epochs ({:?})",
                report.instance,
                report.units.mass_to_decimal(c).normalize(),
                report.epochs,
                report.terminated_by
            );
            Ok(())
        }
        None => Err(Failure::Infeasible(format!(
            "{}: no admissible assignment found; rolls with disallowed residual widths: {:?}",
            report.instance, report.unresolved_rolls
        ))),
    }
}

fn cmd_bench(
    dir: &Path,
    run: &RunArgs,
    seeds: &[u64],
    csv: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Usage(format!(
            "{}: no .json instances",
            dir.display()
        )));
    }
    let instances = paths
        .iter()
        .map(|p| load_instance(p))
        .collect::<Result<Vec<_>, _>>()?;
    let base = build_config(run)?;
    let seeds: Vec<u64> = if seeds.is_empty() {
        vec![base.seed]
    } else {
        seeds.to_vec()
    };

    let mut runs = Vec::new();
    let mut totals = Vec::new();
    let mut failed = Vec::new();
    for &seed in &seeds {
        let cfg = EngineConfig {
            seed,
            ..base.clone()
        };
        let mut reports = Vec::new();
        for inst in &instances {
            let report = run_solve(inst, &cfg)?;
            eprintln!(
                "seed {seed} {}: {}",
                report.instance,
                report
                    .best_cost
                    .map(|c| report.units.mass_to_decimal(c).normalize().to_string())
                    .unwrap_or_else(|| "no admissible assignment".into())
            );
            if report.best.is_none() {
                failed.push(format!("{} (seed {seed})", report.instance));
            }
            reports.push(report);
        }
        let scored = metric::metric(&reports).ok();
        if let (Some(m), Some(csv)) = (&scored, csv) {
            let target = if seeds.len() == 1 {
                csv.to_path_buf()
            } else {
                let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("bench");
                csv.with_file_name(format!("{stem}.seed{seed}.csv"))
            };
            fs::write(&target, metric::to_csv(m))?;
        }
        if let Some(m) = &scored {
            totals.push(metric::approx(&m.total));
        }
        runs.push(json!({
            "seed": seed,
            "metric": scored.as_ref().map(MetricDoc::from),
            "reports": reports.iter().map(|r| ReportDoc::new(r, !run.no_timing)).collect::<Vec<_>>(),
        }));
    }
    let mean = (!totals.is_empty()).then(|| totals.iter().sum::<f64>() / totals.len() as f64);
    let doc = json!({
        "config": base,
        "seeds": seeds,
        "instances": instances.iter().map(|i| i.name()).collect::<Vec<_>>(),
        "runs": runs,
        "mean_total_approx": mean,
    });
    write_or_print(
        out,
        &serde_json::to_string_pretty(&doc).expect("bench report serializes"),
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Infeasible(format!(
            "no admissible assignment for: {}",
            failed.join(", ")
        )))
    }
}

fn cmd_gen(spec: &str, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let spec = match spec {
        "default" => GeneratorSpec::default(),
        "medium" => GeneratorSpec::medium("medium"),
        "tiny" => GeneratorSpec::tiny("tiny"),
        path => serde_json::from_str(&read(Path::new(path))?)
            .map_err(|e| Failure::Usage(format!("{path}: {e}")))?,
    };
    let doc = generate_document(&spec, seed).map_err(|e| Failure::Usage(e.to_string()))?;
    write_or_print(
        out,
        &serde_json::to_string_pretty(&doc).expect("instance serializes"),
    )
}

fn cmd_verify(instance: &Path, assignment: &Path) -> Result<(), Failure> {
    let inst = load_instance(instance)?;
    let x = parse_assignment_str(&read(assignment)?, &inst)
        .map_err(|e| Failure::Usage(format!("{}: {e}", assignment.display())))?;
    let units = inst.units();
    let mut violations = Vec::new();
    for i in 0..inst.n_items() {
        let y = model::rest_weight(&inst, &x, i).expect("dimensions checked");
        if y > 0 {
            violations.push(format!(
                "C_job: item {i} is short by {} weight units",
                units.mass_to_decimal(y).normalize()
            ));
        }
    }
    for j in model::bad_rolls(&inst, &x).expect("dimensions checked") {
        let r = model::residual_width(&inst, &x, j).expect("dimensions checked");
        violations.push(format!(
            "C_rw: roll {j} leaves residual width {}, which is not allowed",
            units.width_to_decimal(r).normalize()
        ));
    }
    let cost = model::cost(&inst, &x).expect("dimensions checked");
    debug_assert_eq!(
        violations.is_empty(),
        model::is_admissible(&inst, &x, ConstraintSet::ALL).unwrap()
    );
    emit(
        &serde_json::to_string_pretty(&json!({
            "instance": inst.name(),
            "cost": units.mass_to_decimal(cost).normalize().to_string(),
            "admissible": violations.is_empty(),
            "violations": violations,
        }))
        .expect("verify output serializes"),
    )?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Infeasible(violations.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve { instance, run, out } => cmd_solve(instance, run, out.as_deref()),
        Command::Bench {
            dir,
            run,
            seeds,
            csv,
            out,
        } => cmd_bench(dir, run, seeds, csv.as_deref(), out.as_deref()),
        Command::Gen { spec, seed, out } => cmd_gen(spec, *seed, out.as_deref()),
        Command::Verify {
            instance,
            assignment,
        } => cmd_verify(instance, assignment),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(2)
        }
    }
}
