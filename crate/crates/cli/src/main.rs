mod config;
mod svg;

use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use switchtrack::bounds::{figure1_table, BoundInputs};
use switchtrack::harness::io::{
    fmt_sig, read_loss_csv, summary_json, to_json_string, write_result_csv, CSV_DIGITS,
};
use switchtrack::harness::{
    self, check_feasible, ComparatorSequence, ExperimentResult, LossModel, RngInfo,
    SyntheticSetup, Trials,
};
use switchtrack::{project, InteriorSimplexVector, LowerBounds};

use config::{RunConfig, Tuning};

/// A bad input or parameter; exit status 2.
#[derive(Debug)]
pub struct Invalid(pub String);

/// A checked property did not hold; exit status 1.
#[derive(Debug)]
pub struct Breach(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Breach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}
impl std::error::Error for Breach {}

#[derive(Parser)]
#[command(name = "switchtrack", version, about = "Track a switching best expert with projection and mixing learners")]
struct Cli {
    /// Seed for every random draw; overrides seeds given in config files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (project, bounds, equivalence) or directory (simulate).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include per-trial or per-case detail in JSON output.
    #[arg(long, global = true)]
    full: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project a weight vector onto {x in the simplex : x >= beta}.
    Project {
        /// JSON file with fields "w" and "beta"; "-" reads stdin.
        input: PathBuf,
    },
    /// Tabulate the regret bounds over a range of pool sizes.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(short = 'T', long = "horizon")]
        horizon: usize,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        m_min: usize,
        #[arg(long)]
        m_max: usize,
        /// Also draw the table as an SVG line chart.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run a learner on synthetic or replayed losses.
    Simulate {
        /// JSON run configuration.
        config: PathBuf,
    },
    /// Check Share-theta against geometric MPP and against specialists.
    Equivalence {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(short = 'T', long = "horizon", default_value_t = 200)]
        horizon: usize,
        /// Number of (alpha, theta, seed) cases.
        #[arg(long, default_value_t = 50)]
        cases: usize,
        /// Fix alpha instead of drawing it; needs --theta.
        #[arg(long, requires = "theta")]
        alpha: Option<f64>,
        #[arg(long, requires = "alpha")]
        theta: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SWITCHTRACK_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = classify(&e);
            let body = json!({ "error": format!("{e:#}"), "kind": kind });
            eprintln!("{body}");
            ExitCode::from(code)
        }
    }
}

fn classify(e: &anyhow::Error) -> (u8, &'static str) {
    if e.downcast_ref::<Breach>().is_some() {
        return (1, "breach");
    }
    match e.downcast_ref::<switchtrack::Error>() {
        Some(inner) if inner.is_numeric() => (3, "numeric"),
        _ => (2, "validation"),
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Project { input } => cmd_project(input, cli.out.as_deref()),
        Command::Bounds {
            n,
            k,
            horizon,
            c,
            m_min,
            m_max,
            svg,
        } => cmd_bounds(*n, *k, *horizon, *c, *m_min, *m_max, cli.out.as_deref(), svg.as_deref()),
        Command::Simulate { config } => cmd_simulate(config, cli),
        Command::Equivalence {
            n,
            horizon,
            cases,
            alpha,
            theta,
        } => {
            let fixed = alpha.zip(*theta);
            cmd_equivalence(cli.seed.unwrap_or(1), *n, *horizon, *cases, fixed, cli)
        }
    }
}

/// Writes to `path`, or to stdout when there is none.
fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectInput {
    w: Vec<f64>,
    beta: Vec<f64>,
}

#[derive(Serialize)]
struct ProjectOutput {
    p: Vec<f64>,
    bound_set: Vec<usize>,
    lambda: f64,
    threshold: Option<f64>,
}

fn cmd_project(input: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let mut text = String::new();
    if input == Path::new("-") {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    }
    let parsed: ProjectInput = serde_json::from_str(&text).map_err(|e| Invalid(format!("input: {e}")))?;
    let w = InteriorSimplexVector::new(parsed.w)?;
    let beta = LowerBounds::new(parsed.beta)?;
    let r = project(&w, &beta)?;
    let output = ProjectOutput {
        p: r.p.into_vec(),
        bound_set: r.bound_set,
        lambda: r.lambda,
        threshold: r.threshold.is_finite().then_some(r.threshold),
    };
    emit(out, &to_json_string(&output)?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bounds(
    n: usize,
    k: usize,
    horizon: usize,
    c: f64,
    m_min: usize,
    m_max: usize,
    out: Option<&Path>,
    svg_path: Option<&Path>,
) -> anyhow::Result<()> {
    if m_min > m_max {
        bail!(Invalid(format!("m-min {m_min} exceeds m-max {m_max}")));
    }
    let rows = figure1_table(n, k, horizon, c, m_min..=m_max)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["m", "fixed_share", "mpp_decay", "mpp_uniform", "specialists", "pods"])?;
    for r in &rows {
        let mut rec = vec![r.m.to_string()];
        rec.extend(
            [r.fixed_share, r.mpp_decay, r.mpp_uniform, r.specialists, r.pods]
                .iter()
                .map(|&x| fmt_sig(x, CSV_DIGITS)),
        );
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    emit(out, &String::from_utf8(bytes)?)?;

    if let Some(path) = svg_path {
        let column = |name, f: fn(&switchtrack::bounds::Figure1Row) -> f64| svg::Series {
            name,
            points: rows.iter().map(|r| (r.m as f64, f(r))).collect(),
        };
        let chart = svg::line_chart(
            "m (pool size)",
            "regret bound",
            &[
                column("fixed_share", |r| r.fixed_share),
                column("mpp_decay", |r| r.mpp_decay),
                column("mpp_uniform", |r| r.mpp_uniform),
                column("specialists", |r| r.specialists),
                column("pods", |r| r.pods),
            ],
        );
        fs::write(path, chart).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn replayed_inputs(cfg: &RunConfig, csv_path: &Path) -> anyhow::Result<(Trials, ComparatorSequence)> {
    if cfg.loss != LossModel::Mix {
        bail!(Invalid("replayed loss matrices carry no predictions; use \"loss\": \"mix\"".into()));
    }
    let file = File::open(csv_path).with_context(|| format!("opening {}", csv_path.display()))?;
    let trials = Trials::from_losses(read_loss_csv(file)?)?;
    let ids = cfg
        .comparator
        .clone()
        .ok_or_else(|| Invalid("\"losses_csv\" needs a \"comparator\" sequence".into()))?;
    if ids.len() != trials.horizon() {
        bail!(Invalid(format!(
            "comparator has {} entries but the loss matrix has {} rows",
            ids.len(),
            trials.horizon()
        )));
    }
    let comparator = ComparatorSequence::from_ids(ids, trials.experts())?;
    Ok((trials, comparator))
}

fn cmd_simulate(config: &Path, cli: &Cli) -> anyhow::Result<()> {
    let cfg = RunConfig::load(config)?;
    let seeds = cfg.seeds(cli.seed);
    let mut runs: Vec<(u64, ExperimentResult)> = Vec::new();

    if let Some(csv_path) = &cfg.losses_csv {
        let (trials, comparator) = replayed_inputs(&cfg, csv_path)?;
        let inp = BoundInputs::new(
            trials.experts(),
            trials.horizon().max(2),
            comparator.switches(),
            comparator.pool_size(),
            cfg.loss.c(),
        )?;
        let spec = cfg.learner(&inp)?;
        runs.push((seeds[0], harness::run_experiment(&spec, &trials, &comparator, cfg.loss)?));
    } else {
        let n = RunConfig::field(cfg.n, "n")?;
        let horizon = RunConfig::field(cfg.horizon, "T")?;
        let k = RunConfig::field(cfg.k, "k")?;
        let m = RunConfig::field(cfg.m, "m")?;
        check_feasible(n, horizon, k, m)?;
        if !(0.0..0.5).contains(&cfg.noise) {
            bail!(Invalid(format!("noise {} must lie in [0, 0.5)", cfg.noise)));
        }
        let base = SyntheticSetup {
            n,
            horizon,
            k,
            m,
            loss: cfg.loss,
            noise: cfg.noise,
            seed: 0,
        };
        let spec = cfg.learner(&base.bound_inputs()?)?;
        let cells: Vec<_> = seeds
            .iter()
            .map(|&seed| (spec, SyntheticSetup { seed, ..base }))
            .collect();
        for (&seed, result) in seeds.iter().zip(harness::run_cells(&cells)) {
            runs.push((seed, result?));
        }
    }

    let out_dir = cli.out.clone().or(cfg.out.clone());
    if let Some(dir) = &out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut summaries = Vec::new();
        for (seed, r) in &runs {
            let name = if runs.len() == 1 {
                "trials.csv".to_string()
            } else {
                format!("trials_seed{seed}.csv")
            };
            let file = File::create(dir.join(&name))?;
            write_result_csv(BufWriter::new(file), r)?;
            summaries.push(summary_json(r, &RngInfo::new(*seed), cli.full)?);
        }
        let doc = if summaries.len() == 1 {
            summaries.remove(0)
        } else {
            json!({ "runs": summaries })
        };
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
    }

    let mut breaches = 0;
    for (seed, r) in &runs {
        let line = format!(
            "regret={} bound={} ok={}",
            fmt_sig(r.cumulative_regret, CSV_DIGITS),
            fmt_sig(r.bound_value, CSV_DIGITS),
            r.within_bound()
        );
        if runs.len() == 1 {
            println!("{line}");
        } else {
            println!("seed={seed} {line}");
        }
        if !r.within_bound() {
            breaches += 1;
        }
    }
    // Bounds are only promised under optimal tuning.
    if breaches > 0 && cfg.tuning == Tuning::Optimal {
        bail!(Breach(format!("regret exceeded the {} bound on {breaches} run(s)", runs[0].1.bound_name)));
    }
    Ok(())
}

fn cmd_equivalence(
    seed: u64,
    n: usize,
    horizon: usize,
    cases: usize,
    fixed: Option<(f64, f64)>,
    cli: &Cli,
) -> anyhow::Result<()> {
    let mut report = harness::run_equivalence(n, horizon, cases, seed, fixed)?;
    let passed = report.passed;
    let summary = format!(
        "share_vs_mpp={} specialists={} passed={passed}",
        fmt_sig(report.max_share_vs_mpp, CSV_DIGITS),
        fmt_sig(report.max_specialists, CSV_DIGITS)
    );
    if !cli.full {
        report.cases.clear();
    }
    emit(cli.out.as_deref(), &to_json_string(&report)?)?;
    if cli.out.is_some() {
        println!("{summary}");
    }
    if !passed {
        bail!(Breach(format!("equivalence deviation above {}: {summary}", report.tolerance)));
    }
    Ok(())
}
