//! `bp`: simulation and analytic-bound laboratory for two-neighbour
//! bootstrap percolation.

mod output;
mod render;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bootperc_core::analytic::{
    closed_form_bounds, lambda_quadrature, make_scale_params, union_lower_bound,
    AnalyticContext, ScaleOverrides, CLASSICAL_LAMBDA, DEFAULT_C, LAMBDA,
};
use bootperc_core::dynamics::{infection_times, internally_filled, ModelKind};
use bootperc_core::events::{
    enumerate_good_schedules, event_holds, reconstruct_schedule, witness_configuration,
    EventSpec, FamilySpec, GrowthSchedule, Placement,
};
use bootperc_core::lattice::{Configuration, Rect, SampleSpec};
use bootperc_core::montecarlo::{estimate_event, estimate_tau, Predicate, TauSummary};
use bootperc_core::oracle::{
    count_schedules_exhaustive, exact_probability, schedule_count_product_bound,
};
use bootperc_core::verify;

use output::{csv_f64, csv_line, emit, to_json, version, Envelope, OutputFormat};
use render::{render_svg, ColorBy};

#[derive(Parser)]
#[command(
    name = "bp",
    version,
    about = "Two-neighbour bootstrap percolation: simulation, growth events, analytic bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the filling probability P(I(L)), with exact enumeration and
    /// the union lower bound where applicable
    Fill(FillArgs),
    /// Sample the origin's infection time on a centered box
    Tau(TauArgs),
    /// Union lower bound and closed forms across a probability grid
    Bound(BoundArgs),
    /// Quadrature of the diagonal-growth constant
    Lambda(LambdaArgs),
    /// Growth-event membership, witnesses, reconstruction and counting
    Events {
        #[command(subcommand)]
        command: EventsCommand,
    },
    /// Run invariant suites; nonzero exit on any violation
    Verify(VerifyArgs),
    /// Render a sampled configuration as SVG
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModelArg {
    Modified,
    Classical,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> ModelKind {
        match m {
            ModelArg::Modified => ModelKind::Modified,
            ModelArg::Classical => ModelKind::Classical,
        }
    }
}

/// Marker for bad flag values: exit code 2 instead of 1.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<E: fmt::Display>(e: E) -> anyhow::Error {
    anyhow!(Usage(e.to_string()))
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(0) => Err(usage("--workers must be at least 1")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .context("building worker pool")?
            .install(f),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Fill(args) => cmd_fill(args),
        Command::Tau(args) => cmd_tau(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Lambda(args) => cmd_lambda(args),
        Command::Events { command } => cmd_events(command),
        Command::Verify(args) => cmd_verify(args),
        Command::Render(args) => cmd_render(args),
    }
}

// ---------------------------------------------------------------- fill

#[derive(Args, Serialize)]
struct FillArgs {
    /// Infection probability
    #[arg(long)]
    p: f64,
    /// Side L of the target square: the event is I(L)
    #[arg(long)]
    size: u32,
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModelArg::Modified)]
    model: ModelArg,
    /// Confidence level of the Wilson interval
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// Run the exact enumeration when L^2 is at most this many cells
    #[arg(long, default_value_t = 28)]
    exact_cap: u32,
    /// Desk-scale levels for the union lower bound, e.g. --levels 2,4
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    /// Sideways pairs per scale for the union bound (default 1)
    #[arg(long)]
    m: Option<u32>,
    /// Schedule enumeration cap
    #[arg(long, default_value_t = 2_000_000)]
    cap: u64,
    #[serde(skip)]
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    out: OutputFormat,
    #[serde(skip)]
    #[arg(long)]
    output: Option<PathBuf>,
    #[serde(skip)]
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Serialize)]
struct PaperDefaults {
    n_scales: u32,
    m_raw: f64,
    m_effective: u32,
    levels: Vec<u32>,
}

fn paper_defaults(p: f64) -> Option<PaperDefaults> {
    make_scale_params(p, &ScaleOverrides::default())
        .ok()
        .map(|sp| PaperDefaults {
            n_scales: sp.n_scales,
            m_raw: sp.m_raw,
            m_effective: sp.m_effective,
            levels: sp.levels,
        })
}

#[derive(Serialize)]
struct FillResults {
    successes: u64,
    trials: u64,
    estimate: f64,
    estimate_log: f64,
    ci_low: f64,
    ci_high: f64,
    confidence: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_log: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    union_bound_log: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    union_bound_linear: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paper_defaults: Option<PaperDefaults>,
}

fn cmd_fill(args: FillArgs) -> Result<ExitCode> {
    if args.size == 0 {
        return Err(usage("--size must be at least 1"));
    }
    let model: ModelKind = args.model.into();
    let pred = Predicate::InternallyFilled {
        side: args.size,
        model,
    };

    let est = with_pool(args.workers, || {
        estimate_event(args.p, &pred, args.trials, args.seed, args.confidence).map_err(usage)
    })?;

    let exact = if args.size * args.size <= args.exact_cap.min(63) {
        Some(
            exact_probability(args.p, &pred, args.exact_cap)
                .map_err(usage)?
                .value,
        )
    } else {
        None
    };

    let union_bound = match &args.levels {
        Some(levels) => {
            let ctx = AnalyticContext::new(args.p).map_err(usage)?;
            let spec = FamilySpec::new(levels.clone(), args.m.unwrap_or(1), None, args.cap)
                .map_err(usage)?;
            let family = enumerate_good_schedules(&spec).map_err(usage)?;
            Some(
                union_lower_bound(&ctx, args.size, &family)
                    .map_err(usage)?
                    .total,
            )
        }
        None => None,
    };

    let results = FillResults {
        successes: est.successes,
        trials: est.trials,
        estimate: est.point,
        estimate_log: est.point.ln(),
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        confidence: est.confidence,
        exact,
        exact_log: exact.map(f64::ln),
        union_bound_log: union_bound.map(|b| b.value()),
        union_bound_linear: union_bound.map(|b| b.prob()),
        paper_defaults: args.levels.as_ref().and_then(|_| paper_defaults(args.p)),
    };

    let body = match args.out {
        OutputFormat::Json => {
            let seed = args.seed;
            to_json(&Envelope {
                command: "fill",
                params: &args,
                results,
                seed,
                version: version(),
            })?
        }
        OutputFormat::Csv => {
            let header = "p,size,trials,successes,estimate,ci_low,ci_high,exact,union_bound_log,seed";
            let row = csv_line(&[
                args.p.to_string(),
                args.size.to_string(),
                args.trials.to_string(),
                est.successes.to_string(),
                est.point.to_string(),
                est.ci_low.to_string(),
                est.ci_high.to_string(),
                csv_f64(results.exact),
                csv_f64(results.union_bound_log),
                args.seed.to_string(),
            ]);
            format!("{header}\n{row}\n")
        }
    };
    emit(&args.output, &body)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------- tau

#[derive(Args, Serialize)]
struct TauArgs {
    #[arg(long)]
    p: f64,
    /// Odd box side; the origin sits at the center
    #[arg(long)]
    box_side: u32,
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModelArg::Modified)]
    model: ModelArg,
    #[serde(skip)]
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    out: OutputFormat,
    #[serde(skip)]
    #[arg(long)]
    output: Option<PathBuf>,
    #[serde(skip)]
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Serialize)]
struct TauResults {
    summary: TauSummary,
    taus: Vec<Option<u32>>,
    /// p log(tau) per trial; null for stalled trials and for tau = 0.
    p_log_tau: Vec<Option<f64>>,
}

fn cmd_tau(args: TauArgs) -> Result<ExitCode> {
    let sample = with_pool(args.workers, || {
        estimate_tau(
            args.p,
            args.box_side,
            args.trials,
            args.seed,
            args.model.into(),
        )
        .map_err(usage)
    })?;
    let summary = sample.summary();

    let body = match args.out {
        OutputFormat::Json => {
            let p_log_tau = (0..sample.taus.len())
                .map(|i| sample.p_log_tau(i).filter(|v| v.is_finite()))
                .collect();
            let seed = args.seed;
            to_json(&Envelope {
                command: "tau",
                params: &args,
                results: TauResults {
                    summary,
                    taus: sample.taus.clone(),
                    p_log_tau,
                },
                seed,
                version: version(),
            })?
        }
        OutputFormat::Csv => {
            let mut lines = vec!["trial,tau,p_log_tau".to_string()];
            for (i, tau) in sample.taus.iter().enumerate() {
                lines.push(csv_line(&[
                    i.to_string(),
                    tau.map(|t| t.to_string()).unwrap_or_else(|| "never".into()),
                    csv_f64(sample.p_log_tau(i)),
                ]));
            }
            lines.push(String::new());
            lines.join("\n")
        }
    };
    emit(&args.output, &body)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------- bound

#[derive(Args, Serialize)]
struct BoundArgs {
    /// Single probability (alternative to --p-grid)
    #[arg(long, conflicts_with = "p_grid")]
    p: Option<f64>,
    /// Comma list "0.2,0.3" or range "start:end:step"
    #[arg(long)]
    p_grid: Option<String>,
    /// Bound target B; defaults to the top level
    #[arg(long)]
    b: Option<u32>,
    /// Second-order constant in the closed forms
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    /// Desk-scale level override, e.g. --levels 2,4,8
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    /// Sideways pairs per scale
    #[arg(long)]
    m: Option<u32>,
    /// Number of scales N when deriving levels from p
    #[arg(long = "N")]
    n_scales: Option<u32>,
    /// Schedule enumeration cap
    #[arg(long, default_value_t = 2_000_000)]
    cap: u64,
    #[serde(skip)]
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    out: OutputFormat,
    #[serde(skip)]
    #[arg(long)]
    output: Option<PathBuf>,
    #[serde(skip)]
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Serialize)]
struct BoundRow {
    p: f64,
    b: u32,
    union_bound_log: f64,
    union_bound_linear: f64,
    proposition_rhs_log: f64,
    proposition_rhs_linear: f64,
    theorem_rhs_log: f64,
    theorem_rhs: f64,
    n_scales: u32,
    m_effective: u32,
    m_raw: f64,
    m_was_rounded: bool,
    levels: Vec<u32>,
    schedules: u128,
}

fn parse_p_grid(args: &BoundArgs) -> Result<Vec<f64>> {
    if let Some(p) = args.p {
        return Ok(vec![p]);
    }
    let grid = args
        .p_grid
        .as_ref()
        .ok_or_else(|| usage("provide --p or --p-grid"))?;
    if let Some((start, rest)) = grid.split_once(':') {
        let (end, step) = rest
            .split_once(':')
            .ok_or_else(|| usage("range form is start:end:step"))?;
        let (start, end, step): (f64, f64, f64) = (
            start.parse().map_err(usage)?,
            end.parse().map_err(usage)?,
            step.parse().map_err(usage)?,
        );
        if step <= 0.0 || end < start {
            return Err(usage("need start <= end and step > 0"));
        }
        let mut out = Vec::new();
        let mut k = 0u32;
        loop {
            let p = start + step * k as f64;
            if p > end + 1e-12 {
                break;
            }
            out.push(p);
            k += 1;
        }
        Ok(out)
    } else {
        grid.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(usage))
            .collect()
    }
}

fn cmd_bound(args: BoundArgs) -> Result<ExitCode> {
    let ps = parse_p_grid(&args)?;
    let overrides = ScaleOverrides {
        n_scales: args.n_scales,
        m: args.m,
        levels: args.levels.clone(),
    };
    let overridden = args.n_scales.is_some() || args.m.is_some() || args.levels.is_some();

    let rows = with_pool(args.workers, || {
        let mut rows: Vec<BoundRow> = Vec::with_capacity(ps.len());
        for &p in &ps {
            let params = make_scale_params(p, &overrides).map_err(usage)?;
            if overridden {
                if let Some(defaults) = paper_defaults(p) {
                    eprintln!(
                        "p={p}: paper defaults N={} m_raw={:.4} m_effective={} levels={:?} \
                         (overridden to N={} m={} levels={:?})",
                        defaults.n_scales,
                        defaults.m_raw,
                        defaults.m_effective,
                        defaults.levels,
                        params.n_scales,
                        params.m_effective,
                        params.levels,
                    );
                }
            }
            let top = *params.levels.last().expect("levels nonempty");
            let b = args.b.unwrap_or(top);
            let ctx = AnalyticContext::new(p).map_err(usage)?;
            let family_spec = params.family_spec(args.cap).map_err(usage)?;
            let family = enumerate_good_schedules(&family_spec).map_err(usage)?;
            let bound = union_lower_bound(&ctx, b, &family).map_err(usage)?;
            let closed = closed_form_bounds(p, args.c, Some(b as u64)).map_err(usage)?;
            rows.push(BoundRow {
                p,
                b,
                union_bound_log: bound.total.value(),
                union_bound_linear: bound.total.prob(),
                proposition_rhs_log: closed.proposition_rhs_log,
                proposition_rhs_linear: closed.proposition_rhs_log.exp(),
                theorem_rhs_log: closed.theorem_rhs_log,
                theorem_rhs: closed.theorem_rhs,
                n_scales: params.n_scales,
                m_effective: params.m_effective,
                m_raw: params.m_raw,
                m_was_rounded: params.m_was_rounded,
                levels: params.levels.clone(),
                schedules: family.count(),
            });
        }
        Ok(rows)
    })?;

    let body = match args.out {
        OutputFormat::Json => {
            let seed = 0;
            to_json(&Envelope {
                command: "bound",
                params: &args,
                results: rows,
                seed,
                version: version(),
            })?
        }
        OutputFormat::Csv => {
            let mut lines =
                vec!["p,B,union_bound_log,proposition_rhs_log,theorem_rhs_log,N,m_effective"
                    .to_string()];
            for r in &rows {
                lines.push(csv_line(&[
                    r.p.to_string(),
                    r.b.to_string(),
                    r.union_bound_log.to_string(),
                    r.proposition_rhs_log.to_string(),
                    r.theorem_rhs_log.to_string(),
                    r.n_scales.to_string(),
                    r.m_effective.to_string(),
                ]));
            }
            lines.push(String::new());
            lines.join("\n")
        }
    };
    emit(&args.output, &body)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------- lambda

#[derive(Args, Serialize)]
struct LambdaArgs {
    /// Absolute tolerance of the quadrature
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[serde(skip)]
    #[arg(long, value_enum)]
    out: Option<OutputFormat>,
    #[serde(skip)]
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct LambdaResults {
    lambda: f64,
    target: f64,
    abs_error: f64,
    /// pi^2/18, the classical-model constant, for comparison only.
    classical_lambda: f64,
}

fn cmd_lambda(args: LambdaArgs) -> Result<ExitCode> {
    let lambda = lambda_quadrature(args.tol).map_err(usage)?;
    let results = LambdaResults {
        lambda,
        target: LAMBDA,
        abs_error: (lambda - LAMBDA).abs(),
        classical_lambda: CLASSICAL_LAMBDA,
    };
    let body = match args.out {
        Some(OutputFormat::Json) => to_json(&Envelope {
            command: "lambda",
            params: &args,
            results,
            seed: 0,
            version: version(),
        })?,
        Some(OutputFormat::Csv) => format!(
            "lambda,target,abs_error\n{},{},{}\n",
            results.lambda, results.target, results.abs_error
        ),
        None => format!(
            "lambda = {:.12}\n|lambda - pi^2/6| = {:.3e}\n",
            results.lambda, results.abs_error
        ),
    };
    emit(&args.output, &body)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------- events

#[derive(Subcommand)]
enum EventsCommand {
    /// Count good schedules: enumerator, exhaustive backtracker and the
    /// binomial product bound
    Count(EventsCountArgs),
    /// Build the canonical or seeded witness of a schedule
    Witness(EventsWitnessArgs),
    /// Round-trip a schedule through its witness and the reconstruction
    /// formulas
    Reconstruct(EventsWitnessArgs),
    /// Test whether a sampled configuration realises a schedule's event
    Check(EventsCheckArgs),
}

#[derive(Args, Serialize)]
struct EventsCountArgs {
    /// Scale levels, e.g. --levels 2,4,8
    #[arg(long, value_delimiter = ',', required = true)]
    levels: Vec<u32>,
    /// Sideways pairs per scale
    #[arg(long)]
    m: u32,
    /// Width caps per scale (default 2^n)
    #[arg(long, value_delimiter = ',')]
    widths: Option<Vec<u32>>,
    #[arg(long, default_value_t = 2_000_000)]
    cap: u64,
    #[serde(skip)]
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    out: OutputFormat,
    #[serde(skip)]
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct EventsWitnessArgs {
    /// Interleaved schedule a1,b1,a2,...,bm,a_{m+1}
    #[arg(long, value_delimiter = ',', required = true)]
    schedule: Vec<u32>,
    /// Seed for random per-rectangle placement; canonical when absent
    #[arg(long)]
    placement_seed: Option<u64>,
    #[serde(skip)]
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    out: OutputFormat,
    #[serde(skip)]
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct EventsCheckArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    schedule: Vec<u32>,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 42)]
    sample_seed: u64,
    #[serde(skip)]
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    out: OutputFormat,
    #[serde(skip)]
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_schedule(points: &[u32]) -> Result<GrowthSchedule> {
    GrowthSchedule::from_points(points).map_err(usage)
}

fn placement(seed: Option<u64>) -> Placement {
    seed.map_or(Placement::Canonical, Placement::Seeded)
}

fn cmd_events(command: EventsCommand) -> Result<ExitCode> {
    match command {
        EventsCommand::Count(args) => {
            let spec = FamilySpec::new(
                args.levels.clone(),
                args.m,
                args.widths.clone(),
                args.cap,
            )
            .map_err(usage)?;
            let family = enumerate_good_schedules(&spec).map_err(usage)?;
            let exhaustive = count_schedules_exhaustive(&spec).map_err(usage)?;
            let bound = if args.m >= 1 {
                schedule_count_product_bound(&args.levels, args.m, &spec.width_caps)
            } else {
                1
            };
            #[derive(Serialize)]
            struct CountResults {
                count: u128,
                exhaustive_count: u128,
                product_bound: u128,
                per_scale: Vec<u128>,
            }
            let results = CountResults {
                count: family.count(),
                exhaustive_count: exhaustive,
                product_bound: bound,
                per_scale: (0..spec.n_scales()).map(|n| family.scale_count(n)).collect(),
            };
            let body = match args.out {
                OutputFormat::Json => to_json(&Envelope {
                    command: "events count",
                    params: &args,
                    results,
                    seed: 0,
                    version: version(),
                })?,
                OutputFormat::Csv => format!(
                    "count,exhaustive_count,product_bound\n{},{},{}\n",
                    results.count, results.exhaustive_count, results.product_bound
                ),
            };
            emit(&args.output, &body)?;
            Ok(ExitCode::SUCCESS)
        }
        EventsCommand::Witness(args) => {
            let schedule = parse_schedule(&args.schedule)?;
            let witness = witness_configuration(&schedule, placement(args.placement_seed));
            let holds = event_holds(&witness, &EventSpec::Alternating(schedule.clone()))
                .expect("witness box covers its schedule");
            let square = Rect::unit_square(schedule.end());
            let filled = internally_filled(&witness, &square, ModelKind::Modified)
                .expect("square inside witness box");
            #[derive(Serialize)]
            struct WitnessResults {
                schedule: String,
                sites: Vec<(i32, i32)>,
                event_holds: bool,
                internally_filled: bool,
            }
            let results = WitnessResults {
                schedule: schedule.to_string(),
                sites: witness.iter_infected().map(|s| (s.x, s.y)).collect(),
                event_holds: holds,
                internally_filled: filled,
            };
            let seed = args.placement_seed.unwrap_or(0);
            let body = match args.out {
                OutputFormat::Json => to_json(&Envelope {
                    command: "events witness",
                    params: &args,
                    results,
                    seed,
                    version: version(),
                })?,
                OutputFormat::Csv => {
                    let mut lines = vec!["x,y".to_string()];
                    lines.extend(results.sites.iter().map(|(x, y)| format!("{x},{y}")));
                    lines.push(String::new());
                    lines.join("\n")
                }
            };
            emit(&args.output, &body)?;
            Ok(ExitCode::SUCCESS)
        }
        EventsCommand::Reconstruct(args) => {
            let schedule = parse_schedule(&args.schedule)?;
            let witness = witness_configuration(&schedule, placement(args.placement_seed));
            let recovered = reconstruct_schedule(&witness, schedule.start(), schedule.end());
            #[derive(Serialize)]
            struct ReconstructResults {
                schedule: String,
                reconstructed: Option<String>,
                matches: bool,
            }
            let results = ReconstructResults {
                schedule: schedule.to_string(),
                matches: recovered.as_ref() == Some(&schedule),
                reconstructed: recovered.map(|s| s.to_string()),
            };
            let ok = results.matches;
            let seed = args.placement_seed.unwrap_or(0);
            let body = to_json(&Envelope {
                command: "events reconstruct",
                params: &args,
                results,
                seed,
                version: version(),
            })?;
            emit(&args.output, &body)?;
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        EventsCommand::Check(args) => {
            let schedule = parse_schedule(&args.schedule)?;
            let region = Rect::unit_square(schedule.end());
            let spec = SampleSpec::new(args.p, args.sample_seed, region).map_err(usage)?;
            let config = Configuration::sample(&spec);
            let holds = event_holds(&config, &EventSpec::Alternating(schedule.clone()))
                .expect("region covers the schedule");
            #[derive(Serialize)]
            struct CheckResults {
                schedule: String,
                holds: bool,
                infected: usize,
            }
            let results = CheckResults {
                schedule: schedule.to_string(),
                holds,
                infected: config.infected_count(),
            };
            let seed = args.sample_seed;
            let body = to_json(&Envelope {
                command: "events check",
                params: &args,
                results,
                seed,
                version: version(),
            })?;
            emit(&args.output, &body)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

// ---------------------------------------------------------------- verify

#[derive(Args)]
struct VerifyArgs {
    /// Suite name or "all"
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let reports = if args.suite == "all" {
        verify::run_all(args.seed)
    } else {
        vec![verify::run_suite(&args.suite, args.seed).map_err(usage)?]
    };
    let mut failed = false;
    for report in &reports {
        if report.passed() {
            println!("suite {}: ok ({} checks)", report.name, report.checks);
        } else {
            println!(
                "suite {}: FAILED ({} of {} checks)",
                report.name,
                report.failures.len(),
                report.checks
            );
            if !failed {
                println!("first violation: {}", report.failures[0]);
                println!("reproduce: {}", report.repro_command());
            }
            failed = true;
        }
    }
    Ok(if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

// ---------------------------------------------------------------- render

#[derive(Args, Serialize)]
struct RenderArgs {
    #[arg(long)]
    p: f64,
    /// Box: either a side L (square R(1,1;L,L)) or x1,y1,x2,y2
    #[arg(long, value_name = "L|x1,y1,x2,y2")]
    r#box: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModelArg::Modified)]
    model: ModelArg,
    #[arg(long, value_enum, default_value_t = ColorBy::Time)]
    color_by: ColorBy,
    #[arg(long, default_value_t = 8)]
    cell_px: u32,
    #[serde(skip)]
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_box(spec: &str) -> Result<Rect> {
    let parts: Vec<i32> = spec
        .split(',')
        .map(|s| s.trim().parse::<i32>().map_err(usage))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [side] if *side >= 1 => Ok(Rect::unit_square(*side as u32)),
        [x1, y1, x2, y2] => Rect::new(*x1, *y1, *x2, *y2).map_err(usage),
        _ => Err(usage("--box takes L or x1,y1,x2,y2")),
    }
}

fn cmd_render(args: RenderArgs) -> Result<ExitCode> {
    let region = parse_box(&args.r#box)?;
    if region.cells() > 4_000_000 {
        return Err(usage("box too large to render; keep it under 4M cells"));
    }
    let spec = SampleSpec::new(args.p, args.seed, region).map_err(usage)?;
    let config = Configuration::sample(&spec);
    let times = infection_times(&config, args.model.into());
    let svg = render_svg(&config, &times, args.color_by, args.cell_px);
    emit(&args.output, &svg)?;
    Ok(ExitCode::SUCCESS)
}
