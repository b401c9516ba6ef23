//! `comove`: simulate the reference scenarios, run the organization
//! detectors over trajectory files, and reproduce the full comparison
//! figure set.

mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use comove::clustering::{DbscanParams, SilhouetteSpace};
use comove::pipeline::{self, MetricSeries, Method};
use comove::reproduce::{
    self, run_name, DEFAULT_BINS, DEFAULT_SMOOTH_SPAN, DEFAULT_TAU, WINDOW_LENGTHS,
};
use comove::sim::{self, Scenario, ScenarioConfig};
use comove::trajectory::{load_trajectory, save_trajectory_with_meta, RunMeta};
use plot::Curve;

const ORGANIZED_COLORS: [&str; 2] = ["#1f77b4", "#6baed6"];
const DISORGANIZED_COLORS: [&str; 2] = ["#d62728", "#fb9a99"];

#[derive(Parser)]
#[command(
    name = "comove",
    about = "Detect organized co-movement in multi-agent trajectories",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trajectory, metadata and event log
    Simulate(SimulateArgs),
    /// Score a stored trajectory with the windowed detectors
    Detect(DetectArgs),
    /// Summarize separation between two detect outputs
    Compare(CompareArgs),
    /// Simulate and score all eight standard runs, with plots and summary
    Reproduce(ReproduceArgs),
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    Scenario::parse(s).ok_or_else(|| {
        format!("unknown scenario '{s}' (expected ants, wolf_sheep, flocking, or ants_adaptation)")
    })
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario name; required unless the config file sets one
    #[arg(long, value_parser = parse_scenario)]
    scenario: Option<Scenario>,
    /// Enable the communication/leadership rules
    #[arg(long, conflicts_with = "disorganized")]
    organized: bool,
    /// Disable them (the default, explicit for config overrides)
    #[arg(long)]
    disorganized: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "comove_out")]
    out: PathBuf,
    /// Flat key=value config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value overrides, applied last
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Silhouette,
    Entropy,
    EntropyLiteral,
    Baseline,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EntropyVariantArg {
    /// Mean per-node degree entropy of the thresholded graph
    Eq9,
    /// Log of the raw dissimilarity sum
    Literal,
}

#[derive(Args)]
struct DetectArgs {
    /// Trajectory CSV (with its companion .meta file)
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "comove_out")]
    out: PathBuf,
    /// Flat key=value config file for detector parameters; flags override
    #[arg(long)]
    config: Option<PathBuf>,
    /// Methods to run (default: all)
    #[arg(long)]
    method: Vec<MethodArg>,
    /// Window lengths (default: 25 and 50)
    #[arg(long)]
    window: Vec<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    min_pts: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    smooth_span: Option<usize>,
    /// Which entropy formula the `entropy` method reports
    #[arg(long, value_enum)]
    entropy_variant: Option<EntropyVariantArg>,
    /// Distances scored by the silhouette
    #[arg(long)]
    silhouette_space: Option<String>,
    /// Also write one SVG chart per method and window
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Metrics CSV of the organized run
    #[arg(long)]
    organized: PathBuf,
    /// Metrics CSV of the disorganized run
    #[arg(long)]
    disorganized: PathBuf,
    /// Output CSV file
    #[arg(long, default_value = "compare.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, default_value = "comove_out")]
    out: PathBuf,
    /// Base seed shared by all eight runs
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

fn run(cli: Cli) -> Result<()> {
    if let Ok(v) = std::env::var("COMOVE_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| anyhow!("COMOVE_THREADS must be a positive integer, got '{v}'"))?;
        // ignore the error when a pool already exists (tests call run twice)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Detect(args) => cmd_detect(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let mut config = match (&args.config, args.scenario) {
        (Some(path), _) => ScenarioConfig::from_file(path)?,
        (None, Some(scenario)) => ScenarioConfig::new(scenario, args.organized, 0),
        (None, None) => bail!("either --scenario or --config is required"),
    };
    if let Some(scenario) = args.scenario {
        if args.config.is_some() && scenario != config.scenario {
            config = ScenarioConfig::new(scenario, config.organized, config.seed);
        }
    }
    if args.organized {
        config.organized = true;
    }
    if args.disorganized {
        config.organized = false;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    for kv in &args.set {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects key=value, got '{kv}'"))?;
        config.apply_kv(key.trim(), value.trim())?;
    }
    config.validate()?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let run = sim::run(&config)?;
    let name = run_name(config.scenario, config.organized);
    let traj_path = args.out.join(format!("{name}.csv"));
    save_trajectory_with_meta(
        &run.trajectory,
        &RunMeta {
            scenario: config.scenario.to_string(),
            organized: config.organized,
            seed: config.seed,
        },
        &traj_path,
    )?;
    let events_path = args.out.join(format!("{name}_events.csv"));
    comove::trajectory::write_atomic(&events_path, run.events_csv().as_bytes())?;
    println!("wrote {}", traj_path.display());
    println!("wrote {}", traj_path.with_extension("meta").display());
    println!("wrote {}", events_path.display());
    Ok(())
}

/// Detector settings after merging defaults, config file and flags.
struct DetectSettings {
    methods: Vec<MethodArg>,
    windows: Vec<usize>,
    db: DbscanParams,
    tau: f64,
    bins: usize,
    smooth_span: usize,
    entropy_variant: EntropyVariantArg,
    space: SilhouetteSpace,
}

fn detect_settings(args: &DetectArgs) -> Result<DetectSettings> {
    let mut file: std::collections::HashMap<String, String> = Default::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), i + 1))?;
            file.insert(key.trim().to_string(), value.trim().to_string());
        }
    }
    fn merged<T: std::str::FromStr>(
        flag: Option<T>,
        file: &std::collections::HashMap<String, String>,
        key: &str,
        default: T,
    ) -> Result<T> {
        match (flag, file.get(key)) {
            (Some(v), _) => Ok(v),
            (None, Some(raw)) => raw
                .parse()
                .map_err(|_| anyhow!("invalid config value for {key}: {raw}")),
            (None, None) => Ok(default),
        }
    }

    let eps = merged(args.eps, &file, "eps", DbscanParams::default().eps)?;
    let min_pts = merged(args.min_pts, &file, "min_pts", DbscanParams::default().min_pts)?;
    let windows = if !args.window.is_empty() {
        args.window.clone()
    } else if let Some(raw) = file.get("window") {
        raw.split(',')
            .map(|w| w.trim().parse().map_err(|_| anyhow!("invalid window: {w}")))
            .collect::<Result<_>>()?
    } else {
        WINDOW_LENGTHS.to_vec()
    };
    let methods = if !args.method.is_empty() {
        args.method.clone()
    } else {
        vec![
            MethodArg::Silhouette,
            MethodArg::Entropy,
            MethodArg::EntropyLiteral,
            MethodArg::Baseline,
        ]
    };
    let entropy_variant = args.entropy_variant.unwrap_or(match file.get("entropy_variant") {
        Some(raw) => match raw.as_str() {
            "eq9" => EntropyVariantArg::Eq9,
            "literal" => EntropyVariantArg::Literal,
            other => bail!("invalid entropy_variant: {other} (expected eq9 or literal)"),
        },
        None => EntropyVariantArg::Eq9,
    });
    let space_name = args
        .silhouette_space
        .clone()
        .or_else(|| file.get("silhouette_space").cloned())
        .unwrap_or_else(|| "features".to_string());
    let space = SilhouetteSpace::parse(&space_name)
        .ok_or_else(|| anyhow!("invalid silhouette space '{space_name}' (expected features or msim)"))?;

    Ok(DetectSettings {
        methods,
        windows,
        db: DbscanParams::new(eps, min_pts)?,
        tau: merged(args.tau, &file, "tau", DEFAULT_TAU)?,
        bins: merged(args.bins, &file, "bins", DEFAULT_BINS)?,
        smooth_span: merged(args.smooth_span, &file, "smooth_span", DEFAULT_SMOOTH_SPAN)?,
        entropy_variant,
        space,
    })
}

fn cmd_detect(args: DetectArgs) -> Result<()> {
    let settings = detect_settings(&args)?;
    let tensor = load_trajectory(&args.input)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let wants_windowed = settings.methods.iter().any(|m| {
        matches!(m, MethodArg::Silhouette | MethodArg::Entropy | MethodArg::EntropyLiteral)
    });
    let entropy_method = match settings.entropy_variant {
        EntropyVariantArg::Eq9 => Method::GraphEntropy,
        EntropyVariantArg::Literal => Method::GraphEntropyLiteral,
    };

    let mut selected: Vec<MetricSeries> = Vec::new();
    let mut deltas: Vec<MetricSeries> = Vec::new();
    for &window in &settings.windows {
        let windowed = if wants_windowed {
            pipeline::run_detectors(&tensor, window, &settings.db, settings.tau, settings.space)?
        } else {
            Vec::new()
        };
        let pick = |method: Method| windowed.iter().find(|s| s.method == method).unwrap().clone();
        for m in &settings.methods {
            let mut series = match m {
                MethodArg::Silhouette => vec![pick(Method::Silhouette)],
                MethodArg::Entropy => vec![pick(entropy_method)],
                MethodArg::EntropyLiteral => vec![pick(Method::GraphEntropyLiteral)],
                MethodArg::Baseline => {
                    let (bx, by) =
                        pipeline::run_baseline_pipeline(&tensor, window, settings.bins)?;
                    vec![bx, by]
                }
            };
            // the entropy variants coincide when both are requested
            series.retain(|s| {
                !selected
                    .iter()
                    .any(|t| t.method == s.method && t.window_length == s.window_length)
            });
            for s in series {
                let smoothed = pipeline::smooth(&s, settings.smooth_span)?;
                if matches!(m, MethodArg::Baseline) {
                    deltas.push(pipeline::first_difference(&smoothed));
                }
                selected.push(smoothed);
            }
        }
    }

    let stem = args
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("run");
    let metrics_path = args.out.join(format!("{stem}_metrics.csv"));
    pipeline::write_metrics_csv(&metrics_path, &selected)?;
    println!("wrote {}", metrics_path.display());
    if !deltas.is_empty() {
        // step-to-step change of the smoothed baseline, the quantity the
        // derivative-style baseline thresholds
        let delta_path = args.out.join(format!("{stem}_baseline_delta.csv"));
        pipeline::write_metrics_csv(&delta_path, &deltas)?;
        println!("wrote {}", delta_path.display());
    }

    if args.plot {
        for s in &selected {
            let path = args
                .out
                .join(format!("{stem}_{}_w{}.svg", s.method, s.window_length));
            let svg = plot::line_chart(
                &format!("{stem}: {} (window {})", s.method, s.window_length),
                &[
                    Curve {
                        label: "raw",
                        color: DISORGANIZED_COLORS[1],
                        values: &s.values,
                    },
                    Curve {
                        label: "smoothed",
                        color: ORGANIZED_COLORS[0],
                        values: &s.smoothed,
                    },
                ],
            );
            comove::trajectory::write_atomic(&path, svg.as_bytes())?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let organized = pipeline::read_metrics_csv(&args.organized)?;
    let disorganized = pipeline::read_metrics_csv(&args.disorganized)?;
    let mut out = String::from(
        "method,window_length,organized_mean,disorganized_mean,separation\n",
    );
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
    let mut rows = 0;
    for o in &organized {
        let Some(d) = disorganized
            .iter()
            .find(|d| d.method == o.method && d.window_length == o.window_length)
        else {
            continue;
        };
        let sep = match (o.mean(), d.mean()) {
            (Some(om), Some(dm)) => Some(om - dm),
            _ => None,
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            o.method,
            o.window_length,
            fmt(o.mean()),
            fmt(d.mean()),
            fmt(sep)
        ));
        rows += 1;
    }
    if rows == 0 {
        bail!("no shared method/window series between the two inputs");
    }
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    comove::trajectory::write_atomic(&args.out, out.as_bytes())?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<()> {
    let report = reproduce::reproduce(&args.out, args.seed)?;

    // one chart per scenario x detector x window, both modes overlaid
    for scenario in Scenario::ALL {
        let read = |organized: bool| {
            pipeline::read_metrics_csv(
                &args
                    .out
                    .join(format!("{}_metrics.csv", run_name(scenario, organized))),
            )
        };
        let org = read(true)?;
        let dis = read(false)?;
        for window in WINDOW_LENGTHS {
            for (label, methods) in [
                ("silhouette", vec![Method::Silhouette]),
                ("graph_entropy", vec![Method::GraphEntropy]),
                ("baseline", vec![Method::BaselineX, Method::BaselineY]),
            ] {
                let mut curves = Vec::new();
                for (mode, source, colors) in [
                    ("organized", &org, ORGANIZED_COLORS),
                    ("disorganized", &dis, DISORGANIZED_COLORS),
                ] {
                    for (mi, &method) in methods.iter().enumerate() {
                        let series = source
                            .iter()
                            .find(|s| s.method == method && s.window_length == window)
                            .ok_or_else(|| {
                                anyhow!("{scenario} metrics missing {method} at window {window}")
                            })?;
                        curves.push((format!("{mode} {method}"), colors[mi], &series.smoothed));
                    }
                }
                let curves: Vec<Curve> = curves
                    .iter()
                    .map(|(label, color, values)| Curve {
                        label,
                        color,
                        values,
                    })
                    .collect();
                let path = args.out.join(format!("{scenario}_{label}_w{window}.svg"));
                let svg = plot::line_chart(
                    &format!("{scenario}: {label} (window {window})"),
                    &curves,
                );
                comove::trajectory::write_atomic(&path, svg.as_bytes())?;
            }
        }
    }

    println!("wrote {} metrics files and plots to {}", report.metrics_files.len(), args.out.display());
    println!("separation summary (organized mean - disorganized mean):");
    for row in report
        .rows
        .iter()
        .filter(|r| r.window_length == 50 && r.method != Method::BaselineY)
    {
        println!(
            "  {:16} {:22} {}",
            row.scenario.to_string(),
            row.method.to_string(),
            row.separation()
                .map(|s| format!("{s:+.4}"))
                .unwrap_or_else(|| "undefined".to_string())
        );
    }
    println!("full table: {}", args.out.join("summary.csv").display());
    Ok(())
}
