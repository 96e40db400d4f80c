mod output;

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dicore::digraph::{read_edge_list, write_edge_list};
use dicore::experiment::{compare, m_from_c, run_mc, Execution, McConfig, LEADING_NAMES};
use dicore::ode::write_trajectory_csv;
use dicore::threshold::round3;
use dicore::{
    compute_cstar, fixed_point, integrate, peel_core, predict_core, sample_digraph, sample_sequence_model,
    CoreParams, CorePrediction, FixedPointOutcome, OdeOptions,
};
use serde::Serialize;

use output::{num, Format, OutputArgs, Sink};

const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "dicore", version, about = "Thresholds and simulations for (k1,k2)-cores of random digraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
struct ParamArgs {
    /// Minimum in-degree.
    #[arg(long)]
    k1: u32,
    /// Minimum out-degree.
    #[arg(long)]
    k2: u32,
}

impl ParamArgs {
    fn params(self) -> CoreParams {
        CoreParams::new(self.k1, self.k2)
    }
}

/// Arc count, given directly or as a density.
#[derive(Debug, Clone, Copy, Args)]
#[group(required = true, multiple = false)]
struct Density {
    #[arg(long)]
    m: Option<u64>,
    /// Arcs per vertex; `m` is `c n` rounded half to even.
    #[arg(long)]
    c: Option<f64>,
}

impl Density {
    fn arcs(self, n: u64) -> u64 {
        match (self.m, self.c) {
            (Some(m), _) => m,
            (None, Some(c)) => m_from_c(c, n),
            (None, None) => unreachable!("clap requires one of --m, --c"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Model {
    /// Uniform simple digraph with exactly m arcs.
    Uniform,
    /// 2m independent uniform labels read as m ordered pairs.
    Sequence,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical density c* and its minimiser.
    Threshold {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Limit of the fixed-point recursion at density c.
    Fixedpoint {
        #[arg(long)]
        c: f64,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Predicted core size for n vertices at density c.
    Predict {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sample-and-peel battery: fraction of digraphs with a non-empty core.
    Mc {
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        density: Density,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 or 1 runs sequentially.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Include one record per trial (CSV: one row per trial).
        #[arg(long)]
        records: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One random-deletion run against the ODE and the predicted core.
    Compare {
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Upper bound on the number of rows reported.
        #[arg(long, default_value_t = 200)]
        rows: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Integrate the ODE at density c. CSV output is the sampled trajectory.
    Ode {
        #[arg(long)]
        c: f64,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = OdeOptions::default().rtol)]
        rtol: f64,
        /// Include the sampled trajectory in JSON output.
        #[arg(long)]
        trajectory: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Read an edge list and write its core as an edge list.
    Peel {
        /// Edge-list file: a header `n m`, then one `tail head` per line.
        input: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Write a random digraph as an edge list.
    Sample {
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        density: Density,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Model::Uniform)]
        model: Model,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct ParamConfig {
    k1: u32,
    k2: u32,
}

#[derive(Serialize)]
struct DensityConfig {
    k1: u32,
    k2: u32,
    c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u64>,
}

#[derive(Serialize)]
struct ThresholdOut {
    c_star: f64,
    c_star_rounded: f64,
    z_i_star: f64,
    z_o_star: f64,
    beta_at_threshold: f64,
}

#[derive(Serialize)]
struct PredictOut {
    prediction: CorePrediction,
    fixed_point: FixedPointOutcome,
}

#[derive(Serialize)]
struct McOut {
    #[serde(flatten)]
    config: McConfig,
    jobs: usize,
    c: f64,
}

#[derive(Serialize)]
struct CompareConfig {
    k1: u32,
    k2: u32,
    c: f64,
    n: u64,
    m: u64,
    seed: u64,
}

#[derive(Serialize)]
struct OdeConfig {
    k1: u32,
    k2: u32,
    c: f64,
    rtol: f64,
}

#[derive(Serialize)]
struct OdeSummary<'a> {
    verdict: dicore::OdeVerdict,
    terminal_time: f64,
    terminal_z: (f64, f64),
    terminal_v: f64,
    terminal_mu: f64,
    phi_drift: (f64, f64),
    accepted_steps: u64,
    rejected_steps: u64,
    samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostic: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory: Option<&'a [dicore::OdeState]>,
}

fn fixed_point_row(f: &FixedPointOutcome) -> [String; 6] {
    match f {
        FixedPointOutcome::Supercritical(s) => [
            "supercritical".into(),
            num(s.z_i),
            num(s.z_o),
            num(s.beta),
            num(s.core_edge_per_vertex),
            s.iterations.to_string(),
        ],
        FixedPointOutcome::Subcritical { iterations, z_i, z_o } => {
            ["subcritical".into(), num(*z_i), num(*z_o), num(0.0), num(0.0), iterations.to_string()]
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Threshold { params, output } => {
            let r = compute_cstar(params.params())?;
            let sink = Sink::new(output);
            let out = ThresholdOut {
                c_star: r.c_star,
                c_star_rounded: round3(r.c_star),
                z_i_star: r.z_i_star,
                z_o_star: r.z_o_star,
                beta_at_threshold: r.beta_at_threshold,
            };
            match sink.format() {
                Format::Json => sink.json(ParamConfig { k1: params.k1, k2: params.k2 }, out),
                Format::Csv => sink.csv(
                    &["k1", "k2", "c_star", "c_star_rounded", "z_i_star", "z_o_star", "beta_at_threshold"],
                    [vec![
                        params.k1.to_string(),
                        params.k2.to_string(),
                        num(out.c_star),
                        format!("{:.3}", out.c_star_rounded),
                        num(out.z_i_star),
                        num(out.z_o_star),
                        num(out.beta_at_threshold),
                    ]],
                ),
            }
        }
        Command::Fixedpoint { c, params, output } => {
            let f = fixed_point(c, params.params())?;
            let sink = Sink::new(output);
            match sink.format() {
                Format::Json => sink.json(DensityConfig { k1: params.k1, k2: params.k2, c, n: None }, f),
                Format::Csv => {
                    let mut row = vec![num(c), params.k1.to_string(), params.k2.to_string()];
                    row.extend(fixed_point_row(&f));
                    sink.csv(&["c", "k1", "k2", "verdict", "z_i", "z_o", "beta", "core_arcs_per_vertex", "iterations"], [row])
                }
            }
        }
        Command::Predict { c, n, params, output } => {
            let p = params.params();
            let out = PredictOut { prediction: predict_core(c, p, n)?, fixed_point: fixed_point(c, p)? };
            let sink = Sink::new(output);
            match sink.format() {
                Format::Json => sink.json(DensityConfig { k1: params.k1, k2: params.k2, c, n: Some(n) }, out),
                Format::Csv => {
                    let (v, a) = match out.prediction {
                        CorePrediction::Empty => (0.0, 0.0),
                        CorePrediction::Giant { vertices, arcs } => (vertices, arcs),
                    };
                    let beta = out.fixed_point.supercritical().map_or(0.0, |s| s.beta);
                    sink.csv(
                        &["c", "n", "k1", "k2", "core_vertices", "core_arcs", "beta"],
                        [vec![num(c), n.to_string(), params.k1.to_string(), params.k2.to_string(), num(v), num(a), num(beta)]],
                    )
                }
            }
        }
        Command::Mc { n, density, params, trials, seed, jobs, records, output } => {
            let cfg = McConfig { n, m: density.arcs(n), k1: params.k1, k2: params.k2, trials, seed, keep_records: records };
            let res = run_mc(&cfg, Execution::from_jobs(jobs))?;
            log::info!("{} of {} trials had a non-empty core", res.nonempty_count, res.trials);
            let sink = Sink::new(output);
            match sink.format() {
                Format::Json => sink.json(McOut { c: cfg.c(), config: cfg, jobs }, res),
                Format::Csv if records => sink.csv(
                    &["trial", "seed", "core_vertices", "core_arcs"],
                    res.records.iter().flatten().map(|r| {
                        vec![r.trial.to_string(), r.seed.to_string(), r.core_vertices.to_string(), r.core_arcs.to_string()]
                    }),
                ),
                Format::Csv => sink.csv(
                    &[
                        "n", "m", "c", "k1", "k2", "trials", "seed", "nonempty_count", "nonempty_fraction", "ci95_low",
                        "ci95_high", "mean_core_vertices", "mean_core_arcs",
                    ],
                    [vec![
                        res.n.to_string(),
                        res.m.to_string(),
                        num(res.c),
                        res.k1.to_string(),
                        res.k2.to_string(),
                        res.trials.to_string(),
                        seed.to_string(),
                        res.nonempty_count.to_string(),
                        num(res.nonempty_fraction),
                        num(res.wilson_ci95.0),
                        num(res.wilson_ci95.1),
                        num(res.mean_core_vertices),
                        num(res.mean_core_arcs),
                    ]],
                ),
            }
        }
        Command::Compare { c, n, params, seed, rows, output } => {
            let cmp = compare(c, params.params(), n, seed, rows)?;
            log::info!("simulation took {} steps; ODE verdict {:?}", cmp.sim_steps, cmp.ode_verdict);
            let sink = Sink::new(output);
            match sink.format() {
                Format::Json => sink.json(
                    CompareConfig { k1: params.k1, k2: params.k2, c: cmp.c, n, m: cmp.m, seed },
                    &cmp,
                ),
                Format::Csv => {
                    let mut header = vec!["t".to_string()];
                    for prefix in ["sim", "ode", "diff"] {
                        header.extend(LEADING_NAMES.iter().map(|name| format!("{prefix}_{name}")));
                    }
                    let header: Vec<&str> = header.iter().map(String::as_str).collect();
                    sink.csv(
                        &header,
                        cmp.rows.iter().map(|r| {
                            let mut row = vec![num(r.t)];
                            row.extend(r.sim.iter().map(|&x| num(x)));
                            row.extend(r.ode.iter().map(|&x| num(x)));
                            row.extend((0..6).map(|i| num(r.sim[i] - r.ode[i])));
                            row
                        }),
                    )
                }
            }
        }
        Command::Ode { c, params, rtol, trajectory, output } => {
            let opts = OdeOptions { rtol, ..OdeOptions::default() };
            let run = integrate(c, params.params(), &opts)?;
            let sink = Sink::new(output);
            match sink.format() {
                Format::Json => sink.json(
                    OdeConfig { k1: params.k1, k2: params.k2, c, rtol },
                    OdeSummary {
                        verdict: run.verdict,
                        terminal_time: run.terminal_time,
                        terminal_z: (run.terminal.z_i, run.terminal.z_o),
                        terminal_v: run.terminal.s.v,
                        terminal_mu: run.terminal.s.mu,
                        phi_drift: run.drift,
                        accepted_steps: run.accepted_steps,
                        rejected_steps: run.rejected_steps,
                        samples: run.trajectory.len(),
                        diagnostic: run.diagnostic.as_deref(),
                        trajectory: trajectory.then_some(run.trajectory.as_slice()),
                    },
                ),
                Format::Csv => sink.raw(|w| write_trajectory_csv(w, &run.trajectory)),
            }
        }
        Command::Peel { input, params, out } => {
            let file = File::open(&input).with_context(|| format!("cannot open {}", input.display()))?;
            let g = read_edge_list(BufReader::new(file)).with_context(|| format!("reading {}", input.display()))?;
            let core = peel_core(&g, params.params());
            log::info!("core has {} of {} vertices and {} arcs", core.size(), g.n(), core.core.m());
            let sink = Sink::new(OutputArgs { format: Format::Csv, out, timing: false });
            sink.raw(|w| write_edge_list(w, &core.core))
        }
        Command::Sample { n, density, seed, model, out } => {
            let (n, m) = (usize::try_from(n)?, usize::try_from(density.arcs(n))?);
            let sink = Sink::new(OutputArgs { format: Format::Csv, out, timing: false });
            match model {
                Model::Uniform => {
                    let g = sample_digraph(n, m, seed)?;
                    sink.raw(|w| write_edge_list(w, &g))
                }
                Model::Sequence => {
                    let s = sample_sequence_model(n, m, seed)?;
                    sink.raw(|w| {
                        writeln!(w, "{n} {m}")?;
                        for (t, h) in s.pairs() {
                            writeln!(w, "{t} {h}")?;
                        }
                        Ok(())
                    })
                }
            }
        }
    }
}

/// Invalid or unsupported inputs exit with 2; everything else with 3.
fn exit_code(err: &anyhow::Error) -> u8 {
    use dicore::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Domain(_) | E::NoRoot { .. } | E::Unsupported { .. } | E::NotApplicable(_) | E::TooLarge { .. } => {
                    EXIT_USAGE
                }
                E::Parse { .. } | E::Io(_) => EXIT_RUNTIME,
            };
        }
        if cause.downcast_ref::<std::num::TryFromIntError>().is_some() {
            return EXIT_USAGE;
        }
    }
    EXIT_RUNTIME
}

/// The reader went away (`dicore ... | head`); not worth a message.
fn closed_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .any(|c| c.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DICORE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if closed_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
