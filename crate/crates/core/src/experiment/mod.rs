//! Monte-Carlo batteries and simulation-versus-theory comparisons.

mod exec;

use serde::{Deserialize, Serialize};

use crate::digraph::{peel_core, run_random_deletion, sample_digraph, RandomDeletion, StepDelta};
use crate::error::{domain, Result};
use crate::ode::{integrate, system6, OdeOptions, OdeVerdict};
use crate::threshold::{predict_core, CoreParams, CorePrediction};

pub use exec::{run_trials, Execution};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Arc count for density `c`: `c n` rounded half to even.
pub fn m_from_c(c: f64, n: u64) -> u64 {
    (c * n as f64).round_ties_even() as u64
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_ci95(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let nf = trials as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n: u64,
    pub m: u64,
    pub k1: u32,
    pub k2: u32,
    pub trials: u64,
    pub seed: u64,
    /// Keep one record per trial in the result.
    pub keep_records: bool,
}

impl McConfig {
    pub fn params(&self) -> CoreParams {
        CoreParams::new(self.k1, self.k2)
    }

    pub fn c(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(domain("trials must be at least 1"));
        }
        if self.n == 0 {
            return Err(domain("n must be at least 1"));
        }
        if self.m > self.n * (self.n - 1) {
            return Err(domain(format!("m = {} exceeds n(n-1) = {}", self.m, self.n * (self.n - 1))));
        }
        self.params().require_peelable()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub core_vertices: u64,
    pub core_arcs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub n: u64,
    pub m: u64,
    pub c: f64,
    pub k1: u32,
    pub k2: u32,
    pub trials: u64,
    pub nonempty_count: u64,
    pub nonempty_fraction: f64,
    pub wilson_ci95: (f64, f64),
    pub mean_core_vertices: f64,
    pub mean_core_arcs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<TrialRecord>>,
}

/// Samples `D(n, m)` `trials` times and peels each sample.
pub fn run_mc(cfg: &McConfig, exec: Execution) -> Result<McResult> {
    cfg.validate()?;
    let params = cfg.params();
    let (n, m) = (cfg.n as usize, cfg.m as usize);
    let records: Vec<Result<TrialRecord>> = run_trials(cfg.trials, cfg.seed, exec, |trial, seed| {
        let g = sample_digraph(n, m, seed)?;
        let core = peel_core(&g, params);
        Ok(TrialRecord { trial, seed, core_vertices: core.size() as u64, core_arcs: core.core.m() as u64 })
    });
    let records: Vec<TrialRecord> = records.into_iter().collect::<Result<_>>()?;
    let count = records.iter().filter(|r| r.core_vertices > 0).count() as u64;
    let t = cfg.trials as f64;
    Ok(McResult {
        n: cfg.n,
        m: cfg.m,
        c: cfg.c(),
        k1: cfg.k1,
        k2: cfg.k2,
        trials: cfg.trials,
        nonempty_count: count,
        nonempty_fraction: count as f64 / t,
        wilson_ci95: wilson_ci95(count, cfg.trials),
        mean_core_vertices: records.iter().map(|r| r.core_vertices as f64).sum::<f64>() / t,
        mean_core_arcs: records.iter().map(|r| r.core_arcs as f64).sum::<f64>() / t,
        records: cfg.keep_records.then_some(records),
    })
}

pub const LEADING_NAMES: [&str; 6] = ["v_i", "v_o", "mu_i", "mu_o", "v", "mu"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    /// Deletion steps divided by `n`.
    pub t: f64,
    pub sim: [f64; 6],
    pub ode: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub n: u64,
    pub m: u64,
    pub c: f64,
    pub k1: u32,
    pub k2: u32,
    pub seed: u64,
    pub rows: Vec<CompareRow>,
    /// Largest `|sim - ode|` per leading coordinate, over the steps with
    /// `t` no later than the ODE's terminal time.
    pub sup_gap: [f64; 6],
    /// Same, over every simulated step. Past the ODE's terminal time the
    /// ODE side is held at its terminal value.
    pub sup_gap_all: [f64; 6],
    pub sim_core_vertices: u64,
    pub sim_core_arcs: u64,
    pub sim_steps: u64,
    pub ode_verdict: OdeVerdict,
    pub ode_terminal_time: f64,
    pub ode_terminal_v: f64,
    pub ode_terminal_z: (f64, f64),
    pub predicted: CorePrediction,
}

/// One deletion run on `D(n, cn)` against the ODE from the matching initial
/// condition, aligned at equal `t/n`. At most `max_rows` rows are kept, but
/// the sup-gaps cover every step.
pub fn compare(c: f64, params: CoreParams, n: u64, seed: u64, max_rows: usize) -> Result<Comparison> {
    let m = m_from_c(c, n);
    let c_eff = m as f64 / n as f64;
    let g = sample_digraph(n as usize, m as usize, seed)?;
    let ode = integrate(c_eff, params, &OdeOptions::default())?;
    let sim = run_random_deletion(&g, params, seed);
    let nf = n as f64;
    let steps = sim.trajectory.len() - 1;
    let stride = (steps / max_rows.max(1)).max(1);
    let mut sup_gap = [0.0f64; 6];
    let mut sup_gap_all = [0.0f64; 6];
    let mut rows = Vec::new();
    for (step, s) in sim.trajectory.iter().enumerate() {
        let t = step as f64 / nf;
        let simv = [s.v_in() / nf, s.v_out() / nf, s.mu_i() / nf, s.mu_o() / nf, s.v as f64 / nf, s.mu as f64 / nf];
        let odev = ode.leading_at(t);
        let within = t <= ode.terminal_time;
        for i in 0..6 {
            let gap = (simv[i] - odev[i]).abs();
            sup_gap_all[i] = sup_gap_all[i].max(gap);
            if within {
                sup_gap[i] = sup_gap[i].max(gap);
            }
        }
        if step % stride == 0 || step == steps {
            rows.push(CompareRow { t, sim: simv, ode: odev });
        }
    }
    Ok(Comparison {
        n,
        m,
        c: c_eff,
        k1: params.k1,
        k2: params.k2,
        seed,
        rows,
        sup_gap,
        sup_gap_all,
        sim_core_vertices: sim.core_size() as u64,
        sim_core_arcs: sim.core.m() as u64,
        sim_steps: steps as u64,
        ode_verdict: ode.verdict,
        ode_terminal_time: ode.terminal_time,
        ode_terminal_v: ode.terminal.s.v,
        ode_terminal_z: (ode.terminal.z_i, ode.terminal.z_o),
        predicted: predict_core(c_eff, params, n)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftCheck {
    pub light: u64,
    pub mean: [f64; 6],
    pub std_err: [f64; 6],
    pub predicted: [f64; 6],
}

impl DriftCheck {
    /// `|mean - predicted| / std_err` per coordinate.
    pub fn z_scores(&self) -> [f64; 6] {
        std::array::from_fn(|i| {
            let d = (self.mean[i] - self.predicted[i]).abs();
            if self.std_err[i] > 0.0 {
                d / self.std_err[i]
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
    }
}

/// Runs the deletion chain on `D(n, cn)` until the light count has fallen
/// to `freeze_at` of its initial value, then averages `replicates` single
/// steps from that frozen state and sets them against the expected changes.
pub fn drift_check(
    c: f64,
    params: CoreParams,
    n: u64,
    seed: u64,
    freeze_at: f64,
    replicates: u64,
) -> Result<DriftCheck> {
    let m = m_from_c(c, n);
    let g = sample_digraph(n as usize, m as usize, seed)?;
    let mut proc = RandomDeletion::new(&g, params, seed ^ 0x5eed);
    let target = (proc.pool().len() as f64 * freeze_at) as usize;
    while proc.pool().len() > target {
        if proc.step().is_none() {
            break;
        }
    }
    if proc.is_done() {
        return Err(domain("deletion finished before reaching the freeze point"));
    }
    let mut sum = [0.0f64; 6];
    let mut sum_sq = [0.0f64; 6];
    for _ in 0..replicates {
        let u = proc.sample_pool_vertex().expect("pool is non-empty");
        let d: [f64; 6] = StepDelta::to_array(proc.one_step_delta(u));
        for i in 0..6 {
            sum[i] += d[i];
            sum_sq[i] += d[i] * d[i];
        }
    }
    let r = replicates as f64;
    let mean: [f64; 6] = std::array::from_fn(|i| sum[i] / r);
    let std_err = std::array::from_fn(|i| ((sum_sq[i] / r - mean[i] * mean[i]).max(0.0) * r / (r - 1.0) / r).sqrt());
    let state = proc.state().normalized(1.0);
    Ok(DriftCheck { light: proc.pool().len() as u64, mean, std_err, predicted: system6(&state)? })
}

/// Envelope written by the CLI around every result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report<C, R> {
    pub config: C,
    pub results: R,
    pub software_version: &'static str,
    pub elapsed_seconds: Option<f64>,
}

impl<C, R> Report<C, R> {
    pub fn new(config: C, results: R) -> Self {
        Self { config, results, software_version: env!("CARGO_PKG_VERSION"), elapsed_seconds: None }
    }
}
