//! The deterministic counterpart of the deletion process: a system of ODEs
//! for the normalised detailed state, integrated until no light mass is left
//! (a core survives) or the heavy mass vanishes (no core).
//!
//! The right side carries a factor `1/L` that blows up at termination. Since
//! it is homogeneous of degree zero we integrate in the rescaled time
//! `dsigma = dt / L`, carrying physical time `t` as an extra component.

mod integrator;

use std::io::Write;

use serde::Serialize;

use crate::digraph::DetailedState;
use crate::error::{domain, Error, Result};
use crate::poisson::{invert_psi, invert_psi_near, mass_at_floor, psi_unchecked, tail};
use crate::threshold::CoreParams;
use integrator::{next_step, Attempt, Field, Stepper, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeState {
    /// Deletion steps per vertex.
    pub t: f64,
    pub s: DetailedState<f64>,
    pub z_i: f64,
    pub z_o: f64,
    /// `L` integrated as its own component, for cross-checking.
    pub light_tracked: f64,
}

impl OdeState {
    pub fn light(&self) -> f64 {
        self.s.light()
    }

    /// `z_i z_o / mu`.
    pub fn phi1(&self) -> f64 {
        self.z_i * self.z_o / self.s.mu
    }

    /// `p_k1(z_i) p_k2(z_o) / v`.
    pub fn phi2(&self) -> f64 {
        tail(self.s.k1 as i64, self.z_i) * tail(self.s.k2 as i64, self.z_o) / self.s.v
    }

    /// `(v^i, v^o, mu_i, mu_o, v, mu)`.
    pub fn leading(&self) -> [f64; 6] {
        [self.s.v_in(), self.s.v_out(), self.s.mu_i(), self.s.mu_o(), self.s.v, self.s.mu]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OdeVerdict {
    TerminatedSupercritical,
    CollapsedSubcritical,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeOutcome {
    pub verdict: OdeVerdict,
    pub terminal: OdeState,
    pub terminal_time: f64,
    /// At most `max_samples` states, evenly spaced over accepted steps,
    /// always including the first and last.
    pub trajectory: Vec<OdeState>,
    /// Largest relative drift of `(Phi1, Phi2)` over all accepted steps.
    pub drift: (f64, f64),
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    /// Why integration stopped early, for [`OdeVerdict::StepLimit`].
    pub diagnostic: Option<String>,
}

impl OdeOutcome {
    /// Leading coordinates at physical time `t`, interpolated linearly between
    /// samples. Past the terminal time the terminal values are returned.
    pub fn leading_at(&self, t: f64) -> [f64; 6] {
        let tr = &self.trajectory;
        let j = tr.partition_point(|s| s.t <= t);
        if j == 0 {
            return tr[0].leading();
        }
        if j == tr.len() {
            return tr[tr.len() - 1].leading();
        }
        let (a, b) = (&tr[j - 1], &tr[j]);
        let w = (t - a.t) / (b.t - a.t);
        let (la, lb) = (a.leading(), b.leading());
        std::array::from_fn(|i| la[i] + w * (lb[i] - la[i]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub light_stop: f64,
    pub v_floor: f64,
    pub max_samples: usize,
    /// Largest step in rescaled time; keeps samples dense enough for linear
    /// interpolation.
    pub max_step: f64,
    pub max_steps: u64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-20,
            light_stop: 1e-9,
            v_floor: 1e-9,
            max_samples: 10_000,
            max_step: 0.05,
            max_steps: 2_000_000,
        }
    }
}

/// Per-vertex state of `D(n, cn)` for large `n`: in- and out-degrees are
/// independent `Poi(c)`.
pub fn initial_state(c: f64, params: CoreParams) -> Result<OdeState> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain(format!("c must be positive and finite, got {c}")));
    }
    let (k1, k2) = (params.k1, params.k2);
    let pm = |a: u32| crate::poisson::pmf(a as i64, c);
    let (t1, t2) = (tail(k1 as i64, c), tail(k2 as i64, c));
    let mut s = DetailedState::<f64>::zero(params);
    for a in 0..k1 {
        for b in 0..k2 {
            s.v_ab[(a * k2 + b) as usize] = pm(a) * pm(b);
        }
        s.v_a_dot[a as usize] = pm(a) * t2;
    }
    for b in 0..k2 {
        s.v_dot_b[b as usize] = t1 * pm(b);
    }
    s.v = t1 * t2;
    s.mu = c;
    let light = s.light();
    Ok(OdeState { t: 0.0, s, z_i: c, z_o: c, light_tracked: light })
}

/// Quantities shared by every component of the right side.
struct Aux {
    z_i: f64,
    z_o: f64,
    e_i: f64,
    e_o: f64,
    /// `P(Z_i = k1)`, `P(Z_o = k2)`.
    p_i: f64,
    p_o: f64,
    light: f64,
}

fn solve_z(k: u32, target: f64, hint: Option<f64>) -> Result<f64> {
    match hint {
        Some(h) => invert_psi_near(k, target, h),
        None => invert_psi(k, target),
    }
}

fn aux(s: &DetailedState<f64>, hints: Option<(f64, f64)>) -> Result<Aux> {
    let (k1, k2) = (s.k1, s.k2);
    let (v_in, v_out, mu_i, mu_o) = (s.v_in(), s.v_out(), s.mu_i(), s.mu_o());
    if !(v_in > 0.0 && v_out > 0.0 && s.mu > 0.0) {
        return Err(domain("no heavy mass left to define z_i, z_o"));
    }
    let z_i = solve_z(k1, (s.mu - mu_i) / v_in, hints.map(|h| h.0))?;
    let z_o = solve_z(k2, (s.mu - mu_o) / v_out, hints.map(|h| h.1))?;
    let light = s.light();
    if !(light > 0.0) {
        return Err(domain("no light mass left"));
    }
    Ok(Aux {
        z_i,
        z_o,
        e_i: mu_i + psi_unchecked(k1, z_i) * (v_in - s.v),
        e_o: mu_o + psi_unchecked(k2, z_o) * (v_out - s.v),
        p_i: mass_at_floor(k1, z_i),
        p_o: mass_at_floor(k2, z_o),
        light,
    })
}

/// `L` times the physical-time derivative of every component.
fn scaled_rhs(s: &DetailedState<f64>, x: &Aux, out: &mut DetailedState<f64>) {
    let (k1, k2) = (s.k1, s.k2);
    let mu = s.mu;
    let (eo, ei) = (x.e_o / mu, x.e_i / mu);
    let ab = |a: u32, b: u32| -> f64 {
        if a == k1 {
            s.v_dot_b[b as usize] * x.p_i
        } else if b == k2 {
            s.v_a_dot[a as usize] * x.p_o
        } else {
            s.vab(a, b)
        }
    };
    for a in 0..k1 {
        for b in 0..k2 {
            let here = s.vab(a, b);
            let own = if a == 0 && b == 0 { x.light } else { -here };
            let (af, bf) = (a as f64, b as f64);
            out.v_ab[(a * k2 + b) as usize] = own
                + eo * ((af + 1.0) * ab(a + 1, b) - af * here)
                + ei * ((bf + 1.0) * ab(a, b + 1) - bf * here);
        }
    }
    for a in 0..k1 {
        let here = s.v_a_dot[a as usize];
        let next = if a + 1 == k1 { s.v * x.p_i } else { s.v_a_dot[a as usize + 1] };
        let af = a as f64;
        out.v_a_dot[a as usize] =
            -here + eo * ((af + 1.0) * next - af * here) - ei * k2 as f64 * here * x.p_o;
    }
    for b in 0..k2 {
        let here = s.v_dot_b[b as usize];
        let next = if b + 1 == k2 { s.v * x.p_o } else { s.v_dot_b[b as usize + 1] };
        let bf = b as f64;
        out.v_dot_b[b as usize] =
            -here + ei * ((bf + 1.0) * next - bf * here) - eo * k1 as f64 * here * x.p_i;
    }
    out.v = -(eo * k1 as f64 * x.p_i + ei * k2 as f64 * x.p_o) * s.v;
    out.mu = -(x.e_i + x.e_o);
}

/// Physical-time derivative of the normalised detailed state.
pub fn rhs(state: &OdeState) -> Result<DetailedState<f64>> {
    let x = aux(&state.s, None)?;
    let mut out = DetailedState::zero(state.s.params());
    scaled_rhs(&state.s, &x, &mut out);
    let inv = 1.0 / x.light;
    for e in out.v_ab.iter_mut().chain(&mut out.v_a_dot).chain(&mut out.v_dot_b) {
        *e *= inv;
    }
    out.v *= inv;
    out.mu *= inv;
    Ok(out)
}

/// Expected one-step change of `(v^i, v^o, mu_i, mu_o, v, mu)` written in
/// the six leading coordinates only; `L` enters as a scale. Valid for
/// counts as well as for normalised states.
pub fn system6(s: &DetailedState<f64>) -> Result<[f64; 6]> {
    let x = aux(s, None)?;
    let (k1, k2) = (s.k1 as f64, s.k2 as f64);
    let (l, mu) = (x.light, s.mu);
    let (v_in, v_out, mu_i, mu_o) = (s.v_in(), s.v_out(), s.mu_i(), s.mu_o());
    Ok([
        -(v_in - s.v) / l - x.e_o * k1 * x.p_i * v_in / (l * mu),
        -(v_out - s.v) / l - x.e_i * k2 * x.p_o * v_out / (l * mu),
        -mu_i / l * (1.0 + x.e_o / mu) + x.e_o * k1 * (k1 - 1.0) * x.p_i * v_in / (l * mu),
        -mu_o / l * (1.0 + x.e_i / mu) + x.e_i * k2 * (k2 - 1.0) * x.p_o * v_out / (l * mu),
        -(x.e_o * k1 * x.p_i + x.e_i * k2 * x.p_o) * s.v / (l * mu),
        -(x.e_i + x.e_o) / l,
    ])
}

/// Layout of the flat vector: detailed state, then `t`, then tracked `L`.
struct Layout {
    params: CoreParams,
    nab: usize,
}

impl Layout {
    fn new(params: CoreParams) -> Self {
        Self { params, nab: (params.k1 * params.k2) as usize }
    }

    fn dim(&self) -> usize {
        self.nab + (self.params.k1 + self.params.k2) as usize + 4
    }

    fn pack(&self, st: &OdeState) -> Vec<f64> {
        let s = &st.s;
        let mut y = Vec::with_capacity(self.dim());
        y.extend_from_slice(&s.v_ab);
        y.extend_from_slice(&s.v_a_dot);
        y.extend_from_slice(&s.v_dot_b);
        y.extend([s.v, s.mu, st.t, st.light_tracked]);
        y
    }

    fn unpack_into(&self, y: &[f64], s: &mut DetailedState<f64>) {
        let (k1, k2) = (self.params.k1 as usize, self.params.k2 as usize);
        let nab = self.nab;
        s.v_ab.copy_from_slice(&y[..nab]);
        s.v_a_dot.copy_from_slice(&y[nab..nab + k1]);
        s.v_dot_b.copy_from_slice(&y[nab + k1..nab + k1 + k2]);
        s.v = y[nab + k1 + k2];
        s.mu = y[nab + k1 + k2 + 1];
    }

    fn time(&self, y: &[f64]) -> f64 {
        y[self.dim() - 2]
    }

    fn tracked_light(&self, y: &[f64]) -> f64 {
        y[self.dim() - 1]
    }
}

struct OdeField {
    layout: Layout,
    scratch: DetailedState<f64>,
    deriv: DetailedState<f64>,
    hints: (f64, f64),
}

impl Field for OdeField {
    fn eval(&mut self, y: &[f64], dy: &mut [f64]) -> bool {
        self.layout.unpack_into(y, &mut self.scratch);
        let Ok(x) = aux(&self.scratch, Some(self.hints)) else {
            return false;
        };
        self.hints = (x.z_i, x.z_o);
        scaled_rhs(&self.scratch, &x, &mut self.deriv);
        let d = &self.deriv;
        let nab = self.layout.nab;
        let (k1, k2) = (d.v_a_dot.len(), d.v_dot_b.len());
        dy[..nab].copy_from_slice(&d.v_ab);
        dy[nab..nab + k1].copy_from_slice(&d.v_a_dot);
        dy[nab + k1..nab + k1 + k2].copy_from_slice(&d.v_dot_b);
        let base = nab + k1 + k2;
        dy[base] = d.v;
        dy[base + 1] = d.mu;
        dy[base + 2] = x.light;
        let isolated = if nab > 0 { d.v_ab[0] } else { 0.0 };
        dy[base + 3] = -(isolated + d.v);
        true
    }
}

fn make_state(layout: &Layout, y: &[f64], hints: (f64, f64)) -> Result<OdeState> {
    let mut s = DetailedState::zero(layout.params);
    layout.unpack_into(y, &mut s);
    let z_i = invert_psi_near(s.k1, (s.mu - s.mu_i()) / s.v_in(), hints.0)?;
    let z_o = invert_psi_near(s.k2, (s.mu - s.mu_o()) / s.v_out(), hints.1)?;
    Ok(OdeState { t: layout.time(y), s, z_i, z_o, light_tracked: layout.tracked_light(y) })
}

fn relative_drift(a: f64, a0: f64) -> f64 {
    (a / a0 - 1.0).abs()
}

/// Integrates from [`initial_state`] until termination.
pub fn integrate(c: f64, params: CoreParams, opts: &OdeOptions) -> Result<OdeOutcome> {
    params.require_threshold()?;
    if params.k1 == 0 || params.k2 == 0 {
        return Err(Error::Unsupported {
            k1: params.k1,
            k2: params.k2,
            reason: "the ODE needs both thresholds positive",
        });
    }
    let start = initial_state(c, params)?;
    integrate_from(start, opts)
}

/// Integrates from an arbitrary feasible normalised state.
pub fn integrate_from(start: OdeState, opts: &OdeOptions) -> Result<OdeOutcome> {
    let params = start.s.params();
    let layout = Layout::new(params);
    let mut y = layout.pack(&start);
    let (phi1_0, phi2_0) = (start.phi1(), start.phi2());
    let mut field = OdeField {
        layout: Layout::new(params),
        scratch: DetailedState::zero(params),
        deriv: DetailedState::zero(params),
        hints: (start.z_i, start.z_o),
    };
    let tol = Tolerances { rtol: opts.rtol, atol: opts.atol };
    let mut stepper = Stepper::new(layout.dim(), tol);
    let mut states = vec![start.clone()];
    let mut drift: (f64, f64) = (0.0, 0.0);
    let (mut accepted, mut rejected) = (0u64, 0u64);
    let mut h: f64 = 1e-3;
    let mut diagnostic = None;

    let verdict = 'run: {
        if start.light() < opts.light_stop {
            break 'run OdeVerdict::TerminatedSupercritical;
        }
        if start.s.v < opts.v_floor {
            break 'run OdeVerdict::CollapsedSubcritical;
        }
        if !stepper.init(&mut field, &y) {
            return Err(domain("initial state is outside the feasible region"));
        }
        loop {
            if accepted >= opts.max_steps {
                diagnostic = Some(format!("step budget of {} exhausted", opts.max_steps));
                break 'run OdeVerdict::StepLimit;
            }
            let h_try = h.min(opts.max_step);
            if h_try < 1e-13 {
                diagnostic = Some(format!("step size underflow ({h_try:e}) at t = {}", layout.time(&y)));
                break 'run OdeVerdict::StepLimit;
            }
            match stepper.attempt(&mut field, &mut y, h_try) {
                Attempt::Accepted { err } => {
                    accepted += 1;
                    h = next_step(h_try, err);
                    let prev = states.last().unwrap();
                    let st = match make_state(&layout, &y, (prev.z_i, prev.z_o)) {
                        Ok(st) => st,
                        Err(e) => {
                            diagnostic = Some(format!("state left the feasible region: {e}"));
                            break 'run OdeVerdict::StepLimit;
                        }
                    };
                    drift.0 = drift.0.max(relative_drift(st.phi1(), phi1_0));
                    drift.1 = drift.1.max(relative_drift(st.phi2(), phi2_0));
                    let (light, v) = (st.light(), st.s.v);
                    states.push(st);
                    if v < opts.v_floor {
                        break 'run OdeVerdict::CollapsedSubcritical;
                    }
                    if light < opts.light_stop {
                        break 'run OdeVerdict::TerminatedSupercritical;
                    }
                }
                Attempt::Rejected { err } => {
                    rejected += 1;
                    h = next_step(h_try, err);
                }
                Attempt::Infeasible => {
                    rejected += 1;
                    h = 0.25 * h_try;
                }
            }
        }
    };
    let terminal = states.last().unwrap().clone();
    let terminal_time = terminal.t;
    log::debug!(
        "ode {params}: {verdict:?} at t = {terminal_time:.6} after {accepted} steps ({rejected} rejected)"
    );
    Ok(OdeOutcome {
        verdict,
        terminal,
        terminal_time,
        trajectory: thin(states, opts.max_samples.max(2)),
        drift,
        accepted_steps: accepted,
        rejected_steps: rejected,
        diagnostic,
    })
}

fn thin(states: Vec<OdeState>, cap: usize) -> Vec<OdeState> {
    let len = states.len();
    if len <= cap {
        return states;
    }
    let mut keep = vec![false; len];
    for j in 0..cap {
        keep[((j as f64) * (len - 1) as f64 / (cap - 1) as f64).round() as usize] = true;
    }
    states.into_iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s).collect()
}

/// Largest relative deviation of `Phi1` and `Phi2` from their first values.
pub fn conservation_report(trajectory: &[OdeState]) -> (f64, f64) {
    let Some(first) = trajectory.first() else { return (0.0, 0.0) };
    let (a0, b0) = (first.phi1(), first.phi2());
    trajectory.iter().fold((0.0f64, 0.0f64), |(da, db), s| {
        (da.max(relative_drift(s.phi1(), a0)), db.max(relative_drift(s.phi2(), b0)))
    })
}

pub const CSV_HEADER: &str = "t,z_i,z_o,v,mu,mu_i,mu_o,v_i,v_o,L,phi1,phi2";

/// One row per sample, every number with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(mut w: W, trajectory: &[OdeState]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for st in trajectory {
        let s = &st.s;
        let row = [
            st.t,
            st.z_i,
            st.z_o,
            s.v,
            s.mu,
            s.mu_i(),
            s.mu_o(),
            s.v_in(),
            s.v_out(),
            st.light(),
            st.phi1(),
            st.phi2(),
        ];
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Physical-time derivative of the leading coordinates, summed from the
/// detailed right side. Should agree with [`system6`].
#[doc(hidden)]
pub fn leading_from_detailed(s: &DetailedState<f64>) -> Result<[f64; 6]> {
    let x = aux(s, None)?;
    let mut d = DetailedState::zero(s.params());
    scaled_rhs(s, &x, &mut d);
    let direct = [d.v_in(), d.v_out(), d.mu_i(), d.mu_o(), d.v, d.mu];
    Ok(direct.map(|q| q / x.light))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn initial_state_is_a_partition() {
        for &(c, k1, k2) in &[(3.4, 1, 2), (4.0, 2, 2), (6.0, 3, 4)] {
            let st = initial_state(c, CoreParams::new(k1, k2)).unwrap();
            assert_relative_eq!(st.s.total(), 1.0, max_relative = 1e-14);
            assert_relative_eq!(st.phi1(), c, max_relative = 1e-14);
            assert_relative_eq!(st.phi2(), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn initial_z_matches_inversion() {
        let st = initial_state(4.0, CoreParams::new(2, 3)).unwrap();
        let x = aux(&st.s, None).unwrap();
        assert_relative_eq!(x.z_i, 4.0, max_relative = 1e-10);
        assert_relative_eq!(x.z_o, 4.0, max_relative = 1e-10);
    }

    #[test]
    fn vertex_mass_is_conserved_by_rhs() {
        let st = initial_state(4.5, CoreParams::new(3, 2)).unwrap();
        let d = rhs(&st).unwrap();
        assert!(d.total().abs() < 1e-14, "{}", d.total());
    }

    #[test]
    fn leading_system_agrees_with_detailed_rhs() {
        for &(c, k1, k2) in &[(4.0, 2, 2), (3.6, 1, 2), (6.0, 3, 4)] {
            let st = initial_state(c, CoreParams::new(k1, k2)).unwrap();
            let a = system6(&st.s).unwrap();
            let b = leading_from_detailed(&st.s).unwrap();
            for i in 0..6 {
                assert!((a[i] - b[i]).abs() <= 1e-12 * (1.0 + a[i].abs()), "{i}: {} vs {}", a[i], b[i]);
            }
        }
    }

    #[test]
    fn empty_light_mass_is_a_termination_signal() {
        let mut st = initial_state(4.0, CoreParams::new(2, 2)).unwrap();
        for e in st.s.v_ab.iter_mut().skip(1).chain(&mut st.s.v_a_dot).chain(&mut st.s.v_dot_b) {
            *e = 0.0;
        }
        assert!(rhs(&st).is_err());
    }

    #[test]
    fn single_sample_has_no_drift() {
        let st = initial_state(4.0, CoreParams::new(2, 2)).unwrap();
        assert_eq!(conservation_report(&[st]), (0.0, 0.0));
        assert_eq!(conservation_report(&[]), (0.0, 0.0));
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let st = initial_state(4.0, CoreParams::new(2, 2)).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &[st]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 12);
        assert_eq!(row[1], "4.0000000000000000e0");
    }

    #[test]
    fn thinning_keeps_endpoints() {
        let st = initial_state(4.0, CoreParams::new(2, 2)).unwrap();
        let many: Vec<OdeState> = (0..100).map(|i| OdeState { t: i as f64, ..st.clone() }).collect();
        let few = thin(many, 10);
        assert_eq!(few.len(), 10);
        assert_eq!(few[0].t, 0.0);
        assert_eq!(few[9].t, 99.0);
    }
}
