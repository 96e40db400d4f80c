//! The critical density `c*(k1,k2)`, the supercritical fixed point and the
//! core-size predictions derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::poisson::{invert_psi, phi_unchecked as phi, psi_unchecked as psi, tail};

/// In/out degree thresholds of a core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoreParams {
    pub k1: u32,
    pub k2: u32,
}

impl CoreParams {
    pub const fn new(k1: u32, k2: u32) -> Self {
        Self { k1, k2 }
    }

    pub fn swapped(self) -> Self {
        Self::new(self.k2, self.k1)
    }

    pub fn kmax(self) -> u32 {
        self.k1.max(self.k2)
    }

    /// Threshold theory needs `max(k1,k2) >= 2`; `(1,1)` and below have no
    /// finite positive threshold of this form.
    pub fn require_threshold(self) -> Result<()> {
        if self.kmax() < 2 {
            return Err(Error::Unsupported {
                k1: self.k1,
                k2: self.k2,
                reason: "threshold theory requires max(k1,k2) >= 2",
            });
        }
        Ok(())
    }

    /// Peeling needs at least one positive threshold.
    pub fn require_peelable(self) -> Result<()> {
        if self.kmax() < 1 {
            return Err(Error::Unsupported {
                k1: self.k1,
                k2: self.k2,
                reason: "peeling requires max(k1,k2) >= 1",
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for CoreParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub c_star: f64,
    pub z_i_star: f64,
    pub z_o_star: f64,
    pub beta_at_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Supercritical {
    pub z_i: f64,
    pub z_o: f64,
    /// Limiting fraction of vertices in the core.
    pub beta: f64,
    /// Limiting number of core arcs per vertex of the whole graph.
    pub core_edge_per_vertex: f64,
    pub iterations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum FixedPointOutcome {
    Supercritical(Supercritical),
    Subcritical { iterations: u64, z_i: f64, z_o: f64 },
}

impl FixedPointOutcome {
    pub fn supercritical(&self) -> Option<&Supercritical> {
        match self {
            Self::Supercritical(s) => Some(s),
            Self::Subcritical { .. } => None,
        }
    }

    pub fn is_supercritical(&self) -> bool {
        self.supercritical().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum CorePrediction {
    Empty,
    Giant { vertices: f64, arcs: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoticVariant {
    /// `c*(k,k)`.
    Diagonal,
    /// `c*(0,k)`.
    ZeroK,
}

pub const COLLAPSE_FLOOR: f64 = 1e-6;
pub const STEP_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: u64 = 100_000;
const NEAR_CRITICAL: f64 = 1e-9;

fn p(k: u32, z: f64) -> f64 {
    tail(k as i64, z)
}

/// `p_{k-1}`, which is identically one for `k <= 1`.
fn p_minus(k: u32, z: f64) -> f64 {
    tail(k as i64 - 1, z)
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

/// `(1 - phi_k1(z_i))(1 - phi_k2(z_o)) - phi_{k1-1}(z_i) phi_{k2-1}(z_o)`.
pub fn big_h(params: CoreParams, z_i: f64, z_o: f64) -> Result<f64> {
    check_positive("z_i", z_i)?;
    check_positive("z_o", z_o)?;
    Ok(h_unchecked(params, z_i, z_o))
}

fn h_unchecked(params: CoreParams, z_i: f64, z_o: f64) -> f64 {
    let (k1, k2) = (params.k1 as i64, params.k2 as i64);
    (1.0 - phi(k1, z_i)) * (1.0 - phi(k2, z_o)) - phi(k1 - 1, z_i) * phi(k2 - 1, z_o)
}

/// The two branches of the variational objective. On the mean-matching curve
/// they coincide.
pub fn psi_branches(params: CoreParams, z_i: f64, z_o: f64) -> (f64, f64) {
    (
        z_i / (p(params.k1, z_i) * p_minus(params.k2, z_o)),
        z_o / (p(params.k2, z_o) * p_minus(params.k1, z_i)),
    )
}

/// `max` of the two branches returned by [`psi_branches`].
pub fn psi_objective(params: CoreParams, z_i: f64, z_o: f64) -> Result<f64> {
    check_positive("z_i", z_i)?;
    check_positive("z_o", z_o)?;
    let (a, b) = psi_branches(params, z_i, z_o);
    Ok(a.max(b))
}

/// The `z_o` whose conditioned out-mean equals the conditioned in-mean at `z_i`.
pub fn constraint_zo(params: CoreParams, z_i: f64) -> Result<f64> {
    check_positive("z_i", z_i)?;
    invert_psi(params.k2, psi(params.k1, z_i))
}

/// Root of `phi_k(z) = 1` for `k >= 2`.
fn phi_unit_root(k: u32) -> f64 {
    debug_assert!(k >= 2);
    let (mut lo, mut hi) = (0.0f64, k as f64 + 1.0);
    while phi(k as i64, hi) > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(k as i64, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Critical density `c*(k1,k2)` and its minimiser.
pub fn compute_cstar(params: CoreParams) -> Result<ThresholdResult> {
    params.require_threshold()?;
    let (k1, k2) = (params.k1, params.k2);
    let (z_i, z_o) = if k1.min(k2) <= 1 {
        let big = k1.max(k2);
        let small = k1.min(k2);
        let z_big = phi_unit_root(big);
        let z_small = invert_psi(small, psi(big, z_big))?;
        if k1 == big {
            (z_big, z_small)
        } else {
            (z_small, z_big)
        }
    } else {
        let z_i = solve_h_on_curve(params)?;
        (z_i, constraint_zo(params, z_i)?)
    };
    let c_star = z_i / (p(k1, z_i) * p_minus(k2, z_o));
    Ok(ThresholdResult {
        c_star,
        z_i_star: z_i,
        z_o_star: z_o,
        beta_at_threshold: p(k1, z_i) * p(k2, z_o),
    })
}

/// Bisection for `H(z_i, F(z_i)) = 0`, `F` being [`constraint_zo`].
fn solve_h_on_curve(params: CoreParams) -> Result<f64> {
    let (k1, k2) = (params.k1, params.k2);
    let w1 = phi_unit_root(k1);
    let w2 = phi_unit_root(k2);
    let t2 = psi(k2, w2);
    // Past this point phi_k2(F(z_i)) < 1 as well.
    let from_out = if t2 > k1 as f64 { invert_psi(k1, t2)? } else { 0.0 };
    let mut lo = w1.max(from_out);
    let s = (k1 + k2) as f64;
    let mut hi = s + 10.0 * s.sqrt() + 10.0;
    let g = |z: f64| -> Result<f64> { Ok(h_unchecked(params, z, constraint_zo(params, z)?)) };
    while g(hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Iterates the recurrence for the terminal pair `(z_i, z_o)` starting from
/// `(c, c)`.
pub fn fixed_point(c: f64, params: CoreParams) -> Result<FixedPointOutcome> {
    check_positive("c", c)?;
    params.require_threshold()?;
    let (k1, k2) = (params.k1, params.k2);
    let thr = compute_cstar(params)?;
    if (c - thr.c_star).abs() < NEAR_CRITICAL {
        return Ok(FixedPointOutcome::Supercritical(Supercritical {
            z_i: thr.z_i_star,
            z_o: thr.z_o_star,
            beta: thr.beta_at_threshold,
            core_edge_per_vertex: thr.z_i_star * thr.z_o_star / c,
            iterations: 0,
        }));
    }
    let (mut z_i, mut z_o) = (c, c);
    for it in 1..=MAX_ITERATIONS {
        let ni = c * p(k1, z_i) * p_minus(k2, z_o);
        let no = c * p(k2, z_o) * p_minus(k1, z_i);
        debug_assert!(ni <= z_i * (1.0 + 8.0 * f64::EPSILON) && no <= z_o * (1.0 + 8.0 * f64::EPSILON));
        let step = (z_i - ni).abs().max((z_o - no).abs());
        z_i = ni;
        z_o = no;
        if z_i.min(z_o) < COLLAPSE_FLOOR {
            return Ok(FixedPointOutcome::Subcritical { iterations: it, z_i, z_o });
        }
        if step < STEP_TOL {
            return Ok(FixedPointOutcome::Supercritical(Supercritical {
                z_i,
                z_o,
                beta: p(k1, z_i) * p(k2, z_o),
                core_edge_per_vertex: z_i * z_o / c,
                iterations: it,
            }));
        }
    }
    log::debug!("fixed point for c = {c}, {params} hit the iteration cap");
    Ok(FixedPointOutcome::Subcritical { iterations: MAX_ITERATIONS, z_i, z_o })
}

/// Predicted core vertex and arc counts for `n` vertices at density `c`.
pub fn predict_core(c: f64, params: CoreParams, n: u64) -> Result<CorePrediction> {
    if n == 0 {
        return Err(domain("n must be positive"));
    }
    Ok(match fixed_point(c, params)? {
        FixedPointOutcome::Supercritical(s) => CorePrediction::Giant {
            vertices: s.beta * n as f64,
            arcs: s.core_edge_per_vertex * n as f64,
        },
        FixedPointOutcome::Subcritical { .. } => CorePrediction::Empty,
    })
}

/// `min{ (e^{k+1} c^k / k^k)^{1/(k-1)}, k/(c e) }`.
pub fn alpha_bound(k: u32, c: f64) -> Result<f64> {
    if k < 2 {
        return Err(domain(format!("alpha bound needs k >= 2, got {k}")));
    }
    check_positive("c", c)?;
    let kf = k as f64;
    let first = (((kf + 1.0) + kf * c.ln() - kf * kf.ln()) / (kf - 1.0)).exp();
    Ok(first.min(kf / (c * std::f64::consts::E)))
}

/// Leading terms of the large-`k` expansion of `c*(k,k)` or `c*(0,k)`.
pub fn asymptotic_cstar(k: u32, variant: AsymptoticVariant) -> Result<f64> {
    if k < 2 {
        return Err(domain(format!("asymptotic formula needs k >= 2, got {k}")));
    }
    let kf = k as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let arg = match variant {
        AsymptoticVariant::Diagonal => kf * std::f64::consts::E.powi(2) / two_pi,
        AsymptoticVariant::ZeroK => kf / two_pi,
    };
    let lg = arg.ln();
    if lg < 0.0 {
        return Err(Error::NotApplicable(format!(
            "log argument {arg} < 1 for k = {k}; expansion only meaningful for larger k"
        )));
    }
    Ok(kf + (kf * lg).sqrt() - 1.0)
}

/// Rounds half-to-even at three decimals, the precision of published tables.
pub fn round3(x: f64) -> f64 {
    let y = x * 1000.0;
    let r = y.round();
    let r = if (y - y.trunc()).abs() == 0.5 && r % 2.0 != 0.0 { r - y.signum() } else { r };
    r / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn h_reduces_when_k2_le_1() {
        let prm = CoreParams::new(3, 1);
        let direct = (1.0 - phi(3, 2.0)) * (1.0 - phi(1, 1.5));
        assert_eq!(big_h(prm, 2.0, 1.5).unwrap(), direct);
    }

    #[test]
    fn objective_branches_agree_on_symmetric_input() {
        let (a, b) = psi_branches(CoreParams::new(3, 3), 2.2, 2.2);
        assert_eq!(a, b);
    }

    #[test]
    fn constraint_trivia() {
        assert_relative_eq!(constraint_zo(CoreParams::new(3, 3), 2.5).unwrap(), 2.5, max_relative = 1e-10);
        let z = constraint_zo(CoreParams::new(2, 0), 1.3).unwrap();
        assert_eq!(z, psi(2, 1.3));
        assert!(matches!(constraint_zo(CoreParams::new(0, 5), 3.0), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn one_one_is_unsupported() {
        assert!(matches!(compute_cstar(CoreParams::new(1, 1)), Err(Error::Unsupported { .. })));
        assert!(matches!(fixed_point(2.0, CoreParams::new(1, 0)), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn h_vanishes_at_minimiser() {
        let prm = CoreParams::new(2, 2);
        let t = compute_cstar(prm).unwrap();
        assert!(big_h(prm, t.z_i_star, t.z_o_star).unwrap().abs() < 1e-8);
    }

    #[test]
    fn fixed_point_at_threshold_is_exact() {
        let prm = CoreParams::new(2, 2);
        let t = compute_cstar(prm).unwrap();
        let s = *fixed_point(t.c_star, prm).unwrap().supercritical().unwrap();
        assert_eq!(s.z_i, t.z_i_star);
        assert_eq!(s.iterations, 0);
        let r = t.c_star * p(2, s.z_i) * p_minus(2, s.z_o) - s.z_i;
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn subcritical_below_table_value() {
        let out = fixed_point(3.3, CoreParams::new(1, 2)).unwrap();
        assert!(!out.is_supercritical());
        assert_eq!(predict_core(3.3, CoreParams::new(1, 2), 1000).unwrap(), CorePrediction::Empty);
    }

    #[test]
    fn alpha_examples() {
        let e = std::f64::consts::E;
        assert_relative_eq!(alpha_bound(2, 3.4).unwrap(), 2.0 / (3.4 * e), max_relative = 1e-14);
        assert_relative_eq!(alpha_bound(2, 3.4).unwrap(), 0.21640, epsilon = 1e-5);
        let first = (e.powi(4) * 125.0 / 27.0).sqrt();
        assert_relative_eq!(alpha_bound(3, 5.0).unwrap(), first.min(3.0 / (5.0 * e)), max_relative = 1e-14);
        assert!(alpha_bound(1, 1.0).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        let e2 = std::f64::consts::E.powi(2);
        let expect = 4.0 + (4.0 * (4.0 * e2 / (2.0 * std::f64::consts::PI)).ln()).sqrt() - 1.0;
        assert_relative_eq!(asymptotic_cstar(4, AsymptoticVariant::Diagonal).unwrap(), expect, max_relative = 1e-15);
        assert!(matches!(asymptotic_cstar(2, AsymptoticVariant::ZeroK), Err(Error::NotApplicable(_))));
        assert!(matches!(asymptotic_cstar(1, AsymptoticVariant::Diagonal), Err(Error::Domain(_))));
        assert!(asymptotic_cstar(7, AsymptoticVariant::ZeroK).is_ok());
    }

    #[test]
    fn rounding_is_half_even() {
        assert_eq!(round3(3.8166), 3.817);
        assert_eq!(round3(1.0), 1.0);
        assert_eq!(round3(0.0625 / 8.0 + 0.0), 0.008);
    }
}
