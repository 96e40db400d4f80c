//! Poisson tails and the moments of a Poisson variable conditioned to be at
//! least `k`.
//!
//! Notation used throughout the crate:
//!
//! * `p_k(z) = P(Poi(z) >= k)`, with `p_k = 1` for `k <= 0`;
//! * `phi_r(z) = z P(Poi(z) = r-1) / p_r(z)`, with `phi_r = 0` for `r <= 0`;
//! * `psi_k(z) = z p_{k-1}(z) / p_k(z)`, the mean of `Poi(z)` conditioned on
//!   `Poi(z) >= k`.
//!
//! Two identities keep the small-`z` regime exact: `psi_k = z + phi_k`, and
//! `phi_k = k / S_k` where `S_k(z) = p_k(z) / P(Poi(z) = k)` is a series of
//! positive terms. Neither ever forms `1 - p` for `p` close to one.

use crate::error::{domain, Error, Result};

const SERIES_REL_EPS: f64 = 1e-18;
const SERIES_MAX_TERMS: usize = 100_000;

fn check_rate(z: f64) -> Result<()> {
    if z.is_nan() || z < 0.0 {
        return Err(domain(format!("Poisson rate must be non-negative, got {z}")));
    }
    Ok(())
}

/// `ln P(Poi(z) = j)`, evaluated through `lgamma` so that neither `z^j` nor
/// `j!` is ever formed.
pub(crate) fn ln_pmf(j: i64, z: f64) -> f64 {
    if j < 0 {
        return f64::NEG_INFINITY;
    }
    if z == 0.0 {
        return if j == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let jf = j as f64;
    jf * z.ln() - z - libm::lgamma(jf + 1.0)
}

pub(crate) fn pmf(j: i64, z: f64) -> f64 {
    ln_pmf(j, z).exp()
}

/// `S_k(z) = sum_{j >= k} z^(j-k) k! / j!`. Only used for `z < k`, where the
/// terms decay at least geometrically.
fn scaled_tail(k: i64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut j = k;
    for _ in 0..SERIES_MAX_TERMS {
        j += 1;
        term *= z / j as f64;
        sum += term;
        if term < SERIES_REL_EPS * sum && j as f64 > z {
            break;
        }
    }
    sum
}

/// Sum of `P(Poi(z) = j)` over `0 <= j < k`, accumulated from the largest
/// index downwards.
fn head(k: i64, z: f64) -> f64 {
    let mut term = pmf(k - 1, z);
    let mut sum = term;
    let mut j = k - 1;
    while j > 0 {
        term *= j as f64 / z;
        sum += term;
        j -= 1;
    }
    sum
}

pub(crate) fn tail(k: i64, z: f64) -> f64 {
    if k <= 0 {
        return 1.0;
    }
    if z == 0.0 {
        return 0.0;
    }
    if z < k as f64 {
        pmf(k, z) * scaled_tail(k, z)
    } else {
        1.0 - head(k, z)
    }
}

pub(crate) fn phi_unchecked(r: i64, z: f64) -> f64 {
    if r <= 0 {
        return 0.0;
    }
    if z == 0.0 {
        return r as f64;
    }
    if z < r as f64 {
        r as f64 / scaled_tail(r, z)
    } else {
        z * pmf(r - 1, z) / tail(r, z)
    }
}

pub(crate) fn psi_unchecked(k: u32, z: f64) -> f64 {
    z + phi_unchecked(k as i64, z)
}

pub(crate) fn var_unchecked(k: u32, z: f64) -> f64 {
    let k = k as i64;
    psi_unchecked(k as u32, z) * (1.0 - phi_unchecked(k, z) + phi_unchecked(k - 1, z))
}

/// `P(Z = k)` for `Z ~ Poi(z)` conditioned on `Z >= k`.
pub(crate) fn mass_at_floor(k: u32, z: f64) -> f64 {
    if k == 0 {
        (-z).exp()
    } else {
        phi_unchecked(k as i64, z) / k as f64
    }
}

/// `P(Poi(z) >= k)`. For `k <= 0` this is exactly one.
pub fn poisson_tail(k: i64, z: f64) -> Result<f64> {
    check_rate(z)?;
    Ok(tail(k, z))
}

/// `P(Poi(z) = j)`.
pub fn poisson_pmf(j: u32, z: f64) -> Result<f64> {
    check_rate(z)?;
    Ok(pmf(j as i64, z))
}

/// Mean of `Poi(z)` conditioned on `Poi(z) >= k`. Tends to `k` as `z -> 0+`.
pub fn psi(k: u32, z: f64) -> Result<f64> {
    check_rate(z)?;
    Ok(psi_unchecked(k, z))
}

/// `z P(Poi(z) = r-1) / P(Poi(z) >= r)`; zero for `r <= 0`, decreasing in `z`
/// from `phi_r(0+) = r`.
pub fn phi(r: i64, z: f64) -> Result<f64> {
    check_rate(z)?;
    Ok(phi_unchecked(r, z))
}

/// Variance of `Poi(z)` conditioned on `Poi(z) >= k`, as
/// `psi_k(z) (1 - phi_k(z) + phi_{k-1}(z))`.
pub fn trunc_var(k: u32, z: f64) -> Result<f64> {
    check_rate(z)?;
    Ok(var_unchecked(k, z))
}

/// The unique `z > 0` with `psi_k(z) = target`.
pub fn invert_psi(k: u32, target: f64) -> Result<f64> {
    let kf = k as f64;
    if !(target > kf) || !target.is_finite() {
        return Err(Error::NoRoot { k, target });
    }
    if k == 0 {
        return Ok(target);
    }
    let mut lo = (target - kf).max(1e-12) * 1e-3;
    let mut hi = target;
    while psi_unchecked(k, lo) > target && lo > f64::MIN_POSITIVE {
        lo *= 1e-3;
    }
    while psi_unchecked(k, hi) < target {
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if psi_unchecked(k, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(newton_polish(k, target, 0.5 * (lo + hi), lo, hi))
}

/// As [`invert_psi`], starting from a nearby root estimate. Used along ODE
/// trajectories where consecutive targets differ very little.
pub fn invert_psi_near(k: u32, target: f64, hint: f64) -> Result<f64> {
    let kf = k as f64;
    if !(target > kf) || !target.is_finite() {
        return Err(Error::NoRoot { k, target });
    }
    if k == 0 {
        return Ok(target);
    }
    if !(hint > 0.0) || !hint.is_finite() {
        return invert_psi(k, target);
    }
    let mut lo = hint;
    let mut hi = hint;
    let mut tries = 0;
    while psi_unchecked(k, lo) > target {
        lo *= 0.5;
        tries += 1;
        if tries > 60 {
            return invert_psi(k, target);
        }
    }
    while psi_unchecked(k, hi) < target {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return invert_psi(k, target);
        }
    }
    Ok(newton_polish(k, target, hint.clamp(lo, hi), lo, hi))
}

/// Safeguarded Newton on `psi_k(z) - target` inside `[lo, hi]`, using
/// `d psi_k / dz = Var / z`.
fn newton_polish(k: u32, target: f64, start: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut z = start;
    for _ in 0..100 {
        let f = psi_unchecked(k, z) - target;
        if f == 0.0 {
            return z;
        }
        if f < 0.0 {
            lo = lo.max(z);
        } else {
            hi = hi.min(z);
        }
        let slope = var_unchecked(k, z) / z;
        let mut next = z - f / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - z).abs() <= 4.0 * f64::EPSILON * z {
            return next;
        }
        z = next;
    }
    z
}

/// A Poisson law truncated from below: `Poi(z)` conditioned on `Poi(z) >= k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncSpec {
    pub k: u32,
    pub z: f64,
}

impl TruncSpec {
    pub fn new(k: u32, z: f64) -> Result<Self> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(domain(format!("truncated Poisson needs a positive finite rate, got {z}")));
        }
        Ok(Self { k, z })
    }

    /// Rate whose conditioned mean equals `mean`.
    pub fn with_mean(k: u32, mean: f64) -> Result<Self> {
        Ok(Self { k, z: invert_psi(k, mean)? })
    }

    pub fn mean(&self) -> f64 {
        psi_unchecked(self.k, self.z)
    }

    pub fn variance(&self) -> f64 {
        var_unchecked(self.k, self.z)
    }

    /// Probability that the conditioned variable takes its smallest value `k`.
    pub fn mass_at_floor(&self) -> f64 {
        mass_at_floor(self.k, self.z)
    }

    /// Unconditioned tail `P(Poi(z) >= k)`.
    pub fn tail(&self) -> f64 {
        tail(self.k as i64, self.z)
    }

    pub fn pmf(&self, j: u32) -> f64 {
        if j < self.k {
            0.0
        } else {
            pmf(j as i64, self.z) / self.tail()
        }
    }
}
