//! Closed-form predictions for the LPHVG of an i.i.d. series drawn from any
//! continuous density.
//!
//! All functions here are pure. The degree law is geometric on
//! `k = 2(rho+1), 2(rho+1)+1, ...`:
//!
//! ```text
//! P(k) = 1/(2rho+3) * ((2rho+2)/(2rho+3))^(k - 2(rho+1))
//! ```
//!
//! The long-range link probability is exposed in two forms:
//! [`long_visibility_prob`] is the published closed form, and
//! [`exact_link_probability`] is the rank-counting result. They agree for
//! `rho <= 1` only; see the function docs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Penetrability;

/// Bundle of the predictions for one penetrability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryModel {
    pub rho: Penetrability,
    /// Decay rate of the degree law, `ln((2rho+3)/(2rho+2))`.
    pub lambda: f64,
}

impl TheoryModel {
    pub fn new(rho: Penetrability) -> Self {
        Self {
            rho,
            lambda: decay_rate(rho),
        }
    }

    pub fn degree_pmf(&self, k: usize) -> f64 {
        degree_pmf(self.rho, k)
    }

    pub fn mean_degree(&self) -> f64 {
        mean_degree(self.rho)
    }
}

/// Geometric degree law; zero below the support.
pub fn degree_pmf(rho: Penetrability, k: usize) -> f64 {
    let r = rho.get() as f64;
    let k_min = rho.min_degree();
    if k < k_min {
        return 0.0;
    }
    let ratio = (2.0 * r + 2.0) / (2.0 * r + 3.0);
    let excess = (k - k_min) as i32;
    if excess as usize == k - k_min {
        ratio.powi(excess) / (2.0 * r + 3.0)
    } else {
        ((k - k_min) as f64 * ratio.ln()).exp() / (2.0 * r + 3.0)
    }
}

pub fn decay_rate(rho: Penetrability) -> f64 {
    let r = rho.get() as f64;
    ((2.0 * r + 3.0) / (2.0 * r + 2.0)).ln()
}

/// Mean degree of the infinite i.i.d. graph, `4(rho+1)`.
pub fn mean_degree(rho: Penetrability) -> f64 {
    4.0 * (rho.get() as f64 + 1.0)
}

/// Mean degree for a periodic series with `period` distinct values per period,
/// `4(rho+1)(1 - (2rho+1)/(2T))`. Requires `period > 2rho + 1`.
pub fn mean_degree_periodic(rho: Penetrability, period: usize) -> Result<f64> {
    let r = rho.get();
    if period <= 2 * r + 1 {
        return Err(Error::OutOfDomain(format!(
            "period {period} must exceed 2*rho + 1 = {}",
            2 * r + 1
        )));
    }
    let r = r as f64;
    Ok(4.0 * (r + 1.0) * (1.0 - (2.0 * r + 1.0) / (2.0 * period as f64)))
}

/// Whether bounds are requested inside the proven range `rho <= 2` only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundScope {
    #[default]
    Proven,
    /// Evaluate the same expressions for any `rho`; results are flagged.
    AllowUnvalidated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringBound {
    pub value: f64,
    /// Evaluated below the degree range the bound was derived for.
    pub extrapolated: bool,
    /// Evaluated for `rho > 2`.
    pub unvalidated: bool,
}

const PROVEN_MAX_RHO: usize = 2;

fn check_scope(rho: Penetrability, scope: BoundScope) -> Result<bool> {
    let unvalidated = rho.get() > PROVEN_MAX_RHO;
    if unvalidated && scope == BoundScope::Proven {
        return Err(Error::OutOfDomain(format!(
            "clustering bounds are established for rho in {{0, 1, 2}}, got {rho}"
        )));
    }
    Ok(unvalidated)
}

fn min_bound_value(r: f64, k: f64) -> f64 {
    2.0 / k + 2.0 * r * (k - 2.0) / (k * (k - 1.0))
}

fn max_bound_value(r: f64, k: f64) -> f64 {
    2.0 / k + 4.0 * r * (k - 3.0) / (k * (k - 1.0))
}

/// Lower clustering bound `2/k + 2rho(k-2)/(k(k-1))`, for `k >= 2(rho+1)`.
pub fn clustering_min(rho: Penetrability, k: usize, scope: BoundScope) -> Result<ClusteringBound> {
    let unvalidated = check_scope(rho, scope)?;
    if k < rho.min_degree() {
        return Err(Error::OutOfDomain(format!(
            "degree {k} below 2(rho+1) = {}",
            rho.min_degree()
        )));
    }
    Ok(ClusteringBound {
        value: min_bound_value(rho.get() as f64, k as f64),
        extrapolated: false,
        unvalidated,
    })
}

/// Upper clustering bound `2/k + 4rho(k-3)/(k(k-1))`, derived for `k >= 2(2rho+1)`.
///
/// For `2(rho+1) <= k < 2(2rho+1)` the same expression capped at 1 is
/// returned with `extrapolated` set.
pub fn clustering_max(rho: Penetrability, k: usize, scope: BoundScope) -> Result<ClusteringBound> {
    let unvalidated = check_scope(rho, scope)?;
    if k < rho.min_degree() {
        return Err(Error::OutOfDomain(format!(
            "degree {k} below 2(rho+1) = {}",
            rho.min_degree()
        )));
    }
    let value = max_bound_value(rho.get() as f64, k as f64);
    let extrapolated = k < 2 * (2 * rho.get() + 1);
    Ok(ClusteringBound {
        value: if extrapolated { value.min(1.0) } else { value },
        extrapolated,
        unvalidated,
    })
}

/// Which bound curve a clustering value is read against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCurve {
    Min,
    Max,
}

impl BoundCurve {
    /// Quadratic coefficients: the bound equals `(alpha*k - beta) / C(k,2)`.
    fn triangle_terms(self, r: f64) -> (f64, f64) {
        match self {
            BoundCurve::Min => (r + 1.0, 2.0 * r + 1.0),
            BoundCurve::Max => (2.0 * r + 1.0, 6.0 * r + 1.0),
        }
    }

    fn k_floor(self, rho: Penetrability) -> usize {
        match self {
            BoundCurve::Min => rho.min_degree(),
            BoundCurve::Max => 2 * (2 * rho.get() + 1),
        }
    }
}

/// Degree at which the bound curve takes value `c`: the larger root of
/// `c k^2 - (c + 2 alpha) k + 2 beta = 0`.
pub fn degree_for_clustering(rho: Penetrability, c: f64, curve: BoundCurve) -> Option<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return None;
    }
    let (alpha, beta) = curve.triangle_terms(rho.get() as f64);
    let phi = c + 2.0 * alpha;
    let disc = phi * phi - 8.0 * c * beta;
    if disc < 0.0 {
        return None;
    }
    Some((phi + disc.sqrt()) / (2.0 * c))
}

/// Probability of observing the bound value `c`, i.e. the degree law evaluated
/// at the degree that the bound curve maps to `c`.
///
/// `c` must be attained by the curve at an integer degree inside the curve's
/// derived range (`k >= 2(rho+1)` for the minimum, `k >= 2(2rho+1)` for the
/// maximum), up to a relative tolerance of `1e-9`.
pub fn clustering_pmf(rho: Penetrability, c: f64, curve: BoundCurve, scope: BoundScope) -> Result<f64> {
    check_scope(rho, scope)?;
    let unattainable = || Error::Unattainable { rho: rho.get(), c };
    let k = degree_for_clustering(rho, c, curve).ok_or_else(unattainable)?;
    let k_int = k.round();
    if k_int < curve.k_floor(rho) as f64 || (k - k_int).abs() > 1e-6 * k_int.max(1.0) {
        return Err(unattainable());
    }
    let r = rho.get() as f64;
    let back = match curve {
        BoundCurve::Min => min_bound_value(r, k_int),
        BoundCurve::Max => max_bound_value(r, k_int),
    };
    if (back - c).abs() > 1e-9 * c.abs().max(1.0) {
        return Err(unattainable());
    }
    let ln_ratio = ((2.0 * r + 2.0) / (2.0 * r + 3.0)).ln();
    Ok(((k - 2.0 * (r + 1.0)) * ln_ratio).exp() / (2.0 * r + 3.0))
}

pub fn clustering_pmf_min(rho: Penetrability, c: f64) -> Result<f64> {
    clustering_pmf(rho, c, BoundCurve::Min, BoundScope::Proven)
}

pub fn clustering_pmf_max(rho: Penetrability, c: f64) -> Result<f64> {
    clustering_pmf(rho, c, BoundCurve::Max, BoundScope::Proven)
}

/// Published long-range link probability, `(2rho(rho+1)+2) / (sep(sep+1))`.
///
/// `sep = j - i` is the index separation, so `sep - 1` samples lie between
/// the two points. Pairs with `sep <= rho + 1` have at most `rho`
/// intermediates and are always linked, so 1 is returned there; the closed
/// form is used from `sep >= rho + 2` and clamped to `[0, 1]`.
///
/// For `rho >= 2` this expression does not match simulations; compare
/// [`exact_link_probability`].
pub fn long_visibility_prob(rho: Penetrability, sep: usize) -> Result<f64> {
    if sep < 1 {
        return Err(Error::OutOfDomain("separation must be at least 1".into()));
    }
    if sep <= rho.get() + 1 {
        return Ok(1.0);
    }
    let r = rho.get() as f64;
    let s = sep as f64;
    Ok(((2.0 * r * (r + 1.0) + 2.0) / (s * (s + 1.0))).clamp(0.0, 1.0))
}

/// Link probability by rank counting: `(rho+1)(rho+2) / (sep(sep+1))`, capped at 1.
///
/// Among the `sep + 1` exchangeable samples from `i` to `j`, the pair is
/// linked iff the smaller endpoint ranks within the top `rho + 2`. The
/// smaller endpoint has top-rank `r` in `r - 1` of the `C(sep+1, 2)` equally
/// likely endpoint placements, and summing `r - 1` over `r = 2..rho+2` gives
/// `(rho+1)(rho+2)/2`. Summed over all separations this reproduces the mean
/// degree `4(rho+1)` for every `rho`.
pub fn exact_link_probability(rho: Penetrability, sep: usize) -> Result<f64> {
    if sep < 1 {
        return Err(Error::OutOfDomain("separation must be at least 1".into()));
    }
    let r = rho.get() as f64;
    let s = sep as f64;
    Ok(((r + 1.0) * (r + 2.0) / (s * (s + 1.0))).min(1.0))
}

/// Smallest `k_max` such that the geometric tail beyond it has mass below `tail_mass`.
pub fn truncation_degree(rho: Penetrability, tail_mass: f64) -> usize {
    // mass above k is ratio^(k - k_min + 1)
    let steps = (tail_mass.ln() / -decay_rate(rho)).floor().max(0.0) as usize;
    rho.min_degree() + steps
}
