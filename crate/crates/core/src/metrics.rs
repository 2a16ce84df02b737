//! Empirical graph statistics and comparisons against the i.i.d. theory.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{build_lphvg, VisibilityGraph};
use crate::error::{Error, Result};
use crate::series::{Penetrability, RngConfig, TimeSeries};
use crate::theory::{self, BoundScope};

/// Graphs up to this size get exact all-pairs path lengths.
pub const EXACT_PATH_LENGTH_LIMIT: usize = 2000;
/// Pairs sampled for larger graphs when the caller does not say.
pub const DEFAULT_PATH_SAMPLES: usize = 10_000;

/// Degree histogram.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DegreeDistribution {
    counts: BTreeMap<usize, u64>,
    n: u64,
}

impl DegreeDistribution {
    pub fn from_graph(graph: &VisibilityGraph) -> Self {
        Self::from_degrees(graph.degrees())
    }

    pub fn from_degrees(degrees: impl IntoIterator<Item = usize>) -> Self {
        let mut counts = BTreeMap::new();
        let mut n = 0;
        for d in degrees {
            *counts.entry(d).or_insert(0) += 1;
            n += 1;
        }
        Self { counts, n }
    }

    /// Histogram from explicit `(degree, count)` pairs; zero counts are dropped.
    pub fn from_counts(pairs: impl IntoIterator<Item = (usize, u64)>) -> Self {
        let mut counts = BTreeMap::new();
        for (k, c) in pairs {
            if c > 0 {
                *counts.entry(k).or_insert(0) += c;
            }
        }
        let n = counts.values().sum();
        Self { counts, n }
    }

    /// Pool several histograms (an ensemble) into one.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a DegreeDistribution>) -> Self {
        let mut out = Self::default();
        for part in parts {
            for (&k, &c) in &part.counts {
                *out.counts.entry(k).or_insert(0) += c;
            }
            out.n += part.n;
        }
        out
    }

    pub fn node_count(&self) -> u64 {
        self.n
    }

    pub fn count(&self, k: usize) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn pmf(&self, k: usize) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.count(k) as f64 / self.n as f64
        }
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.counts.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.iter().map(|(k, c)| k as f64 * c as f64).sum::<f64>() / self.n as f64
    }
}

pub fn degree_distribution(graph: &VisibilityGraph) -> DegreeDistribution {
    DegreeDistribution::from_graph(graph)
}

/// Triangles through `node` over `C(k, 2)`; 0 for `k < 2`.
pub fn local_clustering(graph: &VisibilityGraph, node: usize) -> f64 {
    let nbrs = graph.neighbors(node);
    let k = nbrs.len();
    if k < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for &a in nbrs {
        links += sorted_intersection_len(graph.neighbors(a), nbrs);
    }
    // every neighbour pair was counted from both ends
    (links / 2) as f64 / (k * (k - 1) / 2) as f64
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub fn clustering_coefficients(graph: &VisibilityGraph) -> Vec<f64> {
    (0..graph.node_count()).map(|i| local_clustering(graph, i)).collect()
}

pub fn mean_degree_empirical(graph: &VisibilityGraph) -> f64 {
    2.0 * graph.edge_count() as f64 / graph.node_count() as f64
}

pub fn mean_clustering(graph: &VisibilityGraph) -> f64 {
    clustering_coefficients(graph).iter().sum::<f64>() / graph.node_count() as f64
}

fn bfs_distances(graph: &VisibilityGraph, source: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) {
    dist.iter_mut().for_each(|d| *d = u32::MAX);
    dist[source] = 0;
    queue.clear();
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1;
        for &v in graph.neighbors(u) {
            if dist[v] == u32::MAX {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
}

/// Average shortest-path length over distinct node pairs.
///
/// Exact for graphs with at most [`EXACT_PATH_LENGTH_LIMIT`] nodes; otherwise
/// averaged over `sample_pairs` (default [`DEFAULT_PATH_SAMPLES`]) uniformly
/// drawn ordered pairs.
pub fn mean_path_length(graph: &VisibilityGraph, sample_pairs: Option<usize>, rng: RngConfig) -> Result<f64> {
    if sample_pairs == Some(0) {
        return Err(Error::param("sample_pairs must be positive"));
    }
    let n = graph.node_count();
    if n < 2 {
        return Ok(0.0);
    }
    if n <= EXACT_PATH_LENGTH_LIMIT {
        let total: u64 = (0..n)
            .into_par_iter()
            .map_init(
                || (vec![0u32; n], VecDeque::with_capacity(n)),
                |(dist, queue), s| {
                    bfs_distances(graph, s, dist, queue);
                    dist.iter().map(|&d| d as u64).sum::<u64>()
                },
            )
            .sum();
        return Ok(total as f64 / (n * (n - 1)) as f64);
    }

    let samples = sample_pairs.unwrap_or(DEFAULT_PATH_SAMPLES);
    let mut r = rng.rng();
    let mut pairs: Vec<(usize, usize)> = (0..samples)
        .map(|_| {
            let a = r.random_range(0..n);
            let mut b = r.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        })
        .collect();
    pairs.sort_unstable();
    let mut dist = vec![0u32; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut current = usize::MAX;
    let mut total = 0u64;
    for (a, b) in pairs {
        if a != current {
            bfs_distances(graph, a, &mut dist, &mut queue);
            current = a;
        }
        total += dist[b] as u64;
    }
    Ok(total as f64 / samples as f64)
}

/// Relative error of the empirical degree law against the i.i.d. prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSizeReport {
    /// `(k, E(k))` for every `k` from `2(rho+1)` to the largest observed degree.
    pub per_k: Vec<(usize, f64)>,
    /// Mean of `E(k)` over `per_k`.
    pub me: f64,
    /// Sum of `E(k)` over `per_k`.
    pub me_sum: f64,
    /// First `k >= 2(rho+1)` with no observations or `E(k)` above the threshold.
    pub k0: usize,
}

/// Default `E(k)` level that marks the onset of finite-size effects.
pub const DEFAULT_E_THRESHOLD: f64 = 1.0;

pub fn relative_error(dist: &DegreeDistribution, rho: Penetrability, k: usize) -> f64 {
    let expected = theory::degree_pmf(rho, k);
    (dist.pmf(k) - expected).abs() / expected
}

pub fn finite_size_report(dist: &DegreeDistribution, rho: Penetrability, e_threshold: f64) -> FiniteSizeReport {
    let k_lo = rho.min_degree();
    let k_max = dist.max_degree().unwrap_or(0);
    let per_k: Vec<(usize, f64)> = (k_lo..=k_max).map(|k| (k, relative_error(dist, rho, k))).collect();
    let me_sum: f64 = per_k.iter().map(|&(_, e)| e).sum();
    let me = if per_k.is_empty() {
        0.0
    } else {
        me_sum / per_k.len() as f64
    };
    let k0 = per_k
        .iter()
        .find(|&&(k, e)| dist.count(k) == 0 || e > e_threshold)
        .map(|&(k, _)| k)
        .unwrap_or(k_max.max(k_lo - 1) + 1);
    FiniteSizeReport {
        per_k,
        me,
        me_sum,
        k0,
    }
}

/// Least-squares line through `ln P(k)` versus `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Negated slope.
    pub lambda_hat: f64,
    pub stderr: f64,
    /// Smallest and largest degree used.
    pub k_range: (usize, usize),
    pub r2: f64,
    pub bins: usize,
}

/// Bins with fewer observations are left out of the tail fit.
pub const MIN_BIN_COUNT: u64 = 5;
const MIN_FIT_BINS: usize = 4;

/// Fit the exponential tail over `k` in `[2(rho+1), k_hi]`, using only bins with at least
/// [`MIN_BIN_COUNT`] observations. `k_hi` defaults to `k0` at [`DEFAULT_E_THRESHOLD`].
pub fn fit_tail(dist: &DegreeDistribution, rho: Penetrability, k_hi: Option<usize>) -> Result<TailFit> {
    let k_hi = k_hi.unwrap_or_else(|| finite_size_report(dist, rho, DEFAULT_E_THRESHOLD).k0);
    let points: Vec<(f64, f64)> = (rho.min_degree()..=k_hi)
        .filter(|&k| dist.count(k) >= MIN_BIN_COUNT)
        .map(|k| (k as f64, dist.pmf(k).ln()))
        .collect();
    if points.len() < MIN_FIT_BINS {
        return Err(Error::InsufficientBins {
            found: points.len(),
            needed: MIN_FIT_BINS,
            min_count: MIN_BIN_COUNT,
        });
    }
    let m = points.len() as f64;
    let mean_k = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_k).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_k) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_k;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let stderr = (rss / (m - 2.0) / sxx).sqrt();
    let r2 = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    Ok(TailFit {
        lambda_hat: -slope,
        stderr,
        k_range: (points[0].0 as usize, points[points.len() - 1].0 as usize),
        r2,
        bins: points.len(),
    })
}

/// Interior nodes whose clustering lies within the theoretical bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCoverage {
    pub interior: usize,
    pub inside: usize,
    pub fraction: f64,
    /// `rho > 2`: the bounds are applied outside their proven range.
    pub unvalidated: bool,
}

const BOUND_SLACK: f64 = 1e-12;

/// Fraction of interior nodes (`rho + 1 <= i <= n - rho - 2`) with
/// `C_min(k) <= C <= C_max(k)`, the max being capped at 1 below its domain.
pub fn clustering_coverage(graph: &VisibilityGraph) -> Result<BoundCoverage> {
    let rho = graph.rho();
    let n = graph.node_count();
    let lo = rho.get() + 1;
    let hi = n.saturating_sub(rho.get() + 2);
    let mut interior = 0;
    let mut inside = 0;
    let mut unvalidated = false;
    for i in lo..=hi.min(n.saturating_sub(1)) {
        if i > hi {
            break;
        }
        let k = graph.degree(i);
        interior += 1;
        if k < rho.min_degree() {
            continue;
        }
        let c = local_clustering(graph, i);
        let cmin = theory::clustering_min(rho, k, BoundScope::AllowUnvalidated)?;
        let cmax = theory::clustering_max(rho, k, BoundScope::AllowUnvalidated)?;
        unvalidated |= cmin.unvalidated;
        if cmin.value - BOUND_SLACK <= c && c <= cmax.value + BOUND_SLACK {
            inside += 1;
        }
    }
    Ok(BoundCoverage {
        interior,
        inside,
        fraction: if interior == 0 { 0.0 } else { inside as f64 / interior as f64 },
        unvalidated,
    })
}

/// Linked pairs versus all pairs at one index separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LinkTally {
    pub sep: usize,
    pub linked: u64,
    pub pairs: u64,
}

impl LinkTally {
    pub fn frequency(&self) -> f64 {
        self.linked as f64 / self.pairs as f64
    }
}

/// Link tallies for separations `1..=max_sep` (those that fit in the graph).
pub fn link_frequency(graph: &VisibilityGraph, max_sep: usize) -> Vec<LinkTally> {
    let n = graph.node_count();
    let max_sep = max_sep.min(n.saturating_sub(1));
    let mut tallies: Vec<LinkTally> = (1..=max_sep)
        .map(|sep| LinkTally {
            sep,
            linked: 0,
            pairs: (n - sep) as u64,
        })
        .collect();
    for (i, j) in graph.edges() {
        let sep = j - i;
        if sep <= max_sep {
            tallies[sep - 1].linked += 1;
        }
    }
    tallies
}

pub fn merge_link_tallies(into: &mut Vec<LinkTally>, other: &[LinkTally]) {
    if into.len() < other.len() {
        into.extend(other[into.len()..].iter().map(|t| LinkTally {
            sep: t.sep,
            ..Default::default()
        }));
    }
    for (a, b) in into.iter_mut().zip(other) {
        a.linked += b.linked;
        a.pairs += b.pairs;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConsistentWithIid,
    Deviating,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::ConsistentWithIid => "consistent-with-iid",
            Verdict::Deviating => "deviating",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationConfig {
    /// Allowed `|lambda_hat - lambda| / stderr`.
    pub sigma_tolerance: f64,
    /// Required clustering-bound coverage.
    pub min_coverage: f64,
    /// Below this length a warning is attached; the analysis still runs.
    pub soft_min_len: usize,
}

impl Default for DiscriminationConfig {
    fn default() -> Self {
        Self {
            sigma_tolerance: 3.0,
            min_coverage: 0.99,
            soft_min_len: 500,
        }
    }
}

/// Everything [`discriminate`] computed, plus the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationRecord {
    pub verdict: Verdict,
    pub rho: Penetrability,
    pub n: usize,
    pub lambda: f64,
    /// Absent when the degree histogram has too few populated bins to fit.
    pub fit: Option<TailFit>,
    /// `|lambda_hat - lambda| / stderr`.
    pub lambda_z: Option<f64>,
    pub lambda_consistent: bool,
    pub coverage: BoundCoverage,
    pub coverage_consistent: bool,
    pub mean_degree: f64,
    pub finite_size: FiniteSizeReport,
    pub config: DiscriminationConfig,
    pub warnings: Vec<String>,
}

/// Randomness-versus-structure test: the series is consistent with i.i.d.
/// noise iff the fitted tail decay matches `ln((2rho+3)/(2rho+2))` within
/// `sigma_tolerance` standard errors and the clustering-bound coverage
/// reaches `min_coverage`.
pub fn discriminate(series: &TimeSeries, rho: Penetrability, config: &DiscriminationConfig) -> Result<DiscriminationRecord> {
    let mut warnings = Vec::new();
    if series.len() < config.soft_min_len {
        warnings.push(format!(
            "series has {} samples; below {} the test has little statistical power",
            series.len(),
            config.soft_min_len
        ));
    }
    let graph = build_lphvg(series, rho)?;
    let dist = DegreeDistribution::from_graph(&graph);
    let lambda = theory::decay_rate(rho);
    let fit = match fit_tail(&dist, rho, None) {
        Ok(fit) => Some(fit),
        Err(Error::InsufficientBins { found, .. }) => {
            warnings.push(format!(
                "only {found} populated degree bins below the finite-size cutoff; no exponential tail to fit"
            ));
            None
        }
        Err(e) => return Err(e),
    };
    let lambda_z = fit.map(|f| (f.lambda_hat - lambda).abs() / f.stderr);
    let lambda_consistent = fit
        .map(|f| (f.lambda_hat - lambda).abs() <= config.sigma_tolerance * f.stderr)
        .unwrap_or(false);
    let coverage = clustering_coverage(&graph)?;
    let coverage_consistent = coverage.fraction >= config.min_coverage;
    let verdict = if lambda_consistent && coverage_consistent {
        Verdict::ConsistentWithIid
    } else {
        Verdict::Deviating
    };
    Ok(DiscriminationRecord {
        verdict,
        rho,
        n: series.len(),
        lambda,
        fit,
        lambda_z,
        lambda_consistent,
        coverage,
        coverage_consistent,
        mean_degree: mean_degree_empirical(&graph),
        finite_size: finite_size_report(&dist, rho, DEFAULT_E_THRESHOLD),
        config: *config,
        warnings,
    })
}
