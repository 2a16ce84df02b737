//! Sliding-window evolution: one graph per window, pairwise graph distances,
//! a threshold from random reference series, and the resulting correlation
//! and recurrence matrices.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{build_lphvg, VisibilityGraph};
use crate::error::{param, Error, Result};
use crate::generators::{gen_iid, IidFamily, IidSpec};
use crate::matrix::SquareMatrix;
use crate::metrics::{mean_clustering, mean_degree_empirical, mean_path_length};
use crate::series::{Penetrability, RngConfig, TimeSeries};

/// Reference series used for the threshold when the caller does not say.
pub const DEFAULT_ENSEMBLE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    window_len: usize,
    step: usize,
}

impl WindowConfig {
    /// Requires `0 < step < window_len`.
    pub fn new(window_len: usize, step: usize) -> Result<Self> {
        if step == 0 || step >= window_len {
            return Err(param(format!(
                "window step must satisfy 0 < step < window_len (got step={step}, window_len={window_len})"
            )));
        }
        Ok(Self { window_len, step })
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn step(&self) -> usize {
        self.step
    }
}

/// `floor((n - L) / l) + 1` windows `[i l, i l + L)`.
pub fn make_windows(n: usize, cfg: WindowConfig) -> Result<Vec<Range<usize>>> {
    if n < cfg.window_len {
        return Err(Error::SeriesTooShort {
            len: n,
            min: cfg.window_len,
        });
    }
    let count = (n - cfg.window_len) / cfg.step + 1;
    Ok((0..count).map(|i| i * cfg.step..i * cfg.step + cfg.window_len).collect())
}

/// Square root of the number of ordered pairs on which the adjacency
/// matrices differ.
pub fn graph_distance(a: &VisibilityGraph, b: &VisibilityGraph) -> Result<f64> {
    if a.node_count() != b.node_count() {
        return Err(Error::SizeMismatch {
            left: a.node_count(),
            right: b.node_count(),
        });
    }
    let differing: usize = (0..a.node_count())
        .map(|i| symmetric_difference_len(a.neighbors(i), b.neighbors(i)))
        .sum();
    Ok((differing as f64).sqrt())
}

fn symmetric_difference_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

/// Pairwise [`graph_distance`] matrix; symmetric with a zero diagonal.
pub fn distance_matrix(graphs: &[VisibilityGraph]) -> Result<SquareMatrix<f64>> {
    let t = graphs.len();
    let rows: Vec<Vec<f64>> = (0..t)
        .into_par_iter()
        .map(|i| {
            (i + 1..t)
                .map(|j| graph_distance(&graphs[i], &graphs[j]))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut d = SquareMatrix::filled(t, 0.0);
    for (i, row) in rows.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let j = i + 1 + offset;
            d.set(i, j, v);
            d.set(j, i, v);
        }
    }
    Ok(d)
}

fn window_graphs(series: &TimeSeries, rho: Penetrability, windows: &[Range<usize>]) -> Result<Vec<VisibilityGraph>> {
    windows
        .par_iter()
        .map(|w| build_lphvg(&series.slice(w.clone()), rho))
        .collect()
}

/// Mean degree, mean clustering and mean shortest-path length of one window graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowMetrics {
    pub mean_degree: f64,
    pub mean_clustering: f64,
    pub mean_path_length: f64,
}

fn window_metrics(graphs: &[VisibilityGraph], rng: RngConfig) -> Result<Vec<WindowMetrics>> {
    graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            Ok(WindowMetrics {
                mean_degree: mean_degree_empirical(g),
                mean_clustering: mean_clustering(g),
                mean_path_length: mean_path_length(g, None, rng.substream(i as u64))?,
            })
        })
        .collect()
}

fn min_off_diagonal(d: &SquareMatrix<f64>) -> Option<f64> {
    d.off_diagonal().min_by(f64::total_cmp)
}

fn reference_series(series_len: usize, rng: RngConfig, member: usize) -> Result<TimeSeries> {
    gen_iid(&IidSpec {
        family: IidFamily::Uniform,
        n: series_len,
        rng: rng.substream(member as u64),
    })
}

/// Smallest off-diagonal window distance over `ensemble` uniform i.i.d.
/// series of length `series_len`. Member `k` uses stream `rng.stream + k`, so
/// a larger ensemble extends a smaller one.
pub fn threshold_from_random(
    cfg: WindowConfig,
    series_len: usize,
    rho: Penetrability,
    rng: RngConfig,
    ensemble: usize,
) -> Result<f64> {
    Ok(reference_run(cfg, series_len, rho, rng, ensemble, false)?.theta)
}

struct Reference {
    theta: f64,
    metrics: Vec<WindowMetrics>,
}

fn reference_run(
    cfg: WindowConfig,
    series_len: usize,
    rho: Penetrability,
    rng: RngConfig,
    ensemble: usize,
    with_metrics: bool,
) -> Result<Reference> {
    if ensemble == 0 {
        return Err(param("reference ensemble must hold at least one series"));
    }
    let windows = make_windows(series_len, cfg)?;
    if windows.len() < 2 {
        return Err(param(format!(
            "a series of length {series_len} gives a single window; the threshold needs at least two"
        )));
    }
    let mut theta = f64::INFINITY;
    let mut metrics = Vec::new();
    for member in 0..ensemble {
        let s = reference_series(series_len, rng, member)?;
        let graphs = window_graphs(&s, rho, &windows)?;
        let d = distance_matrix(&graphs)?;
        theta = theta.min(min_off_diagonal(&d).expect("at least two windows"));
        if with_metrics {
            metrics.extend(window_metrics(&graphs, rng.substream(((member + 1) as u64) << 32))?);
        }
    }
    Ok(Reference { theta, metrics })
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_nan() || theta <= 0.0 {
        return Err(param(format!("threshold must be positive (got {theta})")));
    }
    Ok(())
}

/// `1 - d / theta` where `d < theta`, else 0.
pub fn correlation_index(distances: &SquareMatrix<f64>, theta: f64) -> Result<SquareMatrix<f64>> {
    check_theta(theta)?;
    Ok(distances.map(|d| if d < theta { 1.0 - d / theta } else { 0.0 }))
}

/// 1 where `d < theta`, else 0.
pub fn recurrence_matrix(distances: &SquareMatrix<f64>, theta: f64) -> Result<SquareMatrix<u8>> {
    check_theta(theta)?;
    Ok(distances.map(|d| u8::from(theta - d > 0.0)))
}

/// Mean and standard deviation of a window metric over the reference ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub mean: f64,
    pub sd: f64,
}

impl Band {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count() as f64;
        let mean = values.clone().sum::<f64>() / n;
        let var = if n > 1.0 {
            values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Band { mean, sd: var.sqrt() }
    }
}

/// Numerical i.i.d. baseline for the window metrics, from the same random
/// series that define the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomBaseline {
    pub mean_degree: Band,
    pub mean_clustering: Band,
    pub mean_path_length: Band,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub rho: Penetrability,
    pub windows: Vec<Range<usize>>,
    pub per_window: Vec<WindowMetrics>,
    pub distances: SquareMatrix<f64>,
    pub theta: f64,
    pub gamma: SquareMatrix<f64>,
    pub recurrence: SquareMatrix<u8>,
    pub baseline: RandomBaseline,
}

impl EvolutionResult {
    pub fn window_count(&self) -> usize {
        self.windows.len()
    }

    /// Fraction of off-diagonal recurrence entries equal to 1.
    pub fn off_diagonal_recurrence(&self) -> f64 {
        let t = self.window_count();
        if t < 2 {
            return 0.0;
        }
        let ones = self.recurrence.off_diagonal().filter(|&r| r == 1).count();
        ones as f64 / (t * (t - 1)) as f64
    }

    /// `start,end,mean_degree,mean_clustering,mean_path_length` rows.
    pub fn window_metrics_csv(&self) -> String {
        let mut out = String::from("window,start,end,mean_degree,mean_clustering,mean_path_length\n");
        for (i, (w, m)) in self.windows.iter().zip(&self.per_window).enumerate() {
            out.push_str(&format!(
                "{i},{},{},{},{},{}\n",
                w.start, w.end, m.mean_degree, m.mean_clustering, m.mean_path_length
            ));
        }
        out
    }
}

/// Full pipeline over `series`. The reference ensemble draws from `rng`;
/// the result is a deterministic function of the arguments.
pub fn evolve(
    series: &TimeSeries,
    rho: Penetrability,
    cfg: WindowConfig,
    rng: RngConfig,
    ensemble: usize,
) -> Result<EvolutionResult> {
    let windows = make_windows(series.len(), cfg)?;
    let graphs = window_graphs(series, rho, &windows)?;
    let per_window = window_metrics(&graphs, rng.substream(1 << 48))?;
    let distances = distance_matrix(&graphs)?;
    drop(graphs);
    let reference = reference_run(cfg, series.len(), rho, rng, ensemble, true)?;
    let theta = reference.theta;
    let gamma = correlation_index(&distances, theta)?;
    let recurrence = recurrence_matrix(&distances, theta)?;
    let m = &reference.metrics;
    let baseline = RandomBaseline {
        mean_degree: Band::of(m.iter().map(|w| w.mean_degree)),
        mean_clustering: Band::of(m.iter().map(|w| w.mean_clustering)),
        mean_path_length: Band::of(m.iter().map(|w| w.mean_path_length)),
    };
    Ok(EvolutionResult {
        rho,
        windows,
        per_window,
        distances,
        theta,
        gamma,
        recurrence,
        baseline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> VisibilityGraph {
        let e: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        VisibilityGraph::from_edges(n, Penetrability::HVG, &e).unwrap()
    }

    fn complete(n: usize) -> VisibilityGraph {
        let e: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        VisibilityGraph::from_edges(n, Penetrability::HVG, &e).unwrap()
    }

    #[test]
    fn window_counts() {
        assert_eq!(make_windows(8600, WindowConfig::new(500, 100).unwrap()).unwrap().len(), 82);
        assert_eq!(make_windows(500, WindowConfig::new(500, 100).unwrap()).unwrap(), vec![0..500]);
        let w = make_windows(1000, WindowConfig::new(500, 100).unwrap()).unwrap();
        assert_eq!(w.len(), 6);
        assert_eq!(w[0].end - w[1].start, 400);
        assert!(make_windows(499, WindowConfig::new(500, 100).unwrap()).is_err());
        assert!(WindowConfig::new(500, 500).is_err());
        assert!(WindowConfig::new(500, 0).is_err());
    }

    #[test]
    fn distances_between_small_graphs() {
        assert_eq!(graph_distance(&path(4), &path(4)).unwrap(), 0.0);
        assert_eq!(graph_distance(&path(4), &complete(4)).unwrap(), 6f64.sqrt());
        let one_less = VisibilityGraph::from_edges(4, Penetrability::HVG, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(graph_distance(&path(4), &one_less).unwrap(), 2f64.sqrt());
        assert!(matches!(graph_distance(&path(4), &path(5)), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn distance_matrix_shape() {
        let same = distance_matrix(&[path(4), path(4), path(4)]).unwrap();
        assert!(same.off_diagonal().all(|d| d == 0.0));
        let d = distance_matrix(&[path(4), complete(4), path(4)]).unwrap();
        assert!(d.is_symmetric());
        assert_eq!(d.get(0, 1), 6f64.sqrt());
        assert_eq!(d.get(1, 1), 0.0);
    }

    #[test]
    fn gamma_and_recurrence() {
        let d = SquareMatrix::from_fn(2, |i, j| if i == j { 0.0 } else { 1.0 });
        let g = correlation_index(&d, 2.0).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(0, 1), 0.5);
        assert_eq!(correlation_index(&d, 1.0).unwrap().get(0, 1), 0.0);
        let r = recurrence_matrix(&d, 1.0).unwrap();
        assert_eq!((r.get(0, 0), r.get(0, 1)), (1, 0));
        assert!(recurrence_matrix(&d, 0.0).is_err());
        assert!(correlation_index(&d, -1.0).is_err());
    }

    #[test]
    fn threshold_is_deterministic_and_monotone() {
        let cfg = WindowConfig::new(100, 50).unwrap();
        let rng = RngConfig::new(11, 0);
        let one = threshold_from_random(cfg, 400, Penetrability::new(1), rng, 1).unwrap();
        assert!(one > 0.0);
        assert_eq!(one, threshold_from_random(cfg, 400, Penetrability::new(1), rng, 1).unwrap());
        let two = threshold_from_random(cfg, 400, Penetrability::new(1), rng, 2).unwrap();
        assert!(two <= one);
        assert!(threshold_from_random(cfg, 100, Penetrability::new(1), rng, 1).is_err());
        assert!(threshold_from_random(cfg, 400, Penetrability::new(1), rng, 0).is_err());
    }

    #[test]
    fn repeated_window_recurs_everywhere() {
        let tile: Vec<f64> = (0..100).map(|i| ((i * 37 % 101) as f64).sqrt()).collect();
        let values: Vec<f64> = tile.iter().cycle().take(500).copied().collect();
        let s = TimeSeries::new(values).unwrap();
        let res = evolve(&s, Penetrability::new(1), WindowConfig::new(200, 100).unwrap(), RngConfig::new(1, 0), 2).unwrap();
        assert_eq!(res.window_count(), 4);
        assert!(res.distances.off_diagonal().all(|d| d == 0.0));
        assert!(res.gamma.off_diagonal().all(|g| g == 1.0));
        assert!(res.recurrence.off_diagonal().all(|r| r == 1));
    }
}
