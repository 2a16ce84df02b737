//! Ensemble checks of empirical graphs built from i.i.d. input against the
//! closed-form predictions.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{build_lphvg, VisibilityGraph};
use crate::error::{param, Result};
use crate::generators::{gen_iid, IidFamily, IidSpec};
use crate::metrics::{
    clustering_coverage, finite_size_report, link_frequency, mean_degree_empirical, BoundCoverage, DegreeDistribution,
    FiniteSizeReport, DEFAULT_E_THRESHOLD,
};
use crate::series::{Penetrability, RngConfig};
use crate::theory;

/// Bins whose expected count in a single realization reaches this are
/// checked against the law.
pub const MIN_EXPECTED_COUNT: f64 = 50.0;
/// Largest allowed ensemble-mean relative error on checked bins.
pub const MAX_RELATIVE_ERROR: f64 = 0.15;
/// Required fraction of interior nodes inside the clustering bounds.
pub const MIN_COVERAGE: f64 = 0.99;
/// Allowed distance, in standard errors, between link frequency and prediction.
pub const LINK_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub rho: Penetrability,
    pub n: usize,
    pub seeds: usize,
    pub family: IidFamily,
    /// Realization `s` draws from stream `s` under this seed.
    pub seed: u64,
    pub max_sep: usize,
}

impl VerifyConfig {
    pub fn new(rho: Penetrability, n: usize, seeds: usize, family: IidFamily) -> Self {
        Self {
            rho,
            n,
            seeds,
            family,
            seed: 0,
            max_sep: 30,
        }
    }
}

/// One graph per realization, in realization order.
pub fn ensemble_graphs(rho: Penetrability, n: usize, seeds: usize, family: IidFamily, seed: u64) -> Result<Vec<VisibilityGraph>> {
    if seeds == 0 {
        return Err(param("ensemble needs at least one realization"));
    }
    (0..seeds as u64)
        .into_par_iter()
        .map(|s| {
            let series = gen_iid(&IidSpec {
                family,
                n,
                rng: RngConfig::new(seed, s),
            })?;
            build_lphvg(&series, rho)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmfRow {
    pub k: usize,
    pub count: u64,
    pub pmf: f64,
    pub theory_pmf: f64,
    pub relative_error: f64,
    /// Expected count in one realization.
    pub expected_count: f64,
}

/// Ensemble-mean pmf against the law for `k` from `2(rho+1)` to the largest
/// observed degree. With equal series lengths the pooled histogram of
/// `realizations` series is the ensemble mean.
pub fn pmf_table(pooled: &DegreeDistribution, rho: Penetrability, realizations: usize) -> Vec<PmfRow> {
    let top = pooled.max_degree().unwrap_or(0);
    let per_series = pooled.node_count() as f64 / realizations as f64;
    (rho.min_degree()..=top)
        .map(|k| {
            let theory_pmf = theory::degree_pmf(rho, k);
            let pmf = pooled.pmf(k);
            PmfRow {
                k,
                count: pooled.count(k),
                pmf,
                theory_pmf,
                relative_error: (pmf - theory_pmf).abs() / theory_pmf,
                expected_count: theory_pmf * per_series,
            }
        })
        .collect()
}

/// Worst relative error among bins with expected count at least [`MIN_EXPECTED_COUNT`].
pub fn worst_checked_error(table: &[PmfRow]) -> f64 {
    table
        .iter()
        .filter(|r| r.expected_count >= MIN_EXPECTED_COUNT)
        .map(|r| r.relative_error)
        .fold(0.0, f64::max)
}

/// Per-realization finite-size summaries averaged over the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFiniteSize {
    pub me: f64,
    pub me_sum: f64,
    pub k0: f64,
}

pub fn ensemble_finite_size(dists: &[DegreeDistribution], rho: Penetrability, e_threshold: f64) -> EnsembleFiniteSize {
    let reports: Vec<FiniteSizeReport> = dists.iter().map(|d| finite_size_report(d, rho, e_threshold)).collect();
    let m = reports.len() as f64;
    EnsembleFiniteSize {
        me: reports.iter().map(|r| r.me).sum::<f64>() / m,
        me_sum: reports.iter().map(|r| r.me_sum).sum::<f64>() / m,
        k0: reports.iter().map(|r| r.k0 as f64).sum::<f64>() / m,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongRangeRow {
    pub sep: usize,
    /// Mean over realizations of the per-series link frequency.
    pub frequency: f64,
    /// Standard error of that mean across realizations.
    pub stderr: f64,
    /// `(2 rho (rho+1) + 2) / (sep (sep+1))`, clamped to 1.
    pub predicted: f64,
    /// `(rho+1)(rho+2) / (sep (sep+1))`, clamped to 1.
    pub exact: f64,
}

impl LongRangeRow {
    /// Within [`LINK_SIGMAS`] standard errors of `target`; exact match needed
    /// when the frequency does not vary across realizations.
    pub fn agrees_with(&self, target: f64) -> bool {
        if self.stderr == 0.0 {
            self.frequency == target
        } else {
            (self.frequency - target).abs() <= LINK_SIGMAS * self.stderr
        }
    }

    /// Separations up to `rho + 1` must always link; beyond, the frequency is
    /// compared to the closed-form prediction.
    pub fn passes(&self, rho: Penetrability) -> bool {
        if self.sep <= rho.get() + 1 {
            self.frequency == 1.0
        } else {
            self.agrees_with(self.predicted)
        }
    }
}

pub fn long_range_table(graphs: &[VisibilityGraph], rho: Penetrability, max_sep: usize) -> Result<Vec<LongRangeRow>> {
    let per_series: Vec<Vec<f64>> = graphs
        .iter()
        .map(|g| link_frequency(g, max_sep).iter().map(|t| t.frequency()).collect())
        .collect();
    let seps = per_series.iter().map(Vec::len).min().unwrap_or(0);
    let m = per_series.len() as f64;
    (1..=seps)
        .map(|sep| {
            let f: Vec<f64> = per_series.iter().map(|v| v[sep - 1]).collect();
            let mean = f.iter().sum::<f64>() / m;
            let var = if m > 1.0 {
                f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            Ok(LongRangeRow {
                sep,
                frequency: mean,
                stderr: (var / m).sqrt(),
                predicted: theory::long_visibility_prob(rho, sep)?,
                exact: theory::exact_link_probability(rho, sep)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub mean_degree: f64,
    pub theory_mean_degree: f64,
    pub pmf: Vec<PmfRow>,
    pub finite_size: FiniteSizeReport,
    pub ensemble_finite_size: EnsembleFiniteSize,
    pub coverage: BoundCoverage,
    pub long_range: Vec<LongRangeRow>,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn pmf_csv(&self) -> String {
        let mut out = String::from("k,count,pmf,theory_pmf,E\n");
        for r in &self.pmf {
            let _ = writeln!(out, "{},{},{},{},{}", r.k, r.count, r.pmf, r.theory_pmf, r.relative_error);
        }
        out
    }

    pub fn long_range_csv(&self) -> String {
        let mut out = String::from("sep,frequency,stderr,predicted,exact\n");
        for r in &self.long_range {
            let _ = writeln!(out, "{},{},{},{},{}", r.sep, r.frequency, r.stderr, r.predicted, r.exact);
        }
        out
    }

    pub fn finite_size_csv(&self) -> String {
        let mut out = String::from("k,E\n");
        for (k, e) in &self.finite_size.per_k {
            let _ = writeln!(out, "{k},{e}");
        }
        out
    }
}

/// Generate, build and compare an i.i.d. ensemble against the theory.
pub fn verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let rho = cfg.rho;
    let graphs = ensemble_graphs(rho, cfg.n, cfg.seeds, cfg.family, cfg.seed)?;
    let dists: Vec<DegreeDistribution> = graphs.iter().map(DegreeDistribution::from_graph).collect();
    let pooled = DegreeDistribution::pooled(&dists);
    let pmf = pmf_table(&pooled, rho, graphs.len());

    let mut interior = 0;
    let mut inside = 0;
    let mut unvalidated = false;
    for g in &graphs {
        let c = clustering_coverage(g)?;
        interior += c.interior;
        inside += c.inside;
        unvalidated |= c.unvalidated;
    }
    let coverage = BoundCoverage {
        interior,
        inside,
        fraction: if interior == 0 { 0.0 } else { inside as f64 / interior as f64 },
        unvalidated,
    };
    let long_range = long_range_table(&graphs, rho, cfg.max_sep)?;
    let mean_degree = graphs.iter().map(mean_degree_empirical).sum::<f64>() / graphs.len() as f64;

    let worst = worst_checked_error(&pmf);
    let failing_seps: Vec<usize> = long_range.iter().filter(|r| !r.passes(rho)).map(|r| r.sep).collect();
    let checks = vec![
        Check {
            name: "degree-law".into(),
            passed: worst < MAX_RELATIVE_ERROR,
            detail: format!("max E(k) = {worst:.4} over bins with expected count >= {MIN_EXPECTED_COUNT}"),
        },
        Check {
            name: "clustering-bounds".into(),
            passed: coverage.fraction >= MIN_COVERAGE,
            detail: format!("{} of {} interior nodes inside ({:.4})", inside, interior, coverage.fraction),
        },
        Check {
            name: "long-range-links".into(),
            passed: failing_seps.is_empty(),
            detail: if failing_seps.is_empty() {
                "all separations agree".into()
            } else {
                format!("separations outside {LINK_SIGMAS} standard errors: {failing_seps:?}")
            },
        },
    ];

    Ok(VerifyReport {
        config: *cfg,
        mean_degree,
        theory_mean_degree: theory::mean_degree(rho),
        finite_size: finite_size_report(&pooled, rho, DEFAULT_E_THRESHOLD),
        ensemble_finite_size: ensemble_finite_size(&dists, rho, DEFAULT_E_THRESHOLD),
        pmf,
        coverage,
        long_range,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ensemble_report() {
        let cfg = VerifyConfig::new(Penetrability::new(1), 500, 3, IidFamily::Uniform);
        let r = verify(&cfg).unwrap();
        assert_eq!(r.pmf.first().unwrap().k, 4);
        assert_eq!(r.checks.len(), 3);
        assert!((r.mean_degree - 8.0).abs() < 0.5);
        assert!(r.long_range.iter().take(2).all(|row| row.frequency == 1.0));
        assert!(r.pmf_csv().starts_with("k,count,pmf,theory_pmf,E\n4,"));
        assert_eq!(verify(&cfg).unwrap(), r);
    }

    #[test]
    fn zero_seeds_rejected() {
        assert!(ensemble_graphs(Penetrability::HVG, 10, 0, IidFamily::Uniform, 0).is_err());
    }
}
