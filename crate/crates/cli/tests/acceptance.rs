//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Run alone with `cargo test -p lphvg-cli --test acceptance`.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use lphvg_core::evolution::{evolve, WindowConfig};
use lphvg_core::generators::{
    gen_flow, gen_henon, gen_iid, gen_logistic, gen_periodic, jitter, FlowSpec, FlowSystem, HenonSpec, IidFamily,
    IidSpec, LogisticSpec,
};
use lphvg_core::metrics::{clustering_coverage, discriminate, mean_degree_empirical, DegreeDistribution, DiscriminationConfig, Verdict};
use lphvg_core::theory::{self, BoundCurve, BoundScope};
use lphvg_core::verify::{
    ensemble_finite_size, ensemble_graphs, long_range_table, pmf_table, worst_checked_error, MAX_RELATIVE_ERROR,
};
use lphvg_core::{affine_transform, build_lphvg, build_lphvg_naive, Penetrability, RngConfig, TimeSeries, VisibilityGraph};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "closed-form self-consistency", Duration::from_secs(1), c01_closed_form),
        (2, "degree law on uniform input", Duration::from_secs(10), c02_degree_law_uniform),
        (3, "degree law on gaussian and power-law input", Duration::from_secs(10), c03_distribution_independence),
        (4, "finite-size trends", Duration::from_secs(60), c04_finite_size_trends),
        (5, "periodic mean degree", Duration::from_secs(10), c05_periodic_mean_degree),
        (6, "clustering bounds", Duration::from_secs(60), c06_clustering_bounds),
        (7, "long-distance visibility", Duration::from_secs(60), c07_long_distance),
        (8, "oracle equivalence", Duration::from_secs(5), c08_oracle),
        (9, "structural invariants", Duration::from_secs(120), c09_invariants),
        (10, "discrimination", Duration::from_secs(60), c10_discrimination),
        (11, "evolution pipeline", Duration::from_secs(120), c11_evolution),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let in_time = took <= budget;
        let passed = out.passed && in_time;
        if !passed {
            failed += 1;
        }
        let timing = if in_time {
            format!("{:.2}s", took.as_secs_f64())
        } else {
            format!("{:.2}s, over the {}s budget", took.as_secs_f64(), budget.as_secs())
        };
        println!(
            "{} criterion {id:>2} {name} ({timing}): {}",
            if passed { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    println!("acceptance: {} of 11 criteria pass", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn rho(r: usize) -> Penetrability {
    Penetrability::new(r)
}

fn c01_closed_form() -> Outcome {
    let mut worst_mass: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    for r in 0..=5 {
        let p = rho(r);
        let k_hi = theory::truncation_degree(p, 1e-14);
        let (mut mass, mut mean) = (0.0, 0.0);
        for k in p.min_degree()..=k_hi {
            let q = theory::degree_pmf(p, k);
            mass += q;
            mean += k as f64 * q;
        }
        worst_mass = worst_mass.max((mass - 1.0).abs());
        worst_mean = worst_mean.max((mean - 4.0 * (r as f64 + 1.0)).abs());
    }
    let mut worst_trip: f64 = 0.0;
    let mut round_trips = 0;
    for r in 0..=5 {
        let p = rho(r);
        let scope = if r <= 2 { BoundScope::Proven } else { BoundScope::AllowUnvalidated };
        for k in p.min_degree()..=40 {
            let expected = theory::degree_pmf(p, k);
            let c_min = theory::clustering_min(p, k, scope).unwrap().value;
            let got = theory::clustering_pmf(p, c_min, BoundCurve::Min, scope).unwrap();
            worst_trip = worst_trip.max((got - expected).abs());
            round_trips += 1;
            let hi = theory::clustering_max(p, k, scope).unwrap();
            if !hi.extrapolated {
                let got = theory::clustering_pmf(p, hi.value, BoundCurve::Max, scope).unwrap();
                worst_trip = worst_trip.max((got - expected).abs());
                round_trips += 1;
            }
        }
    }
    outcome(
        worst_mass < 1e-9 && worst_mean < 1e-9 && worst_trip < 1e-9,
        format!(
            "max |sum P - 1| = {worst_mass:.1e}, max |sum kP - 4(rho+1)| = {worst_mean:.1e}, max round-trip error {worst_trip:.1e} over {round_trips} degrees"
        ),
    )
}

fn degree_law_check(family: IidFamily) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [1, 2] {
        let p = rho(r);
        let graphs = ensemble_graphs(p, 3000, 10, family, 2).unwrap();
        let dists: Vec<_> = graphs.iter().map(DegreeDistribution::from_graph).collect();
        let table = pmf_table(&DegreeDistribution::pooled(&dists), p, dists.len());
        let worst = worst_checked_error(&table);
        ok &= worst < MAX_RELATIVE_ERROR;
        parts.push(format!("{} rho={r} max E = {worst:.4}", family.name()));
    }
    (ok, parts.join(", "))
}

fn c02_degree_law_uniform() -> Outcome {
    let (ok, detail) = degree_law_check(IidFamily::Uniform);
    outcome(ok, detail)
}

fn c03_distribution_independence() -> Outcome {
    let (a, da) = degree_law_check(IidFamily::Gaussian { mean: 0.0, sd: 1.0 });
    let (b, db) = degree_law_check(IidFamily::DEFAULT_POWER_LAW);
    outcome(a && b, format!("{da}; {db}"))
}

fn c04_finite_size_trends() -> Outcome {
    let sizes = [500, 1000, 2000, 4000, 8000];
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [1, 2] {
        let p = rho(r);
        let mut me = Vec::new();
        let mut k0 = Vec::new();
        for &n in &sizes {
            let graphs = ensemble_graphs(p, n, 10, IidFamily::Uniform, 4).unwrap();
            let dists: Vec<_> = graphs.iter().map(DegreeDistribution::from_graph).collect();
            let s = ensemble_finite_size(&dists, p, lphvg_core::metrics::DEFAULT_E_THRESHOLD);
            me.push(s.me);
            k0.push(s.k0);
        }
        let me_down = me.windows(2).all(|w| w[1] < w[0]);
        let k0_up = k0.windows(2).all(|w| w[1] >= w[0]);
        ok &= me_down && k0_up;
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
        parts.push(format!(
            "rho={r} ME [{}]{} k0 [{}]{}",
            fmt(&me),
            if me_down { "" } else { " not strictly decreasing" },
            fmt(&k0),
            if k0_up { "" } else { " not non-decreasing" }
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c05_periodic_mean_degree() -> Outcome {
    let mut worst = (0.0f64, 0, 0);
    let mut failures = 0;
    let mut cases = 0;
    for period in [50usize, 100, 200, 250] {
        let series = gen_periodic(period, 1000, RngConfig::new(5, period as u64)).unwrap();
        for r in 0..=10usize {
            if 2 * r + 1 >= period {
                continue;
            }
            cases += 1;
            let g = build_lphvg(&series, rho(r)).unwrap();
            let predicted = theory::mean_degree_periodic(rho(r), period).unwrap();
            let err = (mean_degree_empirical(&g) - predicted).abs() / predicted;
            if err >= 0.02 {
                failures += 1;
            }
            if err > worst.0 {
                worst = (err, period, r);
            }
        }
    }
    outcome(
        failures == 0,
        format!(
            "{failures} of {cases} (T, rho) cases off by 2% or more; worst {:.2}% at T={} rho={}",
            100.0 * worst.0,
            worst.1,
            worst.2
        ),
    )
}

fn c06_clustering_bounds() -> Outcome {
    let p1 = rho(1);
    let exact = [
        (theory::clustering_min(p1, 4, BoundScope::Proven).unwrap().value, 5.0 / 6.0),
        (theory::clustering_min(p1, 5, BoundScope::Proven).unwrap().value, 7.0 / 10.0),
        (theory::clustering_min(p1, 6, BoundScope::Proven).unwrap().value, 3.0 / 5.0),
        (theory::clustering_max(p1, 6, BoundScope::Proven).unwrap().value, 11.0 / 15.0),
    ];
    let exact_ok = exact.iter().all(|(got, want)| (got - want).abs() < 1e-15);
    let mut ok = exact_ok;
    let mut parts = vec![format!("exact values {}", if exact_ok { "match" } else { "differ" })];
    for r in [1, 2] {
        let series = gen_iid(&IidSpec {
            family: IidFamily::Uniform,
            n: 3000,
            rng: RngConfig::new(6, r as u64),
        })
        .unwrap();
        let cov = clustering_coverage(&build_lphvg(&series, rho(r)).unwrap()).unwrap();
        ok &= cov.fraction >= 0.99;
        parts.push(format!("rho={r} coverage {:.4} ({} of {})", cov.fraction, cov.inside, cov.interior));
    }
    outcome(ok, parts.join(", "))
}

fn c07_long_distance() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in 0..=3 {
        let p = rho(r);
        let graphs = ensemble_graphs(p, 1000, 100, IidFamily::Uniform, 7).unwrap();
        let rows = long_range_table(&graphs, p, 30).unwrap();
        let near_ok = rows.iter().filter(|row| row.sep <= r + 1).all(|row| row.frequency == 1.0);
        let far: Vec<_> = rows.iter().filter(|row| row.sep >= r + 2).collect();
        let off: Vec<usize> = far.iter().filter(|row| !row.agrees_with(row.predicted)).map(|row| row.sep).collect();
        let worst_z = far
            .iter()
            .map(|row| (row.frequency - row.predicted).abs() / row.stderr)
            .fold(0.0, f64::max);
        ok &= near_ok && off.is_empty();
        parts.push(format!(
            "rho={r}: {} of {} separations beyond 3 SE (max |z| {worst_z:.1}){}",
            off.len(),
            far.len(),
            if near_ok { "" } else { ", near links missing" }
        ));
    }
    outcome(ok, parts.join("; "))
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn series_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-1e3f64..1e3, 2..=max_len),
        prop::collection::vec((0u8..5).prop_map(f64::from), 2..=max_len),
    ]
}

fn c08_oracle() -> Outcome {
    let checked = std::cell::Cell::new(0u32);
    let result = runner(200).run(&(series_strategy(100), 0usize..=4), |(values, r)| {
        let s = TimeSeries::new(values).unwrap();
        prop_assert_eq!(build_lphvg(&s, rho(r)).unwrap(), build_lphvg_naive(&s, rho(r)).unwrap());
        checked.set(checked.get() + 1);
        Ok(())
    });
    match result {
        Ok(()) => outcome(true, format!("{} random instances identical", checked.get())),
        Err(e) => outcome(false, format!("mismatch: {e}")),
    }
}

/// Stack construction of the horizontal visibility graph.
fn hvg_by_stack(x: &[f64]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for j in 0..x.len() {
        while let Some(&top) = stack.last() {
            edges.push((top, j));
            if x[top] > x[j] {
                break;
            }
            stack.pop();
            if x[top] == x[j] {
                break;
            }
        }
        stack.push(j);
    }
    edges.sort_unstable();
    edges
}

fn check_structure(s: &TimeSeries, r: usize, a: f64, b: f64) -> Result<(), TestCaseError> {
    let g = build_lphvg(s, rho(r)).unwrap();
    let n = s.len();
    for i in 0..n {
        for &j in g.neighbors(i) {
            prop_assert!(g.neighbors(j).contains(&i), "asymmetric edge {i}-{j}");
        }
    }
    prop_assert_eq!(g.component_count(), 1);
    prop_assert!((0..n - 1).all(|i| g.has_edge(i, i + 1)));
    let wider = build_lphvg(s, rho(r + 1)).unwrap();
    prop_assert!(g.edges().all(|(i, j)| wider.has_edge(i, j)), "edge lost when rho grows");
    let moved = affine_transform(s, a, b).unwrap();
    prop_assert_eq!(&build_lphvg(&moved, rho(r)).unwrap(), &g);
    let hvg: VisibilityGraph = build_lphvg(s, Penetrability::HVG).unwrap();
    prop_assert_eq!(hvg.edges().collect::<Vec<_>>(), hvg_by_stack(s.values()));
    Ok(())
}

fn c09_invariants() -> Outcome {
    // integer samples with dyadic scales and integer shifts keep the affine map exact
    let strategy = (
        prop_oneof![
            prop::collection::vec((-1000i32..1000).prop_map(f64::from), 2..150),
            prop::collection::vec((0i32..4).prop_map(f64::from), 2..150),
        ],
        0usize..6,
        -4i32..=4,
        -100_000i32..100_000,
    );
    let checked = std::cell::Cell::new(0u32);
    let result = runner(600).run(&strategy, |(values, r, e, b)| {
        let s = TimeSeries::new(values).unwrap();
        check_structure(&s, r, 2f64.powi(e), f64::from(b))?;
        checked.set(checked.get() + 1);
        Ok(())
    });
    match result {
        Ok(()) => outcome(
            checked.get() >= 500,
            format!("{} instances: symmetry, connectivity, adjacent links, rho-monotonicity, affine invariance, rho=0 HVG", checked.get()),
        ),
        Err(e) => outcome(false, format!("violated: {e}")),
    }
}

fn chaotic_series(system: &str, seed: u64) -> TimeSeries {
    let rng = RngConfig::new(seed, 0);
    match system {
        "logistic" => gen_logistic(&LogisticSpec::new(3000, jitter(&[0.5], 0.45, rng)[0])).unwrap(),
        "henon" => {
            let init = jitter(&[0.0, 0.0], 0.01, rng);
            gen_henon(&HenonSpec {
                x0: init[0],
                y0: init[1],
                ..HenonSpec::new(3000)
            })
            .unwrap()
        }
        flow => {
            let system = if flow == "lorenz" { FlowSystem::Lorenz } else { FlowSystem::Energy };
            let init = jitter(&system.default_init(), 0.01, rng);
            gen_flow(&FlowSpec {
                init: [init[0], init[1], init[2]],
                ..FlowSpec::new(system, 3000)
            })
            .unwrap()
        }
    }
}

fn c10_discrimination() -> Outcome {
    let cfg = DiscriminationConfig::default();
    let mut wrong = Vec::new();
    let mut total = 0;
    for r in [1, 2] {
        for system in ["logistic", "henon", "lorenz", "energy"] {
            let mut misses = 0;
            for seed in 0..5 {
                let rec = discriminate(&chaotic_series(system, seed), rho(r), &cfg).unwrap();
                total += 1;
                if rec.verdict != Verdict::Deviating {
                    misses += 1;
                }
            }
            if misses > 0 {
                wrong.push(format!("{system} rho={r} {misses}/5 called i.i.d."));
            }
        }
        for family in [
            IidFamily::Uniform,
            IidFamily::Gaussian { mean: 0.0, sd: 1.0 },
            IidFamily::DEFAULT_POWER_LAW,
        ] {
            let mut misses = 0;
            for seed in 0..5 {
                let s = gen_iid(&IidSpec {
                    family,
                    n: 3000,
                    rng: RngConfig::new(seed, 10),
                })
                .unwrap();
                let rec = discriminate(&s, rho(r), &cfg).unwrap();
                total += 1;
                if rec.verdict != Verdict::ConsistentWithIid {
                    misses += 1;
                }
            }
            if misses > 0 {
                wrong.push(format!("{} rho={r} {misses}/5 called deviating", family.name()));
            }
        }
    }
    let detail = if wrong.is_empty() {
        format!("all {total} verdicts correct")
    } else {
        format!("misclassified: {}", wrong.join(", "))
    };
    outcome(wrong.is_empty(), detail)
}

fn lphvg(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_lphvg"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn same_artifacts(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for name in &names {
        let left = fs::read(a.join(name)).map_err(|e| e.to_string())?;
        let right = fs::read(b.join(name)).map_err(|e| format!("{}: {e}", name.to_string_lossy()))?;
        if left != right {
            return Err(format!("{} differs", name.to_string_lossy()));
        }
    }
    Ok(names.len())
}

fn c11_evolution() -> Outcome {
    let series = gen_iid(&IidSpec {
        family: IidFamily::Uniform,
        n: 8600,
        rng: RngConfig::new(11, 0),
    })
    .unwrap();
    let res = evolve(&series, rho(2), WindowConfig::new(500, 100).unwrap(), RngConfig::new(11, 1), 10).unwrap();
    let t = res.window_count();
    let worst_degree = res
        .per_window
        .iter()
        .map(|w| (w.mean_degree - 12.0).abs() / 12.0)
        .fold(0.0, f64::max);
    let density = res.off_diagonal_recurrence();
    let d_ok = res.distances.is_symmetric() && (0..t).all(|i| res.distances.get(i, i) == 0.0);

    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let p = |s: &str| root.join(s).display().to_string();
    let replay = if !lphvg(&["generate", "--family", "uniform", "--n", "8600", "--seed", "11", "--outdir", &p("gen")]) {
        Err("generate failed".to_string())
    } else if !lphvg(&[
        "evolve", "--input", &p("gen/series.csv"), "--rho", "2", "--window-len", "500", "--step", "100", "--seed", "11",
        "--ensemble", "10", "--outdir", &p("run"),
    ]) {
        Err("evolve failed".to_string())
    } else if !lphvg(&["replay", "--manifest", &p("run/manifest.json"), "--outdir", &p("replayed")]) {
        Err("replay failed".to_string())
    } else {
        same_artifacts(&root.join("run"), &root.join("replayed"))
    };

    let ok = t == 82 && worst_degree < 0.05 && density < 0.05 && d_ok && replay.is_ok();
    outcome(
        ok,
        format!(
            "{t} windows, worst mean-degree error {:.2}%, off-diagonal recurrence {:.4}, D {}, replay {}",
            100.0 * worst_degree,
            density,
            if d_ok { "symmetric with zero diagonal" } else { "malformed" },
            match replay {
                Ok(files) => format!("identical across {files} files"),
                Err(e) => e,
            }
        ),
    )
}
