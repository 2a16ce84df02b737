use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use lphvg_core::evolution::{evolve, WindowConfig};
use lphvg_core::generators::{
    format_flat_config, generate, jitter, parse_flat_config, FlowSpec, FlowSystem, HenonSpec, IidFamily, IidSpec,
    LogisticSpec, SignalSpec,
};
use lphvg_core::metrics::{discriminate, DegreeDistribution, DiscriminationConfig};
use lphvg_core::series::{ColumnSelector, LoadOptions};
use lphvg_core::theory::{self, BoundScope};
use lphvg_core::verify::{pmf_table, verify, VerifyConfig};
use lphvg_core::{build_lphvg, load_series, Penetrability, RngConfig, TimeSeries};
use serde::Serialize;

use crate::args::*;
use crate::output::{flat_config, read_manifest, replay_argv, OutDir};
use crate::CliError;

/// Print a result line; a closed stdout (e.g. piped into `head`) is not an error.
fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}

/// Chaotic systems started from seeded points this far from the default.
const INIT_JITTER: f64 = 0.01;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Discriminate(a) => cmd_discriminate(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Theory(a) => cmd_theory(a),
        Command::Replay(a) => cmd_replay(a),
    }
}

fn family(kind: Family, mean: f64, sd: f64, alpha: f64, xmin: f64) -> IidFamily {
    match kind {
        Family::Uniform => IidFamily::Uniform,
        Family::Gaussian => IidFamily::Gaussian { mean, sd },
        Family::Powerlaw => IidFamily::PowerLaw { alpha, xmin },
    }
}

fn parse_params(raw: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    raw.iter()
        .map(|p| {
            let (name, value) = p
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--param expects NAME=VALUE, got {p:?}")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| CliError::Usage(format!("--param {name}: {value:?} is not a number")))?;
            Ok((name.to_string(), value))
        })
        .collect()
}

fn reject_unknown(params: &[(String, f64)], known: &[&str], system: &str) -> Result<(), CliError> {
    for (name, _) in params {
        if !known.contains(&name.as_str()) {
            return Err(CliError::Usage(format!(
                "{system} has no parameter {name:?} (known: {})",
                known.join(", ")
            )));
        }
    }
    Ok(())
}

fn lookup(params: &[(String, f64)], name: &str, default: f64) -> f64 {
    params.iter().rev().find(|(n, _)| n == name).map_or(default, |&(_, v)| v)
}

fn init_state(init: &[f64], default: &[f64], rng: RngConfig) -> Result<Vec<f64>, CliError> {
    if init.is_empty() {
        return Ok(jitter(default, INIT_JITTER, rng));
    }
    if init.len() != default.len() {
        return Err(CliError::Usage(format!(
            "--init needs {} comma-separated values, got {}",
            default.len(),
            init.len()
        )));
    }
    Ok(init.to_vec())
}

/// Resolve the signal flags into an explicit generator spec.
pub fn resolve_signal(s: &SignalArgs) -> Result<SignalSpec, CliError> {
    if let Some(path) = &s.spec {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return Ok(SignalSpec::from_config(&parse_flat_config(&text)?)?);
    }
    let rng = RngConfig::new(s.seed, s.stream);
    let params = parse_params(&s.params)?;
    if let Some(kind) = s.family {
        reject_unknown(&params, &[], kind_name(kind))?;
        return Ok(SignalSpec::Iid(IidSpec {
            family: family(kind, s.mean, s.sd, s.alpha, s.xmin),
            n: s.n,
            rng,
        }));
    }
    let system = s
        .system
        .ok_or_else(|| CliError::Usage("pass --family, --system or --spec".into()))?;
    Ok(match system {
        System::Periodic => {
            reject_unknown(&params, &[], "periodic")?;
            let period = s
                .period
                .ok_or_else(|| CliError::Usage("--system periodic needs --period".into()))?;
            SignalSpec::Periodic { period, n: s.n, rng }
        }
        System::Logistic => {
            reject_unknown(&params, &["mu"], "logistic")?;
            let x0 = match s.init.as_slice() {
                [] => jitter(&[0.5], 0.45, rng)[0],
                [x0] => *x0,
                _ => return Err(CliError::Usage("--init for logistic takes one value".into())),
            };
            SignalSpec::Logistic(LogisticSpec {
                n: s.n,
                x0,
                mu: lookup(&params, "mu", 4.0),
            })
        }
        System::Henon => {
            reject_unknown(&params, &["a", "b"], "henon")?;
            let base = HenonSpec::new(s.n);
            let init = init_state(&s.init, &[base.x0, base.y0], rng)?;
            SignalSpec::Henon(HenonSpec {
                x0: init[0],
                y0: init[1],
                a: lookup(&params, "a", base.a),
                b: lookup(&params, "b", base.b),
                ..base
            })
        }
        System::Lorenz | System::Energy => {
            let flow = if system == System::Lorenz {
                FlowSystem::Lorenz
            } else {
                FlowSystem::Energy
            };
            reject_unknown(&params, flow.param_names(), flow.name())?;
            let mut spec = FlowSpec::new(flow, s.n);
            for (i, name) in flow.param_names().iter().enumerate() {
                spec.params[i] = lookup(&params, name, spec.params[i]);
            }
            let init = init_state(&s.init, &flow.default_init(), rng)?;
            spec.init = [init[0], init[1], init[2]];
            spec.dt = s.dt;
            spec.transient = s.transient.unwrap_or(spec.transient);
            spec.stride = s.stride;
            spec.component = s.component as usize;
            SignalSpec::Flow(spec)
        }
    })
}

fn kind_name(f: Family) -> &'static str {
    match f {
        Family::Uniform => "uniform",
        Family::Gaussian => "gaussian",
        Family::Powerlaw => "powerlaw",
    }
}

fn canonical_input(input: &mut InputArgs) -> Result<PathBuf, CliError> {
    let path = input
        .input
        .clone()
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let canonical = fs::canonicalize(&path).map_err(|e| CliError::io(&path, e))?;
    input.input = Some(canonical.clone());
    Ok(canonical)
}

fn read_input(input: &InputArgs, path: &Path) -> Result<TimeSeries, CliError> {
    let column: ColumnSelector = input.column.parse().expect("column selector parsing is infallible");
    Ok(load_series(path, &LoadOptions::new(column, input.header))?)
}

fn canonical_spec(signal: &mut SignalArgs) -> Result<(), CliError> {
    if let Some(path) = &signal.spec {
        signal.spec = Some(fs::canonicalize(path).map_err(|e| CliError::io(path, e))?);
    }
    Ok(())
}

fn cmd_generate(mut args: GenerateArgs) -> Result<(), CliError> {
    canonical_spec(&mut args.signal)?;
    let spec = resolve_signal(&args.signal)?;
    let series = generate(&spec)?;
    let mut out = OutDir::create(&args.outdir)?;
    out.write("series.csv", &series.to_csv())?;
    out.write("spec.cfg", &format_flat_config(&spec.to_config()))?;
    out.finish("generate", flat_config(&args)?)?;
    eprintln!("wrote {} samples to {}", series.len(), out_path(&args.outdir, "series.csv"));
    Ok(())
}

fn out_path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn cmd_build(mut args: BuildArgs) -> Result<(), CliError> {
    let path = canonical_input(&mut args.input)?;
    let series = read_input(&args.input, &path)?;
    let graph = build_lphvg(&series, Penetrability::new(args.rho))?;
    let mut out = OutDir::create(&args.outdir)?;
    match args.format {
        GraphFormat::Edges => out.write("graph.edges", &graph.edge_list())?,
        GraphFormat::Matrix => out.write("graph.csv", &graph.adjacency_csv()?)?,
    }
    out.finish("build", flat_config(&args)?)?;
    eprintln!("{} nodes, {} edges", graph.node_count(), graph.edge_count());
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let cfg = VerifyConfig {
        seed: args.seed,
        max_sep: args.max_sep,
        ..VerifyConfig::new(
            Penetrability::new(args.rho),
            args.n,
            args.seeds,
            family(args.family, args.mean, args.sd, args.alpha, args.xmin),
        )
    };
    let report = verify(&cfg)?;
    let mut out = OutDir::create(&args.outdir)?;
    out.write("pmf.csv", &report.pmf_csv())?;
    out.write("finite_size.csv", &report.finite_size_csv())?;
    out.write("long_range.csv", &report.long_range_csv())?;
    out.write_json("report.json", &report)?;
    out.finish("verify", flat_config(&args)?)?;
    for check in &report.checks {
        say(&format!("{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail));
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(
            report.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect(),
        ))
    }
}

fn cmd_discriminate(mut args: DiscriminateArgs) -> Result<(), CliError> {
    let series = if args.input.input.is_some() {
        if args.signal.family.is_some() || args.signal.system.is_some() || args.signal.spec.is_some() {
            return Err(CliError::Usage("pass either --input or a generated signal, not both".into()));
        }
        let path = canonical_input(&mut args.input)?;
        read_input(&args.input, &path)?
    } else {
        canonical_spec(&mut args.signal)?;
        generate(&resolve_signal(&args.signal)?)?
    };
    let rho = Penetrability::new(args.rho);
    let record = discriminate(&series, rho, &DiscriminationConfig::default())?;
    let graph = build_lphvg(&series, rho)?;
    let mut table = String::from("k,count,pmf,theory_pmf,E\n");
    for r in pmf_table(&DegreeDistribution::from_graph(&graph), rho, 1) {
        let _ = writeln!(table, "{},{},{},{},{}", r.k, r.count, r.pmf, r.theory_pmf, r.relative_error);
    }
    let config = flat_config(&args)?;
    #[derive(Serialize)]
    struct Verdict<'a> {
        #[serde(flatten)]
        record: &'a lphvg_core::metrics::DiscriminationRecord,
        run_config: &'a std::collections::BTreeMap<String, String>,
    }
    let mut out = OutDir::create(&args.outdir)?;
    out.write("pmf.csv", &table)?;
    out.write_json(
        "verdict.json",
        &Verdict {
            record: &record,
            run_config: &config,
        },
    )?;
    out.finish("discriminate", config)?;
    for w in &record.warnings {
        eprintln!("warning: {w}");
    }
    say(&record.verdict.to_string());
    Ok(())
}

fn cmd_evolve(mut args: EvolveArgs) -> Result<(), CliError> {
    let path = canonical_input(&mut args.input)?;
    let series = read_input(&args.input, &path)?;
    let cfg = WindowConfig::new(args.window_len, args.step)?;
    let res = evolve(&series, Penetrability::new(args.rho), cfg, RngConfig::new(args.seed, 0), args.ensemble)?;
    #[derive(Serialize)]
    struct Summary {
        window_count: usize,
        theta: f64,
        off_diagonal_recurrence: f64,
        baseline: lphvg_core::evolution::RandomBaseline,
    }
    let mut out = OutDir::create(&args.outdir)?;
    out.write("distances.csv", &res.distances.to_csv())?;
    out.write("gamma.csv", &res.gamma.to_csv())?;
    out.write("recurrence.csv", &res.recurrence.to_csv())?;
    out.write("window_metrics.csv", &res.window_metrics_csv())?;
    out.write_json(
        "evolution.json",
        &Summary {
            window_count: res.window_count(),
            theta: res.theta,
            off_diagonal_recurrence: res.off_diagonal_recurrence(),
            baseline: res.baseline,
        },
    )?;
    out.finish("evolve", flat_config(&args)?)?;
    eprintln!(
        "{} windows, theta = {}, off-diagonal recurrence {:.4}",
        res.window_count(),
        res.theta,
        res.off_diagonal_recurrence()
    );
    Ok(())
}

fn cmd_theory(args: TheoryArgs) -> Result<(), CliError> {
    let rho = Penetrability::new(args.rho);
    let scope = if args.allow_unvalidated {
        BoundScope::AllowUnvalidated
    } else {
        BoundScope::Proven
    };
    let k_lo = rho.min_degree();
    if args.kmax < k_lo {
        return Err(CliError::Usage(format!("--kmax must be at least 2(rho+1) = {k_lo}")));
    }
    let mut law = String::from("k,pmf\n");
    let mut bounds = String::from("k,c_min,c_max,extrapolated\n");
    for k in k_lo..=args.kmax {
        let _ = writeln!(law, "{k},{}", theory::degree_pmf(rho, k));
        let lo = theory::clustering_min(rho, k, scope)?;
        let hi = theory::clustering_max(rho, k, scope)?;
        let _ = writeln!(bounds, "{k},{},{},{}", lo.value, hi.value, hi.extrapolated);
    }
    let mut links = String::from("sep,predicted,exact\n");
    for sep in 1..=args.max_sep {
        let _ = writeln!(
            links,
            "{sep},{},{}",
            theory::long_visibility_prob(rho, sep)?,
            theory::exact_link_probability(rho, sep)?
        );
    }
    #[derive(Serialize)]
    struct Summary {
        rho: usize,
        lambda: f64,
        mean_degree: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        periodic_mean_degree: Option<f64>,
    }
    let summary = Summary {
        rho: args.rho,
        lambda: theory::decay_rate(rho),
        mean_degree: theory::mean_degree(rho),
        periodic_mean_degree: args.period.map(|t| theory::mean_degree_periodic(rho, t)).transpose()?,
    };
    let mut out = OutDir::create(&args.outdir)?;
    out.write("degree_law.csv", &law)?;
    out.write("clustering_bounds.csv", &bounds)?;
    out.write("long_range.csv", &links)?;
    out.write_json("summary.json", &summary)?;
    out.finish("theory", flat_config(&args)?)?;
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<(), CliError> {
    let manifest = read_manifest(&args.manifest)?;
    if manifest.subcommand == "replay" {
        return Err(CliError::Usage("a replay manifest cannot itself be replayed".into()));
    }
    let argv = replay_argv(&manifest, &args.outdir);
    let cli = <crate::args::Cli as clap::Parser>::try_parse_from(&argv)
        .map_err(|e| CliError::Usage(format!("manifest does not describe a valid run: {e}")))?;
    run(cli.command)
}
