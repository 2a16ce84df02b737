//! Seeded signal sources: i.i.d. draws, periodic tiles, chaotic maps and flows.
//!
//! Every generator is a pure function of its spec. Specs round-trip through a
//! flat `key = value` text form so runs can be replayed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, Open01, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::series::{RngConfig, TimeSeries};

/// Marginal distribution for i.i.d. series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum IidFamily {
    /// Uniform on the open interval `(0, 1)`.
    Uniform,
    Gaussian { mean: f64, sd: f64 },
    /// Density proportional to `x^(-alpha)` on `[xmin, inf)`.
    PowerLaw { alpha: f64, xmin: f64 },
}

impl IidFamily {
    pub const DEFAULT_POWER_LAW: IidFamily = IidFamily::PowerLaw { alpha: 2.5, xmin: 1.0 };

    pub fn name(&self) -> &'static str {
        match self {
            IidFamily::Uniform => "uniform",
            IidFamily::Gaussian { .. } => "gaussian",
            IidFamily::PowerLaw { .. } => "powerlaw",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            IidFamily::Uniform => Ok(()),
            IidFamily::Gaussian { mean, sd } => {
                if !mean.is_finite() || !(sd.is_finite() && sd > 0.0) {
                    return Err(param(format!("gaussian needs finite mean and sd > 0 (got mean={mean}, sd={sd})")));
                }
                Ok(())
            }
            IidFamily::PowerLaw { alpha, xmin } => {
                if !(alpha.is_finite() && alpha > 1.0) {
                    return Err(param(format!("powerlaw alpha must exceed 1 (got {alpha})")));
                }
                if !(xmin.is_finite() && xmin > 0.0) {
                    return Err(param(format!("powerlaw xmin must be positive (got {xmin})")));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IidSpec {
    pub family: IidFamily,
    pub n: usize,
    pub rng: RngConfig,
}

pub fn gen_iid(spec: &IidSpec) -> Result<TimeSeries> {
    spec.family.validate()?;
    check_len(spec.n)?;
    let mut rng = spec.rng.rng();
    let values: Vec<f64> = match spec.family {
        IidFamily::Uniform => (0..spec.n).map(|_| rng.sample::<f64, _>(Open01)).collect(),
        IidFamily::Gaussian { mean, sd } => {
            let d = Normal::new(mean, sd).map_err(|e| param(e.to_string()))?;
            d.sample_iter(&mut rng).take(spec.n).collect()
        }
        IidFamily::PowerLaw { alpha, xmin } => {
            // Pareto shape is the survival exponent, one less than the density exponent
            let d = Pareto::new(xmin, alpha - 1.0).map_err(|e| param(e.to_string()))?;
            d.sample_iter(&mut rng).take(spec.n).collect()
        }
    };
    TimeSeries::new(values)
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, min: 2 });
    }
    Ok(())
}

/// One period of `period` distinct uniform draws, tiled to length `n`.
pub fn gen_periodic(period: usize, n: usize, rng: RngConfig) -> Result<TimeSeries> {
    if period < 2 || period > n {
        return Err(param(format!("period must satisfy 2 <= period <= n (got period={period}, n={n})")));
    }
    let mut r = rng.rng();
    let mut tile: Vec<f64> = Vec::with_capacity(period);
    while tile.len() < period {
        let v: f64 = r.sample(Open01);
        if !tile.contains(&v) {
            tile.push(v);
        }
    }
    TimeSeries::new((0..n).map(|i| tile[i % period]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticSpec {
    pub n: usize,
    pub x0: f64,
    pub mu: f64,
}

impl LogisticSpec {
    pub fn new(n: usize, x0: f64) -> Self {
        Self { n, x0, mu: 4.0 }
    }
}

/// `x_{t+1} = mu x_t (1 - x_t)`, starting with `x0` as the first sample.
///
/// Orbits that land on 0 or on the nonzero fixed point `1 - 1/mu` are
/// rejected: they carry no dynamics.
pub fn gen_logistic(spec: &LogisticSpec) -> Result<TimeSeries> {
    let LogisticSpec { n, x0, mu } = *spec;
    check_len(n)?;
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(param(format!("logistic x0 must lie in (0, 1) (got {x0})")));
    }
    if !(mu > 0.0 && mu <= 4.0) {
        return Err(param(format!("logistic mu must lie in (0, 4] (got {mu})")));
    }
    let fixed = 1.0 - 1.0 / mu;
    let mut values = Vec::with_capacity(n);
    let mut x = x0;
    for t in 0..n {
        if x == 0.0 || x == fixed {
            return Err(Error::DegenerateOrbit(format!(
                "logistic orbit from x0={x0} reaches the fixed point {x} at step {t}"
            )));
        }
        values.push(x);
        x = mu * x * (1.0 - x);
    }
    TimeSeries::new(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HenonSpec {
    pub n: usize,
    pub x0: f64,
    pub y0: f64,
    pub a: f64,
    pub b: f64,
}

impl HenonSpec {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            x0: 0.0,
            y0: 0.0,
            a: 1.4,
            b: 0.3,
        }
    }
}

const HENON_ESCAPE: f64 = 1e10;

/// Hénon map `x' = 1 + y - a x^2`, `y' = b x`; records `x`, starting at `x0`.
pub fn gen_henon(spec: &HenonSpec) -> Result<TimeSeries> {
    let HenonSpec { n, x0, y0, a, b } = *spec;
    check_len(n)?;
    for (name, v) in [("x0", x0), ("y0", y0), ("a", a), ("b", b)] {
        if !v.is_finite() {
            return Err(param(format!("henon {name} must be finite")));
        }
    }
    let (mut x, mut y) = (x0, y0);
    let mut values = Vec::with_capacity(n);
    for step in 0..n {
        if !x.is_finite() {
            return Err(Error::NonFinite { step });
        }
        if x.abs() > HENON_ESCAPE {
            return Err(Error::Diverged { step, magnitude: x.abs() });
        }
        values.push(x);
        (x, y) = (1.0 + y - a * x * x, b * x);
    }
    TimeSeries::new(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowSystem {
    Lorenz,
    Energy,
}

impl FlowSystem {
    pub fn name(self) -> &'static str {
        match self {
            FlowSystem::Lorenz => "lorenz",
            FlowSystem::Energy => "energy",
        }
    }

    /// Parameter names in the order they are stored.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FlowSystem::Lorenz => &["a", "b", "c"],
            FlowSystem::Energy => &["a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "C", "K1", "K2", "L"],
        }
    }

    pub fn default_params(self) -> Vec<f64> {
        match self {
            FlowSystem::Lorenz => vec![10.0, 8.0 / 3.0, 28.0],
            FlowSystem::Energy => vec![0.3, 0.5563, 0.15, 0.4, 0.6073, 0.3, 0.3, 0.006, 27.0, 15.0, 15.0, 19.0],
        }
    }

    pub fn default_init(self) -> [f64; 3] {
        match self {
            FlowSystem::Lorenz => [1.0, 1.0, 1.0],
            FlowSystem::Energy => [10.0, 20.0, 14.0],
        }
    }

    /// Vector field at `s` with parameters in [`param_names`](Self::param_names) order.
    pub fn derivative(self, p: &[f64], s: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = s;
        match self {
            FlowSystem::Lorenz => {
                let (a, b, c) = (p[0], p[1], p[2]);
                [a * (y - x), c * x - y - x * z, x * y - b * z]
            }
            FlowSystem::Energy => {
                let [a1, a2, a3, b1, b2, b3, c1, c2, cc, k1, k2, l] = p[..12] else {
                    unreachable!("energy system takes 12 parameters")
                };
                [
                    a1 * x + a2 * (cc - y) + a3 * (z - k1),
                    -b1 * y + b2 * x - b3 * z * (1.0 - z / k2),
                    c1 * z * (1.0 - z / l) + c2 * y * z,
                ]
            }
        }
    }
}

impl FromStr for FlowSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lorenz" => Ok(FlowSystem::Lorenz),
            "energy" => Ok(FlowSystem::Energy),
            other => Err(param(format!("unknown flow system {other:?} (expected lorenz or energy)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub system: FlowSystem,
    pub params: Vec<f64>,
    pub init: [f64; 3],
    pub dt: f64,
    pub transient: usize,
    pub stride: usize,
    /// 0, 1 or 2 for `x`, `y`, `z`.
    pub component: usize,
    pub n: usize,
}

impl FlowSpec {
    pub fn new(system: FlowSystem, n: usize) -> Self {
        Self {
            system,
            params: system.default_params(),
            init: system.default_init(),
            dt: 0.01,
            transient: 10_000,
            stride: 1,
            component: 0,
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_len(self.n)?;
        let expected = self.system.param_names().len();
        if self.params.len() != expected {
            return Err(param(format!(
                "{} takes {expected} parameters, got {}",
                self.system.name(),
                self.params.len()
            )));
        }
        if self.params.iter().chain(&self.init).any(|v| !v.is_finite()) {
            return Err(param("flow parameters and initial state must be finite"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(param(format!("dt must be positive (got {})", self.dt)));
        }
        if self.stride == 0 {
            return Err(param("stride must be at least 1"));
        }
        if self.component > 2 {
            return Err(param(format!("component must be 0, 1 or 2 (got {})", self.component)));
        }
        if self.system.derivative(&self.params, self.init) == [0.0; 3] {
            return Err(Error::DegenerateOrbit(format!(
                "initial state {:?} is a fixed point of the {} system",
                self.init,
                self.system.name()
            )));
        }
        Ok(())
    }
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step(f: impl Fn([f64; 3]) -> [f64; 3], s: [f64; 3], dt: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], h: f64| [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]];
    let k1 = f(s);
    let k2 = f(add(s, k1, dt / 2.0));
    let k3 = f(add(s, k2, dt / 2.0));
    let k4 = f(add(s, k3, dt));
    std::array::from_fn(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Integrate with fixed-step RK4, drop `transient` steps, then record
/// `component` every `stride` steps until `n` samples are collected.
pub fn gen_flow(spec: &FlowSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let f = |s| spec.system.derivative(&spec.params, s);
    let mut s = spec.init;
    let mut step = 0usize;
    let mut advance = |s: &mut [f64; 3]| -> Result<()> {
        *s = rk4_step(f, *s, spec.dt);
        step += 1;
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step });
        }
        Ok(())
    };
    for _ in 0..spec.transient {
        advance(&mut s)?;
    }
    let mut values = Vec::with_capacity(spec.n);
    values.push(s[spec.component]);
    while values.len() < spec.n {
        for _ in 0..spec.stride {
            advance(&mut s)?;
        }
        values.push(s[spec.component]);
    }
    TimeSeries::new(values)
}

/// Any of the supported generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SignalSpec {
    Iid(IidSpec),
    Periodic { period: usize, n: usize, rng: RngConfig },
    Logistic(LogisticSpec),
    Henon(HenonSpec),
    Flow(FlowSpec),
}

pub fn generate(spec: &SignalSpec) -> Result<TimeSeries> {
    match spec {
        SignalSpec::Iid(s) => gen_iid(s),
        SignalSpec::Periodic { period, n, rng } => gen_periodic(*period, *n, *rng),
        SignalSpec::Logistic(s) => gen_logistic(s),
        SignalSpec::Henon(s) => gen_henon(s),
        SignalSpec::Flow(s) => gen_flow(s),
    }
}

/// Offset each coordinate of `base` by an independent uniform draw in
/// `(-scale, scale)`. Used to give chaotic systems seed-dependent starts.
pub fn jitter(base: &[f64], scale: f64, rng: RngConfig) -> Vec<f64> {
    let mut r = rng.rng();
    base.iter()
        .map(|&b| b + scale * (2.0 * r.sample::<f64, _>(Open01) - 1.0))
        .collect()
}

/// Flat `key -> value` form of a spec.
pub type FlatConfig = BTreeMap<String, String>;

impl SignalSpec {
    pub fn to_config(&self) -> FlatConfig {
        let mut m = FlatConfig::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        match self {
            SignalSpec::Iid(s) => {
                put("kind", "iid".into());
                put("family", s.family.name().into());
                match s.family {
                    IidFamily::Uniform => {}
                    IidFamily::Gaussian { mean, sd } => {
                        put("mean", mean.to_string());
                        put("sd", sd.to_string());
                    }
                    IidFamily::PowerLaw { alpha, xmin } => {
                        put("alpha", alpha.to_string());
                        put("xmin", xmin.to_string());
                    }
                }
                put("n", s.n.to_string());
                put("seed", s.rng.seed.to_string());
                put("stream", s.rng.stream.to_string());
            }
            SignalSpec::Periodic { period, n, rng } => {
                put("kind", "periodic".into());
                put("period", period.to_string());
                put("n", n.to_string());
                put("seed", rng.seed.to_string());
                put("stream", rng.stream.to_string());
            }
            SignalSpec::Logistic(s) => {
                put("kind", "logistic".into());
                put("n", s.n.to_string());
                put("x0", s.x0.to_string());
                put("mu", s.mu.to_string());
            }
            SignalSpec::Henon(s) => {
                put("kind", "henon".into());
                put("n", s.n.to_string());
                put("x0", s.x0.to_string());
                put("y0", s.y0.to_string());
                put("a", s.a.to_string());
                put("b", s.b.to_string());
            }
            SignalSpec::Flow(s) => {
                put("kind", "flow".into());
                put("system", s.system.name().into());
                for (name, v) in s.system.param_names().iter().zip(&s.params) {
                    put(&format!("param.{name}"), v.to_string());
                }
                for (axis, v) in ["x", "y", "z"].iter().zip(&s.init) {
                    put(&format!("init.{axis}"), v.to_string());
                }
                put("dt", s.dt.to_string());
                put("transient", s.transient.to_string());
                put("stride", s.stride.to_string());
                put("component", s.component.to_string());
                put("n", s.n.to_string());
            }
        }
        m
    }

    pub fn from_config(m: &FlatConfig) -> Result<Self> {
        let kind = get_str(m, "kind")?;
        let spec = match kind {
            "iid" => {
                let family = match get_str(m, "family")? {
                    "uniform" => IidFamily::Uniform,
                    "gaussian" => IidFamily::Gaussian {
                        mean: get(m, "mean")?,
                        sd: get(m, "sd")?,
                    },
                    "powerlaw" => IidFamily::PowerLaw {
                        alpha: get(m, "alpha")?,
                        xmin: get(m, "xmin")?,
                    },
                    other => return Err(param(format!("unknown family {other:?}"))),
                };
                SignalSpec::Iid(IidSpec {
                    family,
                    n: get(m, "n")?,
                    rng: RngConfig::new(get(m, "seed")?, get(m, "stream")?),
                })
            }
            "periodic" => SignalSpec::Periodic {
                period: get(m, "period")?,
                n: get(m, "n")?,
                rng: RngConfig::new(get(m, "seed")?, get(m, "stream")?),
            },
            "logistic" => SignalSpec::Logistic(LogisticSpec {
                n: get(m, "n")?,
                x0: get(m, "x0")?,
                mu: get(m, "mu")?,
            }),
            "henon" => SignalSpec::Henon(HenonSpec {
                n: get(m, "n")?,
                x0: get(m, "x0")?,
                y0: get(m, "y0")?,
                a: get(m, "a")?,
                b: get(m, "b")?,
            }),
            "flow" => {
                let system: FlowSystem = get_str(m, "system")?.parse()?;
                let params = system
                    .param_names()
                    .iter()
                    .map(|name| get(m, &format!("param.{name}")))
                    .collect::<Result<Vec<f64>>>()?;
                SignalSpec::Flow(FlowSpec {
                    system,
                    params,
                    init: [get(m, "init.x")?, get(m, "init.y")?, get(m, "init.z")?],
                    dt: get(m, "dt")?,
                    transient: get(m, "transient")?,
                    stride: get(m, "stride")?,
                    component: get(m, "component")?,
                    n: get(m, "n")?,
                })
            }
            other => return Err(param(format!("unknown generator kind {other:?}"))),
        };
        Ok(spec)
    }
}

fn get_str<'a>(m: &'a FlatConfig, key: &str) -> Result<&'a str> {
    m.get(key)
        .map(String::as_str)
        .ok_or_else(|| param(format!("missing config key {key:?}")))
}

fn get<T: FromStr>(m: &FlatConfig, key: &str) -> Result<T> {
    let raw = get_str(m, key)?;
    raw.parse()
        .map_err(|_| param(format!("config key {key:?} has unparseable value {raw:?}")))
}

/// Render as sorted `key = value` lines.
pub fn format_flat_config(m: &FlatConfig) -> String {
    let mut out = String::new();
    for (k, v) in m {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// Parse `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_flat_config(text: &str) -> Result<FlatConfig> {
    let mut m = FlatConfig::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            row: i + 1,
            message: "expected `key = value`".into(),
        })?;
        m.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_draws() {
        let spec = IidSpec {
            family: IidFamily::Uniform,
            n: 3000,
            rng: RngConfig::new(7, 0),
        };
        let s = gen_iid(&spec).unwrap();
        assert_eq!(s.len(), 3000);
        assert!(s.values().iter().all(|&v| v > 0.0 && v < 1.0));
        let mean = s.values().iter().sum::<f64>() / 3000.0;
        assert!((mean - 0.5).abs() < 0.02);
        assert_eq!(gen_iid(&spec).unwrap(), s);
        let other = IidSpec {
            rng: RngConfig::new(7, 1),
            ..spec
        };
        assert_ne!(gen_iid(&other).unwrap(), s);
    }

    #[test]
    fn power_law_support_and_validation() {
        let spec = IidSpec {
            family: IidFamily::DEFAULT_POWER_LAW,
            n: 3000,
            rng: RngConfig::new(1, 0),
        };
        assert!(gen_iid(&spec).unwrap().values().iter().all(|&v| v >= 1.0));
        let bad = IidSpec {
            family: IidFamily::PowerLaw { alpha: 0.5, xmin: 1.0 },
            ..spec
        };
        assert!(matches!(gen_iid(&bad), Err(Error::InvalidParameter(_))));
        let bad_sd = IidSpec {
            family: IidFamily::Gaussian { mean: 0.0, sd: 0.0 },
            ..spec
        };
        assert!(gen_iid(&bad_sd).is_err());
    }

    #[test]
    fn power_law_tail_exponent() {
        // P(X > x) = (x / xmin)^-(alpha - 1): median of alpha = 2.5 is 2^(1/1.5)
        let spec = IidSpec {
            family: IidFamily::DEFAULT_POWER_LAW,
            n: 20_001,
            rng: RngConfig::new(5, 0),
        };
        let mut v = gen_iid(&spec).unwrap().into_values();
        v.sort_by(f64::total_cmp);
        let median = v[10_000];
        assert!((median - 2f64.powf(1.0 / 1.5)).abs() < 0.03, "{median}");
    }

    #[test]
    fn periodic_tiles() {
        let s = gen_periodic(4, 8, RngConfig::new(3, 0)).unwrap();
        let v = s.values();
        assert!((0..4).all(|i| v[i] == v[i + 4]));
        let full = gen_periodic(10, 10, RngConfig::new(3, 0)).unwrap();
        let mut sorted = full.values().to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
        assert!(gen_periodic(1, 8, RngConfig::default()).is_err());
        assert!(gen_periodic(9, 8, RngConfig::default()).is_err());
        let short = gen_periodic(3, 7, RngConfig::new(3, 0)).unwrap();
        assert_eq!(short.values()[6], short.values()[0]);
    }

    #[test]
    fn logistic_orbit() {
        let s = gen_logistic(&LogisticSpec::new(3000, 0.3)).unwrap();
        assert_eq!(s.values()[0], 0.3);
        assert!((s.values()[1] - 0.84).abs() < 1e-15);
        assert!(s.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(matches!(gen_logistic(&LogisticSpec::new(10, 0.5)), Err(Error::DegenerateOrbit(_))));
        assert!(matches!(gen_logistic(&LogisticSpec::new(10, 0.75)), Err(Error::DegenerateOrbit(_))));
        assert!(gen_logistic(&LogisticSpec::new(10, 0.0)).is_err());
        assert!(gen_logistic(&LogisticSpec::new(10, 1.2)).is_err());
    }

    #[test]
    fn henon_orbit() {
        let s = gen_henon(&HenonSpec::new(3000)).unwrap();
        let v = s.values();
        assert_eq!(&v[..3], &[0.0, 1.0, -0.3999999999999999]);
        assert!(v.iter().all(|x| x.abs() < 2.0));
        let runaway = HenonSpec { x0: 10.0, ..HenonSpec::new(100) };
        assert!(matches!(gen_henon(&runaway), Err(Error::Diverged { .. } | Error::NonFinite { .. })));
    }

    #[test]
    fn lorenz_defaults_are_bounded() {
        let s = gen_flow(&FlowSpec::new(FlowSystem::Lorenz, 3000)).unwrap();
        assert_eq!(s.len(), 3000);
        assert!(s.values().iter().all(|x| x.abs() < 25.0));
    }

    #[test]
    fn lorenz_origin_is_degenerate() {
        assert_eq!(FlowSystem::Lorenz.derivative(&FlowSystem::Lorenz.default_params(), [0.0; 3]), [0.0; 3]);
        let spec = FlowSpec {
            init: [0.0; 3],
            ..FlowSpec::new(FlowSystem::Lorenz, 10)
        };
        assert!(matches!(gen_flow(&spec), Err(Error::DegenerateOrbit(_))));
    }

    #[test]
    fn energy_system_bounded_and_aperiodic() {
        let s = gen_flow(&FlowSpec::new(FlowSystem::Energy, 3000)).unwrap();
        let v = s.values();
        assert!(v.iter().all(|x| x.abs() < 1e4));
        let mut sorted = v.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        assert_eq!(sorted.len(), v.len());
    }

    #[test]
    fn rk4_halving_step_agrees() {
        // max |x_dt - x_dt/2| over the first 10 steps of span 0.1 time units
        let gap = |dt: f64| {
            let stride = (0.01 / dt).round() as usize;
            let coarse = FlowSpec {
                dt,
                transient: 0,
                stride,
                ..FlowSpec::new(FlowSystem::Lorenz, 11)
            };
            let fine = FlowSpec {
                dt: dt / 2.0,
                stride: 2 * stride,
                ..coarse.clone()
            };
            let a = gen_flow(&coarse).unwrap();
            let b = gen_flow(&fine).unwrap();
            a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        };
        let g = [gap(0.01), gap(0.005), gap(0.0025)];
        // fourth order: each halving shrinks the gap about 16-fold
        for w in g.windows(2) {
            let ratio = w[0] / w[1];
            assert!((12.0..20.0).contains(&ratio), "{g:?}");
        }
        assert!(g[2] < 1e-8, "{g:?}");
    }

    #[test]
    fn rk4_is_exact_for_cubic_growth() {
        // ds/dt = (1, 2t, 3t^2) with t carried in s[0]
        let f = |s: [f64; 3]| [1.0, 2.0 * s[0], 3.0 * s[0] * s[0]];
        let mut s = [0.0; 3];
        for _ in 0..10 {
            s = rk4_step(f, s, 0.1);
        }
        assert!((s[1] - 1.0).abs() < 1e-12 && (s[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flow_validation() {
        let base = FlowSpec::new(FlowSystem::Lorenz, 10);
        assert!(gen_flow(&FlowSpec { dt: 0.0, ..base.clone() }).is_err());
        assert!(gen_flow(&FlowSpec { stride: 0, ..base.clone() }).is_err());
        assert!(gen_flow(&FlowSpec { params: vec![1.0], ..base.clone() }).is_err());
        let blowup = FlowSpec {
            dt: 10.0,
            transient: 50,
            ..base
        };
        assert!(matches!(gen_flow(&blowup), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn flat_config_round_trip() {
        let specs = [
            SignalSpec::Iid(IidSpec {
                family: IidFamily::Gaussian { mean: 0.1, sd: 2.5 },
                n: 100,
                rng: RngConfig::new(9, 2),
            }),
            SignalSpec::Iid(IidSpec {
                family: IidFamily::DEFAULT_POWER_LAW,
                n: 100,
                rng: RngConfig::new(9, 2),
            }),
            SignalSpec::Periodic {
                period: 5,
                n: 20,
                rng: RngConfig::new(1, 0),
            },
            SignalSpec::Logistic(LogisticSpec::new(50, 0.123456789)),
            SignalSpec::Henon(HenonSpec::new(50)),
            SignalSpec::Flow(FlowSpec {
                init: [1.0 / 3.0, 2.0, -0.1],
                ..FlowSpec::new(FlowSystem::Energy, 50)
            }),
        ];
        for spec in specs {
            let text = format_flat_config(&spec.to_config());
            let back = SignalSpec::from_config(&parse_flat_config(&text).unwrap()).unwrap();
            assert_eq!(back, spec);
        }
        assert!(SignalSpec::from_config(&parse_flat_config("kind = nope").unwrap()).is_err());
        assert!(parse_flat_config("garbage").is_err());
    }

    #[test]
    fn jitter_is_seeded_and_bounded() {
        let a = jitter(&[1.0, 1.0, 1.0], 0.01, RngConfig::new(4, 0));
        assert_eq!(a, jitter(&[1.0, 1.0, 1.0], 0.01, RngConfig::new(4, 0)));
        assert!(a.iter().all(|v| (v - 1.0).abs() < 0.01));
        assert_ne!(a, jitter(&[1.0, 1.0, 1.0], 0.01, RngConfig::new(5, 0)));
    }
}
