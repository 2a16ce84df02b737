//! Shared domain types and CSV ingestion.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered sequence of finite real samples with optional per-sample labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "value at index {pos} is not finite ({})",
                values[pos]
            )));
        }
        Ok(Self {
            values,
            labels: None,
        })
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} labels for {} values",
                labels.len(),
                values.len()
            )));
        }
        let mut series = Self::new(values)?;
        series.labels = Some(labels);
        Ok(series)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Contiguous sub-series, labels included.
    pub fn slice(&self, range: std::ops::Range<usize>) -> TimeSeries {
        TimeSeries {
            values: self.values[range.clone()].to_vec(),
            labels: self.labels.as_ref().map(|l| l[range].to_vec()),
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Serialize as CSV with a header row. Floats use the shortest
    /// representation that parses back to the identical `f64`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 20);
        match &self.labels {
            Some(labels) => {
                out.push_str("label,value\n");
                for (label, v) in labels.iter().zip(&self.values) {
                    out.push_str(label);
                    out.push(',');
                    out.push_str(&v.to_string());
                    out.push('\n');
                }
            }
            None => {
                out.push_str("value\n");
                for v in &self.values {
                    out.push_str(&v.to_string());
                    out.push('\n');
                }
            }
        }
        out
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Maximum number of intermediate samples allowed to block a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Penetrability(usize);

impl Penetrability {
    /// `rho = 0`: the plain horizontal visibility graph.
    pub const HVG: Penetrability = Penetrability(0);

    pub const fn new(rho: usize) -> Self {
        Self(rho)
    }

    pub const fn get(self) -> usize {
        self.0
    }

    /// Smallest possible degree of a node with full neighbourhoods on both sides, `2(rho + 1)`.
    pub const fn min_degree(self) -> usize {
        2 * (self.0 + 1)
    }
}

impl From<usize> for Penetrability {
    fn from(rho: usize) -> Self {
        Self(rho)
    }
}

impl fmt::Display for Penetrability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Seed plus stream selector for a ChaCha8 generator.
///
/// Equal configurations produce bit-identical random streams on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RngConfig {
    pub seed: u64,
    pub stream: u64,
}

impl RngConfig {
    pub const fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// The `k`-th sibling stream under the same seed.
    pub const fn substream(&self, k: u64) -> Self {
        Self {
            seed: self.seed,
            stream: self.stream.wrapping_add(k),
        }
    }
}

/// Column reference by zero-based position or header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{i}"),
            ColumnSelector::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub column: ColumnSelector,
    /// When `None` and the file has exactly two columns, the other column
    /// becomes the label column.
    pub label_column: Option<ColumnSelector>,
    pub has_header: bool,
}

impl LoadOptions {
    pub fn new(column: ColumnSelector, has_header: bool) -> Self {
        Self {
            column,
            label_column: None,
            has_header,
        }
    }
}

/// Read one numeric column of a CSV file.
pub fn load_series(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_series(&text, opts)
}

/// Parse CSV text. Row numbers in errors are 1-based file lines.
pub fn parse_series(text: &str, opts: &LoadOptions) -> Result<TimeSeries> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

    // a trailing newline does not make an empty last row; `lines()` already drops it
    let header: Option<Vec<&str>> = if opts.has_header {
        match lines.next() {
            Some((_, line)) => Some(line.split(',').map(str::trim).collect()),
            None => return Err(Error::EmptySeries),
        }
    } else {
        None
    };

    let resolve = |sel: &ColumnSelector| -> Result<usize> {
        match (sel, &header) {
            (ColumnSelector::Name(name), Some(h)) => {
                h.iter().position(|c| c == name).ok_or_else(|| Error::Parse {
                    row: 1,
                    message: format!("no column named {name:?} in header"),
                })
            }
            (ColumnSelector::Name(name), None) => Err(Error::param(format!(
                "column {name:?} selected by name but the file has no header"
            ))),
            (ColumnSelector::Index(i), _) => Ok(*i),
        }
    };
    let value_col = resolve(&opts.column)?;
    let explicit_label = opts.label_column.as_ref().map(resolve).transpose()?;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = header.as_ref().map(Vec::len);

    for (row, line) in lines {
        if line.trim().is_empty() {
            return Err(Error::Parse {
                row,
                message: "blank line".into(),
            });
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            Some(w) if w != fields.len() => {
                return Err(Error::Parse {
                    row,
                    message: format!("expected {w} fields, found {}", fields.len()),
                })
            }
            None => width = Some(fields.len()),
            _ => {}
        }
        let cell = fields.get(value_col).ok_or_else(|| Error::Parse {
            row,
            message: format!("no column {value_col}"),
        })?;
        let v: f64 = cell.parse().map_err(|_| Error::Parse {
            row,
            message: format!("cannot parse {cell:?} as a real number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                row,
                message: format!("non-finite value {cell:?}"),
            });
        }
        values.push(v);
        labels.push(fields.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    }

    if values.is_empty() {
        return Err(Error::EmptySeries);
    }

    let label_col = explicit_label.or_else(|| match width {
        Some(2) => Some(1 - value_col.min(1)),
        _ => None,
    });
    match label_col {
        Some(c) if c != value_col => {
            let labels = labels
                .into_iter()
                .enumerate()
                .map(|(i, mut fields)| {
                    if c < fields.len() {
                        Ok(std::mem::take(&mut fields[c]))
                    } else {
                        Err(Error::Parse {
                            row: i + 1 + usize::from(opts.has_header),
                            message: format!("no label column {c}"),
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            TimeSeries::with_labels(values, labels)
        }
        _ => TimeSeries::new(values),
    }
}

/// Map every value to `a * x + b`. Only order-preserving maps (`a > 0`) are accepted.
pub fn affine_transform(series: &TimeSeries, a: f64, b: f64) -> Result<TimeSeries> {
    if !(a > 0.0 && a.is_finite()) || !b.is_finite() {
        return Err(Error::param(format!(
            "affine map needs finite a > 0 and finite b, got a = {a}, b = {b}"
        )));
    }
    let values = series.values.iter().map(|x| a * x + b).collect();
    let mut out = TimeSeries::new(values)?;
    out.labels = series.labels.clone();
    Ok(out)
}
