//! Price, return and volatility series.
//!
//! Node indices of every graph built downstream are row indices of these
//! series; date labels travel alongside as opaque strings and are never
//! parsed or resampled.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReturnScale {
    Raw,
    #[default]
    Percent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolatilityKind {
    Historical,
    Conditional,
}

/// Closing prices, strictly positive, at least two of them.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
    scale: ReturnScale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolatilitySeries {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
    kind: VolatilityKind,
}

fn check_labels(labels: &Option<Vec<String>>, len: usize) -> Result<()> {
    if let Some(labels) = labels {
        if labels.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: labels.len(),
            });
        }
        if let Some(pos) = labels.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidRow {
                row: pos + 2,
                reason: format!(
                    "label `{}` does not follow `{}`",
                    labels[pos + 1],
                    labels[pos]
                ),
            });
        }
    }
    Ok(())
}

impl PriceSeries {
    pub fn new(values: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidRow {
                row: pos + 1,
                reason: format!("price {} is not positive", values[pos]),
            });
        }
        check_labels(&labels, values.len())?;
        Ok(Self { values, labels })
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
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>, labels: Option<Vec<String>>, scale: ReturnScale) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        check_labels(&labels, values.len())?;
        Ok(Self {
            values,
            labels,
            scale,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn scale(&self) -> ReturnScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl VolatilitySeries {
    pub fn new(values: Vec<f64>, labels: Option<Vec<String>>, kind: VolatilityKind) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::NonFinite { index });
        }
        check_labels(&labels, values.len())?;
        Ok(Self {
            values,
            labels,
            kind,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn kind(&self) -> VolatilityKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same series multiplied by `factor > 0`, labels untouched.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Self::new(
            self.values.iter().map(|v| v * factor).collect(),
            self.labels.clone(),
            self.kind,
        )
    }
}

/// Contiguous sub-range extraction shared by all series kinds.
///
/// `start` is 0-based; labels are sliced together with the values.
pub trait Slice: Sized {
    fn slice(&self, start: usize, len: usize) -> Result<Self>;
}

fn slice_parts(
    values: &[f64],
    labels: Option<&[String]>,
    start: usize,
    len: usize,
) -> Result<(Vec<f64>, Option<Vec<String>>)> {
    let end = start.checked_add(len).unwrap_or(usize::MAX);
    if end > values.len() {
        return Err(Error::OutOfRange {
            start,
            end,
            len: values.len(),
        });
    }
    Ok((
        values[start..end].to_vec(),
        labels.map(|l| l[start..end].to_vec()),
    ))
}

impl Slice for PriceSeries {
    fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let (values, labels) = slice_parts(&self.values, self.labels(), start, len)?;
        Self::new(values, labels)
    }
}

impl Slice for ReturnSeries {
    fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let (values, labels) = slice_parts(&self.values, self.labels(), start, len)?;
        Ok(Self {
            values,
            labels,
            scale: self.scale,
        })
    }
}

impl Slice for VolatilitySeries {
    fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let (values, labels) = slice_parts(&self.values, self.labels(), start, len)?;
        Ok(Self {
            values,
            labels,
            kind: self.kind,
        })
    }
}

/// Column names used by [`load_csv`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnConfig {
    pub price: String,
    /// Label column; silently ignored when the header does not contain it.
    pub date: Option<String>,
}

impl Default for ColumnConfig {
    fn default() -> Self {
        Self {
            price: "close".to_string(),
            date: Some("date".to_string()),
        }
    }
}

/// Reads a headed UTF-8 CSV of closing prices. Data rows are numbered from 1
/// in error messages.
pub fn load_csv<R: Read>(source: R, columns: &ColumnConfig) -> Result<PriceSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyInput);
    }
    let price_idx = headers
        .iter()
        .position(|h| h == columns.price)
        .ok_or_else(|| Error::MissingColumn(columns.price.clone()))?;
    let date_idx = columns
        .date
        .as_ref()
        .and_then(|d| headers.iter().position(|h| h == d));

    let mut values = Vec::new();
    let mut labels = date_idx.map(|_| Vec::new());
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let raw = record.get(price_idx).ok_or_else(|| Error::InvalidRow {
            row,
            reason: "missing price field".to_string(),
        })?;
        let price: f64 = raw.parse().map_err(|_| Error::InvalidRow {
            row,
            reason: format!("cannot parse price `{raw}`"),
        })?;
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::InvalidRow {
                row,
                reason: format!("price {price} is not positive"),
            });
        }
        values.push(price);
        if let (Some(labels), Some(idx)) = (labels.as_mut(), date_idx) {
            labels.push(record.get(idx).unwrap_or_default().to_string());
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    PriceSeries::new(values, labels)
}

/// Simple returns `p[t+1]/p[t] - 1`, optionally in percent. Each return
/// carries the label of the later price.
pub fn compute_returns(prices: &PriceSeries, scale: ReturnScale) -> ReturnSeries {
    let factor = match scale {
        ReturnScale::Raw => 1.0,
        ReturnScale::Percent => 100.0,
    };
    let values = prices
        .values
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0] * factor)
        .collect();
    ReturnSeries {
        values,
        labels: prices.labels.as_ref().map(|l| l[1..].to_vec()),
        scale,
    }
}

/// Sample standard deviation (divisor `n - 1`). `None` for fewer than two values.
pub fn sample_std(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Some((ss / (n - 1) as f64).sqrt())
}

/// Historical volatility: sample standard deviation of the first `t` returns.
pub fn historical_volatility(returns: &ReturnSeries, t: usize) -> Result<f64> {
    if t < 2 {
        return Err(Error::InvalidParameter(format!(
            "historical volatility needs t >= 2, got {t}"
        )));
    }
    if t > returns.len() {
        return Err(Error::OutOfRange {
            start: 0,
            end: t,
            len: returns.len(),
        });
    }
    Ok(sample_std(&returns.values[..t]).expect("t >= 2"))
}
