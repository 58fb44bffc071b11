//! Link validation against the null ensemble and the sliding-window
//! indicators `n_t` (validated VG links) and `V_t` (validated visibility).
//!
//! Window `λ = 0, 1, …, ⌊(T - W) / L⌋` covers returns `λL .. λL + W`
//! (0-based, end exclusive) and is stamped with its last date. The record's
//! `end_index` is 1-based, so the sequence reads `W, W + L, W + 2L, …`.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ensemble::{distance_profile, generate_frequencies, DistanceProfile, EnsembleConfig, LinkFrequency};
use crate::error::{Error, Result};
use crate::garch::{filter, fit, FitOptions, FitReport, GjrGarchParams, NoiseKind};
use crate::timeseries::{
    compute_returns, historical_volatility, sample_std, PriceSeries, ReturnScale, ReturnSeries, Slice,
    VolatilitySeries,
};
use crate::visibility::{ivg_build, vg_build, GraphKind, IvgMode, VisibilityGraph};

/// Reported `V` when no IVG link is validated but some VG link is.
pub const V_CAP: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FitScope {
    /// One fit over the whole series.
    #[default]
    Global,
    /// Refit inside every window.
    PerWindow,
}

impl std::str::FromStr for FitScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(FitScope::Global),
            "per-window" => Ok(FitScope::PerWindow),
            other => Err(Error::InvalidParameter(format!("unknown fit scope `{other}`"))),
        }
    }
}

impl std::fmt::Display for FitScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitScope::Global => "global",
            FitScope::PerWindow => "per-window",
        })
    }
}

/// Which null frequency an empirical edge is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyMode {
    /// The pair's own frequency `p_ij`.
    #[default]
    PerPair,
    /// The distance average `p(|i - j|)`.
    Profile,
}

impl std::str::FromStr for FrequencyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-pair" => Ok(FrequencyMode::PerPair),
            "profile" => Ok(FrequencyMode::Profile),
            other => Err(Error::InvalidParameter(format!("unknown frequency mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for FrequencyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FrequencyMode::PerPair => "per-pair",
            FrequencyMode::Profile => "profile",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub rho: f64,
    pub window: usize,
    pub shift: usize,
    pub ensemble_size: usize,
    pub fit_scope: FitScope,
    pub ivg_mode: IvgMode,
    pub frequency_mode: FrequencyMode,
    /// Innovation family for fits.
    pub noise: NoiseKind,
    pub seed: u64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            rho: 0.1,
            window: 500,
            shift: 60,
            ensemble_size: 3000,
            fit_scope: FitScope::Global,
            ivg_mode: IvgMode::Literal,
            frequency_mode: FrequencyMode::PerPair,
            noise: NoiseKind::T,
            seed: 0,
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParameter(format!("rho must lie in (0, 1], got {rho}")));
    }
    Ok(())
}

impl ValidationConfig {
    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho)?;
        if self.window < 2 {
            return Err(Error::InvalidParameter(format!("window must be >= 2, got {}", self.window)));
        }
        if self.shift < 1 {
            return Err(Error::InvalidParameter("shift must be >= 1".into()));
        }
        if self.ensemble_size < 1 {
            return Err(Error::InvalidParameter("ensemble size must be >= 1".into()));
        }
        Ok(())
    }
}

/// `⌊(len - window) / shift⌋ + 1`.
pub fn window_count(len: usize, window: usize, shift: usize) -> Result<usize> {
    if len < window {
        return Err(Error::TooShort { needed: window, got: len });
    }
    if shift == 0 {
        return Err(Error::InvalidParameter("shift must be >= 1".into()));
    }
    Ok((len - window) / shift + 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedLinks {
    pub kind: GraphKind,
    pub edges: Vec<(usize, usize)>,
}

impl ValidatedLinks {
    pub fn count(&self) -> usize {
        self.edges.len()
    }
}

fn check_pairing(g: &VisibilityGraph, freq: &LinkFrequency) -> Result<()> {
    if g.node_count() != freq.node_count() {
        return Err(Error::DimensionMismatch {
            expected: freq.node_count(),
            got: g.node_count(),
        });
    }
    if let Some(mode) = g.ivg_mode() {
        if mode != freq.ivg_mode() {
            return Err(Error::InvalidParameter(format!(
                "graph uses {mode} ivg but ensemble uses {}",
                freq.ivg_mode()
            )));
        }
    }
    Ok(())
}

/// Edges of `g` whose null frequency `count / Z` is at most `rho`.
pub fn validate_links(g: &VisibilityGraph, freq: &LinkFrequency, rho: f64) -> Result<ValidatedLinks> {
    check_rho(rho)?;
    check_pairing(g, freq)?;
    let kind = g.kind();
    let z = freq.ensemble_size() as f64;
    let edges = g
        .edges()
        .filter(|&(i, j)| freq.count(kind, i, j) as f64 / z <= rho)
        .collect();
    Ok(ValidatedLinks { kind, edges })
}

/// As [`validate_links`] but against the distance average `p(|i - j|)`.
pub fn validate_links_profile(g: &VisibilityGraph, profile: &DistanceProfile, rho: f64) -> Result<ValidatedLinks> {
    check_rho(rho)?;
    if profile.kind != g.kind() || profile.mean.len() + 1 != g.node_count() {
        return Err(Error::DimensionMismatch {
            expected: profile.mean.len() + 1,
            got: g.node_count(),
        });
    }
    let edges = g.edges().filter(|&(i, j)| profile.mean[j - i - 1] <= rho).collect();
    Ok(ValidatedLinks { kind: g.kind(), edges })
}

/// `(n / ⟨d⟩) / (n̄ / ⟨d̄⟩)`. With `n̄ = 0` the result is [`V_CAP`] for
/// `n > 0` and NaN for `n = 0`.
pub fn validated_visibility(n: usize, mean_d: f64, n_bar: usize, mean_d_bar: f64) -> Result<f64> {
    if !(mean_d > 0.0 && mean_d_bar > 0.0) {
        return Err(Error::ZeroMeanDegree);
    }
    Ok(match (n, n_bar) {
        (0, 0) => f64::NAN,
        (_, 0) => V_CAP,
        _ => (n as f64 / mean_d) / (n_bar as f64 / mean_d_bar),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowFlag {
    /// No validated IVG link; `V` is [`V_CAP`].
    Capped,
    /// No validated link of either kind; `V` is NaN.
    Undefined,
    /// The per-window fit failed and the window was skipped.
    FitFailed,
}

impl WindowFlag {
    fn as_str(self) -> &'static str {
        match self {
            WindowFlag::Capped => "capped",
            WindowFlag::Undefined => "undefined",
            WindowFlag::FitFailed => "fit-failed",
        }
    }
}

mod nan_as_null {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_some(v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    /// Window number `λ`.
    pub window: usize,
    /// 1-based position of the last sample.
    pub end_index: usize,
    pub end_label: Option<String>,
    pub n: usize,
    pub n_bar: usize,
    pub vg_edges: usize,
    pub ivg_edges: usize,
    pub mean_deg_vg: f64,
    pub mean_deg_ivg: f64,
    #[serde(with = "nan_as_null")]
    pub v: f64,
    /// Initial volatility of the window's null ensemble.
    pub sigma0: f64,
    pub flags: Vec<WindowFlag>,
    /// Window parameters under per-window scope.
    pub params: Option<GjrGarchParams>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: ValidationConfig,
    /// Global null parameters; `None` under per-window scope.
    pub params: Option<GjrGarchParams>,
    pub series_length: usize,
    pub version: String,
    /// User-supplied event dates for plot markers.
    pub events: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSeries {
    pub records: Vec<WindowRecord>,
    pub provenance: Provenance,
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

impl IndicatorSeries {
    pub fn n_series(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.n).collect()
    }

    pub fn v_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.v).collect()
    }

    /// CSV preceded by `# key=value` provenance lines. NaN cells are empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let p = &self.provenance;
        writeln!(out, "# version={}", p.version)?;
        writeln!(out, "# series_length={}", p.series_length)?;
        writeln!(out, "# seed={}", p.config.seed)?;
        writeln!(out, "# config={}", serde_json::to_string(&p.config)?)?;
        writeln!(out, "# params={}", serde_json::to_string(&p.params)?)?;
        for e in &p.events {
            writeln!(out, "# event={e}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["end_date", "end_index", "n", "n_bar", "mean_deg_vg", "mean_deg_ivg", "V", "flags"])?;
        for r in &self.records {
            let flags: Vec<&str> = r.flags.iter().map(|f| f.as_str()).collect();
            w.write_record([
                r.end_label.clone().unwrap_or_default(),
                r.end_index.to_string(),
                r.n.to_string(),
                r.n_bar.to_string(),
                fmt_f64(r.mean_deg_vg),
                fmt_f64(r.mean_deg_ivg),
                fmt_f64(r.v),
                flags.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Initial volatilities are rounded to this grid before simulation, so that
/// cached and fresh ensembles coincide.
pub const SIGMA0_QUANTUM: f64 = 1e-6;

pub fn quantize_sigma0(sigma0: f64) -> f64 {
    ((sigma0 / SIGMA0_QUANTUM).round() * SIGMA0_QUANTUM).max(SIGMA0_QUANTUM)
}

/// Ensembles keyed by `(params, length, sigma0, seed, Z, ivg mode)`.
#[derive(Debug, Default)]
pub struct EnsembleCache {
    map: Mutex<HashMap<String, Arc<LinkFrequency>>>,
}

impl EnsembleCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_generate(&self, cfg: &EnsembleConfig) -> Result<Arc<LinkFrequency>> {
        let key = format!(
            "{:?}|{}|{}|{}|{}|{}",
            cfg.params,
            cfg.length,
            cfg.sigma0.to_bits(),
            cfg.seed,
            cfg.size,
            cfg.ivg_mode
        );
        if let Some(f) = self.map.lock().ok().and_then(|m| m.get(&key).cloned()) {
            return Ok(f);
        }
        let f = Arc::new(generate_frequencies(cfg)?);
        if let Ok(mut m) = self.map.lock() {
            m.entry(key).or_insert_with(|| f.clone());
        }
        Ok(f)
    }
}

/// Source of the null-model parameters for each window.
#[derive(Debug, Clone)]
pub enum NullModel {
    Global(GjrGarchParams),
    PerWindow(FitOptions),
}

type Progress = Box<dyn Fn(usize, usize) + Send + Sync>;

/// Sliding-window driver holding the ensemble cache and an optional
/// `(finished, total)` progress callback.
#[derive(Default)]
pub struct Runner {
    cache: EnsembleCache,
    progress: Option<Progress>,
}

struct WindowOutcome {
    end_index: usize,
    end_label: Option<String>,
    sigma0: f64,
    params: Option<GjrGarchParams>,
    body: std::result::Result<WindowGraphs, String>,
}

struct WindowGraphs {
    vg_probs: Vec<f64>,
    ivg_probs: Vec<f64>,
    mean_deg_vg: f64,
    mean_deg_ivg: f64,
}

fn edge_probabilities(g: &VisibilityGraph, freq: &LinkFrequency, mode: FrequencyMode) -> Vec<f64> {
    let kind = g.kind();
    match mode {
        FrequencyMode::PerPair => {
            let z = freq.ensemble_size() as f64;
            g.edges().map(|(i, j)| freq.count(kind, i, j) as f64 / z).collect()
        }
        FrequencyMode::Profile => {
            let p = distance_profile(freq, kind);
            g.edges().map(|(i, j)| p.mean[j - i - 1]).collect()
        }
    }
}

fn record_for(lambda: usize, o: &WindowOutcome, rho: f64) -> Result<WindowRecord> {
    let mut rec = WindowRecord {
        window: lambda,
        end_index: o.end_index,
        end_label: o.end_label.clone(),
        n: 0,
        n_bar: 0,
        vg_edges: 0,
        ivg_edges: 0,
        mean_deg_vg: f64::NAN,
        mean_deg_ivg: f64::NAN,
        v: f64::NAN,
        sigma0: o.sigma0,
        flags: Vec::new(),
        params: o.params,
        error: None,
    };
    let g = match &o.body {
        Ok(g) => g,
        Err(msg) => {
            rec.flags.push(WindowFlag::FitFailed);
            rec.error = Some(msg.clone());
            return Ok(rec);
        }
    };
    rec.n = g.vg_probs.iter().filter(|&&p| p <= rho).count();
    rec.n_bar = g.ivg_probs.iter().filter(|&&p| p <= rho).count();
    rec.vg_edges = g.vg_probs.len();
    rec.ivg_edges = g.ivg_probs.len();
    rec.mean_deg_vg = g.mean_deg_vg;
    rec.mean_deg_ivg = g.mean_deg_ivg;
    rec.v = if rec.n_bar == 0 {
        // an empty IVG has zero mean degree; the sentinel rule still applies
        if rec.n == 0 {
            f64::NAN
        } else {
            V_CAP
        }
    } else {
        validated_visibility(rec.n, g.mean_deg_vg, rec.n_bar, g.mean_deg_ivg)?
    };
    if rec.n_bar == 0 {
        rec.flags.push(if rec.n == 0 {
            WindowFlag::Undefined
        } else {
            WindowFlag::Capped
        });
    }
    Ok(rec)
}

impl Runner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_progress(mut self, f: impl Fn(usize, usize) + Send + Sync + 'static) -> Self {
        self.progress = Some(Box::new(f));
        self
    }

    pub fn cache(&self) -> &EnsembleCache {
        &self.cache
    }

    fn window(
        &self,
        lambda: usize,
        vol: Option<&VolatilitySeries>,
        returns: &ReturnSeries,
        cfg: &ValidationConfig,
        null: &NullModel,
    ) -> Result<WindowOutcome> {
        let w = cfg.window;
        let start = lambda * cfg.shift;
        let r = returns.slice(start, w)?;
        let sigma0 = quantize_sigma0(sample_std(r.values()).unwrap_or(0.0));
        let mut outcome = WindowOutcome {
            end_index: start + w,
            end_label: returns.labels().map(|l| l[start + w - 1].clone()),
            sigma0,
            params: None,
            body: Err(String::new()),
        };
        let (params, y) = match null {
            NullModel::Global(p) => {
                let vol = vol.ok_or_else(|| Error::InvalidParameter("global scope needs a volatility series".into()))?;
                (*p, vol.slice(start, w)?.values().to_vec())
            }
            NullModel::PerWindow(options) => match fit(&r, cfg.noise, options) {
                Ok(report) => {
                    outcome.params = Some(report.params);
                    let v = filter(&report.params, &r, report.sigma0)?;
                    (report.params, v.values().to_vec())
                }
                Err(e) => {
                    outcome.body = Err(e.to_string());
                    return Ok(outcome);
                }
            },
        };
        let ens = EnsembleConfig {
            size: cfg.ensemble_size,
            length: w,
            sigma0,
            seed: cfg.seed,
            params,
            ivg_mode: cfg.ivg_mode,
        };
        let freq = self.cache.get_or_generate(&ens)?;
        let vg = vg_build(&y)?;
        let ivg = ivg_build(&y, cfg.ivg_mode)?;
        outcome.body = Ok(WindowGraphs {
            vg_probs: edge_probabilities(&vg, &freq, cfg.frequency_mode),
            ivg_probs: edge_probabilities(&ivg, &freq, cfg.frequency_mode),
            mean_deg_vg: 2.0 * vg.edge_count() as f64 / w as f64,
            mean_deg_ivg: 2.0 * ivg.edge_count() as f64 / w as f64,
        });
        Ok(outcome)
    }

    /// One indicator series per threshold in `rhos`, all sharing the same
    /// graphs and ensembles. `vol` is required under [`NullModel::Global`]
    /// and ignored otherwise.
    pub fn run(
        &self,
        vol: Option<&VolatilitySeries>,
        returns: &ReturnSeries,
        cfg: &ValidationConfig,
        null: &NullModel,
        rhos: &[f64],
    ) -> Result<Vec<IndicatorSeries>> {
        cfg.validate()?;
        for &rho in rhos {
            check_rho(rho)?;
        }
        if let (Some(v), NullModel::Global(_)) = (vol, null) {
            if v.len() != returns.len() {
                return Err(Error::DimensionMismatch {
                    expected: returns.len(),
                    got: v.len(),
                });
            }
        }
        let count = window_count(returns.len(), cfg.window, cfg.shift)?;
        let done = std::sync::atomic::AtomicUsize::new(0);
        let outcomes: Vec<WindowOutcome> = (0..count)
            .into_par_iter()
            .map(|lambda| {
                let o = self.window(lambda, vol, returns, cfg, null).map_err(|e| Error::Window {
                    window: lambda,
                    source: Box::new(e),
                });
                if let Some(p) = &self.progress {
                    p(done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1, count);
                }
                o
            })
            .collect::<Result<_>>()?;

        let global = match null {
            NullModel::Global(p) => Some(*p),
            NullModel::PerWindow(_) => None,
        };
        rhos.iter()
            .map(|&rho| {
                let records = outcomes
                    .iter()
                    .enumerate()
                    .map(|(lambda, o)| record_for(lambda, o, rho))
                    .collect::<Result<_>>()?;
                Ok(IndicatorSeries {
                    records,
                    provenance: Provenance {
                        config: ValidationConfig { rho, ..cfg.clone() },
                        params: global,
                        series_length: returns.len(),
                        version: env!("CARGO_PKG_VERSION").to_string(),
                        events: Vec::new(),
                    },
                })
            })
            .collect()
    }
}

/// Indicator for one threshold with fixed null parameters; `vol` is the
/// series whose graphs are validated and `returns` supplies each window's
/// initial volatility.
pub fn sliding_indicator(
    vol: &VolatilitySeries,
    returns: &ReturnSeries,
    cfg: &ValidationConfig,
    params: &GjrGarchParams,
) -> Result<IndicatorSeries> {
    let mut out = Runner::new().run(Some(vol), returns, cfg, &NullModel::Global(*params), &[cfg.rho])?;
    Ok(out.remove(0))
}

/// Conditional volatility of the price series' percent returns under
/// `params`, or under a fresh fit when `params` is `None`. The recursion
/// starts from the historical volatility of all returns.
pub fn conditional_volatility_series(
    prices: &PriceSeries,
    params: Option<&GjrGarchParams>,
    noise: NoiseKind,
    options: &FitOptions,
) -> Result<(ReturnSeries, VolatilitySeries, Option<FitReport>)> {
    let returns = compute_returns(prices, ReturnScale::Percent);
    let (params, report) = match params {
        Some(p) => (*p, None),
        None => {
            let report = fit(&returns, noise, options)?;
            (report.params, Some(report))
        }
    };
    let sigma0 = historical_volatility(&returns, returns.len())?;
    let vol = filter(&params, &returns, sigma0)?;
    Ok((returns, vol, report))
}

/// Full pipeline from prices: returns, null parameters by scope, then the
/// sliding indicator for every threshold in `rhos`.
pub fn indicator_from_prices(
    runner: &Runner,
    prices: &PriceSeries,
    cfg: &ValidationConfig,
    params: Option<&GjrGarchParams>,
    options: &FitOptions,
    rhos: &[f64],
) -> Result<(Vec<IndicatorSeries>, Option<FitReport>)> {
    match cfg.fit_scope {
        FitScope::Global => {
            let (returns, vol, report) = conditional_volatility_series(prices, params, cfg.noise, options)?;
            let p = report.as_ref().map(|r| r.params).or(params.copied()).ok_or(Error::EmptyInput)?;
            let series = runner.run(Some(&vol), &returns, cfg, &NullModel::Global(p), rhos)?;
            Ok((series, report))
        }
        FitScope::PerWindow => {
            let returns = compute_returns(prices, ReturnScale::Percent);
            let series = runner.run(None, &returns, cfg, &NullModel::PerWindow(options.clone()), rhos)?;
            Ok((series, None))
        }
    }
}
