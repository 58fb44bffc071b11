//! GJR-GARCH(1,1,1): conditional variance filtering, likelihood, maximum
//! likelihood fitting and simulation.
//!
//! The conditional variance follows
//!
//! ```text
//! sigma_t^2 = alpha0 + alpha1 a_{t-1}^2 + beta1 sigma_{t-1}^2 + gamma1 a_{t-1}^2 I[a_{t-1} < 0]
//! a_t = sigma_t eps_t
//! ```
//!
//! with `eps_t` i.i.d. zero mean and unit variance. The first observation
//! always has volatility `sigma0` exactly.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::simplex::{Minimum, NelderMead};
use crate::stats::{stream_rng, NoiseDensity, NoiseFamily, NoiseSampler};
use crate::timeseries::{
    historical_volatility, ReturnScale, ReturnSeries, VolatilityKind, VolatilitySeries,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GjrGarchParams {
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub gamma1: f64,
    pub noise: NoiseFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationarity {
    pub stationary: bool,
    /// `1 - (alpha1 + beta1 + gamma1 / 2)`
    pub margin: f64,
}

impl GjrGarchParams {
    pub fn new(alpha0: f64, alpha1: f64, beta1: f64, gamma1: f64, noise: NoiseFamily) -> Result<Self> {
        let p = Self {
            alpha0,
            alpha1,
            beta1,
            gamma1,
            noise,
        };
        p.validate()?;
        Ok(p)
    }

    /// Sign constraints and noise law; stationarity is checked separately.
    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha0, self.alpha1, self.beta1, self.gamma1];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        if self.alpha0 <= 0.0 {
            return Err(Error::InvalidParameter(format!("alpha0 must be > 0, got {}", self.alpha0)));
        }
        if self.alpha1 < 0.0 || self.beta1 < 0.0 {
            return Err(Error::InvalidParameter("alpha1 and beta1 must be >= 0".into()));
        }
        if self.alpha1 + self.gamma1 < 0.0 {
            return Err(Error::InvalidParameter("alpha1 + gamma1 must be >= 0".into()));
        }
        self.noise.validate()
    }

    pub fn persistence(&self) -> f64 {
        self.alpha1 + self.beta1 + self.gamma1 / 2.0
    }

    pub fn stationarity_check(&self) -> Stationarity {
        let margin = 1.0 - self.persistence();
        Stationarity {
            stationary: self.alpha0 > 0.0 && margin > 0.0,
            margin,
        }
    }

    fn require_stationary(&self) -> Result<()> {
        self.validate()?;
        if !self.stationarity_check().stationary {
            return Err(Error::NotStationary {
                persistence: self.persistence(),
            });
        }
        Ok(())
    }

    /// Long-run variance `alpha0 / (1 - persistence)`.
    pub fn unconditional_variance(&self) -> Result<f64> {
        self.require_stationary()?;
        Ok(self.alpha0 / (1.0 - self.persistence()))
    }

    /// Time scale in steps over which a perturbed variance relaxes back to
    /// its long-run level, `-1 / ln(persistence)`.
    pub fn relaxation_time(&self) -> Result<f64> {
        let p = self.persistence();
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::NotStationary { persistence: p });
        }
        Ok(-1.0 / p.ln())
    }

    #[inline]
    fn next_variance(&self, prev_r: f64, prev_var: f64) -> f64 {
        next_variance(self.alpha0, self.alpha1, self.beta1, self.gamma1, prev_r, prev_var)
    }
}

#[inline(always)]
fn next_variance(alpha0: f64, alpha1: f64, beta1: f64, gamma1: f64, prev_r: f64, prev_var: f64) -> f64 {
    let shock = if prev_r < 0.0 { alpha1 + gamma1 } else { alpha1 };
    alpha0 + shock * prev_r * prev_r + beta1 * prev_var
}

fn check_sigma0(sigma0: f64) -> Result<()> {
    if !(sigma0.is_finite() && sigma0 > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma0 must be > 0, got {sigma0}")));
    }
    Ok(())
}

/// Conditional volatility of `returns` under `params`, starting at `sigma0`.
pub fn filter(params: &GjrGarchParams, returns: &ReturnSeries, sigma0: f64) -> Result<VolatilitySeries> {
    params.require_stationary()?;
    check_sigma0(sigma0)?;
    let r = returns.values();
    let mut out = Vec::with_capacity(r.len());
    let mut var = sigma0 * sigma0;
    for t in 0..r.len() {
        if t > 0 {
            var = params.next_variance(r[t - 1], var);
            if !(var.is_finite() && var > 0.0) {
                return Err(Error::NonFinite { index: t });
            }
        }
        out.push(var.sqrt());
    }
    VolatilitySeries::new(
        out,
        returns.labels().map(<[String]>::to_vec),
        VolatilityKind::Conditional,
    )
}

// Negative log-likelihood without validation, +inf when the recursion leaves
// the admissible region.
fn neg_log_likelihood(
    coefs: [f64; 4],
    density: &NoiseDensity,
    r: &[f64],
    var0: f64,
) -> f64 {
    let [alpha0, alpha1, beta1, gamma1] = coefs;
    let mut var = var0;
    let mut ll = 0.0;
    for t in 0..r.len() {
        if t > 0 {
            var = next_variance(alpha0, alpha1, beta1, gamma1, r[t - 1], var);
            if !(var > 0.0 && var.is_finite()) {
                return f64::INFINITY;
            }
        }
        let x2 = r[t] * r[t] / var;
        ll += density.ln_pdf(x2.sqrt()) - 0.5 * var.ln();
    }
    if ll.is_finite() {
        -ll
    } else {
        f64::INFINITY
    }
}

/// `sum_t [ln f(r_t / sigma_t) - ln sigma_t]` with `sigma` from [`filter`].
pub fn log_likelihood(params: &GjrGarchParams, returns: &ReturnSeries, sigma0: f64) -> Result<f64> {
    params.require_stationary()?;
    check_sigma0(sigma0)?;
    let density = params.noise.density()?;
    let coefs = [params.alpha0, params.alpha1, params.beta1, params.gamma1];
    let nll = neg_log_likelihood(coefs, &density, returns.values(), sigma0 * sigma0);
    if nll.is_finite() {
        Ok(-nll)
    } else {
        Err(Error::InvalidParameter("log-likelihood is not finite".into()))
    }
}

/// Runs the recursion forward with fresh innovations, calling
/// `emit(return, volatility)` once per step.
pub(crate) fn simulate_with<R: Rng + ?Sized>(
    params: &GjrGarchParams,
    sampler: &NoiseSampler,
    length: usize,
    sigma0: f64,
    rng: &mut R,
    mut emit: impl FnMut(f64, f64),
) {
    let mut var = sigma0 * sigma0;
    let mut prev_r = 0.0;
    for t in 0..length {
        if t > 0 {
            var = params.next_variance(prev_r, var);
        }
        let sigma = var.sqrt();
        let r = sigma * sampler.sample(rng);
        emit(r, sigma);
        prev_r = r;
    }
}

/// Simulated returns and their conditional volatilities; deterministic in
/// `(params, length, sigma0, seed)`.
pub fn simulate(
    params: &GjrGarchParams,
    length: usize,
    sigma0: f64,
    seed: u64,
) -> Result<(ReturnSeries, VolatilitySeries)> {
    params.require_stationary()?;
    check_sigma0(sigma0)?;
    let sampler = params.noise.sampler()?;
    let mut rng = stream_rng(seed, 0);
    let mut returns = Vec::with_capacity(length);
    let mut vol = Vec::with_capacity(length);
    simulate_with(params, &sampler, length, sigma0, &mut rng, |r, s| {
        returns.push(r);
        vol.push(s);
    });
    Ok((
        ReturnSeries::new(returns, None, ReturnScale::Percent)?,
        VolatilitySeries::new(vol, None, VolatilityKind::Conditional)?,
    ))
}

/// Innovation family to fit; the degrees of freedom are estimated for `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Normal,
    #[default]
    T,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(NoiseKind::Normal),
            "t" => Ok(NoiseKind::T),
            other => Err(Error::InvalidParameter(format!("unknown noise `{other}`"))),
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseKind::Normal => "normal",
            NoiseKind::T => "t",
        })
    }
}

/// Minimum series length accepted by [`fit`] (one trading year).
pub const MIN_FIT_LENGTH: usize = 250;

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Number of starting points taken from the built-in grid (at most 5).
    pub starts: usize,
    pub ftol: f64,
    pub max_evals: usize,
    /// Restarts from the incumbent until an improvement below `ftol`.
    pub max_restarts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            ftol: 1e-8,
            max_evals: 20_000,
            max_restarts: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HessianStatus {
    /// Full observed-information matrix was positive definite.
    Full,
    /// Boundary coordinates dropped before inversion.
    Projected,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub name: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub t_statistic: Option<f64>,
    pub p_value: Option<f64>,
    /// The two-sided p-value underflowed to zero.
    pub p_value_underflow: bool,
    pub at_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: GjrGarchParams,
    /// alpha0, alpha1, beta1, gamma1 and, for t noise, dof.
    pub estimates: Vec<ParamEstimate>,
    pub log_likelihood: f64,
    pub sigma0: f64,
    pub observations: usize,
    pub converged: bool,
    pub iterations: usize,
    pub hessian: HessianStatus,
    /// Inverse observed information in the order of `estimates`; rows and
    /// columns of coordinates dropped under `Projected` are zero.
    pub covariance: Option<Vec<Vec<f64>>>,
}

impl FitReport {
    pub fn estimate(&self, name: &str) -> Option<&ParamEstimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    /// Delta-method standard error of `alpha1 + beta1 + gamma1 / 2`.
    pub fn persistence_std_error(&self) -> Option<f64> {
        let cov = self.covariance.as_ref()?;
        let g = [0.0, 1.0, 1.0, 0.5];
        let mut v = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                v += g[i] * g[j] * cov[i][j];
            }
        }
        (v.is_finite() && v >= 0.0).then(|| v.sqrt())
    }

    pub fn std_errors(&self) -> Vec<Option<f64>> {
        self.estimates.iter().map(|e| e.std_error).collect()
    }

    pub fn t_statistics(&self) -> Vec<Option<f64>> {
        self.estimates.iter().map(|e| e.t_statistic).collect()
    }

    pub fn p_values(&self) -> Vec<Option<f64>> {
        self.estimates.iter().map(|e| e.p_value).collect()
    }

    /// Plain-text parameter table: estimate, std. error, t-statistic, p-value.
    pub fn write_table<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let opt = |v: Option<f64>, prec: usize| match v {
            Some(x) => format!("{x:.prec$}"),
            None => "n/a".to_string(),
        };
        writeln!(
            out,
            "{:<10} {:>12} {:>12} {:>12} {:>14}",
            "parameter", "estimate", "std. error", "t-statistic", "p-value"
        )?;
        for e in &self.estimates {
            let p = if e.p_value_underflow {
                "0 (underflow)".to_string()
            } else {
                opt(e.p_value, 4)
            };
            writeln!(
                out,
                "{:<10} {:>12.4} {:>12} {:>12} {:>14}{}",
                e.name,
                e.estimate,
                opt(e.std_error, 4),
                opt(e.t_statistic, 2),
                p,
                if e.at_boundary { "  (boundary)" } else { "" }
            )?;
        }
        writeln!(
            out,
            "log-likelihood {:.4}  persistence {:.4}  observations {}  converged {}  hessian {:?}",
            self.log_likelihood,
            self.params.persistence(),
            self.observations,
            self.converged,
            self.hessian
        )
    }
}

// Starting points (alpha1, beta1, gamma1) for the multi-start search.
const START_GRID: [(f64, f64, f64); 5] = [
    (0.05, 0.85, 0.10),
    (0.02, 0.93, 0.08),
    (0.10, 0.70, 0.10),
    (0.01, 0.96, 0.04),
    (0.20, 0.50, 0.20),
];
const START_DOF: f64 = 8.0;
const BOUNDARY_TOL: f64 = 1e-4;

/// Maps an unconstrained vector onto admissible parameters:
/// `theta = [ln alpha0, u1, u2, u3, (ln(dof - 2))]`, with
/// `(alpha1, beta1, gamma1 / 2, slack) = softmax(u1, u2, u3, 0)`, so every
/// coefficient is nonnegative and persistence stays below one.
fn from_unconstrained(theta: &[f64]) -> ([f64; 4], Option<f64>) {
    let alpha0 = theta[0].exp();
    let (e1, e2, e3) = (theta[1].exp(), theta[2].exp(), theta[3].exp());
    let denom = 1.0 + e1 + e2 + e3;
    let coefs = [alpha0, e1 / denom, e2 / denom, 2.0 * e3 / denom];
    let dof = theta.get(4).map(|v| 2.0 + v.exp());
    (coefs, dof)
}

fn to_unconstrained(alpha0: f64, alpha1: f64, beta1: f64, gamma1: f64, dof: Option<f64>) -> Vec<f64> {
    let slack = 1.0 - alpha1 - beta1 - gamma1 / 2.0;
    let mut theta = vec![
        alpha0.ln(),
        (alpha1 / slack).ln(),
        (beta1 / slack).ln(),
        (gamma1 / 2.0 / slack).ln(),
    ];
    if let Some(d) = dof {
        theta.push((d - 2.0).ln());
    }
    theta
}

fn family_for(dof: Option<f64>) -> NoiseFamily {
    match dof {
        Some(dof) => NoiseFamily::StandardizedT { dof },
        None => NoiseFamily::StandardNormal,
    }
}

// Negative log-likelihood over the natural coordinates
// [alpha0, alpha1, beta1, gamma1, (dof)], evaluated without the sign
// constraints on alpha1/gamma1 so that central differences work on the
// boundary.
fn natural_objective(phi: &[f64], r: &[f64], var0: f64) -> f64 {
    let dof = phi.get(4).copied();
    if phi[0] <= 0.0 || dof.is_some_and(|d| d <= 2.0) {
        return f64::INFINITY;
    }
    match family_for(dof).density() {
        Ok(d) => neg_log_likelihood([phi[0], phi[1], phi[2], phi[3]], &d, r, var0),
        Err(_) => f64::INFINITY,
    }
}

fn hessian(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1e-2)).collect();
    let f0 = f(x);
    let at = |shifts: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(k, s) in shifts {
            y[k] += s;
        }
        f(&y)
    };
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        hess[i][i] = (at(&[(i, h[i])]) - 2.0 * f0 + at(&[(i, -h[i])])) / (h[i] * h[i]);
        for j in (i + 1)..n {
            let v = (at(&[(i, h[i]), (j, h[j])]) - at(&[(i, h[i]), (j, -h[j])])
                - at(&[(i, -h[i]), (j, h[j])])
                + at(&[(i, -h[i]), (j, -h[j])]))
                / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// Inverse of a symmetric positive definite matrix via Cholesky; `None` when
/// the matrix is not positive definite.
fn spd_inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    // columns of the inverse from L L^T x = e_k
    let mut inv = vec![vec![0.0; n]; n];
    for k in 0..n {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let rhs = if i == k { 1.0 } else { 0.0 };
            let s: f64 = (0..i).map(|m| l[i][m] * y[m]).sum();
            y[i] = (rhs - s) / l[i][i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|m| l[m][i] * x[m]).sum();
            x[i] = (y[i] - s) / l[i][i];
        }
        for i in 0..n {
            inv[i][k] = x[i];
        }
    }
    Some(inv)
}

/// Maximum likelihood fit with `sigma0` fixed to the historical volatility
/// of the whole input.
pub fn fit(returns: &ReturnSeries, noise: NoiseKind, options: &FitOptions) -> Result<FitReport> {
    let r = returns.values();
    if r.len() < MIN_FIT_LENGTH {
        return Err(Error::TooShort {
            needed: MIN_FIT_LENGTH,
            got: r.len(),
        });
    }
    let sigma0 = historical_volatility(returns, r.len())?;
    check_sigma0(sigma0)?;
    let var0 = sigma0 * sigma0;

    let objective = |theta: &[f64]| {
        let (coefs, dof) = from_unconstrained(theta);
        match family_for(dof).density() {
            Ok(d) => neg_log_likelihood(coefs, &d, r, var0),
            Err(_) => f64::INFINITY,
        }
    };
    let nm = NelderMead {
        ftol: options.ftol,
        max_evals: options.max_evals,
        initial_step: 0.5,
    };
    let start_dof = (noise == NoiseKind::T).then_some(START_DOF);

    let mut iterations = 0;
    let mut best: Option<Minimum> = None;
    for &(a1, b1, g1) in START_GRID.iter().take(options.starts.clamp(1, START_GRID.len())) {
        let a0 = var0 * (1.0 - a1 - b1 - g1 / 2.0);
        let m = nm.minimize(objective, &to_unconstrained(a0, a1, b1, g1, start_dof));
        iterations += m.iterations;
        if best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    let mut best = best.expect("at least one start");
    let mut converged = false;
    for _ in 0..options.max_restarts {
        let m = nm.minimize(objective, &best.x);
        iterations += m.iterations;
        let gain = best.f - m.f;
        let settled = m.converged && gain < options.ftol;
        if m.f < best.f {
            best = m;
        }
        if settled {
            converged = true;
            break;
        }
    }
    if !best.f.is_finite() {
        return Err(Error::InvalidParameter(
            "no admissible starting point for the likelihood".into(),
        ));
    }

    let (coefs, dof) = from_unconstrained(&best.x);
    let params = GjrGarchParams {
        alpha0: coefs[0],
        alpha1: coefs[1],
        beta1: coefs[2],
        gamma1: coefs[3],
        noise: family_for(dof),
    };
    let mut phi = coefs.to_vec();
    if let Some(d) = dof {
        phi.push(d);
    }
    let mut names = vec!["alpha0", "alpha1", "beta1", "gamma1"];
    if dof.is_some() {
        names.push("dof");
    }
    let mut boundary = vec![false; phi.len()];
    for k in 1..4 {
        boundary[k] = phi[k] < BOUNDARY_TOL;
    }

    let f_nat = |x: &[f64]| natural_objective(x, r, var0);
    let hess = hessian(f_nat, &phi);
    let (std_errors, covariance, status) = standard_errors(&hess, &boundary);

    let estimates = names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let se = std_errors[k];
            let t = se.filter(|s| *s > 0.0).map(|s| phi[k] / s);
            let p = t.map(|t| erfc(t.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0));
            ParamEstimate {
                name: name.to_string(),
                estimate: phi[k],
                std_error: se,
                t_statistic: t,
                p_value: p,
                p_value_underflow: p == Some(0.0),
                at_boundary: boundary[k],
            }
        })
        .collect();

    Ok(FitReport {
        params,
        estimates,
        log_likelihood: -best.f,
        sigma0,
        observations: r.len(),
        converged,
        iterations,
        hessian: status,
        covariance,
    })
}

type Covariance = Vec<Vec<f64>>;

fn standard_errors(hess: &[Vec<f64>], boundary: &[bool]) -> (Vec<Option<f64>>, Option<Covariance>, HessianStatus) {
    let n = hess.len();
    let diag_se = |cov: &[Vec<f64>], k: usize| {
        let v = cov[k][k];
        (v.is_finite() && v >= 0.0).then(|| v.sqrt())
    };
    if let Some(cov) = spd_inverse(hess) {
        let se = (0..n).map(|k| diag_se(&cov, k)).collect();
        return (se, Some(cov), HessianStatus::Full);
    }
    let keep: Vec<usize> = (0..n).filter(|&k| !boundary[k]).collect();
    if keep.len() < n {
        let reduced: Vec<Vec<f64>> = keep
            .iter()
            .map(|&i| keep.iter().map(|&j| hess[i][j]).collect())
            .collect();
        if let Some(cov) = spd_inverse(&reduced) {
            let mut out = vec![None; n];
            let mut full = vec![vec![0.0; n]; n];
            for (pos, &k) in keep.iter().enumerate() {
                out[k] = diag_se(&cov, pos);
                for (pos2, &k2) in keep.iter().enumerate() {
                    full[k][k2] = cov[pos][pos2];
                }
            }
            return (out, Some(full), HessianStatus::Projected);
        }
    }
    (vec![None; n], None, HessianStatus::Unavailable)
}

/// Published parameter sets for daily index returns in percent units.
pub mod presets {
    use super::GjrGarchParams;
    use crate::stats::NoiseFamily;

    const fn t(alpha0: f64, alpha1: f64, beta1: f64, gamma1: f64, dof: f64) -> GjrGarchParams {
        GjrGarchParams {
            alpha0,
            alpha1,
            beta1,
            gamma1,
            noise: NoiseFamily::StandardizedT { dof },
        }
    }

    pub const SP500: GjrGarchParams = t(0.002, 0.0, 0.926, 0.14, 8.9);
    pub const MERVAL: GjrGarchParams = t(0.12, 0.041, 0.86, 0.13, 5.7);
    pub const ASE: GjrGarchParams = t(0.029, 0.063, 0.910, 0.04, 6.7);
    pub const CAC40: GjrGarchParams = t(0.014, 0.018, 0.926, 0.09, 9.8);
    pub const DAX: GjrGarchParams = t(0.010, 0.025, 0.923, 0.10, 9.2);
    pub const IBEX: GjrGarchParams = t(0.015, 0.024, 0.923, 0.09, 9.5);
    pub const SMI: GjrGarchParams = t(0.018, 0.040, 0.905, 0.083, 11.5);
    pub const UKX: GjrGarchParams = t(0.010, 0.022, 0.916, 0.11, 11.2);

    pub fn by_name(name: &str) -> Option<GjrGarchParams> {
        Some(match name.to_ascii_lowercase().as_str() {
            "sp500" => SP500,
            "merval" => MERVAL,
            "ase" => ASE,
            "cac40" => CAC40,
            "dax" => DAX,
            "ibex" => IBEX,
            "smi" => SMI,
            "ukx" => UKX,
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;
    use approx::assert_abs_diff_eq;

    fn normal(alpha0: f64, alpha1: f64, beta1: f64, gamma1: f64) -> GjrGarchParams {
        GjrGarchParams::new(alpha0, alpha1, beta1, gamma1, NoiseFamily::StandardNormal).unwrap()
    }

    fn series(v: Vec<f64>) -> ReturnSeries {
        ReturnSeries::new(v, None, ReturnScale::Percent).unwrap()
    }

    #[test]
    fn constant_variance_filter() {
        let p = normal(4.0, 0.0, 0.0, 0.0);
        let v = filter(&p, &series(vec![3.0, -1.0, 0.5, 7.0]), 1.0).unwrap();
        assert_eq!(v.values()[0], 1.0);
        assert!(v.values()[1..].iter().all(|&s| s == 2.0));
    }

    #[test]
    fn zero_returns_converge_to_fixed_point() {
        let v = filter(&SP500, &series(vec![0.0; 5000]), 0.5f64.sqrt()).unwrap();
        let target = 0.002 / (1.0 - 0.926);
        let last = v.values().last().unwrap().powi(2);
        assert_abs_diff_eq!(last, target, epsilon = 1e-10);
        // geometric approach at rate beta1
        let gap = |t: usize| v.values()[t].powi(2) - target;
        assert_abs_diff_eq!(gap(11) / gap(10), 0.926, epsilon = 1e-9);
    }

    #[test]
    fn single_step_with_leverage() {
        let p = normal(0.1, 0.2, 0.5, 0.2);
        let v = filter(&p, &series(vec![-1.0, 0.0]), 1.0).unwrap();
        assert_abs_diff_eq!(v.values()[1].powi(2), 1.0, epsilon = 1e-15);
        // no leverage for a zero or positive shock
        let v = filter(&p, &series(vec![1.0, 0.0]), 1.0).unwrap();
        assert_abs_diff_eq!(v.values()[1].powi(2), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn filter_rejects_bad_inputs() {
        assert!(filter(&normal(1.0, 0.6, 0.6, 0.0), &series(vec![0.0; 3]), 1.0).is_err());
        assert!(filter(&SP500, &series(vec![0.0; 3]), 0.0).is_err());
    }

    #[test]
    fn filter_output_positive() {
        let (r, _) = simulate(&MERVAL, 2000, 1.0, 3).unwrap();
        let v = filter(&MERVAL, &r, 1.3).unwrap();
        assert!(v.values().iter().all(|&s| s > 0.0));
        assert_eq!(v.len(), r.len());
    }

    #[test]
    fn likelihood_closed_form() {
        let p = normal(4.0, 0.0, 0.0, 0.0);
        let ll = log_likelihood(&p, &series(vec![0.0, 0.0]), 2.0).unwrap();
        let expected = 2.0 * (-0.5 * (2.0 * std::f64::consts::PI).ln() - 2f64.ln());
        assert_abs_diff_eq!(ll, expected, epsilon = 1e-12);
    }

    #[test]
    fn likelihood_scale_identity() {
        let (r, _) = simulate(&DAX, 1000, 1.1, 5).unwrap();
        let c: f64 = 3.7;
        let scaled = series(r.values().iter().map(|x| x * c).collect());
        let mut p2 = DAX;
        p2.alpha0 *= c * c;
        let a = log_likelihood(&DAX, &r, 1.1).unwrap();
        let b = log_likelihood(&p2, &scaled, 1.1 * c).unwrap();
        assert_abs_diff_eq!(b, a - r.len() as f64 * c.ln(), epsilon = 1e-8);
    }

    #[test]
    fn likelihood_peaks_near_truth() {
        let sigma0 = SP500.unconditional_variance().unwrap().sqrt();
        let (r, _) = simulate(&SP500, 20_000, sigma0, 17).unwrap();
        let at_truth = log_likelihood(&SP500, &r, sigma0).unwrap();
        for factor in [0.8, 1.2] {
            let mut p = SP500;
            p.beta1 *= factor;
            if !p.stationarity_check().stationary {
                // 1.2 * 0.926 is explosive; the likelihood is still defined
                let nll = neg_log_likelihood(
                    [p.alpha0, p.alpha1, p.beta1, p.gamma1],
                    &p.noise.density().unwrap(),
                    r.values(),
                    sigma0 * sigma0,
                );
                assert!(at_truth > -nll);
                continue;
            }
            assert!(at_truth > log_likelihood(&p, &r, sigma0).unwrap());
        }
    }

    #[test]
    fn table_values() {
        assert_abs_diff_eq!(SP500.unconditional_variance().unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(normal(7.0, 0.0, 0.0, 0.0).unconditional_variance().unwrap(), 7.0);
        assert!(normal(1.0, 0.5, 0.4, 0.2).unconditional_variance().is_err());

        let tau = SP500.relaxation_time().unwrap();
        assert_abs_diff_eq!(tau, 1.0 / -(0.996f64.ln()), epsilon = 1e-9);
        assert!((249.0..=250.0).contains(&tau));
        assert_abs_diff_eq!(
            normal(1.0, 0.0, (-1.0f64).exp(), 0.0).relaxation_time().unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            normal(1.0, 0.25, 0.25, 0.0).relaxation_time().unwrap(),
            1.0 / 2f64.ln(),
            epsilon = 1e-12
        );
        assert!(normal(1.0, 0.0, 0.0, 0.0).relaxation_time().is_err());

        let s = SP500.stationarity_check();
        assert!(s.stationary);
        assert_abs_diff_eq!(s.margin, 0.004, epsilon = 1e-12);
        let m = MERVAL.stationarity_check();
        assert!(m.stationary);
        assert_abs_diff_eq!(m.margin, 0.034, epsilon = 1e-12);
        assert!(!normal(1.0, 0.6, 0.6, 0.0).stationarity_check().stationary);
    }

    #[test]
    fn sign_constraints() {
        assert!(GjrGarchParams::new(0.0, 0.1, 0.5, 0.1, NoiseFamily::StandardNormal).is_err());
        assert!(GjrGarchParams::new(1.0, -0.1, 0.5, 0.1, NoiseFamily::StandardNormal).is_err());
        assert!(GjrGarchParams::new(1.0, 0.1, 0.5, -0.2, NoiseFamily::StandardNormal).is_err());
        assert!(GjrGarchParams::new(1.0, 0.1, 0.5, -0.05, NoiseFamily::StandardNormal).is_ok());
    }

    #[test]
    fn simulation_is_deterministic() {
        let a = simulate(&SP500, 500, 0.7, 1).unwrap();
        let b = simulate(&SP500, 500, 0.7, 1).unwrap();
        let c = simulate(&SP500, 500, 0.7, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
        assert_eq!(a.1.values()[0], 0.7);
    }

    #[test]
    fn simulated_volatility_matches_filter() {
        let (r, v) = simulate(&MERVAL, 3000, 1.2, 9).unwrap();
        let f = filter(&MERVAL, &r, 1.2).unwrap();
        for (a, b) in v.values().iter().zip(f.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12 * a);
        }
    }

    #[test]
    fn iid_degenerate_has_no_squared_autocorrelation() {
        let p = normal(1.0, 0.0, 0.0, 0.0);
        let (r, _) = simulate(&p, 1_000_000, 1.5, 4).unwrap();
        let sq: Vec<f64> = r.values().iter().map(|x| x * x).collect();
        let m = sq.iter().sum::<f64>() / sq.len() as f64;
        let c0: f64 = sq.iter().map(|x| (x - m).powi(2)).sum();
        let c1: f64 = sq.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        assert!((c1 / c0).abs() < 0.01);
    }

    #[test]
    fn fit_rejects_short_input() {
        assert!(matches!(
            fit(&series(vec![0.1; 100]), NoiseKind::Normal, &FitOptions::default()),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn unconstrained_map_round_trips() {
        let theta = to_unconstrained(0.3, 0.05, 0.8, 0.1, Some(6.0));
        let (c, d) = from_unconstrained(&theta);
        for (a, b) in c.iter().zip([0.3, 0.05, 0.8, 0.1]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(d.unwrap(), 6.0, epsilon = 1e-12);
        // extreme logits stay admissible
        let (c, _) = from_unconstrained(&[0.0, 40.0, 40.0, 40.0]);
        assert!(c[1] + c[2] + c[3] / 2.0 <= 1.0);
    }

    #[test]
    fn spd_inverse_small() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let inv = spd_inverse(&a).unwrap();
        assert_abs_diff_eq!(inv[0][0], 3.0 / 11.0, epsilon = 1e-14);
        assert_abs_diff_eq!(inv[0][1], -1.0 / 11.0, epsilon = 1e-14);
        assert!(spd_inverse(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_none());
    }
}
