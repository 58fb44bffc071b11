//! Noise laws, seeded random streams, the Wilcoxon rank-sum test and a
//! distance between discrete distributions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Generator used for every simulated replicate.
pub type StreamRng = ChaCha8Rng;

/// Independent generator for `(master seed, stream index)`.
///
/// The ChaCha key is derived from `master` via `seed_from_u64` and the
/// 64-bit ChaCha stream id is set to `stream`, so replicate `k` always sees
/// the same numbers no matter which worker runs it.
pub fn stream_rng(master: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Law of the unit-variance innovations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseFamily {
    StandardNormal,
    StandardizedT { dof: f64 },
}

impl NoiseFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseFamily::StandardNormal => Ok(()),
            NoiseFamily::StandardizedT { dof } if dof.is_finite() && dof > 2.0 => Ok(()),
            NoiseFamily::StandardizedT { dof } => Err(Error::InvalidParameter(format!(
                "standardized t needs dof > 2, got {dof}"
            ))),
        }
    }

    pub fn dof(&self) -> Option<f64> {
        match *self {
            NoiseFamily::StandardNormal => None,
            NoiseFamily::StandardizedT { dof } => Some(dof),
        }
    }

    pub fn sampler(&self) -> Result<NoiseSampler> {
        self.validate()?;
        Ok(match *self {
            NoiseFamily::StandardNormal => NoiseSampler::Normal,
            NoiseFamily::StandardizedT { dof } => NoiseSampler::T {
                dist: StudentT::new(dof)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?,
                scale: ((dof - 2.0) / dof).sqrt(),
            },
        })
    }

    pub fn density(&self) -> Result<NoiseDensity> {
        self.validate()?;
        Ok(match *self {
            NoiseFamily::StandardNormal => NoiseDensity {
                log_norm: -0.5 * (2.0 * PI).ln(),
                shape: None,
            },
            NoiseFamily::StandardizedT { dof } => NoiseDensity {
                log_norm: ln_gamma(0.5 * (dof + 1.0))
                    - ln_gamma(0.5 * dof)
                    - 0.5 * (PI * (dof - 2.0)).ln(),
                shape: Some((dof - 2.0, 0.5 * (dof + 1.0))),
            },
        })
    }
}

/// Prepared sampler; a standardized-t draw is a Student-t draw scaled by
/// `sqrt((dof - 2) / dof)`.
#[derive(Debug, Clone, Copy)]
pub enum NoiseSampler {
    Normal,
    T { dist: StudentT<f64>, scale: f64 },
}

impl NoiseSampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseSampler::Normal => rng.sample(StandardNormal),
            NoiseSampler::T { dist, scale } => dist.sample(rng) * scale,
        }
    }
}

/// Prepared log density with the normalization constant computed once.
#[derive(Debug, Clone, Copy)]
pub struct NoiseDensity {
    log_norm: f64,
    // (dof - 2, (dof + 1) / 2)
    shape: Option<(f64, f64)>,
}

impl NoiseDensity {
    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self.shape {
            None => self.log_norm - 0.5 * x * x,
            Some((nu_m2, half_nu_p1)) => self.log_norm - half_nu_p1 * (x * x / nu_m2).ln_1p(),
        }
    }
}

pub fn sample_noise<R: Rng + ?Sized>(family: &NoiseFamily, rng: &mut R) -> Result<f64> {
    Ok(family.sampler()?.sample(rng))
}

pub fn noise_log_density(family: &NoiseFamily, x: f64) -> Result<f64> {
    Ok(family.density()?.ln_pdf(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankSumMethod {
    NormalApproximation,
    ExactPermutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumResult {
    /// Mann-Whitney U of the first sample.
    pub statistic: f64,
    pub p_value: f64,
    pub method: RankSumMethod,
}

/// Below this size on either side the exact null distribution is used.
pub const EXACT_RANK_SUM_LIMIT: usize = 20;

// Upper bound on DP cell updates for the exact route; beyond it the normal
// approximation is used even for a small side.
const EXACT_WORK_BUDGET: f64 = 2.0e8;

struct Ranked {
    // 2 * midrank, always an integer
    doubled: Vec<u64>,
    tie_term: f64,
}

fn midranks(a: &[f64], b: &[f64]) -> Result<Ranked> {
    let mut all: Vec<(f64, usize)> = a
        .iter()
        .chain(b.iter())
        .copied()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    if let Some(&(_, i)) = all.iter().find(|(v, _)| v.is_nan()) {
        return Err(Error::NonFinite { index: i });
    }
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = all.len();
    let mut doubled = vec![0u64; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && all[j].0 == all[i].0 {
            j += 1;
        }
        // ranks i+1..=j share (i+1+j)/2
        let r2 = (i + 1 + j) as u64;
        for item in &all[i..j] {
            doubled[item.1] = r2;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    Ok(Ranked { doubled, tie_term })
}

fn check_samples(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

fn u_statistic(doubled_a: &[u64], n_a: usize) -> f64 {
    let rank_sum = doubled_a.iter().sum::<u64>() as f64 / 2.0;
    rank_sum - (n_a * (n_a + 1)) as f64 / 2.0
}

/// Two-sided rank-sum test, exact below [`EXACT_RANK_SUM_LIMIT`] per side.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> Result<RankSumResult> {
    check_samples(a, b)?;
    let small = a.len().min(b.len());
    let n = (a.len() + b.len()) as f64;
    let work = small as f64 * n * n * (n + 1.0);
    if small < EXACT_RANK_SUM_LIMIT && work <= EXACT_WORK_BUDGET {
        rank_sum_exact(a, b)
    } else {
        rank_sum_normal(a, b)
    }
}

/// Normal approximation with tie-corrected variance and continuity correction.
pub fn rank_sum_normal(a: &[f64], b: &[f64]) -> Result<RankSumResult> {
    check_samples(a, b)?;
    let ranked = midranks(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let u = u_statistic(&ranked.doubled[..a.len()], a.len());
    let mean = na * nb / 2.0;
    let var = if n > 1.0 {
        na * nb / 12.0 * ((n + 1.0) - ranked.tie_term / (n * (n - 1.0)))
    } else {
        0.0
    };
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
    };
    Ok(RankSumResult {
        statistic: u,
        p_value,
        method: RankSumMethod::NormalApproximation,
    })
}

/// Exact permutation p-value: the null distribution of the rank sum over all
/// `C(n_a + n_b, n_a)` relabelings, counted by dynamic programming over
/// doubled midranks (so ties are handled exactly).
pub fn rank_sum_exact(a: &[f64], b: &[f64]) -> Result<RankSumResult> {
    check_samples(a, b)?;
    let ranked = midranks(a, b)?;
    let n = ranked.doubled.len();
    let n_a = a.len();
    // count subsets of the smaller side; the deviation from the mean is
    // symmetric between the two sides
    let (k, observed): (usize, u64) = if n_a <= b.len() {
        (n_a, ranked.doubled[..n_a].iter().sum())
    } else {
        (b.len(), ranked.doubled[n_a..].iter().sum())
    };
    let max_sum: u64 = ranked.doubled.iter().sum();
    let width = max_sum as usize + 1;
    // ways[j][s]: number of j-subsets with doubled rank sum s
    let mut ways = vec![vec![0f64; width]; k + 1];
    ways[0][0] = 1.0;
    for (i, &r) in ranked.doubled.iter().enumerate() {
        let r = r as usize;
        for j in (1..=k.min(i + 1)).rev() {
            let (lo, hi) = ways.split_at_mut(j);
            let prev = &lo[j - 1];
            let cur = &mut hi[0];
            for s in (r..width).rev() {
                let w = prev[s - r];
                if w != 0.0 {
                    cur[s] += w;
                }
            }
        }
    }
    // mean of the doubled sum is k (n + 1)
    let center = (k * (n + 1)) as i64;
    let dev_obs = (observed as i64 - center).abs();
    let (mut extreme, mut total) = (0.0, 0.0);
    for (s, &w) in ways[k].iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        total += w;
        if (s as i64 - center).abs() >= dev_obs {
            extreme += w;
        }
    }
    Ok(RankSumResult {
        statistic: u_statistic(&ranked.doubled[..n_a], n_a),
        p_value: (extreme / total).clamp(0.0, 1.0),
        method: RankSumMethod::ExactPermutation,
    })
}

/// Jensen-Shannon divergence in bits between two histograms over a shared
/// support (bin `i` of `p` corresponds to bin `i` of `q`; the shorter one
/// is zero-padded). Bounded by `[0, 1]`.
pub fn distribution_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    let total_p: f64 = p.iter().sum();
    let total_q: f64 = q.iter().sum();
    if p.is_empty() || q.is_empty() || total_p <= 0.0 || total_q <= 0.0 {
        return Err(Error::EmptyInput);
    }
    if p.iter().chain(q).any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidParameter(
            "histogram weights must be finite and nonnegative".into(),
        ));
    }
    let bins = p.len().max(q.len());
    let term = |x: f64, m: f64| if x > 0.0 { x * (x / m).log2() } else { 0.0 };
    let mut js = 0.0;
    for i in 0..bins {
        let pi = p.get(i).copied().unwrap_or(0.0) / total_p;
        let qi = q.get(i).copied().unwrap_or(0.0) / total_q;
        let m = (pi + qi) / 2.0;
        if m > 0.0 {
            js += term(pi, m) + term(qi, m);
        }
    }
    Ok((js / 2.0).clamp(0.0, 1.0))
}

/// Spearman rank correlation with midranks for ties. `None` when either
/// sample is constant.
pub fn rank_correlation(a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: a.len(),
        });
    }
    let ra = midranks(a, &[])?.doubled;
    let rb = midranks(b, &[])?.doubled;
    let mean = (a.len() + 1) as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in ra.iter().zip(&rb) {
        let (dx, dy) = (x as f64 - mean, y as f64 - mean);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(None);
    }
    Ok(Some(sab / (saa * sbb).sqrt()))
}
