//! Null-model ensembles: link occurrence frequencies, the distance profile
//! of connection probabilities, pooled degree distributions and the
//! ensemble-size stability diagnostic.
//!
//! Replicate `k` of an ensemble with master seed `s` draws its innovations
//! from [`stream_rng(s, k)`](crate::stats::stream_rng). Counts are summed
//! across workers, so results do not depend on scheduling or thread count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::garch::{simulate_with, GjrGarchParams};
use crate::stats::{distribution_distance, rank_sum_test, stream_rng, NoiseSampler, RankSumResult};
use crate::visibility::{
    degree_histogram, pair_count, pair_index, sweep_invisible, sweep_visible, DegreeHistogram,
    GraphKind, IvgMode,
};

/// Ensemble size used when none is given.
pub const DEFAULT_ENSEMBLE_SIZE: usize = 3000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub size: usize,
    pub length: usize,
    pub sigma0: f64,
    pub seed: u64,
    pub params: GjrGarchParams,
    pub ivg_mode: IvgMode,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size < 1 {
            return Err(Error::InvalidParameter("ensemble size must be >= 1".into()));
        }
        if self.length < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: self.length,
            });
        }
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma0 must be > 0, got {}",
                self.sigma0
            )));
        }
        self.params.validate()?;
        if !self.params.stationarity_check().stationary {
            return Err(Error::NotStationary {
                persistence: self.params.persistence(),
            });
        }
        Ok(())
    }

    fn sampler(&self) -> Result<NoiseSampler> {
        self.params.noise.sampler()
    }
}

/// Per-pair occurrence counts over `Z` null replicates, packed
/// upper-triangular like [`VisibilityGraph`](crate::visibility::VisibilityGraph).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkFrequency {
    n: usize,
    z: usize,
    vg_counts: Vec<u32>,
    ivg_counts: Vec<u32>,
    ivg_mode: IvgMode,
}

impl LinkFrequency {
    /// Builds frequencies from explicit counts; every count must be `<= z`.
    pub fn from_counts(
        n: usize,
        z: usize,
        vg_counts: Vec<u32>,
        ivg_counts: Vec<u32>,
        ivg_mode: IvgMode,
    ) -> Result<Self> {
        let pairs = pair_count(n);
        for c in [&vg_counts, &ivg_counts] {
            if c.len() != pairs {
                return Err(Error::DimensionMismatch {
                    expected: pairs,
                    got: c.len(),
                });
            }
        }
        if z == 0 || vg_counts.iter().chain(&ivg_counts).any(|&c| c as usize > z) {
            return Err(Error::InvalidParameter("counts must lie in 0..=Z with Z >= 1".into()));
        }
        Ok(Self {
            n,
            z,
            vg_counts,
            ivg_counts,
            ivg_mode,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn ensemble_size(&self) -> usize {
        self.z
    }

    pub fn ivg_mode(&self) -> IvgMode {
        self.ivg_mode
    }

    pub fn counts(&self, kind: GraphKind) -> &[u32] {
        match kind {
            GraphKind::Vg => &self.vg_counts,
            GraphKind::Ivg => &self.ivg_counts,
        }
    }

    pub fn count(&self, kind: GraphKind, i: usize, j: usize) -> u32 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.counts(kind)[pair_index(self.n, i, j)]
    }

    /// Fraction of replicates whose graph of `kind` contains `(i, j)`.
    pub fn probability(&self, kind: GraphKind, i: usize, j: usize) -> f64 {
        self.count(kind, i, j) as f64 / self.z as f64
    }

    /// Rows `i,j,vg_count,ivg_count,p_vg,p_ivg` with 1-based indices.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "vg_count", "ivg_count", "p_vg", "p_ivg"])?;
        let z = self.z as f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let k = pair_index(self.n, i, j);
                let (v, iv) = (self.vg_counts[k], self.ivg_counts[k]);
                w.write_record([
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    v.to_string(),
                    iv.to_string(),
                    (v as f64 / z).to_string(),
                    (iv as f64 / z).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

struct Accum {
    vg: Vec<u32>,
    ivg: Vec<u32>,
    vol: Vec<f64>,
    neg: Vec<f64>,
}

impl Accum {
    fn new(n: usize) -> Self {
        Self {
            vg: vec![0; pair_count(n)],
            ivg: vec![0; pair_count(n)],
            vol: Vec::with_capacity(n),
            neg: Vec::with_capacity(n),
        }
    }

    fn merge(mut self, other: Accum) -> Accum {
        for (a, b) in self.vg.iter_mut().zip(&other.vg) {
            *a += b;
        }
        for (a, b) in self.ivg.iter_mut().zip(&other.ivg) {
            *a += b;
        }
        self
    }
}

fn simulate_replicate(
    cfg: &EnsembleConfig,
    sampler: &NoiseSampler,
    replicate: usize,
    vol: &mut Vec<f64>,
) -> Result<()> {
    let mut rng = stream_rng(cfg.seed, replicate as u64);
    vol.clear();
    simulate_with(&cfg.params, sampler, cfg.length, cfg.sigma0, &mut rng, |_, s| vol.push(s));
    if let Some(index) = vol.iter().position(|v| !v.is_finite()) {
        return Err(Error::Replicate {
            replicate,
            source: Box::new(Error::NonFinite { index }),
        });
    }
    Ok(())
}

/// Simulates `Z` volatility series, builds each VG and IVG, and counts how
/// often every pair is linked. Graphs are not retained.
pub fn generate_frequencies(cfg: &EnsembleConfig) -> Result<LinkFrequency> {
    cfg.validate()?;
    let n = cfg.length;
    let sampler = cfg.sampler()?;
    let literal = cfg.ivg_mode == IvgMode::Literal;

    let acc = (0..cfg.size)
        .into_par_iter()
        .try_fold(
            || Accum::new(n),
            |mut acc, k| -> Result<Accum> {
                simulate_replicate(cfg, &sampler, k, &mut acc.vol)?;
                let Accum { vg, ivg, vol, neg } = &mut acc;
                sweep_visible(vol, |i, j| vg[pair_index(n, i, j)] += 1);
                if literal {
                    sweep_invisible(vol, neg, |i, j| ivg[pair_index(n, i, j)] += 1);
                }
                Ok(acc)
            },
        )
        .try_reduce(|| Accum::new(n), |a, b| Ok(a.merge(b)))?;

    let mut ivg = acc.ivg;
    if !literal {
        let z = cfg.size as u32;
        for i in 0..n {
            for j in (i + 2)..n {
                let k = pair_index(n, i, j);
                ivg[k] = z - acc.vg[k];
            }
        }
    }
    LinkFrequency::from_counts(n, cfg.size, acc.vg, ivg, cfg.ivg_mode)
}

/// Mean and standard deviation of `p_ij` over all pairs at each distance
/// `d = 1..n-1` (entry `d - 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub kind: GraphKind,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl DistanceProfile {
    pub fn at(&self, d: usize) -> Option<(f64, f64)> {
        let k = d.checked_sub(1)?;
        Some((*self.mean.get(k)?, self.std[k]))
    }
}

pub fn distance_profile(f: &LinkFrequency, kind: GraphKind) -> DistanceProfile {
    let n = f.n;
    let z = f.z as f64;
    let counts = f.counts(kind);
    let mut mean = Vec::with_capacity(n.saturating_sub(1));
    let mut std = Vec::with_capacity(n.saturating_sub(1));
    for d in 1..n {
        let ps = (0..n - d).map(|i| counts[pair_index(n, i, i + d)] as f64 / z);
        let m = ps.clone().sum::<f64>() / (n - d) as f64;
        let var = ps.map(|p| (p - m) * (p - m)).sum::<f64>() / (n - d) as f64;
        mean.push(m);
        std.push(var.sqrt());
    }
    DistanceProfile { kind, mean, std }
}

/// Rows `d,mean_vg,std_vg,mean_ivg,std_ivg,pairs`, one per distance.
pub fn write_profiles_csv<W: Write>(vg: &DistanceProfile, ivg: &DistanceProfile, out: W) -> Result<()> {
    if vg.mean.len() != ivg.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: vg.mean.len(),
            got: ivg.mean.len(),
        });
    }
    let n = vg.mean.len() + 1;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "mean_vg", "std_vg", "mean_ivg", "std_ivg", "pairs"])?;
    for k in 0..vg.mean.len() {
        w.write_record([
            (k + 1).to_string(),
            vg.mean[k].to_string(),
            vg.std[k].to_string(),
            ivg.mean[k].to_string(),
            ivg.std[k].to_string(),
            (n - k - 1).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Same-distance pairs whose frequency strays beyond `width` binomial
/// standard errors of the distance mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Homogeneity {
    pub distance: usize,
    pub mean: f64,
    pub pairs: usize,
    pub outside: usize,
}

impl Homogeneity {
    pub fn fraction_outside(&self) -> f64 {
        self.outside as f64 / self.pairs as f64
    }
}

pub fn homogeneity(f: &LinkFrequency, kind: GraphKind, distance: usize, width: f64) -> Result<Homogeneity> {
    if distance == 0 || distance >= f.n {
        return Err(Error::OutOfRange {
            start: distance,
            end: distance,
            len: f.n,
        });
    }
    let n = f.n;
    let z = f.z as f64;
    let counts = f.counts(kind);
    let ps: Vec<f64> = (0..n - distance)
        .map(|i| counts[pair_index(n, i, i + distance)] as f64 / z)
        .collect();
    let mean = ps.iter().sum::<f64>() / ps.len() as f64;
    let se = (mean * (1.0 - mean) / z).sqrt();
    let outside = ps.iter().filter(|&&p| (p - mean).abs() > width * se).count();
    Ok(Homogeneity {
        distance,
        mean,
        pairs: ps.len(),
        outside,
    })
}

/// Pooled VG degree histogram over replicates `0..samples` of the ensemble.
pub fn null_degree_distribution(cfg: &EnsembleConfig, samples: usize) -> Result<DegreeHistogram> {
    cfg.validate()?;
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let sampler = cfg.sampler()?;
    let n = cfg.length;
    (0..samples)
        .into_par_iter()
        .try_fold(
            || (DegreeHistogram::default(), Vec::with_capacity(n), vec![0usize; n]),
            |(mut hist, mut vol, mut deg), k| -> Result<_> {
                simulate_replicate(cfg, &sampler, k, &mut vol)?;
                deg.iter_mut().for_each(|d| *d = 0);
                sweep_visible(&vol, |i, j| {
                    deg[i] += 1;
                    deg[j] += 1;
                });
                hist.merge(&degree_histogram(&deg)?);
                Ok((hist, vol, deg))
            },
        )
        .map(|r| r.map(|(h, _, _)| h))
        .try_reduce(DegreeHistogram::default, |mut a, b| {
            a.merge(&b);
            Ok(a)
        })
}

/// Rank-sum test between an empirical degree sample and a pooled null one.
pub fn compare_with_null(empirical: &DegreeHistogram, null: &DegreeHistogram) -> Result<RankSumResult> {
    rank_sum_test(&empirical.expand(), &null.expand())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub ensemble_size: usize,
    pub repeats: usize,
    pub mean_distance: f64,
    /// Sample standard deviation over mean of the pairwise distances.
    pub coefficient_of_variation: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Master seed for one side of one repeat in the stability diagnostic.
pub fn stability_seed(master: u64, ensemble_size: usize, repeat: usize, side: usize) -> u64 {
    let mut h = splitmix64(master);
    for v in [ensemble_size as u64, repeat as u64, side as u64] {
        h = splitmix64(h ^ v);
    }
    h
}

/// Distance between the pooled VG degree histograms of two ensembles of
/// `size` replicates each, drawn with master seeds `seed_a` and `seed_b`.
pub fn pair_distance(cfg: &EnsembleConfig, size: usize, seed_a: u64, seed_b: u64) -> Result<f64> {
    let side = |seed| {
        let c = EnsembleConfig {
            size,
            seed,
            ..cfg.clone()
        };
        null_degree_distribution(&c, size)
    };
    let (a, b) = (side(seed_a)?, side(seed_b)?);
    distribution_distance(&a.weights(), &b.weights())
}

/// For each ensemble size, `repeats` independent ensemble pairs; reports the
/// mean Jensen-Shannon distance between pooled degree distributions and its
/// coefficient of variation.
pub fn stability_diagnostic(cfg: &EnsembleConfig, sizes: &[usize], repeats: usize) -> Result<Vec<StabilityRow>> {
    cfg.validate()?;
    if repeats < 2 {
        return Err(Error::InvalidParameter("need at least 2 repeats".into()));
    }
    sizes
        .iter()
        .map(|&z| {
            if z < 2 {
                return Err(Error::InvalidParameter(format!("ensemble size {z} < 2")));
            }
            let d: Vec<f64> = (0..repeats)
                .map(|r| {
                    pair_distance(
                        cfg,
                        z,
                        stability_seed(cfg.seed, z, r, 0),
                        stability_seed(cfg.seed, z, r, 1),
                    )
                })
                .collect::<Result<_>>()?;
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
            let cv = if mean > 0.0 { var.sqrt() / mean } else { 0.0 };
            Ok(StabilityRow {
                ensemble_size: z,
                repeats,
                mean_distance: mean,
                coefficient_of_variation: cv,
            })
        })
        .collect()
}
