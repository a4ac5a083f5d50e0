//! Sharded Monte Carlo averaging over `dΩ`.
//!
//! `n` samples are split over `k` shards; shard `s` draws
//! `n / k + (s < n % k)` samples from stream `(seed, s)`. Each shard keeps
//! per-entry compensated sums plus Welford moments, and the shards are merged in index order,
//! so a given `(n, seed, k)` always yields bit-identical output regardless
//! of how the shards were scheduled.
//!
//! Shard sample counts are nondecreasing in `n`, which makes every shard's
//! stream prefix-extendable: the estimate at `n₁` is a snapshot of the run
//! at `n₂ > n₁`. [`convergence_study`] relies on this.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrand::Integrand;
use crate::matcore::{
    expm_reference, trace_split, CMatrix, ExpMode, HermitianMatrix, C64, MAX_DIM,
};
use crate::sphere::{RankOneProjection, RngStream, SphereSampler};

pub const MIN_SAMPLES: u64 = 1000;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Per-entry statistics: compensated sums for the mean, Welford running
/// mean and centred second moments (real and imaginary parts separately)
/// for the variance.
#[derive(Clone, Debug, PartialEq)]
pub struct EntryStats {
    dim: usize,
    count: u64,
    sum_re: [[CompensatedSum; MAX_DIM]; MAX_DIM],
    sum_im: [[CompensatedSum; MAX_DIM]; MAX_DIM],
    running: CMatrix,
    m2_re: [[f64; MAX_DIM]; MAX_DIM],
    m2_im: [[f64; MAX_DIM]; MAX_DIM],
}

impl EntryStats {
    pub fn new(dim: usize) -> Self {
        EntryStats {
            dim,
            count: 0,
            sum_re: [[CompensatedSum::default(); MAX_DIM]; MAX_DIM],
            sum_im: [[CompensatedSum::default(); MAX_DIM]; MAX_DIM],
            running: CMatrix::zeros(dim),
            m2_re: [[0.0; MAX_DIM]; MAX_DIM],
            m2_im: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Sample mean, from the compensated sums.
    pub fn mean(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim);
        if self.count == 0 {
            return m;
        }
        let n = self.count as f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = C64::new(self.sum_re[i][j].value() / n, self.sum_im[i][j].value() / n);
            }
        }
        m
    }

    #[inline]
    pub fn push(&mut self, x: &CMatrix) {
        self.count += 1;
        let inv_n = 1.0 / self.count as f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let z = x[(i, j)];
                self.sum_re[i][j].add(z.re);
                self.sum_im[i][j].add(z.im);
                let m = &mut self.running[(i, j)];
                let dr = z.re - m.re;
                let di = z.im - m.im;
                m.re += dr * inv_n;
                m.im += di * inv_n;
                self.m2_re[i][j] += dr * (z.re - m.re);
                self.m2_im[i][j] += di * (z.im - m.im);
            }
        }
    }

    /// Chan's pairwise combination. Not commutative in floating point, so
    /// reductions must use a fixed order.
    pub fn merge(&mut self, other: &EntryStats) {
        debug_assert_eq!(self.dim, other.dim);
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.sum_re[i][j].merge(&other.sum_re[i][j]);
                self.sum_im[i][j].merge(&other.sum_im[i][j]);
                let a = self.running[(i, j)];
                let b = other.running[(i, j)];
                let (dr, di) = (b.re - a.re, b.im - a.im);
                self.running[(i, j)].re = a.re + dr * nb / n;
                self.running[(i, j)].im = a.im + di * nb / n;
                self.m2_re[i][j] += other.m2_re[i][j] + dr * dr * na * nb / n;
                self.m2_im[i][j] += other.m2_im[i][j] + di * di * na * nb / n;
            }
        }
        self.count += other.count;
    }

    /// Standard error of each entry's mean, real and imaginary variances
    /// added in quadrature.
    pub fn stderr(&self) -> RealMatrix {
        let d = self.dim;
        let mut rows = vec![vec![0.0; d]; d];
        if self.count > 1 {
            let n = self.count as f64;
            for (i, row) in rows.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    *x = ((self.m2_re[i][j] + self.m2_im[i][j]) / (n - 1.0) / n).sqrt();
                }
            }
        }
        RealMatrix(rows)
    }
}

/// Row-major real matrix used for standard errors and z-scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealMatrix(pub Vec<Vec<f64>>);

impl RealMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().flatten().copied()
    }

    pub fn max(&self) -> f64 {
        self.values().fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn scale(&self, c: f64) -> RealMatrix {
        RealMatrix(
            self.0
                .iter()
                .map(|r| r.iter().map(|x| x * c).collect())
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub samples: u64,
    pub seed: u64,
    pub shards: u32,
}

impl EstimatorConfig {
    pub fn new(samples: u64, seed: u64, shards: u32) -> Self {
        EstimatorConfig {
            samples,
            seed,
            shards,
        }
    }

    fn validate(&self, min_samples: u64) -> Result<()> {
        if self.samples < min_samples {
            return Err(Error::TooFewSamples {
                got: self.samples,
                min: min_samples,
            });
        }
        if self.shards == 0 || u64::from(self.shards) > self.samples {
            return Err(Error::BadShardCount {
                shards: self.shards,
                samples: self.samples,
            });
        }
        Ok(())
    }
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig::new(1_000_000, 42, 4)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: CMatrix,
    pub stderr: RealMatrix,
    pub n_samples: u64,
    pub seed: u64,
    pub n_shards: u32,
}

impl McEstimate {
    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    /// `|mean − reference| / stderr` per entry.
    pub fn z_scores(&self, reference: &CMatrix) -> RealMatrix {
        let d = self.dim();
        RealMatrix(
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            let gap = (self.mean[(i, j)] - reference[(i, j)]).norm();
                            let se = self.stderr.get(i, j);
                            if se > 0.0 {
                                gap / se
                            } else if gap == 0.0 {
                                0.0
                            } else {
                                f64::INFINITY
                            }
                        })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn max_z(&self, reference: &CMatrix) -> f64 {
        self.z_scores(reference).max()
    }

    pub fn relative_error(&self, reference: &CMatrix) -> f64 {
        relative_frobenius_error(&self.mean, reference)
    }
}

/// `‖estimate − reference‖_F / ‖reference‖_F`.
pub fn relative_frobenius_error(estimate: &CMatrix, reference: &CMatrix) -> f64 {
    (*estimate - *reference).frobenius_norm() / reference.frobenius_norm()
}

/// Shard `s` of `shards` gets `n / shards` samples plus one if `s < n % shards`.
pub fn shard_counts(samples: u64, shards: u32) -> Vec<u64> {
    let k = u64::from(shards);
    let (base, extra) = (samples / k, samples % k);
    (0..k).map(|s| base + u64::from(s < extra)).collect()
}

fn run_shard<F>(dim: usize, seed: u64, shard: u32, checkpoints: &[u64], f: &F) -> Vec<EntryStats>
where
    F: Fn(&RankOneProjection) -> CMatrix,
{
    let mut sampler = SphereSampler::new(dim, RngStream::new(seed, u64::from(shard)))
        .expect("dimension validated by caller");
    let mut stats = EntryStats::new(dim);
    let mut out = Vec::with_capacity(checkpoints.len());
    for &target in checkpoints {
        while stats.count() < target {
            let w = sampler.next_projection();
            stats.push(&f(&w));
        }
        out.push(stats.clone());
    }
    out
}

/// Runs every shard and returns, per checkpoint, the merged statistics.
/// `checkpoints[c][s]` is shard `s`'s sample count at checkpoint `c`.
fn run_sharded<F>(dim: usize, seed: u64, checkpoints: &[Vec<u64>], f: &F) -> Vec<EntryStats>
where
    F: Fn(&RankOneProjection) -> CMatrix + Sync,
{
    let shards = checkpoints[0].len() as u32;
    let per_shard = |s: u32| {
        let counts: Vec<u64> = checkpoints.iter().map(|c| c[s as usize]).collect();
        run_shard(dim, seed, s, &counts, f)
    };

    #[cfg(feature = "parallel")]
    let runs: Vec<Vec<EntryStats>> = {
        use rayon::prelude::*;
        (0..shards).into_par_iter().map(per_shard).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<Vec<EntryStats>> = (0..shards).map(per_shard).collect();

    (0..checkpoints.len())
        .map(|c| {
            let mut total = EntryStats::new(dim);
            for shard in &runs {
                total.merge(&shard[c]);
            }
            total
        })
        .collect()
}

/// Sample mean of `f(W)` over `dΩ` with per-entry standard errors.
pub fn monte_carlo<F>(dim: usize, cfg: &EstimatorConfig, f: F) -> Result<McEstimate>
where
    F: Fn(&RankOneProjection) -> CMatrix + Sync,
{
    crate::matcore::check_dim(dim)?;
    cfg.validate(1)?;
    let counts = shard_counts(cfg.samples, cfg.shards);
    let stats = run_sharded(dim, cfg.seed, &[counts], &f).remove(0);
    Ok(McEstimate {
        mean: stats.mean(),
        stderr: stats.stderr(),
        n_samples: cfg.samples,
        seed: cfg.seed,
        n_shards: cfg.shards,
    })
}

fn prefactor(mu: f64, mode: ExpMode) -> (num_complex::Complex64, f64) {
    let p = mode.weight(mu);
    (p, p.norm())
}

fn rescale(stats: &EntryStats, mu: f64, mode: ExpMode, cfg: &EstimatorConfig) -> McEstimate {
    let (p, abs_p) = prefactor(mu, mode);
    McEstimate {
        mean: stats.mean().scale(p),
        stderr: stats.stderr().scale(abs_p),
        n_samples: stats.count(),
        seed: cfg.seed,
        n_shards: cfg.shards,
    }
}

/// `exp(A)` (or `exp(iA)`) as `e^{mu}` (or `e^{i mu}`) times the average of
/// the traceless-part integrand.
pub fn estimate(a: &HermitianMatrix, mode: ExpMode, cfg: &EstimatorConfig) -> Result<McEstimate> {
    cfg.validate(MIN_SAMPLES)?;
    let split = trace_split(a);
    let integrand = Integrand::new(&split.traceless_part, mode)?;
    let counts = shard_counts(cfg.samples, cfg.shards);
    let stats = run_sharded(a.dim(), cfg.seed, &[counts], &|w: &RankOneProjection| {
        integrand.eval(w)
    })
    .remove(0);
    Ok(rescale(&stats, split.mu, mode, cfg))
}

pub fn estimate_expm(a: &HermitianMatrix, cfg: &EstimatorConfig) -> Result<McEstimate> {
    estimate(a, ExpMode::Exp, cfg)
}

pub fn estimate_expm_fourier(a: &HermitianMatrix, cfg: &EstimatorConfig) -> Result<McEstimate> {
    estimate(a, ExpMode::Fourier, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub mode: ExpMode,
    pub seed: u64,
    pub n_shards: u32,
    pub schedule: Vec<u64>,
    pub rel_errors: Vec<f64>,
    pub max_stderr: Vec<f64>,
    pub estimates: Vec<McEstimate>,
}

/// Nested estimates at each schedule point, all drawn from one set of
/// streams, compared with the spectral oracle.
pub fn convergence_study(
    a: &HermitianMatrix,
    mode: ExpMode,
    schedule: &[u64],
    seed: u64,
    shards: u32,
) -> Result<ConvergenceReport> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingSchedule);
    }
    for &n in schedule {
        EstimatorConfig::new(n, seed, shards).validate(MIN_SAMPLES)?;
    }
    let oracle = expm_reference(a, mode)?;
    let split = trace_split(a);
    let integrand = Integrand::new(&split.traceless_part, mode)?;
    let checkpoints: Vec<Vec<u64>> = schedule.iter().map(|&n| shard_counts(n, shards)).collect();
    let stats = run_sharded(a.dim(), seed, &checkpoints, &|w: &RankOneProjection| {
        integrand.eval(w)
    });
    let cfg = EstimatorConfig::new(0, seed, shards);
    let estimates: Vec<McEstimate> = stats
        .iter()
        .map(|s| rescale(s, split.mu, mode, &cfg))
        .collect();
    Ok(ConvergenceReport {
        mode,
        seed,
        n_shards: shards,
        schedule: schedule.to_vec(),
        rel_errors: estimates
            .iter()
            .map(|e| e.relative_error(&oracle))
            .collect(),
        max_stderr: estimates.iter().map(|e| e.stderr.max()).collect(),
        estimates,
    })
}
