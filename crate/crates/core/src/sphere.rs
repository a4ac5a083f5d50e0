//! The normalized unitary-invariant measure on unit vectors of `C^d`, and
//! the rank-one projections `W = v v†` built from them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{check_dim, CMatrix, HermitianMatrix, C64, MAX_DIM};

const NORM_TOL: f64 = 1e-12;

/// Identifies one reproducible random stream.
///
/// The generator is ChaCha8 keyed with the little-endian bytes of `seed` in
/// the first 8 key bytes (remaining 24 bytes zero) and with its 64-bit
/// stream counter set to `stream_id`. Distinct `stream_id`s under one seed
/// are disjoint keystreams. This construction is part of the public
/// contract and must not change between versions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn generator(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVector {
    dim: usize,
    comps: [C64; MAX_DIM],
}

impl UnitVector {
    /// Accepts `comps` if `Σ|v_i|² = 1` within 1e-12.
    pub fn new(comps: &[C64]) -> Result<Self> {
        let dim = check_dim(comps.len())?;
        let norm_sq: f64 = comps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        let mut buf = [C64::new(0.0, 0.0); MAX_DIM];
        buf[..dim].copy_from_slice(comps);
        Ok(UnitVector { dim, comps: buf })
    }

    /// Scales `comps` to unit length.
    pub fn normalize(comps: &[C64]) -> Result<Self> {
        let norm = comps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scaled: Vec<C64> = comps.iter().map(|z| z / norm).collect();
        Self::new(&scaled)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[C64] {
        &self.comps[..self.dim]
    }

    /// `e^{iθ} v`.
    pub fn with_phase(&self, theta: f64) -> UnitVector {
        let p = C64::from_polar(1.0, theta);
        let mut out = *self;
        for z in &mut out.comps[..self.dim] {
            *z *= p;
        }
        out
    }

    /// `U v` for a unitary `U`.
    pub fn rotate(&self, u: &CMatrix) -> UnitVector {
        let mut out = UnitVector {
            dim: self.dim,
            comps: [C64::new(0.0, 0.0); MAX_DIM],
        };
        for i in 0..self.dim {
            out.comps[i] = (0..self.dim).map(|j| u[(i, j)] * self.comps[j]).sum();
        }
        out
    }
}

/// `W_ij = v_i · conj(v_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankOneProjection(CMatrix);

impl RankOneProjection {
    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

#[inline]
pub fn projection_of(v: &UnitVector) -> RankOneProjection {
    let d = v.dim;
    let mut w = CMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            w[(i, j)] = v.comps[i] * v.comps[j].conj();
        }
    }
    RankOneProjection(w)
}

/// `Tr(AW) = <v, Av>`. For hermitian `A` this is real; an imaginary residue
/// above 1e-12 is reported as an error.
pub fn trace_pairing(a: &HermitianMatrix, w: &RankOneProjection) -> Result<f64> {
    if a.dim() != w.dim() {
        return Err(Error::DimensionMismatch(a.dim(), w.dim()));
    }
    let t = a.matrix().trace_product(&w.0);
    if t.im.abs() > 1e-12 {
        return Err(Error::ComplexPairing(t.im));
    }
    Ok(t.re)
}

/// Draws unit vectors from one stream: 2d independent standard normals as
/// real and imaginary parts (component-major, real before imaginary), then
/// normalized.
pub struct SphereSampler {
    dim: usize,
    rng: ChaCha8Rng,
}

impl SphereSampler {
    pub fn new(dim: usize, stream: RngStream) -> Result<Self> {
        Ok(SphereSampler {
            dim: check_dim(dim)?,
            rng: stream.generator(),
        })
    }

    #[inline]
    pub fn next_vector(&mut self) -> UnitVector {
        let mut comps = [C64::new(0.0, 0.0); MAX_DIM];
        loop {
            let mut norm_sq = 0.0;
            for z in &mut comps[..self.dim] {
                let re: f64 = self.rng.sample(StandardNormal);
                let im: f64 = self.rng.sample(StandardNormal);
                *z = C64::new(re, im);
                norm_sq += re * re + im * im;
            }
            // Probability zero, but a zero vector cannot be normalized.
            if norm_sq > 0.0 {
                let inv = norm_sq.sqrt().recip();
                for z in &mut comps[..self.dim] {
                    *z *= inv;
                }
                return UnitVector {
                    dim: self.dim,
                    comps,
                };
            }
        }
    }

    #[inline]
    pub fn next_projection(&mut self) -> RankOneProjection {
        projection_of(&self.next_vector())
    }
}

pub fn sample_unit_vector(dim: usize, sampler: &mut SphereSampler) -> Result<UnitVector> {
    if dim != sampler.dim {
        return Err(Error::DimensionMismatch(dim, sampler.dim));
    }
    Ok(sampler.next_vector())
}

/// A Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` absorbed into `Q`. Used by the covariance tests.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> Result<CMatrix> {
    let dim = check_dim(dim)?;
    let g = nalgebra::DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = CMatrix::zeros(dim);
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            u[(i, j)] = q[(i, j)] * phase;
        }
    }
    Ok(u)
}

/// A random hermitian matrix with Frobenius norm `norm` (GUE direction).
pub fn random_hermitian(dim: usize, norm: f64, rng: &mut impl Rng) -> Result<HermitianMatrix> {
    let dim = check_dim(dim)?;
    let mut m = CMatrix::zeros(dim);
    for i in 0..dim {
        m[(i, i)] = C64::new(rng.sample(StandardNormal), 0.0);
        for j in (i + 1)..dim {
            let z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    let f = m.frobenius_norm();
    HermitianMatrix::new(m.scale_real(norm / f))
}

/// As [`random_hermitian`] but projected to trace zero before scaling.
pub fn random_traceless_hermitian(
    dim: usize,
    norm: f64,
    rng: &mut impl Rng,
) -> Result<HermitianMatrix> {
    let a = random_hermitian(dim, 1.0, rng)?;
    let a0 = *crate::matcore::trace_split(&a).traceless_part.matrix();
    let f = a0.frobenius_norm();
    HermitianMatrix::new(a0.scale_real(norm / f))
}
