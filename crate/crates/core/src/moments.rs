//! Angular averages `Av((Tr AW)^k W)` for traceless `A`.
//!
//! Exact values come from the Gaussian moment formula on the complex sphere
//!
//! ```text
//! E[v_{i0} … v_{ik} conj(v_{j0}) … conj(v_{jk})]
//!     = (d−1)! / (d+k)! · Σ_{σ ∈ S_{k+1}} Π_a δ(i_a, j_{σ(a)})
//! ```
//!
//! Contracting slot 0 as the free index pair and slots `1..=k` against
//! copies of `A`, a permutation contributes `A^{L−1}` for the cycle of
//! length `L` through slot 0 and `Tr(A^c)` for every other cycle of length
//! `c`. Cycles of length one give `Tr(A) = 0` and drop out.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{monte_carlo, EstimatorConfig, McEstimate};
use crate::matcore::{ch_reduce_traceless3, check_dim, CMatrix, HermitianMatrix, C64};
use crate::sphere::{random_traceless_hermitian, RngStream};

pub const MAX_ORDER: usize = 3;
pub const MIN_MOMENT_SAMPLES: u64 = 100_000;

/// Basis for the matrix-valued moments of traceless `A` up to order three.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MomentBasis {
    I,
    A,
    A2,
    A3,
    TrA2A,
    TrA2I,
    TrA3I,
}

impl MomentBasis {
    pub const ALL: [MomentBasis; 7] = [
        MomentBasis::I,
        MomentBasis::A,
        MomentBasis::A2,
        MomentBasis::A3,
        MomentBasis::TrA2A,
        MomentBasis::TrA2I,
        MomentBasis::TrA3I,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MomentBasis::I => "I",
            MomentBasis::A => "A",
            MomentBasis::A2 => "A^2",
            MomentBasis::A3 => "A^3",
            MomentBasis::TrA2A => "Tr(A^2) A",
            MomentBasis::TrA2I => "Tr(A^2) I",
            MomentBasis::TrA3I => "Tr(A^3) I",
        }
    }

    pub fn evaluate(self, a: &CMatrix) -> CMatrix {
        let d = a.dim();
        let i = CMatrix::identity(d);
        let a2 = *a * *a;
        match self {
            MomentBasis::I => i,
            MomentBasis::A => *a,
            MomentBasis::A2 => a2,
            MomentBasis::A3 => a2 * *a,
            MomentBasis::TrA2A => a.scale(a2.trace()),
            MomentBasis::TrA2I => i.scale(a2.trace()),
            MomentBasis::TrA3I => i.scale(a2.trace_product(a)),
        }
    }

    /// `(power of A, lengths of the other trace cycles)` → basis element.
    fn from_cycles(power: usize, traces: &[usize]) -> Option<MomentBasis> {
        match (power, traces) {
            (0, []) => Some(MomentBasis::I),
            (1, []) => Some(MomentBasis::A),
            (2, []) => Some(MomentBasis::A2),
            (3, []) => Some(MomentBasis::A3),
            (1, [2]) => Some(MomentBasis::TrA2A),
            (0, [2]) => Some(MomentBasis::TrA2I),
            (0, [3]) => Some(MomentBasis::TrA3I),
            _ => None,
        }
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, k| acc * BigInt::from(k))
}

/// An exact rational combination of [`MomentBasis`] elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentResult {
    pub dim: usize,
    pub order: usize,
    coefficients: BTreeMap<MomentBasis, BigRational>,
}

impl MomentResult {
    pub fn from_terms(dim: usize, order: usize, terms: &[(MomentBasis, i64, i64)]) -> Self {
        let mut r = MomentResult {
            dim,
            order,
            coefficients: BTreeMap::new(),
        };
        for &(b, n, d) in terms {
            r.add(b, ratio(n, d));
        }
        r
    }

    fn add(&mut self, basis: MomentBasis, c: BigRational) {
        let entry = self
            .coefficients
            .entry(basis)
            .or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coefficients.remove(&basis);
        }
    }

    pub fn coefficient(&self, basis: MomentBasis) -> BigRational {
        self.coefficients
            .get(&basis)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (MomentBasis, &BigRational)> {
        self.coefficients.iter().map(|(b, c)| (*b, c))
    }

    /// The `d × d` matrix for a particular traceless `A`.
    pub fn evaluate(&self, a: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(a.dim());
        for (b, c) in self.terms() {
            let c = c.to_f64().expect("finite rational");
            out += b.evaluate(a).scale_real(c);
        }
        out
    }

    /// Eliminates `A^3` with `A^3 = Tr(A^2)/2 · A + Tr(A^3)/3 · I`, valid for
    /// traceless 3×3 matrices only; other dimensions are returned unchanged.
    pub fn cayley_hamilton_reduced(&self) -> MomentResult {
        let mut out = self.clone();
        if self.dim != 3 {
            return out;
        }
        if let Some(c) = out.coefficients.remove(&MomentBasis::A3) {
            out.add(MomentBasis::TrA2A, &c * ratio(1, 2));
            out.add(MomentBasis::TrA3I, &c * ratio(1, 3));
        }
        out
    }

    /// `{"Tr(A^2) I": "1/60", ...}` in basis order.
    pub fn coefficient_strings(&self) -> BTreeMap<&'static str, String> {
        self.terms()
            .map(|(b, c)| (b.label(), c.to_string()))
            .collect()
    }
}

impl fmt::Display for MomentResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(b, c)| format!("({c}) {}", b.label()))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                go(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Cycle lengths of `perm`, with the cycle through 0 first.
fn cycle_lengths(perm: &[usize]) -> (usize, Vec<usize>) {
    let mut seen = vec![false; perm.len()];
    let mut lengths = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            len += 1;
        }
        lengths.push(len);
    }
    let first = lengths.remove(0);
    lengths.sort_unstable();
    (first, lengths)
}

/// `Av((Tr AW)^k W)` for traceless `A`, exactly.
pub fn exact_moment(dim: usize, order: usize) -> Result<MomentResult> {
    check_dim(dim)?;
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    let norm = BigRational::new(factorial(dim - 1), factorial(dim + order));
    let mut result = MomentResult {
        dim,
        order,
        coefficients: BTreeMap::new(),
    };
    for perm in permutations(order + 1) {
        let (free, traces) = cycle_lengths(&perm);
        if traces.contains(&1) {
            continue;
        }
        let basis = MomentBasis::from_cycles(free - 1, &traces)
            .expect("orders up to three only produce basis monomials");
        result.add(basis, norm.clone());
    }
    Ok(result)
}

/// Monte Carlo estimate of `Av((Tr AW)^k W)`.
pub fn sampled_moment(
    order: usize,
    a: &HermitianMatrix,
    cfg: &EstimatorConfig,
) -> Result<McEstimate> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    if !a.is_traceless() {
        return Err(Error::NotTraceless(a.trace().abs()));
    }
    if cfg.samples < MIN_MOMENT_SAMPLES {
        return Err(Error::TooFewSamples {
            got: cfg.samples,
            min: MIN_MOMENT_SAMPLES,
        });
    }
    let am = *a.matrix();
    monte_carlo(a.dim(), cfg, move |w| {
        let t = am.trace_product(w.matrix()).re;
        w.matrix().scale(C64::new(t.powi(order as i32), 0.0))
    })
}

/// A tabulated angular integral to be reproduced.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceMoment {
    pub label: &'static str,
    pub dim: usize,
    pub order: usize,
    pub terms: &'static [(MomentBasis, i64, i64)],
}

impl ReferenceMoment {
    pub fn result(&self) -> MomentResult {
        MomentResult::from_terms(self.dim, self.order, self.terms)
    }
}

use MomentBasis::*;

pub const REFERENCE_MOMENTS: [ReferenceMoment; 7] = [
    ReferenceMoment {
        label: "d=2 Av(Tr(AW) W)",
        dim: 2,
        order: 1,
        terms: &[(A, 1, 6)],
    },
    ReferenceMoment {
        label: "d=3 Av(Tr(AW) W)",
        dim: 3,
        order: 1,
        terms: &[(A, 1, 12)],
    },
    ReferenceMoment {
        label: "d=3 Av(Tr(AW)^2 W)",
        dim: 3,
        order: 2,
        terms: &[(A2, 1, 30), (TrA2I, 1, 60)],
    },
    ReferenceMoment {
        label: "d=3 Av(Tr(AW)^3 W)",
        dim: 3,
        order: 3,
        terms: &[(A3, 1, 30)],
    },
    ReferenceMoment {
        label: "d=4 Av(Tr(AW) W)",
        dim: 4,
        order: 1,
        terms: &[(A, 1, 20)],
    },
    ReferenceMoment {
        label: "d=4 Av(Tr(AW)^2 W)",
        dim: 4,
        order: 2,
        terms: &[(TrA2I, 1, 120), (A2, 1, 60)],
    },
    ReferenceMoment {
        label: "d=4 Av(Tr(AW)^3 W)",
        dim: 4,
        order: 3,
        terms: &[(TrA3I, 1, 420), (TrA2A, 1, 280), (A3, 1, 140)],
    },
];

pub fn reference_moments(dim: usize) -> impl Iterator<Item = &'static ReferenceMoment> {
    REFERENCE_MOMENTS.iter().filter(move |r| r.dim == dim)
}

#[derive(Clone, Debug, Serialize)]
pub struct SampledCheck {
    pub frobenius_norm_a: f64,
    pub max_z: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentCheck {
    pub identity: String,
    pub dim: usize,
    pub order: usize,
    pub expected: BTreeMap<&'static str, String>,
    pub found: BTreeMap<&'static str, String>,
    /// Both sides after Cayley–Hamilton reduction (d = 3 only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced: Option<BTreeMap<&'static str, String>>,
    /// max ‖raw(A) − expected(A)‖_F over the random matrices, the two forms
    /// evaluated numerically.
    pub numeric_residual: f64,
    pub symbolic_ok: bool,
    pub sampled: Vec<SampledCheck>,
    pub sampled_ok: bool,
}

impl MomentCheck {
    pub fn passed(&self) -> bool {
        self.symbolic_ok && self.sampled_ok
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub dim: usize,
    pub z_threshold: f64,
    pub checks: Vec<MomentCheck>,
    pub passed: bool,
}

impl MomentReport {
    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.identity.as_str())
            .collect()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::MomentMismatch(self.failures().join(", ")))
        }
    }
}

pub const MOMENT_Z_THRESHOLD: f64 = 4.0;

/// Random traceless test matrices with `‖A‖_F ∈ [0.5, 2]`.
pub fn test_matrices(dim: usize, count: usize, seed: u64) -> Result<Vec<HermitianMatrix>> {
    let mut rng = RngStream::new(seed, 0x6d6f_6d65_6e74 + dim as u64).generator();
    (0..count)
        .map(|_| {
            let norm = rng.random_range(0.5..=2.0);
            random_traceless_hermitian(dim, norm, &mut rng)
        })
        .collect()
}

/// Checks every tabulated identity for `dim` symbolically and by sampling
/// at three random traceless matrices.
pub fn verify_moment_table(dim: usize, cfg: &EstimatorConfig) -> Result<MomentReport> {
    check_dim(dim)?;
    let mats = test_matrices(dim, 3, cfg.seed)?;
    let mut checks = Vec::new();
    for (idx, reference) in reference_moments(dim).enumerate() {
        let expected = reference.result();
        let found = exact_moment(dim, reference.order)?;
        let (symbolic_ok, reduced) = if dim == 3 {
            let (e, f) = (
                expected.cayley_hamilton_reduced(),
                found.cayley_hamilton_reduced(),
            );
            (e == f, Some(f.coefficient_strings()))
        } else {
            (expected == found, None)
        };

        let mut numeric_residual: f64 = 0.0;
        let mut sampled = Vec::new();
        for (j, a) in mats.iter().enumerate() {
            let want = expected.evaluate(a.matrix());
            let mut raw = found.evaluate(a.matrix());
            if dim == 3 && reference.order == 3 {
                // Cross-check the symbolic reduction numerically.
                let (c_a, c_i) = ch_reduce_traceless3(a)?;
                let coeff = found.coefficient(MomentBasis::A3).to_f64().unwrap_or(0.0);
                let cube = MomentBasis::A3.evaluate(a.matrix());
                let reduced_cube =
                    a.matrix().scale_real(c_a) + CMatrix::identity(3).scale_real(c_i);
                raw = raw - cube.scale_real(coeff) + reduced_cube.scale_real(coeff);
            }
            numeric_residual = numeric_residual.max((raw - want).frobenius_norm());

            let run = EstimatorConfig::new(
                cfg.samples,
                cfg.seed.wrapping_add(1 + 16 * idx as u64 + j as u64),
                cfg.shards,
            );
            let est = sampled_moment(reference.order, a, &run)?;
            sampled.push(SampledCheck {
                frobenius_norm_a: a.matrix().frobenius_norm(),
                max_z: est.max_z(&want),
                rel_error: est.relative_error(&want),
            });
        }
        let sampled_ok = sampled.iter().all(|s| s.max_z <= MOMENT_Z_THRESHOLD);
        checks.push(MomentCheck {
            identity: reference.label.to_string(),
            dim,
            order: reference.order,
            expected: expected.coefficient_strings(),
            found: found.coefficient_strings(),
            reduced,
            numeric_residual,
            symbolic_ok: symbolic_ok && numeric_residual <= 1e-12,
            sampled,
            sampled_ok,
        });
    }
    let passed = checks.iter().all(MomentCheck::passed);
    Ok(MomentReport {
        dim,
        z_threshold: MOMENT_Z_THRESHOLD,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(cycle_lengths(&[1, 0, 3, 2]), (2, vec![2]));
        assert_eq!(cycle_lengths(&[0, 2, 3, 1]), (1, vec![3]));
    }

    #[test]
    fn order_zero_is_identity_over_d() {
        for d in 2..=4 {
            let m = exact_moment(d, 0).unwrap();
            assert_eq!(m, MomentResult::from_terms(d, 0, &[(I, 1, d as i64)]));
        }
    }

    #[test]
    fn two_dim_first_moment() {
        assert_eq!(exact_moment(2, 1).unwrap().coefficient(A), ratio(1, 6));
    }

    #[test]
    fn three_dim_raw_cubic_form() {
        let raw = exact_moment(3, 3).unwrap();
        assert_eq!(
            raw,
            MomentResult::from_terms(3, 3, &[(A3, 1, 60), (TrA2A, 1, 120), (TrA3I, 1, 180)])
        );
        let tabulated = MomentResult::from_terms(3, 3, &[(A3, 1, 30)]);
        assert_ne!(raw, tabulated);
        assert_eq!(
            raw.cayley_hamilton_reduced(),
            tabulated.cayley_hamilton_reduced()
        );
    }

    #[test]
    fn four_dim_cubic() {
        assert_eq!(
            exact_moment(4, 3).unwrap(),
            MomentResult::from_terms(4, 3, &[(A3, 1, 140), (TrA2A, 1, 280), (TrA3I, 1, 420)])
        );
    }

    #[test]
    fn unsupported_order_and_dim() {
        assert_eq!(exact_moment(3, 4).unwrap_err(), Error::UnsupportedOrder(4));
        assert_eq!(exact_moment(5, 1).unwrap_err(), Error::BadDimension(5));
    }

    #[test]
    fn reduction_leaves_other_dims_alone() {
        let m = exact_moment(4, 3).unwrap();
        assert_eq!(m.cayley_hamilton_reduced(), m);
    }

    #[test]
    fn display_is_readable() {
        let m = exact_moment(3, 2).unwrap();
        assert_eq!(m.to_string(), "(1/30) A^2 + (1/60) Tr(A^2) I");
    }

    #[test]
    fn sampled_moment_preconditions() {
        let a = HermitianMatrix::from_diag(&[1.0, 0.0]).unwrap();
        let cfg = EstimatorConfig::new(100_000, 1, 1);
        assert!(matches!(
            sampled_moment(1, &a, &cfg),
            Err(Error::NotTraceless(_))
        ));
        let b = HermitianMatrix::from_diag(&[1.0, -1.0]).unwrap();
        assert!(matches!(
            sampled_moment(1, &b, &EstimatorConfig::new(99_999, 1, 1)),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(matches!(
            sampled_moment(4, &b, &cfg),
            Err(Error::UnsupportedOrder(4))
        ));
    }
}
