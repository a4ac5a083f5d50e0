//! Large-`s` behaviour of `I(s) = ∫ dΩ e^{s Tr(AW)} P(W)` for
//! `A = diag(1, λ₁, λ₂)` in three dimensions.
//!
//! For `v` uniform on the complex unit sphere, `(|v₀|², |v₁|², |v₂|²)` is
//! uniform on the probability simplex (density 2 in the `(t₁, t₂)` chart).
//! With diagonal `A` and `P` a function of `Tr(AW)` only,
//!
//! ```text
//! I(s) = 2 e^s ∫∫_{t₁,t₂ ≥ 0, t₁+t₂ ≤ 1} e^{−s((1−λ₁)t₁ + (1−λ₂)t₂)} P(Tr AW) dt₁ dt₂
//! ```
//!
//! which is evaluated with an iterated Gauss–Legendre rule.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::HermitianMatrix;

/// Tolerance on `1 + λ₁ + λ₂ = 0`.
pub const TRACE_TOL: f64 = 1e-12;
pub const MIN_QUAD_ORDER: usize = 64;
pub const DEFAULT_QUAD_ORDER: usize = 96;
/// Relative gap allowed between the order-`n` and order-`2n` rules.
pub const QUAD_REL_TOL: f64 = 1e-8;
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SpectrumConfig {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1.is_finite() && lambda2.is_finite()) {
            return Err(Error::BadSpectrum("eigenvalues must be finite".into()));
        }
        let sum = 1.0 + lambda1 + lambda2;
        if sum.abs() > TRACE_TOL {
            return Err(Error::BadSpectrum(format!(
                "1 + lambda1 + lambda2 = {sum:e}, must vanish"
            )));
        }
        if lambda1 >= 1.0 || lambda2 >= 1.0 {
            return Err(Error::BadSpectrum(format!(
                "need lambda1 < 1 and lambda2 < 1, got ({lambda1}, {lambda2})"
            )));
        }
        Ok(SpectrumConfig { lambda1, lambda2 })
    }

    /// `λ₂ = −1 − λ₁`.
    pub fn from_lambda1(lambda1: f64) -> Result<Self> {
        Self::new(lambda1, -1.0 - lambda1)
    }

    pub fn matrix(&self) -> HermitianMatrix {
        HermitianMatrix::from_diag(&[1.0, self.lambda1, self.lambda2])
            .expect("three real diagonal entries")
    }

    /// `(1 − λ₁)(1 − λ₂)`.
    pub fn gap_product(&self) -> f64 {
        (1.0 - self.lambda1) * (1.0 - self.lambda2)
    }

    /// `Tr(A²) = 1 + λ₁² + λ₂²`.
    pub fn trace_sq(&self) -> f64 {
        1.0 + self.lambda1 * self.lambda1 + self.lambda2 * self.lambda2
    }
}

/// `P(x) = Σ c_k x^k` in the variable `x = Tr(AW)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarPoly(pub Vec<f64>);

impl ScalarPoly {
    pub fn one() -> Self {
        ScalarPoly(vec![1.0])
    }

    /// `P(x) = x`.
    pub fn identity() -> Self {
        ScalarPoly(vec![0.0, 1.0])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `∫_lo^hi f`.
    pub fn integrate(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// `e^{-s} I(s)`: the simplex integral with the peak factor removed.
fn scaled_integral(cfg: &SpectrumConfig, s: f64, p: &ScalarPoly, rule: &GaussLegendre) -> f64 {
    let (g1, g2) = (1.0 - cfg.lambda1, 1.0 - cfg.lambda2);
    2.0 * rule.integrate(0.0, 1.0, |t1| {
        rule.integrate(0.0, 1.0 - t1, |t2| {
            let gap = g1 * t1 + g2 * t2;
            (-s * gap).exp() * p.eval(1.0 - gap)
        })
    })
}

/// Deterministic `I(s)` with nested-rule error control (orders `n`, `2n`).
pub fn simplex_reduce_integral(
    cfg: &SpectrumConfig,
    s: f64,
    p: &ScalarPoly,
    order: usize,
) -> Result<f64> {
    let order = order.max(MIN_QUAD_ORDER);
    let coarse = scaled_integral(cfg, s, p, &GaussLegendre::new(order));
    let fine = scaled_integral(cfg, s, p, &GaussLegendre::new(2 * order));
    let scale = fine.abs().max(coarse.abs());
    let rel_diff = if scale > 0.0 {
        (fine - coarse).abs() / scale
    } else {
        0.0
    };
    // A vanishing integral (e.g. P = Tr(AW) at s = 0) has no relative scale.
    if rel_diff > QUAD_REL_TOL && (fine - coarse).abs() > 1e-14 {
        return Err(Error::QuadratureNotConverged { order, rel_diff });
    }
    Ok(fine * s.exp())
}

/// `2 e^s P(W₀) / (s² (1−λ₁)(1−λ₂))` with `Tr(AW₀) = 1`.
pub fn predicted_leading(cfg: &SpectrumConfig, s: f64, p: &ScalarPoly) -> Result<f64> {
    if s <= 0.0 {
        return Err(Error::NonPositiveScale(s));
    }
    let gap = cfg.gap_product();
    if gap <= DEGENERACY_TOL {
        return Err(Error::DegenerateSpectrum(gap));
    }
    Ok(2.0 * s.exp() * p.eval(1.0) / (s * s * gap))
}

/// `|(1−λ₁)(1−λ₂) − (3 Tr(AW₀)² − Tr(A²)/2)|`.
pub fn quadratic_identity_residual(cfg: &SpectrumConfig) -> f64 {
    let tr_aw0 = 1.0;
    (cfg.gap_product() - (3.0 * tr_aw0 * tr_aw0 - 0.5 * cfg.trace_sq())).abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub s: f64,
    pub computed: f64,
    pub predicted: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub spectrum: SpectrumConfig,
    pub weight: ScalarPoly,
    pub quad_order: usize,
    pub rows: Vec<AsymptoticRow>,
    /// `C = |ratio(s_min) − 1| · s_min`.
    pub fitted_constant: f64,
    /// `|ratio(s_max) − 1| < |ratio(s_min) − 1|` (trivially true for one row).
    pub improves: bool,
    /// `|ratio(s_max) − 1| ≤ C / s_max`.
    pub within_order_bound: bool,
}

impl AsymptoticReport {
    pub fn final_ratio(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.ratio)
    }

    /// `|ratio − 1|` shrinks at every step of the schedule.
    pub fn monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| (w[1].ratio - 1.0).abs() < (w[0].ratio - 1.0).abs())
    }

    pub fn converges(&self) -> bool {
        self.improves && self.within_order_bound
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,computed,predicted,ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{}",
                r.s, r.computed, r.predicted, r.ratio
            );
        }
        out
    }
}

pub fn asymptotic_report(
    cfg: &SpectrumConfig,
    s_list: &[f64],
    p: &ScalarPoly,
    order: usize,
) -> Result<AsymptoticReport> {
    if s_list.is_empty() || s_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingSchedule);
    }
    if let Some(&s) = s_list.iter().find(|&&s| s <= 0.0) {
        return Err(Error::NonPositiveScale(s));
    }
    let rows = s_list
        .iter()
        .map(|&s| {
            let computed = simplex_reduce_integral(cfg, s, p, order)?;
            let predicted = predicted_leading(cfg, s, p)?;
            Ok(AsymptoticRow {
                s,
                computed,
                predicted,
                ratio: computed / predicted,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = &rows[0];
    let last = rows.last().expect("nonempty");
    let (e_first, e_last) = ((first.ratio - 1.0).abs(), (last.ratio - 1.0).abs());
    let fitted_constant = e_first * first.s;
    Ok(AsymptoticReport {
        spectrum: *cfg,
        weight: p.clone(),
        quad_order: order.max(MIN_QUAD_ORDER),
        improves: rows.len() == 1 || e_last < e_first,
        within_order_bound: e_last <= fitted_constant / last.s,
        fitted_constant,
        rows,
    })
}
