//! The bracketed polynomials `P_d(A, W)` whose weighted average
//! `∫ dΩ e^{Tr(AW)} P_d(A, W)` equals `e^A` for traceless `A`.
//!
//! `A` may be any complex multiple of a traceless hermitian matrix so the
//! same code evaluates the `A → iA` (Fourier) form. Every trace invariant is
//! computed from the matrix actually passed in.
//!
//! Two evaluators exist. [`bracket_terms`] spells out each printed term
//! separately. [`bracket_p`] collapses everything to
//! `α I + β W + γ A + δ A² + ε A·W` with scalar coefficients and is what the
//! estimator uses; the tests hold the two to agreement.

use crate::error::{Error, Result};
use crate::matcore::{check_dim, CMatrix, ExpMode, HermitianMatrix, C64, TRACELESS_TOL};
use crate::sphere::RankOneProjection;

/// `A` together with its `W`-independent invariants, formed once per run.
#[derive(Clone, Copy, Debug)]
pub struct BracketCache {
    a: CMatrix,
    a2: CMatrix,
    tr_a2: C64,
    tr_a3: C64,
}

impl BracketCache {
    pub fn new(a: CMatrix) -> Result<Self> {
        check_dim(a.dim())?;
        let tr = a.trace().norm();
        if tr > TRACELESS_TOL {
            return Err(Error::NotTraceless(tr));
        }
        let a2 = a * a;
        Ok(BracketCache {
            a,
            a2,
            tr_a2: a2.trace(),
            tr_a3: a2.trace_product(&a),
        })
    }

    /// Cache for `A0` (exp mode) or `i·A0` (Fourier mode).
    pub fn for_mode(a0: &HermitianMatrix, mode: ExpMode) -> Result<Self> {
        Self::new(a0.matrix().scale(mode.generator_factor()))
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn generator(&self) -> &CMatrix {
        &self.a
    }

    fn check(&self, w: &RankOneProjection) -> Result<()> {
        if w.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), w.dim()));
        }
        Ok(())
    }
}

/// The bracket split into the printed terms, grouped by label.
///
/// - `constant`: `I`
/// - `w_shift`: `c (W − I/d)`
/// - `trace_linear`: `c Tr(AW) I`
/// - `mixed`: remaining terms linear in `A`
/// - `quadratic`: terms quadratic in `A`
/// - `cubic`: terms cubic in `A`
#[derive(Clone, Copy, Debug)]
pub struct BracketTermTrace {
    pub constant: CMatrix,
    pub w_shift: CMatrix,
    pub trace_linear: CMatrix,
    pub mixed: CMatrix,
    pub quadratic: CMatrix,
    pub cubic: CMatrix,
}

impl BracketTermTrace {
    pub fn total(&self) -> CMatrix {
        self.constant + self.w_shift + self.trace_linear + self.mixed + self.quadratic + self.cubic
    }

    pub fn labelled(&self) -> [(&'static str, &CMatrix); 6] {
        [
            ("constant", &self.constant),
            ("w_shift", &self.w_shift),
            ("trace_linear", &self.trace_linear),
            ("mixed", &self.mixed),
            ("quadratic", &self.quadratic),
            ("cubic", &self.cubic),
        ]
    }
}

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Term-by-term evaluation, with scalars multiplying the matrix that follows
/// them and bare `A`, `A²` entering as matrix summands.
pub fn bracket_terms(cache: &BracketCache, w: &RankOneProjection) -> Result<BracketTermTrace> {
    cache.check(w)?;
    let d = cache.dim();
    let i = CMatrix::identity(d);
    let wm = *w.matrix();
    let a = cache.a;
    let t = a.trace_product(&wm);
    let (tr2, tr3) = (cache.tr_a2, cache.tr_a3);
    let zero = CMatrix::zeros(d);
    let shift = wm - i.scale_real(1.0 / d as f64);

    let terms = match d {
        2 => BracketTermTrace {
            constant: i,
            w_shift: 4.0 * shift,
            trace_linear: t * i,
            mixed: (r(2.0) * t) * shift,
            quadratic: zero,
            cubic: zero,
        },
        3 => BracketTermTrace {
            constant: i,
            w_shift: 9.0 * shift,
            trace_linear: (-t) * i,
            mixed: (r(9.0) * t) * wm - 0.5 * a,
            quadratic: (r(1.5) * t * t - r(0.25) * tr2) * wm,
            cubic: zero,
        },
        _ => {
            let quad_w = ((r(-4.0) * tr2 + r(46.0) * t * t) * wm + (r(2.0) * t) * (a * wm))
                .scale_real(1.0 / 6.0);
            let quad_i = ((r(-0.5) * tr2 + r(3.0) * t * t) * i + cache.a2 + (r(2.0) * t) * a)
                .scale_real(-1.0 / 6.0);
            BracketTermTrace {
                constant: i,
                w_shift: (52.0 / 3.0) * shift,
                trace_linear: (r(-8.0 / 3.0) * t) * i,
                mixed: (r(68.0 / 3.0) * t) * wm - a,
                quadratic: quad_w + quad_i,
                cubic: (r(2.0 / 3.0) * t * t * t) * wm
                    - (r(1.0 / 18.0) * tr3) * wm
                    - (r(1.0 / 6.0) * tr2 * t) * wm,
            }
        }
    };
    Ok(terms)
}

/// Scalar coefficients of `I, W, A, A², A·W` in `P_d`, given `t = Tr(AW)`.
#[inline]
fn bracket_coefficients(d: usize, t: C64, tr2: C64, tr3: C64) -> [C64; 5] {
    let zero = r(0.0);
    match d {
        // I + 4(W − I/2) + tI + 2t(W − I/2) = −I + (4 + 2t) W
        2 => [r(-1.0), r(4.0) + r(2.0) * t, zero, zero, zero],
        // I + 9(W − I/3) − tI + 9tW − A/2 + (3/2 t² − 1/4 Tr A²) W
        3 => {
            let t2 = t * t;
            [
                r(-2.0) - t,
                r(9.0) + r(9.0) * t + r(1.5) * t2 - r(0.25) * tr2,
                r(-0.5),
                zero,
                zero,
            ]
        }
        _ => {
            let t2 = t * t;
            let t3 = t2 * t;
            [
                r(-10.0 / 3.0) - r(8.0 / 3.0) * t + tr2 / 12.0 - t2 / 2.0,
                r(52.0 / 3.0) + r(68.0 / 3.0) * t - tr2 * (2.0 / 3.0)
                    + t2 * (23.0 / 3.0)
                    + t3 * (2.0 / 3.0)
                    - tr3 / 18.0
                    - tr2 * t / 6.0,
                r(-1.0) - t / 3.0,
                r(-1.0 / 6.0),
                t / 3.0,
            ]
        }
    }
}

#[inline]
fn bracket_with_trace(cache: &BracketCache, wm: &CMatrix, t: C64) -> CMatrix {
    let d = cache.dim();
    let [alpha, beta, gamma, delta, eps] = bracket_coefficients(d, t, cache.tr_a2, cache.tr_a3);
    let mut out = wm.scale(beta) + cache.a.scale(gamma);
    if d == 4 {
        out += cache.a2.scale(delta) + (cache.a * *wm).scale(eps);
    }
    for k in 0..d {
        out[(k, k)] += alpha;
    }
    out
}

/// `P_d(A, W)` with `A` taken from `cache`.
pub fn bracket_p(cache: &BracketCache, w: &RankOneProjection) -> Result<CMatrix> {
    cache.check(w)?;
    let wm = w.matrix();
    Ok(bracket_with_trace(cache, wm, cache.a.trace_product(wm)))
}

/// `e^{Tr(A0 W)} · P_d(A0, W)`.
pub fn integrand_exp(a0: &HermitianMatrix, w: &RankOneProjection) -> Result<CMatrix> {
    Integrand::new(a0, ExpMode::Exp)?.eval_checked(w)
}

/// `e^{i Tr(A0 W)} · P_d(i A0, W)`.
pub fn integrand_fourier(a0: &HermitianMatrix, w: &RankOneProjection) -> Result<CMatrix> {
    Integrand::new(a0, ExpMode::Fourier)?.eval_checked(w)
}

/// The full integrand `e^{Tr(aW)} P_d(a, W)` with `a = A0` or `a = i A0`.
#[derive(Clone, Copy, Debug)]
pub struct Integrand {
    cache: BracketCache,
}

impl Integrand {
    pub fn new(a0: &HermitianMatrix, mode: ExpMode) -> Result<Self> {
        Ok(Integrand {
            cache: BracketCache::for_mode(a0, mode)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.cache.dim()
    }

    pub fn cache(&self) -> &BracketCache {
        &self.cache
    }

    /// Unchecked hot-path evaluation; `w` must have the cached dimension.
    #[inline]
    pub fn eval(&self, w: &RankOneProjection) -> CMatrix {
        let wm = w.matrix();
        let t = self.cache.a.trace_product(wm);
        let weight = t.exp();
        bracket_with_trace(&self.cache, wm, t).scale(weight)
    }

    pub fn eval_checked(&self, w: &RankOneProjection) -> Result<CMatrix> {
        self.cache.check(w)?;
        Ok(self.eval(w))
    }
}
