//! Independent oracles and algebraic properties.

use proptest::prelude::*;

use projexp::integrand::{bracket_p, bracket_terms, BracketCache};
use projexp::matcore::{ch_reduce_traceless3, trace_split};
use projexp::moments::{exact_moment, MomentBasis};
use projexp::sphere::{
    projection_of, random_hermitian, random_traceless_hermitian, random_unitary, RngStream,
    SphereSampler,
};
use projexp::{expm_reference, CMatrix, ExpMode, HermitianMatrix, C64};

/// Scaling and squaring with a 30-term Taylor series.
fn expm_taylor(a: &CMatrix) -> CMatrix {
    let d = a.dim();
    let norm = a.frobenius_norm();
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let x = a.scale_real(2f64.powi(-squarings));
    let mut term = CMatrix::identity(d);
    let mut sum = term;
    for k in 1..30 {
        term = (term * x).scale_real(1.0 / k as f64);
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

fn det(m: &CMatrix) -> C64 {
    // Laplace expansion; d ≤ 4.
    let d = m.dim();
    if d == 1 {
        return m[(0, 0)];
    }
    let mut acc = C64::new(0.0, 0.0);
    for col in 0..d {
        let rows: Vec<Vec<C64>> = (1..d)
            .map(|i| (0..d).filter(|&j| j != col).map(|j| m[(i, j)]).collect())
            .collect();
        let minor = if d == 2 {
            rows[0][0]
        } else {
            det(&CMatrix::from_rows(&rows).unwrap())
        };
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        acc += m[(0, col)] * minor * sign;
    }
    acc
}

/// Complete homogeneous symmetric polynomial h_m by brute enumeration.
fn complete_homogeneous(x: &[f64], m: u32) -> f64 {
    fn go(x: &[f64], m: u32) -> f64 {
        match x.split_first() {
            None => {
                if m == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Some((&head, rest)) => (0..=m).map(|k| head.powi(k as i32) * go(rest, m - k)).sum(),
        }
    }
    go(x, m)
}

/// `Av((Tr AW)^m)`: `(|v_i|²)` is Dirichlet(1,…,1) in the eigenbasis, so
/// `E[t^m] = (d−1)! m! / (d−1+m)! · h_m(eigenvalues)`.
fn scalar_moment(a: &HermitianMatrix, m: u32) -> f64 {
    let (eigs, _) = a.eigh().unwrap();
    let d = eigs.len() as u32;
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    fact(d - 1) * fact(m) / fact(d - 1 + m) * complete_homogeneous(&eigs, m)
}

#[test]
fn spectral_oracle_matches_taylor() {
    let mut rng = RngStream::new(100, 0).generator();
    for d in 2..=4 {
        for _ in 0..10 {
            let a = random_hermitian(d, 2.5, &mut rng).unwrap();
            let e = expm_reference(&a, ExpMode::Exp).unwrap();
            let t = expm_taylor(a.matrix());
            assert!((e - t).frobenius_norm() <= 1e-12 * t.frobenius_norm());
            let u = expm_reference(&a, ExpMode::Fourier).unwrap();
            let tu = expm_taylor(&a.matrix().scale(C64::i()));
            assert!((u - tu).frobenius_norm() <= 1e-12);
        }
    }
    let x = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let t = expm_taylor(x.matrix());
    assert!((t[(0, 0)].re - 1.543081).abs() < 1e-6);
    assert!((t[(0, 1)].re - 1.175201).abs() < 1e-6);
}

#[test]
fn ch_residual_over_random_traceless() {
    let mut rng = RngStream::new(101, 0).generator();
    for k in 0..100 {
        let norm = 3.0 * (k as f64 + 1.0) / 100.0;
        let a0 = random_traceless_hermitian(3, norm, &mut rng).unwrap();
        let (ca, ci) = ch_reduce_traceless3(&a0).unwrap();
        let m = *a0.matrix();
        let resid = m * m * m - m.scale_real(ca) - CMatrix::identity(3).scale_real(ci);
        assert!(resid.frobenius_norm() <= 1e-10 * (1.0 + norm.powi(3)));
    }
}

#[test]
fn trace_identity_of_exact_moments() {
    // Tr(M_k) = Av((Tr AW)^k) and Tr(A M_k) = Av((Tr AW)^{k+1}).
    let mut rng = RngStream::new(102, 0).generator();
    for d in 2..=4 {
        for k in 0..=3u32 {
            let m = exact_moment(d, k as usize).unwrap();
            for _ in 0..3 {
                let a = random_traceless_hermitian(d, 1.3, &mut rng).unwrap();
                let val = m.evaluate(a.matrix());
                let tr = val.trace();
                let tr_a = a.matrix().trace_product(&val);
                assert!((tr.re - scalar_moment(&a, k)).abs() < 1e-12, "d={d} k={k}");
                assert!(tr.im.abs() < 1e-12);
                assert!(
                    (tr_a.re - scalar_moment(&a, k + 1)).abs() < 1e-12,
                    "d={d} k={k}"
                );
            }
        }
    }
}

#[test]
fn dirichlet_oracle_sanity() {
    // d = 2, |v_1|^4 average: t uniform on [0,1], E t² = 1/3.
    let a = HermitianMatrix::from_diag(&[1.0, 0.0]).unwrap();
    assert!((scalar_moment(&a, 2) - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn moment_coefficients_do_not_depend_on_a() {
    for d in 2..=4 {
        let m = exact_moment(d, 2).unwrap();
        let terms: Vec<MomentBasis> = m.terms().map(|(b, _)| b).collect();
        assert_eq!(terms, vec![MomentBasis::A2, MomentBasis::TrA2I]);
    }
}

fn dims() -> impl Strategy<Value = usize> {
    2usize..=4
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_unitarily_covariant(d in dims(), seed in any::<u64>(), fourier in any::<bool>()) {
        let mut rng = RngStream::new(seed, 1).generator();
        let a = random_traceless_hermitian(d, 1.8, &mut rng).unwrap();
        let u = random_unitary(d, &mut rng).unwrap();
        let mode = if fourier { ExpMode::Fourier } else { ExpMode::Exp };
        let mut s = SphereSampler::new(d, RngStream::new(seed, 2)).unwrap();
        let v = s.next_vector();
        let w = projection_of(&v);
        let w_rot = projection_of(&v.rotate(&u));

        let lhs = bracket_p(&BracketCache::for_mode(&a.conjugate_by(&u), mode).unwrap(), &w_rot).unwrap();
        let rhs = u * bracket_p(&BracketCache::for_mode(&a, mode).unwrap(), &w).unwrap() * u.adjoint();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }

    #[test]
    fn bracket_is_hermitian_in_two_and_three_dims(d in 2usize..=3, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 3).generator();
        let a = random_traceless_hermitian(d, 2.0, &mut rng).unwrap();
        let w = SphereSampler::new(d, RngStream::new(seed, 4)).unwrap().next_projection();
        let p = bracket_p(&BracketCache::new(*a.matrix()).unwrap(), &w).unwrap();
        prop_assert!(p.max_asymmetry().0 < 1e-12);
    }

    #[test]
    fn four_dim_antihermitian_part_is_the_product_term(seed in any::<u64>()) {
        // Only the t/3 · A·W term fails to be hermitian.
        let mut rng = RngStream::new(seed, 5).generator();
        let a = random_traceless_hermitian(4, 2.0, &mut rng).unwrap();
        let w = SphereSampler::new(4, RngStream::new(seed, 6)).unwrap().next_projection();
        let p = bracket_p(&BracketCache::new(*a.matrix()).unwrap(), &w).unwrap();
        let t = a.matrix().trace_product(w.matrix()).re;
        let aw = *a.matrix() * *w.matrix();
        let anti = (p - p.adjoint()).scale_real(0.5);
        let want = (aw - aw.adjoint()).scale_real(t / 6.0);
        prop_assert!(anti.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn term_trace_sums_to_bracket(d in dims(), seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 7).generator();
        let a = random_traceless_hermitian(d, 1.0, &mut rng).unwrap();
        let cache = BracketCache::new(*a.matrix()).unwrap();
        let w = SphereSampler::new(d, RngStream::new(seed, 8)).unwrap().next_projection();
        let terms = bracket_terms(&cache, &w).unwrap();
        let mut sum = CMatrix::zeros(d);
        for (_, m) in terms.labelled() {
            sum += *m;
        }
        prop_assert_eq!(sum, terms.total());
        prop_assert!(sum.max_abs_diff(&bracket_p(&cache, &w).unwrap()) < 1e-12);
    }

    #[test]
    fn trace_split_reconstructs(d in dims(), seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 9).generator();
        let a = random_hermitian(d, 3.0, &mut rng).unwrap();
        let s = trace_split(&a);
        prop_assert!(s.traceless_part.trace().abs() < 1e-12);
        prop_assert!(s.reconstruct().matrix().max_abs_diff(a.matrix()) < 1e-15);
    }

    #[test]
    fn expm_determinant_and_unitarity(d in dims(), seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 10).generator();
        let a = random_hermitian(d, 2.0, &mut rng).unwrap();
        let e = expm_reference(&a, ExpMode::Exp).unwrap();
        let want = a.trace().exp();
        prop_assert!((det(&e) - C64::new(want, 0.0)).norm() <= 1e-10 * want);
        let herm = HermitianMatrix::new(e);
        prop_assert!(herm.is_ok());
        let (eigs, _) = herm.unwrap().eigh().unwrap();
        prop_assert!(eigs.iter().all(|&x| x > 0.0));

        let u = expm_reference(&a, ExpMode::Fourier).unwrap();
        prop_assert!((u.adjoint() * u - CMatrix::identity(d)).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn projection_ignores_global_phase(d in dims(), seed in any::<u64>(), theta in -10.0f64..10.0) {
        let v = SphereSampler::new(d, RngStream::new(seed, 11)).unwrap().next_vector();
        let w = projection_of(&v);
        let wp = projection_of(&v.with_phase(theta));
        prop_assert!(w.matrix().max_abs_diff(wp.matrix()) < 1e-15);
    }

    #[test]
    fn moment_evaluator_is_covariant(d in dims(), k in 0usize..=3, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 12).generator();
        let a = random_traceless_hermitian(d, 2.0, &mut rng).unwrap();
        let u = random_unitary(d, &mut rng).unwrap();
        let m = exact_moment(d, k).unwrap();
        let lhs = m.evaluate(a.conjugate_by(&u).matrix());
        let rhs = u * m.evaluate(a.matrix()) * u.adjoint();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }
}
