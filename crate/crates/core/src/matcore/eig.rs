//! Hermitian eigendecomposition via cyclic complex Jacobi rotations.

use num_complex::Complex64 as C64;

use super::{hermitian_average, CMatrix};
use crate::error::{Error, Result};

const HERM_TOL: f64 = 1e-8;
const JACOBI_SWEEPS: usize = 60;

/// Spectral decomposition of a Hermitian matrix: `A = V diag(values) V^dagger`.
///
/// Eigenvalues are sorted in descending order; column `j` of `vectors` is the
/// eigenvector for `values[j]`. Each eigenvector carries a fixed phase: its
/// largest-modulus component is real and positive (ties broken by the lowest
/// row index among components within 1e-12 of the maximum modulus).
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigDecomposition {
    /// Index pairs `(values[j], column j)` in descending eigenvalue order.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.values.iter().copied().zip(0..self.values.len())
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Fails with [`Error::NonHermitianInput`] when `||A - A^dagger||_F` exceeds
/// `1e-8 * max(1, ||A||_F)`; within that band the Hermitian average of `A`
/// is diagonalized so that accumulated floating-point asymmetry in callers
/// does not poison the rotation angles.
pub fn herm_eig(a: &CMatrix) -> Result<EigDecomposition> {
    if !a.is_finite() {
        return Err(Error::NonFinite { what: "eigendecomposition input" });
    }
    let scale = a.frobenius_norm().max(1.0);
    let deviation = a.hermiticity_deviation();
    if deviation > HERM_TOL * scale {
        return Err(Error::NonHermitianInput { deviation, tol: HERM_TOL * scale });
    }
    Ok(jacobi(&hermitian_average(a)))
}

/// Cyclic Jacobi on a Hermitian matrix (caller guarantees exact Hermiticity).
pub(super) fn jacobi(a: &CMatrix) -> EigDecomposition {
    let n = a.dim();
    let mut m = a.clone();
    let mut v = CMatrix::identity(n);

    for _ in 0..JACOBI_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        let diag_scale: f64 = (0..n)
            .map(|i| m[(i, i)].re.abs())
            .fold(1.0, f64::max);
        if off.sqrt() <= 1e-15 * diag_scale {
            break;
        }

        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Columns: [p q] <- [p q] * [[c*phase, s*phase], [-s, c]]
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * (phase * c) - miq * s;
                    m[(i, q)] = mip * (phase * s) + miq * c;
                }
                // Rows: conjugate transpose of the same rotation from the left.
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * (phase.conj() * c) - mqj * s;
                    m[(q, j)] = mpj * (phase.conj() * s) + mqj * c;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * (phase * c) - viq * s;
                    v[(i, q)] = vip * (phase * s) + viq * c;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(j, j)]
            .re
            .partial_cmp(&m[(i, i)].re)
            .expect("finite eigenvalues")
    });

    let values: Vec<f64> = order.iter().map(|&j| m[(j, j)].re).collect();
    let mut vectors = CMatrix::from_fn(n, |i, t| v[(i, order[t])]);
    for t in 0..n {
        fix_column_phase(&mut vectors, t);
    }
    EigDecomposition { values, vectors }
}

/// Rotate column `t` so its largest-modulus entry is real positive.
pub(super) fn fix_column_phase(m: &mut CMatrix, t: usize) {
    let n = m.dim();
    let mut best_row = 0;
    let mut best_mag = -1.0;
    for i in 0..n {
        let mag = m[(i, t)].norm();
        if mag > best_mag + 1e-12 {
            best_mag = mag;
            best_row = i;
        }
    }
    let pivot = m[(best_row, t)];
    if pivot.norm() > 0.0 {
        m.scale_col(t, pivot.conj() / pivot.norm());
    }
}

/// Hermitian positive-semidefinite square root.
///
/// Eigenvalues below `-1e-8` (absolute) are rejected as [`Error::NotPositive`];
/// small negative dust above that bound, and anything below
/// `1e-15 * max(1, ||A||_F)`, is clamped to zero before the square root so
/// that `sqrt_psd(S*S)` recovers a singular `S` instead of amplifying noise.
pub fn sqrt_psd(a: &CMatrix) -> Result<CMatrix> {
    let e = herm_eig(a)?;
    let clamp = 1e-15 * a.frobenius_norm().max(1.0);
    let mut roots = Vec::with_capacity(e.values.len());
    for &lambda in &e.values {
        if lambda < -1e-8 {
            return Err(Error::NotPositive { eigenvalue: lambda });
        }
        roots.push(if lambda <= clamp { 0.0 } else { lambda.sqrt() });
    }
    Ok(super::from_spectral(&e.vectors, &roots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::from_spectral;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand::Rng as _;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = CMatrix::from_fn(n, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        raw.add(&raw.adjoint()).scaled_re(0.5)
    }

    #[test]
    fn pauli_x_eigensystem() {
        let sx = CMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ]);
        let e = herm_eig(&sx).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
        let r = 0.5f64.sqrt();
        assert!((e.vectors[(0, 0)] - c(r, 0.0)).norm() < 1e-12);
        assert!((e.vectors[(1, 0)] - c(r, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn eigenpair_residuals_on_random_4x4() {
        for seed in 0..6 {
            let a = random_hermitian(4, seed);
            let e = herm_eig(&a).unwrap();
            assert!(e.vectors.is_unitary(1e-12));
            for t in 0..4 {
                let col = e.vectors.col(t);
                let mut residual = 0.0f64;
                for i in 0..4 {
                    let mut av = c(0.0, 0.0);
                    for j in 0..4 {
                        av += a[(i, j)] * col[j];
                    }
                    residual += (av - col[i] * e.values[t]).norm_sqr();
                }
                assert!(
                    residual.sqrt() < 1e-12 * a.frobenius_norm().max(1.0),
                    "residual {} for eigenvalue {}",
                    residual.sqrt(),
                    e.values[t]
                );
            }
            for t in 1..4 {
                assert!(e.values[t - 1] >= e.values[t]);
            }
        }
    }

    #[test]
    fn phase_convention_largest_entry_real_positive() {
        for seed in 10..16 {
            let a = random_hermitian(5, seed);
            let e = herm_eig(&a).unwrap();
            for t in 0..5 {
                let col = e.vectors.col(t);
                let max_mag = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let pivot = col
                    .iter()
                    .find(|z| z.norm() > max_mag - 1e-12)
                    .copied()
                    .unwrap();
                assert!(pivot.im.abs() < 1e-12, "pivot {pivot} not real");
                assert!(pivot.re > 0.0, "pivot {pivot} not positive");
            }
        }
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let a = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        match herm_eig(&a) {
            Err(Error::NonHermitianInput { .. }) => {}
            other => panic!("expected NonHermitianInput, got {other:?}"),
        }
    }

    #[test]
    fn sqrt_of_diagonal() {
        let a = CMatrix::diag_re(&[4.0, 9.0, 0.25]);
        let s = sqrt_psd(&a).unwrap();
        let expected = CMatrix::diag_re(&[2.0, 3.0, 0.5]);
        assert!(s.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn sqrt_rejects_clearly_negative_matrix() {
        let a = CMatrix::diag_re(&[1.0, -1e-6]);
        match sqrt_psd(&a) {
            Err(Error::NotPositive { eigenvalue }) => {
                assert!((eigenvalue + 1e-6).abs() < 1e-9)
            }
            other => panic!("expected NotPositive, got {other:?}"),
        }
    }

    #[test]
    fn sqrt_tolerates_negative_dust() {
        let a = CMatrix::diag_re(&[1.0, -1e-12]);
        let s = sqrt_psd(&a).unwrap();
        assert!((s[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(s[(1, 1)].norm() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reconstruction_from_spectral_data(seed in 0u64..1000) {
            let a = random_hermitian(4, seed);
            let e = herm_eig(&a).unwrap();
            let rebuilt = from_spectral(&e.vectors, &e.values);
            prop_assert!(a.max_abs_diff(&rebuilt) < 1e-12);
        }

        #[test]
        fn sqrt_squares_back(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 3;
            let raw = CMatrix::from_fn(n, |_, _| {
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let a = raw.mul(&raw.adjoint());
            let s = sqrt_psd(&a).unwrap();
            prop_assert!(s.is_hermitian(1e-10));
            prop_assert!(s.mul(&s).max_abs_diff(&a) < 1e-10 * a.frobenius_norm().max(1.0));
        }

        #[test]
        fn sqrt_is_involutive_on_roots(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..2.0)).collect();
            let a = CMatrix::diag_re(&values);
            let s = sqrt_psd(&a.mul(&a)).unwrap();
            prop_assert!(s.max_abs_diff(&a) < 1e-8);
        }
    }
}
