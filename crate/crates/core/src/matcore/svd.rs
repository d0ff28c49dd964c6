//! Singular value decomposition and the unitary polar factor.

use num_complex::Complex64 as C64;

use super::eig::fix_column_phase;
use super::CMatrix;
use crate::error::{Error, Result};

const SVD_SWEEPS: usize = 60;
const RANK_EPS: f64 = 1e-12;

/// `A = left * diag(singulars) * right^dagger` with `singulars` descending.
#[derive(Clone, Debug)]
pub struct SvdTriple {
    pub left: CMatrix,
    pub singulars: Vec<f64>,
    pub right: CMatrix,
}

impl SvdTriple {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.left.dim();
        let mut scaled = self.left.clone();
        for (j, &s) in self.singulars.iter().enumerate() {
            scaled.scale_col(j, C64::new(s, 0.0));
        }
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += scaled[(i, k)] * self.right[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// One-sided Jacobi SVD.
///
/// Right rotations orthogonalize the columns of a working copy `W = A V`;
/// singular values are the resulting column norms and the left vectors the
/// normalized columns. Columns whose norm underflows to zero are completed
/// by modified Gram-Schmidt against the nonzero ones, so `left` is unitary
/// even for rank-deficient input.
pub fn svd(a: &CMatrix) -> Result<SvdTriple> {
    if !a.is_finite() {
        return Err(Error::NonFinite { what: "singular value decomposition input" });
    }
    let n = a.dim();
    let mut w = a.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    for _ in 0..SVD_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                // 2x2 Gram block of columns p, q.
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = C64::new(0.0, 0.0);
                for i in 0..n {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                let mag = apq.norm();
                if mag <= 1e-15 * (app * aqq).sqrt().max(1e-300 * scale) {
                    continue;
                }
                rotated = true;
                let phase = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = wp * (phase * c) - wq * s;
                    w[(i, q)] = wp * (phase * s) + wq * c;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * (phase * c) - vq * s;
                    v[(i, q)] = vp * (phase * s) + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<f64> = (0..n)
        .map(|j| w.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));

    let singulars: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut left = CMatrix::from_fn(n, |i, t| w[(i, order[t])]);
    let right = CMatrix::from_fn(n, |i, t| v[(i, order[t])]);
    norms = singulars.clone();

    for (t, &norm) in norms.iter().enumerate() {
        if norm > 0.0 {
            left.scale_col(t, C64::new(1.0 / norm, 0.0));
        } else {
            complete_column(&mut left, t);
        }
    }

    Ok(SvdTriple { left, singulars, right })
}

/// Replace zero column `t` with a unit vector orthogonal to columns `0..t`.
fn complete_column(left: &mut CMatrix, t: usize) {
    let n = left.dim();
    for basis in 0..n {
        let mut col: Vec<C64> = (0..n)
            .map(|i| if i == basis { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
            .collect();
        for prev in 0..t {
            let overlap: C64 = (0..n).map(|i| left[(i, prev)].conj() * col[i]).sum();
            for i in 0..n {
                let correction = left[(i, prev)] * overlap;
                col[i] -= correction;
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.5 {
            for i in 0..n {
                left[(i, t)] = col[i] / norm;
            }
            fix_column_phase(left, t);
            return;
        }
    }
    unreachable!("an n-dimensional basis always contains a completion vector");
}

/// Unitary factor `U = L R^dagger` of the polar decomposition `A = U P`.
///
/// `U` is the unitary closest to `A` in Frobenius norm. Fails with
/// [`Error::RankDeficient`] when the smallest singular value, relative to
/// the largest, drops to `1e-12` or below — the polar factor is no longer
/// determined by the data there.
pub fn unitary_polar(a: &CMatrix) -> Result<CMatrix> {
    let triple = svd(a)?;
    let smax = triple.singulars[0];
    let smin = *triple.singulars.last().expect("nonempty spectrum");
    if smax <= 0.0 || smin <= RANK_EPS * smax {
        return Err(Error::RankDeficient { sigma_min: smin, segment: None });
    }
    let n = a.dim();
    let mut u = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += triple.left[(i, k)] * triple.right[(j, k)].conj();
            }
            u[(i, j)] = acc;
        }
    }
    Ok(u)
}
