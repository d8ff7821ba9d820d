//! Spectral routines: cyclic Jacobi for symmetric matrices, Hessenberg
//! reduction plus shifted QR for general real matrices, and the PSD
//! utilities (square root, rank, pseudo-inverse) built on top of them.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Eigenvalues of a (possibly non-symmetric) real matrix.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<Complex<T>>,
}

impl<T: Scalar> Spectrum<T> {
    /// Maximum real part over the spectrum.
    pub fn max_real(&self) -> T {
        self.eigenvalues
            .iter()
            .fold(T::neg_infinity(), |a, z| if z.re > a { z.re } else { a })
    }

    /// Minimum |Re z| over the spectrum.
    pub fn min_abs_real(&self) -> T {
        self.eigenvalues
            .iter()
            .fold(T::infinity(), |a, z| if z.re.abs() < a { z.re.abs() } else { a })
    }
}

fn require_symmetric<T: Scalar>(s: &Matrix<T>) -> Result<Matrix<T>> {
    if !s.is_square() {
        return Err(Error::NotSquare {
            rows: s.rows(),
            cols: s.cols(),
        });
    }
    let asym = s.asymmetry();
    if asym > T::of(1e-12) {
        return Err(Error::NotSymmetric {
            asymmetry: asym.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    Ok(s.symmetrize())
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvector columns, so that `S = V diag(w) V^T`.
pub fn sym_eig<T: Scalar>(s: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    let mut a = require_symmetric(s)?;
    let n = a.rows();
    let mut v = Matrix::identity(n);
    if n <= 1 {
        let w = (0..n).map(|i| a[(i, i)]).collect();
        return Ok((w, v));
    }
    let scale = T::one() + a.fro_norm();
    let stop = T::epsilon() * T::of(1e-2) * scale;
    let max_sweeps = 100;
    for _sweep in 0..max_sweeps {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off + a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= T::epsilon() * T::of(1e-3) * scale {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (T::of(2.0) * apq);
                let t = {
                    let denom = theta.abs() + (theta * theta + T::one()).sqrt();
                    let t = T::one() / denom;
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                // update rows/cols p and q
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .partial_cmp(&a[(j, j)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let w: Vec<T> = order.iter().map(|&i| a[(i, i)]).collect();
    let vs = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((w, vs))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eig_sym<T: Scalar>(s: &Matrix<T>) -> Result<T> {
    let (w, _) = sym_eig(s)?;
    Ok(w.first().copied().unwrap_or(T::zero()))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eig_sym<T: Scalar>(s: &Matrix<T>) -> Result<T> {
    let (w, _) = sym_eig(s)?;
    Ok(w.last().copied().unwrap_or(T::zero()))
}

/// Symmetric PSD square root. Eigenvalues within tolerance below zero are
/// clamped; an indefinite input is rejected.
pub fn psd_sqrt<T: Scalar>(s: &Matrix<T>) -> Result<Matrix<T>> {
    let (w, v) = sym_eig(s)?;
    let tol = T::of(1e-10) * (T::one() + s.fro_norm());
    if let Some(&min) = w.first() {
        if min < -tol {
            return Err(Error::NotPositiveSemidefinite {
                min_eig: min.to_f64().unwrap_or(f64::NEG_INFINITY),
            });
        }
    }
    let n = s.rows();
    let sqrt_w = Matrix::diag(
        &w.iter()
            .map(|&l| if l > T::zero() { l.sqrt() } else { T::zero() })
            .collect::<Vec<_>>(),
    );
    let vt = v.transpose();
    Ok(v.matmul(&sqrt_w).matmul(&vt).symmetrize())
        .map(|m| if n == 0 { Matrix::zeros(0, 0) } else { m })
}

/// Singular values, descending, via eigenvalues of the smaller Gram matrix.
pub fn singular_values<T: Scalar>(m: &Matrix<T>) -> Result<Vec<T>> {
    let gram = if m.rows() >= m.cols() {
        m.transpose().matmul(m)
    } else {
        m.matmul(&m.transpose())
    };
    let (w, _) = sym_eig(&gram.symmetrize())?;
    // Gram eigenvalues carry O(eps * lambda_max) noise; clamp it before the
    // square root so a true zero does not surface as sqrt(eps) * sigma_max.
    let lmax = w.last().copied().unwrap_or(T::zero()).max(T::zero());
    let dim = T::of(gram.rows().max(1) as f64);
    let floor = T::epsilon() * lmax * dim;
    let mut sv: Vec<T> = w
        .iter()
        .map(|&l| if l > floor { l.sqrt() } else { T::zero() })
        .collect();
    sv.reverse();
    Ok(sv)
}

/// Number of singular values above `tol * sigma_max`.
pub fn numerical_rank<T: Scalar>(m: &Matrix<T>, tol: T) -> Result<usize> {
    let sv = singular_values(m)?;
    let smax = sv.first().copied().unwrap_or(T::zero());
    if smax == T::zero() {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * smax).count())
}

/// Moore-Penrose pseudo-inverse via the spectral decomposition of the
/// smaller Gram matrix.
pub fn pseudo_inverse<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(m.transpose());
    }
    let tall = m.rows() >= m.cols();
    let gram = if tall {
        m.transpose().matmul(m)
    } else {
        m.matmul(&m.transpose())
    };
    let (w, v) = sym_eig(&gram.symmetrize())?;
    let smax2 = w.last().copied().unwrap_or(T::zero()).max(T::zero());
    if smax2 == T::zero() {
        return Ok(m.transpose().scale(T::zero()));
    }
    let cutoff = T::of(1e-24) * smax2.max(T::one()) + T::of(1e-13) * smax2;
    let k = v.rows();
    // pinv = sum_{lambda_i > cutoff} v_i v_i^T / lambda_i, times M^T (or M^T times, dual)
    let mut proj = Matrix::zeros(k, k);
    for idx in 0..k {
        let l = w[idx];
        if l <= cutoff {
            continue;
        }
        for i in 0..k {
            for j in 0..k {
                proj[(i, j)] = proj[(i, j)] + v[(i, idx)] * v[(j, idx)] / l;
            }
        }
    }
    let mt = m.transpose();
    Ok(if tall {
        proj.matmul(&mt)
    } else {
        mt.matmul(&proj)
    })
}

// ---------------------------------------------------------------------------
// General (non-symmetric) eigenvalues: Hessenberg + complex shifted QR.
// ---------------------------------------------------------------------------

/// Reduce a square real matrix to upper Hessenberg form (similarity
/// transform discarded).
fn hessenberg<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal
        let mut alpha = T::zero();
        for i in (k + 1)..n {
            alpha = alpha + h[(i, k)] * h[(i, k)];
        }
        alpha = alpha.sqrt();
        if alpha == T::zero() {
            continue;
        }
        if h[(k + 1, k)] > T::zero() {
            alpha = -alpha;
        }
        let mut v = vec![T::zero(); n];
        v[k + 1] = h[(k + 1, k)] - alpha;
        for i in (k + 2)..n {
            v[i] = h[(i, k)];
        }
        let vtv: T = v.iter().map(|&x| x * x).sum();
        if vtv == T::zero() {
            continue;
        }
        let beta = T::of(2.0) / vtv;
        // H = (I - beta v v^T) H (I - beta v v^T)
        for j in 0..n {
            let mut s = T::zero();
            for i in (k + 1)..n {
                s = s + v[i] * h[(i, j)];
            }
            s = s * beta;
            for i in (k + 1)..n {
                h[(i, j)] = h[(i, j)] - v[i] * s;
            }
        }
        for i in 0..n {
            let mut s = T::zero();
            for j in (k + 1)..n {
                s = s + h[(i, j)] * v[j];
            }
            s = s * beta;
            for j in (k + 1)..n {
                h[(i, j)] = h[(i, j)] - s * v[j];
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = T::zero();
        }
    }
    h
}

type C<T> = Complex<T>;

/// Complex Givens rotation (c real, s complex) with
/// [c, s; -conj(s), c] * [a; b] = [r; 0].
fn givens<T: Scalar>(a: C<T>, b: C<T>) -> (T, C<T>) {
    let na = a.norm();
    let nb = b.norm();
    if nb == T::zero() {
        return (T::one(), C::new(T::zero(), T::zero()));
    }
    if na == T::zero() {
        return (T::zero(), C::new(T::one(), T::zero()));
    }
    let r = (na * na + nb * nb).sqrt();
    let c = na / r;
    let s = (a / na) * b.conj() / r;
    (c, s)
}

/// Eigenvalues of a real square matrix. Signals non-convergence instead of
/// returning garbage; the sweep cap is 100 per eigenvalue.
pub fn general_eig<T: Scalar>(a: &Matrix<T>) -> Result<Spectrum<T>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: vec![],
        });
    }
    let scale = T::one() + a.fro_norm();
    let hr = hessenberg(a);
    // complex working copy
    let mut h: Vec<C<T>> = hr
        .data()
        .iter()
        .map(|&x| C::new(x, T::zero()))
        .collect();
    let idx = |i: usize, j: usize| i * n + j;

    let mut eigs: Vec<C<T>> = Vec::with_capacity(n);
    let mut hi = n; // active trailing window is [lo, hi)
    let mut iters = 0usize;
    let cap = 100 * n;
    let negligible = |h: &Vec<C<T>>, i: usize| -> bool {
        let sub = h[idx(i, i - 1)].norm();
        let local = h[idx(i - 1, i - 1)].norm() + h[idx(i, i)].norm();
        sub <= T::epsilon() * (local + scale)
    };
    while hi > 0 {
        // deflate converged eigenvalues at the bottom
        if hi == 1 || negligible(&h, hi - 1) {
            eigs.push(h[idx(hi - 1, hi - 1)]);
            hi -= 1;
            continue;
        }
        if iters >= cap {
            return Err(Error::EigNonConvergence { iterations: iters });
        }
        iters += 1;
        // unreduced window [lo, hi)
        let mut lo = hi - 1;
        while lo > 0 && !negligible(&h, lo) {
            lo -= 1;
        }
        // Wilkinson shift from the trailing 2x2, with an occasional
        // exceptional shift to break symmetry-induced cycles
        let a11 = h[idx(hi - 2, hi - 2)];
        let a12 = h[idx(hi - 2, hi - 1)];
        let a21 = h[idx(hi - 1, hi - 2)];
        let a22 = h[idx(hi - 1, hi - 1)];
        let mu = if iters % 30 == 0 {
            a22 + C::new(a21.norm() + a12.norm(), T::zero())
        } else {
            let tr = a11 + a22;
            let det = a11 * a22 - a12 * a21;
            let half = C::new(T::of(0.5), T::zero());
            let disc = (tr * tr * C::new(T::of(0.25), T::zero()) - det).sqrt();
            let l1 = tr * half + disc;
            let l2 = tr * half - disc;
            if (l1 - a22).norm() < (l2 - a22).norm() {
                l1
            } else {
                l2
            }
        };
        // explicit shifted QR step on the window via Givens rotations
        for i in lo..hi {
            h[idx(i, i)] = h[idx(i, i)] - mu;
        }
        let mut rots: Vec<(T, C<T>)> = Vec::with_capacity(hi - lo - 1);
        for i in lo..(hi - 1) {
            let (c, s) = givens(h[idx(i, i)], h[idx(i + 1, i)]);
            // rows i, i+1 over columns i..hi
            for j in i..hi {
                let top = h[idx(i, j)];
                let bot = h[idx(i + 1, j)];
                h[idx(i, j)] = top.scale(c) + s * bot;
                h[idx(i + 1, j)] = -s.conj() * top + bot.scale(c);
            }
            rots.push((c, s));
        }
        for (k, &(c, s)) in rots.iter().enumerate() {
            let i = lo + k;
            // columns i, i+1 over rows lo..=min(i+1, hi-1)
            let top_row = lo;
            let bot_row = (i + 2).min(hi);
            for r in top_row..bot_row {
                let left = h[idx(r, i)];
                let right = h[idx(r, i + 1)];
                h[idx(r, i)] = left.scale(c) + right * s.conj();
                h[idx(r, i + 1)] = -left * s + right.scale(c);
            }
        }
        for i in lo..hi {
            h[idx(i, i)] = h[idx(i, i)] + mu;
        }
    }
    Ok(Spectrum {
        eigenvalues: pair_conjugates(eigs, scale),
    })
}

/// Force the spectrum of a real matrix to be a conjugate-closed multiset:
/// tiny imaginary parts are zeroed and +/- pairs are averaged.
fn pair_conjugates<T: Scalar>(mut eigs: Vec<C<T>>, scale: T) -> Vec<C<T>> {
    let tol = T::of(1e-8) * scale;
    for z in eigs.iter_mut() {
        if z.im.abs() <= tol {
            z.im = T::zero();
        }
    }
    let mut out: Vec<C<T>> = Vec::with_capacity(eigs.len());
    let mut used = vec![false; eigs.len()];
    for i in 0..eigs.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let zi = eigs[i];
        if zi.im == T::zero() {
            out.push(zi);
            continue;
        }
        // find the closest unused conjugate partner
        let mut best: Option<(usize, T)> = None;
        for j in (i + 1)..eigs.len() {
            if used[j] || eigs[j].im == T::zero() || (eigs[j].im > T::zero()) == (zi.im > T::zero())
            {
                continue;
            }
            let d = (eigs[j].conj() - zi).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, _)) => {
                used[j] = true;
                let zj = eigs[j];
                let half = T::of(0.5);
                let re = (zi.re + zj.re) * half;
                let im = (zi.im.abs() + zj.im.abs()) * half;
                let (first, second) = if zi.im > T::zero() {
                    (C::new(re, im), C::new(re, -im))
                } else {
                    (C::new(re, -im), C::new(re, im))
                };
                out.push(first);
                out.push(second);
            }
            None => out.push(zi), // unpaired; reported by invariant tests
        }
    }
    out
}

/// Solve a complex square linear system by LU with partial pivoting.
/// Used for inverse iteration on the Hamiltonian matrix.
pub(crate) fn complex_solve<T: Scalar>(
    n: usize,
    a: &[C<T>],
    b: &[C<T>],
) -> Result<Vec<C<T>>> {
    let mut lu = a.to_vec();
    let mut piv: Vec<usize> = (0..n).collect();
    let idx = |i: usize, j: usize| i * n + j;
    for k in 0..n {
        let mut p = k;
        let mut best = lu[idx(k, k)].norm();
        for i in (k + 1)..n {
            if lu[idx(i, k)].norm() > best {
                best = lu[idx(i, k)].norm();
                p = i;
            }
        }
        if best == T::zero() {
            return Err(Error::Singular {
                context: "complex_solve",
            });
        }
        if p != k {
            for j in 0..n {
                lu.swap(idx(k, j), idx(p, j));
            }
            piv.swap(k, p);
        }
        let pivot = lu[idx(k, k)];
        for i in (k + 1)..n {
            let f = lu[idx(i, k)] / pivot;
            lu[idx(i, k)] = f;
            for j in (k + 1)..n {
                let delta = f * lu[idx(k, j)];
                lu[idx(i, j)] = lu[idx(i, j)] - delta;
            }
        }
    }
    let mut y = vec![C::new(T::zero(), T::zero()); n];
    for i in 0..n {
        let mut s = b[piv[i]];
        for j in 0..i {
            s = s - lu[idx(i, j)] * y[j];
        }
        y[i] = s;
    }
    let mut x = vec![C::new(T::zero(), T::zero()); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in (i + 1)..n {
            s = s - lu[idx(i, j)] * x[j];
        }
        x[i] = s / lu[idx(i, i)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Matrix<f64>;

    fn reconstruct(w: &[f64], v: &M) -> M {
        let d = M::diag(w);
        v.matmul(&d).matmul(&v.transpose())
    }

    #[test]
    fn sym_eig_diagonal() {
        let s = M::diag(&[3.0, 1.0]);
        let (w, v) = sym_eig(&s).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 3.0).abs() < 1e-14);
        // columns are a signed permutation of the identity
        for j in 0..2 {
            let col: Vec<f64> = (0..2).map(|i| v[(i, j)].abs()).collect();
            assert!(col.iter().filter(|&&x| (x - 1.0).abs() < 1e-12).count() == 1);
        }
    }

    #[test]
    fn sym_eig_exchange_matrix() {
        let s = M::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (w, _) = sym_eig(&s).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sym_eig_reconstruction_residual() {
        // fixed 5x5 symmetric matrix
        let mut s = M::zeros(5, 5);
        let mut seed = 42u64;
        for i in 0..5 {
            for j in 0..=i {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let v = ((seed >> 33) as f64) / (1u64 << 31) as f64 - 1.0;
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        let (w, v) = sym_eig(&s).unwrap();
        let err = (&reconstruct(&w, &v) - &s).fro_norm();
        assert!(err <= 1e-10 * (1.0 + s.fro_norm()), "residual {err}");
        let orth = (&v.transpose().matmul(&v) - &M::identity(5)).fro_norm();
        assert!(orth < 1e-12);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let s = M::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(sym_eig(&s), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn min_eig_trivial_cases() {
        assert!((min_eig_sym(&M::identity(3)).unwrap() - 1.0).abs() < 1e-14);
        assert!((min_eig_sym(&M::diag(&[-2.0, 5.0])).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn min_eig_gram_nonnegative() {
        let g = M::from_rows(&[vec![1.0, 2.0], vec![-0.5, 0.3], vec![2.0, -1.0]]).unwrap();
        let gram = g.transpose().matmul(&g);
        assert!(min_eig_sym(&gram).unwrap() >= -1e-12);
    }

    #[test]
    fn psd_sqrt_diag() {
        let s = M::diag(&[4.0, 9.0]);
        let w = psd_sqrt(&s).unwrap();
        assert!((w[(0, 0)] - 2.0).abs() < 1e-12 && (w[(1, 1)] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn psd_sqrt_zero_and_residual() {
        let z = M::zeros(3, 3);
        assert!(psd_sqrt(&z).unwrap().fro_norm() == 0.0);
        let g = M::from_rows(&[vec![1.0, 0.5, 0.0], vec![0.2, 2.0, -1.0]]).unwrap();
        let s = g.transpose().matmul(&g);
        let w = psd_sqrt(&s).unwrap();
        let r = (&w.matmul(&w) - &s).fro_norm();
        assert!(r < 1e-9, "sqrt residual {r}");
    }

    #[test]
    fn psd_sqrt_rejects_indefinite() {
        assert!(psd_sqrt(&M::diag(&[1.0, -1.0])).is_err());
    }

    #[test]
    fn rank_trivial() {
        assert_eq!(numerical_rank(&M::identity(4), 1e-9).unwrap(), 4);
        assert_eq!(numerical_rank(&M::zeros(3, 3), 1e-9).unwrap(), 0);
    }

    #[test]
    fn rank_double_integrator_controllability() {
        // [B AB] for A=[[0,1],[0,0]], B=[0;1] has determinant -1
        let ctrb = M::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(numerical_rank(&ctrb, 1e-9).unwrap(), 2);
    }

    #[test]
    fn rank_permutation_invariant() {
        let m = M::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.0, 1.0, 0.0]])
            .unwrap();
        let permuted =
            M::from_rows(&[vec![0.0, 0.0, 1.0], vec![2.0, 6.0, 4.0], vec![1.0, 3.0, 2.0]])
                .unwrap();
        assert_eq!(
            numerical_rank(&m, 1e-9).unwrap(),
            numerical_rank(&permuted, 1e-9).unwrap()
        );
    }

    fn penrose_ok(m: &M, p: &M) -> bool {
        let scale = 1.0 + m.fro_norm();
        let e1 = (&m.matmul(p).matmul(m) - m).fro_norm() / scale;
        let e2 = (&p.matmul(m).matmul(p) - p).fro_norm() / (1.0 + p.fro_norm());
        let mp = m.matmul(p);
        let pm = p.matmul(m);
        let e3 = (&mp.transpose() - &mp).fro_norm() / (1.0 + mp.fro_norm());
        let e4 = (&pm.transpose() - &pm).fro_norm() / (1.0 + pm.fro_norm());
        e1 < 1e-9 && e2 < 1e-9 && e3 < 1e-9 && e4 < 1e-9
    }

    #[test]
    fn pinv_invertible_matches_inverse() {
        let m = M::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let p = pseudo_inverse(&m).unwrap();
        let inv = m.inverse().unwrap();
        assert!((&p - &inv).fro_norm() < 1e-10);
        assert!(penrose_ok(&m, &p));
    }

    #[test]
    fn pinv_zero_and_projection() {
        let z = M::zeros(2, 3);
        let p = pseudo_inverse(&z).unwrap();
        assert_eq!((p.rows(), p.cols()), (3, 2));
        assert!(p.fro_norm() == 0.0);
        let proj = M::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let pp = pseudo_inverse(&proj).unwrap();
        assert!((&pp - &proj).fro_norm() < 1e-12);
        assert!(penrose_ok(&proj, &pp));
    }

    #[test]
    fn pinv_rectangular() {
        let m = M::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let p = pseudo_inverse(&m).unwrap();
        assert!(penrose_ok(&m, &p));
    }

    #[test]
    fn general_eig_rotation() {
        let a = M::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let sp = general_eig(&a).unwrap();
        let mut ims: Vec<f64> = sp.eigenvalues.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-10 && (ims[1] - 1.0).abs() < 1e-10);
        assert!(sp.eigenvalues.iter().all(|z| z.re.abs() < 1e-10));
    }

    #[test]
    fn general_eig_triangular() {
        let a = M::from_rows(&[
            vec![3.0, 1.0, -2.0],
            vec![0.0, -1.0, 4.0],
            vec![0.0, 0.0, 0.5],
        ])
        .unwrap();
        let sp = general_eig(&a).unwrap();
        let mut res: Vec<f64> = sp.eigenvalues.iter().map(|z| z.re).collect();
        res.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((res[0] + 1.0).abs() < 1e-9);
        assert!((res[1] - 0.5).abs() < 1e-9);
        assert!((res[2] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn general_eig_example1_open_loop_unstable() {
        // roots of char(A) = l^3 - l^2 - 13 l (hand-expanded determinant):
        // 0 and (1 +- sqrt(53))/2, so one root is positive
        let a = M::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 13.0, 0.0],
        ])
        .unwrap();
        let sp = general_eig(&a).unwrap();
        let expected = (1.0 + 53.0_f64.sqrt()) / 2.0;
        assert!(
            sp.eigenvalues
                .iter()
                .any(|z| (z.re - expected).abs() < 1e-8 && z.im.abs() < 1e-8),
            "spectrum {:?}",
            sp.eigenvalues
        );
        assert!(sp.max_real() > 0.0);
    }

    #[test]
    fn general_eig_conjugate_closed() {
        let a = M::from_rows(&[
            vec![0.1, 2.0, 0.0, -1.0],
            vec![-3.0, 0.2, 1.0, 0.5],
            vec![0.4, -0.7, -1.0, 2.0],
            vec![1.0, 0.0, -2.0, 0.3],
        ])
        .unwrap();
        let sp = general_eig(&a).unwrap();
        // every eigenvalue's conjugate is present
        for z in &sp.eigenvalues {
            let zc = z.conj();
            assert!(
                sp.eigenvalues.iter().any(|w| (w - zc).norm() < 1e-8),
                "missing conjugate of {z}"
            );
        }
        // spectrum satisfies the characteristic polynomial: check via det(A - lambda I)
        // through the real trace/determinant invariants
        let tr: f64 = sp.eigenvalues.iter().map(|z| z.re).sum();
        assert!((tr - a.trace()).abs() < 1e-8);
        let det_prod = sp
            .eigenvalues
            .iter()
            .fold(Complex::new(1.0, 0.0), |acc, z| acc * z);
        assert!((det_prod.re - a.determinant().unwrap()).abs() < 1e-7);
        assert!(det_prod.im.abs() < 1e-7);
    }

    #[test]
    fn general_eig_non_square_rejected() {
        let a = M::zeros(2, 3);
        assert!(general_eig(&a).is_err());
    }
}
