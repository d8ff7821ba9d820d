//! Closed-loop verification: RK4 simulation under disturbances, spectral
//! abscissa, dissipation auditing of the storage function x'Px, and a
//! combined certificate report.

use crate::care::{care_residual, LinearSystem, SystemMode, Weights};
use crate::eig::general_eig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::sof::{
    certify_theorem1, evaluate_feedthrough_certificate, feedthrough_gain, theorem2_block,
};
use crate::eig::min_eig_sym;

/// A + B F C (or A + B Fbar in feedthrough mode, where the loop must first
/// be resolved through I - FD).
pub fn closed_loop_matrix<T: Scalar>(
    system: &LinearSystem<T>,
    f: &Matrix<T>,
) -> Result<Matrix<T>> {
    match system.mode {
        SystemMode::DirectFeedthrough => {
            let f_bar = feedthrough_gain(system, f)?;
            Ok(&system.a + &system.b.matmul(&f_bar))
        }
        _ => Ok(&system.a + &system.b.matmul(f).matmul(&system.c)),
    }
}

pub fn spectral_abscissa<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    Ok(general_eig(m)?.max_real())
}

/// A simulated closed-loop run. States and inputs are sampled at every RK4
/// step; `storage` holds x'Px when a P was supplied.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub inputs: Vec<Vec<T>>,
    pub disturbances: Vec<Vec<T>>,
    pub storage: Vec<T>,
    /// Closed-loop state matrix used for the run.
    pub a_cl: Matrix<T>,
    /// Disturbance-to-state-derivative matrix (xdot = A_cl x + E w).
    pub dist_input: Matrix<T>,
    /// Index of the first non-finite or diverging sample, if any.
    pub diverged_at: Option<usize>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

/// Integrate xdot = A_cl x + E w with classical RK4 and a zero-order-hold
/// disturbance (`disturbance[i]` applies on step i; missing samples are
/// zero). `p` fills the storage trace x'Px when given. A default step of
/// 1e-3 / max(1, ||A_cl||_F) is used when `dt` is zero or negative, and a
/// horizon of 20 time constants when `t_final` is.
pub fn simulate_closed_loop<T: Scalar>(
    system: &LinearSystem<T>,
    f: &Matrix<T>,
    p: Option<&Matrix<T>>,
    disturbance: &[Vec<T>],
    x0: &[T],
    dt: T,
    t_final: T,
) -> Result<Trajectory<T>> {
    let a_cl = closed_loop_matrix(system, f)?;
    let n = a_cl.rows();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            context: "simulate_closed_loop x0",
            expected: format!("{n}"),
            got: format!("{}", x0.len()),
        });
    }
    let (e_mat, n_w) = disturbance_input(system, f)?;
    let scale = a_cl.fro_norm().max(T::one());
    let dt = if dt > T::zero() { dt } else { T::of(1e-3) / scale };
    let t_final = if t_final > T::zero() {
        t_final
    } else {
        T::of(20.0) / scale
    };
    let steps = (t_final / dt).ceil().to_usize().unwrap_or(0).max(1);

    let fc = match system.mode {
        SystemMode::DirectFeedthrough => feedthrough_gain(system, f)?,
        _ => f.matmul(&system.c),
    };
    let fd = match system.mode {
        SystemMode::MeasurementDisturbance => {
            Some(f.matmul(system.d.as_ref().expect("mode checked")))
        }
        _ => None,
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    let mut disturbances = Vec::with_capacity(steps + 1);
    let mut storage = Vec::with_capacity(steps + 1);
    let mut diverged_at = None;

    let w_at = |i: usize| -> Vec<T> {
        disturbance
            .get(i)
            .cloned()
            .unwrap_or_else(|| vec![T::zero(); n_w])
    };
    let deriv = |x: &[T], w: &[T]| -> Vec<T> {
        (0..n)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..n {
                    s = s + a_cl[(i, j)] * x[j];
                }
                for j in 0..n_w {
                    s = s + e_mat[(i, j)] * w[j];
                }
                s
            })
            .collect()
    };

    let mut x: Vec<T> = x0.to_vec();
    let bound = T::of(1e9) * (T::one() + x0.iter().map(|v| *v * *v).sum::<T>().sqrt());
    for i in 0..=steps {
        let w = w_at(i);
        if w.len() != n_w {
            return Err(Error::DimensionMismatch {
                context: "simulate_closed_loop disturbance sample",
                expected: format!("{n_w}"),
                got: format!("{}", w.len()),
            });
        }
        let norm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if !norm.is_finite() || norm > bound {
            diverged_at = Some(i);
        }
        times.push(T::of(i as f64) * dt);
        let u: Vec<T> = (0..fc.rows())
            .map(|k| {
                let mut s = T::zero();
                for j in 0..n {
                    s = s + fc[(k, j)] * x[j];
                }
                if let Some(fd) = &fd {
                    for j in 0..n_w {
                        s = s + fd[(k, j)] * w[j];
                    }
                }
                s
            })
            .collect();
        if let Some(p) = p {
            let mut v = T::zero();
            for a in 0..n {
                for b in 0..n {
                    v = v + x[a] * p[(a, b)] * x[b];
                }
            }
            storage.push(v);
        }
        inputs.push(u);
        disturbances.push(w.clone());
        states.push(x.clone());
        if diverged_at.is_some() {
            break;
        }
        if i == steps {
            break;
        }
        // RK4 with w held constant over the step
        let k1 = deriv(&x, &w);
        let half = dt * T::of(0.5);
        let x2: Vec<T> = (0..n).map(|j| x[j] + half * k1[j]).collect();
        let k2 = deriv(&x2, &w);
        let x3: Vec<T> = (0..n).map(|j| x[j] + half * k2[j]).collect();
        let k3 = deriv(&x3, &w);
        let x4: Vec<T> = (0..n).map(|j| x[j] + dt * k3[j]).collect();
        let k4 = deriv(&x4, &w);
        let sixth = dt / T::of(6.0);
        for j in 0..n {
            x[j] = x[j] + sixth * (k1[j] + T::of(2.0) * (k2[j] + k3[j]) + k4[j]);
        }
    }
    Ok(Trajectory {
        times,
        states,
        inputs,
        disturbances,
        storage,
        a_cl,
        dist_input: e_mat,
        diverged_at,
    })
}

/// Disturbance-to-state matrix E and the disturbance dimension for each
/// mode: B F D in measurement-disturbance mode (w enters through the
/// measurement), zero otherwise.
fn disturbance_input<T: Scalar>(
    system: &LinearSystem<T>,
    f: &Matrix<T>,
) -> Result<(Matrix<T>, usize)> {
    let (n, m, _) = system.dims();
    match system.mode {
        SystemMode::MeasurementDisturbance => {
            let d = system.d.as_ref().expect("mode checked");
            Ok((system.b.matmul(f).matmul(d), d.cols()))
        }
        _ => Ok((Matrix::zeros(n, m), m)),
    }
}

/// Result of auditing V = x'Px against the supply rate w'Rw along a
/// trajectory: the dissipation inequality dV/dt <= w'Rw must hold at every
/// sampled point (up to tolerance) for a valid certificate.
#[derive(Debug, Clone)]
pub struct DissipationReport<T> {
    pub max_violation: T,
    pub samples_checked: usize,
    pub ok: bool,
}

/// Check dV/dt - w'Rw <= tol at every sample, with dV/dt = 2 x'P xdot
/// computed from the model (not finite differences). Samples with
/// ||x|| + ||w|| below 1e-12 are skipped as numerically vacuous.
pub fn check_dissipation<T: Scalar>(
    traj: &Trajectory<T>,
    p: &Matrix<T>,
    r: &Matrix<T>,
) -> Result<DissipationReport<T>> {
    let n = traj.a_cl.rows();
    if p.rows() != n || p.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "check_dissipation P",
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", p.rows(), p.cols()),
        });
    }
    let n_w = traj.dist_input.cols();
    if r.rows() != n_w || r.cols() != n_w {
        return Err(Error::DimensionMismatch {
            context: "check_dissipation R vs disturbance",
            expected: format!("{n_w}x{n_w}"),
            got: format!("{}x{}", r.rows(), r.cols()),
        });
    }
    let tol = T::of(1e-7) * (T::one() + p.fro_norm());
    let mut max_violation = T::neg_infinity();
    let mut samples = 0usize;
    for (x, w) in traj.states.iter().zip(traj.disturbances.iter()) {
        let xn = x.iter().map(|v| v.abs()).sum::<T>();
        let wn = w.iter().map(|v| v.abs()).sum::<T>();
        if xn + wn < T::of(1e-12) {
            continue;
        }
        // xdot from the model
        let mut xdot = vec![T::zero(); n];
        for i in 0..n {
            let mut s = T::zero();
            for j in 0..n {
                s = s + traj.a_cl[(i, j)] * x[j];
            }
            for j in 0..n_w {
                s = s + traj.dist_input[(i, j)] * w[j];
            }
            xdot[i] = s;
        }
        let mut vdot = T::zero();
        for a in 0..n {
            for b in 0..n {
                vdot = vdot + T::of(2.0) * x[a] * p[(a, b)] * xdot[b];
            }
        }
        let mut supply = T::zero();
        for a in 0..n_w {
            for b in 0..n_w {
                supply = supply + w[a] * r[(a, b)] * w[b];
            }
        }
        let viol = vdot - supply;
        if viol > max_violation {
            max_violation = viol;
        }
        samples += 1;
    }
    if samples == 0 {
        max_violation = T::zero();
    }
    Ok(DissipationReport {
        max_violation,
        samples_checked: samples,
        ok: max_violation < tol,
    })
}

/// All certificates for a fixed gain in one report.
#[derive(Debug, Clone)]
pub struct CertifyReport<T> {
    /// Max eigenvalue of (A+BFC)'P + P(A+BFC); negative certifies.
    pub theorem1_max_eig: T,
    /// Min eigenvalue of the synthesis block at F; positive certifies.
    pub theorem2_min_eig: T,
    pub closed_loop_abscissa: T,
    /// Whether the strict theorem-1 and theorem-2 margins agree in sign
    /// (vacuously true when either is within tolerance of zero or the
    /// equivalence hypotheses do not apply).
    pub equivalence_consistent: bool,
}

pub fn certify_all<T: Scalar>(
    system: &LinearSystem<T>,
    weights: &Weights<T>,
    f: &Matrix<T>,
    p: &Matrix<T>,
) -> Result<CertifyReport<T>> {
    let theorem2_min_eig = match system.mode {
        SystemMode::DirectFeedthrough => {
            evaluate_feedthrough_certificate(system, p, &weights.q, &weights.r, f)?
        }
        _ => min_eig_sym(&theorem2_block(system, p, &weights.q, &weights.r, f, false)?)?,
    };
    let (theorem1_max_eig, a_cl) = match system.mode {
        SystemMode::DirectFeedthrough => {
            let f_bar = feedthrough_gain(system, f)?;
            let a_cl = &system.a + &system.b.matmul(&f_bar);
            let form = &a_cl.transpose().matmul(p) + &p.matmul(&a_cl);
            (crate::eig::max_eig_sym(&form.symmetrize())?, a_cl)
        }
        _ => {
            let a_cl = &system.a + &system.b.matmul(f).matmul(&system.c);
            (certify_theorem1(system, p, f)?, a_cl)
        }
    };
    let closed_loop_abscissa = spectral_abscissa(&a_cl)?;

    // Theorem 1 <=> Theorem 2 only when D = 0 and P solves the CARE for
    // (Q, R); outside that regime, or within tolerance of zero, the check
    // is vacuous.
    let d_zero = system.d_or_zero().fro_norm() == T::zero();
    let care_ok = care_residual(&system.a, &system.b, &weights.q, &weights.r, p)
        .map(|res| res <= T::of(1e-8) * (T::one() + p.fro_norm() * a_cl.fro_norm()))
        .unwrap_or(false);
    let margin_tol = T::of(1e-7) * (T::one() + p.fro_norm());
    let equivalence_consistent = if d_zero
        && care_ok
        && theorem1_max_eig.abs() > margin_tol
        && theorem2_min_eig.abs() > margin_tol
    {
        (theorem1_max_eig < T::zero()) == (theorem2_min_eig > T::zero())
    } else {
        true
    };
    Ok(CertifyReport {
        theorem1_max_eig,
        theorem2_min_eig,
        closed_loop_abscissa,
        equivalence_consistent,
    })
}
