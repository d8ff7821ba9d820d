//! Continuous algebraic Riccati equation, Lyapunov solves, and LQR helpers.
//!
//! The CARE path forms the Hamiltonian matrix, extracts its stable invariant
//! subspace by inverse iteration on the computed eigenvalues, and polishes
//! the result with Newton-Kleinman steps (one Kronecker Lyapunov solve each).

use num_complex::Complex;

use crate::eig::{complex_solve, general_eig, min_eig_sym, psd_sqrt, numerical_rank};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// How the D matrix of a [`LinearSystem`] is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemMode {
    /// y = Cx + Dw, D multiplies a measurement disturbance.
    MeasurementDisturbance,
    /// y = Cx + Du, D is a direct feedthrough of the control.
    DirectFeedthrough,
    /// y = Cx, no D at all.
    NoD,
}

/// Linear time-invariant plant (A, B, C, D).
#[derive(Debug, Clone)]
pub struct LinearSystem<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub c: Matrix<T>,
    pub d: Option<Matrix<T>>,
    pub mode: SystemMode,
}

impl<T: Scalar> LinearSystem<T> {
    pub fn new(
        a: Matrix<T>,
        b: Matrix<T>,
        c: Matrix<T>,
        d: Option<Matrix<T>>,
        mode: SystemMode,
    ) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let mismatch = |context: &'static str, expected: String, got: String| {
            Err(Error::DimensionMismatch {
                context,
                expected,
                got,
            })
        };
        if b.rows() != n {
            return mismatch("LinearSystem B", format!("{n} rows"), format!("{}", b.rows()));
        }
        if c.cols() != n {
            return mismatch("LinearSystem C", format!("{n} cols"), format!("{}", c.cols()));
        }
        let m = b.cols();
        let p = c.rows();
        match (&d, mode) {
            (None, SystemMode::NoD) => {}
            (Some(d), SystemMode::MeasurementDisturbance) => {
                if d.rows() != p {
                    return mismatch("LinearSystem D", format!("{p} rows"), format!("{}", d.rows()));
                }
            }
            (Some(d), SystemMode::DirectFeedthrough) => {
                if d.rows() != p || d.cols() != m {
                    return mismatch(
                        "LinearSystem D",
                        format!("{p}x{m}"),
                        format!("{}x{}", d.rows(), d.cols()),
                    );
                }
            }
            (None, SystemMode::MeasurementDisturbance | SystemMode::DirectFeedthrough) => {
                return Err(Error::InvalidInput(
                    "mode requires a D matrix but none was given".into(),
                ))
            }
            (Some(_), SystemMode::NoD) => {
                return Err(Error::InvalidInput("mode no-d forbids a D matrix".into()))
            }
        }
        Ok(LinearSystem { a, b, c, d, mode })
    }

    /// State, input, and output dimensions (n, m, p).
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a.rows(), self.b.cols(), self.c.rows())
    }

    /// D, defaulting to a zero p x m matrix when absent.
    pub fn d_or_zero(&self) -> Matrix<T> {
        match &self.d {
            Some(d) => d.clone(),
            None => Matrix::zeros(self.c.rows(), self.b.cols()),
        }
    }
}

/// LQR weighting matrices.
#[derive(Debug, Clone)]
pub struct Weights<T> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
}

impl<T: Scalar> Weights<T> {
    pub fn new(q: Matrix<T>, r: Matrix<T>) -> Result<Self> {
        if !q.is_square() || !r.is_square() {
            return Err(Error::InvalidInput("Q and R must be square".into()));
        }
        let qmin = min_eig_sym(&q.symmetrize())?;
        if qmin < T::of(-1e-10) * (T::one() + q.fro_norm()) {
            return Err(Error::NotPositiveSemidefinite {
                min_eig: qmin.to_f64().unwrap_or(f64::NEG_INFINITY),
            });
        }
        let rmin = min_eig_sym(&r.symmetrize())?;
        if rmin <= T::zero() {
            return Err(Error::InvalidInput(format!(
                "R must be positive definite (min eigenvalue {rmin})"
            )));
        }
        Ok(Weights {
            q: q.symmetrize(),
            r: r.symmetrize(),
        })
    }
}

/// Stabilizing CARE solution with its diagnostics.
#[derive(Debug, Clone)]
pub struct RiccatiSolution<T> {
    pub p: Matrix<T>,
    pub k: Matrix<T>,
    pub residual_norm: T,
    pub refinement_iterations: usize,
}

/// Rank verdict from a controllability/observability test.
#[derive(Debug, Clone)]
pub struct RankReport {
    pub rank: usize,
    pub required: usize,
}

impl RankReport {
    pub fn ok(&self) -> bool {
        self.rank == self.required
    }
}

/// Kalman controllability test: rank [B, AB, ..., A^{n-1}B] = n.
pub fn check_controllable<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, tol: T) -> Result<RankReport> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            context: "check_controllable",
            expected: format!("A square, B with {} rows", a.rows()),
            got: format!("A {}x{}, B {}x{}", a.rows(), a.cols(), b.rows(), b.cols()),
        });
    }
    let n = a.rows();
    let mut block = b.clone();
    let mut ctrb = b.clone();
    for _ in 1..n {
        block = a.matmul(&block);
        ctrb = ctrb.hstack(&block);
    }
    let rank = numerical_rank(&ctrb, tol)?;
    Ok(RankReport { rank, required: n })
}

/// Dual of [`check_controllable`]: observability of (A, C).
pub fn check_observable<T: Scalar>(a: &Matrix<T>, c: &Matrix<T>, tol: T) -> Result<RankReport> {
    check_controllable(&a.transpose(), &c.transpose(), tol)
}

/// Residual norm of the Riccati equation -A'P - PA + P B R^{-1} B' P - Q.
pub fn care_residual<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
    p: &Matrix<T>,
) -> Result<T> {
    let at_p = a.transpose().matmul(p);
    let bt_p = b.transpose().matmul(p);
    let rinv_btp = r.solve(&bt_p)?;
    let quad = p.matmul(b).matmul(&rinv_btp);
    let res = &(&(&quad - &at_p) - &p.matmul(a)) - q;
    Ok(res.fro_norm())
}

/// Solve A'X + XA + Q = 0 for stable A via a dense Kronecker system.
pub fn solve_lyapunov<T: Scalar>(a: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() || a.rows() != q.rows() || !q.is_square() {
        return Err(Error::DimensionMismatch {
            context: "solve_lyapunov",
            expected: format!("square A and Q of order {}", a.rows()),
            got: format!("A {}x{}, Q {}x{}", a.rows(), a.cols(), q.rows(), q.cols()),
        });
    }
    let abscissa = general_eig(a)?.max_real();
    if abscissa >= T::zero() {
        return Err(Error::UnstableLyapunov {
            abscissa: abscissa.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    let n = a.rows();
    let nn = n * n;
    // unknown X[p][q] at index p*n+q; equation (i,j):
    //   sum_k A[k,i] X[k,j] + A[k,j] X[i,k] = -Q[i,j]
    let mut lhs = Matrix::zeros(nn, nn);
    let mut rhs = Matrix::zeros(nn, 1);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                let c1 = a[(k, i)];
                lhs[(row, k * n + j)] = lhs[(row, k * n + j)] + c1;
                let c2 = a[(k, j)];
                lhs[(row, i * n + k)] = lhs[(row, i * n + k)] + c2;
            }
            rhs[(row, 0)] = -q[(i, j)];
        }
    }
    let x = lhs.solve(&rhs).map_err(|_| Error::Singular {
        context: "lyapunov Kronecker system",
    })?;
    let sol = Matrix::from_fn(n, n, |i, j| x[(i * n + j, 0)]).symmetrize();
    Ok(sol)
}

/// Options for [`solve_care_opts`].
#[derive(Debug, Clone, Default)]
pub struct CareOptions {
    /// Treat controllability/observability failures as hard errors.
    pub strict_assumptions: bool,
}

pub fn solve_care<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
) -> Result<RiccatiSolution<T>> {
    solve_care_opts(a, b, q, r, &CareOptions::default())
}

pub fn solve_care_opts<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
    options: &CareOptions,
) -> Result<RiccatiSolution<T>> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n || q.rows() != n || !q.is_square() || r.rows() != b.cols() {
        return Err(Error::DimensionMismatch {
            context: "solve_care",
            expected: format!("A {n}x{n}, B {n}xm, Q {n}x{n}, R mxm"),
            got: format!(
                "A {}x{}, B {}x{}, Q {}x{}, R {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols(),
                q.rows(),
                q.cols(),
                r.rows(),
                r.cols()
            ),
        });
    }
    if options.strict_assumptions {
        let tol = T::of(1e-9);
        let ctrb = check_controllable(a, b, tol)?;
        if !ctrb.ok() {
            return Err(Error::AssumptionViolated(format!(
                "(A,B) not controllable: rank {} of {}",
                ctrb.rank, ctrb.required
            )));
        }
        let sqrt_q = psd_sqrt(&q.symmetrize())?;
        let obsv = check_observable(a, &sqrt_q, tol)?;
        if !obsv.ok() {
            return Err(Error::AssumptionViolated(format!(
                "(A,sqrt(Q)) not observable: rank {} of {}",
                obsv.rank, obsv.required
            )));
        }
    }
    let q = q.symmetrize();
    let r = r.symmetrize();

    // Hamiltonian [[A, -B R^{-1} B'], [-Q, -A']]
    let bt = b.transpose();
    let rinv_bt = r.solve(&bt)?;
    let brb = b.matmul(&rinv_bt); // B R^{-1} B'
    let mut ham = Matrix::zeros(2 * n, 2 * n);
    ham.set_block(0, 0, a);
    ham.set_block(0, n, &-&brb);
    ham.set_block(n, 0, &-&q);
    ham.set_block(n, n, &-&a.transpose());

    let spectrum = general_eig(&ham)?;
    let scale = T::one() + ham.fro_norm();
    let min_dist = spectrum.min_abs_real();
    if min_dist < T::of(1e-8) * scale {
        return Err(Error::RiccatiIllPosed {
            distance: min_dist.to_f64().unwrap_or(0.0),
        });
    }
    let basis = stable_subspace(&ham, &spectrum.eigenvalues, scale)?;
    if basis.cols() != n {
        return Err(Error::SdpNumericalFailure(format!(
            "stable Hamiltonian subspace has dimension {} instead of {n}",
            basis.cols()
        )));
    }
    let x1 = basis.block(0, 0, n, n);
    let x2 = basis.block(n, 0, n, n);
    // P = X2 X1^{-1}: solve X1' Y = X2' and transpose
    let y = x1
        .transpose()
        .solve(&x2.transpose())
        .map_err(|_| Error::Singular {
            context: "Hamiltonian subspace X1",
        })?;
    let mut p = y.transpose().symmetrize();

    // Newton-Kleinman polish
    let rel = |p: &Matrix<T>| T::of(1e-10) * (T::one() + p.fro_norm() * a.fro_norm());
    let mut residual = care_residual(a, b, &q, &r, &p)?;
    let mut iterations = 0usize;
    while residual > rel(&p) && iterations < 30 {
        iterations += 1;
        let k = lqr_gain(&p, b, &r)?;
        let acl = &a.clone() + &b.matmul(&k);
        let ktr_k = k.transpose().matmul(&r).matmul(&k);
        let rhs = &q + &ktr_k;
        let next = solve_lyapunov(&acl, &rhs).map_err(|_| Error::RiccatiDivergence {
            residual: residual.to_f64().unwrap_or(f64::INFINITY),
            iterations,
        })?;
        let step = (&next - &p).fro_norm();
        p = next.symmetrize();
        residual = care_residual(a, b, &q, &r, &p)?;
        if step <= T::epsilon() * (T::one() + p.fro_norm()) {
            break;
        }
    }
    let hard = T::of(1e-8) * (T::one() + p.fro_norm() * a.fro_norm());
    if residual > hard {
        return Err(Error::RiccatiDivergence {
            residual: residual.to_f64().unwrap_or(f64::INFINITY),
            iterations,
        });
    }
    let k = lqr_gain(&p, b, &r)?;
    let acl = &a.clone() + &b.matmul(&k);
    let abscissa = general_eig(&acl)?.max_real();
    if abscissa >= T::zero() {
        return Err(Error::RiccatiDivergence {
            residual: residual.to_f64().unwrap_or(f64::INFINITY),
            iterations,
        });
    }
    let pmin = min_eig_sym(&p)?;
    if pmin <= T::zero() {
        return Err(Error::NotPositiveSemidefinite {
            min_eig: pmin.to_f64().unwrap_or(f64::NEG_INFINITY),
        });
    }
    Ok(RiccatiSolution {
        p,
        k,
        residual_norm: residual,
        refinement_iterations: iterations,
    })
}

/// Real basis of the stable invariant subspace of `m`, one inverse-iteration
/// eigenvector per stable eigenvalue (conjugate pairs contribute their real
/// and imaginary parts).
fn stable_subspace<T: Scalar>(
    m: &Matrix<T>,
    eigenvalues: &[Complex<T>],
    scale: T,
) -> Result<Matrix<T>> {
    let n2 = m.rows();
    let mut columns: Vec<Vec<T>> = Vec::new();
    for (which, lam) in eigenvalues.iter().enumerate() {
        if lam.re >= T::zero() || lam.im < T::zero() {
            continue; // keep stable ones; conjugate pairs via their im>0 member
        }
        let v = inverse_iteration(m, *lam, scale, which)?;
        if lam.im > T::zero() {
            columns.push(v.iter().map(|z| z.re).collect());
            columns.push(v.iter().map(|z| z.im).collect());
        } else {
            columns.push(v.iter().map(|z| z.re).collect());
        }
    }
    let mut out = Matrix::zeros(n2, columns.len());
    for (j, col) in columns.iter().enumerate() {
        for i in 0..n2 {
            out[(i, j)] = col[i];
        }
    }
    Ok(out)
}

fn inverse_iteration<T: Scalar>(
    m: &Matrix<T>,
    lam: Complex<T>,
    scale: T,
    which: usize,
) -> Result<Vec<Complex<T>>> {
    let n = m.rows();
    let mut shift = lam;
    let mut jitter = T::of(1e-12) * scale;
    for _attempt in 0..4 {
        let mc: Vec<Complex<T>> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let mut z = Complex::new(m[(i, j)], T::zero());
                if i == j {
                    z = z - shift;
                }
                z
            })
            .collect();
        // deterministic start vector, varied per eigenvalue
        let mut v: Vec<Complex<T>> = (0..n)
            .map(|i| {
                Complex::new(
                    T::one() + T::of(0.37) * T::of(((i + which) % 7) as f64),
                    T::of(0.11) * T::of(((i * 3 + which) % 5) as f64),
                )
            })
            .collect();
        let mut ok = true;
        for _it in 0..4 {
            match complex_solve(n, &mc, &v) {
                Ok(next) => {
                    let norm: T = next
                        .iter()
                        .map(|z| z.norm_sqr())
                        .fold(T::zero(), |a, b| a + b)
                        .sqrt();
                    if norm == T::zero() || !norm.is_finite() {
                        ok = false;
                        break;
                    }
                    v = next.iter().map(|z| z / norm).collect();
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(v);
        }
        shift = shift + Complex::new(jitter, jitter);
        jitter = jitter * T::of(100.0);
    }
    Err(Error::Singular {
        context: "Hamiltonian inverse iteration",
    })
}

/// Solve the LQR Riccati equation through its SDP form: maximize trace(P)
/// subject to [[A'P + PA + Q, PB], [B'P, R]] >= 0. Cross-checks the direct
/// CARE path; the two must agree to 1e-5 relative.
pub fn lqr_sdp<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
) -> Result<Matrix<T>> {
    let n = a.rows();
    let m = b.cols();
    if !a.is_square() || b.rows() != n || q.rows() != n || r.rows() != m {
        return Err(Error::DimensionMismatch {
            context: "lqr_sdp",
            expected: format!("A {n}x{n}, B {n}x{m}, Q {n}x{n}, R {m}x{m}"),
            got: format!(
                "A {}x{}, B {}x{}, Q {}x{}, R {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols(),
                q.rows(),
                q.cols(),
                r.rows(),
                r.cols()
            ),
        });
    }
    // variables: upper triangle of P, packed row-major (i <= j)
    let vars = sym_var_indices(n);
    let mut expr = crate::lmi::LinearMatrixExpr::new(vars.len());
    let mut g0 = Matrix::zeros(n + m, n + m);
    g0.set_block(0, 0, &q.symmetrize());
    g0.set_block(n, n, &r.symmetrize());
    let mut coeffs = Vec::with_capacity(vars.len());
    for &(i, j) in &vars {
        let s = sym_basis(n, i, j);
        let mut g = Matrix::zeros(n + m, n + m);
        let top = &a.transpose().matmul(&s) + &s.matmul(a);
        g.set_block(0, 0, &top.symmetrize());
        let sb = s.matmul(b);
        g.set_block(0, n, &sb);
        g.set_block(n, 0, &sb.transpose());
        coeffs.push(g);
    }
    expr.add_block(g0, coeffs)?;
    let objective: Vec<T> = vars
        .iter()
        .map(|&(i, j)| if i == j { T::one() } else { T::zero() })
        .collect();
    let sol = crate::lmi::solve_sdp(&expr, &objective, true, None)?;
    match sol.status {
        crate::lmi::SdpStatus::Optimal | crate::lmi::SdpStatus::MaxIterations => {}
        crate::lmi::SdpStatus::Infeasible => {
            return Err(Error::SdpInfeasible {
                margin: sol.min_constraint_eig.to_f64().unwrap_or(f64::NEG_INFINITY),
            })
        }
        crate::lmi::SdpStatus::NumericalFailure => {
            return Err(Error::SdpNumericalFailure("lqr_sdp solve failed".into()))
        }
    }
    Ok(unpack_sym(n, &vars, &sol.x))
}

/// Upper-triangle index list for a packed symmetric variable of order n.
pub(crate) fn sym_var_indices(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push((i, j));
        }
    }
    out
}

/// Symmetric basis matrix for entry (i, j): E_ii on the diagonal, the
/// pre-doubled E_ij + E_ji off it.
pub(crate) fn sym_basis<T: Scalar>(n: usize, i: usize, j: usize) -> Matrix<T> {
    let mut s = Matrix::zeros(n, n);
    s[(i, j)] = T::one();
    s[(j, i)] = T::one();
    s
}

pub(crate) fn unpack_sym<T: Scalar>(n: usize, vars: &[(usize, usize)], x: &[T]) -> Matrix<T> {
    let mut p = Matrix::zeros(n, n);
    for (&(i, j), &v) in vars.iter().zip(x) {
        p[(i, j)] = v;
        p[(j, i)] = v;
    }
    p
}

/// K = -R^{-1} B' P.
pub fn lqr_gain<T: Scalar>(p: &Matrix<T>, b: &Matrix<T>, r: &Matrix<T>) -> Result<Matrix<T>> {
    let btp = b.transpose().matmul(p);
    Ok(-&r.solve(&btp)?)
}

/// Optimal LQR cost J = x0' P x0 / 2.
pub fn lqr_cost<T: Scalar>(p: &Matrix<T>, x0: &Matrix<T>) -> T {
    let v = x0.transpose().matmul(p).matmul(x0);
    v[(0, 0)] * T::of(0.5)
}
