//! Randomized property tests over the linear-algebra and LMI layers.

use proptest::prelude::*;
use sofkit_core::eig::{pseudo_inverse, sym_eig};
use sofkit_core::lmi::LinearMatrixExpr;
use sofkit_core::matrix::Matrix;

type M = Matrix<f64>;

fn small_vals(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-5.0f64..5.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pseudo_inverse_satisfies_penrose(vals in small_vals(12)) {
        let a = M::from_fn(4, 3, |i, j| vals[i * 3 + j]);
        let pinv = pseudo_inverse(&a).unwrap();
        let scale = 1.0 + a.fro_norm() * pinv.fro_norm();
        // A A+ A = A and A+ A A+ = A+
        let r1 = (&a.matmul(&pinv).matmul(&a) - &a).fro_norm();
        let r2 = (&pinv.matmul(&a).matmul(&pinv) - &pinv).fro_norm();
        prop_assert!(r1 < 1e-8 * scale, "r1 = {r1}");
        prop_assert!(r2 < 1e-8 * scale * pinv.fro_norm().max(1.0), "r2 = {r2}");
        // both products symmetric
        let p1 = a.matmul(&pinv);
        let p2 = pinv.matmul(&a);
        prop_assert!((&p1 - &p1.transpose()).fro_norm() < 1e-8 * scale);
        prop_assert!((&p2 - &p2.transpose()).fro_norm() < 1e-8 * scale);
    }

    #[test]
    fn sym_eig_reconstructs(vals in small_vals(9)) {
        let raw = M::from_fn(3, 3, |i, j| vals[i * 3 + j]);
        let s = (&raw + &raw.transpose()).scale(0.5);
        let (eigs, v) = sym_eig(&s).unwrap();
        // V diag(eigs) V' = S
        let lam = M::diag(&eigs);
        let rec = v.matmul(&lam).matmul(&v.transpose());
        prop_assert!((&rec - &s).fro_norm() < 1e-9 * (1.0 + s.fro_norm()));
        // eigenvalues ascending
        for w in eigs.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-12);
        }
        // V orthonormal
        let vtv = v.transpose().matmul(&v);
        prop_assert!((&vtv - &M::identity(3)).fro_norm() < 1e-9);
    }

    #[test]
    fn lmi_eval_is_affine(g0v in small_vals(9), c1v in small_vals(9), c2v in small_vals(9),
                          x in small_vals(2), y in small_vals(2), t in 0.0f64..1.0) {
        let symmetrized = |v: &[f64]| {
            let raw = M::from_fn(3, 3, |i, j| v[i * 3 + j]);
            (&raw + &raw.transpose()).scale(0.5)
        };
        let mut expr = LinearMatrixExpr::new(2);
        expr.add_block(symmetrized(&g0v), vec![symmetrized(&c1v), symmetrized(&c2v)]).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let gx = &expr.eval(&x).unwrap()[0];
        let gy = &expr.eval(&y).unwrap()[0];
        let gmix = &expr.eval(&mix).unwrap()[0];
        let expect = &gx.scale(t) + &gy.scale(1.0 - t);
        prop_assert!((&expect - gmix).fro_norm() < 1e-10 * (1.0 + expect.fro_norm()));
    }
}
