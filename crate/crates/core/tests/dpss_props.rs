use nalgebra::DMatrix;
use prolink::dpss::{compute_dpss, dpss_limit_half, DpssParams};
use proptest::prelude::*;
use std::f64::consts::PI;

fn dense_kernel(n: usize, w: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * w
        } else {
            let d = i as f64 - j as f64;
            (2.0 * PI * w * d).sin() / (PI * d)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orthonormal_eigenvectors_of_the_sinc_kernel(n in 2usize..=64, w in 0.01f64..=0.45, frac in 0.1f64..=1.0) {
        let k = ((n as f64 * frac).ceil() as usize).clamp(1, n);
        let set = compute_dpss(&DpssParams::new(n, w, k).unwrap()).unwrap();
        let s = set.sequences();
        prop_assert_eq!(s.shape(), (n, k));
        let ortho = (s.transpose() * s - DMatrix::<f64>::identity(k, k)).amax();
        prop_assert!(ortho <= 1e-10, "orthonormality {ortho:e}");
        let ks = dense_kernel(n, w) * s;
        for l in 0..k {
            let r = (ks.column(l) - s.column(l) * set.eigenvalues()[l]).norm();
            prop_assert!(r <= 1e-8, "order {l}: residual {r:e}");
        }
        let lam = set.eigenvalues();
        prop_assert!(lam.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(lam.windows(2).all(|p| p[0] >= p[1] - 1e-12));
    }

    #[test]
    fn sequences_alternate_even_and_odd(n in 2usize..=48, w in 0.01f64..=0.5) {
        let set = compute_dpss(&DpssParams::new(n, w, n).unwrap()).unwrap();
        let s = set.sequences();
        for l in 0..n {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..n {
                let d = s[(i, l)] - sign * s[(n - 1 - i, l)];
                prop_assert!(d.abs() <= 1e-10, "order {l} sample {i}: {d:e}");
            }
        }
    }

    #[test]
    fn bit_identical_reruns(n in 2usize..=40, w in 0.01f64..=0.5) {
        let p = DpssParams::new(n, w, n).unwrap();
        let a = compute_dpss(&p).unwrap();
        let b = compute_dpss(&p).unwrap();
        prop_assert_eq!(a.sequences(), b.sequences());
        prop_assert_eq!(a.eigenvalues(), b.eigenvalues());
    }
}

#[test]
fn precoder_set_is_a_complete_orthonormal_basis() {
    let set = dpss_limit_half(128, 128).unwrap();
    let s = set.sequences();
    assert!((s.transpose() * s - DMatrix::<f64>::identity(128, 128)).amax() <= 1e-10);
    assert!(set.eigenvalues().iter().all(|l| *l == 1.0));
}

#[test]
fn rejects_out_of_range_parameters() {
    assert!(DpssParams::new(0, 0.25, 1).is_err());
    assert!(DpssParams::new(9, 0.0, 1).is_err());
    assert!(DpssParams::new(9, 0.6, 1).is_err());
    assert!(DpssParams::new(9, 0.25, 10).is_err());
}
