use nalgebra::DMatrix;
use prolink::channel::{
    assemble_channel, doppler_matrix, sinc_delay_matrix, AssembleOptions, ChannelRealization, ChannelSpec,
    OperatorForm, PathSpec,
};
use prolink::C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn oracle_sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn paths(integer: bool) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    let delay = if integer { (0u32..=6).prop_map(f64::from).boxed() } else { (0.0f64..6.0).boxed() };
    prop::collection::vec((delay, 0.0f64..6.3, 0.1f64..1.0), 1..5)
}

fn realization(p: &[(f64, f64, f64)], block: usize, blocks: usize) -> ChannelRealization {
    let spec = ChannelSpec::from_paths(
        p.iter().map(|&(d, ph, a)| PathSpec::fixed(d, C64::from_polar(a, ph))).collect(),
    )
    .unwrap();
    ChannelRealization::draw(spec, 0, block, blocks).unwrap()
}

fn dense_opts() -> AssembleOptions {
    AssembleOptions {
        form: OperatorForm::Dense,
        ..AssembleOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dense_and_exact_streaming_agree(p in paths(false), block in 4usize..=12, seed in any::<u64>()) {
        let real = realization(&p, block, 3);
        let len = real.stream_len();
        let dense = assemble_channel(&real, &dense_opts()).unwrap();
        let stream = assemble_channel(&real, &AssembleOptions::exact_streaming()).unwrap();
        let mut state = seed | 1;
        let x: Vec<C64> = (0..len).map(|_| {
            state ^= state << 13; state ^= state >> 7; state ^= state << 17;
            C64::new((state % 1000) as f64 / 500.0 - 1.0, ((state >> 20) % 1000) as f64 / 500.0 - 1.0)
        }).collect();
        let a = dense.apply(&x).unwrap();
        let b = stream.apply(&x).unwrap();
        let err = a.iter().zip(&b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-9, "max deviation {err:e}");
    }

    #[test]
    fn assembly_matches_explicit_factorisation(p in paths(false), nu in -0.01f64..0.01, block in 4usize..=10) {
        // same paths, each with a Doppler shift
        let spec = ChannelSpec::from_paths(
            p.iter().map(|&(d, ph, a)| PathSpec::fixed(d, C64::from_polar(a, ph)).with_doppler(nu)).collect(),
        ).unwrap();
        let real = ChannelRealization::draw(spec, 0, block, 2).unwrap();
        let len = real.stream_len();
        let h = assemble_channel(&real, &dense_opts()).unwrap();
        let h = h.dense().unwrap();
        let mut expect = DMatrix::<C64>::zeros(len, len);
        for &(d, ph, a) in &p {
            expect += doppler_matrix(nu, len, 0) * sinc_delay_matrix(d, len, len, 0) * C64::from_polar(a, ph);
        }
        let err = (h - &expect).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10, "{err:e}");
    }

    #[test]
    fn integer_delays_stay_in_band(p in paths(true), block in 8usize..=16) {
        let real = realization(&p, block, 2);
        let h = assemble_channel(&real, &dense_opts()).unwrap();
        let h = h.dense().unwrap();
        let tmax = p.iter().map(|t| t.0).fold(0.0, f64::max) as i64;
        for r in 0..h.nrows() {
            for c in 0..h.ncols() {
                let d = r as i64 - c as i64;
                if d < 0 || d > tmax {
                    prop_assert_eq!(h[(r, c)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn fractional_rows_expand_into_sinc_taps(tau in 0.0f64..8.0, block in 6usize..=12) {
        let real = realization(&[(tau, 0.0, 1.0)], block, 2);
        let h = assemble_channel(&real, &dense_opts()).unwrap();
        let h = h.dense().unwrap();
        for n in 0..h.nrows() {
            for k in 0..h.ncols() {
                let want = oracle_sinc(n as f64 - k as f64 - tau);
                prop_assert!((h[(n, k)] - C64::new(want, 0.0)).norm() <= 1e-12);
            }
        }
    }
}

#[test]
fn unit_path_preserves_power_in_the_interior() {
    let real = realization(&[(2.4, 0.7, 1.0)], 512, 8);
    let op = assemble_channel(&real, &AssembleOptions::default()).unwrap();
    let len = op.stream_len();
    let mut state = 0x9e3779b97f4a7c15u64;
    let x: Vec<C64> = (0..len)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            C64::from_polar(1.0, (state % 100_000) as f64 * 2.0 * PI / 100_000.0)
        })
        .collect();
    let y = op.apply(&x).unwrap();
    let interior = 256..len - 256;
    let pin: f64 = x[interior.clone()].iter().map(|v| v.norm_sqr()).sum();
    let pout: f64 = y[interior].iter().map(|v| v.norm_sqr()).sum();
    assert!((pout / pin - 1.0).abs() < 0.01, "{}", pout / pin);
}
