//! Scalar helpers shared by every module.

use std::f64::consts::PI;

pub type C64 = num_complex::Complex64;

/// `sin(pi x)` with exact zeros at the integers.
///
/// The argument is reduced to `[-0.5, 0.5]` before calling `sin`, which keeps
/// full relative accuracy for large `x`.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round(); // r in [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    let folded = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    (PI * folded).sin()
}

/// Normalised sinc, `sin(pi x) / (pi x)`.
///
/// Returns exactly `1` at zero and exactly `0` at every other integer, so
/// integer delays produce Kronecker deltas.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        sin_pi(x) / (PI * x)
    }
}

/// True when `x` is within `tol` of an integer.
pub fn is_integer(x: f64, tol: f64) -> bool {
    (x - x.round()).abs() <= tol
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `sum_{l > n} 1 / l^2`, the tail of the Basel series.
pub fn basel_tail(n: usize) -> f64 {
    // Asymptotic expansion of the trigamma function at n + 1, applied from
    // n = 32 on so the truncation error stays below 1e-15.
    const SWITCH: usize = 32;
    if n < SWITCH {
        let head: f64 = (n + 1..=SWITCH).map(|l| 1.0 / (l as f64 * l as f64)).sum();
        return head + basel_tail(SWITCH);
    }
    let x = n as f64 + 1.0;
    let x2 = x * x;
    1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x)
        + 1.0 / (42.0 * x2 * x2 * x2 * x)
}

/// Formats `x` like C's `%.{digits}g`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_is_exact_at_integers() {
        assert_eq!(sinc(0.0), 1.0);
        for k in [-7.0, -1.0, 1.0, 3.0, 1e6] {
            assert_eq!(sinc(k), 0.0);
        }
        assert!((sinc(0.5) - 2.0 / PI).abs() < 1e-15);
        assert!((sinc(-1.5) + 2.0 / (3.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn sin_pi_matches_std_for_moderate_arguments() {
        for i in -200..200 {
            let x = i as f64 * 0.037 + 0.0011;
            assert!((sin_pi(x) - (PI * x).sin()).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn basel_tail_matches_direct_sum() {
        for n in [0usize, 3, 8, 20, 300] {
            let direct: f64 = (n + 1..2_000_000).map(|l| 1.0 / (l as f64).powi(2)).sum::<f64>()
                + 1.0 / 2_000_000.0;
            assert!((basel_tail(n) - direct).abs() < 1e-11, "n = {n}");
        }
    }

    #[test]
    fn fmt_sig_follows_percent_g() {
        assert_eq!(fmt_sig(0.95, 12), "0.95");
        assert_eq!(fmt_sig(28.700000000001, 12), "28.7");
        assert_eq!(fmt_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(fmt_sig(1.5e-7, 12), "1.5e-07");
        assert_eq!(fmt_sig(123456789012345.0, 12), "1.23456789012e+14");
        assert_eq!(fmt_sig(-2.0, 12), "-2");
        assert_eq!(fmt_sig(0.0, 12), "0");
    }
}
