use crate::error::{invalid, Result};
use crate::numeric::C64;
use std::f64::consts::FRAC_1_SQRT_2;

/// Gray-mapped QPSK: the first bit of each pair sets the sign of the real
/// part, the second the sign of the imaginary part (0 is positive), so
/// `00 -> (1 + j) / sqrt 2`.
pub fn qpsk_map(bits: &[u8]) -> Result<Vec<C64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(invalid("QPSK needs an even number of bits"));
    }
    bits.chunks_exact(2)
        .map(|pair| {
            if pair.iter().any(|b| *b > 1) {
                return Err(invalid("bits must be 0 or 1"));
            }
            Ok(qpsk_symbol(pair[0], pair[1]))
        })
        .collect()
}

pub(crate) fn qpsk_symbol(b0: u8, b1: u8) -> C64 {
    let sign = |b: u8| if b == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    C64::new(sign(b0), sign(b1))
}

/// Nearest-neighbour demapping back to bits.
pub fn qpsk_demap(symbols: &[C64]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|z| [u8::from(z.re < 0.0), u8::from(z.im < 0.0)])
        .collect()
}

/// Nearest constellation point.
pub fn qpsk_decide(z: C64) -> C64 {
    qpsk_symbol(u8::from(z.re < 0.0), u8::from(z.im < 0.0))
}
