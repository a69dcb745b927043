//! Exact Bessel values from the ascending series in 400-bit fixed point.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fractional bits of the fixed-point oracle.
const BITS: u32 = 400;

/// `x` as a fixed-point integer `x · 2^BITS`, exact for every finite double above 2^-BITS.
fn to_fixed(x: f64) -> BigInt {
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mantissa, exp2) = if exponent == 0 {
        (fraction, -1074)
    } else {
        (fraction | (1u64 << 52), exponent - 1075)
    };
    let shift = exp2 + BITS as i64;
    assert!(shift >= 0, "{x} below the fixed-point resolution");
    let v = BigInt::from(mantissa) << shift as usize;
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn from_fixed(v: &BigInt) -> f64 {
    v.to_f64().unwrap() * 2f64.powi(-(BITS as i32))
}

/// Ascending series `Σ (-1)^m (k/2)^{2m+n} / (m! (m+n)!)` in 400-bit fixed point.
pub fn bessel_oracle(n: u32, k: f64) -> f64 {
    let one = BigInt::one() << BITS as usize;
    let half = to_fixed(k) >> 1usize;
    let mut term = one.clone();
    for j in 1..=n {
        term = ((term * &half) >> BITS as usize) / j;
    }
    let q = (&half * &half) >> BITS as usize;
    let mut sum = term.clone();
    let mut m: u64 = 0;
    while !term.is_zero() {
        m += 1;
        term = -((term * &q) >> BITS as usize) / (m * (m + n as u64));
        sum += &term;
    }
    assert!(sum.abs() < (&one << 64usize));
    from_fixed(&sum)
}
