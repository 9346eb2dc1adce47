//! Phase angles `gamma * M^p (mod 2 pi)` without forming `M^p` in floating point.
//!
//! Writing `gamma = 2 pi t` with the double `t = mant * 2^-s` exact, the turn
//! fraction `frac(t * M^p)` only depends on `M^p mod 2^s`. For `s <= 128` this
//! is carried out exactly in wrapping `u128` arithmetic, so dyadic angles such
//! as `pi/4` or `2 pi / 2^(k+4)` give exact phases for any `M` and `p`.

use std::f64::consts::TAU;

/// `|m|^p` reduced modulo `2^128`, plus the sign of `m^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerResidue {
    magnitude_mod: u128,
    negative: bool,
    approx: f64,
}

impl PowerResidue {
    pub fn new(m: i64, p: u32) -> Self {
        let magnitude_mod = (m.unsigned_abs() as u128).wrapping_pow(p);
        let negative = m < 0 && p % 2 == 1;
        let approx = (m as f64).powi(p as i32);
        Self { magnitude_mod, negative, approx }
    }

    pub fn from_i128(value: i128) -> Self {
        Self { magnitude_mod: value.unsigned_abs(), negative: value < 0, approx: value as f64 }
    }

    /// `m^p` as a double (rounded).
    pub fn approx(&self) -> f64 {
        self.approx
    }

    /// `frac(t * m^p)` as a signed turn in `(-1, 1)`.
    pub fn turns(&self, t: f64) -> f64 {
        if t == 0.0 || self.magnitude_mod == 0 && self.approx == 0.0 {
            return 0.0;
        }
        let (mant, exp, t_negative) = decode(t);
        let frac = if exp >= 0 {
            0.0
        } else if -exp <= 128 {
            let s = (-exp) as u32;
            let mask = if s == 128 { u128::MAX } else { (1u128 << s) - 1 };
            let r = (mant as u128).wrapping_mul(self.magnitude_mod) & mask;
            let f = r as f64 * 2f64.powi(-(s as i32));
            if f >= 1.0 { 0.0 } else { f }
        } else {
            // |t| < 2^-75: a plain product is accurate unless m^p is astronomically large
            (t.abs() * self.approx.abs()).fract()
        };
        if t_negative != self.negative { -frac } else { frac }
    }

    /// `gamma * m^p` reduced into `(-2 pi, 2 pi)`.
    pub fn angle(&self, gamma: f64) -> f64 {
        TAU * self.turns(gamma / TAU)
    }
}

/// `t = (-1)^neg * mant * 2^exp` with `mant` odd (or zero).
fn decode(t: f64) -> (u64, i32, bool) {
    let bits = t.to_bits();
    let negative = bits >> 63 == 1;
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let fraction = bits & 0x000f_ffff_ffff_ffff;
    let (mut mant, mut exp) = if biased == 0 {
        (fraction << 1, -1075)
    } else {
        (fraction | 0x0010_0000_0000_0000, biased - 1075)
    };
    if mant == 0 {
        return (0, 0, negative);
    }
    let tz = mant.trailing_zeros();
    mant >>= tz;
    exp += tz as i32;
    (mant, exp, negative)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive(gamma: f64, m: i64, p: u32) -> f64 {
        (gamma * (m as f64).powi(p as i32)).rem_euclid(TAU)
    }

    fn same_angle(a: f64, b: f64) -> bool {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d) < 1e-9
    }

    #[test]
    fn agrees_with_naive_for_small_powers() {
        for &gamma in &[0.3, -0.71, PI / 4.0, 1.0e-3, 2.9, -PI] {
            for m in -9i64..=9 {
                for p in 2..=5 {
                    let r = PowerResidue::new(m, p);
                    assert!(same_angle(r.angle(gamma), naive(gamma, m, p)), "gamma={gamma} m={m} p={p}");
                }
            }
        }
    }

    #[test]
    fn dyadic_angles_are_exact_for_huge_powers() {
        // 15^64 = 1 (mod 16) and 2 pi / 16 * 15^64 = 2 pi / 16 (mod 2 pi)
        let r = PowerResidue::new(15, 64);
        assert_eq!(r.turns(1.0 / 16.0), 1.0 / 16.0);
        // 3^2 = 9 mod 16
        assert_eq!(PowerResidue::new(3, 2).turns(1.0 / 16.0), 9.0 / 16.0);
        // odd power of a negative magnetization
        assert_eq!(PowerResidue::new(-3, 3).turns(1.0 / 8.0), -3.0 / 8.0);
    }

    #[test]
    fn decode_roundtrip() {
        for &t in &[1.0, 0.375, -2.5e-7, 1.0 / 3.0, 6.5e-30] {
            let (mant, exp, neg) = decode(t);
            let back = mant as f64 * 2f64.powi(exp);
            assert_eq!(if neg { -back } else { back }, t);
        }
    }
}
