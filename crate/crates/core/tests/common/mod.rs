//! Independent reference simulation in the full 2^N Hilbert space.
#![allow(dead_code)]

use num_complex::Complex64;
use pspin_qaoa::QaoaParams;

/// Number of down spins (set bits) in a computational basis state.
fn downs(bits: usize) -> u32 {
    bits.count_ones()
}

/// `|+>^N` evolved by the circuit, built qubit by qubit.
pub fn full_state(n: u32, p: u32, params: &QaoaParams) -> Vec<Complex64> {
    let dim = 1usize << n;
    let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    let mut psi = vec![amp; dim];
    for (&gamma, &beta) in params.gammas().iter().zip(params.betas()) {
        // exp(-i gamma H_z), H_z = -(Sum sigma^z)^p
        for (bits, a) in psi.iter_mut().enumerate() {
            let m = n as i32 - 2 * downs(bits) as i32;
            let phase = gamma * (m as f64).powi(p as i32);
            *a *= Complex64::from_polar(1.0, phase);
        }
        // exp(-i beta H_x) = prod_j (cos beta + i sin beta sigma^x_j)
        let (c, s) = (beta.cos(), beta.sin());
        for q in 0..n {
            let mask = 1usize << q;
            for bits in 0..dim {
                if bits & mask == 0 {
                    let (a0, a1) = (psi[bits], psi[bits | mask]);
                    psi[bits] = a0 * c + Complex64::i() * s * a1;
                    psi[bits | mask] = a1 * c + Complex64::i() * s * a0;
                }
            }
        }
    }
    psi
}

/// Embeds a Dicke-basis state (`k` = number of down spins) into the full space.
pub fn embed(n: u32, sector: &[Complex64]) -> Vec<Complex64> {
    let dim = 1usize << n;
    let mut binom = vec![1.0f64; n as usize + 1];
    for k in 1..=n as usize {
        binom[k] = binom[k - 1] * (n as usize - k + 1) as f64 / k as f64;
    }
    (0..dim)
        .map(|bits| {
            let k = downs(bits) as usize;
            sector[k] / binom[k].sqrt()
        })
        .collect()
}

/// Energy of the target Hamiltonian in the full space.
pub fn full_energy(n: u32, p: u32, h: f64, psi: &[Complex64]) -> f64 {
    let nf = n as f64;
    let mut e = 0.0;
    for (bits, a) in psi.iter().enumerate() {
        let m = n as i32 - 2 * downs(bits) as i32;
        e += -a.norm_sqr() * (m as f64).powi(p as i32) / nf.powi(p as i32 - 1);
        for q in 0..n {
            e += -h * (a.conj() * psi[bits ^ (1 << q)]).re;
        }
    }
    e
}

pub fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}
