//! Helpers shared by the integration tests: seeded generators and
//! floating-point oracles that are independent of the library.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nicf_dim::exactnum::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform `bits`-bit dyadic rational in `[-1/2, 1/2)`.
pub fn random_rational(rng: &mut ChaCha8Rng, bits: u32) -> Rational {
    let mut n = BigInt::from(0);
    for _ in 0..bits / 32 {
        n = (n << 32) + BigInt::from(rng.gen::<u32>());
    }
    Rational::new(n, BigInt::one() << bits) - Rational::new(1.into(), 2.into())
}

/// A digit `|b| >= 3`, small values more likely.
pub fn random_digit(rng: &mut ChaCha8Rng) -> i64 {
    let u: f64 = rng.gen_range(1e-12..1.0);
    let a = (3.0 + (-u.ln() * 4.0).floor()).min(60.0) as i64;
    if rng.gen_bool(0.5) {
        a
    } else {
        -a
    }
}

pub fn random_word(rng: &mut ChaCha8Rng, min_len: usize, max_len: usize) -> Vec<i64> {
    let n = rng.gen_range(min_len..=max_len);
    (0..n).map(|_| random_digit(rng)).collect()
}

/// Leading eigenvalue of the transfer operator
/// `L_t f(x) = Σ_b |b + x|^(-2t) f(1/(b + x))` on `[-1/2, 1/2]`,
/// discretized on `n` equispaced nodes with linear interpolation.
pub fn transfer_eigenvalue(digits: &[i64], t: f64, n: usize) -> f64 {
    let h = 1.0 / (n - 1) as f64;
    let node = |i: usize| -0.5 + i as f64 * h;
    // (weight, left index, interpolation fraction) per node and digit
    let mut stencil = Vec::with_capacity(n * digits.len());
    for i in 0..n {
        for &b in digits {
            let y = b as f64 + node(i);
            let w = y.abs().powf(-2.0 * t);
            let img = 1.0 / y;
            let s = ((img + 0.5) / h).clamp(0.0, (n - 1) as f64);
            let j = (s.floor() as usize).min(n - 2);
            stencil.push((w, j, s - j as f64));
        }
    }
    let k = digits.len();
    let mut f = vec![1.0f64; n];
    let mut lambda = 0.0;
    for _ in 0..400 {
        let g: Vec<f64> = (0..n)
            .map(|i| {
                stencil[i * k..(i + 1) * k]
                    .iter()
                    .map(|&(w, j, a)| w * ((1.0 - a) * f[j] + a * f[j + 1]))
                    .sum()
            })
            .collect();
        let m = g.iter().cloned().fold(0.0, f64::max);
        let prev = lambda;
        lambda = m / f.iter().cloned().fold(0.0, f64::max);
        f = g.iter().map(|v| v / m).collect();
        if (lambda - prev).abs() < 1e-15 * lambda {
            break;
        }
    }
    lambda
}

/// Zero of `t ↦ ln λ(t)` by bisection on `[0, 1]`.
pub fn transfer_dimension(digits: &[i64], n: usize) -> f64 {
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..40 {
        let m = 0.5 * (a + b);
        if transfer_eigenvalue(digits, m, n) > 1.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `h` with `u^3 + u^2 = 1`, `u = r^h`.
pub fn cycle4_root(r: f64) -> f64 {
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let u = 0.5 * (a + b);
        if u * u * u + u * u < 1.0 {
            a = u;
        } else {
            b = u;
        }
    }
    (0.5 * (a + b)).ln() / r.ln()
}
