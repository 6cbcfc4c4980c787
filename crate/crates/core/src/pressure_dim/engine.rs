//! Word tables and floating-point partition sums with explicit error bounds.
//!
//! Convergent denominators are integers and are computed exactly; only the
//! final `ln` and the `exp`/sum over words use `f64`. Every float result is
//! returned together with a rational bound on its absolute error, derived
//! under the assumption that `ln`/`exp` are accurate to one ulp.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;

use crate::exactnum::{from_f64, int, pow2, Rational};

const CHUNK: usize = 1 << 14;

/// `ln sup|φ'_ω|` and `ln inf|φ'_ω|` over `[-1/2, 1/2]` for every word of a
/// fixed length, in lexicographic order.
#[derive(Debug)]
pub struct LogTable {
    pub ln_sup: Vec<f64>,
    pub ln_inf: Vec<f64>,
    /// Bound on `|ln|` over both columns.
    pub max_abs: f64,
}

impl LogTable {
    pub fn len(&self) -> usize {
        self.ln_sup.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_sup.is_empty()
    }

    /// Per-entry absolute error of the stored logarithms.
    pub fn entry_error(&self) -> f64 {
        (self.max_abs + 4.0) * 2f64.powi(-50)
    }
}

trait QVal: Sized + Clone + Send + Sync {
    fn one() -> Self;
    fn zero() -> Self;
    fn step(&self, d: i64, prev: &Self) -> Option<Self>;
    /// `(ln min, ln max)` of `|2q ± q'|`.
    fn ends(&self, prev: &Self) -> (f64, f64);
}

impl QVal for i128 {
    fn one() -> Self {
        1
    }
    fn zero() -> Self {
        0
    }
    fn step(&self, d: i64, prev: &Self) -> Option<Self> {
        self.checked_mul(d as i128)?.checked_add(*prev)
    }
    fn ends(&self, prev: &Self) -> (f64, f64) {
        let a = (2 * self + prev).unsigned_abs();
        let b = (2 * self - prev).unsigned_abs();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        ((lo as f64).ln(), (hi as f64).ln())
    }
}

impl QVal for BigInt {
    fn one() -> Self {
        BigInt::from(1)
    }
    fn zero() -> Self {
        BigInt::from(0)
    }
    fn step(&self, d: i64, prev: &Self) -> Option<Self> {
        Some(self * d + prev)
    }
    fn ends(&self, prev: &Self) -> (f64, f64) {
        let two: BigInt = self * 2;
        let a = (&two + prev).abs();
        let b = (&two - prev).abs();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        (big_ln(&lo), big_ln(&hi))
    }
}

fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 60;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn walk<Q: QVal>(
    letters: &[Vec<i64>],
    depth: usize,
    q: &Q,
    qp: &Q,
    sup: &mut Vec<f64>,
    inf: &mut Vec<f64>,
) -> Option<()> {
    if depth == 0 {
        let (lmin, lmax) = q.ends(qp);
        let c = 2.0 * std::f64::consts::LN_2;
        sup.push(c - 2.0 * lmin);
        inf.push(c - 2.0 * lmax);
        return Some(());
    }
    for l in letters {
        let (mut a, mut b) = (q.clone(), qp.clone());
        for &d in l {
            let n = a.step(d, &b)?;
            b = a;
            a = n;
        }
        walk(letters, depth - 1, &a, &b, sup, inf)?;
    }
    Some(())
}

fn build<Q: QVal>(letters: &[Vec<i64>], depth: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    assert!(depth >= 1);
    let parts: Vec<Option<(Vec<f64>, Vec<f64>)>> = letters
        .par_iter()
        .map(|first| {
            let (mut a, mut b) = (Q::one(), Q::zero());
            for &d in first {
                let n = a.step(d, &b)?;
                b = a;
                a = n;
            }
            let mut sup = Vec::new();
            let mut inf = Vec::new();
            walk(letters, depth - 1, &a, &b, &mut sup, &mut inf)?;
            Some((sup, inf))
        })
        .collect();
    let mut sup = Vec::new();
    let mut inf = Vec::new();
    for p in parts {
        let (s, i) = p?;
        sup.extend(s);
        inf.extend(i);
    }
    Some((sup, inf))
}

/// Log-norm table of all words of length `depth` over the given letters
/// (each letter a digit string; the full shift on letters).
pub fn build_table(letters: &[Vec<i64>], depth: usize) -> LogTable {
    let (ln_sup, ln_inf) = build::<i128>(letters, depth)
        .or_else(|| build::<BigInt>(letters, depth))
        .expect("big integer path cannot overflow");
    let max_abs = ln_sup
        .iter()
        .chain(ln_inf.iter())
        .fold(0f64, |m, x| m.max(x.abs()));
    LogTable { ln_sup, ln_inf, max_abs }
}

/// `ln Σ exp(t·x_i)` as `value ± err`, both exact rationals.
#[derive(Debug, Clone)]
pub struct LogSum {
    pub value: Rational,
    pub err: Rational,
}

impl LogSum {
    pub fn lo(&self) -> Rational {
        &self.value - &self.err
    }
    pub fn hi(&self) -> Rational {
        &self.value + &self.err
    }
}

/// Evaluate `ln Σ_i exp(t·col_i)` with a rigorous error bound. `entry_err`
/// bounds the error of each stored `col_i`.
pub fn log_sum(col: &[f64], t: &Rational, entry_err: f64, max_abs: f64) -> LogSum {
    let n = col.len();
    assert!(n > 0);
    let tf = t.to_f64().unwrap();
    let m = col
        .par_chunks(CHUNK)
        .map(|c| c.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(tf * x)))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let partial: Vec<f64> = col
        .par_chunks(CHUNK)
        .map(|c| {
            c.iter()
                .map(|&x| {
                    let e = tf * x - m;
                    if e < -700.0 {
                        0.0
                    } else {
                        e.exp()
                    }
                })
                .sum::<f64>()
        })
        .collect();
    let s: f64 = partial.iter().sum();
    let ln_s = s.ln();
    let value = from_f64(m) + from_f64(ln_s);
    // error terms, each an upper bound in absolute value
    let ta = tf.abs();
    let eps = 2f64.powi(-52);
    let e_exponent = ta * entry_err + 3.0 * ta * max_abs * eps;
    let e_exp = 2.0 * eps;
    let e_sum = (n as f64 + 2.0) * eps;
    let e_ln = (ln_s.abs() + 1.0) * eps;
    let total = 2.0 * (e_exponent + e_exp + e_sum + e_ln) + 1e-300;
    let err = from_f64(total) + pow2(-900) * int(n as i64);
    LogSum { value, err }
}

fn exact_walk(letters: &[Vec<i64>], depth: usize, q: &BigInt, qp: &BigInt, out: &mut Vec<(Rational, Rational)>) {
    if depth == 0 {
        let two: BigInt = q * 2;
        let a = (&two + qp).abs();
        let b = (&two - qp).abs();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let four = BigInt::from(4);
        out.push((
            Rational::new(four.clone(), &hi * &hi),
            Rational::new(four, &lo * &lo),
        ));
        return;
    }
    for l in letters {
        let (mut a, mut b) = (q.clone(), qp.clone());
        for &d in l {
            let n = &a * d + &b;
            b = a;
            a = n;
        }
        exact_walk(letters, depth - 1, &a, &b, out);
    }
}

/// Exact `(inf, sup)` of `|φ'_ω|` over `[-1/2, 1/2]` for all words of length
/// `depth`, in lexicographic order.
pub fn exact_norms(letters: &[Vec<i64>], depth: usize) -> Vec<(Rational, Rational)> {
    let mut out = Vec::new();
    exact_walk(letters, depth, &BigInt::from(1), &BigInt::from(0), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf_core::Word;
    use crate::nicf_system::norm_bounds;

    #[test]
    fn table_matches_exact_norms() {
        let letters = vec![vec![-3], vec![3], vec![2, 5], vec![-7]];
        let t = build_table(&letters, 3);
        assert_eq!(t.len(), 64);
        let mut i = 0;
        for a in &letters {
            for b in &letters {
                for c in &letters {
                    let mut d = a.clone();
                    d.extend(b);
                    d.extend(c);
                    let (lo, hi) = norm_bounds(&Word::new(d).unwrap());
                    let lo = lo.to_f64().unwrap().ln();
                    let hi = hi.to_f64().unwrap().ln();
                    assert!((t.ln_sup[i] - hi).abs() < 1e-12);
                    assert!((t.ln_inf[i] - lo).abs() < 1e-12);
                    i += 1;
                }
            }
        }
    }

    #[test]
    fn big_integer_fallback_agrees() {
        let letters = vec![vec![-1000], vec![999]];
        let t = build_table(&letters, 14);
        let (s, _) = build::<BigInt>(&letters, 14).unwrap();
        assert!(build::<i128>(&letters, 14).is_none());
        assert_eq!(t.ln_sup, s);
    }

    #[test]
    fn log_sum_encloses_exact_value() {
        let col: Vec<f64> = (1..=1000).map(|i| -(i as f64).ln()).collect();
        let r = log_sum(&col, &crate::exactnum::int(2), 0.0, 7.0);
        // Σ 1/i² for i ≤ 1000
        let exact: f64 = (1..=1000).map(|i| 1.0 / (i as f64).powi(2)).sum::<f64>().ln();
        let e = from_f64(exact);
        assert!(r.lo() - from_f64(1e-13) <= e && e <= r.hi() + from_f64(1e-13));
        assert!(r.err < from_f64(1e-9));
    }
}
