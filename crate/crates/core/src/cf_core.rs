//! Regular and nearest-integer continued fractions.
//!
//! Signed digits follow the convention `x = 1/(d_1 + 1/(d_2 + ...))`, so the
//! sign of every partial numerator is absorbed into the digit.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exactnum::{int, rat, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CfError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("empty word")]
    EmptyWord,
    #[error("invalid digit {0}")]
    InvalidDigit(i64),
    #[error("inadmissible word: digit {0} at position {1} followed by {2}")]
    Inadmissible(i64, usize, i64),
    #[error("zero denominator")]
    ZeroDenominator,
}

/// A finite digit string together with its convergents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    digits: Vec<i64>,
    p: Vec<BigInt>,
    q: Vec<BigInt>,
}

impl Word {
    /// Any non-empty string of non-zero digits.
    pub fn new(digits: Vec<i64>) -> Result<Self, CfError> {
        if digits.is_empty() {
            return Err(CfError::EmptyWord);
        }
        if let Some(&d) = digits.iter().find(|&&d| d == 0) {
            return Err(CfError::InvalidDigit(d));
        }
        let (p, q) = recurrences(&digits);
        Ok(Word { digits, p, q })
    }

    /// A word of NICF digits: `|d| >= 2`, 2 followed by a positive digit and
    /// -2 by a negative one.
    pub fn nicf(digits: Vec<i64>) -> Result<Self, CfError> {
        if let Some(&d) = digits.iter().find(|d| d.abs() < 2) {
            return Err(CfError::InvalidDigit(d));
        }
        if let Some(i) = first_inadmissible(&digits) {
            return Err(CfError::Inadmissible(digits[i], i, digits[i + 1]));
        }
        Word::new(digits)
    }

    pub fn digits(&self) -> &[i64] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn last(&self) -> i64 {
        *self.digits.last().unwrap()
    }

    /// `p_n` for `n = 0..=len`.
    pub fn p(&self) -> &[BigInt] {
        &self.p
    }

    /// `q_n` for `n = 0..=len`.
    pub fn q(&self) -> &[BigInt] {
        &self.q
    }

    pub fn p_n(&self) -> &BigInt {
        &self.p[self.len()]
    }

    pub fn q_n(&self) -> &BigInt {
        &self.q[self.len()]
    }

    pub fn q_prev(&self) -> &BigInt {
        &self.q[self.len() - 1]
    }

    pub fn p_prev(&self) -> &BigInt {
        &self.p[self.len() - 1]
    }

    /// Domain of `φ_ω`, determined by the final digit.
    pub fn domain(&self) -> (Rational, Rational) {
        digit_domain(self.last())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut d = self.digits.clone();
        d.extend_from_slice(&other.digits);
        Word::new(d).expect("non-empty")
    }
}

/// Domain of the generator attached to digit `d`.
pub fn digit_domain(d: i64) -> (Rational, Rational) {
    match d {
        2 => (int(0), rat(1, 2)),
        -2 => (rat(-1, 2), int(0)),
        _ => (rat(-1, 2), rat(1, 2)),
    }
}

fn recurrences(digits: &[i64]) -> (Vec<BigInt>, Vec<BigInt>) {
    let n = digits.len();
    let mut p = Vec::with_capacity(n + 1);
    let mut q = Vec::with_capacity(n + 1);
    p.push(BigInt::zero());
    q.push(BigInt::one());
    p.push(BigInt::one());
    q.push(BigInt::from(digits[0]));
    for (i, &d) in digits.iter().enumerate().skip(1) {
        let pn = &p[i] * d + &p[i - 1];
        let qn = &q[i] * d + &q[i - 1];
        p.push(pn);
        q.push(qn);
    }
    (p, q)
}

fn first_inadmissible(digits: &[i64]) -> Option<usize> {
    digits.windows(2).position(|w| (w[0] == 2 && w[1] < 0) || (w[0] == -2 && w[1] > 0))
}

/// True when the digits form an admissible NICF string.
pub fn is_nicf_string(digits: &[i64]) -> bool {
    digits.iter().all(|d| d.abs() >= 2) && first_inadmissible(digits).is_none()
}

/// Nearest-integer digit `floor(1/x + 1/2)`.
fn nearest_digit(x: &Rational) -> i64 {
    let v = (x.recip() + rat(1, 2)).floor().to_integer();
    i64::try_from(v).expect("digit fits in i64")
}

/// First `n` NICF digits of `x ∈ [-1/2, 1/2]`; stops early when an iterate is 0.
pub fn nicf_digits(x: &Rational, n: usize) -> Result<Vec<i64>, CfError> {
    if x < &rat(-1, 2) || x > &rat(1, 2) {
        return Err(CfError::Domain(format!("{x} not in [-1/2, 1/2]")));
    }
    let mut out = Vec::with_capacity(n);
    let mut y = x.clone();
    while out.len() < n && !y.is_zero() {
        let b = nearest_digit(&y);
        y = y.recip() - int(b);
        out.push(b);
    }
    Ok(out)
}

/// First `n` regular continued fraction digits of `x ∈ (0, 1)`.
pub fn rcf_digits(x: &Rational, n: usize) -> Result<Vec<i64>, CfError> {
    if !x.is_positive() || x >= &int(1) {
        return Err(CfError::Domain(format!("{x} not in (0, 1)")));
    }
    let mut out = Vec::with_capacity(n);
    let mut y = x.clone();
    while out.len() < n && !y.is_zero() {
        let inv = y.recip();
        let a = inv.floor();
        y = inv - &a;
        out.push(i64::try_from(a.to_integer()).expect("digit fits in i64"));
    }
    Ok(out)
}

/// Singularize an RCF block and return `(b_0, digits)` with
/// `[0; rcf] = b_0 + 1/(d_1 + 1/(d_2 + ...))`. `b_0` is 1 exactly when the
/// block starts with a run of ones.
pub fn singularize_full(rcf: &[i64]) -> (i64, Vec<i64>) {
    assert!(rcf.iter().all(|&a| a >= 1), "RCF digits must be positive");
    let mut a: Vec<i64> = rcf.to_vec();
    // trailing [.., c, 1] = [.., c + 1]
    if a.len() > 1 && *a.last().unwrap() == 1 {
        a.pop();
        *a.last_mut().unwrap() += 1;
    }
    if a.is_empty() {
        return (0, vec![]);
    }
    if a == [1] {
        return (1, vec![]);
    }
    // b[0] is the integer part; eps[i] the sign of the numerator before b[i]
    let mut b = vec![0i64];
    b.extend_from_slice(&a);
    let mut eps = vec![1i64; b.len()];
    let mut keep = vec![true; b.len()];
    let mut i = 1;
    while i < b.len() {
        if a[i - 1] != 1 {
            i += 1;
            continue;
        }
        let start = i;
        while i < b.len() && a[i - 1] == 1 {
            i += 1;
        }
        // run occupies start..i; singularize start, start+2, ...
        let mut k = start;
        while k < i {
            b[k - 1] += 1;
            keep[k] = false;
            b[k + 1] += 1;
            eps[k + 1] = -1;
            k += 2;
        }
    }
    let b0 = b[0];
    let mut sign = 1i64;
    let mut digits = Vec::new();
    for k in 1..b.len() {
        if keep[k] {
            sign *= eps[k];
            digits.push(sign * b[k]);
        }
    }
    (b0, digits)
}

/// Singularized digits (see [`singularize_full`] for the integer part).
pub fn singularize(rcf: &[i64]) -> Vec<i64> {
    singularize_full(rcf).1
}

/// Convergent pairs `(p_n, q_n)` for `n = 0..=|w|`.
pub fn convergents(w: &Word) -> Vec<(BigInt, BigInt)> {
    w.p.iter().cloned().zip(w.q.iter().cloned()).collect()
}

/// `φ_ω(ξ) = (p_n + ξ p_{n-1}) / (q_n + ξ q_{n-1})`.
pub fn evaluate(w: &Word, xi: &Rational) -> Result<Rational, CfError> {
    let xn = xi.numer();
    let xd = xi.denom();
    let num = w.p_n() * xd + xn * w.p_prev();
    let den = w.q_n() * xd + xn * w.q_prev();
    if den.is_zero() {
        return Err(CfError::ZeroDenominator);
    }
    Ok(Rational::new(num, den))
}

/// Nested evaluation `1/(d_1 + 1/(... + 1/(d_n + ξ)))`, independent of the
/// convergent recurrences.
pub fn evaluate_nested(digits: &[i64], xi: &Rational) -> Result<Rational, CfError> {
    let mut y = xi.clone();
    for &d in digits.iter().rev() {
        let den = int(d) + y;
        if den.is_zero() {
            return Err(CfError::ZeroDenominator);
        }
        y = den.recip();
    }
    Ok(y)
}

/// `gcd(p_n, q_n)`; 1 for every convergent.
pub fn convergent_gcd(w: &Word, n: usize) -> BigInt {
    w.p[n].gcd(&w.q[n])
}
