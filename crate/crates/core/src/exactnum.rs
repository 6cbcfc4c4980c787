//! Exact rationals and outward-rounded rational intervals.
//!
//! Everything here is pure rational arithmetic: no hardware floats take part
//! in any enclosure. Transcendental quantities (`ln`, `exp`, real powers) are
//! enclosed by truncated series with explicit remainder bounds, and endpoints
//! are periodically rounded outward to a fixed number of significant bits so
//! that numerators and denominators stay bounded.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational, always kept in lowest terms.
pub type Rational = BigRational;

/// Default working precision (significant bits) used across the crate.
pub const DEFAULT_BITS: u32 = 128;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("unsupported surd: sqrt({0}) (only 2, 3 and 5 are provided)")]
    UnsupportedSurd(u32),
    #[error("divergent tail: exponent {0} <= 1")]
    DivergentTail(String),
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("base must be positive")]
    NonPositiveBase,
    #[error("invalid interval: lo > hi")]
    InvalidInterval,
    #[error("invalid tail: need k >= 1 and k + c > 0")]
    InvalidTail,
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^e` for any integer `e`.
pub fn pow2(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Rough binary exponent: `2^(e-1) < |r| < 2^(e+1)`.
fn approx_log2(r: &Rational) -> i64 {
    r.numer().bits() as i64 - r.denom().bits() as i64
}

fn round_sig(r: &Rational, prec: u32, up: bool) -> Rational {
    if r.is_zero() {
        return r.clone();
    }
    let shift = prec as i64 - approx_log2(r);
    let scale = pow2(shift);
    let scaled = r * &scale;
    let m = if up { scaled.ceil() } else { scaled.floor() };
    m / scale
}

/// Largest value on the `prec`-significant-bit grid that is `<= r`.
pub fn round_down(r: &Rational, prec: u32) -> Rational {
    round_sig(r, prec, false)
}

/// Smallest value on the `prec`-significant-bit grid that is `>= r`.
pub fn round_up(r: &Rational, prec: u32) -> Rational {
    round_sig(r, prec, true)
}

/// Largest `f64` not exceeding `r` (or `-inf`).
pub fn f64_down(r: &Rational) -> f64 {
    let mut f = r.to_f64().unwrap_or(if r.is_negative() { f64::NEG_INFINITY } else { f64::MAX });
    if f.is_nan() {
        f = 0.0;
    }
    while f.is_finite() && Rational::from_float(f).map_or(false, |x| &x > r) {
        f = f.next_down();
    }
    f
}

/// Smallest `f64` not below `r` (or `+inf`).
pub fn f64_up(r: &Rational) -> f64 {
    let mut f = r.to_f64().unwrap_or(if r.is_negative() { f64::MIN } else { f64::INFINITY });
    if f.is_nan() {
        f = 0.0;
    }
    while f.is_finite() && Rational::from_float(f).map_or(false, |x| &x < r) {
        f = f.next_up();
    }
    f
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(f: f64) -> Rational {
    Rational::from_float(f).expect("finite float")
}

/// Closed interval `[lo, hi]` with rational endpoints.
///
/// Every arithmetic operation returns an interval containing the exact result
/// for all choices of operands inside the inputs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, ExactError> {
        if lo > hi {
            return Err(ExactError::InvalidInterval);
        }
        Ok(Interval { lo, hi })
    }

    fn ordered(a: Rational, b: Rational) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn from_int(n: i64) -> Self {
        Self::point(int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::point(rat(num, den))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// `self <= other` for every pair of members.
    pub fn certainly_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    /// `self < other` for every pair of members.
    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self
        } else {
            Interval {
                lo: Rational::zero(),
                hi: self.hi.clone().max(-self.lo.clone()),
            }
        }
    }

    pub fn scale(&self, k: &Rational) -> Interval {
        Self::ordered(&self.lo * k, &self.hi * k)
    }

    pub fn shift(&self, k: &Rational) -> Interval {
        Interval {
            lo: &self.lo + k,
            hi: &self.hi + k,
        }
    }

    pub fn square(&self) -> Interval {
        let a = self.abs();
        Interval {
            lo: &a.lo * &a.lo,
            hi: &a.hi * &a.hi,
        }
    }

    pub fn recip(&self) -> Result<Interval, ExactError> {
        if self.contains_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Interval {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    pub fn checked_div(&self, other: &Interval) -> Result<Interval, ExactError> {
        Ok(self * &other.recip()?)
    }

    /// Integer power (negative exponents require `0 ∉ self`).
    pub fn powi(&self, e: i32) -> Result<Interval, ExactError> {
        if e < 0 {
            return self.recip()?.powi(-e);
        }
        if e == 0 {
            return Ok(Interval::one());
        }
        if e % 2 == 0 {
            let a = self.abs();
            Ok(Interval {
                lo: a.lo.pow(e),
                hi: a.hi.pow(e),
            })
        } else {
            Ok(Interval {
                lo: self.lo.pow(e),
                hi: self.hi.pow(e),
            })
        }
    }

    /// Widen to endpoints on the `prec`-significant-bit grid.
    pub fn round_outward(&self, prec: u32) -> Interval {
        Interval {
            lo: round_down(&self.lo, prec),
            hi: round_up(&self.hi, prec),
        }
    }

    /// Outward `f64` bounds.
    pub fn to_f64_bounds(&self) -> (f64, f64) {
        (f64_down(&self.lo), f64_up(&self.hi))
    }

    pub fn mid_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.to_f64_bounds();
        write!(f, "[{lo:.12e}, {hi:.12e}]")
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        &self + &rhs
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        &self - &rhs
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        if !self.lo.is_negative() && !rhs.lo.is_negative() {
            return Interval {
                lo: &self.lo * &rhs.lo,
                hi: &self.hi * &rhs.hi,
            };
        }
        let c = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        &self * &rhs
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        -&self
    }
}

/// Enclosure of `√x` for a non-negative rational by Newton iteration from an
/// integer bracket. Relative width at most `2^(1-bits)` (absolute when `x ≤ 1`).
pub fn sqrt_enclosure(x: &Rational, bits: u32) -> Interval {
    assert!(!x.is_negative(), "sqrt of a negative rational");
    if x.is_zero() {
        return Interval::zero();
    }
    let bits = bits.max(1);
    // exact square
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        return Interval::point(Rational::new(rn, rd));
    }
    let prec = bits + 16;
    let mut upper = Rational::from_integer(x.ceil().to_integer().sqrt() + 1u32);
    let target = pow2(1 - bits as i64);
    loop {
        let lower = round_down(&(x / &upper), prec);
        let tol = &target * upper.clone().max(Rational::one());
        if &upper - &lower <= tol {
            return Interval { lo: lower, hi: upper };
        }
        upper = round_up(&((&upper + x / &upper) / int(2)), prec);
    }
}

/// Enclosure of `√n` for `n ∈ {2, 3, 5}` on the dyadic grid of step `2^-bits`:
/// `[r, r+1] / 2^bits` with `r = isqrt(n·4^bits)` (integer Newton iteration).
/// Width is exactly `2^-bits`.
pub fn surd_enclosure(n: u32, bits: u32) -> Result<Interval, ExactError> {
    if !matches!(n, 2 | 3 | 5) {
        return Err(ExactError::UnsupportedSurd(n));
    }
    let scaled = BigInt::from(n) << (2 * bits as usize);
    let r = scaled.sqrt();
    let den = BigInt::one() << bits as usize;
    Ok(Interval {
        lo: Rational::new(r.clone(), den.clone()),
        hi: Rational::new(r + 1, den),
    })
}

fn floor_fixed(r: &Rational, wp: u32) -> BigInt {
    (r.numer() << wp as usize).div_floor(r.denom())
}

fn ceil_fixed(r: &Rational, wp: u32) -> BigInt {
    -((-r.numer() << wp as usize).div_floor(r.denom()))
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

fn fixed_interval(lo: BigInt, hi: BigInt, wp: u32) -> Interval {
    let den = BigInt::one() << wp as usize;
    Interval {
        lo: Rational::new(lo, den.clone()),
        hi: Rational::new(hi, den),
    }
}

/// `atanh(z) = Σ z^(2i+1)/(2i+1)` for `0 <= z ≤ 1/3`, summed in fixed point
/// with separately rounded lower and upper partial sums.
fn atanh_enclosure(z: &Rational, prec: u32) -> Interval {
    assert!(z.abs() <= rat(1, 3));
    if z.is_zero() {
        return Interval::zero();
    }
    if z.is_negative() {
        return -atanh_enclosure(&-z, prec);
    }
    let wp = prec + 24;
    let shift = wp as usize;
    let (z_lo, z_hi) = (floor_fixed(z, wp), ceil_fixed(z, wp));
    let z2_lo = (&z_lo * &z_lo) >> shift;
    let z2_hi = ceil_div(&(&z_hi * &z_hi), &(BigInt::one() << shift));
    let (mut p_lo, mut p_hi) = (z_lo, z_hi);
    let (mut s_lo, mut s_hi) = (BigInt::zero(), BigInt::zero());
    let mut i: i64 = 0;
    loop {
        let d = BigInt::from(2 * i + 1);
        s_lo += p_lo.div_floor(&d);
        s_hi += ceil_div(&p_hi, &d);
        p_lo = (&p_lo * &z2_lo) >> shift;
        p_hi = ceil_div(&(&p_hi * &z2_hi), &(BigInt::one() << shift));
        // remainder ≤ z^(2i+3)/((2i+3)(1 - z²)) ≤ 9 z^(2i+3)/(8(2i+3))
        let rem = ceil_div(&(&p_hi * 9), &BigInt::from(8 * (2 * i + 3)));
        if rem <= BigInt::one() {
            s_hi += rem;
            return fixed_interval(s_lo, s_hi, wp).round_outward(prec + 4);
        }
        i += 1;
    }
}

fn ln2_enclosure(prec: u32) -> Interval {
    static CACHE: std::sync::OnceLock<Interval> = std::sync::OnceLock::new();
    const CACHED: u32 = 320;
    if prec + 8 <= CACHED {
        return CACHE
            .get_or_init(|| atanh_enclosure(&rat(1, 3), CACHED + 4).scale(&int(2)))
            .round_outward(prec + 8);
    }
    atanh_enclosure(&rat(1, 3), prec + 4).scale(&int(2))
}

/// Enclosure of `ln x` for a positive rational.
pub fn ln_enclosure(x: &Rational, prec: u32) -> Result<Interval, ExactError> {
    if !x.is_positive() {
        return Err(ExactError::NonPositiveBase);
    }
    if x.is_one() {
        return Ok(Interval::zero());
    }
    let mut k = approx_log2(x);
    let mut m = x / pow2(k);
    if m > rat(4, 3) {
        k += 1;
        m /= int(2);
    } else if m < rat(2, 3) {
        k -= 1;
        m *= int(2);
    }
    let wp = prec + 8 + (64 - k.unsigned_abs().leading_zeros());
    let z = (&m - Rational::one()) / (&m + Rational::one());
    let ln_m = atanh_enclosure(&z, wp).scale(&int(2));
    let total = if k == 0 {
        ln_m
    } else {
        &ln_m + &ln2_enclosure(wp).scale(&int(k))
    };
    Ok(total.round_outward(prec + 4))
}

/// Enclosure of `ln` over an interval of positive rationals.
pub fn ln_interval(x: &Interval, prec: u32) -> Result<Interval, ExactError> {
    let lo = ln_enclosure(x.lo(), prec)?;
    let hi = ln_enclosure(x.hi(), prec)?;
    Ok(Interval { lo: lo.lo, hi: hi.hi })
}

/// `exp(y)` for `y >= 0`: Taylor series of `exp(y/2^s)` in fixed point,
/// then `s` squarings.
fn exp_nonneg(y: &Rational, prec: u32) -> Interval {
    let s = (approx_log2(y) + 2).max(0);
    let wp = prec + s as u32 + 24;
    let shift = wp as usize;
    let one = BigInt::one() << shift;
    let r = y / pow2(s);
    let (r_lo, r_hi) = (floor_fixed(&r, wp), ceil_fixed(&r, wp));
    let (mut t_lo, mut t_hi) = (one.clone(), one.clone());
    let (mut s_lo, mut s_hi) = (one.clone(), one.clone());
    let mut i: i64 = 1;
    loop {
        let d = BigInt::from(i) << shift;
        t_lo = (&t_lo * &r_lo).div_floor(&d);
        t_hi = ceil_div(&(&t_hi * &r_hi), &d);
        s_lo += &t_lo;
        s_hi += &t_hi;
        // remainder ≤ 2 r^(i+1)/(i+1)! since r ≤ 1/2
        let rem = ceil_div(&(&t_hi * &r_hi * 2), &(BigInt::from(i + 1) << shift));
        if rem <= BigInt::one() {
            s_hi += rem;
            break;
        }
        i += 1;
    }
    for _ in 0..s {
        s_lo = (&s_lo * &s_lo) >> shift;
        s_hi = ceil_div(&(&s_hi * &s_hi), &one);
    }
    fixed_interval(s_lo, s_hi, wp)
}

fn exp_point(y: &Rational, prec: u32) -> Interval {
    if y.is_zero() {
        return Interval::one();
    }
    let e = exp_nonneg(&y.abs(), prec + 8);
    let e = if y.is_negative() { e.recip().unwrap() } else { e };
    e.round_outward(prec + 4)
}

/// Enclosure of `exp` over an interval.
pub fn exp_interval(y: &Interval, prec: u32) -> Interval {
    let lo = exp_point(y.lo(), prec);
    if y.is_point() {
        return lo;
    }
    let hi = exp_point(y.hi(), prec);
    Interval { lo: lo.lo, hi: hi.hi }
}

/// Exact `q`-th root of a rational when one exists.
fn exact_root(x: &Rational, q: u32) -> Option<Rational> {
    let (n, d) = (x.numer(), x.denom());
    let rn = n.nth_root(q);
    let rd = d.nth_root(q);
    (&rn.pow(q) == n && &rd.pow(q) == d).then(|| Rational::new(rn, rd))
}

/// Enclosure of `base^t` for a positive rational base and rational exponent.
/// Exact (a point) whenever `t` is an integer or the power is rational with a
/// small root index.
pub fn pow_enclosure(base: &Rational, t: &Rational, bits: u32) -> Result<Interval, ExactError> {
    if !base.is_positive() {
        return Err(ExactError::NonPositiveBase);
    }
    if base.is_one() || t.is_zero() {
        return Ok(Interval::one());
    }
    if t.is_integer() {
        if let Some(e) = t.to_integer().to_i32() {
            return Ok(Interval::point(base.pow(e)));
        }
    }
    if let (Some(den), Some(num)) = (t.denom().to_u32(), t.numer().to_i32()) {
        if den <= 16 {
            if let Some(root) = exact_root(base, den) {
                return Ok(Interval::point(root.pow(num)));
            }
        }
    }
    let extra = 8 + (t.numer().bits() as u32).saturating_sub(t.denom().bits() as u32);
    let ln = ln_enclosure(base, bits + extra + 16)?;
    let y = ln.scale(t).round_outward(bits + extra + 16);
    Ok(exp_interval(&y, bits + 8).round_outward(bits + 4))
}

/// Enclosure of `x^t` over an interval of positive bases.
pub fn pow_interval(base: &Interval, t: &Rational, bits: u32) -> Result<Interval, ExactError> {
    if !base.is_positive() {
        return Err(ExactError::NonPositiveBase);
    }
    let a = pow_enclosure(base.lo(), t, bits)?;
    if base.is_point() {
        return Ok(a);
    }
    let b = pow_enclosure(base.hi(), t, bits)?;
    Ok(match t.cmp(&Rational::zero()) {
        Ordering::Less => Interval { lo: b.lo, hi: a.hi },
        _ => Interval { lo: a.lo, hi: b.hi },
    })
}

/// Enclosure of `Σ_{j≥k} (j + c)^(-2s)` by the integral test:
/// `∫_k^∞ (x+c)^(-2s) dx ≤ Σ ≤ (k+c)^(-2s) + ∫_k^∞ (x+c)^(-2s) dx`.
pub fn tail_sum_enclosure(k: i64, c: &Interval, s: &Rational, bits: u32) -> Result<Interval, ExactError> {
    let e = s * int(2);
    if e <= Rational::one() {
        return Err(ExactError::DivergentTail(e.to_string()));
    }
    if k < 1 || !(c.lo() + int(k)).is_positive() {
        return Err(ExactError::InvalidTail);
    }
    let a = c.shift(&int(k));
    let one_minus_e = Rational::one() - &e;
    let denom = &e - Rational::one();
    // (x+c)^(1-e) is decreasing in c: the lower integral uses c.hi
    let integral_lo = pow_enclosure(a.hi(), &one_minus_e, bits)?.lo().clone() / &denom;
    let integral_hi = pow_enclosure(a.lo(), &one_minus_e, bits)?.hi().clone() / &denom;
    let first = pow_enclosure(a.lo(), &-e.clone(), bits)?.hi().clone();
    Ok(Interval {
        lo: integral_lo,
        hi: integral_hi + first,
    })
}

/// Like [`tail_sum_enclosure`] but the first `exact_terms` terms are summed
/// individually before the integral bounds take over.
pub fn tail_sum_refined(
    k: i64,
    c: &Interval,
    s: &Rational,
    exact_terms: u32,
    bits: u32,
) -> Result<Interval, ExactError> {
    let e = s * int(2);
    let tail = tail_sum_enclosure(k + exact_terms as i64, c, s, bits)?;
    let mut sum = Interval::zero();
    for j in k..k + exact_terms as i64 {
        let term = pow_interval(&c.shift(&int(j)), &-e.clone(), bits)?;
        sum = (&sum + &term).round_outward(bits + 8);
    }
    Ok(&sum + &tail)
}
