//! Topological pressure, partition sums and dimension intervals.
//!
//! Pressure of a digit system is bracketed from finite-depth partition sums:
//! `P ≤ ln Z^sup_n / n` by submultiplicativity and
//! `P ≥ max(ln Z^inf_n, ln Z^sup_n - t ln K) / n` by the distortion bound.
//! Bounds are intersected over depths so refining never widens them.

pub mod appendix;
pub mod engine;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::exactnum::{
    exp_interval, int, ln_enclosure, ln_interval, pow_enclosure, rat, tail_sum_enclosure, ExactError, Interval,
    Rational,
};
use crate::nicf_system::{
    distortion_from_ratio, max_run, ratio_bound_min_abs, ratio_bound_runs, LoopLetter, SystemConstants,
};
use crate::symbolic::AlphabetSelection;
use engine::{build_table, exact_norms, log_sum, LogTable};

/// Working precision of the rational parts of the pressure engine.
pub const BITS: u32 = 80;
/// Word tables are capped at this many words.
pub const MAX_WORDS: usize = 1 << 20;
/// `partition_sum` is evaluated exactly up to this many words.
pub const EXACT_WORDS: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PressureError {
    #[error("partition sum diverges for t <= {theta}")]
    Divergent { theta: Rational },
    #[error("not a contraction: ratio {0} >= 1")]
    NotContraction(String),
    #[error("unknown example `{0}` (expected cycle4 or triangle6)")]
    UnknownExample(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Certified pressure bracket at one `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureBounds {
    pub t: Rational,
    pub lo: Rational,
    pub hi: Rational,
    pub depth: usize,
    pub k_used: Rational,
}

impl PressureBounds {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Certified bracket for the zero of the pressure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionInterval {
    #[serde(serialize_with = "ser_f64_down")]
    pub lo: Rational,
    #[serde(serialize_with = "ser_f64_up")]
    pub hi: Rational,
    pub depth: usize,
    #[serde(skip)]
    pub target_tol: f64,
}

fn ser_f64_down<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(crate::exactnum::f64_down(r))
}

fn ser_f64_up<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(crate::exactnum::f64_up(r))
}

impl DimensionInterval {
    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn achieved(&self) -> bool {
        self.width().to_f64().unwrap() <= self.target_tol
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// `θ = inf{t : Z_1(t) < ∞}` with a convergence witness just above it.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitenessExponent {
    pub theta: Rational,
    /// Why the sum diverges at `θ` (empty for finite systems).
    pub divergence: Option<String>,
    /// `(t, Z_1(t))` with `t > θ` and a finite enclosure.
    pub witness: (Rational, Interval),
}

/// Regularity class of a conformal IFS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Nature {
    StronglyRegular,
    CriticallyRegular,
    Irregular,
    Indeterminate,
}

/// Letters outside the enumerated part of a digit system.
#[derive(Debug, Clone, PartialEq)]
pub enum DigitTail {
    None,
    /// All digits `|b| >= start`, both signs.
    Plain { start: i64 },
    /// Vertex letters `±2^j k` with `j > j_max` or `k > k_max`.
    VertexBox { j_max: u32, k_max: i64 },
}

/// Log partition sums of the enumerated part at one depth.
#[derive(Debug, Clone)]
struct LogZ {
    inf_lo: Rational,
    sup_lo: Rational,
    sup_hi: Rational,
}

/// The full shift on finitely many NICF digit strings, plus an optional
/// cofinite tail of letters handled by an analytic bound.
#[derive(Debug)]
pub struct DigitIfs {
    letters: Vec<Vec<i64>>,
    tail: DigitTail,
    k_used: Rational,
    ln_k: Rational,
    max_words: usize,
    cache: Mutex<BTreeMap<usize, Arc<LogTable>>>,
}

impl Clone for DigitIfs {
    fn clone(&self) -> Self {
        DigitIfs::new(self.letters.clone(), self.tail.clone(), self.k_used.clone())
    }
}

impl DigitIfs {
    pub fn new(letters: Vec<Vec<i64>>, tail: DigitTail, k_used: Rational) -> Self {
        assert!(!letters.is_empty());
        assert!(k_used >= Rational::one());
        let ln_k = ln_enclosure(&k_used, BITS).unwrap().hi().clone();
        DigitIfs {
            letters,
            tail,
            k_used,
            ln_k,
            max_words: MAX_WORDS,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    /// `Φ_F` for a digit selection.
    pub fn from_selection(f: &AlphabetSelection) -> Self {
        let c = SystemConstants::new(BITS);
        let beta = ratio_bound_min_abs(f.min_abs(), &c);
        let k = distortion_from_ratio(&beta).hi().clone();
        let tail = match f.tail_start() {
            Some(start) => DigitTail::Plain { start },
            None => DigitTail::None,
        };
        let letters = f.letters().into_iter().map(|b| vec![b]).collect();
        DigitIfs::new(letters, tail, k)
    }

    /// Finite subsystem of the vertex IFS.
    pub fn from_loops(letters: &[LoopLetter]) -> Self {
        let c = SystemConstants::new(BITS);
        let min_k = letters.iter().map(|l| l.k).min().unwrap();
        let mut beta = ratio_bound_min_abs(min_k, &c).hi().clone();
        let j = max_run(letters);
        if j >= 1 {
            beta = beta.max(ratio_bound_runs(j));
        }
        let k = distortion_from_ratio(&Interval::point(beta)).hi().clone();
        DigitIfs::new(letters.iter().map(|l| l.digits()).collect(), DigitTail::None, k)
    }

    /// Vertex letters with `j <= j_max`, `3 <= k <= k_max`, plus the rest as a tail.
    pub fn vertex_box(j_max: u32, k_max: i64) -> Self {
        let mut letters = Vec::new();
        for j in 0..=j_max {
            for k in 3..=k_max {
                letters.push(LoopLetter::new(-1, j, k).digits());
                letters.push(LoopLetter::new(1, j, k).digits());
            }
        }
        DigitIfs::new(letters, DigitTail::VertexBox { j_max, k_max }, rat(25, 9))
    }

    pub fn with_max_words(mut self, max_words: usize) -> Self {
        self.max_words = max_words.max(1);
        self
    }

    pub fn letters(&self) -> &[Vec<i64>] {
        &self.letters
    }

    pub fn tail(&self) -> &DigitTail {
        &self.tail
    }

    pub fn count(&self) -> usize {
        self.letters.len()
    }

    pub fn k_used(&self) -> &Rational {
        &self.k_used
    }

    pub fn theta(&self) -> Rational {
        match self.tail {
            DigitTail::None => Rational::zero(),
            _ => rat(1, 2),
        }
    }

    /// Largest depth `<= n` whose word table fits the cap.
    pub fn effective_depth(&self, n: usize) -> usize {
        let mut d = 1;
        let mut words = self.count();
        while d < n {
            match words.checked_mul(self.count()) {
                Some(w) if w <= self.max_words => {
                    words = w;
                    d += 1;
                }
                _ => break,
            }
        }
        d
    }

    fn table(&self, d: usize) -> Arc<LogTable> {
        if let Some(x) = self.cache.lock().unwrap().get(&d) {
            return x.clone();
        }
        let tab = Arc::new(build_table(&self.letters, d));
        self.cache.lock().unwrap().insert(d, tab.clone());
        tab
    }

    /// Exact-path sums `(Σ inf^t, Σ sup^t)` of the enumerated part.
    fn exact_sums(norms: &[(Rational, Rational)], t: &Rational) -> Result<(Interval, Interval), PressureError> {
        let mut inf = Interval::zero();
        let mut sup = Interval::zero();
        for (a, b) in norms {
            inf = &inf + &pow_enclosure(a, t, BITS)?;
            sup = &sup + &pow_enclosure(b, t, BITS)?;
        }
        Ok((inf, sup))
    }

    fn log_z(&self, t: &Rational, d: usize) -> Result<LogZ, PressureError> {
        let tab = self.table(d);
        let e = tab.entry_error();
        let s = log_sum(&tab.ln_sup, t, e, tab.max_abs);
        let i = log_sum(&tab.ln_inf, t, e, tab.max_abs);
        Ok(LogZ {
            inf_lo: i.lo(),
            sup_lo: s.lo(),
            sup_hi: s.hi(),
        })
    }

    /// Enclosure of the single-letter tail sum `Σ_{tail} ‖φ'_e‖^t`.
    pub fn tail_sum(&self, t: &Rational) -> Result<Interval, PressureError> {
        match &self.tail {
            DigitTail::None => Ok(Interval::zero()),
            DigitTail::Plain { start } => {
                if *t <= rat(1, 2) {
                    return Err(PressureError::Divergent { theta: rat(1, 2) });
                }
                let up = tail_sum_enclosure(*start, &Interval::point(rat(-1, 2)), t, BITS)?;
                let down = tail_sum_enclosure(*start, &Interval::point(rat(1, 2)), t, BITS)?;
                Interval::new(down.lo() * int(2), up.hi() * int(2)).map_err(Into::into)
            }
            DigitTail::VertexBox { j_max, k_max } => vertex_tail_bound(t, Some(*j_max), Some(*k_max)),
        }
    }

    fn check_t(&self, t: &Rational) -> Result<(), PressureError> {
        if t.is_negative() {
            return Err(PressureError::Invalid(format!("t = {t} < 0")));
        }
        if !matches!(self.tail, DigitTail::None) && *t <= rat(1, 2) {
            return Err(PressureError::Divergent { theta: rat(1, 2) });
        }
        Ok(())
    }

    fn exp_hi(x: &Rational) -> Rational {
        exp_interval(&Interval::point(x.clone()), BITS).hi().clone()
    }

    fn exp_lo(x: &Rational) -> Rational {
        exp_interval(&Interval::point(x.clone()), BITS).lo().clone()
    }

    /// Upper bound of `ln Z^sup_m` for the whole system (tail included).
    fn ln_sup_with_tail(&self, t: &Rational, m: usize, zm: &LogZ, tail_hi: &Rational) -> Result<Rational, PressureError> {
        if tail_hi.is_zero() {
            return Ok(zm.sup_hi.clone());
        }
        // Z_m(F) <= Z_m(F_N) + T Σ_{i=1}^m Z_{i-1}(F_N) Z_1(F)^{m-i}
        let mut u = vec![Rational::one()];
        for i in 1..m {
            u.push(Self::exp_hi(&self.log_z(t, i)?.sup_hi));
        }
        u.push(Self::exp_hi(&zm.sup_hi));
        let z1f = &u[1] + tail_hi;
        let mut acc = u[m].clone();
        for i in 1..=m {
            acc += tail_hi * &u[i - 1] * z1f.pow((m - i) as i32);
        }
        Ok(ln_enclosure(&acc, BITS)?.hi().clone())
    }

    /// Pressure bracket from the single depth `d`.
    fn depth_bounds(&self, t: &Rational, d: usize) -> Result<(Rational, Rational), PressureError> {
        self.check_t(t)?;
        if t.is_zero() {
            let l = ln_enclosure(&int(self.count() as i64), BITS)?;
            return Ok((l.lo().clone(), l.hi().clone()));
        }
        let z = self.log_z(t, d)?;
        let dd = int(d as i64);
        let mut lo = z.inf_lo.clone().max(&z.sup_lo - t * &self.ln_k);
        let tail = self.tail_sum(t)?;
        if d == 1 && !tail.lo().is_zero() {
            let s = Self::exp_lo(&z.inf_lo) + tail.lo();
            lo = lo.max(ln_enclosure(&s, BITS)?.lo().clone());
        }
        let hi = self.ln_sup_with_tail(t, d, &z, tail.hi())?;
        Ok((lo / &dd, hi / &dd))
    }

    /// `Σ_{|ω| = n} ‖φ'_ω‖^t` enclosed (tail included for cofinite systems).
    pub fn partition_sum(&self, t: &Rational, n: usize) -> Result<Interval, PressureError> {
        self.check_t(t)?;
        if n == 0 {
            return Ok(Interval::one());
        }
        let tail = self.tail_sum(t)?;
        let small = self.count().checked_pow(n as u32).map_or(false, |w| w <= EXACT_WORDS);
        let (lo, z) = if small {
            let (_, sup) = Self::exact_sums(&exact_norms(&self.letters, n), t)?;
            if tail.hi().is_zero() {
                return Ok(sup);
            }
            let l = ln_interval(&sup, BITS)?;
            let z = LogZ { inf_lo: l.lo().clone(), sup_lo: l.lo().clone(), sup_hi: l.hi().clone() };
            (sup.lo().clone(), z)
        } else {
            let z = self.log_z(t, n)?;
            (Self::exp_lo(&z.sup_lo), z)
        };
        let hi = Self::exp_hi(&self.ln_sup_with_tail(t, n, &z, tail.hi())?);
        Interval::new(lo, hi).map_err(Into::into)
    }
}

/// A system of similarities: finitely many enumerated ratios plus an optional
/// bounded remainder (used for first-return loop systems).
#[derive(Debug, Clone)]
pub struct SimilarityIfs {
    ratios: Vec<Rational>,
    tail: Option<appendix::LoopTail>,
}

impl SimilarityIfs {
    pub fn new(ratios: Vec<Rational>) -> Result<Self, PressureError> {
        Self::with_tail(ratios, None)
    }

    pub fn with_tail(ratios: Vec<Rational>, tail: Option<appendix::LoopTail>) -> Result<Self, PressureError> {
        if ratios.is_empty() {
            return Err(PressureError::Invalid("empty system".into()));
        }
        if let Some(r) = ratios.iter().find(|r| !r.is_positive() || **r >= Rational::one()) {
            return Err(PressureError::NotContraction(r.to_string()));
        }
        Ok(SimilarityIfs { ratios, tail })
    }

    pub fn ratios(&self) -> &[Rational] {
        &self.ratios
    }

    pub fn theta(&self) -> Rational {
        Rational::zero()
    }

    /// `Σ r_i^t` with the remainder for `t > 0`.
    pub fn sum(&self, t: &Rational) -> Result<Interval, PressureError> {
        if t.is_negative() {
            return Err(PressureError::Invalid(format!("t = {t} < 0")));
        }
        let mut s = Interval::zero();
        for r in &self.ratios {
            s = (&s + &pow_enclosure(r, t, BITS)?).round_outward(BITS + 8);
        }
        if let Some(tail) = &self.tail {
            let extra = tail.bound(t)?;
            s = Interval::new(s.lo().clone(), s.hi() + extra)?;
        }
        Ok(s)
    }

    fn bounds(&self, t: &Rational) -> Result<(Rational, Rational), PressureError> {
        let l = ln_interval(&self.sum(t)?, BITS)?;
        Ok((l.lo().clone(), l.hi().clone()))
    }
}

/// Either kind of system.
#[derive(Debug, Clone)]
pub enum System {
    Digit(DigitIfs),
    Similarity(SimilarityIfs),
}

impl System {
    pub fn theta(&self) -> Rational {
        match self {
            System::Digit(d) => d.theta(),
            System::Similarity(s) => s.theta(),
        }
    }

    pub fn k_used(&self) -> Rational {
        match self {
            System::Digit(d) => d.k_used.clone(),
            System::Similarity(_) => Rational::one(),
        }
    }

    pub fn effective_depth(&self, n: usize) -> usize {
        match self {
            System::Digit(d) => d.effective_depth(n),
            System::Similarity(_) => 1,
        }
    }

    pub fn partition_sum(&self, t: &Rational, n: usize) -> Result<Interval, PressureError> {
        match self {
            System::Digit(d) => d.partition_sum(t, n),
            System::Similarity(s) => {
                let z = s.sum(t)?;
                Ok(z.powi(n as i32)?)
            }
        }
    }

    /// Best bracket over depths `1..=n` (capped by the word limit).
    pub fn pressure_bounds(&self, t: &Rational, n: usize) -> Result<PressureBounds, PressureError> {
        let depth = self.effective_depth(n.max(1));
        let (mut lo, mut hi) = self.bounds_at(t, 1)?;
        for d in 2..=depth {
            let (l, h) = self.bounds_at(t, d)?;
            lo = lo.max(l);
            hi = hi.min(h);
        }
        Ok(PressureBounds { t: t.clone(), lo, hi, depth, k_used: self.k_used() })
    }

    fn bounds_at(&self, t: &Rational, d: usize) -> Result<(Rational, Rational), PressureError> {
        match self {
            System::Digit(s) => s.depth_bounds(t, d),
            System::Similarity(s) => s.bounds(t),
        }
    }

    /// Is `P(t) >= 0` certified at some depth `<= max_depth`?
    fn certify_nonneg(&self, t: &Rational, max_depth: usize) -> bool {
        if *t <= self.theta() && (self.theta().is_positive() || self.has_tail()) {
            return true;
        }
        let top = self.effective_depth(max_depth);
        for d in 1..=top {
            match self.bounds_at(t, d) {
                Ok((lo, hi)) => {
                    if !lo.is_negative() {
                        return true;
                    }
                    if hi.is_negative() {
                        return false;
                    }
                }
                Err(PressureError::Divergent { .. }) => return true,
                Err(_) => return false,
            }
        }
        false
    }

    /// Is `P(t) <= 0` certified at some depth `<= max_depth`?
    fn certify_nonpos(&self, t: &Rational, max_depth: usize) -> bool {
        let top = self.effective_depth(max_depth);
        for d in 1..=top {
            match self.bounds_at(t, d) {
                Ok((lo, hi)) => {
                    if !hi.is_positive() {
                        return true;
                    }
                    if lo.is_positive() {
                        return false;
                    }
                }
                Err(_) => return false,
            }
        }
        false
    }

    fn has_tail(&self) -> bool {
        match self {
            System::Digit(d) => !matches!(d.tail, DigitTail::None),
            System::Similarity(s) => s.tail.is_some(),
        }
    }

    /// Bracket the zero of `t ↦ P(t)` by two fixed-step dyadic bisections.
    pub fn dim_interval(&self, max_depth: usize, tol: f64) -> DimensionInterval {
        assert!(tol > 0.0);
        if let System::Digit(d) = self {
            if d.count() == 1 && matches!(d.tail, DigitTail::None) {
                // one contraction: the limit set is a point
                return DimensionInterval { lo: Rational::zero(), hi: Rational::zero(), depth: 1, target_tol: tol };
            }
        }
        let mut range = Rational::one();
        if let System::Similarity(_) = self {
            while !self.certify_nonpos(&range, max_depth) && range < int(1 << 10) {
                range *= int(2);
            }
        }
        let steps = ((range.to_f64().unwrap() * 4.0 / tol).log2().ceil() as i64).max(1);
        let half = rat(1, 2);
        let (mut a, mut b) = (Rational::zero(), range.clone());
        for _ in 0..steps {
            let mid = (&a + &b) * &half;
            if self.certify_nonneg(&mid, max_depth) {
                a = mid;
            } else {
                b = mid;
            }
        }
        let lo = a;
        let (mut a, mut b) = (Rational::zero(), range);
        for _ in 0..steps {
            let mid = (&a + &b) * &half;
            if self.certify_nonpos(&mid, max_depth) {
                b = mid;
            } else {
                a = mid;
            }
        }
        DimensionInterval { lo, hi: b, depth: self.effective_depth(max_depth), target_tol: tol }
    }

    /// Certified regularity class, or `Indeterminate`.
    pub fn classify_nature(&self, max_depth: usize) -> Nature {
        let theta = self.theta();
        if !self.has_tail() {
            // finite: θ = 0 and P(0) = ln(#letters)
            return match self.pressure_bounds(&Rational::zero(), 1) {
                Ok(b) if b.lo.is_positive() => Nature::StronglyRegular,
                Ok(b) if b.lo.is_zero() && b.hi.is_zero() => Nature::CriticallyRegular,
                Ok(b) if b.hi.is_negative() => Nature::Irregular,
                _ => Nature::Indeterminate,
            };
        }
        for k in 1..=16 {
            let t = &theta + rat(1, 1 << k);
            if let Ok(b) = self.pressure_bounds(&t, max_depth) {
                if b.lo.is_positive() {
                    return Nature::StronglyRegular;
                }
            }
        }
        Nature::Indeterminate
    }

    pub fn finiteness_exponent(&self) -> Result<FinitenessExponent, PressureError> {
        let theta = self.theta();
        let t = &theta + rat(1, 1024);
        let z = self.partition_sum(&t, 1)?;
        let divergence = match self {
            _ if !self.has_tail() => None,
            System::Digit(_) => Some(format!(
                "Σ (|b|+1/2)^(-2t) >= ∫ (x+1/2)^(-2t) dx = ∞ for 2t <= 1, so Z_1 = ∞ at t = {theta}"
            )),
            System::Similarity(_) => Some("infinitely many loops with ratio^0 = 1".to_string()),
        };
        Ok(FinitenessExponent { theta, divergence, witness: (t, z) })
    }
}

/// Upper/lower enclosure of `Σ ‖φ'_e‖^t` over vertex letters `±2^j k` outside
/// the box `j <= j_max`, `k <= k_max` (`None` means unbounded), using
/// `‖φ'_{2^j k}‖ <= 4^(-j) (k - 1/2)^(-2)`.
pub fn vertex_tail_bound(t: &Rational, j_max: Option<u32>, k_max: Option<i64>) -> Result<Interval, PressureError> {
    if j_max.is_none() && k_max.is_none() {
        return Ok(Interval::zero());
    }
    if *t <= rat(1, 2) {
        return Err(PressureError::Divergent { theta: rat(1, 2) });
    }
    let q = pow_enclosure(&rat(1, 4), t, BITS)?;
    let g_all = (-&q).shift(&int(1)).recip()?;
    let minus = Interval::point(rat(-1, 2));
    let mut hi = Interval::zero();
    let mut lo = Rational::zero();
    if let Some(k) = k_max {
        let s = tail_sum_enclosure(k + 1, &minus, t, BITS)?;
        hi = &hi + &(&g_all * &s);
        lo = tail_sum_enclosure(k + 1, &Interval::point(rat(1, 2)), t, BITS)?.lo() * int(2);
    }
    if let Some(j) = j_max {
        let s3 = tail_sum_enclosure(3, &minus, t, BITS)?;
        let g = &q.powi(j as i32 + 1)? * &g_all;
        hi = &hi + &(&g * &s3);
    }
    Ok(Interval::new(lo, hi.hi() * int(2))?)
}

/// `partition_sum` for a digit selection.
pub fn partition_sum(f: &AlphabetSelection, t: &Rational, n: usize) -> Result<Interval, PressureError> {
    DigitIfs::from_selection(f).partition_sum(t, n)
}

/// `pressure_bounds` for a digit selection.
pub fn pressure_bounds(f: &AlphabetSelection, t: &Rational, n: usize) -> Result<PressureBounds, PressureError> {
    System::Digit(DigitIfs::from_selection(f)).pressure_bounds(t, n)
}

/// `dim_interval` for a digit selection.
pub fn dim_interval(f: &AlphabetSelection, max_depth: usize, tol: f64) -> DimensionInterval {
    System::Digit(DigitIfs::from_selection(f)).dim_interval(max_depth, tol)
}

/// Pressure bracket of a similarity system with the given ratios.
pub fn similarity_pressure(ratios: &[Rational], t: &Rational) -> Result<PressureBounds, PressureError> {
    System::Similarity(SimilarityIfs::new(ratios.to_vec())?).pressure_bounds(t, 1)
}
