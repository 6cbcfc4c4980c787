//! Mass-comparison checks and the greedy construction of subsystems with a
//! prescribed dimension.

use num_traits::Zero;
use serde::Serialize;

use crate::exactnum::{exp_interval, from_f64, int, pow_enclosure, rat, tail_sum_enclosure, Interval, Rational};
use crate::ledger::{self, inv_square_tail, Consts};
use crate::nicf_system::{letter_constants, vertex_alphabet, LetterRef, LoopLetter, SystemConstants};
use crate::pressure_dim::{DigitIfs, DimensionInterval, PressureError, System};
use crate::symbolic::{natural_order, AlphabetSelection};

const BITS: u32 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// Digits `|b| >= 3` with the full shift.
    PhiF,
    /// The vertex IFS of loop letters.
    PhiV,
}

impl std::str::FromStr for SystemKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "F" | "phi_f" | "f" => Ok(SystemKind::PhiF),
            "v" | "phi_v" | "V" => Ok(SystemKind::PhiV),
            _ => Err(format!("unknown system `{s}` (expected F or v)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MmeOutcome {
    /// `M_b < Σ m_c` over the following letters, with both sides enclosed.
    Holds { lhs: Interval, rhs: Interval, route: &'static str },
    Fails { lhs: Interval, rhs: Interval, route: &'static str },
    /// Not provable letter by letter; compare `λ` values instead.
    UseDirectComparison,
}

impl MmeOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, MmeOutcome::Holds { .. })
    }
}

fn plain_lower_tail(k: i64, bits: u32) -> Interval {
    inv_square_tail(k, &Interval::point(rat(1, 2)), bits)
}

fn decide(lhs: Interval, rhs: Interval, route: &'static str) -> MmeOutcome {
    if lhs.hi() < rhs.lo() {
        MmeOutcome::Holds { lhs, rhs, route }
    } else {
        MmeOutcome::Fails { lhs, rhs, route }
    }
}

/// Check `M_b < Σ_{c after b} m_c` for one letter.
pub fn mme_check(b: LetterRef, kind: SystemKind) -> Result<MmeOutcome, PressureError> {
    let sc = SystemConstants::new(BITS);
    match (kind, b) {
        (SystemKind::PhiF, LetterRef::Digit(d)) => {
            let a = d.abs();
            if a < 3 {
                return Err(PressureError::Invalid(format!("digit {d} is not in Φ_F")));
            }
            if a == 3 {
                return Ok(MmeOutcome::UseDirectComparison);
            }
            let (_, big) = letter_constants(b, &sc).map_err(|e| PressureError::Invalid(e.to_string()))?;
            let rhs = inv_square_tail(a + 1, &sc.alpha, BITS).scale(&rat(8, 9));
            Ok(decide(big, rhs, "digit tail sum"))
        }
        (SystemKind::PhiV, LetterRef::Digit(d)) => mme_check(LetterRef::Loop(LoopLetter::plain(d)), kind),
        (SystemKind::PhiV, LetterRef::Loop(l)) => {
            let k = l.k;
            let c = Consts::new(BITS);
            let m_plain = rat(18, 25);
            if l.j == 0 {
                return Ok(match k {
                    3 => MmeOutcome::UseDirectComparison,
                    4 => {
                        let (lhs, rhs) = ledger::pm4_main(&c);
                        decide(lhs, rhs, "±4 case")
                    }
                    5 => {
                        let lhs = Interval::point(rat(64, 25) / (int(k) - rat(1, 2)).pow(2));
                        let loops = c.loop_factor().shift(&int(1));
                        let rhs = (&plain_lower_tail(k + 1, BITS) * &loops).scale(&m_plain);
                        decide(lhs, rhs, "±5 case")
                    }
                    _ => {
                        let (_, big) = letter_constants(b, &sc).unwrap();
                        let rhs = plain_lower_tail(k + 1, BITS).scale(&m_plain);
                        decide(big, rhs, "plain k >= 6")
                    }
                });
            }
            let (_, big) = letter_constants(b, &sc).unwrap();
            let (start, route) = if l.j as i64 > k {
                (l.j as i64 + 1, "j > k")
            } else {
                (k + 2, "1 <= j <= k")
            };
            let rhs = plain_lower_tail(start, BITS).scale(&m_plain);
            Ok(decide(big, rhs, route))
        }
        (SystemKind::PhiF, LetterRef::Loop(_)) => Err(PressureError::Invalid("loop letters belong to Φ^(v)".into())),
    }
}

/// One grid point of a `λ` comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRow {
    pub t: Rational,
    /// Upper bound for `λ_t` of the smaller system (`None` if infinite).
    pub small_hi: Option<Rational>,
    /// Lower bound for `λ_t` of the larger system (`None` if infinite).
    pub large_lo: Option<Rational>,
    pub holds: bool,
}

/// `Σ_b (|b| - 1/2)^(-2t)` over the selection, with the cofinite tail enclosed.
fn z1_sup(f: &AlphabetSelection, t: &Rational) -> Result<Option<Interval>, PressureError> {
    let mut z = Interval::zero();
    for b in f.letters() {
        let base = rat(4, (2 * b.abs() - 1).pow(2));
        z = (&z + &pow_enclosure(&base, t, BITS)?).round_outward(BITS + 8);
    }
    if let Some(start) = f.tail_start() {
        if *t <= rat(1, 2) {
            return Ok(None);
        }
        let tail = tail_sum_enclosure(start, &Interval::point(rat(-1, 2)), t, BITS)?;
        z = &z + &tail.scale(&int(2));
    }
    Ok(Some(z))
}

/// Certify `λ_t(small) <= λ_t(large)` on a grid using
/// `K^(-t) Z_1(large) <= λ_t(large)` and `λ_t(small) <= Z_1(small)`, where
/// `Z_1` sums sup-norms of single letters. Grid points where the sum of the
/// larger system diverges pass automatically.
pub fn direct_lambda_comparison(
    small: &AlphabetSelection,
    large: &AlphabetSelection,
    t_grid: &[Rational],
) -> Result<Vec<LambdaRow>, PressureError> {
    if small == large {
        let rows = t_grid
            .iter()
            .map(|t| LambdaRow { t: t.clone(), small_hi: None, large_lo: None, holds: true })
            .collect();
        return Ok(rows);
    }
    let k_large = DigitIfs::from_selection(large).k_used().clone();
    let mut rows = Vec::new();
    for t in t_grid {
        let large_z = z1_sup(large, t)?;
        let small_z = z1_sup(small, t)?;
        let (small_hi, large_lo, holds) = match (small_z, large_z) {
            (_, None) => (None, None, true),
            (None, Some(l)) => (None, Some(l.lo().clone()), false),
            (Some(s), Some(l)) => {
                let kt = pow_enclosure(&k_large, &-t.clone(), BITS)?;
                let lo = kt.lo() * l.lo();
                let hi = s.hi().clone();
                if hi <= lo {
                    (Some(hi), Some(lo), true)
                } else {
                    pressure_route(small, large, t, hi, lo)?
                }
            }
        };
        rows.push(LambdaRow { t: t.clone(), small_hi, large_lo, holds });
    }
    Ok(rows)
}

/// Fallback when the single-letter chain is inconclusive: compare deeper
/// pressure bounds.
fn pressure_route(
    small: &AlphabetSelection,
    large: &AlphabetSelection,
    t: &Rational,
    hi: Rational,
    lo: Rational,
) -> Result<(Option<Rational>, Option<Rational>, bool), PressureError> {
    let ps = System::Digit(DigitIfs::from_selection(small)).pressure_bounds(t, FALLBACK_DEPTH)?;
    let pl = System::Digit(DigitIfs::from_selection(large)).pressure_bounds(t, FALLBACK_DEPTH)?;
    let hi = hi.min(exp_interval(&Interval::point(ps.hi), BITS).hi().clone());
    let lo = lo.max(exp_interval(&Interval::point(pl.lo), BITS).lo().clone());
    let ok = hi <= lo;
    Ok((Some(hi), Some(lo), ok))
}

const FALLBACK_DEPTH: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct Decision {
    pub letter: String,
    pub accepted: bool,
    pub dim: DimensionInterval,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumTrace {
    pub target: f64,
    pub system: SystemKind,
    pub budget: usize,
    pub depth: usize,
    pub ordering: Vec<String>,
    pub decisions: Vec<Decision>,
    #[serde(rename = "final_F")]
    pub final_letters: Vec<String>,
    pub achieved: DimensionInterval,
    #[serde(skip)]
    pub final_digits: Vec<i64>,
    #[serde(skip)]
    pub final_loops: Vec<LoopLetter>,
}

const TOL: f64 = 1e-4;

fn digits_dim(d: &[i64], depth: usize) -> DimensionInterval {
    let f = AlphabetSelection::explicit(d.to_vec()).unwrap();
    System::Digit(DigitIfs::from_selection(&f)).dim_interval(depth, TOL)
}

fn loops_dim(l: &[LoopLetter], depth: usize) -> DimensionInterval {
    System::Digit(DigitIfs::from_loops(l)).dim_interval(depth, TOL)
}

fn empty_dim() -> DimensionInterval {
    DimensionInterval { lo: Rational::zero(), hi: Rational::zero(), depth: 0, target_tol: TOL }
}

/// Greedy walk through the first `budget` letters: a letter is kept when the
/// certified upper dimension of the enlarged set stays `<= target`.
pub fn construct(target: f64, kind: SystemKind, budget: usize, depth: usize) -> Result<SpectrumTrace, PressureError> {
    if !(0.0..=1.0).contains(&target) {
        return Err(PressureError::Invalid(format!("target {target} outside [0, 1]")));
    }
    let tq = from_f64(target);
    let mut decisions = Vec::new();
    let mut achieved = empty_dim();
    let mut final_digits = Vec::new();
    let mut final_loops = Vec::new();
    let ordering: Vec<String>;
    match kind {
        SystemKind::PhiF => {
            let order = natural_order(budget);
            ordering = order.iter().map(|b| b.to_string()).collect();
            for b in order {
                let mut trial = final_digits.clone();
                trial.push(b);
                let dim = digits_dim(&trial, depth);
                let accepted = dim.hi <= tq;
                if accepted {
                    final_digits = trial;
                    achieved = dim.clone();
                }
                decisions.push(Decision { letter: b.to_string(), accepted, dim });
            }
        }
        SystemKind::PhiV => {
            let order = vertex_alphabet(budget);
            ordering = order.iter().map(|l| l.to_string()).collect();
            for l in order {
                let mut trial = final_loops.clone();
                trial.push(l);
                let dim = loops_dim(&trial, depth);
                let accepted = dim.hi <= tq;
                if accepted {
                    final_loops = trial;
                    achieved = dim.clone();
                }
                decisions.push(Decision { letter: l.to_string(), accepted, dim });
            }
        }
    }
    let final_letters = match kind {
        SystemKind::PhiF => final_digits.iter().map(|b| b.to_string()).collect(),
        SystemKind::PhiV => final_loops.iter().map(|l| l.to_string()).collect(),
    };
    Ok(SpectrumTrace {
        target,
        system: kind,
        budget,
        depth,
        ordering,
        decisions,
        final_letters,
        achieved,
        final_digits,
        final_loops,
    })
}

/// The grid `0.55, 0.60, ..., 1.0`.
pub fn letter3_grid() -> Vec<Rational> {
    (11..=20).map(|i| rat(i, 20)).collect()
}

/// `λ_t({-3, 3}) <= λ_t({|b| >= 4})` on [`letter3_grid`].
pub fn letter3_chain() -> Result<Vec<LambdaRow>, PressureError> {
    let small = AlphabetSelection::explicit(vec![-3, 3]).unwrap();
    let large = AlphabetSelection::cofinite(4, 4).unwrap();
    direct_lambda_comparison(&small, &large, &letter3_grid())
}

impl LambdaRow {
    pub fn is_auto(&self) -> bool {
        self.large_lo.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_f_mme_for_four_to_hundred() {
        for b in 4..=100 {
            assert!(mme_check(LetterRef::Digit(b), SystemKind::PhiF).unwrap().holds(), "{b}");
            assert!(mme_check(LetterRef::Digit(-b), SystemKind::PhiF).unwrap().holds(), "{b}");
        }
        assert_eq!(mme_check(LetterRef::Digit(3), SystemKind::PhiF).unwrap(), MmeOutcome::UseDirectComparison);
        assert!(mme_check(LetterRef::Digit(2), SystemKind::PhiF).is_err());
        // the letter-by-letter sum condition genuinely fails at |b| = 3
        let sc = SystemConstants::new(BITS);
        let (_, big) = letter_constants(LetterRef::Digit(3), &sc).unwrap();
        let rhs = inv_square_tail(4, &sc.alpha, BITS).scale(&rat(8, 9));
        assert!(big.lo() > rhs.hi());
    }

    #[test]
    fn phi_v_cases() {
        for l in vertex_alphabet(200) {
            let out = mme_check(LetterRef::Loop(l), SystemKind::PhiV).unwrap();
            if l.j == 0 && l.k == 3 {
                assert_eq!(out, MmeOutcome::UseDirectComparison);
            } else {
                assert!(out.holds(), "{l}");
            }
        }
    }

    #[test]
    fn letter_three_chain_on_grid() {
        let rows = letter3_chain().unwrap();
        assert_eq!(rows.len(), 10);
        assert!(rows.iter().all(|r| r.holds));
        let small = AlphabetSelection::explicit(vec![-3, 3]).unwrap();
        let large = AlphabetSelection::cofinite(4, 4).unwrap();
        let r = direct_lambda_comparison(&small, &large, &[rat(1, 2), rat(2, 5)]).unwrap();
        assert!(r.iter().all(|x| x.holds && x.is_auto()));
        let same = direct_lambda_comparison(&small, &small, &letter3_grid()).unwrap();
        assert!(same.iter().all(|x| x.holds));
        // a single letter against a superset
        let big = AlphabetSelection::abs_range(4, 5).unwrap();
        let r = direct_lambda_comparison(&AlphabetSelection::explicit(vec![-5]).unwrap(), &big, &[rat(1, 1)]).unwrap();
        assert!(r[0].holds);
    }

    #[test]
    fn construct_extremes() {
        let t0 = construct(0.0, SystemKind::PhiF, 6, 6).unwrap();
        assert_eq!(t0.final_digits, vec![-3]);
        assert!(t0.achieved.hi.is_zero());
        let t1 = construct(1.0, SystemKind::PhiF, 4, 4).unwrap();
        assert_eq!(t1.final_digits.len(), 4);
    }
}
