//! The NICF graph directed system, its vertex IFS at `v`, and the exact
//! derivative, norm and distortion formulas used throughout.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::cf_core::{CfError, Word};
use crate::exactnum::{int, rat, surd_enclosure, Interval, Rational, DEFAULT_BITS};
use crate::symbolic::{GraphSystem, Incidence, NicfMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("constants defined on F: letter {0} has |b| < 3")]
    NotInF(i64),
    #[error(transparent)]
    Cf(#[from] CfError),
}

/// Edge label of the barred graph: `digit` with the bar flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BarredLetter {
    pub digit: i64,
    pub barred: bool,
}

impl fmt::Display for BarredLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.barred {
            write!(f, "{}~", self.digit)
        } else {
            write!(f, "{}", self.digit)
        }
    }
}

/// The barred NICF graph on `v, w, z` with letters `2 <= |e| <= max_abs`.
pub fn nicf_gdms(max_abs: i64) -> GraphSystem<BarredLetter> {
    let mut g = GraphSystem::new(&["v", "w", "z"]);
    let plain = |d| BarredLetter { digit: d, barred: false };
    let bar = |d| BarredLetter { digit: d, barred: true };
    for e in 3..=max_abs {
        g.add_edge(plain(-e), "v", "v").unwrap();
        g.add_edge(plain(e), "v", "v").unwrap();
    }
    g.add_edge(plain(2), "v", "w").unwrap();
    for e in 3..=max_abs {
        g.add_edge(bar(e), "w", "v").unwrap();
    }
    g.add_edge(bar(2), "w", "w").unwrap();
    g.add_edge(plain(-2), "v", "z").unwrap();
    for e in 3..=max_abs {
        g.add_edge(bar(-e), "z", "v").unwrap();
    }
    g.add_edge(bar(-2), "z", "z").unwrap();
    g
}

/// Digit-level admissibility (the unbarred matrix).
pub fn is_nicf_admissible(w: &[i64]) -> bool {
    w.iter().all(|d| NicfMatrix.contains(d)) && w.windows(2).all(|p| NicfMatrix.allowed(&p[0], &p[1]))
}

/// Letter of the vertex IFS: `sign·(2^j k)`, i.e. `j` copies of `2·sign`
/// followed by `sign·k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoopLetter {
    pub sign: i64,
    pub j: u32,
    pub k: i64,
}

impl LoopLetter {
    pub fn plain(b: i64) -> Self {
        LoopLetter { sign: b.signum(), j: 0, k: b.abs() }
    }

    pub fn new(sign: i64, j: u32, k: i64) -> Self {
        assert!(sign == 1 || sign == -1);
        assert!(k >= 3);
        LoopLetter { sign, j, k }
    }

    pub fn digits(&self) -> Vec<i64> {
        let mut d = vec![2 * self.sign; self.j as usize];
        d.push(self.sign * self.k);
        d
    }

    pub fn word(&self) -> Word {
        Word::nicf(self.digits()).expect("loop letters are admissible")
    }

    /// Path in the barred graph: `2 (2~)^(j-1) k~`, or the self-loop `k`.
    pub fn barred_path(&self) -> Vec<BarredLetter> {
        if self.j == 0 {
            return vec![BarredLetter { digit: self.sign * self.k, barred: false }];
        }
        let mut p = vec![BarredLetter { digit: 2 * self.sign, barred: false }];
        for _ in 1..self.j {
            p.push(BarredLetter { digit: 2 * self.sign, barred: true });
        }
        p.push(BarredLetter { digit: self.sign * self.k, barred: true });
        p
    }

    pub fn len(&self) -> usize {
        self.j as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for LoopLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.sign * self.k;
        match self.j {
            0 => write!(f, "{k}"),
            1 => write!(f, "({})({k})", 2 * self.sign),
            j => write!(f, "({})^{j}({k})", 2 * self.sign),
        }
    }
}

/// Enclosed constants of the two systems.
#[derive(Debug, Clone)]
pub struct SystemConstants {
    /// `(3 - √5)/2`.
    pub alpha: Interval,
    /// Distortion of the vertex IFS.
    pub k_global: Rational,
    /// Distortion over words of letters preceding 5.
    pub k_prec5: Rational,
    /// `((7 - √5)/(1 + √5))²`, distortion over words of letters preceding 4.
    pub k_prec4: Interval,
    /// `((1 + β/2)/(1 - β/2))²` with `β = 2 - √3`, i.e. `((4 - √3)/√3)²`.
    pub k_4: Interval,
    /// The simplified form `((4 - √3)/(1 + √3))²` as printed (≈ 0.689).
    pub k4_printed: Interval,
}

impl SystemConstants {
    pub fn new(bits: u32) -> Self {
        let s5 = surd_enclosure(5, bits).unwrap();
        let s3 = surd_enclosure(3, bits).unwrap();
        let alpha = (&Interval::from_int(3) - &s5).scale(&rat(1, 2));
        let k_prec4 = distortion_from_ratio(&alpha);
        let beta4 = &Interval::from_int(2) - &s3;
        let k_4 = distortion_from_ratio(&beta4);
        let k4_printed = (&Interval::from_int(4) - &s3)
            .checked_div(&s3.shift(&int(1)))
            .unwrap()
            .square();
        SystemConstants {
            alpha,
            k_global: rat(25, 9),
            k_prec5: rat(64, 25),
            k_prec4,
            k_4,
            k4_printed,
        }
    }
}

impl Default for SystemConstants {
    fn default() -> Self {
        Self::new(DEFAULT_BITS)
    }
}

/// `((1 + β/2)/(1 - β/2))²` for a ratio bound `β ∈ [0, 1]`.
pub fn distortion_from_ratio(beta: &Interval) -> Interval {
    let half = beta.scale(&rat(1, 2));
    let num = half.shift(&int(1));
    let den = (-&half).shift(&int(1));
    num.checked_div(&den).unwrap().square()
}

/// Upper bound for `|q_{n-1}/q_n|` on words over digits `|b| >= m`, `m >= 3`:
/// the fixed point of `x = 1/(m - x)` for `m = 3, 4`, else `1/(m - α)`.
pub fn ratio_bound_min_abs(m: i64, c: &SystemConstants) -> Interval {
    assert!(m >= 3);
    match m {
        3 => c.alpha.clone(),
        4 => &Interval::from_int(2) - &surd_enclosure(3, DEFAULT_BITS).unwrap(),
        _ => (-&c.alpha).shift(&int(m)).recip().unwrap(),
    }
}

/// Ratio bound `(J + 2)/(2J + 5)` for loop words whose 2-runs have length `<= J`.
pub fn ratio_bound_runs(j_max: u32) -> Rational {
    let j = j_max as i64;
    rat(j + 2, 2 * j + 5)
}

/// `|φ'_ω(x)| = 1/(q_n + x q_{n-1})²`.
pub fn deriv_at(w: &Word, x: &Rational) -> Rational {
    let den = Rational::from_integer(w.q_n().clone()) + x * Rational::from_integer(w.q_prev().clone());
    assert!(!den.is_zero(), "x outside the domain of the word");
    (&den * &den).recip()
}

/// `(inf, sup)` of `|φ'_ω|` over its domain, attained at the endpoints.
pub fn norm_bounds(w: &Word) -> (Rational, Rational) {
    let (a, b) = w.domain();
    let da = deriv_at(w, &a);
    let db = deriv_at(w, &b);
    if da <= db {
        (da, db)
    } else {
        (db, da)
    }
}

/// `K_ω = sup |φ'_ω| / inf |φ'_ω|`.
pub fn distortion_constant(w: &Word) -> Rational {
    let (lo, hi) = norm_bounds(w);
    hi / lo
}

/// `G_ω(x) = |(q_n + x q_{n-1})/(q_{n+1} + x q_n)|` for `ω` of length `n + 1 >= 2`.
pub fn g_function(w: &Word, x: &Rational) -> Rational {
    let n1 = w.len();
    assert!(n1 >= 2);
    let q = |i: usize| Rational::from_integer(w.q()[i].clone());
    let num = q(n1 - 1) + x * q(n1 - 2);
    let den = q(n1) + x * q(n1 - 1);
    (num / den).abs()
}

/// `|q_{n-1}/q_n|` at the end of the word.
pub fn final_ratio(w: &Word) -> Rational {
    Rational::new(w.q_prev().clone(), w.q_n().clone()).abs()
}

/// A letter whose constants are requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LetterRef {
    /// A digit of `Φ_F`.
    Digit(i64),
    /// A letter of the vertex IFS.
    Loop(LoopLetter),
}

/// `(m_b, M_b)`. Digits of `Φ_F` use `M = (3/2/(|b| - α))²`,
/// `m = (2/3/(|b| + α))²`; vertex letters use the distortion `25/9`.
pub fn letter_constants(b: LetterRef, c: &SystemConstants) -> Result<(Interval, Interval), SystemError> {
    match b {
        LetterRef::Digit(d) => {
            if d.abs() < 3 {
                return Err(SystemError::NotInF(d));
            }
            let a = int(d.abs());
            let big = (-&c.alpha).shift(&a).recip().unwrap().scale(&rat(3, 2)).square();
            let small = c.alpha.shift(&a).recip().unwrap().scale(&rat(2, 3)).square();
            Ok((small, big))
        }
        LetterRef::Loop(l) => {
            let k = Interval::point(c.k_global.clone());
            let kinv = k.recip().unwrap();
            let kk = int(l.k);
            let sup_k = Interval::point((&kk - rat(1, 2)).pow(2).recip());
            let inf_k = Interval::point((&kk + rat(1, 2)).pow(2).recip());
            if l.j == 0 {
                return Ok((&kinv * &inf_k, &k * &sup_k));
            }
            let big = (&k * &sup_k).scale(&rat(1, 4).pow(l.j as i32));
            let s2 = surd_enclosure(2, DEFAULT_BITS).unwrap();
            let growth = s2.shift(&int(1)).powi(l.j as i32 - 1).unwrap();
            let factor = (&s2.shift(&rat(3, 2)) * &growth).square().recip().unwrap();
            let small = &(&kinv * &factor) * &inf_k;
            Ok((small, big))
        }
    }
}

fn loops_for(m: i64, sign: i64) -> Vec<LoopLetter> {
    let mut v: Vec<LoopLetter> = (1..=m as u32).map(|j| LoopLetter::new(sign, j, m)).collect();
    v.extend((3..m).rev().map(|l| LoopLetter::new(sign, m as u32, l)));
    v
}

/// The first `budget` letters of the vertex IFS in the fixed ordering.
pub fn vertex_alphabet(budget: usize) -> Vec<LoopLetter> {
    let mut out: Vec<LoopLetter> = [-3, 3, -4, 4].iter().map(|&b| LoopLetter::plain(b)).collect();
    let mut m = 3;
    while out.len() < budget {
        if m >= 5 {
            out.push(LoopLetter::plain(-m));
            out.push(LoopLetter::plain(m));
        }
        out.extend(loops_for(m, -1));
        out.extend(loops_for(m, 1));
        m += 1;
    }
    out.truncate(budget);
    out
}

/// Longest run of `±2` inside the letters.
pub fn max_run(letters: &[LoopLetter]) -> u32 {
    letters.iter().map(|l| l.j).max().unwrap_or(0)
}

/// Digits `2^r` as a word (domain `[0, 1/2]`).
pub fn twos(r: usize) -> Word {
    Word::nicf(vec![2; r]).unwrap()
}

/// `q_r` of the word `2^r`.
pub fn q_of_twos(r: usize) -> BigInt {
    if r == 0 {
        return BigInt::from(1);
    }
    twos(r).q_n().clone()
}
