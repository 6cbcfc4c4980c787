//! Similarity graph systems used as worked examples: their first-return loop
//! systems, closed-form loop pressures and the vertex-matrix pressure.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{DimensionInterval, PressureBounds, PressureError, SimilarityIfs, System, BITS};
use crate::exactnum::{from_f64, int, ln_interval, pow_enclosure, rat, Interval, Rational};
use crate::symbolic::{appendix_cycle4, appendix_triangle6, first_return_loops, GraphSystem};

/// Loops longer than the enumeration cut-off, bounded through the paths that
/// reached the cut-off without returning.
#[derive(Debug, Clone)]
pub struct LoopTail {
    /// `(vertex, ratio product)` of every unreturned path of maximal length.
    frontier: Vec<(usize, Rational)>,
    /// Edges between vertices other than the base vertex.
    internal: Vec<(usize, Rational)>,
    /// Edges back into the base vertex.
    exits: Vec<(usize, Rational)>,
}

impl LoopTail {
    /// Upper bound of `Σ r_τ^t` over loops longer than the cut-off:
    /// `(Σ_u F_u) · e / (1 - c)` with `c` the largest internal row sum and `e`
    /// the largest exit sum.
    pub fn bound(&self, t: &Rational) -> Result<Rational, PressureError> {
        if self.frontier.is_empty() {
            return Ok(Rational::zero());
        }
        if !t.is_positive() {
            return Err(PressureError::Divergent { theta: Rational::zero() });
        }
        let pw = |r: &Rational| -> Result<Rational, PressureError> { Ok(pow_enclosure(r, t, BITS)?.hi().clone()) };
        let mut f = Rational::zero();
        for (_, r) in &self.frontier {
            f += pw(r)?;
        }
        let rows = |edges: &[(usize, Rational)]| -> Result<Rational, PressureError> {
            let mut by: BTreeMap<usize, Rational> = BTreeMap::new();
            for (u, r) in edges {
                *by.entry(*u).or_insert_with(Rational::zero) += pw(r)?;
            }
            Ok(by.into_values().max().unwrap_or_else(Rational::zero))
        };
        let c = rows(&self.internal)?;
        let e = rows(&self.exits)?;
        if c >= Rational::one() {
            return Err(PressureError::Invalid(format!("internal row sum {c} >= 1 at t = {t}")));
        }
        Ok(f * e / (Rational::one() - c))
    }
}

/// One of the two worked graph examples with edge contraction ratios.
#[derive(Debug, Clone)]
pub struct AppendixExample {
    pub name: String,
    pub graph: GraphSystem<char>,
    pub ratios: BTreeMap<char, Rational>,
}

/// Build the named example. Every edge needs a ratio in `(0, 1)`.
pub fn appendix_example(name: &str, ratios: &BTreeMap<char, Rational>) -> Result<AppendixExample, PressureError> {
    let graph = match name {
        "cycle4" => appendix_cycle4(),
        "triangle6" => appendix_triangle6(),
        _ => return Err(PressureError::UnknownExample(name.to_string())),
    };
    let mut out = BTreeMap::new();
    for l in graph.labels() {
        let r = ratios
            .get(&l)
            .ok_or_else(|| PressureError::Invalid(format!("missing ratio for edge {l}")))?;
        if !r.is_positive() || *r >= Rational::one() {
            return Err(PressureError::NotContraction(r.to_string()));
        }
        out.insert(l, r.clone());
    }
    Ok(AppendixExample { name: name.to_string(), graph, ratios: out })
}

/// Same ratio on every edge.
pub fn uniform(name: &str, ratio: &Rational) -> Result<AppendixExample, PressureError> {
    let labels: Vec<char> = match name {
        "cycle4" => appendix_cycle4().labels(),
        "triangle6" => appendix_triangle6().labels(),
        _ => return Err(PressureError::UnknownExample(name.to_string())),
    };
    let map = labels.into_iter().map(|l| (l, ratio.clone())).collect();
    appendix_example(name, &map)
}

impl AppendixExample {
    /// First-return loops at `v` up to `max_len`, as label strings.
    pub fn loops(&self, v: &str, max_len: usize) -> Result<BTreeSet<String>, PressureError> {
        let vi = self.vertex(v)?;
        Ok(first_return_loops(&self.graph, vi, max_len)
            .into_values()
            .flatten()
            .map(|w| w.into_iter().collect())
            .collect())
    }

    fn vertex(&self, v: &str) -> Result<usize, PressureError> {
        self.graph
            .vertex(v)
            .map_err(|_| PressureError::Invalid(format!("unknown vertex {v}")))
    }

    fn ratio(&self, word: &str) -> Rational {
        word.chars().fold(Rational::one(), |acc, c| acc * &self.ratios[&c])
    }

    /// The loop system at `v`: loops up to `max_len` enumerated, the rest
    /// bounded by a frontier remainder.
    pub fn vertex_ifs(&self, v: &str, max_len: usize) -> Result<SimilarityIfs, PressureError> {
        let vi = self.vertex(v)?;
        let edges = self.graph.edges();
        let mut loops = Vec::new();
        let mut frontier: Vec<(usize, Rational)> = edges
            .iter()
            .filter(|e| e.initial == vi)
            .map(|e| (e.terminal, self.ratios[&e.label].clone()))
            .collect();
        for len in 1..=max_len {
            let mut next = Vec::new();
            for (at, r) in frontier {
                if at == vi {
                    loops.push(r);
                } else if len < max_len {
                    for e in edges.iter().filter(|e| e.initial == at) {
                        next.push((e.terminal, &r * &self.ratios[&e.label]));
                    }
                } else {
                    next.push((at, r));
                }
            }
            frontier = next;
        }
        let internal = edges
            .iter()
            .filter(|e| e.initial != vi && e.terminal != vi)
            .map(|e| (e.initial, self.ratios[&e.label].clone()))
            .collect();
        let exits = edges
            .iter()
            .filter(|e| e.initial != vi && e.terminal == vi)
            .map(|e| (e.initial, self.ratios[&e.label].clone()))
            .collect();
        let tail = LoopTail { frontier, internal, exits };
        SimilarityIfs::with_tail(loops, Some(tail))
    }

    /// Pressure bracket of the loop system at `v`.
    pub fn loop_pressure(&self, v: &str, t: &Rational, max_len: usize) -> Result<PressureBounds, PressureError> {
        System::Similarity(self.vertex_ifs(v, max_len)?).pressure_bounds(t, 1)
    }

    /// Closed-form `P_{E_v}(t)` where one is known.
    pub fn closed_form(&self, v: &str, t: &Rational) -> Result<Option<Interval>, PressureError> {
        let p = |w: &str| pow_enclosure(&self.ratio(w), t, BITS);
        let one = Interval::one();
        let value = match (self.name.as_str(), v) {
            ("cycle4", "v") => {
                let r = p("24")?;
                p("123")?.checked_div(&(&one - &r))?
            }
            ("cycle4", "w") | ("cycle4", "z") => &p("123")? + &p("24")?,
            ("triangle6", "v") => {
                let num = &(&p("ab")? + &p("acf")?) + &(&p("ef")? + &p("edb")?);
                num.checked_div(&(&one - &p("cd")?))?
            }
            _ => return Ok(None),
        };
        Ok(Some(ln_interval(&value, BITS)?))
    }

    /// Vertex matrix `M_t(u, w) = Σ_{e: u→w} r_e^t`.
    fn matrix(&self, t: &Rational) -> Result<Vec<Vec<Interval>>, PressureError> {
        let n = self.graph.vertices().len();
        let mut m = vec![vec![Interval::zero(); n]; n];
        for e in self.graph.edges() {
            let w = pow_enclosure(&self.ratios[&e.label], t, BITS)?;
            m[e.initial][e.terminal] = &m[e.initial][e.terminal] + &w;
        }
        Ok(m)
    }

    /// `P(t) = ln ρ(M_t)` enclosed by Collatz–Wielandt quotients.
    pub fn gdms_pressure(&self, t: &Rational) -> Result<Interval, PressureError> {
        let m = self.matrix(t)?;
        let n = m.len();
        let mf: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|x| x.mid_f64()).collect()).collect();
        let mut x = vec![1.0f64; n];
        for _ in 0..500 {
            // the shifted iteration converges also for periodic matrices
            let mut y: Vec<f64> = (0..n).map(|i| x[i] + (0..n).map(|j| mf[i][j] * x[j]).sum::<f64>()).collect();
            let s: f64 = y.iter().sum();
            y.iter_mut().for_each(|v| *v /= s);
            x = y;
        }
        let xr: Vec<Rational> = x.iter().map(|&v| from_f64(v.max(1e-300))).collect();
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for i in 0..n {
            let mut a = Rational::zero();
            let mut b = Rational::zero();
            for j in 0..n {
                a += m[i][j].lo() * &xr[j];
                b += m[i][j].hi() * &xr[j];
            }
            let (a, b) = (a / &xr[i], b / &xr[i]);
            lo = Some(lo.map_or(a.clone(), |l| l.min(a)));
            hi = Some(hi.map_or(b.clone(), |h| h.max(b)));
        }
        let rho = Interval::new(lo.unwrap(), hi.unwrap())?;
        Ok(ln_interval(&rho, BITS)?)
    }

    /// Zero of `t ↦ ln ρ(M_t)` bracketed by dyadic bisection.
    pub fn gdms_dim(&self, tol: f64) -> Result<DimensionInterval, PressureError> {
        let mut range = Rational::one();
        while self.gdms_pressure(&range)?.hi().is_positive() {
            range *= int(2);
            if range > int(1 << 10) {
                return Err(PressureError::Invalid("no sign change below 1024".into()));
            }
        }
        let steps = (range.to_f64().unwrap() * 4.0 / tol).log2().ceil() as usize;
        let bisect = |pick_lo: bool| -> Result<Rational, PressureError> {
            let (mut a, mut b) = (Rational::zero(), range.clone());
            for _ in 0..steps {
                let mid = (&a + &b) * rat(1, 2);
                let p = self.gdms_pressure(&mid)?;
                let up = if pick_lo { !p.lo().is_negative() } else { p.hi().is_positive() };
                if up {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            Ok(if pick_lo { a } else { b })
        };
        Ok(DimensionInterval { lo: bisect(true)?, hi: bisect(false)?, depth: 1, target_tol: tol })
    }
}
