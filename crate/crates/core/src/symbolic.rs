//! Directed multigraphs, incidence predicates and word enumeration.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolicError {
    #[error("unknown letter {0}")]
    UnknownLetter(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
}

/// Anything that decides which letter may follow which.
pub trait Incidence<L> {
    fn contains(&self, e: &L) -> bool;
    fn allowed(&self, e: &L, f: &L) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge<L> {
    pub label: L,
    pub initial: usize,
    pub terminal: usize,
}

/// Finite multigraph `(V, E, i, t)` with `A(e, f) = [t(e) = i(f)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSystem<L> {
    vertices: Vec<String>,
    edges: Vec<Edge<L>>,
}

impl<L: Clone + PartialEq + fmt::Debug> GraphSystem<L> {
    pub fn new(vertices: &[&str]) -> Self {
        GraphSystem {
            vertices: vertices.iter().map(|s| s.to_string()).collect(),
            edges: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, label: L, from: &str, to: &str) -> Result<(), SymbolicError> {
        let initial = self.vertex(from)?;
        let terminal = self.vertex(to)?;
        self.edges.push(Edge { label, initial, terminal });
        Ok(())
    }

    pub fn vertex(&self, name: &str) -> Result<usize, SymbolicError> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| SymbolicError::UnknownVertex(name.to_string()))
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<L>] {
        &self.edges
    }

    pub fn edge(&self, label: &L) -> Option<&Edge<L>> {
        self.edges.iter().find(|e| &e.label == label)
    }

    pub fn labels(&self) -> Vec<L> {
        self.edges.iter().map(|e| e.label.clone()).collect()
    }

    pub fn initial(&self, label: &L) -> Option<usize> {
        self.edge(label).map(|e| e.initial)
    }

    pub fn terminal(&self, label: &L) -> Option<usize> {
        self.edge(label).map(|e| e.terminal)
    }

    /// Every edge has a successor and every vertex an outgoing edge.
    pub fn is_well_formed(&self) -> bool {
        (0..self.vertices.len()).all(|v| self.edges.iter().any(|e| e.initial == v))
    }

    /// Every vertex reaches every other vertex.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|s| {
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for e in self.edges.iter().filter(|e| e.initial == u) {
                    if !seen[e.terminal] {
                        seen[e.terminal] = true;
                        queue.push_back(e.terminal);
                    }
                }
            }
            seen.iter().all(|&b| b)
        })
    }

    /// `i(ω) = i(ω_1)` and `t(ω) = t(ω_n)` for a label word.
    pub fn word_endpoints(&self, w: &[L]) -> Option<(usize, usize)> {
        Some((self.initial(w.first()?)?, self.terminal(w.last()?)?))
    }
}

impl<L: Clone + PartialEq + fmt::Debug> Incidence<L> for GraphSystem<L> {
    fn contains(&self, e: &L) -> bool {
        self.edge(e).is_some()
    }

    fn allowed(&self, e: &L, f: &L) -> bool {
        match (self.edge(e), self.edge(f)) {
            (Some(a), Some(b)) => a.terminal == b.initial,
            _ => false,
        }
    }
}

/// The NICF matrix on signed digits `|e| >= 2`: 2 must be followed by a
/// positive digit and -2 by a negative one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NicfMatrix;

impl Incidence<i64> for NicfMatrix {
    fn contains(&self, e: &i64) -> bool {
        e.abs() >= 2
    }

    fn allowed(&self, e: &i64, f: &i64) -> bool {
        match *e {
            2 => *f > 0,
            -2 => *f < 0,
            _ => true,
        }
    }
}

pub fn is_admissible<L: fmt::Debug, G: Incidence<L>>(w: &[L], g: &G) -> Result<bool, SymbolicError> {
    if let Some(e) = w.iter().find(|e| !g.contains(e)) {
        return Err(SymbolicError::UnknownLetter(format!("{e:?}")));
    }
    Ok(w.windows(2).all(|p| g.allowed(&p[0], &p[1])))
}

/// Visit every admissible word of length `n` over `letters` in lexicographic
/// order of the given letter order.
pub fn for_each_word<L: Clone, G: Incidence<L>>(g: &G, letters: &[L], n: usize, mut f: impl FnMut(&[L])) {
    let mut buf: Vec<L> = Vec::with_capacity(n);
    fn rec<L: Clone, G: Incidence<L>>(g: &G, letters: &[L], n: usize, buf: &mut Vec<L>, f: &mut impl FnMut(&[L])) {
        if buf.len() == n {
            f(buf);
            return;
        }
        for l in letters {
            if buf.last().map_or(true, |p| g.allowed(p, l)) {
                buf.push(l.clone());
                rec(g, letters, n, buf, f);
                buf.pop();
            }
        }
    }
    rec(g, letters, n, &mut buf, &mut f);
}

/// All admissible words of length `n`; `n = 0` yields only the empty word.
pub fn enumerate_words<L: Clone, G: Incidence<L>>(g: &G, letters: &[L], n: usize) -> Vec<Vec<L>> {
    let mut out = Vec::new();
    for_each_word(g, letters, n, |w| out.push(w.to_vec()));
    out
}

/// Number of admissible words of length `n` via powers of the restricted
/// incidence matrix.
pub fn count_words<L, G: Incidence<L>>(g: &G, letters: &[L], n: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    let m = letters.len();
    let mut v = vec![1u128; m];
    for _ in 1..n {
        let mut next = vec![0u128; m];
        for (i, e) in letters.iter().enumerate() {
            for (j, f) in letters.iter().enumerate() {
                if g.allowed(e, f) {
                    next[j] += v[i];
                }
            }
        }
        v = next;
    }
    v.iter().sum()
}

/// First-return loops at `v` up to length `max_len`, grouped by length and
/// listed in edge order within each length.
pub fn first_return_loops<L: Clone + PartialEq + fmt::Debug>(
    g: &GraphSystem<L>,
    v: usize,
    max_len: usize,
) -> BTreeMap<usize, Vec<Vec<L>>> {
    let mut out: BTreeMap<usize, Vec<Vec<L>>> = BTreeMap::new();
    // breadth first: paths leaving v that have not come back yet
    let mut frontier: Vec<(Vec<usize>, usize)> = Vec::new();
    for (k, e) in g.edges.iter().enumerate() {
        if e.initial == v {
            frontier.push((vec![k], e.terminal));
        }
    }
    let mut len = 1;
    while !frontier.is_empty() && len <= max_len {
        let mut next = Vec::new();
        for (path, at) in frontier {
            if at == v {
                out.entry(len)
                    .or_default()
                    .push(path.iter().map(|&k| g.edges[k].label.clone()).collect());
                continue;
            }
            for (k, e) in g.edges.iter().enumerate() {
                if e.initial == at {
                    let mut p = path.clone();
                    p.push(k);
                    next.push((p, e.terminal));
                }
            }
        }
        frontier = next;
        len += 1;
    }
    out
}

/// Cycle of Appendix Example 1: `1: v→w, 2: w→z, 3: z→v, 4: z→w`.
pub fn appendix_cycle4() -> GraphSystem<char> {
    let mut g = GraphSystem::new(&["v", "w", "z"]);
    for (l, a, b) in [('1', "v", "w"), ('2', "w", "z"), ('3', "z", "v"), ('4', "z", "w")] {
        g.add_edge(l, a, b).unwrap();
    }
    g
}

/// Complete triangle with one edge each way between every pair of vertices.
pub fn appendix_triangle6() -> GraphSystem<char> {
    let mut g = GraphSystem::new(&["v", "w", "z"]);
    for (l, a, b) in [
        ('a', "v", "w"),
        ('b', "w", "v"),
        ('c', "w", "z"),
        ('d', "z", "w"),
        ('e', "v", "z"),
        ('f', "z", "v"),
    ] {
        g.add_edge(l, a, b).unwrap();
    }
    g
}

/// A set of NICF digits `|b| >= 3` for which the full shift is considered.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AlphabetSelection {
    /// Letters in the order given.
    Explicit(Vec<i64>),
    /// `lo <= |b| <= hi`, ordered `-lo, lo, -(lo+1), lo+1, ...`.
    AbsRange { lo: i64, hi: i64 },
    /// `|b| >= lo`; letters with `|b| <= trunc` are enumerated, the rest is
    /// accounted for by a tail bound.
    Cofinite { lo: i64, trunc: i64 },
}

impl AlphabetSelection {
    pub fn explicit(letters: Vec<i64>) -> Result<Self, SymbolicError> {
        if letters.is_empty() {
            return Err(SymbolicError::InvalidAlphabet("empty alphabet".into()));
        }
        if let Some(b) = letters.iter().find(|b| b.abs() < 3) {
            return Err(SymbolicError::InvalidAlphabet(format!("digit {b}: |b| >= 3 required")));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(b) = letters.iter().find(|b| !seen.insert(**b)) {
            return Err(SymbolicError::InvalidAlphabet(format!("repeated digit {b}")));
        }
        Ok(AlphabetSelection::Explicit(letters))
    }

    pub fn abs_range(lo: i64, hi: i64) -> Result<Self, SymbolicError> {
        if lo < 3 {
            return Err(SymbolicError::InvalidAlphabet("digits |b| >= 3 required".into()));
        }
        if hi < lo {
            return Err(SymbolicError::InvalidAlphabet(format!("empty range {lo}..{hi}")));
        }
        Ok(AlphabetSelection::AbsRange { lo, hi })
    }

    pub fn cofinite(lo: i64, trunc: i64) -> Result<Self, SymbolicError> {
        if lo < 3 {
            return Err(SymbolicError::InvalidAlphabet("digits |b| >= 3 required".into()));
        }
        if trunc < lo {
            return Err(SymbolicError::InvalidAlphabet(format!("truncation {trunc} below {lo}")));
        }
        Ok(AlphabetSelection::Cofinite { lo, trunc })
    }

    /// Enumerated (truncated) letters in selection order.
    pub fn letters(&self) -> Vec<i64> {
        match self {
            AlphabetSelection::Explicit(v) => v.clone(),
            AlphabetSelection::AbsRange { lo, hi } => paired(*lo, *hi),
            AlphabetSelection::Cofinite { lo, trunc } => paired(*lo, *trunc),
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, AlphabetSelection::Cofinite { .. })
    }

    /// Smallest `|b|` not enumerated but present (cofinite only).
    pub fn tail_start(&self) -> Option<i64> {
        match self {
            AlphabetSelection::Cofinite { trunc, .. } => Some(trunc + 1),
            _ => None,
        }
    }

    /// Smallest `|b|` of any letter.
    pub fn min_abs(&self) -> i64 {
        match self {
            AlphabetSelection::Explicit(v) => v.iter().map(|b| b.abs()).min().unwrap_or(i64::MAX),
            AlphabetSelection::AbsRange { lo, .. } | AlphabetSelection::Cofinite { lo, .. } => *lo,
        }
    }

    pub fn contains(&self, b: i64) -> bool {
        match self {
            AlphabetSelection::Explicit(v) => v.contains(&b),
            AlphabetSelection::AbsRange { lo, hi } => (*lo..=*hi).contains(&b.abs()),
            AlphabetSelection::Cofinite { lo, .. } => b.abs() >= *lo,
        }
    }

    /// `self ⊆ other` as sets of digits.
    pub fn is_subset_of(&self, other: &AlphabetSelection) -> bool {
        match self {
            AlphabetSelection::Cofinite { lo, .. } => match other {
                AlphabetSelection::Cofinite { lo: l2, .. } => l2 <= lo,
                _ => false,
            },
            _ => self.letters().iter().all(|&b| other.contains(b)),
        }
    }
}

fn paired(lo: i64, hi: i64) -> Vec<i64> {
    (lo..=hi).flat_map(|k| [-k, k]).collect()
}

/// Natural ordering of `Φ_F` letters: `-3, 3, -4, 4, ...`.
pub fn natural_order(count: usize) -> Vec<i64> {
    (3..).flat_map(|k| [-k, k]).take(count).collect()
}

impl fmt::Display for AlphabetSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphabetSelection::Explicit(v) => {
                let s: Vec<String> = v.iter().map(|b| b.to_string()).collect();
                write!(f, "{}", s.join(","))
            }
            AlphabetSelection::AbsRange { lo, hi } => write!(f, "abs:{lo}..{hi}"),
            AlphabetSelection::Cofinite { lo, trunc } => write!(f, "absmin:{lo}:{trunc}"),
        }
    }
}
