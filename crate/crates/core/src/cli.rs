//! The `nicfdim` command line: alphabet-spec parsing and the subcommands.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_traits::{ToPrimitive, Zero};

use crate::cf_core::{convergents, nicf_digits, singularize_full, Word};
use crate::exactnum::{f64_down, f64_up, Rational};
use crate::ledger;
use crate::nicf_system::vertex_alphabet;
use crate::pressure_dim::{self, appendix, PressureError};
use crate::spectrum::{self, SystemKind};
use crate::symbolic::AlphabetSelection;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

/// Parse failure with the byte offset of the offending input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for SpecError {}

const NEED_THREE: &str = "digits |b| ≥ 3 required for Φ_F";

struct Cursor<'a> {
    /// Non-whitespace characters with their byte offsets.
    toks: Vec<(usize, char)>,
    pos: usize,
    len: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        let toks = s.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
        Cursor { toks, pos: 0, len: s.len(), _src: s }
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |t| t.0)
    }

    fn peek(&self) -> Option<char> {
        self.toks.get(self.pos).map(|t| t.1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SpecError> {
        Err(SpecError { offset: self.offset(), message: msg.into() })
    }

    fn eat(&mut self, lit: &str) -> bool {
        let n = lit.chars().count();
        let ok = self.toks.len() >= self.pos + n
            && self.toks[self.pos..self.pos + n].iter().map(|t| t.1).eq(lit.chars());
        if ok {
            self.pos += n;
        }
        ok
    }

    fn expect(&mut self, lit: &str) -> Result<(), SpecError> {
        if self.eat(lit) {
            Ok(())
        } else {
            self.err(format!("expected `{lit}`"))
        }
    }

    fn int(&mut self, allow_negative: bool) -> Result<(i64, usize), SpecError> {
        let start = self.offset();
        let mut text = String::new();
        if self.peek() == Some('-') {
            if !allow_negative {
                return self.err("negative bound not allowed here");
            }
            text.push('-');
            self.pos += 1;
        }
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            text.push(c);
            self.pos += 1;
        }
        if text.is_empty() || text == "-" {
            return self.err("expected an integer");
        }
        text.parse()
            .map(|v| (v, start))
            .map_err(|_| SpecError { offset: start, message: "integer out of range".into() })
    }
}

enum Item {
    Digit(i64),
    Range(i64, i64),
    Cofinite(i64, i64),
}

fn item(c: &mut Cursor) -> Result<(Item, usize), SpecError> {
    let start = c.offset();
    if c.eat("absmin:") {
        let (lo, at) = c.int(false)?;
        if lo < 3 {
            return Err(SpecError { offset: at, message: NEED_THREE.into() });
        }
        c.expect(":")?;
        let (trunc, at) = c.int(false)?;
        if trunc < lo {
            return Err(SpecError { offset: at, message: format!("truncation {trunc} below {lo}") });
        }
        return Ok((Item::Cofinite(lo, trunc), start));
    }
    if c.eat("abs:") {
        let (lo, at) = c.int(false)?;
        if lo < 3 {
            return Err(SpecError { offset: at, message: NEED_THREE.into() });
        }
        c.expect("..")?;
        let (hi, at) = c.int(false)?;
        if hi < lo {
            return Err(SpecError { offset: at, message: format!("empty range {lo}..{hi}") });
        }
        return Ok((Item::Range(lo, hi), start));
    }
    let (b, at) = c.int(true)?;
    if b.abs() < 3 {
        return Err(SpecError { offset: at, message: NEED_THREE.into() });
    }
    Ok((Item::Digit(b), start))
}

/// Parse `item ("," item)*` with `item := INT | abs:LO..HI | absmin:LO:N`.
pub fn parse_alphabet_spec(s: &str) -> Result<AlphabetSelection, SpecError> {
    let mut c = Cursor::new(s);
    let mut items = vec![item(&mut c)?];
    while c.peek().is_some() {
        c.expect(",")?;
        items.push(item(&mut c)?);
    }
    if items.len() == 1 {
        match items[0].0 {
            Item::Range(lo, hi) => return Ok(AlphabetSelection::AbsRange { lo, hi }),
            Item::Cofinite(lo, trunc) => return Ok(AlphabetSelection::Cofinite { lo, trunc }),
            Item::Digit(_) => {}
        }
    }
    let mut letters = Vec::new();
    for (it, at) in items {
        let new: Vec<i64> = match it {
            Item::Digit(b) => vec![b],
            Item::Range(lo, hi) => (lo..=hi).flat_map(|k| [-k, k]).collect(),
            Item::Cofinite(..) => {
                return Err(SpecError { offset: at, message: "a cofinite item must stand alone".into() })
            }
        };
        for b in new {
            if letters.contains(&b) {
                return Err(SpecError { offset: at, message: format!("repeated digit {b}") });
            }
            letters.push(b);
        }
    }
    Ok(AlphabetSelection::Explicit(letters))
}

/// Exact rational from `p/q`, an integer, or a finite decimal.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if s.contains('/') {
        return s.parse::<Rational>().map_err(|e| format!("bad rational `{s}`: {e}"));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    let ok = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if (whole.is_empty() && frac.is_empty()) || !ok(whole) || !ok(frac) {
        return Err(format!("bad number `{s}`"));
    }
    let digits = format!("{whole}{frac}");
    let n: num_bigint::BigInt = if digits.is_empty() { 0.into() } else { digits.parse().unwrap() };
    let den = num_bigint::BigInt::from(10).pow(frac.len() as u32);
    let r = Rational::new(n, den);
    Ok(if neg { -r } else { r })
}

/// Points of a `t` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<Rational>);

/// `a:b:step` as the exact points `a, a + step, ... <= b`.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid `{s}` must be a:b:step"));
    }
    let a = parse_rational(parts[0])?;
    let b = parse_rational(parts[1])?;
    let step = parse_rational(parts[2])?;
    if step <= Rational::zero() {
        return Err("grid step must be positive".into());
    }
    let mut out = Vec::new();
    let mut t = a;
    while t <= b {
        out.push(t.clone());
        t += &step;
        if out.len() > 100_000 {
            return Err("grid too long".into());
        }
    }
    Ok(Grid(out))
}

fn parse_rcf(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|p| match p.trim().parse::<i64>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(format!("bad RCF digit `{}`", p.trim())),
        })
        .collect()
}

#[derive(Parser, Debug)]
#[command(name = "nicfdim", about = "Dimension bounds for nearest-integer continued fraction systems")]
pub struct Cli {
    /// Worker threads for partition sums.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Digit operations.
    Nicf {
        #[command(subcommand)]
        cmd: NicfCmd,
    },
    /// Certified dimension interval as JSON.
    Dim {
        #[arg(long, value_parser = parse_alphabet_spec, allow_hyphen_values = true)]
        alphabet: AlphabetSelection,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
    /// Pressure bounds on a grid as CSV.
    Pressure {
        #[arg(long, value_parser = parse_alphabet_spec, allow_hyphen_values = true)]
        alphabet: AlphabetSelection,
        #[arg(long = "t-grid", value_parser = parse_grid)]
        t_grid: Grid,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Greedy construction of a prescribed dimension.
    Spectrum {
        #[arg(long)]
        target: f64,
        #[arg(long, default_value = "phi_f")]
        system: SystemKind,
        #[arg(long, default_value_t = 40)]
        budget: usize,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Re-verify the proof inequalities.
    Ledger {
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// List the first letters of the vertex IFS.
    VertexLetters {
        #[arg(long)]
        count: usize,
    },
    /// Compare closed forms with loop-pressure enclosures.
    Appendix {
        #[arg(long)]
        example: String,
        #[arg(long, value_parser = parse_rational, default_value = "1/3")]
        ratio: Rational,
        #[arg(long = "t-grid", value_parser = parse_grid)]
        t_grid: Grid,
        #[arg(long = "max-len", default_value_t = 14)]
        max_len: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum NicfCmd {
    /// NICF digits of a rational in [-1/2, 1/2].
    Expand {
        #[arg(value_parser = parse_rational, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, default_value_t = 20)]
        digits: usize,
    },
    /// Convergents p_n/q_n of the NICF expansion.
    Convergents {
        #[arg(value_parser = parse_rational, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, default_value_t = 20)]
        digits: usize,
    },
    /// Singularize an RCF digit block.
    Singularize {
        #[arg(long)]
        rcf: String,
    },
}

/// Failure inside a command, mapped to an exit code.
#[derive(Debug)]
pub enum CmdError {
    Input(String),
    Indeterminate(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

impl From<PressureError> for CmdError {
    fn from(e: PressureError) -> Self {
        match e {
            PressureError::UnknownExample(_) | PressureError::Invalid(_) | PressureError::NotContraction(_) => {
                CmdError::Input(e.to_string())
            }
            other => CmdError::Indeterminate(other.to_string()),
        }
    }
}

fn csv_num_down(r: &Rational) -> String {
    format!("{}", f64_down(r))
}

fn csv_num_up(r: &Rational) -> String {
    format!("{}", f64_up(r))
}

fn t_str(t: &Rational) -> String {
    format!("{}", t.to_f64().unwrap())
}

fn nicf(cmd: NicfCmd, out: &mut dyn Write) -> Result<i32, CmdError> {
    match cmd {
        NicfCmd::Expand { x, digits } => {
            let d = nicf_digits(&x, digits).map_err(|e| CmdError::Input(e.to_string()))?;
            writeln!(out, "{}", serde_json::to_string(&d).unwrap())?;
        }
        NicfCmd::Convergents { x, digits } => {
            let d = nicf_digits(&x, digits).map_err(|e| CmdError::Input(e.to_string()))?;
            writeln!(out, "n\tp_n\tq_n")?;
            if d.is_empty() {
                writeln!(out, "0\t0\t1")?;
            } else {
                let w = Word::new(d).map_err(|e| CmdError::Input(e.to_string()))?;
                for (n, (p, q)) in convergents(&w).iter().enumerate() {
                    writeln!(out, "{n}\t{p}\t{q}")?;
                }
            }
        }
        NicfCmd::Singularize { rcf } => {
            let a = parse_rcf(&rcf).map_err(CmdError::Input)?;
            let (b0, digits) = singularize_full(&a);
            if b0 != 0 {
                writeln!(out, "{}", serde_json::json!({ "integer_part": b0, "digits": digits }))?;
            } else {
                writeln!(out, "{}", serde_json::to_string(&digits).unwrap())?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn pressure_csv(f: &AlphabetSelection, grid: &[Rational], depth: usize) -> Result<String, CmdError> {
    let mut s = String::from("t,pressure_lo,pressure_hi\n");
    for t in grid {
        match pressure_dim::pressure_bounds(f, t, depth) {
            Ok(b) => s.push_str(&format!("{},{},{}\n", t_str(t), csv_num_down(&b.lo), csv_num_up(&b.hi))),
            Err(PressureError::Divergent { .. }) => s.push_str(&format!("{},inf,inf\n", t_str(t))),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(s)
}

fn appendix_csv(example: &str, ratio: &Rational, grid: &[Rational], max_len: usize) -> Result<(String, bool), CmdError> {
    let ex = appendix::uniform(example, ratio)?;
    let mut s = String::from("vertex,t,closed_lo,closed_hi,enclosure_lo,enclosure_hi,contained\n");
    let mut all = true;
    for v in ex.graph.vertices().to_vec() {
        for t in grid {
            let Some(closed) = ex.closed_form(&v, t)? else { continue };
            let b = ex.loop_pressure(&v, t, max_len)?;
            let ok = &b.lo <= closed.lo() && closed.hi() <= &b.hi;
            all &= ok;
            s.push_str(&format!(
                "{v},{},{},{},{},{},{ok}\n",
                t_str(t),
                csv_num_down(closed.lo()),
                csv_num_up(closed.hi()),
                csv_num_down(&b.lo),
                csv_num_up(&b.hi)
            ));
        }
    }
    Ok((s, all))
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, CmdError> {
    match cmd {
        Command::Nicf { cmd } => nicf(cmd, out),
        Command::Dim { alphabet, depth, tol } => {
            if !(tol > 0.0) {
                return Err(CmdError::Input("tolerance must be positive".into()));
            }
            let d = pressure_dim::dim_interval(&alphabet, depth, tol);
            writeln!(out, "{}", serde_json::to_string(&d).unwrap())?;
            Ok(if d.achieved() { EXIT_OK } else { EXIT_INDETERMINATE })
        }
        Command::Pressure { alphabet, t_grid, depth, csv } => {
            let s = pressure_csv(&alphabet, &t_grid.0, depth)?;
            match csv {
                Some(p) => std::fs::write(p, s)?,
                None => out.write_all(s.as_bytes())?,
            }
            Ok(EXIT_OK)
        }
        Command::Spectrum { target, system, budget, depth } => {
            if budget == 0 {
                return Err(CmdError::Input("budget must be at least 1".into()));
            }
            let tr = spectrum::construct(target, system, budget, depth)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&tr).unwrap())?;
            Ok(EXIT_OK)
        }
        Command::Ledger { case, json } => {
            let res = match case {
                Some(id) => ledger::run_case(&id).map(|r| vec![r]),
                None => ledger::run_all(),
            };
            let res = match res {
                Ok(r) => r,
                Err(e @ ledger::LedgerError::UnknownCase(_)) => return Err(CmdError::Input(e.to_string())),
                Err(e) => return Err(CmdError::Indeterminate(e.to_string())),
            };
            let text = if json { ledger::render_json(&res) } else { ledger::render_table(&res) };
            writeln!(out, "{}", text.trim_end())?;
            Ok(EXIT_OK)
        }
        Command::VertexLetters { count } => {
            for (i, l) in vertex_alphabet(count).iter().enumerate() {
                writeln!(out, "{}\t{l}\t{:?}", i + 1, l.digits())?;
            }
            Ok(EXIT_OK)
        }
        Command::Appendix { example, ratio, t_grid, max_len } => {
            let (s, all) = appendix_csv(&example, &ratio, &t_grid.0, max_len)?;
            out.write_all(s.as_bytes())?;
            Ok(if all { EXIT_OK } else { EXIT_INDETERMINATE })
        }
    }
}

/// Run the tool on the given arguments (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(err, "{}", e.render());
            return if code == 0 { EXIT_OK } else { EXIT_PARSE };
        }
    };
    if let Some(k) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
    match dispatch(cli.cmd, out) {
        Ok(code) => code,
        Err(CmdError::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_PARSE
        }
        Err(CmdError::Indeterminate(m)) => {
            let _ = writeln!(err, "indeterminate: {m}");
            EXIT_INDETERMINATE
        }
        Err(CmdError::Io(e)) => {
            let _ = writeln!(err, "io error: {e}");
            1
        }
    }
}
