//! Specifications of total functions `ω → ω` that the analyses and
//! constructions consume.
//!
//! A [`FuncSpec`] is total on `[0, eval_bound()]`. Tables are total exactly on
//! their prefix; builtins and expressions are total everywhere (expression
//! arithmetic is floored/saturating so no input can fail).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FuncError {
    #[error("argument {arg} exceeds evaluation bound {bound}")]
    OutOfBounds { arg: u64, bound: u64 },
    #[error("empty table")]
    EmptyTable,
    #[error("expression parse error: {0}")]
    Parse(String),
    #[error("invalid block pattern: {0}")]
    BadPattern(String),
}

/// A total function on an initial segment of ω.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FuncSpec {
    /// Explicit values on `[0, len)`.
    TablePrefix { values: Vec<u64> },
    /// A named catalog function.
    Builtin { which: Builtin },
    /// An expression over `n` with floored arithmetic.
    Expr { text: String },
    /// A block function assembled from finite shapes laid out along a type
    /// string. Shape `i` is a map `[0,len) → [0,len)` given by local images.
    BlockPattern {
        shapes: Vec<Vec<u64>>,
        pattern: PatternSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// Euler's totient; 0 at 0.
    EulerPhi,
    /// Number of divisors; 0 at 0.
    DivisorCount,
    /// `n ↦ 2⌊n/2⌋`.
    DoubleHalf,
    /// The involution whose blocks tile ω as the structures J₀ + J₁ + ⋯
    /// (sizes 6, 8, 10, …; two fixed points per block).
    InvolutionG,
    Identity,
    Constant(u64),
}

/// How the type string of a [`FuncSpec::BlockPattern`] continues forever.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PatternSpec {
    /// The finite word repeated.
    Periodic { word: Vec<usize> },
    /// `d b e, d b b e, d b b b e, …` — runs of `b` of every length, each run
    /// flanked by `d` on the left and `e` on the right.
    IncreasingRuns { d: usize, b: usize, e: usize },
}

impl FuncSpec {
    pub fn table(values: Vec<u64>) -> Self {
        FuncSpec::TablePrefix { values }
    }

    pub fn builtin(which: Builtin) -> Self {
        FuncSpec::Builtin { which }
    }

    /// Parse an expression over `{+, -, *, /, %, sqrt, constants, n}`.
    pub fn expr(text: &str) -> Result<Self, FuncError> {
        parse_expr(text)?; // validate now, store source text
        Ok(FuncSpec::Expr {
            text: text.to_string(),
        })
    }

    pub fn block_pattern(shapes: Vec<Vec<u64>>, pattern: PatternSpec) -> Result<Self, FuncError> {
        for (i, s) in shapes.iter().enumerate() {
            if s.is_empty() {
                return Err(FuncError::BadPattern(format!("shape {i} is empty")));
            }
            if s.iter().any(|&v| v >= s.len() as u64) {
                return Err(FuncError::BadPattern(format!(
                    "shape {i} maps outside itself"
                )));
            }
        }
        let check_sym = |t: usize| -> Result<(), FuncError> {
            if t >= shapes.len() {
                Err(FuncError::BadPattern(format!("type index {t} out of range")))
            } else {
                Ok(())
            }
        };
        match &pattern {
            PatternSpec::Periodic { word } => {
                if word.is_empty() {
                    return Err(FuncError::BadPattern("empty period".into()));
                }
                for &t in word {
                    check_sym(t)?;
                }
            }
            PatternSpec::IncreasingRuns { d, b, e } => {
                check_sym(*d)?;
                check_sym(*b)?;
                check_sym(*e)?;
                if d == b || e == b {
                    return Err(FuncError::BadPattern(
                        "run symbol must differ from both flanks".into(),
                    ));
                }
            }
        }
        Ok(FuncSpec::BlockPattern { shapes, pattern })
    }

    /// Largest argument guaranteed evaluable.
    pub fn eval_bound(&self) -> u64 {
        match self {
            FuncSpec::TablePrefix { values } => values.len().saturating_sub(1) as u64,
            _ => u64::MAX,
        }
    }

    pub fn eval(&self, n: u64) -> Result<u64, FuncError> {
        match self {
            FuncSpec::TablePrefix { values } => {
                if values.is_empty() {
                    return Err(FuncError::EmptyTable);
                }
                values
                    .get(n as usize)
                    .copied()
                    .ok_or(FuncError::OutOfBounds {
                        arg: n,
                        bound: values.len() as u64 - 1,
                    })
            }
            FuncSpec::Builtin { which } => Ok(eval_builtin(*which, n)),
            FuncSpec::Expr { text } => {
                let e = parse_expr(text)?;
                Ok(e.eval(n))
            }
            FuncSpec::BlockPattern { shapes, pattern } => eval_block_pattern(shapes, pattern, n),
        }
    }

    /// Values on `[0, to]` in one pass; builtins with sieve shortcuts.
    pub fn eval_table(&self, to: u64) -> Result<Vec<u64>, FuncError> {
        if to > self.eval_bound() {
            return Err(FuncError::OutOfBounds {
                arg: to,
                bound: self.eval_bound(),
            });
        }
        let n = to as usize + 1;
        match self {
            FuncSpec::TablePrefix { values } => Ok(values[..n].to_vec()),
            FuncSpec::Builtin {
                which: Builtin::EulerPhi,
            } => Ok(phi_sieve(n)),
            FuncSpec::Builtin {
                which: Builtin::DivisorCount,
            } => Ok(nd_sieve(n)),
            FuncSpec::Expr { text } => {
                let e = parse_expr(text)?;
                Ok((0..n as u64).map(|i| e.eval(i)).collect())
            }
            FuncSpec::BlockPattern { shapes, pattern } => {
                // One walk over the block layout instead of one per point.
                let mut out = Vec::with_capacity(n);
                let mut start = 0u64;
                let mut idx = 0u64;
                while out.len() < n {
                    let t = pattern_symbol(pattern, idx);
                    let shape = &shapes[t];
                    for &o in shape {
                        if out.len() == n {
                            break;
                        }
                        out.push(start + o);
                    }
                    start += shape.len() as u64;
                    idx += 1;
                }
                Ok(out)
            }
            _ => (0..n as u64).map(|i| self.eval(i)).collect(),
        }
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match self {
            FuncSpec::TablePrefix { values } => format!("table-prefix[{}]", values.len()),
            FuncSpec::Builtin { which } => format!("{which:?}"),
            FuncSpec::Expr { text } => format!("expr({text})"),
            FuncSpec::BlockPattern { shapes, pattern } => {
                format!("block-pattern({} shapes, {pattern:?})", shapes.len())
            }
        }
    }
}

fn eval_builtin(which: Builtin, n: u64) -> u64 {
    match which {
        Builtin::EulerPhi => euler_phi(n),
        Builtin::DivisorCount => divisor_count(n),
        Builtin::DoubleHalf => n / 2 * 2,
        Builtin::InvolutionG => involution_g(n),
        Builtin::Identity => n,
        Builtin::Constant(c) => c,
    }
}

pub fn euler_phi(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut m = n;
    let mut result = n;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

pub fn divisor_count(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut m = n;
    let mut count = 1u64;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            count *= e + 1;
        }
        p += 1;
    }
    if m > 1 {
        count *= 2;
    }
    count
}

/// The n-th J-structure has 6+2n points; block n starts at `n² + 5n`.
/// Locally (1-based, length L): 2 and L−1 are fixed, odd k ≤ L−3 maps to
/// k+3, even k ≥ 4 maps back to k−3.
fn involution_g(p: u64) -> u64 {
    let n = j_block_index(p);
    let start = n * n + 5 * n;
    let len = 6 + 2 * n;
    let k = p - start + 1; // local 1-based
    let img = if k == 2 || k == len - 1 {
        k
    } else if k % 2 == 1 {
        k + 3
    } else {
        k - 3
    };
    start + img - 1
}

/// Index of the J-block containing position `p` under the tiling from 0.
pub fn j_block_index(p: u64) -> u64 {
    // Largest n with n² + 5n <= p.
    let mut n = (((25.0 + 4.0 * p as f64).sqrt() - 5.0) / 2.0).max(0.0) as u64;
    while (n + 1) * (n + 1) + 5 * (n + 1) <= p {
        n += 1;
    }
    while n * n + 5 * n > p {
        n -= 1;
    }
    n
}

fn eval_block_pattern(
    shapes: &[Vec<u64>],
    pattern: &PatternSpec,
    n: u64,
) -> Result<u64, FuncError> {
    // Walk block lengths until the one containing n. IncreasingRuns grows
    // quadratically, Periodic linearly; both are fine to walk at desk scale.
    let mut start = 0u64;
    let mut idx = 0u64;
    loop {
        let t = pattern_symbol(pattern, idx);
        let len = shapes[t].len() as u64;
        if n < start + len {
            return Ok(start + shapes[t][(n - start) as usize]);
        }
        start += len;
        idx += 1;
    }
}

/// Symbol of the infinite type string at block coordinate `i`.
pub fn pattern_symbol(pattern: &PatternSpec, i: u64) -> usize {
    match pattern {
        PatternSpec::Periodic { word } => word[(i % word.len() as u64) as usize],
        PatternSpec::IncreasingRuns { d, b, e } => {
            // Group g ≥ 1 is d b^g e, occupying g+2 coordinates.
            let mut g = 1u64;
            let mut pos = i;
            loop {
                let glen = g + 2;
                if pos < glen {
                    return if pos == 0 {
                        *d
                    } else if pos == glen - 1 {
                        *e
                    } else {
                        *b
                    };
                }
                pos -= glen;
                g += 1;
            }
        }
    }
}

fn phi_sieve(n: usize) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..n as u64).collect();
    for p in 2..n {
        if phi[p] == p as u64 {
            // p prime
            let mut k = p;
            while k < n {
                phi[k] -= phi[k] / p as u64;
                k += p;
            }
        }
    }
    if n > 1 {
        phi[1] = 1;
    }
    if n > 0 {
        phi[0] = 0;
    }
    phi
}

fn nd_sieve(n: usize) -> Vec<u64> {
    let mut nd = vec![0u64; n];
    for d in 1..n {
        let mut k = d;
        while k < n {
            nd[k] += 1;
            k += d;
        }
    }
    nd
}

// ---------------------------------------------------------------------------
// Expression language
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(u64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Mod(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    /// Total by construction: subtraction saturates at 0, division and
    /// modulus by zero yield 0, the root is the integer square root.
    pub fn eval(&self, n: u64) -> u64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => n,
            Expr::Add(a, b) => a.eval(n).saturating_add(b.eval(n)),
            Expr::Sub(a, b) => a.eval(n).saturating_sub(b.eval(n)),
            Expr::Mul(a, b) => a.eval(n).saturating_mul(b.eval(n)),
            Expr::Div(a, b) => {
                let d = b.eval(n);
                if d == 0 {
                    0
                } else {
                    a.eval(n) / d
                }
            }
            Expr::Mod(a, b) => {
                let d = b.eval(n);
                if d == 0 {
                    0
                } else {
                    a.eval(n) % d
                }
            }
            Expr::Sqrt(a) => isqrt(a.eval(n)),
        }
    }
}

pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).map_or(true, |s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |s| s <= n) {
        x += 1;
    }
    x
}

pub fn parse_expr(text: &str) -> Result<Expr, FuncError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.sum()?;
    if p.pos != p.tokens.len() {
        return Err(FuncError::Parse(format!(
            "trailing input at token {}",
            p.pos
        )));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(u64),
    Var,
    Sqrt,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<Tok>, FuncError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '%' => {
                out.push(Tok::Percent);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let v: u64 = text[start..i]
                    .parse()
                    .map_err(|_| FuncError::Parse(format!("bad number at {start}")))?;
                out.push(Tok::Num(v));
            }
            'n' => {
                out.push(Tok::Var);
                i += 1;
            }
            's' if text[i..].starts_with("sqrt") => {
                out.push(Tok::Sqrt);
                i += 4;
            }
            _ => return Err(FuncError::Parse(format!("unexpected character '{c}'"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn sum(&mut self) -> Result<Expr, FuncError> {
        let mut lhs = self.product()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Plus => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Tok::Minus => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, FuncError> {
        let mut lhs = self.atom()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Star => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.atom()?));
                }
                Tok::Slash => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.atom()?));
                }
                Tok::Percent => {
                    self.pos += 1;
                    lhs = Expr::Mod(Box::new(lhs), Box::new(self.atom()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, FuncError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Var) => {
                self.pos += 1;
                Ok(Expr::Var)
            }
            Some(Tok::Sqrt) => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let inner = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::Sqrt(Box::new(inner)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => Err(FuncError::Parse(format!("unexpected token {other:?}"))),
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), FuncError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(FuncError::Parse(format!("expected {t:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_basic() {
        let phi = FuncSpec::builtin(Builtin::EulerPhi);
        let expected = [0u64, 1, 1, 2, 2, 4, 2, 6, 4, 6, 4];
        for (n, &e) in expected.iter().enumerate() {
            assert_eq!(phi.eval(n as u64).unwrap(), e, "phi({n})");
        }
        let nd = FuncSpec::builtin(Builtin::DivisorCount);
        let expected = [0u64, 1, 2, 2, 3, 2, 4, 2, 4, 3, 4, 2, 6];
        for (n, &e) in expected.iter().enumerate() {
            assert_eq!(nd.eval(n as u64).unwrap(), e, "nd({n})");
        }
        let dh = FuncSpec::builtin(Builtin::DoubleHalf);
        assert_eq!(dh.eval(5).unwrap(), 4);
        assert_eq!(dh.eval(6).unwrap(), 6);
    }

    #[test]
    fn sieves_match_pointwise() {
        let phi = FuncSpec::builtin(Builtin::EulerPhi);
        let t = phi.eval_table(500).unwrap();
        for n in 0..=500u64 {
            assert_eq!(t[n as usize], euler_phi(n));
        }
        let nd = FuncSpec::builtin(Builtin::DivisorCount);
        let t = nd.eval_table(500).unwrap();
        for n in 0..=500u64 {
            assert_eq!(t[n as usize], divisor_count(n));
        }
    }

    #[test]
    fn involution_first_blocks() {
        let g = FuncSpec::builtin(Builtin::InvolutionG);
        // Block 0 on [0,5]: pairs (0,3),(2,5); fixed 1,4.
        let imgs: Vec<u64> = (0..6).map(|n| g.eval(n).unwrap()).collect();
        assert_eq!(imgs, vec![3, 1, 5, 0, 4, 2]);
        // Involution everywhere we look.
        for n in 0..2000u64 {
            let m = g.eval(n).unwrap();
            assert_eq!(g.eval(m).unwrap(), n, "g not involutive at {n}");
        }
        // Block boundaries: 0..5, 6..13, 14..23.
        assert_eq!(j_block_index(5), 0);
        assert_eq!(j_block_index(6), 1);
        assert_eq!(j_block_index(13), 1);
        assert_eq!(j_block_index(14), 2);
    }

    #[test]
    fn expr_totality_and_parse() {
        let f = FuncSpec::expr("2*(n/2)").unwrap();
        assert_eq!(f.eval(5).unwrap(), 4);
        let f = FuncSpec::expr("n % 0").unwrap();
        assert_eq!(f.eval(17).unwrap(), 0);
        let f = FuncSpec::expr("sqrt(n/2)").unwrap();
        assert_eq!(f.eval(100_000).unwrap(), 223);
        let f = FuncSpec::expr("0 - n + 7").unwrap();
        assert_eq!(f.eval(100).unwrap(), 7);
        assert!(FuncSpec::expr("n +").is_err());
        assert!(FuncSpec::expr("q").is_err());
    }

    #[test]
    fn table_bounds() {
        let f = FuncSpec::table(vec![5, 1, 2]);
        assert_eq!(f.eval_bound(), 2);
        assert_eq!(f.eval(0).unwrap(), 5);
        assert!(matches!(f.eval(3), Err(FuncError::OutOfBounds { .. })));
    }

    #[test]
    fn block_pattern_layout() {
        // shapes: 0 -> swap pair (len 2), 1 -> 3-cycle (len 3)
        let f = FuncSpec::block_pattern(
            vec![vec![1, 0], vec![1, 2, 0]],
            PatternSpec::Periodic { word: vec![0, 1] },
        )
        .unwrap();
        // Layout: [0,1][2,3,4][5,6][7,8,9]...
        assert_eq!(f.eval(0).unwrap(), 1);
        assert_eq!(f.eval(1).unwrap(), 0);
        assert_eq!(f.eval(2).unwrap(), 3);
        assert_eq!(f.eval(4).unwrap(), 2);
        assert_eq!(f.eval(5).unwrap(), 6);
    }

    #[test]
    fn increasing_runs_symbols() {
        let p = PatternSpec::IncreasingRuns { d: 1, b: 0, e: 2 };
        let sym: Vec<usize> = (0..12).map(|i| pattern_symbol(&p, i)).collect();
        // d b e | d b b e | d b b b e
        assert_eq!(sym, vec![1, 0, 2, 1, 0, 0, 2, 1, 0, 0, 0, 2]);
    }
}
