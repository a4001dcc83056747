//! Points of the one-sided shift space `X = S^{Z+}` and the finite data
//! describing them.
//!
//! A point of `X` is an infinite sequence `x = (x_0, x_1, x_2, ...)` over a
//! countable symbol set `S`. Everything in this crate manipulates *finitely
//! described* points: a finite head of explicit coordinates followed by a tail
//! rule (a constant symbol repeated forever, or a periodic word). This is
//! closed under the one operation the chain dynamics need — prepending a
//! symbol at coordinate 0 — and is rich enough to express the initial
//! conditions and tail-fills used by every diagnostic.
//!
//! Conventions:
//! - Coordinates are indexed from 0; `coordinate(0)` is the most recent
//!   symbol, i.e. the left end of the sequence.
//! - Finite alphabets use the symbols `0..N-1`. Countable alphabets are
//!   enumerated in a fixed order: non-negative `0, 1, 2, ...` or signed
//!   `0, +1, -1, +2, -2, ...`. Samplers, truncations and serialized artifacts
//!   all follow this enumeration order.
//! - All types here are immutable values; operations return new values.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

// ---------------------------------------------------------------------------
// Symbols and alphabets
// ---------------------------------------------------------------------------

/// A single symbol, stored as a signed integer code.
///
/// Signed codes cover spin alphabets (`-1`, `+1`) and walks on the integers;
/// finite alphabets only ever use `0..N-1`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol(pub i64);

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The symbol set together with its fixed enumeration order.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Alphabet {
    /// `{0, 1, ..., size-1}` enumerated in increasing order.
    Finite { size: usize },
    /// `{+1, -1}` enumerated as `+1, -1` (positive first, matching the signed
    /// enumeration below).
    PlusMinus,
    /// `{0, 1, 2, ...}` enumerated in increasing order.
    NonNegative,
    /// All integers enumerated as `0, +1, -1, +2, -2, ...`.
    Integers,
}

impl Alphabet {
    /// Number of symbols, if finite.
    pub fn size(&self) -> Option<usize> {
        match self {
            Alphabet::Finite { size } => Some(*size),
            Alphabet::PlusMinus => Some(2),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.size().is_some()
    }

    pub fn contains(&self, sym: Symbol) -> bool {
        match self {
            Alphabet::Finite { size } => sym.0 >= 0 && (sym.0 as usize) < *size,
            Alphabet::PlusMinus => sym.0 == 1 || sym.0 == -1,
            Alphabet::NonNegative => sym.0 >= 0,
            Alphabet::Integers => true,
        }
    }

    /// The `idx`-th symbol in enumeration order.
    ///
    /// Returns `None` when `idx` is out of range for a finite alphabet.
    pub fn symbol_at(&self, idx: usize) -> Option<Symbol> {
        match self {
            Alphabet::Finite { size } => (idx < *size).then_some(Symbol(idx as i64)),
            Alphabet::PlusMinus => match idx {
                0 => Some(Symbol(1)),
                1 => Some(Symbol(-1)),
                _ => None,
            },
            Alphabet::NonNegative => Some(Symbol(idx as i64)),
            Alphabet::Integers => {
                // 0, +1, -1, +2, -2, ...
                if idx == 0 {
                    Some(Symbol(0))
                } else if idx % 2 == 1 {
                    Some(Symbol(idx.div_ceil(2) as i64))
                } else {
                    Some(Symbol(-((idx / 2) as i64)))
                }
            }
        }
    }

    /// Position of `sym` in the enumeration order, if it belongs to the
    /// alphabet.
    pub fn index_of(&self, sym: Symbol) -> Option<usize> {
        if !self.contains(sym) {
            return None;
        }
        Some(match self {
            Alphabet::Finite { .. } | Alphabet::NonNegative => sym.0 as usize,
            Alphabet::PlusMinus => {
                if sym.0 == 1 {
                    0
                } else {
                    1
                }
            }
            Alphabet::Integers => {
                if sym.0 == 0 {
                    0
                } else if sym.0 > 0 {
                    (2 * sym.0 - 1) as usize
                } else {
                    (-2 * sym.0) as usize
                }
            }
        })
    }

    /// All symbols of a finite alphabet in enumeration order.
    pub fn finite_symbols(&self) -> Option<Vec<Symbol>> {
        let n = self.size()?;
        Some((0..n).map(|i| self.symbol_at(i).unwrap()).collect())
    }

    /// Human-readable description of the enumeration order, recorded in
    /// artifact metadata.
    pub fn enumeration_order(&self) -> String {
        match self {
            Alphabet::Finite { size } => format!("0..{}", size),
            Alphabet::PlusMinus => "+1,-1".to_string(),
            Alphabet::NonNegative => "0,1,2,...".to_string(),
            Alphabet::Integers => "0,+1,-1,+2,-2,...".to_string(),
        }
    }
}

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

/// Which way a finite word is read relative to the coordinate order.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Orientation {
    /// `symbols[j]` is coordinate `j` of a context (left end first).
    ContextPrefix,
    /// `symbols[j]` was the `j+1`-st symbol added by a chain; the *last*
    /// element is the current coordinate 0.
    ChainAdded,
}

/// A finite word over the alphabet, tagged with its reading direction.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Word {
    symbols: Vec<Symbol>,
    orientation: Orientation,
}

impl Word {
    pub fn new(symbols: Vec<Symbol>, orientation: Orientation) -> Self {
        Word { symbols, orientation }
    }

    pub fn empty(orientation: Orientation) -> Self {
        Word { symbols: Vec::new(), orientation }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Raw storage order (see [`Orientation`] for its meaning).
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Symbols in coordinate order (coordinate 0 first), regardless of the
    /// storage orientation.
    pub fn coordinate_order(&self) -> Vec<Symbol> {
        match self.orientation {
            Orientation::ContextPrefix => self.symbols.clone(),
            Orientation::ChainAdded => self.symbols.iter().rev().copied().collect(),
        }
    }

    pub fn push(&mut self, sym: Symbol) {
        self.symbols.push(sym);
    }
}

// ---------------------------------------------------------------------------
// Tails and contexts
// ---------------------------------------------------------------------------

/// The rule generating all coordinates beyond a context's head.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Tail {
    /// The same symbol repeated forever.
    Constant(Symbol),
    /// A non-empty word repeated forever.
    Periodic(Vec<Symbol>),
}

impl Tail {
    /// Coordinate `offset` positions into the tail.
    pub fn at(&self, offset: usize) -> Symbol {
        match self {
            Tail::Constant(s) => *s,
            Tail::Periodic(w) => w[offset % w.len()],
        }
    }

    pub fn period(&self) -> usize {
        match self {
            Tail::Constant(_) => 1,
            Tail::Periodic(w) => w.len(),
        }
    }
}

/// Errors from building or parsing contexts.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("periodic tail must be non-empty")]
    EmptyPeriod,
    #[error("unparseable context literal {literal:?}: {reason}")]
    BadLiteral { literal: String, reason: String },
}

/// A finitely described point of `X`: explicit head coordinates followed by a
/// tail rule.
///
/// Literal syntax (used on the command line and in config files):
///
/// - `const:<sym>` — the constant sequence.
/// - `word:<s0>,<s1>,...;tail=<sym>` — explicit head, constant tail.
/// - `periodic:<s0>,<s1>,...` — periodic from coordinate 0 on.
/// - `word:<s0>,...;ptail=<p0>,<p1>,...` — explicit head, periodic tail
///   (extension; produced when displaying prepended periodic contexts).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Context {
    head: Word,
    tail: Tail,
}

impl Context {
    pub fn new(head: Vec<Symbol>, tail: Tail) -> Result<Self, ContextError> {
        if let Tail::Periodic(w) = &tail {
            if w.is_empty() {
                return Err(ContextError::EmptyPeriod);
            }
        }
        Ok(Context { head: Word::new(head, Orientation::ContextPrefix), tail })
    }

    pub fn constant(sym: Symbol) -> Self {
        Context { head: Word::empty(Orientation::ContextPrefix), tail: Tail::Constant(sym) }
    }

    pub fn head(&self) -> &Word {
        &self.head
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// Coordinate `i` of the described point.
    pub fn coordinate(&self, i: usize) -> Symbol {
        let h = self.head.symbols();
        if i < h.len() {
            h[i]
        } else {
            self.tail.at(i - h.len())
        }
    }

    /// The context describing `sigma . x` (the point with `sigma` inserted at
    /// coordinate 0 and everything else shifted right).
    pub fn prepend(&self, sigma: Symbol) -> Context {
        let mut head = Vec::with_capacity(self.head.len() + 1);
        head.push(sigma);
        head.extend_from_slice(self.head.symbols());
        Context { head: Word::new(head, Orientation::ContextPrefix), tail: self.tail.clone() }
    }

    /// Borrowed view used by evaluators; see [`CtxView`].
    pub fn view(&self) -> CtxView<'_> {
        CtxView { rev: &[], fwd: self.head.symbols(), tail: &self.tail }
    }

    /// Greatest agreement depth between the two described points.
    ///
    /// Returns the largest `n` such that `x_i = y_i` for all `i <= n`
    /// ([`AgreeDepth::Finite`]), [`AgreeDepth::Infinite`] when the points are
    /// identical, and [`AgreeDepth::DisagreeAtZero`] when already `x_0 != y_0`.
    ///
    /// Both points are eventually periodic, so identity is decidable: it is
    /// enough to compare coordinates up to the longer head plus the least
    /// common multiple of the two tail periods.
    pub fn agree_depth(&self, other: &Context) -> AgreeDepth {
        let pa = self.tail.period();
        let pb = other.tail.period();
        let bound = self.head.len().max(other.head.len()) + lcm(pa, pb);
        for i in 0..bound {
            if self.coordinate(i) != other.coordinate(i) {
                return if i == 0 { AgreeDepth::DisagreeAtZero } else { AgreeDepth::Finite((i - 1) as u64) };
            }
        }
        AgreeDepth::Infinite
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Extended agreement depth: how far two points coincide coordinate by
/// coordinate.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum AgreeDepth {
    /// The points already differ at coordinate 0.
    DisagreeAtZero,
    /// Coordinates agree for all `i <= n` and differ at `n + 1`.
    Finite(u64),
    /// The points are identical.
    Infinite,
}

impl AgreeDepth {
    /// The successor depth, as produced by prepending a common symbol.
    pub fn succ(self) -> AgreeDepth {
        match self {
            AgreeDepth::DisagreeAtZero => AgreeDepth::Finite(0),
            AgreeDepth::Finite(n) => AgreeDepth::Finite(n + 1),
            AgreeDepth::Infinite => AgreeDepth::Infinite,
        }
    }
}

impl PartialOrd for AgreeDepth {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AgreeDepth {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        fn rank(d: &AgreeDepth) -> (u8, u64) {
            match d {
                AgreeDepth::DisagreeAtZero => (0, 0),
                AgreeDepth::Finite(n) => (1, *n),
                AgreeDepth::Infinite => (2, 0),
            }
        }
        rank(self).cmp(&rank(other))
    }
}

impl fmt::Display for AgreeDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgreeDepth::DisagreeAtZero => write!(f, "disagree-at-0"),
            AgreeDepth::Finite(n) => write!(f, "{}", n),
            AgreeDepth::Infinite => write!(f, "inf"),
        }
    }
}

// ---------------------------------------------------------------------------
// Borrowed context views
// ---------------------------------------------------------------------------

/// A borrowed, segment-structured view of a context.
///
/// The point's coordinates are, in order: `rev` read *backwards* (its last
/// element is coordinate 0), then `fwd` read forwards, then the tail rule.
/// The split exists so a running chain can expose "symbols added so far plus
/// the initial context" without copying its history on every step: the chain
/// pushes each new symbol onto the end of its history vector and hands out
/// `rev = &history`.
#[derive(Copy, Clone, Debug)]
pub struct CtxView<'a> {
    pub rev: &'a [Symbol],
    pub fwd: &'a [Symbol],
    pub tail: &'a Tail,
}

impl<'a> CtxView<'a> {
    pub fn coordinate(&self, i: usize) -> Symbol {
        let r = self.rev.len();
        if i < r {
            self.rev[r - 1 - i]
        } else if i - r < self.fwd.len() {
            self.fwd[i - r]
        } else {
            self.tail.at(i - r - self.fwd.len())
        }
    }

    /// Number of explicitly stored coordinates before the tail rule starts.
    pub fn head_len(&self) -> usize {
        self.rev.len() + self.fwd.len()
    }

    /// Explicit coordinates in coordinate order.
    pub fn head_iter(&self) -> impl Iterator<Item = Symbol> + 'a {
        self.rev.iter().rev().chain(self.fwd.iter()).copied()
    }

    /// Materialize an owned [`Context`] with the same coordinates.
    pub fn to_context(&self) -> Context {
        Context {
            head: Word::new(self.head_iter().collect(), Orientation::ContextPrefix),
            tail: self.tail.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// Context literal syntax
// ---------------------------------------------------------------------------

fn parse_symbol_list(s: &str, literal: &str) -> Result<Vec<Symbol>, ContextError> {
    s.split(',')
        .map(|tok| {
            tok.trim().parse::<i64>().map(Symbol).map_err(|e| ContextError::BadLiteral {
                literal: literal.to_string(),
                reason: format!("bad symbol {tok:?}: {e}"),
            })
        })
        .collect()
}

impl FromStr for Context {
    type Err = ContextError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| ContextError::BadLiteral { literal: s.to_string(), reason: reason.to_string() };
        if let Some(rest) = s.strip_prefix("const:") {
            let sym = rest.trim().parse::<i64>().map_err(|e| bad(&format!("bad symbol: {e}")))?;
            Ok(Context::constant(Symbol(sym)))
        } else if let Some(rest) = s.strip_prefix("periodic:") {
            let word = parse_symbol_list(rest, s)?;
            if word.is_empty() {
                return Err(ContextError::EmptyPeriod);
            }
            Context::new(Vec::new(), Tail::Periodic(word))
        } else if let Some(rest) = s.strip_prefix("word:") {
            let (head_part, tail_part) = rest.split_once(';').ok_or_else(|| bad("missing ;tail= or ;ptail= part"))?;
            let head = if head_part.trim().is_empty() { Vec::new() } else { parse_symbol_list(head_part, s)? };
            if let Some(tsym) = tail_part.strip_prefix("tail=") {
                let sym = tsym.trim().parse::<i64>().map_err(|e| bad(&format!("bad tail symbol: {e}")))?;
                Context::new(head, Tail::Constant(Symbol(sym)))
            } else if let Some(tword) = tail_part.strip_prefix("ptail=") {
                let word = parse_symbol_list(tword, s)?;
                if word.is_empty() {
                    return Err(ContextError::EmptyPeriod);
                }
                Context::new(head, Tail::Periodic(word))
            } else {
                Err(bad("expected ;tail=<sym> or ;ptail=<s0>,<s1>,..."))
            }
        } else {
            Err(bad("expected const:, word: or periodic: prefix"))
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |w: &[Symbol]| w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
        match (&self.head.is_empty(), &self.tail) {
            (true, Tail::Constant(s)) => write!(f, "const:{s}"),
            (true, Tail::Periodic(w)) => write!(f, "periodic:{}", join(w)),
            (false, Tail::Constant(s)) => write!(f, "word:{};tail={s}", join(self.head.symbols())),
            (false, Tail::Periodic(w)) => {
                write!(f, "word:{};ptail={}", join(self.head.symbols()), join(w))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Word enumeration (shared by exact tests and the transfer-operator builder)
// ---------------------------------------------------------------------------

/// All words of length `len` over `symbols`, in lexicographic order with the
/// *first* coordinate varying slowest.
pub fn enumerate_words(symbols: &[Symbol], len: usize) -> Vec<Vec<Symbol>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * symbols.len());
        for w in &out {
            for &s in symbols {
                let mut v = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(s: &str) -> Context {
        s.parse().unwrap()
    }

    #[test]
    fn enumeration_order_of_integers() {
        let a = Alphabet::Integers;
        let expected = [0i64, 1, -1, 2, -2, 3, -3];
        for (idx, &v) in expected.iter().enumerate() {
            assert_eq!(a.symbol_at(idx), Some(Symbol(v)));
            assert_eq!(a.index_of(Symbol(v)), Some(idx));
        }
    }

    #[test]
    fn enumeration_order_of_finite_and_nonneg() {
        let f = Alphabet::Finite { size: 3 };
        assert_eq!(f.symbol_at(2), Some(Symbol(2)));
        assert_eq!(f.symbol_at(3), None);
        assert!(!f.contains(Symbol(-1)));
        assert_eq!(f.finite_symbols(), Some(vec![Symbol(0), Symbol(1), Symbol(2)]));
        let n = Alphabet::NonNegative;
        assert_eq!(n.symbol_at(7), Some(Symbol(7)));
        assert_eq!(n.index_of(Symbol(7)), Some(7));
        assert_eq!(n.index_of(Symbol(-1)), None);
        assert_eq!(n.finite_symbols(), None);
    }

    #[test]
    fn enumeration_order_of_plus_minus() {
        let a = Alphabet::PlusMinus;
        assert_eq!(a.size(), Some(2));
        assert_eq!(a.symbol_at(0), Some(Symbol(1)));
        assert_eq!(a.symbol_at(1), Some(Symbol(-1)));
        assert_eq!(a.symbol_at(2), None);
        assert_eq!(a.index_of(Symbol(1)), Some(0));
        assert_eq!(a.index_of(Symbol(-1)), Some(1));
        assert_eq!(a.index_of(Symbol(0)), None);
        assert_eq!(a.finite_symbols(), Some(vec![Symbol(1), Symbol(-1)]));
    }

    #[test]
    fn coordinates_follow_head_then_tail() {
        let x = ctx("word:2,0,1;tail=3");
        assert_eq!(x.coordinate(0), Symbol(2));
        assert_eq!(x.coordinate(1), Symbol(0));
        assert_eq!(x.coordinate(2), Symbol(1));
        assert_eq!(x.coordinate(3), Symbol(3));
        assert_eq!(x.coordinate(100), Symbol(3));

        let p = ctx("periodic:0,1");
        assert_eq!(p.coordinate(0), Symbol(0));
        assert_eq!(p.coordinate(7), Symbol(1));
        assert_eq!(p.coordinate(8), Symbol(0));
    }

    #[test]
    fn prepend_shifts_coordinates() {
        let x = ctx("word:2,0;tail=1");
        let y = x.prepend(Symbol(5));
        assert_eq!(y.coordinate(0), Symbol(5));
        assert_eq!(y.coordinate(1), Symbol(2));
        assert_eq!(y.coordinate(2), Symbol(0));
        assert_eq!(y.coordinate(3), Symbol(1));
    }

    #[test]
    fn agree_depth_basic_cases() {
        let a = ctx("const:0");
        let b = ctx("const:0");
        assert_eq!(a.agree_depth(&b), AgreeDepth::Infinite);

        let c = ctx("word:1;tail=0");
        // differs from const:0 at coordinate 0 only
        assert_eq!(a.agree_depth(&c), AgreeDepth::DisagreeAtZero);

        let d = ctx("word:0,0,0,5;tail=0");
        assert_eq!(a.agree_depth(&d), AgreeDepth::Finite(2));

        // periodic vs constant: periodic 0,1 and const 0 differ first at coord 1
        let p = ctx("periodic:0,1");
        assert_eq!(a.agree_depth(&p), AgreeDepth::Finite(0));

        // two descriptions of the same point
        let e = ctx("word:0,0;tail=0");
        assert_eq!(a.agree_depth(&e), AgreeDepth::Infinite);
        let f = ctx("periodic:0,0");
        assert_eq!(a.agree_depth(&f), AgreeDepth::Infinite);
    }

    #[test]
    fn agree_depth_is_symmetric_and_steps_under_prepend() {
        let x = ctx("word:1,2;tail=0");
        let y = ctx("word:1,3;tail=0");
        assert_eq!(x.agree_depth(&y), AgreeDepth::Finite(0));
        assert_eq!(y.agree_depth(&x), AgreeDepth::Finite(0));
        let xs = x.prepend(Symbol(9));
        let ys = y.prepend(Symbol(9));
        assert_eq!(xs.agree_depth(&ys), AgreeDepth::Finite(1));
        // prepending distinct symbols disagrees at 0
        let zs = y.prepend(Symbol(8));
        assert_eq!(xs.agree_depth(&zs), AgreeDepth::DisagreeAtZero);
    }

    #[test]
    fn agree_depth_ordering() {
        assert!(AgreeDepth::DisagreeAtZero < AgreeDepth::Finite(0));
        assert!(AgreeDepth::Finite(0) < AgreeDepth::Finite(7));
        assert!(AgreeDepth::Finite(1_000_000) < AgreeDepth::Infinite);
    }

    #[test]
    fn view_matches_context_coordinates() {
        let x = ctx("word:4,5,6;ptail=7,8");
        let v = x.view();
        for i in 0..12 {
            assert_eq!(v.coordinate(i), x.coordinate(i), "coordinate {i}");
        }
        assert_eq!(v.to_context(), x);
    }

    #[test]
    fn chain_style_view_reads_rev_segment_backwards() {
        // history [a, b, c] pushed in chronological order: c is coordinate 0
        let hist = vec![Symbol(10), Symbol(11), Symbol(12)];
        let init = ctx("word:0,1;tail=9");
        let v = CtxView { rev: &hist, fwd: init.head().symbols(), tail: init.tail() };
        let expect = [12, 11, 10, 0, 1, 9, 9, 9];
        for (i, &e) in expect.iter().enumerate() {
            assert_eq!(v.coordinate(i), Symbol(e), "coordinate {i}");
        }
        assert_eq!(v.head_len(), 5);
        let mat = v.to_context();
        assert_eq!(mat.coordinate(0), Symbol(12));
        assert_eq!(mat.coordinate(4), Symbol(1));
        assert_eq!(mat.coordinate(5), Symbol(9));
    }

    #[test]
    fn literal_syntax_round_trips() {
        for s in ["const:0", "const:-3", "periodic:1,0,0", "word:2,0,1;tail=3", "word:-1,1;ptail=1,-1"] {
            let c: Context = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
            let again: Context = c.to_string().parse().unwrap();
            assert_eq!(c, again);
        }
    }

    #[test]
    fn literal_syntax_rejects_garbage() {
        assert!("".parse::<Context>().is_err());
        assert!("const:x".parse::<Context>().is_err());
        assert!("word:1,2".parse::<Context>().is_err());
        assert!("word:1;tail=a".parse::<Context>().is_err());
        assert!("periodic:".parse::<Context>().is_err());
        assert!("nonsense:1".parse::<Context>().is_err());
    }

    #[test]
    fn enumerate_words_counts_and_order() {
        let syms = [Symbol(0), Symbol(1)];
        let ws = enumerate_words(&syms, 3);
        assert_eq!(ws.len(), 8);
        assert_eq!(ws[0], vec![Symbol(0); 3]);
        assert_eq!(ws[1], vec![Symbol(0), Symbol(0), Symbol(1)]);
        assert_eq!(ws[7], vec![Symbol(1); 3]);
    }
}
