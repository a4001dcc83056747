//! A binary family whose kernel sees only the distance to the most recent
//! `1` in the context.
//!
//! Fix a limit value `a`, amplitude `c` and ratio `r` in `(0, 1)`, and set
//! `a_n = a + c r^n`. Writing `n(x) = min { j >= 0 : x_j = 1 }` for the
//! first-one position of the context (possibly none),
//!
//! ```text
//! g(0, x) = a_{n(x) + 1},        g(1, x) = 1 - a_{n(x) + 1},
//! ```
//!
//! and contexts with no `1` at all use the limit value `a`. Parameters are
//! validated so that every `a_n` (and the limit) lies strictly inside
//! `(0, 1)`: the kernel is bounded away from `0` and `1`, making this the
//! easy, geometrically-mixing test family — every variation bound decays
//! like `r^n`.

use super::{Depth, EvalError, GFunction, Positivity};
use crate::numerics::Certified;
use crate::seqspace::{Alphabet, CtxView, Symbol, Tail};

pub struct Hulse {
    a: f64,
    c: f64,
    r: f64,
    /// Range of `{a_n : n >= 1} ∪ {a}` (closed, by monotonicity in `n`).
    a_lo: f64,
    a_hi: f64,
    /// Lower bound on every conditional probability.
    g_min: f64,
}

/// First-one position of a finitely described context.
enum FirstOne {
    At(u64),
    /// The context contains no `1` at all.
    Never,
}

impl Hulse {
    pub fn new(a: f64, c: f64, r: f64) -> Result<Self, String> {
        if !(r > 0.0 && r < 1.0) {
            return Err(format!("hulse needs 0 < r < 1, got {r}"));
        }
        if !a.is_finite() || !c.is_finite() {
            return Err("hulse parameters must be finite".into());
        }
        // a_n is monotone in n, so the whole family lies between the limit a
        // and the first value a + c r.
        let first = a + c * r;
        let (a_lo, a_hi) = if first < a { (first, a) } else { (a, first) };
        if !(a_lo > 0.0 && a_hi < 1.0) {
            return Err(format!(
                "hulse values must stay inside (0,1): range [{a_lo}, {a_hi}] for a={a}, c={c}, r={r}"
            ));
        }
        let g_min = a_lo.min(1.0 - a_hi);
        Ok(Hulse { a, c, r, a_lo, a_hi, g_min })
    }

    /// Parameters `(a, c, r)` of the canonical instance.
    pub const CANONICAL: (f64, f64, f64) = (0.55, 0.25, 0.6);

    /// The canonical instance used across the test corpus.
    pub fn canonical() -> Self {
        let (a, c, r) = Self::CANONICAL;
        Hulse::new(a, c, r).expect("canonical parameters are valid")
    }

    /// `a_n` for `n >= 1`; saturates cleanly to the limit for huge `n`.
    fn a_at(&self, n: u64) -> f64 {
        self.a + self.c * self.r.powi(n.min(i32::MAX as u64) as i32)
    }

    fn first_one(&self, ctx: &CtxView<'_>) -> Result<FirstOne, EvalError> {
        let check = |s: Symbol| -> Result<bool, EvalError> {
            match s.0 {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(EvalError::OutsideSubshift { family: self.name() }),
            }
        };
        for (j, sym) in ctx.head_iter().enumerate() {
            if check(sym)? {
                return Ok(FirstOne::At(j as u64));
            }
        }
        let h = ctx.head_len() as u64;
        match ctx.tail {
            Tail::Constant(s) => Ok(if check(*s)? { FirstOne::At(h) } else { FirstOne::Never }),
            Tail::Periodic(w) => {
                for (r, sym) in w.iter().enumerate() {
                    if check(*sym)? {
                        return Ok(FirstOne::At(h + r as u64));
                    }
                }
                Ok(FirstOne::Never)
            }
        }
    }

    /// The value `g(0, ctx)`.
    fn zero_prob(&self, ctx: &CtxView<'_>) -> Result<f64, EvalError> {
        Ok(match self.first_one(ctx)? {
            FirstOne::At(j) => self.a_at(j + 1),
            FirstOne::Never => self.a,
        })
    }
}

impl GFunction for Hulse {
    fn name(&self) -> String {
        format!("hulse:a={},c={},r={}", self.a, self.c, self.r)
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::Finite { size: 2 }
    }

    fn depth(&self) -> Depth {
        Depth::Infinite
    }

    fn positivity(&self) -> Positivity {
        Positivity::StrictlyPositive
    }

    fn eval(&self, sigma: Symbol, ctx: &CtxView<'_>, _tol: f64) -> Result<Certified, EvalError> {
        let v = self.zero_prob(ctx)?;
        // One multiply-add and one subtraction: a couple of ulps.
        let err = 4.0 * f64::EPSILON;
        match sigma.0 {
            0 => Ok(Certified::new(v, err)),
            1 => Ok(Certified::new(1.0 - v, err)),
            _ => Err(EvalError::UnsupportedSymbol { family: self.name(), symbol: sigma }),
        }
    }

    fn sigma_tail_bound(&self, _ctx: &CtxView<'_>, enumerated: usize) -> Option<f64> {
        Some(if enumerated >= 2 { 0.0 } else { 1.0 })
    }

    fn var_bound(&self, n: u64) -> Option<f64> {
        // Contexts agreeing in coordinates 0..n either share their first-one
        // position or both have it at >= n, so the values differ by at most
        // the oscillation of {a_m : m > n} ∪ {a}.
        Some(self.c.abs() * self.r.powi((n + 1).min(i32::MAX as u64) as i32))
    }

    fn svar_sq_bound(&self, m: u64) -> Option<f64> {
        // (sqrt(p) - sqrt(q))^2 = (p - q)^2 / (sqrt(p) + sqrt(q))^2
        //                      <= (p - q)^2 / (4 g_min)   for both symbols.
        let d = self.var_bound(m).unwrap();
        Some((d * d / (2.0 * self.g_min)).min(2.0))
    }

    fn svar_sq_tail_sum_bound(&self, n: u64) -> Option<f64> {
        // Geometric series of the svar bounds with ratio r^2.
        let d = self.var_bound(n + 1).unwrap();
        Some(d * d / (2.0 * self.g_min * (1.0 - self.r * self.r)))
    }

    fn log_ratio_bound(&self) -> Option<f64> {
        let zero_side = (self.a_hi / self.a_lo).ln();
        let one_side = ((1.0 - self.a_lo) / (1.0 - self.a_hi)).ln();
        Some(zero_side.max(one_side))
    }
}

// ---------------------------------------------------------------------------
