//! The next-symbol kernel trait and its generic machinery.
//!
//! A *g-function* on the shift space assigns to each symbol `sigma` and
//! context `x` a probability `g(sigma, x)` of seeing `sigma` next, with
//! `sum_sigma g(sigma, x) = 1` for every admissible context. The
//! [`GFunction`] trait captures exactly the operations the rest of the crate
//! needs:
//!
//! - certified pointwise evaluation (`eval`), so every downstream quantity
//!   carries an explicit absolute-error bound;
//! - a support predicate (`is_allowed`) separating hard subshift constraints
//!   from probability-zero symbols;
//! - enumerated conditional distributions with certified leftover mass
//!   (`conditional`), the single entry point used by samplers, likelihood
//!   ratios and transfer-operator truncations;
//! - optional analytic variation bounds (`var_bound`, `svar_sq_bound`) that
//!   quantify how little the kernel depends on deep coordinates. These drive
//!   the absolute-continuity and uniqueness diagnostics.
//!
//! Variation conventions used throughout (`n`-th bounds, `n >= 0`):
//!
//! - `var_bound(n)` bounds `sup_sigma |g(sigma, x) - g(sigma, y)|` over
//!   context pairs that agree in coordinates `0..n` (the first `n`
//!   coordinates; `n = 0` means no agreement is assumed).
//! - `svar_sq_bound(n)` bounds
//!   `sum_sigma (sqrt(g(sigma, x)) - sqrt(g(sigma, y)))^2` over the same
//!   pairs. This is the squared Hellinger distance between the two
//!   conditionals, so it always lies in `[0, 2]`.
//! - `svar_sq_tail_sum_bound(n)` bounds the sum of the previous quantity over
//!   all depths `m > n`; a finite value at `n = 0` certifies the summability
//!   hypothesis behind the uniqueness results.

pub mod ex11;
pub mod hulse;
pub mod randomwalk;
pub mod registry;
pub mod spin;
pub mod table;

use crate::existence::Envelope;
use crate::numerics::{Certified, KahanSum};
use crate::seqspace::{Alphabet, Context, CtxView, Symbol, Tail};
use rand::{Rng, RngCore};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default absolute tolerance for certified kernel evaluations.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Conditional enumerations stop once the certified mass beyond the listed
/// symbols drops below this cutoff.
pub const ENUM_CUTOFF: f64 = 1e-12;

/// Hard cap on enumerated symbols per conditional before the tail is declared
/// too heavy to truncate.
pub const MAX_ENUM: usize = 4096;

// ---------------------------------------------------------------------------
// Trait vocabulary
// ---------------------------------------------------------------------------

/// How many context coordinates the kernel can depend on.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Depth {
    /// `g(sigma, x)` depends only on coordinates `x_0 .. x_{k-1}`.
    Finite(usize),
    /// The kernel may depend on the whole context.
    Infinite,
}

impl Depth {
    pub fn finite(&self) -> Option<usize> {
        match self {
            Depth::Finite(k) => Some(*k),
            Depth::Infinite => None,
        }
    }
}

/// Whether the kernel promises strictly positive probabilities on its
/// support.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Positivity {
    /// `g(sigma, x) > 0` whenever `sigma` may follow `x`.
    StrictlyPositive,
    /// `g` may vanish on admissible symbols for some contexts.
    ZerosPossible,
}

/// Errors surfaced by kernel evaluation and conditional enumeration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("symbol {symbol} is outside the alphabet of {family}")]
    UnsupportedSymbol { family: String, symbol: Symbol },
    #[error("context lies outside the subshift supporting {family}")]
    OutsideSubshift { family: String },
    #[error("cannot certify tolerance {requested:e} (achievable about {achievable:e})")]
    PrecisionUnavailable { requested: f64, achievable: f64 },
    #[error("conditional tail too heavy: {remaining_mass:e} mass left after {enumerated} symbols")]
    HeavyTail { enumerated: usize, remaining_mass: f64 },
}

// ---------------------------------------------------------------------------
// Conditional distributions
// ---------------------------------------------------------------------------

/// One enumerated entry of a conditional distribution.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CondEntry {
    pub symbol: Symbol,
    /// Certified probability value (entries may be exactly zero).
    pub prob: f64,
    pub abs_err: f64,
}

/// A conditional distribution enumerated as a prefix of the alphabet's fixed
/// enumeration order.
///
/// `entries[i]` always describes `alphabet.symbol_at(i)`; nothing is skipped,
/// so zero-probability symbols appear explicitly. `cut_mass` is a certified
/// upper bound on the total probability of all symbols beyond the prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct CondDist {
    pub entries: Vec<CondEntry>,
    pub cut_mass: f64,
    /// True when the prefix provably carries all the mass (`cut_mass == 0`).
    pub exhaustive: bool,
}

impl CondDist {
    /// Compensated sum of the enumerated probabilities.
    pub fn sum_raw(&self) -> f64 {
        let mut s = KahanSum::new();
        for e in &self.entries {
            s.add(e.prob);
        }
        s.value()
    }

    /// Sum of the per-entry error bounds.
    pub fn total_err(&self) -> f64 {
        self.entries.iter().map(|e| e.abs_err).sum()
    }

    pub fn entry_for(&self, sym: Symbol) -> Option<&CondEntry> {
        self.entries.iter().find(|e| e.symbol == sym)
    }
}

// ---------------------------------------------------------------------------
// The kernel trait
// ---------------------------------------------------------------------------

/// A next-symbol kernel `g(sigma, x)` on the shift space.
///
/// Implementations must be deterministic: equal inputs give bit-identical
/// outputs. All provided methods are overridable for families with faster or
/// sharper structure-aware versions.
pub trait GFunction: Send + Sync {
    /// Stable identifier, e.g. `"ex11:alpha=0.5,p=geom2"`.
    fn name(&self) -> String;

    fn alphabet(&self) -> Alphabet;

    fn depth(&self) -> Depth;

    fn positivity(&self) -> Positivity;

    /// Whether the context itself lies in the subshift the kernel is defined
    /// on. The default accepts any context whose visible symbols belong to
    /// the alphabet.
    fn context_allowed(&self, ctx: &CtxView<'_>) -> bool {
        let a = self.alphabet();
        let tail_ok = match ctx.tail {
            Tail::Constant(s) => a.contains(*s),
            Tail::Periodic(w) => w.iter().all(|s| a.contains(*s)),
        };
        tail_ok && ctx.head_iter().all(|s| a.contains(s))
    }

    /// Support predicate: may `sigma` follow `ctx` under the subshift
    /// constraints? (Probability zero does not imply disallowed.)
    fn is_allowed(&self, sigma: Symbol, ctx: &CtxView<'_>) -> bool {
        self.alphabet().contains(sigma) && self.context_allowed(ctx)
    }

    /// Certified evaluation of `g(sigma, ctx)` to absolute tolerance `tol`.
    ///
    /// Disallowed-but-alphabet symbols evaluate to an exact zero; symbols
    /// outside the alphabet and contexts outside the subshift are errors.
    fn eval(&self, sigma: Symbol, ctx: &CtxView<'_>, tol: f64) -> Result<Certified, EvalError>;

    /// Certified upper bound on the conditional mass of all symbols at
    /// enumeration index `>= enumerated`, if the family provides one.
    fn sigma_tail_bound(&self, ctx: &CtxView<'_>, enumerated: usize) -> Option<f64>;

    /// See the module docs for the exact variation conventions.
    fn var_bound(&self, _n: u64) -> Option<f64> {
        None
    }

    fn svar_sq_bound(&self, _m: u64) -> Option<f64> {
        None
    }

    fn svar_sq_tail_sum_bound(&self, _n: u64) -> Option<f64> {
        None
    }

    /// Upper bound on `sup log(g(sigma, x) / g(sigma, y))` over all admissible
    /// `sigma, x, y` with both values positive, when the family can certify
    /// one. Used to derive dominating envelopes.
    fn log_ratio_bound(&self) -> Option<f64> {
        None
    }

    /// A ready-made dominating envelope, for families that ship one.
    fn builtin_envelope(&self) -> Option<Envelope> {
        None
    }

    /// Conditional distribution of the next symbol given `ctx`.
    fn conditional(&self, ctx: &CtxView<'_>, tol: f64) -> Result<CondDist, EvalError> {
        conditional_generic(self, ctx, tol)
    }

    /// Conditionals under two contexts at once.
    ///
    /// Families whose evaluation shares work between contexts with a common
    /// recent history (the two views typically share their `rev` segment)
    /// override this; the default just evaluates twice.
    fn conditional_pair(
        &self,
        a: &CtxView<'_>,
        b: &CtxView<'_>,
        tol: f64,
    ) -> Result<(CondDist, CondDist), EvalError> {
        Ok((self.conditional(a, tol)?, self.conditional(b, tol)?))
    }

    /// A random admissible context, used by sampling-based probes. The
    /// default has no subshift constraints to respect; constrained families
    /// must override it.
    fn random_context(&self, rng: &mut dyn RngCore, max_head: usize) -> Context {
        let a = self.alphabet();
        match rng.random_range(0..8u32) {
            // Deterministic corners show up with positive probability so the
            // probes exercise extreme contexts (e.g. the all-zeros point).
            0 => Context::constant(a.symbol_at(0).unwrap()),
            1 => Context::constant(random_symbol(a, rng)),
            2 => {
                let len = rng.random_range(1..4usize);
                let word = (0..len).map(|_| random_symbol(a, rng)).collect();
                Context::new(Vec::new(), Tail::Periodic(word)).expect("non-empty period")
            }
            _ => {
                let len = rng.random_range(0..=max_head);
                let head = (0..len).map(|_| random_symbol(a, rng)).collect();
                Context::new(head, Tail::Constant(random_symbol(a, rng))).unwrap()
            }
        }
    }

    /// A random admissible context agreeing with `base` in coordinates
    /// `0..n`, with an independently resampled remainder.
    fn random_context_agreeing(&self, base: &Context, n: usize, rng: &mut dyn RngCore) -> Context {
        let a = self.alphabet();
        let mut head: Vec<Symbol> = (0..n).map(|i| base.coordinate(i)).collect();
        let extra = rng.random_range(0..5usize);
        head.extend((0..extra).map(|_| random_symbol(a, rng)));
        Context::new(head, Tail::Constant(random_symbol(a, rng))).unwrap()
    }
}

/// A random symbol for unconstrained probing. Countable alphabets draw
/// magnitudes log-uniformly up to `2^12` so that far-out symbols appear among
/// the adversarial cases.
pub fn random_symbol(alphabet: Alphabet, rng: &mut dyn RngCore) -> Symbol {
    match alphabet {
        Alphabet::Finite { size } => Symbol(rng.random_range(0..size as i64)),
        Alphabet::PlusMinus => {
            if rng.random::<bool>() {
                Symbol(1)
            } else {
                Symbol(-1)
            }
        }
        Alphabet::NonNegative => {
            let bits = rng.random_range(0..13u32);
            Symbol(rng.random_range(0..=(1i64 << bits)))
        }
        Alphabet::Integers => {
            let bits = rng.random_range(0..13u32);
            let mag = rng.random_range(0..=(1i64 << bits));
            if rng.random::<bool>() {
                Symbol(mag)
            } else {
                Symbol(-mag)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Generic conditional enumeration
// ---------------------------------------------------------------------------

/// Enumerate a conditional distribution in alphabet order.
///
/// Finite alphabets are enumerated exhaustively. Countable alphabets are
/// enumerated until the family's own tail bound — or, lacking one, the
/// certified unassigned mass `1 - sum` — drops below [`ENUM_CUTOFF`], and
/// fail with [`EvalError::HeavyTail`] if that does not happen within
/// [`MAX_ENUM`] symbols.
pub fn conditional_generic<G: GFunction + ?Sized>(
    g: &G,
    ctx: &CtxView<'_>,
    tol: f64,
) -> Result<CondDist, EvalError> {
    let alphabet = g.alphabet();
    if let Some(size) = alphabet.size() {
        let mut entries = Vec::with_capacity(size);
        for idx in 0..size {
            let s = alphabet.symbol_at(idx).unwrap();
            let c = g.eval(s, ctx, tol)?;
            entries.push(CondEntry { symbol: s, prob: c.value, abs_err: c.abs_err });
        }
        return Ok(CondDist { entries, cut_mass: 0.0, exhaustive: true });
    }

    let mut entries = Vec::new();
    let mut sum = KahanSum::new();
    let mut errs = 0.0;
    for idx in 0..MAX_ENUM {
        let s = alphabet.symbol_at(idx).unwrap();
        let c = g.eval(s, ctx, tol)?;
        entries.push(CondEntry { symbol: s, prob: c.value, abs_err: c.abs_err });
        sum.add(c.value);
        errs += c.abs_err;
        let beyond = match g.sigma_tail_bound(ctx, idx + 1) {
            Some(t) => t,
            // Certified unassigned mass: everything not provably already
            // enumerated.
            None => (1.0 - (sum.value() - errs)).max(0.0),
        };
        if beyond <= ENUM_CUTOFF {
            return Ok(CondDist { entries, cut_mass: beyond.max(0.0), exhaustive: beyond <= 0.0 });
        }
    }
    let remaining = match g.sigma_tail_bound(ctx, MAX_ENUM) {
        Some(t) => t,
        None => (1.0 - (sum.value() - errs)).max(0.0),
    };
    Err(EvalError::HeavyTail { enumerated: MAX_ENUM, remaining_mass: remaining })
}

// ---------------------------------------------------------------------------
// Normalization checking
// ---------------------------------------------------------------------------

/// Result of checking `sum_sigma g(sigma, ctx) = 1` at one context.
#[derive(Copy, Clone, Debug)]
pub struct NormalizationCheck {
    /// Certified residual: the portion of `|1 - partial sum|` that cannot be
    /// explained by the unenumerated tail or evaluation error (clamped at 0).
    pub residual: f64,
    /// Symbols enumerated before the tail cutoff was reached.
    pub enumerated: usize,
    /// Certified bound on the mass beyond the enumerated symbols.
    pub cut_mass: f64,
}

/// Check normalization of the conditional at `ctx`.
pub fn normalization_residual<G: GFunction + ?Sized>(
    g: &G,
    ctx: &CtxView<'_>,
    tol: f64,
) -> Result<NormalizationCheck, EvalError> {
    let dist = g.conditional(ctx, tol)?;
    let gap = (1.0 - dist.sum_raw()).abs();
    let explained = dist.cut_mass + dist.total_err();
    Ok(NormalizationCheck {
        residual: (gap - explained).max(0.0),
        enumerated: dist.entries.len(),
        cut_mass: dist.cut_mass,
    })
}

// ---------------------------------------------------------------------------
// Variation estimators
// ---------------------------------------------------------------------------

/// A sampled lower estimate paired with the family's analytic upper bound.
///
/// The two bracket the true variation quantity; reporting the pair (rather
/// than a point estimate) keeps the gap visible.
#[derive(Copy, Clone, Debug)]
pub struct BoundEstimate {
    pub sampled_lower: f64,
    pub analytic_upper: Option<f64>,
    pub pairs: usize,
}

fn sampled_pairs<'a>(
    g: &'a (impl GFunction + ?Sized),
    n: u64,
    pairs: usize,
    seed: u64,
) -> impl Iterator<Item = (Context, Context)> + 'a {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs).map(move |_| {
        let base = g.random_context(&mut rng, 12);
        let other = g.random_context_agreeing(&base, n as usize, &mut rng);
        (base, other)
    })
}

/// Sampled-vs-analytic estimate of the depth-`n` kernel variation
/// `sup_sigma |g(sigma, x) - g(sigma, y)|`.
pub fn var_estimate<G: GFunction + ?Sized>(
    g: &G,
    n: u64,
    pairs: usize,
    seed: u64,
    tol: f64,
) -> Result<BoundEstimate, EvalError> {
    let mut best: f64 = 0.0;
    for (x, y) in sampled_pairs(g, n, pairs, seed) {
        let (dx, dy) = g.conditional_pair(&x.view(), &y.view(), tol)?;
        for (ex, ey) in dx.entries.iter().zip(dy.entries.iter()) {
            best = best.max((ex.prob - ey.prob).abs());
        }
    }
    Ok(BoundEstimate { sampled_lower: best, analytic_upper: g.var_bound(n), pairs })
}

/// Sampled-vs-analytic estimate of the depth-`n` squared Hellinger variation
/// `sum_sigma (sqrt(g(sigma, x)) - sqrt(g(sigma, y)))^2`.
pub fn svar_sq_estimate<G: GFunction + ?Sized>(
    g: &G,
    n: u64,
    pairs: usize,
    seed: u64,
    tol: f64,
) -> Result<BoundEstimate, EvalError> {
    let mut best: f64 = 0.0;
    for (x, y) in sampled_pairs(g, n, pairs, seed) {
        let (dx, dy) = g.conditional_pair(&x.view(), &y.view(), tol)?;
        let mut acc = KahanSum::new();
        for (ex, ey) in dx.entries.iter().zip(dy.entries.iter()) {
            let d = ex.prob.max(0.0).sqrt() - ey.prob.max(0.0).sqrt();
            acc.add(d * d);
        }
        best = best.max(acc.value());
    }
    Ok(BoundEstimate { sampled_lower: best, analytic_upper: g.svar_sq_bound(n), pairs })
}

// ---------------------------------------------------------------------------
// Positivity probing
// ---------------------------------------------------------------------------

/// What a randomized search for zeros of the kernel found.
#[derive(Clone, Debug)]
pub struct PositivityReport {
    pub declared: Positivity,
    pub contexts_probed: usize,
    /// Smallest value seen on admissible symbols.
    pub min_support_value: f64,
    /// An admissible `(sigma, context)` whose probability is certifiably
    /// zero, if one was found.
    pub zero_witness: Option<(Symbol, Context)>,
    /// True when the findings contradict the declared positivity class.
    pub contradiction: bool,
}

/// Probe random contexts for zeros of `g` on admissible symbols and compare
/// against the family's declared positivity class.
pub fn positivity_probe<G: GFunction + ?Sized>(
    g: &G,
    contexts: usize,
    seed: u64,
    tol: f64,
) -> Result<PositivityReport, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_val = f64::INFINITY;
    let mut witness = None;
    for _ in 0..contexts {
        let ctx = g.random_context(&mut rng, 12);
        let view = ctx.view();
        let dist = g.conditional(&view, tol)?;
        for e in &dist.entries {
            if !g.is_allowed(e.symbol, &view) {
                continue;
            }
            min_val = min_val.min(e.prob);
            if e.prob <= e.abs_err && witness.is_none() {
                witness = Some((e.symbol, ctx.clone()));
            }
        }
    }
    let contradiction = matches!(g.positivity(), Positivity::StrictlyPositive) && witness.is_some();
    Ok(PositivityReport {
        declared: g.positivity(),
        contexts_probed: contexts,
        min_support_value: min_val,
        zero_witness: witness,
        contradiction,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    /// Context-free Bernoulli kernel on `{0, 1}` for exercising the generic
    /// machinery.
    struct Coin {
        p_one: f64,
    }

    impl GFunction for Coin {
        fn name(&self) -> String {
            format!("coin:p={}", self.p_one)
        }
        fn alphabet(&self) -> Alphabet {
            Alphabet::Finite { size: 2 }
        }
        fn depth(&self) -> Depth {
            Depth::Finite(0)
        }
        fn positivity(&self) -> Positivity {
            Positivity::StrictlyPositive
        }
        fn eval(&self, sigma: Symbol, _ctx: &CtxView<'_>, _tol: f64) -> Result<Certified, EvalError> {
            match sigma.0 {
                0 => Ok(Certified::exact(1.0 - self.p_one)),
                1 => Ok(Certified::exact(self.p_one)),
                _ => Err(EvalError::UnsupportedSymbol { family: self.name(), symbol: sigma }),
            }
        }
        fn sigma_tail_bound(&self, _ctx: &CtxView<'_>, enumerated: usize) -> Option<f64> {
            Some(if enumerated >= 2 { 0.0 } else { 1.0 })
        }
        fn var_bound(&self, _n: u64) -> Option<f64> {
            Some(0.0)
        }
        fn svar_sq_bound(&self, _m: u64) -> Option<f64> {
            Some(0.0)
        }
    }

    /// Context-free geometric kernel on the non-negative integers:
    /// `g(i) = 2^{-(i+1)}`. `with_tail_bound = false` forces the
    /// mass-accounting fallback in `conditional_generic`.
    struct Geo {
        with_tail_bound: bool,
    }

    impl GFunction for Geo {
        fn name(&self) -> String {
            "geo".into()
        }
        fn alphabet(&self) -> Alphabet {
            Alphabet::NonNegative
        }
        fn depth(&self) -> Depth {
            Depth::Finite(0)
        }
        fn positivity(&self) -> Positivity {
            Positivity::StrictlyPositive
        }
        fn eval(&self, sigma: Symbol, _ctx: &CtxView<'_>, _tol: f64) -> Result<Certified, EvalError> {
            if sigma.0 < 0 {
                return Err(EvalError::UnsupportedSymbol { family: self.name(), symbol: sigma });
            }
            Ok(Certified::exact(0.5f64.powi(sigma.0 as i32 + 1)))
        }
        fn sigma_tail_bound(&self, _ctx: &CtxView<'_>, enumerated: usize) -> Option<f64> {
            self.with_tail_bound.then(|| 0.5f64.powi(enumerated as i32))
        }
    }

    fn any_ctx() -> Context {
        Context::constant(Symbol(0))
    }

    #[test]
    fn finite_conditional_is_exhaustive() {
        let g = Coin { p_one: 0.3 };
        let d = g.conditional(&any_ctx().view(), DEFAULT_TOL).unwrap();
        assert_eq!(d.entries.len(), 2);
        assert!(d.exhaustive);
        assert_eq!(d.cut_mass, 0.0);
        assert_eq!(d.entries[0].symbol, Symbol(0));
        assert_eq!(d.entries[0].prob, 0.7);
        assert_eq!(d.entry_for(Symbol(1)).unwrap().prob, 0.3);
        assert!((d.sum_raw() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn countable_conditional_stops_at_cutoff() {
        let g = Geo { with_tail_bound: true };
        let d = g.conditional(&any_ctx().view(), DEFAULT_TOL).unwrap();
        // Tail after m symbols is 2^-m; 2^-40 is the first below 1e-12.
        assert_eq!(d.entries.len(), 40);
        assert!(!d.exhaustive);
        assert!(d.cut_mass <= ENUM_CUTOFF);
        assert!(d.cut_mass > 0.0);
    }

    #[test]
    fn countable_conditional_mass_accounting_fallback() {
        let g = Geo { with_tail_bound: false };
        let d = g.conditional(&any_ctx().view(), DEFAULT_TOL).unwrap();
        // Exact dyadic sums: the unassigned mass after m symbols is 2^-m.
        assert_eq!(d.entries.len(), 40);
        assert!(d.cut_mass <= ENUM_CUTOFF);
    }

    #[test]
    fn heavy_tail_is_reported() {
        /// Uniform-ish kernel whose tail bound never shrinks.
        struct Heavy;
        impl GFunction for Heavy {
            fn name(&self) -> String {
                "heavy".into()
            }
            fn alphabet(&self) -> Alphabet {
                Alphabet::NonNegative
            }
            fn depth(&self) -> Depth {
                Depth::Finite(0)
            }
            fn positivity(&self) -> Positivity {
                Positivity::StrictlyPositive
            }
            fn eval(&self, _s: Symbol, _c: &CtxView<'_>, _t: f64) -> Result<Certified, EvalError> {
                Ok(Certified::exact(0.0))
            }
            fn sigma_tail_bound(&self, _c: &CtxView<'_>, _e: usize) -> Option<f64> {
                Some(1.0)
            }
        }
        match Heavy.conditional(&any_ctx().view(), DEFAULT_TOL) {
            Err(EvalError::HeavyTail { enumerated, remaining_mass }) => {
                assert_eq!(enumerated, MAX_ENUM);
                assert_eq!(remaining_mass, 1.0);
            }
            other => panic!("expected heavy-tail error, got {other:?}"),
        }
    }

    #[test]
    fn normalization_residual_vanishes_for_exact_kernels() {
        let c = normalization_residual(&Coin { p_one: 0.25 }, &any_ctx().view(), DEFAULT_TOL).unwrap();
        assert_eq!(c.residual, 0.0);
        assert_eq!(c.enumerated, 2);
        let gtail = Geo { with_tail_bound: true };
        let c = normalization_residual(&gtail, &any_ctx().view(), DEFAULT_TOL).unwrap();
        assert!(c.residual <= 1e-15, "residual {}", c.residual);
    }

    #[test]
    fn estimators_bracket_for_context_free_kernel() {
        let g = Coin { p_one: 0.3 };
        let v = var_estimate(&g, 2, 32, 7, DEFAULT_TOL).unwrap();
        assert_eq!(v.sampled_lower, 0.0);
        assert_eq!(v.analytic_upper, Some(0.0));
        let s = svar_sq_estimate(&g, 0, 32, 7, DEFAULT_TOL).unwrap();
        assert_eq!(s.sampled_lower, 0.0);
    }

    #[test]
    fn positivity_probe_accepts_positive_kernel() {
        let r = positivity_probe(&Coin { p_one: 0.3 }, 50, 11, DEFAULT_TOL).unwrap();
        assert!(!r.contradiction);
        assert!(r.zero_witness.is_none());
        assert_eq!(r.min_support_value, 0.3);
    }

    #[test]
    fn random_contexts_are_deterministic_per_seed() {
        let g = Coin { p_one: 0.5 };
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert_eq!(g.random_context(&mut r1, 6), g.random_context(&mut r2, 6));
        }
    }

    #[test]
    fn agreeing_contexts_share_prefix() {
        let g = Geo { with_tail_bound: true };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let base = g.random_context(&mut rng, 8);
            let other = g.random_context_agreeing(&base, 4, &mut rng);
            for i in 0..4 {
                assert_eq!(base.coordinate(i), other.coordinate(i));
            }
        }
    }
}
