//! Uniform nearest-neighbor walk on the integers, as a depth-1 kernel on a
//! subshift of finite type.
//!
//! The configuration space is the set of integer sequences with
//! `|x_j - x_{j+1}| <= 1` for all `j`; the kernel is constant on it:
//!
//! ```text
//! g(sigma, x) = 1/3   when |sigma - x_0| <= 1,     0 otherwise.
//! ```
//!
//! Every admissible step is equally likely, so the chain is an unbiased
//! lazy walk. The interest is structural rather than probabilistic: the
//! alphabet is countably infinite with *local* geometry, no stationary
//! probability measure exists (mass escapes to infinity diffusively), and the
//! kernel has zero variation beyond depth 1. It exercises the subshift
//! plumbing, escape diagnostics and truncation bookkeeping.

use super::{CondDist, CondEntry, Depth, EvalError, GFunction, Positivity};
use crate::numerics::Certified;
use crate::seqspace::{Alphabet, Context, CtxView, Symbol, Tail};
use rand::{Rng, RngCore};

pub struct RandomWalkThird;

/// Largest `|x_0|` for which a conditional enumeration (which must list the
/// whole alphabet prefix up to `x_0 + 1`) is considered reasonable.
const SUPPORT_INDEX_CAP: usize = 1 << 20;

impl RandomWalkThird {
    pub fn new() -> Self {
        RandomWalkThird
    }

    fn step_ok(a: Symbol, b: Symbol) -> bool {
        (a.0 - b.0).abs() <= 1
    }
}

impl Default for RandomWalkThird {
    fn default() -> Self {
        Self::new()
    }
}

impl GFunction for RandomWalkThird {
    fn name(&self) -> String {
        "randomwalk_third".into()
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::Integers
    }

    fn depth(&self) -> Depth {
        Depth::Finite(1)
    }

    fn positivity(&self) -> Positivity {
        Positivity::StrictlyPositive
    }

    fn context_allowed(&self, ctx: &CtxView<'_>) -> bool {
        // All consecutive coordinate pairs must be within one step; beyond
        // the explicit head this reduces to the tail word's internal and
        // wrap-around differences.
        let mut prev: Option<Symbol> = None;
        for sym in ctx.head_iter() {
            if let Some(p) = prev {
                if !Self::step_ok(p, sym) {
                    return false;
                }
            }
            prev = Some(sym);
        }
        match ctx.tail {
            Tail::Constant(s) => prev.is_none() || Self::step_ok(prev.unwrap(), *s),
            Tail::Periodic(w) => {
                if let Some(p) = prev {
                    if !Self::step_ok(p, w[0]) {
                        return false;
                    }
                }
                for pair in w.windows(2) {
                    if !Self::step_ok(pair[0], pair[1]) {
                        return false;
                    }
                }
                Self::step_ok(w[w.len() - 1], w[0])
            }
        }
    }

    fn is_allowed(&self, sigma: Symbol, ctx: &CtxView<'_>) -> bool {
        Self::step_ok(sigma, ctx.coordinate(0)) && self.context_allowed(ctx)
    }

    fn eval(&self, sigma: Symbol, ctx: &CtxView<'_>, _tol: f64) -> Result<Certified, EvalError> {
        if !self.context_allowed(ctx) {
            return Err(EvalError::OutsideSubshift { family: self.name() });
        }
        if Self::step_ok(sigma, ctx.coordinate(0)) {
            Ok(Certified::exact(1.0 / 3.0))
        } else {
            Ok(Certified::exact(0.0))
        }
    }

    fn sigma_tail_bound(&self, ctx: &CtxView<'_>, enumerated: usize) -> Option<f64> {
        // All mass sits on the three neighbors of x_0; count those whose
        // enumeration index is still beyond the prefix.
        let x0 = ctx.coordinate(0).0;
        let a = self.alphabet();
        let mut left = 0u32;
        for d in -1..=1i64 {
            if a.index_of(Symbol(x0 + d)).unwrap() >= enumerated {
                left += 1;
            }
        }
        Some(left as f64 / 3.0)
    }

    fn var_bound(&self, n: u64) -> Option<f64> {
        Some(if n == 0 { 1.0 / 3.0 } else { 0.0 })
    }

    fn svar_sq_bound(&self, m: u64) -> Option<f64> {
        // Contexts disagreeing at coordinate 0 can have disjoint supports.
        Some(if m == 0 { 2.0 } else { 0.0 })
    }

    fn svar_sq_tail_sum_bound(&self, _n: u64) -> Option<f64> {
        Some(0.0)
    }

    fn conditional(&self, ctx: &CtxView<'_>, _tol: f64) -> Result<CondDist, EvalError> {
        if !self.context_allowed(ctx) {
            return Err(EvalError::OutsideSubshift { family: self.name() });
        }
        let a = self.alphabet();
        let x0 = ctx.coordinate(0).0;
        let top = (-1..=1i64)
            .map(|d| a.index_of(Symbol(x0 + d)).unwrap())
            .max()
            .unwrap();
        if top + 1 > SUPPORT_INDEX_CAP {
            return Err(EvalError::HeavyTail { enumerated: SUPPORT_INDEX_CAP, remaining_mass: 1.0 });
        }
        let mut entries = vec![CondEntry { symbol: Symbol(0), prob: 0.0, abs_err: 0.0 }; top + 1];
        for (idx, e) in entries.iter_mut().enumerate() {
            e.symbol = a.symbol_at(idx).unwrap();
        }
        for d in -1..=1i64 {
            let idx = a.index_of(Symbol(x0 + d)).unwrap();
            entries[idx].prob = 1.0 / 3.0;
        }
        Ok(CondDist { entries, cut_mass: 0.0, exhaustive: true })
    }

    fn random_context(&self, rng: &mut dyn RngCore, max_head: usize) -> Context {
        // A genuine walk segment: start log-uniformly within +-2^8, step
        // through the head, close with a constant tail at the last value.
        let bits = rng.random_range(0..9u32);
        let mag = rng.random_range(0..=(1i64 << bits));
        let mut pos = if rng.random::<bool>() { mag } else { -mag };
        let len = rng.random_range(0..=max_head);
        let mut head = Vec::with_capacity(len);
        for _ in 0..len {
            head.push(Symbol(pos));
            pos += rng.random_range(-1..=1i64);
        }
        Context::new(head, Tail::Constant(Symbol(pos))).unwrap()
    }

    fn random_context_agreeing(&self, base: &Context, n: usize, rng: &mut dyn RngCore) -> Context {
        if n == 0 {
            return self.random_context(rng, 8);
        }
        let mut head: Vec<Symbol> = (0..n).map(|i| base.coordinate(i)).collect();
        let mut pos = head[n - 1].0;
        for _ in 0..rng.random_range(0..5usize) {
            pos += rng.random_range(-1..=1i64);
            head.push(Symbol(pos));
        }
        Context::new(head, Tail::Constant(Symbol(pos))).unwrap()
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfunctions::{normalization_residual, DEFAULT_TOL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(s: &str) -> Context {
        s.parse().unwrap()
    }

    #[test]
    fn only_neighbor_steps_are_allowed() {
        let g = RandomWalkThird::new();
        let x = ctx("word:5,4;tail=4");
        for (sym, want) in [(4, 1.0 / 3.0), (5, 1.0 / 3.0), (6, 1.0 / 3.0), (7, 0.0), (3, 0.0), (-5, 0.0)] {
            let v = g.eval(Symbol(sym), &x.view(), DEFAULT_TOL).unwrap();
            assert_eq!(v.value, want, "sigma = {sym}");
            assert_eq!(v.abs_err, 0.0);
            assert_eq!(g.is_allowed(Symbol(sym), &x.view()), want > 0.0);
        }
    }

    #[test]
    fn context_validity_checks_all_junctions() {
        let g = RandomWalkThird::new();
        assert!(g.context_allowed(&ctx("const:7").view()));
        assert!(g.context_allowed(&ctx("word:3,2,1,0;tail=0").view()));
        assert!(g.context_allowed(&ctx("periodic:0,1").view()));
        // broken inside the head
        assert!(!g.context_allowed(&ctx("word:3,1;tail=1").view()));
        // broken at the head-to-tail junction
        assert!(!g.context_allowed(&ctx("word:3,2;tail=4").view()));
        // broken at the periodic wrap-around
        assert!(!g.context_allowed(&ctx("periodic:0,1,2").view()));
        assert!(matches!(
            g.eval(Symbol(0), &ctx("word:3,1;tail=1").view(), DEFAULT_TOL),
            Err(EvalError::OutsideSubshift { .. })
        ));
    }

    #[test]
    fn conditional_lists_the_enumeration_prefix() {
        let g = RandomWalkThird::new();
        let d = g.conditional(&ctx("const:2").view(), DEFAULT_TOL).unwrap();
        // Support {1, 2, 3}; the deepest enumeration index is 5 (symbol +3).
        assert_eq!(d.entries.len(), 6);
        assert!(d.exhaustive);
        let probs: Vec<f64> = d.entries.iter().map(|e| e.prob).collect();
        // Enumeration order 0, +1, -1, +2, -2, +3.
        assert_eq!(probs, vec![0.0, 1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0, 1.0 / 3.0]);
        let r = normalization_residual(&g, &ctx("const:2").view(), DEFAULT_TOL).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn far_out_supports_are_refused_rather_than_materialized() {
        let g = RandomWalkThird::new();
        let far = Context::constant(Symbol(SUPPORT_INDEX_CAP as i64));
        assert!(matches!(
            g.conditional(&far.view(), DEFAULT_TOL),
            Err(EvalError::HeavyTail { .. })
        ));
    }

    #[test]
    fn random_contexts_respect_the_subshift() {
        let g = RandomWalkThird::new();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let c = g.random_context(&mut rng, 10);
            assert!(g.context_allowed(&c.view()), "invalid context {c}");
            let d = g.random_context_agreeing(&c, 3, &mut rng);
            assert!(g.context_allowed(&d.view()), "invalid agreeing context {d}");
            for i in 0..3 {
                assert_eq!(c.coordinate(i), d.coordinate(i));
            }
        }
    }

    #[test]
    fn variation_vanishes_beyond_depth_one() {
        let g = RandomWalkThird::new();
        assert_eq!(g.var_bound(0), Some(1.0 / 3.0));
        assert_eq!(g.var_bound(1), Some(0.0));
        assert_eq!(g.svar_sq_bound(0), Some(2.0));
        assert_eq!(g.svar_sq_bound(5), Some(0.0));
        assert_eq!(g.svar_sq_tail_sum_bound(0), Some(0.0));
    }
}
