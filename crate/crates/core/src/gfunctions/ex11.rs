//! The renewal-type family on the non-negative integers.
//!
//! Fix `alpha > 0`, put `s = 3 + alpha`, and let `p` be a geometric
//! distribution on `{1, 2, ...}` with ratio `1/q`: `p_i = (q - 1) q^{-i}`.
//! The kernel splits the next symbol into "quiet" (`0`) and "active"
//! (`i >= 1`) according to a context-dependent activity
//!
//! ```text
//! b(x) = (1 / Z(s)) * sum_{k >= 1} k^{-s} / (1 + x_{k-1}),
//! g(0, x) = 1 - b(x),        g(i, x) = p_i * b(x)   (i >= 1),
//! ```
//!
//! with `Z` the Riemann zeta function, so `b(x) in (0, 1]` and the
//! conditional is exactly normalized by construction. Large symbols deep in
//! the context suppress the activity; the all-zeros context maximizes it
//! (`b = 1`), which makes the quiet symbol a genuine zero of the kernel
//! there.
//!
//! Depth-`n` variation decays like the zeta tail `sum_{k > n} k^{-s}`, which
//! is what makes this family the standard example with summable Hellinger
//! variation: the certified bounds below decay like `n^{-(1 + alpha/2)}`.

use super::{CondDist, CondEntry, Depth, EvalError, GFunction, Positivity};
use crate::existence::{Envelope, EnvelopeProvenance, EnvelopeTail};
use crate::numerics::{hurwitz_zeta, zeta, zeta_tail, Certified, KahanSum};
use crate::seqspace::{Alphabet, CtxView, Symbol, Tail};
use std::sync::Mutex;

pub struct Ex11 {
    alpha: f64,
    /// Geometric parameter: `p_i = (q - 1) q^{-i}`.
    q: u32,
    s: f64,
    zeta_s: Certified,
    /// Cached powers `k^{-s}`, index `k - 1`.
    pow_cache: Mutex<Vec<f64>>,
}

impl Ex11 {
    /// `alpha > 0` controls the tail exponent `s = 3 + alpha`; `q >= 2` the
    /// geometric active-symbol distribution.
    pub fn new(alpha: f64, q: u32) -> Result<Self, String> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(format!("ex11 needs alpha > 0, got {alpha}"));
        }
        if q < 2 {
            return Err(format!("ex11 needs geometric parameter q >= 2, got {q}"));
        }
        let s = 3.0 + alpha;
        Ok(Ex11 { alpha, q, s, zeta_s: zeta(s), pow_cache: Mutex::new(Vec::new()) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `p_i` for `i >= 1`.
    fn p(&self, i: i64) -> f64 {
        let q = self.q as f64;
        (q - 1.0) * q.powi(-(i as i32))
    }

    /// Tail mass `sum_{i >= m} p_i = q^{1-m}` for `m >= 1`.
    fn p_tail(&self, m: usize) -> f64 {
        if m == 0 {
            return 1.0;
        }
        (self.q as f64).powi(1 - m as i32)
    }

    /// Coordinate index beyond which dropped head terms stay below `eps`.
    fn head_cutoff(&self, eps: f64) -> usize {
        // Integral bound: sum_{k > K} k^{-s} <= K^{1-s} / (s - 1).
        let k = (1.0 / ((self.s - 1.0) * eps)).powf(1.0 / (self.s - 1.0));
        (k.ceil() as usize).max(1)
    }

    /// Certified activity `b(ctx)`: the conditional probability of an active
    /// (nonzero) next symbol.
    ///
    /// Explicit head coordinates are summed directly (up to a certified
    /// cutoff; coordinates beyond it cannot move the value by more than the
    /// returned error bound) and the tail rule is closed in terms of zeta
    /// tails (constant tails) or Hurwitz zeta values (periodic tails).
    pub fn activity(&self, ctx: &CtxView<'_>, tol: f64) -> Result<Certified, EvalError> {
        let check = |sym: Symbol| -> Result<f64, EvalError> {
            if sym.0 < 0 {
                return Err(EvalError::OutsideSubshift { family: self.name() });
            }
            Ok(sym.0 as f64)
        };

        // Budget: half the tolerance (scaled by zeta) for head truncation,
        // the rest absorbs tail-form and roundoff error.
        let eps_head = 0.5 * tol * self.zeta_s.value;
        let h = ctx.head_len();
        let cutoff = self.head_cutoff(eps_head);
        let reach = h.min(cutoff);

        let mut sum = KahanSum::new();
        let mut err = 0.0;
        {
            let mut cache = self.pow_cache.lock().unwrap();
            while cache.len() < reach {
                let k = cache.len() as f64 + 1.0;
                cache.push(k.powf(-self.s));
            }
            for (j, sym) in ctx.head_iter().take(reach).enumerate() {
                let x = check(sym)?;
                sum.add(cache[j] / (1.0 + x));
            }
        }

        if h > cutoff {
            // Dropped head terms lie in (0, sum_{k > cutoff} k^-s]; charge
            // the whole interval to the error bound.
            err += (cutoff as f64).powf(1.0 - self.s) / (self.s - 1.0);
        } else {
            match ctx.tail {
                Tail::Constant(c) => {
                    let x = check(*c)?;
                    let t = zeta_tail(self.s, h as u64);
                    sum.add(t.value / (1.0 + x));
                    err += t.abs_err / (1.0 + x);
                }
                Tail::Periodic(w) => {
                    let p = w.len() as f64;
                    let scale = p.powf(-self.s);
                    for (r, sym) in w.iter().enumerate() {
                        let x = check(*sym)?;
                        let hz = hurwitz_zeta(self.s, (h as f64 + 1.0 + r as f64) / p);
                        sum.add(hz.value * scale / (1.0 + x));
                        err += hz.abs_err * scale / (1.0 + x);
                    }
                }
            }
        }
        // Compensated summation leaves O(eps)-relative roundoff.
        err += 8.0 * f64::EPSILON * self.zeta_s.value;

        let mut b = Certified::new(sum.value(), err).div(self.zeta_s);
        // b in (0, 1] mathematically; clamp float spill into the bound.
        b.value = b.value.clamp(0.0, 1.0);
        if b.abs_err > tol {
            return Err(EvalError::PrecisionUnavailable { requested: tol, achievable: b.abs_err });
        }
        Ok(b)
    }
}

impl GFunction for Ex11 {
    fn name(&self) -> String {
        format!("ex11:alpha={},p=geom{}", self.alpha, self.q)
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::NonNegative
    }

    fn depth(&self) -> Depth {
        Depth::Infinite
    }

    fn positivity(&self) -> Positivity {
        // g(0, x) vanishes exactly at the all-zeros context.
        Positivity::ZerosPossible
    }

    fn eval(&self, sigma: Symbol, ctx: &CtxView<'_>, tol: f64) -> Result<Certified, EvalError> {
        if sigma.0 < 0 {
            return Err(EvalError::UnsupportedSymbol { family: self.name(), symbol: sigma });
        }
        let b = self.activity(ctx, tol)?;
        if sigma.0 == 0 {
            Ok(Certified::new(1.0 - b.value, b.abs_err))
        } else {
            Ok(b.scale(self.p(sigma.0)))
        }
    }

    fn sigma_tail_bound(&self, _ctx: &CtxView<'_>, enumerated: usize) -> Option<f64> {
        // Active mass beyond the first m symbols {0, .., m-1} is
        // b * sum_{i >= m} p_i <= q^{1-m}.
        Some(self.p_tail(enumerated).min(1.0))
    }

    fn var_bound(&self, n: u64) -> Option<f64> {
        let t = zeta_tail(self.s, n);
        Some(((t.value + t.abs_err) / (self.zeta_s.value - self.zeta_s.abs_err)).min(1.0))
    }

    fn svar_sq_bound(&self, m: u64) -> Option<f64> {
        if m == 0 {
            return Some(2.0);
        }
        // For contexts agreeing in their first m coordinates the activities
        // differ by at most V = var_bound(m), and the squared Hellinger
        // distance between the two conditionals is at most
        // V + (1 - sqrt(1 - V))^2 <= sqrt(V) (the last step valid for
        // V <= 0.63, which holds for every m >= 1 since s > 3).
        Some(self.var_bound(m).unwrap().sqrt().min(2.0))
    }

    fn svar_sq_tail_sum_bound(&self, n: u64) -> Option<f64> {
        // sqrt(V(m)) <= m^{(1-s)/2} / sqrt((s-1) Z(s)); summing over m > n
        // gives a zeta tail with exponent (s-1)/2 > 1.
        let t = zeta_tail((self.s - 1.0) / 2.0, n);
        let denom = ((self.s - 1.0) * (self.zeta_s.value - self.zeta_s.abs_err)).sqrt();
        Some((t.value + t.abs_err) / denom)
    }

    fn builtin_envelope(&self) -> Option<Envelope> {
        // g(0, x) = 1 - b <= 1 = K * 1/2 and g(i, x) <= p_i = K * p_i / 2
        // with K = 2: pi puts mass 1/2 on the quiet symbol and p/2 on the
        // active ones. List symbols 0..=8 explicitly; the remaining geometric
        // mass is q^{-8} / 2.
        let listed = 9usize;
        let mut weights = vec![0.5];
        for i in 1..listed {
            weights.push(0.5 * self.p(i as i64));
        }
        let coeff = 0.5 * self.p_tail(listed);
        let ratio = 1.0 / self.q as f64;
        Some(
            Envelope::new(
                2.0,
                self.alphabet(),
                weights,
                EnvelopeTail::Geometric { coeff, ratio },
                EnvelopeProvenance::ExampleSpecific,
            )
            .expect("built-in envelope is well-formed"),
        )
    }

    fn conditional(&self, ctx: &CtxView<'_>, tol: f64) -> Result<CondDist, EvalError> {
        // One activity evaluation serves every symbol.
        let b = self.activity(ctx, tol)?;
        let b_hi = b.value + b.abs_err;
        let mut entries =
            vec![CondEntry { symbol: Symbol(0), prob: 1.0 - b.value, abs_err: b.abs_err }];
        loop {
            let i = entries.len() as i64;
            let beyond = self.p_tail(entries.len()) * b_hi;
            if beyond <= super::ENUM_CUTOFF {
                return Ok(CondDist { entries, cut_mass: beyond, exhaustive: beyond <= 0.0 });
            }
            let p = self.p(i);
            entries.push(CondEntry {
                symbol: Symbol(i),
                prob: p * b.value,
                abs_err: p * b.abs_err + f64::EPSILON * p,
            });
        }
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfunctions::{
        normalization_residual, positivity_probe, svar_sq_estimate, var_estimate, DEFAULT_TOL,
    };
    use crate::seqspace::Context;

    fn canonical() -> Ex11 {
        Ex11::new(0.5, 2).unwrap()
    }

    fn ctx(s: &str) -> Context {
        s.parse().unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Ex11::new(0.0, 2).is_err());
        assert!(Ex11::new(-1.0, 2).is_err());
        assert!(Ex11::new(0.5, 1).is_err());
    }

    #[test]
    fn all_zeros_context_has_unit_activity() {
        let g = canonical();
        let x = ctx("const:0");
        let b = g.activity(&x.view(), DEFAULT_TOL).unwrap();
        assert_eq!(b.value, 1.0, "activity at the all-zeros point is exactly 1");
        assert_eq!(g.eval(Symbol(0), &x.view(), DEFAULT_TOL).unwrap().value, 0.0);
        for i in 1..6 {
            let got = g.eval(Symbol(i), &x.view(), DEFAULT_TOL).unwrap();
            let want = 0.5f64.powi(i as i32);
            assert!((got.value - want).abs() < 1e-12, "g({i}) = {} want {want}", got.value);
        }
    }

    #[test]
    fn all_ones_context_halves_activity() {
        let g = canonical();
        let b = g.activity(&ctx("const:1").view(), DEFAULT_TOL).unwrap();
        assert!((b.value - 0.5).abs() < 1e-12, "b = {}", b.value);
    }

    #[test]
    fn mixed_context_matches_reference_values() {
        // Reference values computed with 25-digit arithmetic for
        // alpha = 0.5, head (2, 0, 1), constant tail 3.
        let g = canonical();
        let x = ctx("word:2,0,1;tail=3");
        let b = g.activity(&x.view(), DEFAULT_TOL).unwrap();
        assert!((b.value - 0.38753951522235926054).abs() < 1e-12, "b = {}", b.value);
        let g0 = g.eval(Symbol(0), &x.view(), DEFAULT_TOL).unwrap();
        assert!((g0.value - 0.61246048477764073946).abs() < 1e-12);
        let g2 = g.eval(Symbol(2), &x.view(), DEFAULT_TOL).unwrap();
        assert!((g2.value - 0.09688487880558981513).abs() < 1e-12);
    }

    #[test]
    fn periodic_tail_matches_reference_value() {
        let g = canonical();
        // Closed form: odd positions contribute with weight 1, even with 1/3,
        // so b = 1 - (2/3) 2^{-s}.
        let b = g.activity(&ctx("periodic:0,2").view(), DEFAULT_TOL).unwrap();
        assert!((b.value - 0.94107443490112103963).abs() < 1e-12, "b = {}", b.value);
    }

    #[test]
    fn certified_error_within_tolerance() {
        let g = canonical();
        for lit in ["const:0", "const:7", "word:5,0,1000;tail=2", "periodic:1,0,3"] {
            let b = g.activity(&ctx(lit).view(), DEFAULT_TOL).unwrap();
            assert!(b.abs_err <= DEFAULT_TOL, "{lit}: err {}", b.abs_err);
        }
    }

    #[test]
    fn coordinates_beyond_certified_cutoff_cannot_move_the_value() {
        let g = canonical();
        let len = 6000;
        let mut head = vec![Symbol(0); len];
        let a = Context::new(head.clone(), Tail::Constant(Symbol(1))).unwrap();
        head[len - 1] = Symbol(999_999);
        let b = Context::new(head, Tail::Constant(Symbol(1))).unwrap();
        let va = g.activity(&a.view(), DEFAULT_TOL).unwrap();
        let vb = g.activity(&b.view(), DEFAULT_TOL).unwrap();
        assert_eq!(va.value.to_bits(), vb.value.to_bits());
        assert!(va.abs_err <= DEFAULT_TOL);
    }

    #[test]
    fn negative_coordinates_are_outside_the_subshift() {
        let g = canonical();
        let x = ctx("word:1,-2;tail=0");
        assert!(matches!(
            g.eval(Symbol(1), &x.view(), DEFAULT_TOL),
            Err(EvalError::OutsideSubshift { .. })
        ));
        assert!(matches!(
            g.eval(Symbol(-3), &ctx("const:0").view(), DEFAULT_TOL),
            Err(EvalError::UnsupportedSymbol { .. })
        ));
    }

    #[test]
    fn conditional_is_normalized_with_tiny_residual() {
        let g = canonical();
        for lit in ["const:0", "const:2", "word:3,1;tail=0", "periodic:2,5"] {
            let c = normalization_residual(&g, &ctx(lit).view(), DEFAULT_TOL).unwrap();
            assert!(c.residual <= 1e-12, "{lit}: residual {}", c.residual);
        }
    }

    #[test]
    fn variation_bounds_have_the_right_shape() {
        let g = canonical();
        assert_eq!(g.var_bound(0), Some(1.0));
        assert_eq!(g.svar_sq_bound(0), Some(2.0));
        // Monotone decreasing, and the square-root relation at m >= 1.
        let mut prev = f64::INFINITY;
        for m in 1..50 {
            let v = g.var_bound(m).unwrap();
            let s = g.svar_sq_bound(m).unwrap();
            assert!(v < prev);
            assert!((s - v.sqrt()).abs() <= 1e-12 * s.max(1.0));
            prev = v;
        }
        // The tail-sum bound dominates explicit partial sums of the bound.
        let tail = g.svar_sq_tail_sum_bound(10).unwrap();
        let partial: f64 = (11..2000).map(|m| g.svar_sq_bound(m).unwrap()).sum();
        assert!(tail >= partial, "tail bound {tail} < partial sum {partial}");
        assert!(tail.is_finite());
    }

    #[test]
    fn sampled_variation_stays_under_analytic_bound() {
        let g = canonical();
        for n in [0u64, 1, 3, 8] {
            let v = var_estimate(&g, n, 60, 17, DEFAULT_TOL).unwrap();
            assert!(
                v.sampled_lower <= v.analytic_upper.unwrap() + 1e-8,
                "var depth {n}: sampled {} > bound {:?}",
                v.sampled_lower,
                v.analytic_upper
            );
            let s = svar_sq_estimate(&g, n, 60, 17, DEFAULT_TOL).unwrap();
            assert!(
                s.sampled_lower <= s.analytic_upper.unwrap() + 1e-8,
                "svar depth {n}: sampled {} > bound {:?}",
                s.sampled_lower,
                s.analytic_upper
            );
        }
    }

    #[test]
    fn positivity_probe_finds_the_quiet_zero() {
        let g = canonical();
        let r = positivity_probe(&g, 200, 3, DEFAULT_TOL).unwrap();
        // The corner sampler hits the all-zeros context, where the quiet
        // symbol has certified probability zero — consistent with the
        // declared class.
        assert!(!r.contradiction);
        let (sym, w) = r.zero_witness.expect("all-zeros corner should be probed");
        assert_eq!(sym, Symbol(0));
        assert_eq!(w.to_string(), "const:0");
    }

    #[test]
    fn builtin_envelope_dominates_by_construction() {
        let g = canonical();
        let env = g.builtin_envelope().unwrap();
        assert_eq!(env.k(), 2.0);
        assert_eq!(env.pi_at(0), 0.5);
        assert!((env.pi_at(1) - 0.25).abs() < 1e-15);
        assert!((env.mass_beyond(0) - 1.0).abs() < 1e-12);
        // K * pi matches the per-symbol suprema exactly: 1 for the quiet
        // symbol, p_i for active ones.
        for i in 1..20 {
            let sup = 0.5f64.powi(i as i32);
            assert!((env.k() * env.pi_at(i) - sup).abs() < 1e-15 * sup.max(1e-6), "i = {i}");
        }
    }
}
