//! Dominating envelopes: product-measure certificates for the existence of
//! stationary chains.
//!
//! An *envelope* for a kernel `g` is a constant `K >= 1` together with a
//! probability vector `pi` on the alphabet such that
//!
//! ```text
//! g(sigma, x) <= K * pi(sigma)      for every sigma and context x.
//! ```
//!
//! Such a certificate bounds the chain by an i.i.d. product measure, which is
//! the workhorse hypothesis behind the existence arguments — and it doubles
//! as an exact sampling device: proposing from `pi` and accepting with
//! probability `g / (K pi)` draws from the conditional with acceptance rate
//! exactly `1/K`, with no truncation of countable alphabets.
//!
//! Envelopes come from three places (recorded as provenance): supplied by the
//! caller, derived from a uniform log-ratio bound of the family
//! ([`envelope_from_var1`]), or shipped with a built-in family.

use crate::gfunctions::{EvalError, GFunction, Positivity};
use crate::numerics::KahanSum;
use crate::seqspace::{Alphabet, Context, Symbol};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Mass of `pi` beyond the explicitly listed prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum EnvelopeTail {
    /// `pi` is entirely carried by the listed entries.
    None,
    /// The mass beyond enumeration index `len + j` is `coeff * ratio^j`.
    Geometric { coeff: f64, ratio: f64 },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeProvenance {
    User,
    Var1Derived,
    ExampleSpecific,
}

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("envelope constant must satisfy K >= 1 (got {0})")]
    BadConstant(f64),
    #[error("envelope weights must be, in order, the nonnegative probabilities of the alphabet prefix")]
    BadWeights,
    #[error("envelope mass sums to {0}, not 1 (tolerance 1e-12)")]
    NotNormalized(f64),
    #[error("geometric tail needs coeff >= 0 and 0 < ratio < 1")]
    BadTail,
}

/// A dominating product-measure certificate `(K, pi)` for a kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    k: f64,
    alphabet: Alphabet,
    /// `pi` over the first `weights.len()` symbols in enumeration order.
    weights: Vec<f64>,
    tail: EnvelopeTail,
    provenance: EnvelopeProvenance,
}

impl Envelope {
    pub fn new(
        k: f64,
        alphabet: Alphabet,
        weights: Vec<f64>,
        tail: EnvelopeTail,
        provenance: EnvelopeProvenance,
    ) -> Result<Self, EnvelopeError> {
        if !(k >= 1.0) {
            return Err(EnvelopeError::BadConstant(k));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(EnvelopeError::BadWeights);
        }
        if let Some(size) = alphabet.size() {
            if weights.len() > size {
                return Err(EnvelopeError::BadWeights);
            }
        }
        let tail_mass = match &tail {
            EnvelopeTail::None => 0.0,
            EnvelopeTail::Geometric { coeff, ratio } => {
                if !(*coeff >= 0.0) || !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(EnvelopeError::BadTail);
                }
                *coeff
            }
        };
        let mut sum = KahanSum::new();
        for &w in &weights {
            sum.add(w);
        }
        sum.add(tail_mass);
        let total = sum.value();
        if (total - 1.0).abs() > 1e-12 {
            return Err(EnvelopeError::NotNormalized(total));
        }
        Ok(Envelope { k, alphabet, weights, tail, provenance })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn provenance(&self) -> EnvelopeProvenance {
        self.provenance
    }

    pub fn tail(&self) -> &EnvelopeTail {
        &self.tail
    }

    /// `pi` at enumeration index `idx` (tail indices follow the closed form).
    pub fn pi_at(&self, idx: usize) -> f64 {
        if idx < self.weights.len() {
            return self.weights[idx];
        }
        match &self.tail {
            EnvelopeTail::None => 0.0,
            EnvelopeTail::Geometric { coeff, ratio } => {
                let j = (idx - self.weights.len()) as i32;
                coeff * ratio.powi(j) * (1.0 - ratio)
            }
        }
    }

    /// Total `pi`-mass at enumeration indices `>= idx`.
    pub fn mass_beyond(&self, idx: usize) -> f64 {
        let tail_mass = |j: usize| match &self.tail {
            EnvelopeTail::None => 0.0,
            EnvelopeTail::Geometric { coeff, ratio } => coeff * ratio.powi(j as i32),
        };
        if idx >= self.weights.len() {
            return tail_mass(idx - self.weights.len());
        }
        let mut s = KahanSum::new();
        for &w in &self.weights[idx..] {
            s.add(w);
        }
        s.add(tail_mass(0));
        s.value()
    }

    /// Inverse-CDF index for a uniform draw `u` in `[0, 1)`.
    ///
    /// Walks the enumeration accumulating `pi` until the running total
    /// exceeds `u`. Returns `None` only if `u` exceeds all reachable mass
    /// (possible for `u` inside the final rounding gap).
    pub fn sample_index(&self, u: f64) -> Option<usize> {
        let mut cum = KahanSum::new();
        let cap = self.weights.len() + 4096;
        for idx in 0..cap {
            cum.add(self.pi_at(idx));
            if u < cum.value() {
                return Some(idx);
            }
        }
        None
    }

    /// Serialize in the artifact layout:
    /// `{"K":..,"pi":{"<symbol>":..},"tail":{..},"provenance":..}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut pi = BTreeMap::new();
        for (idx, &w) in self.weights.iter().enumerate() {
            pi.insert(self.alphabet.symbol_at(idx).unwrap().0, w);
        }
        serde_json::json!({
            "K": self.k,
            "pi": pi,
            "tail": serde_json::to_value(&self.tail).unwrap(),
            "provenance": serde_json::to_value(self.provenance).unwrap(),
        })
    }
}

// ---------------------------------------------------------------------------
// Domination checking
// ---------------------------------------------------------------------------

/// Outcome of sampling-based verification of `g <= K pi`.
#[derive(Clone, Debug)]
pub struct DominationReport {
    pub contexts_probed: usize,
    /// Minimum of `K pi(sigma) - (g(sigma, x) - err)` over everything probed:
    /// the margin against the *certified lower* evaluation. Negative only
    /// when some probed point exceeds its envelope bound by more than the
    /// evaluation error, so envelopes that are tight up to equality (the
    /// usual case for shipped certificates) still report nonnegative slack.
    pub min_slack: f64,
    /// A probed point certainly violating domination, if any: `(sigma,
    /// context, negative slack)`.
    pub violation: Option<(Symbol, Context, f64)>,
}

/// Probe random admissible contexts (including deterministic corner cases
/// produced by the family's context sampler) for violations of the envelope
/// inequality. This is a falsifier: a reported violation is beyond the
/// evaluations' certified error and therefore genuine, while a clean report
/// means no certified violation was found at the probed points.
pub fn domination_check(
    g: &dyn GFunction,
    env: &Envelope,
    contexts: usize,
    seed: u64,
    tol: f64,
) -> Result<DominationReport, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_slack = f64::INFINITY;
    let mut violation: Option<(Symbol, Context, f64)> = None;
    for _ in 0..contexts {
        let ctx = g.random_context(&mut rng, 12);
        let dist = g.conditional(&ctx.view(), tol)?;
        for (idx, e) in dist.entries.iter().enumerate() {
            let slack = env.k() * env.pi_at(idx) - (e.prob - e.abs_err);
            if slack < min_slack {
                min_slack = slack;
                if slack < 0.0 && violation.is_none() {
                    violation = Some((e.symbol, ctx.clone(), slack));
                }
            }
        }
        // Beyond the enumerated prefix only aggregate mass is comparable.
        // Normalization certifies the unlisted mass from below: it is at
        // least 1 minus the listed upper evaluations. Flag only when that
        // floor still exceeds the envelope's remaining budget; the cut mass
        // itself is an upper bound and cannot certify anything.
        let listed_hi: f64 = dist.entries.iter().map(|e| e.prob + e.abs_err).sum();
        let tail_floor = (1.0 - listed_hi).max(0.0);
        let budget = env.k() * env.mass_beyond(dist.entries.len());
        if tail_floor > budget {
            let sym = g.alphabet().symbol_at(dist.entries.len()).unwrap();
            let gap = budget - tail_floor;
            min_slack = min_slack.min(gap);
            if violation.is_none() {
                violation = Some((sym, ctx.clone(), gap));
            }
        }
    }
    Ok(DominationReport { contexts_probed: contexts, min_slack, violation })
}

// ---------------------------------------------------------------------------
// Envelope derivation from a uniform log-ratio bound
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum DerivationError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error("family provides no uniform log-ratio bound")]
    NoLogRatioBound,
    #[error("envelope invalid at the base context: g({symbol}, x0) = 0 but positive values elsewhere cannot be ruled out")]
    InvalidAtBase { symbol: Symbol },
    #[error("base conditional leaves {cut_mass:e} unenumerated mass and the family ships no tail form for pi")]
    UnresolvedTail { cut_mass: f64 },
}

/// Derive an envelope from the family's uniform log-ratio bound `L`:
/// `K = e^L` and `pi(sigma) = g(sigma, x0)` at the chosen base context.
///
/// The base conditional must either be exhaustive or leave zero certified
/// mass beyond its prefix; countable families should ship built-in envelopes
/// with explicit tail forms instead.
pub fn envelope_from_var1(
    g: &dyn GFunction,
    x0: &Context,
    tol: f64,
) -> Result<Envelope, DerivationError> {
    let l = g.log_ratio_bound().ok_or(DerivationError::NoLogRatioBound)?;
    let dist = g.conditional(&x0.view(), tol)?;
    if dist.cut_mass > 0.0 {
        return Err(DerivationError::UnresolvedTail { cut_mass: dist.cut_mass });
    }
    for e in &dist.entries {
        // A zero at the base context poisons pi unless the kernel promises
        // zeros never move: under strict positivity a zero simply cannot
        // occur, and a certified zero with ZerosPossible may be positive at
        // other contexts, where K * pi(sigma) = 0 < g(sigma, x).
        if e.prob <= e.abs_err
            && g.is_allowed(e.symbol, &x0.view())
            && matches!(g.positivity(), Positivity::ZerosPossible)
        {
            return Err(DerivationError::InvalidAtBase { symbol: e.symbol });
        }
    }
    // Use the upper endpoint of each certified value so that
    // K * pi(sigma) >= e^L * (value + err) >= e^L * g(sigma, x0) >= g(sigma, x)
    // holds symbol by symbol, then renormalize; the normalizer moves into K.
    let upper: Vec<f64> = dist.entries.iter().map(|e| e.prob + e.abs_err).collect();
    let mut z = KahanSum::new();
    for &u in &upper {
        z.add(u);
    }
    let z = z.value();
    let weights: Vec<f64> = upper.iter().map(|u| u / z).collect();
    let k = (l.exp() * z).max(1.0);
    Ok(Envelope::new(k, g.alphabet(), weights, EnvelopeTail::None, EnvelopeProvenance::Var1Derived)?)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform3() -> Envelope {
        Envelope::new(
            1.5,
            Alphabet::Finite { size: 3 },
            vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            EnvelopeTail::None,
            EnvelopeProvenance::User,
        )
        .unwrap()
    }

    #[test]
    fn construction_validates() {
        assert!(matches!(
            Envelope::new(0.5, Alphabet::Finite { size: 2 }, vec![0.5, 0.5], EnvelopeTail::None, EnvelopeProvenance::User),
            Err(EnvelopeError::BadConstant(_))
        ));
        assert!(matches!(
            Envelope::new(2.0, Alphabet::Finite { size: 2 }, vec![0.5, 0.4], EnvelopeTail::None, EnvelopeProvenance::User),
            Err(EnvelopeError::NotNormalized(_))
        ));
        assert!(matches!(
            Envelope::new(2.0, Alphabet::Finite { size: 2 }, vec![0.5, -0.5], EnvelopeTail::None, EnvelopeProvenance::User),
            Err(EnvelopeError::BadWeights)
        ));
    }

    #[test]
    fn geometric_tail_mass_identities() {
        // pi(0) = 1/2, mass beyond index j >= 1 is 2^-j.
        let env = Envelope::new(
            2.0,
            Alphabet::NonNegative,
            vec![0.5],
            EnvelopeTail::Geometric { coeff: 0.5, ratio: 0.5 },
            EnvelopeProvenance::User,
        )
        .unwrap();
        assert_eq!(env.pi_at(0), 0.5);
        assert!((env.pi_at(1) - 0.25).abs() < 1e-15);
        assert!((env.pi_at(3) - 0.0625).abs() < 1e-15);
        assert!((env.mass_beyond(0) - 1.0).abs() < 1e-12);
        assert!((env.mass_beyond(2) - 0.25).abs() < 1e-15);
        // pi sums back to its tail masses: mass(j) - mass(j+1) = pi(j)
        for j in 0..10 {
            let d = env.mass_beyond(j) - env.mass_beyond(j + 1);
            assert!((d - env.pi_at(j)).abs() < 1e-15, "index {j}");
        }
    }

    #[test]
    fn sampling_walks_the_cdf() {
        let env = uniform3();
        assert_eq!(env.sample_index(0.0), Some(0));
        assert_eq!(env.sample_index(0.4), Some(1));
        assert_eq!(env.sample_index(0.99), Some(2));
    }

    #[test]
    fn json_layout_is_stable() {
        let v = uniform3().to_json_value();
        assert_eq!(v["K"], 1.5);
        assert_eq!(v["tail"]["form"], "none");
        assert_eq!(v["provenance"], "user");
        assert!(v["pi"]["0"].is_f64());
    }
}
