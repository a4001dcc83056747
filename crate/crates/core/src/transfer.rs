//! Finite truncations of the chain's transfer dynamics.
//!
//! A kernel with long (possibly infinite) memory and a possibly countable
//! alphabet is replaced by a finite-state surrogate: keep the first `M`
//! symbols of the enumeration, remember only the last `k` of them, and read
//! transition probabilities from the kernel with the unremembered past frozen
//! to a chosen *tail fill*. Lost probability (transitions to dropped symbols
//! or forbidden words) is renormalized away but *ledgered* per state, so the
//! surrogate stays an honest stochastic matrix while the truncation error
//! remains visible.
//!
//! On the surrogate one can compute stationary distributions two ways
//! ([`power_iteration`] and the dense-solve oracle [`exact_stationary`]),
//! probe uniqueness of the invariant measure from many random starts
//! ([`uniqueness_probe`]), and — for countable alphabets where no finite
//! invariant measure may exist at all — measure how mass escapes to infinity
//! along simulated paths ([`escape_diagnostic`]).
//!
//! Everything here is *evidence about the surrogate*, not proof about the
//! original kernel: the construction is exact only when the kernel has depth
//! `<= k` and its alphabet fits in the truncation (the `exact` flag), and
//! uniqueness of the surrogate's stationary distribution does not by itself
//! decide uniqueness for the full dynamics.

use crate::chain::{simulate_path, ChainError, InitialCondition, RngStream, SimOptions};
use crate::gfunctions::{Depth, EvalError, GFunction, Positivity, DEFAULT_TOL};
use crate::numerics::KahanSum;
use crate::seqspace::{enumerate_words, Context, Symbol, Tail};
use crate::stats::linear_fit;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

/// Hard cap on surrogate state counts at construction time.
pub const STATE_CAP: usize = 1 << 16;
/// Cap for the dense linear-algebra path.
pub const DENSE_CAP: usize = 4096;
/// Pairwise total-variation threshold under which limits from different
/// starts are considered the same stationary distribution.
pub const UNIQUE_TV_TOL: f64 = 1e-8;
/// Iteration budget used by [`uniqueness_probe`].
pub const MAX_POWER_ITERS: usize = 100_000;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("instance too large: {states} states exceeds the cap of {cap}")]
    TooLarge { states: usize, cap: usize },
    #[error("state [{0}] retains no transition mass inside the truncation")]
    DeadState(String),
    #[error("stationary system has no unique solution (nullspace dimension {nullspace_dim})")]
    NoUniqueSolution { nullspace_dim: usize },
    #[error("need a truncation of at least 2 symbols")]
    BadTruncation,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

// ---------------------------------------------------------------------------
// The surrogate kernel
// ---------------------------------------------------------------------------

/// One retained transition of a surrogate state.
#[derive(Copy, Clone, Debug, Serialize)]
pub struct Transition {
    /// Symbol whose addition realizes the transition.
    pub symbol: Symbol,
    /// Index of the successor state.
    pub target: usize,
    /// Renormalized probability.
    pub prob: f64,
}

/// Depth-`k`, alphabet-truncated stochastic surrogate of a kernel.
///
/// States are the admissible words of length `k` over the first
/// `truncation` symbols of the enumeration, stored newest-first (index 0 is
/// the most recent symbol, matching context heads). A word is admissible
/// when it extends to a context the kernel accepts — first trying the
/// user's tail fill behind it, then the word's own oldest symbol repeated
/// forever; words accepting neither are dropped as forbidden.
#[derive(Clone, Debug)]
pub struct MarkovApprox {
    truncation: usize,
    depth: usize,
    states: Vec<Vec<Symbol>>,
    rows: Vec<Vec<Transition>>,
    /// Per-state probability lost to the truncation before renormalizing.
    escaped: Vec<f64>,
    /// Per-state certified bound on the escaped mass, when the kernel
    /// provides tail bounds.
    tail_bounds: Vec<Option<f64>>,
    tailfill: Context,
    /// True when the surrogate provably equals the kernel: finite depth
    /// `<= k` and the whole alphabet retained.
    exact: bool,
}

impl MarkovApprox {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn states(&self) -> &[Vec<Symbol>] {
        &self.states
    }

    pub fn rows(&self) -> &[Vec<Transition>] {
        &self.rows
    }

    pub fn escaped(&self) -> &[f64] {
        &self.escaped
    }

    pub fn tail_bounds(&self) -> &[Option<f64>] {
        &self.tail_bounds
    }

    pub fn tailfill(&self) -> &Context {
        &self.tailfill
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn max_escaped(&self) -> f64 {
        self.escaped.iter().cloned().fold(0.0, f64::max)
    }

    /// One application of the transposed kernel: the distribution after one
    /// step of the chain started from `pi`.
    pub fn step(&self, pi: &[f64]) -> Vec<f64> {
        assert_eq!(pi.len(), self.states.len());
        let mut out = vec![0.0; pi.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for t in row {
                out[t.target] += pi[i] * t.prob;
            }
        }
        out
    }

    /// `l^1` distance between `pi` and its image under [`step`](Self::step).
    pub fn residual(&self, pi: &[f64]) -> f64 {
        l1_distance(&self.step(pi), pi)
    }
}

fn l1_distance(p: &[f64], q: &[f64]) -> f64 {
    let mut s = KahanSum::new();
    for (a, b) in p.iter().zip(q) {
        s.add((a - b).abs());
    }
    s.value()
}

fn normalize(mut pi: Vec<f64>) -> Vec<f64> {
    let mut s = KahanSum::new();
    for &p in &pi {
        s.add(p);
    }
    let total = s.value();
    for p in &mut pi {
        *p /= total;
    }
    pi
}

fn word_label(w: &[Symbol]) -> String {
    w.iter().map(|s| s.0.to_string()).collect::<Vec<_>>().join(",")
}

/// Context "word then fill": the word's symbols as the most recent
/// coordinates, the fill context continuing behind them.
fn word_then_fill(w: &[Symbol], fill: &Context) -> Context {
    let mut head = w.to_vec();
    head.extend_from_slice(fill.head().symbols());
    Context::new(head, fill.tail().clone()).expect("fill tail already validated")
}

/// Build the depth-`k` surrogate over the first `m` enumerated symbols.
///
/// Rows are read at the per-state context described on [`MarkovApprox`];
/// transitions leading outside the retained state space are ledgered as
/// escaped mass and the remainder renormalized.
pub fn build_markov_approx(
    g: &dyn GFunction,
    k: usize,
    m: usize,
    tailfill: &Context,
) -> Result<MarkovApprox, TransferError> {
    assert!(k >= 1, "depth must be at least 1");
    let alpha = g.alphabet();
    let m_eff = match alpha.size() {
        Some(s) => m.min(s),
        None => m,
    };
    if m_eff < 2 {
        return Err(TransferError::BadTruncation);
    }
    let candidates = m_eff
        .checked_pow(k as u32)
        .filter(|&c| c <= STATE_CAP)
        .ok_or(TransferError::TooLarge { states: usize::MAX, cap: STATE_CAP })?;
    let _ = candidates;

    let symbols: Vec<Symbol> =
        (0..m_eff).map(|i| alpha.symbol_at(i).expect("index below alphabet size")).collect();

    // Admissibility pass: keep words the kernel accepts behind some fill.
    let mut states: Vec<Vec<Symbol>> = Vec::new();
    let mut row_ctx: Vec<Context> = Vec::new();
    for w in enumerate_words(&symbols, k) {
        let filled = word_then_fill(&w, tailfill);
        let fallback = Context::new(w.clone(), Tail::Constant(*w.last().unwrap()))
            .expect("constant tails are always well-formed");
        let chosen = [filled, fallback]
            .into_iter()
            .find(|c| g.context_allowed(&c.view()));
        if let Some(ctx) = chosen {
            states.push(w);
            row_ctx.push(ctx);
        }
    }
    let index: HashMap<&[Symbol], usize> =
        states.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();

    let mut rows: Vec<Vec<Transition>> = Vec::with_capacity(states.len());
    let mut escaped: Vec<f64> = Vec::with_capacity(states.len());
    let mut tail_bounds: Vec<Option<f64>> = Vec::with_capacity(states.len());
    for (w, ctx) in states.iter().zip(&row_ctx) {
        let view = ctx.view();
        let mut row: Vec<Transition> = Vec::new();
        let mut retained = KahanSum::new();
        for &s in &symbols {
            let p = g.eval(s, &view, DEFAULT_TOL)?.value;
            if p <= 0.0 {
                continue;
            }
            let mut tw = Vec::with_capacity(k);
            tw.push(s);
            tw.extend_from_slice(&w[..k - 1]);
            if let Some(&target) = index.get(tw.as_slice()) {
                row.push(Transition { symbol: s, target, prob: p });
                retained.add(p);
            }
            // mass toward forbidden successor words falls into the ledger
        }
        let total = retained.value();
        if total <= 0.0 {
            return Err(TransferError::DeadState(word_label(w)));
        }
        for t in &mut row {
            t.prob /= total;
        }
        rows.push(row);
        escaped.push((1.0 - total).max(0.0));
        tail_bounds.push(g.sigma_tail_bound(&view, m_eff));
    }

    let exact = matches!(g.depth(), Depth::Finite(d) if d <= k)
        && alpha.size().is_some_and(|s| s <= m_eff);

    Ok(MarkovApprox {
        truncation: m_eff,
        depth: k,
        states,
        rows,
        escaped,
        tail_bounds,
        tailfill: tailfill.clone(),
        exact,
    })
}

// ---------------------------------------------------------------------------
// Stationary distributions
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceFlag {
    Converged,
    MaxIter,
    /// The iteration locked into an alternation of period 2; the returned
    /// distribution is the average of the two alternating iterates (which is
    /// invariant for a genuinely 2-periodic kernel).
    PeriodicSuspect,
}

#[derive(Clone, Debug, Serialize)]
pub struct StationaryResult {
    pub distribution: Vec<f64>,
    /// `l^1` distance between the returned distribution and its image.
    pub residual: f64,
    /// Kernel applications spent before the stopping rule fired.
    pub iterations: usize,
    pub flag: ConvergenceFlag,
}

/// Iterate `pi <- pi P` until the `l^1` increment drops below `tol`.
///
/// The returned distribution is the first iterate whose image moved less
/// than `tol` (so a start that is already invariant reports 0 iterations).
/// Alternation is detected by comparing each iterate with the one two steps
/// earlier; hitting the iteration budget returns the current iterate with
/// the `MaxIter` flag.
pub fn power_iteration(
    ma: &MarkovApprox,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> StationaryResult {
    assert_eq!(start.len(), ma.state_count(), "start must live on the state space");
    assert!(start.iter().all(|&p| p >= 0.0), "start must be a distribution");
    let mut prev: Option<Vec<f64>> = None; // two steps behind `next`
    let mut cur = normalize(start.to_vec());
    for it in 1..=max_iter {
        let next = ma.step(&cur);
        let increment = l1_distance(&next, &cur);
        if increment < tol {
            let distribution = normalize(cur);
            let residual = ma.residual(&distribution);
            return StationaryResult {
                distribution,
                residual,
                iterations: it - 1,
                flag: ConvergenceFlag::Converged,
            };
        }
        if let Some(p) = &prev {
            if l1_distance(&next, p) < tol {
                let mixed: Vec<f64> =
                    next.iter().zip(&cur).map(|(a, b)| 0.5 * (a + b)).collect();
                let distribution = normalize(mixed);
                let residual = ma.residual(&distribution);
                return StationaryResult {
                    distribution,
                    residual,
                    iterations: it,
                    flag: ConvergenceFlag::PeriodicSuspect,
                };
            }
        }
        prev = Some(cur);
        cur = next;
    }
    let distribution = normalize(cur);
    let residual = ma.residual(&distribution);
    StationaryResult {
        distribution,
        residual,
        iterations: max_iter,
        flag: ConvergenceFlag::MaxIter,
    }
}

/// Stationary distribution by dense linear solve — the brute-force oracle
/// for [`power_iteration`] on instances below [`DENSE_CAP`].
///
/// Solves `(P^T - I) x = 0` with the normalization row, validating the
/// solution by its residual; on a singular or invalid system it falls back
/// to an SVD nullspace computation and reports the nullspace dimension when
/// no unique stationary distribution exists.
pub fn exact_stationary(ma: &MarkovApprox) -> Result<StationaryResult, TransferError> {
    let n = ma.state_count();
    if n > DENSE_CAP {
        return Err(TransferError::TooLarge { states: n, cap: DENSE_CAP });
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, row) in ma.rows().iter().enumerate() {
        for t in row {
            a[(t.target, i)] += t.prob; // P^T
        }
    }
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }

    // Primary path: replace the last equation with sum(x) = 1.
    let mut constrained = a.clone();
    for j in 0..n {
        constrained[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    if let Some(x) = constrained.lu().solve(&b) {
        let max_abs = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let nonneg = x.iter().all(|&v| v >= -1e-9 * max_abs.max(1.0));
        let pi: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
        if nonneg && pi.iter().sum::<f64>() > 0.5 {
            let distribution = normalize(pi);
            let residual = ma.residual(&distribution);
            if residual < 1e-8 {
                return Ok(StationaryResult {
                    distribution,
                    residual,
                    iterations: 0,
                    flag: ConvergenceFlag::Converged,
                });
            }
        }
    }

    // Fallback: nullspace of P^T - I.
    let svd = a.svd(false, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &v| m.max(v));
    let eps = smax * n as f64 * 1e-13;
    let null_dim = svd.singular_values.iter().filter(|&&s| s <= eps).count();
    if null_dim != 1 {
        return Err(TransferError::NoUniqueSolution { nullspace_dim: null_dim });
    }
    let v_t = svd.v_t.expect("requested V^T");
    let (min_idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty spectrum");
    let v = v_t.row(min_idx);
    let sum: f64 = v.iter().sum();
    let sign = if sum >= 0.0 { 1.0 } else { -1.0 };
    let pi: Vec<f64> = v.iter().map(|&x| (sign * x).max(0.0)).collect();
    if pi.iter().sum::<f64>() <= 0.0 {
        return Err(TransferError::NoUniqueSolution { nullspace_dim: null_dim });
    }
    let distribution = normalize(pi);
    let residual = ma.residual(&distribution);
    Ok(StationaryResult { distribution, residual, iterations: 0, flag: ConvergenceFlag::Converged })
}

/// Total-variation distance `(1/2) l^1` between distributions on the same
/// state space.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must share a state space");
    0.5 * l1_distance(p, q)
}

// ---------------------------------------------------------------------------
// Uniqueness probe
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub state_count: usize,
    pub exact: bool,
    pub max_escaped: f64,
    pub starts: usize,
    pub converged: usize,
    pub periodic_suspects: usize,
    pub max_iter_hits: usize,
    /// Largest pairwise total variation among the converged limits.
    pub max_pairwise_tv: f64,
    /// True when all converged limits agree within [`UNIQUE_TV_TOL`].
    pub surrogate_unique: bool,
    /// Whether the kernel's own analytic bounds certify the sufficient
    /// condition for uniqueness (strict positivity together with a finite
    /// tail sum of squared smoothed variations); `None` when the kernel
    /// provides no such bounds.
    pub hypothesis_certified: Option<bool>,
    /// `Some(false)` exactly when the bounds certify uniqueness but the
    /// probe found distinct limits — numerical evidence of a contradiction.
    pub consistent_with_bounds: Option<bool>,
    #[serde(skip)]
    pub limits: Vec<StationaryResult>,
}

/// Sample exponential weights and normalize: a fully supported random
/// starting distribution.
fn random_distribution(n: usize, stream: &mut RngStream) -> Vec<f64> {
    normalize((0..n).map(|_| (-(1.0 - stream.random::<f64>()).ln()).max(1e-300)).collect())
}

/// Run [`power_iteration`] from `starts` random initial distributions on the
/// depth-`k`, truncation-`m` surrogate and compare the limits pairwise.
///
/// Agreement of all limits is *evidence* for a unique invariant measure of
/// the surrogate (and is labeled against the kernel's analytic bounds when
/// available); disagreement exhibits concrete distinct invariant
/// distributions.
pub fn uniqueness_probe(
    g: &dyn GFunction,
    k: usize,
    m: usize,
    starts: usize,
    tol: f64,
    seed: u64,
) -> Result<UniquenessReport, TransferError> {
    assert!(starts >= 2, "need at least two starts to compare");
    let first = g.alphabet().symbol_at(0).expect("alphabet has a first symbol");
    let fill = Context::constant(first);
    let ma = build_markov_approx(g, k, m, &fill)?;
    let n = ma.state_count();

    let mut limits: Vec<StationaryResult> = Vec::with_capacity(starts);
    for j in 0..starts {
        let mut stream = RngStream::new(seed, j as u64);
        let start = random_distribution(n, &mut stream);
        limits.push(power_iteration(&ma, &start, tol, MAX_POWER_ITERS));
    }

    let converged: Vec<&StationaryResult> =
        limits.iter().filter(|r| r.flag == ConvergenceFlag::Converged).collect();
    let mut max_tv = 0.0f64;
    for i in 0..converged.len() {
        for j in i + 1..converged.len() {
            max_tv = max_tv.max(tv_distance(&converged[i].distribution, &converged[j].distribution));
        }
    }
    let surrogate_unique = converged.len() >= 2 && max_tv < UNIQUE_TV_TOL;

    let hypothesis_certified = g.svar_sq_tail_sum_bound(0).map(|tail| {
        tail.is_finite() && matches!(g.positivity(), Positivity::StrictlyPositive)
    });
    let consistent_with_bounds = hypothesis_certified.map(|c| !c || surrogate_unique);

    Ok(UniquenessReport {
        state_count: n,
        exact: ma.is_exact(),
        max_escaped: ma.max_escaped(),
        starts,
        converged: converged.len(),
        periodic_suspects: limits
            .iter()
            .filter(|r| r.flag == ConvergenceFlag::PeriodicSuspect)
            .count(),
        max_iter_hits: limits.iter().filter(|r| r.flag == ConvergenceFlag::MaxIter).count(),
        max_pairwise_tv: max_tv,
        surrogate_unique,
        hypothesis_certified,
        consistent_with_bounds,
        limits,
    })
}

// ---------------------------------------------------------------------------
// Escape diagnostics
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, Debug, Serialize)]
pub struct EscapeRow {
    pub n: u64,
    /// Mean over paths of `|value of the n-th added symbol|`.
    pub mean_abs: f64,
    /// Fraction of paths whose n-th added symbol has `|value| <= window`.
    pub occupancy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EscapeReport {
    pub steps: u64,
    pub paths: u64,
    pub window: i64,
    /// Slope of `log mean_abs` against `log n` over the later checkpoints:
    /// 0 for kernels confined to finitely many symbols, about 1/2 for
    /// diffusive escape.
    pub growth_exponent: f64,
    pub occupancy_first: f64,
    pub occupancy_final: f64,
    pub series: Vec<EscapeRow>,
}

fn geometric_checkpoints(steps: u64, count: usize) -> Vec<u64> {
    let mut ns: Vec<u64> = (0..count)
        .map(|i| ((steps as f64).powf(i as f64 / (count - 1) as f64)).round() as u64)
        .map(|n| n.clamp(1, steps))
        .collect();
    ns.sort_unstable();
    ns.dedup();
    ns
}

/// Simulate `paths` chains and report how fast symbol magnitudes grow and
/// how quickly the paths leave the window `|value| <= window`. A fitted
/// growth exponent near 1/2 together with vanishing occupancy is the
/// signature of mass escaping to infinity (no finite invariant measure);
/// exponent 0 with occupancy near 1 is the confined, healthy case.
pub fn escape_diagnostic(
    g: &dyn GFunction,
    init: &InitialCondition,
    steps: u64,
    paths: u64,
    seed: u64,
    window: i64,
) -> Result<EscapeReport, TransferError> {
    assert!(steps >= 16, "need at least 16 steps, got {steps}");
    assert!(paths >= 8, "need at least 8 paths, got {paths}");
    assert!(window >= 0);
    let opts = SimOptions::default();
    let mut sum_abs = vec![0.0f64; steps as usize];
    let mut inside = vec![0u64; steps as usize];
    for p in 0..paths {
        let mut stream = RngStream::new(seed, p);
        let path = simulate_path(g, init, steps, &mut stream, &opts)?;
        let word = path.added_word();
        for (i, s) in word.symbols().iter().enumerate() {
            sum_abs[i] += s.0.abs() as f64;
            if s.0.abs() <= window {
                inside[i] += 1;
            }
        }
    }

    let series: Vec<EscapeRow> = geometric_checkpoints(steps, 28)
        .into_iter()
        .map(|n| {
            let i = (n - 1) as usize;
            EscapeRow {
                n,
                mean_abs: sum_abs[i] / paths as f64,
                occupancy: inside[i] as f64 / paths as f64,
            }
        })
        .collect();

    let fit_lo = (steps / 10).max(8);
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .iter()
        .filter(|r| r.n >= fit_lo && r.mean_abs > 0.0)
        .map(|r| ((r.n as f64).ln(), r.mean_abs.ln()))
        .unzip();
    let growth_exponent = if xs.len() >= 2 { linear_fit(&xs, &ys).0 } else { 0.0 };

    Ok(EscapeReport {
        steps,
        paths,
        window,
        growth_exponent,
        occupancy_first: series.first().map(|r| r.occupancy).unwrap_or(1.0),
        occupancy_final: series.last().map(|r| r.occupancy).unwrap_or(1.0),
        series,
    })
}

// ---------------------------------------------------------------------------
