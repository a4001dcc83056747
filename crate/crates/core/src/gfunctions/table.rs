//! Finite-alphabet, finite-depth kernels driven by an explicit probability
//! table.
//!
//! A depth-`k` table on an alphabet of size `S` stores one probability row
//! per length-`k` word `x_0 .. x_{k-1}`, in row-major order with `x_0` the
//! most significant digit:
//!
//! ```text
//! row(x) = x_0 * S^(k-1) + x_1 * S^(k-2) + ... + x_{k-1}
//! ```
//!
//! Evaluation is an exact array lookup (zero certified error), which makes
//! these kernels the reference oracles for everything downstream: variation
//! and smoothed-variation quantities are computed *exactly* over row blocks,
//! conditionals are exhaustive, and finite-depth merging of conditional laws
//! is exact rather than approximate.

use super::{CondDist, CondEntry, Depth, EvalError, GFunction, Positivity};
use crate::existence::{Envelope, EnvelopeProvenance, EnvelopeTail};
use crate::numerics::{Certified, KahanSum};
use crate::seqspace::{Alphabet, CtxView, Symbol};
use serde::{Deserialize, Serialize};

/// On-disk form of a table kernel: a JSON object with the alphabet size, the
/// dependence depth and the `S^depth x S` row-major probability array.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableSpec {
    pub alphabet_size: usize,
    pub depth: usize,
    pub rows: Vec<Vec<f64>>,
}

/// Maximum number of rows a table may have (`S^depth`).
const MAX_ROWS: usize = 1 << 16;

/// Row sums must match 1 to within this tolerance at construction.
pub const ROW_SUM_TOL: f64 = 1e-12;

pub struct MarkovTable {
    s: usize,
    k: usize,
    rows: Vec<Vec<f64>>,
    positivity: Positivity,
}

impl MarkovTable {
    /// Build a table kernel, checking shape, non-negativity and row sums.
    pub fn new(alphabet_size: usize, depth: usize, rows: Vec<Vec<f64>>) -> Result<Self, String> {
        let t = Self::new_unchecked(alphabet_size, depth, rows)?;
        for (w, row) in t.rows.iter().enumerate() {
            let mut sum = KahanSum::new();
            for &p in row {
                sum.add(p);
            }
            let err = (sum.value() - 1.0).abs();
            if err > ROW_SUM_TOL {
                return Err(format!(
                    "row {w} sums to {} (off by {err:.3e}, allowed {ROW_SUM_TOL:.0e})",
                    sum.value()
                ));
            }
        }
        Ok(t)
    }

    /// Build a table kernel checking only shape and entry range, *not* row
    /// sums. Exists so that deliberately corrupted tables can be fed to the
    /// normalization diagnostics; everything produced for simulation should
    /// go through [`MarkovTable::new`].
    pub fn new_unchecked(
        alphabet_size: usize,
        depth: usize,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, String> {
        if alphabet_size < 1 {
            return Err("alphabet size must be at least 1".into());
        }
        let want = alphabet_size
            .checked_pow(depth as u32)
            .filter(|&n| n <= MAX_ROWS)
            .ok_or_else(|| format!("table needs {alphabet_size}^{depth} rows; too large"))?;
        if rows.len() != want {
            return Err(format!("expected {want} rows ({alphabet_size}^{depth}), got {}", rows.len()));
        }
        let mut strictly_positive = true;
        for (w, row) in rows.iter().enumerate() {
            if row.len() != alphabet_size {
                return Err(format!("row {w} has {} entries, expected {alphabet_size}", row.len()));
            }
            for (sigma, &p) in row.iter().enumerate() {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(format!("entry ({w}, {sigma}) = {p} is not a probability"));
                }
                if p == 0.0 {
                    strictly_positive = false;
                }
            }
        }
        let positivity =
            if strictly_positive { Positivity::StrictlyPositive } else { Positivity::ZerosPossible };
        Ok(MarkovTable { s: alphabet_size, k: depth, rows, positivity })
    }

    pub fn from_spec(spec: TableSpec) -> Result<Self, String> {
        Self::new(spec.alphabet_size, spec.depth, spec.rows)
    }

    pub fn from_json_str(text: &str) -> Result<Self, String> {
        let spec: TableSpec = serde_json::from_str(text).map_err(|e| format!("bad table JSON: {e}"))?;
        Self::from_spec(spec)
    }

    pub fn to_spec(&self) -> TableSpec {
        TableSpec { alphabet_size: self.s, depth: self.k, rows: self.rows.clone() }
    }

    pub fn alphabet_size(&self) -> usize {
        self.s
    }

    pub fn table_depth(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Row index of the depth-`k` word starting at the given context, or an
    /// error if one of the read coordinates lies outside the alphabet.
    ///
    /// Only the first `k` coordinates are inspected: what the point does
    /// beyond its dependence depth — including carrying out-of-alphabet
    /// symbols — cannot influence the value.
    fn row_index(&self, ctx: &CtxView<'_>) -> Result<usize, EvalError> {
        let a = self.alphabet();
        let mut idx = 0usize;
        for j in 0..self.k {
            let sym = ctx.coordinate(j);
            if !a.contains(sym) {
                return Err(EvalError::OutsideSubshift { family: self.name() });
            }
            idx = idx * self.s + sym.0 as usize;
        }
        Ok(idx)
    }

    /// Exact `sup |g(sigma, x) - g(sigma, y)|` over pairs of points agreeing
    /// in their first `n` coordinates.
    ///
    /// Rows sharing a length-`n` prefix form contiguous blocks (the word
    /// index uses `x_0` as the most significant digit), so the supremum is a
    /// per-symbol max-minus-min within each block.
    pub fn var_exact(&self, n: u64) -> f64 {
        if n >= self.k as u64 {
            return 0.0;
        }
        let block = self.s.pow(self.k as u32 - n as u32);
        let mut sup: f64 = 0.0;
        for start in (0..self.rows.len()).step_by(block) {
            for sigma in 0..self.s {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for w in start..start + block {
                    lo = lo.min(self.rows[w][sigma]);
                    hi = hi.max(self.rows[w][sigma]);
                }
                sup = sup.max(hi - lo);
            }
        }
        sup
    }

    /// Exact `sup sum_sigma (sqrt g(sigma, x) - sqrt g(sigma, y))^2` over
    /// pairs of points agreeing in their first `m` coordinates: the largest
    /// squared Hellinger distance between any two conditional rows in the
    /// same agreement block.
    pub fn svar_sq_exact(&self, m: u64) -> f64 {
        if m >= self.k as u64 {
            return 0.0;
        }
        let block = self.s.pow(self.k as u32 - m as u32);
        let mut sup: f64 = 0.0;
        for start in (0..self.rows.len()).step_by(block) {
            for a in start..start + block {
                for b in a + 1..start + block {
                    let mut h2 = 0.0;
                    for sigma in 0..self.s {
                        let d = self.rows[a][sigma].sqrt() - self.rows[b][sigma].sqrt();
                        h2 += d * d;
                    }
                    sup = sup.max(h2);
                }
            }
        }
        sup
    }
}

impl GFunction for MarkovTable {
    fn name(&self) -> String {
        format!("markov:depth={},alphabet={}", self.k, self.s)
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::Finite { size: self.s }
    }

    fn depth(&self) -> Depth {
        Depth::Finite(self.k)
    }

    fn positivity(&self) -> Positivity {
        self.positivity
    }

    fn eval(&self, sigma: Symbol, ctx: &CtxView<'_>, _tol: f64) -> Result<Certified, EvalError> {
        if !self.alphabet().contains(sigma) {
            return Err(EvalError::UnsupportedSymbol { family: self.name(), symbol: sigma });
        }
        let w = self.row_index(ctx)?;
        Ok(Certified::exact(self.rows[w][sigma.0 as usize]))
    }

    fn sigma_tail_bound(&self, _ctx: &CtxView<'_>, _enumerated: usize) -> Option<f64> {
        None // finite alphabet: conditionals are exhaustive, no tail to bound
    }

    fn var_bound(&self, n: u64) -> Option<f64> {
        Some(self.var_exact(n))
    }

    fn svar_sq_bound(&self, m: u64) -> Option<f64> {
        Some(self.svar_sq_exact(m))
    }

    fn svar_sq_tail_sum_bound(&self, n: u64) -> Option<f64> {
        let mut sum = 0.0;
        for m in (n + 1)..self.k as u64 {
            sum += self.svar_sq_exact(m);
        }
        Some(sum)
    }

    fn log_ratio_bound(&self) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for sigma in 0..self.s {
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for row in &self.rows {
                lo = lo.min(row[sigma]);
                hi = hi.max(row[sigma]);
            }
            if hi == 0.0 {
                continue; // symbol never emitted: dominated vacuously
            }
            if lo == 0.0 {
                return None;
            }
            worst = worst.max((hi / lo).ln());
        }
        Some(worst)
    }

    fn builtin_envelope(&self) -> Option<Envelope> {
        // Per-symbol suprema over all rows give the minimal product envelope:
        // K = sum_sigma sup_x g(sigma, x), pi = suprema / K.
        let mut sup = vec![0.0f64; self.s];
        for row in &self.rows {
            for (sigma, &p) in row.iter().enumerate() {
                sup[sigma] = sup[sigma].max(p);
            }
        }
        let mut total = KahanSum::new();
        for &u in &sup {
            total.add(u);
        }
        let k = total.value().max(1.0);
        let weights = sup.iter().map(|&u| u / k).collect();
        Envelope::new(k, self.alphabet(), weights, EnvelopeTail::None, EnvelopeProvenance::ExampleSpecific)
            .ok()
    }

    fn conditional(&self, ctx: &CtxView<'_>, _tol: f64) -> Result<CondDist, EvalError> {
        let w = self.row_index(ctx)?;
        let entries = self.rows[w]
            .iter()
            .enumerate()
            .map(|(sigma, &p)| CondEntry { symbol: Symbol(sigma as i64), prob: p, abs_err: 0.0 })
            .collect();
        Ok(CondDist { entries, cut_mass: 0.0, exhaustive: true })
    }
}

// ---------------------------------------------------------------------------
