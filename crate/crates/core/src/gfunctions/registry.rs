//! Name-based construction of the built-in kernel families.
//!
//! Families are addressed by compact text specs of the form
//! `family:key=value,key=value`, the same strings the command-line tools
//! accept and the same strings [`GFunction::name`] produces, so that a name
//! printed in one run can be pasted into the next:
//!
//! - `ex11:alpha=0.5,p=geom2` — geometric-emission kernel with activity
//!   series of exponent `3 + alpha`.
//! - `hulse:a=0.55,c=0.25,r=0.6` — binary kernel `a + c r^n` driven by the
//!   position of the first 1.
//! - `spin:a=pow1.5` (optionally `,c=<coupling>`) — logistic spin kernel
//!   with power-law interaction.
//! - `randomwalk_third` — lazy nearest-neighbor walk on the integers.
//! - `markov:file=<path>` — table kernel loaded from a JSON file (see
//!   [`TableSpec`](super::table::TableSpec) for the layout).

use super::ex11::Ex11;
use super::hulse::Hulse;
use super::randomwalk::RandomWalkThird;
use super::spin::Spin;
use super::table::MarkovTable;
use super::GFunction;
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// One line of registry documentation, printed by the `examples` tool.
pub struct FamilyInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub summary: &'static str,
}

pub fn families() -> Vec<FamilyInfo> {
    vec![
        FamilyInfo {
            name: "ex11",
            params: "alpha=<a> (required, a > 0), p=geom<q> (default geom2)",
            summary: "countable alphabet; emits i >= 1 with geometric weight p_i times an \
                      activity b(x) = (1/zeta(3+alpha)) sum_k k^-(3+alpha)/(1+x_{k-1}), \
                      and 0 with weight 1-b(x)",
        },
        FamilyInfo {
            name: "hulse",
            params: "a=<limit>, c=<gap>, r=<ratio> (defaults 0.55, 0.25, 0.6)",
            summary: "binary alphabet; P(next = 0) = a + c r^n where n is the position of \
                      the first 1 in the history (limit value a if there is none)",
        },
        FamilyInfo {
            name: "spin",
            params: "a=pow<beta> (required, beta > 1), c=<coupling> (default 1)",
            summary: "alphabet {+1,-1}; P(+1) = phi(sum_j c (j+1)^-beta x_j) with the \
                      logistic phi(t) = 1/(1+exp(-2t))",
        },
        FamilyInfo {
            name: "randomwalk_third",
            params: "(none)",
            summary: "integer alphabet restricted to nearest-neighbor paths; every \
                      admissible step has probability exactly 1/3. The walk is sometimes \
                      stated on the non-negative integers, but at 0 only two neighbors \
                      would remain and the constant 1/3 could not normalize, so the \
                      signed-integer reading is the one implemented",
        },
        FamilyInfo {
            name: "markov",
            params: "file=<path.json>",
            summary: "finite alphabet, finite depth, probabilities given explicitly as a \
                      row-major table; evaluation is exact and serves as the oracle \
                      against which everything else is checked",
        },
    ]
}

fn split_params(rest: &str) -> Result<Vec<(&str, &str)>, String> {
    if rest.is_empty() {
        return Ok(Vec::new());
    }
    rest.split(',')
        .map(|kv| kv.split_once('=').ok_or_else(|| format!("expected key=value, got {kv:?}")))
        .collect()
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    value.parse::<f64>().map_err(|_| format!("parameter {key}={value:?} is not a number"))
}

/// Build a kernel from its text spec.
pub fn parse_gfn(spec: &str) -> Result<Arc<dyn GFunction>, String> {
    let (family, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let params = split_params(rest)?;
    match family {
        "ex11" => {
            let mut alpha = None;
            let mut q = 2u32;
            for (k, v) in params {
                match k {
                    "alpha" => alpha = Some(parse_f64(k, v)?),
                    "p" => {
                        let digits = v
                            .strip_prefix("geom")
                            .ok_or_else(|| format!("ex11 weights must be geom<q>, got {v:?}"))?;
                        q = digits.parse().map_err(|_| format!("bad geometric base {v:?}"))?;
                    }
                    _ => return Err(format!("ex11 does not take parameter {k:?}")),
                }
            }
            let alpha = alpha.ok_or("ex11 requires alpha=<a>")?;
            Ok(Arc::new(Ex11::new(alpha, q)?))
        }
        "hulse" => {
            let (mut a, mut c, mut r) = Hulse::CANONICAL;
            for (k, v) in params {
                match k {
                    "a" => a = parse_f64(k, v)?,
                    "c" => c = parse_f64(k, v)?,
                    "r" => r = parse_f64(k, v)?,
                    _ => return Err(format!("hulse does not take parameter {k:?}")),
                }
            }
            Ok(Arc::new(Hulse::new(a, c, r)?))
        }
        "spin" => {
            let mut beta = None;
            let mut c = 1.0;
            for (k, v) in params {
                match k {
                    "a" => {
                        let digits = v
                            .strip_prefix("pow")
                            .ok_or_else(|| format!("spin interaction must be pow<beta>, got {v:?}"))?;
                        beta = Some(parse_f64(k, digits)?);
                    }
                    "c" => c = parse_f64(k, v)?,
                    _ => return Err(format!("spin does not take parameter {k:?}")),
                }
            }
            let beta = beta.ok_or("spin requires a=pow<beta>")?;
            Ok(Arc::new(Spin::new(beta, c)?))
        }
        "randomwalk_third" => {
            if !params.is_empty() {
                return Err("randomwalk_third takes no parameters".into());
            }
            Ok(Arc::new(RandomWalkThird::new()))
        }
        "markov" => {
            let mut file = None;
            for (k, v) in params {
                match k {
                    "file" => file = Some(v),
                    _ => return Err(format!("markov takes only file=<path>, not {k:?}")),
                }
            }
            let path = file.ok_or("markov requires file=<path.json>")?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read table file {path:?}: {e}"))?;
            Ok(Arc::new(MarkovTable::from_json_str(&text)?))
        }
        other => {
            let known: Vec<&str> = families().iter().map(|f| f.name).collect();
            Err(format!("unknown family {other:?}; known: {}", known.join(", ")))
        }
    }
}

/// The two-state table `[[0.3, 0.7], [0.6, 0.4]]`, the standing exact oracle.
pub fn canonical_markov() -> MarkovTable {
    MarkovTable::new(2, 1, vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap()
}

/// One representative instance per family, used by the cross-family
/// diagnostic sweeps (normalization, positivity, sandwich checks).
pub fn canonical_instances() -> Vec<Arc<dyn GFunction>> {
    vec![
        Arc::new(Ex11::new(0.5, 2).unwrap()),
        Arc::new(Hulse::canonical()),
        Arc::new(Spin::new(1.5, 1.0).unwrap()),
        Arc::new(Spin::new(3.0, 1.0).unwrap()),
        Arc::new(RandomWalkThird::new()),
        Arc::new(canonical_markov()),
    ]
}

/// A reproducible strictly positive random table: raw weights uniform in
/// `[0.05, 1]`, rows normalized. Handy for oracle tests that want a table
/// with no accidental structure.
pub fn random_table(alphabet_size: usize, depth: usize, seed: u64) -> MarkovTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uni = Uniform::new_inclusive(0.05f64, 1.0).unwrap();
    let n_rows = alphabet_size.pow(depth as u32);
    let rows = (0..n_rows)
        .map(|_| {
            let raw: Vec<f64> = (0..alphabet_size).map(|_| uni.sample(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        })
        .collect();
    MarkovTable::new(alphabet_size, depth, rows).unwrap()
}

// ---------------------------------------------------------------------------
