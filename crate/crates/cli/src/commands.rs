//! One runner per subcommand: resolve the instance, run the core routine,
//! write the artifact(s), and return the stdout summary lines.

use crate::artifact::{artifact_path, fmt_f64, write_csv, write_json, Meta};
use crate::config::{
    CheckConfig, EnvelopeConfig, EnvelopeSource, EscapeConfig, HellingerConfig, SimulateConfig,
    SvarConfig, TransferConfig,
};
use crate::error::CliError;
use gmlab_core::chain::{
    sample_symbol_rejection, simulate_path, InitialCondition, RngStream, SimOptions,
};
use gmlab_core::existence::{domination_check, envelope_from_var1, Envelope};
use gmlab_core::gfunctions::registry::{families, parse_gfn};
use gmlab_core::gfunctions::{normalization_residual, GFunction, Positivity};
use gmlab_core::hellinger::{acs_diagnostic, AcsOptions};
use gmlab_core::seqspace::Context;
use gmlab_core::transfer::{
    build_markov_approx, escape_diagnostic, exact_stationary, uniqueness_probe, TransferError,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::Path;
use std::sync::Arc;

/// Where artifacts go and how they are labeled; shared by every runner.
pub struct OutputOpts<'a> {
    pub out: &'a Path,
    pub label: Option<&'a str>,
    pub no_timestamp: bool,
}

impl OutputOpts<'_> {
    fn stem<'s>(&'s self, default: &'s str) -> &'s str {
        self.label.unwrap_or(default)
    }
}

fn load_gfn(spec: &str) -> Result<Arc<dyn GFunction>, CliError> {
    parse_gfn(spec).map_err(CliError::Config)
}

fn parse_context(what: &str, literal: &str) -> Result<Context, CliError> {
    literal
        .parse()
        .map_err(|e| CliError::Config(format!("{what} {literal:?}: {e}")))
}

fn point_init(what: &str, literal: &str) -> Result<InitialCondition, CliError> {
    Ok(InitialCondition::point(parse_context(what, literal)?))
}

// ---------------------------------------------------------------------------
// examples
// ---------------------------------------------------------------------------

/// `examples list`: the kernel gallery with parameters and one-paragraph
/// descriptions.
pub fn examples_list() -> Vec<String> {
    let mut lines = Vec::new();
    for f in families() {
        lines.push(f.name.to_string());
        lines.push(format!("  parameters: {}", f.params));
        lines.push(format!("  {}", f.summary));
        lines.push(String::new());
    }
    lines.pop();
    lines
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub fn simulate(cfg: &SimulateConfig, output: &OutputOpts) -> Result<Vec<String>, CliError> {
    let g = load_gfn(&cfg.gfn)?;
    let init = point_init("--init", &cfg.init)?;
    let mut stream = RngStream::new(cfg.seed, 0);
    let path =
        simulate_path(g.as_ref(), &init, cfg.steps, &mut stream, &SimOptions::default())?;

    let meta = Meta::new("simulate", cfg, Some(cfg.seed), output.no_timestamp)?;
    let file = artifact_path(output.out, output.stem("path"), "csv")?;
    let word = path.added_word();
    let rows = word
        .symbols()
        .iter()
        .enumerate()
        .map(|(i, s)| vec![(i as u64 + 1).to_string(), s.0.to_string()]);
    write_csv(&file, &meta, &["step", "symbol"], rows)?;

    Ok(vec![
        format!("simulated {} steps of {} from {}", cfg.steps, cfg.gfn, cfg.init),
        format!("rng draws: {}", stream.draws()),
        format!("wrote {}", file.display()),
    ])
}

// ---------------------------------------------------------------------------
// hellinger
// ---------------------------------------------------------------------------

pub fn hellinger(cfg: &HellingerConfig, output: &OutputOpts) -> Result<Vec<String>, CliError> {
    if cfg.paths < 8 {
        return Err(CliError::Config(format!("--paths must be at least 8, got {}", cfg.paths)));
    }
    if cfg.steps < 100 {
        return Err(CliError::Config(format!("--steps must be at least 100, got {}", cfg.steps)));
    }
    let g = load_gfn(&cfg.gfn)?;
    let a = point_init("--init-a", &cfg.init_a)?;
    let b = point_init("--init-b", &cfg.init_b)?;
    let opts = AcsOptions { tol: cfg.tol, ..AcsOptions::default() };
    let verdict = acs_diagnostic(g.as_ref(), &a, &b, cfg.paths, cfg.steps, cfg.seed, &opts)?;

    let meta = Meta::new("hellinger", cfg, Some(cfg.seed), output.no_timestamp)?;
    let stem = output.stem("acs");
    let json_file = artifact_path(output.out, stem, "json")?;
    let payload = serde_json::to_value(&verdict)
        .map_err(|e| CliError::Precision(format!("cannot serialize verdict: {e}")))?;
    write_json(&json_file, &meta, payload)?;

    let csv_file = artifact_path(output.out, &format!("{stem}_checkpoints"), "csv")?;
    let rows = verdict.evidence.iter().map(|r| {
        vec![
            r.path.to_string(),
            r.n.to_string(),
            fmt_f64(r.b),
            fmt_f64(r.log_z),
            fmt_f64(r.y),
        ]
    });
    write_csv(&csv_file, &meta, &["path", "n", "b", "log-z", "y"], rows)?;

    let mut lines = vec![
        format!("verdict: {}", verdict_name(&verdict)),
        format!(
            "median slope of B against log n: {:.6} (ci {:.6}..{:.6})",
            verdict.slope, verdict.slope_ci.0, verdict.slope_ci.1
        ),
        format!(
            "quiet fraction: {:.4}; final-window increment q95: {:.6}",
            verdict.quiet_fraction, verdict.final_increment_q95
        ),
    ];
    if let Some(w) = &verdict.singular_witness {
        lines.push(format!(
            "singular witness: path {} step {} symbol {}",
            w.path, w.step, w.symbol
        ));
    }
    lines.push(format!("wrote {}", json_file.display()));
    lines.push(format!("wrote {}", csv_file.display()));
    Ok(lines)
}

fn verdict_name(v: &gmlab_core::hellinger::AcsVerdict) -> String {
    // reuse the serde kebab-case spelling
    serde_json::to_value(v.verdict)
        .ok()
        .and_then(|x| x.as_str().map(str::to_string))
        .unwrap_or_else(|| format!("{:?}", v.verdict))
}

// ---------------------------------------------------------------------------
// svar
// ---------------------------------------------------------------------------

/// Tabulate the family's variation bounds on a geometric grid, together with
/// the running partial sum of the squared smoothed variations.
pub fn svar(cfg: &SvarConfig, output: &OutputOpts) -> Result<Vec<String>, CliError> {
    if cfg.points < 2 {
        return Err(CliError::Config(format!("--points must be at least 2, got {}", cfg.points)));
    }
    let g = load_gfn(&cfg.gfn)?;
    if g.var_bound(0).is_none() && g.svar_sq_bound(0).is_none() {
        return Err(CliError::Precision(format!(
            "{} provides no analytic variation bounds to tabulate",
            cfg.gfn
        )));
    }

    // geometric grid over [1, n_max], plus n = 0
    let mut grid: Vec<u64> = (0..cfg.points)
        .map(|i| {
            (cfg.n_max as f64)
                .powf(i as f64 / (cfg.points - 1) as f64)
                .round()
                .clamp(1.0, cfg.n_max as f64) as u64
        })
        .collect();
    grid.push(0);
    grid.sort_unstable();
    grid.dedup();

    let mut rows = Vec::with_capacity(grid.len());
    let mut partial = 0.0f64;
    let mut next = 0usize;
    for n in 0..=cfg.n_max {
        if let Some(s) = g.svar_sq_bound(n) {
            partial += s;
        }
        if next < grid.len() && grid[next] == n {
            next += 1;
            let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
            rows.push(vec![
                n.to_string(),
                cell(g.var_bound(n)),
                cell(g.svar_sq_bound(n)),
                if g.svar_sq_bound(n).is_some() { fmt_f64(partial) } else { String::new() },
            ]);
        }
    }

    let meta = Meta::new("svar", cfg, None, output.no_timestamp)?;
    let file = artifact_path(output.out, output.stem("svar"), "csv")?;
    write_csv(&file, &meta, &["n", "var-bound", "svar-sq-bound", "partial-sum"], rows)?;

    let mut lines = vec![format!("tabulated bounds for {} at {} points", cfg.gfn, grid.len())];
    if let Some(tail) = g.svar_sq_tail_sum_bound(0) {
        // tail bounds the sum over depths > 0; add the depth-0 term so the
        // number is comparable with the tabulated partial sums
        let full = g.svar_sq_bound(0).unwrap_or(0.0) + tail;
        lines.push(format!("analytic bound on the full sum: {}", fmt_f64(full)));
    }
    lines.push(format!("wrote {}", file.display()));
    Ok(lines)
}

// ---------------------------------------------------------------------------
// transfer
// ---------------------------------------------------------------------------

pub fn transfer(cfg: &TransferConfig, output: &OutputOpts) -> Result<Vec<String>, CliError> {
    if cfg.depth == 0 {
        return Err(CliError::Config("--depth must be at least 1".into()));
    }
    if cfg.starts < 2 {
        return Err(CliError::Config(format!("--starts must be at least 2, got {}", cfg.starts)));
    }
    let g = load_gfn(&cfg.gfn)?;
    let report =
        uniqueness_probe(g.as_ref(), cfg.depth, cfg.truncation, cfg.starts, cfg.tol, cfg.seed)?;

    // Dense stationary solve of the same surrogate, when it fits.
    let first = g.alphabet().symbol_at(0).expect("alphabet has a first symbol");
    let fill = Context::constant(first);
    let stationary = match build_markov_approx(g.as_ref(), cfg.depth, cfg.truncation, &fill)
        .and_then(|ma| exact_stationary(&ma))
    {
        Ok(sol) => Value::Array(sol.distribution.iter().map(|&p| Value::from(p)).collect()),
        Err(TransferError::TooLarge { .. }) | Err(TransferError::NoUniqueSolution { .. }) => {
            Value::Null
        }
        Err(e) => return Err(e.into()),
    };

    let meta = Meta::new("transfer", cfg, Some(cfg.seed), output.no_timestamp)?;
    let file = artifact_path(output.out, output.stem("transfer"), "json")?;
    let mut payload = serde_json::to_value(&report)
        .map_err(|e| CliError::Precision(format!("cannot serialize report: {e}")))?;
    payload["stationary"] = stationary;
    write_json(&file, &meta, payload)?;

    Ok(vec![
        format!(
            "surrogate: {} states (depth {}, truncation {}), exact: {}",
            report.state_count, cfg.depth, cfg.truncation, report.exact
        ),
        format!(
            "starts converged: {}/{}; max pairwise tv: {:e}; unique: {}",
            report.converged, report.starts, report.max_pairwise_tv, report.surrogate_unique
        ),
        format!("wrote {}", file.display()),
    ])
}

// ---------------------------------------------------------------------------
// escape
// ---------------------------------------------------------------------------

pub fn escape(cfg: &EscapeConfig, output: &OutputOpts) -> Result<Vec<String>, CliError> {
    if cfg.steps < 16 {
        return Err(CliError::Config(format!("--steps must be at least 16, got {}", cfg.steps)));
    }
    if cfg.paths < 8 {
        return Err(CliError::Config(format!("--paths must be at least 8, got {}", cfg.paths)));
    }
    if cfg.window < 0 {
        return Err(CliError::Config(format!("--window must be nonnegative, got {}", cfg.window)));
    }
    let g = load_gfn(&cfg.gfn)?;
    let init = point_init("--init", &cfg.init)?;
    let report =
        escape_diagnostic(g.as_ref(), &init, cfg.steps, cfg.paths, cfg.seed, cfg.window)?;

    let meta = Meta::new("escape", cfg, Some(cfg.seed), output.no_timestamp)?;
    let stem = output.stem("escape");
    let json_file = artifact_path(output.out, stem, "json")?;
    let mut payload = serde_json::to_value(&report)
        .map_err(|e| CliError::Precision(format!("cannot serialize report: {e}")))?;
    // the series lives in the CSV; keep the JSON to the summary numbers
    payload.as_object_mut().expect("report is an object").remove("series");
    write_json(&json_file, &meta, payload)?;

    let csv_file = artifact_path(output.out, &format!("{stem}_series"), "csv")?;
    let rows = report
        .series
        .iter()
        .map(|r| vec![r.n.to_string(), fmt_f64(r.mean_abs), fmt_f64(r.occupancy)]);
    write_csv(&csv_file, &meta, &["n", "mean-abs", "occupancy"], rows)?;

    Ok(vec![
        format!("growth exponent: {:.4}", report.growth_exponent),
        format!(
            "occupancy of |value| <= {}: {:.4} at first checkpoint, {:.4} at step {}",
            cfg.window, report.occupancy_first, report.occupancy_final, cfg.steps
        ),
        format!("wrote {}", json_file.display()),
        format!("wrote {}", csv_file.display()),
    ])
}

// ---------------------------------------------------------------------------
// envelope
// ---------------------------------------------------------------------------

pub fn envelope(cfg: &EnvelopeConfig, output: &OutputOpts) -> Result<Vec<String>, CliError> {
    let g = load_gfn(&cfg.gfn)?;
    let env: Envelope = match cfg.source {
        EnvelopeSource::Builtin => g.builtin_envelope().ok_or_else(|| {
            CliError::Config(format!(
                "{} ships no built-in envelope; try --source var1 with a --base context",
                cfg.gfn
            ))
        })?,
        EnvelopeSource::Var1 => {
            let base = parse_context("--base", &cfg.base)?;
            envelope_from_var1(g.as_ref(), &base, cfg.tol)?
        }
    };

    let dom = domination_check(g.as_ref(), &env, cfg.contexts, cfg.seed, cfg.tol)?;
    let violation = dom.violation.as_ref().map(|(sym, ctx, excess)| {
        json!({ "symbol": sym.0, "context": ctx.to_string(), "excess": excess })
    });

    let sampling = if cfg.proposals > 0 {
        let target = parse_context("--target", &cfg.target)?;
        let mut stream = RngStream::new(cfg.seed, 1);
        let mut total = 0u64;
        let mut draws = 0u64;
        while total < cfg.proposals {
            let (_, used) =
                sample_symbol_rejection(g.as_ref(), &target.view(), &env, &mut stream, cfg.tol)?;
            total += used;
            draws += 1;
        }
        json!({
            "target": cfg.target,
            "proposals": total,
            "draws": draws,
            "acceptance-rate": draws as f64 / total as f64,
            "expected-rate": 1.0 / env.k(),
        })
    } else {
        Value::Null
    };

    let meta = Meta::new("envelope", cfg, Some(cfg.seed), output.no_timestamp)?;
    let file = artifact_path(output.out, output.stem("envelope"), "json")?;
    let payload = json!({
        "envelope": env.to_json_value(),
        "domination": {
            "contexts-probed": dom.contexts_probed,
            "min-slack": dom.min_slack,
            "violation": violation,
        },
        "sampling": sampling.clone(),
    });
    write_json(&file, &meta, payload)?;

    let mut lines = vec![format!("K = {}", fmt_f64(env.k()))];
    match &dom.violation {
        None => lines.push(format!(
            "domination holds on {} sampled contexts (min slack {:e})",
            dom.contexts_probed, dom.min_slack
        )),
        Some((sym, ctx, excess)) => lines.push(format!(
            "domination VIOLATED at symbol {sym} on {ctx}: excess {excess:e}"
        )),
    }
    if let Some(s) = sampling.as_object() {
        lines.push(format!(
            "rejection sampling: acceptance {:.5} over {} proposals (expected {:.5})",
            s["acceptance-rate"].as_f64().unwrap_or(f64::NAN),
            s["proposals"],
            s["expected-rate"].as_f64().unwrap_or(f64::NAN),
        ));
    }
    lines.push(format!("wrote {}", file.display()));
    Ok(lines)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

#[derive(serde::Serialize)]
struct CheckItem {
    name: &'static str,
    passed: bool,
    detail: String,
}

/// The full invariant suite on one kernel: normalization, paired-evaluation
/// consistency, bound monotonicity, built-in envelope domination, and
/// simulation determinism. Writes a JSON report; a failed item exits with
/// the precision error code.
pub fn check(cfg: &CheckConfig, output: &OutputOpts) -> Result<Vec<String>, CliError> {
    let g = load_gfn(&cfg.gfn)?;
    let mut items: Vec<CheckItem> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // 1. conditional normalization within certified error
    let mut max_residual = 0.0f64;
    for _ in 0..cfg.contexts {
        let ctx = g.random_context(&mut rng, 12);
        let r = normalization_residual(g.as_ref(), &ctx.view(), cfg.tol)?;
        max_residual = max_residual.max(r.residual);
    }
    items.push(CheckItem {
        name: "normalization",
        passed: max_residual <= 1e-9,
        detail: format!("max residual {max_residual:e} over {} contexts", cfg.contexts),
    });

    // 2. paired evaluation equals two independent evaluations
    let mut pair_mismatches = 0usize;
    for _ in 0..32 {
        let x = g.random_context(&mut rng, 8);
        let y = g.random_context(&mut rng, 8);
        let (px, py) = g.conditional_pair(&x.view(), &y.view(), cfg.tol)?;
        if px != g.conditional(&x.view(), cfg.tol)? || py != g.conditional(&y.view(), cfg.tol)? {
            pair_mismatches += 1;
        }
    }
    items.push(CheckItem {
        name: "pair-consistency",
        passed: pair_mismatches == 0,
        detail: format!("{pair_mismatches} mismatches over 32 sampled pairs"),
    });

    // 3. analytic bounds are nonincreasing where provided
    let mut monotone = true;
    for n in 0..64u64 {
        let bad = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => y > x + 1e-15,
            _ => false,
        };
        if bad(g.var_bound(n), g.var_bound(n + 1))
            || bad(g.svar_sq_bound(n), g.svar_sq_bound(n + 1))
            || bad(g.svar_sq_tail_sum_bound(n), g.svar_sq_tail_sum_bound(n + 1))
        {
            monotone = false;
        }
    }
    items.push(CheckItem {
        name: "bound-monotonicity",
        passed: monotone,
        detail: "var/svar/tail bounds over depths 0..64".into(),
    });

    // 4. the built-in envelope (if any) dominates on sampled contexts
    match g.builtin_envelope() {
        Some(env) => {
            let dom = domination_check(g.as_ref(), &env, cfg.contexts, cfg.seed ^ 1, cfg.tol)?;
            items.push(CheckItem {
                name: "envelope-domination",
                passed: dom.violation.is_none() && dom.min_slack >= 0.0,
                detail: format!(
                    "min slack {:e} over {} contexts",
                    dom.min_slack, dom.contexts_probed
                ),
            });
        }
        None => items.push(CheckItem {
            name: "envelope-domination",
            passed: true,
            detail: "no built-in envelope; skipped".into(),
        }),
    }

    // 5. simulation determinism under a fixed seed
    let init = InitialCondition::point(g.random_context(&mut rng, 4));
    let run = |seed: u64| -> Result<Vec<i64>, CliError> {
        let mut stream = RngStream::new(seed, 0);
        let p = simulate_path(g.as_ref(), &init, 64, &mut stream, &SimOptions::default())?;
        Ok(p.added_word().symbols().iter().map(|s| s.0).collect())
    };
    let deterministic = run(cfg.seed)? == run(cfg.seed)?;
    items.push(CheckItem {
        name: "simulation-determinism",
        passed: deterministic,
        detail: "two 64-step runs under one seed".into(),
    });

    let all_passed = items.iter().all(|i| i.passed);
    let positivity = match g.positivity() {
        Positivity::StrictlyPositive => "strictly-positive",
        Positivity::ZerosPossible => "zeros-possible",
    };

    let meta = Meta::new("check", cfg, Some(cfg.seed), output.no_timestamp)?;
    let file = artifact_path(output.out, output.stem("check"), "json")?;
    let payload = json!({
        "kernel": g.name(),
        "positivity": positivity,
        "passed": all_passed,
        "checks": serde_json::to_value(&items)
            .map_err(|e| CliError::Precision(format!("cannot serialize checks: {e}")))?,
    });
    write_json(&file, &meta, payload)?;

    let mut lines: Vec<String> = items
        .iter()
        .map(|i| format!("{} {} — {}", if i.passed { "ok  " } else { "FAIL" }, i.name, i.detail))
        .collect();
    lines.push(format!("wrote {}", file.display()));

    if all_passed {
        Ok(lines)
    } else {
        for l in &lines {
            println!("{l}");
        }
        let failed: Vec<&str> =
            items.iter().filter(|i| !i.passed).map(|i| i.name).collect();
        Err(CliError::Precision(format!("invariant check failed: {}", failed.join(", "))))
    }
}
