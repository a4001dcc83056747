//! Cross-module consistency: simulation against closed-form marginals,
//! likelihood-ratio accounting against cylinder probabilities, surrogate
//! stationary laws against empirical symbol frequencies, and the envelope
//! pipeline end to end.

use gmlab_core::chain::{
    conditional_distribution, cylinder_probability, sample_symbol_rejection, simulate_path,
    InitialCondition, RngStream, SimOptions,
};
use gmlab_core::existence::{domination_check, envelope_from_var1};
use gmlab_core::gfunctions::registry::{canonical_markov, parse_gfn, random_table};
use gmlab_core::gfunctions::DEFAULT_TOL;
use gmlab_core::hellinger::{
    acs_diagnostic, change_of_measure_residual, hellinger_sq, hellinger_sq_by_expectation,
    martingale_residuals, step_update, AcsOptions, HellingerRecord, Verdict,
};
use gmlab_core::seqspace::{enumerate_words, Context, Symbol};
use gmlab_core::transfer::{build_markov_approx, escape_diagnostic, exact_stationary};

fn ctx(s: &str) -> Context {
    s.parse().unwrap()
}

fn point(s: &str) -> InitialCondition {
    InitialCondition::point(ctx(s))
}

/// At strong coupling the ferromagnetic kernel keeps reinforcing whichever
/// orientation its history already carries: long runs stay overwhelmingly
/// on the side their initial context puts them.
#[test]
fn spin_chain_stays_polarized_over_a_long_run() {
    let g = parse_gfn("spin:a=pow1.5,c=2").unwrap();
    let steps: u64 = 30_000;
    let up_fraction = |init: &InitialCondition, seed: u64| {
        let mut stream = RngStream::new(seed, 0);
        let path = simulate_path(g.as_ref(), init, steps, &mut stream, &SimOptions::default())
            .unwrap();
        let ups =
            path.added_word().symbols().iter().filter(|s| **s == Symbol(1)).count();
        ups as f64 / steps as f64
    };
    let from_up = up_fraction(&point("const:1"), 17);
    let from_down = up_fraction(&point("const:-1"), 17);
    assert!(from_up > 0.9, "expected a polarized run, got +1 fraction {from_up}");
    assert!(from_down < 0.1, "expected the mirror run polarized down, got {from_down}");
}

/// The per-step ratio accounting must telescope: after following a word
/// symbol by symbol, `exp(log_z)` equals the ratio of the two cylinder
/// probabilities of that word.
#[test]
fn step_ratios_telescope_to_cylinder_ratios() {
    let g = canonical_markov();
    let a = point("const:0");
    let b = point("const:1");
    // a fixed 12-step word sampled under the comparison start
    let mut stream = RngStream::new(99, 3);
    let path = simulate_path(&g, &b, 12, &mut stream, &SimOptions::default()).unwrap();
    let word = path.added_word().symbols().to_vec();

    let mut rec = HellingerRecord::start();
    for k in 0..word.len() {
        let pa = conditional_distribution(&g, &word[..k], &a, DEFAULT_TOL).unwrap();
        let pb = conditional_distribution(&g, &word[..k], &b, DEFAULT_TOL).unwrap();
        rec = step_update(&rec, &pa, &pb, word[k]).unwrap();
    }
    let ca = cylinder_probability(&g, &word, &a, DEFAULT_TOL).unwrap();
    let cb = cylinder_probability(&g, &word, &b, DEFAULT_TOL).unwrap();
    let direct = (cb.value / ca.value).ln();
    assert!(
        (rec.log_z - direct).abs() <= 1e-12,
        "accumulated {} vs direct {}",
        rec.log_z,
        direct
    );
    assert_eq!(rec.n, 12);
    assert!(!rec.singular);
}

/// Fast smoothing decay: the comparison diagnostic should reach its
/// convergence verdict already at modest sizes.
#[test]
fn acs_smoke_converges_under_fast_decay() {
    let g = parse_gfn("spin:a=pow3,c=1").unwrap();
    let v = acs_diagnostic(
        g.as_ref(),
        &point("const:-1"),
        &point("const:1"),
        8,
        1500,
        2024,
        &AcsOptions::default(),
    )
    .unwrap();
    assert_eq!(v.verdict, Verdict::Converges, "{v:?}");
    assert!(v.final_increment_q95 < 0.01, "q95 {}", v.final_increment_q95);
    assert!(v.singular_witness.is_none());
    if let Some(bc) = v.bound_check {
        assert_eq!(bc.violations, 0, "certified bound violations: {bc:?}");
    }
}

/// Slow smoothing decay: accumulated distance keeps climbing; the smoke-size
/// run must not be mistaken for convergence, and the fitted growth slope is
/// clearly positive.
#[test]
fn acs_smoke_keeps_growing_under_slow_decay() {
    let g = parse_gfn("spin:a=pow1.5,c=1").unwrap();
    let v = acs_diagnostic(
        g.as_ref(),
        &point("const:-1"),
        &point("const:1"),
        8,
        2000,
        2024,
        &AcsOptions::default(),
    )
    .unwrap();
    assert_ne!(v.verdict, Verdict::Converges, "{v:?}");
    assert_ne!(v.verdict, Verdict::NotLocallyAbsolutelyContinuous);
    assert!(v.slope > 0.02, "slope {}", v.slope);
}

/// Empirical symbol frequencies of a long simulated run agree with the
/// stationary law of the exact surrogate kernel.
#[test]
fn simulation_matches_surrogate_stationary_law() {
    let g = canonical_markov();
    let fill = Context::constant(Symbol(0));
    let ma = build_markov_approx(&g, 1, 2, &fill).unwrap();
    assert!(ma.is_exact());
    let st = exact_stationary(&ma).unwrap();
    assert!((st.distribution[0] - 6.0 / 13.0).abs() < 1e-12);

    let steps: u64 = 20_000;
    let mut stream = RngStream::new(7, 0);
    let path = simulate_path(&g, &point("const:0"), steps, &mut stream, &SimOptions::default())
        .unwrap();
    let ones = path
        .added_word()
        .symbols()
        .iter()
        .filter(|s| **s == Symbol(1))
        .count() as f64;
    let freq = ones / steps as f64;
    // correlated samples: allow four times the iid standard error, doubled
    let p = st.distribution[1];
    let slack = 8.0 * (p * (1.0 - p) / steps as f64).sqrt();
    assert!(
        (freq - p).abs() <= slack,
        "frequency {freq} vs stationary {p} (slack {slack})"
    );
}

/// The structural identities of the likelihood ratio hold on a structureless
/// random kernel, not just on hand-picked tables.
#[test]
fn ratio_identities_hold_on_a_random_kernel() {
    let g = random_table(3, 1, 7);
    let a = point("const:0");
    let b = point("const:2");
    let res = martingale_residuals(&g, &a, &b, 4, DEFAULT_TOL).unwrap();
    assert!(res.total <= 1e-12, "total residual {}", res.total);
    assert!(res.tower <= 1e-12, "tower residual {}", res.tower);

    // a deliberately lumpy statistic of the first four added symbols
    let f = |w: &[Symbol]| -> f64 {
        w.iter().enumerate().map(|(i, s)| (i as f64 + 1.5) * s.0 as f64).sum::<f64>().tanh()
    };
    let r = change_of_measure_residual(&g, &a, &b, 4, &f, DEFAULT_TOL).unwrap();
    assert!(r <= 1e-12, "change-of-measure residual {r}");
}

/// The interval form of the squared Hellinger increment brackets the
/// expectation form on every short history of a depth-two kernel.
#[test]
fn hellinger_interval_brackets_the_expectation_form() {
    let g = random_table(3, 2, 11);
    let a = point("const:0");
    let b = point("const:1");
    let syms = [Symbol(0), Symbol(1), Symbol(2)];
    for len in 0..=3 {
        for w in enumerate_words(&syms, len) {
            let pa = conditional_distribution(&g, &w, &a, DEFAULT_TOL).unwrap();
            let pb = conditional_distribution(&g, &w, &b, DEFAULT_TOL).unwrap();
            let interval = hellinger_sq(&pa, &pb).unwrap();
            let slow = hellinger_sq_by_expectation(&g, &w, &a, &b, DEFAULT_TOL).unwrap();
            assert!(
                slow >= interval.lo - 1e-12 && slow <= interval.hi + 1e-12,
                "word {w:?}: {slow} outside [{}, {}]",
                interval.lo,
                interval.hi
            );
        }
    }
}

/// Envelope pipeline end to end: derive an envelope from the variation
/// budget, certify domination on sampled contexts, then check the rejection
/// sampler's acceptance rate and output law against the kernel itself.
#[test]
fn derived_envelope_dominates_and_samples_correctly() {
    let g = parse_gfn("hulse").unwrap();
    let base = ctx("const:0");
    let env = envelope_from_var1(g.as_ref(), &base, DEFAULT_TOL).unwrap();
    assert!(env.k() >= 1.0);

    let dom = domination_check(g.as_ref(), &env, 200, 5, DEFAULT_TOL).unwrap();
    assert!(dom.violation.is_none(), "violation: {:?}", dom.violation);
    assert!(dom.min_slack >= 0.0, "min slack {}", dom.min_slack);
    assert_eq!(dom.contexts_probed, 200);

    // fixed target context; exact conditional as the reference law
    let target = ctx("word:0,1,1;tail=0");
    let dist = g.conditional(&target.view(), DEFAULT_TOL).unwrap();
    let n: u64 = 20_000;
    let mut stream = RngStream::new(41, 0);
    let mut counts = std::collections::HashMap::new();
    let mut proposals_total = 0u64;
    for _ in 0..n {
        let (sym, proposals) =
            sample_symbol_rejection(g.as_ref(), &target.view(), &env, &mut stream, DEFAULT_TOL)
                .unwrap();
        *counts.entry(sym).or_insert(0u64) += 1;
        proposals_total += proposals;
    }
    // acceptance rate is exactly 1/K, so proposals per draw average K
    let k = env.k();
    let mean = proposals_total as f64 / n as f64;
    let se = k / (n as f64).sqrt();
    assert!((mean - k).abs() <= 4.0 * se, "proposals/draw {mean} vs K {k}");
    // drawn law matches the conditional within four binomial sigmas
    for e in &dist.entries {
        let observed = *counts.get(&e.symbol).unwrap_or(&0) as f64 / n as f64;
        let sigma = (e.prob * (1.0 - e.prob) / n as f64).sqrt();
        assert!(
            (observed - e.prob).abs() <= 4.0 * sigma + 1e-9,
            "symbol {:?}: {} vs {}",
            e.symbol,
            observed,
            e.prob
        );
    }
}

/// Null-recurrent drift: the walk's mean displacement grows diffusively and
/// time spent near the origin thins out, at smoke-test sizes.
#[test]
fn escape_smoke_shows_diffusive_growth() {
    let g = parse_gfn("randomwalk_third").unwrap();
    let rep = escape_diagnostic(g.as_ref(), &point("const:0"), 256, 64, 3, 3).unwrap();
    assert!(
        (0.25..=0.75).contains(&rep.growth_exponent),
        "exponent {}",
        rep.growth_exponent
    );
    assert!(rep.occupancy_final < rep.occupancy_first);
    assert!(rep.series.windows(2).all(|w| w[0].n < w[1].n), "checkpoints must be increasing");
    assert!(rep.series.iter().all(|r| r.mean_abs >= 0.0 && (0.0..=1.0).contains(&r.occupancy)));
}
