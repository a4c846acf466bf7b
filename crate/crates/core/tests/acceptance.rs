//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits 0 after reporting, so a red criterion stays visible without
//! breaking `cargo test`; set `ACCEPTANCE_STRICT=1` to exit 1 instead.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noisy_search::graph::{consistent_set, weighted_median};
use noisy_search::graph_search::{self, step_median_update};
use noisy_search::harness::bounds::bin_lv_constant;
use noisy_search::harness::invariants::{noise_channel_stats, CoupledBoundChecker, GraphInvariantChecker};
use noisy_search::harness::run::run_trials;
use noisy_search::harness::stats::RunsTest;
use noisy_search::harness::{
    adversarial_sweep, run_experiment, ExperimentConfig, GraphSource, PriorSource, Scenario, ScenarioContext,
};
use noisy_search::linear_search::{self, central_element, comparison_update};
use noisy_search::mathcore::{
    coupled_epoch_log2_factor, dist_entropy, expected_epoch_factor, lv_graph_ceiling, rescaled_confidence,
    solve_quadratic_threshold, worst_case_budget_graph, DEFAULT_C_CONST, DEFAULT_C_PRIME,
};
use noisy_search::oracle::{graph_answer, GraphEnvironment, LinearEnvironment};
use noisy_search::{
    all_pairs_distances, AnswerKind, Distribution, Graph, GraphGenerator, LieChoice, NoiseParams, NoisePolicy,
    WeightState,
};

type Outcome = Result<String, String>;

fn nz(p: f64) -> NoiseParams {
    NoiseParams::new(p).expect("valid p")
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    GraphGenerator::RandomConnected.build(n, rng.random()).expect("random connected graph")
}

fn fuzz_graph_family(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.random_range(2..=64usize);
    let seed: u64 = rng.random();
    let g = match rng.random_range(0..7) {
        0 => GraphGenerator::Path,
        1 if n >= 3 => GraphGenerator::Cycle,
        2 => GraphGenerator::Star,
        3 => GraphGenerator::RandomTree,
        4 => {
            let rows = rng.random_range(1..=8usize);
            let cols = rng.random_range(1..=8usize);
            return GraphGenerator::Grid { rows: Some(rows), cols: Some(cols) }
                .build(rows * cols, seed)
                .expect("grid");
        }
        5 => {
            let dim = rng.random_range(1..=6u32);
            return GraphGenerator::Hypercube.build(1 << dim, seed).expect("hypercube");
        }
        _ => GraphGenerator::RandomConnected,
    };
    g.build(n, seed).expect("generated graph")
}

// ---- 1: weight outside the heaviest vertex ----

fn ac1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let ps = [0.1, 0.25, 0.4];
    let (mut steps, mut violations, mut runs) = (0u64, Vec::new(), 0u32);
    for i in 0..1000u32 {
        let n = rng.random_range(2..=64usize);
        let g = random_graph(&mut rng, n);
        let d = all_pairs_distances(&g);
        let noise = nz(ps[i as usize % 3]);
        let target = rng.random_range(0..n);
        let mut checker = GraphInvariantChecker::new();
        let env_rng = ChaCha8Rng::seed_from_u64(rng.random());
        match i % 3 {
            0 | 1 => {
                let lie = if i % 3 == 0 {
                    LieChoice::UniformWrong
                } else {
                    LieChoice::AdversarialHeaviest
                };
                let policy = NoisePolicy::new(noise).with_lie_choice(lie);
                let mut env = GraphEnvironment::new(&g, &d, policy, target, env_rng);
                graph_search::run_adversarial(&g, &d, &noise, 0.1, &mut env, &mut checker)
                    .map_err(|e| e.to_string())?;
            }
            _ => {
                // any legal reply, with no regard for a target
                let mut script_rng = env_rng;
                let mut scripted = |q: usize, _: &WeightState| {
                    let nb = g.neighbors(q);
                    let k = script_rng.random_range(0..=nb.len());
                    if k == nb.len() {
                        AnswerKind::Yes
                    } else {
                        AnswerKind::Neighbor(nb[k])
                    }
                };
                graph_search::run_adversarial(&g, &d, &noise, 0.1, &mut scripted, &mut checker)
                    .map_err(|e| e.to_string())?;
            }
        }
        runs += 1;
        steps += checker.steps_checked;
        violations.extend(checker.violations);
    }
    let detail = format!("{runs} transcripts, {steps} steps, {} violations", violations.len());
    ensure(violations.is_empty() && steps > 0, match violations.first() {
        Some(v) => format!("{detail}; first {v:?}"),
        None => detail,
    })
}

// ---- 2: median reply sets ----

fn ac2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut worst, mut bad, mut sets) = (0.0f64, 0u32, 0u64);
    for i in 0..1000 {
        let g = fuzz_graph_family(&mut rng);
        let n = g.n();
        let d = all_pairs_distances(&g);
        let raw: Vec<f64> = (0..n)
            .map(|_| match i % 3 {
                0 => rng.random_range(0.0..1.0) + 1e-12,
                1 => (-rng.random_range(0.0..30.0f64)).exp(),
                _ => {
                    if rng.random_bool(0.2) {
                        1.0
                    } else {
                        1e-9
                    }
                }
            })
            .collect();
        let w = WeightState::from_relative(raw, 0.0).map_err(|e| e.to_string())?;
        let q = weighted_median(&g, &d, &w);
        for &u in g.neighbors(q) {
            let set = consistent_set(&g, &d, q, &AnswerKind::Neighbor(u)).map_err(|e| e.to_string())?;
            let mass = w.mass(set.members());
            sets += 1;
            worst = worst.max(mass);
            if mass > 0.5 + 1e-9 {
                bad += 1;
            }
        }
    }
    ensure(bad == 0, format!("1000 instances, {sets} reply sets, max relative weight {worst:.12}, {bad} over 1/2"))
}

// ---- 3: posterior against brute-force conditionals ----

struct GraphCase {
    g: Graph,
    dist: Box<dyn Fn(usize, usize) -> usize>,
}

fn path_case(n: usize) -> GraphCase {
    GraphCase {
        g: GraphGenerator::Path.build(n, 0).expect("path"),
        dist: Box::new(|a: usize, b: usize| a.abs_diff(b)),
    }
}

fn cycle_case(n: usize) -> GraphCase {
    GraphCase {
        g: GraphGenerator::Cycle.build(n, 0).expect("cycle"),
        dist: Box::new(move |a: usize, b: usize| {
            let k = a.abs_diff(b);
            k.min(n - k)
        }),
    }
}

fn brute_graph_posterior(case: &GraphCase, p: f64, history: &[(usize, AnswerKind)]) -> Vec<f64> {
    let n = case.g.n();
    let mut post = vec![1.0 / n as f64; n];
    for &(q, a) in history {
        let heavy = post[q] / post.iter().sum::<f64>() >= 0.5 - 1e-12;
        for (x, w) in post.iter_mut().enumerate() {
            let consistent = match a {
                AnswerKind::Yes => x == q,
                // a no-answer at a heavy vertex only rules that vertex out
                AnswerKind::Neighbor(_) if heavy => x != q,
                AnswerKind::Neighbor(u) => (case.dist)(u, x) + 1 == (case.dist)(q, x),
                _ => unreachable!(),
            };
            *w *= if consistent { 1.0 - p } else { p };
        }
    }
    let total: f64 = post.iter().sum();
    post.iter().map(|w| w / total).collect()
}

fn explore_graph(
    case: &GraphCase,
    d: &noisy_search::DistanceMatrix,
    noise: &NoiseParams,
    state: &WeightState,
    history: &mut Vec<(usize, AnswerKind)>,
    depth: usize,
    stats: &mut (u64, f64),
) -> Result<(), String> {
    let brute = brute_graph_posterior(case, noise.p(), history);
    for (a, b) in state.relative().iter().zip(&brute) {
        stats.1 = stats.1.max((a - b).abs());
    }
    stats.0 += 1;
    if depth == 8 {
        return Ok(());
    }
    let q = weighted_median(&case.g, d, state);
    let mut replies = vec![AnswerKind::Yes];
    replies.extend(case.g.neighbors(q).iter().map(|&u| AnswerKind::Neighbor(u)));
    for reply in replies {
        let mut next = state.clone();
        let mut scripted = |_: usize, _: &WeightState| reply;
        let out = step_median_update(&mut next, &case.g, d, noise, &mut scripted, &mut ()).map_err(|e| e.to_string())?;
        if out.query != q {
            return Err(format!("median moved from {q} to {}", out.query));
        }
        history.push((q, reply));
        explore_graph(case, d, noise, &next, history, depth + 1, stats)?;
        history.pop();
    }
    Ok(())
}

fn brute_comparison_posterior(n: usize, p: f64, history: &[(usize, AnswerKind)]) -> Vec<f64> {
    let mut post = vec![1.0 / n as f64; n];
    for &(pivot, a) in history {
        for (x, w) in post.iter_mut().enumerate() {
            *w *= if x == pivot {
                0.5
            } else if (x < pivot) == (a == AnswerKind::Less) {
                1.0 - p
            } else {
                p
            };
        }
    }
    let total: f64 = post.iter().sum();
    post.iter().map(|w| w / total).collect()
}

fn explore_comparisons(
    n: usize,
    noise: &NoiseParams,
    state: &WeightState,
    history: &mut Vec<(usize, AnswerKind)>,
    depth: usize,
    stats: &mut (u64, f64),
) -> Result<(), String> {
    let brute = brute_comparison_posterior(n, noise.p(), history);
    for (a, b) in state.relative().iter().zip(&brute) {
        stats.1 = stats.1.max((a - b).abs());
    }
    stats.0 += 1;
    if depth == 8 {
        return Ok(());
    }
    let pivot = central_element(state, &vec![false; n]).map_err(|e| e.to_string())?;
    for reply in [AnswerKind::Less, AnswerKind::Greater] {
        let mut next = state.clone();
        comparison_update(&mut next, pivot, reply, noise).map_err(|e| e.to_string())?;
        history.push((pivot, reply));
        explore_comparisons(n, noise, &next, history, depth + 1, stats)?;
        history.pop();
    }
    Ok(())
}

fn ac3() -> Outcome {
    let mut stats = (0u64, 0.0f64);
    for p in [0.1, 0.25, 0.4] {
        let noise = nz(p);
        for n in 2..=6 {
            let mut cases = vec![path_case(n)];
            if n >= 3 {
                cases.push(cycle_case(n));
            }
            for case in &cases {
                let d = all_pairs_distances(&case.g);
                let start = WeightState::init_uniform(n).map_err(|e| e.to_string())?;
                explore_graph(case, &d, &noise, &start, &mut Vec::new(), 0, &mut stats)?;
            }
            let start = WeightState::init_uniform(n).map_err(|e| e.to_string())?;
            explore_comparisons(n, &noise, &start, &mut Vec::new(), 0, &mut stats)?;
        }
    }
    ensure(
        stats.1 <= 1e-9,
        format!("{} answer prefixes (path, cycle, comparisons; n <= 6, length <= 8), max deviation {:.3e}", stats.0, stats.1),
    )
}

// ---- 4: fixed-budget graph search ----

fn budget_inequality(q: u64, n: usize, noise: &NoiseParams, delta: f64) -> bool {
    let q = q as f64;
    noise.info_rate() * q >= (n as f64).log2() + (q / 2.0 * (1.0 / delta).ln()).sqrt() * noise.log2_gamma()
}

fn ac4() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, gen) in [("path(1024)", GraphGenerator::Path), ("grid 32x32", GraphGenerator::Grid { rows: Some(32), cols: Some(32) })] {
        for p in [0.25, 0.3] {
            for delta in [0.1, 0.2] {
                let noise = nz(p);
                let q = worst_case_budget_graph(1024, &noise, delta).map_err(|e| e.to_string())?.q;
                let minimal = budget_inequality(q, 1024, &noise, delta) && !budget_inequality(q - 1, 1024, &noise, delta);
                let cfg = ExperimentConfig::new(Scenario::GraphAdversarial, 1024, p, delta, 2000, 4)
                    .with_graph(GraphSource::Generator(gen));
                let s = run_experiment(&cfg).map_err(|e| e.to_string())?.summary;
                let exact = s.max_queries == q && s.mean_queries == q as f64;
                let this = minimal && exact && s.error_ci_high <= delta;
                ok &= this;
                lines.push(format!(
                    "{name} p={p} d={delta}: Q={q}{} err {:.4} (upper {:.4}){}",
                    if exact { "" } else { " NOT EXACT" },
                    s.error_rate,
                    s.error_ci_high,
                    if this { "" } else { " <-" }
                ));
            }
        }
    }
    ensure(ok, lines.join("; "))
}

// ---- 5, 6: Las Vegas graph search ----

fn dyadic_256() -> Distribution {
    // blocks of 1, 2, 4, ..., 128 vertices holding 1/2, 1/4, ... each, plus
    // one vertex with the remaining 2^-8
    let mut masses = Vec::with_capacity(256);
    for k in 1..=8i32 {
        let size = 1usize << (k - 1);
        masses.resize(masses.len() + size, 2f64.powi(-(2 * k - 1)));
    }
    masses.push(2f64.powi(-8));
    Distribution::new(masses).expect("dyadic prior sums to one")
}

fn ac5() -> Outcome {
    let (p, delta) = (0.25, 0.1f64);
    let noise = nz(p);
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, prior, mu) in [
        ("uniform", PriorSource::Uniform, Distribution::uniform(256).expect("uniform")),
        ("dyadic", PriorSource::Masses(dyadic_256().masses().to_vec()), dyadic_256()),
    ] {
        let ceiling = (dist_entropy(&mu) + (1.0 / delta).log2() + 1.0) / noise.info_rate();
        let cfg = ExperimentConfig::new(Scenario::GraphLvDistr, 256, p, delta, 2000, 5)
            .with_graph(GraphSource::Generator(GraphGenerator::Grid { rows: Some(16), cols: Some(16) }))
            .with_prior(prior);
        let s = run_experiment(&cfg).map_err(|e| e.to_string())?.summary;
        let se = s.mean_standard_error();
        let this = s.mean_queries <= ceiling + se && s.error_rate <= delta && (s.theoretical_bound - ceiling).abs() < 1e-9;
        ok &= this;
        lines.push(format!(
            "{name}: mean {:.2} (se {:.2}) vs ceiling {ceiling:.3}, err {:.4}",
            s.mean_queries, se, s.error_rate
        ));
    }
    ensure(ok, lines.join("; "))
}

fn ac6() -> Outcome {
    let (n, p, delta) = (256, 0.3, 0.2f64);
    let noise = nz(p);
    let inner = rescaled_confidence(n, delta, DEFAULT_C_PRIME).map_err(|e| e.to_string())?;
    let ceiling = lv_graph_ceiling(1.0 / n as f64, inner, &noise);
    let cfg = ExperimentConfig::new(Scenario::GraphLvAdv, n, p, delta, 2000, 6)
        .with_graph(GraphSource::Generator(GraphGenerator::Grid { rows: Some(16), cols: Some(16) }));
    let s = run_experiment(&cfg).map_err(|e| e.to_string())?.summary;
    ensure(
        s.error_rate <= delta && s.mean_queries <= ceiling,
        format!(
            "grid 16x16: mean {:.2} vs ceiling {ceiling:.3} at delta' {inner:.3e}, err {:.4}, flagged {}",
            s.mean_queries, s.error_rate, s.flagged_trials
        ),
    )
}

// ---- 7: epoch expectation ----

fn ac7() -> Outcome {
    let mut worst = 0.0f64;
    for eps in [0.05, 0.1, 0.25] {
        let noise = nz(0.5 - eps);
        let p = noise.p();
        for k in 1..=10u32 {
            // target below the pivot: "less" is the truthful answer
            let mut brute = 0.0;
            for seq in 0u32..(1 << k) {
                let x = seq.count_ones() as u64;
                let y = k as u64 - x;
                let prob = (1.0 - p).powi(x as i32) * p.powi(y as i32);
                brute += prob * coupled_epoch_log2_factor(x, y, &noise).exp2();
            }
            let s = 4.0 * eps * eps;
            let closed = 2f64.powi(-(k as i32) - 1) * ((1.0 - s).powi(k as i32) + (1.0 + s).powi(k as i32));
            worst = worst.max((brute - closed).abs()).max((expected_epoch_factor(k as u64, eps) - closed).abs());
        }
    }
    let example = 2f64.powi(-3) * (0.96f64.powi(2) + 1.04f64.powi(2));
    ensure(
        worst <= 1e-12 && (example - 0.2504).abs() < 1e-12,
        format!("k <= 10, eps in {{0.05, 0.1, 0.25}}: max deviation {worst:.3e}; k=2 eps=0.1 gives {example:.4}"),
    )
}

// ---- 8: coupled bound ----

fn ac8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let ps = [0.05, 0.1, 0.25, 0.4, 0.45];
    let (mut boundaries, mut violations) = (0u64, Vec::new());
    for i in 0..1000u32 {
        let n = rng.random_range(2..=256usize);
        let noise = nz(ps[i as usize % ps.len()]);
        let target = rng.random_range(0..n);
        let mut checker = CoupledBoundChecker::new();
        let mut r2 = ChaCha8Rng::seed_from_u64(rng.random());
        let result = match i % 4 {
            0 => {
                let mut env = LinearEnvironment::new(NoisePolicy::new(noise), target, r2);
                linear_search::run_adversarial(n, &noise, 0.1, DEFAULT_C_CONST, &mut env, &mut checker)
            }
            1 => {
                let mut env = LinearEnvironment::new(NoisePolicy::new(noise), target, r2);
                let mu = Distribution::uniform(n).expect("uniform");
                linear_search::run_lv_distributional(&mu, &noise, 0.2, DEFAULT_C_CONST, &mut env, &mut checker)
            }
            2 => {
                // answers with no target behind them
                let mut coin = |_: usize| if r2.random_bool(0.5) { AnswerKind::Less } else { AnswerKind::Greater };
                linear_search::run_adversarial(n, &noise, 0.1, DEFAULT_C_CONST, &mut coin, &mut checker)
            }
            _ => {
                // every answer a lie
                let mut liar = |q: usize| if target < q { AnswerKind::Greater } else { AnswerKind::Less };
                linear_search::run_adversarial(n, &noise, 0.1, DEFAULT_C_CONST, &mut liar, &mut checker)
            }
        };
        result.map_err(|e| e.to_string())?;
        boundaries += checker.boundaries_checked;
        violations.extend(checker.violations);
    }
    let detail = format!("1000 transcripts, {boundaries} epoch boundaries, {} violations", violations.len());
    ensure(violations.is_empty() && boundaries > 0, match violations.first() {
        Some(v) => format!("{detail}; first {v:?}"),
        None => detail,
    })
}

// ---- 9: fixed-budget binary search ----

fn ac9() -> Outcome {
    let (n, p, delta) = (1024, 0.3, 0.1f64);
    let noise = nz(p);
    let q = noisy_search::mathcore::worst_case_budget_linear(n, &noise, delta, DEFAULT_C_CONST)
        .map_err(|e| e.to_string())?
        .q;
    let mut cfg = ExperimentConfig::new(Scenario::BinAdversarial, n, p, delta, 2000, 9);
    cfg.keep_transcripts = true;
    let ctx = ScenarioContext::prepare(&cfg).map_err(|e| e.to_string())?;
    let outcomes = run_trials(&ctx).map_err(|e| e.to_string())?;
    let (mut wrong_len, mut too_many_marked, mut max_marked) = (0u32, 0u32, 0usize);
    for o in &outcomes {
        let info = o.transcript.as_ref().and_then(|t| t.phases.as_ref()).ok_or("missing phase record")?;
        wrong_len += u32::from(info.phase_one_queries != q);
        too_many_marked += u32::from(info.marked.len() as u64 > info.completed_epochs + 1);
        max_marked = max_marked.max(info.marked.len());
    }
    let failures = outcomes.iter().filter(|o| !o.success).count();
    let err = failures as f64 / outcomes.len() as f64;
    ensure(
        err <= delta && wrong_len == 0 && too_many_marked == 0,
        format!(
            "{} trials: err {err:.4}, phase one = Q = {q} in all but {wrong_len}, |M| <= f+1 in all but {too_many_marked} (max |M| {max_marked})",
            outcomes.len()
        ),
    )
}

// ---- 10: Las Vegas binary search, every target ----

fn ac10() -> Outcome {
    let (n, p, delta) = (64, 0.3, 0.2f64);
    let noise = nz(p);
    let geometric: Vec<f64> = {
        let raw: Vec<f64> = (0..n).map(|i| 0.9f64.powi(i as i32)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|m| m / total).collect()
    };
    let runs = [
        ("bin-lv-distr uniform", Scenario::BinLvDistr, PriorSource::Uniform, None),
        ("bin-lv-distr geometric", Scenario::BinLvDistr, PriorSource::Masses(geometric.clone()), Some(geometric)),
        ("bin-lv-adv", Scenario::BinLvAdv, PriorSource::Uniform, None),
    ];
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, scenario, prior, masses) in runs {
        let cfg = ExperimentConfig::new(scenario, n, p, delta, 400, 10).with_prior(prior);
        let sweep = adversarial_sweep(&cfg).map_err(|e| e.to_string())?;
        let (mut over_err, mut over_bound) = (Vec::new(), 0u32);
        let mut k_range = (f64::INFINITY, f64::NEG_INFINITY);
        let mut averaged = 0.0;
        for (t, s) in &sweep.rows {
            averaged += s.error_rate * masses.as_ref().map_or(1.0 / n as f64, |m| m[*t]);
            // the shifted strategy searches 2n elements at confidence delta/2
            let (mass, conf) = match (scenario, &masses) {
                (Scenario::BinLvAdv, _) => (1.0 / (2 * n) as f64, delta / 2.0),
                (_, Some(m)) => (m[*t], delta),
                _ => (1.0 / n as f64, delta),
            };
            let k = bin_lv_constant(mass, &noise, conf, DEFAULT_C_CONST);
            k_range = (k_range.0.min(k), k_range.1.max(k));
            let ceiling = (-mass.log2() + (1.0 / conf).log2() + k) / noise.info_rate();
            if s.mean_queries > ceiling || (s.theoretical_bound - ceiling).abs() > 1e-9 {
                over_bound += 1;
            }
            if s.error_rate > delta {
                over_err.push(format!("{t}:{:.3}", s.error_rate));
            }
        }
        let this = over_err.is_empty() && over_bound == 0;
        ok &= this;
        lines.push(format!(
            "{name}: prior-averaged err {averaged:.4}, worst err {:.4} at {}, worst mean {:.1} at {}, K in [{:.2}, {:.2}], {} targets over the ceiling, err > delta at [{}]",
            sweep.max_error_rate,
            sweep.worst_error_target,
            sweep.max_mean_queries,
            sweep.worst_queries_target,
            k_range.0,
            k_range.1,
            over_bound,
            over_err.join(" ")
        ));
    }
    ensure(ok, lines.join("; "))
}

// ---- 11: threshold solver ----

fn ac11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let a = 10f64.powf(rng.random_range(-3.0..2.0));
        let b = if i % 10 == 0 { 0.0 } else { 10f64.powf(rng.random_range(-3.0..4.0)) };
        let c = if i % 10 == 1 { 0.0 } else { rng.random_range(0.0..50.0) };
        let x = solve_quadratic_threshold(a, b, c).map_err(|e| e.to_string())?;
        let rel = (a * x - b - c * x.sqrt()).abs() / b.max(1.0);
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-9, format!("1000 triples, max residual / max(1, b) = {worst:.3e}"))
}

// ---- 12: noise channel ----

fn ac12() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, p) in [0.1, 0.25, 0.4].into_iter().enumerate() {
        let s = noise_channel_stats(&nz(p), 100_000, 1200 + i as u64);
        let this = s.within_three_sigma() && s.runs.passes_at_1_percent();
        ok &= this;
        lines.push(format!("comparisons p={p}: rate {:.5} ({:+.2} sd), runs z {:+.2}", s.lie_rate, s.sigmas, s.runs.z));
    }
    // graph replies on a grid, both lie choices
    let g = GraphGenerator::Grid { rows: Some(8), cols: Some(8) }.build(64, 0).map_err(|e| e.to_string())?;
    let d = all_pairs_distances(&g);
    let noise = nz(0.25);
    let weights = WeightState::init_uniform(64).map_err(|e| e.to_string())?;
    for lie in [LieChoice::UniformWrong, LieChoice::AdversarialHeaviest] {
        let policy = NoisePolicy::new(noise).with_lie_choice(lie);
        let mut rng = ChaCha8Rng::seed_from_u64(1299);
        let lies: Vec<bool> = (0..100_000)
            .map(|_| {
                let (q, t) = (rng.random_range(0..64), rng.random_range(0..64));
                graph_answer(q, t, &g, &d, &policy, Some(&weights), &mut rng).is_lie
            })
            .collect();
        let k = lies.iter().filter(|&&l| l).count() as f64;
        let sigmas = (k / 1e5 - 0.25) / (0.25 * 0.75 / 1e5f64).sqrt();
        let runs = RunsTest::new(&lies);
        let this = sigmas.abs() <= 3.0 && runs.passes_at_1_percent();
        ok &= this;
        lines.push(format!("graph {lie:?} p=0.25: {:+.2} sd, runs z {:+.2}", sigmas, runs.z));
    }
    ensure(ok, format!("10^5 draws each; {}", lines.join("; ")))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        ("weight outside the heaviest vertex <= 2^-t on fuzzed graph runs", ac1),
        ("median reply sets hold at most half the weight", ac2),
        ("posterior equals brute-force conditionals", ac3),
        ("fixed-budget graph search: exact Q, error upper bound <= delta", ac4),
        ("Las Vegas graph search from a prior: mean within ceiling, error <= delta", ac5),
        ("Las Vegas graph search without a prior: ceiling at rescaled delta", ac6),
        ("epoch expectation of the coupled bound", ac7),
        ("unmarked weight never exceeds the coupled bound", ac8),
        ("fixed-budget binary search: error, phase-one length, marked set", ac9),
        ("Las Vegas binary search: every target, error and ceiling", ac10),
        ("threshold solver residuals", ac11),
        ("noise channel rate and independence", ac12),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut passed = 0;
    let mut ran = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = format!("AC{}", i + 1);
        if filter.as_ref().is_some_and(|f| !id.eq_ignore_ascii_case(f)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        passed += usize::from(outcome.is_ok());
        println!("{id:<5} {status}  {name} [{secs:.1}s]\n      {detail}");
    }
    println!("acceptance: {passed}/{ran} criteria passed");
    if passed < ran && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
