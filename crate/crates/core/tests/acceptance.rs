//! Acceptance suite. Each test checks one criterion and prints a single
//! `[PASS]` / `[FAIL]` line; run with `--nocapture` to see them.
//!
//! Criteria 8 (anytime monotonicity) and 10 (determinism) are checked over the
//! UCT runs of criteria 4 to 6, which are computed once and shared.

mod common;

use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use stable_expand::harness::instance_digest;
use stable_expand::oracle::theta_size;
use stable_expand::*;

use common::*;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id:>2}: {name} -- {detail}");
}

fn set_instance(set: u8, d: usize, h: usize, b: u32, alpha: f64, seed: u64) -> MatchingInstance {
    let p = SyntheticParams {
        residents: d,
        hospitals: h,
        budget: b,
        alpha,
        seed,
    };
    match set {
        1 => generate_set1(&p).unwrap(),
        _ => generate_set2(&p).unwrap(),
    }
}

#[test]
fn c01_stability_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0;
    let mut failures = 0;
    for i in 0..200u64 {
        let set = if i % 2 == 0 { 1 } else { 2 };
        let h = 2 + (i as usize % 9);
        let d = 20 + (i as usize * 37) % 181;
        let b = 2 + (i as u32 % 9);
        let alpha = [0.0, 0.2, 0.4, 0.7][i as usize % 4];
        let inst = set_instance(set, d, h, b, alpha, 1000 + i);
        for _ in 0..5 {
            let t = random_expansion(&mut rng, &inst);
            let m = run_da(&inst, &t).unwrap();
            checked += 1;
            if !find_blocking_pairs(&inst, &t, &m).stable {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures == 0 && checked == 1000 && elapsed < Duration::from_secs(30);
    report(
        1,
        "stability",
        pass,
        &format!("{checked} matchings, {failures} unstable, {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn c02_resident_optimality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut mismatches = 0;
    for i in 0..100 {
        let inst = tiny_instance(&mut rng, 6, 3, i % 2 == 1);
        let t = random_expansion(&mut rng, &inst);
        let da_cost = total_cost(&inst, &run_da(&inst, &t).unwrap());
        let best = enumerate_stable_matchings(&inst, &t)
            .unwrap()
            .iter()
            .map(|m| total_cost(&inst, m))
            .min()
            .expect("a stable matching exists");
        if da_cost != best {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches == 0 && elapsed < Duration::from_secs(10);
    report(
        2,
        "resident optimality",
        pass,
        &format!("100 instances, {mismatches} mismatches, {elapsed:.2?}"),
    );
    assert!(pass);
}

fn tree_case_ok(inst: &MatchingInstance, ordering: &HospitalOrdering) -> bool {
    let budget = inst.budget();
    let theta = theta_by_counting(inst.expansion_limits(), budget);
    let full: Vec<Vec<u32>> = theta
        .iter()
        .filter(|t| t.iter().sum::<u32>() == budget)
        .cloned()
        .collect();

    let ipt = ExpansionTree::new(inst, ordering, Representation::Ipt)
        .enumerate_leaves()
        .unwrap();
    let mut ipt: Vec<Vec<u32>> = ipt.into_iter().map(|t| t.0).collect();
    let ipt_len = ipt.len();
    ipt.sort();
    ipt.dedup();
    let ipt_ok = ipt_len == ipt.len() && ipt == full;

    let bt = ExpansionTree::new(inst, ordering, Representation::Bt)
        .enumerate_leaves()
        .unwrap();
    let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
    for t in bt {
        *counts.entry(t.0).or_default() += 1;
    }
    let bt_ok = counts.values().all(|&c| c == 1)
        && counts.keys().all(|t| theta.contains(t))
        && full.iter().all(|t| counts.get(t) == Some(&1));

    let iter = ExpansionTree::new(inst, ordering, Representation::Iterative)
        .enumerate_leaves()
        .unwrap();
    let mut counts: HashMap<Vec<u32>, u128> = HashMap::new();
    for t in iter {
        *counts.entry(t.0).or_default() += 1;
    }
    let iter_ok =
        counts.len() == full.len() && full.iter().all(|t| counts.get(t) == Some(&multinomial(t)));

    ipt_ok && bt_ok && iter_ok
}

#[test]
fn c03_tree_bijections() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut cases = 0;
    let mut failures = Vec::new();
    for h in 1..=4usize {
        for budget in 0..=4u32 {
            let mut made = 0;
            while made < 5 {
                let limits: Vec<u32> = (0..h).map(|_| rng.gen_range(0..=4)).collect();
                if limits.iter().sum::<u32>() < budget {
                    continue;
                }
                made += 1;
                let inst = MatchingInstance::new(InstanceParts {
                    num_residents: 1,
                    num_hospitals: h,
                    quotas: vec![1; h],
                    expansion_limits: limits.clone(),
                    budget,
                    resident_prefs: vec![(0..h).collect()],
                    hospital_prefs: vec![vec![0]; h],
                    dummy_hospital: false,
                    seed: None,
                })
                .unwrap();
                for seed in 0..2 {
                    let ordering = make_ordering(&inst, OrderingKind::Random, seed);
                    cases += 1;
                    if !tree_case_ok(&inst, &ordering) {
                        failures.push((limits.clone(), budget, ordering.permutation));
                    }
                }
            }
        }
    }
    let pass = failures.is_empty();
    report(
        3,
        "tree bijections",
        pass,
        &format!("{cases} cases, failures: {failures:?}"),
    );
    assert!(pass);
}

/// One UCT run, performed twice for the determinism check.
struct UctRun {
    label: String,
    method: Method,
    record: String,
    rerun_record: String,
    trajectory: Vec<TrajectoryPoint>,
    cost: u64,
    exhaustive: bool,
    oracle: Option<u64>,
}

fn uct_run(
    inst: &MatchingInstance,
    label: String,
    method: Method,
    config: &RunConfig,
    oracle: Option<u64>,
) -> UctRun {
    let digest = instance_digest(save_instance(inst).as_bytes());
    let first = run_method(inst, method, config).unwrap();
    let second = run_method(inst, method, config).unwrap();
    let record = RunRecord::new(label.clone(), digest.clone(), config, &first, None);
    let rerun = RunRecord::new(label.clone(), digest, config, &second, None);
    UctRun {
        label,
        method,
        record: record.to_json_without_wall_time(),
        rerun_record: rerun.to_json_without_wall_time(),
        trajectory: first.trajectory.unwrap(),
        cost: first.best_cost,
        exhaustive: first.terminated_exhaustively.unwrap(),
        oracle,
    }
}

fn leaf_count(inst: &MatchingInstance, method: Method, seed: u64) -> u64 {
    let Method::Uct(repr, kind) = method else {
        unreachable!()
    };
    let ordering = make_ordering(inst, kind, seed);
    ExpansionTree::new(inst, &ordering, repr)
        .leaf_count(1_000_000)
        .unwrap() as u64
}

fn prop3_runs() -> &'static Vec<UctRun> {
    static RUNS: OnceLock<Vec<UctRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut instances = Vec::new();
        let mut seed = 400u64;
        while instances.len() < 20 {
            let set = if instances.len() % 2 == 0 { 1 } else { 2 };
            let h = 2 + instances.len() % 3;
            let b = 2 + (instances.len() % 4) as u32;
            let inst = set_instance(set, 30 + instances.len() * 5, h, b, 0.2, seed);
            seed += 1;
            if theta_size(&inst) <= 200 {
                instances.push(inst);
            }
        }
        instances
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, inst)| {
                let (_, optimum) = brute_force_optimal(inst).unwrap();
                Method::uct_variants().into_iter().map(move |m| {
                    let config = RunConfig {
                        rounds: Some(leaf_count(inst, m, i as u64)),
                        seed: i as u64,
                        ..RunConfig::default()
                    };
                    uct_run(inst, format!("prop3-{i}-{m}"), m, &config, Some(optimum))
                })
            })
            .collect()
    })
}

#[test]
fn c04_exhaustive_search() {
    let runs = prop3_runs();
    let bad: Vec<&str> = runs
        .iter()
        .filter(|r| !(r.exhaustive && Some(r.cost) == r.oracle))
        .map(|r| r.label.as_str())
        .collect();
    let pass = runs.len() == 140 && bad.is_empty();
    report(
        4,
        "exhaustive with N = leaf count",
        pass,
        &format!("{} runs, failing: {bad:?}", runs.len()),
    );
    assert!(pass);
}

struct Table2Row {
    oracle: Vec<u64>,
    greedy: Vec<u64>,
    lph: Vec<u64>,
    uct: Vec<UctRun>,
    elapsed: Duration,
}

fn table2_runs() -> &'static Table2Row {
    static ROW: OnceLock<Table2Row> = OnceLock::new();
    ROW.get_or_init(|| {
        let start = Instant::now();
        let instances: Vec<MatchingInstance> = (0..10)
            .map(|s| set_instance(1, 1000, 5, 5, 0.0, 500 + s))
            .collect();
        let oracle: Vec<u64> = instances
            .par_iter()
            .map(|i| brute_force_optimal(i).unwrap().1)
            .collect();
        let greedy = instances
            .par_iter()
            .map(|i| greedy_expansion(i).unwrap().cost)
            .collect();
        let lph = instances
            .par_iter()
            .map(|i| lp_heuristic(i).unwrap().cost)
            .collect();
        let uct = instances
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, inst)| {
                let opt = oracle[i];
                Method::uct_variants().into_iter().map(move |m| {
                    let config = RunConfig {
                        seed: i as u64,
                        ..RunConfig::default()
                    };
                    uct_run(inst, format!("table2-{i}-{m}"), m, &config, Some(opt))
                })
            })
            .collect();
        Table2Row {
            oracle,
            greedy,
            lph,
            uct,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn c05_small_set1_gaps() {
    let row = table2_runs();
    let mut by_method: HashMap<String, Vec<f64>> = HashMap::new();
    for r in &row.uct {
        by_method
            .entry(r.method.name())
            .or_default()
            .push(gap(r.cost, r.oracle.unwrap()));
    }
    let averages: Vec<(String, f64)> = {
        let mut v: Vec<(String, f64)> = by_method
            .iter()
            .map(|(m, g)| (m.clone(), g.iter().sum::<f64>() / g.len() as f64))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    };
    let uct_ok = averages.len() == 7 && averages.iter().all(|(_, g)| g.abs() <= 0.05);
    let positive = |costs: &[u64]| {
        costs
            .iter()
            .zip(&row.oracle)
            .filter(|(c, o)| gap(**c, **o) > 0.0)
            .count()
    };
    let greedy_pos = positive(&row.greedy);
    let lph_pos = positive(&row.lph);
    let avg = |costs: &[u64]| {
        costs
            .iter()
            .zip(&row.oracle)
            .map(|(c, o)| gap(*c, *o))
            .sum::<f64>()
            / 10.0
    };
    let pass = uct_ok && greedy_pos >= 8 && lph_pos >= 8 && row.elapsed < Duration::from_secs(300);
    report(
        5,
        "H=5 B=5 alpha=0 gaps",
        pass,
        &format!(
            "uct averages {averages:?}; grdy {:.2} ({greedy_pos}/10 > 0); lph {:.2} ({lph_pos}/10 > 0); {:.2?}",
            avg(&row.greedy),
            avg(&row.lph),
            row.elapsed
        ),
    );
    assert!(pass);
}

struct LargeRow {
    greedy: Vec<u64>,
    bt_e: Vec<UctRun>,
    bt_r: Vec<UctRun>,
    elapsed: Duration,
}

fn large_runs() -> &'static LargeRow {
    static ROW: OnceLock<LargeRow> = OnceLock::new();
    ROW.get_or_init(|| {
        let start = Instant::now();
        let instances: Vec<MatchingInstance> = (0..10)
            .map(|s| set_instance(1, 1000, 15, 30, 0.0, s))
            .collect();
        let greedy = instances
            .par_iter()
            .map(|i| greedy_expansion(i).unwrap().cost)
            .collect();
        let run = |kind: OrderingKind| -> Vec<UctRun> {
            instances
                .par_iter()
                .enumerate()
                .map(|(i, inst)| {
                    let config = RunConfig {
                        rounds: Some(30_000),
                        seed: i as u64,
                        ..RunConfig::default()
                    };
                    let m = Method::Uct(Representation::Bt, kind);
                    uct_run(inst, format!("large-{i}-{m}"), m, &config, None)
                })
                .collect()
        };
        let bt_e = run(OrderingKind::Envy);
        let bt_r = run(OrderingKind::Random);
        LargeRow {
            greedy,
            bt_e,
            bt_r,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn c06_large_instance_ordering_effect() {
    let row = large_runs();
    let beats_greedy = row
        .bt_e
        .iter()
        .zip(&row.greedy)
        .filter(|(e, g)| e.cost <= **g)
        .count();
    let beats_random = row
        .bt_e
        .iter()
        .zip(&row.bt_r)
        .filter(|(e, r)| e.cost <= r.cost)
        .count();
    let pass = beats_greedy >= 8 && beats_random >= 7 && row.elapsed < Duration::from_secs(1800);
    let costs: Vec<(u64, u64, u64)> = row
        .bt_e
        .iter()
        .zip(&row.bt_r)
        .zip(&row.greedy)
        .map(|((e, r), g)| (e.cost, r.cost, *g))
        .collect();
    report(
        6,
        "H=15 B=30 ordering effect",
        pass,
        &format!(
            "BT-E <= Grdy on {beats_greedy}/10, BT-E <= BT-R on {beats_random}/10, (e, r, grdy) {costs:?}, {:.2?}",
            row.elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn c07_comparative_statics() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut violations = 0;
    for i in 0..100u64 {
        let inst = if i % 2 == 0 {
            tiny_instance(&mut rng, 12, 5, i % 4 == 0)
        } else {
            set_instance(2, 60, 6, 6, 0.3, 7000 + i)
        };
        let t = random_expansion(&mut rng, &inst);
        let t2 = random_superset(&mut rng, &inst, &t);
        assert!(t.dominated_by(&t2));
        let before = per_resident_ranks(&inst, &run_da(&inst, &t).unwrap());
        let after = per_resident_ranks(&inst, &run_da(&inst, &t2).unwrap());
        if before.iter().zip(&after).any(|(b, a)| a > b) {
            violations += 1;
        }
    }
    let pass = violations == 0;
    report(
        7,
        "comparative statics",
        pass,
        &format!("100 pairs, {violations} violations"),
    );
    assert!(pass);
}

fn all_uct_runs() -> Vec<&'static UctRun> {
    prop3_runs()
        .iter()
        .chain(&table2_runs().uct)
        .chain(&large_runs().bt_e)
        .chain(&large_runs().bt_r)
        .collect()
}

#[test]
fn c08_anytime_monotonicity() {
    let runs = all_uct_runs();
    let bad = runs
        .iter()
        .filter(|r| {
            r.trajectory
                .windows(2)
                .any(|w| w[1].incumbent_cost > w[0].incumbent_cost)
        })
        .count();
    let pass = bad == 0;
    report(
        8,
        "anytime monotonicity",
        pass,
        &format!("{} trajectories, {bad} non-monotone", runs.len()),
    );
    assert!(pass);
}

#[test]
fn c09_lph_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut bad = 0;
    let mut made = 0;
    let mut i = 0u64;
    while made < 50 {
        i += 1;
        let inst = if i.is_multiple_of(2) {
            tiny_instance(&mut rng, 8, 4, false)
        } else {
            set_instance(2, 40, 4, 4, 0.2, 9000 + i)
        };
        // the relaxation must route everyone
        let Ok(lph) = lp_heuristic(&inst) else {
            continue;
        };
        made += 1;
        let (_, optimum) = brute_force_optimal(&inst).unwrap();
        if lph.flow_cost > optimum as i64 || lph.cost < optimum {
            bad += 1;
        }
    }
    let pass = bad == 0;
    report(
        9,
        "LPH lower bound",
        pass,
        &format!("50 instances, {bad} violations"),
    );
    assert!(pass);
}

#[test]
fn c10_determinism() {
    let runs = all_uct_runs();
    let differing: Vec<&str> = runs
        .iter()
        .filter(|r| r.record != r.rerun_record)
        .map(|r| r.label.as_str())
        .collect();
    let pass = differing.is_empty();
    report(
        10,
        "determinism",
        pass,
        &format!("{} records, differing: {differing:?}", runs.len()),
    );
    assert!(pass);
}
