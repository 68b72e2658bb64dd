//! Synthetic instance generators.
//!
//! Every generator is a pure function of its parameters and seed.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{complete_with_dummy, InstanceParts, MatchingInstance};

const REJECTION_LIMIT: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticParams {
    pub residents: usize,
    pub hospitals: usize,
    pub budget: u32,
    /// Weight of the common preference vector, in `[0, 1]`.
    pub alpha: f64,
    pub seed: u64,
}

fn check(p: &SyntheticParams) -> Result<()> {
    if p.hospitals == 0 || p.residents == 0 {
        return Err(Error::Parameter(
            "need at least one resident and one hospital".into(),
        ));
    }
    if p.hospitals > p.residents {
        return Err(Error::Parameter(format!(
            "hospitals ({}) must not exceed residents ({})",
            p.hospitals, p.residents
        )));
    }
    if !(0.0..=1.0).contains(&p.alpha) {
        return Err(Error::Parameter(format!("alpha out of range: {}", p.alpha)));
    }
    Ok(())
}

/// Uniform composition of `total` into `parts` positive integers.
fn composition(rng: &mut ChaCha8Rng, total: usize, parts: usize) -> Vec<u32> {
    let mut cuts: Vec<usize> = index::sample(rng, total - 1, parts - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        out.push((c - prev) as u32);
        prev = c;
    }
    out
}

fn uniform_orders(rng: &mut ChaCha8Rng, count: usize, len: usize) -> Vec<Vec<usize>> {
    (0..count)
        .map(|_| {
            let mut order: Vec<usize> = (0..len).collect();
            order.shuffle(rng);
            order
        })
        .collect()
}

/// Rankings from blended scores `(1 - alpha) * own + alpha * common`; the highest
/// score is ranked first, ties go to the smaller hospital id.
fn blended_rankings(
    rng: &mut ChaCha8Rng,
    residents: usize,
    hospitals: usize,
    alpha: f64,
) -> Vec<Vec<usize>> {
    let common: Vec<f64> = (0..hospitals).map(|_| rng.gen::<f64>()).collect();
    (0..residents)
        .map(|_| {
            let scores: Vec<f64> = common
                .iter()
                .map(|&c| (1.0 - alpha) * rng.gen::<f64>() + alpha * c)
                .collect();
            let mut order: Vec<usize> = (0..hospitals).collect();
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            order
        })
        .collect()
}

/// Set 1: positive quotas summing to the number of residents, complete
/// preferences on both sides, and `b_h = B` for every hospital.
pub fn generate_set1(params: &SyntheticParams) -> Result<MatchingInstance> {
    check(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    MatchingInstance::new(set1_parts(params, &mut rng))
}

fn set1_parts(p: &SyntheticParams, rng: &mut ChaCha8Rng) -> InstanceParts {
    let quotas = composition(rng, p.residents, p.hospitals);
    let hospital_prefs = uniform_orders(rng, p.hospitals, p.residents);
    let resident_prefs = blended_rankings(rng, p.residents, p.hospitals, p.alpha);
    InstanceParts {
        num_residents: p.residents,
        num_hospitals: p.hospitals,
        quotas,
        expansion_limits: vec![p.budget; p.hospitals],
        budget: p.budget,
        resident_prefs,
        hospital_prefs,
        dummy_hospital: false,
        seed: Some(p.seed),
    }
}

/// Set 2: as Set 1, with `b_h` uniform on `{0, .., B-1}` subject to
/// `B <= sum b < B * H` (rejection sampled).
pub fn generate_set2(params: &SyntheticParams) -> Result<MatchingInstance> {
    check(params)?;
    if params.budget < 2 {
        return Err(Error::Parameter(
            "set 2 needs a budget of at least 2".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut parts = set1_parts(params, &mut rng);
    let budget = u64::from(params.budget);
    let upper = budget * params.hospitals as u64;
    for _ in 0..REJECTION_LIMIT {
        let limits: Vec<u32> = (0..params.hospitals)
            .map(|_| rng.gen_range(0..params.budget))
            .collect();
        let sum: u64 = limits.iter().map(|&b| u64::from(b)).sum();
        if sum >= budget && sum < upper {
            parts.expansion_limits = limits;
            return MatchingInstance::new(parts);
        }
    }
    Err(Error::RejectionLimit(REJECTION_LIMIT))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartialParams {
    pub residents: usize,
    pub hospitals: usize,
    pub applications_per_resident: usize,
    /// Total seats `a_h = q_h + b_h` per hospital.
    pub capacities: Vec<u32>,
    pub budget: u32,
    pub seed: u64,
}

/// Splits capacities into base quotas summing to `min(D, sum a)` (largest
/// remainder, capped at `a_h`) and expansion limits `a_h - q_h`.
fn split_capacities(capacities: &[u32], residents: usize) -> (Vec<u32>, Vec<u32>) {
    let total: u64 = capacities.iter().map(|&a| u64::from(a)).sum();
    let target = (residents as u64).min(total);
    if total == 0 {
        return (vec![0; capacities.len()], vec![0; capacities.len()]);
    }
    let mut quotas: Vec<u64> = capacities
        .iter()
        .map(|&a| u64::from(a) * target / total)
        .collect();
    let mut order: Vec<usize> = (0..capacities.len()).collect();
    // remainder of a_h * target / total, largest first, then smaller id
    order.sort_by_key(|&h| {
        let rem = u64::from(capacities[h]) * target % total;
        (std::cmp::Reverse(rem), h)
    });
    let mut missing = target - quotas.iter().sum::<u64>();
    for &h in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        if quotas[h] < u64::from(capacities[h]) {
            quotas[h] += 1;
            missing -= 1;
        }
    }
    let quotas: Vec<u32> = quotas.into_iter().map(|q| q as u32).collect();
    let limits = capacities
        .iter()
        .zip(&quotas)
        .map(|(&a, &q)| a - q)
        .collect();
    (quotas, limits)
}

/// Partial preferences of fixed length, completed with a dummy hospital.
pub fn generate_partial(params: &PartialParams) -> Result<MatchingInstance> {
    let p = params;
    if p.residents == 0 || p.hospitals == 0 {
        return Err(Error::Parameter(
            "need at least one resident and one hospital".into(),
        ));
    }
    if p.applications_per_resident == 0 || p.applications_per_resident > p.hospitals {
        return Err(Error::Parameter(format!(
            "applications per resident must be in 1..={}, got {}",
            p.hospitals, p.applications_per_resident
        )));
    }
    if p.capacities.len() != p.hospitals {
        return Err(Error::Parameter(format!(
            "expected {} capacities, got {}",
            p.hospitals,
            p.capacities.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let resident_prefs: Vec<Vec<usize>> = (0..p.residents)
        .map(|_| {
            let mut chosen =
                index::sample(&mut rng, p.hospitals, p.applications_per_resident).into_vec();
            chosen.shuffle(&mut rng);
            chosen
        })
        .collect();
    let hospital_prefs = uniform_orders(&mut rng, p.hospitals, p.residents);
    let (quotas, expansion_limits) = split_capacities(&p.capacities, p.residents);
    let base = MatchingInstance::new(InstanceParts {
        num_residents: p.residents,
        num_hospitals: p.hospitals,
        quotas,
        expansion_limits,
        budget: p.budget,
        resident_prefs,
        hospital_prefs,
        dummy_hospital: false,
        seed: Some(p.seed),
    })?;
    complete_with_dummy(&base)
}

/// Capacities used when none are given: an even share of `D + B` seats.
pub fn default_capacities(residents: usize, hospitals: usize, budget: u32) -> Vec<u32> {
    let seats = residents as u64 + u64::from(budget);
    let each = seats.div_ceil(hospitals as u64);
    vec![each as u32; hospitals]
}
