#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use stable_expand::{ExpansionVector, InstanceParts, MatchingInstance};

/// Random small instance. With `partial`, residents rank a random non-empty subset.
pub fn tiny_instance<R: Rng>(
    rng: &mut R,
    max_d: usize,
    max_h: usize,
    partial: bool,
) -> MatchingInstance {
    let d_count = rng.gen_range(1..=max_d);
    let h_count = rng.gen_range(1..=max_h);
    let resident_prefs = (0..d_count)
        .map(|_| {
            let mut order: Vec<usize> = (0..h_count).collect();
            order.shuffle(rng);
            if partial {
                let keep = rng.gen_range(1..=h_count);
                order.truncate(keep);
            }
            order
        })
        .collect();
    let hospital_prefs = (0..h_count)
        .map(|_| {
            let mut order: Vec<usize> = (0..d_count).collect();
            order.shuffle(rng);
            order
        })
        .collect();
    let quotas: Vec<u32> = (0..h_count).map(|_| rng.gen_range(0..=2)).collect();
    let expansion_limits: Vec<u32> = (0..h_count).map(|_| rng.gen_range(0..=2)).collect();
    let limit_sum: u32 = expansion_limits.iter().sum();
    let budget = rng.gen_range(0..=limit_sum);
    MatchingInstance::new(InstanceParts {
        num_residents: d_count,
        num_hospitals: h_count,
        quotas,
        expansion_limits,
        budget,
        resident_prefs,
        hospital_prefs,
        dummy_hospital: false,
        seed: None,
    })
    .unwrap()
}

/// Random member of the feasible set, built by placing seats one at a time.
pub fn random_expansion<R: Rng>(rng: &mut R, instance: &MatchingInstance) -> ExpansionVector {
    let mut t = instance.zero_expansion();
    let seats = rng.gen_range(0..=instance.budget());
    for _ in 0..seats {
        let open: Vec<usize> = (0..instance.hospital_count())
            .filter(|&h| t.0[h] < instance.expansion_limits()[h])
            .collect();
        if open.is_empty() {
            break;
        }
        t.0[*open.choose(rng).unwrap()] += 1;
    }
    t
}

/// Random `t' >= t` still in the feasible set.
pub fn random_superset<R: Rng>(
    rng: &mut R,
    instance: &MatchingInstance,
    t: &ExpansionVector,
) -> ExpansionVector {
    let mut out = t.clone();
    let room = instance.budget() as u64 - t.total();
    let seats = rng.gen_range(0..=room);
    for _ in 0..seats {
        let open: Vec<usize> = (0..instance.hospital_count())
            .filter(|&h| out.0[h] < instance.expansion_limits()[h])
            .collect();
        if open.is_empty() {
            break;
        }
        out.0[*open.choose(rng).unwrap()] += 1;
    }
    out
}

/// Number of distinct orderings of the multiset of seats in `t`.
pub fn multinomial(t: &[u32]) -> u128 {
    let fact = |n: u32| (1..=u128::from(n)).product::<u128>();
    let total: u32 = t.iter().sum();
    t.iter().fold(fact(total), |acc, &k| acc / fact(k))
}

/// All vectors with `t_h <= b_h` and `sum t <= budget`, by nested counting
/// independent of the library enumeration.
pub fn theta_by_counting(limits: &[u32], budget: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let total: u64 = limits.iter().map(|&b| u64::from(b) + 1).product();
    for mut code in 0..total {
        let mut t = Vec::with_capacity(limits.len());
        for &b in limits {
            t.push((code % (u64::from(b) + 1)) as u32);
            code /= u64::from(b) + 1;
        }
        if t.iter().sum::<u32>() <= budget {
            out.push(t);
        }
    }
    out.sort();
    out
}
