//! Resident-proposing deferred acceptance and the total-rank objective.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::instance::{ExpansionVector, Matching, MatchingInstance};

/// Runs resident-proposing deferred acceptance with capacities `q + t`.
///
/// The result is the resident-optimal stable matching, so it does not depend
/// on proposal order. Residents still propose in index order for reproducibility.
pub fn run_da(instance: &MatchingInstance, t: &ExpansionVector) -> Result<Matching> {
    if !t.is_feasible(instance) {
        return Err(Error::InfeasibleExpansion(t.0.clone()));
    }
    Ok(run_da_unchecked(instance, t.as_slice()))
}

pub(crate) fn run_da_unchecked(instance: &MatchingInstance, extras: &[u32]) -> Matching {
    let d_count = instance.num_residents();
    let h_count = instance.hospital_count();
    let capacity: Vec<usize> = instance
        .quotas()
        .iter()
        .zip(extras)
        .map(|(&q, &t)| (q + t) as usize)
        .collect();

    // Max-heap on hospital rank: the top is the worst tentatively held resident.
    let mut held: Vec<BinaryHeap<(u32, usize)>> = capacity
        .iter()
        .map(|&c| BinaryHeap::with_capacity(c.min(d_count)))
        .collect();
    let mut next_choice = vec![0usize; d_count];
    let mut assignment: Vec<Option<usize>> = vec![None; d_count];

    // Free residents are kept in a stack in reverse index order so that pops yield
    // the smallest index first.
    let mut free: Vec<usize> = (0..d_count).rev().collect();
    while let Some(d) = free.pop() {
        let prefs = instance.resident_prefs(d);
        let Some(&h) = prefs.get(next_choice[d]) else {
            continue; // exhausted list, stays unassigned
        };
        next_choice[d] += 1;
        let cap = capacity[h];
        if cap == 0 {
            free.push(d);
            continue;
        }
        let key = (instance.hospital_rank(h, d), d);
        let heap = &mut held[h];
        if heap.len() < cap {
            heap.push(key);
            assignment[d] = Some(h);
        } else {
            let worst = *heap.peek().expect("full heap is non-empty");
            if key < worst {
                heap.pop();
                heap.push(key);
                assignment[d] = Some(h);
                assignment[worst.1] = None;
                free.push(worst.1);
            } else {
                free.push(d);
            }
        }
    }
    Matching::from_assignment(assignment, h_count)
}

/// Total resident rank; unassigned residents cost `hospital_count + 1`.
pub fn total_cost(instance: &MatchingInstance, m: &Matching) -> u64 {
    per_resident_ranks(instance, m)
        .iter()
        .map(|&r| u64::from(r))
        .sum()
}

pub fn per_resident_ranks(instance: &MatchingInstance, m: &Matching) -> Vec<u32> {
    (0..instance.num_residents())
        .map(|d| match m.hospital_of(d) {
            Some(h) => instance.rank_or_unranked(d, h),
            None => instance.unassigned_rank(),
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StabilityReport {
    pub blocking_pairs: Vec<(usize, usize)>,
    pub stable: bool,
}

/// Enumerates every blocking pair of `m` under capacities `q + t`.
pub fn find_blocking_pairs(
    instance: &MatchingInstance,
    t: &ExpansionVector,
    m: &Matching,
) -> StabilityReport {
    let h_count = instance.hospital_count();
    // Worst (largest hospital rank) member per hospital, if any.
    let worst: Vec<Option<u32>> = (0..h_count)
        .map(|h| {
            m.roster(h)
                .iter()
                .map(|&d| instance.hospital_rank(h, d))
                .max()
        })
        .collect();
    let mut blocking = Vec::new();
    for d in 0..instance.num_residents() {
        let current = m.hospital_of(d).map(|h| instance.rank_or_unranked(d, h));
        for &h in instance.resident_prefs(d) {
            let r = instance.rank(d, h).expect("listed hospital has a rank");
            if current.is_some_and(|c| r >= c) {
                break;
            }
            let cap = (instance.quotas()[h] + t.0[h]) as usize;
            let open = m.roster(h).len() < cap;
            let prefers = worst[h].is_some_and(|w| instance.hospital_rank(h, d) < w);
            if open || prefers {
                blocking.push((d, h));
            }
        }
    }
    StabilityReport {
        stable: blocking.is_empty(),
        blocking_pairs: blocking,
    }
}
