//! Exhaustive oracles for small instances.

use crate::da::{find_blocking_pairs, run_da_unchecked, total_cost};
use crate::error::{Error, Result};
use crate::instance::{ExpansionVector, Matching, MatchingInstance};

pub const THETA_GUARD: u128 = 10_000_000;
pub const STABLE_GUARD: u128 = 100_000;

/// Size of the feasible set: vectors with `t_h <= b_h` and `sum t <= B`.
pub fn theta_size(instance: &MatchingInstance) -> u128 {
    let budget = instance.budget() as usize;
    // ways[s] = number of prefixes using exactly s seats
    let mut ways = vec![0u128; budget + 1];
    ways[0] = 1;
    for &b in instance.expansion_limits() {
        let mut next = vec![0u128; budget + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for k in 0..=(b as usize).min(budget - s) {
                next[s + k] += w;
            }
        }
        ways = next;
    }
    ways.iter().sum()
}

/// Every feasible expansion, in lexicographic order.
pub fn enumerate_theta(instance: &MatchingInstance) -> Result<Vec<ExpansionVector>> {
    let size = theta_size(instance);
    if size > THETA_GUARD {
        return Err(Error::GuardExceeded {
            what: "expansion set",
            size,
            limit: THETA_GUARD,
        });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut current = vec![0u32; instance.hospital_count()];
    fill(instance, 0, instance.budget(), &mut current, &mut out);
    Ok(out)
}

fn fill(
    instance: &MatchingInstance,
    h: usize,
    remaining: u32,
    current: &mut Vec<u32>,
    out: &mut Vec<ExpansionVector>,
) {
    if h == current.len() {
        out.push(ExpansionVector(current.clone()));
        return;
    }
    for k in 0..=instance.expansion_limits()[h].min(remaining) {
        current[h] = k;
        fill(instance, h + 1, remaining - k, current, out);
    }
    current[h] = 0;
}

/// Minimum cost over the whole feasible set; ties go to the lexicographically
/// smallest expansion.
pub fn brute_force_optimal(instance: &MatchingInstance) -> Result<(ExpansionVector, u64)> {
    let mut best: Option<(ExpansionVector, u64)> = None;
    for t in enumerate_theta(instance)? {
        let cost = total_cost(instance, &run_da_unchecked(instance, t.as_slice()));
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((t, cost));
        }
    }
    Ok(best.expect("feasible set contains the zero vector"))
}

/// All stable matchings under capacities `q + t`, by exhaustive assignment.
pub fn enumerate_stable_matchings(
    instance: &MatchingInstance,
    t: &ExpansionVector,
) -> Result<Vec<Matching>> {
    let size: u128 = (0..instance.num_residents())
        .map(|d| instance.resident_prefs(d).len() as u128 + 1)
        .product();
    if size > STABLE_GUARD {
        return Err(Error::GuardExceeded {
            what: "assignments",
            size,
            limit: STABLE_GUARD,
        });
    }
    if !t.is_feasible(instance) {
        return Err(Error::InfeasibleExpansion(t.0.clone()));
    }
    let capacity: Vec<usize> = instance
        .quotas()
        .iter()
        .zip(t.as_slice())
        .map(|(&q, &x)| (q + x) as usize)
        .collect();
    let mut load = vec![0usize; instance.hospital_count()];
    let mut assignment = vec![None; instance.num_residents()];
    let mut out = Vec::new();
    assign(
        instance,
        t,
        0,
        &capacity,
        &mut load,
        &mut assignment,
        &mut out,
    );
    Ok(out)
}

fn assign(
    instance: &MatchingInstance,
    t: &ExpansionVector,
    d: usize,
    capacity: &[usize],
    load: &mut [usize],
    assignment: &mut Vec<Option<usize>>,
    out: &mut Vec<Matching>,
) {
    if d == assignment.len() {
        let m = Matching::from_assignment(assignment.clone(), capacity.len());
        if find_blocking_pairs(instance, t, &m).stable {
            out.push(m);
        }
        return;
    }
    assignment[d] = None;
    assign(instance, t, d + 1, capacity, load, assignment, out);
    for &h in instance.resident_prefs(d) {
        if load[h] < capacity[h] {
            load[h] += 1;
            assignment[d] = Some(h);
            assign(instance, t, d + 1, capacity, load, assignment, out);
            load[h] -= 1;
        }
    }
    assignment[d] = None;
}
