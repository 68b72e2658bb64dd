//! Greedy and min-cost-flow baselines.

use crate::da::{run_da_unchecked, total_cost};
use crate::error::{Error, Result};
use crate::flow::{min_cost_flow, FlowNetwork};
use crate::instance::{ExpansionVector, Matching, MatchingInstance};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaselineOutcome {
    pub expansion: ExpansionVector,
    pub matching: Matching,
    pub cost: u64,
}

fn check_budget(instance: &MatchingInstance) -> Result<()> {
    if u64::from(instance.budget()) > instance.limit_sum() {
        return Err(Error::InfeasibleBudget {
            budget: instance.budget(),
            limit_sum: instance.limit_sum(),
        });
    }
    Ok(())
}

/// Spends the budget one seat at a time, each time on the hospital whose extra
/// seat gives the lowest cost (smallest id on ties). Always spends all `B` seats.
pub fn greedy_expansion(instance: &MatchingInstance) -> Result<BaselineOutcome> {
    check_budget(instance)?;
    let mut t = instance.zero_expansion();
    for _ in 0..instance.budget() {
        let mut best: Option<(u64, usize)> = None;
        for h in 0..instance.hospital_count() {
            if t.0[h] >= instance.expansion_limits()[h] {
                continue;
            }
            t.0[h] += 1;
            let cost = total_cost(instance, &run_da_unchecked(instance, t.as_slice()));
            t.0[h] -= 1;
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, h));
            }
        }
        let (_, h) = best.expect("budget below limit sum leaves a hospital with room");
        t.0[h] += 1;
    }
    let matching = run_da_unchecked(instance, t.as_slice());
    let cost = total_cost(instance, &matching);
    Ok(BaselineOutcome {
        expansion: t,
        matching,
        cost,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LphOutcome {
    pub expansion: ExpansionVector,
    pub matching: Matching,
    pub cost: u64,
    /// Objective of the flow relaxation; a lower bound on any stable cost.
    pub flow_cost: i64,
}

/// Network for the flow relaxation plus the arc ids of the per-hospital budget arcs.
pub fn lph_network(instance: &MatchingInstance) -> (FlowNetwork, Vec<usize>) {
    let d_count = instance.num_residents();
    let h_count = instance.hospital_count();
    let source = 0;
    let resident = |d: usize| 1 + d;
    let hospital = |h: usize| 1 + d_count + h;
    let pool = 1 + d_count + h_count;
    let sink = pool + 1;
    let mut net = FlowNetwork::new(sink + 1, source, sink);
    for d in 0..d_count {
        net.add_arc(source, resident(d), 1, 0);
        for &h in instance.resident_prefs(d) {
            let rank = instance.rank(d, h).expect("listed hospital has a rank");
            net.add_arc(resident(d), hospital(h), 1, i64::from(rank));
        }
    }
    let mut budget_arcs = Vec::with_capacity(h_count);
    for h in 0..h_count {
        net.add_arc(hospital(h), sink, i64::from(instance.quotas()[h]), 0);
        budget_arcs.push(net.add_arc(
            hospital(h),
            pool,
            i64::from(instance.expansion_limits()[h]),
            0,
        ));
    }
    net.add_arc(pool, sink, i64::from(instance.budget()), 0);
    (net, budget_arcs)
}

/// Fixes the expansion from a min-cost assignment that ignores stability, then
/// runs deferred acceptance under it.
pub fn lp_heuristic(instance: &MatchingInstance) -> Result<LphOutcome> {
    check_budget(instance)?;
    let (net, budget_arcs) = lph_network(instance);
    let solution = min_cost_flow(&net, instance.num_residents() as i64)?;
    let t = ExpansionVector(
        budget_arcs
            .iter()
            .map(|&a| solution.flows[a] as u32)
            .collect(),
    );
    let matching = run_da_unchecked(instance, t.as_slice());
    let cost = total_cost(instance, &matching);
    Ok(LphOutcome {
        expansion: t,
        matching,
        cost,
        flow_cost: solution.cost,
    })
}
