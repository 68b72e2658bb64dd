//! Upper-confidence tree search over expansion vectors.
//!
//! Each round selects down the developed tree by maximum UCB, adds the first
//! node outside it, rolls out uniformly at random to a leaf, evaluates the leaf
//! with deferred acceptance and backpropagates the reward. Nodes whose whole
//! subtree has been evaluated are marked and never entered again, so a search
//! with at least as many rounds as the tree has leaves is exhaustive.

use std::collections::HashMap;
use std::io::{self, Write};
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::da::{run_da_unchecked, total_cost};
use crate::error::{Error, Result};
use crate::instance::{ExpansionVector, Matching, MatchingInstance};
use crate::tree::{
    make_ordering, ExpansionTree, HospitalOrdering, NodeState, OrderingKind, Representation,
    TreePath,
};

/// Default exploration constant, `sqrt(0.002)`.
pub fn default_exploration() -> f64 {
    0.002f64.sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub rounds: u64,
    pub exploration: f64,
    pub representation: Representation,
    pub ordering: OrderingKind,
    pub seed: u64,
    /// Wall-clock cap; `None` runs all rounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit: Option<Duration>,
}

impl SearchConfig {
    /// `B * 1000` rounds with the default exploration constant.
    pub fn for_instance(
        instance: &MatchingInstance,
        representation: Representation,
        ordering: OrderingKind,
        seed: u64,
    ) -> Self {
        Self {
            rounds: u64::from(instance.budget()).max(1) * 1000,
            exploration: default_exploration(),
            representation,
            ordering,
            seed,
            time_limit: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub round: u64,
    pub incumbent_cost: u64,
    pub da_evaluations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_expansion: ExpansionVector,
    pub best_cost: u64,
    pub best_matching: Matching,
    pub trajectory: Vec<TrajectoryPoint>,
    pub terminated_exhaustively: bool,
    pub ordering: HospitalOrdering,
    pub da_evaluations: u64,
}

pub fn write_trajectory_csv<W: Write>(
    trajectory: &[TrajectoryPoint],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "round,incumbent_cost,da_evaluations")?;
    for p in trajectory {
        writeln!(out, "{},{},{}", p.round, p.incumbent_cost, p.da_evaluations)?;
    }
    Ok(())
}

/// `mean + cp * sqrt(ln(parent_visits) / visits)`, or `+inf` for an unvisited child.
pub fn ucb_value(value_sum: f64, visits: u64, parent_visits: u64, exploration: f64) -> f64 {
    if visits == 0 {
        return f64::INFINITY;
    }
    let n = visits as f64;
    value_sum / n + exploration * ((parent_visits as f64).ln() / n).sqrt()
}

/// Relative improvement over the unexpanded cost, in `[0, 1)`.
pub fn reward(cost: u64, baseline_cost: u64) -> Result<f64> {
    if baseline_cost == 0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((baseline_cost as f64 - cost as f64) / baseline_cost as f64)
}

pub type NodeId = u32;
const NONE: NodeId = NodeId::MAX;
pub const ROOT: NodeId = 0;

#[derive(Clone, Debug)]
struct Node {
    parent: NodeId,
    label: u32,
    value_sum: f64,
    visits: u64,
    in_tree: bool,
    evaluated: bool,
    child_count: u32,
    evaluated_children: u32,
    /// Indexed like `ExpansionTree::child_labels`; empty until a child is materialized.
    children: Vec<NodeId>,
}

impl Node {
    fn new(parent: NodeId, label: u32, child_count: u32) -> Self {
        Self {
            parent,
            label,
            value_sum: 0.0,
            visits: 0,
            in_tree: false,
            evaluated: false,
            child_count,
            evaluated_children: 0,
            children: Vec::new(),
        }
    }
}

/// Statistics of one node, for inspection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeStats {
    pub value_sum: f64,
    pub visits: u64,
    pub in_tree: bool,
    pub evaluated: bool,
}

/// What happened in one round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundLog {
    /// Root to the developed node, inclusive; these nodes received the reward.
    pub selection: Vec<NodeId>,
    pub leaf: ExpansionVector,
    pub leaf_cost: u64,
    pub reward: f64,
    /// False when the leaf's cost came from the cache.
    pub new_evaluation: bool,
}

pub struct UctSearch<'a> {
    instance: &'a MatchingInstance,
    config: SearchConfig,
    ordering: HospitalOrdering,
    tree: ExpansionTree,
    nodes: Vec<Node>,
    cache: HashMap<ExpansionVector, u64>,
    rng: ChaCha8Rng,
    baseline_cost: u64,
    best_expansion: ExpansionVector,
    best_cost: u64,
    best_matching: Matching,
    da_evaluations: u64,
    round: u64,
    trajectory: Vec<TrajectoryPoint>,
}

impl<'a> UctSearch<'a> {
    pub fn new(instance: &'a MatchingInstance, config: SearchConfig) -> Result<Self> {
        if config.rounds == 0 {
            return Err(Error::Parameter("rounds must be at least 1".into()));
        }
        if !(config.exploration >= 0.0 && config.exploration.is_finite()) {
            return Err(Error::Parameter(format!(
                "exploration must be finite and non-negative, got {}",
                config.exploration
            )));
        }
        if u64::from(instance.budget()) > instance.limit_sum() {
            return Err(Error::InfeasibleBudget {
                budget: instance.budget(),
                limit_sum: instance.limit_sum(),
            });
        }
        let ordering = make_ordering(instance, config.ordering, config.seed);
        let tree = ExpansionTree::new(instance, &ordering, config.representation);

        let zero = instance.zero_expansion();
        let base = run_da_unchecked(instance, zero.as_slice());
        let baseline_cost = total_cost(instance, &base);
        if baseline_cost == 0 {
            return Err(Error::ZeroBaseline);
        }
        let mut cache = HashMap::new();
        cache.insert(zero.clone(), baseline_cost);

        let root_state = tree.root();
        let mut root = Node::new(NONE, 0, tree.child_labels(&root_state).len() as u32);
        root.in_tree = true;
        root.evaluated = tree.is_leaf(&root_state);

        Ok(Self {
            instance,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            ordering,
            tree,
            nodes: vec![root],
            cache,
            baseline_cost,
            best_expansion: zero,
            best_cost: baseline_cost,
            best_matching: base,
            da_evaluations: 1,
            round: 0,
            trajectory: Vec::new(),
        })
    }

    pub fn is_exhausted(&self) -> bool {
        self.nodes[ROOT as usize].evaluated
    }

    pub fn rounds_run(&self) -> u64 {
        self.round
    }

    pub fn baseline_cost(&self) -> u64 {
        self.baseline_cost
    }

    pub fn best_cost(&self) -> u64 {
        self.best_cost
    }

    pub fn ordering(&self) -> &HospitalOrdering {
        &self.ordering
    }

    pub fn tree(&self) -> &ExpansionTree {
        &self.tree
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_stats(&self, id: NodeId) -> NodeStats {
        let n = &self.nodes[id as usize];
        NodeStats {
            value_sum: n.value_sum,
            visits: n.visits,
            in_tree: n.in_tree,
            evaluated: n.evaluated,
        }
    }

    pub fn node_path(&self, id: NodeId) -> TreePath {
        let mut labels = Vec::new();
        let mut cur = id;
        while cur != ROOT {
            let n = &self.nodes[cur as usize];
            labels.push(n.label);
            cur = n.parent;
        }
        labels.reverse();
        TreePath {
            representation: self.tree.representation(),
            labels,
        }
    }

    pub fn cached_cost(&self, t: &ExpansionVector) -> Option<u64> {
        self.cache.get(t).copied()
    }

    fn child(&mut self, parent: NodeId, index: usize, label: u32, state: &NodeState) -> NodeId {
        let p = parent as usize;
        if self.nodes[p].children.is_empty() {
            let count = self.nodes[p].child_count as usize;
            self.nodes[p].children = vec![NONE; count];
        }
        let existing = self.nodes[p].children[index];
        if existing != NONE {
            return existing;
        }
        let id = self.nodes.len() as NodeId;
        let count = self.tree.child_labels(state).len() as u32;
        self.nodes.push(Node::new(parent, label, count));
        self.nodes[p].children[index] = id;
        id
    }

    fn child_evaluated(&self, parent: NodeId, index: usize) -> bool {
        let n = &self.nodes[parent as usize];
        n.children
            .get(index)
            .is_some_and(|&c| c != NONE && self.nodes[c as usize].evaluated)
    }

    fn pick(&mut self, candidates: &[usize]) -> usize {
        if candidates.len() == 1 {
            candidates[0]
        } else {
            candidates[self.rng.gen_range(0..candidates.len())]
        }
    }

    fn select_child(&mut self, parent: NodeId, child_count: usize) -> usize {
        let parent_visits = self.nodes[parent as usize].visits;
        let mut best = f64::NEG_INFINITY;
        let mut ties: Vec<usize> = Vec::new();
        for i in 0..child_count {
            if self.child_evaluated(parent, i) {
                continue;
            }
            let (value_sum, visits) = match self.nodes[parent as usize].children.get(i) {
                Some(&c) if c != NONE => {
                    let n = &self.nodes[c as usize];
                    (n.value_sum, n.visits)
                }
                _ => (0.0, 0),
            };
            let u = ucb_value(value_sum, visits, parent_visits, self.config.exploration);
            if u > best {
                best = u;
                ties.clear();
                ties.push(i);
            } else if u == best {
                ties.push(i);
            }
        }
        assert!(
            !ties.is_empty(),
            "unevaluated node has an unevaluated child"
        );
        self.pick(&ties)
    }

    fn evaluate(&mut self, t: ExpansionVector) -> (u64, bool) {
        if let Some(&cost) = self.cache.get(&t) {
            return (cost, false);
        }
        let matching = run_da_unchecked(self.instance, t.as_slice());
        let cost = total_cost(self.instance, &matching);
        self.da_evaluations += 1;
        if cost < self.best_cost {
            self.best_cost = cost;
            self.best_expansion = t.clone();
            self.best_matching = matching;
        }
        self.cache.insert(t, cost);
        (cost, true)
    }

    fn mark_evaluated(&mut self, leaf: NodeId) {
        let mut cur = leaf;
        if self.nodes[cur as usize].evaluated {
            return;
        }
        self.nodes[cur as usize].evaluated = true;
        while cur != ROOT {
            let parent = self.nodes[cur as usize].parent as usize;
            let p = &mut self.nodes[parent];
            p.evaluated_children += 1;
            if p.evaluated_children < p.child_count {
                break;
            }
            p.evaluated = true;
            cur = parent as NodeId;
        }
    }

    /// Runs one round; `None` once every leaf has been evaluated.
    pub fn run_round(&mut self) -> Option<RoundLog> {
        if self.is_exhausted() {
            return None;
        }
        let mut state = self.tree.root();
        let mut cur = ROOT;
        let mut selection = vec![ROOT];

        // Selection and development.
        loop {
            let labels = self.tree.child_labels(&state);
            let index = self.select_child(cur, labels.len());
            self.tree.descend(&mut state, labels[index]);
            cur = self.child(cur, index, labels[index], &state);
            selection.push(cur);
            if !self.nodes[cur as usize].in_tree {
                self.nodes[cur as usize].in_tree = true;
                break;
            }
        }

        // Simulation: uniform random unevaluated children down to a leaf.
        let mut leaf = cur;
        loop {
            let labels = self.tree.child_labels(&state);
            if labels.is_empty() {
                break;
            }
            let open: Vec<usize> = (0..labels.len())
                .filter(|&i| !self.child_evaluated(leaf, i))
                .collect();
            let index = self.pick(&open);
            self.tree.descend(&mut state, labels[index]);
            leaf = self.child(leaf, index, labels[index], &state);
        }
        let t = self.tree.expansion(&state);
        let (cost, new_evaluation) = self.evaluate(t.clone());
        self.mark_evaluated(leaf);

        let value = reward(cost, self.baseline_cost).expect("baseline is positive");
        for &id in &selection {
            let n = &mut self.nodes[id as usize];
            n.value_sum += value;
            n.visits += 1;
        }

        self.round += 1;
        self.trajectory.push(TrajectoryPoint {
            round: self.round,
            incumbent_cost: self.best_cost,
            da_evaluations: self.da_evaluations,
        });
        Some(RoundLog {
            selection,
            leaf: t,
            leaf_cost: cost,
            reward: value,
            new_evaluation,
        })
    }

    pub fn finish(self) -> SearchResult {
        SearchResult {
            terminated_exhaustively: self.is_exhausted(),
            best_expansion: self.best_expansion,
            best_cost: self.best_cost,
            best_matching: self.best_matching,
            trajectory: self.trajectory,
            ordering: self.ordering,
            da_evaluations: self.da_evaluations,
        }
    }
}

/// Runs up to `config.rounds` rounds, stopping early when the tree is exhausted
/// or the time limit passes.
pub fn search(instance: &MatchingInstance, config: &SearchConfig) -> Result<SearchResult> {
    let start = Instant::now();
    let mut uct = UctSearch::new(instance, config.clone())?;
    for _ in 0..config.rounds {
        if uct.run_round().is_none() {
            break;
        }
        if config
            .time_limit
            .is_some_and(|limit| start.elapsed() >= limit)
        {
            break;
        }
    }
    Ok(uct.finish())
}
