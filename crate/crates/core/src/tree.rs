//! Hospital orderings and the tree representations of the expansion set.
//!
//! A node is identified by its path of edge labels from the root, which is
//! always the zero expansion.
//!
//! - Iterative: each edge adds one seat; label `l` means the `l`-th ordered
//!   hospital (1-based). Leaves sit at depth `B`.
//! - Ipt: as iterative, but labels along a path are nonincreasing, so every
//!   expansion with `sum = B` has exactly one path.
//! - Bt: the edge at depth `k` gives the seat count of the `(k+1)`-th ordered
//!   hospital. A path stops once the seats reach `B` or every hospital has a count.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::da::run_da_unchecked;
use crate::error::{Error, Result};
use crate::instance::{ExpansionVector, MatchingInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingKind {
    Random,
    Popularity,
    Envy,
}

impl OrderingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OrderingKind::Random => "random",
            OrderingKind::Popularity => "popularity",
            OrderingKind::Envy => "envy",
        }
    }
}

impl fmt::Display for OrderingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HospitalOrdering {
    pub kind: OrderingKind,
    /// Hospital ids, most important first; the dummy, if any, is last.
    pub permutation: Vec<usize>,
    pub seed: Option<u64>,
}

impl HospitalOrdering {
    pub fn identity(instance: &MatchingInstance) -> Self {
        Self {
            kind: OrderingKind::Popularity,
            permutation: (0..instance.hospital_count()).collect(),
            seed: None,
        }
    }
}

/// Borda-style popularity: sum of ranks over residents, smaller is more popular.
/// Hospitals a resident did not apply to count as `hospital_count + 1`.
pub fn popularity_scores(instance: &MatchingInstance) -> Vec<u64> {
    (0..instance.hospital_count())
        .map(|h| {
            (0..instance.num_residents())
                .map(|d| u64::from(instance.rank_or_unranked(d, h)))
                .sum()
        })
        .collect()
}

/// Number of residents who prefer `h` to their match under deferred acceptance
/// without expansion.
pub fn envy_scores(instance: &MatchingInstance) -> Vec<u64> {
    let base = run_da_unchecked(instance, instance.zero_expansion().as_slice());
    let current: Vec<u32> = (0..instance.num_residents())
        .map(|d| match base.hospital_of(d) {
            Some(h) => instance.rank_or_unranked(d, h),
            None => instance.unassigned_rank(),
        })
        .collect();
    (0..instance.hospital_count())
        .map(|h| {
            (0..instance.num_residents())
                .filter(|&d| instance.rank_or_unranked(d, h) < current[d])
                .count() as u64
        })
        .collect()
}

pub fn make_ordering(
    instance: &MatchingInstance,
    kind: OrderingKind,
    seed: u64,
) -> HospitalOrdering {
    let mut real: Vec<usize> = (0..instance.num_hospitals()).collect();
    let seed_used = match kind {
        OrderingKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            real.shuffle(&mut rng);
            Some(seed)
        }
        OrderingKind::Popularity => {
            let scores = popularity_scores(instance);
            real.sort_by_key(|&h| (scores[h], h));
            None
        }
        OrderingKind::Envy => {
            let scores = envy_scores(instance);
            real.sort_by_key(|&h| (std::cmp::Reverse(scores[h]), h));
            None
        }
    };
    real.extend(instance.dummy());
    HospitalOrdering {
        kind,
        permutation: real,
        seed: seed_used,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Iterative,
    Ipt,
    Bt,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Iterative => "iterative",
            Representation::Ipt => "ipt",
            Representation::Bt => "bt",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iterative" | "iter" => Ok(Representation::Iterative),
            "ipt" => Ok(Representation::Ipt),
            "bt" => Ok(Representation::Bt),
            other => Err(Error::Parameter(format!(
                "unknown representation {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreePath {
    pub representation: Representation,
    pub labels: Vec<u32>,
}

impl TreePath {
    pub fn root(representation: Representation) -> Self {
        Self {
            representation,
            labels: Vec::new(),
        }
    }

    pub fn child(&self, label: u32) -> Self {
        let mut labels = self.labels.clone();
        labels.push(label);
        Self {
            representation: self.representation,
            labels,
        }
    }
}

/// Incremental state of a node, carried while descending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeState {
    /// Seats per ordered position.
    extras: Vec<u32>,
    depth: usize,
    seats: u32,
    last_label: Option<u32>,
}

impl NodeState {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn seats(&self) -> u32 {
        self.seats
    }
}

/// A tree representation bound to one instance and ordering.
#[derive(Clone, Debug)]
pub struct ExpansionTree {
    representation: Representation,
    budget: u32,
    /// Expansion limits per ordered position (real hospitals only).
    limits: Vec<u32>,
    permutation: Vec<usize>,
    hospital_count: usize,
}

const LEAF_GUARD: u128 = 1_000_000;

impl ExpansionTree {
    pub fn new(
        instance: &MatchingInstance,
        ordering: &HospitalOrdering,
        representation: Representation,
    ) -> Self {
        let positions = &ordering.permutation[..instance.num_hospitals()];
        Self {
            representation,
            budget: instance.budget(),
            limits: positions
                .iter()
                .map(|&h| instance.expansion_limits()[h])
                .collect(),
            permutation: positions.to_vec(),
            hospital_count: instance.hospital_count(),
        }
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn root(&self) -> NodeState {
        NodeState {
            extras: vec![0; self.limits.len()],
            depth: 0,
            seats: 0,
            last_label: None,
        }
    }

    pub fn is_leaf(&self, state: &NodeState) -> bool {
        match self.representation {
            Representation::Iterative | Representation::Ipt => state.seats >= self.budget,
            Representation::Bt => state.seats >= self.budget || state.depth >= self.limits.len(),
        }
    }

    /// Edge labels of the children of `state`, ascending. Empty exactly at leaves.
    pub fn child_labels(&self, state: &NodeState) -> Vec<u32> {
        if self.is_leaf(state) {
            return Vec::new();
        }
        let remaining = self.budget - state.seats;
        match self.representation {
            Representation::Iterative => (0..self.limits.len())
                .filter(|&p| state.extras[p] < self.limits[p])
                .map(|p| p as u32 + 1)
                .collect(),
            Representation::Ipt => {
                let top = state.last_label.map_or(self.limits.len(), |l| l as usize);
                let mut labels = Vec::new();
                // Slack of positions up to p; a label is only offered if the
                // remaining seats still fit below it.
                let mut slack: u64 = 0;
                for p in 0..top {
                    slack += u64::from(self.limits[p] - state.extras[p]);
                    if state.extras[p] < self.limits[p] && slack >= u64::from(remaining) {
                        labels.push(p as u32 + 1);
                    }
                }
                labels
            }
            Representation::Bt => {
                let max = self.limits[state.depth].min(remaining);
                (0..=max).collect()
            }
        }
    }

    /// Applies edge `label` without checking it is a valid child.
    pub fn descend(&self, state: &mut NodeState, label: u32) {
        match self.representation {
            Representation::Iterative | Representation::Ipt => {
                state.extras[label as usize - 1] += 1;
                state.seats += 1;
            }
            Representation::Bt => {
                state.extras[state.depth] = label;
                state.seats += label;
            }
        }
        state.depth += 1;
        state.last_label = Some(label);
    }

    pub fn expansion(&self, state: &NodeState) -> ExpansionVector {
        let mut t = vec![0; self.hospital_count];
        for (p, &h) in self.permutation.iter().enumerate() {
            t[h] = state.extras[p];
        }
        ExpansionVector(t)
    }

    pub fn state_of(&self, path: &TreePath) -> Result<NodeState> {
        if path.representation != self.representation {
            return Err(Error::InvalidPath(format!(
                "path is for {}, tree is {}",
                path.representation, self.representation
            )));
        }
        let mut state = self.root();
        for &label in &path.labels {
            if !self.child_labels(&state).contains(&label) {
                return Err(Error::InvalidPath(format!(
                    "label {label} is not a child at depth {}",
                    state.depth
                )));
            }
            self.descend(&mut state, label);
        }
        Ok(state)
    }

    pub fn children(&self, path: &TreePath) -> Result<Vec<TreePath>> {
        let state = self.state_of(path)?;
        Ok(self
            .child_labels(&state)
            .into_iter()
            .map(|l| path.child(l))
            .collect())
    }

    pub fn node_to_expansion(&self, path: &TreePath) -> Result<ExpansionVector> {
        Ok(self.expansion(&self.state_of(path)?))
    }

    /// Number of leaves, or an error once the count passes `limit`.
    pub fn leaf_count(&self, limit: u128) -> Result<u128> {
        let mut count = 0u128;
        self.walk_leaves(&mut self.root(), &mut |_| {
            count += 1;
            count <= limit
        });
        if count > limit {
            return Err(Error::GuardExceeded {
                what: "tree leaves",
                size: count,
                limit,
            });
        }
        Ok(count)
    }

    /// Expansions of all leaves in depth-first order.
    pub fn enumerate_leaves(&self) -> Result<Vec<ExpansionVector>> {
        self.leaf_count(LEAF_GUARD)?;
        let mut out = Vec::new();
        self.walk_leaves(&mut self.root(), &mut |s| {
            out.push(self.expansion(s));
            true
        });
        Ok(out)
    }

    /// Leaf paths in depth-first order.
    pub fn enumerate_leaf_paths(&self) -> Result<Vec<TreePath>> {
        self.leaf_count(LEAF_GUARD)?;
        let mut out = Vec::new();
        let mut labels = Vec::new();
        self.walk_paths(&mut self.root(), &mut labels, &mut out);
        Ok(out)
    }

    fn walk_paths(&self, state: &mut NodeState, labels: &mut Vec<u32>, out: &mut Vec<TreePath>) {
        let children = self.child_labels(state);
        if children.is_empty() {
            out.push(TreePath {
                representation: self.representation,
                labels: labels.clone(),
            });
            return;
        }
        for l in children {
            let mut next = state.clone();
            self.descend(&mut next, l);
            labels.push(l);
            self.walk_paths(&mut next, labels, out);
            labels.pop();
        }
    }

    // Returns false once `visit` asks to stop.
    fn walk_leaves(
        &self,
        state: &mut NodeState,
        visit: &mut dyn FnMut(&NodeState) -> bool,
    ) -> bool {
        let children = self.child_labels(state);
        if children.is_empty() {
            return visit(state);
        }
        for l in children {
            let mut next = state.clone();
            self.descend(&mut next, l);
            if !self.walk_leaves(&mut next, visit) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::{i2, i2_parts};
    use crate::instance::InstanceParts;

    fn uniform(h: usize, b: u32, budget: u32) -> MatchingInstance {
        MatchingInstance::new(InstanceParts {
            num_residents: 1,
            num_hospitals: h,
            quotas: vec![1; h],
            expansion_limits: vec![b; h],
            budget,
            resident_prefs: vec![(0..h).collect()],
            hospital_prefs: vec![vec![0]; h],
            dummy_hospital: false,
            seed: None,
        })
        .unwrap()
    }

    fn tree(inst: &MatchingInstance, repr: Representation) -> ExpansionTree {
        ExpansionTree::new(inst, &HospitalOrdering::identity(inst), repr)
    }

    fn path(repr: Representation, labels: &[u32]) -> TreePath {
        TreePath {
            representation: repr,
            labels: labels.to_vec(),
        }
    }

    #[test]
    fn i2_scores_and_orderings() {
        let inst = i2();
        assert_eq!(popularity_scores(&inst), vec![2, 4]);
        assert_eq!(envy_scores(&inst), vec![1, 0]);
        assert_eq!(
            make_ordering(&inst, OrderingKind::Popularity, 0).permutation,
            vec![0, 1]
        );
        assert_eq!(
            make_ordering(&inst, OrderingKind::Envy, 0).permutation,
            vec![0, 1]
        );
        let mut p = i2_parts();
        p.quotas = vec![2, 1];
        assert_eq!(envy_scores(&MatchingInstance::new(p).unwrap()), vec![0, 0]);
    }

    #[test]
    fn shared_ranking_popularity_and_single_resident() {
        let inst = uniform(4, 1, 1);
        assert_eq!(popularity_scores(&inst), vec![1, 2, 3, 4]);
        assert_eq!(envy_scores(&inst), vec![0, 0, 0, 0]);
    }

    #[test]
    fn random_ordering_is_seeded() {
        let inst = uniform(8, 1, 1);
        let a = make_ordering(&inst, OrderingKind::Random, 42);
        let b = make_ordering(&inst, OrderingKind::Random, 42);
        assert_eq!(a, b);
        let mut sorted = a.permutation.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn dummy_is_ordered_last() {
        let inst = crate::instance::complete_with_dummy(&i2()).unwrap();
        for kind in [
            OrderingKind::Random,
            OrderingKind::Popularity,
            OrderingKind::Envy,
        ] {
            assert_eq!(
                *make_ordering(&inst, kind, 3).permutation.last().unwrap(),
                2
            );
        }
    }

    #[test]
    fn iterative_children_respect_limits() {
        let inst = uniform(3, 2, 3);
        let t = tree(&inst, Representation::Iterative);
        let kids = t
            .children(&path(Representation::Iterative, &[1, 3]))
            .unwrap();
        assert_eq!(kids.len(), 3);
        let p = path(Representation::Iterative, &[1, 3, 1]);
        assert_eq!(t.node_to_expansion(&p).unwrap().0, vec![2, 0, 1]);
        // t = (2,0,1) is a leaf at B = 3; with B = 4 only labels 2 and 3 remain
        let inst4 = uniform(3, 2, 4);
        let kids: Vec<u32> = tree(&inst4, Representation::Iterative)
            .children(&p)
            .unwrap()
            .iter()
            .map(|c| *c.labels.last().unwrap())
            .collect();
        assert_eq!(kids, vec![2, 3]);
    }

    #[test]
    fn ipt_children_are_nonincreasing() {
        let inst = uniform(3, 3, 5);
        let t = tree(&inst, Representation::Ipt);
        let kids: Vec<u32> = t
            .children(&path(Representation::Ipt, &[3, 2]))
            .unwrap()
            .iter()
            .map(|c| *c.labels.last().unwrap())
            .collect();
        assert_eq!(kids, vec![1, 2]);
        let p = path(Representation::Ipt, &[3, 2, 2, 2, 1]);
        assert_eq!(t.node_to_expansion(&p).unwrap().0, vec![1, 3, 1]);
        assert!(t.state_of(&path(Representation::Ipt, &[1, 3])).is_err());
    }

    #[test]
    fn ipt_skips_dead_end_labels() {
        // label 1 can only take 1 more seat, so from the root with B = 2 it
        // cannot be the first edge
        let mut p = uniform(2, 2, 2).into_parts();
        p.expansion_limits = vec![1, 2];
        let inst = MatchingInstance::new(p).unwrap();
        let t = tree(&inst, Representation::Ipt);
        assert_eq!(t.child_labels(&t.root()), vec![2]);
    }

    #[test]
    fn bt_children_and_expansion() {
        let inst = uniform(3, 9, 9);
        let t = tree(&inst, Representation::Bt);
        let kids: Vec<u32> = t
            .children(&path(Representation::Bt, &[5, 3]))
            .unwrap()
            .iter()
            .map(|c| *c.labels.last().unwrap())
            .collect();
        assert_eq!(kids, vec![0, 1]);
        let p = path(Representation::Bt, &[5, 3, 1]);
        assert_eq!(t.node_to_expansion(&p).unwrap().0, vec![5, 3, 1]);
        assert!(t.children(&p).unwrap().is_empty());
    }

    #[test]
    fn leaf_counts_small_case() {
        let inst = uniform(3, 2, 2);
        let ipt = tree(&inst, Representation::Ipt).enumerate_leaves().unwrap();
        assert_eq!(ipt.len(), 6);
        let iter = tree(&inst, Representation::Iterative)
            .enumerate_leaves()
            .unwrap();
        assert_eq!(iter.len(), 9);
        let mut distinct = iter.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 6);
        assert_eq!(iter.iter().filter(|t| t.0 == vec![1, 1, 0]).count(), 2);
        let bt = tree(&inst, Representation::Bt).enumerate_leaves().unwrap();
        assert_eq!(bt.len(), 10);
        let mut distinct = bt.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 10);
    }

    #[test]
    fn ordering_maps_labels_back() {
        let inst = uniform(3, 2, 2);
        let ordering = HospitalOrdering {
            kind: OrderingKind::Random,
            permutation: vec![2, 0, 1],
            seed: Some(0),
        };
        let t = ExpansionTree::new(&inst, &ordering, Representation::Bt);
        let p = path(Representation::Bt, &[2]);
        assert_eq!(t.node_to_expansion(&p).unwrap().0, vec![0, 0, 2]);
    }

    #[test]
    fn zero_budget_root_is_leaf() {
        let inst = uniform(3, 2, 0);
        for repr in [
            Representation::Iterative,
            Representation::Ipt,
            Representation::Bt,
        ] {
            let t = tree(&inst, repr);
            assert!(t.is_leaf(&t.root()));
            assert_eq!(t.leaf_count(10).unwrap(), 1);
        }
    }

    #[test]
    fn guard_is_enforced() {
        let inst = uniform(6, 6, 6);
        assert!(matches!(
            tree(&inst, Representation::Iterative).leaf_count(100),
            Err(Error::GuardExceeded { .. })
        ));
    }
}
