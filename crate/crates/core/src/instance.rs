//! Problem instances, expansion vectors and matchings.
//!
//! Hospital and resident ids are 0-based in memory. The JSON document format
//! uses 1-based ids; conversion happens only in [`load_instance`] and
//! [`save_instance`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw instance data. May violate invariants; see [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceParts {
    pub num_residents: usize,
    /// Real hospitals only; a dummy, when present, is stored at index `num_hospitals`.
    pub num_hospitals: usize,
    pub quotas: Vec<u32>,
    pub expansion_limits: Vec<u32>,
    pub budget: u32,
    /// Most-preferred first, may be partial.
    pub resident_prefs: Vec<Vec<usize>>,
    /// Most-preferred first, must be a permutation of all residents.
    pub hospital_prefs: Vec<Vec<usize>>,
    pub dummy_hospital: bool,
    pub seed: Option<u64>,
}

impl InstanceParts {
    /// Number of hospital slots including the dummy.
    pub fn hospital_count(&self) -> usize {
        self.num_hospitals + usize::from(self.dummy_hospital)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoResidents,
    NoHospitals,
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    EmptyRanking {
        resident: usize,
    },
    HospitalOutOfRange {
        resident: usize,
        hospital: usize,
    },
    DuplicateRankEntry {
        resident: usize,
        hospital: usize,
    },
    ResidentOutOfRange {
        hospital: usize,
        resident: usize,
    },
    DuplicateResident {
        hospital: usize,
        resident: usize,
    },
    IncompleteHospitalOrder {
        hospital: usize,
        len: usize,
    },
    DummyQuota {
        quota: u32,
    },
    DummyExpansion {
        limit: u32,
    },
    BudgetExceedsLimits {
        budget: u32,
        limit_sum: u64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // ids are reported 1-based, like the file format
        match self {
            Violation::NoResidents => write!(f, "no residents"),
            Violation::NoHospitals => write!(f, "no hospitals"),
            Violation::LengthMismatch {
                field,
                expected,
                found,
            } => {
                write!(f, "{field} has length {found}, expected {expected}")
            }
            Violation::EmptyRanking { resident } => {
                write!(f, "resident {} ranks no hospital", resident + 1)
            }
            Violation::HospitalOutOfRange { resident, hospital } => write!(
                f,
                "resident {} ranks unknown hospital {}",
                resident + 1,
                hospital + 1
            ),
            Violation::DuplicateRankEntry { resident, hospital } => write!(
                f,
                "duplicate rank entry: resident {} ranks hospital {} twice",
                resident + 1,
                hospital + 1
            ),
            Violation::ResidentOutOfRange { hospital, resident } => write!(
                f,
                "hospital {} ranks unknown resident {}",
                hospital + 1,
                resident + 1
            ),
            Violation::DuplicateResident { hospital, resident } => write!(
                f,
                "hospital {} ranks resident {} twice",
                hospital + 1,
                resident + 1
            ),
            Violation::IncompleteHospitalOrder { hospital, len } => write!(
                f,
                "hospital {} ranks {len} residents, not all of them",
                hospital + 1
            ),
            Violation::DummyQuota { quota } => {
                write!(
                    f,
                    "dummy hospital quota {quota} is below the number of residents"
                )
            }
            Violation::DummyExpansion { limit } => {
                write!(f, "dummy hospital has expansion limit {limit}, expected 0")
            }
            Violation::BudgetExceedsLimits { budget, limit_sum } => {
                write!(f, "B > Σ b_h ({budget} > {limit_sum})")
            }
        }
    }
}

/// List of violated invariants; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate(parts: &InstanceParts) -> ValidationReport {
    let mut out = Vec::new();
    let d_count = parts.num_residents;
    let h_count = parts.hospital_count();
    if d_count == 0 {
        out.push(Violation::NoResidents);
    }
    if parts.num_hospitals == 0 {
        out.push(Violation::NoHospitals);
    }
    let lengths = [
        ("quotas", parts.quotas.len(), h_count),
        ("expansion_limits", parts.expansion_limits.len(), h_count),
        ("resident_prefs", parts.resident_prefs.len(), d_count),
        ("hospital_prefs", parts.hospital_prefs.len(), h_count),
    ];
    for (field, found, expected) in lengths {
        if found != expected {
            out.push(Violation::LengthMismatch {
                field,
                expected,
                found,
            });
        }
    }

    let mut seen = vec![false; h_count];
    for (d, prefs) in parts.resident_prefs.iter().enumerate() {
        if prefs.is_empty() {
            out.push(Violation::EmptyRanking { resident: d });
        }
        seen.iter_mut().for_each(|s| *s = false);
        for &h in prefs {
            if h >= h_count {
                out.push(Violation::HospitalOutOfRange {
                    resident: d,
                    hospital: h,
                });
            } else if std::mem::replace(&mut seen[h], true) {
                out.push(Violation::DuplicateRankEntry {
                    resident: d,
                    hospital: h,
                });
            }
        }
    }

    let mut seen = vec![false; d_count];
    for (h, order) in parts.hospital_prefs.iter().enumerate() {
        seen.iter_mut().for_each(|s| *s = false);
        let mut ok = true;
        for &d in order {
            if d >= d_count {
                out.push(Violation::ResidentOutOfRange {
                    hospital: h,
                    resident: d,
                });
                ok = false;
            } else if std::mem::replace(&mut seen[d], true) {
                out.push(Violation::DuplicateResident {
                    hospital: h,
                    resident: d,
                });
                ok = false;
            }
        }
        if ok && order.len() != d_count {
            out.push(Violation::IncompleteHospitalOrder {
                hospital: h,
                len: order.len(),
            });
        }
    }

    if parts.dummy_hospital {
        let dummy = parts.num_hospitals;
        if let Some(&q) = parts.quotas.get(dummy) {
            if (q as usize) < d_count {
                out.push(Violation::DummyQuota { quota: q });
            }
        }
        if let Some(&b) = parts.expansion_limits.get(dummy) {
            if b != 0 {
                out.push(Violation::DummyExpansion { limit: b });
            }
        }
    }

    let limit_sum: u64 = parts.expansion_limits.iter().map(|&b| u64::from(b)).sum();
    if u64::from(parts.budget) > limit_sum {
        out.push(Violation::BudgetExceedsLimits {
            budget: parts.budget,
            limit_sum,
        });
    }

    ValidationReport { violations: out }
}

/// A validated instance with rank lookup tables.
///
/// Immutable after construction and `Sync`, so concurrent searches can share it.
#[derive(Clone, Debug)]
pub struct MatchingInstance {
    parts: InstanceParts,
    /// `resident_rank[d * h_count + h]`, 1-based, 0 when `h` is not applicable for `d`.
    resident_rank: Vec<u32>,
    /// `hospital_rank[h * d_count + d]`, 0-based position in hospital order.
    hospital_rank: Vec<u32>,
}

impl PartialEq for MatchingInstance {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl Eq for MatchingInstance {}

impl MatchingInstance {
    pub fn new(parts: InstanceParts) -> Result<Self> {
        let report = validate(&parts);
        if !report.is_valid() {
            return Err(Error::Invalid(report));
        }
        let d_count = parts.num_residents;
        let h_count = parts.hospital_count();
        let mut resident_rank = vec![0u32; d_count * h_count];
        for (d, prefs) in parts.resident_prefs.iter().enumerate() {
            for (pos, &h) in prefs.iter().enumerate() {
                resident_rank[d * h_count + h] = pos as u32 + 1;
            }
        }
        let mut hospital_rank = vec![0u32; h_count * d_count];
        for (h, order) in parts.hospital_prefs.iter().enumerate() {
            for (pos, &d) in order.iter().enumerate() {
                hospital_rank[h * d_count + d] = pos as u32;
            }
        }
        Ok(Self {
            parts,
            resident_rank,
            hospital_rank,
        })
    }

    pub fn parts(&self) -> &InstanceParts {
        &self.parts
    }

    pub fn into_parts(self) -> InstanceParts {
        self.parts
    }

    pub fn num_residents(&self) -> usize {
        self.parts.num_residents
    }

    /// Real hospitals, excluding the dummy.
    pub fn num_hospitals(&self) -> usize {
        self.parts.num_hospitals
    }

    /// All hospital slots, including the dummy.
    pub fn hospital_count(&self) -> usize {
        self.parts.hospital_count()
    }

    pub fn has_dummy(&self) -> bool {
        self.parts.dummy_hospital
    }

    pub fn dummy(&self) -> Option<usize> {
        self.parts
            .dummy_hospital
            .then_some(self.parts.num_hospitals)
    }

    pub fn quotas(&self) -> &[u32] {
        &self.parts.quotas
    }

    pub fn expansion_limits(&self) -> &[u32] {
        &self.parts.expansion_limits
    }

    pub fn budget(&self) -> u32 {
        self.parts.budget
    }

    pub fn seed(&self) -> Option<u64> {
        self.parts.seed
    }

    pub fn resident_prefs(&self, d: usize) -> &[usize] {
        &self.parts.resident_prefs[d]
    }

    pub fn hospital_prefs(&self, h: usize) -> &[usize] {
        &self.parts.hospital_prefs[h]
    }

    /// 1-based rank of `h` for resident `d`, `None` if `d` did not apply to `h`.
    pub fn rank(&self, d: usize, h: usize) -> Option<u32> {
        match self.resident_rank[d * self.hospital_count() + h] {
            0 => None,
            r => Some(r),
        }
    }

    /// Cost charged for an unassigned resident (and for unranked hospitals in scores).
    pub fn unassigned_rank(&self) -> u32 {
        self.hospital_count() as u32 + 1
    }

    /// Rank with the unassigned convention for hospitals `d` did not apply to.
    pub fn rank_or_unranked(&self, d: usize, h: usize) -> u32 {
        self.rank(d, h).unwrap_or_else(|| self.unassigned_rank())
    }

    /// 0-based position of resident `d` in hospital `h`'s order; smaller is preferred.
    pub fn hospital_rank(&self, h: usize, d: usize) -> u32 {
        self.hospital_rank[h * self.parts.num_residents + d]
    }

    pub fn limit_sum(&self) -> u64 {
        self.parts
            .expansion_limits
            .iter()
            .map(|&b| u64::from(b))
            .sum()
    }

    pub fn zero_expansion(&self) -> ExpansionVector {
        ExpansionVector::zeros(self.hospital_count())
    }

    /// Copy of this instance with a different budget.
    pub fn with_budget(&self, budget: u32) -> Result<Self> {
        let mut parts = self.parts.clone();
        parts.budget = budget;
        Self::new(parts)
    }
}

/// Extra seats per hospital slot (dummy included, always 0 there).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExpansionVector(pub Vec<u32>);

impl ExpansionVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&t| u64::from(t)).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Membership in the feasible set: `t_h <= b_h` and `sum t <= B`.
    pub fn is_feasible(&self, instance: &MatchingInstance) -> bool {
        self.0.len() == instance.hospital_count()
            && self
                .0
                .iter()
                .zip(instance.expansion_limits())
                .all(|(t, b)| t <= b)
            && self.total() <= u64::from(instance.budget())
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &ExpansionVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl From<Vec<u32>> for ExpansionVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl fmt::Display for ExpansionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching {
    assignment: Vec<Option<usize>>,
    rosters: Vec<Vec<usize>>,
}

impl Matching {
    pub fn empty(num_residents: usize, hospital_count: usize) -> Self {
        Self {
            assignment: vec![None; num_residents],
            rosters: vec![Vec::new(); hospital_count],
        }
    }

    /// Builds a matching from a per-resident assignment; rosters are sorted by resident id.
    pub fn from_assignment(assignment: Vec<Option<usize>>, hospital_count: usize) -> Self {
        let mut rosters = vec![Vec::new(); hospital_count];
        for (d, h) in assignment.iter().enumerate() {
            if let Some(h) = *h {
                rosters[h].push(d);
            }
        }
        Self {
            assignment,
            rosters,
        }
    }

    /// Builds a matching from `(resident, hospital)` pairs.
    pub fn from_pairs(
        pairs: &[(usize, usize)],
        num_residents: usize,
        hospital_count: usize,
    ) -> Self {
        let mut assignment = vec![None; num_residents];
        for &(d, h) in pairs {
            assignment[d] = Some(h);
        }
        Self::from_assignment(assignment, hospital_count)
    }

    pub fn hospital_of(&self, d: usize) -> Option<usize> {
        self.assignment[d]
    }

    pub fn roster(&self, h: usize) -> &[usize] {
        &self.rosters[h]
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    pub fn num_residents(&self) -> usize {
        self.assignment.len()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(d, h)| h.map(|h| (d, h)))
            .collect()
    }

    /// Assignment and rosters agree, and every assigned resident applied to its hospital.
    pub fn is_consistent_with(&self, instance: &MatchingInstance) -> bool {
        if self.assignment.len() != instance.num_residents()
            || self.rosters.len() != instance.hospital_count()
        {
            return false;
        }
        let assigned = self.assignment.iter().flatten().count();
        let listed: usize = self.rosters.iter().map(Vec::len).sum();
        assigned == listed
            && self.rosters.iter().enumerate().all(|(h, roster)| {
                roster
                    .iter()
                    .all(|&d| d < self.assignment.len() && self.assignment[d] == Some(h))
            })
            && self
                .assignment
                .iter()
                .enumerate()
                .all(|(d, h)| h.is_none_or(|h| instance.rank(d, h).is_some()))
    }
}

/// Appends an infinite-capacity dummy hospital ranked right after each resident's
/// last applied hospital.
pub fn complete_with_dummy(instance: &MatchingInstance) -> Result<MatchingInstance> {
    if instance.has_dummy() {
        return Err(Error::DummyPresent);
    }
    let mut parts = instance.parts().clone();
    let dummy = parts.num_hospitals;
    let d_count = parts.num_residents;
    parts.quotas.push(d_count as u32);
    parts.expansion_limits.push(0);
    for prefs in &mut parts.resident_prefs {
        prefs.push(dummy);
    }
    parts.hospital_prefs.push((0..d_count).collect());
    parts.dummy_hospital = true;
    MatchingInstance::new(parts)
}

/// On-disk shape: 1-based ids throughout.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDocument {
    num_residents: usize,
    num_hospitals: usize,
    quotas: Vec<u32>,
    expansion_limits: Vec<u32>,
    budget: u32,
    resident_prefs: Vec<Vec<usize>>,
    hospital_prefs: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    dummy_hospital: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

// 0 in a file is out of range; map it past any valid id so validation reports it.
fn from_file_id(id: usize) -> usize {
    id.checked_sub(1).unwrap_or(usize::MAX)
}

pub fn load_instance(document: &str) -> Result<MatchingInstance> {
    let doc: InstanceDocument = serde_json::from_str(document).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let convert = |lists: Vec<Vec<usize>>| -> Vec<Vec<usize>> {
        lists
            .into_iter()
            .map(|l| l.into_iter().map(from_file_id).collect())
            .collect()
    };
    MatchingInstance::new(InstanceParts {
        num_residents: doc.num_residents,
        num_hospitals: doc.num_hospitals,
        quotas: doc.quotas,
        expansion_limits: doc.expansion_limits,
        budget: doc.budget,
        resident_prefs: convert(doc.resident_prefs),
        hospital_prefs: convert(doc.hospital_prefs),
        dummy_hospital: doc.dummy_hospital,
        seed: doc.seed,
    })
}

pub fn save_instance(instance: &MatchingInstance) -> String {
    let p = instance.parts();
    let convert = |lists: &[Vec<usize>]| -> Vec<Vec<usize>> {
        lists
            .iter()
            .map(|l| l.iter().map(|&i| i + 1).collect())
            .collect()
    };
    let doc = InstanceDocument {
        num_residents: p.num_residents,
        num_hospitals: p.num_hospitals,
        quotas: p.quotas.clone(),
        expansion_limits: p.expansion_limits.clone(),
        budget: p.budget,
        resident_prefs: convert(&p.resident_prefs),
        hospital_prefs: convert(&p.hospital_prefs),
        dummy_hospital: p.dummy_hospital,
        seed: p.seed,
    };
    serde_json::to_string(&doc).expect("instance document serializes")
}
