//! Pure combinatorics of transfer systems: the three pre-transfer axioms,
//! least-equivalence closure over the powerset, induced systems, the
//! transfer-system decision, principal systems, and the dominion witness.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ModelError, ModelInstance};

/// Subsets of the ground set as bit masks, bit i = i-th label.
pub type SubsetMask = u32;

pub const MAX_GROUND: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TsysError {
    #[error("ground set size {0} exceeds the cap of {MAX_GROUND}")]
    TooLarge(usize),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("V must not be a singleton: a one-element V admits no pre-transfer system")]
    SingletonV,
    #[error("census is exhaustive over all collections and is capped at |S| ≤ {0}")]
    CensusTooLarge(usize),
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error(
        "witness construction disagrees with the principal system; this is a defect, \
         please report it"
    )]
    WitnessMismatch,
}

/// An ordered ground set of distinct labels, at most 20.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundSet {
    labels: Vec<String>,
}

impl GroundSet {
    pub fn new<L: Into<String>>(labels: impl IntoIterator<Item = L>) -> Result<Self, TsysError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() > MAX_GROUND {
            return Err(TsysError::TooLarge(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(TsysError::DuplicateLabel(l.clone()));
            }
        }
        Ok(GroundSet { labels })
    }

    /// Numeric ground set {1..n}.
    pub fn numeric(n: usize) -> Result<Self, TsysError> {
        GroundSet::new((1..=n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn full_mask(&self) -> SubsetMask {
        ((1u64 << self.len()) - 1) as SubsetMask
    }

    pub fn mask_of<L: AsRef<str>>(
        &self,
        subset: impl IntoIterator<Item = L>,
    ) -> Result<SubsetMask, TsysError> {
        let mut mask = 0;
        for l in subset {
            let l = l.as_ref();
            let pos = self
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| TsysError::UnknownLabel(l.to_string()))?;
            mask |= 1 << pos;
        }
        Ok(mask)
    }

    pub fn subset_to_string(&self, mask: SubsetMask) -> String {
        if mask == 0 {
            return "{}".to_string();
        }
        let parts: Vec<&str> = (0..self.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.labels[i].as_str())
            .collect();
        parts.join(",")
    }
}

/// A family of subsets of the ground set, sorted ascending by bit pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetCollection {
    ground: GroundSet,
    members: Vec<SubsetMask>,
}

impl SubsetCollection {
    pub fn new(ground: GroundSet, members: impl IntoIterator<Item = SubsetMask>) -> Self {
        let mut members: Vec<SubsetMask> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        SubsetCollection { ground, members }
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn members(&self) -> &[SubsetMask] {
        &self.members
    }

    pub fn contains(&self, mask: SubsetMask) -> bool {
        self.members.binary_search(&mask).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl fmt::Display for SubsetCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .members
            .iter()
            .map(|&m| self.ground.subset_to_string(m))
            .collect();
        write!(f, "[{}]", parts.join(" | "))
    }
}

/// Which pre-transfer axiom failed, with the witnessing subsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreTransferCheck {
    Pass,
    Fail {
        axiom: PreTransferAxiom,
        t1: SubsetMask,
        t2: SubsetMask,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreTransferAxiom {
    /// ∅ must belong to the collection.
    EmptySet,
    /// T1, T2 ∈ T with T1∩T2 ∈ T forces T1∪T2 ∈ T.
    UnionClosure,
    /// disjoint T1, T2 with T1, T1∪T2 ∈ T and every proper U ⊊ T1 having
    /// U ∈ T or T1∖U ∈ T forces T2 ∈ T.
    Exchange,
}

/// Checks the three pre-transfer axioms, returning the first failure in
/// axiom order with subsets enumerated ascending.
pub fn check_pre_transfer(c: &SubsetCollection) -> PreTransferCheck {
    if !c.contains(0) {
        return PreTransferCheck::Fail {
            axiom: PreTransferAxiom::EmptySet,
            t1: 0,
            t2: 0,
        };
    }
    for &t1 in c.members() {
        for &t2 in c.members() {
            if c.contains(t1 & t2) && !c.contains(t1 | t2) {
                return PreTransferCheck::Fail {
                    axiom: PreTransferAxiom::UnionClosure,
                    t1,
                    t2,
                };
            }
        }
    }
    let full = c.ground().full_mask();
    for &t1 in c.members() {
        // every proper subset U of T1 must have U or T1∖U in the collection
        let mut hyp = true;
        let mut u = (t1.wrapping_sub(1)) & t1;
        while hyp && u != t1 {
            if !c.contains(u) && !c.contains(t1 & !u) {
                hyp = false;
            }
            if u == 0 {
                break;
            }
            u = u.wrapping_sub(1) & t1;
        }
        if !hyp {
            continue;
        }
        let rest = full & !t1;
        // ascending enumeration of subsets T2 of the complement
        let mut t2: SubsetMask = 0;
        loop {
            if c.contains(t1 | t2) && !c.contains(t2) {
                return PreTransferCheck::Fail {
                    axiom: PreTransferAxiom::Exchange,
                    t1,
                    t2,
                };
            }
            if t2 == rest {
                break;
            }
            t2 = (t2.wrapping_sub(rest)) & rest;
        }
    }
    PreTransferCheck::Pass
}

/// A partition of the full powerset, as union-find with the minimum bit
/// pattern canonical per class.
#[derive(Debug, Clone)]
pub struct PowersetPartition {
    n: usize,
    parent: Vec<u32>,
}

impl PowersetPartition {
    pub fn discrete(n: usize) -> PowersetPartition {
        PowersetPartition {
            n,
            parent: (0..1u32 << n).collect(),
        }
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn find(&mut self, mut x: SubsetMask) -> SubsetMask {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    pub fn union(&mut self, a: SubsetMask, b: SubsetMask) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        let (keep, gone) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[gone as usize] = keep;
    }

    pub fn same(&mut self, a: SubsetMask, b: SubsetMask) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn class_count(&mut self) -> usize {
        (0..1u32 << self.n).filter(|&x| self.find(x) == x).count()
    }

    /// Members of each class, keyed by canonical representative ascending.
    pub fn classes(&mut self) -> Vec<(SubsetMask, Vec<SubsetMask>)> {
        let mut by_rep: std::collections::BTreeMap<SubsetMask, Vec<SubsetMask>> =
            Default::default();
        for x in 0..1u32 << self.n {
            let r = self.find(x);
            by_rep.entry(r).or_default().push(x);
        }
        by_rep.into_iter().collect()
    }
}

/// The least equivalence relation on subsets of S with U ∼ U∪T for every
/// T in the collection and U ⊆ S∖T.
pub fn least_closure(c: &SubsetCollection) -> PowersetPartition {
    let n = c.ground().len();
    let mut p = PowersetPartition::discrete(n);
    let full = c.ground().full_mask();
    for &t in c.members() {
        let rest = full & !t;
        let mut u: SubsetMask = 0;
        loop {
            p.union(u, u | t);
            if u == rest {
                break;
            }
            u = (u.wrapping_sub(rest)) & rest;
        }
    }
    p
}

/// One step of a closure chain: `from ∼ to` because of member `via`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub from: SubsetMask,
    pub to: SubsetMask,
    pub via: SubsetMask,
}

/// Shortest generator chain between two subsets: breadth-first search over
/// the moves U ↔ U∪T for members T, with T enumerated ascending. Returns
/// None when the subsets are inequivalent.
pub fn closure_path(
    c: &SubsetCollection,
    from: SubsetMask,
    to: SubsetMask,
) -> Option<Vec<ChainStep>> {
    let n = c.ground().len();
    let size = 1usize << n;
    let mut prev: Vec<Option<(SubsetMask, SubsetMask)>> = vec![None; size];
    let mut seen = vec![false; size];
    let mut queue = std::collections::VecDeque::new();
    seen[from as usize] = true;
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut steps = Vec::new();
            let mut cur = to;
            while cur != from {
                let (p, via) = prev[cur as usize].expect("BFS predecessor chain");
                steps.push(ChainStep {
                    from: p,
                    to: cur,
                    via,
                });
                cur = p;
            }
            steps.reverse();
            return Some(steps);
        }
        for &t in c.members() {
            if t == 0 {
                continue;
            }
            let next = if v & t == 0 {
                v | t
            } else if v & t == t {
                v & !t
            } else {
                continue;
            };
            if !seen[next as usize] {
                seen[next as usize] = true;
                prev[next as usize] = Some((v, t));
                queue.push_back(next);
            }
        }
    }
    None
}

/// T belongs to the induced system iff U ∼ U∪T for every U ⊆ S∖T.
pub fn induced_system(ground: &GroundSet, p: &mut PowersetPartition) -> SubsetCollection {
    let full = ground.full_mask();
    let mut members = Vec::new();
    'next: for t in 0..=full {
        let rest = full & !t;
        let mut u: SubsetMask = 0;
        loop {
            if !p.same(u, u | t) {
                continue 'next;
            }
            if u == rest {
                break;
            }
            u = (u.wrapping_sub(rest)) & rest;
        }
        members.push(t);
    }
    SubsetCollection::new(ground.clone(), members)
}

#[derive(Debug, Clone)]
pub enum TransferDecision {
    Yes(PowersetPartition),
    No { witness: SubsetMask },
}

/// Decides whether the collection is a transfer system.
///
/// Criterion: let ∼ be the least closure and T* its induced system; the
/// collection is a transfer system iff T* equals it. Soundness of the
/// criterion: every member T forces U ∼ U∪T by a generator, so the
/// collection is contained in T*. Any witnessing equivalence ≈ contains
/// every generator of ∼, hence ∼ ⊆ ≈, and monotonicity gives
/// T*(∼) ⊆ T*(≈) = collection. So a witness exists iff T*(∼) adds nothing,
/// and then ∼ itself is a witness.
///
/// On No, the witness is the largest-bit-pattern member of T* ∖ collection.
pub fn is_transfer_system(c: &SubsetCollection) -> TransferDecision {
    let mut p = least_closure(c);
    let induced = induced_system(c.ground(), &mut p);
    debug_assert!(c.members().iter().all(|&m| induced.contains(m)));
    let extra: Vec<SubsetMask> = induced
        .members()
        .iter()
        .copied()
        .filter(|&m| !c.contains(m))
        .collect();
    match extra.last() {
        None => TransferDecision::Yes(p),
        Some(&witness) => TransferDecision::No { witness },
    }
}

/// The principal system T(V) = {∅} ∪ {A ⊆ S : V ⊆ A}.
pub fn principal_system(ground: &GroundSet, v: SubsetMask) -> SubsetCollection {
    let full = ground.full_mask();
    let members = (0..=full).filter(|&a| a == 0 || a & v == v);
    SubsetCollection::new(ground.clone(), members)
}

/// The dominion witness for a principal system: the prime/multiples-of-M
/// model, relabelled so V maps onto the first m indices order-preservingly.
#[derive(Debug, Clone)]
pub struct DominionWitness {
    pub instance: ModelInstance,
    /// position i of the ground set maps to model variable `relabel[i]`
    pub relabel: Vec<usize>,
    pub collection: SubsetCollection,
}

pub fn dominion_witness(ground: &GroundSet, v: SubsetMask) -> Result<DominionWitness, TsysError> {
    if v.count_ones() == 1 {
        return Err(TsysError::SingletonV);
    }
    let n = ground.len();
    let m = v.count_ones() as usize;
    let instance = ModelInstance::new(n, m)?;
    let mut relabel = vec![0usize; n];
    let mut next_v = 0usize;
    let mut next_rest = m;
    for (i, slot) in relabel.iter_mut().enumerate() {
        if v >> i & 1 == 1 {
            *slot = next_v;
            next_v += 1;
        } else {
            *slot = next_rest;
            next_rest += 1;
        }
    }
    let full = ground.full_mask();
    let members = (0..=full).filter(|&t| {
        let mut model_mask = 0u32;
        for (i, &slot) in relabel.iter().enumerate() {
            if t >> i & 1 == 1 {
                model_mask |= 1 << slot;
            }
        }
        instance.transferable_subset(model_mask)
    });
    let collection = SubsetCollection::new(ground.clone(), members);
    if collection != principal_system(ground, v) {
        return Err(TsysError::WitnessMismatch);
    }
    Ok(DominionWitness {
        instance,
        relabel,
        collection,
    })
}

/// Exhaustive counts over every collection on ground sets of size 1..=max_n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub n: usize,
    pub collections: u64,
    pub pre_transfer: u64,
    pub transfer: u64,
    /// pre-transfer systems that are not transfer systems
    pub gap: u64,
    /// smallest such collection in lexicographic member order, if any
    pub first_gap_witness: Option<Vec<SubsetMask>>,
}

pub const MAX_CENSUS_GROUND: usize = 4;

pub fn census(max_n: usize) -> Result<Vec<CensusRow>, TsysError> {
    if max_n > MAX_CENSUS_GROUND {
        return Err(TsysError::CensusTooLarge(MAX_CENSUS_GROUND));
    }
    let mut rows = Vec::new();
    for n in 1..=max_n {
        let ground = GroundSet::numeric(n)?;
        let subsets = 1u32 << n;
        let mut pre = 0u64;
        let mut transfer = 0u64;
        let mut gap = 0u64;
        let mut first_gap = None;
        for code in 0u64..1u64 << subsets {
            let members = (0..subsets).filter(|&s| code >> s & 1 == 1);
            let c = SubsetCollection::new(ground.clone(), members);
            let is_pre = check_pre_transfer(&c) == PreTransferCheck::Pass;
            let is_ts = matches!(is_transfer_system(&c), TransferDecision::Yes(_));
            pre += is_pre as u64;
            transfer += is_ts as u64;
            if is_pre && !is_ts {
                gap += 1;
                if first_gap.is_none() {
                    first_gap = Some(c.members().to_vec());
                }
            }
        }
        rows.push(CensusRow {
            n,
            collections: 1u64 << subsets,
            pre_transfer: pre,
            transfer,
            gap,
            first_gap_witness: first_gap,
        });
    }
    Ok(rows)
}
