//! Semi-decision of equalities in the amalgamated coproduct A⨿_B A:
//! congruence closure over two tagged copies of A for proving, and
//! model-based homomorphism-pair search for refuting.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    enumerate_homomorphisms, enumerate_models, FiniteAlgebra, Hom, Identity, Subalgebra,
};
use crate::budget::{checked_assignment_count, Budget, BudgetExceeded};
use crate::term::{Signature, Term};

/// Which copy of A a generator comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "L"),
            Side::Right => write!(f, "R"),
        }
    }
}

/// A generator of A⨿_B A: an element of A under one of the two embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaggedElement {
    pub side: Side,
    pub element: usize,
}

impl fmt::Display for TaggedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.side, self.element)
    }
}

/// A term over the tagged generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaggedTerm {
    Leaf(TaggedElement),
    App(String, Vec<TaggedTerm>),
}

impl TaggedTerm {
    pub fn leaf(side: Side, element: usize) -> TaggedTerm {
        TaggedTerm::Leaf(TaggedElement { side, element })
    }
}

impl fmt::Display for TaggedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaggedTerm::Leaf(l) => write!(f, "{l}"),
            TaggedTerm::App(op, args) => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Converts a plain term whose variables are `L:<idx>` / `R:<idx>` leaves.
pub fn tagged_from_term(term: &Term, size: usize) -> Result<TaggedTerm, String> {
    match term {
        Term::Var(v) => {
            let (side, rest) = match v.split_once(':') {
                Some(("L", rest)) => (Side::Left, rest),
                Some(("R", rest)) => (Side::Right, rest),
                _ => return Err(format!("leaf `{v}` is not of the form L:<idx> or R:<idx>")),
            };
            let element: usize = rest
                .parse()
                .map_err(|_| format!("bad element index in `{v}`"))?;
            if element >= size {
                return Err(format!("element {element} out of range (size {size})"));
            }
            Ok(TaggedTerm::Leaf(TaggedElement { side, element }))
        }
        Term::App(op, args) => Ok(TaggedTerm::App(
            op.clone(),
            args.iter()
                .map(|a| tagged_from_term(a, size))
                .collect::<Result<_, _>>()?,
        )),
    }
}

type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum NodeKind {
    Gen(Side, usize),
    App(u16, Vec<NodeId>),
}

/// Why two classes were merged; every merge traces to a relation instance
/// or to congruence propagation from earlier merges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeReason {
    TableFact {
        side: Side,
        op: String,
        args: Vec<usize>,
    },
    Amalgamation {
        element: usize,
    },
    IdentityInstance {
        identity: usize,
        round: usize,
    },
    Congruence,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeRecord {
    pub a: NodeId,
    pub b: NodeId,
    pub reason: MergeReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationStats {
    pub nodes: usize,
    pub relations: usize,
    pub classes: usize,
    pub merges: usize,
}

/// A term graph over the generators {Left(a), Right(a) : a ∈ A} together
/// with a congruence generated by per-side table facts, amalgamation facts
/// Left(b) = Right(b) for b ∈ B, and identity instances instantiated over
/// class representatives for `depth` rounds.
pub struct CoproductPresentation {
    alg: FiniteAlgebra,
    nodes: Vec<NodeKind>,
    parent_of: Vec<NodeId>,
    app_parents: Vec<Vec<NodeId>>,
    hashcons: HashMap<NodeKind, NodeId>,
    pending: VecDeque<(NodeId, NodeId, MergeReason)>,
    merges: Vec<MergeRecord>,
    relations: usize,
    max_nodes: usize,
}

/// Outcome of a proof attempt. `Unknown` carries the reason: closure
/// saturated without deriving the equality, or a budget stop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProveOutcome {
    Proven,
    Unknown { reason: String },
}

impl CoproductPresentation {
    pub fn alg(&self) -> &FiniteAlgebra {
        &self.alg
    }

    pub fn stats(&mut self) -> PresentationStats {
        let nodes = self.nodes.len();
        let classes = (0..nodes as NodeId).filter(|&i| self.find(i) == i).count();
        PresentationStats {
            nodes,
            relations: self.relations,
            classes,
            merges: self.merges.len(),
        }
    }

    pub fn merge_log(&self) -> &[MergeRecord] {
        &self.merges
    }

    fn find(&mut self, mut x: NodeId) -> NodeId {
        while self.parent_of[x as usize] != x {
            let gp = self.parent_of[self.parent_of[x as usize] as usize];
            self.parent_of[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn gen_id(&self, side: Side, element: usize) -> NodeId {
        match side {
            Side::Left => element as NodeId,
            Side::Right => (self.alg.size() + element) as NodeId,
        }
    }

    fn add_app(&mut self, op: u16, children: Vec<NodeId>) -> Result<NodeId, BudgetExceeded> {
        let canon: Vec<NodeId> = children.iter().map(|&c| self.find(c)).collect();
        let key = NodeKind::App(op, canon.clone());
        if let Some(&id) = self.hashcons.get(&key) {
            return Ok(id);
        }
        if self.nodes.len() >= self.max_nodes {
            return Err(BudgetExceeded::new(
                "presentation nodes",
                self.nodes.len() as u64 + 1,
                self.max_nodes as u64,
            ));
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(key.clone());
        self.parent_of.push(id);
        self.app_parents.push(Vec::new());
        self.hashcons.insert(key, id);
        let mut seen = Vec::new();
        for c in canon {
            if !seen.contains(&c) {
                self.app_parents[c as usize].push(id);
                seen.push(c);
            }
        }
        Ok(id)
    }

    fn enqueue(&mut self, a: NodeId, b: NodeId, reason: MergeReason) {
        self.relations += 1;
        self.pending.push_back((a, b, reason));
        self.process_pending();
    }

    /// Union-find merge with congruence propagation. The representative of
    /// a merged class is the node with the smaller creation index.
    fn process_pending(&mut self) {
        while let Some((a, b, reason)) = self.pending.pop_front() {
            let ra = self.find(a);
            let rb = self.find(b);
            if ra == rb {
                continue;
            }
            let (keep, gone) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent_of[gone as usize] = keep;
            self.merges.push(MergeRecord { a, b, reason });
            let moved = std::mem::take(&mut self.app_parents[gone as usize]);
            for p in moved {
                let NodeKind::App(op, children) = self.nodes[p as usize].clone() else {
                    unreachable!("generator in app-parent list");
                };
                let canon: Vec<NodeId> = children.iter().map(|&c| self.find(c)).collect();
                let key = NodeKind::App(op, canon);
                match self.hashcons.get(&key) {
                    Some(&q) => {
                        let (rp, rq) = (self.find(p), self.find(q));
                        if rp != rq {
                            self.pending.push_back((p, q, MergeReason::Congruence));
                        }
                    }
                    None => {
                        self.hashcons.insert(key, p);
                    }
                }
                self.app_parents[keep as usize].push(p);
            }
        }
    }

    fn reps(&mut self) -> Vec<NodeId> {
        (0..self.nodes.len() as NodeId)
            .filter(|&i| self.find(i) == i)
            .collect()
    }

    /// Builds the node for a tagged term, creating subterm nodes as needed.
    pub fn add_tagged(&mut self, term: &TaggedTerm) -> Result<NodeId, BudgetExceeded> {
        match term {
            TaggedTerm::Leaf(l) => Ok(self.gen_id(l.side, l.element)),
            TaggedTerm::App(op, args) => {
                let mut children = Vec::with_capacity(args.len());
                for a in args {
                    children.push(self.add_tagged(a)?);
                }
                let op_idx = self
                    .alg
                    .sig()
                    .op_index(op)
                    .unwrap_or_else(|| panic!("unknown operation `{op}` in tagged term"));
                self.add_app(op_idx as u16, children)
            }
        }
    }

    /// Congruence-closure proof attempt: Proven iff both terms land in one
    /// class. Never returns a false Proven; merges are audited.
    pub fn prove_equal(&mut self, s: &TaggedTerm, t: &TaggedTerm) -> ProveOutcome {
        let sn = match self.add_tagged(s) {
            Ok(n) => n,
            Err(e) => {
                return ProveOutcome::Unknown {
                    reason: e.to_string(),
                }
            }
        };
        let tn = match self.add_tagged(t) {
            Ok(n) => n,
            Err(e) => {
                return ProveOutcome::Unknown {
                    reason: e.to_string(),
                }
            }
        };
        self.process_pending();
        if self.find(sn) == self.find(tn) {
            ProveOutcome::Proven
        } else {
            ProveOutcome::Unknown {
                reason: "not derived at this instantiation depth".into(),
            }
        }
    }
}

/// Constructs the presentation: generators, per-side operation-table facts,
/// amalgamation facts for B, then `depth` rounds of identity instances with
/// arguments drawn from the class representatives current at each round.
pub fn build_presentation(
    alg: &FiniteAlgebra,
    sub: &Subalgebra,
    ids: &[Identity],
    depth: usize,
    budget: &Budget,
) -> Result<CoproductPresentation, BudgetExceeded> {
    let n = alg.size();
    let mut p = CoproductPresentation {
        alg: alg.clone(),
        nodes: Vec::new(),
        parent_of: Vec::new(),
        app_parents: Vec::new(),
        hashcons: HashMap::new(),
        pending: VecDeque::new(),
        merges: Vec::new(),
        relations: 0,
        max_nodes: budget.max_nodes,
    };
    for side in [Side::Left, Side::Right] {
        for e in 0..n {
            let id = p.nodes.len() as NodeId;
            let kind = NodeKind::Gen(side, e);
            p.nodes.push(kind.clone());
            p.parent_of.push(id);
            p.app_parents.push(Vec::new());
            p.hashcons.insert(kind, id);
        }
    }
    // table facts, both sides
    for side in [Side::Left, Side::Right] {
        for (op_idx, op) in alg.sig().ops().iter().enumerate() {
            let mut args = vec![0usize; op.arity];
            loop {
                let children: Vec<NodeId> = args.iter().map(|&a| p.gen_id(side, a)).collect();
                let node = p.add_app(op_idx as u16, children)?;
                let result = p.gen_id(side, alg.apply(op_idx, &args));
                p.enqueue(
                    node,
                    result,
                    MergeReason::TableFact {
                        side,
                        op: op.name.clone(),
                        args: args.clone(),
                    },
                );
                if args.is_empty() || !bump(&mut args, n) {
                    break;
                }
            }
        }
    }
    // amalgamation facts
    for b in sub.members().iter() {
        let (l, r) = (p.gen_id(Side::Left, b), p.gen_id(Side::Right, b));
        p.enqueue(l, r, MergeReason::Amalgamation { element: b });
    }
    // amalgamated generators really are identified from here on
    for b in sub.members().iter() {
        let (l, r) = (p.gen_id(Side::Left, b), p.gen_id(Side::Right, b));
        debug_assert_eq!(p.find(l), p.find(r));
    }
    // identity instantiation rounds
    for round in 1..=depth {
        let reps = p.reps();
        for (id_idx, id) in ids.iter().enumerate() {
            let vars = id.vars();
            checked_assignment_count(reps.len(), vars.len(), budget.max_assignments)?;
            let mut choice = vec![0usize; vars.len()];
            loop {
                let values: Vec<NodeId> = choice.iter().map(|&c| reps[c]).collect();
                let lhs = instantiate(&mut p, &id.lhs, alg.sig(), &vars, &values)?;
                let rhs = instantiate(&mut p, &id.rhs, alg.sig(), &vars, &values)?;
                p.enqueue(
                    lhs,
                    rhs,
                    MergeReason::IdentityInstance {
                        identity: id_idx,
                        round,
                    },
                );
                if choice.is_empty() || !bump(&mut choice, reps.len()) {
                    break;
                }
            }
        }
    }
    Ok(p)
}

fn instantiate(
    p: &mut CoproductPresentation,
    term: &Term,
    sig: &Signature,
    vars: &[String],
    values: &[NodeId],
) -> Result<NodeId, BudgetExceeded> {
    match term {
        Term::Var(v) => {
            let slot = vars
                .iter()
                .position(|o| o == v)
                .expect("identity variable bound");
            Ok(values[slot])
        }
        Term::App(op, args) => {
            let mut children = Vec::with_capacity(args.len());
            for a in args {
                children.push(instantiate(p, a, sig, vars, values)?);
            }
            let op_idx = sig.op_index(op).expect("identity operation in signature");
            p.add_app(op_idx as u16, children)
        }
    }
}

fn bump(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// A homomorphism pair into a finite model that separates two tagged terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefutationWitness {
    pub codomain: FiniteAlgebra,
    pub f: Hom,
    pub g: Hom,
    pub left_value: usize,
    pub right_value: usize,
}

#[derive(Debug, Clone)]
pub enum RefuteOutcome {
    Disproven(Box<RefutationWitness>),
    Unknown,
}

/// Evaluates a tagged term under a pair (f, g): `L:a` leaves go through f,
/// `R:a` leaves through g.
pub fn eval_tagged(term: &TaggedTerm, codomain: &FiniteAlgebra, f: &[usize], g: &[usize]) -> usize {
    match term {
        TaggedTerm::Leaf(l) => match l.side {
            Side::Left => f[l.element],
            Side::Right => g[l.element],
        },
        TaggedTerm::App(op, args) => {
            let vals: Vec<usize> = args
                .iter()
                .map(|a| eval_tagged(a, codomain, f, g))
                .collect();
            let op_idx = codomain.sig().op_index(op).expect("operation in signature");
            codomain.apply(op_idx, &vals)
        }
    }
}

/// Searches models of `ids` of size ≤ max_c and homomorphism pairs agreeing
/// on B for an evaluation separating the two tagged terms. A Disproven
/// outcome implies the terms differ in A⨿_B A.
pub fn refute_tagged(
    alg: &FiniteAlgebra,
    sub: &Subalgebra,
    ids: &[Identity],
    s: &TaggedTerm,
    t: &TaggedTerm,
    max_c: usize,
    budget: &Budget,
) -> Result<RefuteOutcome, BudgetExceeded> {
    let b_elems: Vec<usize> = sub.members().iter().collect();
    for size in 1..=max_c {
        let models = enumerate_models(alg.sig(), size, ids, budget, false)
            .expect("identities compile over the algebra signature");
        for model in models {
            let codomain = model?;
            let homs = enumerate_homomorphisms(alg, &codomain, &[]);
            for f in &homs {
                for g in &homs {
                    if b_elems.iter().any(|&b| f[b] != g[b]) {
                        continue;
                    }
                    let lv = eval_tagged(s, &codomain, f, g);
                    let rv = eval_tagged(t, &codomain, f, g);
                    if lv != rv {
                        return Ok(RefuteOutcome::Disproven(Box::new(RefutationWitness {
                            codomain,
                            f: f.clone(),
                            g: g.clone(),
                            left_value: lv,
                            right_value: rv,
                        })));
                    }
                }
            }
        }
    }
    Ok(RefuteOutcome::Unknown)
}

/// Refutation of Left(a) = Right(a2), the element-level special case.
pub fn refute_equal(
    alg: &FiniteAlgebra,
    sub: &Subalgebra,
    ids: &[Identity],
    a: usize,
    a2: usize,
    max_c: usize,
    budget: &Budget,
) -> Result<RefuteOutcome, BudgetExceeded> {
    refute_tagged(
        alg,
        sub,
        ids,
        &TaggedTerm::leaf(Side::Left, a),
        &TaggedTerm::leaf(Side::Right, a2),
        max_c,
        budget,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{ElemSet, Subalgebra};
    use crate::term::parse_term;
    use crate::testfix::zigzag_fixture;

    fn semigroup_sig() -> Signature {
        Signature::new([("mul", 2)]).unwrap()
    }

    fn assoc(sig: &Signature) -> Identity {
        Identity::new(
            parse_term("(mul (mul x y) z)", sig).unwrap(),
            parse_term("(mul x (mul y z))", sig).unwrap(),
        )
    }

    #[test]
    fn reflexivity_is_proven() {
        let (alg, sub) = zigzag_fixture();
        let sig = semigroup_sig();
        let ids = [assoc(&sig)];
        let mut p = build_presentation(&alg, &sub, &ids, 0, &Budget::default()).unwrap();
        let t = TaggedTerm::App(
            "mul".into(),
            vec![
                TaggedTerm::leaf(Side::Left, 4),
                TaggedTerm::leaf(Side::Right, 2),
            ],
        );
        assert_eq!(p.prove_equal(&t, &t), ProveOutcome::Proven);
    }

    #[test]
    fn amalgamated_generators_proven_at_depth_zero() {
        let (alg, sub) = zigzag_fixture();
        let sig = semigroup_sig();
        let ids = [assoc(&sig)];
        let mut p = build_presentation(&alg, &sub, &ids, 0, &Budget::default()).unwrap();
        for b in 0..4 {
            assert_eq!(
                p.prove_equal(
                    &TaggedTerm::leaf(Side::Left, b),
                    &TaggedTerm::leaf(Side::Right, b)
                ),
                ProveOutcome::Proven
            );
        }
        // the non-amalgamated element stays apart at depth 0
        assert!(matches!(
            p.prove_equal(
                &TaggedTerm::leaf(Side::Left, 4),
                &TaggedTerm::leaf(Side::Right, 4)
            ),
            ProveOutcome::Unknown { .. }
        ));
    }

    #[test]
    fn all_generators_identified_when_b_is_a() {
        let (alg, _) = zigzag_fixture();
        let sig = semigroup_sig();
        let ids = [assoc(&sig)];
        let sub = Subalgebra::checked(&alg, ElemSet::full(5)).unwrap();
        let mut p = build_presentation(&alg, &sub, &ids, 0, &Budget::default()).unwrap();
        for a in 0..5 {
            assert_eq!(
                p.prove_equal(
                    &TaggedTerm::leaf(Side::Left, a),
                    &TaggedTerm::leaf(Side::Right, a)
                ),
                ProveOutcome::Proven
            );
        }
    }

    #[test]
    fn zigzag_proven_at_depth_one() {
        let (alg, sub) = zigzag_fixture();
        let sig = semigroup_sig();
        let ids = [assoc(&sig)];
        let mut p = build_presentation(&alg, &sub, &ids, 1, &Budget::default()).unwrap();
        // xyz = 4 with x = z = 4, y = 1: Left(4) = Right(4) by the zigzag chain
        let out = p.prove_equal(
            &TaggedTerm::leaf(Side::Left, 4),
            &TaggedTerm::leaf(Side::Right, 4),
        );
        assert_eq!(out, ProveOutcome::Proven);
    }

    #[test]
    fn build_counts_are_stable() {
        let (alg, sub) = zigzag_fixture();
        let sig = semigroup_sig();
        let ids = [assoc(&sig)];
        let mut p1 = build_presentation(&alg, &sub, &ids, 2, &Budget::default()).unwrap();
        let mut p2 = build_presentation(&alg, &sub, &ids, 2, &Budget::default()).unwrap();
        assert_eq!(p1.stats(), p2.stats());
        assert!(p1.stats().nodes > 0 && p1.stats().relations > 0);
    }

    #[test]
    fn depth_zero_relations_are_tables_plus_amalgamation() {
        let (alg, sub) = zigzag_fixture();
        let sig = semigroup_sig();
        let ids = [assoc(&sig)];
        let mut p = build_presentation(&alg, &sub, &ids, 0, &Budget::default()).unwrap();
        // 2 sides * 25 table cells + 4 amalgamation facts
        assert_eq!(p.stats().relations, 54);
    }

    #[test]
    fn node_budget_is_enforced() {
        let (alg, sub) = zigzag_fixture();
        let sig = semigroup_sig();
        let ids = [assoc(&sig)];
        let tight = Budget::default().with_max_nodes(20);
        assert!(build_presentation(&alg, &sub, &ids, 1, &tight).is_err());
    }

    #[test]
    fn refute_on_subalgebra_element_is_unknown() {
        let (alg, sub) = zigzag_fixture();
        let sig = semigroup_sig();
        let ids = [assoc(&sig)];
        let out = refute_equal(&alg, &sub, &ids, 1, 1, 3, &Budget::default()).unwrap();
        assert!(matches!(out, RefuteOutcome::Unknown));
    }

    #[test]
    fn refute_separates_non_amalgamated_elements() {
        // B = {0}: element 1 of the 2-element semilattice is separated
        let sig = semigroup_sig();
        let table = vec![0, 0, 0, 1]; // min
        let alg = FiniteAlgebra::new(sig.clone(), 2, vec![table]).unwrap();
        let sub = Subalgebra::checked(&alg, ElemSet::from_elems([0])).unwrap();
        let ids = [assoc(&sig)];
        let out = refute_equal(&alg, &sub, &ids, 1, 1, 2, &Budget::default()).unwrap();
        match out {
            RefuteOutcome::Disproven(w) => {
                assert_eq!(w.f[0], w.g[0]);
                assert_ne!(w.f[1], w.g[1]);
            }
            RefuteOutcome::Unknown => panic!("expected a separation"),
        }
    }

    #[test]
    fn soundness_prove_and_refute_never_conflict() {
        let (alg, sub) = zigzag_fixture();
        let sig = semigroup_sig();
        let ids = [assoc(&sig)];
        let mut p = build_presentation(&alg, &sub, &ids, 1, &Budget::default()).unwrap();
        for a in 0..5 {
            for a2 in 0..5 {
                let s = TaggedTerm::leaf(Side::Left, a);
                let t = TaggedTerm::leaf(Side::Right, a2);
                let proved = p.prove_equal(&s, &t) == ProveOutcome::Proven;
                let refuted = matches!(
                    refute_equal(&alg, &sub, &ids, a, a2, 3, &Budget::default()).unwrap(),
                    RefuteOutcome::Disproven(_)
                );
                assert!(!(proved && refuted), "conflict at ({a},{a2})");
            }
        }
    }
}
