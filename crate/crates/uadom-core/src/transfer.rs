//! The split evaluation W_{S1,S2}(x), the transferability decision over all
//! partitions of the remaining variables, and dominion membership of W(x)
//! via the transfer criterion.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{FiniteAlgebra, Identity, Subalgebra};
use crate::budget::Budget;
use crate::coproduct::{
    build_presentation, refute_tagged, CoproductPresentation, ProveOutcome, RefutationWitness,
    RefuteOutcome, Side, TaggedTerm,
};
use crate::model::{FactoredInt, ModelInstance, TaggedValue};
use crate::term::Term;

/// Default cap on |S|; 2^|S| partitions in the worst case.
pub const DEFAULT_MAX_SPLIT_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransferError {
    #[error("left and right variable sets do not partition S")]
    NonPartition,
    #[error("word variable `{0}` is not in the context variable list")]
    UnboundWordVar(String),
    #[error("no value assigned to variable `{0}`")]
    UnassignedVar(String),
    #[error("subset mask has bits outside the variable list")]
    BadSubset,
    #[error("variable list has {0} entries, cap is {1}")]
    TooManyVars(usize, usize),
    #[error("model backend words must use only the binary product operation, found `{0}`")]
    NonProductOp(String),
    #[error("model error: {0}")]
    Model(#[from] crate::model::ModelError),
}

/// The word W with every variable routed through one of the two embeddings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitTerm {
    Leaf(Side, String),
    App(String, Vec<SplitTerm>),
}

impl std::fmt::Display for SplitTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplitTerm::Leaf(side, v) => write!(f, "{side}:{v}"),
            SplitTerm::App(op, args) => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Replaces each variable of `word` by a tagged leaf according to the side
/// it was assigned to. `left` and `right` must partition the context set.
pub fn split_value(
    word: &Term,
    vars: &[String],
    left: &[String],
    right: &[String],
) -> Result<SplitTerm, TransferError> {
    for v in vars {
        let in_l = left.contains(v);
        let in_r = right.contains(v);
        if in_l == in_r {
            return Err(TransferError::NonPartition);
        }
    }
    if left.len() + right.len() != vars.len() {
        return Err(TransferError::NonPartition);
    }
    fn walk(t: &Term, left: &[String]) -> SplitTerm {
        match t {
            Term::Var(v) => {
                let side = if left.contains(v) {
                    Side::Left
                } else {
                    Side::Right
                };
                SplitTerm::Leaf(side, v.clone())
            }
            Term::App(op, args) => {
                SplitTerm::App(op.clone(), args.iter().map(|a| walk(a, left)).collect())
            }
        }
    }
    Ok(walk(word, left))
}

/// A partition S = S1 ⊔ T ⊔ S2, as bit masks over the variable positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition3 {
    pub s1: u32,
    pub t: u32,
    pub s2: u32,
}

#[derive(Debug, Clone)]
pub enum EqDecision {
    Equal,
    NotEqual(Option<Box<RefutationWitness>>),
    Undecided(String),
}

/// The equality backend: a coproduct presentation over a finite algebra, or
/// the decidable prime/multiples-of-M model.
pub enum TransferBackend {
    Coproduct(CoproductContext),
    Model(ModelContext),
}

pub struct CoproductContext {
    pub alg: FiniteAlgebra,
    pub sub: Subalgebra,
    pub ids: Vec<Identity>,
    pub assignment: BTreeMap<String, usize>,
    pub depth: usize,
    pub max_c: usize,
    pub budget: Budget,
    presentation: Option<CoproductPresentation>,
    build_error: Option<String>,
}

impl CoproductContext {
    pub fn new(
        alg: FiniteAlgebra,
        sub: Subalgebra,
        ids: Vec<Identity>,
        assignment: BTreeMap<String, usize>,
        depth: usize,
        max_c: usize,
        budget: Budget,
    ) -> CoproductContext {
        CoproductContext {
            alg,
            sub,
            ids,
            assignment,
            depth,
            max_c,
            budget,
            presentation: None,
            build_error: None,
        }
    }

    pub fn presentation_stats(&mut self) -> Option<crate::coproduct::PresentationStats> {
        self.presentation.as_mut().map(|p| p.stats())
    }

    fn tagged(&self, split: &SplitTerm) -> Result<TaggedTerm, TransferError> {
        match split {
            SplitTerm::Leaf(side, v) => {
                let &element = self
                    .assignment
                    .get(v)
                    .ok_or_else(|| TransferError::UnassignedVar(v.clone()))?;
                Ok(TaggedTerm::leaf(*side, element))
            }
            SplitTerm::App(op, args) => Ok(TaggedTerm::App(
                op.clone(),
                args.iter()
                    .map(|a| self.tagged(a))
                    .collect::<Result<_, _>>()?,
            )),
        }
    }

    fn decide(&mut self, lhs: &SplitTerm, rhs: &SplitTerm) -> Result<EqDecision, TransferError> {
        let s = self.tagged(lhs)?;
        let t = self.tagged(rhs)?;
        if self.presentation.is_none() && self.build_error.is_none() {
            match build_presentation(&self.alg, &self.sub, &self.ids, self.depth, &self.budget) {
                Ok(p) => self.presentation = Some(p),
                Err(e) => self.build_error = Some(e.to_string()),
            }
        }
        let prove = match &mut self.presentation {
            Some(p) => p.prove_equal(&s, &t),
            None => ProveOutcome::Unknown {
                reason: format!(
                    "presentation not built: {}",
                    self.build_error.as_deref().unwrap_or("unknown")
                ),
            },
        };
        if let ProveOutcome::Proven = prove {
            return Ok(EqDecision::Equal);
        }
        match refute_tagged(
            &self.alg,
            &self.sub,
            &self.ids,
            &s,
            &t,
            self.max_c,
            &self.budget,
        ) {
            Ok(RefuteOutcome::Disproven(w)) => Ok(EqDecision::NotEqual(Some(w))),
            Ok(RefuteOutcome::Unknown) => {
                let ProveOutcome::Unknown { reason } = prove else {
                    unreachable!()
                };
                Ok(EqDecision::Undecided(reason))
            }
            Err(e) => Ok(EqDecision::Undecided(e.to_string())),
        }
    }
}

pub struct ModelContext {
    pub inst: ModelInstance,
    pub assignment: BTreeMap<String, FactoredInt>,
}

impl ModelContext {
    /// The pinned witness assignment: variable i gets the i-th prime.
    pub fn pinned(inst: ModelInstance, vars: &[String]) -> ModelContext {
        let n = inst.n();
        let assignment = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), FactoredInt::nth_prime(i, n)))
            .collect();
        ModelContext { inst, assignment }
    }

    fn eval(&self, split: &SplitTerm) -> Result<TaggedValue, TransferError> {
        let n = self.inst.n();
        let mut left = FactoredInt::one(n);
        let mut right = FactoredInt::one(n);
        let mut has_left = false;
        let mut has_right = false;
        let mut stack = vec![split];
        while let Some(t) = stack.pop() {
            match t {
                SplitTerm::Leaf(side, v) => {
                    let val = self
                        .assignment
                        .get(v)
                        .ok_or_else(|| TransferError::UnassignedVar(v.clone()))?;
                    match side {
                        Side::Left => {
                            left = left.mul(val);
                            has_left = true;
                        }
                        Side::Right => {
                            right = right.mul(val);
                            has_right = true;
                        }
                    }
                }
                SplitTerm::App(op, args) => {
                    if args.len() != 2 {
                        return Err(TransferError::NonProductOp(op.clone()));
                    }
                    stack.extend(args.iter());
                }
            }
        }
        Ok(match (has_left, has_right) {
            (_, false) => TaggedValue::PureLeft(left),
            (false, true) => TaggedValue::PureRight(right),
            (true, true) => TaggedValue::Mixed(left, right),
        })
    }

    fn decide(&self, lhs: &SplitTerm, rhs: &SplitTerm) -> Result<EqDecision, TransferError> {
        let a = self.eval(lhs)?;
        let b = self.eval(rhs)?;
        Ok(if self.inst.tagged_equal(&a, &b)? {
            EqDecision::Equal
        } else {
            EqDecision::NotEqual(None)
        })
    }
}

/// A word, an ordered variable list S, and an equality backend.
pub struct SplitContext {
    pub word: Term,
    pub vars: Vec<String>,
    pub backend: TransferBackend,
    pub max_vars: usize,
}

#[derive(Debug, Clone)]
pub enum TransferOutcome {
    Transferable,
    NotTransferable {
        witness: Partition3,
        refutation: Option<Box<RefutationWitness>>,
    },
    Unknown {
        undecided: Vec<(Partition3, String)>,
    },
}

#[derive(Debug, Clone)]
pub enum DominionOutcome {
    Proven,
    Disproven {
        witness: Partition3,
        refutation: Option<Box<RefutationWitness>>,
    },
    Unknown {
        undecided: Vec<(Partition3, String)>,
    },
}

impl SplitContext {
    pub fn new(
        word: Term,
        vars: Vec<String>,
        backend: TransferBackend,
    ) -> Result<SplitContext, TransferError> {
        SplitContext::with_var_cap(word, vars, backend, DEFAULT_MAX_SPLIT_VARS)
    }

    pub fn with_var_cap(
        word: Term,
        vars: Vec<String>,
        backend: TransferBackend,
        max_vars: usize,
    ) -> Result<SplitContext, TransferError> {
        if vars.len() > max_vars {
            return Err(TransferError::TooManyVars(vars.len(), max_vars));
        }
        for v in word.vars() {
            if !vars.contains(&v) {
                return Err(TransferError::UnboundWordVar(v));
            }
        }
        Ok(SplitContext {
            word,
            vars,
            backend,
            max_vars,
        })
    }

    pub fn full_mask(&self) -> u32 {
        if self.vars.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.vars.len()) - 1
        }
    }

    fn names(&self, mask: u32) -> Vec<String> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| v.clone())
            .collect()
    }

    fn decide(&mut self, lhs: &SplitTerm, rhs: &SplitTerm) -> Result<EqDecision, TransferError> {
        match &mut self.backend {
            TransferBackend::Coproduct(c) => c.decide(lhs, rhs),
            TransferBackend::Model(m) => m.decide(lhs, rhs),
        }
    }

    /// Decides transferability of T over B with respect to W(x): enumerates
    /// every partition S∖T = S1 ⊔ S2 as an ascending bit counter (bit j set
    /// routes the j-th remaining variable to S1) and compares
    /// W_{S1∪T,S2}(x) with W_{S1,T∪S2}(x). The first refuted partition is
    /// the reported witness.
    pub fn is_transferable(&mut self, t_mask: u32) -> Result<TransferOutcome, TransferError> {
        if t_mask & !self.full_mask() != 0 {
            return Err(TransferError::BadSubset);
        }
        let rest: Vec<usize> = (0..self.vars.len())
            .filter(|i| t_mask >> i & 1 == 0)
            .collect();
        let mut undecided = Vec::new();
        for k in 0..(1u64 << rest.len()) {
            let mut s1 = 0u32;
            for (j, &pos) in rest.iter().enumerate() {
                if k >> j & 1 == 1 {
                    s1 |= 1 << pos;
                }
            }
            let s2 = self.full_mask() & !(s1 | t_mask);
            let part = Partition3 { s1, t: t_mask, s2 };
            let lhs = split_value(
                &self.word,
                &self.vars,
                &self.names(s1 | t_mask),
                &self.names(s2),
            )?;
            let rhs = split_value(
                &self.word,
                &self.vars,
                &self.names(s1),
                &self.names(t_mask | s2),
            )?;
            match self.decide(&lhs, &rhs)? {
                EqDecision::Equal => {}
                EqDecision::NotEqual(refutation) => {
                    return Ok(TransferOutcome::NotTransferable {
                        witness: part,
                        refutation,
                    });
                }
                EqDecision::Undecided(reason) => undecided.push((part, reason)),
            }
        }
        if undecided.is_empty() {
            Ok(TransferOutcome::Transferable)
        } else {
            Ok(TransferOutcome::Unknown { undecided })
        }
    }

    /// Dominion membership of W(x): S itself transferable. The only
    /// partition checked for T = S is (∅, ∅), which is exactly the
    /// agreement W_{S,∅}(x) = W_{∅,S}(x) the criterion requires.
    pub fn in_dominion(&mut self) -> Result<DominionOutcome, TransferError> {
        Ok(match self.is_transferable(self.full_mask())? {
            TransferOutcome::Transferable => DominionOutcome::Proven,
            TransferOutcome::NotTransferable {
                witness,
                refutation,
            } => DominionOutcome::Disproven {
                witness,
                refutation,
            },
            TransferOutcome::Unknown { undecided } => DominionOutcome::Unknown { undecided },
        })
    }
}

/// Builds the product word x_1⋯x_n (left-nested) over `mul`.
pub fn product_word(vars: &[String]) -> Term {
    let mut it = vars.iter();
    let first = it.next().expect("product word needs at least one variable");
    let mut term = Term::var(first.clone());
    for v in it {
        term = Term::app("mul", vec![term, Term::var(v.clone())]);
    }
    term
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ElemSet;
    use crate::term::{parse_term, Signature};

    fn model_ctx(n: usize, m: usize) -> SplitContext {
        let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let inst = ModelInstance::new(n, m).unwrap();
        let backend = TransferBackend::Model(ModelContext::pinned(inst, &vars));
        SplitContext::new(product_word(&vars), vars, backend).unwrap()
    }

    #[test]
    fn split_value_tags_leaves() {
        let sig = Signature::new([("mul", 2)]).unwrap();
        let word = parse_term("(mul x (mul y z))", &sig).unwrap();
        let vars = vec!["x".to_string(), "y".to_string(), "z".to_string()];
        let all_left = split_value(&word, &vars, &vars, &[]).unwrap();
        assert_eq!(all_left.to_string(), "(mul L:x (mul L:y L:z))");
        let all_right = split_value(&word, &vars, &[], &vars).unwrap();
        assert_eq!(all_right.to_string(), "(mul R:x (mul R:y R:z))");
        let mixed = split_value(&word, &vars, &vars[..1], &vars[1..]).unwrap();
        assert_eq!(mixed.to_string(), "(mul L:x (mul R:y R:z))");
        assert!(split_value(&word, &vars, &vars[..2], &vars[1..]).is_err());
    }

    #[test]
    fn model_split_evaluates_to_tagged_pair() {
        let ctx = model_ctx(3, 2);
        let TransferBackend::Model(m) = &ctx.backend else {
            unreachable!()
        };
        let split = split_value(
            &ctx.word,
            &ctx.vars,
            &[ctx.vars[0].clone()],
            &[ctx.vars[1].clone(), ctx.vars[2].clone()],
        )
        .unwrap();
        let v = m.eval(&split).unwrap();
        match v {
            TaggedValue::Mixed(l, r) => {
                assert_eq!(l.exps(), &[1, 0, 0]);
                assert_eq!(r.exps(), &[0, 1, 1]);
            }
            other => panic!("expected mixed value, got {other:?}"),
        }
    }

    #[test]
    fn empty_subset_is_transferable() {
        let mut ctx = model_ctx(4, 2);
        assert!(matches!(
            ctx.is_transferable(0).unwrap(),
            TransferOutcome::Transferable
        ));
    }

    #[test]
    fn model_transferable_collection_is_principal() {
        for (n, m) in [(4, 2), (4, 3), (5, 2), (4, 0)] {
            let mut ctx = model_ctx(n, m);
            let inst = ModelInstance::new(n, m).unwrap();
            for t in 0..(1u32 << n) {
                let got = ctx.is_transferable(t).unwrap();
                let expect = inst.transferable_subset(t);
                match got {
                    TransferOutcome::Transferable => assert!(expect, "n={n} m={m} T={t:b}"),
                    TransferOutcome::NotTransferable { .. } => {
                        assert!(!expect, "n={n} m={m} T={t:b}")
                    }
                    TransferOutcome::Unknown { .. } => panic!("model backend is total"),
                }
            }
        }
    }

    #[test]
    fn single_variable_word_dominion_matches_b() {
        // W = x1, S = {x1}: in dominion iff x1 ∈ B; a bare prime never is (m = 2)
        let vars = vec!["x1".to_string()];
        let inst = ModelInstance::new(2, 2).unwrap();
        let backend = TransferBackend::Model(ModelContext::pinned(inst, &vars));
        let mut ctx = SplitContext::new(Term::var("x1"), vars, backend).unwrap();
        assert!(matches!(
            ctx.in_dominion().unwrap(),
            DominionOutcome::Disproven { .. }
        ));

        // with x1 assigned M itself, the value is in B
        let vars = vec!["x1".to_string()];
        let inst = ModelInstance::new(2, 2).unwrap();
        let m = inst.modulus();
        let assignment = [("x1".to_string(), m)].into_iter().collect();
        let backend = TransferBackend::Model(ModelContext { inst, assignment });
        let mut ctx = SplitContext::new(Term::var("x1"), vars, backend).unwrap();
        assert!(matches!(
            ctx.in_dominion().unwrap(),
            DominionOutcome::Proven
        ));
    }

    #[test]
    fn full_product_word_is_in_dominion() {
        // W(x) = x1⋯x5 evaluates into B (all primes present), so S transfers
        let mut ctx = model_ctx(5, 2);
        assert!(matches!(
            ctx.in_dominion().unwrap(),
            DominionOutcome::Proven
        ));
    }

    #[test]
    fn zigzag_dominion_via_coproduct_backend() {
        let (alg, sub) = crate::testfix::zigzag_fixture();
        let sig = Signature::new([("mul", 2)]).unwrap();
        let ids = vec![Identity::new(
            parse_term("(mul (mul x y) z)", &sig).unwrap(),
            parse_term("(mul x (mul y z))", &sig).unwrap(),
        )];
        let word = parse_term("(mul (mul x y) z)", &sig).unwrap();
        let assignment: BTreeMap<String, usize> = [
            ("x".to_string(), 4),
            ("y".to_string(), 1),
            ("z".to_string(), 4),
        ]
        .into_iter()
        .collect();
        let backend = TransferBackend::Coproduct(CoproductContext::new(
            alg,
            sub,
            ids,
            assignment,
            1,
            3,
            Budget::default(),
        ));
        let vars = vec!["x".to_string(), "y".to_string(), "z".to_string()];
        let mut ctx = SplitContext::new(word, vars, backend).unwrap();
        assert!(matches!(
            ctx.in_dominion().unwrap(),
            DominionOutcome::Proven
        ));
        // {y} is transferable: its value lies in B
        let t_y = 0b010;
        assert!(matches!(
            ctx.is_transferable(t_y).unwrap(),
            TransferOutcome::Transferable
        ));
    }

    #[test]
    fn coproduct_backend_refutes_outside_dominion() {
        // 2-element semilattice, B = {1} (the top is closed), W = x with x = 0
        let sig = Signature::new([("mul", 2)]).unwrap();
        let table = vec![0, 0, 0, 1];
        let alg = FiniteAlgebra::new(sig.clone(), 2, vec![table]).unwrap();
        let sub = Subalgebra::checked(&alg, ElemSet::from_elems([1])).unwrap();
        let ids = vec![Identity::new(
            parse_term("(mul (mul x y) z)", &sig).unwrap(),
            parse_term("(mul x (mul y z))", &sig).unwrap(),
        )];
        let assignment = [("x".to_string(), 0)].into_iter().collect();
        let backend = TransferBackend::Coproduct(CoproductContext::new(
            alg,
            sub,
            ids,
            assignment,
            1,
            3,
            Budget::default(),
        ));
        let mut ctx = SplitContext::new(Term::var("x"), vec!["x".to_string()], backend).unwrap();
        match ctx.in_dominion().unwrap() {
            DominionOutcome::Disproven { refutation, .. } => {
                assert!(refutation.is_some());
            }
            other => panic!("expected Disproven, got {other:?}"),
        }
    }
}
