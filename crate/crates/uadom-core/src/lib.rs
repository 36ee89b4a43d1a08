//! Workbench for dominions of subalgebras in varieties of algebras:
//! transferable sets, equational-array certificates, amalgamated-coproduct
//! equality (congruence closure plus model-based refutation), and the
//! combinatorics of transfer systems and pre-transfer systems.

pub mod algebra;
pub mod arrays;
pub mod budget;
pub mod coproduct;
pub mod files;
pub mod model;
pub mod samples;
pub mod term;
pub mod transfer;
pub mod tsys;

#[cfg(test)]
pub(crate) mod testfix;

pub use algebra::{
    check_identity, dominion_upper, enumerate_homomorphisms, enumerate_models, generate_subalgebra,
    AlgebraError, DominionUpper, ElemSet, FiniteAlgebra, Hom, Identity, IdentityCheck,
    SeparationWitness, Subalgebra,
};
pub use arrays::{
    b_star, certify, certify_shared, find_zigzag_instance, validate_array, validate_shared,
    verify_certificate, Certificate, EquationalArray, SharedArray, ZigzagInstance,
};
pub use budget::{Budget, BudgetExceeded};
pub use coproduct::{
    build_presentation, refute_equal, refute_tagged, CoproductPresentation, ProveOutcome,
    RefuteOutcome, Side, TaggedElement, TaggedTerm,
};
pub use model::{FactoredInt, ModelInstance, TaggedValue};
pub use term::{
    parse_term, parse_term_with_depth, substitute, Assignment, CompiledTerm, OpSym, Signature,
    SignatureError, Term, TermError, TermErrorKind, DEFAULT_MAX_DEPTH,
};
pub use transfer::{split_value, DominionOutcome, SplitContext, SplitTerm, TransferOutcome};
pub use tsys::{
    census, check_pre_transfer, dominion_witness, induced_system, is_transfer_system,
    least_closure, principal_system, GroundSet, PowersetPartition, SubsetCollection,
};
