//! Equational arrays, their validation in finite algebras, dominion
//! membership certificates (plain and shared-variable), certificate replay,
//! the B* closure, and the zigzag instance search.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    check_identity, enumerate_homomorphisms, enumerate_models, generate_subalgebra, ElemSet,
    FiniteAlgebra, Identity, IdentityCheck, Subalgebra,
};
use crate::budget::{checked_assignment_count, Budget, BudgetExceeded};
use crate::term::{substitute, Assignment, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArrayError {
    #[error("array shape: {0}")]
    Shape(String),
    #[error("algebra error: {0}")]
    Algebra(String),
    #[error("budget: {0}")]
    Budget(#[from] BudgetExceeded),
}

/// An equational array of size m and signature (n_1..n_m): outer words
/// W_1..W_m in m letters a1..am, and inner words w_ij in the letters
/// x1..x{n_j} of column j. Each column has its own variable namespace; a
/// variable shared between columns needs the shared-variable form below.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationalArray {
    pub nsig: Vec<usize>,
    pub outer: Vec<Term>,
    pub inner: Vec<Vec<Term>>,
}

/// Namespaced variable for column `j` (1-based), position `k` (1-based).
pub fn block_var(j: usize, k: usize) -> String {
    format!("x{j}_{k}")
}

impl EquationalArray {
    pub fn m(&self) -> usize {
        self.nsig.len()
    }

    /// The identity array of size 1: W1(x) = w11(x) = x.
    pub fn identity_array() -> EquationalArray {
        EquationalArray {
            nsig: vec![1],
            outer: vec![Term::var("a1")],
            inner: vec![vec![Term::var("x1")]],
        }
    }

    pub fn check_shape(&self) -> Result<(), ArrayError> {
        let m = self.m();
        if m == 0 {
            return Err(ArrayError::Shape("array size must be positive".into()));
        }
        if self.outer.len() != m || self.inner.len() != m {
            return Err(ArrayError::Shape(format!(
                "expected {m} outer words and {m} inner rows"
            )));
        }
        let outer_vars: Vec<String> = (1..=m).map(|j| format!("a{j}")).collect();
        for (i, w) in self.outer.iter().enumerate() {
            for v in w.vars() {
                if !outer_vars.contains(&v) {
                    return Err(ArrayError::Shape(format!(
                        "outer word W{} uses `{v}`, allowed letters are a1..a{m}",
                        i + 1
                    )));
                }
            }
        }
        for (i, row) in self.inner.iter().enumerate() {
            if row.len() != m {
                return Err(ArrayError::Shape(format!(
                    "inner row {} has {} words",
                    i + 1,
                    row.len()
                )));
            }
            for (j, w) in row.iter().enumerate() {
                let nj = self.nsig[j];
                for v in w.vars() {
                    let ok = (1..=nj).any(|k| v == format!("x{k}"));
                    if !ok {
                        return Err(ArrayError::Shape(format!(
                            "inner word w{}{} uses `{v}`, allowed letters are x1..x{nj}",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Row i (0-based) composed: W_{i+1}(w_{i+1,1}(x_1),…,w_{i+1,m}(x_m)),
    /// with column j's letters renamed to the block namespace x{j}_{k}.
    pub fn row_term(&self, i: usize) -> Term {
        let m = self.m();
        let mut outer_subst = BTreeMap::new();
        for j in 0..m {
            let mut inner_subst = BTreeMap::new();
            for k in 1..=self.nsig[j] {
                inner_subst.insert(format!("x{k}"), Term::var(block_var(j + 1, k)));
            }
            outer_subst.insert(
                format!("a{}", j + 1),
                substitute(&self.inner[i][j], &inner_subst),
            );
        }
        substitute(&self.outer[i], &outer_subst)
    }

    /// The diagonal word w_ii in the block namespace of column i (0-based).
    pub fn diagonal_term(&self, i: usize) -> Term {
        let mut inner_subst = BTreeMap::new();
        for k in 1..=self.nsig[i] {
            inner_subst.insert(format!("x{k}"), Term::var(block_var(i + 1, k)));
        }
        substitute(&self.inner[i][i], &inner_subst)
    }

    /// All block variables in block order, flattened.
    pub fn block_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (j, &nj) in self.nsig.iter().enumerate() {
            for k in 1..=nj {
                out.push(block_var(j + 1, k));
            }
        }
        out
    }
}

/// The shared-variable size-2 form: blocks x1..x{m1} and z1..z{m2}, plus a
/// shared block y1..y{m3} whose values must lie in B. The single identity
/// W1(w11(x,y), w12(z,y)) = W2(w21(x,y), w22(z,y)) must hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedArray {
    pub m1: usize,
    pub m2: usize,
    pub m3: usize,
    pub outer: [Term; 2],
    pub w11: Term,
    pub w12: Term,
    pub w21: Term,
    pub w22: Term,
}

impl SharedArray {
    /// The semigroup zigzag: w11 = xy, w12 = z, w21 = x, w22 = yz with one
    /// variable per block; the identity is (xy)z = x(yz).
    pub fn zigzag() -> SharedArray {
        let mul = |a: Term, b: Term| Term::app("mul", vec![a, b]);
        SharedArray {
            m1: 1,
            m2: 1,
            m3: 1,
            outer: [
                mul(Term::var("a1"), Term::var("a2")),
                mul(Term::var("a1"), Term::var("a2")),
            ],
            w11: mul(Term::var("x1"), Term::var("y1")),
            w12: Term::var("z1"),
            w21: Term::var("x1"),
            w22: mul(Term::var("y1"), Term::var("z1")),
        }
    }

    pub fn check_shape(&self) -> Result<(), ArrayError> {
        let allowed = |w: &Term, blocks: &[(char, usize)], name: &str| -> Result<(), ArrayError> {
            for v in w.vars() {
                let ok = blocks
                    .iter()
                    .any(|&(c, mk)| (1..=mk).any(|k| v == format!("{c}{k}")));
                if !ok {
                    return Err(ArrayError::Shape(format!("word {name} uses `{v}`")));
                }
            }
            Ok(())
        };
        for (i, w) in self.outer.iter().enumerate() {
            allowed(w, &[('a', 2)], &format!("W{}", i + 1))?;
        }
        allowed(&self.w11, &[('x', self.m1), ('y', self.m3)], "w11")?;
        allowed(&self.w21, &[('x', self.m1), ('y', self.m3)], "w21")?;
        allowed(&self.w12, &[('z', self.m2), ('y', self.m3)], "w12")?;
        allowed(&self.w22, &[('z', self.m2), ('y', self.m3)], "w22")?;
        Ok(())
    }

    /// Row r ∈ {0,1} composed over the disjoint namespaces x/z/y.
    pub fn row_term(&self, r: usize) -> Term {
        let (w1, w2) = if r == 0 {
            (&self.w11, &self.w12)
        } else {
            (&self.w21, &self.w22)
        };
        let mut outer_subst = BTreeMap::new();
        outer_subst.insert("a1".to_string(), w1.clone());
        outer_subst.insert("a2".to_string(), w2.clone());
        substitute(&self.outer[r], &outer_subst)
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = (1..=self.m1).map(|k| format!("x{k}")).collect();
        out.extend((1..=self.m2).map(|k| format!("z{k}")));
        out.extend((1..=self.m3).map(|k| format!("y{k}")));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArrayValidation {
    Holds,
    Counterexample {
        algebra: usize,
        row: usize,
        assignment: Assignment,
    },
}

/// Exhaustively checks each adjacent pair of the m-fold chain in each
/// supplied algebra.
pub fn validate_array(
    arr: &EquationalArray,
    algebras: &[FiniteAlgebra],
    budget: &Budget,
) -> Result<ArrayValidation, ArrayError> {
    arr.check_shape()?;
    for (ai, alg) in algebras.iter().enumerate() {
        for i in 0..arr.m() - 1 {
            let id = Identity::new(arr.row_term(i), arr.row_term(i + 1));
            match check_identity(alg, &id, budget)? {
                IdentityCheck::Holds => {}
                IdentityCheck::Counterexample(assignment) => {
                    return Ok(ArrayValidation::Counterexample {
                        algebra: ai,
                        row: i,
                        assignment,
                    });
                }
            }
        }
    }
    Ok(ArrayValidation::Holds)
}

/// The single shared-variable identity, checked in each supplied algebra.
pub fn validate_shared(
    sh: &SharedArray,
    algebras: &[FiniteAlgebra],
    budget: &Budget,
) -> Result<ArrayValidation, ArrayError> {
    sh.check_shape()?;
    for (ai, alg) in algebras.iter().enumerate() {
        let id = Identity::new(sh.row_term(0), sh.row_term(1));
        match check_identity(alg, &id, budget)? {
            IdentityCheck::Holds => {}
            IdentityCheck::Counterexample(assignment) => {
                return Ok(ArrayValidation::Counterexample {
                    algebra: ai,
                    row: 0,
                    assignment,
                });
            }
        }
    }
    Ok(ArrayValidation::Holds)
}

/// Whether array validity was checked in finite algebras or accepted as an
/// axiom of the ambient variety.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArrayValidity {
    Checked,
    Assumed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertStep {
    /// Exchange f(w_ii(x_i)) for g(w_ii(x_i)): sound because the witness
    /// value lies in B. Blocks are 1-based.
    BSwap { block: usize, witness: usize },
    /// Rewrite row `from_row` to row `to_row` by the array identity.
    Rewrite { from_row: usize, to_row: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertKind {
    Plain { array: EquationalArray },
    Shared { array: SharedArray },
}

/// A replayable equality chain witnessing dominion membership of `value`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertKind,
    pub alg: FiniteAlgebra,
    pub sub: Subalgebra,
    pub assignment: Assignment,
    pub value: usize,
    pub steps: Vec<CertStep>,
    pub validity: ArrayValidity,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertifyError {
    #[error("array error: {0}")]
    Array(#[from] ArrayError),
    #[error("block {block} hypothesis fails: w_{block}{block} evaluates to {value} outside B")]
    HypothesisFailure { block: usize, value: usize },
    #[error("shared value y{pos} = {value} lies outside B")]
    SharedOutsideB { pos: usize, value: usize },
    #[error("block {0} has the wrong number of values")]
    BlockWidth(usize),
    #[error("evaluation error: {0}")]
    Eval(String),
}

fn eval(alg: &FiniteAlgebra, t: &Term, asg: &Assignment) -> Result<usize, CertifyError> {
    alg.evaluate(t, asg)
        .map_err(|e| CertifyError::Eval(e.to_string()))
}

/// Checks w_ii(x_i) ∈ B for every block and emits the 2m−1-step chain for
/// W_1(w_11(x_1),…,w_1m(x_m)).
pub fn certify(
    arr: &EquationalArray,
    alg: &FiniteAlgebra,
    sub: &Subalgebra,
    blocks: &[Vec<usize>],
    validity: ArrayValidity,
) -> Result<Certificate, CertifyError> {
    arr.check_shape()?;
    let m = arr.m();
    if blocks.len() != m {
        return Err(CertifyError::BlockWidth(blocks.len()));
    }
    let mut assignment = Assignment::new();
    for (j, block) in blocks.iter().enumerate() {
        if block.len() != arr.nsig[j] {
            return Err(CertifyError::BlockWidth(j + 1));
        }
        for (k, &v) in block.iter().enumerate() {
            assignment.insert(block_var(j + 1, k + 1), v);
        }
    }
    let mut steps = Vec::with_capacity(2 * m - 1);
    for i in 0..m {
        let witness = eval(alg, &arr.diagonal_term(i), &assignment)?;
        if !sub.contains(witness) {
            return Err(CertifyError::HypothesisFailure {
                block: i + 1,
                value: witness,
            });
        }
        steps.push(CertStep::BSwap {
            block: i + 1,
            witness,
        });
        if i + 1 < m {
            steps.push(CertStep::Rewrite {
                from_row: i + 1,
                to_row: i + 2,
            });
        }
    }
    let value = eval(alg, &arr.row_term(0), &assignment)?;
    Ok(Certificate {
        kind: CertKind::Plain { array: arr.clone() },
        alg: alg.clone(),
        sub: sub.clone(),
        assignment,
        value,
        steps,
        validity,
    })
}

/// The shared-variable counterpart: all y-values must lie in B, and both
/// diagonal words must evaluate into B.
pub fn certify_shared(
    sh: &SharedArray,
    alg: &FiniteAlgebra,
    sub: &Subalgebra,
    x1: &[usize],
    x2: &[usize],
    y: &[usize],
    validity: ArrayValidity,
) -> Result<Certificate, CertifyError> {
    sh.check_shape()?;
    if x1.len() != sh.m1 {
        return Err(CertifyError::BlockWidth(1));
    }
    if x2.len() != sh.m2 {
        return Err(CertifyError::BlockWidth(2));
    }
    if y.len() != sh.m3 {
        return Err(CertifyError::BlockWidth(3));
    }
    let mut assignment = Assignment::new();
    for (k, &v) in x1.iter().enumerate() {
        assignment.insert(format!("x{}", k + 1), v);
    }
    for (k, &v) in x2.iter().enumerate() {
        assignment.insert(format!("z{}", k + 1), v);
    }
    for (k, &v) in y.iter().enumerate() {
        if !sub.contains(v) {
            return Err(CertifyError::SharedOutsideB {
                pos: k + 1,
                value: v,
            });
        }
        assignment.insert(format!("y{}", k + 1), v);
    }
    let w11 = eval(alg, &sh.w11, &assignment)?;
    if !sub.contains(w11) {
        return Err(CertifyError::HypothesisFailure {
            block: 1,
            value: w11,
        });
    }
    let w22 = eval(alg, &sh.w22, &assignment)?;
    if !sub.contains(w22) {
        return Err(CertifyError::HypothesisFailure {
            block: 2,
            value: w22,
        });
    }
    let steps = vec![
        CertStep::BSwap {
            block: 1,
            witness: w11,
        },
        CertStep::Rewrite {
            from_row: 1,
            to_row: 2,
        },
        CertStep::BSwap {
            block: 2,
            witness: w22,
        },
    ];
    let value = eval(alg, &sh.row_term(0), &assignment)?;
    Ok(Certificate {
        kind: CertKind::Shared { array: sh.clone() },
        alg: alg.clone(),
        sub: sub.clone(),
        assignment,
        value,
        steps,
        validity,
    })
}

#[derive(Debug, Clone)]
pub enum Verification {
    Verified,
    /// Structural replay failed at this step index (0-based).
    Broken {
        step: usize,
    },
    /// A homomorphism pair separated the certified element: a soundness
    /// violation, never expected for certificates produced here.
    Separated {
        codomain: FiniteAlgebra,
        f: Vec<usize>,
        g: Vec<usize>,
    },
}

/// Structural replay of every step, then an empirical separation search
/// over homomorphism pairs agreeing on B into the supplied codomains.
pub fn verify_certificate(
    cert: &Certificate,
    codomains: &[FiniteAlgebra],
    max_c: usize,
    _budget: &Budget,
) -> Result<Verification, CertifyError> {
    let alg = &cert.alg;
    let sub = &cert.sub;
    let (diag, row): (Box<dyn Fn(usize) -> Term>, Box<dyn Fn(usize) -> Term>) = match &cert.kind {
        CertKind::Plain { array } => {
            array.check_shape()?;
            let a1 = array.clone();
            let a2 = array.clone();
            (
                Box::new(move |i| a1.diagonal_term(i)),
                Box::new(move |i| a2.row_term(i)),
            )
        }
        CertKind::Shared { array } => {
            array.check_shape()?;
            for (k, _) in (1..=array.m3).enumerate() {
                let name = format!("y{}", k + 1);
                let Some(&v) = cert.assignment.get(&name) else {
                    return Ok(Verification::Broken { step: 0 });
                };
                if !sub.contains(v) {
                    return Ok(Verification::Broken { step: 0 });
                }
            }
            let a1 = array.clone();
            let a2 = array.clone();
            (
                Box::new(move |i| {
                    if i == 0 {
                        a1.w11.clone()
                    } else {
                        a1.w22.clone()
                    }
                }),
                Box::new(move |i| a2.row_term(i)),
            )
        }
    };
    for (si, step) in cert.steps.iter().enumerate() {
        match step {
            CertStep::BSwap { block, witness } => {
                let got = eval(alg, &diag(block - 1), &cert.assignment)?;
                if got != *witness || !sub.contains(got) {
                    return Ok(Verification::Broken { step: si });
                }
            }
            CertStep::Rewrite { from_row, to_row } => {
                let a = eval(alg, &row(from_row - 1), &cert.assignment)?;
                let b = eval(alg, &row(to_row - 1), &cert.assignment)?;
                if a != b {
                    return Ok(Verification::Broken { step: si });
                }
            }
        }
    }
    if eval(alg, &row(0), &cert.assignment)? != cert.value {
        return Ok(Verification::Broken {
            step: cert.steps.len().saturating_sub(1),
        });
    }
    let b_elems: Vec<usize> = sub.members().iter().collect();
    for codomain in codomains.iter().filter(|c| c.size() <= max_c) {
        let homs = enumerate_homomorphisms(alg, codomain, &[]);
        for f in &homs {
            for g in &homs {
                if b_elems.iter().any(|&b| f[b] != g[b]) {
                    continue;
                }
                if f[cert.value] != g[cert.value] {
                    return Ok(Verification::Separated {
                        codomain: codomain.clone(),
                        f: f.clone(),
                        g: g.clone(),
                    });
                }
            }
        }
    }
    Ok(Verification::Verified)
}

/// Certified values over all assignments for each array, unioned with B,
/// then closed under the operations. A subalgebra between B and the
/// dominion.
pub fn b_star(
    alg: &FiniteAlgebra,
    sub: &Subalgebra,
    arrays: &[EquationalArray],
    budget: &Budget,
) -> Result<Subalgebra, ArrayError> {
    let mut collected = sub.members();
    for arr in arrays {
        arr.check_shape()?;
        let vars = arr.block_vars();
        checked_assignment_count(alg.size(), vars.len(), budget.max_assignments)?;
        let mut values = vec![0usize; vars.len()];
        'sweep: loop {
            let assignment: Assignment = vars.iter().cloned().zip(values.iter().copied()).collect();
            let mut all_in = true;
            for i in 0..arr.m() {
                let w = alg
                    .evaluate(&arr.diagonal_term(i), &assignment)
                    .map_err(|e| ArrayError::Algebra(e.to_string()))?;
                if !sub.contains(w) {
                    all_in = false;
                    break;
                }
            }
            if all_in {
                let v = alg
                    .evaluate(&arr.row_term(0), &assignment)
                    .map_err(|e| ArrayError::Algebra(e.to_string()))?;
                collected.insert(v);
            }
            if values.is_empty() || !bump(&mut values, alg.size()) {
                break 'sweep;
            }
        }
    }
    Ok(generate_subalgebra(alg, collected))
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

/// A semigroup with a subsemigroup and elements x, y, z with y, xy, yz ∈ B
/// and xyz ∉ B.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZigzagInstance {
    pub alg: FiniteAlgebra,
    pub sub: Subalgebra,
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub product: usize,
}

/// First zigzag configuration in deterministic order: semigroup sizes
/// ascending, tables lexicographic, subsemigroups by ascending bit pattern,
/// triples (x,y,z) lexicographic.
pub fn find_zigzag_instance(
    max_size: usize,
    budget: &Budget,
) -> Result<Option<ZigzagInstance>, BudgetExceeded> {
    let sig = crate::samples::semigroup_signature();
    let assoc = crate::samples::associativity(&sig);
    for n in 1..=max_size {
        let models = enumerate_models(&sig, n, std::slice::from_ref(&assoc), budget, false)
            .expect("associativity compiles");
        for model in models {
            let alg = model?;
            for mask in 1..(1u64 << n) {
                let members = ElemSet(mask);
                if !closed_under_mul(&alg, members) {
                    continue;
                }
                for x in 0..n {
                    for y in members.iter() {
                        let xy = alg.apply(0, &[x, y]);
                        if !members.contains(xy) {
                            continue;
                        }
                        for z in 0..n {
                            let yz = alg.apply(0, &[y, z]);
                            if !members.contains(yz) {
                                continue;
                            }
                            let product = alg.apply(0, &[xy, z]);
                            if !members.contains(product) {
                                let sub = Subalgebra::checked(&alg, members)
                                    .expect("closure was checked");
                                return Ok(Some(ZigzagInstance {
                                    alg,
                                    sub,
                                    x,
                                    y,
                                    z,
                                    product,
                                }));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

fn closed_under_mul(alg: &FiniteAlgebra, members: ElemSet) -> bool {
    for a in members.iter() {
        for b in members.iter() {
            if !members.contains(alg.apply(0, &[a, b])) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;
    use crate::term::parse_term;
    use crate::testfix::zigzag_fixture;

    fn semilattice(n: usize) -> FiniteAlgebra {
        let sig = samples::semigroup_signature();
        let mut table = Vec::new();
        for a in 0..n {
            for b in 0..n {
                table.push(a.min(b));
            }
        }
        FiniteAlgebra::new(sig, n, vec![table]).unwrap()
    }

    /// The class-2 commutator array: W1 = W2 = [a1,a2], w11 = w22 = z^n,
    /// w12 = w21 = z.
    pub(crate) fn commutator_array(n: usize) -> EquationalArray {
        let com = samples::commutator(Term::var("a1"), Term::var("a2"));
        EquationalArray {
            nsig: vec![1, 1],
            outer: vec![com.clone(), com],
            inner: vec![
                vec![samples::power(Term::var("x1"), n), Term::var("x1")],
                vec![Term::var("x1"), samples::power(Term::var("x1"), n)],
            ],
        }
    }

    #[test]
    fn identity_array_holds_everywhere() {
        let arr = EquationalArray::identity_array();
        // size-1 arrays have no adjacent pair, so the chain holds trivially
        let algs = [semilattice(2), semilattice(3)];
        assert_eq!(
            validate_array(&arr, &algs, &Budget::default()).unwrap(),
            ArrayValidation::Holds
        );
    }

    #[test]
    fn zigzag_shared_array_is_associativity() {
        let sh = SharedArray::zigzag();
        let (alg, _) = zigzag_fixture();
        assert_eq!(
            validate_shared(&sh, &[alg, semilattice(3)], &Budget::default()).unwrap(),
            ArrayValidation::Holds
        );
    }

    #[test]
    fn commutator_array_valid_in_heisenberg_fails_in_s3() {
        let h = samples::heisenberg_27();
        let arr = commutator_array(3);
        assert_eq!(
            validate_array(&arr, &[h.alg], &Budget::default()).unwrap(),
            ArrayValidation::Holds
        );
        // S3 as permutations of {0,1,2}: index by (image of 0,1,2) listed
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let compose =
            |p: &[usize; 3], q: &[usize; 3]| -> [usize; 3] { [p[q[0]], p[q[1]], p[q[2]]] };
        let sig = samples::group_signature();
        let n = 6;
        let mut mul = vec![0usize; n * n];
        let mut inv = vec![0usize; n];
        for (i, p) in perms.iter().enumerate() {
            for (j, q) in perms.iter().enumerate() {
                let r = compose(p, q);
                mul[i * n + j] = perms.iter().position(|s| *s == r).unwrap();
            }
        }
        for (i, p) in perms.iter().enumerate() {
            let mut pi = [0usize; 3];
            for (a, &b) in p.iter().enumerate() {
                pi[b] = a;
            }
            inv[i] = perms.iter().position(|s| *s == pi).unwrap();
        }
        let s3 = FiniteAlgebra::new(sig, n, vec![mul, inv, vec![0]]).unwrap();
        match validate_array(&arr, &[s3], &Budget::default()).unwrap() {
            ArrayValidation::Counterexample { algebra: 0, .. } => {}
            other => panic!("expected a counterexample in S3, got {other:?}"),
        }
    }

    #[test]
    fn certify_identity_array_for_b_elements() {
        let alg = semilattice(3);
        let sub = Subalgebra::checked(&alg, ElemSet::from_elems([0, 1])).unwrap();
        let arr = EquationalArray::identity_array();
        let cert = certify(&arr, &alg, &sub, &[vec![1]], ArrayValidity::Checked).unwrap();
        assert_eq!(cert.value, 1);
        assert_eq!(cert.steps.len(), 1);
        let out = verify_certificate(&cert, &[alg], 3, &Budget::default()).unwrap();
        assert!(matches!(out, Verification::Verified));
    }

    #[test]
    fn certify_reports_first_failing_block() {
        let alg = semilattice(3);
        let sub = Subalgebra::checked(&alg, ElemSet::from_elems([0])).unwrap();
        let arr = commutator_array(2);
        // semilattice: x^2 = x, so block 1 fails exactly when x1 ∉ B
        let sig = alg.sig().clone();
        let _ = sig;
        let err = certify(
            &arr,
            &alg,
            &sub,
            &[vec![2], vec![0]],
            ArrayValidity::Assumed,
        )
        .unwrap_err();
        match err {
            CertifyError::HypothesisFailure { block: 1, value: 2 } => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shared_zigzag_certificate_roundtrip() {
        let (alg, sub) = zigzag_fixture();
        let sh = SharedArray::zigzag();
        let cert =
            certify_shared(&sh, &alg, &sub, &[4], &[4], &[1], ArrayValidity::Checked).unwrap();
        assert_eq!(cert.value, 4);
        assert_eq!(cert.steps.len(), 3);
        // JSON round-trip
        let js = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&js).unwrap();
        assert_eq!(back, cert);
        let out = verify_certificate(&cert, &[alg], 5, &Budget::default()).unwrap();
        assert!(matches!(out, Verification::Verified));
    }

    #[test]
    fn shared_with_empty_y_block_degenerates_to_plain() {
        // m3 = 0: the shared form with no shared variables is an ordinary
        // size-2 array; the zigzag hypotheses collapse to products in B
        let (alg, sub) = zigzag_fixture();
        let mul = |a: Term, b: Term| Term::app("mul", vec![a, b]);
        let sh = SharedArray {
            m1: 1,
            m2: 1,
            m3: 0,
            outer: [
                mul(Term::var("a1"), Term::var("a2")),
                mul(Term::var("a1"), Term::var("a2")),
            ],
            w11: Term::var("x1"),
            w12: Term::var("z1"),
            w21: Term::var("x1"),
            w22: Term::var("z1"),
        };
        let cert =
            certify_shared(&sh, &alg, &sub, &[1], &[3], &[], ArrayValidity::Checked).unwrap();
        // 1·3 = 1 in the fixture
        assert_eq!(cert.value, 1);
        let out = verify_certificate(&cert, &[alg], 5, &Budget::default()).unwrap();
        assert!(matches!(out, Verification::Verified));
    }

    #[test]
    fn shared_rejects_y_outside_b() {
        let (alg, sub) = zigzag_fixture();
        let sh = SharedArray::zigzag();
        let err =
            certify_shared(&sh, &alg, &sub, &[4], &[4], &[4], ArrayValidity::Checked).unwrap_err();
        assert!(matches!(
            err,
            CertifyError::SharedOutsideB { pos: 1, value: 4 }
        ));
    }

    #[test]
    fn tampered_certificate_is_broken() {
        let (alg, sub) = zigzag_fixture();
        let sh = SharedArray::zigzag();
        let mut cert =
            certify_shared(&sh, &alg, &sub, &[4], &[4], &[1], ArrayValidity::Checked).unwrap();
        // tamper: claim a different witness for the block-1 swap
        cert.steps[0] = CertStep::BSwap {
            block: 1,
            witness: 4,
        };
        let out = verify_certificate(&cert, &[alg], 5, &Budget::default()).unwrap();
        assert!(matches!(out, Verification::Broken { step: 0 }));
    }

    #[test]
    fn b_star_of_identity_array_is_b() {
        let alg = semilattice(4);
        let sub = Subalgebra::checked(&alg, ElemSet::from_elems([0, 2])).unwrap();
        let arr = EquationalArray::identity_array();
        let bs = b_star(&alg, &sub, &[arr], &Budget::default()).unwrap();
        assert_eq!(bs.members(), sub.members());
    }

    #[test]
    fn b_star_is_monotone_in_the_array_list() {
        let h = samples::heisenberg_27();
        let seed: Vec<usize> = h.center.clone();
        let sub = Subalgebra::checked(&h.alg, ElemSet::from_elems(seed)).unwrap();
        let id = EquationalArray::identity_array();
        let com = commutator_array(3);
        let b1 = b_star(&h.alg, &sub, std::slice::from_ref(&id), &Budget::default()).unwrap();
        let b2 = b_star(&h.alg, &sub, &[id, com], &Budget::default()).unwrap();
        assert!(b1.members().is_subset(&b2.members()));
        assert!(sub.members().is_subset(&b1.members()));
    }

    #[test]
    fn zigzag_search_small_sizes_are_empty() {
        assert!(find_zigzag_instance(1, &Budget::default())
            .unwrap()
            .is_none());
        assert!(find_zigzag_instance(2, &Budget::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn zigzag_search_finds_the_frozen_instance_at_size_five() {
        let inst = find_zigzag_instance(5, &Budget::default())
            .unwrap()
            .unwrap();
        let (alg, sub) = zigzag_fixture();
        assert_eq!(inst.alg, alg);
        assert_eq!(inst.sub.members(), sub.members());
        assert_eq!((inst.x, inst.y, inst.z, inst.product), (4, 1, 4, 4));
    }

    #[test]
    fn composed_tau_array_validates() {
        // the product construction for closure under a binary operation:
        // two identity arrays glued through mul, checked as a plain array
        let mul = |a: Term, b: Term| Term::app("mul", vec![a, b]);
        let arr = EquationalArray {
            nsig: vec![1, 1],
            outer: vec![
                mul(Term::var("a1"), Term::var("a2")),
                mul(Term::var("a1"), Term::var("a2")),
            ],
            inner: vec![
                vec![Term::var("x1"), Term::var("x1")],
                vec![Term::var("x1"), Term::var("x1")],
            ],
        };
        let algs = [semilattice(3)];
        assert_eq!(
            validate_array(&arr, &algs, &Budget::default()).unwrap(),
            ArrayValidation::Holds
        );
        let sub = Subalgebra::checked(&algs[0], ElemSet::from_elems([0, 1])).unwrap();
        let cert = certify(
            &arr,
            &algs[0],
            &sub,
            &[vec![1], vec![0]],
            ArrayValidity::Checked,
        )
        .unwrap();
        // value = 1·0 = 0 in the semilattice
        assert_eq!(cert.value, 0);
    }

    #[test]
    fn parse_term_blocks_roundtrip() {
        // inner words written in the file syntax land in the right namespace
        let sig = samples::semigroup_signature();
        let w = parse_term("(mul x1 x2)", &sig).unwrap();
        let arr = EquationalArray {
            nsig: vec![2, 1],
            outer: vec![
                Term::app("mul", vec![Term::var("a1"), Term::var("a2")]),
                Term::app("mul", vec![Term::var("a1"), Term::var("a2")]),
            ],
            inner: vec![vec![w.clone(), Term::var("x1")], vec![w, Term::var("x1")]],
        };
        arr.check_shape().unwrap();
        let row = arr.row_term(0);
        assert_eq!(row.to_string(), "(mul (mul x1_1 x1_2) x2_1)");
    }
}
