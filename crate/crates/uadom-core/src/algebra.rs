//! Finite algebras as operation tables: identity checking, subalgebra
//! generation, homomorphism and finite-model enumeration, and the
//! brute-force dominion over-approximation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::budget::{checked_assignment_count, Budget, BudgetExceeded};
use crate::term::{Assignment, CompiledTerm, Signature, Term, TermError};

/// A set of elements of a finite algebra, as a bit vector. Carriers are
/// capped at 64 elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ElemSet(pub u64);

impl ElemSet {
    pub const EMPTY: ElemSet = ElemSet(0);

    pub fn full(size: usize) -> ElemSet {
        if size == 64 {
            ElemSet(u64::MAX)
        } else {
            ElemSet((1u64 << size) - 1)
        }
    }

    pub fn from_elems(elems: impl IntoIterator<Item = usize>) -> ElemSet {
        let mut s = ElemSet::EMPTY;
        for e in elems {
            s.insert(e);
        }
        s
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0 >> e & 1 == 1
    }

    pub fn insert(&mut self, e: usize) -> bool {
        let had = self.contains(e);
        self.0 |= 1 << e;
        !had
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(&self, other: &ElemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1)
    }
}

impl FromIterator<usize> for ElemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        ElemSet::from_elems(iter)
    }
}

impl fmt::Display for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let elems: Vec<String> = self.iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", elems.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("carrier size must be between 1 and 64, got {0}")]
    BadSize(usize),
    #[error("table for `{op}` has {found} entries, expected {expected}")]
    BadTableLength {
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("table entry {value} out of range for `{op}` (size {size})")]
    EntryOutOfRange {
        op: String,
        value: usize,
        size: usize,
    },
    #[error("element {0} out of range")]
    ElementOutOfRange(usize),
    #[error("set {members} is not closed: {op}{args:?} = {result} is outside")]
    NotClosed {
        members: ElemSet,
        op: String,
        args: Vec<usize>,
        result: usize,
    },
    #[error("term error: {0}")]
    Term(#[from] TermError),
}

/// A finite algebra: carrier `{0..n-1}` plus one total operation table per
/// signature symbol, stored row-major with the last argument index fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteAlgebra {
    sig: Signature,
    size: usize,
    tables: Vec<Vec<usize>>,
}

impl FiniteAlgebra {
    pub fn new(
        sig: Signature,
        size: usize,
        tables: Vec<Vec<usize>>,
    ) -> Result<FiniteAlgebra, AlgebraError> {
        if size == 0 || size > 64 {
            return Err(AlgebraError::BadSize(size));
        }
        if tables.len() != sig.ops().len() {
            return Err(AlgebraError::BadTableLength {
                op: "<missing>".into(),
                expected: sig.ops().len(),
                found: tables.len(),
            });
        }
        for (op, table) in sig.ops().iter().zip(&tables) {
            let expected = size.pow(op.arity as u32);
            if table.len() != expected {
                return Err(AlgebraError::BadTableLength {
                    op: op.name.clone(),
                    expected,
                    found: table.len(),
                });
            }
            if let Some(&bad) = table.iter().find(|&&v| v >= size) {
                return Err(AlgebraError::EntryOutOfRange {
                    op: op.name.clone(),
                    value: bad,
                    size,
                });
            }
        }
        Ok(FiniteAlgebra { sig, size, tables })
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn tables(&self) -> &[Vec<usize>] {
        &self.tables
    }

    pub fn apply(&self, op_idx: usize, args: &[usize]) -> usize {
        let mut idx = 0usize;
        for &a in args {
            idx = idx * self.size + a;
        }
        self.tables[op_idx][idx]
    }

    /// Values of all nullary operations.
    pub fn constants(&self) -> Vec<usize> {
        self.sig
            .ops()
            .iter()
            .enumerate()
            .filter(|(_, op)| op.arity == 0)
            .map(|(i, _)| self.tables[i][0])
            .collect()
    }

    /// Evaluates a term bottom-up by table lookup.
    pub fn evaluate(&self, term: &Term, asg: &Assignment) -> Result<usize, AlgebraError> {
        let vars = term.vars();
        let mut values = Vec::with_capacity(vars.len());
        for v in &vars {
            let val = *asg.get(v).ok_or_else(|| TermError {
                offset: 0,
                kind: crate::term::TermErrorKind::UnboundVariable(v.clone()),
            })?;
            if val >= self.size {
                return Err(AlgebraError::ElementOutOfRange(val));
            }
            values.push(val);
        }
        let compiled = CompiledTerm::compile(term, &self.sig, &vars)?;
        Ok(compiled.eval(&self.tables, self.size, &values))
    }
}

/// A subset of a carrier that is closed under all operations and contains
/// every constant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subalgebra {
    members: ElemSet,
}

impl Subalgebra {
    /// Validates closure and constant membership.
    pub fn checked(alg: &FiniteAlgebra, members: ElemSet) -> Result<Subalgebra, AlgebraError> {
        for e in members.iter() {
            if e >= alg.size() {
                return Err(AlgebraError::ElementOutOfRange(e));
            }
        }
        for c in alg.constants() {
            if !members.contains(c) {
                return Err(AlgebraError::NotClosed {
                    members,
                    op: "<constant>".into(),
                    args: vec![],
                    result: c,
                });
            }
        }
        let elems: Vec<usize> = members.iter().collect();
        for (op_idx, op) in alg.sig().ops().iter().enumerate() {
            if op.arity == 0 || elems.is_empty() {
                continue;
            }
            let mut args = vec![0usize; op.arity];
            let mut idx = vec![0usize; op.arity];
            loop {
                for (a, &i) in args.iter_mut().zip(&idx) {
                    *a = elems[i];
                }
                let r = alg.apply(op_idx, &args);
                if !members.contains(r) {
                    return Err(AlgebraError::NotClosed {
                        members,
                        op: op.name.clone(),
                        args: args.clone(),
                        result: r,
                    });
                }
                if !bump(&mut idx, elems.len()) {
                    break;
                }
            }
        }
        Ok(Subalgebra { members })
    }

    pub fn members(&self) -> ElemSet {
        self.members
    }

    pub fn contains(&self, e: usize) -> bool {
        self.members.contains(e)
    }
}

/// Odometer increment, last digit fastest. Returns false on wrap-around.
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

/// Least closed superset of `seed` containing all constants.
pub fn generate_subalgebra(alg: &FiniteAlgebra, seed: ElemSet) -> Subalgebra {
    let mut members = seed;
    for c in alg.constants() {
        members.insert(c);
    }
    loop {
        let mut grew = false;
        let elems: Vec<usize> = members.iter().collect();
        if elems.is_empty() {
            break;
        }
        for (op_idx, op) in alg.sig().ops().iter().enumerate() {
            if op.arity == 0 {
                continue;
            }
            let mut args = vec![0usize; op.arity];
            let mut idx = vec![0usize; op.arity];
            loop {
                for (a, &i) in args.iter_mut().zip(&idx) {
                    *a = elems[i];
                }
                grew |= members.insert(alg.apply(op_idx, &args));
                if !bump(&mut idx, elems.len()) {
                    break;
                }
            }
        }
        if !grew {
            break;
        }
    }
    Subalgebra { members }
}

/// An identity `lhs = rhs` between two terms over a shared signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identity {
    pub lhs: Term,
    pub rhs: Term,
}

impl Identity {
    pub fn new(lhs: Term, rhs: Term) -> Identity {
        Identity { lhs, rhs }
    }

    /// Distinct variables of both sides, left side first, in first-occurrence order.
    pub fn vars(&self) -> Vec<String> {
        let mut vars = self.lhs.vars();
        for v in self.rhs.vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        vars
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdentityCheck {
    Holds,
    Counterexample(Assignment),
}

/// Exhaustively checks an identity over all assignments, returning the
/// lexicographically first counterexample if any.
pub fn check_identity(
    alg: &FiniteAlgebra,
    id: &Identity,
    budget: &Budget,
) -> Result<IdentityCheck, BudgetExceeded> {
    let vars = id.vars();
    checked_assignment_count(alg.size(), vars.len(), budget.max_assignments)?;
    let lhs = CompiledTerm::compile(&id.lhs, alg.sig(), &vars).expect("identity lhs compiles");
    let rhs = CompiledTerm::compile(&id.rhs, alg.sig(), &vars).expect("identity rhs compiles");
    let mut values = vec![0usize; vars.len()];
    loop {
        let l = lhs.eval(alg.tables(), alg.size(), &values);
        let r = rhs.eval(alg.tables(), alg.size(), &values);
        if l != r {
            let asg: Assignment = vars.iter().cloned().zip(values.iter().copied()).collect();
            return Ok(IdentityCheck::Counterexample(asg));
        }
        if values.is_empty() || !bump(&mut values, alg.size()) {
            return Ok(IdentityCheck::Holds);
        }
    }
}

/// A total map between carriers, indexed by domain element.
pub type Hom = Vec<usize>;

/// All homomorphisms `domain -> codomain` extending `pin`, in the
/// deterministic order given by backtracking over domain elements in
/// ascending index with codomain values ascending.
pub fn enumerate_homomorphisms(
    domain: &FiniteAlgebra,
    codomain: &FiniteAlgebra,
    pin: &[(usize, usize)],
) -> Vec<Hom> {
    let mut state = HomSearch {
        domain,
        codomain,
        map: vec![None; domain.size()],
        trail: Vec::new(),
        out: Vec::new(),
    };
    for &(a, b) in pin {
        if !state.assign(a, b) {
            return Vec::new();
        }
    }
    // constants are forced
    for (op_idx, op) in domain.sig().ops().iter().enumerate() {
        if op.arity == 0 {
            let cd = domain.tables()[op_idx][0];
            let cc = codomain.tables()[op_idx][0];
            if !state.assign(cd, cc) {
                return Vec::new();
            }
        }
    }
    state.search();
    state.out
}

struct HomSearch<'a> {
    domain: &'a FiniteAlgebra,
    codomain: &'a FiniteAlgebra,
    map: Vec<Option<usize>>,
    trail: Vec<usize>,
    out: Vec<Hom>,
}

impl HomSearch<'_> {
    /// Assigns `map[a] = b` and propagates operation constraints.
    /// Returns false on conflict; the caller unwinds via the trail.
    fn assign(&mut self, a: usize, b: usize) -> bool {
        match self.map[a] {
            Some(prev) => return prev == b,
            None => {
                self.map[a] = Some(b);
                self.trail.push(a);
            }
        }
        // propagate: any fully-mapped argument tuple forces the image of its result
        let n = self.domain.size();
        for (op_idx, op) in self.domain.sig().ops().iter().enumerate() {
            if op.arity == 0 {
                continue;
            }
            let mut args = vec![0usize; op.arity];
            loop {
                if args.contains(&a) {
                    let imgs: Option<Vec<usize>> = args.iter().map(|&x| self.map[x]).collect();
                    if let Some(imgs) = imgs {
                        let result = self.domain.apply(op_idx, &args);
                        let image = self.codomain.apply(op_idx, &imgs);
                        if !self.assign(result, image) {
                            return false;
                        }
                    }
                }
                if !bump(&mut args, n) {
                    break;
                }
            }
        }
        true
    }

    fn search(&mut self) {
        let Some(next) = self.map.iter().position(Option::is_none) else {
            let hom: Hom = self.map.iter().map(|v| v.unwrap()).collect();
            self.out.push(hom);
            return;
        };
        for b in 0..self.codomain.size() {
            let mark = self.trail.len();
            if self.assign(next, b) {
                self.search();
            }
            while self.trail.len() > mark {
                let a = self.trail.pop().unwrap();
                self.map[a] = None;
            }
        }
    }
}

/// Streaming enumeration of all operation tables on `{0..n-1}` satisfying
/// the given identities, in lexicographic table order (operations in
/// signature order, cells row-major, values ascending).
pub struct ModelIter {
    sig: Signature,
    n: usize,
    op_base: Vec<usize>,
    cells: Vec<usize>, // usize::MAX = unassigned
    instances: Vec<WatchedInstance>,
    watch: Vec<Vec<u32>>,
    frontier: usize,
    started: bool,
    done: bool,
    steps: u64,
    max_steps: u64,
    iso_prune: bool,
}

const UNASSIGNED: usize = usize::MAX;

struct WatchedInstance {
    lhs: CompiledTerm,
    rhs: CompiledTerm,
    values: Vec<usize>,
}

enum PartialEval {
    Value {
        value: usize,
        max_read: Option<usize>,
    },
    Missing(usize),
}

impl WatchedInstance {
    /// Evaluation against a partially filled table, reporting either the
    /// value with the highest cell index read, or the first missing cell.
    fn eval_side(
        &self,
        side: &CompiledTerm,
        cells: &[usize],
        op_base: &[usize],
        n: usize,
    ) -> PartialEval {
        use crate::term::Instr;
        let mut stack: Vec<usize> = Vec::new();
        let mut max_read: Option<usize> = None;
        for ins in side.instructions() {
            match *ins {
                Instr::PushVar(slot) => stack.push(self.values[slot]),
                Instr::Apply { op, arity } => {
                    let base = stack.len() - arity;
                    let mut idx = 0usize;
                    for &a in &stack[base..] {
                        idx = idx * n + a;
                    }
                    let cell = op_base[op] + idx;
                    let v = cells[cell];
                    if v == UNASSIGNED {
                        return PartialEval::Missing(cell);
                    }
                    max_read = Some(max_read.map_or(cell, |m: usize| m.max(cell)));
                    stack.truncate(base);
                    stack.push(v);
                }
            }
        }
        PartialEval::Value {
            value: stack.pop().expect("eval_side: empty program"),
            max_read,
        }
    }
}

pub fn enumerate_models(
    sig: &Signature,
    n: usize,
    ids: &[Identity],
    budget: &Budget,
    iso_prune: bool,
) -> Result<ModelIter, AlgebraError> {
    if n == 0 || n > 64 {
        return Err(AlgebraError::BadSize(n));
    }
    let mut op_base = Vec::new();
    let mut total = 0usize;
    for op in sig.ops() {
        op_base.push(total);
        total += n.pow(op.arity as u32);
    }
    let mut instances = Vec::new();
    for id in ids {
        let vars = id.vars();
        let lhs = CompiledTerm::compile(&id.lhs, sig, &vars)?;
        let rhs = CompiledTerm::compile(&id.rhs, sig, &vars)?;
        let mut values = vec![0usize; vars.len()];
        loop {
            instances.push(WatchedInstance {
                lhs: lhs.clone(),
                rhs: rhs.clone(),
                values: values.clone(),
            });
            if values.is_empty() || !bump(&mut values, n) {
                break;
            }
        }
    }
    let mut it = ModelIter {
        sig: sig.clone(),
        n,
        op_base,
        cells: vec![UNASSIGNED; total],
        watch: vec![Vec::new(); total + 1],
        instances,
        frontier: 0,
        started: false,
        done: false,
        steps: 0,
        max_steps: budget.max_models,
        iso_prune,
    };
    // initial parking; a variable-only violated instance means no models at all
    for i in 0..it.instances.len() {
        if it.park(i as u32).is_some() {
            it.done = true;
        }
    }
    Ok(it)
}

impl ModelIter {
    /// Re-evaluates instance `i` and parks it: on the first missing cell if
    /// incomplete, else on the highest cell read so that a later change of
    /// any read cell forces a re-check before the next full table. Returns
    /// the conflict level (highest read cell) iff the instance is complete
    /// and violated — every extension keeping cells 0..=level unchanged is
    /// then violated too.
    fn park(&mut self, i: u32) -> Option<usize> {
        let inst = &self.instances[i as usize];
        let l = inst.eval_side(&inst.lhs, &self.cells, &self.op_base, self.n);
        match l {
            PartialEval::Missing(cell) => {
                self.watch[cell].push(i);
                None
            }
            PartialEval::Value {
                value: lv,
                max_read: lr,
            } => {
                let r = inst.eval_side(&inst.rhs, &self.cells, &self.op_base, self.n);
                match r {
                    PartialEval::Missing(cell) => {
                        self.watch[cell].push(i);
                        None
                    }
                    PartialEval::Value {
                        value: rv,
                        max_read: rr,
                    } => {
                        let h = lr.max(rr);
                        if let Some(h) = h {
                            self.watch[h].push(i);
                        }
                        if lv != rv {
                            // a violated read-free instance only occurs at
                            // construction time, which reports no models
                            Some(h.unwrap_or(0))
                        } else {
                            None
                        }
                    }
                }
            }
        }
    }

    /// Assigns the frontier cell and replays its parked instances. Returns
    /// the lowest conflict level among newly violated instances, if any.
    fn assign_frontier(&mut self, value: usize) -> Option<usize> {
        let cell = self.frontier;
        self.cells[cell] = value;
        self.frontier += 1;
        let parked = std::mem::take(&mut self.watch[cell]);
        let mut conflict: Option<usize> = None;
        for i in parked {
            // every drained instance re-parks, even after a conflict,
            // so the watch invariant survives value changes
            if let Some(h) = self.park(i) {
                conflict = Some(conflict.map_or(h, |c| c.min(h)));
            }
        }
        conflict
    }

    fn unassign_frontier(&mut self) -> usize {
        self.frontier -= 1;
        let v = self.cells[self.frontier];
        self.cells[self.frontier] = UNASSIGNED;
        v
    }

    fn current_algebra(&self) -> FiniteAlgebra {
        let mut tables = Vec::new();
        for (i, op) in self.sig.ops().iter().enumerate() {
            let base = self.op_base[i];
            let cnt = self.n.pow(op.arity as u32);
            tables.push(self.cells[base..base + cnt].to_vec());
        }
        FiniteAlgebra::new(self.sig.clone(), self.n, tables).expect("enumerated table is valid")
    }

    /// Lexicographic-minimality check across all carrier permutations.
    fn is_canonical(&self) -> bool {
        let n = self.n;
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            if !next_permutation(&mut perm) {
                return true;
            }
            if self.relabel_cmp(&perm) == std::cmp::Ordering::Greater {
                return false;
            }
        }
    }

    fn relabel_cmp(&self, perm: &[usize]) -> std::cmp::Ordering {
        // compare self.cells with the relabelled table, cell by cell
        let n = self.n;
        let mut inv = vec![0usize; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        for (i, op) in self.sig.ops().iter().enumerate() {
            let base = self.op_base[i];
            let k = op.arity;
            let mut args = vec![0usize; k];
            let mut idx = 0usize;
            loop {
                // relabelled(args) = perm[table(inv(args))]
                let mut src = 0usize;
                for &a in &args {
                    src = src * n + inv[a];
                }
                let relab = perm[self.cells[base + src]];
                match self.cells[base + idx].cmp(&relab) {
                    std::cmp::Ordering::Equal => {}
                    other => return other,
                }
                idx += 1;
                if k == 0 || !bump(&mut args, n) {
                    break;
                }
            }
        }
        std::cmp::Ordering::Equal
    }
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

impl Iterator for ModelIter {
    type Item = Result<FiniteAlgebra, BudgetExceeded>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let total = self.cells.len();
        let mut start = if !self.started {
            self.started = true;
            if total == 0 {
                self.done = true;
                return Some(Ok(self.current_algebra()));
            }
            0
        } else {
            // the previous call yielded a full assignment; resume past it
            self.unassign_frontier() + 1
        };
        loop {
            let mut next_start: Option<usize> = None;
            let mut v = start;
            while v < self.n {
                self.steps += 1;
                if self.steps > self.max_steps {
                    self.done = true;
                    return Some(Err(BudgetExceeded::new(
                        "model search steps",
                        self.steps,
                        self.max_steps,
                    )));
                }
                match self.assign_frontier(v) {
                    None => {
                        if self.frontier < total {
                            next_start = Some(0);
                            break;
                        }
                        if !self.iso_prune || self.is_canonical() {
                            return Some(Ok(self.current_algebra()));
                        }
                        v = self.unassign_frontier() + 1;
                    }
                    Some(conflict) => {
                        let cell = self.frontier - 1;
                        debug_assert!(conflict <= cell);
                        if conflict >= cell {
                            v = self.unassign_frontier() + 1;
                        } else {
                            // the violation reads only cells 0..=conflict,
                            // so every branch above it is dead: backjump
                            let mut resume = 0;
                            while self.frontier > conflict {
                                resume = self.unassign_frontier();
                            }
                            next_start = Some(resume + 1);
                            break;
                        }
                    }
                }
            }
            if let Some(s) = next_start {
                start = s;
                continue;
            }
            // exhausted values at this cell; backtrack
            if self.frontier == 0 {
                self.done = true;
                return None;
            }
            start = self.unassign_frontier() + 1;
        }
    }
}

/// A separating pair of homomorphisms for one excluded element.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub element: usize,
    pub codomain: FiniteAlgebra,
    pub f: Hom,
    pub g: Hom,
}

#[derive(Debug, Clone)]
pub struct DominionUpper {
    pub members: ElemSet,
    pub witnesses: Vec<SeparationWitness>,
}

/// Elements of `alg` never separated by a homomorphism pair agreeing on
/// `sub`, over every model of `ids` with at most `max_c` elements. A
/// superset of the dominion restricted to the tested codomains,
/// non-increasing in `max_c`.
pub fn dominion_upper(
    alg: &FiniteAlgebra,
    sub: &Subalgebra,
    ids: &[Identity],
    max_c: usize,
    budget: &Budget,
) -> Result<DominionUpper, BudgetExceeded> {
    let n = alg.size();
    let mut witness: Vec<Option<SeparationWitness>> = vec![None; n];
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
                    for a in 0..n {
                        if witness[a].is_none() && f[a] != g[a] {
                            witness[a] = Some(SeparationWitness {
                                element: a,
                                codomain: codomain.clone(),
                                f: f.clone(),
                                g: g.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    let members = ElemSet::from_elems((0..n).filter(|&a| witness[a].is_none()));
    Ok(DominionUpper {
        members,
        witnesses: witness.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    pub(crate) fn semigroup_sig() -> Signature {
        Signature::new([("mul", 2)]).unwrap()
    }

    pub(crate) fn assoc_identity(sig: &Signature) -> Identity {
        Identity::new(
            parse_term("(mul (mul x y) z)", sig).unwrap(),
            parse_term("(mul x (mul y z))", sig).unwrap(),
        )
    }

    fn min_semilattice(n: usize) -> FiniteAlgebra {
        let sig = semigroup_sig();
        let mut table = Vec::new();
        for a in 0..n {
            for b in 0..n {
                table.push(a.min(b));
            }
        }
        FiniteAlgebra::new(sig, n, vec![table]).unwrap()
    }

    #[test]
    fn evaluate_table_lookup() {
        let alg = min_semilattice(2);
        let sig = alg.sig().clone();
        let t = parse_term("(mul x y)", &sig).unwrap();
        let mut asg = Assignment::new();
        asg.insert("x".into(), 0);
        asg.insert("y".into(), 1);
        assert_eq!(alg.evaluate(&t, &asg).unwrap(), 0);
        let v = parse_term("x", &sig).unwrap();
        let mut asg = Assignment::new();
        asg.insert("x".into(), 1);
        assert_eq!(alg.evaluate(&v, &asg).unwrap(), 1);
    }

    #[test]
    fn check_identity_holds_and_fails() {
        let sig = semigroup_sig();
        let alg = min_semilattice(3);
        assert_eq!(
            check_identity(&alg, &assoc_identity(&sig), &Budget::default()).unwrap(),
            IdentityCheck::Holds
        );

        // left-zero semigroup: x*y = x; commutativity fails at {x:0, y:1}
        let table = vec![0, 0, 1, 1];
        let lz = FiniteAlgebra::new(sig.clone(), 2, vec![table]).unwrap();
        let comm = Identity::new(
            parse_term("(mul x y)", &sig).unwrap(),
            parse_term("(mul y x)", &sig).unwrap(),
        );
        let expected: Assignment = [("x".to_string(), 0), ("y".to_string(), 1)]
            .into_iter()
            .collect();
        assert_eq!(
            check_identity(&lz, &comm, &Budget::default()).unwrap(),
            IdentityCheck::Counterexample(expected)
        );
    }

    #[test]
    fn check_identity_budget_error() {
        let sig = semigroup_sig();
        let alg = min_semilattice(3);
        let tight = Budget::default().with_max_assignments(8);
        assert!(check_identity(&alg, &assoc_identity(&sig), &tight).is_err());
    }

    #[test]
    fn subalgebra_generation() {
        let alg = min_semilattice(4);
        let full = generate_subalgebra(&alg, ElemSet::full(4));
        assert_eq!(full.members(), ElemSet::full(4));
        let empty = generate_subalgebra(&alg, ElemSet::EMPTY);
        assert!(empty.members().is_empty());

        // powers of 2 mod 5 on {1,2,3,4} -> indices 0..3 represent 1..4
        let sig = semigroup_sig();
        let mut table = Vec::new();
        for a in 1..=4usize {
            for b in 1..=4usize {
                table.push((a * b) % 5 - 1);
            }
        }
        let alg = FiniteAlgebra::new(sig, 4, vec![table]).unwrap();
        // seeding with the element 2 reaches 2, 4, 3, 1: the whole group
        let sub = generate_subalgebra(&alg, ElemSet::from_elems([1]));
        assert_eq!(sub.members(), ElemSet::full(4));
    }

    #[test]
    fn homomorphisms_z2_to_z2() {
        let sig = semigroup_sig();
        // Z2 as a semigroup table (group structure implied)
        let z2 = FiniteAlgebra::new(sig.clone(), 2, vec![vec![0, 1, 1, 0]]).unwrap();
        let homs = enumerate_homomorphisms(&z2, &z2, &[]);
        // brute-force oracle over all 4 maps
        let mut expect = Vec::new();
        for f0 in 0..2 {
            for f1 in 0..2 {
                let f = vec![f0, f1];
                let mut ok = true;
                for a in 0..2 {
                    for b in 0..2 {
                        if f[z2.apply(0, &[a, b])] != z2.apply(0, &[f[a], f[b]]) {
                            ok = false;
                        }
                    }
                }
                if ok {
                    expect.push(f);
                }
            }
        }
        assert_eq!(homs, expect);
        assert_eq!(homs.len(), 2);
    }

    #[test]
    fn homomorphisms_into_singleton() {
        let sig = semigroup_sig();
        let alg = min_semilattice(3);
        let one = FiniteAlgebra::new(sig, 1, vec![vec![0]]).unwrap();
        assert_eq!(enumerate_homomorphisms(&alg, &one, &[]).len(), 1);
    }

    #[test]
    fn identity_map_found_with_pin() {
        let alg = min_semilattice(3);
        let homs = enumerate_homomorphisms(&alg, &alg, &[(0, 0), (1, 1), (2, 2)]);
        assert!(homs.contains(&vec![0, 1, 2]));
    }

    #[test]
    fn semigroups_of_size_two() {
        let sig = semigroup_sig();
        let ids = [assoc_identity(&sig)];
        let models: Result<Vec<_>, _> = enumerate_models(&sig, 2, &ids, &Budget::default(), false)
            .unwrap()
            .collect();
        let models = models.unwrap();
        assert_eq!(models.len(), 8);
        // lexicographic order: first table is the constant-zero one
        assert_eq!(models[0].tables()[0], vec![0, 0, 0, 0]);
        // oracle: filter all 16 tables by associativity
        let mut count = 0;
        for bits in 0..16usize {
            let table: Vec<usize> = (0..4).map(|i| bits >> i & 1).collect();
            let alg = FiniteAlgebra::new(sig.clone(), 2, vec![table]).unwrap();
            if check_identity(&alg, &ids[0], &Budget::default()).unwrap() == IdentityCheck::Holds {
                count += 1;
            }
        }
        assert_eq!(count, 8);
    }

    #[test]
    fn size_one_single_model() {
        let sig = semigroup_sig();
        let ids = [assoc_identity(&sig)];
        let models: Result<Vec<_>, _> = enumerate_models(&sig, 1, &ids, &Budget::default(), false)
            .unwrap()
            .collect();
        assert_eq!(models.unwrap().len(), 1);
    }

    #[test]
    fn commutative_semigroups_of_size_two() {
        let sig = semigroup_sig();
        let assoc = assoc_identity(&sig);
        let comm = Identity::new(
            parse_term("(mul x y)", &sig).unwrap(),
            parse_term("(mul y x)", &sig).unwrap(),
        );
        let both: Result<Vec<_>, _> = enumerate_models(
            &sig,
            2,
            &[assoc.clone(), comm.clone()],
            &Budget::default(),
            false,
        )
        .unwrap()
        .collect();
        // oracle: filter the associative stream by commutativity
        let filtered = enumerate_models(&sig, 2, &[assoc], &Budget::default(), false)
            .unwrap()
            .map(Result::unwrap)
            .filter(|m| {
                check_identity(m, &comm, &Budget::default()).unwrap() == IdentityCheck::Holds
            })
            .count();
        assert_eq!(both.unwrap().len(), filtered);
    }

    #[test]
    fn semigroups_of_size_three_count_and_reverify() {
        let sig = semigroup_sig();
        let ids = [assoc_identity(&sig)];
        let mut count = 0;
        for m in enumerate_models(&sig, 3, &ids, &Budget::default(), false).unwrap() {
            let m = m.unwrap();
            for id in &ids {
                assert_eq!(
                    check_identity(&m, id, &Budget::default()).unwrap(),
                    IdentityCheck::Holds
                );
            }
            count += 1;
        }
        assert_eq!(count, 113);
    }

    #[test]
    fn multi_op_models_match_bruteforce() {
        // monoids of size 2: mul/2 plus a constant, left/right unit laws
        let sig = Signature::new([("mul", 2), ("u", 0)]).unwrap();
        let ids = [
            assoc_identity(&sig),
            Identity::new(
                parse_term("(mul (u) x)", &sig).unwrap(),
                parse_term("x", &sig).unwrap(),
            ),
            Identity::new(
                parse_term("(mul x (u))", &sig).unwrap(),
                parse_term("x", &sig).unwrap(),
            ),
        ];
        let fast: Vec<FiniteAlgebra> = enumerate_models(&sig, 2, &ids, &Budget::default(), false)
            .unwrap()
            .map(Result::unwrap)
            .collect();
        let mut slow = Vec::new();
        for bits in 0..16usize {
            for u in 0..2usize {
                let table: Vec<usize> = (0..4).map(|i| bits >> i & 1).collect();
                let alg = FiniteAlgebra::new(sig.clone(), 2, vec![table, vec![u]]).unwrap();
                if ids.iter().all(|id| {
                    check_identity(&alg, id, &Budget::default()).unwrap() == IdentityCheck::Holds
                }) {
                    slow.push(alg);
                }
            }
        }
        assert_eq!(fast.len(), slow.len());
        for m in &fast {
            assert!(slow.contains(m));
        }
    }

    #[test]
    fn iso_pruning_yields_canonical_subset() {
        let sig = semigroup_sig();
        let ids = [assoc_identity(&sig)];
        let pruned: Vec<FiniteAlgebra> = enumerate_models(&sig, 2, &ids, &Budget::default(), true)
            .unwrap()
            .map(Result::unwrap)
            .collect();
        let all: Vec<FiniteAlgebra> = enumerate_models(&sig, 2, &ids, &Budget::default(), false)
            .unwrap()
            .map(Result::unwrap)
            .collect();
        assert!(pruned.len() < all.len());
        for m in &pruned {
            assert!(all.contains(m));
        }
        // up to relabelling: constant, semilattice, left zero, right zero, Z2
        assert_eq!(pruned.len(), 5);

        let pruned3 = enumerate_models(&sig, 3, &ids, &Budget::default(), true)
            .unwrap()
            .map(Result::unwrap)
            .count();
        assert_eq!(pruned3, 24);
    }

    #[test]
    fn model_budget_error() {
        let sig = semigroup_sig();
        let ids = [assoc_identity(&sig)];
        let tight = Budget::default().with_max_models(10);
        let mut it = enumerate_models(&sig, 3, &ids, &tight, false).unwrap();
        assert!(it.any(|r| r.is_err()));
    }

    #[test]
    fn dominion_upper_b_equals_a() {
        let sig = semigroup_sig();
        let alg = min_semilattice(3);
        let sub = Subalgebra::checked(&alg, ElemSet::full(3)).unwrap();
        let ids = [assoc_identity(&sig)];
        let up = dominion_upper(&alg, &sub, &ids, 3, &Budget::default()).unwrap();
        assert_eq!(up.members, ElemSet::full(3));
        assert!(up.witnesses.is_empty());
    }

    #[test]
    fn dominion_upper_max_c_one() {
        let sig = semigroup_sig();
        let alg = min_semilattice(3);
        let sub = Subalgebra::checked(&alg, ElemSet::from_elems([0])).unwrap();
        let ids = [assoc_identity(&sig)];
        let up = dominion_upper(&alg, &sub, &ids, 1, &Budget::default()).unwrap();
        assert_eq!(up.members, ElemSet::full(3));
    }
}

#[cfg(test)]
mod closure_oracle_tests {
    use super::*;

    #[test]
    fn capped_product_semigroup_closure_matches_bfs_oracle() {
        // carrier {1..12} (index i is the integer i+1) with a*b = min(ab, 12)
        let sig = Signature::new([("mul", 2)]).unwrap();
        let n = 12;
        let mut table = Vec::new();
        for a in 1..=n {
            for b in 1..=n {
                table.push((a * b).min(n) - 1);
            }
        }
        let alg = FiniteAlgebra::new(sig.clone(), n, vec![table]).unwrap();
        assert_eq!(
            check_identity(&alg, &tests::assoc_identity(&sig), &Budget::default()).unwrap(),
            IdentityCheck::Holds
        );
        let seed = ElemSet::from_elems([5]); // the integer 6
        let sub = generate_subalgebra(&alg, seed);

        // independent oracle: breadth-first worklist over products
        let mut members = vec![false; n];
        members[5] = true;
        let mut queue = vec![5usize];
        while let Some(a) = queue.pop() {
            for b in 0..n {
                if !members[b] {
                    continue;
                }
                for r in [alg.apply(0, &[a, b]), alg.apply(0, &[b, a])] {
                    if !members[r] {
                        members[r] = true;
                        queue.push(r);
                    }
                }
            }
        }
        let oracle = ElemSet::from_elems((0..n).filter(|&i| members[i]));
        assert_eq!(sub.members(), oracle);
        // 6*6 caps at 12; nothing else is reachable
        assert_eq!(sub.members(), ElemSet::from_elems([5, 11]));
    }
}
