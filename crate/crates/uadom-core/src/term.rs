//! Signatures, terms, the textual term DSL, substitution, and evaluation.
//!
//! Terms are prefix s-expressions: `(mul x (mul y z))`. Leaves are variable
//! identifiers, except that an identifier naming a nullary operation of the
//! signature parses as that constant (`e` and `(e)` are the same term).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Default cap on term depth; parsing and evaluation both enforce it.
pub const DEFAULT_MAX_DEPTH: usize = 64;

/// An operation symbol: name plus arity. Arity 0 is a constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpSym {
    pub name: String,
    pub arity: usize,
}

/// A finite set of operation symbols with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    ops: Vec<OpSym>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("duplicate operation name `{0}`")]
    DuplicateOp(String),
}

impl Signature {
    pub fn new<N: Into<String>>(
        ops: impl IntoIterator<Item = (N, usize)>,
    ) -> Result<Self, SignatureError> {
        let ops: Vec<OpSym> = ops
            .into_iter()
            .map(|(name, arity)| OpSym {
                name: name.into(),
                arity,
            })
            .collect();
        for (i, op) in ops.iter().enumerate() {
            if ops[..i].iter().any(|o| o.name == op.name) {
                return Err(SignatureError::DuplicateOp(op.name.clone()));
            }
        }
        Ok(Signature { ops })
    }

    pub fn ops(&self) -> &[OpSym] {
        &self.ops
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.op_index(name).map(|i| self.ops[i].arity)
    }
}

/// A term over a signature: a variable or an operation applied to arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn app(op: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(op.into(), args)
    }

    /// Distinct variables in first-occurrence (leftmost) order.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        // explicit stack; children pushed in reverse so they pop left-to-right
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                Term::Var(v) => {
                    if !out.iter().any(|o| o == v) {
                        out.push(v.clone());
                    }
                }
                Term::App(_, args) => {
                    for a in args.iter().rev() {
                        stack.push(a);
                    }
                }
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(self, 1usize)];
        while let Some((t, d)) = stack.pop() {
            max = max.max(d);
            if let Term::App(_, args) = t {
                for a in args {
                    stack.push((a, d + 1));
                }
            }
        }
        max
    }

    /// Checks every application against the signature.
    pub fn well_formed(&self, sig: &Signature) -> Result<(), TermError> {
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if let Term::App(op, args) = t {
                match sig.arity(op) {
                    None => {
                        return Err(TermError::at(0, TermErrorKind::UnknownOp(op.clone())));
                    }
                    Some(k) if k != args.len() => {
                        return Err(TermError::at(
                            0,
                            TermErrorKind::ArityMismatch {
                                op: op.clone(),
                                expected: k,
                                found: args.len(),
                            },
                        ));
                    }
                    Some(_) => stack.extend(args.iter()),
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(op, args) => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermErrorKind {
    UnknownOp(String),
    ArityMismatch {
        op: String,
        expected: usize,
        found: usize,
    },
    /// An operation of positive arity used as a bare leaf.
    OpAsLeaf(String),
    Unbalanced,
    EmptyInput,
    TrailingInput,
    DepthExceeded(usize),
    UnboundVariable(String),
}

/// A term error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at byte {offset}: {kind:?}")]
pub struct TermError {
    pub offset: usize,
    pub kind: TermErrorKind,
}

impl TermError {
    fn at(offset: usize, kind: TermErrorKind) -> Self {
        TermError { offset, kind }
    }
}

/// Variable assignment into a finite algebra: variable name to element index.
pub type Assignment = BTreeMap<String, usize>;

/// Parses the prefix s-expression DSL with the default depth cap.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, TermError> {
    parse_term_with_depth(text, sig, DEFAULT_MAX_DEPTH)
}

pub fn parse_term_with_depth(
    text: &str,
    sig: &Signature,
    max_depth: usize,
) -> Result<Term, TermError> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let term = parse_expr(&tokens, &mut pos, text.len(), sig, max_depth, 1)?;
    if pos < tokens.len() {
        return Err(TermError::at(tokens[pos].1, TermErrorKind::TrailingInput));
    }
    Ok(term)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    Ident(&'a str),
}

fn tokenize(text: &str) -> Vec<(Tok<'_>, usize)> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                out.push((Tok::Open, i));
                i += 1;
            }
            b')' => {
                out.push((Tok::Close, i));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && bytes[i] != b'('
                    && bytes[i] != b')'
                {
                    i += 1;
                }
                out.push((Tok::Ident(&text[start..i]), start));
            }
        }
    }
    out
}

fn parse_expr(
    tokens: &[(Tok<'_>, usize)],
    pos: &mut usize,
    end: usize,
    sig: &Signature,
    max_depth: usize,
    depth: usize,
) -> Result<Term, TermError> {
    if depth > max_depth {
        let off = tokens.get(*pos).map_or(end, |t| t.1);
        return Err(TermError::at(off, TermErrorKind::DepthExceeded(max_depth)));
    }
    let Some((tok, off)) = tokens.get(*pos) else {
        return Err(TermError::at(end, TermErrorKind::EmptyInput));
    };
    let off = *off;
    match tok {
        Tok::Ident(name) => {
            *pos += 1;
            match sig.arity(name) {
                Some(0) => Ok(Term::App(name.to_string(), vec![])),
                Some(_) => Err(TermError::at(
                    off,
                    TermErrorKind::OpAsLeaf(name.to_string()),
                )),
                None => Ok(Term::Var(name.to_string())),
            }
        }
        Tok::Close => Err(TermError::at(off, TermErrorKind::Unbalanced)),
        Tok::Open => {
            *pos += 1;
            let Some((head, head_off)) = tokens.get(*pos) else {
                return Err(TermError::at(end, TermErrorKind::Unbalanced));
            };
            let Tok::Ident(op) = head else {
                return Err(TermError::at(*head_off, TermErrorKind::Unbalanced));
            };
            let head_off = *head_off;
            let Some(arity) = sig.arity(op) else {
                return Err(TermError::at(
                    head_off,
                    TermErrorKind::UnknownOp(op.to_string()),
                ));
            };
            *pos += 1;
            let mut args = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some((Tok::Close, _)) => {
                        *pos += 1;
                        break;
                    }
                    None => return Err(TermError::at(end, TermErrorKind::Unbalanced)),
                    Some(_) => {
                        args.push(parse_expr(tokens, pos, end, sig, max_depth, depth + 1)?);
                    }
                }
            }
            if args.len() != arity {
                return Err(TermError::at(
                    head_off,
                    TermErrorKind::ArityMismatch {
                        op: op.to_string(),
                        expected: arity,
                        found: args.len(),
                    },
                ));
            }
            Ok(Term::App(op.to_string(), args))
        }
    }
}

/// Simultaneous substitution; variables absent from `subst` are unchanged.
pub fn substitute(term: &Term, subst: &BTreeMap<String, Term>) -> Term {
    // iterative post-order rebuild
    enum Frame<'a> {
        Visit(&'a Term),
        Build(&'a str, usize),
    }
    let mut work = vec![Frame::Visit(term)];
    let mut values: Vec<Term> = Vec::new();
    while let Some(frame) = work.pop() {
        match frame {
            Frame::Visit(Term::Var(v)) => {
                values.push(
                    subst
                        .get(v)
                        .cloned()
                        .unwrap_or_else(|| Term::Var(v.clone())),
                );
            }
            Frame::Visit(Term::App(op, args)) => {
                work.push(Frame::Build(op, args.len()));
                for a in args.iter().rev() {
                    work.push(Frame::Visit(a));
                }
            }
            Frame::Build(op, n) => {
                let args = values.split_off(values.len() - n);
                values.push(Term::App(op.to_string(), args));
            }
        }
    }
    values.pop().expect("substitute: empty build stack")
}

/// A term compiled to a postfix program against a fixed signature and
/// variable ordering, for fast repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledTerm {
    prog: Vec<Instr>,
    max_stack: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Instr {
    PushVar(usize),
    Apply { op: usize, arity: usize },
}

impl CompiledTerm {
    /// `var_order` supplies the slot for each variable; every variable of the
    /// term must appear in it.
    pub fn compile(
        term: &Term,
        sig: &Signature,
        var_order: &[String],
    ) -> Result<CompiledTerm, TermError> {
        term.well_formed(sig)?;
        let mut prog = Vec::new();
        // iterative post-order
        enum Frame<'a> {
            Visit(&'a Term),
            Emit(usize, usize),
        }
        let mut work = vec![Frame::Visit(term)];
        while let Some(frame) = work.pop() {
            match frame {
                Frame::Visit(Term::Var(v)) => {
                    let slot = var_order.iter().position(|o| o == v).ok_or_else(|| {
                        TermError::at(0, TermErrorKind::UnboundVariable(v.clone()))
                    })?;
                    prog.push(Instr::PushVar(slot));
                }
                Frame::Visit(Term::App(op, args)) => {
                    let idx = sig
                        .op_index(op)
                        .ok_or_else(|| TermError::at(0, TermErrorKind::UnknownOp(op.clone())))?;
                    work.push(Frame::Emit(idx, args.len()));
                    for a in args.iter().rev() {
                        work.push(Frame::Visit(a));
                    }
                }
                Frame::Emit(op, arity) => prog.push(Instr::Apply { op, arity }),
            }
        }
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        for ins in &prog {
            match ins {
                Instr::PushVar(_) => depth += 1,
                Instr::Apply { arity, .. } => depth = depth - arity + 1,
            }
            max_stack = max_stack.max(depth);
        }
        Ok(CompiledTerm { prog, max_stack })
    }

    pub(crate) fn instructions(&self) -> &[Instr] {
        &self.prog
    }

    /// Bottom-up table evaluation. `tables[op]` is row-major with the last
    /// argument index fastest; `values[slot]` supplies variable values.
    pub fn eval(&self, tables: &[Vec<usize>], size: usize, values: &[usize]) -> usize {
        let mut stack: Vec<usize> = Vec::with_capacity(self.max_stack);
        for ins in &self.prog {
            match *ins {
                Instr::PushVar(slot) => stack.push(values[slot]),
                Instr::Apply { op, arity } => {
                    let base = stack.len() - arity;
                    let mut idx = 0usize;
                    for &a in &stack[base..] {
                        idx = idx * size + a;
                    }
                    stack.truncate(base);
                    stack.push(tables[op][idx]);
                }
            }
        }
        stack.pop().expect("eval: empty program")
    }
}
