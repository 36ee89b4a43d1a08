//! Plain-text file formats: algebras with operation tables, identity lists,
//! equational arrays (plain and shared), and subset collections. Parse
//! errors carry 1-based line numbers. Blank lines and `#` comments are
//! ignored everywhere.

use crate::algebra::{ElemSet, FiniteAlgebra, Identity};
use crate::arrays::{EquationalArray, SharedArray};
use crate::term::{parse_term, Signature, Term};
use crate::tsys::{GroundSet, SubsetCollection};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct FileError {
    pub line: usize,
    pub msg: String,
}

impl FileError {
    fn new(line: usize, msg: impl Into<String>) -> FileError {
        FileError {
            line,
            msg: msg.into(),
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_kv(field: &str, key: &str, line: usize) -> Result<usize, FileError> {
    let rest = field
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| FileError::new(line, format!("expected `{key}=<int>`, got `{field}`")))?;
    rest.parse()
        .map_err(|_| FileError::new(line, format!("bad integer in `{field}`")))
}

/// A parsed algebra file: the algebra plus an optional `sub` line.
#[derive(Debug, Clone)]
pub struct AlgebraFile {
    pub alg: FiniteAlgebra,
    pub sub_members: Option<ElemSet>,
}

/// Format:
/// ```text
/// algebra size=N
/// op <name> arity=K      # one per operation, in signature order
/// table <name>
/// <N^K whitespace-separated integers, row-major, last index fastest>
/// sub <comma-separated element indices>   # optional
/// ```
pub fn parse_algebra_file(text: &str) -> Result<AlgebraFile, FileError> {
    let mut size: Option<usize> = None;
    let mut ops: Vec<(String, usize)> = Vec::new();
    let mut tables: Vec<(String, Vec<usize>, usize)> = Vec::new();
    let mut sub_members: Option<ElemSet> = None;
    let mut current_table: Option<usize> = None;
    for (line, l) in content_lines(text) {
        let mut fields = l.split_whitespace();
        let head = fields.next().unwrap();
        match head {
            "algebra" => {
                let f = fields
                    .next()
                    .ok_or_else(|| FileError::new(line, "expected `algebra size=N`"))?;
                size = Some(parse_kv(f, "size", line)?);
            }
            "op" => {
                let name = fields
                    .next()
                    .ok_or_else(|| FileError::new(line, "expected `op <name> arity=K`"))?;
                let f = fields
                    .next()
                    .ok_or_else(|| FileError::new(line, "expected `op <name> arity=K`"))?;
                ops.push((name.to_string(), parse_kv(f, "arity", line)?));
            }
            "table" => {
                let name = fields
                    .next()
                    .ok_or_else(|| FileError::new(line, "expected `table <name>`"))?;
                let pos = ops
                    .iter()
                    .position(|(n, _)| n == name)
                    .ok_or_else(|| FileError::new(line, format!("unknown operation `{name}`")))?;
                tables.push((name.to_string(), Vec::new(), pos));
                current_table = Some(tables.len() - 1);
            }
            "sub" => {
                let rest = l["sub".len()..].trim();
                let mut members = ElemSet::EMPTY;
                if !rest.is_empty() {
                    for part in rest.split(',') {
                        let e: usize = part.trim().parse().map_err(|_| {
                            FileError::new(line, format!("bad element index `{part}`"))
                        })?;
                        members.insert(e);
                    }
                }
                sub_members = Some(members);
            }
            _ if head.chars().all(|c| c.is_ascii_digit()) => {
                let Some(t) = current_table else {
                    return Err(FileError::new(line, "table data before any `table` header"));
                };
                for tok in l.split_whitespace() {
                    let v: usize = tok
                        .parse()
                        .map_err(|_| FileError::new(line, format!("bad table entry `{tok}`")))?;
                    tables[t].1.push(v);
                }
            }
            other => {
                return Err(FileError::new(
                    line,
                    format!("unrecognized directive `{other}`"),
                ));
            }
        }
    }
    let size = size.ok_or_else(|| FileError::new(1, "missing `algebra size=N` header"))?;
    let sig = Signature::new(ops.clone()).map_err(|e| FileError::new(1, e.to_string()))?;
    let mut table_vec: Vec<Vec<usize>> = vec![Vec::new(); ops.len()];
    for (name, data, pos) in tables {
        if !table_vec[pos].is_empty() {
            return Err(FileError::new(1, format!("duplicate table for `{name}`")));
        }
        table_vec[pos] = data;
    }
    let alg =
        FiniteAlgebra::new(sig, size, table_vec).map_err(|e| FileError::new(1, e.to_string()))?;
    Ok(AlgebraFile { alg, sub_members })
}

/// One identity per line: `<lhs-term> = <rhs-term>`.
pub fn parse_identities_file(text: &str, sig: &Signature) -> Result<Vec<Identity>, FileError> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let (lhs, rhs) = l
            .split_once('=')
            .ok_or_else(|| FileError::new(line, "expected `<lhs> = <rhs>`"))?;
        let lhs = parse_term(lhs.trim(), sig)
            .map_err(|e| FileError::new(line, format!("left side: {e}")))?;
        let rhs = parse_term(rhs.trim(), sig)
            .map_err(|e| FileError::new(line, format!("right side: {e}")))?;
        out.push(Identity::new(lhs, rhs));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub enum ArrayFile {
    Plain(EquationalArray),
    Shared(SharedArray),
}

/// Plain arrays:
/// ```text
/// array m=<m> sig=<n1,...,nm>
/// W<i> = <term in a1..am>
/// w<i><j> = <term in x1..xnj>
/// ```
/// Shared size-2 arrays:
/// ```text
/// shared m1=<m1> m2=<m2> m3=<m3>
/// W1 = <term in a1 a2>        W2 = ...
/// w11 = <term in x1..xm1 y1..ym3>   w21 = ...
/// w12 = <term in z1..zm2 y1..ym3>   w22 = ...
/// ```
pub fn parse_array_file(text: &str, sig: &Signature) -> Result<ArrayFile, FileError> {
    let mut lines = content_lines(text);
    let Some((hline, header)) = lines.next() else {
        return Err(FileError::new(1, "empty array file"));
    };
    let mut fields = header.split_whitespace();
    match fields.next() {
        Some("array") => {
            let m = parse_kv(
                fields
                    .next()
                    .ok_or_else(|| FileError::new(hline, "expected m=<m>"))?,
                "m",
                hline,
            )?;
            let sig_field = fields
                .next()
                .ok_or_else(|| FileError::new(hline, "expected sig=<n1,...,nm>"))?;
            let rest = sig_field
                .strip_prefix("sig=")
                .ok_or_else(|| FileError::new(hline, "expected sig=<n1,...,nm>"))?;
            let nsig: Vec<usize> = rest
                .split(',')
                .map(|p| p.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|_| FileError::new(hline, "bad signature entry"))?;
            if nsig.len() != m {
                return Err(FileError::new(hline, "signature length differs from m"));
            }
            let mut outer: Vec<Option<Term>> = vec![None; m];
            let mut inner: Vec<Vec<Option<Term>>> = vec![vec![None; m]; m];
            for (line, l) in lines {
                let (name, term_text) = l
                    .split_once('=')
                    .ok_or_else(|| FileError::new(line, "expected `<word> = <term>`"))?;
                let name = name.trim();
                let term = parse_term(term_text.trim(), sig)
                    .map_err(|e| FileError::new(line, e.to_string()))?;
                if let Some(i) = name.strip_prefix('W') {
                    let i: usize = i
                        .parse()
                        .map_err(|_| FileError::new(line, format!("bad word name `{name}`")))?;
                    if i == 0 || i > m {
                        return Err(FileError::new(line, format!("W{i} out of range")));
                    }
                    outer[i - 1] = Some(term);
                } else if let Some(ij) = name.strip_prefix('w') {
                    let digits: Vec<char> = ij.chars().collect();
                    if digits.len() != 2 || !digits.iter().all(|c| c.is_ascii_digit()) {
                        return Err(FileError::new(line, format!("bad word name `{name}`")));
                    }
                    let i = digits[0].to_digit(10).unwrap() as usize;
                    let j = digits[1].to_digit(10).unwrap() as usize;
                    if i == 0 || i > m || j == 0 || j > m {
                        return Err(FileError::new(line, format!("w{i}{j} out of range")));
                    }
                    inner[i - 1][j - 1] = Some(term);
                } else {
                    return Err(FileError::new(line, format!("unrecognized word `{name}`")));
                }
            }
            let outer: Vec<Term> = outer
                .into_iter()
                .enumerate()
                .map(|(i, t)| t.ok_or_else(|| FileError::new(hline, format!("missing W{}", i + 1))))
                .collect::<Result<_, _>>()?;
            let inner: Vec<Vec<Term>> = inner
                .into_iter()
                .enumerate()
                .map(|(i, row)| {
                    row.into_iter()
                        .enumerate()
                        .map(|(j, t)| {
                            t.ok_or_else(|| {
                                FileError::new(hline, format!("missing w{}{}", i + 1, j + 1))
                            })
                        })
                        .collect()
                })
                .collect::<Result<_, _>>()?;
            let arr = EquationalArray { nsig, outer, inner };
            arr.check_shape()
                .map_err(|e| FileError::new(hline, e.to_string()))?;
            Ok(ArrayFile::Plain(arr))
        }
        Some("shared") => {
            let m1 = parse_kv(
                fields
                    .next()
                    .ok_or_else(|| FileError::new(hline, "expected m1=<m1>"))?,
                "m1",
                hline,
            )?;
            let m2 = parse_kv(
                fields
                    .next()
                    .ok_or_else(|| FileError::new(hline, "expected m2=<m2>"))?,
                "m2",
                hline,
            )?;
            let m3 = parse_kv(
                fields
                    .next()
                    .ok_or_else(|| FileError::new(hline, "expected m3=<m3>"))?,
                "m3",
                hline,
            )?;
            let mut words: std::collections::BTreeMap<String, Term> = Default::default();
            for (line, l) in lines {
                let (name, term_text) = l
                    .split_once('=')
                    .ok_or_else(|| FileError::new(line, "expected `<word> = <term>`"))?;
                let term = parse_term(term_text.trim(), sig)
                    .map_err(|e| FileError::new(line, e.to_string()))?;
                words.insert(name.trim().to_string(), term);
            }
            let mut take = |k: &str| {
                words
                    .remove(k)
                    .ok_or_else(|| FileError::new(hline, format!("missing word `{k}`")))
            };
            let sh = SharedArray {
                m1,
                m2,
                m3,
                outer: [take("W1")?, take("W2")?],
                w11: take("w11")?,
                w12: take("w12")?,
                w21: take("w21")?,
                w22: take("w22")?,
            };
            if let Some(extra) = words.keys().next() {
                return Err(FileError::new(
                    hline,
                    format!("unrecognized word `{extra}`"),
                ));
            }
            sh.check_shape()
                .map_err(|e| FileError::new(hline, e.to_string()))?;
            Ok(ArrayFile::Shared(sh))
        }
        _ => Err(FileError::new(
            hline,
            "expected `array ...` or `shared ...` header",
        )),
    }
}

/// One subset per line as comma-separated labels; `{}` denotes the empty set.
pub fn parse_collection_file(
    text: &str,
    ground: &GroundSet,
) -> Result<SubsetCollection, FileError> {
    let mut members = Vec::new();
    for (line, l) in content_lines(text) {
        if l == "{}" {
            members.push(0);
            continue;
        }
        let mask = ground
            .mask_of(l.split(',').map(str::trim))
            .map_err(|e| FileError::new(line, e.to_string()))?;
        members.push(mask);
    }
    Ok(SubsetCollection::new(ground.clone(), members))
}

/// Renders an algebra in the file format.
pub fn algebra_to_string(alg: &FiniteAlgebra, sub: Option<ElemSet>) -> String {
    let mut out = format!("algebra size={}\n", alg.size());
    for op in alg.sig().ops() {
        out.push_str(&format!("op {} arity={}\n", op.name, op.arity));
    }
    for (i, op) in alg.sig().ops().iter().enumerate() {
        out.push_str(&format!("table {}\n", op.name));
        let row: Vec<String> = alg.tables()[i].iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    if let Some(s) = sub {
        let elems: Vec<String> = s.iter().map(|e| e.to_string()).collect();
        out.push_str(&format!("sub {}\n", elems.join(",")));
    }
    out
}
