//! Sample algebras used by the bundled scenarios and the acceptance suite.

use crate::algebra::{FiniteAlgebra, Identity};
use crate::term::{parse_term, Signature, Term};

/// Signature of groups: binary product, unary inverse, identity constant.
pub fn group_signature() -> Signature {
    Signature::new([("mul", 2), ("inv", 1), ("e", 0)]).unwrap()
}

/// Signature of semigroups: one binary product.
pub fn semigroup_signature() -> Signature {
    Signature::new([("mul", 2)]).unwrap()
}

/// Associativity over the semigroup signature.
pub fn associativity(sig: &Signature) -> Identity {
    Identity::new(
        parse_term("(mul (mul x y) z)", sig).unwrap(),
        parse_term("(mul x (mul y z))", sig).unwrap(),
    )
}

/// The group axioms over `group_signature`.
pub fn group_identities(sig: &Signature) -> Vec<Identity> {
    let parse = |s: &str| parse_term(s, sig).unwrap();
    vec![
        Identity::new(parse("(mul (mul x y) z)"), parse("(mul x (mul y z))")),
        Identity::new(parse("(mul (e) x)"), parse("x")),
        Identity::new(parse("(mul x (e))"), parse("x")),
        Identity::new(parse("(mul x (inv x))"), parse("(e)")),
        Identity::new(parse("(mul (inv x) x)"), parse("(e)")),
    ]
}

/// The class-2 nilpotency law [[x,y],z] = e.
pub fn class2_identity(sig: &Signature) -> Identity {
    Identity::new(
        parse_term("(mul (mul (mul (inv (mul (mul (mul (inv x) (inv y)) x) y)) (inv z)) (mul (mul (mul (inv x) (inv y)) x) y)) z)", sig).unwrap(),
        parse_term("(e)", sig).unwrap(),
    )
}

/// The commutator word [x,y] = x⁻¹y⁻¹xy.
pub fn commutator(x: Term, y: Term) -> Term {
    let inv = |t: Term| Term::app("inv", vec![t]);
    let mul = |a: Term, b: Term| Term::app("mul", vec![a, b]);
    mul(mul(mul(inv(x.clone()), inv(y.clone())), x), y)
}

/// `t^n` as a left-nested product, n ≥ 1.
pub fn power(t: Term, n: usize) -> Term {
    let mut out = t.clone();
    for _ in 1..n {
        out = Term::app("mul", vec![out, t.clone()]);
    }
    out
}

/// The Heisenberg group of order 27: upper unitriangular 3×3 matrices over
/// the field with three elements, coordinatized as (a,b,c) with index
/// a + 3b + 9c and product (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab').
pub struct Heisenberg {
    pub alg: FiniteAlgebra,
    /// index of the generator x = (1,0,0)
    pub x: usize,
    /// index of the generator y = (0,1,0)
    pub y: usize,
    /// indices of the center {(0,0,c)}
    pub center: Vec<usize>,
}

pub fn heisenberg_27() -> Heisenberg {
    let sig = group_signature();
    let idx = |a: usize, b: usize, c: usize| a + 3 * b + 9 * c;
    let n = 27;
    let mut mul = vec![0usize; n * n];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let g = idx(a, b, c);
                for a2 in 0..3 {
                    for b2 in 0..3 {
                        for c2 in 0..3 {
                            let h = idx(a2, b2, c2);
                            mul[g * n + h] = idx((a + a2) % 3, (b + b2) % 3, (c + c2 + a * b2) % 3);
                        }
                    }
                }
            }
        }
    }
    // g^-1 is the unique h with gh = e
    let inv: Vec<usize> = (0..n)
        .map(|g| {
            (0..n)
                .find(|&h| mul[g * n + h] == 0)
                .expect("group table has inverses")
        })
        .collect();
    let alg = FiniteAlgebra::new(sig, n, vec![mul, inv, vec![0]]).unwrap();
    let center = (0..n)
        .filter(|&z| (0..n).all(|g| alg.apply(0, &[z, g]) == alg.apply(0, &[g, z])))
        .collect();
    Heisenberg {
        alg,
        x: idx(1, 0, 0),
        y: idx(0, 1, 0),
        center,
    }
}
