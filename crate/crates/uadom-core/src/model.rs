//! The explicit witness model: the multiplicative semigroup of positive
//! integers with the subsemigroup of all multiples of M = x_1⋯x_m, where
//! x_i is the i-th prime. Elements are kept symbolically as exponent
//! vectors, so divisor enumeration is exact and nothing overflows.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// First 20 primes; ground sets are capped at 20 elements.
pub const PRIMES: [u64; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

pub const MAX_VARS: usize = 20;

/// A positive integer as an exponent vector over the first `n` primes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactoredInt {
    exps: Vec<u32>,
}

impl FactoredInt {
    pub fn one(n: usize) -> FactoredInt {
        FactoredInt { exps: vec![0; n] }
    }

    /// The i-th prime (zero-based) as an element of the model.
    pub fn nth_prime(i: usize, n: usize) -> FactoredInt {
        let mut f = FactoredInt::one(n);
        f.exps[i] = 1;
        f
    }

    pub fn from_exps(exps: Vec<u32>) -> FactoredInt {
        FactoredInt { exps }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn width(&self) -> usize {
        self.exps.len()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &FactoredInt) -> FactoredInt {
        FactoredInt {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn divides(&self, other: &FactoredInt) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`; caller guarantees divisibility.
    pub fn div_into(&self, other: &FactoredInt) -> FactoredInt {
        FactoredInt {
            exps: other
                .exps
                .iter()
                .zip(&self.exps)
                .map(|(b, a)| b - a)
                .collect(),
        }
    }

    /// The integer value, if it fits in u128.
    pub fn value_u128(&self) -> Option<u128> {
        let mut v: u128 = 1;
        for (i, &e) in self.exps.iter().enumerate() {
            for _ in 0..e {
                v = v.checked_mul(PRIMES[i] as u128)?;
            }
        }
        Some(v)
    }
}

impl fmt::Display for FactoredInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{}", PRIMES[i])?;
            } else {
                write!(f, "{}^{}", PRIMES[i], e)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("variable count {0} exceeds the {MAX_VARS}-prime cap")]
    TooManyVars(usize),
    #[error("V must not be a singleton: a one-element V admits no pre-transfer system")]
    SingletonV,
    #[error("m = {m} exceeds n = {n}")]
    BadM { n: usize, m: usize },
    #[error("exponent vector has width {found}, instance has {expected} variables")]
    WidthMismatch { expected: usize, found: usize },
}

/// The witness model with `n` variables and `V = {1..m}`: A is the positive
/// integers under multiplication, x_i the i-th prime, and B the subsemigroup
/// of multiples of M = x_1⋯x_m. Requires m = 0 or m ≥ 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInstance {
    n: usize,
    m: usize,
}

impl ModelInstance {
    pub fn new(n: usize, m: usize) -> Result<ModelInstance, ModelError> {
        if n > MAX_VARS {
            return Err(ModelError::TooManyVars(n));
        }
        if m == 1 {
            return Err(ModelError::SingletonV);
        }
        if m > n {
            return Err(ModelError::BadM { n, m });
        }
        Ok(ModelInstance { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// M = x_1⋯x_m as an exponent vector (all-ones on the first m slots).
    pub fn modulus(&self) -> FactoredInt {
        let mut f = FactoredInt::one(self.n);
        for i in 0..self.m {
            f.exps[i] = 1;
        }
        f
    }

    /// Membership in B: every one of the first m exponents is at least 1.
    pub fn in_b(&self, u: &FactoredInt) -> bool {
        u.exps[..self.m].iter().all(|&e| e >= 1)
    }

    /// The canonical homomorphism A → Z_M (integers mod M under
    /// multiplication). Returns None if M overflows u64 (m > 15).
    pub fn mod_m(&self, u: &FactoredInt) -> Option<u64> {
        let m_val = self.modulus().value_u128()?;
        let m_val = u64::try_from(m_val).ok()?;
        let mut acc: u64 = 1 % m_val;
        for (i, &e) in u.exps.iter().enumerate() {
            for _ in 0..e {
                acc = (acc as u128 * PRIMES[i] as u128 % m_val as u128) as u64;
            }
        }
        Some(acc)
    }

    /// Product of the variables indexed by `mask` (bit i = variable i).
    pub fn subset_product(&self, mask: u32) -> FactoredInt {
        let mut f = FactoredInt::one(self.n);
        for i in 0..self.n {
            if mask >> i & 1 == 1 {
                f.exps[i] = 1;
            }
        }
        f
    }

    /// The ∏-criterion: T is transferable iff T = ∅ or ∏_{i∈T} x_i ∈ B.
    pub fn transferable_subset(&self, mask: u32) -> bool {
        mask == 0 || self.in_b(&self.subset_product(mask))
    }

    /// Decides the congruence on A×A generated by (s·b, t) ~ (s, t·b) for
    /// b ∈ B, by breadth-first search over divisor-transfer moves on the
    /// ordered factorizations of u·v. Exact and terminating.
    pub fn pair_equivalent(
        &self,
        (u, v): (&FactoredInt, &FactoredInt),
        (u2, v2): (&FactoredInt, &FactoredInt),
    ) -> Result<bool, ModelError> {
        for f in [u, v, u2, v2] {
            if f.width() != self.n {
                return Err(ModelError::WidthMismatch {
                    expected: self.n,
                    found: f.width(),
                });
            }
        }
        let prod = u.mul(v);
        if prod != u2.mul(v2) {
            return Ok(false);
        }
        if u == u2 {
            return Ok(true);
        }
        // BFS over first coordinates; the second is determined by the product
        let mut seen: HashMap<Vec<u32>, ()> = HashMap::new();
        let mut queue: VecDeque<FactoredInt> = VecDeque::new();
        seen.insert(u.exps.clone(), ());
        queue.push_back(u.clone());
        while let Some(p) = queue.pop_front() {
            let q = p.div_into(&prod);
            for b in self.b_divisors(&p) {
                let next = b.div_into(&p);
                if seen.insert(next.exps.clone(), ()).is_none() {
                    if next == *u2 {
                        return Ok(true);
                    }
                    queue.push_back(next);
                }
            }
            for b in self.b_divisors(&q) {
                let next = p.mul(&b);
                if seen.insert(next.exps.clone(), ()).is_none() {
                    if next == *u2 {
                        return Ok(true);
                    }
                    queue.push_back(next);
                }
            }
        }
        Ok(false)
    }

    /// All divisors of `u` lying in B, ascending in exponent-vector odometer
    /// order. Empty when u ∉ B.
    fn b_divisors(&self, u: &FactoredInt) -> Vec<FactoredInt> {
        if !self.in_b(u) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut exps: Vec<u32> = (0..self.n)
            .map(|i| if i < self.m { 1 } else { 0 })
            .collect();
        loop {
            out.push(FactoredInt { exps: exps.clone() });
            // odometer with per-slot floor (1 on the first m slots) and
            // per-slot ceiling u.exps[i], last slot fastest
            let mut i = self.n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if exps[i] < u.exps[i] {
                    exps[i] += 1;
                    break;
                }
                exps[i] = if i < self.m { 1 } else { 0 };
            }
        }
    }
}

/// A value of the amalgamated coproduct A⨿_B A in the witness model:
/// the image of one copy alone, or a genuinely mixed product λ(u)·ρ(v).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaggedValue {
    PureLeft(FactoredInt),
    PureRight(FactoredInt),
    Mixed(FactoredInt, FactoredInt),
}

impl ModelInstance {
    /// Equality in A⨿_B A. Pure values are kept apart from mixed pairs with
    /// a unit coordinate: λ(a) equals a mixed product only via a B-divisor
    /// factorization, which exists exactly when a ∈ B.
    pub fn tagged_equal(&self, a: &TaggedValue, b: &TaggedValue) -> Result<bool, ModelError> {
        use TaggedValue::*;
        let one = FactoredInt::one(self.n);
        match (a, b) {
            (PureLeft(u), PureLeft(v)) | (PureRight(u), PureRight(v)) => Ok(u == v),
            (PureLeft(u), PureRight(v)) | (PureRight(u), PureLeft(v)) => Ok(u == v && self.in_b(u)),
            (PureLeft(a), Mixed(u, v)) | (Mixed(u, v), PureLeft(a)) => {
                Ok(self.in_b(a) && self.pair_equivalent((a, &one), (u, v))?)
            }
            (PureRight(a), Mixed(u, v)) | (Mixed(u, v), PureRight(a)) => {
                Ok(self.in_b(a) && self.pair_equivalent((&one, a), (u, v))?)
            }
            (Mixed(u, v), Mixed(u2, v2)) => self.pair_equivalent((u, v), (u2, v2)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fi(exps: &[u32]) -> FactoredInt {
        FactoredInt::from_exps(exps.to_vec())
    }

    #[test]
    fn membership_in_b() {
        let inst = ModelInstance::new(3, 2).unwrap();
        assert!(inst.in_b(&inst.modulus()));
        assert!(!inst.in_b(&FactoredInt::one(3)));
        // x1 * x3 misses x2
        assert!(!inst.in_b(&fi(&[1, 0, 1])));
    }

    #[test]
    fn pair_equivalence_amalgamation() {
        let inst = ModelInstance::new(3, 2).unwrap();
        let one = FactoredInt::one(3);
        let m = inst.modulus();
        // (M,1) ~ (1,M): one divisor transfer
        assert!(inst.pair_equivalent((&m, &one), (&one, &m)).unwrap());
        // reflexivity
        let u = fi(&[2, 1, 0]);
        let v = fi(&[0, 1, 1]);
        assert!(inst.pair_equivalent((&u, &v), (&u, &v)).unwrap());
        // (x1,1) vs (1,x1): x1 has no B-divisor
        let x1 = fi(&[1, 0, 0]);
        assert!(!inst.pair_equivalent((&x1, &one), (&one, &x1)).unwrap());
    }

    #[test]
    fn pair_equivalence_needs_equal_products() {
        let inst = ModelInstance::new(2, 2).unwrap();
        let one = FactoredInt::one(2);
        let m = inst.modulus();
        let m2 = m.mul(&m);
        assert!(!inst.pair_equivalent((&m, &one), (&m2, &one)).unwrap());
    }

    #[test]
    fn cancellation_can_fail_in_the_pair_quotient() {
        // shuttling can connect pairs whose common-factor reductions differ;
        // the tagged evaluator, not raw pairs, models λ/ρ faithfully
        let inst = ModelInstance::new(5, 2).unwrap();
        let x3 = fi(&[0, 0, 1, 0, 0]);
        let rest = fi(&[1, 1, 0, 1, 1]);
        let one = FactoredInt::one(5);
        let all = fi(&[1, 1, 1, 1, 1]);
        assert!(inst.pair_equivalent((&x3, &rest), (&one, &all)).unwrap());
        let x3_alone = (&x3, &one);
        let x3_right = (&one, &x3);
        assert!(!inst.pair_equivalent(x3_alone, x3_right).unwrap());
    }

    #[test]
    fn transferable_subsets_match_principal_family() {
        // n=5, m=2: transferable iff T = ∅ or {1,2} ⊆ T
        let inst = ModelInstance::new(5, 2).unwrap();
        for mask in 0u32..32 {
            let expect = mask == 0 || mask & 0b11 == 0b11;
            assert_eq!(inst.transferable_subset(mask), expect, "mask {mask:05b}");
        }
    }

    #[test]
    fn tagged_equality_separates_pure_sides() {
        let inst = ModelInstance::new(3, 2).unwrap();
        let one = FactoredInt::one(3);
        let m = inst.modulus();
        // λ(M) = ρ(M) since M ∈ B
        assert!(inst
            .tagged_equal(
                &TaggedValue::PureLeft(m.clone()),
                &TaggedValue::PureRight(m.clone())
            )
            .unwrap());
        // λ(1) ≠ ρ(1): 1 ∉ B
        assert!(!inst
            .tagged_equal(
                &TaggedValue::PureLeft(one.clone()),
                &TaggedValue::PureRight(one)
            )
            .unwrap());
        // λ(x1) ≠ λ(x2)
        let x1 = fi(&[1, 0, 0]);
        let x2 = fi(&[0, 1, 0]);
        assert!(!inst
            .tagged_equal(&TaggedValue::PureLeft(x1), &TaggedValue::PureLeft(x2))
            .unwrap());
    }

    #[test]
    fn mixed_product_is_not_a_pure_image_outside_b() {
        let inst = ModelInstance::new(2, 2).unwrap();
        let x1 = fi(&[1, 0]);
        let x2 = fi(&[0, 1]);
        let m = inst.modulus();
        // λ(x1)ρ(x2) ≠ λ(x1x2) even though the products agree
        assert!(!inst
            .tagged_equal(&TaggedValue::Mixed(x1, x2), &TaggedValue::PureLeft(m))
            .unwrap());
    }

    #[test]
    fn mod_m_map() {
        let inst = ModelInstance::new(3, 2).unwrap();
        // M = 6; 2*3*5 = 30 ≡ 0, 5 ≡ 5
        assert_eq!(inst.mod_m(&fi(&[1, 1, 1])).unwrap(), 0);
        assert_eq!(inst.mod_m(&fi(&[0, 0, 1])).unwrap(), 5);
        assert_eq!(inst.mod_m(&FactoredInt::one(3)).unwrap(), 1);
    }

    #[test]
    fn b_divisor_enumeration() {
        let inst = ModelInstance::new(2, 2).unwrap();
        // u = x1^2 x2: B-divisors are x1x2, x1^2 x2
        let u = fi(&[2, 1]);
        let divs = inst.b_divisors(&u);
        assert_eq!(divs, vec![fi(&[1, 1]), fi(&[2, 1])]);
        assert!(inst.b_divisors(&fi(&[1, 0])).is_empty());
    }

    #[test]
    fn singleton_v_rejected() {
        assert!(matches!(
            ModelInstance::new(4, 1),
            Err(ModelError::SingletonV)
        ));
        assert!(ModelInstance::new(4, 0).is_ok());
    }
}
