//! Shared fixtures for unit tests.

use crate::algebra::{ElemSet, FiniteAlgebra, Subalgebra};
use crate::term::Signature;

/// The first zigzag instance in enumeration order: 5 elements,
/// B = {0,1,2,3}, y = 1, x = z = 4, xyz = 4 outside B.
pub fn zigzag_fixture() -> (FiniteAlgebra, Subalgebra) {
    let sig = Signature::new([("mul", 2)]).unwrap();
    let table = vec![
        0, 0, 0, 0, 0, //
        0, 0, 0, 1, 2, //
        0, 1, 2, 0, 0, //
        0, 0, 0, 3, 4, //
        0, 3, 4, 0, 0,
    ];
    let alg = FiniteAlgebra::new(sig, 5, vec![table]).unwrap();
    let sub = Subalgebra::checked(&alg, ElemSet::from_elems([0, 1, 2, 3])).unwrap();
    (alg, sub)
}
