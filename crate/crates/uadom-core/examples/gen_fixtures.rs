//! Regenerates the checked-in fixture files from the sample constructions.

use uadom_core::algebra::ElemSet;
use uadom_core::files::algebra_to_string;
use uadom_core::samples;

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    std::fs::create_dir_all(&dir).unwrap();

    let h = samples::heisenberg_27();
    let center = ElemSet::from_elems(h.center.iter().copied());
    std::fs::write(
        dir.join("heisenberg.alg"),
        algebra_to_string(&h.alg, Some(center)),
    )
    .unwrap();

    let zz = uadom_core::arrays::find_zigzag_instance(6, &uadom_core::budget::Budget::default())
        .unwrap()
        .unwrap();
    std::fs::write(
        dir.join("zigzag.alg"),
        algebra_to_string(&zz.alg, Some(zz.sub.members())),
    )
    .unwrap();

    std::fs::write(
        dir.join("assoc.ids"),
        "(mul (mul x y) z) = (mul x (mul y z))\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("group.ids"),
        "\
(mul (mul x y) z) = (mul x (mul y z))
(mul (e) x) = x
(mul x (e)) = x
(mul x (inv x)) = (e)
(mul (inv x) x) = (e)
(mul (mul (mul (inv (mul (mul (mul (inv x) (inv y)) x) y)) (inv z)) (mul (mul (mul (inv x) (inv y)) x) y)) z) = (e)
",
    )
    .unwrap();
    std::fs::write(
        dir.join("example47.txt"),
        "{}\na,b,c\na,b,d\na,b,c,d\na,b,e\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("zigzag.arr"),
        "\
shared m1=1 m2=1 m3=1
W1 = (mul a1 a2)
W2 = (mul a1 a2)
w11 = (mul x1 y1)
w12 = z1
w21 = x1
w22 = (mul y1 z1)
",
    )
    .unwrap();
    std::fs::write(
        dir.join("commutator.arr"),
        "\
# [a1,a2] with cubes on the diagonal: certifies [x,y]^3 when x^3, y^3 lie in B
array m=2 sig=1,1
W1 = (mul (mul (mul (inv a1) (inv a2)) a1) a2)
W2 = (mul (mul (mul (inv a1) (inv a2)) a1) a2)
w11 = (mul (mul x1 x1) x1)
w12 = x1
w21 = x1
w22 = (mul (mul x1 x1) x1)
",
    )
    .unwrap();
    println!("fixtures written to {}", dir.display());
}
