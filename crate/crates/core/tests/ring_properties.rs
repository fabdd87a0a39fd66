use nalgebra::DMatrix;
use num_rational::BigRational;
use proptest::prelude::*;
use ttring::{pairing, BasisTag, ChiralRing, RingElement};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn setup() -> impl Strategy<Value = (usize, (i64, i64), Vec<(i64, i64)>)> {
    (1usize..=4, (-6i64..=6, 1i64..=5)).prop_flat_map(|(n, c)| {
        let coeff = (-9i64..=9, 1i64..=4);
        (Just(n), Just(c), prop::collection::vec(coeff, 6 * n))
    })
}

fn split(ring: &ChiralRing<BigRational>, raw: &[(i64, i64)]) -> [RingElement<BigRational>; 3] {
    let d = ring.dim();
    let el = |k: usize| ring.element(raw[k * d..(k + 1) * d].iter().map(|&(a, b)| rat(a, b)).collect()).unwrap();
    [el(0), el(1), el(2)]
}

fn pair(eta: &DMatrix<BigRational>, u: &RingElement<BigRational>, v: &RingElement<BigRational>) -> BigRational {
    let mut acc = rat(0, 1);
    for i in 0..eta.nrows() {
        for j in 0..eta.ncols() {
            acc += u.coeffs[i].clone() * eta[(i, j)].clone() * v.coeffs[j].clone();
        }
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplication_is_commutative_and_associative((n, (cn, cd), raw) in setup()) {
        let ring = ChiralRing::new(n, rat(cn, cd)).unwrap();
        let [u, v, w] = split(&ring, &raw);
        prop_assert_eq!(ring.mul(&u, &v).unwrap(), ring.mul(&v, &u).unwrap());
        let left = ring.mul(&ring.mul(&u, &v).unwrap(), &w).unwrap();
        let right = ring.mul(&u, &ring.mul(&v, &w).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn multiplication_distributes((n, (cn, cd), raw) in setup()) {
        let ring = ChiralRing::new(n, rat(cn, cd)).unwrap();
        let [u, v, w] = split(&ring, &raw);
        let lhs = ring.mul(&u, &ring.add(&v, &w).unwrap()).unwrap();
        let rhs = ring.add(&ring.mul(&u, &v).unwrap(), &ring.mul(&u, &w).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pairing_is_symmetric_and_invariant((n, (cn, cd), raw) in setup()) {
        let ring = ChiralRing::new(n, rat(cn, cd)).unwrap();
        let eta = pairing::eta_matrix_exact(&ring, BasisTag::Monomial).unwrap().entries;
        prop_assert_eq!(eta.transpose(), eta.clone());
        let [u, v, w] = split(&ring, &raw);
        let uv = ring.mul(&u, &v).unwrap();
        let vw = ring.mul(&v, &w).unwrap();
        prop_assert_eq!(pair(&eta, &uv, &w), pair(&eta, &u, &vw));
    }
}
