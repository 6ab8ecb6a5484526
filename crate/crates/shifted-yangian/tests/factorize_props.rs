use proptest::prelude::*;
use shifted_yangian::cartan::CartanData;
use shifted_yangian::factorize::{is_irreducible_tensor, standard_factorize, StandardFactorization};
use shifted_yangian::qchar::{jordan_holder_sl2, Family};
use shifted_yangian::ratfun::LinRat;
use shifted_yangian::{q, qr, Q};

fn point() -> impl Strategy<Value = Q> {
    (-8i64..=8, 1i64..=2).prop_map(|(n, d)| qr(n, d))
}

fn standard_data() -> impl Strategy<Value = StandardFactorization> {
    (
        proptest::collection::vec(point(), 0..3),
        proptest::collection::vec((point(), 1i64..4), 0..3),
        proptest::collection::vec(point(), 0..3),
    )
        .prop_map(|(positive, kr, negative)| {
            let kr_pairs = kr.into_iter().map(|(y, n)| (y.clone(), y + q(n))).collect();
            StandardFactorization { positive, kr_pairs, negative }.normalized()
        })
        .prop_filter("standard", StandardFactorization::is_standard)
}

#[test]
fn worked_example() {
    let f = standard_factorize(&LinRat::parse("(u-3)(u-9)(u-5)/((u-6)*u*(u-2))").unwrap());
    assert_eq!(f.kr_pairs, vec![(q(5), q(6))]);
    assert_eq!(f.positive, vec![q(3), q(9)]);
    assert_eq!(f.negative, vec![q(0), q(2)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn round_trip(data in standard_data()) {
        prop_assert_eq!(standard_factorize(&data.reassemble()), data);
    }

    #[test]
    fn deleting_a_factor_stays_standard(data in standard_data(), which in 0usize..3) {
        let mut smaller = data.clone();
        match which {
            0 => { smaller.positive.pop(); }
            1 => { smaller.kr_pairs.pop(); }
            _ => { smaller.negative.pop(); }
        }
        prop_assert!(smaller.is_standard());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// For two KR factors, the tensor is simple exactly when the q-character has one JH class.
    #[test]
    fn irreducibility_matches_jordan_holder(y1 in -3i64..=3, n1 in 1i64..3, y2 in -3i64..=3, n2 in 1i64..3) {
        let cd = CartanData::sl2();
        let (a1, b1, a2, b2) = (q(y1), q(y1 + n1), q(y2), q(y2 + n2));
        let x = Family::L(a1.clone(), b1.clone()).qc(&cd, 8).unwrap().mul(&Family::L(a2.clone(), b2.clone()).qc(&cd, 8).unwrap());
        let classes = jordan_holder_sl2(&x).unwrap();
        let simple = is_irreducible_tensor(&[(a1, b1), (a2, b2)]);
        prop_assert_eq!(simple, classes.len() == 1 && classes.values().all(|&m| m == 1), "{:?}", classes);
    }
}
