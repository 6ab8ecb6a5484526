use proptest::prelude::*;
use shifted_yangian::cartan::CartanData;
use shifted_yangian::modules_sl2::{level_dims, lweight_decomposition, make_explicit, make_simple, make_weyl, verify_relations, Module};
use shifted_yangian::qchar::{qc_simple_sl2, Family};
use shifted_yangian::ratfun::LinRat;
use shifted_yangian::{q, qr, Q};

fn point() -> impl Strategy<Value = Q> {
    (-10i64..=10, 1i64..=3).prop_map(|(n, d)| qr(n, d))
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        point().prop_map(Family::Lplus),
        point().prop_map(Family::Lminus),
        point().prop_map(|a| Family::N(0, a)),
        (point(), point()).prop_map(|(a, b)| Family::FrakL(a, b)),
        (point(), 0i64..4).prop_map(|(a, n)| Family::L(a.clone(), a + q(n))),
        (1usize..4, point()).prop_map(|(k, a)| Family::KR(k, a)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn families_satisfy_relations(f in family()) {
        let m = make_explicit(f.clone(), 5).unwrap();
        let rep = verify_relations(&m, 5);
        prop_assert!(rep.is_ok(), "{}: {}", f, rep);
    }

    #[test]
    fn families_have_their_q_characters(f in family()) {
        let m = make_explicit(f.clone(), 5).unwrap();
        let got = lweight_decomposition(&m, None).unwrap();
        let expect = f.qc(&CartanData::sl2(), m.depth()).unwrap();
        prop_assert_eq!(got.terms, expect.terms);
    }

    #[test]
    fn weyl_dims_are_pbw_counts(roots in proptest::collection::vec(point(), 1..4)) {
        let s = LinRat::from_roots(&roots, std::iter::empty());
        let n = roots.len();
        let w = make_weyl(&s, &s, 5).unwrap();
        let binom = |a: usize, b: usize| (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1));
        let expect: Vec<usize> = (0..=5).map(|k| binom(k + n - 1, n - 1)).collect();
        prop_assert_eq!(level_dims(&w), expect);
    }
}

#[test]
fn simple_module_matches_closed_form() {
    for e in ["1/((u-1)*(u+3/2))", "(u-2)/((u)*(u-5))", "1/((u-1)*(u-4))"] {
        let e = LinRat::parse(e).unwrap();
        let m = make_simple(&e, 5).unwrap();
        assert!(verify_relations(&m, 5).is_ok());
        assert_eq!(lweight_decomposition(&m, None).unwrap().terms, qc_simple_sl2(&e, m.depth()).terms, "{e}");
    }
}
