use proptest::prelude::*;
use shifted_yangian::modules_sl2::make_explicit;
use shifted_yangian::qchar::Family;
use shifted_yangian::ratfun::{LinRat, Poly};
use shifted_yangian::rmatrix::{baxter_r_poly, check_fund_intertwining, check_tq, lambda_poly, ratio_of, rhat_fund_negative, rhat_fund_negative_poly};
use shifted_yangian::lweight::LWeight;
use shifted_yangian::{q, qr, Q};
use num_traits::Zero;

fn generic() -> impl Strategy<Value = Q> {
    (-40i64..=40).prop_map(|n| qr(n, 7))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tq_on_prefundamentals(b in generic()) {
        let w = make_explicit(Family::Lminus(b), 7).unwrap();
        let rep = check_tq(&[(0, Q::zero())], &w).unwrap();
        prop_assert!(rep.is_ok(), "{}", rep);
    }

    #[test]
    fn fund_matrix_intertwines(a in generic(), b in generic()) {
        let w = make_explicit(Family::Lminus(b), 7).unwrap();
        let rm = rhat_fund_negative(&a, &w).unwrap();
        prop_assert!(check_fund_intertwining(&rm, &w, 3).unwrap());
        prop_assert_eq!(rhat_fund_negative_poly(&w).unwrap().eval(&a).t, rm.t);
    }

    #[test]
    fn lambda_is_s(roots in proptest::collection::vec(generic(), 0..4)) {
        let s = LinRat::from_roots(&roots, std::iter::empty());
        prop_assert_eq!(lambda_poly(&ratio_of(&[(0, Q::zero())]), &LWeight::single(s.clone())).unwrap(), s);
    }
}

#[test]
fn baxter_shift_covariance() {
    // R for L⁻_b is R for L⁻_0 with u ↦ u − b
    let r0 = baxter_r_poly(&make_explicit(Family::Lminus(q(0)), 8).unwrap()).unwrap();
    let b = qr(5, 3);
    let rb = baxter_r_poly(&make_explicit(Family::Lminus(b.clone()), 8).unwrap()).unwrap();
    for (x, y) in r0.blocks.iter().zip(&rb.blocks) {
        let shifted: Vec<Poly> = x.entries.iter().map(|p| p.shift(&b)).collect();
        assert_eq!(shifted, y.entries);
    }
}
