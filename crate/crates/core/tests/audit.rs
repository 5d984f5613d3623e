use proptest::prelude::*;

use perturbex::fixtures::{lip_zero_family, random_family, rng};
use perturbex::gapaudit::{bound_s_norm, c_of_eps, c_of_gap, empirical_gap, shift_constants};
use perturbex::thermo::{build_family, ThetaSchedule};

proptest! {
    #[test]
    fn constant_grows_with_theta(t1 in 0.0..0.999f64, t2 in 0.0..0.999f64, lip in 0.0..3.0f64) {
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let (a, b) = (c_of_eps(lo, lip).unwrap(), c_of_eps(hi, lip).unwrap());
        prop_assert!(a.ln <= b.ln + 1e-12);
    }

    #[test]
    fn constant_without_variation(theta in 0.0..0.999f64) {
        let c = c_of_eps(theta, 0.0).unwrap();
        let gap = 1.0 - theta;
        prop_assert!((c.ln + 4.0 * gap.ln()).abs() <= 1e-12);
        prop_assert!((c.value() * gap.powi(4) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn literal_bounds_dominate_the_resolvent(seed in 0u64..10_000, theta in 0.3..0.9f64) {
        let pf = random_family::<f64>(&mut rng(seed), 1).unwrap();
        let fam = build_family(&pf, pf.phi.depth()).unwrap();
        let consts = shift_constants(&pf.phi, fam.triplet(), theta).unwrap();
        let b = bound_s_norm(fam.triplet(), &consts, 1.0 - theta, seed).unwrap();
        let lower = b.empirical.lower;
        prop_assert!(lower <= b.lemma.value() * (1.0 + 1e-12), "lower {lower} vs lemma {}", b.lemma.value());
        if consts.lip > 0.0 {
            prop_assert!(b.dominates(), "lower {lower} vs chain {}", b.chain.value());
        }
        prop_assert!(b.empirical.lower <= b.empirical.upper);
    }
}

#[test]
fn chain_bound_needs_variation() {
    // depth-1 potential on a non-full shift: [φ] = 0 kills the series term
    // although S is not zero
    let pf = random_family::<f64>(&mut rng(2142), 1).unwrap();
    let fam = build_family(&pf, pf.phi.depth()).unwrap();
    let consts = shift_constants(&pf.phi, fam.triplet(), 0.3).unwrap();
    assert_eq!(consts.lip, 0.0);
    let b = bound_s_norm(fam.triplet(), &consts, 0.7, 2142).unwrap();
    assert!(b.empirical.lower > b.chain.value());
    assert!(b.empirical.lower <= b.lemma.value());
}

#[test]
fn theta_outside_unit_interval_is_rejected() {
    assert!(c_of_eps(1.0, 0.5).is_err());
    assert!(c_of_eps(1.5, 0.5).is_err());
    assert!(c_of_gap(0.0, 0.5).is_err());
}

#[test]
fn huge_constants_stay_in_log_space() {
    let c = c_of_gap(1e-6, 2.0).unwrap();
    assert!((c.ln - (52.0 / 1e-6 + 4.0 * 6.0 * 10f64.ln())).abs() <= 1e-6 * c.ln);
    assert!(c.overflows());
}

#[test]
fn essential_bound_closes_while_matrix_gap_stays_open() {
    let pf = lip_zero_family::<f64>(1).unwrap();
    let fam = build_family(&pf, 1).unwrap();
    let schedule = pf.theta.unwrap();
    assert!(matches!(schedule, ThetaSchedule::Power { .. }));
    let reports: Vec<_> = [1e-2, 1e-4, 1e-8].iter().map(|&e| empirical_gap(&fam, e, schedule).unwrap()).collect();
    for w in reports.windows(2) {
        assert!(w[1].gap_bound < w[0].gap_bound);
    }
    for r in &reports {
        // rank one at depth 1: nothing but λ in the spectrum
        assert!(r.second_modulus <= 1e-12 * r.lambda);
        assert!(r.gap_bound <= r.matrix_gap);
    }
}
