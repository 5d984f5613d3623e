use proptest::prelude::*;

use perturbex::fixtures::fix_c;
use perturbex::gdms::{dimension_expansion, dimension_residuals, Edge, EdgeMap, GdmsSystem};

/// Root of `r_1^s + r_2^s = 1` by bisection.
fn moran_root(r1: f64, r2: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if r1.powf(mid) + r2.powf(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two affine maps `x ↦ (r_i + a_iε)x + c_i` with images at the two ends
/// of `[0, 1]`.
fn two_maps(r: [f64; 2], a: [f64; 2], order: usize) -> GdmsSystem<f64> {
    let edges = vec![
        Edge { from: 0, to: 0, map: EdgeMap::Affine { r: vec![r[0], a[0]], c: vec![0.0] } },
        Edge { from: 0, to: 0, map: EdgeMap::Affine { r: vec![r[1], a[1]], c: vec![1.0 - r[1]] } },
    ];
    GdmsSystem::new(vec![(0.0, 1.0)], edges, 0.5, order).unwrap()
}

/// `x ↦ 1/(2 + ε + x)` and `x ↦ 1/(3 + x)` on `[0, 1]`.
fn continued_fraction(order: usize) -> GdmsSystem<f64> {
    let edges = vec![
        Edge { from: 0, to: 0, map: EdgeMap::Moebius { a: vec![0.0], b: vec![1.0], c: vec![1.0], d: vec![2.0, 1.0] } },
        Edge { from: 0, to: 0, map: EdgeMap::Moebius { a: vec![0.0], b: vec![1.0], c: vec![1.0], d: vec![3.0] } },
    ];
    GdmsSystem::new(vec![(0.0, 1.0)], edges, 0.3, order).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn affine_dimension_solves_the_moran_equation(
        r1 in 0.1..0.45f64,
        r2 in 0.1..0.45f64,
        a1 in -1.0..1.0f64,
        a2 in -1.0..1.0f64,
    ) {
        let sys = two_maps([r1, r2], [a1, a2], 2);
        for eps in [0.0, 1e-3, 1e-2] {
            let s = sys.dimension_at(1, eps).unwrap();
            let want = moran_root(r1 + a1 * eps, r2 + a2 * eps);
            prop_assert!((s - want).abs() <= 1e-10, "ε = {eps}: {s} vs {want}");
        }
        // implicit differentiation of Σ r_i(ε)^s = 1 at ε = 0
        let s0 = moran_root(r1, r2);
        let fe = s0 * (r1.powf(s0 - 1.0) * a1 + r2.powf(s0 - 1.0) * a2);
        let fs = r1.powf(s0) * r1.ln() + r2.powf(s0) * r2.ln();
        let de = dimension_expansion(&sys, 1).unwrap();
        prop_assert!((de.s[1] + fe / fs).abs() <= 1e-6, "s_1 = {} vs {}", de.s[1], -fe / fs);
        let res = dimension_residuals(&sys, 1, &de, &[1e-2, 1e-3]).unwrap();
        // order 2 leaves an O(ε³) residual
        let c = res[0].2 / 1e-6;
        prop_assert!(res[1].2 <= 2.0 * c * 1e-9 + 1e-13, "{} vs C = {c}", res[1].2);
    }
}

#[test]
fn equal_ratio_closed_form() {
    let sys = fix_c::<f64>(3, None).unwrap();
    for eps in [0.0f64, 1e-3, 1e-2, 5e-2] {
        let want = 2f64.ln() / -(1.0 / 3.0 + eps).ln();
        for m in [1, 3] {
            let s = sys.dimension_at(m, eps).unwrap();
            assert!((s - want).abs() <= 1e-12, "m = {m}, ε = {eps}: {s} vs {want}");
        }
    }
}

#[test]
fn affine_dimension_does_not_depend_on_depth() {
    let sys = two_maps([0.2, 0.35], [0.5, -0.3], 1);
    for m in 1..=4 {
        let (a, b) = (sys.bowen_dimension(m).unwrap(), sys.bowen_dimension(m + 1).unwrap());
        assert!((a - b).abs() <= 1e-10, "m = {m}: {a} vs {b}");
    }
}

#[test]
fn nonlinear_dimension_converges_geometrically_in_depth() {
    let sys = continued_fraction(1);
    let s: Vec<f64> = (1..=5).map(|m| sys.bowen_dimension(m).unwrap()).collect();
    let diffs: Vec<f64> = s.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let r = sys.contraction();
    for (i, d) in diffs.iter().enumerate() {
        assert!(*d <= diffs[0] * r.powi(i as i32) + 1e-13, "depth {}: {d}, diffs {diffs:?}", i + 1);
    }
}

#[test]
fn root_is_a_zero_of_the_pressure_with_negative_slope() {
    let sys = continued_fraction(2);
    let de = dimension_expansion(&sys, 5).unwrap();
    assert!(de.pressure_at_root <= 1e-12, "{}", de.pressure_at_root);
    // the slope is the Gibbs average of log|T′| ≤ log(1/4)
    assert!(de.derivatives[0][1] <= 0.25f64.ln(), "{}", de.derivatives[0][1]);
    assert!(de.slope_check <= 1e-6, "{}", de.slope_check);
    let res = dimension_residuals(&sys, 5, &de, &[1e-2, 1e-3]).unwrap();
    let c = res[0].2 / 1e-6;
    assert!(res[1].2 <= 2.0 * c * 1e-9 + 1e-13, "{res:?}");
}

#[test]
fn dead_edges_are_pruned() {
    let mut edges = two_maps([0.3, 0.3], [0.0, 0.0], 1).edges().to_vec();
    // into vertex 1, which has no outgoing edge
    edges.push(Edge { from: 0, to: 1, map: EdgeMap::Affine { r: vec![0.1], c: vec![0.4] } });
    let sys = GdmsSystem::new(vec![(0.0, 1.0), (0.0, 1.0)], edges, 0.5, 1).unwrap();
    assert_eq!(sys.pruned_edges(), &[2]);
    assert_eq!(sys.edges().len(), 2);
    let s = sys.bowen_dimension(2).unwrap();
    assert!((s - 2f64.ln() / -(0.3f64).ln()).abs() <= 1e-12);
}
