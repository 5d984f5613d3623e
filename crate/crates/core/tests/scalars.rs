use num_traits::Float;

use perturbex::fixtures::fix_a;
use perturbex::perturb::expand;
use perturbex::thermo::{build_family, pressure_coefficients};
use perturbex::{Dd, DdFamily, F64Family, Real};

/// Worst gap between `λ_k` and `1/k!`, and between `p_1` and `1/2`.
fn exponential_gaps<T: Real>() -> (f64, f64) {
    let pf = fix_a::<T>(4).unwrap();
    let fam = build_family(&pf, 1).unwrap();
    let ex = expand(&fam).unwrap();
    let mut fact = 1.0;
    let mut worst = 0.0f64;
    for (k, l) in ex.lambda.iter().enumerate().skip(1) {
        fact *= k as f64;
        worst = worst.max((l.as_f64() - 1.0 / fact).abs());
    }
    let p = pressure_coefficients(&ex.lambda).unwrap();
    (worst, (p[1].as_f64() - 0.5).abs())
}

#[test]
fn single_precision() {
    let (l, p) = exponential_gaps::<f32>();
    assert!(l <= 1e-5 && p <= 1e-5, "{l} {p}");
}

#[test]
fn double_precision() {
    let (l, p) = exponential_gaps::<f64>();
    assert!(l <= 1e-14 && p <= 1e-14, "{l} {p}");
}

#[test]
fn double_double_precision() {
    let pf = fix_a::<Dd>(4).unwrap();
    let fam: DdFamily = build_family(&pf, 1).unwrap();
    let ex = expand(&fam).unwrap();
    // λ_3 = 1/6 beyond f64 resolution
    let gap = ex.lambda[3] - Dd::new(1.0) / Dd::new(6.0);
    assert!(gap.abs() <= Dd::new(1e-28), "{gap}");
    let (l, p) = exponential_gaps::<Dd>();
    assert!(l <= 1e-16 && p <= 1e-16, "{l} {p}");
}

#[test]
fn precisions_agree() {
    let f: F64Family = build_family(&fix_a::<f64>(2).unwrap(), 1).unwrap();
    let d: DdFamily = build_family(&fix_a::<Dd>(2).unwrap(), 1).unwrap();
    let (ef, ed) = (expand(&f).unwrap(), expand(&d).unwrap());
    for k in 0..=2 {
        assert!((ef.lambda[k] - ed.lambda[k].as_f64()).abs() <= 1e-15);
    }
}
