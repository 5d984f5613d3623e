//! Embedded fixture suite behind `perturbex selfcheck`.

use num_traits::{Float, One, Zero};
use serde::Serialize;

use perturbex::fixtures::{b2_boundary_family, fix_a, fix_b, fix_c, lip_zero_family, random_family, rng, sqrt_family};
use perturbex::gapaudit::gapfree_expansion_check;
use perturbex::gdms::{dimension_expansion, dimension_residuals, gdms_gibbs_expansion};
use perturbex::linalg::dot;
use perturbex::perturb::{closed_forms_n012, expand, geometric_grid, remainders, verdict, OperatorFamily, VerdictRule};
use perturbex::shift::DepthFn;
use perturbex::thermo::{build_family, thermo_expand, thermo_remainders, PotentialFamily};
use perturbex::transfer::{gibbs_sandwich, shift_invariance_defect, spectral_triplet};
use perturbex::{Dd, Real};

use crate::tolerance::Tolerances;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub criterion: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn d(x: f64) -> Dd {
    Dd::new(x)
}

fn f(x: Dd) -> f64 {
    x.as_f64()
}

fn cylinder(len: usize, i: usize) -> Vec<Dd> {
    (0..len).map(|j| if i == j { Dd::one() } else { Dd::zero() }).collect()
}

fn family(pf: &PotentialFamily<Dd>) -> Result<OperatorFamily<Dd>, String> {
    build_family(pf, pf.phi.depth()).map_err(e)
}

fn exponential(tol: &Tolerances) -> Check {
    let fam = family(&fix_a(4).map_err(e)?)?;
    let te = thermo_expand(&fam).map_err(e)?;
    let ex = &te.expansion;
    let mut fact = 1.0;
    for k in 1..=4 {
        fact *= k as f64;
        ensure!((f(ex.lambda[k]) - 1.0 / fact).abs() <= tol.fixture, "lambda_{k} = {}", ex.lambda[k]);
    }
    ensure!((f(te.p[1]) - 0.5).abs() <= tol.fixture, "p_1 = {}", te.p[1]);
    ensure!((f(te.p[2]) - 0.125).abs() <= tol.fixture, "p_2 = {}", te.p[2]);
    let c = cylinder(2, 0);
    for (name, v) in [("kappa_1", dot(&ex.kappa[1], &c)), ("nu_1", dot(&ex.nu[1], &c)), ("mu_1", te.mu_of(1, &c))] {
        ensure!((f(v) - 0.25).abs() <= tol.fixture, "{name} = {v}");
    }
    for k in 1..=4 {
        let m = ex.g[k].iter().chain(&ex.h[k]).fold(0.0f64, |a, x| a.max(f(x.abs())));
        ensure!(m <= tol.fixture, "g_{k} or h_{k} has sup {m:e}");
    }
    Ok("lambda_k, p_1, p_2, kappa_1, nu_1, mu_1 match e^eps + 1".into())
}

fn golden(tol: &Tolerances) -> Check {
    let fam = family(&fix_b(2).map_err(e)?)?;
    let te = thermo_expand(&fam).map_err(e)?;
    let s5 = 5f64.sqrt();
    let g = (1.0 + s5) / 2.0;
    let lam = f(fam.triplet().lambda);
    ensure!((lam - g).abs() <= tol.perron, "lambda = {lam}");
    let l1 = f(te.expansion.lambda[1]);
    ensure!((l1 - g * g / s5).abs() <= tol.fixture, "lambda_1 = {l1}");
    let parry = (5.0 + s5) / 10.0;
    let (p1, mu0) = (f(te.p[1]), f(te.mu_of(0, &cylinder(2, 0))));
    ensure!((p1 - parry).abs() <= tol.fixture, "p_1 = {p1}");
    ensure!((mu0 - parry).abs() <= tol.fixture, "mu_0([0]) = {mu0}");
    Ok(format!("lambda = {lam:.12}, lambda_1 = {l1:.10}, p_1 = {p1:.10}"))
}

fn routes(tol: &Tolerances) -> Check {
    let mut r = rng(20240229);
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..50 {
        let fam = family(&random_family(&mut r, 3).map_err(e)?)?;
        let ex = expand(&fam).map_err(|x| format!("family {i}: {x}"))?;
        for k in 1..=3 {
            let (a, b) = (ex.lambda[k], ex.lambda_eigen[k]);
            let rel = f((a - b).abs() / a.abs().max(b.abs()).max(d(1e-300)));
            worst.0 = worst.0.max(rel);
            ensure!(rel <= tol.route, "family {i}: lambda_{k} routes differ by {rel:e}");
        }
        let cf = closed_forms_n012(&fam).map_err(e)?;
        let gap = |a: Dd, b: Dd| f((a - b).abs() / a.abs().max(Dd::one()));
        let vgap = |a: &[Dd], b: &[Dd]| a.iter().zip(b).map(|(&x, &y)| gap(x, y)).fold(0.0, f64::max);
        let m = [
            gap(cf.lambda1, ex.lambda[1]),
            gap(cf.lambda2, ex.lambda[2]),
            vgap(&cf.kappa1, &ex.kappa[1]),
            vgap(&cf.kappa2, &ex.kappa[2]),
            vgap(&cf.g1, &ex.g[1]),
            vgap(&cf.g2, &ex.g[2]),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        worst.1 = worst.1.max(m);
        ensure!(m <= tol.closed_form, "family {i}: closed forms differ by {m:e}");
    }
    Ok(format!("50 families, route gap {:.1e}, closed-form gap {:.1e}", worst.0, worst.1))
}

fn identities(tol: &Tolerances) -> Check {
    let mut cases = vec![
        ("exponential".to_string(), family(&fix_a(3).map_err(e)?)?),
        ("golden-mean".to_string(), family(&fix_b(3).map_err(e)?)?),
    ];
    let mut r = rng(7);
    for i in 0..5 {
        cases.push((format!("random-{i}"), family(&random_family(&mut r, 3).map_err(e)?)?));
    }
    let sys = fix_c::<Dd>(2, None).map_err(e)?;
    let de = dimension_expansion(&sys, 1).map_err(e)?;
    cases.push(("two-map".into(), gdms_gibbs_expansion(&sys, 1, &de).map_err(e)?.family));
    let mut count = 0;
    for (name, fam) in &cases {
        let ex = expand(fam).map_err(e)?;
        let obs = cylinder(fam.op().dim(), 0);
        for eps in [1e-1, 1e-2, 1e-3] {
            let rem = remainders(fam, &ex, d(eps)).map_err(e)?;
            for row in rem.identity_rows(&obs) {
                count += 1;
                ensure!(
                    row.passes(tol.identity),
                    "{name} eps {eps:e} {} order {}: direct {:e} formula {:e}",
                    row.quantity,
                    row.order,
                    row.direct,
                    row.formula
                );
            }
        }
    }
    Ok(format!("{} fixtures, {count} comparisons", cases.len()))
}

fn orders(tol: &Tolerances) -> Check {
    let grid = geometric_grid(1e-2, 0.1, 4);
    let rule = VerdictRule::default();
    let mut r = rng(5);
    let band = (1.0 - tol.slope)..=(1.0 + tol.slope);
    let mut slopes = Vec::new();
    for (name, pf) in
        [("golden-mean", fix_b::<Dd>(2).map_err(e)?), ("random", random_family::<Dd>(&mut r, 2).map_err(e)?)]
    {
        let fam = family(&pf)?;
        let te = thermo_expand(&fam).map_err(e)?;
        let obs = cylinder(fam.op().dim(), 0);
        let n = fam.order();
        let rems =
            grid.iter().map(|&x| thermo_remainders(&fam, &te, d(x), &obs)).collect::<Result<Vec<_>, _>>().map_err(e)?;
        let series: [(&str, Vec<f64>); 3] = [
            ("lambda", rems.iter().map(|r| f(r.base.lambda_direct[n].abs())).collect()),
            ("p", rems.iter().map(|r| f(r.p_direct[n].abs())).collect()),
            ("mu", rems.iter().map(|r| f(r.mu_direct[n].abs())).collect()),
        ];
        for (q, mags) in series {
            let s = verdict(&grid, &mags, rule).map_err(e)?.slope.ok_or_else(|| format!("{name} {q}: no slope"))?;
            ensure!(band.contains(&s), "{name} {q}: slope {s:.3}");
            slopes.push(s);
        }
    }
    let fam = family(&sqrt_family().map_err(e)?)?;
    let ex = expand(&fam).map_err(e)?;
    let mags = grid
        .iter()
        .map(|&x| remainders(&fam, &ex, d(x)).map(|r| f(r.lambda_direct[1].abs())))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let label = verdict(&grid, &mags, rule).map_err(e)?.label();
    ensure!(label == "stagnant", "square-root family flagged {label}");
    let lo = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!("slopes in [{lo:.3}, {hi:.3}], square-root family stagnant"))
}

fn dimension(tol: &Tolerances) -> Check {
    let n = 2;
    let sys = fix_c::<Dd>(n, None).map_err(e)?;
    let de = dimension_expansion(&sys, 1).map_err(e)?;
    let (l2, l3) = (2f64.ln(), 3f64.ln());
    let (s0, s1, s2) = (f(de.s[0]), f(de.s[1]), f(de.s[2]));
    ensure!((s0 - l2 / l3).abs() <= tol.dimension, "s_0 = {s0}");
    ensure!((s1 - 3.0 * l2 / (l3 * l3)).abs() <= tol.stencil, "s_1 = {s1}");
    let want = l2 * (9.0 / l3.powi(3) - 4.5 / (l3 * l3));
    ensure!((s2 - want).abs() <= tol.second_order * want.abs(), "s_2 = {s2}, want {want}");
    // third coefficient of log 2 / (log 3 − log(1 + 3ε))
    let s3 = l2 * (27.0 / l3.powi(4) - 27.0 / l3.powi(3) + 9.0 / (l3 * l3));
    let c = 2.0 * s3.abs();
    let res = dimension_residuals(&sys, 1, &de, &[1e-2, 1e-3]).map_err(e)?;
    for (eps, _, gap) in &res {
        ensure!(f(*gap) <= c * eps.powi(3), "residual {gap} at {eps} exceeds {c:.3} eps^3");
    }
    Ok(format!("s_0 = {s0:.10}, s_1 = {s1:.7}, s_2 = {s2:.7}"))
}

fn gap_free(tol: &Tolerances) -> Check {
    let grid = geometric_grid(1e-1, 0.1, 4);
    let mut out = Vec::new();
    for n in [1, 2] {
        let pf = lip_zero_family::<Dd>(n).map_err(e)?;
        let fam = family(&pf)?;
        let te = thermo_expand(&fam).map_err(e)?;
        let rep =
            gapfree_expansion_check(&pf, &fam, &te, &grid, &cylinder(2, 0), 1, VerdictRule::default()).map_err(e)?;
        let m = &rep.rates.b1_margins;
        let spread = m.iter().map(|x| (x - m[0]).abs() / m[0]).fold(0.0, f64::max);
        ensure!(spread <= tol.margin, "n = {n}: margins vary by {spread:e}");
        for k in 0..=n {
            let s = rep.product_slopes[k].ok_or("missing product slope")?;
            ensure!(s >= rep.expected_slope(k) - tol.product_slack, "n = {n}, k = {k}: product slope {s:.3}");
        }
        ensure!(rep.bounds_dominate(), "n = {n}: literal bounds do not dominate");
        let bad = b2_boundary_family::<Dd>(n).map_err(e)?;
        let bfam = family(&bad)?;
        let bte = thermo_expand(&bfam).map_err(e)?;
        let brep =
            gapfree_expansion_check(&bad, &bfam, &bte, &grid, &cylinder(2, 0), 1, VerdictRule::default()).map_err(e)?;
        ensure!(!brep.rates.b2_pass, "n = {n}: boundary family passes the rate condition");
        out.push(format!("n={n} c16={:.3}", rep.c16));
    }
    Ok(out.join(", "))
}

fn structural(tol: &Tolerances) -> Check {
    let mut pfs = vec![
        ("exponential".to_string(), fix_a(2).map_err(e)?, 1),
        ("exponential depth 3".to_string(), fix_a(2).map_err(e)?, 3),
        ("golden-mean".to_string(), fix_b(2).map_err(e)?, 1),
        ("golden-mean depth 2".to_string(), fix_b(2).map_err(e)?, 2),
    ];
    let mut r = rng(88);
    for i in 0..8 {
        let pf = random_family(&mut r, 2).map_err(e)?;
        let depth = pf.phi.depth() + i % 2;
        pfs.push((format!("random-{i}"), pf, depth));
    }
    let sys = fix_c::<Dd>(2, None).map_err(e)?;
    let de = dimension_expansion(&sys, 1).map_err(e)?;
    pfs.push(("two-map".into(), gdms_gibbs_expansion(&sys, 1, &de).map_err(e)?.potential, 1));
    let mut worst = 0.0f64;
    for (name, pf, depth) in &pfs {
        let fam = build_family(pf, *depth).map_err(e)?;
        let t = fam.triplet();
        let res = t.residuals(fam.op()).worst();
        ensure!(res <= tol.invariant, "{name}: triplet residual {res:e}");
        worst = worst.max(res);
        let te = thermo_expand(&fam).map_err(e)?;
        let ex = &te.expansion;
        let one = vec![Dd::one(); t.h.len()];
        for k in 1..=fam.order() {
            for (q, v) in [
                ("kappa_k(h)", dot(&ex.kappa[k], &t.h)),
                ("nu(g_k)", dot(&t.nu, &ex.g[k])),
                ("nu_k(1)", dot(&ex.nu[k], &one)),
                ("mu_k(1)", te.mu_of(k, &one)),
            ] {
                ensure!(f(v.abs()) <= tol.invariant, "{name}: {q} = {v} at k = {k}");
                worst = worst.max(f(v.abs()));
            }
        }
        let op = fam.op().cast::<f64>();
        let t64 = spectral_triplet(&op).map_err(e)?;
        for depth in 1..=4 {
            let defect = shift_invariance_defect(&t64, &op, depth).map_err(e)?;
            ensure!(defect <= tol.invariant, "{name}: shift invariance defect {defect:e}");
        }
        let shift = op.shift();
        let d0 = 2 * op.depth() + shift.len() + shift.primitivity_index().unwrap_or(1) - 1;
        let phi = DepthFn::new(pf.phi.index(), pf.phi.values().iter().map(|x| x.as_f64()).collect()).map_err(e)?;
        let rows = gibbs_sandwich(&t64, &op, &phi, (d0 + 2).max(6)).map_err(e)?;
        let c = rows[..d0].iter().map(|r| r.constant()).fold(1.0, f64::max);
        for row in &rows[d0..] {
            ensure!(
                row.constant() <= c * (1.0 + tol.invariant),
                "{name}: sandwich constant grows at depth {}",
                row.depth
            );
        }
    }
    Ok(format!("{} instances, worst defect {worst:.1e}", pfs.len()))
}

pub const CRITERIA: [&str; 8] = [
    "exponential fixture",
    "golden-mean fixture",
    "route agreement",
    "remainder identities",
    "convergence orders",
    "dimension expansion",
    "gap-free audit",
    "structural invariants",
];

/// Runs all criteria; numerical errors count as failures.
pub fn selfcheck(tol: &Tolerances) -> Vec<CriterionResult> {
    let runs: [fn(&Tolerances) -> Check; 8] =
        [exponential, golden, routes, identities, orders, dimension, gap_free, structural];
    runs.iter()
        .zip(CRITERIA)
        .enumerate()
        .map(|(i, (run, name))| {
            let (pass, detail) = match run(tol) {
                Ok(s) => (true, s),
                Err(s) => (false, s),
            };
            CriterionResult { criterion: i + 1, name, pass, detail }
        })
        .collect()
}
