//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are printed on success as well.

use std::process::ExitCode;
use std::time::Instant;

use num_traits::Float;
use perturbex::fixtures::{b2_boundary_family, fix_a, fix_b, fix_c, lip_zero_family, random_family, rng, sqrt_family};
use perturbex::gapaudit::gapfree_expansion_check;
use perturbex::gdms::{dimension_expansion, dimension_residuals, gdms_gibbs_expansion};
use perturbex::linalg::dot;
use perturbex::perturb::{closed_forms_n012, expand, geometric_grid, remainders, verdict, OperatorFamily, VerdictRule};
use perturbex::thermo::{build_family, thermo_expand, thermo_remainders, PotentialFamily};
use perturbex::transfer::{gibbs_sandwich, shift_invariance_defect};
use perturbex::{Dd, Real};

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

fn indicator(len: usize, i: usize) -> Vec<Dd> {
    (0..len).map(|j| if i == j { d(1.0) } else { d(0.0) }).collect()
}

fn family(pf: &PotentialFamily<Dd>) -> Result<OperatorFamily<Dd>, String> {
    build_family(pf, pf.phi.depth()).map_err(e)
}

fn criterion_1() -> Check {
    let pf = fix_a::<Dd>(4).map_err(e)?;
    let fam = family(&pf)?;
    let te = thermo_expand(&fam).map_err(e)?;
    let ex = &te.expansion;
    // λ(ε) = e^ε + 1
    let mut fact = 1.0;
    for k in 1..=4 {
        fact *= k as f64;
        ensure!((f(ex.lambda[k]) - 1.0 / fact).abs() <= 1e-10, "lambda_{k} = {}", ex.lambda[k]);
    }
    // P(ε) = log(e^ε + 1) = log 2 + ε/2 + ε²/8 + O(ε⁴)
    ensure!((f(te.p[1]) - 0.5).abs() <= 1e-10, "p_1 = {}", te.p[1]);
    ensure!((f(te.p[2]) - 0.125).abs() <= 1e-10, "p_2 = {}", te.p[2]);
    // μ(ε,[0]) = e^ε/(e^ε + 1) and h(ε) ≡ 1
    let ind = indicator(2, 0);
    for (name, v) in [("kappa_1", dot(&ex.kappa[1], &ind)), ("nu_1", dot(&ex.nu[1], &ind)), ("mu_1", te.mu_of(1, &ind))]
    {
        ensure!((f(v) - 0.25).abs() <= 1e-10, "{name} = {v}");
    }
    for k in 1..=4 {
        for (name, v) in [("g", &ex.g[k]), ("h", &ex.h[k])] {
            let m = v.iter().fold(0.0f64, |a, x| a.max(f(x.abs())));
            ensure!(m <= 1e-10, "{name}_{k} has sup {m:e}");
        }
    }
    Ok("lambda_k = 1/k!, p_1 = 1/2, p_2 = 1/8, kappa_1 = nu_1 = mu_1 = 1/4, g_k = h_k = 0".into())
}

fn criterion_2() -> Check {
    let pf = fix_b::<Dd>(2).map_err(e)?;
    let fam = family(&pf)?;
    let te = thermo_expand(&fam).map_err(e)?;
    let s5 = 5f64.sqrt();
    let golden = (1.0 + s5) / 2.0;
    let lam = f(fam.triplet().lambda);
    ensure!((lam - golden).abs() <= 1e-12, "lambda = {lam}");
    // λ² − e^ελ − e^ε = 0 differentiated at ε = 0
    let l1 = f(te.expansion.lambda[1]);
    ensure!((l1 - golden * golden / s5).abs() <= 1e-10, "lambda_1 = {l1}");
    let parry = (5.0 + s5) / 10.0;
    let p1 = f(te.p[1]);
    let mu0 = f(te.mu_of(0, &indicator(2, 0)));
    ensure!((p1 - parry).abs() <= 1e-10, "p_1 = {p1}");
    ensure!((mu0 - parry).abs() <= 1e-10, "mu_0([1]) = {mu0}");
    ensure!((p1 - mu0).abs() <= 1e-10, "routes differ by {:e}", (p1 - mu0).abs());
    Ok(format!("lambda = {lam:.12}, lambda_1 = {l1:.10}, p_1 = mu_0([1]) = {p1:.10}"))
}

fn criterion_3() -> Check {
    let mut r = rng(20240229);
    let mut worst_route = 0.0f64;
    let mut worst_closed = 0.0f64;
    for i in 0..50 {
        let pf = random_family::<Dd>(&mut r, 3).map_err(e)?;
        let fam = family(&pf)?;
        let ex = expand(&fam).map_err(|x| format!("family {i}: {x}"))?;
        for k in 1..=3 {
            let (a, b) = (ex.lambda[k], ex.lambda_eigen[k]);
            let rel = f((a - b).abs() / a.abs().max(b.abs()).max(d(1e-300)));
            worst_route = worst_route.max(rel);
            ensure!(rel <= 1e-11, "family {i}: lambda_{k} routes differ by {rel:e} relative");
        }
        let cf = closed_forms_n012(&fam).map_err(e)?;
        let scalar = |a: Dd, b: Dd| f((a - b).abs() / a.abs().max(d(1.0)));
        let vector = |a: &[Dd], b: &[Dd]| a.iter().zip(b).map(|(&x, &y)| scalar(x, y)).fold(0.0, f64::max);
        let diffs = [
            scalar(cf.lambda1, ex.lambda[1]),
            scalar(cf.lambda2, ex.lambda[2]),
            vector(&cf.kappa1, &ex.kappa[1]),
            vector(&cf.kappa2, &ex.kappa[2]),
            vector(&cf.g1, &ex.g[1]),
            vector(&cf.g2, &ex.g[2]),
        ];
        let m = diffs.into_iter().fold(0.0, f64::max);
        worst_closed = worst_closed.max(m);
        ensure!(m <= 1e-12, "family {i}: closed forms differ by {m:e}");
    }
    Ok(format!("50 families, worst route gap {worst_route:.1e}, worst closed-form gap {worst_closed:.1e}"))
}

fn criterion_4() -> Check {
    let mut cases: Vec<(String, OperatorFamily<Dd>, Vec<Dd>)> = vec![
        ("exponential".into(), family(&fix_a(3).map_err(e)?)?, indicator(2, 0)),
        ("golden-mean".into(), family(&fix_b(3).map_err(e)?)?, indicator(2, 0)),
    ];
    let mut r = rng(7);
    for i in 0..5 {
        let fam = family(&random_family(&mut r, 3).map_err(e)?)?;
        let dim = fam.op().dim();
        cases.push((format!("random-{i}"), fam, indicator(dim, 0)));
    }
    let sys = fix_c::<Dd>(2, None).map_err(e)?;
    let de = dimension_expansion(&sys, 1).map_err(e)?;
    let gg = gdms_gibbs_expansion(&sys, 1, &de).map_err(e)?;
    cases.push(("two-map".into(), gg.family.clone(), indicator(2, 0)));
    let mut rows = 0;
    let mut worst = 0.0f64;
    for (name, fam, obs) in &cases {
        let ex = expand(fam).map_err(e)?;
        for eps in [1e-1, 1e-2, 1e-3] {
            let rem = remainders(fam, &ex, d(eps)).map_err(e)?;
            for row in rem.identity_rows(obs) {
                if ["lambda", "lambda_eigen", "kappa", "g"].contains(&row.quantity.as_str()) {
                    rows += 1;
                    ensure!(
                        row.passes(1e-9),
                        "{name} eps {eps:e} {} order {}: direct {:e} formula {:e}",
                        row.quantity,
                        row.order,
                        row.direct,
                        row.formula
                    );
                    if row.abs_diff > row.noise {
                        worst = worst.max(row.relative());
                    }
                }
            }
        }
    }
    Ok(format!("{} fixtures, {rows} comparisons, worst relative gap {worst:.1e}", cases.len()))
}

fn criterion_5() -> Check {
    let grid = geometric_grid(1e-2, 0.1, 4);
    let rule = VerdictRule::default();
    let mut r = rng(5);
    let cases = [("golden-mean", fix_b::<Dd>(2).map_err(e)?), ("random", random_family::<Dd>(&mut r, 2).map_err(e)?)];
    let mut slopes = Vec::new();
    for (name, pf) in &cases {
        let fam = family(pf)?;
        let te = thermo_expand(&fam).map_err(e)?;
        let obs = indicator(fam.op().dim(), 0);
        let n = fam.order();
        let rems =
            grid.iter().map(|&x| thermo_remainders(&fam, &te, d(x), &obs)).collect::<Result<Vec<_>, _>>().map_err(e)?;
        let series: [(&str, Vec<f64>); 3] = [
            ("lambda", rems.iter().map(|r| f(r.base.lambda_direct[n].abs())).collect()),
            ("p", rems.iter().map(|r| f(r.p_direct[n].abs())).collect()),
            ("mu", rems.iter().map(|r| f(r.mu_direct[n].abs())).collect()),
        ];
        for (q, mags) in series {
            let v = verdict(&grid, &mags, rule).map_err(e)?;
            let s = v.slope.ok_or_else(|| format!("{name} {q}: no slope"))?;
            ensure!((0.8..=1.2).contains(&s), "{name} {q}: slope {s:.3}");
            slopes.push(s);
        }
    }
    let pf = sqrt_family::<Dd>().map_err(e)?;
    let fam = family(&pf)?;
    let ex = expand(&fam).map_err(e)?;
    let mags = grid
        .iter()
        .map(|&x| remainders(&fam, &ex, d(x)).map(|r| f(r.lambda_direct[1].abs())))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let v = verdict(&grid, &mags, rule).map_err(e)?;
    ensure!(v.label() == "stagnant", "sqrt family flagged {}", v.label());
    let lo = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().cloned().fold(0.0, f64::max);
    Ok(format!("slopes in [{lo:.3}, {hi:.3}], sqrt family stagnant"))
}

/// Taylor coefficients of `log 2 / (log 3 − log(1 + 3ε))` up to `order`.
fn dimension_oracle(order: usize) -> Vec<f64> {
    let l2 = 2f64.ln();
    // u(ε) = log 3 − Σ_{j≥1} (−1)^{j+1}(3ε)^j/j
    let mut u = vec![3f64.ln()];
    for j in 1..=order {
        let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
        u.push(sign * 3f64.powi(j as i32) / j as f64);
    }
    let mut s = vec![l2 / u[0]];
    for k in 1..=order {
        let acc: f64 = (1..=k).map(|j| u[j] * s[k - j]).sum();
        s.push(-acc / u[0]);
    }
    s
}

fn criterion_6() -> Check {
    let n = 2;
    let sys = fix_c::<Dd>(n, None).map_err(e)?;
    let de = dimension_expansion(&sys, 1).map_err(e)?;
    let oracle = dimension_oracle(n + 1);
    let (l2, l3) = (2f64.ln(), 3f64.ln());
    let (s0, s1, s2) = (f(de.s[0]), f(de.s[1]), f(de.s[2]));
    ensure!((s0 - l2 / l3).abs() <= 1e-10, "s_0 = {s0}");
    ensure!((s1 - 3.0 * l2 / (l3 * l3)).abs() <= 1e-6, "s_1 = {s1}");
    let second = l2 * (18.0 / l3.powi(3) - 9.0 / (l3 * l3));
    ensure!((s2 - second / 2.0).abs() <= 1e-8 * (second / 2.0).abs(), "s_2 = {s2}, want {}", second / 2.0);
    ensure!((s2 - oracle[2]).abs() <= 1e-8 * oracle[2].abs(), "s_2 disagrees with the series oracle");
    let c = 2.0 * oracle[n + 1].abs();
    let res = dimension_residuals(&sys, 1, &de, &[1e-2, 1e-3]).map_err(e)?;
    for (eps, direct, gap) in &res {
        let closed = l2 / -(1.0 / 3.0 + eps).ln();
        ensure!((f(*direct) - closed).abs() <= 1e-10, "s({eps}) by root finding = {direct}");
        ensure!(f(*gap) <= c * eps.powi(n as i32 + 1), "residual {gap} at {eps} exceeds {c} eps^{}", n + 1);
    }
    Ok(format!("s_0 = {s0:.10}, s_1 = {s1:.7}, s_2 = {s2:.7}, residuals {:.1e}, {:.1e}", f(res[0].2), f(res[1].2)))
}

fn criterion_7() -> Check {
    let grid = geometric_grid(1e-1, 0.1, 4);
    let mut details = Vec::new();
    for n in [1, 2] {
        let pf = lip_zero_family::<Dd>(n).map_err(e)?;
        let fam = family(&pf)?;
        let te = thermo_expand(&fam).map_err(e)?;
        let rep =
            gapfree_expansion_check(&pf, &fam, &te, &grid, &indicator(2, 0), 1, VerdictRule::default()).map_err(e)?;
        let m = &rep.rates.b1_margins;
        let spread = m.iter().map(|x| (x - m[0]).abs() / m[0]).fold(0.0, f64::max);
        ensure!(spread <= 1e-12, "n = {n}: c(eps) eps^(1/(n+2)) varies by {spread:e}");
        for k in 0..=n {
            let s = rep.product_slopes[k].ok_or("missing product slope")?;
            let want = (k as f64 + 1.0) / (n as f64 + 2.0);
            ensure!(s >= want - 0.1, "n = {n}, k = {k}: product slope {s:.3} below {want:.3} - 0.1");
        }
        for row in &rep.rows {
            ensure!(row.bounds_dominate(), "n = {n}: literal bounds fail at eps {:e}", row.eps);
        }
        details.push(format!(
            "n={n} slopes {:?}",
            rep.product_slopes.iter().map(|s| format!("{:.3}", s.unwrap_or(f64::NAN))).collect::<Vec<_>>()
        ));
        let bad = b2_boundary_family::<Dd>(n).map_err(e)?;
        let bfam = family(&bad)?;
        let bte = thermo_expand(&bfam).map_err(e)?;
        let brep = gapfree_expansion_check(&bad, &bfam, &bte, &grid, &indicator(2, 0), 1, VerdictRule::default())
            .map_err(e)?;
        ensure!(!brep.rates.b2_pass, "n = {n}: boundary family passes the remainder rate condition");
    }
    Ok(details.join("; "))
}

fn criterion_8() -> Check {
    let mut pfs: Vec<(String, PotentialFamily<Dd>, usize)> = vec![
        ("exponential".into(), fix_a(2).map_err(e)?, 1),
        ("exponential depth 3".into(), fix_a(2).map_err(e)?, 3),
        ("golden-mean".into(), fix_b(2).map_err(e)?, 1),
        ("golden-mean depth 2".into(), fix_b(2).map_err(e)?, 2),
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
    let tol = 1e-10;
    let mut worst = 0.0f64;
    for (name, pf, depth) in &pfs {
        let fam = build_family(pf, *depth).map_err(e)?;
        let t = fam.triplet();
        let res = t.residuals(fam.op());
        ensure!(res.worst() <= tol, "{name}: triplet residual {:e}", res.worst());
        worst = worst.max(res.worst());
        let te = thermo_expand(&fam).map_err(e)?;
        let ex = &te.expansion;
        let one = vec![d(1.0); t.dim()];
        for k in 1..=fam.order() {
            for (q, v) in [
                ("kappa_k(h)", dot(&ex.kappa[k], &t.h)),
                ("nu(g_k)", dot(&t.nu, &ex.g[k])),
                ("nu_k(1)", dot(&ex.nu[k], &one)),
                ("mu_k(1)", te.mu_of(k, &one)),
            ] {
                ensure!(f(v.abs()) <= tol, "{name}: {q} = {v} at k = {k}");
                worst = worst.max(f(v.abs()));
            }
        }
        let op64 = fam.op().cast::<f64>();
        let t64 = perturbex::transfer::spectral_triplet(&op64).map_err(e)?;
        for depth in 1..=4 {
            let defect = shift_invariance_defect(&t64, &op64, depth).map_err(e)?;
            ensure!(defect <= tol, "{name}: shift invariance defect {defect:e} at depth {depth}");
        }
        let m = op64.depth();
        let shift = op64.shift();
        let d0 = 2 * m + shift.len() + shift.primitivity_index().unwrap_or(1) - 1;
        let top = (d0 + 2).max(6);
        let phi64 = pf.phi.values().iter().map(|x| x.as_f64()).collect::<Vec<_>>();
        let phi64 = perturbex::shift::DepthFn::new(pf.phi.index(), phi64).map_err(e)?;
        let rows = gibbs_sandwich(&t64, &op64, &phi64, top).map_err(e)?;
        let c = rows[..d0].iter().map(|r| r.constant()).fold(1.0, f64::max);
        for row in &rows[d0..] {
            ensure!(
                row.constant() <= c * (1.0 + tol),
                "{name}: sandwich constant {} at depth {} exceeds {c}",
                row.constant(),
                row.depth
            );
        }
    }
    Ok(format!("{} instances, worst residual {worst:.1e}", pfs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("exponential fixture", criterion_1),
        ("golden-mean fixture", criterion_2),
        ("route agreement", criterion_3),
        ("remainder identities", criterion_4),
        ("convergence orders", criterion_5),
        ("dimension expansion", criterion_6),
        ("gap-free audit", criterion_7),
        ("structural invariants", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.2}s] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.2}s] {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
