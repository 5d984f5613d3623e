//! `perturbex run`: builds the model described by a scenario, expands it,
//! compares remainders on the grid and writes the three reports.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_traits::{Float, One, Zero};
use serde_json::{json, Value};

use perturbex::gapaudit::gapfree_expansion_check;
use perturbex::gdms::{
    dimension_expansion, dimension_residuals, gdms_condition_audit, gdms_gibbs_expansion, Edge, EdgeMap, GdmsSystem,
};
use perturbex::linalg::{dot, sup_norm};
use perturbex::perturb::{verdict, IdentityRow, OperatorFamily, Verdict, VerdictRule};
use perturbex::shift::{admissible_words, build_shift, DepthFn, ShiftSpace, WordIndex};
use perturbex::thermo::{
    build_family, power_tail, thermo_expand, thermo_remainders, PotentialFamily, ThermoExpansion, ThetaSchedule,
};
use perturbex::{Dd, Real};

use crate::error::CliError;
use crate::report::{atomic_write, coefficients_table, remainder_csv, CsvRow};
use crate::scenario::{format_word, parse_word, Kind, MapSpec, Observable, Scenario, Table, ThetaSpec};
use crate::tolerance::Tolerances;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub strict: bool,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Everything a run produces, before anything is written.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub coefficients: Vec<(String, f64)>,
    pub rows: Vec<CsvRow>,
    pub verdict: Value,
    pub pass: bool,
}

/// Paths of the written reports.
#[derive(Clone, Debug)]
pub struct Written {
    pub coefficients: PathBuf,
    pub remainders: PathBuf,
    pub verdict: PathBuf,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn d(x: f64) -> Dd {
    Dd::new(x)
}

/// Maps original symbol numbers onto the pruned shift.
struct Symbols {
    shift: Arc<ShiftSpace>,
    map: Vec<Option<usize>>,
}

impl Symbols {
    fn new(transition: &[Vec<u8>]) -> Result<Self, CliError> {
        let shift = build_shift(transition).map_err(|e| schema(format!("shift: {e}")))?;
        let mut map = vec![None; transition.len()];
        for (new, &old) in shift.kept_states().iter().enumerate() {
            map[old] = Some(new);
        }
        Ok(Symbols { shift: Arc::new(shift), map })
    }

    /// `None` for words through pruned symbols.
    fn word(&self, w: &[usize]) -> Result<Option<Vec<usize>>, CliError> {
        let mut out = Vec::with_capacity(w.len());
        for &s in w {
            match self.map.get(s) {
                None => return Err(schema(format!("symbol {s} out of range in word {}", format_word(w)))),
                Some(None) => return Ok(None),
                Some(Some(t)) => out.push(*t),
            }
        }
        Ok(Some(out))
    }

    fn table(&self, t: &Table, what: &str) -> Result<DepthFn<Dd>, CliError> {
        let idx = admissible_words(&self.shift, t.depth)?;
        let mut values = vec![Dd::zero(); idx.len()];
        for (k, &v) in &t.values {
            let Some(w) = self.word(&parse_word(k)?)? else {
                if v != 0.0 {
                    return Err(schema(format!("{what}: word {k:?} runs through a pruned symbol")));
                }
                continue;
            };
            let i = idx.position(&w).ok_or_else(|| schema(format!("{what}: word {k:?} is not admissible")))?;
            values[i] = d(v);
        }
        Ok(DepthFn::new(&idx, values)?)
    }
}

fn theta_schedule(spec: &Option<ThetaSpec>) -> Option<ThetaSchedule> {
    spec.as_ref().map(|t| match *t {
        ThetaSpec::Fixed { theta } => ThetaSchedule::Fixed(theta),
        ThetaSpec::Power { base, exponent } => ThetaSchedule::Power { base, exponent },
    })
}

pub fn build_potential(sc: &Scenario) -> Result<(PotentialFamily<Dd>, Arc<ShiftSpace>, Vec<usize>), CliError> {
    let shift = sc.shift.as_ref().ok_or_else(|| schema("missing shift"))?;
    let p = sc.potential.as_ref().ok_or_else(|| schema("missing potential"))?;
    let sym = Symbols::new(&shift.transition)?;
    let base = sym.table(&p.base, "potential base")?;
    let coeffs = p
        .coefficients
        .iter()
        .enumerate()
        .map(|(k, t)| sym.table(t, &format!("coefficient {}", k + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    let tails = p
        .tail
        .iter()
        .enumerate()
        .map(|(k, t)| Ok((t.power, sym.table(&t.table, &format!("tail term {k}"))?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let depth =
        std::iter::once(&base).chain(&coeffs).chain(tails.iter().map(|(_, f)| f)).map(|f| f.depth()).max().unwrap_or(1);
    let idx = admissible_words(&sym.shift, depth)?;
    let lift = |f: &DepthFn<Dd>| f.refine_to(&idx);
    let mut pf = PotentialFamily::new(lift(&base)?, coeffs.iter().map(lift).collect::<Result<Vec<_>, _>>()?)?;
    if !tails.is_empty() {
        let tails = tails.iter().map(|(p, f)| Ok((*p, lift(f)?))).collect::<perturbex::Result<Vec<_>>>()?;
        pf = pf.with_tail(power_tail(tails)?);
    }
    if let Some(t) = theta_schedule(&sc.theta) {
        pf = pf.with_theta(t);
    }
    let pruned = sym.shift.pruned_states().to_vec();
    Ok((pf, sym.shift.clone(), pruned))
}

pub fn build_gdms(sc: &Scenario) -> Result<GdmsSystem<Dd>, CliError> {
    let g = sc.graph.as_ref().ok_or_else(|| schema("missing graph"))?;
    let jet = |v: &[f64]| v.iter().map(|&x| d(x)).collect::<Vec<_>>();
    let edges = g
        .edges
        .iter()
        .map(|e| Edge {
            from: e.from,
            to: e.to,
            map: match &e.map {
                MapSpec::Affine { r, c } => EdgeMap::Affine { r: jet(r), c: jet(c) },
                MapSpec::Moebius { a, b, c, d } => EdgeMap::Moebius { a: jet(a), b: jet(b), c: jet(c), d: jet(d) },
            },
        })
        .collect();
    let seeds = g.seeds.iter().map(|&[lo, hi]| (d(lo), d(hi))).collect();
    GdmsSystem::new(seeds, edges, g.contraction, sc.order).map_err(|e| schema(format!("graph: {e}")))
}

/// Observable vectors on `idx`; the default is the cylinder of symbol 0.
/// Symbols are mapped through `map` when the shift was pruned.
fn observables(
    sc: &Scenario,
    idx: &Arc<WordIndex>,
    map: &dyn Fn(&[usize]) -> Result<Vec<usize>, CliError>,
) -> Result<Vec<Vec<Dd>>, CliError> {
    let default = [Observable::Cylinder(vec![0])];
    let list: &[Observable] = if sc.observables.is_empty() { &default } else { &sc.observables };
    list.iter()
        .enumerate()
        .map(|(j, o)| {
            let f = match o {
                Observable::Cylinder(w) => {
                    if w.len() > idx.depth() {
                        return Err(schema(format!("observable {j}: cylinder deeper than the operator; raise depth")));
                    }
                    DepthFn::indicator(idx, &map(w)?)?
                }
                Observable::Table(t) => {
                    if t.depth > idx.depth() {
                        return Err(schema(format!("observable {j}: table deeper than the operator; raise depth")));
                    }
                    let sub = admissible_words(idx.shift(), t.depth)?;
                    let mut values = vec![Dd::zero(); sub.len()];
                    for (k, &v) in &t.values {
                        let w = map(&parse_word(k)?)?;
                        let i = sub
                            .position(&w)
                            .ok_or_else(|| schema(format!("observable {j}: word {k:?} is not admissible")))?;
                        values[i] = d(v);
                    }
                    DepthFn::new(&sub, values)?.refine_to(idx)?
                }
            };
            Ok(f.into_values())
        })
        .collect()
}

fn label(q: &str, j: usize) -> String {
    if j == 0 {
        q.to_string()
    } else {
        format!("{q}(f{j})")
    }
}

fn csv_row(r: &IdentityRow, quantity: String) -> CsvRow {
    CsvRow { epsilon: r.epsilon, order: r.order, quantity, direct: r.direct, formula: r.formula, abs_diff: r.abs_diff }
}

fn verdict_json(quantity: &str, order: usize, v: &Verdict) -> Value {
    json!({
        "quantity": quantity,
        "order": order,
        "verdict": v.label(),
        "slope": v.slope,
        "tail_slope": v.tail_slope,
        "magnitudes": v.magnitudes,
    })
}

/// Rows of the identity comparison and their pass flag.
struct IdentityPass {
    rows: Vec<CsvRow>,
    compared: usize,
    failures: Vec<String>,
    worst: f64,
}

/// Direct against formula remainders of `λ`, `κ`, `ν`, `g` and `μ` at
/// every grid point.
fn identity_pass(
    fam: &OperatorFamily<Dd>,
    te: &ThermoExpansion<Dd>,
    grid: &[f64],
    fs: &[Vec<Dd>],
    tol: f64,
) -> Result<(IdentityPass, Vec<Vec<f64>>), CliError> {
    let mut out = IdentityPass { rows: Vec::new(), compared: 0, failures: Vec::new(), worst: 0.0 };
    let n = fam.order();
    // |~λ_n|, |~p_n| and |~μ_n(f_0)| per grid point
    let mut tails = vec![Vec::new(); 3];
    for &e in grid {
        for (j, f) in fs.iter().enumerate() {
            let tr = thermo_remainders(fam, te, d(e), f)?;
            let mut rows = tr.base.identity_rows(f);
            if j > 0 {
                rows.retain(|r| r.quantity == "kappa" || r.quantity == "nu");
            }
            let fsize = sup_norm(f).as_f64();
            for k in 0..tr.mu_direct.len() {
                let (dv, fv) = (tr.mu_direct[k].as_f64(), tr.mu_formula[k].as_f64());
                rows.push(IdentityRow {
                    epsilon: e,
                    order: k,
                    quantity: "mu".into(),
                    direct: dv,
                    formula: fv,
                    abs_diff: (dv - fv).abs(),
                    noise: 256.0 * Dd::unit_roundoff() * fsize.max(1.0) * e.powi(-(k as i32)),
                });
            }
            for r in &rows {
                out.compared += 1;
                if !r.passes(tol) {
                    out.failures.push(format!(
                        "{} order {} at epsilon {:e}",
                        label(&r.quantity, j),
                        r.order,
                        r.epsilon
                    ));
                } else if r.abs_diff > r.noise {
                    out.worst = out.worst.max(r.relative());
                }
                out.rows.push(csv_row(r, label(&r.quantity, j)));
            }
            if j == 0 {
                tails[0].push(tr.base.lambda_direct[n].abs().as_f64());
                tails[1].push(tr.p_direct[n].abs().as_f64());
                tails[2].push(tr.mu_direct[n].abs().as_f64());
            }
        }
    }
    Ok((out, tails))
}

/// `κ_k(h)`, `ν(g_k)`, `ν_k(1)`, `μ_k(1)` for `k ≥ 1` and the triplet
/// residuals.
fn invariants(fam: &OperatorFamily<Dd>, te: &ThermoExpansion<Dd>) -> f64 {
    let t = fam.triplet();
    let ex = &te.expansion;
    let one = vec![Dd::one(); t.h.len()];
    let mut worst = t.residuals(fam.op()).worst();
    for k in 1..=fam.order() {
        for v in [dot(&ex.kappa[k], &t.h), dot(&t.nu, &ex.g[k]), dot(&ex.nu[k], &one), te.mu_of(k, &one)] {
            worst = worst.max(v.abs().as_f64());
        }
    }
    worst
}

fn thermo_coefficients(te: &ThermoExpansion<Dd>, fs: &[Vec<Dd>], prefix: &str) -> Vec<(String, f64)> {
    let ex = &te.expansion;
    let n = ex.lambda.len() - 1;
    let mut c = Vec::new();
    for k in 0..=n {
        c.push((format!("{prefix}lambda_{k}"), ex.lambda[k].as_f64()));
    }
    for k in 0..=n {
        c.push((format!("{prefix}lambda_eigen_{k}"), ex.lambda_eigen[k].as_f64()));
    }
    for k in 0..=n {
        c.push((format!("{prefix}p_{k}"), te.p[k].as_f64()));
    }
    for (j, f) in fs.iter().enumerate() {
        for k in 0..=n {
            c.push((format!("{prefix}mu_{k}(f{j})"), te.mu_of(k, f).as_f64()));
        }
        for k in 0..=n {
            c.push((format!("{prefix}kappa_{k}(f{j})"), dot(&ex.kappa[k], f).as_f64()));
        }
        for k in 0..=n {
            c.push((format!("{prefix}nu_{k}(f{j})"), dot(&ex.nu[k], f).as_f64()));
        }
    }
    for k in 1..=n {
        c.push((format!("{prefix}g_{k}_sup"), sup_norm(&ex.g[k]).as_f64()));
        c.push((format!("{prefix}h_{k}_sup"), sup_norm(&ex.h[k]).as_f64()));
    }
    c
}

fn check(name: &str, pass: bool, detail: Value) -> Value {
    json!({ "name": name, "pass": pass, "detail": detail })
}

fn convergence_check(grid: &[f64], order: usize, tails: &[Vec<f64>]) -> Result<Value, CliError> {
    let rule = VerdictRule::default();
    let mut list = Vec::new();
    let mut pass = true;
    for (q, mags) in ["lambda", "p", "mu"].iter().zip(tails) {
        let v = verdict(grid, mags, rule)?;
        pass &= v.vanishing;
        list.push(verdict_json(q, order, &v));
    }
    Ok(check("convergence", pass, Value::Array(list)))
}

fn identity_check(ip: &IdentityPass, tol: f64) -> Value {
    check(
        "identities",
        ip.failures.is_empty(),
        json!({
            "compared": ip.compared,
            "tolerance": tol,
            "worst_relative": ip.worst,
            "failures": ip.failures,
        }),
    )
}

fn shift_scenario(sc: &Scenario, tol: &Tolerances, seed: u64) -> Result<RunOutcome, CliError> {
    let (pf, shift, pruned) = build_potential(sc)?;
    let fam = build_family(&pf, sc.depth.max(pf.phi.depth())).map_err(|e| match e {
        perturbex::Error::NotPrimitive | perturbex::Error::Reducible | perturbex::Error::EmptyShift => {
            schema(format!("shift: {e}"))
        }
        e => CliError::Numerical(e),
    })?;
    let idx = fam.op().index().clone();
    let sym_map = {
        let kept = shift.kept_states().to_vec();
        move |w: &[usize]| -> Result<Vec<usize>, CliError> {
            w.iter()
                .map(|s| {
                    kept.iter()
                        .position(|k| k == s)
                        .ok_or_else(|| schema(format!("symbol {s} is not in the pruned shift")))
                })
                .collect()
        }
    };
    let fs = observables(sc, &idx, &sym_map)?;
    let te = thermo_expand(&fam)?;
    let grid = sc.grid_points();
    let (ip, tails) = identity_pass(&fam, &te, &grid, &fs, tol.identity)?;
    let inv = invariants(&fam, &te);
    let mut coefficients = thermo_coefficients(&te, &fs, "");
    coefficients.push(("triplet_residual".into(), fam.triplet().residuals(fam.op()).worst()));
    let mut checks = vec![
        identity_check(&ip, tol.identity),
        check("invariants", inv <= tol.invariant, json!({ "worst": inv, "tolerance": tol.invariant })),
        convergence_check(&grid, fam.order(), &tails)?,
    ];
    let mut extra = json!({});
    if sc.kind == Kind::GapAudit {
        let rep = gapfree_expansion_check(&pf, &fam, &te, &grid, &fs[0], seed, VerdictRule::default())?;
        coefficients.push(("c16".into(), rep.c16));
        for (k, s) in rep.product_slopes.iter().enumerate() {
            coefficients.push((format!("product_slope_{k}"), s.unwrap_or(f64::NAN)));
        }
        let pass = rep.criterion_pass && rep.bounds_dominate();
        let rows: Vec<Value> = rep
            .rows
            .iter()
            .map(|r| {
                json!({
                    "epsilon": r.eps,
                    "theta": r.theta,
                    "ln_c": r.s.c.ln,
                    "ln_s_lemma": r.s.lemma.ln,
                    "ln_s_chain": r.s.chain.ln,
                    "s_empirical": [r.s.empirical.lower, r.s.empirical.upper],
                    "tl_literal": r.tl_literal,
                    "tl_empirical_lower": r.tl_empirical.iter().map(|b| b.lower).collect::<Vec<_>>(),
                    "bounds_dominate": r.bounds_dominate(),
                })
            })
            .collect();
        checks.push(check(
            "gap-audit",
            pass,
            json!({
                "c16": rep.c16,
                "b1_margins": rep.rates.b1_margins,
                "b1_pass": rep.rates.b1_pass,
                "b2_margins": rep.rates.b2_margins,
                "b2_pass": rep.rates.b2_pass,
                "product_slopes": rep.product_slopes,
                "expected_slopes": (0..=rep.order).map(|k| rep.expected_slope(k)).collect::<Vec<_>>(),
                "bounds_dominate": rep.bounds_dominate(),
                "criterion_pass": rep.criterion_pass,
                "agree": rep.agree,
                "note": rep.note(),
                "rows": rows,
            }),
        ));
        extra = json!({ "seed": seed });
    }
    finish(sc, coefficients, ip.rows, checks, json!({ "pruned_symbols": pruned, "extra": extra }))
}

fn gdms_scenario(sc: &Scenario, tol: &Tolerances) -> Result<RunOutcome, CliError> {
    let sys = build_gdms(sc)?;
    let m = sc.depth;
    let de = dimension_expansion(&sys, m)?;
    let grid = sc.grid_points();
    let n = sys.order();
    let gibbs = gdms_gibbs_expansion(&sys, m, &de)?;
    let idx = gibbs.family.op().index().clone();
    let edges = sys.edges().len();
    let same = move |w: &[usize]| -> Result<Vec<usize>, CliError> {
        match w.iter().find(|&&s| s >= edges) {
            Some(s) => Err(schema(format!("edge {s} out of range"))),
            None => Ok(w.to_vec()),
        }
    };
    let fs = observables(sc, &idx, &same)?;
    let mut rows = Vec::new();
    let mut scaled = Vec::new();
    for (e, direct, _) in dimension_residuals(&sys, m, &de, &grid)? {
        let s = direct.as_f64();
        let mut series = Dd::zero();
        for k in 0..=n {
            series = series + de.s[k] * d(e).powi(k as i32);
            let f = series.as_f64();
            rows.push(CsvRow {
                epsilon: e,
                order: k,
                quantity: "s".into(),
                direct: s,
                formula: f,
                abs_diff: (direct - series).abs().as_f64(),
            });
        }
        scaled.push(((direct - series).abs() / d(e).powi(n as i32)).as_f64());
    }
    let (ip, _) = identity_pass(&gibbs.family, &gibbs.thermo, &grid, &fs, tol.identity)?;
    rows.extend(ip.rows.iter().cloned());
    let inv = invariants(&gibbs.family, &gibbs.thermo);
    let audit = gdms_condition_audit(de.s[0].as_f64(), 1, n, None, false)?;
    let mut coefficients: Vec<(String, f64)> = (0..=n).map(|k| (format!("s_{k}"), de.s[k].as_f64())).collect();
    coefficients.push(("pressure_at_root".into(), de.pressure_at_root));
    coefficients.push(("slope_check".into(), de.slope_check));
    coefficients.push(("gibbs_pressure_defect".into(), gibbs.pressure_defect));
    coefficients.extend(thermo_coefficients(&gibbs.thermo, &fs, "gibbs_"));
    let v = verdict(&grid, &scaled, VerdictRule::default())?;
    let checks = vec![
        check(
            "bowen-root",
            de.pressure_at_root <= tol.dimension,
            json!({ "pressure_at_root": de.pressure_at_root, "tolerance": tol.dimension }),
        ),
        check("dimension-residuals", v.vanishing, verdict_json("s", n, &v)),
        identity_check(&ip, tol.identity),
        check("invariants", inv <= tol.invariant, json!({ "worst": inv, "tolerance": tol.invariant })),
        check(
            "conditions",
            audit.pass,
            json!({ "t": audit.t, "t_tilde": audit.t_tilde, "p_n": audit.p_n, "dim_over_d": audit.dim_over_d }),
        ),
    ];
    finish(sc, coefficients, rows, checks, json!({ "pruned_symbols": sys.pruned_edges() }))
}

fn finish(
    sc: &Scenario,
    coefficients: Vec<(String, f64)>,
    rows: Vec<CsvRow>,
    checks: Vec<Value>,
    info: Value,
) -> Result<RunOutcome, CliError> {
    let pass = checks.iter().all(|c| c["pass"] == json!(true));
    let verdict = json!({
        "schema": crate::scenario::SCHEMA_VERSION,
        "scenario": sc.name,
        "kind": sc.kind.as_str(),
        "order": sc.order,
        "grid": sc.grid_points(),
        "checks": checks,
        "info": info,
        "pass": pass,
    });
    Ok(RunOutcome { coefficients, rows, verdict, pass })
}

/// Computes every report without touching the file system.
pub fn evaluate(sc: &Scenario, tol: &Tolerances, seed: u64) -> Result<RunOutcome, CliError> {
    sc.validate()?;
    match sc.kind {
        Kind::ShiftPerturbation | Kind::GapAudit => shift_scenario(sc, tol, seed),
        Kind::Gdms => gdms_scenario(sc, tol),
    }
}

pub fn write_reports(sc: &Scenario, outcome: &RunOutcome, dir: &Path) -> Result<Written, CliError> {
    let w = Written {
        coefficients: dir.join(&sc.outputs.coefficients),
        remainders: dir.join(&sc.outputs.remainders),
        verdict: dir.join(&sc.outputs.verdict),
    };
    atomic_write(&w.coefficients, coefficients_table(&outcome.coefficients).as_bytes())?;
    atomic_write(&w.remainders, &remainder_csv(&outcome.rows)?)?;
    let mut json = serde_json::to_string_pretty(&outcome.verdict).expect("verdict serializes");
    json.push('\n');
    atomic_write(&w.verdict, json.as_bytes())?;
    Ok(w)
}

/// Loads, evaluates and writes. The output directory defaults to the
/// directory holding the scenario file.
pub fn run_scenario(path: &Path, opts: &RunOptions, tol: &Tolerances) -> Result<(RunOutcome, Written), CliError> {
    let sc = Scenario::load(path)?;
    let seed = opts.seed.or(sc.seed).unwrap_or(DEFAULT_SEED);
    let outcome = evaluate(&sc, tol, seed)?;
    let dir = match &opts.out {
        Some(d) => d.clone(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let written = write_reports(&sc, &outcome, &dir)?;
    Ok((outcome, written))
}
