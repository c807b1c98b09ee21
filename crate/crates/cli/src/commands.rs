//! The seven subcommands. Each prints a plain-text summary to stdout and,
//! when `--out DIR` is given, writes its JSON/CSV artifacts there plus a
//! manifest listing them.

use crate::config::{self, Loaded, Overrides};
use crate::emit::{digest, fmt_float, to_json_string, CsvCell, CsvTable, OutputDir};
use crate::Failure;
use nodalmp_core::bubble::{self, BubbleParams, ExpansionReport, TermId};
use nodalmp_core::constants::{e_constant, ConstantBundle};
use nodalmp_core::mesh::{project_to_h, split_check, verify_weak_commute, DomainMesh, MeshKind, SymmetrySpec};
use nodalmp_core::pohozaev::{identity_terms, nonexistence_check, star_shaped_check};
use nodalmp_core::problem::{
    check_conditions_c, exponent_windows, mp_threshold, CaseId, CoercivityControls, MpThreshold,
};
use nodalmp_core::solver::{
    concentration_check, continuation, far_point, mountain_pass, nodal_rebuild, rim_estimate,
    DiscreteField, DiscreteProblem, MountainPassResult,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::Path;

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ConstantsOut {
    n: u32,
    p: f64,
    q: Option<f64>,
    bundle: ConstantBundle,
    e_constant: Option<f64>,
}

pub fn constants_cmd(n: u32, p: f64, q: Option<f64>, out: Option<&Path>) -> Result<(), Failure> {
    let bundle = ConstantBundle::new(n, p)?;
    let e_val = match q {
        Some(qv) => Some(e_constant(n, p, qv)?),
        None => None,
    };

    println!("special constants for n = {n}, p = {}", fmt_float(p));
    let rows: Vec<(&str, f64)> = vec![
        ("omega (unit sphere area)", bundle.omega),
        ("I (base integral)", bundle.i_base),
        ("a(n,p)", bundle.ratio_a),
        ("b(n,p)", bundle.ratio_b),
        ("c(n,p)", bundle.ratio_c),
        ("C(n,p)", bundle.bubble_c),
        ("K(n,p)^{-n}", bundle.k_pow_minus_n),
    ];
    for (name, value) in &rows {
        println!("  {name:<26} {}", fmt_float(*value));
    }
    if let (Some(qv), Some(ev)) = (q, e_val) {
        println!("  e(n,p,q) at q = {:<12} {}", fmt_float(qv), fmt_float(ev));
    }

    if let Some(dir) = out {
        let report = ConstantsOut {
            n,
            p,
            q,
            bundle,
            e_constant: e_val,
        };
        let params = to_json_string(&serde_json::json!({
            "command": "constants", "n": n, "p": p, "q": q,
        }))?;
        let mut run = OutputDir::create(dir, "constants", 0, &digest(&params))?;
        run.write_json("constants.json", &report)?;
        let dir = run.finish()?;
        println!("artifacts: {}", dir.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// check-conditions
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ConditionsOut {
    cases: Vec<nodalmp_core::problem::ConditionReport>,
    windows: nodalmp_core::problem::WindowReport,
    threshold: MpThreshold,
    all_applicable_satisfied: bool,
    any_indeterminate: bool,
}

fn case_label(c: CaseId) -> &'static str {
    match c {
        CaseId::I => "i",
        CaseId::Ii => "ii",
        CaseId::Iii => "iii",
        CaseId::Iv => "iv",
    }
}

pub fn check_conditions_cmd(
    config_path: &Path,
    strict: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let loaded = config::load(config_path, &Overrides::default())?;
    let cases = check_conditions_c(&loaded.spec);
    let windows = exponent_windows(&loaded.spec)?;
    let threshold = mp_threshold(&loaded.spec)?;

    let mut all_ok = true;
    let mut any_indeterminate = false;
    for c in &cases {
        if !c.applicable {
            println!("case ({}): not applicable", case_label(c.case_id));
            continue;
        }
        if c.indeterminate {
            any_indeterminate = true;
            all_ok = false;
            println!("case ({}): INDETERMINATE — {}", case_label(c.case_id), c.detail);
        } else if c.satisfied {
            println!(
                "case ({}): satisfied   lhs = {}  rhs = {}",
                case_label(c.case_id),
                fmt_float(c.lhs_value),
                fmt_float(c.rhs_value)
            );
        } else {
            all_ok = false;
            println!(
                "case ({}): VIOLATED    lhs = {}  rhs = {}  ({})",
                case_label(c.case_id),
                fmt_float(c.lhs_value),
                fmt_float(c.rhs_value),
                c.detail
            );
        }
    }
    println!(
        "q windows: basic ({}, {}) {}; refined ({}, {}) {}",
        fmt_float(windows.basic_lo),
        fmt_float(windows.basic_hi),
        if windows.basic_ok { "ok" } else { "OUTSIDE" },
        fmt_float(windows.refined_lo),
        fmt_float(windows.refined_hi),
        if windows.refined_ok { "ok" } else { "OUTSIDE" },
    );
    match threshold {
        MpThreshold::Finite {
            raw,
            with_prefactor,
        } => println!(
            "level threshold: raw {}  with p/n prefactor {}",
            fmt_float(raw),
            fmt_float(with_prefactor)
        ),
        MpThreshold::Infinite => {
            println!("level threshold: infinite orbit — every finite level admissible")
        }
    }
    println!(
        "aggregate: {}",
        if all_ok {
            "all applicable pointwise conditions satisfied"
        } else {
            "HYPOTHESES NOT VERIFIED"
        }
    );

    if let Some(dir) = out {
        let report = ConditionsOut {
            cases,
            windows,
            threshold,
            all_applicable_satisfied: all_ok,
            any_indeterminate,
        };
        let mut run = OutputDir::create(
            dir,
            "check-conditions",
            loaded.seed,
            &digest(&loaded.effective_text),
        )?;
        run.write_text("effective_config.json", &loaded.effective_text)?;
        run.write_json("conditions.json", &report)?;
        let dir = run.finish()?;
        println!("artifacts: {}", dir.display());
    }

    if strict && !all_ok {
        return Err(Failure::Violated(
            "pointwise hypothesis check failed (see case verdicts above)".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// expansion
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TermRow {
    term: &'static str,
    leading: f64,
    correction_coeff: f64,
    correction_power: f64,
    predicted: f64,
    quadrature: f64,
    rel_err: f64,
}

impl TermRow {
    fn new(r: &ExpansionReport) -> Self {
        TermRow {
            term: r.term_id.label(),
            leading: r.leading,
            correction_coeff: r.correction_coeff,
            correction_power: r.correction_power,
            predicted: r.predicted(),
            quadrature: r.quadrature_value,
            rel_err: r.relative_error(),
        }
    }
}

#[derive(Serialize)]
struct EtaEntry {
    eta: f64,
    terms: Vec<TermRow>,
}

pub fn expansion_cmd(
    config_path: &Path,
    overrides: &Overrides,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let loaded = config::load(config_path, overrides)?;
    let etas: Vec<f64> = loaded
        .config
        .eta
        .clone()
        .unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4]);
    let delta = loaded
        .config
        .delta
        .unwrap_or_else(|| bubble::default_delta(&loaded.mesh));

    let mut entries: Vec<EtaEntry> = Vec::new();
    for &eta in &etas {
        let params = BubbleParams::new(eta, delta, 0)?;
        let reports = bubble::expansion_terms(&loaded.spec, &params)?;
        println!("eta = {}", fmt_float(eta));
        let terms: Vec<TermRow> = reports.iter().map(TermRow::new).collect();
        for t in &terms {
            println!(
                "  {:<5} predicted {}  quadrature {}  rel err {}",
                t.term,
                fmt_float(t.predicted),
                fmt_float(t.quadrature),
                fmt_float(t.rel_err)
            );
        }
        entries.push(EtaEntry { eta, terms });
    }
    if etas.is_empty() {
        println!("empty eta sweep: nothing to evaluate");
    }

    if let Some(dir) = out {
        let mut run = OutputDir::create(
            dir,
            "expansion",
            loaded.seed,
            &digest(&loaded.effective_text),
        )?;
        run.write_text("effective_config.json", &loaded.effective_text)?;
        run.write_json("expansion.json", &entries)?;
        // One sweep file per term: rel_err (and the raw values) against eta.
        for (k, term) in TermId::ALL.iter().enumerate() {
            let mut table = CsvTable::new(&["eta", "predicted", "quadrature", "rel_err"]);
            for e in &entries {
                let t = &e.terms[k];
                table.row(&[
                    CsvCell::Float(e.eta),
                    CsvCell::Float(t.predicted),
                    CsvCell::Float(t.quadrature),
                    CsvCell::Float(t.rel_err),
                ]);
            }
            run.write_text(&format!("expansion_{}.csv", term.label()), &table.into_text())?;
        }
        let dir = run.finish()?;
        println!("artifacts: {}", dir.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// mesh
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MeshReport {
    kind: MeshKind,
    num_nodes: usize,
    num_elements: usize,
    total_measure: f64,
    boundary_facets: usize,
    one_dimensional: bool,
    star_shaped: bool,
    weak_commute_ok: bool,
    split_present: bool,
    split_ok: Option<bool>,
    coercivity_lambda: Option<f64>,
    notes: Vec<String>,
}

pub fn mesh_cmd(config_path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let loaded = config::load(config_path, &Overrides::default())?;
    let mesh = &loaded.mesh;
    let sym = &loaded.sym;
    let mut notes = Vec::new();

    let weak_commute_ok = match verify_weak_commute(sym) {
        Ok(()) => true,
        Err(e) => {
            notes.push(format!("weak commute: {e}"));
            false
        }
    };
    let split_ok = sym.split.as_ref().map(|_| match split_check(mesh, sym) {
        Ok(()) => true,
        Err(e) => {
            notes.push(format!("split check: {e}"));
            false
        }
    });
    let cc = CoercivityControls {
        seed: loaded.seed,
        ..CoercivityControls::default()
    };
    let coercivity_lambda = match nodalmp_core::problem::coercivity_estimate(
        &loaded.spec,
        mesh,
        sym,
        &cc,
    ) {
        Ok(l) => Some(l),
        Err(e) => {
            notes.push(format!("coercivity: {e}"));
            None
        }
    };

    let report = MeshReport {
        kind: mesh.kind,
        num_nodes: mesh.num_nodes(),
        num_elements: mesh.elements.len(),
        total_measure: mesh.total_measure(),
        boundary_facets: mesh.boundary_facets.len(),
        one_dimensional: mesh.is_one_dimensional(),
        star_shaped: star_shaped_check(mesh),
        weak_commute_ok,
        split_present: sym.split.is_some(),
        split_ok,
        coercivity_lambda,
        notes,
    };

    println!(
        "mesh: {} nodes, {} elements, measure {}",
        report.num_nodes,
        report.num_elements,
        fmt_float(report.total_measure)
    );
    println!(
        "boundary facets: {}  star-shaped: {}",
        report.boundary_facets, report.star_shaped
    );
    println!(
        "symmetry: weak commute {}  split {}",
        if report.weak_commute_ok { "ok" } else { "FAILED" },
        match report.split_ok {
            Some(true) => "ok",
            Some(false) => "FAILED",
            None => "absent",
        }
    );
    match report.coercivity_lambda {
        Some(l) => println!("coercivity estimate: {}", fmt_float(l)),
        None => println!("coercivity estimate: unavailable"),
    }
    for n in &report.notes {
        println!("note: {n}");
    }

    if let Some(dir) = out {
        let mut run = OutputDir::create(dir, "mesh", loaded.seed, &digest(&loaded.effective_text))?;
        run.write_text("effective_config.json", &loaded.effective_text)?;
        run.write_json("mesh.json", &report)?;
        let dir = run.finish()?;
        println!("artifacts: {}", dir.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

/// Deterministic start direction: a handful of seeded random low-frequency
/// Fourier modes of the coordinates, projected into the constrained space.
/// Low frequencies matter — a rough (near-white) start has a negligible
/// superlinear term, which pushes the far point and the initial ridge to
/// enormous norms the descent then has to climb all the way down from. The
/// modes vanish on the 1D endpoints and are 2π-periodic, so the same recipe
/// works on every domain. Retries with fresh draws if a projection vanishes.
fn seeded_direction(
    mesh: &DomainMesh,
    sym: &SymmetrySpec,
    seed: u64,
) -> Result<DiscreteField, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_D1CE_0000_0001);
    // Half-period base frequency on the diameter-2 bounded domains (so the
    // fundamental changes sign exactly once); full period on the unit torus.
    let base = match mesh.kind {
        MeshKind::FlatTorus { .. } => 2.0 * std::f64::consts::PI,
        _ => std::f64::consts::PI,
    };
    for _ in 0..32 {
        let coefs: Vec<[f64; 3]> = (0..4)
            .map(|m| {
                let w = 1.0 / ((m + 1) * (m + 1)) as f64;
                [
                    w * rng.gen_range(-1.0..1.0),
                    w * rng.gen_range(-1.0..1.0),
                    w * rng.gen_range(-1.0..1.0),
                ]
            })
            .collect();
        let mut v: Vec<f64> = mesh
            .coords
            .iter()
            .map(|c| {
                let mut acc = 0.0;
                for (m, cs) in coefs.iter().enumerate() {
                    let k = base * (m + 1) as f64;
                    acc += cs[0] * (k * c[0]).sin()
                        + cs[1] * (k * c[1]).sin()
                        + cs[2] * (k * (c[0] + c[1])).sin();
                }
                acc
            })
            .collect();
        for (i, x) in v.iter_mut().enumerate() {
            if mesh.boundary[i] {
                *x = 0.0;
            }
        }
        project_to_h(sym, &mut v);
        for (i, x) in v.iter_mut().enumerate() {
            if mesh.boundary[i] {
                *x = 0.0;
            }
        }
        if v.iter().any(|x| x.abs() > 1e-9) {
            return Ok(DiscreteField {
                values: v,
                mesh_kind: mesh.kind,
            });
        }
    }
    Err(Failure::Numeric(
        "constrained space appears trivial: every seeded start projects to zero".into(),
    ))
}

#[derive(Serialize)]
struct RebuildSummary {
    level: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    epsilon: f64,
    exponent: f64,
    level: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
    rim_rho: f64,
    rim_radius: f64,
    level_history: &'a [f64],
    rebuild: Option<RebuildSummary>,
}

fn field_csv(mesh: &DomainMesh, u: &[f64]) -> String {
    let mut t = CsvTable::new(&["node", "x", "y", "u"]);
    for (i, v) in u.iter().enumerate() {
        t.row(&[
            CsvCell::Int(i as i64),
            CsvCell::Float(mesh.coords[i][0]),
            CsvCell::Float(mesh.coords[i][1]),
            CsvCell::Float(*v),
        ]);
    }
    t.into_text()
}

fn path_csv(dp: &DiscreteProblem, path: &[DiscreteField]) -> Result<String, Failure> {
    let mut t = CsvTable::new(&["index", "energy"]);
    for (k, f) in path.iter().enumerate() {
        t.row(&[CsvCell::Int(k as i64), CsvCell::Float(dp.energy(f)?)]);
    }
    Ok(t.into_text())
}

fn run_solve(loaded: &Loaded) -> Result<(DiscreteProblem<'_>, MountainPassResult), Failure> {
    let dp = DiscreteProblem::new(&loaded.spec, &loaded.mesh, &loaded.sym)?;
    let cc = CoercivityControls {
        seed: loaded.seed,
        ..CoercivityControls::default()
    };
    let rim = rim_estimate(&dp, &cc)?;
    let dir = seeded_direction(&loaded.mesh, &loaded.sym, loaded.seed)?;
    let start = far_point(&dp, &dir, &rim)?;
    let res = mountain_pass(&dp, &start, &loaded.controls)?;
    Ok((dp, res))
}

pub fn solve_cmd(
    config_path: &Path,
    overrides: &Overrides,
    rebuild: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let loaded = config::load(config_path, overrides)?;
    let (dp, res) = run_solve(&loaded)?;
    let rebuilt = if rebuild {
        Some(nodal_rebuild(&dp, &res, &loaded.controls)?)
    } else {
        None
    };

    println!(
        "level      {}\ngrad norm  {}\niterations {}\nconverged  {}",
        fmt_float(res.level),
        fmt_float(res.grad_norm),
        res.iterations,
        res.converged
    );
    println!(
        "rim rho    {}\nrim radius {}",
        fmt_float(res.rim_rho),
        fmt_float(res.rim_radius)
    );
    if let Some(r) = &rebuilt {
        println!(
            "rebuilt    level {}  grad norm {}  converged {}",
            fmt_float(r.level),
            fmt_float(r.grad_norm),
            r.converged
        );
    }

    if let Some(dir) = out {
        let report = SolveReport {
            epsilon: loaded.spec.epsilon,
            exponent: loaded.spec.solve_exponent(),
            level: res.level,
            grad_norm: res.grad_norm,
            iterations: res.iterations,
            converged: res.converged,
            rim_rho: res.rim_rho,
            rim_radius: res.rim_radius,
            level_history: &res.level_history,
            rebuild: rebuilt.as_ref().map(|r| RebuildSummary {
                level: r.level,
                grad_norm: r.grad_norm,
                iterations: r.iterations,
                converged: r.converged,
            }),
        };
        let mut run = OutputDir::create(dir, "solve", loaded.seed, &digest(&loaded.effective_text))?;
        run.write_text("effective_config.json", &loaded.effective_text)?;
        run.write_json("report.json", &report)?;
        run.write_text("solution.csv", &field_csv(&loaded.mesh, &res.field.values))?;
        run.write_text("path.csv", &path_csv(&dp, &res.path)?)?;
        if let Some(r) = &rebuilt {
            run.write_text(
                "rebuilt_solution.csv",
                &field_csv(&loaded.mesh, &r.field.values),
            )?;
        }
        let dir = run.finish()?;
        println!("artifacts: {}", dir.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// continue
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ContinuationOut {
    entries: Vec<nodalmp_core::solver::ContinuationEntry>,
    norm_drift: f64,
    envelope_bound: f64,
    diverging: bool,
    concentration: Option<nodalmp_core::solver::ConcentrationReport>,
}

pub fn continue_cmd(
    config_path: &Path,
    overrides: &Overrides,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let loaded = config::load(config_path, overrides)?;
    let schedule: Vec<f64> = loaded
        .config
        .schedule
        .clone()
        .unwrap_or_else(|| vec![0.5, 0.25, 0.1, 0.05]);
    let dir_field = seeded_direction(&loaded.mesh, &loaded.sym, loaded.seed)?;
    let report = continuation(
        &loaded.spec,
        &loaded.mesh,
        &loaded.sym,
        &dir_field,
        &schedule,
        &loaded.controls,
    )?;

    for e in &report.entries {
        println!(
            "eps {}  level {}  norm {}  grad {}  converged {}  envelope {}",
            fmt_float(e.epsilon),
            fmt_float(e.level),
            fmt_float(e.norm),
            fmt_float(e.grad_norm),
            e.converged,
            if e.envelope_ok { "ok" } else { "EXCEEDED" },
        );
    }
    println!(
        "norm drift {}  envelope bound {}  diverging {}",
        fmt_float(report.norm_drift),
        fmt_float(report.envelope_bound),
        report.diverging
    );

    let concentration = if report.diverging {
        let c = concentration_check(&loaded.spec, &loaded.mesh, &report.fields)?;
        println!(
            "concentration: max statistic {}  candidates {}",
            fmt_float(c.max_statistic),
            c.candidates.len()
        );
        Some(c)
    } else {
        None
    };

    if let Some(dir) = out {
        let mut table = CsvTable::new(&[
            "epsilon",
            "level",
            "norm",
            "grad_norm",
            "converged",
            "envelope_corr",
            "envelope_ok",
        ]);
        for e in &report.entries {
            table.row(&[
                CsvCell::Float(e.epsilon),
                CsvCell::Float(e.level),
                CsvCell::Float(e.norm),
                CsvCell::Float(e.grad_norm),
                CsvCell::Bool(e.converged),
                CsvCell::Float(e.envelope_corr),
                CsvCell::Bool(e.envelope_ok),
            ]);
        }
        let final_field = report.fields.last().cloned();
        let out_json = ContinuationOut {
            entries: report.entries,
            norm_drift: report.norm_drift,
            envelope_bound: report.envelope_bound,
            diverging: report.diverging,
            concentration,
        };
        let mut run = OutputDir::create(
            dir,
            "continue",
            loaded.seed,
            &digest(&loaded.effective_text),
        )?;
        run.write_text("effective_config.json", &loaded.effective_text)?;
        run.write_json("continuation.json", &out_json)?;
        run.write_text("continuation.csv", &table.into_text())?;
        if let Some(f) = final_field {
            run.write_text("final_field.csv", &field_csv(&loaded.mesh, &f.values))?;
        }
        let dir = run.finish()?;
        println!("artifacts: {}", dir.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// pohozaev
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PohozaevOut {
    nonexistence: nodalmp_core::pohozaev::NonexistenceReport,
    solve: Option<RebuildSummary>,
    identity: Option<nodalmp_core::pohozaev::PohozaevReport>,
}

pub fn pohozaev_cmd(
    config_path: &Path,
    overrides: &Overrides,
    with_solve: bool,
    strict: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let loaded = config::load(config_path, overrides)?;
    let nonexistence = nonexistence_check(&loaded.spec, &loaded.mesh)?;

    let c = &nonexistence.sign_conditions;
    println!(
        "sign conditions: a>=0 {}  da>=0 {}  df<=0 {}  h<=0 {}  dh<=0 {}",
        c.a_nonneg, c.da_nonneg, c.df_nonpos, c.h_nonpos, c.dh_nonpos
    );
    println!(
        "any strict: {}  star-shaped: {}  partial: {}",
        nonexistence.any_strict, nonexistence.star_shaped, nonexistence.partial
    );
    for n in &nonexistence.notes {
        println!("note: {n}");
    }
    println!(
        "verdict: {}",
        if nonexistence.criterion_met {
            "nonexistence criterion met"
        } else {
            "nonexistence criterion not met"
        }
    );

    let mut solve_summary = None;
    let mut identity = None;
    if with_solve {
        let (_dp, res) = run_solve(&loaded)?;
        println!(
            "solve: level {}  grad norm {}  converged {}",
            fmt_float(res.level),
            fmt_float(res.grad_norm),
            res.converged
        );
        let rep = identity_terms(&res.field, &loaded.spec, &loaded.mesh)?;
        println!(
            "identity: nH {}  xgradH {}  ug {}  boundary {}",
            fmt_float(rep.term_nh),
            fmt_float(rep.term_xgrad_h),
            fmt_float(rep.term_ug),
            fmt_float(rep.term_boundary)
        );
        println!(
            "residual {}  (quadrature error {})",
            fmt_float(rep.residual),
            fmt_float(rep.quadrature_error)
        );
        solve_summary = Some(RebuildSummary {
            level: res.level,
            grad_norm: res.grad_norm,
            iterations: res.iterations,
            converged: res.converged,
        });
        identity = Some(rep);
    } else if !star_shaped_check(&loaded.mesh) {
        println!("note: the domain is not star-shaped; the identity carries no sign information");
    }

    let criterion_met = nonexistence.criterion_met;
    if let Some(dir) = out {
        let report = PohozaevOut {
            nonexistence,
            solve: solve_summary,
            identity,
        };
        let mut run = OutputDir::create(
            dir,
            "pohozaev",
            loaded.seed,
            &digest(&loaded.effective_text),
        )?;
        run.write_text("effective_config.json", &loaded.effective_text)?;
        run.write_json("pohozaev.json", &report)?;
        let dir = run.finish()?;
        println!("artifacts: {}", dir.display());
    }

    if strict && criterion_met {
        return Err(Failure::Violated(
            "nonexistence criterion met: no nontrivial solution can exist under these hypotheses"
                .into(),
        ));
    }
    Ok(())
}
