//! Acceptance suite: one test per contract item, each printing a single
//! summary line with the measured quantities. Oracles here are implemented
//! from scratch (tanh-sinh quadrature, Runge–Kutta shooting, central
//! differences) so they share no code with the paths they certify.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nodalmp_core::bubble::{expansion_terms, sup_scan_model, BubbleParams};
use nodalmp_core::constants::{beta_integral, gamma, ratio_a, ratio_b, ratio_c};
use nodalmp_core::mesh::{
    build_mesh, disc_symmetry, interval_symmetry, DiscTau, DomainMesh, MeshKind, SymmetrySpec,
};
use nodalmp_core::pohozaev::identity_terms;
use nodalmp_core::problem::{CoercivityControls, FieldSpec, OrbitCard, ProblemSpec, X0Data};
use nodalmp_core::solver::{
    continuation, far_point, mountain_pass, nodal_rebuild, rim_estimate, DiscreteField,
    DiscreteProblem, MountainPassResult, MpControls,
};

fn flat_spec(n: u32, p: f64, q: f64, epsilon: f64, a0: f64, f0: f64, h0: f64) -> ProblemSpec {
    ProblemSpec::new(
        n,
        p,
        q,
        epsilon,
        FieldSpec::Constant { value: a0 },
        FieldSpec::Constant { value: f0 },
        FieldSpec::Constant { value: h0 },
        X0Data::flat(a0, f0, h0),
        OrbitCard::Finite(1),
    )
    .expect("flat spec is valid")
}

/// The odd-in-x problem −u″ = |u|^{s−2}u on [−1, 1] with s = 6 − ε.
fn interval_setup(nodes: usize, epsilon: f64) -> (ProblemSpec, DomainMesh, SymmetrySpec) {
    let spec = flat_spec(3, 2.0, 2.0, epsilon, 0.0, 1.0, 0.0);
    let mesh = build_mesh(MeshKind::Interval { nodes }).expect("interval mesh");
    let sym = interval_symmetry(&mesh).expect("interval symmetry");
    (spec, mesh, sym)
}

/// sin(π·x): the lowest antisymmetric mode, one sign change, zero on ∂.
fn fundamental(mesh: &DomainMesh) -> DiscreteField {
    DiscreteField {
        values: mesh.coords.iter().map(|c| (PI * c[0]).sin()).collect(),
        mesh_kind: mesh.kind,
    }
}

/// Rim estimate, far point along `direction`, then the mountain-pass search.
fn climb(
    dp: &DiscreteProblem,
    direction: &DiscreteField,
    controls: &MpControls,
) -> MountainPassResult {
    let rim = rim_estimate(
        dp,
        &CoercivityControls {
            seed: controls.seed,
            ..CoercivityControls::default()
        },
    )
    .expect("rim estimate");
    let start = far_point(dp, direction, &rim).expect("far point");
    mountain_pass(dp, &start, controls).expect("mountain pass run")
}

// ---------------------------------------------------------------------------
// 1. Beta-type Gamma integrals against an independent quadrature oracle.
// ---------------------------------------------------------------------------

/// Level-doubling tanh-sinh rule on (0, 1) for integrands with endpoint
/// singularities. `f` receives (s, 1−s) so neither endpoint distance is
/// computed by cancellation.
fn tanh_sinh(f: &dyn Fn(f64, f64) -> f64) -> f64 {
    let u_max = 6.5;
    let eval = |u: f64| -> f64 {
        let w = 0.5 * PI * u.sinh();
        let x = 1.0 / (1.0 + (-2.0 * w).exp());
        let one_minus_x = 1.0 / (1.0 + (2.0 * w).exp());
        if x == 0.0 || one_minus_x == 0.0 {
            return 0.0;
        }
        let weight = 0.5 * PI * u.cosh() / w.cosh().powi(2) * 0.5;
        weight * f(x, one_minus_x)
    };
    let mut h = 0.5;
    let mut total = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= u_max {
        let u = k as f64 * h;
        total += eval(u) + eval(-u);
        k += 1;
    }
    let mut value = total * h;
    for _ in 0..10 {
        // Halve the step: add the midpoints of the current lattice.
        let mut extra = 0.0;
        let mut k = 0;
        loop {
            let u = (k as f64 + 0.5) * h;
            if u > u_max {
                break;
            }
            extra += eval(u) + eval(-u);
            k += 1;
        }
        h *= 0.5;
        let refined = value * 0.5 + extra * h;
        if (refined - value).abs() <= 1e-13 * refined.abs() {
            return refined;
        }
        value = refined;
    }
    value
}

/// ∫₀^∞ t^Q (1+t)^{−P} dt computed as the Euler form ∫₀¹ s^Q (1−s)^{P−Q−2} ds
/// through t = s/(1−s).
fn beta_oracle(p_exp: f64, q_exp: f64) -> f64 {
    tanh_sinh(&|s, one_minus_s| s.powf(q_exp) * one_minus_s.powf(p_exp - q_exp - 2.0))
}

#[test]
fn beta_integrals_match_an_independent_quadrature_oracle() {
    let clock = Instant::now();
    let q_values = [-0.5, -0.2, 0.0, 0.35, 0.8, 1.5, 2.4, 3.3, 4.1, 5.0];
    let gaps = [0.3, 0.8, 1.7, 2.9, 4.5];
    let mut worst = 0.0_f64;
    let mut pairs = 0;
    for &q in &q_values {
        for &gap in &gaps {
            let p = q + 1.0 + gap;
            let closed = beta_integral(p, q).expect("inside the window");
            let raw = beta_oracle(p, q);
            let rel = ((closed - raw) / raw).abs();
            assert!(
                rel <= 1e-9,
                "I_{{{p}}}^{{{q}}}: closed {closed:e} vs oracle {raw:e}, rel {rel:.3e}"
            );
            worst = worst.max(rel);
            pairs += 1;
        }
    }
    let elapsed = clock.elapsed();
    assert_eq!(pairs, 50);
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "PASS beta integrals: 50 (P,Q) pairs, worst relative gap {worst:.3e}, {} ms",
        elapsed.as_millis()
    );
}

// ---------------------------------------------------------------------------
// 2. The p = 2 rational collapses of the expansion ratios.
// ---------------------------------------------------------------------------

#[test]
fn p2_expansion_ratios_collapse_to_their_rational_forms() {
    let mut worst = 0.0_f64;
    for n in 5u32..=10 {
        let nf = n as f64;
        let a = ratio_a(n, 2.0).unwrap();
        let b = ratio_b(n, 2.0).unwrap();
        let c = ratio_c(n, 2.0).unwrap();

        let checks = [
            ("a", a, (nf + 2.0) / (nf - 4.0)),
            ("b", b, 4.0 * (nf - 1.0) * (nf - 2.0) / (nf * (nf - 4.0))),
            ("c", c, nf / (nf - 2.0)),
            // The two composite coefficients of the p = 2 second-order
            // display: 6n/(n−2)² · b/a multiplies the mass value and c/a the
            // curvature bracket.
            (
                "mass display",
                6.0 * nf / ((nf - 2.0) * (nf - 2.0)) * b / a,
                24.0 * (nf - 1.0) / ((nf + 2.0) * (nf - 2.0)),
            ),
            (
                "curvature display",
                c / a,
                nf * (nf - 4.0) / ((nf + 2.0) * (nf - 2.0)),
            ),
        ];
        for (label, got, want) in checks {
            let rel = ((got - want) / want).abs();
            assert!(
                rel <= 1e-10,
                "{label} at n = {n}: got {got}, want {want}, rel {rel:.3e}"
            );
            worst = worst.max(rel);
        }
    }
    println!("PASS p=2 closed forms: n = 5..=10, worst relative gap {worst:.3e}");
}

// ---------------------------------------------------------------------------
// 3. The dilation model t^p − (p/p*) t^{p*} peaks at t = 1 with value p/n.
// ---------------------------------------------------------------------------

#[test]
fn dilation_model_peaks_at_unit_scale_with_value_p_over_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut grid: Vec<f64> = (0..=2000).map(|i| i as f64 * 1e-3).collect();
    grid[1000] = 1.0;
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let n: u32 = rng.gen_range(3..=12);
        let p: f64 = rng.gen_range(1.05..(n as f64 - 0.05));
        let (t_star, sup) = sup_scan_model(n, p, &grid).unwrap();
        let gap = (sup - p / n as f64).abs();
        assert!(
            gap <= 1e-12,
            "n = {n}, p = {p}: sup {sup} differs from p/n by {gap:.3e}"
        );
        assert!(
            (t_star - 1.0).abs() <= 1e-6,
            "n = {n}, p = {p}: maximiser {t_star} is not at t = 1"
        );
        worst = worst.max(gap);
    }
    println!("PASS dilation model: 20 random (n,p), worst |sup − p/n| = {worst:.3e}");
}

// ---------------------------------------------------------------------------
// 4. The four bubble energy terms against direct quadrature on the flat model.
// ---------------------------------------------------------------------------

#[test]
fn flat_model_energy_terms_match_their_quadratures_down_the_eta_sweep() {
    let clock = Instant::now();
    // (n, p, q) = (6, 2, 1.75) with unit coefficients: every term is active
    // and the curvature corrections vanish, so each prediction is pure
    // leading order. δ = 0.3 keeps the truncation error of the slowest term
    // (the mass term, O(η/δ²)) inside the 2% target at η = 1e−4.
    let spec = flat_spec(6, 2.0, 1.75, 0.0, 1.0, 1.0, 1.0);
    let etas = [1e-2, 1e-3, 1e-4];
    let mut history: Vec<Vec<f64>> = vec![Vec::new(); 4];
    for &eta in &etas {
        let params = BubbleParams::new(eta, 0.3, 0).unwrap();
        let reports = expansion_terms(&spec, &params).unwrap();
        assert_eq!(reports.len(), 4);
        for (k, report) in reports.iter().enumerate() {
            history[k].push(report.relative_error());
        }
    }
    let labels = ["grad", "mass", "crit", "pert"];
    for (k, errs) in history.iter().enumerate() {
        for w in errs.windows(2) {
            assert!(
                w[1] < w[0],
                "{}: relative error fails to decrease across the sweep: {errs:?}",
                labels[k]
            );
        }
        let last = *errs.last().unwrap();
        assert!(last < 0.02, "{}: final relative error {last:.3e} >= 2%", labels[k]);
    }
    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "PASS flat-model expansion: final relative errors {:?}, {} ms",
        history.iter().map(|e| *e.last().unwrap()).collect::<Vec<_>>(),
        elapsed.as_millis()
    );
}

// ---------------------------------------------------------------------------
// 5. The weak gradient against central differences of the energy.
// ---------------------------------------------------------------------------

#[test]
fn weak_gradients_match_central_differences_on_a_disc() {
    let clock = Instant::now();
    let mesh = build_mesh(MeshKind::Disc { rings: 4, sectors: 8 }).unwrap();
    let sym = disc_symmetry(&mesh, 1, DiscTau::Reflection).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9001);
    let mut worst = 0.0_f64;
    // (p, q, ε) triples inside the exponent windows for n = 4.
    for (p, q, eps) in [(1.5, 1.0, 0.25), (2.0, 2.0, 0.5), (3.0, 3.0, 0.5)] {
        let spec = flat_spec(4, p, q, eps, 0.5, 1.0, -0.25);
        let dp = DiscreteProblem::new(&spec, &mesh, &sym).unwrap();
        for _ in 0..10 {
            let field = DiscreteField {
                values: (0..mesh.num_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                mesh_kind: mesh.kind,
            };
            let grad = dp.weak_gradient(&field).unwrap();
            let delta = 1e-6;
            let mut diff = 0.0;
            let mut norm = 0.0;
            for i in 0..mesh.num_nodes() {
                let mut plus = field.clone();
                plus.values[i] += delta;
                let mut minus = field.clone();
                minus.values[i] -= delta;
                let fd =
                    (dp.energy(&plus).unwrap() - dp.energy(&minus).unwrap()) / (2.0 * delta);
                diff += (fd - grad.values[i]).powi(2);
                norm += grad.values[i].powi(2);
            }
            let rel = (diff / norm).sqrt();
            assert!(rel < 1e-5, "p = {p}: central differences disagree, rel {rel:.3e}");
            worst = worst.max(rel);
        }
    }
    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "PASS gradient check: 10 fields × p ∈ {{1.5, 2, 3}}, worst relative gap {worst:.3e}, {} ms",
        elapsed.as_millis()
    );
}

// ---------------------------------------------------------------------------
// 6. The interval mountain-pass level against a shooting oracle.
// ---------------------------------------------------------------------------

/// One RK4 step of u′ = v, v′ = −u³.
fn rk4_step(u: f64, v: f64, h: f64) -> (f64, f64) {
    let f = |_u: f64, v: f64| v;
    let g = |u: f64, _v: f64| -u * u * u;
    let (k1u, k1v) = (f(u, v), g(u, v));
    let (k2u, k2v) = (f(u + 0.5 * h * k1u, v + 0.5 * h * k1v), g(u + 0.5 * h * k1u, v + 0.5 * h * k1v));
    let (k3u, k3v) = (f(u + 0.5 * h * k2u, v + 0.5 * h * k2v), g(u + 0.5 * h * k2u, v + 0.5 * h * k2v));
    let (k4u, k4v) = (f(u + h * k3u, v + h * k3v), g(u + h * k3u, v + h * k3v));
    (
        u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// First zero of the arch launched with u(0) = 0, u′(0) = m; +∞ (as 4.0) when
/// the arch stays positive on (0, 4].
fn first_zero(m: f64) -> f64 {
    let steps = 16384;
    let h = 4.0 / steps as f64;
    let (mut u, mut v) = (0.0_f64, m);
    for i in 0..steps {
        let (nu, nv) = rk4_step(u, v, h);
        if nu <= 0.0 {
            // Linear interpolation of the crossing inside the step.
            let x0 = i as f64 * h;
            return x0 + h * u / (u - nu);
        }
        u = nu;
        v = nv;
    }
    4.0
}

#[test]
fn interval_mountain_pass_level_matches_a_shooting_oracle() {
    let clock = Instant::now();

    // Shooting: bisect the launch slope until the arch's first zero is at 1.
    let (mut lo, mut hi) = (0.1_f64, 100.0_f64);
    assert!(first_zero(lo) > 1.0 && first_zero(hi) < 1.0, "bracket broken");
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if first_zero(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let m = 0.5 * (lo + hi);

    // Energy of the arch by Simpson's rule on the shot trajectory; the odd
    // two-arch critical point doubles it.
    let steps = 16384;
    let h = 1.0 / steps as f64;
    let (mut u, mut v) = (0.0_f64, m);
    let density = |u: f64, v: f64| 0.5 * v * v - 0.25 * u.powi(4);
    let mut energy = density(u, v);
    for i in 1..=steps {
        let (nu, nv) = rk4_step(u, v, h);
        u = nu;
        v = nv;
        let w = if i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        energy += w * density(u, v);
    }
    let oracle_level = 2.0 * energy * h / 3.0;

    // Closed-form cross-check of the oracle itself: (32/3)·I⁴ with
    // I = √π Γ(5/4)/Γ(3/4), from the arch's first integral.
    let i1 = PI.sqrt() * gamma(1.25).unwrap() / gamma(0.75).unwrap();
    let closed = 32.0 / 3.0 * i1.powi(4);
    assert!(
        ((oracle_level - closed) / closed).abs() < 1e-6,
        "oracle {oracle_level} vs closed form {closed}"
    );

    // Discrete mountain pass at 257 nodes, continued up from a coarse grid:
    // solve at 65 nodes from the fundamental mode, interpolate, re-solve.
    let (spec, coarse_mesh, coarse_sym) = interval_setup(65, 2.0);
    let coarse_dp = DiscreteProblem::new(&spec, &coarse_mesh, &coarse_sym).unwrap();
    let coarse = climb(&coarse_dp, &fundamental(&coarse_mesh), &MpControls::default());
    assert!(coarse.converged, "coarse stage failed: grad {}", coarse.grad_norm);

    let (spec, mesh, sym) = interval_setup(257, 2.0);
    let dp = DiscreteProblem::new(&spec, &mesh, &sym).unwrap();
    let refined = DiscreteField {
        values: (0..257)
            .map(|j| {
                let t = j as f64 / 4.0;
                let i = (t.floor() as usize).min(63);
                let frac = t - i as f64;
                coarse.field.values[i] * (1.0 - frac) + coarse.field.values[i + 1] * frac
            })
            .collect(),
        mesh_kind: mesh.kind,
    };
    let fine = climb(&dp, &refined, &MpControls::default());
    assert!(fine.converged, "fine stage failed: grad {}", fine.grad_norm);

    let rel = ((fine.level - oracle_level) / oracle_level).abs();
    assert!(
        rel < 0.01,
        "level {} vs shooting oracle {oracle_level}, rel {rel:.3e}",
        fine.level
    );
    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "PASS shooting oracle: discrete level {:.12e} vs oracle {oracle_level:.12e} (rel {rel:.3e}), {} ms",
        fine.level,
        elapsed.as_millis()
    );
}

// ---------------------------------------------------------------------------
// 7. Sign structure of the rebuilt solution.
// ---------------------------------------------------------------------------

#[test]
fn rebuilt_solutions_are_odd_positive_and_vanish_only_on_the_interface() {
    let (spec, mesh, sym) = interval_setup(65, 2.0);
    let dp = DiscreteProblem::new(&spec, &mesh, &sym).unwrap();
    let first = climb(&dp, &fundamental(&mesh), &MpControls::default());
    assert!(first.converged);
    let rebuilt = nodal_rebuild(&dp, &first, &MpControls::default()).unwrap();
    assert!(rebuilt.converged);

    let w = &rebuilt.field.values;
    let n = w.len();
    let amax = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    // Odd under the reflection x ↦ −x (node i ↦ n−1−i on the uniform grid).
    for i in 0..n {
        assert!(
            (w[i] + w[n - 1 - i]).abs() <= 1e-12 * amax,
            "antisymmetry broken at node {i}: {} vs {}",
            w[i],
            w[n - 1 - i]
        );
    }

    // Strictly positive on the interior of Ω1 (and negative on Ω2's, by the
    // antisymmetry just checked).
    let split = sym.split.as_ref().expect("interval symmetry carries a split");
    for &i in &split.omega1 {
        if !mesh.boundary[i] {
            assert!(w[i] > 0.0, "node {i} (x = {}) not positive: {}", mesh.coords[i][0], w[i]);
        }
    }

    // The near-zero set at the rebuild's own tolerance is exactly the
    // interface node x = 0 plus the two boundary nodes.
    let tol_zero = 1e-6 * amax;
    let near_zero: Vec<usize> = (0..n).filter(|&i| w[i].abs() < tol_zero).collect();
    let expected: Vec<usize> = (0..n)
        .filter(|&i| mesh.boundary[i] || mesh.coords[i][0].abs() < 1e-14)
        .collect();
    assert_eq!(near_zero, expected, "near-zero set is not {{0}} ∪ ∂");

    println!(
        "PASS nodal structure: odd to {:.1e}, positive on {} interior Ω1 nodes, near-zero set = interface ∪ boundary",
        1e-12 * amax,
        split.omega1.iter().filter(|&&i| !mesh.boundary[i]).count()
    );
}

// ---------------------------------------------------------------------------
// 8. Norm boundedness and the level envelope along the continuation.
// ---------------------------------------------------------------------------

#[test]
fn continuation_norms_stay_bounded_and_levels_respect_the_envelope() {
    let (spec, mesh, sym) = interval_setup(65, 0.5);
    let schedule = [0.5, 0.25, 0.1, 0.05];
    let report = continuation(
        &spec,
        &mesh,
        &sym,
        &fundamental(&mesh),
        &schedule,
        &MpControls::default(),
    )
    .unwrap();

    for entry in &report.entries {
        assert!(entry.converged, "ε = {} did not converge", entry.epsilon);
        assert!(entry.envelope_ok, "ε = {}: level exceeds its envelope", entry.epsilon);
    }
    assert!(
        report.norm_drift < 0.10,
        "norm drift {} is not below 10%",
        report.norm_drift
    );
    assert!(!report.diverging);
    println!(
        "PASS continuation: 4 levels converged, norm drift {:.3e}, envelope respected",
        report.norm_drift
    );
}

// ---------------------------------------------------------------------------
// 9. Refinement order of the integral identity residual.
// ---------------------------------------------------------------------------

#[test]
fn identity_residuals_refine_at_first_order_with_exact_constant_terms() {
    let mut residuals = Vec::new();
    for nodes in [33usize, 65] {
        let (spec, mesh, sym) = interval_setup(nodes, 2.0);
        let dp = DiscreteProblem::new(&spec, &mesh, &sym).unwrap();
        let run = climb(&dp, &fundamental(&mesh), &MpControls::default());
        assert!(run.converged, "{nodes} nodes: no critical point");
        let report = identity_terms(&run.field, &spec, &mesh).unwrap();
        // Constant coefficients have no radial variation for the ⟨x,∇⟩ term
        // to see; the assembled value must be the exact zero, not a small one.
        assert_eq!(report.term_xgrad_h, 0.0, "{nodes} nodes: term_xgrad_h");
        residuals.push(report.residual.abs());
    }
    let order = (residuals[0] / residuals[1]).log2();
    assert!(
        order >= 1.0,
        "residuals {residuals:?} refine with order {order:.2} < 1"
    );
    println!(
        "PASS identity residual: {:.3e} → {:.3e} under refinement (order {order:.2}), ⟨x,∇⟩ term exactly 0",
        residuals[0], residuals[1]
    );
}

// ---------------------------------------------------------------------------
// 10. Behaviour at the critical exponent on the ball.
// ---------------------------------------------------------------------------

#[test]
fn critical_ball_continuation_yields_no_converged_nodal_solution() {
    // Doubled radial model of the unit ball in R³ at p = 2 with flat
    // coefficients; ε ↓ 0 lands exactly on the critical exponent 6. The
    // antisymmetry pins u to zero at the centre — a zero-capacity constraint
    // whose discrete layers keep the gradient large at every stage, and at
    // ε = 0 no nontrivial limit exists at all.
    let spec = flat_spec(3, 2.0, 2.0, 0.5, 0.0, 1.0, 0.0);
    let mesh = build_mesh(MeshKind::RadialBall { dim: 3, nodes: 65 }).unwrap();
    let sym = interval_symmetry(&mesh).unwrap();
    let schedule = [0.5, 0.1, 0.0];
    let report = continuation(
        &spec,
        &mesh,
        &sym,
        &fundamental(&mesh),
        &schedule,
        &MpControls::default(),
    )
    .unwrap();

    assert_eq!(report.entries.last().unwrap().epsilon, 0.0);
    for entry in &report.entries {
        let nontrivial_critical_point = entry.converged && entry.norm > 1e-8;
        assert!(
            !nontrivial_critical_point,
            "ε = {}: converged to a nontrivial nodal field (norm {}, grad {})",
            entry.epsilon, entry.norm, entry.grad_norm
        );
    }
    let last = report.entries.last().unwrap();
    println!(
        "PASS critical ball: at ε = 0 grad norm {:.3e} at the iteration cap (converged = {}), no nontrivial nodal limit",
        last.grad_norm, last.converged
    );
}

// ---------------------------------------------------------------------------
// 11. Byte-level determinism of seeded runs.
// ---------------------------------------------------------------------------

#[test]
fn identical_seeds_reproduce_identical_bytes() {
    use std::fs;
    use std::process::Command;

    let tmp = tempfile::TempDir::new().unwrap();
    let cfg = tmp.path().join("config.json");
    fs::write(
        &cfg,
        r#"{
          "n": 3, "p": 2.0, "q": 2.0, "epsilon": 2.0,
          "a": {"kind": "constant", "params": {"value": 0.0}},
          "f": {"kind": "constant", "params": {"value": 1.0}},
          "h": {"kind": "constant", "params": {"value": 0.0}},
          "domain": {"kind": "interval", "nodes": 33},
          "seed": 11
        }"#,
    )
    .unwrap();

    let runs: [(&str, Vec<&str>); 2] = [
        ("solve", vec!["solve", "--rebuild"]),
        ("continue", vec!["continue", "--schedule", "0.5,0.3"]),
    ];
    let mut files_compared = 0;
    for (name, args) in &runs {
        let mut dirs = Vec::new();
        for pass in 0..2 {
            let out_dir = tmp.path().join(format!("{name}-{pass}"));
            let status = Command::new(env!("CARGO_BIN_EXE_nodalmp"))
                .args(args)
                .arg(cfg.to_str().unwrap())
                .args(["--out", out_dir.to_str().unwrap()])
                .status()
                .unwrap();
            assert!(status.success(), "{name} pass {pass} failed");
            dirs.push(out_dir);
        }
        let mut names: Vec<String> = fs::read_dir(&dirs[0])
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        for file in names {
            if file == "manifest.json" {
                continue; // timestamps live here by design
            }
            let a = fs::read(dirs[0].join(&file)).unwrap();
            let b = fs::read(dirs[1].join(&file)).unwrap();
            assert_eq!(a, b, "{name}: {file} differs between identical runs");
            files_compared += 1;
        }
    }
    println!("PASS determinism: {files_compared} artifacts byte-identical across seeded reruns");
}
