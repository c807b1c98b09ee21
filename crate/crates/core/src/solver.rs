//! Discrete mountain-pass machinery: the P1 energy functional and its weak
//! gradient on the symmetry-constrained subspace, rim (mountain-ridge)
//! estimates, path deformation to a critical point, nodal rebuild by sign
//! surgery, continuation in the subcritical exponent and a local-mass
//! concentration diagnostic.
//!
//! The discrete functional is
//!
//! ```text
//! J(u) = ∫ φ_σ(∇u) + (1/p)∫ a|u|^p − (1/s)∫ f|u|^s − (1/(q+1))∫ h|u|^{q+1}
//! ```
//!
//! with `s = p* − ε`, lumped node quadrature for the zeroth-order terms and
//! the σ-regularised gradient density `φ_σ(g) = ((|g|²+σ²)^{p/2} − σ^p)/p`
//! (exact at σ = 0, C² in u for σ > 0, which the descent and Newton stages
//! need when p < 2). All fields live in the constrained space H: zero on the
//! Dirichlet boundary, invariant under the group permutations and odd under
//! the antisymmetry involution.

use crate::constants::sobolev_k_pow;
use crate::mesh::{project_to_h, DomainMesh, MeshKind, SymmetrySpec};
use crate::problem::{coercivity_estimate, CoercivityControls, ProblemSpec};
use crate::{fem, Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A nodal field on a mesh. `mesh_kind` records which mesh the values refer
/// to so that fields cannot silently cross between discretisations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteField {
    pub values: Vec<f64>,
    pub mesh_kind: MeshKind,
}

impl DiscreteField {
    pub fn zero(mesh: &DomainMesh) -> Self {
        DiscreteField {
            values: vec![0.0; mesh.num_nodes()],
            mesh_kind: mesh.kind,
        }
    }

    pub fn check_mesh(&self, mesh: &DomainMesh) -> Result<()> {
        if self.mesh_kind != mesh.kind || self.values.len() != mesh.num_nodes() {
            return Err(Error::Config(format!(
                "field was built for {:?} with {} nodes, not {:?} with {}",
                self.mesh_kind,
                self.values.len(),
                mesh.kind,
                mesh.num_nodes()
            )));
        }
        Ok(())
    }
}

/// A problem instance bound to a mesh and symmetry data, with the coefficient
/// fields tabulated once. All solver entry points operate on this.
pub struct DiscreteProblem<'a> {
    pub spec: &'a ProblemSpec,
    pub mesh: &'a DomainMesh,
    pub sym: &'a SymmetrySpec,
    /// Growth exponent actually solved with: `p* − ε` from the problem data.
    pub s_exponent: f64,
    /// Gradient regularisation; `1e-8` by default.
    pub sigma: f64,
    a_vals: Vec<f64>,
    f_vals: Vec<f64>,
    h_vals: Vec<f64>,
    elems: Vec<fem::Elem>,
}

impl<'a> DiscreteProblem<'a> {
    pub fn new(spec: &'a ProblemSpec, mesh: &'a DomainMesh, sym: &'a SymmetrySpec) -> Result<Self> {
        spec.validate()?;
        if sym.num_nodes() != mesh.num_nodes() {
            return Err(Error::Config(format!(
                "symmetry acts on {} nodes but the mesh has {}",
                sym.num_nodes(),
                mesh.num_nodes()
            )));
        }
        let a_vals = spec.a.values_on_mesh(mesh)?;
        let f_vals = spec.f.values_on_mesh(mesh)?;
        let h_vals = spec.h.values_on_mesh(mesh)?;
        // The far-point search and the rim geometry both need the superlinear
        // term to win along every direction, so require f > 0 on the mesh.
        for (i, &fv) in f_vals.iter().enumerate() {
            if fv <= 0.0 {
                return Err(Error::Domain(format!(
                    "f must be positive on the mesh; node {i} has f = {fv}"
                )));
            }
        }
        Ok(DiscreteProblem {
            spec,
            mesh,
            sym,
            s_exponent: spec.solve_exponent(),
            sigma: 1e-8,
            a_vals,
            f_vals,
            h_vals,
            elems: fem::build_elems(mesh),
        })
    }

    pub fn zero_field(&self) -> DiscreteField {
        DiscreteField::zero(self.mesh)
    }

    /// J(u); see the module doc for the exact discrete form.
    pub fn energy(&self, field: &DiscreteField) -> Result<f64> {
        field.check_mesh(self.mesh)?;
        Ok(self.energy_s(&field.values))
    }

    /// The raw weak-form differential dJ(u), one dual entry per node. Not
    /// projected: pair it with variations, or use [`Self::grad_norm`] for the
    /// residual that matters on the constrained space.
    pub fn weak_gradient(&self, field: &DiscreteField) -> Result<DiscreteField> {
        field.check_mesh(self.mesh)?;
        Ok(DiscreteField {
            values: self.weak_gradient_s(&field.values),
            mesh_kind: self.mesh.kind,
        })
    }

    /// ℓ² norm of the weak gradient projected into H (Dirichlet rows zeroed,
    /// then the invariant/antisymmetric projection).
    pub fn grad_norm(&self, field: &DiscreteField) -> Result<f64> {
        field.check_mesh(self.mesh)?;
        Ok(l2_norm(&self.projected_gradient_s(&field.values)))
    }

    /// ‖u‖_{1,p} = ‖∇u‖_p + ‖u‖_p in the discrete norms.
    pub fn norm_one_p(&self, field: &DiscreteField) -> Result<f64> {
        field.check_mesh(self.mesh)?;
        Ok(self.norm_s(&field.values))
    }

    /// Projects a field into the constrained space H in place.
    pub fn project(&self, field: &mut DiscreteField) -> Result<()> {
        field.check_mesh(self.mesh)?;
        self.project_s(&mut field.values);
        Ok(())
    }

    fn energy_s(&self, u: &[f64]) -> f64 {
        let p = self.spec.p;
        let s = self.s_exponent;
        let q1 = self.spec.q + 1.0;
        let w = &self.mesh.weights;
        fem::grad_energy(&self.elems, u, p, self.sigma)
            + fem::lumped_pow(w, &self.a_vals, u, p) / p
            - fem::lumped_pow(w, &self.f_vals, u, s) / s
            - fem::lumped_pow(w, &self.h_vals, u, q1) / q1
    }

    fn weak_gradient_s(&self, u: &[f64]) -> Vec<f64> {
        let p = self.spec.p;
        let s = self.s_exponent;
        let q1 = self.spec.q + 1.0;
        let w = &self.mesh.weights;
        let mut g = vec![0.0; u.len()];
        fem::add_grad_energy_diff(&self.elems, u, p, self.sigma, 1.0, &mut g);
        fem::add_lumped_pow_diff(w, &self.a_vals, u, p, 1.0 / p, &mut g);
        fem::add_lumped_pow_diff(w, &self.f_vals, u, s, -1.0 / s, &mut g);
        fem::add_lumped_pow_diff(w, &self.h_vals, u, q1, -1.0 / q1, &mut g);
        g
    }

    fn projected_gradient_s(&self, u: &[f64]) -> Vec<f64> {
        let mut g = self.weak_gradient_s(u);
        self.project_s(&mut g);
        g
    }

    fn project_s(&self, u: &mut [f64]) {
        for (i, v) in u.iter_mut().enumerate() {
            if self.mesh.boundary[i] {
                *v = 0.0;
            }
        }
        project_to_h(self.sym, u);
        for (i, v) in u.iter_mut().enumerate() {
            if self.mesh.boundary[i] {
                *v = 0.0;
            }
        }
    }

    fn norm_s(&self, u: &[f64]) -> f64 {
        fem::norm_one_p(&self.elems, &self.mesh.weights, u, self.spec.p)
    }
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Rim estimate and far point
// ---------------------------------------------------------------------------

/// Mountain-ridge data: on the sphere of `radius` in ‖·‖_{1,p} the sampled
/// minimum of J is `rho > 0`, while J(0) = 0 and far points lie below zero.
/// `lambda` is the coercivity estimate that seeded the radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RimEstimate {
    pub radius: f64,
    pub rho: f64,
    pub lambda: f64,
}

/// Estimates the rim of the mountain geometry. The radius is seeded by
/// maximising the coercivity lower-bound polynomial
/// `(Λ/p)t^p − (c_f/s)t^s − (c_h/(q+1))t^{q+1}`, whose superlinear constants
/// are measured on unit-sphere samples of H, and is then halved until the
/// sampled minimum of J on the sphere is strictly positive. `rho` is that
/// sampled minimum — an estimate, not a certified bound.
///
/// The sample set mixes white noise with localised Gaussian bumps. The bumps
/// are essential: a unit-norm rough field carries ever less superlinear mass
/// as the mesh refines, so noise alone lets the measured c_f, c_h decay and
/// the radius inflate with the node count — and the collapse floor derived
/// from it would then reject genuine critical points, whose norms do not grow
/// under refinement. Smooth concentrated probes keep the estimate anchored to
/// the continuum geometry.
pub fn rim_estimate(dp: &DiscreteProblem, controls: &CoercivityControls) -> Result<RimEstimate> {
    let lambda = coercivity_estimate(dp.spec, dp.mesh, dp.sym, controls)?;
    if lambda <= 0.0 {
        return Err(Error::Solver(format!(
            "coercivity estimate {lambda:.6e} is not positive — mountain geometry not established"
        )));
    }
    let nn = dp.mesh.num_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(controls.seed ^ 0x2545_F491_4F6C_DD1D);
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(96);
    let mut tries = 0;
    while samples.len() < 64 {
        tries += 1;
        if tries > 64 * 20 {
            return Err(Error::Symmetry(
                "constrained space appears trivial on this mesh — cannot sample the rim".into(),
            ));
        }
        let mut v: Vec<f64> = (0..nn).map(|_| rng.gen_range(-1.0..1.0)).collect();
        dp.project_s(&mut v);
        let nv = dp.norm_s(&v);
        if nv < 1e-9 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= nv;
        }
        samples.push(v);
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for c in &dp.mesh.coords {
        for k in 0..2 {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    let diam = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();
    let interior: Vec<usize> = (0..nn).filter(|&i| !dp.mesh.boundary[i]).collect();
    let mut bump_tries = 0;
    while samples.len() < 96 && !interior.is_empty() && diam > 0.0 {
        bump_tries += 1;
        if bump_tries > 32 * 20 {
            break; // fall back to the noise-only set
        }
        let c = dp.mesh.coords[interior[rng.gen_range(0..interior.len())]];
        let ell = diam * rng.gen_range(0.08..0.35);
        let mut v: Vec<f64> = dp
            .mesh
            .coords
            .iter()
            .map(|x| {
                let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                (-0.5 * d2 / (ell * ell)).exp()
            })
            .collect();
        dp.project_s(&mut v);
        let nv = dp.norm_s(&v);
        if nv < 1e-9 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= nv;
        }
        samples.push(v);
    }

    let p = dp.spec.p;
    let s = dp.s_exponent;
    let q1 = dp.spec.q + 1.0;
    let h_abs: Vec<f64> = dp.h_vals.iter().map(|v| v.abs()).collect();
    let mut c_f = 0.0f64;
    let mut c_h = 0.0f64;
    for v in &samples {
        c_f = c_f.max(fem::lumped_pow(&dp.mesh.weights, &dp.f_vals, v, s));
        c_h = c_h.max(fem::lumped_pow(&dp.mesh.weights, &h_abs, v, q1));
    }

    let mut best_t = 0.0;
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..=400 {
        let t = 10f64.powf(-6.0 + 9.0 * k as f64 / 400.0);
        let val = lambda / p * t.powf(p) - c_f / s * t.powf(s) - c_h / q1 * t.powf(q1);
        if val > best_val {
            best_val = val;
            best_t = t;
        }
    }
    if !(best_val > 0.0) {
        return Err(Error::Solver(
            "rim lower-bound polynomial has no positive maximum — mountain geometry not established"
                .into(),
        ));
    }

    // Cap the radius so the scaled sphere fields stay below 1 in sup norm
    // (with headroom for fields outside the sample set). Below that cap
    // t ↦ t^s/s is decreasing in s pointwise, so a rim certified at one
    // subcritical exponent persists for every exponent closer to critical:
    // the radius does not degenerate as the subcriticality shrinks.
    let mut v_sup = 0.0f64;
    for v in &samples {
        for x in v {
            v_sup = v_sup.max(x.abs());
        }
    }
    let mut radius = if v_sup > 0.0 {
        best_t.min(0.5 / v_sup)
    } else {
        best_t
    };
    for _ in 0..25 {
        let mut rho = f64::INFINITY;
        for v in &samples {
            let u: Vec<f64> = v.iter().map(|x| radius * x).collect();
            rho = rho.min(dp.energy_s(&u));
        }
        if rho > 0.0 {
            return Ok(RimEstimate { radius, rho, lambda });
        }
        radius *= 0.5;
    }
    Err(Error::Solver(
        "sampled rim stayed non-positive down to the smallest radius — mountain geometry not established".into(),
    ))
}

/// Walks out along `direction` (projected into H, normalised) doubling the
/// scale until J < 0 strictly beyond the rim radius. This is the endpoint the
/// mountain-pass paths connect the origin to.
pub fn far_point(
    dp: &DiscreteProblem,
    direction: &DiscreteField,
    rim: &RimEstimate,
) -> Result<DiscreteField> {
    direction.check_mesh(dp.mesh)?;
    let mut v = direction.values.clone();
    dp.project_s(&mut v);
    let nv = dp.norm_s(&v);
    if nv < 1e-12 {
        return Err(Error::Solver(
            "far-point direction vanishes after projection into the constrained space".into(),
        ));
    }
    for x in v.iter_mut() {
        *x /= nv;
    }
    let mut t = (2.0 * rim.radius).max(1.0);
    loop {
        let u: Vec<f64> = v.iter().map(|x| t * x).collect();
        if dp.energy_s(&u) < 0.0 {
            return Ok(DiscreteField {
                values: u,
                mesh_kind: dp.mesh.kind,
            });
        }
        t *= 2.0;
        if t > 1e6 {
            return Err(Error::Solver(
                "far-point search exceeded scale 1e6 — the superlinear term never wins along this direction".into(),
            ));
        }
    }
}

// ---------------------------------------------------------------------------
// Path deformation
// ---------------------------------------------------------------------------

/// Controls for the deformation loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpControls {
    /// Number of fields along the path, endpoints included.
    pub path_points: usize,
    /// Cap on deformation iterations.
    pub max_iters: usize,
    /// Convergence threshold on the projected gradient ℓ² norm at the path
    /// maximum.
    pub tol_grad: f64,
    /// Seed for the rim sampling and the coercivity starts.
    pub seed: u64,
}

impl Default for MpControls {
    fn default() -> Self {
        MpControls {
            path_points: 33,
            max_iters: 2000,
            tol_grad: 1e-7,
            seed: 0,
        }
    }
}

/// Outcome of a mountain-pass run. `converged == false` means the iteration
/// cap was reached (or descent stalled) with the gradient still above
/// tolerance — a Palais–Smale sequence that refused to converge; the level
/// history is the diagnostic to inspect in that case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MountainPassResult {
    /// J at the path maximum after the final iteration.
    pub level: f64,
    /// The field at the path maximum — the critical-point approximation.
    pub field: DiscreteField,
    /// Projected-gradient ℓ² norm at `field`.
    pub grad_norm: f64,
    /// The final deformed path.
    pub path: Vec<DiscreteField>,
    pub iterations: usize,
    pub rim_rho: f64,
    pub rim_radius: f64,
    pub converged: bool,
    /// J at the path maximum, one entry per iteration. Mostly decreasing;
    /// transient increases happen when re-tensioning exposes a stretch of
    /// ridge the previous sampling had tunnelled under.
    pub level_history: Vec<f64>,
}

struct DeformOutcome {
    level: f64,
    max_index: usize,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
    level_history: Vec<f64>,
}

fn interior_max(levels: &[f64]) -> usize {
    let mut im = 1;
    for k in 2..levels.len() - 1 {
        if levels[k] > levels[im] {
            im = k;
        }
    }
    im
}

/// The deformation engine shared by `mountain_pass`, `nodal_rebuild` and
/// `continuation`: locate the path maximum (ties break to the lowest index),
/// take an Armijo descent step there, re-tension the path by ‖·‖_{1,p}
/// arc length after every step, and switch to damped Newton steps once the
/// residual is small. A Newton result is accepted as the pass only when it is
/// fully converged, sits at a positive level within a small window of the
/// sampled maximum, and is macroscopically far from the zero field.
fn deform_path(
    dp: &DiscreteProblem,
    path: &mut Vec<Vec<f64>>,
    controls: &MpControls,
    norm_floor: f64,
) -> DeformOutcome {
    let mut levels: Vec<f64> = path.iter().map(|u| dp.energy_s(u)).collect();
    let mut history: Vec<f64> = Vec::new();
    let mut step = 1.0f64;
    let mut newton_tries = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;
    let mut stalled = false;
    let (mut im, mut gn);
    loop {
        im = interior_max(&levels);
        let jmax = levels[im];
        history.push(jmax);
        let g = dp.projected_gradient_s(&path[im]);
        gn = l2_norm(&g);
        if gn < controls.tol_grad {
            converged = true;
            break;
        }
        if iterations >= controls.max_iters || stalled {
            break;
        }
        iterations += 1;

        // A critical point certified by Newton (residual below tolerance) is
        // accepted as the crossing when its level sits inside the window the
        // sampled polyline can actually resolve — a 33-point path locates
        // the pass level only to a few percent. The norm floor keeps a
        // collapse into the shallow-gradient basin around the trivial state
        // from being reported as success.
        let window = 0.05 * (1.0 + jmax.abs());
        let near = gn < 1e-2 * (1.0 + jmax.abs());
        if (near || iterations.is_multiple_of(25)) && newton_tries < 40 {
            newton_tries += 1;
            if let Some((w, wg)) = newton_polish(dp, &path[im], controls.tol_grad) {
                let jw = dp.energy_s(&w);
                if wg < controls.tol_grad
                    && jw > 0.0
                    && jw <= jmax + window
                    && dp.norm_s(&w) > norm_floor
                {
                    path[im] = w;
                    levels[im] = jw;
                    history.push(jw);
                    gn = wg;
                    converged = true;
                    break;
                }
            }
        }

        // Armijo backtracking along −g at the maximum. The step is capped so
        // one move displaces the field by at most a quarter of its scale in
        // ‖·‖_{1,p}: J is unbounded below, and without the cap the growing
        // step rockets the path point into the negative well.
        let g_scale = dp.norm_s(&g);
        let cap = if g_scale > 0.0 {
            0.25 * (1.0 + dp.norm_s(&path[im])) / g_scale
        } else {
            step
        };
        let mut alpha = step.min(cap);
        let mut moved = false;
        while alpha > 1e-18 {
            let mut cand: Vec<f64> = path[im]
                .iter()
                .zip(&g)
                .map(|(u, gi)| u - alpha * gi)
                .collect();
            dp.project_s(&mut cand);
            let jc = dp.energy_s(&cand);
            if jc.is_finite() && jc <= jmax - 1e-4 * alpha * gn * gn {
                path[im] = cand;
                levels[im] = jc;
                step = alpha * 1.25;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            // Descent cannot make progress at this residual; one last Newton
            // attempt, otherwise report the stall.
            if let Some((w, wg)) = newton_polish(dp, &path[im], controls.tol_grad) {
                let jw = dp.energy_s(&w);
                if wg < controls.tol_grad
                    && jw > 0.0
                    && jw <= jmax + window
                    && dp.norm_s(&w) > norm_floor
                {
                    path[im] = w;
                    levels[im] = jw;
                    history.push(jw);
                    gn = wg;
                    converged = true;
                    break;
                }
            }
            stalled = true;
            continue;
        }

        // Re-tension after every descent step. This must be unconditional:
        // descent drags individual nodes off the ridge, and without fresh
        // arc-length resampling a segment can end up straddling the pass
        // with both endpoints below it, letting the sampled maximum leak
        // under the true crossing level.
        if let Some((newp, newlev)) = re_tension(dp, path) {
            *path = newp;
            levels = newlev;
        }
    }
    DeformOutcome {
        level: levels[im],
        max_index: im,
        grad_norm: gn,
        iterations,
        converged,
        level_history: history,
    }
}

/// Re-samples the polyline uniformly by cumulative ‖·‖_{1,p} arc length.
fn re_tension(dp: &DiscreteProblem, path: &[Vec<f64>]) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    let m = path.len();
    let nn = path[0].len();
    let mut cum = vec![0.0; m];
    for k in 1..m {
        let d: Vec<f64> = (0..nn).map(|i| path[k][i] - path[k - 1][i]).collect();
        cum[k] = cum[k - 1] + dp.norm_s(&d);
    }
    let total = cum[m - 1];
    if total < 1e-300 {
        return None;
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(m);
    out.push(path[0].clone());
    let mut seg = 0usize;
    for j in 1..m - 1 {
        let target = total * j as f64 / (m - 1) as f64;
        while seg + 2 < m && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let th = if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
        let mut f: Vec<f64> = (0..nn)
            .map(|i| path[seg][i] + th * (path[seg + 1][i] - path[seg][i]))
            .collect();
        dp.project_s(&mut f);
        out.push(f);
    }
    out.push(path[m - 1].clone());
    let levels = out.iter().map(|u| dp.energy_s(u)).collect();
    Some((out, levels))
}

/// Damped Newton iteration on the full nonlinear system (critical points of
/// J are genuine critical points on the whole space when the data are
/// symmetric, so the saddle can be attacked directly; partial-pivot LU
/// handles the indefinite Hessian). Returns the improved field and its
/// projected-gradient norm, or `None` when no improvement was found.
fn newton_polish(dp: &DiscreteProblem, u0: &[f64], tol: f64) -> Option<(Vec<f64>, f64)> {
    let nn = u0.len();
    if nn > 1200 {
        return None;
    }
    let mut u = u0.to_vec();
    let mut g = dp.projected_gradient_s(&u);
    let mut gn = l2_norm(&g);
    let entry_gn = gn;
    for _ in 0..15 {
        if gn < tol {
            break;
        }
        let mut jac = assemble_jacobian(dp, &u);
        let mut rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        if !lu_solve(&mut jac, &mut rhs) {
            break;
        }
        dp.project_s(&mut rhs);
        let mut lam = 1.0f64;
        let mut accepted = false;
        while lam > 1e-6 {
            let mut cand: Vec<f64> = u.iter().zip(&rhs).map(|(a, d)| a + lam * d).collect();
            dp.project_s(&mut cand);
            let gc = dp.projected_gradient_s(&cand);
            let gcn = l2_norm(&gc);
            if gcn < (1.0 - 0.25 * lam) * gn {
                u = cand;
                g = gc;
                gn = gcn;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if gn < entry_gn {
        Some((u, gn))
    } else {
        None
    }
}

/// Dense Hessian of J at `u`: per-element `c ∇φ_k·∇φ_l + d (∇u·∇φ_k)(∇u·∇φ_l)`
/// from the regularised gradient term plus the lumped diagonal, with Dirichlet
/// rows replaced by the identity.
fn assemble_jacobian(dp: &DiscreteProblem, u: &[f64]) -> Vec<f64> {
    let nn = u.len();
    let p = dp.spec.p;
    let s = dp.s_exponent;
    let q = dp.spec.q;
    let s2 = dp.sigma * dp.sigma;
    let mut jac = vec![0.0; nn * nn];
    for el in &dp.elems {
        let g = fem::elem_gradient(el, u);
        let y = g[0] * g[0] + g[1] * g[1] + s2;
        let c = el.measure * y.powf(0.5 * p - 1.0);
        let d = el.measure * (p - 2.0) * y.powf(0.5 * p - 2.0);
        for k in 0..el.nv {
            let ik = el.nodes[k];
            let gk = el.grads[k];
            let gdk = g[0] * gk[0] + g[1] * gk[1];
            for l in 0..el.nv {
                let il = el.nodes[l];
                let gl = el.grads[l];
                let gdl = g[0] * gl[0] + g[1] * gl[1];
                jac[ik * nn + il] += c * (gk[0] * gl[0] + gk[1] * gl[1]) + d * gdk * gdl;
            }
        }
    }
    // |u|^e with the singular cases (e < 0 at u = 0) contributing nothing.
    let pow_or_zero = |v: f64, e: f64| -> f64 {
        if e == 0.0 {
            1.0
        } else if v <= 0.0 {
            0.0
        } else {
            v.powf(e)
        }
    };
    for i in 0..nn {
        let v = u[i].abs();
        let w = dp.mesh.weights[i];
        jac[i * nn + i] += w * dp.a_vals[i] * (p - 1.0) * pow_or_zero(v, p - 2.0)
            - w * dp.f_vals[i] * (s - 1.0) * pow_or_zero(v, s - 2.0)
            - w * dp.h_vals[i] * q * pow_or_zero(v, q - 1.0);
    }
    for i in 0..nn {
        if dp.mesh.boundary[i] {
            for j in 0..nn {
                jac[i * nn + j] = 0.0;
            }
            jac[i * nn + i] = 1.0;
        }
    }
    jac
}

/// In-place dense LU solve with partial pivoting; returns false on a
/// (numerically) singular matrix. `b` holds the solution afterwards.
fn lu_solve(a: &mut [f64], b: &mut [f64]) -> bool {
    let nn = b.len();
    for k in 0..nn {
        let mut piv = k;
        let mut mx = a[k * nn + k].abs();
        for i in k + 1..nn {
            let v = a[i * nn + k].abs();
            if v > mx {
                mx = v;
                piv = i;
            }
        }
        if mx < 1e-300 {
            return false;
        }
        if piv != k {
            for j in k..nn {
                a.swap(k * nn + j, piv * nn + j);
            }
            b.swap(k, piv);
        }
        let akk = a[k * nn + k];
        for i in k + 1..nn {
            let f = a[i * nn + k] / akk;
            if f == 0.0 {
                continue;
            }
            a[i * nn + k] = 0.0;
            for j in k + 1..nn {
                a[i * nn + j] -= f * a[k * nn + j];
            }
            b[i] -= f * b[k];
        }
    }
    for k in (0..nn).rev() {
        let mut acc = b[k];
        for j in k + 1..nn {
            acc -= a[k * nn + j] * b[j];
        }
        b[k] = acc / a[k * nn + k];
    }
    true
}

fn linear_path(end: &[f64], m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|k| {
            let t = k as f64 / (m - 1) as f64;
            end.iter().map(|v| t * v).collect()
        })
        .collect()
}

/// Runs the mountain-pass iteration from the straight path `t ↦ t·start`.
/// `start` must have negative energy (take it from [`far_point`]); the rim is
/// re-estimated internally with the seed in `controls` and reported in the
/// result. On success the level is positive and the gradient at the returned
/// field is below tolerance (see `level_history` for the descent trace; note
/// `rim_rho` is a sampled estimate that can exceed the true crossing level).
/// A run that hits the iteration cap returns `converged == false` rather than
/// an error: the level history is the diagnostic for a non-convergent
/// Palais–Smale sequence.
pub fn mountain_pass(
    dp: &DiscreteProblem,
    start: &DiscreteField,
    controls: &MpControls,
) -> Result<MountainPassResult> {
    start.check_mesh(dp.mesh)?;
    if controls.path_points < 5 {
        return Err(Error::Config("the path needs at least 5 points".into()));
    }
    let rim = rim_estimate(
        dp,
        &CoercivityControls {
            seed: controls.seed,
            ..CoercivityControls::default()
        },
    )?;
    let mut endv = start.values.clone();
    dp.project_s(&mut endv);
    let je = dp.energy_s(&endv);
    if !(je < 0.0) {
        return Err(Error::Solver(format!(
            "path endpoint has energy {je:.6e} ≥ 0 — construct it with far_point first"
        )));
    }
    let mut path = linear_path(&endv, controls.path_points);
    let out = deform_path(dp, &mut path, controls, 0.5 * rim.radius);
    Ok(MountainPassResult {
        level: out.level,
        field: DiscreteField {
            values: path[out.max_index].clone(),
            mesh_kind: dp.mesh.kind,
        },
        grad_norm: out.grad_norm,
        path: path
            .into_iter()
            .map(|v| DiscreteField {
                values: v,
                mesh_kind: dp.mesh.kind,
            })
            .collect(),
        iterations: out.iterations,
        rim_rho: rim.rho,
        rim_radius: rim.radius,
        converged: out.converged,
        level_history: out.level_history,
    })
}

// ---------------------------------------------------------------------------
// Nodal rebuild
// ---------------------------------------------------------------------------

/// Rebuilds a converged critical point into one with the prescribed sign
/// structure: every path field is replaced by `+|φ|` on Ω₁ and `−|φ|` on Ω₂
/// (zero on the interface), which cannot raise the crossing level on meshes
/// whose elements never join Ω₁ to Ω₂ directly, and the deformation is run
/// again. Fails if the symmetry carries no splitting, if the surgery or the
/// re-descent raises the level, or if the final field loses the sign
/// structure.
pub fn nodal_rebuild(
    dp: &DiscreteProblem,
    prior: &MountainPassResult,
    controls: &MpControls,
) -> Result<MountainPassResult> {
    if !prior.converged {
        return Err(Error::Solver(
            "nodal rebuild needs a converged critical point".into(),
        ));
    }
    let split = dp
        .sym
        .split
        .as_ref()
        .ok_or_else(|| Error::Symmetry("no domain splitting provided for the rebuild".into()))?;
    let nn = dp.mesh.num_nodes();
    let mut in1 = vec![false; nn];
    let mut in2 = vec![false; nn];
    for &i in &split.omega1 {
        in1[i] = true;
    }
    for &i in &split.omega2 {
        in2[i] = true;
    }
    let surger = |u: &[f64]| -> Vec<f64> {
        (0..nn)
            .map(|i| {
                if in1[i] {
                    u[i].abs()
                } else if in2[i] {
                    -u[i].abs()
                } else {
                    0.0
                }
            })
            .collect()
    };

    let prior_levels: Vec<f64> = prior.path.iter().map(|f| dp.energy_s(&f.values)).collect();
    let old_max = prior_levels[interior_max(&prior_levels)];
    let mut path: Vec<Vec<f64>> = prior
        .path
        .iter()
        .map(|f| {
            let mut v = surger(&f.values);
            dp.project_s(&mut v);
            v
        })
        .collect();
    let new_levels: Vec<f64> = path.iter().map(|u| dp.energy_s(u)).collect();
    let new_max = new_levels[interior_max(&new_levels)];
    if new_max > old_max + 1e-9 * (1.0 + old_max.abs()) {
        return Err(Error::Solver(
            "sign surgery raised the path level — the splitting does not separate the regions"
                .into(),
        ));
    }
    if !(*new_levels.last().unwrap() < 0.0) {
        return Err(Error::Solver(
            "sign surgery lifted the path endpoint above zero energy".into(),
        ));
    }

    let out = deform_path(dp, &mut path, controls, 0.5 * prior.rim_radius);
    let field = &path[out.max_index];
    let amax = field.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol_zero = 1e-6 * amax;
    for i in 0..nn {
        if (in1[i] && field[i] < -tol_zero) || (in2[i] && field[i] > tol_zero) {
            return Err(Error::Solver(format!(
                "sign structure lost during rebuild at node {i}"
            )));
        }
    }
    if out.level > prior.level + 1e-6 * (1.0 + prior.level.abs()) {
        return Err(Error::Solver(format!(
            "rebuilt level {:.9e} exceeds the original critical level {:.9e}",
            out.level, prior.level
        )));
    }
    Ok(MountainPassResult {
        level: out.level,
        field: DiscreteField {
            values: field.clone(),
            mesh_kind: dp.mesh.kind,
        },
        grad_norm: out.grad_norm,
        path: path
            .into_iter()
            .map(|v| DiscreteField {
                values: v,
                mesh_kind: dp.mesh.kind,
            })
            .collect(),
        iterations: out.iterations,
        rim_rho: prior.rim_rho,
        rim_radius: prior.rim_radius,
        converged: out.converged,
        level_history: out.level_history,
    })
}

// ---------------------------------------------------------------------------
// Continuation in the subcritical exponent
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationEntry {
    pub epsilon: f64,
    pub level: f64,
    /// ‖φ_ε‖_{1,p} of the critical field.
    pub norm: f64,
    pub grad_norm: f64,
    pub converged: bool,
    /// The subcritical-gap correction for this ε (zero at ε = 0).
    pub envelope_corr: f64,
    /// level ≤ envelope_bound + envelope_corr (+ slack)?
    pub envelope_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub entries: Vec<ContinuationEntry>,
    /// Critical fields, one per schedule entry.
    pub fields: Vec<DiscreteField>,
    /// (max − min)/min of the field norms across the schedule.
    pub norm_drift: f64,
    /// Estimated critical-level envelope: the smallest-ε level plus its own
    /// gap correction.
    pub envelope_bound: f64,
    /// Set when the norms spread by more than a factor 3 — a concentration
    /// warning; run [`concentration_check`] on the fields.
    pub diverging: bool,
}

/// Solves along a strictly decreasing schedule of ε values, warm-starting
/// each run from the previous deformed path. The envelope correction for ε is
///
/// ```text
/// corr(ε) = (max f / p*) · max_{t∈[0,1]} ∫ t^{p*−ε} | |ψ|^{p*−ε} − t^ε |ψ|^{p*} |
/// ```
///
/// with ψ the smallest-ε critical field: the level excess a subcritical run
/// can carry over the critical minimax. Each level is checked against
/// `envelope_bound + corr(ε)`.
pub fn continuation(
    spec: &ProblemSpec,
    mesh: &DomainMesh,
    sym: &SymmetrySpec,
    direction: &DiscreteField,
    schedule: &[f64],
    controls: &MpControls,
) -> Result<ContinuationReport> {
    if schedule.is_empty() {
        return Err(Error::Config("continuation needs a non-empty schedule".into()));
    }
    for w in schedule.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Config(
                "continuation schedule must decrease strictly".into(),
            ));
        }
    }
    if *schedule.last().unwrap() < 0.0 {
        return Err(Error::Config("ε cannot be negative".into()));
    }
    if controls.path_points < 5 {
        return Err(Error::Config("the path needs at least 5 points".into()));
    }
    let cc = CoercivityControls {
        seed: controls.seed,
        ..CoercivityControls::default()
    };
    let mut entries: Vec<ContinuationEntry> = Vec::new();
    let mut fields: Vec<Vec<f64>> = Vec::new();
    let mut prev_path: Option<Vec<Vec<f64>>> = None;
    for &eps in schedule {
        let mut spec_e = spec.clone();
        spec_e.epsilon = eps;
        spec_e.validate()?;
        let dp = DiscreteProblem::new(&spec_e, mesh, sym)?;
        let rim = rim_estimate(&dp, &cc)?;
        let mut path = match &prev_path {
            None => {
                let fp = far_point(&dp, direction, &rim)?;
                linear_path(&fp.values, controls.path_points)
            }
            Some(pp) => pp.clone(),
        };
        // The previous endpoint may no longer lie below zero under the new
        // exponent; push it further out if needed.
        if dp.energy_s(path.last().unwrap()) >= 0.0 {
            let endf = DiscreteField {
                values: path.last().unwrap().clone(),
                mesh_kind: mesh.kind,
            };
            let fp = far_point(&dp, &endf, &rim)?;
            *path.last_mut().unwrap() = fp.values;
        }
        let out = deform_path(&dp, &mut path, controls, 0.5 * rim.radius);
        let fieldv = path[out.max_index].clone();
        entries.push(ContinuationEntry {
            epsilon: eps,
            level: out.level,
            norm: dp.norm_s(&fieldv),
            grad_norm: out.grad_norm,
            converged: out.converged,
            envelope_corr: f64::NAN,
            envelope_ok: false,
        });
        fields.push(fieldv);
        prev_path = Some(path);
    }

    let f_vals = spec.f.values_on_mesh(mesh)?;
    let max_f = f_vals.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let pstar = spec.p_star();
    let psi = fields.last().unwrap();
    let corr = |eps: f64| -> f64 {
        let mut best = 0.0f64;
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            let mut acc = 0.0;
            for (i, &v) in psi.iter().enumerate() {
                let av = v.abs();
                if av == 0.0 {
                    continue;
                }
                acc += mesh.weights[i]
                    * t.powf(pstar - eps)
                    * (av.powf(pstar - eps) - t.powf(eps) * av.powf(pstar)).abs();
            }
            best = best.max(acc);
        }
        max_f / pstar * best
    };
    let c_min = entries.last().unwrap().level;
    let envelope_bound = c_min + corr(*schedule.last().unwrap());
    for e in entries.iter_mut() {
        e.envelope_corr = corr(e.epsilon);
        e.envelope_ok = e.level <= envelope_bound + e.envelope_corr + 1e-9 * (1.0 + envelope_bound.abs());
    }
    let mut nmin = f64::INFINITY;
    let mut nmax = 0.0f64;
    for e in &entries {
        nmin = nmin.min(e.norm);
        nmax = nmax.max(e.norm);
    }
    let norm_drift = if nmin > 1e-300 { (nmax - nmin) / nmin } else { f64::INFINITY };
    Ok(ContinuationReport {
        entries,
        fields: fields
            .into_iter()
            .map(|v| DiscreteField {
                values: v,
                mesh_kind: mesh.kind,
            })
            .collect(),
        norm_drift,
        envelope_bound,
        diverging: norm_drift > 2.0,
    })
}

// ---------------------------------------------------------------------------
// Concentration diagnostic
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCandidate {
    pub node: usize,
    /// The radius at which the statistic peaked for this node.
    pub radius: f64,
    pub local_mass: f64,
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    /// Dyadic radii tested.
    pub radii: Vec<f64>,
    /// Nodes of the final field where the compactness statistic reaches
    /// 1 − margin, worst radius per node, sorted by statistic.
    pub candidates: Vec<ConcentrationCandidate>,
    pub max_statistic: f64,
    /// Per input field: the largest local mass (smallest radius) over nodes
    /// away from every candidate — should tend to zero when the mass escapes
    /// into a concentration set.
    pub elsewhere_mass: Vec<f64>,
}

/// The local compactness test: for each node x and dyadic radius δ compute
/// the local mass `∫_{B_x(δ)} f|u|^s` and the statistic
/// `K^p f(x)^{p/p*} mass^{(p*−p)/p*}`, which must stay below 1 for the
/// Palais–Smale machinery to be clean near x. Nodes reaching `1 − margin`
/// (margin 0.05) on the final field are reported as concentration candidates.
pub fn concentration_check(
    spec: &ProblemSpec,
    mesh: &DomainMesh,
    fields: &[DiscreteField],
) -> Result<ConcentrationReport> {
    if fields.is_empty() {
        return Err(Error::Config(
            "concentration check needs at least one field".into(),
        ));
    }
    for f in fields {
        f.check_mesh(mesh)?;
    }
    let f_vals = spec.f.values_on_mesh(mesh)?;
    let s = spec.solve_exponent();
    let p = spec.p;
    let nf = spec.n as f64;
    let pstar = spec.p_star();
    let k_p = sobolev_k_pow(spec.n, p)?.powf(-p / nf);
    let base = match mesh.kind {
        MeshKind::FlatTorus { .. } => 0.5,
        _ => 1.0,
    };
    let radii: Vec<f64> = (2..=5).map(|k| base / f64::powi(2.0, k)).collect();
    let margin = 0.05;
    let nn = mesh.num_nodes();
    let mass_at = |u: &[f64], i: usize, r: f64| -> f64 {
        let mut acc = 0.0;
        for j in 0..nn {
            if mesh.distance(i, j) <= r {
                acc += mesh.weights[j] * f_vals[j] * u[j].abs().powf(s);
            }
        }
        acc
    };
    let last = &fields.last().unwrap().values;
    let mut best: Vec<Option<(f64, f64, f64)>> = vec![None; nn];
    let mut max_stat = 0.0f64;
    for i in 0..nn {
        for &r in &radii {
            let mass = mass_at(last, i, r);
            let stat = k_p * f_vals[i].powf(p / pstar) * mass.powf((pstar - p) / pstar);
            max_stat = max_stat.max(stat);
            if stat >= 1.0 - margin {
                let better = match best[i] {
                    Some((_, _, st)) => stat > st,
                    None => true,
                };
                if better {
                    best[i] = Some((r, mass, stat));
                }
            }
        }
    }
    let mut candidates: Vec<ConcentrationCandidate> = best
        .iter()
        .enumerate()
        .filter_map(|(i, b)| {
            b.map(|(radius, local_mass, statistic)| ConcentrationCandidate {
                node: i,
                radius,
                local_mass,
                statistic,
            })
        })
        .collect();
    candidates.sort_by(|a, b| b.statistic.total_cmp(&a.statistic));
    let r_small = *radii.last().unwrap();
    let guard = 2.0 * radii[0];
    let elsewhere_mass: Vec<f64> = fields
        .iter()
        .map(|f| {
            let mut mx = 0.0f64;
            for i in 0..nn {
                if candidates
                    .iter()
                    .any(|c| mesh.distance(i, c.node) <= guard)
                {
                    continue;
                }
                mx = mx.max(mass_at(&f.values, i, r_small));
            }
            mx
        })
        .collect();
    Ok(ConcentrationReport {
        radii,
        candidates,
        max_statistic: max_stat,
        elsewhere_mass,
    })
}
