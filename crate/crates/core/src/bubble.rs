//! The concentrating radial profile (truncated Aubin–Talenti-type bubble),
//! its antisymmetrised orbit superposition on a mesh, the analytic energy
//! expansions in the concentration parameter η with their quadrature
//! counterparts, and the sup-over-dilations threshold scan.

use serde::{Deserialize, Serialize};

use crate::constants::{beta_integral, e_constant, ConstantBundle};
use crate::mesh::{project_to_h, DomainMesh, MeshKind, SymmetrySpec};
use crate::problem::ProblemSpec;
use crate::quad::integrate;
use crate::solver::DiscreteField;
use crate::{Error, Result};

/// Bubble data: concentration parameter η, cutoff radius δ, and the centre
/// node. The cutoff offset μ is derived (see [`mu`]), never free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub eta: f64,
    pub delta: f64,
    /// Mesh node index of the centre x_o (ignored by the pure radial
    /// expansions).
    pub center: usize,
}

impl BubbleParams {
    pub fn new(eta: f64, delta: f64, center: usize) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::Domain(format!("eta = {eta} must be positive")));
        }
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("delta = {delta} must be positive")));
        }
        Ok(BubbleParams { eta, delta, center })
    }
}

/// Default cutoff radius: a tenth of the domain injectivity scale (half the
/// period on the torus, the unit radius elsewhere).
pub fn default_delta(mesh: &DomainMesh) -> f64 {
    match mesh.kind {
        MeshKind::FlatTorus { .. } => 0.05,
        _ => 0.1,
    }
}

/// The profile amplitude factor f0^{(p−n)/p²} η^{(n−p)/p²} C(n,p). Only the
/// normalisation constant is needed here, so the profile works on the full
/// n > p range even where the expansion ratios do not converge.
fn amplitude(params: &BubbleParams, spec: &ProblemSpec) -> Result<f64> {
    let c = crate::constants::bubble_constant(spec.n, spec.p)?;
    let nf = spec.n as f64;
    let p = spec.p;
    Ok(spec.x0.f0.powf((p - nf) / (p * p)) * params.eta.powf((nf - p) / (p * p)) * c)
}

/// Cutoff offset μ = f0^{(p−n)/p²} η^{(n−p)/p²} (η + δ^{p/(p−1)})^{1−n/p} C(n,p):
/// exactly the untruncated profile value at r = δ, so ψ is continuous there.
pub fn mu(params: &BubbleParams, spec: &ProblemSpec) -> Result<f64> {
    let nf = spec.n as f64;
    let p = spec.p;
    Ok(amplitude(params, spec)?
        * (params.eta + params.delta.powf(p / (p - 1.0))).powf(1.0 - nf / p))
}

/// ψ(r): the truncated radial bubble — amplitude·(η + r^{p/(p−1)})^{1−n/p} − μ
/// for r ≤ δ, zero beyond. Vanishes at r = δ by construction of μ.
pub fn psi_value(r: f64, params: &BubbleParams, spec: &ProblemSpec) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius r = {r} must be nonnegative")));
    }
    if r > params.delta {
        return Ok(0.0);
    }
    let nf = spec.n as f64;
    let p = spec.p;
    let k = amplitude(params, spec)?;
    Ok(k * (params.eta + r.powf(p / (p - 1.0))).powf(1.0 - nf / p) - mu(params, spec)?)
}

/// ∂ψ/∂r, zero outside the support. Strictly negative on (0, δ].
pub fn psi_radial_derivative(r: f64, params: &BubbleParams, spec: &ProblemSpec) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius r = {r} must be nonnegative")));
    }
    if r > params.delta || r == 0.0 {
        return Ok(0.0);
    }
    let nf = spec.n as f64;
    let p = spec.p;
    let k = amplitude(params, spec)?;
    let base = params.eta + r.powf(p / (p - 1.0));
    Ok(k * (1.0 - nf / p) * base.powf(-nf / p) * (p / (p - 1.0)) * r.powf(1.0 / (p - 1.0)))
}

/// Builds Σ_i (ψ centred at x_i − ψ centred at τx_i) over the G-orbit of the
/// centre node, then projects into the discrete constrained space (a no-op up
/// to rounding when the supports are genuinely disjoint, and it makes the
/// invariances exact at machine precision). Errors when any two signed
/// supports overlap, naming the offending pair.
pub fn orbit_superposition(
    params: &BubbleParams,
    mesh: &DomainMesh,
    sym: &SymmetrySpec,
    spec: &ProblemSpec,
) -> Result<DiscreteField> {
    if sym.num_nodes() != mesh.num_nodes() {
        return Err(Error::Config(format!(
            "symmetry acts on {} nodes but the mesh has {}",
            sym.num_nodes(),
            mesh.num_nodes()
        )));
    }
    if params.center >= mesh.num_nodes() {
        return Err(Error::Config(format!(
            "centre node {} out of range",
            params.center
        )));
    }
    let orbit = sym.orbit(params.center);
    let mut centers: Vec<(usize, f64)> = Vec::with_capacity(2 * orbit.len());
    for &x in &orbit {
        centers.push((x, 1.0));
    }
    for &x in &orbit {
        centers.push((sym.tau[x], -1.0));
    }
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let d = mesh.distance(centers[i].0, centers[j].0);
            if d <= 2.0 * params.delta {
                return Err(Error::Symmetry(format!(
                    "bubble supports at nodes {} and {} overlap: distance {} <= 2 delta = {}",
                    centers[i].0,
                    centers[j].0,
                    d,
                    2.0 * params.delta
                )));
            }
        }
    }
    let mut values = vec![0.0; mesh.num_nodes()];
    for (node, v) in values.iter_mut().enumerate() {
        for &(c, sign) in &centers {
            let d = mesh.distance(node, c);
            if d <= params.delta {
                *v += sign * psi_value(d, params, spec)?;
            }
        }
    }
    for (i, v) in values.iter_mut().enumerate() {
        if mesh.boundary[i] {
            *v = 0.0;
        }
    }
    project_to_h(sym, &mut values);
    Ok(DiscreteField {
        values,
        mesh_kind: mesh.kind,
    })
}

/// Which energy term a report describes: the gradient term, the a-coefficient
/// mass term, the critical f-term, or the h-perturbation term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermId {
    Grad,
    Mass,
    Crit,
    Pert,
}

impl TermId {
    pub const ALL: [TermId; 4] = [TermId::Grad, TermId::Mass, TermId::Crit, TermId::Pert];

    pub fn label(self) -> &'static str {
        match self {
            TermId::Grad => "grad",
            TermId::Mass => "mass",
            TermId::Crit => "crit",
            TermId::Pert => "pert",
        }
    }
}

/// One energy term's expansion: `leading·(1 + coeff·η^power)` when the term
/// survives at η = 0, `coeff·η^power` when it vanishes (leading = 0), next to
/// the direct radial quadrature of the same term at `eta_used`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub term_id: TermId,
    pub leading: f64,
    pub correction_coeff: f64,
    pub correction_power: f64,
    pub quadrature_value: f64,
    pub eta_used: f64,
}

impl ExpansionReport {
    /// The analytic prediction at `eta_used`.
    pub fn predicted(&self) -> f64 {
        let corr = self.correction_coeff * self.eta_used.powf(self.correction_power);
        if self.leading != 0.0 {
            self.leading * (1.0 + corr)
        } else {
            corr
        }
    }

    /// Relative deviation of the quadrature from the prediction.
    pub fn relative_error(&self) -> f64 {
        let p = self.predicted();
        if p == 0.0 {
            self.quadrature_value.abs()
        } else {
            ((self.quadrature_value - p) / p).abs()
        }
    }
}

/// Radial quadrature of one term over the bubble support: ω·∫₀^δ c(r)·g(r)·r^{n−1} dr.
fn term_quadrature(term: TermId, spec: &ProblemSpec, params: &BubbleParams) -> Result<f64> {
    for (field, name) in [(&spec.a, "a"), (&spec.f, "f"), (&spec.h, "h")] {
        if !field.is_closed_form() {
            return Err(Error::Config(format!(
                "expansion quadrature needs a closed-form coefficient, but {name} is tabulated"
            )));
        }
    }
    let bundle = ConstantBundle::new(spec.n, spec.p)?;
    let nf = spec.n as f64;
    let p = spec.p;
    let pw = match term {
        TermId::Grad | TermId::Mass => p,
        TermId::Crit => bundle.p_star,
        TermId::Pert => spec.q + 1.0,
    };
    // The quadrature error tolerance rides on the term's magnitude; probe the
    // integrand at the concentration scale to set an absolute tolerance.
    let scale_r = params.eta.powf((p - 1.0) / p).min(params.delta);
    let f = |r: f64| -> f64 {
        let coef = match term {
            TermId::Grad => 1.0,
            TermId::Mass => spec.a.eval_radial(r).unwrap_or(f64::NAN),
            TermId::Crit => spec.f.eval_radial(r).unwrap_or(f64::NAN),
            TermId::Pert => spec.h.eval_radial(r).unwrap_or(f64::NAN),
        };
        let g = if term == TermId::Grad {
            psi_radial_derivative(r, params, spec).unwrap_or(f64::NAN)
        } else {
            psi_value(r, params, spec).unwrap_or(f64::NAN)
        };
        coef * g.abs().powf(pw) * r.powf(nf - 1.0)
    };
    let probe = f(scale_r).abs().max(f(0.5 * params.delta).abs());
    let tol = 1e-12 * (probe * params.delta).max(1e-300);
    // Split at the concentration scale so the adaptive rule sees the peak.
    let inner = integrate(&f, 0.0, scale_r, tol);
    let outer = integrate(&f, scale_r, params.delta, tol);
    Ok(bundle.omega * (inner + outer))
}

/// Verifies that the pointwise x0 record matches the closed-form coefficient
/// fields at the centre, so the analytic and quadrature paths describe the
/// same problem.
fn check_x0_consistency(spec: &ProblemSpec) -> Result<()> {
    for (field, value, name) in [
        (&spec.a, spec.x0.a0, "a"),
        (&spec.f, spec.x0.f0, "f"),
        (&spec.h, spec.x0.h0, "h"),
    ] {
        if field.is_closed_form() {
            let at0 = field.eval_radial(0.0)?;
            if (at0 - value).abs() > 1e-10 * (1.0 + value.abs()) {
                return Err(Error::Config(format!(
                    "x0 data gives {name}(x_o) = {value} but the field evaluates to {at0} \
                     at the centre"
                )));
            }
        }
    }
    Ok(())
}

/// The four energy-term expansions at the given η, each with its direct
/// quadrature. Order: grad, mass, crit, pert.
pub fn expansion_terms(spec: &ProblemSpec, params: &BubbleParams) -> Result<Vec<ExpansionReport>> {
    check_x0_consistency(spec)?;
    let bundle = ConstantBundle::new(spec.n, spec.p)?;
    let nf = spec.n as f64;
    let p = spec.p;
    let q = spec.q;
    let x = &spec.x0;
    let f_pow = x.f0.powf(1.0 - nf / p);
    let curv_power = 2.0 * (1.0 - 1.0 / p);

    let grad_leading = bundle.k_pow_minus_n * f_pow;
    let grad = ExpansionReport {
        term_id: TermId::Grad,
        leading: grad_leading,
        correction_coeff: -x.scal0 / (6.0 * nf) * bundle.ratio_a,
        correction_power: curv_power,
        quadrature_value: term_quadrature(TermId::Grad, spec, params)?,
        eta_used: params.eta,
    };

    let mass = ExpansionReport {
        term_id: TermId::Mass,
        leading: 0.0,
        correction_coeff: (p - 1.0) / p
            * bundle.bubble_c.powf(p)
            * x.a0
            * f_pow
            * bundle.omega
            * bundle.ratio_b
            * bundle.i_base,
        correction_power: p - 1.0,
        quadrature_value: term_quadrature(TermId::Mass, spec, params)?,
        eta_used: params.eta,
    };

    let crit_leading =
        bundle.bubble_c.powf(bundle.p_star) * f_pow * bundle.omega * (nf - p) / (nf * p)
            * bundle.i_base;
    let crit = ExpansionReport {
        term_id: TermId::Crit,
        leading: crit_leading,
        correction_coeff: -(x.lap_f0 / (2.0 * nf * x.f0) + x.scal0 / (6.0 * nf)) * bundle.ratio_c,
        correction_power: curv_power,
        quadrature_value: term_quadrature(TermId::Crit, spec, params)?,
        eta_used: params.eta,
    };

    // h-term: power (np − (n−p)(q+1))(1 − 1/p)/p, positive below the critical
    // exponent; the beta integral is I_P^{n(1−1/p)−1} with P = (n/p − 1)(q+1).
    let pert_power = (nf * p - (nf - p) * (q + 1.0)) * (1.0 - 1.0 / p) / p;
    let big_p = (nf / p - 1.0) * (q + 1.0);
    let pert_coeff = (p - 1.0) / p
        * bundle.bubble_c.powf(q + 1.0)
        * x.f0.powf((p - nf) * (q + 1.0) / (p * p))
        * bundle.omega
        * beta_integral(big_p, nf * (1.0 - 1.0 / p) - 1.0)?
        * x.h0;
    let pert = ExpansionReport {
        term_id: TermId::Pert,
        leading: 0.0,
        correction_coeff: pert_coeff,
        correction_power: pert_power,
        quadrature_value: term_quadrature(TermId::Pert, spec, params)?,
        eta_used: params.eta,
    };

    Ok(vec![grad, mass, crit, pert])
}

/// The curvature/mass/perturbation corrections to the dilation model, with
/// their signs resolved at the given η. `f_value` collects the a-term and the
/// curvature terms; `h_value` the reconstructed perturbation contribution
/// (the source display for the latter is typographically damaged; it is
/// reassembled from the structured bracket, which is also what its sign
/// analysis uses).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FhReport {
    pub t: f64,
    pub eta: f64,
    pub f_value: f64,
    pub h_value: f64,
    pub f_negative: bool,
    pub h_nonpositive: bool,
}

/// F(t) and H(t): the η-order corrections to I(tψ_η) past the dilation model.
pub fn f_h_terms(t: f64, spec: &ProblemSpec, params: &BubbleParams) -> Result<FhReport> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("dilation t = {t} must be nonnegative")));
    }
    let bundle = ConstantBundle::new(spec.n, spec.p)?;
    let nf = spec.n as f64;
    let p = spec.p;
    let q = spec.q;
    let x = &spec.x0;
    let eta = params.eta;
    let curv = eta.powf(2.0 * (1.0 - 1.0 / p));
    let x_lead = bundle.k_pow_minus_n * x.f0.powf(1.0 - nf / p);

    let bracket = -x.scal0 / (6.0 * nf) * curv
        + ((p - 1.0) / (nf - p)).powf(p) * x.a0 * (bundle.ratio_b / bundle.ratio_a)
            * eta.powf(p - 1.0)
        + t.powf(bundle.p_star - p)
            * (nf - p)
            / nf
            * (x.lap_f0 / (2.0 * nf * x.f0) + x.scal0 / (6.0 * nf))
            * (bundle.ratio_c / bundle.ratio_a)
            * curv;
    let f_value = t.powf(p) * bundle.ratio_a * x_lead * bracket;

    let pert_power = (nf * p - (nf - p) * (q + 1.0)) * (1.0 - 1.0 / p) / p;
    let big_p = (nf / p - 1.0) * (q + 1.0);
    let h_bracket =
        x.h0 - (x.lap_h0 / (2.0 * nf) + x.h0 * x.scal0 / (6.0 * nf)) * curv * e_constant(spec.n, p, q)?;
    let h_value = -(p / (q + 1.0))
        * t.powf(q + 1.0)
        * (p - 1.0)
        / p
        * bundle.bubble_c.powf(q + 1.0)
        * x.f0.powf((p - nf) * (q + 1.0) / (p * p))
        * bundle.omega
        * beta_integral(big_p, nf * (1.0 - 1.0 / p) - 1.0)?
        * eta.powf(pert_power)
        * h_bracket;

    Ok(FhReport {
        t,
        eta,
        f_value,
        h_value,
        f_negative: f_value < 0.0,
        h_nonpositive: h_value <= 0.0,
    })
}

/// Scan outcome: the maximising dilation, the sup of the assembled energy,
/// and the comparison against the per-bubble threshold (p/n)K^{−n}f0^{1−n/p}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupScanReport {
    pub t_star: f64,
    pub sup_value: f64,
    pub threshold: f64,
    pub below_threshold: bool,
}

/// A uniform grid of 512 points on [0, t_max] — the default coarse scan.
pub fn default_t_grid(t_max: f64) -> Vec<f64> {
    let m = 512;
    (0..m).map(|i| t_max * i as f64 / (m - 1) as f64).collect()
}

/// Golden-section maximisation of `g` on [lo, hi] down to width 1e-13·span,
/// tie-breaking toward the smallest t.
fn golden_refine<G: Fn(f64) -> f64>(g: &G, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let span = hi - lo;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    while hi - lo > 1e-13 * span.max(1.0) {
        // Strict comparison keeps ties moving left (smallest t wins).
        if g2 > g1 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + INV_PHI * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - INV_PHI * (hi - lo);
            g1 = g(x1);
        }
    }
    0.5 * (lo + hi)
}

fn scan<G: Fn(f64) -> f64>(g: &G, t_grid: &[f64]) -> Result<(f64, f64)> {
    if t_grid.len() < 2 {
        return Err(Error::Config("the dilation grid needs at least two points".into()));
    }
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &t) in t_grid.iter().enumerate() {
        let v = g(t);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let lo = if best == 0 { t_grid[0] } else { t_grid[best - 1] };
    let hi = if best + 1 == t_grid.len() {
        t_grid[best]
    } else {
        t_grid[best + 1]
    };
    let t_star = golden_refine(g, lo, hi);
    let sup = g(t_star).max(best_val);
    let t_star = if g(t_star) >= best_val { t_star } else { t_grid[best] };
    Ok((t_star, sup))
}

/// Sup over the dilation grid of the pure model φ(t) = t^p − (p/p*)t^{p*}
/// (maximised at t = 1 with value p/n), run through the same scan machinery
/// as the full energy.
pub fn sup_scan_model(n: u32, p: f64, t_grid: &[f64]) -> Result<(f64, f64)> {
    let p_star = crate::problem::critical_exponent(n, p)?;
    scan(&|t: f64| t.powf(p) - p / p_star * t.powf(p_star), t_grid)
}

/// Sup over dilations of the assembled expansion of I(tψ_η): the dilation
/// model φ(t)·K^{−n}f0^{1−n/p} plus the corrections F(t) + H(t), compared
/// against the per-bubble mountain-pass threshold.
pub fn sup_scan(spec: &ProblemSpec, params: &BubbleParams, t_grid: &[f64]) -> Result<SupScanReport> {
    let bundle = ConstantBundle::new(spec.n, spec.p)?;
    let nf = spec.n as f64;
    let p = spec.p;
    let x_lead = bundle.k_pow_minus_n * spec.x0.f0.powf(1.0 - nf / p);
    // Probe once so coefficient-level domain errors surface before the scan.
    f_h_terms(0.0, spec, params)?;
    let g = |t: f64| -> f64 {
        let model = (t.powf(p) - p / bundle.p_star * t.powf(bundle.p_star)) * x_lead;
        match f_h_terms(t, spec, params) {
            Ok(fh) => model + fh.f_value + fh.h_value,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let (t_star, sup_value) = scan(&g, t_grid)?;
    let threshold = p / nf * x_lead;
    Ok(SupScanReport {
        t_star,
        sup_value,
        threshold,
        below_threshold: sup_value < threshold,
    })
}
