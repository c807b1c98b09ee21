//! Internal P1 element operators shared by the solver, the coercivity
//! estimator and the identity checker: constant per-element hat-function
//! gradients, the regularised p-Dirichlet energy with its exact differential,
//! and lumped nodal integrals for every zeroth-order term.

use crate::mesh::{DomainMesh, Elements};

/// One element with precomputed hat-function gradients. `grads[k]` pairs with
/// `nodes[k]`; only the first `nv` entries are meaningful.
pub(crate) struct Elem {
    pub nodes: [usize; 3],
    pub nv: usize,
    pub grads: [[f64; 2]; 3],
    pub measure: f64,
}

/// Precomputes per-element geometry. Gradients come from `elem_coords` (the
/// unwrapped copies on the torus), measures from the mesh, so ∫|∇u|^p over an
/// element is measure · |∇u|^p exactly for P1 fields.
pub(crate) fn build_elems(mesh: &DomainMesh) -> Vec<Elem> {
    match &mesh.elements {
        Elements::Segments(segs) => segs
            .iter()
            .enumerate()
            .map(|(e, s)| {
                let h = mesh.elem_coords[e][1][0] - mesh.elem_coords[e][0][0];
                Elem {
                    nodes: [s[0], s[1], 0],
                    nv: 2,
                    grads: [[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0, 0.0]],
                    measure: mesh.measures[e],
                }
            })
            .collect(),
        Elements::Triangles(tris) => tris
            .iter()
            .enumerate()
            .map(|(e, t)| {
                let c = &mesh.elem_coords[e];
                let d1 = [c[1][0] - c[0][0], c[1][1] - c[0][1]];
                let d2 = [c[2][0] - c[0][0], c[2][1] - c[0][1]];
                let det = d1[0] * d2[1] - d1[1] * d2[0];
                let g1 = [d2[1] / det, -d2[0] / det];
                let g2 = [-d1[1] / det, d1[0] / det];
                Elem {
                    nodes: *t,
                    nv: 3,
                    grads: [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2],
                    measure: mesh.measures[e],
                }
            })
            .collect(),
    }
}

pub(crate) fn elem_gradient(el: &Elem, u: &[f64]) -> [f64; 2] {
    let mut g = [0.0, 0.0];
    for k in 0..el.nv {
        let v = u[el.nodes[k]];
        g[0] += v * el.grads[k][0];
        g[1] += v * el.grads[k][1];
    }
    g
}

/// ∫|∇u|^p, exact per element for P1 fields.
pub(crate) fn grad_pow(elems: &[Elem], u: &[f64], p: f64) -> f64 {
    elems
        .iter()
        .map(|el| {
            let g = elem_gradient(el, u);
            el.measure * (g[0] * g[0] + g[1] * g[1]).powf(0.5 * p)
        })
        .sum()
}

/// Σ_e μ(e) φ_σ(∇u) with φ_σ(g) = ((|g|² + σ²)^{p/2} − σ^p)/p, the
/// regularised p-Dirichlet energy: smooth in u for σ > 0 (the p-Laplacian is
/// singular at critical points for p < 2), and exactly (1/p)∫|∇u|^p at σ = 0.
pub(crate) fn grad_energy(elems: &[Elem], u: &[f64], p: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let sp = if sigma == 0.0 { 0.0 } else { sigma.powf(p) };
    elems
        .iter()
        .map(|el| {
            let g = elem_gradient(el, u);
            let q = g[0] * g[0] + g[1] * g[1];
            el.measure * ((q + s2).powf(0.5 * p) - sp) / p
        })
        .sum()
}

/// `out[i] += scale · ∂/∂u_i grad_energy(u)` — the discrete weak form
/// ∫(|∇u|² + σ²)^{(p−2)/2} ∇u·∇φ_i, the exact differential of `grad_energy`.
pub(crate) fn add_grad_energy_diff(
    elems: &[Elem],
    u: &[f64],
    p: f64,
    sigma: f64,
    scale: f64,
    out: &mut [f64],
) {
    let s2 = sigma * sigma;
    for el in elems {
        let g = elem_gradient(el, u);
        let q = g[0] * g[0] + g[1] * g[1];
        if q + s2 == 0.0 {
            continue;
        }
        let w = el.measure * scale * (q + s2).powf(0.5 * p - 1.0);
        for k in 0..el.nv {
            out[el.nodes[k]] += w * (g[0] * el.grads[k][0] + g[1] * el.grads[k][1]);
        }
    }
}

/// Lumped ∫|u|^p = Σ_i w_i |u_i|^p.
pub(crate) fn node_norm_pow(weights: &[f64], u: &[f64], p: f64) -> f64 {
    weights
        .iter()
        .zip(u)
        .map(|(w, v)| w * v.abs().powf(p))
        .sum()
}

/// Lumped ∫ c·|u|^s = Σ_i w_i c_i |u_i|^s for a per-node coefficient c.
pub(crate) fn lumped_pow(weights: &[f64], coef: &[f64], u: &[f64], s: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..u.len() {
        acc += weights[i] * coef[i] * u[i].abs().powf(s);
    }
    acc
}

/// `out[i] += scale · ∂/∂u_i Σ w c |u|^s`, i.e. scale·s·w_i c_i |u_i|^{s−1} sgn(u_i).
pub(crate) fn add_lumped_pow_diff(
    weights: &[f64],
    coef: &[f64],
    u: &[f64],
    s: f64,
    scale: f64,
    out: &mut [f64],
) {
    for i in 0..u.len() {
        let v = u[i];
        if v != 0.0 {
            out[i] += scale * s * weights[i] * coef[i] * v.abs().powf(s - 1.0) * v.signum();
        }
    }
}

/// The Sobolev-type norm used throughout: ‖u‖_{1,p} = ‖∇u‖_p + ‖u‖_p.
pub(crate) fn norm_one_p(elems: &[Elem], weights: &[f64], u: &[f64], p: f64) -> f64 {
    grad_pow(elems, u, p).powf(1.0 / p) + node_norm_pow(weights, u, p).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, MeshKind};

    #[test]
    fn linear_field_gradients_are_exact() {
        let mesh = build_mesh(MeshKind::Disc {
            rings: 3,
            sectors: 8,
        })
        .unwrap();
        let u: Vec<f64> = mesh.coords.iter().map(|c| 2.0 * c[0] - 0.5 * c[1]).collect();
        let elems = build_elems(&mesh);
        for el in &elems {
            let g = elem_gradient(el, &u);
            assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] + 0.5).abs() < 1e-12);
        }
        // ∫|∇u|² = |∇u|² · area, and the crisscross mesh tiles the inscribed
        // polygon exactly.
        let area: f64 = mesh.total_measure();
        assert!((grad_pow(&elems, &u, 2.0) - 4.25 * area).abs() < 1e-12);
    }

    #[test]
    fn gradient_energy_differential_matches_finite_differences() {
        let mesh = build_mesh(MeshKind::Interval { nodes: 9 }).unwrap();
        let elems = build_elems(&mesh);
        let u: Vec<f64> = mesh.coords.iter().map(|c| (c[0] * 1.3).sin()).collect();
        for &p in &[1.5, 2.0, 3.0] {
            let sigma = 1e-8;
            let mut diff = vec![0.0; u.len()];
            add_grad_energy_diff(&elems, &u, p, sigma, 1.0, &mut diff);
            let h = 1e-6;
            for i in 0..u.len() {
                let mut up = u.clone();
                let mut um = u.clone();
                up[i] += h;
                um[i] -= h;
                let fd = (grad_energy(&elems, &up, p, sigma)
                    - grad_energy(&elems, &um, p, sigma))
                    / (2.0 * h);
                assert!(
                    (diff[i] - fd).abs() <= 1e-6 * (1.0 + fd.abs()),
                    "p = {p}, node {i}: {} vs {}",
                    diff[i],
                    fd
                );
            }
        }
    }

    #[test]
    fn lumped_terms_and_their_differential_agree() {
        let mesh = build_mesh(MeshKind::Interval { nodes: 17 }).unwrap();
        let w = &mesh.weights;
        let coef: Vec<f64> = mesh.coords.iter().map(|c| 1.0 + c[0] * c[0]).collect();
        let u: Vec<f64> = mesh.coords.iter().map(|c| c[0] * (1.0 - c[0])).collect();
        let s = 2.5;
        let mut diff = vec![0.0; u.len()];
        add_lumped_pow_diff(w, &coef, &u, s, 1.0, &mut diff);
        let h = 1e-7;
        for i in 0..u.len() {
            let mut up = u.clone();
            let mut um = u.clone();
            up[i] += h;
            um[i] -= h;
            let fd = (lumped_pow(w, &coef, &up, s) - lumped_pow(w, &coef, &um, s)) / (2.0 * h);
            assert!((diff[i] - fd).abs() <= 1e-5 * (1.0 + fd.abs()));
        }
    }
}
