//! P1 meshes and exact discrete symmetries.
//!
//! Four domain kinds are supported:
//!
//! * `Interval` — [-1, 1] with uniform nodes, Lebesgue weight;
//! * `RadialBall { dim }` — the same node layout on [-1, 1] but carrying the
//!   radial measure ω_{dim-1} |r|^{dim-1} dr of the unit ball in R^dim,
//!   doubled symmetrically through the origin so reflection r ↦ -r acts on it;
//! * `Disc` — the unit disc, triangulated ring-by-ring with quad-centroid
//!   (crisscross) splits so that sector rotations *and* the x-axis reflection
//!   are exact element-to-element automorphisms;
//! * `FlatTorus` — the unit square with periodic identifications, crisscross
//!   cells, no boundary.
//!
//! Symmetries are *node permutations*, never interpolation. Coordinates are
//! generated so that the mirror maps are bitwise exact, and element measures
//! are assigned per congruence class, which makes discrete integration commute
//! with the group action exactly — the projections below rely on that.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Mesh family plus its resolution parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshKind {
    /// [-1, 1], `nodes` equally spaced (odd, ≥ 3, so 0 is a node).
    Interval { nodes: usize },
    /// Doubled radial model of the unit ball in R^dim on [-1, 1]: measure
    /// ω_{dim-1} |r|^{dim-1} dr. `nodes` odd ≥ 3, `dim` ≥ 2.
    RadialBall { dim: u32, nodes: usize },
    /// Unit disc: `rings` concentric rings of `sectors` nodes plus quad
    /// centroids. `sectors` even ≥ 4.
    Disc { rings: usize, sectors: usize },
    /// Unit flat torus: `cells` × `cells` grid plus cell centroids, periodic.
    /// `cells` even ≥ 2.
    FlatTorus { cells: usize },
}

/// Element connectivity. 1D kinds use segments, 2D kinds triangles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Elements {
    Segments(Vec<[usize; 2]>),
    Triangles(Vec<[usize; 3]>),
}

impl Elements {
    pub fn len(&self) -> usize {
        match self {
            Elements::Segments(v) => v.len(),
            Elements::Triangles(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One boundary facet: a node in 1D (stored twice), an edge in 2D. `element`
/// is the unique adjacent element, used for one-sided normal derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFacet {
    pub nodes: [usize; 2],
    pub element: usize,
    /// Outward unit normal.
    pub normal: [f64; 2],
    /// Facet measure: 1 for interval endpoints, ω_{dim-1} for the ball rim,
    /// chord length for disc edges.
    pub measure: f64,
    pub midpoint: [f64; 2],
}

/// A P1 mesh with per-element integrated measures and lumped node weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMesh {
    pub kind: MeshKind,
    /// Node coordinates; 1D kinds use only the first component.
    pub coords: Vec<[f64; 2]>,
    pub elements: Elements,
    /// Per-element vertex coordinates as used for gradients and areas. Equal
    /// to the node coordinates except on the torus, where elements crossing
    /// the periodic seam store unwrapped copies.
    pub elem_coords: Vec<Vec<[f64; 2]>>,
    /// ∫_e dμ per element (includes the radial weight on the ball).
    pub measures: Vec<f64>,
    /// Lumped node quadrature weights: w_i = Σ_{e ∋ i} measure(e)/vertices(e).
    pub weights: Vec<f64>,
    /// Dirichlet flags: true on ∂M nodes.
    pub boundary: Vec<bool>,
    pub boundary_facets: Vec<BoundaryFacet>,
}

impl DomainMesh {
    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn is_one_dimensional(&self) -> bool {
        matches!(self.elements, Elements::Segments(_))
    }

    /// Geodesic distance between two nodes (min-image on the torus,
    /// Euclidean elsewhere — exact for these flat models).
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance_to_point(i, self.coords[j])
    }

    /// Distance from node `i` to an arbitrary point.
    pub fn distance_to_point(&self, i: usize, p: [f64; 2]) -> f64 {
        let a = self.coords[i];
        let mut dx = a[0] - p[0];
        let mut dy = a[1] - p[1];
        if matches!(self.kind, MeshKind::FlatTorus { .. }) {
            dx -= dx.round();
            dy -= dy.round();
        }
        (dx * dx + dy * dy).sqrt()
    }

    /// Total measure of the domain.
    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    pub fn has_boundary(&self) -> bool {
        !self.boundary_facets.is_empty()
    }
}

/// Discrete symmetry data: a finite group given by generator permutations and
/// an involutive antisymmetry permutation, plus the optional domain splitting
/// used by the nodal rebuild.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetrySpec {
    /// Generator permutations; the group they generate is used everywhere.
    /// May be empty (trivial group).
    pub generators: Vec<Vec<usize>>,
    /// Involutive permutation τ with τ∘τ = id.
    pub tau: Vec<usize>,
    /// Nodes fixed by τ (computed at construction).
    pub fixed: Vec<usize>,
    /// Optional splitting of the node set into two τ-swapped halves.
    pub split: Option<SplitSets>,
}

/// Node-index sets Ω1, Ω2 with τ(Ω1) = Ω2 and Ω1 ∪ Ω2 ∪ F = all nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSets {
    pub omega1: Vec<usize>,
    pub omega2: Vec<usize>,
}

impl SymmetrySpec {
    /// Builds and validates a symmetry from raw permutations.
    pub fn new(
        generators: Vec<Vec<usize>>,
        tau: Vec<usize>,
        split: Option<SplitSets>,
    ) -> Result<Self> {
        let n = tau.len();
        for (gi, g) in generators.iter().enumerate() {
            check_permutation(g, n, &format!("generator {gi}"))?;
        }
        check_permutation(&tau, n, "tau")?;
        for (i, &ti) in tau.iter().enumerate() {
            if tau[ti] != i {
                return Err(Error::Symmetry(format!(
                    "tau is not involutive: tau(tau({i})) = {} != {i}",
                    tau[ti]
                )));
            }
        }
        let fixed: Vec<usize> = (0..n).filter(|&i| tau[i] == i).collect();
        let spec = SymmetrySpec { generators, tau, fixed, split };
        if spec.fixed.len() == n {
            return Err(Error::Symmetry(
                "tau is the identity: the antisymmetric space is {0}".into(),
            ));
        }
        if spec.tau_in_group() {
            return Err(Error::Symmetry(
                "tau lies in the symmetry group: invariant antisymmetric space is {0}".into(),
            ));
        }
        Ok(spec)
    }

    pub fn num_nodes(&self) -> usize {
        self.tau.len()
    }

    /// Orbit of `node` under the generated group, ascending.
    pub fn orbit(&self, node: usize) -> Vec<usize> {
        self.orbit_with(node, false)
    }

    /// Orbit cardinality under the group extended by τ.
    pub fn orbit_card_extended(&self, node: usize) -> usize {
        self.orbit_with(node, true).len()
    }

    fn orbit_with(&self, node: usize, include_tau: bool) -> Vec<usize> {
        let mut seen = vec![false; self.num_nodes()];
        let mut stack = vec![node];
        let mut out = Vec::new();
        seen[node] = true;
        while let Some(i) = stack.pop() {
            out.push(i);
            for g in &self.generators {
                if !seen[g[i]] {
                    seen[g[i]] = true;
                    stack.push(g[i]);
                }
            }
            if include_tau && !seen[self.tau[i]] {
                seen[self.tau[i]] = true;
                stack.push(self.tau[i]);
            }
        }
        out.sort_unstable();
        out
    }

    /// Partition of all nodes into group orbits (each ascending).
    pub fn orbit_partition(&self) -> Vec<Vec<usize>> {
        let n = self.num_nodes();
        let mut assigned = vec![false; n];
        let mut orbits = Vec::new();
        for i in 0..n {
            if !assigned[i] {
                let orb = self.orbit(i);
                for &j in &orb {
                    assigned[j] = true;
                }
                orbits.push(orb);
            }
        }
        orbits
    }

    fn tau_in_group(&self) -> bool {
        // τ ∈ ⟨generators⟩ iff τ agrees with some group element; test by
        // checking whether the permutation τ is reachable as a word. Cheap
        // BFS over the group acting on the full index tuple.
        if self.generators.is_empty() {
            return false;
        }
        let n = self.num_nodes();
        let id: Vec<usize> = (0..n).collect();
        let mut frontier = vec![id.clone()];
        let mut seen = std::collections::BTreeSet::new();
        seen.insert(id);
        while let Some(w) = frontier.pop() {
            if w == self.tau {
                return true;
            }
            for g in &self.generators {
                let next: Vec<usize> = (0..n).map(|i| g[w[i]]).collect();
                if seen.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
        false
    }
}

fn check_permutation(perm: &[usize], n: usize, what: &str) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Symmetry(format!(
            "{what} has length {} but the mesh has {n} nodes",
            perm.len()
        )));
    }
    let mut hit = vec![false; n];
    for &t in perm {
        if t >= n || hit[t] {
            return Err(Error::Symmetry(format!("{what} is not a permutation")));
        }
        hit[t] = true;
    }
    Ok(())
}

/// Checks the weak commutation τ(O_G(x)) = O_G(τ(x)) for every node, as exact
/// set equality of orbits. The error names a witness node on failure.
pub fn verify_weak_commute(sym: &SymmetrySpec) -> Result<()> {
    for x in 0..sym.num_nodes() {
        let mut tau_orbit: Vec<usize> = sym.orbit(x).iter().map(|&i| sym.tau[i]).collect();
        tau_orbit.sort_unstable();
        let orbit_tau = sym.orbit(sym.tau[x]);
        if tau_orbit != orbit_tau {
            return Err(Error::Symmetry(format!(
                "weak commutation fails at node {x}: tau(orbit({x})) = {tau_orbit:?} \
                 but orbit(tau({x})) = {orbit_tau:?}"
            )));
        }
    }
    Ok(())
}

/// Replaces `field` by its group average. Values are computed once per orbit
/// and the identical f64 is written to every orbit member, so invariance is
/// bitwise and the projection is exactly idempotent.
pub fn project_g(sym: &SymmetrySpec, field: &mut [f64]) {
    for orbit in sym.orbit_partition() {
        let first = field[orbit[0]];
        if orbit.iter().all(|&i| field[i] == first) {
            continue; // already invariant; keep bitwise idempotence
        }
        let mean = orbit.iter().map(|&i| field[i]).sum::<f64>() / orbit.len() as f64;
        for &i in &orbit {
            field[i] = mean;
        }
    }
}

/// Replaces `field` by its τ-antisymmetric part (u - u∘τ)/2. Each τ-pair gets
/// exactly opposite values; fixed nodes go to exactly 0.
pub fn antisymmetrize_tau(sym: &SymmetrySpec, field: &mut [f64]) {
    for i in 0..field.len() {
        let j = sym.tau[i];
        if j == i {
            field[i] = 0.0;
        } else if i < j {
            let w = 0.5 * (field[i] - field[j]);
            field[i] = w;
            field[j] = -w;
        }
    }
}

/// Projection onto the constrained space H: group average then antisymmetric
/// part. Under weak commutation the composition stays in both subspaces and
/// is idempotent.
pub fn project_to_h(sym: &SymmetrySpec, field: &mut [f64]) {
    project_g(sym, field);
    antisymmetrize_tau(sym, field);
}

/// Validates a provided splitting against the mesh and symmetry:
/// Ω1, Ω2 disjoint, τ(Ω1) = Ω2, Ω1 ∪ Ω2 ∪ F covers every node, every group
/// generator preserves each Ωi, and no element straddles the two sides (F sits
/// on element boundaries, so it carries no interior quadrature mass).
pub fn split_check(mesh: &DomainMesh, sym: &SymmetrySpec) -> Result<()> {
    let split = sym
        .split
        .as_ref()
        .ok_or_else(|| Error::Symmetry("no splitting provided".into()))?;
    let n = mesh.num_nodes();
    // side: 0 unassigned, 1 = Ω1, 2 = Ω2, 3 = F
    let mut side = vec![0u8; n];
    for &i in &split.omega1 {
        side[i] = 1;
    }
    for &i in &split.omega2 {
        if side[i] != 0 {
            return Err(Error::Symmetry(format!("node {i} lies in both Ω1 and Ω2")));
        }
        side[i] = 2;
    }
    for &i in &sym.fixed {
        if side[i] != 0 {
            return Err(Error::Symmetry(format!("fixed node {i} also listed in a split set")));
        }
        side[i] = 3;
    }
    if let Some(i) = (0..n).find(|&i| side[i] == 0) {
        return Err(Error::Symmetry(format!("node {i} is in neither Ω1, Ω2 nor F")));
    }
    for &i in &split.omega1 {
        if side[sym.tau[i]] != 2 {
            return Err(Error::Symmetry(format!(
                "tau does not map Ω1 onto Ω2: tau({i}) = {} is not in Ω2",
                sym.tau[i]
            )));
        }
    }
    for (gi, g) in sym.generators.iter().enumerate() {
        for i in 0..n {
            if matches!(side[i], 1 | 2) && side[g[i]] != side[i] {
                return Err(Error::Symmetry(format!(
                    "generator {gi} moves node {i} across the splitting"
                )));
            }
        }
    }
    let element_sides = |vs: &[usize]| -> Result<()> {
        let has1 = vs.iter().any(|&v| side[v] == 1);
        let has2 = vs.iter().any(|&v| side[v] == 2);
        if has1 && has2 {
            return Err(Error::Symmetry(format!("element {vs:?} straddles Ω1 and Ω2")));
        }
        if vs.iter().all(|&v| side[v] == 3) {
            return Err(Error::Symmetry(format!("element {vs:?} lies entirely inside F")));
        }
        Ok(())
    };
    match &mesh.elements {
        Elements::Segments(segs) => {
            for s in segs {
                element_sides(s)?;
            }
        }
        Elements::Triangles(tris) => {
            for t in tris {
                element_sides(t)?;
            }
        }
    }
    Ok(())
}

/// Builds a mesh of the requested kind.
pub fn build_mesh(kind: MeshKind) -> Result<DomainMesh> {
    match kind {
        MeshKind::Interval { nodes } => build_line(kind, nodes, None),
        MeshKind::RadialBall { dim, nodes } => {
            if dim < 2 {
                return Err(Error::Mesh(format!(
                    "radial ball wants dim >= 2 (got {dim}); use the interval for dim 1"
                )));
            }
            build_line(kind, nodes, Some(dim))
        }
        MeshKind::Disc { rings, sectors } => build_disc(kind, rings, sectors),
        MeshKind::FlatTorus { cells } => build_torus(kind, cells),
    }
}

/// Interval and doubled radial ball share the node layout: x_j = j·h around 0,
/// generated from the integer offset so mirror nodes are exact negations.
fn build_line(kind: MeshKind, nodes: usize, ball_dim: Option<u32>) -> Result<DomainMesh> {
    if nodes < 3 || nodes.is_multiple_of(2) {
        return Err(Error::Mesh(format!("1D meshes want an odd node count >= 3, got {nodes}")));
    }
    let half = (nodes - 1) / 2;
    let h = 1.0 / half as f64;
    let coords: Vec<[f64; 2]> =
        (0..nodes).map(|i| [(i as i64 - half as i64) as f64 * h, 0.0]).collect();
    let segs: Vec<[usize; 2]> = (0..nodes - 1).map(|i| [i, i + 1]).collect();
    let omega = match ball_dim {
        None => 1.0,
        Some(d) => crate::constants::sphere_area(d)?,
    };
    // ∫_e w dr with w = 1 or ω |r|^{d-1}; the signed-power form is exact and
    // bitwise mirror-symmetric.
    let seg_measure = |a: f64, b: f64| -> f64 {
        match ball_dim {
            None => b - a,
            Some(d) => {
                let d = d as f64;
                let pow = |r: f64| r.signum() * r.abs().powi(d as i32) / d;
                omega * (pow(b) - pow(a))
            }
        }
    };
    let measures: Vec<f64> = segs.iter().map(|s| seg_measure(coords[s[0]][0], coords[s[1]][0])).collect();
    let elem_coords: Vec<Vec<[f64; 2]>> =
        segs.iter().map(|s| vec![coords[s[0]], coords[s[1]]]).collect();
    let weights = lump_weights(nodes, segs.iter().map(|s| (s.as_slice(), 0usize)), &measures);
    let mut boundary = vec![false; nodes];
    boundary[0] = true;
    boundary[nodes - 1] = true;
    let facet_measure = omega; // |r| = 1 at both rim nodes
    let boundary_facets = vec![
        BoundaryFacet {
            nodes: [0, 0],
            element: 0,
            normal: [-1.0, 0.0],
            measure: facet_measure,
            midpoint: coords[0],
        },
        BoundaryFacet {
            nodes: [nodes - 1, nodes - 1],
            element: segs.len() - 1,
            normal: [1.0, 0.0],
            measure: facet_measure,
            midpoint: coords[nodes - 1],
        },
    ];
    Ok(DomainMesh {
        kind,
        coords,
        elements: Elements::Segments(segs),
        elem_coords,
        measures,
        weights,
        boundary,
        boundary_facets,
    })
}

fn tri_area(p: [[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]))
        .abs()
}

/// Disc: center node, `rings` rings of `sectors` nodes, quad centroids between
/// consecutive rings, crisscross triangulation. Ring angles are generated on
/// the upper half and mirrored so the reflection i ↔ (sectors - i) mod sectors
/// is bitwise exact on coordinates.
fn build_disc(kind: MeshKind, rings: usize, sectors: usize) -> Result<DomainMesh> {
    if rings < 1 || sectors < 4 || !sectors.is_multiple_of(2) {
        return Err(Error::Mesh(format!(
            "disc wants rings >= 1 and even sectors >= 4, got rings {rings}, sectors {sectors}"
        )));
    }
    let m = sectors;
    let ring_start = |j: usize| 1 + (j - 1) * m; // ring j ∈ 1..=rings
    let cent_start = |j: usize| 1 + rings * m + (j - 1) * m; // annulus j ∈ 1..rings
    let n_nodes = 1 + rings * m + (rings - 1) * m;

    let mut coords = vec![[0.0f64; 2]; n_nodes];
    for j in 1..=rings {
        let r = j as f64 / rings as f64;
        for i in 0..=m / 2 {
            let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            coords[ring_start(j) + i] = [r * th.cos(), r * th.sin()];
        }
        for i in m / 2 + 1..m {
            let src = coords[ring_start(j) + (m - i)];
            coords[ring_start(j) + i] = [src[0], -src[1]];
        }
    }
    // Centroid of quad (a_i, a_{i+1}, b_i, b_{i+1}); mirror-assign the lower
    // half so reflection (centroid i ↔ m-1-i) is bitwise exact.
    for j in 1..rings {
        let (a, b) = (ring_start(j), ring_start(j + 1));
        for i in 0..m / 2 {
            let ip = (i + 1) % m;
            let c = [
                0.25 * (coords[a + i][0] + coords[a + ip][0] + coords[b + i][0] + coords[b + ip][0]),
                0.25 * (coords[a + i][1] + coords[a + ip][1] + coords[b + i][1] + coords[b + ip][1]),
            ];
            coords[cent_start(j) + i] = c;
        }
        for i in m / 2..m {
            let src = coords[cent_start(j) + (m - 1 - i)];
            coords[cent_start(j) + i] = [src[0], -src[1]];
        }
    }

    let mut tris: Vec<[usize; 3]> = Vec::new();
    // Center fan.
    for i in 0..m {
        tris.push([0, ring_start(1) + i, ring_start(1) + (i + 1) % m]);
    }
    // Crisscross annuli: classes (a a c), (a b c), (b b c), (b a c).
    for j in 1..rings {
        let (a, b, c) = (ring_start(j), ring_start(j + 1), cent_start(j));
        for i in 0..m {
            let ip = (i + 1) % m;
            tris.push([a + i, a + ip, c + i]);
            tris.push([a + ip, b + ip, c + i]);
            tris.push([b + ip, b + i, c + i]);
            tris.push([b + i, a + i, c + i]);
        }
    }

    // Congruence classes: all fan triangles share one area; within an annulus
    // each of the four crisscross classes shares one area. Assigning the
    // class-representative value keeps discrete integration exactly
    // symmetric under the dihedral action.
    let get = |i: usize| coords[i];
    let mut measures = vec![0.0f64; tris.len()];
    let fan_area = tri_area([get(tris[0][0]), get(tris[0][1]), get(tris[0][2])]);
    for t in measures.iter_mut().take(m) {
        *t = fan_area;
    }
    for j in 1..rings {
        let base = m + (j - 1) * 4 * m;
        for class in 0..4 {
            let rep = tris[base + class];
            let area = tri_area([get(rep[0]), get(rep[1]), get(rep[2])]);
            for i in 0..m {
                measures[base + 4 * i + class] = area;
            }
        }
    }

    let elem_coords: Vec<Vec<[f64; 2]>> =
        tris.iter().map(|t| vec![get(t[0]), get(t[1]), get(t[2])]).collect();
    let weights = lump_weights(n_nodes, tris.iter().map(|t| (t.as_slice(), 0usize)), &measures);

    let mut boundary = vec![false; n_nodes];
    let outer = ring_start(rings);
    for i in 0..m {
        boundary[outer + i] = true;
    }
    let mut boundary_facets = Vec::with_capacity(m);
    for i in 0..m {
        let ip = (i + 1) % m;
        let (p1, p2) = (coords[outer + i], coords[outer + ip]);
        let mid = [0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])];
        let (ex, ey) = (p2[0] - p1[0], p2[1] - p1[1]);
        let len = (ex * ex + ey * ey).sqrt();
        let mut nrm = [ey / len, -ex / len];
        if nrm[0] * mid[0] + nrm[1] * mid[1] < 0.0 {
            nrm = [-nrm[0], -nrm[1]];
        }
        // The unique triangle owning edge (outer+i, outer+ip): the fan when
        // rings = 1, else the (b b c) class of the outermost annulus at i.
        let element = if rings == 1 { i } else { m + (rings - 2) * 4 * m + 4 * i + 2 };
        boundary_facets.push(BoundaryFacet {
            nodes: [outer + i, outer + ip],
            element,
            normal: nrm,
            measure: len,
            midpoint: mid,
        });
    }

    Ok(DomainMesh {
        kind,
        coords,
        elements: Elements::Triangles(tris),
        elem_coords,
        measures,
        weights,
        boundary,
        boundary_facets,
    })
}

/// Flat torus: m×m grid nodes plus cell centroids, 4 triangles per cell, all
/// congruent with area 1/(4m²). Elements along the seam store unwrapped
/// vertex coordinates.
fn build_torus(kind: MeshKind, cells: usize) -> Result<DomainMesh> {
    if cells < 2 || !cells.is_multiple_of(2) {
        return Err(Error::Mesh(format!("torus wants an even cell count >= 2, got {cells}")));
    }
    let m = cells;
    let grid = |i: usize, j: usize| (j % m) * m + (i % m);
    let cent = |i: usize, j: usize| m * m + j * m + i;
    let n_nodes = 2 * m * m;
    let mut coords = vec![[0.0f64; 2]; n_nodes];
    for j in 0..m {
        for i in 0..m {
            coords[grid(i, j)] = [i as f64 / m as f64, j as f64 / m as f64];
            coords[cent(i, j)] = [(i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64];
        }
    }
    let mut tris: Vec<[usize; 3]> = Vec::with_capacity(4 * m * m);
    let mut elem_coords: Vec<Vec<[f64; 2]>> = Vec::with_capacity(4 * m * m);
    for j in 0..m {
        for i in 0..m {
            let c = cent(i, j);
            let quad = [grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1)];
            // Unwrapped corner coordinates of cell (i, j).
            let qc = [
                [i as f64 / m as f64, j as f64 / m as f64],
                [(i + 1) as f64 / m as f64, j as f64 / m as f64],
                [(i + 1) as f64 / m as f64, (j + 1) as f64 / m as f64],
                [i as f64 / m as f64, (j + 1) as f64 / m as f64],
            ];
            for k in 0..4 {
                let kp = (k + 1) % 4;
                tris.push([quad[k], quad[kp], c]);
                elem_coords.push(vec![qc[k], qc[kp], coords[c]]);
            }
        }
    }
    let area = 1.0 / (4.0 * (m * m) as f64);
    let measures = vec![area; tris.len()];
    let weights = lump_weights(n_nodes, tris.iter().map(|t| (t.as_slice(), 0usize)), &measures);
    Ok(DomainMesh {
        kind,
        coords,
        elements: Elements::Triangles(tris),
        elem_coords,
        measures,
        weights,
        boundary: vec![false; n_nodes],
        boundary_facets: Vec::new(),
    })
}

/// Lumped weights w_i = Σ_{e ∋ i} measure(e)/k. Contributions are sorted
/// before summation so nodes with congruent element stars get bitwise equal
/// weights regardless of element ordering.
fn lump_weights<'a>(
    n_nodes: usize,
    elems: impl Iterator<Item = (&'a [usize], usize)>,
    measures: &[f64],
) -> Vec<f64> {
    let mut contrib: Vec<Vec<f64>> = vec![Vec::new(); n_nodes];
    for (e, (vs, _)) in elems.enumerate() {
        let share = measures[e] / vs.len() as f64;
        for &v in vs {
            contrib[v].push(share);
        }
    }
    contrib
        .into_iter()
        .map(|mut c| {
            c.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            c.iter().sum()
        })
        .collect()
}

/// Reflection symmetry of the 1D kinds: trivial group, τ: x ↦ -x,
/// Ω1 = {x > 0}, Ω2 = {x < 0}, F = {0}.
pub fn interval_symmetry(mesh: &DomainMesh) -> Result<SymmetrySpec> {
    let nodes = match mesh.kind {
        MeshKind::Interval { nodes } | MeshKind::RadialBall { nodes, .. } => nodes,
        _ => return Err(Error::Symmetry("interval_symmetry wants a 1D mesh".into())),
    };
    let tau: Vec<usize> = (0..nodes).rev().collect();
    let mid = (nodes - 1) / 2;
    let split = SplitSets {
        omega1: (mid + 1..nodes).collect(),
        omega2: (0..mid).collect(),
    };
    SymmetrySpec::new(Vec::new(), tau, Some(split))
}

/// Antisymmetry map for the disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscTau {
    /// Reflection across the x-axis. Splits the disc into half-discs when the
    /// rotation group is trivial.
    Reflection,
    /// Rotation by π (needs even sectors/2·order compatibility). Commutes
    /// strongly with all rotations; admits no node-set splitting.
    Antipodal,
}

/// Symmetry of the disc: G = rotations by `sectors/rotation_order` steps
/// (`rotation_order` divides `sectors`; 1 means trivial), τ as requested.
pub fn disc_symmetry(mesh: &DomainMesh, rotation_order: usize, tau_kind: DiscTau) -> Result<SymmetrySpec> {
    let (rings, m) = match mesh.kind {
        MeshKind::Disc { rings, sectors } => (rings, sectors),
        _ => return Err(Error::Symmetry("disc_symmetry wants a disc mesh".into())),
    };
    if rotation_order == 0 || m % rotation_order != 0 {
        return Err(Error::Symmetry(format!(
            "rotation order {rotation_order} must divide the sector count {m}"
        )));
    }
    let n = mesh.num_nodes();
    let ring_start = |j: usize| 1 + (j - 1) * m;
    let cent_start = |j: usize| 1 + rings * m + (j - 1) * m;
    // Rotation by `step` sectors as a permutation: rings shift by step,
    // centroids (annulus quads) shift by step.
    let rotate = |step: usize| -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for j in 1..=rings {
            for i in 0..m {
                p[ring_start(j) + i] = ring_start(j) + (i + step) % m;
            }
        }
        for j in 1..rings {
            for i in 0..m {
                p[cent_start(j) + i] = cent_start(j) + (i + step) % m;
            }
        }
        p
    };
    let generators = if rotation_order > 1 { vec![rotate(m / rotation_order)] } else { Vec::new() };
    let (tau, split) = match tau_kind {
        DiscTau::Reflection => {
            let mut t: Vec<usize> = (0..n).collect();
            for j in 1..=rings {
                for i in 0..m {
                    t[ring_start(j) + i] = ring_start(j) + (m - i) % m;
                }
            }
            for j in 1..rings {
                for i in 0..m {
                    t[cent_start(j) + i] = cent_start(j) + (m - 1 - i);
                }
            }
            // Half-disc split is only G-stable for the trivial group.
            let split = if rotation_order == 1 {
                let mut o1 = Vec::new();
                let mut o2 = Vec::new();
                for j in 1..=rings {
                    for i in 1..m / 2 {
                        o1.push(ring_start(j) + i);
                    }
                    for i in m / 2 + 1..m {
                        o2.push(ring_start(j) + i);
                    }
                }
                for j in 1..rings {
                    for i in 0..m / 2 {
                        o1.push(cent_start(j) + i);
                    }
                    for i in m / 2..m {
                        o2.push(cent_start(j) + i);
                    }
                }
                Some(SplitSets { omega1: o1, omega2: o2 })
            } else {
                None
            };
            (t, split)
        }
        DiscTau::Antipodal => (rotate(m / 2), None),
    };
    SymmetrySpec::new(generators, tau, split)
}

/// Symmetry of the flat torus: G = x-translations by `cells/translation_order`
/// (must divide; 1 means trivial), τ = reflection y ↦ -y. The horizontal
/// strips 0 < y < 1/2 and 1/2 < y < 1 split the torus and are stable under
/// every x-translation.
pub fn torus_symmetry(mesh: &DomainMesh, translation_order: usize) -> Result<SymmetrySpec> {
    let m = match mesh.kind {
        MeshKind::FlatTorus { cells } => cells,
        _ => return Err(Error::Symmetry("torus_symmetry wants a torus mesh".into())),
    };
    if translation_order == 0 || m % translation_order != 0 {
        return Err(Error::Symmetry(format!(
            "translation order {translation_order} must divide the cell count {m}"
        )));
    }
    let n = mesh.num_nodes();
    let grid = |i: usize, j: usize| (j % m) * m + (i % m);
    let cent = |i: usize, j: usize| m * m + j * m + i;
    let translate = |step: usize| -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for j in 0..m {
            for i in 0..m {
                p[grid(i, j)] = grid(i + step, j);
                p[cent(i, j)] = cent((i + step) % m, j);
            }
        }
        p
    };
    let generators =
        if translation_order > 1 { vec![translate(m / translation_order)] } else { Vec::new() };
    let mut tau: Vec<usize> = (0..n).collect();
    for j in 0..m {
        for i in 0..m {
            tau[grid(i, j)] = grid(i, (m - j) % m);
            tau[cent(i, j)] = cent(i, m - 1 - j);
        }
    }
    let mut o1 = Vec::new();
    let mut o2 = Vec::new();
    for j in 1..m / 2 {
        for i in 0..m {
            o1.push(grid(i, j));
        }
    }
    for j in m / 2 + 1..m {
        for i in 0..m {
            o2.push(grid(i, j));
        }
    }
    for i in 0..m {
        for j in 0..m / 2 {
            o1.push(cent(i, j));
        }
        for j in m / 2..m {
            o2.push(cent(i, j));
        }
    }
    SymmetrySpec::new(generators, tau, Some(SplitSets { omega1: o1, omega2: o2 }))
}
