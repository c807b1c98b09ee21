//! Run configuration: one JSON document per run, with CLI flags overriding
//! individual keys (flag > config > default; the manifest digest is taken
//! over the effective configuration after overrides).

use nodalmp_core::mesh::{
    build_mesh, disc_symmetry, interval_symmetry, torus_symmetry, DiscTau, DomainMesh, MeshKind,
    SymmetrySpec,
};
use nodalmp_core::problem::{FieldSpec, OrbitCard, ProblemSpec, X0Data};
use nodalmp_core::solver::MpControls;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::Failure;

/// Deformation-loop knobs, all optional in the document.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_path_points")]
    pub path_points: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol_grad")]
    pub tol_grad: f64,
}

fn default_path_points() -> usize {
    MpControls::default().path_points
}

fn default_max_iters() -> usize {
    MpControls::default().max_iters
}

fn default_tol_grad() -> f64 {
    MpControls::default().tol_grad
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            path_points: default_path_points(),
            max_iters: default_max_iters(),
            tol_grad: default_tol_grad(),
        }
    }
}

/// Which symmetry data to attach to the mesh. Defaults per domain: the
/// endpoint reflection on 1D domains, the x-axis reflection with trivial
/// rotation group on the disc, order-2 translations on the torus.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymmetryConfig {
    Interval,
    Disc {
        #[serde(default = "default_rotation_order")]
        rotation_order: usize,
        #[serde(default = "default_tau")]
        tau: DiscTau,
    },
    Torus {
        #[serde(default = "default_translation_order")]
        translation_order: usize,
    },
}

fn default_rotation_order() -> usize {
    1
}

fn default_tau() -> DiscTau {
    DiscTau::Reflection
}

fn default_translation_order() -> usize {
    2
}

/// The configuration document. Required keys: the exponents, the three
/// coefficient fields, and the domain. Everything else has defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    /// Subcritical defect; the solver uses the exponent p* − epsilon.
    pub epsilon: f64,
    pub a: FieldSpec,
    pub f: FieldSpec,
    pub h: FieldSpec,
    /// Pointwise data at the concentration point. Default: coefficient values
    /// at r = 0 with vanishing Laplacians and zero curvature (flat model).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<X0Data>,
    /// Extended-orbit cardinality of the concentration point (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_card: Option<OrbitCard>,
    pub domain: MeshKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Concentration parameters for the expansion command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    /// Bubble cutoff radius for the expansion command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// ε schedule for the continuation command (strictly decreasing).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
}

/// Flag-level overrides; `None` keeps the config value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub eta: Option<Vec<f64>>,
    pub schedule: Option<Vec<f64>>,
}

/// Parses the JSON document, reporting schema violations with a JSON-pointer
/// path to the offending key.
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig, Failure> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let pointer = dotted_to_pointer(&e.path().to_string());
        Failure::Config(format!(
            "{origin}: schema violation at {pointer}: {}",
            e.into_inner()
        ))
    })
}

fn dotted_to_pointer(dotted: &str) -> String {
    if dotted == "." {
        return "/".into();
    }
    let mut out = String::new();
    for seg in dotted.split('.') {
        out.push('/');
        out.push_str(seg);
    }
    out
}

/// A fully resolved run: effective config, validated problem, mesh, symmetry,
/// and solver controls.
pub struct Loaded {
    pub config: RunConfig,
    pub spec: ProblemSpec,
    pub mesh: DomainMesh,
    pub sym: SymmetrySpec,
    pub controls: MpControls,
    pub seed: u64,
    /// The effective configuration serialized for the digest and the
    /// `effective_config.json` artifact.
    pub effective_text: String,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Loaded, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut config = parse_config(&text, &path.display().to_string())?;

    if let Some(eps) = overrides.epsilon {
        config.epsilon = eps;
    }
    if let Some(seed) = overrides.seed {
        config.seed = Some(seed);
    }
    if let Some(eta) = &overrides.eta {
        config.eta = Some(eta.clone());
    }
    if let Some(schedule) = &overrides.schedule {
        config.schedule = Some(schedule.clone());
    }
    resolve(config)
}

/// Resolves defaults and builds the validated problem objects.
pub fn resolve(mut config: RunConfig) -> Result<Loaded, Failure> {
    if config.x0.is_none() {
        config.x0 = Some(default_x0(&config)?);
    }
    if config.orbit_card.is_none() {
        config.orbit_card = Some(OrbitCard::Finite(1));
    }

    let spec = ProblemSpec::new(
        config.n,
        config.p,
        config.q,
        config.epsilon,
        config.a.clone(),
        config.f.clone(),
        config.h.clone(),
        config.x0.expect("defaulted above"),
        config.orbit_card.expect("defaulted above"),
    )?;
    let mesh = build_mesh(config.domain)?;
    let sym = build_symmetry(&mesh, config.symmetry)?;
    let seed = config.seed.unwrap_or(0);
    let solver = config.solver.unwrap_or_default();
    let controls = MpControls {
        path_points: solver.path_points,
        max_iters: solver.max_iters,
        tol_grad: solver.tol_grad,
        seed,
    };
    let effective_text = crate::emit::to_json_string(&config)
        .map_err(|e| Failure::Io(format!("serializing effective config: {e}")))?;
    Ok(Loaded {
        config,
        spec,
        mesh,
        sym,
        controls,
        seed,
        effective_text,
    })
}

/// x0 from the coefficient fields at the centre: needs closed forms.
fn default_x0(config: &RunConfig) -> Result<X0Data, Failure> {
    for (field, name) in [(&config.a, "a"), (&config.f, "f"), (&config.h, "h")] {
        if !field.is_closed_form() {
            return Err(Failure::Config(format!(
                "x0 must be given explicitly when coefficient {name} is tabulated"
            )));
        }
    }
    Ok(X0Data::flat(
        config.a.eval_radial(0.0)?,
        config.f.eval_radial(0.0)?,
        config.h.eval_radial(0.0)?,
    ))
}

fn build_symmetry(
    mesh: &DomainMesh,
    sym: Option<SymmetryConfig>,
) -> Result<SymmetrySpec, Failure> {
    let sym = sym.unwrap_or(match mesh.kind {
        MeshKind::Interval { .. } | MeshKind::RadialBall { .. } => SymmetryConfig::Interval,
        MeshKind::Disc { .. } => SymmetryConfig::Disc {
            rotation_order: default_rotation_order(),
            tau: default_tau(),
        },
        MeshKind::FlatTorus { .. } => SymmetryConfig::Torus {
            translation_order: default_translation_order(),
        },
    });
    let built = match sym {
        SymmetryConfig::Interval => interval_symmetry(mesh)?,
        SymmetryConfig::Disc {
            rotation_order,
            tau,
        } => disc_symmetry(mesh, rotation_order, tau)?,
        SymmetryConfig::Torus { translation_order } => torus_symmetry(mesh, translation_order)?,
    };
    Ok(built)
}

/// Comma-separated float list for `--eta` and `--schedule`; an empty string
/// is an empty list (useful for header-only plot files).
pub fn parse_float_list(text: &str) -> Result<Vec<f64>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad float {s:?}: {e}"))
        })
        .collect()
}
