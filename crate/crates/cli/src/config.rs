use parlab::geometry::{
    build_annulus_mesh, build_disk_mesh, build_halfdisk_mesh, build_model, load_mesh, tower_radii, ConformalFamily, InnerCondition,
    MeshManifold, ModelManifold, WarpKind,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Error in the configuration or its inputs; maps to exit code 3.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

macro_rules! config_err {
    ($($t:tt)*) => { ConfigError(format!($($t)*)) };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exhaustion {
    pub base: f64,
    pub ratio: f64,
    pub count: usize,
}

impl FromStr for Exhaustion {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(config_err!("exhaustion '{s}' must be base,ratio,count"));
        }
        let num = |p: &str| p.parse::<f64>().map_err(|_| config_err!("exhaustion field '{p}' is not a number"));
        let count = parts[2].parse::<usize>().map_err(|_| config_err!("exhaustion count '{}' is not an integer", parts[2]))?;
        Ok(Exhaustion { base: num(parts[0])?, ratio: num(parts[1])?, count })
    }
}

/// Effective configuration of one run. Every field has a default so a
/// config file may name only what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    /// Mesh file (JSON) for `capacity`.
    pub mesh: Option<PathBuf>,
    /// Generator spec, e.g. `annulus:a=1,b=2,h=0.03`.
    pub gen: Option<String>,
    /// Plate: a boundary marker, or `radius:R` for the vertices with `|x| <= R`.
    pub plate: String,
    pub outer: String,
    pub tol: f64,
    pub exhaustion: Option<Exhaustion>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub method: String,
    pub theorem: Option<String>,
    pub model: String,
    pub model_params: Vec<f64>,
    pub dim: usize,
    pub sector: f64,
    pub n_theta: usize,
    /// Walks per member for `--method walk`. The flat tower's last escape
    /// estimates sit near the decay threshold, so a Parabolic verdict there
    /// takes about 4e4 trials; fewer gives Inconclusive.
    pub trials: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            mesh: None,
            gen: None,
            plate: "inner".into(),
            outer: "outer".into(),
            tol: 1e-10,
            exhaustion: None,
            seed: None,
            out: PathBuf::from("out"),
            method: "all".into(),
            theorem: None,
            model: "euclidean".into(),
            model_params: Vec::new(),
            dim: 2,
            sector: 1.0,
            n_theta: 32,
            trials: 10_000,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| config_err!("cannot read config {}: {e}", p.display()))?;
                serde_json::from_str(&text).map_err(|e| config_err!("config {}: {e}", p.display()))
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(config_err!("tol must be positive, got {}", self.tol));
        }
        if let Some(e) = self.exhaustion {
            if e.count < 1 {
                return Err(config_err!("exhaustion count must be at least 1"));
            }
            if !(e.base > 0.0 && e.ratio > 1.0 && e.base.is_finite() && e.ratio.is_finite()) {
                return Err(config_err!("exhaustion needs base > 0 and ratio > 1"));
            }
        }
        if self.mesh.is_some() && self.gen.is_some() {
            return Err(config_err!("give either a mesh path or a generator spec, not both"));
        }
        if !(self.sector > 0.0 && self.sector <= 1.0) {
            return Err(config_err!("sector must lie in (0, 1]"));
        }
        if self.n_theta < 4 {
            return Err(config_err!("n_theta must be at least 4"));
        }
        Ok(())
    }

    pub fn require_seed(&self, what: &str) -> Result<u64, ConfigError> {
        self.seed.ok_or_else(|| config_err!("{what} is stochastic and needs --seed"))
    }

    pub fn build_mesh(&self) -> Result<MeshManifold, ConfigError> {
        match (&self.mesh, &self.gen) {
            (Some(path), None) => load_mesh(path).map_err(|e| config_err!("mesh {}: {e}", path.display())),
            (None, Some(spec)) => generate(spec),
            _ => Err(config_err!("capacity needs --mesh PATH or --gen SPEC")),
        }
    }

    /// Plate vertices on `mesh`.
    pub fn plate_vertices(&self, mesh: &MeshManifold) -> Result<Vec<usize>, ConfigError> {
        if let Some(r) = self.plate.strip_prefix("radius:") {
            let r: f64 = r.parse().map_err(|_| config_err!("plate radius '{r}' is not a number"))?;
            let k: Vec<usize> = (0..mesh.n_vertices())
                .filter(|&v| {
                    let p = mesh.vertex(v);
                    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() <= r
                })
                .collect();
            if k.is_empty() {
                return Err(config_err!("no vertex within plate radius {r}"));
            }
            Ok(k)
        } else if mesh.has_marker(&self.plate) {
            Ok(mesh.vertices_with_marker(&self.plate))
        } else {
            Err(config_err!("mesh has no boundary marker '{}'", self.plate))
        }
    }

    pub fn model(&self) -> Result<ModelManifold, ConfigError> {
        let kind = WarpKind::from_str(&self.model).map_err(|e| config_err!("{e}"))?;
        build_model(kind, &self.model_params, self.dim, self.sector).map_err(|e| config_err!("{e}"))
    }

    /// Exhaustion family of the configured model: explicit radii from the
    /// exhaustion spec, otherwise the stock tower of the model kind.
    pub fn family(&self, inner: InnerCondition) -> Result<ConformalFamily, ConfigError> {
        let model = self.model()?;
        let (base, radii) = match self.exhaustion {
            Some(e) => (e.base, (1..=e.count).map(|j| e.base * e.ratio.powi(j as i32)).collect::<Vec<_>>()),
            None => (1.0, default_radii(&model)),
        };
        let label = format!("{} model", self.model.to_ascii_lowercase());
        ConformalFamily::new(&label, model, base, radii, self.n_theta, inner).map_err(|e| config_err!("family: {e}"))
    }
}

fn default_radii(model: &ModelManifold) -> Vec<f64> {
    match (model.warp.kind(), model.dim) {
        (WarpKind::Euclidean, 2) => tower_radii(8),
        (WarpKind::Hyperbolic, _) => (1..=8).map(|j| 1.0 + j as f64).collect(),
        (WarpKind::Cusp, _) => (1..=10).map(|j| 1.0 + 0.5 * j as f64).collect(),
        _ => (1..=8).map(|j| 2f64.powi(j)).collect(),
    }
}

/// Parses `kind:key=value,...` and builds the mesh.
pub fn generate(spec: &str) -> Result<MeshManifold, ConfigError> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut a = None;
    let mut b = None;
    let mut r = None;
    let mut h = None;
    for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| config_err!("generator field '{kv}' must be key=value"))?;
        let v: f64 = v.trim().parse().map_err(|_| config_err!("generator value '{v}' is not a number"))?;
        match k.trim() {
            "a" => a = Some(v),
            "b" => b = Some(v),
            "r" => r = Some(v),
            "h" => h = Some(v),
            other => return Err(config_err!("unknown generator key '{other}'")),
        }
    }
    let need = |x: Option<f64>, name: &str| x.ok_or_else(|| config_err!("generator '{kind}' needs {name}="));
    let built = match kind.trim() {
        "annulus" => build_annulus_mesh(need(a, "a")?, need(b, "b")?, need(h, "h")?),
        "disk" => build_disk_mesh(need(r, "r")?, need(h, "h")?),
        "halfdisk" => build_halfdisk_mesh(need(r, "r")?, need(h, "h")?),
        other => return Err(config_err!("unknown generator '{other}' (annulus, disk, halfdisk)")),
    };
    built.map_err(|e| config_err!("generator '{spec}': {e}"))
}
