//! Graphs `x -> (x, u(x))` over meshed bases: mean curvature with respect
//! to the downward normal, a Newton solver for prescribed constant mean
//! curvature, and the height, volume, Liouville and slice probes.

use crate::calculus::{self, CalculusError, WeakPairingReport};
use crate::geometry::{
    ball_growth_samples, sublevel_fraction, BallGrowthTable, EdgeLabel, GeometryError, MeshManifold, ScalarField, Sym2,
    VectorField,
};
use crate::geometry::{distance_field, level_set_length};
use crate::linalg::{solve_spd, CsrMatrix};
use crate::table::Table;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Dimension of the graphs handled here.
pub const M: f64 = 2.0;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("invalid boundary data: {0}")]
    InvalidBoundaryData(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Graph of a P1 height function. Per-triangle quantities are cached.
#[derive(Debug, Clone)]
pub struct GraphSurface {
    pub base: MeshManifold,
    pub u: ScalarField,
    w: Vec<f64>,
}

impl GraphSurface {
    pub fn new(base: MeshManifold, u: ScalarField) -> Result<Self, GraphError> {
        u.check(&base)?;
        let w = (0..base.n_triangles()).map(|t| (1.0 + base.grad_norm_sq(t, &u.values).max(0.0)).sqrt()).collect();
        Ok(GraphSurface { base, u, w })
    }

    pub fn gradient(&self, t: usize) -> [f64; 2] {
        self.base.gradient(t, &self.u.values)
    }

    /// `W = sqrt(1 + |grad u|^2)`.
    pub fn w(&self, t: usize) -> f64 {
        self.w[t]
    }

    /// Cosine of the angle between the downward normal and the vertical.
    pub fn cos_theta(&self, t: usize) -> f64 {
        -1.0 / self.w[t]
    }

    /// Edge-frame Gram matrix of `g + du ⊗ du`.
    pub fn pulled_back_gram(&self, t: usize) -> Sym2 {
        let m = self.base.gram(t);
        let d = self.base.differential(t, &self.u.values);
        [[m[0][0] + d[0] * d[0], m[0][1] + d[0] * d[1]], [m[1][0] + d[1] * d[0], m[1][1] + d[1] * d[1]]]
    }

    /// Area of the lifted triangle, `area * W`.
    pub fn area_element(&self, t: usize) -> f64 {
        self.base.area(t) * self.w[t]
    }

    /// `W` at vertices, lumped-mass average of the incident triangles.
    pub fn vertex_w(&self) -> Vec<f64> {
        let mut num = vec![0.0; self.base.n_vertices()];
        let mut den = vec![0.0; self.base.n_vertices()];
        for (t, tri) in self.base.triangles().iter().enumerate() {
            let a = self.base.area(t) / 3.0;
            for &v in tri {
                num[v] += a * self.w[t];
                den[v] += a;
            }
        }
        num.iter().zip(&den).map(|(n, d)| n / d).collect()
    }

    /// `∇u / W` per triangle.
    pub fn normalized_gradient(&self) -> VectorField {
        VectorField {
            vectors: (0..self.base.n_triangles())
                .map(|t| {
                    let g = self.gradient(t);
                    [g[0] / self.w[t], g[1] / self.w[t]]
                })
                .collect(),
        }
    }

    /// The base triangulation carrying the pulled-back metric.
    pub fn graph_mesh(&self) -> Result<MeshManifold, GraphError> {
        let base = &self.base;
        if base.ambient_dim() != 2 {
            return Err(GraphError::Precondition("pulled-back metric needs a planar chart".into()));
        }
        let mut metric = Vec::with_capacity(base.n_triangles());
        for (t, tri) in base.triangles().iter().enumerate() {
            let p = |k: usize| base.vertex(tri[k]);
            let e1 = [p(1)[0] - p(0)[0], p(1)[1] - p(0)[1]];
            let e2 = [p(2)[0] - p(0)[0], p(2)[1] - p(0)[1]];
            let det = e1[0] * e2[1] - e1[1] * e2[0];
            let d = base.differential(t, &self.u.values);
            // chart gradient c = E^{-T} d
            let c = [(e2[1] * d[0] - e1[1] * d[1]) / det, (-e2[0] * d[0] + e1[0] * d[1]) / det];
            let g = base.metric().map_or([[1.0, 0.0], [0.0, 1.0]], |g| g[t]);
            let off = g[0][1] + c[0] * c[1];
            metric.push([[g[0][0] + c[0] * c[0], off], [off, g[1][1] + c[1] * c[1]]]);
        }
        Ok(MeshManifold::new(
            2,
            base.vertices().to_vec(),
            base.triangles().to_vec(),
            base.boundary_edges().to_vec(),
            Some(metric),
        )?)
    }
}

// ---------------------------------------------------------------------------
// Operator

fn local_w(base: &MeshManifold, t: usize, k: &[[f64; 3]; 3], ut: [f64; 3]) -> f64 {
    let ku = [0, 1, 2].map(|a| k[a][0] * ut[0] + k[a][1] * ut[1] + k[a][2] * ut[2]);
    let q = ut[0] * ku[0] + ut[1] * ku[1] + ut[2] * ku[2];
    (1.0 + (q / base.area(t)).max(0.0)).sqrt()
}

/// `∫ <∇u / W, ∇hat_i>` for every vertex.
pub fn minimal_surface_residual(base: &MeshManifold, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; base.n_vertices()];
    for (t, tri) in base.triangles().iter().enumerate() {
        let k = base.local_stiffness(t);
        let ut = [u[tri[0]], u[tri[1]], u[tri[2]]];
        let w = local_w(base, t, &k, ut);
        for a in 0..3 {
            out[tri[a]] += (k[a][0] * ut[0] + k[a][1] * ut[1] + k[a][2] * ut[2]) / w;
        }
    }
    out
}

/// Weak residual `∫ <∇u/W, ∇hat_i> - m H ∫ hat_i`.
pub fn cmc_residual(base: &MeshManifold, u: &[f64], h: f64) -> Vec<f64> {
    let mass = base.lumped_mass();
    minimal_surface_residual(base, u).iter().zip(&mass).map(|(r, m)| r - M * h * m).collect()
}

/// Jacobian of [`cmc_residual`] in `u` (independent of `H`).
pub fn cmc_jacobian(base: &MeshManifold, u: &[f64]) -> CsrMatrix {
    let mut trip = Vec::with_capacity(9 * base.n_triangles());
    for (t, tri) in base.triangles().iter().enumerate() {
        let k = base.local_stiffness(t);
        let ut = [u[tri[0]], u[tri[1]], u[tri[2]]];
        let w = local_w(base, t, &k, ut);
        let ku = [0, 1, 2].map(|a| k[a][0] * ut[0] + k[a][1] * ut[1] + k[a][2] * ut[2]);
        let c = 1.0 / (base.area(t) * w * w * w);
        for a in 0..3 {
            for b in 0..3 {
                trip.push((tri[a], tri[b], k[a][b] / w - c * ku[a] * ku[b]));
            }
        }
    }
    CsrMatrix::from_triplets(base.n_vertices(), base.n_vertices(), trip)
}

/// `Σ area·W - m H ∫ u`, whose gradient is [`cmc_residual`].
pub fn cmc_energy(base: &MeshManifold, u: &[f64], h: f64) -> f64 {
    let mass = base.lumped_mass();
    let mut e = 0.0;
    for (t, tri) in base.triangles().iter().enumerate() {
        let k = base.local_stiffness(t);
        e += base.area(t) * local_w(base, t, &k, [u[tri[0]], u[tri[1]], u[tri[2]]]);
    }
    e - M * h * mass.iter().zip(u).map(|(m, x)| m * x).sum::<f64>()
}

/// Lumped weak mean curvature `-(1/m) (div(∇u/W), hat_i) / mass_i`. Values
/// at artificial-boundary vertices are not evaluated and set to zero.
pub fn mean_curvature_field(g: &GraphSurface) -> ScalarField {
    let base = &g.base;
    let div = calculus::weak_divergence_hats(base, &g.normalized_gradient());
    let mass = base.lumped_mass();
    ScalarField {
        values: (0..base.n_vertices())
            .map(|i| if base.is_d0_vertex(i) { 0.0 } else { -div[i] / (M * mass[i]) })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Solver

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CmcStatus {
    Converged,
    Diverged,
    StepLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmcOptions {
    /// Leave true-boundary vertices free (natural condition).
    pub neumann: bool,
    pub tol: f64,
    /// Newton steps summed over all continuation levels.
    pub max_newton: usize,
    /// Largest continuation step as a fraction of the target.
    pub continuation_fraction: f64,
}

impl Default for CmcOptions {
    fn default() -> Self {
        CmcOptions { neumann: false, tol: 1e-10, max_newton: 200, continuation_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmcSolveResult {
    pub u: ScalarField,
    pub newton_iterations: usize,
    pub final_residual: f64,
    pub continuation_steps: usize,
    pub status: CmcStatus,
    /// Last continuation level attempted.
    pub h_reached: f64,
    pub message: String,
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-10;

/// Dirichlet values per vertex from marker data.
fn dirichlet_values(base: &MeshManifold, data: &BTreeMap<String, f64>) -> Result<Vec<Option<f64>>, GraphError> {
    let mut fixed: Vec<Option<f64>> = vec![None; base.n_vertices()];
    for (marker, &value) in data {
        if !value.is_finite() {
            return Err(GraphError::InvalidBoundaryData(format!("value for '{marker}' is not finite")));
        }
        let vs = base.vertices_with_marker(marker);
        if vs.is_empty() {
            return Err(GraphError::InvalidBoundaryData(format!("unknown marker '{marker}'")));
        }
        for v in vs {
            match fixed[v] {
                Some(old) if old != value => {
                    return Err(GraphError::InvalidBoundaryData(format!("vertex {v} receives {old} and {value}")));
                }
                _ => fixed[v] = Some(value),
            }
        }
    }
    Ok(fixed)
}

/// Relative residual: largest free entry over the largest sum of absolute
/// contributions.
fn relative_residual(base: &MeshManifold, u: &[f64], h: f64, free: &[usize]) -> f64 {
    let mass = base.lumped_mass();
    let mut abs = vec![0.0; base.n_vertices()];
    for (t, tri) in base.triangles().iter().enumerate() {
        let k = base.local_stiffness(t);
        let ut = [u[tri[0]], u[tri[1]], u[tri[2]]];
        let w = local_w(base, t, &k, ut);
        for a in 0..3 {
            abs[tri[a]] += (k[a][0] * ut[0]).abs() / w + (k[a][1] * ut[1]).abs() / w + (k[a][2] * ut[2]).abs() / w;
        }
    }
    let r = cmc_residual(base, u, h);
    let num = free.iter().map(|&i| r[i].abs()).fold(0.0, f64::max);
    let den = free.iter().map(|&i| abs[i] + (M * h * mass[i]).abs()).fold(0.0, f64::max);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Newton's method with Armijo backtracking on the area functional, with
/// continuation in `H` from zero.
pub fn solve_cmc_dirichlet(
    base: &MeshManifold,
    h_target: f64,
    boundary_data: &BTreeMap<String, f64>,
    opts: CmcOptions,
) -> Result<CmcSolveResult, GraphError> {
    let fixed = dirichlet_values(base, boundary_data)?;
    solve_cmc_fixed(base, h_target, &fixed, opts)
}

/// [`solve_cmc_dirichlet`] with Dirichlet values given per vertex.
pub fn solve_cmc_fixed(
    base: &MeshManifold,
    h_target: f64,
    fixed: &[Option<f64>],
    opts: CmcOptions,
) -> Result<CmcSolveResult, GraphError> {
    if !h_target.is_finite() || !(opts.tol > 0.0) || !(opts.continuation_fraction > 0.0) {
        return Err(GraphError::Precondition("H, tolerance and continuation fraction must be finite and positive".into()));
    }
    if fixed.len() != base.n_vertices() {
        return Err(GeometryError::MeshMismatch { expected: base.n_vertices(), found: fixed.len() }.into());
    }
    for v in 0..base.n_vertices() {
        let needs = if opts.neumann { base.is_d0_vertex(v) } else { base.is_boundary_vertex(v) };
        if needs && fixed[v].is_none() {
            return Err(GraphError::InvalidBoundaryData(format!("boundary vertex {v} carries no data")));
        }
        if fixed[v].is_some_and(|x| !x.is_finite()) {
            return Err(GraphError::InvalidBoundaryData(format!("value at vertex {v} is not finite")));
        }
    }
    if fixed.iter().all(Option::is_none) {
        return Err(GraphError::InvalidBoundaryData("no Dirichlet vertex".into()));
    }
    let free: Vec<usize> = (0..base.n_vertices()).filter(|&v| fixed[v].is_none()).collect();
    let mut u: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    let data_max = fixed.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    let (lo, hi) = base.vertices().iter().fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), p| {
        ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
    });
    let diam = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
    // Any solution obeys the height estimate; far beyond it the iteration runs away.
    let blowup = 10.0 * (data_max + diam + if h_target != 0.0 { 1.0 / h_target.abs() } else { 0.0 });

    let levels = if h_target == 0.0 { 1 } else { (1.0 / opts.continuation_fraction).ceil() as usize };
    let mut newton = 0;
    let mut res = f64::INFINITY;
    let mut h = 0.0;
    let finish = |u: Vec<f64>, newton, res, steps, status, h, message: String| CmcSolveResult {
        u: ScalarField { values: u },
        newton_iterations: newton,
        final_residual: res,
        continuation_steps: steps,
        status,
        h_reached: h,
        message,
    };
    for level in 1..=levels {
        h = h_target * level as f64 / levels as f64;
        loop {
            res = relative_residual(base, &u, h, &free);
            if res <= opts.tol {
                break;
            }
            if newton >= opts.max_newton {
                return Ok(finish(u, newton, res, level, CmcStatus::StepLimit, h, format!("{newton} Newton steps used")));
            }
            newton += 1;
            let r = cmc_residual(base, &u, h);
            let jac = cmc_jacobian(base, &u);
            let (jff, _) = jac.split(&free);
            let rhs: Vec<f64> = free.iter().map(|&i| -r[i]).collect();
            let delta = match solve_spd(&jff, &rhs) {
                Ok(d) => d,
                Err(e) => {
                    return Ok(finish(u, newton, res, level, CmcStatus::Diverged, h, format!("Newton system failed: {e}")));
                }
            };
            let slope: f64 = free.iter().zip(&delta).map(|(&i, d)| r[i] * d).sum();
            let e0 = cmc_energy(base, &u, h);
            let mut alpha = 1.0;
            let trial = loop {
                let mut v = u.clone();
                for (&i, d) in free.iter().zip(&delta) {
                    v[i] += alpha * d;
                }
                let e = cmc_energy(base, &v, h);
                if e.is_finite() && e <= e0 + ARMIJO * alpha * slope + 1e-13 * e0.abs() {
                    break Some(v);
                }
                alpha *= 0.5;
                if alpha < MIN_STEP {
                    break None;
                }
            };
            let Some(v) = trial else {
                return Ok(finish(u, newton, res, level, CmcStatus::Diverged, h, "line search stalled".into()));
            };
            u = v;
            let top = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if !top.is_finite() || top > blowup {
                return Ok(finish(
                    u,
                    newton,
                    res,
                    level,
                    CmcStatus::Diverged,
                    h,
                    format!("height {top:.3e} beyond the a-priori bound {blowup:.3e}"),
                ));
            }
        }
    }
    Ok(finish(u, newton, res, levels, CmcStatus::Converged, h, "converged".into()))
}

// ---------------------------------------------------------------------------
// Height estimate

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightReport {
    pub h: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub bound: f64,
    pub slack: f64,
    pub tol_height: f64,
    pub pass: bool,
}

/// Mesh size entering the discretization allowances.
pub fn mesh_size(base: &MeshManifold) -> f64 {
    base.mean_edge_length()
}

/// Checks `0 <= u <= 1/H` for a graph whose boundary lies in the zero slice.
pub fn height_estimate_check(g: &GraphSurface, h: f64) -> Result<HeightReport, GraphError> {
    if !(h > 0.0) {
        return Err(GraphError::HypothesisViolation(format!("H = {h} must be positive")));
    }
    let base = &g.base;
    for v in 0..base.n_vertices() {
        if base.is_boundary_vertex(v) && g.u.values[v].abs() > 1e-12 {
            return Err(GraphError::HypothesisViolation(format!("boundary vertex {v} has height {}", g.u.values[v])));
        }
    }
    let sup_grad = (0..base.n_triangles()).map(|t| (g.w(t) * g.w(t) - 1.0).sqrt()).fold(0.0, f64::max);
    let tol_height = 5.0 * mesh_size(base) * (1.0 + sup_grad);
    let (min_u, max_u) = (g.u.min(), g.u.max());
    let bound = 1.0 / h;
    Ok(HeightReport {
        h,
        min_u,
        max_u,
        bound,
        slack: bound - max_u,
        tol_height,
        pass: min_u >= -tol_height && max_u <= bound + tol_height,
    })
}

/// `w = H u - 1/W` at vertices.
pub fn auxiliary_w_field(g: &GraphSurface, h: f64) -> Result<ScalarField, GraphError> {
    if !g.base.is_flat() {
        return Err(GraphError::HypothesisViolation("auxiliary field needs a flat base".into()));
    }
    let w = g.vertex_w();
    Ok(ScalarField { values: g.u.values.iter().zip(&w).map(|(u, w)| h * u - 1.0 / w).collect() })
}

/// Hat-function subsolution check of `w` in the pulled-back metric.
pub fn auxiliary_w_subsolution(g: &GraphSurface, h: f64, tol: f64) -> Result<WeakPairingReport, GraphError> {
    let w = auxiliary_w_field(g, h)?;
    Ok(calculus::is_weak_neumann_subsolution(&g.graph_mesh()?, &w, tol)?)
}

// ---------------------------------------------------------------------------
// Volume growth

/// Ball growth in the pulled-back metric.
pub fn graph_ball_growth(g: &GraphSurface, o: usize, radii: &[f64]) -> Result<BallGrowthTable, GraphError> {
    Ok(ball_growth_samples(&g.graph_mesh()?, o, radii)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiWangRow {
    pub radius: f64,
    pub graph_volume: f64,
    pub base_volume: f64,
    pub base_area: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiWangReport {
    pub constant: f64,
    pub rows: Vec<LiWangRow>,
    pub violations: usize,
}

impl LiWangReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["radius", "graph_volume", "base_volume", "base_area", "rhs", "holds"]);
        for r in &self.rows {
            t.push(vec![r.radius.into(), r.graph_volume.into(), r.base_volume.into(), r.base_area.into(), r.rhs.into(), r.holds.into()]);
        }
        t
    }
}

/// `vol B_R^Σ <= C (vol B_R^N + Area ∂B_R^N)` with
/// `C = m sup|u| sup|H| + 1 + sup|u|`.
pub fn li_wang_check(g: &GraphSurface, o: usize, radii: &[f64], sup_h: f64) -> Result<LiWangReport, GraphError> {
    let sup_u = g.u.values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let constant = M * sup_u * sup_h.abs() + 1.0 + sup_u;
    let graph = graph_ball_growth(g, o, radii)?;
    let base = ball_growth_samples(&g.base, o, radii)?;
    let rows: Vec<LiWangRow> = graph
        .rows
        .iter()
        .zip(&base.rows)
        .map(|(s, b)| {
            let rhs = constant * (b.volume + b.area);
            LiWangRow { radius: s.radius, graph_volume: s.volume, base_volume: b.volume, base_area: b.area, rhs, holds: s.volume <= rhs }
        })
        .collect();
    let violations = rows.iter().filter(|r| !r.holds).count();
    Ok(LiWangReport { constant, rows, violations })
}

// ---------------------------------------------------------------------------
// Liouville probe

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiouvilleRow {
    pub radius: f64,
    /// `H(R) = ∫_{B_R} e^u Φ(|∇u|) |∇u|²` with `sup u` normalized to zero.
    pub energy: f64,
    pub area: f64,
    /// Forward difference `ΔH / (ΔR H²)`; absent at the last radius.
    pub ratio: Option<f64>,
    /// `1 / Area` at the right end of the interval.
    pub inverse_area: Option<f64>,
    pub holds: Option<bool>,
    /// `(∫_{R_0}^{R} Area^{-1})^{-1}`, the integrated bound on `H(R_0)`.
    pub integrated_bound: Option<f64>,
    pub integrated_holds: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LiouvilleNote {
    NoteConstant,
    Evaluated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiouvilleReport {
    pub note: LiouvilleNote,
    pub shift: f64,
    pub rows: Vec<LiouvilleRow>,
    pub fraction_holding: f64,
    pub exceptions: Vec<(f64, f64)>,
}

impl LiouvilleReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["radius", "energy", "area", "ratio", "inverse_area", "holds", "integrated_bound", "integrated_holds"]);
        let opt = |x: Option<f64>| x.map_or("".into(), |v| v.into());
        for r in &self.rows {
            t.push(vec![
                r.radius.into(),
                r.energy.into(),
                r.area.into(),
                opt(r.ratio),
                opt(r.inverse_area),
                r.holds.map_or("".into(), |b| b.into()),
                opt(r.integrated_bound),
                r.integrated_holds.map_or("".into(), |b| b.into()),
            ]);
        }
        t
    }
}

/// Tabulates `H(R)` by clipping each triangle to the ball and compares the
/// growth ratio `H'/H²` with `1/Area(∂₀B_R)`.
pub fn liouville_probe(base: &MeshManifold, u: &ScalarField, o: usize, radii: &[f64]) -> Result<LiouvilleReport, GraphError> {
    if u.values.iter().any(|x| !x.is_finite()) {
        return Err(GraphError::Precondition("u is not bounded above".into()));
    }
    u.check(base)?;
    if radii.len() < 2 || radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(GraphError::Precondition("radii must be positive and strictly increasing".into()));
    }
    let shift = u.max();
    let v: Vec<f64> = u.values.iter().map(|x| x - shift).collect();
    let r = distance_field(base, o)?;
    if radii[radii.len() - 1] > r.max() {
        return Err(GeometryError::RadiusOutOfRange(radii[radii.len() - 1]).into());
    }
    let density: Vec<f64> = (0..base.n_triangles())
        .map(|t| {
            let tri = base.triangles()[t];
            let eu = (v[tri[0]].exp() + v[tri[1]].exp() + v[tri[2]].exp()) / 3.0;
            let g2 = base.grad_norm_sq(t, &v).max(0.0);
            base.area(t) * eu * g2 / (1.0 + g2).sqrt()
        })
        .collect();
    let energy_at = |radius: f64| -> f64 {
        base.triangles()
            .iter()
            .enumerate()
            .map(|(t, tri)| density[t] * sublevel_fraction([r.values[tri[0]], r.values[tri[1]], r.values[tri[2]]], radius))
            .sum()
    };
    let energies: Vec<f64> = radii.iter().map(|&x| energy_at(x)).collect();
    let areas: Vec<f64> = radii.iter().map(|&x| level_set_length(base, &r.values, x)).collect();
    if energies.iter().all(|&e| e == 0.0) {
        let rows = radii
            .iter()
            .zip(&areas)
            .map(|(&radius, &area)| LiouvilleRow {
                radius,
                energy: 0.0,
                area,
                ratio: None,
                inverse_area: None,
                holds: None,
                integrated_bound: None,
                integrated_holds: None,
            })
            .collect();
        return Ok(LiouvilleReport { note: LiouvilleNote::NoteConstant, shift, rows, fraction_holding: 1.0, exceptions: vec![] });
    }
    let n = radii.len();
    let mut rows = Vec::with_capacity(n);
    let mut inv_integral = 0.0;
    let mut exceptions = Vec::new();
    let mut checked = 0;
    let mut held = 0;
    for k in 0..n {
        let mut row = LiouvilleRow {
            radius: radii[k],
            energy: energies[k],
            area: areas[k],
            ratio: None,
            inverse_area: None,
            holds: None,
            integrated_bound: None,
            integrated_holds: None,
        };
        if k + 1 < n && energies[k] > 0.0 && areas[k + 1] > 0.0 {
            let ratio = (energies[k + 1] - energies[k]) / ((radii[k + 1] - radii[k]) * energies[k] * energies[k]);
            let inv = 1.0 / areas[k + 1];
            let holds = ratio >= inv;
            checked += 1;
            if holds {
                held += 1;
            } else {
                exceptions.push((radii[k], inv - ratio));
            }
            row.ratio = Some(ratio);
            row.inverse_area = Some(inv);
            row.holds = Some(holds);
        }
        if k > 0 && areas[k - 1] > 0.0 && areas[k] > 0.0 {
            inv_integral += 0.5 * (1.0 / areas[k - 1] + 1.0 / areas[k]) * (radii[k] - radii[k - 1]);
            let bound = 1.0 / inv_integral;
            row.integrated_bound = Some(bound);
            row.integrated_holds = Some(energies[0] <= bound);
        }
        rows.push(row);
    }
    let fraction_holding = if checked == 0 { 1.0 } else { held as f64 / checked as f64 };
    Ok(LiouvilleReport { note: LiouvilleNote::Evaluated, shift, rows, fraction_holding, exceptions })
}

// ---------------------------------------------------------------------------
// Slice report

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperlevelRow {
    pub t: f64,
    pub volume: f64,
    /// The superlevel set reaches the artificial boundary.
    pub touches_d0: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceReport {
    pub max_mean_curvature: f64,
    pub tol_slice: f64,
    pub has_true_boundary: bool,
    /// `u = 0` on the true boundary and `u >= 0`.
    pub hypothesis_a: bool,
    /// Smallest `cos θ = -∂_ν u / W` over true-boundary edges.
    pub min_boundary_cos: f64,
    /// `cos θ >= 0` on every true-boundary edge.
    pub hypothesis_c: bool,
    /// A level `T > 0` missed by the boundary of the graph.
    pub avoided_level: f64,
    pub superlevels: Vec<SuperlevelRow>,
    /// `(sup u - max over boundary vertices of u)^+`.
    pub constancy_deficit: f64,
    pub parabolic: bool,
    pub applicable: bool,
    pub holds: bool,
}

impl SliceReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["t", "volume", "touches_d0"]);
        for r in &self.superlevels {
            t.push(vec![r.t.into(), r.volume.into(), r.touches_d0.into()]);
        }
        t
    }
}

/// Number of superlevel thresholds tabulated.
pub const SUPERLEVELS: usize = 16;

/// Verifies the checkable hypotheses of the slice theorem for a graph with
/// `H <= 0` and, when they hold over a parabolic base, that the graph
/// does not rise above its boundary values (`tol_slice = 10 h`).
pub fn slice_report(g: &GraphSurface, parabolic: bool) -> Result<SliceReport, GraphError> {
    let base = &g.base;
    let h = mesh_size(base);
    let tol_slice = 10.0 * h;
    let hf = mean_curvature_field(g);
    let evaluated: Vec<usize> = (0..base.n_vertices()).filter(|&v| !base.is_d0_vertex(v)).collect();
    let max_mean_curvature = evaluated.iter().map(|&v| hf.values[v]).fold(f64::NEG_INFINITY, f64::max);
    if max_mean_curvature > tol_slice {
        return Err(GraphError::HypothesisViolation(format!(
            "mean curvature reaches {max_mean_curvature:.4e} > {tol_slice:.4e}; the graph must have H <= 0"
        )));
    }
    let u = &g.u.values;
    let d1 = base.vertices_with_label(EdgeLabel::D1);
    let has_true_boundary = !d1.is_empty();
    let hypothesis_a = d1.iter().all(|&v| u[v].abs() <= 1e-12) && u.iter().all(|&x| x >= -1e-12);
    let x = g.normalized_gradient();
    let mut min_boundary_cos = f64::INFINITY;
    for (i, be) in base.boundary_edges().iter().enumerate() {
        if be.label == EdgeLabel::D1 {
            let (t, k) = base.boundary_slot(i);
            let len = base.edge_length(base.triangle_edges(t)[k]);
            // flux of ∇u/W per unit length is ∂_ν u / W
            min_boundary_cos = min_boundary_cos.min(-base.edge_flux(t, k, x.vectors[t]) / len);
        }
    }
    let hypothesis_c = min_boundary_cos >= -tol_slice;
    let boundary_top = d1.iter().map(|&v| u[v]).fold(0.0f64, f64::max);
    let avoided_level = boundary_top + 1.0;
    let (lo, hi) = (g.u.min(), g.u.max());
    let superlevels = (1..=SUPERLEVELS)
        .map(|k| {
            let t = lo + (hi - lo) * k as f64 / (SUPERLEVELS + 1) as f64;
            let volume = base
                .triangles()
                .iter()
                .enumerate()
                .map(|(tr, tri)| base.area(tr) * (1.0 - sublevel_fraction([u[tri[0]], u[tri[1]], u[tri[2]]], t)))
                .sum();
            let touches_d0 = (0..base.n_vertices()).any(|v| base.is_d0_vertex(v) && u[v] >= t);
            SuperlevelRow { t, volume, touches_d0 }
        })
        .collect();
    let boundary_max = (0..base.n_vertices())
        .filter(|&v| base.is_boundary_vertex(v))
        .map(|v| u[v])
        .fold(f64::NEG_INFINITY, f64::max);
    let constancy_deficit = (hi - boundary_max).max(0.0);
    let applicable = parabolic && (!has_true_boundary || hypothesis_a || hypothesis_c);
    Ok(SliceReport {
        max_mean_curvature,
        tol_slice,
        has_true_boundary,
        hypothesis_a,
        min_boundary_cos,
        hypothesis_c,
        avoided_level,
        superlevels,
        constancy_deficit,
        parabolic,
        applicable,
        holds: !applicable || constancy_deficit <= tol_slice,
    })
}
