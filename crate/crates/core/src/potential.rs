//! Mixed Dirichlet/Neumann problems, Dirichlet energies, condenser
//! capacities and capacities along exhaustions.

use crate::geometry::{GeometryError, MeshFamily, MeshManifold, ModelManifold, ScalarField};
use crate::linalg::{self, SolveError};
use crate::quad::{self, Improper, Tolerance};
use crate::table::Table;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("linear solver diverged (relative residual {0:e})")]
    SolverDivergence(f64),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("capacity increased from {prev} to {next} at member {j}")]
    MonotonicityViolation { j: usize, prev: f64, next: f64 },
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<SolveError> for PotentialError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Singular { .. } => PotentialError::SingularSystem(e.to_string()),
            SolveError::Divergence { residual } => PotentialError::SolverDivergence(residual),
        }
    }
}

/// `u^T S u`, the Dirichlet energy of a P1 field.
///
/// # Panics
/// If `u` does not have one value per vertex.
pub fn dirichlet_energy(mesh: &MeshManifold, u: &ScalarField) -> f64 {
    assert_eq!(u.len(), mesh.n_vertices(), "field length differs from vertex count");
    let su = mesh.apply_stiffness(&u.values);
    linalg::dot(&u.values, &su)
}

/// `sum_T |grad u|^2 area(T)`, evaluated triangle by triangle.
pub fn dirichlet_energy_by_triangles(mesh: &MeshManifold, u: &ScalarField) -> f64 {
    (0..mesh.n_triangles()).map(|t| mesh.grad_norm_sq(t, &u.values) * mesh.area(t)).sum()
}

/// Solves `S u = load` with `u` prescribed where `fixed` is `Some`.
///
/// Every connected component must contain a prescribed vertex.
pub fn solve_constrained(mesh: &MeshManifold, fixed: &[Option<f64>], load: &[f64]) -> Result<Vec<f64>, PotentialError> {
    let n = mesh.n_vertices();
    if fixed.iter().all(Option::is_none) {
        return Err(PotentialError::SingularSystem("no Dirichlet constraint".into()));
    }
    let mut reached = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&i| fixed[i].is_some()).collect();
    for &i in &stack {
        reached[i] = true;
    }
    let nb = mesh.neighbours();
    while let Some(v) = stack.pop() {
        for &w in &nb[v] {
            if !reached[w] {
                reached[w] = true;
                stack.push(w);
            }
        }
    }
    if let Some(v) = reached.iter().position(|r| !r) {
        return Err(PotentialError::SingularSystem(format!("component of vertex {v} has no Dirichlet constraint")));
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let mut u: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    if free.is_empty() {
        return Ok(u);
    }
    let s = mesh.stiffness_matrix();
    let (a_ff, a_fc) = s.split(&free);
    let coupling = a_fc.matvec(&u);
    let rhs: Vec<f64> = free.iter().zip(&coupling).map(|(&i, c)| load[i] - c).collect();
    let x = linalg::solve_spd(&a_ff, &rhs)?;
    for (&i, v) in free.iter().zip(x) {
        u[i] = v;
    }
    Ok(u)
}

/// Prescribed values per vertex from marker data; conflicting values at a
/// shared vertex are an error.
fn dirichlet_vertices(mesh: &MeshManifold, dirichlet: &BTreeMap<String, f64>) -> Result<Vec<Option<f64>>, PotentialError> {
    let mut fixed = vec![None; mesh.n_vertices()];
    for (marker, &value) in dirichlet {
        if !mesh.has_marker(marker) {
            return Err(PotentialError::InvariantViolation(format!("unknown boundary marker {marker:?}")));
        }
        if !value.is_finite() {
            return Err(PotentialError::InvariantViolation(format!("value for {marker:?} is not finite")));
        }
        for v in mesh.vertices_with_marker(marker) {
            match fixed[v] {
                Some(old) if old != value => {
                    return Err(PotentialError::InvariantViolation(format!(
                        "vertex {v} receives conflicting Dirichlet values {old} and {value}"
                    )))
                }
                _ => fixed[v] = Some(value),
            }
        }
    }
    Ok(fixed)
}

/// P1 Galerkin solution of `-Δu = f` with Dirichlet data on the named
/// markers and the natural (zero-flux) condition on every other boundary
/// edge. The source is integrated with the lumped mass.
pub fn solve_mixed_bvp(
    mesh: &MeshManifold,
    dirichlet: &BTreeMap<String, f64>,
    source: Option<&ScalarField>,
) -> Result<ScalarField, PotentialError> {
    let fixed = dirichlet_vertices(mesh, dirichlet)?;
    let load = match source {
        Some(f) => {
            f.check(mesh)?;
            let m = mesh.lumped_mass();
            m.iter().zip(&f.values).map(|(a, b)| a * b).collect()
        }
        None => vec![0.0; mesh.n_vertices()],
    };
    Ok(ScalarField { values: solve_constrained(mesh, &fixed, &load)? })
}

/// `-Δu = f`, `u = 0` on `outer_marker`, zero flux elsewhere. `f` must
/// vanish at every boundary vertex.
pub fn solve_neumann_poisson(mesh: &MeshManifold, f: &ScalarField, outer_marker: &str) -> Result<ScalarField, PotentialError> {
    f.check(mesh)?;
    if let Some(v) = (0..mesh.n_vertices()).find(|&v| mesh.is_boundary_vertex(v) && f.values[v] != 0.0) {
        return Err(PotentialError::InvariantViolation(format!("source is nonzero at boundary vertex {v}")));
    }
    let mut d = BTreeMap::new();
    d.insert(outer_marker.to_string(), 0.0);
    solve_mixed_bvp(mesh, &d, Some(f))
}

/// Plate `K` and the outer boundary of `Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct Condenser {
    pub k: Vec<usize>,
    pub outer: Vec<usize>,
}

impl Condenser {
    /// Condenser whose outer set is every vertex on `omega_marker`.
    pub fn new(mesh: &MeshManifold, k: Vec<usize>, omega_marker: &str) -> Result<Self, PotentialError> {
        if !mesh.has_marker(omega_marker) {
            return Err(PotentialError::InvariantViolation(format!("unknown boundary marker {omega_marker:?}")));
        }
        Self::with_outer_vertices(mesh, k, mesh.vertices_with_marker(omega_marker))
    }

    pub fn with_outer_vertices(mesh: &MeshManifold, mut k: Vec<usize>, mut outer: Vec<usize>) -> Result<Self, PotentialError> {
        k.sort_unstable();
        k.dedup();
        outer.sort_unstable();
        outer.dedup();
        if k.is_empty() || outer.is_empty() {
            return Err(PotentialError::InvariantViolation("plate and outer set must be nonempty".into()));
        }
        if let Some(&v) = k.iter().chain(&outer).find(|&&v| v >= mesh.n_vertices()) {
            return Err(PotentialError::InvariantViolation(format!("vertex {v} does not exist")));
        }
        if let Some(v) = k.iter().find(|v| outer.binary_search(v).is_ok()) {
            return Err(PotentialError::InvariantViolation(format!("vertex {v} lies on both the plate and the outer boundary")));
        }
        Ok(Condenser { k, outer })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub value: f64,
    pub potential: ScalarField,
    /// `|u^T S u - sum_T |grad u|^2 area|`: agreement of two energy
    /// evaluations.
    pub energy_residual: f64,
}

/// Values within this distance outside `[0, 1]` are rounding and are clamped.
pub const CLAMP_SLACK: f64 = 1e-12;

/// Equilibrium potential (`1` on the plate, `0` on the outer set, zero flux
/// elsewhere) and its energy.
pub fn condenser_capacity(mesh: &MeshManifold, c: &Condenser) -> Result<CapacityResult, PotentialError> {
    let mut fixed = vec![None; mesh.n_vertices()];
    for &v in &c.k {
        fixed[v] = Some(1.0);
    }
    for &v in &c.outer {
        fixed[v] = Some(0.0);
    }
    let mut u = solve_constrained(mesh, &fixed, &vec![0.0; mesh.n_vertices()])?;
    for x in &mut u {
        if *x < 0.0 && *x >= -CLAMP_SLACK {
            *x = 0.0;
        } else if *x > 1.0 && *x <= 1.0 + CLAMP_SLACK {
            *x = 1.0;
        }
    }
    let potential = ScalarField { values: u };
    let value = dirichlet_energy(mesh, &potential);
    let energy_residual = (value - dirichlet_energy_by_triangles(mesh, &potential)).abs();
    Ok(CapacityResult { value, potential, energy_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitClass {
    DecaysToZero,
    PositiveLimit,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExhaustionRow {
    pub j: usize,
    pub outer_radius: f64,
    pub capacity: f64,
    pub potential_at_o: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustionReport {
    pub rows: Vec<ExhaustionRow>,
    pub limit_estimate: f64,
    pub classification: LimitClass,
    pub extrapolation_note: String,
}

/// `θ_zero = THETA_ZERO_FRACTION * capacity_1`.
pub const THETA_ZERO_FRACTION: f64 = 1e-2;
/// Admissible ratios of successive capacity differences for a geometric tail.
pub const CONTRACTION_WINDOW: (f64, f64) = (0.1, 0.9);
/// Relative agreement required of consecutive geometric extrapolations.
pub const STABLE_EXTRAPOLATION: f64 = 1e-2;
/// Relative growth tolerated before a capacity increase is an error.
pub const MONOTONE_SLACK: f64 = 1e-9;

impl ExhaustionReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["j", "outer_radius", "capacity", "potential_at_o"]);
        for r in &self.rows {
            t.push(vec![r.j.into(), r.outer_radius.into(), r.capacity.into(), r.potential_at_o.into()]);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.table().to_csv()
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "classification": self.classification,
            "limit_estimate": self.limit_estimate,
        })
    }
}

/// Classifies a decreasing positive sequence sampled at increasing radii.
pub fn classify_limit(radii: &[f64], values: &[f64]) -> (LimitClass, f64, String) {
    let n = values.len();
    let last = values[n - 1];
    if n < 3 {
        return (LimitClass::Undetermined, last, format!("{n} members are too few to extrapolate"));
    }
    let theta = THETA_ZERO_FRACTION * values[0];
    let pts: Vec<(f64, f64)> = radii[n - 3..].iter().copied().zip(values[n - 3..].iter().copied()).collect();
    let slope = quad::log_slope(&pts);
    if slope < 0.0 && last < theta {
        return (
            LimitClass::DecaysToZero,
            0.0,
            format!("log-log slope {slope:.4} over the last three members; last value {last:.6e} below {theta:.6e}"),
        );
    }
    let diffs: Vec<f64> = values.windows(2).map(|w| w[0] - w[1]).collect();
    let noise = 1e-9 * last.abs();
    let significant: Vec<f64> = diffs.iter().copied().filter(|d| d.abs() > noise).collect();
    let tail_converged = diffs.last().is_some_and(|d| d.abs() <= noise);
    let ratios: Vec<f64> = significant.windows(2).map(|w| w[1] / w[0]).collect();
    let recent = &ratios[ratios.len().saturating_sub(3)..];
    let (lo, hi) = CONTRACTION_WINDOW;
    let in_window = !recent.is_empty() && recent.iter().all(|&r| (lo..=hi).contains(&r));
    // Extrapolations from the last two windows must agree; a slowly
    // decaying sequence has drifting ratios and fails this.
    let extrapolate = |k: usize| -> Option<f64> {
        let d = diffs.get(k)?;
        let prev = diffs.get(k.checked_sub(1)?)?;
        let rho = d / prev;
        Some(values[k + 1] - d * rho / (1.0 - rho))
    };
    let stable = match (extrapolate(n - 2), extrapolate(n - 3)) {
        (Some(a), Some(b)) => (a - b).abs() <= STABLE_EXTRAPOLATION * a.abs().max(b.abs()),
        _ => false,
    };
    let geometric = in_window && stable;
    if geometric || tail_converged {
        let limit = if tail_converged { last } else { extrapolate(n - 2).unwrap_or(last) };
        if limit > theta {
            let how = if tail_converged { "differences below rounding".to_string() } else { format!("difference ratios {recent:?}") };
            return (LimitClass::PositiveLimit, limit, format!("geometric extrapolation ({how}) gives {limit:.10e} above {theta:.6e}"));
        }
        return (LimitClass::Undetermined, limit, format!("extrapolated limit {limit:.6e} not above {theta:.6e}"));
    }
    (
        LimitClass::Undetermined,
        last,
        format!("neither decay (slope {slope:.4}, last {last:.6e}) nor geometric contraction (ratios {recent:?})"),
    )
}

/// Capacities of the plate of every member `j = 1..=j_max` against the
/// member's outer boundary.
pub fn absolute_capacity(family: &dyn MeshFamily, j_max: usize) -> Result<ExhaustionReport, PotentialError> {
    if j_max == 0 || j_max > family.len() {
        return Err(PotentialError::InvariantViolation(format!("j_max = {j_max} outside 1..={}", family.len())));
    }
    let rows = (1..=j_max)
        .into_par_iter()
        .map(|j| -> Result<ExhaustionRow, PotentialError> {
            let m = family.member(j)?;
            let c = Condenser::new(&m.mesh, m.k.clone(), &m.outer_marker)?;
            let r = condenser_capacity(&m.mesh, &c)?;
            Ok(ExhaustionRow { j, outer_radius: m.outer_radius, capacity: r.value, potential_at_o: r.potential.values[m.origin] })
        })
        .collect::<Result<Vec<_>, _>>()?;
    for w in rows.windows(2) {
        if w[1].capacity > w[0].capacity * (1.0 + MONOTONE_SLACK) {
            return Err(PotentialError::MonotonicityViolation { j: w[1].j, prev: w[0].capacity, next: w[1].capacity });
        }
    }
    let radii: Vec<f64> = rows.iter().map(|r| r.outer_radius).collect();
    let caps: Vec<f64> = rows.iter().map(|r| r.capacity).collect();
    let (classification, limit_estimate, extrapolation_note) = classify_limit(&radii, &caps);
    Ok(ExhaustionReport { rows, limit_estimate, classification, extrapolation_note })
}

/// Capacity of the radial condenser `a <= r <= b` of a model:
/// `sector * omega_(m-1) / ∫_a^b f^(1-m)`. A divergent integral for
/// `b = ∞` gives zero.
pub fn radial_capacity_oracle(model: &ModelManifold, a: f64, b: f64) -> Result<f64, PotentialError> {
    if !(a > 0.0 && b > a) {
        return Err(PotentialError::InvariantViolation(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    let integrand = |t: f64| 1.0 / model.density(t);
    let tol = Tolerance::default();
    let integral = if b.is_infinite() {
        match quad::integrate_to_infinity(integrand, a, tol).map_err(|e| PotentialError::QuadratureFailure(e.to_string()))? {
            Improper::Converged(v) => v,
            Improper::Divergent => return Ok(0.0),
        }
    } else {
        quad::simpson(integrand, a, b, tol).map_err(|e| PotentialError::QuadratureFailure(e.to_string()))?
    };
    Ok(model.angular_measure() / integral)
}

/// Least-squares slope of `ln err` against `ln h`.
pub fn convergence_order(h: &[f64], err: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h.iter().copied().zip(err.iter().map(|e| e.abs())).collect();
    quad::log_slope(&pts)
}

/// Richardson estimate from three values on grids refined by `ratio`:
/// returns `(limit, observed_order, error_estimate_of_finest)`.
pub fn richardson(c1: f64, c2: f64, c3: f64, ratio: f64) -> (f64, f64, f64) {
    let p = ((c1 - c2) / (c2 - c3)).abs().ln() / ratio.ln();
    let limit = c3 - (c2 - c3) / (ratio.powf(p) - 1.0);
    (limit, p, (c3 - limit).abs())
}
