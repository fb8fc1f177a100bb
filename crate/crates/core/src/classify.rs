//! Parabolicity verdicts: integral growth criteria, capacity decay along
//! exhaustions, reflected random walks, the true-boundary (D) test and the
//! implication chain between the notions.

use crate::calculus::{self, CalculusError};
use crate::geometry::{BallGrowthTable, EdgeLabel, GeometryError, MeshFamily, MeshManifold, ModelManifold, ScalarField, RIGHT_ANGLE_TOL};
use crate::potential::{self, condenser_capacity, solve_constrained, Condenser, LimitClass, PotentialError};
use crate::quad::{self, EPS_SLOPE};
use crate::table::Table;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("stiffness coupling {coupling:e} between vertices {a} and {b} is positive (obtuse mesh)")]
    ObtuseMeshUnsupported { a: usize, b: usize, coupling: f64 },
    #[error("non-absorbing configuration: {0}")]
    NonAbsorbingConfiguration(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mesh has no true-boundary edges")]
    NoTrueBoundary,
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Parabolic,
    NonParabolic,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    VolumeCriterion,
    AreaCriterion,
    CapacityDecay,
    WalkEstimate,
    DParabolicTest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub method: Method,
    pub evidence: Table,
    pub note: String,
}

impl Classification {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "verdict": self.verdict,
            "method": self.method,
            "note": self.note,
            "evidence": { "headers": self.evidence.headers, "rows": self.evidence.rows },
        })
    }
}

fn from_limit(c: LimitClass) -> Verdict {
    match c {
        LimitClass::DecaysToZero => Verdict::Parabolic,
        LimitClass::PositiveLimit => Verdict::NonParabolic,
        LimitClass::Undetermined => Verdict::Inconclusive,
    }
}

// ---------------------------------------------------------------------------
// Integral criteria

/// Where ball volumes and sphere areas come from.
#[derive(Debug, Clone, Copy)]
pub enum GrowthSource<'a> {
    Model(&'a ModelManifold),
    Table(&'a BallGrowthTable),
}

/// Minimum number of dyadic windows for an integral criterion.
pub const MIN_WINDOWS: usize = 10;
/// Sample points per dyadic window.
const WINDOW_POINTS: usize = 64;
/// Smallest probe radius on model manifolds.
pub const MODEL_R_START: f64 = 1.0;

#[derive(Clone, Copy, PartialEq)]
enum Integrand {
    RadiusOverVolume,
    InverseArea,
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1) - 1;
    let s = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + s * (ys[k + 1] - ys[k])
}

/// Integrand samples on a geometric grid; overflow and quadrature failure
/// both read as an infinite value.
fn sample(source: GrowthSource, which: Integrand, grid: &[f64]) -> Vec<f64> {
    match source {
        GrowthSource::Model(model) => {
            let closed = matches!(
                (&model.warp, model.dim),
                (crate::geometry::Warp::Euclidean, _)
                    | (crate::geometry::Warp::Hyperbolic, 2)
                    | (crate::geometry::Warp::Cusp, _)
                    | (crate::geometry::Warp::Power(_), _)
            );
            let mut vol = Vec::with_capacity(grid.len());
            for (i, &r) in grid.iter().enumerate() {
                let v = if closed || i == 0 {
                    model.ball_volume(r).unwrap_or(f64::INFINITY)
                } else {
                    let step = quad::simpson(|t| model.density(t), grid[i - 1], r, quad::Tolerance::default())
                        .map(|x| x * model.angular_measure())
                        .unwrap_or(f64::INFINITY);
                    vol[i - 1] + step
                };
                vol.push(v);
            }
            grid.iter()
                .zip(&vol)
                .map(|(&r, &v)| match which {
                    Integrand::RadiusOverVolume => r / v,
                    Integrand::InverseArea => model.sphere_area(r).map(|a| 1.0 / a).unwrap_or(f64::INFINITY),
                })
                .collect()
        }
        GrowthSource::Table(t) => {
            let xs = t.radii();
            let ys: Vec<f64> = t
                .rows
                .iter()
                .map(|row| match which {
                    Integrand::RadiusOverVolume => row.radius / row.volume,
                    Integrand::InverseArea => 1.0 / row.area,
                })
                .collect();
            grid.iter().map(|&r| interpolate(&xs, &ys, r)).collect()
        }
    }
}

fn integral_criterion(source: GrowthSource, r_max: f64, which: Integrand) -> Result<Classification, ClassifyError> {
    let (method, what) = match which {
        Integrand::RadiusOverVolume => (Method::VolumeCriterion, "R/vol(R)"),
        Integrand::InverseArea => (Method::AreaCriterion, "1/Area(R)"),
    };
    let r_start = match source {
        GrowthSource::Model(_) => MODEL_R_START,
        GrowthSource::Table(t) => {
            let first = t.rows.first().ok_or_else(|| ClassifyError::InsufficientData("empty growth table".into()))?;
            if t.rows.len() < 2 {
                return Err(ClassifyError::InsufficientData("growth table needs two rows".into()));
            }
            first.radius
        }
    };
    let r_top = match source {
        GrowthSource::Model(_) => r_max,
        GrowthSource::Table(t) => r_max.min(t.rows[t.rows.len() - 1].radius),
    };
    if !(r_top > r_start) {
        return Err(ClassifyError::InsufficientData(format!("R_max = {r_max} not above the first radius {r_start}")));
    }
    let windows = (r_top / r_start).log2().floor() as usize;
    if windows < MIN_WINDOWS {
        return Err(ClassifyError::InsufficientData(format!(
            "{windows} dyadic windows between {r_start} and {r_top}; need {MIN_WINDOWS}"
        )));
    }
    let base = r_top / 2f64.powi(windows as i32);
    let mut evidence = Table::new(&["window", "r_lo", "r_hi", "window_sum"]);
    let mut sums = Vec::with_capacity(windows);
    for k in 0..windows {
        let lo = base * 2f64.powi(k as i32);
        let grid: Vec<f64> = (0..=WINDOW_POINTS).map(|i| lo * 2f64.powf(i as f64 / WINDOW_POINTS as f64)).collect();
        let y = sample(source, which, &grid);
        let sum: f64 = grid.windows(2).zip(y.windows(2)).map(|(g, v)| 0.5 * (v[0] + v[1]) * (g[1] - g[0])).sum();
        let sum = if sum.is_nan() { f64::INFINITY } else { sum };
        evidence.push(vec![k.into(), lo.into(), (2.0 * lo).into(), sum.into()]);
        sums.push((2.0 * lo, sum));
    }
    let tail = &sums[windows / 2..];
    let (verdict, note) = if tail.iter().any(|&(_, s)| s.is_infinite()) {
        (Verdict::Parabolic, format!("{what} overflows inside the probed range"))
    } else {
        let slope = quad::log_slope(tail);
        if slope >= -EPS_SLOPE {
            (Verdict::Parabolic, format!("window sums of {what} have log-slope {slope:.4} >= -{EPS_SLOPE}"))
        } else {
            (Verdict::Inconclusive, format!("window sums of {what} decay with log-slope {slope:.4}"))
        }
    };
    Ok(Classification { verdict, method, evidence, note })
}

/// Divergence of `∫ R / vol B_R` by dyadic window sums.
pub fn volume_criterion(source: GrowthSource, r_max: f64) -> Result<Classification, ClassifyError> {
    integral_criterion(source, r_max, Integrand::RadiusOverVolume)
}

/// Divergence of `∫ 1 / Area(∂B_R)` by dyadic window sums.
pub fn area_criterion(source: GrowthSource, r_max: f64) -> Result<Classification, ClassifyError> {
    integral_criterion(source, r_max, Integrand::InverseArea)
}

// ---------------------------------------------------------------------------
// Capacity decay

pub fn capacity_decay_test(family: &dyn MeshFamily, j_max: usize) -> Result<Classification, ClassifyError> {
    let report = potential::absolute_capacity(family, j_max)?;
    Ok(Classification {
        verdict: from_limit(report.classification),
        method: Method::CapacityDecay,
        evidence: report.table(),
        note: report.extrapolation_note.clone(),
    })
}

// ---------------------------------------------------------------------------
// Reflected random walk

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkEstimate {
    pub trials: u64,
    pub hits_k: u64,
    pub p_hat: f64,
    pub std_err: f64,
    pub seed: u64,
}

impl WalkEstimate {
    fn new(trials: u64, hits_k: u64, seed: u64) -> Self {
        let p_hat = hits_k as f64 / trials as f64;
        WalkEstimate { trials, hits_k, p_hat, std_err: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(), seed }
    }
}

pub const MIN_TRIALS: u64 = 1000;
/// Steps after which a single trial is abandoned as non-absorbing.
pub const MAX_WALK_STEPS: u64 = 1_000_000_000;

/// Transition structure of the stiffness walk: for each vertex its
/// neighbours with cumulative probabilities.
#[derive(Debug, Clone)]
pub struct WalkGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    cumulative: Vec<f64>,
}

impl WalkGraph {
    pub fn new(mesh: &MeshManifold) -> Result<Self, ClassifyError> {
        let s = mesh.stiffness_matrix();
        let diag = s.diagonal();
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        let mut cumulative = Vec::new();
        for i in 0..mesh.n_vertices() {
            let start = targets.len();
            let mut total = 0.0;
            for (j, v) in s.row(i) {
                if j == i {
                    continue;
                }
                if v > RIGHT_ANGLE_TOL * diag[i] {
                    return Err(ClassifyError::ObtuseMeshUnsupported { a: i, b: j, coupling: v });
                }
                if v < 0.0 {
                    total -= v;
                    targets.push(j);
                    cumulative.push(total);
                }
            }
            for c in &mut cumulative[start..] {
                *c /= total;
            }
            offsets.push(targets.len());
        }
        Ok(WalkGraph { offsets, targets, cumulative })
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    fn step(&self, i: usize, x: f64) -> usize {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        let k = self.cumulative[a..b].partition_point(|&c| c <= x);
        self.targets[a + k.min(b - a - 1)]
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Absorb {
    Free,
    Hit,
    Miss,
}

/// Hits of `K` before the outer marker, from `start`, over `trials`
/// independent walks. Trial `t` draws from ChaCha8 seeded with `seed` on
/// stream `t`, so the result does not depend on scheduling.
pub fn reflected_walk_test(
    mesh: &MeshManifold,
    k: &[usize],
    outer_marker: &str,
    start: usize,
    trials: u64,
    seed: u64,
) -> Result<WalkEstimate, ClassifyError> {
    let graph = WalkGraph::new(mesh)?;
    reflected_walk_with(&graph, mesh, k, outer_marker, start, trials, seed)
}

/// [`reflected_walk_test`] on a prebuilt transition structure.
pub fn reflected_walk_with(
    graph: &WalkGraph,
    mesh: &MeshManifold,
    k: &[usize],
    outer_marker: &str,
    start: usize,
    trials: u64,
    seed: u64,
) -> Result<WalkEstimate, ClassifyError> {
    if trials < MIN_TRIALS {
        return Err(ClassifyError::InvalidArgument(format!("{trials} trials; need at least {MIN_TRIALS}")));
    }
    let n = mesh.n_vertices();
    if start >= n {
        return Err(ClassifyError::InvalidArgument(format!("start vertex {start} out of range")));
    }
    let outer = mesh.vertices_with_marker(outer_marker);
    if outer.is_empty() {
        return Err(ClassifyError::NonAbsorbingConfiguration(format!("no vertices carry marker '{outer_marker}'")));
    }
    if k.is_empty() {
        return Err(ClassifyError::NonAbsorbingConfiguration("K is empty".into()));
    }
    let mut state = vec![Absorb::Free; n];
    for &v in k {
        if v >= n {
            return Err(ClassifyError::InvalidArgument(format!("K vertex {v} out of range")));
        }
        state[v] = Absorb::Hit;
    }
    for &v in &outer {
        if state[v] == Absorb::Hit {
            return Err(ClassifyError::NonAbsorbingConfiguration(format!("vertex {v} lies in K and on '{outer_marker}'")));
        }
        state[v] = Absorb::Miss;
    }
    if state[start] != Absorb::Free {
        return Err(ClassifyError::InvalidArgument(format!("start vertex {start} is absorbing")));
    }
    // absorption must be reachable through positive couplings
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    let mut reachable = false;
    while let Some(v) = stack.pop() {
        if state[v] != Absorb::Free {
            reachable = true;
            break;
        }
        for &w in graph.neighbours(v) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    if !reachable {
        return Err(ClassifyError::NonAbsorbingConfiguration(format!("no absorbing vertex reachable from {start}")));
    }
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64, ClassifyError> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let mut v = start;
            for _ in 0..MAX_WALK_STEPS {
                v = graph.step(v, rng.random::<f64>());
                match state[v] {
                    Absorb::Free => {}
                    Absorb::Hit => return Ok(1),
                    Absorb::Miss => return Ok(0),
                }
            }
            Err(ClassifyError::NonAbsorbingConfiguration(format!("trial {t} exceeded {MAX_WALK_STEPS} steps")))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(WalkEstimate::new(trials, hits, seed))
}

/// Escape probabilities `1 - p_hat` from each member's origin. Parabolic
/// when the last escape estimate, plus three standard errors, falls below
/// the zero threshold relative to the first member; NonParabolic when the
/// last two estimates agree within three combined standard errors and stay
/// three standard errors above the threshold.
pub fn walk_classification(family: &dyn MeshFamily, j_max: usize, trials: u64, seed: u64) -> Result<Classification, ClassifyError> {
    if j_max == 0 || j_max > family.len() {
        return Err(ClassifyError::InvalidArgument(format!("j_max = {j_max} outside 1..={}", family.len())));
    }
    let mut evidence = Table::new(&["j", "outer_radius", "trials", "escape", "std_err"]);
    let mut escapes = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let m = family.member(j)?;
        let w = reflected_walk_test(&m.mesh, &m.k, &m.outer_marker, m.origin, trials, seed)?;
        evidence.push(vec![j.into(), m.outer_radius.into(), (trials as usize).into(), (1.0 - w.p_hat).into(), w.std_err.into()]);
        escapes.push((1.0 - w.p_hat, w.std_err));
    }
    let (first, _) = escapes[0];
    let (last, last_se) = escapes[escapes.len() - 1];
    let theta = potential::THETA_ZERO_FRACTION * first;
    let (verdict, note) = if escapes.len() < 2 {
        (Verdict::Inconclusive, "one member gives no trend".to_string())
    } else if last + 3.0 * last_se < theta {
        (Verdict::Parabolic, format!("escape {last:.4e} + 3 s.e. below {theta:.4e}"))
    } else {
        let (prev, prev_se) = escapes[escapes.len() - 2];
        let joint = 3.0 * (prev_se * prev_se + last_se * last_se).sqrt();
        if (prev - last).abs() <= joint && last - 3.0 * last_se > theta {
            (Verdict::NonParabolic, format!("escape settles at {last:.4e} (previous {prev:.4e}, 3 s.e. {joint:.2e})"))
        } else {
            (Verdict::Inconclusive, format!("escape {last:.4e} neither below {theta:.4e} nor settled (previous {prev:.4e})"))
        }
    };
    Ok(Classification { verdict, method: Method::WalkEstimate, evidence, note })
}

// ---------------------------------------------------------------------------
// True-boundary test

/// Harmonic measure of the outer boundary relative to the true boundary:
/// zero on `D1` vertices (which win at shared corners), one on the outer
/// marker, natural elsewhere.
pub fn d_harmonic_measure(mesh: &MeshManifold, outer_marker: &str) -> Result<ScalarField, ClassifyError> {
    let d1 = mesh.vertices_with_label(EdgeLabel::D1);
    if d1.is_empty() {
        return Err(ClassifyError::NoTrueBoundary);
    }
    let outer = mesh.vertices_with_marker(outer_marker);
    if outer.is_empty() {
        return Err(ClassifyError::NonAbsorbingConfiguration(format!("no vertices carry marker '{outer_marker}'")));
    }
    let mut fixed = vec![None; mesh.n_vertices()];
    for v in outer {
        fixed[v] = Some(1.0);
    }
    for v in d1 {
        fixed[v] = Some(0.0);
    }
    let u = solve_constrained(mesh, &fixed, &vec![0.0; mesh.n_vertices()])?;
    Ok(ScalarField { values: u })
}

pub fn d_parabolicity_test(family: &dyn MeshFamily, j_max: usize) -> Result<Classification, ClassifyError> {
    if j_max == 0 || j_max > family.len() {
        return Err(ClassifyError::InvalidArgument(format!("j_max = {j_max} outside 1..={}", family.len())));
    }
    let rows = (1..=j_max)
        .into_par_iter()
        .map(|j| -> Result<(usize, f64, f64), ClassifyError> {
            let m = family.member(j)?;
            let u = d_harmonic_measure(&m.mesh, &m.outer_marker)?;
            Ok((j, m.outer_radius, u.values[m.origin]))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut evidence = Table::new(&["j", "outer_radius", "u_at_o"]);
    for &(j, r, u) in &rows {
        evidence.push(vec![j.into(), r.into(), u.into()]);
    }
    if rows.len() < 2 {
        return Ok(Classification {
            verdict: Verdict::Inconclusive,
            method: Method::DParabolicTest,
            evidence,
            note: "a single member carries no limit information".into(),
        });
    }
    let radii: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let (class, _, note) = potential::classify_limit(&radii, &values);
    Ok(Classification { verdict: from_limit(class), method: Method::DParabolicTest, evidence, note })
}

// ---------------------------------------------------------------------------
// Implication chain

/// One family of the implication suite; `label` overrides the
/// capacity-decay verdict.
pub struct FamilyCase<'a> {
    pub family: &'a dyn MeshFamily,
    pub j_max: usize,
    pub label: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplicationRow {
    pub family: String,
    pub n_verdict: Verdict,
    pub labelled: bool,
    pub ahlfors_gap: Option<f64>,
    pub d_verdict: Option<Verdict>,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplicationReport {
    pub rows: Vec<ImplicationRow>,
}

impl ImplicationReport {
    pub fn violation_count(&self) -> usize {
        self.rows.iter().map(|r| r.violations.len()).sum()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["family", "n_verdict", "labelled", "ahlfors_gap", "d_verdict", "violations"]);
        for r in &self.rows {
            t.push(vec![
                r.family.clone().into(),
                format!("{:?}", r.n_verdict).into(),
                r.labelled.into(),
                r.ahlfors_gap.map_or("".into(), |g| g.into()),
                r.d_verdict.map_or("".into(), |v| format!("{v:?}").into()),
                r.violations.join("; ").into(),
            ]);
        }
        t
    }
}

/// Gap tolerance for the maximum principle check.
pub const AHLFORS_TOL: f64 = 1e-12;

/// For every family that is parabolic (by capacity decay or label), checks
/// that Neumann-harmonic fields on the last member peak on the artificial
/// boundary and that the true-boundary test does not report
/// non-parabolicity.
pub fn implication_check(suite: &[FamilyCase]) -> Result<ImplicationReport, ClassifyError> {
    let mut rows = Vec::with_capacity(suite.len());
    for case in suite {
        let n_verdict = match case.label {
            Some(v) => v,
            None => capacity_decay_test(case.family, case.j_max)?.verdict,
        };
        let mut row = ImplicationRow {
            family: case.family.name(),
            n_verdict,
            labelled: case.label.is_some(),
            ahlfors_gap: None,
            d_verdict: None,
            violations: Vec::new(),
        };
        if n_verdict == Verdict::Parabolic {
            let m = case.family.member(case.j_max)?;
            let mesh = &m.mesh;
            let c = Condenser::new(mesh, m.k.clone(), &m.outer_marker)?;
            let u = condenser_capacity(mesh, &c)?.potential;
            let flipped = ScalarField { values: u.values.iter().map(|x| 1.0 - x).collect() };
            let all: Vec<usize> = (0..mesh.n_vertices()).collect();
            // the plate carries Dirichlet data, so it belongs to ∂₀ even on a wall
            let mut b0 = mesh.vertices_with_label(EdgeLabel::D0);
            b0.extend(&m.k);
            b0.sort_unstable();
            b0.dedup();
            let mut gap = f64::NEG_INFINITY;
            for field in [&u, &flipped] {
                gap = gap.max(calculus::ahlfors_report(mesh, field, &all, &b0)?.gap);
            }
            row.ahlfors_gap = Some(gap);
            if gap > AHLFORS_TOL {
                row.violations.push(format!("Neumann-harmonic field exceeds its boundary maximum by {gap:e}"));
            }
            if mesh.vertices_with_label(EdgeLabel::D1).is_empty() {
                row.d_verdict = None;
            } else {
                let d = d_parabolicity_test(case.family, case.j_max)?;
                if d.verdict == Verdict::NonParabolic {
                    row.violations.push(format!("true-boundary test is NonParabolic: {}", d.note));
                }
                row.d_verdict = Some(d.verdict);
            }
        }
        rows.push(row);
    }
    Ok(ImplicationReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_annulus_mesh, build_model, ConformalFamily, InnerCondition, WarpKind};

    fn model(kind: WarpKind, dim: usize, sector: f64) -> ModelManifold {
        build_model(kind, &[], dim, sector).unwrap()
    }

    #[test]
    fn volume_criterion_on_models() {
        let half = model(WarpKind::Euclidean, 2, 0.5);
        assert_eq!(volume_criterion(GrowthSource::Model(&half), 4096.0).unwrap().verdict, Verdict::Parabolic);
        let r3 = model(WarpKind::Euclidean, 3, 1.0);
        assert_eq!(volume_criterion(GrowthSource::Model(&r3), 4096.0).unwrap().verdict, Verdict::Inconclusive);
        let h2 = model(WarpKind::Hyperbolic, 2, 1.0);
        assert_eq!(volume_criterion(GrowthSource::Model(&h2), 4096.0).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn area_criterion_on_models() {
        let plane = model(WarpKind::Euclidean, 2, 1.0);
        assert_eq!(area_criterion(GrowthSource::Model(&plane), 4096.0).unwrap().verdict, Verdict::Parabolic);
        let h2 = model(WarpKind::Hyperbolic, 2, 1.0);
        assert_eq!(area_criterion(GrowthSource::Model(&h2), 4096.0).unwrap().verdict, Verdict::Inconclusive);
        let cusp = model(WarpKind::Cusp, 2, 1.0);
        assert_eq!(area_criterion(GrowthSource::Model(&cusp), 4096.0).unwrap().verdict, Verdict::Parabolic);
    }

    #[test]
    fn too_few_windows() {
        let plane = model(WarpKind::Euclidean, 2, 1.0);
        assert!(matches!(volume_criterion(GrowthSource::Model(&plane), 100.0), Err(ClassifyError::InsufficientData(_))));
    }

    #[test]
    fn walk_needs_outer_marker() {
        let m = build_annulus_mesh(1.0, 2.0, 0.3).unwrap();
        let k = m.vertices_with_marker("inner");
        let start = (0..m.n_vertices()).find(|&v| !m.is_boundary_vertex(v)).unwrap();
        assert!(matches!(
            reflected_walk_test(&m, &k, "nowhere", start, 1000, 1),
            Err(ClassifyError::NonAbsorbingConfiguration(_))
        ));
        let a = reflected_walk_test(&m, &k, "outer", start, 2000, 7).unwrap();
        let b = reflected_walk_test(&m, &k, "outer", start, 2000, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.p_hat, a.hits_k as f64 / 2000.0);
    }

    #[test]
    fn d_test_single_member_is_inconclusive() {
        let f = ConformalFamily::flat_half_plane(16, 3, InnerCondition::Wall).unwrap();
        assert_eq!(d_parabolicity_test(&f, 1).unwrap().verdict, Verdict::Inconclusive);
        let plane = ConformalFamily::flat_plane(16, 2).unwrap();
        assert!(matches!(d_parabolicity_test(&plane, 2), Err(ClassifyError::NoTrueBoundary)));
    }

    #[test]
    fn d_test_on_half_planes() {
        let flat = ConformalFamily::flat_half_plane(16, 5, InnerCondition::Wall).unwrap();
        assert_eq!(d_parabolicity_test(&flat, 5).unwrap().verdict, Verdict::Parabolic);
        let hyp = ConformalFamily::hyperbolic_half_plane(16, 6, InnerCondition::Wall).unwrap();
        let c = d_parabolicity_test(&hyp, 6).unwrap();
        assert_eq!(c.verdict, Verdict::NonParabolic, "{}", c.note);
    }

    #[test]
    fn walk_escape_separates_plane_from_hyperbolic_plane() {
        let flat = ConformalFamily::flat_plane(16, 8).unwrap();
        let c = walk_classification(&flat, 8, 40_000, 3).unwrap();
        assert_eq!(c.verdict, Verdict::Parabolic, "{}", c.note);
        let hyp = ConformalFamily::hyperbolic_plane(16, 5).unwrap();
        let c = walk_classification(&hyp, 5, 4000, 3).unwrap();
        assert_eq!(c.verdict, Verdict::NonParabolic, "{}", c.note);
        assert_eq!(c.evidence.rows.len(), 5);
    }
}
