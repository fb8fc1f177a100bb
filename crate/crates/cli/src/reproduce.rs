//! One pipeline per reproducible theorem. Each builds its stock geometry,
//! evaluates the checkable conclusion and returns tables plus a list of
//! assertions.

use crate::config::RunConfig;
use crate::RunError;
use parlab::calculus::{self, ahlfors_report, is_weak_neumann_subsolution, stokes_limit_study, StokesVerdict};
use parlab::classify::{self, capacity_decay_test, implication_check, FamilyCase, Verdict};
use parlab::geometry::{
    build_disk_mesh, build_halfdisk_mesh, build_model, ConformalFamily, FamilyMember, InnerCondition, MeshFamily, MeshManifold, ScalarField,
    VectorField, WarpKind,
};
use parlab::graph::{
    height_estimate_check, li_wang_check, liouville_probe, slice_report, solve_cmc_dirichlet, solve_cmc_fixed, CmcOptions, CmcStatus,
    GraphError, GraphSurface,
};
use parlab::potential::solve_neumann_poisson;
use parlab::quad::{simpson, Tolerance};
use parlab::table::Table;
use rayon::prelude::*;
use serde_json::json;
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub const THEOREMS: [&str; 7] = ["ahlfors", "stokes", "height", "slice", "liouville", "liwang", "implications"];

pub struct Assertion {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

pub struct Report {
    pub theorem: String,
    pub summary: String,
    pub assertions: Vec<Assertion>,
    pub tables: Vec<(String, Table)>,
}

impl Report {
    fn new(theorem: &str) -> Self {
        Report { theorem: theorem.into(), summary: String::new(), assertions: Vec::new(), tables: Vec::new() }
    }

    fn check(&mut self, name: &str, holds: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion { name: name.into(), holds, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.holds)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "theorem": self.theorem,
            "passed": self.passed(),
            "summary": self.summary,
            "assertions": self.assertions.iter().map(|a| json!({"name": a.name, "holds": a.holds, "detail": a.detail})).collect::<Vec<_>>(),
            "tables": self.tables.iter().map(|(n, _)| format!("{}_{n}.csv", self.theorem)).collect::<Vec<_>>(),
        })
    }
}

fn solver<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Solver(e.to_string())
}

fn count_or(cfg: &RunConfig, default: usize) -> usize {
    cfg.exhaustion.map_or(default, |e| e.count)
}

pub fn run(theorem: &str, cfg: &RunConfig) -> Result<Report, RunError> {
    match theorem {
        "ahlfors" => ahlfors(cfg),
        "stokes" => stokes(cfg),
        "height" => height(cfg),
        "slice" => slice(cfg),
        "liouville" => liouville(cfg),
        "liwang" => liwang(cfg),
        "implications" => implications(cfg),
        other => Err(RunError::Config(crate::config::ConfigError(format!(
            "unknown theorem '{other}'; expected one of {}",
            THEOREMS.join(", ")
        )))),
    }
}

/// Maximum principle on the flat half-plane with true boundary: the gap of
/// the true-boundary harmonic measure on a fixed ball decays along the
/// exhaustion.
fn ahlfors(cfg: &RunConfig) -> Result<Report, RunError> {
    let count = count_or(cfg, 5);
    let fam = ConformalFamily::flat_half_plane(cfg.n_theta, count, InnerCondition::Wall).map_err(solver)?;
    let r1 = fam.radii[0];
    let mut table = Table::new(&["j", "outer_radius", "worst_hat_pairing", "sup_d", "sup_boundary", "gap"]);
    let mut gaps = Vec::new();
    let mut osc = 0.0;
    let mut report = Report::new("ahlfors");
    for j in 1..=count {
        let m = fam.member(j).map_err(solver)?;
        let u = classify::d_harmonic_measure(&m.mesh, &m.outer_marker).map_err(solver)?;
        let sub = is_weak_neumann_subsolution(&m.mesh, &u, cfg.tol).map_err(solver)?;
        report.check(&format!("subsolution j={j}"), sub.pass, format!("worst hat pairing {:e}", sub.worst_value));
        let d: Vec<usize> = (0..m.mesh.n_vertices()).filter(|&v| radius(&m.mesh, v) <= r1 * (1.0 + 1e-9)).collect();
        let b: Vec<usize> = d.iter().copied().filter(|&v| m.mesh.is_d1_vertex(v)).collect();
        let a = ahlfors_report(&m.mesh, &u, &d, &b).map_err(solver)?;
        table.push(vec![j.into(), m.outer_radius.into(), sub.worst_value.into(), a.sup_d.into(), a.sup_boundary0.into(), a.gap.into()]);
        gaps.push(a.gap);
        osc = u.max() - u.min();
    }
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    let last = *gaps.last().unwrap_or(&f64::NAN);
    report.check("gap non-increasing", monotone, format!("{gaps:?}"));
    report.check("final gap small", last <= 1e-2 * osc, format!("{last:e} <= 1e-2 x oscillation {osc}"));
    report.summary = format!("gap on the first ball decays to {last:.3e} over {count} members");
    report.tables.push(("gaps".into(), table));
    Ok(report)
}

fn radius(mesh: &MeshManifold, v: usize) -> f64 {
    let p = mesh.vertex(v);
    p[0].hypot(p[1])
}

fn bump(r: f64) -> f64 {
    let x = (r - 1.5) / 0.3;
    if x.abs() < 1.0 {
        (0.5 * PI * x).cos().powi(2)
    } else {
        0.0
    }
}

/// Neumann-Poisson witness on a hyperbolic half-plane: the flux gap tends
/// to `-∫f` while `∫|X|²` stays bounded.
fn stokes(cfg: &RunConfig) -> Result<Report, RunError> {
    let count = count_or(cfg, 6);
    let model = build_model(WarpKind::Hyperbolic, &[], 2, 0.5).map_err(solver)?;
    let radii = (1..=count).map(|j| 1.0 + j as f64).collect();
    let fam = ConformalFamily::with_aspect("hyperbolic half-plane", model, 1.0, radii, 2 * cfg.n_theta, InnerCondition::Wall, 0.25)
        .map_err(solver)?;
    let source = |mesh: &MeshManifold| ScalarField {
        values: (0..mesh.n_vertices())
            .map(|v| {
                if mesh.is_boundary_vertex(v) {
                    0.0
                } else {
                    let p = mesh.vertex(v);
                    bump(p[0].hypot(p[1])) * p[1].atan2(p[0]).sin().powi(2)
                }
            })
            .collect(),
    };
    let gen = |m: &FamilyMember| -> Result<VectorField, calculus::CalculusError> {
        let u = solve_neumann_poisson(&m.mesh, &source(&m.mesh), &m.outer_marker)?;
        Ok(VectorField::gradient(&m.mesh, &u))
    };
    let study = stokes_limit_study(&fam, count, &gen).map_err(solver)?;
    let integral_f = 0.5 * PI * simpson(|r| bump(r) * r.sinh(), 1.2, 1.8, Tolerance::default()).map_err(solver)?;
    let rel = (study.final_gap + integral_f).abs() / integral_f;
    let mut report = Report::new("stokes");
    report.check("energy bounded, leak persists", study.verdict == StokesVerdict::StokesFails, format!("verdict {:?}", study.verdict));
    report.check("gap matches -∫f", rel <= 0.05, format!("gap {} vs {} (relative {rel:e})", study.final_gap, -integral_f));
    report.summary = if report.passed() {
        "global Stokes fails as predicted".into()
    } else {
        format!("verdict {:?}, gap {} vs {}", study.verdict, study.final_gap, -integral_f)
    };
    report.tables.push(("study".into(), study.table()));
    Ok(report)
}

const RHOS: [f64; 4] = [0.5, 0.7, 0.9, 0.97];
const CAP_H: f64 = 0.03;

fn cap(rho: f64) -> Result<(GraphSurface, CmcStatus, f64), RunError> {
    let m = build_disk_mesh(rho, CAP_H).map_err(solver)?;
    let data: BTreeMap<String, f64> = [("outer".to_string(), 0.0)].into();
    let r = solve_cmc_dirichlet(&m, 1.0, &data, CmcOptions::default()).map_err(solver)?;
    let exact = |p: [f64; 3]| (1.0 - p[0] * p[0] - p[1] * p[1]).max(0.0).sqrt() - (1.0 - rho * rho).sqrt();
    let err = m.vertices().iter().zip(&r.u.values).map(|(p, u)| (u - exact(*p)).abs()).fold(0.0, f64::max);
    Ok((GraphSurface::new(m, r.u).map_err(solver)?, r.status, err))
}

/// Spherical caps over disks of growing radius: heights stay below `1/H`
/// and the slack closes as the cap approaches a hemisphere.
fn height(_cfg: &RunConfig) -> Result<Report, RunError> {
    let runs: Vec<_> = RHOS.par_iter().map(|&rho| cap(rho)).collect::<Result<_, _>>()?;
    let mut table = Table::new(&["rho", "status", "linf_error", "min_u", "max_u", "bound", "slack"]);
    let mut report = Report::new("height");
    let mut slacks = Vec::new();
    for ((g, status, err), rho) in runs.iter().zip(RHOS) {
        let h = height_estimate_check(g, 1.0).map_err(solver)?;
        table.push(vec![rho.into(), format!("{status:?}").into(), (*err).into(), h.min_u.into(), h.max_u.into(), h.bound.into(), h.slack.into()]);
        report.check(&format!("rho={rho} converged"), *status == CmcStatus::Converged, format!("{status:?}"));
        report.check(&format!("rho={rho} within slab"), h.min_u >= 0.0 && h.slack >= 0.0, format!("u in [{}, {}], slack {}", h.min_u, h.max_u, h.slack));
        slacks.push(h.slack);
    }
    report.check("slack decreasing", slacks.windows(2).all(|w| w[1] < w[0]), format!("{slacks:?}"));
    let big = build_disk_mesh(1.2, CAP_H).map_err(solver)?;
    let data: BTreeMap<String, f64> = [("outer".to_string(), 0.0)].into();
    let r = solve_cmc_dirichlet(&big, 1.0, &data, CmcOptions::default()).map_err(solver)?;
    table.push(vec![1.2.into(), format!("{:?}", r.status).into(), f64::NAN.into(), r.u.min().into(), r.u.max().into(), 1.0.into(), f64::NAN.into()]);
    report.check("rho=1.2 has no solution", r.status == CmcStatus::Diverged, format!("{:?} after {} Newton steps: {}", r.status, r.newton_iterations, r.message));
    report.summary = format!("slack {:.4} -> {:.4}", slacks[0], slacks[slacks.len() - 1]);
    report.tables.push(("caps".into(), table));
    Ok(report)
}

/// Volume of intrinsic graph balls against the base ball plus its boundary.
fn liwang(_cfg: &RunConfig) -> Result<Report, RunError> {
    let runs: Vec<_> = RHOS
        .par_iter()
        .map(|&rho| -> Result<_, RunError> {
            let (g, _, _) = cap(rho)?;
            let radii: Vec<f64> = (1..=10).map(|k| rho * k as f64 / 10.0).collect();
            li_wang_check(&g, 0, &radii, 1.0).map_err(solver)
        })
        .collect::<Result<_, _>>()?;
    let mut report = Report::new("liwang");
    for (rep, rho) in runs.iter().zip(RHOS) {
        report.check(&format!("rho={rho}"), rep.violations == 0, format!("{} violations, constant {}", rep.violations, rep.constant));
        report.tables.push((format!("rho{rho}"), rep.table()));
    }
    report.summary = format!("{} radii checked", 10 * RHOS.len());
    Ok(report)
}

fn halfdisk_graph(radius: f64, h_curv: f64) -> Result<(MeshManifold, ScalarField), RunError> {
    let m = build_halfdisk_mesh(radius, radius / 40.0).map_err(solver)?;
    let fixed: Vec<Option<f64>> = (0..m.n_vertices())
        .map(|v| {
            m.is_d0_vertex(v).then(|| {
                let p = m.vertex(v);
                0.2 * radius * p[1].atan2(p[0]).cos()
            })
        })
        .collect();
    let r = solve_cmc_fixed(&m, h_curv, &fixed, CmcOptions { neumann: true, ..Default::default() }).map_err(solver)?;
    if r.status != CmcStatus::Converged {
        return Err(RunError::Solver(format!("half-disk graph R={radius} H={h_curv}: {}", r.message)));
    }
    Ok((m, r.u))
}

/// Energy growth of subsolutions on half-disks with a free straight edge.
fn liouville(_cfg: &RunConfig) -> Result<Report, RunError> {
    let mut report = Report::new("liouville");
    let (mut held, mut checked) = (0usize, 0usize);
    for radius in [2.0, 4.0, 8.0] {
        for h_curv in [0.0, -0.1] {
            let (m, u) = halfdisk_graph(radius, h_curv)?;
            let radii: Vec<f64> = (1..=20).map(|k| radius * (0.05 + 0.045 * k as f64)).collect();
            let rep = liouville_probe(&m, &u, 0, &radii).map_err(solver)?;
            for row in &rep.rows {
                if let Some(h) = row.holds {
                    checked += 1;
                    held += h as usize;
                }
            }
            report.tables.push((format!("R{radius}_H{h_curv}"), rep.table()));
        }
    }
    let frac = held as f64 / checked.max(1) as f64;
    report.check("inequality rate", frac >= 0.95, format!("{held}/{checked} radii"));
    report.summary = format!("inequality holds at {held} of {checked} radii");
    Ok(report)
}

/// Graphs with non-positive mean curvature over a parabolic half-plane
/// section, plus two sign-gate negatives.
fn slice(_cfg: &RunConfig) -> Result<Report, RunError> {
    let fam = ConformalFamily::flat_half_plane(32, 8, InnerCondition::Plate).map_err(solver)?;
    let parabolic = capacity_decay_test(&fam, 8).map_err(solver)?.verdict == Verdict::Parabolic;
    let mut report = Report::new("slice");
    report.check("base parabolic", parabolic, "capacity decay on the flat half-plane");
    let mut cases: Vec<(String, MeshManifold, ScalarField)> = Vec::new();
    let zero = build_halfdisk_mesh(2.0, 0.1).map_err(solver)?;
    cases.push(("zero".into(), zero.clone(), ScalarField::constant(&zero, 0.0)));
    for radius in [2.0, 4.0] {
        for h_curv in [0.0, -0.2] {
            let (m, u) = halfdisk_graph(radius, h_curv)?;
            cases.push((format!("R{radius}_H{h_curv}"), m, u));
        }
    }
    let mut table = Table::new(&["case", "max_mean_curvature", "tol_slice", "hypothesis_a", "hypothesis_c", "applicable", "deficit", "holds"]);
    for (name, m, u) in cases {
        let g = GraphSurface::new(m, u).map_err(solver)?;
        let r = slice_report(&g, parabolic).map_err(solver)?;
        table.push(vec![
            name.clone().into(),
            r.max_mean_curvature.into(),
            r.tol_slice.into(),
            r.hypothesis_a.into(),
            r.hypothesis_c.into(),
            r.applicable.into(),
            r.constancy_deficit.into(),
            r.holds.into(),
        ]);
        report.check(&format!("{name} implication"), r.holds, format!("deficit {} vs {}", r.constancy_deficit, r.tol_slice));
    }
    let m = build_halfdisk_mesh(0.8, 0.02).map_err(solver)?;
    let data: BTreeMap<String, f64> = [("outer".to_string(), 0.0)].into();
    let pos = solve_cmc_dirichlet(&m, 1.0, &data, CmcOptions { neumann: true, ..Default::default() }).map_err(solver)?;
    let gate = slice_report(&GraphSurface::new(m, pos.u).map_err(solver)?, parabolic);
    report.check("positive curvature rejected", matches!(gate, Err(GraphError::HypothesisViolation(_))), "half-disk with H = 1");
    report.summary = format!("{} cases", table.rows.len());
    report.tables.push(("cases".into(), table));
    Ok(report)
}

/// Parabolic families satisfy the maximum principle and the true-boundary
/// test; non-parabolic ones are reported without assertion.
fn implications(cfg: &RunConfig) -> Result<Report, RunError> {
    let n = cfg.n_theta;
    let flat_wall = ConformalFamily::flat_half_plane(n, 8, InnerCondition::Wall).map_err(solver)?;
    let flat_plate = ConformalFamily::flat_half_plane(n, 8, InnerCondition::Plate).map_err(solver)?;
    let plane = ConformalFamily::flat_plane(n, 8).map_err(solver)?;
    let hyp = ConformalFamily::hyperbolic_half_plane(n, 6, InnerCondition::Wall).map_err(solver)?;
    let suite = [
        FamilyCase { family: &flat_wall, j_max: 8, label: None },
        FamilyCase { family: &flat_plate, j_max: 8, label: None },
        FamilyCase { family: &plane, j_max: 8, label: None },
        FamilyCase { family: &hyp, j_max: 6, label: None },
    ];
    let rep = implication_check(&suite).map_err(solver)?;
    let mut report = Report::new("implications");
    for row in &rep.rows {
        report.check(&row.family, row.violations.is_empty(), format!("{:?}; {}", row.n_verdict, row.violations.join("; ")));
    }
    report.summary = format!("{} families, {} violations", rep.rows.len(), rep.violation_count());
    report.tables.push(("families".into(), rep.table()));
    Ok(report)
}
