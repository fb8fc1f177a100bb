//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so every line is printed even when a criterion fails.

use parlab::calculus::{self, ahlfors_report, discrete_boundary0, is_weak_neumann_subsolution, stokes_limit_study, stokes_residual, stokes_scale, StokesVerdict};
use parlab::classify::{self, area_criterion, capacity_decay_test, reflected_walk_with, volume_criterion, GrowthSource, Verdict, WalkGraph};
use parlab::geometry::{
    build_annulus_mesh, build_disk_mesh, build_halfdisk_mesh, build_model, ConformalFamily, EdgeLabel, InnerCondition, MeshFamily,
    MeshManifold, ScalarField, VectorField, WarpKind,
};
use parlab::graph::{
    self, cmc_jacobian, cmc_residual, height_estimate_check, li_wang_check, liouville_probe, slice_report, solve_cmc_dirichlet,
    solve_cmc_fixed, CmcOptions, CmcStatus, GraphError, GraphSurface,
};
use parlab::potential::{self, condenser_capacity, radial_capacity_oracle, richardson, solve_mixed_bvp, solve_neumann_poisson, Condenser};
use parlab::quad::{simpson, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn markers(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn annulus_capacity(a: f64, b: f64, h: f64) -> (f64, potential::CapacityResult, MeshManifold) {
    let m = build_annulus_mesh(a, b, h).unwrap();
    let c = Condenser::new(&m, m.vertices_with_marker("inner"), "outer").unwrap();
    let r = condenser_capacity(&m, &c).unwrap();
    (r.value, r, m)
}

// 1. Annulus capacity, convergence order and runtime.
fn annulus_condenser() -> Outcome {
    let exact = 2.0 * PI / 2f64.ln();
    let hs = [0.12, 0.06, 0.03, 0.015];
    let mut errs = Vec::new();
    let mut slowest: f64 = 0.0;
    let mut at_003 = f64::NAN;
    for &h in &hs {
        let t = Instant::now();
        let (cap, _, _) = annulus_capacity(1.0, 2.0, h);
        slowest = slowest.max(t.elapsed().as_secs_f64());
        let rel = (cap - exact).abs() / exact;
        if h == 0.03 {
            at_003 = rel;
        }
        errs.push(rel);
    }
    let order = potential::convergence_order(&hs, &errs);
    let pass = at_003 <= 0.01 && order >= 1.7 && slowest < 10.0;
    outcome(pass, format!("rel. error at h=0.03 {at_003:.3e} (<= 1e-2), order {order:.3} (>= 1.7), slowest solve {slowest:.2}s (< 10s)"))
}

// 2. Bounds, energy identity and natural boundary condition of the
// equilibrium potential.
fn potential_regularity() -> Outcome {
    let mut cases: Vec<(String, MeshManifold, Vec<usize>, String)> = Vec::new();
    let m = build_annulus_mesh(1.0, 2.0, 0.05).unwrap();
    cases.push(("annulus".into(), m.clone(), m.vertices_with_marker("inner"), "outer".into()));
    let hd = build_halfdisk_mesh(1.0, 0.04).unwrap();
    let k: Vec<usize> = (0..hd.n_vertices()).filter(|&v| {
        let p = hd.vertex(v);
        p[0].hypot(p[1]) <= 0.3 + 1e-12
    }).collect();
    cases.push(("half-disk".into(), hd, k, "outer".into()));
    let fam = ConformalFamily::flat_half_plane(48, 3, InnerCondition::Plate).unwrap();
    let mem = fam.member(3).unwrap();
    cases.push(("half-annulus".into(), mem.mesh, mem.k, mem.outer_marker));
    let mut worst_bound: f64 = 0.0;
    let mut worst_energy: f64 = 0.0;
    let mut worst_pairing: f64 = 0.0;
    let mut obtuse = 0;
    for (_, mesh, k, outer) in &cases {
        obtuse += mesh.obtuse_count();
        let c = Condenser::new(mesh, k.clone(), outer).unwrap();
        let r = condenser_capacity(mesh, &c).unwrap();
        for &x in &r.potential.values {
            worst_bound = worst_bound.max(-x).max(x - 1.0);
        }
        let su = mesh.apply_stiffness(&r.potential.values);
        let flux: f64 = c.k.iter().map(|&v| su[v]).sum();
        worst_energy = worst_energy.max(r.energy_residual / r.value).max((flux - r.value).abs() / r.value);
        for v in mesh.vertices_with_label(EdgeLabel::D1) {
            if c.k.binary_search(&v).is_err() && c.outer.binary_search(&v).is_err() {
                let p = calculus::weak_laplacian_pairing(mesh, &r.potential, &calculus::hat(mesh, v)).unwrap();
                worst_pairing = worst_pairing.max(p.abs());
            }
        }
    }
    let pass = obtuse == 0 && worst_bound <= 0.0 && worst_energy <= 1e-12 && worst_pairing <= 1e-8;
    outcome(
        pass,
        format!(
            "{} meshes, obtuse {obtuse}; max excursion outside [0,1] {worst_bound:.1e}; energy/flux mismatch {worst_energy:.1e} (<= 1e-12); D1 hat pairing {worst_pairing:.1e} (<= 1e-8)",
            cases.len()
        ),
    )
}

// 3. Nested condensers: monotone and Richardson-consistent.
fn capacitor_limit() -> Outcome {
    let exact = 2.0 * PI / 2f64.ln();
    let hs = [0.12, 0.06, 0.03, 0.015];
    let k = 0.5;
    let caps: Vec<f64> = hs.iter().map(|&h| annulus_capacity(1.0 + k * h, 2.0 - k * h, h).0).collect();
    let monotone = caps.windows(2).all(|w| w[1] <= w[0]);
    let (limit, p, est) = richardson(caps[1], caps[2], caps[3], 2.0);
    let err = (limit - exact).abs();
    outcome(
        monotone && err <= 2.0 * est,
        format!("caps {caps:.4?} non-increasing: {monotone}; Richardson limit {limit:.5} (order {p:.2}), |limit - exact| {err:.2e} <= 2 x {est:.2e}"),
    )
}

// 4. Capacity decay versus the radial oracle and the integral criteria.
fn parabolicity_consistency() -> Outcome {
    let families: Vec<(ConformalFamily, usize)> = vec![
        (ConformalFamily::flat_plane(32, 8).unwrap(), 8),
        (ConformalFamily::flat_half_plane(32, 8, InnerCondition::Plate).unwrap(), 8),
        (ConformalFamily::euclidean_space(32, 8).unwrap(), 8),
        (ConformalFamily::hyperbolic_plane(32, 8).unwrap(), 8),
        (ConformalFamily::cusp(32, 10).unwrap(), 10),
    ];
    let mut mismatches = Vec::new();
    let mut summary = Vec::new();
    for (fam, j) in &families {
        let oracle = radial_capacity_oracle(&fam.model, fam.inner_radius, f64::INFINITY).unwrap();
        let expected = if oracle > 0.0 { Verdict::NonParabolic } else { Verdict::Parabolic };
        let got = capacity_decay_test(fam, *j).unwrap().verdict;
        let vol = volume_criterion(GrowthSource::Model(&fam.model), 4096.0).unwrap().verdict;
        let area = area_criterion(GrowthSource::Model(&fam.model), 4096.0).unwrap().verdict;
        if got != expected {
            mismatches.push(format!("{}: decay {got:?} vs oracle {expected:?}", fam.label));
        }
        if expected == Verdict::NonParabolic && (vol == Verdict::Parabolic || area == Verdict::Parabolic) {
            mismatches.push(format!("{}: integral criterion says Parabolic", fam.label));
        }
        summary.push(format!("{}={got:?}", fam.label));
    }
    outcome(mismatches.is_empty(), format!("{}; {}", summary.join(", "), if mismatches.is_empty() { "no mismatch".into() } else { mismatches.join("; ") }))
}

// 5. Monte Carlo harmonic measure against the equilibrium potential.
fn harmonic_measure() -> Outcome {
    let t = Instant::now();
    let (_, r, m) = annulus_capacity(1.0, 2.0, 0.1);
    let start = (0..m.n_vertices())
        .min_by(|&a, &b| {
            let d = |v: usize| (m.vertex(v)[0].hypot(m.vertex(v)[1]) - 1.5).abs();
            d(a).total_cmp(&d(b))
        })
        .unwrap();
    let u = r.potential.values[start];
    let k = m.vertices_with_marker("inner");
    let graph = WalkGraph::new(&m).unwrap();
    let mut inside = 0;
    for seed in 0..50u64 {
        let w = reflected_walk_with(&graph, &m, &k, "outer", start, 100_000, seed).unwrap();
        if (w.p_hat - u).abs() <= 3.0 * w.std_err {
            inside += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(inside >= 49 && secs < 60.0, format!("u(o) = {u:.5}; {inside}/50 seeds within 3 s.e. (>= 49); {secs:.1}s (< 60s)"))
}

fn graph_ball(mesh: &MeshManifold, centre: usize, hops: usize) -> Vec<usize> {
    let nb = mesh.neighbours();
    let mut dist = vec![usize::MAX; mesh.n_vertices()];
    dist[centre] = 0;
    let mut queue = std::collections::VecDeque::from([centre]);
    let mut out = vec![];
    while let Some(v) = queue.pop_front() {
        out.push(v);
        if dist[v] == hops {
            continue;
        }
        for &w in &nb[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    out
}

// 6. Discrete maximum principle and its decay on a parabolic family.
fn ahlfors_principle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let meshes = vec![
        (build_disk_mesh(1.0, 0.1).unwrap(), markers(&[("outer", 0.3)])),
        (build_annulus_mesh(1.0, 2.0, 0.1).unwrap(), markers(&[("inner", 1.0), ("outer", -0.5)])),
        (build_halfdisk_mesh(2.0, 0.15).unwrap(), markers(&[("outer", 0.0)])),
    ];
    let mut tested = 0;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut rejected = 0;
    for (mesh, data) in &meshes {
        for _ in 0..10 {
            let f = ScalarField { values: (0..mesh.n_vertices()).map(|_| -rng.random_range(0.1..1.0)).collect() };
            let u = solve_mixed_bvp(mesh, data, Some(&f)).unwrap();
            let rep = is_weak_neumann_subsolution(mesh, &u, 0.0).unwrap();
            if !rep.pass {
                rejected += 1;
                continue;
            }
            for _ in 0..5 {
                let centre = rng.random_range(0..mesh.n_vertices());
                let d = graph_ball(mesh, centre, rng.random_range(1..12));
                let b0 = discrete_boundary0(mesh, &d);
                if b0.is_empty() {
                    continue;
                }
                let a = ahlfors_report(mesh, &u, &d, &b0).unwrap();
                worst_gap = worst_gap.max(a.gap);
                tested += 1;
            }
        }
    }
    // decay on the flat half-plane with true boundary on the line and the inner half-circle
    let fam = ConformalFamily::flat_half_plane(32, 5, InnerCondition::Wall).unwrap();
    let r1 = fam.radii[0];
    let mut gaps = Vec::new();
    let mut osc = 0.0;
    let mut sub_ok = true;
    for j in 1..=5 {
        let m = fam.member(j).unwrap();
        let u = classify::d_harmonic_measure(&m.mesh, &m.outer_marker).unwrap();
        sub_ok &= is_weak_neumann_subsolution(&m.mesh, &u, 1e-10).unwrap().pass;
        osc = u.max() - u.min();
        let d: Vec<usize> = (0..m.mesh.n_vertices()).filter(|&v| m.mesh.vertex(v)[0].hypot(m.mesh.vertex(v)[1]) <= r1 * (1.0 + 1e-9)).collect();
        let b: Vec<usize> = d.iter().copied().filter(|&v| m.mesh.is_d1_vertex(v)).collect();
        gaps.push(ahlfors_report(&m.mesh, &u, &d, &b).unwrap().gap);
    }
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    let last = *gaps.last().unwrap();
    let pass = worst_gap <= 0.0 && rejected == 0 && tested > 0 && sub_ok && monotone && last <= 1e-2 * osc;
    outcome(
        pass,
        format!(
            "{tested} (field, D) pairs, max gap {worst_gap:e} (<= 0), rejected subsolutions {rejected}; family gaps {} monotone {monotone}, final {last:.2e} <= 1e-2 x oscillation {osc:.3}",
            gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn random_field(mesh: &MeshManifold, rng: &mut ChaCha8Rng) -> VectorField {
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    VectorField { vectors: (0..mesh.n_triangles()).map(|_| [scale * rng.random_range(-1.0..1.0), scale * rng.random_range(-1.0..1.0)]).collect() }
}

fn bump(r: f64) -> f64 {
    let x = (r - 1.5) / 0.3;
    if x.abs() < 1.0 {
        (0.5 * PI * x).cos().powi(2)
    } else {
        0.0
    }
}

// 7. Discrete Stokes identity and the hyperbolic counterexample.
fn stokes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let h = rng.random_range(0.08..0.4);
        let mesh = match i % 4 {
            0 => build_disk_mesh(rng.random_range(0.5..2.0), h).unwrap(),
            1 => build_annulus_mesh(1.0, rng.random_range(1.5..3.0), h).unwrap(),
            2 => build_halfdisk_mesh(rng.random_range(0.5..2.0), h).unwrap(),
            _ => ConformalFamily::hyperbolic_half_plane(rng.random_range(8..24), 2, InnerCondition::Wall).unwrap().member(2).unwrap().mesh,
        };
        let x = random_field(&mesh, &mut rng);
        worst = worst.max(stokes_residual(&mesh, &x).unwrap() / stokes_scale(&mesh, &x));
    }
    let fam = ConformalFamily::with_aspect(
        "hyperbolic half-plane",
        build_model(WarpKind::Hyperbolic, &[], 2, 0.5).unwrap(),
        1.0,
        (1..=6).map(|j| 1.0 + j as f64).collect(),
        64,
        InnerCondition::Wall,
        0.25,
    )
    .unwrap();
    let source = |mesh: &MeshManifold| -> ScalarField {
        ScalarField {
            values: (0..mesh.n_vertices())
                .map(|v| {
                    if mesh.is_boundary_vertex(v) {
                        return 0.0;
                    }
                    let p = mesh.vertex(v);
                    bump(p[0].hypot(p[1])) * p[1].atan2(p[0]).sin().powi(2)
                })
                .collect(),
        }
    };
    let gen = |m: &parlab::geometry::FamilyMember| -> Result<VectorField, calculus::CalculusError> {
        let u = solve_neumann_poisson(&m.mesh, &source(&m.mesh), &m.outer_marker)?;
        Ok(VectorField::gradient(&m.mesh, &u))
    };
    let study = stokes_limit_study(&fam, 6, &gen).unwrap();
    let radial = simpson(|r| bump(r) * r.sinh(), 1.2, 1.8, Tolerance::default()).unwrap();
    let integral_f = 0.5 * PI * radial;
    let rel = (study.final_gap + integral_f).abs() / integral_f;
    let d1 = study.rows.last().unwrap().d1_flux;
    let pass = worst <= 1e-12 && study.verdict == StokesVerdict::StokesFails && rel <= 0.05;
    outcome(
        pass,
        format!(
            "max residual/scale {worst:.1e} over 100 fields (<= 1e-12); witness gap {:.5} vs -∫f = {:.5} (rel {rel:.2e} <= 5e-2), d1 flux {d1:.1e}, ∫|X|² {:.5} -> {:.5}, verdict {:?}",
            study.final_gap,
            -integral_f,
            study.rows[study.rows.len() - 2].l2_norm,
            study.rows.last().unwrap().l2_norm,
            study.verdict
        ),
    )
}

fn cap(rho: f64, h: f64) -> (MeshManifold, graph::CmcSolveResult, f64) {
    let m = build_disk_mesh(rho, h).unwrap();
    let r = solve_cmc_dirichlet(&m, 1.0, &markers(&[("outer", 0.0)]), CmcOptions::default()).unwrap();
    let err = m
        .vertices()
        .iter()
        .zip(&r.u.values)
        .map(|(p, u)| (u - ((1.0 - p[0] * p[0] - p[1] * p[1]).max(0.0).sqrt() - (1.0 - rho * rho).sqrt())).abs())
        .fold(0.0, f64::max);
    (m, r, err)
}

const RHOS: [f64; 4] = [0.5, 0.7, 0.9, 0.97];

// 8. Constant mean curvature caps and the height estimate.
fn height_estimate() -> Outcome {
    let runs: Vec<_> = RHOS.par_iter().map(|&rho| cap(rho, 0.02)).collect();
    let mut detail = Vec::new();
    let mut pass = true;
    let mut slacks = Vec::new();
    for ((m, r, err), rho) in runs.iter().zip(RHOS) {
        let converged = r.status == CmcStatus::Converged;
        let g = GraphSurface::new(m.clone(), r.u.clone()).unwrap();
        let rep = height_estimate_check(&g, 1.0).unwrap();
        let in_slab = rep.min_u >= 0.0 && rep.max_u <= 1.0;
        pass &= converged && *err <= 5e-3 && in_slab;
        slacks.push(rep.slack);
        detail.push(format!("rho {rho}: err {err:.2e}, u in [{:.1e}, {:.4}]", rep.min_u, rep.max_u));
    }
    let shrinking = slacks.windows(2).all(|w| w[1] < w[0]);
    let big = build_disk_mesh(1.2, 0.02).unwrap();
    let r = solve_cmc_dirichlet(&big, 1.0, &markers(&[("outer", 0.0)]), CmcOptions::default()).unwrap();
    let diverged = r.status == CmcStatus::Diverged && r.newton_iterations <= 200;
    pass &= shrinking && diverged;
    outcome(
        pass,
        format!(
            "{}; slack {slacks:.4?} decreasing {shrinking}; rho 1.2: {:?} after {} Newton steps ({})",
            detail.join("; "),
            r.status,
            r.newton_iterations,
            r.message
        ),
    )
}

// 9. Analytic Jacobian against central differences.
fn jacobian() -> Outcome {
    let m = build_disk_mesh(0.9, 0.15).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u: Vec<f64> = m
        .vertices()
        .iter()
        .map(|p| (1.0 - p[0] * p[0] - p[1] * p[1]).sqrt() + 0.1 * rng.random_range(-1.0..1.0))
        .collect();
    let jac = cmc_jacobian(&m, &u);
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let v: Vec<f64> = (0..u.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let plus: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - eps * b).collect();
        let (rp, rm) = (cmc_residual(&m, &plus, 1.0), cmc_residual(&m, &minus, 1.0));
        let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        let jv = jac.matvec(&v);
        let num: f64 = jv.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let den: f64 = jv.iter().map(|a| a * a).sum::<f64>().sqrt();
        worst = worst.max(num / den);
    }
    outcome(worst <= 1e-6, format!("max relative mismatch {worst:.2e} over 20 directions (<= 1e-6)"))
}

// 10. Volume comparison between the graph and its base.
fn li_wang() -> Outcome {
    let runs: Vec<_> = RHOS
        .par_iter()
        .map(|&rho| {
            let (m, r, _) = cap(rho, 0.02);
            let g = GraphSurface::new(m, r.u).unwrap();
            let radii: Vec<f64> = (1..=10).map(|k| rho * k as f64 / 10.0).collect();
            li_wang_check(&g, 0, &radii, 1.0).unwrap()
        })
        .collect();
    let violations: usize = runs.iter().map(|r| r.violations).sum();
    let tight = runs
        .iter()
        .flat_map(|r| r.rows.iter().map(|row| row.graph_volume / row.rhs))
        .fold(0.0, f64::max);
    outcome(violations == 0, format!("{} radii, {violations} violations; largest lhs/rhs {tight:.3}", runs.len() * 10))
}

fn halfdisk_subsolution(radius: f64, h_curv: f64) -> (MeshManifold, ScalarField) {
    let m = build_halfdisk_mesh(radius, radius / 40.0).unwrap();
    let opts = CmcOptions { neumann: true, ..Default::default() };
    let fixed: Vec<Option<f64>> = (0..m.n_vertices())
        .map(|v| {
            m.is_d0_vertex(v).then(|| {
                let p = m.vertex(v);
                0.2 * radius * (p[1].atan2(p[0])).cos()
            })
        })
        .collect();
    let r = solve_cmc_fixed(&m, h_curv, &fixed, opts).unwrap();
    assert_eq!(r.status, CmcStatus::Converged, "{}", r.message);
    (m, r.u)
}

// 11. Growth of the weighted energy of subsolutions.
fn liouville() -> Outcome {
    let mut checked = 0;
    let mut held = 0;
    let mut integrated_fail = 0;
    let mut exceptions = Vec::new();
    for &radius in &[2.0, 4.0, 8.0] {
        for &hc in &[0.0, -0.1] {
            let (m, u) = halfdisk_subsolution(radius, hc);
            let radii: Vec<f64> = (1..=20).map(|k| radius * (0.05 + 0.045 * k as f64)).collect();
            let rep = liouville_probe(&m, &u, 0, &radii).unwrap();
            for row in &rep.rows {
                if let Some(h) = row.holds {
                    checked += 1;
                    held += h as usize;
                }
                if row.integrated_holds == Some(false) {
                    integrated_fail += 1;
                }
            }
            exceptions.extend(rep.exceptions.iter().map(|&(r, d)| format!("R={r:.2}: short by {d:.2e}")));
        }
    }
    let frac = held as f64 / checked as f64;
    outcome(
        frac >= 0.95,
        format!(
            "inequality holds at {held}/{checked} radii ({:.1}% >= 95%); integrated bound failures {integrated_fail}; exceptions [{}]",
            100.0 * frac,
            exceptions.join(", ")
        ),
    )
}

// 12. Slice theorem suite.
fn slice_suite() -> Outcome {
    let parabolic =
        capacity_decay_test(&ConformalFamily::flat_half_plane(32, 8, InnerCondition::Plate).unwrap(), 8).unwrap().verdict == Verdict::Parabolic;
    let mut cases: Vec<(String, MeshManifold, ScalarField)> = Vec::new();
    let hd = build_halfdisk_mesh(2.0, 0.1).unwrap();
    cases.push(("zero".into(), hd.clone(), ScalarField::constant(&hd, 0.0)));
    for &radius in &[2.0, 4.0] {
        for &hc in &[0.0, -0.2] {
            let (m, u) = halfdisk_subsolution(radius, hc);
            cases.push((format!("R={radius} H={hc} neumann"), m, u));
        }
        let m = build_halfdisk_mesh(radius, radius / 30.0).unwrap();
        let fixed: Vec<Option<f64>> = (0..m.n_vertices())
            .map(|v| {
                let p = m.vertex(v);
                if m.is_d1_vertex(v) {
                    Some(0.0)
                } else if m.is_d0_vertex(v) {
                    Some(0.3 * p[1].atan2(p[0]).sin().max(0.0))
                } else {
                    None
                }
            })
            .collect();
        let r = solve_cmc_fixed(&m, 0.0, &fixed, CmcOptions::default()).unwrap();
        cases.push((format!("R={radius} minimal, zero on wall"), m, r.u));
    }
    let mut violations = Vec::new();
    let mut applicable = 0;
    for (name, m, u) in &cases {
        let g = GraphSurface::new(m.clone(), u.clone()).unwrap();
        match slice_report(&g, parabolic) {
            Ok(r) => {
                applicable += r.applicable as usize;
                if !r.holds {
                    violations.push(format!("{name}: deficit {:.2e} > {:.2e}", r.constancy_deficit, r.tol_slice));
                }
            }
            Err(e) => violations.push(format!("{name}: unexpected {e}")),
        }
    }
    let mut gate_ok = 0;
    let (m, r, _) = cap(0.9, 0.05);
    if matches!(slice_report(&GraphSurface::new(m, r.u).unwrap(), parabolic), Err(GraphError::HypothesisViolation(_))) {
        gate_ok += 1;
    }
    let hd = build_halfdisk_mesh(0.8, 0.02).unwrap();
    let opts = CmcOptions { neumann: true, ..Default::default() };
    let pos = solve_cmc_dirichlet(&hd, 1.0, &markers(&[("outer", 0.0)]), opts).unwrap();
    assert_eq!(pos.status, CmcStatus::Converged, "{}", pos.message);
    if matches!(slice_report(&GraphSurface::new(hd, pos.u).unwrap(), parabolic), Err(GraphError::HypothesisViolation(_))) {
        gate_ok += 1;
    }
    outcome(
        parabolic && violations.is_empty() && gate_ok == 2 && applicable > 0,
        format!(
            "base family parabolic: {parabolic}; {} cases, {applicable} with verified hypotheses, violations [{}]; sign gate rejected {gate_ok}/2",
            cases.len(),
            violations.join("; ")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("annulus condenser capacity", annulus_condenser),
        ("equilibrium potential regularity", potential_regularity),
        ("capacitor limit", capacitor_limit),
        ("parabolicity three-way consistency", parabolicity_consistency),
        ("harmonic-measure identity", harmonic_measure),
        ("discrete maximum principle", ahlfors_principle),
        ("discrete Stokes identity", stokes),
        ("CMC height estimate", height_estimate),
        ("Newton Jacobian", jacobian),
        ("graph volume comparison", li_wang),
        ("Liouville probe", liouville),
        ("slice suite", slice_suite),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let t = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        failed += !o.pass as usize;
        println!(
            "criterion {:>2} {} {name} [{:.1}s]: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

