use parlab::calculus::{div_inequality_report, stokes_limit_study, test_vertices, CalculusError, DivInequalityCase, StokesVerdict};
use parlab::classify::{d_parabolicity_test, implication_check, FamilyCase, Verdict};
use parlab::geometry::{ConformalFamily, FamilyMember, InnerCondition, MeshFamily, ScalarField, VectorField};
use parlab::potential::{condenser_capacity, Condenser};

fn radial_gradient(m: &FamilyMember, f: impl Fn(f64) -> f64) -> Result<VectorField, CalculusError> {
    let u = ScalarField::from_fn(&m.mesh, |p| f(p[0].hypot(p[1])));
    Ok(VectorField::gradient(&m.mesh, &u))
}

#[test]
fn radial_unit_field_is_not_square_integrable() {
    let fam = ConformalFamily::flat_plane(32, 5).unwrap();
    let study = stokes_limit_study(&fam, 5, &|m| radial_gradient(m, |r| r)).unwrap();
    assert_eq!(study.verdict, StokesVerdict::NotL2);
    for r in &study.rows {
        assert!(r.d0_leak > 0.0, "{r:?}");
    }
    assert!(study.rows.windows(2).all(|w| w[1].l2_norm > w[0].l2_norm));
}

#[test]
fn compactly_supported_field_matches_the_identity() {
    let fam = ConformalFamily::flat_half_plane(32, 4, InnerCondition::Plate).unwrap();
    let bump = |r: f64| if (1.5..3.0).contains(&r) { ((r - 1.5) * (3.0 - r)).powi(2) } else { 0.0 };
    let study = stokes_limit_study(&fam, 4, &|m| radial_gradient(m, bump)).unwrap();
    assert_eq!(study.verdict, StokesVerdict::MatchesTheorem);
    let scale = study.rows.iter().map(|r| r.interior.abs().max(r.d1_flux.abs())).fold(1e-300, f64::max);
    assert!(study.final_gap.abs() <= 1e-10 * scale.max(1.0), "{:?}", study.rows);
    assert_eq!(study.table().rows.len(), 4);
}

#[test]
fn capacity_flux_vanishes_along_a_parabolic_exhaustion() {
    let fam = ConformalFamily::flat_half_plane(32, 8, InnerCondition::Plate).unwrap();
    let cases: Vec<DivInequalityCase> = (1..=8)
        .map(|j| {
            let m = fam.member(j).unwrap();
            let c = Condenser::new(&m.mesh, m.k.clone(), &m.outer_marker).unwrap();
            let u = condenser_capacity(&m.mesh, &c).unwrap().potential;
            let su = m.mesh.apply_stiffness(&u.values);
            let mass = m.mesh.lumped_mass();
            let mut f = ScalarField::constant(&m.mesh, 0.0);
            for &i in &m.k {
                f.values[i] = su[i] / mass[i];
            }
            let x = VectorField::gradient(&m.mesh, &u);
            let x = VectorField { vectors: x.vectors.iter().map(|v| [-v[0], -v[1]]).collect() };
            let mut tested = test_vertices(&m.mesh);
            tested.extend(&m.k);
            DivInequalityCase { j, mesh: m.mesh, x, f, tested }
        })
        .collect();
    let rep = div_inequality_report(&cases, 1e-10).unwrap();
    let first = rep.rows[0].integral_f;
    assert!(first > 0.0);
    assert!(rep.rows.windows(2).all(|w| w[1].integral_f < w[0].integral_f));
    assert!(rep.final_integral_f < 1e-2 * first, "{:?}", rep.rows);
    assert_eq!(rep.table().rows.len(), 8);
}

#[test]
fn implication_chain_flags_a_false_label() {
    let flat = ConformalFamily::flat_half_plane(32, 8, InnerCondition::Wall).unwrap();
    let hyp = ConformalFamily::hyperbolic_half_plane(32, 6, InnerCondition::Wall).unwrap();
    let suite = [
        FamilyCase { family: &flat, j_max: 8, label: None },
        FamilyCase { family: &hyp, j_max: 6, label: None },
        FamilyCase { family: &hyp, j_max: 6, label: Some(Verdict::Parabolic) },
    ];
    let rep = implication_check(&suite).unwrap();
    assert_eq!(rep.rows[0].n_verdict, Verdict::Parabolic);
    assert!(rep.rows[0].violations.is_empty(), "{:?}", rep.rows[0]);
    assert_eq!(rep.rows[0].d_verdict, Some(Verdict::Parabolic));
    assert_eq!(rep.rows[1].n_verdict, Verdict::NonParabolic);
    assert!(rep.rows[1].violations.is_empty());
    assert!(!rep.rows[2].violations.is_empty());
    assert_eq!(rep.violation_count(), rep.rows[2].violations.len());
    assert_eq!(d_parabolicity_test(&hyp, 6).unwrap().verdict, Verdict::NonParabolic);
    assert!(hyp.len() >= 6);
}
