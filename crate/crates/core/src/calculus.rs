//! Weak calculus on meshes: Laplacian and divergence pairings against hat
//! functions, maximum-principle reports, flux balances and limit studies
//! along exhaustions.

use crate::geometry::{EdgeLabel, FamilyMember, GeometryError, MeshFamily, MeshManifold, ScalarField, VectorField};
use crate::potential::PotentialError;
use crate::table::Table;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalculusError {
    #[error(transparent)]
    MeshMismatch(#[from] GeometryError),
    #[error("boundary vertex set is empty")]
    EmptyBoundary,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// `-∫ <grad u, grad φ> = -φ^T S u`.
pub fn weak_laplacian_pairing(mesh: &MeshManifold, u: &ScalarField, phi: &ScalarField) -> Result<f64, CalculusError> {
    u.check(mesh)?;
    phi.check(mesh)?;
    let su = mesh.apply_stiffness(&u.values);
    Ok(-phi.values.iter().zip(&su).map(|(a, b)| a * b).sum::<f64>())
}

/// Hat function centred at vertex `i`.
pub fn hat(mesh: &MeshManifold, i: usize) -> ScalarField {
    let mut v = vec![0.0; mesh.n_vertices()];
    v[i] = 1.0;
    ScalarField { values: v }
}

/// Centres of admissible test hats: every vertex not on the artificial
/// boundary.
pub fn test_vertices(mesh: &MeshManifold) -> Vec<usize> {
    (0..mesh.n_vertices()).filter(|&v| !mesh.is_d0_vertex(v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakPairingReport {
    pub worst_vertex: Option<usize>,
    pub worst_value: f64,
    pub pass: bool,
    pub tolerance: f64,
    pub tested: usize,
}

/// Pairs `u` with every admissible hat; `u` is a weak Neumann subsolution
/// when all pairings are `>= -tol`.
pub fn is_weak_neumann_subsolution(mesh: &MeshManifold, u: &ScalarField, tol: f64) -> Result<WeakPairingReport, CalculusError> {
    u.check(mesh)?;
    let su = mesh.apply_stiffness(&u.values);
    let tested = test_vertices(mesh);
    let mut worst_vertex = None;
    let mut worst_value = f64::INFINITY;
    for &i in &tested {
        let v = -su[i];
        if v < worst_value {
            worst_value = v;
            worst_vertex = Some(i);
        }
    }
    Ok(WeakPairingReport { worst_vertex, worst_value, pass: worst_value >= -tol, tolerance: tol, tested: tested.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AhlforsReport {
    pub sup_d: f64,
    pub sup_boundary0: f64,
    pub gap: f64,
    pub argmax: usize,
}

/// `sup_D u - sup_{∂₀D} u` over vertex values.
pub fn ahlfors_report(mesh: &MeshManifold, u: &ScalarField, d: &[usize], boundary0: &[usize]) -> Result<AhlforsReport, CalculusError> {
    u.check(mesh)?;
    if boundary0.is_empty() {
        return Err(CalculusError::EmptyBoundary);
    }
    if d.is_empty() {
        return Err(CalculusError::PreconditionViolated("D is empty".into()));
    }
    let argmax = *d.iter().max_by(|&&a, &&b| u.values[a].total_cmp(&u.values[b])).unwrap();
    let sup_d = u.values[argmax];
    let sup_boundary0 = boundary0.iter().map(|&v| u.values[v]).fold(f64::NEG_INFINITY, f64::max);
    Ok(AhlforsReport { sup_d, sup_boundary0, gap: sup_d - sup_boundary0, argmax })
}

/// As [`ahlfors_report`], with `∂₀D` the vertices of `D` carrying `marker`.
pub fn ahlfors_report_marker(mesh: &MeshManifold, u: &ScalarField, d: &[usize], marker: &str) -> Result<AhlforsReport, CalculusError> {
    let mut inside = vec![false; mesh.n_vertices()];
    for &v in d {
        inside[v] = true;
    }
    let b: Vec<usize> = mesh.vertices_with_marker(marker).into_iter().filter(|&v| inside[v]).collect();
    ahlfors_report(mesh, u, d, &b)
}

/// Discrete `∂₀D` of a vertex set: members on the artificial boundary of
/// the mesh or with a neighbour outside `D`.
pub fn discrete_boundary0(mesh: &MeshManifold, d: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; mesh.n_vertices()];
    for &v in d {
        inside[v] = true;
    }
    let nb = mesh.neighbours();
    let mut out: Vec<usize> = d
        .iter()
        .copied()
        .filter(|&v| mesh.is_d0_vertex(v) || nb[v].iter().any(|&w| !inside[w]))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Outward flux of a frame vector through each local edge of a triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFluxes {
    pub per_triangle: Vec<[f64; 3]>,
}

impl EdgeFluxes {
    pub fn from_field(mesh: &MeshManifold, x: &VectorField) -> Self {
        EdgeFluxes {
            per_triangle: (0..mesh.n_triangles())
                .map(|t| [0, 1, 2].map(|k| mesh.edge_flux(t, k, x.vectors[t])))
                .collect(),
        }
    }
}

/// `(div X, φ) = -∫ <X, grad φ> + ∫_{D1} φ <X, ν>`, the boundary term with
/// exact P0 flux and the trapezoid rule on `φ`.
pub fn weak_divergence_pairing(mesh: &MeshManifold, x: &VectorField, phi: &ScalarField) -> Result<f64, CalculusError> {
    x.check(mesh)?;
    phi.check(mesh)?;
    let mut total = 0.0;
    for t in 0..mesh.n_triangles() {
        let d = mesh.differential(t, &phi.values);
        let xv = x.vectors[t];
        total -= mesh.area(t) * (d[0] * xv[0] + d[1] * xv[1]);
    }
    Ok(total + boundary_term(mesh, x, phi, EdgeLabel::D1))
}

fn boundary_term(mesh: &MeshManifold, x: &VectorField, phi: &ScalarField, label: EdgeLabel) -> f64 {
    let mut total = 0.0;
    for (i, be) in mesh.boundary_edges().iter().enumerate() {
        if be.label != label {
            continue;
        }
        let (t, k) = mesh.boundary_slot(i);
        let avg = 0.5 * (phi.values[be.v[0]] + phi.values[be.v[1]]);
        total += mesh.edge_flux(t, k, x.vectors[t]) * avg;
    }
    total
}

/// `∫_{edges with label} <X, ν>`.
pub fn boundary_flux(mesh: &MeshManifold, x: &VectorField, label: EdgeLabel) -> f64 {
    let one = ScalarField { values: vec![1.0; mesh.n_vertices()] };
    boundary_term(mesh, x, &one, label)
}

/// `∫_{edges with marker} <X, ν>`.
pub fn marker_flux(mesh: &MeshManifold, x: &VectorField, marker: &str) -> f64 {
    let mut total = 0.0;
    for (i, be) in mesh.boundary_edges().iter().enumerate() {
        if be.marker == marker {
            let (t, k) = mesh.boundary_slot(i);
            total += mesh.edge_flux(t, k, x.vectors[t]);
        }
    }
    total
}

/// `‖X‖_∞ · (total edge length)`.
pub fn stokes_scale(mesh: &MeshManifold, x: &VectorField) -> f64 {
    x.sup_norm(mesh) * mesh.total_edge_length()
}

/// `|(div X, 1)_interior - ∫_{∂} <X, ν>|`, with the interior divergence
/// measure summed from the normal-flux jumps across interior edges.
pub fn stokes_residual(mesh: &MeshManifold, x: &VectorField) -> Result<f64, CalculusError> {
    x.check(mesh)?;
    Ok(stokes_residual_fluxes(mesh, &EdgeFluxes::from_field(mesh, x)))
}

/// [`stokes_residual`] from a table of per-triangle edge fluxes. Tables not
/// coming from a P0 field need not balance.
pub fn stokes_residual_fluxes(mesh: &MeshManifold, f: &EdgeFluxes) -> f64 {
    let mut interior = 0.0;
    let mut boundary = 0.0;
    for e in 0..mesh.n_edges() {
        let (t1, t2) = mesh.edge_triangles(e);
        let k1 = mesh.triangle_edges(t1).iter().position(|&x| x == e).unwrap();
        match t2 {
            Some(t2) => {
                let k2 = mesh.triangle_edges(t2).iter().position(|&x| x == e).unwrap();
                interior -= f.per_triangle[t1][k1] + f.per_triangle[t2][k2];
            }
            None => boundary += f.per_triangle[t1][k1],
        }
    }
    (interior - boundary).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StokesVerdict {
    /// The artificial-boundary leak vanishes: the global identity holds.
    MatchesTheorem,
    /// `∫|X|²` stabilizes while the leak stays away from zero.
    StokesFails,
    /// `∫|X|²` keeps growing; the field is not square integrable.
    NotL2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StokesRow {
    pub j: usize,
    pub interior: f64,
    pub d1_flux: f64,
    pub d0_leak: f64,
    pub l2_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StokesLimitReport {
    pub rows: Vec<StokesRow>,
    pub verdict: StokesVerdict,
    /// `interior - d1_flux` at the last member.
    pub final_gap: f64,
}

/// Relative change of `∫|X|²` between the last two members below which the
/// energy counts as stabilized.
pub const L2_STABLE: f64 = 0.05;
/// Leak relative to the largest interior term below which it counts as zero.
pub const LEAK_ZERO: f64 = 1e-8;

impl StokesLimitReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["j", "interior", "d1_flux", "d0_leak", "l2_norm", "verdict"]);
        for r in &self.rows {
            t.push(vec![
                r.j.into(),
                r.interior.into(),
                r.d1_flux.into(),
                r.d0_leak.into(),
                r.l2_norm.into(),
                format!("{:?}", self.verdict).into(),
            ]);
        }
        t
    }
}

/// Interior divergence (paired with the cut-off equal to one off the
/// artificial boundary), true-boundary flux, artificial-boundary leak and
/// `∫|X|²` along an exhaustion.
pub fn stokes_limit_study(
    family: &dyn MeshFamily,
    j_max: usize,
    generator: &dyn Fn(&FamilyMember) -> Result<VectorField, CalculusError>,
) -> Result<StokesLimitReport, CalculusError> {
    let mut rows = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let m = family.member(j)?;
        let mesh = &m.mesh;
        let x = generator(&m)?;
        x.check(mesh)?;
        let cutoff = ScalarField { values: (0..mesh.n_vertices()).map(|v| if mesh.is_d0_vertex(v) { 0.0 } else { 1.0 }).collect() };
        rows.push(StokesRow {
            j,
            interior: weak_divergence_pairing(mesh, &x, &cutoff)?,
            d1_flux: boundary_flux(mesh, &x, EdgeLabel::D1),
            d0_leak: boundary_flux(mesh, &x, EdgeLabel::D0),
            l2_norm: x.l2_norm_sq(mesh),
        });
    }
    let last = *rows.last().ok_or_else(|| CalculusError::PreconditionViolated("empty study".into()))?;
    let scale = rows.iter().map(|r| r.interior.abs().max(r.d1_flux.abs())).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let leak_vanishes = last.d0_leak.abs() <= LEAK_ZERO * scale;
    let l2_stable = rows.len() >= 2 && {
        let prev = rows[rows.len() - 2].l2_norm;
        (last.l2_norm - prev).abs() <= L2_STABLE * last.l2_norm.abs().max(f64::MIN_POSITIVE)
    };
    let verdict = if leak_vanishes {
        StokesVerdict::MatchesTheorem
    } else if l2_stable {
        StokesVerdict::StokesFails
    } else {
        StokesVerdict::NotL2
    };
    Ok(StokesLimitReport { rows, verdict, final_gap: last.interior - last.d1_flux })
}

/// One truncation for [`div_inequality_report`].
#[derive(Debug, Clone)]
pub struct DivInequalityCase {
    pub j: usize,
    pub mesh: MeshManifold,
    pub x: VectorField,
    pub f: ScalarField,
    /// Hat centres for the weak inequality.
    pub tested: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivInequalityRow {
    pub j: usize,
    pub integral_f: f64,
    pub d1_flux: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivInequalityReport {
    pub rows: Vec<DivInequalityRow>,
    /// Sign of `∫f - ∫_{∂₁}<X,ν>` at the last truncation.
    pub final_sign: f64,
    pub final_integral_f: f64,
}

impl DivInequalityReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["j", "integral_f", "d1_flux", "holds"]);
        for r in &self.rows {
            t.push(vec![r.j.into(), r.integral_f.into(), r.d1_flux.into(), r.holds.into()]);
        }
        t
    }
}

/// Checks `<X, ν> <= 0` on every true-boundary edge and `(div X, hat_i) >=
/// ∫ f hat_i` at every tested vertex, then compares `∫f` with the
/// true-boundary flux per truncation.
pub fn div_inequality_report(cases: &[DivInequalityCase], tol: f64) -> Result<DivInequalityReport, CalculusError> {
    let mut rows = Vec::with_capacity(cases.len());
    for c in cases {
        let mesh = &c.mesh;
        c.x.check(mesh)?;
        c.f.check(mesh)?;
        let scale = stokes_scale(mesh, &c.x).max(f64::MIN_POSITIVE);
        for (i, be) in mesh.boundary_edges().iter().enumerate() {
            if be.label == EdgeLabel::D1 {
                let (t, k) = mesh.boundary_slot(i);
                let flux = mesh.edge_flux(t, k, c.x.vectors[t]);
                if flux > tol * scale {
                    return Err(CalculusError::PreconditionViolated(format!(
                        "outward flux {flux:e} through true-boundary edge {:?} at member {}",
                        be.v, c.j
                    )));
                }
            }
        }
        let mass = mesh.lumped_mass();
        let div = weak_divergence_hats(mesh, &c.x);
        for &i in &c.tested {
            let lhs = div[i];
            let rhs = mass[i] * c.f.values[i];
            if lhs < rhs - tol * scale {
                return Err(CalculusError::PreconditionViolated(format!(
                    "weak inequality fails at vertex {i} of member {}: (div X, hat) = {lhs:e} < {rhs:e}",
                    c.j
                )));
            }
        }
        let integral_f: f64 = mass.iter().zip(&c.f.values).map(|(a, b)| a * b).sum();
        let d1_flux = boundary_flux(mesh, &c.x, EdgeLabel::D1);
        rows.push(DivInequalityRow { j: c.j, integral_f, d1_flux, holds: integral_f <= d1_flux + tol * scale });
    }
    let last = rows.last().ok_or_else(|| CalculusError::PreconditionViolated("no truncations".into()))?;
    Ok(DivInequalityReport {
        final_sign: (last.integral_f - last.d1_flux).signum(),
        final_integral_f: last.integral_f,
        rows,
    })
}

/// `(div X, hat_i)` for every vertex at once.
pub fn weak_divergence_hats(mesh: &MeshManifold, x: &VectorField) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let xv = x.vectors[t];
        let a = mesh.area(t);
        // differentials of the three hats in the edge frame
        let dh = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        for k in 0..3 {
            out[tri[k]] -= a * (dh[k][0] * xv[0] + dh[k][1] * xv[1]);
        }
    }
    for (i, be) in mesh.boundary_edges().iter().enumerate() {
        if be.label == EdgeLabel::D1 {
            let (t, k) = mesh.boundary_slot(i);
            let flux = mesh.edge_flux(t, k, x.vectors[t]);
            out[be.v[0]] += 0.5 * flux;
            out[be.v[1]] += 0.5 * flux;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_annulus_mesh, build_disk_mesh, BoundaryEdge};
    use crate::potential::{condenser_capacity, Condenser};

    fn unit_square_d1() -> MeshManifold {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.5, 0.0]];
        let t = vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        let b = (0..4).map(|i| BoundaryEdge::new(i, (i + 1) % 4, EdgeLabel::D1, "wall")).collect();
        MeshManifold::new(2, v, t, b, None).unwrap()
    }

    #[test]
    fn energy_pairing_is_negative() {
        let m = build_disk_mesh(1.0, 0.3).unwrap();
        let u = ScalarField::from_fn(&m, |p| p[0] * p[0] + p[1]);
        let e = weak_laplacian_pairing(&m, &u, &u).unwrap();
        assert!(e < 0.0);
    }

    #[test]
    fn linear_fields_are_harmonic_inside() {
        let m = build_disk_mesh(1.0, 0.2).unwrap();
        let u = ScalarField::from_fn(&m, |p| 2.0 * p[0] - p[1]);
        for i in test_vertices(&m) {
            assert!(weak_laplacian_pairing(&m, &u, &hat(&m, i)).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn constant_field_has_no_net_flux() {
        let m = unit_square_d1();
        let x = VectorField::from_chart(&m, |_| [0.3, -1.2]);
        let one = ScalarField::constant(&m, 1.0);
        assert!(weak_divergence_pairing(&m, &x, &one).unwrap().abs() < 1e-14);
        assert!(weak_divergence_pairing(&m, &VectorField::zero(&m), &one).unwrap() == 0.0);
    }

    #[test]
    fn divergence_of_gradient_matches_laplacian() {
        let m = unit_square_d1();
        let u = ScalarField::from_fn(&m, |p| p[0] * p[0] - 0.5 * p[1]);
        let x = VectorField::gradient(&m, &u);
        for i in 0..m.n_vertices() {
            let h = hat(&m, i);
            let lhs = weak_divergence_pairing(&m, &x, &h).unwrap();
            let rhs = weak_laplacian_pairing(&m, &u, &h).unwrap() + boundary_term(&m, &x, &h, EdgeLabel::D1);
            assert!((lhs - rhs).abs() < 1e-12);
            assert!((weak_divergence_hats(&m, &x)[i] - lhs).abs() < 1e-12);
        }
    }

    #[test]
    fn corrupted_flux_table_breaks_balance() {
        let m = build_annulus_mesh(1.0, 2.0, 0.3).unwrap();
        let x = VectorField::from_chart(&m, |t| [t as f64 * 0.01, 1.0]);
        let mut f = EdgeFluxes::from_field(&m, &x);
        assert!(stokes_residual_fluxes(&m, &f) <= 1e-12 * stokes_scale(&m, &x));
        f.per_triangle[5][1] += 0.5;
        assert!(stokes_residual_fluxes(&m, &f) > 0.4);
    }

    #[test]
    fn potential_is_supersolution_not_subsolution() {
        let m = build_annulus_mesh(1.0, 2.0, 0.2).unwrap();
        let c = Condenser::new(&m, m.vertices_with_marker("inner"), "outer").unwrap();
        let u = condenser_capacity(&m, &c).unwrap().potential;
        let neg = ScalarField { values: u.values.iter().map(|v| -v).collect() };
        assert!(is_weak_neumann_subsolution(&m, &neg, 1e-10).unwrap().pass);
        let r = ahlfors_report(&m, &u, &(0..m.n_vertices()).collect::<Vec<_>>(), &m.vertices_with_label(EdgeLabel::D0)).unwrap();
        assert!(r.gap <= 0.0);
        assert!(matches!(ahlfors_report(&m, &u, &[0], &[]), Err(CalculusError::EmptyBoundary)));
    }

    #[test]
    fn flux_precondition_is_enforced() {
        let m = unit_square_d1();
        let x = VectorField::from_chart(&m, |_| [1.0, 0.0]);
        let case = DivInequalityCase { j: 1, f: ScalarField::constant(&m, 0.0), tested: vec![], x, mesh: m };
        assert!(matches!(div_inequality_report(&[case], 1e-12), Err(CalculusError::PreconditionViolated(_))));
    }
}
