//! Element-local projections onto `Q^k`: the (weighted) L² projection and the
//! three Gauss–Radau projections.
//!
//! Each projection is fixed by `(k+1)²` linear conditions per element. The
//! Gauss–Radau families keep interior moments against a reduced space and
//! add edge moments (and, for `Π⁻`, the top-right corner value):
//!
//! | kind   | interior tests         | edge / point conditions                       |
//! |--------|------------------------|-----------------------------------------------|
//! | `Π⁻`   | `Q^{k-1}`              | `P^{k-1}` on right and top edges, corner value |
//! | `Π_x⁺` | `P^{k-1} ⊗ P^k`        | `P^k` on the left edge                         |
//! | `Π_y⁺` | `P^k ⊗ P^{k-1}`        | `P^k` on the bottom edge                       |
//!
//! Conditions are written in reference coordinates; relative to the physical
//! ones every row is scaled by a power of the element widths, so the solution
//! is the same and the local matrix does not depend on the element.

use std::fmt;
use std::sync::Arc;

use crate::basis::{Basis, Edge, ReferenceTables};
use crate::dense::DenseLu;
use crate::error::{LdgError, Result};
use crate::field::{Component, DGField};
use crate::mesh::{Cell, Mesh2D, MeshFamily, MeshParams};
use crate::norms::{convergence_rates, RateMode};
use crate::problem::ScalarField;

/// Which projection to apply.
#[derive(Clone)]
pub enum ProjectionKind {
    /// `(ω Π z, v)_K = (ω z, v)_K` for all `v ∈ Q^k`; `ω` must be positive.
    WeightedL2(ScalarField),
    L2,
    GaussRadauMinus,
    GaussRadauXPlus,
    GaussRadauYPlus,
}

impl fmt::Debug for ProjectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl ProjectionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProjectionKind::WeightedL2(_) => "weighted-l2",
            ProjectionKind::L2 => "l2",
            ProjectionKind::GaussRadauMinus => "gauss-radau-minus",
            ProjectionKind::GaussRadauXPlus => "gauss-radau-x-plus",
            ProjectionKind::GaussRadauYPlus => "gauss-radau-y-plus",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Ok(match s {
            "l2" => ProjectionKind::L2,
            "gauss-radau-minus" | "gr-minus" => ProjectionKind::GaussRadauMinus,
            "gauss-radau-x-plus" | "gr-x-plus" => ProjectionKind::GaussRadauXPlus,
            "gauss-radau-y-plus" | "gr-y-plus" => ProjectionKind::GaussRadauYPlus,
            o => return Err(LdgError::Config(format!("unknown projection `{o}`"))),
        })
    }
}

/// One defining condition, in reference coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Condition {
    /// `∫∫ v L_m(x̂) L_n(ŷ)`
    Volume(usize, usize),
    /// `∫ v(edge(t)) L_n(t) dt`
    EdgeMoment(Edge, usize),
    /// `v(1, 1)`
    Corner,
}

fn conditions(kind: &ProjectionKind, k: usize) -> Vec<Condition> {
    let mut c = Vec::with_capacity((k + 1) * (k + 1));
    let volume = |c: &mut Vec<Condition>, mx: usize, ny: usize| {
        for m in 0..mx {
            for n in 0..ny {
                c.push(Condition::Volume(m, n));
            }
        }
    };
    match kind {
        ProjectionKind::WeightedL2(_) | ProjectionKind::L2 => volume(&mut c, k + 1, k + 1),
        ProjectionKind::GaussRadauMinus => {
            volume(&mut c, k, k);
            c.extend((0..k).map(|n| Condition::EdgeMoment(Edge::Right, n)));
            c.extend((0..k).map(|n| Condition::EdgeMoment(Edge::Top, n)));
            c.push(Condition::Corner);
        }
        ProjectionKind::GaussRadauXPlus => {
            volume(&mut c, k, k + 1);
            c.extend((0..=k).map(|n| Condition::EdgeMoment(Edge::Left, n)));
        }
        ProjectionKind::GaussRadauYPlus => {
            volume(&mut c, k + 1, k);
            c.extend((0..=k).map(|n| Condition::EdgeMoment(Edge::Bottom, n)));
        }
    }
    c
}

/// Applies a condition to a function of reference coordinates.
fn apply(cond: Condition, basis: &Basis, quad: &crate::quadrature::QuadRule, g: &dyn Fn(f64, f64) -> f64) -> f64 {
    match cond {
        Condition::Volume(m, n) => {
            let mut s = 0.0;
            for (&xa, &wa) in quad.nodes.iter().zip(&quad.weights) {
                let lx = basis.eval_1d(xa)[m];
                for (&yb, &wb) in quad.nodes.iter().zip(&quad.weights) {
                    s += wa * wb * lx * basis.eval_1d(yb)[n] * g(xa, yb);
                }
            }
            s
        }
        Condition::EdgeMoment(edge, n) => quad
            .nodes
            .iter()
            .zip(&quad.weights)
            .map(|(&t, &w)| {
                let (x, y) = edge.point(t);
                w * basis.eval_1d(t)[n] * g(x, y)
            })
            .sum(),
        Condition::Corner => g(1.0, 1.0),
    }
}

/// Projected scalar field, one `(k+1)²` block per element.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected {
    pub basis: Basis,
    pub nx: usize,
    pub ny: usize,
    pub coeffs: Vec<f64>,
}

impl Projected {
    #[inline]
    pub fn block(&self, e: usize) -> &[f64] {
        let nb = self.basis.size();
        &self.coeffs[e * nb..(e + 1) * nb]
    }

    /// Writes the coefficients into one component of a full field.
    pub fn write_into(&self, field: &mut DGField, c: Component) {
        assert_eq!((field.dofs.nx, field.dofs.ny, field.dofs.nb), (self.nx, self.ny, self.basis.size()));
        for e in 0..self.nx * self.ny {
            field.block_mut(e, c).copy_from_slice(self.block(e));
        }
    }
}

/// Builds the local matrix rows `F_c(φ_a)` for the given conditions.
fn local_matrix(conds: &[Condition], basis: &Basis, tab: &ReferenceTables, weight: Option<&dyn Fn(f64, f64) -> f64>) -> Vec<f64> {
    let nb = basis.size();
    let mut a = vec![0.0; nb * nb];
    for (r, &cond) in conds.iter().enumerate() {
        for c in 0..nb {
            let phi = |x: f64, y: f64| basis.eval_2d(x, y)[c] * weight.map_or(1.0, |w| w(x, y));
            a[r * nb + c] = apply(cond, basis, &tab.quad, &phi);
        }
    }
    a
}

/// Condition values of `z` on a physical element.
fn element_rhs(conds: &[Condition], basis: &Basis, tab: &ReferenceTables, cell: &Cell, z: &dyn Fn(f64, f64) -> f64, weight: Option<&dyn Fn(f64, f64) -> f64>) -> Vec<f64> {
    conds
        .iter()
        .map(|&cond| {
            let g = |xh: f64, yh: f64| weight.map_or(1.0, |w| w(xh, yh)) * {
                let (x, y) = cell.map(xh, yh);
                z(x, y)
            };
            apply(cond, basis, &tab.quad, &g)
        })
        .collect()
}

/// Projects `z` element by element.
pub fn project(kind: &ProjectionKind, z: &dyn Fn(f64, f64) -> f64, mesh: &Mesh2D, tables: &ReferenceTables) -> Result<Projected> {
    let basis = tables.basis;
    let nb = basis.size();
    let conds = conditions(kind, basis.degree);
    debug_assert_eq!(conds.len(), nb);
    let mut coeffs = vec![0.0; mesh.n_elements() * nb];
    let shared = match kind {
        ProjectionKind::WeightedL2(_) => None,
        // orthonormal basis: the plain L² matrix is the identity
        ProjectionKind::L2 => None,
        _ => Some(DenseLu::factor(local_matrix(&conds, &basis, tables, None), nb, kind.name())?),
    };
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let cell = mesh.cell(i, j);
            let e = mesh.element(i, j);
            let out = &mut coeffs[e * nb..(e + 1) * nb];
            match kind {
                ProjectionKind::L2 => out.copy_from_slice(&element_rhs(&conds, &basis, tables, &cell, z, None)),
                ProjectionKind::WeightedL2(w) => {
                    let wref = |xh: f64, yh: f64| {
                        let (x, y) = cell.map(xh, yh);
                        w(x, y)
                    };
                    for &(xh, yh) in &tables.point {
                        let v = wref(xh, yh);
                        if !(v > 0.0) {
                            return Err(LdgError::InvalidParameter {
                                name: "weight",
                                value: v,
                                reason: "projection weight must be positive",
                            });
                        }
                    }
                    let m = local_matrix(&conds, &basis, tables, Some(&wref));
                    let lu = DenseLu::factor(m, nb, "weighted mass")?;
                    out.copy_from_slice(&lu.solve(&element_rhs(&conds, &basis, tables, &cell, z, Some(&wref))));
                }
                _ => {
                    let lu = shared.as_ref().expect("factored above");
                    out.copy_from_slice(&lu.solve(&element_rhs(&conds, &basis, tables, &cell, z, None)));
                }
            }
        }
    }
    Ok(Projected {
        basis,
        nx: mesh.nx(),
        ny: mesh.ny(),
        coeffs,
    })
}

/// Largest relative violation of the defining conditions over all elements.
pub fn condition_residual(kind: &ProjectionKind, z: &dyn Fn(f64, f64) -> f64, mesh: &Mesh2D, tables: &ReferenceTables, proj: &Projected) -> f64 {
    let basis = tables.basis;
    let conds = conditions(kind, basis.degree);
    let mut worst = 0.0f64;
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let cell = mesh.cell(i, j);
            let coeffs = proj.block(mesh.element(i, j));
            let ph = |xh: f64, yh: f64| basis.evaluate(coeffs, xh, yh);
            let physical_ph = |x: f64, y: f64| ph((x - cell.x0) / cell.hx, (y - cell.y0) / cell.hy);
            let (lhs, rhs) = match kind {
                ProjectionKind::WeightedL2(w) => {
                    let wref = |xh: f64, yh: f64| {
                        let (x, y) = cell.map(xh, yh);
                        w(x, y)
                    };
                    (
                        element_rhs(&conds, &basis, tables, &cell, &physical_ph, Some(&wref)),
                        element_rhs(&conds, &basis, tables, &cell, z, Some(&wref)),
                    )
                }
                _ => (
                    element_rhs(&conds, &basis, tables, &cell, &physical_ph, None),
                    element_rhs(&conds, &basis, tables, &cell, z, None),
                ),
            };
            let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            for (a, b) in lhs.iter().zip(&rhs) {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    worst
}

/// `‖z - Πz‖²` by element quadrature.
pub fn l2_error_sq(z: &dyn Fn(f64, f64) -> f64, mesh: &Mesh2D, tables: &ReferenceTables, proj: &Projected) -> f64 {
    let mut s = 0.0;
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let cell = mesh.cell(i, j);
            let coeffs = proj.block(mesh.element(i, j));
            let mut se = 0.0;
            for q in 0..tables.n_volume() {
                let (x, y) = cell.map(tables.point[q].0, tables.point[q].1);
                let d = z(x, y) - tables.value_at(coeffs, q);
                se += tables.weight[q] * d * d;
            }
            s += cell.area() * se;
        }
    }
    s
}

/// `Σ ∫ [[z - Πz]]²` over all edges, boundary edges included.
pub fn jump_error_sq(z: &dyn Fn(f64, f64) -> f64, mesh: &Mesh2D, tables: &ReferenceTables, proj: &Projected) -> f64 {
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let nq = tables.quad.len();
    let mut s = 0.0;
    for i in 0..=nx {
        let x = mesh.mx.points[i];
        for j in 0..ny {
            let (y0, hy) = (mesh.my.points[j], mesh.my.h(j));
            for t in 0..nq {
                let zv = z(x, y0 + hy * tables.quad.nodes[t]);
                let plus = if i < nx { zv - tables.trace_at(proj.block(mesh.element(i, j)), Edge::Left, t) } else { 0.0 };
                let minus = if i > 0 { zv - tables.trace_at(proj.block(mesh.element(i - 1, j)), Edge::Right, t) } else { 0.0 };
                s += hy * tables.quad.weights[t] * (plus - minus).powi(2);
            }
        }
    }
    for j in 0..=ny {
        let y = mesh.my.points[j];
        for i in 0..nx {
            let (x0, hx) = (mesh.mx.points[i], mesh.mx.h(i));
            for t in 0..nq {
                let zv = z(x0 + hx * tables.quad.nodes[t], y);
                let plus = if j < ny { zv - tables.trace_at(proj.block(mesh.element(i, j)), Edge::Bottom, t) } else { 0.0 };
                let minus = if j > 0 { zv - tables.trace_at(proj.block(mesh.element(i, j - 1)), Edge::Top, t) } else { 0.0 };
                s += hx * tables.quad.weights[t] * (plus - minus).powi(2);
            }
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRow {
    pub n: usize,
    pub l2_error: f64,
    /// `(Σ ∫ [[z - Πz]]²)^{1/2}`
    pub jump_error: f64,
    pub l2_rate: Option<f64>,
    pub jump_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionTable {
    pub kind: &'static str,
    pub family: MeshFamily,
    pub degree: usize,
    pub eps: f64,
    pub rate_mode: RateMode,
    pub rows: Vec<ProjectionRow>,
}

impl ProjectionTable {
    pub fn l2_rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.l2_rate).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# projection: {}, family: {}, k = {}, eps = {:e}, rate mode: {:?}\nN,l2_error,l2_rate,jump_error,jump_rate\n",
            self.kind, self.family, self.degree, self.eps, self.rate_mode
        );
        for r in &self.rows {
            let f = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.4}"));
            s.push_str(&format!("{},{:.6e},{},{:.6e},{}\n", r.n, r.l2_error, f(r.l2_rate), r.jump_error, f(r.jump_rate)));
        }
        s
    }
}

/// Projection errors of `z` on layer-adapted meshes with `σ = k + 1`, `β = 1`.
pub fn projection_rate_study(
    kind: &ProjectionKind,
    z: ScalarField,
    family: MeshFamily,
    degree: usize,
    eps: f64,
    ns: &[usize],
) -> Result<ProjectionTable> {
    let basis = Basis::new(degree)?;
    let tables = ReferenceTables::new(basis, ReferenceTables::default_points(basis))?;
    let mode = RateMode::for_family(family);
    let mut l2 = Vec::new();
    let mut jumps = Vec::new();
    for &n in ns {
        let mesh = Mesh2D::layer_adapted(MeshParams::new(family, eps, degree as f64 + 1.0, 1.0), n)?;
        let p = project(kind, &*z, &mesh, &tables)?;
        l2.push(l2_error_sq(&*z, &mesh, &tables, &p).sqrt());
        jumps.push(jump_error_sq(&*z, &mesh, &tables, &p).sqrt());
    }
    let lr = convergence_rates(&l2, ns, mode)?;
    let jr = convergence_rates(&jumps, ns, mode)?;
    let rows = ns
        .iter()
        .enumerate()
        .map(|(i, &n)| ProjectionRow {
            n,
            l2_error: l2[i],
            jump_error: jumps[i],
            l2_rate: i.checked_sub(1).map(|p| lr[p]),
            jump_rate: i.checked_sub(1).map(|p| jr[p]),
        })
        .collect();
    Ok(ProjectionTable {
        kind: kind.name(),
        family,
        degree,
        eps,
        rate_mode: mode,
        rows,
    })
}

/// `Arc`-wrapped closure helper.
pub fn field(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> ScalarField {
    Arc::new(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::example1;
    use crate::mesh::Mesh1D;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const GR: [fn() -> ProjectionKind; 3] = [
        || ProjectionKind::GaussRadauMinus,
        || ProjectionKind::GaussRadauXPlus,
        || ProjectionKind::GaussRadauYPlus,
    ];

    fn all_kinds() -> Vec<ProjectionKind> {
        let mut v = vec![ProjectionKind::L2, ProjectionKind::WeightedL2(field(|x, y| 1.0 + x * x + 0.5 * y))];
        v.extend(GR.iter().map(|f| f()));
        v
    }

    fn tables(k: usize) -> ReferenceTables {
        let b = Basis::new(k).unwrap();
        ReferenceTables::new(b, ReferenceTables::default_points(b)).unwrap()
    }

    #[test]
    fn condition_counts() {
        for k in 0..=3 {
            for kind in all_kinds() {
                assert_eq!(conditions(&kind, k).len(), (k + 1) * (k + 1), "{kind:?} k={k}");
            }
        }
    }

    #[test]
    fn reproduces_polynomials() {
        let mesh = Mesh2D::layer_adapted(MeshParams::new(MeshFamily::Shishkin, 1e-6, 2.0, 1.0), 8).unwrap();
        for k in 0..=3 {
            let t = tables(k);
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let c: Vec<f64> = (0..(k + 1) * (k + 1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let z = move |x: f64, y: f64| {
                let mut s = 0.0;
                for m in 0..=k {
                    for n in 0..=k {
                        s += c[m * (k + 1) + n] * x.powi(m as i32) * y.powi(n as i32);
                    }
                }
                s
            };
            for kind in all_kinds() {
                let p = project(&kind, &z, &mesh, &t).unwrap();
                let err = l2_error_sq(&z, &mesh, &t, &p).sqrt();
                assert!(err < 1e-13, "{kind:?} k={k}: {err}");
            }
        }
    }

    #[test]
    fn constant_weight_matches_l2() {
        let mesh = Mesh2D::uniform(4).unwrap();
        let t = tables(2);
        let z = |x: f64, y: f64| (3.0 * x).sin() * (2.0 * y).exp();
        let a = project(&ProjectionKind::L2, &z, &mesh, &t).unwrap();
        let b = project(&ProjectionKind::WeightedL2(field(|_, _| 2.0)), &z, &mesh, &t).unwrap();
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn negative_weight_rejected() {
        let mesh = Mesh2D::uniform(4).unwrap();
        let r = project(&ProjectionKind::WeightedL2(field(|x, _| x - 0.5)), &|_, _| 1.0, &mesh, &tables(1));
        assert!(r.is_err());
    }

    #[test]
    fn minus_k0_is_corner_value() {
        let mesh = Mesh2D::uniform(4).unwrap();
        let z = |x: f64, y: f64| x * x + 3.0 * y;
        let p = project(&ProjectionKind::GaussRadauMinus, &z, &mesh, &tables(0)).unwrap();
        for j in 0..4 {
            for i in 0..4 {
                let c = mesh.cell(i, j);
                let v = z(c.x0 + c.hx, c.y0 + c.hy);
                // L_0 = 1
                assert!((p.block(mesh.element(i, j))[0] - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn minus_k1_one_dimensional_factor() {
        // z = x² on [0,1]: ∫(p - x²) = 0 and p(1) = 1 give p = -1/3 + 4x/3
        let mesh = Mesh2D::new(Mesh1D::uniform(1).unwrap(), Mesh1D::uniform(1).unwrap());
        let t = tables(1);
        let z = |x: f64, _: f64| x * x;
        let p = project(&ProjectionKind::GaussRadauMinus, &z, &mesh, &t).unwrap();
        let b = t.basis;
        for &x in &[0.0, 0.25, 0.6, 1.0] {
            for &y in &[0.0, 0.5, 1.0] {
                let v = b.evaluate(p.block(0), x, y);
                assert!((v - (-1.0 / 3.0 + 4.0 * x / 3.0)).abs() < 1e-14, "x={x}: {v}");
            }
        }
    }

    #[test]
    fn l2_coincides_with_interior_moments() {
        // Π and Π⁻ share the Q^{k-1} moments
        let mesh = Mesh2D::uniform(4).unwrap();
        let k = 2;
        let t = tables(k);
        let z = |x: f64, y: f64| (x - 0.3).exp() * (4.0 * y).cos();
        let a = project(&ProjectionKind::L2, &z, &mesh, &t).unwrap();
        let b = project(&ProjectionKind::GaussRadauMinus, &z, &mesh, &t).unwrap();
        for e in 0..mesh.n_elements() {
            for m in 0..k {
                for n in 0..k {
                    let idx = t.basis.index(m, n);
                    assert!((a.block(e)[idx] - b.block(e)[idx]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn defining_conditions_hold() {
        let eps = 1e-8;
        let prob = example1(eps).unwrap();
        let u = prob.exact.unwrap().u;
        for fam in MeshFamily::ALL {
            let mesh = Mesh2D::layer_adapted(MeshParams::new(fam, eps, 3.0, 1.0), 16).unwrap();
            for k in 0..=3 {
                let t = tables(k);
                for kind in all_kinds() {
                    let p = project(&kind, &*u, &mesh, &t).unwrap();
                    let r = condition_residual(&kind, &*u, &mesh, &t, &p);
                    assert!(r <= 1e-11, "{fam} k={k} {kind:?}: {r}");
                }
            }
        }
    }

    fn anisotropic_mesh(ratio: f64) -> Mesh2D {
        // one row of very thin cells: hy / hx = 1/ratio
        let thin = 0.25 / ratio;
        let my = Mesh1D::from_nodes(vec![0.0, thin, 2.0 * thin, 0.5, 1.0]).unwrap();
        let mx = Mesh1D::from_nodes(vec![0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        Mesh2D::new(mx, my)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn stable_on_anisotropic_elements(
            seed in any::<u64>(),
            log_ratio in 0.0f64..6.0,
            k in 0usize..=3,
            kind_idx in 0usize..5,
        ) {
            let mesh = anisotropic_mesh(10f64.powf(log_ratio));
            let t = tables(k);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b, c, d): (f64, f64, f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0));
            // smooth field scaled to the thin layer so it varies across it
            let hy = mesh.my.h(0);
            let z = move |x: f64, y: f64| (a * x + c).sin() * (b * y / hy.max(1e-3) + d).cos() + 0.5;
            let kind = all_kinds().swap_remove(kind_idx);
            let p = project(&kind, &z, &mesh, &t).unwrap();
            // elementwise ratio ‖Πz‖ / ‖z‖
            let zero = Projected { basis: t.basis, nx: p.nx, ny: p.ny, coeffs: vec![0.0; p.coeffs.len()] };
            let zn = l2_error_sq(&z, &mesh, &t, &zero).sqrt();
            let pn = l2_error_sq(&|_, _| 0.0, &mesh, &t, &p).sqrt();
            prop_assert!(pn <= 10.0 * zn, "{kind:?} ratio {}", pn / zn);
        }
    }

    #[test]
    fn smooth_rates_k2() {
        let z = field(|x, y| (std::f64::consts::PI * x).cos() * (std::f64::consts::PI * y).cos());
        for kind in all_kinds() {
            // ε = 1 clamps the transition point and the Shishkin mesh is uniform
            let t = projection_rate_study(&kind, z.clone(), MeshFamily::Shishkin, 2, 1.0, &[8, 16, 32]).unwrap();
            let l2: Vec<f64> = t.rows.iter().map(|r| r.l2_error).collect();
            let r = convergence_rates(&l2, &[8, 16, 32], RateMode::R2).unwrap();
            assert!(r.iter().all(|v| (v - 3.0).abs() < 0.1), "{kind:?} {r:?}");
        }
    }
}
