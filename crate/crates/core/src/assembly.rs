//! Assembly of the LDG system for the first-order form
//! `-p_x - q_y + b u = f`, `ε⁻¹p = u_x`, `ε⁻¹q = u_y`.
//!
//! Rows are test functions `(v, s, r)` and columns trial unknowns `(u, p, q)`,
//! both laid out by [`DofMap`]. The matrix realises
//! `B(w; z) = T₁ + T₂ + T₃ + T₄`:
//!
//! * `T₁ = ε⁻¹(p,s) + ε⁻¹(q,r) + (bu,v)`
//! * `T₂ = (u,s_x) + Σ⟨u⁻,[[s]]⟩ + (u,r_y) + Σ⟨u⁻,[[r]]⟩` over interior edges
//! * `T₃ = (p,v_x) + Σ_{i<N}⟨p⁺,[[v]]⟩ - ⟨p⁻_N,v⁻_N⟩ + (analogous q terms)`
//! * `T₄ = Σ λ⟨[[u]],[[v]]⟩` over all edges including the boundary
//!
//! so `û` is taken from the left/below neighbour (zero on `∂Ω`) and `p̂, q̂`
//! from the right/above neighbour plus the `λ` penalty.

use serde::{Deserialize, Serialize};

use crate::basis::{Basis, Edge, ReferenceTables};
use crate::error::{LdgError, Result};
use crate::field::{Component, DGField, DofMap};
use crate::mesh::Mesh2D;
use crate::problem::ProblemSpec;
use crate::sparse::{CooMatrix, CsrMatrix};

/// Named stabilisation presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxPreset {
    /// `λ = √ε` on every edge.
    Balanced,
    /// `λ = 0` on interior and inflow-side boundary edges, `λ = √ε` on `x = 1` and `y = 1`.
    Energy,
}

impl std::str::FromStr for FluxPreset {
    type Err = LdgError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "balanced" => Ok(FluxPreset::Balanced),
            "energy" => Ok(FluxPreset::Energy),
            o => Err(LdgError::Config(format!("unknown flux preset `{o}`"))),
        }
    }
}

impl std::fmt::Display for FluxPreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FluxPreset::Balanced => "balanced",
            FluxPreset::Energy => "energy",
        })
    }
}

/// Penalty parameters `λ_{i,y}` (vertical edges `x = x_i`) and `λ_{x,j}` (horizontal edges `y = y_j`).
#[derive(Debug, Clone, PartialEq)]
pub struct FluxConfig {
    pub vertical: Vec<f64>,
    pub horizontal: Vec<f64>,
}

impl FluxConfig {
    pub fn preset(preset: FluxPreset, nx: usize, ny: usize, eps: f64) -> Self {
        let se = eps.sqrt();
        match preset {
            FluxPreset::Balanced => Self {
                vertical: vec![se; nx + 1],
                horizontal: vec![se; ny + 1],
            },
            FluxPreset::Energy => {
                let mut vertical = vec![0.0; nx + 1];
                let mut horizontal = vec![0.0; ny + 1];
                vertical[nx] = se;
                horizontal[ny] = se;
                Self { vertical, horizontal }
            }
        }
    }

    pub fn for_mesh(preset: FluxPreset, mesh: &Mesh2D, eps: f64) -> Self {
        Self::preset(preset, mesh.nx(), mesh.ny(), eps)
    }

    pub fn uniform(lambda: f64, nx: usize, ny: usize) -> Self {
        Self {
            vertical: vec![lambda; nx + 1],
            horizontal: vec![lambda; ny + 1],
        }
    }

    pub fn check(&self, mesh: &Mesh2D) -> Result<()> {
        if self.vertical.len() != mesh.nx() + 1 || self.horizontal.len() != mesh.ny() + 1 {
            return Err(LdgError::FluxSizeMismatch {
                vertical: self.vertical.len(),
                horizontal: self.horizontal.len(),
                nx: mesh.nx(),
                ny: mesh.ny(),
            });
        }
        if let Some(&bad) = self.vertical.iter().chain(&self.horizontal).find(|l| !(**l >= 0.0)) {
            return Err(LdgError::InvalidParameter {
                name: "lambda",
                value: bad,
                reason: "penalty parameters must be non-negative",
            });
        }
        Ok(())
    }
}

/// Sparse LDG system `A w = F`.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
    pub basis: Basis,
    pub eps: f64,
}

impl AssembledSystem {
    /// Largest number of stored entries in any row.
    pub fn max_row_nnz(&self) -> usize {
        (0..self.matrix.nrows).map(|r| self.matrix.row(r).0.len()).max().unwrap_or(0)
    }
}

/// `B(w; z) = zᵀ A w`.
pub fn apply_b(sys: &AssembledSystem, w: &DGField, z: &DGField) -> Result<f64> {
    let n = sys.dofs.len();
    for len in [w.data.len(), z.data.len()] {
        if len != n {
            return Err(LdgError::DimensionMismatch { expected: n, got: len });
        }
    }
    let aw = sys.matrix.matvec(&w.data);
    Ok(z.data.iter().zip(&aw).map(|(a, b)| a * b).sum())
}

/// Zeroes quadrature round-off in a reference matrix whose exact entries are
/// either zero or of order one, so sparsity follows the exact structure.
fn chop(m: &mut [f64]) {
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for v in m.iter_mut() {
        if v.abs() <= 1e-13 * scale {
            *v = 0.0;
        }
    }
}

/// Reference edge-pair integrals `Σ_t w_t φ_a(e₁,t) φ_c(e₂,t)`.
struct EdgePairs {
    // indices: [side of row][side of column] with 0 = low (Left/Bottom), 1 = high (Right/Top)
    vertical: [[Vec<f64>; 2]; 2],
    horizontal: [[Vec<f64>; 2]; 2],
}

impl EdgePairs {
    fn new(t: &ReferenceTables) -> Self {
        let nb = t.basis.size();
        let pair = |e1: Edge, e2: Edge| {
            let mut m = vec![0.0; nb * nb];
            for (q, &w) in t.quad.weights.iter().enumerate() {
                let (r1, r2) = (&t.trace(e1)[q], &t.trace(e2)[q]);
                for a in 0..nb {
                    for c in 0..nb {
                        m[a * nb + c] += w * r1[a] * r2[c];
                    }
                }
            }
            chop(&mut m);
            m
        };
        let side = |lo: Edge, hi: Edge| {
            [[pair(lo, lo), pair(lo, hi)], [pair(hi, lo), pair(hi, hi)]]
        };
        Self {
            vertical: side(Edge::Left, Edge::Right),
            horizontal: side(Edge::Bottom, Edge::Top),
        }
    }
}

/// One side of an edge entering a jump `[[v]] = v⁺ - v⁻`.
#[derive(Clone, Copy)]
struct Side {
    elem: usize,
    /// 0 if the edge is the element's low (left/bottom) side
    local: usize,
    sign: f64,
}

struct Builder<'a> {
    coo: CooMatrix,
    dofs: DofMap,
    nb: usize,
    pairs: &'a EdgePairs,
}

impl<'a> Builder<'a> {
    fn block(&mut self, re: usize, rc: Component, ce: usize, cc: Component, scale: f64, m: &[f64]) {
        if scale == 0.0 {
            return;
        }
        let nb = self.nb;
        for a in 0..nb {
            let r = self.dofs.dof(re, rc, a);
            for c in 0..nb {
                let v = m[a * nb + c];
                if v != 0.0 {
                    self.coo.push(r, self.dofs.dof(ce, cc, c), scale * v);
                }
            }
        }
    }

    /// Adds the edge contributions for one edge with the given sides.
    ///
    /// `flux_var` is `P` for vertical edges and `Q` for horizontal ones; the
    /// matching auxiliary test rows `s`/`r` share its component slot.
    #[allow(clippy::too_many_arguments)]
    fn edge(
        &mut self,
        vertical: bool,
        low: Option<usize>,
        high: Option<usize>,
        length: f64,
        lambda: f64,
        flux_var: Component,
        aux_test: Component,
    ) {
        let all: &'a EdgePairs = self.pairs;
        let pairs = if vertical { &all.vertical } else { &all.horizontal };
        // `low` element lies left/below the edge (edge is its high side)
        let mut sides = Vec::with_capacity(2);
        if let Some(e) = high {
            sides.push(Side { elem: e, local: 0, sign: 1.0 });
        }
        if let Some(e) = low {
            sides.push(Side { elem: e, local: 1, sign: -1.0 });
        }
        // T4
        if lambda != 0.0 {
            for s1 in &sides {
                for s2 in &sides {
                    let m = &pairs[s1.local][s2.local];
                    self.block(s1.elem, Component::U, s2.elem, Component::U, lambda * s1.sign * s2.sign * length, m);
                }
            }
        }
        // T3 flux terms in the v-rows
        match high {
            Some(h) => {
                for s in &sides {
                    let m = &pairs[s.local][0];
                    self.block(s.elem, Component::U, h, flux_var, s.sign * length, m);
                }
            }
            None => {
                let l = low.expect("edge has at least one element");
                let m = &pairs[1][1];
                self.block(l, Component::U, l, flux_var, -length, m);
            }
        }
        // T2 flux terms in the s/r-rows, interior edges only
        if let (Some(l), Some(_)) = (low, high) {
            for s in &sides {
                let m = &pairs[s.local][1];
                self.block(s.elem, aux_test, l, Component::U, s.sign * length, m);
            }
        }
    }
}

/// Default reference tables for a basis (`max(5, k+2)` points per axis).
pub fn default_tables(basis: Basis) -> Result<ReferenceTables> {
    ReferenceTables::new(basis, ReferenceTables::default_points(basis))
}

/// Assembles with the default quadrature.
pub fn assemble(mesh: &Mesh2D, prob: &ProblemSpec, flux: &FluxConfig, basis: Basis) -> Result<AssembledSystem> {
    let tables = default_tables(basis)?;
    assemble_with(mesh, prob, flux, &tables)
}

/// Assembles `A` and `F` using the given reference tables.
pub fn assemble_with(
    mesh: &Mesh2D,
    prob: &ProblemSpec,
    flux: &FluxConfig,
    tables: &ReferenceTables,
) -> Result<AssembledSystem> {
    let matrix = assemble_operator(mesh, prob, flux, tables)?;
    let dofs = DofMap::new(mesh, tables.basis);
    let rhs = load_vector(mesh, tables, &dofs, &*prob.f);
    Ok(AssembledSystem {
        matrix,
        rhs,
        dofs,
        basis: tables.basis,
        eps: prob.eps,
    })
}

/// The bilinear form `B` as a sparse matrix.
pub fn assemble_operator(
    mesh: &Mesh2D,
    prob: &ProblemSpec,
    flux: &FluxConfig,
    tables: &ReferenceTables,
) -> Result<CsrMatrix> {
    flux.check(mesh)?;
    prob.check_reaction(mesh, tables)?;
    let eps = prob.eps;
    if !(eps > 0.0) {
        return Err(LdgError::InvalidParameter {
            name: "eps",
            value: eps,
            reason: "must be positive",
        });
    }
    let basis = tables.basis;
    let nb = basis.size();
    let dofs = DofMap::new(mesh, basis);
    let n = dofs.len();
    let pairs = EdgePairs::new(tables);

    // reference derivative couplings: sx[a*nb+c] = ∫ φ_c ∂x̂φ_a
    let mut sx = vec![0.0; nb * nb];
    let mut sy = vec![0.0; nb * nb];
    for q in 0..tables.n_volume() {
        let w = tables.weight[q];
        for a in 0..nb {
            for c in 0..nb {
                sx[a * nb + c] += w * tables.val[q][c] * tables.dx[q][a];
                sy[a * nb + c] += w * tables.val[q][c] * tables.dy[q][a];
            }
        }
    }
    chop(&mut sx);
    chop(&mut sy);
    let mut ident = vec![0.0; nb * nb];
    for a in 0..nb {
        ident[a * nb + a] = 1.0;
    }

    let mut b = Builder {
        coo: CooMatrix::with_capacity(n, n, n * 10 * nb),
        dofs,
        nb,
        pairs: &pairs,
    };
    let mut mb = vec![0.0; nb * nb];
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let e = dofs.element(i, j);
            let cell = mesh.cell(i, j);
            mb.iter_mut().for_each(|v| *v = 0.0);
            for q in 0..tables.n_volume() {
                let (x, y) = cell.map(tables.point[q].0, tables.point[q].1);
                let w = tables.weight[q] * (prob.b)(x, y);
                let phi = &tables.val[q];
                for a in 0..nb {
                    let wa = w * phi[a];
                    for c in a..nb {
                        mb[a * nb + c] += wa * phi[c];
                    }
                }
            }
            for a in 0..nb {
                for c in 0..a {
                    mb[a * nb + c] = mb[c * nb + a];
                }
            }
            b.block(e, Component::U, e, Component::U, cell.area(), &mb);
            b.block(e, Component::P, e, Component::P, cell.area() / eps, &ident);
            b.block(e, Component::Q, e, Component::Q, cell.area() / eps, &ident);
            // (u, s_x), (u, r_y)
            b.block(e, Component::P, e, Component::U, cell.hy, &sx);
            b.block(e, Component::Q, e, Component::U, cell.hx, &sy);
            // (p, v_x), (q, v_y)
            b.block(e, Component::U, e, Component::P, cell.hy, &sx);
            b.block(e, Component::U, e, Component::Q, cell.hx, &sy);
        }
    }
    let (nx, ny) = (mesh.nx(), mesh.ny());
    for j in 0..ny {
        let hy = mesh.my.h(j);
        for i in 0..=nx {
            let low = (i > 0).then(|| dofs.element(i - 1, j));
            let high = (i < nx).then(|| dofs.element(i, j));
            b.edge(true, low, high, hy, flux.vertical[i], Component::P, Component::P);
        }
    }
    for i in 0..nx {
        let hx = mesh.mx.h(i);
        for j in 0..=ny {
            let low = (j > 0).then(|| dofs.element(i, j - 1));
            let high = (j < ny).then(|| dofs.element(i, j));
            b.edge(false, low, high, hx, flux.horizontal[j], Component::Q, Component::Q);
        }
    }
    // cancelling edge terms can leave an explicit zero whose transpose was never touched
    Ok(b.coo.to_csr().with_symmetric_pattern())
}

/// `(g, v)` in the `v`-rows; zero in the `s`, `r` rows.
pub fn load_vector(mesh: &Mesh2D, tables: &ReferenceTables, dofs: &DofMap, g: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
    let nb = tables.basis.size();
    let mut rhs = vec![0.0; dofs.len()];
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let e = dofs.element(i, j);
            let cell = mesh.cell(i, j);
            let off = dofs.dof(e, Component::U, 0);
            for q in 0..tables.n_volume() {
                let (x, y) = cell.map(tables.point[q].0, tables.point[q].1);
                let w = tables.weight[q] * cell.area() * g(x, y);
                for a in 0..nb {
                    rhs[off + a] += w * tables.val[q][a];
                }
            }
        }
    }
    rhs
}

/// The block-diagonal `u`-mass matrix (`hx hy I` per element, zero elsewhere).
pub fn u_mass_matrix(mesh: &Mesh2D, dofs: &DofMap) -> CsrMatrix {
    let mut coo = CooMatrix::with_capacity(dofs.len(), dofs.len(), dofs.n_elements() * dofs.nb);
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let e = dofs.element(i, j);
            let area = mesh.cell(i, j).area();
            for a in 0..dofs.nb {
                let d = dofs.dof(e, Component::U, a);
                coo.push(d, d, area);
            }
        }
    }
    coo.to_csr()
}

/// Energy-norm expression `ε⁻¹‖p‖² + ε⁻¹‖q‖² + ‖b^{1/2}u‖² + Σλ⟨[[u]]²⟩` of a discrete field.
pub fn discrete_energy(
    w: &DGField,
    mesh: &Mesh2D,
    eps: f64,
    b: &dyn Fn(f64, f64) -> f64,
    flux: &FluxConfig,
    tables: &ReferenceTables,
) -> f64 {
    let dofs = w.dofs;
    let mut total = 0.0;
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let e = dofs.element(i, j);
            let cell = mesh.cell(i, j);
            let area = cell.area();
            let pq: f64 = w.block(e, Component::P).iter().chain(w.block(e, Component::Q)).map(|c| c * c).sum();
            total += area * pq / eps;
            for q in 0..tables.n_volume() {
                let (x, y) = cell.map(tables.point[q].0, tables.point[q].1);
                let u = tables.value_at(w.block(e, Component::U), q);
                total += tables.weight[q] * area * b(x, y) * u * u;
            }
        }
    }
    total + jump_sum(w, mesh, tables, |edge_v, idx| if edge_v { flux.vertical[idx] } else { flux.horizontal[idx] })
}

/// `Σ weight(edge) ⟨[[u_h]]², 1⟩` over all vertical and horizontal edges, boundary included.
pub fn jump_sum(
    w: &DGField,
    mesh: &Mesh2D,
    tables: &ReferenceTables,
    weight: impl Fn(bool, usize) -> f64,
) -> f64 {
    let dofs = w.dofs;
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let nq = tables.quad.len();
    let mut total = 0.0;
    for i in 0..=nx {
        let lam = weight(true, i);
        if lam == 0.0 {
            continue;
        }
        for j in 0..ny {
            let hy = mesh.my.h(j);
            for t in 0..nq {
                let plus = if i < nx { tables.trace_at(w.block(dofs.element(i, j), Component::U), Edge::Left, t) } else { 0.0 };
                let minus = if i > 0 { tables.trace_at(w.block(dofs.element(i - 1, j), Component::U), Edge::Right, t) } else { 0.0 };
                let jmp = plus - minus;
                total += lam * hy * tables.quad.weights[t] * jmp * jmp;
            }
        }
    }
    for j in 0..=ny {
        let lam = weight(false, j);
        if lam == 0.0 {
            continue;
        }
        for i in 0..nx {
            let hx = mesh.mx.h(i);
            for t in 0..nq {
                let plus = if j < ny { tables.trace_at(w.block(dofs.element(i, j), Component::U), Edge::Bottom, t) } else { 0.0 };
                let minus = if j > 0 { tables.trace_at(w.block(dofs.element(i, j - 1), Component::U), Edge::Top, t) } else { 0.0 };
                let jmp = plus - minus;
                total += lam * hx * tables.quad.weights[t] * jmp * jmp;
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{MeshFamily, MeshParams};
    use crate::problem::{bubble, constant};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_field(mesh: &Mesh2D, basis: Basis, rng: &mut ChaCha8Rng) -> DGField {
        let mut f = DGField::zeros(mesh, basis);
        f.data.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        f
    }

    fn layer_mesh(fam: MeshFamily, n: usize, eps: f64, k: usize) -> Mesh2D {
        Mesh2D::layer_adapted(MeshParams::new(fam, eps, k as f64 + 1.0, 1.0), n).unwrap()
    }

    #[test]
    fn presets() {
        let f = FluxConfig::preset(FluxPreset::Energy, 4, 4, 1e-4);
        assert_eq!(f.vertical, vec![0.0, 0.0, 0.0, 0.0, 1e-2]);
        let g = FluxConfig::preset(FluxPreset::Balanced, 4, 4, 1e-4);
        assert!(g.horizontal.iter().all(|&l| l == 1e-2));
    }

    #[test]
    fn flux_size_mismatch() {
        let mesh = Mesh2D::uniform(4).unwrap();
        let prob = ProblemSpec::manufactured("b", 1.0, constant(2.0), bubble()).unwrap();
        let flux = FluxConfig::uniform(1.0, 3, 4);
        let err = assemble(&mesh, &prob, &flux, Basis::new(1).unwrap()).unwrap_err();
        assert!(matches!(err, LdgError::FluxSizeMismatch { .. }));
    }

    #[test]
    fn energy_identity_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eps = 1e-6;
        for (fam, k, preset) in [
            (MeshFamily::Shishkin, 1, FluxPreset::Balanced),
            (MeshFamily::BakhvalovShishkin, 2, FluxPreset::Energy),
            (MeshFamily::BakhvalovType, 3, FluxPreset::Balanced),
            (MeshFamily::Shishkin, 0, FluxPreset::Energy),
        ] {
            let mesh = layer_mesh(fam, 8, eps, k);
            let basis = Basis::new(k).unwrap();
            let tables = default_tables(basis).unwrap();
            let bfun: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> = Arc::new(|x, y| 2.0 + x * y * (1.0 - x) * (1.0 - y));
            let prob = ProblemSpec {
                name: "t".into(),
                eps,
                b: bfun.clone(),
                f: constant(0.0),
                exact: None,
            };
            let flux = FluxConfig::for_mesh(preset, &mesh, eps);
            let sys = assemble_with(&mesh, &prob, &flux, &tables).unwrap();
            for _ in 0..30 {
                let w = random_field(&mesh, basis, &mut rng);
                let bww = apply_b(&sys, &w, &w).unwrap();
                let en = discrete_energy(&w, &mesh, eps, &*bfun, &flux, &tables);
                assert!(((bww - en) / en).abs() < 1e-12, "{fam} k={k}: {bww} vs {en}");
            }
        }
    }

    #[test]
    fn nonzeros_and_symmetric_pattern() {
        let mesh = layer_mesh(MeshFamily::BakhvalovShishkin, 8, 1e-8, 2);
        let basis = Basis::new(2).unwrap();
        let prob = ProblemSpec::manufactured("b", 1e-8, constant(2.0), bubble()).unwrap();
        for preset in [FluxPreset::Balanced, FluxPreset::Energy] {
            let flux = FluxConfig::for_mesh(preset, &mesh, 1e-8);
            let sys = assemble(&mesh, &prob, &flux, basis).unwrap();
            assert_eq!(sys.matrix.nrows, 3 * 64 * 9);
            assert!(sys.max_row_nnz() <= 5 * 3 * basis.size(), "{}", sys.max_row_nnz());
            assert!(sys.matrix.is_structurally_symmetric());
        }
    }

    #[test]
    fn bilinearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mesh = layer_mesh(MeshFamily::Shishkin, 8, 1e-4, 1);
        let basis = Basis::new(1).unwrap();
        let prob = ProblemSpec::manufactured("b", 1e-4, constant(2.0), bubble()).unwrap();
        let flux = FluxConfig::for_mesh(FluxPreset::Balanced, &mesh, 1e-4);
        let sys = assemble(&mesh, &prob, &flux, basis).unwrap();
        let w = random_field(&mesh, basis, &mut rng);
        let z = random_field(&mesh, basis, &mut rng);
        let zero = DGField::zeros(&mesh, basis);
        assert_eq!(apply_b(&sys, &zero, &z).unwrap(), 0.0);
        let alpha = -3.7;
        let mut aw = w.clone();
        aw.data.iter_mut().for_each(|v| *v *= alpha);
        let lhs = apply_b(&sys, &aw, &z).unwrap();
        let rhs = alpha * apply_b(&sys, &w, &z).unwrap();
        assert!(((lhs - rhs) / rhs).abs() < 1e-13);
        let short = DGField::from_vec(DofMap { nx: 1, ny: 1, nb: 4 }, basis, vec![0.0; 12]);
        assert!(apply_b(&sys, &short, &z).is_err());
    }

    #[test]
    fn assembly_is_deterministic() {
        let mesh = layer_mesh(MeshFamily::BakhvalovType, 8, 1e-8, 1);
        let basis = Basis::new(1).unwrap();
        let prob = ProblemSpec::manufactured("b", 1e-8, constant(2.0), bubble()).unwrap();
        let flux = FluxConfig::for_mesh(FluxPreset::Energy, &mesh, 1e-8);
        let a = assemble(&mesh, &prob, &flux, basis).unwrap();
        let b = assemble(&mesh, &prob, &flux, basis).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.rhs, b.rhs);
    }
}
