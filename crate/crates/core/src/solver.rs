//! Linear solvers for the assembled LDG system.
//!
//! The default path factorises the monolithic three-field matrix with a
//! sparse LU (column approximate-minimum-degree ordering, partial pivoting).
//! The alternative path eliminates `p` and `q` element by element (their
//! test/trial block is `ε⁻¹ h_x h_y I`) and runs Jacobi-preconditioned
//! conjugate gradients on the symmetric positive definite `u`-system.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use faer::prelude::*;
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};
use serde::{Deserialize, Serialize};

use crate::assembly::AssembledSystem;
use crate::error::{LdgError, Result};
use crate::field::{Component, DGField, DofMap};
use crate::sparse::{CooMatrix, CsrMatrix};

/// Residual bound every accepted solve must meet.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Relative tolerance of the condensed conjugate-gradient iteration.
pub const CG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    /// Sparse LU of the full `(u, p, q)` system.
    #[serde(rename = "lu")]
    DirectLu,
    /// Element-local elimination of `p`, `q` and CG on the `u`-system.
    #[serde(rename = "cg")]
    CondensedCg,
}

impl FromStr for SolveMethod {
    type Err = LdgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lu" => Ok(SolveMethod::DirectLu),
            "cg" => Ok(SolveMethod::CondensedCg),
            o => Err(LdgError::Config(format!("unknown solver `{o}` (expected lu or cg)"))),
        }
    }
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::DirectLu => "lu",
            SolveMethod::CondensedCg => "cg",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: SolveMethod,
    /// Bound on `‖Ax - b‖₂ / ‖b‖₂`.
    pub tol: f64,
    /// Iterative refinement steps allowed after the LU solve.
    pub refine_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: SolveMethod::DirectLu,
            tol: DEFAULT_TOL,
            refine_steps: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub method: SolveMethod,
    /// Relative residual of the full system.
    pub residual: f64,
    pub factor_seconds: f64,
    pub solve_seconds: f64,
    /// Stored entries of the factorised (LU) or iterated (CG) matrix.
    pub nnz: usize,
    /// CG iterations, or refinement steps for LU.
    pub iterations: usize,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Relative residual `‖Ax - b‖₂ / ‖b‖₂` (absolute when `b = 0`).
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let nb = norm2(b);
    if nb == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

/// Reusable sparse LU factorisation.
pub struct LuFactor {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
    nnz: usize,
}

impl LuFactor {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(LdgError::DimensionMismatch {
                expected: a.nrows,
                got: a.ncols,
            });
        }
        let triplets: Vec<Triplet<usize, usize, f64>> =
            a.to_triplets().into_iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(a.nrows, a.ncols, &triplets)
            .map_err(|e| LdgError::Factorization(format!("{e:?}")))?;
        let lu = mat.sp_lu().map_err(|e| match e {
            LuError::SymbolicSingular { index } => {
                LdgError::Factorization(format!("structurally singular: no pivot at step {index}"))
            }
            LuError::Generic(g) => LdgError::Factorization(format!("{g:?}")),
        })?;
        Ok(Self {
            lu,
            n: a.nrows,
            nnz: a.nnz(),
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let rhs = Col::<f64>::from_fn(self.n, |i| b[i]);
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| x[i]).collect()
    }

    /// Solves and refines with the original matrix until `tol` or `steps` is reached.
    /// Returns the solution, its relative residual and the number of refinement steps.
    pub fn solve_refined(&self, a: &CsrMatrix, b: &[f64], tol: f64, steps: usize) -> (Vec<f64>, f64, usize) {
        let mut x = self.solve(b);
        let mut res = relative_residual(a, &x, b);
        let mut used = 0;
        while (res > tol * 1e-3) && used < steps {
            let ax = a.matvec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let dx = self.solve(&r);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(p, q)| p + q).collect();
            let cres = relative_residual(a, &cand, b);
            used += 1;
            if cres >= res {
                break;
            }
            x = cand;
            res = cres;
        }
        (x, res, used)
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.nnz
    }
}

/// Solves with the method selected in `opts`.
pub fn solve(sys: &AssembledSystem, opts: &SolveOptions) -> Result<(DGField, SolveReport)> {
    match opts.method {
        SolveMethod::DirectLu => solve_direct(sys, opts),
        SolveMethod::CondensedCg => condense_and_solve(sys, opts),
    }
}

/// Sparse direct solve of the full system.
pub fn solve_direct(sys: &AssembledSystem, opts: &SolveOptions) -> Result<(DGField, SolveReport)> {
    let t0 = Instant::now();
    let lu = LuFactor::new(&sys.matrix)?;
    let factor_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (x, residual, iterations) = lu.solve_refined(&sys.matrix, &sys.rhs, opts.tol, opts.refine_steps);
    let solve_seconds = t1.elapsed().as_secs_f64();
    if !(residual <= opts.tol) {
        return Err(LdgError::ResidualTooLarge { residual, tol: opts.tol });
    }
    Ok((
        DGField::from_vec(sys.dofs, sys.basis, x),
        SolveReport {
            method: SolveMethod::DirectLu,
            residual,
            factor_seconds,
            solve_seconds,
            nnz: lu.nnz(),
            iterations,
        },
    ))
}

/// The `u`-system left after eliminating `p` and `q`.
#[derive(Debug, Clone)]
pub struct CondensedSystem {
    /// `A_vu - A_vp D_p⁻¹ A_su - A_vq D_q⁻¹ A_ru`, indexed by `e·nb + a`.
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// diagonal of the `s`-`p` (and `r`-`q`) blocks, indexed by `e·nb + a`
    pub dp: Vec<f64>,
    pub dq: Vec<f64>,
    pub dofs: DofMap,
}

/// Dense scratch row with a list of touched columns.
struct RowAccumulator {
    vals: Vec<f64>,
    mark: Vec<bool>,
    touched: Vec<usize>,
}

impl RowAccumulator {
    fn new(n: usize) -> Self {
        Self {
            vals: vec![0.0; n],
            mark: vec![false; n],
            touched: Vec::new(),
        }
    }

    #[inline]
    fn add(&mut self, col: usize, v: f64) {
        if !self.mark[col] {
            self.mark[col] = true;
            self.touched.push(col);
        }
        self.vals[col] += v;
    }

    fn flush(&mut self, row: usize, out: &mut CooMatrix) {
        self.touched.sort_unstable();
        for &c in &self.touched {
            out.push(row, c, self.vals[c]);
            self.vals[c] = 0.0;
            self.mark[c] = false;
        }
        self.touched.clear();
    }
}

/// Forms the condensed system. Fails if the `(s,p)` / `(r,q)` blocks are not diagonal.
pub fn condense(sys: &AssembledSystem) -> Result<CondensedSystem> {
    let dofs = sys.dofs;
    let nb = dofs.nb;
    let nu = dofs.n_elements() * nb;
    let a = &sys.matrix;
    let reduced = |idx: usize| {
        let (e, _, m) = dofs.locate(idx);
        e * nb + m
    };
    let mut dp = vec![0.0; nu];
    let mut dq = vec![0.0; nu];
    for e in 0..dofs.n_elements() {
        for m in 0..nb {
            for (comp, diag) in [(Component::P, &mut dp), (Component::Q, &mut dq)] {
                let row = dofs.dof(e, comp, m);
                let (cols, vals) = a.row(row);
                for (&c, &v) in cols.iter().zip(vals) {
                    let (_, cc, _) = dofs.locate(c);
                    if cc == Component::U {
                        continue;
                    }
                    if c == row {
                        diag[e * nb + m] = v;
                    } else if v != 0.0 {
                        return Err(LdgError::Config(format!(
                            "auxiliary block is not diagonal (row {row}, column {c}); condensation unavailable"
                        )));
                    }
                }
                if diag[e * nb + m] == 0.0 {
                    return Err(LdgError::SingularLocalSystem {
                        what: "auxiliary mass",
                        column: row,
                    });
                }
            }
        }
    }

    let mut coo = CooMatrix::with_capacity(nu, nu, nu * 5 * nb);
    let mut rhs = vec![0.0; nu];
    let mut acc = RowAccumulator::new(nu);
    for e in 0..dofs.n_elements() {
        for m in 0..nb {
            let row = dofs.dof(e, Component::U, m);
            let ru = e * nb + m;
            let mut f = sys.rhs[row];
            let (cols, vals) = a.row(row);
            for (&c, &v) in cols.iter().zip(vals) {
                let (ce, comp, cm) = dofs.locate(c);
                match comp {
                    Component::U => acc.add(ce * nb + cm, v),
                    Component::P | Component::Q => {
                        let d = if comp == Component::P { dp[ce * nb + cm] } else { dq[ce * nb + cm] };
                        let factor = v / d;
                        // the test row paired with an auxiliary unknown shares its index
                        f -= factor * sys.rhs[c];
                        let (acols, avals) = a.row(c);
                        for (&ac, &av) in acols.iter().zip(avals) {
                            let (_, acomp, _) = dofs.locate(ac);
                            if acomp == Component::U {
                                acc.add(reduced(ac), -factor * av);
                            }
                        }
                    }
                }
            }
            rhs[ru] = f;
            acc.flush(ru, &mut coo);
        }
    }
    Ok(CondensedSystem {
        matrix: coo.to_csr(),
        rhs,
        dp,
        dq,
        dofs,
    })
}

/// Outcome of the preconditioned CG iteration.
#[derive(Debug, Clone, Copy)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn pcg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, CgOutcome)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((
            x,
            CgOutcome {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = (0..n).map(|i| 1.0 / a.get(i, i).unwrap_or(1.0)).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm2(&r) / bnorm;
        if rel <= tol {
            return Ok((
                x,
                CgOutcome {
                    iterations: it,
                    relative_residual: rel,
                },
            ));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(LdgError::IterationLimit {
        iterations: max_iter,
        residual: norm2(&r) / bnorm,
    })
}

/// Rebuilds the full field from a condensed solution `u`.
pub fn reconstruct(sys: &AssembledSystem, cs: &CondensedSystem, u: &[f64]) -> DGField {
    let dofs = sys.dofs;
    let nb = dofs.nb;
    let mut x = vec![0.0; dofs.len()];
    for e in 0..dofs.n_elements() {
        for m in 0..nb {
            x[dofs.dof(e, Component::U, m)] = u[e * nb + m];
        }
    }
    for e in 0..dofs.n_elements() {
        for m in 0..nb {
            for (comp, diag) in [(Component::P, &cs.dp), (Component::Q, &cs.dq)] {
                let row = dofs.dof(e, comp, m);
                let (cols, vals) = sys.matrix.row(row);
                let mut s = sys.rhs[row];
                for (&c, &v) in cols.iter().zip(vals) {
                    let (ce, cc, cm) = dofs.locate(c);
                    if cc == Component::U {
                        s -= v * u[ce * nb + cm];
                    }
                }
                x[row] = s / diag[e * nb + m];
            }
        }
    }
    DGField::from_vec(dofs, sys.basis, x)
}

/// Iteration cap `10·√DOF` of the full system.
pub fn cg_iteration_cap(dofs: &DofMap) -> usize {
    (10.0 * (dofs.len() as f64).sqrt()).ceil() as usize
}

/// Condensed solve: eliminate `p, q`, run PCG on `u`, reconstruct `p, q`.
pub fn condense_and_solve(sys: &AssembledSystem, opts: &SolveOptions) -> Result<(DGField, SolveReport)> {
    let t0 = Instant::now();
    let cs = condense(sys)?;
    let factor_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let (u, outcome) = pcg(&cs.matrix, &cs.rhs, CG_TOL, cg_iteration_cap(&sys.dofs))?;
    let field = reconstruct(sys, &cs, &u);
    let solve_seconds = t1.elapsed().as_secs_f64();
    let residual = relative_residual(&sys.matrix, &field.data, &sys.rhs);
    if !(residual <= opts.tol) {
        return Err(LdgError::ResidualTooLarge { residual, tol: opts.tol });
    }
    Ok((
        field,
        SolveReport {
            method: SolveMethod::CondensedCg,
            residual,
            factor_seconds,
            solve_seconds,
            nnz: cs.matrix.nnz(),
            iterations: outcome.iterations,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Basis;

    fn system_from(m: CsrMatrix, rhs: Vec<f64>) -> AssembledSystem {
        let n = rhs.len();
        AssembledSystem {
            matrix: m,
            rhs,
            dofs: DofMap { nx: 1, ny: 1, nb: n / 3 },
            basis: Basis::new(0).unwrap(),
            eps: 1.0,
        }
    }

    #[test]
    fn identity_system() {
        let sys = system_from(CsrMatrix::identity(3), vec![1.0, 0.0, 0.0]);
        let (x, rep) = solve(&sys, &SolveOptions::default()).unwrap();
        assert_eq!(x.data, vec![1.0, 0.0, 0.0]);
        assert!(rep.residual <= 1e-15);
    }

    #[test]
    fn two_by_two() {
        let mut c = CooMatrix::new(2, 2);
        c.push(0, 0, 2.0);
        c.push(0, 1, 1.0);
        c.push(1, 0, 1.0);
        c.push(1, 1, 2.0);
        let a = c.to_csr();
        let lu = LuFactor::new(&a).unwrap();
        let x = lu.solve(&[3.0, 3.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        let (x, _) = pcg(&a, &[3.0, 3.0], 1e-14, 10).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-13 && (x[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn structurally_singular() {
        let mut c = CooMatrix::new(2, 2);
        c.push(0, 0, 1.0);
        c.push(1, 0, 1.0);
        let a = c.to_csr();
        assert!(matches!(LuFactor::new(&a), Err(LdgError::Factorization(_))));
    }

    #[test]
    fn cg_iteration_limit() {
        let mut c = CooMatrix::new(3, 3);
        for (i, d) in [1.0, 10.0, 100.0].iter().enumerate() {
            c.push(i, i, *d);
        }
        c.push(0, 1, 0.5);
        c.push(1, 0, 0.5);
        let a = c.to_csr();
        assert!(matches!(pcg(&a, &[1.0, 1.0, 1.0], 1e-30, 1), Err(LdgError::IterationLimit { .. })));
    }

    fn dg_system(family: crate::mesh::MeshFamily, eps: f64) -> AssembledSystem {
        use crate::assembly::{assemble, FluxConfig, FluxPreset};
        use crate::mesh::{Mesh2D, MeshParams};
        let mesh = Mesh2D::layer_adapted(MeshParams::new(family, eps, 2.0, 1.0), 8).unwrap();
        let prob = crate::experiments::example1(eps).unwrap();
        let flux = FluxConfig::for_mesh(FluxPreset::Balanced, &mesh, eps);
        assemble(&mesh, &prob, &flux, Basis::new(1).unwrap()).unwrap()
    }

    #[test]
    fn direct_and_condensed_agree() {
        for fam in crate::mesh::MeshFamily::ALL {
            for eps in [1e-2, 1e-8] {
                let sys = dg_system(fam, eps);
                let (xd, rd) = solve_direct(&sys, &SolveOptions::default()).unwrap();
                let (xc, rc) = condense_and_solve(&sys, &SolveOptions::default()).unwrap();
                assert!(rd.residual <= DEFAULT_TOL && rc.residual <= DEFAULT_TOL);
                let scale = xd.max_abs();
                let diff = xd.data.iter().zip(&xc.data).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(diff <= 1e-8 * scale, "{fam:?} eps={eps}: {diff:e}");
            }
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mut sys = dg_system(crate::mesh::MeshFamily::Shishkin, 1e-4);
        sys.rhs.iter_mut().for_each(|v| *v = 0.0);
        for method in [SolveMethod::DirectLu, SolveMethod::CondensedCg] {
            let opts = SolveOptions { method, ..SolveOptions::default() };
            let (x, _) = solve(&sys, &opts).unwrap();
            assert_eq!(x.max_abs(), 0.0);
        }
    }

    #[test]
    fn condensed_matrix_is_symmetric() {
        let sys = dg_system(crate::mesh::MeshFamily::BakhvalovType, 1e-6);
        let cs = condense(&sys).unwrap();
        let mut worst = 0.0f64;
        let mut top = 0.0f64;
        for (r, c, v) in cs.matrix.to_triplets() {
            let t = cs.matrix.get(c, r).unwrap_or(0.0);
            worst = worst.max((v - t).abs());
            top = top.max(v.abs());
        }
        assert!(worst <= 1e-12 * top, "{worst:e}");
    }

    #[test]
    fn reconstruction_satisfies_flux_rows() {
        let sys = dg_system(crate::mesh::MeshFamily::BakhvalovShishkin, 1e-8);
        let cs = condense(&sys).unwrap();
        let (u, _) = pcg(&cs.matrix, &cs.rhs, CG_TOL, cg_iteration_cap(&sys.dofs)).unwrap();
        let field = reconstruct(&sys, &cs, &u);
        let ax = sys.matrix.matvec(&field.data);
        let dofs = sys.dofs;
        let scale = ax.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for e in 0..dofs.n_elements() {
            for comp in [Component::P, Component::Q] {
                for m in 0..dofs.nb {
                    let row = dofs.dof(e, comp, m);
                    assert!((ax[row] - sys.rhs[row]).abs() <= 1e-12 * scale);
                }
            }
        }
    }
}
