//! Implicit θ-scheme in time combined with the LDG discretisation in space for
//! `u_t - εΔu + b u = f` on the unit square, `u = 0` on the boundary.
//!
//! Each step solves
//! `(M/Δt + θA) Wᵐ = (M/Δt - (1-θ)A) Wᵐ⁻¹ + θFᵐ + (1-θ)Fᵐ⁻¹`
//! where `A` is the stationary LDG operator and `M` the `u`-mass matrix.
//! The step matrix is factorised once per run.

use std::sync::Arc;

use crate::assembly::{assemble_operator, load_vector, u_mass_matrix, FluxConfig};
use crate::basis::ReferenceTables;
use crate::error::{LdgError, Result};
use crate::field::{Component, DGField, DofMap};
use crate::mesh::Mesh2D;
use crate::norms::error_norms_exact;
use crate::problem::{constant, ExactSolution, ProblemSpec, ScalarField};
use crate::projection::{project, ProjectionKind};
use crate::solver::{LuFactor, DEFAULT_TOL};
use crate::sparse::{CooMatrix, CsrMatrix};

/// Field depending on space and time.
pub type TimeField = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Exact solution `u(x,y,t)` with its spatial gradient.
#[derive(Clone)]
pub struct TimeExact {
    pub u: TimeField,
    pub ux: TimeField,
    pub uy: TimeField,
}

impl TimeExact {
    /// `θ g(t_new) + (1-θ) g(t_old)` for `u`, `u_x`, `u_y`, as a stationary exact solution.
    fn blended(&self, t_new: f64, t_old: f64, theta: f64) -> ExactSolution {
        let mix = |g: &TimeField| -> ScalarField {
            let g = g.clone();
            Arc::new(move |x, y| theta * g(x, y, t_new) + (1.0 - theta) * g(x, y, t_old))
        };
        ExactSolution {
            u: mix(&self.u),
            ux: mix(&self.ux),
            uy: mix(&self.uy),
            laplacian: None,
        }
    }
}

/// Time-dependent problem data. The reaction coefficient does not depend on time.
#[derive(Clone)]
pub struct ParabolicProblem {
    pub eps: f64,
    pub b: ScalarField,
    pub f: TimeField,
    pub u0: ScalarField,
    pub exact: Option<TimeExact>,
}

impl ParabolicProblem {
    /// `u = e^{-t} x(1-x)y(1-y)` with the matching right-hand side.
    pub fn decaying_bubble(eps: f64, b: f64) -> Self {
        let bub = |x: f64, y: f64| x * (1.0 - x) * y * (1.0 - y);
        let lap = |x: f64, y: f64| -2.0 * y * (1.0 - y) - 2.0 * x * (1.0 - x);
        Self {
            eps,
            b: constant(b),
            f: Arc::new(move |x, y, t| (-t).exp() * ((b - 1.0) * bub(x, y) - eps * lap(x, y))),
            u0: Arc::new(bub),
            exact: Some(TimeExact {
                u: Arc::new(move |x, y, t| (-t).exp() * bub(x, y)),
                ux: Arc::new(|x, y, t| (-t).exp() * (1.0 - 2.0 * x) * y * (1.0 - y)),
                uy: Arc::new(|x, y, t| (-t).exp() * x * (1.0 - x) * (1.0 - 2.0 * y)),
            }),
        }
    }

    /// Time-independent solution of a stationary problem; `u_t = 0` so `f` is the stationary load.
    pub fn steady(prob: &ProblemSpec) -> Result<Self> {
        let exact = prob.exact.clone().ok_or(LdgError::MissingExactSolution)?;
        let f = prob.f.clone();
        let lift = |g: &ScalarField| -> TimeField {
            let g = g.clone();
            Arc::new(move |x, y, _| g(x, y))
        };
        Ok(Self {
            eps: prob.eps,
            b: prob.b.clone(),
            f: Arc::new(move |x, y, _| f(x, y)),
            u0: exact.u.clone(),
            exact: Some(TimeExact {
                u: lift(&exact.u),
                ux: lift(&exact.ux),
                uy: lift(&exact.uy),
            }),
        })
    }

    fn stationary_spec(&self) -> ProblemSpec {
        ProblemSpec {
            name: "parabolic".into(),
            eps: self.eps,
            b: self.b.clone(),
            f: constant(0.0),
            exact: None,
        }
    }
}

/// Equidistant partition of `[0, T]` with the θ weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub steps: usize,
    pub t_final: f64,
    pub theta: f64,
}

impl TimeGrid {
    pub fn new(steps: usize, t_final: f64, theta: f64) -> Result<Self> {
        if steps == 0 {
            return Err(LdgError::InvalidParameter {
                name: "M",
                value: 0.0,
                reason: "need at least one time step",
            });
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(LdgError::InvalidParameter {
                name: "T",
                value: t_final,
                reason: "must be positive and finite",
            });
        }
        if !(0.5..=1.0).contains(&theta) {
            return Err(LdgError::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "must lie in [1/2, 1]",
            });
        }
        Ok(Self { steps, t_final, theta })
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    /// `t^m`; the last node is `T` exactly.
    #[inline]
    pub fn time(&self, m: usize) -> f64 {
        if m == self.steps {
            self.t_final
        } else {
            m as f64 * self.t_final / self.steps as f64
        }
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub u_norm: f64,
    /// `‖u(tᵐ) - Uᵐ‖`, when an exact solution is known
    pub l2_error: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ParabolicOutcome {
    pub field: DGField,
    /// `‖u(T) - U^M‖`
    pub final_l2_error: Option<f64>,
    /// `Δt Σ ‖w^{m,θ} - W^{m,θ}‖²_E`
    pub energy_sum: Option<f64>,
    pub trace: Vec<StepRecord>,
}

impl ParabolicOutcome {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("step,time,u_norm,l2_error,residual\n");
        for r in &self.trace {
            let err = r.l2_error.map_or(String::new(), |e| format!("{e:.6e}"));
            s.push_str(&format!("{},{:.6e},{:.6e},{},{:.3e}\n", r.step, r.time, r.u_norm, err, r.residual));
        }
        s
    }
}

/// Notice for layer meshes whose `σ` is below the `k+2` the time-dependent analysis assumes.
pub fn sigma_notice(sigma: f64, degree: usize) -> Option<String> {
    let need = degree as f64 + 2.0;
    (sigma < need).then(|| format!("note: sigma = {sigma} is below k+2 = {need}; the time-dependent error estimate assumes sigma >= k+2"))
}

/// `U⁰ = Πu₀` with `P⁰, Q⁰` from the `s`, `r` rows of `A` so that the initial state is discretely consistent.
pub fn initial_state(prob: &ParabolicProblem, mesh: &Mesh2D, tables: &ReferenceTables, a: &CsrMatrix) -> Result<DGField> {
    let mut w = DGField::zeros(mesh, tables.basis);
    project(&ProjectionKind::L2, &*prob.u0, mesh, tables)?.write_into(&mut w, Component::U);
    let dofs = w.dofs;
    let mut flux_part = Vec::with_capacity(2 * dofs.n_elements() * dofs.nb);
    for e in 0..dofs.n_elements() {
        for comp in [Component::P, Component::Q] {
            for m in 0..dofs.nb {
                let row = dofs.dof(e, comp, m);
                let (cols, vals) = a.row(row);
                let mut s = 0.0;
                let mut diag = 0.0;
                for (&c, &v) in cols.iter().zip(vals) {
                    match dofs.locate(c).1 {
                        Component::U => s += v * w.data[c],
                        _ if c == row => diag = v,
                        _ if v != 0.0 => {
                            return Err(LdgError::Config("flux mass block is not diagonal".into()));
                        }
                        _ => {}
                    }
                }
                flux_part.push((row, -s / diag));
            }
        }
    }
    for (row, v) in flux_part {
        w.data[row] = v;
    }
    Ok(w)
}

fn add_scaled(a: &CsrMatrix, sa: f64, b: &CsrMatrix, sb: f64) -> CsrMatrix {
    let mut coo = CooMatrix::with_capacity(a.nrows, a.ncols, a.nnz() + b.nnz());
    for (r, c, v) in a.to_triplets() {
        coo.push(r, c, sa * v);
    }
    for (r, c, v) in b.to_triplets() {
        coo.push(r, c, sb * v);
    }
    coo.to_csr()
}

fn l2_error_u(w: &DGField, u: &dyn Fn(f64, f64) -> f64, mesh: &Mesh2D, tables: &ReferenceTables) -> f64 {
    let mut s = 0.0;
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let cell = mesh.cell(i, j);
            let blk = w.block(w.dofs.element(i, j), Component::U);
            for q in 0..tables.n_volume() {
                let (x, y) = cell.map(tables.point[q].0, tables.point[q].1);
                let d = u(x, y) - tables.value_at(blk, q);
                s += tables.weight[q] * cell.area() * d * d;
            }
        }
    }
    s.sqrt()
}

/// Runs the fully discrete scheme to `T`. With `keep_trace` every step is recorded.
pub fn theta_solve(
    prob: &ParabolicProblem,
    mesh: &Mesh2D,
    tables: &ReferenceTables,
    flux: &FluxConfig,
    grid: &TimeGrid,
    keep_trace: bool,
) -> Result<ParabolicOutcome> {
    let TimeGrid { steps, theta, .. } = *grid;
    let dt = grid.dt();
    let a = assemble_operator(mesh, &prob.stationary_spec(), flux, tables)?;
    let dofs = DofMap::new(mesh, tables.basis);
    let mass = u_mass_matrix(mesh, &dofs);
    let lhs = add_scaled(&mass, 1.0 / dt, &a, theta).with_symmetric_pattern();
    let explicit = add_scaled(&mass, 1.0 / dt, &a, -(1.0 - theta));
    let lu = LuFactor::new(&lhs)?;

    let load_at = |t: f64| load_vector(mesh, tables, &dofs, &|x, y| (prob.f)(x, y, t));
    let mut w = initial_state(prob, mesh, tables, &a)?;
    let mut f_old = load_at(0.0);
    let mut energy_sum = prob.exact.as_ref().map(|_| 0.0);
    let mut trace = Vec::new();
    if keep_trace {
        trace.push(StepRecord {
            step: 0,
            time: 0.0,
            u_norm: w.l2_norm_u(mesh),
            l2_error: prob.exact.as_ref().map(|ex| l2_error_u(&w, &|x, y| (ex.u)(x, y, 0.0), mesh, tables)),
            residual: 0.0,
        });
    }

    for m in 1..=steps {
        let (t_old, t_new) = (grid.time(m - 1), grid.time(m));
        let f_new = load_at(t_new);
        let mut rhs = explicit.matvec(&w.data);
        for (r, (fnew, fold)) in rhs.iter_mut().zip(f_new.iter().zip(&f_old)) {
            *r += theta * fnew + (1.0 - theta) * fold;
        }
        let (x, residual, _) = lu.solve_refined(&lhs, &rhs, DEFAULT_TOL, 3);
        if !(residual <= DEFAULT_TOL) {
            return Err(LdgError::ResidualTooLarge { residual, tol: DEFAULT_TOL });
        }
        let next = DGField::from_vec(dofs, tables.basis, x);
        if let (Some(sum), Some(ex)) = (energy_sum.as_mut(), prob.exact.as_ref()) {
            let mut blend = next.clone();
            for (v, old) in blend.data.iter_mut().zip(&w.data) {
                *v = theta * *v + (1.0 - theta) * old;
            }
            let wt = ex.blended(t_new, t_old, theta);
            *sum += dt * error_norms_exact(&blend, &wt, prob.eps, &*prob.b, flux, mesh, tables)?.energy_sq();
        }
        w = next;
        f_old = f_new;
        if keep_trace {
            trace.push(StepRecord {
                step: m,
                time: t_new,
                u_norm: w.l2_norm_u(mesh),
                l2_error: prob.exact.as_ref().map(|ex| l2_error_u(&w, &|x, y| (ex.u)(x, y, t_new), mesh, tables)),
                residual,
            });
        }
    }

    let t_final = grid.time(steps);
    let final_l2_error = prob.exact.as_ref().map(|ex| l2_error_u(&w, &|x, y| (ex.u)(x, y, t_final), mesh, tables));
    Ok(ParabolicOutcome {
        field: w,
        final_l2_error,
        energy_sum,
        trace,
    })
}
