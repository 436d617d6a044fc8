//! Error norms of a discrete solution against an exact triple, and observed
//! convergence rates.
//!
//! The energy norm is the one induced by the bilinear form,
//! `ε⁻¹(‖e_p‖² + ‖e_q‖²) + ‖b^{1/2} e_u‖² + Σ λ ∫ [[e_u]]²`. The balanced
//! norm replaces `ε⁻¹` by `ε^{-3/2}` and the jump weights by one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assembly::FluxConfig;
use crate::basis::{Edge, ReferenceTables};
use crate::error::{LdgError, Result};
use crate::field::{Component, DGField};
use crate::mesh::Mesh2D;
use crate::problem::{ExactSolution, ProblemSpec};

/// Squared error components. Weighted totals are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub eps: f64,
    /// `‖e_p‖²`
    pub p_sq: f64,
    /// `‖e_q‖²`
    pub q_sq: f64,
    /// `‖b^{1/2} e_u‖²`
    pub u_sq: f64,
    /// `Σ_i λ_i ∫ [[e_u]]²` over vertical edges
    pub jump_v_weighted: f64,
    /// `Σ_j λ_j ∫ [[e_u]]²` over horizontal edges
    pub jump_h_weighted: f64,
    /// unweighted vertical jump sum
    pub jump_v: f64,
    /// unweighted horizontal jump sum
    pub jump_h: f64,
}

impl NormReport {
    /// `ε⁻¹‖e_p‖²`
    pub fn energy_p(&self) -> f64 {
        self.p_sq / self.eps
    }

    pub fn energy_q(&self) -> f64 {
        self.q_sq / self.eps
    }

    /// `ε^{-3/2}‖e_p‖²`
    pub fn balanced_p(&self) -> f64 {
        self.p_sq / (self.eps * self.eps.sqrt())
    }

    pub fn balanced_q(&self) -> f64 {
        self.q_sq / (self.eps * self.eps.sqrt())
    }

    pub fn energy_sq(&self) -> f64 {
        self.energy_p() + self.energy_q() + self.u_sq + self.jump_v_weighted + self.jump_h_weighted
    }

    pub fn balanced_sq(&self) -> f64 {
        self.balanced_p() + self.balanced_q() + self.u_sq + self.jump_v + self.jump_h
    }

    pub fn energy(&self) -> f64 {
        self.energy_sq().sqrt()
    }

    pub fn balanced(&self) -> f64 {
        self.balanced_sq().sqrt()
    }

    /// Value of the selected norm.
    pub fn get(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Energy => self.energy(),
            NormKind::Balanced => self.balanced(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Energy,
    Balanced,
}

impl NormKind {
    pub const ALL: [NormKind; 2] = [NormKind::Energy, NormKind::Balanced];
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::Energy => "energy",
            NormKind::Balanced => "balanced",
        })
    }
}

impl FromStr for NormKind {
    type Err = LdgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "energy" => Ok(NormKind::Energy),
            "balanced" => Ok(NormKind::Balanced),
            o => Err(LdgError::Config(format!("unknown norm `{o}`"))),
        }
    }
}

/// Error norms of `wh` against the exact solution carried by `prob`.
pub fn error_norms(
    wh: &DGField,
    prob: &ProblemSpec,
    flux: &FluxConfig,
    mesh: &Mesh2D,
    tables: &ReferenceTables,
) -> Result<NormReport> {
    let exact = prob.exact.as_ref().ok_or(LdgError::MissingExactSolution)?;
    error_norms_exact(wh, exact, prob.eps, &*prob.b, flux, mesh, tables)
}

/// As [`error_norms`] with the exact solution and reaction passed directly.
pub fn error_norms_exact(
    wh: &DGField,
    exact: &ExactSolution,
    eps: f64,
    b: &dyn Fn(f64, f64) -> f64,
    flux: &FluxConfig,
    mesh: &Mesh2D,
    tables: &ReferenceTables,
) -> Result<NormReport> {
    flux.check(mesh)?;
    let dofs = wh.dofs;
    if dofs.nx != mesh.nx() || dofs.ny != mesh.ny() || dofs.nb != tables.basis.size() {
        return Err(LdgError::DimensionMismatch {
            expected: 3 * mesh.n_elements() * tables.basis.size(),
            got: wh.data.len(),
        });
    }
    let (mut p_sq, mut q_sq, mut u_sq) = (0.0, 0.0, 0.0);
    for j in 0..mesh.ny() {
        for i in 0..mesh.nx() {
            let e = dofs.element(i, j);
            let cell = mesh.cell(i, j);
            let (bu, bp, bq) = (wh.block(e, Component::U), wh.block(e, Component::P), wh.block(e, Component::Q));
            let (mut sp, mut sq, mut su) = (0.0, 0.0, 0.0);
            for q in 0..tables.n_volume() {
                let (x, y) = cell.map(tables.point[q].0, tables.point[q].1);
                let [u, p, qq] = exact.triple(eps, x, y);
                let w = tables.weight[q];
                let eu = u - tables.value_at(bu, q);
                let ep = p - tables.value_at(bp, q);
                let eq = qq - tables.value_at(bq, q);
                su += w * b(x, y) * eu * eu;
                sp += w * ep * ep;
                sq += w * eq * eq;
            }
            let area = cell.area();
            u_sq += area * su;
            p_sq += area * sp;
            q_sq += area * sq;
        }
    }

    let nq = tables.quad.len();
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let (mut jv, mut jvw, mut jh, mut jhw) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..=nx {
        let x = mesh.mx.points[i];
        let mut s = 0.0;
        for j in 0..ny {
            let (y0, hy) = (mesh.my.points[j], mesh.my.h(j));
            for t in 0..nq {
                let y = y0 + hy * tables.quad.nodes[t];
                let ue = (exact.u)(x, y);
                // [[e]] = e⁺ - e⁻, with the missing side dropped on the boundary
                let plus = if i < nx { ue - tables.trace_at(wh.block(dofs.element(i, j), Component::U), Edge::Left, t) } else { 0.0 };
                let minus = if i > 0 { ue - tables.trace_at(wh.block(dofs.element(i - 1, j), Component::U), Edge::Right, t) } else { 0.0 };
                let jmp = plus - minus;
                s += hy * tables.quad.weights[t] * jmp * jmp;
            }
        }
        jv += s;
        jvw += flux.vertical[i] * s;
    }
    for j in 0..=ny {
        let y = mesh.my.points[j];
        let mut s = 0.0;
        for i in 0..nx {
            let (x0, hx) = (mesh.mx.points[i], mesh.mx.h(i));
            for t in 0..nq {
                let x = x0 + hx * tables.quad.nodes[t];
                let ue = (exact.u)(x, y);
                let plus = if j < ny { ue - tables.trace_at(wh.block(dofs.element(i, j), Component::U), Edge::Bottom, t) } else { 0.0 };
                let minus = if j > 0 { ue - tables.trace_at(wh.block(dofs.element(i, j - 1), Component::U), Edge::Top, t) } else { 0.0 };
                let jmp = plus - minus;
                s += hx * tables.quad.weights[t] * jmp * jmp;
            }
        }
        jh += s;
        jhw += flux.horizontal[j] * s;
    }
    Ok(NormReport {
        eps,
        p_sq,
        q_sq,
        u_sq,
        jump_v_weighted: jvw,
        jump_h_weighted: jhw,
        jump_v: jv,
        jump_h: jh,
    })
}

/// Rate convention: `r_S` measures against `ln N / N`, `r_2` against `1/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateMode {
    #[serde(rename = "rS")]
    RS,
    #[serde(rename = "r2")]
    R2,
}

impl RateMode {
    /// `r_S` on Shishkin meshes, `r_2` otherwise.
    pub fn for_family(family: crate::mesh::MeshFamily) -> Self {
        if family == crate::mesh::MeshFamily::Shishkin {
            RateMode::RS
        } else {
            RateMode::R2
        }
    }
}

/// Observed rates between consecutive entries of a doubling sequence of `ns`.
pub fn convergence_rates(errors: &[f64], ns: &[usize], mode: RateMode) -> Result<Vec<f64>> {
    if errors.len() != ns.len() {
        return Err(LdgError::Rates("errors and N lists differ in length"));
    }
    if errors.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(LdgError::Rates("errors must be positive and finite"));
    }
    if ns.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(LdgError::Rates("N values must double"));
    }
    Ok(errors
        .windows(2)
        .zip(ns)
        .map(|(e, &n)| {
            let num = e[0].ln() - e[1].ln();
            let nf = n as f64;
            let den = match mode {
                RateMode::RS => (2.0 * nf.ln() / (2.0 * nf).ln()).ln(),
                RateMode::R2 => 2f64.ln(),
            };
            num / den
        })
        .collect())
}
