//! Problem data for `-ε Δu + b u = f` on the unit square with `u = 0` on the boundary.

use std::fmt;
use std::sync::Arc;

use crate::basis::ReferenceTables;
use crate::error::{LdgError, Result};
use crate::mesh::Mesh2D;

/// Scalar field on the unit square.
pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Closed-form exact solution with the derivatives needed for the flux variables.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarField,
    pub ux: ScalarField,
    pub uy: ScalarField,
    /// `Δu`, used to verify the manufactured right-hand side.
    pub laplacian: Option<ScalarField>,
}

impl ExactSolution {
    /// Exact triple `(u, εu_x, εu_y)` at a point.
    #[inline]
    pub fn triple(&self, eps: f64, x: f64, y: f64) -> [f64; 3] {
        [(self.u)(x, y), eps * (self.ux)(x, y), eps * (self.uy)(x, y)]
    }
}

/// Stationary singularly perturbed reaction–diffusion problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub eps: f64,
    pub b: ScalarField,
    pub f: ScalarField,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("eps", &self.eps)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    /// Problem with an attached exact solution; `f = -εΔu + b u` is formed from it.
    pub fn manufactured(name: impl Into<String>, eps: f64, b: ScalarField, exact: ExactSolution) -> Result<Self> {
        let lap = exact
            .laplacian
            .clone()
            .ok_or_else(|| LdgError::Config("manufactured problem needs the Laplacian".into()))?;
        let (u, bb) = (exact.u.clone(), b.clone());
        let f: ScalarField = Arc::new(move |x, y| -eps * lap(x, y) + bb(x, y) * u(x, y));
        Ok(Self {
            name: name.into(),
            eps,
            b,
            f,
            exact: Some(exact),
        })
    }

    /// Samples `b` at every volume quadrature point of the mesh.
    pub fn check_reaction(&self, mesh: &Mesh2D, tables: &ReferenceTables) -> Result<()> {
        for j in 0..mesh.ny() {
            for i in 0..mesh.nx() {
                let cell = mesh.cell(i, j);
                for &(xh, yh) in &tables.point {
                    let (x, y) = cell.map(xh, yh);
                    let value = (self.b)(x, y);
                    if !(value > 0.0) {
                        return Err(LdgError::NonPositiveReaction { x, y, value });
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest `|f - (-εΔu + b u)|` over the given points, if the Laplacian is known.
    pub fn manufactured_residual(&self, points: &[(f64, f64)]) -> Option<f64> {
        let ex = self.exact.as_ref()?;
        let lap = ex.laplacian.as_ref()?;
        Some(
            points
                .iter()
                .map(|&(x, y)| ((self.f)(x, y) - (-self.eps * lap(x, y) + (self.b)(x, y) * (ex.u)(x, y))).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Constant field helper.
pub fn constant(c: f64) -> ScalarField {
    Arc::new(move |_, _| c)
}

/// `u = x(1-x)y(1-y)`, contained in `Q²`; used for polynomial-exactness checks.
pub fn bubble() -> ExactSolution {
    ExactSolution {
        u: Arc::new(|x, y| x * (1.0 - x) * y * (1.0 - y)),
        ux: Arc::new(|x, y| (1.0 - 2.0 * x) * y * (1.0 - y)),
        uy: Arc::new(|x, y| x * (1.0 - x) * (1.0 - 2.0 * y)),
        laplacian: Some(Arc::new(|x, y| -2.0 * y * (1.0 - y) - 2.0 * x * (1.0 - x))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Basis;

    #[test]
    fn negative_reaction_is_rejected() {
        let mesh = Mesh2D::uniform(4).unwrap();
        let t = ReferenceTables::new(Basis::new(1).unwrap(), 5).unwrap();
        let p = ProblemSpec {
            name: "bad".into(),
            eps: 1.0,
            b: Arc::new(|x, _| x - 0.5),
            f: constant(0.0),
            exact: None,
        };
        assert!(matches!(p.check_reaction(&mesh, &t), Err(LdgError::NonPositiveReaction { .. })));
    }

    #[test]
    fn bubble_manufactured_residual_vanishes() {
        let p = ProblemSpec::manufactured("bubble", 0.3, constant(2.0), bubble()).unwrap();
        let pts = [(0.1, 0.2), (0.5, 0.5), (0.9, 0.3)];
        assert!(p.manufactured_residual(&pts).unwrap() < 1e-15);
    }
}
