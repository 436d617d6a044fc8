//! Discrete fields in `V_N³` and the global degree-of-freedom layout.
//!
//! Elements are ordered lexicographically with `j` outer and `i` inner. Each
//! element stores its `u`, `p`, `q` coefficient blocks contiguously, each of
//! length `(k+1)²`.

use crate::basis::Basis;
use crate::mesh::Mesh2D;

/// The three unknowns of the first-order system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    U = 0,
    P = 1,
    Q = 2,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::U, Component::P, Component::Q];
}

/// Index arithmetic for the global vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    pub nx: usize,
    pub ny: usize,
    /// modes per element and component, `(k+1)²`
    pub nb: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh2D, basis: Basis) -> Self {
        Self {
            nx: mesh.nx(),
            ny: mesh.ny(),
            nb: basis.size(),
        }
    }

    #[inline]
    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn len(&self) -> usize {
        3 * self.n_elements() * self.nb
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn element(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Global index of mode `a` of component `c` on element `e`.
    #[inline]
    pub fn dof(&self, e: usize, c: Component, a: usize) -> usize {
        (3 * e + c as usize) * self.nb + a
    }

    /// Inverse of [`DofMap::dof`].
    #[inline]
    pub fn locate(&self, idx: usize) -> (usize, Component, usize) {
        let block = idx / self.nb;
        let a = idx % self.nb;
        let c = match block % 3 {
            0 => Component::U,
            1 => Component::P,
            _ => Component::Q,
        };
        (block / 3, c, a)
    }
}

/// Coefficients of `(u, p, q)` in the tensor Legendre basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DGField {
    pub basis: Basis,
    pub dofs: DofMap,
    pub data: Vec<f64>,
}

impl DGField {
    pub fn zeros(mesh: &Mesh2D, basis: Basis) -> Self {
        let dofs = DofMap::new(mesh, basis);
        Self {
            basis,
            dofs,
            data: vec![0.0; dofs.len()],
        }
    }

    pub fn from_vec(dofs: DofMap, basis: Basis, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dofs.len());
        Self { basis, dofs, data }
    }

    #[inline]
    pub fn block(&self, e: usize, c: Component) -> &[f64] {
        let s = self.dofs.dof(e, c, 0);
        &self.data[s..s + self.dofs.nb]
    }

    #[inline]
    pub fn block_mut(&mut self, e: usize, c: Component) -> &mut [f64] {
        let s = self.dofs.dof(e, c, 0);
        let nb = self.dofs.nb;
        &mut self.data[s..s + nb]
    }

    /// Evaluates component `c` at physical point `(x, y)` inside element `(i, j)`.
    pub fn eval(&self, mesh: &Mesh2D, i: usize, j: usize, c: Component, x: f64, y: f64) -> f64 {
        let cell = mesh.cell(i, j);
        let e = self.dofs.element(i, j);
        self.basis.evaluate(self.block(e, c), (x - cell.x0) / cell.hx, (y - cell.y0) / cell.hy)
    }

    /// `‖U‖_{L²}` of the `u` component (orthonormal basis makes this a weighted sum).
    pub fn l2_norm_u(&self, mesh: &Mesh2D) -> f64 {
        let mut s = 0.0;
        for j in 0..mesh.ny() {
            for i in 0..mesh.nx() {
                let e = self.dofs.element(i, j);
                let area = mesh.cell(i, j).area();
                s += area * self.block(e, Component::U).iter().map(|c| c * c).sum::<f64>();
            }
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dof_layout_roundtrip() {
        let mesh = Mesh2D::uniform(4).unwrap();
        let basis = Basis::new(2).unwrap();
        let m = DofMap::new(&mesh, basis);
        assert_eq!(m.len(), 3 * 16 * 9);
        for idx in 0..m.len() {
            let (e, c, a) = m.locate(idx);
            assert_eq!(m.dof(e, c, a), idx);
        }
        assert_eq!(m.dof(1, Component::U, 0), 27);
        assert_eq!(m.dof(0, Component::P, 0), 9);
    }
}
