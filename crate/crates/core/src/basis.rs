//! Tensor-product Legendre basis for `Q^k` on the reference square.
//!
//! Per axis the basis is the shifted Legendre family orthonormal in
//! `L²(0,1)`: `L_m(x) = √(2m+1) P_m(2x-1)`. Two-dimensional functions are
//! indexed lexicographically, `a = m (k+1) + n` for `L_m(x̂) L_n(ŷ)`, so the
//! x-degree is the slow index.

use crate::error::{LdgError, Result};
use crate::quadrature::{gauss_legendre, QuadRule};

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 3;

/// Edges of the reference square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    /// `x̂ = 0`
    Left,
    /// `x̂ = 1`
    Right,
    /// `ŷ = 0`
    Bottom,
    /// `ŷ = 1`
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    /// Reference point on the edge for edge parameter `t ∈ [0,1]`.
    #[inline]
    pub fn point(self, t: f64) -> (f64, f64) {
        match self {
            Edge::Left => (0.0, t),
            Edge::Right => (1.0, t),
            Edge::Bottom => (t, 0.0),
            Edge::Top => (t, 1.0),
        }
    }
}

/// `Q^k` tensor Legendre basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis {
    pub degree: usize,
}

impl Basis {
    pub fn new(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(LdgError::Degree(degree));
        }
        Ok(Self { degree })
    }

    /// Number of 1D modes, `k + 1`.
    #[inline]
    pub fn n1(&self) -> usize {
        self.degree + 1
    }

    /// Number of 2D modes, `(k + 1)²`.
    #[inline]
    pub fn size(&self) -> usize {
        self.n1() * self.n1()
    }

    #[inline]
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.n1() + n
    }

    /// `(m, n)` degrees of mode `a`.
    #[inline]
    pub fn degrees(&self, a: usize) -> (usize, usize) {
        (a / self.n1(), a % self.n1())
    }

    /// Values `L_0(x), …, L_k(x)`.
    pub fn eval_1d(&self, x: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.n1()];
        let mut d = vec![0.0; self.n1()];
        legendre_1d(self.degree, x, &mut v, &mut d);
        v
    }

    /// Derivatives `L_0'(x), …, L_k'(x)`.
    pub fn eval_1d_derivative(&self, x: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.n1()];
        let mut d = vec![0.0; self.n1()];
        legendre_1d(self.degree, x, &mut v, &mut d);
        d
    }

    /// All `(k+1)²` tensor values at `(x̂, ŷ)` in lexicographic order.
    pub fn eval_2d(&self, xh: f64, yh: f64) -> Vec<f64> {
        let lx = self.eval_1d(xh);
        let ly = self.eval_1d(yh);
        let mut out = Vec::with_capacity(self.size());
        for a in &lx {
            for b in &ly {
                out.push(a * b);
            }
        }
        out
    }

    /// `∂/∂x̂` of the tensor basis.
    pub fn eval_2d_dx(&self, xh: f64, yh: f64) -> Vec<f64> {
        let dx = self.eval_1d_derivative(xh);
        let ly = self.eval_1d(yh);
        dx.iter().flat_map(|a| ly.iter().map(move |b| a * b)).collect()
    }

    /// `∂/∂ŷ` of the tensor basis.
    pub fn eval_2d_dy(&self, xh: f64, yh: f64) -> Vec<f64> {
        let lx = self.eval_1d(xh);
        let dy = self.eval_1d_derivative(yh);
        lx.iter().flat_map(|a| dy.iter().map(move |b| a * b)).collect()
    }

    /// Evaluates the element polynomial with coefficients `coeffs` at `(x̂, ŷ)`.
    pub fn evaluate(&self, coeffs: &[f64], xh: f64, yh: f64) -> f64 {
        debug_assert_eq!(coeffs.len(), self.size());
        let lx = self.eval_1d(xh);
        let ly = self.eval_1d(yh);
        let mut s = 0.0;
        for (m, a) in lx.iter().enumerate() {
            let row = &coeffs[m * self.n1()..(m + 1) * self.n1()];
            s += a * row.iter().zip(&ly).map(|(c, b)| c * b).sum::<f64>();
        }
        s
    }

    /// One-sided trace of the element polynomial on `edge` at parameter `t`.
    pub fn element_trace(&self, coeffs: &[f64], edge: Edge, t: f64) -> f64 {
        let (xh, yh) = edge.point(t);
        self.evaluate(coeffs, xh, yh)
    }
}

/// Fills `v[m] = L_m(x)` and `d[m] = L_m'(x)` for `m = 0..=k`.
fn legendre_1d(k: usize, x: f64, v: &mut [f64], d: &mut [f64]) {
    let t = 2.0 * x - 1.0;
    // unnormalised P_m and dP_m/dt
    let mut p = [0.0f64; MAX_DEGREE + 2];
    let mut dp = [0.0f64; MAX_DEGREE + 2];
    p[0] = 1.0;
    if k >= 1 {
        p[1] = t;
        dp[1] = 1.0;
    }
    for m in 1..k {
        let mf = m as f64;
        p[m + 1] = ((2.0 * mf + 1.0) * t * p[m] - mf * p[m - 1]) / (mf + 1.0);
        dp[m + 1] = dp[m - 1] + (2.0 * mf + 1.0) * p[m];
    }
    for m in 0..=k {
        let s = (2.0 * m as f64 + 1.0).sqrt();
        v[m] = s * p[m];
        d[m] = 2.0 * s * dp[m];
    }
}

/// Basis values tabulated at the tensor quadrature points and edge points.
///
/// Volume points are ordered `q = qx * nq + qy`.
#[derive(Debug, Clone)]
pub struct ReferenceTables {
    pub basis: Basis,
    pub quad: QuadRule,
    /// `val[q][a]`
    pub val: Vec<Vec<f64>>,
    /// reference x-derivative `dx[q][a]`
    pub dx: Vec<Vec<f64>>,
    /// reference y-derivative `dy[q][a]`
    pub dy: Vec<Vec<f64>>,
    /// tensor quadrature weight for volume point `q`
    pub weight: Vec<f64>,
    /// reference coordinates of volume point `q`
    pub point: Vec<(f64, f64)>,
    /// `trace[edge][t][a]` at the 1D quadrature nodes along each edge
    trace: [Vec<Vec<f64>>; 4],
}

impl ReferenceTables {
    pub fn new(basis: Basis, quad_points: usize) -> Result<Self> {
        let quad = gauss_legendre(quad_points)?;
        let nq = quad.len();
        let mut val = Vec::with_capacity(nq * nq);
        let mut dx = Vec::with_capacity(nq * nq);
        let mut dy = Vec::with_capacity(nq * nq);
        let mut weight = Vec::with_capacity(nq * nq);
        let mut point = Vec::with_capacity(nq * nq);
        for qx in 0..nq {
            for qy in 0..nq {
                let (x, y) = (quad.nodes[qx], quad.nodes[qy]);
                val.push(basis.eval_2d(x, y));
                dx.push(basis.eval_2d_dx(x, y));
                dy.push(basis.eval_2d_dy(x, y));
                weight.push(quad.weights[qx] * quad.weights[qy]);
                point.push((x, y));
            }
        }
        let trace = Edge::ALL.map(|e| {
            quad.nodes
                .iter()
                .map(|&t| {
                    let (x, y) = e.point(t);
                    basis.eval_2d(x, y)
                })
                .collect()
        });
        Ok(Self {
            basis,
            quad,
            val,
            dx,
            dy,
            weight,
            point,
            trace,
        })
    }

    /// Default per-axis rule size, `max(5, k + 2)`.
    pub fn default_points(basis: Basis) -> usize {
        (basis.degree + 2).max(5)
    }

    #[inline]
    pub fn n_volume(&self) -> usize {
        self.weight.len()
    }

    #[inline]
    pub fn trace(&self, edge: Edge) -> &[Vec<f64>] {
        match edge {
            Edge::Left => &self.trace[0],
            Edge::Right => &self.trace[1],
            Edge::Bottom => &self.trace[2],
            Edge::Top => &self.trace[3],
        }
    }

    /// Element polynomial at volume point `q`.
    #[inline]
    pub fn value_at(&self, coeffs: &[f64], q: usize) -> f64 {
        self.val[q].iter().zip(coeffs).map(|(a, c)| a * c).sum()
    }

    /// Element polynomial trace at edge node `t`.
    #[inline]
    pub fn trace_at(&self, coeffs: &[f64], edge: Edge, t: usize) -> f64 {
        self.trace(edge)[t].iter().zip(coeffs).map(|(a, c)| a * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthonormal_1d() {
        let b = Basis::new(3).unwrap();
        let q = gauss_legendre(12).unwrap();
        for m in 0..=3 {
            for n in 0..=3 {
                let g = q.integrate(|x| b.eval_1d(x)[m] * b.eval_1d(x)[n]);
                let e = if m == n { 1.0 } else { 0.0 };
                assert!((g - e).abs() < 1e-13, "({m},{n}) -> {g}");
            }
        }
    }

    #[test]
    fn size_and_order() {
        for k in 0..=3 {
            let b = Basis::new(k).unwrap();
            assert_eq!(b.size(), (k + 1) * (k + 1));
            for a in 0..b.size() {
                let (m, n) = b.degrees(a);
                assert_eq!(b.index(m, n), a);
            }
        }
        assert!(Basis::new(4).is_err());
    }

    #[test]
    fn constant_basis() {
        let b = Basis::new(0).unwrap();
        assert_eq!(b.eval_2d(0.3, 0.8), vec![1.0]);
    }

    #[test]
    fn linear_basis_at_origin() {
        let b = Basis::new(1).unwrap();
        let v = b.eval_2d(0.0, 0.0);
        let l1 = -3f64.sqrt();
        let expected = [1.0, l1, l1, l1 * l1];
        for (g, e) in v.iter().zip(expected) {
            assert!((g - e).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = Basis::new(3).unwrap();
        let h = 1e-6;
        for _ in 0..50 {
            let x: f64 = rng.gen_range(0.01..0.99);
            let y: f64 = rng.gen_range(0.01..0.99);
            let dx = b.eval_2d_dx(x, y);
            let dy = b.eval_2d_dy(x, y);
            let fx: Vec<f64> = b.eval_2d(x + h, y).iter().zip(b.eval_2d(x - h, y)).map(|(p, m)| (p - m) / (2.0 * h)).collect();
            let fy: Vec<f64> = b.eval_2d(x, y + h).iter().zip(b.eval_2d(x, y - h)).map(|(p, m)| (p - m) / (2.0 * h)).collect();
            for a in 0..b.size() {
                assert!((dx[a] - fx[a]).abs() < 1e-7, "dx a={a}");
                assert!((dy[a] - fy[a]).abs() < 1e-7, "dy a={a}");
            }
        }
    }

    #[test]
    fn traces_of_simple_fields() {
        let b = Basis::new(1).unwrap();
        // constant c = 2.5 is 2.5·L0L0
        let c = [2.5, 0.0, 0.0, 0.0];
        for e in Edge::ALL {
            for t in [0.0, 0.3, 1.0] {
                assert!((b.element_trace(&c, e, t) - 2.5).abs() < 1e-15);
            }
        }
        // x̂ = 1/2 + L1(x̂)/(2√3): coefficient of index (1,0) = 2
        let s3 = 3f64.sqrt();
        let xfield = [0.5, 0.0, 1.0 / (2.0 * s3), 0.0];
        for t in [0.0, 0.25, 0.9] {
            assert!((b.element_trace(&xfield, Edge::Right, t) - 1.0).abs() < 1e-15);
            assert!(b.element_trace(&xfield, Edge::Left, t).abs() < 1e-15);
        }
    }

    #[test]
    fn trace_equals_interior_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = Basis::new(3).unwrap();
        let coeffs: Vec<f64> = (0..b.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for e in Edge::ALL {
            let t = rng.gen_range(0.0..1.0);
            let (x, y) = e.point(t);
            assert!((b.element_trace(&coeffs, e, t) - b.evaluate(&coeffs, x, y)).abs() < 1e-14);
        }
    }

    #[test]
    fn tables_mass_is_identity() {
        for k in 0..=3 {
            let b = Basis::new(k).unwrap();
            let t = ReferenceTables::new(b, ReferenceTables::default_points(b)).unwrap();
            for a in 0..b.size() {
                for c in 0..b.size() {
                    let m: f64 = (0..t.n_volume()).map(|q| t.weight[q] * t.val[q][a] * t.val[q][c]).sum();
                    let e = if a == c { 1.0 } else { 0.0 };
                    assert!((m - e).abs() < 1e-13);
                }
            }
        }
    }
}
