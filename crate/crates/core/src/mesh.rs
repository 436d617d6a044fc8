//! Layer-adapted tensor-product meshes.
//!
//! Each direction is split into a fine graded region `[0, τ]`, an equidistant
//! coarse region `[τ, 1-τ]` with `N/2` cells and a mirrored fine region
//! `[1-τ, 1]`. The grading inside the fine regions is controlled by a mesh
//! generating function `φ` on `[0, 1/4]` with `φ(0) = 0`, `φ' > 0`, `φ'' ≥ 0`.
//!
//! Three families are provided:
//!
//! | family              | `φ(t)`                  | `ψ(t) = e^{-φ(t)}` | `max |ψ'|` |
//! |---------------------|-------------------------|--------------------|------------|
//! | Shishkin            | `4 t ln N`              | `N^{-4t}`          | `4 ln N`   |
//! | Bakhvalov–Shishkin  | `-ln[1 - 4(1-1/N) t]`   | `1 - 4(1-1/N) t`   | `4(1-1/N)` |
//! | Bakhvalov-type      | `-ln[1 - 4(1-√ε) t]`    | `1 - 4(1-√ε) t`    | `4(1-√ε)`  |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LdgError, Result};

/// Mesh generating family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshFamily {
    Shishkin,
    BakhvalovShishkin,
    BakhvalovType,
}

impl MeshFamily {
    pub const ALL: [MeshFamily; 3] = [
        MeshFamily::Shishkin,
        MeshFamily::BakhvalovShishkin,
        MeshFamily::BakhvalovType,
    ];

    /// Short label used in table headers.
    pub fn label(self) -> &'static str {
        match self {
            MeshFamily::Shishkin => "S-mesh",
            MeshFamily::BakhvalovShishkin => "BS-mesh",
            MeshFamily::BakhvalovType => "B-mesh",
        }
    }

    /// S-type meshes (Shishkin and Bakhvalov–Shishkin) versus the Bakhvalov-type mesh.
    pub fn is_s_type(self) -> bool {
        !matches!(self, MeshFamily::BakhvalovType)
    }

    /// Slope factor `1 - c` in `ψ(t) = 1 - 4(1-c)t` for the logarithmic families.
    fn log_shift(self, n: usize, eps: f64) -> f64 {
        match self {
            MeshFamily::Shishkin => 0.0,
            MeshFamily::BakhvalovShishkin => 1.0 / n as f64,
            MeshFamily::BakhvalovType => eps.sqrt(),
        }
    }

    /// The grading function `φ(t)` for `t ∈ [0, 1/4]`.
    pub fn phi(self, t: f64, n: usize, eps: f64) -> f64 {
        match self {
            MeshFamily::Shishkin => 4.0 * t * (n as f64).ln(),
            _ => {
                let c = self.log_shift(n, eps);
                // 1 - 4(1-c)t = (1 - 4t) + 4tc, both terms non-negative on [0, 1/4]
                -((1.0 - 4.0 * t) + 4.0 * t * c).ln()
            }
        }
    }

    /// `φ(i/N)` evaluated without forming `1 - 4(1-c)i/N` by subtraction.
    pub fn phi_at_index(self, i: usize, n: usize, eps: f64) -> f64 {
        debug_assert!(4 * i <= n);
        match self {
            MeshFamily::Shishkin => 4.0 * (i as f64 / n as f64) * (n as f64).ln(),
            _ => {
                let c = self.log_shift(n, eps);
                let psi = ((n - 4 * i) as f64 + 4.0 * i as f64 * c) / n as f64;
                -psi.ln()
            }
        }
    }

    /// `φ(1/4)`, evaluated in closed form (`ln N` or `-ln √ε`).
    pub fn phi_quarter(self, n: usize, eps: f64) -> f64 {
        match self {
            MeshFamily::Shishkin | MeshFamily::BakhvalovShishkin => (n as f64).ln(),
            MeshFamily::BakhvalovType => -0.5 * eps.ln(),
        }
    }

    /// `ψ(t) = e^{-φ(t)}`.
    pub fn psi(self, t: f64, n: usize, eps: f64) -> f64 {
        (-self.phi(t, n, eps)).exp()
    }

    /// Derivative `ψ'(t)`.
    pub fn psi_prime(self, t: f64, n: usize, eps: f64) -> f64 {
        match self {
            MeshFamily::Shishkin => {
                let ln_n = (n as f64).ln();
                -4.0 * ln_n * (-4.0 * t * ln_n).exp()
            }
            _ => -4.0 * (1.0 - self.log_shift(n, eps)),
        }
    }

    /// `max |ψ'|` over `[0, 1/4]`, attained at `t = 0` for all three families.
    pub fn max_abs_psi_prime(self, n: usize, eps: f64) -> f64 {
        self.psi_prime(0.0, n, eps).abs()
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MeshFamily::Shishkin => "shishkin",
            MeshFamily::BakhvalovShishkin => "bakhvalov-shishkin",
            MeshFamily::BakhvalovType => "bakhvalov-type",
        };
        f.write_str(s)
    }
}

impl FromStr for MeshFamily {
    type Err = LdgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s" | "shishkin" | "s-mesh" => Ok(MeshFamily::Shishkin),
            "bs" | "bakhvalov-shishkin" | "bs-mesh" => Ok(MeshFamily::BakhvalovShishkin),
            "b" | "bakhvalov" | "bakhvalov-type" | "b-mesh" => Ok(MeshFamily::BakhvalovType),
            other => Err(LdgError::Config(format!("unknown mesh family `{other}`"))),
        }
    }
}

/// Mesh construction parameters shared by both directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    pub family: MeshFamily,
    pub eps: f64,
    pub sigma: f64,
    pub beta: f64,
}

impl MeshParams {
    pub fn new(family: MeshFamily, eps: f64, sigma: f64, beta: f64) -> Self {
        Self {
            family,
            eps,
            sigma,
            beta,
        }
    }
}

/// Transition point and which branch of the `min` produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub tau: f64,
    /// `true` when `τ = 1/4` (the layer-scaled value exceeded it).
    pub clamped: bool,
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(LdgError::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

fn validate(family: MeshFamily, n: usize, eps: f64, sigma: f64, beta: f64) -> Result<()> {
    if n < 4 || !n.is_multiple_of(4) {
        return Err(LdgError::InvalidElementCount(n));
    }
    check_positive("eps", eps)?;
    check_positive("sigma", sigma)?;
    check_positive("beta", beta)?;
    if family == MeshFamily::BakhvalovType && eps >= 1.0 {
        return Err(LdgError::InvalidParameter {
            name: "eps",
            value: eps,
            reason: "the Bakhvalov-type grading requires eps < 1",
        });
    }
    Ok(())
}

/// `τ = min{1/4, (σ√ε/β) φ(1/4)}`.
pub fn compute_tau(family: MeshFamily, n: usize, eps: f64, sigma: f64, beta: f64) -> Result<Transition> {
    validate(family, n, eps, sigma, beta)?;
    let layer = sigma * eps.sqrt() / beta * family.phi_quarter(n, eps);
    Ok(if layer >= 0.25 {
        Transition {
            tau: 0.25,
            clamped: true,
        }
    } else {
        Transition {
            tau: layer,
            clamped: false,
        }
    })
}

/// One-dimensional layer-adapted mesh on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    pub n: usize,
    pub points: Vec<f64>,
    pub tau: f64,
    pub clamped: bool,
    /// `widths[i-1] = h_i = x_i - x_{i-1}`.
    pub widths: Vec<f64>,
    /// Global minimum width.
    pub hbar: f64,
    /// Maximum width over the two fine regions.
    pub h_ly: f64,
    /// `√ε` for S-type meshes, `1/N` for the B-type mesh.
    pub varrho: f64,
    /// `Θ_i` for `i = 1..=N/4`.
    pub theta: Vec<f64>,
    pub params: Option<MeshParams>,
}

impl Mesh1D {
    /// Builds the layer-adapted mesh.
    ///
    /// When `τ` is clamped to `1/4` the fine-region points are rescaled to
    /// `x_i = τ φ(i/N) / φ(1/4)`; in the unclamped regime this coincides with
    /// `(σ√ε/β) φ(i/N)`.
    pub fn layer_adapted(family: MeshFamily, n: usize, eps: f64, sigma: f64, beta: f64) -> Result<Self> {
        let Transition { tau, clamped } = compute_tau(family, n, eps, sigma, beta)?;
        let q = n / 4;
        let mut points = vec![0.0; n + 1];
        let scale = sigma * eps.sqrt() / beta;
        let phi_q = family.phi_quarter(n, eps);
        for (i, x) in points.iter_mut().enumerate().take(q).skip(1) {
            let phi = family.phi_at_index(i, n, eps);
            *x = if clamped { tau * phi / phi_q } else { scale * phi };
        }
        points[q] = tau;
        let nf = n as f64;
        for (i, x) in points.iter_mut().enumerate().take(n / 2).skip(q + 1) {
            *x = tau + 2.0 * (1.0 - 2.0 * tau) * ((4 * i - n) as f64 / (4.0 * nf));
        }
        points[n / 2] = 0.5;
        for i in (n / 2 + 1)..=n {
            points[i] = 1.0 - points[n - i];
        }
        let params = MeshParams::new(family, eps, sigma, beta);
        let varrho = if family.is_s_type() { eps.sqrt() } else { 1.0 / nf };
        Ok(Self::from_points(points, tau, clamped, varrho, Some(params)))
    }

    /// Equidistant mesh with `n` cells (used for smooth sanity problems).
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LdgError::InvalidElementCount(n));
        }
        let points: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        Ok(Self::from_points(points, 0.25, true, 1.0 / n as f64, None))
    }

    /// Mesh on arbitrary strictly increasing nodes from 0 to 1.
    pub fn from_nodes(points: Vec<f64>) -> Result<Self> {
        let n = points.len().saturating_sub(1);
        if n == 0 {
            return Err(LdgError::InvalidElementCount(n));
        }
        if points[0] != 0.0 || points[n] != 1.0 || points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LdgError::Config("mesh nodes must increase strictly from 0 to 1".into()));
        }
        let hmax = points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Ok(Self::from_points(points, 0.25, true, hmax, None))
    }

    fn from_points(points: Vec<f64>, tau: f64, clamped: bool, varrho: f64, params: Option<MeshParams>) -> Self {
        let n = points.len() - 1;
        let widths: Vec<f64> = points.windows(2).map(|w| w[1] - w[0]).collect();
        let hbar = widths.iter().copied().fold(f64::INFINITY, f64::min);
        let q = n / 4;
        let h_ly = if q == 0 {
            0.0
        } else {
            widths[..q]
                .iter()
                .chain(widths[n - q..].iter())
                .copied()
                .fold(0.0, f64::max)
        };
        let theta = match params {
            Some(p) => {
                let se = p.eps.sqrt();
                (1..=q)
                    .map(|i| (widths[i - 1] / se).min(1.0) * (-p.beta * points[i - 1] / (p.sigma * se)).exp())
                    .collect()
            }
            None => Vec::new(),
        };
        Self {
            n,
            points,
            tau,
            clamped,
            widths,
            hbar,
            h_ly,
            varrho,
            theta,
            params,
        }
    }

    /// Width of cell `i` (0-based), i.e. `h_{i+1}`.
    #[inline]
    pub fn h(&self, i: usize) -> f64 {
        self.widths[i]
    }

    /// Diagnostic quantities used to track the mesh constants.
    pub fn diagnostics(&self, eps: f64) -> DiagnosticsReport {
        let (family, n) = match self.params {
            Some(p) => (Some(p.family), self.n),
            None => (None, self.n),
        };
        let nf = n as f64;
        let se = eps.sqrt();
        let max_psi = family.map(|f| f.max_abs_psi_prime(n, eps)).unwrap_or(4.0);
        let theta = if self.theta.is_empty() {
            let sigma = self.params.map(|p| p.sigma).unwrap_or(1.0);
            let beta = self.params.map(|p| p.beta).unwrap_or(1.0);
            (1..=n / 4)
                .map(|i| (self.widths[i - 1] / se).min(1.0) * (-beta * self.points[i - 1] / (sigma * se)).exp())
                .collect()
        } else {
            self.theta.clone()
        };
        let theta_max = theta.iter().copied().fold(0.0, f64::max);
        let theta_sum = theta.iter().sum();
        DiagnosticsReport {
            theta_max_ratio: theta_max / (max_psi / nf),
            hbar_ratio: self.hbar / (se * max_psi / nf),
            h_ly_ratio: self.h_ly / self.varrho,
            theta,
            theta_max,
            theta_sum,
            hbar: self.hbar,
            h_ly: self.h_ly,
            varrho: self.varrho,
            max_abs_psi_prime: max_psi,
        }
    }

    /// CSV dump with columns `i, x_i, h_i, Theta_i` (empty for missing values).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,x_i,h_i,Theta_i\n");
        for (i, x) in self.points.iter().enumerate() {
            let h = if i == 0 { String::new() } else { format!("{:.16e}", self.widths[i - 1]) };
            let th = if i >= 1 && i <= self.theta.len() {
                format!("{:.16e}", self.theta[i - 1])
            } else {
                String::new()
            };
            out.push_str(&format!("{i},{x:.16e},{h},{th}\n"));
        }
        out
    }
}

/// Output of [`Mesh1D::diagnostics`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub theta: Vec<f64>,
    pub theta_max: f64,
    pub theta_sum: f64,
    pub hbar: f64,
    pub h_ly: f64,
    pub varrho: f64,
    pub max_abs_psi_prime: f64,
    /// `max Θ_i / (N⁻¹ max|ψ'|)`.
    pub theta_max_ratio: f64,
    /// `ℏ / (√ε N⁻¹ max|ψ'|)`.
    pub hbar_ratio: f64,
    /// `h_ly / ϱ`.
    pub h_ly_ratio: f64,
}

/// Tensor-product mesh `{x_i} × {y_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    pub mx: Mesh1D,
    pub my: Mesh1D,
}

impl Mesh2D {
    pub fn new(mx: Mesh1D, my: Mesh1D) -> Self {
        Self { mx, my }
    }

    /// Same layer-adapted mesh in both directions.
    pub fn layer_adapted(params: MeshParams, n: usize) -> Result<Self> {
        let m = Mesh1D::layer_adapted(params.family, n, params.eps, params.sigma, params.beta)?;
        Ok(Self { mx: m.clone(), my: m })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        let m = Mesh1D::uniform(n)?;
        Ok(Self { mx: m.clone(), my: m })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.mx.n
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.my.n
    }

    #[inline]
    pub fn n_elements(&self) -> usize {
        self.nx() * self.ny()
    }

    /// Element-lexicographic index (`j` outer, `i` inner), both 0-based.
    #[inline]
    pub fn element(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    /// Lower-left corner and widths of element `(i, j)`.
    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> Cell {
        Cell {
            x0: self.mx.points[i],
            y0: self.my.points[j],
            hx: self.mx.widths[i],
            hy: self.my.widths[j],
        }
    }
}

/// Geometry of one rectangular element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Cell {
    /// Maps reference coordinates in `[0,1]²` to physical ones.
    #[inline]
    pub fn map(&self, xh: f64, yh: f64) -> (f64, f64) {
        (self.x0 + self.hx * xh, self.y0 + self.hy * yh)
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.hx * self.hy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS_SWEEP: [f64; 13] = [
        1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11, 1e-12, 1e-13, 1e-14, 1e-15, 1e-16,
    ];
    const N_SWEEP: [usize; 6] = [8, 16, 32, 64, 128, 256];

    #[test]
    fn tau_shishkin_small_eps() {
        let t = compute_tau(MeshFamily::Shishkin, 8, 1e-8, 2.0, 1.0).unwrap();
        let expected = 2e-4 * 8f64.ln();
        assert!(!t.clamped);
        assert!((t.tau - expected).abs() < 1e-18);
        assert!((t.tau - 4.158883e-4).abs() < 1e-9);
    }

    #[test]
    fn tau_clamps_for_large_eps() {
        let t = compute_tau(MeshFamily::Shishkin, 8, 0.25, 2.0, 1.0).unwrap();
        assert!(t.clamped);
        assert_eq!(t.tau, 0.25);
    }

    #[test]
    fn tau_bs_matches_shishkin() {
        let s = compute_tau(MeshFamily::Shishkin, 8, 1e-8, 2.0, 1.0).unwrap();
        let bs = compute_tau(MeshFamily::BakhvalovShishkin, 8, 1e-8, 2.0, 1.0).unwrap();
        assert!((bs.tau - 4.158883e-4).abs() < 1e-9);
        assert!((bs.tau - s.tau).abs() < 1e-18);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(matches!(
            compute_tau(MeshFamily::Shishkin, 6, 1e-8, 2.0, 1.0),
            Err(LdgError::InvalidElementCount(6))
        ));
        assert!(compute_tau(MeshFamily::Shishkin, 0, 1e-8, 2.0, 1.0).is_err());
        assert!(compute_tau(MeshFamily::Shishkin, 8, -1.0, 2.0, 1.0).is_err());
        assert!(compute_tau(MeshFamily::Shishkin, 8, 1e-8, 0.0, 1.0).is_err());
        assert!(compute_tau(MeshFamily::BakhvalovType, 8, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn shishkin_n8_points() {
        let m = Mesh1D::layer_adapted(MeshFamily::Shishkin, 8, 1e-8, 2.0, 1.0).unwrap();
        let tau = 2e-4 * 8f64.ln();
        assert!((m.points[2] - tau).abs() < 1e-18);
        assert_eq!(m.points[2], m.tau);
        assert_eq!(m.points[4], 0.5);
        assert_eq!(m.points[6], 1.0 - m.points[2]);
        assert_eq!(m.points[0], 0.0);
        assert_eq!(m.points[8], 1.0);
    }

    #[test]
    fn family_formulas() {
        let n = 16;
        let eps = 1e-6;
        for t in [0.0, 0.05, 0.1, 0.2, 0.25] {
            let s = MeshFamily::Shishkin.phi(t, n, eps);
            assert!((s - 4.0 * t * (n as f64).ln()).abs() < 1e-14);
            let bs = MeshFamily::BakhvalovShishkin.phi(t, n, eps);
            assert!((bs + (1.0 - 4.0 * (1.0 - 1.0 / n as f64) * t).ln()).abs() < 1e-13);
            let b = MeshFamily::BakhvalovType.phi(t, n, eps);
            assert!((b + (1.0 - 4.0 * (1.0 - eps.sqrt()) * t).ln()).abs() < 1e-10);
        }
        assert!((MeshFamily::BakhvalovType.phi_quarter(n, 1e-16) - 8.0 * 10f64.ln()).abs() < 1e-12);
        assert!((MeshFamily::BakhvalovShishkin.phi_quarter(n, eps) - (n as f64).ln()).abs() < 1e-14);
    }

    #[test]
    fn grading_functions_are_convex_and_increasing() {
        for fam in MeshFamily::ALL {
            for &n in &N_SWEEP {
                for &eps in &EPS_SWEEP {
                    let samples: Vec<f64> = (0..=200).map(|s| fam.phi(0.25 * s as f64 / 200.0, n, eps)).collect();
                    assert_eq!(samples[0], 0.0);
                    for w in samples.windows(2) {
                        assert!(w[1] > w[0], "{fam} N={n} eps={eps}");
                    }
                    for w in samples.windows(3) {
                        assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-12 * w[2].abs().max(1.0));
                    }
                    // |ψ'| is largest at t = 0
                    let m = fam.max_abs_psi_prime(n, eps);
                    for s in 0..=50 {
                        let t = 0.25 * s as f64 / 50.0;
                        assert!(fam.psi_prime(t, n, eps).abs() <= m * (1.0 + 1e-14));
                    }
                    let h = 1e-6;
                    let fd = (fam.psi(0.1 + h, n, eps) - fam.psi(0.1 - h, n, eps)) / (2.0 * h);
                    assert!((fd - fam.psi_prime(0.1, n, eps)).abs() < 1e-5 * m);
                }
            }
        }
    }

    #[test]
    fn mesh_structure_across_sweep() {
        for fam in MeshFamily::ALL {
            for &n in &N_SWEEP {
                for &eps in &EPS_SWEEP {
                    let m = Mesh1D::layer_adapted(fam, n, eps, 2.0, 1.0).unwrap();
                    for w in m.points.windows(2) {
                        assert!(w[1] > w[0], "{fam} N={n} eps={eps} not increasing");
                    }
                    for i in 0..=n {
                        assert!((m.points[i] + m.points[n - i] - 1.0).abs() <= 1e-14);
                    }
                    assert_eq!(m.points[n / 4], m.tau);
                    assert_eq!(m.points[3 * n / 4], 1.0 - m.tau);
                    let mid = m.widths[n / 4];
                    for i in n / 4..3 * n / 4 {
                        assert!((m.widths[i] - mid).abs() <= 1e-14, "{fam} N={n} eps={eps}");
                    }
                    let hmin = m.widths.iter().copied().fold(f64::INFINITY, f64::min);
                    assert_eq!(m.hbar, hmin);
                }
            }
        }
    }

    #[test]
    fn width_ratios_in_layer() {
        for fam in MeshFamily::ALL {
            let mut c_min = f64::INFINITY;
            for &n in &N_SWEEP {
                for &eps in &EPS_SWEEP[2..] {
                    let m = Mesh1D::layer_adapted(fam, n, eps, 2.0, 1.0).unwrap();
                    let stop = if fam.is_s_type() { n / 4 - 1 } else { n / 4 - 2 };
                    for i in 1..=stop {
                        let r = m.h(i - 1) / m.h(i);
                        assert!(r <= 1.0 + 1e-12, "{fam} N={n} eps={eps} i={i} r={r}");
                        c_min = c_min.min(r);
                        let j = n - i;
                        let r2 = m.h(j) / m.h(j - 1);
                        // mirrored widths are differences of points near 1
                        let tol = 1e-12 + 8.0 * f64::EPSILON / m.h(i);
                        assert!((r - r2).abs() < tol, "{fam} N={n} eps={eps} i={i}: {r} vs {r2}");
                    }
                }
            }
            assert!(c_min > 0.1, "{fam}: measured ratio constant {c_min}");
        }
    }

    #[test]
    fn diagnostics_bounded_shishkin() {
        for &n in &N_SWEEP {
            let m = Mesh1D::layer_adapted(MeshFamily::Shishkin, n, 1e-8, 2.0, 1.0).unwrap();
            let d = m.diagnostics(1e-8);
            assert!(d.theta_sum <= 5.0, "N={n}: sum {}", d.theta_sum);
            assert!(d.h_ly_ratio <= 5.0);
            assert!(d.theta_max_ratio <= 5.0);
        }
    }

    #[test]
    fn diagnostics_bounded_all_families() {
        for fam in MeshFamily::ALL {
            for &n in &N_SWEEP {
                for &eps in &EPS_SWEEP {
                    let m = Mesh1D::layer_adapted(fam, n, eps, 2.0, 1.0).unwrap();
                    let d = m.diagnostics(eps);
                    assert!(d.h_ly_ratio <= 5.0, "{fam} N={n} eps={eps}: {}", d.h_ly_ratio);
                    assert!(d.theta_sum <= 5.0, "{fam} N={n} eps={eps}: {}", d.theta_sum);
                    assert!(d.theta_max_ratio <= 5.0, "{fam} N={n} eps={eps}: {}", d.theta_max_ratio);
                    assert!(d.hbar_ratio >= 0.2, "{fam} N={n} eps={eps}: {}", d.hbar_ratio);
                }
            }
        }
    }

    #[test]
    fn clamped_regime_theta_first_cell() {
        let eps = 0.25;
        let m = Mesh1D::layer_adapted(MeshFamily::Shishkin, 8, eps, 2.0, 1.0).unwrap();
        assert!(m.clamped);
        // rescaled Shishkin layer is uniform: x_1 = τ·(1/2)
        let h1 = 0.25 * MeshFamily::Shishkin.phi_at_index(1, 8, eps) / 8f64.ln();
        assert!((m.h(0) - h1).abs() < 1e-16);
        assert!((m.h(0) - 0.125).abs() < 1e-15);
        let d = m.diagnostics(eps);
        assert!((d.theta[0] - (h1 / 0.5).min(1.0)).abs() < 1e-15);
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let m = Mesh1D::layer_adapted(MeshFamily::BakhvalovShishkin, 16, 1e-6, 2.0, 1.0).unwrap();
        let csv = m.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "i,x_i,h_i,Theta_i");
        assert_eq!(lines.len(), 18);
        assert!(lines[1].starts_with("0,"));
    }
}
