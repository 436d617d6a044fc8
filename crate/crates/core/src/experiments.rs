//! Manufactured test problems and the convergence / ε-sweep drivers.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_with, FluxConfig, FluxPreset};
use crate::basis::{Basis, ReferenceTables};
use crate::error::{LdgError, Result};
use crate::field::DGField;
use crate::mesh::{Mesh2D, MeshFamily, MeshParams};
use crate::norms::{convergence_rates, error_norms, NormKind, NormReport, RateMode};
use crate::problem::{ExactSolution, ProblemSpec, ScalarField};
use crate::solver::{solve, SolveMethod, SolveOptions, SolveReport, DEFAULT_TOL};

/// Layer profile `(e^{-v/δ} - e^{-(1-v)/δ}) / (1 - e^{-1/δ})` and its scaled derivatives.
#[derive(Clone, Copy)]
struct Layer {
    delta: f64,
    denom: f64,
}

impl Layer {
    fn new(eps: f64) -> Self {
        let delta = eps.sqrt();
        Self {
            delta,
            denom: 1.0 - (-1.0 / delta).exp(),
        }
    }

    #[inline]
    fn exps(&self, v: f64) -> (f64, f64) {
        ((-v / self.delta).exp(), (-(1.0 - v) / self.delta).exp())
    }
}

/// One-dimensional factor of the first example solution.
#[derive(Clone, Copy)]
struct Profile1 {
    l: Layer,
    eps: f64,
}

impl Profile1 {
    fn g(&self, v: f64) -> f64 {
        let (a, c) = self.l.exps(v);
        (a - c) / self.l.denom - (std::f64::consts::PI * v).cos()
    }

    fn dg(&self, v: f64) -> f64 {
        let (a, c) = self.l.exps(v);
        let pi = std::f64::consts::PI;
        -(a + c) / (self.l.delta * self.l.denom) + pi * (pi * v).sin()
    }

    /// `ε g''`; the layer part satisfies `ε L'' = L`.
    fn eps_d2g(&self, v: f64) -> f64 {
        let (a, c) = self.l.exps(v);
        let pi = std::f64::consts::PI;
        (a - c) / self.l.denom + self.eps * pi * pi * (pi * v).cos()
    }
}

/// One-dimensional factor of the second example solution.
#[derive(Clone, Copy)]
struct Profile2 {
    l: Layer,
}

impl Profile2 {
    fn h(&self, v: f64) -> f64 {
        let (a, c) = self.l.exps(v);
        1.0 + (v - 1.0) * a - v * c
    }

    fn dh(&self, v: f64) -> f64 {
        let (a, c) = self.l.exps(v);
        let d = self.l.delta;
        a * (1.0 - (v - 1.0) / d) - c * (1.0 + v / d)
    }

    /// `ε h''`
    fn eps_d2h(&self, v: f64) -> f64 {
        let (a, c) = self.l.exps(v);
        let d = self.l.delta;
        a * (v - 1.0 - 2.0 * d) - c * (v + 2.0 * d)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(LdgError::InvalidParameter {
            name: "eps",
            value: eps,
            reason: "must be positive and finite",
        });
    }
    Ok(())
}

/// `f = -εΔu + b u` from `ε`-scaled second derivatives, avoiding `ε · (1/ε)` round-off.
fn forcing<F, G>(f1: F, eps_d2: G, b: ScalarField) -> ScalarField
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
    G: Fn(f64) -> f64 + Send + Sync + 'static,
{
    Arc::new(move |x, y| {
        let (gx, gy) = (f1(x), f1(y));
        -(eps_d2(x) * gy + gx * eps_d2(y)) + b(x, y) * gx * gy
    })
}

/// First test problem: `b = 2`, `u = g(x) g(y)` with exponential layers at all four sides.
pub fn example1(eps: f64) -> Result<ProblemSpec> {
    check_eps(eps)?;
    let p = Profile1 { l: Layer::new(eps), eps };
    let b: ScalarField = Arc::new(|_, _| 2.0);
    let exact = ExactSolution {
        u: Arc::new(move |x, y| p.g(x) * p.g(y)),
        ux: Arc::new(move |x, y| p.dg(x) * p.g(y)),
        uy: Arc::new(move |x, y| p.g(x) * p.dg(y)),
        laplacian: Some(Arc::new(move |x, y| (p.eps_d2g(x) * p.g(y) + p.g(x) * p.eps_d2g(y)) / eps)),
    };
    let f = forcing(move |v| p.g(v), move |v| p.eps_d2g(v), b.clone());
    Ok(ProblemSpec {
        name: "example1".into(),
        eps,
        b,
        f,
        exact: Some(exact),
    })
}

/// Second test problem: `b = 2 + xy(1-x)(1-y)`, `u = h(x) h(y)`.
pub fn example2(eps: f64) -> Result<ProblemSpec> {
    check_eps(eps)?;
    let p = Profile2 { l: Layer::new(eps) };
    let b: ScalarField = Arc::new(|x, y| 2.0 + x * y * (1.0 - x) * (1.0 - y));
    let exact = ExactSolution {
        u: Arc::new(move |x, y| p.h(x) * p.h(y)),
        ux: Arc::new(move |x, y| p.dh(x) * p.h(y)),
        uy: Arc::new(move |x, y| p.h(x) * p.dh(y)),
        laplacian: Some(Arc::new(move |x, y| (p.eps_d2h(x) * p.h(y) + p.h(x) * p.eps_d2h(y)) / eps)),
    };
    let f = forcing(move |v| p.h(v), move |v| p.eps_d2h(v), b.clone());
    Ok(ProblemSpec {
        name: "example2".into(),
        eps,
        b,
        f,
        exact: Some(exact),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Example {
    Example1,
    Example2,
}

impl Example {
    pub fn problem(self, eps: f64) -> Result<ProblemSpec> {
        match self {
            Example::Example1 => example1(eps),
            Example::Example2 => example2(eps),
        }
    }
}

impl FromStr for Example {
    type Err = LdgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "example1" => Ok(Example::Example1),
            "2" | "example2" => Ok(Example::Example2),
            o => Err(LdgError::Config(format!("unknown example `{o}`"))),
        }
    }
}

fn default_example() -> Example {
    Example::Example1
}
fn default_family() -> MeshFamily {
    MeshFamily::Shishkin
}
fn default_families() -> Vec<MeshFamily> {
    MeshFamily::ALL.to_vec()
}
fn default_degree() -> usize {
    1
}
fn default_beta() -> f64 {
    1.0
}
fn default_eps() -> f64 {
    1e-8
}
fn default_eps_list() -> Vec<f64> {
    vec![1e-6, 1e-8, 1e-10, 1e-12, 1e-14, 1e-16]
}
fn default_ns() -> Vec<usize> {
    vec![8, 16, 32, 64]
}
fn default_sweep_n() -> usize {
    64
}
fn default_flux() -> FluxPreset {
    FluxPreset::Balanced
}
fn default_norms() -> Vec<NormKind> {
    NormKind::ALL.to_vec()
}
fn default_solver() -> SolveMethod {
    SolveMethod::DirectLu
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_true() -> bool {
    true
}

/// Fully resolved description of a run; serialised into every output header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_example")]
    pub example: Example,
    #[serde(default = "default_family")]
    pub family: MeshFamily,
    /// Families covered by the ε-sweep.
    #[serde(default = "default_families")]
    pub families: Vec<MeshFamily>,
    #[serde(default = "default_degree")]
    pub degree: usize,
    /// Mesh transition constant; `k + 1` when absent.
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_eps_list")]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_ns")]
    pub ns: Vec<usize>,
    /// Mesh size of the ε-sweep.
    #[serde(default = "default_sweep_n")]
    pub sweep_n: usize,
    #[serde(default = "default_flux")]
    pub flux: FluxPreset,
    #[serde(default = "default_norms")]
    pub norms: Vec<NormKind>,
    #[serde(default = "default_solver")]
    pub solver: SolveMethod,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Gauss points per axis for assembly; `max(5, k+2)` when absent.
    #[serde(default)]
    pub quad: Option<usize>,
    /// Gauss points per axis for error norms; same as assembly when absent.
    #[serde(default)]
    pub quad_err: Option<usize>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default = "default_true")]
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialise")
    }
}

impl RunConfig {
    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(self.degree as f64 + 1.0)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        Basis::new(self.degree)?;
        for &n in self.ns.iter().chain(std::iter::once(&self.sweep_n)) {
            if n < 4 || !n.is_multiple_of(4) {
                return Err(LdgError::InvalidElementCount(n));
            }
        }
        if self.ns.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(LdgError::Config("N list must be a doubling sequence".into()));
        }
        for (name, v) in [("eps", self.eps), ("beta", self.beta), ("sigma", self.sigma()), ("tol", self.tol)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(LdgError::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be positive and finite",
                });
            }
        }
        if let Some(&e) = self.eps_list.iter().find(|e| !(**e > 0.0)) {
            return Err(LdgError::InvalidParameter {
                name: "eps_list",
                value: e,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            method: self.solver,
            tol: self.tol,
            ..SolveOptions::default()
        }
    }

    /// Assembly and error-norm quadrature tables.
    pub fn tables(&self) -> Result<(ReferenceTables, ReferenceTables)> {
        let basis = Basis::new(self.degree)?;
        let nq = self.quad.unwrap_or_else(|| ReferenceTables::default_points(basis));
        let asm = ReferenceTables::new(basis, nq)?;
        let err = match self.quad_err {
            Some(m) if m != nq => ReferenceTables::new(basis, m)?,
            _ => asm.clone(),
        };
        Ok((asm, err))
    }
}

/// Result of a single stationary solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub mesh: Mesh2D,
    pub field: DGField,
    pub norms: NormReport,
    pub solve: SolveReport,
}

/// Builds the mesh, assembles, solves and measures the error for one `(family, N, ε)`.
pub fn run_single(cfg: &RunConfig, family: MeshFamily, n: usize, eps: f64) -> Result<SolveOutcome> {
    let prob = cfg.example.problem(eps)?;
    let mesh = Mesh2D::layer_adapted(MeshParams::new(family, eps, cfg.sigma(), cfg.beta), n)?;
    let (tables, err_tables) = cfg.tables()?;
    let flux = FluxConfig::for_mesh(cfg.flux, &mesh, eps);
    let sys = assemble_with(&mesh, &prob, &flux, &tables)?;
    let (field, solve_report) = solve(&sys, &cfg.solve_options())?;
    let norms = error_norms(&field, &prob, &flux, &mesh, &err_tables)?;
    Ok(SolveOutcome {
        mesh,
        field,
        norms,
        solve: solve_report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub energy: f64,
    pub balanced: f64,
    /// Rate from the previous row, absent on the first.
    pub energy_rate: Option<f64>,
    pub balanced_rate: Option<f64>,
    pub report: NormReport,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub config: RunConfig,
    pub family: MeshFamily,
    pub rate_mode: RateMode,
    pub rows: Vec<ConvergenceRow>,
    /// Set when a solve failed; rows hold the runs completed before it.
    pub aborted: Option<String>,
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

impl ConvergenceTable {
    pub fn errors(&self, kind: NormKind) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match kind {
                NormKind::Energy => r.energy,
                NormKind::Balanced => r.balanced,
            })
            .collect()
    }

    pub fn rates(&self, kind: NormKind) -> Vec<f64> {
        self.rows
            .iter()
            .filter_map(|r| match kind {
                NormKind::Energy => r.energy_rate,
                NormKind::Balanced => r.balanced_rate,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# config: {}", self.config.to_json()).unwrap();
        writeln!(s, "# family: {}, rate mode: {:?}", self.family, self.rate_mode).unwrap();
        if let Some(msg) = &self.aborted {
            writeln!(s, "# aborted: {msg}").unwrap();
        }
        writeln!(
            s,
            "N,energy_error,energy_rate,balanced_error,balanced_rate,p_sq,q_sq,u_sq,jump_v,jump_h,jump_v_weighted,jump_h_weighted"
        )
        .unwrap();
        for r in &self.rows {
            let c = &r.report;
            writeln!(
                s,
                "{},{:.6e},{},{:.6e},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
                r.n,
                r.energy,
                r.energy_rate.map_or(String::new(), |v| format!("{v:.4}")),
                r.balanced,
                r.balanced_rate.map_or(String::new(), |v| format!("{v:.4}")),
                c.p_sq,
                c.q_sq,
                c.u_sq,
                c.jump_v,
                c.jump_h,
                c.jump_v_weighted,
                c.jump_h_weighted
            )
            .unwrap();
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "### {} {}, k = {}, eps = {:e}, flux = {}\n",
            self.config.example_name(),
            self.family.label(),
            self.config.degree,
            self.config.eps,
            self.config.flux
        )
        .unwrap();
        let mut head = String::from("| N |");
        let mut rule = String::from("|---|");
        for k in &self.config.norms {
            write!(head, " {k} error | rate |").unwrap();
            rule.push_str("---|---|");
        }
        writeln!(s, "{head}\n{rule}").unwrap();
        for r in &self.rows {
            let mut line = format!("| {} |", r.n);
            for k in &self.config.norms {
                let (e, rate) = match k {
                    NormKind::Energy => (r.energy, r.energy_rate),
                    NormKind::Balanced => (r.balanced, r.balanced_rate),
                };
                write!(line, " {e:.2e} | {} |", fmt_rate(rate)).unwrap();
            }
            writeln!(s, "{line}").unwrap();
        }
        if let Some(msg) = &self.aborted {
            writeln!(s, "\n(aborted: {msg})").unwrap();
        }
        s
    }
}

impl RunConfig {
    fn example_name(&self) -> &'static str {
        match self.example {
            Example::Example1 => "Example 1",
            Example::Example2 => "Example 2",
        }
    }
}

/// Runs every `N` of `cfg.ns` on `cfg.family` at `cfg.eps`.
pub fn run_convergence(cfg: &RunConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let mode = RateMode::for_family(cfg.family);
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(cfg.ns.len());
    let mut aborted = None;
    for &n in &cfg.ns {
        match run_single(cfg, cfg.family, n, cfg.eps) {
            Ok(out) => {
                let (energy, balanced) = (out.norms.energy(), out.norms.balanced());
                let (energy_rate, balanced_rate) = match rows.last() {
                    Some(prev) => (
                        convergence_rates(&[prev.energy, energy], &[prev.n, n], mode)?.first().copied(),
                        convergence_rates(&[prev.balanced, balanced], &[prev.n, n], mode)?.first().copied(),
                    ),
                    None => (None, None),
                };
                rows.push(ConvergenceRow {
                    n,
                    energy,
                    balanced,
                    energy_rate,
                    balanced_rate,
                    report: out.norms,
                    residual: out.solve.residual,
                });
            }
            Err(e) => {
                aborted = Some(format!("N = {n}: {e}"));
                break;
            }
        }
    }
    Ok(ConvergenceTable {
        config: cfg.clone(),
        family: cfg.family,
        rate_mode: mode,
        rows,
        aborted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsSweepRow {
    pub eps: f64,
    /// `(family, energy error, balanced error)` in `cfg.families` order.
    pub errors: Vec<(MeshFamily, f64, f64)>,
    /// largest relative solver residual in the row
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsSweepTable {
    pub config: RunConfig,
    pub n: usize,
    pub rows: Vec<EpsSweepRow>,
}

impl EpsSweepTable {
    /// Errors of one family and norm across the ε list.
    pub fn column(&self, family: MeshFamily, kind: NormKind) -> Vec<f64> {
        self.rows
            .iter()
            .filter_map(|r| {
                r.errors.iter().find(|e| e.0 == family).map(|e| match kind {
                    NormKind::Energy => e.1,
                    NormKind::Balanced => e.2,
                })
            })
            .collect()
    }

    pub fn eps_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.eps).collect()
    }

    /// `(max - min) / mean` of a column.
    pub fn relative_variation(&self, family: MeshFamily, kind: NormKind) -> f64 {
        relative_variation(&self.column(family, kind))
    }

    /// Least-squares slope of `log error` against `log ε`.
    pub fn loglog_slope(&self, family: MeshFamily, kind: NormKind) -> f64 {
        loglog_slope(&self.eps_values(), &self.column(family, kind))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# config: {}", self.config.to_json()).unwrap();
        writeln!(s, "# N = {}", self.n).unwrap();
        let mut head = String::from("eps");
        for f in &self.config.families {
            write!(head, ",{f}_energy,{f}_balanced").unwrap();
        }
        writeln!(s, "{head}").unwrap();
        for r in &self.rows {
            let mut line = format!("{:e}", r.eps);
            for (_, e, b) in &r.errors {
                write!(line, ",{e:.6e},{b:.6e}").unwrap();
            }
            writeln!(s, "{line}").unwrap();
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        writeln!(s, "### {}, k = {}, N = {}, flux = {}\n", self.config.example_name(), self.config.degree, self.n, self.config.flux).unwrap();
        let mut head = String::from("| eps |");
        let mut rule = String::from("|---|");
        for f in &self.config.families {
            write!(head, " {} energy | {} balanced |", f.label(), f.label()).unwrap();
            rule.push_str("---|---|");
        }
        writeln!(s, "{head}\n{rule}").unwrap();
        for r in &self.rows {
            let mut line = format!("| {:e} |", r.eps);
            for (_, e, b) in &r.errors {
                write!(line, " {e:.2e} | {b:.2e} |").unwrap();
            }
            writeln!(s, "{line}").unwrap();
        }
        s
    }

    /// Two-column `log10 ε, log10 error` data for one family and norm.
    pub fn plot_data(&self, family: MeshFamily, kind: NormKind) -> String {
        let mut s = String::new();
        writeln!(s, "# {} {} error vs eps (log10)", family.label(), kind).unwrap();
        for (e, v) in self.eps_values().iter().zip(self.column(family, kind)) {
            writeln!(s, "{:.6} {:.6}", e.log10(), v.log10()).unwrap();
        }
        s
    }
}

/// `(max - min) / mean`.
pub fn relative_variation(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (max - min) / mean
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Runs `cfg.families` at `N = cfg.sweep_n` for each ε in `cfg.eps_list`.
pub fn run_eps_sweep(cfg: &RunConfig) -> Result<EpsSweepTable> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.eps_list.len());
    for &eps in &cfg.eps_list {
        let mut errors = Vec::with_capacity(cfg.families.len());
        let mut max_residual = 0.0f64;
        for &fam in &cfg.families {
            let out = run_single(cfg, fam, cfg.sweep_n, eps)?;
            errors.push((fam, out.norms.energy(), out.norms.balanced()));
            max_residual = max_residual.max(out.solve.residual);
        }
        rows.push(EpsSweepRow { eps, errors, max_residual });
    }
    Ok(EpsSweepTable {
        config: cfg.clone(),
        n: cfg.sweep_n,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Fourth-order central differences for the Laplacian.
    fn fd_laplacian(u: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
        let d2 = |f: &dyn Fn(f64) -> f64, t: f64| {
            (-f(t + 2.0 * h) + 16.0 * f(t + h) - 30.0 * f(t) + 16.0 * f(t - h) - f(t - 2.0 * h)) / (12.0 * h * h)
        };
        d2(&|s| u(s, y), x) + d2(&|s| u(x, s), y)
    }

    fn fd_dx(u: &dyn Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
        (-u(x + 2.0 * h, y) + 8.0 * u(x + h, y) - 8.0 * u(x - h, y) + u(x - 2.0 * h, y)) / (12.0 * h)
    }

    #[test]
    fn boundary_values() {
        for eps in [1e-2, 1e-8, 1e-16] {
            for p in [example1(eps).unwrap(), example2(eps).unwrap()] {
                let u = &p.exact.as_ref().unwrap().u;
                for t in [0.0, 0.3, 0.77, 1.0] {
                    for (x, y) in [(0.0, t), (1.0, t), (t, 0.0), (t, 1.0)] {
                        assert!(u(x, y).abs() < 1e-15, "{} eps={eps}: u({x},{y}) = {}", p.name, u(x, y));
                    }
                }
            }
        }
        // the first example's factor also vanishes at 1/2 by symmetry
        let p = example1(1e-4).unwrap();
        assert!((p.exact.as_ref().unwrap().u)(0.5, 0.3).abs() < 1e-15);
    }

    #[test]
    fn forcing_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for eps in [1e-1, 1e-2] {
            for p in [example1(eps).unwrap(), example2(eps).unwrap()] {
                let ex = p.exact.as_ref().unwrap();
                for _ in 0..100 {
                    let x: f64 = rng.gen_range(0.05..0.95);
                    let y: f64 = rng.gen_range(0.05..0.95);
                    let lap = fd_laplacian(&*ex.u, x, y, 1e-3);
                    let res = -eps * lap + (p.b)(x, y) * (ex.u)(x, y) - (p.f)(x, y);
                    assert!(res.abs() < 1e-9, "{} eps={eps} ({x},{y}): {res}", p.name);
                    let dx = fd_dx(&*ex.u, x, y, 1e-4);
                    assert!((dx - (ex.ux)(x, y)).abs() < 1e-8 * (1.0 + dx.abs()));
                    let dy = fd_dx(&|a, b| (ex.u)(b, a), y, x, 1e-4);
                    assert!((dy - (ex.uy)(x, y)).abs() < 1e-8 * (1.0 + dy.abs()));
                }
            }
        }
    }

    #[test]
    fn tiny_eps_is_finite() {
        for eps in [1e-12, 1e-16] {
            for p in [example1(eps).unwrap(), example2(eps).unwrap()] {
                let ex = p.exact.as_ref().unwrap();
                for &(x, y) in &[(0.0, 0.0), (1e-9, 0.5), (0.5, 1.0 - 1e-9), (1.0, 1.0)] {
                    for v in [(ex.u)(x, y), (ex.ux)(x, y), (ex.uy)(x, y), (p.f)(x, y)] {
                        assert!(v.is_finite(), "{} eps={eps} ({x},{y})", p.name);
                    }
                }
            }
        }
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = RunConfig::default();
        assert_eq!(c.degree, 1);
        assert_eq!(c.sigma(), 2.0);
        assert_eq!(c.beta, 1.0);
        let c2 = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, c2);
        assert!(RunConfig::from_json(r#"{"ns": [8, 12]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"ns": [6, 12]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"degree": 4}"#).is_err());
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
        let c3 = RunConfig::from_json(r#"{"degree": 2, "family": "bakhvalov-shishkin"}"#).unwrap();
        assert_eq!(c3.sigma(), 3.0);
    }

    #[test]
    fn slope_and_variation_helpers() {
        let x = [1e-8, 1e-10, 1e-12];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.25)).collect();
        assert!((loglog_slope(&x, &y) - 0.25).abs() < 1e-12);
        assert!((relative_variation(&[1.0, 1.02, 0.98]) - 0.04).abs() < 1e-12);
    }

    #[test]
    fn smooth_regime_rate_is_two() {
        // with τ clamped to 1/4 the Shishkin mesh is uniform on each region;
        // the rescaled Bakhvalov–Shishkin grading refines its transition cell
        // only like 1/ln N, so it is not a classical-rate sanity case
        let cfg = RunConfig {
            eps: 1.0,
            degree: 1,
            family: MeshFamily::Shishkin,
            flux: FluxPreset::Energy,
            ns: vec![8, 16, 32],
            ..RunConfig::default()
        };
        let t = run_convergence(&cfg).unwrap();
        assert!(t.aborted.is_none());
        // the clamped mesh is quasi-uniform, so measure against 1/N
        let rates = convergence_rates(&t.errors(NormKind::Energy), &cfg.ns, RateMode::R2).unwrap();
        for r in rates {
            assert!((r - 2.0).abs() < 0.1, "rate {r}");
        }
    }

    #[test]
    fn csv_is_deterministic() {
        let cfg = RunConfig {
            ns: vec![8, 16],
            ..RunConfig::default()
        };
        let a = run_convergence(&cfg).unwrap().to_csv();
        let b = run_convergence(&cfg).unwrap().to_csv();
        assert_eq!(a, b);
        assert!(a.starts_with("# config: {"));
    }
}
