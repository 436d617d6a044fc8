use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ldg::assembly::{assemble_with, FluxConfig, FluxPreset};
use ldg::experiments::{run_convergence, run_eps_sweep, run_single, Example, RunConfig};
use ldg::mesh::{Mesh1D, Mesh2D, MeshFamily, MeshParams};
use ldg::norms::NormKind;
use ldg::parabolic::{sigma_notice, theta_solve, ParabolicProblem, TimeGrid};
use ldg::projection::{projection_rate_study, ProjectionKind};
use ldg::solver::SolveMethod;
use ldg::{LdgError, Result};

/// Number of elements per axis used by `--full`.
const FULL_N: usize = 256;

#[derive(Parser)]
#[command(name = "ldg", version, about = "LDG solver for singularly perturbed reaction-diffusion problems on layer-adapted meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a one-dimensional layer-adapted mesh with its diagnostics.
    Mesh {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
    /// Solve one configuration and report its error norms.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Write the assembled matrix in Matrix Market format.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
    },
    /// Error and rate table over the N list.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Study::Ldg)]
        study: Study,
        /// Projection used by `--study projection`.
        #[arg(long, default_value = "gauss-radau-minus")]
        projection: String,
        /// Also print a Markdown table.
        #[arg(long)]
        markdown: bool,
    },
    /// Errors of every family across the ε list at fixed N.
    EpsSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ε values.
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
        #[arg(long)]
        sweep_n: Option<usize>,
        /// Directory receiving one `log10 ε, log10 error` file per family and norm.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        #[arg(long)]
        markdown: bool,
    },
    /// θ-scheme run of the time-dependent problem.
    Parabolic {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        t_final: f64,
        #[arg(long, value_enum, default_value_t = TimeProblem::Bubble)]
        problem: TimeProblem,
        /// Use a uniform mesh instead of the layer-adapted family.
        #[arg(long)]
        uniform: bool,
        /// Write the per-step CSV trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    Ldg,
    Projection,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimeProblem {
    /// `e^{-t} x(1-x)y(1-y)` with `b = 2`
    Bubble,
    /// Time-independent solution of the stationary example
    Steady,
}

/// Overrides applied on top of `--config` (or the defaults).
#[derive(Args)]
struct Common {
    /// JSON file with a run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    example: Option<Example>,
    #[arg(long)]
    family: Option<MeshFamily>,
    #[arg(long, short = 'k')]
    degree: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated doubling list of N.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    flux: Option<FluxPreset>,
    #[arg(long, value_delimiter = ',')]
    norms: Option<Vec<NormKind>>,
    #[arg(long)]
    solver: Option<SolveMethod>,
    #[arg(long)]
    tol: Option<f64>,
    /// Gauss points per axis for assembly.
    #[arg(long)]
    quad: Option<usize>,
    /// Gauss points per axis for the error norms.
    #[arg(long)]
    quad_err: Option<usize>,
    /// Write the table to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Extend the runs to N = 256.
    #[arg(long)]
    full: bool,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_json(&fs::read_to_string(p)?)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f.clone() { cfg.$f = v; })*};
        }
        set!(example, family, degree, beta, eps, ns, flux, norms, solver, tol);
        if self.sigma.is_some() {
            cfg.sigma = self.sigma;
        }
        if self.quad.is_some() {
            cfg.quad = self.quad;
        }
        if self.quad_err.is_some() {
            cfg.quad_err = self.quad_err;
        }
        if let Some(o) = &self.output {
            cfg.output = Some(o.display().to_string());
        }
        if self.full {
            eprintln!("warning: --full runs N = {FULL_N}; expect minutes to hours depending on k");
            let last = cfg.ns.last().copied().unwrap_or(8);
            let mut n = last * 2;
            while n <= FULL_N {
                cfg.ns.push(n);
                n *= 2;
            }
            cfg.sweep_n = FULL_N;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.output {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mesh { common, n } => {
            let cfg = common.resolve()?;
            let m = Mesh1D::layer_adapted(cfg.family, n, cfg.eps, cfg.sigma(), cfg.beta)?;
            let d = m.diagnostics(cfg.eps);
            let mut out = format!("# config: {}\n", cfg.to_json());
            out.push_str(&format!(
                "# N = {n}, tau = {:.6e}, clamped = {}, theta_max = {:.6e}, theta_sum = {:.6e}, hbar = {:.6e}, h_ly = {:.6e}, varrho = {:.6e}, max|psi'| = {:.6e}\n",
                m.tau, m.clamped, d.theta_max, d.theta_sum, d.hbar, d.h_ly, d.varrho, d.max_abs_psi_prime
            ));
            out.push_str(&m.to_csv());
            emit(&cfg, &out)
        }
        Command::Solve { common, n, dump_matrix } => {
            let cfg = common.resolve()?;
            if let Some(path) = dump_matrix {
                let prob = cfg.example.problem(cfg.eps)?;
                let mesh = Mesh2D::layer_adapted(MeshParams::new(cfg.family, cfg.eps, cfg.sigma(), cfg.beta), n)?;
                let (tables, _) = cfg.tables()?;
                let flux = FluxConfig::for_mesh(cfg.flux, &mesh, cfg.eps);
                let sys = assemble_with(&mesh, &prob, &flux, &tables)?;
                sys.matrix.write_matrix_market(std::io::BufWriter::new(fs::File::create(&path)?))?;
                eprintln!("wrote {} ({} x {}, {} nonzeros)", path.display(), sys.matrix.nrows, sys.matrix.ncols, sys.matrix.nnz());
            }
            let out = run_single(&cfg, cfg.family, n, cfg.eps)?;
            let r = &out.norms;
            let mut s = format!("# config: {}\n", cfg.to_json());
            s.push_str("N,energy_error,balanced_error,p_sq,q_sq,u_sq,jump_v,jump_h,residual,iterations,nnz\n");
            s.push_str(&format!(
                "{n},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.3e},{},{}\n",
                r.energy(),
                r.balanced(),
                r.p_sq,
                r.q_sq,
                r.u_sq,
                r.jump_v,
                r.jump_h,
                out.solve.residual,
                out.solve.iterations,
                out.solve.nnz
            ));
            emit(&cfg, &s)?;
            if !cfg.deterministic {
                eprintln!("factor {:.3}s, solve {:.3}s", out.solve.factor_seconds, out.solve.solve_seconds);
            }
            Ok(())
        }
        Command::Convergence { common, study, projection, markdown } => {
            let cfg = common.resolve()?;
            match study {
                Study::Ldg => {
                    let table = run_convergence(&cfg)?;
                    let mut s = table.to_csv();
                    if markdown {
                        s.push('\n');
                        s.push_str(&table.to_markdown());
                    }
                    emit(&cfg, &s)?;
                    if let Some(msg) = &table.aborted {
                        return Err(LdgError::Config(format!("run aborted at {msg}")));
                    }
                    Ok(())
                }
                Study::Projection => {
                    let kind = ProjectionKind::from_name(&projection)?;
                    let u = cfg.example.problem(cfg.eps)?.exact.ok_or(LdgError::MissingExactSolution)?.u;
                    let t = projection_rate_study(&kind, u, cfg.family, cfg.degree, cfg.eps, &cfg.ns)?;
                    emit(&cfg, &format!("# config: {}\n{}", cfg.to_json(), t.to_csv()))
                }
            }
        }
        Command::EpsSweep { common, eps_list, sweep_n, plot_data, markdown } => {
            let mut cfg = common.resolve()?;
            if let Some(l) = eps_list {
                cfg.eps_list = l;
            }
            if let Some(n) = sweep_n {
                cfg.sweep_n = n;
            }
            cfg.validate()?;
            let table = run_eps_sweep(&cfg)?;
            let mut s = table.to_csv();
            if markdown {
                s.push('\n');
                s.push_str(&table.to_markdown());
            }
            emit(&cfg, &s)?;
            if let Some(dir) = plot_data {
                fs::create_dir_all(&dir)?;
                for &fam in &cfg.families {
                    for kind in NormKind::ALL {
                        let file = Path::new(&dir).join(format!("{fam}_{kind}.dat"));
                        fs::write(file, table.plot_data(fam, kind))?;
                    }
                }
            }
            Ok(())
        }
        Command::Parabolic {
            common,
            n,
            theta,
            steps,
            t_final,
            problem,
            uniform,
            trace,
        } => {
            let mut cfg = common.resolve()?;
            if common.flux.is_none() && common.config.is_none() {
                cfg.flux = FluxPreset::Energy;
            }
            let grid = TimeGrid::new(steps, t_final, theta)?;
            let prob = match problem {
                TimeProblem::Bubble => ParabolicProblem::decaying_bubble(cfg.eps, 2.0),
                TimeProblem::Steady => ParabolicProblem::steady(&cfg.example.problem(cfg.eps)?)?,
            };
            let mesh = if uniform {
                Mesh2D::uniform(n)?
            } else {
                if let Some(msg) = sigma_notice(cfg.sigma(), cfg.degree) {
                    eprintln!("{msg}");
                }
                Mesh2D::layer_adapted(MeshParams::new(cfg.family, cfg.eps, cfg.sigma(), cfg.beta), n)?
            };
            let (tables, _) = cfg.tables()?;
            let flux = FluxConfig::for_mesh(cfg.flux, &mesh, cfg.eps);
            let out = theta_solve(&prob, &mesh, &tables, &flux, &grid, trace.is_some())?;
            let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.6e}"));
            let mut s = format!("# config: {}\n", cfg.to_json());
            s.push_str(&format!("# N = {n}, uniform = {uniform}, theta = {theta}, M = {steps}, T = {t_final}\n"));
            s.push_str("final_l2_error,energy_sum\n");
            s.push_str(&format!("{},{}\n", fmt(out.final_l2_error), fmt(out.energy_sum)));
            emit(&cfg, &s)?;
            if let Some(p) = trace {
                fs::write(p, out.trace_csv())?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
