use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::TableauKind;
use crate::network::{Activation, NetworkSpec};
use crate::problems::{ProblemKind, ProblemSpec};
use crate::teng::{SolverKind, TengOptions};

/// What to do when a step-level routine reports a recoverable failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorPolicy {
    /// Abort the run.
    Strict,
    /// Log, keep the best available parameters, carry on.
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub hidden_widths: Vec<usize>,
    pub activation: Activation,
    /// Sample points of the least-squares fit.
    pub n_s: usize,
    /// Quadrature points of the invariants.
    pub n_m: usize,
    /// Test points of the error metric.
    pub n_e: usize,
    pub dt: f64,
    pub t_end: f64,
    pub tableau: TableauKind,
    pub relaxation: bool,
    pub tangent_projection: bool,
    pub manifold_projection: bool,
    /// Invariant used for relaxation and for the per-step target defect.
    pub relax_invariant: String,
    /// Invariants held fixed by the two projections.
    pub constraints: Vec<String>,
    pub rcond: f64,
    pub sketch: bool,
    pub seed: u64,
    pub teng_max_iters: usize,
    pub teng_tol_abs: f64,
    pub teng_tol_rel: f64,
    pub proj_tol: Option<f64>,
    pub proj_max_iters: usize,
    pub fit_tol: f64,
    pub fit_max_iters: usize,
    pub fit_rcond: f64,
    pub policy: ErrorPolicy,
    /// Write a field snapshot every `k` steps (0 disables).
    pub snapshot_every: usize,
    /// Compute relative errors against the reference solution.
    pub reference: bool,
    pub reference_grid: usize,
    pub reference_dt: f64,
}

impl RunConfig {
    pub fn for_problem(problem: ProblemKind) -> Self {
        let base = Self {
            problem,
            hidden_widths: vec![10; 4],
            activation: Activation::Tanh,
            n_s: 1000,
            n_m: 1000,
            n_e: 1000,
            dt: 5e-3,
            t_end: 0.5,
            tableau: TableauKind::Rk4,
            relaxation: false,
            tangent_projection: false,
            manifold_projection: true,
            relax_invariant: "energy".into(),
            constraints: vec!["mass".into()],
            rcond: 1e-6,
            sketch: false,
            seed: 0,
            teng_max_iters: 5,
            teng_tol_abs: 1e-10,
            teng_tol_rel: 1e-8,
            proj_tol: None,
            proj_max_iters: 50,
            fit_tol: 1e-6,
            fit_max_iters: 500,
            fit_rcond: 1e-12,
            policy: ErrorPolicy::Strict,
            snapshot_every: 0,
            reference: true,
            reference_grid: 512,
            reference_dt: 1e-4,
        };
        match problem {
            ProblemKind::Burgers => base,
            ProblemKind::Kdv => Self {
                activation: Activation::Sin,
                t_end: 1.0,
                relaxation: true,
                constraints: vec!["energy".into()],
                ..base
            },
            ProblemKind::Wave => Self {
                hidden_widths: vec![20; 4],
                n_s: 256,
                n_m: 256,
                n_e: 256,
                dt: 1e-3,
                t_end: 1.0,
                relaxation: true,
                relax_invariant: "hamiltonian".into(),
                constraints: vec!["hamiltonian".into()],
                reference_grid: 256,
                reference_dt: 1e-3,
                ..base
            },
        }
    }

    /// Turn every structure-preserving feature off.
    pub fn vanilla(mut self) -> Self {
        self.relaxation = false;
        self.tangent_projection = false;
        self.manifold_projection = false;
        self
    }

    pub fn problem_spec(&self) -> ProblemSpec {
        ProblemSpec::from_kind(self.problem)
    }

    pub fn network(&self) -> Result<NetworkSpec> {
        let p = self.problem_spec();
        NetworkSpec::new(p.length(), self.hidden_widths.clone(), self.activation, p.output_dim())
    }

    pub fn teng_options(&self) -> TengOptions {
        TengOptions {
            max_iters: self.teng_max_iters,
            tol_abs: self.teng_tol_abs,
            tol_rel: self.teng_tol_rel,
            rcond: self.rcond,
            solver: if self.sketch { SolverKind::Sketched { seed: self.seed } } else { SolverKind::TruncatedSvd },
            ..TengOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return bad(format!("dt and t_end must be positive (dt={}, t_end={})", self.dt, self.t_end));
        }
        if self.n_s < 2 || self.n_m < 2 || self.n_e < 2 {
            return bad("grids need at least two points".into());
        }
        let p = self.problem_spec();
        if self.relaxation {
            match p.invariant(&self.relax_invariant) {
                None => return bad(format!("relaxation invariant `{}` is not defined for {}", self.relax_invariant, self.problem)),
                Some(inv) if inv.degree() < 2 => return Err(Error::LinearRelaxation(inv.name.clone())),
                _ => {}
            }
        }
        if self.tangent_projection || self.manifold_projection {
            if self.constraints.is_empty() {
                return bad("projection is on but no constraint invariant is declared".into());
            }
            for c in &self.constraints {
                if p.invariant(c).is_none() {
                    return bad(format!("constraint `{c}` is not defined for {}", self.problem));
                }
            }
        }
        if !(self.rcond > 0.0) {
            return bad(format!("rcond must be positive, got {}", self.rcond));
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &ConfigOverrides) {
        macro_rules! set {
            ($($f:ident),*) => {$( if let Some(v) = &o.$f { self.$f = v.clone(); } )*};
        }
        set!(
            hidden_widths, activation, n_s, n_m, n_e, dt, t_end, tableau, relaxation, tangent_projection,
            manifold_projection, relax_invariant, constraints, rcond, sketch, seed, teng_max_iters, teng_tol_abs,
            teng_tol_rel, proj_max_iters, fit_tol, fit_max_iters, fit_rcond, policy, snapshot_every, reference,
            reference_grid, reference_dt
        );
        if o.proj_tol.is_some() {
            self.proj_tol = o.proj_tol;
        }
    }
}

/// Flat key/value overrides, read from a TOML file or built from CLI flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub problem: Option<ProblemKind>,
    pub hidden_widths: Option<Vec<usize>>,
    pub activation: Option<Activation>,
    pub n_s: Option<usize>,
    pub n_m: Option<usize>,
    pub n_e: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub tableau: Option<TableauKind>,
    pub relaxation: Option<bool>,
    pub tangent_projection: Option<bool>,
    pub manifold_projection: Option<bool>,
    pub relax_invariant: Option<String>,
    pub constraints: Option<Vec<String>>,
    pub rcond: Option<f64>,
    pub sketch: Option<bool>,
    pub seed: Option<u64>,
    pub teng_max_iters: Option<usize>,
    pub teng_tol_abs: Option<f64>,
    pub teng_tol_rel: Option<f64>,
    pub proj_tol: Option<f64>,
    pub proj_max_iters: Option<usize>,
    pub fit_tol: Option<f64>,
    pub fit_max_iters: Option<usize>,
    pub fit_rcond: Option<f64>,
    pub policy: Option<ErrorPolicy>,
    pub snapshot_every: Option<usize>,
    pub reference: Option<bool>,
    pub reference_grid: Option<usize>,
    pub reference_dt: Option<f64>,
}

impl ConfigOverrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `other` win.
    pub fn merge(mut self, other: ConfigOverrides) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {$( if other.$f.is_some() { self.$f = other.$f; } )*};
        }
        take!(
            problem, hidden_widths, activation, n_s, n_m, n_e, dt, t_end, tableau, relaxation, tangent_projection,
            manifold_projection, relax_invariant, constraints, rcond, sketch, seed, teng_max_iters, teng_tol_abs,
            teng_tol_rel, proj_tol, proj_max_iters, fit_tol, fit_max_iters, fit_rcond, policy, snapshot_every, reference,
            reference_grid, reference_dt
        );
        self
    }

    /// Problem defaults with these overrides applied.
    pub fn resolve(&self, fallback: ProblemKind) -> Result<RunConfig> {
        let mut cfg = RunConfig::for_problem(self.problem.unwrap_or(fallback));
        cfg.apply(self);
        cfg.validate()?;
        Ok(cfg)
    }
}
