//! The time loop and everything around it: initial fit, per-step diagnostics,
//! reference comparison and CSV output.
//!
//! One step from `θ_n`:
//!
//! 1. target `u_target = û_{θ_n} + γ Δt d_n` on the sample grid (`γ = 1`
//!    unless relaxation is on);
//! 2. Gauss-Newton fit of `θ` to the target, optionally restricted to the
//!    tangent directions that keep the constraints fixed to first order;
//! 3. optional projection onto the level set of the constraints anchored at `θ_0`;
//! 4. `t ← t + γ Δt`.

mod config;

use std::io::{Read, Write};

use log::{debug, info, warn};

pub use config::{ConfigOverrides, ErrorPolicy, RunConfig};

use crate::ansatz::Ansatz;
use crate::error::{check_len, Error, Result};
use crate::field::Field;
use crate::integrators::build_relaxed_target;
use crate::invariants::{eval_invariant, InvariantSpec};
use crate::network::{init_params, FlatParams, NetworkSpec};
use crate::problems::{spectral_reference, ProblemSpec, ReferenceKind, ReferenceSolution};
use crate::projection::{project, ProjectionReport, ProjectionStatus};
use crate::quadrature::{pairwise_sum_by, QuadratureGrid};
use crate::teng::{
    assemble_jacobian, tangent_projected_update, teng_update, weighted_norm, weighted_rhs, JacobianSvd, TangentConstraint,
    TengReport,
};

/// Seeds tried by [`fit_initial`] before giving up.
pub const FIT_ATTEMPTS: u64 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: FlatParams,
    /// Relative weighted `L²` error on the sample grid (absolute if `u₀ ≡ 0`).
    pub error: f64,
    pub seed: u64,
    pub iterations: usize,
}

/// Least-squares fit of `u₀` from `init_params(seed)`, retrying fresh seeds
/// on stagnation. Fails if no attempt gets within `100 · tol`.
pub fn fit_initial(
    spec: &NetworkSpec,
    problem: &ProblemSpec,
    grid: &QuadratureGrid,
    seed: u64,
    tol: f64,
    max_iters: usize,
    rcond: f64,
) -> Result<FitResult> {
    fit_model(spec, |s| init_params(spec, s).0, |x| problem.initial_condition(x), grid, seed, tol, max_iters, rcond)
}

/// [`fit_initial`] for any ansatz.
///
/// Gauss-Newton steps (with step halving) are tried first at singular-value
/// cutoffs `1e-6`, `1e-8` and `1e-10` relative to `σ_max`, moving on after five
/// iterations that gain less than 1%. A final Levenberg-Marquardt stage, cut
/// off at `rcond`, takes over when the undamped steps stall far from `u₀`:
/// each of its iterations factors `J` once and raises the damping `μ` in
/// `σ / (σ² + μ)` until the residual drops.
#[allow(clippy::too_many_arguments)]
pub fn fit_model<A: Ansatz + ?Sized>(
    model: &A,
    init: impl Fn(u64) -> Vec<f64>,
    u0: impl Fn(f64) -> Vec<f64>,
    grid: &QuadratureGrid,
    seed: u64,
    tol: f64,
    max_iters: usize,
    rcond: f64,
) -> Result<FitResult> {
    let dim = model.output_dim();
    let mut target = Field::zeros(grid.len(), dim);
    for (i, &x) in grid.points().iter().enumerate() {
        let v = u0(x);
        check_len(dim, v.len())?;
        target.at_mut(i).copy_from_slice(&v);
    }
    let scale = weighted_norm(grid, &target);
    let scale = if scale > 0.0 { scale } else { 1.0 };

    let mut best: Option<FitResult> = None;
    for attempt in 0..FIT_ATTEMPTS {
        let s = seed.wrapping_add(attempt);
        let mut theta = init(s);
        model.check_params(&theta)?;
        let mut residual = target.sub(&model.sample(&theta, grid));
        let mut err = weighted_norm(grid, &residual) / scale;
        let mut iterations = 0;
        // undamped steps with a shrinking singular-value cutoff, then a damped
        // stage for starts that the undamped steps cannot move
        let cutoffs = [1e-6, 1e-8, 1e-10, rcond];
        let damped_stage = cutoffs.len() - 1;
        let mut stage = 0;
        let mut slow = 0;
        let mut damping: Option<f64> = None;
        let evaluate = |trial: Vec<f64>| {
            let r = target.sub(&model.sample(&trial, grid));
            let e = weighted_norm(grid, &r) / scale;
            (trial, r, e)
        };
        while err > tol && iterations < max_iters && stage < cutoffs.len() {
            let jac = assemble_jacobian(model, &theta, grid);
            let svd = JacobianSvd::new(&jac, &weighted_rhs(grid, &residual))?;
            let smax2 = svd.sigma_max().powi(2);
            let cutoff = cutoffs[stage] * svd.sigma_max();
            iterations += 1;
            let mut accepted = None;
            if stage == damped_stage {
                let mut mu = damping.unwrap_or(1e-3 * smax2);
                while mu <= 1e6 * smax2 {
                    let (step, _) = svd.solve(mu, cutoff);
                    let cand = evaluate(theta.iter().zip(&step).map(|(t, d)| t + d).collect());
                    if cand.2 < err {
                        damping = Some((mu / 3.0).max(1e-15 * smax2));
                        accepted = Some(cand);
                        break;
                    }
                    mu *= 4.0;
                }
            } else {
                let (step, _) = svd.solve(0.0, cutoff);
                let mut h = 1.0;
                for _ in 0..=30 {
                    let cand = evaluate(theta.iter().zip(&step).map(|(t, d)| t + h * d).collect());
                    if cand.2 < err {
                        accepted = Some(cand);
                        break;
                    }
                    h *= 0.5;
                }
            }
            match accepted {
                Some((t, r, e)) => {
                    slow = if e > 0.99 * err { slow + 1 } else { 0 };
                    theta = t;
                    residual = r;
                    err = e;
                    debug!("fit seed {s} iteration {iterations} (stage {stage}): error {err:e}");
                }
                None => slow = usize::MAX,
            }
            if slow >= if stage == damped_stage { 20 } else { 5 } {
                stage += 1;
                slow = 0;
            }
        }
        info!("initial fit seed {s}: error {err:e} after {iterations} iterations");
        let cand = FitResult { params: FlatParams(theta), error: err, seed: s, iterations };
        if best.as_ref().is_none_or(|b| cand.error < b.error) {
            best = Some(cand);
        }
        if err <= tol {
            break;
        }
    }
    let best = best.expect("at least one attempt");
    if best.error > tol * 100.0 {
        return Err(Error::FitFailed { best: best.error, floor: tol * 100.0 });
    }
    if best.error > tol {
        warn!("initial fit stopped at {:e}, above the target {tol:e}", best.error);
    }
    Ok(best)
}

/// `Σ_i ‖û(x_i) - u_ref(x_i)‖ / Σ_i ‖u_ref(x_i)‖`, Euclidean over components.
pub fn relative_error(u_hat: &Field, u_ref: &Field) -> Result<f64> {
    u_hat.check_shape(u_ref.n_points(), u_ref.dim())?;
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let den = pairwise_sum_by(u_ref.n_points(), &|i| norm(u_ref.at(i)));
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num = pairwise_sum_by(u_ref.n_points(), &|i| {
        let (a, b) = (u_hat.at(i), u_ref.at(i));
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    });
    Ok(num / den)
}

/// Source of `u_ref(·, t)`.
pub enum Reference {
    Analytic(ProblemSpec),
    Grid { solution: ReferenceSolution, max_gap: f64 },
}

impl Reference {
    /// Build the reference a run of `cfg` is scored against.
    pub fn for_config(cfg: &RunConfig) -> Result<Self> {
        let problem = cfg.problem_spec();
        match problem.reference_kind() {
            ReferenceKind::Analytic => Ok(Reference::Analytic(problem)),
            ReferenceKind::Spectral => {
                let every = ((cfg.dt / cfg.reference_dt).round() as usize).max(1);
                let t_end = cfg.t_end + 2.0 * cfg.dt;
                let solution = spectral_reference(&problem, cfg.reference_grid, cfg.reference_dt, t_end, every)?;
                Ok(Reference::Grid { solution, max_gap: 0.5 * cfg.dt })
            }
        }
    }

    /// Reference values at `xs`, or `None` when no snapshot is close enough to `t`.
    pub fn at(&self, t: f64, xs: &[f64]) -> Option<Field> {
        match self {
            Reference::Analytic(p) => {
                let mut f = Field::zeros(xs.len(), p.output_dim());
                for (i, &x) in xs.iter().enumerate() {
                    f.at_mut(i).copy_from_slice(&p.analytic(x, t)?);
                }
                Some(f)
            }
            Reference::Grid { solution, max_gap } => {
                let (k, gap) = solution.nearest(t);
                (gap <= *max_gap).then(|| solution.interpolate(k, xs))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub gamma: f64,
    pub teng: TengReport,
    pub projection: Option<ProjectionReport>,
    /// One entry per problem invariant, evaluated on the quadrature grid.
    pub invariant_values: Vec<f64>,
    pub drift_init: Vec<f64>,
    pub drift_prev: Vec<f64>,
    /// `|I(u_target) - I(û_{θ_n})|` for the relaxation invariant on the sample grid.
    pub target_defect: Option<f64>,
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub fit: Option<FitResult>,
    pub theta0: Vec<f64>,
    pub final_params: Vec<f64>,
    pub invariant_names: Vec<String>,
    pub initial_invariants: Vec<f64>,
    pub initial_error: Option<f64>,
    pub steps: Vec<StepReport>,
    /// `(t, θ)` at the snapshot cadence, starting with `t = 0`.
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

impl RunOutput {
    pub fn final_time(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.t)
    }

    /// `max_n |drift_init|` for the named invariant.
    pub fn max_drift(&self, name: &str) -> Option<f64> {
        let j = self.invariant_names.iter().position(|n| n == name)?;
        Some(self.steps.iter().fold(0.0, |m, s| m.max(s.drift_init[j].abs())))
    }

    pub fn final_error(&self) -> Option<f64> {
        self.steps.last().and_then(|s| s.rel_error)
    }
}

/// Where CSV output goes. Either sink may be absent.
#[derive(Default)]
pub struct RunSinks<'a> {
    pub steps: Option<&'a mut dyn Write>,
    pub snapshots: Option<&'a mut dyn Write>,
}

pub fn step_csv_header(invariants: &[String]) -> Vec<String> {
    let mut h: Vec<String> =
        ["step", "t", "gamma", "teng_iters", "teng_residual", "proj_iters", "proj_status"].iter().map(|s| s.to_string()).collect();
    for name in invariants {
        h.push(format!("inv_{name}_value"));
        h.push(format!("inv_{name}_drift_init"));
        h.push(format!("inv_{name}_drift_prev"));
    }
    h.push("rel_error".into());
    h
}

fn step_csv_row(s: &StepReport) -> Vec<String> {
    let mut row = vec![
        s.step.to_string(),
        format!("{:?}", s.t),
        format!("{:?}", s.gamma),
        s.teng.sub_iterations.to_string(),
        format!("{:?}", s.teng.final_residual),
    ];
    match &s.projection {
        Some(p) => {
            row.push(p.iterations.to_string());
            row.push(p.status.as_str().into());
        }
        None => {
            row.push("0".into());
            row.push("off".into());
        }
    }
    for j in 0..s.invariant_values.len() {
        row.push(format!("{:?}", s.invariant_values[j]));
        row.push(format!("{:?}", s.drift_init[j]));
        row.push(format!("{:?}", s.drift_prev[j]));
    }
    row.push(s.rel_error.map(|e| format!("{e:?}")).unwrap_or_default());
    row
}

fn write_snapshot(w: &mut csv::Writer<&mut dyn Write>, t: f64, xs: &[f64], names: &[&str], field: &Field) -> Result<()> {
    for (i, x) in xs.iter().enumerate() {
        for (c, name) in names.iter().enumerate() {
            w.write_record([format!("{t:?}"), format!("{x:?}"), name.to_string(), format!("{:?}", field.at(i)[c])])?;
        }
    }
    Ok(())
}

/// Fit `u₀` with the configured network and run the time loop.
pub fn run(cfg: &RunConfig, sinks: RunSinks<'_>) -> Result<RunOutput> {
    cfg.validate()?;
    let spec = cfg.network()?;
    let problem = cfg.problem_spec();
    let grid_s = QuadratureGrid::new(problem.a, problem.b, cfg.n_s)?;
    let fit = fit_initial(&spec, &problem, &grid_s, cfg.seed, cfg.fit_tol, cfg.fit_max_iters, cfg.fit_rcond)?;
    info!("fit error {:e} (seed {})", fit.error, fit.seed);
    let theta0 = fit.params.0.clone();
    let mut out = run_with_model(&spec, &theta0, cfg, sinks)?;
    out.fit = Some(fit);
    Ok(out)
}

/// The time loop from given initial parameters.
pub fn run_with_model<A: Ansatz + ?Sized>(model: &A, theta0: &[f64], cfg: &RunConfig, sinks: RunSinks<'_>) -> Result<RunOutput> {
    cfg.validate()?;
    model.check_params(theta0)?;
    let problem = cfg.problem_spec();
    check_len(problem.output_dim(), model.output_dim())?;
    let grid_s = QuadratureGrid::new(problem.a, problem.b, cfg.n_s)?;
    let grid_m = QuadratureGrid::new(problem.a, problem.b, cfg.n_m)?;
    let grid_e = QuadratureGrid::new(problem.a, problem.b, cfg.n_e)?;
    let tableau = cfg.tableau.tableau();
    let opts = cfg.teng_options();
    let lookup = |name: &String| problem.invariant(name).cloned().expect("validated");
    let constraints: Vec<InvariantSpec> = cfg.constraints.iter().map(lookup).collect();
    let relax_inv = problem.invariant(&cfg.relax_invariant).cloned();
    let reference = if cfg.reference { Some(Reference::for_config(cfg)?) } else { None };
    let names: Vec<String> = problem.invariants.iter().map(|i| i.name.clone()).collect();

    let invariants_at = |theta: &[f64]| -> Result<Vec<f64>> {
        let f = model.sample(theta, &grid_m);
        problem.invariants.iter().map(|inv| eval_invariant(inv, &grid_m, &f)).collect()
    };
    let error_at = |theta: &[f64], t: f64| -> Result<Option<f64>> {
        match reference.as_ref().and_then(|r| r.at(t, grid_e.points())) {
            Some(u_ref) => Ok(Some(relative_error(&model.sample(theta, &grid_e), &u_ref)?)),
            None => Ok(None),
        }
    };

    let initial = invariants_at(theta0)?;
    let anchors: Vec<f64> = cfg
        .constraints
        .iter()
        .map(|c| initial[names.iter().position(|n| n == c).expect("validated")])
        .collect();

    let mut step_w = sinks.steps.map(csv::Writer::from_writer);
    let mut snap_w = sinks.snapshots.map(csv::Writer::from_writer);
    if let Some(w) = step_w.as_mut() {
        w.write_record(step_csv_header(&names))?;
    }
    let component_names = problem.component_names();
    if let Some(w) = snap_w.as_mut() {
        w.write_record(["t", "x", "component", "value"])?;
        write_snapshot(w, 0.0, grid_e.points(), component_names, &model.sample(theta0, &grid_e))?;
    }

    let mut output = RunOutput {
        fit: None,
        theta0: theta0.to_vec(),
        final_params: theta0.to_vec(),
        invariant_names: names.clone(),
        initial_invariants: initial.clone(),
        initial_error: error_at(theta0, 0.0)?,
        steps: Vec::new(),
        snapshots: vec![(0.0, theta0.to_vec())],
    };

    let mut theta = theta0.to_vec();
    let mut prev = initial.clone();
    let mut t = 0.0;
    let mut step = 0;
    let result: Result<()> = (|| {
        while cfg.t_end - t > 1e-3 * cfg.dt {
            step += 1;
            debug!("step {step} from t = {t}");
            let relax = if cfg.relaxation { relax_inv.as_ref() } else { None };
            let target = match build_relaxed_target(model, &theta, &grid_s, &problem, &tableau, cfg.dt, relax) {
                Err(e @ (Error::RelaxationOutOfRange { .. } | Error::RelaxationFailed { .. }))
                    if cfg.policy == ErrorPolicy::Warn =>
                {
                    warn!("step {step}: {e}; using the unrelaxed target");
                    build_relaxed_target(model, &theta, &grid_s, &problem, &tableau, cfg.dt, None)?
                }
                r => r?,
            };
            let target_defect = match &relax_inv {
                Some(inv) => Some(
                    (eval_invariant(inv, &grid_s, &target.target)? - eval_invariant(inv, &grid_s, &target.base)?).abs(),
                ),
                None => None,
            };

            let update = if cfg.tangent_projection {
                let c = TangentConstraint { invariants: &constraints, grid: &grid_m };
                tangent_projected_update(model, &theta, &grid_s, &target.target, &c, &opts)
            } else {
                teng_update(model, &theta, &grid_s, &target.target, &opts)
            };
            let (mut next, teng) = match update {
                Err(Error::NoProgress(rep)) if cfg.policy == ErrorPolicy::Warn => {
                    warn!("step {step}: least squares made no progress; parameters kept");
                    (theta.clone(), rep)
                }
                r => r?,
            };

            let projection = if cfg.manifold_projection {
                let (p, rep) = project(model, &next, &grid_m, &constraints, &anchors, cfg.proj_tol, cfg.proj_max_iters)?;
                match (rep.status, cfg.policy) {
                    (ProjectionStatus::Converged, _) => next = p,
                    (ProjectionStatus::SingularGram, ErrorPolicy::Strict) => {
                        return Err(Error::SingularGram { cond: rep.gram_condition })
                    }
                    (ProjectionStatus::MaxIters, ErrorPolicy::Strict) => {
                        return Err(Error::ProjectionNotConverged {
                            max_residual: rep.max_residual(),
                            iterations: rep.iterations,
                        })
                    }
                    (status, ErrorPolicy::Warn) => {
                        warn!("step {step}: projection ended with status {}", status.as_str());
                        next = p;
                    }
                }
                Some(rep)
            } else {
                None
            };

            theta = next;
            t += target.gamma * cfg.dt;
            let values = invariants_at(&theta)?;
            let report = StepReport {
                step,
                t,
                gamma: target.gamma,
                teng,
                projection,
                drift_init: values.iter().zip(&initial).map(|(v, i)| v - i).collect(),
                drift_prev: values.iter().zip(&prev).map(|(v, p)| v - p).collect(),
                invariant_values: values.clone(),
                target_defect,
                rel_error: error_at(&theta, t)?,
            };
            prev = values;
            if let Some(w) = step_w.as_mut() {
                w.write_record(step_csv_row(&report))?;
            }
            if cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 {
                output.snapshots.push((t, theta.clone()));
                if let Some(w) = snap_w.as_mut() {
                    write_snapshot(w, t, grid_e.points(), component_names, &model.sample(&theta, &grid_e))?;
                }
            }
            output.steps.push(report);
        }
        Ok(())
    })();

    if let Some(mut w) = step_w {
        w.flush()?;
    }
    if let Some(mut w) = snap_w {
        w.flush()?;
    }
    result?;
    output.final_params = theta;
    Ok(output)
}

/// Field snapshots read back from a snapshot CSV (`t,x,component,value`).
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotTable {
    pub xs: Vec<f64>,
    pub components: Vec<String>,
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
}

impl SnapshotTable {
    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["t", "x", "component", "value"] {
            return Err(Error::Config("snapshot CSV must have columns t,x,component,value".into()));
        }
        let mut xs: Vec<f64> = Vec::new();
        let mut components: Vec<String> = Vec::new();
        let mut times: Vec<f64> = Vec::new();
        let mut values: Vec<Vec<f64>> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number `{s}`")));
            let (t, x, c, v) = (num(&rec[0])?, num(&rec[1])?, rec[2].to_string(), num(&rec[3])?);
            if times.last() != Some(&t) {
                times.push(t);
                values.push(Vec::new());
            }
            if times.len() == 1 {
                if xs.last() != Some(&x) {
                    xs.push(x);
                }
                if !components.contains(&c) {
                    components.push(c);
                }
            }
            values.last_mut().expect("pushed above").push(v);
        }
        let dim = components.len().max(1);
        let fields = values
            .into_iter()
            .map(|v| {
                check_len(xs.len() * dim, v.len())?;
                Ok(Field::from_values(dim, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { xs, components, times, fields })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub t: f64,
    pub reference_t: f64,
    pub rel_error: f64,
    /// Invariant change since the first snapshot, one entry per problem invariant.
    pub drift: Vec<f64>,
}

/// Score each snapshot against the nearest reference time. Fails if the
/// nearest reference snapshot is more than `dt` away.
pub fn compare(problem: &ProblemSpec, run: &SnapshotTable, reference: &ReferenceSolution, dt: f64) -> Result<Vec<CompareRow>> {
    let grid = QuadratureGrid::new(problem.a, problem.b, run.xs.len())?;
    let mut first: Option<Vec<f64>> = None;
    let mut rows = Vec::with_capacity(run.times.len());
    for (&t, field) in run.times.iter().zip(&run.fields) {
        let (k, gap) = reference.nearest(t);
        if gap > dt {
            return Err(Error::MisalignedTimes { t, gap, limit: dt });
        }
        let u_ref = reference.interpolate(k, &run.xs);
        let values = problem.invariants.iter().map(|inv| eval_invariant(inv, &grid, field)).collect::<Result<Vec<_>>>()?;
        let base = first.get_or_insert_with(|| values.clone());
        rows.push(CompareRow {
            t,
            reference_t: reference.times[k],
            rel_error: relative_error(field, &u_ref)?,
            drift: values.iter().zip(base.iter()).map(|(v, b)| v - b).collect(),
        });
    }
    Ok(rows)
}

pub fn write_compare_csv(w: impl Write, problem: &ProblemSpec, rows: &[CompareRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string(), "reference_t".into(), "rel_error".into()];
    header.extend(problem.invariants.iter().map(|i| format!("inv_{}_drift", i.name)));
    wtr.write_record(&header)?;
    for r in rows {
        let mut rec = vec![format!("{:?}", r.t), format!("{:?}", r.reference_t), format!("{:?}", r.rel_error)];
        rec.extend(r.drift.iter().map(|d| format!("{d:?}")));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// The closed-form solution sampled at `times`, as a grid reference.
pub fn analytic_reference(problem: &ProblemSpec, n_grid: usize, times: &[f64]) -> Result<ReferenceSolution> {
    let grid = QuadratureGrid::new(problem.a, problem.b, n_grid)?;
    let mut snapshots = Vec::with_capacity(times.len());
    for &t in times {
        let mut f = Field::zeros(n_grid, problem.output_dim());
        for (i, &x) in grid.points().iter().enumerate() {
            let v = problem
                .analytic(x, t)
                .ok_or_else(|| Error::Config(format!("{} has no closed-form solution", problem.kind)))?;
            f.at_mut(i).copy_from_slice(&v);
        }
        snapshots.push(f);
    }
    Ok(ReferenceSolution {
        grid,
        components: problem.component_names().iter().map(|s| s.to_string()).collect(),
        times: times.to_vec(),
        snapshots,
    })
}
