//! Tangent-space least squares for the parameter update.
//!
//! Each time step fits `Δθ` to a field increment `Δu = u_target - û_θ` by
//! minimizing the quadrature-weighted residual `‖Δu - ∇θû Δθ‖`, then repeats
//! the linearization at the new parameters (Gauss-Newton sub-iterations).
//! Rows are scaled by `sqrt(w_i)` so an ordinary least-squares solve minimizes
//! the weighted `L²` residual. Rank deficiency is expected (network
//! symmetries) and handled by truncating small singular values.

use faer::Mat;
use log::{debug, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::integrators::network_rhs;
use crate::invariants::{invariant_theta_gradients, InvariantSpec};
use crate::problems::ProblemSpec;
use crate::quadrature::{pairwise_sum_by, QuadratureGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    TruncatedSvd,
    /// Uniform row sampling down to `4 n_θ` rows, then the SVD solve. Seeded.
    Sketched { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct LeastSquaresSystem {
    /// `n_points * output_dim` rows, point-major then component.
    pub jacobian: Mat<f64>,
    pub rhs: Vec<f64>,
    pub solver: SolverKind,
    pub rcond: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveInfo {
    pub rank: usize,
    pub truncated: usize,
    pub sigma_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TengOptions {
    pub max_iters: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_halvings: usize,
    pub rcond: f64,
    pub solver: SolverKind,
    /// Reuse the Jacobian of the first sub-iteration (profiling aid).
    pub frozen_jacobian: bool,
}

impl Default for TengOptions {
    fn default() -> Self {
        Self {
            max_iters: 5,
            tol_abs: 1e-10,
            tol_rel: 1e-8,
            max_halvings: 4,
            rcond: 1e-6,
            solver: SolverKind::TruncatedSvd,
            frozen_jacobian: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TengReport {
    pub sub_iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    /// Weighted residual after each accepted sub-iteration, starting with the initial one.
    pub residual_history: Vec<f64>,
    pub jacobian_rank: usize,
    pub truncated_singular_values: usize,
    pub halvings: usize,
}

/// Rows `sqrt(w_i) ∇θ û_c(x_i)`.
pub fn assemble_jacobian<A: Ansatz + ?Sized>(model: &A, params: &[f64], grid: &QuadratureGrid) -> Mat<f64> {
    let dim = model.output_dim();
    let sw = grid.spacing().sqrt();
    let mut j = Mat::<f64>::zeros(grid.len() * dim, model.n_params());
    for (i, &x) in grid.points().iter().enumerate() {
        for (c, g) in model.param_gradients(params, x).into_iter().enumerate() {
            let row = i * dim + c;
            for (k, v) in g.grad.iter().enumerate() {
                j[(row, k)] = sw * v;
            }
        }
    }
    j
}

pub fn weighted_rhs(grid: &QuadratureGrid, delta_u: &Field) -> Vec<f64> {
    let sw = grid.spacing().sqrt();
    delta_u.values().iter().map(|v| sw * v).collect()
}

/// `sqrt(Σ_i w_i |Δu(x_i)|²)`.
pub fn weighted_norm(grid: &QuadratureGrid, field: &Field) -> f64 {
    let dim = field.dim();
    let v = field.values();
    (grid.spacing() * pairwise_sum_by(field.n_points(), &|i| (0..dim).map(|c| v[i * dim + c].powi(2)).sum::<f64>()))
        .sqrt()
}

pub fn assemble_system<A: Ansatz + ?Sized>(
    model: &A,
    params: &[f64],
    grid: &QuadratureGrid,
    delta_u: &Field,
    solver: SolverKind,
    rcond: f64,
) -> Result<LeastSquaresSystem> {
    model.check_params(params)?;
    delta_u.check_shape(grid.len(), model.output_dim())?;
    Ok(LeastSquaresSystem {
        jacobian: assemble_jacobian(model, params, grid),
        rhs: weighted_rhs(grid, delta_u),
        solver,
        rcond,
    })
}

/// Minimal-norm least-squares solution with singular values below
/// `rcond * σ_max` discarded.
pub fn solve_ls(sys: &LeastSquaresSystem) -> Result<(Vec<f64>, SolveInfo)> {
    let m = sys.jacobian.nrows();
    let n = sys.jacobian.ncols();
    if sys.rhs.len() != m {
        return Err(Error::LengthMismatch { expected: m, actual: sys.rhs.len() });
    }
    match sys.solver {
        SolverKind::TruncatedSvd => truncated_svd_solve(&sys.jacobian, &sys.rhs, sys.rcond, 0.0),
        SolverKind::Sketched { seed } => {
            let target = (4 * n).min(m);
            if target == m {
                return truncated_svd_solve(&sys.jacobian, &sys.rhs, sys.rcond, 0.0);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = rand::seq::index::sample(&mut rng, m, target).into_vec();
            rows.sort_unstable();
            let scale = (m as f64 / target as f64).sqrt();
            let js = Mat::from_fn(target, n, |i, k| scale * sys.jacobian[(rows[i], k)]);
            let rs: Vec<f64> = rows.iter().map(|&r| scale * sys.rhs[r]).collect();
            truncated_svd_solve(&js, &rs, sys.rcond, 0.0)
        }
    }
}

/// Singular values at or below `max(rcond * σ_max, floor)` are discarded.
pub(crate) fn truncated_svd_solve(j: &Mat<f64>, r: &[f64], rcond: f64, floor: f64) -> Result<(Vec<f64>, SolveInfo)> {
    let svd = JacobianSvd::new(j, r)?;
    let cutoff = (rcond * svd.sigma_max()).max(floor);
    Ok(svd.solve(0.0, cutoff))
}

/// Thin SVD `J = U Σ Vᵀ` together with `Uᵀ r`, for repeated (damped) solves
/// against the same right-hand side.
#[derive(Debug, Clone)]
pub struct JacobianSvd {
    s: Vec<f64>,
    v: Mat<f64>,
    utr: Vec<f64>,
}

impl JacobianSvd {
    pub fn new(j: &Mat<f64>, r: &[f64]) -> Result<Self> {
        if r.len() != j.nrows() {
            return Err(Error::LengthMismatch { expected: j.nrows(), actual: r.len() });
        }
        if j.nrows() == 0 || j.ncols() == 0 {
            return Ok(Self { s: Vec::new(), v: Mat::zeros(j.ncols(), 0), utr: Vec::new() });
        }
        // faer is faster on tall inputs; for wide J factor Jᵀ = V Σ Uᵀ instead
        let wide = j.nrows() < j.ncols();
        let svd = if wide { j.transpose().to_owned().thin_svd() } else { j.thin_svd() }
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let sc = svd.S().column_vector();
        let s: Vec<f64> = (0..sc.nrows()).map(|l| sc[l]).collect();
        let (u, v) = if wide { (svd.V(), svd.U()) } else { (svd.U(), svd.V()) };
        let utr = (0..s.len()).map(|l| (0..r.len()).map(|i| u[(i, l)] * r[i]).sum()).collect();
        Ok(Self { s, v: v.to_owned(), utr })
    }

    pub fn sigma_max(&self) -> f64 {
        self.s.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// `argmin ‖JΔθ - r‖² + μ‖Δθ‖²` restricted to singular values above `cutoff`.
    pub fn solve(&self, damping: f64, cutoff: f64) -> (Vec<f64>, SolveInfo) {
        let n = self.v.nrows();
        let mut coef = vec![0.0; self.s.len()];
        let mut rank = 0;
        for (l, c) in coef.iter_mut().enumerate() {
            let sl = self.s[l];
            if sl > cutoff && sl > 0.0 {
                *c = sl * self.utr[l] / (sl * sl + damping);
                rank += 1;
            }
        }
        let x = (0..n).map(|p| (0..coef.len()).map(|l| self.v[(p, l)] * coef[l]).sum()).collect();
        (x, SolveInfo { rank, truncated: self.s.len() - rank, sigma_max: self.sigma_max() })
    }
}

/// Gram-Schmidt basis of `span(gradients)`. Vectors with norm ≤ 1e-30, or
/// dependent on earlier ones, are skipped with a warning.
pub fn orthonormal_basis(gradients: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (idx, g) in gradients.iter().enumerate() {
        let norm0 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm0 <= 1e-30 {
            warn!("invariant gradient {idx} is degenerate (norm {norm0:e}); constraint skipped");
            continue;
        }
        let mut q = g.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let proj: f64 = q.iter().zip(b).map(|(x, y)| x * y).sum();
                q.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-12 * norm0 {
            warn!("invariant gradient {idx} is linearly dependent on earlier ones; constraint skipped");
            continue;
        }
        q.iter_mut().for_each(|x| *x /= norm);
        basis.push(q);
    }
    basis
}

/// `v ← (I - QQᵀ) v`.
pub fn project_out(basis: &[Vec<f64>], v: &mut [f64]) {
    for _ in 0..2 {
        for q in basis {
            let proj: f64 = v.iter().zip(q).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= proj * y);
        }
    }
}

/// `J ← J (I - QQᵀ)`.
pub fn project_jacobian(basis: &[Vec<f64>], j: &mut Mat<f64>) {
    let (m, n) = (j.nrows(), j.ncols());
    for q in basis {
        for row in 0..m {
            let dot: f64 = (0..n).map(|k| j[(row, k)] * q[k]).sum();
            if dot != 0.0 {
                for k in 0..n {
                    j[(row, k)] -= dot * q[k];
                }
            }
        }
    }
}

/// Invariants whose gradients constrain the update direction.
pub struct TangentConstraint<'a> {
    pub invariants: &'a [InvariantSpec],
    pub grid: &'a QuadratureGrid,
}

/// Gauss-Newton sub-iterations toward `target`.
pub fn teng_update<A: Ansatz + ?Sized>(
    model: &A,
    params: &[f64],
    grid: &QuadratureGrid,
    target: &Field,
    opts: &TengOptions,
) -> Result<(Vec<f64>, TengReport)> {
    iterate(model, params, grid, target, opts, None)
}

/// As [`teng_update`], with every direction confined to the orthogonal
/// complement of the invariant gradients (recomputed at each sub-iterate), so
/// `gᵀΔθ = 0` for each constraint.
pub fn tangent_projected_update<A: Ansatz + ?Sized>(
    model: &A,
    params: &[f64],
    grid: &QuadratureGrid,
    target: &Field,
    constraint: &TangentConstraint<'_>,
    opts: &TengOptions,
) -> Result<(Vec<f64>, TengReport)> {
    if constraint.invariants.is_empty() {
        return Err(Error::Config("tangent projection needs at least one invariant".into()));
    }
    iterate(model, params, grid, target, opts, Some(constraint))
}

fn iterate<A: Ansatz + ?Sized>(
    model: &A,
    params: &[f64],
    grid: &QuadratureGrid,
    target: &Field,
    opts: &TengOptions,
    constraint: Option<&TangentConstraint<'_>>,
) -> Result<(Vec<f64>, TengReport)> {
    model.check_params(params)?;
    target.check_shape(grid.len(), model.output_dim())?;

    let mut theta = params.to_vec();
    let mut delta_u = target.sub(&model.sample(&theta, grid));
    let mut res = weighted_norm(grid, &delta_u);
    let mut report = TengReport {
        initial_residual: res,
        final_residual: res,
        residual_history: vec![res],
        ..Default::default()
    };
    let mut frozen: Option<Mat<f64>> = None;

    for i in 0..opts.max_iters {
        if res <= opts.tol_abs || res <= opts.tol_rel * report.initial_residual {
            break;
        }
        let mut jac = match (&frozen, opts.frozen_jacobian) {
            (Some(j), true) => j.clone(),
            _ => assemble_jacobian(model, &theta, grid),
        };
        if opts.frozen_jacobian && frozen.is_none() {
            frozen = Some(jac.clone());
        }
        let (basis, floor) = match constraint {
            Some(c) => {
                let gs = invariant_theta_gradients(c.invariants, model, &theta, c.grid)?;
                let basis = orthonormal_basis(&gs);
                // the projection leaves rounding-level residue in annihilated directions
                let floor = f64::EPSILON * (jac.nrows().max(jac.ncols()) as f64) * jac.norm_l2();
                project_jacobian(&basis, &mut jac);
                (basis, floor)
            }
            None => (Vec::new(), 0.0),
        };
        let sys = LeastSquaresSystem { jacobian: jac, rhs: weighted_rhs(grid, &delta_u), solver: opts.solver, rcond: opts.rcond };
        let (mut step, info) = if floor > 0.0 {
            match sys.solver {
                SolverKind::TruncatedSvd => truncated_svd_solve(&sys.jacobian, &sys.rhs, sys.rcond, floor)?,
                SolverKind::Sketched { .. } => solve_ls(&sys)?,
            }
        } else {
            solve_ls(&sys)?
        };
        project_out(&basis, &mut step);
        report.jacobian_rank = info.rank;
        report.truncated_singular_values = info.truncated;

        let mut scale = 1.0;
        let mut accepted = None;
        for h in 0..=opts.max_halvings {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + scale * s).collect();
            let du = target.sub(&model.sample(&trial, grid));
            let r = weighted_norm(grid, &du);
            if r < res {
                report.halvings += h;
                accepted = Some((trial, du, r));
                break;
            }
            scale *= 0.5;
        }
        match accepted {
            Some((trial, du, r)) => {
                debug!(
                    "sub-iteration {}: residual {res:e} -> {r:e}, |step| {:e}, rank {}",
                    i + 1,
                    scale * step.iter().map(|v| v * v).sum::<f64>().sqrt(),
                    info.rank
                );
                theta = trial;
                delta_u = du;
                res = r;
                report.sub_iterations += 1;
                report.final_residual = r;
                report.residual_history.push(r);
            }
            None if i == 0 => return Err(Error::NoProgress(report)),
            None => break,
        }
    }
    Ok((theta, report))
}

/// Neural Galerkin velocity `θ̇ = (M + ε I)⁺ F` with `M = JᵀJ`, `F = Jᵀ f(û)`
/// (both quadrature-weighted). The pseudo-inverse truncates at `rcond`
/// relative to the largest singular value of `M + εI`.
pub fn galerkin_rhs<A: Ansatz + ?Sized>(
    model: &A,
    params: &[f64],
    grid: &QuadratureGrid,
    problem: &ProblemSpec,
    eps_reg: f64,
    rcond: f64,
) -> Result<Vec<f64>> {
    model.check_params(params)?;
    if eps_reg < 0.0 {
        return Err(Error::Config(format!("regularization must be non-negative, got {eps_reg}")));
    }
    let j = assemble_jacobian(model, params, grid);
    let f = weighted_rhs(grid, &network_rhs(model, params, grid, problem));
    let n = j.ncols();
    let mut m = j.transpose() * &j;
    for k in 0..n {
        m[(k, k)] += eps_reg;
    }
    let fv: Vec<f64> = (0..n).map(|k| (0..j.nrows()).map(|i| j[(i, k)] * f[i]).sum()).collect();
    Ok(truncated_svd_solve(&m, &fv, rcond, 0.0)?.0)
}
