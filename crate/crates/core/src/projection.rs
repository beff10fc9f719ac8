//! Closest-point correction of `θ` onto the set where the invariants keep
//! their anchored values.
//!
//! With constraints `m̂(η) = (I_j(û_η) - anchor_j)_j` and `G = m̂'(θ_in)` (one
//! row per invariant gradient), the multiplier iteration is
//!
//! ```text
//! λ⁰ = 0,   λ ← λ - (G Gᵀ)⁻¹ m̂(θ_in + Gᵀλ)
//! ```
//!
//! a simplified Newton method with the Jacobian frozen at `θ_in`.

use faer::Mat;

use crate::ansatz::Ansatz;
use crate::error::{check_len, Error, Result};
use crate::invariants::{eval_invariant, invariant_theta_gradients, InvariantSpec};
use crate::quadrature::QuadratureGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionStatus {
    Converged,
    MaxIters,
    SingularGram,
}

impl ProjectionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectionStatus::Converged => "converged",
            ProjectionStatus::MaxIters => "max-iters",
            ProjectionStatus::SingularGram => "singular-gram",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionReport {
    pub lambda: Vec<f64>,
    /// Number of constraint evaluations.
    pub iterations: usize,
    pub constraint_residual: Vec<f64>,
    /// `‖θ* - θ_in‖₂`
    pub parameter_displacement: f64,
    pub status: ProjectionStatus,
    /// Condition number of `G Gᵀ` (0 when no solve was needed).
    pub gram_condition: f64,
}

impl ProjectionReport {
    pub fn max_residual(&self) -> f64 {
        self.constraint_residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// A constraint row whose norm has cancelled below this fraction of
/// `Σ_i w_i Σ_c |k'_c| ‖∇θ û_c(x_i)‖` carries no direction and makes the
/// Gram matrix singular even when `n_I = 1`.
pub const DEGENERATE_GRADIENT: f64 = 1e-12;

fn gradient_scales<A: Ansatz + ?Sized>(
    model: &A,
    params: &[f64],
    grid: &QuadratureGrid,
    invariants: &[InvariantSpec],
) -> Vec<f64> {
    let w = grid.spacing();
    let mut out = vec![0.0; invariants.len()];
    for &x in grid.points() {
        let grads = model.param_gradients(params, x);
        let u: Vec<f64> = grads.iter().map(|g| g.value).collect();
        for (inv, acc) in invariants.iter().zip(out.iter_mut()) {
            for (c, g) in grads.iter().enumerate() {
                *acc += w * inv.slope(&u, c).abs() * g.grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            }
        }
    }
    out
}

/// `I_j(û_θ) - anchor_j` on the quadrature grid.
pub fn constraint_values<A: Ansatz + ?Sized>(
    model: &A,
    params: &[f64],
    grid: &QuadratureGrid,
    invariants: &[InvariantSpec],
    anchors: &[f64],
) -> Result<Vec<f64>> {
    check_len(invariants.len(), anchors.len())?;
    model.check_params(params)?;
    let field = model.sample(params, grid);
    invariants
        .iter()
        .zip(anchors)
        .map(|(inv, a)| Ok(eval_invariant(inv, grid, &field)? - a))
        .collect()
}

/// Per-constraint default tolerance `1e-12 · max(1, |anchor|)`.
pub fn default_tolerances(anchors: &[f64]) -> Vec<f64> {
    anchors.iter().map(|a| 1e-12 * a.abs().max(1.0)).collect()
}

/// Project `θ_in` onto the conservation manifold.
///
/// `tol = None` uses [`default_tolerances`]; `Some(t)` applies `t` to every
/// constraint. Non-convergence and a singular Gram matrix are reported through
/// [`ProjectionReport::status`] together with the best iterate found (for a
/// singular Gram matrix that is `θ_in`).
pub fn project<A: Ansatz + ?Sized>(
    model: &A,
    theta_in: &[f64],
    grid: &QuadratureGrid,
    invariants: &[InvariantSpec],
    anchors: &[f64],
    tol: Option<f64>,
    max_iters: usize,
) -> Result<(Vec<f64>, ProjectionReport)> {
    if invariants.is_empty() {
        return Err(Error::Config("projection needs at least one invariant".into()));
    }
    if max_iters == 0 {
        return Err(Error::Config("projection needs max_iters >= 1".into()));
    }
    let tols = match tol {
        Some(t) if t > 0.0 => vec![t; anchors.len()],
        Some(t) => return Err(Error::Config(format!("projection tolerance must be positive, got {t}"))),
        None => default_tolerances(anchors),
    };
    let n_i = invariants.len();

    let mut residual = constraint_values(model, theta_in, grid, invariants, anchors)?;
    let mut report = ProjectionReport {
        lambda: vec![0.0; n_i],
        iterations: 1,
        constraint_residual: residual.clone(),
        parameter_displacement: 0.0,
        status: ProjectionStatus::Converged,
        gram_condition: 0.0,
    };
    let feasible = |r: &[f64]| r.iter().zip(&tols).all(|(r, t)| r.abs() <= *t);
    // scaled violation used to pick the best iterate
    let violation = |r: &[f64]| r.iter().zip(&tols).fold(0.0_f64, |m, (r, t)| m.max(r.abs() / t));
    if feasible(&residual) {
        return Ok((theta_in.to_vec(), report));
    }

    let g = invariant_theta_gradients(invariants, model, theta_in, grid)?;
    let scales = gradient_scales(model, theta_in, grid, invariants);
    let cancelled = g
        .iter()
        .zip(&scales)
        .any(|(gj, b)| gj.iter().map(|v| v * v).sum::<f64>().sqrt() <= DEGENERATE_GRADIENT * b);
    let gram = Mat::from_fn(n_i, n_i, |i, j| g[i].iter().zip(&g[j]).map(|(a, b)| a * b).sum::<f64>());
    let svd = gram.thin_svd().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let (smax, smin) = (0..n_i).fold((0.0_f64, f64::INFINITY), |(hi, lo), k| (hi.max(s[k]), lo.min(s[k])));
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    report.gram_condition = cond;
    if cancelled || !(cond <= GRAM_CONDITION_LIMIT) {
        report.status = ProjectionStatus::SingularGram;
        return Ok((theta_in.to_vec(), report));
    }
    let (u, v) = (svd.U(), svd.V());
    let gram_solve = |r: &[f64]| -> Vec<f64> {
        let coef: Vec<f64> = (0..n_i).map(|k| (0..n_i).map(|i| u[(i, k)] * r[i]).sum::<f64>() / s[k]).collect();
        (0..n_i).map(|i| (0..n_i).map(|k| v[(i, k)] * coef[k]).sum()).collect()
    };
    let realize = |lambda: &[f64]| -> Vec<f64> {
        let mut theta = theta_in.to_vec();
        for (gj, lj) in g.iter().zip(lambda) {
            theta.iter_mut().zip(gj).for_each(|(t, gk)| *t += lj * gk);
        }
        theta
    };

    let mut lambda = vec![0.0; n_i];
    let mut best = (violation(&residual), theta_in.to_vec(), lambda.clone(), residual.clone());
    let mut converged = false;
    while report.iterations < max_iters {
        let delta = gram_solve(&residual);
        lambda.iter_mut().zip(&delta).for_each(|(l, d)| *l -= d);
        let theta = realize(&lambda);
        residual = constraint_values(model, &theta, grid, invariants, anchors)?;
        report.iterations += 1;
        let viol = violation(&residual);
        if viol < best.0 {
            best = (viol, theta, lambda.clone(), residual.clone());
        }
        if feasible(&residual) {
            converged = true;
            break;
        }
    }
    let (_, theta, lambda, residual) = best;
    report.parameter_displacement = theta.iter().zip(theta_in).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    report.lambda = lambda;
    report.constraint_residual = residual;
    report.status = if converged { ProjectionStatus::Converged } else { ProjectionStatus::MaxIters };
    Ok((theta, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{FourierModel, Mode};
    use crate::quadrature::make_grid;

    #[test]
    fn on_manifold_is_a_single_evaluation() {
        let g = make_grid(-1.0, 1.0, 64).unwrap();
        let model = FourierModel::truncated(2.0, 2, 1);
        let theta = vec![1.0, 0.2, -0.1, 0.3, 0.05];
        let invs = [InvariantSpec::mass(), InvariantSpec::energy()];
        let anchors = constraint_values(&model, &theta, &g, &invs, &[0.0, 0.0]).unwrap();
        let (out, rep) = project(&model, &theta, &g, &invs, &anchors, None, 50).unwrap();
        assert_eq!(out, theta);
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.lambda, vec![0.0, 0.0]);
        assert_eq!(rep.status, ProjectionStatus::Converged);
    }

    #[test]
    fn linear_mass_constraint_by_hand() {
        let g = make_grid(-1.0, 1.0, 32).unwrap();
        let model = FourierModel::new(2.0, vec![Mode::Constant], 1);
        let v = constraint_values(&model, &[0.75], &g, &[InvariantSpec::mass()], &[1.0]).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quadratic_constraint_halves_the_coefficient() {
        // I = θ² ∫φ², anchor c = I/4 → θ* = θ/2
        let g = make_grid(-1.0, 1.0, 64).unwrap();
        let model = FourierModel::new(2.0, vec![Mode::Cos(1)], 1);
        let inv = [InvariantSpec::energy()];
        let full = constraint_values(&model, &[1.2], &g, &inv, &[0.0]).unwrap()[0];
        let (theta, rep) = project(&model, &[1.2], &g, &inv, &[full / 4.0], None, 50).unwrap();
        assert_eq!(rep.status, ProjectionStatus::Converged);
        assert!((theta[0] - 0.6).abs() < 1e-12, "{}", theta[0]);
        assert!(rep.max_residual() <= 1e-12);
    }

    #[test]
    fn gradient_free_constraint_is_singular() {
        // mass of a pure cosine has zero parameter gradient
        let g = make_grid(-1.0, 1.0, 64).unwrap();
        let model = FourierModel::new(2.0, vec![Mode::Cos(1)], 1);
        let (theta, rep) = project(&model, &[0.4], &g, &[InvariantSpec::mass()], &[1.0], None, 50).unwrap();
        assert_eq!(rep.status, ProjectionStatus::SingularGram);
        assert_eq!(theta, vec![0.4]);
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let g = make_grid(-1.0, 1.0, 64).unwrap();
        let model = FourierModel::new(2.0, vec![Mode::Cos(1)], 1);
        let inv = [InvariantSpec::energy()];
        let (_, rep) = project(&model, &[1.0], &g, &inv, &[0.1], None, 2).unwrap();
        assert_eq!(rep.status, ProjectionStatus::MaxIters);
        assert_eq!(rep.iterations, 2);
        assert!(rep.max_residual() < 0.9);
    }
}
