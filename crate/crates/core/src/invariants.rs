//! Invariant functionals `I(u) = ∫ k(u) dx` and their parameter gradients.
//!
//! For vector fields `k` is applied to the component tuple and the pointwise
//! values are summed before integration.

use std::fmt;

use crate::ansatz::Ansatz;
use crate::error::{check_len, Result};
use crate::field::Field;
use crate::quadrature::{pairwise_sum_by, QuadratureGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantKind {
    /// `k(u) = Σ_c u_c`
    Mass,
    /// `k(u) = Σ_c u_c²`
    Quadratic,
    /// `k(u) = ½ Σ_c u_c²`
    Hamiltonian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSpec {
    pub name: String,
    pub kind: InvariantKind,
}

impl InvariantSpec {
    pub fn new(name: impl Into<String>, kind: InvariantKind) -> Self {
        Self { name: name.into(), kind }
    }

    pub fn mass() -> Self {
        Self::new("mass", InvariantKind::Mass)
    }

    pub fn energy() -> Self {
        Self::new("energy", InvariantKind::Quadratic)
    }

    pub fn hamiltonian() -> Self {
        Self::new("hamiltonian", InvariantKind::Hamiltonian)
    }

    pub fn degree(&self) -> u32 {
        match self.kind {
            InvariantKind::Mass => 1,
            InvariantKind::Quadratic | InvariantKind::Hamiltonian => 2,
        }
    }

    /// Pointwise density `k(u)`.
    #[inline]
    pub fn density(&self, u: &[f64]) -> f64 {
        match self.kind {
            InvariantKind::Mass => u.iter().sum(),
            InvariantKind::Quadratic => u.iter().map(|v| v * v).sum(),
            InvariantKind::Hamiltonian => 0.5 * u.iter().map(|v| v * v).sum::<f64>(),
        }
    }

    /// `∂k/∂u_c`.
    #[inline]
    pub fn slope(&self, u: &[f64], c: usize) -> f64 {
        match self.kind {
            InvariantKind::Mass => 1.0,
            InvariantKind::Quadratic => 2.0 * u[c],
            InvariantKind::Hamiltonian => u[c],
        }
    }
}

impl fmt::Display for InvariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `∫ k(u) dx` on the grid.
pub fn eval_invariant(inv: &InvariantSpec, grid: &QuadratureGrid, field: &Field) -> Result<f64> {
    check_len(grid.len(), field.n_points())?;
    Ok(grid.spacing() * pairwise_sum_by(grid.len(), &|i| inv.density(field.at(i))))
}

/// `∇θ I(û_θ) = Σ_i w_i Σ_c k'(û(x_i))_c ∇θ û_c(x_i)` for each invariant.
pub fn invariant_theta_gradients<A: Ansatz + ?Sized>(
    invs: &[InvariantSpec],
    model: &A,
    params: &[f64],
    grid: &QuadratureGrid,
) -> Result<Vec<Vec<f64>>> {
    model.check_params(params)?;
    let n = model.n_params();
    let mut out = vec![vec![0.0; n]; invs.len()];
    accumulate_gradients(invs, model, params, grid.points(), &mut out);
    let w = grid.spacing();
    for g in &mut out {
        g.iter_mut().for_each(|v| *v *= w);
    }
    Ok(out)
}

// Pairwise accumulation over points, splitting on the same boundaries as
// `pairwise_sum_by` so the result does not depend on the summation path.
fn accumulate_gradients<A: Ansatz + ?Sized>(
    invs: &[InvariantSpec],
    model: &A,
    params: &[f64],
    points: &[f64],
    out: &mut [Vec<f64>],
) {
    if points.len() <= 16 {
        for &x in points {
            let grads = model.param_gradients(params, x);
            let u: Vec<f64> = grads.iter().map(|g| g.value).collect();
            for (inv, acc) in invs.iter().zip(out.iter_mut()) {
                for (c, g) in grads.iter().enumerate() {
                    let s = inv.slope(&u, c);
                    if s != 0.0 {
                        acc.iter_mut().zip(&g.grad).for_each(|(a, gi)| *a += s * gi);
                    }
                }
            }
        }
        return;
    }
    let mid = points.len() / 2;
    let mut right: Vec<Vec<f64>> = out.iter().map(|g| vec![0.0; g.len()]).collect();
    accumulate_gradients(invs, model, params, &points[..mid], out);
    accumulate_gradients(invs, model, params, &points[mid..], &mut right);
    for (l, r) in out.iter_mut().zip(&right) {
        l.iter_mut().zip(r).for_each(|(a, b)| *a += b);
    }
}

pub fn invariant_theta_gradient<A: Ansatz + ?Sized>(
    inv: &InvariantSpec,
    model: &A,
    params: &[f64],
    grid: &QuadratureGrid,
) -> Result<Vec<f64>> {
    Ok(invariant_theta_gradients(std::slice::from_ref(inv), model, params, grid)?.remove(0))
}

/// `dI/dt` along the parameter velocity `θ̇`: `Σ_i w_i Σ_c k'_c (∇θ û_c · θ̇)`.
///
/// Evaluated pointwise (not through the assembled gradient) so it can serve as
/// an independent check of [`invariant_theta_gradient`].
pub fn tangent_conservation_defect<A: Ansatz + ?Sized>(
    inv: &InvariantSpec,
    model: &A,
    params: &[f64],
    theta_dot: &[f64],
    grid: &QuadratureGrid,
) -> Result<f64> {
    model.check_params(params)?;
    check_len(model.n_params(), theta_dot.len())?;
    let per_point = |i: usize| {
        let grads = model.param_gradients(params, grid.points()[i]);
        let u: Vec<f64> = grads.iter().map(|g| g.value).collect();
        grads
            .iter()
            .enumerate()
            .map(|(c, g)| inv.slope(&u, c) * g.grad.iter().zip(theta_dot).map(|(a, b)| a * b).sum::<f64>())
            .sum::<f64>()
    };
    Ok(grid.spacing() * pairwise_sum_by(grid.len(), &per_point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{FourierModel, Mode};
    use crate::quadrature::make_grid;

    #[test]
    fn mass_of_constant() {
        let g = make_grid(-1.0, 1.0, 50).unwrap();
        let f = Field::from_values(1, vec![1.0; 50]);
        assert!((eval_invariant(&InvariantSpec::mass(), &g, &f).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_of_symmetric_pair_is_twice_single_component() {
        let g = make_grid(-1.0, 1.0, 200).unwrap();
        let gauss: Vec<f64> = g.points().iter().map(|x| (-9.0 * x * x).exp()).collect();
        let both = Field::from_components(&[gauss.clone(), gauss.clone()]);
        let one = Field::from_components(&[gauss, vec![0.0; 200]]);
        let h = InvariantSpec::hamiltonian();
        let hb = eval_invariant(&h, &g, &both).unwrap();
        let ho = eval_invariant(&h, &g, &one).unwrap();
        assert!((hb - 2.0 * ho).abs() < 1e-15);
    }

    #[test]
    fn linear_model_gradients_by_hand() {
        let g = make_grid(-1.0, 1.0, 64).unwrap();
        let model = FourierModel::new(2.0, vec![Mode::Cos(1)], 1);
        let theta = [0.8];
        let phi: Vec<f64> = g.points().iter().map(|x| (std::f64::consts::PI * x).cos()).collect();
        let int_phi = g.integrate(&phi).unwrap();
        let int_phi2 = g.integrate(&phi.iter().map(|p| p * p).collect::<Vec<_>>()).unwrap();
        let gm = invariant_theta_gradient(&InvariantSpec::mass(), &model, &theta, &g).unwrap();
        assert!((gm[0] - int_phi).abs() < 1e-14);
        let gq = invariant_theta_gradient(&InvariantSpec::energy(), &model, &theta, &g).unwrap();
        assert!((gq[0] - 2.0 * 0.8 * int_phi2).abs() < 1e-14);
    }

    #[test]
    fn defect_is_gradient_inner_product() {
        let g = make_grid(-1.0, 1.0, 40).unwrap();
        let model = FourierModel::truncated(2.0, 2, 2);
        let theta: Vec<f64> = (0..model.n_params()).map(|i| (i as f64 * 0.7).sin()).collect();
        let inv = InvariantSpec::hamiltonian();
        let grad = invariant_theta_gradient(&inv, &model, &theta, &g).unwrap();
        assert_eq!(tangent_conservation_defect(&inv, &model, &theta, &vec![0.0; grad.len()], &g).unwrap(), 0.0);
        let d = tangent_conservation_defect(&inv, &model, &theta, &grad, &g).unwrap();
        let gg: f64 = grad.iter().map(|v| v * v).sum();
        assert!((d - gg).abs() < 1e-13 * gg.max(1.0));
    }
}
