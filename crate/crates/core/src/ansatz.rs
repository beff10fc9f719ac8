//! The parameterized solution `û(θ, x)`.
//!
//! Everything above the network layer (least squares, invariants, projection,
//! the time loop) is written against [`Ansatz`], so the same machinery drives
//! the MLP and the linear-in-parameter [`FourierModel`] used as a test oracle.

use std::f64::consts::PI;

use crate::ad::{Jet3, ParamGradient};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::quadrature::QuadratureGrid;

pub trait Ansatz {
    fn n_params(&self) -> usize;

    fn output_dim(&self) -> usize;

    /// Write `û(θ, x)` into `out` (length `output_dim`).
    fn eval_into(&self, params: &[f64], x: f64, out: &mut [f64]);

    /// Spatial jets (orders 0..=3) of every output component at `x`.
    fn jets(&self, params: &[f64], x: f64) -> Vec<Jet3>;

    /// Value and `∇θ û` of every output component at `x`.
    fn param_gradients(&self, params: &[f64], x: f64) -> Vec<ParamGradient>;

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() == self.n_params() {
            Ok(())
        } else {
            Err(Error::ParamLength { expected: self.n_params(), actual: params.len() })
        }
    }

    fn eval(&self, params: &[f64], x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.output_dim()];
        self.eval_into(params, x, &mut out);
        out
    }

    /// `û(θ, ·)` sampled on every grid point.
    fn sample(&self, params: &[f64], grid: &QuadratureGrid) -> Field {
        let dim = self.output_dim();
        let mut field = Field::zeros(grid.len(), dim);
        for (i, &x) in grid.points().iter().enumerate() {
            self.eval_into(params, x, field.at_mut(i));
        }
        field
    }
}

/// One real Fourier basis function on a periodic interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Constant,
    Cos(u32),
    Sin(u32),
}

/// Linear-in-parameter trigonometric ansatz,
/// `û_c(x) = Σ_k θ[c * n_modes + k] φ_k(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierModel {
    domain_length: f64,
    modes: Vec<Mode>,
    output_dim: usize,
}

impl FourierModel {
    pub fn new(domain_length: f64, modes: Vec<Mode>, output_dim: usize) -> Self {
        assert!(domain_length > 0.0 && !modes.is_empty() && output_dim > 0);
        Self { domain_length, modes, output_dim }
    }

    /// Constant plus `cos`/`sin` of wavenumbers `1..=max_wavenumber`.
    pub fn truncated(domain_length: f64, max_wavenumber: u32, output_dim: usize) -> Self {
        let mut modes = vec![Mode::Constant];
        for m in 1..=max_wavenumber {
            modes.push(Mode::Cos(m));
            modes.push(Mode::Sin(m));
        }
        Self::new(domain_length, modes, output_dim)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Jet of basis function `mode` at `x`.
    pub fn basis_jet(&self, mode: Mode, x: f64) -> Jet3 {
        let k = 2.0 * PI / self.domain_length;
        match mode {
            Mode::Constant => Jet3::constant(1.0),
            Mode::Cos(m) => (Jet3::variable(x) * (k * m as f64)).cos(),
            Mode::Sin(m) => (Jet3::variable(x) * (k * m as f64)).sin(),
        }
    }
}

impl Ansatz for FourierModel {
    fn n_params(&self) -> usize {
        self.modes.len() * self.output_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn eval_into(&self, params: &[f64], x: f64, out: &mut [f64]) {
        let nm = self.modes.len();
        let basis: Vec<f64> = self.modes.iter().map(|&m| self.basis_jet(m, x).v0).collect();
        for (c, o) in out.iter_mut().enumerate() {
            *o = params[c * nm..(c + 1) * nm].iter().zip(&basis).map(|(p, b)| p * b).sum();
        }
    }

    fn jets(&self, params: &[f64], x: f64) -> Vec<Jet3> {
        let nm = self.modes.len();
        let basis: Vec<Jet3> = self.modes.iter().map(|&m| self.basis_jet(m, x)).collect();
        (0..self.output_dim)
            .map(|c| {
                let mut j = Jet3::ZERO;
                for (p, b) in params[c * nm..(c + 1) * nm].iter().zip(&basis) {
                    j.add_scaled(*p, b);
                }
                j
            })
            .collect()
    }

    fn param_gradients(&self, params: &[f64], x: f64) -> Vec<ParamGradient> {
        let nm = self.modes.len();
        let basis: Vec<f64> = self.modes.iter().map(|&m| self.basis_jet(m, x).v0).collect();
        (0..self.output_dim)
            .map(|c| {
                let mut grad = vec![0.0; self.n_params()];
                grad[c * nm..(c + 1) * nm].copy_from_slice(&basis);
                let value = params[c * nm..(c + 1) * nm].iter().zip(&basis).map(|(p, b)| p * b).sum();
                ParamGradient { value, grad }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_model_gradient_is_the_feature() {
        let model = FourierModel::new(2.0, vec![Mode::Sin(1)], 1);
        let x = 0.3;
        let g = &model.param_gradients(&[1.7], x)[0];
        assert_eq!(g.grad, vec![(PI * x).sin()]);
        assert!((g.value - 1.7 * (PI * x).sin()).abs() < 1e-15);
    }

    #[test]
    fn two_component_layout() {
        let model = FourierModel::truncated(2.0, 1, 2);
        assert_eq!(model.n_params(), 6);
        let p = [1.0, 0.0, 0.0, 0.0, 2.0, 0.0];
        let x = 0.25;
        let v = model.eval(&p, x);
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!((v[1] - 2.0 * (PI * x).cos()).abs() < 1e-15);
        let j = model.jets(&p, x);
        assert!((j[1].v1 + 2.0 * PI * (PI * x).sin()).abs() < 1e-13);
    }
}
