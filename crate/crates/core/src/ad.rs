//! Exact derivatives of the ansatz.
//!
//! Spatial derivatives are carried as truncated Taylor jets: one forward pass
//! through the network yields the value and the first three `x`-derivatives
//! together. Parameter gradients come from a reverse sweep per sample point
//! (see [`crate::network::NetworkSpec`]). Mixed derivatives `∂θ ∂x` are not
//! provided.

use std::ops::{Add, Mul, Neg, Sub};

use crate::ansatz::Ansatz;
use crate::error::Result;
use crate::network::NetworkSpec;

/// Value and first three derivatives of a scalar function of `x`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet3 {
    pub v0: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl Jet3 {
    pub const ZERO: Jet3 = Jet3 { v0: 0.0, v1: 0.0, v2: 0.0, v3: 0.0 };

    pub const fn new(v0: f64, v1: f64, v2: f64, v3: f64) -> Self {
        Self { v0, v1, v2, v3 }
    }

    pub const fn constant(c: f64) -> Self {
        Self::new(c, 0.0, 0.0, 0.0)
    }

    /// The independent variable itself.
    pub const fn variable(x: f64) -> Self {
        Self::new(x, 1.0, 0.0, 0.0)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.v0, s * self.v1, s * self.v2, s * self.v3)
    }

    /// `self += s * other`, the inner loop of every dense layer.
    #[inline]
    pub fn add_scaled(&mut self, s: f64, other: &Jet3) {
        self.v0 += s * other.v0;
        self.v1 += s * other.v1;
        self.v2 += s * other.v2;
        self.v3 += s * other.v3;
    }

    /// `g ∘ self`, given `[g, g', g'', g''']` evaluated at `self.v0`
    /// (Faà di Bruno to third order).
    pub fn compose(self, g: [f64; 4]) -> Self {
        let (h1, h2, h3) = (self.v1, self.v2, self.v3);
        Self::new(
            g[0],
            g[1] * h1,
            g[2] * h1 * h1 + g[1] * h2,
            g[3] * h1 * h1 * h1 + 3.0 * g[2] * h1 * h2 + g[1] * h3,
        )
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v0.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v0.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn tanh(self) -> Self {
        let t = self.v0.tanh();
        let d1 = 1.0 - t * t;
        self.compose([t, d1, -2.0 * t * d1, (6.0 * t * t - 2.0) * d1])
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, o: Jet3) -> Jet3 {
        Jet3::new(self.v0 + o.v0, self.v1 + o.v1, self.v2 + o.v2, self.v3 + o.v3)
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, o: Jet3) -> Jet3 {
        Jet3::new(self.v0 - o.v0, self.v1 - o.v1, self.v2 - o.v2, self.v3 - o.v3)
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, s: f64) -> Jet3 {
        self.scale(s)
    }
}

/// Leibniz rule, truncated at third order.
impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, o: Jet3) -> Jet3 {
        let (f, g) = (self, o);
        Jet3::new(
            f.v0 * g.v0,
            f.v1 * g.v0 + f.v0 * g.v1,
            f.v2 * g.v0 + 2.0 * f.v1 * g.v1 + f.v0 * g.v2,
            f.v3 * g.v0 + 3.0 * f.v2 * g.v1 + 3.0 * f.v1 * g.v2 + f.v0 * g.v3,
        )
    }
}

/// Output value and its gradient with respect to every parameter, at one `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradient {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Spatial jets of each output component. Entries above `order` are still
/// filled in, but callers should treat them as unspecified.
pub fn jet_eval(net: &NetworkSpec, params: &[f64], x: f64, order: usize) -> Result<Vec<Jet3>> {
    assert!(order <= 3, "derivative order {order} > 3 is not supported");
    net.check_params(params)?;
    Ok(net.jets(params, x))
}

/// `∇θ û(θ, x)` for each output component.
pub fn param_gradient(net: &NetworkSpec, params: &[f64], x: f64) -> Result<Vec<ParamGradient>> {
    net.check_params(params)?;
    Ok(net.param_gradients(params, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fd_jet(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64, f64) {
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let d3 = (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h);
        (d1, d2, d3)
    }

    #[test]
    fn sin_of_scaled_variable() {
        let j = (Jet3::variable(0.0) * PI).sin();
        assert_eq!(j.v0, 0.0);
        assert!((j.v1 - PI).abs() < 1e-15);
        assert!(j.v2.abs() < 1e-15);
        assert!((j.v3 + PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn tanh_chain_matches_finite_differences() {
        let f = |x: f64| (0.7 * x * x - 0.3).tanh();
        let x = 0.41;
        let xj = Jet3::variable(x);
        let j = (xj * xj * 0.7 - Jet3::constant(0.3)).tanh();
        let (d1, d2, d3) = fd_jet(f, x, 1e-3);
        assert!((j.v0 - f(x)).abs() < 1e-15);
        assert!((j.v1 - d1).abs() < 1e-6);
        assert!((j.v2 - d2).abs() < 1e-5);
        assert!((j.v3 - d3).abs() < 1e-4);
    }

    #[test]
    fn product_rule_third_order() {
        // x^2 * sin(x): third derivative = -x^2 cos x - 6x sin x + 6 cos x
        let x = 1.3;
        let j = Jet3::variable(x) * Jet3::variable(x) * Jet3::variable(x).sin();
        let exact = -x * x * x.cos() - 6.0 * x * x.sin() + 6.0 * x.cos();
        assert!((j.v3 - exact).abs() < 1e-13);
    }

    #[test]
    fn cos_rule() {
        let x = -0.8;
        let j = Jet3::variable(x).cos();
        assert_eq!(j, Jet3::new(x.cos(), -x.sin(), -x.cos(), x.sin()));
    }
}
