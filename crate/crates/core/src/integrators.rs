//! Runge-Kutta targets with optional relaxation.
//!
//! A step builds the increment `d = Σ b_i f(y_i)` from the sampled network
//! field and forms `u + γ Δt d`. With relaxation on, `γ` is the root near 1 of
//! `I(u + γ Δt d) = I(u)`; for quadratic invariants it has a closed form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::invariants::{eval_invariant, InvariantKind, InvariantSpec};
use crate::problems::spectral::{spectral_rhs, SpectralDifferentiator};
use crate::problems::ProblemSpec;
use crate::quadrature::{pairwise_sum_by, QuadratureGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub name: String,
    /// Row-major `s × s`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: u32,
}

impl ButcherTableau {
    pub fn new(name: &str, a: Vec<Vec<f64>>, b: Vec<f64>, order: u32) -> Self {
        let c = a.iter().map(|row| row.iter().sum()).collect();
        Self { name: name.to_string(), a, b, c, order }
    }

    pub fn euler() -> Self {
        Self::new("euler", vec![vec![0.0]], vec![1.0], 1)
    }

    pub fn rk4() -> Self {
        Self::new(
            "rk4",
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            4,
        )
    }

    /// Only used to exercise the quadratic-invariant condition; it is implicit.
    pub fn implicit_midpoint() -> Self {
        Self::new("implicit-midpoint", vec![vec![0.5]], vec![1.0], 2)
    }

    /// Dormand-Prince 5(4), fifth-order weights. Used at fixed step for the
    /// spectral reference solutions.
    pub fn dormand_prince() -> Self {
        Self::new(
            "dopri5",
            vec![
                vec![0.0; 7],
                vec![1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                vec![3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                vec![44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0, 0.0],
                vec![19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0, 0.0],
                vec![9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0, 0.0],
                vec![35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0],
            ],
            vec![35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0],
            5,
        )
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Strictly lower-triangular `A`.
    pub fn is_explicit(&self) -> bool {
        self.a.iter().enumerate().all(|(i, row)| row[i..].iter().all(|&v| v == 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableauKind {
    Euler,
    Rk4,
}

impl TableauKind {
    pub fn tableau(self) -> ButcherTableau {
        match self {
            TableauKind::Euler => ButcherTableau::euler(),
            TableauKind::Rk4 => ButcherTableau::rk4(),
        }
    }
}

impl fmt::Display for TableauKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableauKind::Euler => "euler",
            TableauKind::Rk4 => "rk4",
        })
    }
}

impl FromStr for TableauKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(TableauKind::Euler),
            "rk4" => Ok(TableauKind::Rk4),
            _ => Err(Error::Config(format!("unknown tableau `{s}`"))),
        }
    }
}

/// `d = Σ b_i f(y_i)` with `y_i = u + Δt Σ_j a_ij f(y_j)`.
pub fn rk_increment<F>(tab: &ButcherTableau, rhs: F, u: &Field, dt: f64) -> Result<Field>
where
    F: FnMut(&Field) -> Result<Field>,
{
    stages(tab, None, rhs, u, dt)
}

/// As [`rk_increment`], with the first stage value `f(u)` already computed
/// (the driver evaluates it exactly through the network jets).
pub fn rk_increment_with_first_stage<F>(tab: &ButcherTableau, first: Field, rhs: F, u: &Field, dt: f64) -> Result<Field>
where
    F: FnMut(&Field) -> Result<Field>,
{
    stages(tab, Some(first), rhs, u, dt)
}

fn stages<F>(tab: &ButcherTableau, first: Option<Field>, mut rhs: F, u: &Field, dt: f64) -> Result<Field>
where
    F: FnMut(&Field) -> Result<Field>,
{
    if !tab.is_explicit() {
        return Err(Error::ImplicitTableau(tab.name.clone()));
    }
    let s = tab.stages();
    let mut k: Vec<Field> = Vec::with_capacity(s);
    let mut first = first;
    for i in 0..s {
        let ki = if i == 0 && first.is_some() {
            first.take().unwrap()
        } else {
            let mut y = u.clone();
            for (j, kj) in k.iter().enumerate() {
                let aij = tab.a[i][j];
                if aij != 0.0 {
                    y = y.add_scaled(dt * aij, kj);
                }
            }
            rhs(&y)?
        };
        k.push(ki);
    }
    let mut d = Field::zeros(u.n_points(), u.dim());
    for (bi, ki) in tab.b.iter().zip(&k) {
        if *bi != 0.0 {
            d = d.add_scaled(*bi, ki);
        }
    }
    Ok(d)
}

/// `max_{i,j} |b_i a_ij + b_j a_ji - b_i b_j|` and whether it vanishes (≤ 1e-14).
pub fn check_quadratic_condition(tab: &ButcherTableau) -> (bool, f64) {
    let s = tab.stages();
    let mut worst: f64 = 0.0;
    for i in 0..s {
        for j in 0..s {
            let v = tab.b[i] * tab.a[i][j] + tab.b[j] * tab.a[j][i] - tab.b[i] * tab.b[j];
            worst = worst.max(v.abs());
        }
    }
    (worst <= 1e-14, worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationResult {
    pub gamma: f64,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub bisection_iterations: usize,
    /// `I(u + γ Δt d) - I(u)`, evaluated directly.
    pub residual: f64,
    /// `⟨d, d⟩` vanished; `γ = 1` by convention.
    pub degenerate: bool,
}

const RELAX_MAX_DEVIATION: f64 = 0.1;
const NEWTON_CAP: usize = 30;
const BISECTION_CAP: usize = 60;

fn weighted_dot(grid: &QuadratureGrid, a: &Field, b: &Field) -> f64 {
    let (av, bv) = (a.values(), b.values());
    let dim = a.dim();
    grid.spacing() * pairwise_sum_by(grid.len(), &|i| (0..dim).map(|c| av[i * dim + c] * bv[i * dim + c]).sum::<f64>())
}

/// Solve `I(u + γ Δt d) = I(u)` for the relaxation factor `γ` near 1.
///
/// Quadratic invariants use the closed form `γ = -2⟨u,d⟩ / (Δt ⟨d,d⟩)`,
/// polished by Newton if the direct residual is above tolerance. Linear
/// invariants are rejected: their residual `γ Δt I(d)` has no root near 1.
pub fn relax_solve(inv: &InvariantSpec, grid: &QuadratureGrid, u: &Field, d: &Field, dt: f64) -> Result<RelaxationResult> {
    if inv.degree() < 2 {
        return Err(Error::LinearRelaxation(inv.name.clone()));
    }
    u.check_shape(grid.len(), u.dim())?;
    d.check_shape(grid.len(), u.dim())?;
    let dd = weighted_dot(grid, d, d);
    if dd <= 1e-30 {
        return Ok(RelaxationResult {
            gamma: 1.0,
            iterations: 0,
            newton_iterations: 0,
            bisection_iterations: 0,
            residual: 0.0,
            degenerate: true,
        });
    }
    let i0 = eval_invariant(inv, grid, u)?;
    let tol = 1e-13 * i0.abs().max(1.0);
    let residual = |g: f64| -> Result<f64> { Ok(eval_invariant(inv, grid, &u.add_scaled(g * dt, d))? - i0) };

    let mut result = match inv.kind {
        InvariantKind::Quadratic | InvariantKind::Hamiltonian => {
            let ud = weighted_dot(grid, u, d);
            let gamma = -2.0 * ud / (dt * dd);
            RelaxationResult {
                gamma,
                iterations: 1,
                newton_iterations: 0,
                bisection_iterations: 0,
                residual: residual(gamma)?,
                degenerate: false,
            }
        }
        InvariantKind::Mass => unreachable!("rejected above"),
    };
    if result.residual.abs() > tol {
        let polished = relax_newton(inv, grid, u, d, dt, result.gamma)?;
        result.newton_iterations = polished.newton_iterations;
        result.bisection_iterations = polished.bisection_iterations;
        result.iterations += polished.iterations;
        result.gamma = polished.gamma;
        result.residual = polished.residual;
    }
    if (result.gamma - 1.0).abs() > RELAX_MAX_DEVIATION + 1e-12 || !result.gamma.is_finite() {
        return Err(Error::RelaxationOutOfRange { gamma: result.gamma });
    }
    if result.residual.abs() > tol {
        return Err(Error::RelaxationFailed { residual: result.residual, iterations: result.iterations });
    }
    Ok(result)
}

/// General-`k` path: scalar Newton on `F(γ) = I(u + γ Δt d) - I(u)` from
/// `gamma0`, falling back to bisection on `[0.5, 1.5]`.
pub fn relax_newton(
    inv: &InvariantSpec,
    grid: &QuadratureGrid,
    u: &Field,
    d: &Field,
    dt: f64,
    gamma0: f64,
) -> Result<RelaxationResult> {
    let i0 = eval_invariant(inv, grid, u)?;
    let tol = 1e-13 * i0.abs().max(1.0);
    let dim = u.dim();
    let f = |g: f64| -> Result<f64> { Ok(eval_invariant(inv, grid, &u.add_scaled(g * dt, d))? - i0) };
    let fprime = |g: f64| -> f64 {
        let y = u.add_scaled(g * dt, d);
        let dv = d.values();
        dt * grid.spacing()
            * pairwise_sum_by(grid.len(), &|i| {
                let yi = y.at(i);
                (0..dim).map(|c| inv.slope(yi, c) * dv[i * dim + c]).sum::<f64>()
            })
    };

    let mut gamma = gamma0;
    let mut r = f(gamma)?;
    let mut newton = 0;
    while r.abs() > tol && newton < NEWTON_CAP {
        let slope = fprime(gamma);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        gamma -= r / slope;
        r = f(gamma)?;
        newton += 1;
    }
    if r.abs() <= tol && (gamma - 1.0).abs() <= 0.5 {
        return Ok(RelaxationResult {
            gamma,
            iterations: newton,
            newton_iterations: newton,
            bisection_iterations: 0,
            residual: r,
            degenerate: false,
        });
    }

    let (mut lo, mut hi) = (0.5, 1.5);
    let (mut flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::RelaxationFailed { residual: r, iterations: newton });
    }
    let mut bisect = 0;
    let mut best = (gamma, r);
    while bisect < BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        bisect += 1;
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm.abs() <= tol {
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(RelaxationResult {
        gamma: best.0,
        iterations: newton + bisect,
        newton_iterations: newton,
        bisection_iterations: bisect,
        residual: best.1,
        degenerate: false,
    })
}

/// A time-step target and the pieces it was built from.
#[derive(Debug, Clone)]
pub struct RelaxedTarget {
    /// `û_{θ_n}` on the sample grid.
    pub base: Field,
    /// RK increment `d`.
    pub increment: Field,
    /// `base + γ Δt d`.
    pub target: Field,
    pub gamma: f64,
    pub relaxation: Option<RelaxationResult>,
}

/// `f(û_θ)` on the grid through the exact network jets.
pub fn network_rhs<A: Ansatz + ?Sized>(model: &A, params: &[f64], grid: &QuadratureGrid, problem: &ProblemSpec) -> Field {
    let dim = problem.output_dim();
    let mut f = Field::zeros(grid.len(), dim);
    for (i, &x) in grid.points().iter().enumerate() {
        let jets = model.jets(params, x);
        problem.rhs(&jets, f.at_mut(i));
    }
    f
}

/// Build `u_target = û_{θ_n} + γ Δt d_n`.
///
/// The first RK stage is evaluated through the network jets; later stages act
/// on sampled fields and use Fourier differentiation on the (uniform,
/// periodic) sample grid. With `relaxation = None`, `γ = 1`.
pub fn build_relaxed_target<A: Ansatz + ?Sized>(
    model: &A,
    params: &[f64],
    grid: &QuadratureGrid,
    problem: &ProblemSpec,
    tab: &ButcherTableau,
    dt: f64,
    relaxation: Option<&InvariantSpec>,
) -> Result<RelaxedTarget> {
    model.check_params(params)?;
    if !(dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    let base = model.sample(params, grid);
    let first = network_rhs(model, params, grid, problem);
    let increment = if tab.stages() == 1 {
        rk_increment_with_first_stage(tab, first, |_| unreachable!(), &base, dt)?
    } else {
        let diff = SpectralDifferentiator::new(grid.len(), grid.length());
        rk_increment_with_first_stage(tab, first, |y| Ok(spectral_rhs(problem, &diff, y)), &base, dt)?
    };
    let (gamma, relaxation) = match relaxation {
        Some(inv) => {
            let r = relax_solve(inv, grid, &base, &increment, dt)?;
            (r.gamma, Some(r))
        }
        None => (1.0, None),
    };
    let target = base.add_scaled(gamma * dt, &increment);
    Ok(RelaxedTarget { base, increment, target, gamma, relaxation })
}
