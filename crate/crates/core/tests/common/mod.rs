//! Independent oracles shared by the property tests and the acceptance run.
#![allow(dead_code)]

use faer::Mat;
use rpteng::ansatz::Ansatz;
use rpteng::integrators::{relax_solve, rk_increment, ButcherTableau};
use rpteng::invariants::InvariantSpec;
use rpteng::problems::spectral::SpectralDifferentiator;
use rpteng::{Field, NetworkSpec, ProblemSpec, QuadratureGrid};

/// `‖ad - fd‖∞ / ‖ad‖∞` for `∇θ û` against central differences with step `h`.
pub fn param_gradient_deviation(spec: &NetworkSpec, theta: &[f64], x: f64, h: f64) -> f64 {
    let grads = spec.param_gradients(theta, x);
    let mut worst = 0.0_f64;
    for (c, g) in grads.iter().enumerate() {
        let scale = g.grad.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        let mut diff = 0.0_f64;
        let mut probe = theta.to_vec();
        for k in 0..theta.len() {
            probe[k] = theta[k] + h;
            let up = spec.eval(&probe, x)[c];
            probe[k] = theta[k] - h;
            let down = spec.eval(&probe, x)[c];
            probe[k] = theta[k];
            diff = diff.max(((up - down) / (2.0 * h) - g.grad[k]).abs());
        }
        worst = worst.max(diff / scale);
    }
    worst
}

/// Relative deviations of the first and third spatial jet entries from a
/// central difference (`h`) and the five-point stencil (`h3`, Richardson
/// extrapolated with `h3 / 2` so truncation is `O(h3⁴)`).
pub fn jet_deviation(spec: &NetworkSpec, theta: &[f64], x: f64, h: f64, h3: f64) -> (f64, f64) {
    let jets = spec.jets(theta, x);
    let f = |y: f64, c: usize| spec.eval(theta, y)[c];
    let stencil = |c: usize, s: f64| (f(x + 2.0 * s, c) - 2.0 * f(x + s, c) + 2.0 * f(x - s, c) - f(x - 2.0 * s, c)) / (2.0 * s.powi(3));
    let (mut d1, mut d3) = (0.0_f64, 0.0_f64);
    for (c, j) in jets.iter().enumerate() {
        let fd1 = (f(x + h, c) - f(x - h, c)) / (2.0 * h);
        let fd3 = (4.0 * stencil(c, 0.5 * h3) - stencil(c, h3)) / 3.0;
        d1 = d1.max((fd1 - j.v1).abs() / j.v1.abs().max(1.0));
        d3 = d3.max((fd3 - j.v3).abs() / j.v3.abs().max(1.0));
    }
    (d1, d3)
}

/// Root of `F(γ) = I(u + γ Δt d) - I(u)` on `[lo, hi]` by plain bisection,
/// for a quadratic density `Σ_c k_c u_c²`.
///
/// `F` is summed pointwise as `k (y - u)(y + u)`: subtracting two evaluated
/// invariants would leave rounding of size `ε I(u)` against a slope of only
/// `γ Δt² ⟨d, d⟩` at the root.
pub fn bisect_gamma(inv: &InvariantSpec, grid: &QuadratureGrid, u: &Field, d: &Field, dt: f64, lo: f64, hi: f64) -> f64 {
    let dim = u.dim();
    let k: Vec<f64> = (0..dim)
        .map(|c| {
            let mut e = vec![0.0; dim];
            e[c] = 1.0;
            inv.density(&e)
        })
        .collect();
    let w = grid.weights();
    let f = |g: f64| -> f64 {
        (0..grid.len())
            .map(|i| {
                let (ui, di) = (u.at(i), d.at(i));
                w[i] * (0..dim).map(|c| k[c] * (g * dt * di[c]) * (2.0 * ui[c] + g * dt * di[c])).sum::<f64>()
            })
            .sum()
    };
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    assert!(fa * f(b) < 0.0, "bracket [{lo}, {hi}] does not straddle a root");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Fields `u`, `d` on `grid` whose quadratic relaxation root is `gamma`.
pub fn relaxation_case(grid: &QuadratureGrid, coeffs: &[f64], gamma: f64, dt: f64) -> (Field, Field) {
    let l = grid.length();
    let xs = grid.points();
    let wave = |k: usize, x: f64| (2.0 * std::f64::consts::PI * (k as f64) * (x - grid.a()) / l).cos();
    let d: Vec<f64> = xs.iter().map(|&x| coeffs.iter().enumerate().map(|(k, c)| c * wave(k + 1, x)).sum()).collect();
    let perp: Vec<f64> = xs.iter().map(|&x| 1.0 + 0.5 * wave(coeffs.len() + 2, x)).collect();
    let d = Field::from_values(1, d);
    let dd: f64 = grid.spacing() * d.values().iter().map(|v| v * v).sum::<f64>();
    // ⟨u, d⟩ = -γ Δt ⟨d, d⟩ / 2 makes γ the non-zero root
    let alpha = -gamma * dt / 2.0;
    let perp_d: f64 = grid.spacing() * perp.iter().zip(d.values()).map(|(a, b)| a * b).sum::<f64>();
    let beta = alpha - perp_d / dd;
    let u = Field::from_values(1, perp.iter().zip(d.values()).map(|(p, dv)| p + beta * dv).collect());
    (u, d)
}

/// `|γ_solver - γ_bisection|` for one constructed case.
pub fn relaxation_vs_bisection(grid: &QuadratureGrid, coeffs: &[f64], gamma: f64, dt: f64) -> f64 {
    let (u, d) = relaxation_case(grid, coeffs, gamma, dt);
    let inv = InvariantSpec::energy();
    let solved = relax_solve(&inv, grid, &u, &d, dt).unwrap().gamma;
    let oracle = bisect_gamma(&inv, grid, &u, &d, dt, gamma - 0.05, gamma + 0.05);
    (solved - oracle).abs()
}

/// Least squares by modified Gram-Schmidt QR and back substitution; `j` must
/// have full column rank.
pub fn qr_lstsq(j: &Mat<f64>, r: &[f64]) -> Vec<f64> {
    let (m, n) = (j.nrows(), j.ncols());
    let mut q: Vec<Vec<f64>> = (0..n).map(|c| (0..m).map(|i| j[(i, c)]).collect()).collect();
    let mut rr = vec![vec![0.0; n]; n];
    for c in 0..n {
        for _ in 0..2 {
            for p in 0..c {
                let proj: f64 = q[p].iter().zip(&q[c]).map(|(a, b)| a * b).sum();
                rr[p][c] += proj;
                let qp = q[p].clone();
                q[c].iter_mut().zip(&qp).for_each(|(v, w)| *v -= proj * w);
            }
        }
        let norm = q[c].iter().map(|v| v * v).sum::<f64>().sqrt();
        rr[c][c] = norm;
        q[c].iter_mut().for_each(|v| *v /= norm);
    }
    let qtr: Vec<f64> = (0..n).map(|c| q[c].iter().zip(r).map(|(a, b)| a * b).sum()).collect();
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| rr[c][k] * x[k]).sum();
        x[c] = (qtr[c] - s) / rr[c][c];
    }
    x
}

pub fn residual_norm(j: &Mat<f64>, x: &[f64], r: &[f64]) -> f64 {
    (0..j.nrows())
        .map(|i| {
            let v: f64 = (0..j.ncols()).map(|c| j[(i, c)] * x[c]).sum::<f64>() - r[i];
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Each pairwise estimate `log2(e_k / e_{k+1})` must reach 4 to one decimal.
pub const MIN_OBSERVED_ORDER: f64 = 3.95;

/// Skew-symmetric Fourier semi-discretization of KdV,
/// `u_t = -(u u_x + (u²)_x) / 3 - u_xxx`, which conserves `Σ u_i²` exactly.
pub fn kdv_skew_rhs(diff: &SpectralDifferentiator, y: &Field) -> Field {
    let u = y.values();
    let ux = diff.derivative(u, 1);
    let u2: Vec<f64> = u.iter().map(|v| v * v).collect();
    let u2x = diff.derivative(&u2, 1);
    let u3 = diff.derivative(u, 3);
    Field::from_values(1, (0..u.len()).map(|i| -(u[i] * ux[i] + u2x[i]) / 3.0 - u3[i]).collect())
}

fn kdv_start(problem: &ProblemSpec, n: usize) -> (QuadratureGrid, SpectralDifferentiator, Field) {
    let grid = QuadratureGrid::new(problem.a, problem.b, n).unwrap();
    let diff = SpectralDifferentiator::new(n, grid.length());
    let u = Field::from_values(1, grid.points().iter().map(|&x| problem.initial_condition(x)[0]).collect());
    (grid, diff, u)
}

/// RK4 with energy relaxation (time advances by `γΔt`) on the skew-symmetric
/// KdV semi-discretization until `t ≥ t_end - Δt/2`. Returns the final time
/// and state.
pub fn relaxed_rk4_kdv(problem: &ProblemSpec, n: usize, dt: f64, t_end: f64) -> (f64, Field) {
    let (grid, diff, mut u) = kdv_start(problem, n);
    let tab = ButcherTableau::rk4();
    let inv = InvariantSpec::energy();
    let mut t = 0.0;
    while t < t_end - 0.5 * dt {
        let d = rk_increment(&tab, |y| Ok(kdv_skew_rhs(&diff, y)), &u, dt).unwrap();
        let gamma = relax_solve(&inv, &grid, &u, &d, dt).unwrap().gamma;
        u = u.add_scaled(gamma * dt, &d);
        t += gamma * dt;
    }
    (t, u)
}

/// Fine Dormand-Prince solution of the same semi-discretization at exactly `t`.
pub fn dopri_kdv(problem: &ProblemSpec, n: usize, t: f64, dt: f64) -> Field {
    let (_, diff, mut u) = kdv_start(problem, n);
    let tab = ButcherTableau::dormand_prince();
    let steps = (t / dt).ceil() as usize;
    let h = t / steps as f64;
    for _ in 0..steps {
        let d = rk_increment(&tab, |y| Ok(kdv_skew_rhs(&diff, y)), &u, h).unwrap();
        u = u.add_scaled(h, &d);
    }
    u
}

/// Relative L² errors of relaxed RK4 on spectral KdV over `[0, t_end]` for each
/// step in `dts`, and the observed orders between consecutive halvings.
pub fn relaxed_rk4_orders(n: usize, dts: &[f64], t_end: f64) -> (Vec<f64>, Vec<f64>) {
    let problem = ProblemSpec::from_kind(rpteng::ProblemKind::Kdv);
    let errors: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let (t, u) = relaxed_rk4_kdv(&problem, n, dt, t_end);
            let reference = dopri_kdv(&problem, n, t, 2.5e-5);
            norm(u.sub(&reference).values()) / norm(reference.values())
        })
        .collect();
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    (errors, orders)
}
