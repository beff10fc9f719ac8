//! Fourier collocation on uniform periodic grids.
//!
//! Used twice: for the later Runge-Kutta stages of a network time step (which
//! act on sampled fields rather than on the network), and for the reference
//! solutions (Fourier in space, fixed-step Dormand-Prince in time).

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{ProblemKind, ProblemSpec};
use crate::ad::Jet3;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::integrators::{rk_increment, ButcherTableau};
use crate::quadrature::QuadratureGrid;

const BLOW_UP: f64 = 1e6;

pub struct SpectralDifferentiator {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Signed angular wavenumber of each FFT bin.
    wavenumbers: Vec<f64>,
    /// Bins kept by the 2/3 rule, when dealiasing.
    keep: Option<Vec<bool>>,
}

impl SpectralDifferentiator {
    pub fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let k0 = 2.0 * PI / length;
        let wavenumbers = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                k0 * m
            })
            .collect();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            wavenumbers,
            keep: None,
        }
    }

    /// Zero every mode with `|m| > n/3` before and after nonlinear products.
    pub fn with_dealiasing(mut self) -> Self {
        let cutoff = self.n / 3;
        self.keep = Some(
            (0..self.n)
                .map(|j| {
                    let m = if j <= self.n / 2 { j } else { self.n - j };
                    m <= cutoff
                })
                .collect(),
        );
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn spectrum(&self, values: &[f64]) -> Vec<Complex<f64>> {
        assert_eq!(values.len(), self.n);
        let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    fn synthesize(&self, mut spec: Vec<Complex<f64>>) -> Vec<f64> {
        self.inverse.process(&mut spec);
        let scale = 1.0 / self.n as f64;
        spec.iter().map(|c| c.re * scale).collect()
    }

    /// Multiply a spectrum by `(ik)^order`. The Nyquist bin of an even grid
    /// is dropped for odd orders, where it has no real-valued derivative.
    fn differentiate(&self, spec: &[Complex<f64>], order: u32) -> Vec<Complex<f64>> {
        let nyquist = if self.n % 2 == 0 { Some(self.n / 2) } else { None };
        spec.iter()
            .zip(&self.wavenumbers)
            .enumerate()
            .map(|(j, (c, &k))| {
                if order % 2 == 1 && Some(j) == nyquist {
                    return Complex::new(0.0, 0.0);
                }
                let factor = Complex::new(0.0, k).powu(order);
                c * factor
            })
            .collect()
    }

    fn mask(&self, spec: &mut [Complex<f64>]) {
        if let Some(keep) = &self.keep {
            for (c, &k) in spec.iter_mut().zip(keep) {
                if !k {
                    *c = Complex::new(0.0, 0.0);
                }
            }
        }
    }

    pub fn derivative(&self, values: &[f64], order: u32) -> Vec<f64> {
        let spec = self.spectrum(values);
        self.synthesize(self.differentiate(&spec, order))
    }

    /// Projection onto the modes kept by the dealiasing mask (identity without one).
    pub fn filter(&self, values: &[f64]) -> Vec<f64> {
        if self.keep.is_none() {
            return values.to_vec();
        }
        let mut spec = self.spectrum(values);
        self.mask(&mut spec);
        self.synthesize(spec)
    }

    /// Orders 0..=3 at every grid point. The value slot is the input itself.
    pub fn jets(&self, values: &[f64]) -> Vec<Jet3> {
        let spec = self.spectrum(values);
        let d1 = self.synthesize(self.differentiate(&spec, 1));
        let d2 = self.synthesize(self.differentiate(&spec, 2));
        let d3 = self.synthesize(self.differentiate(&spec, 3));
        (0..self.n).map(|i| Jet3::new(values[i], d1[i], d2[i], d3[i])).collect()
    }
}

/// `f(u)` on a sampled field, derivatives by Fourier collocation.
pub fn spectral_rhs(problem: &ProblemSpec, diff: &SpectralDifferentiator, field: &Field) -> Field {
    let dim = field.dim();
    let jets: Vec<Vec<Jet3>> = (0..dim).map(|c| diff.jets(&field.component(c))).collect();
    let mut out = Field::zeros(field.n_points(), dim);
    let mut point = vec![Jet3::ZERO; dim];
    for i in 0..field.n_points() {
        for c in 0..dim {
            point[c] = jets[c][i];
        }
        problem.rhs(&point, out.at_mut(i));
    }
    out
}

/// Conservative-form right-hand side used by the reference solver; the
/// quadratic flux `u²/2` is dealiased when `diff` carries a mask.
fn reference_rhs(problem: &ProblemSpec, diff: &SpectralDifferentiator, field: &Field) -> Field {
    match problem.kind {
        ProblemKind::Burgers | ProblemKind::Kdv => {
            let u = diff.filter(field.values());
            let flux: Vec<f64> = u.iter().map(|v| 0.5 * v * v).collect();
            let flux = diff.filter(&flux);
            let dflux = diff.derivative(&flux, 1);
            let values = if problem.kind == ProblemKind::Kdv {
                let u3 = diff.derivative(&u, 3);
                dflux.iter().zip(&u3).map(|(a, b)| -a - b).collect()
            } else {
                dflux.iter().map(|a| -a).collect()
            };
            Field::from_values(1, values)
        }
        ProblemKind::Wave => {
            let rho_x = diff.derivative(&field.component(0), 1);
            let v_x = diff.derivative(&field.component(1), 1);
            Field::from_components(&[v_x.iter().map(|v| -v).collect(), rho_x.iter().map(|v| -v).collect()])
        }
    }
}

/// Grid solution at a list of output times.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub grid: QuadratureGrid,
    pub components: Vec<String>,
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
}

/// Fourier collocation in space, fixed-step Dormand-Prince in time.
///
/// Burgers and KdV dealias the quadratic term with the 2/3 rule. Snapshots are
/// stored at `t = 0`, every `output_every` steps, and at the final step; the
/// last step is shortened to land on `t_end`.
pub fn spectral_reference(
    problem: &ProblemSpec,
    n_grid: usize,
    dt: f64,
    t_end: f64,
    output_every: usize,
) -> Result<ReferenceSolution> {
    if !(dt > 0.0) || !(t_end >= 0.0) || output_every == 0 {
        return Err(Error::Config(format!("bad reference settings dt={dt} t_end={t_end} every={output_every}")));
    }
    let grid = QuadratureGrid::new(problem.a, problem.b, n_grid)?;
    let mut diff = SpectralDifferentiator::new(n_grid, grid.length());
    if problem.kind != ProblemKind::Wave {
        diff = diff.with_dealiasing();
    }
    let dim = problem.output_dim();
    let mut u = Field::zeros(n_grid, dim);
    for (i, &x) in grid.points().iter().enumerate() {
        u.at_mut(i).copy_from_slice(&problem.initial_condition(x));
    }
    let tab = ButcherTableau::dormand_prince();
    let n_steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut times = vec![0.0];
    let mut snapshots = vec![u.clone()];
    let mut t = 0.0;
    for step in 1..=n_steps {
        let h = if step == n_steps { t_end - (n_steps - 1) as f64 * dt } else { dt };
        let d = rk_increment(&tab, |y| Ok(reference_rhs(problem, &diff, y)), &u, h)?;
        u = u.add_scaled(h, &d);
        t = if step == n_steps { t_end } else { step as f64 * dt };
        if !u.values().iter().all(|v| v.is_finite() && v.abs() <= BLOW_UP) {
            return Err(Error::ReferenceDiverged { t });
        }
        if step % output_every == 0 || step == n_steps {
            times.push(t);
            snapshots.push(u.clone());
        }
    }
    debug_assert!(n_steps == 0 || (t - t_end).abs() < 1e-12);
    Ok(ReferenceSolution {
        grid,
        components: problem.component_names().iter().map(|s| s.to_string()).collect(),
        times,
        snapshots,
    })
}

impl ReferenceSolution {
    /// Index of the snapshot closest to `t` and the gap `|t_snap - t|`.
    pub fn nearest(&self, t: f64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (k, &ts) in self.times.iter().enumerate() {
            let gap = (ts - t).abs();
            if gap < best.1 {
                best = (k, gap);
            }
        }
        best
    }

    /// Trigonometric interpolation of snapshot `k` at arbitrary points.
    pub fn interpolate(&self, k: usize, xs: &[f64]) -> Field {
        let snap = &self.snapshots[k];
        if xs == self.grid.points() {
            return snap.clone();
        }
        let n = self.grid.len();
        let diff = SpectralDifferentiator::new(n, self.grid.length());
        let dim = snap.dim();
        let coeffs: Vec<Vec<Complex<f64>>> = (0..dim)
            .map(|c| diff.spectrum(&snap.component(c)).into_iter().map(|z| z / n as f64).collect())
            .collect();
        let half = n / 2;
        let mut out = Field::zeros(xs.len(), dim);
        for (i, &x) in xs.iter().enumerate() {
            let theta = 2.0 * PI * (x - self.grid.a()) / self.grid.length();
            for c in 0..dim {
                let cf = &coeffs[c];
                let mut v = cf[0].re;
                let top = if n % 2 == 0 { half } else { half + 1 };
                for (m, cm) in cf.iter().enumerate().take(top).skip(1) {
                    let (s, co) = (m as f64 * theta).sin_cos();
                    v += 2.0 * (cm.re * co - cm.im * s);
                }
                if n % 2 == 0 {
                    v += cf[half].re * (half as f64 * theta).cos();
                }
                out.at_mut(i)[c] = v;
            }
        }
        out
    }

    /// CSV with header `t,x,<component...>`, one row per (time, grid point).
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string(), "x".to_string()];
        header.extend(self.components.iter().cloned());
        wtr.write_record(&header)?;
        for (t, snap) in self.times.iter().zip(&self.snapshots) {
            for (i, x) in self.grid.points().iter().enumerate() {
                let mut row = vec![format!("{t:?}"), format!("{x:?}")];
                row.extend(snap.at(i).iter().map(|v| format!("{v:?}")));
                wtr.write_record(&row)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Inverse of [`ReferenceSolution::write_csv`]. The grid is rebuilt from
    /// the first snapshot's `x` column, which must be uniform.
    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.len() < 3 || &header[0] != "t" || &header[1] != "x" {
            return Err(Error::Config("reference CSV must start with columns t,x".into()));
        }
        let components: Vec<String> = header.iter().skip(2).map(String::from).collect();
        let dim = components.len();
        let mut times: Vec<f64> = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut xs: Vec<f64> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number `{s}`")));
            let t = parse(&rec[0])?;
            let x = parse(&rec[1])?;
            if times.last() != Some(&t) {
                times.push(t);
                rows.push(Vec::new());
            }
            if times.len() == 1 {
                xs.push(x);
            }
            for c in 0..dim {
                rows.last_mut().unwrap().push(parse(&rec[2 + c])?);
            }
        }
        let n = xs.len();
        if n < 2 {
            return Err(Error::Config("reference CSV has fewer than two grid points".into()));
        }
        let h = xs[1] - xs[0];
        let grid = QuadratureGrid::new(xs[0], xs[0] + h * n as f64, n)?;
        let snapshots = rows
            .into_iter()
            .map(|v| {
                if v.len() != n * dim {
                    Err(Error::LengthMismatch { expected: n * dim, actual: v.len() })
                } else {
                    Ok(Field::from_values(dim, v))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, components, times, snapshots })
    }
}
