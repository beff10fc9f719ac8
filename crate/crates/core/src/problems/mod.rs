//! Benchmark PDEs `∂t u = f(u)` on periodic 1-D domains.
//!
//! | problem | domain   | f                          | invariants            |
//! |---------|----------|----------------------------|-----------------------|
//! | burgers | [-1, 1)  | `-u u_x`                   | mass, energy          |
//! | kdv     | [0, 80)  | `-u u_x - u_xxx`           | mass, energy          |
//! | wave    | [-1, 1)  | `(-v_x, -ρ_x)`             | hamiltonian           |

pub mod spectral;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ad::Jet3;
use crate::error::{Error, Result};
use crate::invariants::InvariantSpec;

pub use spectral::{spectral_reference, ReferenceSolution, SpectralDifferentiator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Burgers,
    Kdv,
    Wave,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Burgers => "burgers",
            ProblemKind::Kdv => "kdv",
            ProblemKind::Wave => "wave",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "burgers" => Ok(ProblemKind::Burgers),
            "kdv" => Ok(ProblemKind::Kdv),
            "wave" => Ok(ProblemKind::Wave),
            _ => Err(Error::Config(format!("unknown problem `{s}`"))),
        }
    }
}

/// Where comparison data comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Analytic,
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub a: f64,
    pub b: f64,
    /// Gaussian width `B` of the Burgers initial bump.
    pub burgers_width: f64,
    /// Soliton amplitude `A`.
    pub kdv_amplitude: f64,
    /// Soliton centre `μ` at `t = 0`.
    pub kdv_offset: f64,
    pub invariants: Vec<InvariantSpec>,
}

impl ProblemSpec {
    pub fn burgers(width: f64) -> Self {
        Self {
            kind: ProblemKind::Burgers,
            a: -1.0,
            b: 1.0,
            burgers_width: width,
            kdv_amplitude: 2.0,
            kdv_offset: 20.0,
            invariants: vec![InvariantSpec::mass(), InvariantSpec::energy()],
        }
    }

    pub fn kdv(amplitude: f64, offset: f64) -> Self {
        Self {
            kind: ProblemKind::Kdv,
            a: 0.0,
            b: 80.0,
            burgers_width: 3.0,
            kdv_amplitude: amplitude,
            kdv_offset: offset,
            invariants: vec![InvariantSpec::mass(), InvariantSpec::energy()],
        }
    }

    pub fn wave() -> Self {
        Self {
            kind: ProblemKind::Wave,
            a: -1.0,
            b: 1.0,
            burgers_width: 3.0,
            kdv_amplitude: 2.0,
            kdv_offset: 20.0,
            invariants: vec![InvariantSpec::hamiltonian()],
        }
    }

    /// Defaults: `B = 3`, `A = 2`, `μ = 20`.
    pub fn from_kind(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Burgers => Self::burgers(3.0),
            ProblemKind::Kdv => Self::kdv(2.0, 20.0),
            ProblemKind::Wave => Self::wave(),
        }
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn output_dim(&self) -> usize {
        match self.kind {
            ProblemKind::Wave => 2,
            _ => 1,
        }
    }

    /// Highest spatial derivative `f` reads.
    pub fn max_order(&self) -> usize {
        match self.kind {
            ProblemKind::Kdv => 3,
            _ => 1,
        }
    }

    pub fn component_names(&self) -> &'static [&'static str] {
        match self.kind {
            ProblemKind::Wave => &["rho", "v"],
            _ => &["u"],
        }
    }

    pub fn reference_kind(&self) -> ReferenceKind {
        match self.kind {
            ProblemKind::Kdv => ReferenceKind::Analytic,
            _ => ReferenceKind::Spectral,
        }
    }

    pub fn invariant(&self, name: &str) -> Option<&InvariantSpec> {
        self.invariants.iter().find(|i| i.name == name)
    }

    /// `f` at one point from the jets of every component.
    pub fn rhs(&self, jets: &[Jet3], out: &mut [f64]) {
        match self.kind {
            ProblemKind::Burgers => out[0] = rhs_burgers(&jets[0]),
            ProblemKind::Kdv => out[0] = rhs_kdv(&jets[0]),
            ProblemKind::Wave => {
                let (r, v) = rhs_wave(&jets[0], &jets[1]);
                out[0] = r;
                out[1] = v;
            }
        }
    }

    pub fn initial_condition(&self, x: f64) -> Vec<f64> {
        match self.kind {
            ProblemKind::Burgers => {
                let bx = self.burgers_width * x;
                vec![1.0 + 0.3 * (-bx * bx).exp()]
            }
            ProblemKind::Kdv => vec![analytic_kdv(x, 0.0, self.kdv_amplitude, self.kdv_offset)],
            ProblemKind::Wave => vec![(-9.0 * x * x).exp(), 0.0],
        }
    }

    /// Closed-form solution, where one exists.
    pub fn analytic(&self, x: f64, t: f64) -> Option<Vec<f64>> {
        match self.kind {
            ProblemKind::Kdv => Some(vec![analytic_kdv(x, t, self.kdv_amplitude, self.kdv_offset)]),
            _ => None,
        }
    }
}

/// Inviscid Burgers, `u_t = -u u_x`.
pub fn rhs_burgers(u: &Jet3) -> f64 {
    -u.v0 * u.v1
}

/// KdV, `u_t = -u u_x - u_xxx`.
pub fn rhs_kdv(u: &Jet3) -> f64 {
    -u.v0 * u.v1 - u.v3
}

/// First-order acoustics, `(ρ_t, v_t) = (-v_x, -ρ_x)`.
pub fn rhs_wave(rho: &Jet3, v: &Jet3) -> (f64, f64) {
    (-v.v1, -rho.v1)
}

/// Single soliton `A sech²(√(3A)(x - ct - μ)/6)` with speed `c = A/3`.
pub fn analytic_kdv(x: f64, t: f64, amplitude: f64, offset: f64) -> f64 {
    let c = amplitude / 3.0;
    let s = 1.0 / ((3.0 * amplitude).sqrt() * (x - c * t - offset) / 6.0).cosh();
    amplitude * s * s
}
