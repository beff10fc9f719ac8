//! Periodic-embedding MLP ansatz.
//!
//! The input `x` is mapped to `(sin(2πx/L), cos(2πx/L))`, so every network is
//! exactly `L`-periodic. Hidden layers are dense with a shared activation; the
//! output layer is affine.
//!
//! Parameter layout (fixed): layers in order from input to output; within a
//! layer, the weight matrix `out × in` in row-major order, followed by the
//! `out` biases.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ad::{Jet3, ParamGradient};
use crate::ansatz::Ansatz;
use crate::error::{Error, Result};

const EMBED_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sin,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sin => z.sin(),
            Activation::Identity => z,
        }
    }

    /// Value and first derivative.
    #[inline]
    pub fn value_and_slope(self, z: f64) -> (f64, f64) {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                (t, 1.0 - t * t)
            }
            Activation::Sin => z.sin_cos(),
            Activation::Identity => (z, 1.0),
        }
    }

    #[inline]
    pub fn jet(self, z: Jet3) -> Jet3 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sin => z.sin(),
            Activation::Identity => z,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "tanh",
            Activation::Sin => "sin",
            Activation::Identity => "identity",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "sin" => Ok(Activation::Sin),
            "identity" => Ok(Activation::Identity),
            _ => Err(Error::Config(format!("unknown activation `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    domain_length: f64,
    hidden_widths: Vec<usize>,
    activation: Activation,
    output_dim: usize,
    /// `[2, w_1, ..., w_k, output_dim]`
    dims: Vec<usize>,
    /// Start of each layer's block in the flat parameter vector.
    offsets: Vec<usize>,
    n_params: usize,
}

impl NetworkSpec {
    pub fn new(domain_length: f64, hidden_widths: Vec<usize>, activation: Activation, output_dim: usize) -> Result<Self> {
        if !(domain_length > 0.0) || !domain_length.is_finite() {
            return Err(Error::Config(format!("domain length must be positive, got {domain_length}")));
        }
        if hidden_widths.contains(&0) {
            return Err(Error::Config("hidden layer widths must be positive".into()));
        }
        if !(1..=2).contains(&output_dim) {
            return Err(Error::Config(format!("output_dim must be 1 or 2, got {output_dim}")));
        }
        let mut dims = vec![EMBED_DIM];
        dims.extend_from_slice(&hidden_widths);
        dims.push(output_dim);
        let mut offsets = Vec::with_capacity(dims.len() - 1);
        let mut n_params = 0;
        for w in dims.windows(2) {
            offsets.push(n_params);
            n_params += (w[0] + 1) * w[1];
        }
        Ok(Self { domain_length, hidden_widths, activation, output_dim, dims, offsets, n_params })
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn hidden_widths(&self) -> &[usize] {
        &self.hidden_widths
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn n_layers(&self) -> usize {
        self.dims.len() - 1
    }

    /// `(weights, biases)` ranges of layer `l` in the flat vector.
    pub fn layer_ranges(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let (inp, out) = (self.dims[l], self.dims[l + 1]);
        let w0 = self.offsets[l];
        (w0..w0 + inp * out, w0 + inp * out..w0 + (inp + 1) * out)
    }

    /// Canonical one-line description; hashed into snapshot headers.
    pub fn describe(&self) -> String {
        let widths: Vec<String> = self.hidden_widths.iter().map(|w| w.to_string()).collect();
        format!(
            "embedding=periodic-sincos;L={:?};hidden=[{}];activation={};output_dim={}",
            self.domain_length,
            widths.join(","),
            self.activation,
            self.output_dim
        )
    }

    pub fn spec_hash(&self) -> String {
        let digest = Sha256::digest(self.describe().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    fn embed_jets(&self, x: f64) -> [Jet3; 2] {
        let xj = Jet3::variable(x) * (2.0 * PI / self.domain_length);
        [xj.sin(), xj.cos()]
    }
}

/// `(sin(2πx/L), cos(2πx/L))`.
pub fn embed(spec: &NetworkSpec, x: f64) -> (f64, f64) {
    (2.0 * PI * x / spec.domain_length).sin_cos()
}

/// `û(θ, x)`.
pub fn forward(spec: &NetworkSpec, params: &[f64], x: f64) -> Result<Vec<f64>> {
    spec.check_params(params)?;
    Ok(spec.eval(params, x))
}

/// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
pub fn init_params(spec: &NetworkSpec, seed: u64) -> FlatParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; spec.n_params];
    for l in 0..spec.n_layers() {
        let (inp, out) = (spec.dims[l], spec.dims[l + 1]);
        let limit = (6.0 / (inp + out) as f64).sqrt();
        let (w, _) = spec.layer_ranges(l);
        for v in &mut values[w] {
            *v = rng.gen_range(-limit..limit);
        }
    }
    FlatParams(values)
}

impl Ansatz for NetworkSpec {
    fn n_params(&self) -> usize {
        self.n_params
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn eval_into(&self, params: &[f64], x: f64, out: &mut [f64]) {
        let (s, c) = embed(self, x);
        let mut act = vec![s, c];
        let last = self.n_layers() - 1;
        for l in 0..=last {
            let (inp, n_out) = (self.dims[l], self.dims[l + 1]);
            let (wr, br) = self.layer_ranges(l);
            let (w, b) = (&params[wr], &params[br]);
            let next: Vec<f64> = (0..n_out)
                .map(|j| {
                    let z = b[j] + w[j * inp..(j + 1) * inp].iter().zip(&act).map(|(wi, ai)| wi * ai).sum::<f64>();
                    if l == last { z } else { self.activation.apply(z) }
                })
                .collect();
            act = next;
        }
        out.copy_from_slice(&act);
    }

    fn jets(&self, params: &[f64], x: f64) -> Vec<Jet3> {
        let mut act: Vec<Jet3> = self.embed_jets(x).to_vec();
        let last = self.n_layers() - 1;
        for l in 0..=last {
            let (inp, n_out) = (self.dims[l], self.dims[l + 1]);
            let (wr, br) = self.layer_ranges(l);
            let (w, b) = (&params[wr], &params[br]);
            act = (0..n_out)
                .map(|j| {
                    let mut z = Jet3::constant(b[j]);
                    for (wi, ai) in w[j * inp..(j + 1) * inp].iter().zip(&act) {
                        z.add_scaled(*wi, ai);
                    }
                    if l == last { z } else { self.activation.jet(z) }
                })
                .collect();
        }
        act
    }

    fn param_gradients(&self, params: &[f64], x: f64) -> Vec<ParamGradient> {
        let n_layers = self.n_layers();
        let last = n_layers - 1;
        // inputs[l] is the input vector of layer l; slopes[l] = σ'(z) of hidden layer l.
        let (s, c) = embed(self, x);
        let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
        let mut slopes: Vec<Vec<f64>> = Vec::with_capacity(last);
        inputs.push(vec![s, c]);
        let mut output = Vec::new();
        for l in 0..=last {
            let (inp, n_out) = (self.dims[l], self.dims[l + 1]);
            let (wr, br) = self.layer_ranges(l);
            let (w, b) = (&params[wr], &params[br]);
            let a = &inputs[l];
            let z: Vec<f64> = (0..n_out)
                .map(|j| b[j] + w[j * inp..(j + 1) * inp].iter().zip(a).map(|(wi, ai)| wi * ai).sum::<f64>())
                .collect();
            if l == last {
                output = z;
            } else {
                let (vals, ds): (Vec<f64>, Vec<f64>) = z.iter().map(|&zj| self.activation.value_and_slope(zj)).unzip();
                slopes.push(ds);
                inputs.push(vals);
            }
        }

        (0..self.output_dim)
            .map(|o| {
                let mut grad = vec![0.0; self.n_params];
                let mut delta = vec![0.0; self.output_dim];
                delta[o] = 1.0;
                for l in (0..=last).rev() {
                    let (inp, n_out) = (self.dims[l], self.dims[l + 1]);
                    let (wr, br) = self.layer_ranges(l);
                    let a = &inputs[l];
                    {
                        let gw = &mut grad[wr.clone()];
                        for j in 0..n_out {
                            if delta[j] != 0.0 {
                                for (g, ai) in gw[j * inp..(j + 1) * inp].iter_mut().zip(a) {
                                    *g = delta[j] * ai;
                                }
                            }
                        }
                    }
                    grad[br].copy_from_slice(&delta);
                    if l > 0 {
                        let w = &params[wr];
                        let sl = &slopes[l - 1];
                        delta = (0..inp)
                            .map(|i| sl[i] * (0..n_out).map(|j| w[j * inp + i] * delta[j]).sum::<f64>())
                            .collect();
                    }
                }
                ParamGradient { value: output[o], grad }
            })
            .collect()
    }
}

/// Flat network parameter vector `θ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatParams(pub Vec<f64>);

impl FlatParams {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Split into per-layer `(weights, biases)` copies.
    pub fn unflatten(&self, spec: &NetworkSpec) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        spec.check_params(&self.0)?;
        Ok((0..spec.n_layers())
            .map(|l| {
                let (w, b) = spec.layer_ranges(l);
                (self.0[w].to_vec(), self.0[b].to_vec())
            })
            .collect())
    }

    pub fn flatten(layers: &[(Vec<f64>, Vec<f64>)]) -> Self {
        FlatParams(layers.iter().flat_map(|(w, b)| w.iter().chain(b).copied()).collect())
    }
}

impl From<Vec<f64>> for FlatParams {
    fn from(v: Vec<f64>) -> Self {
        FlatParams(v)
    }
}

const SNAPSHOT_MAGIC: &str = "# rpteng-params v1";

/// Write a parameter snapshot:
///
/// ```text
/// # rpteng-params v1
/// spec <describe() string>
/// spec_hash <16 hex digits>
/// n_params <n>
/// <one value per line, shortest round-trip decimal>
/// ```
pub fn write_params(w: &mut impl Write, spec: &NetworkSpec, params: &FlatParams) -> Result<()> {
    spec.check_params(params.as_slice())?;
    writeln!(w, "{SNAPSHOT_MAGIC}")?;
    writeln!(w, "spec {}", spec.describe())?;
    writeln!(w, "spec_hash {}", spec.spec_hash())?;
    writeln!(w, "n_params {}", params.len())?;
    for v in params.as_slice() {
        writeln!(w, "{v:?}")?;
    }
    Ok(())
}

/// Read a snapshot written by [`write_params`], checking it against `spec`.
pub fn read_params(r: impl BufRead, spec: &NetworkSpec) -> Result<FlatParams> {
    let mut lines = r.lines();
    let mut next = |what: &str| -> Result<String> {
        lines.next().transpose()?.ok_or_else(|| Error::Snapshot(format!("missing {what}")))
    };
    if next("magic")?.trim() != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("bad magic line".into()));
    }
    let _describe = next("spec line")?;
    let hash = next("spec_hash")?;
    let hash = hash.strip_prefix("spec_hash ").ok_or_else(|| Error::Snapshot("bad spec_hash line".into()))?;
    if hash.trim() != spec.spec_hash() {
        return Err(Error::Snapshot(format!("spec hash {hash} does not match network {}", spec.spec_hash())));
    }
    let n = next("n_params")?;
    let n: usize = n
        .strip_prefix("n_params ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Snapshot("bad n_params line".into()))?;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let line = next(&format!("value {i}"))?;
        values.push(line.trim().parse().map_err(|_| Error::Snapshot(format!("bad value on line {}", i + 5)))?);
    }
    spec.check_params(&values)?;
    Ok(FlatParams(values))
}
