use crate::error::{check_len, Result};

/// Samples of a (possibly vector-valued) field on a grid.
///
/// Storage is point-major: component `c` at point `i` lives at
/// `values[i * dim + c]`. This is also the row order of the least-squares
/// systems built from a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    dim: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(n_points: usize, dim: usize) -> Self {
        assert!(dim > 0);
        Self { dim, values: vec![0.0; n_points * dim] }
    }

    pub fn from_values(dim: usize, values: Vec<f64>) -> Self {
        assert!(dim > 0 && values.len() % dim == 0, "values do not split into {dim} components");
        Self { dim, values }
    }

    /// Build from per-component sample vectors of equal length.
    pub fn from_components(components: &[Vec<f64>]) -> Self {
        let dim = components.len();
        let n = components[0].len();
        assert!(components.iter().all(|c| c.len() == n));
        let mut values = Vec::with_capacity(n * dim);
        for i in 0..n {
            values.extend(components.iter().map(|c| c[i]));
        }
        Self { dim, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn at_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.dim).copied().collect()
    }

    pub fn check_shape(&self, n_points: usize, dim: usize) -> Result<()> {
        check_len(dim, self.dim)?;
        check_len(n_points * dim, self.values.len())
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &Field) -> Field {
        assert_eq!(self.values.len(), other.values.len());
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Field { dim: self.dim, values }
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.add_scaled(-1.0, other)
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field { dim: self.dim, values: self.values.iter().map(|v| s * v).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
