//! Uncertain parameter spaces and the sample designs drawn from them.

mod directions;
mod saltelli;
mod sampling;
mod sobol_seq;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use saltelli::{
    flatten_for_evaluation, saltelli_design, saltelli_design_with, BaseSampler, MatrixId, SaltelliDesign,
};
pub use sampling::{lhs_sample, monte_carlo_sample, sobol_sample};
pub use sobol_seq::{ScrambledSobol, SOBOL_MAX_DIMS};

/// Marginal distribution of a parameter. Only uniform ranges are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    #[default]
    Uniform,
}

/// A named scalar input with a closed range `[lower, upper]` in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub nominal: f64,
    #[serde(default)]
    pub distribution: Distribution,
}

impl ParameterDef {
    pub fn uniform(name: &str, lower: f64, upper: f64, nominal: f64) -> Result<Self> {
        let def = Self {
            name: name.to_string(),
            lower,
            upper,
            nominal,
            distribution: Distribution::Uniform,
        };
        def.validate()?;
        Ok(def)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason| {
            Err(Error::InvalidParameter {
                name: self.name.clone(),
                reason,
            })
        };
        if self.name.trim().is_empty() {
            return fail("empty name");
        }
        if !(self.lower.is_finite() && self.upper.is_finite() && self.nominal.is_finite()) {
            return fail("bounds must be finite");
        }
        if self.lower >= self.upper {
            return fail("lower bound must be below upper bound");
        }
        if self.nominal < self.lower || self.nominal > self.upper {
            return fail("nominal value outside [lower, upper]");
        }
        Ok(())
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Maps a unit-interval coordinate onto the parameter range, clamped to the closed bounds.
    #[inline]
    pub fn from_unit(&self, u: f64) -> f64 {
        (self.lower + u * self.width()).clamp(self.lower, self.upper)
    }

    #[inline]
    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.lower) / self.width()
    }
}

/// Ordered set of uncertain parameters. Column `i` of every sample matrix is parameter `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ParameterDef>", into = "Vec<ParameterDef>")]
pub struct ParameterSpace {
    params: Vec<ParameterDef>,
}

impl ParameterSpace {
    pub fn new(params: Vec<ParameterDef>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (i, p) in params.iter().enumerate() {
            p.validate()?;
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::DuplicateParameter(p.name.clone()));
            }
        }
        Ok(Self { params })
    }

    /// The nine Table-1 style lumped factors: seven scale factors on `[0.95, 1.05]`
    /// and two rear-spar chord fractions.
    pub fn lumped_range_default() -> Self {
        let mut params = Vec::new();
        for name in ["WENG", "OWFACT", "FACT"] {
            params.push(ParameterDef::uniform(name, 0.95, 1.05, 1.0).unwrap());
        }
        params.push(ParameterDef::uniform("RSPSOB", 0.55, 0.65, 0.60).unwrap());
        params.push(ParameterDef::uniform("RSPCHD", 0.60, 0.70, 0.65).unwrap());
        for name in ["FCDI", "FCDO", "FRFU", "E"] {
            params.push(ParameterDef::uniform(name, 0.95, 1.05, 1.0).unwrap());
        }
        Self { params }
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[ParameterDef] {
        &self.params
    }

    pub fn param(&self, i: usize) -> &ParameterDef {
        &self.params[i]
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn nominal(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.nominal).collect()
    }

    pub fn contains(&self, row: &[f64]) -> bool {
        row.len() == self.dimension() && row.iter().zip(&self.params).all(|(&x, p)| x >= p.lower && x <= p.upper)
    }
}

impl TryFrom<Vec<ParameterDef>> for ParameterSpace {
    type Error = Error;

    fn try_from(params: Vec<ParameterDef>) -> Result<Self> {
        Self::new(params)
    }
}

impl From<ParameterSpace> for Vec<ParameterDef> {
    fn from(space: ParameterSpace) -> Self {
        space.params
    }
}

/// How a [`SampleMatrix`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Lhs,
    MonteCarlo,
    /// Owen-scrambled Sobol sequence.
    Sobol,
    /// Rows assembled from other matrices (Saltelli cross matrices, flattened designs,
    /// subsamples).
    Derived,
}

/// Row-major `rows × cols` matrix of samples in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    pub seed: u64,
    pub kind: SampleKind,
}

impl SampleMatrix {
    pub fn from_row_major(rows: usize, cols: usize, values: Vec<f64>, seed: u64, kind: SampleKind) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: values.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            values,
            seed,
            kind,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], seed: u64, kind: SampleKind) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), cols, values, seed, kind)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |r| self.get(r, c))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            values,
            seed: self.seed,
            kind: SampleKind::Derived,
        }
    }
}
