//! Row-major batches of jointly drawn samples.

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub dim: usize,
}

/// `n` joint draws of one or more named variables stored side by side.
///
/// The Donsker-Varadhan machinery works on two-variable batches: the first
/// variable plays the role of `S` (or `X`), the second the role of `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    data: Array2<f64>,
    vars: Vec<Variable>,
}

impl SampleBatch {
    pub fn new(vars: Vec<Variable>, data: Array2<f64>) -> Result<Self> {
        if vars.is_empty() || vars.iter().any(|v| v.dim == 0) {
            return Err(Error::InvalidArgument(
                "a batch needs at least one variable of positive dimension".into(),
            ));
        }
        let width: usize = vars.iter().map(|v| v.dim).sum();
        if width != data.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "variables span {width} columns but data has {}",
                data.ncols()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("sample batch".into()));
        }
        Ok(Self { data, vars })
    }

    /// Builds a batch from named column blocks with equal row counts.
    pub fn from_blocks(blocks: Vec<(&str, ArrayView2<f64>)>) -> Result<Self> {
        let rows = blocks.first().map(|(_, b)| b.nrows()).unwrap_or(0);
        if blocks.iter().any(|(_, b)| b.nrows() != rows) {
            return Err(Error::DimensionMismatch(
                "column blocks have different row counts".into(),
            ));
        }
        let vars = blocks
            .iter()
            .map(|(name, b)| Variable {
                name: (*name).to_string(),
                dim: b.ncols(),
            })
            .collect();
        let views: Vec<_> = blocks.iter().map(|(_, b)| b.view()).collect();
        let data = if views.is_empty() {
            Array2::zeros((0, 0))
        } else {
            concatenate(Axis(1), &views)
                .map_err(|e| Error::DimensionMismatch(e.to_string()))?
        };
        Self::new(vars, data)
    }

    /// Two-variable batch with roles `s` and `y`.
    pub fn pair(left: ArrayView2<f64>, right: ArrayView2<f64>) -> Result<Self> {
        Self::from_blocks(vec![("s", left), ("y", right)])
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn width(&self) -> usize {
        self.data.ncols()
    }

    fn offset(&self, index: usize) -> usize {
        self.vars[..index].iter().map(|v| v.dim).sum()
    }

    pub fn variable_at(&self, index: usize) -> ArrayView2<'_, f64> {
        let start = self.offset(index);
        self.data.slice(s![.., start..start + self.vars[index].dim])
    }

    pub fn variable(&self, name: &str) -> Result<ArrayView2<'_, f64>> {
        let index = self
            .vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no variable named {name:?}")))?;
        Ok(self.variable_at(index))
    }

    /// Two-variable batch built from the named columns of this one.
    pub fn select_pair(&self, left: &str, right: &str) -> Result<SampleBatch> {
        SampleBatch::from_blocks(vec![(left, self.variable(left)?), (right, self.variable(right)?)])
    }

    fn check_pair(&self) -> Result<()> {
        if self.vars.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "expected a two-variable batch, got {} variables",
                self.vars.len()
            )));
        }
        Ok(())
    }

    /// Applies `perm` to the rows of the second variable:
    /// row `i` of the result is `(first_i, second_{perm[i]})`.
    pub fn permute_second(&self, perm: &[usize]) -> Result<SampleBatch> {
        self.check_pair()?;
        if perm.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutation of length {} for {} rows",
                perm.len(),
                self.len()
            )));
        }
        let first_dim = self.vars[0].dim;
        let mut data = self.data.clone();
        for (i, &src) in perm.iter().enumerate() {
            if src >= self.len() {
                return Err(Error::InvalidArgument(format!("permutation index {src} out of range")));
            }
            data.slice_mut(s![i, first_dim..])
                .assign(&self.data.slice(s![src, first_dim..]));
        }
        Ok(SampleBatch {
            data,
            vars: self.vars.clone(),
        })
    }

    /// Draws from the product of marginals by permuting the second variable
    /// along the batch axis. Returns the shuffled batch and the permutation.
    pub fn marginal_shuffle_with_permutation<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<(SampleBatch, Vec<usize>)> {
        self.check_pair()?;
        if self.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "marginal shuffle needs at least 2 rows, got {}",
                self.len()
            )));
        }
        let mut perm: Vec<usize> = (0..self.len()).collect();
        perm.shuffle(rng);
        let shuffled = self.permute_second(&perm)?;
        Ok((shuffled, perm))
    }

    pub fn marginal_shuffle<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SampleBatch> {
        self.marginal_shuffle_with_permutation(rng).map(|(b, _)| b)
    }
}
