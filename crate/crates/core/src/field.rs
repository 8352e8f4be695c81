//! Value carriers: grid functions on the extended cube lattice and on
//! boundary hyperplane lattices.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use std::sync::Arc;

/// Real values on the extended lattice, stored in the grid's flat order.
#[derive(Debug, Clone)]
pub struct LatticeField {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
}

impl LatticeField {
    pub fn zeros(grid: Arc<GridSpec>) -> Self {
        let len = grid.len();
        LatticeField {
            grid,
            values: vec![0.0; len],
        }
    }

    pub fn from_values(grid: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "field length {} does not match lattice size {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "field contains non-finite value {v}"
            )));
        }
        Ok(LatticeField { grid, values })
    }

    /// Sample a function of the physical coordinates on the whole lattice.
    pub fn sample(grid: Arc<GridSpec>, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        for (slot, v) in values.iter_mut().enumerate() {
            *v = f(&grid.point(slot as u32));
        }
        LatticeField { grid, values }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    #[inline]
    pub fn get(&self, slot: u32) -> f64 {
        self.values[slot as usize]
    }

    #[inline]
    pub fn set(&mut self, slot: u32, v: f64) {
        self.values[slot as usize] = v;
    }

    pub fn at_index(&self, idx: &[i64]) -> Option<f64> {
        self.grid.slot(idx).map(|s| self.values[s as usize])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Pointwise difference on a shared grid.
    pub fn sub(&self, other: &LatticeField) -> Result<LatticeField> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.len() != other.grid.len() {
            return Err(Error::ShapeMismatch(
                "fields live on different grids".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(LatticeField {
            grid: self.grid.clone(),
            values,
        })
    }
}

/// Real values on a finite box of an (n-1)-dimensional lattice hyperplane,
/// implicitly zero outside the stored box.
///
/// Coordinates are integer multiples of the parent spacing `h`. The box is
/// addressed by `lo` (inclusive) and `shape`, row-major.
#[derive(Debug, Clone)]
pub struct FaceField {
    h: f64,
    lo: Vec<i64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl FaceField {
    pub fn zeros(h: f64, lo: Vec<i64>, shape: Vec<usize>) -> Self {
        assert_eq!(lo.len(), shape.len());
        let mut strides = vec![0usize; shape.len()];
        let mut acc = 1;
        for a in (0..shape.len()).rev() {
            strides[a] = acc;
            acc *= shape[a];
        }
        FaceField {
            h,
            lo,
            shape,
            strides,
            values: vec![0.0; acc],
        }
    }

    /// Fill from a function of the integer coordinates.
    pub fn from_fn(
        h: f64,
        lo: Vec<i64>,
        shape: Vec<usize>,
        mut f: impl FnMut(&[i64]) -> f64,
    ) -> Self {
        let mut out = FaceField::zeros(h, lo, shape);
        let dim = out.dim();
        let mut idx = out.lo.clone();
        for off in 0..out.values.len() {
            out.values[off] = f(&idx);
            #[allow(clippy::needless_range_loop)]
            for a in (0..dim).rev() {
                idx[a] += 1;
                if ((idx[a] - out.lo[a]) as usize) < out.shape[a] {
                    break;
                }
                idx[a] = out.lo[a];
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn offset(&self, idx: &[i64]) -> Option<usize> {
        debug_assert_eq!(idx.len(), self.dim());
        let mut off = 0;
        for (a, &z) in idx.iter().enumerate() {
            let rel = z - self.lo[a];
            if rel < 0 || rel as usize >= self.shape[a] {
                return None;
            }
            off += rel as usize * self.strides[a];
        }
        Some(off)
    }

    /// Value at integer coordinates; zero outside the stored box.
    #[inline]
    pub fn get(&self, idx: &[i64]) -> f64 {
        self.offset(idx).map_or(0.0, |o| self.values[o])
    }

    pub fn set(&mut self, idx: &[i64], v: f64) {
        let o = self
            .offset(idx)
            .expect("FaceField::set outside the stored box");
        self.values[o] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Visit every stored point (integer coordinates and value).
    pub fn for_each(&self, mut f: impl FnMut(&[i64], f64)) {
        let dim = self.dim();
        let mut idx = self.lo.clone();
        for off in 0..self.values.len() {
            f(&idx, self.values[off]);
            for a in (0..dim).rev() {
                idx[a] += 1;
                if ((idx[a] - self.lo[a]) as usize) < self.shape[a] {
                    break;
                }
                idx[a] = self.lo[a];
            }
        }
    }

    /// Stored points with nonzero value.
    pub fn support(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        self.for_each(|idx, v| {
            if v != 0.0 {
                out.push(idx.to_vec());
            }
        });
        out
    }

    pub fn scale(&self, c: f64) -> FaceField {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }
}
