use crate::model::ConstraintKind;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Blocks of a follower vector in stacking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    P = 0,
    Y = 1,
    E = 2,
    Charge = 3,
    Discharge = 4,
    K = 5,
    T = 6,
}

impl Block {
    pub const ALL: [Block; 7] =
        [Block::P, Block::Y, Block::E, Block::Charge, Block::Discharge, Block::K, Block::T];
}

/// Index arithmetic for the collective vector `x = col(x_1, …, x_N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n: usize,
    pub t: usize,
}

impl Layout {
    pub fn new(n: usize, t: usize) -> Self {
        Layout { n, t }
    }

    pub fn per_follower(&self) -> usize {
        7 * self.t
    }

    pub fn len(&self) -> usize {
        self.n * self.per_follower()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, b: Block, tau: usize) -> usize {
        i * self.per_follower() + b as usize * self.t + tau
    }

    /// Block and interval of a local (per-follower) index.
    pub fn locate(&self, local: usize) -> (Block, usize) {
        (Block::ALL[local / self.t], local % self.t)
    }
}

/// Where a constraint row comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowTag {
    pub kind: ConstraintKind,
    pub prosumer: Option<usize>,
    pub tau: usize,
}

/// Row-wise sparse constraint list, densified once assembly is complete.
#[derive(Debug, Clone, Default)]
pub(crate) struct RowSet {
    pub coeffs: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
    pub tags: Vec<RowTag>,
}

impl RowSet {
    pub fn push(&mut self, tag: RowTag, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.coeffs.push(coeffs);
        self.rhs.push(rhs);
        self.tags.push(tag);
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn dense(&self, cols: usize) -> (DMatrix<f64>, DVector<f64>) {
        let mut m = DMatrix::zeros(self.len(), cols);
        for (r, row) in self.coeffs.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] += v;
            }
        }
        (m, DVector::from_column_slice(&self.rhs))
    }
}
