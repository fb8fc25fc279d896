use nalgebra::{DMatrix, DVector};

/// Compressed sparse rows; built once from the dense game matrices, which are
/// mostly zeros.
#[derive(Debug, Clone)]
pub(crate) struct Csr {
    ncols: usize,
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut ptr = vec![0];
        let (mut idx, mut val) = (Vec::new(), Vec::new());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != 0.0 {
                    idx.push(c);
                    val.push(v);
                }
            }
            ptr.push(idx.len());
        }
        Csr { ncols: m.ncols(), ptr, idx, val }
    }

    pub fn nrows(&self) -> usize {
        self.ptr.len() - 1
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.ptr[r]..self.ptr[r + 1];
        self.idx[span.clone()].iter().copied().zip(self.val[span].iter().copied())
    }

    pub fn mul(&self, x: &[f64]) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.ncols);
        DVector::from_iterator(self.nrows(), (0..self.nrows()).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()))
    }

    /// `out += Mᵀy`.
    pub fn tr_mul_add(&self, y: &[f64], out: &mut DVector<f64>) {
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                for (c, v) in self.row(r) {
                    out[c] += v * yr;
                }
            }
        }
    }

    /// Largest absolute coefficient of each row, 1 for empty rows.
    pub fn row_scales(&self) -> Vec<f64> {
        (0..self.nrows())
            .map(|r| {
                let s = self.row(r).fold(0.0f64, |m, (_, v)| m.max(v.abs()));
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect()
    }
}
