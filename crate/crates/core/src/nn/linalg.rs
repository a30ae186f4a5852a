//! Minimal dense row-major matrix used by the network layers.

// Index loops keep the row/column arithmetic explicit in these kernels.
#![allow(clippy::needless_range_loop)]

/// A dense `rows x cols` matrix of `f64`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build a matrix by evaluating `f(row, col)` in row-major order.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Build a matrix from a row-major buffer. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major buffer length mismatch");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut f64 {
        &mut self.data[row * self.cols + col]
    }

    /// The underlying row-major buffer.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = 0.0;
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            y[r] = acc;
        }
        y
    }

    /// `y = (A .* mask * scale) x` — entrywise masked and rescaled weights.
    pub fn matvec_masked(&self, x: &[f64], mask: &[f64], scale: f64) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(mask.len(), self.data.len());
        let mut y = vec![0.0; self.rows];
        for r in 0..self.rows {
            let start = r * self.cols;
            let row = &self.data[start..start + self.cols];
            let mrow = &mask[start..start + self.cols];
            let mut acc = 0.0;
            for ((w, m), xi) in row.iter().zip(mrow).zip(x) {
                acc += w * m * scale * xi;
            }
            y[r] = acc;
        }
        y
    }

    /// `y = A^T x`
    pub fn tmatvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (c, w) in row.iter().enumerate() {
                y[c] += w * x[r];
            }
        }
        y
    }

    /// `y = (A .* mask * scale)^T x`
    pub fn tmatvec_masked(&self, x: &[f64], mask: &[f64], scale: f64) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(mask.len(), self.data.len());
        let mut y = vec![0.0; self.cols];
        for r in 0..self.rows {
            let start = r * self.cols;
            let row = &self.data[start..start + self.cols];
            let mrow = &mask[start..start + self.cols];
            for (c, (w, m)) in row.iter().zip(mrow).enumerate() {
                y[c] += w * m * scale * x[r];
            }
        }
        y
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_matches_by_hand() {
        // [[1,2],[3,4],[5,6]] * [1,-1] = [-1,-1,-1]
        let a = Matrix::from_row_major(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(a.matvec(&[1.0, -1.0]), vec![-1.0, -1.0, -1.0]);
    }

    #[test]
    fn tmatvec_matches_by_hand() {
        let a = Matrix::from_row_major(2, 3, vec![1.0, 0.0, 2.0, 0.0, 1.0, 1.0]);
        // A^T [2, 3] = [2*1, 3*1, 2*2 + 3*1] = [2, 3, 7]
        assert_eq!(a.tmatvec(&[2.0, 3.0]), vec![2.0, 3.0, 7.0]);
    }

    #[test]
    fn masked_matvec_zeroes_entries() {
        let a = Matrix::from_row_major(1, 2, vec![3.0, 5.0]);
        let y = a.matvec_masked(&[1.0, 1.0], &[1.0, 0.0], 2.0);
        assert_eq!(y, vec![6.0]);
    }
}
