use std::io::Write;
use std::path::Path;

use nalgebra::DVector;

use crate::error::Result;

/// Square sparse matrix in compressed-row form with a block pattern: every
/// face owns `block` consecutive rows and couples to the faces it shares an
/// element with. Entries of the pattern are stored even when their value is
/// zero.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    block: usize,
    /// Sorted neighbour faces of each face.
    neighbours: Vec<Vec<usize>>,
}

impl CsrMatrix {
    pub(crate) fn with_block_pattern(neighbours: Vec<Vec<usize>>, block: usize) -> Self {
        let n = neighbours.len() * block;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for nb in &neighbours {
            for _ in 0..block {
                for &g in nb {
                    col_idx.extend(g * block..(g + 1) * block);
                }
                row_ptr.push(col_idx.len());
            }
        }
        let values = vec![0.0; col_idx.len()];
        CsrMatrix { n, row_ptr, col_idx, values, block, neighbours }
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn position(&self, f: usize, g: usize, i: usize, j: usize) -> Option<usize> {
        let nb = &self.neighbours[f];
        let slot = nb.binary_search(&g).ok()?;
        Some(self.row_ptr[f * self.block + i] + slot * self.block + j)
    }

    /// Adds `v` to entry `(f·block + i, g·block + j)`; the block `(f, g)`
    /// must be in the pattern.
    pub(crate) fn add_block_entry(&mut self, f: usize, g: usize, i: usize, j: usize, v: f64) {
        let pos = self.position(f, g, i, j).expect("entry outside the block pattern");
        self.values[pos] += v;
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, v: f64) {
        let pos = self
            .position(row / self.block, col / self.block, row % self.block, col % self.block)
            .expect("entry outside the block pattern");
        self.values[pos] = v;
    }

    /// Value at `(row, col)`, zero outside the pattern.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row / self.block, col / self.block, row % self.block, col % self.block)
            .map_or(0.0, |p| self.values[p])
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.n, |r, _| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(|p| self.values[p] * x[self.col_idx[p]]).sum()
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `max |a_ij - a_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..self.n {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                d = d.max((self.values[p] - self.get(self.col_idx[p], r)).abs());
            }
        }
        d
    }

    pub fn diagonal(&self) -> DVector<f64> {
        DVector::from_fn(self.n, |r, _| self.get(r, r))
    }

    /// Writes the lower triangle in MatrixMarket symmetric coordinate format
    /// (1-based indices).
    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let lower: Vec<(usize, usize, f64)> = (0..self.n)
            .flat_map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .filter(move |&p| self.col_idx[p] <= r)
                    .map(move |p| (r, self.col_idx[p], self.values[p]))
            })
            .collect();
        writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(out, "{} {} {}", self.n, self.n, lower.len())?;
        for (r, c, v) in lower {
            writeln!(out, "{} {} {:.17e}", r + 1, c + 1, v)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_pattern_layout() {
        let mut m = CsrMatrix::with_block_pattern(vec![vec![0, 1], vec![0, 1], vec![2]], 2);
        assert_eq!(m.nrows(), 6);
        assert_eq!(m.nnz(), 4 * 4 + 4);
        m.add_block_entry(0, 1, 1, 0, 3.0);
        m.add_block_entry(0, 1, 1, 0, 1.0);
        assert_eq!(m.get(1, 2), 4.0);
        assert_eq!(m.get(1, 4), 0.0);
        m.set(2, 1, 4.0);
        assert_eq!(m.symmetry_defect(), 0.0);
        let x = DVector::from_element(6, 1.0);
        assert_eq!(m.mul_vec(&x)[1], 4.0);
    }

    #[test]
    fn matrix_market_lower_triangle() {
        let mut m = CsrMatrix::with_block_pattern(vec![vec![0]], 2);
        m.set(0, 0, 2.0);
        m.set(1, 0, -1.0);
        m.set(0, 1, -1.0);
        m.set(1, 1, 2.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        m.write_matrix_market(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "%%MatrixMarket matrix coordinate real symmetric");
        assert_eq!(lines[1], "2 2 3");
        assert!(lines[3].starts_with("2 1 -1"));
    }
}
