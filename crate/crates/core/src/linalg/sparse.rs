use faer::Mat;

use crate::error::{Error, Result};

/// Unordered `(row, col, value)` entries; duplicates are summed on `build`.
#[derive(Debug, Clone)]
pub struct Triplets {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(rows: usize, cols: usize) -> Self {
        Triplets {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(rows: usize, cols: usize, cap: usize) -> Self {
        Triplets {
            rows,
            cols,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.entries.push((row, col, value));
    }

    /// Merge another buffer with the same shape.
    pub fn append(&mut self, mut other: Triplets) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries.append(&mut other.entries);
    }

    pub fn build(mut self) -> SparseMatrix {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Compressed-row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Triplets::new(rows, cols).build()
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut t = Triplets::with_capacity(diag.len(), diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            t.push(i, i, d);
        }
        t.build()
    }

    pub fn from_dense(m: &Mat<f64>, drop_below: f64) -> Self {
        let mut t = Triplets::new(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v.abs() > drop_below {
                    t.push(i, j, v);
                }
            }
        }
        t.build()
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = Triplets::with_capacity(self.cols, self.rows, self.nnz());
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                t.push(j, i, v);
            }
        }
        t.build()
    }

    pub fn scaled(&self, c: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &SparseMatrix, b: f64) -> Result<SparseMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut t = Triplets::with_capacity(self.rows, self.cols, self.nnz() + other.nnz());
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                t.push(i, j, a * v);
            }
            for (j, v) in other.row(i) {
                t.push(i, j, b * v);
            }
        }
        Ok(t.build())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - A^T| / max |A|`.
    pub fn asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Stack blocks into one matrix. `None` entries are zero blocks; every
    /// block row and block column must contain at least one block to fix its
    /// size.
    pub fn from_blocks(blocks: &[Vec<Option<&SparseMatrix>>]) -> Result<SparseMatrix> {
        let nbr = blocks.len();
        let nbc = blocks.first().map_or(0, Vec::len);
        let mut row_sizes = vec![None; nbr];
        let mut col_sizes = vec![None; nbc];
        for (bi, brow) in blocks.iter().enumerate() {
            if brow.len() != nbc {
                return Err(Error::Dimension("ragged block layout".into()));
            }
            for (bj, b) in brow.iter().enumerate() {
                if let Some(b) = b {
                    for (slot, n) in [(&mut row_sizes[bi], b.rows), (&mut col_sizes[bj], b.cols)] {
                        match *slot {
                            Some(m) if m != n => {
                                return Err(Error::Dimension(format!(
                                    "block ({bi}, {bj}) does not conform"
                                )))
                            }
                            _ => *slot = Some(n),
                        }
                    }
                }
            }
        }
        let unwrap = |v: Vec<Option<usize>>| -> Result<Vec<usize>> {
            v.into_iter()
                .map(|s| s.ok_or_else(|| Error::Dimension("empty block row or column".into())))
                .collect()
        };
        let (row_sizes, col_sizes) = (unwrap(row_sizes)?, unwrap(col_sizes)?);
        let offsets = |sizes: &[usize]| -> Vec<usize> {
            sizes
                .iter()
                .scan(0, |acc, &s| {
                    let o = *acc;
                    *acc += s;
                    Some(o)
                })
                .collect()
        };
        let (ro, co) = (offsets(&row_sizes), offsets(&col_sizes));
        let mut t = Triplets::new(row_sizes.iter().sum(), col_sizes.iter().sum());
        for (bi, brow) in blocks.iter().enumerate() {
            for (bj, b) in brow.iter().enumerate() {
                if let Some(b) = b {
                    for i in 0..b.rows {
                        for (j, v) in b.row(i) {
                            t.push(ro[bi] + i, co[bj] + j, v);
                        }
                    }
                }
            }
        }
        Ok(t.build())
    }
}
