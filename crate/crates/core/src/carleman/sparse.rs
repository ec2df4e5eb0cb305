//! Minimal CSR matrix and bilinear tensor storage for the Carleman operators.

use crate::scalar::Real;

/// Square sparse matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds from rows given in order; each row is `(col, value)` pairs.
    pub fn from_rows(dim: usize, rows: impl IntoIterator<Item = Vec<(usize, T)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                debug_assert!(c < dim);
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        assert_eq!(row_ptr.len(), dim + 1, "row count must equal dimension");
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn max_row_nnz(&self) -> usize {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (c, v) = self.row(i);
        c.iter().position(|&k| k == j).map_or(T::zero(), |p| v[p])
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            let mut acc = T::zero();
            for (&k, &a) in c.iter().zip(v) {
                acc += a * x[k];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }
}

/// One stored coefficient of the bilinear tensor: contributes
/// `coef * J[beta] * J[gamma]` to output row `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearEntry<T> {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub coef: T,
}

/// Bilinear map `(B:M)_alpha = sum B[alpha, beta, gamma] M[beta, gamma]`,
/// entries sorted by `alpha` with a row pointer for slicing.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearTensor<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    entries: Vec<BilinearEntry<T>>,
}

impl<T: Real> BilinearTensor<T> {
    pub(crate) fn from_sorted(dim: usize, entries: Vec<BilinearEntry<T>>) -> Self {
        let mut row_ptr = vec![0; dim + 1];
        for e in &entries {
            row_ptr[e.alpha + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        debug_assert!(entries.windows(2).all(|w| w[0].alpha <= w[1].alpha));
        Self {
            dim,
            row_ptr,
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[BilinearEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn row(&self, alpha: usize) -> &[BilinearEntry<T>] {
        &self.entries[self.row_ptr[alpha]..self.row_ptr[alpha + 1]]
    }

    /// Contraction against a dense row-major `dim x dim` matrix.
    pub fn contract_into(&self, m: &[T], out: &mut [T]) {
        debug_assert_eq!(m.len(), self.dim * self.dim);
        for (alpha, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for e in self.row(alpha) {
                acc += e.coef * m[e.beta * self.dim + e.gamma];
            }
            *o = acc;
        }
    }

    /// Contraction against the rank-one matrix `u u^T` without forming it.
    pub fn contract_outer(&self, u: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|alpha| {
                self.row(alpha)
                    .iter()
                    .fold(T::zero(), |acc, e| acc + e.coef * u[e.beta] * u[e.gamma])
            })
            .collect()
    }
}
