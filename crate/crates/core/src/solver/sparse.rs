//! Compressed sparse row matrices and a Markowitz-style sparse LU.

use crate::error::LinearSolveError;

/// Pivots smaller than this fraction of the largest matrix entry are treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-12;
/// Threshold partial pivoting: candidates must be within this factor of the column maximum.
const PIVOT_THRESHOLD: f64 = 0.1;
const REFINEMENT_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a square matrix, summing duplicate `(row, col)` entries in
    /// insertion order.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "entry ({r}, {c}) outside {n}x{n} matrix");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let t = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| {
                row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(c, &v)| (r, c, v))
            })
            .collect();
        Self::from_triplets(n, t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Row-permuted, column-permuted LU factors: step `k` eliminates column
/// `pivot_col[k]` using row `pivot_row[k]`.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    pivot_row: Vec<usize>,
    pivot_col: Vec<usize>,
    pivots: Vec<f64>,
    /// Multipliers applied to other rows at each step.
    lower: Vec<Vec<(usize, f64)>>,
    /// Off-pivot entries of each pivot row.
    upper: Vec<Vec<(usize, f64)>>,
}

impl SparseLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self, LinearSolveError> {
        let n = a.n;
        let scale = a.max_abs();
        let tiny = PIVOT_TOLERANCE * scale;

        let mut rows: Vec<Vec<(usize, f64)>> = (0..n).map(|r| a.row(r).collect()).collect();
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut col_count = vec![0usize; n];
        for (r, row) in rows.iter().enumerate() {
            for &(c, _) in row {
                col_rows[c].push(r);
                col_count[c] += 1;
            }
        }

        let mut row_active = vec![true; n];
        let mut active_cols: Vec<usize> = (0..n).collect();
        let mut position = vec![usize::MAX; n];

        let mut lu = SparseLu {
            n,
            pivot_row: Vec::with_capacity(n),
            pivot_col: Vec::with_capacity(n),
            pivots: Vec::with_capacity(n),
            lower: Vec::with_capacity(n),
            upper: Vec::with_capacity(n),
        };

        let mut candidates: Vec<(usize, f64)> = Vec::new();
        for step in 0..n {
            // sparsest remaining column
            let (slot, &col) = active_cols
                .iter()
                .enumerate()
                .min_by_key(|&(_, &c)| (col_count[c], c))
                .expect("active column");
            active_cols.swap_remove(slot);

            candidates.clear();
            for &r in &col_rows[col] {
                if !row_active[r] {
                    continue;
                }
                if let Some(&(_, v)) = rows[r].iter().find(|e| e.0 == col) {
                    candidates.push((r, v));
                }
            }
            let col_max = candidates.iter().fold(0.0f64, |m, c| m.max(c.1.abs()));
            if !(col_max > tiny) {
                return Err(LinearSolveError::Singular { step });
            }
            let &(prow, pivot) = candidates
                .iter()
                .filter(|c| c.1.abs() >= PIVOT_THRESHOLD * col_max)
                .min_by(|x, y| {
                    rows[x.0]
                        .len()
                        .cmp(&rows[y.0].len())
                        .then(y.1.abs().total_cmp(&x.1.abs()))
                        .then(x.0.cmp(&y.0))
                })
                .expect("at least the column maximum qualifies");

            row_active[prow] = false;
            let pivot_entries = std::mem::take(&mut rows[prow]);
            let upper: Vec<(usize, f64)> =
                pivot_entries.iter().copied().filter(|e| e.0 != col).collect();
            for &(c, _) in &pivot_entries {
                col_count[c] -= 1;
            }

            let mut lower = Vec::with_capacity(candidates.len().saturating_sub(1));
            for &(r, v) in candidates.iter().filter(|c| c.0 != prow) {
                let l = v / pivot;
                lower.push((r, l));
                let row = &mut rows[r];
                row.retain(|e| e.0 != col);
                for (k, e) in row.iter().enumerate() {
                    position[e.0] = k;
                }
                for &(c, u) in &upper {
                    match position[c] {
                        usize::MAX => {
                            position[c] = row.len();
                            row.push((c, -l * u));
                            col_rows[c].push(r);
                            col_count[c] += 1;
                        }
                        k => row[k].1 -= l * u,
                    }
                }
                for e in row.iter() {
                    position[e.0] = usize::MAX;
                }
            }
            col_rows[col] = Vec::new();

            lu.pivot_row.push(prow);
            lu.pivot_col.push(col);
            lu.pivots.push(pivot);
            lu.lower.push(lower);
            lu.upper.push(upper);
        }
        Ok(lu)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        for k in 0..self.n {
            let v = y[self.pivot_row[k]];
            if v != 0.0 {
                for &(i, l) in &self.lower[k] {
                    y[i] -= l * v;
                }
            }
        }
        let mut x = vec![0.0; self.n];
        for k in (0..self.n).rev() {
            let mut s = y[self.pivot_row[k]];
            for &(j, u) in &self.upper[k] {
                s -= u * x[j];
            }
            x[self.pivot_col[k]] = s / self.pivots[k];
        }
        x
    }
}

/// Newton step: solves `J·Δx = −f` with iterative refinement and rejects
/// results whose residual exceeds `1e-9·max(1, ‖f‖∞)`.
pub fn linear_solve(j: &SparseMatrix, f: &[f64]) -> Result<Vec<f64>, LinearSolveError> {
    if f.len() != j.n {
        return Err(LinearSolveError::Dimension { n: j.n, len: f.len() });
    }
    let lu = SparseLu::factor(j)?;
    let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
    let bound = 1e-9 * super::inf_norm(f).max(1.0);
    let mut x = lu.solve(&rhs);
    let mut residual = f64::INFINITY;
    for _ in 0..=REFINEMENT_STEPS {
        let jx = j.mul_vec(&x);
        let r: Vec<f64> = rhs.iter().zip(&jx).map(|(b, a)| b - a).collect();
        residual = super::inf_norm(&r);
        if residual < bound {
            return Ok(x);
        }
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    Err(LinearSolveError::Inaccurate { residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_system() {
        let dx = linear_solve(&SparseMatrix::identity(3), &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(dx, vec![-1.0, -1.0, -1.0]);
    }

    #[test]
    fn scalar_system() {
        let j = SparseMatrix::from_triplets(1, vec![(0, 0, 2.0)]);
        assert_eq!(linear_solve(&j, &[4.0]).unwrap(), vec![-2.0]);
    }

    #[test]
    fn empty_row_is_singular() {
        let j = SparseMatrix::from_dense(&[
            vec![1.0, 2.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 1.0, 3.0],
        ]);
        assert!(matches!(linear_solve(&j, &[1.0, 1.0, 1.0]), Err(LinearSolveError::Singular { .. })));
    }

    #[test]
    fn numerically_singular() {
        let j = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(linear_solve(&j, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn needs_pivoting() {
        // zero on the diagonal
        let j = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(linear_solve(&j, &[2.0, 3.0]).unwrap(), vec![-3.0, -2.0]);
    }

    #[test]
    fn duplicates_are_summed() {
        let m = SparseMatrix::from_triplets(2, vec![(0, 1, 1.0), (0, 1, 2.5), (1, 0, 1.0)]);
        assert_eq!(m.get(0, 1), 3.5);
        assert_eq!(m.nnz(), 2);
    }

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
        let n = b.len();
        let m = nalgebra::DMatrix::from_fn(n, n, |r, c| a[r][c]);
        m.lu().solve(&nalgebra::DVector::from_column_slice(b)).map(|v| v.iter().copied().collect())
    }

    proptest! {
        #[test]
        fn matches_dense_lu(
            n in 2usize..12,
            seed in proptest::collection::vec((0usize..144, -5.0..5.0f64), 0..40),
            rhs in proptest::collection::vec(-3.0..3.0f64, 12),
        ) {
            // diagonally weighted sparse matrix
            let mut a = vec![vec![0.0; n]; n];
            for (i, row) in a.iter_mut().enumerate() {
                row[i] = 10.0 + i as f64;
            }
            for (k, v) in seed {
                a[(k / 12) % n][k % n] += v;
            }
            let b = &rhs[..n];
            let expect = dense_solve(&a, b).unwrap();
            let neg: Vec<f64> = b.iter().map(|v| -v).collect();
            let x = linear_solve(&SparseMatrix::from_dense(&a), &neg).unwrap();
            for (u, v) in x.iter().zip(&expect) {
                prop_assert!((u - v).abs() < 1e-10 * (1.0 + v.abs()));
            }
        }
    }
}
