//! Exact linear algebra over the rationals: row reduction, rank, solve, kernel.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::polyring::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Rational>>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![vec![Rational::zero(); cols]; rows],
        }
    }

    pub fn from_rows(data: Vec<Vec<Rational>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, Vec::len);
        assert!(data.iter().all(|r| r.len() == cols), "ragged matrix");
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from sparse columns keyed by arbitrary row labels.
    /// Rows are ordered by label; the label order is returned alongside.
    pub fn from_sparse_columns<K: Ord + Clone>(columns: &[BTreeMap<K, Rational>]) -> (Self, Vec<K>) {
        let mut index: BTreeMap<K, usize> = BTreeMap::new();
        for col in columns {
            for k in col.keys() {
                index.entry(k.clone()).or_insert(0);
            }
        }
        let labels: Vec<K> = index.keys().cloned().collect();
        for (i, v) in index.values_mut().enumerate() {
            *v = i;
        }
        let mut m = Matrix::zeros(labels.len(), columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (k, v) in col {
                m.data[index[k]][j] = v.clone();
            }
        }
        (m, labels)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r][c] = v;
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.data[r][col].is_zero()) else {
                continue;
            };
            self.data.swap(row, p);
            let inv = Rational::one() / &self.data[row][col];
            if !inv.is_one() {
                for v in self.data[row][col..].iter_mut() {
                    *v *= &inv;
                }
            }
            let pivot_row = self.data[row].clone();
            for r in 0..self.rows {
                if r == row || self.data[r][col].is_zero() {
                    continue;
                }
                let factor = self.data[r][col].clone();
                for (c, pv) in pivot_row.iter().enumerate().skip(col) {
                    if !pv.is_zero() {
                        let delta = &factor * pv;
                        self.data[r][c] -= delta;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right kernel `{v : A v = 0}`.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let mut r = self.clone();
        let pivots = r.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r.data[i][f].clone();
                }
                v
            })
            .collect()
    }

    /// One solution of `A x = b`, or `None` when the system is inconsistent.
    /// Free variables are set to zero.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows, "right-hand side length");
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            aug.data[r][..self.cols].clone_from_slice(&self.data[r]);
            aug.data[r][self.cols] = b[r].clone();
        }
        let pivots = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = aug.data[i][self.cols].clone();
        }
        Some(x)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        self.data
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{int, rat};

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    #[test]
    fn rank_and_kernel() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        assert!(a.mul_vec(&k[0]).iter().all(Zero::is_zero));
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = m(&[&[2, 0], &[0, 3]]);
        let x = a.solve(&[int(1), int(1)]).unwrap();
        assert_eq!(x, vec![rat(1, 2), rat(1, 3)]);

        let singular = m(&[&[1, 1], &[1, 1]]);
        assert!(singular.solve(&[int(1), int(2)]).is_none());
        let x = singular.solve(&[int(2), int(2)]).unwrap();
        assert_eq!(singular.mul_vec(&x), vec![int(2), int(2)]);
    }

    #[test]
    fn full_rank_has_trivial_kernel() {
        let a = m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert!(a.kernel().is_empty());
    }

    #[test]
    fn sparse_columns_share_row_labels() {
        let c0: BTreeMap<&str, Rational> = [("a", int(1))].into_iter().collect();
        let c1: BTreeMap<&str, Rational> = [("a", int(1)), ("b", int(2))].into_iter().collect();
        let (mat, labels) = Matrix::from_sparse_columns(&[c0, c1]);
        assert_eq!(labels, vec!["a", "b"]);
        assert_eq!(mat.get(1, 1), &int(2));
        assert_eq!(mat.get(1, 0), &int(0));
    }
}
