//! Row-compressed sparse square matrices on a vertex set.
//!
//! Every matrix in the model lives on `E ∪ S` (edges plus the diagonal), so
//! rows are short. Each row is a column-sorted list of `(column, value)`.

use crate::scalar::{abs, sqrt, Scalar};
use nalgebra::DMatrix;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Copy> SparseMatrix<T> {
    /// Sorts each row by column. Columns must be distinct within a row.
    pub fn from_rows(mut rows: Vec<Vec<(usize, T)>>) -> Self {
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0), "duplicate column in row");
        }
        Self { rows }
    }

    pub fn empty(n: usize) -> Self {
        Self { rows: vec![Vec::new(); n] }
    }

    /// Number of rows (and columns).
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, u: usize) -> &[(usize, T)] {
        &self.rows[u]
    }

    pub fn rows(&self) -> &[Vec<(usize, T)>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<(usize, T)>> {
        self.rows
    }

    pub fn get(&self, u: usize, v: usize) -> Option<T> {
        let row = &self.rows[u];
        row.binary_search_by_key(&v, |&(c, _)| c).ok().map(|k| row[k].1)
    }

    /// Stored entries as `(row, column, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.rows.iter().enumerate().flat_map(|(u, r)| r.iter().map(move |&(v, x)| (u, v, x)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn map<U: Copy>(&self, mut f: impl FnMut(usize, usize, T) -> U) -> SparseMatrix<U> {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(u, r)| r.iter().map(|&(v, x)| (v, f(u, v, x))).collect())
            .collect();
        SparseMatrix { rows }
    }
}

impl<T: Scalar> SparseMatrix<T> {
    /// Sums duplicate `(row, column)` triplets.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut acc: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); n];
        for (u, v, x) in triplets {
            *acc[u].entry(v).or_insert(T::zero()) += x;
        }
        Self { rows: acc.into_iter().map(|m| m.into_iter().collect()).collect() }
    }

    pub fn from_dense(m: &DMatrix<T>) -> Self {
        let rows = (0..m.nrows())
            .map(|u| (0..m.ncols()).filter(|&v| m[(u, v)] != T::zero()).map(|v| (v, m[(u, v)])).collect())
            .collect();
        Self { rows }
    }

    pub fn get_or_zero(&self, u: usize, v: usize) -> T {
        self.get(u, v).unwrap_or_else(T::zero)
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for (u, v, x) in self.iter() {
            m[(u, v)] = x;
        }
        m
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.iter().map(|&(_, x)| x).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.size()];
        for (_, v, x) in self.iter() {
            out[v] += x;
        }
        out
    }

    pub fn total(&self) -> T {
        self.iter().map(|(_, _, x)| x).sum()
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|_, _, x| x * c)
    }

    /// `a·self + b·other` on the union of supports.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        assert_eq!(self.size(), other.size(), "matrix sizes differ");
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(r, s)| {
                let mut out = Vec::with_capacity(r.len().max(s.len()));
                let (mut i, mut j) = (0, 0);
                while i < r.len() || j < s.len() {
                    let ci = r.get(i).map_or(usize::MAX, |e| e.0);
                    let cj = s.get(j).map_or(usize::MAX, |e| e.0);
                    if ci == cj {
                        out.push((ci, a * r[i].1 + b * s[j].1));
                        i += 1;
                        j += 1;
                    } else if ci < cj {
                        out.push((ci, a * r[i].1));
                        i += 1;
                    } else {
                        out.push((cj, b * s[j].1));
                        j += 1;
                    }
                }
                out
            })
            .collect();
        Self { rows }
    }

    /// Sum of squared entries.
    pub fn squared_norm(&self) -> T {
        self.iter().map(|(_, _, x)| x * x).sum()
    }

    /// Frobenius distance over the union of supports. For matrices that both
    /// vanish off `E ∪ S` this is the restricted norm `‖self − other‖_G`.
    pub fn distance(&self, other: &Self) -> T {
        sqrt(self.combine(T::one(), other, -T::one()).squared_norm())
    }

    pub fn max_abs(&self) -> T {
        self.iter().map(|(_, _, x)| abs(x)).fold(T::zero(), crate::scalar::fmax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine_merges_supports() {
        let a = SparseMatrix::from_rows(vec![vec![(0, 1.0), (2, 2.0)], vec![], vec![(1, 1.0)]]);
        let b = SparseMatrix::from_rows(vec![vec![(1, 1.0), (2, 1.0)], vec![(0, 4.0)], vec![]]);
        let c = a.combine(1.0, &b, -2.0);
        assert_eq!(c.row(0), &[(0, 1.0), (1, -2.0), (2, 0.0)]);
        assert_eq!(c.row(1), &[(0, -8.0)]);
        assert_eq!(c.row(2), &[(1, 1.0)]);
        assert_eq!(a.distance(&a), 0.0);
    }

    #[test]
    fn triplets_accumulate() {
        let m = SparseMatrix::from_triplets(2, [(0, 1, 1.0), (0, 1, 2.5), (1, 1, 1.0)]);
        assert_eq!(m.get(0, 1), Some(3.5));
        assert_eq!(m.row_sums(), vec![3.5, 1.0]);
        assert_eq!(m.col_sums(), vec![0.0, 4.5]);
    }
}
