use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Serialize, Serializer};

use super::MarkovError;
use crate::game::STOCHASTIC_TOL;

/// Dense square matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Square {
    n: usize,
    data: Vec<f64>,
}

impl Square {
    pub fn zeros(n: usize) -> Self {
        Square {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Square::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MarkovError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MarkovError::NotSquare {
                    row: i + 1,
                    len: row.len(),
                    n,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Square { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n.max(1)).take(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, rhs: &Square) -> Square {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = Square::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add_diagonal(&mut self, c: f64) {
        for i in 0..self.n {
            self[(i, i)] += c;
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|x| *x *= c);
    }

    /// `a · self + b · other`.
    pub fn combine(&self, a: f64, other: &Square, b: f64) -> Square {
        assert_eq!(self.n, other.n);
        Square {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `‖self − other‖∞`.
    pub fn dist_inf(&self, other: &Square) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .chunks(self.n.max(1))
            .zip(other.data.chunks(self.n.max(1)))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl Index<(usize, usize)> for Square {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Square {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Serialize for Square {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.rows())
    }
}

/// A square matrix whose rows are probability vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StochasticMatrix(Square);

impl StochasticMatrix {
    pub fn new(m: Square) -> Result<Self, MarkovError> {
        if m.n() == 0 {
            return Err(MarkovError::Empty);
        }
        for (i, row) in m.rows().enumerate() {
            if let Some(j) = row
                .iter()
                .position(|&x| !x.is_finite() || x < -STOCHASTIC_TOL)
            {
                return Err(MarkovError::NegativeEntry {
                    row: i + 1,
                    col: j + 1,
                    value: row[j],
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(MarkovError::NotStochastic { row: i + 1, sum });
            }
        }
        Ok(StochasticMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MarkovError> {
        Self::new(Square::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn as_square(&self) -> &Square {
        &self.0
    }
}

impl Index<(usize, usize)> for StochasticMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(
            StochasticMatrix::from_rows(&[vec![0.5, 0.4], vec![0.0, 1.0]]),
            Err(MarkovError::NotStochastic { row: 1, .. })
        ));
        assert!(matches!(
            StochasticMatrix::from_rows(&[vec![1.5, -0.5], vec![0.0, 1.0]]),
            Err(MarkovError::NegativeEntry { row: 1, col: 2, .. })
        ));
        assert!(matches!(
            StochasticMatrix::from_rows(&[vec![1.0], vec![1.0]]),
            Err(MarkovError::NotSquare { .. })
        ));
    }

    #[test]
    fn matmul_small() {
        let a = Square::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = a.matmul(&a);
        assert_eq!(b.to_rows(), vec![vec![7.0, 10.0], vec![15.0, 22.0]]);
        assert_eq!(a.norm_inf(), 7.0);
        assert_eq!(a.trace(), 5.0);
    }
}
