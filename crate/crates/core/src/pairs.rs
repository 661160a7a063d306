//! Index pairs standing in for an implicit incidence matrix.
//!
//! Pair `(i, j)` is the row `(e_i − e_j)ᵀ`; multiplying it into a data matrix yields the
//! difference of rows `i` and `j`. The matrix itself is never formed.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    pairs: Vec<(usize, usize)>,
    max_index: usize,
}

impl PairSet {
    /// Validates and keeps the input order. `(i, j)` and `(j, i)` count as the same pair.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut max_index = 0;
        for &(i, j) in &pairs {
            if i == j {
                return Err(Error::Parameter(alloc::format!(
                    "pair ({i}, {j}) joins a point to itself"
                )));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::Parameter(alloc::format!("pair ({i}, {j}) is duplicated")));
            }
            max_index = max_index.max(i).max(j);
        }
        Ok(Self { pairs, max_index })
    }

    /// Every `(i, j)` with `i < j < points`, in lexicographic order.
    pub fn all_pairs(points: usize) -> Self {
        let mut pairs = Vec::with_capacity(points * points.saturating_sub(1) / 2);
        for i in 0..points {
            for j in i + 1..points {
                pairs.push((i, j));
            }
        }
        Self {
            pairs,
            max_index: points.saturating_sub(1),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn as_slice(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// Fails if any index does not address one of `points` rows.
    pub fn check_bounds(&self, points: usize) -> Result<()> {
        if !self.pairs.is_empty() && self.max_index >= points {
            return Err(Error::Index {
                index: self.max_index,
                len: points,
            });
        }
        Ok(())
    }

    /// `B·Y`: one row per pair holding `Y[i] − Y[j]`.
    pub fn difference(&self, y: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.pairs.len(), y.cols());
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            for ((o, a), b) in out.row_mut(p).iter_mut().zip(y.row(i)).zip(y.row(j)) {
                *o = a - b;
            }
        }
        out
    }

    /// `Bᵀ·Z`: scatter-adds `+Z[p]` into row `i` and `−Z[p]` into row `j`.
    pub fn scatter(&self, z: &DenseMatrix, points: usize) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(points, z.cols());
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let zp = z.row(p);
            for (o, v) in out.row_mut(i).iter_mut().zip(zp) {
                *o += v;
            }
            for (o, v) in out.row_mut(j).iter_mut().zip(zp) {
                *o -= v;
            }
        }
        out
    }

    /// Dense incidence matrix with `points` columns. Test and oracle use only.
    pub fn to_incidence_matrix(&self, points: usize) -> DenseMatrix {
        let mut b = DenseMatrix::zeros(self.pairs.len(), points);
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            b.set(p, i, 1.0);
            b.set(p, j, -1.0);
        }
        b
    }
}
