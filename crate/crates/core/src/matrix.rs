//! Square matrices over a semiring, with cellwise union and the lifted product.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{PathSet, Semiring};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("matrix dimensions differ: {left} vs {right}")]
pub struct DimensionMismatch {
    pub left: usize,
    pub right: usize,
}

/// An `n × n` matrix of semiring elements, stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<S> {
    n: usize,
    cells: Vec<S>,
}

/// Matrix of path sets; `A`, `T`, `I` and `A*` are all of this type.
pub type PathMatrix = Matrix<PathSet>;

impl<S: Semiring> Matrix<S> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut cells = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                cells.push(f(i, j));
            }
        }
        Self { n, cells }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_fn(n, |_, _| S::zero())
    }

    /// Multiplicative identity: `one` on the diagonal, `zero` elsewhere.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        assert!(
            i < self.n && j < self.n,
            "cell ({i},{j}) outside {0}x{0}",
            self.n
        );
        &self.cells[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        assert!(
            i < self.n && j < self.n,
            "cell ({i},{j}) outside {0}x{0}",
            self.n
        );
        self.cells[i * self.n + j] = value;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.cells.chunks(self.n.max(1)).take(self.n)
    }

    fn check(&self, other: &Self) -> Result<(), DimensionMismatch> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(DimensionMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self, DimensionMismatch> {
        self.check(other)?;
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| a.plus(b))
            .collect();
        Ok(Self { n: self.n, cells })
    }

    /// `(L·R)(i,j) = ⋃_q L(i,q)·R(q,j)`.
    pub fn product(&self, other: &Self) -> Result<Self, DimensionMismatch>
    where
        S: Send + Sync,
    {
        self.check(other)?;
        let n = self.n;
        let cells = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let mut acc = S::zero();
                for q in 0..n {
                    let left = self.get(i, q);
                    let right = other.get(q, j);
                    if left.is_zero() || right.is_zero() {
                        continue;
                    }
                    left.times_into(right, &mut acc);
                }
                acc
            })
            .collect();
        Ok(Self { n, cells })
    }
}

impl<S: fmt::Display> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for row in self.cells.chunks(self.n.max(1)).take(self.n) {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "  {}", cells.join("  "))?;
        }
        write!(f, "]")
    }
}
