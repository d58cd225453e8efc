//! All valid device paths between zone pairs, by right iteration over the
//! path-set semiring:
//!
//! ```text
//! A<0>   = I
//! A<k+1> = (A<k>·T ∪ I)·A
//! ```
//!
//! `T` masks intermediate zones that may not carry through-traffic. Elementary
//! paths have at most `n-1` steps, so `A* = A<n-1>`.

use thiserror::Error;

use crate::matrix::{DimensionMismatch, PathMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error(transparent)]
    DimensionMismatch(#[from] DimensionMismatch),
    #[error("transitivity matrix has a non-diagonal entry at ({0},{1})")]
    NotDiagonal(usize, usize),
    #[error("no fixpoint within {bound} iterations")]
    NoConvergence { bound: usize },
}

fn check_inputs(adjacency: &PathMatrix, transitivity: &PathMatrix) -> Result<(), ClosureError> {
    let n = adjacency.dim();
    if transitivity.dim() != n {
        return Err(DimensionMismatch {
            left: n,
            right: transitivity.dim(),
        }
        .into());
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && !transitivity.get(i, j).is_empty() {
                return Err(ClosureError::NotDiagonal(i, j));
            }
        }
    }
    Ok(())
}

fn step(
    current: &PathMatrix,
    adjacency: &PathMatrix,
    transitivity: &PathMatrix,
    identity: &PathMatrix,
) -> PathMatrix {
    current
        .product(transitivity)
        .and_then(|m| m.union(identity))
        .and_then(|m| m.product(adjacency))
        .expect("dimensions checked by caller")
}

/// Iterates `A<k+1> = (A<k>·T ∪ I)·A` from `A<0> = I` exactly `k` times.
pub fn iterate(
    adjacency: &PathMatrix,
    transitivity: &PathMatrix,
    k: usize,
) -> Result<PathMatrix, ClosureError> {
    check_inputs(adjacency, transitivity)?;
    let identity = PathMatrix::identity(adjacency.dim());
    let mut current = identity.clone();
    for _ in 0..k {
        current = step(&current, adjacency, transitivity, &identity);
    }
    Ok(current)
}

/// `A*`: valid primary- and secondary-conduit paths between every zone pair.
pub fn right_iterate(
    adjacency: &PathMatrix,
    transitivity: &PathMatrix,
) -> Result<PathMatrix, ClosureError> {
    iterate(adjacency, transitivity, adjacency.dim().saturating_sub(1))
}

/// First `k` with `A<k> = A<k+1>`. Fails if none is found by `k = n-1`.
pub fn check_convergence(
    adjacency: &PathMatrix,
    transitivity: &PathMatrix,
) -> Result<usize, ClosureError> {
    check_inputs(adjacency, transitivity)?;
    let bound = adjacency.dim().saturating_sub(1);
    let identity = PathMatrix::identity(adjacency.dim());
    let mut current = identity.clone();
    for k in 0..=bound {
        let next = step(&current, adjacency, transitivity, &identity);
        if next == current {
            return Ok(k);
        }
        current = next;
    }
    Err(ClosureError::NoConvergence { bound })
}

pub mod oracle {
    //! Depth-first enumeration of valid paths, kept separate from the
    //! semiring machinery so it can cross-check [`super::right_iterate`].

    use std::collections::BTreeSet;

    use crate::algebra::{DevicePath, DirectedDevice, PathSet, ZoneId};
    use crate::matrix::PathMatrix;
    use crate::topology::ZoneConduitModel;

    struct Walk<'a> {
        model: &'a ZoneConduitModel,
        source: usize,
        visited: Vec<bool>,
        used: BTreeSet<&'a str>,
        steps: Vec<DirectedDevice>,
        found: Vec<PathSet>,
    }

    impl<'a> Walk<'a> {
        fn extend(&mut self, at: ZoneId) {
            for t in self.model.outgoing(at) {
                let to = t.to_zone().index();
                if self.visited[to] || self.used.contains(t.device()) {
                    continue;
                }
                self.visited[to] = true;
                self.used.insert(t.device());
                self.steps.push(t.clone());

                let path = DevicePath::new(self.steps.clone())
                    .expect("walk keeps chaining, zone and device invariants");
                self.found[to].insert(path);
                if self.model.is_transitive(t.to_zone()) {
                    self.extend(t.to_zone());
                }

                self.steps.pop();
                self.used.remove(t.device());
                self.visited[to] = false;
            }
        }
    }

    /// Every chained, zone-elementary, device-distinct path whose
    /// intermediate zones are all transitive, with `{ε}` on the diagonal.
    pub fn brute_force_paths(model: &ZoneConduitModel) -> PathMatrix {
        let n = model.zone_count();
        let mut out = PathMatrix::zero(n);
        for source in 0..n {
            let mut walk = Walk {
                model,
                source,
                visited: vec![false; n],
                used: BTreeSet::new(),
                steps: Vec::new(),
                found: vec![PathSet::zero(); n],
            };
            walk.visited[source] = true;
            walk.extend(ZoneId(source));
            walk.found[walk.source] = PathSet::one();
            for (target, paths) in walk.found.into_iter().enumerate() {
                out.set(source, target, paths);
            }
        }
        out
    }
}
