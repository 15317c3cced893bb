//! Signed differentials of the three complexes and the connecting map between them.

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{DistanceMatrix, Graph};
use crate::linalg::{Column, SparseMatrix};
use crate::trail::{enumerate_trails, ChainBasis, Theory, Trail};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FaceError {
    #[error("face index {i} is not interior for a {k}-trail")]
    NotInterior { i: usize, k: usize },
}

/// Length of the tuple obtained by deleting landmark `i`, computed from the three
/// distances around it. `None` when the deletion joins two equal landmarks.
#[inline]
fn face_length(d: &DistanceMatrix, t: &Trail, i: usize) -> Option<u32> {
    let x = &t.landmarks;
    if x[i - 1] == x[i + 1] {
        return None;
    }
    let joined = d.get(x[i - 1], x[i + 1]);
    Some(t.length - d.get(x[i - 1], x[i]) - d.get(x[i], x[i + 1]) + joined)
}

/// The `i`-th face of `t`: the trail without `x_i` if that keeps the length, else `None`.
pub fn face_map(d: &DistanceMatrix, t: &Trail, i: usize) -> Result<Option<Trail>, FaceError> {
    let k = t.k();
    if i == 0 || i >= k {
        return Err(FaceError::NotInterior { i, k });
    }
    if face_length(d, t, i) != Some(t.length) {
        return Ok(None);
    }
    let mut landmarks = t.landmarks.clone();
    landmarks.remove(i);
    Ok(Some(Trail {
        landmarks,
        length: t.length,
    }))
}

/// Matrix of the differential from `source` into `target`. Faces that are absent
/// from `target` are dropped, which realizes both the eulerian restriction and the
/// quotient by eulerian trails.
pub fn boundary_between(d: &DistanceMatrix, source: &ChainBasis, target: &ChainBasis) -> SparseMatrix {
    let cols: Vec<Column> = source
        .generators()
        .par_iter()
        .map(|t| {
            let mut col = Vec::new();
            let mut face = Vec::with_capacity(t.landmarks.len().saturating_sub(1));
            for i in 1..t.k() {
                if face_length(d, t, i) != Some(t.length) {
                    continue;
                }
                face.clear();
                face.extend_from_slice(&t.landmarks[..i]);
                face.extend_from_slice(&t.landmarks[i + 1..]);
                if let Some(r) = target.position(&face) {
                    col.push((r, if i % 2 == 0 { 1 } else { -1 }));
                }
            }
            col
        })
        .collect();
    SparseMatrix::new(target.len(), cols)
}

/// Differential `(k, l) -> (k-1, l)` of the given complex, with its source and target bases.
#[derive(Clone, Debug)]
pub struct BoundaryMatrix {
    pub source: ChainBasis,
    pub target: ChainBasis,
    pub matrix: SparseMatrix,
}

pub fn boundary_matrix(g: &Graph, d: &DistanceMatrix, k: usize, l: u32, theory: Theory) -> BoundaryMatrix {
    let source = enumerate_trails(g, d, k, l, theory);
    let target = match k.checked_sub(1) {
        Some(km1) => enumerate_trails(g, d, km1, l, theory),
        None => ChainBasis::empty(theory, 0, l),
    };
    let matrix = boundary_between(d, &source, &target);
    BoundaryMatrix {
        source,
        target,
        matrix,
    }
}

/// Chain-level connecting map `DMC_{k+1,l} -> EMC_{k,l}`: the eulerian part of the
/// full differential of a non-eulerian trail.
pub fn connecting_map(g: &Graph, d: &DistanceMatrix, k: usize, l: u32) -> BoundaryMatrix {
    let source = enumerate_trails(g, d, k + 1, l, Theory::Dmc);
    let target = enumerate_trails(g, d, k, l, Theory::Emc);
    let matrix = boundary_between(d, &source, &target);
    BoundaryMatrix {
        source,
        target,
        matrix,
    }
}
