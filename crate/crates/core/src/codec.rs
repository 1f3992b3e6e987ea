//! MDS coding of the data matrix.
//!
//! `X` (q×r) is split row-wise into `L` blocks `X_1..X_L`. The cs-matrix
//! `X̃_i = Σ_ℓ g_{i,ℓ} X_ℓ` uses row `i` of a Z×L Vandermonde generator with
//! evaluation points `1..=Z`, so any `L` rows of the generator are invertible
//! and any `L` cs-matrices recover every block product `X_ℓ·w`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::field::{FieldError, FieldMatrix, PrimeField};
use crate::model::CsIndex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("need p > Z for distinct evaluation points (p = {p}, Z = {z})")]
    PrimeTooSmall { p: u64, z: usize },
    #[error("need Z >= L >= 1 (Z = {z}, L = {l})")]
    BadShape { z: usize, l: usize },
    #[error("X has {rows} rows, not divisible by L = {l}")]
    RowsNotDivisible { rows: usize, l: usize },
    #[error("vector length {got}, expected {expected}")]
    VectorLength { got: usize, expected: usize },
    #[error("row {row} out of range for cs-matrix with {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("cs-matrix index {0} out of range")]
    CsOutOfRange(CsIndex),
    #[error("expected {expected} partial results, got {got}")]
    WrongResultCount { got: usize, expected: usize },
    #[error("partial results mix rows {0} and {1}")]
    MixedRows(usize, usize),
    #[error("cs-matrix {0} appears twice")]
    DuplicateCs(CsIndex),
    #[error("internal: generator rows {0:?} are singular")]
    SingularSubset(Vec<CsIndex>),
}

/// Vandermonde generator `g_{i,ℓ} = x_i^{ℓ−1}` with `x_i = i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    field: PrimeField,
    matrix: FieldMatrix,
    eval_points: Vec<u64>,
}

pub fn build_generator(z: usize, l: usize, p: u64) -> Result<Generator, CodecError> {
    let field = PrimeField::new(p)?;
    if l == 0 || z < l {
        return Err(CodecError::BadShape { z, l });
    }
    if p <= z as u64 {
        return Err(CodecError::PrimeTooSmall { p, z });
    }
    let eval_points: Vec<u64> = (1..=z as u64).collect();
    let mut matrix = FieldMatrix::zeros(z, l);
    for (i, &x) in eval_points.iter().enumerate() {
        let mut acc = 1;
        for col in 0..l {
            matrix.set(i, col, acc);
            acc = field.mul(acc, x);
        }
    }
    Ok(Generator {
        field,
        matrix,
        eval_points,
    })
}

impl Generator {
    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }

    pub fn eval_points(&self) -> &[u64] {
        &self.eval_points
    }

    /// Z, the number of cs-matrices.
    pub fn total(&self) -> usize {
        self.matrix.rows()
    }

    /// L, the number of uncoded blocks.
    pub fn blocks(&self) -> usize {
        self.matrix.cols()
    }

    /// Generator row of the 1-based cs-matrix `i`.
    pub fn row(&self, i: CsIndex) -> &[u64] {
        self.matrix.row(i - 1)
    }

    /// The L×L submatrix formed by the rows of `subset` (ascending order).
    pub fn submatrix(&self, subset: &BTreeSet<CsIndex>) -> Result<FieldMatrix, CodecError> {
        if let Some(&bad) = subset.iter().find(|&&i| i == 0 || i > self.total()) {
            return Err(CodecError::CsOutOfRange(bad));
        }
        let rows: Vec<usize> = subset.iter().map(|&i| i - 1).collect();
        Ok(self.matrix.select_rows(&rows))
    }
}

/// One coded sub-matrix `X̃_i` with `q/L` rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsMatrix {
    pub index: CsIndex,
    pub rows: FieldMatrix,
}

/// `X̃_i^{(j)}·w` for cs-matrix `cs_index` and 0-based row `row`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialResult {
    pub cs_index: CsIndex,
    pub row: usize,
    pub value: u64,
}

/// Encodes `x` into the Z cs-matrices. Entries of `x` must already lie in `[0, p)`.
pub fn encode(x: &FieldMatrix, generator: &Generator) -> Result<Vec<CsMatrix>, CodecError> {
    let l = generator.blocks();
    if !x.rows().is_multiple_of(l) || x.rows() == 0 {
        return Err(CodecError::RowsNotDivisible { rows: x.rows(), l });
    }
    let block = x.rows() / l;
    let field = generator.field();
    let out = (1..=generator.total())
        .map(|i| {
            let g = generator.row(i);
            let mut rows = FieldMatrix::zeros(block, x.cols());
            for (ell, &coef) in g.iter().enumerate() {
                if coef == 0 {
                    continue;
                }
                for j in 0..block {
                    let src = x.row(ell * block + j);
                    let dst = rows.row_mut(j);
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d = field.add(*d, field.mul(coef, s));
                    }
                }
            }
            CsMatrix { index: i, rows }
        })
        .collect();
    Ok(out)
}

/// What a worker sends back for the requested rows of one stored cs-matrix.
pub fn worker_compute(
    cs: &CsMatrix,
    rows: impl IntoIterator<Item = usize>,
    w: &[u64],
    field: &PrimeField,
) -> Result<Vec<PartialResult>, CodecError> {
    if w.len() != cs.rows.cols() {
        return Err(CodecError::VectorLength {
            got: w.len(),
            expected: cs.rows.cols(),
        });
    }
    rows.into_iter()
        .map(|j| {
            if j >= cs.rows.rows() {
                return Err(CodecError::RowOutOfRange {
                    row: j,
                    rows: cs.rows.rows(),
                });
            }
            Ok(PartialResult {
                cs_index: cs.index,
                row: j,
                value: field.dot(cs.rows.row(j), w),
            })
        })
        .collect()
}

/// Inverse of one generator submatrix, reused for every row computed by the
/// same cs-matrix set.
#[derive(Debug, Clone)]
pub struct SubsetDecoder {
    subset: Vec<CsIndex>,
    inverse: FieldMatrix,
    field: PrimeField,
}

impl SubsetDecoder {
    pub fn new(generator: &Generator, subset: &BTreeSet<CsIndex>) -> Result<Self, CodecError> {
        if subset.len() != generator.blocks() {
            return Err(CodecError::WrongResultCount {
                got: subset.len(),
                expected: generator.blocks(),
            });
        }
        let sub = generator.submatrix(subset)?;
        let inverse = sub
            .inverse(generator.field())
            .map_err(|_| CodecError::SingularSubset(subset.iter().copied().collect()))?;
        Ok(Self {
            subset: subset.iter().copied().collect(),
            inverse,
            field: *generator.field(),
        })
    }

    pub fn subset(&self) -> &[CsIndex] {
        &self.subset
    }

    /// Recovers `(X_1 w)_j, …, (X_L w)_j` from coded values listed in the
    /// decoder's subset order.
    pub fn decode(&self, coded: &[u64]) -> Result<Vec<u64>, CodecError> {
        Ok(self.inverse.mul_vec(&self.field, coded)?)
    }
}

/// Decodes one row from `L` partial results with distinct cs-matrices.
pub fn decode_row(
    results: &[PartialResult],
    generator: &Generator,
) -> Result<Vec<u64>, CodecError> {
    let l = generator.blocks();
    if results.len() != l {
        return Err(CodecError::WrongResultCount {
            got: results.len(),
            expected: l,
        });
    }
    let row = results[0].row;
    if let Some(other) = results.iter().find(|r| r.row != row) {
        return Err(CodecError::MixedRows(row, other.row));
    }
    let mut subset = BTreeSet::new();
    for r in results {
        if !subset.insert(r.cs_index) {
            return Err(CodecError::DuplicateCs(r.cs_index));
        }
    }
    let decoder = SubsetDecoder::new(generator, &subset)?;
    let mut sorted = results.to_vec();
    sorted.sort_by_key(|r| r.cs_index);
    let coded: Vec<u64> = sorted.iter().map(|r| r.value).collect();
    decoder.decode(&coded)
}
