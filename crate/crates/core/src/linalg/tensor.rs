use super::{CMatrix, ZERO};
use crate::{Error, Result};

/// Which tensor factor of a bipartite space `A ⊗ B` an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// The left factor `A`.
    First,
    /// The right factor `B`.
    Second,
}

/// Kronecker product; the first argument is the left (slow-index) factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `1_{d} ⊗ B`.
pub fn embed_left(d: usize, b: &CMatrix) -> CMatrix {
    let n = b.nrows();
    let m = b.ncols();
    let mut out = CMatrix::zeros(d * n, d * m);
    for k in 0..d {
        out.view_mut((k * n, k * m), (n, m)).copy_from(b);
    }
    out
}

/// Partial trace of an operator on `A ⊗ B` with `dims = (d_A, d_B)`,
/// tracing out the factor named by `over`.
pub fn partial_trace(a: &CMatrix, dims: (usize, usize), over: Factor) -> Result<CMatrix> {
    let (da, db) = dims;
    let n = da * db;
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "partial trace over {da}x{db} factors of a {}x{} operator",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(match over {
        Factor::First => {
            let mut out = CMatrix::zeros(db, db);
            for k in 0..da {
                out += a.view((k * db, k * db), (db, db));
            }
            out
        }
        Factor::Second => {
            let mut out = CMatrix::from_element(da, da, ZERO);
            for i in 0..da {
                for j in 0..da {
                    let mut s = ZERO;
                    for k in 0..db {
                        s += a[(i * db + k, j * db + k)];
                    }
                    out[(i, j)] = s;
                }
            }
            out
        }
    })
}
