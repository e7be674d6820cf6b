use std::collections::BTreeMap;

use super::{unit_coefficient, PartitionSpec, RecoveryMap, SchemeError, SchemeInstance};
use crate::field::{solve_linear, FieldError, Matrix};

/// What worker `s` receives: `A~ = sum A_ij f_ij(P_s)` and `B~ = sum B_kw g_kw(P_s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Payload {
    pub worker: usize,
    pub a: Matrix,
    pub b: Matrix,
}

fn shape_check(what: &str, m: &Matrix, rows: usize, cols: usize) -> Result<(), SchemeError> {
    if m.rows() != rows || m.cols() != cols {
        return Err(SchemeError::DimensionMismatch(format!(
            "{what} is {}x{}, expected {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Block-scalar combination `sum_c M_c * evals[s][c]` over a grid of blocks.
fn combine_blocks(
    m: &Matrix,
    grid_cols: usize,
    block: (usize, usize),
    evals: &Matrix,
    s: usize,
) -> Matrix {
    let field = m.field();
    let mut out = Matrix::zeros(field, block.0, block.1);
    for c in 0..evals.cols() {
        let coef = evals.get(s, c);
        if coef.is_zero() {
            continue;
        }
        let (bi, bj) = (c / grid_cols, c % grid_cols);
        out.add_scaled(coef, &m.block(bi * block.0, bj * block.1, block.0, block.1));
    }
    out
}

/// Encodes `A` and `B` into one payload per worker.
pub fn encode(inst: &SchemeInstance, a: &Matrix, b: &Matrix) -> Result<Vec<Payload>, SchemeError> {
    let PartitionSpec { t, r, s, n, p, .. } = inst.partition;
    shape_check("A", a, t, r)?;
    shape_check("B", b, r, s)?;
    let field = inst.curve.field();
    if a.field() != field || b.field() != field {
        return Err(FieldError::MismatchedFields(a.field().order(), field.order()).into());
    }
    Ok((0..inst.workers())
        .map(|w| Payload {
            worker: w,
            a: combine_blocks(a, p, inst.partition.a_block(), &inst.f_evals, w),
            b: combine_blocks(b, n, inst.partition.b_block(), &inst.g_evals, w),
        })
        .collect())
}

/// The worker's job: one block product.
pub fn worker_compute(payload: &Payload) -> Result<Matrix, SchemeError> {
    payload
        .a
        .matmul(&payload.b)
        .map_err(|e| SchemeError::DimensionMismatch(e.to_string()))
}

/// Recovers `AB` from at least `R` worker results.
pub fn decode(
    inst: &SchemeInstance,
    results: &BTreeMap<usize, Matrix>,
) -> Result<Matrix, SchemeError> {
    if results.len() < inst.threshold {
        return Err(SchemeError::InsufficientResults {
            got: results.len(),
            needed: inst.threshold,
        });
    }
    try_decode(inst, results)
}

/// Like [`decode`] but attempts any number of results, failing with
/// `Underdetermined` when they do not pin down `h`.
pub fn try_decode(
    inst: &SchemeInstance,
    results: &BTreeMap<usize, Matrix>,
) -> Result<Matrix, SchemeError> {
    let field = inst.curve.field();
    let (cr, cc) = inst.partition.c_block();
    let k = inst.dimension();
    let rows = results.len();
    let mut system = Matrix::zeros(field, rows, k);
    let mut rhs = Matrix::zeros(field, rows, cr * cc);
    for (row, (&w, h)) in results.iter().enumerate() {
        if w >= inst.workers() {
            return Err(SchemeError::UnknownWorker(w));
        }
        shape_check("worker result", h, cr, cc)?;
        for c in 0..k {
            system.set(row, c, inst.code_evals.get(w, c));
        }
        for (c, &v) in h.entries().iter().enumerate() {
            rhs.set(row, c, v);
        }
    }
    let sol = match solve_linear(&system, &rhs) {
        Ok(sol) => sol,
        Err(FieldError::Inconsistent) => return Err(SchemeError::InconsistentResults),
        Err(e) => return Err(e.into()),
    };
    if sol.rank < k {
        return Err(SchemeError::Underdetermined { rank: sol.rank, k });
    }
    // X_kappa as a cr x cc block
    let coord = |kappa: usize| -> Matrix {
        let row = sol.solution.row(kappa).to_vec();
        Matrix::from_vec(field, cr, cc, row).expect("block shape")
    };
    let PartitionSpec { t, s, m, n, .. } = inst.partition;
    let mut out = Matrix::zeros(field, t, s);
    for i in 0..m {
        for w in 0..n {
            let block = match &inst.recovery {
                RecoveryMap::Positions(pos) => coord(pos[i * n + w]),
                RecoveryMap::Coefficients(exps) => {
                    let mut acc = Matrix::zeros(field, cr, cc);
                    for (kappa, lam) in inst.code_basis.expansions_at_p.iter().enumerate() {
                        let c = unit_coefficient(lam, exps[i * n + w])?;
                        if !c.is_zero() {
                            acc.add_scaled(c, &coord(kappa));
                        }
                    }
                    acc
                }
            };
            out.set_block(i * cr, w * cc, &block);
        }
    }
    Ok(out)
}
