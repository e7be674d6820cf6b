use super::{Elem, Field, FieldError, Matrix};

/// Output of [`solve_linear`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolution {
    /// Particular solution with every free variable set to zero.
    pub solution: Matrix,
    /// Basis of the right kernel of the coefficient matrix, one vector per free column.
    pub kernel: Vec<Vec<Elem>>,
    pub rank: usize,
}

/// Reduced row echelon form of `[m | rhs]`, eliminating only over the columns of `m`.
/// Returns the pivot column of each leading row.
fn rref(field: &Field, a: &mut [Vec<Elem>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == a.len() {
            break;
        }
        let Some(found) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, found);
        let inv = field.inv(a[row][col]);
        for v in a[row].iter_mut() {
            *v = field.mul(*v, inv);
        }
        let pivot_row = a[row].clone();
        for (r, other) in a.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let c = other[col];
            if c.is_zero() {
                continue;
            }
            for (x, &y) in other.iter_mut().zip(&pivot_row).skip(col) {
                *x = field.sub(*x, field.mul(c, y));
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

fn augmented(m: &Matrix, rhs: Option<&Matrix>) -> Vec<Vec<Elem>> {
    (0..m.rows())
        .map(|r| {
            let mut v = m.row(r).to_vec();
            if let Some(b) = rhs {
                v.extend_from_slice(b.row(r));
            }
            v
        })
        .collect()
}

fn kernel_from(field: &Field, a: &[Vec<Elem>], pivots: &[usize], ncols: usize) -> Vec<Vec<Elem>> {
    let mut is_pivot = vec![None; ncols];
    for (r, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(r);
    }
    (0..ncols)
        .filter(|&c| is_pivot[c].is_none())
        .map(|free| {
            let mut v = vec![Elem::ZERO; ncols];
            v[free] = Elem::ONE;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(a[r][free]);
            }
            v
        })
        .collect()
}

/// Solves `m * X = rhs` by Gauss-Jordan elimination.
///
/// Pivots are the first nonzero entry found scanning columns left to right and
/// rows top to bottom, so results are reproducible.
pub fn solve_linear(m: &Matrix, rhs: &Matrix) -> Result<LinearSolution, FieldError> {
    if m.field() != rhs.field() {
        return Err(FieldError::MismatchedFields(
            m.field().order(),
            rhs.field().order(),
        ));
    }
    if m.rows() != rhs.rows() {
        return Err(FieldError::DimensionMismatch(format!(
            "{} equations but {} right-hand-side rows",
            m.rows(),
            rhs.rows()
        )));
    }
    let field = m.field();
    let n = m.cols();
    let mut a = augmented(m, Some(rhs));
    let pivots = rref(field, &mut a, n);
    let rank = pivots.len();
    if a[rank..]
        .iter()
        .any(|row| row[n..].iter().any(|e| !e.is_zero()))
    {
        return Err(FieldError::Inconsistent);
    }
    let mut solution = Matrix::zeros(field, n, rhs.cols());
    for (r, &pc) in pivots.iter().enumerate() {
        for j in 0..rhs.cols() {
            solution.set(pc, j, a[r][n + j]);
        }
    }
    Ok(LinearSolution {
        solution,
        kernel: kernel_from(field, &a, &pivots, n),
        rank,
    })
}

pub fn kernel_basis(m: &Matrix) -> Vec<Vec<Elem>> {
    let mut a = augmented(m, None);
    let pivots = rref(m.field(), &mut a, m.cols());
    kernel_from(m.field(), &a, &pivots, m.cols())
}

pub fn rank(m: &Matrix) -> usize {
    let mut a = augmented(m, None);
    rref(m.field(), &mut a, m.cols()).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn det3(f: &Field, m: &Matrix) -> Elem {
        // cofactor expansion, independent of elimination
        let g = |r, c| m.get(r, c);
        let minor = |c1, c2| f.sub(f.mul(g(1, c1), g(2, c2)), f.mul(g(1, c2), g(2, c1)));
        let t0 = f.mul(g(0, 0), minor(1, 2));
        let t1 = f.mul(g(0, 1), minor(0, 2));
        let t2 = f.mul(g(0, 2), minor(0, 1));
        f.add(f.sub(t0, t1), t2)
    }

    #[test]
    fn identity_returns_rhs() {
        let f = Field::new(7).unwrap();
        let b = Matrix::from_rows(&f, &[vec![1, 2], vec![3, 4], vec![5, 6]]).unwrap();
        let s = solve_linear(&Matrix::identity(&f, 3), &b).unwrap();
        assert_eq!(s.solution, b);
        assert!(s.kernel.is_empty());
        assert_eq!(s.rank, 3);
    }

    #[test]
    fn vandermonde_gf5() {
        let f = Field::new(5).unwrap();
        let v = Matrix::from_rows(&f, &[vec![1, 1, 1], vec![1, 2, 4], vec![1, 3, 4]]).unwrap();
        // (2-1)(3-1)(3-2) = 2 in GF(5)
        assert_eq!(det3(&f, &v), Elem(2));
        let b = Matrix::from_rows(&f, &[vec![1], vec![0], vec![3]]).unwrap();
        let s = solve_linear(&v, &b).unwrap();
        assert_eq!(s.rank, 3);
        assert_eq!(v.matmul(&s.solution).unwrap(), b);
        // uniqueness by enumeration of all 125 candidate vectors
        let hits = (0..125u32)
            .filter(|&code| {
                let x =
                    Matrix::from_rows(&f, &[vec![code % 5], vec![code / 5 % 5], vec![code / 25]])
                        .unwrap();
                v.matmul(&x).unwrap() == b
            })
            .count();
        assert_eq!(hits, 1);
    }

    #[test]
    fn zero_system_has_full_kernel() {
        let f = Field::new(3).unwrap();
        let s = solve_linear(&Matrix::zeros(&f, 2, 4), &Matrix::zeros(&f, 2, 1)).unwrap();
        assert_eq!(s.rank, 0);
        assert_eq!(s.kernel.len(), 4);
    }

    #[test]
    fn inconsistent_is_distinct() {
        let f = Field::new(3).unwrap();
        let m = Matrix::from_rows(&f, &[vec![1, 1], vec![2, 2]]).unwrap();
        let b = Matrix::from_rows(&f, &[vec![1], vec![1]]).unwrap();
        assert_eq!(solve_linear(&m, &b).unwrap_err(), FieldError::Inconsistent);
    }

    fn arb_system() -> impl Strategy<Value = (u32, usize, usize, Vec<u32>, Vec<u32>)> {
        (
            prop::sample::select(vec![2u32, 3, 4, 5, 7, 8, 9, 16]),
            1usize..6,
            1usize..6,
        )
            .prop_flat_map(|(q, r, c)| {
                (
                    Just(q),
                    Just(r),
                    Just(c),
                    prop::collection::vec(0..q, r * c),
                    prop::collection::vec(0..q, c),
                )
            })
    }

    proptest! {
        #[test]
        fn solution_and_kernel_are_valid((q, r, c, entries, x0) in arb_system()) {
            let f = Field::new(q).unwrap();
            let m = Matrix::from_vec(&f, r, c, entries.into_iter().map(|v| Elem(v as u16)).collect()).unwrap();
            let x = Matrix::from_vec(&f, c, 1, x0.into_iter().map(|v| Elem(v as u16)).collect()).unwrap();
            // consistent by construction
            let b = m.matmul(&x).unwrap();
            let s = solve_linear(&m, &b).unwrap();
            prop_assert_eq!(m.matmul(&s.solution).unwrap(), b);
            prop_assert_eq!(s.rank + s.kernel.len(), c);
            prop_assert_eq!(s.rank, rank(&m));
            for k in &s.kernel {
                let kv = Matrix::from_vec(&f, c, 1, k.clone()).unwrap();
                prop_assert!(m.matmul(&kv).unwrap().is_zero());
            }
        }
    }
}
