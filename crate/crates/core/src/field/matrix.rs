use std::fmt;

use rand::Rng;

use super::{Elem, Field, FieldError};

/// Dense row-major matrix over a [`Field`].
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix({:?}, {}x{}) ", self.field, self.rows, self.cols)?;
        f.debug_list()
            .entries((0..self.rows).map(|r| self.row(r).iter().map(|e| e.0).collect::<Vec<_>>()))
            .finish()
    }
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![Elem::ZERO; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Elem::ONE);
        }
        m
    }

    pub fn from_vec(
        field: &Field,
        rows: usize,
        cols: usize,
        data: Vec<Elem>,
    ) -> Result<Matrix, FieldError> {
        if data.len() != rows * cols {
            return Err(FieldError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|e| e.to_int() >= field.order()) {
            return Err(FieldError::ElementOutOfRange {
                value: bad.to_int(),
                q: field.order(),
            });
        }
        Ok(Matrix {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    /// Matrix from integer encodings, one inner `Vec` per row.
    pub fn from_rows(field: &Field, rows: &[Vec<u32>]) -> Result<Matrix, FieldError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(FieldError::DimensionMismatch("ragged rows".into()));
            }
            for &v in r {
                data.push(field.elem(v)?);
            }
        }
        Matrix::from_vec(field, rows.len(), cols, data)
    }

    pub fn random<R: Rng + ?Sized>(field: &Field, rows: usize, cols: usize, rng: &mut R) -> Matrix {
        let q = field.order();
        let data = (0..rows * cols)
            .map(|_| Elem(rng.random_range(0..q) as u16))
            .collect();
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Elem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Elem> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    fn same_field(&self, other: &Matrix) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::MismatchedFields(
                self.field.order(),
                other.field.order(),
            ))
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, FieldError> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(FieldError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, FieldError> {
        self.same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(FieldError::DimensionMismatch(format!(
                "{}x{} plus {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(Matrix {
            data,
            ..self.clone()
        })
    }

    /// `self += c * other`, shapes must agree.
    pub fn add_scaled(&mut self, c: Elem, other: &Matrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        if c.is_zero() {
            return;
        }
        let f = self.field.clone();
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = f.add(*a, f.mul(c, b));
        }
    }

    pub fn scale(&self, c: Elem) -> Matrix {
        let f = &self.field;
        Matrix {
            data: self.data.iter().map(|&a| f.mul(c, a)).collect(),
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    /// Copy of the block with top-left `(r0, c0)` and the given shape.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut out = Matrix::zeros(&self.field, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(r, c, self.get(r0 + r, c0 + c));
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.get(r, c));
            }
        }
    }

    /// Text form: `q rows cols` header, then one line per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.field.order(), self.rows, self.cols);
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|e| e.0.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses the text form; the header's `q` must match `field`.
    pub fn parse_text(field: &Field, text: &str) -> Result<Matrix, FieldError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| FieldError::Parse("empty input".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| FieldError::Parse(format!("bad header token {t:?}")))
            })
            .collect::<Result<_, _>>()?;
        let [q, rows, cols] = nums[..] else {
            return Err(FieldError::Parse("header must be `q rows cols`".into()));
        };
        if q as u32 != field.order() {
            return Err(FieldError::Parse(format!(
                "header field order {q} but expected {}",
                field.order()
            )));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| FieldError::Parse(format!("missing row {r}")))?;
            let before = data.len();
            for t in line.split_whitespace() {
                let v: u32 = t
                    .parse()
                    .map_err(|_| FieldError::Parse(format!("bad entry {t:?}")))?;
                data.push(field.elem(v)?);
            }
            if data.len() - before != cols {
                return Err(FieldError::Parse(format!(
                    "row {r} has {} entries",
                    data.len() - before
                )));
            }
        }
        if lines.next().is_some() {
            return Err(FieldError::Parse("trailing rows".into()));
        }
        Matrix::from_vec(field, rows, cols, data)
    }
}
