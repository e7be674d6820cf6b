//! Truncated Laurent series in a local parameter `t`.
//!
//! A series knows its coefficients at exponents `lead..prec` and nothing at
//! or beyond `prec`. Every operation propagates the precision it can
//! actually guarantee, and reading past it is an error rather than an
//! implicit zero.

use std::fmt;

use thiserror::Error;

use crate::field::{Elem, Field};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("coefficient at t^{k} requested but the series is only known below t^{prec}")]
    PrecisionExceeded { k: i64, prec: i64 },
    #[error("cannot invert a series that is zero to its known precision (prec {prec})")]
    NotInvertible { prec: i64 },
}

#[derive(Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    field: Field,
    /// Exponent of `coeffs[0]`. Equal to `prec` for the zero series.
    lead: i64,
    prec: i64,
    coeffs: Vec<Elem>,
}

impl LaurentSeries {
    /// Series with `coeffs[i]` at exponent `lead + i`, known below `prec`.
    /// Coefficients at or beyond `prec` are dropped; leading zeros are stripped.
    pub fn new(field: &Field, lead: i64, mut coeffs: Vec<Elem>, prec: i64) -> LaurentSeries {
        let keep = (prec - lead).clamp(0, coeffs.len() as i64) as usize;
        coeffs.truncate(keep);
        let mut s = LaurentSeries {
            field: field.clone(),
            lead,
            prec,
            coeffs,
        };
        s.normalize();
        s
    }

    pub fn zero(field: &Field, prec: i64) -> LaurentSeries {
        LaurentSeries {
            field: field.clone(),
            lead: prec,
            prec,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(field: &Field, c: Elem, prec: i64) -> LaurentSeries {
        LaurentSeries::monomial(field, c, 0, prec)
    }

    pub fn one(field: &Field, prec: i64) -> LaurentSeries {
        LaurentSeries::constant(field, Elem::ONE, prec)
    }

    /// `c * t^k + O(t^prec)`.
    pub fn monomial(field: &Field, c: Elem, k: i64, prec: i64) -> LaurentSeries {
        LaurentSeries::new(field, k, vec![c], prec)
    }

    fn normalize(&mut self) {
        let nz = self.coeffs.iter().position(|c| !c.is_zero());
        match nz {
            Some(i) => {
                self.coeffs.drain(..i);
                self.lead += i as i64;
                while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                    self.coeffs.pop();
                }
            }
            None => {
                self.coeffs.clear();
                self.lead = self.prec;
            }
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Exclusive upper bound of known exponents.
    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// Exact valuation, or `None` when the series is zero to its precision
    /// (the true valuation is then only known to be at least `prec`).
    pub fn valuation(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.lead)
    }

    /// Lower bound on the valuation: exact when nonzero, `prec` otherwise.
    pub fn valuation_bound(&self) -> i64 {
        self.lead
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of known coefficients past the leading term.
    pub fn relative_precision(&self) -> i64 {
        self.prec - self.lead
    }

    pub fn coeff_at(&self, k: i64) -> Result<Elem, SeriesError> {
        if k >= self.prec {
            return Err(SeriesError::PrecisionExceeded { k, prec: self.prec });
        }
        if k < self.lead {
            return Ok(Elem::ZERO);
        }
        Ok(self
            .coeffs
            .get((k - self.lead) as usize)
            .copied()
            .unwrap_or(Elem::ZERO))
    }

    /// Lowers the precision to `min(prec, self.prec)`.
    pub fn truncate(&self, prec: i64) -> LaurentSeries {
        let prec = prec.min(self.prec);
        LaurentSeries::new(&self.field, self.lead, self.coeffs.clone(), prec)
    }

    /// Multiplication by `t^k` (exact).
    pub fn shift(&self, k: i64) -> LaurentSeries {
        LaurentSeries {
            field: self.field.clone(),
            lead: self.lead + k,
            prec: self.prec + k,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn scale(&self, c: Elem) -> LaurentSeries {
        let f = &self.field;
        LaurentSeries::new(
            f,
            self.lead,
            self.coeffs.iter().map(|&a| f.mul(c, a)).collect(),
            self.prec,
        )
    }

    pub fn neg(&self) -> LaurentSeries {
        self.scale(self.field.neg(Elem::ONE))
    }

    pub fn add(&self, other: &LaurentSeries) -> LaurentSeries {
        debug_assert!(self.field == other.field);
        let f = &self.field;
        let prec = self.prec.min(other.prec);
        let lead = self.lead.min(other.lead).min(prec);
        let len = (prec - lead).max(0) as usize;
        let mut coeffs = vec![Elem::ZERO; len];
        for s in [self, other] {
            for (i, &c) in s.coeffs.iter().enumerate() {
                let k = s.lead + i as i64;
                if k < prec {
                    let idx = (k - lead) as usize;
                    coeffs[idx] = f.add(coeffs[idx], c);
                }
            }
        }
        LaurentSeries::new(f, lead, coeffs, prec)
    }

    pub fn sub(&self, other: &LaurentSeries) -> LaurentSeries {
        self.add(&other.neg())
    }

    /// Cauchy product, known below `min(prec_a + v(b), prec_b + v(a))`.
    pub fn mul(&self, other: &LaurentSeries) -> LaurentSeries {
        debug_assert!(self.field == other.field);
        let f = &self.field;
        let prec = (self.prec + other.lead).min(other.prec + self.lead);
        let lead = self.lead + other.lead;
        if self.is_zero() || other.is_zero() {
            return LaurentSeries::zero(f, prec);
        }
        let len = (prec - lead).max(0) as usize;
        let mut coeffs = vec![Elem::ZERO; len];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] = f.add(coeffs[i + j], f.mul(a, b));
            }
        }
        LaurentSeries::new(f, lead, coeffs, prec)
    }

    /// Multiplicative inverse, known below `prec - 2 v`.
    pub fn inv(&self) -> Result<LaurentSeries, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::NotInvertible { prec: self.prec });
        }
        let f = &self.field;
        let v = self.lead;
        let n = (self.prec - v) as usize;
        let a0_inv = f.inv(self.coeffs[0]);
        let a = |i: usize| self.coeffs.get(i).copied().unwrap_or(Elem::ZERO);
        let mut b = Vec::with_capacity(n);
        b.push(a0_inv);
        for k in 1..n {
            let mut acc = Elem::ZERO;
            for (j, &bj) in b.iter().enumerate() {
                acc = f.add(acc, f.mul(a(k - j), bj));
            }
            b.push(f.neg(f.mul(acc, a0_inv)));
        }
        Ok(LaurentSeries::new(f, -v, b, self.prec - 2 * v))
    }

    pub fn div(&self, other: &LaurentSeries) -> Result<LaurentSeries, SeriesError> {
        Ok(self.mul(&other.inv()?))
    }

    /// `self^n`; `self^0` is `1` known to the relative precision of `self`.
    pub fn pow(&self, n: u32) -> LaurentSeries {
        let mut result: Option<LaurentSeries> = None;
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    Some(r) => r.mul(&base),
                    None => base.clone(),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result.unwrap_or_else(|| LaurentSeries::one(&self.field, self.relative_precision().max(1)))
    }

    /// Stored `(exponent, coefficient)` pairs with nonzero coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Elem)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, &c)| (self.lead + i as i64, c))
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.terms() {
            write!(f, "{c}*t^{k} + ")?;
        }
        write!(f, "O(t^{})", self.prec)
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
