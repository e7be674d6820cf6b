//! Exact arithmetic in small finite fields GF(p^e).
//!
//! Elements are stored by their integer encoding: the polynomial-basis
//! element `c_0 + c_1 t + ... + c_{e-1} t^{e-1}` is encoded as
//! `c_0 + c_1 p + ... + c_{e-1} p^{e-1}`. The encoding is stable and is the
//! one used by every text format in this crate.
//!
//! Moduli are fixed per field so encodings are reproducible:
//!
//! | field  | modulus      |
//! |--------|--------------|
//! | GF(4)  | t^2 + t + 1  |
//! | GF(8)  | t^3 + t + 1  |
//! | GF(9)  | t^2 + 1      |
//! | GF(16) | t^4 + t + 1  |
//! | GF(25) | t^2 + 2      |
//!
//! Any other extension field uses the monic irreducible polynomial with the
//! smallest encoding of its low-order coefficients (this rule reproduces every
//! row of the table above).

mod linalg;
mod matrix;

pub use linalg::{kernel_basis, rank, solve_linear, LinearSolution};
pub use matrix::Matrix;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported field order. Addition and multiplication are table
/// driven, so tables are `q * q` entries.
pub const MAX_ORDER: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("field order {0} is not a prime power")]
    NotPrimePower(u32),
    #[error("field order {0} exceeds the supported maximum {MAX_ORDER}")]
    TooLarge(u32),
    #[error("modulus {0:?} is not a monic irreducible polynomial of the requested degree")]
    BadModulus(Vec<u32>),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields (GF({0}) vs GF({1}))")]
    MismatchedFields(u32, u32),
    #[error("element encoding {value} out of range for GF({q})")]
    ElementOutOfRange { value: u32, q: u32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("malformed matrix text: {0}")]
    Parse(String),
}

/// A field element, by integer encoding. Only meaningful together with the
/// [`Field`] it came from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(pub u16);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn to_int(self) -> u32 {
        self.0 as u32
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Tables {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

/// Handle to a finite field GF(p^e). Cheap to clone; all clones share the
/// same immutable tables.
#[derive(Clone)]
pub struct Field {
    t: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.t.q)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.t, &other.t)
            || (self.t.p == other.t.p && self.t.modulus == other.t.modulus)
    }
}

impl Eq for Field {}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^e`.
fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1 && is_prime(p)).then_some((p, e))
}

// Dense polynomials over GF(p), lowest degree first.

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p);
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let c = r[r.len() - 1] * lead_inv % p;
        for (i, &mi) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - c * mi % p) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn mod_inv(a: u32, p: u32) -> u32 {
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut exp = p - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    result as u32
}

fn digits(v: u32, p: u32, e: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(e as usize);
    let mut v = v;
    for _ in 0..e {
        out.push(v % p);
        v /= p;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() as u32 - 1;
    for d in 1..=deg / 2 {
        for low in 0..p.pow(d) {
            let mut cand = digits(low, p, d);
            cand.push(1);
            if poly_rem(m, &cand, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Published moduli, low coefficient first, leading 1 included.
fn fixed_modulus(q: u32) -> Option<Vec<u32>> {
    match q {
        4 => Some(vec![1, 1, 1]),
        8 => Some(vec![1, 1, 0, 1]),
        9 => Some(vec![1, 0, 1]),
        16 => Some(vec![1, 1, 0, 0, 1]),
        25 => Some(vec![2, 0, 1]),
        _ => None,
    }
}

/// First monic irreducible of degree `e` by encoding of its lower coefficients.
fn search_modulus(p: u32, e: u32) -> Vec<u32> {
    for low in 0..p.pow(e) {
        let mut cand = digits(low, p, e);
        cand.push(1);
        if is_irreducible(&cand, p) {
            return cand;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Field {
    /// GF(q) with the documented modulus.
    pub fn new(q: u32) -> Result<Field, FieldError> {
        let (p, e) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        if q > MAX_ORDER {
            return Err(FieldError::TooLarge(q));
        }
        let modulus = if e == 1 {
            vec![0, 1]
        } else {
            fixed_modulus(q).unwrap_or_else(|| search_modulus(p, e))
        };
        Field::with_modulus(p, modulus)
    }

    /// GF(p^e) defined by an explicit monic modulus (low coefficient first).
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Field, FieldError> {
        if !is_prime(p) || modulus.len() < 2 {
            return Err(FieldError::BadModulus(modulus));
        }
        let e = modulus.len() as u32 - 1;
        let q = p.checked_pow(e).ok_or(FieldError::TooLarge(u32::MAX))?;
        if q > MAX_ORDER {
            return Err(FieldError::TooLarge(q));
        }
        if modulus.last() != Some(&1)
            || modulus.iter().any(|&c| c >= p)
            || !is_irreducible(&modulus, p)
        {
            return Err(FieldError::BadModulus(modulus));
        }
        let qs = q as usize;
        let mut add = vec![0u16; qs * qs];
        let mut mul = vec![0u16; qs * qs];
        let dig: Vec<Vec<u32>> = (0..q).map(|v| digits(v, p, e)).collect();
        for a in 0..qs {
            for b in 0..qs {
                let s: Vec<u32> = dig[a]
                    .iter()
                    .zip(&dig[b])
                    .map(|(x, y)| (x + y) % p)
                    .collect();
                add[a * qs + b] = undigits(&s, p) as u16;
                let mut prod = vec![0u32; 2 * e as usize];
                for (i, x) in dig[a].iter().enumerate() {
                    for (j, y) in dig[b].iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let mut r = poly_rem(&prod, &modulus, p);
                r.resize(e as usize, 0);
                mul[a * qs + b] = undigits(&r, p) as u16;
            }
        }
        let mut neg = vec![0u16; qs];
        let mut inv = vec![0u16; qs];
        for a in 0..qs {
            neg[a] = (0..qs).find(|&b| add[a * qs + b] == 0).unwrap() as u16;
            if a != 0 {
                inv[a] = (1..qs).find(|&b| mul[a * qs + b] == 1).unwrap() as u16;
            }
        }
        Ok(Field {
            t: Arc::new(Tables {
                p,
                e,
                q,
                modulus,
                add,
                mul,
                neg,
                inv,
            }),
        })
    }

    pub fn order(&self) -> u32 {
        self.t.q
    }

    pub fn characteristic(&self) -> u32 {
        self.t.p
    }

    pub fn degree(&self) -> u32 {
        self.t.e
    }

    /// Modulus coefficients, lowest degree first, including the leading 1.
    pub fn modulus(&self) -> &[u32] {
        &self.t.modulus
    }

    /// Validated element from its integer encoding.
    pub fn elem(&self, v: u32) -> Result<Elem, FieldError> {
        if v < self.t.q {
            Ok(Elem(v as u16))
        } else {
            Err(FieldError::ElementOutOfRange {
                value: v,
                q: self.t.q,
            })
        }
    }

    /// Image of an integer under `Z -> GF(p) -> GF(q)`.
    pub fn from_int(&self, v: i64) -> Elem {
        Elem(v.rem_euclid(self.t.p as i64) as u16)
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.t.q as u16).map(Elem)
    }

    /// Polynomial-basis coefficients of `a`.
    pub fn coefficients(&self, a: Elem) -> Vec<u32> {
        digits(a.to_int(), self.t.p, self.t.e)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        Elem(self.t.add[a.0 as usize * self.t.q as usize + b.0 as usize])
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        Elem(self.t.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        Elem(self.t.mul[a.0 as usize * self.t.q as usize + b.0 as usize])
    }

    /// Multiplicative inverse.
    ///
    /// # Panics
    ///
    /// Panics on zero; use [`Field::checked_inv`] when the operand may vanish.
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        assert!(!a.is_zero(), "inverse of zero in {:?}", self);
        Elem(self.t.inv[a.0 as usize])
    }

    pub fn checked_inv(&self, a: Elem) -> Option<Elem> {
        (!a.is_zero()).then(|| Elem(self.t.inv[a.0 as usize]))
    }

    pub fn checked_div(&self, a: Elem, b: Elem) -> Option<Elem> {
        self.checked_inv(b).map(|bi| self.mul(a, bi))
    }

    /// `a / b`.
    ///
    /// # Panics
    ///
    /// Panics if `b` is zero.
    pub fn div(&self, a: Elem, b: Elem) -> Elem {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Elem, mut n: u64) -> Elem {
        let mut result = Elem::ONE;
        let mut base = a;
        while n > 0 {
            if n & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        result
    }

    /// Square roots of `a` (by enumeration; fields here are small).
    pub fn sqrts(&self, a: Elem) -> Vec<Elem> {
        self.elements().filter(|&y| self.mul(y, y) == a).collect()
    }
}

/// A field element tagged with its field, for the checked arithmetic surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    value: Elem,
}

/// Operation selector for [`field_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Inverse of the first operand; the second is ignored.
    Inv,
    /// Power of the first operand; the second is ignored.
    Pow(u64),
}

impl FieldElement {
    pub fn new(field: &Field, value: u32) -> Result<FieldElement, FieldError> {
        Ok(FieldElement {
            value: field.elem(value)?,
            field: field.clone(),
        })
    }

    pub fn from_elem(field: &Field, value: Elem) -> FieldElement {
        FieldElement {
            field: field.clone(),
            value,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn value(&self) -> Elem {
        self.value
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Checked field arithmetic over tagged elements.
pub fn field_arith(
    a: &FieldElement,
    b: &FieldElement,
    op: ArithOp,
) -> Result<FieldElement, FieldError> {
    if a.field != b.field {
        return Err(FieldError::MismatchedFields(
            a.field.order(),
            b.field.order(),
        ));
    }
    let f = &a.field;
    let value = match op {
        ArithOp::Add => f.add(a.value, b.value),
        ArithOp::Sub => f.sub(a.value, b.value),
        ArithOp::Mul => f.mul(a.value, b.value),
        ArithOp::Div => f
            .checked_div(a.value, b.value)
            .ok_or(FieldError::DivisionByZero)?,
        ArithOp::Inv => f.checked_inv(a.value).ok_or(FieldError::DivisionByZero)?,
        ArithOp::Pow(n) => f.pow(a.value, n),
    };
    Ok(FieldElement::from_elem(f, value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf5_product() {
        let f = Field::new(5).unwrap();
        assert_eq!(f.mul(Elem(3), Elem(4)), Elem(2));
    }

    #[test]
    fn gf4_alpha_times_alpha_plus_one() {
        // alpha = t (encoding 2), alpha + 1 = t + 1 (encoding 3); t^2 + t = 1 mod t^2+t+1.
        let f = Field::new(4).unwrap();
        assert_eq!(f.mul(Elem(2), Elem(3)), Elem(1));
    }

    #[test]
    fn published_moduli_match_search_rule() {
        for (q, p, e) in [(4, 2, 2), (8, 2, 3), (9, 3, 2), (16, 2, 4), (25, 5, 2)] {
            assert_eq!(fixed_modulus(q).unwrap(), search_modulus(p, e), "GF({q})");
            assert_eq!(
                Field::new(q).unwrap().modulus(),
                fixed_modulus(q).unwrap().as_slice()
            );
        }
    }

    #[test]
    fn rejects_bad_orders_and_moduli() {
        assert_eq!(Field::new(6).unwrap_err(), FieldError::NotPrimePower(6));
        assert_eq!(Field::new(512).unwrap_err(), FieldError::TooLarge(512));
        // t^2 + 1 is reducible over GF(2)
        assert!(matches!(
            Field::with_modulus(2, vec![1, 0, 1]),
            Err(FieldError::BadModulus(_))
        ));
    }

    #[test]
    fn one_is_identity_and_inverses_exhaustive() {
        for q in [
            2, 3, 4, 5, 7, 8, 9, 11, 16, 25, 27, 32, 49, 64, 81, 121, 125, 128, 169, 243, 256,
        ] {
            let f = Field::new(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.mul(Elem::ONE, a), a);
                assert_eq!(f.add(a, f.neg(a)), Elem::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a)), Elem::ONE, "GF({q}) a={a}");
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for q in [4, 5, 8, 9, 16] {
            let f = Field::new(q).unwrap();
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_additive() {
        let f = Field::new(27).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.pow(f.add(a, b), 3), f.add(f.pow(a, 3), f.pow(b, 3)));
            }
        }
    }

    #[test]
    fn checked_surface_reports_errors() {
        let f5 = Field::new(5).unwrap();
        let f7 = Field::new(7).unwrap();
        let a = FieldElement::new(&f5, 3).unwrap();
        let z = FieldElement::new(&f5, 0).unwrap();
        let b = FieldElement::new(&f7, 3).unwrap();
        assert_eq!(
            field_arith(&a, &z, ArithOp::Div).unwrap_err(),
            FieldError::DivisionByZero
        );
        assert_eq!(
            field_arith(&z, &z, ArithOp::Inv).unwrap_err(),
            FieldError::DivisionByZero
        );
        assert!(matches!(
            field_arith(&a, &b, ArithOp::Add),
            Err(FieldError::MismatchedFields(5, 7))
        ));
        let four = FieldElement::new(&f5, 4).unwrap();
        assert_eq!(
            field_arith(&a, &four, ArithOp::Mul).unwrap().value(),
            Elem(2)
        );
        assert_eq!(
            field_arith(&a, &a, ArithOp::Pow(4)).unwrap().value(),
            Elem(1)
        );
        assert!(FieldElement::new(&f5, 5).is_err());
    }
}
