//! Concrete function fields over small finite fields.
//!
//! Three families are supported:
//!
//! - the rational line, modelled as the plane curve `y = 0`;
//! - elliptic curves `y^2 = x^3 + a x + b` in characteristic at least 5;
//! - Hermitian curves `y^u + y = x^(u+1)` over GF(u^2).
//!
//! Each has a single place at infinity, written `Place::Infinity`, at which
//! `x` and `y` have pole orders `(1, -)`, `(2, 3)` and `(u, u+1)`. The
//! monomials `x^i y^j` with `j` below the degree of the curve equation in
//! `y` have pairwise distinct pole orders there, so a function that is
//! regular away from infinity is stored as a coefficient vector indexed by
//! pole order.
//!
//! Functions with affine poles carry a denominator made of the shift forms
//! `x - a` and `y - b`, whose divisors are known in closed form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::field::{Elem, Field, FieldError};
use crate::series::{LaurentSeries, SeriesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid curve specification {0:?}")]
    BadSpec(String),
    #[error("the zeros of {0} include a place that is not rational")]
    NonSplitFiber(Shift),
    #[error("cannot evaluate at {0}: it is a zero of the denominator or a pole")]
    EvaluationAtExcludedPlace(Place),
    #[error("point {0} is not on the curve")]
    NotOnCurve(Place),
    #[error("shift form {0} is not available on this curve")]
    UnsupportedShift(Shift),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveKind {
    Rational,
    Elliptic { a: Elem, b: Elem },
    Hermitian { u: u32 },
}

/// A rational place. Affine places order by the integer encodings of their
/// coordinates; `Infinity` sorts last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Affine { x: Elem, y: Elem },
    Infinity,
}

impl Place {
    pub fn affine(x: Elem, y: Elem) -> Place {
        Place::Affine { x, y }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, Place::Affine { .. })
    }

    pub fn x(&self) -> Option<Elem> {
        match self {
            Place::Affine { x, .. } => Some(*x),
            Place::Infinity => None,
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Affine { x, y } => write!(f, "({x},{y})"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

/// Finite formal sum of places with integer multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Divisor {
    terms: BTreeMap<Place, i64>,
}

impl Divisor {
    pub fn zero() -> Divisor {
        Divisor::default()
    }

    pub fn from_place(p: Place, n: i64) -> Divisor {
        let mut d = Divisor::zero();
        d.add_place(p, n);
        d
    }

    pub fn add_place(&mut self, p: Place, n: i64) {
        let e = self.terms.entry(p).or_insert(0);
        *e += n;
        if *e == 0 {
            self.terms.remove(&p);
        }
    }

    pub fn get(&self, p: &Place) -> i64 {
        self.terms.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = &Place> {
        self.terms.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Place, &i64)> {
        self.terms.iter()
    }

    pub fn is_effective(&self) -> bool {
        self.terms.values().all(|&n| n > 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, other: &Divisor) -> Divisor {
        let mut d = self.clone();
        for (p, &n) in &other.terms {
            d.add_place(*p, n);
        }
        d
    }

    pub fn minus(&self, other: &Divisor) -> Divisor {
        self.plus(&other.scaled(-1))
    }

    pub fn scaled(&self, k: i64) -> Divisor {
        let mut d = Divisor::zero();
        for (p, &n) in &self.terms {
            d.add_place(*p, n * k);
        }
        d
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(p, n)| format!("{n}*{p}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Shift forms usable in denominators: `X(a) = x - a`, `Y(b) = y - b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shift {
    X(Elem),
    Y(Elem),
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shift::X(a) => write!(f, "x-{a}"),
            Shift::Y(b) => write!(f, "y-{b}"),
        }
    }
}

/// `numerator / prod(shift^exponent)`, with the numerator indexed by pole
/// order at infinity of the one-point monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FunctionRep {
    num: Vec<Elem>,
    den: BTreeMap<Shift, u32>,
}

impl FunctionRep {
    pub fn zero() -> FunctionRep {
        FunctionRep::default()
    }

    /// Numerator-only function. Entries at gap positions must be zero.
    pub fn from_numerator(mut num: Vec<Elem>) -> FunctionRep {
        while num.last().is_some_and(|c| c.is_zero()) {
            num.pop();
        }
        FunctionRep {
            num,
            den: BTreeMap::new(),
        }
    }

    pub fn constant(c: Elem) -> FunctionRep {
        FunctionRep::from_numerator(vec![c])
    }

    /// The one-point monomial with pole order `k` (caller checks `k` is a pole number).
    pub fn monomial(k: usize) -> FunctionRep {
        let mut num = vec![Elem::ZERO; k + 1];
        num[k] = Elem::ONE;
        FunctionRep::from_numerator(num)
    }

    pub fn numerator(&self) -> &[Elem] {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<Shift, u32> {
        &self.den
    }

    /// Largest pole order present in the numerator.
    pub fn pole_bound(&self) -> usize {
        self.num.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// Same function divided by `shift^e`.
    pub fn divide_by(mut self, shift: Shift, e: u32) -> FunctionRep {
        if e > 0 {
            *self.den.entry(shift).or_insert(0) += e;
        }
        self
    }

    pub fn with_denominator(mut self, den: BTreeMap<Shift, u32>) -> FunctionRep {
        self.den = den.into_iter().filter(|&(_, e)| e > 0).collect();
        self
    }

    pub fn scale(&self, field: &Field, c: Elem) -> FunctionRep {
        let num = self.num.iter().map(|&a| field.mul(c, a)).collect();
        FunctionRep::from_numerator(num).with_denominator(self.den.clone())
    }

    /// Linear combination of functions sharing one denominator.
    ///
    /// # Panics
    ///
    /// Panics if the denominators differ; use [`CurveModel::add`] otherwise.
    pub fn combine(field: &Field, terms: &[(Elem, &FunctionRep)]) -> FunctionRep {
        let den = terms
            .first()
            .map(|(_, f)| f.den.clone())
            .unwrap_or_default();
        let len = terms.iter().map(|(_, f)| f.num.len()).max().unwrap_or(0);
        let mut num = vec![Elem::ZERO; len];
        for (c, f) in terms {
            assert_eq!(f.den, den, "combine requires a shared denominator");
            for (k, &a) in f.num.iter().enumerate() {
                num[k] = field.add(num[k], field.mul(*c, a));
            }
        }
        FunctionRep::from_numerator(num).with_denominator(den)
    }
}

impl fmt::Display for FunctionRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .num
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("{c}*m{k}"))
            .collect();
        let num = if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        };
        if self.den.is_empty() {
            write!(f, "{num}")
        } else {
            let den: Vec<String> = self.den.iter().map(|(s, e)| format!("({s})^{e}")).collect();
            write!(f, "({num}) / {}", den.join(""))
        }
    }
}

/// A supported curve together with its enumerated rational places.
#[derive(Clone, Debug)]
pub struct CurveModel {
    kind: CurveKind,
    field: Field,
    genus: u32,
    places: Vec<Place>,
}

impl PartialEq for CurveModel {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.field == other.field
    }
}

impl Eq for CurveModel {}

type Bivariate = BTreeMap<(u32, u32), Elem>;

impl CurveModel {
    pub fn rational(q: u32) -> Result<CurveModel, CurveError> {
        let field = Field::new(q)?;
        Ok(CurveModel::assemble(CurveKind::Rational, field, 0))
    }

    /// `y^2 = x^3 + a x + b`; `a`, `b` are integer encodings.
    pub fn elliptic(q: u32, a: u32, b: u32) -> Result<CurveModel, CurveError> {
        let field = Field::new(q)?;
        if field.characteristic() < 5 {
            return Err(CurveError::InvalidCurve(format!(
                "elliptic curves need characteristic at least 5, GF({q}) has {}",
                field.characteristic()
            )));
        }
        let (a, b) = (field.elem(a)?, field.elem(b)?);
        let disc = field.add(
            field.mul(field.from_int(4), field.pow(a, 3)),
            field.mul(field.from_int(27), field.mul(b, b)),
        );
        if disc.is_zero() {
            return Err(CurveError::InvalidCurve(
                "singular: 4a^3 + 27b^2 = 0".into(),
            ));
        }
        Ok(CurveModel::assemble(CurveKind::Elliptic { a, b }, field, 1))
    }

    /// `y^u + y = x^(u+1)` over GF(u^2).
    pub fn hermitian(u: u32) -> Result<CurveModel, CurveError> {
        if u < 2 {
            return Err(CurveError::InvalidCurve(
                "Hermitian curves need u >= 2".into(),
            ));
        }
        let field = Field::new(u * u)
            .map_err(|e| CurveError::InvalidCurve(format!("GF({}): {e}", u * u)))?;
        if field.degree() % 2 != 0 {
            return Err(CurveError::InvalidCurve(format!(
                "u = {u} is not a prime power"
            )));
        }
        Ok(CurveModel::assemble(
            CurveKind::Hermitian { u },
            field,
            u * (u - 1) / 2,
        ))
    }

    /// Parses `rational:q=5`, `elliptic:q=5,a=1,b=1` or `hermitian:u=2`.
    pub fn parse(spec: &str) -> Result<CurveModel, CurveError> {
        let bad = || CurveError::BadSpec(spec.to_string());
        let (family, args) = spec.trim().split_once(':').ok_or_else(bad)?;
        let mut kv = HashMap::new();
        for part in args.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let v: u32 = v.trim().parse().map_err(|_| bad())?;
            if kv.insert(k.trim().to_string(), v).is_some() {
                return Err(bad());
            }
        }
        let mut take = |k: &str| kv.remove(k).ok_or_else(bad);
        let curve = match family.trim() {
            "rational" => CurveModel::rational(take("q")?)?,
            "elliptic" => {
                let q = take("q")?;
                let a = take("a")?;
                let b = take("b")?;
                CurveModel::elliptic(q, a, b)?
            }
            "hermitian" => CurveModel::hermitian(take("u")?)?,
            _ => return Err(bad()),
        };
        if !kv.is_empty() {
            return Err(bad());
        }
        Ok(curve)
    }

    fn assemble(kind: CurveKind, field: Field, genus: u32) -> CurveModel {
        let mut c = CurveModel {
            kind,
            field,
            genus,
            places: Vec::new(),
        };
        let mut places: Vec<Place> = Vec::new();
        for x in c.field.elements() {
            match kind {
                CurveKind::Rational => places.push(Place::affine(x, Elem::ZERO)),
                _ => {
                    for y in c.field.elements() {
                        if c.equation_at(x, y).is_zero() {
                            places.push(Place::affine(x, y));
                        }
                    }
                }
            }
        }
        places.push(Place::Infinity);
        places.sort();
        c.places = places;
        c
    }

    /// Canonical specification string accepted by [`CurveModel::parse`].
    pub fn spec_string(&self) -> String {
        match self.kind {
            CurveKind::Rational => format!("rational:q={}", self.field.order()),
            CurveKind::Elliptic { a, b } => {
                format!("elliptic:q={},a={a},b={b}", self.field.order())
            }
            CurveKind::Hermitian { u } => format!("hermitian:u={u}"),
        }
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    /// All rational places, affine ones sorted by coordinate encoding, then infinity.
    pub fn rational_places(&self) -> &[Place] {
        &self.places
    }

    pub fn affine_places(&self) -> impl Iterator<Item = &Place> {
        self.places.iter().filter(|p| p.is_affine())
    }

    /// Residual of the defining equation at `(x, y)`.
    fn equation_at(&self, x: Elem, y: Elem) -> Elem {
        let f = &self.field;
        match self.kind {
            CurveKind::Rational => y,
            CurveKind::Elliptic { a, b } => {
                let rhs = f.add(f.add(f.pow(x, 3), f.mul(a, x)), b);
                f.sub(f.mul(y, y), rhs)
            }
            CurveKind::Hermitian { u } => {
                f.sub(f.add(f.pow(y, u as u64), y), f.pow(x, u as u64 + 1))
            }
        }
    }

    pub fn contains(&self, p: &Place) -> bool {
        match p {
            Place::Infinity => true,
            Place::Affine { x, y } => self.equation_at(*x, *y).is_zero(),
        }
    }

    /// Pole orders of `x` and `y` at infinity (`y` is identically zero on the line).
    pub fn coordinate_pole_orders(&self) -> (u32, u32) {
        match self.kind {
            CurveKind::Rational => (1, 0),
            CurveKind::Elliptic { .. } => (2, 3),
            CurveKind::Hermitian { u } => (u, u + 1),
        }
    }

    /// Degree of the equation in `y`; monomials keep `j` below it.
    fn y_degree(&self) -> u32 {
        match self.kind {
            CurveKind::Rational => 1,
            CurveKind::Elliptic { .. } => 2,
            CurveKind::Hermitian { u } => u,
        }
    }

    /// Exponents `(i, j)` of the one-point monomial with pole order `k`.
    pub fn monomial_exponents(&self, k: u32) -> Option<(u32, u32)> {
        let (px, py) = self.coordinate_pole_orders();
        match self.kind {
            CurveKind::Rational => Some((k, 0)),
            _ => (0..self.y_degree())
                .find(|&j| k >= j * py && (k - j * py).is_multiple_of(px))
                .map(|j| ((k - j * py) / px, j)),
        }
    }

    fn pole_order_of(&self, i: u32, j: u32) -> u32 {
        let (px, py) = self.coordinate_pole_orders();
        i * px + j * py
    }

    /// Whether `k` is a pole number of the place at infinity.
    pub fn is_pole_number(&self, k: u32) -> bool {
        self.monomial_exponents(k).is_some()
    }

    /// One-point basis of `L(M * inf)` sorted by pole order.
    pub fn one_point_basis(&self, m: u32) -> Vec<(FunctionRep, u32)> {
        (0..=m)
            .filter(|&k| self.is_pole_number(k))
            .map(|k| (FunctionRep::monomial(k as usize), k))
            .collect()
    }

    pub fn x(&self) -> FunctionRep {
        FunctionRep::monomial(self.coordinate_pole_orders().0 as usize)
    }

    /// `y` as a function (zero on the rational line).
    pub fn y(&self) -> FunctionRep {
        match self.kind {
            CurveKind::Rational => FunctionRep::zero(),
            _ => FunctionRep::monomial(self.coordinate_pole_orders().1 as usize),
        }
    }

    /// Numerator of a shift form, as a function.
    pub fn shift_numerator(&self, s: Shift) -> Result<FunctionRep, CurveError> {
        let f = &self.field;
        let (base, c) = match s {
            Shift::X(a) => (self.x(), a),
            Shift::Y(b) => {
                if self.kind == CurveKind::Rational {
                    return Err(CurveError::UnsupportedShift(s));
                }
                (self.y(), b)
            }
        };
        let mut num = base.num;
        num[0] = f.neg(c);
        Ok(FunctionRep::from_numerator(num))
    }

    fn to_bivariate(&self, num: &[Elem]) -> Bivariate {
        let mut out = Bivariate::new();
        for (k, &c) in num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (i, j) = self
                .monomial_exponents(k as u32)
                .expect("numerator entry at a gap of the semigroup");
            out.insert((j, i), c);
        }
        out
    }

    /// Reduces a bivariate polynomial (keyed `(j, i)`) with the curve equation and
    /// returns its pole-order vector.
    fn reduce(&self, mut poly: Bivariate) -> Vec<Elem> {
        let f = &self.field;
        let dy = self.y_degree();
        let add = |poly: &mut Bivariate, key: (u32, u32), c: Elem| {
            let e = poly.entry(key).or_insert(Elem::ZERO);
            *e = f.add(*e, c);
            if e.is_zero() {
                poly.remove(&key);
            }
        };
        while let Some((&(j, i), &c)) = poly.last_key_value() {
            if j < dy {
                break;
            }
            poly.remove(&(j, i));
            match self.kind {
                CurveKind::Rational => {}
                CurveKind::Elliptic { a, b } => {
                    add(&mut poly, (j - 2, i + 3), c);
                    add(&mut poly, (j - 2, i + 1), f.mul(c, a));
                    add(&mut poly, (j - 2, i), f.mul(c, b));
                }
                CurveKind::Hermitian { u } => {
                    add(&mut poly, (j - u, i + u + 1), c);
                    add(&mut poly, (j - u + 1, i), f.neg(c));
                }
            }
        }
        let len = poly
            .keys()
            .map(|&(j, i)| self.pole_order_of(i, j) as usize + 1)
            .max()
            .unwrap_or(0);
        let mut num = vec![Elem::ZERO; len];
        for ((j, i), c) in poly {
            num[self.pole_order_of(i, j) as usize] = c;
        }
        num
    }

    fn mul_numerators(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        let f = &self.field;
        let (pa, pb) = (self.to_bivariate(a), self.to_bivariate(b));
        let mut prod = Bivariate::new();
        for (&(ja, ia), &ca) in &pa {
            for (&(jb, ib), &cb) in &pb {
                let e = prod.entry((ja + jb, ia + ib)).or_insert(Elem::ZERO);
                *e = f.add(*e, f.mul(ca, cb));
            }
        }
        prod.retain(|_, c| !c.is_zero());
        self.reduce(prod)
    }

    pub fn mul(&self, a: &FunctionRep, b: &FunctionRep) -> FunctionRep {
        let mut den = a.den.clone();
        for (s, e) in &b.den {
            *den.entry(*s).or_insert(0) += e;
        }
        FunctionRep::from_numerator(self.mul_numerators(&a.num, &b.num)).with_denominator(den)
    }

    /// Sum over the least common denominator.
    pub fn add(&self, a: &FunctionRep, b: &FunctionRep) -> Result<FunctionRep, CurveError> {
        let mut lcd = a.den.clone();
        for (s, &e) in &b.den {
            let cur = lcd.entry(*s).or_insert(0);
            *cur = (*cur).max(e);
        }
        let lift = |g: &FunctionRep| -> Result<Vec<Elem>, CurveError> {
            let mut num = g.num.clone();
            for (s, &e) in &lcd {
                let have = g.den.get(s).copied().unwrap_or(0);
                let sn = self.shift_numerator(*s)?;
                for _ in have..e {
                    num = self.mul_numerators(&num, &sn.num);
                }
            }
            Ok(num)
        };
        let (na, nb) = (lift(a)?, lift(b)?);
        let one = Elem::ONE;
        let sum = FunctionRep::combine(
            &self.field,
            &[
                (one, &FunctionRep::from_numerator(na)),
                (one, &FunctionRep::from_numerator(nb)),
            ],
        );
        Ok(sum.with_denominator(lcd))
    }

    fn numerator_value(&self, num: &[Elem], x: Elem, y: Elem) -> Elem {
        let f = &self.field;
        let mut acc = Elem::ZERO;
        for (k, &c) in num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (i, j) = self
                .monomial_exponents(k as u32)
                .expect("numerator entry at a gap");
            acc = f.add(acc, f.mul(c, f.mul(f.pow(x, i as u64), f.pow(y, j as u64))));
        }
        acc
    }

    fn shift_value(&self, s: Shift, x: Elem, y: Elem) -> Elem {
        match s {
            Shift::X(a) => self.field.sub(x, a),
            Shift::Y(b) => self.field.sub(y, b),
        }
    }

    /// Whether some denominator factor of `f` vanishes at `p`.
    pub fn denominator_vanishes(&self, f: &FunctionRep, p: &Place) -> bool {
        match p {
            Place::Infinity => false,
            Place::Affine { x, y } => f.den.keys().any(|&s| self.shift_value(s, *x, *y).is_zero()),
        }
    }

    /// Value of `f` at an affine place outside the zeros of its denominator.
    pub fn evaluate(&self, f: &FunctionRep, p: &Place) -> Result<Elem, CurveError> {
        let Place::Affine { x, y } = *p else {
            return Err(CurveError::EvaluationAtExcludedPlace(*p));
        };
        if !self.contains(p) {
            return Err(CurveError::NotOnCurve(*p));
        }
        let fl = &self.field;
        let mut den = Elem::ONE;
        for (&s, &e) in &f.den {
            den = fl.mul(den, fl.pow(self.shift_value(s, x, y), e as u64));
        }
        let inv = fl
            .checked_inv(den)
            .ok_or(CurveError::EvaluationAtExcludedPlace(*p))?;
        Ok(fl.mul(self.numerator_value(&f.num, x, y), inv))
    }

    /// The chosen local parameter at `p` as a function.
    pub fn local_parameter(&self, p: &Place) -> Result<FunctionRep, CurveError> {
        if !self.contains(p) {
            return Err(CurveError::NotOnCurve(*p));
        }
        Ok(match (self.kind, *p) {
            (CurveKind::Rational, Place::Infinity) => {
                FunctionRep::constant(Elem::ONE).divide_by(Shift::X(Elem::ZERO), 1)
            }
            (_, Place::Infinity) => self.x().divide_by(Shift::Y(Elem::ZERO), 1),
            (_, Place::Affine { x, y }) => {
                if self.uses_y_parameter(p) {
                    self.shift_numerator(Shift::Y(y))?
                } else {
                    self.shift_numerator(Shift::X(x))?
                }
            }
        })
    }

    /// `x - x0` fails to be a local parameter exactly where the partial
    /// derivative of the equation in `y` vanishes.
    fn uses_y_parameter(&self, p: &Place) -> bool {
        match (self.kind, p) {
            (CurveKind::Elliptic { .. }, Place::Affine { y, .. }) => y.is_zero(),
            _ => false,
        }
    }

    /// Coordinate expansions with relative precision at least `depth`.
    fn coordinates(&self, p: &Place, depth: i64) -> (LaurentSeries, LaurentSeries) {
        let f = &self.field;
        let depth = depth.max(1);
        let t = |k: i64, prec: i64| LaurentSeries::monomial(f, Elem::ONE, k, prec);
        let c = |v: Elem, prec: i64| LaurentSeries::constant(f, v, prec);
        match (self.kind, *p) {
            (CurveKind::Rational, Place::Infinity) => {
                (t(-1, depth - 1), LaurentSeries::zero(f, depth))
            }
            (CurveKind::Rational, Place::Affine { x, .. }) => {
                let prec = depth + 1;
                (c(x, prec).add(&t(1, prec)), LaurentSeries::zero(f, prec))
            }
            (CurveKind::Elliptic { a, b }, Place::Infinity) => {
                // w = 1/y in t = x/y satisfies w = t^3 + a t w^2 + b w^3
                let prec = depth + 3;
                let w = fixed_point(f, prec, |w| {
                    let w2 = w.mul(w);
                    t(3, prec)
                        .add(&t(1, prec).mul(&w2).scale(a))
                        .add(&w2.mul(w).scale(b))
                });
                let y = w.inv().expect("w has valuation 3");
                (t(1, depth + 4).mul(&y), y)
            }
            (CurveKind::Hermitian { u }, Place::Infinity) => {
                // w = 1/y in t = x/y satisfies w + w^u = t^(u+1)
                let prec = depth + u as i64 + 1;
                let w = fixed_point(f, prec, |w| t(u as i64 + 1, prec).sub(&w.pow(u)));
                let y = w.inv().expect("w has valuation u+1");
                (t(1, depth + u as i64 + 2).mul(&y), y)
            }
            (CurveKind::Elliptic { a, b }, Place::Affine { x, y }) if !y.is_zero() => {
                let prec = depth + 1;
                let xs = c(x, prec).add(&t(1, prec));
                let rhs = xs.pow(3).add(&xs.scale(a)).add(&c(b, prec));
                let half_inv_y0 = f.inv(f.mul(f.from_int(2), y));
                let ys = fixed_point_from(c(y, prec), prec, |ys| {
                    ys.add(&rhs.sub(&ys.mul(ys)).scale(half_inv_y0))
                });
                (xs, ys)
            }
            (CurveKind::Elliptic { a, .. }, Place::Affine { x, .. }) => {
                // t = y; x = x0 + v with c1 v + c2 v^2 + v^3 = t^2
                let prec = depth + 2;
                let c1 = f.add(f.mul(f.from_int(3), f.mul(x, x)), a);
                let c2 = f.mul(f.from_int(3), x);
                let c1_inv = f.inv(c1);
                let v = fixed_point(f, prec, |v| {
                    let v2 = v.mul(v);
                    t(2, prec).sub(&v2.scale(c2)).sub(&v2.mul(v)).scale(c1_inv)
                });
                (c(x, prec).add(&v), t(1, prec))
            }
            (CurveKind::Hermitian { u }, Place::Affine { x, y }) => {
                // t = x - x0; y = y0 + v with v = (x0 + t)^(u+1) - x0^(u+1) - v^u
                let prec = depth + u as i64 + 1;
                let xs = c(x, prec).add(&t(1, prec));
                let rhs = xs.pow(u + 1).sub(&c(f.pow(x, u as u64 + 1), prec));
                let v = fixed_point(f, prec, |v| rhs.sub(&v.pow(u)));
                (xs, c(y, prec).add(&v))
            }
        }
    }

    /// Expansions of `x` and `y` at `p` in its local parameter, accurate
    /// enough that the curve equation vanishes to order at least `depth`.
    pub fn expand_coordinates(&self, p: &Place, depth: i64) -> (LaurentSeries, LaurentSeries) {
        let margin = match (self.kind, p) {
            (_, Place::Affine { .. }) => 0,
            (CurveKind::Rational, _) => 1,
            (CurveKind::Elliptic { .. }, _) => 6,
            (CurveKind::Hermitian { u }, _) => (u * (u + 1)) as i64,
        };
        self.coordinates(p, depth + margin)
    }

    /// Curve equation residual for a pair of coordinate series.
    pub fn equation_residual(&self, x: &LaurentSeries, y: &LaurentSeries) -> LaurentSeries {
        let f = &self.field;
        match self.kind {
            CurveKind::Rational => y.clone(),
            CurveKind::Elliptic { a, b } => {
                let prec = x.precision().max(y.precision()) + 10;
                y.mul(y)
                    .sub(&x.pow(3))
                    .sub(&x.scale(a))
                    .sub(&LaurentSeries::constant(f, b, prec))
            }
            CurveKind::Hermitian { u } => y.pow(u).add(y).sub(&x.pow(u + 1)),
        }
    }

    pub fn chart(&self, p: &Place, depth: i64) -> LocalChart<'_> {
        LocalChart::new(self, *p, depth)
    }

    /// Local expansion of `f` at `p`, known below `t^prec`.
    pub fn expand_function(
        &self,
        f: &FunctionRep,
        p: &Place,
        prec: i64,
    ) -> Result<LaurentSeries, CurveError> {
        let (px, py) = self.coordinate_pole_orders();
        let den_poles: i64 = f.den.values().map(|&e| e as i64 * px.max(py) as i64).sum();
        let mut depth = prec + f.pole_bound() as i64 + den_poles + 2;
        loop {
            let mut chart = self.chart(p, depth);
            let s = chart.expand(f)?;
            if s.precision() >= prec {
                return Ok(s.truncate(prec));
            }
            depth += (prec - s.precision()).max(4);
        }
    }

    /// Expansions of several functions at `p` through one shared chart.
    pub fn expand_functions(
        &self,
        fs: &[FunctionRep],
        p: &Place,
        prec: i64,
    ) -> Result<Vec<LaurentSeries>, CurveError> {
        let (px, py) = self.coordinate_pole_orders();
        let need = fs
            .iter()
            .map(|f| {
                f.pole_bound() as i64
                    + f.den
                        .values()
                        .map(|&e| e as i64 * px.max(py) as i64)
                        .sum::<i64>()
            })
            .max()
            .unwrap_or(0);
        let mut depth = prec + need + 2;
        loop {
            let mut chart = self.chart(p, depth);
            let out: Vec<LaurentSeries> = fs
                .iter()
                .map(|f| chart.expand(f))
                .collect::<Result<_, _>>()?;
            let worst = out.iter().map(|s| s.precision()).min().unwrap_or(prec);
            if worst >= prec {
                return Ok(out.into_iter().map(|s| s.truncate(prec)).collect());
            }
            depth += (prec - worst).max(4);
        }
    }

    /// Valuation of `f` at `p`, searched up to `bound`; `None` if `f` vanishes past it.
    pub fn valuation(
        &self,
        f: &FunctionRep,
        p: &Place,
        bound: i64,
    ) -> Result<Option<i64>, CurveError> {
        Ok(self.expand_function(f, p, bound + 1)?.valuation())
    }

    /// Principal divisor of a shift form.
    pub fn principal_divisor_of_shift(&self, s: Shift) -> Result<Divisor, CurveError> {
        let num = self.shift_numerator(s)?;
        let (px, py) = self.coordinate_pole_orders();
        let pole = match s {
            Shift::X(_) => px,
            Shift::Y(_) => py,
        } as i64;
        let mut div = Divisor::from_place(Place::Infinity, -pole);
        for p in self.affine_places() {
            let Place::Affine { x, y } = *p else { continue };
            if self.shift_value(s, x, y).is_zero() {
                let v = self
                    .valuation(&num, p, pole)?
                    .expect("shift forms have finite valuation");
                div.add_place(*p, v);
            }
        }
        if div.degree() != 0 {
            return Err(CurveError::NonSplitFiber(s));
        }
        Ok(div)
    }

    /// Affine places on the vertical line `x = a`.
    pub fn fiber(&self, a: Elem) -> Vec<Place> {
        self.affine_places()
            .filter(|p| p.x() == Some(a))
            .copied()
            .collect()
    }
}

/// Iterates `w <- step(w)` from zero until it stabilises at precision `prec`.
fn fixed_point(
    field: &Field,
    prec: i64,
    step: impl Fn(&LaurentSeries) -> LaurentSeries,
) -> LaurentSeries {
    fixed_point_from(LaurentSeries::zero(field, prec), prec, step)
}

fn fixed_point_from(
    start: LaurentSeries,
    prec: i64,
    step: impl Fn(&LaurentSeries) -> LaurentSeries,
) -> LaurentSeries {
    let mut w = start;
    // each step gains at least one order, so this bound is never reached on a contraction
    for _ in 0..(prec - w.valuation_bound().min(0) + 2).max(2) {
        let next = step(&w).truncate(prec);
        debug_assert!(next.precision() >= prec, "fixed-point step lost precision");
        if next == w {
            return w;
        }
        w = next;
    }
    w
}

/// Cached coordinate expansions at one place, for expanding many functions.
pub struct LocalChart<'c> {
    curve: &'c CurveModel,
    place: Place,
    depth: i64,
    x: LaurentSeries,
    y: LaurentSeries,
    xpow: Vec<LaurentSeries>,
    ypow: Vec<LaurentSeries>,
    monomials: HashMap<u32, LaurentSeries>,
}

impl<'c> LocalChart<'c> {
    pub fn new(curve: &'c CurveModel, place: Place, depth: i64) -> LocalChart<'c> {
        let (x, y) = curve.coordinates(&place, depth);
        let one = LaurentSeries::one(curve.field(), depth + 1);
        LocalChart {
            curve,
            place,
            depth,
            xpow: vec![one.clone()],
            ypow: vec![one],
            x,
            y,
            monomials: HashMap::new(),
        }
    }

    pub fn place(&self) -> Place {
        self.place
    }

    pub fn depth(&self) -> i64 {
        self.depth
    }

    pub fn x(&self) -> &LaurentSeries {
        &self.x
    }

    pub fn y(&self) -> &LaurentSeries {
        &self.y
    }

    fn power(pows: &mut Vec<LaurentSeries>, base: &LaurentSeries, n: usize) -> LaurentSeries {
        while pows.len() <= n {
            let next = pows.last().unwrap().mul(base);
            pows.push(next);
        }
        pows[n].clone()
    }

    /// Expansion of the one-point monomial with pole order `k`.
    pub fn monomial(&mut self, k: u32) -> LaurentSeries {
        if let Some(s) = self.monomials.get(&k) {
            return s.clone();
        }
        let (i, j) = self.curve.monomial_exponents(k).expect("monomial at a gap");
        let xi = Self::power(&mut self.xpow, &self.x, i as usize);
        let s = if j == 0 {
            xi
        } else {
            xi.mul(&Self::power(&mut self.ypow, &self.y, j as usize))
        };
        self.monomials.insert(k, s.clone());
        s
    }

    pub fn shift(&self, s: Shift) -> LaurentSeries {
        let f = self.curve.field();
        let (base, c) = match s {
            Shift::X(a) => (&self.x, a),
            Shift::Y(b) => (&self.y, b),
        };
        base.sub(&LaurentSeries::constant(f, c, base.precision().max(1)))
    }

    pub fn numerator(&mut self, num: &[Elem]) -> LaurentSeries {
        let f = self.curve.field().clone();
        let mut acc: Option<LaurentSeries> = None;
        for (k, &c) in num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = self.monomial(k as u32).scale(c);
            acc = Some(match acc {
                Some(a) => a.add(&term),
                None => term,
            });
        }
        acc.unwrap_or_else(|| {
            let floor = self
                .monomial(num.len().saturating_sub(1) as u32)
                .precision();
            LaurentSeries::zero(&f, floor.min(self.depth))
        })
    }

    pub fn expand(&mut self, func: &FunctionRep) -> Result<LaurentSeries, CurveError> {
        let num = self.numerator(&func.num);
        if func.den.is_empty() {
            return Ok(num);
        }
        let mut den: Option<LaurentSeries> = None;
        for (&s, &e) in &func.den {
            let p = self.shift(s).pow(e);
            den = Some(match den {
                Some(d) => d.mul(&p),
                None => p,
            });
        }
        Ok(num.div(&den.unwrap())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: u16) -> Elem {
        Elem(v)
    }

    #[test]
    fn place_counts() {
        assert_eq!(CurveModel::rational(5).unwrap().rational_places().len(), 6);
        let h = CurveModel::hermitian(2).unwrap();
        // independent count of b^2 + b = a^3 over GF(4)
        let f = h.field();
        let mut affine = 0;
        for a in f.elements() {
            for b in f.elements() {
                if f.add(f.mul(b, b), b) == f.pow(a, 3) {
                    affine += 1;
                }
            }
        }
        assert_eq!(affine, 8);
        assert_eq!(h.rational_places().len(), 9);
        let el = CurveModel::elliptic(5, 1, 1).unwrap();
        let mut count = 1;
        for x in 0..5u32 {
            for y in 0..5u32 {
                if (y * y) % 5 == (x * x * x + x + 1) % 5 {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 9);
        assert_eq!(el.rational_places().len(), 9);
        assert_eq!(
            CurveModel::hermitian(4).unwrap().rational_places().len(),
            65
        );
        assert_eq!(*el.rational_places().last().unwrap(), Place::Infinity);
    }

    #[test]
    fn curve_validation() {
        assert!(CurveModel::elliptic(9, 1, 1).is_err());
        assert!(CurveModel::elliptic(5, 0, 0).is_err());
        assert!(CurveModel::hermitian(6).is_err());
        assert_eq!(CurveModel::hermitian(3).unwrap().genus(), 3);
        assert_eq!(
            CurveModel::parse("elliptic:q=5,a=1,b=1")
                .unwrap()
                .spec_string(),
            "elliptic:q=5,a=1,b=1"
        );
        assert!(CurveModel::parse("hermitian:u=2,z=3").is_err());
        assert!(CurveModel::parse("torus:q=5").is_err());
    }

    #[test]
    fn one_point_bases() {
        let r = CurveModel::rational(5).unwrap();
        let orders: Vec<u32> = r.one_point_basis(3).into_iter().map(|(_, k)| k).collect();
        assert_eq!(orders, vec![0, 1, 2, 3]);
        let h = CurveModel::hermitian(2).unwrap();
        let orders: Vec<u32> = h.one_point_basis(4).into_iter().map(|(_, k)| k).collect();
        assert_eq!(orders, vec![0, 2, 3, 4]);
        assert_eq!(h.monomial_exponents(4), Some((2, 0)));
        assert_eq!(h.monomial_exponents(3), Some((0, 1)));
        assert_eq!(h.one_point_basis(0).len(), 1);
    }

    #[test]
    fn local_parameters_have_valuation_one() {
        for c in [
            CurveModel::rational(5).unwrap(),
            CurveModel::elliptic(5, 1, 1).unwrap(),
            CurveModel::elliptic(7, 0, 1).unwrap(),
            CurveModel::hermitian(2).unwrap(),
            CurveModel::hermitian(3).unwrap(),
        ] {
            for p in c.rational_places() {
                let t = c.local_parameter(p).unwrap();
                assert_eq!(
                    c.valuation(&t, p, 4).unwrap(),
                    Some(1),
                    "{} at {p}",
                    c.spec_string()
                );
                let s = c.expand_function(&t, p, 6).unwrap();
                assert_eq!(s.coeff_at(1).unwrap(), Elem::ONE);
                for k in 2..6 {
                    assert!(
                        s.coeff_at(k).unwrap().is_zero(),
                        "{} at {p}: {s:?}",
                        c.spec_string()
                    );
                }
            }
        }
    }

    #[test]
    fn hermitian_origin_expansion() {
        let h = CurveModel::hermitian(2).unwrap();
        let p = Place::affine(e(0), e(0));
        let (x, y) = h.expand_coordinates(&p, 16);
        assert_eq!(x.terms().collect::<Vec<_>>(), vec![(1, Elem::ONE)]);
        assert!(y.precision() >= 16);
        // y = x^3 + y^2 in characteristic 2, iterated
        let want: Vec<i64> = vec![3, 6, 12];
        let got: Vec<i64> = y.terms().map(|(k, _)| k).collect();
        assert_eq!(got, want);
        assert_eq!(h.local_parameter(&p).unwrap(), h.x());
    }

    #[test]
    fn coordinate_residuals_vanish() {
        for c in [
            CurveModel::rational(7).unwrap(),
            CurveModel::elliptic(5, 1, 1).unwrap(),
            CurveModel::elliptic(11, 3, 5).unwrap(),
            CurveModel::hermitian(2).unwrap(),
            CurveModel::hermitian(3).unwrap(),
        ] {
            for p in c.rational_places() {
                for depth in [4, 8, 16] {
                    let (x, y) = c.expand_coordinates(p, depth);
                    let r = c.equation_residual(&x, &y);
                    assert!(
                        r.is_zero() && r.precision() >= depth,
                        "{} at {p} depth {depth}: {r:?}",
                        c.spec_string()
                    );
                }
            }
            let (x, y) = c.expand_coordinates(&Place::Infinity, 8);
            let (px, py) = c.coordinate_pole_orders();
            assert_eq!(x.valuation(), Some(-(px as i64)));
            if py > 0 {
                assert_eq!(y.valuation(), Some(-(py as i64)));
            }
        }
    }

    #[test]
    fn rational_infinity_is_inverse_parameter() {
        let r = CurveModel::rational(5).unwrap();
        let s = r.expand_function(&r.x(), &Place::Infinity, 6).unwrap();
        assert_eq!(s, LaurentSeries::monomial(r.field(), Elem::ONE, -1, 6));
    }

    #[test]
    fn inverse_shift_value_matches_field_inverse() {
        let h = CurveModel::hermitian(3).unwrap();
        let f = h.field();
        let a = e(4);
        let g = FunctionRep::constant(Elem::ONE).divide_by(Shift::X(a), 1);
        for p in h.affine_places().filter(|p| p.x() != Some(a)) {
            let s = h.expand_function(&g, p, 1).unwrap();
            assert_eq!(s.coeff_at(0).unwrap(), f.inv(f.sub(p.x().unwrap(), a)));
            assert_eq!(h.evaluate(&g, p).unwrap(), s.coeff_at(0).unwrap());
        }
        let excluded = h.fiber(a)[0];
        assert!(matches!(
            h.evaluate(&g, &excluded),
            Err(CurveError::EvaluationAtExcludedPlace(_))
        ));
    }

    #[test]
    fn shift_divisors() {
        let r = CurveModel::rational(5).unwrap();
        let d = r.principal_divisor_of_shift(Shift::X(e(2))).unwrap();
        assert_eq!(
            d,
            Divisor::from_place(Place::affine(e(2), e(0)), 1)
                .plus(&Divisor::from_place(Place::Infinity, -1))
        );

        let h = CurveModel::hermitian(2).unwrap();
        let f = h.field();
        for a in f.elements() {
            let d = h.principal_divisor_of_shift(Shift::X(a)).unwrap();
            assert_eq!(d.degree(), 0);
            assert_eq!(d.get(&Place::Infinity), -2);
            let roots: Vec<Elem> = f
                .elements()
                .filter(|&b| f.add(f.mul(b, b), b) == f.pow(a, 3))
                .collect();
            // the fiber always splits into u = 2 distinct points, so each zero is simple
            assert_eq!(roots.len(), 2);
            for b in &roots {
                assert_eq!(d.get(&Place::affine(a, *b)), 1);
            }
        }
        let dy = h.principal_divisor_of_shift(Shift::Y(e(0))).unwrap();
        assert_eq!(dy.get(&Place::Infinity), -3);

        let el = CurveModel::elliptic(5, 1, 1).unwrap();
        let d = el.principal_divisor_of_shift(Shift::X(e(0))).unwrap();
        assert_eq!(d.get(&Place::affine(e(0), e(1))), 1);
        assert_eq!(d.get(&Place::affine(e(0), e(4))), 1);
        // x = 1 gives y^2 = 3, a non-square mod 5
        assert_eq!(
            el.principal_divisor_of_shift(Shift::X(e(1))),
            Err(CurveError::NonSplitFiber(Shift::X(e(1))))
        );
        // y^2 = x^3 + x over GF(5) has 2-torsion at x = 0
        let t = CurveModel::elliptic(5, 1, 0).unwrap();
        let d = t.principal_divisor_of_shift(Shift::X(e(0))).unwrap();
        assert_eq!(d.get(&Place::affine(e(0), e(0))), 2);
        assert_eq!(d.degree(), 0);
    }

    #[test]
    fn arithmetic_and_evaluation_agree() {
        let h = CurveModel::hermitian(3).unwrap();
        let f = h.field();
        let x = h.x();
        let y = h.y();
        // y^3 reduces to x^4 - y
        let y3 = h.mul(&h.mul(&y, &y), &y);
        let want = h
            .add(
                &h.mul(&h.mul(&x, &x), &h.mul(&x, &x)),
                &y.scale(f, f.neg(Elem::ONE)),
            )
            .unwrap();
        assert_eq!(y3, want);
        let g = h
            .add(
                &h.mul(&x, &y),
                &FunctionRep::constant(e(5)).divide_by(Shift::Y(e(2)), 2),
            )
            .unwrap();
        for p in h.affine_places() {
            if h.denominator_vanishes(&g, p) {
                continue;
            }
            let v = h.evaluate(&g, p).unwrap();
            assert_eq!(h.expand_function(&g, p, 1).unwrap().coeff_at(0).unwrap(), v);
        }
    }

    #[test]
    fn constants_expand_to_constants() {
        let el = CurveModel::elliptic(7, 2, 3).unwrap();
        for p in el.rational_places() {
            let s = el
                .expand_function(&FunctionRep::constant(e(3)), p, 5)
                .unwrap();
            assert_eq!(s, LaurentSeries::constant(el.field(), e(3), 5));
        }
    }
}
