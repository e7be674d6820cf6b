//! Riemann-Roch spaces of divisors supported on rational places.
//!
//! `L(G)` is computed by pole shifting. For every x-value `a` carrying
//! affine poles of `G` pick the least `k_a` with `(x - a)^k_a` clearing them,
//! set `u = prod (x - a)^k_a`, and find the `w` in the one-point space
//! `L(M * inf)` that vanish to the required orders on the affected fibers.
//! Then `L(G) = { w / u }`.
//!
//! Elements of `L(G)` are identified by their expansion at infinity over
//! exponents `-G(inf) ..= deg G - G(inf)`: a nonzero function of `L(G)`
//! cannot vanish beyond that window because `L(G - (deg G + 1) inf)` is zero.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::curve::{CurveError, CurveModel, Divisor, FunctionRep, Place, Shift};
use crate::field::{kernel_basis, rank, solve_linear, Elem, FieldError, Matrix};
use crate::series::LaurentSeries;

/// Extra expansion depth kept beyond the exponents a basis shape constrains.
pub const EXPANSION_MARGIN: i64 = 4;

/// Trial budget of the seeded non-special divisor search.
pub const NONSPECIAL_TRIALS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RrError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("divisor support {0} is not on the curve")]
    UnsupportedDivisor(Place),
    #[error("no non-special divisor found after {trials} trials")]
    SearchExhausted { trials: usize },
    #[error(
        "not enough admissible affine places: need {needed} distinct x-fibers, have {available}"
    )]
    NotEnoughPlaces { needed: usize, available: usize },
    #[error("the supplied functions are dependent or outside the ambient space")]
    DependentInput,
    #[error("gapped basis does not exist for these parameters: {0}")]
    NoGappedBasis(String),
}

/// A basis of `L(G)` together with expansions at infinity.
#[derive(Clone, Debug)]
pub struct RRBasis {
    pub divisor: Divisor,
    pub members: Vec<FunctionRep>,
    /// Expansions of `members` at infinity, each known below `expansion_prec`.
    pub expansions_at_p: Vec<LaurentSeries>,
    pub expansion_prec: i64,
}

impl RRBasis {
    pub fn dimension(&self) -> usize {
        self.members.len()
    }

    /// Exponent window `[lo, hi]` on which expansions at infinity are injective.
    pub fn coordinate_window(&self) -> (i64, i64) {
        let n_inf = self.divisor.get(&Place::Infinity);
        (-n_inf, self.divisor.degree() - n_inf)
    }
}

/// Expansion-window coordinates of `s`.
fn window(s: &LaurentSeries, lo: i64, hi: i64) -> Result<Vec<Elem>, RrError> {
    (lo..=hi)
        .map(|k| s.coeff_at(k).map_err(|e| RrError::Curve(e.into())))
        .collect()
}

/// Computes a basis of `L(G)`, with expansions at infinity known below the
/// larger of `extra_prec` and the end of the coordinate window.
pub fn riemann_roch_basis_with_prec(
    curve: &CurveModel,
    g: &Divisor,
    extra_prec: i64,
) -> Result<RRBasis, RrError> {
    for p in g.support() {
        if !curve.contains(p) {
            return Err(RrError::UnsupportedDivisor(*p));
        }
    }
    let n_inf = g.get(&Place::Infinity);
    let deg = g.degree();
    let expansion_prec = (deg - n_inf + 1).max(extra_prec);
    let empty = RRBasis {
        divisor: g.clone(),
        members: Vec::new(),
        expansions_at_p: Vec::new(),
        expansion_prec,
    };
    if deg < 0 {
        return Ok(empty);
    }
    let field = curve.field();
    let (px, _) = curve.coordinate_pole_orders();

    // fiber bookkeeping: k_a and the zero orders of x - a
    let mut by_x: BTreeMap<Elem, Vec<Place>> = BTreeMap::new();
    for p in g.support() {
        if let Some(a) = p.x() {
            by_x.entry(a).or_default().push(*p);
        }
    }
    let mut denominators: BTreeMap<Shift, u32> = BTreeMap::new();
    // required vanishing order of w at affine places
    let mut required: BTreeMap<Place, i64> = BTreeMap::new();
    let mut m_bound = n_inf;
    for (&a, places) in &by_x {
        let max_pole = places.iter().map(|p| g.get(p)).max().unwrap_or(0);
        let k_a = if max_pole > 0 {
            let div = curve.principal_divisor_of_shift(Shift::X(a))?;
            places
                .iter()
                .map(|p| {
                    let e = div.get(p);
                    (g.get(p).max(0) + e - 1) / e
                })
                .max()
                .unwrap_or(0)
        } else {
            0
        };
        if k_a > 0 {
            denominators.insert(Shift::X(a), k_a as u32);
            m_bound += k_a * px as i64;
            let div = curve.principal_divisor_of_shift(Shift::X(a))?;
            for (p, &e) in div.iter().filter(|(p, _)| p.is_affine()) {
                required.insert(*p, k_a * e - g.get(p));
            }
        } else {
            for p in places {
                required.insert(*p, -g.get(p));
            }
        }
    }
    if m_bound < 0 {
        return Ok(empty);
    }
    let ambient = curve.one_point_basis(m_bound as u32);
    let orders: Vec<u32> = ambient.iter().map(|(_, k)| *k).collect();

    let mut rows: Vec<Vec<Elem>> = Vec::new();
    for (p, &r) in required.iter().filter(|(_, &r)| r > 0) {
        let mut chart = curve.chart(p, r + 2);
        let exps: Vec<LaurentSeries> = orders.iter().map(|&k| chart.monomial(k)).collect();
        for e in 0..r {
            let row: Vec<Elem> = exps
                .iter()
                .map(|s| s.coeff_at(e))
                .collect::<Result<_, _>>()
                .map_err(|e| RrError::Curve(e.into()))?;
            rows.push(row);
        }
    }
    let kernel: Vec<Vec<Elem>> = if rows.is_empty() {
        (0..orders.len())
            .map(|i| {
                (0..orders.len())
                    .map(|j| if i == j { Elem::ONE } else { Elem::ZERO })
                    .collect()
            })
            .collect()
    } else {
        let m = Matrix::from_vec(field, rows.len(), orders.len(), rows.concat())?;
        kernel_basis(&m)
    };
    let members: Vec<FunctionRep> = kernel
        .into_iter()
        .map(|v| {
            let mut num = vec![Elem::ZERO; m_bound as usize + 1];
            for (c, &k) in v.into_iter().zip(&orders) {
                num[k as usize] = c;
            }
            FunctionRep::from_numerator(num).with_denominator(denominators.clone())
        })
        .collect();
    let expansions_at_p = curve.expand_functions(&members, &Place::Infinity, expansion_prec)?;
    Ok(RRBasis {
        divisor: g.clone(),
        members,
        expansions_at_p,
        expansion_prec,
    })
}

/// Basis of `L(G)`.
pub fn riemann_roch_basis(curve: &CurveModel, g: &Divisor) -> Result<RRBasis, RrError> {
    riemann_roch_basis_with_prec(curve, g, EXPANSION_MARGIN + 1)
}

/// `l(G)`.
pub fn dimension(curve: &CurveModel, g: &Divisor) -> Result<usize, RrError> {
    riemann_roch_basis_with_prec(curve, g, 0).map(|b| b.dimension())
}

/// Whether `f` lies in `L(G)`, checked by expansions at infinity, at the
/// support of `G`, and at every zero of the denominator of `f`.
pub fn contains(curve: &CurveModel, g: &Divisor, f: &FunctionRep) -> Result<bool, RrError> {
    let mut places: BTreeSet<Place> = g.support().copied().collect();
    places.insert(Place::Infinity);
    for s in f.denominator().keys() {
        for (p, _) in curve.principal_divisor_of_shift(*s)?.iter() {
            places.insert(*p);
        }
    }
    for p in places {
        let bound = -g.get(&p);
        let s = curve.expand_function(f, &p, bound)?;
        if !s.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Seeded search for an effective `D` with `deg D = g` and `l(D) = 1`,
/// supported on affine places with pairwise distinct x outside `exclusions`.
pub fn find_nonspecial_divisor(
    curve: &CurveModel,
    exclusions: &BTreeSet<Place>,
    seed: u64,
) -> Result<Divisor, RrError> {
    let g = curve.genus() as usize;
    if g == 0 {
        return Ok(Divisor::zero());
    }
    let mut fibers: BTreeMap<Elem, Vec<Place>> = BTreeMap::new();
    for p in curve.affine_places().filter(|p| !exclusions.contains(p)) {
        fibers.entry(p.x().unwrap()).or_default().push(*p);
    }
    let keys: Vec<Elem> = fibers.keys().copied().collect();
    if keys.len() < g {
        return Err(RrError::NotEnoughPlaces {
            needed: g,
            available: keys.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..NONSPECIAL_TRIALS {
        let mut xs = keys.clone();
        xs.shuffle(&mut rng);
        let mut d = Divisor::zero();
        for a in &xs[..g] {
            d.add_place(*fibers[a].choose(&mut rng).unwrap(), 1);
        }
        if dimension(curve, &d)? == 1 {
            return Ok(d);
        }
    }
    Err(RrError::SearchExhausted {
        trials: NONSPECIAL_TRIALS,
    })
}

/// Solves `coeffs * basis_coords = target` for each target row, and forms the
/// corresponding combinations of basis members.
fn preimages(
    curve: &CurveModel,
    basis: &RRBasis,
    coords: &[Vec<Elem>],
    targets: &[Vec<Elem>],
) -> Result<Vec<FunctionRep>, RrError> {
    let field = curve.field();
    let dim = basis.dimension();
    let ncoord = coords.first().map_or(0, Vec::len);
    // system: Phi^T c = target, Phi is dim x ncoord
    let mut m = Matrix::zeros(field, ncoord, dim);
    for (i, row) in coords.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m.set(j, i, v);
        }
    }
    let mut rhs = Matrix::zeros(field, ncoord, targets.len());
    for (t, target) in targets.iter().enumerate() {
        for (j, &v) in target.iter().enumerate() {
            rhs.set(j, t, v);
        }
    }
    let sol = solve_linear(&m, &rhs).map_err(|e| match e {
        FieldError::Inconsistent => RrError::NoGappedBasis("coordinate map is not onto".into()),
        other => other.into(),
    })?;
    Ok((0..targets.len())
        .map(|t| {
            let terms: Vec<(Elem, &FunctionRep)> = (0..dim)
                .map(|i| (sol.solution.get(i, t), &basis.members[i]))
                .collect();
            FunctionRep::combine(field, &terms)
        })
        .collect())
}

fn unit(n: usize, i: usize) -> Vec<Elem> {
    let mut v = vec![Elem::ZERO; n];
    v[i] = Elem::ONE;
    v
}

fn gapped_result(
    curve: &CurveModel,
    divisor: Divisor,
    members: Vec<FunctionRep>,
    prec: i64,
) -> Result<RRBasis, RrError> {
    let expansions_at_p = curve.expand_functions(&members, &Place::Infinity, prec)?;
    Ok(RRBasis {
        divisor,
        members,
        expansions_at_p,
        expansion_prec: prec,
    })
}

/// Basis `f_0 = 1, f_1, ..., f_v` of `L(D + v inf)` whose expansions at infinity
/// are `t^-i + O(t)`. `D` must be non-special of degree `g`.
pub fn gapped_basis_l22(curve: &CurveModel, d: &Divisor, v: u32) -> Result<RRBasis, RrError> {
    gapped_basis_l22_with_prec(curve, d, v, 1 + EXPANSION_MARGIN)
}

pub fn gapped_basis_l22_with_prec(
    curve: &CurveModel,
    d: &Divisor,
    v: u32,
    prec: i64,
) -> Result<RRBasis, RrError> {
    let g = d.plus(&Divisor::from_place(Place::Infinity, v as i64));
    let basis = riemann_roch_basis_with_prec(curve, &g, 1)?;
    let n = v as usize + 1;
    if basis.dimension() != n {
        return Err(RrError::NoGappedBasis(format!(
            "l(D + {v} inf) = {} but {n} is needed; D is special",
            basis.dimension()
        )));
    }
    // coordinates (lambda_0, lambda_-1, ..., lambda_-v)
    let coords: Vec<Vec<Elem>> = basis
        .expansions_at_p
        .iter()
        .map(|s| {
            let mut w = window(s, -(v as i64), 0)?;
            w.reverse();
            Ok(w)
        })
        .collect::<Result<_, RrError>>()?;
    let targets: Vec<Vec<Elem>> = (0..n).map(|i| unit(n, i)).collect();
    let mut members = preimages(curve, &basis, &coords, &targets)?;
    members[0] = FunctionRep::constant(Elem::ONE);
    gapped_result(curve, g, members, prec)
}

/// Functions `f_0 .. f_{a+b}` in `L((2g + a) Q + (a + b) inf)` with expansions
/// `t^-i + O(t^(a+1))` at infinity.
pub fn gapped_basis_l53(curve: &CurveModel, q: &Place, a: u32, b: u32) -> Result<RRBasis, RrError> {
    gapped_basis_l53_with_prec(curve, q, a, b, a as i64 + 1 + EXPANSION_MARGIN)
}

pub fn gapped_basis_l53_with_prec(
    curve: &CurveModel,
    q: &Place,
    a: u32,
    b: u32,
    prec: i64,
) -> Result<RRBasis, RrError> {
    if !q.is_affine() || !curve.contains(q) {
        return Err(RrError::UnsupportedDivisor(*q));
    }
    let g = Divisor::from_place(*q, 2 * curve.genus() as i64 + a as i64)
        .plus(&Divisor::from_place(Place::Infinity, (a + b) as i64));
    let basis = riemann_roch_basis_with_prec(curve, &g, a as i64 + 1)?;
    let top = (a + b) as i64;
    // coordinates (lambda_0, lambda_-1, ..., lambda_-(a+b), lambda_1, ..., lambda_a)
    let coords: Vec<Vec<Elem>> = basis
        .expansions_at_p
        .iter()
        .map(|s| {
            let mut w = window(s, -top, 0)?;
            w.reverse();
            w.extend(window(s, 1, a as i64)?);
            Ok(w)
        })
        .collect::<Result<_, RrError>>()?;
    let ncoord = (2 * a + b + 1) as usize;
    let targets: Vec<Vec<Elem>> = (0..=(a + b) as usize).map(|i| unit(ncoord, i)).collect();
    let members = preimages(curve, &basis, &coords, &targets)?;
    gapped_result(curve, g, members, prec)
}

/// Origin of each member of a completed basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisOrigin {
    Given(usize),
    Ambient(usize),
}

/// Completes independent members of `ambient`'s space to a basis whose first
/// entries are exactly `independent`, in order.
pub fn extend_to_basis(
    curve: &CurveModel,
    independent: &[FunctionRep],
    ambient: &RRBasis,
) -> Result<(RRBasis, Vec<BasisOrigin>), RrError> {
    let field = curve.field();
    let (lo, hi) = ambient.coordinate_window();
    for f in independent {
        if !contains(curve, &ambient.divisor, f)? {
            return Err(RrError::DependentInput);
        }
    }
    let given = curve.expand_functions(
        independent,
        &Place::Infinity,
        ambient.expansion_prec.max(hi + 1),
    )?;
    let mut rows: Vec<Vec<Elem>> = Vec::new();
    for s in &given {
        rows.push(window(s, lo, hi)?);
    }
    let width = (hi - lo + 1) as usize;
    let rank_of = |rows: &[Vec<Elem>]| -> Result<usize, RrError> {
        if rows.is_empty() {
            return Ok(0);
        }
        Ok(rank(&Matrix::from_vec(
            field,
            rows.len(),
            width,
            rows.concat(),
        )?))
    };
    if rank_of(&rows)? != independent.len() {
        return Err(RrError::DependentInput);
    }
    let mut members: Vec<FunctionRep> = independent.to_vec();
    let mut expansions = given;
    let mut origin: Vec<BasisOrigin> = (0..independent.len()).map(BasisOrigin::Given).collect();
    for (j, s) in ambient.expansions_at_p.iter().enumerate() {
        if members.len() == ambient.dimension() {
            break;
        }
        rows.push(window(s, lo, hi)?);
        if rank_of(&rows)? == rows.len() {
            members.push(ambient.members[j].clone());
            expansions.push(s.clone());
            origin.push(BasisOrigin::Ambient(j));
        } else {
            rows.pop();
        }
    }
    if members.len() != ambient.dimension() {
        return Err(RrError::DependentInput);
    }
    let prec = expansions
        .iter()
        .map(|s| s.precision())
        .min()
        .unwrap_or(ambient.expansion_prec);
    let expansions_at_p = expansions.into_iter().map(|s| s.truncate(prec)).collect();
    Ok((
        RRBasis {
            divisor: ambient.divisor.clone(),
            members,
            expansions_at_p,
            expansion_prec: prec,
        },
        origin,
    ))
}

/// Weierstrass semigroup of the place at infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemigroupView {
    pub genus: u32,
    pub gaps: Vec<u32>,
    pub conductor: u32,
    /// Minimal generators.
    pub generators: Vec<u32>,
}

impl SemigroupView {
    pub fn member(&self, k: u32) -> bool {
        k >= self.conductor || (!self.gaps.contains(&k))
    }

    /// Smallest pole number at least `m`.
    pub fn m_prime(&self, m: u32) -> u32 {
        (m..).find(|&k| self.member(k)).unwrap()
    }

    /// `m_1 = 0`, `m_i` the smallest pole number at least `m_{i-1} + m`.
    pub fn m_sequence(&self, m: u32, n: usize) -> Vec<u32> {
        let mut seq = Vec::with_capacity(n);
        let mut cur = 0;
        for i in 0..n {
            if i > 0 {
                cur = self.m_prime(cur + m);
            }
            seq.push(cur);
        }
        seq
    }

    /// Pole numbers up to `bound`.
    pub fn pole_numbers(&self, bound: u32) -> Vec<u32> {
        (0..=bound).filter(|&k| self.member(k)).collect()
    }
}

pub fn semigroup(curve: &CurveModel) -> SemigroupView {
    let g = curve.genus();
    // all gaps lie below 2g
    let gaps: Vec<u32> = (0..2 * g).filter(|&k| !curve.is_pole_number(k)).collect();
    let conductor = gaps.last().map_or(0, |&l| l + 1);
    let mut generators = Vec::new();
    for k in 1..=conductor.max(1) * 2 + 1 {
        if !curve.is_pole_number(k) {
            continue;
        }
        let reachable = {
            let mut sums = vec![false; k as usize + 1];
            sums[0] = true;
            for s in 1..=k as usize {
                sums[s] = generators
                    .iter()
                    .any(|&gen: &u32| gen as usize <= s && sums[s - gen as usize]);
            }
            sums[k as usize]
        };
        if !reachable {
            generators.push(k);
        }
    }
    SemigroupView {
        genus: g,
        gaps,
        conductor,
        generators,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn e(v: u16) -> Elem {
        Elem(v)
    }

    fn check_window(s: &LaurentSeries, i: i64, upto: i64) {
        assert_eq!(
            s.coeff_at(-i).unwrap(),
            Elem::ONE,
            "leading coefficient of member {i}: {s:?}"
        );
        for k in (-i + 1)..=upto {
            assert!(
                s.coeff_at(k).unwrap().is_zero(),
                "member {i} nonzero at t^{k}: {s:?}"
            );
        }
        assert_eq!(s.valuation(), Some(-i));
    }

    #[test]
    fn trivial_spaces() {
        let h = CurveModel::hermitian(2).unwrap();
        let b = riemann_roch_basis(&h, &Divisor::zero()).unwrap();
        assert_eq!(b.dimension(), 1);
        assert_eq!(b.expansions_at_p[0].valuation(), Some(0));
        let neg = Divisor::from_place(Place::Infinity, -1);
        assert_eq!(riemann_roch_basis(&h, &neg).unwrap().dimension(), 0);
    }

    #[test]
    fn lemma_dimension_hermitian_example() {
        let h = CurveModel::hermitian(2).unwrap();
        let d = Divisor::from_place(Place::affine(e(1), e(2)), 1);
        assert!(h.contains(&Place::affine(e(1), e(2))));
        assert_eq!(dimension(&h, &d).unwrap(), 1);
        let g = d.plus(&Divisor::from_place(Place::Infinity, 2));
        let b = riemann_roch_basis(&h, &g).unwrap();
        assert_eq!(b.dimension(), 3);
        for f in &b.members {
            assert!(contains(&h, &g, f).unwrap());
        }
    }

    #[test]
    fn riemann_theorem_dimensions() {
        for c in [
            CurveModel::rational(7).unwrap(),
            CurveModel::elliptic(7, 1, 3).unwrap(),
            CurveModel::hermitian(2).unwrap(),
            CurveModel::hermitian(3).unwrap(),
        ] {
            let g = c.genus() as i64;
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let affine: Vec<Place> = c.affine_places().copied().collect();
            for _ in 0..6 {
                let mut div = Divisor::from_place(Place::Infinity, rng.random_range(0..4));
                for _ in 0..3 {
                    div.add_place(*affine.choose(&mut rng).unwrap(), rng.random_range(-1..3));
                }
                let b = riemann_roch_basis(&c, &div).unwrap();
                if div.degree() >= 2 * g - 1 {
                    assert_eq!(
                        b.dimension() as i64,
                        div.degree() - g + 1,
                        "{} {div}",
                        c.spec_string()
                    );
                }
                assert!(b.dimension() as i64 > div.degree() - g);
                for f in &b.members {
                    assert!(
                        contains(&c, &div, f).unwrap(),
                        "{} {div}: {f}",
                        c.spec_string()
                    );
                }
                // independence through the coordinate window
                let (lo, hi) = b.coordinate_window();
                if b.dimension() > 0 {
                    let rows: Vec<Elem> = b
                        .expansions_at_p
                        .iter()
                        .flat_map(|s| window(s, lo, hi).unwrap())
                        .collect();
                    let m =
                        Matrix::from_vec(c.field(), b.dimension(), (hi - lo + 1) as usize, rows)
                            .unwrap();
                    assert_eq!(rank(&m), b.dimension());
                }
            }
        }
    }

    #[test]
    fn nonspecial_divisors() {
        let r = CurveModel::rational(5).unwrap();
        assert_eq!(
            find_nonspecial_divisor(&r, &BTreeSet::new(), 1).unwrap(),
            Divisor::zero()
        );
        let el = CurveModel::elliptic(5, 1, 1).unwrap();
        for p in el.affine_places() {
            assert_eq!(dimension(&el, &Divisor::from_place(*p, 1)).unwrap(), 1);
        }
        let h = CurveModel::hermitian(3).unwrap();
        let d = find_nonspecial_divisor(&h, &BTreeSet::new(), 42).unwrap();
        assert_eq!(d.degree(), 3);
        assert!(d.is_effective());
        assert_eq!(dimension(&h, &d).unwrap(), 1);
        let xs: BTreeSet<Elem> = d.support().map(|p| p.x().unwrap()).collect();
        assert_eq!(xs.len(), 3);
        assert_eq!(
            find_nonspecial_divisor(&h, &BTreeSet::new(), 42).unwrap(),
            d
        );
        let excl: BTreeSet<Place> = d.support().copied().collect();
        let d2 = find_nonspecial_divisor(&h, &excl, 42).unwrap();
        assert!(d2.support().all(|p| !excl.contains(p)));
    }

    #[test]
    fn l22_genus_zero_is_monomial() {
        let r = CurveModel::rational(7).unwrap();
        let b = gapped_basis_l22(&r, &Divisor::zero(), 3).unwrap();
        for (i, f) in b.members.iter().enumerate() {
            assert_eq!(*f, FunctionRep::monomial(i));
        }
        let b0 = gapped_basis_l22(&r, &Divisor::zero(), 0).unwrap();
        assert_eq!(b0.members, vec![FunctionRep::constant(Elem::ONE)]);
    }

    #[test]
    fn l22_shapes() {
        for c in [
            CurveModel::hermitian(2).unwrap(),
            CurveModel::elliptic(5, 1, 1).unwrap(),
            CurveModel::hermitian(3).unwrap(),
        ] {
            let d = find_nonspecial_divisor(&c, &BTreeSet::new(), 3).unwrap();
            let b = gapped_basis_l22(&c, &d, 3).unwrap();
            assert_eq!(b.dimension(), 4);
            for (i, s) in b.expansions_at_p.iter().enumerate() {
                check_window(s, i as i64, 0);
                assert!(s.precision() >= 5);
                assert!(contains(&c, &b.divisor, &b.members[i]).unwrap());
            }
        }
    }

    #[test]
    fn l53_shapes() {
        let h = CurveModel::hermitian(2).unwrap();
        let q = *h.affine_places().next().unwrap();
        let b = gapped_basis_l53(&h, &q, 2, 6).unwrap();
        assert_eq!(b.dimension(), 9);
        for (i, s) in b.expansions_at_p.iter().enumerate() {
            check_window(s, i as i64, 2);
            assert!(contains(&h, &b.divisor, &b.members[i]).unwrap());
        }
        let r = CurveModel::rational(5).unwrap();
        let q = Place::affine(e(0), e(0));
        let b = gapped_basis_l53(&r, &q, 0, 3).unwrap();
        for (i, s) in b.expansions_at_p.iter().enumerate() {
            check_window(s, i as i64, 0);
        }
    }

    #[test]
    fn completion() {
        let h = CurveModel::hermitian(2).unwrap();
        let d = Divisor::from_place(Place::affine(e(1), e(2)), 1)
            .plus(&Divisor::from_place(Place::Infinity, 2));
        let amb = riemann_roch_basis(&h, &d).unwrap();
        let (full, origin) =
            extend_to_basis(&h, &[FunctionRep::constant(Elem::ONE)], &amb).unwrap();
        assert_eq!(full.dimension(), 3);
        assert_eq!(origin[0], BasisOrigin::Given(0));
        let (same, _) = extend_to_basis(&h, &amb.members, &amb).unwrap();
        assert_eq!(same.members, amb.members);
        let dup = vec![
            FunctionRep::constant(Elem::ONE),
            FunctionRep::constant(e(2)),
        ];
        assert_eq!(
            extend_to_basis(&h, &dup, &amb).unwrap_err(),
            RrError::DependentInput
        );
        // y has a pole of order 3 at infinity, outside L(P + 2 inf)
        assert_eq!(
            extend_to_basis(&h, &[h.y()], &amb).unwrap_err(),
            RrError::DependentInput
        );

        let g5 = Divisor::from_place(Place::Infinity, 6);
        let amb5 = riemann_roch_basis(&h, &g5).unwrap();
        assert_eq!(amb5.dimension(), 6);
        let f = h.field();
        let pair = vec![
            FunctionRep::combine(f, &[(e(1), &amb5.members[0]), (e(2), &amb5.members[3])]),
            FunctionRep::combine(f, &[(e(3), &amb5.members[1]), (e(1), &amb5.members[4])]),
        ];
        let (full, _) = extend_to_basis(&h, &pair, &amb5).unwrap();
        assert_eq!(full.members[..2], pair[..]);
        let (lo, hi) = full.coordinate_window();
        let rows: Vec<Elem> = full
            .expansions_at_p
            .iter()
            .flat_map(|s| window(s, lo, hi).unwrap())
            .collect();
        assert_eq!(
            rank(&Matrix::from_vec(f, 6, (hi - lo + 1) as usize, rows).unwrap()),
            6
        );
    }

    #[test]
    fn semigroups() {
        let r = semigroup(&CurveModel::rational(5).unwrap());
        assert_eq!(r.conductor, 0);
        assert_eq!(r.m_prime(3), 3);
        let h2 = semigroup(&CurveModel::hermitian(2).unwrap());
        assert_eq!(h2.gaps, vec![1]);
        assert_eq!(h2.conductor, 2);
        assert_eq!(h2.generators, vec![2, 3]);
        let h3 = semigroup(&CurveModel::hermitian(3).unwrap());
        assert_eq!(h3.generators, vec![3, 4]);
        assert_eq!(h3.m_prime(2), 3);
        assert_eq!(h3.m_sequence(2, 2), vec![0, 3]);
        for c in [
            CurveModel::hermitian(3).unwrap(),
            CurveModel::hermitian(4).unwrap(),
            CurveModel::elliptic(5, 1, 1).unwrap(),
        ] {
            let s = semigroup(&c);
            assert_eq!(s.gaps.len() as u32, c.genus());
            assert!(s.conductor > c.genus() && s.conductor <= 2 * c.genus());
            let basis_orders: Vec<u32> =
                c.one_point_basis(30).into_iter().map(|(_, k)| k).collect();
            assert_eq!(basis_orders, s.pole_numbers(30));
        }
    }
}
