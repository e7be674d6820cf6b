use std::collections::BTreeSet;

use super::{
    conditions::verify_conditions, Family, Orientation, PartitionSpec, PolyDotProfile, RecoveryMap,
    SchemeError, SchemeInstance, SchemeKind,
};
use crate::curve::{CurveModel, Divisor, FunctionRep, Place};
use crate::field::Matrix;
use crate::rr::{
    extend_to_basis, find_nonspecial_divisor, gapped_basis_l22_with_prec,
    gapped_basis_l53_with_prec, riemann_roch_basis_with_prec, semigroup, RRBasis, EXPANSION_MARGIN,
};

/// Functions and divisors chosen by a construction, before evaluation.
struct Design {
    f: Vec<FunctionRep>,
    g: Vec<FunctionRep>,
    ambient: Divisor,
    orientation: Orientation,
    d: Option<Divisor>,
    q: Option<Place>,
    /// Target exponents at infinity for coefficient recovery, indexed `i * n + w`.
    targets: Option<Vec<i64>>,
    gapped: Option<(RRBasis, i64)>,
}

impl Design {
    fn new(f: Vec<FunctionRep>, g: Vec<FunctionRep>, ambient: Divisor) -> Design {
        Design {
            f,
            g,
            ambient,
            orientation: Orientation::Standard,
            d: None,
            q: None,
            targets: None,
            gapped: None,
        }
    }
}

fn inf(k: i64) -> Divisor {
    Divisor::from_place(Place::Infinity, k)
}

fn requirement(kind: SchemeKind, text: &str) -> SchemeError {
    SchemeError::KindRequirement {
        kind,
        requirement: text.to_string(),
    }
}

/// Builds a scheme of the given kind with `workers` evaluation places.
pub fn build(
    kind: SchemeKind,
    curve: &CurveModel,
    partition: PartitionSpec,
    workers: usize,
    seed: u64,
) -> Result<SchemeInstance, SchemeError> {
    partition.validate()?;
    let PartitionSpec { m, n, p, .. } = partition;
    match kind.family() {
        Family::Polynomial if p != 1 => return Err(requirement(kind, "p = 1")),
        Family::MatDot if m != 1 || n != 1 => return Err(requirement(kind, "m = n = 1")),
        _ => {}
    }
    if kind.is_reed_solomon() && curve.genus() != 0 {
        return Err(SchemeError::GenusMismatch {
            kind,
            genus: curve.genus(),
        });
    }
    let threshold = closed_form_threshold(kind, curve, partition)?;
    if workers < threshold {
        return Err(SchemeError::ThresholdExceedsWorkers {
            r: threshold,
            n: workers,
        });
    }
    let prec = threshold as i64 + EXPANSION_MARGIN;
    let design = design(kind, curve, partition, seed, prec)?;
    debug_assert_eq!(design.ambient.degree() + 1, threshold as i64);

    let field = curve.field();
    let ambient_basis = riemann_roch_basis_with_prec(curve, &design.ambient, prec)?;
    let (code_basis, recovery) = match &design.targets {
        None => {
            // outer products: f_i g_w sits at position i + w m of the code basis
            let mut products = Vec::with_capacity(m * n);
            let mut positions = vec![0; m * n];
            for w in 0..n {
                for i in 0..m {
                    positions[i * n + w] = products.len();
                    products.push(curve.mul(&design.f[i], &design.g[w]));
                }
            }
            let (basis, _) = extend_to_basis(curve, &products, &ambient_basis)?;
            (basis, RecoveryMap::Positions(positions))
        }
        Some(targets) => (
            ambient_basis,
            RecoveryMap::Coefficients(targets.iter().map(|d| -d).collect()),
        ),
    };

    let eval_places = evaluation_places(curve, &design, &code_basis, workers)?;
    let table = |funcs: &[FunctionRep]| -> Result<Matrix, SchemeError> {
        let mut out = Matrix::zeros(field, eval_places.len(), funcs.len());
        for (s, place) in eval_places.iter().enumerate() {
            for (c, func) in funcs.iter().enumerate() {
                out.set(s, c, curve.evaluate(func, place)?);
            }
        }
        Ok(out)
    };
    let f_evals = table(&design.f)?;
    let g_evals = table(&design.g)?;
    let code_evals = table(&code_basis.members)?;
    let f_exp = curve.expand_functions(&design.f, &Place::Infinity, prec)?;
    let g_exp = curve.expand_functions(&design.g, &Place::Infinity, prec)?;

    let instance = SchemeInstance {
        kind,
        curve: curve.clone(),
        partition,
        seed,
        orientation: design.orientation,
        d: design.d,
        q: design.q,
        ambient: design.ambient,
        f_funcs: design.f,
        g_funcs: design.g,
        f_exp,
        g_exp,
        eval_places,
        f_evals,
        g_evals,
        code_basis,
        code_evals,
        recovery,
        threshold,
        gapped: design.gapped,
    };
    let report = verify_conditions(&instance);
    if !report.passed() {
        return Err(SchemeError::ConditionViolated(report.violations));
    }
    Ok(instance)
}

/// Recovery threshold predicted by the closed form for each construction.
pub fn closed_form_threshold(
    kind: SchemeKind,
    curve: &CurveModel,
    partition: PartitionSpec,
) -> Result<usize, SchemeError> {
    let PartitionSpec { m, n, p, .. } = partition;
    let g = curve.genus() as usize;
    let sg = semigroup(curve);
    Ok(match kind {
        SchemeKind::RsPoly => m * n,
        SchemeKind::RsMatDot => 2 * p - 1,
        SchemeKind::RsPolyDot(profile) => {
            let (alpha, beta, theta) = profile.weights(m, n, p);
            (m - 1) * alpha + 2 * (p - 1) * beta + (n - 1) * theta + 1
        }
        SchemeKind::AgC1 => 2 * g + m * n,
        SchemeKind::AgC2 => {
            if !sg.member(m as u32) && !sg.member(n as u32) {
                return Err(SchemeError::SemigroupPreconditionFailed {
                    m: m as u32,
                    n: n as u32,
                });
            }
            g + m * n
        }
        SchemeKind::AgC3 => 2 * g + 2 * p - 1,
        SchemeKind::AgC4 => {
            let extra = if m_case(m, n) {
                2 * m * n - 2 * m
            } else {
                2 * m * n - 2 * n
            };
            4 * g + (2 * p - 1) * m * n + extra
        }
        SchemeKind::AgC5 => g + sg.m_prime(m as u32) as usize * n,
        SchemeKind::AgC6 => g + sg.m_sequence(m as u32, n)[n - 1] as usize + m,
        SchemeKind::AgEntangled => {
            let a = if m_case(m, n) {
                m * p * (n - 1)
            } else {
                n * p * (m - 1)
            };
            4 * g + 2 * a + m * n * p + p - 1
        }
    })
}

/// The grid constructions branch on `m = 1 or m >= n >= 2`.
fn m_case(m: usize, n: usize) -> bool {
    m == 1 || (m >= n && n >= 2)
}

fn design(
    kind: SchemeKind,
    curve: &CurveModel,
    part: PartitionSpec,
    seed: u64,
    prec: i64,
) -> Result<Design, SchemeError> {
    let PartitionSpec { m, n, p, .. } = part;
    let g = curve.genus() as i64;
    match kind {
        SchemeKind::RsPoly => {
            let f = (0..m).map(FunctionRep::monomial).collect();
            let gs = (0..n).map(|w| FunctionRep::monomial(w * m)).collect();
            Ok(Design::new(f, gs, inf((m * n) as i64 - 1)))
        }
        SchemeKind::RsMatDot => {
            let f = (0..p).map(FunctionRep::monomial).collect();
            let gs = (0..p).map(|k| FunctionRep::monomial(p - 1 - k)).collect();
            let mut d = Design::new(f, gs, inf(2 * (p as i64 - 1)));
            d.targets = Some(vec![p as i64 - 1]);
            Ok(d)
        }
        SchemeKind::RsPolyDot(profile) => Ok(rs_polydot(profile, part)),
        SchemeKind::AgC1 => {
            let dv = nonspecial(curve, seed)?;
            let v = (m - 1).max((n - 1) * m);
            let basis = gapped_basis_l22_with_prec(curve, &dv, v as u32, prec)?;
            let f = (0..m).map(|i| basis.members[i].clone()).collect();
            let gs = (0..n).map(|w| basis.members[w * m].clone()).collect();
            let ambient = dv.scaled(2).plus(&inf((m * n) as i64 - 1));
            let mut d = Design::new(f, gs, ambient);
            d.d = Some(dv);
            d.gapped = Some((basis, 0));
            Ok(d)
        }
        SchemeKind::AgC2 | SchemeKind::AgC5 | SchemeKind::AgC6 => {
            one_point_design(kind, curve, part, seed, prec)
        }
        SchemeKind::AgC3 => {
            let dv = nonspecial(curve, seed)?;
            let basis = gapped_basis_l22_with_prec(curve, &dv, p as u32 - 1, prec)?;
            let f = (0..p).map(|j| basis.members[j].clone()).collect();
            let gs = (0..p).map(|k| basis.members[p - 1 - k].clone()).collect();
            let ambient = dv.scaled(2).plus(&inf(2 * (p as i64 - 1)));
            let mut d = Design::new(f, gs, ambient);
            d.d = Some(dv);
            d.targets = Some(vec![p as i64 - 1]);
            d.gapped = Some((basis, 0));
            Ok(d)
        }
        SchemeKind::AgC4 | SchemeKind::AgEntangled => {
            let q = *curve
                .affine_places()
                .next()
                .ok_or(SchemeError::ThresholdExceedsPlaces {
                    needed: 1,
                    available: 0,
                })?;
            let mcase = m_case(m, n);
            // (f index, g index, target) as functions of the block indices
            type Idx = Box<dyn Fn(usize, usize) -> usize>;
            let (a, fi, gi, di): (usize, Idx, Idx, Idx) = match (kind, mcase) {
                (SchemeKind::AgC4, true) => (
                    m * (n - 1),
                    Box::new(move |i, j| i + j * m * n),
                    Box::new(move |k, w| (p - 1 - k) * m * n + m * w),
                    Box::new(move |i, w| i + (p - 1) * m * n + m * w),
                ),
                (SchemeKind::AgC4, false) => (
                    n * (m - 1),
                    Box::new(move |i, j| i * n + j * m * n),
                    Box::new(move |k, w| (p - 1 - k) * m * n + w),
                    Box::new(move |i, w| i * n + (p - 1) * m * n + w),
                ),
                (_, true) => (
                    m * p * (n - 1),
                    Box::new(move |i, j| i * p + j),
                    Box::new(move |k, w| (p - 1 - k) + w * m * p),
                    Box::new(move |i, w| (p - 1) + i * p + w * m * p),
                ),
                (_, false) => (
                    n * p * (m - 1),
                    Box::new(move |i, j| i * n * p + j),
                    Box::new(move |k, w| (p - 1 - k) + w * p),
                    Box::new(move |i, w| (p - 1) + i * n * p + w * p),
                ),
            };
            let f_idx: Vec<usize> = (0..m * p).map(|c| fi(c / p, c % p)).collect();
            let g_idx: Vec<usize> = (0..p * n).map(|c| gi(c / n, c % n)).collect();
            let top = f_idx.iter().chain(&g_idx).copied().max().unwrap_or(0);
            let b = top - a;
            let basis = gapped_basis_l53_with_prec(curve, &q, a as u32, b as u32, prec)?;
            let f = f_idx.iter().map(|&k| basis.members[k].clone()).collect();
            let gs = g_idx.iter().map(|&k| basis.members[k].clone()).collect();
            let pole_top = f_idx.iter().max().unwrap() + g_idx.iter().max().unwrap();
            let ambient = Divisor::from_place(q, 4 * g + 2 * a as i64).plus(&inf(pole_top as i64));
            let mut d = Design::new(f, gs, ambient);
            d.q = Some(q);
            d.orientation = if mcase {
                Orientation::MCase
            } else {
                Orientation::NCase
            };
            d.targets = Some((0..m * n).map(|c| di(c / n, c % n) as i64).collect());
            d.gapped = Some((basis, a as i64));
            Ok(d)
        }
    }
}

fn rs_polydot(profile: PolyDotProfile, part: PartitionSpec) -> Design {
    let PartitionSpec { m, n, p, .. } = part;
    let (alpha, beta, theta) = profile.weights(m, n, p);
    let f = (0..m * p)
        .map(|c| FunctionRep::monomial((c / p) * alpha + (c % p) * beta))
        .collect();
    let g = (0..p * n)
        .map(|c| FunctionRep::monomial((p - 1 - c / n) * beta + (c % n) * theta))
        .collect();
    let r = (m - 1) * alpha + 2 * (p - 1) * beta + (n - 1) * theta + 1;
    let mut d = Design::new(f, g, inf(r as i64 - 1));
    d.targets = Some(
        (0..m * n)
            .map(|c| ((c / n) * alpha + (p - 1) * beta + (c % n) * theta) as i64)
            .collect(),
    );
    d
}

fn nonspecial(curve: &CurveModel, seed: u64) -> Result<Divisor, SchemeError> {
    Ok(find_nonspecial_divisor(curve, &BTreeSet::new(), seed)?)
}

/// One-point monomial with pole order `k`, scaled to expansion `t^-k + ...`.
fn normalized_monomial(curve: &CurveModel, k: usize) -> Result<FunctionRep, SchemeError> {
    let mono = FunctionRep::monomial(k);
    let s = curve.expand_function(&mono, &Place::Infinity, 1 - k as i64)?;
    let lead = super::unit_coefficient(&s, -(k as i64))?;
    Ok(mono.scale(curve.field(), curve.field().inv(lead)))
}

/// Constructions pairing a gapped basis of `L(D + (m - 1) inf)` with one-point
/// monomials of prescribed pole orders.
fn one_point_design(
    kind: SchemeKind,
    curve: &CurveModel,
    part: PartitionSpec,
    seed: u64,
    prec: i64,
) -> Result<Design, SchemeError> {
    let PartitionSpec { m, n, .. } = part;
    let sg = semigroup(curve);
    // (gapped side size, monomial pole orders, degree at infinity of G, swapped)
    let (gap_len, orders, top, swapped): (usize, Vec<usize>, usize, bool) = match kind {
        SchemeKind::AgC2 => {
            if sg.member(m as u32) {
                (m, (0..n).map(|w| w * m).collect(), m * n - 1, false)
            } else {
                (n, (0..m).map(|i| i * n).collect(), m * n - 1, true)
            }
        }
        SchemeKind::AgC5 => {
            let mp = sg.m_prime(m as u32) as usize;
            (m, (0..n).map(|w| w * mp).collect(), mp * n - 1, false)
        }
        _ => {
            let seq: Vec<usize> = sg
                .m_sequence(m as u32, n)
                .into_iter()
                .map(|k| k as usize)
                .collect();
            let top = seq[n - 1] + m - 1;
            (m, seq, top, false)
        }
    };
    let dv = nonspecial(curve, seed)?;
    let basis = gapped_basis_l22_with_prec(curve, &dv, gap_len as u32 - 1, prec)?;
    let gapped: Vec<FunctionRep> = basis.members[..gap_len].to_vec();
    let monos: Vec<FunctionRep> = orders
        .iter()
        .map(|&k| normalized_monomial(curve, k))
        .collect::<Result<_, _>>()?;
    let (f, g) = if swapped {
        (monos, gapped)
    } else {
        (gapped, monos)
    };
    let mut d = Design::new(f, g, dv.plus(&inf(top as i64)));
    d.orientation = if swapped {
        Orientation::Swapped
    } else {
        Orientation::Standard
    };
    d.d = Some(dv);
    d.gapped = Some((basis, 0));
    Ok(d)
}

/// First `count` affine places avoiding `supp G` and every denominator zero.
fn evaluation_places(
    curve: &CurveModel,
    design: &Design,
    code_basis: &RRBasis,
    count: usize,
) -> Result<Vec<Place>, SchemeError> {
    let support: BTreeSet<Place> = design.ambient.support().copied().collect();
    let funcs: Vec<&FunctionRep> = design
        .f
        .iter()
        .chain(&design.g)
        .chain(&code_basis.members)
        .collect();
    let admissible: Vec<Place> = curve
        .affine_places()
        .filter(|pl| {
            !support.contains(pl) && !funcs.iter().any(|f| curve.denominator_vanishes(f, pl))
        })
        .copied()
        .collect();
    if admissible.len() < count {
        return Err(SchemeError::ThresholdExceedsPlaces {
            needed: count,
            available: admissible.len(),
        });
    }
    Ok(admissible[..count].to_vec())
}
