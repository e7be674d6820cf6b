//! Coded matrix multiplication schemes over the supported curves.
//!
//! `A` (t x r) is cut into an m x p grid of blocks `A_ij` and `B` (r x s)
//! into a p x n grid `B_kw`. A scheme attaches a function `f_ij` to every
//! block of `A` and `g_kw` to every block of `B`; worker `s` receives
//! `sum A_ij f_ij(P_s)` and `sum B_kw g_kw(P_s)` and returns their product,
//! which is the value at `P_s` of `h = f g`, an element of `L(G)` with
//! matrix coefficients. Any `R = deg G + 1` results determine `h`, and the
//! blocks `C_iw` of `AB` are read off `h` either as coordinates in a basis
//! containing the products `f_i g_w` (outer-product schemes) or as
//! coefficients of its expansion at infinity (inner-product schemes).
//!
//! Block functions are indexed row-major: `f[i * p + j]`, `g[k * n + w]`,
//! all indices zero based.

mod build;
mod codec;
mod conditions;
mod cost;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use build::{build, closed_form_threshold};
pub use codec::{decode, encode, try_decode, worker_compute, Payload};
pub use conditions::{verify_conditions, ConditionReport};
pub use cost::{bit_cost_advisor, cost_report, BitCostCondition, BitCostReport, CostLedger};

use crate::curve::{CurveError, CurveModel, Divisor, FunctionRep, Place};
use crate::field::{Elem, FieldError, Matrix};
use crate::rr::{RRBasis, RrError};
use crate::series::LaurentSeries;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("{kind} requires {requirement}")]
    KindRequirement {
        kind: SchemeKind,
        requirement: String,
    },
    #[error("{kind} is a Reed-Solomon scheme and needs a genus-0 curve, got genus {genus}")]
    GenusMismatch { kind: SchemeKind, genus: u32 },
    #[error("neither m = {m} nor n = {n} is a pole number at infinity")]
    SemigroupPreconditionFailed { m: u32, n: u32 },
    #[error("recovery threshold {r} exceeds the worker count {n}")]
    ThresholdExceedsWorkers { r: usize, n: usize },
    #[error("{needed} evaluation places requested but only {available} admissible places exist")]
    ThresholdExceedsPlaces { needed: usize, available: usize },
    #[error("construction failed its condition check: {0:?}")]
    ConditionViolated(Vec<String>),
    #[error("{got} results supplied, at least {needed} needed")]
    InsufficientResults { got: usize, needed: usize },
    #[error("evaluation system has rank {rank} below the code dimension {k}")]
    Underdetermined { rank: usize, k: usize },
    #[error("worker results are inconsistent with any element of L(G)")]
    InconsistentResults,
    #[error("unknown worker index {0}")]
    UnknownWorker(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid scheme specification: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Rr(#[from] RrError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Matrix shape and split counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PartitionSpec {
    pub t: usize,
    pub r: usize,
    pub s: usize,
    pub m: usize,
    pub n: usize,
    pub p: usize,
}

impl PartitionSpec {
    pub fn new(
        t: usize,
        r: usize,
        s: usize,
        m: usize,
        n: usize,
        p: usize,
    ) -> Result<PartitionSpec, SchemeError> {
        let spec = PartitionSpec { t, r, s, m, n, p };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        for (name, dim, split) in [
            ("t", self.t, self.m),
            ("r", self.r, self.p),
            ("s", self.s, self.n),
        ] {
            if split == 0 || dim == 0 || dim % split != 0 {
                return Err(SchemeError::InvalidPartition(format!(
                    "{name} = {dim} is not split evenly into {split}"
                )));
            }
        }
        Ok(())
    }

    /// Shape of one block of `A`.
    pub fn a_block(&self) -> (usize, usize) {
        (self.t / self.m, self.r / self.p)
    }

    /// Shape of one block of `B`.
    pub fn b_block(&self) -> (usize, usize) {
        (self.r / self.p, self.s / self.n)
    }

    /// Shape of one block of `AB`.
    pub fn c_block(&self) -> (usize, usize) {
        (self.t / self.m, self.s / self.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolyDotProfile {
    /// `alpha = 1, beta = m, theta = m(2p - 1)`.
    PolyDot,
    /// `alpha = p, beta = 1, theta = mp`.
    Entangled,
    /// `alpha = 1, beta = mn, theta = m`.
    New,
}

impl PolyDotProfile {
    pub fn weights(self, m: usize, n: usize, p: usize) -> (usize, usize, usize) {
        match self {
            PolyDotProfile::PolyDot => (1, m, m * (2 * p - 1)),
            PolyDotProfile::Entangled => (p, 1, m * p),
            PolyDotProfile::New => (1, m * n, m),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolyDotProfile::PolyDot => "polydot",
            PolyDotProfile::Entangled => "entangled",
            PolyDotProfile::New => "new",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    RsPoly,
    RsMatDot,
    RsPolyDot(PolyDotProfile),
    AgC1,
    AgC2,
    AgC3,
    AgC4,
    AgC5,
    AgC6,
    AgEntangled,
}

/// How `AB` is read back from `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// p = 1; `C_iw` is a coordinate of `h`.
    Polynomial,
    /// m = n = 1; `C` is one expansion coefficient of `h`.
    MatDot,
    /// General grid; each `C_iw` is one expansion coefficient of `h`.
    PolyDot,
}

impl SchemeKind {
    pub fn family(self) -> Family {
        match self {
            SchemeKind::RsPoly
            | SchemeKind::AgC1
            | SchemeKind::AgC2
            | SchemeKind::AgC5
            | SchemeKind::AgC6 => Family::Polynomial,
            SchemeKind::RsMatDot | SchemeKind::AgC3 => Family::MatDot,
            SchemeKind::RsPolyDot(_) | SchemeKind::AgC4 | SchemeKind::AgEntangled => {
                Family::PolyDot
            }
        }
    }

    pub fn is_reed_solomon(self) -> bool {
        matches!(
            self,
            SchemeKind::RsPoly | SchemeKind::RsMatDot | SchemeKind::RsPolyDot(_)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::RsPoly => "rs-poly",
            SchemeKind::RsMatDot => "rs-matdot",
            SchemeKind::RsPolyDot(_) => "rs-polydot",
            SchemeKind::AgC1 => "ag-c1",
            SchemeKind::AgC2 => "ag-c2",
            SchemeKind::AgC3 => "ag-c3",
            SchemeKind::AgC4 => "ag-c4",
            SchemeKind::AgC5 => "ag-c5",
            SchemeKind::AgC6 => "ag-c6",
            SchemeKind::AgEntangled => "ag-entangled",
        }
    }

    /// Parses a kind name; `profile` is only consulted for `rs-polydot`.
    pub fn parse(name: &str, profile: Option<&str>) -> Result<SchemeKind, SchemeError> {
        let kind = match name {
            "rs-poly" => SchemeKind::RsPoly,
            "rs-matdot" => SchemeKind::RsMatDot,
            "rs-polydot" => SchemeKind::RsPolyDot(match profile.unwrap_or("new") {
                "polydot" => PolyDotProfile::PolyDot,
                "entangled" => PolyDotProfile::Entangled,
                "new" => PolyDotProfile::New,
                other => return Err(SchemeError::BadSpec(format!("unknown profile {other:?}"))),
            }),
            "ag-c1" => SchemeKind::AgC1,
            "ag-c2" => SchemeKind::AgC2,
            "ag-c3" => SchemeKind::AgC3,
            "ag-c4" => SchemeKind::AgC4,
            "ag-c5" => SchemeKind::AgC5,
            "ag-c6" => SchemeKind::AgC6,
            "ag-entangled" => SchemeKind::AgEntangled,
            other => return Err(SchemeError::BadSpec(format!("unknown kind {other:?}"))),
        };
        if profile.is_some() && !matches!(kind, SchemeKind::RsPolyDot(_)) {
            return Err(SchemeError::BadSpec(format!(
                "profile is only valid for rs-polydot, not {name}"
            )));
        }
        Ok(kind)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeKind::RsPolyDot(profile) => write!(f, "rs-polydot({})", profile.name()),
            other => write!(f, "{}", other.name()),
        }
    }
}

/// Everything needed to build an instance, in the `key=value;...` text form
/// `kind=ag-c3;curve=hermitian:u=2;t=4;r=4;s=4;m=1;n=1;p=2;N=6;seed=7`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    pub curve: String,
    pub partition: PartitionSpec,
    pub workers: usize,
    pub seed: u64,
}

impl SchemeSpec {
    pub fn build(&self) -> Result<SchemeInstance, SchemeError> {
        let curve = CurveModel::parse(&self.curve)?;
        build(self.kind, &curve, self.partition, self.workers, self.seed)
    }
}

impl FromStr for SchemeSpec {
    type Err = SchemeError;

    fn from_str(text: &str) -> Result<SchemeSpec, SchemeError> {
        let mut fields = std::collections::BTreeMap::new();
        for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| SchemeError::BadSpec(format!("expected key=value, got {part:?}")))?;
            if fields
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(SchemeError::BadSpec(format!("duplicate key {k:?}")));
            }
        }
        let mut take = |k: &str| fields.remove(k);
        let kind_name = take("kind").ok_or_else(|| SchemeError::BadSpec("missing kind".into()))?;
        let profile = take("profile");
        let kind = SchemeKind::parse(&kind_name, profile.as_deref())?;
        let curve = take("curve").ok_or_else(|| SchemeError::BadSpec("missing curve".into()))?;
        let mut num = |k: &str, default: Option<u64>| -> Result<u64, SchemeError> {
            match take(k) {
                Some(v) => v.parse().map_err(|_| {
                    SchemeError::BadSpec(format!("{k} must be a non-negative integer"))
                }),
                None => default.ok_or_else(|| SchemeError::BadSpec(format!("missing {k}"))),
            }
        };
        let t = num("t", None)? as usize;
        let r = num("r", None)? as usize;
        let s = num("s", None)? as usize;
        let m = num("m", Some(1))? as usize;
        let n = num("n", Some(1))? as usize;
        let p = num("p", Some(1))? as usize;
        let workers = num("N", None)? as usize;
        let seed = num("seed", Some(0))?;
        if let Some(k) = fields.keys().next() {
            return Err(SchemeError::BadSpec(format!("unknown key {k:?}")));
        }
        Ok(SchemeSpec {
            kind,
            curve,
            partition: PartitionSpec::new(t, r, s, m, n, p)?,
            workers,
            seed,
        })
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let PartitionSpec { t, r, s, m, n, p } = self.partition;
        write!(f, "kind={}", self.kind.name())?;
        if let SchemeKind::RsPolyDot(profile) = self.kind {
            write!(f, ";profile={}", profile.name())?;
        }
        write!(
            f,
            ";curve={};t={t};r={r};s={s};m={m};n={n};p={p};N={};seed={}",
            self.curve, self.workers, self.seed
        )
    }
}

/// Which of the mirrored variants a construction used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Outer-product schemes: the one-point monomials sit on `g`.
    Standard,
    /// Outer-product schemes: roles of m and n exchanged, monomials on `f`.
    Swapped,
    /// Grid schemes: the `m = 1 or m >= n >= 2` branch.
    MCase,
    /// Grid schemes: the `n = 1 or n > m >= 2` branch.
    NCase,
}

/// How each block `C_iw` is recovered from the solved coordinates `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RecoveryMap {
    /// `C_iw = X[positions[i * n + w]]`.
    Positions(Vec<usize>),
    /// `C_iw = sum_k X_k * coeff(Lambda_k, exponents[i * n + w])` at infinity.
    Coefficients(Vec<i64>),
}

/// A fully built scheme. Immutable; share freely across threads.
#[derive(Clone, Debug)]
pub struct SchemeInstance {
    pub(crate) kind: SchemeKind,
    pub(crate) curve: CurveModel,
    pub(crate) partition: PartitionSpec,
    pub(crate) seed: u64,
    pub(crate) orientation: Orientation,
    pub(crate) d: Option<Divisor>,
    pub(crate) q: Option<Place>,
    pub(crate) ambient: Divisor,
    pub(crate) f_funcs: Vec<FunctionRep>,
    pub(crate) g_funcs: Vec<FunctionRep>,
    pub(crate) f_exp: Vec<LaurentSeries>,
    pub(crate) g_exp: Vec<LaurentSeries>,
    pub(crate) eval_places: Vec<Place>,
    pub(crate) f_evals: Matrix,
    pub(crate) g_evals: Matrix,
    pub(crate) code_basis: RRBasis,
    pub(crate) code_evals: Matrix,
    pub(crate) recovery: RecoveryMap,
    pub(crate) threshold: usize,
    /// Gapped basis the block functions were drawn from, with its zero-window end.
    pub(crate) gapped: Option<(RRBasis, i64)>,
}

impl SchemeInstance {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn curve(&self) -> &CurveModel {
        &self.curve
    }

    pub fn partition(&self) -> PartitionSpec {
        self.partition
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spec(&self) -> SchemeSpec {
        SchemeSpec {
            kind: self.kind,
            curve: self.curve.spec_string(),
            partition: self.partition,
            workers: self.workers(),
            seed: self.seed,
        }
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Non-special divisor of the construction, if it uses one.
    pub fn nonspecial_divisor(&self) -> Option<&Divisor> {
        self.d.as_ref()
    }

    /// Auxiliary affine place of the grid constructions.
    pub fn auxiliary_place(&self) -> Option<Place> {
        self.q
    }

    /// The divisor `G` with `h` in `L(G)`.
    pub fn ambient_divisor(&self) -> &Divisor {
        &self.ambient
    }

    pub fn f_funcs(&self) -> &[FunctionRep] {
        &self.f_funcs
    }

    pub fn g_funcs(&self) -> &[FunctionRep] {
        &self.g_funcs
    }

    pub fn f_expansions(&self) -> &[LaurentSeries] {
        &self.f_exp
    }

    pub fn g_expansions(&self) -> &[LaurentSeries] {
        &self.g_exp
    }

    pub fn eval_places(&self) -> &[Place] {
        &self.eval_places
    }

    /// `f_evals[s][i * p + j] = f_ij(P_s)`.
    pub fn f_evaluations(&self) -> &Matrix {
        &self.f_evals
    }

    pub fn g_evaluations(&self) -> &Matrix {
        &self.g_evals
    }

    pub fn code_basis(&self) -> &RRBasis {
        &self.code_basis
    }

    /// `code_evals[s][k] = Lambda_k(P_s)`.
    pub fn code_evaluations(&self) -> &Matrix {
        &self.code_evals
    }

    pub fn recovery_map(&self) -> &RecoveryMap {
        &self.recovery
    }

    pub fn gapped_basis(&self) -> Option<(&RRBasis, i64)> {
        self.gapped.as_ref().map(|(b, a)| (b, *a))
    }

    /// Recovery threshold `R = deg G + 1`.
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Code dimension `K = l(G)`.
    pub fn dimension(&self) -> usize {
        self.code_basis.dimension()
    }

    pub fn workers(&self) -> usize {
        self.eval_places.len()
    }

    /// Copy with `g[a]` and `g[b]` exchanged everywhere; used as a negative control.
    pub fn with_swapped_g(&self, a: usize, b: usize) -> SchemeInstance {
        let mut out = self.clone();
        out.g_funcs.swap(a, b);
        out.g_exp.swap(a, b);
        for s in 0..out.g_evals.rows() {
            let (va, vb) = (out.g_evals.get(s, a), out.g_evals.get(s, b));
            out.g_evals.set(s, a, vb);
            out.g_evals.set(s, b, va);
        }
        out
    }

    /// One-line summary for logs and the CLI.
    pub fn summary(&self) -> String {
        format!(
            "kind={} curve={} g={} R={} K={} N={} G={}",
            self.kind,
            self.curve.spec_string(),
            self.curve.genus(),
            self.threshold(),
            self.dimension(),
            self.workers(),
            self.ambient
        )
    }
}

/// Seeded random `(A, B)` conformant with the partition.
pub fn random_inputs(instance: &SchemeInstance, seed: u64) -> (Matrix, Matrix) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let PartitionSpec { t, r, s, .. } = instance.partition;
    let f = instance.curve.field();
    let a = Matrix::random(f, t, r, &mut rng);
    let b = Matrix::random(f, r, s, &mut rng);
    (a, b)
}

pub(crate) fn unit_coefficient(s: &LaurentSeries, k: i64) -> Result<Elem, SchemeError> {
    s.coeff_at(k).map_err(|e| SchemeError::Curve(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trip() {
        let text = "kind=ag-c3;curve=hermitian:u=2;t=4;r=4;s=4;m=1;n=1;p=2;N=6;seed=7";
        let spec: SchemeSpec = text.parse().unwrap();
        assert_eq!(spec.kind, SchemeKind::AgC3);
        assert_eq!(spec.to_string(), text);
        let pd: SchemeSpec =
            "kind=rs-polydot;profile=entangled;curve=rational:q=11;t=4;r=4;s=4;m=2;n=2;p=2;N=8"
                .parse()
                .unwrap();
        assert_eq!(pd.kind, SchemeKind::RsPolyDot(PolyDotProfile::Entangled));
        assert_eq!(pd.to_string().parse::<SchemeSpec>().unwrap(), pd);
    }

    #[test]
    fn spec_errors() {
        for bad in [
            "kind=ag-c9;curve=hermitian:u=2;t=4;r=4;s=4;N=6",
            "kind=ag-c3;curve=hermitian:u=2;t=4;r=4;s=4;N=6;colour=red",
            "kind=ag-c3;curve=hermitian:u=2;t=4;r=4;s=4",
            "kind=ag-c3;profile=new;curve=hermitian:u=2;t=4;r=4;s=4;N=6",
            "kind=ag-c3;curve=hermitian:u=2;t=4;r=5;s=4;p=2;N=6",
        ] {
            assert!(bad.parse::<SchemeSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn partition_blocks() {
        let p = PartitionSpec::new(6, 4, 9, 2, 3, 2).unwrap();
        assert_eq!(p.a_block(), (3, 2));
        assert_eq!(p.b_block(), (2, 3));
        assert_eq!(p.c_block(), (3, 3));
        assert!(PartitionSpec::new(6, 4, 9, 4, 3, 2).is_err());
    }
}
