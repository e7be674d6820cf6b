//! Straggler simulation over a built scheme.
//!
//! Time is simulated: each worker gets a completion time drawn from the
//! straggler model, and a round's makespan is the time at which the
//! `R`-th result arrives. Worker products run on the rayon pool and are
//! collected by index, so scheduling never changes the outcome.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveKind, CurveModel};
use crate::field::Matrix;
use crate::rr::semigroup;
use crate::schemes::{
    cost_report, encode, try_decode, worker_compute, CostLedger, SchemeError, SchemeInstance,
};

/// Sampled subsets per size once exhaustive enumeration would exceed this.
pub const SUBSET_CAP: u64 = 200;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("only {got} workers survived, {needed} needed")]
    InsufficientSurvivors { got: usize, needed: usize },
    #[error("invalid straggler model: {0}")]
    BadModel(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Which workers fail to report, or how long each takes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum StragglerModel {
    /// These worker indices never report.
    Adversarial { erased: Vec<usize> },
    /// `count` workers chosen uniformly under `seed` never report.
    Random { count: usize, seed: u64 },
    /// Every worker reports after `shift + Exp(rate)`; the master stops at `R`.
    DelayRace { shift: f64, rate: f64, seed: u64 },
}

impl StragglerModel {
    /// Parses `adversarial:1,4`, `random:3@7` or `delay:0.5,1.0@7`.
    pub fn parse(text: &str) -> Result<StragglerModel, SimError> {
        let bad = || SimError::BadModel(text.to_string());
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let (body, seed) = match rest.split_once('@') {
            Some((b, s)) => (b, Some(s.parse::<u64>().map_err(|_| bad())?)),
            None => (rest, None),
        };
        match name {
            "adversarial" | "none" => {
                let erased = body
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_, _>>()?;
                Ok(StragglerModel::Adversarial { erased })
            }
            "random" => Ok(StragglerModel::Random {
                count: body.trim().parse().map_err(|_| bad())?,
                seed: seed.unwrap_or(0),
            }),
            "delay" => {
                let (a, b) = body.split_once(',').ok_or_else(bad)?;
                let shift: f64 = a.trim().parse().map_err(|_| bad())?;
                let rate: f64 = b.trim().parse().map_err(|_| bad())?;
                if !(shift >= 0.0 && rate > 0.0 && rate.is_finite()) {
                    return Err(bad());
                }
                Ok(StragglerModel::DelayRace {
                    shift,
                    rate,
                    seed: seed.unwrap_or(0),
                })
            }
            _ => Err(bad()),
        }
    }

    /// Completion time of every worker, `None` for erased ones.
    pub fn completion_times(
        &self,
        workers: usize,
        round_seed: u64,
    ) -> Result<Vec<Option<f64>>, SimError> {
        match self {
            StragglerModel::Adversarial { erased } => {
                if let Some(&w) = erased.iter().find(|&&w| w >= workers) {
                    return Err(SimError::BadModel(format!("worker {w} does not exist")));
                }
                Ok((0..workers)
                    .map(|w| (!erased.contains(&w)).then_some(1.0))
                    .collect())
            }
            StragglerModel::Random { count, seed } => {
                if *count > workers {
                    return Err(SimError::BadModel(format!(
                        "cannot erase {count} of {workers} workers"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ round_seed.rotate_left(32));
                let erased = sample(&mut rng, workers, *count).into_vec();
                Ok((0..workers)
                    .map(|w| (!erased.contains(&w)).then_some(1.0))
                    .collect())
            }
            StragglerModel::DelayRace { shift, rate, seed } => {
                let exp = Exp::new(*rate).map_err(|e| SimError::BadModel(e.to_string()))?;
                Ok((0..workers)
                    .map(|w| {
                        // one stream per worker so times do not depend on evaluation order
                        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ round_seed.rotate_left(32));
                        rng.set_stream(w as u64);
                        Some(shift + exp.sample(&mut rng))
                    })
                    .collect())
            }
        }
    }
}

/// Outcome of one simulated round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Scheme specification string.
    pub scheme: String,
    pub straggler_model: StragglerModel,
    pub seed: u64,
    /// Workers whose results reached the decoder, ascending.
    pub survivors: Vec<usize>,
    /// `ok`, or the decode error message.
    pub decode_status: String,
    pub decoded_equals_oracle: bool,
    pub cost: CostLedger,
    /// Arrival time of the `R`-th result.
    pub makespan: f64,
}

impl RunRecord {
    pub fn to_json(&self) -> Result<String, SimError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// All worker products, computed in parallel and indexed by worker.
pub fn compute_all(inst: &SchemeInstance, a: &Matrix, b: &Matrix) -> Result<Vec<Matrix>, SimError> {
    let payloads = encode(inst, a, b)?;
    let results: Result<Vec<Matrix>, SchemeError> =
        payloads.par_iter().map(worker_compute).collect();
    Ok(results?)
}

/// Encode, dispatch, collect the first `R` arrivals, decode and compare with `AB`.
pub fn run_round(
    inst: &SchemeInstance,
    a: &Matrix,
    b: &Matrix,
    model: &StragglerModel,
    seed: u64,
) -> Result<RunRecord, SimError> {
    let big_r = inst.threshold();
    let times = model.completion_times(inst.workers(), seed)?;
    let mut arrivals: Vec<(f64, usize)> = times
        .iter()
        .enumerate()
        .filter_map(|(w, t)| t.map(|t| (t, w)))
        .collect();
    if arrivals.len() < big_r {
        return Err(SimError::InsufficientSurvivors {
            got: arrivals.len(),
            needed: big_r,
        });
    }
    arrivals.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    arrivals.truncate(big_r);
    let makespan = arrivals[big_r - 1].0;
    let mut survivors: Vec<usize> = arrivals.iter().map(|&(_, w)| w).collect();
    survivors.sort_unstable();

    let payloads = encode(inst, a, b)?;
    let results: Result<BTreeMap<usize, Matrix>, SchemeError> = survivors
        .par_iter()
        .map(|&w| worker_compute(&payloads[w]).map(|m| (w, m)))
        .collect();
    let results = results?;
    let oracle = a.matmul(b).map_err(SchemeError::from)?;
    let (decode_status, equal) = match try_decode(inst, &results) {
        Ok(c) => ("ok".to_string(), c == oracle),
        Err(e) => (e.to_string(), false),
    };
    Ok(RunRecord {
        scheme: inst.spec().to_string(),
        straggler_model: model.clone(),
        seed,
        survivors,
        decode_status,
        decoded_equals_oracle: equal,
        cost: cost_report(inst),
        makespan,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub subsets_tested: u64,
    pub successes: u64,
    pub fraction: f64,
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| {
        acc.saturating_mul((n - i) as u64) / (i as u64 + 1)
    })
}

fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// The subsets of `0..n` of size `k` a sweep tests: all of them when there are
/// at most [`SUBSET_CAP`], otherwise `trials` seeded uniform draws.
pub fn sweep_subsets(n: usize, k: usize, trials: usize, seed: u64) -> Vec<Vec<usize>> {
    if binomial(n, k) <= SUBSET_CAP {
        return all_subsets(n, k);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    (0..trials)
        .map(|_| {
            let mut s = sample(&mut rng, n, k).into_vec();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Decoding success rate over worker subsets of each size in `ks`.
pub fn sweep_sizes(
    inst: &SchemeInstance,
    a: &Matrix,
    b: &Matrix,
    ks: RangeInclusive<usize>,
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>, SimError> {
    let all = compute_all(inst, a, b)?;
    let oracle = a.matmul(b).map_err(SchemeError::from)?;
    let n = inst.workers();
    Ok(ks
        .filter(|&k| k >= 1 && k <= n)
        .map(|k| {
            let subsets = sweep_subsets(n, k, trials, seed);
            let successes = subsets
                .par_iter()
                .filter(|idx| {
                    let res: BTreeMap<usize, Matrix> =
                        idx.iter().map(|&w| (w, all[w].clone())).collect();
                    try_decode(inst, &res).is_ok_and(|c| c == oracle)
                })
                .count() as u64;
            let tested = subsets.len() as u64;
            SweepRow {
                k,
                subsets_tested: tested,
                successes,
                fraction: successes as f64 / tested as f64,
            }
        })
        .collect())
}

/// Sweep over subset sizes `K ..= N`.
pub fn threshold_sweep(
    inst: &SchemeInstance,
    a: &Matrix,
    b: &Matrix,
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>, SimError> {
    sweep_sizes(inst, a, b, inst.dimension()..=inst.workers(), trials, seed)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareRow {
    pub curve: String,
    pub scheme: String,
    pub ours: u64,
    pub prior: u64,
    pub source: String,
}

/// Our thresholds against earlier AG constructions for one curve.
///
/// MatDot rows for each `p`: ours `2g + 2p - 1` against the conductor-based
/// `2c + 2p - 1`, and against the best one-point threshold known for the
/// family (`2p - 1 + 3g` Hermitian, `2p - 1 + 2g + 2` elliptic).
/// Polynomial rows for each `(m, n)` pair against the three earlier
/// one-point constructions, with `m'` and `m_n` taken from the semigroup.
pub fn compare_prior(
    curve: &CurveModel,
    p_range: RangeInclusive<usize>,
    mn: &[(usize, usize)],
) -> Vec<CompareRow> {
    let g = curve.genus() as u64;
    let sg = semigroup(curve);
    let c = sg.conductor as u64;
    let name = curve.spec_string();
    let row = |scheme: String, ours: u64, prior: u64, source: &str| CompareRow {
        curve: name.clone(),
        scheme,
        ours,
        prior,
        source: source.to_string(),
    };
    let mut rows = Vec::new();
    for p in p_range {
        let p = p as u64;
        rows.push(row(
            format!("matdot p={p}"),
            2 * g + 2 * p - 1,
            2 * c + 2 * p - 1,
            "conductor",
        ));
        let best = match curve.kind() {
            CurveKind::Rational => Some((2 * p - 1, "one-point optimum")),
            CurveKind::Hermitian { .. } => {
                Some((2 * p - 1 + 3 * g, "one-point optimum, approximate"))
            }
            CurveKind::Elliptic { .. } => Some((2 * p - 1 + 2 * g + 2, "one-point optimum")),
        };
        if let Some((prior, src)) = best {
            rows.push(row(format!("matdot p={p}"), 2 * g + 2 * p - 1, prior, src));
        }
    }
    for &(m, n) in mn {
        let (mu, nu) = (m as u64, n as u64);
        let in_w = sg.member(m as u32);
        let m_prime = sg.m_prime(m as u32) as u64;
        let m_n = sg.m_sequence(m as u32, n)[n - 1] as u64;
        let tag = format!("polynomial m={m} n={n}");
        rows.push(row(
            tag.clone(),
            2 * g + mu * nu,
            2 * c + mu * nu,
            "prior A",
        ));
        let (ours_b, prior_b, ours_c, prior_c) = if in_w {
            (g + mu * nu, c + mu * nu, g + mu * nu, c + mu * nu)
        } else {
            (
                g + m_prime * nu,
                c + m_prime * nu,
                g + m_n + mu,
                c + m_n + mu,
            )
        };
        rows.push(row(tag.clone(), ours_b, prior_b, "prior B"));
        rows.push(row(tag, ours_c, prior_c, "prior C"));
    }
    rows
}

pub fn write_compare_csv<W: Write>(rows: &[CompareRow], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Seeded `(A, B)` for a scheme; the same seed always gives the same pair.
pub fn seeded_inputs(inst: &SchemeInstance, seed: u64) -> (Matrix, Matrix) {
    crate::schemes::random_inputs(inst, seed)
}
#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{build, PartitionSpec, SchemeKind};

    fn c3() -> SchemeInstance {
        let c = CurveModel::hermitian(2).unwrap();
        build(
            SchemeKind::AgC3,
            &c,
            PartitionSpec::new(4, 4, 4, 1, 1, 2).unwrap(),
            6,
            7,
        )
        .unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 5), 6);
        assert_eq!(binomial(24, 20), 10626);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(all_subsets(5, 2).len(), 10);
    }

    #[test]
    fn model_parsing() {
        assert_eq!(
            StragglerModel::parse("adversarial:1,4").unwrap(),
            StragglerModel::Adversarial { erased: vec![1, 4] }
        );
        assert_eq!(
            StragglerModel::parse("random:3@9").unwrap(),
            StragglerModel::Random { count: 3, seed: 9 }
        );
        assert_eq!(
            StragglerModel::parse("delay:0.5,2@1").unwrap(),
            StragglerModel::DelayRace {
                shift: 0.5,
                rate: 2.0,
                seed: 1
            }
        );
        assert_eq!(
            StragglerModel::parse("none").unwrap(),
            StragglerModel::Adversarial { erased: vec![] }
        );
        for bad in ["delay:1,0", "random:x", "chaos:1", "delay:1"] {
            assert!(StragglerModel::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn adversarial_erasures_at_the_threshold() {
        let inst = c3();
        let (a, b) = seeded_inputs(&inst, 3);
        let ok = run_round(
            &inst,
            &a,
            &b,
            &StragglerModel::Adversarial { erased: vec![2] },
            0,
        )
        .unwrap();
        assert!(ok.decoded_equals_oracle);
        assert_eq!(ok.survivors, vec![0, 1, 3, 4, 5]);
        let err = run_round(
            &inst,
            &a,
            &b,
            &StragglerModel::Adversarial { erased: vec![0, 5] },
            0,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            SimError::InsufficientSurvivors { got: 4, needed: 5 }
        ));
    }

    #[test]
    fn delay_race_is_deterministic() {
        let inst = c3();
        let (a, b) = seeded_inputs(&inst, 3);
        let model = StragglerModel::DelayRace {
            shift: 0.1,
            rate: 1.0,
            seed: 5,
        };
        let r1 = run_round(&inst, &a, &b, &model, 11).unwrap();
        let r2 = run_round(&inst, &a, &b, &model, 11).unwrap();
        assert_eq!(r1.to_json().unwrap(), r2.to_json().unwrap());
        assert!(r1.decoded_equals_oracle);
        assert!(r1.makespan > 0.1);
        let r3 = run_round(&inst, &a, &b, &model, 12).unwrap();
        assert_ne!(r1.makespan, r3.makespan);
    }

    #[test]
    fn sweep_endpoints() {
        let inst = c3();
        let (a, b) = seeded_inputs(&inst, 4);
        let rows = sweep_sizes(&inst, &a, &b, 1..=6, 200, 0).unwrap();
        let at = |k: usize| rows.iter().find(|r| r.k == k).unwrap().clone();
        assert_eq!(at(5).fraction, 1.0);
        assert_eq!(at(6).fraction, 1.0);
        assert_eq!(at(inst.dimension() - 1).successes, 0);
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,subsets_tested,successes,fraction\n"));
    }

    #[test]
    fn comparison_rows() {
        let h = CurveModel::hermitian(3).unwrap();
        let rows = compare_prior(&h, 2..=2, &[(2, 2)]);
        // g = 3, c = 6
        assert_eq!((rows[0].ours, rows[0].prior), (9, 15));
        assert_eq!((rows[1].ours, rows[1].prior), (9, 12));
        let poly: Vec<(u64, u64)> = rows[2..].iter().map(|r| (r.ours, r.prior)).collect();
        assert_eq!(poly, vec![(10, 16), (9, 12), (8, 11)]);
        let e = CurveModel::elliptic(5, 1, 1).unwrap();
        let rows = compare_prior(&e, 3..=3, &[]);
        assert_eq!((rows[1].ours, rows[1].prior), (7, 9));
        let r = CurveModel::rational(7).unwrap();
        for row in compare_prior(&r, 1..=3, &[(2, 3)]) {
            assert_eq!(row.ours, row.prior, "{row:?}");
        }
    }
}
