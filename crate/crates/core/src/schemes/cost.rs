use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{PartitionSpec, RecoveryMap, SchemeInstance};
use crate::curve::CurveModel;

/// Exact field-element counts for one round of a scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    /// `N (tr/(mp) + rs/(np))` elements sent to workers.
    pub upload: u64,
    /// `R ts/(mn)` elements collected from the fastest workers.
    pub download: u64,
    /// `(t/m)(r/p)(s/n)` multiplications per worker.
    pub worker_multiplies: u64,
    /// `K^2 R` for the interpolation solve, plus the recovery pass:
    /// `ts R` copying positions or `(ts/mn) K R` forming coefficient sums.
    pub decode_ops: u64,
}

pub fn cost_report(inst: &SchemeInstance) -> CostLedger {
    let PartitionSpec { t, r, s, m, n, p } = inst.partition;
    let (t, r, s, m, n, p) = (t as u64, r as u64, s as u64, m as u64, n as u64, p as u64);
    let workers = inst.workers() as u64;
    let big_r = inst.threshold as u64;
    let k = inst.dimension() as u64;
    let block = t * s / (m * n);
    let recovery = match inst.recovery {
        RecoveryMap::Positions(_) => t * s * big_r,
        RecoveryMap::Coefficients(_) => block * k * big_r,
    };
    CostLedger {
        upload: workers * (t * r / (m * p) + r * s / (n * p)),
        download: big_r * block,
        worker_multiplies: (t / m) * (r / p) * (s / n),
        decode_ops: k * k * big_r + recovery,
    }
}

/// One genus condition for download bit cost, compared as `q^lhs < N^rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitCostCondition {
    pub family: String,
    /// Exponent of `q` on the AG side.
    pub q_exponent: u64,
    /// Exponent of `N` on the RS side.
    pub n_exponent: u64,
    pub ag_wins: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitCostReport {
    pub genus: u32,
    pub q: u32,
    pub workers: u64,
    pub conditions: Vec<BitCostCondition>,
}

/// Whether AG download bit cost over `F_q` beats RS over a field of size `N`.
///
/// The conditions `g < mn log(N/q)/log q`, `g < (2p-1) log(N/q)/(2 log q)` and
/// `g < (2p-1)mn (log(N/q)/(4 log q) - 1/(4p-2))` are cleared of logarithms
/// and compared exactly as integer powers.
pub fn bit_cost_advisor(
    curve: &CurveModel,
    partition: PartitionSpec,
    workers: u64,
) -> BitCostReport {
    let g = curve.genus() as u64;
    let q = curve.field().order();
    let PartitionSpec { m, n, p, .. } = partition;
    let (mn, p) = ((m * n) as u64, p as u64);
    let cond = |family: &str, q_exp: u64, n_exp: u64| BitCostCondition {
        family: family.to_string(),
        q_exponent: q_exp,
        n_exponent: n_exp,
        ag_wins: BigUint::from(q).pow(q_exp as u32) < BigUint::from(workers).pow(n_exp as u32),
    };
    BitCostReport {
        genus: curve.genus(),
        q,
        workers,
        conditions: vec![
            cond("polynomial", g + mn, mn),
            cond("matdot", 2 * g + 2 * p - 1, 2 * p - 1),
            cond(
                "polydot",
                4 * g + (2 * p - 1) * mn + 2 * mn,
                (2 * p - 1) * mn,
            ),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_sizes_never_win_with_genus() {
        let c = CurveModel::hermitian(2).unwrap();
        let part = PartitionSpec::new(4, 4, 4, 2, 2, 2).unwrap();
        let rep = bit_cost_advisor(&c, part, 4);
        assert!(rep.conditions.iter().all(|c| !c.ag_wins));
    }

    #[test]
    fn genus_zero_polynomial_and_matdot() {
        let c = CurveModel::rational(16).unwrap();
        let part = PartitionSpec::new(4, 4, 4, 2, 2, 2).unwrap();
        let rep = bit_cost_advisor(&c, part, 17);
        assert!(rep.conditions[0].ag_wins);
        assert!(rep.conditions[1].ag_wins);
        // 16^(3*4+8) against 17^12 is lost
        assert!(!rep.conditions[2].ag_wins);
    }

    #[test]
    fn hermitian_u4_against_float_formula() {
        let c = CurveModel::hermitian(4).unwrap();
        for (m, n, workers) in [
            (4usize, 4usize, 60u64),
            (2, 2, 60),
            (4, 4, 1000),
            (1, 1, 30000),
        ] {
            let part = PartitionSpec::new(4, 4, 4, m, n, 1).unwrap();
            let rep = bit_cost_advisor(&c, part, workers);
            let g = 6.0;
            let rhs = (m * n) as f64 * (workers as f64 / 16.0).ln() / 16f64.ln();
            assert_eq!(
                rep.conditions[0].ag_wins,
                g < rhs,
                "m={m} n={n} N={workers}"
            );
        }
    }
}
