use std::collections::BTreeSet;

use super::{PartitionSpec, RecoveryMap, SchemeInstance};
use crate::curve::Place;
use crate::field::Elem;
use crate::series::LaurentSeries;

/// Outcome of [`verify_conditions`]; empty `violations` means every check held.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionReport {
    pub checks: usize,
    pub violations: Vec<String>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(msg());
        }
    }
}

/// Checks the construction's defining conditions from the stored expansions.
///
/// Outer-product kinds need pairwise distinct valuations of `f_i g_w` and a
/// code basis whose recovery positions hold exactly those products.
/// Inner-product kinds need, for every product and every target `d_iw`, the
/// coefficient at `-d_iw` to be 1 on the designated diagonal and 0 elsewhere.
pub fn verify_conditions(inst: &SchemeInstance) -> ConditionReport {
    let mut rep = ConditionReport::default();
    let PartitionSpec { m, n, p, .. } = inst.partition;
    let deg = inst.ambient.degree();
    rep.check(deg + 1 == inst.threshold as i64, || {
        format!(
            "threshold {} differs from deg G + 1 = {}",
            inst.threshold,
            deg + 1
        )
    });
    let (k, r, nw) = (inst.dimension(), inst.threshold, inst.workers());
    rep.check(k <= r && r <= nw, || {
        format!("expected K <= R <= N, got {k}, {r}, {nw}")
    });

    let excluded: BTreeSet<Place> = inst.ambient.support().copied().collect();
    let funcs = inst
        .f_funcs
        .iter()
        .chain(&inst.g_funcs)
        .chain(&inst.code_basis.members);
    let funcs: Vec<_> = funcs.collect();
    for pl in &inst.eval_places {
        let bad =
            excluded.contains(pl) || funcs.iter().any(|f| inst.curve.denominator_vanishes(f, pl));
        rep.check(!bad, || format!("evaluation place {pl} is excluded"));
    }

    let product = |a: &LaurentSeries, b: &LaurentSeries| a.mul(b);
    match &inst.recovery {
        RecoveryMap::Positions(positions) => {
            let mut seen = BTreeSet::new();
            for i in 0..m {
                for w in 0..n {
                    let h = product(&inst.f_exp[i], &inst.g_exp[w]);
                    match h.valuation() {
                        Some(v) => rep.check(seen.insert(v), || {
                            format!("valuation {v} of f_{i} g_{w} repeats an earlier product")
                        }),
                        None => rep.check(false, || {
                            format!("f_{i} g_{w} vanishes to the known precision")
                        }),
                    }
                    let member = &inst.code_basis.expansions_at_p[positions[i * n + w]];
                    let prec = h.precision().min(member.precision());
                    rep.check(h.truncate(prec) == member.truncate(prec), || {
                        format!(
                            "code basis position {} does not hold f_{i} g_{w}",
                            positions[i * n + w]
                        )
                    });
                }
            }
        }
        RecoveryMap::Coefficients(exponents) => {
            let coeff = |s: &LaurentSeries, e: i64| s.coeff_at(e).ok();
            for i2 in 0..m {
                for j2 in 0..p {
                    for k2 in 0..p {
                        for w2 in 0..n {
                            let h = product(&inst.f_exp[i2 * p + j2], &inst.g_exp[k2 * n + w2]);
                            for i in 0..m {
                                for w in 0..n {
                                    let e = exponents[i * n + w];
                                    let diag = i == i2 && w == w2 && j2 == k2;
                                    let want = if diag { Elem::ONE } else { Elem::ZERO };
                                    let got = coeff(&h, e);
                                    rep.check(got == Some(want), || {
                                        format!(
                                            "f_({i2},{j2}) g_({k2},{w2}) has coefficient {got:?} at t^{e}, \
                                             target ({i},{w}) expects {want}"
                                        )
                                    });
                                    if diag {
                                        rep.check(h.valuation() == Some(e), || {
                                            format!("diagonal product for ({i},{w}) has valuation {:?}, not {e}", h.valuation())
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    rep
}
