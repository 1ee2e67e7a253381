//! Brute-force checks that stay independent of the compression path: plan
//! verification against the source table, an exhaustive minimum for the
//! unique sub-table count on tiny instances, and an RTL interpreter.

pub mod rtl;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::CareMask;
use crate::table::{evaluate, Plan, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub addr: u64,
    pub expected: u64,
    pub got: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub care_mismatches: Vec<Mismatch>,
    pub total_checked: usize,
    /// Don't-care addresses whose reconstructed value differs from the
    /// table. Informational.
    pub changed_dont_cares: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.care_mismatches.is_empty()
    }
}

/// Evaluates `plan` on every address and compares against `table` wherever
/// `mask` marks a care.
pub fn verify_plan(table: &Table, mask: &CareMask, plan: &Plan) -> Result<VerifyReport> {
    if mask.len() != table.len() {
        return Err(Error::SizeMismatch {
            table: table.len(),
            mask: mask.len(),
        });
    }
    if plan.w_in() != table.w_in() || plan.w_out() != table.w_out() {
        return Err(Error::Config(format!(
            "plan is {}x{} bits but table is {}x{}",
            plan.w_in(),
            plan.w_out(),
            table.w_in(),
            table.w_out()
        )));
    }
    const CHUNK: usize = 4096;
    let parts: Vec<(Vec<Mismatch>, usize)> = table
        .values()
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut bad = Vec::new();
            let mut changed = 0;
            for (i, &expected) in chunk.iter().enumerate() {
                let addr = c * CHUNK + i;
                let got = evaluate(plan, addr as u64).expect("address in range");
                if got != expected {
                    if mask.is_care(addr) {
                        bad.push(Mismatch {
                            addr: addr as u64,
                            expected,
                            got,
                        });
                    } else {
                        changed += 1;
                    }
                }
            }
            (bad, changed)
        })
        .collect();
    let mut care_mismatches = Vec::new();
    let mut changed_dont_cares = 0;
    for (bad, changed) in parts {
        care_mismatches.extend(bad);
        changed_dont_cares += changed;
    }
    Ok(VerifyReport {
        care_mismatches,
        total_checked: table.len(),
        changed_dont_cares,
    })
}

pub const ORACLE_MAX_INPUT_WIDTH: u32 = 8;
pub const ORACLE_MAX_SUB_TABLE_WIDTH: u32 = 2;
pub const ORACLE_MAX_DONT_CARES: usize = 12;

/// One sub-table as seen by the oracle: care residuals, `None` for don't
/// cares.
type Slots = Vec<Option<u64>>;

/// True minimum number of stored unique sub-tables over every completion of
/// the don't cares (residuals in `[0, 2^w_st)`), for sub-tables of
/// `2^w_lb_in` entries with per-sub-table minimum as bias.
///
/// A sub-table is either stored (a root) or equal to some root shifted right
/// by `t <= w_st`. Roots are enumerated by increasing count; for each
/// candidate root set a backtracking search assigns every other sub-table a
/// `(root, shift)` pair, narrowing each root don't care to the interval of
/// values consistent with every assignment made so far. Exponential, hence
/// the hard bounds.
pub fn oracle_min_ust(table: &Table, mask: &CareMask, w_lb_in: u32, w_st: u32) -> Result<usize> {
    if mask.len() != table.len() {
        return Err(Error::SizeMismatch {
            table: table.len(),
            mask: mask.len(),
        });
    }
    let dont_cares = mask.len() - mask.care_count();
    if table.w_in() > ORACLE_MAX_INPUT_WIDTH
        || w_lb_in > ORACLE_MAX_SUB_TABLE_WIDTH
        || dont_cares > ORACLE_MAX_DONT_CARES
    {
        return Err(Error::Bounds(format!(
            "w_in={} (max {ORACLE_MAX_INPUT_WIDTH}), w_lb_in={w_lb_in} (max {ORACLE_MAX_SUB_TABLE_WIDTH}), \
             don't cares={dont_cares} (max {ORACLE_MAX_DONT_CARES})",
            table.w_in()
        )));
    }
    if w_lb_in == 0 || w_lb_in >= table.w_in() || w_st > 32 {
        return Err(Error::Bounds(format!("w_lb_in={w_lb_in}, w_st={w_st}")));
    }
    let m = 1usize << w_lb_in;
    let top = (1u64 << w_st) - 1;

    let mut items: Vec<Slots> = Vec::new();
    for (i, chunk) in table.values().chunks(m).enumerate() {
        let bias = *chunk.iter().min().expect("non-empty sub-table");
        let slots: Slots = chunk
            .iter()
            .enumerate()
            .map(|(k, &v)| mask.is_care(i * m + k).then_some(v - bias))
            .collect();
        if slots.iter().flatten().any(|&r| r > top) {
            return Err(Error::Bounds(format!(
                "sub-table {i} has a residual wider than {w_st} bits"
            )));
        }
        // Identical fully cared sub-tables share one fate.
        let dup = slots.iter().all(Option::is_some) && items.contains(&slots);
        if !dup {
            items.push(slots);
        }
    }

    let n = items.len();
    let could_generate = |i: usize, j: usize| -> bool {
        (0..=w_st).any(|t| {
            items[i]
                .iter()
                .zip(&items[j])
                .all(|(gi, tj)| match (gi, tj) {
                    (_, None) => true,
                    (Some(g), Some(v)) => g >> t == *v,
                    (None, Some(v)) => *v <= top >> t,
                })
        })
    };
    let forced: Vec<usize> = (0..n)
        .filter(|&j| !(0..n).any(|i| i != j && could_generate(i, j)))
        .collect();
    let free: Vec<usize> = (0..n).filter(|j| !forced.contains(j)).collect();

    for extra in 0..=free.len() {
        let mut found = false;
        for_each_combination(free.len(), extra, &mut |pick| {
            if found {
                return;
            }
            let mut roots = forced.clone();
            roots.extend(pick.iter().map(|&p| free[p]));
            if cover_exists(&items, &roots, w_st) {
                found = true;
            }
        });
        if found {
            return Ok(forced.len() + extra);
        }
    }
    unreachable!("every sub-table as a root is always a cover")
}

fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Whether every non-root item can be produced by some root under one
/// shared completion of the roots' don't cares.
fn cover_exists(items: &[Slots], roots: &[usize], w_st: u32) -> bool {
    let top = (1u64 << w_st) - 1;
    let others: Vec<usize> = (0..items.len()).filter(|i| !roots.contains(i)).collect();
    // intervals[r][k]: feasible values of root r's don't care at slot k.
    let mut intervals: Vec<Vec<(u64, u64)>> = roots
        .iter()
        .map(|_| vec![(0, top); items[0].len()])
        .collect();

    fn place(
        depth: usize,
        others: &[usize],
        items: &[Slots],
        roots: &[usize],
        intervals: &mut Vec<Vec<(u64, u64)>>,
        w_st: u32,
    ) -> bool {
        let Some(&j) = others.get(depth) else {
            return true;
        };
        for (ri, &r) in roots.iter().enumerate() {
            'shift: for t in 0..=w_st {
                let saved = intervals[ri].clone();
                for (k, (g, v)) in items[r].iter().zip(&items[j]).enumerate() {
                    let Some(v) = v else { continue };
                    match g {
                        Some(g) => {
                            if g >> t != *v {
                                intervals[ri] = saved;
                                continue 'shift;
                            }
                        }
                        None => {
                            let lo = v << t;
                            let hi = lo | ((1u64 << t) - 1);
                            let (a, b) = intervals[ri][k];
                            let (a, b) = (a.max(lo), b.min(hi));
                            if a > b {
                                intervals[ri] = saved;
                                continue 'shift;
                            }
                            intervals[ri][k] = (a, b);
                        }
                    }
                }
                if place(depth + 1, others, items, roots, intervals, w_st) {
                    return true;
                }
                intervals[ri] = saved;
            }
        }
        false
    }

    place(0, &others, items, roots, &mut intervals, w_st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{Decomposition, DecompositionParts};

    fn family_table() -> (Table, CareMask) {
        let residual = [[0u64, 3, 2, 3], [0, 3, 4, 7], [0, 6, 8, 15], [0, 0, 1, 1]];
        let bias = [3u64, 10, 1, 7];
        let values: Vec<u64> = (0..4)
            .flat_map(|i| residual[i].iter().map(move |r| r + bias[i]))
            .collect();
        let mut flags = vec![true; 16];
        flags[1] = false;
        (Table::new(4, 5, values).unwrap(), CareMask::new(flags))
    }

    #[test]
    fn oracle_on_family() {
        let (t, mask) = family_table();
        assert_eq!(oracle_min_ust(&t, &mask, 2, 4).unwrap(), 1);
        assert_eq!(
            oracle_min_ust(&t, &CareMask::all_care(16), 2, 4).unwrap(),
            2
        );
    }

    #[test]
    fn oracle_mostly_dont_care() {
        let t = Table::from_fn(4, 4, |x| (x * 5) % 16).unwrap();
        let mask = CareMask::new((0..16).map(|x| x < 4).collect());
        assert_eq!(oracle_min_ust(&t, &mask, 2, 4).unwrap(), 1);
    }

    #[test]
    fn oracle_bounds() {
        let t = Table::from_fn(9, 4, |x| x % 16).unwrap();
        assert!(matches!(
            oracle_min_ust(&t, &CareMask::all_care(512), 2, 4),
            Err(Error::Bounds(_))
        ));
        let t = Table::from_fn(6, 4, |x| x % 16).unwrap();
        assert!(matches!(
            oracle_min_ust(&t, &CareMask::all_care(64), 3, 4),
            Err(Error::Bounds(_))
        ));
        assert!(matches!(
            oracle_min_ust(&t, &CareMask::all_dont_care(64), 2, 4),
            Err(Error::Bounds(_))
        ));
    }

    #[test]
    fn verify_identity_and_corruption() {
        let (t, mask) = family_table();
        let plan = Plan::plain(t.clone(), 0);
        let r = verify_plan(&t, &mask, &plan).unwrap();
        assert!(r.passed());
        assert_eq!((r.total_checked, r.changed_dont_cares), (16, 0));

        let mut p = Decomposition::identity(&t, 2).unwrap().into_parts();
        p.t_ust[6] ^= 1;
        let bad = Plan::compressed(Decomposition::from_parts(p).unwrap(), 0);
        let r = verify_plan(&t, &mask, &bad).unwrap();
        assert_eq!(r.care_mismatches.len(), 1);
        assert_eq!(r.care_mismatches[0].addr, 6);
    }

    #[test]
    fn verify_counts_changed_dont_cares() {
        let (t, mask) = family_table();
        let mut values = t.values().to_vec();
        values[1] += 1;
        let p = DecompositionParts {
            t_ust: values,
            ..Decomposition::identity(&t, 2).unwrap().into_parts()
        };
        let plan = Plan::compressed(Decomposition::from_parts(p).unwrap(), 0);
        let r = verify_plan(&t, &mask, &plan).unwrap();
        assert!(r.passed());
        assert_eq!(r.changed_dont_cares, 1);
    }

    #[test]
    fn verify_size_mismatch() {
        let (t, _) = family_table();
        assert!(verify_plan(&t, &CareMask::all_care(8), &Plan::plain(t.clone(), 0)).is_err());
        let other = Table::from_fn(3, 5, |x| x).unwrap();
        assert!(verify_plan(&t, &CareMask::all_care(16), &Plan::plain(other, 0)).is_err());
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, &mut |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 6);
        let mut none = 0;
        for_each_combination(3, 0, &mut |_| none += 1);
        assert_eq!(none, 1);
    }
}
