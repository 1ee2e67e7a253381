//! Configuration sweep, cost model and plan selection.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{assemble, select_unique, similarity_matrix, split_bias, Selection};
use crate::dontcare::{FreezeMask, Reducer};
use crate::error::{Error, Result};
use crate::mask::{care_fraction, CareMask};
use crate::table::{Decomposition, Plan, PlanBody, Table};

pub const DEFAULT_EXIGUITY: usize = 250;
pub const DEFAULT_PLUT_INPUTS: u32 = 6;

/// What to sweep and which stages to run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Inclusive range of sub-table address widths; `None` = `[2, w_in - 2]`.
    pub w_lb_in: Option<(u32, u32)>,
    /// Inclusive range of plainly stored low output bits; `None` =
    /// `[0, w_out - 1]`.
    pub w_lb_out: Option<(u32, u32)>,
    pub exiguity: usize,
    pub self_similarity: bool,
    pub higher_bits: bool,
    pub dont_cares: bool,
    pub passes: usize,
    pub plut_inputs: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            w_lb_in: None,
            w_lb_out: None,
            exiguity: DEFAULT_EXIGUITY,
            self_similarity: true,
            higher_bits: true,
            dont_cares: true,
            passes: 1,
            plut_inputs: DEFAULT_PLUT_INPUTS,
        }
    }
}

impl SearchConfig {
    /// The `(w_lb_in, w_lb_out)` pairs to evaluate, in sweep order.
    pub fn configurations(&self, w_in: u32, w_out: u32) -> Result<Vec<(u32, u32)>> {
        if self.plut_inputs < 2 {
            return Err(Error::Config(format!(
                "P-LUT input count {} < 2",
                self.plut_inputs
            )));
        }
        let lb_in = match self.w_lb_in {
            Some((lo, hi)) => {
                if lo > hi || lo < 1 || hi >= w_in {
                    return Err(Error::Config(format!(
                        "sub-table width range [{lo}, {hi}] not within [1, {}]",
                        w_in.saturating_sub(1)
                    )));
                }
                Some((lo, hi))
            }
            None if w_in < 2 => None,
            None if w_in < 4 => Some((1, w_in - 1)),
            None => Some((2, w_in - 2)),
        };
        let lb_out = match self.w_lb_out {
            Some((lo, hi)) => {
                if lo > hi || hi >= w_out {
                    return Err(Error::Config(format!(
                        "low-bit split range [{lo}, {hi}] not within [0, {}]",
                        w_out - 1
                    )));
                }
                (lo, hi)
            }
            None => (0, w_out - 1),
        };
        let lb_out = if self.higher_bits { lb_out } else { (0, 0) };
        let Some((lo, hi)) = lb_in else {
            return Ok(Vec::new());
        };
        Ok((lo..=hi)
            .flat_map(|a| (lb_out.0..=lb_out.1).map(move |b| (a, b)))
            .collect())
    }
}

/// Stored bits per component table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentBits {
    pub plain: u64,
    pub lb: u64,
    pub bias: u64,
    pub idx: u64,
    pub rsh: u64,
    pub ust: u64,
}

impl ComponentBits {
    pub fn total(&self) -> u64 {
        self.plain + self.lb + self.bias + self.idx + self.rsh + self.ust
    }
}

pub fn component_bits(d: &Decomposition) -> ComponentBits {
    let n = d.sub_table_count() as u64;
    ComponentBits {
        plain: 0,
        lb: (1u64 << d.w_in()) * u64::from(d.w_lb_out()),
        bias: n * u64::from(d.w_out_hb()),
        idx: n * u64::from(d.idx_bits()),
        rsh: n * u64::from(d.rsh_bits()),
        ust: d.t_ust().len() as u64 * u64::from(d.w_st()),
    }
}

/// Total stored bits of a decomposition.
pub fn cost_bits(d: &Decomposition) -> u64 {
    component_bits(d).total()
}

pub fn plan_bits(plan: &Plan) -> ComponentBits {
    match &plan.body {
        PlanBody::Plain(t) => ComponentBits {
            plain: t.len() as u64 * u64::from(t.w_out()),
            ..Default::default()
        },
        PlanBody::Compressed(d) => component_bits(d),
    }
}

/// P-LUTs for one stored table with `addr_bits` inputs and `out_bits`
/// outputs on `k`-input physical LUTs: `out_bits * max(1, 2^(addr_bits - k))`.
pub fn table_pluts(addr_bits: u32, out_bits: u32, k: u32) -> u64 {
    u64::from(out_bits) << addr_bits.saturating_sub(k)
}

/// Ranking heuristic for physical LUT usage: tables by [`table_pluts`] plus
/// `w_out_hb` LUTs per arithmetic stage (bias adder, variable shifter). Not
/// a synthesis prediction.
pub fn cost_pluts(plan: &Plan, k: u32) -> u64 {
    match &plan.body {
        PlanBody::Plain(t) => table_pluts(t.w_in(), t.w_out(), k),
        PlanBody::Compressed(d) => {
            let hb_addr = d.w_in() - d.w_lb_in();
            let hb = d.w_out_hb();
            let tables = table_pluts(d.w_in(), d.w_lb_out(), k)
                + table_pluts(hb_addr, hb, k)
                + table_pluts(hb_addr, d.idx_bits(), k)
                + table_pluts(hb_addr, d.rsh_bits(), k)
                + table_pluts(d.idx_bits() + d.w_lb_in(), d.w_st(), k);
            let stages = 1 + u64::from(d.rsh_bits() > 0);
            tables + stages * u64::from(hb)
        }
    }
}

/// Costs of one candidate plan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigCost {
    pub id: String,
    pub w_lb_in: u32,
    pub w_lb_out: u32,
    pub bits: ComponentBits,
    pub total_bits: u64,
    pub pluts: u64,
    /// Unique sub-tables after greedy selection and after the don't-care
    /// stage; absent for the plain table.
    pub ust_before: Option<usize>,
    pub ust_after: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub w_in: u32,
    pub w_out: u32,
    pub care_fraction: f64,
    pub plut_inputs: u32,
    /// Plain table first, then the sweep in `(w_lb_in, w_lb_out)` order.
    pub entries: Vec<ConfigCost>,
    pub chosen: usize,
    pub notes: Vec<String>,
}

impl CostReport {
    pub fn chosen(&self) -> &ConfigCost {
        &self.entries[self.chosen]
    }

    pub fn plain(&self) -> &ConfigCost {
        &self.entries[0]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "table: w_in={} w_out={} care={:.4}",
            self.w_in, self.w_out, self.care_fraction
        )?;
        for note in &self.notes {
            writeln!(f, "note: {note}")?;
        }
        writeln!(
            f,
            "{:<18} {:>10} {:>8} {:>8} {:>8} {:>8} {:>10} {:>10} {:>8} {:>9}",
            "config", "lb", "bias", "idx", "rsh", "ust", "total", "pluts", "ust_pre", "ust_post"
        )?;
        for (i, e) in self.entries.iter().enumerate() {
            let marker = if i == self.chosen { " *" } else { "" };
            let opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
            writeln!(
                f,
                "{:<18} {:>10} {:>8} {:>8} {:>8} {:>8} {:>10} {:>10} {:>8} {:>9}{marker}",
                e.id,
                e.bits.lb + e.bits.plain,
                e.bits.bias,
                e.bits.idx,
                e.bits.rsh,
                e.bits.ust,
                e.total_bits,
                e.pluts,
                opt(e.ust_before),
                opt(e.ust_after),
            )?;
        }
        let c = self.chosen();
        write!(
            f,
            "chosen: {} ({} bits, {} est. P-LUTs)",
            c.id, c.total_bits, c.pluts
        )
    }
}

/// Result of one `(w_lb_in, w_lb_out)` configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigOutcome {
    pub decomposition: Decomposition,
    pub selection: Selection,
    pub ust_before: usize,
    pub ust_after: usize,
}

/// Runs decomposition, selection, the don't-care stage and assembly for one
/// configuration.
pub fn compress_config(
    table: &Table,
    mask: &CareMask,
    w_lb_in: u32,
    w_lb_out: u32,
    cfg: &SearchConfig,
) -> Result<ConfigOutcome> {
    if mask.len() != table.len() {
        return Err(Error::SizeMismatch {
            table: table.len(),
            mask: mask.len(),
        });
    }
    if w_lb_out >= table.w_out() {
        return Err(Error::Config(format!(
            "w_lb_out {w_lb_out} >= w_out {}",
            table.w_out()
        )));
    }
    let high = table.high_bits(w_lb_out);
    let split = split_bias(&high, w_lb_in)?;
    let selection = if cfg.self_similarity {
        select_unique(similarity_matrix(
            &split.residuals,
            split.sub_table_len,
            split.w_st,
        ))
        .selection
    } else {
        Selection::identity(split.sub_table_count())
    };
    let ust_before = selection.unique_count();

    let base = assemble(table, w_lb_out, &split, &selection)?;
    if !cfg.dont_cares {
        return Ok(ConfigOutcome {
            decomposition: base,
            selection,
            ust_before,
            ust_after: ust_before,
        });
    }
    let mut reducer = Reducer::new(
        split,
        selection.clone(),
        FreezeMask::from_care(mask),
        high.w_out(),
    )?;
    reducer.reduce(cfg.exiguity, cfg.passes);
    let (split, reduced, _) = reducer.into_parts();
    let decomposition = assemble(table, w_lb_out, &split, &reduced)?;
    // Fewer uniques can still cost more once the shifts stop being uniform.
    let k = cfg.plut_inputs;
    let key = |d: &Decomposition| {
        let plan = Plan::compressed(d.clone(), cfg.exiguity);
        (cost_bits(d), cost_pluts(&plan, k))
    };
    if key(&decomposition) <= key(&base) {
        let ust_after = reduced.unique_count();
        Ok(ConfigOutcome {
            decomposition,
            selection: reduced,
            ust_before,
            ust_after,
        })
    } else {
        Ok(ConfigOutcome {
            decomposition: base,
            selection,
            ust_before,
            ust_after: ust_before,
        })
    }
}

fn plan_cost(plan: &Plan, id: String, k: u32, ust: Option<(usize, usize)>) -> ConfigCost {
    let bits = plan_bits(plan);
    ConfigCost {
        id,
        w_lb_in: plan.config.w_lb_in,
        w_lb_out: plan.config.w_lb_out,
        bits,
        total_bits: bits.total(),
        pluts: cost_pluts(plan, k),
        ust_before: ust.map(|u| u.0),
        ust_after: ust.map(|u| u.1),
    }
}

/// Sweeps every configuration and returns the cheapest plan (fewest stored
/// bits, then fewest estimated P-LUTs, then smaller `w_lb_in`, then smaller
/// `w_lb_out`; the plain table wins exact ties) together with the full
/// report.
pub fn compress(table: &Table, mask: &CareMask, cfg: &SearchConfig) -> Result<(Plan, CostReport)> {
    if mask.len() != table.len() {
        return Err(Error::SizeMismatch {
            table: table.len(),
            mask: mask.len(),
        });
    }
    let configs = cfg.configurations(table.w_in(), table.w_out())?;
    let k = cfg.plut_inputs;

    let outcomes: Vec<ConfigOutcome> = configs
        .par_iter()
        .map(|&(a, b)| compress_config(table, mask, a, b, cfg))
        .collect::<Result<_>>()?;

    let plain = Plan::plain(table.clone(), cfg.exiguity);
    let mut entries = vec![plan_cost(&plain, "plain".into(), k, None)];
    let mut plans = vec![plain];
    for outcome in outcomes {
        let plan = Plan::compressed(outcome.decomposition, cfg.exiguity);
        let id = format!(
            "lb_in={},lb_out={}",
            plan.config.w_lb_in, plan.config.w_lb_out
        );
        entries.push(plan_cost(
            &plan,
            id,
            k,
            Some((outcome.ust_before, outcome.ust_after)),
        ));
        plans.push(plan);
    }

    let chosen = entries
        .iter()
        .enumerate()
        .min_by_key(|(_, e)| (e.total_bits, e.pluts, e.w_lb_in, e.w_lb_out))
        .map(|(i, _)| i)
        .expect("plain candidate always present");

    let report = CostReport {
        w_in: table.w_in(),
        w_out: table.w_out(),
        care_fraction: care_fraction(mask),
        plut_inputs: k,
        entries,
        chosen,
        notes: Vec::new(),
    };
    Ok((plans.swap_remove(chosen), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{reconstruction_table, DecompositionParts};

    #[test]
    fn plut_examples() {
        assert_eq!(table_pluts(6, 1, 6), 1);
        assert_eq!(table_pluts(8, 4, 6), 16);
        let plain = Plan::plain(Table::from_fn(12, 2, |x| x % 4).unwrap(), 0);
        assert_eq!(cost_pluts(&plain, 6), 128);
        assert_eq!(table_pluts(3, 0, 6), 0);
    }

    #[test]
    fn plain_bits() {
        let plan = Plan::plain(Table::from_fn(8, 8, |x| x).unwrap(), 0);
        assert_eq!(plan_bits(&plan).total(), 2048);
    }

    #[test]
    fn constant_table_costs_only_bias() {
        let t = Table::from_fn(8, 6, |_| 42).unwrap();
        let o =
            compress_config(&t, &CareMask::all_care(256), 3, 0, &SearchConfig::default()).unwrap();
        let bits = component_bits(&o.decomposition);
        assert_eq!(bits.ust, 0);
        assert_eq!(bits.idx, 0);
        assert_eq!(bits.rsh, 0);
        assert_eq!(bits.total(), bits.bias);
        assert_eq!(bits.bias, 32 * 6);
    }

    #[test]
    fn cost_formula_on_single_unique() {
        // n = 4, M = 4, w_st = 4, one unique sub-table, shifts {2, 1, 0, 3}.
        let d = Decomposition::from_parts(DecompositionParts {
            w_in: 4,
            w_out: 5,
            w_lb_out: 0,
            w_lb_in: 2,
            w_st: 4,
            t_lb: None,
            t_bias: vec![3, 10, 1, 7],
            t_idx: vec![0; 4],
            t_rsh: vec![2, 1, 0, 3],
            t_ust: vec![0, 6, 8, 15],
        })
        .unwrap();
        let bits = component_bits(&d);
        assert_eq!(bits.ust, 16);
        assert_eq!(bits.idx, 0);
        assert_eq!(bits.rsh, 12);
        assert_eq!(bits.bias, 20);
        assert_eq!(cost_bits(&d), 48);
    }

    #[test]
    fn default_ranges() {
        let cfg = SearchConfig::default();
        let c = cfg.configurations(8, 3).unwrap();
        assert_eq!(c.first(), Some(&(2, 0)));
        assert_eq!(c.last(), Some(&(6, 2)));
        assert_eq!(c.len(), 5 * 3);
        assert_eq!(
            cfg.configurations(3, 2).unwrap(),
            vec![(1, 0), (1, 1), (2, 0), (2, 1)]
        );
        assert!(cfg.configurations(1, 2).unwrap().is_empty());

        let no_hbs = SearchConfig {
            higher_bits: false,
            ..SearchConfig::default()
        };
        assert!(no_hbs
            .configurations(8, 4)
            .unwrap()
            .iter()
            .all(|&(_, b)| b == 0));

        let bad = SearchConfig {
            w_lb_in: Some((0, 3)),
            ..SearchConfig::default()
        };
        assert!(bad.configurations(8, 4).is_err());
        let bad = SearchConfig {
            w_lb_out: Some((0, 4)),
            ..SearchConfig::default()
        };
        assert!(bad.configurations(8, 4).is_err());
    }

    #[test]
    fn constant_table_compresses_below_plain() {
        let t = Table::from_fn(8, 6, |_| 9).unwrap();
        let (plan, report) =
            compress(&t, &CareMask::all_care(256), &SearchConfig::default()).unwrap();
        assert!(report.chosen().total_bits <= report.plain().total_bits);
        assert!(report.chosen().total_bits < 256 * 6);
        assert_eq!(reconstruction_table(&plan), t);
    }

    #[test]
    fn mask_size_mismatch() {
        let t = Table::from_fn(4, 4, |x| x).unwrap();
        assert!(matches!(
            compress(&t, &CareMask::all_care(8), &SearchConfig::default()),
            Err(Error::SizeMismatch { table: 16, mask: 8 })
        ));
    }

    #[test]
    fn report_display_marks_choice() {
        let t = Table::from_fn(6, 4, |x| x / 4).unwrap();
        let (_, report) = compress(&t, &CareMask::all_care(64), &SearchConfig::default()).unwrap();
        let text = report.to_string();
        assert!(text.contains(" *"));
        assert!(text.lines().last().unwrap().starts_with("chosen: "));
    }
}
