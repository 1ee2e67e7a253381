//! Dense tables, decomposed plans and the reconstruction evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default hard cap on the input width. Sweeps and reconstruction are
/// exhaustive over `2^w_in` addresses.
pub const DEFAULT_MAX_INPUT_WIDTH: u32 = 24;

/// Values are held in `u64`; one bit of headroom keeps shift/add arithmetic
/// free of overflow.
pub const MAX_OUTPUT_WIDTH: u32 = 63;

/// Number of bits needed to represent `v` (0 for 0).
pub fn bit_length(v: u64) -> u32 {
    u64::BITS - v.leading_zeros()
}

/// `ceil(log2(n))`, with `ceil_log2(0) == ceil_log2(1) == 0`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        bit_length(n - 1)
    }
}

pub(crate) fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// A fully specified `2^w_in`-entry, `w_out`-bit lookup table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Table {
    w_in: u32,
    w_out: u32,
    values: Vec<u64>,
}

impl Table {
    pub fn new(w_in: u32, w_out: u32, values: Vec<u64>) -> Result<Self> {
        Self::with_input_cap(w_in, w_out, values, DEFAULT_MAX_INPUT_WIDTH)
    }

    pub fn with_input_cap(w_in: u32, w_out: u32, values: Vec<u64>, cap: u32) -> Result<Self> {
        if w_in == 0 || w_in > cap || w_in >= usize::BITS {
            return Err(Error::InputWidth { w_in, cap });
        }
        if w_out == 0 || w_out > MAX_OUTPUT_WIDTH {
            return Err(Error::OutputWidth(w_out));
        }
        if values.len() != 1usize << w_in {
            return Err(Error::TableLength {
                w_in,
                got: values.len(),
            });
        }
        let limit = 1u64 << w_out;
        if let Some((addr, &value)) = values.iter().enumerate().find(|(_, &v)| v >= limit) {
            return Err(Error::ValueOverflow { addr, value, w_out });
        }
        Ok(Table {
            w_in,
            w_out,
            values,
        })
    }

    pub fn from_fn(w_in: u32, w_out: u32, f: impl FnMut(u64) -> u64) -> Result<Self> {
        if w_in == 0 || w_in > DEFAULT_MAX_INPUT_WIDTH {
            return Err(Error::InputWidth {
                w_in,
                cap: DEFAULT_MAX_INPUT_WIDTH,
            });
        }
        let values = (0..1u64 << w_in).map(f).collect();
        Self::new(w_in, w_out, values)
    }

    pub fn w_in(&self) -> u32 {
        self.w_in
    }

    pub fn w_out(&self) -> u32 {
        self.w_out
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, x: u64) -> Result<u64> {
        self.values
            .get(usize::try_from(x).unwrap_or(usize::MAX))
            .copied()
            .ok_or(Error::Address {
                addr: x,
                w_in: self.w_in,
            })
    }

    pub fn into_values(self) -> Vec<u64> {
        self.values
    }

    /// The table of `values >> w_lb_out`, i.e. the part stored above a plain
    /// lower-bits table of width `w_lb_out`.
    pub fn high_bits(&self, w_lb_out: u32) -> Table {
        assert!(
            w_lb_out < self.w_out,
            "higher-bit part must keep at least one bit"
        );
        Table {
            w_in: self.w_in,
            w_out: self.w_out - w_lb_out,
            values: self.values.iter().map(|v| v >> w_lb_out).collect(),
        }
    }

    /// Parses the plain-text table format: one hexadecimal value per line
    /// (optional `0x` prefix), `2^w_in` lines. Blank lines and `#` comments
    /// are skipped. When `w_out` is `None` it is inferred as the bit-length
    /// of the largest value (at least 1).
    pub fn parse_hex(text: &str, w_out: Option<u32>, cap: u32) -> Result<Table> {
        let mut values = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            last_line = idx + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let digits = line
                .strip_prefix("0x")
                .or_else(|| line.strip_prefix("0X"))
                .unwrap_or(line);
            let v = u64::from_str_radix(digits, 16)
                .map_err(|e| Error::parse(idx + 1, format!("bad hex value `{line}`: {e}")))?;
            values.push(v);
        }
        if values.is_empty() {
            return Err(Error::parse(last_line.max(1), "table file holds no values"));
        }
        if !values.len().is_power_of_two() || values.len() < 2 {
            return Err(Error::parse(
                last_line,
                format!("{} values is not a power of two >= 2", values.len()),
            ));
        }
        let w_in = values.len().trailing_zeros();
        let w_out = match w_out {
            Some(w) => w,
            None => bit_length(values.iter().copied().max().unwrap_or(0)).max(1),
        };
        Table::with_input_cap(w_in, w_out, values, cap)
    }

    /// Inverse of [`Table::parse_hex`]; lowercase hex, no prefix.
    pub fn to_hex_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 4);
        for v in &self.values {
            out.push_str(&format!("{v:x}\n"));
        }
        out
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

/// The compressed form: higher bits rebuilt as
/// `(ust[{idx[x_hb], x_lb}] >> rsh[x_hb]) + bias[x_hb]`, concatenated with a
/// plainly stored lower-bits table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Decomposition {
    w_in: u32,
    w_out: u32,
    w_lb_out: u32,
    w_lb_in: u32,
    w_st: u32,
    t_lb: Option<Vec<u64>>,
    t_bias: Vec<u64>,
    t_idx: Vec<u32>,
    t_rsh: Vec<u32>,
    t_ust: Vec<u64>,
}

/// Field-by-field view of a [`Decomposition`], used to build one from raw
/// tables (plan files, tests).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionParts {
    pub w_in: u32,
    pub w_out: u32,
    pub w_lb_out: u32,
    pub w_lb_in: u32,
    pub w_st: u32,
    pub t_lb: Option<Vec<u64>>,
    pub t_bias: Vec<u64>,
    pub t_idx: Vec<u32>,
    pub t_rsh: Vec<u32>,
    pub t_ust: Vec<u64>,
}

impl Decomposition {
    pub fn from_parts(p: DecompositionParts) -> Result<Self> {
        let bad = |msg: String| Err(Error::Invariant(msg));
        if p.w_in < 2 || p.w_in > 31 {
            return Err(Error::InputWidth {
                w_in: p.w_in,
                cap: 31,
            });
        }
        if p.w_out == 0 || p.w_out > MAX_OUTPUT_WIDTH {
            return Err(Error::OutputWidth(p.w_out));
        }
        if p.w_lb_in == 0 || p.w_lb_in >= p.w_in {
            return bad(format!("w_lb_in {} outside [1, {}]", p.w_lb_in, p.w_in - 1));
        }
        if p.w_lb_out >= p.w_out {
            return bad(format!(
                "w_lb_out {} outside [0, {}]",
                p.w_lb_out,
                p.w_out - 1
            ));
        }
        let w_out_hb = p.w_out - p.w_lb_out;
        if p.w_st > w_out_hb {
            return bad(format!(
                "w_st {} exceeds higher-bit width {w_out_hb}",
                p.w_st
            ));
        }
        let n = 1usize << (p.w_in - p.w_lb_in);
        let m = 1usize << p.w_lb_in;
        match (&p.t_lb, p.w_lb_out) {
            (None, 0) => {}
            (Some(lb), w) if w > 0 => {
                if lb.len() != 1usize << p.w_in {
                    return bad(format!(
                        "t_lb has {} entries, expected {}",
                        lb.len(),
                        1usize << p.w_in
                    ));
                }
                if lb.iter().any(|&v| v > low_mask(w)) {
                    return bad("t_lb entry exceeds w_lb_out bits".into());
                }
            }
            (None, _) => return bad("t_lb missing while w_lb_out > 0".into()),
            (Some(_), _) => return bad("t_lb present while w_lb_out = 0".into()),
        }
        for (name, len) in [
            ("t_bias", p.t_bias.len()),
            ("t_idx", p.t_idx.len()),
            ("t_rsh", p.t_rsh.len()),
        ] {
            if len != n {
                return bad(format!("{name} has {len} entries, expected {n}"));
            }
        }
        if p.t_ust.is_empty() || !p.t_ust.len().is_multiple_of(m) {
            return bad(format!(
                "t_ust length {} is not a positive multiple of {m}",
                p.t_ust.len()
            ));
        }
        let ust_count = p.t_ust.len() / m;
        if let Some(i) = p.t_idx.iter().position(|&i| i as usize >= ust_count) {
            return bad(format!(
                "t_idx[{i}] = {} but only {ust_count} unique sub-tables",
                p.t_idx[i]
            ));
        }
        if let Some(i) = p.t_rsh.iter().position(|&s| s > p.w_st) {
            return bad(format!(
                "t_rsh[{i}] = {} exceeds w_st {}",
                p.t_rsh[i], p.w_st
            ));
        }
        if p.t_ust.iter().any(|&v| v > low_mask(p.w_st)) {
            return bad(format!("t_ust entry exceeds w_st = {} bits", p.w_st));
        }
        // Every reconstructed higher-bit value must fit its width.
        let hb_max = low_mask(w_out_hb);
        for hb in 0..n {
            let base = p.t_idx[hb] as usize * m;
            let peak = p.t_ust[base..base + m].iter().max().copied().unwrap_or(0) >> p.t_rsh[hb];
            if peak + p.t_bias[hb] > hb_max {
                return bad(format!("sub-table {hb} reconstructs past {w_out_hb} bits"));
            }
        }
        Ok(Decomposition {
            w_in: p.w_in,
            w_out: p.w_out,
            w_lb_out: p.w_lb_out,
            w_lb_in: p.w_lb_in,
            w_st: p.w_st,
            t_lb: p.t_lb,
            t_bias: p.t_bias,
            t_idx: p.t_idx,
            t_rsh: p.t_rsh,
            t_ust: p.t_ust,
        })
    }

    pub fn into_parts(self) -> DecompositionParts {
        DecompositionParts {
            w_in: self.w_in,
            w_out: self.w_out,
            w_lb_out: self.w_lb_out,
            w_lb_in: self.w_lb_in,
            w_st: self.w_st,
            t_lb: self.t_lb,
            t_bias: self.t_bias,
            t_idx: self.t_idx,
            t_rsh: self.t_rsh,
            t_ust: self.t_ust,
        }
    }

    /// Every sub-table stored as its own unique entry, zero bias and shift.
    pub fn identity(table: &Table, w_lb_in: u32) -> Result<Self> {
        let n = 1usize << (table.w_in().saturating_sub(w_lb_in));
        Self::from_parts(DecompositionParts {
            w_in: table.w_in(),
            w_out: table.w_out(),
            w_lb_out: 0,
            w_lb_in,
            w_st: table.w_out(),
            t_lb: None,
            t_bias: vec![0; n],
            t_idx: (0..n as u32).collect(),
            t_rsh: vec![0; n],
            t_ust: table.values().to_vec(),
        })
    }

    pub fn w_in(&self) -> u32 {
        self.w_in
    }
    pub fn w_out(&self) -> u32 {
        self.w_out
    }
    pub fn w_lb_out(&self) -> u32 {
        self.w_lb_out
    }
    pub fn w_lb_in(&self) -> u32 {
        self.w_lb_in
    }
    pub fn w_st(&self) -> u32 {
        self.w_st
    }
    pub fn w_out_hb(&self) -> u32 {
        self.w_out - self.w_lb_out
    }
    pub fn t_lb(&self) -> Option<&[u64]> {
        self.t_lb.as_deref()
    }
    pub fn t_bias(&self) -> &[u64] {
        &self.t_bias
    }
    pub fn t_idx(&self) -> &[u32] {
        &self.t_idx
    }
    pub fn t_rsh(&self) -> &[u32] {
        &self.t_rsh
    }
    pub fn t_ust(&self) -> &[u64] {
        &self.t_ust
    }

    /// Number of sub-tables, `2^(w_in - w_lb_in)`.
    pub fn sub_table_count(&self) -> usize {
        1 << (self.w_in - self.w_lb_in)
    }

    /// Entries per sub-table, `M = 2^w_lb_in`.
    pub fn sub_table_len(&self) -> usize {
        1 << self.w_lb_in
    }

    pub fn unique_count(&self) -> usize {
        self.t_ust.len() / self.sub_table_len()
    }

    /// Stored width of `t_idx` entries; zero when a single unique sub-table
    /// makes the index implicit.
    pub fn idx_bits(&self) -> u32 {
        ceil_log2(self.unique_count() as u64)
    }

    /// Stored width of `t_rsh` entries; zero when every shift is the same
    /// constant.
    pub fn rsh_bits(&self) -> u32 {
        if self.t_rsh.windows(2).all(|w| w[0] == w[1]) {
            0
        } else {
            ceil_log2(u64::from(self.w_st) + 1)
        }
    }

    pub fn evaluate(&self, x: u64) -> Result<u64> {
        if x >> self.w_in != 0 {
            return Err(Error::Address {
                addr: x,
                w_in: self.w_in,
            });
        }
        Ok(self.eval_unchecked(x as usize))
    }

    fn eval_unchecked(&self, x: usize) -> u64 {
        let hb = x >> self.w_lb_in;
        let lb = x & (self.sub_table_len() - 1);
        let row = self.t_idx[hb] as usize * self.sub_table_len() + lb;
        let high = (self.t_ust[row] >> self.t_rsh[hb]) + self.t_bias[hb];
        let low = self.t_lb.as_ref().map_or(0, |t| t[x]);
        (high << self.w_lb_out) | low
    }
}

/// The configuration a plan came from. Plain plans carry `w_lb_in = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanConfig {
    pub w_lb_in: u32,
    pub w_lb_out: u32,
    pub exiguity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PlanBody {
    Plain(Table),
    Compressed(Decomposition),
}

/// A complete compression outcome.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Plan {
    pub body: PlanBody,
    pub config: PlanConfig,
}

impl Plan {
    pub fn plain(table: Table, exiguity: usize) -> Self {
        Plan {
            body: PlanBody::Plain(table),
            config: PlanConfig {
                w_lb_in: 0,
                w_lb_out: 0,
                exiguity,
            },
        }
    }

    pub fn compressed(decomp: Decomposition, exiguity: usize) -> Self {
        let config = PlanConfig {
            w_lb_in: decomp.w_lb_in(),
            w_lb_out: decomp.w_lb_out(),
            exiguity,
        };
        Plan {
            body: PlanBody::Compressed(decomp),
            config,
        }
    }

    pub fn w_in(&self) -> u32 {
        match &self.body {
            PlanBody::Plain(t) => t.w_in(),
            PlanBody::Compressed(d) => d.w_in(),
        }
    }

    pub fn w_out(&self) -> u32 {
        match &self.body {
            PlanBody::Plain(t) => t.w_out(),
            PlanBody::Compressed(d) => d.w_out(),
        }
    }

    pub fn decomposition(&self) -> Option<&Decomposition> {
        match &self.body {
            PlanBody::Plain(_) => None,
            PlanBody::Compressed(d) => Some(d),
        }
    }

    pub fn evaluate(&self, x: u64) -> Result<u64> {
        evaluate(self, x)
    }
}

/// Value of `plan` at address `x`.
pub fn evaluate(plan: &Plan, x: u64) -> Result<u64> {
    match &plan.body {
        PlanBody::Plain(t) => t.get(x),
        PlanBody::Compressed(d) => d.evaluate(x),
    }
}

/// The table a plan implements, by evaluating every address.
pub fn reconstruction_table(plan: &Plan) -> Table {
    match &plan.body {
        PlanBody::Plain(t) => t.clone(),
        PlanBody::Compressed(d) => {
            let values = (0..1usize << d.w_in())
                .map(|x| d.eval_unchecked(x))
                .collect();
            Table {
                w_in: d.w_in(),
                w_out: d.w_out(),
                values,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_subtable_decomp() -> Decomposition {
        // n = 2 sub-tables of M = 4; both read unique sub-table 0.
        Decomposition::from_parts(DecompositionParts {
            w_in: 3,
            w_out: 5,
            w_lb_out: 0,
            w_lb_in: 2,
            w_st: 4,
            t_lb: None,
            t_bias: vec![2, 0],
            t_idx: vec![0, 0],
            t_rsh: vec![1, 3],
            t_ust: vec![4, 6, 8, 15],
        })
        .unwrap()
    }

    #[test]
    fn evaluates_shift_then_bias() {
        let d = single_subtable_decomp();
        // (6 >> 1) + 2
        assert_eq!(d.evaluate(1).unwrap(), 5);
        // second sub-table: [4,6,8,15] >> 3 = [0,0,1,1]
        let st3: Vec<u64> = (4..8).map(|x| d.evaluate(x).unwrap()).collect();
        assert_eq!(st3, vec![0, 0, 1, 1]);
    }

    #[test]
    fn evaluate_matches_brute_force_formula() {
        let d = single_subtable_decomp();
        for x in 0..8u64 {
            let (hb, lb) = ((x >> 2) as usize, (x & 3) as usize);
            let want =
                (d.t_ust()[d.t_idx()[hb] as usize * 4 + lb] >> d.t_rsh()[hb]) + d.t_bias()[hb];
            assert_eq!(d.evaluate(x).unwrap(), want);
        }
    }

    #[test]
    fn out_of_range_address() {
        let d = single_subtable_decomp();
        assert!(matches!(
            d.evaluate(8),
            Err(Error::Address { addr: 8, w_in: 3 })
        ));
        let plan = Plan::plain(Table::new(2, 2, vec![0, 1, 2, 3]).unwrap(), 0);
        assert!(evaluate(&plan, 4).is_err());
    }

    #[test]
    fn identity_round_trips() {
        let t = Table::from_fn(6, 7, |x| (x * 37 + 11) % 128).unwrap();
        for w_lb_in in 1..6 {
            let plan = Plan::compressed(Decomposition::identity(&t, w_lb_in).unwrap(), 0);
            assert_eq!(reconstruction_table(&plan), t);
        }
        let plain = Plan::plain(t.clone(), 0);
        assert_eq!(reconstruction_table(&plain), t);
    }

    #[test]
    fn table_validation() {
        assert!(matches!(
            Table::new(2, 2, vec![0, 1, 2]),
            Err(Error::TableLength { .. })
        ));
        assert!(matches!(
            Table::new(2, 2, vec![0, 1, 2, 4]),
            Err(Error::ValueOverflow {
                addr: 3,
                value: 4,
                w_out: 2
            })
        ));
        assert!(matches!(
            Table::new(0, 2, vec![0]),
            Err(Error::InputWidth { .. })
        ));
        assert!(matches!(
            Table::new(25, 2, vec![]),
            Err(Error::InputWidth { .. })
        ));
        assert!(matches!(
            Table::new(1, 64, vec![0, 0]),
            Err(Error::OutputWidth(64))
        ));
    }

    #[test]
    fn decomposition_rejects_bad_index_and_shift() {
        let mut p = single_subtable_decomp().into_parts();
        p.t_idx[1] = 1;
        assert!(matches!(
            Decomposition::from_parts(p),
            Err(Error::Invariant(_))
        ));
        let mut p = single_subtable_decomp().into_parts();
        p.t_rsh[0] = 5;
        assert!(matches!(
            Decomposition::from_parts(p),
            Err(Error::Invariant(_))
        ));
        let mut p = single_subtable_decomp().into_parts();
        p.t_bias[0] = 25; // (15 >> 1) + 25 > 31
        assert!(matches!(
            Decomposition::from_parts(p),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn hex_table_parsing() {
        let t = Table::parse_hex("0x3\n# comment\n1\n\nff\n0\n", None, 24).unwrap();
        assert_eq!((t.w_in(), t.w_out()), (2, 8));
        assert_eq!(t.values(), &[3, 1, 255, 0]);
        assert_eq!(Table::parse_hex(&t.to_hex_text(), Some(8), 24).unwrap(), t);

        let zeros = Table::parse_hex("0\n0\n", None, 24).unwrap();
        assert_eq!(zeros.w_out(), 1);

        match Table::parse_hex("1\n2\n3\n", None, 24) {
            Err(Error::Parse { .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
        match Table::parse_hex("1\nzz\n", None, 24) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("expected line 2 error, got {other:?}"),
        }
        assert!(matches!(
            Table::parse_hex("4\n0\n", Some(2), 24),
            Err(Error::ValueOverflow { .. })
        ));
    }

    #[test]
    fn width_helpers() {
        assert_eq!(bit_length(0), 0);
        assert_eq!(bit_length(15), 4);
        assert_eq!(bit_length(16), 5);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(8), 3);
    }
}
