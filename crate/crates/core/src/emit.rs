//! Verilog and plan-file output.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::search::CostReport;
use crate::table::{Decomposition, DecompositionParts, Plan, PlanBody, PlanConfig, Table};

const PLAN_MAGIC: &str = "dclut-plan 1";

const KEYWORDS: &[&str] = &[
    "always",
    "assign",
    "begin",
    "case",
    "default",
    "else",
    "end",
    "endcase",
    "endmodule",
    "for",
    "function",
    "if",
    "initial",
    "inout",
    "input",
    "integer",
    "localparam",
    "module",
    "output",
    "parameter",
    "reg",
    "signed",
    "wire",
];

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&name)
}

fn lit(width: u32, value: u64) -> String {
    format!("{width}'h{value:x}")
}

fn range(width: u32) -> String {
    format!("[{}:0]", width - 1)
}

/// A full-case ROM: `always @*` block assigning `name` from `addr`.
fn rom(
    out: &mut String,
    name: &str,
    out_width: u32,
    addr: &str,
    addr_width: u32,
    values: impl Iterator<Item = u64>,
) {
    writeln!(out, "    reg {} {name};", range(out_width)).unwrap();
    writeln!(out, "    always @* begin").unwrap();
    writeln!(out, "        case ({addr})").unwrap();
    for (i, v) in values.enumerate() {
        writeln!(
            out,
            "            {}: {name} = {};",
            lit(addr_width, i as u64),
            lit(out_width, v)
        )
        .unwrap();
    }
    writeln!(out, "            default: {name} = {};", lit(out_width, 0)).unwrap();
    writeln!(out, "        endcase").unwrap();
    writeln!(out, "    end").unwrap();
}

/// Renders `plan` as a single combinational Verilog-2001 module with ports
/// `address` and `data`. Output depends only on the plan.
pub fn emit_verilog(plan: &Plan, module_name: &str) -> Result<String> {
    if !is_identifier(module_name) {
        return Err(Error::Identifier(module_name.to_string()));
    }
    let w_in = plan.w_in();
    let w_out = plan.w_out();
    let mut v = String::new();
    writeln!(v, "// Generated by dclut. Combinational, no clock.").unwrap();
    writeln!(v, "module {module_name} (").unwrap();
    writeln!(v, "    input  wire {} address,", range(w_in)).unwrap();
    writeln!(v, "    output wire {} data", range(w_out)).unwrap();
    writeln!(v, ");").unwrap();

    match &plan.body {
        PlanBody::Plain(t) => {
            rom(
                &mut v,
                "rom",
                w_out,
                "address",
                w_in,
                t.values().iter().copied(),
            );
            writeln!(v, "    assign data = rom;").unwrap();
        }
        PlanBody::Compressed(d) => emit_decomposition(&mut v, d),
    }
    writeln!(v, "endmodule").unwrap();
    Ok(v)
}

fn emit_decomposition(v: &mut String, d: &Decomposition) {
    let w_in = d.w_in();
    let lb_in = d.w_lb_in();
    let hb_in = w_in - lb_in;
    let hb_out = d.w_out_hb();
    let idx_bits = d.idx_bits();
    let rsh_bits = d.rsh_bits();

    writeln!(
        v,
        "    wire {} x_hb = address[{}:{}];",
        range(hb_in),
        w_in - 1,
        lb_in
    )
    .unwrap();
    writeln!(
        v,
        "    wire {} x_lb = address[{}:0];",
        range(lb_in),
        lb_in - 1
    )
    .unwrap();

    rom(
        v,
        "t_bias",
        hb_out,
        "x_hb",
        hb_in,
        d.t_bias().iter().copied(),
    );
    if idx_bits > 0 {
        rom(
            v,
            "t_idx",
            idx_bits,
            "x_hb",
            hb_in,
            d.t_idx().iter().map(|&i| u64::from(i)),
        );
    }
    if rsh_bits > 0 {
        rom(
            v,
            "t_rsh",
            rsh_bits,
            "x_hb",
            hb_in,
            d.t_rsh().iter().map(|&s| u64::from(s)),
        );
    }

    let high = if d.w_st() == 0 {
        "t_bias".to_string()
    } else {
        let ust_addr_bits = idx_bits + lb_in;
        let addr = if idx_bits > 0 {
            "{t_idx, x_lb}"
        } else {
            "x_lb"
        };
        writeln!(v, "    wire {} ust_addr = {addr};", range(ust_addr_bits)).unwrap();
        rom(
            v,
            "t_ust",
            d.w_st(),
            "ust_addr",
            ust_addr_bits,
            d.t_ust().iter().copied(),
        );
        let shifted = if rsh_bits > 0 {
            "(t_ust >> t_rsh)".to_string()
        } else {
            match d.t_rsh().first().copied().unwrap_or(0) {
                0 => "t_ust".to_string(),
                s => format!("(t_ust >> {s})"),
            }
        };
        format!("{shifted} + t_bias")
    };
    writeln!(v, "    wire {} hb = {high};", range(hb_out)).unwrap();

    match d.t_lb() {
        Some(lb) => {
            rom(v, "t_lb", d.w_lb_out(), "address", w_in, lb.iter().copied());
            writeln!(v, "    assign data = {{hb, t_lb}};").unwrap();
        }
        None => writeln!(v, "    assign data = hb;").unwrap(),
    }
}

fn write_table(
    out: &mut String,
    name: &str,
    width: u32,
    values: impl ExactSizeIterator<Item = u64>,
) {
    writeln!(out, "table {name} count={} width={width}", values.len()).unwrap();
    for v in values {
        writeln!(out, "{v:x}").unwrap();
    }
}

/// Serializes a plan and its report in the self-describing text format:
/// header fields, hex table dumps, then the report as one JSON line.
pub fn emit_plan_file(plan: &Plan, report: &CostReport) -> String {
    let mut out = String::new();
    writeln!(out, "{PLAN_MAGIC}").unwrap();
    match &plan.body {
        PlanBody::Plain(t) => {
            writeln!(out, "kind plain").unwrap();
            writeln!(out, "w_in {}", t.w_in()).unwrap();
            writeln!(out, "w_out {}", t.w_out()).unwrap();
            writeln!(out, "w_lb_in {}", plan.config.w_lb_in).unwrap();
            writeln!(out, "w_lb_out {}", plan.config.w_lb_out).unwrap();
            writeln!(out, "exiguity {}", plan.config.exiguity).unwrap();
            write_table(&mut out, "values", t.w_out(), t.values().iter().copied());
        }
        PlanBody::Compressed(d) => {
            writeln!(out, "kind compressed").unwrap();
            writeln!(out, "w_in {}", d.w_in()).unwrap();
            writeln!(out, "w_out {}", d.w_out()).unwrap();
            writeln!(out, "w_lb_in {}", d.w_lb_in()).unwrap();
            writeln!(out, "w_lb_out {}", d.w_lb_out()).unwrap();
            writeln!(out, "exiguity {}", plan.config.exiguity).unwrap();
            writeln!(out, "w_st {}", d.w_st()).unwrap();
            write_table(&mut out, "t_bias", d.w_out_hb(), d.t_bias().iter().copied());
            write_table(
                &mut out,
                "t_idx",
                d.idx_bits(),
                d.t_idx().iter().map(|&i| u64::from(i)),
            );
            write_table(
                &mut out,
                "t_rsh",
                d.rsh_bits(),
                d.t_rsh().iter().map(|&s| u64::from(s)),
            );
            write_table(&mut out, "t_ust", d.w_st(), d.t_ust().iter().copied());
            if let Some(lb) = d.t_lb() {
                write_table(&mut out, "t_lb", d.w_lb_out(), lb.iter().copied());
            }
        }
    }
    writeln!(out, "report").unwrap();
    writeln!(
        out,
        "{}",
        serde_json::to_string(report).expect("report serializes")
    )
    .unwrap();
    writeln!(out, "end").unwrap();
    out
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            lines: text.lines().enumerate(),
            last: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.lines.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.trim_end()))
            }
            None => Err(Error::parse(
                self.last + 1,
                format!("file truncated: missing {what}"),
            )),
        }
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (no, line) = self.next(&format!("field `{key}`"))?;
        let value = line
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| Error::parse(no, format!("expected `{key} <value>`, found `{line}`")))?;
        value
            .parse()
            .map_err(|_| Error::parse(no, format!("bad value for `{key}`: `{value}`")))
    }

    /// Reads `table <name> count=<n> width=<w>` and its entries. Returns the
    /// header line number, the declared width and the values.
    fn table(&mut self, name: &str) -> Result<(usize, u32, Vec<u64>)> {
        let (no, header) = self.next(&format!("section `{name}`"))?;
        let mut parts = header.split(' ');
        if parts.next() != Some("table") || parts.next() != Some(name) {
            return Err(Error::parse(
                no,
                format!("expected section `table {name}`, found `{header}`"),
            ));
        }
        let mut count = None;
        let mut width = None;
        for p in parts {
            if let Some(c) = p.strip_prefix("count=") {
                count = c.parse::<usize>().ok();
            } else if let Some(w) = p.strip_prefix("width=") {
                width = w.parse::<u32>().ok();
            }
        }
        let (Some(count), Some(width)) = (count, width) else {
            return Err(Error::parse(
                no,
                format!("section `{name}` needs count= and width="),
            ));
        };
        let mut values = Vec::with_capacity(count.min(1 << 24));
        for _ in 0..count {
            let (line_no, line) = self.next(&format!("entries of section `{name}`"))?;
            let v = u64::from_str_radix(line, 16).map_err(|_| {
                Error::parse(line_no, format!("bad hex entry `{line}` in `{name}`"))
            })?;
            values.push(v);
        }
        Ok((no, width, values))
    }

    fn table_with_width(&mut self, name: &str, want: u32) -> Result<(usize, Vec<u64>)> {
        let (no, width, values) = self.table(name)?;
        check_width(name, no, width, want)?;
        Ok((no, values))
    }

    fn keyword(&mut self, word: &str) -> Result<usize> {
        let (no, line) = self.next(&format!("section `{word}`"))?;
        if line != word {
            return Err(Error::parse(
                no,
                format!("expected `{word}`, found `{line}`"),
            ));
        }
        Ok(no)
    }
}

fn to_u32(values: Vec<u64>, name: &str, line: usize) -> Result<Vec<u32>> {
    values
        .into_iter()
        .map(|v| {
            u32::try_from(v)
                .map_err(|_| Error::parse(line, format!("`{name}` entry {v:#x} too large")))
        })
        .collect()
}

fn check_width(name: &str, line: usize, got: u32, want: u32) -> Result<()> {
    if got != want {
        return Err(Error::parse(
            line,
            format!("section `{name}` declares width {got}, expected {want}"),
        ));
    }
    Ok(())
}

/// Parses a plan file written by [`emit_plan_file`].
pub fn load_plan_file(text: &str) -> Result<(Plan, CostReport)> {
    let mut r = Reader::new(text);
    let (no, magic) = r.next("header")?;
    if magic != PLAN_MAGIC {
        return Err(Error::parse(no, format!("expected `{PLAN_MAGIC}`")));
    }
    let kind: String = r.field("kind")?;
    let w_in: u32 = r.field("w_in")?;
    let w_out: u32 = r.field("w_out")?;
    let w_lb_in: u32 = r.field("w_lb_in")?;
    let w_lb_out: u32 = r.field("w_lb_out")?;
    let exiguity: usize = r.field("exiguity")?;
    let config = PlanConfig {
        w_lb_in,
        w_lb_out,
        exiguity,
    };
    if w_in == 0 || w_in > 31 || w_out == 0 || w_out > 63 || w_lb_out >= w_out {
        return Err(Error::parse(r.last, "inconsistent widths"));
    }

    let body = match kind.as_str() {
        "plain" => {
            let (no, values) = r.table_with_width("values", w_out)?;
            let table = Table::with_input_cap(w_in, w_out, values, 31)
                .map_err(|e| Error::parse(no, e.to_string()))?;
            PlanBody::Plain(table)
        }
        "compressed" => {
            let w_st: u32 = r.field("w_st")?;
            if w_in < 2 || w_lb_in == 0 || w_lb_in >= w_in {
                return Err(Error::parse(r.last, "inconsistent widths"));
            }
            let (_, t_bias) = r.table_with_width("t_bias", w_out - w_lb_out)?;
            let (idx_line, idx_width, t_idx) = r.table("t_idx")?;
            let (rsh_line, rsh_width, t_rsh) = r.table("t_rsh")?;
            let (ust_line, t_ust) = r.table_with_width("t_ust", w_st)?;
            let t_lb = if w_lb_out > 0 {
                Some(r.table_with_width("t_lb", w_lb_out)?.1)
            } else {
                None
            };

            let parts = DecompositionParts {
                w_in,
                w_out,
                w_lb_out,
                w_lb_in,
                w_st,
                t_lb,
                t_bias,
                t_idx: to_u32(t_idx, "t_idx", idx_line)?,
                t_rsh: to_u32(t_rsh, "t_rsh", rsh_line)?,
                t_ust,
            };
            let d = Decomposition::from_parts(parts)
                .map_err(|e| Error::parse(ust_line, e.to_string()))?;
            check_width("t_idx", idx_line, idx_width, d.idx_bits())?;
            check_width("t_rsh", rsh_line, rsh_width, d.rsh_bits())?;
            PlanBody::Compressed(d)
        }
        other => return Err(Error::parse(2, format!("unknown plan kind `{other}`"))),
    };

    r.keyword("report")?;
    let (no, json) = r.next("report body")?;
    let report: CostReport =
        serde_json::from_str(json).map_err(|e| Error::parse(no, format!("bad report: {e}")))?;
    r.keyword("end")?;
    Ok((Plan { body, config }, report))
}
