//! A small interpreter for the combinational Verilog subset that
//! [`crate::emit::emit_verilog`] produces: net declarations with
//! initializers, `always @*` full-case ROMs, `assign`, bit slices,
//! concatenation, `>>` and `+`. Used to check emitted modules against the
//! plan evaluator without an external simulator.

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Sized { width: u32, value: u64 },
    Sym(&'static str),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    const SYMS: [&str; 14] = [
        ">>", "(", ")", "[", "]", "{", "}", ":", ";", ",", "=", "@", "*", "+",
    ];
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split("//").next().unwrap_or("");
        let bytes = line.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == b'_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((line_no, Tok::Ident(line[start..i].to_string())));
            } else if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: u64 = line[start..i]
                    .parse()
                    .map_err(|_| Error::parse(line_no, "bad number"))?;
                if i + 1 < bytes.len() && bytes[i] == b'\'' {
                    let radix = match bytes[i + 1] {
                        b'h' => 16,
                        b'd' => 10,
                        b'b' => 2,
                        _ => return Err(Error::parse(line_no, "unsupported literal base")),
                    };
                    i += 2;
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    let value = u64::from_str_radix(&line[start..i], radix).map_err(|_| {
                        Error::parse(line_no, format!("bad literal `{}`", &line[start..i]))
                    })?;
                    out.push((
                        line_no,
                        Tok::Sized {
                            width: n as u32,
                            value,
                        },
                    ));
                } else {
                    out.push((line_no, Tok::Num(n)));
                }
            } else {
                let sym = SYMS
                    .iter()
                    .find(|s| line[i..].starts_with(**s))
                    .ok_or_else(|| {
                        Error::parse(line_no, format!("unexpected character `{}`", c as char))
                    })?;
                i += sym.len();
                out.push((line_no, Tok::Sym(sym)));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Expr {
    Ident(String),
    Slice(String, u32, u32),
    Lit(u32, u64),
    Concat(Vec<Expr>),
    Shr(Box<Expr>, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug)]
enum Stmt {
    Assign(String, Expr),
    Case {
        target: String,
        selector: Expr,
        arms: HashMap<u64, u64>,
        default: u64,
    },
}

/// A parsed single-module combinational design with one input port and one
/// output port.
#[derive(Clone, Debug)]
pub struct RtlModule {
    pub name: String,
    input: String,
    output: String,
    widths: HashMap<String, u32>,
    stmts: Vec<Stmt>,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or(1, |t| t.0)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line(), msg)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn bump(&mut self) -> Result<Tok> {
        let t = self
            .toks
            .get(self.pos)
            .map(|t| t.1.clone())
            .ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn sym(&mut self, s: &str) -> Result<()> {
        match self.bump()? {
            Tok::Sym(x) if x == s => Ok(()),
            other => Err(self.err(format!("expected `{s}`, found {other:?}"))),
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.bump()? {
            Tok::Ident(s) => Ok(s),
            other => Err(self.err(format!("expected identifier, found {other:?}"))),
        }
    }

    fn keyword(&mut self, k: &str) -> Result<()> {
        match self.bump()? {
            Tok::Ident(s) if s == k => Ok(()),
            other => Err(self.err(format!("expected `{k}`, found {other:?}"))),
        }
    }

    fn num(&mut self) -> Result<u64> {
        match self.bump()? {
            Tok::Num(n) => Ok(n),
            other => Err(self.err(format!("expected number, found {other:?}"))),
        }
    }

    fn sized(&mut self) -> Result<(u32, u64)> {
        match self.bump()? {
            Tok::Sized { width, value } => Ok((width, value)),
            Tok::Num(n) => Ok((32, n)),
            other => Err(self.err(format!("expected literal, found {other:?}"))),
        }
    }

    /// Optional `[hi:0]`; width 1 when absent.
    fn range(&mut self) -> Result<u32> {
        if !self.eat_sym("[") {
            return Ok(1);
        }
        let hi = self.num()?;
        self.sym(":")?;
        let lo = self.num()?;
        self.sym("]")?;
        if lo != 0 || hi > 63 {
            return Err(self.err("only [n:0] ranges up to 64 bits are supported"));
        }
        Ok(hi as u32 + 1)
    }

    fn expr(&mut self) -> Result<Expr> {
        // `+` binds tighter than `>>`.
        let mut lhs = self.sum()?;
        while self.eat_sym(">>") {
            let rhs = self.sum()?;
            lhs = Expr::Shr(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.primary()?;
        while self.eat_sym("+") {
            let rhs = self.primary()?;
            lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.bump()? {
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.sym(")")?;
                Ok(e)
            }
            Tok::Sym("{") => {
                let mut parts = vec![self.expr()?];
                while self.eat_sym(",") {
                    parts.push(self.expr()?);
                }
                self.sym("}")?;
                Ok(Expr::Concat(parts))
            }
            Tok::Ident(name) => {
                if self.eat_sym("[") {
                    let hi = self.num()? as u32;
                    self.sym(":")?;
                    let lo = self.num()? as u32;
                    self.sym("]")?;
                    if lo > hi {
                        return Err(self.err("reversed slice"));
                    }
                    Ok(Expr::Slice(name, hi, lo))
                } else {
                    Ok(Expr::Ident(name))
                }
            }
            Tok::Sized { width, value } => Ok(Expr::Lit(width, value)),
            Tok::Num(n) => Ok(Expr::Lit(32, n)),
            other => Err(self.err(format!("unexpected {other:?} in expression"))),
        }
    }

    fn case_block(&mut self, widths: &HashMap<String, u32>) -> Result<Stmt> {
        // after `always`
        self.sym("@")?;
        self.sym("*")?;
        self.keyword("begin")?;
        self.keyword("case")?;
        self.sym("(")?;
        let selector = self.expr()?;
        self.sym(")")?;
        let mut arms = HashMap::new();
        let mut target: Option<String> = None;
        let mut default = None;
        loop {
            if matches!(self.peek(), Some(Tok::Ident(s)) if s == "endcase") {
                self.pos += 1;
                break;
            }
            let label = if matches!(self.peek(), Some(Tok::Ident(s)) if s == "default") {
                self.pos += 1;
                None
            } else {
                Some(self.sized()?.1)
            };
            self.sym(":")?;
            let lhs = self.ident()?;
            if !widths.contains_key(&lhs) {
                return Err(self.err(format!("assignment to undeclared `{lhs}`")));
            }
            if let Some(t) = &target {
                if *t != lhs {
                    return Err(self.err("case arms assign different targets"));
                }
            }
            target = Some(lhs);
            self.sym("=")?;
            let (_, value) = self.sized()?;
            self.sym(";")?;
            match label {
                Some(l) => {
                    if arms.insert(l, value).is_some() {
                        return Err(self.err(format!("duplicate case label {l}")));
                    }
                }
                None => default = Some(value),
            }
        }
        self.keyword("end")?;
        let target = target.ok_or_else(|| self.err("empty case"))?;
        Ok(Stmt::Case {
            target,
            selector,
            arms,
            default: default.unwrap_or(0),
        })
    }
}

impl RtlModule {
    pub fn parse(text: &str) -> Result<RtlModule> {
        let mut p = Parser {
            toks: tokenize(text)?,
            pos: 0,
        };
        p.keyword("module")?;
        let name = p.ident()?;
        let mut widths = HashMap::new();
        p.sym("(")?;
        p.keyword("input")?;
        p.keyword("wire")?;
        let w = p.range()?;
        let input = p.ident()?;
        widths.insert(input.clone(), w);
        p.sym(",")?;
        p.keyword("output")?;
        p.keyword("wire")?;
        let w = p.range()?;
        let output = p.ident()?;
        widths.insert(output.clone(), w);
        p.sym(")")?;
        p.sym(";")?;

        let mut stmts = Vec::new();
        loop {
            let kw = p.ident()?;
            match kw.as_str() {
                "endmodule" => break,
                "wire" | "reg" => {
                    let w = p.range()?;
                    let name = p.ident()?;
                    if widths.insert(name.clone(), w).is_some() {
                        return Err(p.err(format!("`{name}` declared twice")));
                    }
                    if p.eat_sym("=") {
                        let e = p.expr()?;
                        stmts.push(Stmt::Assign(name, e));
                    }
                    p.sym(";")?;
                }
                "assign" => {
                    let lhs = p.ident()?;
                    if !widths.contains_key(&lhs) {
                        return Err(p.err(format!("assignment to undeclared `{lhs}`")));
                    }
                    p.sym("=")?;
                    let e = p.expr()?;
                    p.sym(";")?;
                    stmts.push(Stmt::Assign(lhs, e));
                }
                "always" => stmts.push(p.case_block(&widths)?),
                other => return Err(p.err(format!("unsupported item `{other}`"))),
            }
        }
        if p.pos != p.toks.len() {
            return Err(p.err("trailing tokens after endmodule"));
        }
        Ok(RtlModule {
            name,
            input,
            output,
            widths,
            stmts,
        })
    }

    pub fn input_width(&self) -> u32 {
        self.widths[&self.input]
    }

    pub fn output_width(&self) -> u32 {
        self.widths[&self.output]
    }

    fn width_of(&self, e: &Expr) -> Result<u32> {
        Ok(match e {
            Expr::Ident(n) => *self
                .widths
                .get(n)
                .ok_or_else(|| Error::Invariant(format!("unknown `{n}`")))?,
            Expr::Slice(_, hi, lo) => hi - lo + 1,
            Expr::Lit(w, _) => *w,
            Expr::Concat(parts) => parts
                .iter()
                .map(|p| self.width_of(p))
                .sum::<Result<u32>>()?,
            Expr::Shr(a, _) => self.width_of(a)?,
            Expr::Add(a, b) => self.width_of(a)?.max(self.width_of(b)?),
        })
    }

    fn eval_expr(&self, e: &Expr, env: &HashMap<&str, u64>) -> Result<u64> {
        let get = |n: &str| {
            env.get(n)
                .copied()
                .ok_or_else(|| Error::Invariant(format!("`{n}` read before assignment")))
        };
        Ok(match e {
            Expr::Ident(n) => get(n)?,
            Expr::Slice(n, hi, lo) => (get(n)? >> lo) & mask(hi - lo + 1),
            Expr::Lit(w, v) => v & mask(*w),
            Expr::Concat(parts) => {
                let mut acc = 0u64;
                for p in parts {
                    let w = self.width_of(p)?;
                    acc = (acc << w) | (self.eval_expr(p, env)? & mask(w));
                }
                acc
            }
            Expr::Shr(a, b) => {
                let s = self.eval_expr(b, env)?;
                if s >= 64 {
                    0
                } else {
                    self.eval_expr(a, env)? >> s
                }
            }
            Expr::Add(a, b) => self
                .eval_expr(a, env)?
                .wrapping_add(self.eval_expr(b, env)?),
        })
    }

    /// Output for one input value.
    pub fn eval(&self, input: u64) -> Result<u64> {
        let mut env: HashMap<&str, u64> = HashMap::new();
        env.insert(&self.input, input & mask(self.input_width()));
        for s in &self.stmts {
            let (target, value) = match s {
                Stmt::Assign(t, e) => (t, self.eval_expr(e, &env)?),
                Stmt::Case {
                    target,
                    selector,
                    arms,
                    default,
                } => {
                    let sel = self.eval_expr(selector, &env)?;
                    (target, arms.get(&sel).copied().unwrap_or(*default))
                }
            };
            env.insert(target, value & mask(self.widths[target]));
        }
        env.get(self.output.as_str())
            .copied()
            .ok_or_else(|| Error::Invariant("output never assigned".into()))
    }
}

fn mask(w: u32) -> u64 {
    if w >= 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}
