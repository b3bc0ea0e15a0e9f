//! Line-oriented text descriptor for base codes.
//!
//! ```text
//! msrforge-base 1
//! field <q> [<modulus>]
//! params <k> <r> <N>
//! A <i> <j>            (r*k blocks of N rows with N entries each)
//! Su <i>               (optional, uniform: k blocks of N/r rows)
//! S <i> <j>            (optional, per helper: j in [0, k+r) \ {i})
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use std::fmt::Write as _;

use super::{BaseCode, BaseCodeParams, RepairMatrices};
use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::linalg::MatrixGF;

pub const BASE_MAGIC: &str = "msrforge-base";
pub const BASE_VERSION: &str = "1";

/// Significant lines (1-based line number and whitespace-split tokens).
pub(crate) struct Lines<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter_map(|(no, line)| {
                let body = line.split('#').next().unwrap_or("");
                let tokens: Vec<&str> = body.split_whitespace().collect();
                (!tokens.is_empty()).then_some((no + 1, tokens))
            })
            .collect();
        Self { lines, pos: 0 }
    }

    pub fn peek(&self) -> Option<&(usize, Vec<&'a str>)> {
        self.lines.get(self.pos)
    }

    pub fn next_line(&mut self) -> Result<(usize, Vec<&'a str>)> {
        let line = self.lines.get(self.pos).cloned().ok_or_else(|| Error::Parse {
            line: self.last_line() + 1,
            msg: "unexpected end of input".into(),
        })?;
        self.pos += 1;
        Ok(line)
    }

    pub fn last_line(&self) -> usize {
        self.pos
            .checked_sub(1)
            .and_then(|p| self.lines.get(p))
            .map_or(0, |(n, _)| *n)
    }

    /// Next line, which must start with `keyword` and carry `args` integers.
    pub fn expect(&mut self, keyword: &str, args: usize) -> Result<(usize, Vec<u64>)> {
        let (line, tokens) = self.next_line()?;
        if tokens[0] != keyword {
            return Err(parse_err(line, format!("expected `{keyword}`, found `{}`", tokens[0])));
        }
        if tokens.len() != args + 1 {
            return Err(parse_err(
                line,
                format!("`{keyword}` takes {args} argument(s), found {}", tokens.len() - 1),
            ));
        }
        let values = tokens[1..]
            .iter()
            .map(|t| parse_int(line, t))
            .collect::<Result<_>>()?;
        Ok((line, values))
    }

    /// `rows` lines of `cols` field elements.
    pub fn matrix(&mut self, field: &Field, rows: usize, cols: usize) -> Result<MatrixGF> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (line, tokens) = self.next_line()?;
            if tokens.len() != cols {
                return Err(parse_err(
                    line,
                    format!("expected {cols} entries, found {}", tokens.len()),
                ));
            }
            for t in tokens {
                let v = parse_int(line, t)?;
                if v >= field.order() as u64 {
                    return Err(Error::ValueOutOfField {
                        line,
                        value: v,
                        q: field.order(),
                    });
                }
                data.push(v as Elem);
            }
        }
        MatrixGF::from_vec(field, rows, cols, data)
    }
}

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub(crate) fn parse_int(line: usize, token: &str) -> Result<u64> {
    token
        .parse::<u64>()
        .map_err(|_| parse_err(line, format!("`{token}` is not a non-negative integer")))
}

fn index(line: usize, v: u64, bound: usize, what: &str) -> Result<usize> {
    if v as usize >= bound {
        return Err(parse_err(line, format!("{what} index {v} out of range [0,{bound})")));
    }
    Ok(v as usize)
}

/// Parses a base code, leaving any trailing sections unread.
pub(crate) fn parse_base(lines: &mut Lines<'_>) -> Result<BaseCode> {
    let (line, tokens) = lines.next_line()?;
    if tokens != [BASE_MAGIC, BASE_VERSION] {
        return Err(parse_err(line, format!("expected `{BASE_MAGIC} {BASE_VERSION}` header")));
    }
    let (line, tokens) = lines.next_line()?;
    if tokens[0] != "field" || !(2..=3).contains(&tokens.len()) {
        return Err(parse_err(line, "expected `field <q> [<modulus>]`"));
    }
    let q = parse_int(line, tokens[1])?;
    let modulus = tokens.get(2).map(|t| parse_int(line, t)).transpose()?;
    let field = Field::new(
        u32::try_from(q).map_err(|_| parse_err(line, "field order too large"))?,
        modulus.map(|m| m as u32),
    )
    .map_err(|e| parse_err(line, e.to_string()))?;

    let (line, p) = lines.expect("params", 3)?;
    let params = BaseCodeParams::new(p[0] as usize, p[1] as usize, p[2] as usize, field.clone())
        .map_err(|e| parse_err(line, e.to_string()))?;
    let BaseCodeParams { k, r, n, .. } = params;

    let mut coding: Vec<Vec<Option<MatrixGF>>> = vec![vec![None; k]; r];
    let mut uniform: Vec<Option<MatrixGF>> = vec![None; k];
    let mut helpers: Vec<Vec<Option<MatrixGF>>> = vec![vec![None; k + r]; k];
    let (mut saw_uniform, mut saw_helper) = (false, false);

    while let Some((line, tokens)) = lines.peek().cloned() {
        match tokens[0] {
            "A" => {
                let (line, v) = lines.expect("A", 2)?;
                let i = index(line, v[0], r, "parity")?;
                let j = index(line, v[1], k, "systematic")?;
                if coding[i][j].is_some() {
                    return Err(parse_err(line, format!("duplicate A {i} {j}")));
                }
                coding[i][j] = Some(lines.matrix(&field, n, n)?);
            }
            "Su" | "S" => {
                if n % r != 0 {
                    return Err(parse_err(line, "repair matrices need r | N"));
                }
                if tokens[0] == "Su" {
                    saw_uniform = true;
                    let (line, v) = lines.expect("Su", 1)?;
                    let i = index(line, v[0], k, "systematic")?;
                    if uniform[i].is_some() {
                        return Err(parse_err(line, format!("duplicate Su {i}")));
                    }
                    uniform[i] = Some(lines.matrix(&field, n / r, n)?);
                } else {
                    saw_helper = true;
                    let (line, v) = lines.expect("S", 2)?;
                    let i = index(line, v[0], k, "systematic")?;
                    let j = index(line, v[1], k + r, "helper")?;
                    if i == j {
                        return Err(parse_err(line, "S i i is not a repair matrix"));
                    }
                    if helpers[i][j].is_some() {
                        return Err(parse_err(line, format!("duplicate S {i} {j}")));
                    }
                    helpers[i][j] = Some(lines.matrix(&field, n / r, n)?);
                }
                if saw_uniform && saw_helper {
                    return Err(parse_err(line, "cannot mix `Su` and `S` sections"));
                }
            }
            _ => break,
        }
    }

    let at = lines.last_line();
    let coding = coding
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, a)| a.ok_or_else(|| parse_err(at, format!("missing A {i} {j}"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let repair = if saw_uniform {
        let per_node = uniform
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| parse_err(at, format!("missing Su {i}"))))
            .collect::<Result<Vec<_>>>()?;
        Some(RepairMatrices::uniform(per_node, k + r))
    } else if saw_helper {
        for (i, row) in helpers.iter().enumerate() {
            if let Some(j) = (0..k + r).find(|&j| j != i && row[j].is_none()) {
                return Err(parse_err(at, format!("missing S {i} {j}")));
            }
        }
        Some(RepairMatrices::per_helper(helpers))
    } else {
        None
    };
    BaseCode::new(params, coding, repair)
}

/// Parses a base-code descriptor. The result is unverified.
pub fn load_descriptor(text: &str) -> Result<BaseCode> {
    let mut lines = Lines::new(text);
    let code = parse_base(&mut lines)?;
    if let Some((line, tokens)) = lines.peek() {
        return Err(parse_err(*line, format!("unexpected `{}`", tokens[0])));
    }
    Ok(code)
}

fn write_matrix(out: &mut String, m: &MatrixGF) {
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(u32::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

pub(crate) fn write_base(out: &mut String, code: &BaseCode) {
    let BaseCodeParams { k, r, n, ref field } = *code.params();
    let _ = writeln!(out, "{BASE_MAGIC} {BASE_VERSION}");
    match field.modulus() {
        Some(m) => {
            let _ = writeln!(out, "field {} {m}", field.order());
        }
        None => {
            let _ = writeln!(out, "field {}", field.order());
        }
    }
    let _ = writeln!(out, "params {k} {r} {n}");
    for i in 0..r {
        for j in 0..k {
            let _ = writeln!(out, "A {i} {j}");
            write_matrix(out, code.coding(i, j));
        }
    }
    let Some(rep) = code.repair() else { return };
    if rep.is_uniform() {
        for i in 0..k {
            let _ = writeln!(out, "Su {i}");
            write_matrix(out, rep.shared(i).expect("uniform"));
        }
    } else {
        for i in 0..k {
            for j in (0..k + r).filter(|&j| j != i) {
                let _ = writeln!(out, "S {i} {j}");
                write_matrix(out, rep.get(i, j).expect("validated"));
            }
        }
    }
}

/// Canonical descriptor text. Uniform repair families are written as `Su`.
pub fn save_descriptor(code: &BaseCode) -> String {
    let mut out = String::new();
    write_base(&mut out, code);
    out
}
