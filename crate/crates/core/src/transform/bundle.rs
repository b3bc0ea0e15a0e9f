//! Code bundle: a base descriptor followed by the transformation parameters.
//!
//! ```text
//! <base descriptor>
//! perm cyclic | perm explicit      (explicit: r rows of r integers)
//! theta <a>                        (-1 is accepted in odd characteristic)
//! theta-orient default | explicit  (optional; explicit: r x r table, 1 or a
//!                                   off the diagonal, 0 on it)
//! ```

use std::fmt::Write as _;

use super::{transform, MsrCode, Orientation, PermutationFamily, ThetaTable};
use crate::basecode::{parse_base, parse_err, parse_int, write_base, BaseCode, Lines};
use crate::error::Result;

/// A parsed bundle before any verification.
#[derive(Debug, Clone)]
pub struct BundleParts {
    pub base: BaseCode,
    pub perms: PermutationFamily,
    pub theta: ThetaTable,
}

/// Parses a bundle without verifying the base code. The theta table is
/// checked for `{1, a}` pairs, and `a` must lie outside `{0, 1}`.
pub fn parse_bundle(text: &str) -> Result<BundleParts> {
    let mut lines = Lines::new(text);
    let base = parse_base(&mut lines)?;
    let r = base.r();
    let field = base.field().clone();

    let (line, tokens) = lines.next_line()?;
    let perms = match tokens.as_slice() {
        ["perm", "cyclic"] => PermutationFamily::cyclic(r),
        ["perm", "explicit"] => {
            let mut rows = Vec::with_capacity(r);
            for _ in 0..r {
                let (line, tokens) = lines.next_line()?;
                if tokens.len() != r {
                    return Err(parse_err(line, format!("expected {r} entries")));
                }
                let row = tokens
                    .iter()
                    .map(|t| parse_int(line, t).map(|v| v as usize))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
            PermutationFamily::explicit(rows).map_err(|e| parse_err(line, e.to_string()))?
        }
        _ => return Err(parse_err(line, "expected `perm cyclic` or `perm explicit`")),
    };

    let (line, tokens) = lines.next_line()?;
    let a = match tokens.as_slice() {
        ["theta", value] => {
            let v: i64 = value
                .parse()
                .map_err(|_| parse_err(line, format!("`{value}` is not an integer")))?;
            field
                .elem_from_signed(v)
                .map_err(|e| parse_err(line, e.to_string()))?
        }
        _ => return Err(parse_err(line, "expected `theta <a>`")),
    };

    let orientation = match lines.peek().map(|(l, t)| (*l, t.clone())) {
        Some((line, tokens)) if tokens[0] == "theta-orient" => {
            lines.next_line()?;
            match tokens.as_slice() {
                [_, "default"] => Orientation::default_for(r),
                [_, "explicit"] => {
                    let mut carries_a = vec![vec![false; r]; r];
                    for (j, row) in carries_a.iter_mut().enumerate() {
                        let (line, tokens) = lines.next_line()?;
                        if tokens.len() != r {
                            return Err(parse_err(line, format!("expected {r} entries")));
                        }
                        for (l, t) in tokens.iter().enumerate() {
                            let v = parse_int(line, t)?;
                            row[l] = match v {
                                _ if l == j => false,
                                1 => false,
                                v if v == a as u64 => true,
                                _ => {
                                    return Err(parse_err(
                                        line,
                                        format!("theta entry {v} is neither 1 nor a={a}"),
                                    ))
                                }
                            };
                        }
                    }
                    Orientation::explicit(carries_a).map_err(|e| parse_err(line, e.to_string()))?
                }
                _ => return Err(parse_err(line, "expected `theta-orient default|explicit`")),
            }
        }
        _ => Orientation::default_for(r),
    };
    let theta = ThetaTable::with_orientation(&field, a, orientation)
        .map_err(|e| parse_err(line, e.to_string()))?;

    if let Some((line, tokens)) = lines.peek() {
        return Err(parse_err(*line, format!("unexpected `{}`", tokens[0])));
    }
    Ok(BundleParts { base, perms, theta })
}

/// Parses and transforms a bundle, re-verifying the base code.
pub fn load_bundle(text: &str) -> Result<MsrCode> {
    let BundleParts { base, perms, theta } = parse_bundle(text)?;
    transform(base, perms, theta)
}

/// Canonical bundle text.
pub fn save_bundle(msr: &MsrCode) -> String {
    let mut out = String::new();
    write_base(&mut out, msr.base());
    let perms = msr.perms();
    if perms.is_cyclic() {
        out.push_str("perm cyclic\n");
    } else {
        out.push_str("perm explicit\n");
        for row in perms.rows() {
            let row: Vec<String> = row.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    let theta = msr.theta();
    let _ = writeln!(out, "theta {}", theta.a());
    if !theta.orientation().is_default() {
        out.push_str("theta-orient explicit\n");
        let r = theta.r();
        for j in 0..r {
            let row: Vec<String> = (0..r)
                .map(|l| if l == j { 0 } else { theta.get(j, l) }.to_string())
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}
