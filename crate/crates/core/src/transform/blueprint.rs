//! Field-agnostic layout of the transformed parities in terms of the base
//! parities `g_s^(l)` of each instance.

use std::fmt::{self, Write as _};

use super::perm::PermutationFamily;
use super::theta::Orientation;

/// Symbolic pairing coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coeff {
    One,
    A,
}

/// `coeff * g_{parity}^{(instance)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub instance: usize,
    pub parity: usize,
    pub coeff: Coeff,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blueprint {
    // cells[j][l]: terms of parity node j, instance l
    cells: Vec<Vec<Vec<Term>>>,
}

impl Blueprint {
    pub fn new(perms: &PermutationFamily, orientation: &Orientation) -> Self {
        let r = perms.r();
        let cells = (0..r)
            .map(|j| {
                (0..r)
                    .map(|l| {
                        if l == j {
                            return vec![Term {
                                instance: j,
                                parity: perms.apply(j, j),
                                coeff: Coeff::One,
                            }];
                        }
                        let coeff = if orientation.carries_a(j, l) {
                            Coeff::A
                        } else {
                            Coeff::One
                        };
                        vec![
                            Term {
                                instance: l,
                                parity: perms.apply(l, j),
                                coeff,
                            },
                            Term {
                                instance: j,
                                parity: perms.apply(j, l),
                                coeff: Coeff::One,
                            },
                        ]
                    })
                    .collect()
            })
            .collect();
        Self { cells }
    }

    pub fn r(&self) -> usize {
        self.cells.len()
    }

    /// Terms of parity node `j` in instance `l`.
    pub fn cell(&self, j: usize, l: usize) -> &[Term] {
        &self.cells[j][l]
    }

    /// One `P<j> I<l>: ...` line per cell. `a_label` renders `Coeff::A`; the
    /// label `-1` prints as a bare minus sign.
    pub fn render(&self, a_label: &str) -> String {
        let mut out = String::new();
        for (j, row) in self.cells.iter().enumerate() {
            for (l, terms) in row.iter().enumerate() {
                let body: Vec<String> = terms
                    .iter()
                    .map(|t| {
                        let prefix = match (t.coeff, a_label) {
                            (Coeff::One, _) => String::new(),
                            (Coeff::A, "-1") => "-".to_string(),
                            (Coeff::A, label) => format!("{label}*"),
                        };
                        format!("{prefix}g{}^({})", t.parity, t.instance)
                    })
                    .collect();
                let _ = writeln!(out, "P{j} I{l}: {}", body.join(" + "));
            }
        }
        out
    }
}

impl fmt::Display for Blueprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("a"))
    }
}
