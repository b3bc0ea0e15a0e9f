use crate::error::{Error, Result};

/// `r` permutations `p_0..p_{r-1}` of `[0, r)`. Instance `l` stores base
/// parity `p_l(j)` in slot `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationFamily {
    rows: Vec<Vec<usize>>,
    inverse: Vec<Vec<usize>>,
    symmetric: bool,
    cyclic: bool,
}

impl PermutationFamily {
    /// `p_i(j) = (i + j) mod r`.
    pub fn cyclic(r: usize) -> Self {
        let rows = (0..r)
            .map(|i| (0..r).map(|j| (i + j) % r).collect())
            .collect();
        let mut fam = Self::from_rows_unchecked(rows);
        fam.cyclic = true;
        fam
    }

    /// Family from explicit rows; row `l` lists `p_l(0), ..., p_l(r-1)`.
    pub fn explicit(rows: Vec<Vec<usize>>) -> Result<Self> {
        let r = rows.len();
        for (l, row) in rows.iter().enumerate() {
            if row.len() != r {
                return Err(Error::DimensionMismatch(format!(
                    "permutation row {l} has {} entries, expected {r}",
                    row.len()
                )));
            }
            let mut seen = vec![false; r];
            for &v in row {
                if v >= r || seen[v] {
                    return Err(Error::NotABijection(l));
                }
                seen[v] = true;
            }
        }
        let mut fam = Self::from_rows_unchecked(rows);
        fam.cyclic = fam.rows == Self::cyclic(r).rows;
        Ok(fam)
    }

    fn from_rows_unchecked(rows: Vec<Vec<usize>>) -> Self {
        let r = rows.len();
        let mut inverse = vec![vec![0; r]; r];
        for (l, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                inverse[l][v] = j;
            }
        }
        let symmetric = (0..r).all(|i| (0..r).all(|j| rows[i][j] == rows[j][i]));
        Self {
            rows,
            inverse,
            symmetric,
            cyclic: false,
        }
    }

    pub fn r(&self) -> usize {
        self.rows.len()
    }

    /// `p_l(j)`.
    pub fn apply(&self, l: usize, j: usize) -> usize {
        self.rows[l][j]
    }

    /// The slot `j` with `p_l(j) = base_parity`.
    pub fn slot_of(&self, l: usize, base_parity: usize) -> usize {
        self.inverse[l][base_parity]
    }

    /// Whether `p_i(j) = p_j(i)` for all `i, j`.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }
}
