//! Dense exact linear algebra over GF(q).
//!
//! Elimination always pivots on the first nonzero entry of a column, so every
//! result (ranks, pivots, solutions) is bit-reproducible.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};

/// Dense row-major matrix over a finite field.
#[derive(Clone, PartialEq, Eq)]
pub struct MatrixGF {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<Elem>,
}

impl fmt::Debug for MatrixGF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatrixGF {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Geometry of a block-partitioned matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpec {
    pub block_rows: usize,
    pub block_cols: usize,
    pub block_height: usize,
    pub block_width: usize,
}

impl BlockSpec {
    pub fn new(
        block_rows: usize,
        block_cols: usize,
        block_height: usize,
        block_width: usize,
    ) -> Result<Self> {
        if block_rows == 0 || block_cols == 0 || block_height == 0 || block_width == 0 {
            return Err(Error::DimensionMismatch(
                "block spec dimensions must be positive".into(),
            ));
        }
        Ok(Self {
            block_rows,
            block_cols,
            block_height,
            block_width,
        })
    }

    /// Square grid of square blocks.
    pub fn square(blocks: usize, size: usize) -> Result<Self> {
        Self::new(blocks, blocks, size, size)
    }
}

fn dim_err(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}

impl MatrixGF {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            field: field.clone(),
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(field: &Field, rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_err(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&v) = data.iter().find(|&&v| !field.contains(v)) {
            return Err(Error::ValueOutOfField {
                line: 0,
                value: v as u64,
                q: field.order(),
            });
        }
        Ok(Self {
            rows,
            cols,
            field: field.clone(),
            data,
        })
    }

    pub fn from_rows(field: &Field, rows: &[Vec<Elem>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(dim_err("ragged rows"));
        }
        Self::from_vec(field, rows.len(), cols, rows.concat())
    }

    /// Column vector.
    pub fn column(field: &Field, v: &[Elem]) -> Result<Self> {
        Self::from_vec(field, v.len(), 1, v.to_vec())
    }

    /// `n x n` diagonal matrix.
    pub fn diagonal(field: &Field, diag: &[Elem]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(field, n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    /// Panics if `v` is not an element of the field.
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        assert!(self.field.contains(v), "{v} is not in {}", self.field);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Number of columns holding at least one nonzero entry.
    pub fn nonzero_columns(&self) -> usize {
        (0..self.cols)
            .filter(|&c| (0..self.rows).any(|r| self.get(r, c) != 0))
            .count()
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(dim_err(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            let acc = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                f.axpy(acc, a, other.row(k));
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Elem]) -> Result<Vec<Elem>> {
        if v.len() != self.cols {
            return Err(dim_err(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![0; self.rows];
        self.mul_vec_acc(v, &mut out);
        Ok(out)
    }

    /// `out += self * v`. Lengths are the caller's responsibility.
    pub fn mul_vec_acc(&self, v: &[Elem], out: &mut [Elem]) {
        debug_assert_eq!(v.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        let f = &self.field;
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = *o;
            for (&a, &x) in self.row(r).iter().zip(v) {
                if a != 0 && x != 0 {
                    acc = f.add(acc, f.mul(a, x));
                }
            }
            *o = acc;
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(dim_err("matrix sum of different shapes"));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| self.field.add(a, b))
            .collect();
        Ok(Self { data, ..self.clone() })
    }

    pub fn scale(&self, c: Elem) -> Self {
        Self {
            data: self.field.scale(c, &self.data),
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    fn rref_in_place(&mut self, col_limit: usize) -> Vec<usize> {
        let f = self.field.clone();
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut prow = 0;
        for c in 0..col_limit {
            if prow == self.rows {
                break;
            }
            let Some(src) = (prow..self.rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            if src != prow {
                for k in 0..cols {
                    self.data.swap(src * cols + k, prow * cols + k);
                }
            }
            let inv = f.inv(self.get(prow, c)).expect("pivot is nonzero");
            for k in 0..cols {
                let v = self.data[prow * cols + k];
                self.data[prow * cols + k] = f.mul(v, inv);
            }
            let pivot_row: Vec<Elem> = self.row(prow).to_vec();
            for r in 0..self.rows {
                if r == prow {
                    continue;
                }
                let factor = self.get(r, c);
                if factor != 0 {
                    let neg = f.neg(factor);
                    f.axpy(&mut self.data[r * cols..(r + 1) * cols], neg, &pivot_row);
                }
            }
            pivots.push(c);
            prow += 1;
        }
        pivots
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let p = m.rref_in_place(self.cols);
        (m, p)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Solves `self * x = b` when the solution is unique.
    pub fn solve(&self, b: &[Elem]) -> Result<Vec<Elem>> {
        if b.len() != self.rows {
            return Err(dim_err(format!(
                "right-hand side of length {} for {} equations",
                b.len(),
                self.rows
            )));
        }
        let mut aug = Self::zeros(&self.field, self.rows, self.cols + 1);
        for r in 0..self.rows {
            aug.data[r * (self.cols + 1)..r * (self.cols + 1) + self.cols]
                .copy_from_slice(self.row(r));
            aug.data[r * (self.cols + 1) + self.cols] = b[r];
        }
        let pivots = aug.rref_in_place(self.cols + 1);
        if pivots.last() == Some(&self.cols) {
            return Err(Error::Inconsistent);
        }
        if pivots.len() < self.cols {
            return Err(Error::Underdetermined);
        }
        Ok((0..self.cols).map(|r| aug.get(r, self.cols)).collect())
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(dim_err("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let mut aug = Self::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            aug.data[r * 2 * n..r * 2 * n + n].copy_from_slice(self.row(r));
            aug.data[r * 2 * n + n + r] = 1;
        }
        if aug.rref_in_place(n).len() < n {
            return Err(Error::Singular);
        }
        let mut out = Self::zeros(&self.field, n, n);
        for r in 0..n {
            out.data[r * n..(r + 1) * n].copy_from_slice(&aug.row(r)[n..]);
        }
        Ok(out)
    }

    /// A matrix `P` with `self * P = I`, for a matrix of full row rank.
    /// `P` is supported on the pivot columns of `self`.
    pub fn right_inverse(&self) -> Result<Self> {
        let (_, pivots) = self.rref();
        if pivots.len() < self.rows {
            return Err(Error::Singular);
        }
        let sub = self.select_columns(&pivots);
        let inv = sub.inverse()?;
        let mut out = Self::zeros(&self.field, self.cols, self.rows);
        for (k, &c) in pivots.iter().enumerate() {
            out.data[c * self.rows..(c + 1) * self.rows].copy_from_slice(inv.row(k));
        }
        Ok(out)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(&self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (k, &c) in cols.iter().enumerate() {
                out.data[r * cols.len() + k] = self.get(r, c);
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            data,
            ..self.clone()
        }
    }

    pub fn submatrix(&self, row0: usize, col0: usize, height: usize, width: usize) -> Result<Self> {
        if row0 + height > self.rows || col0 + width > self.cols {
            return Err(Error::IndexOutOfRange(format!(
                "{height}x{width} window at ({row0},{col0}) of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let mut out = Self::zeros(&self.field, height, width);
        for r in 0..height {
            out.data[r * width..(r + 1) * width]
                .copy_from_slice(&self.row(row0 + r)[col0..col0 + width]);
        }
        Ok(out)
    }

    /// Stacks matrices vertically.
    pub fn vstack(parts: &[&Self]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| dim_err("empty vstack"))?;
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            first.check_field(p)?;
            if p.cols != first.cols {
                return Err(dim_err("vstack of different widths"));
            }
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Ok(Self {
            rows,
            cols: first.cols,
            field: first.field.clone(),
            data,
        })
    }

    /// Stacks matrices horizontally.
    pub fn hstack(parts: &[&Self]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| dim_err("empty hstack"))?;
        let cols: usize = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(&first.field, first.rows, cols);
        let mut c0 = 0;
        for p in parts {
            first.check_field(p)?;
            if p.rows != first.rows {
                return Err(dim_err("hstack of different heights"));
            }
            for r in 0..p.rows {
                out.data[r * cols + c0..r * cols + c0 + p.cols].copy_from_slice(p.row(r));
            }
            c0 += p.cols;
        }
        Ok(out)
    }

    /// Assembles a block matrix; `None` entries are zero blocks.
    pub fn block_compose(
        field: &Field,
        spec: &BlockSpec,
        blocks: &[Vec<Option<Self>>],
    ) -> Result<Self> {
        if blocks.len() != spec.block_rows || blocks.iter().any(|r| r.len() != spec.block_cols) {
            return Err(dim_err("block grid does not match its spec"));
        }
        let rows = spec.block_rows * spec.block_height;
        let cols = spec.block_cols * spec.block_width;
        let mut out = Self::zeros(field, rows, cols);
        for (l, grid_row) in blocks.iter().enumerate() {
            for (s, block) in grid_row.iter().enumerate() {
                let Some(b) = block else { continue };
                if b.field != *field {
                    return Err(Error::FieldMismatch);
                }
                if b.rows != spec.block_height || b.cols != spec.block_width {
                    return Err(dim_err(format!(
                        "block ({l},{s}) is {}x{}, expected {}x{}",
                        b.rows, b.cols, spec.block_height, spec.block_width
                    )));
                }
                for r in 0..b.rows {
                    let dst = (l * spec.block_height + r) * cols + s * spec.block_width;
                    out.data[dst..dst + b.cols].copy_from_slice(b.row(r));
                }
            }
        }
        Ok(out)
    }

    /// The `(l, s)` block of a block-partitioned matrix.
    pub fn block_extract(&self, spec: &BlockSpec, l: usize, s: usize) -> Result<Self> {
        if l >= spec.block_rows || s >= spec.block_cols {
            return Err(Error::IndexOutOfRange(format!(
                "block ({l},{s}) of a {}x{} grid",
                spec.block_rows, spec.block_cols
            )));
        }
        if self.rows != spec.block_rows * spec.block_height
            || self.cols != spec.block_cols * spec.block_width
        {
            return Err(dim_err("matrix does not match block spec"));
        }
        self.submatrix(
            l * spec.block_height,
            s * spec.block_width,
            spec.block_height,
            spec.block_width,
        )
    }

    /// Block-diagonal matrix from the given blocks.
    pub fn block_diag(field: &Field, blocks: &[&Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(field, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for r in 0..b.rows {
                let dst = (r0 + r) * cols + c0;
                out.data[dst..dst + b.cols].copy_from_slice(b.row(r));
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }
}
