use crate::error::{Error, Result};
use crate::gf::{Elem, FieldKind, Field};

/// Which member of each pair `{theta(j,l), theta(l,j)}` carries `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    // carries_a[j][l] for j != l; the diagonal is false and unused.
    carries_a: Vec<Vec<bool>>,
}

impl Orientation {
    /// `theta(j,l) = a` for `j < l`.
    pub fn default_for(r: usize) -> Self {
        Self {
            carries_a: (0..r).map(|j| (0..r).map(|l| j < l).collect()).collect(),
        }
    }

    /// Exactly one of `carries_a[j][l]`, `carries_a[l][j]` must be set for
    /// every `j != l`.
    pub fn explicit(carries_a: Vec<Vec<bool>>) -> Result<Self> {
        let r = carries_a.len();
        if carries_a.iter().any(|row| row.len() != r) {
            return Err(Error::DimensionMismatch("orientation table must be r x r".into()));
        }
        for j in 0..r {
            for l in j + 1..r {
                if carries_a[j][l] == carries_a[l][j] {
                    return Err(Error::InvalidTheta(j, l));
                }
            }
        }
        let mut carries_a = carries_a;
        for (j, row) in carries_a.iter_mut().enumerate() {
            row[j] = false;
        }
        Ok(Self { carries_a })
    }

    pub fn r(&self) -> usize {
        self.carries_a.len()
    }

    pub fn carries_a(&self, j: usize, l: usize) -> bool {
        self.carries_a[j][l]
    }

    pub fn is_default(&self) -> bool {
        *self == Self::default_for(self.r())
    }
}

/// Pairing coefficients `theta(j,l)` with `{theta(j,l), theta(l,j)} = {1, a}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaTable {
    field: Field,
    a: Elem,
    orientation: Orientation,
}

impl ThetaTable {
    /// Default orientation. `a` must be a field element other than 0 and 1.
    pub fn new(field: &Field, r: usize, a: Elem) -> Result<Self> {
        Self::with_orientation(field, a, Orientation::default_for(r))
    }

    pub fn with_orientation(field: &Field, a: Elem, orientation: Orientation) -> Result<Self> {
        if a <= 1 || !field.contains(a) {
            return Err(Error::InvalidA(a));
        }
        Ok(Self::new_unchecked(field, a, orientation))
    }

    /// Skips the `a` check. Only meant for building negative controls.
    pub fn new_unchecked(field: &Field, a: Elem, orientation: Orientation) -> Self {
        Self {
            field: field.clone(),
            a,
            orientation,
        }
    }

    /// Smallest canonical choice: `q - 1` (that is, `-1`) in odd
    /// characteristic and the element `x` (integer 2) in GF(2^m).
    pub fn default_a(field: &Field) -> Elem {
        match field.kind() {
            FieldKind::Prime => field.minus_one(),
            FieldKind::BinaryExtension { .. } => 2,
        }
    }

    pub fn r(&self) -> usize {
        self.orientation.r()
    }

    pub fn a(&self) -> Elem {
        self.a
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn orientation(&self) -> &Orientation {
        &self.orientation
    }

    /// `theta(j,l)` for `j != l`.
    pub fn get(&self, j: usize, l: usize) -> Elem {
        if self.orientation.carries_a(j, l) {
            self.a
        } else {
            1
        }
    }

    /// Pairs `(j, l)`, `j < l`, whose values are not `{1, a}` with `a` outside
    /// `{0, 1}`. Empty for every table built through the checked constructors.
    pub fn violations(&self) -> Vec<(usize, usize)> {
        let r = self.r();
        let mut out = Vec::new();
        for j in 0..r {
            for l in j + 1..r {
                let (x, y) = (self.get(j, l), self.get(l, j));
                let product = self.field.mul(x, y);
                let paired = (x == 1 && y == self.a) || (x == self.a && y == 1);
                if !paired || product == 1 || product == 0 {
                    out.push((j, l));
                }
            }
        }
        out
    }

    /// Solver for the pair `x = theta(j,l) u + v`, `y = u + theta(l,j) v`.
    pub fn pair(&self, j: usize, l: usize) -> Result<PairSolver> {
        let (tjl, tlj) = (self.get(j, l), self.get(l, j));
        let det = self.field.sub(self.field.mul(tjl, tlj), 1);
        let det_inv = self.field.inv(det).map_err(|_| Error::ThetaSingular)?;
        Ok(PairSolver {
            field: self.field.clone(),
            theta_jl: tjl,
            x_coeff: self.field.mul(tlj, det_inv),
            y_coeff: det_inv,
        })
    }
}

/// Precomputed inverse of `[[theta(j,l), 1], [1, theta(l,j)]]`.
#[derive(Debug, Clone)]
pub struct PairSolver {
    field: Field,
    theta_jl: Elem,
    x_coeff: Elem,
    y_coeff: Elem,
}

impl PairSolver {
    /// Returns `(u, v)`.
    pub fn solve(&self, x: &[Elem], y: &[Elem]) -> (Vec<Elem>, Vec<Elem>) {
        let f = &self.field;
        let u: Vec<Elem> = x
            .iter()
            .zip(y)
            .map(|(&x, &y)| f.sub(f.mul(self.x_coeff, x), f.mul(self.y_coeff, y)))
            .collect();
        let v = x
            .iter()
            .zip(&u)
            .map(|(&x, &u)| f.sub(x, f.mul(self.theta_jl, u)))
            .collect();
        (u, v)
    }
}
