//! Turns a `(k+r, k)` MDS storage code that repairs only its systematic nodes
//! with optimal bandwidth into an MSR code that repairs every node optimally.
//!
//! The transformation space-shares `r` instances of the base code, permutes
//! the parity pieces within each instance, and pairs parity pieces across
//! instances with coefficients `theta(j,l)` where `{theta(j,l), theta(l,j)} = {1, a}`.
//! Node capacity grows from `N` to `rN`; the field does not change.
//!
//! Modules, bottom-up: [`gf`] field arithmetic, [`linalg`] dense matrices,
//! [`basecode`] base codes and their verifiers, [`transform`] the
//! transformation and its matrix view, [`repair`] single-node repair,
//! [`reconstruct`] any-`k` decoding, [`cluster`] a failure/repair simulator
//! and [`chunk`] the on-disk chunk format.

pub mod basecode;
pub mod chunk;
pub mod cluster;
pub mod error;
pub mod gf;
pub mod linalg;
pub mod par;
pub mod reconstruct;
pub mod repair;
pub mod transform;

pub use error::{Error, Result};
pub use gf::{Elem, Field};
pub use linalg::{BlockSpec, MatrixGF};
pub use par::Exec;
