//! Forward-mode automatic differentiation on truncated Taylor values.
//!
//! The engine works with "seeded" numbers: a value plus a set of nilpotent
//! generators, one generator per requested derivative slot. Because every
//! generator squares to zero, the coefficient of a product of distinct
//! generators is exactly the mixed partial derivative along the seeded
//! directions, with no truncation error. Jet types nest: a jet over a jet
//! behaves as a jet in the union of the slot sets, which is how higher
//! derived tensors (spray derivatives, connection curvature) are obtained
//! without hand-written chain rules.
//!
//! [`fd`] holds an independent finite-difference oracle used to cross-check
//! the jet path; the two share nothing but the scalar field being probed.

mod fd;
mod jet;

pub use fd::{fd_partial, FdConfig};
pub use jet::{mixed_partial, Hd1, Hd2, Hd3, Hd4, Hd5, Hd6, Jet, JetBudget, MultiIndex};

use crate::error::Result;

/// A scalar-valued function of a base point `x` and a direction `y`,
/// evaluable over any [`Real`] scalar so it can be differentiated by seeding.
pub trait ScalarField {
    fn eval<S: Real>(&self, x: &[S], y: &[S]) -> Result<S>;
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn eval<S: Real>(&self, x: &[S], y: &[S]) -> Result<S> {
        (**self).eval(x, y)
    }
}

/// Arithmetic closure shared by `f64` and the jet types.
///
/// `re` strips every derivative direction and returns the underlying base
/// value; branching (domain guards, pivot selection) must go through it.
pub trait Real:
    Clone
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn from_f64(c: f64) -> Self;
    fn re(&self) -> f64;
    fn scale(&self, c: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn powi(&self, k: i32) -> Self;
    fn powf(&self, p: f64) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl Real for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn re(&self) -> f64 {
        *self
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn powi(&self, k: i32) -> Self {
        f64::powi(*self, k)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
}
