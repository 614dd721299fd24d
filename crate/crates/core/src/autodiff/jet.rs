//! Truncated Taylor ("hyper-dual") scalar types with one nilpotent generator
//! per derivative slot, plus the [`mixed_partial`] entry point.
//!
//! A value of `HdK<S>` is `Σ_m c_m ε^m` where `m` runs over subsets of the
//! `K` generators and every generator squares to zero. Multiplication is a
//! subset convolution, so the coefficient of the full product `ε_0…ε_{K-1}`
//! is the exact mixed partial along the seeded directions. The base scalar
//! `S` may itself be a jet; nesting is how derived tensors are
//! differentiated without symbolic chain rules.

use super::Real;
use crate::error::{Error, Result};

/// Seedable jet scalar over a base scalar `S`.
pub trait Jet<S: Real>: Real {
    const SLOTS: usize;

    fn constant(c: S) -> Self;

    fn from_re(c: f64) -> Self {
        Self::constant(S::from_f64(c))
    }

    /// Add `amount · ε_slot`. Seeding several coordinates on the same slot
    /// produces a directional derivative along the seeded vector.
    fn seed(&mut self, slot: usize, amount: S);

    /// Coefficient of the generator subset `mask` (bit `i` = generator `i`).
    fn coeff(&self, mask: usize) -> S;
}

macro_rules! hyperdual {
    ($(#[$meta:meta])* $name:ident, $slots:expr, $len:expr) => {
        $(#[$meta])*
        #[derive(Clone, Debug)]
        pub struct $name<S>(pub [S; $len]);

        impl<S: Real> $name<S> {
            fn primal(&self) -> S {
                self.0[0].clone()
            }

            /// The nilpotent part `self - primal`.
            fn nil(&self) -> Self {
                let mut out = self.clone();
                out.0[0] = S::zero();
                out
            }

            /// Horner evaluation of `Σ coeffs[k] · nil^k`; `coeffs[k]` must be
            /// the k-th Taylor coefficient `f^(k)(primal)/k!`.
            fn compose(&self, coeffs: &[S; $slots + 1]) -> Self {
                let u = self.nil();
                let mut acc = Self::constant(coeffs[$slots].clone());
                let mut k = $slots;
                while k > 0 {
                    k -= 1;
                    acc = acc * u.clone() + Self::constant(coeffs[k].clone());
                }
                acc
            }
        }

        impl<S: Real> Jet<S> for $name<S> {
            const SLOTS: usize = $slots;

            fn constant(c: S) -> Self {
                let mut out: [S; $len] = std::array::from_fn(|_| S::zero());
                out[0] = c;
                $name(out)
            }

            fn seed(&mut self, slot: usize, amount: S) {
                debug_assert!(slot < $slots);
                let i = 1usize << slot;
                self.0[i] = self.0[i].clone() + amount;
            }

            fn coeff(&self, mask: usize) -> S {
                self.0[mask].clone()
            }
        }

        impl<S: Real> std::ops::Add for $name<S> {
            type Output = Self;
            fn add(mut self, rhs: Self) -> Self {
                for (o, r) in self.0.iter_mut().zip(rhs.0) {
                    *o = o.clone() + r;
                }
                self
            }
        }

        impl<S: Real> std::ops::Sub for $name<S> {
            type Output = Self;
            fn sub(mut self, rhs: Self) -> Self {
                for (o, r) in self.0.iter_mut().zip(rhs.0) {
                    *o = o.clone() - r;
                }
                self
            }
        }

        impl<S: Real> std::ops::Neg for $name<S> {
            type Output = Self;
            fn neg(mut self) -> Self {
                for o in self.0.iter_mut() {
                    *o = -o.clone();
                }
                self
            }
        }

        impl<S: Real> std::ops::Mul for $name<S> {
            type Output = Self;
            fn mul(self, rhs: Self) -> Self {
                let mut out: [S; $len] = std::array::from_fn(|_| S::zero());
                for (m, slot) in out.iter_mut().enumerate() {
                    let mut acc = S::zero();
                    let mut a = m;
                    loop {
                        acc = acc + self.0[a].clone() * rhs.0[m ^ a].clone();
                        if a == 0 {
                            break;
                        }
                        a = (a - 1) & m;
                    }
                    *slot = acc;
                }
                $name(out)
            }
        }

        impl<S: Real> std::ops::Div for $name<S> {
            type Output = Self;
            fn div(self, rhs: Self) -> Self {
                // Triangular solve of z · rhs = self by subset size; valid
                // whenever the primal part of rhs is invertible.
                let inv0 = rhs.0[0].clone().recip();
                let mut z: [S; $len] = std::array::from_fn(|_| S::zero());
                for m in 0..$len {
                    let mut acc = self.0[m].clone();
                    let mut a = m;
                    while a != 0 {
                        acc = acc - rhs.0[a].clone() * z[m ^ a].clone();
                        a = (a - 1) & m;
                    }
                    z[m] = acc * inv0.clone();
                }
                $name(z)
            }
        }

        impl<S: Real> Real for $name<S> {
            fn from_f64(c: f64) -> Self {
                <Self as Jet<S>>::constant(S::from_f64(c))
            }

            fn re(&self) -> f64 {
                self.0[0].re()
            }

            fn scale(&self, c: f64) -> Self {
                let mut out = self.clone();
                for o in out.0.iter_mut() {
                    *o = o.scale(c);
                }
                out
            }

            fn sqrt(&self) -> Self {
                let x0 = self.primal();
                let r = x0.recip();
                let mut coeffs: [S; $slots + 1] = std::array::from_fn(|_| S::zero());
                coeffs[0] = x0.sqrt();
                for m in 1..=$slots {
                    let factor = (1.5 - m as f64) / m as f64;
                    coeffs[m] = (coeffs[m - 1].clone() * r.clone()).scale(factor);
                }
                self.compose(&coeffs)
            }

            fn sin(&self) -> Self {
                let (s0, c0) = (self.primal().sin(), self.primal().cos());
                let cycle = [s0.clone(), c0.clone(), -s0, -c0];
                let mut coeffs: [S; $slots + 1] = std::array::from_fn(|_| S::zero());
                let mut inv_fact = 1.0;
                for m in 0..=$slots {
                    if m > 0 {
                        inv_fact /= m as f64;
                    }
                    coeffs[m] = cycle[m % 4].scale(inv_fact);
                }
                self.compose(&coeffs)
            }

            fn cos(&self) -> Self {
                let (s0, c0) = (self.primal().sin(), self.primal().cos());
                let cycle = [c0.clone(), -s0.clone(), -c0, s0];
                let mut coeffs: [S; $slots + 1] = std::array::from_fn(|_| S::zero());
                let mut inv_fact = 1.0;
                for m in 0..=$slots {
                    if m > 0 {
                        inv_fact /= m as f64;
                    }
                    coeffs[m] = cycle[m % 4].scale(inv_fact);
                }
                self.compose(&coeffs)
            }

            fn exp(&self) -> Self {
                let mut coeffs: [S; $slots + 1] = std::array::from_fn(|_| S::zero());
                coeffs[0] = self.primal().exp();
                for m in 1..=$slots {
                    coeffs[m] = coeffs[m - 1].scale(1.0 / m as f64);
                }
                self.compose(&coeffs)
            }

            fn ln(&self) -> Self {
                let r = self.primal().recip();
                let mut coeffs: [S; $slots + 1] = std::array::from_fn(|_| S::zero());
                coeffs[0] = self.primal().ln();
                if $slots > 0 {
                    coeffs[1] = r.clone();
                    for m in 2..=$slots {
                        let factor = -((m - 1) as f64) / m as f64;
                        coeffs[m] = (coeffs[m - 1].clone() * r.clone()).scale(factor);
                    }
                }
                self.compose(&coeffs)
            }

            fn powi(&self, k: i32) -> Self {
                if k == 0 {
                    return Self::one();
                }
                if k < 0 {
                    return Self::one() / self.powi(-k);
                }
                let mut acc = Self::one();
                let mut base = self.clone();
                let mut e = k as u32;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = acc * base.clone();
                    }
                    e >>= 1;
                    if e > 0 {
                        base = base.clone() * base;
                    }
                }
                acc
            }

            fn powf(&self, p: f64) -> Self {
                let x0 = self.primal();
                let r = x0.recip();
                let mut coeffs: [S; $slots + 1] = std::array::from_fn(|_| S::zero());
                coeffs[0] = x0.powf(p);
                for m in 1..=$slots {
                    let factor = (p - (m - 1) as f64) / m as f64;
                    coeffs[m] = (coeffs[m - 1].clone() * r.clone()).scale(factor);
                }
                self.compose(&coeffs)
            }
        }
    };
}

hyperdual!(
    /// Jet with one derivative slot.
    Hd1, 1, 2
);
hyperdual!(
    /// Jet with two derivative slots.
    Hd2, 2, 4
);
hyperdual!(
    /// Jet with three derivative slots.
    Hd3, 3, 8
);
hyperdual!(
    /// Jet with four derivative slots.
    Hd4, 4, 16
);
hyperdual!(
    /// Jet with five derivative slots.
    Hd5, 5, 32
);
hyperdual!(
    /// Jet with six derivative slots.
    Hd6, 6, 64
);

/// Mixed-partial request: `dx[i]` x-derivatives in coordinate `i`, `dy[i]`
/// y-derivatives in coordinate `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndex {
    pub dx: Vec<u32>,
    pub dy: Vec<u32>,
}

impl MultiIndex {
    pub fn new(dx: Vec<u32>, dy: Vec<u32>) -> Self {
        MultiIndex { dx, dy }
    }

    pub fn order_x(&self) -> u32 {
        self.dx.iter().sum()
    }

    pub fn order_y(&self) -> u32 {
        self.dy.iter().sum()
    }
}

/// Per-block derivative budget enforced by [`mixed_partial`].
#[derive(Clone, Copy, Debug)]
pub struct JetBudget {
    pub order_x: u32,
    pub order_y: u32,
}

impl Default for JetBudget {
    fn default() -> Self {
        JetBudget {
            order_x: 2,
            order_y: 4,
        }
    }
}

fn seeded_eval<J: Jet<f64>, F: super::ScalarField>(
    f: &F,
    x: &[f64],
    y: &[f64],
    slots: &[(bool, usize)],
) -> Result<f64> {
    let mut xs: Vec<J> = x.iter().map(|&v| J::from_re(v)).collect();
    let mut ys: Vec<J> = y.iter().map(|&v| J::from_re(v)).collect();
    for (slot, &(in_y, coord)) in slots.iter().enumerate() {
        let target = if in_y { &mut ys } else { &mut xs };
        target[coord].seed(slot, 1.0);
    }
    Ok(f.eval(&xs, &ys)?.coeff((1usize << slots.len()) - 1))
}

/// Exact mixed partial `∂^|idx| f / ∂x^dx ∂y^dy` at `(x, y)` by jet
/// evaluation, one generator per derivative. Errors with `OrderExceeded`
/// when the request is beyond the configured budget.
pub fn mixed_partial<F: super::ScalarField>(
    f: &F,
    x: &[f64],
    y: &[f64],
    idx: &MultiIndex,
    budget: &JetBudget,
) -> Result<f64> {
    if idx.dx.len() != x.len() || idx.dy.len() != y.len() {
        return Err(Error::Dimension(format!(
            "multi-index has ({}, {}) entries for a point of dimension ({}, {})",
            idx.dx.len(),
            idx.dy.len(),
            x.len(),
            y.len()
        )));
    }
    let (ox, oy) = (idx.order_x(), idx.order_y());
    if ox > budget.order_x || oy > budget.order_y {
        return Err(Error::OrderExceeded {
            requested_x: ox,
            requested_y: oy,
            budget_x: budget.order_x,
            budget_y: budget.order_y,
        });
    }
    let mut slots: Vec<(bool, usize)> = Vec::with_capacity((ox + oy) as usize);
    for (coord, &k) in idx.dx.iter().enumerate() {
        for _ in 0..k {
            slots.push((false, coord));
        }
    }
    for (coord, &k) in idx.dy.iter().enumerate() {
        for _ in 0..k {
            slots.push((true, coord));
        }
    }
    match slots.len() {
        0 => f.eval(x, y),
        1 => seeded_eval::<Hd1<f64>, _>(f, x, y, &slots),
        2 => seeded_eval::<Hd2<f64>, _>(f, x, y, &slots),
        3 => seeded_eval::<Hd3<f64>, _>(f, x, y, &slots),
        4 => seeded_eval::<Hd4<f64>, _>(f, x, y, &slots),
        5 => seeded_eval::<Hd5<f64>, _>(f, x, y, &slots),
        6 => seeded_eval::<Hd6<f64>, _>(f, x, y, &slots),
        n => Err(Error::Config(format!(
            "total derivative order {n} above the supported jet width of 6"
        ))),
    }
}
