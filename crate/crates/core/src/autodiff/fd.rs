//! Finite-difference oracle used to cross-check the jet engine.
//!
//! Pure f64 central-difference stencils applied recursively per derivative
//! slot, with Richardson extrapolation. Shares no code with the jet path.

use super::ScalarField;
use crate::error::{Error, Result};
use crate::autodiff::MultiIndex;

/// Finite-difference configuration.
///
/// `base_step = None` picks `eps^(1/(2L + order))` where `L` is the
/// Richardson level count and `order` the total derivative order. An
/// `L`-level table has truncation O(h^(2L)) while the stencil's rounding
/// noise grows like eps/h^order, and that exponent balances the two. With
/// the defaults (L = 2) a first derivative uses `eps^(1/6)` and lands near
/// 1e-10 accuracy; a third derivative uses `eps^(1/7)` and lands near 1e-9.
/// `richardson_levels = 1` is a plain central difference; each extra level
/// halves the step and extrapolates the leading error term away.
#[derive(Clone, Copy, Debug)]
pub struct FdConfig {
    pub base_step: Option<f64>,
    pub richardson_levels: u32,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            base_step: None,
            richardson_levels: 2,
        }
    }
}

#[derive(Clone, Copy)]
struct Slot {
    in_y: bool,
    coord: usize,
}

fn eval_at<F: ScalarField>(f: &F, x: &[f64], y: &[f64]) -> Result<f64> {
    f.eval::<f64>(x, y)
}

/// Derivative along `slots` (innermost last), each level a central
/// difference with per-coordinate step scaling `h · max(1, |coord|)`.
fn diff_rec<F: ScalarField>(
    f: &F,
    x: &[f64],
    y: &[f64],
    slots: &[Slot],
    h_base: f64,
    levels: u32,
) -> Result<f64> {
    let Some((&slot, rest)) = slots.split_last() else {
        return eval_at(f, x, y);
    };
    let center = if slot.in_y { y[slot.coord] } else { x[slot.coord] };
    let step0 = h_base * center.abs().max(1.0);

    let central = |h: f64| -> Result<f64> {
        let shift = |delta: f64| -> Result<f64> {
            let mut xs = x.to_vec();
            let mut ys = y.to_vec();
            if slot.in_y {
                ys[slot.coord] += delta;
            } else {
                xs[slot.coord] += delta;
            }
            diff_rec(f, &xs, &ys, rest, h_base, levels)
        };
        Ok((shift(h)? - shift(-h)?) / (2.0 * h))
    };

    // Richardson table over step halving; central differences have an even
    // error expansion, so each column gains two orders.
    let mut table: Vec<f64> = Vec::with_capacity(levels as usize);
    for level in 0..levels {
        let mut value = central(step0 / f64::powi(2.0, level as i32))?;
        for (j, prev) in table.iter_mut().enumerate() {
            let factor = f64::powi(4.0, j as i32 + 1);
            let refined = (factor * value - *prev) / (factor - 1.0);
            *prev = value;
            value = refined;
        }
        table.push(value);
    }
    Ok(*table.last().expect("at least one richardson level"))
}

/// Finite-difference estimate of the same mixed partial as
/// [`super::mixed_partial`], for cross-validation.
pub fn fd_partial<F: ScalarField>(
    f: &F,
    x: &[f64],
    y: &[f64],
    idx: &MultiIndex,
    cfg: &FdConfig,
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
    if cfg.richardson_levels == 0 {
        return Err(Error::Config(
            "richardson_levels must be at least 1".into(),
        ));
    }
    let mut slots = Vec::new();
    for (coord, &k) in idx.dx.iter().enumerate() {
        for _ in 0..k {
            slots.push(Slot { in_y: false, coord });
        }
    }
    for (coord, &k) in idx.dy.iter().enumerate() {
        for _ in 0..k {
            slots.push(Slot { in_y: true, coord });
        }
    }
    let order = slots.len() as f64;
    let h_base = cfg.base_step.unwrap_or_else(|| {
        f64::EPSILON.powf(1.0 / (2.0 * cfg.richardson_levels as f64 + order))
    });
    diff_rec(f, x, y, &slots, h_base, cfg.richardson_levels)
}

#[cfg(test)]
mod tests {
    use crate::autodiff::Real;
    use super::*;
    use approx::assert_relative_eq;

    struct CubeY1;
    impl ScalarField for CubeY1 {
        fn eval<S: Real>(&self, _x: &[S], y: &[S]) -> Result<S> {
            Ok(y[0].powi(3))
        }
    }

    struct Smooth;
    impl ScalarField for Smooth {
        fn eval<S: Real>(&self, x: &[S], y: &[S]) -> Result<S> {
            Ok((x[0].clone() * y[0].clone()).sin() + y[0].clone() * y[0].clone() * x[0].exp())
        }
    }

    #[test]
    fn third_derivative_of_cube_is_six() {
        let d = fd_partial(
            &CubeY1,
            &[0.0],
            &[1.0],
            &MultiIndex::new(vec![0], vec![3]),
            &FdConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(d, 6.0, epsilon = 1e-6);
    }

    #[test]
    fn first_derivative_matches_closed_form() {
        let (x, y) = ([0.4], [1.3]);
        let d = fd_partial(
            &Smooth,
            &x,
            &y,
            &MultiIndex::new(vec![0], vec![1]),
            &FdConfig::default(),
        )
        .unwrap();
        let expect = x[0] * (x[0] * y[0]).cos() + 2.0 * y[0] * x[0].exp();
        assert_relative_eq!(d, expect, epsilon = 1e-9, max_relative = 1e-9);
    }

    #[test]
    fn mixed_second_derivative_matches_closed_form() {
        let (x, y) = ([0.4], [1.3]);
        let d = fd_partial(
            &Smooth,
            &x,
            &y,
            &MultiIndex::new(vec![1], vec![1]),
            &FdConfig::default(),
        )
        .unwrap();
        // d/dx d/dy [sin(xy) + y^2 e^x] = cos(xy) - xy sin(xy) + 2 y e^x
        let expect = (x[0] * y[0]).cos() - x[0] * y[0] * (x[0] * y[0]).sin() + 2.0 * y[0] * x[0].exp();
        assert_relative_eq!(d, expect, epsilon = 1e-7, max_relative = 1e-7);
    }
}
