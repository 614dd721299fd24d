//! Zeroth-order metric data and the torsion family at a point (x, y):
//! the norm F, its angular form, the fundamental tensor and its inverse,
//! Cartan torsion, mean Cartan torsion, and the Matsumoto torsion.
//!
//! Everything is derived from one scalar, F^2(x, y), differentiated with
//! jets. The `_s` functions are generic over the scalar so that outer code
//! can nest further derivative slots on top (the spray and curvature stacks
//! do exactly that).

use crate::autodiff::{Hd1, Hd2, Hd3, Jet, Real, ScalarField};
use crate::chart::ChartSpec;
use crate::error::{Error, Result};
use crate::linalg;

/// A chart point with an attached nonzero tangent vector.
#[derive(Clone, Debug)]
pub struct PointTangent {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PointTangent {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<PointTangent> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!(
                "point has dimension {}, tangent has {}",
                x.len(),
                y.len()
            )));
        }
        if y.iter().map(|v| v * v).sum::<f64>() == 0.0 {
            return Err(Error::Degenerate("tangent vector must be nonzero".into()));
        }
        Ok(PointTangent { x, y })
    }
}

/// alpha^2 = a_{ij}(x) y^i y^j.
pub fn alpha2_s<S: Real>(chart: &ChartSpec, x: &[S], y: &[S]) -> Result<S> {
    let n = chart.dim;
    let a = chart.eval_a(x)?;
    let mut acc = S::zero();
    for i in 0..n {
        for j in 0..n {
            acc = acc + a[i * n + j].clone() * y[i].clone() * y[j].clone();
        }
    }
    Ok(acc)
}

/// beta = b_i(x) y^i.
pub fn beta_s<S: Real>(chart: &ChartSpec, x: &[S], y: &[S]) -> Result<S> {
    let b = chart.eval_b(x)?;
    let mut acc = S::zero();
    for (bi, yi) in b.iter().zip(y) {
        acc = acc + bi.clone() * yi.clone();
    }
    Ok(acc)
}

/// F = sqrt(alpha^2) + beta. Requires alpha^2 > 0 on the primal part.
pub fn f_s<S: Real>(chart: &ChartSpec, x: &[S], y: &[S]) -> Result<S> {
    let a2 = alpha2_s(chart, x, y)?;
    if a2.re() <= 0.0 {
        return Err(Error::Degenerate(format!(
            "alpha^2 = {} is not positive (y = 0 or metric degenerate)",
            a2.re()
        )));
    }
    Ok(a2.sqrt() + beta_s(chart, x, y)?)
}

/// F^2, the scalar every tensor here differentiates.
pub fn fsq_s<S: Real>(chart: &ChartSpec, x: &[S], y: &[S]) -> Result<S> {
    let f = f_s(chart, x, y)?;
    Ok(f.clone() * f)
}

/// F^2 as a [`ScalarField`], for the finite-difference cross-checks.
pub struct FsqField<'a> {
    pub chart: &'a ChartSpec,
}

impl ScalarField for FsqField<'_> {
    fn eval<S: Real>(&self, x: &[S], y: &[S]) -> Result<S> {
        fsq_s(self.chart, x, y)
    }
}

fn lift<J: Jet<S>, S: Real>(v: &[S]) -> Vec<J> {
    v.iter().map(|c| J::constant(c.clone())).collect()
}

/// Angular form ell_i = dF/dy^i, entries in the scalar S.
pub fn ell_s<S: Real>(chart: &ChartSpec, x: &[S], y: &[S]) -> Result<Vec<S>> {
    let n = chart.dim;
    let xs: Vec<Hd1<S>> = lift(x);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut ys: Vec<Hd1<S>> = lift(y);
        ys[i].seed(0, S::one());
        out.push(f_s(chart, &xs, &ys)?.coeff(1));
    }
    Ok(out)
}

/// Fundamental tensor g_{ij} = 1/2 d^2 F^2 / dy^i dy^j, row-major.
pub fn metric_s<S: Real>(chart: &ChartSpec, x: &[S], y: &[S]) -> Result<Vec<S>> {
    let n = chart.dim;
    let xs: Vec<Hd2<S>> = lift(x);
    let mut out = vec![S::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let mut ys: Vec<Hd2<S>> = lift(y);
            ys[i].seed(0, S::one());
            ys[j].seed(1, S::one());
            let gij = fsq_s(chart, &xs, &ys)?.coeff(3).scale(0.5);
            out[i * n + j] = gij.clone();
            out[j * n + i] = gij;
        }
    }
    Ok(out)
}

/// Cartan torsion C_{ijk} = 1/4 d^3 F^2 / dy^i dy^j dy^k, flat index i*n*n + j*n + k.
pub fn cartan_s<S: Real>(chart: &ChartSpec, x: &[S], y: &[S]) -> Result<Vec<S>> {
    let n = chart.dim;
    let xs: Vec<Hd3<S>> = lift(x);
    let mut out = vec![S::zero(); n * n * n];
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let mut ys: Vec<Hd3<S>> = lift(y);
                ys[i].seed(0, S::one());
                ys[j].seed(1, S::one());
                ys[k].seed(2, S::one());
                let c = fsq_s(chart, &xs, &ys)?.coeff(7).scale(0.25);
                for (p, q, r) in [
                    (i, j, k),
                    (i, k, j),
                    (j, i, k),
                    (j, k, i),
                    (k, i, j),
                    (k, j, i),
                ] {
                    out[p * n * n + q * n + r] = c.clone();
                }
            }
        }
    }
    Ok(out)
}

/// Pointwise fundamental data in f64.
#[derive(Clone, Debug)]
pub struct FundamentalData {
    pub n: usize,
    pub f: f64,
    /// ell_i = dF/dy^i.
    pub ell: Vec<f64>,
    /// g_{ij}, row-major.
    pub g: Vec<f64>,
    /// g^{ij}, row-major.
    pub g_inv: Vec<f64>,
    /// Angular metric h_{ij} = g_{ij} - ell_i ell_j.
    pub h: Vec<f64>,
    /// y_i = g_{ij} y^j.
    pub y_low: Vec<f64>,
}

pub fn fundamental_data(chart: &ChartSpec, x: &[f64], y: &[f64]) -> Result<FundamentalData> {
    let n = chart.dim;
    let f = f_s(chart, x, y)?;
    let ell = ell_s(chart, x, y)?;
    let g = metric_s(chart, x, y)?;
    let g_inv = linalg::invert(n, &g)?;
    let mut h = vec![0.0; n * n];
    let mut y_low = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] = g[i * n + j] - ell[i] * ell[j];
            y_low[i] += g[i * n + j] * y[j];
        }
    }
    Ok(FundamentalData {
        n,
        f,
        ell,
        g,
        g_inv,
        h,
        y_low,
    })
}

/// Torsion family in f64.
#[derive(Clone, Debug)]
pub struct TorsionData {
    pub n: usize,
    /// C_{ijk}, flat index i*n*n + j*n + k.
    pub c: Vec<f64>,
    /// Mean Cartan torsion I_i = g^{jk} C_{ijk}.
    pub i_low: Vec<f64>,
    /// I^i = g^{ij} I_j.
    pub i_up: Vec<f64>,
    /// Matsumoto torsion M_{ijk}.
    pub m: Vec<f64>,
}

pub fn torsion_data(
    chart: &ChartSpec,
    fund: &FundamentalData,
    x: &[f64],
    y: &[f64],
) -> Result<TorsionData> {
    let n = chart.dim;
    let c = cartan_s(chart, x, y)?;
    let mut i_low = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                i_low[i] += fund.g_inv[j * n + k] * c[i * n * n + j * n + k];
            }
        }
    }
    let mut i_up = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            i_up[i] += fund.g_inv[i * n + j] * i_low[j];
        }
    }
    let scale = 1.0 / (n as f64 + 1.0);
    let mut m = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                m[i * n * n + j * n + k] = c[i * n * n + j * n + k]
                    - scale
                        * (i_low[i] * fund.h[j * n + k]
                            + i_low[j] * fund.h[i * n + k]
                            + i_low[k] * fund.h[i * n + j]);
            }
        }
    }
    Ok(TorsionData {
        n,
        c,
        i_low,
        i_up,
        m,
    })
}

/// Norm of the mean Cartan torsion in the direction y: sqrt(I_i g^{ij} I_j).
pub fn mean_cartan_value(chart: &ChartSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let fund = fundamental_data(chart, x, y)?;
    let tors = torsion_data(chart, &fund, x, y)?;
    let n = chart.dim;
    let mut norm2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            norm2 += tors.i_low[i] * fund.g_inv[i * n + j] * tors.i_low[j];
        }
    }
    Ok(norm2.max(0.0).sqrt())
}

#[derive(Clone, Debug)]
pub struct MeanCartanEstimate {
    /// Certified lower estimate of the sup over the indicatrix.
    pub value: f64,
    /// Direction attaining the estimate.
    pub argmax: Vec<f64>,
    /// Number of directions evaluated (sampling resolution).
    pub directions_evaluated: usize,
}

/// Sup of the mean Cartan norm over tangent directions at x, estimated by
/// coarse sphere sampling (64 n directions) and three rounds of shrinking
/// local refinement around the best five. The value is a lower bound on the
/// true sup by construction.
pub fn mean_cartan_norm(chart: &ChartSpec, x: &[f64], seed: u64) -> Result<MeanCartanEstimate> {
    let n = chart.dim;
    let mut rng = crate::sample::Rng::new(seed);
    let mut tried = 0usize;
    let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
    for _ in 0..64 * n {
        let y = rng.unit_vector(n);
        let v = mean_cartan_value(chart, x, &y)?;
        tried += 1;
        scored.push((v, y));
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    scored.truncate(5);

    // Shrink the perturbation radius by the golden ratio squared each round.
    let mut radius = 0.35;
    for _round in 0..3 {
        for entry in scored.iter_mut() {
            for _ in 0..16 {
                let delta = rng.unit_vector(n);
                let cand: Vec<f64> = entry
                    .1
                    .iter()
                    .zip(&delta)
                    .map(|(c, d)| c + radius * d)
                    .collect();
                let norm = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm < 1e-8 {
                    continue;
                }
                let cand: Vec<f64> = cand.into_iter().map(|v| v / norm).collect();
                let v = mean_cartan_value(chart, x, &cand)?;
                tried += 1;
                if v > entry.0 {
                    *entry = (v, cand);
                }
            }
        }
        radius /= 1.618_033_988_749_895 * 1.618_033_988_749_895;
    }
    let best = scored
        .into_iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty candidate set");
    Ok(MeanCartanEstimate {
        value: best.0,
        argmax: best.1,
        directions_evaluated: tried,
    })
}

/// Bound on the mean Cartan norm specific to a Randers metric with covector
/// norm `beta_norm`: (n+1)/2 * sqrt(1 - sqrt(1 - beta_norm^2)).
pub fn randers_norm_bound(n: usize, beta_norm: f64) -> f64 {
    (n as f64 + 1.0) / 2.0 * (1.0 - (1.0 - beta_norm * beta_norm).sqrt()).max(0.0).sqrt()
}

/// Dimension-only bound (n+1)/sqrt(2) valid for all Randers metrics.
pub fn global_norm_bound(n: usize) -> f64 {
    (n as f64 + 1.0) / std::f64::consts::SQRT_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{fd_partial, FdConfig, MultiIndex};
    use crate::chart::{catalog, CatalogParams};
    use approx::assert_relative_eq;

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    #[test]
    fn euclidean_norm_is_pythagorean() {
        let chart = catalog("euclidean_randers", 2, &CatalogParams { b: Some(vec![0.0, 0.0]), radius: None })
            .unwrap();
        let f = f_s(&chart.spec, &[0.1, 0.2], &[3.0, 4.0]).unwrap();
        assert_relative_eq!(f, 5.0, epsilon = 1e-14);
        let g = metric_s(&chart.spec, &[0.1, 0.2], &[3.0, 4.0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(g[i * 2 + j], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn euler_identities_hold() {
        let chart = catalog("funk_ball", 3, &CatalogParams::default()).unwrap();
        let x = [0.25, -0.3, 0.1];
        let y = [0.4, 1.1, -0.6];
        let fund = fundamental_data(&chart.spec, &x, &y).unwrap();
        let n = 3;
        // g_{ij} y^i y^j = F^2
        let mut gyy = 0.0;
        for i in 0..n {
            for j in 0..n {
                gyy += fund.g[i * n + j] * y[i] * y[j];
            }
        }
        assert_relative_eq!(gyy, fund.f * fund.f, max_relative = 1e-10);
        // ell_i y^i = F, h_{ij} y^j = 0
        let elly: f64 = fund.ell.iter().zip(&y).map(|(l, yi)| l * yi).sum();
        assert_relative_eq!(elly, fund.f, max_relative = 1e-12);
        for i in 0..n {
            let hy: f64 = (0..n).map(|j| fund.h[i * n + j] * y[j]).sum();
            assert!(hy.abs() < 1e-10 * (1.0 + max_abs(&fund.h)));
        }
    }

    #[test]
    fn metric_matches_fd_oracle_on_funk() {
        let chart = catalog("funk_ball", 2, &CatalogParams::default()).unwrap();
        let x = [0.3, 0.0];
        let y = [1.0, 0.0];
        let g = metric_s(&chart.spec, &x, &y).unwrap();
        let field = FsqField { chart: &chart.spec };
        for i in 0..2 {
            for j in 0..2 {
                let mut dy = vec![0u32; 2];
                dy[i] += 1;
                dy[j] += 1;
                let fd = 0.5
                    * fd_partial(
                        &field,
                        &x,
                        &y,
                        &MultiIndex::new(vec![0, 0], dy),
                        &FdConfig::default(),
                    )
                    .unwrap();
                assert_relative_eq!(g[i * 2 + j], fd, epsilon = 1e-5, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn cartan_torsion_invariants() {
        let chart = catalog("funk_ball", 2, &CatalogParams::default()).unwrap();
        let x = [0.2, -0.35];
        let y = [0.7, 0.9];
        let fund = fundamental_data(&chart.spec, &x, &y).unwrap();
        let tors = torsion_data(&chart.spec, &fund, &x, &y).unwrap();
        let n = 2;
        let cmax = max_abs(&tors.c);
        assert!(cmax > 1e-3, "funk chart must have nonzero Cartan torsion");
        // C y = 0 and I y = 0.
        for i in 0..n {
            for j in 0..n {
                let cy: f64 = (0..n).map(|k| tors.c[i * n * n + j * n + k] * y[k]).sum();
                assert!(cy.abs() < 1e-10 * (1.0 + cmax));
            }
        }
        let iy: f64 = tors.i_low.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!(iy.abs() < 1e-10 * (1.0 + max_abs(&tors.i_low)));
        // Matsumoto torsion vanishes for a Randers metric.
        assert!(max_abs(&tors.m) < 1e-9 * (1.0 + cmax));
    }

    #[test]
    fn cartan_is_minus_one_homogeneous() {
        let chart = catalog("funk_ball", 2, &CatalogParams::default()).unwrap();
        let x = [0.1, 0.45];
        let y = [1.3, -0.5];
        let c1 = cartan_s(&chart.spec, &x, &y).unwrap();
        for lambda in [0.5, 2.0, 7.0] {
            let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
            let cl = cartan_s(&chart.spec, &x, &ys).unwrap();
            for (a, b) in c1.iter().zip(&cl) {
                assert_relative_eq!(*a, b * lambda, max_relative = 1e-10, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn riemannian_chart_has_zero_torsion() {
        let chart = catalog("riemannian_sphere", 2, &CatalogParams::default()).unwrap();
        let c = cartan_s(&chart.spec, &[0.4, -0.2], &[0.8, 0.6]).unwrap();
        assert!(max_abs(&c) < 1e-12);
    }

    #[test]
    fn closed_form_randers_metric_agrees() {
        // g_{ij} = (F/alpha) a_{ij} - (F/alpha^3) ya_i ya_j + ell_i ell_j,
        // with ya_i = a_{ij} y^j and ell_i = ya_i/alpha + b_i.
        let chart = catalog("funk_ball", 3, &CatalogParams::default()).unwrap();
        let x = [0.2, 0.1, -0.4];
        let y = [0.5, -1.0, 0.8];
        let n = 3;
        let a = chart.spec.eval_a::<f64>(&x).unwrap();
        let b = chart.spec.eval_b::<f64>(&x).unwrap();
        let mut ya = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                ya[i] += a[i * n + j] * y[j];
            }
        }
        let alpha = ya.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>().sqrt();
        let beta: f64 = b.iter().zip(&y).map(|(p, q)| p * q).sum();
        let f = alpha + beta;
        let ell: Vec<f64> = (0..n).map(|i| ya[i] / alpha + b[i]).collect();
        let g = metric_s(&chart.spec, &x, &y).unwrap();
        for i in 0..n {
            for j in 0..n {
                let closed = f / alpha * a[i * n + j] - f / alpha.powi(3) * ya[i] * ya[j]
                    + ell[i] * ell[j];
                assert_relative_eq!(g[i * n + j], closed, max_relative = 1e-10, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mean_cartan_norm_zero_for_riemannian() {
        let chart = catalog("riemannian_sphere", 2, &CatalogParams::default()).unwrap();
        let est = mean_cartan_norm(&chart.spec, &[0.3, 0.1], 11).unwrap();
        assert!(est.value < 1e-10);
    }

    #[test]
    fn mean_cartan_norm_matches_exact_flat_sup() {
        // For a flat chart with constant covector of norm b the sup has a
        // closed form: maximize (b^2 - t^2)/(1 + t)^3 over t = <b, y> in
        // [-b, b]; the maximizer is t* = 1 - sqrt(1 + 3 b^2), giving
        //   sup ||I|| = (n+1)/2 * sqrt(2 (w - 1 - b^2) / (2 - w)^3),
        // with w = sqrt(1 + 3 b^2). Derived by hand from the Randers
        // closed-form tensors; it pins both the estimator and the torsion
        // stack at once.
        let b = 0.6f64;
        let chart = catalog(
            "euclidean_randers",
            2,
            &CatalogParams {
                b: Some(vec![b, 0.0]),
                radius: None,
            },
        )
        .unwrap();
        let est = mean_cartan_norm(&chart.spec, &[0.0, 0.0], 23).unwrap();
        let w = (1.0 + 3.0 * b * b).sqrt();
        let exact = 1.5 * (2.0 * (w - 1.0 - b * b) / (2.0 - w).powi(3)).sqrt();
        assert!(
            est.value <= exact * (1.0 + 1e-9),
            "estimate {} must stay below the true sup {exact}",
            est.value
        );
        assert!(
            est.value > exact - 5e-4,
            "refinement stopped too far from the sup: {} vs {exact}",
            est.value
        );
    }
}

