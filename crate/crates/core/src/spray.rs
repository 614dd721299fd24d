//! Spray geometry: spray coefficients G^i, the nonlinear connection
//! N^i_j = dG^i/dy^j, Berwald curvature B = d^3G/dy^3, Landsberg curvature
//! L, mean Landsberg J, and the metric-class flags built on them.

use crate::autodiff::{Hd1, Hd2, Hd3, Jet, Real};
use crate::chart::ChartSpec;
use crate::error::Result;
use crate::fundamental::{fsq_s, fundamental_data, metric_s, FundamentalData};
use crate::linalg;

fn lift<J: Jet<S>, S: Real>(v: &[S]) -> Vec<J> {
    v.iter().map(|c| J::constant(c.clone())).collect()
}

/// Spray coefficients G^i = 1/4 g^{il} ( [F^2]_{x^k y^l} y^k - [F^2]_{x^l} ).
///
/// The k-contraction is taken by seeding the x-argument with the vector y
/// (one jet slot for the whole directional derivative), so the cost is one
/// two-slot evaluation per index l rather than n.
pub fn spray_s<S: Real>(chart: &ChartSpec, x: &[S], y: &[S]) -> Result<Vec<S>> {
    let n = chart.dim;
    let g = metric_s(chart, x, y)?;
    let g_inv = linalg::invert(n, &g)?;

    let mut bracket = Vec::with_capacity(n);
    for l in 0..n {
        // Slot 0: x moves along y. Slot 1: y_l.
        let mut xs: Vec<Hd2<S>> = lift(x);
        let mut ys: Vec<Hd2<S>> = lift(y);
        for k in 0..n {
            xs[k].seed(0, y[k].clone());
        }
        ys[l].seed(1, S::one());
        let mixed = fsq_s(chart, &xs, &ys)?.coeff(3);

        let mut xs1: Vec<Hd1<S>> = lift(x);
        let ys1: Vec<Hd1<S>> = lift(y);
        xs1[l].seed(0, S::one());
        let direct = fsq_s(chart, &xs1, &ys1)?.coeff(1);

        bracket.push(mixed - direct);
    }

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = S::zero();
        for l in 0..n {
            acc = acc + g_inv[i * n + l].clone() * bracket[l].clone();
        }
        out.push(acc.scale(0.25));
    }
    Ok(out)
}

/// Nonlinear connection N^i_j = dG^i/dy^j, row-major.
pub fn nonlinear_s<S: Real>(chart: &ChartSpec, x: &[S], y: &[S]) -> Result<Vec<S>> {
    let n = chart.dim;
    let xs: Vec<Hd1<S>> = lift(x);
    let mut out = vec![S::zero(); n * n];
    for j in 0..n {
        let mut ys: Vec<Hd1<S>> = lift(y);
        ys[j].seed(0, S::one());
        let g = spray_s(chart, &xs, &ys)?;
        for i in 0..n {
            out[i * n + j] = g[i].coeff(1);
        }
    }
    Ok(out)
}

/// Spray data at a point in f64.
#[derive(Clone, Debug)]
pub struct SprayData {
    pub n: usize,
    pub g_spray: Vec<f64>,
    /// N^i_j, row-major.
    pub nonlinear: Vec<f64>,
}

pub fn spray_data(chart: &ChartSpec, x: &[f64], y: &[f64]) -> Result<SprayData> {
    Ok(SprayData {
        n: chart.dim,
        g_spray: spray_s(chart, x, y)?,
        nonlinear: nonlinear_s(chart, x, y)?,
    })
}

/// Berwald curvature, Landsberg curvature, mean Landsberg covector.
#[derive(Clone, Debug)]
pub struct BerwaldLandsbergData {
    pub n: usize,
    /// B^i_{jkl}, flat index ((i*n + j)*n + k)*n + l.
    pub berwald: Vec<f64>,
    /// L_{ijk} = -1/2 y_m B^m_{ijk}, flat index (i*n + j)*n + k.
    pub landsberg: Vec<f64>,
    /// J_i = g^{jk} L_{ijk}.
    pub mean_landsberg: Vec<f64>,
}

pub fn berwald_landsberg(
    chart: &ChartSpec,
    fund: &FundamentalData,
    x: &[f64],
    y: &[f64],
) -> Result<BerwaldLandsbergData> {
    let n = chart.dim;
    let mut b = vec![0.0; n * n * n * n];
    for j in 0..n {
        for k in j..n {
            for l in k..n {
                let xs: Vec<Hd3<f64>> = lift(x);
                let mut ys: Vec<Hd3<f64>> = lift(y);
                ys[j].seed(0, 1.0);
                ys[k].seed(1, 1.0);
                ys[l].seed(2, 1.0);
                let g = spray_s(chart, &xs, &ys)?;
                for (p, q, r) in [
                    (j, k, l),
                    (j, l, k),
                    (k, j, l),
                    (k, l, j),
                    (l, j, k),
                    (l, k, j),
                ] {
                    for i in 0..n {
                        b[((i * n + p) * n + q) * n + r] = g[i].coeff(7);
                    }
                }
            }
        }
    }
    let mut landsberg = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for m in 0..n {
                    acc += fund.y_low[m] * b[((m * n + i) * n + j) * n + k];
                }
                landsberg[(i * n + j) * n + k] = -0.5 * acc;
            }
        }
    }
    let mut mean_landsberg = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                mean_landsberg[i] += fund.g_inv[j * n + k] * landsberg[(i * n + j) * n + k];
            }
        }
    }
    Ok(BerwaldLandsbergData {
        n,
        berwald: b,
        landsberg,
        mean_landsberg,
    })
}

/// Metric-class flags decided from tensor magnitudes over a sample set.
#[derive(Clone, Debug)]
pub struct SprayClassification {
    pub riemannian: bool,
    pub berwald: bool,
    pub landsberg: bool,
    pub weak_landsberg: bool,
    pub max_cartan: f64,
    pub max_berwald: f64,
    pub max_landsberg: f64,
    pub max_mean_landsberg: f64,
    /// 1 + largest magnitude among g, N, G over the run; the zero threshold
    /// is 1e-8 times this.
    pub scale: f64,
    pub witness_cartan: Option<(Vec<f64>, Vec<f64>)>,
    pub witness_berwald: Option<(Vec<f64>, Vec<f64>)>,
}

pub const CLASSIFIER_TOLERANCE: f64 = 1e-8;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, c| m.max(c.abs()))
}

/// Classify from ≥ 50 samples spread over the domain. The threshold scale
/// is computed from the same run (largest tensor entry seen in g, N, G)
/// so the notion of "numerically zero" tracks the chart's own magnitude.
pub fn classify_spray(
    chart: &ChartSpec,
    samples: &[(Vec<f64>, Vec<f64>)],
) -> Result<SprayClassification> {
    let mut max_cartan = 0.0f64;
    let mut max_berwald = 0.0f64;
    let mut max_landsberg = 0.0f64;
    let mut max_mean = 0.0f64;
    let mut scale = 1.0f64;
    let mut witness_cartan = None;
    let mut witness_berwald = None;
    for (x, y) in samples {
        let fund = fundamental_data(chart, x, y)?;
        let tors = crate::fundamental::torsion_data(chart, &fund, x, y)?;
        let spray = spray_data(chart, x, y)?;
        let bl = berwald_landsberg(chart, &fund, x, y)?;
        scale = scale
            .max(max_abs(&fund.g))
            .max(max_abs(&spray.nonlinear))
            .max(max_abs(&spray.g_spray));
        let c = max_abs(&tors.c);
        if c > max_cartan {
            max_cartan = c;
            witness_cartan = Some((x.clone(), y.clone()));
        }
        let b = max_abs(&bl.berwald);
        if b > max_berwald {
            max_berwald = b;
            witness_berwald = Some((x.clone(), y.clone()));
        }
        max_landsberg = max_landsberg.max(max_abs(&bl.landsberg));
        max_mean = max_mean.max(max_abs(&bl.mean_landsberg));
    }
    let scale = 1.0 + scale;
    let thr = CLASSIFIER_TOLERANCE * scale;
    Ok(SprayClassification {
        riemannian: max_cartan <= thr,
        berwald: max_berwald <= thr,
        landsberg: max_landsberg <= thr,
        weak_landsberg: max_mean <= thr,
        max_cartan,
        max_berwald,
        max_landsberg,
        max_mean_landsberg: max_mean,
        scale,
        witness_cartan,
        witness_berwald,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{catalog, CatalogParams};
    use crate::fundamental::f_s;
    use crate::sample::sample_points;
    use approx::assert_relative_eq;

    #[test]
    fn flat_chart_has_zero_spray() {
        let chart = catalog("euclidean_randers", 2, &CatalogParams::default()).unwrap();
        let g = spray_s(&chart.spec, &[0.3, -0.2], &[1.0, 0.7]).unwrap();
        assert!(max_abs(&g) < 1e-12);
        let fund = fundamental_data(&chart.spec, &[0.3, -0.2], &[1.0, 0.7]).unwrap();
        let bl = berwald_landsberg(&chart.spec, &fund, &[0.3, -0.2], &[1.0, 0.7]).unwrap();
        assert!(max_abs(&bl.berwald) < 1e-12);
        assert!(max_abs(&bl.landsberg) < 1e-12);
    }

    #[test]
    fn riemannian_spray_matches_christoffel() {
        // For b = 0 the spray must be quadratic with the Christoffel
        // symbols of a(x), computed here independently from x-jets of a.
        let chart = catalog("riemannian_sphere", 2, &CatalogParams::default()).unwrap();
        let x = [0.4, -0.3];
        let y = [0.9, 1.2];
        let n = 2;
        // da[m][i][j] = d a_{ij} / d x^m
        let mut da = vec![0.0; n * n * n];
        for m in 0..n {
            let mut xs: Vec<Hd1<f64>> = lift(&x);
            xs[m].seed(0, 1.0);
            let a = chart.spec.eval_a(&xs).unwrap();
            for i in 0..n {
                for j in 0..n {
                    da[(m * n + i) * n + j] = a[i * n + j].coeff(1);
                }
            }
        }
        let a = chart.spec.eval_a::<f64>(&x).unwrap();
        let a_inv = linalg::invert(n, &a).unwrap();
        let mut gamma = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = 0.0;
                    for l in 0..n {
                        acc += a_inv[i * n + l]
                            * (da[(j * n + l) * n + k] + da[(k * n + j) * n + l]
                                - da[(l * n + j) * n + k]);
                    }
                    gamma[(i * n + j) * n + k] = 0.5 * acc;
                }
            }
        }
        let g = spray_s(&chart.spec, &x, &y).unwrap();
        for i in 0..n {
            let mut quad = 0.0;
            for j in 0..n {
                for k in 0..n {
                    quad += gamma[(i * n + j) * n + k] * y[j] * y[k];
                }
            }
            assert_relative_eq!(g[i], 0.5 * quad, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn funk_spray_is_half_f_times_y() {
        let chart = catalog("funk_ball", 2, &CatalogParams::default()).unwrap();
        for (x, y) in [
            ([0.3, -0.1], [1.0, 0.4]),
            ([0.0, 0.5], [-0.6, 1.1]),
            ([-0.4, -0.4], [0.2, -0.9]),
        ] {
            let f = f_s(&chart.spec, &x, &y).unwrap();
            let g = spray_s(&chart.spec, &x, &y).unwrap();
            for i in 0..2 {
                assert_relative_eq!(g[i], 0.5 * f * y[i], max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn spray_homogeneity_and_euler() {
        let chart = catalog("funk_ball", 3, &CatalogParams::default()).unwrap();
        let x = [0.2, -0.3, 0.25];
        let y = [0.8, 0.1, -0.5];
        let g1 = spray_s(&chart.spec, &x, &y).unwrap();
        let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        let g2 = spray_s(&chart.spec, &x, &y2).unwrap();
        for i in 0..3 {
            assert_relative_eq!(g2[i], 4.0 * g1[i], max_relative = 1e-10, epsilon = 1e-13);
        }
        let spray = spray_data(&chart.spec, &x, &y).unwrap();
        for i in 0..3 {
            let ny: f64 = (0..3).map(|j| spray.nonlinear[i * 3 + j] * y[j]).sum();
            assert_relative_eq!(ny, 2.0 * g1[i], max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn berwald_invariants_and_reconstruction_on_funk() {
        let chart = catalog("funk_ball", 2, &CatalogParams::default()).unwrap();
        let x = [0.25, 0.3];
        let y = [0.7, -1.1];
        let n = 2;
        let fund = fundamental_data(&chart.spec, &x, &y).unwrap();
        let bl = berwald_landsberg(&chart.spec, &fund, &x, &y).unwrap();
        let bmax = max_abs(&bl.berwald);
        assert!(bmax > 0.01, "funk chart must be non-Berwald, got {bmax}");
        // Symmetry in the lower indices and the Euler contraction By = 0.
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = bl.berwald[((i * n + j) * n + k) * n + l];
                        assert_relative_eq!(
                            v,
                            bl.berwald[((i * n + k) * n + j) * n + l],
                            max_relative = 1e-9,
                            epsilon = 1e-12
                        );
                        assert_relative_eq!(
                            v,
                            bl.berwald[((i * n + l) * n + k) * n + j],
                            max_relative = 1e-9,
                            epsilon = 1e-12
                        );
                    }
                    let by: f64 = (0..n)
                        .map(|m| bl.berwald[((i * n + j) * n + k) * n + m] * y[m])
                        .sum();
                    assert!(by.abs() < 1e-9 * (1.0 + bmax));
                }
            }
        }
        // L total symmetry, L y = 0, and the mean-value reconstruction
        // L_{ijk} = (J_i h_{jk} + J_j h_{ik} + J_k h_{ij}) / (n+1).
        let lmax = max_abs(&bl.landsberg);
        assert!(lmax > 1e-4);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = bl.landsberg[(i * n + j) * n + k];
                    assert_relative_eq!(
                        v,
                        bl.landsberg[(j * n + i) * n + k],
                        max_relative = 1e-9,
                        epsilon = 1e-12
                    );
                    assert_relative_eq!(
                        v,
                        bl.landsberg[(k * n + j) * n + i],
                        max_relative = 1e-9,
                        epsilon = 1e-12
                    );
                    let recon = (bl.mean_landsberg[i] * fund.h[j * n + k]
                        + bl.mean_landsberg[j] * fund.h[i * n + k]
                        + bl.mean_landsberg[k] * fund.h[i * n + j])
                        / (n as f64 + 1.0);
                    assert_relative_eq!(v, recon, max_relative = 1e-9, epsilon = 1e-11);
                }
                let ly: f64 = (0..n)
                    .map(|m| bl.landsberg[(i * n + j) * n + m] * y[m])
                    .sum();
                assert!(ly.abs() < 1e-9 * (1.0 + lmax));
            }
        }
    }

    #[test]
    fn mean_landsberg_is_zero_homogeneous() {
        let chart = catalog("funk_ball", 2, &CatalogParams::default()).unwrap();
        let x = [0.15, -0.4];
        let y = [0.6, 0.9];
        let fund1 = fundamental_data(&chart.spec, &x, &y).unwrap();
        let j1 = berwald_landsberg(&chart.spec, &fund1, &x, &y)
            .unwrap()
            .mean_landsberg;
        for lambda in [0.5, 2.0] {
            let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
            let fund = fundamental_data(&chart.spec, &x, &ys).unwrap();
            let jl = berwald_landsberg(&chart.spec, &fund, &x, &ys)
                .unwrap()
                .mean_landsberg;
            for (a, b) in j1.iter().zip(&jl) {
                assert_relative_eq!(a, b, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn parallel_product_is_berwald_not_riemannian() {
        let chart = catalog("parallel_beta_product", 3, &CatalogParams::default()).unwrap();
        let samples = sample_points(&chart.spec.domain, 3, 20, 7, 0.8);
        let cls = classify_spray(&chart.spec, &samples).unwrap();
        assert!(!cls.riemannian);
        assert!(cls.berwald, "max |B| = {}", cls.max_berwald);
        assert!(cls.landsberg);
        assert!(cls.weak_landsberg);
    }

    #[test]
    fn classification_of_remaining_catalog() {
        let euclid = catalog("euclidean_randers", 2, &CatalogParams::default()).unwrap();
        let samples = sample_points(&euclid.spec.domain, 2, 15, 3, 0.9);
        let cls = classify_spray(&euclid.spec, &samples).unwrap();
        assert!(!cls.riemannian && cls.berwald && cls.landsberg && cls.weak_landsberg);

        let sphere = catalog("riemannian_sphere", 2, &CatalogParams::default()).unwrap();
        let samples = sample_points(&sphere.spec.domain, 2, 15, 4, 0.7);
        let cls = classify_spray(&sphere.spec, &samples).unwrap();
        assert!(cls.riemannian && cls.berwald);

        let funk = catalog("funk_ball", 2, &CatalogParams::default()).unwrap();
        let samples = sample_points(&funk.spec.domain, 2, 15, 5, 0.7);
        let cls = classify_spray(&funk.spec, &samples).unwrap();
        assert!(!cls.riemannian && !cls.berwald && !cls.landsberg && !cls.weak_landsberg);
        assert!(cls.witness_berwald.is_some());
    }
}
