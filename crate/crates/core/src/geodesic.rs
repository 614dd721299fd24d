//! Geodesic integration, parallel transport along geodesics, and the
//! along-path traces of the mean Cartan and mean Landsberg torsions.
//!
//! Geodesics solve `x'' + 2 G(x, x') = 0`. Transport is horizontal with
//! respect to the connection of [`crate::curvature`]; along the geodesic's
//! own flow the contraction `Gs^i_jk x'^k` equals the nonlinear connection
//! `N^i_j` (an identity the connection tests verify), so the transport
//! equation is integrated in the cheaper form `V'^i + N^i_j(x, x') V^j = 0`.
//!
//! The integrator is an adaptive Dormand-Prince 4(5) pair that lands
//! exactly on the requested output grid, so no interpolation enters the
//! reported samples.

use crate::autodiff::{Hd1, Jet};
use crate::chart::ChartSpec;
use crate::error::{Error, Result};
use crate::fundamental::{f_s, fundamental_data, torsion_data};
use crate::spray::{berwald_landsberg, spray_s};

fn lift(v: &[f64]) -> Vec<Hd1<f64>> {
    v.iter().map(|&c| <Hd1<f64> as Jet<f64>>::constant(c)).collect()
}

/// Spray coefficients and nonlinear connection in one pass: the primal part
/// of the first y-seeded evaluation already carries G^i.
fn spray_and_nonlinear(chart: &ChartSpec, x: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = chart.dim;
    let mut g0 = vec![0.0; n];
    let mut nmat = vec![0.0; n * n];
    for j in 0..n {
        let xs = lift(x);
        let mut ys = lift(v);
        ys[j].seed(0, 1.0);
        let g = spray_s(chart, &xs, &ys)?;
        for i in 0..n {
            nmat[i * n + j] = g[i].coeff(1);
        }
        if j == 0 {
            for i in 0..n {
                g0[i] = g[i].coeff(0);
            }
        }
    }
    Ok((g0, nmat))
}

/// Integration controls. `t_end` may be negative for backward runs.
#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    pub t_end: f64,
    /// Output grid spacing (always positive; the sign comes from `t_end`).
    pub dt_out: f64,
    pub rel_tol: f64,
    /// Rescale the initial direction so F(x0, y0) = 1.
    pub unit_speed: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            t_end: 3.0,
            dt_out: 0.02,
            rel_tol: 1e-10,
            unit_speed: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PathSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// A geodesic run: samples on the output grid plus integrator statistics.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub n: usize,
    pub samples: Vec<PathSample>,
    pub steps: usize,
    /// Largest accepted scaled local error estimate (1.0 is the acceptance
    /// threshold).
    pub max_local_error: f64,
    /// True when the path left the chart domain and was truncated there.
    pub exited: bool,
    pub opts: IntegrateOptions,
}

#[derive(Clone, Debug)]
pub struct FrameSample {
    pub t: f64,
    pub vec: Vec<f64>,
}

/// A vector field transported along a geodesic.
#[derive(Clone, Debug)]
pub struct TransportedFrame {
    pub samples: Vec<FrameSample>,
    /// max_t |g(V,V)(t) - g(V,V)(0)| / (1 + |g(V,V)(0)|).
    pub g_drift: f64,
}

struct RunData {
    ts: Vec<f64>,
    zs: Vec<Vec<f64>>,
    steps: usize,
    max_err: f64,
    exited: bool,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One embedded step from z with size h; returns the 5th-order state and a
/// scaled error estimate (<= 1 means acceptable).
fn attempt<R: FnMut(&[f64]) -> Result<Vec<f64>>>(
    rhs: &mut R,
    z: &[f64],
    h: f64,
    rel_tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let dim = z.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    for s in 0..7 {
        let mut zs = z.to_vec();
        for (j, kj) in k.iter().enumerate() {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..dim {
                    zs[i] += h * a * kj[i];
                }
            }
        }
        let _ = C[s];
        k.push(rhs(&zs)?);
    }
    let mut z5 = z.to_vec();
    let mut err2 = 0.0;
    for i in 0..dim {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        z5[i] += h * d5;
        let e = h * (d5 - d4);
        let sc = 1e-12 + rel_tol * z[i].abs().max(z5[i].abs());
        err2 += (e / sc) * (e / sc);
    }
    Ok((z5, (err2 / dim as f64).sqrt()))
}

/// Adaptive driver from t = 0 to t_end (either sign), emitting samples on
/// the uniform grid and truncating at the domain boundary by bisection on
/// the step fraction.
fn drive<R, I>(
    mut rhs: R,
    inside: I,
    z0: Vec<f64>,
    t_end: f64,
    dt_out: f64,
    rel_tol: f64,
) -> Result<RunData>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>>,
    I: Fn(&[f64]) -> bool,
{
    if !(dt_out > 0.0) || !t_end.is_finite() || t_end == 0.0 {
        return Err(Error::Config(
            "integration span and output spacing must be nonzero".into(),
        ));
    }
    if !inside(&z0) {
        return Err(Error::Config("initial point outside chart domain".into()));
    }
    let dir = t_end.signum();
    let dt = dt_out * dir;
    let mut ts = vec![0.0];
    let mut zs = vec![z0.clone()];
    let mut t = 0.0;
    let mut z = z0;
    let mut k_out = 1u64;
    let mut h = dt_out.min(0.01) * dir;
    let mut steps = 0usize;
    let mut max_err = 0.0f64;
    let mut exited = false;

    'outer: loop {
        let grid = (k_out as f64) * dt;
        let t_target = if (grid - t_end) * dir > 0.0 { t_end } else { grid };
        // advance to t_target, possibly in several internal steps
        while (t_target - t) * dir > 1e-13 {
            let remaining = t_target - t;
            let mut h_try = if h.abs() > remaining.abs() { remaining } else { h };
            loop {
                match attempt(&mut rhs, &z, h_try, rel_tol) {
                    Ok((z_new, err)) if err <= 1.0 => {
                        steps += 1;
                        max_err = max_err.max(err);
                        if !inside(&z_new) {
                            // bisect the step fraction to land on the boundary
                            let mut lo = 0.0f64;
                            let mut hi = 1.0f64;
                            for _ in 0..80 {
                                let mid = 0.5 * (lo + hi);
                                let (zm, _) = attempt(&mut rhs, &z, mid * h_try, rel_tol)?;
                                if inside(&zm) {
                                    lo = mid;
                                } else {
                                    hi = mid;
                                }
                            }
                            let (z_exit, _) = attempt(&mut rhs, &z, lo * h_try, rel_tol)?;
                            t += lo * h_try;
                            z = z_exit;
                            ts.push(t);
                            zs.push(z.clone());
                            exited = true;
                            break 'outer;
                        }
                        t += h_try;
                        z = z_new;
                        let fac = if err > 1e-30 {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                        } else {
                            5.0
                        };
                        h = h_try * fac;
                        break;
                    }
                    Ok((_, err)) => {
                        steps += 1;
                        h_try *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                        if h_try.abs() < 1e-13 {
                            return Err(Error::Eval("step size underflow".into()));
                        }
                    }
                    Err(_) => {
                        h_try *= 0.5;
                        if h_try.abs() < 1e-13 {
                            return Err(Error::Eval(
                                "step size underflow at evaluation failure".into(),
                            ));
                        }
                    }
                }
            }
        }
        ts.push(t_target);
        zs.push(z.clone());
        t = t_target;
        if (t_target - t_end).abs() < 1e-13 {
            break;
        }
        k_out += 1;
    }
    Ok(RunData {
        ts,
        zs,
        steps,
        max_err,
        exited,
    })
}

/// Integrate the geodesic from (x0, y0).
pub fn integrate_geodesic(
    chart: &ChartSpec,
    x0: &[f64],
    y0: &[f64],
    opts: &IntegrateOptions,
) -> Result<GeodesicPath> {
    let n = chart.dim;
    if x0.len() != n || y0.len() != n {
        return Err(Error::Dimension(format!(
            "expected point and direction of length {n}"
        )));
    }
    let mut v0 = y0.to_vec();
    if opts.unit_speed {
        let f = f_s(chart, x0, y0)?;
        for c in v0.iter_mut() {
            *c /= f;
        }
    }
    let mut z0 = x0.to_vec();
    z0.extend_from_slice(&v0);
    let rhs = |z: &[f64]| -> Result<Vec<f64>> {
        let (x, v) = z.split_at(n);
        let g = spray_s(chart, x, v)?;
        let mut dz = v.to_vec();
        dz.extend(g.iter().map(|gi| -2.0 * gi));
        Ok(dz)
    };
    let inside = |z: &[f64]| chart.domain.contains(&z[..n]);
    let run = drive(rhs, inside, z0, opts.t_end, opts.dt_out, opts.rel_tol)?;
    let samples = run
        .ts
        .iter()
        .zip(&run.zs)
        .map(|(&t, z)| PathSample {
            t,
            x: z[..n].to_vec(),
            v: z[n..].to_vec(),
        })
        .collect();
    Ok(GeodesicPath {
        n,
        samples,
        steps: run.steps,
        max_local_error: run.max_err,
        exited: run.exited,
        opts: opts.clone(),
    })
}

/// Integrate the geodesic and the transported vector jointly, so the two
/// sample grids coincide exactly.
pub fn transport_run(
    chart: &ChartSpec,
    x0: &[f64],
    y0: &[f64],
    v0: &[f64],
    opts: &IntegrateOptions,
) -> Result<(GeodesicPath, TransportedFrame)> {
    let n = chart.dim;
    if x0.len() != n || y0.len() != n || v0.len() != n {
        return Err(Error::Dimension(format!(
            "expected point, direction and vector of length {n}"
        )));
    }
    let mut dir0 = y0.to_vec();
    if opts.unit_speed {
        let f = f_s(chart, x0, y0)?;
        for c in dir0.iter_mut() {
            *c /= f;
        }
    }
    let mut z0 = x0.to_vec();
    z0.extend_from_slice(&dir0);
    z0.extend_from_slice(v0);
    let rhs = |z: &[f64]| -> Result<Vec<f64>> {
        let (x, rest) = z.split_at(n);
        let (v, w) = rest.split_at(n);
        let (g, nmat) = spray_and_nonlinear(chart, x, v)?;
        let mut dz = v.to_vec();
        dz.extend(g.iter().map(|gi| -2.0 * gi));
        for i in 0..n {
            let mut dv = 0.0;
            for j in 0..n {
                dv -= nmat[i * n + j] * w[j];
            }
            dz.push(dv);
        }
        Ok(dz)
    };
    let inside = |z: &[f64]| chart.domain.contains(&z[..n]);
    let run = drive(rhs, inside, z0, opts.t_end, opts.dt_out, opts.rel_tol)?;

    let mut samples = Vec::with_capacity(run.ts.len());
    let mut frame = Vec::with_capacity(run.ts.len());
    for (&t, z) in run.ts.iter().zip(&run.zs) {
        samples.push(PathSample {
            t,
            x: z[..n].to_vec(),
            v: z[n..2 * n].to_vec(),
        });
        frame.push(FrameSample {
            t,
            vec: z[2 * n..].to_vec(),
        });
    }

    let mut g_drift: f64 = 0.0;
    let mut g0 = 0.0;
    for (idx, (s, fr)) in samples.iter().zip(&frame).enumerate() {
        let fund = fundamental_data(chart, &s.x, &s.v)?;
        let mut gvv = 0.0;
        for i in 0..n {
            for j in 0..n {
                gvv += fund.g[i * n + j] * fr.vec[i] * fr.vec[j];
            }
        }
        if idx == 0 {
            g0 = gvv;
        } else {
            g_drift = g_drift.max((gvv - g0).abs() / (1.0 + g0.abs()));
        }
    }

    Ok((
        GeodesicPath {
            n,
            samples,
            steps: run.steps,
            max_local_error: run.max_err,
            exited: run.exited,
            opts: opts.clone(),
        },
        TransportedFrame {
            samples: frame,
            g_drift,
        },
    ))
}

/// Transport v0 along an existing path by re-running the joint system with
/// the path's own initial data and options.
pub fn parallel_transport(
    chart: &ChartSpec,
    path: &GeodesicPath,
    v0: &[f64],
) -> Result<TransportedFrame> {
    let first = path
        .samples
        .first()
        .ok_or_else(|| Error::Config("empty geodesic path".into()))?;
    let mut opts = path.opts.clone();
    // the path's direction sample is already normalized
    opts.unit_speed = false;
    let (_, frame) = transport_run(chart, &first.x, &first.v, v0, &opts)?;
    Ok(frame)
}

/// Along-path traces of the mean torsions applied to the transported
/// vector, plus the invariants used by the drift checks.
#[derive(Clone, Debug)]
pub struct TraceSeries {
    pub t: Vec<f64>,
    /// I(t): mean Cartan torsion at (x, x') applied to V.
    pub i_trace: Vec<f64>,
    /// J(t): mean Landsberg curvature at (x, x') applied to V.
    pub j_trace: Vec<f64>,
    /// g_{x'}(V, V).
    pub g_vv: Vec<f64>,
    /// F(x, V), constant under transport on Berwald charts.
    pub f_v: Vec<f64>,
}

pub fn trace_series(
    chart: &ChartSpec,
    path: &GeodesicPath,
    frame: &TransportedFrame,
) -> Result<TraceSeries> {
    let n = chart.dim;
    let len = path.samples.len().min(frame.samples.len());
    let mut t = Vec::with_capacity(len);
    let mut i_trace = Vec::with_capacity(len);
    let mut j_trace = Vec::with_capacity(len);
    let mut g_vv = Vec::with_capacity(len);
    let mut f_v = Vec::with_capacity(len);
    for idx in 0..len {
        let s = &path.samples[idx];
        let fr = &frame.samples[idx];
        if (s.t - fr.t).abs() > 1e-9 {
            return Err(Error::Config(
                "path and frame sample grids do not match".into(),
            ));
        }
        let fund = fundamental_data(chart, &s.x, &s.v)?;
        let tors = torsion_data(chart, &fund, &s.x, &s.v)?;
        let bl = berwald_landsberg(chart, &fund, &s.x, &s.v)?;
        let mut iv = 0.0;
        let mut jv = 0.0;
        let mut gvv = 0.0;
        for i in 0..n {
            iv += tors.i_low[i] * fr.vec[i];
            jv += bl.mean_landsberg[i] * fr.vec[i];
            for j in 0..n {
                gvv += fund.g[i * n + j] * fr.vec[i] * fr.vec[j];
            }
        }
        t.push(s.t);
        i_trace.push(iv);
        j_trace.push(jv);
        g_vv.push(gvv);
        f_v.push(f_s(chart, &s.x, &fr.vec)?);
    }
    Ok(TraceSeries {
        t,
        i_trace,
        j_trace,
        g_vv,
        f_v,
    })
}

/// Least-squares check of the linear evolution law I(t) = t J(0) + I(0).
///
/// The law presupposes that J is constant along the path; that hypothesis
/// is measured, and the check is applicable only when it holds.
#[derive(Clone, Debug)]
pub struct LinearLawReport {
    pub applicable: bool,
    /// max_t |J(t) - J(0)|.
    pub j_spread: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Largest pointwise deviation of I(t) from the fitted line.
    pub residual: f64,
    pub i0: f64,
    pub j0: f64,
}

pub fn linear_law_check(trace: &TraceSeries, hypothesis_tol: f64) -> LinearLawReport {
    let m = trace.t.len() as f64;
    let j0 = trace.j_trace.first().copied().unwrap_or(0.0);
    let i0 = trace.i_trace.first().copied().unwrap_or(0.0);
    let j_spread = trace
        .j_trace
        .iter()
        .fold(0.0f64, |acc, &j| acc.max((j - j0).abs()));
    let (mut st, mut si, mut stt, mut sti) = (0.0, 0.0, 0.0, 0.0);
    for (&t, &i) in trace.t.iter().zip(&trace.i_trace) {
        st += t;
        si += i;
        stt += t * t;
        sti += t * i;
    }
    let det = m * stt - st * st;
    let (slope, intercept) = if det.abs() > 1e-300 {
        ((m * sti - st * si) / det, (stt * si - st * sti) / det)
    } else {
        (0.0, i0)
    };
    let mut residual: f64 = 0.0;
    for (&t, &i) in trace.t.iter().zip(&trace.i_trace) {
        residual = residual.max((i - slope * t - intercept).abs());
    }
    LinearLawReport {
        applicable: j_spread <= hypothesis_tol,
        j_spread,
        slope,
        intercept,
        residual,
        i0,
        j0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{catalog, CatalogParams};

    fn chart_of(name: &str, dim: usize) -> crate::chart::CatalogChart {
        catalog(name, dim, &CatalogParams::default()).unwrap()
    }

    #[test]
    fn flat_chart_runs_straight() {
        let cc = chart_of("euclidean_randers", 2);
        let x0 = vec![0.1, -0.2];
        let y0 = vec![0.6, 0.3];
        let opts = IntegrateOptions {
            unit_speed: false,
            t_end: 1.0,
            ..Default::default()
        };
        let path = integrate_geodesic(&cc.spec, &x0, &y0, &opts).unwrap();
        assert!(!path.exited);
        for s in &path.samples {
            for i in 0..2 {
                assert!((s.x[i] - (x0[i] + s.t * y0[i])).abs() < 1e-10);
                assert!((s.v[i] - y0[i]).abs() < 1e-12);
            }
        }
        let (_, frame) = transport_run(&cc.spec, &x0, &y0, &[0.3, 0.9], &opts).unwrap();
        for fr in &frame.samples {
            assert!((fr.vec[0] - 0.3).abs() < 1e-12);
            assert!((fr.vec[1] - 0.9).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_equator_closes_after_full_period() {
        let cc = chart_of("riemannian_sphere", 2);
        let opts = IntegrateOptions {
            t_end: 2.0 * std::f64::consts::PI,
            ..Default::default()
        };
        let path =
            integrate_geodesic(&cc.spec, &cc.basepoint, &cc.base_direction, &opts).unwrap();
        assert!(!path.exited);
        let last = path.samples.last().unwrap();
        assert!((last.x[0] - 1.0).abs() < 1e-6, "x0 {}", last.x[0]);
        assert!(last.x[1].abs() < 1e-6, "x1 {}", last.x[1]);
        // halfway round sits at the antipodal chart point
        let mid = path
            .samples
            .iter()
            .min_by(|a, b| {
                let da = (a.t - std::f64::consts::PI).abs();
                let db = (b.t - std::f64::consts::PI).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        assert!((mid.x[0] + 1.0).abs() < 1e-4);
    }

    #[test]
    fn funk_radial_geodesic_matches_closed_form() {
        let cc = chart_of("funk_ball", 2);
        let opts = IntegrateOptions::default();
        let path = integrate_geodesic(&cc.spec, &[0.0, 0.0], &[1.0, 0.0], &opts).unwrap();
        assert!(!path.exited);
        let f0 = f_s(&cc.spec, &path.samples[0].x, &path.samples[0].v).unwrap();
        for s in &path.samples {
            let r = (s.x[0] * s.x[0] + s.x[1] * s.x[1]).sqrt();
            assert!(
                (r - (1.0 - (-s.t).exp())).abs() < 1e-8,
                "radius {} at t {}",
                r,
                s.t
            );
            let f = f_s(&cc.spec, &s.x, &s.v).unwrap();
            assert!((f - f0).abs() < 1e-8 * f0);
        }
    }

    #[test]
    fn domain_exit_truncates_with_flag() {
        let cc = chart_of("funk_ball", 2);
        let opts = IntegrateOptions::default();
        let path = integrate_geodesic(&cc.spec, &[0.5, 0.0], &[1.0, 0.0], &opts).unwrap();
        assert!(path.exited);
        let last = path.samples.last().unwrap();
        // exit radius 0.96 at t = ln((1 - 0.5) / (1 - 0.96))
        let t_exit = (0.5f64 / 0.04).ln();
        assert!((last.t - t_exit).abs() < 1e-6, "exit time {}", last.t);
        let r = (last.x[0] * last.x[0] + last.x[1] * last.x[1]).sqrt();
        assert!((r - 0.96).abs() < 1e-9);
        assert!(last.t < opts.t_end);
    }

    #[test]
    fn transport_preserves_metric_pairing_and_scales_linearly() {
        let cc = chart_of("funk_ball", 2);
        let opts = IntegrateOptions::default();
        let v0 = vec![0.2, 1.0];
        let (path, frame) =
            transport_run(&cc.spec, &[0.1, -0.2], &[0.8, 0.45], &v0, &opts).unwrap();
        assert!(!path.exited);
        assert!(frame.g_drift < 1e-8 * opts.t_end, "drift {}", frame.g_drift);
        let v0_doubled: Vec<f64> = v0.iter().map(|c| 2.0 * c).collect();
        let (_, frame2) =
            transport_run(&cc.spec, &[0.1, -0.2], &[0.8, 0.45], &v0_doubled, &opts).unwrap();
        for (a, b) in frame.samples.iter().zip(&frame2.samples) {
            for i in 0..2 {
                let d = (b.vec[i] - 2.0 * a.vec[i]).abs();
                assert!(d < 1e-9 * (1.0 + b.vec[i].abs()));
            }
        }
    }

    #[test]
    fn reversal_returns_initial_frame() {
        let cc = chart_of("funk_ball", 2);
        let opts = IntegrateOptions {
            t_end: 1.5,
            ..Default::default()
        };
        let x0 = [0.05, 0.1];
        let y0 = [0.9, -0.3];
        let v0 = [0.4, 0.8];
        let (path, frame) = transport_run(&cc.spec, &x0, &y0, &v0, &opts).unwrap();
        let last_p = path.samples.last().unwrap();
        let last_f = frame.samples.last().unwrap();
        let back_opts = IntegrateOptions {
            t_end: -1.5,
            unit_speed: false,
            ..Default::default()
        };
        let (bpath, bframe) =
            transport_run(&cc.spec, &last_p.x, &last_p.v, &last_f.vec, &back_opts).unwrap();
        let home_p = bpath.samples.last().unwrap();
        let home_f = bframe.samples.last().unwrap();
        let f0 = f_s(&cc.spec, &x0, &y0).unwrap();
        for i in 0..2 {
            assert!((home_p.x[i] - x0[i]).abs() < 1e-7);
            assert!((home_p.v[i] - y0[i] / f0).abs() < 1e-7);
            assert!((home_f.vec[i] - v0[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn berwald_chart_traces_are_static() {
        let cc = chart_of("parallel_beta_product", 3);
        let opts = IntegrateOptions::default();
        let v0 = vec![0.3, -0.2, 0.9];
        let (path, frame) =
            transport_run(&cc.spec, &cc.basepoint, &cc.base_direction, &v0, &opts).unwrap();
        assert!(!path.exited, "left the box early");
        let trace = trace_series(&cc.spec, &path, &frame).unwrap();
        for idx in 0..trace.t.len() {
            assert!(trace.j_trace[idx].abs() < 1e-8);
            assert!((trace.i_trace[idx] - trace.i_trace[0]).abs() < 1e-7);
            assert!((trace.f_v[idx] - trace.f_v[0]).abs() < 1e-8 * (1.0 + trace.f_v[0]));
        }
        let law = linear_law_check(&trace, 1e-8);
        assert!(law.applicable);
        assert!(law.slope.abs() < 1e-7);
        assert!((law.intercept - trace.i_trace[0]).abs() < 1e-7);
        assert!(law.residual < 1e-7);
    }

    #[test]
    fn funk_traces_obey_kinematic_identity_but_not_linear_law() {
        let cc = chart_of("funk_ball", 2);
        let opts = IntegrateOptions::default();
        let (path, frame) =
            transport_run(&cc.spec, &[0.1, 0.05], &[1.0, 0.4], &[-0.3, 1.0], &opts).unwrap();
        let trace = trace_series(&cc.spec, &path, &frame).unwrap();
        let m = trace.t.len();
        for idx in 1..m - 1 {
            let t = trace.t[idx];
            if t < 0.2 || t > opts.t_end - 0.2 {
                continue;
            }
            let di = (trace.i_trace[idx + 1] - trace.i_trace[idx - 1])
                / (trace.t[idx + 1] - trace.t[idx - 1]);
            assert!(
                (di - trace.j_trace[idx]).abs() < 1e-4,
                "dI/dt {} vs J {} at t {}",
                di,
                trace.j_trace[idx],
                t
            );
        }
        let law = linear_law_check(&trace, 1e-8);
        assert!(!law.applicable, "J spread {}", law.j_spread);
        assert!(law.j_spread > 1e-4);
    }

    #[test]
    fn riemannian_traces_vanish() {
        let cc = chart_of("riemannian_sphere", 2);
        let opts = IntegrateOptions {
            t_end: 2.0,
            ..Default::default()
        };
        let (path, frame) =
            transport_run(&cc.spec, &cc.basepoint, &cc.base_direction, &[0.5, 0.7], &opts)
                .unwrap();
        let trace = trace_series(&cc.spec, &path, &frame).unwrap();
        for idx in 0..trace.t.len() {
            assert!(trace.i_trace[idx].abs() < 1e-10);
            assert!(trace.j_trace[idx].abs() < 1e-10);
        }
        assert!(frame.g_drift < 1e-8 * opts.t_end);
        let law = linear_law_check(&trace, 1e-8);
        assert!(law.applicable);
        assert!(law.slope.abs() < 1e-10 && law.intercept.abs() < 1e-10);
    }

    #[test]
    fn parallel_transport_follows_existing_path() {
        let cc = chart_of("funk_ball", 2);
        let opts = IntegrateOptions {
            t_end: 1.0,
            ..Default::default()
        };
        let path = integrate_geodesic(&cc.spec, &[0.0, 0.1], &[0.7, 0.2], &opts).unwrap();
        let frame = parallel_transport(&cc.spec, &path, &[1.0, 0.0]).unwrap();
        assert_eq!(frame.samples.len(), path.samples.len());
        assert!(frame.g_drift < 1e-8);
    }
}
