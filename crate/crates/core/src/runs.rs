//! Run drivers behind the command-line interface: tensor surveys,
//! classification, geodesic transport runs, and the full verification
//! sweep. Each driver resolves a chart, samples it deterministically, and
//! returns a [`Report`].
//!
//! Sample loops run in parallel; results are collected in sample order so
//! a fixed seed always produces the same report bytes.

use crate::autodiff::{fd_partial, mixed_partial, FdConfig, JetBudget, MultiIndex};
use crate::chart::{catalog, validate_chart, CatalogParams, ChartSpec, Domain};
use crate::conventions::HH_BRIDGE_SIGN;
use crate::curvature::{
    adjusted_ricci, curvature_data, flag_curvature, gamma_star_s, hh_curvature, max_abs,
    rel_residual, scalar_flag_check, three_index_curvature,
};
use crate::error::{Error, Result};
use crate::fundamental::{
    f_s, fundamental_data, global_norm_bound, mean_cartan_norm, randers_norm_bound, torsion_data,
    FsqField,
};
use crate::geodesic::{
    linear_law_check, trace_series, transport_run, GeodesicPath, IntegrateOptions, TraceSeries,
    TransportedFrame,
};
use crate::report::{
    apply_overrides, default_tolerances, CheckRecord, Report, Status, Witness,
};
use crate::sample::{sample_points, Rng};
use crate::spray::{
    berwald_landsberg, classify_spray, spray_data, CLASSIFIER_TOLERANCE,
};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Where the chart comes from.
#[derive(Clone, Debug)]
pub enum ChartSource {
    Catalog(String),
    File(PathBuf),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub source: ChartSource,
    /// Dimension for catalog charts; must match the file for file charts.
    pub dim: Option<usize>,
    pub params: CatalogParams,
    pub samples: usize,
    pub seed: u64,
    /// `NAME=VALUE` tolerance overrides.
    pub tol_overrides: Vec<String>,
    /// Geodesic integration span.
    pub t_end: f64,
    /// Fraction of the domain sampled, measured from its center; the margin
    /// keeps curvature stacks away from boundary blow-up.
    pub shrink: f64,
}

impl RunConfig {
    pub fn new(source: ChartSource) -> RunConfig {
        RunConfig {
            source,
            dim: None,
            params: CatalogParams::default(),
            samples: 50,
            seed: 42,
            tol_overrides: Vec::new(),
            t_end: 3.0,
            shrink: 0.7,
        }
    }
}

/// A chart ready to run: spec plus the distinguished geodesic data.
pub struct ResolvedChart {
    pub name: String,
    pub spec: ChartSpec,
    pub basepoint: Vec<f64>,
    pub base_direction: Vec<f64>,
    /// Present for file charts, which are validated before use.
    pub validation: Option<crate::chart::ValidationReport>,
}

fn domain_center(domain: &Domain, dim: usize) -> Vec<f64> {
    match domain {
        Domain::Ball { .. } => vec![0.0; dim],
        Domain::Box { bounds } => bounds.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect(),
    }
}

pub fn resolve_chart(config: &RunConfig) -> Result<ResolvedChart> {
    match &config.source {
        ChartSource::Catalog(name) => {
            let dim = config.dim.unwrap_or(2);
            let cc = catalog(name, dim, &config.params)?;
            Ok(ResolvedChart {
                name: cc.name,
                spec: cc.spec,
                basepoint: cc.basepoint,
                base_direction: cc.base_direction,
                validation: None,
            })
        }
        ChartSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::ChartInvalid(format!("cannot read chart file {}: {e}", path.display()))
            })?;
            let spec = ChartSpec::from_json(&text)?;
            if let Some(d) = config.dim {
                if d != spec.dim {
                    return Err(Error::Config(format!(
                        "requested dimension {d} but the chart file declares {}",
                        spec.dim
                    )));
                }
            }
            let count = config.samples.max(25);
            let pts: Vec<Vec<f64>> =
                sample_points(&spec.domain, spec.dim, count, config.seed, 0.995)
                    .into_iter()
                    .map(|(x, _)| x)
                    .collect();
            let validation = validate_chart(&spec, &pts);
            if !validation.pass() {
                let f = &validation.failures[0];
                return Err(Error::ChartInvalid(format!(
                    "chart file {}: {} at sample {:?} ({} of {} samples failed)",
                    path.display(),
                    f.message,
                    f.point,
                    validation.failures.len(),
                    validation.samples_checked
                )));
            }
            let basepoint = domain_center(&spec.domain, spec.dim);
            let mut dir = vec![0.0; spec.dim];
            dir[0] = 1.0;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "chart".into());
            Ok(ResolvedChart {
                name,
                spec,
                basepoint,
                base_direction: dir,
                validation: Some(validation),
            })
        }
    }
}

fn fact<T: Serialize>(facts: &mut BTreeMap<String, serde_json::Value>, key: &str, value: T) {
    facts.insert(
        key.to_string(),
        serde_json::to_value(value).expect("fact serialization"),
    );
}

/// All per-sample residuals and magnitudes the surveys aggregate.
struct SampleStack {
    inv_res: f64,
    matsumoto: f64,
    reducibility: f64,
    landsberg_rec: f64,
    compat: f64,
    hh_asym: f64,
    bridge: f64,
    contraction: f64,
    fitted_k: f64,
    flag_spread: f64,
    max_g: f64,
    max_c: f64,
    max_i: f64,
    max_b: f64,
    max_l: f64,
    max_j: f64,
    max_nl: f64,
    max_gs: f64,
    max_r: f64,
    max_hh: f64,
    max_adj: f64,
    max_rows: f64,
}

fn sample_stack(
    spec: &ChartSpec,
    x: &[f64],
    y: &[f64],
    flag_dirs: Option<&[Vec<f64>]>,
) -> Result<SampleStack> {
    let n = spec.dim;
    let nn = n * n;
    let fund = fundamental_data(spec, x, y)?;
    let fsq = fund.f * fund.f;

    let mut gyy = 0.0;
    let mut elly = 0.0;
    let mut hy = vec![0.0; n];
    for i in 0..n {
        elly += fund.ell[i] * y[i];
        for j in 0..n {
            gyy += fund.g[i * n + j] * y[i] * y[j];
            hy[i] += fund.h[i * n + j] * y[j];
        }
    }
    let inv_res = (gyy - fsq)
        .abs()
        .max((elly - fund.f).abs())
        .max(max_abs(&hy))
        / (1.0 + fsq);

    let tors = torsion_data(spec, &fund, x, y)?;
    let inv_np1 = 1.0 / (n as f64 + 1.0);
    let mut reduced = vec![0.0; n * nn];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                reduced[i * nn + j * n + k] = inv_np1
                    * (tors.i_low[i] * fund.h[j * n + k]
                        + tors.i_low[j] * fund.h[i * n + k]
                        + tors.i_low[k] * fund.h[i * n + j]);
            }
        }
    }
    let matsumoto = max_abs(&tors.m) / (1.0 + max_abs(&tors.c));
    let reducibility = rel_residual(&tors.c, &reduced);

    let bl = berwald_landsberg(spec, &fund, x, y)?;
    let mut lrec = vec![0.0; n * nn];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                lrec[i * nn + j * n + k] = inv_np1
                    * (bl.mean_landsberg[i] * fund.h[j * n + k]
                        + bl.mean_landsberg[j] * fund.h[i * n + k]
                        + bl.mean_landsberg[k] * fund.h[i * n + j]);
            }
        }
    }
    let landsberg_rec = rel_residual(&bl.landsberg, &lrec);

    let spray = spray_data(spec, x, y)?;
    let gamma: Vec<f64> = gamma_star_s(spec, x, y)?;
    let mut compat: f64 = 0.0;
    for i in 0..n {
        let mut double = 0.0;
        for j in 0..n {
            let mut single = 0.0;
            for k in 0..n {
                single += gamma[i * nn + j * n + k] * y[k];
            }
            compat = compat.max((single - spray.nonlinear[i * n + j]).abs());
            double += single * y[j];
        }
        compat = compat.max((double - 2.0 * spray.g_spray[i]).abs());
    }
    compat /= 1.0 + max_abs(&spray.nonlinear).max(max_abs(&spray.g_spray));

    let curv = curvature_data(spec, &fund, x, y)?;
    let hh = hh_curvature(spec, &fund, &tors, x, y)?;
    let mut hh_asym: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                for l in 0..n {
                    hh_asym = hh_asym.max(
                        (hh.hh[((j * n + i) * n + k) * n + l]
                            + hh.hh[((j * n + i) * n + l) * n + k])
                            .abs(),
                    );
                }
            }
        }
    }
    hh_asym /= 1.0 + max_abs(&hh.hh);

    let mut contracted = vec![0.0; nn];
    for i in 0..n {
        for k in 0..n {
            let mut v = 0.0;
            for j in 0..n {
                for l in 0..n {
                    v += y[j] * hh.lowered[((j * n + i) * n + k) * n + l] * y[l];
                }
            }
            contracted[i * n + k] = HH_BRIDGE_SIGN * v;
        }
    }
    let bridge = rel_residual(&contracted, &curv.riemann_low);

    let adj = adjusted_ricci(spec, &fund, &tors, x, y)?;
    let three = three_index_curvature(spec, &fund, x, y)?;
    let pt_scale = 1.0 + max_abs(&adj.adjusted);
    let mut contraction: f64 = 0.0;
    for i in 0..n {
        contraction = contraction.max((adj.y_adjusted[i] - adj.r0[i]).abs());
        let mut corr = tors.i_low[i] * adj.r00;
        for m in 0..n {
            corr += 2.0 * tors.i_up[m] * three.ri0k[m * n + i];
        }
        let expect = adj.ri0[i] - inv_np1 * corr;
        contraction = contraction.max((adj.adjusted_y[i] - expect).abs());
    }
    contraction /= pt_scale;

    let mut flag_spread = 0.0;
    if let Some(dirs) = flag_dirs {
        let mut vals = Vec::with_capacity(dirs.len());
        for v in dirs {
            match flag_curvature(&fund, &curv, v) {
                Ok(kv) => vals.push(kv),
                Err(Error::DegenerateFlag(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if vals.len() >= 2 {
            let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for &v in &vals {
                lo = lo.min(v);
                hi = hi.max(v);
                sum += v;
            }
            let mean = sum / vals.len() as f64;
            flag_spread = (hi - lo) / (1.0 + mean.abs());
        }
    }

    Ok(SampleStack {
        inv_res,
        matsumoto,
        reducibility,
        landsberg_rec,
        compat,
        hh_asym,
        bridge,
        contraction,
        fitted_k: curv.fitted_k,
        flag_spread,
        max_g: max_abs(&fund.g),
        max_c: max_abs(&tors.c),
        max_i: max_abs(&tors.i_low),
        max_b: max_abs(&bl.berwald),
        max_l: max_abs(&bl.landsberg),
        max_j: max_abs(&bl.mean_landsberg),
        max_nl: max_abs(&spray.nonlinear),
        max_gs: max_abs(&spray.g_spray),
        max_r: max_abs(&curv.riemann),
        max_hh: max_abs(&hh.hh),
        max_adj: max_abs(&adj.adjusted),
        max_rows: max_abs(&adj.adjusted_y).max(max_abs(&adj.y_adjusted)),
    })
}

fn collect_stacks(
    spec: &ChartSpec,
    samples: &[(Vec<f64>, Vec<f64>)],
    flag_dirs: Option<&[Vec<Vec<f64>>]>,
) -> Result<Vec<SampleStack>> {
    samples
        .par_iter()
        .enumerate()
        .map(|(idx, (x, y))| sample_stack(spec, x, y, flag_dirs.map(|d| d[idx].as_slice())))
        .collect()
}

/// Largest value of `f` over the stacks, with the sample attaining it.
fn track<F: Fn(&SampleStack) -> f64>(
    stacks: &[SampleStack],
    samples: &[(Vec<f64>, Vec<f64>)],
    f: F,
) -> (f64, Option<Witness>) {
    let mut best = 0.0;
    let mut wit = None;
    for (s, (x, y)) in stacks.iter().zip(samples) {
        let v = f(s);
        if wit.is_none() || v > best {
            best = v;
            wit = Some(Witness {
                x: x.clone(),
                y: y.clone(),
            });
        }
    }
    (best, wit)
}

/// Two flag directions per coordinate at every sample, pre-drawn so the
/// parallel loop stays deterministic.
fn draw_flag_dirs(n: usize, count: usize, seed: u64) -> Vec<Vec<Vec<f64>>> {
    let mut rng = Rng::new(seed ^ 0x464c_4147);
    (0..count)
        .map(|_| (0..2 * n).map(|_| rng.unit_vector(n)).collect())
        .collect()
}

/// Metric-class flags decided from a survey, extending the spray-level
/// classifier with the curvature side.
pub struct RunFlags {
    pub riemannian: bool,
    pub berwald: bool,
    pub landsberg: bool,
    pub weak_landsberg: bool,
    pub r_flat: bool,
    pub rfrak_flat: bool,
    pub rfrak_rows_flat: bool,
    pub scalar_flag: bool,
    pub scale: f64,
}

fn run_flags(stacks: &[SampleStack], detect_tol: f64) -> RunFlags {
    let mx = |f: fn(&SampleStack) -> f64| stacks.iter().map(f).fold(0.0, f64::max);
    let scale = 1.0 + mx(|s| s.max_g).max(mx(|s| s.max_nl)).max(mx(|s| s.max_gs));
    let thr = CLASSIFIER_TOLERANCE * scale;
    RunFlags {
        riemannian: mx(|s| s.max_c) <= thr,
        berwald: mx(|s| s.max_b) <= thr,
        landsberg: mx(|s| s.max_l) <= thr,
        weak_landsberg: mx(|s| s.max_j) <= thr,
        r_flat: mx(|s| s.max_r) <= thr,
        rfrak_flat: mx(|s| s.max_adj) <= thr,
        rfrak_rows_flat: mx(|s| s.max_rows) <= thr,
        scalar_flag: stacks.iter().all(|s| s.flag_spread <= detect_tol),
        scale,
    }
}

fn flags_value(flags: &RunFlags) -> serde_json::Value {
    let mut map = BTreeMap::new();
    map.insert("riemannian", flags.riemannian);
    map.insert("berwald", flags.berwald);
    map.insert("landsberg", flags.landsberg);
    map.insert("weak_landsberg", flags.weak_landsberg);
    map.insert("r_flat", flags.r_flat);
    map.insert("rfrak_flat", flags.rfrak_flat);
    map.insert("rfrak_rows_flat", flags.rfrak_rows_flat);
    map.insert("scalar_flag", flags.scalar_flag);
    serde_json::to_value(map).expect("flag serialization")
}

fn flags_summary(flags: &RunFlags) -> String {
    let mut on = Vec::new();
    for (name, v) in [
        ("riemannian", flags.riemannian),
        ("berwald", flags.berwald),
        ("landsberg", flags.landsberg),
        ("weak_landsberg", flags.weak_landsberg),
        ("r_flat", flags.r_flat),
        ("rfrak_flat", flags.rfrak_flat),
        ("rfrak_rows_flat", flags.rfrak_rows_flat),
        ("scalar_flag", flags.scalar_flag),
    ] {
        if v {
            on.push(name);
        }
    }
    if on.is_empty() {
        "no class flags set".to_string()
    } else {
        on.join(", ")
    }
}

fn magnitude_facts(stacks: &[SampleStack]) -> serde_json::Value {
    let mx = |f: fn(&SampleStack) -> f64| stacks.iter().map(f).fold(0.0, f64::max);
    let mut map = BTreeMap::new();
    map.insert("g", mx(|s| s.max_g));
    map.insert("cartan", mx(|s| s.max_c));
    map.insert("mean_cartan", mx(|s| s.max_i));
    map.insert("berwald", mx(|s| s.max_b));
    map.insert("landsberg", mx(|s| s.max_l));
    map.insert("mean_landsberg", mx(|s| s.max_j));
    map.insert("nonlinear", mx(|s| s.max_nl));
    map.insert("spray", mx(|s| s.max_gs));
    map.insert("riemann", mx(|s| s.max_r));
    map.insert("hh", mx(|s| s.max_hh));
    map.insert("adjusted", mx(|s| s.max_adj));
    serde_json::to_value(map).expect("magnitude serialization")
}

fn fitted_k_facts(stacks: &[SampleStack]) -> serde_json::Value {
    let lo = stacks.iter().map(|s| s.fitted_k).fold(f64::INFINITY, f64::min);
    let hi = stacks
        .iter()
        .map(|s| s.fitted_k)
        .fold(f64::NEG_INFINITY, f64::max);
    serde_json::json!({ "min": lo, "max": hi })
}

fn base_report(command: &str, rc: &ResolvedChart, config: &RunConfig) -> Result<Report> {
    let mut report = Report::new(command, &rc.name, rc.spec.dim, config.samples, config.seed);
    let mut tols = default_tolerances();
    apply_overrides(&mut tols, &config.tol_overrides)?;
    report.tolerances = tols;
    if let Some(v) = &rc.validation {
        fact(
            &mut report.facts,
            "chart_validation",
            serde_json::json!({
                "samples_checked": v.samples_checked,
                "min_eigenvalue": v.min_eigenvalue,
                "max_beta_norm": v.max_beta_norm,
            }),
        );
    }
    Ok(report)
}

/// Tensor survey: identity residuals and tensor magnitudes over the sample
/// plan.
pub fn cmd_tensors(config: &RunConfig) -> Result<Report> {
    let rc = resolve_chart(config)?;
    let mut report = base_report("tensors", &rc, config)?;
    let samples = sample_points(
        &rc.spec.domain,
        rc.spec.dim,
        config.samples,
        config.seed,
        config.shrink,
    );
    let stacks = collect_stacks(&rc.spec, &samples, None)?;
    let tol = |name: &str| report.tolerances[name];

    let mut push = |name: &str, anchor: &'static str, tol_name: &str, f: fn(&SampleStack) -> f64| {
        let (value, wit) = track(&stacks, &samples, f);
        report
            .checks
            .push(CheckRecord::measured(name, anchor, value, tol(tol_name), wit));
    };
    push(
        "fundamental-invariants",
        "fundamental-invariants",
        "fundamental",
        |s| s.inv_res,
    );
    push("matsumoto-torsion", "matsumoto-vanishing", "matsumoto", |s| {
        s.matsumoto
    });
    push(
        "cartan-reducibility",
        "torsion-reducibility",
        "c-reducibility",
        |s| s.reducibility,
    );
    push(
        "landsberg-reconstruction",
        "landsberg-reconstruction",
        "landsberg-reconstruction",
        |s| s.landsberg_rec,
    );
    push(
        "connection-compatibility",
        "connection-compatibility",
        "connection-compat",
        |s| s.compat,
    );
    push("hh-antisymmetry", "hh-antisymmetry", "hh-antisymmetry", |s| {
        s.hh_asym
    });
    push("curvature-bridge", "curvature-bridge", "curvature-bridge", |s| {
        s.bridge
    });
    push(
        "contraction-identities",
        "contraction-identities",
        "contraction-identities",
        |s| s.contraction,
    );

    fact(&mut report.facts, "magnitudes", magnitude_facts(&stacks));
    fact(&mut report.facts, "fitted_k", fitted_k_facts(&stacks));
    report.validate()?;
    Ok(report)
}

/// Classification run: the eight metric-class flags plus the magnitudes
/// they were decided from.
pub fn cmd_classify(config: &RunConfig) -> Result<Report> {
    let rc = resolve_chart(config)?;
    let mut report = base_report("classify", &rc, config)?;
    let n = rc.spec.dim;
    let samples = sample_points(&rc.spec.domain, n, config.samples, config.seed, config.shrink);
    let dirs = draw_flag_dirs(n, samples.len(), config.seed);
    let stacks = collect_stacks(&rc.spec, &samples, Some(&dirs))?;
    let flags = run_flags(&stacks, report.tolerances["scalar-flag-detect"]);

    fact(&mut report.facts, "classification", flags_value(&flags));
    fact(&mut report.facts, "magnitudes", magnitude_facts(&stacks));
    fact(&mut report.facts, "fitted_k", fitted_k_facts(&stacks));
    fact(&mut report.facts, "scale", flags.scale);
    let max_spread = stacks.iter().map(|s| s.flag_spread).fold(0.0, f64::max);
    fact(&mut report.facts, "flag_spread_max", max_spread);
    let (_, wit_c) = track(&stacks, &samples, |s| s.max_c);
    let (_, wit_b) = track(&stacks, &samples, |s| s.max_b);
    if let Some(w) = wit_c {
        fact(&mut report.facts, "witness_cartan", &w);
    }
    if let Some(w) = wit_b {
        fact(&mut report.facts, "witness_berwald", &w);
    }

    report.checks.push(CheckRecord {
        name: "classification".into(),
        anchor: "classification",
        status: Status::Pass,
        residual: None,
        tolerance: None,
        witness: None,
        note: Some(flags_summary(&flags)),
    });
    report.validate()?;
    Ok(report)
}

struct GeoOutcome {
    records: Vec<CheckRecord>,
    facts: serde_json::Value,
    csv: String,
}

/// Transport run along the chart's distinguished geodesic, with every
/// along-path check. `berwald` gates the checks that only hold on Berwald
/// charts.
fn geodesic_suite(
    spec: &ChartSpec,
    basepoint: &[f64],
    base_direction: &[f64],
    berwald: bool,
    config: &RunConfig,
    tols: &BTreeMap<String, f64>,
) -> Result<GeoOutcome> {
    let n = spec.dim;
    let opts = IntegrateOptions {
        t_end: config.t_end,
        ..Default::default()
    };
    let mut rng = Rng::new(config.seed ^ 0x5452_414e);
    let v0 = loop {
        let v = rng.unit_vector(n);
        let dot: f64 = v.iter().zip(base_direction).map(|(a, b)| a * b).sum();
        let ynorm = base_direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (dot / ynorm).abs() < 0.9 {
            break v;
        }
    };
    let (path, frame) = transport_run(spec, basepoint, base_direction, &v0, &opts)?;
    let trace = trace_series(spec, &path, &frame)?;
    if trace.t.len() < 5 {
        return Err(Error::Config(format!(
            "integration span {} leaves only {} grid samples",
            config.t_end,
            trace.t.len()
        )));
    }
    let t0 = trace.t[0];
    let t1 = *trace.t.last().expect("nonempty grid");
    let units = (t1 - t0).abs().max(1.0);
    let mut records = Vec::new();
    let witness = Some(Witness {
        x: basepoint.to_vec(),
        y: base_direction.to_vec(),
    });

    let mut f_vel_drift: f64 = 0.0;
    let mut f_vel_0 = 0.0;
    for (idx, s) in path.samples.iter().enumerate() {
        let f = f_s(spec, &s.x, &s.v)?;
        if idx == 0 {
            f_vel_0 = f;
        } else {
            f_vel_drift = f_vel_drift.max((f - f_vel_0).abs() / (1.0 + f_vel_0.abs()));
        }
    }
    records.push(CheckRecord::measured(
        "first-integral",
        "first-integral",
        f_vel_drift / units,
        tols["first-integral"],
        witness.clone(),
    ));
    records.push(CheckRecord::measured(
        "transport-invariance",
        "transport-invariance",
        frame.g_drift / units,
        tols["transport-g-drift"],
        witness.clone(),
    ));

    if berwald {
        let fv0 = trace.f_v[0];
        let fv_drift = trace
            .f_v
            .iter()
            .fold(0.0f64, |m, &f| m.max((f - fv0).abs() / (1.0 + fv0.abs())));
        records.push(CheckRecord::measured(
            "berwald-transport-isometry",
            "berwald-transport-isometry",
            fv_drift / units,
            tols["transport-f-drift"],
            witness.clone(),
        ));
    } else {
        records.push(CheckRecord::not_applicable(
            "berwald-transport-isometry",
            "berwald-transport-isometry",
            "the chart is not Berwald at the classifier tolerance",
        ));
    }

    // Central-difference derivative of I against J, away from the ends of
    // the span where the stencil loses a neighbor.
    let lo = t0.min(t1) + 0.1 * (t1 - t0).abs();
    let hi = t0.max(t1) - 0.1 * (t1 - t0).abs();
    let mut kinematic: f64 = 0.0;
    for k in 1..trace.t.len() - 1 {
        if trace.t[k] < lo || trace.t[k] > hi {
            continue;
        }
        let dt = trace.t[k + 1] - trace.t[k - 1];
        if dt.abs() < 1e-12 {
            continue;
        }
        let didt = (trace.i_trace[k + 1] - trace.i_trace[k - 1]) / dt;
        kinematic = kinematic.max((didt - trace.j_trace[k]).abs());
    }
    records.push(CheckRecord::measured(
        "kinematic-identity",
        "kinematic-identity",
        kinematic,
        tols["kinematic"],
        witness.clone(),
    ));

    if berwald {
        let max_j = trace.j_trace.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        records.push(CheckRecord::measured(
            "berwald-landsberg-trace",
            "berwald-trace-statics",
            max_j,
            tols["berwald-j"],
            witness.clone(),
        ));
        let i0 = trace.i_trace[0];
        let i_drift = trace
            .i_trace
            .iter()
            .fold(0.0f64, |m, &v| m.max((v - i0).abs()));
        records.push(CheckRecord::measured(
            "berwald-cartan-drift",
            "berwald-trace-statics",
            i_drift,
            tols["berwald-i-drift"],
            witness.clone(),
        ));
    } else {
        records.push(CheckRecord::not_applicable(
            "berwald-landsberg-trace",
            "berwald-trace-statics",
            "the chart is not Berwald at the classifier tolerance",
        ));
        records.push(CheckRecord::not_applicable(
            "berwald-cartan-drift",
            "berwald-trace-statics",
            "the chart is not Berwald at the classifier tolerance",
        ));
    }

    let law = linear_law_check(&trace, tols["linear-law-hypothesis"]);
    if law.applicable {
        records.push(CheckRecord::measured(
            "linear-evolution",
            "linear-evolution",
            law.residual,
            tols["linear-law"],
            witness.clone(),
        ));
    } else {
        records.push(CheckRecord::not_applicable(
            "linear-evolution",
            "linear-evolution",
            format!(
                "the Landsberg trace varies along the path (spread {:.3e}), so the law's hypothesis fails",
                law.j_spread
            ),
        ));
    }

    let last = path.samples.last().expect("nonempty path");
    let vlast = &frame.samples.last().expect("nonempty frame").vec;
    let back_opts = IntegrateOptions {
        t_end: -(last.t - path.samples[0].t),
        unit_speed: false,
        ..opts.clone()
    };
    let (_, back) = transport_run(spec, &last.x, &last.v, vlast, &back_opts)?;
    let returned = &back.samples.last().expect("nonempty frame").vec;
    let v0_scale = 1.0 + max_abs(&v0);
    let reversal = returned
        .iter()
        .zip(&v0)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / v0_scale;
    records.push(CheckRecord::measured(
        "reversal",
        "reversal",
        reversal,
        tols["reversal"],
        witness,
    ));

    let facts = serde_json::json!({
        "steps": path.steps,
        "exited": path.exited,
        "t_first": t0,
        "t_last": t1,
        "max_local_error": path.max_local_error,
        "transport_direction": v0,
        "berwald": berwald,
        "law": {
            "applicable": law.applicable,
            "slope": law.slope,
            "intercept": law.intercept,
            "residual": law.residual,
            "j_spread": law.j_spread,
            "i0": law.i0,
            "j0": law.j0,
        },
    });
    let csv = trace_csv(&path, &frame, &trace);
    Ok(GeoOutcome {
        records,
        facts,
        csv,
    })
}

fn trace_csv(path: &GeodesicPath, frame: &TransportedFrame, trace: &TraceSeries) -> String {
    use std::fmt::Write;
    let n = path.n;
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",ydot{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",V{i}");
    }
    out.push_str(",I,J,gVV,FV\n");
    for k in 0..trace.t.len() {
        let _ = write!(out, "{:.16e}", trace.t[k]);
        for v in &path.samples[k].x {
            let _ = write!(out, ",{v:.16e}");
        }
        for v in &path.samples[k].v {
            let _ = write!(out, ",{v:.16e}");
        }
        for v in &frame.samples[k].vec {
            let _ = write!(out, ",{v:.16e}");
        }
        let _ = writeln!(
            out,
            ",{:.16e},{:.16e},{:.16e},{:.16e}",
            trace.i_trace[k], trace.j_trace[k], trace.g_vv[k], trace.f_v[k]
        );
    }
    out
}

/// Geodesic run: integrates the chart's distinguished geodesic, transports
/// a frame vector, and returns the report plus the trace table as CSV.
pub fn cmd_geodesic(config: &RunConfig) -> Result<(Report, String)> {
    let rc = resolve_chart(config)?;
    let mut report = base_report("geodesic", &rc, config)?;
    let n = rc.spec.dim;
    let class_count = config.samples.clamp(8, 24);
    let class_samples =
        sample_points(&rc.spec.domain, n, class_count, config.seed, config.shrink);
    let cls = classify_spray(&rc.spec, &class_samples)?;
    let geo = geodesic_suite(
        &rc.spec,
        &rc.basepoint,
        &rc.base_direction,
        cls.berwald,
        config,
        &report.tolerances,
    )?;
    report.checks = geo.records;
    fact(&mut report.facts, "geodesic", geo.facts);
    fact(&mut report.facts, "basepoint", &rc.basepoint);
    fact(&mut report.facts, "base_direction", &rc.base_direction);
    report.validate()?;
    Ok((report, geo.csv))
}

/// AD-vs-FD probe sweep on F^2: random mixed partials within the jet
/// budget, compared against the finite-difference oracle.
pub fn ad_fd_residual(
    spec: &ChartSpec,
    count: usize,
    seed: u64,
    shrink: f64,
) -> Result<(f64, Option<Witness>)> {
    let n = spec.dim;
    let mut rng = Rng::new(seed ^ 0x4144_4644);
    let budget = JetBudget::default();
    let field = FsqField { chart: spec };
    let fd_cfg = FdConfig::default();
    let mut worst = 0.0;
    let mut wit = None;
    for _ in 0..count {
        let x = rng.in_domain(&spec.domain, n, shrink);
        let y = rng.unit_vector(n);
        let total = 1 + (rng.next_u64() % 3) as u32;
        let mut dx = vec![0u32; n];
        let mut dy = vec![0u32; n];
        let mut order_x = 0;
        for _ in 0..total {
            let coord = (rng.next_u64() as usize) % n;
            if rng.next_f64() < 0.5 && order_x < budget.order_x {
                dx[coord] += 1;
                order_x += 1;
            } else {
                dy[coord] += 1;
            }
        }
        let idx = MultiIndex::new(dx, dy);
        let jet = mixed_partial(&field, &x, &y, &idx, &budget)?;
        let fd = fd_partial(&field, &x, &y, &idx, &fd_cfg)?;
        let res = (jet - fd).abs() / (1.0 + fd.abs());
        if wit.is_none() || res > worst {
            worst = res;
            wit = Some(Witness { x, y });
        }
    }
    Ok((worst, wit))
}

struct BoundOutcome {
    records: Vec<CheckRecord>,
    facts: serde_json::Value,
}

/// Sup of the mean torsion norm at sampled base points against the claimed
/// covector-norm bound and the dimension-only bound.
fn torsion_bound_suite(
    spec: &ChartSpec,
    samples: &[(Vec<f64>, Vec<f64>)],
    config: &RunConfig,
    tols: &BTreeMap<String, f64>,
) -> Result<BoundOutcome> {
    let n = spec.dim;
    let count = samples.len().min(50);
    let base = config.seed ^ 0x424f_554e;
    let rows: Vec<(f64, f64, Vec<f64>, Vec<f64>)> = samples[..count]
        .par_iter()
        .enumerate()
        .map(|(idx, (x, _))| -> Result<(f64, f64, Vec<f64>, Vec<f64>)> {
            let seed = base.wrapping_add((idx as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let est = mean_cartan_norm(spec, x, seed)?;
            let bound = randers_norm_bound(n, spec.beta_norm_at(x)?);
            Ok((est.value, bound, x.clone(), est.argmax))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_wit = None;
    let mut max_est: f64 = 0.0;
    let mut max_est_wit = None;
    for (est, bound, x, argmax) in &rows {
        let gap = est - bound;
        if worst_wit.is_none() || gap > worst_gap {
            worst_gap = gap;
            worst_wit = Some(Witness {
                x: x.clone(),
                y: argmax.clone(),
            });
        }
        if max_est_wit.is_none() || *est > max_est {
            max_est = *est;
            max_est_wit = Some(Witness {
                x: x.clone(),
                y: argmax.clone(),
            });
        }
    }
    let strict_gap = max_est - global_norm_bound(n);

    let records = vec![
        CheckRecord::measured(
            "torsion-bound",
            "torsion-norm-bound",
            worst_gap.max(0.0),
            tols["torsion-bound"],
            worst_wit,
        ),
        CheckRecord::measured(
            "torsion-bound-strict",
            "torsion-norm-strict",
            strict_gap.max(0.0),
            tols["torsion-bound"],
            max_est_wit,
        ),
    ];
    let facts = serde_json::json!({
        "points": count,
        "max_estimate": max_est,
        "bound_gap": worst_gap,
        "strict_gap": strict_gap,
    });
    Ok(BoundOutcome { records, facts })
}

/// Reference flag-curvature constants for the catalog charts.
fn reference_k(name: &str) -> Option<f64> {
    match name {
        "funk_ball" => Some(-0.25),
        "riemannian_sphere" => Some(1.0),
        "euclidean_randers" => Some(0.0),
        _ => None,
    }
}

/// Verification sweep: every check family the tool knows, one record each,
/// with the scalar-flag family gated on detection.
pub fn cmd_verify(config: &RunConfig) -> Result<Report> {
    let rc = resolve_chart(config)?;
    let mut report = base_report("verify", &rc, config)?;
    let n = rc.spec.dim;
    let samples = sample_points(&rc.spec.domain, n, config.samples, config.seed, config.shrink);
    let dirs = draw_flag_dirs(n, samples.len(), config.seed);
    let stacks = collect_stacks(&rc.spec, &samples, Some(&dirs))?;
    let flags = run_flags(&stacks, report.tolerances["scalar-flag-detect"]);
    let tols = report.tolerances.clone();
    let tol = |name: &str| tols[name];

    {
        let mut push =
            |name: &str, anchor: &'static str, tol_name: &str, f: fn(&SampleStack) -> f64| {
                let (value, wit) = track(&stacks, &samples, f);
                report.checks.push(CheckRecord::measured(
                    name,
                    anchor,
                    value,
                    tol(tol_name),
                    wit,
                ));
            };
        push(
            "fundamental-invariants",
            "fundamental-invariants",
            "fundamental",
            |s| s.inv_res,
        );
        push("matsumoto-torsion", "matsumoto-vanishing", "matsumoto", |s| {
            s.matsumoto
        });
        push(
            "cartan-reducibility",
            "torsion-reducibility",
            "c-reducibility",
            |s| s.reducibility,
        );
        push(
            "landsberg-reconstruction",
            "landsberg-reconstruction",
            "landsberg-reconstruction",
            |s| s.landsberg_rec,
        );
        push(
            "connection-compatibility",
            "connection-compatibility",
            "connection-compat",
            |s| s.compat,
        );
        push("hh-antisymmetry", "hh-antisymmetry", "hh-antisymmetry", |s| {
            s.hh_asym
        });
        push("curvature-bridge", "curvature-bridge", "curvature-bridge", |s| {
            s.bridge
        });
        push(
            "contraction-identities",
            "contraction-identities",
            "contraction-identities",
            |s| s.contraction,
        );
    }

    // Scalar-flag family.
    if flags.scalar_flag {
        let (spread, wit) = track(&stacks, &samples, |s| s.flag_spread);
        report.checks.push(CheckRecord::measured(
            "flag-constancy",
            "flag-curvature-constancy",
            spread,
            tol("flag-constancy"),
            wit,
        ));
        if let Some(k_ref) = reference_k(&rc.name) {
            let (dev, wit) = track(&stacks, &samples, |s| (s.fitted_k - k_ref).abs());
            report.checks.push(CheckRecord::measured(
                "flag-value",
                "flag-curvature-value",
                dev,
                tol("flag-value"),
                wit,
            ));
        } else {
            report.checks.push(CheckRecord::not_applicable(
                "flag-value",
                "flag-curvature-value",
                "no reference constant for this chart",
            ));
        }

        let checks: Vec<crate::curvature::ScalarFlagCheck> = samples
            .par_iter()
            .map(|(x, y)| scalar_flag_check(&rc.spec, x, y))
            .collect::<Result<Vec<_>>>()?;
        let agg = |f: fn(&crate::curvature::ScalarFlagCheck) -> f64| {
            let mut best = 0.0;
            let mut wit = None;
            for (c, (x, y)) in checks.iter().zip(&samples) {
                let v = f(c);
                if wit.is_none() || v > best {
                    best = v;
                    wit = Some(Witness {
                        x: x.clone(),
                        y: y.clone(),
                    });
                }
            }
            (best, wit)
        };
        let (r3, wit) = agg(|c| c.res_three_index);
        report.checks.push(CheckRecord::measured(
            "three-index-closed-form",
            "three-index-closed-form",
            r3,
            tol("three-index-closed-form"),
            wit,
        ));
        let (printed, wit) = agg(|c| c.res_printed);
        report.checks.push(CheckRecord::measured(
            "adjusted-closed-form-printed",
            "adjusted-ricci-closed-form",
            printed,
            tol("adjusted-closed-form"),
            wit,
        ));
        let (companion, wit) = agg(|c| c.res_companion);
        report.checks.push(CheckRecord::measured(
            "adjusted-closed-form-companion",
            "adjusted-ricci-companion",
            companion,
            tol("adjusted-companion"),
            wit,
        ));
        let (defect, wit) = agg(|c| c.defect_residual / c.scale);
        report.checks.push(CheckRecord::measured(
            "asymmetry-defect",
            "asymmetry-defect",
            defect,
            tol("defect-identity"),
            wit,
        ));
        if flags.riemannian {
            report.checks.push(CheckRecord::not_applicable(
                "asymmetry-witness",
                "asymmetry-witness",
                "the mean torsion vanishes, so the asymmetry is trivially zero",
            ));
        } else {
            let floor = tol("defect-floor");
            let hits = checks
                .iter()
                .filter(|c| c.raw_defect > floor * c.scale)
                .count();
            let fraction = hits as f64 / checks.len().max(1) as f64;
            report.checks.push(
                CheckRecord {
                    name: "asymmetry-witness".into(),
                    anchor: "asymmetry-witness",
                    status: if fraction >= 0.9 {
                        Status::Pass
                    } else {
                        Status::Fail
                    },
                    residual: Some(fraction),
                    tolerance: Some(0.9),
                    witness: None,
                    note: Some(format!(
                        "floor check: passes when at least 90 percent of samples have a raw asymmetry above {floor:.1e} times the sample scale"
                    )),
                },
            );
        }
        let (rasym, wit) = agg(|c| c.ricci_asym / c.scale);
        report.checks.push(CheckRecord::measured(
            "ricci-symmetry",
            "ricci-symmetry",
            rasym,
            tol("ricci-symmetry"),
            wit,
        ));
    } else {
        for (name, anchor) in [
            ("flag-constancy", "flag-curvature-constancy"),
            ("flag-value", "flag-curvature-value"),
            ("three-index-closed-form", "three-index-closed-form"),
            ("adjusted-closed-form-printed", "adjusted-ricci-closed-form"),
            (
                "adjusted-closed-form-companion",
                "adjusted-ricci-companion",
            ),
            ("asymmetry-defect", "asymmetry-defect"),
            ("asymmetry-witness", "asymmetry-witness"),
            ("ricci-symmetry", "ricci-symmetry"),
        ] {
            report.checks.push(CheckRecord::not_applicable(
                name,
                anchor as &'static str,
                "the flag curvature varies with the flag, so the scalar-flag forms do not apply",
            ));
        }
    }

    // Curvature chain by class.
    let scale = flags.scale;
    if flags.berwald && flags.r_flat {
        let (chain, wit) = track(&stacks, &samples, |s| {
            s.max_b.max(s.max_hh).max(s.max_adj)
        });
        report.checks.push(CheckRecord::measured(
            "flat-chain",
            "flat-chain",
            chain / scale,
            tol("flat-chain"),
            wit,
        ));
        report.checks.push(CheckRecord::not_applicable(
            "berwald-chain",
            "berwald-chain",
            "the chart is flat; see the flat-chain record",
        ));
    } else if flags.berwald {
        let (max_b, wit) = track(&stacks, &samples, |s| s.max_b);
        report.checks.push(CheckRecord::measured(
            "berwald-chain",
            "berwald-chain",
            max_b / scale,
            tol("berwald-flat"),
            wit,
        ));
        let max_hh = stacks.iter().map(|s| s.max_hh).fold(0.0, f64::max);
        let floor = tol("curvature-floor");
        report.checks.push(CheckRecord {
            name: "hh-curvature-floor".into(),
            anchor: "berwald-chain",
            status: if max_hh >= floor * scale {
                Status::Pass
            } else {
                Status::Fail
            },
            residual: Some(max_hh / scale),
            tolerance: Some(floor),
            witness: None,
            note: Some(
                "floor check: passes when the residual is at least the tolerance, showing the chart is Berwald but not flat"
                    .into(),
            ),
        });
        report.checks.push(CheckRecord::not_applicable(
            "flat-chain",
            "flat-chain",
            "the chart is curved",
        ));
    } else {
        report.checks.push(CheckRecord::not_applicable(
            "berwald-chain",
            "berwald-chain",
            "the chart is not Berwald at the classifier tolerance",
        ));
        report.checks.push(CheckRecord::not_applicable(
            "flat-chain",
            "flat-chain",
            "the chart is curved",
        ));
    }

    let geo = geodesic_suite(
        &rc.spec,
        &rc.basepoint,
        &rc.base_direction,
        flags.berwald,
        config,
        &tols,
    )?;
    report.checks.extend(geo.records);
    fact(&mut report.facts, "geodesic", geo.facts);

    let bound = torsion_bound_suite(&rc.spec, &samples, config, &tols)?;
    report.checks.extend(bound.records);
    fact(&mut report.facts, "torsion_bound", bound.facts);

    let probes = config.samples.clamp(100, 500);
    let (ad_fd, wit) = ad_fd_residual(&rc.spec, probes, config.seed, config.shrink)?;
    report.checks.push(CheckRecord::measured(
        "ad-fd",
        "ad-fd-agreement",
        ad_fd,
        tol("ad-fd"),
        wit,
    ));
    fact(&mut report.facts, "ad_fd_probes", probes);

    fact(&mut report.facts, "classification", flags_value(&flags));
    fact(&mut report.facts, "magnitudes", magnitude_facts(&stacks));
    fact(&mut report.facts, "fitted_k", fitted_k_facts(&stacks));
    fact(&mut report.facts, "scale", scale);
    report.validate()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{to_canonical_bytes, Status};

    fn config(name: &str) -> RunConfig {
        let mut c = RunConfig::new(ChartSource::Catalog(name.into()));
        c.samples = 12;
        c.seed = 7;
        c
    }

    fn find<'a>(report: &'a Report, name: &str) -> &'a CheckRecord {
        report
            .checks
            .iter()
            .find(|c| c.name == name)
            .unwrap_or_else(|| panic!("missing check '{name}'"))
    }

    #[test]
    fn tensors_on_flat_chart_pass_with_zero_curvature() {
        let report = cmd_tensors(&config("euclidean_randers")).unwrap();
        assert!(!report.has_failure());
        let mags = &report.facts["magnitudes"];
        assert!(mags["riemann"].as_f64().unwrap() < 1e-10);
        assert!(mags["hh"].as_f64().unwrap() < 1e-10);
        assert!(mags["berwald"].as_f64().unwrap() < 1e-10);
        assert!(mags["cartan"].as_f64().unwrap() > 1e-2);
    }

    #[test]
    fn classify_flags_match_chart_families() {
        let report = cmd_classify(&config("euclidean_randers")).unwrap();
        let flags = &report.facts["classification"];
        assert_eq!(flags["berwald"], serde_json::json!(true));
        assert_eq!(flags["r_flat"], serde_json::json!(true));
        assert_eq!(flags["rfrak_flat"], serde_json::json!(true));
        assert_eq!(flags["riemannian"], serde_json::json!(false));
        assert_eq!(flags["scalar_flag"], serde_json::json!(true));

        let report = cmd_classify(&config("funk_ball")).unwrap();
        let flags = &report.facts["classification"];
        assert_eq!(flags["berwald"], serde_json::json!(false));
        assert_eq!(flags["rfrak_flat"], serde_json::json!(false));
        assert_eq!(flags["scalar_flag"], serde_json::json!(true));

        let report = cmd_classify(&config("riemannian_sphere")).unwrap();
        let flags = &report.facts["classification"];
        assert_eq!(flags["riemannian"], serde_json::json!(true));
        assert_eq!(flags["berwald"], serde_json::json!(true));
    }

    #[test]
    fn geodesic_run_emits_trace_and_passes_invariants() {
        let (report, csv) = cmd_geodesic(&config("funk_ball")).unwrap();
        assert_eq!(find(&report, "first-integral").status, Status::Pass);
        assert_eq!(find(&report, "transport-invariance").status, Status::Pass);
        assert_eq!(find(&report, "kinematic-identity").status, Status::Pass);
        assert_eq!(
            find(&report, "linear-evolution").status,
            Status::NotApplicable
        );
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "t,x1,x2,ydot1,ydot2,V1,V2,I,J,gVV,FV");
        // grid rows: t from 0 to 3 with step 0.02, inclusive
        assert_eq!(csv.lines().count(), 1 + 151);
    }

    #[test]
    fn verify_funk_flags_the_printed_closed_form_only() {
        let mut cfg = config("funk_ball");
        cfg.samples = 10;
        let report = cmd_verify(&cfg).unwrap();
        assert_eq!(find(&report, "three-index-closed-form").status, Status::Pass);
        assert_eq!(
            find(&report, "adjusted-closed-form-companion").status,
            Status::Pass
        );
        assert_eq!(find(&report, "asymmetry-defect").status, Status::Pass);
        assert_eq!(find(&report, "asymmetry-witness").status, Status::Pass);
        assert_eq!(find(&report, "ricci-symmetry").status, Status::Pass);
        assert_eq!(find(&report, "curvature-bridge").status, Status::Pass);
        assert_eq!(find(&report, "ad-fd").status, Status::Pass);
        // the printed form and the covector-norm bound are genuinely violated
        assert_eq!(
            find(&report, "adjusted-closed-form-printed").status,
            Status::Fail
        );
        assert_eq!(find(&report, "torsion-bound").status, Status::Fail);
        assert_eq!(find(&report, "torsion-bound-strict").status, Status::Pass);
        assert!(report.has_failure());
    }

    #[test]
    fn verify_product_chart_marks_scalar_flag_family_not_applicable() {
        let mut cfg = config("parallel_beta_product");
        cfg.dim = Some(3);
        cfg.samples = 8;
        let report = cmd_verify(&cfg).unwrap();
        assert_eq!(
            find(&report, "flag-constancy").status,
            Status::NotApplicable
        );
        assert_eq!(
            find(&report, "adjusted-closed-form-printed").status,
            Status::NotApplicable
        );
        assert_eq!(find(&report, "berwald-chain").status, Status::Pass);
        assert_eq!(find(&report, "hh-curvature-floor").status, Status::Pass);
        assert_eq!(
            find(&report, "berwald-landsberg-trace").status,
            Status::Pass
        );
        assert_eq!(find(&report, "linear-evolution").status, Status::Pass);
    }

    #[test]
    fn reports_are_byte_deterministic() {
        let a = cmd_classify(&config("euclidean_randers")).unwrap();
        let b = cmd_classify(&config("euclidean_randers")).unwrap();
        assert_eq!(
            to_canonical_bytes(&a).unwrap(),
            to_canonical_bytes(&b).unwrap()
        );
    }

    #[test]
    fn file_charts_are_validated_before_use() {
        let dir = std::env::temp_dir().join("finslerlab-runs-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad_covector.json");
        std::fs::write(
            &path,
            r#"{
                "dimension": 2,
                "a": ["1", "0", "0", "1"],
                "b": ["1.2", "0"],
                "domain": {"type": "ball", "radius": 1.0}
            }"#,
        )
        .unwrap();
        let mut cfg = RunConfig::new(ChartSource::File(path.clone()));
        cfg.samples = 10;
        let err = cmd_tensors(&cfg).unwrap_err();
        match err {
            Error::ChartInvalid(msg) => {
                assert!(msg.contains("bound"), "unexpected message: {msg}");
                assert!(msg.contains("at sample"), "no witness point: {msg}");
            }
            other => panic!("expected a chart validation error, got {other:?}"),
        }

        let good = dir.join("good_covector.json");
        std::fs::write(
            &good,
            r#"{
                "dimension": 2,
                "a": ["1", "0", "0", "1"],
                "b": ["0.3", "0.1"],
                "domain": {"type": "ball", "radius": 1.0}
            }"#,
        )
        .unwrap();
        let mut cfg = RunConfig::new(ChartSource::File(good));
        cfg.samples = 10;
        let report = cmd_tensors(&cfg).unwrap();
        assert!(!report.has_failure());
        assert!(report.facts.contains_key("chart_validation"));
    }

    #[test]
    fn dimension_mismatch_with_chart_file_is_a_config_error() {
        let dir = std::env::temp_dir().join("finslerlab-runs-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("dim2.json");
        std::fs::write(
            &path,
            r#"{
                "dimension": 2,
                "a": ["1", "0", "0", "1"],
                "b": ["0.2", "0"],
                "domain": {"type": "ball", "radius": 1.0}
            }"#,
        )
        .unwrap();
        let mut cfg = RunConfig::new(ChartSource::File(path));
        cfg.dim = Some(3);
        match cmd_tensors(&cfg).unwrap_err() {
            Error::Config(msg) => assert!(msg.contains("dimension")),
            other => panic!("expected a config error, got {other:?}"),
        }
    }
}
