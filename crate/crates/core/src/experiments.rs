//! Reproducible computational experiments and their reports.
//!
//! Each `run_*` function returns a [`RunReport`]: an echo of its inputs, a
//! table of per-step rows and a list of verdicts, each of which can be
//! re-checked from the rows alone. Reports contain no timing information, so
//! the same configuration always produces the same bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{ball_capacity, weyl_ratio, CapacityConfig, CapacityResult};
use crate::distance::{self, certificate, fit_sandwich, KPolicy};
use crate::domain::Domain;
use crate::error::{EchError, Result};
use crate::geometry::Ellipsoid;
use crate::hp;
use crate::quasiflat::{build_weights, chart_embed, parameter_distance, ChartPoint, ParameterVector, SnapMode};
use crate::scalar::Scalar;
use crate::weights::{ellipsoid_weights, realize_with, WeightConfig, WeightMultiset};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Verdict { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub summary: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub verdicts: Vec<Verdict>,
}

impl RunReport {
    fn new(command: &str, columns: &[&str]) -> Self {
        RunReport {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            summary: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    fn input(&mut self, key: &str, value: impl ToString) {
        self.inputs.insert(key.to_string(), value.to_string());
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.insert(key.to_string(), value.to_string());
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Writes `<command>.json` and/or `<command>.csv` into `dir`, which must exist.
pub fn emit_report(report: &RunReport, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(EchError::Io {
            path: dir.display().to_string(),
            message: "output directory does not exist".into(),
        });
    }
    let io = |path: &Path, e: &dyn std::fmt::Display| EchError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut written = Vec::new();
    for f in formats {
        let path = dir.join(format!("{}.{}", report.command, if *f == Format::Json { "json" } else { "csv" }));
        let bytes = match f {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(report).map_err(|e| io(&path, &e))?;
                s.push('\n');
                s.into_bytes()
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&report.columns).map_err(|e| io(&path, &e))?;
                for r in &report.rows {
                    w.write_record(r).map_err(|e| io(&path, &e))?;
                }
                w.into_inner().map_err(|e| io(&path, &e))?
            }
        };
        fs::write(&path, bytes).map_err(|e| io(&path, &e))?;
        written.push(path);
    }
    Ok(written)
}

fn num(s: &Scalar) -> String {
    s.numer().to_string()
}

fn den(s: &Scalar) -> String {
    s.denom().to_string()
}

/// A signed rational such as `-3/2`, `4` or `0.5`.
pub fn parse_signed(text: &str) -> Result<BigRational> {
    let t = text.trim();
    match t.strip_prefix('-') {
        Some(rest) => Ok(-rest.parse::<Scalar>()?.into_rational()),
        None => Ok(t.parse::<Scalar>()?.into_rational()),
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct LemmaCapConfig {
    pub params: ParameterVector,
    /// 1-based index `M < N`.
    pub m: usize,
    /// Sweep range; defaults to `[B_M^{M+1}, B_{M+1}^{M+1}]`.
    pub kmin: Option<u64>,
    pub kmax: Option<u64>,
    pub per_decade: u32,
    pub window: (f64, f64),
    /// Allowed relative gap for interval results.
    pub max_gap: f64,
    /// Expected exact value at one index, checked when that index is swept.
    pub anchor: Option<(u64, Scalar)>,
    pub threshold: Scalar,
    pub capacity: CapacityConfig,
}

impl LemmaCapConfig {
    /// `v = (64, 4096)`, `M = 1`.
    pub fn canonical() -> Self {
        LemmaCapConfig {
            params: ParameterVector::from_integers(&[64, 4096]).expect("positive"),
            m: 1,
            kmin: None,
            kmax: None,
            per_decade: 64,
            window: (0.25, 4.0),
            max_gap: 0.05,
            anchor: Some((4096, Scalar::from_integer(512))),
            threshold: Scalar::from_integer(crate::quasiflat::DEFAULT_THRESHOLD),
            capacity: CapacityConfig::default(),
        }
    }
}

fn pow_u64(b: &Scalar, e: u32) -> Result<u64> {
    let v = b.pow(e).floor();
    u64::try_from(v).map_err(|_| EchError::Overflow("sweep bound"))
}

/// Sweeps `c_k / √(k·B_M)` over log-spaced `k` in the range of the
/// capacity-growth estimate.
pub fn run_lemma_cap_sweep(cfg: &LemmaCapConfig) -> Result<RunReport> {
    let v = &cfg.params;
    let n = v.len();
    if cfg.m == 0 || cfg.m >= n {
        return Err(EchError::InvalidDomain(format!("need 1 <= M < N, got M = {}, N = {n}", cfg.m)));
    }
    let bm = &v.values()[cfg.m - 1];
    let kmin = match cfg.kmin {
        Some(k) => k,
        None => pow_u64(bm, cfg.m as u32 + 1)?,
    }
    .max(1);
    let kmax = match cfg.kmax {
        Some(k) => k,
        None => pow_u64(&v.values()[cfg.m], cfg.m as u32 + 1)?,
    };
    let adm = v.validate(&cfg.threshold);
    let mut rep = RunReport::new("lemma_cap", &["k", "c_k_num", "c_k_den", "ratio", "exact", "gap", "ratio_hi"]);
    rep.input("params", params_text(v));
    rep.input("m", cfg.m);
    rep.input("kmin", kmin);
    rep.input("kmax", kmax);
    rep.input("per_decade", cfg.per_decade);
    rep.input("window", format!("[{}, {}]", cfg.window.0, cfg.window.1));
    rep.input("max_gap", cfg.max_gap);
    rep.input("threshold", &cfg.threshold);
    rep.note("admissible", adm.admissible());
    if !adm.admissible() {
        rep.note("test_scale", adm.failures.join("; "));
    }

    let domain = Domain::from_weights(build_weights(v, None)?)?;
    let mut ks: Vec<u64> = distance::k_schedule(kmax, cfg.per_decade).into_iter().filter(|&k| k >= kmin).collect();
    if kmin <= kmax && ks.first() != Some(&kmin) {
        ks.insert(0, kmin);
    }
    if let Some((k, _)) = &cfg.anchor {
        if (kmin..=kmax).contains(k) && !ks.contains(k) {
            ks.push(*k);
            ks.sort_unstable();
        }
    }
    let results: Vec<(u64, std::result::Result<CapacityResult, EchError>)> =
        ks.par_iter().map(|&k| (k, domain.capacity(k, &cfg.capacity))).collect();
    let (mut in_window, mut gaps_ok, mut failures) = (true, true, Vec::new());
    let (mut rmin, mut rmax, mut worst_gap) = (f64::INFINITY, 0f64, 0f64);
    for (k, res) in results {
        let c = match res {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("k = {k}: {e}"));
                continue;
            }
        };
        let s = (k as f64 * bm.to_f64()).sqrt();
        let (lo, hi) = (c.best.to_f64() / s, c.upper.to_f64() / s);
        let gap = c.relative_gap();
        rmin = rmin.min(lo);
        rmax = rmax.max(hi);
        worst_gap = worst_gap.max(gap);
        in_window &= lo >= cfg.window.0 && hi <= cfg.window.1;
        gaps_ok &= gap <= cfg.max_gap;
        rep.rows.push(vec![
            k.to_string(),
            num(&c.best),
            den(&c.best),
            lo.to_string(),
            c.exact.to_string(),
            gap.to_string(),
            hi.to_string(),
        ]);
    }
    rep.note("ratio_min", rmin);
    rep.note("ratio_max", rmax);
    rep.note("worst_gap", worst_gap);
    rep.note("evaluated", rep.rows.len());
    if !failures.is_empty() {
        rep.note("skipped", failures.join("; "));
    }
    rep.verdicts.push(Verdict::new("ratio_window", in_window, format!("ratios span [{rmin}, {rmax}]")));
    rep.verdicts.push(Verdict::new("gap", gaps_ok, format!("worst relative gap {worst_gap}")));
    rep.verdicts.push(Verdict::new("complete", failures.is_empty(), format!("{} indices skipped", failures.len())));
    if let Some((k, expect)) = &cfg.anchor {
        if (kmin..=kmax).contains(k) {
            let row = rep.rows.iter().find(|r| r[0] == k.to_string());
            let ok = row.is_some_and(|r| r[1] == num(expect) && r[2] == den(expect) && r[4] == "true");
            rep.verdicts.push(Verdict::new("anchor", ok, format!("c_{k} = {expect}")));
        }
    }
    Ok(rep)
}

fn params_text(v: &ParameterVector) -> String {
    v.values().iter().map(|b| b.to_string()).collect::<Vec<_>>().join(",")
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ChedConfig {
    pub eps: Scalar,
    pub volume: Scalar,
    pub k0_max: u64,
    /// Constant in the Weyl-side quantity `√(V·k₀) / C`.
    pub weyl_constant: f64,
    pub capacity: CapacityConfig,
    pub weights: WeightConfig,
}

impl Default for ChedConfig {
    fn default() -> Self {
        ChedConfig {
            eps: Scalar::from_ratio(1, 1024),
            volume: Scalar::from_integer(1000),
            k0_max: 100,
            weyl_constant: 1.0,
            capacity: CapacityConfig::default(),
            weights: WeightConfig::default(),
        }
    }
}

/// `{1 × 1, ε × m}` with `m` the least count giving area at least `V`.
pub fn ched_weights(eps: &Scalar, volume: &Scalar) -> Result<WeightMultiset> {
    let half = Scalar::from_ratio(1, 2);
    let rest = volume.checked_sub(&half).ok_or_else(|| EchError::InvalidDomain("volume must exceed 1/2".into()))?;
    let two = Scalar::from_integer(2);
    let m = (&(&two * &rest) / &(eps * eps)).as_rational().ceil().to_integer();
    let m = m.to_biguint().expect("nonnegative");
    WeightMultiset::new([(Scalar::one(), 1u32.into()), (eps.clone(), m)])
}

/// Checks `c_{k₀}(X) ≤ c_{k₀}(B(1)) + 1` on the weight model of the warm-up
/// domain.
pub fn run_ched_warmup(cfg: &ChedConfig) -> Result<RunReport> {
    if cfg.eps.is_zero() || cfg.eps >= Scalar::one() {
        return Err(EchError::InvalidDomain("need 0 < eps < 1".into()));
    }
    if cfg.volume <= Scalar::one() {
        return Err(EchError::InvalidDomain("need V > 1".into()));
    }
    let w = ched_weights(&cfg.eps, &cfg.volume)?;
    let area = w.area();
    let mut rep =
        RunReport::new("ched", &["k0", "c_x_num", "c_x_den", "c_ball_num", "c_ball_den", "holds", "weyl_side"]);
    rep.input("eps", &cfg.eps);
    rep.input("volume", &cfg.volume);
    rep.input("k0_max", cfg.k0_max);
    rep.input("weyl_constant", cfg.weyl_constant);
    rep.note("weights", serde_json::to_string(&w).expect("serializable"));
    rep.note("area", &area);
    match realize_with(&w, &cfg.weights) {
        Ok(p) => rep.note("profile", serde_json::to_string(&p).expect("serializable")),
        Err(e) => rep.note("profile", format!("not realized: {e}")),
    }
    let domain = Domain::from_weights(w)?;
    let rows: Vec<Result<(u64, CapacityResult)>> =
        (0..=cfg.k0_max).into_par_iter().map(|k| Ok((k, domain.capacity(k, &cfg.capacity)?))).collect();
    let mut all = true;
    let mut window = Vec::new();
    for r in rows {
        let (k, c) = r?;
        let ball = ball_capacity(&Scalar::one(), k);
        let bound = &ball + &Scalar::one();
        let holds = c.exact && c.best <= bound;
        all &= holds;
        let weyl = (cfg.volume.to_f64() * k as f64).sqrt() / cfg.weyl_constant;
        if weyl > bound.to_f64() {
            window.push(k);
        }
        rep.rows.push(vec![
            k.to_string(),
            num(&c.best),
            den(&c.best),
            num(&ball),
            den(&ball),
            holds.to_string(),
            weyl.to_string(),
        ]);
    }
    rep.note("weyl_exceeds_bound_from_k0", window.first().map_or("none".to_string(), |k| k.to_string()));
    let hi = &cfg.volume + &Scalar::one();
    rep.verdicts.push(Verdict::new("inequality", all, "c_k0(X) <= c_k0(B(1)) + 1 for every k0"));
    rep.verdicts.push(Verdict::new("area", area >= cfg.volume && area <= hi, format!("area {area}")));
    Ok(rep)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct NotsameConfig {
    pub eps: Scalar,
    pub kmax: u64,
    pub slack: f64,
    pub capacity: CapacityConfig,
    pub weights: WeightConfig,
}

impl NotsameConfig {
    pub fn new(eps: Scalar) -> Self {
        NotsameConfig {
            eps,
            kmax: 2000,
            slack: 0.01,
            capacity: CapacityConfig::default(),
            weights: WeightConfig::default(),
        }
    }
}

/// The domain with weights `B(1) ⊔ E(ε, 1/ε)`, realized as a moment profile.
pub fn notsame_domain(eps: &Scalar, cfg: &WeightConfig) -> Result<Domain> {
    let e = Ellipsoid::new(eps.clone(), eps.recip()?)?;
    let w = WeightMultiset::ball(Scalar::one())?.union(&ellipsoid_weights(&e));
    let p = realize_with(&w, cfg)?;
    Ok(Domain::Concave { weights: w, profile: Some(p) })
}

/// Inclusion distance against capacity ratios for `B(1)` and `X₂(ε)`.
pub fn run_notsame(cfg: &NotsameConfig) -> Result<RunReport> {
    let x2 = notsame_domain(&cfg.eps, &cfg.weights)?;
    let ball = Domain::Ball(Scalar::one());
    let incl = distance::inclusion_distance(&ball, &x2, &cfg.weights)?;
    let expect = &Scalar::one() + &cfg.eps.recip()?;
    let mut rep = RunReport::new("notsame", &["k", "c_x2_num", "c_x2_den", "c_ball_num", "c_ball_den", "log_ratio"]);
    rep.input("eps", &cfg.eps);
    rep.input("kmax", cfg.kmax);
    rep.input("slack", cfg.slack);
    rep.note("profile", serde_json::to_string(&x2.profile(&cfg.weights)?).expect("serializable"));
    rep.note("scale_ball_in_x2", &incl.scale_uv);
    rep.note("scale_x2_in_ball", &incl.scale_vu);
    rep.note("d_i", incl.value);

    let caps: Vec<Result<(u64, CapacityResult)>> =
        (1..=cfg.kmax).into_par_iter().map(|k| Ok((k, x2.capacity(k, &cfg.capacity)?))).collect();
    let mut sup = 0f64;
    let mut witness = 0;
    for r in caps {
        let (k, c) = r?;
        let b = ball_capacity(&Scalar::one(), k);
        // conservative: the upper end of the X₂ enclosure
        let lr = hp::abs_ln(&(c.upper.as_rational() / b.as_rational()), hp::DEFAULT_PRECISION).hi_f64();
        let lr = if c.upper >= b { lr } else { -lr };
        if lr > sup {
            sup = lr;
            witness = k;
        }
        rep.rows.push(vec![k.to_string(), num(&c.upper), den(&c.upper), num(&b), den(&b), lr.to_string()]);
    }
    rep.note("capacity_sup", sup);
    rep.note("capacity_sup_k", witness);
    let limit = std::f64::consts::LN_2 + cfg.slack;
    rep.verdicts.push(Verdict::new(
        "inclusion_exact",
        *incl.max_scale() == expect,
        format!("max inclusion scale {} vs 1 + 1/eps = {expect}", incl.max_scale()),
    ));
    rep.verdicts.push(Verdict::new("capacity_sup", sup <= limit, format!("sup {sup} <= ln 2 + {}", cfg.slack)));
    rep.verdicts.push(Verdict::new("ordering", incl.value >= sup, format!("d_I {} >= sup {sup}", incl.value)));
    Ok(rep)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct WeylConfig {
    pub domain: Domain,
    pub label: String,
    pub ks: Vec<u64>,
    pub tolerance: f64,
    pub capacity: CapacityConfig,
}

/// `c_k² / (4k·area)` along `ks`; the verdict applies to the largest `k`.
pub fn run_weyl(cfg: &WeylConfig) -> Result<RunReport> {
    let mut rep = RunReport::new("weyl", &["k", "c_k_num", "c_k_den", "exact", "weyl_ratio"]);
    rep.input("domain", &cfg.label);
    rep.input("tolerance", cfg.tolerance);
    let area = cfg.domain.area();
    rep.note("area", &area);
    let caps: Vec<Result<(u64, CapacityResult)>> =
        cfg.ks.par_iter().filter(|&&k| k > 0).map(|&k| Ok((k, cfg.domain.capacity(k, &cfg.capacity)?))).collect();
    let mut last = None;
    for r in caps {
        let (k, c) = r?;
        let ratio = weyl_ratio(&c.best, k, &area)?;
        last = Some((k, ratio));
        rep.rows.push(vec![k.to_string(), num(&c.best), den(&c.best), c.exact.to_string(), ratio.to_string()]);
    }
    let (k, ratio) = last.ok_or_else(|| EchError::InvalidDomain("no positive k to evaluate".into()))?;
    rep.verdicts.push(Verdict::new(
        "weyl",
        (ratio - 1.0).abs() <= cfg.tolerance,
        format!("|ratio - 1| = {} at k = {k}", (ratio - 1.0).abs()),
    ));
    Ok(rep)
}

// ---------------------------------------------------------------------------

/// `x_i = (i − 50) / 5` for `i < 100`: the one-dimensional chart grid.
pub fn chart_grid() -> Vec<Vec<BigRational>> {
    (0..100i64).map(|i| vec![BigRational::new(BigInt::from(i - 50), BigInt::from(5))]).collect()
}

/// `count` points in `[-10, 10]^n` on the lattice `Z/5`, from `seed`.
pub fn random_points(n: usize, count: usize, seed: u64) -> Vec<Vec<BigRational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| BigRational::new(BigInt::from(rng.gen_range(-50i64..=50)), BigInt::from(5))).collect())
        .collect()
}

#[derive(Clone, Debug)]
pub struct ChartConfig {
    pub points: Vec<Vec<BigRational>>,
    pub mode: SnapMode,
    pub precision: usize,
    pub max_a: f64,
    pub max_b: f64,
    pub max_snap: f64,
}

impl Default for ChartConfig {
    fn default() -> Self {
        ChartConfig {
            points: chart_grid(),
            mode: SnapMode::Exact,
            precision: hp::DEFAULT_PRECISION,
            max_a: 8.0,
            max_b: 3.0,
            max_snap: 0.1,
        }
    }
}

fn sup_distance(x: &[BigRational], y: &[BigRational]) -> f64 {
    let d = x.iter().zip(y).map(|(a, b)| (a - b).abs()).max().unwrap_or_default();
    Scalar::from_rational(d).expect("absolute value").to_f64()
}

/// Pushes a grid through the chart and fits the quasi-isometry constants
/// over all pairs of grid points.
pub fn run_chart(cfg: &ChartConfig) -> Result<RunReport> {
    let pts: Vec<ChartPoint> =
        cfg.points.par_iter().map(|x| chart_embed(x, cfg.mode, cfg.precision)).collect::<Result<_>>()?;
    let mut rep = RunReport::new("chart", &["x", "y", "b", "snap_error"]);
    rep.input("points", cfg.points.len());
    rep.input("mode", format!("{:?}", cfg.mode).to_lowercase());
    rep.input("precision", cfg.precision);
    let join = |v: Vec<String>| v.join(";");
    let mut worst_snap = 0f64;
    for p in &pts {
        worst_snap = p.snap_error.iter().copied().fold(worst_snap, f64::max);
        rep.rows.push(vec![
            join(p.x.clone()),
            join(p.y.iter().map(|s| s.to_string()).collect()),
            join(p.b.values().iter().map(|s| s.to_string()).collect()),
            join(p.snap_error.iter().map(|e| e.to_string()).collect()),
        ]);
    }
    let pairs: Vec<(usize, usize)> = (0..pts.len()).flat_map(|i| (i + 1..pts.len()).map(move |j| (i, j))).collect();
    let samples: Vec<(f64, f64, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let d = sup_distance(&cfg.points[i], &cfg.points[j]);
            let t = parameter_distance(&pts[i].b, &pts[j].b, cfg.precision)?.mid_f64();
            Ok((d, t, t))
        })
        .collect::<Result<_>>()?;
    let fit = fit_sandwich(&samples);
    rep.note("pairs", samples.len());
    rep.note("fit_a", fit.a);
    rep.note("fit_b", fit.b);
    rep.note("worst_snap_error", worst_snap);
    rep.verdicts.push(Verdict::new(
        "sandwich",
        fit.a <= cfg.max_a && fit.b <= cfg.max_b,
        format!("A = {}, B = {}", fit.a, fit.b),
    ));
    if cfg.mode == SnapMode::Exact {
        rep.verdicts.push(Verdict::new("snap_error", worst_snap <= cfg.max_snap, format!("worst {worst_snap}")));
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct CertificateConfig {
    /// Source points; every ordered pair is certified.
    pub points: Vec<Vec<BigRational>>,
    pub policy: KPolicy,
    pub precision: usize,
    pub max_a: f64,
    pub capacity: CapacityConfig,
    pub weights: WeightConfig,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        CertificateConfig {
            points: distance::canonical_grid().into_iter().map(|x| vec![x]).collect(),
            policy: KPolicy::default(),
            precision: hp::DEFAULT_PRECISION,
            max_a: 8.0,
            capacity: CapacityConfig::default(),
            weights: WeightConfig::default(),
        }
    }
}

/// Distance bounds for every ordered pair of charted grid points.
pub fn run_certificate(cfg: &CertificateConfig) -> Result<RunReport> {
    let charted: Vec<ParameterVector> =
        cfg.points.par_iter().map(|x| Ok(chart_embed(x, SnapMode::Exact, cfg.precision)?.b)).collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for v in &charted {
        for w in &charted {
            pairs.push((v.clone(), w.clone()));
        }
    }
    let cert = certificate(&pairs, &cfg.policy, &cfg.capacity, &cfg.weights)?;
    let mut rep = RunReport::new(
        "certificate",
        &[
            "pair",
            "norm",
            "lower",
            "upper",
            "witness_k",
            "gap",
            "norm_hi",
            "dimension",
            "lower_capacity",
            "lower_volume",
            "upper_inclusion",
            "v",
            "w",
            "skipped",
        ],
    );
    rep.input("points", cfg.points.len());
    rep.input("k_cap", cfg.policy.cap);
    rep.input("per_decade", cfg.policy.per_decade);
    rep.input("max_a", cfg.max_a);
    let (mut lower_ok, mut upper_ok, mut skipped) = (true, true, 0);
    for row in &cert.rows {
        let (lower, upper, witness) = match &row.report {
            Some(r) => (
                r.lower.to_string(),
                r.upper.map_or(String::new(), |u| u.to_string()),
                r.lower_capacity.witness_k.map_or(String::new(), |k| k.to_string()),
            ),
            None => {
                skipped += 1;
                (String::new(), String::new(), String::new())
            }
        };
        if let Some(r) = &row.report {
            lower_ok &= r.lower >= row.norm / 4.0 - 2.0;
            let factor = row.v.len() as f64 / 2.0 + 1.0;
            upper_ok &= r.upper.is_some_and(|u| u <= factor * row.norm_hi + 1.0);
        }
        rep.rows.push(vec![
            row.id.to_string(),
            row.norm.to_string(),
            lower,
            upper,
            witness,
            row.gap().map_or(String::new(), |g| g.to_string()),
            row.norm_hi.to_string(),
            row.v.len().to_string(),
            row.report.as_ref().map_or(String::new(), |r| r.lower_capacity.value.to_string()),
            row.report.as_ref().map_or(String::new(), |r| r.lower_volume.to_string()),
            row.report.as_ref().and_then(|r| r.upper_inclusion.as_ref()).map_or(String::new(), |b| b.value.to_string()),
            params_text(&row.v),
            params_text(&row.w),
            row.skipped.clone().unwrap_or_default(),
        ]);
    }
    rep.note("skipped", skipped);
    if let Some(f) = cert.fit {
        rep.note("fit_a", f.a);
        rep.note("fit_b", f.b);
    }
    rep.verdicts.push(Verdict::new("consistent", cert.consistent, "lower <= upper on every pair"));
    rep.verdicts.push(Verdict::new("lower_bound", lower_ok, "lower >= norm/4 - 2"));
    rep.verdicts.push(Verdict::new("upper_bound", upper_ok, "upper <= (N/2 + 1) norm + 1"));
    rep.verdicts.push(Verdict::new("complete", skipped == 0, format!("{skipped} pairs skipped")));
    let a = cert.fit.map_or(f64::INFINITY, |f| f.a);
    rep.verdicts.push(Verdict::new("fit", a <= cfg.max_a, format!("A = {a}")));
    Ok(rep)
}

// ---------------------------------------------------------------------------

/// Capacity bounds and inclusion distance of two domains.
pub fn run_distance(
    u: &Domain,
    v: &Domain,
    params: Option<(&ParameterVector, &ParameterVector)>,
    kmax: u64,
    per_decade: u32,
    ccfg: &CapacityConfig,
    wcfg: &WeightConfig,
) -> Result<RunReport> {
    let ks = distance::k_schedule(kmax, per_decade);
    let r = distance::distance_report(u, v, &ks, params, ccfg, wcfg)?;
    let mut rep = RunReport::new("distance", &["bound", "value", "witness"]);
    rep.input("kmax", kmax);
    rep.input("per_decade", per_decade);
    let witness = r.lower_capacity.witness_k.map_or(String::new(), |k| format!("k={k}"));
    rep.rows.push(vec!["lower_capacity".into(), r.lower_capacity.value.to_string(), witness]);
    rep.rows.push(vec!["lower_volume".into(), r.lower_volume.to_string(), String::new()]);
    if let Some(b) = &r.upper_inclusion {
        rep.rows.push(vec!["upper_inclusion".into(), b.value.to_string(), format!("{};{}", b.scale_uv, b.scale_vu)]);
    }
    if let Some(l) = r.upper_lemma {
        rep.rows.push(vec!["upper_lemma".into(), l.to_string(), String::new()]);
    }
    rep.note("lower", r.lower);
    rep.note("upper", r.upper.map_or("none".to_string(), |u| u.to_string()));
    rep.verdicts.push(Verdict::new("consistent", r.consistent, "lower <= upper"));
    Ok(rep)
}

/// `c_k` for each requested `k`, exact or as an interval.
pub fn run_capacity(domain: &Domain, ks: &[u64], cfg: &CapacityConfig) -> Result<RunReport> {
    let mut rep =
        RunReport::new("capacity", &["k", "c_k_num", "c_k_den", "exact", "gap", "upper_num", "upper_den", "engine"]);
    rep.input("indices", ks.len());
    rep.note("area", domain.area());
    let caps: Vec<Result<(u64, CapacityResult)>> = ks.par_iter().map(|&k| Ok((k, domain.capacity(k, cfg)?))).collect();
    for r in caps {
        let (k, c) = r?;
        let engine = serde_json::to_value(c.engine).expect("serializable");
        rep.rows.push(vec![
            k.to_string(),
            num(&c.best),
            den(&c.best),
            c.exact.to_string(),
            c.relative_gap().to_string(),
            num(&c.upper),
            den(&c.upper),
            engine.as_str().unwrap_or_default().to_string(),
        ]);
    }
    Ok(rep)
}
