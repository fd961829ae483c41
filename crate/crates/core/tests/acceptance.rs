//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toric_ech::capacity::{
    ball_capacity, ellipsoid_capacity, multiset_capacity_fast, multiset_capacity_oracle, weyl_ratio, CapacityConfig,
};
use toric_ech::distance::k_schedule;
use toric_ech::experiments::{self as ex, RunReport};
use toric_ech::hp;
use toric_ech::quasiflat::{build_weights, chart_embed, inverse_linear, map_linear, q_metric, SnapMode};
use toric_ech::{ellipsoid_weights, realize, weight_expansion, Ellipsoid, Scalar};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cfg() -> CapacityConfig {
    CapacityConfig::default()
}

fn column(rep: &RunReport, name: &str) -> usize {
    rep.column(name).unwrap_or_else(|| panic!("missing column {name}"))
}

fn cell_f64(rep: &RunReport, row: &[String], name: &str) -> f64 {
    row[column(rep, name)].parse().unwrap()
}

fn cell_scalar(rep: &RunReport, row: &[String], num: &str, den: &str) -> Scalar {
    format!("{}/{}", row[column(rep, num)], row[column(rep, den)]).parse().unwrap()
}

fn ball_formula() -> Outcome {
    let seq = ball_sequence(10_001);
    for (k, d) in seq.iter().enumerate() {
        let c = ball_capacity(&Scalar::one(), k as u64);
        ensure(c == int(*d), || format!("c_{k}(B(1)) = {c}, sequence gives {d}"))?;
    }
    Ok("k <= 10^4 exact".into())
}

fn ellipsoid_engine() -> Outcome {
    for (a, b) in [(1, 1), (1, 2), (2, 3), (1, 5), (3, 7)] {
        let e = Ellipsoid::new(int(a), int(b)).unwrap();
        let seq = ellipsoid_sequence(&int(a), &int(b), 2001);
        for (k, v) in seq.iter().enumerate() {
            let c = ellipsoid_capacity(&e, k as u64, &cfg()).map_err(|e| e.to_string())?;
            ensure(&c == v, || format!("E({a},{b}) k={k}: {c} vs {v}"))?;
        }
    }
    Ok("5 ellipsoids, k <= 2000 exact".into())
}

fn weights_determine_capacities() -> Outcome {
    let grid = [(1, 1), (3, 2), (2, 1), (5, 2), (7, 3)];
    let mut cases = Vec::new();
    for (i, a) in grid.iter().enumerate() {
        for b in &grid[i..] {
            cases.push((s(a.0, a.1), s(b.0, b.1)));
        }
    }
    cases.extend([
        (s(1, 3), s(5, 4)),
        (s(2, 5), s(9, 2)),
        (s(1, 7), s(3, 1)),
        (s(4, 3), s(11, 5)),
        (s(1, 2), s(13, 3)),
    ]);
    ensure(cases.len() == 20, || format!("{} cases", cases.len()))?;
    for (a, b) in cases {
        let e = Ellipsoid::new(a, b).unwrap();
        let w = ellipsoid_weights(&e);
        for k in 0..=500 {
            let x = ellipsoid_capacity(&e, k, &cfg()).map_err(|e| e.to_string())?;
            let y = multiset_capacity_oracle(&w, k, &cfg()).map_err(|e| e.to_string())?.best;
            ensure(x == y, || format!("{e:?} k={k}: {x} vs {y}"))?;
        }
    }
    Ok("20 ellipsoids, k <= 500 exact".into())
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..200 {
        let w = random_multiset(&mut rng, 12, 20);
        let p = realize(&w).map_err(|e| e.to_string())?;
        let back = weight_expansion(&p).map_err(|e| e.to_string())?.0;
        ensure(back == w, || format!("case {i}: {w:?} -> {back:?}"))?;
    }
    Ok("200 random multisets".into())
}

fn fast_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..500 {
        let w = random_multiset(&mut rng, 6, 400);
        let k = rng.gen_range(0..=100_000u64);
        let o = multiset_capacity_oracle(&w, k, &cfg()).map_err(|e| e.to_string())?;
        let f = multiset_capacity_fast(&w, k, &cfg()).map_err(|e| e.to_string())?;
        ensure(f.exact && f.best == o.best, || {
            format!("case {i} k={k}: fast {} ({}) vs oracle {}", f.best, f.exact, o.best)
        })?;
    }
    let mut worst = 0f64;
    let mut count = 0;
    let mut vectors = vec![toric_ech::quasiflat::ParameterVector::from_integers(&[64, 4096]).unwrap()];
    for x in toric_ech::distance::canonical_grid() {
        vectors.push(chart_embed(&[x], SnapMode::Exact, hp::DEFAULT_PRECISION).map_err(|e| e.to_string())?.b);
    }
    for v in vectors {
        let w = build_weights(&v, None).map_err(|e| e.to_string())?;
        for k in k_schedule(10_000_000_000, 8).into_iter().filter(|&k| 2 * k > cfg().oracle_limit) {
            let f = multiset_capacity_fast(&w, k, &cfg()).map_err(|e| e.to_string())?;
            worst = worst.max(f.relative_gap());
            count += 1;
        }
    }
    ensure(worst <= 0.05, || format!("relative gap {worst}"))?;
    Ok(format!("500 random instances exact; {count} large instances, worst gap {worst}"))
}

fn weyl_law() -> Outcome {
    let b = weyl_ratio(&ball_capacity(&Scalar::one(), 10_000), 10_000, &s(1, 2)).map_err(|e| e.to_string())?;
    let e = Ellipsoid::new(int(1), int(2)).unwrap();
    let c = ellipsoid_capacity(&e, 2000, &cfg()).map_err(|e| e.to_string())?;
    let r = weyl_ratio(&c, 2000, &e.area()).map_err(|e| e.to_string())?;
    ensure((b - 1.0).abs() <= 0.05, || format!("B(1): {b}"))?;
    ensure((r - 1.0).abs() <= 0.1, || format!("E(1,2): {r}"))?;
    Ok(format!("B(1) {b:.4} at 10^4, E(1,2) {r:.4} at 2000"))
}

fn lemma_cap() -> Outcome {
    let rep = ex::run_lemma_cap_sweep(&ex::LemmaCapConfig::canonical()).map_err(|e| e.to_string())?;
    let (mut lo, mut hi) = (f64::INFINITY, 0f64);
    let mut anchor = false;
    for row in &rep.rows {
        let k: u64 = row[0].parse().unwrap();
        let c = cell_scalar(&rep, row, "c_k_num", "c_k_den");
        let gap = cell_f64(&rep, row, "gap");
        let r = c.to_f64() / (64.0 * k as f64).sqrt();
        lo = lo.min(r);
        hi = hi.max(r * (1.0 + gap));
        if k == 4096 {
            anchor = c == int(512) && row[column(&rep, "exact")] == "true";
        }
    }
    ensure(rep.rows.len() > 100, || format!("only {} rows", rep.rows.len()))?;
    ensure(anchor, || "c_4096 != 512".into())?;
    ensure(lo >= 0.25 && hi <= 4.0, || format!("ratios in [{lo}, {hi}]"))?;
    ensure(rep.passed(), || format!("{:?}", rep.verdicts))?;
    Ok(format!("{} indices, ratio in [{lo:.4}, {hi:.4}], c_4096 = 512", rep.rows.len()))
}

fn certificate() -> Outcome {
    let rep = ex::run_certificate(&ex::CertificateConfig::default()).map_err(|e| e.to_string())?;
    ensure(rep.rows.len() == 25, || format!("{} pairs", rep.rows.len()))?;
    for row in &rep.rows {
        let (norm, norm_hi) = (cell_f64(&rep, row, "norm"), cell_f64(&rep, row, "norm_hi"));
        let (lower, upper) = (cell_f64(&rep, row, "lower"), cell_f64(&rep, row, "upper"));
        ensure(lower >= norm / 4.0 - 2.0, || format!("pair {}: lower {lower}, norm {norm}", row[0]))?;
        ensure(upper <= 2.0 * norm_hi + 1.0, || format!("pair {}: upper {upper}, norm {norm_hi}", row[0]))?;
        ensure(lower <= upper, || format!("pair {}: {lower} > {upper}", row[0]))?;
    }
    ensure(rep.passed(), || format!("{:?}", rep.verdicts))?;
    Ok(format!("25 pairs; fitted A = {}, B = {}", rep.summary["fit_a"], rep.summary["fit_b"]))
}

fn notsame() -> Outcome {
    let mut out = Vec::new();
    for d in [4u64, 8, 16] {
        let rep = ex::run_notsame(&ex::NotsameConfig::new(s(1, d))).map_err(|e| e.to_string())?;
        let big: Scalar = rep.summary["scale_ball_in_x2"].parse().unwrap();
        let small: Scalar = rep.summary["scale_x2_in_ball"].parse().unwrap();
        ensure(big.clone().max(small) == int(d + 1), || format!("eps = 1/{d}: scale {big}"))?;
        let d_i: f64 = rep.summary["d_i"].parse().unwrap();
        ensure((d_i - ((d + 1) as f64).ln()).abs() < 1e-12, || format!("d_I = {d_i}"))?;
        let mut sup = 0f64;
        for row in &rep.rows {
            let x2 = cell_scalar(&rep, row, "c_x2_num", "c_x2_den");
            let b = cell_scalar(&rep, row, "c_ball_num", "c_ball_den");
            sup = sup.max((x2.to_f64() / b.to_f64()).ln());
        }
        ensure(rep.rows.len() == 2000, || format!("{} rows", rep.rows.len()))?;
        ensure(sup <= std::f64::consts::LN_2 + 0.01, || format!("eps = 1/{d}: sup {sup}"))?;
        out.push(format!("1/{d}: d_I = ln {}, sup {sup:.4}", d + 1));
    }
    Ok(out.join("; "))
}

fn warm_up() -> Outcome {
    let rep = ex::run_ched_warmup(&ex::ChedConfig::default()).map_err(|e| e.to_string())?;
    let seq = ball_sequence(101);
    ensure(rep.rows.len() == 101, || format!("{} rows", rep.rows.len()))?;
    for row in &rep.rows {
        let k: usize = row[0].parse().unwrap();
        let x = cell_scalar(&rep, row, "c_x_num", "c_x_den");
        ensure(x <= int(seq[k] + 1), || format!("k0 = {k}: {x} > {} + 1", seq[k]))?;
    }
    ensure(rep.passed(), || format!("{:?}", rep.verdicts))?;
    Ok("k0 <= 100 exact".into())
}

fn q(r: &BigRational) -> Scalar {
    Scalar::from_rational(r.clone()).unwrap()
}

fn change_of_variables() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut image_checks = 0;
    for i in 0..1000 {
        let n = rng.gen_range(1..=3) * 2;
        let x: Vec<Scalar> = (0..n).map(|_| s(rng.gen_range(1..200), rng.gen_range(1..20))).collect();
        let y = map_linear(&x).map_err(|e| e.to_string())?;
        let back = inverse_linear(&y).map_err(|e| e.to_string())?;
        ensure(back == x, || format!("point {i} does not round-trip"))?;
        if x.iter().all(|v| *v >= int(3)) {
            image_checks += 1;
            ensure(y[0] >= int(6), || format!("point {i}: y_1 = {}", y[0]))?;
            for j in 0..y.len() - 1 {
                ensure(y[j + 1] >= &y[j] * &int(2) && &y[j] * &int(2) >= int(12), || format!("point {i} at {j}"))?;
            }
        }
    }
    // exponent stage against the exact sup distance
    let p = hp::DEFAULT_PRECISION;
    for i in 0..200 {
        let y: Vec<Scalar> = (0..2).map(|_| s(rng.gen_range(0..4000), rng.gen_range(1..100))).collect();
        let z: Vec<Scalar> = (0..2).map(|_| s(rng.gen_range(0..4000), rng.gen_range(1..100))).collect();
        let ey: Vec<Scalar> = y.iter().map(|v| hp::exp_scalar(v, p)).collect();
        let ez: Vec<Scalar> = z.iter().map(|v| hp::exp_scalar(v, p)).collect();
        let iv = q_metric(&ey, &ez, p).map_err(|e| e.to_string())?;
        let exact = y
            .iter()
            .zip(&z)
            .map(|(a, b)| (a.as_rational() - b.as_rational()).abs())
            .max()
            .unwrap_or_else(BigRational::zero);
        let tol = hp::to_rational(&hp::ulps(2, p, &hp::from_rational(&exact, p, astro_float::RoundingMode::Up)));
        let (lo, hi) = (hp::to_rational(&iv.lo), hp::to_rational(&iv.hi));
        ensure((&lo - &exact).abs() <= tol && (&hi - &exact).abs() <= tol, || {
            format!("sample {i}: |{} - {}| beyond 2 ulps", iv.mid_f64(), q(&exact).to_f64())
        })?;
    }
    let rep = ex::run_chart(&ex::ChartConfig::default()).map_err(|e| e.to_string())?;
    let a: f64 = rep.summary["fit_a"].parse().unwrap();
    let b: f64 = rep.summary["fit_b"].parse().unwrap();
    ensure(a <= 8.0 && b <= 3.0, || format!("A = {a}, B = {b}"))?;
    ensure(rep.passed(), || format!("{:?}", rep.verdicts))?;
    Ok(format!("1000 round trips, {image_checks} image checks, 200 isometry samples; chart A = {a:.3}, B = {b:.3}"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 11] = [
        ("ball formula", Duration::from_secs(1), ball_formula),
        ("ellipsoid engine", Duration::from_secs(30), ellipsoid_engine),
        ("weights determine capacities", Duration::from_secs(60), weights_determine_capacities),
        ("round trip", Duration::from_secs(60), round_trip),
        ("fast vs oracle", Duration::from_secs(300), fast_vs_oracle),
        ("weyl law", Duration::from_secs(10), weyl_law),
        ("capacity growth sweep", Duration::from_secs(300), lemma_cap),
        ("quasi-flat certificate", Duration::from_secs(600), certificate),
        ("inclusion vs capacities", Duration::from_secs(120), notsame),
        ("warm-up inequality", Duration::from_secs(60), warm_up),
        ("change of variables", Duration::from_secs(60), change_of_variables),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(m) if took > *limit => Err(format!("{m}; took {took:.2?} > {limit:?}")),
            o => o,
        };
        match outcome {
            Ok(m) => println!("[PASS] {:>2}. {name} ({took:.2?}): {m}", i + 1),
            Err(m) => {
                failed += 1;
                println!("[FAIL] {:>2}. {name} ({took:.2?}): {m}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
