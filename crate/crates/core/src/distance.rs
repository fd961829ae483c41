//! Lower and upper bounds on the symplectic Banach–Mazur distance of toric
//! domains, and certificates for quasi-flat grids.
//!
//! Lower bounds come from capacities (an embedding `U → T·V` forces
//! `c_k(U) ≤ T·c_k(V)`) and from volume. Upper bounds come from moment-plane
//! inclusions and from the scaling estimate `(N/2 + 1)·‖v, w‖ + 1` for
//! quasi-flat domains.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{CapacityConfig, CapacityResult};
use crate::domain::Domain;
use crate::error::{EchError, Result};
use crate::geometry::inclusion_scale;
use crate::hp;
use crate::quasiflat::{build_weights, parameter_distance, ParameterVector};
use crate::scalar::Scalar;
use crate::weights::WeightConfig;

/// `k = 1, …` log-spaced with `per_decade` samples per factor of ten, up to
/// and including `kmax`.
pub fn k_schedule(kmax: u64, per_decade: u32) -> Vec<u64> {
    let mut ks = Vec::new();
    let mut j = 0u32;
    loop {
        let k = 10f64.powf(j as f64 / per_decade as f64).round() as u64;
        if k > kmax {
            break;
        }
        if ks.last() != Some(&k) {
            ks.push(k);
        }
        j += 1;
    }
    if kmax >= 1 && ks.last() != Some(&kmax) {
        ks.push(kmax);
    }
    ks
}

/// Conservative `|ln(c_k(U) / c_k(V))|` from two capacity enclosures: the
/// smallest log-ratio consistent with both intervals.
pub fn capacity_gap(u: &CapacityResult, v: &CapacityResult) -> Result<f64> {
    let ratio_lb = |num: &Scalar, den: &Scalar| -> Option<f64> {
        if num.is_zero() || den.is_zero() || num <= den {
            return None;
        }
        Some(hp::abs_ln(&(num.as_rational() / den.as_rational()), hp::DEFAULT_PRECISION).lo_f64())
    };
    if (u.upper.is_zero() && !v.best.is_zero()) || (v.upper.is_zero() && !u.best.is_zero()) {
        return Err(EchError::InvalidDomain("capacity vanishes on one side only".into()));
    }
    let a = ratio_lb(&u.best, &v.upper).unwrap_or(0.0);
    let b = ratio_lb(&v.best, &u.upper).unwrap_or(0.0);
    Ok(a.max(b))
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityBound {
    pub value: f64,
    pub witness_k: Option<u64>,
    /// Indices whose capacities were only known as intervals.
    pub inexact_ks: usize,
}

/// `max_k |ln(c_k(U)/c_k(V))|` over the given indices, `k ≥ 1`.
pub fn capacity_lower_bound(u: &Domain, v: &Domain, ks: &[u64], cfg: &CapacityConfig) -> Result<CapacityBound> {
    let rows: Vec<(u64, CapacityResult, CapacityResult)> = ks
        .par_iter()
        .filter(|&&k| k >= 1)
        .map(|&k| Ok((k, u.capacity(k, cfg)?, v.capacity(k, cfg)?)))
        .collect::<Result<_>>()?;
    bound_from_rows(&rows)
}

fn bound_from_rows(rows: &[(u64, CapacityResult, CapacityResult)]) -> Result<CapacityBound> {
    let mut best = CapacityBound { value: 0.0, witness_k: None, inexact_ks: 0 };
    for (k, cu, cv) in rows {
        if !cu.exact || !cv.exact {
            best.inexact_ks += 1;
        }
        let g = capacity_gap(cu, cv)?;
        if g > best.value {
            best.value = g;
            best.witness_k = Some(*k);
        }
    }
    Ok(best)
}

/// `½ |ln(vol U / vol V)|`.
pub fn volume_lower_bound(u: &Domain, v: &Domain) -> Result<f64> {
    let (a, b) = (u.area(), v.area());
    if a.is_zero() || b.is_zero() {
        return Err(EchError::InvalidDomain("zero area".into()));
    }
    Ok(hp::abs_ln(&(a.as_rational() / b.as_rational()), hp::DEFAULT_PRECISION).lo_f64() / 2.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct InclusionBound {
    /// `ln max(scale_uv, scale_vu)`, rounded up.
    pub value: f64,
    /// Smallest `T` with `U ⊆ T·V`.
    pub scale_uv: Scalar,
    /// Smallest `T` with `V ⊆ T·U`.
    pub scale_vu: Scalar,
}

impl InclusionBound {
    pub fn max_scale(&self) -> &Scalar {
        (&self.scale_uv).max(&self.scale_vu)
    }
}

/// The inclusion distance `d_I(U, V)`, an upper bound for the symplectic one.
pub fn inclusion_distance(u: &Domain, v: &Domain, cfg: &WeightConfig) -> Result<InclusionBound> {
    let (pu, pv) = (u.profile(cfg)?, v.profile(cfg)?);
    let scale_uv = inclusion_scale(&pu, &pv)?;
    let scale_vu = inclusion_scale(&pv, &pu)?;
    let m = scale_uv.clone().max(scale_vu.clone());
    let value = hp::abs_ln(m.as_rational(), hp::DEFAULT_PRECISION).hi_f64();
    Ok(InclusionBound { value, scale_uv, scale_vu })
}

/// `(N/2 + 1)·‖v, w‖ + 1`, with the norm rounded up.
pub fn lemma_upper_bound(v: &ParameterVector, w: &ParameterVector, precision: usize) -> Result<f64> {
    let norm = parameter_distance(v, w, precision)?;
    Ok((v.len() as f64 / 2.0 + 1.0) * norm.hi_f64() + 1.0)
}

/// All bounds for one pair of domains.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceReport {
    pub lower_capacity: CapacityBound,
    pub lower_volume: f64,
    pub upper_inclusion: Option<InclusionBound>,
    pub upper_lemma: Option<f64>,
    pub lower: f64,
    pub upper: Option<f64>,
    /// `lower <= upper` whenever an upper bound exists.
    pub consistent: bool,
}

pub fn distance_report(
    u: &Domain,
    v: &Domain,
    ks: &[u64],
    params: Option<(&ParameterVector, &ParameterVector)>,
    ccfg: &CapacityConfig,
    wcfg: &WeightConfig,
) -> Result<DistanceReport> {
    let lower_capacity = capacity_lower_bound(u, v, ks, ccfg)?;
    let lower_volume = volume_lower_bound(u, v)?;
    let upper_inclusion = match inclusion_distance(u, v, wcfg) {
        Ok(b) => Some(b),
        Err(EchError::RealizationTooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    let upper_lemma = params.map(|(a, b)| lemma_upper_bound(a, b, hp::DEFAULT_PRECISION)).transpose()?;
    Ok(assemble(lower_capacity, lower_volume, upper_inclusion, upper_lemma))
}

fn assemble(
    lower_capacity: CapacityBound,
    lower_volume: f64,
    upper_inclusion: Option<InclusionBound>,
    upper_lemma: Option<f64>,
) -> DistanceReport {
    let lower = lower_capacity.value.max(lower_volume);
    let upper = [upper_inclusion.as_ref().map(|b| b.value), upper_lemma].into_iter().flatten().reduce(f64::min);
    let consistent = upper.map_or(true, |u| lower <= u);
    DistanceReport { lower_capacity, lower_volume, upper_inclusion, upper_lemma, lower, upper, consistent }
}

/// Constants `(A, B)` with `d/A − B ≤ lo` and `hi ≤ A·d + B` on every sample
/// `(d, lo, hi)`, minimizing `A + B` over `A ≥ 1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SandwichFit {
    pub a: f64,
    pub b: f64,
}

pub fn fit_sandwich(samples: &[(f64, f64, f64)]) -> SandwichFit {
    let b_of = |a: f64| samples.iter().map(|&(d, lo, hi)| (d / a - lo).max(hi - a * d)).fold(0.0f64, f64::max);
    // A + B(A) is convex in A
    let (mut lo, mut hi) = (1.0f64, 1.0e3f64);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if m1 + b_of(m1) <= m2 + b_of(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let a = (lo + hi) / 2.0;
    SandwichFit { a, b: b_of(a) }
}

/// How far to sweep `k` for a certificate pair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KPolicy {
    pub cap: u64,
    pub per_decade: u32,
}

impl Default for KPolicy {
    fn default() -> Self {
        KPolicy { cap: 10_000_000_000, per_decade: 64 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateRow {
    pub id: usize,
    pub v: ParameterVector,
    pub w: ParameterVector,
    pub norm: f64,
    pub norm_hi: f64,
    pub k_max: u64,
    pub report: Option<DistanceReport>,
    pub skipped: Option<String>,
}

impl CertificateRow {
    pub fn gap(&self) -> Option<f64> {
        let r = self.report.as_ref()?;
        Some(r.upper? - r.lower)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiFlatCertificate {
    pub rows: Vec<CertificateRow>,
    pub fit: Option<SandwichFit>,
    pub consistent: bool,
}

/// Witness index for a pair: `max_i B'_i^{i+1}`, capped by the policy.
pub fn witness_k(w: &ParameterVector, policy: &KPolicy) -> u64 {
    let mut best = 1u64;
    for k in 1..=w.len() {
        let m = w.values()[k - 1].pow(k as u32 + 1).floor();
        let m = u64::try_from(m).unwrap_or(u64::MAX);
        best = best.max(m.min(policy.cap));
    }
    best
}

/// Bounds for every pair of a grid of parameter vectors.
///
/// Capacities are computed once per distinct vector on a shared schedule and
/// reused across pairs; a pair's sweep stops at its witness index.
pub fn certificate(
    pairs: &[(ParameterVector, ParameterVector)],
    policy: &KPolicy,
    ccfg: &CapacityConfig,
    wcfg: &WeightConfig,
) -> Result<QuasiFlatCertificate> {
    let mut distinct: Vec<&ParameterVector> = Vec::new();
    for (v, w) in pairs {
        for p in [v, w] {
            if !distinct.contains(&p) {
                distinct.push(p);
            }
        }
    }
    let kmax = pairs.iter().map(|(_, w)| witness_k(w, policy)).max().unwrap_or(1);
    let ks = k_schedule(kmax, policy.per_decade);
    let sweeps: Vec<std::result::Result<(Domain, Vec<CapacityResult>), String>> = distinct
        .par_iter()
        .map(|p| {
            let d = build_weights(p, None).and_then(Domain::from_weights).map_err(|e| e.to_string())?;
            let caps = ks.par_iter().map(|&k| d.capacity(k, ccfg)).collect::<Result<Vec<_>>>();
            caps.map(|c| (d, c)).map_err(|e| e.to_string())
        })
        .collect();
    let lookup = |p: &ParameterVector| &sweeps[distinct.iter().position(|q| *q == p).unwrap()];
    let mut rows = Vec::with_capacity(pairs.len());
    for (id, (v, w)) in pairs.iter().enumerate() {
        let norm = parameter_distance(v, w, hp::DEFAULT_PRECISION)?;
        let k_max = witness_k(w, policy);
        let mut row = CertificateRow {
            id,
            v: v.clone(),
            w: w.clone(),
            norm: norm.mid_f64(),
            norm_hi: norm.hi_f64(),
            k_max,
            report: None,
            skipped: None,
        };
        match (lookup(v), lookup(w)) {
            (Ok((dv, cv)), Ok((dw, cw))) => {
                let n = ks.iter().take_while(|&&k| k <= k_max).count();
                let triples: Vec<_> = (0..n).map(|i| (ks[i], cv[i].clone(), cw[i].clone())).collect();
                let cap = bound_from_rows(&triples)?;
                let vol = volume_lower_bound(dv, dw)?;
                let incl = match inclusion_distance(dv, dw, wcfg) {
                    Ok(b) => Some(b),
                    Err(EchError::RealizationTooLarge { .. }) => None,
                    Err(e) => return Err(e),
                };
                let lemma = lemma_upper_bound(v, w, hp::DEFAULT_PRECISION)?;
                row.report = Some(assemble(cap, vol, incl, Some(lemma)));
            }
            (Err(e), _) | (_, Err(e)) => row.skipped = Some(e.clone()),
        }
        rows.push(row);
    }
    let samples: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            let rep = r.report.as_ref()?;
            Some((r.norm, rep.lower, rep.upper?))
        })
        .collect();
    let fit = (!samples.is_empty()).then(|| fit_sandwich(&samples));
    let consistent = rows.iter().all(|r| r.report.as_ref().map_or(true, |rep| rep.consistent));
    Ok(QuasiFlatCertificate { rows, fit, consistent })
}

/// The canonical one-dimensional grid `{-4, -2, 0, 2, 4}`.
pub fn canonical_grid() -> Vec<BigRational> {
    [-4i64, -2, 0, 2, 4].iter().map(|&x| BigRational::from_integer(x.into())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightMultiset;

    fn ball(a: u64) -> Domain {
        Domain::Ball(Scalar::from_integer(a))
    }

    #[test]
    fn balls() {
        let cfg = CapacityConfig::default();
        let ks: Vec<u64> = (1..=10).collect();
        let b = capacity_lower_bound(&ball(1), &ball(2), &ks, &cfg).unwrap();
        assert!((b.value - 2f64.ln()).abs() < 1e-12);
        assert_eq!(capacity_lower_bound(&ball(1), &ball(1), &ks, &cfg).unwrap().value, 0.0);
        assert!((volume_lower_bound(&ball(1), &ball(2)).unwrap() - 2f64.ln()).abs() < 1e-12);
        let u = Domain::Ellipsoid(crate::Ellipsoid::new(Scalar::one(), Scalar::from_integer(2)).unwrap());
        let t = crate::ScaleFactor::new(Scalar::from_integer(3)).unwrap();
        let d = inclusion_distance(&u, &u.scale(&t), &WeightConfig::default()).unwrap();
        assert_eq!(d.max_scale(), &Scalar::from_integer(3));
        assert!((d.value - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lemma_examples() {
        let p = |b: &[u64]| ParameterVector::from_integers(b).unwrap();
        let l = lemma_upper_bound(&p(&[64, 4096]), &p(&[64, 8192]), 200).unwrap();
        assert!((l - (2.0 * 2f64.ln() + 1.0)).abs() < 1e-12);
        assert_eq!(lemma_upper_bound(&p(&[64]), &p(&[64]), 200).unwrap(), 1.0);
        let l = lemma_upper_bound(&p(&[64]), &p(&[256]), 200).unwrap();
        assert!((l - (1.5 * 4f64.ln() + 1.0)).abs() < 1e-12);
        assert!(lemma_upper_bound(&p(&[64]), &p(&[64, 4096]), 200).is_err());
    }

    #[test]
    fn flat_volumes() {
        let dom = |b: u64| {
            Domain::from_weights(build_weights(&ParameterVector::from_integers(&[b]).unwrap(), None).unwrap()).unwrap()
        };
        assert!((volume_lower_bound(&dom(64), &dom(256)).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(volume_lower_bound(&dom(64), &dom(64)).unwrap(), 0.0);
    }

    #[test]
    fn schedule() {
        let ks = k_schedule(1000, 64);
        assert_eq!(ks[0], 1);
        assert_eq!(*ks.last().unwrap(), 1000);
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
        assert!(k_schedule(0, 64).is_empty());
    }

    #[test]
    fn fit_recovers_lipschitz_constants() {
        let samples: Vec<(f64, f64, f64)> = (0..20).map(|i| (i as f64, i as f64 / 2.0, 3.0 * i as f64)).collect();
        let f = fit_sandwich(&samples);
        assert!((f.a - 3.0).abs() < 1e-6 && f.b < 1e-6, "{f:?}");
    }

    #[test]
    fn intervals_propagate_conservatively() {
        let w = WeightMultiset::ball(Scalar::one()).unwrap();
        let mut cu = crate::capacity::multiset_capacity(&w, 10, &CapacityConfig::default()).unwrap();
        let cv = cu.clone();
        cu.upper = &cu.best * &Scalar::from_integer(2);
        cu.exact = false;
        assert_eq!(capacity_gap(&cu, &cv).unwrap(), 0.0);
    }
}
