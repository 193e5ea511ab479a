//! The end-to-end verification suite: ten exact desk-scale checks tying the
//! field, character, family, orthogonality, bound, and norm-lab layers
//! together. Each criterion returns a pass/fail record; `run_all` drives the
//! full set and the `quick` profile is a deterministic smoke subset.

use crate::bounds::{
    consistency_check, hermite_largest_root, kl_polynomial_bound, lisse_count_bound, BoundValue,
};
use crate::characters::MultiplicativeCharacter;
use crate::error::Result;
use crate::field::{field_build, is_prime_u64, FieldSpec};
use crate::normlab::{
    random_norm_experiment, sample_random_function, tail_experiment, trivial_norm_upper,
    Distribution, RandomFunctionSpec,
};
use crate::orthogonality::ask_family_scan;
use crate::sheaf::{enumerate_ask_classes, fourier_transform, trace_ask, AskDescriptor};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub index: u32,
    pub name: String,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

fn result(index: u32, name: &str, passed: bool, details: String, start: Instant) -> CriterionResult {
    CriterionResult {
        index,
        name: name.to_string(),
        passed,
        details,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn prime_spec(p: u64) -> Result<Arc<FieldSpec>> {
    Ok(Arc::new(field_build(p, 1, None)?))
}

/// 1. Full conductor-3 rank-1 family over F_101 and F_499: every
/// non-isomorphic pair within 9/sqrt(q), diagonals exactly 1, zero violations.
pub fn criterion_1() -> Result<CriterionResult> {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut passed = true;
    for p in [101u64, 499] {
        let report = ask_family_scan(p)?;
        let ok = report.violations == 0
            && report.diagonal_exact
            && report.max_offdiag <= report.bound * (1.0 + 1e-9);
        passed &= ok;
        details.push(format!(
            "q={p}: {} classes, max |inner| = {:.6} vs bound {:.6}, violations = {}",
            report.total_classes, report.max_offdiag, report.bound, report.violations
        ));
    }
    let elapsed_ok = start.elapsed().as_secs_f64() <= 60.0;
    passed &= elapsed_ok;
    Ok(result(1, "quasi-orthogonality", passed, details.join("; "), start))
}

/// 2. Weil-bound oracle: |sum psi(f(x))| <= (deg f - 1) sqrt(q) for all f of
/// degree 1..4 (exhaustive at q = 7, 11; 10^3 random at q = 101).
pub fn criterion_2() -> Result<CriterionResult> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut violations = 0u64;
    let mut check = |p: u64, coeffs: &[u64]| {
        let deg = (0..coeffs.len()).rev().find(|&i| coeffs[i] % p != 0);
        let deg = match deg {
            Some(d) if d >= 1 => d,
            _ => return,
        };
        let mut s = Complex64::new(0.0, 0.0);
        for x in 0..p {
            let mut v = 0u64;
            let mut xp = 1u64;
            for &c in coeffs {
                v = (v + c % p * xp) % p;
                xp = xp * x % p;
            }
            s += Complex64::from_polar(1.0, TAU * v as f64 / p as f64);
        }
        let bound = (deg as f64 - 1.0) * (p as f64).sqrt() + 1e-6;
        let slack = s.norm() - bound;
        worst = worst.max(slack);
        if slack > 0.0 {
            violations += 1;
        }
    };
    for p in [7u64, 11] {
        for idx in 0..p.pow(5) {
            let mut coeffs = [0u64; 5];
            let mut t = idx;
            for c in &mut coeffs {
                *c = t % p;
                t /= p;
            }
            check(p, &coeffs);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let coeffs: Vec<u64> = (0..5).map(|_| rng.random_range(0..101u64)).collect();
        check(101, &coeffs);
    }
    Ok(result(
        2,
        "weil-bound oracle",
        violations == 0,
        format!("violations = {violations}, worst slack = {worst:.3e}"),
        start,
    ))
}

/// 3. Enumeration counts q^{(c-1) - floor((c-1)/p)} and the q^{c/2-1} lower
/// bound for (p, c) in {(3,2),(3,3),(5,2),(5,3),(5,4)}.
pub fn criterion_3() -> Result<CriterionResult> {
    let start = Instant::now();
    let mut passed = true;
    let mut details = Vec::new();
    for (p, c) in [(3u64, 2u64), (3, 3), (5, 2), (5, 3), (5, 4)] {
        let spec = prime_spec(p)?;
        let chi0 = MultiplicativeCharacter::trivial(spec.clone());
        let classes = enumerate_ask_classes(&spec, c, &chi0)?;
        let expect = spec.q().pow(((c - 1) - (c - 1) / p) as u32);
        let lower = (spec.q() as f64).powf(c as f64 / 2.0 - 1.0);
        let ok = classes.len() as u64 == expect && classes.len() as f64 >= lower - 1e-9;
        passed &= ok;
        details.push(format!("(p={p}, c={c}): {} = {expect}, >= {lower:.2}", classes.len()));
    }
    Ok(result(3, "enumeration lower bound", passed, details.join("; "), start))
}

/// 4. Injectivity over F_331 with c = 3: no non-isomorphic pair is
/// proportional (all pairwise |inner| strictly below 1).
pub fn criterion_4() -> Result<CriterionResult> {
    let start = Instant::now();
    let report = ask_family_scan(331)?;
    let passed = report.violations == 0 && report.max_offdiag < 1.0 - 1e-9;
    let elapsed_ok = start.elapsed().as_secs_f64() <= 120.0;
    Ok(result(
        4,
        "injectivity",
        passed && elapsed_ok,
        format!(
            "q=331: {} classes, max |inner| = {:.6} < 1, violations = {}",
            report.total_classes, report.max_offdiag, report.violations
        ),
        start,
    ))
}

/// 5. Spherical-code chain at q = 1373, c = 3, r = 1: sampled pairwise
/// cosines within 18/sqrt(q), and 18/sqrt(q) <= 9 sqrt(10)/sqrt(2q).
pub fn criterion_5() -> Result<CriterionResult> {
    let start = Instant::now();
    let p = 1373u64;
    let q = p as usize;
    let sqrt_q = (p as f64).sqrt();
    // 12 c r^2 = 36 < sqrt(1373)
    let pre_ok = 36.0 < sqrt_q;
    let psi: Vec<Complex64> =
        (0..q).map(|t| Complex64::from_polar(1.0, TAU * t as f64 / p as f64)).collect();
    let mut leg = vec![-1.0f64; q];
    leg[0] = 0.0;
    for x in 1..p {
        leg[(x * x % p) as usize] = 1.0;
    }
    let xsq: Vec<u64> = (0..p).map(|x| x * x % p).collect();
    // irreducible monic quadratics x^2 + b x + c
    let mut quads = Vec::new();
    for b in 0..p {
        for c in 0..p {
            let disc = ((b * b % p) + 4 * p - 4 * c % p) % p;
            if leg[disc as usize] < 0.0 {
                quads.push((b, c));
            }
        }
    }
    let n_trivial = p * p;
    let n_classes = n_trivial + quads.len() as u64;
    let total_pairs = n_classes * (n_classes - 1) / 2;
    let sampled = total_pairs > 1_000_000;
    let n_pairs = 10_000u64;
    let value = |class: u64, x: usize| -> Complex64 {
        if class < n_trivial {
            let a1 = class % p;
            let a2 = class / p;
            psi[((a1 * x as u64 + a2 * xsq[x]) % p) as usize]
        } else {
            let (b, c) = quads[(class - n_trivial) as usize];
            Complex64::new(leg[((xsq[x] + b * x as u64 + c) % p) as usize], 0.0)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pairs: Vec<(u64, u64)> = (0..n_pairs)
        .map(|_| {
            loop {
                let i = rng.random_range(0..n_classes);
                let j = rng.random_range(0..n_classes);
                if i != j {
                    return (i.min(j), i.max(j));
                }
            }
        })
        .collect();
    let cos_bound = 18.0 / sqrt_q;
    let chain_bound = 9.0 * 10f64.sqrt() / (2.0 * p as f64).sqrt();
    let max_cos = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..q {
                acc += value(i, x) * value(j, x).conj();
            }
            // diagonals are exactly 1 (unimodular kernels on all of k), so
            // the real-embedding cosine is Re of the normalized inner product
            (acc / p as f64).re
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let passed = pre_ok && sampled && max_cos <= cos_bound * (1.0 + 1e-9) && cos_bound <= chain_bound;
    Ok(result(
        5,
        "spherical-code chain",
        passed,
        format!(
            "q={p}: {n_classes} classes, {n_pairs} sampled pairs, max cos = {max_cos:.6} \
             <= {cos_bound:.6} <= {chain_bound:.6}"
        ),
        start,
    ))
}

/// 6. Polynomial-bound exactness and Hermite-root certification.
pub fn criterion_6() -> Result<CriterionResult> {
    let start = Instant::now();
    let b = kl_polynomial_bound(8, 1.0)?;
    let mut passed = b.binomial.exact.as_ref().map(|e| e.to_string()) == Some("1584".into());
    let mut prev = num_bigint::BigUint::ZERO;
    for n in [8u64, 16, 32, 64, 128] {
        let e = kl_polynomial_bound(n, 1.0)?.binomial.exact.unwrap();
        passed &= e > prev;
        prev = e;
    }
    let h2 = hermite_largest_root(2)?.value;
    let h3 = hermite_largest_root(3)?.value;
    passed &= (h2 - 1.0 / 2f64.sqrt()).abs() < 1e-12;
    passed &= (h3 - 1.5f64.sqrt()).abs() < 1e-12;
    for k in 1..=200u32 {
        let h = hermite_largest_root(k)?.value;
        let lo = (((k - 1) as f64) / 2.0).sqrt();
        let hi = (2.0 * k as f64).sqrt();
        passed &= h >= lo - 1e-12 * lo.max(1.0) && h <= hi;
    }
    Ok(result(
        6,
        "polynomial bound exactness",
        passed,
        format!("2 C(12,5) = 1584; h_2 = {h2:.12}, h_3 = {h3:.12}; brackets hold to k = 200"),
        start,
    ))
}

fn ln_gamma_stirling(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 20.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv / 12.0 - inv * inv2 / 360.0 + inv * inv2 * inv2 / 1260.0
        - inv * inv2 * inv2 * inv2 / 1680.0;
    shift + 0.5 * ((2.0 * std::f64::consts::PI).ln() - x.ln()) + x * (x.ln() - 1.0) + series
}

/// 7. Counting-bound composition: the conductor-1 bound at q = 1601 against
/// an independent log-gamma evaluation, and enumeration-vs-bound consistency.
pub fn criterion_7() -> Result<CriterionResult> {
    let start = Instant::now();
    let b = lisse_count_bound(1601, 1601, 1, 1, 1500)?;
    let exponent = 93.0 + 6.0 * 10f64.sqrt();
    let independent = exponent * 3202f64.log10() - ln_gamma_stirling(90.0) / std::f64::consts::LN_10;
    let mut passed = (b.log10 - 256.3).abs() <= 0.5 && (b.log10 - independent).abs() < 1e-6;
    let mut details = vec![format!("lisse log10 = {:.4} (independent {:.4})", b.log10, independent)];
    // consistency wherever both the enumeration and bound preconditions hold
    for c in 1..=2u64 {
        let mut q = 1500 * c.pow(3);
        while !is_prime_u64(q) {
            q += 1;
        }
        let bound = lisse_count_bound(q, q, c, 1, 1500)?;
        // reduced-class count q^{(c-1) - floor((c-1)/p)}
        let count_log10 = ((c - 1) - (c - 1) / q) as f64 * (q as f64).log10();
        let bv = BoundValue { exact: None, log10: bound.log10, formula: "lisse".into() };
        let ok = consistency_check(count_log10, &bv);
        passed &= ok;
        details.push(format!("q={q}, c={c}: count 10^{count_log10:.2} <= 10^{:.1}", bound.log10));
    }
    Ok(result(7, "bound composition", passed, details.join("; "), start))
}

/// 8. Fourier layer: Plancherel and double-transform-equals-reflection
/// within 1e-9 for 50 random rank-1 kernels over F_101.
pub fn criterion_8() -> Result<CriterionResult> {
    let start = Instant::now();
    let spec = prime_spec(101)?;
    let psi = crate::characters::AdditiveCharacter::standard(spec.clone());
    let chi0 = MultiplicativeCharacter::trivial(spec.clone());
    let chi2 = MultiplicativeCharacter::quadratic(spec.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut max_plancherel = 0.0f64;
    let mut max_reflection = 0.0f64;
    for trial in 0..50 {
        let desc = if trial % 2 == 0 {
            let f1: Vec<u64> = (0..5).map(|_| rng.random_range(0..101u64)).collect();
            AskDescriptor::from_ints(&spec, &f1, &[1], chi0.clone())?
        } else {
            // random irreducible quadratic and a random low-degree phase
            let (b, c) = loop {
                let b = rng.random_range(0..101u64);
                let c = rng.random_range(0..101u64);
                let disc = ((b * b) % 101 + 4 * 101 - (4 * c) % 101) % 101;
                let nonsquare = (1..101u64).all(|x| x * x % 101 != disc);
                if nonsquare {
                    break (b, c);
                }
            };
            let f1: Vec<u64> = (0..3).map(|_| rng.random_range(0..101u64)).collect();
            AskDescriptor::from_ints(&spec, &f1, &[c, b, 1], chi2.clone())?
        };
        let s = trace_ask(&desc)?;
        let f1t = fourier_transform(&s, &psi, None)?;
        let e_in: f64 = s.values.iter().map(|v| v.norm_sqr()).sum();
        let e_out: f64 = f1t.values.iter().map(|v| v.norm_sqr()).sum();
        max_plancherel = max_plancherel.max((e_in - e_out).abs() / 101.0);
        let f2t = fourier_transform(&f1t, &psi, None)?;
        let dense = s.dense_values();
        for (u, v) in f2t.domain.iter().zip(&f2t.values) {
            let neg = spec.neg(u);
            max_reflection = max_reflection.max((v - dense[spec.index(&neg) as usize]).norm());
        }
    }
    let passed = max_plancherel < 1e-9 && max_reflection < 1e-9;
    Ok(result(
        8,
        "fourier layer",
        passed,
        format!("max plancherel dev = {max_plancherel:.2e}, max reflection dev = {max_reflection:.2e}"),
        start,
    ))
}

/// 9. Trace-norm lab: tail bounds at 10^4 trials, the random-norm sweep at
/// 10^3 trials over F_101 and F_499, and exactness of the trivial bound.
pub fn criterion_9() -> Result<CriterionResult> {
    let start = Instant::now();
    let spec = prime_spec(101)?;
    let chi0 = MultiplicativeCharacter::trivial(spec.clone());
    let gauss = trace_ask(&AskDescriptor::from_ints(&spec, &[0, 0, 1], &[1], chi0.clone())?)?;
    let trivial = trace_ask(&AskDescriptor::from_ints(&spec, &[], &[1], chi0)?)?;
    let rspec = RandomFunctionSpec::new(Distribution::Rademacher, 9)?;
    let mut passed = true;
    let mut details = Vec::new();
    for (kernel, alpha) in [(&gauss, 1.0), (&gauss, 0.1), (&trivial, 1.0)] {
        let t = tail_experiment(kernel, &rspec, alpha, 2.0, 10_000)?;
        let p_th = t.theoretical_bound;
        let se = (p_th * (1.0 - p_th) / t.trials as f64).sqrt();
        let ok = t.empirical_frequency <= p_th + 3.0 * se;
        passed &= ok;
        details.push(format!(
            "tail cond={} alpha={alpha}: freq {:.4} <= bound {:.4}",
            t.conductor, t.empirical_frequency, p_th
        ));
    }
    for p in [101u64, 499] {
        let spec = prime_spec(p)?;
        let summary = random_norm_experiment(&spec, 3, &rspec, 1000)?;
        let ok = summary.smallest_alpha_99.is_some();
        passed &= ok;
        details.push(format!(
            "q={p}: certified fractions {:?}, smallest alpha {:?}",
            summary.sweep.iter().map(|e| e.certified_fraction).collect::<Vec<_>>(),
            summary.smallest_alpha_99
        ));
        // trivial norm upper is exactly sqrt(q) for rademacher
        let phi = sample_random_function(&rspec, &spec, 0);
        passed &= trivial_norm_upper(&phi) == (p as f64).sqrt();
    }
    Ok(result(9, "trace-norm lab", passed, details.join("; "), start))
}

/// 10. Determinism: the quick verification payload is byte-identical across
/// reruns with the same seed.
pub fn criterion_10() -> Result<CriterionResult> {
    let start = Instant::now();
    let a = serde_json::to_string(&quick_payload(42)?)?;
    let b = serde_json::to_string(&quick_payload(42)?)?;
    Ok(result(
        10,
        "determinism",
        a == b,
        format!("quick payload: {} bytes, reruns identical = {}", a.len(), a == b),
        start,
    ))
}

/// The deterministic quick-profile payload: a smoke subset of the suite,
/// a pure function of the seed.
pub fn quick_payload(seed: u64) -> Result<serde_json::Value> {
    let scan = ask_family_scan(101)?;
    let spec = prime_spec(101)?;
    let chi0 = MultiplicativeCharacter::trivial(spec.clone());
    let counts: Vec<u64> = [(3u64, 2u64), (5, 2), (5, 3)]
        .iter()
        .map(|&(p, c)| {
            let spec = prime_spec(p)?;
            let chi = MultiplicativeCharacter::trivial(spec.clone());
            Ok(enumerate_ask_classes(&spec, c, &chi)?.len() as u64)
        })
        .collect::<Result<_>>()?;
    let kl = kl_polynomial_bound(8, 1.0)?;
    let h = [hermite_largest_root(2)?.value, hermite_largest_root(3)?.value];
    let lisse = lisse_count_bound(1601, 1601, 1, 1, 1500)?;
    let rspec = RandomFunctionSpec::new(Distribution::Rademacher, seed)?;
    let gauss = trace_ask(&AskDescriptor::from_ints(&spec, &[0, 0, 1], &[1], chi0)?)?;
    let tail = tail_experiment(&gauss, &rspec, 1.0, 2.0, 1000)?;
    let norm = random_norm_experiment(&spec, 3, &rspec, 100)?;
    Ok(serde_json::json!({
        "seed": seed,
        "scan_q101": {
            "classes": scan.total_classes,
            "max_offdiag": scan.max_offdiag,
            "violations": scan.violations,
        },
        "enumeration_counts": counts,
        "kl_exact": kl.binomial.exact.map(|e| e.to_string()),
        "hermite": h,
        "lisse_log10": lisse.log10,
        "tail": tail,
        "norm_sweep": norm.sweep,
    }))
}

pub fn run_all() -> Result<Vec<CriterionResult>> {
    Ok(vec![
        criterion_1()?,
        criterion_2()?,
        criterion_3()?,
        criterion_4()?,
        criterion_5()?,
        criterion_6()?,
        criterion_7()?,
        criterion_8()?,
        criterion_9()?,
        criterion_10()?,
    ])
}
