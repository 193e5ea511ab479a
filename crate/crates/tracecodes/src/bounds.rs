//! Certified largest roots of Hermite polynomials, the Jacobi/Gegenbauer
//! extreme-root lower bound, the polynomial cardinality bound for spherical
//! codes, and the composed counting bounds for kernel families.

use crate::error::{precondition, Result};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

const LN10: f64 = std::f64::consts::LN_10;

/// Largest root of the k-th Hermite polynomial with a certified bracket.
#[derive(Debug, Clone, Serialize)]
pub struct HermiteRoot {
    pub k: u32,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Sign of H_k(x) under the recurrence H_0 = 1, H_1 = 2x,
/// H_{j+1} = 2x H_j - 2j H_{j-1}, rescaled every 16 steps; the rescale by a
/// positive factor is sign-faithful.
fn hermite_sign_eval(k: u32, x: f64) -> f64 {
    let mut prev = 1.0f64;
    let mut cur = 2.0 * x;
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
        if j % 16 == 0 {
            let scale = cur.abs().max(prev.abs()).max(1e-300);
            cur /= scale;
            prev /= scale;
        }
    }
    cur
}

/// Number of eigenvalues of the Hermite Jacobi matrix (roots of H_k) that
/// are < x, by the Sturm sequence of the shifted tridiagonal matrix with
/// zero diagonal and off-diagonal squares j/2.
fn hermite_roots_below(k: u32, x: f64) -> u32 {
    let mut count = 0u32;
    let mut d = -x;
    if d < 0.0 {
        count += 1;
    }
    for j in 1..k {
        if d == 0.0 {
            d = -1e-300;
        }
        d = -x - (j as f64 / 2.0) / d;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest Hermite root by bisection on the analytic bracket
/// [sqrt((k-1)/2), sqrt(2k)], using eigenvalue counting to steer and the
/// sign of the rescaled recurrence to certify the final interval.
pub fn hermite_largest_root(k: u32) -> Result<HermiteRoot> {
    if k == 0 {
        return Err(precondition("hermite degree must be >= 1"));
    }
    if k == 1 {
        return Ok(HermiteRoot { k, value: 0.0, lo: 0.0, hi: 0.0 });
    }
    let lo0 = (((k - 1) as f64) / 2.0).sqrt();
    let hi0 = (2.0 * k as f64).sqrt();
    let mut lo = lo0;
    let mut hi = hi0;
    // all k roots lie strictly below hi0; steer until the bracket is tight
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if hermite_roots_below(k, mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // certify: H_k is positive beyond the largest root; widen lo by ulps if
    // rounding at an equality edge (k = 2: the root equals the analytic
    // lower endpoint) leaves a nonnegative value at lo
    let mut cert_lo = lo;
    for _ in 0..8 {
        if hermite_sign_eval(k, cert_lo) <= 0.0 {
            break;
        }
        cert_lo -= cert_lo.abs().max(1.0) * 4.0 * f64::EPSILON;
    }
    let s_lo = hermite_sign_eval(k, cert_lo);
    let s_hi = hermite_sign_eval(k, hi);
    if !(s_lo <= 0.0 && s_hi >= 0.0) {
        return Err(crate::error::Error::BoundViolation(format!(
            "hermite root certification failed at k = {k}"
        )));
    }
    Ok(HermiteRoot { k, value: 0.5 * (lo + hi), lo: cert_lo, hi })
}

/// Lower bound for the largest root of the degree-k Gegenbauer (Jacobi 1,1)
/// polynomial in dimension n: sqrt(2(n+k-2)/((n+2k-2)(n+2k-4))) * h_k.
pub fn jacobi_root_lower_bound(n: u64, k: u32) -> Result<f64> {
    if n < 2 || k < 2 {
        return Err(precondition("jacobi_root_lower_bound requires n >= 2, k >= 2"));
    }
    let nf = n as f64;
    let kf = k as f64;
    let denom = (nf + 2.0 * kf - 2.0) * (nf + 2.0 * kf - 4.0);
    if denom <= 0.0 {
        return Err(precondition("nonpositive denominator"));
    }
    let h = hermite_largest_root(k)?.value;
    Ok((2.0 * (nf + kf - 2.0) / denom).sqrt() * h)
}

/// A counting bound: exact big integer when feasible, always a log10 value.
#[derive(Debug, Clone, Serialize)]
pub struct BoundValue {
    #[serde(serialize_with = "serialize_opt_biguint")]
    pub exact: Option<BigUint>,
    pub log10: f64,
    pub formula: String,
}

fn serialize_opt_biguint<S: serde::Serializer>(
    v: &Option<BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_some(&x.to_string()),
        None => s.serialize_none(),
    }
}

/// Parameters of the polynomial-method bound.
#[derive(Debug, Clone, Serialize)]
pub struct KLParams {
    pub n: u64,
    pub gamma: f64,
    pub k: u64,
    pub admissible: bool,
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    // each partial product is itself a binomial, so the division is exact
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn log10_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap().log10();
    }
    // top 64 bits carry full f64 precision
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    top.log10() + shift as f64 * 2f64.log10()
}

/// Smallest admissible degree k >= 2 with cosphi <= the Gegenbauer-root
/// lower bound, then the cardinality bound 2 C(n-1+k, k).
pub fn kl_cardinality_bound(n: u64, cosphi: f64) -> Result<BoundValue> {
    if !(0.0..1.0).contains(&cosphi) {
        return Err(precondition("cosphi must lie in [0, 1)"));
    }
    const CAP: u32 = 20_000;
    let mut chosen = None;
    for k in 2..=CAP {
        if cosphi <= jacobi_root_lower_bound(n, k)? {
            chosen = Some(k);
            break;
        }
    }
    let k = chosen.ok_or_else(|| {
        precondition(format!("no admissible polynomial degree below {CAP} for n = {n}"))
    })? as u64;
    let exact = BigUint::from(2u32) * binomial(n - 1 + k, k);
    let log10 = log10_biguint(&exact);
    Ok(BoundValue { exact: Some(exact), log10, formula: format!("binomial(k={k})") })
}

#[derive(Debug, Clone, Serialize)]
pub struct KlPolynomialBound {
    pub binomial: BoundValue,
    pub gamma_form: BoundValue,
    pub params: KLParams,
}

/// Fixed-degree polynomial bound: for cos phi <= gamma/sqrt(n) and
/// n >= 2 gamma ceil((gamma+1)^2), with k = 1 + ceil((gamma+1)^2),
/// M <= 2 C(n-1+k, k) <= (n-1)^{gamma^2+2gamma+3} / Gamma(gamma^2+2gamma+2).
pub fn kl_polynomial_bound(n: u64, gamma: f64) -> Result<KlPolynomialBound> {
    if gamma <= 0.0 {
        return Err(precondition("gamma must be positive"));
    }
    let ceil_term = ((gamma + 1.0) * (gamma + 1.0)).ceil();
    if (n as f64) < 2.0 * gamma * ceil_term {
        return Err(precondition(format!(
            "n = {n} < 2 gamma ceil((gamma+1)^2) = {}",
            2.0 * gamma * ceil_term
        )));
    }
    let k = 1 + ceil_term as u64;
    let exact = BigUint::from(2u32) * binomial(n - 1 + k, k);
    let log10_exact = log10_biguint(&exact);
    let e = gamma * gamma + 2.0 * gamma + 3.0;
    let log10_gamma = e * ((n - 1) as f64).log10() - ln_gamma(e - 1.0) / LN10;
    if log10_exact > log10_gamma + 1e-9 {
        return Err(crate::error::Error::BoundViolation(
            "binomial form exceeds gamma form".into(),
        ));
    }
    Ok(KlPolynomialBound {
        binomial: BoundValue {
            exact: Some(exact),
            log10: log10_exact,
            formula: "binomial".into(),
        },
        gamma_form: BoundValue { exact: None, log10: log10_gamma, formula: "gamma-form".into() },
        params: KLParams { n, gamma, k, admissible: true },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LisseBound {
    pub log10: f64,
    pub params: KLParams,
    pub formula: String,
}

/// Count bound for rank-<= r kernels of conductor <= c lisse on a common open
/// set with |U(k)| = u_size: (2 u_size)^{90 c^2 r^4 + 6 sqrt(10) c r^2 + 3}
/// / Gamma(90 c^2 r^4), provided q >= constant c^3 r^6.
pub fn lisse_count_bound(
    q: u64,
    u_size: u64,
    c: u64,
    r: u64,
    constant: u64,
) -> Result<LisseBound> {
    if r > c {
        return Err(precondition("rank must satisfy r <= c"));
    }
    let threshold = constant
        .checked_mul(c.pow(3))
        .and_then(|t| t.checked_mul(r.pow(6)))
        .ok_or_else(|| precondition("parameter overflow"))?;
    if q < threshold {
        return Err(precondition(format!("q = {q} below threshold {threshold}")));
    }
    let cf = c as f64;
    let rf = r as f64;
    let a = 90.0 * cf * cf * rf.powi(4);
    let gamma = 3.0 * 10f64.sqrt() * cf * rf * rf;
    let exponent = a + 2.0 * gamma + 3.0;
    let log10 = exponent * (2.0 * u_size as f64).log10() - ln_gamma(a) / LN10;
    Ok(LisseBound {
        log10,
        params: KLParams { n: 2 * u_size, gamma, k: a as u64, admissible: true },
        formula: format!("(2|U|)^{exponent} / Gamma({a})"),
    })
}

/// Composed bound over all open sets: log10(c (q^{c/2} + g)^2) plus the lisse
/// bound at rank c with |U(k)| capped by 4q. The headline regime requires
/// q >= 1265 c^9; `raw` computes the product outside it, labeled non-theorem.
pub fn mext_count_bound(q: u64, g: u64, c: u64, raw: bool) -> Result<BoundValue> {
    let threshold = 1265u64
        .checked_mul(c.pow(9))
        .ok_or_else(|| precondition("parameter overflow"))?;
    if q < threshold && !raw {
        return Err(precondition(format!(
            "q = {q} below headline threshold 1265 c^9 = {threshold}; use raw to compute anyway"
        )));
    }
    let open_sets = (c as f64).log10()
        + 2.0 * ((q as f64).powf(c as f64 / 2.0) + g as f64).log10();
    let lisse = lisse_count_bound(q, 4 * q, c, c, 0)?;
    let log10 = open_sets + lisse.log10;
    Ok(BoundValue {
        exact: None,
        log10,
        formula: if raw && q < threshold {
            "composed (raw, outside theorem regime)".into()
        } else {
            "composed".into()
        },
    })
}

/// log10(lower_count) <= bound.log10.
pub fn consistency_check(lower_count_log10: f64, bound: &BoundValue) -> bool {
    lower_count_log10 <= bound.log10 + 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent Stirling-series log-gamma oracle.
    fn ln_gamma_stirling(x: f64) -> f64 {
        // shift up for series accuracy
        let mut x = x;
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

    #[test]
    fn ln_gamma_matches_independent_oracle() {
        for x in [2.0, 5.0, 24.0, 90.0, 111.97, 1000.0] {
            let a = ln_gamma(x);
            let b = ln_gamma_stirling(x);
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "x={x}: {a} vs {b}");
        }
        // Gamma(90) = 89! exactly
        let mut fact = BigUint::one();
        for i in 1u64..=89 {
            fact *= BigUint::from(i);
        }
        let via_fact = log10_biguint(&fact);
        assert!((ln_gamma(90.0) / LN10 - via_fact).abs() < 1e-9 * via_fact);
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite_largest_root(1).unwrap().value, 0.0);
        let h2 = hermite_largest_root(2).unwrap();
        assert!((h2.value - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        let h3 = hermite_largest_root(3).unwrap();
        assert!((h3.value - (1.5f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hermite_bracket_invariants_up_to_200() {
        for k in 2..=200u32 {
            let h = hermite_largest_root(k).unwrap();
            let lo0 = (((k - 1) as f64) / 2.0).sqrt();
            let hi0 = (2.0 * k as f64).sqrt();
            assert!(h.value >= lo0 - 1e-12 * lo0.max(1.0), "k={k}");
            assert!(h.value <= hi0, "k={k}");
            assert!(h.hi - h.lo <= 1e-12 * h.value.max(1.0) + 1e-12, "k={k}");
            if k == 2 {
                assert!((h.value - lo0).abs() < 1e-12);
            } else {
                assert!(h.value > lo0 + 1e-9, "equality only at k = 2");
            }
        }
        // asymptotic deficit: (sqrt(2k) - h_k)(2k)^{1/6} -> i1 / 6^{1/3}
        let k = 200u32;
        let h = hermite_largest_root(k).unwrap().value;
        let deficit = ((2.0 * k as f64).sqrt() - h) * (2.0 * k as f64).powf(1.0 / 6.0);
        let limit = 3.3721 / 6f64.powf(1.0 / 3.0);
        assert!((deficit - limit).abs() / limit < 0.05, "deficit {deficit} vs {limit}");
    }

    #[test]
    fn jacobi_bound_examples() {
        let h5 = hermite_largest_root(5).unwrap().value;
        let v = jacobi_root_lower_bound(8, 5).unwrap();
        assert!((v - (2.0f64 * 11.0 / (16.0 * 14.0)).sqrt() * h5).abs() < 1e-12);
        // k = 2 simplification: sqrt(2n/((n+2) n)) / sqrt(2)
        for n in [4u64, 10, 100] {
            let v = jacobi_root_lower_bound(n, 2).unwrap();
            let nf = n as f64;
            let simplified = (2.0 * nf / ((nf + 2.0) * nf)).sqrt() / 2f64.sqrt();
            assert!((v - simplified).abs() < 1e-12);
        }
        // decreasing to 0 in n
        let mut prev = f64::INFINITY;
        for n in [10u64, 100, 1000, 100000] {
            let v = jacobi_root_lower_bound(n, 4).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 0.02);
    }

    #[test]
    fn kl_cardinality_examples() {
        let b = kl_cardinality_bound(8, 0.0).unwrap();
        assert_eq!(b.exact.unwrap(), BigUint::from(72u32));
        assert!(kl_cardinality_bound(8, 1.0).is_err());
        // nonincreasing as cosphi decreases
        let mut prev = f64::INFINITY;
        for cos in [0.3, 0.2, 0.1, 0.05, 0.0] {
            let v = kl_cardinality_bound(50, cos).unwrap().log10;
            assert!(v <= prev + 1e-12);
            prev = v;
        }
        // cross-check against the fixed-k theorem at gamma = 1
        let search = kl_cardinality_bound(200, 1.0 / 200f64.sqrt()).unwrap();
        let fixed = kl_polynomial_bound(200, 1.0).unwrap();
        assert!(search.log10 <= fixed.binomial.log10 + 1e-12);
    }

    #[test]
    fn kl_polynomial_examples() {
        let b = kl_polynomial_bound(8, 1.0).unwrap();
        assert_eq!(b.params.k, 5);
        assert_eq!(b.binomial.exact.clone().unwrap(), BigUint::from(1584u32));
        assert!(kl_polynomial_bound(7, 1.0).is_err());
        // gamma form: log10(7^6 / Gamma(5)) = 6 log10 7 - log10 24
        let expect = 6.0 * 7f64.log10() - 24f64.log10();
        assert!((b.gamma_form.log10 - expect).abs() < 1e-9);
        assert!((expect - 3.691).abs() < 0.001);
        assert!((b.binomial.log10 - 3.1998).abs() < 0.001);
        // monotone in n
        let mut prev = BigUint::from(0u32);
        for n in [8u64, 16, 32, 64, 128] {
            let e = kl_polynomial_bound(n, 1.0).unwrap().binomial.exact.unwrap();
            assert!(e > prev);
            prev = e;
        }
        // gamma form dominates binomial wherever both are defined
        for (n, gamma) in [(8u64, 1.0), (30, 1.5), (100, 2.0), (1000, 3.0)] {
            let b = kl_polynomial_bound(n, gamma).unwrap();
            assert!(b.binomial.log10 <= b.gamma_form.log10 + 1e-9);
        }
    }

    #[test]
    fn lisse_bound_examples() {
        let b = lisse_count_bound(1601, 1601, 1, 1, 1500).unwrap();
        // independent arithmetic: exponent 90 + 6 sqrt(10) + 3, base 3202
        let exponent = 93.0 + 6.0 * 10f64.sqrt();
        let expect = exponent * 3202f64.log10() - ln_gamma(90.0) / LN10;
        assert!((b.log10 - expect).abs() < 1e-9);
        assert!((b.log10 - 256.3).abs() < 0.5);
        assert!((b.params.gamma - 3.0 * 10f64.sqrt()).abs() < 1e-12);
        assert_eq!(b.params.n, 3202);
        // below threshold
        assert!(lisse_count_bound(1499, 1499, 1, 1, 1500).is_err());
        assert!(lisse_count_bound(1499, 1499, 1, 1, 1265).is_ok());
        // slope in q approaches the exponent
        let b1 = lisse_count_bound(100000, 100000, 1, 1, 1500).unwrap().log10;
        let b2 = lisse_count_bound(1000000, 1000000, 1, 1, 1500).unwrap().log10;
        assert!(((b2 - b1) - exponent).abs() < 1e-6);
    }

    #[test]
    fn mext_bound_examples() {
        let b = mext_count_bound(1265, 0, 1, false).unwrap();
        let open_sets = 2.0 * 1265f64.sqrt().log10();
        let lisse = lisse_count_bound(1265, 4 * 1265, 1, 1, 0).unwrap().log10;
        assert!((b.log10 - (open_sets + lisse)).abs() < 1e-9);
        // formula arithmetic: c (q^{c/2} + g)^2 at (9, 1, 2) is 200
        let v = 2.0 * ((9f64.powf(1.0) + 1.0).powi(2));
        assert!((v - 200.0).abs() < 1e-12);
        // below threshold without raw
        assert!(mext_count_bound(100, 0, 1, false).is_err());
        assert!(mext_count_bound(100, 0, 1, true).is_ok());
        // lower bound q^{c/2 - 1} <= composed bound
        for (q, c) in [(1265u64, 1u64), (5000, 1), (647725, 2)] {
            let b = mext_count_bound(q, 0, c, true).unwrap();
            let lower = (c as f64 / 2.0 - 1.0) * (q as f64).log10();
            assert!(consistency_check(lower, &b), "q={q} c={c}");
        }
    }

    #[test]
    fn consistency_check_examples() {
        let b = lisse_count_bound(1601, 1601, 1, 1, 1500).unwrap();
        let bv = BoundValue { exact: None, log10: b.log10, formula: "lisse".into() };
        assert!(consistency_check(0.0, &bv)); // one class
        assert!(!consistency_check(400.0, &bv)); // synthetic failure
    }
}
