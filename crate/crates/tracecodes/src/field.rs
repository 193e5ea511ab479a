//! Exact arithmetic in finite fields GF(p^n).
//!
//! Elements are coefficient vectors of length `n` over Z/p in the basis
//! `1, t, ..., t^{n-1}`, where `t` is a root of the spec's monic irreducible
//! modulus. The element enumeration order used everywhere (trace-sample
//! domains, modulus search, generator search) is ascending
//! `index(x) = sum_i c_i p^i`, i.e. lexicographic on the coefficient vector
//! read from the highest basis coefficient down.

use crate::error::{precondition, Error, Result};
use serde::{Deserialize, Serialize};

/// Default cap on the field cardinality for which dense discrete-log tables
/// are precomputed. Above the cap, discrete logs fall back to baby-step
/// giant-step.
pub const DEFAULT_TABLE_CAP: u64 = 1 << 22;

/// An element of GF(p^n): coefficients reduced mod p, length n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement {
    pub coeffs: Vec<u64>,
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// A finite field GF(p^n) with verified modulus and generator, plus the
/// discrete-log table when q is below the table cap.
///
/// Immutable after construction; all element operations are pure functions
/// taking the spec explicitly.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    p: u64,
    n: usize,
    q: u64,
    modulus: Vec<u64>,
    generator: FieldElement,
    dlog: Option<Vec<u32>>,
}

/// Wire form of a field spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSpecJson {
    pub p: u64,
    pub n: usize,
    pub modulus: Vec<u64>,
    pub generator: Vec<u64>,
}

pub fn is_prime_u64(m: u64) -> bool {
    is_prime(m)
}

fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factors (without multiplicity) of `m`, by trial division.
pub(crate) fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

// -- dense polynomial helpers over Z/p (coefficient Vec<u64>, ascending) --
// Used only for modulus verification; field-level polynomials live in poly.rs.

fn zp_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn zp_mul_mod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    // reduce by monic f
    let deg_f = f.len() - 1;
    for i in (deg_f..prod.len()).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for j in 0..deg_f {
            let sub = (c * f[j]) % p;
            prod[i - deg_f + j] = (prod[i - deg_f + j] + p * p - sub) % p;
        }
    }
    prod.truncate(deg_f.max(1));
    prod
}

fn zp_pow_mod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    result.resize(f.len() - 1, 0);
    let mut acc = base.to_vec();
    acc.resize(f.len() - 1, 0);
    while e > 0 {
        if e & 1 == 1 {
            result = zp_mul_mod(&result, &acc, f, p);
        }
        acc = zp_mul_mod(&acc, &acc, f, p);
        e >>= 1;
    }
    result
}

fn zp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    zp_trim(&mut a);
    zp_trim(&mut b);
    while !b.is_empty() {
        // a mod b
        let inv_lead = zp_inv_scalar(*b.last().unwrap(), p);
        while a.len() >= b.len() {
            let c = (*a.last().unwrap() * inv_lead) % p;
            if c != 0 {
                let shift = a.len() - b.len();
                for (j, &bj) in b.iter().enumerate() {
                    let sub = (c * bj) % p;
                    a[shift + j] = (a[shift + j] + p - sub) % p;
                }
            }
            a.pop();
            zp_trim(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

fn zp_inv_scalar(a: u64, p: u64) -> u64 {
    // Fermat
    let mut e = p - 2;
    let mut acc = a % p;
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = r * acc % p;
        }
        acc = acc * acc % p;
        e >>= 1;
    }
    r
}

/// Rabin irreducibility test for a monic polynomial of degree n over Z/p.
fn zp_is_irreducible(f: &[u64], p: u64) -> bool {
    let n = f.len() - 1;
    if n == 0 {
        return false;
    }
    let x = vec![0u64, 1];
    if n == 1 {
        return true;
    }
    // h_j = x^{p^j} mod f
    let mut h = x.clone();
    h.resize(n, 0);
    let mut powers = Vec::with_capacity(n);
    for _ in 0..n {
        h = zp_pow_mod(&h, p, f, p);
        powers.push(h.clone());
    }
    // x^{p^n} == x
    let mut xq = powers[n - 1].clone();
    zp_trim(&mut xq);
    let mut xv = x.clone();
    zp_trim(&mut xv);
    if xq != xv {
        return false;
    }
    for r in prime_factors(n as u64) {
        let j = n / r as usize;
        let mut g = powers[j - 1].clone();
        // g - x
        if g.len() < 2 {
            g.resize(2, 0);
        }
        g[1] = (g[1] + p - 1) % p;
        zp_trim(&mut g);
        let gcd = zp_gcd(&g, f, p);
        if gcd.len() != 1 {
            return false;
        }
    }
    true
}

impl FieldSpec {
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn generator(&self) -> &FieldElement {
        &self.generator
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { coeffs: vec![0; self.n] }
    }

    pub fn one(&self) -> FieldElement {
        self.from_prime(1)
    }

    /// Embed an integer via the prime subfield.
    pub fn from_prime(&self, a: u64) -> FieldElement {
        let mut coeffs = vec![0; self.n];
        coeffs[0] = a % self.p;
        FieldElement { coeffs }
    }

    pub fn element(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() > self.n {
            return Err(precondition(format!(
                "element has {} coefficients, field degree is {}",
                coeffs.len(),
                self.n
            )));
        }
        let mut c: Vec<u64> = coeffs.iter().map(|&v| v % self.p).collect();
        c.resize(self.n, 0);
        Ok(FieldElement { coeffs: c })
    }

    /// Enumeration index of an element: sum c_i p^i.
    pub fn index(&self, x: &FieldElement) -> u64 {
        let mut idx = 0u64;
        for &c in x.coeffs.iter().rev() {
            idx = idx * self.p + c;
        }
        idx
    }

    pub fn element_from_index(&self, mut idx: u64) -> FieldElement {
        let mut coeffs = vec![0u64; self.n];
        for c in coeffs.iter_mut() {
            *c = idx % self.p;
            idx /= self.p;
        }
        FieldElement { coeffs }
    }

    /// All field elements in the fixed enumeration order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |i| self.element_from_index(i))
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| (x + y) % self.p)
            .collect();
        FieldElement { coeffs }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| (x + self.p - y) % self.p)
            .collect();
        FieldElement { coeffs }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        let coeffs = a.coeffs.iter().map(|&x| (self.p - x) % self.p).collect();
        FieldElement { coeffs }
    }

    pub fn scalar_mul(&self, c: u64, a: &FieldElement) -> FieldElement {
        let c = c % self.p;
        let coeffs = a.coeffs.iter().map(|&x| x * c % self.p).collect();
        FieldElement { coeffs }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        if self.n == 1 {
            return FieldElement { coeffs: vec![a.coeffs[0] * b.coeffs[0] % self.p] };
        }
        let n = self.n;
        let mut prod = vec![0u64; 2 * n - 1];
        for i in 0..n {
            let ai = a.coeffs[i];
            if ai == 0 {
                continue;
            }
            for j in 0..n {
                prod[i + j] = (prod[i + j] + ai * b.coeffs[j]) % self.p;
            }
        }
        for i in (n..2 * n - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..n {
                let sub = c * self.modulus[j] % self.p;
                prod[i - n + j] = (prod[i - n + j] + self.p - sub) % self.p;
            }
        }
        prod.truncate(n);
        FieldElement { coeffs: prod }
    }

    pub fn pow(&self, a: &FieldElement, mut e: u64) -> FieldElement {
        let mut result = self.one();
        let mut acc = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &acc);
            }
            acc = self.mul(&acc, &acc);
            e >>= 1;
        }
        result
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// Frobenius x -> x^p.
    pub fn frobenius(&self, a: &FieldElement) -> FieldElement {
        self.pow(a, self.p)
    }

    /// Inverse Frobenius, i.e. the unique p-th root: x -> x^{p^{n-1}}.
    pub fn pth_root(&self, a: &FieldElement) -> FieldElement {
        let mut acc = a.clone();
        for _ in 1..self.n {
            acc = self.frobenius(&acc);
        }
        acc
    }

    /// Absolute trace Tr(x) = x + x^p + ... + x^{p^{n-1}}, as a residue mod p.
    pub fn trace_to_prime(&self, x: &FieldElement) -> u64 {
        let mut tr = x.clone();
        let mut cur = x.clone();
        for _ in 1..self.n {
            cur = self.frobenius(&cur);
            tr = self.add(&tr, &cur);
        }
        debug_assert!(tr.coeffs[1..].iter().all(|&c| c == 0));
        tr.coeffs[0]
    }

    /// Discrete log with respect to the spec's generator, in [0, q-2].
    pub fn discrete_log(&self, x: &FieldElement) -> Result<u64> {
        if x.is_zero() {
            return Err(Error::ZeroLog);
        }
        if let Some(table) = &self.dlog {
            return Ok(table[self.index(x) as usize] as u64);
        }
        // baby-step giant-step
        let m = (self.q as f64).sqrt().ceil() as u64 + 1;
        let mut baby = std::collections::HashMap::with_capacity(m as usize);
        let mut acc = self.one();
        for j in 0..m {
            baby.entry(self.index(&acc)).or_insert(j);
            acc = self.mul(&acc, &self.generator);
        }
        let giant = self.inv(&self.pow(&self.generator, m))?;
        let mut cur = x.clone();
        for i in 0..=m {
            if let Some(&j) = baby.get(&self.index(&cur)) {
                return Ok((i * m + j) % (self.q - 1));
            }
            cur = self.mul(&cur, &giant);
        }
        unreachable!("generator has full order, BSGS must find a log")
    }

    pub fn to_json(&self) -> FieldSpecJson {
        FieldSpecJson {
            p: self.p,
            n: self.n,
            modulus: self.modulus.clone(),
            generator: self.generator.coeffs.clone(),
        }
    }

    pub fn from_json(j: &FieldSpecJson) -> Result<FieldSpec> {
        let spec = field_build_with_cap(j.p, j.n, Some(&j.modulus), DEFAULT_TABLE_CAP)?;
        let g = spec.element(&j.generator)?;
        // verify the stated generator before adopting it
        for r in prime_factors(spec.q - 1) {
            if spec.pow(&g, (spec.q - 1) / r) == spec.one() {
                return Err(precondition("stated generator does not have order q-1"));
            }
        }
        if g == spec.generator {
            return Ok(spec);
        }
        let mut spec = FieldSpec { generator: g, dlog: None, ..spec };
        spec.build_tables(DEFAULT_TABLE_CAP);
        Ok(spec)
    }

    fn build_tables(&mut self, cap: u64) {
        if self.q > cap {
            return;
        }
        let mut table = vec![u32::MAX; self.q as usize];
        let mut acc = self.one();
        for j in 0..self.q - 1 {
            table[self.index(&acc) as usize] = j as u32;
            acc = self.mul(&acc, &self.generator);
        }
        self.dlog = Some(table);
    }
}

/// Build GF(p^n). When `modulus` is omitted, the first monic irreducible of
/// degree n in enumeration order is used. The generator is the first element
/// (in enumeration order) of exact multiplicative order q-1.
pub fn field_build(p: u64, n: usize, modulus: Option<&[u64]>) -> Result<FieldSpec> {
    field_build_with_cap(p, n, modulus, DEFAULT_TABLE_CAP)
}

pub fn field_build_with_cap(
    p: u64,
    n: usize,
    modulus: Option<&[u64]>,
    table_cap: u64,
) -> Result<FieldSpec> {
    if p >= 1 << 20 {
        return Err(precondition(format!("p = {p} exceeds 2^20")));
    }
    if !is_prime(p) {
        return Err(Error::NonPrime(p));
    }
    if n == 0 {
        return Err(precondition("extension degree must be >= 1"));
    }
    let q = p.checked_pow(n as u32).ok_or_else(|| precondition("p^n overflows"))?;

    let modulus: Vec<u64> = match modulus {
        Some(m) => {
            let mut m: Vec<u64> = m.iter().map(|&c| c % p).collect();
            zp_trim(&mut m);
            if m.len() != n + 1 || *m.last().unwrap() != 1 {
                return Err(Error::BadModulus { expected: n, got: m.len().saturating_sub(1) });
            }
            if !zp_is_irreducible(&m, p) {
                return Err(Error::ReducibleModulus { p });
            }
            m
        }
        None => {
            let mut found = None;
            // lower coefficients in enumeration order, leading coefficient 1
            for idx in 0..q {
                let mut f = Vec::with_capacity(n + 1);
                let mut v = idx;
                for _ in 0..n {
                    f.push(v % p);
                    v /= p;
                }
                f.push(1);
                if zp_is_irreducible(&f, p) {
                    found = Some(f);
                    break;
                }
            }
            found.ok_or_else(|| precondition("no irreducible modulus found"))?
        }
    };

    let mut spec = FieldSpec {
        p,
        n,
        q,
        modulus,
        generator: FieldElement { coeffs: vec![0; n] },
        dlog: None,
    };

    let factors = prime_factors(q - 1);
    let mut gen = None;
    for idx in 1..q {
        let g = spec.element_from_index(idx);
        if factors.iter().all(|&r| spec.pow(&g, (q - 1) / r) != spec.one()) {
            gen = Some(g);
            break;
        }
    }
    spec.generator = gen.expect("GF(q)^x is cyclic, a generator exists");
    spec.build_tables(table_cap);
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn gf5_generator_is_2() {
        let f = field_build(5, 1, None).unwrap();
        assert_eq!(f.generator().coeffs, vec![2]);
        // exhaustive order check
        let mut seen = std::collections::HashSet::new();
        let mut acc = f.one();
        for _ in 0..4 {
            seen.insert(f.index(&acc));
            acc = f.mul(&acc, f.generator());
        }
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn gf9_with_modulus_t2_plus_1() {
        let f = field_build(3, 2, Some(&[1, 0, 1])).unwrap();
        assert_eq!(f.q(), 9);
        // t^2 = -1: t * t = 2
        let t = f.element(&[0, 1]).unwrap();
        assert_eq!(f.mul(&t, &t), f.from_prime(2));
    }

    #[test]
    fn non_prime_rejected() {
        assert!(matches!(field_build(4, 1, None), Err(Error::NonPrime(4))));
    }

    #[test]
    fn reducible_modulus_rejected() {
        // t^2 - 1 = (t-1)(t+1) over F_3
        assert!(matches!(
            field_build(3, 2, Some(&[2, 0, 1])),
            Err(Error::ReducibleModulus { .. })
        ));
    }

    #[test]
    fn trace_examples() {
        let f9 = field_build(3, 2, Some(&[1, 0, 1])).unwrap();
        let t = f9.element(&[0, 1]).unwrap();
        assert_eq!(f9.trace_to_prime(&t), 0); // t + t^3 = t - t = 0
        assert_eq!(f9.trace_to_prime(&f9.one()), 2); // n mod p
        let f5 = field_build(5, 1, None).unwrap();
        assert_eq!(f5.trace_to_prime(&f5.from_prime(3)), 3);
    }

    #[test]
    fn discrete_log_examples() {
        let f = field_build(5, 1, None).unwrap();
        assert_eq!(f.discrete_log(&f.from_prime(4)).unwrap(), 2); // 2^2 = 4
        assert_eq!(f.discrete_log(&f.one()).unwrap(), 0);
        assert!(matches!(f.discrete_log(&f.zero()), Err(Error::ZeroLog)));
    }

    #[test]
    fn discrete_log_round_trip() {
        for spec in [field_build(7, 1, None).unwrap(), field_build(3, 3, None).unwrap()] {
            for j in 0..spec.q() - 1 {
                let x = spec.pow(spec.generator(), j);
                assert_eq!(spec.discrete_log(&x).unwrap(), j);
            }
        }
    }

    #[test]
    fn bsgs_agrees_with_table() {
        let with_table = field_build(101, 1, None).unwrap();
        let no_table = field_build_with_cap(101, 1, None, 1).unwrap();
        for j in [0u64, 1, 17, 50, 99] {
            let x = with_table.pow(with_table.generator(), j);
            assert_eq!(no_table.discrete_log(&x).unwrap(), j);
        }
    }

    #[test]
    fn field_axioms_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for spec in [
            field_build(5, 1, None).unwrap(),
            field_build(3, 2, None).unwrap(),
            field_build(7, 3, None).unwrap(),
            field_build(2, 5, None).unwrap(),
        ] {
            for _ in 0..10_000 {
                let a = spec.element_from_index(rng.random_range(0..spec.q()));
                let b = spec.element_from_index(rng.random_range(0..spec.q()));
                let c = spec.element_from_index(rng.random_range(0..spec.q()));
                let ab_c = spec.mul(&spec.mul(&a, &b), &c);
                let a_bc = spec.mul(&a, &spec.mul(&b, &c));
                assert_eq!(ab_c, a_bc);
                let lhs = spec.mul(&a, &spec.add(&b, &c));
                let rhs = spec.add(&spec.mul(&a, &b), &spec.mul(&a, &c));
                assert_eq!(lhs, rhs);
                if !a.is_zero() {
                    assert_eq!(spec.mul(&a, &spec.inv(&a).unwrap()), spec.one());
                }
            }
        }
    }

    #[test]
    fn frobenius_fixes_exactly_prime_subfield() {
        for spec in [
            field_build(7, 3, None).unwrap(), // q = 343
            field_build(3, 2, None).unwrap(),
            field_build(2, 4, None).unwrap(),
        ] {
            let mut fixed = 0;
            for x in spec.elements() {
                let fx = spec.frobenius(&x);
                if fx == x {
                    fixed += 1;
                    assert!(x.coeffs[1..].iter().all(|&c| c == 0));
                }
                // additivity spot: (x+1)^p = x^p + 1
                let x1 = spec.add(&x, &spec.one());
                assert_eq!(spec.frobenius(&x1), spec.add(&fx, &spec.one()));
                // trace is Frobenius-invariant
                assert_eq!(spec.trace_to_prime(&fx), spec.trace_to_prime(&x));
            }
            assert_eq!(fixed, spec.p());
        }
    }
}
