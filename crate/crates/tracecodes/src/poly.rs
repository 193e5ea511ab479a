//! Polynomials and rational functions over GF(p^n), with squarefree
//! decomposition and full factorization into monic irreducibles
//! (distinct-degree plus Cantor-Zassenhaus equal-degree splitting).

use crate::error::{precondition, Error, Result};
use crate::field::{FieldElement, FieldSpec};
use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A polynomial over the field, normalized (no trailing zero coefficients).
/// The zero polynomial has an empty coefficient list and degree None.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    pub coeffs: Vec<FieldElement>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Degree treating the zero polynomial as -infinity, clamped to -1.
    pub fn degree_i64(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn constant(spec: &FieldSpec, c: FieldElement) -> Poly {
        Poly::new(spec, vec![c])
    }

    pub fn one(spec: &FieldSpec) -> Poly {
        Poly::constant(spec, spec.one())
    }

    /// The monomial x.
    pub fn x(spec: &FieldSpec) -> Poly {
        Poly::new(spec, vec![spec.zero(), spec.one()])
    }

    pub fn new(_spec: &FieldSpec, mut coeffs: Vec<FieldElement>) -> Poly {
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Build from prime-subfield coefficients (ascending).
    pub fn from_ints(spec: &FieldSpec, ints: &[u64]) -> Poly {
        Poly::new(spec, ints.iter().map(|&c| spec.from_prime(c)).collect())
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    pub fn is_monic(&self, spec: &FieldSpec) -> bool {
        self.leading() == Some(&spec.one())
    }

    pub fn coeff(&self, spec: &FieldSpec, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| spec.zero())
    }

    pub fn add(&self, spec: &FieldSpec, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| spec.add(&self.coeff(spec, i), &other.coeff(spec, i)))
            .collect();
        Poly::new(spec, coeffs)
    }

    pub fn sub(&self, spec: &FieldSpec, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| spec.sub(&self.coeff(spec, i), &other.coeff(spec, i)))
            .collect();
        Poly::new(spec, coeffs)
    }

    pub fn mul(&self, spec: &FieldSpec, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![spec.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = spec.add(&coeffs[i + j], &spec.mul(a, b));
            }
        }
        Poly::new(spec, coeffs)
    }

    pub fn scale(&self, spec: &FieldSpec, c: &FieldElement) -> Poly {
        Poly::new(spec, self.coeffs.iter().map(|a| spec.mul(a, c)).collect())
    }

    /// Quotient and remainder; divisor must be nonzero.
    pub fn divrem(&self, spec: &FieldSpec, divisor: &Poly) -> Result<(Poly, Poly)> {
        let d_lead = divisor.leading().ok_or(Error::DivisionByZero)?;
        let d_inv = spec.inv(d_lead)?;
        let d_deg = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![spec.zero(); self.coeffs.len().saturating_sub(d_deg)];
        while rem.len() > d_deg || (rem.len() == d_deg && d_deg == 0 && !rem.is_empty()) {
            if rem.len() < divisor.coeffs.len() {
                break;
            }
            let c = spec.mul(rem.last().unwrap(), &d_inv);
            let shift = rem.len() - divisor.coeffs.len();
            if !c.is_zero() {
                for (j, b) in divisor.coeffs.iter().enumerate() {
                    rem[shift + j] = spec.sub(&rem[shift + j], &spec.mul(&c, b));
                }
                quot[shift] = c;
            }
            rem.pop();
            while rem.last().map(|x| x.is_zero()).unwrap_or(false) {
                rem.pop();
            }
        }
        Ok((Poly::new(spec, quot), Poly::new(spec, rem)))
    }

    pub fn rem(&self, spec: &FieldSpec, divisor: &Poly) -> Result<Poly> {
        Ok(self.divrem(spec, divisor)?.1)
    }

    pub fn monic(&self, spec: &FieldSpec) -> Result<Poly> {
        let lead = self.leading().ok_or(Error::DivisionByZero)?;
        Ok(self.scale(spec, &spec.inv(lead)?))
    }

    pub fn gcd(&self, spec: &FieldSpec, other: &Poly) -> Result<Poly> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(spec, &b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            Ok(a)
        } else {
            a.monic(spec)
        }
    }

    pub fn derivative(&self, spec: &FieldSpec) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| spec.scalar_mul((i + 1) as u64 % spec.p(), c))
            .collect();
        Poly::new(spec, coeffs)
    }

    pub fn eval(&self, spec: &FieldSpec, x: &FieldElement) -> FieldElement {
        let mut acc = spec.zero();
        for c in self.coeffs.iter().rev() {
            acc = spec.add(&spec.mul(&acc, x), c);
        }
        acc
    }

    /// Substitute x -> x + t.
    pub fn translate(&self, spec: &FieldSpec, t: &FieldElement) -> Poly {
        let shift = Poly::new(spec, vec![t.clone(), spec.one()]);
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(spec, &shift).add(spec, &Poly::constant(spec, c.clone()));
        }
        acc
    }

    pub fn pow_mod(&self, spec: &FieldSpec, e: &BigUint, modulus: &Poly) -> Result<Poly> {
        let mut result = Poly::one(spec).rem(spec, modulus)?;
        let mut acc = self.rem(spec, modulus)?;
        for i in 0..e.bits() {
            if e.bit(i) {
                result = result.mul(spec, &acc).rem(spec, modulus)?;
            }
            acc = acc.mul(spec, &acc).rem(spec, modulus)?;
        }
        Ok(result)
    }

    /// p-th root of a polynomial in k[x^p]: exact via the inverse Frobenius
    /// on coefficients.
    pub fn pth_root(&self, spec: &FieldSpec) -> Result<Poly> {
        let p = spec.p() as usize;
        let mut coeffs = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i % p == 0 {
                coeffs.push(spec.pth_root(c));
            } else if !c.is_zero() {
                return Err(precondition("polynomial is not a p-th power"));
            }
        }
        Ok(Poly::new(spec, coeffs))
    }

    /// Roots in the base field, via factorization.
    pub fn rational_roots(&self, spec: &FieldSpec) -> Result<Vec<FieldElement>> {
        let mut roots = Vec::new();
        for (f, _) in factor(spec, self)? {
            if f.degree() == Some(1) {
                roots.push(spec.neg(&f.coeffs[0]));
            }
        }
        roots.sort_by_key(|r| spec.index(r));
        Ok(roots)
    }
}

/// A rational function in coprime representation: monic nonzero denominator,
/// gcd(num, den) = 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalFunction {
    pub num: Poly,
    pub den: Poly,
}

/// Result of evaluating a rational function: a pole is a value, not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RationalValue {
    Value(FieldElement),
    Pole,
}

impl RationalFunction {
    pub fn new(spec: &FieldSpec, num: Poly, den: Poly) -> Result<RationalFunction> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let g = num.gcd(spec, &den)?;
        let (num, den) = if g.degree() > Some(0) {
            (num.divrem(spec, &g)?.0, den.divrem(spec, &g)?.0)
        } else {
            (num, den)
        };
        let lead_inv = spec.inv(den.leading().unwrap())?;
        Ok(RationalFunction { num: num.scale(spec, &lead_inv), den: den.monic(spec)? })
    }

    pub fn from_poly(spec: &FieldSpec, num: Poly) -> RationalFunction {
        RationalFunction { num, den: Poly::one(spec) }
    }

    pub fn one(spec: &FieldSpec) -> RationalFunction {
        RationalFunction { num: Poly::one(spec), den: Poly::one(spec) }
    }

    pub fn is_one(&self) -> bool {
        self.num.degree() == Some(0)
            && self.den.degree() == Some(0)
            && self.num.coeffs[0] == self.den.coeffs[0]
    }

    pub fn is_constant(&self) -> bool {
        self.num.degree_i64() <= 0 && self.den.degree() == Some(0)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// f/g as a reduced rational function.
    pub fn div(&self, spec: &FieldSpec, other: &RationalFunction) -> Result<RationalFunction> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RationalFunction::new(
            spec,
            self.num.mul(spec, &other.den),
            self.den.mul(spec, &other.num),
        )
    }

    /// Order of vanishing at infinity: deg(den) - deg(num). Positive means a
    /// zero at infinity, negative a pole.
    pub fn order_at_infinity(&self) -> i64 {
        self.den.degree_i64() - self.num.degree_i64()
    }

    pub fn eval(&self, spec: &FieldSpec, x: &FieldElement) -> RationalValue {
        let d = self.den.eval(spec, x);
        if d.is_zero() {
            return RationalValue::Pole;
        }
        let n = self.num.eval(spec, x);
        RationalValue::Value(spec.mul(&n, &spec.inv(&d).expect("nonzero")))
    }
}

/// rational_eval per the public operation contract.
pub fn rational_eval(spec: &FieldSpec, f: &RationalFunction, x: &FieldElement) -> RationalValue {
    f.eval(spec, x)
}

/// Squarefree decomposition in characteristic p: returns (g_i, m_i) with
/// f = lc * prod g_i^{m_i}, g_i monic squarefree pairwise coprime.
pub fn squarefree_decomposition(spec: &FieldSpec, f: &Poly) -> Result<Vec<(Poly, usize)>> {
    let mut out: Vec<(Poly, usize)> = Vec::new();
    let mut stack = vec![(f.monic(spec)?, 1usize)];
    while let Some((f, mult)) = stack.pop() {
        if f.degree() == Some(0) {
            continue;
        }
        let df = f.derivative(spec);
        if df.is_zero() {
            // f = g(x^p)
            stack.push((f.pth_root(spec)?, mult * spec.p() as usize));
            continue;
        }
        let mut c = f.gcd(spec, &df)?;
        let mut w = f.divrem(spec, &c)?.0; // squarefree part
        let mut i = 1usize;
        while w.degree() > Some(0) {
            let y = w.gcd(spec, &c)?;
            let part = w.divrem(spec, &y)?.0;
            if part.degree() > Some(0) {
                out.push((part, mult * i));
            }
            w = y.clone();
            c = c.divrem(spec, &y)?.0;
            i += 1;
        }
        if c.degree() > Some(0) {
            // remaining p-th power content
            stack.push((c.pth_root(spec)?, mult * spec.p() as usize));
        }
    }
    Ok(out)
}

/// Full factorization of a nonzero polynomial into monic irreducibles with
/// multiplicities. The Cantor-Zassenhaus splitting is seeded from the input
/// coefficients, so results are deterministic.
pub fn factor(spec: &FieldSpec, f: &Poly) -> Result<Vec<(Poly, usize)>> {
    if f.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let mut out = Vec::new();
    for (g, mult) in squarefree_decomposition(spec, f)? {
        for (h, d) in distinct_degree(spec, &g)? {
            for irr in equal_degree(spec, &h, d)? {
                out.push((irr, mult));
            }
        }
    }
    out.sort_by(|a, b| {
        (a.0.coeffs.len(), key(spec, &a.0)).cmp(&(b.0.coeffs.len(), key(spec, &b.0)))
    });
    Ok(out)
}

fn key(spec: &FieldSpec, f: &Poly) -> Vec<u64> {
    f.coeffs.iter().map(|c| spec.index(c)).collect()
}

fn distinct_degree(spec: &FieldSpec, f: &Poly) -> Result<Vec<(Poly, usize)>> {
    let mut out = Vec::new();
    let mut f = f.clone();
    let x = Poly::x(spec);
    let mut h = x.clone();
    let q = BigUint::from(spec.q());
    let mut d = 0usize;
    while f.degree() > Some(0) {
        d += 1;
        if 2 * d > f.degree().unwrap() {
            out.push((f.clone(), f.degree().unwrap()));
            break;
        }
        h = h.pow_mod(spec, &q, &f)?;
        let g = h.sub(spec, &x).gcd(spec, &f)?;
        if g.degree() > Some(0) {
            out.push((g.clone(), d));
            f = f.divrem(spec, &g)?.0;
            h = h.rem(spec, &f)?;
        }
    }
    Ok(out)
}

fn equal_degree(spec: &FieldSpec, f: &Poly, d: usize) -> Result<Vec<Poly>> {
    let deg = f.degree().unwrap_or(0);
    if deg == d {
        return Ok(vec![f.clone()]);
    }
    let mut rng = {
        // deterministic seed from the polynomial
        let mut s = 0xcbf29ce484222325u64;
        for c in &f.coeffs {
            s = (s ^ spec.index(c)).wrapping_mul(0x100000001b3);
        }
        ChaCha8Rng::seed_from_u64(s)
    };
    let mut pieces = vec![f.clone()];
    let mut done = Vec::new();
    let exp: BigUint = (BigUint::from(spec.q()).pow(d as u32) - BigUint::one()) >> 1;
    while let Some(g) = pieces.pop() {
        if g.degree() == Some(d) {
            done.push(g);
            continue;
        }
        // random h of degree < deg(g)
        let h = Poly::new(
            spec,
            (0..g.degree().unwrap())
                .map(|_| spec.element_from_index(rng.random_range(0..spec.q())))
                .collect(),
        );
        if h.degree_i64() < 1 && h.is_zero() {
            pieces.push(g);
            continue;
        }
        let split = if spec.q() % 2 == 1 {
            let w = h.pow_mod(spec, &exp, &g)?;
            w.sub(spec, &Poly::one(spec)).gcd(spec, &g)?
        } else {
            // char 2: trace map sum h^{2^i}, i < d * n
            let mut tr = h.rem(spec, &g)?;
            let mut acc = tr.clone();
            let two = BigUint::from(2u32);
            for _ in 1..(d * spec.n()) {
                acc = acc.pow_mod(spec, &two, &g)?;
                tr = tr.add(spec, &acc);
            }
            tr.gcd(spec, &g)?
        };
        let sd = split.degree().unwrap_or(0);
        if sd == 0 || sd == g.degree().unwrap() {
            pieces.push(g);
            continue;
        }
        let rest = g.divrem(spec, &split)?.0;
        pieces.push(split);
        pieces.push(rest);
    }
    Ok(done)
}

/// Irreducibility of a monic polynomial over GF(q), by the Rabin criterion.
pub fn is_irreducible(spec: &FieldSpec, f: &Poly) -> Result<bool> {
    let deg = match f.degree() {
        Some(0) | None => return Ok(false),
        Some(1) => return Ok(true),
        Some(d) => d,
    };
    let x = Poly::x(spec);
    let q = BigUint::from(spec.q());
    let mut h = x.clone();
    let mut powers = Vec::with_capacity(deg);
    for _ in 0..deg {
        h = h.pow_mod(spec, &q, f)?;
        powers.push(h.clone());
    }
    if powers[deg - 1] != x.rem(spec, f)? {
        return Ok(false);
    }
    for r in crate::field::prime_factors(deg as u64) {
        let g = powers[deg / r as usize - 1].sub(spec, &x).gcd(spec, f)?;
        if g.degree() != Some(0) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field_build;

    #[test]
    fn rational_eval_examples() {
        let f5 = field_build(5, 1, None).unwrap();
        let sq = RationalFunction::from_poly(&f5, Poly::from_ints(&f5, &[0, 0, 1]));
        assert_eq!(
            sq.eval(&f5, &f5.from_prime(3)),
            RationalValue::Value(f5.from_prime(4))
        );
        let inv_x = RationalFunction::new(
            &f5,
            Poly::one(&f5),
            Poly::from_ints(&f5, &[0, 1]),
        )
        .unwrap();
        assert_eq!(inv_x.eval(&f5, &f5.zero()), RationalValue::Pole);

        let f7 = field_build(7, 1, None).unwrap();
        let f = RationalFunction::new(
            &f7,
            Poly::from_ints(&f7, &[1, 1]),
            Poly::from_ints(&f7, &[6, 1]),
        )
        .unwrap();
        assert_eq!(f.eval(&f7, &f7.from_prime(2)), RationalValue::Value(f7.from_prime(3)));
    }

    #[test]
    fn factor_small() {
        let f7 = field_build(7, 1, None).unwrap();
        // x^2 - 1 = (x-1)(x+1)
        let f = Poly::from_ints(&f7, &[6, 0, 1]);
        let fs = factor(&f7, &f).unwrap();
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().all(|(g, m)| g.degree() == Some(1) && *m == 1));
        // x^2 + 1 irreducible over F_7 (-1 non-square mod 7)
        let g = Poly::from_ints(&f7, &[1, 0, 1]);
        let gs = factor(&f7, &g).unwrap();
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].0.degree(), Some(2));
        assert!(is_irreducible(&f7, &gs[0].0).unwrap());
    }

    #[test]
    fn factor_with_multiplicity_and_pth_powers() {
        let f5 = field_build(5, 1, None).unwrap();
        // x^2 (x+1) over F_5
        let f = Poly::from_ints(&f5, &[0, 0, 1]).mul(&f5, &Poly::from_ints(&f5, &[1, 1]));
        let fs = factor(&f5, &f).unwrap();
        let mut found = std::collections::HashMap::new();
        for (g, m) in fs {
            found.insert(g.coeffs[0].coeffs[0], m);
        }
        assert_eq!(found[&0], 2);
        assert_eq!(found[&1], 1);
        // x^5 = x^5: p-th power
        let h = Poly::from_ints(&f5, &[0, 0, 0, 0, 0, 1]);
        let hs = factor(&f5, &h).unwrap();
        assert_eq!(hs, vec![(Poly::from_ints(&f5, &[0, 1]), 5)]);
    }

    #[test]
    fn factor_extension_field() {
        let f9 = field_build(3, 2, Some(&[1, 0, 1])).unwrap();
        // x^2 + 1 = (x - t)(x + t) over GF(9) with t^2 = -1
        let f = Poly::from_ints(&f9, &[1, 0, 1]);
        let fs = factor(&f9, &f).unwrap();
        assert_eq!(fs.len(), 2);
        for (g, m) in &fs {
            assert_eq!(*m, 1);
            assert_eq!(g.degree(), Some(1));
        }
        // product reconstructs f
        let prod = fs[0].0.mul(&f9, &fs[1].0);
        assert_eq!(prod, f);
    }

    #[test]
    fn factor_char2() {
        let f8 = field_build(2, 3, None).unwrap();
        // x^3 + x + 1 splits completely over GF(8)
        let f = Poly::from_ints(&f8, &[1, 1, 0, 1]);
        let fs = factor(&f8, &f).unwrap();
        assert_eq!(fs.len(), 3);
        assert!(fs.iter().all(|(g, _)| g.degree() == Some(1)));
    }

    #[test]
    fn rational_reduction_is_coprime() {
        let f7 = field_build(7, 1, None).unwrap();
        let num = Poly::from_ints(&f7, &[0, 1]).mul(&f7, &Poly::from_ints(&f7, &[1, 1]));
        let den = Poly::from_ints(&f7, &[0, 3]); // 3x
        let r = RationalFunction::new(&f7, num, den).unwrap();
        // (x(x+1))/(3x) = 5(x+1) / 1 with monic denominator
        assert!(r.den.is_monic(&f7));
        assert_eq!(r.num.gcd(&f7, &r.den).unwrap().degree(), Some(0));
        assert_eq!(
            r.eval(&f7, &f7.from_prime(2)),
            RationalValue::Value(f7.from_prime(1)) // (2*3)/(6) = 1
        );
    }
}
