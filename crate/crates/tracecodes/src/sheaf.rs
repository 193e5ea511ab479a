//! Explicit rank-1 and supermorse kernel families: trace values on their
//! lisse locus, analytic conductors, canonical forms deciding geometric
//! isomorphism, class enumeration, and the normalized Fourier transform.

use crate::characters::{AdditiveCharacter, MultiplicativeCharacter};
use crate::error::{precondition, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::poly::{factor, is_irreducible, Poly, RationalFunction, RationalValue};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::Arc;

/// A closed point of the projective line over the base field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosedPoint {
    Infinity,
    /// A monic irreducible polynomial; its degree weights the point.
    Finite(Poly),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularPoint {
    pub point: ClosedPoint,
    pub degree: usize,
    pub swan: u64,
    pub tame: bool,
}

/// Conductor bookkeeping: genus + rank + sum of max(1, swan) over singular
/// points counted with their degree over the algebraic closure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConductorReport {
    pub genus: u64,
    pub rank: u64,
    pub singular_points: Vec<SingularPoint>,
    pub conductor: u64,
}

/// Rank-1 descriptor: kernel x -> psi(f1(x)) chi(f2(x)).
#[derive(Debug, Clone)]
pub struct AskDescriptor {
    pub spec: Arc<FieldSpec>,
    pub f1: Poly,
    pub f2: RationalFunction,
    pub psi: AdditiveCharacter,
    pub chi: MultiplicativeCharacter,
}

#[derive(Debug, Clone)]
pub struct SupermorseDescriptor {
    pub spec: Arc<FieldSpec>,
    pub f: Poly,
}

#[derive(Debug, Clone)]
pub enum SheafDescriptor {
    Ask(AskDescriptor),
    Supermorse(SupermorseDescriptor),
    /// Numeric-level only: the Fourier transform of the inner descriptor.
    FourierTwist {
        inner: Box<SheafDescriptor>,
        psi_a: FieldElement,
    },
}

impl AskDescriptor {
    pub fn new(
        spec: Arc<FieldSpec>,
        f1: Poly,
        f2: RationalFunction,
        psi: AdditiveCharacter,
        chi: MultiplicativeCharacter,
    ) -> Result<AskDescriptor> {
        if psi.is_trivial() {
            return Err(precondition("psi must be nontrivial"));
        }
        if f1.degree_i64() >= spec.p() as i64 {
            return Err(precondition(format!(
                "deg f1 = {} must be < p = {}",
                f1.degree_i64(),
                spec.p()
            )));
        }
        let f2 = if chi.is_trivial() { RationalFunction::one(&spec) } else { f2 };
        if f2.is_zero() {
            return Err(precondition("f2 must be nonzero"));
        }
        Ok(AskDescriptor { spec, f1, f2, psi, chi })
    }

    /// Convenience: polynomial f2 from prime-subfield coefficients.
    pub fn from_ints(
        spec: &Arc<FieldSpec>,
        f1: &[u64],
        f2: &[u64],
        chi: MultiplicativeCharacter,
    ) -> Result<AskDescriptor> {
        AskDescriptor::new(
            spec.clone(),
            Poly::from_ints(spec, f1),
            RationalFunction::from_poly(spec, Poly::from_ints(spec, f2)),
            AdditiveCharacter::standard(spec.clone()),
            chi,
        )
    }

    /// f1 with the psi-twist folded in (psi_a(f) = psi_1(a f)), reduced.
    pub fn canonical_f1(&self) -> Poly {
        ask_reduce(&self.spec, &self.f1.scale(&self.spec, &self.psi.a))
    }

    /// Canonical multiplicative part: each irreducible factor of f2 tagged
    /// with (m * multiplicity) mod (q-1), zeros dropped. Generator-relative,
    /// but fixed per FieldSpec, so equal lists decide geometric isomorphism.
    pub fn canonical_kummer(&self) -> Result<Vec<(Poly, u64)>> {
        let q1 = self.spec.q() - 1;
        let mut out = Vec::new();
        if self.chi.is_trivial() {
            return Ok(out);
        }
        for (pi, mult, negated) in factored_rational(&self.spec, &self.f2)? {
            let e = (self.chi.m % q1) * (mult as u64 % q1) % q1;
            let e = if negated { (q1 - e) % q1 } else { e };
            if e != 0 {
                out.push((pi, e));
            }
        }
        out.sort_by(|a, b| poly_key(&self.spec, &a.0).cmp(&poly_key(&self.spec, &b.0)));
        Ok(out)
    }

    pub fn descriptor_id(&self) -> Result<String> {
        let f1 = self.canonical_f1();
        let kummer = self.canonical_kummer()?;
        let mut h = Sha256::new();
        h.update(b"ask");
        hash_field(&mut h, &self.spec);
        hash_poly(&mut h, &self.spec, &f1);
        for (pi, e) in &kummer {
            hash_poly(&mut h, &self.spec, pi);
            h.update(e.to_le_bytes());
        }
        Ok(hex::encode(h.finalize()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": "ask",
            "f1": self.f1.coeffs,
            "f2num": self.f2.num.coeffs,
            "f2den": self.f2.den.coeffs,
            "psi_a": self.psi.a.coeffs,
            "chi_m": self.chi.m,
        })
    }
}

fn poly_key(spec: &FieldSpec, f: &Poly) -> Vec<u64> {
    f.coeffs.iter().map(|c| spec.index(c)).collect()
}

fn hash_poly(h: &mut Sha256, spec: &FieldSpec, f: &Poly) {
    h.update((f.coeffs.len() as u64).to_le_bytes());
    for c in &f.coeffs {
        h.update(spec.index(c).to_le_bytes());
    }
}

fn hash_field(h: &mut Sha256, spec: &FieldSpec) {
    h.update(spec.p().to_le_bytes());
    h.update((spec.n() as u64).to_le_bytes());
    for c in spec.modulus() {
        h.update(c.to_le_bytes());
    }
}

/// Irreducible factors of num and den; `negated` marks denominator factors.
fn factored_rational(
    spec: &FieldSpec,
    f: &RationalFunction,
) -> Result<Vec<(Poly, usize, bool)>> {
    let mut out = Vec::new();
    if f.num.degree() > Some(0) {
        for (pi, m) in factor(spec, &f.num)? {
            out.push((pi, m, false));
        }
    }
    if f.den.degree() > Some(0) {
        for (pi, m) in factor(spec, &f.den)? {
            out.push((pi, m, true));
        }
    }
    Ok(out)
}

impl SupermorseDescriptor {
    pub fn new(spec: Arc<FieldSpec>, f: Poly) -> Result<SupermorseDescriptor> {
        match check_supermorse(&spec, &f)? {
            SupermorseCheck::Ok { .. } => Ok(SupermorseDescriptor { spec, f }),
            SupermorseCheck::Reject(why) => Err(precondition(why)),
        }
    }

    pub fn descriptor_id(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"supermorse");
        hash_field(&mut h, &self.spec);
        hash_poly(&mut h, &self.spec, &self.f);
        hex::encode(h.finalize())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "kind": "supermorse", "f": self.f.coeffs })
    }
}

/// Trace values on an explicit domain, with the descriptor's bookkeeping.
#[derive(Debug, Clone)]
pub struct TraceSample {
    pub spec: Arc<FieldSpec>,
    pub domain: Vec<FieldElement>,
    pub values: Vec<Complex64>,
    pub rank: u64,
    pub conductor: u64,
    pub descriptor_id: String,
    /// Set when rank/conductor are inherited rather than derived (Fourier).
    pub numeric_only: bool,
}

impl TraceSample {
    /// Value at x, zero off the domain. Linear scan; callers needing bulk
    /// access should use `dense_values`.
    pub fn value_at(&self, x: &FieldElement) -> Complex64 {
        match self.domain.iter().position(|y| y == x) {
            Some(i) => self.values[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Values indexed by the field enumeration order, zero-extended.
    pub fn dense_values(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.spec.q() as usize];
        for (x, v) in self.domain.iter().zip(&self.values) {
            out[self.spec.index(x) as usize] = *v;
        }
        out
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x", "re", "im"])?;
        for (x, v) in self.domain.iter().zip(&self.values) {
            let coeffs: Vec<String> = x.coeffs.iter().map(|c| c.to_string()).collect();
            wtr.write_record([coeffs.join(" "), v.re.to_string(), v.im.to_string()])?;
        }
        wtr.flush().map_err(crate::error::Error::Io)?;
        Ok(())
    }
}

/// Canonical representative of f1 modulo h^p - h + C: constant term dropped,
/// and monomials a x^{mp} (m >= 1) replaced by their p-th-root image a' x^m
/// until no positive exponent is divisible by p.
pub fn ask_reduce(spec: &FieldSpec, f1: &Poly) -> Poly {
    let p = spec.p() as usize;
    let mut coeffs: Vec<FieldElement> = f1.coeffs.clone();
    if !coeffs.is_empty() {
        coeffs[0] = spec.zero();
    }
    loop {
        let mut moved = false;
        for i in (p..coeffs.len()).rev() {
            if i % p == 0 && !coeffs[i].is_zero() {
                let root = spec.pth_root(&coeffs[i]);
                coeffs[i] = spec.zero();
                let j = i / p;
                coeffs[j] = spec.add(&coeffs[j], &root);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    Poly::new(spec, coeffs)
}

/// Kummer canonical form: irreducible factors of f2 with multiplicities
/// taken mod d (denominator factors negated), zero entries dropped.
pub fn kummer_reduce(
    spec: &FieldSpec,
    f2: &RationalFunction,
    d: u64,
) -> Result<Vec<(Poly, u64)>> {
    if f2.is_zero() {
        return Err(crate::error::Error::DivisionByZero);
    }
    if d == 0 {
        return Err(precondition("order d must be >= 1"));
    }
    let mut out = Vec::new();
    for (pi, mult, negated) in factored_rational(spec, f2)? {
        let m = (mult as u64) % d;
        let m = if negated { (d - m) % d } else { m };
        if m != 0 {
            out.push((pi, m));
        }
    }
    out.sort_by(|a, b| poly_key(spec, &a.0).cmp(&poly_key(spec, &b.0)));
    Ok(out)
}

/// Geometric isomorphism for two descriptors sharing field, psi, and chi.
pub fn ask_geom_isomorphic(d1: &AskDescriptor, d2: &AskDescriptor) -> Result<bool> {
    if d1.spec.p() != d2.spec.p()
        || d1.spec.n() != d2.spec.n()
        || d1.spec.modulus() != d2.spec.modulus()
    {
        return Err(crate::error::Error::MismatchedField);
    }
    if d1.psi.a != d2.psi.a || d1.chi.m != d2.chi.m {
        return Err(precondition(
            "ask_geom_isomorphic requires matching psi and chi; compare descriptor ids instead",
        ));
    }
    let spec = &d1.spec;
    let diff = ask_reduce(spec, &d1.f1.sub(spec, &d2.f1));
    if !diff.is_zero() {
        return Ok(false);
    }
    let d = d1.chi.order();
    let ratio = d1.f2.div(spec, &d2.f2)?;
    Ok(kummer_reduce(spec, &ratio, d)?.is_empty())
}

/// Trace values psi(f1(x)) chi(f2(x)) on U(k) = k minus zeros/poles of f2.
pub fn trace_ask(desc: &AskDescriptor) -> Result<TraceSample> {
    let spec = &desc.spec;
    let chi_trivial = desc.chi.is_trivial();
    let mut domain = Vec::new();
    let mut values = Vec::new();
    for x in spec.elements() {
        let kummer = if chi_trivial {
            Complex64::new(1.0, 0.0)
        } else {
            match desc.f2.eval(spec, &x) {
                RationalValue::Pole => continue,
                RationalValue::Value(v) if v.is_zero() => continue,
                RationalValue::Value(v) => desc.chi.eval(&v),
            }
        };
        let v = desc.psi.eval(&desc.f1.eval(spec, &x)) * kummer;
        domain.push(x);
        values.push(v);
    }
    let cond = conductor_ask(desc)?;
    Ok(TraceSample {
        spec: spec.clone(),
        domain,
        values,
        rank: 1,
        conductor: cond.conductor,
        descriptor_id: desc.descriptor_id()?,
        numeric_only: false,
    })
}

/// Conductor of a rank-1 descriptor: genus 0, rank 1, tame points where the
/// reduced Kummer multiplicity is nonzero, and infinity with swan = deg f1.
pub fn conductor_ask(desc: &AskDescriptor) -> Result<ConductorReport> {
    let spec = &desc.spec;
    if desc.f1.degree_i64() >= spec.p() as i64 {
        return Err(precondition("deg f1 >= p: wild reduction out of scope"));
    }
    let d = desc.chi.order();
    let mut singular = Vec::new();
    for (pi, _m) in kummer_reduce(spec, &desc.f2, d)? {
        let degree = pi.degree().unwrap_or(0);
        singular.push(SingularPoint { point: ClosedPoint::Finite(pi), degree, swan: 0, tame: true });
    }
    let swan_inf = desc.f1.degree_i64().max(0) as u64;
    let ord_inf = desc.f2.order_at_infinity().rem_euclid(d as i64);
    if swan_inf > 0 || ord_inf != 0 {
        singular.push(SingularPoint {
            point: ClosedPoint::Infinity,
            degree: 1,
            swan: swan_inf,
            tame: swan_inf == 0,
        });
    }
    let conductor =
        1 + singular.iter().map(|s| s.degree as u64 * s.swan.max(1)).sum::<u64>();
    Ok(ConductorReport { genus: 0, rank: 1, singular_points: singular, conductor })
}

/// Result of the supermorse test: the critical locus or a rejection reason.
#[derive(Debug, Clone)]
pub enum SupermorseCheck {
    Ok {
        /// Irreducible factors of f', one per closed critical point.
        z_factors: Vec<Poly>,
        /// Number of critical points over the algebraic closure.
        z_count: usize,
        /// Critical values rational over the base field (excluded from the
        /// trace domain).
        s_rational: Vec<FieldElement>,
        /// Monic polynomial whose roots over the closure are the critical
        /// values, with multiplicity one each.
        s_poly: Poly,
    },
    Reject(String),
}

/// Checks: deg f < p, all zeros of f' simple, distinct critical values.
pub fn check_supermorse(spec: &Arc<FieldSpec>, f: &Poly) -> Result<SupermorseCheck> {
    let deg = match f.degree() {
        Some(d) if d >= 2 => d,
        _ => return Err(precondition("supermorse requires deg f >= 2")),
    };
    if deg as u64 >= spec.p() {
        return Ok(SupermorseCheck::Reject(format!(
            "deg f = {deg} is not < p = {}",
            spec.p()
        )));
    }
    let df = f.derivative(spec);
    let ddf = df.derivative(spec);
    let g = if ddf.is_zero() { df.monic(spec)? } else { df.gcd(spec, &ddf)? };
    if g.degree() != Some(0) {
        return Ok(SupermorseCheck::Reject("f' has a repeated zero".into()));
    }
    // Critical values: N(y) = prod over factors pi of f' of charpoly of
    // multiplication-by-f on k[x]/(pi); distinct values <=> N squarefree.
    let factors: Vec<Poly> = factor(spec, &df)?.into_iter().map(|(pi, _)| pi).collect();
    let mut n_poly = Poly::one(spec);
    for pi in &factors {
        n_poly = n_poly.mul(spec, &charpoly_mul_by(spec, f, pi)?);
    }
    let dn = n_poly.derivative(spec);
    let squarefree = !dn.is_zero() && n_poly.gcd(spec, &dn)?.degree() == Some(0);
    if !squarefree {
        return Ok(SupermorseCheck::Reject("critical values are not distinct".into()));
    }
    let s_rational = n_poly.rational_roots(spec)?;
    Ok(SupermorseCheck::Ok {
        z_count: df.degree().unwrap_or(0),
        z_factors: factors,
        s_rational,
        s_poly: n_poly,
    })
}

/// Characteristic polynomial (in y) of multiplication by f on k[x]/(pi):
/// det(y I - M) by Laplace expansion; pi has small degree here.
fn charpoly_mul_by(spec: &Arc<FieldSpec>, f: &Poly, pi: &Poly) -> Result<Poly> {
    let e = pi.degree().unwrap();
    // columns: coordinates of f * x^j mod pi
    let mut m = vec![vec![spec.zero(); e]; e]; // m[row][col]
    let fred = f.rem(spec, pi)?;
    let mut cur = fred.clone();
    for j in 0..e {
        for (i, row) in m.iter_mut().enumerate() {
            row[j] = cur.coeff(spec, i);
        }
        if j + 1 < e {
            cur = cur.mul(spec, &Poly::x(spec)).rem(spec, pi)?;
        }
    }
    // entries of yI - M as polynomials in y
    let entry = |i: usize, j: usize| -> Poly {
        let neg = spec.neg(&m[i][j]);
        if i == j {
            Poly::new(spec, vec![neg, spec.one()])
        } else {
            Poly::constant(spec, neg)
        }
    };
    let idx: Vec<usize> = (0..e).collect();
    Ok(det_laplace(spec, &entry, &idx, &idx))
}

fn det_laplace(
    spec: &Arc<FieldSpec>,
    entry: &dyn Fn(usize, usize) -> Poly,
    rows: &[usize],
    cols: &[usize],
) -> Poly {
    if rows.len() == 1 {
        return entry(rows[0], cols[0]);
    }
    let mut acc = Poly::zero();
    let sub_rows = &rows[1..];
    for (j, &c) in cols.iter().enumerate() {
        let sub_cols: Vec<usize> =
            cols.iter().enumerate().filter(|&(jj, _)| jj != j).map(|(_, &cc)| cc).collect();
        let minor = det_laplace(spec, entry, sub_rows, &sub_cols);
        let term = entry(rows[0], c).mul(spec, &minor);
        acc = if j % 2 == 0 { acc.add(spec, &term) } else { acc.sub(spec, &term) };
    }
    acc
}

/// Fiber-count-minus-one trace on k minus the rational critical values.
pub fn trace_supermorse(desc: &SupermorseDescriptor) -> Result<TraceSample> {
    let spec = &desc.spec;
    let check = check_supermorse(spec, &desc.f)?;
    let (s_rational, z_count) = match check {
        SupermorseCheck::Ok { s_rational, z_count, .. } => (s_rational, z_count),
        SupermorseCheck::Reject(why) => return Err(precondition(why)),
    };
    let q = spec.q() as usize;
    let mut fiber = vec![0i64; q];
    for y in spec.elements() {
        let img = desc.f.eval(spec, &y);
        fiber[spec.index(&img) as usize] += 1;
    }
    let excluded: std::collections::BTreeSet<u64> =
        s_rational.iter().map(|s| spec.index(s)).collect();
    let mut domain = Vec::new();
    let mut values = Vec::new();
    for x in spec.elements() {
        let i = spec.index(&x);
        if excluded.contains(&i) {
            continue;
        }
        domain.push(x);
        values.push(Complex64::new((fiber[i as usize] - 1) as f64, 0.0));
    }
    let deg = desc.f.degree().unwrap() as u64;
    Ok(TraceSample {
        spec: spec.clone(),
        domain,
        values,
        rank: deg - 1,
        conductor: z_count as u64 + deg - 1,
        descriptor_id: desc.descriptor_id(),
        numeric_only: false,
    })
}

/// conductor = |Z| + deg f - 1, rank = deg f - 1, singular = S and infinity.
pub fn conductor_supermorse(desc: &SupermorseDescriptor) -> Result<ConductorReport> {
    let spec = &desc.spec;
    let check = check_supermorse(spec, &desc.f)?;
    let (z_count, s_poly) = match check {
        SupermorseCheck::Ok { z_count, s_poly, .. } => (z_count, s_poly),
        SupermorseCheck::Reject(why) => return Err(precondition(why)),
    };
    let deg = desc.f.degree().unwrap() as u64;
    let mut singular = Vec::new();
    for (pi, _) in factor(spec, &s_poly)? {
        let degree = pi.degree().unwrap_or(0);
        singular.push(SingularPoint { point: ClosedPoint::Finite(pi), degree, swan: 0, tame: true });
    }
    singular.push(SingularPoint { point: ClosedPoint::Infinity, degree: 1, swan: 0, tame: true });
    Ok(ConductorReport {
        genus: 0,
        rank: deg - 1,
        singular_points: singular,
        conductor: z_count as u64 + deg - 1,
    })
}

/// Whether a descriptor is the excluded Fourier input: a rank-1 kernel that
/// reduces to psi(a x) with trivial multiplicative part.
pub fn fourier_excluded(desc: &SheafDescriptor) -> bool {
    match desc {
        SheafDescriptor::Ask(d) => {
            d.canonical_f1().degree() == Some(1)
                && d.canonical_kummer().map(|k| k.is_empty()).unwrap_or(false)
        }
        _ => false,
    }
}

/// Normalized Fourier transform: t -> -(1/sqrt q) sum_x K(x) psi(t x), with
/// K extended by zero off its domain. Output metadata is numeric-only.
pub fn fourier_transform(
    sample: &TraceSample,
    psi: &AdditiveCharacter,
    descriptor: Option<&SheafDescriptor>,
) -> Result<TraceSample> {
    if psi.is_trivial() {
        return Err(precondition("fourier transform requires nontrivial psi"));
    }
    if let Some(d) = descriptor {
        if fourier_excluded(d) {
            return Err(precondition(
                "excluded case: kernel is itself a pure additive character",
            ));
        }
    }
    let spec = &sample.spec;
    let scale = -1.0 / (spec.q() as f64).sqrt();
    let domain: Vec<FieldElement> = spec.elements().collect();
    let values: Vec<Complex64> = domain
        .iter()
        .map(|t| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, v) in sample.domain.iter().zip(&sample.values) {
                acc += v * psi.eval(&spec.mul(t, x));
            }
            acc * scale
        })
        .collect();
    let mut h = Sha256::new();
    h.update(b"fourier");
    h.update(sample.descriptor_id.as_bytes());
    for c in &psi.a.coeffs {
        h.update(c.to_le_bytes());
    }
    Ok(TraceSample {
        spec: spec.clone(),
        domain,
        values,
        rank: sample.rank,
        conductor: sample.conductor,
        descriptor_id: hex::encode(h.finalize()),
        numeric_only: true,
    })
}

/// Enumerates pairwise non-isomorphic canonical rank-1 descriptors of
/// conductor <= c for the given chi, with psi = psi_1.
///
/// Trivial chi: all reduced f1 of degree <= c-1 (count q^{(c-1) - floor((c-1)/p)}).
/// Nontrivial chi of order d: multiplicative parts are products of distinct
/// monic irreducibles of degree >= 2 with multiplicities in 1..d, so every
/// descriptor is lisse on the whole affine line over k (common domain U(k) = k)
/// and the trace is unimodular everywhere; the trivial multiplicative part is
/// excluded (it belongs to the trivial-chi enumeration).
pub fn enumerate_ask_classes(
    spec: &Arc<FieldSpec>,
    c: u64,
    chi: &MultiplicativeCharacter,
) -> Result<Vec<AskDescriptor>> {
    if c < 1 {
        return Err(precondition("conductor cap must be >= 1"));
    }
    if c - 1 >= spec.p() {
        return Err(precondition(format!(
            "c - 1 = {} >= p = {}: swan-degree correspondence fails",
            c - 1,
            spec.p()
        )));
    }
    let psi = AdditiveCharacter::standard(spec.clone());
    let mut out = Vec::new();
    if chi.is_trivial() {
        for f1 in reduced_f1_iter(spec, (c - 1) as usize) {
            out.push(AskDescriptor::new(
                spec.clone(),
                f1,
                RationalFunction::one(spec),
                psi.clone(),
                chi.clone(),
            )?);
        }
        return Ok(out);
    }
    let d = chi.order();
    // multiplicative parts: multisets of (irreducible of degree >= 2, mult in
    // 1..d) with total point degree t <= c - 1
    let budget = (c - 1) as usize;
    let mut parts: Vec<(Poly, usize)> = Vec::new(); // (f2 as poly, point degree t)
    collect_kummer_parts(spec, budget, &mut Vec::new(), &mut parts, d)?;
    for (f2, t) in parts {
        let f2deg = f2.degree().unwrap_or(0) as u64;
        let inf_tame_singular = f2deg % d != 0;
        // remaining conductor budget at infinity
        let b = budget - t;
        // f1 = 0 case
        if !inf_tame_singular || b >= 1 {
            out.push(AskDescriptor::new(
                spec.clone(),
                Poly::zero(),
                RationalFunction::from_poly(spec, f2.clone()),
                psi.clone(),
                chi.clone(),
            )?);
        }
        // deg f1 = e in 1..=b (swan e dominates any tame contribution)
        for f1 in reduced_f1_iter(spec, b) {
            if f1.is_zero() {
                continue;
            }
            out.push(AskDescriptor::new(
                spec.clone(),
                f1,
                RationalFunction::from_poly(spec, f2.clone()),
                psi.clone(),
                chi.clone(),
            )?);
        }
    }
    Ok(out)
}

/// All reduced f1 (zero constant term, no exponent divisible by p) of degree
/// <= max_deg, in lexicographic coefficient order; includes f1 = 0.
fn reduced_f1_iter(spec: &Arc<FieldSpec>, max_deg: usize) -> Vec<Poly> {
    let free: Vec<usize> =
        (1..=max_deg).filter(|&j| j as u64 % spec.p() != 0).collect();
    let q = spec.q();
    let total: u64 = q.pow(free.len() as u32);
    let mut out = Vec::with_capacity(total as usize);
    for mut idx in 0..total {
        let mut coeffs = vec![spec.zero(); max_deg + 1];
        for &j in &free {
            coeffs[j] = spec.element_from_index(idx % q);
            idx /= q;
        }
        out.push(Poly::new(spec, coeffs));
    }
    out
}

/// Recursively builds multiplicative parts: nonempty products of distinct
/// monic irreducibles of degree >= 2 (multiplicity 1..d), point degree <= budget.
fn collect_kummer_parts(
    spec: &Arc<FieldSpec>,
    budget: usize,
    chosen: &mut Vec<(Poly, u64)>,
    out: &mut Vec<(Poly, usize)>,
    d: u64,
) -> Result<()> {
    if !chosen.is_empty() {
        let mut f2 = Poly::one(spec);
        let mut t = 0usize;
        for (pi, m) in chosen.iter() {
            for _ in 0..*m {
                f2 = f2.mul(spec, pi);
            }
            t += pi.degree().unwrap();
        }
        out.push((f2, t));
    }
    let used: usize = chosen.iter().map(|(pi, _)| pi.degree().unwrap()).sum();
    let remaining = budget - used;
    if remaining < 2 {
        return Ok(());
    }
    let min_key = chosen
        .last()
        .map(|(pi, _)| poly_key(spec, pi))
        .unwrap_or_default();
    for deg in 2..=remaining {
        for pi in monic_irreducibles(spec, deg)? {
            if poly_key(spec, &pi) <= min_key {
                continue;
            }
            for m in 1..d {
                chosen.push((pi.clone(), m));
                collect_kummer_parts(spec, budget, chosen, out, d)?;
                chosen.pop();
            }
        }
    }
    Ok(())
}

/// All monic irreducible polynomials of the given degree over GF(q).
pub fn monic_irreducibles(spec: &Arc<FieldSpec>, deg: usize) -> Result<Vec<Poly>> {
    let q = spec.q();
    let total = q.pow(deg as u32);
    let mut out = Vec::new();
    for mut idx in 0..total {
        let mut coeffs = Vec::with_capacity(deg + 1);
        for _ in 0..deg {
            coeffs.push(spec.element_from_index(idx % q));
            idx /= q;
        }
        coeffs.push(spec.one());
        let f = Poly::new(spec, coeffs);
        if is_irreducible(spec, &f)? {
            out.push(f);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field_build;

    fn arc(p: u64, n: usize, m: Option<&[u64]>) -> Arc<FieldSpec> {
        Arc::new(field_build(p, n, m).unwrap())
    }

    #[test]
    fn ask_reduce_examples() {
        let f5 = arc(5, 1, None);
        // x^5 + x^2 -> x^2 + x
        let f = Poly::from_ints(&f5, &[0, 0, 1, 0, 0, 1]);
        assert_eq!(ask_reduce(&f5, &f), Poly::from_ints(&f5, &[0, 1, 1]));
        // constants -> 0
        assert!(ask_reduce(&f5, &Poly::from_ints(&f5, &[3])).is_zero());
        // x^10 -> x^2
        let mut c = vec![0u64; 11];
        c[10] = 1;
        assert_eq!(ask_reduce(&f5, &Poly::from_ints(&f5, &c)), Poly::from_ints(&f5, &[0, 0, 1]));
    }

    #[test]
    fn kummer_reduce_examples() {
        let f5 = arc(5, 1, None);
        // x^2 (x+1), d = 2 -> {(x+1, 1)}
        let f2 = RationalFunction::from_poly(
            &f5,
            Poly::from_ints(&f5, &[0, 0, 1]).mul(&f5, &Poly::from_ints(&f5, &[1, 1])),
        );
        let red = kummer_reduce(&f5, &f2, 2).unwrap();
        assert_eq!(red, vec![(Poly::from_ints(&f5, &[1, 1]), 1)]);
        // constant -> empty
        let c = RationalFunction::from_poly(&f5, Poly::from_ints(&f5, &[3]));
        assert!(kummer_reduce(&f5, &c, 2).unwrap().is_empty());
        // x/(x+1)^3, d = 3 -> {(x, 1)}
        let den = {
            let b = Poly::from_ints(&f5, &[1, 1]);
            b.mul(&f5, &b).mul(&f5, &b)
        };
        let r = RationalFunction::new(&f5, Poly::from_ints(&f5, &[0, 1]), den).unwrap();
        let red = kummer_reduce(&f5, &r, 3).unwrap();
        assert_eq!(red, vec![(Poly::from_ints(&f5, &[0, 1]), 1)]);
    }

    #[test]
    fn geom_isomorphism_examples() {
        let f5 = arc(5, 1, None);
        let chi0 = MultiplicativeCharacter::trivial(f5.clone());
        let chi2 = MultiplicativeCharacter::quadratic(f5.clone());
        let a = AskDescriptor::from_ints(&f5, &[0, 0, 1], &[1], chi0.clone()).unwrap();
        let b = AskDescriptor::from_ints(&f5, &[3, 0, 1], &[1], chi0.clone()).unwrap();
        assert!(ask_geom_isomorphic(&a, &b).unwrap());
        let c = AskDescriptor::from_ints(&f5, &[0, 1], &[1], chi0.clone()).unwrap();
        assert!(!ask_geom_isomorphic(&a, &c).unwrap());
        // (0, x^2) vs (0, x^7) with quadratic chi: 2 vs 7 mod 2 differ
        let d1 = AskDescriptor::from_ints(&f5, &[], &[0, 0, 1], chi2.clone()).unwrap();
        let mut x7 = vec![0u64; 8];
        x7[7] = 1;
        let d2 = AskDescriptor::from_ints(&f5, &[], &x7, chi2.clone()).unwrap();
        assert!(!ask_geom_isomorphic(&d1, &d2).unwrap());
        // descriptor ids agree exactly for isomorphic pairs
        assert_eq!(a.descriptor_id().unwrap(), b.descriptor_id().unwrap());
        assert_ne!(a.descriptor_id().unwrap(), c.descriptor_id().unwrap());
    }

    #[test]
    fn trace_ask_examples() {
        let f5 = arc(5, 1, None);
        let chi0 = MultiplicativeCharacter::trivial(f5.clone());
        // f1 = x^2: Gauss-sum magnitude sqrt 5
        let d = AskDescriptor::from_ints(&f5, &[0, 0, 1], &[1], chi0.clone()).unwrap();
        let s = trace_ask(&d).unwrap();
        assert_eq!(s.domain.len(), 5);
        let total: Complex64 = s.values.iter().sum();
        assert!((total.norm() - 5f64.sqrt()).abs() < 1e-9);
        for v in &s.values {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        // trivial sheaf: constant 1
        let t = AskDescriptor::from_ints(&f5, &[], &[1], chi0).unwrap();
        let st = trace_ask(&t).unwrap();
        assert!(st.values.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-12));
        // f1 = 0, f2 = x, quadratic chi: Legendre symbol values on k minus 0
        let chi2 = MultiplicativeCharacter::quadratic(f5.clone());
        let l = AskDescriptor::from_ints(&f5, &[], &[0, 1], chi2).unwrap();
        let sl = trace_ask(&l).unwrap();
        assert_eq!(sl.domain.len(), 4);
        let got: Vec<f64> = sl.values.iter().map(|v| v.re).collect();
        assert!((got[0] - 1.0).abs() < 1e-12); // chi(1)
        assert!((got[1] + 1.0).abs() < 1e-12); // chi(2)
        assert!((got[2] + 1.0).abs() < 1e-12); // chi(3)
        assert!((got[3] - 1.0).abs() < 1e-12); // chi(4)
    }

    #[test]
    fn conductor_ask_examples() {
        let f7 = arc(7, 1, None);
        let chi0 = MultiplicativeCharacter::trivial(f7.clone());
        // f1 = x^3: sing = {inf}, swan 3, cond 4
        let d = AskDescriptor::from_ints(&f7, &[0, 0, 0, 1], &[1], chi0.clone()).unwrap();
        let r = conductor_ask(&d).unwrap();
        assert_eq!(r.conductor, 4);
        assert_eq!(r.singular_points.len(), 1);
        assert_eq!(r.singular_points[0].swan, 3);
        // trivial: cond 1
        let t = AskDescriptor::from_ints(&f7, &[], &[1], chi0.clone()).unwrap();
        assert_eq!(conductor_ask(&t).unwrap().conductor, 1);
        // f1 = x, f2 = x, quadratic chi over F5: cond 3
        let f5 = arc(5, 1, None);
        let chi2 = MultiplicativeCharacter::quadratic(f5.clone());
        let m = AskDescriptor::from_ints(&f5, &[0, 1], &[0, 1], chi2).unwrap();
        let rm = conductor_ask(&m).unwrap();
        assert_eq!(rm.conductor, 3);
        assert_eq!(rm.singular_points.len(), 2);
        // conductor monotonicity: cond(f1 of degree e, trivial chi) = 1 + e
        for e in 1..7usize {
            let mut c = vec![0u64; e + 1];
            c[e] = 1;
            let d = AskDescriptor::from_ints(&f7, &c, &[1], chi0.clone()).unwrap();
            assert_eq!(conductor_ask(&d).unwrap().conductor, 1 + e as u64);
        }
    }

    #[test]
    fn enumerate_counts() {
        for (p, c, expect) in [(3u64, 3u64, 9u64), (5, 2, 5), (5, 1, 1), (3, 2, 3), (5, 3, 25), (5, 4, 125)] {
            let spec = arc(p, 1, None);
            let chi0 = MultiplicativeCharacter::trivial(spec.clone());
            let classes = enumerate_ask_classes(&spec, c, &chi0).unwrap();
            assert_eq!(classes.len() as u64, expect, "p={p} c={c}");
            // exact count formula and the lower-bound inequality
            let q = spec.q();
            let k = (c - 1) - (c - 1) / p;
            assert_eq!(expect, q.pow(k as u32));
            assert!((expect as f64) >= (q as f64).powf(c as f64 / 2.0 - 1.0) - 1e-9);
            // conductors within cap and classes pairwise non-isomorphic
            for d in &classes {
                assert!(conductor_ask(d).unwrap().conductor <= c);
            }
            let ids: std::collections::BTreeSet<String> =
                classes.iter().map(|d| d.descriptor_id().unwrap()).collect();
            assert_eq!(ids.len(), classes.len());
        }
    }

    #[test]
    fn enumerate_quadratic_chi_c3() {
        let f5 = arc(5, 1, None);
        let chi2 = MultiplicativeCharacter::quadratic(f5.clone());
        let classes = enumerate_ask_classes(&f5, 3, &chi2).unwrap();
        // exactly the irreducible monic quadratics with f1 = 0: (q^2 - q)/2
        assert_eq!(classes.len() as u64, (25 - 5) / 2);
        for d in &classes {
            assert!(d.f1.is_zero());
            assert_eq!(conductor_ask(d).unwrap().conductor, 3);
            // domain is all of k: no rational zeros
            assert_eq!(trace_ask(d).unwrap().domain.len(), 5);
        }
    }

    #[test]
    fn supermorse_examples() {
        let f7 = arc(7, 1, None);
        // x^3 - 3x: Z = {1, 6}, S = {5, 2}, cond 4
        let f = Poly::from_ints(&f7, &[0, 4, 0, 1]); // -3 = 4 mod 7
        match check_supermorse(&f7, &f).unwrap() {
            SupermorseCheck::Ok { z_count, mut s_rational, .. } => {
                assert_eq!(z_count, 2);
                s_rational.sort_by_key(|x| f7.index(x));
                let got: Vec<u64> = s_rational.iter().map(|x| f7.index(x)).collect();
                assert_eq!(got, vec![2, 5]);
            }
            SupermorseCheck::Reject(w) => panic!("{w}"),
        }
        let d = SupermorseDescriptor::new(f7.clone(), f.clone()).unwrap();
        assert_eq!(conductor_supermorse(&d).unwrap().conductor, 4);
        let s = trace_supermorse(&d).unwrap();
        assert_eq!(s.rank, 2);
        // full-field fiber sum is zero: sum over all of k of (N(x)-1) = 0
        let mut full = 0i64;
        for x in f7.elements() {
            let cnt = f7.elements().filter(|y| f.eval(&f7, y) == x).count() as i64;
            full += cnt - 1;
        }
        assert_eq!(full, 0);

        // x^3 rejected
        assert!(matches!(
            check_supermorse(&f7, &Poly::from_ints(&f7, &[0, 0, 0, 1])).unwrap(),
            SupermorseCheck::Reject(_)
        ));
        // x^5 over F5 rejected (deg = p)
        let f5 = arc(5, 1, None);
        assert!(matches!(
            check_supermorse(&f5, &Poly::from_ints(&f5, &[0, 0, 0, 0, 0, 1])).unwrap(),
            SupermorseCheck::Reject(_)
        ));
        // x^2 over F7: values +-1 on k minus {0}
        let g = Poly::from_ints(&f7, &[0, 0, 1]);
        let dg = SupermorseDescriptor::new(f7.clone(), g).unwrap();
        assert_eq!(conductor_supermorse(&dg).unwrap().conductor, 2);
        let sg = trace_supermorse(&dg).unwrap();
        assert_eq!(sg.domain.len(), 6);
        let plus = sg.values.iter().filter(|v| (v.re - 1.0).abs() < 1e-12).count();
        let minus = sg.values.iter().filter(|v| (v.re + 1.0).abs() < 1e-12).count();
        assert_eq!((plus, minus), (3, 3));
    }

    #[test]
    fn fourier_examples() {
        let f7 = arc(7, 1, None);
        let chi0 = MultiplicativeCharacter::trivial(f7.clone());
        let psi = AdditiveCharacter::standard(f7.clone());
        // trivial sheaf -> -sqrt(q) delta_0
        let t = AskDescriptor::from_ints(&f7, &[], &[1], chi0.clone()).unwrap();
        let st = trace_ask(&t).unwrap();
        let ft = fourier_transform(&st, &psi, None).unwrap();
        assert!((ft.values[0].re + 7f64.sqrt()).abs() < 1e-9);
        for v in &ft.values[1..] {
            assert!(v.norm() < 1e-9);
        }
        // Plancherel and double transform = reflection, for a quadratic kernel
        let d = AskDescriptor::from_ints(&f7, &[0, 0, 1], &[1], chi0).unwrap();
        let s = trace_ask(&d).unwrap();
        let f1 = fourier_transform(&s, &psi, None).unwrap();
        let e_in: f64 = s.values.iter().map(|v| v.norm_sqr()).sum();
        let e_out: f64 = f1.values.iter().map(|v| v.norm_sqr()).sum();
        assert!((e_in - e_out).abs() < 1e-9 * e_in.max(1.0));
        let f2 = fourier_transform(&f1, &psi, None).unwrap();
        let dense = s.dense_values();
        for (u, v) in f2.domain.iter().zip(&f2.values) {
            let neg = f7.neg(u);
            assert!((v - dense[f7.index(&neg) as usize]).norm() < 1e-9);
        }
        // excluded case
        let chi0b = MultiplicativeCharacter::trivial(f7.clone());
        let lin = AskDescriptor::from_ints(&f7, &[0, 1], &[1], chi0b).unwrap();
        let sl = trace_ask(&lin).unwrap();
        assert!(fourier_transform(&sl, &psi, Some(&SheafDescriptor::Ask(lin))).is_err());
    }

    #[test]
    fn descriptor_json_round_trip_shape() {
        let f5 = arc(5, 1, None);
        let chi2 = MultiplicativeCharacter::quadratic(f5.clone());
        let d = AskDescriptor::from_ints(&f5, &[0, 1], &[0, 1], chi2).unwrap();
        let j = d.to_json();
        assert_eq!(j["kind"], "ask");
        assert_eq!(j["chi_m"], 2);
        assert_eq!(j["f2den"].as_array().unwrap().len(), 1);
    }
}
