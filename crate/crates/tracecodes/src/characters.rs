//! Additive and multiplicative characters of GF(q), evaluated as complex
//! roots of unity from precomputed tables.

use crate::field::{FieldElement, FieldSpec};
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::sync::Arc;

fn root_table(denominator: u64) -> Arc<Vec<Complex64>> {
    Arc::new(
        (0..denominator)
            .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / denominator as f64))
            .collect(),
    )
}

/// psi_a(x) = e(Tr(a x)/p). Trivial exactly when a = 0.
#[derive(Debug, Clone)]
pub struct AdditiveCharacter {
    spec: Arc<FieldSpec>,
    pub a: FieldElement,
    roots: Arc<Vec<Complex64>>,
}

impl AdditiveCharacter {
    pub fn new(spec: Arc<FieldSpec>, a: FieldElement) -> AdditiveCharacter {
        let roots = root_table(spec.p());
        AdditiveCharacter { spec, a, roots }
    }

    /// The standard character psi_1.
    pub fn standard(spec: Arc<FieldSpec>) -> AdditiveCharacter {
        let one = spec.one();
        AdditiveCharacter::new(spec, one)
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn is_trivial(&self) -> bool {
        self.a.is_zero()
    }

    pub fn eval(&self, x: &FieldElement) -> Complex64 {
        let t = self.spec.trace_to_prime(&self.spec.mul(&self.a, x));
        self.roots[t as usize]
    }

    /// e(Tr(x)/p) without the twist; used by kernels that pre-multiply.
    pub fn eval_untwisted(&self, x: &FieldElement) -> Complex64 {
        self.roots[self.spec.trace_to_prime(x) as usize]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "a": self.a.coeffs })
    }
}

/// chi_m(g^j) = e(mj/(q-1)) against the spec's fixed generator g; chi(0) = 0.
#[derive(Debug, Clone)]
pub struct MultiplicativeCharacter {
    spec: Arc<FieldSpec>,
    pub m: u64,
    roots: Arc<Vec<Complex64>>,
}

impl MultiplicativeCharacter {
    pub fn new(spec: Arc<FieldSpec>, m: u64) -> MultiplicativeCharacter {
        let q1 = spec.q() - 1;
        let m = m % q1;
        let roots = root_table(q1);
        MultiplicativeCharacter { spec, m, roots }
    }

    pub fn trivial(spec: Arc<FieldSpec>) -> MultiplicativeCharacter {
        MultiplicativeCharacter::new(spec, 0)
    }

    /// The quadratic character, defined for odd q.
    pub fn quadratic(spec: Arc<FieldSpec>) -> MultiplicativeCharacter {
        assert!(spec.q() % 2 == 1, "quadratic character requires odd q");
        let m = (spec.q() - 1) / 2;
        MultiplicativeCharacter::new(spec, m)
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn is_trivial(&self) -> bool {
        self.m == 0
    }

    /// Exact order d = (q-1)/gcd(m, q-1).
    pub fn order(&self) -> u64 {
        let q1 = self.spec.q() - 1;
        q1 / gcd(self.m, q1)
    }

    pub fn eval(&self, x: &FieldElement) -> Complex64 {
        if x.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let j = self.spec.discrete_log(x).expect("nonzero");
        let q1 = self.spec.q() - 1;
        self.roots[((self.m % q1) * (j % q1) % q1) as usize]
    }

    /// Value at g^j directly, for callers that already hold the log.
    pub fn eval_log(&self, j: u64) -> Complex64 {
        let q1 = self.spec.q() - 1;
        self.roots[((self.m % q1) * (j % q1) % q1) as usize]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "m": self.m })
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Sum of psi over the whole field: q for trivial psi, 0 otherwise.
pub fn char_sum_additive(psi: &AdditiveCharacter) -> Complex64 {
    psi.spec().elements().map(|x| psi.eval(&x)).sum()
}
