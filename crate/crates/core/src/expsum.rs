//! Finite sums of exponentials on the `(λ1, λ2)` exponent lattice.
//!
//! An [`ExpSum`] represents `Σ c_{m,n} · exp((m λ1 + n λ2) ξ)` with integer
//! lattice keys `(m, n)` and `f64` coefficients. Every correction term of the
//! iteration, and every Adomian polynomial feeding it, lives in this ring:
//! products add keys, derivatives multiply by the exponent, and the inverse
//! of `f''' - λ² f'` divides by `μ (μ² - λ²)`.
//!
//! Values are kept in canonical form after every operation: one entry per
//! key, iterated in lexicographic key order, with coefficients smaller than
//! [`DROP_RELATIVE`] times the largest coefficient removed.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terms whose magnitude falls below this fraction of the largest
/// coefficient are removed after every operation.
pub const DROP_RELATIVE: f64 = 1e-14;

/// Scale of the resonance threshold `τ_res = RESONANCE_SCALE · max(1, λ1³)`.
pub const RESONANCE_SCALE: f64 = 1e-9;

/// Integer multipliers `(m, n)` of the exponent `m λ1 + n λ2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeKey {
    pub m: i32,
    pub n: i32,
}

impl LatticeKey {
    pub const fn new(m: i32, n: i32) -> Self {
        LatticeKey { m, n }
    }

    /// Total weight `m + n`.
    pub fn weight(self) -> i32 {
        self.m + self.n
    }
}

impl Add for LatticeKey {
    type Output = LatticeKey;

    fn add(self, rhs: LatticeKey) -> LatticeKey {
        LatticeKey::new(self.m + rhs.m, self.n + rhs.n)
    }
}

impl fmt::Display for LatticeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

/// The pair of base exponents shared by every sum it hosts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    lambda1: f64,
    lambda2: f64,
}

impl Lattice {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1.is_finite() && lambda2.is_finite() && lambda1 > 0.0 && lambda2 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lattice exponents must be finite and positive, got ({lambda1}, {lambda2})"
            )));
        }
        Ok(Lattice { lambda1, lambda2 })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// `μ = m λ1 + n λ2`.
    pub fn exponent(&self, key: LatticeKey) -> f64 {
        f64::from(key.m) * self.lambda1 + f64::from(key.n) * self.lambda2
    }

    /// `τ_res`, the smallest admissible `|μ (μ² - λ²)|` for the inverse operator.
    pub fn resonance_threshold(&self) -> f64 {
        RESONANCE_SCALE * self.lambda1.powi(3).max(1.0)
    }
}

/// A finite exponential sum in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ExpSumRecord", try_from = "ExpSumRecord")]
pub struct ExpSum {
    lattice: Lattice,
    terms: BTreeMap<LatticeKey, f64>,
}

impl ExpSum {
    pub fn zero(lattice: Lattice) -> Self {
        ExpSum {
            lattice,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(lattice: Lattice, c: f64) -> Self {
        Self::monomial(lattice, LatticeKey::new(0, 0), c)
    }

    /// `c · exp((m λ1 + n λ2) ξ)`.
    pub fn monomial(lattice: Lattice, key: LatticeKey, c: f64) -> Self {
        Self::from_terms(lattice, [(key, c)])
    }

    /// Builds a sum from possibly repeated keys; repeated keys accumulate.
    pub fn from_terms<I>(lattice: Lattice, terms: I) -> Self
    where
        I: IntoIterator<Item = (LatticeKey, f64)>,
    {
        let mut map = BTreeMap::new();
        for (key, c) in terms {
            *map.entry(key).or_insert(0.0) += c;
        }
        Self::canonical(lattice, map)
    }

    fn canonical(lattice: Lattice, mut terms: BTreeMap<LatticeKey, f64>) -> Self {
        let max = terms.values().fold(0.0_f64, |acc, c| acc.max(c.abs()));
        let floor = DROP_RELATIVE * max;
        terms.retain(|_, c| *c != 0.0 && c.abs() >= floor);
        ExpSum { lattice, terms }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic key order.
    pub fn terms(&self) -> impl Iterator<Item = (LatticeKey, f64)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, *c))
    }

    pub fn keys(&self) -> impl Iterator<Item = LatticeKey> + '_ {
        self.terms.keys().copied()
    }

    /// Coefficient at `key`, zero when absent.
    pub fn coefficient(&self, key: LatticeKey) -> f64 {
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |acc: f64, c| acc.max(c.abs()))
    }

    fn check_context(&self, other: &ExpSum) -> Result<()> {
        if self.lattice == other.lattice {
            Ok(())
        } else {
            Err(Error::ContextMismatch {
                left: (self.lattice.lambda1, self.lattice.lambda2),
                right: (other.lattice.lambda1, other.lattice.lambda2),
            })
        }
    }

    pub fn add(&self, other: &ExpSum) -> Result<ExpSum> {
        self.check_context(other)?;
        let mut terms = self.terms.clone();
        for (key, c) in &other.terms {
            *terms.entry(*key).or_insert(0.0) += c;
        }
        Ok(Self::canonical(self.lattice, terms))
    }

    pub fn sub(&self, other: &ExpSum) -> Result<ExpSum> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ExpSum {
        self.scale(-1.0)
    }

    pub fn scale(&self, r: f64) -> ExpSum {
        let terms = self.terms.iter().map(|(k, c)| (*k, c * r)).collect();
        Self::canonical(self.lattice, terms)
    }

    /// Full convolution product.
    ///
    /// Contributions to each output key are summed in an order that depends
    /// only on the unordered pair of input keys, so `a·b` and `b·a` agree
    /// bit for bit.
    pub fn mul(&self, other: &ExpSum) -> Result<ExpSum> {
        self.check_context(other)?;
        let mut contributions: BTreeMap<LatticeKey, Vec<(LatticeKey, LatticeKey, f64)>> =
            BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let (lo, hi) = if ka <= kb { (*ka, *kb) } else { (*kb, *ka) };
                contributions
                    .entry(*ka + *kb)
                    .or_default()
                    .push((lo, hi, ca * cb));
            }
        }
        let terms = contributions
            .into_iter()
            .map(|(key, mut parts)| {
                parts.sort_by(|x, y| {
                    (x.0, x.1)
                        .cmp(&(y.0, y.1))
                        .then_with(|| x.2.total_cmp(&y.2))
                });
                (key, parts.iter().map(|p| p.2).sum())
            })
            .collect();
        Ok(Self::canonical(self.lattice, terms))
    }

    /// `d/dξ`: each coefficient is multiplied by its exponent.
    pub fn diff(&self) -> ExpSum {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| (*k, c * self.lattice.exponent(*k)))
            .collect();
        Self::canonical(self.lattice, terms)
    }

    /// The linear operator `f''' - λ² f'`.
    pub fn linear_operator(&self, lambda: f64) -> ExpSum {
        let d1 = self.diff();
        let d3 = d1.diff().diff();
        d3.sub(&d1.scale(lambda * lambda))
            .expect("operands share a lattice")
    }

    /// Particular solution `f` of `f''' - λ² f' = self` with every
    /// homogeneous constant set to zero.
    pub fn apply_inverse_op(&self, lambda: f64) -> Result<ExpSum> {
        let tau = self.lattice.resonance_threshold();
        let mut terms = BTreeMap::new();
        for (key, c) in &self.terms {
            let mu = self.lattice.exponent(*key);
            let denominator = mu * (mu * mu - lambda * lambda);
            if !(denominator.abs() >= tau) {
                return Err(Error::Resonance {
                    m: key.m,
                    n: key.n,
                    lambda,
                    denominator,
                });
            }
            terms.insert(*key, c / denominator);
        }
        Ok(Self::canonical(self.lattice, terms))
    }

    /// `Σ c · exp(μ ξ)` in key order.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        let mut total = 0.0;
        for (key, c) in &self.terms {
            total += c * (self.lattice.exponent(*key) * xi).exp();
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::Range { xi })
        }
    }

    /// `Σ |c| · exp(μ ξ)`, the magnitude scale of the sum at `ξ`.
    pub fn eval_abs(&self, xi: f64) -> f64 {
        self.terms
            .iter()
            .map(|(key, c)| c.abs() * (self.lattice.exponent(*key) * xi).exp())
            .sum()
    }

    /// Largest coefficient difference over all keys, relative to the
    /// largest coefficient of either operand. Zero when both are empty.
    pub fn max_relative_difference(&self, other: &ExpSum) -> f64 {
        let scale = self.max_abs_coefficient().max(other.max_abs_coefficient());
        if scale == 0.0 {
            return 0.0;
        }
        let keys: std::collections::BTreeSet<_> =
            self.terms.keys().chain(other.terms.keys()).copied().collect();
        keys.into_iter()
            .map(|k| (self.coefficient(k) - other.coefficient(k)).abs())
            .fold(0.0, f64::max)
            / scale
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermRecord {
    m: i32,
    n: i32,
    c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ExpSumRecord {
    lambda1: f64,
    lambda2: f64,
    terms: Vec<TermRecord>,
}

impl From<ExpSum> for ExpSumRecord {
    fn from(s: ExpSum) -> Self {
        ExpSumRecord {
            lambda1: s.lattice.lambda1,
            lambda2: s.lattice.lambda2,
            terms: s
                .terms()
                .map(|(k, c)| TermRecord { m: k.m, n: k.n, c })
                .collect(),
        }
    }
}

impl TryFrom<ExpSumRecord> for ExpSum {
    type Error = Error;

    fn try_from(r: ExpSumRecord) -> Result<Self> {
        let lattice = Lattice::new(r.lambda1, r.lambda2)?;
        Ok(ExpSum::from_terms(
            lattice,
            r.terms.into_iter().map(|t| (LatticeKey::new(t.m, t.n), t.c)),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lat() -> Lattice {
        Lattice::new(0.7, 0.45).unwrap()
    }

    fn key(m: i32, n: i32) -> LatticeKey {
        LatticeKey::new(m, n)
    }

    #[test]
    fn additive_inverse_is_empty() {
        let s = ExpSum::monomial(lat(), key(1, 0), 2.0);
        let t = ExpSum::monomial(lat(), key(1, 0), -2.0);
        assert!(s.add(&t).unwrap().is_empty());
    }

    #[test]
    fn disjoint_keys_are_kept() {
        let s = ExpSum::monomial(lat(), key(1, 0), 1.0)
            .add(&ExpSum::monomial(lat(), key(0, 1), 1.0))
            .unwrap();
        let terms: Vec<_> = s.terms().collect();
        assert_eq!(terms, vec![(key(0, 1), 1.0), (key(1, 0), 1.0)]);
    }

    #[test]
    fn context_mismatch_is_rejected() {
        let other = Lattice::new(0.7, 0.46).unwrap();
        let s = ExpSum::constant(lat(), 1.0);
        let t = ExpSum::constant(other, 1.0);
        assert_eq!(s.add(&t).unwrap_err().kind(), "context-mismatch");
        assert_eq!(s.mul(&t).unwrap_err().kind(), "context-mismatch");
    }

    #[test]
    fn single_term_product() {
        let s = ExpSum::monomial(lat(), key(1, 0), 3.0)
            .mul(&ExpSum::monomial(lat(), key(0, 1), -2.5))
            .unwrap();
        assert_eq!(s.terms().collect::<Vec<_>>(), vec![(key(1, 1), -7.5)]);
    }

    #[test]
    fn constant_one_is_identity() {
        let s = ExpSum::from_terms(lat(), [(key(2, 0), 1.5), (key(0, 3), -0.25)]);
        assert_eq!(ExpSum::constant(lat(), 1.0).mul(&s).unwrap(), s);
    }

    #[test]
    fn leading_term_times_its_derivative() {
        let c1 = 1.9;
        let u0 = ExpSum::monomial(lat(), key(1, 0), c1);
        let p = u0.mul(&u0.diff()).unwrap();
        assert_eq!(p.len(), 1);
        let expected = c1 * c1 * 0.7;
        assert!((p.coefficient(key(2, 0)) - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn scale_edge_cases() {
        let s = ExpSum::monomial(lat(), key(1, 0), 2.0);
        assert!(s.scale(0.0).is_empty());
        assert_eq!(s.scale(1.0), s);
        assert_eq!(s.scale(-3.0).coefficient(key(1, 0)), -6.0);
    }

    #[test]
    fn diff_examples() {
        assert!(ExpSum::constant(lat(), 5.0).diff().is_empty());
        let d = ExpSum::monomial(lat(), key(1, 0), 1.9).diff();
        assert_eq!(d.coefficient(key(1, 0)), 1.9 * 0.7);
    }

    #[test]
    fn leading_exponential_is_in_operator_kernel() {
        let s = ExpSum::monomial(lat(), key(1, 0), 1.0);
        assert!(s.linear_operator(0.7).is_empty());
    }

    #[test]
    fn inverse_of_second_harmonic() {
        let q = -3.2;
        let inv = ExpSum::monomial(lat(), key(2, 0), q)
            .apply_inverse_op(0.7)
            .unwrap();
        let expected = q / (6.0 * 0.7_f64.powi(3));
        assert!((inv.coefficient(key(2, 0)) - expected).abs() <= 1e-15 * expected.abs());
        assert!(ExpSum::zero(lat()).apply_inverse_op(0.7).unwrap().is_empty());
    }

    #[test]
    fn inverse_reports_resonant_key() {
        // λ1 = 2 λ2 makes key (0, 2) resonant for λ = λ1.
        let l = Lattice::new(0.8, 0.4).unwrap();
        let s = ExpSum::from_terms(l, [(key(2, 0), 1.0), (key(0, 2), 1.0)]);
        match s.apply_inverse_op(0.8) {
            Err(Error::Resonance { m, n, .. }) => assert_eq!((m, n), (0, 2)),
            other => panic!("expected resonance, got {other:?}"),
        }
        let c = ExpSum::constant(l, 1.0);
        assert!(matches!(c.apply_inverse_op(0.8), Err(Error::Resonance { m: 0, n: 0, .. })));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ExpSum::zero(lat()).eval(1.3).unwrap(), 0.0);
        assert_eq!(ExpSum::constant(lat(), 7.0).eval(3.2).unwrap(), 7.0);
        assert_eq!(ExpSum::monomial(lat(), key(1, 0), 1.9).eval(0.0).unwrap(), 1.9);
        let big = ExpSum::monomial(lat(), key(4, 0), 1.0);
        assert_eq!(big.eval(400.0).unwrap_err().kind(), "evaluation-range");
    }

    #[test]
    fn tiny_terms_are_dropped() {
        let s = ExpSum::from_terms(lat(), [(key(1, 0), 1.0), (key(0, 1), 1e-15)]);
        assert_eq!(s.len(), 1);
        let t = ExpSum::from_terms(lat(), [(key(1, 0), 1.0), (key(0, 1), 1e-13)]);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn json_layout() {
        let s = ExpSum::from_terms(lat(), [(key(1, 1), -0.5), (key(0, 2), 2.0)]);
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "lambda1": 0.7,
                "lambda2": 0.45,
                "terms": [{"m": 0, "n": 2, "c": 2.0}, {"m": 1, "n": 1, "c": -0.5}]
            })
        );
    }

    fn lattice_strategy() -> impl Strategy<Value = Lattice> {
        (0.2..2.0f64, 0.2..2.0f64).prop_map(|(a, b)| Lattice::new(a, b).unwrap())
    }

    fn terms_strategy() -> impl Strategy<Value = Vec<(LatticeKey, f64)>> {
        prop::collection::vec(((0..5i32, 0..5i32), -5.0..5.0f64), 0..8)
            .prop_map(|v| v.into_iter().map(|((m, n), c)| (key(m, n), c)).collect())
    }

    proptest! {
        #[test]
        fn json_round_trip(l in lattice_strategy(), t in terms_strategy()) {
            let s = ExpSum::from_terms(l, t);
            let back: ExpSum = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn commutativity_is_exact(l in lattice_strategy(), a in terms_strategy(), b in terms_strategy()) {
            let (x, y) = (ExpSum::from_terms(l, a), ExpSum::from_terms(l, b));
            prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
            prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        }

        #[test]
        fn leibniz_rule(l in lattice_strategy(), a in terms_strategy(), b in terms_strategy()) {
            let (x, y) = (ExpSum::from_terms(l, a), ExpSum::from_terms(l, b));
            let lhs = x.mul(&y).unwrap().diff();
            let rhs = x.diff().mul(&y).unwrap().add(&x.mul(&y.diff()).unwrap()).unwrap();
            prop_assert!(lhs.max_relative_difference(&rhs) < 1e-12);
        }

        #[test]
        fn eval_is_a_ring_homomorphism(
            l in lattice_strategy(),
            a in terms_strategy(),
            b in terms_strategy(),
            xi in -5.0..5.0f64,
        ) {
            let (x, y) = (ExpSum::from_terms(l, a), ExpSum::from_terms(l, b));
            let (ex, ey) = (x.eval(xi).unwrap(), y.eval(xi).unwrap());
            let scale = x.eval_abs(xi) + y.eval_abs(xi);
            prop_assert!((x.add(&y).unwrap().eval(xi).unwrap() - (ex + ey)).abs() <= 1e-12 * scale.max(1e-300));
            let prod_scale = x.eval_abs(xi) * y.eval_abs(xi);
            prop_assert!((x.mul(&y).unwrap().eval(xi).unwrap() - ex * ey).abs() <= 1e-12 * prod_scale.max(1e-300));
        }
    }
}
