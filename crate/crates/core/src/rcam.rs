//! The rapidly convergent approximation iteration for the reduced system
//!
//! ```text
//! U''' - λ1² U' = -(6/k²) U U' + (2b/(a k²)) V V'
//! V''' - λ2² V' = -(3/k²) U V'
//! ```
//!
//! Each correction is the inverse operator applied to the Adomian
//! polynomial of the right-hand side. Both nonlinearities are bilinear, so
//! the Adomian polynomials are Cauchy convolutions of earlier corrections.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsum::{ExpSum, Lattice, LatticeKey};
use crate::params::Params;

/// Default cap on the iteration depth; the lattice grows quadratically.
pub const MAX_ORDER: usize = 16;

/// Sign pattern of the roots, which fixes the leading term of the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LeadingCase {
    /// Some roots positive, some negative.
    MixedSign,
    /// All roots positive; the leading term is `c_i e^{λ_i ξ}`.
    AllPositive,
    /// All roots negative; the leading term is `d_i e^{-λ_i ξ}`.
    AllNegative,
}

pub fn select_case(lambdas: &[f64]) -> LeadingCase {
    if lambdas.iter().all(|l| *l > 0.0) {
        LeadingCase::AllPositive
    } else if lambdas.iter().all(|l| *l < 0.0) {
        LeadingCase::AllNegative
    } else {
        LeadingCase::MixedSign
    }
}

/// One correction pair `(U_n, V_n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correction {
    #[serde(rename = "U")]
    pub u: ExpSum,
    #[serde(rename = "V")]
    pub v: ExpSum,
}

/// Correction terms `(U_n, V_n)` for `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesState {
    params: Params,
    lattice: Lattice,
    corrections: Vec<Correction>,
}

impl SeriesState {
    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    /// Highest available correction index `N`.
    pub fn order(&self) -> usize {
        self.corrections.len() - 1
    }

    pub fn corrections(&self) -> &[Correction] {
        &self.corrections
    }

    pub fn correction(&self, n: usize) -> Result<&Correction> {
        self.corrections.get(n).ok_or(Error::Index {
            index: n,
            available: self.corrections.len(),
        })
    }

    /// `S_upto = Σ_{n ≤ upto} (U_n, V_n)` as exponential sums.
    pub fn partial_sum_exp(&self, upto: usize) -> Result<(ExpSum, ExpSum)> {
        self.correction(upto)?;
        let mut u = ExpSum::zero(self.lattice);
        let mut v = ExpSum::zero(self.lattice);
        for c in &self.corrections[..=upto] {
            u = u.add(&c.u)?;
            v = v.add(&c.v)?;
        }
        Ok((u, v))
    }

    /// `(Σ_{n ≤ upto} U_n(ξ), Σ_{n ≤ upto} V_n(ξ))`, accumulated order by order.
    pub fn partial_sum(&self, upto: usize, xi: f64) -> Result<(f64, f64)> {
        self.correction(upto)?;
        let mut su = 0.0;
        let mut sv = 0.0;
        for c in &self.corrections[..=upto] {
            su += c.u.eval(xi)?;
            sv += c.v.eval(xi)?;
        }
        Ok((su, sv))
    }

    pub fn partial_sums(&self, upto: usize, xis: &[f64]) -> Result<Vec<(f64, f64)>> {
        xis.par_iter().map(|xi| self.partial_sum(upto, *xi)).collect()
    }

    /// Left-hand sides of the reduced system evaluated exactly on `S_upto`.
    pub fn residual_exp(&self, upto: usize) -> Result<(ExpSum, ExpSum)> {
        let (u, v) = self.partial_sum_exp(upto)?;
        let p = &self.params;
        let (l1, l2) = (self.lattice.lambda1(), self.lattice.lambda2());
        let k2 = p.k * p.k;
        let r1 = u
            .linear_operator(l1)
            .add(&u.mul(&u.diff())?.scale(6.0 / k2))?
            .sub(&v.mul(&v.diff())?.scale(2.0 * p.b / (p.a * k2)))?;
        let r2 = v
            .linear_operator(l2)
            .add(&u.mul(&v.diff())?.scale(3.0 / k2))?;
        Ok((r1, r2))
    }
}

#[derive(Serialize)]
struct SeriesRecord<'a> {
    params: &'a Params,
    lambda1: f64,
    lambda2: f64,
    orders: Vec<OrderRecord<'a>>,
}

#[derive(Serialize)]
struct OrderRecord<'a> {
    n: usize,
    #[serde(flatten)]
    terms: &'a Correction,
}

impl Serialize for SeriesState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRecord {
            params: &self.params,
            lambda1: self.lattice.lambda1(),
            lambda2: self.lattice.lambda2(),
            orders: self
                .corrections
                .iter()
                .enumerate()
                .map(|(n, terms)| OrderRecord { n, terms })
                .collect(),
        }
        .serialize(s)
    }
}

/// `(U_0, V_0) = (c1 e^{λ1 ξ}, c2 e^{λ2 ξ})`, the localized leading term
/// for positive roots.
pub fn leading_term(params: &Params) -> Result<(ExpSum, ExpSum)> {
    let lattice = params.lattice()?;
    match select_case(&[lattice.lambda1(), lattice.lambda2()]) {
        LeadingCase::AllPositive => Ok((
            ExpSum::monomial(lattice, LatticeKey::new(1, 0), params.c1),
            ExpSum::monomial(lattice, LatticeKey::new(0, 1), params.c2),
        )),
        other => Err(Error::NotImplemented(format!(
            "leading term for {other:?} roots"
        ))),
    }
}

fn convolve(
    left: impl Fn(usize) -> ExpSum,
    right: impl Fn(usize) -> ExpSum,
    m: usize,
) -> Result<ExpSum> {
    let mut acc = left(0).mul(&right(m))?;
    for j in 1..=m {
        acc = acc.add(&left(j).mul(&right(m - j))?)?;
    }
    Ok(acc)
}

fn delta(params: &Params, corrections: &[Correction], m: usize) -> Result<(ExpSum, ExpSum)> {
    if m >= corrections.len() {
        return Err(Error::Index {
            index: m,
            available: corrections.len(),
        });
    }
    let k2 = params.k * params.k;
    let u = |j: usize| corrections[j].u.clone();
    let v = |j: usize| corrections[j].v.clone();
    let du = |j: usize| corrections[j].u.diff();
    let dv = |j: usize| corrections[j].v.diff();

    let uu = convolve(u, du, m)?;
    let vv = convolve(v, dv, m)?;
    let uv = convolve(u, dv, m)?;
    let d1 = uu
        .scale(-6.0 / k2)
        .add(&vv.scale(2.0 * params.b / (params.a * k2)))?;
    let d2 = uv.scale(-3.0 / k2);
    Ok((d1, d2))
}

/// Adomian polynomials `(Δ1_m, Δ2_m)` of the right-hand side.
pub fn adomian_delta(state: &SeriesState, m: usize) -> Result<(ExpSum, ExpSum)> {
    delta(&state.params, &state.corrections, m)
}

/// Runs `N` steps: `(U_{n+1}, V_{n+1}) = (O⁻¹_{λ1} Δ1_n, O⁻¹_{λ2} Δ2_n)`.
pub fn iterate(params: &Params, order: usize) -> Result<SeriesState> {
    let lattice = params.lattice()?;
    let (u0, v0) = leading_term(params)?;
    let mut corrections = vec![Correction { u: u0, v: v0 }];
    for n in 0..order {
        let step = || -> Result<Correction> {
            let (d1, d2) = delta(params, &corrections, n)?;
            Ok(Correction {
                u: d1.apply_inverse_op(lattice.lambda1())?,
                v: d2.apply_inverse_op(lattice.lambda2())?,
            })
        };
        let next = step().map_err(|e| Error::Iteration {
            order: n + 1,
            source: Box::new(e),
        })?;
        corrections.push(next);
    }
    Ok(SeriesState {
        params: *params,
        lattice,
        corrections,
    })
}

/// The two growth ratios `(ρ1, ρ2)` whose maximum is the convergence
/// indicator `ρ(ξ)`:
///
/// ```text
/// ρ1 = |c1| e^{λ1 ξ} / (2 k² λ1²)
/// ρ2 = |b| c2² e^{2 λ2 ξ} / |8 a k⁴ λ2² (λ1 - 2λ2)(λ1 + λ2)²(λ1 + 2λ2)³|
/// ```
fn growth_prefactors(params: &Params) -> ((f64, f64), (f64, f64)) {
    let (l1, l2) = (params.lambda1(), params.lambda2());
    let k2 = params.k * params.k;
    let p1 = params.c1.abs() / (2.0 * k2 * l1 * l1);
    let denom = (8.0
        * params.a
        * k2
        * k2
        * l2
        * l2
        * (l1 - 2.0 * l2)
        * (l1 + l2).powi(2)
        * (l1 + 2.0 * l2).powi(3))
    .abs();
    let p2 = params.b.abs() * params.c2 * params.c2 / denom;
    ((p1, l1), (p2, 2.0 * l2))
}

/// Operational convergence indicator `ρ(ξ)`; the series is treated as
/// convergent where `ρ(ξ) < 1/2`.
pub fn convergence_ratio(params: &Params, xi: f64) -> f64 {
    let ((p1, r1), (p2, r2)) = growth_prefactors(params);
    (p1 * (r1 * xi).exp()).max(p2 * (r2 * xi).exp())
}

pub fn in_convergence_region(params: &Params, xi: f64) -> bool {
    convergence_ratio(params, xi) < 0.5
}

/// The `ξ` at which `ρ(ξ)` equals `target`, or `None` when `ρ ≡ 0`.
pub fn convergence_edge(params: &Params, target: f64) -> Option<f64> {
    let ((p1, r1), (p2, r2)) = growth_prefactors(params);
    [(p1, r1), (p2, r2)]
        .into_iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, r)| (target / p).ln() / r)
        .reduce(f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row_ia() -> Params {
        Params::from_lambdas(0.4, 0.399, 0.1, -0.25, 1.9, 0.5)
    }

    fn key(m: i32, n: i32) -> LatticeKey {
        LatticeKey::new(m, n)
    }

    #[test]
    fn zero_seed_gives_empty_leading_terms() {
        let (u, v) = leading_term(&row_ia().with_constants(0.0, 0.0)).unwrap();
        assert!(u.is_empty() && v.is_empty());
    }

    #[test]
    fn leading_term_matches_seed() {
        let p = row_ia();
        let (u, v) = leading_term(&p).unwrap();
        assert_eq!(u.terms().collect::<Vec<_>>(), vec![(key(1, 0), 1.9)]);
        assert_eq!(v.terms().collect::<Vec<_>>(), vec![(key(0, 1), 0.5)]);
        assert_eq!(u.eval(0.0).unwrap(), p.c1);
    }

    #[test]
    fn case_selection() {
        assert_eq!(select_case(&[0.3, 0.2]), LeadingCase::AllPositive);
        assert_eq!(select_case(&[-0.3, -0.2]), LeadingCase::AllNegative);
        assert_eq!(select_case(&[0.3, -0.2]), LeadingCase::MixedSign);
    }

    #[test]
    fn first_delta_by_hand() {
        let p = row_ia().with_constants(1.3, 0.0);
        let state = iterate(&p, 0).unwrap();
        let (d1, d2) = adomian_delta(&state, 0).unwrap();
        let l1 = p.lambda1();
        let expected = -6.0 * 1.3 * 1.3 * l1 / (p.k * p.k);
        assert_eq!(d1.len(), 1);
        assert!((d1.coefficient(key(2, 0)) - expected).abs() <= 1e-14 * expected.abs());
        assert!(d2.is_empty());

        let p = row_ia();
        let state = iterate(&p, 0).unwrap();
        let (_, d2) = adomian_delta(&state, 0).unwrap();
        let expected = -3.0 * p.c1 * p.c2 * p.lambda2() / (p.k * p.k);
        assert_eq!(d2.len(), 1);
        assert!((d2.coefficient(key(1, 1)) - expected).abs() <= 1e-14 * expected.abs());
    }

    #[test]
    fn delta_past_the_end_is_an_index_error() {
        let state = iterate(&row_ia(), 1).unwrap();
        assert_eq!(adomian_delta(&state, 2).unwrap_err().kind(), "index");
        assert!(state.correction(2).is_err());
    }

    #[test]
    fn corrections_are_homogeneous_in_weight() {
        let state = iterate(&row_ia(), 8).unwrap();
        for (n, c) in state.corrections().iter().enumerate() {
            for k in c.u.keys().chain(c.v.keys()) {
                assert_eq!(k.weight() as usize, n + 1, "order {n} key {k}");
                assert!(k.m >= 0 && k.n >= 0);
            }
            // V carries odd powers of c2, U even ones.
            assert!(c.u.keys().all(|k| k.n % 2 == 0));
            assert!(c.v.keys().all(|k| k.n % 2 == 1));
        }
    }

    #[test]
    fn new_keys_come_from_products_of_earlier_keys() {
        let state = iterate(&row_ia(), 6).unwrap();
        let cs = state.corrections();
        for n in 0..cs.len() - 1 {
            let mut reachable = std::collections::BTreeSet::new();
            for j in 0..=n {
                for a in cs[j].u.keys().chain(cs[j].v.keys()) {
                    for b in cs[n - j].u.keys().chain(cs[n - j].v.keys()) {
                        reachable.insert(a + b);
                    }
                }
            }
            for k in cs[n + 1].u.keys().chain(cs[n + 1].v.keys()) {
                assert!(reachable.contains(&k), "order {} key {k}", n + 1);
            }
        }
    }

    #[test]
    fn delta_assembly_order_does_not_matter() {
        let p = row_ia();
        let state = iterate(&p, 5).unwrap();
        let cs = state.corrections();
        let k2 = p.k * p.k;
        for m in 0..=5 {
            let (d1, _) = adomian_delta(&state, m).unwrap();
            // Scale every product first, then accumulate in reverse order.
            let mut alt = ExpSum::zero(state.lattice());
            for j in (0..=m).rev() {
                alt = alt
                    .add(&cs[j].v.mul(&cs[m - j].v.diff()).unwrap().scale(2.0 * p.b / (p.a * k2)))
                    .unwrap()
                    .add(&cs[j].u.mul(&cs[m - j].u.diff()).unwrap().scale(-6.0 / k2))
                    .unwrap();
            }
            assert!(d1.max_relative_difference(&alt) < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn resonance_carries_iteration_index() {
        // Bypass validation to force λ1 = 2 λ2 exactly.
        let p = Params::from_lambdas(0.8, 0.4, 0.1, -0.25, 1.0, 1.0);
        assert_eq!(p.validate().unwrap_err().kind(), "near-resonance");
        let lattice = Lattice::new(0.8, 0.4).unwrap();
        let corrections = vec![Correction {
            u: ExpSum::monomial(lattice, key(1, 0), 1.0),
            v: ExpSum::monomial(lattice, key(0, 1), 1.0),
        }];
        let (d1, _) = delta(&p, &corrections, 0).unwrap();
        assert!(matches!(
            d1.apply_inverse_op(0.8),
            Err(Error::Resonance { m: 0, n: 2, .. })
        ));
    }

    #[test]
    fn partial_sums_trivia() {
        let p = row_ia();
        let state = iterate(&p, 3).unwrap();
        let (u, v) = state.partial_sum(0, 1.5).unwrap();
        assert_eq!(u, p.c1 * (p.lambda1() * 1.5).exp());
        assert_eq!(v, p.c2 * (p.lambda2() * 1.5).exp());
        let zero = iterate(&p.with_constants(0.0, 0.0), 4).unwrap();
        for upto in 0..=4 {
            assert_eq!(zero.partial_sum(upto, -2.0).unwrap(), (0.0, 0.0));
        }
        let many = state.partial_sums(3, &[-3.0, -1.0, 0.0]).unwrap();
        assert_eq!(many[1], state.partial_sum(3, -1.0).unwrap());
    }

    #[test]
    fn series_json_has_per_order_terms() {
        let state = iterate(&row_ia(), 1).unwrap();
        let v = serde_json::to_value(&state).unwrap();
        assert_eq!(v["orders"].as_array().unwrap().len(), 2);
        assert_eq!(v["orders"][1]["n"], 1);
        assert_eq!(v["orders"][1]["V"]["terms"][0]["m"], 1);
        assert_eq!(v["params"]["c1"], 1.9);
    }

    #[test]
    fn convergence_edge_solves_the_indicator() {
        let p = row_ia();
        for target in [0.5, 1e-2, 1e-4] {
            let xi = convergence_edge(&p, target).unwrap();
            assert!((convergence_ratio(&p, xi) - target).abs() <= 1e-12 * target);
        }
        assert!(convergence_edge(&p.with_constants(0.0, 0.0), 0.5).is_none());
        assert!(in_convergence_region(&p, -30.0));
    }
}
