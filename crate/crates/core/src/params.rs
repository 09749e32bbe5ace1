use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::{Lattice, RESONANCE_SCALE};

/// Parameters of the conformable coupled KdV system, its travelling-wave
/// reduction, and the two integration constants of the localized solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub b: f64,
    /// Wave speed.
    pub c: f64,
    /// Wave number.
    pub k: f64,
    /// Conformable order in `x`.
    pub alpha: f64,
    /// Conformable order in `t`.
    pub beta: f64,
    /// Phase shift of the travelling coordinate.
    pub xi0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Params {
    /// Parameters for the reduced ODE given its roots directly, with
    /// `a = (λ2/λ1)²`, `c = -λ2² k³` and `α = β = 1`, `ξ0 = 0`.
    pub fn from_lambdas(lambda1: f64, lambda2: f64, b: f64, k: f64, c1: f64, c2: f64) -> Self {
        Params {
            a: (lambda2 / lambda1).powi(2),
            b,
            c: -lambda2 * lambda2 * k.powi(3),
            k,
            alpha: 1.0,
            beta: 1.0,
            xi0: 0.0,
            c1,
            c2,
        }
    }

    /// `λ1 = sqrt(-c / (a k³))`.
    pub fn lambda1(&self) -> f64 {
        (-self.c / (self.a * self.k.powi(3))).sqrt()
    }

    /// `λ2 = sqrt(-c / k³)`.
    pub fn lambda2(&self) -> f64 {
        (-self.c / self.k.powi(3)).sqrt()
    }

    pub fn with_constants(mut self, c1: f64, c2: f64) -> Self {
        self.c1 = c1;
        self.c2 = c2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("k", self.k),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("xi0", self.xi0),
            ("c1", self.c1),
            ("c2", self.c2),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} = {v} is not finite")));
        }
        if self.a <= 0.0 {
            return Err(Error::InvalidParams(format!("a = {} must be positive", self.a)));
        }
        if self.k == 0.0 {
            return Err(Error::InvalidParams("k must be nonzero".into()));
        }
        if self.c * self.k.powi(3) >= 0.0 {
            return Err(Error::InvalidParams(format!(
                "c k^3 = {} must be negative for real lambdas",
                self.c * self.k.powi(3)
            )));
        }
        for (name, order) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(order > 0.0 && order <= 1.0) {
                return Err(Error::InvalidParams(format!("{name} = {order} must lie in (0, 1]")));
            }
        }
        let (l1, l2) = (self.lambda1(), self.lambda2());
        if !(l1.is_finite() && l2.is_finite() && l1 > 0.0 && l2 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambdas ({l1}, {l2}) are not finite and positive"
            )));
        }
        let gap_floor = RESONANCE_SCALE * l1.powi(3).max(1.0) / (l1 * l1);
        if (l1 - l2).abs() < gap_floor {
            return Err(Error::DistinctRoots { gap: (l1 - l2).abs() });
        }
        if (l1 - 2.0 * l2).abs() < gap_floor {
            return Err(Error::NearResonance {
                gap: (l1 - 2.0 * l2).abs(),
            });
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<Lattice> {
        self.validate()?;
        Lattice::new(self.lambda1(), self.lambda2())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Params {
        Params::from_lambdas(0.4, 0.399, 0.1, -0.25, 1.9, 0.5)
    }

    #[test]
    fn lambdas_round_trip_from_roots() {
        let p = base();
        assert!((p.lambda1() - 0.4).abs() < 1e-15);
        assert!((p.lambda2() - 0.399).abs() < 1e-15);
        let ratio = p.lambda1().powi(2) * p.a / p.lambda2().powi(2);
        assert!((ratio - 1.0).abs() < 1e-14);
        p.validate().unwrap();
    }

    #[test]
    fn a_equal_one_violates_distinct_roots() {
        let mut p = base();
        p.a = 1.0;
        assert_eq!(p.validate().unwrap_err().kind(), "distinct-roots-violation");
    }

    #[test]
    fn lambda1_twice_lambda2_is_resonant() {
        let mut p = base();
        p.a = 0.25;
        assert_eq!(p.validate().unwrap_err().kind(), "near-resonance");
    }

    #[test]
    fn rejects_bad_signs_and_orders() {
        let mut p = base();
        p.c = -p.c;
        assert!(p.validate().is_err());
        let mut p = base();
        p.a = -1.0;
        assert!(p.validate().is_err());
        let mut p = base();
        p.alpha = 0.0;
        assert!(p.validate().is_err());
        let mut p = base();
        p.beta = 1.2;
        assert!(p.validate().is_err());
        let mut p = base();
        p.k = 0.0;
        assert!(p.validate().is_err());
        let mut p = base();
        p.c1 = f64::NAN;
        assert!(p.validate().is_err());
    }
}
