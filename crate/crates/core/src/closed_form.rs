//! Exact solution of the reduced system, its ε-generating functions, and
//! finite-difference residuals of the reduced ODE.
//!
//! The solution is a ratio of exponential polynomials,
//! `U = N_U / Q²`, `V = N_V / Q`. Numerators and denominators are expanded
//! into `(coefficient, rate)` term lists and evaluated with a per-list
//! exponential scale so that the ratio stays finite wherever the solution
//! itself is representable, even when `Q²` alone would overflow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::stencil;

/// Largest exponent accepted before an evaluation is declared out of range.
pub const RANGE_LIMIT: f64 = 700.0;

/// Scaled `|Q|` below this is treated as a zero of the denominator.
pub const Q_VANISH: f64 = 1e-300;

/// ODE residual step: `h = ODE_STEP_SCALE / max(λ1, λ2)`.
pub const ODE_STEP_SCALE: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
struct Term {
    coef: f64,
    rate: f64,
}

/// `Σ coef · e^{rate ξ}` kept as `mantissa · e^{scale}`.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    mantissa: f64,
    scale: f64,
}

fn scaled(terms: &[Term], xi: f64) -> Scaled {
    let scale = terms
        .iter()
        .filter(|t| t.coef != 0.0)
        .map(|t| t.rate * xi)
        .fold(f64::NEG_INFINITY, f64::max);
    if scale == f64::NEG_INFINITY {
        return Scaled {
            mantissa: 0.0,
            scale: 0.0,
        };
    }
    let mantissa = terms
        .iter()
        .map(|t| t.coef * (t.rate * xi - scale).exp())
        .sum();
    Scaled { mantissa, scale }
}

/// `num / den^power`, refusing vanishing denominators and overflow.
fn ratio(num: Scaled, den: Scaled, power: i32, xi: f64) -> Result<f64> {
    if !(den.mantissa.abs() >= Q_VANISH) {
        return Err(Error::QVanishing { xi });
    }
    if num.mantissa == 0.0 {
        return Ok(0.0);
    }
    let exponent = num.scale - f64::from(power) * den.scale;
    let log_mag = exponent + num.mantissa.abs().ln() - f64::from(power) * den.mantissa.abs().ln();
    if log_mag > RANGE_LIMIT {
        return Err(Error::Range { xi });
    }
    let value = num.mantissa / den.mantissa.powi(power) * exponent.exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Range { xi })
    }
}

/// Shared factors of the solution in terms of the roots.
#[derive(Debug, Clone, Copy)]
struct Factors {
    l1: f64,
    l2: f64,
    /// `λ1 - 2λ2`
    d: f64,
    /// `λ1 + λ2`
    s: f64,
    /// `λ1 + 2λ2`
    t: f64,
    /// `λ1² - 3λ2λ1 + 2λ2²`
    p: f64,
    /// `λ1² + 3λ2λ1 + 2λ2²`
    r: f64,
}

impl Factors {
    fn new(l1: f64, l2: f64) -> Self {
        Factors {
            l1,
            l2,
            d: l1 - 2.0 * l2,
            s: l1 + l2,
            t: l1 + 2.0 * l2,
            p: l1 * l1 - 3.0 * l2 * l1 + 2.0 * l2 * l2,
            r: l1 * l1 + 3.0 * l2 * l1 + 2.0 * l2 * l2,
        }
    }
}

/// The exact solution for one parameter set.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    params: Params,
    f: Factors,
    q: Vec<Term>,
    u_num: Vec<Term>,
    v_num: Vec<Term>,
}

impl ClosedForm {
    pub fn new(params: &Params) -> Result<Self> {
        params.validate()?;
        let f = Factors::new(params.lambda1(), params.lambda2());
        let (q, u_num, v_num) = exact_terms(params, &f);
        Ok(ClosedForm {
            params: *params,
            f,
            q,
            u_num,
            v_num,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn lambda1(&self) -> f64 {
        self.f.l1
    }

    pub fn lambda2(&self) -> f64 {
        self.f.l2
    }

    /// The common denominator, evaluated bracket by bracket as written:
    ///
    /// ```text
    /// Q = 8ak⁴λ2²(λ1-2λ2)(λ1+λ2)²(λ1+2λ2)³ (c1 e^{λ1ξ} + 2k²λ1²)
    ///     - b c2² e^{2λ2ξ} { c1 (λ1²-3λ2λ1+2λ2²)² e^{λ1ξ} + 2k²λ1² (λ1²+3λ2λ1+2λ2²)² }
    /// ```
    pub fn eval_q(&self, xi: f64) -> Result<f64> {
        let Factors { l1, l2, d, s, t, p, r } = self.f;
        let Params { a, b, k, c1, c2, .. } = self.params;
        let largest = [l1 * xi, 2.0 * l2 * xi, (l1 + 2.0 * l2) * xi]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        if largest > RANGE_LIMIT {
            return Err(Error::Range { xi });
        }
        let k2 = k * k;
        let lead = 8.0 * a * k2 * k2 * l2 * l2 * d * s * s * t.powi(3);
        let q = lead * (c1 * (l1 * xi).exp() + 2.0 * k2 * l1 * l1)
            - b * c2
                * c2
                * (2.0 * l2 * xi).exp()
                * (c1 * p * p * (l1 * xi).exp() + 2.0 * k2 * l1 * l1 * r * r);
        if q.is_finite() {
            Ok(q)
        } else {
            Err(Error::Range { xi })
        }
    }

    /// Sum of the absolute values of the four exponential terms of Q, the
    /// natural scale against which a small `|Q|` means cancellation.
    pub fn q_magnitude(&self, xi: f64) -> Result<f64> {
        if self.q.iter().any(|t| t.rate * xi > RANGE_LIMIT) {
            return Err(Error::Range { xi });
        }
        Ok(self.q.iter().map(|t| t.coef.abs() * (t.rate * xi).exp()).sum())
    }

    pub fn eval_u(&self, xi: f64) -> Result<f64> {
        ratio(scaled(&self.u_num, xi), scaled(&self.q, xi), 2, xi)
    }

    pub fn eval_v(&self, xi: f64) -> Result<f64> {
        ratio(scaled(&self.v_num, xi), scaled(&self.q, xi), 1, xi)
    }

    pub fn eval_uv(&self, xi: f64) -> Result<(f64, f64)> {
        Ok((self.eval_u(xi)?, self.eval_v(xi)?))
    }

    /// `(U(ξ, ε), V(ξ, ε))`, whose Taylor coefficients in `ε` are the
    /// correction terms and whose value at `ε = 1` is the exact solution.
    pub fn eval_generating(&self, xi: f64, eps: f64) -> Result<(f64, f64)> {
        let (q, u_num, v_num) = generating_terms(&self.params, &self.f, eps);
        let q = scaled(&q, xi);
        Ok((
            ratio(scaled(&u_num, xi), q, 2, xi)?,
            ratio(scaled(&v_num, xi), q, 1, xi)?,
        ))
    }

    /// Taylor coefficients of the generating functions in `ε` at `ε = 0`,
    /// orders `0..=max_order` (at most 3), by central differences in `ε`
    /// with step `h_eps` and one Richardson halving.
    pub fn taylor_coefficients(
        &self,
        xi: f64,
        max_order: usize,
        h_eps: f64,
    ) -> Result<Vec<(f64, f64)>> {
        assert!(max_order <= 3, "stencils exist up to the third derivative");
        let mut out = vec![self.eval_generating(xi, 0.0)?];
        let mut factorial = 1.0;
        for order in 1..=max_order {
            factorial *= order as f64;
            let du = stencil::richardson(|e| self.eval_generating(xi, e).map(|g| g.0), 0.0, h_eps, order)?;
            let dv = stencil::richardson(|e| self.eval_generating(xi, e).map(|g| g.1), 0.0, h_eps, order)?;
            out.push((du / factorial, dv / factorial));
        }
        Ok(out)
    }

    /// The reduced-ODE operator with this solution's own coefficients.
    pub fn operator(&self) -> OdeOperator {
        OdeOperator::new(&self.params)
    }

    /// Normalized residuals of both reduced equations at `ξ`, with
    /// derivatives taken numerically from [`Self::eval_u`] and [`Self::eval_v`].
    pub fn ode_residual(&self, xi: f64) -> Result<(f64, f64)> {
        self.operator().residual(
            |x| self.eval_u(x),
            |x| self.eval_v(x),
            xi,
        )
    }
}

/// Expanded term lists of Q, the U numerator and the V numerator at ε = 1.
fn exact_terms(params: &Params, f: &Factors) -> (Vec<Term>, Vec<Term>, Vec<Term>) {
    let Factors { l1, l2, d, s, t, p, r } = *f;
    let Params { a, b, k, c1, c2, .. } = *params;
    let k2 = k * k;
    let k4 = k2 * k2;
    let l1_2 = l1 * l1;
    let l2_2 = l2 * l2;

    let lead = 8.0 * a * k4 * l2_2 * d * s * s * t.powi(3);
    let q = vec![
        Term { coef: lead * c1, rate: l1 },
        Term { coef: lead * 2.0 * k2 * l1_2, rate: 0.0 },
        Term { coef: -b * c2 * c2 * c1 * p * p, rate: l1 + 2.0 * l2 },
        Term { coef: -b * c2 * c2 * 2.0 * k2 * l1_2 * r * r, rate: 2.0 * l2 },
    ];

    let pref = 4.0 * k4 * d * s * s * t * t;
    let group = -16.0 * a * b * k2 * c2 * c2 * l2_2 * t;
    let u_num = vec![
        Term {
            coef: pref * 64.0 * c1 * a * a * k4 * k4 * l1_2 * l1_2 * l2_2 * l2_2 * d * s * s * t.powi(4),
            rate: l1,
        },
        Term {
            coef: pref * group * c1 * k2 * l1_2 * (l1_2 - 4.0 * l2_2).powi(2) * (l1_2 + l2_2),
            rate: l1 + 2.0 * l2,
        },
        Term {
            coef: pref * group * c1 * c1 * l2_2 * p * p,
            rate: 2.0 * (l1 + l2),
        },
        Term {
            coef: pref * group * 4.0 * k4 * l1_2 * l1_2 * l2_2 * r * r,
            rate: 2.0 * l2,
        },
        Term {
            coef: pref * b * b * c1 * c2.powi(4) * l1_2 * l1_2 * d * (l1 - l2).powi(2),
            rate: l1 + 4.0 * l2,
        },
    ];

    let vpref = 8.0 * a * c2 * k4 * l2_2 * d * s * t * t;
    let v_num = vec![
        Term { coef: vpref * c1 * p, rate: l1 + l2 },
        Term { coef: vpref * 2.0 * k2 * l1_2 * r, rate: l2 },
    ];
    (q, u_num, v_num)
}

/// Expanded term lists of Q(ξ, ε), the U(ξ, ε) numerator and the V(ξ, ε)
/// numerator, with every power of ε placed where the generating functions
/// carry it.
fn generating_terms(
    params: &Params,
    f: &Factors,
    eps: f64,
) -> (Vec<Term>, Vec<Term>, Vec<Term>) {
    let Factors { l1, l2, d, s, t, p, r } = *f;
    let Params { a, b, k, c1, c2, .. } = *params;
    let (e2, e3, e4) = (eps * eps, eps * eps * eps, eps.powi(4));
    let k2 = k * k;
    let k4 = k2 * k2;
    let (l1_2, l2_2) = (l1 * l1, l2 * l2);

    let lead = 8.0 * a * k4 * l2_2 * d * s * s * t.powi(3);
    let q = vec![
        Term { coef: lead * eps * c1, rate: l1 },
        Term { coef: lead * 2.0 * k2 * l1_2, rate: 0.0 },
        Term { coef: -b * e3 * c2 * c2 * c1 * p * p, rate: l1 + 2.0 * l2 },
        Term { coef: -b * e2 * c2 * c2 * 2.0 * k2 * l1_2 * r * r, rate: 2.0 * l2 },
    ];

    let pref = 4.0 * k4 * d * s * s * t * t;
    let group = -16.0 * eps * a * b * k2 * c2 * c2 * l2_2 * t;
    let u_num = vec![
        Term {
            coef: pref * 64.0 * c1 * a * a * k4 * k4 * l1_2 * l1_2 * l2_2 * l2_2 * d * s * s * t.powi(4),
            rate: l1,
        },
        Term {
            coef: pref * group * eps * c1 * k2 * l1_2 * (l1_2 - 4.0 * l2_2).powi(2) * (l1_2 + l2_2),
            rate: l1 + 2.0 * l2,
        },
        Term {
            coef: pref * group * e2 * c1 * c1 * l2_2 * p * p,
            rate: 2.0 * (l1 + l2),
        },
        Term {
            coef: pref * group * 4.0 * k4 * l1_2 * l1_2 * l2_2 * r * r,
            rate: 2.0 * l2,
        },
        Term {
            coef: pref * e4 * b * b * c1 * c2.powi(4) * l1_2 * l1_2 * d * (l1 - l2).powi(2),
            rate: l1 + 4.0 * l2,
        },
    ];

    let vpref = 8.0 * a * c2 * k4 * l2_2 * d * s * t * t;
    let v_num = vec![
        Term { coef: vpref * eps * c1 * p, rate: l1 + l2 },
        Term { coef: vpref * 2.0 * k2 * l1_2 * r, rate: l2 },
    ];
    (q, u_num, v_num)
}

/// Left-hand sides of the reduced system,
///
/// ```text
/// U''' - λ1² U' + (6/k²) U U' - (2b/(a k²)) V V'
/// V''' - λ2² V' + (3/k²) U V'
/// ```
///
/// with its own copy of the coefficients, so a solution can be checked
/// against a deliberately perturbed operator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OdeOperator {
    pub lambda1: f64,
    pub lambda2: f64,
    pub k: f64,
    pub a: f64,
    pub b: f64,
}

/// Individual terms of both equations at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTerms {
    pub first: [f64; 4],
    pub second: [f64; 3],
}

impl OdeTerms {
    /// `|Σ terms| / max |term|` per equation; zero when every term is zero.
    pub fn normalized(&self) -> (f64, f64) {
        (normalized_sum(&self.first), normalized_sum(&self.second))
    }

    /// Residuals of the linear parts only.
    pub fn linear_normalized(&self) -> (f64, f64) {
        (
            normalized_sum(&self.first[..2]),
            normalized_sum(&self.second[..2]),
        )
    }
}

pub(crate) fn normalized_sum(terms: &[f64]) -> f64 {
    let scale = terms.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    if scale == 0.0 {
        0.0
    } else {
        terms.iter().sum::<f64>().abs() / scale
    }
}

impl OdeOperator {
    pub fn new(params: &Params) -> Self {
        OdeOperator {
            lambda1: params.lambda1(),
            lambda2: params.lambda2(),
            k: params.k,
            a: params.a,
            b: params.b,
        }
    }

    pub fn step(&self) -> f64 {
        ODE_STEP_SCALE / self.lambda1.max(self.lambda2)
    }

    pub fn terms(
        &self,
        u: impl Fn(f64) -> Result<f64>,
        v: impl Fn(f64) -> Result<f64>,
        xi: f64,
    ) -> Result<OdeTerms> {
        let h = self.step();
        let (u0, v0) = (u(xi)?, v(xi)?);
        let u1 = stencil::richardson(&u, xi, h, 1)?;
        let u3 = stencil::richardson(&u, xi, h, 3)?;
        let v1 = stencil::richardson(&v, xi, h, 1)?;
        let v3 = stencil::richardson(&v, xi, h, 3)?;
        let k2 = self.k * self.k;
        Ok(OdeTerms {
            first: [
                u3,
                -self.lambda1 * self.lambda1 * u1,
                6.0 / k2 * u0 * u1,
                -2.0 * self.b / (self.a * k2) * v0 * v1,
            ],
            second: [v3, -self.lambda2 * self.lambda2 * v1, 3.0 / k2 * u0 * v1],
        })
    }

    pub fn residual(
        &self,
        u: impl Fn(f64) -> Result<f64>,
        v: impl Fn(f64) -> Result<f64>,
        xi: f64,
    ) -> Result<(f64, f64)> {
        Ok(self.terms(u, v, xi)?.normalized())
    }
}
