//! Conformable derivatives, the travelling-wave map and the solution on the
//! `(x, t)` plane.
//!
//! For differentiable `f`, `T_α f(x) = x^{1-α} f'(x)`. Applying `T_α` three
//! times with `s(x) = x^{1-α}` gives
//!
//! ```text
//! T_α³ f = s [ (s'² + s s'') f' + 3 s s' f'' + s² f''' ]
//! ```
//!
//! which is what the third conformable space derivative in the PDE means
//! here: under `ξ = (k/α) x^α + ...` it reduces to exactly `k³ U'''(ξ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundedness::{check_conditions, Theorem};
use crate::closed_form::{normalized_sum, ClosedForm};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::sample::Surface;
use crate::stencil;

/// Step of the stand-alone conformable derivative, relative to `max(1, t)`.
pub const DERIVATIVE_STEP: f64 = 1e-3;
/// Along-ξ resolution of the PDE stencils, in units of `1/max(λ1, λ2)`.
pub const PDE_STEP_SCALE: f64 = 0.1;

/// Fractional-order steps stay below `x / SINGULAR_STEPS`.
pub const SINGULAR_STEPS: f64 = 16.0;
/// Step reduction applied when a stencil has to slide off centre.
pub const SHIFTED_STEP_FACTOR: f64 = 0.5;
/// PDE stencils never sample below this fraction of the point's coordinate.
pub const STENCIL_FLOOR: f64 = 0.2;

/// Largest step that keeps a stencil around `t` inside `t > 0` with margin.
fn positive_cap(t: f64) -> f64 {
    t / (stencil::HALF_WIDTH as f64 + 1.0)
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("order {alpha} must lie in (0, 1]")))
    }
}

/// `ξ(x, t) = (k/α) x^α + (c/β) t^β + ξ0`.
pub fn xi_of(params: &Params, x: f64, t: f64) -> Result<f64> {
    if !(x > 0.0 && t > 0.0) {
        return Err(Error::Domain { x, t });
    }
    Ok(params.k / params.alpha * x.powf(params.alpha)
        + params.c / params.beta * t.powf(params.beta)
        + params.xi0)
}

/// `T_α f(t) = t^{1-α} f'(t)` with `f'` from the central stencil.
pub fn conformable_derivative(f: impl Fn(f64) -> f64, t: f64, alpha: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain { x: t, t });
    }
    check_order(alpha)?;
    let h = (DERIVATIVE_STEP * t.max(1.0)).min(positive_cap(t));
    let df = stencil::richardson(|s| Ok::<_, Error>(f(s)), t, h, 1)?;
    Ok(t.powf(1.0 - alpha) * df)
}

/// The limit definition `(f(t + ε t^{1-α}) - f(t)) / ε` as `ε → 0`, taken
/// with a central stencil in `ε`. Independent of the `t^{1-α} f'` shortcut.
pub fn conformable_by_definition(f: impl Fn(f64) -> f64, t: f64, alpha: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain { x: t, t });
    }
    check_order(alpha)?;
    let s = t.powf(1.0 - alpha);
    let h = (DERIVATIVE_STEP * t.max(1.0)).min(positive_cap(t)) / s;
    stencil::richardson(|eps| Ok::<_, Error>(f(t + eps * s)), 0.0, h, 1)
}

/// `T_α³ f(x)` from ordinary derivatives `f', f'', f'''` at `x`.
pub fn nested_third(x: f64, alpha: f64, d1: f64, d2: f64, d3: f64) -> f64 {
    let s = x.powf(1.0 - alpha);
    let s1 = (1.0 - alpha) * x.powf(-alpha);
    let s2 = -alpha * (1.0 - alpha) * x.powf(-alpha - 1.0);
    s * ((s1 * s1 + s * s2) * d1 + 3.0 * s * s1 * d2 + s * s * d3)
}

/// A rectangular grid in the open positive quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub nx: usize,
    pub nt: usize,
}

impl WaveGridSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.t_min, self.t_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.x_min > 0.0 && self.t_min > 0.0) {
            return Err(Error::Domain {
                x: self.x_min,
                t: self.t_min,
            });
        }
        if self.x_max < self.x_min || self.t_max < self.t_min {
            return Err(Error::Input("grid bounds are reversed".into()));
        }
        if self.nx < 2 || self.nt < 2 {
            return Err(Error::Input(format!(
                "grid needs at least 2 points per axis, got {} x {}",
                self.nx, self.nt
            )));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_min, self.x_max, self.nx)
    }

    pub fn ts(&self) -> Vec<f64> {
        Self::axis(self.t_min, self.t_max, self.nt)
    }
}

/// Whether a surface may be drawn for parameters outside the sign table of
/// the boundedness theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precheck {
    #[default]
    Required,
    Overridden,
}

/// Individual terms of both PDEs at one point, in the order they are written.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeTerms {
    pub first: [f64; 4],
    pub second: [f64; 3],
}

impl PdeTerms {
    pub fn normalized(&self) -> (f64, f64) {
        (normalized_sum(&self.first), normalized_sum(&self.second))
    }
}

/// The exact solution lifted to the plane.
#[derive(Debug, Clone)]
pub struct Wave {
    cf: ClosedForm,
}

impl Wave {
    pub fn new(params: &Params) -> Result<Self> {
        Ok(Wave {
            cf: ClosedForm::new(params)?,
        })
    }

    pub fn params(&self) -> &Params {
        self.cf.params()
    }

    pub fn closed_form(&self) -> &ClosedForm {
        &self.cf
    }

    pub fn u(&self, x: f64, t: f64) -> Result<f64> {
        self.cf.eval_u(xi_of(self.params(), x, t)?)
    }

    pub fn v(&self, x: f64, t: f64) -> Result<f64> {
        self.cf.eval_v(xi_of(self.params(), x, t)?)
    }

    fn lambda_max(&self) -> f64 {
        self.cf.lambda1().max(self.cf.lambda2())
    }

    /// Steps in `x` and `t` that resolve the same ξ-scale as the ODE check.
    /// For fractional orders the step is also kept small against the
    /// distance to the origin, where `x^α` is singular.
    pub fn steps(&self, x: f64, t: f64) -> (f64, f64) {
        let p = self.params();
        let target = PDE_STEP_SCALE / self.lambda_max();
        let step = |z: f64, rate: f64, order: f64| {
            let mut h = target / (rate * z.powf(order - 1.0)).abs();
            if order < 1.0 {
                h = h.min(z / SINGULAR_STEPS);
            }
            // Off-centre stencils have larger error constants.
            if (1.0 - STENCIL_FLOOR) * z < stencil::HALF_WIDTH as f64 * h {
                h *= SHIFTED_STEP_FACTOR;
            }
            h
        };
        (step(x, p.k, p.alpha), step(t, p.c, p.beta))
    }

    pub fn pde_terms(&self, x: f64, t: f64) -> Result<PdeTerms> {
        let p = self.params();
        self.pde_terms_against(p.a, p.b, x, t)
    }

    /// Terms of the PDEs with coefficients `a`, `b` that need not be the
    /// ones this solution was built for.
    pub fn pde_terms_against(&self, a: f64, b: f64, x: f64, t: f64) -> Result<PdeTerms> {
        if !(x > 0.0 && t > 0.0) {
            return Err(Error::Domain { x, t });
        }
        let p = *self.params();
        let (hx, ht) = self.steps(x, t);
        let at = |source: Error| Error::AtGridPoint {
            x,
            t,
            source: Box::new(source),
        };
        let ux = |s: f64| self.u(s, t);
        let vx = |s: f64| self.v(s, t);
        let ut = |s: f64| self.u(x, s);
        let vt = |s: f64| self.v(x, s);
        let d = |f: &dyn Fn(f64) -> Result<f64>, at_point: f64, h: f64, order: usize| {
            stencil::bounded_derivative(f, at_point, h, order, STENCIL_FLOOR * at_point)
        };

        let u0 = self.u(x, t).map_err(at)?;
        let v0 = self.v(x, t).map_err(at)?;
        let sx = x.powf(1.0 - p.alpha);
        let st = t.powf(1.0 - p.beta);
        let u_t = st * d(&ut, t, ht, 1).map_err(at)?;
        let v_t = st * d(&vt, t, ht, 1).map_err(at)?;
        let (u1, u2, u3) = (
            d(&ux, x, hx, 1).map_err(at)?,
            d(&ux, x, hx, 2).map_err(at)?,
            d(&ux, x, hx, 3).map_err(at)?,
        );
        let (v1, v2, v3) = (
            d(&vx, x, hx, 1).map_err(at)?,
            d(&vx, x, hx, 2).map_err(at)?,
            d(&vx, x, hx, 3).map_err(at)?,
        );
        Ok(PdeTerms {
            first: [
                u_t,
                6.0 * a * u0 * sx * u1,
                -2.0 * b * v0 * sx * v1,
                a * nested_third(x, p.alpha, u1, u2, u3),
            ],
            second: [
                v_t,
                3.0 * u0 * sx * v1,
                nested_third(x, p.alpha, v1, v2, v3),
            ],
        })
    }

    /// Normalized residuals of both PDEs at `(x, t)`.
    pub fn pde_residual(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        Ok(self.pde_terms(x, t)?.normalized())
    }

    /// `u` and `v` over a grid, one row per time level.
    pub fn surface(&self, grid: &WaveGridSpec, precheck: Precheck) -> Result<Surface> {
        grid.validate()?;
        if precheck == Precheck::Required {
            let conditions = check_conditions(self.params(), Theorem::Two)?;
            if conditions.subcase.is_none() {
                return Err(Error::Input(format!(
                    "parameters fail the boundedness precheck ({}); override to sample anyway",
                    conditions.notes.join("; ")
                )));
            }
        }
        let (xs, ts) = (grid.xs(), grid.ts());
        let rows = ts
            .par_iter()
            .map(|&t| {
                xs.iter()
                    .map(|&x| {
                        let xi = xi_of(self.params(), x, t)?;
                        self.cf.eval_uv(xi).map_err(|e| Error::AtGridPoint {
                            x,
                            t,
                            source: Box::new(e),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let (u, v) = rows.into_iter().flatten().unzip();
        Ok(Surface { x: xs, t: ts, u, v })
    }
}

pub fn pde_residual(params: &Params, x: f64, t: f64) -> Result<(f64, f64)> {
    Wave::new(params)?.pde_residual(x, t)
}

pub fn surface(params: &Params, grid: &WaveGridSpec, precheck: Precheck) -> Result<Surface> {
    Wave::new(params)?.surface(grid, precheck)
}
