//! Case classification, sign conditions for a bounded solution, sign scans
//! of the denominator Q, hump counting and tail-decay checks.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{ClosedForm, RANGE_LIMIT};
use crate::error::{Error, Result};
use crate::expsum::RESONANCE_SCALE;
use crate::params::Params;
use crate::sample::Profile;

/// Default hump prominence as a fraction of the global maximum.
pub const DEFAULT_PROMINENCE: f64 = 0.05;
/// Default distance from the support edge at which a tail starts.
pub const DEFAULT_TAIL_LENGTH: f64 = 30.0;
/// Default half-width of the scan window in units of `1/λ2`.
pub const DEFAULT_SCAN_HALF_WIDTH: f64 = 80.0;
/// Default number of uniform scan points.
pub const DEFAULT_SCAN_POINTS: usize = 4001;
/// A tail's log-linear fit passes when its RMS residual is below this.
pub const TAIL_FIT_RESIDUAL: f64 = 0.1;
/// The support of a profile is where `|value|` reaches this fraction of its maximum.
pub const SUPPORT_FRACTION: f64 = 0.05;

/// Ordering of the two roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `λ1/2 < λ2 < λ1`
    I,
    /// `λ1 < λ2`
    II,
    /// `λ2 < λ1/2`
    III,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
        })
    }
}

impl std::str::FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" => Ok(Case::I),
            "II" => Ok(Case::II),
            "III" => Ok(Case::III),
            other => Err(Error::Input(format!("unknown case label {other:?}"))),
        }
    }
}

/// Sign pattern of `(c2, k)` within a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcase {
    /// `c2 > 0, k < 0`
    A,
    /// `c2 > 0, k > 0`
    B,
    /// `c2 < 0, k < 0`
    C,
    /// `c2 < 0, k > 0`
    D,
}

impl fmt::Display for Subcase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subcase::A => "a",
            Subcase::B => "b",
            Subcase::C => "c",
            Subcase::D => "d",
        })
    }
}

impl std::str::FromStr for Subcase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a" => Ok(Subcase::A),
            "b" => Ok(Subcase::B),
            "c" => Ok(Subcase::C),
            "d" => Ok(Subcase::D),
            other => Err(Error::Input(format!("unknown sub-case label {other:?}"))),
        }
    }
}

/// Which boundedness theorem to check: the reduced ODE on the line, or the
/// PDE on the plane, which additionally fixes the sign of `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    One,
    #[default]
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QSign {
    Positive,
    Negative,
    Mixed,
}

/// Case label from the ordering of `λ1, λ2`, cross-checked against the
/// equivalent thresholds on `a = (λ2/λ1)²`.
pub fn classify_case(params: &Params) -> Result<Case> {
    params.validate()?;
    let (l1, l2) = (params.lambda1(), params.lambda2());
    let tau = RESONANCE_SCALE * l1.powi(3).max(1.0) / (l1 * l1);
    if (l2 - l1).abs() < tau || (l2 - 0.5 * l1).abs() < tau {
        return Err(Error::Unclassifiable(format!(
            "lambda2 = {l2} sits on a case boundary of lambda1 = {l1}"
        )));
    }
    let by_roots = if l2 > l1 {
        Case::II
    } else if l2 > 0.5 * l1 {
        Case::I
    } else {
        Case::III
    };
    let a = params.a;
    let by_a = if a > 1.0 {
        Case::II
    } else if a > 0.25 {
        Case::I
    } else {
        Case::III
    };
    if by_roots != by_a {
        return Err(Error::Unclassifiable(format!(
            "root ordering gives case {by_roots} but a = {a} gives case {by_a}"
        )));
    }
    Ok(by_roots)
}

/// Outcome of matching parameters against the sign table of a theorem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conditions {
    pub case: Case,
    pub subcase: Option<Subcase>,
    pub notes: Vec<String>,
}

/// Match the parameter signs against the sufficient conditions for a
/// bounded solution. All inequalities are strict; a parameter sitting at
/// zero yields no sub-case and a note.
pub fn check_conditions(params: &Params, theorem: Theorem) -> Result<Conditions> {
    let case = classify_case(params)?;
    let mut notes = Vec::new();
    let mut fail = |msg: String| notes.push(msg);

    if params.c1 <= 0.0 {
        fail(format!("c1 = {} is not positive", params.c1));
    }
    let b_wanted = if case == Case::III { -1.0 } else { 1.0 };
    if params.b * b_wanted <= 0.0 {
        let want = if case == Case::III { "negative" } else { "positive" };
        fail(format!("case {case} needs b {want}, got b = {}", params.b));
    }
    if params.c2 == 0.0 {
        fail("c2 = 0 matches no sub-case".into());
    }
    if theorem == Theorem::Two && params.c * params.k >= 0.0 {
        fail(format!(
            "c = {} and k = {} must have opposite signs",
            params.c, params.k
        ));
    }
    let subcase = if notes.is_empty() {
        Some(match (params.c2 > 0.0, params.k < 0.0) {
            (true, true) => Subcase::A,
            (true, false) => Subcase::B,
            (false, true) => Subcase::C,
            (false, false) => Subcase::D,
        })
    } else {
        None
    };
    Ok(Conditions {
        case,
        subcase,
        notes,
    })
}

/// Result of a sign scan of Q.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QScan {
    pub sign: QSign,
    /// `min |Q| / max |Q|` over the scanned points.
    pub q_min_abs: f64,
    /// Smallest `|Q(ξ)| / Σ|terms of Q(ξ)|`; small values mean cancellation.
    pub q_min_relative: f64,
    /// The window actually scanned, after any shrinking.
    pub range: (f64, f64),
    pub points: usize,
    pub notes: Vec<String>,
}

fn q_point(cf: &ClosedForm, xi: f64) -> Result<(f64, f64)> {
    Ok((cf.eval_q(xi)?, cf.q_magnitude(xi)?))
}

/// Evaluate Q on `n` uniform points of `[xi_lo, xi_hi]`, refine three-fold
/// around sign changes and near-zeros, and report the sign pattern.
pub fn scan_q(params: &Params, xi_lo: f64, xi_hi: f64, n: usize) -> Result<QScan> {
    if n < 100 {
        return Err(Error::Input(format!("Q scan needs at least 100 points, got {n}")));
    }
    if !(xi_lo < xi_hi) || !xi_lo.is_finite() || !xi_hi.is_finite() {
        return Err(Error::Input(format!("bad scan window [{xi_lo}, {xi_hi}]")));
    }
    let cf = ClosedForm::new(params)?;
    let mut notes = Vec::new();
    let (mut lo, mut hi) = (xi_lo, xi_hi);
    // The fastest exponential in Q has rate λ1 + 2λ2 and only grows to the right.
    let top = 0.99 * RANGE_LIMIT / (cf.lambda1() + 2.0 * cf.lambda2());
    if hi > top {
        notes.push(format!("scan window shrunk from xi = {hi} to {top} to stay in range"));
        hi = top;
        if lo >= hi {
            lo = hi - (xi_hi - xi_lo);
        }
    }

    let step = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let coarse = grid
        .par_iter()
        .map(|&xi| q_point(&cf, xi))
        .collect::<Result<Vec<_>>>()?;

    let mut values = coarse.clone();
    let mut refined = 0;
    for i in 0..n {
        let (q, mag) = coarse[i];
        let flips = i + 1 < n && q.signum() != coarse[i + 1].0.signum();
        if flips || q == 0.0 || q.abs() < 1e-3 * mag {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(n - 1)];
            for j in 1..6 {
                let xi = a + (b - a) * j as f64 / 6.0;
                values.push(q_point(&cf, xi)?);
                refined += 1;
            }
        }
    }
    if refined > 0 {
        notes.push(format!("{refined} refinement points added near small |Q|"));
    }

    let positive = values.iter().all(|(q, _)| *q > 0.0);
    let negative = values.iter().all(|(q, _)| *q < 0.0);
    let sign = match (positive, negative) {
        (true, _) => QSign::Positive,
        (_, true) => QSign::Negative,
        _ => QSign::Mixed,
    };
    let max_abs = values.iter().fold(0.0_f64, |m, (q, _)| m.max(q.abs()));
    let min_abs = values.iter().fold(f64::INFINITY, |m, (q, _)| m.min(q.abs()));
    let q_min_relative = values
        .iter()
        .map(|(q, mag)| if *mag > 0.0 { q.abs() / mag } else { 0.0 })
        .fold(f64::INFINITY, f64::min);
    Ok(QScan {
        sign,
        q_min_abs: if max_abs > 0.0 { min_abs / max_abs } else { 0.0 },
        q_min_relative,
        range: (lo, hi),
        points: values.len(),
        notes,
    })
}

/// Number of strict local maxima of `|value|` whose topographic prominence
/// exceeds `prominence` times the global maximum of `|value|`.
pub fn count_humps(values: &[f64], prominence: f64) -> Result<usize> {
    if values.len() < 3 {
        return Err(Error::Sample(format!(
            "hump counting needs at least 3 samples, got {}",
            values.len()
        )));
    }
    if !(prominence > 0.0) {
        return Err(Error::Input(format!("prominence must be positive, got {prominence}")));
    }
    let a: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let global = a.iter().cloned().fold(0.0, f64::max);
    if global == 0.0 {
        return Ok(0);
    }
    let threshold = prominence * global;
    let n = a.len();
    let mut count = 0;
    let mut i = 1;
    while i < n - 1 {
        if a[i] > a[i - 1] {
            // Walk across a plateau to find where it ends.
            let mut j = i;
            while j + 1 < n && a[j + 1] == a[i] {
                j += 1;
            }
            if j + 1 < n && a[j + 1] < a[i] && peak_prominence(&a, i, j) > threshold {
                count += 1;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    Ok(count)
}

/// Height of the plateau `a[lo..=hi]` above the higher of its two bases.
fn peak_prominence(a: &[f64], lo: usize, hi: usize) -> f64 {
    let peak = a[lo];
    let mut left_min = peak;
    for &x in a[..lo].iter().rev() {
        if x > peak {
            break;
        }
        left_min = left_min.min(x);
    }
    let mut right_min = peak;
    for &x in &a[hi + 1..] {
        if x > peak {
            break;
        }
        right_min = right_min.min(x);
    }
    peak - left_min.max(right_min)
}

/// Least-squares fit of one tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    pub ok: bool,
    /// Fitted decay rate, positive when the tail decays away from the support.
    pub rate: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    /// Every tail sample underflowed to zero.
    pub saturated: bool,
    pub samples: usize,
}

impl TailFit {
    fn absent() -> Self {
        TailFit {
            ok: false,
            rate: 0.0,
            residual: 0.0,
            saturated: false,
            samples: 0,
        }
    }

    fn saturated(samples: usize) -> Self {
        TailFit {
            ok: true,
            rate: f64::INFINITY,
            residual: 0.0,
            saturated: true,
            samples,
        }
    }
}

/// Tail checks on both sides of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailDecay {
    pub left: TailFit,
    pub right: TailFit,
}

impl TailDecay {
    pub fn ok(&self) -> (bool, bool) {
        (self.left.ok, self.right.ok)
    }
}

/// Check that `|value|` decays exponentially and monotonically on each
/// tail. Tails are the samples more than `length` beyond the support edges,
/// the outermost samples with `|value| ≥ 5%` of its maximum.
pub fn tail_decay(xi: &[f64], values: &[f64], length: f64) -> Result<TailDecay> {
    if xi.len() != values.len() || xi.len() < 3 {
        return Err(Error::Sample(format!(
            "tail check needs matching columns of at least 3 samples ({} vs {})",
            xi.len(),
            values.len()
        )));
    }
    let a: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let global = a.iter().cloned().fold(0.0, f64::max);
    if global == 0.0 {
        let s = TailFit::saturated(xi.len());
        return Ok(TailDecay { left: s, right: s });
    }
    let cut = SUPPORT_FRACTION * global;
    let first = a.iter().position(|&x| x >= cut).unwrap_or(0);
    let last = a.iter().rposition(|&x| x >= cut).unwrap_or(a.len() - 1);

    let left: Vec<usize> = (0..xi.len()).filter(|&i| xi[i] <= xi[first] - length).collect();
    let right: Vec<usize> = (0..xi.len()).filter(|&i| xi[i] >= xi[last] + length).collect();
    Ok(TailDecay {
        left: fit_tail(xi, &a, &left, true),
        right: fit_tail(xi, &a, &right, false),
    })
}

fn fit_tail(xi: &[f64], a: &[f64], idx: &[usize], left: bool) -> TailFit {
    if idx.len() < 3 {
        return TailFit::absent();
    }
    // Away from the support: reversed on the left so both sides read outward.
    let outward: Vec<usize> = if left {
        idx.iter().rev().cloned().collect()
    } else {
        idx.to_vec()
    };
    let monotone = outward.windows(2).all(|w| a[w[1]] <= a[w[0]]);
    let points: Vec<(f64, f64)> = outward
        .iter()
        .filter(|&&i| a[i] > 0.0)
        .map(|&i| (xi[i], a[i].ln()))
        .collect();
    if points.len() < 2 {
        return if monotone {
            TailFit::saturated(idx.len())
        } else {
            TailFit::absent()
        };
    }
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x, sy + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let residual = (points
        .iter()
        .map(|(x, y)| (y - (my + slope * (x - mx))).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    let rate = if left { slope } else { -slope };
    TailFit {
        ok: rate > 0.0 && monotone && residual < TAIL_FIT_RESIDUAL,
        rate,
        residual,
        saturated: false,
        samples: idx.len(),
    }
}

/// Location of the largest `|U|`, found on a wide coarse grid around the
/// point where the growing and constant parts of Q balance.
pub fn peak_location(params: &Params) -> Result<f64> {
    let cf = ClosedForm::new(params)?;
    let (l1, l2) = (cf.lambda1(), cf.lambda2());
    let centre = if params.c1 != 0.0 {
        (2.0 * params.k * params.k * l1 * l1 / params.c1.abs()).ln() / l1
    } else {
        0.0
    };
    let half = 150.0 / l1.min(l2);
    let n = 6001;
    let grid: Vec<f64> = (0..n)
        .map(|i| centre - half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect();
    let values = grid
        .par_iter()
        .map(|&xi| cf.eval_u(xi).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    let (best, peak) = values
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(if peak > 0.0 { grid[best] } else { centre })
}

/// Default scan window `ξ* ± 80/λ2` around the peak of `|U|`.
pub fn default_window(params: &Params) -> Result<(f64, f64)> {
    let centre = peak_location(params)?;
    let half = DEFAULT_SCAN_HALF_WIDTH / params.lambda2();
    Ok((centre - half, centre + half))
}

/// Sample `U` and `V` on `n` uniform points of a window.
pub fn profile(params: &Params, window: (f64, f64), n: usize) -> Result<Profile> {
    if n < 2 {
        return Err(Error::Input(format!("profile needs at least 2 points, got {n}")));
    }
    let cf = ClosedForm::new(params)?;
    let xi: Vec<f64> = (0..n)
        .map(|i| window.0 + (window.1 - window.0) * i as f64 / (n - 1) as f64)
        .collect();
    let uv = xi
        .par_iter()
        .map(|&x| cf.eval_uv(x))
        .collect::<Result<Vec<_>>>()?;
    let (u, v) = uv.into_iter().unzip();
    Profile::new(xi, u, v)
}

/// Tunables of a boundedness report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsConfig {
    pub theorem: Theorem,
    pub scan_points: usize,
    pub prominence: f64,
    pub tail_length: f64,
    /// Overrides the default window when set.
    pub window: Option<(f64, f64)>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            theorem: Theorem::default(),
            scan_points: DEFAULT_SCAN_POINTS,
            prominence: DEFAULT_PROMINENCE,
            tail_length: DEFAULT_TAIL_LENGTH,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub case_label: Case,
    pub subcase: Option<Subcase>,
    pub q_sign: QSign,
    pub q_min_abs: f64,
    pub q_min_relative: f64,
    pub humps_u: usize,
    pub humps_v: usize,
    pub tail_ok: (bool, bool),
    pub tails_u: TailDecay,
    pub tails_v: TailDecay,
    pub scan_range: (f64, f64),
    pub config: BoundsConfig,
    pub notes: Vec<String>,
}

/// Full boundedness report for one parameter set.
pub fn bounds_report(params: &Params, config: &BoundsConfig) -> Result<BoundsReport> {
    let conditions = check_conditions(params, config.theorem)?;
    let window = match config.window {
        Some(w) => w,
        None => default_window(params)?,
    };
    let scan = scan_q(params, window.0, window.1, config.scan_points)?;
    let prof = profile(params, scan.range, config.scan_points)?;
    let humps_u = count_humps(&prof.u, config.prominence)?;
    let humps_v = count_humps(&prof.v, config.prominence)?;
    let tails_u = tail_decay(&prof.xi, &prof.u, config.tail_length)?;
    let tails_v = tail_decay(&prof.xi, &prof.v, config.tail_length)?;

    let mut notes = conditions.notes;
    notes.extend(scan.notes);
    if conditions.subcase.is_some() && scan.sign == QSign::Mixed {
        notes.push("conditions hold but Q changes sign inside the scan window".into());
    }
    Ok(BoundsReport {
        case_label: conditions.case,
        subcase: conditions.subcase,
        q_sign: scan.sign,
        q_min_abs: scan.q_min_abs,
        q_min_relative: scan.q_min_relative,
        humps_u,
        humps_v,
        tail_ok: (
            tails_u.left.ok && tails_v.left.ok,
            tails_u.right.ok && tails_v.right.ok,
        ),
        tails_u,
        tails_v,
        scan_range: scan.range,
        config: *config,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row_ia() -> Params {
        Params::from_lambdas(0.4, 0.399, 0.1, -0.25, 1.9, 0.5)
    }

    fn row_iiia() -> Params {
        Params::from_lambdas(1.11, 0.42, -3.1, -1.1, 2.3, 0.3)
    }

    #[test]
    fn classification_follows_root_order() {
        assert_eq!(classify_case(&row_ia()).unwrap(), Case::I);
        assert_eq!(classify_case(&row_iiia()).unwrap(), Case::III);
        let p = Params::from_lambdas(0.38888, 0.3889, 0.001, -0.02, 8.9, 9.4);
        assert_eq!(classify_case(&p).unwrap(), Case::II);
    }

    #[test]
    fn subcases_follow_sign_table() {
        let p = row_ia();
        assert_eq!(check_conditions(&p, Theorem::One).unwrap().subcase, Some(Subcase::A));
        let flipped = p.with_constants(p.c1, -p.c2);
        assert_eq!(check_conditions(&flipped, Theorem::One).unwrap().subcase, Some(Subcase::C));
        let negative_c1 = p.with_constants(-1.0, p.c2);
        let c = check_conditions(&negative_c1, Theorem::Two).unwrap();
        assert_eq!(c.subcase, None);
        assert!(!c.notes.is_empty());
        let mut shifted = p;
        shifted.xi0 = 17.0;
        assert_eq!(check_conditions(&shifted, Theorem::Two).unwrap().subcase, Some(Subcase::A));
    }

    #[test]
    fn zero_b_is_a_boundary() {
        let mut p = row_ia();
        p.b = 0.0;
        assert_eq!(check_conditions(&p, Theorem::One).unwrap().subcase, None);
    }

    #[test]
    fn wrong_c_sign_fails_only_the_plane_theorem() {
        // c k³ < 0 is forced by validity, so c and k always have opposite
        // signs; flipping both keeps that and changes the sub-case letter.
        let p = row_ia();
        let mut q = p;
        q.k = -q.k;
        q.c = -q.c;
        assert_eq!(check_conditions(&q, Theorem::Two).unwrap().subcase, Some(Subcase::B));
    }

    #[test]
    fn q_sign_scan() {
        let p = row_ia();
        let (lo, hi) = default_window(&p).unwrap();
        assert_eq!(scan_q(&p, lo, hi, 400).unwrap().sign, QSign::Negative);
        let p = row_iiia();
        let (lo, hi) = default_window(&p).unwrap();
        let s = scan_q(&p, lo, hi, 400).unwrap();
        assert_eq!(s.sign, QSign::Positive);
        assert!(s.q_min_abs > 0.0);
        let mut nob = row_iiia();
        nob.b = 0.0;
        assert_eq!(scan_q(&nob, -100.0, 100.0, 200).unwrap().sign, QSign::Positive);
        assert!(scan_q(&nob, -1.0, 1.0, 50).is_err());
    }

    #[test]
    fn scan_shrinks_at_overflow() {
        let s = scan_q(&row_iiia(), 0.0, 5000.0, 100).unwrap();
        assert!(s.range.1 < 5000.0);
        assert!(!s.notes.is_empty());
    }

    #[test]
    fn adversarial_parameters_change_sign() {
        // Case III with b > 0 makes the two brackets of Q compete.
        let p = Params::from_lambdas(1.11, 0.42, 3.1, -1.1, 2.3, 0.3);
        let s = scan_q(&p, -40.0, 40.0, 2000).unwrap();
        assert_eq!(s.sign, QSign::Mixed);
    }

    #[test]
    fn humps_of_simple_curves() {
        let xs: Vec<f64> = (0..201).map(|i| -10.0 + 0.1 * i as f64).collect();
        let bump: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        assert_eq!(count_humps(&bump, 0.05).unwrap(), 1);
        let two: Vec<f64> = xs
            .iter()
            .map(|x| (-(x - 3.0).powi(2)).exp() - 0.8 * (-(x + 3.0).powi(2)).exp())
            .collect();
        assert_eq!(count_humps(&two, 0.05).unwrap(), 2);
        assert_eq!(count_humps(&[0.0; 10], 0.05).unwrap(), 0);
        assert!(count_humps(&[1.0, 2.0], 0.05).is_err());
        // A ripple below the prominence threshold is ignored.
        let ripple: Vec<f64> = xs
            .iter()
            .map(|x| (-x * x / 4.0).exp() + 0.01 * (5.0 * x).sin() * (-x * x).exp())
            .collect();
        assert_eq!(count_humps(&ripple, 0.05).unwrap(), 1);
    }

    #[test]
    fn plateau_counts_once() {
        assert_eq!(count_humps(&[0.0, 1.0, 1.0, 1.0, 0.0], 0.05).unwrap(), 1);
        assert_eq!(count_humps(&[0.0, 1.0, 1.0, 2.0], 0.05).unwrap(), 0);
    }

    #[test]
    fn tails_of_pure_exponential() {
        let xs: Vec<f64> = (0..2001).map(|i| -50.0 + 0.05 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-2.0 * x.abs()).exp()).collect();
        let t = tail_decay(&xs, &ys, 5.0).unwrap();
        assert_eq!(t.ok(), (true, true));
        assert!((t.left.rate - 2.0).abs() < 1e-9 && (t.right.rate - 2.0).abs() < 1e-9);
    }

    #[test]
    fn constant_curve_has_no_tails() {
        let xs: Vec<f64> = (0..100).map(f64::from).collect();
        let t = tail_decay(&xs, &[1.0; 100], 5.0).unwrap();
        assert_eq!(t.ok(), (false, false));
        assert_eq!((t.left.rate, t.right.rate), (0.0, 0.0));
    }

    #[test]
    fn underflowed_tails_are_saturated() {
        let xs: Vec<f64> = (0..200).map(|i| i as f64 - 100.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| if x.abs() < 5.0 { 1.0 } else { 0.0 }).collect();
        let t = tail_decay(&xs, &ys, 10.0).unwrap();
        assert!(t.left.saturated && t.right.saturated);
        assert_eq!(t.ok(), (true, true));
    }

    #[test]
    fn growing_tail_fails() {
        let xs: Vec<f64> = (0..400).map(|i| i as f64 * 0.25 - 50.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-x * x / 20.0).exp() + (0.1 * x).exp() * 1e-6).collect();
        let t = tail_decay(&xs, &ys, 5.0).unwrap();
        assert!(!t.right.ok);
    }

    #[test]
    fn report_for_table_row() {
        let r = bounds_report(&row_ia(), &BoundsConfig::default()).unwrap();
        assert_eq!(r.case_label, Case::I);
        assert_eq!(r.subcase, Some(Subcase::A));
        assert_eq!(r.q_sign, QSign::Negative);
        assert!((1..=3).contains(&r.humps_u) && (1..=2).contains(&r.humps_v));
        assert_eq!(r.tail_ok, (true, true));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["case_label"], "I");
        assert_eq!(json["subcase"], "a");
    }
}
