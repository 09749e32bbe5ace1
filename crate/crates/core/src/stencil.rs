//! Eighth-order central finite differences with one Richardson halving.

/// First derivative, offsets -4..=4.
const FIRST: [f64; 9] = [
    1.0 / 280.0,
    -4.0 / 105.0,
    1.0 / 5.0,
    -4.0 / 5.0,
    0.0,
    4.0 / 5.0,
    -1.0 / 5.0,
    4.0 / 105.0,
    -1.0 / 280.0,
];

/// Second derivative, offsets -4..=4.
const SECOND: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -1.0 / 5.0,
    8.0 / 5.0,
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Third derivative, offsets -5..=5.
const THIRD: [f64; 11] = [
    41.0 / 6048.0,
    -1261.0 / 15120.0,
    541.0 / 1120.0,
    -4369.0 / 2520.0,
    1669.0 / 720.0,
    0.0,
    -1669.0 / 720.0,
    4369.0 / 2520.0,
    -541.0 / 1120.0,
    1261.0 / 15120.0,
    -41.0 / 6048.0,
];

/// Formal accuracy order of every stencil here.
pub const ORDER: u32 = 8;

/// Largest offset used by any stencil, in units of the step.
pub const HALF_WIDTH: usize = 5;

fn weights(derivative: usize) -> &'static [f64] {
    match derivative {
        1 => &FIRST,
        2 => &SECOND,
        3 => &THIRD,
        _ => panic!("no stencil for derivative order {derivative}"),
    }
}

fn apply<E>(
    f: &impl Fn(f64) -> Result<f64, E>,
    x: f64,
    h: f64,
    derivative: usize,
) -> Result<f64, E> {
    let w = weights(derivative);
    let half = (w.len() / 2) as i32;
    let mut acc = 0.0;
    for (i, wi) in w.iter().enumerate() {
        if *wi != 0.0 {
            acc += wi * f(x + f64::from(i as i32 - half) * h)?;
        }
    }
    Ok(acc / h.powi(derivative as i32))
}

/// Central derivative of order `derivative` (1..=3) at `x` with step `h`,
/// without extrapolation.
pub fn derivative<E>(
    f: impl Fn(f64) -> Result<f64, E>,
    x: f64,
    h: f64,
    derivative: usize,
) -> Result<f64, E> {
    apply(&f, x, h, derivative)
}

/// Central derivative with one Richardson halving: `D(h/2) + (D(h/2) - D(h)) / (2⁸ - 1)`.
pub fn richardson<E>(
    f: impl Fn(f64) -> Result<f64, E>,
    x: f64,
    h: f64,
    derivative: usize,
) -> Result<f64, E> {
    let coarse = apply(&f, x, h, derivative)?;
    let fine = apply(&f, x, 0.5 * h, derivative)?;
    Ok(fine + (fine - coarse) / (2f64.powi(ORDER as i32) - 1.0))
}

/// Weights of the derivative of order `derivative` at 0 from values at
/// `offsets`, by Fornberg's recurrence.
pub fn fornberg_weights(offsets: &[f64], derivative: usize) -> Vec<f64> {
    let n = offsets.len();
    assert!(derivative < n, "need more points than the derivative order");
    let mut c = vec![vec![0.0; derivative + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(derivative);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[derivative]).collect()
}

/// Number of points in an off-centre stencil.
pub const SHIFTED_POINTS: usize = 2 * HALF_WIDTH + 1;

/// Derivative at `x` from samples that never go below `lower`.
///
/// When the central stencil fits, this is [`richardson`]. Otherwise the
/// eleven-point stencil slides right, keeping as many points left of `x`
/// as fit, and is used without extrapolation.
pub fn bounded_derivative<E>(
    f: impl Fn(f64) -> Result<f64, E>,
    x: f64,
    h: f64,
    derivative: usize,
    lower: f64,
) -> Result<f64, E> {
    let room = ((x - lower) / h).floor();
    if room >= HALF_WIDTH as f64 {
        return richardson(f, x, h, derivative);
    }
    let left = room.max(0.0) as i32;
    let offsets: Vec<f64> = (-left..SHIFTED_POINTS as i32 - left).map(f64::from).collect();
    let w = fornberg_weights(&offsets, derivative);
    let mut acc = 0.0;
    for (o, wi) in offsets.iter().zip(&w) {
        acc += wi * f(x + o * h)?;
    }
    Ok(acc / h.powi(derivative as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn ok(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<f64, Infallible> {
        move |x| Ok(f(x))
    }

    #[test]
    fn stencils_are_exact_on_polynomials() {
        // Exact through degree 8 for the first/second stencils and degree 10 for the third.
        for d in 1..=3usize {
            let w = weights(d);
            let half = (w.len() / 2) as i32;
            for p in 0..w.len() as i32 {
                let moment: f64 = w
                    .iter()
                    .enumerate()
                    .map(|(i, wi)| wi * f64::from(i as i32 - half).powi(p))
                    .sum();
                let factorial: f64 = (1..=d).map(|i| i as f64).product();
                let expected = if p as usize == d { factorial } else { 0.0 };
                assert!((moment - expected).abs() < 1e-10, "d={d} p={p} moment={moment}");
            }
        }
    }

    #[test]
    fn derivatives_of_an_exponential() {
        let f = ok(|x: f64| (0.7 * x).exp());
        for d in 1..=3 {
            let exact = 0.7f64.powi(d as i32) * (0.7f64 * 1.3).exp();
            let got = richardson(&f, 1.3, 0.1, d).unwrap();
            assert!((got - exact).abs() < 1e-11 * exact, "d={d}: {got} vs {exact}");
        }
    }

    #[test]
    fn fornberg_reproduces_the_fixed_tables() {
        let offsets: Vec<f64> = (-4..=4).map(f64::from).collect();
        for (d, table) in [(1, &FIRST), (2, &SECOND)] {
            for (a, b) in fornberg_weights(&offsets, d).iter().zip(table.iter()) {
                assert!((a - b).abs() < 1e-12, "d={d}: {a} vs {b}");
            }
        }
        let offsets: Vec<f64> = (-5..=5).map(f64::from).collect();
        for (a, b) in fornberg_weights(&offsets, 3).iter().zip(THIRD.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bounded_stencil_stays_above_the_floor() {
        let f = |x: f64| {
            if x < 1.0 {
                Err("below floor")
            } else {
                Ok((0.5 * x).exp())
            }
        };
        for d in 1..=3 {
            let got = bounded_derivative(f, 1.3, 0.2, d, 1.0).unwrap();
            let exact = 0.5f64.powi(d as i32) * 0.65f64.exp();
            assert!((got - exact).abs() < 1e-8 * exact, "d={d}: {got} vs {exact}");
        }
        // With room to spare it is the central extrapolated value.
        let g = |x: f64| Ok::<_, ()>(x.sin());
        assert_eq!(bounded_derivative(g, 3.0, 0.1, 2, 0.0), richardson(g, 3.0, 0.1, 2));
    }

    #[test]
    fn errors_propagate() {
        let f = |x: f64| if x > 1.0 { Err("boom") } else { Ok(x) };
        assert_eq!(derivative(f, 0.9, 0.1, 1), Err("boom"));
    }
}
