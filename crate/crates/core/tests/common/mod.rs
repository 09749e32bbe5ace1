//! Shared fixtures: bundled table rows and a hand transcription of the
//! printed correction terms `U1..V3`, kept independent of the engine.

#![allow(dead_code)]

use rcam_kdv::expsum::LatticeKey;
use rcam_kdv::table::{self, TableRow};
use rcam_kdv::Params;

pub fn table1() -> Vec<TableRow> {
    table::bundled("table1").expect("bundled table1")
}

pub fn table2() -> Vec<TableRow> {
    table::bundled("table2").expect("bundled table2")
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// A printed correction as `(m, n, coefficient)` of `e^{(m λ1 + n λ2) ξ}`.
pub type Printed = Vec<(i32, i32, f64)>;

pub fn key(m: i32, n: i32) -> LatticeKey {
    LatticeKey::new(m, n)
}

/// `[U1, V1, U2, V2, U3, V3]` from the printed closed expressions.
pub fn printed_corrections(p: &Params) -> [Printed; 6] {
    let (l1, l2) = (p.lambda1(), p.lambda2());
    let (a, b, k, c1, c2) = (p.a, p.b, p.k, p.c1, p.c2);
    let k2 = k * k;
    let (k4, k6) = (k2 * k2, k2 * k2 * k2);

    let d1 = a * k2 * (l1.powi(4) - 4.0 * l1 * l1 * l2 * l2);
    let u1 = vec![
        (2, 0, -a * c1 * c1 * (l1 * l1 - 4.0 * l2 * l2) / d1),
        (0, 2, -b * c2 * c2 * l1 * l1 / d1),
    ];

    let v1 = vec![(
        1,
        1,
        -3.0 * c1 * c2 * l2 / (k2 * l1 * (l1 + l2) * (l1 + 2.0 * l2)),
    )];

    let d2 = 4.0 * a * k4 * l1.powi(4) * l2 * (l1 + l2).powi(2) * (l1 * l1 - 4.0 * l2 * l2);
    let u2 = vec![
        (
            3,
            0,
            3.0 * c1 * a * c1 * c1 * l2 * (l1 + l2).powi(2) * (l1 * l1 - 4.0 * l2 * l2) / d2,
        ),
        (
            1,
            2,
            3.0 * c1 * 2.0 * b * c2 * c2 * (l1 * l1 + 2.0 * l2 * l2) * l1.powi(3) / d2,
        ),
    ];

    let dv2 = 8.0 * a * k4 * l1.powi(3) * l2 * l2 * (l1 + l2) * (l1 * l1 - 4.0 * l2 * l2);
    let v2 = vec![
        (
            2,
            1,
            c2 * 12.0 * a * c1 * c1 * (l1 - 2.0 * l2) * l2.powi(3) / dv2,
        ),
        (0, 3, c2 * b * c2 * c2 * (l1 + l2) * l1.powi(3) / dv2),
    ];

    let d3 = 4.0
        * a
        * a
        * k6
        * l1.powi(6)
        * (l1 - 2.0 * l2).powi(2)
        * l2
        * l2
        * (l1 + 2.0 * l2).powi(3);
    let u3 = vec![
        (
            4,
            0,
            -2.0 * a * a * c1.powi(4) * (l1 - 2.0 * l2).powi(2) * l2 * l2 * (l1 + 2.0 * l2).powi(3)
                / d3,
        ),
        (
            2,
            2,
            -12.0
                * a
                * b
                * c1
                * c1
                * c2
                * c2
                * l2
                * (l1.powi(3) - 2.0 * l2 * l1 * l1 + 2.0 * l2 * l2 * l1 - 4.0 * l2.powi(3))
                * l1.powi(3)
                / d3,
        ),
        (0, 4, -b * b * c2.powi(4) * (l1 + 2.0 * l2) * l1.powi(6) / d3),
    ];

    let dv3 = 8.0
        * a
        * k6
        * l1.powi(5)
        * (l1 - 2.0 * l2)
        * l2
        * (l1 + l2).powi(2)
        * (l1 + 2.0 * l2).powi(3);
    let v3 = vec![
        (
            3,
            1,
            -3.0 * c1
                * c2
                * 2.0
                * a
                * c1
                * c1
                * l2
                * l2
                * (l1 + 2.0 * l2).powi(2)
                * (l1 * l1 - l1 * l2 - 2.0 * l2 * l2)
                / dv3,
        ),
        (
            1,
            3,
            -3.0 * c1 * c2 * 3.0 * b * c2 * c2 * (l1 * l1 + l2 * l1 + 2.0 * l2 * l2) * l1.powi(4)
                / dv3,
        ),
    ];

    [u1, v1, u2, v2, u3, v3]
}

/// Evaluate a printed correction directly.
pub fn eval_printed(p: &Params, terms: &Printed, xi: f64) -> f64 {
    let (l1, l2) = (p.lambda1(), p.lambda2());
    terms
        .iter()
        .map(|&(m, n, c)| c * ((f64::from(m) * l1 + f64::from(n) * l2) * xi).exp())
        .sum()
}
