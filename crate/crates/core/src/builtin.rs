//! Shipped semigroups: cyclic groups, S₃ (classical and dual) and the
//! two-element one-sided zero semigroups.

use std::f64::consts::PI;

use crate::coalgebra::{MultiplicationTable, QuantumSemigroup, Side};
use crate::error::Result;
use crate::multimatrix::{ComplexMatrix, C64};
use crate::DEFAULT_TOL;

pub fn z_n_table(n: usize) -> MultiplicationTable {
    let labels = (0..n).map(|k| k.to_string()).collect();
    MultiplicationTable::from_fn(labels, |x, y| (x + y) % n).expect("closed")
}

/// Classical `Z_n` (unvalidated).
pub fn z_n(n: usize) -> QuantumSemigroup {
    QuantumSemigroup::from_classical(&z_n_table(n)).expect("valid table")
}

/// The characters `χ_k(g) = e^{2πikg/n}` of `Z_n`, labelled `chi{k}`.
pub fn z_n_characters(n: usize) -> Vec<(String, Vec<ComplexMatrix>)> {
    (0..n)
        .map(|k| {
            let mats = (0..n)
                .map(|g| {
                    let theta = 2.0 * PI * (k * g % n) as f64 / n as f64;
                    ComplexMatrix::from_element(1, 1, C64::from_polar(1.0, theta))
                })
                .collect();
            (format!("chi{k}"), mats)
        })
        .collect()
}

pub fn z_n_dual(n: usize) -> Result<QuantumSemigroup> {
    QuantumSemigroup::from_group_dual(&z_n_table(n), &z_n_characters(n), DEFAULT_TOL)
}

/// `S₃ = ⟨r, s | r³ = s² = 1, srs = r⁻¹⟩` with elements `r^k s^j` at
/// position `3j + k`.
pub fn s3_table() -> MultiplicationTable {
    let labels = ["e", "r", "r2", "s", "rs", "r2s"]
        .map(String::from)
        .to_vec();
    MultiplicationTable::from_fn(labels, |x, y| {
        let (a, b) = (x % 3, x / 3);
        let (c, d) = (y % 3, y / 3);
        let k = if b == 0 { (a + c) % 3 } else { (a + 3 - c) % 3 };
        3 * ((b + d) % 2) + k
    })
    .expect("closed")
}

/// Trivial, sign and the two-dimensional standard representation of S₃.
pub fn s3_irreps() -> Vec<(String, Vec<ComplexMatrix>)> {
    let c = |x: f64| C64::new(x, 0.0);
    let (cos, sin) = ((2.0 * PI / 3.0).cos(), (2.0 * PI / 3.0).sin());
    let rot = ComplexMatrix::from_row_slice(2, 2, &[c(cos), c(-sin), c(sin), c(cos)]);
    let refl = ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let mut trivial = Vec::new();
    let mut sign = Vec::new();
    let mut standard = Vec::new();
    for p in 0..6 {
        let (k, j) = (p % 3, p / 3);
        trivial.push(ComplexMatrix::from_element(1, 1, c(1.0)));
        sign.push(ComplexMatrix::from_element(
            1,
            1,
            c(if j == 0 { 1.0 } else { -1.0 }),
        ));
        let mut m = ComplexMatrix::identity(2, 2);
        for _ in 0..k {
            m = &m * &rot;
        }
        if j == 1 {
            m = &m * &refl;
        }
        standard.push(m);
    }
    vec![
        ("triv".to_string(), trivial),
        ("sign".to_string(), sign),
        ("std".to_string(), standard),
    ]
}

pub fn s3_classical() -> QuantumSemigroup {
    QuantumSemigroup::from_classical(&s3_table()).expect("valid table")
}

pub fn s3_dual() -> Result<QuantumSemigroup> {
    QuantumSemigroup::from_group_dual(&s3_table(), &s3_irreps(), DEFAULT_TOL)
}

fn letters(n: usize) -> Vec<String> {
    (0..n)
        .map(|k| ((b'x' + k as u8) as char).to_string())
        .collect()
}

/// `xy = x`.
pub fn left_zero_table(n: usize) -> MultiplicationTable {
    MultiplicationTable::from_fn(letters(n), |x, _| x).expect("closed")
}

/// `xy = y`.
pub fn right_zero_table(n: usize) -> MultiplicationTable {
    MultiplicationTable::from_fn(letters(n), |_, y| y).expect("closed")
}

pub fn left_zero(n: usize) -> QuantumSemigroup {
    QuantumSemigroup::from_classical(&left_zero_table(n)).expect("valid table")
}

pub fn right_zero(n: usize) -> QuantumSemigroup {
    QuantumSemigroup::from_classical(&right_zero_table(n)).expect("valid table")
}

/// A validated shipped semigroup and the side on which it has an invariant mean.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub qs: QuantumSemigroup,
    pub mean_side: Side,
}

/// The seven shipped fixtures, validated at the default tolerance.
pub fn fixtures() -> Vec<Fixture> {
    let validated = |qs: QuantumSemigroup| {
        qs.into_validated(DEFAULT_TOL)
            .expect("shipped fixture validates")
    };
    vec![
        Fixture {
            name: "z2",
            qs: validated(z_n(2)),
            mean_side: Side::Right,
        },
        Fixture {
            name: "z3",
            qs: validated(z_n(3)),
            mean_side: Side::Right,
        },
        Fixture {
            name: "z4",
            qs: validated(z_n(4)),
            mean_side: Side::Right,
        },
        Fixture {
            name: "s3_classical",
            qs: validated(s3_classical()),
            mean_side: Side::Right,
        },
        Fixture {
            name: "s3_dual",
            qs: s3_dual().expect("S3 irreps are complete"),
            mean_side: Side::Right,
        },
        Fixture {
            name: "leftzero2",
            qs: validated(left_zero(2)),
            mean_side: Side::Right,
        },
        Fixture {
            name: "rightzero2",
            qs: validated(right_zero(2)),
            mean_side: Side::Left,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_have_expected_structure() {
        assert!(z_n_table(4).is_group());
        let s3 = s3_table();
        assert!(s3.is_group());
        // non-abelian
        assert_ne!(s3.mul(1, 3), s3.mul(3, 1));
        assert!(left_zero_table(2).is_associative());
        assert!(!left_zero_table(2).is_group());
        assert!(right_zero_table(2).is_associative());
    }

    #[test]
    fn all_fixtures_validate() {
        let names: Vec<_> = fixtures().iter().map(|f| f.name).collect();
        assert_eq!(names.len(), 7);
    }
}
