//! The additive equation `Δ(F) = 1⊗F + F⊗1` and its stability.
//!
//! Given a right invariant mean `m` and any `f`, the element
//! `F = (m⊗̃ι)(Δf − f⊗1)` is additive and `‖F − f‖ ≤ ‖Δf − 1⊗f − f⊗1‖`.
//! With a left invariant mean the mirror `F = (ι⊗̃m)(Δf − 1⊗f)` is used.
//! Over a finite index system every element is bounded, so the membership
//! conditions on the intermediate two-variable functions hold trivially.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blockmap::{tilde_left, tilde_right};
use crate::coalgebra::{QuantumSemigroup, Side};
use crate::error::{Error, Result};
use crate::mean::{invariance_residual, State, INVARIANCE_TOL};
use crate::multimatrix::{MMElement, C64};
use crate::random::random_hermitian_element;

/// Tolerance for additivity and for the `‖F − f‖ ≤ δ` bound.
pub const ADDITIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct StabilizationReport {
    /// `δ = ‖Δ(f) − 1⊗f − f⊗1‖`.
    pub defect_norm: f64,
    /// The additive element `F`.
    pub correction: MMElement,
    /// `‖Δ(F) − 1⊗F − F⊗1‖`.
    pub additivity_residual: f64,
    /// `‖F − f‖`.
    pub distance: f64,
    pub bound_satisfied: bool,
    pub unital_delta: bool,
    pub side: Side,
}

/// `D = Δ(f) − 1⊗f − f⊗1` and `‖D‖`.
pub fn additive_defect(qs: &QuantumSemigroup, f: &MMElement) -> Result<(MMElement, f64)> {
    qs.require_validated()?;
    qs.index().ensure_same(f.index())?;
    let one = MMElement::unit(qs.index());
    let d = qs
        .coproduct(f)?
        .sub(&one.outer_tensor(f))?
        .sub(&f.outer_tensor(&one))?;
    let norm = d.sup_norm();
    Ok((d, norm))
}

/// Projects `f` onto the additive elements using an invariant mean on `side`.
pub fn hyers_ulam_correct(
    qs: &QuantumSemigroup,
    m: &State,
    f: &MMElement,
    side: Side,
) -> Result<StabilizationReport> {
    let residual = invariance_residual(qs, m, side)?;
    if residual >= INVARIANCE_TOL {
        return Err(Error::NotInvariant {
            side: side.as_str(),
            residual,
            tol: INVARIANCE_TOL,
        });
    }
    let (_, defect_norm) = additive_defect(qs, f)?;
    let index = qs.index();
    let one = MMElement::unit(index);
    let delta_f = qs.coproduct(f)?;
    let functional = m.as_functional();
    let correction = match side {
        Side::Right => {
            tilde_left(&functional, index).apply(&delta_f.sub(&f.outer_tensor(&one))?)?
        }
        Side::Left => tilde_right(index, &functional).apply(&delta_f.sub(&one.outer_tensor(f))?)?,
    };
    let (_, additivity_residual) = additive_defect(qs, &correction)?;
    let distance = correction.distance(f)?;
    Ok(StabilizationReport {
        defect_norm,
        additivity_residual,
        distance,
        bound_satisfied: distance <= defect_norm + ADDITIVITY_TOL
            && additivity_residual < ADDITIVITY_TOL,
        unital_delta: qs.is_unital().unwrap_or(false),
        correction,
        side,
    })
}

#[derive(Clone, Debug)]
pub struct GroupLike {
    /// `E = exp(F)`.
    pub element: MMElement,
    /// `‖Δ(E) − E⊗E‖` when `Δ` is unital, otherwise
    /// `‖Δ(E) − E⊗E − (Δ(1) − 1⊗1)‖`.
    pub residual: f64,
    pub unital_delta: bool,
}

/// Exponentiates an additive `F` and measures how group-like the result is.
///
/// `Δ(Fᵏ) = (F⊗1 + 1⊗F)ᵏ` for `k ≥ 1` but `Δ(F⁰) = Δ(1)`, so `Δ(exp F)`
/// equals `exp F ⊗ exp F` only up to the counterterm `Δ(1) − 1⊗1`.
pub fn grouplike_exp(qs: &QuantumSemigroup, f: &MMElement) -> Result<GroupLike> {
    let (_, defect) = additive_defect(qs, f)?;
    if defect >= ADDITIVITY_TOL {
        return Err(Error::NotAdditive {
            defect,
            tol: ADDITIVITY_TOL,
        });
    }
    let e = f.exp_blockwise();
    let unital = qs.is_unital().unwrap_or(false);
    let mut gap = qs.coproduct(&e)?.sub(&e.outer_tensor(&e))?;
    if !unital {
        let one = MMElement::unit(qs.index());
        let counter = qs.coproduct(&one)?.sub(&one.outer_tensor(&one))?;
        gap = gap.sub(&counter)?;
    }
    Ok(GroupLike {
        element: e,
        residual: gap.sup_norm(),
        unital_delta: unital,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentStats {
    pub seed: u64,
    pub trials: usize,
    pub amplitude: f64,
    /// Largest `‖F − f‖ / δ`; trials with `δ = 0` count as ratio 0 when
    /// `F = f` and as infinity otherwise.
    pub max_ratio: f64,
    pub max_residual: f64,
}

/// Random Hermitian element with sup-norm one (zero if the draw vanishes).
fn unit_noise<R: Rng>(qs: &QuantumSemigroup, rng: &mut R) -> MMElement {
    let noise = random_hermitian_element(qs.index(), rng);
    let norm = noise.sup_norm();
    if norm > 0.0 {
        noise.scale(C64::new(1.0 / norm, 0.0))
    } else {
        noise
    }
}

/// Runs [`hyers_ulam_correct`] on `f = amplitude · noise` for `trials`
/// random Hermitian noise draws. Trial `t` draws from ChaCha8 seeded with
/// `seed` on stream `t`, so results depend only on the inputs.
pub fn perturbation_experiment(
    qs: &QuantumSemigroup,
    m: &State,
    side: Side,
    seed: u64,
    trials: usize,
    amplitude: f64,
) -> Result<ExperimentStats> {
    let mut max_ratio: f64 = 0.0;
    let mut max_residual: f64 = 0.0;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let f = unit_noise(qs, &mut rng).scale(C64::new(amplitude, 0.0));
        let report = hyers_ulam_correct(qs, m, &f, side)?;
        let ratio = if report.defect_norm > 0.0 {
            report.distance / report.defect_norm
        } else if report.distance == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        max_ratio = max_ratio.max(ratio);
        max_residual = max_residual.max(report.additivity_residual);
    }
    Ok(ExperimentStats {
        seed,
        trials,
        amplitude,
        max_ratio,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::coalgebra::{Comultiplication, Provenance};
    use crate::mean::known_mean;
    use crate::multimatrix::{ComplexMatrix, IndexSystem};
    use crate::DEFAULT_TOL;
    use std::collections::BTreeMap;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn z2() -> (QuantumSemigroup, State, MMElement) {
        let qs = builtin::z_n(2).into_validated(DEFAULT_TOL).unwrap();
        let m = known_mean(&qs).unwrap();
        let f = MMElement::elem_unit(qs.index(), "1", 0, 0).unwrap();
        (qs, m, f)
    }

    #[test]
    fn defect_of_delta_one_on_z2() {
        let (qs, _, f) = z2();
        let (d, norm) = additive_defect(&qs, &f).unwrap();
        let values: Vec<f64> = d.blocks().iter().map(|b| b[(0, 0)].re).collect();
        assert_eq!(values, vec![0.0, 0.0, 0.0, -2.0]);
        assert_eq!(norm, 2.0);
        let (z, zn) = additive_defect(&qs, &MMElement::zeros(qs.index())).unwrap();
        assert_eq!((z.sup_norm(), zn), (0.0, 0.0));
    }

    #[test]
    fn correction_of_delta_one_on_z2() {
        let (qs, m, f) = z2();
        let r = hyers_ulam_correct(&qs, &m, &f, Side::Right).unwrap();
        assert!(r.correction.sup_norm() < 1e-15);
        assert!((r.distance - 1.0).abs() < 1e-15);
        assert_eq!(r.defect_norm, 2.0);
        assert!(r.bound_satisfied);
        assert!(r.unital_delta);
    }

    #[test]
    fn additive_input_is_fixed() {
        let (qs, m, _) = z2();
        let zero = MMElement::zeros(qs.index());
        let r = hyers_ulam_correct(&qs, &m, &zero, Side::Right).unwrap();
        assert_eq!(r.correction.sup_norm(), 0.0);
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn non_invariant_mean_rejected() {
        let (qs, _, f) = z2();
        let skewed = State::point_mass(qs.index(), "0").unwrap();
        assert!(matches!(
            hyers_ulam_correct(&qs, &skewed, &f, Side::Right),
            Err(Error::NotInvariant { .. })
        ));
    }

    #[test]
    fn left_variant_on_right_zero() {
        let qs = builtin::right_zero(2).into_validated(DEFAULT_TOL).unwrap();
        let m = State::normalized_identity(qs.index());
        let f = MMElement::elem_unit(qs.index(), "x", 0, 0).unwrap();
        let r = hyers_ulam_correct(&qs, &m, &f, Side::Left).unwrap();
        assert!(r.bound_satisfied);
        assert!(r.additivity_residual < 1e-12);
    }

    #[test]
    fn grouplike_of_zero() {
        let (qs, _, f) = z2();
        let g = grouplike_exp(&qs, &MMElement::zeros(qs.index())).unwrap();
        assert!(g.element.distance(&MMElement::unit(qs.index())).unwrap() < 1e-15);
        assert!(g.residual < 1e-12);
        assert!(g.unital_delta);
        assert!(matches!(
            grouplike_exp(&qs, &f),
            Err(Error::NotAdditive { .. })
        ));
    }

    #[test]
    fn additive_scalars_vanish_on_z2() {
        // Δ(F) = 1⊗F + F⊗1 as a 4×2 linear system in (F(0), F(1)).
        let (qs, _, _) = z2();
        let basis: Vec<MMElement> = ["0", "1"]
            .iter()
            .map(|l| MMElement::elem_unit(qs.index(), l, 0, 0).unwrap())
            .collect();
        let mut system = ComplexMatrix::zeros(4, 2);
        for (k, e) in basis.iter().enumerate() {
            let (d, _) = additive_defect(&qs, e).unwrap();
            for (r, block) in d.blocks().iter().enumerate() {
                system[(r, k)] = block[(0, 0)];
            }
        }
        assert_eq!(system.rank(1e-12), 2);
    }

    #[test]
    fn non_unital_counterterm() {
        // a·a = a, every other product undefined: coassociative, Δ(1) ≠ 1⊗1.
        let index = IndexSystem::new([("a", 1), ("b", 1)]).unwrap();
        let mut blocks = BTreeMap::new();
        blocks.insert((0, 0, 0), ComplexMatrix::from_element(1, 1, c(1.0)));
        let qs = QuantumSemigroup::new(
            Comultiplication::new(&index, blocks).unwrap(),
            Provenance::Raw,
        )
        .into_validated(DEFAULT_TOL)
        .unwrap();
        assert_eq!(qs.is_unital(), Some(false));
        let g = grouplike_exp(&qs, &MMElement::zeros(&index)).unwrap();
        assert!(!g.unital_delta);
        assert!(g.residual < 1e-15);
    }

    #[test]
    fn experiment_amplitude_zero_and_determinism() {
        let (qs, m, _) = z2();
        let zero = perturbation_experiment(&qs, &m, Side::Right, 3, 10, 0.0).unwrap();
        assert_eq!(zero.max_ratio, 0.0);
        let a = perturbation_experiment(&qs, &m, Side::Right, 42, 100, 1.0).unwrap();
        let b = perturbation_experiment(&qs, &m, Side::Right, 42, 100, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(a.max_ratio <= 1.0 + 1e-8);
    }
}
