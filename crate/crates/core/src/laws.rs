//! Randomized sweeps of the `⊗̃` laws over a quantum semigroup.
//!
//! Each draw samples a random linear map `T: F(I) → F(J)` into a small
//! auxiliary system `J`, random elements, and uses `Δ` (alternating with a
//! character of a one-dimensional label, when there is one) as the verified
//! *-homomorphism that P3 and P4 require.
//!
//! P2 and P5 assert that extensions land in the bounded subspaces
//! `F_{b:1}` / `F_{b:2}`. Over finite index systems those subspaces are the
//! whole algebra, so the sweep can only confirm that every output is
//! well-formed: right index system and finite entries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blockmap::{
    check_p0, check_p0_right, check_p1, check_p1_left, check_p3, check_p4, tilde_left, BlockMap,
};
use crate::coalgebra::QuantumSemigroup;
use crate::error::Result;
use crate::mean::State;
use crate::multimatrix::{IndexSystem, MMElement};
use crate::random::{random_block_map, random_element};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub draws: usize,
    pub seed: u64,
    pub p0: f64,
    pub p1: f64,
    pub p3: f64,
    pub p4: f64,
    /// Every extension output had the expected index system and finite entries.
    pub p2_well_formed: bool,
    pub p5_well_formed: bool,
    pub tol: f64,
    pub passed: bool,
}

fn well_formed(x: &MMElement, index: &IndexSystem) -> bool {
    x.index() == index
        && x.blocks()
            .iter()
            .all(|b| b.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
}

/// The auxiliary system the random maps land in.
pub fn auxiliary_index() -> IndexSystem {
    IndexSystem::new([("u", 2), ("v", 1)]).expect("valid")
}

/// Runs `draws` randomized draws of P0, P1, P3 and P4 on a validated semigroup.
pub fn sweep(qs: &QuantumSemigroup, draws: usize, seed: u64, tol: f64) -> Result<LawReport> {
    let index = qs.index();
    let aux = auxiliary_index();
    let delta = qs.delta_hom()?;
    let characters: Vec<BlockMap> = (0..index.len())
        .filter(|&k| index.dim(k) == 1)
        .map(|k| {
            State::point_mass(index, index.label(k))
                .expect("dimension-one label")
                .as_functional()
                .certify_star_hom(tol)
        })
        .filter_map(|r| r.ok())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut p0, mut p1, mut p3, mut p4) = (0f64, 0f64, 0f64, 0f64);
    let (mut p2_ok, mut p5_ok) = (true, true);

    for draw in 0..draws {
        let t = random_block_map(index, &aux, &mut rng);
        let f = random_element(index, &mut rng);
        let g = random_element(&aux, &mut rng);
        p0 = p0
            .max(check_p0(&t, &f, &g)?)
            .max(check_p0_right(&t, &g, &f)?);

        let middle = random_element(&IndexSystem::product(&[&aux, index, &aux]), &mut rng);
        let left = random_element(&IndexSystem::product(&[index, &aux, &aux]), &mut rng);
        p1 = p1
            .max(check_p1(&aux, &t, &aux, &middle)?)
            .max(check_p1_left(&t, &aux, &aux, &left)?);

        let hom = if draw % 2 == 1 && !characters.is_empty() {
            &characters[rng.random_range(0..characters.len())]
        } else {
            &delta
        };
        let h = random_element(&IndexSystem::product(&[index, &aux]), &mut rng);
        p3 = p3.max(check_p3(hom, &h)?);

        let pair = random_element(&IndexSystem::product(&[index, index]), &mut rng);
        let t2 = random_block_map(index, &aux, &mut rng);
        p4 = p4
            .max(check_p4(hom, &t2, &pair)?)
            .max(check_p4(&t2, hom, &pair)?);

        let extended = tilde_left(&t, &aux).apply(&random_element(
            &IndexSystem::product(&[index, &aux]),
            &mut rng,
        ))?;
        p2_ok &= well_formed(&extended, &IndexSystem::product(&[&aux, &aux]));
        let lifted = tilde_left(hom, &aux).apply(&h)?;
        p5_ok &= well_formed(&lifted, &IndexSystem::product(&[hom.codomain(), &aux]));
    }
    let passed = p0 < tol && p1 < tol && p3 < tol && p4 < tol && p2_ok && p5_ok;
    Ok(LawReport {
        draws,
        seed,
        p0,
        p1,
        p3,
        p4,
        p2_well_formed: p2_ok,
        p5_well_formed: p5_ok,
        tol,
        passed,
    })
}
