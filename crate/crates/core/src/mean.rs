//! States on `F(I)` and invariant means.
//!
//! A state is stored by density blocks: `m(f) = Σ_γ tr(ρ_γ f(γ))` with each
//! `ρ_γ` Hermitian positive semidefinite and `Σ_γ tr ρ_γ = 1`. A state is a
//! right invariant mean when `(m⊗̃ι)Δ(f) = m(f)·1` for all `f`, and a left
//! invariant mean when `(ι⊗̃m)Δ(f) = m(f)·1`.
//!
//! Invariance is linear in the densities, so the invariant states are the
//! intersection of an affine subspace with the PSD cone. [`solve_mean`]
//! searches that intersection with Dykstra's alternating projections.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::blockmap::{compose, tilde_left, tilde_right, vec_of, BlockMap};
use crate::coalgebra::{Provenance, QuantumSemigroup, Side};
use crate::error::{Error, Result};
use crate::multimatrix::{ComplexMatrix, IndexSystem, MMElement, C64};

/// Tolerance on the state invariants (Hermiticity, positivity, trace).
pub const STATE_TOL: f64 = 1e-10;

/// Invariance a mean must reach before the slicing and stabilization checks accept it.
pub const INVARIANCE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    index: IndexSystem,
    densities: Vec<ComplexMatrix>,
}

impl State {
    /// Checks Hermiticity, positivity and normalization of the densities.
    pub fn new(index: &IndexSystem, densities: Vec<ComplexMatrix>) -> Result<Self> {
        if densities.len() != index.len() {
            return Err(Error::InvalidState(format!(
                "expected {} densities, found {}",
                index.len(),
                densities.len()
            )));
        }
        let mut trace = C64::new(0.0, 0.0);
        for (k, rho) in densities.iter().enumerate() {
            let n = index.dim(k);
            if rho.shape() != (n, n) {
                return Err(Error::InvalidState(format!(
                    "density `{}` has shape {:?}, expected {n}x{n}",
                    index.label(k),
                    rho.shape()
                )));
            }
            let herm = rho
                .iter()
                .zip(rho.adjoint().iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if herm > STATE_TOL {
                return Err(Error::InvalidState(format!(
                    "density `{}` is not Hermitian ({herm:e})",
                    index.label(k)
                )));
            }
            let hermitian = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
            let min_eig = SymmetricEigen::new(hermitian).eigenvalues.min();
            if min_eig < -STATE_TOL {
                return Err(Error::InvalidState(format!(
                    "density `{}` has negative eigenvalue {min_eig:e}",
                    index.label(k)
                )));
            }
            trace += rho.trace();
        }
        if (trace - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "total trace is {trace}, expected 1"
            )));
        }
        Ok(Self {
            index: index.clone(),
            densities,
        })
    }

    /// `ρ_γ = 1_γ / Σ_γ n(γ)`, the normalized identity.
    pub fn normalized_identity(index: &IndexSystem) -> Self {
        let total: usize = index.dims().iter().sum();
        let densities = index
            .dims()
            .iter()
            .map(|&n| ComplexMatrix::identity(n, n) / C64::new(total as f64, 0.0))
            .collect();
        Self {
            index: index.clone(),
            densities,
        }
    }

    /// Point mass at one label of dimension one.
    pub fn point_mass(index: &IndexSystem, label: &str) -> Result<Self> {
        let pos = index.position(label)?;
        let densities = (0..index.len())
            .map(|k| {
                let n = index.dim(k);
                let mut m = ComplexMatrix::zeros(n, n);
                if k == pos {
                    m[(0, 0)] = C64::new(1.0, 0.0);
                }
                m
            })
            .collect();
        Self::new(index, densities)
    }

    pub fn index(&self) -> &IndexSystem {
        &self.index
    }

    pub fn densities(&self) -> &[ComplexMatrix] {
        &self.densities
    }

    /// `m(f) = Σ_γ tr(ρ_γ f(γ))`.
    pub fn evaluate(&self, f: &MMElement) -> Result<C64> {
        self.index.ensure_same(f.index())?;
        Ok(self
            .densities
            .iter()
            .zip(f.blocks())
            .map(|(rho, x)| (rho * x).trace())
            .sum())
    }

    /// The state as a functional block map, ready for `⊗̃` extensions.
    pub fn as_functional(&self) -> BlockMap {
        BlockMap::functional(&self.index, &self.densities)
            .expect("densities follow the index system")
    }

    /// Largest entrywise distance between densities.
    pub fn max_density_diff(&self, other: &State) -> Result<f64> {
        self.index.ensure_same(&other.index)?;
        Ok(self
            .densities
            .iter()
            .zip(&other.densities)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max))
    }
}

/// `(n⊗̃ι)` (side right) or `(ι⊗̃n)` (side left) on `F(I×I)`, landing in `F(I)`.
fn slice_map(index: &IndexSystem, functional: &BlockMap, side: Side) -> BlockMap {
    match side {
        Side::Right => tilde_left(functional, index),
        Side::Left => tilde_right(index, functional),
    }
}

/// The map `f ↦ (n⊗̃ι)Δ(f)` (or its left mirror) on `F(I)`.
fn averaged_coproduct(
    qs: &QuantumSemigroup,
    functional: &BlockMap,
    side: Side,
) -> Result<BlockMap> {
    compose(
        &slice_map(qs.index(), functional, side),
        qs.delta().as_map(),
    )
}

/// `max_e ‖(m⊗̃ι)Δ(e) − m(e)·1‖` over the matrix units `e` (side right),
/// or with `ι⊗̃m` (side left).
pub fn invariance_residual(qs: &QuantumSemigroup, m: &State, side: Side) -> Result<f64> {
    qs.require_validated()?;
    qs.index().ensure_same(m.index())?;
    let averaged = averaged_coproduct(qs, &m.as_functional(), side)?;
    let one = MMElement::unit(qs.index());
    let mut worst: f64 = 0.0;
    for (_, _, _, e) in MMElement::matrix_units(qs.index()) {
        let lhs = averaged.apply(&e)?;
        let rhs = one.scale(m.evaluate(&e)?);
        worst = worst.max(lhs.distance(&rhs)?);
    }
    Ok(worst)
}

/// `(m⊗̃ι)(h)` for `h` over `I × J`, landing in `F(J)`.
pub fn apply_left(m: &State, h: &MMElement) -> Result<MMElement> {
    let atoms = h.index().atoms();
    let k = m.index().arity();
    if atoms.len() <= k {
        return Err(Error::IndexMismatch {
            expected: format!("{} × J", m.index()),
            found: h.index().to_string(),
        });
    }
    let rest: Vec<&IndexSystem> = atoms.iter().skip(k).collect();
    let j = IndexSystem::product(&rest);
    tilde_left(&m.as_functional(), &j).apply(h)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: crate::DEFAULT_TOL,
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub status: String,
    /// Invariance residual of the returned (or best) normalized iterate.
    pub residual: f64,
    /// `‖A x − b‖₂` of the affine invariance system at the last iterate.
    pub affine_residual: f64,
    pub iterations: usize,
    /// How infeasibility was concluded; `None` on success. Both
    /// certificates are heuristic, not dual certificates.
    pub certificate: Option<String>,
    pub side: Side,
    pub tol: f64,
}

#[derive(Clone, Debug)]
pub enum SolveOutcome {
    Found(State, SolverReport),
    Infeasible(SolverReport),
}

impl SolveOutcome {
    pub fn report(&self) -> &SolverReport {
        match self {
            SolveOutcome::Found(_, r) | SolveOutcome::Infeasible(r) => r,
        }
    }

    pub fn state(&self) -> Option<&State> {
        match self {
            SolveOutcome::Found(s, _) => Some(s),
            SolveOutcome::Infeasible(_) => None,
        }
    }
}

/// Offsets of each density block in the stacked vectorization.
fn offsets(index: &IndexSystem) -> Vec<usize> {
    index
        .dims()
        .iter()
        .scan(0, |acc, &d| {
            let here = *acc;
            *acc += d * d;
            Some(here)
        })
        .collect()
}

fn unstack(index: &IndexSystem, x: &DVector<C64>) -> Vec<ComplexMatrix> {
    offsets(index)
        .iter()
        .zip(index.dims())
        .map(|(&o, &n)| ComplexMatrix::from_column_slice(n, n, &x.as_slice()[o..o + n * n]))
        .collect()
}

fn stack(index: &IndexSystem, densities: &[ComplexMatrix]) -> DVector<C64> {
    let mut x = DVector::zeros(index.algebra_dim());
    for (&o, rho) in offsets(index).iter().zip(densities) {
        x.rows_mut(o, rho.len()).copy_from(&vec_of(rho));
    }
    x
}

/// The linear system `A x = b` whose solutions are the density vectors of
/// normalized invariant functionals: one row per entry of
/// `(n⊗̃ι)Δ(e) − n(e)·1` over all matrix units `e`, plus the trace row.
fn invariance_system(qs: &QuantumSemigroup, side: Side) -> Result<(DMatrix<C64>, DVector<C64>)> {
    let index = qs.index();
    let dim = index.algebra_dim();
    let units: Vec<MMElement> = MMElement::matrix_units(index)
        .map(|(_, _, _, e)| e)
        .collect();
    let rows_per_unit = dim;
    let rows = units.len() * rows_per_unit + 1;
    let mut a = DMatrix::zeros(rows, dim);
    let one = MMElement::unit(index);
    for col in 0..dim {
        let mut basis = DVector::zeros(dim);
        basis[col] = C64::new(1.0, 0.0);
        let densities = unstack(index, &basis);
        let functional = BlockMap::functional(index, &densities)?;
        let averaged = averaged_coproduct(qs, &functional, side)?;
        for (u, e) in units.iter().enumerate() {
            let value = functional.apply_scalar(e)?;
            let r = averaged.apply(e)?.sub(&one.scale(value))?;
            let v = stack(index, r.blocks());
            a.view_mut((u * rows_per_unit, col), (rows_per_unit, 1))
                .copy_from(&v);
        }
        // tr ρ_γ picks the diagonal entries
        let (o, n) = (offsets(index), index.dims());
        for (k, &nk) in n.iter().enumerate() {
            for i in 0..nk {
                if o[k] + i * nk + i == col {
                    a[(rows - 1, col)] = C64::new(1.0, 0.0);
                }
            }
        }
    }
    let mut b = DVector::zeros(rows);
    b[rows - 1] = C64::new(1.0, 0.0);
    Ok((a, b))
}

fn project_psd(index: &IndexSystem, x: &DVector<C64>) -> DVector<C64> {
    let blocks: Vec<ComplexMatrix> = unstack(index, x)
        .into_iter()
        .map(|m| {
            let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            let eig = SymmetricEigen::new(h);
            let clipped = eig.eigenvalues.map(|l| C64::new(l.max(0.0), 0.0));
            let v = &eig.eigenvectors;
            v * DMatrix::from_diagonal(&clipped) * v.adjoint()
        })
        .collect();
    stack(index, &blocks)
}

/// Hermitian part, negative eigenvalues clipped, rescaled to unit trace.
fn normalize_to_state(index: &IndexSystem, x: &DVector<C64>) -> Option<State> {
    let psd = project_psd(index, x);
    let blocks = unstack(index, &psd);
    let trace: f64 = blocks.iter().map(|m| m.trace().re).sum();
    if trace <= 0.0 {
        return None;
    }
    let blocks = blocks
        .into_iter()
        .map(|m| {
            let m = m / C64::new(trace, 0.0);
            (&m + m.adjoint()) * C64::new(0.5, 0.0)
        })
        .collect();
    State::new(index, blocks).ok()
}

/// Searches for an invariant mean by Dykstra's alternating projections
/// between the affine invariance set and the PSD cone, starting from the
/// normalized identity. See [`solve_mean_from`].
pub fn solve_mean(
    qs: &QuantumSemigroup,
    side: Side,
    options: SolverOptions,
) -> Result<SolveOutcome> {
    solve_mean_from(qs, side, options, &State::normalized_identity(qs.index()))
}

/// Dykstra's projections from a given starting state.
///
/// Success once the invariance residual of the normalized iterate is below
/// `tol`. Every 1000 iterations the affine residual is compared with the
/// previous checkpoint; when it exceeds `tol·10³` and has dropped by less
/// than `1e-14`, the search stops as infeasible. An inconsistent affine
/// system is handled by projecting onto its least-squares solution set,
/// whose residual then stagnates at once.
pub fn solve_mean_from(
    qs: &QuantumSemigroup,
    side: Side,
    options: SolverOptions,
    start: &State,
) -> Result<SolveOutcome> {
    qs.require_validated()?;
    qs.index().ensure_same(start.index())?;
    let index = qs.index();
    let tol = options.tol;
    let (a, b) = invariance_system(qs, side)?;
    let pinv = a
        .clone()
        .pseudo_inverse(1e-10)
        .map_err(|e| Error::Format(format!("pseudo-inverse failed: {e}")))?;
    let project_affine = |z: &DVector<C64>| -> DVector<C64> { z - &pinv * (&a * z - &b) };
    let affine_residual = |z: &DVector<C64>| (&a * z - &b).norm();

    let report =
        |status: &str, residual: f64, affine: f64, iterations: usize, certificate: Option<&str>| {
            SolverReport {
                status: status.to_string(),
                residual,
                affine_residual: affine,
                iterations,
                certificate: certificate.map(String::from),
                side,
                tol,
            }
        };

    let mut x = stack(index, start.densities());
    let mut p = DVector::zeros(x.len());
    let mut q = DVector::zeros(x.len());
    let mut checkpoint = affine_residual(&x);
    let mut accept_below = tol * 0.1;
    let mut best: Option<(f64, DVector<C64>)> = None;

    for iter in 1..=options.max_iter {
        let y = project_affine(&(&x + &p));
        p = &x + &p - &y;
        let next = project_psd(index, &(&y + &q));
        q = &y + &q - &next;
        x = next;

        let r = affine_residual(&x);
        if best.as_ref().is_none_or(|(br, _)| r < *br) {
            best = Some((r, x.clone()));
        }
        if r < accept_below {
            if let Some(state) = normalize_to_state(index, &x) {
                let residual = invariance_residual(qs, &state, side)?;
                if residual < tol {
                    return Ok(SolveOutcome::Found(
                        state,
                        report("ok", residual, r, iter, None),
                    ));
                }
            }
            accept_below *= 0.1;
        }
        if iter % 1000 == 0 {
            if r > tol * 1e3 && checkpoint - r < 1e-14 {
                let residual = best_residual(qs, index, side, &best)?;
                return Ok(SolveOutcome::Infeasible(report(
                    "infeasible",
                    residual,
                    r,
                    iter,
                    Some("stagnation"),
                )));
            }
            checkpoint = r;
        }
    }
    let residual = best_residual(qs, index, side, &best)?;
    Ok(SolveOutcome::Infeasible(report(
        "infeasible",
        residual,
        affine_residual(&x),
        options.max_iter,
        Some("iteration-limit"),
    )))
}

fn best_residual(
    qs: &QuantumSemigroup,
    index: &IndexSystem,
    side: Side,
    best: &Option<(f64, DVector<C64>)>,
) -> Result<f64> {
    match best
        .as_ref()
        .and_then(|(_, x)| normalize_to_state(index, x))
    {
        Some(state) => invariance_residual(qs, &state, side),
        None => Ok(f64::INFINITY),
    }
}

/// Closed-form means: the uniform (Haar) state for classical groups and
/// `ρ_π = (d_π/|G|)·1_π` for group duals. `None` otherwise.
pub fn known_mean(qs: &QuantumSemigroup) -> Option<State> {
    let index = qs.index();
    match qs.provenance() {
        Provenance::Classical => {
            let table = qs.classical_table()?;
            if !table.is_group() {
                return None;
            }
            let w = C64::new(1.0 / index.len() as f64, 0.0);
            State::new(
                index,
                (0..index.len())
                    .map(|_| ComplexMatrix::from_element(1, 1, w))
                    .collect(),
            )
            .ok()
        }
        Provenance::GroupDual => {
            let order = qs.total_dimension() as f64;
            let densities = index
                .dims()
                .iter()
                .map(|&d| ComplexMatrix::identity(d, d) * C64::new(d as f64 / order, 0.0))
                .collect();
            State::new(index, densities).ok()
        }
        Provenance::Raw => None,
    }
}

fn require_invariant(qs: &QuantumSemigroup, m: &State, side: Side) -> Result<()> {
    let residual = invariance_residual(qs, m, side)?;
    if residual < INVARIANCE_TOL {
        Ok(())
    } else {
        Err(Error::NotInvariant {
            side: side.as_str(),
            residual,
            tol: INVARIANCE_TOL,
        })
    }
}

/// `‖(m⊗̃ι⊗̃ι)(Δ⊗̃ι)(f) − 1⊗[(m⊗̃ι)(f)]‖` for `f` over `I×I` and a right
/// invariant mean `m`; with side left, the mirror
/// `‖(ι⊗̃ι⊗̃m)(ι⊗̃Δ)(f) − [(ι⊗̃m)(f)]⊗1‖` for a left invariant mean.
pub fn mean_slice_residual(
    qs: &QuantumSemigroup,
    m: &State,
    side: Side,
    f: &MMElement,
) -> Result<f64> {
    require_invariant(qs, m, side)?;
    let index = qs.index();
    let pair = IndexSystem::product(&[index, index]);
    pair.ensure_same(f.index())?;
    let functional = m.as_functional();
    let one = MMElement::unit(index);
    match side {
        Side::Right => {
            let lifted = qs.delta_tilde(Side::Left)?.apply(f)?;
            let lhs = tilde_left(&functional, &pair).apply(&lifted)?;
            let rhs = one.outer_tensor(&tilde_left(&functional, index).apply(f)?);
            lhs.distance(&rhs)
        }
        Side::Left => {
            let lifted = qs.delta_tilde(Side::Right)?.apply(f)?;
            let lhs = tilde_right(&pair, &functional).apply(&lifted)?;
            let rhs = tilde_right(index, &functional).apply(f)?.outer_tensor(&one);
            lhs.distance(&rhs)
        }
    }
}

/// `‖Δ((n⊗̃ι)(f)) − (n⊗̃ι⊗̃ι)(ι⊗̃Δ)(f)‖` for any linear functional `n`.
///
/// Over a finite index system every functional is already defined on all of
/// `F(I)`, so no extension step is needed.
pub fn functional_slice_residual(
    qs: &QuantumSemigroup,
    n: &BlockMap,
    f: &MMElement,
) -> Result<f64> {
    let index = qs.index();
    if !n.is_functional() {
        return Err(Error::IndexMismatch {
            expected: IndexSystem::scalar().to_string(),
            found: n.codomain().to_string(),
        });
    }
    index.ensure_same(n.domain())?;
    let pair = IndexSystem::product(&[index, index]);
    pair.ensure_same(f.index())?;
    let lhs = qs.coproduct(&tilde_left(n, index).apply(f)?)?;
    let lifted = qs.delta_tilde(Side::Right)?.apply(f)?;
    let rhs = tilde_left(n, &pair).apply(&lifted)?;
    lhs.distance(&rhs)
}
