//! Discrete quantum semigroups `(I, Δ)` over finite index systems.
//!
//! `Δ` is stored as a [`BlockMap`] from `I` to `I×I`; its block at
//! `(α, (β,γ))` is the vectorized `Δ^α_{β,γ}: M_α → M_β ⊗ M_γ`.
//!
//! A comultiplication must satisfy, besides each block being a
//! *-homomorphism,
//! - (i) `Δ^α_{β,γ}(1_α) Δ^{α′}_{β,γ}(1_{α′}) = 0` for `α ≠ α′`;
//! - (ii) coassociativity `(Δ⊗̃ι)Δ = (ι⊗̃Δ)Δ`, equivalently
//!   `Σ_ω (Δ^ω_{α,β}⊗ι) Δ^λ_{ω,γ} = Σ_ω (ι⊗Δ^ω_{β,γ}) Δ^λ_{α,ω}`.
//!
//! Neither unitality (`Δ(1) = 1⊗1`) nor injectivity is required; both are
//! computed during validation and kept as derived attributes.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::blockmap::{star_hom_residual, tilde_left, tilde_right, vec_of, BlockMap, NotStarHom};
use crate::error::{Error, Result};
use crate::multimatrix::{
    kron, matrix_unit, spectral_norm, ComplexMatrix, IndexSystem, MMElement, C64,
};

/// Which side an invariant mean (or a `⊗̃` extension of `Δ`) acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(Error::Format(format!("unknown side `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Classical,
    GroupDual,
    Raw,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Classical => "classical",
            Provenance::GroupDual => "group-dual",
            Provenance::Raw => "raw",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Provenance::Classical),
            "group-dual" => Ok(Provenance::GroupDual),
            "raw" => Ok(Provenance::Raw),
            other => Err(Error::Format(format!("unknown provenance `{other}`"))),
        }
    }
}

/// A finite binary operation `labels × labels → labels`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicationTable {
    labels: Vec<String>,
    product: Vec<Vec<usize>>,
}

impl MultiplicationTable {
    /// Builds a table from `(x, y) → xy` entries. Every pair must be present
    /// and every product must be one of the labels.
    pub fn new(labels: Vec<String>, entries: &HashMap<(String, String), String>) -> Result<Self> {
        let pos: HashMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(k, l)| (l.as_str(), k))
            .collect();
        if pos.len() != labels.len() || labels.is_empty() {
            return Err(Error::InvalidTable(
                "labels must be non-empty and distinct".into(),
            ));
        }
        let mut product = vec![vec![0; labels.len()]; labels.len()];
        for (x, row) in labels.iter().zip(product.iter_mut()) {
            for (y, slot) in labels.iter().zip(row.iter_mut()) {
                let z = entries
                    .get(&(x.clone(), y.clone()))
                    .ok_or_else(|| Error::InvalidTable(format!("missing entry for ({x}, {y})")))?;
                *slot = *pos.get(z.as_str()).ok_or_else(|| {
                    Error::InvalidTable(format!("product {x}·{y} = {z} is not a label"))
                })?;
            }
        }
        if entries.len() != labels.len() * labels.len() {
            return Err(Error::InvalidTable(
                "entries reference unknown labels".into(),
            ));
        }
        Ok(Self { labels, product })
    }

    /// Builds a table from a product function on positions.
    pub fn from_fn(labels: Vec<String>, f: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let n = labels.len();
        let product: Vec<Vec<usize>> = (0..n).map(|x| (0..n).map(|y| f(x, y)).collect()).collect();
        if product.iter().flatten().any(|&z| z >= n) {
            return Err(Error::InvalidTable("product outside the label set".into()));
        }
        Ok(Self { labels, product })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.product[x][y]
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize) {
        self.product[x][y] = z;
    }

    pub fn is_associative(&self) -> bool {
        let n = self.len();
        (0..n).all(|x| {
            (0..n)
                .all(|y| (0..n).all(|z| self.mul(self.mul(x, y), z) == self.mul(x, self.mul(y, z))))
        })
    }

    pub fn identity(&self) -> Option<usize> {
        (0..self.len())
            .find(|&e| (0..self.len()).all(|x| self.mul(e, x) == x && self.mul(x, e) == x))
    }

    pub fn inverse(&self, x: usize) -> Option<usize> {
        let e = self.identity()?;
        (0..self.len()).find(|&y| self.mul(x, y) == e && self.mul(y, x) == e)
    }

    pub fn is_group(&self) -> bool {
        self.is_associative()
            && self.identity().is_some()
            && (0..self.len()).all(|x| self.inverse(x).is_some())
    }

    pub fn entries(&self) -> BTreeMap<(String, String), String> {
        let mut out = BTreeMap::new();
        for x in 0..self.len() {
            for y in 0..self.len() {
                out.insert(
                    (self.labels[x].clone(), self.labels[y].clone()),
                    self.labels[self.mul(x, y)].clone(),
                );
            }
        }
        out
    }
}

/// The family `Δ^α_{β,γ}`, stored as a block map `F(I) → F(I×I)`.
#[derive(Clone, Debug)]
pub struct Comultiplication {
    index: IndexSystem,
    map: BlockMap,
}

impl Comultiplication {
    /// Builds `Δ` from `(α, β, γ)`-keyed blocks of shape `(n_β n_γ)² × n_α²`.
    pub fn new(
        index: &IndexSystem,
        blocks: BTreeMap<(usize, usize, usize), ComplexMatrix>,
    ) -> Result<Self> {
        if index.arity() != 1 {
            return Err(Error::InvalidIndexSystem(
                "a comultiplication needs an atomic index system".into(),
            ));
        }
        let pair = IndexSystem::product(&[index, index]);
        let n = index.len();
        let mut keyed = BTreeMap::new();
        for ((a, b, g), m) in blocks {
            if a >= n || b >= n || g >= n {
                return Err(Error::Format(format!(
                    "Δ block key ({a}, {b}, {g}) out of range"
                )));
            }
            keyed.insert((a, b * n + g), m);
        }
        let map = BlockMap::new(index, &pair, keyed)?;
        Ok(Self {
            index: index.clone(),
            map,
        })
    }

    pub fn from_map(map: BlockMap) -> Result<Self> {
        let index = map.domain().clone();
        IndexSystem::product(&[&index, &index]).ensure_same(map.codomain())?;
        Ok(Self { index, map })
    }

    pub fn index(&self) -> &IndexSystem {
        &self.index
    }

    pub fn as_map(&self) -> &BlockMap {
        &self.map
    }

    /// `Δ^α_{β,γ}` by positions, `None` if zero.
    pub fn block(&self, alpha: usize, beta: usize, gamma: usize) -> Option<&ComplexMatrix> {
        self.map.block(alpha, beta * self.index.len() + gamma)
    }

    /// Stored blocks as `((α, β, γ), matrix)`.
    pub fn blocks(&self) -> impl Iterator<Item = ((usize, usize, usize), &ComplexMatrix)> {
        let n = self.index.len();
        self.map
            .blocks()
            .iter()
            .map(move |(&(a, bg), m)| ((a, bg / n, bg % n), m))
    }

    /// `Δ^α_{β,γ}(x)`.
    pub fn apply_block(
        &self,
        alpha: usize,
        beta: usize,
        gamma: usize,
        x: &ComplexMatrix,
    ) -> ComplexMatrix {
        self.map
            .apply_block(alpha, beta * self.index.len() + gamma, x)
    }

    /// Same comultiplication with one block entry shifted; used to probe
    /// how sensitive validation is to corruption.
    pub fn perturbed(
        &self,
        alpha: usize,
        beta: usize,
        gamma: usize,
        row: usize,
        col: usize,
        by: C64,
    ) -> Result<Self> {
        let n = self.index.len();
        let mut blocks = self.map.blocks().clone();
        let (na, nbg) = (
            self.index.dim(alpha),
            self.index.dim(beta) * self.index.dim(gamma),
        );
        let entry = blocks
            .entry((alpha, beta * n + gamma))
            .or_insert_with(|| ComplexMatrix::zeros(nbg * nbg, na * na));
        if row >= entry.nrows() || col >= entry.ncols() {
            return Err(Error::Format("perturbation outside the block".into()));
        }
        entry[(row, col)] += by;
        let map = BlockMap::new(self.map.domain(), self.map.codomain(), blocks)?;
        Ok(Self {
            index: self.index.clone(),
            map,
        })
    }
}

/// Residuals from [`QuantumSemigroup::validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Largest *-homomorphism residual over the individual blocks.
    pub hom_residual: f64,
    /// Axiom (i): largest `‖Δ^α_{β,γ}(1)Δ^{α′}_{β,γ}(1)‖` over `α ≠ α′`.
    pub orthogonality_residual: f64,
    /// Axiom (ii) through the `⊗̃` extensions, over all matrix units.
    pub coassociativity_residual: f64,
    /// Axiom (ii) through the blockwise sums over `ω`.
    pub coassociativity_blockwise_residual: f64,
    /// Largest disagreement between the two coassociativity routes.
    pub route_discrepancy: f64,
    /// `‖Δ(1) − 1⊗1‖`.
    pub unital_residual: f64,
    pub unital: bool,
    pub injective: bool,
    pub tol: f64,
    pub passed: bool,
}

impl ValidationReport {
    /// Names of the checks that failed.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.hom_residual >= self.tol {
            out.push("homomorphism");
        }
        if self.orthogonality_residual >= self.tol {
            out.push("axiom (i)");
        }
        if self
            .coassociativity_residual
            .max(self.coassociativity_blockwise_residual)
            >= self.tol
        {
            out.push("axiom (ii)");
        }
        if self.route_discrepancy >= self.tol {
            out.push("route cross-check");
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct QuantumSemigroup {
    index: IndexSystem,
    delta: Comultiplication,
    provenance: Provenance,
    report: Option<ValidationReport>,
    delta_left: OnceLock<BlockMap>,
    delta_right: OnceLock<BlockMap>,
}

/// `(T ⊗ ι_r)(X)` for `X ∈ M_a ⊗ M_r`, slice by slice.
fn map_left_factor(
    apply: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    x: &ComplexMatrix,
    na: usize,
    nr: usize,
) -> Option<ComplexMatrix> {
    let mut out: Option<ComplexMatrix> = None;
    for k in 0..nr {
        for l in 0..nr {
            let slice = ComplexMatrix::from_fn(na, na, |p, q| x[(p * nr + k, q * nr + l)]);
            let piece = kron(&apply(&slice), &matrix_unit(nr, k, l));
            out = Some(match out {
                Some(acc) => acc + piece,
                None => piece,
            });
        }
    }
    out
}

/// `(ι_l ⊗ T)(X)` for `X ∈ M_l ⊗ M_a`, slice by slice.
fn map_right_factor(
    apply: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    x: &ComplexMatrix,
    nl: usize,
    na: usize,
) -> Option<ComplexMatrix> {
    let mut out: Option<ComplexMatrix> = None;
    for k in 0..nl {
        for l in 0..nl {
            let slice = ComplexMatrix::from_fn(na, na, |p, q| x[(k * na + p, l * na + q)]);
            let piece = kron(&matrix_unit(nl, k, l), &apply(&slice));
            out = Some(match out {
                Some(acc) => acc + piece,
                None => piece,
            });
        }
    }
    out
}

fn block_hom_residual(t: &ComplexMatrix, na: usize, nout: usize) -> f64 {
    let image = |i: usize, j: usize| {
        ComplexMatrix::from_column_slice(nout, nout, t.column(j * na + i).as_slice())
    };
    let mut worst: f64 = 0.0;
    for i in 0..na {
        for j in 0..na {
            let x = image(i, j);
            worst = worst.max(spectral_norm(&(x.adjoint() - image(j, i))));
            for l in 0..na {
                // e^{ij} e^{jl} = e^{il}; products with k ≠ j vanish.
                for k in 0..na {
                    let prod = &x * image(k, l);
                    let r = if k == j {
                        spectral_norm(&(prod - image(i, l)))
                    } else {
                        spectral_norm(&prod)
                    };
                    worst = worst.max(r);
                }
            }
        }
    }
    worst
}

impl QuantumSemigroup {
    /// An unvalidated quantum semigroup.
    pub fn new(delta: Comultiplication, provenance: Provenance) -> Self {
        Self {
            index: delta.index().clone(),
            delta,
            provenance,
            report: None,
            delta_left: OnceLock::new(),
            delta_right: OnceLock::new(),
        }
    }

    /// The quantum semigroup of a classical finite semigroup:
    /// `Δ^α_{β,γ} = ι` if `α = βγ` and `0` otherwise. Returned unvalidated;
    /// a non-associative table yields an object that fails validation.
    pub fn from_classical(table: &MultiplicationTable) -> Result<Self> {
        let index = IndexSystem::new(table.labels().iter().map(|l| (l.clone(), 1)))?;
        let mut blocks = BTreeMap::new();
        for b in 0..table.len() {
            for g in 0..table.len() {
                blocks.insert(
                    (table.mul(b, g), b, g),
                    ComplexMatrix::from_element(1, 1, C64::new(1.0, 0.0)),
                );
            }
        }
        Ok(Self::new(
            Comultiplication::new(&index, blocks)?,
            Provenance::Classical,
        ))
    }

    /// The dual of a finite group from a complete set of irreducible unitary
    /// representations, `Δ^α_{β,γ}(x) = (d_α/|G|) Σ_g tr(α(g)* x) β(g)⊗γ(g)`,
    /// so that `Δ(λ_g) = λ_g ⊗ λ_g` for `λ_g(π) = π(g)`. Returned validated.
    pub fn from_group_dual(
        group: &MultiplicationTable,
        irreps: &[(String, Vec<ComplexMatrix>)],
        tol: f64,
    ) -> Result<Self> {
        check_irreps(group, irreps, tol)?;
        let order = group.len() as f64;
        let index = IndexSystem::new(irreps.iter().map(|(l, m)| (l.clone(), m[0].nrows())))?;
        let mut blocks = BTreeMap::new();
        for (a, (_, ra)) in irreps.iter().enumerate() {
            let da = ra[0].nrows() as f64;
            for (b, (_, rb)) in irreps.iter().enumerate() {
                for (g, (_, rg)) in irreps.iter().enumerate() {
                    let mut block: Option<ComplexMatrix> = None;
                    for h in 0..group.len() {
                        let col = vec_of(&kron(&rb[h], &rg[h]));
                        let row = vec_of(&ra[h]).adjoint();
                        let term = col * row;
                        block = Some(match block {
                            Some(acc) => acc + term,
                            None => term,
                        });
                    }
                    let block = block.expect("non-empty group") * C64::new(da / order, 0.0);
                    if block.iter().any(|z| z.norm() > 1e-12) {
                        blocks.insert((a, b, g), block.map(snap));
                    }
                }
            }
        }
        let qs = Self::new(
            Comultiplication::new(&index, blocks)?,
            Provenance::GroupDual,
        );
        qs.into_validated(tol)
    }

    pub fn index(&self) -> &IndexSystem {
        &self.index
    }

    pub fn delta(&self) -> &Comultiplication {
        &self.delta
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_validated(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.passed)
    }

    pub fn report(&self) -> Option<&ValidationReport> {
        self.report.as_ref()
    }

    /// `Δ(1) = 1⊗1`, as found by validation.
    pub fn is_unital(&self) -> Option<bool> {
        self.report.as_ref().map(|r| r.unital)
    }

    pub(crate) fn require_validated(&self) -> Result<()> {
        if self.is_validated() {
            Ok(())
        } else {
            Err(Error::Unvalidated)
        }
    }

    /// `[Δ(f)](β,γ) = Σ_α Δ^α_{β,γ} f(α)`.
    pub fn coproduct(&self, f: &MMElement) -> Result<MMElement> {
        self.delta.as_map().apply(f)
    }

    /// Checks the block homomorphisms, axiom (i) and axiom (ii), in that order.
    pub fn validate(&self, tol: f64) -> Result<ValidationReport> {
        let index = &self.index;
        let n = index.len();

        let mut hom_residual: f64 = 0.0;
        for ((a, b, g), m) in self.delta.blocks() {
            hom_residual = hom_residual.max(block_hom_residual(
                m,
                index.dim(a),
                index.dim(b) * index.dim(g),
            ));
        }

        let mut orthogonality_residual: f64 = 0.0;
        for b in 0..n {
            for g in 0..n {
                let ranges: Vec<ComplexMatrix> = (0..n)
                    .filter(|&a| self.delta.block(a, b, g).is_some())
                    .map(|a| {
                        let na = index.dim(a);
                        self.delta
                            .apply_block(a, b, g, &ComplexMatrix::identity(na, na))
                    })
                    .collect();
                for (x, p) in ranges.iter().enumerate() {
                    for (y, q) in ranges.iter().enumerate() {
                        if x != y {
                            orthogonality_residual =
                                orthogonality_residual.max(spectral_norm(&(p * q)));
                        }
                    }
                }
            }
        }

        let left = tilde_left(self.delta.as_map(), index);
        let right = tilde_right(index, self.delta.as_map());
        let triple = IndexSystem::product(&[index, index, index]);
        let mut coassociativity_residual: f64 = 0.0;
        let mut coassociativity_blockwise_residual: f64 = 0.0;
        let mut route_discrepancy: f64 = 0.0;
        for (lambda, i, j, e) in MMElement::matrix_units(index) {
            let de = self.coproduct(&e)?;
            let lhs = left.apply(&de)?;
            let rhs = right.apply(&de)?;
            coassociativity_residual = coassociativity_residual.max(lhs.distance(&rhs)?);

            let unit = matrix_unit(index.dim(lambda), i, j);
            for a in 0..n {
                for b in 0..n {
                    for g in 0..n {
                        let (na, nb, ng) = (index.dim(a), index.dim(b), index.dim(g));
                        let nout = na * nb * ng;
                        let mut sum_l = ComplexMatrix::zeros(nout, nout);
                        let mut sum_r = ComplexMatrix::zeros(nout, nout);
                        for w in 0..n {
                            let nw = index.dim(w);
                            if self.delta.block(lambda, w, g).is_some()
                                && self.delta.block(w, a, b).is_some()
                            {
                                let inner = self.delta.apply_block(lambda, w, g, &unit);
                                let outer = map_left_factor(
                                    |x| self.delta.apply_block(w, a, b, x),
                                    &inner,
                                    nw,
                                    ng,
                                );
                                sum_l += outer.expect("nonempty");
                            }
                            if self.delta.block(lambda, a, w).is_some()
                                && self.delta.block(w, b, g).is_some()
                            {
                                let inner = self.delta.apply_block(lambda, a, w, &unit);
                                let outer = map_right_factor(
                                    |x| self.delta.apply_block(w, b, g, x),
                                    &inner,
                                    na,
                                    nw,
                                );
                                sum_r += outer.expect("nonempty");
                            }
                        }
                        coassociativity_blockwise_residual = coassociativity_blockwise_residual
                            .max(spectral_norm(&(&sum_l - &sum_r)));
                        let pos = triple.tuple_position(&[a, b, g]);
                        route_discrepancy = route_discrepancy
                            .max(spectral_norm(&(lhs.block_at(pos) - &sum_l)))
                            .max(spectral_norm(&(rhs.block_at(pos) - &sum_r)));
                    }
                }
            }
        }

        let one = MMElement::unit(index);
        let unital_residual = self.coproduct(&one)?.distance(&one.outer_tensor(&one))?;
        let injective = self.delta_rank() == index.algebra_dim();

        let passed = hom_residual < tol
            && orthogonality_residual < tol
            && coassociativity_residual < tol
            && coassociativity_blockwise_residual < tol
            && route_discrepancy < tol;
        Ok(ValidationReport {
            hom_residual,
            orthogonality_residual,
            coassociativity_residual,
            coassociativity_blockwise_residual,
            route_discrepancy,
            unital_residual,
            unital: unital_residual < tol,
            injective,
            tol,
            passed,
        })
    }

    /// Validates and records the report; fails if any check fails.
    pub fn into_validated(mut self, tol: f64) -> Result<Self> {
        let report = self.validate(tol)?;
        if !report.passed {
            return Err(Error::ValidationFailed(format!(
                "{} (hom {:.3e}, (i) {:.3e}, (ii) {:.3e}/{:.3e})",
                report.failures().join(", "),
                report.hom_residual,
                report.orthogonality_residual,
                report.coassociativity_residual,
                report.coassociativity_blockwise_residual,
            )));
        }
        self.report = Some(report);
        Ok(self)
    }

    fn delta_rank(&self) -> usize {
        let index = &self.index;
        let cols = index.algebra_dim();
        let pair = self.delta.as_map().codomain();
        let rows = pair.algebra_dim();
        let mut full = ComplexMatrix::zeros(rows, cols);
        let col_off: Vec<usize> = index
            .dims()
            .iter()
            .scan(0, |acc, &d| {
                let here = *acc;
                *acc += d * d;
                Some(here)
            })
            .collect();
        let row_off: Vec<usize> = pair
            .dims()
            .iter()
            .scan(0, |acc, &d| {
                let here = *acc;
                *acc += d * d;
                Some(here)
            })
            .collect();
        for (&(a, bg), m) in self.delta.as_map().blocks() {
            full.view_mut((row_off[bg], col_off[a]), m.shape())
                .copy_from(m);
        }
        full.rank(1e-9)
    }

    /// `Δ⊗̃ι` (side = left) or `ι⊗̃Δ` (side = right) on `F(I×I)`, carrying a
    /// *-homomorphism flag. Requires a validated semigroup.
    pub fn delta_tilde(&self, side: Side) -> Result<&BlockMap> {
        self.require_validated()?;
        let tol = self
            .report
            .as_ref()
            .map(|r| r.tol)
            .unwrap_or(crate::DEFAULT_TOL);
        let cell = match side {
            Side::Left => &self.delta_left,
            Side::Right => &self.delta_right,
        };
        if let Some(m) = cell.get() {
            return Ok(m);
        }
        let map = match side {
            Side::Left => tilde_left(self.delta.as_map(), &self.index),
            Side::Right => tilde_right(&self.index, self.delta.as_map()),
        };
        let map = map
            .certify_star_hom(tol)
            .map_err(|NotStarHom { residual, .. }| {
                Error::ValidationFailed(format!(
                    "extension of Δ is not a *-homomorphism ({residual:e})"
                ))
            })?;
        Ok(cell.get_or_init(|| map))
    }

    /// `Δ` as a block map carrying the *-homomorphism flag.
    pub fn delta_hom(&self) -> Result<BlockMap> {
        self.require_validated()?;
        let tol = self
            .report
            .as_ref()
            .map(|r| r.tol)
            .unwrap_or(crate::DEFAULT_TOL);
        self.delta
            .as_map()
            .clone()
            .certify_star_hom(tol)
            .map_err(|e| {
                Error::ValidationFailed(format!("Δ is not a *-homomorphism ({:e})", e.residual))
            })
    }

    /// The underlying semigroup when every dimension is one and each
    /// `(β,γ)` has exactly one `α` with `Δ^α_{β,γ} = ι`.
    pub fn classical_table(&self) -> Option<MultiplicationTable> {
        let n = self.index.len();
        if self.index.dims().iter().any(|&d| d != 1) {
            return None;
        }
        let mut product = vec![vec![0; n]; n];
        for (b, row) in product.iter_mut().enumerate() {
            for (g, slot) in row.iter_mut().enumerate() {
                let hits: Vec<usize> = (0..n)
                    .filter(|&a| {
                        self.delta
                            .block(a, b, g)
                            .is_some_and(|m| (m[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-9)
                    })
                    .collect();
                if hits.len() != 1 {
                    return None;
                }
                *slot = hits[0];
            }
        }
        Some(MultiplicationTable {
            labels: self.index.labels().to_vec(),
            product,
        })
    }

    /// `Σ_π d_π²`, which equals `|G|` for a group dual.
    pub(crate) fn total_dimension(&self) -> usize {
        self.index.algebra_dim()
    }

    /// Largest deviation `‖star_hom_residual‖` of the whole `Δ`; combines
    /// block homomorphism and axiom (i).
    pub fn delta_hom_residual(&self) -> Result<f64> {
        star_hom_residual(self.delta.as_map())
    }
}

fn snap(z: C64) -> C64 {
    let r = |x: f64| if x.abs() < 1e-14 { 0.0 } else { x };
    C64::new(r(z.re), r(z.im))
}

fn check_irreps(
    group: &MultiplicationTable,
    irreps: &[(String, Vec<ComplexMatrix>)],
    tol: f64,
) -> Result<()> {
    let order = group.len();
    if !group.is_group() {
        return Err(Error::InvalidIrreps("group table is not a group".into()));
    }
    if irreps.is_empty() {
        return Err(Error::InvalidIrreps("no representations".into()));
    }
    let mut dim_sq = 0;
    for (label, mats) in irreps {
        if mats.len() != order {
            return Err(Error::InvalidIrreps(format!(
                "`{label}` has {} matrices for a group of order {order}",
                mats.len()
            )));
        }
        let d = mats[0].nrows();
        if d == 0 || mats.iter().any(|m| m.shape() != (d, d)) {
            return Err(Error::InvalidIrreps(format!(
                "`{label}` has inconsistent matrix shapes"
            )));
        }
        dim_sq += d * d;
        for (g, m) in mats.iter().enumerate() {
            let unitary = spectral_norm(&(m.adjoint() * m - ComplexMatrix::identity(d, d)));
            if unitary > tol {
                return Err(Error::InvalidIrreps(format!(
                    "`{label}` is not unitary at {} ({unitary:e})",
                    group.labels()[g]
                )));
            }
            for (h, n) in mats.iter().enumerate() {
                let defect = spectral_norm(&(m * n - &mats[group.mul(g, h)]));
                if defect > tol {
                    return Err(Error::InvalidIrreps(format!(
                        "`{label}` is not a homomorphism at ({}, {}) ({defect:e})",
                        group.labels()[g],
                        group.labels()[h]
                    )));
                }
            }
        }
    }
    if dim_sq != order {
        return Err(Error::InvalidIrreps(format!(
            "Σ d² = {dim_sq} but |G| = {order}: the set is incomplete"
        )));
    }
    let characters: Vec<Vec<C64>> = irreps
        .iter()
        .map(|(_, mats)| mats.iter().map(|m| m.trace()).collect())
        .collect();
    for (x, cx) in characters.iter().enumerate() {
        for (y, cy) in characters.iter().enumerate() {
            let inner: C64 =
                cx.iter().zip(cy).map(|(a, b)| a.conj() * b).sum::<C64>() / order as f64;
            let expected = if x == y { 1.0 } else { 0.0 };
            if (inner - C64::new(expected, 0.0)).norm() > tol {
                return Err(Error::InvalidIrreps(format!(
                    "characters of `{}` and `{}` are not orthonormal",
                    irreps[x].0, irreps[y].0
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::DEFAULT_TOL;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn z2_coproduct_of_delta_one() {
        let qs = builtin::z_n(2).into_validated(DEFAULT_TOL).unwrap();
        let f = MMElement::elem_unit(qs.index(), "1", 0, 0).unwrap();
        let df = qs.coproduct(&f).unwrap();
        let values: Vec<f64> = df.blocks().iter().map(|b| b[(0, 0)].re).collect();
        assert_eq!(values, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(
            qs.coproduct(&MMElement::zeros(qs.index()))
                .unwrap()
                .sup_norm(),
            0.0
        );
    }

    #[test]
    fn classical_validates_iff_associative() {
        // every binary operation on two labels
        for code in 0..16u32 {
            let labels = vec!["p".to_string(), "q".to_string()];
            let table =
                MultiplicationTable::from_fn(labels, |x, y| ((code >> (2 * x + y)) & 1) as usize)
                    .unwrap();
            let qs = QuantumSemigroup::from_classical(&table).unwrap();
            let report = qs.validate(DEFAULT_TOL).unwrap();
            assert_eq!(report.passed, table.is_associative(), "table code {code}");
            if !report.passed {
                assert!(report.coassociativity_residual >= 1.0);
            }
        }
    }

    #[test]
    fn left_zero_and_trivial_validate() {
        let lz = builtin::left_zero(2).into_validated(DEFAULT_TOL).unwrap();
        assert_eq!(lz.is_unital(), Some(true));
        let one = builtin::z_n(1).into_validated(DEFAULT_TOL).unwrap();
        let f = MMElement::unit(one.index()).scale(c(3.0));
        let df = one.coproduct(&f).unwrap();
        assert!((df.block_at(0)[(0, 0)] - c(3.0)).norm() < 1e-15);
    }

    #[test]
    fn shared_range_breaks_orthogonality() {
        // Δ^a_{a,a} = Δ^b_{a,a} = ι on one-dimensional labels.
        let index = IndexSystem::new([("a", 1), ("b", 1)]).unwrap();
        let one = ComplexMatrix::from_element(1, 1, c(1.0));
        let mut blocks = BTreeMap::new();
        blocks.insert((0, 0, 0), one.clone());
        blocks.insert((1, 0, 0), one);
        let qs = QuantumSemigroup::new(
            Comultiplication::new(&index, blocks).unwrap(),
            Provenance::Raw,
        );
        let report = qs.validate(DEFAULT_TOL).unwrap();
        assert!(report.orthogonality_residual >= 1.0 - 1e-12);
        assert!(!report.passed);
        assert!(report.failures().contains(&"axiom (i)"));
    }

    #[test]
    fn two_unital_maps_into_the_same_block_break_orthogonality() {
        // labels x (dim 1), y (dim 2): Δ^x_{y,x} and Δ^y_{y,x} both unital into M_2.
        let index = IndexSystem::new([("x", 1), ("y", 2)]).unwrap();
        let mut blocks = BTreeMap::new();
        let scalar_to_m2 =
            ComplexMatrix::from_column_slice(4, 1, &[c(1.0), c(0.0), c(0.0), c(1.0)]);
        blocks.insert((0, 1, 0), scalar_to_m2);
        blocks.insert((1, 1, 0), ComplexMatrix::identity(4, 4));
        let qs = QuantumSemigroup::new(
            Comultiplication::new(&index, blocks).unwrap(),
            Provenance::Raw,
        );
        let report = qs.validate(DEFAULT_TOL).unwrap();
        assert!(report.orthogonality_residual > 0.9);
        assert!(!report.passed);
    }

    #[test]
    fn z3_dual_matches_classical_character_group() {
        let dual = builtin::z_n_dual(3).unwrap();
        let classical = builtin::z_n(3);
        // character k ↔ element k
        for a in 0..3 {
            for b in 0..3 {
                for g in 0..3 {
                    let d = dual
                        .delta()
                        .block(a, b, g)
                        .map(|m| m[(0, 0)])
                        .unwrap_or(c(0.0));
                    let k = classical
                        .delta()
                        .block(a, b, g)
                        .map(|m| m[(0, 0)])
                        .unwrap_or(c(0.0));
                    assert!((d - k).norm() < 1e-12, "({a},{b},{g})");
                }
            }
        }
    }

    #[test]
    fn trivial_group_dual() {
        let qs = builtin::z_n_dual(1).unwrap();
        assert_eq!(qs.index().dims(), &[1]);
        let m = qs.delta().block(0, 0, 0).unwrap();
        assert!((m[(0, 0)] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn s3_dual_validates_and_is_group_like_on_lambda() {
        let qs = builtin::s3_dual().unwrap();
        let report = qs.report().unwrap();
        assert!(report.coassociativity_residual < 1e-9);
        assert!(report.unital);
        assert!(report.injective);
        assert_eq!(qs.index().dims(), &[1, 1, 2]);
        let irreps = builtin::s3_irreps();
        for g in 0..6 {
            let lambda = MMElement::from_fn(qs.index(), |k, _| irreps[k].1[g].clone());
            let d = qs.coproduct(&lambda).unwrap();
            let expected = lambda.outer_tensor(&lambda);
            assert!(d.distance(&expected).unwrap() < 1e-10);
        }
    }

    #[test]
    fn incomplete_irreps_rejected() {
        let group = builtin::s3_table();
        let mut irreps = builtin::s3_irreps();
        irreps.pop();
        assert!(matches!(
            QuantumSemigroup::from_group_dual(&group, &irreps, DEFAULT_TOL),
            Err(Error::InvalidIrreps(_))
        ));
        let mut irreps = builtin::s3_irreps();
        irreps[1] = irreps[0].clone();
        irreps[1].0 = "copy".into();
        assert!(QuantumSemigroup::from_group_dual(&group, &irreps, DEFAULT_TOL).is_err());
    }

    #[test]
    fn delta_tilde_requires_validation_and_carries_flag() {
        let raw = builtin::z_n(2);
        assert!(matches!(
            raw.delta_tilde(Side::Left),
            Err(Error::Unvalidated)
        ));
        let qs = raw.into_validated(DEFAULT_TOL).unwrap();
        let left = qs.delta_tilde(Side::Left).unwrap();
        assert!(left.hom_flag().is_some());
        let right = qs.delta_tilde(Side::Right).unwrap();
        let f = MMElement::elem_unit(qs.index(), "1", 0, 0).unwrap();
        let df = qs.coproduct(&f).unwrap();
        assert!(
            left.apply(&df)
                .unwrap()
                .distance(&right.apply(&df).unwrap())
                .unwrap()
                < 1e-12
        );
        let pair = IndexSystem::product(&[qs.index(), qs.index()]);
        assert_eq!(
            right.apply(&MMElement::zeros(&pair)).unwrap().sup_norm(),
            0.0
        );
    }

    #[test]
    fn validate_is_monotone_in_tol() {
        let qs = builtin::s3_dual().unwrap();
        let tight = qs.validate(1e-9).unwrap();
        assert!(tight.passed);
        assert!(qs.validate(1e-3).unwrap().passed);
    }

    #[test]
    fn table_errors() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let mut entries = HashMap::new();
        entries.insert(("a".into(), "a".into()), "a".into());
        assert!(MultiplicationTable::new(labels.clone(), &entries).is_err());
        for (x, y) in [("a", "b"), ("b", "a"), ("b", "b")] {
            entries.insert((x.into(), y.into()), "c".into());
        }
        assert!(matches!(
            MultiplicationTable::new(labels, &entries),
            Err(Error::InvalidTable(_))
        ));
    }
}
