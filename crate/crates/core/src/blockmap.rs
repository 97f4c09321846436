//! Linear maps `T: F(I) → F(I′)` stored as blocks `T^α_β = P_β T I_α`.
//!
//! Each block is an `n(β)² × n(α)²` matrix acting on column-major
//! vectorized matrices, and `[T(f)](β) = Σ_α T^α_β(f(α))`. Absent blocks
//! are zero. Linear functionals are block maps into the scalar system.
//!
//! The `⊗̃` extensions `T⊗̃ι`, `ι⊗̃T` and `ι⊗̃T⊗̃ι` are built blockwise as
//! `T^α_β ⊗ ι` on the product index systems. [`extend_by_slices`] evaluates
//! the same extensions the other way round, by decomposing the input along
//! the matrix units of the untouched factors and applying `T` to each
//! coefficient function; the two routes are compared by [`check_p3`].

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::multimatrix::{kron, matrix_unit, ComplexMatrix, IndexSystem, MMElement, C64};

/// Default absolute tolerance for law checks on sup-norms.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Marker that a [`BlockMap`] passed the *-homomorphism check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomFlag {
    tol: f64,
    residual: f64,
}

impl HomFlag {
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// Returned when a map fails the *-homomorphism check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NotStarHom {
    pub residual: f64,
    pub tol: f64,
}

#[derive(Clone, Debug)]
pub struct BlockMap {
    domain: IndexSystem,
    codomain: IndexSystem,
    blocks: BTreeMap<(usize, usize), ComplexMatrix>,
    hom: Option<HomFlag>,
}

pub(crate) fn vec_of(m: &ComplexMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub(crate) fn unvec(v: &DVector<C64>, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(n, n, v.as_slice())
}

impl BlockMap {
    /// Builds a map from `(α, β)`-keyed blocks, checking every shape.
    pub fn new(
        domain: &IndexSystem,
        codomain: &IndexSystem,
        blocks: BTreeMap<(usize, usize), ComplexMatrix>,
    ) -> Result<Self> {
        for (&(a, b), m) in &blocks {
            if a >= domain.len() || b >= codomain.len() {
                return Err(Error::Format(format!("block key ({a}, {b}) out of range")));
            }
            let rows = codomain.dim(b).pow(2);
            let cols = domain.dim(a).pow(2);
            if m.shape() != (rows, cols) {
                return Err(Error::MalformedBlock {
                    at: format!("({}, {})", domain.label(a), codomain.label(b)),
                    expected_rows: rows,
                    expected_cols: cols,
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
        }
        Ok(Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            blocks,
            hom: None,
        })
    }

    pub fn zero(domain: &IndexSystem, codomain: &IndexSystem) -> Self {
        Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            blocks: BTreeMap::new(),
            hom: None,
        }
    }

    pub fn identity(index: &IndexSystem) -> Self {
        let blocks = (0..index.len())
            .map(|k| {
                let n2 = index.dim(k).pow(2);
                ((k, k), ComplexMatrix::identity(n2, n2))
            })
            .collect();
        Self {
            domain: index.clone(),
            codomain: index.clone(),
            blocks,
            hom: None,
        }
    }

    /// Builds the map sending each matrix unit `e_α^{ij}` to `image(α, i, j)`.
    /// Blocks that come out exactly zero are not stored.
    pub fn from_unit_images(
        domain: &IndexSystem,
        codomain: &IndexSystem,
        mut image: impl FnMut(usize, usize, usize) -> MMElement,
    ) -> Result<Self> {
        let mut blocks = BTreeMap::new();
        for a in 0..domain.len() {
            let na = domain.dim(a);
            let mut cols: Vec<ComplexMatrix> = (0..codomain.len())
                .map(|b| ComplexMatrix::zeros(codomain.dim(b).pow(2), na * na))
                .collect();
            for j in 0..na {
                for i in 0..na {
                    let img = image(a, i, j);
                    codomain.ensure_same(img.index())?;
                    for (b, block) in img.blocks().iter().enumerate() {
                        cols[b].set_column(j * na + i, &vec_of(block));
                    }
                }
            }
            for (b, m) in cols.into_iter().enumerate() {
                if m.iter().any(|z| z.re != 0.0 || z.im != 0.0) {
                    blocks.insert((a, b), m);
                }
            }
        }
        Self::new(domain, codomain, blocks)
    }

    /// The functional `x ↦ Σ_α tr(ρ_α x_α)`.
    pub fn functional(domain: &IndexSystem, densities: &[ComplexMatrix]) -> Result<Self> {
        let scalar = IndexSystem::scalar();
        let mut blocks = BTreeMap::new();
        for (a, rho) in densities.iter().enumerate() {
            let n = domain.dim(a);
            if rho.shape() != (n, n) {
                return Err(Error::MalformedBlock {
                    at: format!("density `{}`", domain.label(a)),
                    expected_rows: n,
                    expected_cols: n,
                    rows: rho.nrows(),
                    cols: rho.ncols(),
                });
            }
            // tr(ρx) = Σ_{ij} ρ[j,i]·x[i,j]; x[i,j] sits at column-major slot j·n+i.
            let row = ComplexMatrix::from_fn(1, n * n, |_, k| rho[(k / n, k % n)]);
            blocks.insert((a, 0), row);
        }
        if densities.len() != domain.len() {
            return Err(Error::MissingBlock(format!(
                "expected {} densities, found {}",
                domain.len(),
                densities.len()
            )));
        }
        Self::new(domain, &scalar, blocks)
    }

    /// `P_β : F(I) → M_β`, with `M_β` as the one-label system `{β}`.
    pub fn projection(index: &IndexSystem, beta: &str) -> Result<Self> {
        let pos = index.position(beta)?;
        let n = index.dim(pos);
        let single = IndexSystem::new([(beta, n)])?;
        let mut blocks = BTreeMap::new();
        blocks.insert((pos, 0), ComplexMatrix::identity(n * n, n * n));
        Self::new(index, &single, blocks)
    }

    /// `I_α : M_α → F(I)`.
    pub fn imbedding(index: &IndexSystem, alpha: &str) -> Result<Self> {
        let pos = index.position(alpha)?;
        let n = index.dim(pos);
        let single = IndexSystem::new([(alpha, n)])?;
        let mut blocks = BTreeMap::new();
        blocks.insert((0, pos), ComplexMatrix::identity(n * n, n * n));
        Self::new(&single, index, blocks)
    }

    pub fn domain(&self) -> &IndexSystem {
        &self.domain
    }

    pub fn codomain(&self) -> &IndexSystem {
        &self.codomain
    }

    pub fn blocks(&self) -> &BTreeMap<(usize, usize), ComplexMatrix> {
        &self.blocks
    }

    /// `T^α_β`, or `None` when the block is zero.
    pub fn block(&self, alpha: usize, beta: usize) -> Option<&ComplexMatrix> {
        self.blocks.get(&(alpha, beta))
    }

    pub fn is_functional(&self) -> bool {
        self.codomain.is_scalar()
    }

    pub fn hom_flag(&self) -> Option<HomFlag> {
        self.hom
    }

    /// Runs [`is_star_hom`] and, on success, returns the map carrying the flag.
    pub fn certify_star_hom(mut self, tol: f64) -> std::result::Result<Self, NotStarHom> {
        let flag = is_star_hom(&self, tol)?;
        self.hom = Some(flag);
        Ok(self)
    }

    /// Applies `T^α_β` to a single matrix.
    pub fn apply_block(&self, alpha: usize, beta: usize, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.codomain.dim(beta);
        match self.blocks.get(&(alpha, beta)) {
            Some(t) => unvec(&(t * vec_of(x)), n),
            None => ComplexMatrix::zeros(n, n),
        }
    }

    /// `[T(f)](β) = Σ_α T^α_β(f(α))`.
    pub fn apply(&self, f: &MMElement) -> Result<MMElement> {
        self.domain.ensure_same(f.index())?;
        let mut acc: Vec<DVector<C64>> = (0..self.codomain.len())
            .map(|b| DVector::zeros(self.codomain.dim(b).pow(2)))
            .collect();
        for (&(a, b), t) in &self.blocks {
            acc[b] += t * vec_of(f.block_at(a));
        }
        let blocks = acc
            .iter()
            .enumerate()
            .map(|(b, v)| unvec(v, self.codomain.dim(b)))
            .collect();
        MMElement::from_blocks(&self.codomain, blocks)
    }

    /// Evaluates a functional, returning the scalar.
    pub fn apply_scalar(&self, f: &MMElement) -> Result<C64> {
        if !self.is_functional() {
            return Err(Error::IndexMismatch {
                expected: IndexSystem::scalar().to_string(),
                found: self.codomain.to_string(),
            });
        }
        Ok(self.apply(f)?.block_at(0)[(0, 0)])
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            blocks: self.blocks.iter().map(|(&k, m)| (k, m * c)).collect(),
            hom: None,
        }
    }

    /// Largest entrywise block difference; both maps must share domain and codomain.
    pub fn max_block_diff(&self, other: &BlockMap) -> Result<f64> {
        self.domain.ensure_same(&other.domain)?;
        self.codomain.ensure_same(&other.codomain)?;
        let mut worst: f64 = 0.0;
        for key in self.blocks.keys().chain(other.blocks.keys()) {
            let d = match (self.blocks.get(key), other.blocks.get(key)) {
                (Some(a), Some(b)) => crate::multimatrix::max_abs_diff(a, b),
                (Some(m), None) | (None, Some(m)) => m.iter().map(|z| z.norm()).fold(0.0, f64::max),
                (None, None) => 0.0,
            };
            worst = worst.max(d);
        }
        Ok(worst)
    }
}

/// `S ∘ T`, with `(S∘T)^α_γ = Σ_β S^β_γ · T^α_β`.
pub fn compose(s: &BlockMap, t: &BlockMap) -> Result<BlockMap> {
    s.domain.ensure_same(&t.codomain)?;
    let mut by_source: BTreeMap<usize, Vec<(usize, &ComplexMatrix)>> = BTreeMap::new();
    for (&(b, g), m) in &s.blocks {
        by_source.entry(b).or_default().push((g, m));
    }
    let mut blocks: BTreeMap<(usize, usize), ComplexMatrix> = BTreeMap::new();
    for (&(a, b), tm) in &t.blocks {
        if let Some(targets) = by_source.get(&b) {
            for &(g, sm) in targets {
                let prod = sm * tm;
                blocks
                    .entry((a, g))
                    .and_modify(|acc| *acc += &prod)
                    .or_insert(prod);
            }
        }
    }
    BlockMap::new(&t.domain, &s.codomain, blocks)
}

/// Images of every matrix unit of the domain, in `(α, i, j)` order.
/// A matrix unit `(label, i, j)` and its image.
type UnitImage = ((usize, usize, usize), MMElement);

fn unit_images(t: &BlockMap) -> Result<Vec<UnitImage>> {
    MMElement::matrix_units(t.domain())
        .map(|(a, i, j, e)| Ok(((a, i, j), t.apply(&e)?)))
        .collect()
}

/// Largest residual of `T(xy) = T(x)T(y)` and `T(x*) = T(x)*` over all
/// matrix units `x`, `y` of the domain.
pub fn star_hom_residual(t: &BlockMap) -> Result<f64> {
    let images = unit_images(t)?;
    let lookup: BTreeMap<(usize, usize, usize), &MMElement> =
        images.iter().map(|(k, v)| (*k, v)).collect();
    let zero = MMElement::zeros(t.codomain());
    let mut worst: f64 = 0.0;
    for (&(a, i, j), x) in &lookup {
        let adj = lookup[&(a, j, i)];
        worst = worst.max(x.adjoint().distance(adj)?);
        for (&(b, k, l), y) in &lookup {
            // e_a^{ij} e_b^{kl} = δ_ab δ_jk e_a^{il}
            let expected = if a == b && j == k {
                lookup[&(a, i, l)]
            } else {
                &zero
            };
            worst = worst.max(x.mul(y)?.distance(expected)?);
        }
    }
    Ok(worst)
}

/// Accepts `T` as a *-homomorphism iff the matrix-unit residual is below `tol`.
pub fn is_star_hom(t: &BlockMap, tol: f64) -> std::result::Result<HomFlag, NotStarHom> {
    let residual = star_hom_residual(t).expect("unit images share the map's own index systems");
    if residual < tol {
        Ok(HomFlag { tol, residual })
    } else {
        Err(NotStarHom { residual, tol })
    }
}

/// The block `T^α_β ⊗ ι` of `ι_L ⊗̃ T ⊗̃ ι_R` between `M_l⊗M_α⊗M_r` and
/// `M_l⊗M_β⊗M_r`, in column-major vectorization.
fn extended_block(t: &ComplexMatrix, na: usize, nb: usize, nl: usize, nr: usize) -> ComplexMatrix {
    let n_in = nl * na * nr;
    let n_out = nl * nb * nr;
    let mut out = ComplexMatrix::zeros(n_out * n_out, n_in * n_in);
    for qa in 0..na {
        for pa in 0..na {
            let tcol = qa * na + pa;
            for v in 0..nb {
                for u in 0..nb {
                    let coeff = t[(v * nb + u, tcol)];
                    if coeff.re == 0.0 && coeff.im == 0.0 {
                        continue;
                    }
                    for pl in 0..nl {
                        for ql in 0..nl {
                            for pr in 0..nr {
                                for qr in 0..nr {
                                    let p = (pl * na + pa) * nr + pr;
                                    let q = (ql * na + qa) * nr + qr;
                                    let yr = (pl * nb + u) * nr + pr;
                                    let yc = (ql * nb + v) * nr + qr;
                                    out[(yc * n_out + yr, q * n_in + p)] = coeff;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// `ι_L ⊗̃ T ⊗̃ ι_R` as a block map from `F(L×I×R)` to `F(L×I′×R)`.
///
/// Pass [`IndexSystem::scalar`] for an absent side. When `T` is a functional
/// its scalar codomain drops out of the product.
pub fn extend(left: &IndexSystem, t: &BlockMap, right: &IndexSystem) -> BlockMap {
    let domain = IndexSystem::product(&[left, t.domain(), right]);
    let codomain = IndexSystem::product(&[left, t.codomain(), right]);
    let (ni, no) = (t.domain().len(), t.codomain().len());
    let nr_labels = right.len();
    let mut blocks = BTreeMap::new();
    for (&(a, b), tm) in t.blocks() {
        let (na, nb) = (t.domain().dim(a), t.codomain().dim(b));
        for l in 0..left.len() {
            for r in 0..nr_labels {
                let src = (l * ni + a) * nr_labels + r;
                let dst = (l * no + b) * nr_labels + r;
                let block = extended_block(tm, na, nb, left.dim(l), right.dim(r));
                blocks.insert((src, dst), block);
            }
        }
    }
    BlockMap {
        domain,
        codomain,
        blocks,
        hom: None,
    }
}

/// `T ⊗̃ ι` on `F(I×J)`.
pub fn tilde_left(t: &BlockMap, j: &IndexSystem) -> BlockMap {
    extend(&IndexSystem::scalar(), t, j)
}

/// `ι ⊗̃ T` on `F(J×I)`.
pub fn tilde_right(j: &IndexSystem, t: &BlockMap) -> BlockMap {
    extend(j, t, &IndexSystem::scalar())
}

/// `ι ⊗̃ T ⊗̃ ι` on `F(J×I×J′)`.
pub fn tilde_middle(j: &IndexSystem, t: &BlockMap, j2: &IndexSystem) -> BlockMap {
    extend(j, t, j2)
}

/// Evaluates `(ι_L ⊗̃ T ⊗̃ ι_R)(f)` from the defining formula: write
/// `f(l,α,r) = Σ e_l^{ij} ⊗ g(α) ⊗ e_r^{kl}`, apply `T` to each
/// coefficient function `g ∈ F(I)` and reassemble.
pub fn extend_by_slices(
    left: &IndexSystem,
    t: &BlockMap,
    right: &IndexSystem,
    f: &MMElement,
) -> Result<MMElement> {
    let domain = IndexSystem::product(&[left, t.domain(), right]);
    let codomain = IndexSystem::product(&[left, t.codomain(), right]);
    domain.ensure_same(f.index())?;
    let inner = t.domain();
    let (ni, no, nrl) = (inner.len(), t.codomain().len(), right.len());
    let mut out = MMElement::zeros(&codomain);
    for l in 0..left.len() {
        let nl = left.dim(l);
        for r in 0..nrl {
            let nr = right.dim(r);
            for (il, jl) in (0..nl).flat_map(|i| (0..nl).map(move |j| (i, j))) {
                for (ir, jr) in (0..nr).flat_map(|i| (0..nr).map(move |j| (i, j))) {
                    let coeff = MMElement::from_fn(inner, |a, na| {
                        let block = f.block_at((l * ni + a) * nrl + r);
                        ComplexMatrix::from_fn(na, na, |p, q| {
                            block[((il * na + p) * nr + ir, (jl * na + q) * nr + jr)]
                        })
                    });
                    let image = t.apply(&coeff)?;
                    let el = matrix_unit(nl, il, jl);
                    let er = matrix_unit(nr, ir, jr);
                    for b in 0..no {
                        let piece = kron(&kron(&el, image.block_at(b)), &er);
                        *out.block_at_mut((l * no + b) * nrl + r) += piece;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// P0 residual: `‖(T⊗̃ι)(f⊗g) − T(f)⊗g‖`.
pub fn check_p0(t: &BlockMap, f: &MMElement, g: &MMElement) -> Result<f64> {
    let lhs = tilde_left(t, g.index()).apply(&f.outer_tensor(g))?;
    let rhs = t.apply(f)?.outer_tensor(g);
    lhs.distance(&rhs)
}

/// P0 mirror residual: `‖(ι⊗̃T)(g⊗f) − g⊗T(f)‖`.
pub fn check_p0_right(t: &BlockMap, g: &MMElement, f: &MMElement) -> Result<f64> {
    let lhs = tilde_right(g.index(), t).apply(&g.outer_tensor(f))?;
    let rhs = g.outer_tensor(&t.apply(f)?);
    lhs.distance(&rhs)
}

/// P1 residual on `f ∈ F(J×I×J′)`: the largest pairwise disagreement of
/// `(ι⊗̃T)⊗̃ι`, `ι⊗̃T⊗̃ι` and `ι⊗̃(T⊗̃ι)`.
pub fn check_p1(j: &IndexSystem, t: &BlockMap, j2: &IndexSystem, f: &MMElement) -> Result<f64> {
    let a = tilde_left(&tilde_right(j, t), j2).apply(f)?;
    let b = tilde_middle(j, t, j2).apply(f)?;
    let c = tilde_right(j, &tilde_left(t, j2)).apply(f)?;
    Ok(a.distance(&b)?.max(b.distance(&c)?).max(a.distance(&c)?))
}

/// P1 second family on `f ∈ F(I×J×J′)`: `(T⊗̃ι)⊗̃ι = T⊗̃(ι⊗̃ι)`.
pub fn check_p1_left(
    t: &BlockMap,
    j: &IndexSystem,
    j2: &IndexSystem,
    f: &MMElement,
) -> Result<f64> {
    let jj = IndexSystem::product(&[j, j2]);
    let nested = tilde_left(&tilde_left(t, j), j2).apply(f)?;
    let flat = tilde_left(t, &jj).apply(f)?;
    nested.distance(&flat)
}

/// P3 residual: blockwise evaluation `Σ_α (T^α_β ⊗ ι)(f(α,β′))` against the
/// slice-by-slice formula. Requires `T` to carry a [`HomFlag`].
pub fn check_p3(t: &BlockMap, f: &MMElement) -> Result<f64> {
    if t.hom_flag().is_none() {
        return Err(Error::HomomorphismRequired);
    }
    let atoms = f.index().atoms();
    let k = t.domain().arity();
    let rest: Vec<&IndexSystem> = atoms.iter().skip(k).collect();
    let j = IndexSystem::product(&rest);
    let blockwise = tilde_left(t, &j).apply(f)?;
    let sliced = extend_by_slices(&IndexSystem::scalar(), t, &j, f)?;
    blockwise.distance(&sliced)
}

/// P4 residual on `f ∈ F(I×I′)`: `(ι⊗̃T′)(T⊗̃ι)` against `(T⊗̃ι)(ι⊗̃T′)`.
/// At least one of the maps must carry a [`HomFlag`].
pub fn check_p4(t: &BlockMap, t2: &BlockMap, f: &MMElement) -> Result<f64> {
    if t.hom_flag().is_none() && t2.hom_flag().is_none() {
        return Err(Error::HomomorphismRequired);
    }
    let (i, i2) = (t.domain(), t2.domain());
    IndexSystem::product(&[i, i2]).ensure_same(f.index())?;
    let lhs = tilde_right(t.codomain(), t2).apply(&tilde_left(t, i2).apply(f)?)?;
    let rhs = tilde_left(t, t2.codomain()).apply(&tilde_right(i, t2).apply(f)?)?;
    lhs.distance(&rhs)
}
