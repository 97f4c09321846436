//! Finite multimatrix algebras `F(I) = ⊕_γ M_{n(γ)}`.
//!
//! An [`IndexSystem`] is a finite list of labels with a positive dimension
//! per label. Elements ([`MMElement`]) hold one dense square block per label.
//! Products `I₁ × ··· × I_k` are index systems too: their labels are tuples
//! flattened over atomic factors, ordered lexicographically with the first
//! factor slowest, and the block at `(α₁,…,α_k)` is a matrix on the
//! Kronecker product space with `α₁` as the leftmost factor.
//!
//! A distinguished one-point *scalar* system (dimension 1) serves as the
//! codomain of linear functionals; it is dropped from products so that
//! `(n ⊗̃ ι)` lands in `F(J)` rather than `F(• × J)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix. Storage is column-major, which is also the
/// vectorization convention used by block maps.
pub type ComplexMatrix = DMatrix<C64>;

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    m.singular_values().max()
}

/// `(A⊗B)[i·p+k, j·q+l] = A[i,j]·B[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Matrix unit `e^{ij}` of size `n×n` (0-based).
pub fn matrix_unit(n: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

pub(crate) fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug)]
struct Inner {
    labels: Vec<String>,
    dims: Vec<usize>,
    positions: HashMap<String, usize>,
    /// Atomic factors; empty for an atomic system.
    factors: Vec<IndexSystem>,
    scalar: bool,
}

/// A finite set of labels with a positive dimension per label.
///
/// Cheap to clone; the label table is shared.
#[derive(Clone)]
pub struct IndexSystem {
    inner: Arc<Inner>,
}

impl IndexSystem {
    /// Builds an atomic index system from `(label, dim)` pairs.
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        let mut positions = HashMap::new();
        for (label, dim) in entries {
            let label = label.into();
            if dim == 0 {
                return Err(Error::InvalidIndexSystem(format!(
                    "label `{label}` has dimension 0"
                )));
            }
            if positions.insert(label.clone(), labels.len()).is_some() {
                return Err(Error::InvalidIndexSystem(format!(
                    "duplicate label `{label}`"
                )));
            }
            labels.push(label);
            dims.push(dim);
        }
        if labels.is_empty() {
            return Err(Error::InvalidIndexSystem("no labels".into()));
        }
        Ok(Self {
            inner: Arc::new(Inner {
                labels,
                dims,
                positions,
                factors: Vec::new(),
                scalar: false,
            }),
        })
    }

    /// The one-point codomain of linear functionals.
    pub fn scalar() -> Self {
        let mut positions = HashMap::new();
        positions.insert("*".to_string(), 0);
        Self {
            inner: Arc::new(Inner {
                labels: vec!["*".into()],
                dims: vec![1],
                positions,
                factors: Vec::new(),
                scalar: true,
            }),
        }
    }

    /// Cartesian product `I₁ × ··· × I_k` with multiplied dimensions.
    ///
    /// Nested products are flattened and scalar factors dropped, so
    /// `(I×J)×K`, `I×(J×K)` and `I×J×K` are the same system.
    pub fn product(factors: &[&IndexSystem]) -> Self {
        let atoms: Vec<IndexSystem> = factors
            .iter()
            .filter(|f| !f.is_scalar())
            .flat_map(|f| f.atoms())
            .collect();
        match atoms.len() {
            0 => return Self::scalar(),
            1 => return atoms.into_iter().next().unwrap(),
            _ => {}
        }
        let mut labels = vec![String::new()];
        let mut parts: Vec<Vec<&str>> = vec![Vec::new()];
        let mut dims = vec![1usize];
        for atom in &atoms {
            let mut next_parts = Vec::with_capacity(parts.len() * atom.len());
            let mut next_dims = Vec::with_capacity(dims.len() * atom.len());
            for (p, d) in parts.iter().zip(&dims) {
                for (l, n) in atom.labels().iter().zip(atom.dims()) {
                    let mut q = p.clone();
                    q.push(l.as_str());
                    next_parts.push(q);
                    next_dims.push(d * n);
                }
            }
            parts = next_parts;
            dims = next_dims;
        }
        labels.clear();
        let mut positions = HashMap::with_capacity(parts.len());
        for (k, p) in parts.iter().enumerate() {
            let label = format!("({})", p.join(","));
            positions.insert(label.clone(), k);
            labels.push(label);
        }
        Self {
            inner: Arc::new(Inner {
                labels,
                dims,
                positions,
                factors: atoms,
                scalar: false,
            }),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.inner.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.inner.dims
    }

    pub fn len(&self) -> usize {
        self.inner.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_scalar(&self) -> bool {
        self.inner.scalar
    }

    pub fn dim(&self, pos: usize) -> usize {
        self.inner.dims[pos]
    }

    pub fn label(&self, pos: usize) -> &str {
        &self.inner.labels[pos]
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.inner
            .positions
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Atomic factors (a single entry for an atomic system).
    pub fn atoms(&self) -> Vec<IndexSystem> {
        if self.inner.factors.is_empty() {
            vec![self.clone()]
        } else {
            self.inner.factors.clone()
        }
    }

    /// Number of atomic factors; 0 for the scalar system.
    pub fn arity(&self) -> usize {
        if self.is_scalar() {
            0
        } else {
            self.inner.factors.len().max(1)
        }
    }

    /// Position of a tuple label given factor positions.
    pub fn tuple_position(&self, parts: &[usize]) -> usize {
        let atoms = self.atoms();
        debug_assert_eq!(parts.len(), atoms.len());
        parts
            .iter()
            .zip(&atoms)
            .fold(0, |acc, (&p, a)| acc * a.len() + p)
    }

    /// Sum of `n(γ)²`, the complex dimension of `F(I)`.
    pub fn algebra_dim(&self) -> usize {
        self.dims().iter().map(|d| d * d).sum()
    }

    pub fn max_dim(&self) -> usize {
        self.dims().iter().copied().max().unwrap_or(1)
    }

    pub(crate) fn ensure_same(&self, other: &IndexSystem) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::IndexMismatch {
                expected: self.to_string(),
                found: other.to_string(),
            })
        }
    }
}

impl PartialEq for IndexSystem {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.inner, &other.inner) {
            return true;
        }
        self.inner.scalar == other.inner.scalar
            && self.inner.labels == other.inner.labels
            && self.inner.dims == other.inner.dims
            && self.inner.factors.len() == other.inner.factors.len()
    }
}

impl fmt::Debug for IndexSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexSystem({self})")
    }
}

impl fmt::Display for IndexSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_scalar() {
            return f.write_str("{*}");
        }
        f.write_str("{")?;
        for (k, (l, d)) in self.labels().iter().zip(self.dims()).enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            if k == 8 && self.len() > 9 {
                return write!(f, "… {} labels}}", self.len());
            }
            write!(f, "{l}:{d}")?;
        }
        f.write_str("}")
    }
}

/// An element of `F(I)`: one square block per label.
#[derive(Clone, Debug)]
pub struct MMElement {
    index: IndexSystem,
    blocks: Vec<ComplexMatrix>,
}

impl MMElement {
    /// Builds an element from blocks in label order, checking shapes.
    pub fn from_blocks(index: &IndexSystem, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        if blocks.len() != index.len() {
            return Err(Error::MissingBlock(format!(
                "expected {} blocks, found {}",
                index.len(),
                blocks.len()
            )));
        }
        for (k, b) in blocks.iter().enumerate() {
            let n = index.dim(k);
            if b.shape() != (n, n) {
                return Err(Error::MalformedBlock {
                    at: format!("label `{}`", index.label(k)),
                    expected_rows: n,
                    expected_cols: n,
                    rows: b.nrows(),
                    cols: b.ncols(),
                });
            }
        }
        Ok(Self {
            index: index.clone(),
            blocks,
        })
    }

    pub fn from_fn(index: &IndexSystem, mut f: impl FnMut(usize, usize) -> ComplexMatrix) -> Self {
        let blocks = (0..index.len()).map(|k| f(k, index.dim(k))).collect();
        Self {
            index: index.clone(),
            blocks,
        }
    }

    pub fn zeros(index: &IndexSystem) -> Self {
        Self::from_fn(index, |_, n| ComplexMatrix::zeros(n, n))
    }

    /// The unit `1`, the identity matrix in every block.
    pub fn unit(index: &IndexSystem) -> Self {
        Self::from_fn(index, |_, n| ComplexMatrix::identity(n, n))
    }

    /// Matrix unit `e_β^{ij}` (0-based `i`, `j`).
    pub fn elem_unit(index: &IndexSystem, beta: &str, i: usize, j: usize) -> Result<Self> {
        let pos = index.position(beta)?;
        Self::elem_unit_at(index, pos, i, j)
    }

    pub fn elem_unit_at(index: &IndexSystem, pos: usize, i: usize, j: usize) -> Result<Self> {
        let n = index.dim(pos);
        if i >= n || j >= n {
            return Err(Error::OutOfRange {
                label: index.label(pos).to_string(),
                i,
                j,
                dim: n,
            });
        }
        let mut e = Self::zeros(index);
        e.blocks[pos][(i, j)] = C64::new(1.0, 0.0);
        Ok(e)
    }

    /// All matrix units of `F(I)` as `(position, i, j, e_pos^{ij})`.
    pub fn matrix_units(
        index: &IndexSystem,
    ) -> impl Iterator<Item = (usize, usize, usize, MMElement)> + '_ {
        (0..index.len()).flat_map(move |pos| {
            let n = index.dim(pos);
            (0..n).flat_map(move |j| {
                (0..n).map(move |i| {
                    (
                        pos,
                        i,
                        j,
                        Self::elem_unit_at(index, pos, i, j).expect("in range"),
                    )
                })
            })
        })
    }

    pub fn index(&self) -> &IndexSystem {
        &self.index
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn block_at(&self, pos: usize) -> &ComplexMatrix {
        &self.blocks[pos]
    }

    pub(crate) fn block_at_mut(&mut self, pos: usize) -> &mut ComplexMatrix {
        &mut self.blocks[pos]
    }

    pub fn block(&self, label: &str) -> Result<&ComplexMatrix> {
        Ok(&self.blocks[self.index.position(label)?])
    }

    pub fn into_blocks(self) -> Vec<ComplexMatrix> {
        self.blocks
    }

    fn zip_with(
        &self,
        other: &MMElement,
        f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix,
    ) -> Result<Self> {
        self.index.ensure_same(&other.index)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(Self {
            index: self.index.clone(),
            blocks,
        })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(&self, other: &MMElement) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(&self, other: &MMElement) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Blockwise matrix product.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(&self, other: &MMElement) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            index: self.index.clone(),
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }

    /// Blockwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            index: self.index.clone(),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// `‖f‖ = max_γ ‖f(γ)‖` with the spectral norm per block.
    pub fn sup_norm(&self) -> f64 {
        self.blocks.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &MMElement) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }

    /// `f ⊗ g` over `I × J`: the block at `(α, β)` is `f(α) ⊗ g(β)`.
    pub fn outer_tensor(&self, other: &MMElement) -> Self {
        let index = IndexSystem::product(&[&self.index, &other.index]);
        let mut blocks = Vec::with_capacity(index.len());
        for a in &self.blocks {
            for b in &other.blocks {
                blocks.push(kron(a, b));
            }
        }
        Self { index, blocks }
    }

    /// Blockwise matrix exponential (scaling and squaring with Padé).
    pub fn exp_blockwise(&self) -> Self {
        Self {
            index: self.index.clone(),
            blocks: self.blocks.iter().map(|b| b.exp()).collect(),
        }
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| max_abs_diff(b, &b.adjoint()))
            .fold(0.0, f64::max)
    }
}
