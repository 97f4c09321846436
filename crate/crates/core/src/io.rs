//! JSON file formats.
//!
//! Matrices are row-major nested arrays with complex entries as `[re, im]`.
//! Index systems are `[{"label": …, "dim": …}, …]` in label order.
//!
//! | file | shape |
//! |------|-------|
//! | element | `{"index", "blocks": {label: matrix}}` |
//! | block map | `{"domain", "codomain", "blocks": [{"alpha", "beta", "matrix"}]}` |
//! | quantum semigroup | `{"index", "delta": [{"alpha", "beta", "gamma", "matrix"}], "provenance"}` |
//! | classical table | `{"labels": […], "table": {"x,y": "z"}}` |
//! | group dual | `{"group": {"labels", "table"}, "irreps": {label: [matrix per element]}}` |
//! | state | `{"index", "densities": {label: matrix}}` |
//!
//! Every block must be present in element and state files, zeros included.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::blockmap::BlockMap;
use crate::coalgebra::{Comultiplication, MultiplicationTable, Provenance, QuantumSemigroup};
use crate::error::{Error, Result};
use crate::mean::State;
use crate::multimatrix::{ComplexMatrix, IndexSystem, MMElement, C64};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

/// Irreducible representations: a label and one matrix per group element.
pub type Irreps = Vec<(String, Vec<ComplexMatrix>)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub dim: usize,
    pub label: String,
}

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format(
            "matrix must be a non-empty rectangular array".into(),
        ));
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |i, j| {
        let [re, im] = rows[i][j];
        C64::new(re, im)
    }))
}

pub fn index_to_json(index: &IndexSystem) -> Vec<IndexEntry> {
    index
        .labels()
        .iter()
        .zip(index.dims())
        .map(|(label, &dim)| IndexEntry {
            label: label.clone(),
            dim,
        })
        .collect()
}

pub fn index_from_json(entries: &[IndexEntry]) -> Result<IndexSystem> {
    IndexSystem::new(entries.iter().map(|e| (e.label.clone(), e.dim)))
}

fn blocks_by_label(
    index: &IndexSystem,
    map: &BTreeMap<String, JsonMatrix>,
    what: &str,
) -> Result<Vec<ComplexMatrix>> {
    for label in map.keys() {
        index.position(label)?;
    }
    index
        .labels()
        .iter()
        .map(|label| {
            let m = map
                .get(label)
                .ok_or_else(|| Error::MissingBlock(format!("{what} for label `{label}`")))?;
            matrix_from_json(m)
        })
        .collect()
}

fn labelled_blocks(index: &IndexSystem, blocks: &[ComplexMatrix]) -> BTreeMap<String, JsonMatrix> {
    index
        .labels()
        .iter()
        .cloned()
        .zip(blocks.iter().map(matrix_to_json))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementFile {
    pub blocks: BTreeMap<String, JsonMatrix>,
    pub index: Vec<IndexEntry>,
}

impl ElementFile {
    pub fn from_element(f: &MMElement) -> Self {
        Self {
            index: index_to_json(f.index()),
            blocks: labelled_blocks(f.index(), f.blocks()),
        }
    }

    pub fn to_element(&self) -> Result<MMElement> {
        let index = index_from_json(&self.index)?;
        let blocks = blocks_by_label(&index, &self.blocks, "block")?;
        MMElement::from_blocks(&index, blocks)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapBlock {
    pub alpha: String,
    pub beta: String,
    pub matrix: JsonMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockMapFile {
    pub blocks: Vec<MapBlock>,
    pub codomain: Vec<IndexEntry>,
    pub domain: Vec<IndexEntry>,
}

impl BlockMapFile {
    pub fn from_map(t: &BlockMap) -> Self {
        Self {
            domain: index_to_json(t.domain()),
            codomain: index_to_json(t.codomain()),
            blocks: t
                .blocks()
                .iter()
                .map(|(&(a, b), m)| MapBlock {
                    alpha: t.domain().label(a).to_string(),
                    beta: t.codomain().label(b).to_string(),
                    matrix: matrix_to_json(m),
                })
                .collect(),
        }
    }

    pub fn to_map(&self) -> Result<BlockMap> {
        let domain = index_from_json(&self.domain)?;
        let codomain = index_from_json(&self.codomain)?;
        let mut blocks = BTreeMap::new();
        for b in &self.blocks {
            let key = (domain.position(&b.alpha)?, codomain.position(&b.beta)?);
            if blocks.insert(key, matrix_from_json(&b.matrix)?).is_some() {
                return Err(Error::Format(format!(
                    "duplicate block ({}, {})",
                    b.alpha, b.beta
                )));
            }
        }
        BlockMap::new(&domain, &codomain, blocks)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaBlock {
    pub alpha: String,
    pub beta: String,
    pub gamma: String,
    pub matrix: JsonMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumSemigroupFile {
    pub delta: Vec<DeltaBlock>,
    pub index: Vec<IndexEntry>,
    pub provenance: String,
}

impl QuantumSemigroupFile {
    pub fn from_qs(qs: &QuantumSemigroup) -> Self {
        let index = qs.index();
        Self {
            index: index_to_json(index),
            delta: qs
                .delta()
                .blocks()
                .map(|((a, b, g), m)| DeltaBlock {
                    alpha: index.label(a).to_string(),
                    beta: index.label(b).to_string(),
                    gamma: index.label(g).to_string(),
                    matrix: matrix_to_json(m),
                })
                .collect(),
            provenance: qs.provenance().as_str().to_string(),
        }
    }

    /// The semigroup described by the file, not yet validated.
    pub fn to_qs(&self) -> Result<QuantumSemigroup> {
        let index = index_from_json(&self.index)?;
        let mut blocks = BTreeMap::new();
        for d in &self.delta {
            let key = (
                index.position(&d.alpha)?,
                index.position(&d.beta)?,
                index.position(&d.gamma)?,
            );
            if blocks.insert(key, matrix_from_json(&d.matrix)?).is_some() {
                return Err(Error::Format(format!(
                    "duplicate Δ block ({}, {}, {})",
                    d.alpha, d.beta, d.gamma
                )));
            }
        }
        let provenance: Provenance = self.provenance.parse()?;
        Ok(QuantumSemigroup::new(
            Comultiplication::new(&index, blocks)?,
            provenance,
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    pub labels: Vec<String>,
    pub table: BTreeMap<String, String>,
}

impl TableFile {
    pub fn from_table(t: &MultiplicationTable) -> Self {
        Self {
            labels: t.labels().to_vec(),
            table: t
                .entries()
                .into_iter()
                .map(|((x, y), z)| (format!("{x},{y}"), z))
                .collect(),
        }
    }

    pub fn to_table(&self) -> Result<MultiplicationTable> {
        if let Some(bad) = self.labels.iter().find(|l| l.contains(',')) {
            return Err(Error::InvalidTable(format!(
                "label `{bad}` contains a comma"
            )));
        }
        let mut entries = HashMap::new();
        for (key, z) in &self.table {
            let (x, y) = key.split_once(',').ok_or_else(|| {
                Error::InvalidTable(format!("key `{key}` is not of the form `x,y`"))
            })?;
            entries.insert((x.to_string(), y.to_string()), z.clone());
        }
        MultiplicationTable::new(self.labels.clone(), &entries)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupDualFile {
    pub group: TableFile,
    /// Kept in file order, which fixes the label order of the dual.
    #[serde(with = "ordered_map")]
    pub irreps: Vec<(String, Vec<JsonMatrix>)>,
}

impl GroupDualFile {
    pub fn new(group: &MultiplicationTable, irreps: &[(String, Vec<ComplexMatrix>)]) -> Self {
        Self {
            group: TableFile::from_table(group),
            irreps: irreps
                .iter()
                .map(|(l, mats)| (l.clone(), mats.iter().map(matrix_to_json).collect()))
                .collect(),
        }
    }

    pub fn parts(&self) -> Result<(MultiplicationTable, Irreps)> {
        let group = self.group.to_table()?;
        let irreps = self
            .irreps
            .iter()
            .map(|(l, mats)| {
                Ok((
                    l.clone(),
                    mats.iter()
                        .map(matrix_from_json)
                        .collect::<Result<Vec<_>>>()?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((group, irreps))
    }
}

/// A JSON object read and written as an ordered list of entries.
mod ordered_map {
    use std::fmt;
    use std::marker::PhantomData;

    use serde::de::{Deserialize, Deserializer, Error, MapAccess, Visitor};
    use serde::ser::{Serialize, SerializeMap, Serializer};

    pub fn serialize<S: Serializer, V: Serialize>(
        entries: &[(String, V)],
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(entries.len()))?;
        for (k, v) in entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }

    struct Entries<V>(PhantomData<V>);

    impl<'de, V: Deserialize<'de>> Visitor<'de> for Entries<V> {
        type Value = Vec<(String, V)>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a JSON object")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
            let mut out: Vec<(String, V)> = Vec::new();
            while let Some((k, v)) = access.next_entry::<String, V>()? {
                if out.iter().any(|(seen, _)| *seen == k) {
                    return Err(A::Error::custom(format!("duplicate key `{k}`")));
                }
                out.push((k, v));
            }
            Ok(out)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>, V: Deserialize<'de>>(
        d: D,
    ) -> Result<Vec<(String, V)>, D::Error> {
        d.deserialize_map(Entries(PhantomData))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub densities: BTreeMap<String, JsonMatrix>,
    pub index: Vec<IndexEntry>,
}

impl StateFile {
    pub fn from_state(m: &State) -> Self {
        Self {
            index: index_to_json(m.index()),
            densities: labelled_blocks(m.index(), m.densities()),
        }
    }

    pub fn to_state(&self) -> Result<State> {
        let index = index_from_json(&self.index)?;
        let densities = blocks_by_label(&index, &self.densities, "density")?;
        State::new(&index, densities)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline. File structs declare their fields
/// in sorted order and `Value` maps are sorted, so keys come out sorted
/// except where order carries meaning (irreps).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::random::random_element;
    use crate::DEFAULT_TOL;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn missing_block_rejected() {
        let text = r#"{"index":[{"label":"a","dim":1},{"label":"b","dim":2}],
                       "blocks":{"a":[[[1.0,0.0]]]}}"#;
        let file: ElementFile = serde_json::from_str(text).unwrap();
        assert!(matches!(file.to_element(), Err(Error::MissingBlock(_))));
    }

    #[test]
    fn wrong_shape_rejected() {
        let text = r#"{"index":[{"label":"a","dim":2}],"blocks":{"a":[[[1.0,0.0]]]}}"#;
        let file: ElementFile = serde_json::from_str(text).unwrap();
        assert!(matches!(
            file.to_element(),
            Err(Error::MalformedBlock { .. })
        ));
    }

    #[test]
    fn quantum_semigroup_file_roundtrip_is_exact() {
        let qs = builtin::s3_dual().unwrap();
        let file = QuantumSemigroupFile::from_qs(&qs);
        let text = to_json_string(&file).unwrap();
        let back: QuantumSemigroupFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
        let qs2 = back.to_qs().unwrap().into_validated(DEFAULT_TOL).unwrap();
        for ((k1, m1), (k2, m2)) in qs.delta().blocks().zip(qs2.delta().blocks()) {
            assert_eq!(k1, k2);
            assert_eq!(m1, m2);
        }
        assert_eq!(qs2.provenance(), Provenance::GroupDual);
    }

    #[test]
    fn table_and_group_files() {
        let t = builtin::s3_table();
        let back = TableFile::from_table(&t).to_table().unwrap();
        assert_eq!(back, t);
        let file = GroupDualFile::new(&t, &builtin::s3_irreps());
        let (g, irreps) = file.parts().unwrap();
        let qs = QuantumSemigroup::from_group_dual(&g, &irreps, DEFAULT_TOL).unwrap();
        assert_eq!(qs.index().len(), 3);
    }

    #[test]
    fn block_map_file_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let i = IndexSystem::new([("a", 1), ("b", 2)]).unwrap();
        let t = crate::random::random_block_map(&i, &i, &mut rng);
        let back = BlockMapFile::from_map(&t).to_map().unwrap();
        assert_eq!(back.max_block_diff(&t).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn element_json_roundtrip_is_bit_exact(seed in any::<u64>(), scale in -1e6f64..1e6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let i = IndexSystem::new([("a", 1), ("b", 3)]).unwrap();
            let f = random_element(&i, &mut rng).scale(C64::new(scale, 0.0));
            let text = to_json_string(&ElementFile::from_element(&f)).unwrap();
            let back: ElementFile = serde_json::from_str(&text).unwrap();
            let g = back.to_element().unwrap();
            for (x, y) in f.blocks().iter().zip(g.blocks()) {
                for (p, q) in x.iter().zip(y.iter()) {
                    prop_assert_eq!(p.re.to_bits(), q.re.to_bits());
                    prop_assert_eq!(p.im.to_bits(), q.im.to_bits());
                }
            }
        }
    }
}
