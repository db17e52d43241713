//! Tensor storage.
//!
//! A store maps (variable, index) pairs to values. The domain is fixed when
//! the store is built: one box of cells per variable, and execution never
//! grows or shrinks it. Reads and writes are checked against the domain and
//! report a violation instead of inventing cells, so an evaluator bug that
//! reaches outside its footprint is caught rather than masked.

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::index::{MultiIndex, TensorType};
use crate::value::Value;

/// An out-of-domain access. Well-typed programs never trigger these; they
/// exist to trap evaluator bugs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AccessViolation {
    #[error("read of {id}{index} outside the store domain")]
    Read { id: String, index: MultiIndex },
    #[error("write of {id}{index} outside the store domain")]
    Write { id: String, index: MultiIndex },
}

/// A fault in the initial-value specification for a run.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InitError {
    #[error("initial values given for undeclared variable '{id}'")]
    UnknownIdentifier { id: String },
    #[error("initial values for '{id}' have shape {} but the variable is declared with {declared}", fmt_extents(given))]
    DeclaredShapeMismatch { id: String, given: Vec<usize>, declared: TensorType },
    #[error("initial values for '{id}' hold {actual} cells but its type {declared} has {expected}")]
    CellCountMismatch { id: String, declared: TensorType, expected: usize, actual: usize },
    #[error("input variable '{id}' is undefined at {index}; inputs must be fully defined")]
    InputUninitialized { id: String, index: MultiIndex },
}

fn fmt_extents(ds: &[usize]) -> String {
    let parts: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
    format!("[{}]", parts.join(" "))
}

struct TensorData {
    shape: TensorType,
    /// Row-major over `shape.indices()`.
    cells: Vec<Value>,
}

impl TensorData {
    fn offset(&self, index: &MultiIndex) -> Option<usize> {
        if index.rank() != self.shape.rank() || !self.shape.contains(index) {
            return None;
        }
        let mut offset = 0;
        for (i, d) in index.components().iter().zip(self.shape.extents()) {
            offset = offset * d + (i - 1);
        }
        Some(offset)
    }
}

/// A fixed-domain map from (variable, index) to value.
#[derive(Default)]
pub struct Store {
    tensors: IndexMap<String, TensorData>,
}

impl Store {
    pub fn empty() -> Store {
        Store::default()
    }

    /// Adds a tensor to the domain with the given cell contents, which must
    /// be in row-major order and cover the shape exactly. Building the
    /// domain is the store former's job, so this is not domain-checked like
    /// reads and writes; re-inserting a name or supplying a wrong-sized
    /// value list is a caller bug.
    pub fn insert_tensor(&mut self, id: &str, shape: TensorType, cells: Vec<Value>) {
        assert_eq!(cells.len(), shape.num_cells(), "cell list must cover the shape");
        assert!(
            !self.tensors.contains_key(id),
            "tensor '{id}' is already in the store"
        );
        self.tensors.insert(id.to_string(), TensorData { shape, cells });
    }

    pub fn read(&self, id: &str, index: &MultiIndex) -> Result<&Value, AccessViolation> {
        self.tensors
            .get(id)
            .and_then(|t| t.offset(index).map(|o| &t.cells[o]))
            .ok_or_else(|| AccessViolation::Read { id: id.to_string(), index: index.clone() })
    }

    pub fn write(
        &mut self,
        id: &str,
        index: &MultiIndex,
        value: Value,
    ) -> Result<(), AccessViolation> {
        let slot = self
            .tensors
            .get_mut(id)
            .and_then(|t| t.offset(index).map(|o| &mut t.cells[o]));
        match slot {
            Some(cell) => {
                *cell = value;
                Ok(())
            }
            None => Err(AccessViolation::Write { id: id.to_string(), index: index.clone() }),
        }
    }

    /// The shape a variable is stored with, if it is in the domain.
    pub fn shape_of(&self, id: &str) -> Option<&TensorType> {
        self.tensors.get(id).map(|t| &t.shape)
    }

    /// Variables in insertion order with their stored shapes.
    pub fn tensors(&self) -> impl Iterator<Item = (&str, &TensorType)> {
        self.tensors.iter().map(|(id, t)| (id.as_str(), &t.shape))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// The domain as (variable, shape) pairs, for comparing stores. Two
    /// stores have equal domains iff these listings are equal as sets; the
    /// listing is sorted so equality is directly comparable.
    pub fn domain(&self) -> Vec<(String, TensorType)> {
        let mut d: Vec<(String, TensorType)> = self
            .tensors
            .iter()
            .map(|(id, t)| (id.clone(), t.shape.clone()))
            .collect();
        d.sort_by(|a, b| a.0.cmp(&b.0));
        d
    }
}

impl fmt::Debug for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (id, t) in &self.tensors {
            map.entry(&format!("{id} : {}", t.shape), &t.cells.len());
        }
        map.finish()
    }
}

/// Initial cell values for a run, keyed by variable. Each entry is a dense
/// row-major list; a variable without an entry starts fully undefined. An
/// entry may carry the shape it was written against, which is then checked
/// against the declaration when the store is built.
#[derive(Debug, Clone, Default)]
pub struct InitSpec {
    entries: IndexMap<String, InitEntry>,
}

#[derive(Debug, Clone)]
pub struct InitEntry {
    pub declared_extents: Option<Vec<usize>>,
    pub values: Vec<Value>,
}

impl InitSpec {
    pub fn empty() -> InitSpec {
        InitSpec::default()
    }

    /// Sets the initial values for one variable, replacing any previous
    /// entry.
    pub fn set(&mut self, id: &str, values: Vec<Value>) {
        self.entries
            .insert(id.to_string(), InitEntry { declared_extents: None, values });
    }

    pub fn set_with_extents(&mut self, id: &str, extents: Vec<usize>, values: Vec<Value>) {
        self.entries.insert(
            id.to_string(),
            InitEntry { declared_extents: Some(extents), values },
        );
    }

    pub fn get(&self, id: &str) -> Option<&InitEntry> {
        self.entries.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
