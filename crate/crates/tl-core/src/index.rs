//! Multi-indices and tensor types.
//!
//! A multi-index is a tuple of positive integers. The same representation
//! serves two roles: as a coordinate into a tensor (a cell address) and as a
//! tensor type (the tuple of extents). Coordinates are 1-based and compared
//! componentwise, which gives a partial order per rank; the box of all
//! indices `<=` a type is exactly the set of cells of a tensor of that type.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    /// Multi-index components and tensor extents must be positive.
    #[error("component {position} is zero; components must be >= 1")]
    ZeroComponent { position: usize },
}

/// A tuple of positive integers. Rank 0 (the empty tuple) is allowed and
/// addresses the single cell of a scalar.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    components: Vec<usize>,
}

impl MultiIndex {
    /// Builds a multi-index, rejecting zero components.
    pub fn new(components: Vec<usize>) -> Result<Self, IndexError> {
        if let Some(p) = components.iter().position(|&c| c == 0) {
            return Err(IndexError::ZeroComponent { position: p + 1 });
        }
        Ok(MultiIndex { components })
    }

    /// The empty tuple, the only index of a scalar.
    pub fn empty() -> Self {
        MultiIndex { components: Vec::new() }
    }

    /// Internal constructor for indices already known to be positive.
    pub(crate) fn from_raw(components: Vec<usize>) -> Self {
        debug_assert!(components.iter().all(|&c| c >= 1));
        MultiIndex { components }
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[usize] {
        &self.components
    }

    /// The l-th component, 1-based.
    ///
    /// Panics if `l` is out of range; callers are expected to have checked
    /// the rank.
    pub fn project(&self, l: usize) -> usize {
        assert!(
            l >= 1 && l <= self.rank(),
            "projection position {l} out of range for rank {}",
            self.rank()
        );
        self.components[l - 1]
    }

    /// Componentwise `<=`. Only defined between indices of equal rank;
    /// comparing across ranks is a caller bug and panics.
    pub fn leq(&self, other: &MultiIndex) -> bool {
        assert_eq!(
            self.rank(),
            other.rank(),
            "componentwise comparison requires equal ranks"
        );
        self.components
            .iter()
            .zip(&other.components)
            .all(|(a, b)| a <= b)
    }

    /// Membership in the half-open box `(lo, hi]`: true iff `self <= hi`
    /// and `self` is not `<= lo`.
    pub fn in_interval(&self, lo: &MultiIndex, hi: &MultiIndex) -> bool {
        !self.leq(lo) && self.leq(hi)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.components.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// The type of a tensor: the tuple of its extents. A rank-0 type is a
/// scalar. Every extent is at least 1; the constructor enforces this.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorType {
    extents: MultiIndex,
}

impl TensorType {
    pub fn new(extents: Vec<usize>) -> Result<Self, IndexError> {
        Ok(TensorType { extents: MultiIndex::new(extents)? })
    }

    pub fn scalar() -> Self {
        TensorType { extents: MultiIndex::empty() }
    }

    pub(crate) fn from_raw(extents: Vec<usize>) -> Self {
        TensorType { extents: MultiIndex::from_raw(extents) }
    }

    pub fn rank(&self) -> usize {
        self.extents.rank()
    }

    pub fn extents(&self) -> &[usize] {
        self.extents.components()
    }

    /// The extents viewed as a multi-index (the greatest cell address).
    pub fn as_index(&self) -> &MultiIndex {
        &self.extents
    }

    pub fn is_scalar(&self) -> bool {
        self.rank() == 0
    }

    /// Whether `i` addresses a cell of a tensor of this type.
    pub fn contains(&self, i: &MultiIndex) -> bool {
        i.leq(&self.extents)
    }

    /// Number of cells: the product of the extents, 1 for scalars.
    pub fn num_cells(&self) -> usize {
        self.extents.components().iter().product()
    }

    /// Rounds every extent up to the next multiple of `m`.
    pub fn round_up(&self, m: VectorLength) -> TensorType {
        TensorType::from_raw(
            self.extents
                .components()
                .iter()
                .map(|&d| round_up(d, m))
                .collect(),
        )
    }

    /// All cell addresses in row-major order: the last component varies
    /// fastest. A scalar yields exactly one index, the empty tuple.
    pub fn indices(&self) -> IndexIter {
        IndexIter::new(self.extents.components().to_vec())
    }
}

impl fmt::Display for TensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.extents.fmt(f)
    }
}

/// A padding block size: extents are rounded up to multiples of this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VectorLength(usize);

impl VectorLength {
    pub fn new(m: usize) -> Result<Self, IndexError> {
        if m == 0 {
            return Err(IndexError::ZeroComponent { position: 1 });
        }
        Ok(VectorLength(m))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for VectorLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Smallest multiple of `m` that is `>= d`. `round_up(0, m) == 0`.
pub fn round_up(d: usize, m: VectorLength) -> usize {
    let m = m.get();
    d.div_ceil(m) * m
}

/// Row-major enumeration of all indices of a box.
pub struct IndexIter {
    extents: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl IndexIter {
    fn new(extents: Vec<usize>) -> Self {
        let current = Some(vec![1; extents.len()]);
        IndexIter { extents, current }
    }
}

impl Iterator for IndexIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let current = self.current.as_mut()?;
        let item = MultiIndex::from_raw(current.clone());
        // Odometer step: bump the rightmost component that has room, reset
        // everything to its right. No room anywhere means we just yielded
        // the last index.
        let mut done = true;
        for p in (0..current.len()).rev() {
            if current[p] < self.extents[p] {
                current[p] += 1;
                for component in current.iter_mut().skip(p + 1) {
                    *component = 1;
                }
                done = false;
                break;
            }
        }
        if done {
            self.current = None;
        }
        Some(item)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(cs: &[usize]) -> MultiIndex {
        MultiIndex::new(cs.to_vec()).unwrap()
    }

    fn ty(ds: &[usize]) -> TensorType {
        TensorType::new(ds.to_vec()).unwrap()
    }

    fn m(v: usize) -> VectorLength {
        VectorLength::new(v).unwrap()
    }

    #[test]
    fn leq_is_componentwise() {
        assert!(idx(&[1, 2]).leq(&idx(&[2, 2])));
        assert!(!idx(&[2, 1]).leq(&idx(&[1, 2])));
        assert!(idx(&[]).leq(&idx(&[])));
    }

    #[test]
    #[should_panic(expected = "equal ranks")]
    fn leq_rejects_rank_mismatch() {
        let _ = idx(&[1]).leq(&idx(&[1, 1]));
    }

    #[test]
    fn interval_membership() {
        assert!(idx(&[4]).in_interval(&idx(&[3]), &idx(&[4])));
        assert!(!idx(&[3]).in_interval(&idx(&[3]), &idx(&[4])));
        assert!(idx(&[2, 5]).in_interval(&idx(&[2, 4]), &idx(&[4, 8])));
        // A scalar's padding interval is empty.
        assert!(!idx(&[]).in_interval(&idx(&[]), &idx(&[])));
    }

    #[test]
    fn projection_is_one_based() {
        assert_eq!(idx(&[300, 400, 500]).project(2), 400);
        assert_eq!(idx(&[7]).project(1), 7);
        assert_eq!(idx(&[2, 3, 4]).project(3), 4);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn projection_out_of_range() {
        let _ = idx(&[2, 3]).project(3);
    }

    #[test]
    fn zero_components_rejected() {
        assert_eq!(
            MultiIndex::new(vec![1, 0, 2]),
            Err(IndexError::ZeroComponent { position: 2 })
        );
        assert!(TensorType::new(vec![0]).is_err());
        assert!(VectorLength::new(0).is_err());
    }

    #[test]
    fn rounding_up() {
        assert_eq!(round_up(300, m(8)), 304);
        assert_eq!(round_up(16, m(8)), 16);
        assert_eq!(round_up(5, m(1)), 5);
        assert_eq!(round_up(0, m(4)), 0);
    }

    #[test]
    fn rounding_types() {
        assert_eq!(ty(&[3, 5]).round_up(m(4)), ty(&[4, 8]));
        assert_eq!(ty(&[]).round_up(m(8)), ty(&[]));
        assert_eq!(ty(&[8]).round_up(m(8)), ty(&[8]));
    }

    #[test]
    fn enumeration_is_row_major() {
        let got: Vec<MultiIndex> = ty(&[2, 2]).indices().collect();
        assert_eq!(
            got,
            vec![idx(&[1, 1]), idx(&[1, 2]), idx(&[2, 1]), idx(&[2, 2])]
        );
        let scalar: Vec<MultiIndex> = ty(&[]).indices().collect();
        assert_eq!(scalar, vec![idx(&[])]);
        let vec3: Vec<MultiIndex> = ty(&[3]).indices().collect();
        assert_eq!(vec3, vec![idx(&[1]), idx(&[2]), idx(&[3])]);
    }

    #[test]
    fn cell_counts() {
        assert_eq!(ty(&[]).num_cells(), 1);
        assert_eq!(ty(&[2, 3, 4]).num_cells(), 24);
    }
}
