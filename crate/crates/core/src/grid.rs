//! Unit domain, dyadic cells and subdomain labeling.
//!
//! The physical interval `[a, b)` is rescaled onto `[0, 1)` and discretized
//! with `N = 2^n` mesh points `x_k = k / N`. Bit `a = 1` of `k` is its most
//! significant bit, so `k = Σ_a k_a 2^(n-a)`. The first `l` bits of `k` select
//! one of the `L = 2^l` uniform cells `[r/L, (r+1)/L)`, and a [`CellPartition`]
//! groups those cells into `K` subdomains.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

/// Affine map between the physical interval `[a, b)` and the unit interval,
/// together with the qubit count of the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainMap {
    a: f64,
    b: f64,
    n: u32,
}

impl DomainMap {
    pub fn new(a: f64, b: f64, n: u32) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return arg(format!("domain [{a}, {b}) must satisfy b > a"));
        }
        if n == 0 || n > 40 {
            return arg(format!("qubit count n = {n} outside 1..=40"));
        }
        Ok(DomainMap { a, b, n })
    }

    /// The unit domain `[0, 1)` with `n` qubits.
    pub fn unit(n: u32) -> Result<Self> {
        Self::new(0.0, 1.0, n)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of mesh points `N = 2^n`.
    pub fn points(&self) -> usize {
        1usize << self.n
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn with_qubits(&self, n: u32) -> Result<Self> {
        Self::new(self.a, self.b, n)
    }

    pub fn to_physical(&self, u: f64) -> f64 {
        self.a + (self.b - self.a) * u
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.a) / (self.b - self.a)
    }

    /// Unit coordinate of mesh point `k`.
    pub fn unit_point(&self, k: usize) -> f64 {
        k as f64 / self.points() as f64
    }

    /// Physical coordinate of mesh point `k`.
    pub fn mesh_point(&self, k: usize) -> f64 {
        self.to_physical(self.unit_point(k))
    }
}

/// Half-open dyadic interval `[index / 2^depth, (index + 1) / 2^depth)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub depth: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub const UNIT: DyadicInterval = DyadicInterval { depth: 0, index: 0 };

    pub fn new(depth: u32, index: u64) -> Result<Self> {
        if depth > 62 || index >= 1u64 << depth {
            return Err(Error::Format(format!(
                "dyadic interval index {index} out of range at depth {depth}"
            )));
        }
        Ok(DyadicInterval { depth, index })
    }

    /// Recovers a dyadic interval from floating point endpoints. Fails unless
    /// `right - left` is a power of two and `left` is a multiple of it.
    pub fn from_endpoints(left: f64, right: f64) -> Result<Self> {
        let width = right - left;
        if !(left >= 0.0 && right <= 1.0 && width > 0.0) {
            return Err(Error::Format(format!("[{left}, {right}) is not inside [0, 1)")));
        }
        let depth = (-width.log2()).round();
        if !(0.0..=62.0).contains(&depth) || (width - (-depth).exp2()).abs() > 0.0 {
            return Err(Error::Format(format!("[{left}, {right}) has non-dyadic width")));
        }
        let depth = depth as u32;
        let scaled = left * (1u64 << depth) as f64;
        if scaled.fract() != 0.0 {
            return Err(Error::Format(format!("[{left}, {right}) has a non-dyadic endpoint")));
        }
        Self::new(depth, scaled as u64)
    }

    pub fn left(&self) -> f64 {
        self.index as f64 / (1u64 << self.depth) as f64
    }

    pub fn right(&self) -> f64 {
        (self.index + 1) as f64 / (1u64 << self.depth) as f64
    }

    pub fn width(&self) -> f64 {
        1.0 / (1u64 << self.depth) as f64
    }

    pub fn contains(&self, u: f64) -> bool {
        self.left() <= u && u < self.right()
    }

    pub fn children(&self) -> (DyadicInterval, DyadicInterval) {
        let d = self.depth + 1;
        (
            DyadicInterval { depth: d, index: 2 * self.index },
            DyadicInterval { depth: d, index: 2 * self.index + 1 },
        )
    }

    /// Cells `[first, last)` this interval covers at a finer depth.
    fn cell_range(&self, depth: u32) -> (u64, u64) {
        let shift = depth - self.depth;
        (self.index << shift, (self.index + 1) << shift)
    }
}

/// Partition of the `L = 2^l` uniform cells into `K` subdomains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellPartition {
    l: u32,
    labels: Vec<u32>,
    k: usize,
}

impl CellPartition {
    /// Builds a partition from a label per cell; the labels must hit every
    /// value in `0..K` where `K = max + 1`.
    pub fn new(l: u32, labels: Vec<u32>) -> Result<Self> {
        if l > 30 || labels.len() != 1usize << l {
            return arg(format!("expected 2^{l} labels, got {}", labels.len()));
        }
        let k = labels.iter().copied().max().unwrap_or(0) as usize + 1;
        let mut seen = vec![false; k];
        for &s in &labels {
            seen[s as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|&hit| !hit) {
            return arg(format!("label {missing} is never used; partition must be onto 0..{k}"));
        }
        Ok(CellPartition { l, labels, k })
    }

    /// Every cell is its own subdomain: `K = L`, `labels[r] = r`.
    pub fn uniform(l: u32) -> Self {
        CellPartition { l, labels: (0..1u32 << l).collect(), k: 1usize << l }
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// Number of cells `L`.
    pub fn cells(&self) -> usize {
        self.labels.len()
    }

    /// Number of subdomains `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Label width `m = ceil(log2 K)`.
    pub fn m(&self) -> u32 {
        label_width(self.k)
    }

    /// `M = 2^m`.
    pub fn big_m(&self) -> usize {
        1usize << self.m()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn is_uniform(&self) -> bool {
        self.labels.iter().enumerate().all(|(r, &s)| r == s as usize)
    }

    /// `S(k)` for mesh point `k` on an `n`-qubit grid.
    pub fn label(&self, k: usize, n: u32) -> Result<u32> {
        Ok(self.labels[cell_index(k, n, self.l)?])
    }

    /// Cells belonging to subdomain `s`.
    pub fn cells_of(&self, s: u32) -> Vec<usize> {
        (0..self.cells()).filter(|&r| self.labels[r] == s).collect()
    }

    /// Reads contiguous label runs back as dyadic intervals, left to right.
    /// Fails if a run is not a dyadic interval.
    pub fn leaf_intervals(&self) -> Result<Vec<DyadicInterval>> {
        let mut out = Vec::new();
        let mut start = 0usize;
        let cells = self.cells();
        for r in 1..=cells {
            if r == cells || self.labels[r] != self.labels[start] {
                let width = r - start;
                if !width.is_power_of_two() || start % width != 0 {
                    return Err(Error::Format(format!("label run over cells {start}..{r} is not dyadic")));
                }
                let depth = self.l - width.trailing_zeros();
                out.push(DyadicInterval::new(depth, (start / width) as u64)?);
                start = r;
            }
        }
        Ok(out)
    }
}

/// `ceil(log2 k)` for `k >= 1`.
pub fn label_width(k: usize) -> u32 {
    if k <= 1 {
        0
    } else {
        usize::BITS - (k - 1).leading_zeros()
    }
}

/// Index `r` of the cell containing mesh point `k`: its first `l` bits.
pub fn cell_index(k: usize, n: u32, l: u32) -> Result<usize> {
    if l > n {
        return arg(format!("cell depth l = {l} exceeds qubit count n = {n}"));
    }
    if n >= usize::BITS || k >= 1usize << n {
        return arg(format!("mesh index {k} out of range for n = {n}"));
    }
    Ok(k >> (n - l))
}

/// `S(k)` for mesh point `k`.
pub fn label(partition: &CellPartition, k: usize, n: u32) -> Result<u32> {
    partition.label(k, n)
}

/// Turns disjoint dyadic leaves covering `[0, 1)` into a cell partition.
/// Leaves are labeled left to right.
pub fn partition_from_leaves(leaves: &[DyadicInterval]) -> Result<CellPartition> {
    if leaves.is_empty() {
        return Err(Error::Format("no leaves".into()));
    }
    let l = leaves.iter().map(|iv| iv.depth).max().unwrap_or(0);
    if l > 30 {
        return Err(Error::Format(format!("leaf depth {l} too deep")));
    }
    let mut sorted: Vec<DyadicInterval> = leaves.to_vec();
    sorted.sort_by_key(|iv| iv.cell_range(l).0);
    let mut labels = Vec::with_capacity(1 << l);
    let mut next = 0u64;
    for (s, iv) in sorted.iter().enumerate() {
        let (first, last) = iv.cell_range(l);
        if first != next {
            let what = if first > next { "gap" } else { "overlap" };
            return Err(Error::Format(format!(
                "{what} at {} between leaves",
                next as f64 / (1u64 << l) as f64
            )));
        }
        labels.extend(std::iter::repeat_n(s as u32, (last - first) as usize));
        next = last;
    }
    if next != 1u64 << l {
        return Err(Error::Format("leaves do not reach 1".into()));
    }
    CellPartition::new(l, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(depth: u32, index: u64) -> DyadicInterval {
        DyadicInterval::new(depth, index).unwrap()
    }

    #[test]
    fn cell_index_examples() {
        assert_eq!(cell_index(0, 5, 3).unwrap(), 0);
        assert_eq!(cell_index(31, 5, 3).unwrap(), 7);
        assert_eq!(cell_index(13, 5, 3).unwrap(), 3);
        assert!(cell_index(32, 5, 3).is_err());
        assert!(cell_index(0, 3, 5).is_err());
    }

    fn appendix_partition() -> CellPartition {
        // cells 000,001,010 -> 0; 011,100,101,110 -> 1; 111 -> 2
        CellPartition::new(3, vec![0, 0, 0, 1, 1, 1, 1, 2]).unwrap()
    }

    #[test]
    fn labeling_example_partition() {
        let p = appendix_partition();
        assert_eq!(p.k(), 3);
        assert_eq!(p.m(), 2);
        assert_eq!(p.label(0b100_00, 5).unwrap(), 1);
        assert_eq!(p.label(0b111_01, 5).unwrap(), 2);
        assert!(p.label(0, 2).is_err());
    }

    #[test]
    fn uniform_label_is_cell_index() {
        let p = CellPartition::uniform(3);
        for k in 0..64 {
            assert_eq!(p.label(k, 6).unwrap() as usize, cell_index(k, 6, 3).unwrap());
        }
    }

    #[test]
    fn partition_rejects_unused_label() {
        assert!(CellPartition::new(1, vec![0, 2]).is_err());
        assert!(CellPartition::new(2, vec![0, 1]).is_err());
    }

    #[test]
    fn leaves_examples() {
        let p = partition_from_leaves(&[DyadicInterval::UNIT]).unwrap();
        assert_eq!((p.l(), p.cells(), p.k(), p.labels()), (0, 1, 1, &[0u32][..]));

        let p = partition_from_leaves(&[iv(1, 1), iv(1, 0)]).unwrap();
        assert_eq!((p.l(), p.k(), p.labels()), (1, 2, &[0u32, 1][..]));

        let p = partition_from_leaves(&[iv(2, 0), iv(2, 1), iv(1, 1)]).unwrap();
        assert_eq!((p.l(), p.k(), p.m()), (2, 3, 2));
        assert_eq!(p.labels(), &[0, 1, 2, 2]);
    }

    #[test]
    fn leaves_gaps_and_overlaps() {
        assert!(matches!(partition_from_leaves(&[iv(1, 0)]), Err(Error::Format(_))));
        assert!(matches!(partition_from_leaves(&[iv(1, 0), iv(2, 1), iv(1, 1)]), Err(Error::Format(_))));
        assert!(matches!(partition_from_leaves(&[iv(2, 0), iv(2, 2), iv(1, 1)]), Err(Error::Format(_))));
        assert!(DyadicInterval::from_endpoints(0.25, 0.6).is_err());
        assert!(DyadicInterval::from_endpoints(0.25, 0.75).is_err());
        assert_eq!(DyadicInterval::from_endpoints(0.5, 0.75).unwrap(), iv(2, 2));
    }

    #[test]
    fn exhaustive_membership() {
        // every mesh point lies in exactly one cell and one subdomain
        let p = appendix_partition();
        for n in 3..=12 {
            for k in 0..1usize << n {
                let u = k as f64 / (1usize << n) as f64;
                let r = cell_index(k, n, 3).unwrap();
                let cells: Vec<usize> = (0..8).filter(|&c| iv(3, c as u64).contains(u)).collect();
                assert_eq!(cells, vec![r]);
                let s = p.label(k, n).unwrap();
                let subdomains: Vec<u32> =
                    (0..3).filter(|&t| p.cells_of(t).iter().any(|&c| iv(3, c as u64).contains(u))).collect();
                assert_eq!(subdomains, vec![s]);
            }
        }
    }

    #[test]
    fn domain_map_roundtrip() {
        let d = DomainMap::new(-5.0, 5.0, 10).unwrap();
        assert_eq!(d.points(), 1024);
        assert_eq!(d.mesh_point(0), -5.0);
        assert!((d.to_unit(d.mesh_point(700)) - d.unit_point(700)).abs() < 1e-15);
        assert!(DomainMap::new(1.0, 1.0, 3).is_err());
    }

    use proptest::prelude::*;

    fn leaves_strategy() -> impl Strategy<Value = Vec<DyadicInterval>> {
        // random bisection tree encoded as split decisions
        prop::collection::vec(any::<bool>(), 1..64).prop_map(|bits| {
            let mut leaves = Vec::new();
            let mut stack = vec![DyadicInterval::UNIT];
            let mut it = bits.into_iter();
            while let Some(node) = stack.pop() {
                if node.depth < 6 && it.next().unwrap_or(false) {
                    let (a, b) = node.children();
                    stack.push(b);
                    stack.push(a);
                } else {
                    leaves.push(node);
                }
            }
            leaves
        })
    }

    proptest! {
        #[test]
        fn leaves_round_trip(leaves in leaves_strategy()) {
            let p = partition_from_leaves(&leaves).unwrap();
            prop_assert_eq!(p.k(), leaves.len());
            let mut sorted = leaves.clone();
            sorted.sort_by(|a, b| a.left().partial_cmp(&b.left()).unwrap());
            prop_assert_eq!(p.leaf_intervals().unwrap(), sorted);
            // contiguous runs: labels non-decreasing and surjective
            prop_assert!(p.labels().windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1));
        }
    }
}
