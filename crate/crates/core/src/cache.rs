//! Per-draw contingency tables kept in step with a working partition.
//!
//! The working partition may leave items unallocated; every cached table
//! only counts allocated items, so losses evaluated on the cache ignore the
//! rest. Allocating, deallocating or moving an item updates four counts per
//! draw.

use crate::error::{Error, Result};
use crate::partition::{ClusterLabels, ContingencyTable, DrawsMatrix};

const UNALLOCATED: u32 = u32::MAX;

/// Outcome of [`TableCache::deallocate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Removal {
    /// Cluster the item left.
    pub from: usize,
    /// The cluster became empty and was compacted away.
    pub emptied: bool,
    /// When compaction relocated the last cluster into `from`, its old index.
    pub relocated: Option<usize>,
}

/// Working partition plus one contingency table per draw.
///
/// Rows of table `h` are the clusters of draw `h`; columns are the clusters
/// of the working partition. Column indices are dense: when a cluster
/// empties, the last cluster takes over its index.
#[derive(Debug, Clone)]
pub struct TableCache<'a> {
    draws: &'a DrawsMatrix,
    capacity: usize,
    assignment: Vec<u32>,
    members: Vec<Vec<u32>>,
    position: Vec<u32>,
    cells: Vec<u32>,
    cell_offsets: Vec<usize>,
    row_sums: Vec<u32>,
    row_offsets: Vec<usize>,
    n_allocated: usize,
}

impl<'a> TableCache<'a> {
    /// Empty working partition holding at most `max_clusters` clusters.
    pub fn new(draws: &'a DrawsMatrix, max_clusters: usize) -> Self {
        let capacity = max_clusters.max(1);
        let mut cell_offsets = Vec::with_capacity(draws.n_draws());
        let mut row_offsets = Vec::with_capacity(draws.n_draws());
        let (mut cells_len, mut rows_len) = (0, 0);
        for h in 0..draws.n_draws() {
            cell_offsets.push(cells_len);
            row_offsets.push(rows_len);
            cells_len += draws.n_clusters(h) * capacity;
            rows_len += draws.n_clusters(h);
        }
        Self {
            draws,
            capacity,
            assignment: vec![UNALLOCATED; draws.n_items()],
            members: Vec::with_capacity(capacity),
            position: vec![0; draws.n_items()],
            cells: vec![0; cells_len],
            cell_offsets,
            row_sums: vec![0; rows_len],
            row_offsets,
            n_allocated: 0,
        }
    }

    /// Cache with every item allocated according to `labels`.
    pub fn from_labels(
        draws: &'a DrawsMatrix,
        labels: &ClusterLabels,
        max_clusters: usize,
    ) -> Result<Self> {
        if labels.len() != draws.n_items() {
            return Err(Error::LengthMismatch {
                expected: draws.n_items(),
                found: labels.len(),
            });
        }
        if labels.num_clusters() > max_clusters {
            return Err(Error::InvalidConfig(format!(
                "partition has {} clusters, more than the maximum {}",
                labels.num_clusters(),
                max_clusters
            )));
        }
        let mut cache = Self::new(draws, max_clusters);
        for (item, c) in labels.zero_based().enumerate() {
            cache.allocate(item, c as usize);
        }
        Ok(cache)
    }

    pub fn draws(&self) -> &'a DrawsMatrix {
        self.draws
    }

    pub fn n_items(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_allocated(&self) -> usize {
        self.n_allocated
    }

    /// Number of (nonempty) clusters in the working partition.
    pub fn n_clusters(&self) -> usize {
        self.members.len()
    }

    /// Maximum number of clusters the cache can hold.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn cluster_of(&self, item: usize) -> Option<usize> {
        let c = self.assignment[item];
        (c != UNALLOCATED).then_some(c as usize)
    }

    pub fn cluster_size(&self, cluster: usize) -> usize {
        self.members[cluster].len()
    }

    pub fn members(&self, cluster: usize) -> &[u32] {
        &self.members[cluster]
    }

    /// Current cluster of every item, `None` for unallocated items.
    pub fn assignment(&self) -> Vec<Option<usize>> {
        (0..self.n_items()).map(|i| self.cluster_of(i)).collect()
    }

    /// Count of draw-`draw` cluster `row` items in working cluster `col`.
    pub fn cell(&self, draw: usize, row: usize, col: usize) -> u32 {
        self.cells[self.cell_offsets[draw] + row * self.capacity + col]
    }

    /// Row of table `draw` restricted to the active columns.
    pub fn cell_row(&self, draw: usize, row: usize) -> &[u32] {
        let start = self.cell_offsets[draw] + row * self.capacity;
        &self.cells[start..start + self.members.len()]
    }

    /// Allocated items of draw `draw` that fall in its cluster `row`.
    pub fn row_sum(&self, draw: usize, row: usize) -> u32 {
        self.row_sums[self.row_offsets[draw] + row]
    }

    pub fn row_sums(&self, draw: usize) -> &[u32] {
        let start = self.row_offsets[draw];
        &self.row_sums[start..start + self.draws.n_clusters(draw)]
    }

    /// Places an unallocated item in `cluster`; `cluster == n_clusters()`
    /// opens a new cluster.
    ///
    /// # Panics
    /// If the item is already allocated, the cluster index is out of range,
    /// or a new cluster would exceed the capacity.
    pub fn allocate(&mut self, item: usize, cluster: usize) {
        assert_eq!(self.assignment[item], UNALLOCATED, "item {item} already allocated");
        let q = self.members.len();
        assert!(cluster <= q, "cluster {cluster} out of range");
        if cluster == q {
            assert!(q < self.capacity, "cluster capacity {} exceeded", self.capacity);
            self.members.push(Vec::new());
        }
        self.assignment[item] = cluster as u32;
        self.position[item] = self.members[cluster].len() as u32;
        self.members[cluster].push(item as u32);
        self.n_allocated += 1;
        let labels = self.draws.item_labels(item);
        for (h, &r) in labels.iter().enumerate() {
            self.cells[self.cell_offsets[h] + r as usize * self.capacity + cluster] += 1;
            self.row_sums[self.row_offsets[h] + r as usize] += 1;
        }
    }

    /// Removes an allocated item. If its cluster empties, the last cluster
    /// is relocated into the vacated index.
    pub fn deallocate(&mut self, item: usize) -> Result<Removal> {
        let from = self.cluster_of(item).ok_or(Error::NotDeallocated(item))?;
        let labels = self.draws.item_labels(item);
        for (h, &r) in labels.iter().enumerate() {
            let idx = self.cell_offsets[h] + r as usize * self.capacity + from;
            if self.cells[idx] == 0 {
                return Err(Error::EmptyCell {
                    row: r as usize,
                    col: from,
                });
            }
            self.cells[idx] -= 1;
            self.row_sums[self.row_offsets[h] + r as usize] -= 1;
        }
        let pos = self.position[item] as usize;
        let bucket = &mut self.members[from];
        bucket.swap_remove(pos);
        if let Some(&moved) = bucket.get(pos) {
            self.position[moved as usize] = pos as u32;
        }
        self.assignment[item] = UNALLOCATED;
        self.n_allocated -= 1;

        let emptied = self.members[from].is_empty();
        let relocated = if emptied { self.compact(from) } else { None };
        Ok(Removal {
            from,
            emptied,
            relocated,
        })
    }

    fn compact(&mut self, col: usize) -> Option<usize> {
        let last = self.members.len() - 1;
        if col != last {
            for h in 0..self.draws.n_draws() {
                let base = self.cell_offsets[h];
                for r in 0..self.draws.n_clusters(h) {
                    let row = base + r * self.capacity;
                    debug_assert_eq!(self.cells[row + col], 0);
                    self.cells[row + col] = self.cells[row + last];
                    self.cells[row + last] = 0;
                }
            }
            self.members.swap(col, last);
            for &i in &self.members[col] {
                self.assignment[i as usize] = col as u32;
            }
        }
        self.members.pop();
        (col != last).then_some(last)
    }

    /// Moves an allocated item to `cluster` (which may be the new-cluster
    /// index after the removal). Returns the final cluster index.
    pub fn move_item(&mut self, item: usize, cluster: usize) -> Result<usize> {
        let removal = self.deallocate(item)?;
        let mut target = cluster;
        if removal.emptied {
            if target == removal.from {
                target = self.members.len();
            } else if Some(target) == removal.relocated {
                target = removal.from;
            } else if target > self.members.len() {
                target = self.members.len();
            }
        }
        self.allocate(item, target);
        Ok(target)
    }

    /// Table of draw `draw` (rows) against the working partition (columns).
    pub fn table(&self, draw: usize) -> ContingencyTable {
        let k = self.draws.n_clusters(draw);
        let q = self.members.len();
        let mut t = ContingencyTable::zeros(k, q);
        for r in 0..k {
            for c in 0..q {
                for _ in 0..self.cell(draw, r, c) {
                    t.increment(r, c);
                }
            }
        }
        t
    }

    /// Canonical labels of a fully allocated working partition.
    pub fn labels(&self) -> Option<ClusterLabels> {
        if self.n_allocated != self.n_items() {
            return None;
        }
        Some(ClusterLabels::from_zero_based(&self.assignment))
    }

    /// Recounts every table from the assignment and compares.
    pub fn is_consistent(&self) -> bool {
        let q = self.members.len();
        for h in 0..self.draws.n_draws() {
            let k = self.draws.n_clusters(h);
            let mut cells = vec![0u32; k * q];
            let mut rows = vec![0u32; k];
            for (i, &r) in self.draws.row(h).iter().enumerate() {
                if let Some(c) = self.cluster_of(i) {
                    cells[r as usize * q + c] += 1;
                    rows[r as usize] += 1;
                }
            }
            for r in 0..k {
                if rows[r] != self.row_sum(h, r) {
                    return false;
                }
                for c in 0..self.capacity {
                    let want = if c < q { cells[r * q + c] } else { 0 };
                    if self.cell(h, r, c) != want {
                        return false;
                    }
                }
            }
        }
        let sizes_ok = self
            .members
            .iter()
            .enumerate()
            .all(|(c, m)| !m.is_empty() && m.iter().all(|&i| self.cluster_of(i as usize) == Some(c)));
        sizes_ok && self.members.iter().map(Vec::len).sum::<usize>() == self.n_allocated
    }
}
