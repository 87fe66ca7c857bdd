//! Undirected simple graphs on up to 64 nodes, stored as adjacency bitmasks.
//!
//! Nodes are indexed `0..n` internally; the text file format is 1-based.
//! Graphs are immutable values: every operation returns a fresh matrix, so
//! instances can be shared and sent between worker threads freely.

use crate::error::{Error, Result};
use std::collections::BTreeSet;
use std::fmt;

/// Hard cap imposed by the `u64` row representation.
pub const MAX_NODES: usize = 64;

/// Symmetric 0/1 adjacency matrix with zero diagonal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AdjacencyMatrix {
    n: usize,
    rows: Vec<u64>,
}

impl AdjacencyMatrix {
    /// Graph on `n` nodes with no links.
    pub fn empty(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_NODES, "node count must be in 1..=64");
        Self { n, rows: vec![0; n] }
    }

    /// Builds a graph from an explicit link list.
    pub fn from_links(n: usize, links: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j) in links {
            g.set_link(i, j)?;
        }
        Ok(g)
    }

    fn set_link(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(Error::BadIndices(format!("self-loop at node {i}")));
        }
        self.rows[i] |= 1 << j;
        self.rows[j] |= 1 << i;
        Ok(())
    }

    /// Returns a copy with the link `(i, j)` added.
    pub fn with_link(&self, i: usize, j: usize) -> Result<Self> {
        let mut g = self.clone();
        g.set_link(i, j)?;
        Ok(g)
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i >= self.n {
            Err(Error::IndexOutOfRange { index: i, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_link(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.rows[i] & (1 << j) != 0
    }

    /// Neighbor set of `i` as a bitmask.
    pub fn neighbors(&self, i: usize) -> u64 {
        self.rows[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.rows[i].count_ones() as usize
    }

    /// Degree of `l` with node 0 removed from the graph.
    pub fn reduced_degree(&self, l: usize) -> Result<usize> {
        if l == 0 || l >= self.n {
            return Err(Error::IndexOutOfRange { index: l, n: self.n });
        }
        Ok((self.rows[l] & !1u64).count_ones() as usize)
    }

    pub fn link_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Links as sorted `(i, j)` pairs with `i < j`.
    pub fn links(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            let mut m = self.rows[i] & !((1u64 << (i + 1)) - 1);
            while m != 0 {
                let j = m.trailing_zeros() as usize;
                m &= m - 1;
                out.push((i, j));
            }
        }
        out
    }

    fn full_mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    fn reachable_from(&self, start_mask: u64, allowed: u64) -> u64 {
        let mut seen = start_mask & allowed;
        loop {
            let mut next = seen;
            let mut m = seen;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                next |= self.rows[i] & allowed;
            }
            if next == seen {
                return seen;
            }
            seen = next;
        }
    }

    /// True iff every node is reachable from node 0.
    pub fn is_connected(&self) -> bool {
        self.reachable_from(1, self.full_mask()) == self.full_mask()
    }

    /// True iff the graph with node `excl` deleted is connected.
    pub fn is_connected_without(&self, excl: usize) -> bool {
        let allowed = self.full_mask() & !(1u64 << excl);
        if allowed == 0 {
            return true;
        }
        let start = 1u64 << allowed.trailing_zeros();
        self.reachable_from(start, allowed) == allowed
    }

    /// Relabels a connected graph so that node 0 can be deleted without
    /// disconnecting it and the link `(0, 1)` exists.
    ///
    /// A depth-first spanning tree is grown from node 0; the smallest-index
    /// tree leaf becomes the new node 0 and its tree parent the new node 1,
    /// the remaining nodes keep their relative order. Returns the relabeled
    /// matrix and the permutation `perm` with `perm[new] = old`.
    pub fn relabel_for_reduction(&self) -> Result<(Self, Vec<usize>)> {
        if self.n < 2 {
            return Err(Error::InvalidHost("need at least two nodes".into()));
        }
        if !self.is_connected() {
            return Err(Error::NotConnected);
        }
        let mut parent = vec![usize::MAX; self.n];
        let mut has_child = vec![false; self.n];
        let mut visited = vec![false; self.n];
        let mut stack = vec![(0usize, 0usize)];
        visited[0] = true;
        while let Some((u, next)) = stack.pop() {
            let mut m = if next >= 64 { 0 } else { self.rows[u] & (u64::MAX << next) };
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                m &= m - 1;
                if !visited[v] {
                    visited[v] = true;
                    parent[v] = u;
                    has_child[u] = true;
                    stack.push((u, v + 1));
                    stack.push((v, 0));
                    break;
                }
            }
        }
        let leaf = (1..self.n)
            .find(|&v| !has_child[v])
            .expect("a spanning tree on >= 2 nodes has a non-root leaf");
        let anchor = parent[leaf];
        let mut perm = vec![leaf, anchor];
        perm.extend((0..self.n).filter(|&v| v != leaf && v != anchor));
        Ok((self.permuted(&perm), perm))
    }

    /// Applies a node relabeling; `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        let mut g = Self::empty(self.n);
        for a in 0..self.n {
            for b in (a + 1)..self.n {
                if self.has_link(perm[a], perm[b]) {
                    g.rows[a] |= 1 << b;
                    g.rows[b] |= 1 << a;
                }
            }
        }
        g
    }

    /// Replaces row and column 0 by the given bitmask (bit 0 is ignored).
    pub fn with_first_row(&self, row0: u64) -> Self {
        let row0 = row0 & self.full_mask() & !1u64;
        let mut g = self.clone();
        g.rows[0] = row0;
        for l in 1..self.n {
            if row0 & (1 << l) != 0 {
                g.rows[l] |= 1;
            } else {
                g.rows[l] &= !1u64;
            }
        }
        g
    }

    /// Serialises to the text format: first line `n`, then one `i j` line per
    /// link, 1-based with `i < j`.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for (i, j) in self.links() {
            s.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
        s
    }

    /// Parses the text format accepted by [`to_text`](Self::to_text).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let first = lines.next().ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let n: usize = first
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("invalid node count {first:?}")))?;
        if n < 1 || n > MAX_NODES {
            return Err(Error::Parse(format!("node count {n} out of range 1..=64")));
        }
        let mut g = Self::empty(n);
        for line in lines {
            let mut it = line.split_whitespace();
            let a: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad link line {line:?}")))?;
            let b: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad link line {line:?}")))?;
            if it.next().is_some() {
                return Err(Error::Parse(format!("bad link line {line:?}")));
            }
            if a < 1 || b < 1 || a > n || b > n {
                return Err(Error::Parse(format!("link ({a}, {b}) out of range for n={n}")));
            }
            g.set_link(a - 1, b - 1)
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        Ok(g)
    }
}

impl fmt::Debug for AdjacencyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AdjacencyMatrix(n={}, links={:?})", self.n, self.links())
    }
}

/// Index of the unordered pair `(i, j)`, `i < j`, in row-major upper-triangle
/// order: `(0,1), (0,2), ..., (0,n-1), (1,2), ...`.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Number of unordered pairs on `n` nodes.
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Builds the graph whose upper-triangle bits (in [`pair_index`] order) are
/// the low bits of `bits`.
pub fn from_upper_bits(n: usize, bits: u64) -> AdjacencyMatrix {
    let mut g = AdjacencyMatrix::empty(n);
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if bits & (1 << k) != 0 {
                g.rows[i] |= 1 << j;
                g.rows[j] |= 1 << i;
            }
            k += 1;
        }
    }
    g
}

/// Upper-triangle bits of the matrix in [`pair_index`] order.
pub fn upper_bits(g: &AdjacencyMatrix) -> u64 {
    let n = g.n();
    assert!(pair_count(n) <= 64);
    let mut bits = 0u64;
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if g.has_link(i, j) {
                bits |= 1 << k;
            }
            k += 1;
        }
    }
    bits
}

/// All graphs on `n` labeled nodes, in ascending upper-triangle-bit order.
pub fn all_graphs(n: usize) -> impl Iterator<Item = AdjacencyMatrix> {
    assert!(pair_count(n) < 64, "enumeration limited to n <= 11");
    (0u64..(1u64 << pair_count(n))).map(move |bits| from_upper_bits(n, bits))
}

/// All connected graphs on `n` labeled nodes.
pub fn connected_graphs(n: usize) -> impl Iterator<Item = AdjacencyMatrix> {
    all_graphs(n).filter(|g| g.is_connected())
}

/// A set of unordered node pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkSet {
    n: usize,
    links: BTreeSet<(usize, usize)>,
}

impl LinkSet {
    pub fn new(n: usize) -> Self {
        Self { n, links: BTreeSet::new() }
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut s = Self::new(n);
        for &(i, j) in pairs {
            s.insert(i, j)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, i: usize, j: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::IndexOutOfRange { index: i.max(j), n: self.n });
        }
        if i == j {
            return Err(Error::BadIndices(format!("self-pair at node {i}")));
        }
        self.links.insert((i.min(j), i.max(j)));
        Ok(())
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.links.contains(&(i.min(j), i.max(j)))
    }

    /// Sorted iteration over the normalised pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> AdjacencyMatrix {
        let links: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        AdjacencyMatrix::from_links(n, &links).unwrap()
    }

    #[test]
    fn connectivity_basics() {
        let k2 = AdjacencyMatrix::from_links(2, &[(0, 1)]).unwrap();
        assert!(k2.is_connected());
        let isolated = AdjacencyMatrix::empty(3);
        assert!(!isolated.is_connected());
        assert!(path(5).is_connected());
    }

    #[test]
    fn reduced_degree_counts_links_away_from_node_zero() {
        let triangle = AdjacencyMatrix::from_links(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert_eq!(triangle.reduced_degree(1).unwrap(), 1);
        let p4 = path(4);
        assert_eq!(p4.reduced_degree(2).unwrap(), 2);
        // star centred at node 1 with leaves 0, 2, 3, 4
        let star =
            AdjacencyMatrix::from_links(5, &[(0, 1), (1, 2), (1, 3), (1, 4)]).unwrap();
        assert_eq!(star.reduced_degree(1).unwrap(), 3);
        assert!(star.reduced_degree(0).is_err());
        assert!(star.reduced_degree(5).is_err());
    }

    #[test]
    fn reduced_degree_plus_first_row_entry_is_full_degree() {
        for g in connected_graphs(5) {
            for l in 1..5 {
                let a0l = usize::from(g.has_link(0, l));
                assert_eq!(g.reduced_degree(l).unwrap() + a0l, g.degree(l));
            }
        }
    }

    #[test]
    fn relabel_star_moves_centre_to_anchor() {
        // centre 1 with leaves 0, 2, 3
        let star = AdjacencyMatrix::from_links(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let (g, perm) = star.relabel_for_reduction().unwrap();
        assert!(g.has_link(0, 1));
        assert!(g.is_connected_without(0));
        assert_eq!(perm[1], 1, "the star centre must become the anchor");
    }

    #[test]
    fn relabel_triangle_keeps_it_valid() {
        let triangle = AdjacencyMatrix::from_links(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let (g, _) = triangle.relabel_for_reduction().unwrap();
        assert!(g.has_link(0, 1));
        assert!(g.is_connected_without(0));
    }

    #[test]
    fn relabel_rejects_disconnected_graphs() {
        let g = AdjacencyMatrix::from_links(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(g.relabel_for_reduction(), Err(Error::NotConnected)));
    }

    #[test]
    fn relabel_invariant_exhaustive_small() {
        for n in 2..=5 {
            for g in connected_graphs(n) {
                let (h, perm) = g.relabel_for_reduction().unwrap();
                assert!(h.has_link(0, 1), "anchor link missing for {g:?}");
                assert!(h.is_connected_without(0), "removal disconnects {g:?}");
                assert_eq!(h.link_count(), g.link_count());
                // perm is a permutation
                let mut seen = vec![false; n];
                for &v in &perm {
                    assert!(!seen[v]);
                    seen[v] = true;
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let g = AdjacencyMatrix::from_links(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let parsed = AdjacencyMatrix::from_text(&g.to_text()).unwrap();
        assert_eq!(parsed, g);
        assert!(AdjacencyMatrix::from_text("3\n1 4\n").is_err());
        assert!(AdjacencyMatrix::from_text("").is_err());
        assert!(AdjacencyMatrix::from_text("2\n1 1\n").is_err());
    }

    #[test]
    fn upper_bits_round_trip() {
        for n in [2, 4, 6] {
            for bits in 0..(1u64 << pair_count(n)).min(512) {
                assert_eq!(upper_bits(&from_upper_bits(n, bits)), bits);
            }
        }
    }

    #[test]
    fn connected_graph_counts_match_oeis() {
        // labeled connected graphs: 1, 1, 4, 38, 728
        assert_eq!(connected_graphs(2).count(), 1);
        assert_eq!(connected_graphs(3).count(), 4);
        assert_eq!(connected_graphs(4).count(), 38);
        assert_eq!(connected_graphs(5).count(), 728);
    }

    #[test]
    fn with_first_row_is_symmetric() {
        let g = path(5);
        let h = g.with_first_row(0b10110);
        for l in 1..5 {
            assert_eq!(h.has_link(0, l), [1, 2, 4].contains(&l));
            assert_eq!(h.has_link(l, 0), h.has_link(0, l));
        }
        // rows away from node 0 untouched
        assert!(h.has_link(1, 2) && h.has_link(2, 3) && h.has_link(3, 4));
    }
}
