//! Simple digraphs, their random generation, and core extraction.

mod brute;
mod deletion;
mod edgelist;
mod peel;
mod sample;
mod state;

use std::collections::HashSet;

use crate::error::{domain, Result};

pub use brute::{brute_force_core, BRUTE_FORCE_LIMIT};
pub use deletion::{
    run_random_deletion, run_random_deletion_with, DeletionOptions, DeletionOutcome, RandomDeletion,
    StepDelta,
};
pub use edgelist::{parse_edge_list, read_edge_list, write_edge_list};
pub use peel::{peel_core, peel_core_with, PeelOrder, PeeledCore};
pub use sample::{sample_digraph, sample_sequence_model};
pub use state::{state_from_degrees, state_of, Count, DegreeSequence, DetailedState, VertexClass};

/// A digraph without loops or repeated ordered pairs. Antiparallel pairs
/// `u -> v`, `v -> u` are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    arcs: Vec<(u32, u32)>,
    /// Arc ids leaving each vertex.
    out_arcs: Vec<Vec<u32>>,
    /// Arc ids entering each vertex.
    in_arcs: Vec<Vec<u32>>,
    in_deg: Vec<u32>,
    out_deg: Vec<u32>,
}

impl Digraph {
    /// Builds a digraph, rejecting loops, duplicate arcs and labels `>= n`.
    pub fn from_arcs(n: usize, arcs: Vec<(u32, u32)>) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(domain(format!("at most {} vertices are supported", u32::MAX)));
        }
        let mut seen = HashSet::with_capacity(arcs.len());
        for &(t, h) in &arcs {
            if t as usize >= n || h as usize >= n {
                return Err(domain(format!("arc ({t},{h}) has a vertex outside [0,{n})")));
            }
            if t == h {
                return Err(domain(format!("loop at vertex {t}")));
            }
            if !seen.insert((t, h)) {
                return Err(domain(format!("duplicate arc ({t},{h})")));
            }
        }
        Ok(Self::from_arcs_unchecked(n, arcs))
    }

    pub(crate) fn from_arcs_unchecked(n: usize, arcs: Vec<(u32, u32)>) -> Self {
        let mut in_deg = vec![0u32; n];
        let mut out_deg = vec![0u32; n];
        for &(t, h) in &arcs {
            out_deg[t as usize] += 1;
            in_deg[h as usize] += 1;
        }
        let mut out_arcs: Vec<Vec<u32>> = out_deg.iter().map(|&d| Vec::with_capacity(d as usize)).collect();
        let mut in_arcs: Vec<Vec<u32>> = in_deg.iter().map(|&d| Vec::with_capacity(d as usize)).collect();
        for (id, &(t, h)) in arcs.iter().enumerate() {
            out_arcs[t as usize].push(id as u32);
            in_arcs[h as usize].push(id as u32);
        }
        Self { n, arcs, out_arcs, in_arcs, in_deg, out_deg }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_arcs_unchecked(n, Vec::new())
    }

    /// All `n(n-1)` ordered pairs.
    pub fn complete(n: usize) -> Self {
        let mut arcs = Vec::with_capacity(n * n.saturating_sub(1));
        for t in 0..n as u32 {
            for h in 0..n as u32 {
                if t != h {
                    arcs.push((t, h));
                }
            }
        }
        Self::from_arcs_unchecked(n, arcs)
    }

    /// `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 2, "a directed cycle needs at least two vertices");
        let arcs = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
        Self::from_arcs_unchecked(n, arcs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[(u32, u32)] {
        &self.arcs
    }

    pub fn in_deg(&self) -> &[u32] {
        &self.in_deg
    }

    pub fn out_deg(&self) -> &[u32] {
        &self.out_deg
    }

    pub fn out_neighbors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.out_arcs[v as usize].iter().map(move |&a| self.arcs[a as usize].1)
    }

    pub fn in_neighbors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.in_arcs[v as usize].iter().map(move |&a| self.arcs[a as usize].0)
    }

    pub(crate) fn out_arc_ids(&self, v: u32) -> &[u32] {
        &self.out_arcs[v as usize]
    }

    pub(crate) fn in_arc_ids(&self, v: u32) -> &[u32] {
        &self.in_arcs[v as usize]
    }

    /// Sub-digraph on the same vertex set keeping the arcs with both ends in
    /// `keep`, in their original order.
    pub fn induced(&self, keep: &[bool]) -> Self {
        assert_eq!(keep.len(), self.n);
        let arcs = self
            .arcs
            .iter()
            .copied()
            .filter(|&(t, h)| keep[t as usize] && keep[h as usize])
            .collect();
        Self::from_arcs_unchecked(self.n, arcs)
    }

    /// Vertices with at least one incident arc.
    pub fn non_isolated(&self) -> Vec<bool> {
        (0..self.n).map(|v| self.in_deg[v] + self.out_deg[v] > 0).collect()
    }
}

/// The multidigraph read off `2m` labels as the pairs `(x[2r], x[2r+1])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiDigraphSeq {
    n: usize,
    x: Vec<u32>,
    in_deg: Vec<u32>,
    out_deg: Vec<u32>,
}

impl MultiDigraphSeq {
    pub fn new(n: usize, x: Vec<u32>) -> Result<Self> {
        if x.len() % 2 != 0 {
            return Err(domain("label sequence must have even length"));
        }
        if let Some(&bad) = x.iter().find(|&&l| l as usize >= n) {
            return Err(domain(format!("label {bad} outside [0,{n})")));
        }
        let mut in_deg = vec![0u32; n];
        let mut out_deg = vec![0u32; n];
        for pair in x.chunks_exact(2) {
            out_deg[pair[0] as usize] += 1;
            in_deg[pair[1] as usize] += 1;
        }
        Ok(Self { n, x, in_deg, out_deg })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.x.len() / 2
    }

    pub fn labels(&self) -> &[u32] {
        &self.x
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.x.chunks_exact(2).map(|p| (p[0], p[1]))
    }

    /// No loops and no repeated ordered pair.
    pub fn is_simple(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.m());
        self.pairs().all(|(t, h)| t != h && seen.insert((t, h)))
    }

    /// The digraph itself, when simple.
    pub fn to_digraph(&self) -> Result<Digraph> {
        Digraph::from_arcs(self.n, self.pairs().collect())
    }

    pub fn in_deg(&self) -> &[u32] {
        &self.in_deg
    }

    pub fn out_deg(&self) -> &[u32] {
        &self.out_deg
    }
}

/// Same as [`MultiDigraphSeq::is_simple`].
pub fn is_simple(seq: &MultiDigraphSeq) -> bool {
    seq.is_simple()
}
