use std::collections::VecDeque;

use super::Digraph;
use crate::threshold::CoreParams;

/// Order in which queued light vertices are removed. The resulting core does
/// not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeelOrder {
    Fifo,
    Lifo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeeledCore {
    /// The core's arcs on the original vertex labels.
    pub core: Digraph,
    pub in_core: Vec<bool>,
    /// Vertices in the order they were removed.
    pub removed: Vec<u32>,
}

impl PeeledCore {
    pub fn size(&self) -> usize {
        self.in_core.iter().filter(|&&b| b).count()
    }

    pub fn vertices(&self) -> Vec<u32> {
        (0..self.in_core.len() as u32).filter(|&v| self.in_core[v as usize]).collect()
    }
}

pub fn peel_core(d: &Digraph, params: CoreParams) -> PeeledCore {
    peel_core_with(d, params, PeelOrder::Fifo)
}

/// Repeatedly removes vertices with in-degree `< k1` or out-degree `< k2`.
/// `O(n + m)`.
pub fn peel_core_with(d: &Digraph, params: CoreParams, order: PeelOrder) -> PeeledCore {
    let n = d.n();
    let (k1, k2) = (params.k1, params.k2);
    let mut indeg = d.in_deg().to_vec();
    let mut outdeg = d.out_deg().to_vec();
    let mut alive = vec![true; n];
    let mut queued = vec![false; n];
    let mut work: VecDeque<u32> = VecDeque::new();
    for v in 0..n {
        if indeg[v] < k1 || outdeg[v] < k2 {
            queued[v] = true;
            work.push_back(v as u32);
        }
    }
    let mut removed = Vec::with_capacity(work.len());
    loop {
        let next = match order {
            PeelOrder::Fifo => work.pop_front(),
            PeelOrder::Lifo => work.pop_back(),
        };
        let Some(u) = next else { break };
        alive[u as usize] = false;
        removed.push(u);
        for w in d.out_neighbors(u) {
            let w = w as usize;
            if alive[w] {
                indeg[w] -= 1;
                if !queued[w] && indeg[w] < k1 {
                    queued[w] = true;
                    work.push_back(w as u32);
                }
            }
        }
        for w in d.in_neighbors(u) {
            let w = w as usize;
            if alive[w] {
                outdeg[w] -= 1;
                if !queued[w] && outdeg[w] < k2 {
                    queued[w] = true;
                    work.push_back(w as u32);
                }
            }
        }
    }
    PeeledCore { core: d.induced(&alive), in_core: alive, removed }
}
