use std::ops::{Add, AddAssign, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use super::{Digraph, MultiDigraphSeq};
use crate::threshold::CoreParams;

/// Entry type of a [`DetailedState`]: vertex counts for a concrete graph,
/// normalised reals for the ODE.
pub trait Count:
    Copy + Default + PartialEq + Add<Output = Self> + Sub<Output = Self> + AddAssign + SubAssign
{
    fn as_f64(self) -> f64;
    fn one() -> Self;
}

impl Count for u64 {
    fn as_f64(self) -> f64 {
        self as f64
    }
    fn one() -> Self {
        1
    }
}

impl Count for f64 {
    fn as_f64(self) -> f64 {
        self
    }
    fn one() -> Self {
        1.0
    }
}

/// Where a vertex with given degrees is tallied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexClass {
    /// In-degree `a < k1` and out-degree `b < k2`.
    Light { a: u32, b: u32 },
    /// In-degree `a < k1`, out-degree at least `k2`.
    InLight { a: u32 },
    /// In-degree at least `k1`, out-degree `b < k2`.
    OutLight { b: u32 },
    Heavy,
}

impl VertexClass {
    pub fn of(params: CoreParams, in_deg: u32, out_deg: u32) -> Self {
        match (in_deg < params.k1, out_deg < params.k2) {
            (true, true) => Self::Light { a: in_deg, b: out_deg },
            (true, false) => Self::InLight { a: in_deg },
            (false, true) => Self::OutLight { b: out_deg },
            (false, false) => Self::Heavy,
        }
    }
}

/// The tuple `({v_ab}, {v_a.}, {v_.b}, v, mu)` summarising a digraph for the
/// deletion process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailedState<T = u64> {
    pub k1: u32,
    pub k2: u32,
    /// Row-major `k1 x k2`.
    pub v_ab: Vec<T>,
    pub v_a_dot: Vec<T>,
    pub v_dot_b: Vec<T>,
    pub v: T,
    pub mu: T,
}

impl<T: Count> DetailedState<T> {
    pub fn zero(params: CoreParams) -> Self {
        let (k1, k2) = (params.k1 as usize, params.k2 as usize);
        Self {
            k1: params.k1,
            k2: params.k2,
            v_ab: vec![T::default(); k1 * k2],
            v_a_dot: vec![T::default(); k1],
            v_dot_b: vec![T::default(); k2],
            v: T::default(),
            mu: T::default(),
        }
    }

    pub fn params(&self) -> CoreParams {
        CoreParams::new(self.k1, self.k2)
    }

    pub fn vab(&self, a: u32, b: u32) -> T {
        self.v_ab[(a * self.k2 + b) as usize]
    }

    pub fn slot_mut(&mut self, class: VertexClass) -> &mut T {
        match class {
            VertexClass::Light { a, b } => &mut self.v_ab[(a * self.k2 + b) as usize],
            VertexClass::InLight { a } => &mut self.v_a_dot[a as usize],
            VertexClass::OutLight { b } => &mut self.v_dot_b[b as usize],
            VertexClass::Heavy => &mut self.v,
        }
    }

    /// Moves one vertex between classes.
    pub fn shift(&mut self, from: VertexClass, to: VertexClass) {
        if from != to {
            *self.slot_mut(from) -= T::one();
            *self.slot_mut(to) += T::one();
        }
    }

    /// Number of vertices of in-degree `a < k1`.
    pub fn v_sup_a(&self, a: u32) -> f64 {
        let row = (a * self.k2) as usize..((a + 1) * self.k2) as usize;
        self.v_ab[row].iter().map(|x| x.as_f64()).sum::<f64>() + self.v_a_dot[a as usize].as_f64()
    }

    /// Number of vertices of out-degree `b < k2`.
    pub fn v_sup_b(&self, b: u32) -> f64 {
        (0..self.k1).map(|a| self.vab(a, b).as_f64()).sum::<f64>() + self.v_dot_b[b as usize].as_f64()
    }

    /// Total in-degree of vertices with in-degree below `k1`.
    pub fn mu_i(&self) -> f64 {
        (1..self.k1).map(|a| a as f64 * self.v_sup_a(a)).sum()
    }

    /// Total out-degree of vertices with out-degree below `k2`.
    pub fn mu_o(&self) -> f64 {
        (1..self.k2).map(|b| b as f64 * self.v_sup_b(b)).sum()
    }

    /// Vertices with in-degree at least `k1`.
    pub fn v_in(&self) -> f64 {
        self.v.as_f64() + self.v_dot_b.iter().map(|x| x.as_f64()).sum::<f64>()
    }

    /// Vertices with out-degree at least `k2`.
    pub fn v_out(&self) -> f64 {
        self.v.as_f64() + self.v_a_dot.iter().map(|x| x.as_f64()).sum::<f64>()
    }

    /// Light vertices other than the `(0,0)` class. When both thresholds are
    /// positive these are exactly the non-isolated light vertices.
    pub fn light(&self) -> f64 {
        let all: f64 = self.v_ab.iter().chain(&self.v_a_dot).chain(&self.v_dot_b).map(|x| x.as_f64()).sum();
        let isolated = if self.k1 > 0 && self.k2 > 0 { self.v_ab[0].as_f64() } else { 0.0 };
        all - isolated
    }

    /// Total of all vertex counts; `n` for a graph, one for a normalised state.
    pub fn total(&self) -> f64 {
        self.v_ab.iter().chain(&self.v_a_dot).chain(&self.v_dot_b).map(|x| x.as_f64()).sum::<f64>() + self.v.as_f64()
    }

    /// Every entry divided by `n`.
    pub fn normalized(&self, n: f64) -> DetailedState<f64> {
        let f = |xs: &[T]| xs.iter().map(|x| x.as_f64() / n).collect();
        DetailedState {
            k1: self.k1,
            k2: self.k2,
            v_ab: f(&self.v_ab),
            v_a_dot: f(&self.v_a_dot),
            v_dot_b: f(&self.v_dot_b),
            v: self.v.as_f64() / n,
            mu: self.mu.as_f64() / n,
        }
    }
}

/// Anything with per-vertex in and out degrees.
pub trait DegreeSequence {
    fn in_degrees(&self) -> &[u32];
    fn out_degrees(&self) -> &[u32];
    fn arc_count(&self) -> usize;
}

impl DegreeSequence for Digraph {
    fn in_degrees(&self) -> &[u32] {
        self.in_deg()
    }
    fn out_degrees(&self) -> &[u32] {
        self.out_deg()
    }
    fn arc_count(&self) -> usize {
        self.m()
    }
}

impl DegreeSequence for MultiDigraphSeq {
    fn in_degrees(&self) -> &[u32] {
        self.in_deg()
    }
    fn out_degrees(&self) -> &[u32] {
        self.out_deg()
    }
    fn arc_count(&self) -> usize {
        self.m()
    }
}

pub fn state_from_degrees(params: CoreParams, in_deg: &[u32], out_deg: &[u32], mu: u64) -> DetailedState {
    let mut s = DetailedState::zero(params);
    for (&i, &o) in in_deg.iter().zip(out_deg) {
        *s.slot_mut(VertexClass::of(params, i, o)) += 1;
    }
    s.mu = mu;
    s
}

/// Tallies every vertex of `g` into its class.
pub fn state_of<G: DegreeSequence + ?Sized>(g: &G, params: CoreParams) -> DetailedState {
    state_from_degrees(params, g.in_degrees(), g.out_degrees(), g.arc_count() as u64)
}
