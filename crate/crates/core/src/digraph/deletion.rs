use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::state::{state_from_degrees, DetailedState, VertexClass};
use super::Digraph;
use crate::rng::rng_from_seed;
use crate::threshold::{alpha_bound, CoreParams};

const NOT_IN_POOL: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct DeletionOptions {
    /// Record the state after every step. The final state is always kept.
    pub record: bool,
    /// Stop as soon as the number of heavy vertices falls below this count,
    /// declaring the core empty.
    pub stop_below_heavy: Option<u64>,
}

impl Default for DeletionOptions {
    fn default() -> Self {
        Self { record: true, stop_below_heavy: None }
    }
}

impl DeletionOptions {
    /// Early stop at `0.8 alpha(k, c) n` heavy vertices, `k = max(k1,k2)`.
    pub fn alpha_stop(params: CoreParams, c: f64, n: usize) -> crate::Result<Self> {
        let a = alpha_bound(params.kmax(), c)?;
        Ok(Self { record: true, stop_below_heavy: Some((0.8 * a * n as f64).floor() as u64) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeletionOutcome {
    /// States from the initial one through the terminal one.
    pub trajectory: Vec<DetailedState>,
    /// Chosen vertex at each step.
    pub chosen: Vec<u32>,
    /// Non-isolated vertices left at the end: the core.
    pub in_core: Vec<bool>,
    /// Remaining arcs.
    pub core: Digraph,
    pub stopped_early: bool,
}

impl DeletionOutcome {
    pub fn core_size(&self) -> usize {
        self.in_core.iter().filter(|&&b| b).count()
    }

    pub fn final_state(&self) -> &DetailedState {
        self.trajectory.last().expect("trajectory holds the initial state")
    }
}

/// Changes of `(v^i, v^o, mu_i, mu_o, v, mu)` caused by one deletion step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepDelta {
    pub v_in: f64,
    pub v_out: f64,
    pub mu_i: f64,
    pub mu_o: f64,
    pub v: f64,
    pub mu: f64,
}

impl StepDelta {
    pub fn to_array(self) -> [f64; 6] {
        [self.v_in, self.v_out, self.mu_i, self.mu_o, self.v, self.mu]
    }
}

/// The Markov chain that deletes every arc at a uniformly chosen non-isolated
/// light vertex, one vertex per step.
pub struct RandomDeletion<'g> {
    g: &'g Digraph,
    params: CoreParams,
    in_deg: Vec<u32>,
    out_deg: Vec<u32>,
    arc_alive: Vec<bool>,
    pool: Vec<u32>,
    pos: Vec<u32>,
    state: DetailedState,
    rng: ChaCha8Rng,
    steps: u64,
}

impl<'g> RandomDeletion<'g> {
    pub fn new(g: &'g Digraph, params: CoreParams, seed: u64) -> Self {
        let in_deg = g.in_deg().to_vec();
        let out_deg = g.out_deg().to_vec();
        let state = state_from_degrees(params, &in_deg, &out_deg, g.m() as u64);
        let mut me = Self {
            g,
            params,
            in_deg,
            out_deg,
            arc_alive: vec![true; g.m()],
            pool: Vec::new(),
            pos: vec![NOT_IN_POOL; g.n()],
            state,
            rng: rng_from_seed(seed),
            steps: 0,
        };
        for v in 0..g.n() as u32 {
            me.sync_pool(v);
        }
        me
    }

    pub fn state(&self) -> &DetailedState {
        &self.state
    }

    /// Non-isolated light vertices, in no particular order.
    pub fn pool(&self) -> &[u32] {
        &self.pool
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.pool.is_empty()
    }

    fn class(&self, v: u32) -> VertexClass {
        VertexClass::of(self.params, self.in_deg[v as usize], self.out_deg[v as usize])
    }

    fn wants_pool(&self, v: u32) -> bool {
        let (i, o) = (self.in_deg[v as usize], self.out_deg[v as usize]);
        (i < self.params.k1 || o < self.params.k2) && i + o > 0
    }

    fn sync_pool(&mut self, v: u32) {
        let here = self.pos[v as usize] != NOT_IN_POOL;
        match (here, self.wants_pool(v)) {
            (false, true) => {
                self.pos[v as usize] = self.pool.len() as u32;
                self.pool.push(v);
            }
            (true, false) => {
                let i = self.pos[v as usize] as usize;
                let last = *self.pool.last().unwrap();
                self.pool.swap_remove(i);
                if last != v {
                    self.pos[last as usize] = i as u32;
                }
                self.pos[v as usize] = NOT_IN_POOL;
            }
            _ => {}
        }
    }

    fn drop_arc(&mut self, id: u32) {
        self.arc_alive[id as usize] = false;
        let (t, h) = self.g.arcs()[id as usize];
        let before = (self.class(t), self.class(h));
        self.out_deg[t as usize] -= 1;
        self.in_deg[h as usize] -= 1;
        self.state.shift(before.0, self.class(t));
        self.state.shift(before.1, self.class(h));
        self.state.mu -= 1;
        self.sync_pool(t);
        self.sync_pool(h);
    }

    /// Deletes every remaining arc at `u`.
    pub fn delete_at(&mut self, u: u32) {
        let g = self.g;
        for &id in g.out_arc_ids(u).iter().chain(g.in_arc_ids(u)) {
            if self.arc_alive[id as usize] {
                self.drop_arc(id);
            }
        }
        self.steps += 1;
        #[cfg(debug_assertions)]
        if self.steps % 1000 == 0 {
            let fresh = state_from_degrees(self.params, &self.in_deg, &self.out_deg, self.state.mu);
            debug_assert_eq!(fresh, self.state, "incremental state diverged at step {}", self.steps);
        }
    }

    /// One step of the chain. Returns the chosen vertex, or `None` once no
    /// non-isolated light vertex remains.
    pub fn step(&mut self) -> Option<u32> {
        if self.pool.is_empty() {
            return None;
        }
        let u = self.pool[self.rng.random_range(0..self.pool.len())];
        self.delete_at(u);
        Some(u)
    }

    /// Effect on the six leading coordinates of deleting the arcs at `u`,
    /// without changing anything.
    pub fn one_step_delta(&self, u: u32) -> StepDelta {
        let g = self.g;
        let mut touched: Vec<(u32, i64, i64)> = vec![(
            u,
            -(self.in_deg[u as usize] as i64),
            -(self.out_deg[u as usize] as i64),
        )];
        for &id in g.out_arc_ids(u) {
            if self.arc_alive[id as usize] {
                touched.push((g.arcs()[id as usize].1, -1, 0));
            }
        }
        for &id in g.in_arc_ids(u) {
            if self.arc_alive[id as usize] {
                touched.push((g.arcs()[id as usize].0, 0, -1));
            }
        }
        touched.sort_unstable_by_key(|t| t.0);
        let (k1, k2) = (self.params.k1 as i64, self.params.k2 as i64);
        let contrib = |i: i64, o: i64| -> [f64; 5] {
            let ih = i >= k1;
            let oh = o >= k2;
            [
                ih as u8 as f64,
                oh as u8 as f64,
                if ih { 0.0 } else { i as f64 },
                if oh { 0.0 } else { o as f64 },
                (ih && oh) as u8 as f64,
            ]
        };
        let mut d = [0.0; 5];
        let mut idx = 0;
        while idx < touched.len() {
            let v = touched[idx].0;
            let (mut di, mut dout) = (0, 0);
            while idx < touched.len() && touched[idx].0 == v {
                di += touched[idx].1;
                dout += touched[idx].2;
                idx += 1;
            }
            let i = self.in_deg[v as usize] as i64;
            let o = self.out_deg[v as usize] as i64;
            let (before, after) = (contrib(i, o), contrib(i + di, o + dout));
            for c in 0..5 {
                d[c] += after[c] - before[c];
            }
        }
        let lost = self.in_deg[u as usize] + self.out_deg[u as usize];
        StepDelta { v_in: d[0], v_out: d[1], mu_i: d[2], mu_o: d[3], v: d[4], mu: -(lost as f64) }
    }

    /// Draws a vertex uniformly from the pool without deleting anything.
    pub fn sample_pool_vertex(&mut self) -> Option<u32> {
        if self.pool.is_empty() {
            None
        } else {
            Some(self.pool[self.rng.random_range(0..self.pool.len())])
        }
    }

    fn finish(self, trajectory: Vec<DetailedState>, chosen: Vec<u32>, stopped_early: bool) -> DeletionOutcome {
        let in_core: Vec<bool> = (0..self.g.n()).map(|v| self.in_deg[v] + self.out_deg[v] > 0).collect();
        let arcs = self
            .g
            .arcs()
            .iter()
            .zip(&self.arc_alive)
            .filter(|(_, &a)| a)
            .map(|(&p, _)| p)
            .collect();
        let core = Digraph::from_arcs_unchecked(self.g.n(), arcs);
        DeletionOutcome { trajectory, chosen, in_core, core, stopped_early }
    }
}

pub fn run_random_deletion(d: &Digraph, params: CoreParams, seed: u64) -> DeletionOutcome {
    run_random_deletion_with(d, params, seed, &DeletionOptions::default())
}

/// Runs the chain to completion, or to the early stop if one is configured.
pub fn run_random_deletion_with(
    d: &Digraph,
    params: CoreParams,
    seed: u64,
    opts: &DeletionOptions,
) -> DeletionOutcome {
    let mut proc = RandomDeletion::new(d, params, seed);
    let mut trajectory = vec![proc.state().clone()];
    let mut chosen = Vec::new();
    let mut stopped_early = false;
    loop {
        if let Some(floor) = opts.stop_below_heavy {
            if proc.state().v < floor {
                stopped_early = true;
                break;
            }
        }
        let Some(u) = proc.step() else { break };
        chosen.push(u);
        if opts.record {
            trajectory.push(proc.state().clone());
        }
    }
    if !opts.record && !chosen.is_empty() {
        trajectory.push(proc.state().clone());
    }
    proc.finish(trajectory, chosen, stopped_early)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{peel_core, sample_digraph, state_of};

    #[test]
    fn core_graph_is_untouched() {
        let g = Digraph::complete(5);
        let out = run_random_deletion(&g, CoreParams::new(2, 2), 1);
        assert_eq!(out.trajectory.len(), 1);
        assert_eq!(out.core, g);
    }

    #[test]
    fn four_cycle_peels_to_nothing() {
        let out = run_random_deletion(&Digraph::cycle(4), CoreParams::new(1, 2), 3);
        let last = out.final_state();
        assert_eq!(last.mu, 0);
        assert_eq!(last.vab(0, 0), 4);
        assert_eq!(out.core_size(), 0);
    }

    #[test]
    fn incremental_state_matches_recount() {
        let g = sample_digraph(300, 1000, 8).unwrap();
        let p = CoreParams::new(2, 3);
        let mut proc = RandomDeletion::new(&g, p, 5);
        while proc.step().is_some() {
            let fresh = state_from_degrees(p, &proc.in_deg, &proc.out_deg, proc.state.mu);
            assert_eq!(&fresh, proc.state());
        }
    }

    #[test]
    fn matches_peeling() {
        for seed in 0..50 {
            let g = sample_digraph(60, 150, seed).unwrap();
            let p = CoreParams::new(1, 2);
            let out = run_random_deletion(&g, p, seed ^ 77);
            assert_eq!(out.in_core, peel_core(&g, p).in_core);
            assert!(out.trajectory.len() <= g.n() + 1);
        }
    }

    #[test]
    fn predicted_delta_matches_actual_step() {
        let g = sample_digraph(200, 700, 2).unwrap();
        let p = CoreParams::new(2, 2);
        let mut proc = RandomDeletion::new(&g, p, 9);
        for _ in 0..40 {
            let Some(u) = proc.sample_pool_vertex() else { break };
            let pred = proc.one_step_delta(u);
            let before = proc.state().clone();
            proc.delete_at(u);
            let after = proc.state();
            assert_eq!(pred.v_in, after.v_in() - before.v_in());
            assert_eq!(pred.v_out, after.v_out() - before.v_out());
            assert_eq!(pred.mu_i, after.mu_i() - before.mu_i());
            assert_eq!(pred.mu_o, after.mu_o() - before.mu_o());
            assert_eq!(pred.v, after.v as f64 - before.v as f64);
            assert_eq!(pred.mu, after.mu as f64 - before.mu as f64);
        }
    }

    #[test]
    fn early_stop_fires_below_floor() {
        let g = sample_digraph(400, 800, 1).unwrap();
        let p = CoreParams::new(2, 2);
        let opts = DeletionOptions { record: false, stop_below_heavy: Some(state_of(&g, p).v + 1) };
        let out = run_random_deletion_with(&g, p, 1, &opts);
        assert!(out.stopped_early);
        assert!(out.chosen.is_empty());
    }
}
