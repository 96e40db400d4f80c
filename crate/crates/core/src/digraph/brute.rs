use super::Digraph;
use crate::error::{Error, Result};
use crate::threshold::CoreParams;

pub const BRUTE_FORCE_LIMIT: usize = 16;

/// Union of every vertex subset whose induced sub-digraph meets both degree
/// bounds, by exhaustive search. A testing oracle for [`super::peel_core`].
pub fn brute_force_core(d: &Digraph, params: CoreParams) -> Result<Vec<bool>> {
    let n = d.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut out_mask = vec![0u32; n];
    let mut in_mask = vec![0u32; n];
    for &(t, h) in d.arcs() {
        out_mask[t as usize] |= 1 << h;
        in_mask[h as usize] |= 1 << t;
    }
    let mut union = 0u32;
    for s in 1u32..(1u32 << n) {
        let ok = (0..n).filter(|&v| s >> v & 1 == 1).all(|v| {
            (in_mask[v] & s).count_ones() >= params.k1 && (out_mask[v] & s).count_ones() >= params.k2
        });
        if ok {
            union |= s;
        }
    }
    Ok((0..n).map(|v| union >> v & 1 == 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_cycle_is_a_one_one_core() {
        let got = brute_force_core(&Digraph::cycle(3), CoreParams::new(1, 1)).unwrap();
        assert_eq!(got, vec![true; 3]);
    }

    #[test]
    fn feasible_full_set_is_returned() {
        let got = brute_force_core(&Digraph::complete(5), CoreParams::new(4, 4)).unwrap();
        assert_eq!(got, vec![true; 5]);
    }

    #[test]
    fn refuses_large_graphs() {
        assert!(matches!(
            brute_force_core(&Digraph::empty(17), CoreParams::new(1, 1)),
            Err(Error::TooLarge { n: 17, .. })
        ));
    }
}
