//! Exact capacities by dynamic programming over the budget.

use std::collections::VecDeque;

use crate::error::{EchError, Result};
use crate::weights::WeightMultiset;

use super::scaled::{cost, max_units, Classes};
use super::{oracle_fits, CapacityConfig, CapacityResult, Engine};

/// Exact `c_k` for a weight multiset, for `2k` up to the configured limit.
///
/// In a class with `n` copies, raising the total level from `s` to `s + 1`
/// costs `⌊s/n⌋ + 1`, so the class is a stack of unit items: `n` of cost 1,
/// `n` of cost 2, and so on, all of the same value. Each cost level is a
/// bounded knapsack item, solved with a sliding-window maximum per residue.
pub fn multiset_capacity_oracle(w: &WeightMultiset, k: u64, cfg: &CapacityConfig) -> Result<CapacityResult> {
    if !oracle_fits(k, cfg) {
        return Err(EchError::Resource(format!(
            "budget 2k = {} exceeds the oracle limit {}; use the fast solver",
            2 * k as u128,
            cfg.oracle_limit
        )));
    }
    let classes = Classes::new(w)?;
    let b = k as usize;
    let pmax = classes.p.iter().copied().max().unwrap_or(0);
    // every unit costs at least 1, so no value exceeds pmax·k
    if pmax.checked_mul(k as u128 + 1).map_or(true, |v| v > i128::MAX as u128) {
        return Err(EchError::Overflow("oracle values"));
    }
    let mut layers: Vec<Vec<i128>> = vec![vec![0; b + 1]];
    for i in 0..classes.len() {
        let (n, p) = (classes.n[i], classes.p[i] as i128);
        let mut dp = layers.last().unwrap().clone();
        let mut j = 1u128;
        // level j is usable only if the levels below it fit first
        while cost(n, n * (j - 1)) + j <= b as u128 {
            let count = n.min(b as u128 / j) as usize;
            bounded_item(&mut dp, j as usize, p, count);
            j += 1;
        }
        layers.push(dp);
    }
    // backtrack the per-class level totals
    let mut s = vec![0u128; classes.len()];
    let mut rem = b as u128;
    for i in (0..classes.len()).rev() {
        let target = layers[i + 1][rem as usize];
        let (n, p) = (classes.n[i], classes.p[i] as i128);
        let top = max_units(n, rem);
        let pick = (0..=top)
            .find(|&u| layers[i][(rem - cost(n, u)) as usize] + u as i128 * p == target)
            .expect("dp layers are consistent");
        s[i] = pick;
        rem -= cost(n, pick);
    }
    let witness = classes.assignment(&s);
    debug_assert_eq!(witness.value, classes.to_scalar(layers[classes.len()][b] as u128));
    Ok(CapacityResult {
        best: witness.value.clone(),
        upper: witness.value.clone(),
        exact: true,
        engine: Engine::Oracle,
        witness: Some(witness),
        relaxation_upper: None,
    })
}

/// `dp[x] ← max_{0 ≤ t ≤ count} dp[x − t·cost] + t·value`, in place.
fn bounded_item(dp: &mut [i128], cost: usize, value: i128, count: usize) {
    let len = dp.len();
    let mut window: VecDeque<(usize, i128)> = VecDeque::new();
    for r in 0..cost.min(len) {
        window.clear();
        let mut q = 0usize;
        let mut x = r;
        while x < len {
            let key = dp[x] - q as i128 * value;
            while window.back().is_some_and(|&(_, v)| v <= key) {
                window.pop_back();
            }
            window.push_back((q, key));
            while window.front().is_some_and(|&(q0, _)| q0 + count < q) {
                window.pop_front();
            }
            dp[x] = window.front().unwrap().1 + q as i128 * value;
            q += 1;
            x += cost;
        }
    }
}
