//! Exact sparse solver for absorbing linear systems `x = r + P x`.
//!
//! `P` is substochastic over the transient nodes (transitions into absorbing
//! nodes are omitted by the caller) and absorption must be certain from every
//! node. Nodes are eliminated in min-fill order, then values are recovered by
//! back substitution, so chains that are nearly acyclic stay sparse.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use num_traits::{One, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("linear system is singular at node {0} (absorption is not certain)")]
pub struct Singular(pub usize);

/// Solves `x = r + P x` for several reward vectors at once.
///
/// `rows[u]` maps successor -> probability and may contain `u` itself.
/// `rewards[u][k]` is the k-th reward of node `u`. Returns `x[u][k]`.
pub fn solve_absorbing(
    mut rows: Vec<BTreeMap<usize, Rational>>,
    mut rewards: Vec<Vec<Rational>>,
) -> Result<Vec<Vec<Rational>>, Singular> {
    let n = rows.len();
    let k = rewards.first().map_or(0, Vec::len);
    let mut inn: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (u, row) in rows.iter().enumerate() {
        for &w in row.keys() {
            if w != u {
                inn[w].insert(u);
            }
        }
    }
    let score = |u: usize, rows: &[BTreeMap<usize, Rational>], inn: &[BTreeSet<usize>]| {
        let out = rows[u].len() - usize::from(rows[u].contains_key(&u));
        inn[u].len() * out
    };
    let mut heap = BinaryHeap::with_capacity(n);
    let mut current: Vec<usize> = (0..n).map(|u| score(u, &rows, &inn)).collect();
    heap.extend(current.iter().enumerate().map(|(u, &c)| Reverse((c, u))));
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);

    while let Some(Reverse((sc, v))) = heap.pop() {
        if !alive[v] || sc != current[v] {
            continue;
        }
        alive[v] = false;
        order.push(v);

        let self_p = rows[v].remove(&v).unwrap_or_else(Rational::zero);
        let denom = Rational::one() - self_p;
        if denom.is_zero() {
            return Err(Singular(v));
        }
        if !denom.is_one() {
            let inv = denom.recip();
            for q in rows[v].values_mut() {
                *q *= &inv;
            }
            for r in rewards[v].iter_mut() {
                *r *= &inv;
            }
        }
        let row_v = rows[v].clone();
        let rew_v = rewards[v].clone();

        let preds: Vec<usize> = std::mem::take(&mut inn[v]).into_iter().collect();
        for &u in &preds {
            let Some(a) = rows[u].remove(&v) else { continue };
            for (&w, q) in &row_v {
                let entry = rows[u].entry(w).or_insert_with(Rational::zero);
                *entry += &a * q;
                if w != u {
                    inn[w].insert(u);
                }
            }
            for j in 0..k {
                let add = &a * &rew_v[j];
                rewards[u][j] += add;
            }
        }
        for &w in row_v.keys() {
            inn[w].remove(&v);
        }
        let touched: BTreeSet<usize> = preds.iter().chain(row_v.keys()).copied().collect();
        for u in touched {
            if alive[u] {
                current[u] = score(u, &rows, &inn);
                heap.push(Reverse((current[u], u)));
            }
        }
    }

    let mut x: Vec<Vec<Rational>> = vec![Vec::new(); n];
    for &v in order.iter().rev() {
        let mut val = rewards[v].clone();
        for (w, q) in &rows[v] {
            for j in 0..k {
                val[j] += q * &x[*w][j];
            }
        }
        x[v] = val;
    }
    Ok(x)
}
