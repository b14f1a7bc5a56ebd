//! Brute-force recomputations, kept structurally apart from the optimized
//! code paths they check.
//!
//! Nothing here calls into the procedure search or its optimizers: every
//! subcollection is enumerated as a bitmask, intersections are rebuilt from
//! scratch, witness sets are searched token by token, and the insertion
//! sort is replayed with its own loop.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collection::Collection;
use crate::error::{Error, Result};
use crate::procedures::representative::GroupPartition;
use crate::procedures::{diag_elem, Cell, ComplexityTable, Entry, Setting};
use crate::setalg::{AtomId, AtomPart, AtomRegistry, Endpoint, Interval, SetExpr, Token};

pub const ORACLE_CAPACITY: usize = 12;
pub const ORACLE_NOISY_CAPACITY: usize = 10;

/// Outcome of comparing two time sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DominanceVerdict {
    Equal,
    Dominates,
    DominatedBy,
    Incomparable,
}

impl DominanceVerdict {
    pub fn mirror(self) -> Self {
        match self {
            DominanceVerdict::Dominates => DominanceVerdict::DominatedBy,
            DominanceVerdict::DominatedBy => DominanceVerdict::Dominates,
            v => v,
        }
    }
}

/// Pointwise comparison where smaller times are better.
pub fn pareto_dominance(a: &[u64], b: &[u64]) -> Result<DominanceVerdict> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let a_better = a.iter().zip(b).any(|(x, y)| x < y);
    let b_better = a.iter().zip(b).any(|(x, y)| x > y);
    Ok(match (a_better, b_better) {
        (false, false) => DominanceVerdict::Equal,
        (true, false) => DominanceVerdict::Dominates,
        (false, true) => DominanceVerdict::DominatedBy,
        (true, true) => DominanceVerdict::Incomparable,
    })
}

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|b| mask >> b & 1 == 1).collect()
}

fn intersection_of(sets: &[&SetExpr], idx: &[usize]) -> SetExpr {
    let mut acc = sets[idx[0]].clone();
    for &k in &idx[1..] {
        acc = acc.intersect(sets[k]);
    }
    acc
}

/// Candidate ordering: larger score, then fewer members, then the
/// lexicographically smaller member list.
fn improves(score: u64, idx: &[usize], best: &Option<(u64, Vec<usize>)>) -> bool {
    match best {
        None => true,
        Some((m, w)) => {
            score > *m
                || (score == *m && (idx.len() < w.len() || (idx.len() == w.len() && idx < &w[..])))
        }
    }
}

/// Largest finite intersection over every subset containing `must`.
pub fn oracle_max_finite(sets: &[&SetExpr], must: usize) -> (u64, Vec<usize>) {
    let n = sets.len();
    let mut best: Option<(u64, Vec<usize>)> = None;
    for mask in 0u32..(1 << n) {
        if mask >> must & 1 == 0 {
            continue;
        }
        let idx = members(mask, n);
        if let Some(size) = intersection_of(sets, &idx).cardinality().finite() {
            if improves(size, &idx, &best) {
                best = Some((size, idx));
            }
        }
    }
    best.unwrap_or((0, Vec::new()))
}

/// Replays the insertion sort with a caller-supplied scorer of
/// (prefix of cell ids) -> (m, witness cell ids).
fn replay<F>(n_cells: usize, mut score: F) -> (Vec<u64>, Vec<Vec<usize>>, Vec<usize>)
where
    F: FnMut(&[usize]) -> (u64, Vec<usize>),
{
    let mut order: Vec<usize> = Vec::new();
    let mut m = vec![0u64; n_cells];
    let mut wit = vec![Vec::new(); n_cells];
    for i in 0..n_cells {
        order.push(i);
        let mut j = order.len();
        let (mut m_chk, mut c_chk);
        loop {
            (m_chk, c_chk) = score(&order[..j]);
            if j <= 1 || m_chk > m[order[j - 2]] {
                break;
            }
            order.swap(j - 1, j - 2);
            j -= 1;
        }
        c_chk.sort_unstable();
        m[i] = m_chk;
        wit[i] = c_chk;
    }
    (m, wit, order)
}

fn table_from(
    setting: Setting,
    alpha: Option<Rational64>,
    cells: Vec<Cell>,
    m: Vec<u64>,
    wit: Vec<Vec<usize>>,
    order: Vec<usize>,
) -> ComplexityTable {
    ComplexityTable {
        setting,
        alpha,
        entries: cells
            .into_iter()
            .zip(m.into_iter().zip(wit))
            .map(|(cell, (m_star, witness))| Entry {
                cell,
                m_star,
                witness,
                witness_set: Vec::new(),
            })
            .collect(),
        ordering: order,
    }
}

/// Plain table by naive search and literal replay. Witness sets are left
/// empty.
pub fn oracle_mstar(c: &Collection, n: usize) -> Result<ComplexityTable> {
    if n > ORACLE_CAPACITY || n > c.len() {
        return Err(Error::Capacity {
            what: "oracle prefix",
            len: n,
            bound: ORACLE_CAPACITY.min(c.len()),
        });
    }
    let sets = c.sets();
    let (m, wit, order) = replay(n, |prefix| {
        let refs: Vec<&SetExpr> = prefix.iter().map(|&id| &sets[id]).collect();
        let (m, w) = oracle_max_finite(&refs, refs.len() - 1);
        (m, w.into_iter().map(|p| prefix[p]).collect())
    });
    Ok(table_from(
        Setting::Plain,
        None,
        (0..n).map(Cell::plain).collect(),
        m,
        wit,
        order,
    ))
}

/// Tokens in `[-radius, radius]` and atom indices `0..=atom_depth`.
pub fn token_window(registry: &AtomRegistry, radius: i64, atom_depth: u64) -> Vec<Token> {
    let mut w: Vec<Token> = (-radius..=radius).map(Token::Int).collect();
    for a in registry.ids() {
        w.extend((0..=atom_depth).map(|k| Token::Atom(a, k)));
    }
    w
}

/// Largest witness set for the noisy search, by direct search over window
/// tokens. The window must contain enough tokens of every violation region.
pub fn oracle_noisy_t(cells: &[(u32, &SetExpr)], j: usize, window: &[Token]) -> Result<u64> {
    if cells.len() > ORACLE_NOISY_CAPACITY {
        return Err(Error::Capacity {
            what: "oracle noisy prefix",
            len: cells.len(),
            bound: ORACLE_NOISY_CAPACITY,
        });
    }
    let n = cells.len();
    let sets: Vec<&SetExpr> = cells.iter().map(|c| c.1).collect();
    let mut best = 0u64;
    for mask in 0u32..(1 << n) {
        if mask >> j & 1 == 0 {
            continue;
        }
        let idx = members(mask, n);
        let inter = intersection_of(&sets, &idx);
        let Some(base) = inter.cardinality().finite() else {
            continue;
        };
        let budgets: Vec<u64> = idx.iter().map(|&k| u64::from(cells[k].0)).collect();
        let total: u64 = budgets.iter().sum();
        // violation vector per window token outside the intersection
        let mut reps: Vec<Vec<bool>> = Vec::new();
        let mut per_pattern: std::collections::HashMap<Vec<bool>, u64> = Default::default();
        for t in window.iter().filter(|t| !inter.contains(t)) {
            let v: Vec<bool> = idx.iter().map(|&k| !cells[k].1.contains(t)).collect();
            let c = per_pattern.entry(v.clone()).or_insert(0);
            if *c < total {
                *c += 1;
                reps.push(v);
            }
        }
        fn dfs(k: usize, reps: &[Vec<bool>], left: &mut [u64]) -> u64 {
            if k == reps.len() {
                return 0;
            }
            let mut out = dfs(k + 1, reps, left);
            let fits = reps[k].iter().zip(left.iter()).all(|(&v, &b)| !v || b > 0);
            if fits {
                for (v, b) in reps[k].iter().zip(left.iter_mut()) {
                    if *v {
                        *b -= 1;
                    }
                }
                out = out.max(1 + dfs(k + 1, reps, left));
                for (v, b) in reps[k].iter().zip(left.iter_mut()) {
                    if *v {
                        *b += 1;
                    }
                }
            }
            out
        }
        let mut left = budgets.clone();
        best = best.max(base + dfs(0, &reps, &mut left));
    }
    Ok(best)
}

/// Noisy `m*` per cell, for all cells with diagonal position `<= l_max`,
/// by literal replay over the window search.
pub fn oracle_noisy_table(
    c: &Collection,
    l_max: u64,
    window: &[Token],
) -> Result<Vec<(Cell, u64)>> {
    let cells: Vec<Cell> = (1..=l_max)
        .map(diag_elem)
        .filter(|&(_, i)| i <= c.len())
        .map(|(n, i)| Cell::noisy(n, i - 1))
        .collect();
    if cells.len() > ORACLE_NOISY_CAPACITY {
        return Err(Error::Capacity {
            what: "oracle noisy prefix",
            len: cells.len(),
            bound: ORACLE_NOISY_CAPACITY,
        });
    }
    let sets = c.sets();
    let mut failure = None;
    let (m, _, _) = replay(cells.len(), |prefix| {
        let cs: Vec<(u32, &SetExpr)> = prefix
            .iter()
            .map(|&id| (cells[id].level.unwrap_or(0), &sets[cells[id].index]))
            .collect();
        match oracle_noisy_t(&cs, cs.len() - 1, window) {
            Ok(m) => (m, Vec::new()),
            Err(e) => {
                failure = Some(e);
                (0, Vec::new())
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(cells.into_iter().zip(m).collect())
}

/// Largest scarcity-suffering subset of the intersection, by enumerating
/// per-group counts. Groups with infinite count range up to the size bound
/// `K p / alpha`.
pub fn oracle_scarce_value(inter: &SetExpr, p: &GroupPartition, alpha: Rational64) -> u64 {
    let k = p.k();
    let caps: Vec<Option<u64>> = p
        .groups()
        .iter()
        .map(|a| a.intersect(inter).cardinality().finite())
        .collect();
    let pmax = caps.iter().flatten().copied().max().unwrap_or(0);
    let bound = (Rational64::from_integer((k as u64 * pmax) as i64) / alpha)
        .floor()
        .to_integer() as u64;
    let limits: Vec<u64> = caps.iter().map(|c| c.unwrap_or(bound)).collect();
    let mut counts = vec![0u64; k];
    let mut best = 0;
    loop {
        let n: u64 = counts.iter().sum();
        if n > best {
            let scarce: Vec<usize> = (0..k).filter(|&g| caps[g] == Some(counts[g])).collect();
            let emp = |g: usize| Rational64::new(counts[g] as i64, n as i64);
            let one = scarce.iter().any(|&g| emp(g) > alpha);
            let sum: Rational64 = scarce.iter().map(|&g| emp(g)).sum();
            let two = sum > alpha * Rational64::from_integer((k - scarce.len()) as i64);
            if one || two {
                best = n;
            }
        }
        // odometer
        let mut g = 0;
        loop {
            if g == k {
                return best;
            }
            if counts[g] < limits[g] {
                counts[g] += 1;
                break;
            }
            counts[g] = 0;
            g += 1;
        }
    }
}

/// Representative table by naive search and literal replay.
pub fn oracle_repr_table(
    c: &Collection,
    p: &GroupPartition,
    alpha: Rational64,
    n: usize,
) -> Result<ComplexityTable> {
    if n > ORACLE_CAPACITY || n > c.len() {
        return Err(Error::Capacity {
            what: "oracle prefix",
            len: n,
            bound: ORACLE_CAPACITY.min(c.len()),
        });
    }
    let sets = c.sets();
    let (m, wit, order) = replay(n, |prefix| {
        let refs: Vec<&SetExpr> = prefix.iter().map(|&id| &sets[id]).collect();
        let last = refs.len() - 1;
        let mut best: Option<(u64, Vec<usize>)> = None;
        for mask in 0u32..(1 << refs.len()) {
            if mask >> last & 1 == 0 {
                continue;
            }
            let idx = members(mask, refs.len());
            let v = oracle_scarce_value(&intersection_of(&refs, &idx), p, alpha);
            if v > 0 && improves(v, &idx, &best) {
                best = Some((v, idx));
            }
        }
        let (m, w) = best.unwrap_or((0, Vec::new()));
        (m, w.into_iter().map(|q| prefix[q]).collect())
    });
    Ok(table_from(
        Setting::Representative,
        Some(alpha),
        (0..n).map(Cell::plain).collect(),
        m,
        wit,
        order,
    ))
}

/// Random infinite languages over a window of integers and a five-atom
/// registry.
pub fn random_collection(seed: u64, n: usize) -> Collection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let registry = AtomRegistry::new((1..=5).map(|i| format!("q{i}"))).expect("distinct names");
    let mut sets = Vec::with_capacity(n);
    while sets.len() < n {
        let mut ivs = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let a = rng.gen_range(-20..=40);
            let b = rng.gen_range(a..=(a + 12).min(40));
            ivs.push(Interval::bounded(a, b));
        }
        let mut atoms = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            atoms.push((AtomId(rng.gen_range(0..5)), AtomPart::full()));
        }
        let mut set = SetExpr::from_parts(ivs, atoms);
        if set.is_finite() {
            set = match rng.gen_range(0..3) {
                0 => set.union(&SetExpr::interval(
                    Endpoint::Fin(rng.gen_range(-20..=40)),
                    Endpoint::PosInf,
                )),
                1 => set.union(&SetExpr::interval(
                    Endpoint::NegInf,
                    Endpoint::Fin(rng.gen_range(-20..=40)),
                )),
                _ => set.union(&SetExpr::atom(AtomId(rng.gen_range(0..5)))),
            };
        }
        sets.push(set);
    }
    Collection::from_sets(registry, sets).expect("generated languages are infinite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_examples() {
        let re = [1, 101, 1, 1, 5, 6, 7, 8];
        let de = [1, 101, 101, 101, 5, 6, 7, 8];
        assert_eq!(
            pareto_dominance(&re, &de).unwrap(),
            DominanceVerdict::Dominates
        );
        assert_eq!(
            pareto_dominance(&de, &re).unwrap(),
            DominanceVerdict::DominatedBy
        );
        assert_eq!(pareto_dominance(&de, &de).unwrap(), DominanceVerdict::Equal);
        assert_eq!(
            pareto_dominance(&[1, 5], &[5, 1]).unwrap(),
            DominanceVerdict::Incomparable
        );
        assert!(pareto_dominance(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn random_collections_are_reproducible() {
        let a = random_collection(7, 6);
        assert_eq!(a, random_collection(7, 6));
        assert_eq!(a.len(), 6);
    }

    #[test]
    fn noisy_window_search_small_cases() {
        let reg = AtomRegistry::new(["a1"]).unwrap();
        let l1 = SetExpr::at_least(1);
        let l2 = SetExpr::range(1, 5).union(&SetExpr::atom(AtomId(0)));
        let w = token_window(&reg, 30, 10);
        assert_eq!(oracle_noisy_t(&[(0, &l1), (1, &l2)], 1, &w).unwrap(), 6);
        assert_eq!(oracle_noisy_t(&[(0, &l1), (0, &l2)], 1, &w).unwrap(), 5);
        assert_eq!(oracle_noisy_t(&[(2, &l1)], 0, &w).unwrap(), 0);
    }
}
