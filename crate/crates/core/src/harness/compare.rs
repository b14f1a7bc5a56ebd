use std::collections::HashMap;

use crate::collection::{baseline_times, cp_complexity, Baseline, Collection};
use crate::error::{Error, Result};
use crate::oracle::{pareto_dominance, DominanceVerdict};
use crate::procedures::procedure1;
use crate::setalg::SetExpr;

/// Longest prefix searched over all reorderings.
pub const REORDER_LIMIT: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedTimes {
    pub name: String,
    pub times: Vec<u64>,
}

/// How the `m* + 1` sequence compares against every reordered CP sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReorderSummary {
    pub orderings: u64,
    pub dominates: u64,
    pub dominated_by: u64,
    pub equal: u64,
    pub incomparable: u64,
    /// Reordering (0-based) behind the `cp-best-order` sequence.
    pub best_order: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompareReport {
    /// Languages compared (a prefix of the collection).
    pub len: usize,
    pub sequences: Vec<NamedTimes>,
    /// `(a, b, verdict of a against b)` over all named pairs.
    pub verdicts: Vec<(String, String, DominanceVerdict)>,
    pub reorder: ReorderSummary,
}

impl CompareReport {
    pub fn times(&self, name: &str) -> Option<&[u64]> {
        self.sequences
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.times.as_slice())
    }

    pub fn verdict(&self, a: &str, b: &str) -> Option<DominanceVerdict> {
        self.verdicts
            .iter()
            .find(|(x, y, _)| x == a && y == b)
            .map(|(_, _, v)| *v)
    }

    /// No compared sequence beats `m* + 1` pointwise.
    pub fn optimal_undominated(&self) -> bool {
        self.reorder.dominated_by == 0
            && self
                .verdicts
                .iter()
                .all(|(a, _, v)| a != "m*+1" || *v != DominanceVerdict::DominatedBy)
    }
}

/// CP time of each language (indexed by original position) when the
/// collection is processed in `order`.
pub fn cp_times_for_order(c: &Collection, order: &[usize]) -> Result<Vec<u64>> {
    let r = c.reordered(order)?;
    let times = baseline_times(&r, Baseline::Cp)?;
    let mut out = vec![0; order.len()];
    for (pos, &lang) in order.iter().enumerate() {
        out[lang] = times[pos];
    }
    Ok(out)
}

/// Heap's algorithm over all permutations of `0..n`.
fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p)?;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p)?;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(())
}

/// Compares `m* + 1` (under the sufficient schedule) against LRT, default
/// CP and CP over every reordering of the first `REORDER_LIMIT` languages.
pub fn cmd_compare(c: &Collection) -> Result<CompareReport> {
    let n = c.len().min(REORDER_LIMIT);
    if n == 0 {
        return Err(Error::Parameter("empty collection".into()));
    }
    let c = c.prefix(n);
    let table = procedure1(&c, n)?;
    let optimal: Vec<u64> = table.m_star().iter().map(|m| m + 1).collect();
    let lrt = baseline_times(&c, Baseline::Lrt)?;
    let cp = baseline_times(&c, Baseline::Cp)?;

    let sets = c.sets();
    let mut memo: HashMap<(u32, usize), u64> = HashMap::new();
    let mut complexity = |mask: u32, lang: usize| -> Result<u64> {
        if let Some(&m) = memo.get(&(mask, lang)) {
            return Ok(m);
        }
        let mut refs: Vec<&SetExpr> = (0..n)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| &sets[b])
            .collect();
        refs.push(&sets[lang]);
        let m = cp_complexity(&refs, refs.len() - 1)?;
        memo.insert((mask, lang), m);
        Ok(m)
    };
    let mut summary = ReorderSummary::default();
    // reordering with the smallest total time; ties keep the first found
    let mut best: Option<(u64, Vec<usize>, Vec<u64>)> = None;
    for_each_permutation(n, |order| {
        let mut times = vec![0u64; n];
        let mut mask = 0u32;
        for (pos, &lang) in order.iter().enumerate() {
            times[lang] = (pos as u64 + 1).max(complexity(mask, lang)? + 1);
            mask |= 1 << lang;
        }
        summary.orderings += 1;
        match pareto_dominance(&optimal, &times)? {
            DominanceVerdict::Dominates => summary.dominates += 1,
            DominanceVerdict::DominatedBy => summary.dominated_by += 1,
            DominanceVerdict::Equal => summary.equal += 1,
            DominanceVerdict::Incomparable => summary.incomparable += 1,
        }
        let total: u64 = times.iter().sum();
        let better = match &best {
            None => true,
            Some((t, o, _)) => total < *t || (total == *t && order < &o[..]),
        };
        if better {
            best = Some((total, order.to_vec(), times));
        }
        Ok(())
    })?;

    let mut sequences = vec![
        NamedTimes {
            name: "m*+1".into(),
            times: optimal,
        },
        NamedTimes {
            name: "lrt".into(),
            times: lrt,
        },
        NamedTimes {
            name: "cp-default".into(),
            times: cp,
        },
    ];
    if let Some((_, order, times)) = best {
        summary.best_order = order;
        sequences.push(NamedTimes {
            name: "cp-best-order".into(),
            times,
        });
    }
    let mut verdicts = Vec::new();
    for a in &sequences {
        for b in &sequences {
            if a.name != b.name {
                verdicts.push((
                    a.name.clone(),
                    b.name.clone(),
                    pareto_dominance(&a.times, &b.times)?,
                ));
            }
        }
    }
    Ok(CompareReport {
        len: n,
        sequences,
        verdicts,
        reorder: summary,
    })
}
