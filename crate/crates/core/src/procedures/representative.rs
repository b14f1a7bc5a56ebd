use std::collections::{BTreeSet, HashMap};

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use super::{insertion_step, BreakRule, Cell, ComplexityTable, Entry, Setting, Witness};
use serde::{Deserialize, Serialize};

use crate::collection::{
    duplicate_of_member, search_subcollections, Collection, LanguageDoc, WitnessResult,
};
use crate::error::{Error, Result};
use crate::setalg::{AtomRegistry, Cardinality, SetExpr, Token};

/// Default bound on the representative prefix length.
pub const REPR_CAPACITY: usize = 16;
/// Largest supported number of groups.
pub const MAX_GROUPS: usize = 8;

/// Finite partition of the universe into groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPartition {
    groups: Vec<SetExpr>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupsDoc {
    pub groups: Vec<LanguageDoc>,
}

impl GroupPartition {
    /// Checks that the groups are pairwise disjoint and cover the universe
    /// of `registry`.
    pub fn new(groups: Vec<SetExpr>, registry: &AtomRegistry) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Partition("at least one group is required".into()));
        }
        if groups.len() > MAX_GROUPS {
            return Err(Error::Capacity {
                what: "partition",
                len: groups.len(),
                bound: MAX_GROUPS,
            });
        }
        let mut covered = SetExpr::empty();
        for (g, a) in groups.iter().enumerate() {
            a.check_registry(registry)?;
            if !covered.intersect(a).is_empty() {
                return Err(Error::Partition(format!(
                    "group {} overlaps an earlier group",
                    g + 1
                )));
            }
            covered = covered.union(a);
        }
        if !covered.complement(registry).is_empty() {
            return Err(Error::Partition("groups do not cover the universe".into()));
        }
        Ok(GroupPartition { groups })
    }

    /// Reads `{"groups": [set, ...]}` with sets in the collection format.
    pub fn from_json(text: &str, registry: &AtomRegistry) -> Result<Self> {
        let doc: GroupsDoc = serde_json::from_str(text)?;
        let groups = doc
            .groups
            .iter()
            .map(|g| g.to_set(registry))
            .collect::<Result<_>>()?;
        GroupPartition::new(groups, registry)
    }

    pub fn to_doc(&self, registry: &AtomRegistry) -> GroupsDoc {
        GroupsDoc {
            groups: self
                .groups
                .iter()
                .enumerate()
                .map(|(g, a)| LanguageDoc::from_set(&format!("A{}", g + 1), a, registry))
                .collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[SetExpr] {
        &self.groups
    }

    pub fn group_of(&self, t: &Token) -> usize {
        self.groups
            .iter()
            .position(|g| g.contains(t))
            .expect("partition covers every registered token")
    }

    /// Token count per group.
    pub fn counts<'a>(&self, tokens: impl IntoIterator<Item = &'a Token>) -> Vec<u64> {
        let mut c = vec![0; self.k()];
        for t in tokens {
            c[self.group_of(t)] += 1;
        }
        c
    }

    /// Empirical group distribution of a nonempty token set.
    pub fn empirical(&self, tokens: &[Token]) -> Vec<Rational64> {
        let n = tokens.len() as i64;
        self.counts(tokens)
            .into_iter()
            .map(|c| Rational64::new(c as i64, n.max(1)))
            .collect()
    }
}

/// Groups with no token of `inter` outside `t`.
pub fn scarce_groups(t: &[Token], p: &GroupPartition, inter: &SetExpr) -> BTreeSet<usize> {
    let distinct: BTreeSet<&Token> = t.iter().collect();
    (0..p.k())
        .filter(|&g| {
            let a = p.groups[g].intersect(inter);
            match a.cardinality() {
                Cardinality::Infinite => false,
                Cardinality::Finite(n) => {
                    distinct.iter().filter(|x| a.contains(x)).count() as u64 == n
                }
            }
        })
        .collect()
}

/// The scarcity test on group counts of `t` and its scarce groups.
pub(crate) fn scarcity_from_counts(
    counts: &[u64],
    scarce: &BTreeSet<usize>,
    alpha: Rational64,
) -> bool {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return false;
    }
    let emp = |g: usize| Rational64::new(counts[g] as i64, n as i64);
    if scarce.iter().any(|&g| emp(g) > alpha) {
        return true;
    }
    let sum: Rational64 = scarce.iter().map(|&g| emp(g)).sum();
    sum > alpha * Rational64::from_integer((counts.len() - scarce.len()) as i64)
}

/// Whether `t` suffers group scarcity with respect to a subcollection whose
/// intersection is `inter`. An empty `t` never does.
pub fn suffers_scarcity(
    t: &[Token],
    inter: &SetExpr,
    p: &GroupPartition,
    alpha: Rational64,
) -> bool {
    let scarce = scarce_groups(t, p, inter);
    scarcity_from_counts(&p.counts(t), &scarce, alpha)
}

/// Largest scarcity-suffering subset of `inter`, as a size and per-group
/// counts; `None` when no nonempty subset qualifies.
pub(crate) fn best_scarce_counts(
    inter: &SetExpr,
    p: &GroupPartition,
    alpha: Rational64,
) -> Option<(u64, Vec<u64>)> {
    let caps: Vec<Cardinality> = p
        .groups
        .iter()
        .map(|a| a.intersect(inter).cardinality())
        .collect();
    if let Cardinality::Finite(n) = inter.cardinality() {
        // T = inter makes every group scarce
        let counts = caps.iter().map(|c| c.finite().unwrap_or(0)).collect();
        return (n > 0).then_some((n, counts));
    }
    let k = p.k();
    let zero: Vec<usize> = (0..k)
        .filter(|&g| caps[g] == Cardinality::Finite(0))
        .collect();
    let positive: Vec<usize> = (0..k)
        .filter(|&g| matches!(caps[g], Cardinality::Finite(n) if n > 0))
        .collect();
    let mut best: Option<(u64, Vec<u64>)> = None;
    for sub in 0u32..(1 << positive.len()) {
        let full: Vec<usize> = (0..positive.len())
            .filter(|b| sub >> b & 1 == 1)
            .map(|b| positive[b])
            .collect();
        let scarce_len = zero.len() + full.len();
        let s_b: u64 = full.iter().map(|&g| caps[g].finite().unwrap_or(0)).sum();
        let max_c = full
            .iter()
            .map(|&g| caps[g].finite().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let free = (k - scarce_len) as i64;
        let m = Rational64::from_integer(max_c as i64).max(Rational64::new(s_b as i64, free));
        if m.is_zero() {
            continue;
        }
        // largest N with N < m / alpha
        let strict = (m / alpha).ceil().to_integer() - 1;
        let headroom: Option<u64> = (0..k)
            .filter(|g| !zero.contains(g) && !full.contains(g))
            .map(|g| caps[g].finite().map(|c| c - 1))
            .sum::<Option<u64>>();
        let mut n = strict.to_u64().unwrap_or(0);
        if let Some(h) = headroom {
            n = n.min(s_b + h);
        }
        if strict < 1 || n < s_b.max(1) {
            continue;
        }
        if best.as_ref().is_some_and(|b| b.0 >= n) {
            continue;
        }
        let mut counts = vec![0u64; k];
        for &g in &full {
            counts[g] = caps[g].finite().unwrap_or(0);
        }
        let mut rest = n - s_b;
        for g in 0..k {
            if rest == 0 {
                break;
            }
            if zero.contains(&g) || full.contains(&g) {
                continue;
            }
            let room = caps[g].finite().map_or(rest, |c| (c - 1).min(rest));
            counts[g] = room;
            rest -= room;
        }
        best = Some((n, counts));
    }
    best
}

fn materialize(inter: &SetExpr, p: &GroupPartition, counts: &[u64]) -> Vec<Token> {
    let mut t = Vec::new();
    for (g, &n) in counts.iter().enumerate() {
        t.extend(
            p.groups[g]
                .intersect(inter)
                .iter_canonical()
                .take(n as usize),
        );
    }
    t.sort();
    t
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScarceWitness {
    pub t: Vec<Token>,
    pub witness: Vec<usize>,
    pub m: u64,
}

/// Largest `T` contained in every member of some subcollection of
/// `prefix` that contains position `j`, such that `T` suffers group
/// scarcity with respect to it.
pub fn max_scarce_witness(
    prefix: &[&SetExpr],
    j: usize,
    p: &GroupPartition,
    alpha: Rational64,
) -> Result<ScarceWitness> {
    max_scarce_witness_with_capacity(prefix, j, p, alpha, REPR_CAPACITY)
}

pub fn max_scarce_witness_with_capacity(
    prefix: &[&SetExpr],
    j: usize,
    p: &GroupPartition,
    alpha: Rational64,
    capacity: usize,
) -> Result<ScarceWitness> {
    check_alpha(alpha)?;
    if prefix.len() > capacity {
        return Err(Error::Capacity {
            what: "representative prefix",
            len: prefix.len(),
            bound: capacity,
        });
    }
    if j >= prefix.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: prefix.len(),
        });
    }
    let mut cache: HashMap<SetExpr, Option<u64>> = HashMap::new();
    let found = search_subcollections(prefix, j, true, duplicate_of_member(prefix), |_, inter| {
        *cache
            .entry(inter.clone())
            .or_insert_with(|| best_scarce_counts(inter, p, alpha).map(|b| b.0))
    });
    let Some(WitnessResult { m, witness }) = found else {
        return Ok(ScarceWitness {
            t: Vec::new(),
            witness: Vec::new(),
            m: 0,
        });
    };
    let inter = witness
        .iter()
        .skip(1)
        .fold(prefix[witness[0]].clone(), |acc, &w| {
            acc.intersect(prefix[w])
        });
    let (_, counts) = best_scarce_counts(&inter, p, alpha).expect("witness was scored");
    let t = materialize(&inter, p, &counts);
    debug_assert!(suffers_scarcity(&t, &inter, p, alpha));
    Ok(ScarceWitness { t, witness, m })
}

pub(crate) fn check_alpha(alpha: Rational64) -> Result<()> {
    if alpha <= Rational64::zero() || alpha > Rational64::from_integer(1) {
        return Err(Error::Parameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(())
}

/// Incremental driver of the representative procedure.
#[derive(Clone, Debug)]
pub struct ReprBuilder {
    sets: Vec<SetExpr>,
    partition: GroupPartition,
    alpha: Rational64,
    table: ComplexityTable,
    rule: BreakRule,
    capacity: usize,
}

impl ReprBuilder {
    pub fn new(c: &Collection, partition: GroupPartition, alpha: Rational64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(ReprBuilder {
            sets: c.sets(),
            partition,
            alpha,
            table: ComplexityTable::new(Setting::Representative, Some(alpha)),
            rule: BreakRule::Strict,
            capacity: REPR_CAPACITY,
        })
    }

    pub fn with_rule(mut self, rule: BreakRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn table(&self) -> &ComplexityTable {
        &self.table
    }

    pub fn into_table(self) -> ComplexityTable {
        self.table
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    pub fn alpha(&self) -> Rational64 {
        self.alpha
    }

    pub fn available(&self) -> usize {
        self.sets.len()
    }

    pub fn evaluate(&self, prefix: &[usize]) -> Result<Witness> {
        evaluate(
            &self.sets,
            &self.partition,
            self.alpha,
            prefix,
            self.capacity,
        )
    }

    pub fn step(&mut self) -> Result<()> {
        let i = self.table.len();
        if i >= self.sets.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.sets.len(),
            });
        }
        if i >= self.capacity {
            return Err(Error::Capacity {
                what: "representative prefix",
                len: i + 1,
                bound: self.capacity,
            });
        }
        self.table.ordering.push(i);
        let m_star = self.table.m_star();
        let (sets, p, alpha, capacity) = (&self.sets, &self.partition, self.alpha, self.capacity);
        let w = insertion_step(&mut self.table.ordering, &m_star, self.rule, |prefix| {
            evaluate(sets, p, alpha, prefix, capacity)
        })?;
        self.table.entries.push(Entry {
            cell: Cell::plain(i),
            m_star: w.m,
            witness: w.cells,
            witness_set: w.tokens,
        });
        Ok(())
    }

    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        while self.table.len() < n {
            self.step()?;
        }
        Ok(())
    }
}

fn evaluate(
    sets: &[SetExpr],
    p: &GroupPartition,
    alpha: Rational64,
    prefix: &[usize],
    capacity: usize,
) -> Result<Witness> {
    let refs: Vec<&SetExpr> = prefix.iter().map(|&id| &sets[id]).collect();
    let w = max_scarce_witness_with_capacity(&refs, refs.len() - 1, p, alpha, capacity)?;
    let mut cells: Vec<usize> = w.witness.iter().map(|&q| prefix[q]).collect();
    cells.sort_unstable();
    Ok(Witness {
        m: w.m,
        cells,
        tokens: w.t,
    })
}

/// Runs the representative procedure on the first `n` languages.
pub fn procedure3(
    c: &Collection,
    p: &GroupPartition,
    alpha: Rational64,
    n: usize,
) -> Result<ComplexityTable> {
    if n > c.len() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: c.len(),
        });
    }
    let mut b = ReprBuilder::new(c, p.clone(), alpha)?;
    b.extend_to(n)?;
    Ok(b.into_table())
}
