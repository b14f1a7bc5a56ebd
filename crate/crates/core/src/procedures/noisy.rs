use std::collections::HashMap;

use super::{insertion_step, BreakRule, Cell, ComplexityTable, Entry, Setting, Witness};
use crate::collection::{search_subcollections, Collection, WitnessResult};
use crate::error::{Error, Result};
use crate::setalg::{AtomRegistry, Cardinality, SetExpr, Token};

/// Default bound on the number of cells in a noisy prefix.
pub const NOISY_CAPACITY: usize = 36;

/// Position of `(level, i)` in the diagonal traversal; `i` is 1-based and
/// positions start at 1.
pub fn diag_index(level: u32, i: usize) -> u64 {
    assert!(i >= 1, "language indices are 1-based");
    let d = u64::from(level) + i as u64 - 1;
    d * (d + 1) / 2 + i as u64
}

/// Inverse of [`diag_index`]: `(level, i)` at position `pos >= 1`.
pub fn diag_elem(pos: u64) -> (u32, usize) {
    assert!(pos >= 1, "diagonal positions start at 1");
    // largest d with d(d+1)/2 < pos
    let mut d = ((2.0 * pos as f64).sqrt() as u64).saturating_sub(1);
    while (d + 1) * (d + 2) / 2 < pos {
        d += 1;
    }
    while d > 0 && d * (d + 1) / 2 >= pos {
        d -= 1;
    }
    let i = pos - d * (d + 1) / 2;
    ((d + 1 - i) as u32, i as usize)
}

/// Witness of the noisy search: `t` is the witness set and `witness` the
/// member positions within the prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoisyWitness {
    pub t: Vec<Token>,
    pub witness: Vec<usize>,
    pub m: u64,
}

/// Largest finite `T` such that some subcollection of `cells` containing
/// position `j` has finite intersection and each member `(a, L)`
/// `a`-contains `T`.
pub fn max_noisy_witness(
    cells: &[(u32, &SetExpr)],
    j: usize,
    registry: &AtomRegistry,
) -> Result<NoisyWitness> {
    max_noisy_witness_with_capacity(cells, j, registry, NOISY_CAPACITY)
}

pub fn max_noisy_witness_with_capacity(
    cells: &[(u32, &SetExpr)],
    j: usize,
    registry: &AtomRegistry,
    capacity: usize,
) -> Result<NoisyWitness> {
    if cells.len() > capacity {
        return Err(Error::Capacity {
            what: "noisy prefix",
            len: cells.len(),
            bound: capacity,
        });
    }
    if j >= cells.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: cells.len(),
        });
    }
    let sets: Vec<&SetExpr> = cells.iter().map(|c| c.1).collect();
    // a member implies the constraint of any same-language cell at a higher level
    let redundant = |k: usize, members: &[usize]| {
        members
            .iter()
            .any(|&m| sets[m] == sets[k] && cells[m].0 <= cells[k].0)
    };
    let found = search_subcollections(&sets, j, false, redundant, |members, inter| {
        inter.is_finite().then(|| {
            let member_cells: Vec<(u32, &SetExpr)> = members.iter().map(|&m| cells[m]).collect();
            inter.cardinality().finite().unwrap_or(0) + extra_plan(&member_cells, registry).total
        })
    });
    let Some(WitnessResult { m, witness }) = found else {
        return Ok(NoisyWitness {
            t: Vec::new(),
            witness: Vec::new(),
            m: 0,
        });
    };
    let member_cells: Vec<(u32, &SetExpr)> = witness.iter().map(|&m| cells[m]).collect();
    let t = materialize(&member_cells, registry);
    debug_assert_eq!(t.len() as u64, m);
    Ok(NoisyWitness { t, witness, m })
}

/// Optimal multiplicities of out-of-intersection tokens per violation
/// pattern.
struct ExtraPlan {
    total: u64,
    /// (pattern region, multiplicity)
    picks: Vec<(SetExpr, u64)>,
}

fn extra_plan(members: &[(u32, &SetExpr)], registry: &AtomRegistry) -> ExtraPlan {
    let budgets: Vec<u64> = members.iter().map(|m| u64::from(m.0)).collect();
    let total_budget: u64 = budgets.iter().sum();
    if total_budget == 0 {
        return ExtraPlan {
            total: 0,
            picks: Vec::new(),
        };
    }
    let universe = SetExpr::universe(registry);
    let k = members.len();
    let mut patterns: Vec<(u64, SetExpr, u64)> = Vec::new();
    for v in 1u64..(1 << k) {
        // a violated member needs budget
        if (0..k).any(|b| v >> b & 1 == 1 && budgets[b] == 0) {
            continue;
        }
        let mut region = universe.clone();
        for (b, (_, l)) in members.iter().enumerate() {
            region = if v >> b & 1 == 1 {
                region.difference(l)
            } else {
                region.intersect(l)
            };
            if region.is_empty() {
                break;
            }
        }
        let cap = match region.cardinality() {
            Cardinality::Finite(n) => n.min(total_budget),
            Cardinality::Infinite => total_budget,
        };
        if cap > 0 {
            patterns.push((v, region, cap));
        }
    }

    fn best(
        idx: usize,
        budgets: &mut Vec<u64>,
        patterns: &[(u64, SetExpr, u64)],
        memo: &mut HashMap<(usize, Vec<u64>), u64>,
    ) -> u64 {
        if idx == patterns.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(idx, budgets.clone())) {
            return v;
        }
        let (v, _, cap) = &patterns[idx];
        let bits: Vec<usize> = (0..budgets.len()).filter(|b| v >> b & 1 == 1).collect();
        let most = bits
            .iter()
            .map(|&b| budgets[b])
            .min()
            .unwrap_or(0)
            .min(*cap);
        let mut out = 0;
        for take in 0..=most {
            for &b in &bits {
                budgets[b] -= take;
            }
            out = out.max(take + best(idx + 1, budgets, patterns, memo));
            for &b in &bits {
                budgets[b] += take;
            }
        }
        memo.insert((idx, budgets.clone()), out);
        out
    }

    let mut memo = HashMap::new();
    let mut left = budgets.clone();
    let total = best(0, &mut left, &patterns, &mut memo);

    // walk the memo back to recover one optimal assignment
    let mut picks = Vec::new();
    let mut need = total;
    for idx in 0..patterns.len() {
        let (v, region, cap) = &patterns[idx];
        let bits: Vec<usize> = (0..left.len()).filter(|b| v >> b & 1 == 1).collect();
        let most = bits.iter().map(|&b| left[b]).min().unwrap_or(0).min(*cap);
        for take in (0..=most).rev() {
            for &b in &bits {
                left[b] -= take;
            }
            if take + best(idx + 1, &mut left, &patterns, &mut memo) == need {
                if take > 0 {
                    picks.push((region.clone(), take));
                }
                need -= take;
                break;
            }
            for &b in &bits {
                left[b] += take;
            }
        }
    }
    ExtraPlan { total, picks }
}

fn materialize(members: &[(u32, &SetExpr)], registry: &AtomRegistry) -> Vec<Token> {
    let inter = members
        .iter()
        .skip(1)
        .fold(members[0].1.clone(), |acc, m| acc.intersect(m.1));
    let mut t: Vec<Token> = inter.iter_canonical().collect();
    for (region, take) in extra_plan(members, registry).picks {
        t.extend(region.iter_canonical().take(take as usize));
    }
    t.sort();
    t
}

/// Incremental driver of the noisy procedure over the diagonal traversal.
#[derive(Clone, Debug)]
pub struct NoisyBuilder {
    sets: Vec<SetExpr>,
    registry: AtomRegistry,
    table: ComplexityTable,
    /// Diagonal position of each processed cell.
    positions: Vec<u64>,
    next_pos: u64,
    rule: BreakRule,
    capacity: usize,
}

impl NoisyBuilder {
    pub fn new(c: &Collection) -> Self {
        NoisyBuilder {
            sets: c.sets(),
            registry: c.registry.clone(),
            table: ComplexityTable::new(Setting::Noisy, None),
            positions: Vec::new(),
            next_pos: 1,
            rule: BreakRule::Strict,
            capacity: NOISY_CAPACITY,
        }
    }

    pub fn with_rule(mut self, rule: BreakRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn table(&self) -> &ComplexityTable {
        &self.table
    }

    pub fn into_table(self) -> ComplexityTable {
        self.table
    }

    pub fn positions(&self) -> &[u64] {
        &self.positions
    }

    /// Diagonal positions visited so far, including skipped ones.
    pub fn visited_positions(&self) -> u64 {
        self.next_pos - 1
    }

    pub fn evaluate(&self, prefix: &[usize]) -> Result<Witness> {
        evaluate(
            &self.sets,
            &self.registry,
            &self.table,
            prefix,
            self.capacity,
        )
    }

    /// Visits the next diagonal position; returns whether a cell was
    /// processed (positions naming languages beyond the collection are
    /// skipped).
    pub fn step_position(&mut self) -> Result<bool> {
        let pos = self.next_pos;
        let (level, i) = diag_elem(pos);
        if i > self.sets.len() {
            self.next_pos += 1;
            return Ok(false);
        }
        if self.table.len() >= self.capacity {
            return Err(Error::Capacity {
                what: "noisy prefix",
                len: self.table.len() + 1,
                bound: self.capacity,
            });
        }
        self.next_pos += 1;
        let id = self.table.len();
        self.table.entries.push(Entry {
            cell: Cell::noisy(level, i - 1),
            m_star: 0,
            witness: Vec::new(),
            witness_set: Vec::new(),
        });
        self.table.ordering.push(id);
        self.positions.push(pos);
        let m_star = self.table.m_star();
        let mut ordering = std::mem::take(&mut self.table.ordering);
        let (sets, registry, table, capacity) =
            (&self.sets, &self.registry, &self.table, self.capacity);
        let w = insertion_step(&mut ordering, &m_star, self.rule, |prefix| {
            evaluate(sets, registry, table, prefix, capacity)
        });
        self.table.ordering = ordering;
        let w = w?;
        let e = &mut self.table.entries[id];
        e.m_star = w.m;
        e.witness = w.cells;
        e.witness_set = w.tokens;
        Ok(true)
    }

    /// Processes every cell with diagonal position `<= pos`.
    pub fn extend_to_position(&mut self, pos: u64) -> Result<()> {
        while self.next_pos <= pos {
            self.step_position()?;
        }
        Ok(())
    }

    /// Processes cells until `n` cells exist.
    pub fn extend_to_cells(&mut self, n: usize) -> Result<()> {
        if self.sets.is_empty() {
            return Ok(());
        }
        while self.table.len() < n {
            self.step_position()?;
        }
        Ok(())
    }
}

fn evaluate(
    sets: &[SetExpr],
    registry: &AtomRegistry,
    table: &ComplexityTable,
    prefix: &[usize],
    capacity: usize,
) -> Result<Witness> {
    let cells: Vec<(u32, &SetExpr)> = prefix
        .iter()
        .map(|&id| {
            let c = table.entries[id].cell;
            (c.level.unwrap_or(0), &sets[c.index])
        })
        .collect();
    let w = max_noisy_witness_with_capacity(&cells, cells.len() - 1, registry, capacity)?;
    let mut ids: Vec<usize> = w.witness.iter().map(|&p| prefix[p]).collect();
    ids.sort_unstable();
    Ok(Witness {
        m: w.m,
        cells: ids,
        tokens: w.t,
    })
}

/// Runs the noisy procedure over every cell with diagonal position `<= l_max`.
pub fn procedure2(c: &Collection, l_max: u64) -> Result<ComplexityTable> {
    let mut b = NoisyBuilder::new(c);
    b.extend_to_position(l_max)?;
    Ok(b.into_table())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setalg::AtomId;

    #[test]
    fn diagonal_positions() {
        let expect = [(0, 1), (1, 1), (0, 2), (2, 1), (1, 2), (0, 3)];
        for (k, &(n, i)) in expect.iter().enumerate() {
            assert_eq!(diag_index(n, i), k as u64 + 1);
            assert_eq!(diag_elem(k as u64 + 1), (n, i));
        }
        for n in 0..=10 {
            for i in 1..=10 {
                assert_eq!(diag_elem(diag_index(n, i)), (n, i));
            }
        }
    }

    fn two() -> (AtomRegistry, SetExpr, SetExpr) {
        let reg = AtomRegistry::new(["a1"]).unwrap();
        let l2 = SetExpr::range(1, 5).union(&SetExpr::atom(AtomId(0)));
        (reg, SetExpr::at_least(1), l2)
    }

    #[test]
    fn witness_examples() {
        let (reg, l1, l2) = two();
        let w = max_noisy_witness(&[(0, &l1), (1, &l2)], 1, &reg).unwrap();
        assert_eq!(w.m, 6);
        assert_eq!(w.witness, vec![0, 1]);
        assert!(w.t.contains(&Token::Int(6)));
        let w = max_noisy_witness(&[(3, &l1)], 0, &reg).unwrap();
        assert_eq!((w.m, w.witness.len()), (0, 0));
        let w = max_noisy_witness(&[(0, &l1), (0, &l2)], 1, &reg).unwrap();
        assert_eq!(w.m, 5);
        assert_eq!(w.t, (1..=5).map(Token::Int).collect::<Vec<_>>());
    }
}
