use super::{insertion_step, BreakRule, Cell, ComplexityTable, Entry, Setting, Witness};
use crate::collection::{max_finite_intersection_with_capacity, Collection, PLAIN_CAPACITY};
use crate::error::{Error, Result};
use crate::setalg::SetExpr;

/// Incremental driver of the plain procedure. Each `step` processes the
/// next language; earlier iterations are never recomputed.
#[derive(Clone, Debug)]
pub struct PlainBuilder {
    sets: Vec<SetExpr>,
    table: ComplexityTable,
    rule: BreakRule,
    capacity: usize,
}

impl PlainBuilder {
    pub fn new(c: &Collection) -> Self {
        PlainBuilder {
            sets: c.sets(),
            table: ComplexityTable::new(Setting::Plain, None),
            rule: BreakRule::Strict,
            capacity: PLAIN_CAPACITY,
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

    pub fn processed(&self) -> usize {
        self.table.len()
    }

    pub fn available(&self) -> usize {
        self.sets.len()
    }

    /// Best witness for the last cell of `prefix` (cell ids).
    pub fn evaluate(&self, prefix: &[usize]) -> Result<Witness> {
        evaluate(&self.sets, prefix, self.capacity)
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
                what: "prefix",
                len: i + 1,
                bound: self.capacity,
            });
        }
        self.table.ordering.push(i);
        let m_star = self.table.m_star();
        let (sets, capacity) = (&self.sets, self.capacity);
        let w = insertion_step(&mut self.table.ordering, &m_star, self.rule, |prefix| {
            evaluate(sets, prefix, capacity)
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

fn evaluate(sets: &[SetExpr], prefix: &[usize], capacity: usize) -> Result<Witness> {
    let refs: Vec<&SetExpr> = prefix.iter().map(|&id| &sets[id]).collect();
    let r = max_finite_intersection_with_capacity(&refs, refs.len() - 1, capacity)?;
    let mut cells: Vec<usize> = r.witness.iter().map(|&p| prefix[p]).collect();
    cells.sort_unstable();
    let tokens = match cells.split_first() {
        Some((first, rest)) => {
            let inter = rest
                .iter()
                .fold(sets[*first].clone(), |acc, &c| acc.intersect(&sets[c]));
            inter.iter_canonical().collect()
        }
        None => Vec::new(),
    };
    Ok(Witness {
        m: r.m,
        cells,
        tokens,
    })
}

/// Runs the plain procedure on the first `n` languages of `c`.
pub fn procedure1(c: &Collection, n: usize) -> Result<ComplexityTable> {
    if n > c.len() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: c.len(),
        });
    }
    let mut b = PlainBuilder::new(c);
    b.extend_to(n)?;
    Ok(b.into_table())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setalg::{AtomId, AtomRegistry};

    fn ex31() -> Collection {
        let reg = AtomRegistry::new((1..=8).map(|i| format!("p{i}"))).unwrap();
        let p = |i: u32| SetExpr::atom(AtomId(i - 1));
        let mut sets = vec![
            SetExpr::range(1, 100).union(&p(1)),
            SetExpr::range(1, 300).union(&p(2)),
            SetExpr::range(101, 200).union(&p(3)),
            SetExpr::range(201, 300).union(&p(4)),
        ];
        sets.extend((5..=8).map(p));
        Collection::from_sets(reg, sets).unwrap()
    }

    #[test]
    fn example_table() {
        let t = procedure1(&ex31(), 8).unwrap();
        assert_eq!(t.m_star(), vec![0, 100, 0, 0, 0, 0, 0, 0]);
        assert_eq!(t.entries[1].witness, vec![0, 1]);
        assert_eq!(t.entries[1].witness_set.len(), 100);
        assert!(t
            .entries
            .iter()
            .enumerate()
            .all(|(k, e)| k == 1 || e.witness.is_empty()));
        assert_eq!(t.ordering, vec![7, 6, 5, 4, 3, 2, 0, 1]);
    }

    #[test]
    fn singleton_and_duplicates() {
        let reg = AtomRegistry::empty();
        let one = Collection::from_sets(reg.clone(), vec![SetExpr::at_least(0)]).unwrap();
        let t = procedure1(&one, 1).unwrap();
        assert_eq!(t.m_star(), vec![0]);
        assert!(t.entries[0].witness.is_empty());
        let dup =
            Collection::from_sets(reg, vec![SetExpr::at_least(0), SetExpr::at_least(0)]).unwrap();
        let t = procedure1(&dup, 2).unwrap();
        assert_eq!(t.m_star(), vec![0, 0]);
        assert!(t.entries.iter().all(|e| e.witness.is_empty()));
    }

    #[test]
    fn non_strict_rule_changes_the_table() {
        let t = PlainBuilder::new(&ex31()).with_rule(BreakRule::NonStrict);
        let mut t = t;
        t.extend_to(8).unwrap();
        assert_eq!(t.table().m_star()[2], 100);
    }
}
