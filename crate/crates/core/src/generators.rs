//! Generation algorithms driven by the complexity tables.
//!
//! Every generator consumes one adversary token per step. The plain, CP and
//! noisy generators emit a token; the representative generator emits a
//! distribution over tokens.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::collection::Collection;
use crate::error::{Error, Result};
use crate::procedures::representative::scarcity_from_counts;
use crate::procedures::{
    scarce_groups, GroupPartition, NoisyBuilder, PlainBuilder, ReprBuilder, Schedule,
};
use crate::setalg::{violations, SetExpr, Token};

/// Finite distribution with exact rational masses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Distribution(BTreeMap<Token, Rational64>);

impl Distribution {
    pub fn point(t: Token) -> Self {
        Distribution([(t, Rational64::one())].into_iter().collect())
    }

    /// Uniform over a nonempty finite set.
    pub fn uniform<'a>(tokens: impl IntoIterator<Item = &'a Token>) -> Self {
        let v: Vec<Token> = tokens.into_iter().copied().collect();
        let mass = Rational64::new(1, v.len().max(1) as i64);
        Distribution(v.into_iter().map(|t| (t, mass)).collect())
    }

    pub fn add(&mut self, t: Token, mass: Rational64) {
        if mass.is_zero() {
            return;
        }
        *self.0.entry(t).or_insert_with(Rational64::zero) += mass;
    }

    pub fn masses(&self) -> &BTreeMap<Token, Rational64> {
        &self.0
    }

    pub fn support(&self) -> impl Iterator<Item = &Token> {
        self.0.keys()
    }

    pub fn total(&self) -> Rational64 {
        self.0.values().copied().sum()
    }

    /// Induced distribution over groups.
    pub fn by_group(&self, p: &GroupPartition) -> Vec<Rational64> {
        let mut out = vec![Rational64::zero(); p.k()];
        for (t, m) in &self.0 {
            out[p.group_of(t)] += *m;
        }
        out
    }
}

/// Largest coordinate gap between two group distributions.
pub fn linf(a: &[Rational64], b: &[Rational64]) -> Rational64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if x > y { x - y } else { y - x })
        .fold(Rational64::zero(), |m, d| m.max(d))
}

/// Which ordering the plain-setting generator traverses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlainOrdering {
    /// The insertion-sorted ordering.
    Sorted,
    /// The collection's own order (the CP baseline).
    Identity,
}

/// Generator state shared by the token-emitting generators.
#[derive(Clone, Debug)]
struct History {
    seen: BTreeSet<Token>,
    t: u64,
    /// Per language: whether it contains every token seen so far.
    consistent: Vec<bool>,
}

impl History {
    fn new() -> Self {
        History {
            seen: BTreeSet::new(),
            t: 0,
            consistent: Vec::new(),
        }
    }

    fn push(&mut self, x: Token, sets: &[SetExpr]) {
        self.t += 1;
        if self.consistent.len() != sets.len() {
            self.consistent = vec![true; sets.len()];
        }
        if self.seen.insert(x) {
            for (ok, l) in self.consistent.iter_mut().zip(sets) {
                *ok = *ok && l.contains(&x);
            }
        }
    }

    fn subset_of(&self, id: usize) -> bool {
        self.consistent[id]
    }
}

/// Least token outside `forbidden`, falling back to the whole universe.
fn least_new_or_universe(
    inter: Option<&SetExpr>,
    universe: &SetExpr,
    forbidden: &BTreeSet<Token>,
) -> Token {
    inter
        .and_then(|s| s.least_new(forbidden))
        .or_else(|| universe.least_new(forbidden))
        .expect("the universe is infinite")
}

/// Plain-setting generator: the optimal algorithm with a sorted ordering,
/// or the CP baseline with the identity ordering and `f(t) = t`.
#[derive(Clone, Debug)]
pub struct ParetoGenerator {
    sets: Vec<SetExpr>,
    universe: SetExpr,
    builder: PlainBuilder,
    schedule: Schedule,
    ordering: PlainOrdering,
    history: History,
}

impl ParetoGenerator {
    pub fn new(c: &Collection, schedule: Schedule) -> Self {
        ParetoGenerator {
            sets: c.sets(),
            universe: SetExpr::universe(&c.registry),
            builder: PlainBuilder::new(c),
            schedule,
            ordering: PlainOrdering::Sorted,
            history: History::new(),
        }
    }

    pub fn cp_baseline(c: &Collection) -> Self {
        ParetoGenerator {
            ordering: PlainOrdering::Identity,
            ..ParetoGenerator::new(c, Schedule::Identity)
        }
    }

    pub fn seen(&self) -> &BTreeSet<Token> {
        &self.history.seen
    }

    /// Languages (0-based) currently in `I_t`, in traversal order.
    fn chosen(&mut self) -> Result<(Vec<usize>, Option<SetExpr>)> {
        let n = (self.schedule.eval(self.history.t) as usize).min(self.sets.len());
        let order: Vec<usize> = match self.ordering {
            PlainOrdering::Sorted => {
                self.builder.extend_to(n)?;
                self.builder.table().ordering.clone()
            }
            PlainOrdering::Identity => (0..n).collect(),
        };
        let mut picked = Vec::new();
        let mut inter: Option<SetExpr> = None;
        for id in order {
            if !self.history.subset_of(id) {
                continue;
            }
            let l = &self.sets[id];
            let next = inter.as_ref().map_or_else(|| l.clone(), |s| s.intersect(l));
            if !next.is_finite() {
                inter = Some(next);
                picked.push(id);
            }
        }
        Ok((picked, inter))
    }

    pub fn step(&mut self, x: Token) -> Result<Token> {
        self.history.push(x, &self.sets);
        let (_, inter) = self.chosen()?;
        Ok(least_new_or_universe(
            inter.as_ref(),
            &self.universe,
            &self.history.seen,
        ))
    }
}

/// Noisy generator over the diagonal traversal.
#[derive(Clone, Debug)]
pub struct NoisyGenerator {
    sets: Vec<SetExpr>,
    universe: SetExpr,
    builder: NoisyBuilder,
    schedule: Schedule,
    position_cap: u64,
    history: History,
    /// Distinct inputs with multiplicity ignored, kept as a list for
    /// containment counting.
    inputs: Vec<Token>,
}

impl NoisyGenerator {
    /// `position_cap` bounds the diagonal positions ever processed.
    pub fn new(c: &Collection, schedule: Schedule, position_cap: u64) -> Self {
        NoisyGenerator {
            sets: c.sets(),
            universe: SetExpr::universe(&c.registry),
            builder: NoisyBuilder::new(c),
            schedule,
            position_cap,
            history: History::new(),
            inputs: Vec::new(),
        }
    }

    pub fn step(&mut self, x: Token) -> Result<Token> {
        if !self.history.seen.contains(&x) {
            self.inputs.push(x);
        }
        self.history.push(x, &[]);
        let pos = self.schedule.eval(self.history.t).min(self.position_cap);
        self.builder.extend_to_position(pos)?;
        let table = self.builder.table();
        let mut inter: Option<SetExpr> = None;
        for &id in &table.ordering {
            let cell = table.entries[id].cell;
            let l = &self.sets[cell.index];
            if violations(&self.inputs, l) as u64 > cell.budget() {
                continue;
            }
            let next = inter.as_ref().map_or_else(|| l.clone(), |s| s.intersect(l));
            if !next.is_finite() {
                inter = Some(next);
            }
        }
        Ok(least_new_or_universe(
            inter.as_ref(),
            &self.universe,
            &self.history.seen,
        ))
    }
}

/// Representative generator: emits a distribution whose group profile
/// tracks the empirical one.
#[derive(Clone, Debug)]
pub struct ReprGenerator {
    sets: Vec<SetExpr>,
    builder: ReprBuilder,
    schedule: Schedule,
    history: History,
}

impl ReprGenerator {
    pub fn new(
        c: &Collection,
        partition: GroupPartition,
        alpha: Rational64,
        schedule: Schedule,
    ) -> Result<Self> {
        Ok(ReprGenerator {
            sets: c.sets(),
            builder: ReprBuilder::new(c, partition, alpha)?,
            schedule,
            history: History::new(),
        })
    }

    pub fn partition(&self) -> &GroupPartition {
        self.builder.partition()
    }

    pub fn step(&mut self, x: Token) -> Result<Distribution> {
        self.history.push(x, &self.sets);
        let n = (self.schedule.eval(self.history.t) as usize).min(self.sets.len());
        self.builder.extend_to(n)?;
        let p = self.builder.partition().clone();
        let alpha = self.builder.alpha();
        let s: Vec<Token> = self.history.seen.iter().copied().collect();
        let counts = p.counts(&s);
        let mut inter: Option<SetExpr> = None;
        for &id in &self.builder.table().ordering {
            if !self.history.subset_of(id) {
                continue;
            }
            let l = &self.sets[id];
            let next = inter
                .as_ref()
                .map_or_else(|| l.clone(), |acc| acc.intersect(l));
            let scarce = scarce_groups(&s, &p, &next);
            if !scarcity_from_counts(&counts, &scarce, alpha) {
                inter = Some(next);
            }
        }
        let Some(inter) = inter else {
            return Ok(Distribution::uniform(&s));
        };
        let scarce = scarce_groups(&s, &p, &inter);
        if scarce.len() == p.k() {
            return Err(Error::Parameter(
                "every group is scarce for the chosen languages".into(),
            ));
        }
        let total = Rational64::from_integer(s.len() as i64);
        let emp: Vec<Rational64> = counts
            .iter()
            .map(|&c| Rational64::from_integer(c as i64) / total)
            .collect();
        let spill: Rational64 = scarce.iter().map(|&g| emp[g]).sum::<Rational64>()
            / Rational64::from_integer((p.k() - scarce.len()) as i64);
        let rest = inter.subtract_finite(&s);
        let mut out = Distribution::default();
        for g in (0..p.k()).filter(|g| !scarce.contains(g)) {
            let s_g = p.groups()[g]
                .intersect(&rest)
                .iter_canonical()
                .next()
                .expect("non-scarce group has a fresh token");
            out.add(s_g, emp[g] + spill);
        }
        Ok(out)
    }
}

/// Collections from the impossibility constructions, on a finite window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObliviousKind {
    /// Languages `Z \ {e_i}`.
    Cominus,
    /// Languages `{1..100} ∪ Z_{>= e_i}`.
    RayFamily,
}

/// The `i`-th integer (1-based) in canonical order: 0, 1, -1, 2, -2, ...
pub fn canonical_int(i: usize) -> i64 {
    let k = (i - 1) as i64;
    if k % 2 == 1 {
        (k + 1) / 2
    } else {
        -(k / 2)
    }
}

impl ObliviousKind {
    /// Threshold of an undeclared language beyond the window.
    pub fn tail_time(self, i: usize) -> u64 {
        match self {
            ObliviousKind::Cominus => i as u64,
            ObliviousKind::RayFamily => 101,
        }
    }

    pub fn language(self, i: usize) -> SetExpr {
        let e = canonical_int(i);
        match self {
            ObliviousKind::Cominus => SetExpr::all_ints().subtract_finite(&[Token::Int(e)]),
            ObliviousKind::RayFamily => SetExpr::range(1, 100).union(&SetExpr::at_least(e)),
        }
    }

    /// Window collection of the first `n` languages.
    pub fn window(self, n: usize) -> Collection {
        let sets = (1..=n).map(|i| self.language(i)).collect();
        Collection::from_sets(crate::setalg::AtomRegistry::empty(), sets)
            .expect("window languages are infinite")
    }
}

/// Checks a declared time sequence for the finite-window surrogate of
/// admissibility: every time is at least 1 and the tail rule keeps every
/// threshold class infinite (or, for rays, every early class bounded).
pub fn check_admissible(kind: ObliviousKind, times: &[u64]) -> Result<()> {
    if let Some(i) = times.iter().position(|&t| t == 0) {
        return Err(Error::Inadmissible(format!(
            "time of language {} is 0",
            i + 1
        )));
    }
    match kind {
        // the tail t_i = i exceeds any t eventually, so {i : t_i >= t} is infinite
        ObliviousKind::Cominus => Ok(()),
        // only window languages can have t_i <= 100, so each early class is finite
        ObliviousKind::RayFamily => Ok(()),
    }
}

/// Input-oblivious generator from the impossibility proofs.
#[derive(Clone, Debug)]
pub struct ObliviousGenerator {
    kind: ObliviousKind,
    times: Vec<u64>,
    history: History,
    own: BTreeSet<Token>,
    last: Option<Token>,
}

impl ObliviousGenerator {
    pub fn new(kind: ObliviousKind, times: Vec<u64>) -> Result<Self> {
        check_admissible(kind, &times)?;
        Ok(ObliviousGenerator {
            kind,
            times,
            history: History::new(),
            own: BTreeSet::new(),
            last: None,
        })
    }

    pub fn time(&self, i: usize) -> u64 {
        self.times
            .get(i - 1)
            .copied()
            .unwrap_or_else(|| self.kind.tail_time(i))
    }

    /// Intersection of the current subcollection, or `None` when it is empty.
    fn current(&self) -> Option<SetExpr> {
        let w = self.times.len();
        match self.kind {
            ObliviousKind::Cominus => {
                let t = self.history.t;
                let mut excluded: Vec<Token> = (1..=w)
                    .filter(|&i| self.time(i) <= t)
                    .map(|i| Token::Int(canonical_int(i)))
                    .collect();
                // tail languages with t_i = i <= t
                excluded.extend(((w + 1)..=(t as usize)).map(|i| Token::Int(canonical_int(i))));
                (!excluded.is_empty()).then(|| SetExpr::all_ints().subtract_finite(&excluded))
            }
            ObliviousKind::RayFamily => {
                let size = self.history.seen.len() as u64;
                let block = SetExpr::range(1, 100);
                if size <= 100 {
                    let e = (1..=w)
                        .filter(|&i| self.time(i) <= size)
                        .map(canonical_int)
                        .max()?;
                    Some(block.union(&SetExpr::at_least(e)))
                } else {
                    // languages containing S_t are exactly those with e <= i
                    let i = self
                        .history
                        .seen
                        .iter()
                        .filter_map(|t| match *t {
                            Token::Int(n) if !(1..=100).contains(&n) => Some(n),
                            _ => None,
                        })
                        .min()?;
                    Some(block.union(&SetExpr::at_least(i)))
                }
            }
        }
    }

    pub fn step(&mut self, x: Token) -> Token {
        self.history.push(x, &[]);
        let inter = self.current().filter(|s| !s.is_empty());
        let out = match inter {
            Some(s) => {
                let mut both = self.history.seen.clone();
                both.extend(self.own.iter().copied());
                s.least_new(&both)
                    .or_else(|| s.least_new(&self.history.seen))
                    .or(self.last)
                    .unwrap_or_else(|| s.iter_canonical().next().expect("nonempty"))
            }
            None => SetExpr::all_ints()
                .least_new(&self.history.seen)
                .expect("the integers are infinite"),
        };
        self.own.insert(out);
        self.last = Some(out);
        out
    }
}
