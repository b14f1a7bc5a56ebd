//! Symbolic algebra over countable subsets of the universe.
//!
//! The universe is the integers together with one infinite stream per
//! registered atom: `U = Z ⊎ (atoms × N)`. A [`SetExpr`] stores the integer
//! part as a sorted list of closed, pairwise disjoint, non-adjacent
//! intervals and each atom part as either a finite subset of the stream or a
//! cofinite one (the stream minus a finite exclusion set). That family is
//! closed under intersection, union, difference and complement, and both
//! membership and finiteness stay exactly decidable.
//!
//! Tokens are visited in a fixed canonical order: round `r = 0, 1, 2, ...`
//! yields `Int(r)`, then `Int(-r)` when `r > 0`, then `Atom(a, r)` for every
//! atom `a` in id order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Finite integer endpoints must stay strictly inside this magnitude so that
/// `x ± 1` never overflows.
pub const MAX_ABS_INT: i64 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    Int(i64),
    Atom(AtomId, u64),
}

impl Token {
    /// `(round, slot)` position in the canonical order.
    pub fn canonical_key(&self) -> (u64, u64) {
        match *self {
            Token::Int(n) if n >= 0 => (n as u64, 0),
            Token::Int(n) => (n.unsigned_abs(), 1),
            Token::Atom(a, k) => (k, 2 + u64::from(a.0)),
        }
    }
}

impl Ord for Token {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_key().cmp(&other.canonical_key())
    }
}

impl PartialOrd for Token {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered list of atom streams known to a collection.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AtomRegistry {
    names: Vec<String>,
}

impl AtomRegistry {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::DuplicateAtom(n.clone()));
            }
        }
        Ok(AtomRegistry { names })
    }

    pub fn empty() -> Self {
        AtomRegistry::default()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Result<AtomId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|p| AtomId(p as u32))
            .ok_or_else(|| Error::UnknownAtom(name.to_string()))
    }

    pub fn name(&self, id: AtomId) -> Option<&str> {
        self.names.get(id.0 as usize).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ids(&self) -> impl Iterator<Item = AtomId> + '_ {
        (0..self.names.len() as u32).map(AtomId)
    }

    pub fn contains(&self, id: AtomId) -> bool {
        (id.0 as usize) < self.names.len()
    }

    /// Human-readable token: integers as-is, atom elements as `name[k]`.
    pub fn show(&self, t: &Token) -> String {
        match *t {
            Token::Int(n) => n.to_string(),
            Token::Atom(a, k) => match self.name(a) {
                Some(name) => format!("{name}[{k}]"),
                None => format!("#{}[{k}]", a.0),
            },
        }
    }

    pub fn check_token(&self, t: &Token) -> Result<()> {
        match *t {
            Token::Atom(a, _) if !self.contains(a) => Err(Error::AtomOutsideRegistry(a.0)),
            _ => Ok(()),
        }
    }
}

/// Interval endpoint over the extended integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    NegInf,
    Fin(i64),
    PosInf,
}

impl Endpoint {
    fn wide(self) -> i128 {
        match self {
            Endpoint::NegInf => i128::MIN,
            Endpoint::Fin(x) => i128::from(x),
            Endpoint::PosInf => i128::MAX,
        }
    }

    fn pred(self) -> Endpoint {
        match self {
            Endpoint::Fin(x) => Endpoint::Fin(x - 1),
            e => e,
        }
    }

    fn succ(self) -> Endpoint {
        match self {
            Endpoint::Fin(x) => Endpoint::Fin(x + 1),
            e => e,
        }
    }
}

/// Closed integer interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl Interval {
    pub fn new(lo: Endpoint, hi: Endpoint) -> Self {
        Interval { lo, hi }
    }

    pub fn bounded(lo: i64, hi: i64) -> Self {
        Interval::new(Endpoint::Fin(lo), Endpoint::Fin(hi))
    }

    fn is_valid(&self) -> bool {
        self.lo != Endpoint::PosInf && self.hi != Endpoint::NegInf && self.lo <= self.hi
    }

    fn contains(&self, x: i64) -> bool {
        self.lo <= Endpoint::Fin(x) && Endpoint::Fin(x) <= self.hi
    }

    fn len(&self) -> Option<u64> {
        match (self.lo, self.hi) {
            (Endpoint::Fin(a), Endpoint::Fin(b)) => {
                Some((i128::from(b) - i128::from(a) + 1) as u64)
            }
            _ => None,
        }
    }
}

/// Subset of one atom stream.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AtomPart {
    /// The whole stream minus the listed indices.
    Cofinite(BTreeSet<u64>),
    /// Exactly the listed indices; never empty in normal form.
    Finite(BTreeSet<u64>),
}

impl AtomPart {
    pub fn full() -> Self {
        AtomPart::Cofinite(BTreeSet::new())
    }

    pub fn contains(&self, k: u64) -> bool {
        match self {
            AtomPart::Cofinite(ex) => !ex.contains(&k),
            AtomPart::Finite(inc) => inc.contains(&k),
        }
    }

    /// The excluded or included indices.
    pub fn listed(&self) -> &BTreeSet<u64> {
        match self {
            AtomPart::Cofinite(s) | AtomPart::Finite(s) => s,
        }
    }

    fn intersect(&self, other: &AtomPart) -> AtomPart {
        use AtomPart::*;
        match (self, other) {
            (Cofinite(a), Cofinite(b)) => Cofinite(a.union(b).copied().collect()),
            (Cofinite(ex), Finite(inc)) | (Finite(inc), Cofinite(ex)) => {
                Finite(inc.difference(ex).copied().collect())
            }
            (Finite(a), Finite(b)) => Finite(a.intersection(b).copied().collect()),
        }
    }

    fn union(&self, other: &AtomPart) -> AtomPart {
        use AtomPart::*;
        match (self, other) {
            (Cofinite(a), Cofinite(b)) => Cofinite(a.intersection(b).copied().collect()),
            (Cofinite(ex), Finite(inc)) | (Finite(inc), Cofinite(ex)) => {
                Cofinite(ex.difference(inc).copied().collect())
            }
            (Finite(a), Finite(b)) => Finite(a.union(b).copied().collect()),
        }
    }

    fn complement(&self) -> AtomPart {
        match self {
            AtomPart::Cofinite(ex) => AtomPart::Finite(ex.clone()),
            AtomPart::Finite(inc) => AtomPart::Cofinite(inc.clone()),
        }
    }

    fn is_empty(&self) -> bool {
        matches!(self, AtomPart::Finite(s) if s.is_empty())
    }

    /// Smallest member index `>= from`.
    fn next_from(&self, from: u64) -> Option<u64> {
        match self {
            AtomPart::Cofinite(ex) => {
                let mut k = from;
                while ex.contains(&k) {
                    k += 1;
                }
                Some(k)
            }
            AtomPart::Finite(inc) => inc.range(from..).next().copied(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cardinality {
    Finite(u64),
    Infinite,
}

impl Cardinality {
    pub fn is_finite(&self) -> bool {
        matches!(self, Cardinality::Finite(_))
    }

    pub fn finite(&self) -> Option<u64> {
        match *self {
            Cardinality::Finite(n) => Some(n),
            Cardinality::Infinite => None,
        }
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinality::Finite(n) => write!(f, "{n}"),
            Cardinality::Infinite => f.write_str("inf"),
        }
    }
}

/// Normal-form symbolic subset of the universe.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SetExpr {
    intervals: Vec<Interval>,
    atoms: BTreeMap<AtomId, AtomPart>,
}

impl SetExpr {
    pub fn empty() -> Self {
        SetExpr::default()
    }

    /// Builds a set from arbitrary parts, normalizing them.
    pub fn from_parts(
        intervals: impl IntoIterator<Item = Interval>,
        atoms: impl IntoIterator<Item = (AtomId, AtomPart)>,
    ) -> Self {
        let mut atom_map: BTreeMap<AtomId, AtomPart> = BTreeMap::new();
        for (id, part) in atoms {
            let merged = match atom_map.remove(&id) {
                Some(prev) => prev.union(&part),
                None => part,
            };
            atom_map.insert(id, merged);
        }
        atom_map.retain(|_, p| !p.is_empty());
        SetExpr {
            intervals: normalize_intervals(intervals.into_iter().collect()),
            atoms: atom_map,
        }
    }

    pub fn interval(lo: Endpoint, hi: Endpoint) -> Self {
        SetExpr::from_parts([Interval::new(lo, hi)], [])
    }

    pub fn range(lo: i64, hi: i64) -> Self {
        SetExpr::from_parts([Interval::bounded(lo, hi)], [])
    }

    /// `[lo, +inf)`
    pub fn at_least(lo: i64) -> Self {
        SetExpr::interval(Endpoint::Fin(lo), Endpoint::PosInf)
    }

    /// `(-inf, hi]`
    pub fn at_most(hi: i64) -> Self {
        SetExpr::interval(Endpoint::NegInf, Endpoint::Fin(hi))
    }

    pub fn all_ints() -> Self {
        SetExpr::interval(Endpoint::NegInf, Endpoint::PosInf)
    }

    pub fn atom(id: AtomId) -> Self {
        SetExpr::from_parts([], [(id, AtomPart::full())])
    }

    pub fn universe(registry: &AtomRegistry) -> Self {
        SetExpr::from_parts(
            [Interval::new(Endpoint::NegInf, Endpoint::PosInf)],
            registry.ids().map(|id| (id, AtomPart::full())),
        )
    }

    pub fn from_tokens<'a>(tokens: impl IntoIterator<Item = &'a Token>) -> Self {
        let mut ints = Vec::new();
        let mut atoms: BTreeMap<AtomId, BTreeSet<u64>> = BTreeMap::new();
        for t in tokens {
            match *t {
                Token::Int(n) => ints.push(Interval::bounded(n, n)),
                Token::Atom(a, k) => {
                    atoms.entry(a).or_default().insert(k);
                }
            }
        }
        SetExpr::from_parts(
            ints,
            atoms.into_iter().map(|(a, s)| (a, AtomPart::Finite(s))),
        )
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn atom_parts(&self) -> &BTreeMap<AtomId, AtomPart> {
        &self.atoms
    }

    /// Rebuilds the normal form. Values produced by this module are already
    /// normalized, so this is the identity on them.
    pub fn normalize(&self) -> SetExpr {
        SetExpr::from_parts(
            self.intervals.iter().copied(),
            self.atoms.iter().map(|(a, p)| (*a, p.clone())),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.atoms.is_empty()
    }

    pub fn contains(&self, t: &Token) -> bool {
        match *t {
            Token::Int(n) => {
                let idx = self
                    .intervals
                    .partition_point(|iv| iv.lo <= Endpoint::Fin(n));
                idx > 0 && self.intervals[idx - 1].contains(n)
            }
            Token::Atom(a, k) => self.atoms.get(&a).is_some_and(|p| p.contains(k)),
        }
    }

    pub fn cardinality(&self) -> Cardinality {
        let mut total: u64 = 0;
        for iv in &self.intervals {
            match iv.len() {
                Some(n) => total = total.saturating_add(n),
                None => return Cardinality::Infinite,
            }
        }
        for part in self.atoms.values() {
            match part {
                AtomPart::Cofinite(_) => return Cardinality::Infinite,
                AtomPart::Finite(s) => total = total.saturating_add(s.len() as u64),
            }
        }
        Cardinality::Finite(total)
    }

    pub fn is_finite(&self) -> bool {
        self.cardinality().is_finite()
    }

    pub fn intersect(&self, other: &SetExpr) -> SetExpr {
        let mut intervals = Vec::new();
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let lo = a[i].lo.max(b[j].lo);
            let hi = a[i].hi.min(b[j].hi);
            if lo <= hi {
                intervals.push(Interval::new(lo, hi));
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        let mut atoms = BTreeMap::new();
        for (id, p) in &self.atoms {
            if let Some(q) = other.atoms.get(id) {
                let r = p.intersect(q);
                if !r.is_empty() {
                    atoms.insert(*id, r);
                }
            }
        }
        SetExpr { intervals, atoms }
    }

    pub fn union(&self, other: &SetExpr) -> SetExpr {
        let mut intervals = self.intervals.clone();
        intervals.extend_from_slice(&other.intervals);
        let mut atoms = self.atoms.clone();
        for (id, q) in &other.atoms {
            let merged = match atoms.get(id) {
                Some(p) => p.union(q),
                None => q.clone(),
            };
            atoms.insert(*id, merged);
        }
        SetExpr {
            intervals: normalize_intervals(intervals),
            atoms,
        }
    }

    /// `self \ other`; needs no registry.
    pub fn difference(&self, other: &SetExpr) -> SetExpr {
        let ints = SetExpr {
            intervals: complement_intervals(&other.intervals),
            atoms: BTreeMap::new(),
        };
        let mut out = self.intersect(&ints);
        for (id, p) in &self.atoms {
            let part = match other.atoms.get(id) {
                Some(q) => p.intersect(&q.complement()),
                None => p.clone(),
            };
            if part.is_empty() {
                out.atoms.remove(id);
            } else {
                out.atoms.insert(*id, part);
            }
        }
        out
    }

    /// Universe minus `self`, relative to the registry's atoms.
    pub fn complement(&self, registry: &AtomRegistry) -> SetExpr {
        SetExpr::universe(registry).difference(self)
    }

    /// Removes a finite set of tokens.
    pub fn subtract_finite<'a>(&self, tokens: impl IntoIterator<Item = &'a Token>) -> SetExpr {
        self.difference(&SetExpr::from_tokens(tokens))
    }

    pub fn is_subset_of(&self, other: &SetExpr) -> bool {
        self.difference(other).is_empty()
    }

    /// Fails if the set mentions atoms outside the registry.
    pub fn check_registry(&self, registry: &AtomRegistry) -> Result<()> {
        match self.atoms.keys().find(|a| !registry.contains(**a)) {
            Some(a) => Err(Error::AtomOutsideRegistry(a.0)),
            None => Ok(()),
        }
    }

    /// The integer part alone.
    pub fn int_part(&self) -> SetExpr {
        SetExpr {
            intervals: self.intervals.clone(),
            atoms: BTreeMap::new(),
        }
    }

    /// The atom parts alone.
    pub fn atom_part(&self) -> SetExpr {
        SetExpr {
            intervals: Vec::new(),
            atoms: self.atoms.clone(),
        }
    }

    /// Members in canonical order. Finite sets yield exactly their members;
    /// the iterator skips empty rounds, so sparse sets are cheap.
    pub fn iter_canonical(&self) -> CanonicalIter<'_> {
        CanonicalIter {
            set: self,
            round: 0,
            pending: VecDeque::new(),
            done: false,
        }
    }

    /// Canonically smallest member not in `forbidden`; `None` when
    /// `self \ forbidden` is empty.
    pub fn least_new(&self, forbidden: &BTreeSet<Token>) -> Option<Token> {
        if let Cardinality::Finite(n) = self.cardinality() {
            // cheap exit: every member forbidden
            if n as usize <= forbidden.len()
                && self.iter_canonical().all(|t| forbidden.contains(&t))
            {
                return None;
            }
        }
        self.iter_canonical().find(|t| !forbidden.contains(t))
    }

    /// Members of a finite set, canonical order. Infinite sets are truncated
    /// at `limit`.
    pub fn tokens(&self, limit: usize) -> Vec<Token> {
        self.iter_canonical().take(limit).collect()
    }

    /// Smallest round `>= from` that holds at least one member.
    fn next_round(&self, from: u64) -> Option<u64> {
        let mut best: Option<u64> = None;
        let mut offer = |r: u64| {
            best = Some(best.map_or(r, |b| b.min(r)));
        };
        if from <= MAX_ABS_INT as u64 {
            let f = from as i64;
            // non-negative side: smallest member >= from
            let idx = self
                .intervals
                .partition_point(|iv| iv.hi < Endpoint::Fin(f));
            if let Some(iv) = self.intervals.get(idx) {
                let x = match iv.lo {
                    Endpoint::Fin(lo) if lo > f => lo,
                    _ => f,
                };
                offer(x as u64);
            }
            // negative side: largest member <= -max(from, 1)
            let neg = -f.max(1);
            let idx = self
                .intervals
                .partition_point(|iv| iv.lo <= Endpoint::Fin(neg));
            if idx > 0 {
                let iv = self.intervals[idx - 1];
                let x = match iv.hi {
                    Endpoint::Fin(hi) if hi < neg => hi,
                    _ => neg,
                };
                offer(x.unsigned_abs());
            }
        }
        for part in self.atoms.values() {
            if let Some(k) = part.next_from(from) {
                offer(k);
            }
        }
        best
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("{}");
        }
        let mut parts = Vec::new();
        for iv in &self.intervals {
            let lo = match iv.lo {
                Endpoint::Fin(x) => x.to_string(),
                _ => "-inf".into(),
            };
            let hi = match iv.hi {
                Endpoint::Fin(x) => x.to_string(),
                _ => "inf".into(),
            };
            parts.push(format!("[{lo},{hi}]"));
        }
        for (a, p) in &self.atoms {
            match p {
                AtomPart::Cofinite(ex) if ex.is_empty() => parts.push(format!("@{}", a.0)),
                AtomPart::Cofinite(ex) => parts.push(format!("@{}\\{:?}", a.0, ex)),
                AtomPart::Finite(inc) => parts.push(format!("@{}{:?}", a.0, inc)),
            }
        }
        f.write_str(&parts.join(" u "))
    }
}

pub struct CanonicalIter<'a> {
    set: &'a SetExpr,
    round: u64,
    pending: VecDeque<Token>,
    done: bool,
}

impl Iterator for CanonicalIter<'_> {
    type Item = Token;

    fn next(&mut self) -> Option<Token> {
        loop {
            if let Some(t) = self.pending.pop_front() {
                return Some(t);
            }
            if self.done {
                return None;
            }
            let Some(r) = self.set.next_round(self.round) else {
                self.done = true;
                return None;
            };
            if r <= MAX_ABS_INT as u64 {
                let x = r as i64;
                if self.set.contains(&Token::Int(x)) {
                    self.pending.push_back(Token::Int(x));
                }
                if x > 0 && self.set.contains(&Token::Int(-x)) {
                    self.pending.push_back(Token::Int(-x));
                }
            }
            for (a, part) in &self.set.atoms {
                if part.contains(r) {
                    self.pending.push_back(Token::Atom(*a, r));
                }
            }
            match r.checked_add(1) {
                Some(next) => self.round = next,
                None => self.done = true,
            }
        }
    }
}

fn normalize_intervals(mut ivs: Vec<Interval>) -> Vec<Interval> {
    ivs.retain(Interval::is_valid);
    ivs.sort();
    let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
    for iv in ivs {
        match out.last_mut() {
            // overlapping or adjacent
            Some(last) if last.hi.wide().saturating_add(1) >= iv.lo.wide() => {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
            }
            _ => out.push(iv),
        }
    }
    out
}

fn complement_intervals(ivs: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut start = Some(Endpoint::NegInf);
    for iv in ivs {
        let Some(s) = start else { break };
        if iv.lo != Endpoint::NegInf {
            let end = iv.lo.pred();
            if s <= end {
                out.push(Interval::new(s, end));
            }
        }
        start = match iv.hi {
            Endpoint::PosInf => None,
            hi => Some(hi.succ()),
        };
    }
    if let Some(s) = start {
        out.push(Interval::new(s, Endpoint::PosInf));
    }
    out
}

/// Number of tokens of `s` that fall outside `l`. A language `a`-contains
/// `s` iff this is at most `a`.
pub fn violations<'a>(s: impl IntoIterator<Item = &'a Token>, l: &SetExpr) -> usize {
    s.into_iter().filter(|t| !l.contains(t)).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A1: AtomId = AtomId(0);
    const A2: AtomId = AtomId(1);
    const A3: AtomId = AtomId(2);

    fn reg3() -> AtomRegistry {
        AtomRegistry::new(["a1", "a2", "a3"]).unwrap()
    }

    /// Membership of every token in the sampling window.
    fn window() -> Vec<Token> {
        let mut v: Vec<Token> = (-50..=50).map(Token::Int).collect();
        for a in [A1, A2, A3] {
            v.extend((0..=20).map(|k| Token::Atom(a, k)));
        }
        v
    }

    fn example_l1() -> SetExpr {
        SetExpr::range(1, 100).union(&SetExpr::atom(A1))
    }

    fn example_l2() -> SetExpr {
        SetExpr::range(1, 300).union(&SetExpr::atom(A2))
    }

    #[test]
    fn intersect_example_languages() {
        let i = example_l1().intersect(&example_l2());
        assert_eq!(i, SetExpr::range(1, 100));
        assert_eq!(i.cardinality(), Cardinality::Finite(100));
    }

    #[test]
    fn intersect_is_idempotent() {
        let a = example_l2();
        assert_eq!(a.intersect(&a), a);
    }

    #[test]
    fn intersect_with_ray() {
        let a = SetExpr::range(1, 5).union(&SetExpr::atom(A1));
        let got = a.intersect(&SetExpr::at_least(3));
        assert_eq!(got, SetExpr::range(3, 5));
        // brute-force scan
        for t in window() {
            let want = a.contains(&t) && SetExpr::at_least(3).contains(&t);
            assert_eq!(got.contains(&t), want, "{t:?}");
        }
    }

    #[test]
    fn complement_cases() {
        let reg = AtomRegistry::new(["a1", "a2"]).unwrap();
        assert!(SetExpr::universe(&reg).complement(&reg).is_empty());
        assert_eq!(
            SetExpr::at_least(0).complement(&reg),
            SetExpr::at_most(-1)
                .union(&SetExpr::atom(A1))
                .union(&SetExpr::atom(A2))
        );
        let a = SetExpr::range(1, 5).union(&SetExpr::atom(A1));
        let want = SetExpr::at_most(0)
            .union(&SetExpr::at_least(6))
            .union(&SetExpr::atom(A2));
        let got = a.complement(&reg);
        assert_eq!(got, want);
        for t in window().into_iter().filter(|t| reg.check_token(t).is_ok()) {
            assert_eq!(got.contains(&t), !a.contains(&t), "{t:?}");
        }
    }

    #[test]
    fn subtract_finite_cases() {
        assert_eq!(
            SetExpr::range(1, 3).subtract_finite(&[Token::Int(2)]),
            SetExpr::range(1, 1).union(&SetExpr::range(3, 3))
        );
        let got = SetExpr::atom(A1).subtract_finite(&[Token::Atom(A1, 0)]);
        assert_eq!(
            got.atom_parts().get(&A1),
            Some(&AtomPart::Cofinite([0].into_iter().collect()))
        );
        let ints: Vec<Token> = (1..=100).map(Token::Int).collect();
        let got = example_l2().subtract_finite(&ints);
        assert_eq!(got, SetExpr::range(101, 300).union(&SetExpr::atom(A2)));
        for t in window() {
            assert_eq!(
                got.contains(&t),
                example_l2().contains(&t) && !ints.contains(&t)
            );
        }
    }

    #[test]
    fn cardinality_cases() {
        assert_eq!(SetExpr::empty().cardinality(), Cardinality::Finite(0));
        let a = SetExpr::range(1, 5)
            .union(&SetExpr::atom(A1))
            .subtract_finite(&[Token::Atom(A1, 0), Token::Atom(A1, 1)]);
        assert_eq!(a.cardinality(), Cardinality::Infinite);
        assert_eq!(
            SetExpr::from_tokens(&[Token::Atom(A2, 4), Token::Int(-3)]).cardinality(),
            Cardinality::Finite(2)
        );
    }

    #[test]
    fn violation_counts() {
        let l1 = example_l1();
        assert_eq!(violations(&[], &l1), 0);
        assert_eq!(violations(&[Token::Int(1), Token::Int(200)], &l1), 1);
        assert_eq!(violations(&[Token::Int(1)], &l1), 0);
    }

    #[test]
    fn least_new_cases() {
        let one: BTreeSet<Token> = [Token::Int(1)].into_iter().collect();
        assert_eq!(SetExpr::at_least(1).least_new(&one), Some(Token::Int(2)));
        assert_eq!(SetExpr::empty().least_new(&BTreeSet::new()), None);
        let a = SetExpr::range(1, 3).union(&SetExpr::atom(A1));
        let forb: BTreeSet<Token> = (1..=3).map(Token::Int).collect();
        assert_eq!(a.least_new(&forb), Some(Token::Atom(A1, 0)));
        assert_eq!(SetExpr::range(1, 3).least_new(&forb), None);
    }

    #[test]
    fn canonical_order_interleaves_rounds() {
        let reg = AtomRegistry::new(["a1", "a2"]).unwrap();
        let got = SetExpr::universe(&reg).tokens(8);
        assert_eq!(
            got,
            vec![
                Token::Int(0),
                Token::Atom(A1, 0),
                Token::Atom(A2, 0),
                Token::Int(1),
                Token::Int(-1),
                Token::Atom(A1, 1),
                Token::Atom(A2, 1),
                Token::Int(2),
            ]
        );
        let mut sorted = got.clone();
        sorted.sort();
        assert_eq!(sorted, got);
    }

    #[test]
    fn canonical_iteration_skips_far_gaps() {
        let s =
            SetExpr::range(1_000_000_000, 1_000_000_002).union(&SetExpr::at_most(-2_000_000_000));
        let got = s.tokens(5);
        assert_eq!(
            got,
            vec![
                Token::Int(1_000_000_000),
                Token::Int(1_000_000_001),
                Token::Int(1_000_000_002),
                Token::Int(-2_000_000_000),
                Token::Int(-2_000_000_001),
            ]
        );
    }

    #[test]
    fn registry_checks() {
        let reg = AtomRegistry::new(["p1"]).unwrap();
        assert!(SetExpr::atom(A1).check_registry(&reg).is_ok());
        assert!(matches!(
            SetExpr::atom(A2).check_registry(&reg),
            Err(Error::AtomOutsideRegistry(1))
        ));
        assert!(AtomRegistry::new(["x", "x"]).is_err());
        assert_eq!(reg.show(&Token::Atom(A1, 3)), "p1[3]");
    }

    fn endpoint() -> impl Strategy<Value = Endpoint> {
        prop_oneof![
            1 => Just(Endpoint::NegInf),
            1 => Just(Endpoint::PosInf),
            6 => (-25i64..=25).prop_map(Endpoint::Fin),
        ]
    }

    fn atom_part() -> impl Strategy<Value = AtomPart> {
        let idx = proptest::collection::btree_set(0u64..12, 0..4);
        prop_oneof![
            idx.clone().prop_map(AtomPart::Cofinite),
            idx.prop_map(AtomPart::Finite),
        ]
    }

    fn set_expr() -> impl Strategy<Value = SetExpr> {
        (
            proptest::collection::vec((endpoint(), endpoint()), 0..4),
            proptest::collection::vec((0u32..3, atom_part()), 0..3),
        )
            .prop_map(|(ivs, atoms)| {
                SetExpr::from_parts(
                    ivs.into_iter()
                        .map(|(a, b)| Interval::new(a.min(b), a.max(b))),
                    atoms.into_iter().map(|(a, p)| (AtomId(a), p)),
                )
            })
    }

    fn finite_tokens() -> impl Strategy<Value = Vec<Token>> {
        proptest::collection::vec(
            prop_oneof![
                (-30i64..=30).prop_map(Token::Int),
                (0u32..3, 0u64..15).prop_map(|(a, k)| Token::Atom(AtomId(a), k)),
            ],
            0..8,
        )
    }

    proptest! {
        #[test]
        fn ops_agree_with_membership_oracle(a in set_expr(), b in set_expr(), t in finite_tokens()) {
            let reg = reg3();
            let inter = a.intersect(&b);
            let uni = a.union(&b);
            let comp = a.complement(&reg);
            let sub = a.subtract_finite(&t);
            for x in window() {
                prop_assert_eq!(inter.contains(&x), a.contains(&x) && b.contains(&x));
                prop_assert_eq!(uni.contains(&x), a.contains(&x) || b.contains(&x));
                prop_assert_eq!(comp.contains(&x), !a.contains(&x));
                prop_assert_eq!(sub.contains(&x), a.contains(&x) && !t.contains(&x));
            }
        }

        #[test]
        fn de_morgan_on_samples(a in set_expr(), b in set_expr()) {
            let reg = reg3();
            let lhs = a.intersect(&b).complement(&reg);
            let rhs = a.complement(&reg).union(&b.complement(&reg));
            for x in window() {
                prop_assert_eq!(lhs.contains(&x), rhs.contains(&x));
            }
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn normalize_is_idempotent(a in set_expr(), b in set_expr()) {
            let x = a.union(&b).difference(&b.intersect(&a));
            prop_assert_eq!(x.normalize(), x.clone());
            prop_assert_eq!(x.normalize().normalize(), x.normalize());
        }

        #[test]
        fn cardinality_matches_enumeration(a in set_expr(), t in finite_tokens()) {
            match a.cardinality() {
                Cardinality::Finite(n) => {
                    let all: Vec<Token> = a.iter_canonical().collect();
                    prop_assert_eq!(all.len() as u64, n);
                    let mut sorted = all.clone();
                    sorted.sort();
                    sorted.dedup();
                    prop_assert_eq!(sorted, all);
                }
                Cardinality::Infinite => {
                    let forb: BTreeSet<Token> = t.into_iter().collect();
                    let got = a.least_new(&forb);
                    prop_assert!(got.is_some());
                    let got = got.unwrap();
                    prop_assert!(a.contains(&got) && !forb.contains(&got));
                }
            }
        }

        #[test]
        fn least_new_is_canonical_minimum(a in set_expr(), t in finite_tokens()) {
            let forb: BTreeSet<Token> = t.into_iter().collect();
            let got = a.least_new(&forb);
            // scan the window in canonical order
            let mut w = window();
            w.sort();
            let first_in_window = w.into_iter().find(|x| a.contains(x) && !forb.contains(x));
            if let Some(x) = first_in_window {
                prop_assert!(got.is_some());
                prop_assert!(got.unwrap() <= x);
            }
            if let Some(g) = got {
                prop_assert!(a.contains(&g) && !forb.contains(&g));
            }
        }
    }
}
