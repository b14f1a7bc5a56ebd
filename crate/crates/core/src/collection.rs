//! Collections of languages, the prefix baselines, and the shared
//! subcollection search.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setalg::{
    AtomId, AtomPart, AtomRegistry, Endpoint, Interval, SetExpr, Token, MAX_ABS_INT,
};

/// Default capacity of the exhaustive plain search.
pub const PLAIN_CAPACITY: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    pub name: String,
    pub set: SetExpr,
}

/// Declared limit of the closure-dimension sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LrtLimit {
    Finite { c: u64 },
    Divergent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collection {
    pub registry: AtomRegistry,
    pub languages: Vec<Language>,
    pub lrt_limit: Option<LrtLimit>,
}

impl Collection {
    /// Builds a collection, rejecting finite languages and unknown atoms.
    pub fn new(
        registry: AtomRegistry,
        languages: Vec<Language>,
        lrt_limit: Option<LrtLimit>,
    ) -> Result<Self> {
        for (index, l) in languages.iter().enumerate() {
            l.set.check_registry(&registry)?;
            if l.set.is_finite() {
                return Err(Error::FiniteLanguage {
                    index: index + 1,
                    name: l.name.clone(),
                });
            }
        }
        Ok(Collection {
            registry,
            languages,
            lrt_limit,
        })
    }

    /// Unnamed languages get labels `L1, L2, ...`.
    pub fn from_sets(registry: AtomRegistry, sets: Vec<SetExpr>) -> Result<Self> {
        let languages = sets
            .into_iter()
            .enumerate()
            .map(|(i, set)| Language {
                name: format!("L{}", i + 1),
                set,
            })
            .collect();
        Collection::new(registry, languages, None)
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    pub fn sets(&self) -> Vec<SetExpr> {
        self.languages.iter().map(|l| l.set.clone()).collect()
    }

    pub fn set(&self, i: usize) -> &SetExpr {
        &self.languages[i].set
    }

    pub fn name(&self, i: usize) -> &str {
        &self.languages[i].name
    }

    /// Collection with languages permuted: position `k` holds `self[perm[k]]`.
    pub fn reordered(&self, perm: &[usize]) -> Result<Collection> {
        let mut seen = vec![false; self.len()];
        for &p in perm {
            if p >= self.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Parameter(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Collection {
            registry: self.registry.clone(),
            languages: perm.iter().map(|&p| self.languages[p].clone()).collect(),
            lrt_limit: self.lrt_limit,
        })
    }

    pub fn prefix(&self, n: usize) -> Collection {
        Collection {
            registry: self.registry.clone(),
            languages: self.languages[..n.min(self.len())].to_vec(),
            lrt_limit: self.lrt_limit,
        }
    }

    pub fn from_doc(doc: &CollectionDoc) -> Result<Self> {
        let registry = AtomRegistry::new(doc.atoms.iter().cloned())?;
        let mut languages = Vec::with_capacity(doc.languages.len());
        for (i, l) in doc.languages.iter().enumerate() {
            languages.push(Language {
                name: l.name.clone().unwrap_or_else(|| format!("L{}", i + 1)),
                set: l.to_set(&registry)?,
            });
        }
        Collection::new(registry, languages, doc.lrt_limit)
    }

    pub fn to_doc(&self) -> CollectionDoc {
        CollectionDoc {
            atoms: self.registry.names().to_vec(),
            lrt_limit: self.lrt_limit,
            languages: self
                .languages
                .iter()
                .map(|l| LanguageDoc::from_set(&l.name, &l.set, &self.registry))
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Collection::from_doc(&serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Collection::from_json(&read_file(path.as_ref())?)
    }
}

/// A collection file, or `random:<n>` for `n` seeded random languages.
pub fn read_collection_arg(arg: &str, seed: u64) -> Result<Collection> {
    match arg.strip_prefix("random:") {
        Some(n) => {
            let n = n
                .parse()
                .map_err(|_| Error::Parameter(format!("bad language count in `{arg}`")))?;
            Ok(crate::oracle::random_collection(seed, n))
        }
        None => Collection::load(arg),
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

// ---------------------------------------------------------------------------
// Documents

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectionDoc {
    #[serde(default)]
    pub atoms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lrt_limit: Option<LrtLimit>,
    #[serde(default)]
    pub languages: Vec<LanguageDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanguageDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub intervals: Vec<[EndpointDoc; 2]>,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
}

/// Integer or `"inf"` / `"-inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EndpointDoc {
    Int(i64),
    Text(String),
}

/// A whole atom stream by name, or a stream with an exclusion / inclusion list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomSpec {
    Name(String),
    Exclude { atom: String, exclude: Vec<u64> },
    Only { atom: String, only: Vec<u64> },
}

impl EndpointDoc {
    fn to_endpoint(&self) -> Result<Endpoint> {
        match self {
            EndpointDoc::Int(x) if x.unsigned_abs() < MAX_ABS_INT as u64 => Ok(Endpoint::Fin(*x)),
            EndpointDoc::Int(x) => Err(Error::Schema(format!("endpoint {x} is out of range"))),
            EndpointDoc::Text(s) => match s.as_str() {
                "inf" | "+inf" => Ok(Endpoint::PosInf),
                "-inf" => Ok(Endpoint::NegInf),
                other => Err(Error::Schema(format!("bad endpoint `{other}`"))),
            },
        }
    }

    fn from_endpoint(e: Endpoint) -> Self {
        match e {
            Endpoint::NegInf => EndpointDoc::Text("-inf".into()),
            Endpoint::PosInf => EndpointDoc::Text("inf".into()),
            Endpoint::Fin(x) => EndpointDoc::Int(x),
        }
    }
}

impl LanguageDoc {
    pub fn to_set(&self, registry: &AtomRegistry) -> Result<SetExpr> {
        let mut intervals = Vec::new();
        for [lo, hi] in &self.intervals {
            let (lo, hi) = (lo.to_endpoint()?, hi.to_endpoint()?);
            if lo == Endpoint::PosInf || hi == Endpoint::NegInf || lo > hi {
                return Err(Error::Schema(format!(
                    "empty or reversed interval {lo:?}..{hi:?}"
                )));
            }
            intervals.push(Interval::new(lo, hi));
        }
        let mut atoms = Vec::new();
        for spec in &self.atoms {
            let (name, part) = match spec {
                AtomSpec::Name(n) => (n, AtomPart::full()),
                AtomSpec::Exclude { atom, exclude } => {
                    (atom, AtomPart::Cofinite(exclude.iter().copied().collect()))
                }
                AtomSpec::Only { atom, only } => {
                    (atom, AtomPart::Finite(only.iter().copied().collect()))
                }
            };
            atoms.push((registry.id(name)?, part));
        }
        Ok(SetExpr::from_parts(intervals, atoms))
    }

    pub fn from_set(name: &str, set: &SetExpr, registry: &AtomRegistry) -> Self {
        let intervals = set
            .intervals()
            .iter()
            .map(|iv| {
                [
                    EndpointDoc::from_endpoint(iv.lo),
                    EndpointDoc::from_endpoint(iv.hi),
                ]
            })
            .collect();
        let atoms = set
            .atom_parts()
            .iter()
            .map(|(id, part)| {
                let atom = registry
                    .name(*id)
                    .map_or_else(|| format!("#{}", id.0), str::to_string);
                match part {
                    AtomPart::Cofinite(ex) if ex.is_empty() => AtomSpec::Name(atom),
                    AtomPart::Cofinite(ex) => AtomSpec::Exclude {
                        atom,
                        exclude: ex.iter().copied().collect(),
                    },
                    AtomPart::Finite(inc) => AtomSpec::Only {
                        atom,
                        only: inc.iter().copied().collect(),
                    },
                }
            })
            .collect();
        LanguageDoc {
            name: Some(name.to_string()),
            intervals,
            atoms,
        }
    }
}

/// JSON form of a token: an integer or `{"atom": name, "index": k}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TokenDoc {
    Int(i64),
    Atom { atom: String, index: u64 },
}

impl TokenDoc {
    pub fn from_token(t: &Token, registry: &AtomRegistry) -> Self {
        match *t {
            Token::Int(n) => TokenDoc::Int(n),
            Token::Atom(a, k) => TokenDoc::Atom {
                atom: registry
                    .name(a)
                    .map_or_else(|| format!("#{}", a.0), str::to_string),
                index: k,
            },
        }
    }

    pub fn to_token(&self, registry: &AtomRegistry) -> Result<Token> {
        match self {
            TokenDoc::Int(n) => Ok(Token::Int(*n)),
            TokenDoc::Atom { atom, index } => Ok(Token::Atom(registry.id(atom)?, *index)),
        }
    }
}

pub fn tokens_to_doc(tokens: &[Token], registry: &AtomRegistry) -> Vec<TokenDoc> {
    tokens
        .iter()
        .map(|t| TokenDoc::from_token(t, registry))
        .collect()
}

// ---------------------------------------------------------------------------
// Subcollection search

/// Best subcollection found by a search: the score and the member positions
/// (sorted, always containing the required position).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub m: u64,
    pub witness: Vec<usize>,
}

impl WitnessResult {
    pub fn none() -> Self {
        WitnessResult {
            m: 0,
            witness: Vec::new(),
        }
    }
}

/// `true` when `a` beats `b`: larger score, then fewer members, then the
/// lexicographically smaller sorted member list.
pub(crate) fn better(a: &WitnessResult, b: &WitnessResult) -> bool {
    (a.m, std::cmp::Reverse(a.witness.len()))
        .cmp(&(b.m, std::cmp::Reverse(b.witness.len())))
        .then_with(|| b.witness.cmp(&a.witness))
        .is_gt()
}

/// Depth-first enumeration of subcollections of `sets` containing `must`.
///
/// `eval(members, intersection)` scores a subcollection or returns `None`
/// when it is not a candidate. Once the running intersection is finite the
/// subcollection is not extended further. `redundant(k, members)` lets the
/// caller skip positions whose constraint is implied by current members.
/// With `memo` set, a (next position, intersection) state already reached
/// with no more members is not expanded again; that is only sound when the
/// score depends on the intersection alone.
pub(crate) fn search_subcollections<E, R>(
    sets: &[&SetExpr],
    must: usize,
    memo: bool,
    mut redundant: R,
    mut eval: E,
) -> Option<WitnessResult>
where
    E: FnMut(&[usize], &SetExpr) -> Option<u64>,
    R: FnMut(usize, &[usize]) -> bool,
{
    struct Ctx<'a, E, R> {
        sets: &'a [&'a SetExpr],
        must: usize,
        memo: Option<HashMap<(usize, SetExpr), usize>>,
        redundant: R,
        eval: E,
        best: Option<WitnessResult>,
    }

    fn offer<E, R>(ctx: &mut Ctx<'_, E, R>, members: &[usize], inter: &SetExpr)
    where
        E: FnMut(&[usize], &SetExpr) -> Option<u64>,
    {
        if let Some(m) = (ctx.eval)(members, inter) {
            let mut witness = members.to_vec();
            witness.sort_unstable();
            let cand = WitnessResult { m, witness };
            if ctx.best.as_ref().is_none_or(|b| better(&cand, b)) {
                ctx.best = Some(cand);
            }
        }
    }

    fn go<E, R>(ctx: &mut Ctx<'_, E, R>, pos: usize, members: &mut Vec<usize>, inter: &SetExpr)
    where
        E: FnMut(&[usize], &SetExpr) -> Option<u64>,
        R: FnMut(usize, &[usize]) -> bool,
    {
        if inter.is_finite() {
            return;
        }
        for k in pos..ctx.sets.len() {
            if k == ctx.must || (ctx.redundant)(k, members) {
                continue;
            }
            let next = inter.intersect(ctx.sets[k]);
            if let Some(memo) = ctx.memo.as_mut() {
                let key = (k + 1, next.clone());
                match memo.get(&key) {
                    Some(&n) if n <= members.len() + 1 => continue,
                    _ => {
                        memo.insert(key, members.len() + 1);
                    }
                }
            }
            members.push(k);
            offer(ctx, members, &next);
            go(ctx, k + 1, members, &next);
            members.pop();
        }
    }

    let mut ctx = Ctx {
        sets,
        must,
        memo: memo.then(HashMap::new),
        redundant: &mut redundant,
        eval: &mut eval,
        best: None,
    };
    let mut members = vec![must];
    let start = sets[must].clone();
    offer(&mut ctx, &members, &start);
    go(&mut ctx, 0, &mut members, &start);
    ctx.best
}

/// Skips a position whose language equals a member's language.
pub(crate) fn duplicate_of_member<'a>(
    sets: &'a [&'a SetExpr],
) -> impl FnMut(usize, &[usize]) -> bool + 'a {
    move |k, members| members.iter().any(|&m| sets[m] == sets[k])
}

/// Largest finite intersection among subcollections of `prefix` containing
/// position `must`. The witness is empty iff no such subcollection exists.
pub fn max_finite_intersection(prefix: &[&SetExpr], must: usize) -> Result<WitnessResult> {
    max_finite_intersection_with_capacity(prefix, must, PLAIN_CAPACITY)
}

pub fn max_finite_intersection_with_capacity(
    prefix: &[&SetExpr],
    must: usize,
    capacity: usize,
) -> Result<WitnessResult> {
    if prefix.len() > capacity {
        return Err(Error::Capacity {
            what: "prefix",
            len: prefix.len(),
            bound: capacity,
        });
    }
    if must >= prefix.len() {
        return Err(Error::IndexOutOfRange {
            index: must,
            len: prefix.len(),
        });
    }
    let found = search_subcollections(
        prefix,
        must,
        true,
        duplicate_of_member(prefix),
        |_, inter| inter.cardinality().finite(),
    );
    Ok(found.unwrap_or_else(WitnessResult::none))
}

/// Size of the largest finite intersection of any subcollection; 0 if none.
pub fn closure_dimension(prefix: &[&SetExpr]) -> Result<u64> {
    let mut best = 0;
    for must in 0..prefix.len() {
        // subcollections whose smallest member is `must`
        let tail = &prefix[must..];
        best = best.max(max_finite_intersection(tail, 0)?.m);
    }
    Ok(best)
}

/// `m(L_i)`: largest finite intersection over subcollections of
/// `(L_1..L_i)` containing `L_i` (0-based `i`).
pub fn cp_complexity(prefix: &[&SetExpr], i: usize) -> Result<u64> {
    if i >= prefix.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: prefix.len(),
        });
    }
    Ok(max_finite_intersection(&prefix[..=i], i)?.m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    Lrt,
    Cp,
}

/// Guaranteed generation times of the two prefix baselines, in collection
/// order.
///
/// LRT uses `max(i, c + 1)` when the declared limit is finite and
/// `d_i + 1` when it diverges. Without a declaration the limit of a finite
/// collection is its final closure dimension.
pub fn baseline_times(c: &Collection, which: Baseline) -> Result<Vec<u64>> {
    let sets = c.sets();
    let refs: Vec<&SetExpr> = sets.iter().collect();
    let mut out = Vec::with_capacity(refs.len());
    match which {
        Baseline::Cp => {
            for i in 0..refs.len() {
                out.push((i as u64 + 1).max(cp_complexity(&refs, i)? + 1));
            }
        }
        Baseline::Lrt => {
            let dims: Vec<u64> = (1..=refs.len())
                .map(|n| closure_dimension(&refs[..n]))
                .collect::<Result<_>>()?;
            let limit = c.lrt_limit.unwrap_or(LrtLimit::Finite {
                c: dims.last().copied().unwrap_or(0),
            });
            for (i, d) in dims.iter().enumerate() {
                out.push(match limit {
                    LrtLimit::Finite { c } => (i as u64 + 1).max(c + 1),
                    LrtLimit::Divergent => d + 1,
                });
            }
        }
    }
    Ok(out)
}

/// Atom name lookup with a readable fallback.
pub fn atom_name(registry: &AtomRegistry, id: AtomId) -> String {
    registry
        .name(id)
        .map_or_else(|| format!("#{}", id.0), str::to_string)
}

/// Group tokens by atom for compact display.
pub fn summarize_tokens(tokens: &[Token], registry: &AtomRegistry) -> String {
    let mut ints: Vec<i64> = Vec::new();
    let mut atoms: BTreeMap<AtomId, Vec<u64>> = BTreeMap::new();
    for t in tokens {
        match *t {
            Token::Int(n) => ints.push(n),
            Token::Atom(a, k) => atoms.entry(a).or_default().push(k),
        }
    }
    ints.sort_unstable();
    let mut parts = Vec::new();
    let mut i = 0;
    while i < ints.len() {
        let mut j = i;
        while j + 1 < ints.len() && ints[j + 1] == ints[j] + 1 {
            j += 1;
        }
        parts.push(if i == j {
            ints[i].to_string()
        } else {
            format!("{}..{}", ints[i], ints[j])
        });
        i = j + 1;
    }
    for (a, ks) in atoms {
        let ks: Vec<String> = ks.iter().map(u64::to_string).collect();
        parts.push(format!("{}[{}]", atom_name(registry, a), ks.join(",")));
    }
    format!("{{{}}}", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

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
        let mut c = Collection::from_sets(reg, sets).unwrap();
        c.lrt_limit = Some(LrtLimit::Finite { c: 100 });
        c
    }

    fn refs(c: &Collection) -> Vec<SetExpr> {
        c.sets()
    }

    #[test]
    fn loads_document_and_rejects_finite() {
        let doc =
            r#"{"atoms":["p1"],"languages":[{"name":"A","intervals":[[1,"inf"]],"atoms":["p1"]}]}"#;
        let c = Collection::from_json(doc).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(
            Collection::from_json(r#"{"languages":[]}"#).unwrap().len(),
            0
        );
        let bad = r#"{"languages":[{"intervals":[[1,100]]}]}"#;
        assert!(matches!(
            Collection::from_json(bad),
            Err(Error::FiniteLanguage { index: 1, .. })
        ));
        let unknown = r#"{"languages":[{"atoms":["q"]}]}"#;
        assert!(matches!(
            Collection::from_json(unknown),
            Err(Error::UnknownAtom(_))
        ));
    }

    #[test]
    fn document_round_trip() {
        let c = ex31();
        let again = Collection::from_doc(&c.to_doc()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn closure_dimensions() {
        let c = ex31();
        let sets = refs(&c);
        let r: Vec<&SetExpr> = sets.iter().collect();
        assert_eq!(closure_dimension(&r[..1]).unwrap(), 0);
        for n in 2..=8 {
            assert_eq!(closure_dimension(&r[..n]).unwrap(), 100);
        }
        let two = [
            SetExpr::at_least(1),
            SetExpr::range(1, 5).union(&SetExpr::atom(AtomId(0))),
        ];
        let r2: Vec<&SetExpr> = two.iter().collect();
        assert_eq!(closure_dimension(&r2).unwrap(), 5);
    }

    #[test]
    fn cp_complexities() {
        let c = ex31();
        let sets = refs(&c);
        let r: Vec<&SetExpr> = sets.iter().collect();
        let m: Vec<u64> = (0..8).map(|i| cp_complexity(&r, i).unwrap()).collect();
        assert_eq!(m, vec![0, 100, 100, 100, 0, 0, 0, 0]);
        let re = c.reordered(&[0, 2, 3, 1, 4, 5, 6, 7]).unwrap();
        let sets = refs(&re);
        let r: Vec<&SetExpr> = sets.iter().collect();
        let m: Vec<u64> = (0..4).map(|i| cp_complexity(&r, i).unwrap()).collect();
        assert_eq!(m, vec![0, 0, 0, 100]);
    }

    #[test]
    fn witness_examples() {
        let c = ex31();
        let sets = refs(&c);
        let got = max_finite_intersection(&[&sets[0], &sets[1]], 1).unwrap();
        assert_eq!(
            got,
            WitnessResult {
                m: 100,
                witness: vec![0, 1]
            }
        );
        let got = max_finite_intersection(&[&sets[0]], 0).unwrap();
        assert_eq!(got, WitnessResult::none());
        let got = max_finite_intersection(&[&sets[0], &sets[2]], 1).unwrap();
        assert_eq!(
            got,
            WitnessResult {
                m: 0,
                witness: vec![0, 1]
            }
        );
        let many: Vec<&SetExpr> = std::iter::repeat_n(&sets[0], 21).collect();
        assert!(matches!(
            max_finite_intersection(&many, 0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn baselines_default_order() {
        let c = ex31();
        assert_eq!(baseline_times(&c, Baseline::Lrt).unwrap(), vec![101; 8]);
        assert_eq!(
            baseline_times(&c, Baseline::Cp).unwrap(),
            vec![1, 101, 101, 101, 5, 6, 7, 8]
        );
    }

    #[test]
    fn summary_is_compact() {
        let reg = AtomRegistry::new(["p"]).unwrap();
        let mut t: Vec<Token> = (1..=5).map(Token::Int).collect();
        t.push(Token::Int(9));
        t.push(Token::Atom(AtomId(0), 2));
        assert_eq!(summarize_tokens(&t, &reg), "{1..5, 9, p[2]}");
    }
}
