//! Enumeration scripts: canonical enumerations, witness-first attacks and
//! their validation against the noise model.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::collection::{Collection, TokenDoc};
use crate::error::{Error, Result};
use crate::procedures::{ComplexityTable, Setting};
use crate::setalg::{SetExpr, Token};

/// A finite prefix of an enumeration of one target language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationScript {
    pub tokens: Vec<Token>,
    /// 0-based language index.
    pub target: usize,
    pub noise_level: u32,
    pub horizon: usize,
}

/// First `horizon` tokens of `l`. Integers come first when `l` has finitely
/// many of them, so a finite block is exhausted before the atom tails.
pub fn canonical_tokens(l: &SetExpr, horizon: usize) -> Vec<Token> {
    let ints = l.int_part();
    if ints.is_finite() {
        let mut v = ints.tokens(horizon);
        let rest = horizon - v.len();
        v.extend(l.atom_part().tokens(rest));
        v
    } else {
        l.tokens(horizon)
    }
}

/// `prefix` followed by the rest of `l` in canonical order, cut to `horizon`.
fn continue_within(prefix: Vec<Token>, l: &SetExpr, horizon: usize) -> Vec<Token> {
    let seen: BTreeSet<Token> = prefix.iter().copied().collect();
    let mut out = prefix;
    out.truncate(horizon);
    let rest = l.subtract_finite(&seen);
    let need = horizon - out.len();
    out.extend(canonical_tokens(&rest, need));
    out
}

pub fn canonical_enumeration(
    c: &Collection,
    i: usize,
    horizon: usize,
) -> Result<EnumerationScript> {
    check_index(c, i)?;
    Ok(EnumerationScript {
        tokens: canonical_tokens(c.set(i), horizon),
        target: i,
        noise_level: 0,
        horizon,
    })
}

fn check_index(c: &Collection, i: usize) -> Result<()> {
    if i >= c.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: c.len(),
        });
    }
    Ok(())
}

/// Witness-first attack against the entry of `cell_id`.
///
/// Plain: the witness intersection, then the target. Noisy: the witness set
/// `T`, the rest of the witness intersection, then the target, at the
/// cell's noise level. Representative: `T`, then the target.
pub fn witness_attack(
    table: &ComplexityTable,
    c: &Collection,
    cell_id: usize,
    horizon: usize,
) -> Result<EnumerationScript> {
    let entry = table.entries.get(cell_id).ok_or(Error::IndexOutOfRange {
        index: cell_id,
        len: table.len(),
    })?;
    let target = entry.cell.index;
    check_index(c, target)?;
    if entry.m_star == 0 {
        return Err(Error::NoAttack(target + 1));
    }
    let l = c.set(target);
    let witness_inter = || {
        table
            .witness_languages(cell_id)
            .iter()
            .fold(SetExpr::universe(&c.registry), |acc, &w| {
                acc.intersect(c.set(w))
            })
    };
    let tokens = match table.setting {
        Setting::Plain => continue_within(witness_inter().tokens(usize::MAX), l, horizon),
        Setting::Noisy => {
            let t = entry.witness_set.clone();
            let seen: BTreeSet<Token> = t.iter().copied().collect();
            let mut head = t;
            head.extend(witness_inter().subtract_finite(&seen).tokens(usize::MAX));
            continue_within(head, l, horizon)
        }
        Setting::Representative => continue_within(entry.witness_set.clone(), l, horizon),
    };
    Ok(EnumerationScript {
        tokens,
        target,
        noise_level: entry.cell.level.unwrap_or(0),
        horizon,
    })
}

/// Plain attack for language `i` (0-based).
pub fn intersection_first_attack(
    table: &ComplexityTable,
    c: &Collection,
    i: usize,
    horizon: usize,
) -> Result<EnumerationScript> {
    let id = table
        .entries
        .iter()
        .position(|e| e.cell.index == i && e.cell.level.is_none())
        .ok_or(Error::IndexOutOfRange {
            index: i,
            len: table.len(),
        })?;
    witness_attack(table, c, id, horizon)
}

/// Noisy attack for language `i` at `level`.
pub fn noisy_attack(
    table: &ComplexityTable,
    c: &Collection,
    i: usize,
    level: u32,
    horizon: usize,
) -> Result<EnumerationScript> {
    let id = table
        .entries
        .iter()
        .position(|e| e.cell.index == i && e.cell.level == Some(level))
        .ok_or(Error::IndexOutOfRange {
            index: i,
            len: table.len(),
        })?;
    witness_attack(table, c, id, horizon)
}

pub fn repr_attack(
    table: &ComplexityTable,
    c: &Collection,
    i: usize,
    horizon: usize,
) -> Result<EnumerationScript> {
    if table.setting != Setting::Representative {
        return Err(Error::Parameter("representative table expected".into()));
    }
    intersection_first_attack(table, c, i, horizon)
}

/// Least token outside `l`.
pub fn junk_token(l: &SetExpr, c: &Collection) -> Token {
    l.complement(&c.registry)
        .iter_canonical()
        .next()
        .expect("a language over the universe leaves infinitely many tokens out")
}

/// Inserts junk tokens at the given positions of a clean script and raises
/// its noise level accordingly.
pub fn with_junk(
    mut s: EnumerationScript,
    c: &Collection,
    positions: &[usize],
) -> EnumerationScript {
    let j = junk_token(c.set(s.target), c);
    let mut ps = positions.to_vec();
    ps.sort_unstable();
    for &p in ps.iter().rev() {
        s.tokens.insert(p.min(s.tokens.len()), j);
    }
    s.tokens.truncate(s.horizon);
    s.noise_level += positions.len() as u32;
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptViolation {
    /// 0-based positions of out-of-language tokens beyond the noise budget.
    pub positions: Vec<usize>,
}

/// Checks that at most `noise_level` scripted tokens fall outside the
/// target. Repetitions of an out-of-language token count once each.
pub fn validate_script(
    s: &EnumerationScript,
    c: &Collection,
) -> std::result::Result<(), ScriptViolation> {
    let l = c.set(s.target);
    let outside: Vec<usize> = s
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| !l.contains(t))
        .map(|(k, _)| k)
        .collect();
    if outside.len() <= s.noise_level as usize {
        Ok(())
    } else {
        Err(ScriptViolation {
            positions: outside[s.noise_level as usize..].to_vec(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScriptDoc {
    pub tokens: Vec<TokenDoc>,
    /// 1-based.
    pub target: usize,
    pub noise_level: u32,
    pub horizon: usize,
}

impl EnumerationScript {
    pub fn to_doc(&self, c: &Collection) -> ScriptDoc {
        ScriptDoc {
            tokens: self
                .tokens
                .iter()
                .map(|t| TokenDoc::from_token(t, &c.registry))
                .collect(),
            target: self.target + 1,
            noise_level: self.noise_level,
            horizon: self.horizon,
        }
    }

    pub fn from_doc(doc: &ScriptDoc, c: &Collection) -> Result<Self> {
        if doc.target == 0 || doc.target > c.len() {
            return Err(Error::Schema(format!(
                "script target {} out of range",
                doc.target
            )));
        }
        Ok(EnumerationScript {
            tokens: doc
                .tokens
                .iter()
                .map(|t| t.to_token(&c.registry))
                .collect::<Result<_>>()?,
            target: doc.target - 1,
            noise_level: doc.noise_level,
            horizon: doc.horizon,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procedures::procedure1;
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
    fn canonical_examples() {
        assert_eq!(
            canonical_tokens(&SetExpr::at_least(1), 3),
            vec![Token::Int(1), Token::Int(2), Token::Int(3)]
        );
        let c = ex31();
        let s = canonical_enumeration(&c, 0, 101).unwrap();
        assert_eq!(s.tokens[99], Token::Int(100));
        assert_eq!(s.tokens[100], Token::Atom(AtomId(0), 0));
        let a = canonical_tokens(&SetExpr::atom(AtomId(0)), 2);
        assert_eq!(
            a,
            vec![Token::Atom(AtomId(0), 0), Token::Atom(AtomId(0), 1)]
        );
    }

    #[test]
    fn plain_attack() {
        let c = ex31();
        let t = procedure1(&c, 8).unwrap();
        let s = intersection_first_attack(&t, &c, 1, 120).unwrap();
        let head: Vec<Token> = (1..=100).map(Token::Int).collect();
        assert_eq!(&s.tokens[..100], &head[..]);
        assert_eq!(s.tokens[100], Token::Int(101));
        assert!(matches!(
            intersection_first_attack(&t, &c, 2, 10),
            Err(Error::NoAttack(3))
        ));
        assert!(validate_script(&s, &c).is_ok());
    }

    #[test]
    fn junk_positions_are_reported() {
        let c = ex31();
        let s = canonical_enumeration(&c, 1, 10).unwrap();
        let noisy = with_junk(s, &c, &[2, 5]);
        assert_eq!(noisy.noise_level, 2);
        assert!(validate_script(&noisy, &c).is_ok());
        let under = EnumerationScript {
            noise_level: 1,
            ..noisy.clone()
        };
        assert_eq!(validate_script(&under, &c).unwrap_err().positions, vec![6]);
    }

    #[test]
    fn script_doc_round_trip() {
        let c = ex31();
        let s = canonical_enumeration(&c, 3, 5).unwrap();
        let text = serde_json::to_string(&s.to_doc(&c)).unwrap();
        let back: ScriptDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(EnumerationScript::from_doc(&back, &c).unwrap(), s);
    }
}
