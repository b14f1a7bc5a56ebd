//! Insertion-sort procedures computing optimal complexity tables, in three
//! settings, plus schedule functions.
//!
//! Every procedure processes a sequence of *cells*. In the plain and
//! representative settings a cell is one language; in the noisy setting it
//! is a (noise level, language) pair visited in diagonal order. Each new
//! cell is appended to the current ordering and bubbled towards the front
//! while its best witness does not beat the complexity of its predecessor.

pub mod noisy;
pub mod plain;
pub mod representative;
pub mod schedule;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::collection::{tokens_to_doc, Collection, TokenDoc};
use crate::error::Result;
use crate::setalg::Token;

pub use noisy::{
    diag_elem, diag_index, max_noisy_witness, procedure2, NoisyBuilder, NOISY_CAPACITY,
};
pub use plain::{procedure1, PlainBuilder};
pub use representative::{
    max_scarce_witness, procedure3, scarce_groups, suffers_scarcity, GroupPartition, GroupsDoc,
    ReprBuilder, REPR_CAPACITY,
};
pub use schedule::{schedule_g, sufficient_f, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Plain,
    Noisy,
    Representative,
}

/// One processed unit: a language index (0-based) and, in the noisy
/// setting, its noise level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub index: usize,
    pub level: Option<u32>,
}

impl Cell {
    pub fn plain(index: usize) -> Self {
        Cell { index, level: None }
    }

    pub fn noisy(level: u32, index: usize) -> Self {
        Cell {
            index,
            level: Some(level),
        }
    }

    pub fn budget(&self) -> u64 {
        u64::from(self.level.unwrap_or(0))
    }
}

/// Outcome of evaluating a prefix: the score, the witness cells (ids into
/// the table's cell list) and the witness token set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness {
    pub m: u64,
    pub cells: Vec<usize>,
    pub tokens: Vec<Token>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub cell: Cell,
    pub m_star: u64,
    pub witness: Vec<usize>,
    pub witness_set: Vec<Token>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityTable {
    pub setting: Setting,
    pub alpha: Option<Rational64>,
    /// Entries in processing order; entry `k` belongs to cell id `k`.
    pub entries: Vec<Entry>,
    /// Current permutation of cell ids.
    pub ordering: Vec<usize>,
}

impl ComplexityTable {
    pub fn new(setting: Setting, alpha: Option<Rational64>) -> Self {
        ComplexityTable {
            setting,
            alpha,
            entries: Vec::new(),
            ordering: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `m*` per cell id.
    pub fn m_star(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.m_star).collect()
    }

    /// Entry for language `index` at `level` (`None` outside the noisy setting).
    pub fn entry_for(&self, index: usize, level: Option<u32>) -> Option<&Entry> {
        self.entries
            .iter()
            .find(|e| e.cell.index == index && e.cell.level == level)
    }

    pub fn position_of(&self, cell_id: usize) -> Option<usize> {
        self.ordering.iter().position(|&c| c == cell_id)
    }

    /// The witness as 0-based language indices.
    pub fn witness_languages(&self, cell_id: usize) -> Vec<usize> {
        self.entries[cell_id]
            .witness
            .iter()
            .map(|&w| self.entries[w].cell.index)
            .collect()
    }

    pub fn to_doc(&self, c: &Collection) -> TableDoc {
        let cell_doc = |id: usize| {
            let cell = self.entries[id].cell;
            CellDoc {
                i: cell.index + 1,
                n: cell.level,
            }
        };
        TableDoc {
            setting: self.setting,
            alpha: self.alpha.map(|a| format!("{}/{}", a.numer(), a.denom())),
            entries: self
                .entries
                .iter()
                .map(|e| EntryDoc {
                    i: e.cell.index + 1,
                    name: c.name(e.cell.index).to_string(),
                    n: e.cell.level,
                    m_star: e.m_star,
                    witness: e.witness.iter().map(|&w| cell_doc(w)).collect(),
                    witness_set: tokens_to_doc(&e.witness_set, &c.registry),
                })
                .collect(),
            ordering: self.ordering.iter().map(|&id| cell_doc(id)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDoc {
    pub i: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntryDoc {
    pub i: usize,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    pub m_star: u64,
    pub witness: Vec<CellDoc>,
    pub witness_set: Vec<TokenDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableDoc {
    pub setting: Setting,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    pub entries: Vec<EntryDoc>,
    pub ordering: Vec<CellDoc>,
}

/// Loop exit rule of the insertion step. Only `Strict` is the procedure;
/// the others exist so the verifier can be shown to catch them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BreakRule {
    #[default]
    Strict,
    NonStrict,
    Never,
}

/// Runs one insertion step for the cell just appended to `ordering`.
///
/// `eval(prefix)` must return the best witness over `prefix`, whose last
/// element is the cell being inserted. Returns that cell's final witness.
pub(crate) fn insertion_step<F>(
    ordering: &mut [usize],
    m_star: &[u64],
    rule: BreakRule,
    mut eval: F,
) -> Result<Witness>
where
    F: FnMut(&[usize]) -> Result<Witness>,
{
    let mut j = ordering.len();
    loop {
        let w = eval(&ordering[..j])?;
        let stop = j <= 1
            || match rule {
                BreakRule::Strict => w.m > m_star[ordering[j - 2]],
                BreakRule::NonStrict => w.m >= m_star[ordering[j - 2]],
                BreakRule::Never => false,
            };
        if stop {
            return Ok(w);
        }
        ordering.swap(j - 1, j - 2);
        j -= 1;
    }
}
