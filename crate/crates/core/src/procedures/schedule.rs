use super::{noisy::diag_index, ComplexityTable, Setting};
use crate::error::{Error, Result};

/// A non-decreasing prefix-growth function `f`, evaluated at `t >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    Identity,
    /// `f(t) = base^t`
    Power {
        base: u64,
    },
    /// `f(t) = table[t - 1]`, flat beyond the table.
    Explicit(Vec<u64>),
    /// `f(t) = max { position : threshold <= t }` over `(position, threshold)`
    /// pairs, 0 when no threshold is reached.
    FromComplexities(Vec<(u64, u64)>),
}

impl Schedule {
    pub fn power(base: u64) -> Result<Self> {
        if base < 2 {
            return Err(Error::Parameter(format!(
                "power schedule base must be >= 2, got {base}"
            )));
        }
        Ok(Schedule::Power { base })
    }

    pub fn explicit(table: Vec<u64>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::Parameter("explicit schedule table is empty".into()));
        }
        if table.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parameter(
                "explicit schedule table must be non-decreasing".into(),
            ));
        }
        Ok(Schedule::Explicit(table))
    }

    pub fn eval(&self, t: u64) -> u64 {
        let t = t.max(1);
        match self {
            Schedule::Identity => t,
            Schedule::Power { base } => base
                .checked_pow(t.min(u64::from(u32::MAX)) as u32)
                .unwrap_or(u64::MAX),
            Schedule::Explicit(table) => {
                let k = (t as usize).min(table.len());
                table[k - 1]
            }
            Schedule::FromComplexities(pairs) => pairs
                .iter()
                .filter(|(_, thr)| *thr <= t)
                .map(|(pos, _)| *pos)
                .max()
                .unwrap_or(0),
        }
    }

    /// Smallest `j >= 1` with `f(j) >= i`.
    pub fn g(&self, i: u64) -> Result<u64> {
        match self {
            Schedule::Identity => Ok(i.max(1)),
            Schedule::Power { base } => {
                let mut j = 1;
                let mut v = *base;
                while v < i {
                    v = v.saturating_mul(*base);
                    j += 1;
                }
                Ok(j)
            }
            Schedule::Explicit(table) => table
                .iter()
                .position(|&v| v >= i)
                .map(|p| p as u64 + 1)
                .ok_or(Error::UnboundedSchedule { target: i }),
            Schedule::FromComplexities(pairs) => pairs
                .iter()
                .filter(|(pos, _)| *pos >= i)
                .map(|(_, thr)| (*thr).max(1))
                .min()
                .ok_or(Error::UnboundedSchedule { target: i }),
        }
    }

    /// Parses `identity`, `pow2`, `powN` or a JSON array of values.
    pub fn parse_kind(kind: &str) -> Result<Self> {
        match kind {
            "identity" => Ok(Schedule::Identity),
            k if k.starts_with("pow") => {
                let base = k[3..]
                    .parse()
                    .map_err(|_| Error::Parameter(format!("bad schedule `{k}`")))?;
                Schedule::power(base)
            }
            other => Err(Error::Parameter(format!("unknown schedule `{other}`"))),
        }
    }

    pub fn from_table_json(text: &str) -> Result<Self> {
        Schedule::explicit(serde_json::from_str(text)?)
    }
}

/// `g(i)` for a schedule.
pub fn schedule_g(f: &Schedule, i: u64) -> Result<u64> {
    f.g(i)
}

/// The schedule that makes every threshold equal `m* + 1`: each cell is
/// reached as soon as `t` passes its complexity. Positions are cell
/// numbers, or diagonal positions in the noisy setting.
pub fn sufficient_f(table: &ComplexityTable) -> Schedule {
    let pairs = table
        .entries
        .iter()
        .enumerate()
        .map(|(id, e)| {
            let pos = match table.setting {
                Setting::Noisy => diag_index(e.cell.level.unwrap_or(0), e.cell.index + 1),
                _ => id as u64 + 1,
            };
            (pos, e.m_star + 1)
        })
        .collect();
    Schedule::FromComplexities(pairs)
}
