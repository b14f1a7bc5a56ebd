use num_rational::Rational64;

use super::{
    build_script, build_table, cell_id, default_horizon, noisy_position_cap, resolve_schedule,
    simulate, theoretical_bound, AttackKind, GeneratorKind, InvariantResult, Setup,
};
use crate::adversary::{canonical_enumeration, with_junk};
use crate::collection::{baseline_times, max_finite_intersection, Baseline, Collection};
use crate::error::{Error, Result};
use crate::generators::ParetoGenerator;
use crate::oracle::{
    oracle_mstar, oracle_noisy_table, oracle_repr_table, token_window, ORACLE_NOISY_CAPACITY,
};
use crate::procedures::{
    procedure1, BreakRule, ComplexityTable, NoisyBuilder, PlainBuilder, ReprBuilder, Setting,
    Witness,
};
use crate::setalg::{Endpoint, SetExpr};

/// Largest collection checked against the brute-force oracles.
pub const ORACLE_CHECK_LIMIT: usize = 10;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub results: Vec<InvariantResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&InvariantResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

/// Collects the first failure of a check, or passes.
struct Check {
    name: &'static str,
    failure: Option<String>,
    notes: Vec<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            failure: None,
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        if !ok && self.failure.is_none() {
            self.failure = Some(detail());
        }
    }

    fn finish(self) -> InvariantResult {
        InvariantResult {
            name: self.name.to_string(),
            passed: self.failure.is_none(),
            detail: self.failure.unwrap_or_else(|| self.notes.join("; ")),
        }
    }
}

enum AnyBuilder {
    Plain(PlainBuilder),
    Noisy(NoisyBuilder, u64),
    Repr(ReprBuilder),
}

impl AnyBuilder {
    fn new(c: &Collection, setup: &Setup, rule: BreakRule) -> Result<Self> {
        Ok(match setup.setting {
            Setting::Plain => AnyBuilder::Plain(PlainBuilder::new(c).with_rule(rule)),
            Setting::Noisy => AnyBuilder::Noisy(
                NoisyBuilder::new(c).with_rule(rule),
                noisy_position_cap(c.len(), setup.levels),
            ),
            Setting::Representative => {
                let (p, alpha) = setup.repr_params()?;
                AnyBuilder::Repr(ReprBuilder::new(c, p.clone(), alpha)?.with_rule(rule))
            }
        })
    }

    /// One more iteration; `false` once everything is processed.
    fn advance(&mut self) -> Result<bool> {
        match self {
            AnyBuilder::Plain(b) if b.processed() < b.available() => b.step().map(|_| true),
            AnyBuilder::Noisy(b, cap) if b.visited_positions() < *cap => {
                b.step_position().map(|_| true)
            }
            AnyBuilder::Repr(b) if b.table().len() < b.available() => b.step().map(|_| true),
            _ => Ok(false),
        }
    }

    fn table(&self) -> &ComplexityTable {
        match self {
            AnyBuilder::Plain(b) => b.table(),
            AnyBuilder::Noisy(b, _) => b.table(),
            AnyBuilder::Repr(b) => b.table(),
        }
    }

    fn evaluate(&self, prefix: &[usize]) -> Result<Witness> {
        match self {
            AnyBuilder::Plain(b) => b.evaluate(prefix),
            AnyBuilder::Noisy(b, _) => b.evaluate(prefix),
            AnyBuilder::Repr(b) => b.evaluate(prefix),
        }
    }
}

/// Argmax maintenance and ordering monotonicity after every iteration,
/// then witness structure on the final table.
fn structural_checks(
    c: &Collection,
    setup: &Setup,
    rule: BreakRule,
) -> Result<(Vec<InvariantResult>, ComplexityTable)> {
    let mut b = AnyBuilder::new(c, setup, rule)?;
    let mut argmax = Check::new("argmax-maintained");
    let mut mono = Check::new("ordering-monotone");
    let mut iteration = 0;
    while b.advance()? {
        iteration += 1;
        let t = b.table();
        let m = t.m_star();
        for k in 0..t.ordering.len() {
            let id = t.ordering[k];
            let w = b.evaluate(&t.ordering[..=k])?;
            argmax.require(w.m == m[id], || {
                format!(
                    "iteration {iteration}: cell {} at position {} stores {} but its prefix yields {}",
                    id + 1,
                    k + 1,
                    m[id],
                    w.m
                )
            });
        }
        let seq: Vec<u64> = t.ordering.iter().map(|&id| m[id]).collect();
        mono.require(seq.windows(2).all(|w| w[0] <= w[1]), || {
            format!("iteration {iteration}: m* along the ordering is {seq:?}")
        });
    }
    let table = b.table().clone();
    let mut structure = Check::new("witness-structure");
    for (id, e) in table.entries.iter().enumerate() {
        if e.witness.is_empty() {
            structure.require(e.m_star == 0, || {
                format!("cell {} has m* {} and no witness", id + 1, e.m_star)
            });
            continue;
        }
        structure.require(e.witness.contains(&id), || {
            format!("cell {} is missing from its own witness", id + 1)
        });
        let others: Vec<usize> = e.witness.iter().copied().filter(|&w| w != id).collect();
        for &w in &others {
            structure.require(w < id, || {
                format!("witness of cell {} names later cell {}", id + 1, w + 1)
            });
            structure.require(table.entries[w].m_star < e.m_star, || {
                format!(
                    "witness of cell {} holds cell {} with m* {} >= {}",
                    id + 1,
                    w + 1,
                    table.entries[w].m_star,
                    e.m_star
                )
            });
        }
        if table.setting != Setting::Representative {
            structure.require(
                others
                    .iter()
                    .any(|&w| table.entries[w].cell.index != e.cell.index),
                || format!("witness of cell {} holds no other language", id + 1),
            );
        }
    }
    Ok((
        vec![argmax.finish(), mono.finish(), structure.finish()],
        table,
    ))
}

fn noisy_bound_check(c: &Collection, table: &ComplexityTable) -> Result<InvariantResult> {
    let mut chk = Check::new("noisy-witness-bound");
    let sets = c.sets();
    for (k, &id) in table.ordering.iter().enumerate() {
        let prefix = &table.ordering[..=k];
        let refs: Vec<&SetExpr> = prefix
            .iter()
            .map(|&p| &sets[table.entries[p].cell.index])
            .collect();
        let d = max_finite_intersection(&refs, k)?.m;
        let a = prefix
            .iter()
            .map(|&p| table.entries[p].cell.budget())
            .max()
            .unwrap_or(0);
        let bound = d + prefix.len() as u64 * a;
        let m = table.entries[id].m_star;
        chk.require(m <= bound, || {
            format!("cell {} has m* {m} > {d} + {}*{a}", id + 1, prefix.len())
        });
    }
    Ok(chk.finish())
}

fn repr_bound_check(
    c: &Collection,
    setup: &Setup,
    table: &ComplexityTable,
) -> Result<InvariantResult> {
    let (p, alpha) = setup.repr_params()?;
    let mut chk = Check::new("representative-witness-bound");
    for (id, e) in table.entries.iter().enumerate() {
        if e.witness.is_empty() {
            continue;
        }
        let inter = e
            .witness
            .iter()
            .fold(SetExpr::universe(&c.registry), |acc, &w| {
                acc.intersect(c.set(table.entries[w].cell.index))
            });
        let bound = match inter.cardinality().finite() {
            Some(n) => n,
            None => {
                let pmax = p
                    .groups()
                    .iter()
                    .filter_map(|a| a.intersect(&inter).cardinality().finite())
                    .max()
                    .unwrap_or(0);
                (Rational64::from_integer((p.k() as u64 * pmax) as i64) / alpha)
                    .floor()
                    .to_integer() as u64
            }
        };
        chk.require(e.m_star <= bound, || {
            format!("cell {} has m* {} above {bound}", id + 1, e.m_star)
        });
    }
    Ok(chk.finish())
}

/// Token window wide enough for the noisy oracle on `c` with the given
/// total budget.
pub fn noisy_window(c: &Collection, budget: u64) -> Vec<crate::setalg::Token> {
    let mut radius = 0i64;
    let mut depth = 0u64;
    for s in c.sets() {
        for iv in s.intervals() {
            for e in [iv.lo, iv.hi] {
                if let Endpoint::Fin(x) = e {
                    radius = radius.max(x.abs());
                }
            }
        }
        for part in s.atom_parts().values() {
            if let Some(&top) = part.listed().iter().next_back() {
                depth = depth.max(top);
            }
        }
    }
    token_window(&c.registry, radius + budget as i64 + 2, depth + budget + 2)
}

fn oracle_check(
    c: &Collection,
    setup: &Setup,
    table: &ComplexityTable,
) -> Result<Option<InvariantResult>> {
    let mut chk = Check::new("oracle-equivalence");
    match setup.setting {
        Setting::Plain => {
            if c.len() > ORACLE_CHECK_LIMIT {
                return Ok(None);
            }
            let o = oracle_mstar(c, c.len())?;
            chk.require(o.m_star() == table.m_star(), || {
                format!("oracle m* {:?} vs {:?}", o.m_star(), table.m_star())
            });
            chk.require(o.ordering == table.ordering, || {
                format!("oracle ordering {:?} vs {:?}", o.ordering, table.ordering)
            });
        }
        Setting::Noisy => {
            if table.len() > ORACLE_NOISY_CAPACITY {
                return Ok(None);
            }
            let budget: u64 = table.entries.iter().map(|e| e.cell.budget()).sum();
            let window = noisy_window(c, budget);
            let o = oracle_noisy_table(c, noisy_position_cap(c.len(), setup.levels), &window)?;
            let mine: Vec<_> = table.entries.iter().map(|e| (e.cell, e.m_star)).collect();
            chk.require(o == mine, || format!("oracle {o:?} vs {mine:?}"));
        }
        Setting::Representative => {
            if c.len() > ORACLE_CHECK_LIMIT {
                return Ok(None);
            }
            let (p, alpha) = setup.repr_params()?;
            let o = oracle_repr_table(c, p, alpha, c.len())?;
            chk.require(o.m_star() == table.m_star(), || {
                format!("oracle m* {:?} vs {:?}", o.m_star(), table.m_star())
            });
            chk.require(o.ordering == table.ordering, || {
                format!("oracle ordering {:?} vs {:?}", o.ordering, table.ordering)
            });
        }
    }
    Ok(Some(chk.finish()))
}

/// Swapping two adjacent disjoint languages leaves every language's `m*`
/// unchanged.
fn adjacent_swap_check(c: &Collection, table: &ComplexityTable) -> Result<Option<InvariantResult>> {
    if c.len() > ORACLE_CHECK_LIMIT {
        return Ok(None);
    }
    let mut chk = Check::new("adjacent-swap");
    let base = table.m_star();
    let mut swaps = 0;
    for a in 0..c.len().saturating_sub(1) {
        if !c.set(a).intersect(c.set(a + 1)).is_empty() {
            continue;
        }
        swaps += 1;
        let mut perm: Vec<usize> = (0..c.len()).collect();
        perm.swap(a, a + 1);
        let swapped = c.reordered(&perm)?;
        let fast = procedure1(&swapped, swapped.len())?.m_star();
        let slow = oracle_mstar(&swapped, swapped.len())?.m_star();
        let back: Vec<u64> = (0..c.len())
            .map(|i| fast[perm.iter().position(|&q| q == i).unwrap()])
            .collect();
        chk.require(fast == slow, || {
            format!(
                "swap {}/{}: procedure {fast:?} vs oracle {slow:?}",
                a + 1,
                a + 2
            )
        });
        chk.require(back == base, || {
            format!("swap {}/{}: m* {back:?} vs {base:?}", a + 1, a + 2)
        });
    }
    chk.notes.push(format!("{swaps} disjoint adjacent pairs"));
    Ok(Some(chk.finish()))
}

/// Runs canonical and witness-first scripts for every cell and checks the
/// measured time against the bound (and the group distance).
fn validity_checks(
    c: &Collection,
    setup: &Setup,
    table: &ComplexityTable,
) -> Result<Vec<InvariantResult>> {
    let schedule = resolve_schedule(setup, table);
    let horizon = default_horizon(table, &schedule)?;
    let mut valid = Check::new("generator-validity");
    let mut runs = 0;
    let mut record = |chk: &mut Check, label: &str, r: &super::SimReport| {
        runs += 1;
        chk.require(r.passed, || {
            format!(
                "{label} on language {}: firstStable {} vs bound {:?}, script ok {}, group distance ok {}",
                r.target + 1,
                r.first_stable,
                r.bound,
                r.script_ok,
                r.linf_ok
            )
        });
    };
    let mut within_cp = Check::new("pareto-within-cp-guarantee");
    let cp = match setup.setting {
        Setting::Plain => Some(baseline_times(c, Baseline::Cp)?),
        _ => None,
    };
    let levels: Vec<u32> = match setup.setting {
        Setting::Noisy => (0..=setup.levels).collect(),
        _ => vec![0],
    };
    for i in 0..c.len() {
        for &n in &levels {
            let id = cell_id(table, i, n)?;
            let bound = theoretical_bound(table, &schedule, id)?;
            let mut scripts = vec![("canonical", canonical_enumeration(c, i, horizon)?)];
            if n > 0 {
                let clean = canonical_enumeration(c, i, horizon)?;
                scripts.push((
                    "junk-first",
                    with_junk(clean, c, &(0..n as usize).collect::<Vec<_>>()),
                ));
            }
            let attack = match setup.setting {
                Setting::Representative => AttackKind::Repr,
                _ => AttackKind::IntersectionFirst,
            };
            match build_script(c, table, attack, i, n, horizon) {
                Ok(s) => scripts.push(("witness-first", s)),
                Err(Error::NoAttack(_)) => {}
                Err(e) => return Err(e),
            }
            for (label, s) in scripts {
                let r = simulate(c, setup, &schedule, GeneratorKind::Optimal, &s, Some(bound))?;
                record(&mut valid, label, &r);
                if let Some(cp) = &cp {
                    within_cp.require(r.first_stable <= cp[i], || {
                        format!(
                            "{label} on language {}: {} above CP's {}",
                            i + 1,
                            r.first_stable,
                            cp[i]
                        )
                    });
                }
            }
        }
    }
    valid.notes.push(format!("{runs} runs"));
    let mut out = vec![valid.finish()];
    if cp.is_some() {
        out.push(within_cp.finish());
    }
    Ok(out)
}

/// Witness-first attacks against the CP baseline: whenever CP is already
/// correct for the target when the witness intersection is exhausted, its
/// output misses a witness language of smaller complexity.
fn cp_attack_check(c: &Collection, table: &ComplexityTable) -> Result<InvariantResult> {
    let mut chk = Check::new("cp-attack-tradeoff");
    let mut caught = 0;
    for (id, e) in table.entries.iter().enumerate() {
        if e.m_star == 0 {
            continue;
        }
        let i = e.cell.index;
        let script = crate::adversary::intersection_first_attack(table, c, i, e.m_star as usize)?;
        let mut g = ParetoGenerator::cp_baseline(c);
        let mut z = None;
        for &x in &script.tokens {
            z = Some(g.step(x)?);
        }
        let z = z.expect("nonempty script");
        let s = g.seen();
        if !(c.set(i).contains(&z) && !s.contains(&z)) {
            continue;
        }
        caught += 1;
        let missed = e.witness.iter().filter(|&&w| w != id).any(|&w| {
            !c.set(table.entries[w].cell.index).contains(&z) && table.entries[w].m_star < e.m_star
        });
        chk.require(missed, || {
            format!(
                "CP output at time {} is inside every witness language",
                e.m_star
            )
        });
    }
    chk.notes
        .push(format!("{caught} attacks where CP was correct early"));
    Ok(chk.finish())
}

/// Every invariant applicable to `setup` on collection `c`.
pub fn cmd_verify(c: &Collection, setup: &Setup) -> Result<VerifyReport> {
    let (mut results, table) = structural_checks(c, setup, BreakRule::Strict)?;
    let built = build_table(c, setup)?;
    let mut same = Check::new("incremental-matches-batch");
    same.require(built == table, || {
        "incremental builder and batch procedure disagree".into()
    });
    results.push(same.finish());
    match setup.setting {
        Setting::Plain => {
            results.extend(oracle_check(c, setup, &table)?);
            results.extend(adjacent_swap_check(c, &table)?);
            results.push(cp_attack_check(c, &table)?);
        }
        Setting::Noisy => {
            results.push(noisy_bound_check(c, &table)?);
            results.extend(oracle_check(c, setup, &table)?);
        }
        Setting::Representative => {
            results.push(repr_bound_check(c, setup, &table)?);
            results.extend(oracle_check(c, setup, &table)?);
        }
    }
    results.extend(validity_checks(c, setup, &table)?);
    Ok(VerifyReport { results })
}

/// Runs the structural checks with broken loop-exit rules; each result
/// passes when some check catches the mutation.
pub fn mutation_self_test(c: &Collection, setup: &Setup) -> Result<Vec<InvariantResult>> {
    let mut out = Vec::new();
    for (rule, name) in [
        (BreakRule::NonStrict, "mutation-non-strict"),
        (BreakRule::Never, "mutation-never-break"),
    ] {
        let (results, _) = structural_checks(c, setup, rule)?;
        let caught: Vec<String> = results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name.clone())
            .collect();
        out.push(InvariantResult {
            name: name.to_string(),
            passed: !caught.is_empty(),
            detail: if caught.is_empty() {
                "no check failed".into()
            } else {
                format!("caught by {}", caught.join(", "))
            },
        });
    }
    Ok(out)
}
