//! Drivers behind the command-line tool: table construction, simulation
//! of a generator against a script, comparison of time sequences and the
//! invariant suite.

mod compare;
mod report;
mod verify;

pub use compare::{cmd_compare, cp_times_for_order, CompareReport, NamedTimes, ReorderSummary};
pub use report::{
    parse_ratio, ratio_text, InvariantResult, MassDoc, OutputDoc, ReportDoc, SimReportDoc,
    SimStepDoc, VerdictDoc,
};
pub use verify::{cmd_verify, mutation_self_test, noisy_window, VerifyReport};

use std::collections::BTreeSet;

use num_rational::Rational64;

use crate::adversary::{
    canonical_enumeration, intersection_first_attack, noisy_attack, repr_attack, validate_script,
    EnumerationScript,
};
use crate::collection::{baseline_times, Baseline, Collection, PLAIN_CAPACITY};
use crate::error::{Error, Result};
use crate::generators::{
    linf, Distribution, NoisyGenerator, ObliviousGenerator, ObliviousKind, ParetoGenerator,
    ReprGenerator,
};
use crate::procedures::{
    diag_index, procedure1, procedure2, procedure3, sufficient_f, ComplexityTable, GroupPartition,
    Schedule, Setting,
};
use crate::setalg::Token;

/// How the prefix-growth function is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleChoice {
    Sufficient,
    Fixed(Schedule),
}

impl ScheduleChoice {
    /// `identity`, `powN`, `sufficient` or `table:<file>`.
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "sufficient" => Ok(ScheduleChoice::Sufficient),
            t if t.starts_with("table:") => {
                let body = crate::collection::read_file(std::path::Path::new(&t[6..]))?;
                Ok(ScheduleChoice::Fixed(Schedule::from_table_json(&body)?))
            }
            t => Ok(ScheduleChoice::Fixed(Schedule::parse_kind(t)?)),
        }
    }
}

/// Which adversary script to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackKind {
    Canonical,
    IntersectionFirst,
    Repr,
}

impl AttackKind {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "canonical" => Ok(AttackKind::Canonical),
            "intersection-first" => Ok(AttackKind::IntersectionFirst),
            "repr" => Ok(AttackKind::Repr),
            other => Err(Error::Parameter(format!("unknown attack `{other}`"))),
        }
    }
}

/// The optimal generator of the setting, or the CP baseline (plain only).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Optimal,
    Cp,
}

impl GeneratorKind {
    fn label(self, setting: Setting) -> &'static str {
        match (self, setting) {
            (GeneratorKind::Cp, _) => "cp",
            (_, Setting::Plain) => "pareto",
            (_, Setting::Noisy) => "noisy",
            (_, Setting::Representative) => "representative",
        }
    }
}

/// Setting and parameters shared by every command.
#[derive(Clone, Debug)]
pub struct Setup {
    pub setting: Setting,
    /// Largest noise level covered in the noisy setting.
    pub levels: u32,
    pub partition: Option<GroupPartition>,
    pub alpha: Option<Rational64>,
    pub schedule: ScheduleChoice,
}

impl Setup {
    pub fn plain() -> Self {
        Setup {
            setting: Setting::Plain,
            levels: 0,
            partition: None,
            alpha: None,
            schedule: ScheduleChoice::Sufficient,
        }
    }

    pub fn noisy(levels: u32) -> Self {
        Setup {
            setting: Setting::Noisy,
            levels,
            ..Setup::plain()
        }
    }

    pub fn repr(partition: GroupPartition, alpha: Rational64) -> Self {
        Setup {
            setting: Setting::Representative,
            partition: Some(partition),
            alpha: Some(alpha),
            ..Setup::plain()
        }
    }

    pub fn with_schedule(mut self, schedule: ScheduleChoice) -> Self {
        self.schedule = schedule;
        self
    }

    fn repr_params(&self) -> Result<(&GroupPartition, Rational64)> {
        match (&self.partition, self.alpha) {
            (Some(p), Some(a)) => Ok((p, a)),
            _ => Err(Error::Parameter(
                "the representative setting needs groups and alpha".into(),
            )),
        }
    }
}

/// Last diagonal position needed to process every cell with level
/// `<= levels` over `len` languages.
pub fn noisy_position_cap(len: usize, levels: u32) -> u64 {
    if len == 0 {
        0
    } else {
        diag_index(levels, len)
    }
}

/// Complexity table for the whole collection in the chosen setting.
pub fn build_table(c: &Collection, setup: &Setup) -> Result<ComplexityTable> {
    match setup.setting {
        Setting::Plain => {
            if c.len() > PLAIN_CAPACITY {
                return Err(Error::Capacity {
                    what: "plain prefix",
                    len: c.len(),
                    bound: PLAIN_CAPACITY,
                });
            }
            procedure1(c, c.len())
        }
        Setting::Noisy => procedure2(c, noisy_position_cap(c.len(), setup.levels)),
        Setting::Representative => {
            let (p, alpha) = setup.repr_params()?;
            procedure3(c, p, alpha, c.len())
        }
    }
}

pub fn resolve_schedule(setup: &Setup, table: &ComplexityTable) -> Schedule {
    match &setup.schedule {
        ScheduleChoice::Sufficient => sufficient_f(table),
        ScheduleChoice::Fixed(s) => s.clone(),
    }
}

/// Traversal position of a cell: its 1-based index, or its diagonal
/// position in the noisy setting.
pub fn cell_position(table: &ComplexityTable, id: usize) -> u64 {
    let cell = table.entries[id].cell;
    match table.setting {
        Setting::Noisy => diag_index(cell.level.unwrap_or(0), cell.index + 1),
        _ => cell.index as u64 + 1,
    }
}

/// `max(g(position), m* + 1)`.
pub fn theoretical_bound(table: &ComplexityTable, schedule: &Schedule, id: usize) -> Result<u64> {
    Ok(schedule
        .g(cell_position(table, id))?
        .max(table.entries[id].m_star + 1))
}

/// Default horizon: twice the largest bound over all cells, plus 16.
pub fn default_horizon(table: &ComplexityTable, schedule: &Schedule) -> Result<usize> {
    let mut top = 1;
    for id in 0..table.len() {
        top = top.max(theoretical_bound(table, schedule, id)?);
    }
    Ok(2 * top as usize + 16)
}

/// Generator output at one step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutput {
    Token(Token),
    Distribution(Distribution),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimStep {
    pub input: Token,
    /// `|S_t|`.
    pub size: u64,
    pub output: StepOutput,
    pub valid: bool,
    /// Group distance to the empirical distribution (representative only).
    pub linf: Option<Rational64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimReport {
    pub setting: Setting,
    pub generator: String,
    /// 0-based.
    pub target: usize,
    pub noise_level: u32,
    pub horizon: usize,
    pub steps: Vec<SimStep>,
    pub first_stable: u64,
    pub bound: Option<u64>,
    pub script_ok: bool,
    pub linf_ok: bool,
    pub passed: bool,
}

impl SimReport {
    pub fn linf_max(&self) -> Option<Rational64> {
        self.steps.iter().filter_map(|s| s.linf).max()
    }
}

/// Least `tau` such that every step with `|S_t| >= tau` is valid.
pub fn first_stable(steps: &[SimStep]) -> u64 {
    steps
        .iter()
        .filter(|s| !s.valid)
        .map(|s| s.size + 1)
        .max()
        .unwrap_or(1)
}

enum Running {
    Plain(ParetoGenerator),
    Noisy(NoisyGenerator),
    Repr(ReprGenerator, GroupPartition, Rational64),
}

/// Runs a generator against a script and measures its stabilization time.
/// `bound` is compared against the measured time when given.
pub fn simulate(
    c: &Collection,
    setup: &Setup,
    schedule: &Schedule,
    kind: GeneratorKind,
    script: &EnumerationScript,
    bound: Option<u64>,
) -> Result<SimReport> {
    let mut gen = match (setup.setting, kind) {
        (Setting::Plain, GeneratorKind::Optimal) => {
            Running::Plain(ParetoGenerator::new(c, schedule.clone()))
        }
        (_, GeneratorKind::Cp) => Running::Plain(ParetoGenerator::cp_baseline(c)),
        (Setting::Noisy, _) => Running::Noisy(NoisyGenerator::new(
            c,
            schedule.clone(),
            noisy_position_cap(c.len(), setup.levels),
        )),
        (Setting::Representative, _) => {
            let (p, alpha) = setup.repr_params()?;
            Running::Repr(
                ReprGenerator::new(c, p.clone(), alpha, schedule.clone())?,
                p.clone(),
                alpha,
            )
        }
    };
    let target = c.set(script.target);
    let mut seen: BTreeSet<Token> = BTreeSet::new();
    let mut steps = Vec::with_capacity(script.tokens.len());
    for &x in &script.tokens {
        seen.insert(x);
        let fresh = |t: &Token| target.contains(t) && !seen.contains(t);
        let step = match &mut gen {
            Running::Plain(g) => {
                let out = g.step(x)?;
                SimStep {
                    input: x,
                    size: seen.len() as u64,
                    valid: fresh(&out),
                    output: StepOutput::Token(out),
                    linf: None,
                }
            }
            Running::Noisy(g) => {
                let out = g.step(x)?;
                SimStep {
                    input: x,
                    size: seen.len() as u64,
                    valid: fresh(&out),
                    output: StepOutput::Token(out),
                    linf: None,
                }
            }
            Running::Repr(g, p, _) => {
                let d = g.step(x)?;
                let s: Vec<Token> = seen.iter().copied().collect();
                let gap = linf(&d.by_group(p), &p.empirical(&s));
                let valid = d.support().all(fresh);
                SimStep {
                    input: x,
                    size: seen.len() as u64,
                    valid,
                    output: StepOutput::Distribution(d),
                    linf: Some(gap),
                }
            }
        };
        steps.push(step);
    }
    let linf_ok = match &gen {
        Running::Repr(_, _, alpha) => steps.iter().all(|s| s.linf.is_some_and(|v| v <= *alpha)),
        _ => true,
    };
    let first = first_stable(&steps);
    let script_ok = validate_script(script, c).is_ok();
    Ok(SimReport {
        setting: setup.setting,
        generator: kind.label(setup.setting).to_string(),
        target: script.target,
        noise_level: script.noise_level,
        horizon: script.horizon,
        passed: script_ok && linf_ok && bound.is_none_or(|b| first <= b),
        steps,
        first_stable: first,
        bound,
        script_ok,
        linf_ok,
    })
}

/// Builds the script for `attack` against language `i` (0-based); `level`
/// selects the noisy cell.
pub fn build_script(
    c: &Collection,
    table: &ComplexityTable,
    attack: AttackKind,
    i: usize,
    level: u32,
    horizon: usize,
) -> Result<EnumerationScript> {
    match attack {
        AttackKind::Canonical => canonical_enumeration(c, i, horizon),
        AttackKind::IntersectionFirst => match table.setting {
            Setting::Noisy => noisy_attack(table, c, i, level, horizon),
            _ => intersection_first_attack(table, c, i, horizon),
        },
        AttackKind::Repr => repr_attack(table, c, i, horizon),
    }
}

/// Id of the table cell for language `i` at `level`.
pub fn cell_id(table: &ComplexityTable, i: usize, level: u32) -> Result<usize> {
    let want = (table.setting == Setting::Noisy).then_some(level);
    table
        .entries
        .iter()
        .position(|e| e.cell.index == i && e.cell.level == want)
        .ok_or(Error::IndexOutOfRange {
            index: i + 1,
            len: table.len(),
        })
}

/// Options of a simulate run.
#[derive(Clone, Debug)]
pub struct SimulateOptions {
    /// 0-based targets; all languages when empty.
    pub targets: Vec<usize>,
    pub attack: AttackKind,
    pub horizon: Option<usize>,
    pub generator: GeneratorKind,
}

/// Runs the chosen attack against every requested target. Targets with an
/// empty witness fall back to the canonical enumeration.
pub fn cmd_simulate(
    c: &Collection,
    setup: &Setup,
    opts: &SimulateOptions,
) -> Result<(ComplexityTable, Vec<SimReport>)> {
    let table = build_table(c, setup)?;
    let schedule = resolve_schedule(setup, &table);
    let horizon = match opts.horizon {
        Some(h) => h,
        None => default_horizon(&table, &schedule)?,
    };
    let targets: Vec<usize> = if opts.targets.is_empty() {
        (0..c.len()).collect()
    } else {
        opts.targets.clone()
    };
    let cp_times = match (setup.setting, opts.generator) {
        (Setting::Plain, GeneratorKind::Cp) => Some(baseline_times(c, Baseline::Cp)?),
        _ => None,
    };
    let mut reports = Vec::new();
    for &i in &targets {
        let level = setup.levels;
        let id = cell_id(&table, i, level)?;
        let bound = match &cp_times {
            Some(t) => t[i],
            None => theoretical_bound(&table, &schedule, id)?,
        };
        let script = match build_script(c, &table, opts.attack, i, level, horizon) {
            Err(Error::NoAttack(_)) => canonical_enumeration(c, i, horizon)?,
            other => other?,
        };
        reports.push(simulate(
            c,
            setup,
            &schedule,
            opts.generator,
            &script,
            Some(bound),
        )?);
    }
    Ok((table, reports))
}

/// Runs the oblivious generator for `kind` with declared `times` against
/// the canonical enumeration of window language `target` (0-based); the
/// bound is the declared time of the target.
pub fn simulate_oblivious(
    kind: ObliviousKind,
    times: &[u64],
    target: usize,
    horizon: usize,
) -> Result<SimReport> {
    let window = kind.window(times.len());
    let script = canonical_enumeration(&window, target, horizon)?;
    let mut g = ObliviousGenerator::new(kind, times.to_vec())?;
    let l = window.set(target);
    let mut seen = BTreeSet::new();
    let steps: Vec<SimStep> = script
        .tokens
        .iter()
        .map(|&x| {
            seen.insert(x);
            let out = g.step(x);
            SimStep {
                input: x,
                size: seen.len() as u64,
                valid: l.contains(&out) && !seen.contains(&out),
                output: StepOutput::Token(out),
                linf: None,
            }
        })
        .collect();
    let first = first_stable(&steps);
    let bound = times[target];
    Ok(SimReport {
        setting: Setting::Plain,
        generator: "oblivious".into(),
        target,
        noise_level: 0,
        horizon,
        steps,
        first_stable: first,
        bound: Some(bound),
        script_ok: true,
        linf_ok: true,
        passed: first <= bound,
    })
}
