use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use genlimit::collection::{read_collection_arg, summarize_tokens};
use genlimit::harness::{
    build_table, cmd_compare, cmd_simulate, cmd_verify, mutation_self_test, parse_ratio,
    ratio_text, AttackKind, GeneratorKind, ReportDoc, ScheduleChoice, Setup, SimReport,
    SimulateOptions, StepOutput,
};
use genlimit::procedures::{ComplexityTable, GroupPartition, NoisyBuilder, Setting};
use genlimit::{Collection, Result};

#[derive(Parser)]
#[command(
    name = "genlimit",
    version,
    about = "Non-uniform generation in the limit over countable collections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the complexity table with witnesses.
    Complexity(Common),
    /// Run a generator against an adversary script.
    Simulate(Common),
    /// Compare time sequences by Pareto dominance.
    Compare(Common),
    /// Run the invariant suite.
    Verify(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenArg {
    Optimal,
    Cp,
}

#[derive(Args)]
struct Common {
    /// Collection document, or `random:<n>` for a seeded random collection.
    collection: String,
    #[arg(long)]
    noisy: bool,
    /// Largest noise level (noisy setting).
    #[arg(long, default_value_t = 1)]
    levels: u32,
    /// Process exactly this many noisy cells (complexity only).
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    repr: bool,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    groups: Option<PathBuf>,
    /// identity | powN | sufficient | table:<file>
    #[arg(long, default_value = "sufficient")]
    schedule: String,
    /// 1-based target language; all languages when omitted.
    #[arg(long)]
    target: Option<usize>,
    /// canonical | intersection-first | repr
    #[arg(long, default_value = "intersection-first")]
    attack: String,
    #[arg(long, value_enum, default_value = "optimal")]
    generator: GenArg,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run the verifier against deliberately broken procedures.
    #[arg(long)]
    mutation: bool,
}

impl Common {
    fn load(&self) -> Result<Collection> {
        read_collection_arg(&self.collection, self.seed)
    }

    fn setup(&self, c: &Collection) -> Result<Setup> {
        let mut setup = if self.repr {
            let alpha = parse_ratio(self.alpha.as_deref().unwrap_or("1/2"))?;
            let groups = self
                .groups
                .as_ref()
                .ok_or_else(|| genlimit::Error::Parameter("--repr needs --groups".into()))?;
            let text = std::fs::read_to_string(groups).map_err(|source| genlimit::Error::Io {
                path: groups.display().to_string(),
                source,
            })?;
            Setup::repr(GroupPartition::from_json(&text, &c.registry)?, alpha)
        } else if self.noisy {
            Setup::noisy(self.levels)
        } else {
            Setup::plain()
        };
        setup.schedule = ScheduleChoice::parse(&self.schedule)?;
        Ok(setup)
    }
}

fn print_table(c: &Collection, t: &ComplexityTable) {
    println!(
        "{:<6} {:<14} {:>6} {:>8}  witness",
        "cell", "language", "level", "m*"
    );
    for (id, e) in t.entries.iter().enumerate() {
        let level = e.cell.level.map_or("-".to_string(), |l| l.to_string());
        let wit: Vec<String> = t
            .witness_languages(id)
            .iter()
            .map(|&w| c.name(w).to_string())
            .collect();
        println!(
            "{:<6} {:<14} {:>6} {:>8}  {}",
            id + 1,
            c.name(e.cell.index),
            level,
            e.m_star,
            if wit.is_empty() {
                "()".into()
            } else {
                wit.join(",")
            }
        );
    }
    let order: Vec<String> = t
        .ordering
        .iter()
        .map(|&id| {
            let cell = t.entries[id].cell;
            match cell.level {
                Some(l) => format!("{}@{l}", c.name(cell.index)),
                None => c.name(cell.index).to_string(),
            }
        })
        .collect();
    println!("ordering: {}", order.join(" "));
}

fn print_sim(c: &Collection, r: &SimReport) {
    let bound = r.bound.map_or("-".into(), |b| b.to_string());
    println!(
        "{} target {} (noise {}): firstStable {} bound {} horizon {} -> {}",
        r.generator,
        c.name(r.target),
        r.noise_level,
        r.first_stable,
        bound,
        r.horizon,
        if r.passed { "PASS" } else { "FAIL" }
    );
    if let Some(m) = r.linf_max() {
        println!("  max group distance {}", ratio_text(m));
    }
    if let Some(s) = r.steps.iter().rev().find(|s| !s.valid) {
        let out = match &s.output {
            StepOutput::Token(t) => summarize_tokens(std::slice::from_ref(t), &c.registry),
            StepOutput::Distribution(d) => {
                summarize_tokens(&d.support().copied().collect::<Vec<_>>(), &c.registry)
            }
        };
        println!("  last invalid output at |S_t| = {}: {}", s.size, out);
    }
}

fn run(cmd: Command) -> Result<bool> {
    let (args, kind) = match &cmd {
        Command::Complexity(a) => (a, 0),
        Command::Simulate(a) => (a, 1),
        Command::Compare(a) => (a, 2),
        Command::Verify(a) => (a, 3),
    };
    let c = args.load()?;
    let setup = args.setup(&c)?;
    let mut doc = ReportDoc::default();
    let ok = match kind {
        0 => {
            let table = match (setup.setting, args.cells) {
                (Setting::Noisy, Some(n)) => {
                    let mut b = NoisyBuilder::new(&c);
                    b.extend_to_cells(n)?;
                    b.into_table()
                }
                _ => build_table(&c, &setup)?,
            };
            if !args.json {
                print_table(&c, &table);
            }
            doc.table = Some(table.to_doc(&c));
            true
        }
        1 => {
            let opts = SimulateOptions {
                targets: args
                    .target
                    .map(|t| vec![t.saturating_sub(1)])
                    .unwrap_or_default(),
                attack: AttackKind::parse(&args.attack)?,
                horizon: args.horizon,
                generator: match args.generator {
                    GenArg::Optimal => GeneratorKind::Optimal,
                    GenArg::Cp => GeneratorKind::Cp,
                },
            };
            let (table, reports) = cmd_simulate(&c, &setup, &opts)?;
            if !args.json {
                for r in &reports {
                    print_sim(&c, r);
                }
            }
            doc.table = Some(table.to_doc(&c));
            doc.sim_reports = reports.iter().map(|r| r.to_doc(&c)).collect();
            reports.iter().all(|r| r.passed)
        }
        2 => {
            let report = cmd_compare(&c)?;
            if !args.json {
                for s in &report.sequences {
                    println!("{:<14} {:?}", s.name, s.times);
                }
                for (a, b, v) in &report.verdicts {
                    println!("{a} vs {b}: {v:?}");
                }
                let r = &report.reorder;
                println!(
                    "m*+1 vs {} reorderings: {} dominates, {} incomparable, {} equal, {} dominated",
                    r.orderings, r.dominates, r.incomparable, r.equal, r.dominated_by
                );
            }
            doc.verdicts = report.verdict_docs();
            report.optimal_undominated()
        }
        _ => {
            let mut report = cmd_verify(&c, &setup)?;
            if args.mutation {
                report.results.extend(mutation_self_test(&c, &setup)?);
            }
            if !args.json {
                for r in &report.results {
                    let status = if r.passed { "pass" } else { "FAIL" };
                    println!("{status:<5} {:<28} {}", r.name, r.detail);
                }
            }
            doc.invariant_results = report.results.clone();
            report.passed()
        }
    };
    if args.json {
        println!("{}", doc.to_json()?);
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
