use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rmrs_core::rm::{compile_to_cfr, compile_to_cr, with_input, DEFAULT_BUDGET};
use rmrs_core::{
    bounded_equiv, cfr_to_cr, interpret_rm, or_to_pr, parse_model, parse_rm, parse_run,
    serialize_model, Element, Explorer, ModelDocument, RegisterProgram, Regulation, RunVerdict,
    Side, DEFAULT_MAX_CONFIGS,
};

/// Regulated multiset rewriting toolkit.
#[derive(Parser)]
#[command(name = "rmrs", version)]
struct Cli {
    /// Cap on configurations materialized per exploration level.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_CONFIGS)]
    max_configs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model and validate its regulation.
    Check {
        model: PathBuf,
        /// Print the Büchi automaton of a regular model.
        #[arg(long)]
        dump_automaton: bool,
    },
    /// Validate a run file against a model.
    Run { model: PathBuf, run: PathBuf },
    /// Print every run prefix of exactly `depth` steps.
    Enumerate {
        model: PathBuf,
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        view: View,
    },
    /// Translate a model into another regulation class.
    Translate {
        model: PathBuf,
        #[command(flatten)]
        direction: Direction,
    },
    /// Compare the state sequences of two models up to a depth.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        depth: usize,
    },
    /// Register machine programs.
    #[command(subcommand)]
    Rm(RmCommand),
    /// Take a seeded random walk through a model.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct View {
    /// Print only the state sequence.
    #[arg(long)]
    states: bool,
    /// Print only the rule labels.
    #[arg(long)]
    labels: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Direction {
    /// Ordered to programmed.
    #[arg(long)]
    or2pr: bool,
    /// Concurrent-free to conditional.
    #[arg(long)]
    cfr2cr: bool,
}

#[derive(Subcommand)]
enum RmCommand {
    /// Interpret a program and print the final value of c2.
    Run {
        program: PathBuf,
        #[arg(long)]
        input: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Compile a program into a regulated model.
    Compile {
        program: PathBuf,
        #[arg(long, value_enum)]
        target: Target,
        /// Initial value of c1 to place in the model.
        #[arg(long)]
        input: Option<u32>,
    },
    /// Compile, explore and print the terminal values of c2.
    Exec {
        program: PathBuf,
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long)]
        input: u32,
        #[arg(long, default_value_t = 10_000)]
        depth: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Cr,
    Cfr,
}

enum Outcome {
    Ok,
    Negative,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_unchecked(path: &Path) -> Result<ModelDocument> {
    let text = read(path)?;
    parse_model(&text).with_context(|| format!("{}", path.display()))
}

/// Parses and validates; any diagnostic is an error.
fn load(path: &Path) -> Result<ModelDocument> {
    let doc = load_unchecked(path)?;
    let diags = doc.regulation.validate(&doc.system);
    if let Some(first) = diags.first() {
        for d in &diags[1..] {
            eprintln!("{}: {d}", path.display());
        }
        bail!("{}: {first}", path.display());
    }
    Ok(doc)
}

fn load_program(path: &Path) -> Result<RegisterProgram> {
    parse_rm(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cap = cli.max_configs;
    let mut out = io::stdout().lock();
    match &cli.command {
        Command::Check {
            model,
            dump_automaton,
        } => {
            let doc = load_unchecked(model)?;
            let diags = doc.regulation.validate(&doc.system);
            let at = doc
                .span("regulation")
                .map(|s| format!(":{}", s.line))
                .unwrap_or_default();
            for d in &diags {
                eprintln!("{}{at}: {d}", model.display());
            }
            if !diags.is_empty() {
                bail!("{} regulation problem(s)", diags.len());
            }
            if let Regulation::Regular(lang) = &doc.regulation {
                if *dump_automaton {
                    write!(out, "{}", lang.automaton().dump())?;
                }
                let e = Explorer::new(&doc.system, &doc.regulation).with_max_configs(cap);
                for w in e.unrealized_viable_prefixes(4)? {
                    let labels: Vec<&str> = w.iter().map(|r| r.as_str()).collect();
                    eprintln!(
                        "warning: language allows prefix `{}` that no run realizes",
                        labels.join(" ")
                    );
                }
            }
            writeln!(out, "ok")?;
            Ok(Outcome::Ok)
        }
        Command::Run { model, run } => {
            let doc = load(model)?;
            let rf = parse_run(&read(run)?, &doc.system)
                .with_context(|| format!("{}", run.display()))?;
            let e = Explorer::new(&doc.system, &doc.regulation).with_max_configs(cap);
            let verdict = e.validate_run(&rf.labels, rf.omega_eps_tail)?;
            writeln!(out, "{verdict}")?;
            Ok(match verdict {
                RunVerdict::Valid => Outcome::Ok,
                RunVerdict::Invalid { .. } => Outcome::Negative,
            })
        }
        Command::Enumerate { model, depth, view } => {
            let doc = load(model)?;
            let e = Explorer::new(&doc.system, &doc.regulation).with_max_configs(cap);
            for p in e.enumerate(*depth)? {
                let line = if view.states {
                    p.render_states()
                } else if view.labels {
                    p.render_labels()
                } else {
                    p.render()
                };
                writeln!(out, "{line}")?;
            }
            Ok(Outcome::Ok)
        }
        Command::Translate { model, direction } => {
            let doc = load(model)?;
            let translated = match (&doc.regulation, direction.or2pr) {
                (Regulation::Ordered(order), true) => {
                    let (s, succ) = or_to_pr(&doc.system, order);
                    ModelDocument::new(s, Regulation::Programmed(succ))
                }
                (Regulation::ConcurrentFree(rel), false) => {
                    let t = cfr_to_cr(&doc.system, rel);
                    for r in &t.removed {
                        eprintln!("removed rule {r}");
                    }
                    ModelDocument::new(t.system, Regulation::Conditional(t.contexts))
                }
                (z, _) => bail!(
                    "{}: --{} expects regulation `{}`, found `{}`",
                    model.display(),
                    if direction.or2pr { "or2pr" } else { "cfr2cr" },
                    if direction.or2pr {
                        "ordered"
                    } else {
                        "concurrent-free"
                    },
                    z.class().keyword()
                ),
            };
            write!(out, "{}", serialize_model(&translated))?;
            Ok(Outcome::Ok)
        }
        Command::Equiv { a, b, depth } => {
            let (da, db) = (load(a)?, load(b)?);
            let ea = Explorer::new(&da.system, &da.regulation).with_max_configs(cap);
            let eb = Explorer::new(&db.system, &db.regulation).with_max_configs(cap);
            let res = bounded_equiv(&ea, &eb, *depth)?;
            if res.equal {
                writeln!(out, "equal up to depth {depth}")?;
                return Ok(Outcome::Ok);
            }
            writeln!(out, "not equal up to depth {depth}")?;
            if let Some(w) = res.witness {
                let only = match w.side {
                    Side::A => a,
                    Side::B => b,
                };
                let labels: Vec<&str> = w.labels.iter().map(|r| r.as_str()).collect();
                writeln!(out, "only in {}: {}", only.display(), labels.join(" "))?;
                writeln!(
                    out,
                    "states: {}",
                    rmrs_core::rewriting::render_state_sequence(&w.states)
                )?;
            }
            Ok(Outcome::Negative)
        }
        Command::Rm(cmd) => rm(cmd, cap, &mut out),
        Command::Simulate { model, steps, seed } => {
            let doc = load(model)?;
            let e = Explorer::new(&doc.system, &doc.regulation).with_max_configs(cap);
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let walk = e.random_walk(*steps, &mut rng)?;
            writeln!(out, "0 {}", walk.states[0])?;
            for (i, (label, state)) in walk.labels.iter().zip(&walk.states[1..]).enumerate() {
                writeln!(out, "{} {label} {state}", i + 1)?;
            }
            Ok(Outcome::Ok)
        }
    }
}

fn compile(p: &RegisterProgram, target: Target) -> (rmrs_core::System, Regulation) {
    match target {
        Target::Cr => compile_to_cr(p),
        Target::Cfr => compile_to_cfr(p),
    }
}

fn rm(cmd: &RmCommand, cap: usize, out: &mut impl Write) -> Result<Outcome> {
    match cmd {
        RmCommand::Run {
            program,
            input,
            budget,
        } => {
            let p = load_program(program)?;
            writeln!(out, "{}", interpret_rm(&p, *input, *budget)?)?;
        }
        RmCommand::Compile {
            program,
            target,
            input,
        } => {
            let p = load_program(program)?;
            let (mut s, z) = compile(&p, *target);
            if let Some(n) = input {
                s = with_input(&s, *n);
            }
            write!(out, "{}", serialize_model(&ModelDocument::new(s, z)))?;
        }
        RmCommand::Exec {
            program,
            target,
            input,
            depth,
        } => {
            let p = load_program(program)?;
            let (s, z) = compile(&p, *target);
            let s = with_input(&s, *input);
            let e = Explorer::new(&s, &z).with_max_configs(cap);
            let c2 = Element::new("c2")?;
            let t = e.terminal_outputs(&c2, *depth)?;
            if !t.all_terminated {
                bail!("program did not terminate within {depth} steps");
            }
            for v in &t.values {
                writeln!(out, "c2={v}")?;
            }
            let mut c = e.initial();
            for step in 0..*depth {
                if e.eps_absorbing(&c)? {
                    break;
                }
                let app = e.applicable(&c)?;
                if app.len() != 1 {
                    writeln!(out, "nondeterministic at step {}", step + 1)?;
                    return Ok(Outcome::Negative);
                }
                c = e.step(&c, &app[0])?;
            }
            writeln!(out, "deterministic")?;
        }
    }
    Ok(Outcome::Ok)
}
