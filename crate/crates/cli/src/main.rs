use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use hquery::worlds::hanoi::{self, Strategy};
use hquery::worlds::WorldSpec;
use hquery::{Error, Interpreter, DEFAULT_MAX_NODES};

#[derive(Parser)]
#[command(name = "hquery", version, about = "Run hierarchical query scripts against simulated worlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a script and print its result.
    Run {
        file: PathBuf,
        /// none | hanoi | gridworld:<map> | particles:<seed>,<n>
        #[arg(long, default_value = "none")]
        world: String,
        /// Report wall time on stderr.
        #[arg(long)]
        time: bool,
        /// Search-node budget per hierarchical query.
        #[arg(long, env = "HQUERY_MAX_NODES", default_value_t = DEFAULT_MAX_NODES)]
        max_nodes: u64,
        /// Variables forming the recursion state key, comma separated.
        #[arg(long, value_delimiter = ',')]
        state_keys: Option<Vec<String>>,
    },
    /// Interactive session; statements end with `;`.
    Repl {
        #[arg(long, default_value = "none")]
        world: String,
        #[arg(long, env = "HQUERY_MAX_NODES", default_value_t = DEFAULT_MAX_NODES)]
        max_nodes: u64,
    },
    /// Compare search strategies on a benchmark world.
    Bench {
        #[command(subcommand)]
        world: BenchWorld,
    },
}

#[derive(Subcommand)]
enum BenchWorld {
    Hanoi {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=6))]
        disks: u8,
        #[arg(long, value_delimiter = ',', default_value = "default,nocycle,unique,memorize")]
        strategies: Vec<String>,
    },
}

fn setup(world: &str, max_nodes: u64) -> Result<Interpreter, String> {
    let spec: WorldSpec = world.parse().map_err(|e| format!("{e}"))?;
    let mut interp = Interpreter::new();
    spec.attach(&mut interp).map_err(|e| format!("{e}"))?;
    interp.options_mut().max_nodes = max_nodes;
    Ok(interp)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Runtime(_) => 2,
        _ => 1,
    }
}

fn run(file: PathBuf, world: &str, time: bool, max_nodes: u64, state_keys: Option<Vec<String>>) -> ExitCode {
    let mut interp = match setup(world, max_nodes) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    interp.options_mut().state_keys = state_keys;
    let source = match std::fs::read_to_string(&file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return ExitCode::from(1);
        }
    };
    let started = Instant::now();
    let result = interp.eval(&source);
    if time {
        eprintln!("# time: {:.3}s", started.elapsed().as_secs_f64());
    }
    match result {
        Ok(v) => {
            println!("{}", v.serialize());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            ExitCode::from(exit_code(&e))
        }
    }
}

fn repl(world: &str, max_nodes: u64) -> ExitCode {
    let mut interp = match setup(world, max_nodes) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let interactive = io::stdin().is_terminal();
    let prompt = |buf: &str| {
        if interactive {
            eprint!("{}", if buf.is_empty() { "hq> " } else { "... " });
            let _ = io::stderr().flush();
        }
    };
    let mut timing = false;
    let mut buf = String::new();
    prompt(&buf);
    for line in io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        if buf.is_empty() {
            match line.trim() {
                "" => {
                    prompt(&buf);
                    continue;
                }
                ":quit" | ":q" => return ExitCode::SUCCESS,
                ":time on" => timing = true,
                ":time off" => timing = false,
                cmd if cmd.starts_with(':') => eprintln!("unknown command {cmd}"),
                _ => {}
            }
            if line.trim_start().starts_with(':') {
                prompt(&buf);
                continue;
            }
        }
        buf.push_str(&line);
        buf.push('\n');
        if buf.trim_end().ends_with(';') {
            let started = Instant::now();
            match interp.eval(&buf) {
                Ok(v) => println!("{}", v.serialize()),
                Err(e) => eprintln!("error: {e}"),
            }
            if timing {
                eprintln!("# time: {:.3}s", started.elapsed().as_secs_f64());
            }
            let _ = io::stdout().flush();
            buf.clear();
        }
        prompt(&buf);
    }
    ExitCode::SUCCESS
}

fn bench(disks: usize, strategies: &[String]) -> ExitCode {
    let mut selected = Vec::new();
    for name in strategies {
        match Strategy::parse(name) {
            Some(s) => selected.push(s),
            None => {
                eprintln!("error: unknown strategy `{name}`");
                return ExitCode::from(1);
            }
        }
    }
    if disks <= 3 && !selected.contains(&Strategy::Vanilla) {
        selected.insert(0, Strategy::Vanilla);
    }
    selected.retain(|s| *s != Strategy::Vanilla || disks <= 3);

    println!("{:<10} {:>10} {:>12} {:>12} {:>8}", "strategy", "time", "expansions", "rows", "results");
    for strategy in selected {
        let mut interp = Interpreter::new();
        if let Err(e) = hanoi::attach(&mut interp) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        let started = Instant::now();
        let result = interp.eval(&hanoi::script(disks, strategy));
        let secs = started.elapsed().as_secs_f64();
        let v = match result {
            Ok(v) => v,
            Err(e) => {
                eprintln!("{}: {e}", strategy.name());
                return ExitCode::from(exit_code(&e));
            }
        };
        let stats = interp.stats();
        let results = v.as_list().map_or(1, |l| l.len());
        println!(
            "{:<10} {:>9.3}s {:>12} {:>12} {:>8}",
            strategy.name(),
            secs,
            stats.expansions,
            stats.rows,
            results
        );
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            file,
            world,
            time,
            max_nodes,
            state_keys,
        } => run(file, &world, time, max_nodes, state_keys),
        Command::Repl { world, max_nodes } => repl(&world, max_nodes),
        Command::Bench {
            world: BenchWorld::Hanoi { disks, strategies },
        } => bench(disks as usize, &strategies),
    }
}
