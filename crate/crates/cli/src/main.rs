use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use skp_core::compliance::{
    check_skp_graph, check_strong, derive_with, DeriveOptions, DerivationTree, Verdict, Witness, WitnessKind,
    WitnessStep,
};
use skp_core::preorder::subbehaviour;
use skp_core::product::sync_traces;
use skp_core::syntax::{render, Generator, SessionBehaviour};
use skp_core::{behaviour, Limits};
use skp_registry::Registry;

/// Contract checking for session behaviours with skippable server outputs.
#[derive(Parser)]
#[command(name = "skp", version)]
struct Cli {
    /// Print machine-readable JSON instead of the text report.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on explored configurations.
    #[arg(long, global = true, default_value_t = 100_000)]
    max_nodes: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Skp,
    Strong,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Graph,
    Derive,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a client complies with a server.
    Check {
        #[arg(long)]
        client: PathBuf,
        #[arg(long)]
        server: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Skp)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Engine::Graph)]
        engine: Engine,
        /// Write the derivation tree as JSON to this file.
        #[arg(long)]
        emit_derivation: Option<PathBuf>,
        /// Print the full counterexample path.
        #[arg(long)]
        witness: bool,
    },
    /// Decide whether every client of one server is a client of another.
    Subtype {
        #[arg(long)]
        sub: PathBuf,
        #[arg(long = "super")]
        sup: PathBuf,
    },
    /// Print the dual behaviour.
    Dual { file: PathBuf },
    /// Print the canonical form.
    Normalize { file: PathBuf },
    /// Print the synchronisation traces of a pair up to a length bound.
    Simulate {
        #[arg(long)]
        client: PathBuf,
        #[arg(long)]
        server: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_steps: usize,
    },
    /// Print random behaviours.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum nesting depth.
        #[arg(long, default_value_t = 4)]
        size: usize,
        /// Number of action names to draw from.
        #[arg(long, default_value_t = 3)]
        alphabet: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Contract repository.
    #[command(subcommand)]
    Registry(RegistryCommand),
}

#[derive(Subcommand)]
enum RegistryCommand {
    /// Serve the repository over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        store: PathBuf,
    },
    /// Register a server contract.
    Add {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        name: String,
        file: PathBuf,
    },
    /// List stored servers a client complies with.
    Query {
        #[arg(long)]
        store: PathBuf,
        file: PathBuf,
        /// Check every record instead of using the preorder index.
        #[arg(long)]
        scan: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<SessionBehaviour> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    behaviour(&text).with_context(|| format!("in {}", path.display()))
}

fn verdict_code(positive: bool) -> ExitCode {
    if positive {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let limits = Limits { max_nodes: cli.max_nodes };
    match cli.command {
        Command::Check { client, server, mode, engine, emit_derivation, witness } => {
            let (c, s) = (read(&client)?, read(&server)?);
            check(&c, &s, mode, engine, emit_derivation.as_deref(), witness, cli.json, limits)
        }
        Command::Subtype { sub, sup } => {
            let v = subbehaviour(&read(&sub)?, &read(&sup)?, limits)?;
            if cli.json {
                println!("{}", v.to_json());
            } else if let Some(c) = &v.counterexample {
                println!("not a subbehaviour");
                println!("counterexample client: {}", render(c));
            } else {
                println!("subbehaviour");
            }
            Ok(verdict_code(v.is_sub()))
        }
        Command::Dual { file } => {
            print_term(&read(&file)?.dual(), cli.json);
            Ok(ExitCode::SUCCESS)
        }
        Command::Normalize { file } => {
            print_term(&read(&file)?, cli.json);
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { client, server, max_steps } => {
            let traces = sync_traces(&read(&client)?, &read(&server)?, max_steps)?;
            if cli.json {
                let list: Vec<Value> = traces
                    .iter()
                    .map(|t| json!({"trace": t.to_string(), "tick": t.tick, "truncated": t.truncated}))
                    .collect();
                println!("{}", Value::Array(list));
            } else {
                for t in &traces {
                    println!("{t}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen { seed, size, alphabet, count } => {
            if alphabet == 0 || size == 0 {
                bail!("--size and --alphabet must be positive");
            }
            let mut g = Generator::new(seed);
            let terms: Vec<String> = (0..count).map(|_| render(&g.behaviour(size, alphabet))).collect();
            if cli.json {
                println!("{}", json!(terms));
            } else {
                for t in terms {
                    println!("{t}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Registry(cmd) => registry(cmd, cli.json, limits),
    }
}

fn print_term(t: &SessionBehaviour, as_json: bool) {
    if as_json {
        println!("{}", json!({"behaviour": render(t), "size": t.size()}));
    } else {
        println!("{}", render(t));
    }
}

#[allow(clippy::too_many_arguments)]
fn check(
    client: &SessionBehaviour,
    server: &SessionBehaviour,
    mode: Mode,
    engine: Engine,
    emit: Option<&Path>,
    show_witness: bool,
    as_json: bool,
    limits: Limits,
) -> Result<ExitCode> {
    if mode == Mode::Strong && (engine != Engine::Graph || emit.is_some()) {
        bail!("the derivation engine decides skp-compliance only");
    }
    let tree = if engine != Engine::Graph || emit.is_some() {
        let opts = DeriveOptions { limits: Limits { max_nodes: limits.max_nodes.max(1_000_000) }, ..Default::default() };
        Some(derive_with(client, server, opts)?)
    } else {
        None
    };
    if let (Some(path), Some(t)) = (emit, &tree) {
        fs::write(path, serde_json::to_string_pretty(&t.to_json())?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let graph = match (mode, engine) {
        (Mode::Strong, _) => Some(check_strong(client, server, limits)?),
        (Mode::Skp, Engine::Graph | Engine::Both) => Some(check_skp_graph(client, server, limits)?),
        (Mode::Skp, Engine::Derive) => None,
    };

    if let (Some(v), Some(t)) = (&graph, &tree) {
        if engine == Engine::Both && v.is_compliant() != t.succeeded() {
            bail!(
                "engines disagree: graph says {}, derivation {}",
                if v.is_compliant() { "compliant" } else { "not compliant" },
                if t.succeeded() { "succeeds" } else { "fails" }
            );
        }
    }

    let positive = match (&graph, &tree) {
        (Some(v), _) => v.is_compliant(),
        (None, Some(t)) => t.succeeded(),
        (None, None) => unreachable!("some engine runs"),
    };
    if as_json {
        let mut out = match &graph {
            Some(v) => {
                let mut v = v.clone();
                v.stats.rules = tree.as_ref().map_or(0, DerivationTree::size);
                v.to_json()
            }
            None => json!({"result": if positive { "compliant" } else { "noncompliant" }}),
        };
        if let Some(t) = &tree {
            out["derivation"] = derivation_summary(t);
        }
        println!("{out}");
    } else {
        println!("{}", if positive { "compliant" } else { "not compliant" });
        if let Some(v) = &graph {
            report_graph(v, show_witness);
        }
        if let Some(t) = &tree {
            report_tree(t);
        }
    }
    Ok(verdict_code(positive))
}

fn derivation_summary(t: &DerivationTree) -> Value {
    let failure = t.first_failure().map(|f| {
        json!({
            "failure": f.failure.map(|x| x.name()),
            "client": render(&f.goal.client),
            "server": render(&f.goal.server),
        })
    });
    json!({"succeeded": t.succeeded(), "rules": t.size(), "first_failure": failure})
}

fn report_graph(v: &Verdict, show_witness: bool) {
    println!("product graph: {} configurations, {} moves", v.stats.nodes, v.stats.edges);
    let Some(w) = &v.witness else { return };
    match w.kind {
        WitnessKind::StuckTrace => println!("counterexample: deadlock with unfinished client"),
        WitnessKind::SkpLasso => println!("counterexample: loop that only skips"),
    }
    println!("visible: {}", w.visible().join(" "));
    if show_witness {
        print_witness(w);
    }
}

fn print_witness(w: &Witness) {
    let line = |s: &WitnessStep| {
        println!("  [{}] {}", s.from, w.nodes[&s.from]);
        println!("      --{}-->", s.label);
    };
    w.stem.iter().for_each(line);
    let end = w.stem.last().map_or(0, |s| s.to);
    match w.kind {
        WitnessKind::StuckTrace => println!("  [{end}] {}  (stuck)", w.nodes[&end]),
        WitnessKind::SkpLasso => {
            println!("  cycle:");
            w.cycle.iter().for_each(line);
            println!("  [{end}] {}  (cycle start)", w.nodes[&end]);
        }
    }
}

fn report_tree(t: &DerivationTree) {
    println!("derivation: {} rule applications", t.size());
    if let Some(f) = t.first_failure() {
        println!(
            "derivation fails ({}) at {} ⊣ {}",
            f.failure.map_or("?", |x| x.name()),
            render(&f.goal.client),
            render(&f.goal.server)
        );
    }
}

fn registry(cmd: RegistryCommand, as_json: bool, limits: Limits) -> Result<ExitCode> {
    match cmd {
        RegistryCommand::Serve { port, store } => {
            let reg = Arc::new(Registry::open(&store, limits)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let addr = SocketAddr::from(([127, 0, 0, 1], port));
                let listener = tokio::net::TcpListener::bind(addr).await?;
                eprintln!("listening on {}", listener.local_addr()?);
                axum::serve(listener, skp_registry::router(reg))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                Ok::<_, anyhow::Error>(())
            })?;
            Ok(ExitCode::SUCCESS)
        }
        RegistryCommand::Add { store, name, file } => {
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let reg = Registry::open(&store, limits)?;
            let record = reg.register(&name, &text)?;
            if as_json {
                println!("{}", json!({"id": record.id}));
            } else {
                println!("registered {} as id {}", record.name, record.id);
            }
            Ok(ExitCode::SUCCESS)
        }
        RegistryCommand::Query { store, file, scan } => {
            let client = read(&file)?;
            let state = Registry::open(&store, limits)?.snapshot();
            let out = if scan { state.scan(&client)? } else { state.query(&client)? };
            if as_json {
                let matches: Vec<Value> = out.matches.iter().map(|m| json!({"id": m.id, "name": m.name})).collect();
                println!("{}", json!({"matches": matches, "checks": out.checks}));
            } else {
                for m in &out.matches {
                    println!("{}\t{}\t{}", m.id, m.name, render(&m.contract));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
