use clap::{Parser, Subcommand};
use hopcut::clustering::{build_cover, decompose, DecomposeParams, WellSeparatedClustering};
use hopcut::decomp::{expander_decomposition, DecompositionParams, SamplerConfig};
use hopcut::game::{derive_config, parse_overrides, player_by_name, run_game, GameTranscript, PLAYER_NAMES};
use hopcut::graph::{parse_edge_list, write_edge_list, MultiGraph};
use hopcut::harness::{krv_reduce, run_warmup, verify_transcript, BitBisection, CutStrategy, RandomProjection};
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hopcut", version, about = "Cut-matching game for constant-hop expanders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play the game and write its transcript.
    Run {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value = "random")]
        player: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Parameter override, KEY=VALUE (repeatable).
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Transcript path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the final graph as an edge list.
        #[arg(long)]
        graph_out: Option<PathBuf>,
    },
    /// Re-check a transcript against its final graph.
    Verify {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Build a well-separated clustering cover of a graph.
    Cover {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        h_sep: usize,
        #[arg(long)]
        h_diam: usize,
        #[arg(long)]
        load_max: Option<usize>,
    },
    /// Split and merge a cover (JSON from `cover`) into groups of blocks.
    Decompose {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 0.5)]
        c_prime: f64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        k_prime: u64,
    },
    /// Hop-constrained expander decomposition of a graph.
    Expander {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        h: usize,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reduce a cut strategy to a sparse cut or an embedding.
    Krv {
        #[arg(long, conflicts_with_all = ["barbell", "hypercube"])]
        graph: Option<PathBuf>,
        /// Two cliques of this size joined by one edge.
        #[arg(long)]
        barbell: Option<usize>,
        /// Hypercube of this dimension.
        #[arg(long)]
        hypercube: Option<u32>,
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value = "bits", value_parser = ["bits", "projection"])]
        strategy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// The idealized digit-matching instance.
    Warmup {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Fail if more iterations than this are needed.
        #[arg(long)]
        t: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Check(String),
    Internal(String),
}

type Outcome = Result<(), Failure>;

fn paint(text: &str, code: &str) -> String {
    if std::env::var_os("NO_COLOR").is_none() && std::io::stderr().is_terminal() {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<MultiGraph, Failure> {
    parse_edge_list(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn run(
    n: usize,
    epsilon: f64,
    player: &str,
    seed: u64,
    overrides: &[String],
    out: Option<&Path>,
    graph_out: Option<&Path>,
) -> Outcome {
    let overrides = parse_overrides(overrides.iter().map(String::as_str)).map_err(|e| Failure::Usage(e.to_string()))?;
    let (cfg, warnings) = derive_config(n, epsilon, &overrides, seed).map_err(|e| Failure::Usage(e.to_string()))?;
    for w in &warnings {
        eprintln!("{} {w}", paint("warning:", "33"));
    }
    let mut p = player_by_name(player, seed).ok_or_else(|| {
        Failure::Usage(format!("unknown player {player:?}; expected one of {PLAYER_NAMES:?}"))
    })?;
    let (graph, transcript, error) = match run_game(&cfg, warnings, p.as_mut()) {
        Ok(r) => (r.graph, r.transcript, None),
        Err(f) => (f.graph, f.transcript, Some(f.error)),
    };
    let text = transcript.to_json();
    match out {
        Some(path) => write(path, &text)?,
        None => emit(&text),
    }
    if let Some(path) = graph_out {
        write(path, &write_edge_list(&graph))?;
    }
    match error {
        None => {
            if let Some(f) = &transcript.final_phase {
                eprintln!(
                    "{} b_used={} k''={} max_degree={} diameter={:?} r_total={}",
                    paint("done", "32"),
                    f.b_used,
                    f.k_double_prime,
                    f.delta_measured,
                    f.diameter,
                    f.r_total
                );
            }
            Ok(())
        }
        Some(e) => Err(Failure::Check(format!("game stopped: {e}"))),
    }
}

fn verify(transcript: &Path, graph: &Path) -> Outcome {
    let t = GameTranscript::from_json(&read(transcript)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", transcript.display())))?;
    let g = load_graph(graph)?;
    let violations = verify_transcript(&t, &g);
    if violations.is_empty() {
        eprintln!("{} all invariants hold", paint("ok", "32"));
        return Ok(());
    }
    for v in &violations {
        eprintln!("{} {v}", paint("violated", "31"));
    }
    Err(Failure::Check(format!("{} invariant(s) violated", violations.len())))
}

fn krv(
    graph: Option<&Path>,
    barbell: Option<usize>,
    hypercube: Option<u32>,
    phi: f64,
    strategy: &str,
    seed: u64,
    rounds: Option<usize>,
) -> Outcome {
    let g = match (graph, barbell, hypercube) {
        (Some(p), None, None) => load_graph(p)?,
        (None, Some(k), None) => MultiGraph::barbell(k),
        (None, None, Some(d)) => MultiGraph::hypercube(d),
        _ => return Err(Failure::Usage("give exactly one of --graph, --barbell, --hypercube".into())),
    };
    let mut s: Box<dyn CutStrategy> = match strategy {
        "projection" => Box::new(RandomProjection::new(seed)),
        _ => Box::new(BitBisection::default()),
    };
    let report = krv_reduce(&g, phi, s.as_mut(), rounds).map_err(|e| Failure::Check(e.to_string()))?;
    if report.padded {
        eprintln!("{} odd vertex count, padded with one isolated vertex", paint("note:", "33"));
    }
    emit(&json(&report));
    Ok(())
}

fn warmup(n: usize, k: usize, t: Option<usize>) -> Outcome {
    let report = run_warmup(n, k).map_err(|e| Failure::Usage(e.to_string()))?;
    for it in &report.iterations {
        emit(&format!(
            "iteration {}: H {:.9} -> {:.9}, delta {:.9} (n ln k = {:.9})\n",
            it.index, it.entropy_before, it.entropy_after, it.delta, it.expected
        ));
    }
    emit(&format!(
        "terminated after {} iterations, H = {:.9}, n ln n = {:.9}\n",
        report.iterations.len(),
        report.final_entropy,
        report.entropy_cap
    ));
    match t {
        Some(t) if report.iterations.len() > t => Err(Failure::Check(format!(
            "needed {} iterations, more than t = {t}",
            report.iterations.len()
        ))),
        _ => Ok(()),
    }
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Run {
            n,
            epsilon,
            player,
            seed,
            overrides,
            out,
            graph_out,
        } => run(n, epsilon, &player, seed, &overrides, out.as_deref(), graph_out.as_deref()),
        Command::Verify { transcript, graph } => verify(&transcript, &graph),
        Command::Cover {
            graph,
            h_sep,
            h_diam,
            load_max,
        } => {
            let g = load_graph(&graph)?;
            let cover = build_cover(&g, h_sep, h_diam, load_max.unwrap_or(g.n().max(1)))
                .map_err(|e| Failure::Check(e.to_string()))?;
            emit(&json(&cover));
            Ok(())
        }
        Command::Decompose {
            cover,
            c,
            c_prime,
            k,
            k_prime,
        } => {
            let nc: WellSeparatedClustering = serde_json::from_str(&read(&cover)?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", cover.display())))?;
            let params = DecomposeParams { c, c_prime, k, k_prime };
            let d = decompose(&nc, &params).map_err(|e| Failure::Check(e.to_string()))?;
            emit(&json(&d));
            Ok(())
        }
        Command::Expander {
            graph,
            h,
            s,
            phi,
            kappa,
            seed,
        } => {
            let g = load_graph(&graph)?;
            let params = DecompositionParams { h, s, phi, kappa };
            let sampler = SamplerConfig {
                seed,
                ..SamplerConfig::default()
            };
            let cut = expander_decomposition(&g, &params, &sampler).map_err(|e| Failure::Check(e.to_string()))?;
            emit(&json(&cut));
            Ok(())
        }
        Command::Krv {
            graph,
            barbell,
            hypercube,
            phi,
            strategy,
            seed,
            rounds,
        } => krv(graph.as_deref(), barbell, hypercube, phi, &strategy, seed, rounds),
        Command::Warmup { n, k, t } => warmup(n, k, t),
    }
}

/// Writes to stdout; a closed pipe ends the process quietly.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("cannot write to stdout: {e}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| dispatch(cli))
        .unwrap_or_else(|_| Err(Failure::Internal("internal invariant violated".into())));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("{} {m}", paint("error:", "31"));
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("{} {m}", paint("failed:", "31"));
            ExitCode::from(1)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("{} {m}", paint("bug:", "31"));
            ExitCode::from(3)
        }
    }
}
