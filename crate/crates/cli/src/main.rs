//! Command-line front end: counting, enumeration, feasibility search,
//! branch-by-branch simulation, and security audits, all as JSON reports on
//! standard output. Exit code 0 on success, 2 on validation errors (with a
//! diagnostic on standard error). Identical inputs and seeds produce
//! byte-identical reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qis::channels::{self, ChannelDescriptor};
use qis::counting::{crosscheck, max_protocols, CountQuery, CrossCheck};
use qis::feasibility::{
    audit_security, dealer_minimum_filter, enumerate_assignments, search, survey, BasisLibrary,
    SearchConfig, AUDIT_SEED,
};
use qis::protocol::format::load_protocol;
use qis::protocol::{classical_cost, run_with_secret, PartyAssignment, ProtocolSpec};
use qis::statevec::random_state;
use qis::tol::Tolerances;

#[derive(Parser)]
#[command(
    name = "qis",
    version,
    about = "Quantum information splitting: protocol counts, feasibility search, simulation, audits"
)]
struct Cli {
    /// Indent the JSON report.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form maximum number of distributions: C(N-2n, k-2).
    Count {
        #[arg(long = "N")]
        channel_qubits: usize,
        #[arg(long = "n")]
        secret_qubits: usize,
        #[arg(long = "k")]
        parties: usize,
    },
    /// List the qubit distributions for (N, n, k).
    Enumerate {
        #[arg(long = "N")]
        channel_qubits: usize,
        #[arg(long = "n")]
        secret_qubits: usize,
        #[arg(long = "k")]
        parties: usize,
        /// Keep distributions whose dealer holds fewer channel qubits than
        /// the secret has.
        #[arg(long = "no-dealer-filter")]
        no_dealer_filter: bool,
    },
    /// Search for a working protocol: one distribution (--blocks) or a full
    /// survey of every distribution (--k).
    #[command(group(ArgGroup::new("chan").required(true).args(["channel", "channel_file"])))]
    #[command(group(ArgGroup::new("scope").required(true).args(["blocks", "parties"])))]
    Search {
        /// Built-in channel name: ghz2..ghz8, cluster4, bellpairs-1..8.
        #[arg(long)]
        channel: Option<String>,
        #[arg(long = "channel-file")]
        channel_file: Option<PathBuf>,
        /// Comma-separated block sizes, receiver last, e.g. 1,2,1.
        #[arg(long)]
        blocks: Option<String>,
        /// Survey every distribution over this many parties instead.
        #[arg(long = "k")]
        parties: Option<usize>,
        #[arg(long = "n")]
        secret_qubits: usize,
        /// Largest measured block the basis library covers.
        #[arg(long = "library-cap", default_value_t = 4)]
        library_cap: usize,
    },
    /// Run a protocol file over seeded random secrets, branch by branch.
    #[command(group(ArgGroup::new("chan").required(true).args(["channel", "channel_file"])))]
    Simulate {
        #[arg(long)]
        channel: Option<String>,
        #[arg(long = "channel-file")]
        channel_file: Option<PathBuf>,
        /// Protocol JSON file.
        #[arg(long)]
        protocol: PathBuf,
        /// Number of random secrets.
        #[arg(long, default_value_t = 20)]
        secrets: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Security audit of a protocol: secret independence, phase blindness,
    /// completeness.
    #[command(group(ArgGroup::new("chan").required(true).args(["channel", "channel_file"])))]
    Audit {
        #[arg(long)]
        channel: Option<String>,
        #[arg(long = "channel-file")]
        channel_file: Option<PathBuf>,
        #[arg(long)]
        protocol: PathBuf,
    },
    /// Sweep the closed-form count against exhaustive enumeration.
    Crosscheck {
        #[arg(long = "max-N", default_value_t = 12)]
        max_channel: usize,
        #[arg(long = "max-n", default_value_t = 4)]
        max_secret: usize,
        #[arg(long = "max-k", default_value_t = 6)]
        max_parties: usize,
    },
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: Option<u64>,
    tolerances: Tolerances,
    result: T,
}

fn report<T: Serialize>(
    command: &'static str,
    seed: Option<u64>,
    result: T,
    pretty: bool,
) -> Result<String, String> {
    let full = Report {
        tool: "qis",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        tolerances: Tolerances::default(),
        result,
    };
    if pretty {
        serde_json::to_string_pretty(&full)
    } else {
        serde_json::to_string(&full)
    }
    .map_err(|e| format!("report serialization failed: {e}"))
}

fn resolve_channel(
    name: &Option<String>,
    file: &Option<PathBuf>,
) -> Result<ChannelDescriptor, String> {
    match (name, file) {
        (Some(name), None) => channels::builtin(name).ok_or_else(|| {
            format!("unknown built-in channel '{name}' (try ghz2..ghz8, cluster4, bellpairs-<n>)")
        }),
        (None, Some(path)) => channels::load(path).map_err(|e| format!("{}: {e}", path.display())),
        _ => Err("pass exactly one of --channel or --channel-file".into()),
    }
}

fn load_protocol_file(path: &PathBuf) -> Result<ProtocolSpec, String> {
    let spec = load_protocol(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let violations = spec.validate();
    if violations.is_empty() {
        Ok(spec)
    } else {
        let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
        Err(format!(
            "{}: invalid protocol: {}",
            path.display(),
            text.join("; ")
        ))
    }
}

#[derive(Serialize)]
struct CountResult {
    query: CountQuery,
    max_protocols: u64,
}

#[derive(Serialize)]
struct EnumerateRow {
    blocks: Vec<Vec<usize>>,
    sizes: Vec<usize>,
    dealer_ok: bool,
}

#[derive(Serialize)]
struct EnumerateResult {
    filter_applied: bool,
    kept: usize,
    removed: usize,
    assignments: Vec<EnumerateRow>,
}

#[derive(Serialize)]
struct BranchRow {
    outcomes: Vec<usize>,
    probability: f64,
    corrected: bool,
    fidelity: Option<f64>,
}

#[derive(Serialize)]
struct SecretRun {
    secret_index: usize,
    min_fidelity: f64,
    branches: Vec<BranchRow>,
}

#[derive(Serialize)]
struct SimulateResult {
    channel: String,
    protocol: String,
    secrets: usize,
    classical_cost_bits: Vec<usize>,
    min_fidelity: f64,
    all_branches_perfect: bool,
    runs: Vec<SecretRun>,
}

#[derive(Serialize)]
struct AuditResult {
    channel: String,
    protocol: String,
    audit: qis::feasibility::SecurityAudit,
    independence_ok: bool,
    phase_ok: bool,
    completeness_ok: bool,
    all_ok: bool,
}

#[derive(Serialize)]
struct CrosscheckRow {
    #[serde(rename = "N")]
    channel_qubits: usize,
    n: usize,
    k: usize,
    #[serde(flatten)]
    check: CrossCheck,
}

#[derive(Serialize)]
struct CrosscheckResult {
    cases: usize,
    all_match: bool,
    mismatches: Vec<CrosscheckRow>,
    rows: Vec<CrosscheckRow>,
}

fn run(cli: &Cli) -> Result<String, String> {
    match &cli.command {
        Command::Count {
            channel_qubits,
            secret_qubits,
            parties,
        } => {
            let query = CountQuery::new(*channel_qubits, *secret_qubits, *parties)
                .map_err(|e| e.to_string())?;
            let result = CountResult {
                query,
                max_protocols: max_protocols(&query),
            };
            report("count", None, result, cli.pretty)
        }
        Command::Enumerate {
            channel_qubits,
            secret_qubits,
            parties,
            no_dealer_filter,
        } => {
            let all = enumerate_assignments(*channel_qubits, *secret_qubits, *parties)
                .map_err(|e| e.to_string())?;
            let (kept, removed) = dealer_minimum_filter(all.clone());
            let rows: Vec<EnumerateRow> = all
                .iter()
                .filter(|a| *no_dealer_filter || a.dealer_block().len() >= *secret_qubits)
                .map(|a| EnumerateRow {
                    blocks: a.blocks().to_vec(),
                    sizes: a.sizes(),
                    dealer_ok: a.dealer_block().len() >= *secret_qubits,
                })
                .collect();
            let result = EnumerateResult {
                filter_applied: !no_dealer_filter,
                kept: kept.len(),
                removed: removed.len(),
                assignments: rows,
            };
            report("enumerate", None, result, cli.pretty)
        }
        Command::Search {
            channel,
            channel_file,
            blocks,
            parties,
            secret_qubits,
            library_cap,
        } => {
            let channel = resolve_channel(channel, channel_file)?;
            let config = SearchConfig {
                library: BasisLibrary::with_cap(*library_cap),
                audit_filtered: false,
            };
            match (blocks, parties) {
                (Some(blocks), None) => {
                    let sizes: Vec<usize> = blocks
                        .split(',')
                        .map(|s| s.trim().parse::<usize>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| format!("unparsable --blocks '{blocks}'"))?;
                    let assignment =
                        PartyAssignment::contiguous(channel.num_qubits, *secret_qubits, &sizes)
                            .map_err(|e| e.to_string())?;
                    let verdict =
                        search(&channel, &assignment, &config).map_err(|e| e.to_string())?;
                    report("search", None, verdict, cli.pretty)
                }
                (None, Some(parties)) => {
                    let result = survey(&channel, *secret_qubits, *parties, &config)
                        .map_err(|e| e.to_string())?;
                    report("search", None, result, cli.pretty)
                }
                _ => Err("pass exactly one of --blocks or --k".into()),
            }
        }
        Command::Simulate {
            channel,
            channel_file,
            protocol,
            secrets,
            seed,
        } => {
            let channel = resolve_channel(channel, channel_file)?;
            let spec = load_protocol_file(protocol)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut runs = Vec::with_capacity(*secrets);
            let mut min_fidelity = f64::INFINITY;
            for secret_index in 0..*secrets {
                let secret = random_state(spec.assignment.secret_qubits(), &mut rng);
                let branches =
                    run_with_secret(&channel, &spec, &secret).map_err(|e| e.to_string())?;
                let mut run_min = f64::INFINITY;
                let rows: Vec<BranchRow> = branches
                    .iter()
                    .map(|b| {
                        run_min = run_min.min(b.fidelity.unwrap_or(0.0));
                        BranchRow {
                            outcomes: b.outcomes.clone(),
                            probability: b.probability,
                            corrected: b.correction.is_applied(),
                            fidelity: b.fidelity,
                        }
                    })
                    .collect();
                min_fidelity = min_fidelity.min(run_min);
                runs.push(SecretRun {
                    secret_index,
                    min_fidelity: run_min,
                    branches: rows,
                });
            }
            let result = SimulateResult {
                channel: channel.name.clone(),
                protocol: protocol.display().to_string(),
                secrets: *secrets,
                classical_cost_bits: classical_cost(&spec).bits_per_party,
                min_fidelity,
                all_branches_perfect: min_fidelity >= 1.0 - qis::tol::PERFECT_FIDELITY,
                runs,
            };
            report("simulate", Some(*seed), result, cli.pretty)
        }
        Command::Audit {
            channel,
            channel_file,
            protocol,
        } => {
            let channel = resolve_channel(channel, channel_file)?;
            let spec = load_protocol_file(protocol)?;
            let audit = audit_security(&channel, &spec).map_err(|e| e.to_string())?;
            let result = AuditResult {
                channel: channel.name.clone(),
                protocol: protocol.display().to_string(),
                audit,
                independence_ok: audit.independence_ok(),
                phase_ok: audit.phase_ok(),
                completeness_ok: audit.completeness_ok(),
                all_ok: audit.all_ok(),
            };
            report("audit", Some(AUDIT_SEED), result, cli.pretty)
        }
        Command::Crosscheck {
            max_channel,
            max_secret,
            max_parties,
        } => {
            if *max_parties < 3 {
                return Err("--max-k must be at least 3".into());
            }
            let mut rows = Vec::new();
            for channel_qubits in 1..=*max_channel {
                for secret_qubits in 1..=(*max_secret).min(channel_qubits) {
                    for parties in 3..=*max_parties {
                        let query = CountQuery::new(channel_qubits, secret_qubits, parties)
                            .map_err(|e| e.to_string())?;
                        rows.push(CrosscheckRow {
                            channel_qubits,
                            n: secret_qubits,
                            k: parties,
                            check: crosscheck(&query),
                        });
                    }
                }
            }
            let mismatches: Vec<CrosscheckRow> = rows
                .iter()
                .filter(|r| !r.check.matches)
                .map(|r| CrosscheckRow {
                    channel_qubits: r.channel_qubits,
                    n: r.n,
                    k: r.k,
                    check: r.check,
                })
                .collect();
            let result = CrosscheckResult {
                cases: rows.len(),
                all_match: mismatches.is_empty(),
                mismatches,
                rows,
            };
            report("crosscheck", None, result, cli.pretty)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(json) => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{json}").and_then(|()| out.flush()) {
                Ok(()) => ExitCode::SUCCESS,
                // reader went away (e.g. piped into head): not an error
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("qis: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Err(message) => {
            eprintln!("qis: {message}");
            ExitCode::from(2)
        }
    }
}
