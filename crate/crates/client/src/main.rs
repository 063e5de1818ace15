use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::rngs::{OsRng, StdRng};
use rand::SeedableRng;
use selene_client::keyfile::KeyFile;
use selene_client::{audit, ApiClient, BoardSnapshot, CastRecord, ClientError, ClientSession, Evidence, HttpTransport};
use selene_core::api::Phase;
use selene_core::board::ChainVerdict;
use selene_core::engine::{Candidate, ElectionConfig, VoterKeys, DEFAULT_TELLER_COUNT};
use selene_core::{GroupCtx, GroupProfile};
use serde::Deserialize;

/// Voter and administrator client for a Selene election server.
#[derive(Parser)]
#[command(name = "selene", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ServerArg {
    /// Base URL of the election server.
    #[arg(long, env = "SELENE_SERVER", default_value = "http://127.0.0.1:8080")]
    server: String,
}

#[derive(Args)]
struct VoterArgs {
    #[command(flatten)]
    server: ServerArg,
    /// Defaults to the `voter_id` recorded in the key file.
    #[arg(long)]
    voter_id: Option<String>,
    #[arg(long, env = "SELENE_CREDENTIAL", hide_env_values = true)]
    credential: String,
    #[arg(long)]
    keyfile: PathBuf,
}

#[derive(Args)]
struct AdminArgs {
    #[command(flatten)]
    server: ServerArg,
    #[arg(long, env = "SELENE_ADMIN_CREDENTIAL", hide_env_values = true)]
    admin_credential: String,
}

#[derive(Subcommand)]
enum Command {
    /// Cast a ballot.
    Vote {
        #[command(flatten)]
        voter: VoterArgs,
        #[arg(long)]
        candidate: String,
        /// Keep the plaintext choice in this file so `verify` can compare.
        /// Anyone who sees the file learns the vote.
        #[arg(long)]
        retain_choice: Option<PathBuf>,
    },
    /// Find your tracker on the board and check the row.
    Verify {
        #[command(flatten)]
        voter: VoterArgs,
        /// Write an evidence file for dispute resolution.
        #[arg(long)]
        export: Option<PathBuf>,
        /// A file written by `vote --retain-choice`.
        #[arg(long)]
        cast_record: Option<PathBuf>,
    },
    /// Print the public bulletin board and check its hash chain.
    Board {
        #[command(flatten)]
        server: ServerArg,
    },
    /// Produce a tracker and α' that point at another candidate's row.
    FakeTracker {
        #[command(flatten)]
        voter: VoterArgs,
        #[arg(long)]
        coerced_candidate: String,
        /// Seed for the row choice, for reproducible runs.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Configure the election: generates voter keys, posts the roster and
    /// writes key files plus the credential list into `--out-dir`.
    Setup {
        #[command(flatten)]
        admin: AdminArgs,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Move the election to its next phase.
    Transition {
        #[command(flatten)]
        admin: AdminArgs,
        #[arg(long)]
        phase: Phase,
    },
    /// Phase, turnout and (once published) the counts.
    TallyStatus {
        #[command(flatten)]
        admin: AdminArgs,
    },
    /// Re-check an evidence file offline.
    AuditEvidence {
        #[arg(long)]
        file: PathBuf,
    },
}

/// `selene setup` input.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetupFile {
    election_id: String,
    group: GroupProfile,
    #[serde(default = "default_tellers")]
    teller_count: u32,
    candidates: Vec<Candidate>,
    voters: Vec<String>,
}

fn default_tellers() -> u32 {
    DEFAULT_TELLER_COUNT
}

/// Exit status 2: the check ran and failed.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct CheckFailed(String);

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if let Some(ce) = e.downcast_ref::<ClientError>() {
                ce.exit_code()
            } else if e.is::<CheckFailed>() {
                2
            } else {
                1
            };
            ExitCode::from(code as u8)
        }
    }
}

async fn login(voter: &VoterArgs) -> anyhow::Result<ClientSession<HttpTransport>> {
    let kf = KeyFile::load(&voter.keyfile).with_context(|| format!("reading {}", voter.keyfile.display()))?;
    let voter_id = voter
        .voter_id
        .clone()
        .or_else(|| kf.voter_id.clone())
        .ok_or_else(|| anyhow!("--voter-id not given and the key file names no voter"))?;
    Ok(ClientSession::login(HttpTransport::new(&voter.server.server), &voter_id, &voter.credential, kf.into()).await?)
}

fn print_snapshot(snapshot: &BoardSnapshot) {
    for e in &snapshot.entries {
        let summary = match e.record() {
            Ok(selene_core::board::BoardRecord::Result(r)) => format!("{} -> {}", r.tracker_display, r.candidate_id),
            Ok(r) => serde_json::to_value(&r)
                .ok()
                .and_then(|v| v.get("record").and_then(|x| x.as_str()).map(str::to_owned))
                .unwrap_or_default(),
            Err(err) => format!("undecodable: {err}"),
        };
        println!("{:>5}  {:<6}  {}", e.index, e.kind, summary);
    }
}

fn chain_check(chain: ChainVerdict) -> anyhow::Result<()> {
    match chain {
        ChainVerdict::Valid => {
            println!("chain: valid");
            Ok(())
        }
        ChainVerdict::Broken { first_bad_index } => {
            Err(ClientError::ChainBroken { first_bad_index }.into())
        }
    }
}

fn safe_file_stem(id: &str) -> bool {
    !id.is_empty() && !id.starts_with('.') && id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
}

async fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Vote { voter, candidate, retain_choice } => {
            let mut session = login(&voter).await?;
            session.set_retain_choice(retain_choice.is_some());
            let index = session.cast_vote(&candidate, &mut OsRng).await?;
            println!("ballot recorded at board index {index}");
            if let (Some(path), Some(record)) = (retain_choice, session.cast_record()) {
                selene_client::keyfile::write_private(&path, serde_json::to_string_pretty(record)?.as_bytes())?;
                println!("choice retained in {}", path.display());
            }
        }
        Command::Verify { voter, export, cast_record } => {
            let mut session = login(&voter).await?;
            if let Some(path) = cast_record {
                let record: CastRecord = serde_json::from_str(&std::fs::read_to_string(&path)?)
                    .with_context(|| format!("parsing {}", path.display()))?;
                session.set_cast_record(Some(record));
            }
            let result = session.verify_vote().await;
            if let (Some(path), Some(_)) = (&export, session.last_evidence()) {
                session.export_evidence(path)?;
                println!("evidence written to {}", path.display());
            }
            let outcome = result?;
            println!("tracker:   {}", outcome.tracker_display);
            println!("row:       {}", outcome.row_index);
            println!("candidate: {}", outcome.row_candidate);
            println!("chain:     {}", if outcome.chain_ok { "valid" } else { "broken" });
            match outcome.matched {
                Some(true) => println!("match:     yes"),
                Some(false) => bail!(CheckFailed("the row shows a different candidate than the one cast".into())),
                None => println!("match:     not checked (no retained choice)"),
            }
        }
        Command::Board { server } => {
            let api = ApiClient::new(HttpTransport::new(&server.server));
            let snapshot = BoardSnapshot::new(api.board().await?);
            print_snapshot(&snapshot);
            chain_check(snapshot.chain)?;
        }
        Command::FakeTracker { voter, coerced_candidate, seed } => {
            let mut session = login(&voter).await?;
            let fake = match seed {
                Some(s) => session.fake_tracker(&coerced_candidate, &mut StdRng::seed_from_u64(s)).await?,
                None => session.fake_tracker(&coerced_candidate, &mut OsRng).await?,
            };
            println!("tracker:   {}", fake.tracker_display);
            println!("row:       {}", fake.row_index);
            println!("candidate: {coerced_candidate}");
            println!("alpha:     {}", fake.alpha.to_hex());
        }
        Command::Setup { admin, config, out_dir } => setup(admin, &config, &out_dir).await?,
        Command::Transition { admin, phase } => {
            let api = ApiClient::new(HttpTransport::new(&admin.server.server));
            let resp = api.admin_transition(&admin.admin_credential, phase).await?;
            println!("phase: {} (board length {})", resp.phase, resp.board_length);
        }
        Command::TallyStatus { admin } => {
            let api = ApiClient::new(HttpTransport::new(&admin.server.server));
            let s = api.admin_status(&admin.admin_credential).await?;
            println!("election: {}", s.election_id.as_deref().unwrap_or("(not configured)"));
            println!("phase:    {}", s.phase);
            println!("ballots:  {} of {}", s.ballots_cast, s.roster_size);
            println!("board:    {} entries", s.board_length);
            if let Some(counts) = s.counts {
                for (candidate, n) in counts {
                    println!("  {candidate}: {n}");
                }
            }
        }
        Command::AuditEvidence { file } => {
            let ev = Evidence::load(&file)?;
            let report = audit(&ev);
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.consistent {
                bail!(CheckFailed("evidence file is internally inconsistent".into()));
            }
            if ev.verdict.is_failure() {
                bail!(CheckFailed(format!("evidence records a failed verification: {:?}", ev.verdict)));
            }
        }
    }
    Ok(())
}

async fn setup(admin: AdminArgs, config: &Path, out_dir: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let file: SetupFile = toml::from_str(&text).with_context(|| format!("parsing {}", config.display()))?;
    if let Some(bad) = file.voters.iter().find(|v| !safe_file_stem(v)) {
        bail!("voter id `{bad}` cannot be used as a key file name");
    }
    let ctx = GroupCtx::from_profile(file.group);
    let keys: Vec<VoterKeys> = file.voters.iter().map(|v| VoterKeys::generate(&ctx, v, &mut OsRng)).collect();
    let cfg = ElectionConfig {
        election_id: file.election_id,
        candidates: file.candidates,
        voter_roster: keys.iter().map(|k| k.roster_entry(&ctx)).collect(),
        teller_count: file.teller_count,
        group_profile: file.group,
    };

    let api = ApiClient::new(HttpTransport::new(&admin.server.server));
    let resp = api.admin_setup(&admin.admin_credential, cfg).await?;

    std::fs::create_dir_all(out_dir)?;
    for k in &keys {
        let kf = KeyFile {
            group: file.group,
            voter_id: Some(k.voter_id.clone()),
            trapdoor: k.trapdoor.clone(),
            signing: Some(k.signing.clone()),
        };
        kf.save(&out_dir.join(format!("{}.key", k.voter_id)))?;
    }
    let creds: String = resp.credentials.iter().map(|(v, c)| format!("{v}\t{c}\n")).collect();
    selene_client::keyfile::write_private(&out_dir.join("credentials.tsv"), creds.as_bytes())?;
    println!(
        "election {} configured: {} voters, board length {}; key files and credentials.tsv in {}",
        resp.election_id,
        keys.len(),
        resp.board_length,
        out_dir.display()
    );
    Ok(())
}
