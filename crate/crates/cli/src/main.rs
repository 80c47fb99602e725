//! `authenc` command-line tool.
//!
//! Exit status: 0 on success or acceptance, 1 when a verification fails,
//! 2 on usage, I/O or parse errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod embed;
mod files;
mod store;

use config::{CaModeArg, Scheme};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Rejected(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Rejected(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "authenc", version)]
#[command(about = "Authenticated encryption over Schnorr groups, with Ma-Chen attack demos")]
pub struct Cli {
    /// Seed for a deterministic RNG; ignored without --insecure-test-rng
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Honor --seed. Output is reproducible and therefore not secret.
    #[arg(long, global = true)]
    insecure_test_rng: bool,

    /// Write records as raw TLV instead of armored text
    #[arg(long, global = true)]
    binary: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate group parameters (p, q, g)
    GenParams {
        #[arg(long, conflicts_with = "toy")]
        bits_p: Option<u64>,
        #[arg(long, conflicts_with = "toy")]
        bits_q: Option<u64>,
        /// The tiny (23, 11, 4) group, for tests only
        #[arg(long)]
        toy: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Generate a key pair
    Keygen {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out_secret: PathBuf,
        /// Defaults to stdout
        #[arg(long)]
        out_public: Option<PathBuf>,
    },

    /// Add a public key to a registry file
    Register {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        registry: Option<PathBuf>,
        #[arg(long)]
        identity: String,
        #[arg(long)]
        public: PathBuf,
        /// Secret key, used to sign a proof of possession in strict-pop mode
        #[arg(long)]
        secret: Option<PathBuf>,
        /// Policy for a newly created registry
        #[arg(long, value_enum)]
        ca_mode: Option<CaModeArg>,
    },

    /// Encrypt and authenticate a message
    Encrypt {
        #[command(flatten)]
        common: SchemeArgs,
        /// Sender's secret key
        #[arg(long)]
        secret: PathBuf,
        /// Receiver's public key
        #[arg(long)]
        to: PathBuf,
        #[arg(
            long = "in",
            conflicts_with = "message",
            required_unless_present = "message"
        )]
        input: Option<PathBuf>,
        #[arg(long)]
        message: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fixed-width packed ciphertext instead of a record
        #[arg(long)]
        packed: bool,
    },

    /// Decrypt and verify; prints the plaintext only on acceptance
    Decrypt {
        #[command(flatten)]
        common: SchemeArgs,
        #[command(flatten)]
        receive: ReceiveArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Decrypt, then release a proof that a third party can check
    Prove {
        #[command(flatten)]
        common: SchemeArgs,
        #[command(flatten)]
        receive: ReceiveArgs,
        /// Sender identity recorded in the proof
        #[arg(long, default_value = "sender")]
        sender_name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Check a released proof against the sender's public key
    Verify {
        #[command(flatten)]
        common: SchemeArgs,
        #[arg(long)]
        proof: PathBuf,
        /// Sender's public key
        #[arg(long, conflicts_with = "registry")]
        from: Option<PathBuf>,
        /// Resolve the sender named in the proof through this registry
        #[arg(long)]
        registry: Option<PathBuf>,
    },

    /// Forge a Ma-Chen ciphertext from a sender's public key alone
    AttackDemo {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        alice_pub: PathBuf,
        #[arg(long, default_value = "pay bob 1000")]
        message: String,
        #[arg(long)]
        registry: Option<PathBuf>,
        #[arg(long, value_enum)]
        ca_mode: Option<CaModeArg>,
        #[arg(long, default_value = "alice")]
        alice_id: String,
        #[arg(long, default_value = "bob")]
        attacker_id: String,
    },

    /// Show the Ma-Chen arbitrator rejecting honest proofs
    DesignErrorDemo {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        runs: u32,
    },

    /// Count exponentiations and ciphertext sizes for both schemes
    Bench {
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct SchemeArgs {
    #[arg(long, value_enum)]
    scheme: Option<Scheme>,
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReceiveArgs {
    /// Receiver's secret key
    #[arg(long)]
    secret: PathBuf,
    /// Sender's public key
    #[arg(long)]
    from: PathBuf,
    /// Ciphertext file
    #[arg(long = "in")]
    input: PathBuf,
    /// The ciphertext is in packed form
    #[arg(long)]
    packed: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Rejected(msg) => eprintln!("{msg}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
