//! `drh` — fingerprint sequences with distortion-resistant hashes, build
//! and query window indexes, and run the calibration experiments.
//!
//! Every subcommand is a client of the DRH service. With `--server URL`
//! requests go to a remote server; otherwise the service runs in-process
//! and nothing leaves the machine. Results are byte-identical either way,
//! for any `--threads` value, and across runs: determinism is part of the
//! command-line contract.
//!
//! Output goes to stdout, logs to stderr. Exit codes: 0 success, 1 failure
//! (and `query` with zero collisions), 2 sequence parse errors.

mod config;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::ConfigFile;
use drh_client::api::*;
use drh_client::{ClientError, DrhClient};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "drh",
    version,
    about = "Distortion-resistant hashing for similar-subsequence search"
)]
struct Cli {
    /// Remote service URL (e.g. http://127.0.0.1:7878); in-process when unset
    #[arg(long, global = true, env = "DRH_SERVER")]
    server: Option<String>,

    /// key=value config file; overrides defaults, flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for build/simulate; 0 picks automatically [default: 0]
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Codebook, metric and beam flags shared by the encoding commands.
#[derive(Args, Clone, Default)]
struct EncoderFlags {
    /// Gap cost [default: 2]
    #[arg(long)]
    cg: Option<u32>,
    /// Substitution cost [default: 3]
    #[arg(long)]
    cs: Option<u32>,
    /// Alignment row band half-width, 0 disables banding [default: 16]
    #[arg(long)]
    band: Option<u32>,
    /// Enlarged block size in bits [default: 8]
    #[arg(long)]
    n: Option<u8>,
    /// Hash bits consumed per block; rate = block-size/n [default: 4]
    #[arg(long = "rate-block-size")]
    rate_block_size: Option<u8>,
    /// Codebook seed [default: 1]
    #[arg(long, env = "DRH_SEED")]
    seed: Option<u64>,
    /// Beam width: prefixes expanded per depth [default: 100]
    #[arg(long)]
    max_active: Option<usize>,
    /// Fingerprint candidates emitted per sequence [default: 4]
    #[arg(long)]
    candidates: Option<usize>,
    /// Keep candidates within this cost of the best leaf [default: 4]
    #[arg(long)]
    slack: Option<u32>,
}

/// Same knobs for the simulate commands, where --seed belongs to the
/// experiment; the codebook seed comes from the config file if needed.
#[derive(Args, Clone, Default)]
struct SimEncoderFlags {
    /// Gap cost [default: 2]
    #[arg(long)]
    cg: Option<u32>,
    /// Substitution cost [default: 3]
    #[arg(long)]
    cs: Option<u32>,
    /// Alignment row band half-width, 0 disables banding [default: 16]
    #[arg(long)]
    band: Option<u32>,
    /// Enlarged block size in bits [default: 8]
    #[arg(long)]
    n: Option<u8>,
    /// Hash bits consumed per block; rate = block-size/n [default: 4]
    #[arg(long = "rate-block-size")]
    rate_block_size: Option<u8>,
    /// Beam width: prefixes expanded per depth [default: 100]
    #[arg(long)]
    max_active: Option<usize>,
    /// Fingerprint candidates emitted per sequence [default: 4]
    #[arg(long)]
    candidates: Option<usize>,
    /// Keep candidates within this cost of the best leaf [default: 4]
    #[arg(long)]
    slack: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Alignment distance between the sequences in two files
    Dist {
        file_a: PathBuf,
        file_b: PathBuf,
        /// Gap cost [default: 2]
        #[arg(long)]
        cg: Option<u32>,
        /// Substitution cost [default: 3]
        #[arg(long)]
        cs: Option<u32>,
    },
    /// Fingerprint one sequence; prints fingerprint, bit length, distance
    Encode {
        seq_file: PathBuf,
        #[command(flatten)]
        encoder: EncoderFlags,
    },
    /// Build the fingerprint index over all windows of a reference
    Build {
        reference: PathBuf,
        output: PathBuf,
        /// Comma-separated window lengths [default: 64]
        #[arg(long)]
        window_lens: Option<String>,
        /// Step between window starts [default: 1]
        #[arg(long)]
        stride: Option<u32>,
        #[command(flatten)]
        encoder: EncoderFlags,
    },
    /// Query an index; prints position, window length, rank per collision
    Query {
        index: PathBuf,
        read_file: PathBuf,
        /// Most collisions to report [default: 100]
        #[arg(long)]
        limit: Option<usize>,
        #[command(flatten)]
        encoder: EncoderFlags,
    },
    /// Calibration experiments, CSV on stdout
    Simulate {
        #[command(subcommand)]
        experiment: SimulateCmd,
    },
    /// Serve the HTTP API
    Serve {
        /// Listen address [default: 127.0.0.1:7878]
        #[arg(long)]
        listen: Option<String>,
    },
}

#[derive(Subcommand)]
enum SimulateCmd {
    /// Rate-distortion relation R(D) = 1 - h(D)
    Curve {
        /// Comma-separated distortion values in (0, 1/2]
        #[arg(long)]
        d_values: Option<String>,
        /// Evenly spaced grid size when --d-values is not given [default: 50]
        #[arg(long)]
        d_steps: Option<u32>,
    },
    /// Substitution-only toy model: exact nearest-codeword distances
    Hamming {
        /// Sequence length in bits [default: 16]
        #[arg(long)]
        l: Option<u32>,
        /// Codebook rate in (0, 1] [default: 0.5]
        #[arg(long)]
        rate: Option<f64>,
        /// Trials [default: 10000]
        #[arg(long)]
        trials: Option<u64>,
        /// Experiment seed [default: 1]
        #[arg(long, env = "DRH_SEED")]
        seed: Option<u64>,
    },
    /// Distance-to-codeword histograms for random sequences
    DrhHistogram {
        /// Comma-separated window lengths [default: 64]
        #[arg(long)]
        window_lens: Option<String>,
        /// Trials per window length [default: 200]
        #[arg(long)]
        trials: Option<u64>,
        /// Experiment seed [default: 1]
        #[arg(long, env = "DRH_SEED")]
        seed: Option<u64>,
        #[command(flatten)]
        encoder: SimEncoderFlags,
    },
    /// Collision recall for mutated reads against a random reference
    Recall {
        /// Reference length in symbols [default: 2000]
        #[arg(long)]
        ref_len: Option<usize>,
        /// Window length in symbols [default: 64]
        #[arg(long)]
        window_len: Option<u32>,
        /// Substitution probability per symbol [default: 0.02]
        #[arg(long = "psub")]
        p_sub: Option<f64>,
        /// Insertion probability per gap [default: 0]
        #[arg(long = "pins")]
        p_ins: Option<f64>,
        /// Deletion probability per symbol [default: 0]
        #[arg(long = "pdel")]
        p_del: Option<f64>,
        /// Trials [default: 100]
        #[arg(long)]
        trials: Option<u64>,
        /// Experiment seed [default: 1]
        #[arg(long, env = "DRH_SEED")]
        seed: Option<u64>,
        #[command(flatten)]
        encoder: SimEncoderFlags,
    },
}

/// Input bytes that are not UTF-8 cannot even reach the sequence parser;
/// they are reported as parse errors with the offending byte position.
#[derive(Debug)]
struct NonUtf8Input {
    path: PathBuf,
    position: usize,
}

impl std::fmt::Display for NonUtf8Input {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: invalid byte at position {}",
            self.path.display(),
            self.position
        )
    }
}

impl std::error::Error for NonUtf8Input {}

fn read_input(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    String::from_utf8(bytes).map_err(|e| {
        anyhow::Error::new(NonUtf8Input {
            path: path.to_path_buf(),
            position: e.utf8_error().valid_up_to(),
        })
    })
}

fn parse_u32_list(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u32>()
                .with_context(|| format!("bad value {tok:?} in list"))
        })
        .collect()
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("bad value {tok:?} in list"))
        })
        .collect()
}

struct EncoderFlagValues {
    cg: Option<u32>,
    cs: Option<u32>,
    band: Option<u32>,
    n: Option<u8>,
    rate_block_size: Option<u8>,
    seed: Option<u64>,
    max_active: Option<usize>,
    candidates: Option<usize>,
    slack: Option<u32>,
}

impl From<EncoderFlags> for EncoderFlagValues {
    fn from(f: EncoderFlags) -> Self {
        EncoderFlagValues {
            cg: f.cg,
            cs: f.cs,
            band: f.band,
            n: f.n,
            rate_block_size: f.rate_block_size,
            seed: f.seed,
            max_active: f.max_active,
            candidates: f.candidates,
            slack: f.slack,
        }
    }
}

impl From<SimEncoderFlags> for EncoderFlagValues {
    fn from(f: SimEncoderFlags) -> Self {
        EncoderFlagValues {
            cg: f.cg,
            cs: f.cs,
            band: f.band,
            n: f.n,
            rate_block_size: f.rate_block_size,
            seed: None,
            max_active: f.max_active,
            candidates: f.candidates,
            slack: f.slack,
        }
    }
}

/// Flags override config-file values; whatever is still unset falls to the
/// library defaults when the service resolves the options.
fn encoder_opts(flags: impl Into<EncoderFlagValues>, cfg: &ConfigFile) -> Result<EncoderOpts> {
    let flags = flags.into();
    Ok(EncoderOpts {
        cg: flags.cg.or(cfg.get("cg")?),
        cs: flags.cs.or(cfg.get("cs")?),
        band: flags.band.or(cfg.get("band")?),
        n: flags.n.or(cfg.get("n")?),
        block_size: flags.rate_block_size.or(cfg.get("rate-block-size")?),
        seed: flags.seed.or(cfg.get("seed")?),
        max_active: flags.max_active.or(cfg.get("max-active")?),
        candidates: flags.candidates.or(cfg.get("candidates")?),
        slack: flags.slack.or(cfg.get("slack")?),
        backend: cfg.get_raw("backend").map(str::to_string),
        tans_counts: cfg.tans_counts()?,
    })
}

fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<NonUtf8Input>().is_some() {
        return 2;
    }
    if let Some(ClientError::Api { kind, .. }) = err.downcast_ref::<ClientError>() {
        if kind == "parse" {
            return 2;
        }
    }
    1
}

#[tokio::main]
async fn main() {
    let cli = Cli::parse();
    match run(cli).await {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code(&err));
        }
    }
}

async fn run(cli: Cli) -> Result<i32> {
    if let Command::Serve { listen } = &cli.command {
        return serve(listen.as_deref().unwrap_or("127.0.0.1:7878")).await;
    }

    let cfg = ConfigFile::load(cli.config.as_deref())?;
    let client = match &cli.server {
        Some(url) => DrhClient::http(url).map_err(|e| anyhow!(e))?,
        None => DrhClient::local(drh_service::router()),
    };
    let threads = match cli.threads.or(cfg.get("threads")?) {
        None | Some(0) => None,
        some => some,
    };

    match cli.command {
        Command::Serve { .. } => unreachable!("handled above"),

        Command::Dist {
            file_a,
            file_b,
            cg,
            cs,
        } => {
            let request = DistRequest {
                a: read_input(&file_a)?,
                b: read_input(&file_b)?,
                cg: cg.or(cfg.get("cg")?),
                cs: cs.or(cfg.get("cs")?),
            };
            let response = client.dist(&request).await?;
            println!("{}", response.distance);
            Ok(0)
        }

        Command::Encode { seq_file, encoder } => {
            let request = EncodeRequest {
                seq: read_input(&seq_file)?,
                encoder: encoder_opts(encoder, &cfg)?,
            };
            let response = client.encode(&request).await?;
            for c in &response.candidates {
                println!("{}\t{}\t{}", c.fingerprint, c.bit_len, c.final_distance);
            }
            Ok(0)
        }

        Command::Build {
            reference,
            output,
            window_lens,
            stride,
            encoder,
        } => {
            let lens_text = window_lens
                .or(cfg.get_raw("window-lens").map(str::to_string))
                .unwrap_or_else(|| "64".to_string());
            let request = BuildRequest {
                reference_text: Some(read_input(&reference)?),
                reference_path: None,
                output_path: output.display().to_string(),
                window_lens: parse_u32_list(&lens_text)?,
                stride: stride.or(cfg.get("stride")?).unwrap_or(1),
                encoder: encoder_opts(encoder, &cfg)?,
                threads,
            };
            let response = client.build(&request).await?;
            println!("{}", response.records);
            Ok(0)
        }

        Command::Query {
            index,
            read_file,
            limit,
            encoder,
        } => {
            let mut expect = encoder_opts(encoder, &cfg)?;
            let max_active = expect.max_active.take();
            let request = QueryRequest {
                index_path: index.display().to_string(),
                read_text: Some(read_input(&read_file)?),
                read_path: None,
                limit: limit.or(cfg.get("limit")?),
                max_active,
                expect,
            };
            let response = client.query(&request).await?;
            for hit in &response.hits {
                println!("{}\t{}\t{}", hit.position, hit.window_len, hit.rank);
            }
            Ok(if response.hits.is_empty() { 1 } else { 0 })
        }

        Command::Simulate { experiment } => {
            let csv = match experiment {
                SimulateCmd::Curve { d_values, d_steps } => {
                    let d_values = match d_values {
                        Some(text) => parse_f64_list(&text)?,
                        None => {
                            let steps = d_steps.unwrap_or(50);
                            if steps == 0 {
                                bail!("--d-steps must be positive");
                            }
                            (1..=steps).map(|i| 0.5 * i as f64 / steps as f64).collect()
                        }
                    };
                    client.simulate_curve(&CurveRequest { d_values }).await?
                }
                SimulateCmd::Hamming {
                    l,
                    rate,
                    trials,
                    seed,
                } => {
                    client
                        .simulate_hamming(&HammingRequest {
                            l_bits: l.or(cfg.get("l")?).unwrap_or(16),
                            rate: rate.or(cfg.get("rate")?).unwrap_or(0.5),
                            trials: trials.or(cfg.get("trials")?).unwrap_or(10_000),
                            seed: seed.or(cfg.get("seed")?).unwrap_or(1),
                        })
                        .await?
                }
                SimulateCmd::DrhHistogram {
                    window_lens,
                    trials,
                    seed,
                    encoder,
                } => {
                    let lens_text = window_lens
                        .or(cfg.get_raw("window-lens").map(str::to_string))
                        .unwrap_or_else(|| "64".to_string());
                    client
                        .simulate_histogram(&HistogramRequest {
                            window_lens: parse_u32_list(&lens_text)?,
                            trials: trials.or(cfg.get("trials")?).unwrap_or(200),
                            seed: seed.or(cfg.get("seed")?).unwrap_or(1),
                            encoder: encoder_opts(encoder, &cfg)?,
                            threads,
                        })
                        .await?
                }
                SimulateCmd::Recall {
                    ref_len,
                    window_len,
                    p_sub,
                    p_ins,
                    p_del,
                    trials,
                    seed,
                    encoder,
                } => {
                    client
                        .simulate_recall(&RecallRequest {
                            ref_len: ref_len.or(cfg.get("ref-len")?).unwrap_or(2000),
                            window_len: window_len.or(cfg.get("window-len")?).unwrap_or(64),
                            p_sub: p_sub.or(cfg.get("psub")?).unwrap_or(0.02),
                            p_ins: p_ins.or(cfg.get("pins")?).unwrap_or(0.0),
                            p_del: p_del.or(cfg.get("pdel")?).unwrap_or(0.0),
                            trials: trials.or(cfg.get("trials")?).unwrap_or(100),
                            seed: seed.or(cfg.get("seed")?).unwrap_or(1),
                            encoder: encoder_opts(encoder, &cfg)?,
                            threads,
                        })
                        .await?
                }
            };
            print!("{csv}");
            Ok(0)
        }
    }
}

async fn serve(listen: &str) -> Result<i32> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .with_ansi(false)
        .init();
    let listener = tokio::net::TcpListener::bind(listen)
        .await
        .with_context(|| format!("cannot bind {listen}"))?;
    tracing::info!(address = %listener.local_addr()?, "drh service listening");
    drh_service::serve(listener)
        .await
        .context("server terminated")?;
    Ok(0)
}
