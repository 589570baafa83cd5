use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qcmc_core::attacks::{dca_curve, isda_curve, wf_csv, WfRow};
use qcmc_core::crypto::{keygen_with, KeyMode};
use qcmc_core::decoder::DecoderConfig;
use qcmc_core::design::{identity_pattern, transform_pattern, Construction, SystemParams};
use qcmc_core::keyfile::{self, decrypt_bytes, encrypt_bytes, Ciphertext, KeyFile};
use qcmc_core::optimizer::{optimize_design, OptimizerConfig};
use qcmc_core::rng::{Seed, Stream};
use qcmc_core::sim::{jobs_from_env, reports_csv, run_trials_with, CodewordMode};
use qcmc_core::threshold::{threshold_csv, threshold_grid};

#[derive(Parser)]
#[command(name = "qcmc", version, about = "QC-LDPC/QC-MDPC McEliece toolkit")]
struct Cli {
    /// Worker threads for grid and Monte Carlo commands (default: QCMC_JOBS, else all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair, written to <out>.key and <out>.pub
    Keygen(KeygenArgs),
    /// Encrypt a file
    Encrypt(EncryptArgs),
    /// Decrypt a ciphertext file
    Decrypt(DecryptArgs),
    /// Asymptotic bit-flipping thresholds as CSV
    Threshold(ThresholdArgs),
    /// Attack work factors as CSV
    Wf(WfArgs),
    /// Search for the cheapest private-code density at a security level
    Optimize(OptimizeArgs),
    /// Monte Carlo decoding error rates for a private key
    Simulate(SimulateArgs),
    /// Print the parameters and sizes of a key file
    Inspect(InspectArgs),
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long, default_value_t = 4)]
    n0: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    dv: usize,
    /// Q block weights, n0·n0 comma-separated values in row-major order
    #[arg(long = "W", value_name = "W", conflicts_with = "w_sum")]
    w: Option<String>,
    /// Total weight ΣW of Q (m = ΣW/n0); a suitable pattern is chosen
    #[arg(long)]
    w_sum: Option<usize>,
    #[arg(long)]
    t: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Classic)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ConstructionArg::Random)]
    construction: ConstructionArg,
    /// 64 hex digits or a decimal integer; fresh entropy when omitted
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Classic,
    Systematic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructionArg {
    Random,
    Rdf,
}

#[derive(Args)]
struct EncryptArgs {
    #[arg(long)]
    pk: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct DecoderArgs {
    #[arg(long, value_enum, default_value_t = DecoderArg::Spa)]
    decoder: DecoderArg,
    /// Flip threshold for bf-fixed (default: majority of d_v)
    #[arg(long)]
    b: Option<usize>,
    /// Offset below the largest unsatisfied count for bf-variable
    #[arg(long, default_value_t = 0)]
    delta: usize,
    /// Channel error probability assumed by spa (default: t'/n)
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Spa,
    BfFixed,
    BfVariable,
}

impl DecoderArgs {
    fn config(&self, d_v: usize, t_prime: usize, n: usize) -> DecoderConfig {
        let cfg = match self.decoder {
            DecoderArg::Spa => match self.p0 {
                Some(p0) => DecoderConfig::spa(p0),
                None => DecoderConfig::spa_for(t_prime, n),
            },
            DecoderArg::BfFixed => DecoderConfig::bf_fixed(self.b.unwrap_or((d_v / 2 + 1).min(d_v))),
            DecoderArg::BfVariable => DecoderConfig::bf_variable(self.delta),
        };
        cfg.with_max_iterations(self.max_iter)
    }
}

#[derive(Args)]
struct DecryptArgs {
    #[arg(long)]
    sk: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, default_value_t = 4)]
    n0: usize,
    /// Column weights: list `13,15` or range `start:end[:step]`
    #[arg(long)]
    dv: String,
    /// Circulant sizes: list or range `start:end[:step]`
    #[arg(long, visible_alias = "p-range")]
    p: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WfArgs {
    #[arg(long, value_enum)]
    attack: AttackArg,
    #[arg(long, default_value_t = 4)]
    n0: usize,
    /// Circulant sizes: list or range
    #[arg(long)]
    p: String,
    /// Public column weights d_v' (dca): list or range
    #[arg(long)]
    dv_prime: Option<String>,
    /// Intentional error counts (isda): list or range
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackArg {
    Dca,
    Isda,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Target security level in bits
    #[arg(long)]
    security: f64,
    #[arg(long, default_value_t = 4)]
    n0: usize,
    /// Average decoder iterations
    #[arg(long = "I", value_name = "I", default_value_t = 10.0)]
    iterations: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Candidate d_v values: list or range (default: odd values up to d_v')
    #[arg(long)]
    dv: Option<String>,
    /// Circulant sizes to try: list or range
    #[arg(long)]
    p_grid: Option<String>,
    /// Reference circulant size for the security targets
    #[arg(long)]
    p_ref: Option<usize>,
    /// Emit CSV instead of a table
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Private key file
    #[arg(long)]
    key: PathBuf,
    /// Error counts: list or range
    #[arg(long)]
    t: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[arg(long, value_enum, default_value_t = CodewordArg::Zero)]
    codeword: CodewordArg,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CodewordArg {
    Zero,
    Random,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    key: PathBuf,
}

enum Failure {
    Core(qcmc_core::Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl From<qcmc_core::Error> for Failure {
    fn from(e: qcmc_core::Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn write_bytes(path: &Path, data: &[u8]) -> CliResult<()> {
    fs::write(path, data).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_bytes(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn seed_or_fresh(seed: Option<&str>) -> CliResult<Seed> {
    match seed {
        Some(s) => Ok(s.parse()?),
        None => Ok(Seed(rand::random())),
    }
}

/// `a,b,c` or `start:end[:step]` (inclusive).
fn parse_list(s: &str, what: &str) -> CliResult<Vec<usize>> {
    let bad = || Failure::Usage(format!("invalid {what} list {s:?}"));
    if s.contains(':') {
        let parts: Vec<usize> = s.split(':').map(|x| x.trim().parse().map_err(|_| bad())).collect::<CliResult<_>>()?;
        let (start, end, step) = match parts[..] {
            [a, b] => (a, b, 1),
            [a, b, c] => (a, b, c),
            _ => return Err(bad()),
        };
        if step == 0 || start > end {
            return Err(bad());
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
    }
}

fn keygen(a: &KeygenArgs) -> CliResult<()> {
    let w = match (&a.w, a.w_sum) {
        (Some(w), _) => {
            let flat = parse_list(w, "W")?;
            if flat.len() != a.n0 * a.n0 {
                return Err(Failure::Usage(format!("--W needs {} values, got {}", a.n0 * a.n0, flat.len())));
            }
            flat.chunks(a.n0).map(<[usize]>::to_vec).collect()
        }
        (None, Some(total)) => transform_pattern(a.n0, total)?,
        (None, None) => identity_pattern(a.n0),
    };
    let params = SystemParams::new(a.n0, a.p, a.dv, w, a.t)?;
    let mode = match a.mode {
        ModeArg::Classic => KeyMode::Classic,
        ModeArg::Systematic => KeyMode::Systematic,
    };
    let construction = match a.construction {
        ConstructionArg::Random => Construction::Random,
        ConstructionArg::Rdf => Construction::Rdf,
    };
    let seed = seed_or_fresh(a.seed.as_deref())?;
    let (sk, pk) = keygen_with(&params, &seed, mode, construction)?;
    let base = a.out.as_os_str().to_owned();
    let with_ext = |ext: &str| {
        let mut p = base.clone();
        p.push(ext);
        PathBuf::from(p)
    };
    write_bytes(&with_ext(".key"), keyfile::write_private(&sk).as_bytes())?;
    write_bytes(&with_ext(".pub"), keyfile::write_public(&pk).as_bytes())?;
    println!(
        "n={} k={} m={} t'={} public key payload {} bits",
        params.n(),
        params.k(),
        params.m(),
        params.t_prime(),
        pk.payload_bits()
    );
    Ok(())
}

fn encrypt(a: &EncryptArgs) -> CliResult<()> {
    let pk = keyfile::read_public(&read_text(&a.pk)?)?;
    let msg = fs::read(&a.input).map_err(|e| Failure::Io(a.input.clone(), e))?;
    let seed = seed_or_fresh(a.seed.as_deref())?;
    let ct = encrypt_bytes(&pk, &msg, &mut seed.rng(Stream::ErrorVector))?;
    write_bytes(&a.out, ct.to_text().as_bytes())
}

fn decrypt(a: &DecryptArgs) -> CliResult<()> {
    let sk = keyfile::read_private(&read_text(&a.sk)?)?;
    let ct = Ciphertext::parse(&read_text(&a.input)?)?;
    let cfg = a.decoder.config(sk.params.d_v, sk.params.t_prime(), sk.params.n());
    let msg = decrypt_bytes(&sk, &ct, &cfg)?;
    write_bytes(&a.out, &msg)
}

fn threshold(a: &ThresholdArgs) -> CliResult<()> {
    let d_vs = parse_list(&a.dv, "d_v")?;
    let ps = parse_list(&a.p, "p")?;
    let rows = threshold_grid(a.n0, &d_vs, &ps)?;
    emit(a.out.as_deref(), &threshold_csv(&rows))
}

fn wf(a: &WfArgs) -> CliResult<()> {
    let ps = parse_list(&a.p, "p")?;
    let (name, xs) = match a.attack {
        AttackArg::Dca => ("d_v_prime", a.dv_prime.as_deref()),
        AttackArg::Isda => ("t", a.t.as_deref()),
    };
    let xs = match xs {
        Some(s) => parse_list(s, name)?,
        None => {
            let flag = if matches!(a.attack, AttackArg::Dca) { "--dv-prime" } else { "--t" };
            return Err(Failure::Usage(format!("{flag} is required for this attack")));
        }
    };
    let mut rows: Vec<WfRow> = Vec::new();
    for &p in &ps {
        rows.extend(match a.attack {
            AttackArg::Dca => dca_curve(a.n0, p, &xs)?,
            AttackArg::Isda => isda_curve(a.n0, p, &xs)?,
        });
    }
    emit(a.out.as_deref(), &wf_csv(name, &rows))
}

fn optimize(a: &OptimizeArgs) -> CliResult<()> {
    let mut cfg = OptimizerConfig::new(a.security, a.n0);
    cfg.iterations = a.iterations;
    cfg.alpha = a.alpha;
    if let Some(dv) = &a.dv {
        cfg.d_v_candidates = parse_list(dv, "d_v")?;
    }
    if let Some(grid) = &a.p_grid {
        cfg.p_grid = parse_list(grid, "p")?;
    }
    cfg.p_ref = a.p_ref;
    let report = optimize_design(&cfg)?;
    let text = if a.csv { report.to_csv() } else { report.to_table() };
    emit(a.out.as_deref(), &text)
}

fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let sk = keyfile::read_private(&read_text(&a.key)?)?;
    let ts = parse_list(&a.t, "t")?;
    let seed = seed_or_fresh(a.seed.as_deref())?;
    let mode = match a.codeword {
        CodewordArg::Zero => CodewordMode::Zero,
        CodewordArg::Random => CodewordMode::Random,
    };
    let mut reports = Vec::new();
    for &t in &ts {
        let cfg = a.decoder.config(sk.params.d_v, t, sk.params.n());
        reports.push(run_trials_with(&sk.h, &cfg, t, a.trials, &seed, mode)?);
    }
    eprintln!("seed {seed}");
    emit(a.out.as_deref(), &reports_csv(&reports))
}

fn inspect(a: &InspectArgs) -> CliResult<()> {
    let text = read_text(&a.key)?;
    let key = keyfile::read_key(&text)?;
    let (params, mode, kind) = match &key {
        KeyFile::Public(pk) => (&pk.params, pk.mode, "public"),
        KeyFile::Private(sk) => (&sk.params, sk.mode, "private"),
    };
    let w: Vec<String> = params.w.iter().map(|r| format!("{r:?}")).collect();
    println!("kind       {kind}");
    println!("mode       {mode}");
    println!("n0 p       {} {}", params.n0, params.p);
    println!("n k        {} {}", params.n(), params.k());
    println!("d_v        {}", params.d_v);
    println!("W          {}", w.join(" "));
    println!("m          {} (max row weight {})", params.m(), params.m_max());
    println!("d_v'       {}", params.d_v_prime());
    println!("t t'       {} {}", params.t, params.t_prime());
    match &key {
        KeyFile::Public(pk) => {
            println!("payload    {} blocks, {} bits", pk.payload_blocks().len(), pk.payload_bits());
        }
        KeyFile::Private(sk) => {
            let h_weights: Vec<usize> = sk.h.blocks().iter().map(|b| b.weight()).collect();
            println!("H weights  {h_weights:?}");
            println!("Q weights  {:?}", sk.q.weights());
            println!("scrambler  {}", if sk.s.is_some() { "dense S" } else { "none" });
            println!("seed       {}", sk.seed);
        }
    }
    println!("file size  {} bytes", text.len());
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(jobs) = cli.jobs.or_else(jobs_from_env) {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match &cli.command {
        Command::Keygen(a) => keygen(a),
        Command::Encrypt(a) => encrypt(a),
        Command::Decrypt(a) => decrypt(a),
        Command::Threshold(a) => threshold(a),
        Command::Wf(a) => wf(a),
        Command::Optimize(a) => optimize(a),
        Command::Simulate(a) => simulate(a),
        Command::Inspect(a) => inspect(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            eprintln!("category: {}", e.category());
            ExitCode::from(1)
        }
        Err(Failure::Io(path, e)) => {
            eprintln!("error: {}: {e}", path.display());
            eprintln!("category: IoError");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("category: UsageError");
            ExitCode::from(2)
        }
    }
}
