//! Command-line front end: `gbtmark <subcommand> [flags]`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attacks::{apply_attack, AttackKind, AttackSpec};
use crate::bench::{bench_dir, BenchConfig, HostFailure, HostRow, Strength};
use crate::codec::{
    assignment_from_key, embed, extract, random_assignment, sequential_assignment, WatermarkBits,
};
use crate::error::{Error, Result};
use crate::imaging::{read_image, write_atomic, write_image, BlockGrid, RasterImage};
use crate::key::WatermarkKey;
use crate::metrics::{format_psnr, psnr_scoped, ssim, AttackScore, MetricReport, PsnrScope};
use crate::optimizer::{
    fitness_attacks, history_csv, optimize_watermarking, IterationSnapshot, FitnessBreakdown,
    OptimizeConfig,
};
use crate::transforms::{GraphKind, GraphPolicy};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;
pub const EXIT_KEY: i32 = 5;

const BLOCK_SIZE: usize = crate::imaging::DEFAULT_BLOCK_SIZE;

/// Semi-blind image watermarking with a per-block Haar DWT, graph transform and SVD.
///
/// Exit codes: 0 success, 1 failure, 2 usage, 3 I/O, 4 capacity, 5 key format.
#[derive(Debug, Parser)]
#[command(name = "gbtmark", version)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a binary watermark with a fixed or key-derived block assignment.
    Embed(EmbedArgs),
    /// Recover the watermark bits using a key.
    Extract(ExtractArgs),
    /// Apply one attack to an image.
    Attack(AttackArgs),
    /// PSNR/SSIM between two images, optionally BER/NC of an embedded mark.
    Metrics(MetricsArgs),
    /// Choose blocks and strengths with the whale optimizer, then embed.
    Optimize(OptimizeArgs),
    /// BER table over a directory of hosts.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Sequential,
    Random,
    FromKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Channel {
    All,
    Embedding,
}

impl From<Channel> for PsnrScope {
    fn from(c: Channel) -> Self {
        match c {
            Channel::All => PsnrScope::AllChannels,
            Channel::Embedding => PsnrScope::EmbeddingChannel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub host: PathBuf,
    #[arg(long)]
    pub watermark: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long)]
    pub key_out: PathBuf,
    #[arg(long, value_enum, default_value = "sequential")]
    pub policy: Policy,
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    /// Key whose blocks and strengths are reused with `--policy from-key`.
    #[arg(long)]
    pub key: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "path-uniform")]
    pub graph: GraphKind,
    #[arg(long, value_enum, default_value = "all")]
    pub channel: Channel,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Original watermark; prints BER and NC against it.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttackParams {
    #[arg(long = "type")]
    pub kind: AttackKind,
    #[arg(long)]
    pub variance: Option<f64>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub kernel: Option<usize>,
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub quality: Option<u8>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl AttackParams {
    pub fn spec(&self) -> Result<AttackSpec> {
        let unused = |name: &str| {
            Err(Error::InvalidArgument(format!(
                "--{name} does not apply to {}",
                self.kind
            )))
        };
        let mut spec = self.kind.default_spec(self.seed);
        match &mut spec {
            AttackSpec::GaussianNoise { variance, .. } | AttackSpec::Speckle { variance, .. } => {
                if let Some(v) = self.variance {
                    *variance = v;
                }
            }
            AttackSpec::SaltPepper { density, .. } => {
                if let Some(d) = self.density {
                    *density = d;
                }
            }
            AttackSpec::MedianFilter { kernel } | AttackSpec::AverageFilter { kernel } => {
                if let Some(k) = self.kernel {
                    *kernel = k;
                }
            }
            AttackSpec::Rescale { scale } => {
                if let Some(s) = self.scale {
                    *scale = s;
                }
            }
            AttackSpec::JpegCompress { quality } => {
                if let Some(q) = self.quality {
                    *quality = q;
                }
            }
        }
        let k = self.kind;
        let noise = matches!(k, AttackKind::GaussianNoise | AttackKind::Speckle);
        let filter = matches!(k, AttackKind::MedianFilter | AttackKind::AverageFilter);
        if self.variance.is_some() && !noise {
            return unused("variance");
        }
        if self.density.is_some() && k != AttackKind::SaltPepper {
            return unused("density");
        }
        if self.kernel.is_some() && !filter {
            return unused("kernel");
        }
        if self.scale.is_some() && k != AttackKind::Rescale {
            return unused("scale");
        }
        if self.quality.is_some() && k != AttackKind::JpegCompress {
            return unused("quality");
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub params: AttackParams,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub channel: Channel,
    /// With `--watermark`, also extract from the test image and score it.
    #[arg(long, requires = "watermark")]
    pub key: Option<PathBuf>,
    #[arg(long, requires = "key")]
    pub watermark: Option<PathBuf>,
    /// Attacks applied to the test image before extraction (comma separated,
    /// default parameters).
    #[arg(long, value_delimiter = ',', requires = "key")]
    pub attacks: Vec<AttackKind>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

/// Optimizer knobs; unset flags fall back to `--config`, then to defaults.
#[derive(Debug, Args)]
pub struct OptimizerFlags {
    /// JSON file with any of: population, max_iter, spiral_constant, seed,
    /// alpha_min, alpha_max, psnr_target, psnr_weight, psnr_scope.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha_min: Option<f64>,
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, value_enum)]
    pub channel: Option<Channel>,
}

impl OptimizerFlags {
    pub fn resolve(&self) -> Result<OptimizeConfig> {
        let mut c = match &self.config {
            Some(p) => OptimizeConfig::load(p)?,
            None => OptimizeConfig::default(),
        };
        if let Some(v) = self.population {
            c.population = v;
        }
        if let Some(v) = self.iterations {
            c.max_iter = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.alpha_min {
            c.alpha_min = v;
        }
        if let Some(v) = self.alpha_max {
            c.alpha_max = v;
        }
        if let Some(v) = self.target {
            c.psnr_target = v;
        }
        if let Some(v) = self.channel {
            c.psnr_scope = v.into();
        }
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub host: PathBuf,
    #[arg(long)]
    pub watermark: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long)]
    pub key_out: PathBuf,
    /// Per-iteration CSV of the best agent.
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Objective attacks (comma separated); defaults to the six-attack suite.
    #[arg(long, value_delimiter = ',')]
    pub attacks: Vec<AttackKind>,
    #[arg(long, default_value = "path-uniform")]
    pub graph: GraphKind,
    #[command(flatten)]
    pub optimizer: OptimizerFlags,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub hosts: PathBuf,
    #[arg(long)]
    pub watermark: PathBuf,
    /// Embed with this fixed strength on sequential blocks instead of optimizing.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Report columns (comma separated); defaults to the report suite.
    #[arg(long, value_delimiter = ',')]
    pub attacks: Vec<AttackKind>,
    #[arg(long, default_value = "path-uniform")]
    pub graph: GraphKind,
    /// Writes the JSON report here.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Writes the text table here.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// What goes to stdout.
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[command(flatten)]
    pub optimizer: OptimizerFlags,
}

fn require_input(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ))
    }
}

fn require_output(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let meta = std::fs::metadata(parent).map_err(|e| Error::io(parent, e))?;
    if !meta.is_dir() || meta.permissions().readonly() {
        return Err(Error::io(
            parent,
            std::io::Error::new(std::io::ErrorKind::PermissionDenied, "not a writable directory"),
        ));
    }
    if path.is_dir() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidInput, "output is a directory"),
        ));
    }
    Ok(())
}

fn load_watermark(path: &Path) -> Result<WatermarkBits> {
    Ok(WatermarkBits::from_image(&read_image(path)?))
}

fn policy_for_key(key: &WatermarkKey) -> Result<GraphPolicy> {
    GraphPolicy::new(key.graph, key.block_size / 2)
}

fn attack_list(kinds: &[AttackKind], seed: u64) -> Vec<AttackSpec> {
    kinds.iter().map(|k| k.default_spec(seed)).collect()
}

fn print_quality(host: &RasterImage, marked: &RasterImage, scope: PsnrScope) -> Result<()> {
    println!("psnr: {} dB", format_psnr(psnr_scoped(host, marked, scope)?));
    println!("ssim: {:.6}", ssim(host, marked)?);
    Ok(())
}

fn cmd_embed(a: &EmbedArgs) -> Result<()> {
    require_input(&a.host)?;
    require_input(&a.watermark)?;
    if let Some(k) = &a.key {
        require_input(k)?;
    }
    require_output(&a.output)?;
    require_output(&a.key_out)?;

    let host = read_image(&a.host)?;
    let wm = load_watermark(&a.watermark)?;
    let policy = GraphPolicy::new(a.graph, BLOCK_SIZE / 2)?;
    let assignment = match a.policy {
        Policy::Sequential => sequential_assignment(wm.len(), a.alpha),
        Policy::Random => {
            let grid = BlockGrid::new(host.width(), host.height(), BLOCK_SIZE)?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            random_assignment(wm.len(), grid.block_count(), a.alpha, &mut rng)?
        }
        Policy::FromKey => {
            let path = a.key.as_ref().ok_or_else(|| {
                Error::InvalidArgument("--policy from-key needs --key".into())
            })?;
            let key = WatermarkKey::load(path)?;
            if key.entries.len() != wm.len() {
                return Err(Error::Key(format!(
                    "key holds {} entries, watermark has {} bits",
                    key.entries.len(),
                    wm.len()
                )));
            }
            assignment_from_key(&key)
        }
    };
    let (marked, key) = embed(&host, &wm, &assignment, &policy)?;
    write_image(&a.output, &marked)?;
    key.save(&a.key_out)?;
    print_quality(&host, &marked, a.channel.into())
}

fn cmd_extract(a: &ExtractArgs) -> Result<()> {
    require_input(&a.image)?;
    require_input(&a.key)?;
    if let Some(r) = &a.reference {
        require_input(r)?;
    }
    require_output(&a.output)?;

    let key = WatermarkKey::load(&a.key)?;
    let image = read_image(&a.image)?;
    let reference = a.reference.as_deref().map(load_watermark).transpose()?;
    if let Some(r) = &reference {
        if (r.width(), r.height()) != (key.wm_width, key.wm_height) {
            return Err(Error::Dimension(format!(
                "reference is {}x{}, key describes {}x{}",
                r.width(),
                r.height(),
                key.wm_width,
                key.wm_height
            )));
        }
    }
    let bits = extract(&image, &key, &policy_for_key(&key)?)?;
    write_image(&a.output, &bits.to_image())?;
    if let Some(r) = &reference {
        let score = AttackScore::compare(r, &bits)?;
        println!("ber: {:.6}", score.ber);
        println!("nc: {:.6}", score.nc);
    }
    Ok(())
}

fn cmd_attack(a: &AttackArgs) -> Result<()> {
    let spec = a.params.spec()?;
    require_input(&a.input)?;
    require_output(&a.output)?;
    let image = read_image(&a.input)?;
    write_image(&a.output, &apply_attack(&image, &spec)?)?;
    println!("{spec}");
    Ok(())
}

fn cmd_metrics(a: &MetricsArgs) -> Result<()> {
    require_input(&a.reference)?;
    require_input(&a.test)?;
    let reference = read_image(&a.reference)?;
    let test = read_image(&a.test)?;
    let mut report = MetricReport {
        psnr: psnr_scoped(&reference, &test, a.channel.into())?,
        ssim: ssim(&reference, &test)?,
        attacks: Default::default(),
    };
    if let (Some(kp), Some(wp)) = (&a.key, &a.watermark) {
        require_input(kp)?;
        require_input(wp)?;
        let key = WatermarkKey::load(kp)?;
        let wm = load_watermark(wp)?;
        let policy = policy_for_key(&key)?;
        report.attacks.insert(
            crate::bench::NO_ATTACK.to_string(),
            AttackScore::compare(&wm, &extract(&test, &key, &policy)?)?,
        );
        for spec in attack_list(&a.attacks, a.seed) {
            let attacked = apply_attack(&test, &spec)?;
            report.attacks.insert(
                spec.kind().name().to_string(),
                AttackScore::compare(&wm, &extract(&attacked, &key, &policy)?)?,
            );
        }
    }
    match a.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Table => {
            println!("psnr: {} dB", format_psnr(report.psnr));
            println!("ssim: {:.6}", report.ssim);
            for (name, s) in &report.attacks {
                println!("{name}: ber {:.6} nc {:.6}", s.ber, s.nc);
            }
        }
    }
    Ok(())
}

fn cmd_optimize(a: &OptimizeArgs) -> Result<()> {
    let config = a.optimizer.resolve()?;
    require_input(&a.host)?;
    require_input(&a.watermark)?;
    require_output(&a.output)?;
    require_output(&a.key_out)?;
    if let Some(h) = &a.history {
        require_output(h)?;
    }
    let host = read_image(&a.host)?;
    let wm = load_watermark(&a.watermark)?;
    let policy = GraphPolicy::new(a.graph, BLOCK_SIZE / 2)?;
    let attacks = if a.attacks.is_empty() {
        fitness_attacks(config.seed)
    } else {
        attack_list(&a.attacks, config.seed)
    };
    let mut progress = |s: &IterationSnapshot<'_, FitnessBreakdown>| {
        if s.iteration == 1 || s.iteration % 10 == 0 || s.iteration == s.max_iter {
            eprintln!(
                "iteration {}/{}: fitness {:.6} psnr {} mean nc {:.4}",
                s.iteration,
                s.max_iter,
                s.best_fitness,
                format_psnr(s.best_info.psnr),
                s.best_info.mean_nc
            );
        }
    };
    let out = optimize_watermarking(&host, &wm, &attacks, &policy, &config, Some(&mut progress))?;
    write_image(&a.output, &out.watermarked)?;
    out.key.save(&a.key_out)?;
    if let Some(h) = &a.history {
        write_atomic(h, history_csv(&out.history).as_bytes())?;
    }
    println!("fitness: {:.6}", out.best.fitness);
    println!("mean nc: {:.6}", out.best.mean_nc);
    print_quality(&host, &out.watermarked, config.psnr_scope)
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    require_input(&a.hosts)?;
    require_input(&a.watermark)?;
    for p in a.output.iter().chain(&a.table) {
        require_output(p)?;
    }
    let opt = a.optimizer.resolve()?;
    let strength = match a.alpha {
        Some(alpha) => Strength::Fixed { alpha },
        None => Strength::Optimized(opt.clone()),
    };
    let mut config = BenchConfig::new(strength, opt.seed);
    config.graph = a.graph;
    if !a.attacks.is_empty() {
        config.attacks = attack_list(&a.attacks, opt.seed);
    }
    let wm = load_watermark(&a.watermark)?;
    let on_host = |r: &std::result::Result<HostRow, HostFailure>| match r {
        Ok(row) => eprintln!(
            "{}: psnr {} ssim {:.4} ber [{}]",
            row.host,
            format_psnr(row.psnr),
            row.ssim,
            row.ber.iter().map(|b| format!("{b:.4}")).collect::<Vec<_>>().join(", ")
        ),
        Err(f) => eprintln!("{}: failed: {}", f.host, f.error),
    };
    let report = bench_dir(&a.hosts, &wm, &config, Some(&on_host))?;
    let json = report.to_json()?;
    let table = report.to_table();
    if let Some(p) = &a.output {
        write_atomic(p, json.as_bytes())?;
    }
    if let Some(p) = &a.table {
        write_atomic(p, table.as_bytes())?;
    }
    match a.format {
        Format::Json => print!("{json}"),
        Format::Table => print!("{table}"),
    }
    if let Some(f) = report.failures.first() {
        return Err(Error::HostsFailed(format!(
            "{} of {} hosts failed (first: {}: {})",
            report.failures.len(),
            report.failures.len() + report.rows.len(),
            f.host,
            f.error
        )));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidArgument("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Embed(a) => cmd_embed(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_SUCCESS,
        Err(e) => {
            eprintln!("gbtmark: {e}");
            e.exit_code()
        }
    }
}
