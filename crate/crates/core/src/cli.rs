//! Command-line front end. Every command writes CSV (or mixture JSON) and
//! CSV outputs start with one `#`-prefixed JSON line recording the tool
//! version, seed and full parameter set.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::density::{Gaussian1D, TruthContext};
use crate::error::FusionError;
use crate::ffusion::mse_surface;
use crate::gmfusion::{gm_aa, gm_ga_fold, isolated_peak_pair, reduce, ExtractionRule, GaussianMixture, ReductionParams};
use crate::montecarlo::{
    empirical_mse, sample_pairs, sweep_samples, CorrelatedPairSpec, PairFamily, DEFAULT_GRID_SIZE, DEFAULT_SAMPLES,
};
use crate::scenario::{run_trials, FusionRule, ScenarioSpec, TrialConfig};
use crate::vfusion::{aa_mse_two, MseCorrelation};
use crate::weights::FusionWeights;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "avgfusion", version, about = "Arithmetic vs geometric average fusion experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo mean and variance of the AA and GA over a fusion-weight sweep.
    VVar(VVarArgs),
    /// Monte Carlo MSE of the AA and GA about one or more true values.
    VMse(VMseArgs),
    /// Closed-form variance and MSE of Gaussian AA/GA over a (θ, ω₁) grid.
    FSurface(FSurfaceArgs),
    /// AA or approximate GA of Gaussian mixtures.
    GmFuse(GmFuseArgs),
    /// Repeated multi-sensor detection trials scored under AA and GA.
    Scenario(ScenarioArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    Gaussian,
    Poisson,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PairArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 50.0)]
    pub mu1: f64,
    #[arg(long, default_value_t = 60.0)]
    pub mu2: f64,
    #[arg(long, default_value_t = 100.0)]
    pub s1: f64,
    #[arg(long, default_value_t = 200.0)]
    pub s2: f64,
    /// Poisson rate of the first source.
    #[arg(long, default_value_t = 12.0)]
    pub l1: f64,
    /// Poisson rate of the second source.
    #[arg(long, default_value_t = 10.0)]
    pub l2: f64,
    /// Number of interior fusion weights ω₁ = k/(grid+1).
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    pub grid: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl PairArgs {
    fn family(&self) -> Result<PairFamily, FusionError> {
        Ok(match self.family {
            FamilyArg::Gaussian => PairFamily::TruncatedGaussian {
                first: Gaussian1D::new(self.mu1, self.s1)?,
                second: Gaussian1D::new(self.mu2, self.s2)?,
            },
            FamilyArg::Poisson => PairFamily::Poisson {
                rate1: self.l1,
                rate2: self.l2,
            },
        })
    }

    fn spec(&self, rho: f64) -> Result<CorrelatedPairSpec, FusionError> {
        Ok(CorrelatedPairSpec {
            family: self.family()?,
            target_rho: rho,
            n_samples: self.n,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VVarArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Target correlations, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,0.4,0.71")]
    pub rho: Vec<f64>,
    /// Truth used for the MSE columns of the sweep (not written here).
    #[arg(long, default_value_t = 55.0)]
    pub theta: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VMseArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,0.71")]
    pub rho: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "45,55,65")]
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SurfacePreset {
    #[value(name = "100-200")]
    #[serde(rename = "100-200")]
    Narrow,
    #[value(name = "400-200")]
    #[serde(rename = "400-200")]
    Wide,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FSurfaceArgs {
    #[arg(long, value_enum, default_value = "100-200")]
    pub preset: SurfacePreset,
    #[arg(long)]
    pub mu1: Option<f64>,
    #[arg(long)]
    pub s1: Option<f64>,
    #[arg(long)]
    pub mu2: Option<f64>,
    #[arg(long)]
    pub s2: Option<f64>,
    #[arg(long, default_value_t = 40.0)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 80.0)]
    pub theta_max: f64,
    #[arg(long, default_value_t = 41)]
    pub theta_steps: usize,
    /// Points for ω₁ over [0, 1], endpoints included.
    #[arg(long, default_value_t = 101)]
    pub omega_steps: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    Aa,
    Ga,
}

impl From<RuleArg> for FusionRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Aa => FusionRule::Aa,
            RuleArg::Ga => FusionRule::Ga,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum GmPreset {
    Fig5,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReductionArgs {
    /// Reduce the fused mixture (and every GA fold step).
    #[arg(long)]
    pub reduce: bool,
    #[arg(long, default_value_t = crate::gmfusion::DEFAULT_PRUNE_THRESHOLD)]
    pub prune: f64,
    #[arg(long, default_value_t = crate::gmfusion::DEFAULT_MERGE_THRESHOLD)]
    pub merge: f64,
    #[arg(long, default_value_t = crate::gmfusion::DEFAULT_MAX_COMPONENTS)]
    pub max_components: usize,
}

impl ReductionArgs {
    fn params(&self) -> Result<ReductionParams, FusionError> {
        ReductionParams::new(self.prune, self.merge, self.max_components)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GmFuseArgs {
    /// JSON file holding an array of mixtures, each an array of {weight, mean, variance}.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<GmPreset>,
    #[arg(long, value_enum, default_value = "ga")]
    pub rule: RuleArg,
    /// Fusion weights, comma separated; equal weights when omitted.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[command(flatten)]
    pub reduction: ReductionArgs,
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    /// Fused mixture JSON; stdout when omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Density table of every input and the fused mixture.
    #[arg(long)]
    #[serde(skip)]
    pub density_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ScenarioPreset {
    Fig6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioRuleArg {
    Aa,
    Ga,
    Both,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScenarioArgs {
    /// JSON scenario spec; missing fields take the preset defaults.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<ScenarioPreset>,
    #[arg(long, value_enum, default_value = "both")]
    pub rule: ScenarioRuleArg,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Base seed; overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// `threshold:<tau>` or `rank:<n>`.
    #[arg(long, default_value = "threshold:0.01", value_parser = parse_extraction)]
    pub extraction: ExtractionRule,
    #[arg(long, default_value_t = 10.0)]
    pub gate: f64,
    #[arg(long, default_value_t = crate::gmfusion::DEFAULT_PRUNE_THRESHOLD)]
    pub prune: f64,
    #[arg(long, default_value_t = crate::scenario::SCENARIO_MERGE_THRESHOLD)]
    pub merge: f64,
    #[arg(long, default_value_t = crate::gmfusion::DEFAULT_MAX_COMPONENTS)]
    pub max_components: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn parse_extraction(s: &str) -> Result<ExtractionRule, String> {
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| format!("expected threshold:<tau> or rank:<n>, got {s:?}"))?;
    match kind {
        "threshold" => {
            let tau: f64 = value.parse().map_err(|e| format!("{value:?}: {e}"))?;
            ExtractionRule::threshold(tau).map_err(|e| e.to_string())
        }
        "rank" => value
            .parse()
            .map(ExtractionRule::rank)
            .map_err(|e| format!("{value:?}: {e}")),
        other => Err(format!("unknown extraction rule {other:?}")),
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        match e {
            FusionError::InvalidParameter(_)
            | FusionError::InvalidWeights(_)
            | FusionError::LengthMismatch { .. }
            | FusionError::InfeasibleCorrelation { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes the metadata line and returns a CSV writer positioned after it.
fn csv_out(
    path: Option<&Path>,
    command: &str,
    seed: Option<u64>,
    params: &impl Serialize,
) -> CliResult<csv::Writer<Box<dyn Write>>> {
    let mut w = open_out(path)?;
    let meta = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "params": params,
    });
    writeln!(w, "# {meta}")?;
    Ok(csv::Writer::from_writer(w))
}

#[derive(Serialize)]
struct VarRow {
    rho_target: f64,
    rho_achieved: f64,
    omega1: f64,
    aa_mean: f64,
    aa_var: f64,
    ga_mean: f64,
    ga_var: f64,
    aa_var_se: f64,
    ga_var_se: f64,
}

fn v_var(args: &VVarArgs) -> CliResult<()> {
    let truth = TruthContext::new(args.theta)?;
    let mut rows = Vec::new();
    for &rho in &args.rho {
        let pairs = sample_pairs(&args.pair.spec(rho)?)?;
        let r = sweep_samples(&pairs, truth, args.pair.grid)?;
        log::info!("rho {rho}: achieved {:.5}", r.achieved_rho);
        for i in 0..r.len() {
            rows.push(VarRow {
                rho_target: rho,
                rho_achieved: r.achieved_rho,
                omega1: r.weights_grid[i],
                aa_mean: r.aa_mean[i],
                aa_var: r.aa_var[i],
                ga_mean: r.ga_mean[i],
                ga_var: r.ga_var[i],
                aa_var_se: r.aa_var_se[i],
                ga_var_se: r.ga_var_se[i],
            });
        }
    }
    let mut w = csv_out(args.pair.out.as_deref(), "v-var", Some(args.pair.seed), args)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MseRow {
    rho_target: f64,
    rho_achieved: f64,
    theta: f64,
    omega1: f64,
    aa_mean: f64,
    aa_var: f64,
    aa_mse: f64,
    ga_mean: f64,
    ga_var: f64,
    ga_mse: f64,
    aa_mse_closed_form: f64,
    beta: f64,
}

fn v_mse(args: &VMseArgs) -> CliResult<()> {
    let mut rows = Vec::new();
    for &rho in &args.rho {
        let pairs = sample_pairs(&args.pair.spec(rho)?)?;
        for &theta in &args.theta {
            let truth = TruthContext::new(theta)?;
            let r = sweep_samples(&pairs, truth, args.pair.grid)?;
            let e = empirical_mse(&pairs, truth);
            let beta = MseCorrelation::new(e.beta)?;
            for i in 0..r.len() {
                let w = FusionWeights::pair(r.weights_grid[i])?;
                rows.push(MseRow {
                    rho_target: rho,
                    rho_achieved: r.achieved_rho,
                    theta,
                    omega1: r.weights_grid[i],
                    aa_mean: r.aa_mean[i],
                    aa_var: r.aa_var[i],
                    aa_mse: r.aa_mse[i],
                    ga_mean: r.ga_mean[i],
                    ga_var: r.ga_var[i],
                    ga_mse: r.ga_mse[i],
                    aa_mse_closed_form: aa_mse_two(e.mse1, e.mse2, beta, &w)?,
                    beta: e.beta,
                });
            }
        }
    }
    let mut w = csv_out(args.pair.out.as_deref(), "v-mse", Some(args.pair.seed), args)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> CliResult<Vec<f64>> {
    match n {
        0 => Err(CliError::Usage("grid needs at least one point".into())),
        1 => Ok(vec![lo]),
        _ => Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()),
    }
}

fn f_surface(args: &FSurfaceArgs) -> CliResult<()> {
    let s1_default = match args.preset {
        SurfacePreset::Narrow => 100.0,
        SurfacePreset::Wide => 400.0,
    };
    let g1 = Gaussian1D::new(args.mu1.unwrap_or(50.0), args.s1.unwrap_or(s1_default))?;
    let g2 = Gaussian1D::new(args.mu2.unwrap_or(60.0), args.s2.unwrap_or(200.0))?;
    if !(args.theta_min <= args.theta_max) {
        return Err(CliError::Usage("theta-min must not exceed theta-max".into()));
    }
    let thetas = linspace(args.theta_min, args.theta_max, args.theta_steps)?;
    let omegas = linspace(0.0, 1.0, args.omega_steps)?;
    let points = mse_surface(&g1, &g2, &thetas, &omegas)?;
    let mut w = csv_out(args.out.as_deref(), "f-surface", None, args)?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Fuses `gms` as the `gm-fuse` command does.
pub fn fuse_mixtures(
    gms: &[GaussianMixture],
    rule: FusionRule,
    weights: Option<&FusionWeights>,
    reduction: Option<&ReductionParams>,
) -> Result<GaussianMixture, FusionError> {
    let fused = match gms {
        [] => return Err(FusionError::Empty("mixture list")),
        [only] => only.clone(),
        _ => {
            let uniform;
            let w = match weights {
                Some(w) => w,
                None => {
                    uniform = FusionWeights::uniform(gms.len())?;
                    &uniform
                }
            };
            match rule {
                FusionRule::Aa => gm_aa(gms, w)?,
                FusionRule::Ga => {
                    if gms.iter().any(GaussianMixture::is_empty) {
                        return Err(FusionError::Empty("mixture"));
                    }
                    gm_ga_fold(gms, w, reduction)?
                }
            }
        }
    };
    Ok(match reduction {
        Some(p) => reduce(&fused, p),
        None => fused,
    })
}

fn gm_fuse(args: &GmFuseArgs) -> CliResult<()> {
    let gms: Vec<GaussianMixture> = match (&args.input, args.preset) {
        (Some(path), _) => load_json(path)?,
        (None, Some(GmPreset::Fig5)) => {
            let (a, b) = isolated_peak_pair();
            vec![a, b]
        }
        (None, None) => return Err(CliError::Usage("either --input or --preset is required".into())),
    };
    let weights = args.weights.clone().map(FusionWeights::new).transpose()?;
    let params = args.reduction.params()?;
    let reduction = args.reduction.reduce.then_some(&params);
    let fused = fuse_mixtures(&gms, args.rule.into(), weights.as_ref(), reduction)?;

    let mut out = open_out(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &fused)?;
    writeln!(out)?;
    out.flush()?;

    if let Some(path) = &args.density_csv {
        let all = gms.iter().chain(std::iter::once(&fused)).flat_map(|g| g.components());
        let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            let r = 4.0 * c.variance().sqrt();
            (lo.min(c.mean() - r), hi.max(c.mean() + r))
        });
        let (lo, hi) = (args.x_min.unwrap_or(lo), args.x_max.unwrap_or(hi));
        if !(lo < hi) {
            return Err(CliError::Usage(format!("density range [{lo}, {hi}] is empty")));
        }
        let xs = linspace(lo, hi, args.points)?;
        let mut w = csv_out(Some(path), "gm-fuse", None, args)?;
        let mut header = vec!["x".to_string()];
        header.extend((0..gms.len()).map(|i| format!("input_{i}")));
        header.push("fused".into());
        w.write_record(&header)?;
        for x in xs {
            let mut rec = vec![x.to_string()];
            rec.extend(gms.iter().map(|g| g.density(x).to_string()));
            rec.push(fused.density(x).to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn scenario(args: &ScenarioArgs) -> CliResult<()> {
    let mut spec: ScenarioSpec = match (&args.config, args.preset) {
        (Some(path), _) => load_json(path)?,
        (None, _) => ScenarioSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if !(args.gate > 0.0) {
        return Err(CliError::Usage(format!("gate must be positive, got {}", args.gate)));
    }
    let rules: &[FusionRule] = match args.rule {
        ScenarioRuleArg::Aa => &[FusionRule::Aa],
        ScenarioRuleArg::Ga => &[FusionRule::Ga],
        ScenarioRuleArg::Both => &[FusionRule::Aa, FusionRule::Ga],
    };
    let cfg = TrialConfig {
        spec,
        n_trials: args.trials,
        extraction: args.extraction,
        gate: args.gate,
        reduction: ReductionParams::new(args.prune, args.merge, args.max_components)?,
    };
    let rows = run_trials(&cfg, rules)?;
    let mut w = csv_out(args.out.as_deref(), "scenario", Some(cfg.spec.seed), &cfg)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::VVar(a) => v_var(a),
        Command::VMse(a) => v_mse(a),
        Command::FSurface(a) => f_surface(a),
        Command::GmFuse(a) => gm_fuse(a),
        Command::Scenario(a) => scenario(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
