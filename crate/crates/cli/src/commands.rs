use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context as _, Result};
use clap::Args;
use gqrs_core::copulas::{pseudo_observations, sample_cdm, CopulaSpec, Family};
use gqrs_core::csvio::{read_matrix_file, write_atomic, write_matrix_file, Header};
use gqrs_core::designs::{Design, Randomization};
use gqrs_core::gan::{gan_train, GanConfig, GanModel, GeneratorLoss};
use gqrs_core::gofstats::{cvm_one_sample, cvm_two_sample, Scaling};
use gqrs_core::neuralnet::InitScheme;
use gqrs_core::qrs::{qrs_sample, QrsRequest};
use gqrs_core::risk::{records_csv, summary_csv, summary_svg, variance_study, EsSpec, Method, StudyConfig};
use serde::{Deserialize, Serialize};

use crate::config::{manifest_path, parent_dir, resolve, Manifest};

pub struct Context {
    pub threads: usize,
    pub manifest: Option<PathBuf>,
}

impl Context {
    fn finish(&self, manifest: &Manifest, dir: &Path) -> Result<()> {
        manifest.write(&manifest_path(self.manifest.as_deref(), dir), self.threads)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignName {
    Random,
    #[default]
    Sobol,
    Lhd,
    Oalhd,
}

impl DesignName {
    fn with(self, randomize: Randomization) -> Design {
        match self {
            DesignName::Random => Design::PseudoRandom,
            DesignName::Sobol => Design::Sobol(randomize),
            DesignName::Lhd => Design::Lhd,
            DesignName::Oalhd => Design::OaLhd,
        }
    }
}

/// Copula parameters as given by flags or config; converted on use.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CopulaSettings {
    pub family: Option<String>,
    pub theta: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub d: Option<usize>,
}

impl CopulaSettings {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    fn spec(&self) -> Result<CopulaSpec> {
        let family = self.family.as_deref().context("a copula family is required (--family)")?;
        let theta = || self.theta.context("--theta is required for this family");
        let family = match family {
            "clayton" => Family::Clayton { theta: theta()? },
            "gumbel" => Family::Gumbel { theta: theta()? },
            "marshall-olkin" | "mo" => Family::MarshallOlkin {
                alpha1: self.alpha1.context("--alpha1 is required for marshall-olkin")?,
                alpha2: self.alpha2.context("--alpha2 is required for marshall-olkin")?,
            },
            other => bail!("unknown copula family `{other}` (expected clayton, gumbel or marshall-olkin)"),
        };
        let d = match (self.d, family) {
            (Some(d), _) => d,
            (None, Family::MarshallOlkin { .. }) => 2,
            (None, _) => bail!("--d is required for this family"),
        };
        Ok(CopulaSpec::new(family, d)?)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CopulaArgs {
    /// Copula family: clayton, gumbel or marshall-olkin.
    #[arg(long, alias = "against")]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha2: Option<f64>,
    /// Copula dimension.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
}

impl CopulaArgs {
    fn settings(&self) -> CopulaSettings {
        CopulaSettings {
            family: self.family.clone(),
            theta: self.theta,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            d: self.d,
        }
    }
}

fn header(present: bool) -> Header {
    if present {
        Header::Present
    } else {
        Header::Detect
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_csv(path: &Path, m: &ndarray::Array2<f64>) -> Result<()> {
    create_dir(&parent_dir(path))?;
    write_matrix_file(path, m.view()).with_context(|| format!("writing {}", path.display()))
}

fn read_csv(path: &Path, header: Header) -> Result<ndarray::Array2<f64>> {
    read_matrix_file(path, header).with_context(|| format!("reading {}", path.display()))
}

// design ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignSettings {
    pub family: DesignName,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub randomize: Randomization,
    pub out: PathBuf,
}

impl Default for DesignSettings {
    fn default() -> Self {
        Self {
            family: DesignName::Sobol,
            n: 1024,
            k: 2,
            seed: 0,
            randomize: Randomization::DigitalShift,
            out: PathBuf::from("design.csv"),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DesignArgs {
    /// JSON settings file or a previous manifest.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// random, sobol, lhd or oalhd.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<DesignNameArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Sobol randomization: none, digital-shift or owen-scramble.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    randomize: Option<RandomizeArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignNameArg {
    Random,
    Sobol,
    Lhd,
    Oalhd,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomizeArg {
    None,
    DigitalShift,
    OwenScramble,
}

pub fn design(ctx: &Context, args: DesignArgs) -> Result<()> {
    let s: DesignSettings = resolve("design", args.config.as_deref(), &args)?;
    let points = s.family.with(s.randomize).points(s.n, s.k, s.seed)?;
    write_csv(&s.out, points.points())?;
    println!("wrote {} x {} design to {}", s.n, s.k, s.out.display());
    let mut m = Manifest::new("design", &s)?;
    m.artifact(&s.out);
    ctx.finish(&m, &parent_dir(&s.out))
}

// ingest ---------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestSettings {
    pub csv: PathBuf,
    pub header: bool,
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Numeric CSV with one observation per row.
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<PathBuf>,
    /// The first row is a header (otherwise detected automatically).
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    header: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out_dir: Option<PathBuf>,
}

pub fn ingest(ctx: &Context, args: IngestArgs) -> Result<()> {
    let mut s: IngestSettings = resolve("ingest", args.config.as_deref(), &args)?;
    ensure!(!s.csv.as_os_str().is_empty(), "an input CSV is required");
    if s.out_dir.as_os_str().is_empty() {
        s.out_dir = PathBuf::from(".");
    }
    let data = read_csv(&s.csv, header(s.header))?;
    let pseudo = pseudo_observations(data.view())?;
    let out = s.out_dir.join("pseudo.csv");
    write_csv(&out, pseudo.values())?;
    println!("N = {}, d = {}", pseudo.n(), pseudo.d());
    let mut m = Manifest::new("ingest", &s)?;
    m.input(&s.csv);
    m.artifact(&out);
    ctx.finish(&m, &s.out_dir)
}

// train ----------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    pub data: PathBuf,
    pub header: bool,
    pub d: Option<usize>,
    pub k: Option<usize>,
    pub iterations: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    pub gen_hidden: Vec<usize>,
    pub disc_hidden: Vec<usize>,
    pub generator_loss: GeneratorLoss,
    pub init: InitScheme,
    pub out: PathBuf,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let g = GanConfig::default();
        Self {
            data: PathBuf::new(),
            header: false,
            d: None,
            k: None,
            iterations: g.iterations,
            seed: g.seed,
            batch_size: g.batch_size,
            lr_g: g.lr_g,
            lr_d: g.lr_d,
            gen_hidden: g.gen_hidden,
            disc_hidden: g.disc_hidden,
            generator_loss: g.generator_loss,
            init: g.init,
            out: PathBuf::from("model.gqrs.json"),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Training data CSV; it is rank-transformed before training.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    header: bool,
    /// Output dimension d; must match the data.
    #[arg(long = "family-dim")]
    #[serde(rename = "d", skip_serializing_if = "Option::is_none")]
    family_dim: Option<usize>,
    /// Latent dimension (default d).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[arg(long = "iters")]
    #[serde(rename = "iterations", skip_serializing_if = "Option::is_none")]
    iters: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    batch_size: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lr_g: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lr_d: Option<f64>,
    /// Comma-separated generator hidden widths.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    gen_hidden: Option<Vec<usize>>,
    /// Comma-separated discriminator hidden widths.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    disc_hidden: Option<Vec<usize>>,
    /// saturating or non-saturating.
    #[arg(long)]
    #[serde(rename = "generator_loss", skip_serializing_if = "Option::is_none")]
    gen_loss: Option<GenLossArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenLossArg {
    Saturating,
    NonSaturating,
}

pub fn train(ctx: &Context, args: TrainArgs) -> Result<()> {
    let s: TrainSettings = resolve("train", args.config.as_deref(), &args)?;
    ensure!(!s.data.as_os_str().is_empty(), "training data is required (--data)");
    let data = read_csv(&s.data, header(s.header))?;
    let d = s.d.unwrap_or(data.ncols());
    ensure!(d == data.ncols(), "--family-dim {d} does not match the {} data columns", data.ncols());
    let pseudo = pseudo_observations(data.view())?;
    let config = GanConfig {
        k: s.k.unwrap_or(d),
        d,
        gen_hidden: s.gen_hidden.clone(),
        disc_hidden: s.disc_hidden.clone(),
        batch_size: s.batch_size,
        iterations: s.iterations,
        lr_g: s.lr_g,
        lr_d: s.lr_d,
        seed: s.seed,
        generator_loss: s.generator_loss,
        init: s.init,
    };
    let model = gan_train(&pseudo, &config)?;
    create_dir(&parent_dir(&s.out))?;
    write_atomic(&s.out, model.to_json().as_bytes()).with_context(|| format!("writing {}", s.out.display()))?;
    match model.final_loss() {
        Some(l) => println!("trained {} iterations; final disc {:.6}, gen {:.6}", s.iterations, l.disc_loss, l.gen_loss),
        None => println!("no training iterations requested; wrote the initial model"),
    }
    for w in &model.warnings {
        eprintln!("warning: {w}");
    }
    let mut m = Manifest::new("train", &s)?;
    m.input(&s.data);
    m.artifact(&s.out);
    ctx.finish(&m, &parent_dir(&s.out))
}

// sample ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMethod {
    #[default]
    Gan,
    Cdm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleSettings {
    pub method: SampleMethod,
    pub model: Option<PathBuf>,
    pub copula: CopulaSettings,
    pub design: DesignName,
    pub randomize: Randomization,
    pub n: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for SampleSettings {
    fn default() -> Self {
        Self {
            method: SampleMethod::Gan,
            model: None,
            copula: CopulaSettings::default(),
            design: DesignName::Sobol,
            randomize: Randomization::DigitalShift,
            n: 1000,
            seed: 0,
            out: PathBuf::from("samples.csv"),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// gan (trained model) or cdm (parametric copula).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<MethodArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip_serializing_if = "CopulaArgs::is_unset")]
    copula: CopulaArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    design: Option<DesignNameArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    randomize: Option<RandomizeArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

impl CopulaArgs {
    fn is_unset(&self) -> bool {
        self.settings().is_empty()
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Gan,
    Cdm,
}

fn load_model(path: &Path) -> Result<GanModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    GanModel::from_json(&text).with_context(|| format!("loading model {}", path.display()))
}

pub fn sample(ctx: &Context, args: SampleArgs) -> Result<()> {
    let s: SampleSettings = resolve("sample", args.config.as_deref(), &args)?;
    let design = s.design.with(s.randomize);
    let mut m = Manifest::new("sample", &s)?;
    let samples = match s.method {
        SampleMethod::Gan => {
            let path = s.model.as_deref().context("--method gan needs --model")?;
            let model = load_model(path)?;
            m.input(path);
            let out = qrs_sample(&QrsRequest { model: &model, design, n: s.n, seed: s.seed })?;
            if out.clamped > 0 {
                log::info!("{} design coordinates were clamped off the boundary", out.clamped);
            }
            out.samples
        }
        SampleMethod::Cdm => {
            let spec = s.copula.spec()?;
            sample_cdm(&spec, &design.points(s.n, spec.d(), s.seed)?)?
        }
    };
    write_csv(&s.out, &samples)?;
    println!("wrote {} x {} samples to {}", samples.nrows(), samples.ncols(), s.out.display());
    m.artifact(&s.out);
    ctx.finish(&m, &parent_dir(&s.out))
}

// gof ------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GofSettings {
    pub sample: PathBuf,
    pub reference: Option<PathBuf>,
    pub copula: CopulaSettings,
    pub scaling: Scaling,
    pub header: bool,
    pub out: Option<PathBuf>,
}

impl Default for GofSettings {
    fn default() -> Self {
        Self {
            sample: PathBuf::new(),
            reference: None,
            copula: CopulaSettings::default(),
            scaling: Scaling::Sqrt,
            header: false,
            out: None,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GofArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Sample CSV with entries in [0,1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sample: Option<PathBuf>,
    /// Reference sample for the two-sample statistic.
    #[arg(long = "ref")]
    #[serde(rename = "reference", skip_serializing_if = "Option::is_none")]
    reference: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip_serializing_if = "CopulaArgs::is_unset")]
    copula: CopulaArgs,
    /// Two-sample scaling: sqrt or linear.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    scaling: Option<ScalingArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    header: bool,
    /// One-line CSV record (default gof.csv next to the sample).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingArg {
    Sqrt,
    Linear,
}

pub fn gof(ctx: &Context, args: GofArgs) -> Result<()> {
    let s: GofSettings = resolve("gof", args.config.as_deref(), &args)?;
    ensure!(!s.sample.as_os_str().is_empty(), "a sample CSV is required (--sample)");
    let a = read_csv(&s.sample, header(s.header))?;
    let mut m = Manifest::new("gof", &s)?;
    m.input(&s.sample);
    let (kind, other_n, value) = match (&s.reference, s.copula.is_empty()) {
        (Some(_), false) => bail!("give either --ref or a copula family, not both"),
        (Some(r), true) => {
            let b = read_csv(r, header(s.header))?;
            m.input(r);
            let scaling = match s.scaling {
                Scaling::Sqrt => "two-sample-sqrt",
                Scaling::Linear => "two-sample-linear",
            };
            (scaling, b.nrows().to_string(), cvm_two_sample(a.view(), b.view(), s.scaling)?)
        }
        (None, false) => ("one-sample", String::new(), cvm_one_sample(a.view(), &s.copula.spec()?)?),
        (None, true) => bail!("give --ref or a copula family (--against)"),
    };
    println!("{value:.12e}");
    let out = s.out.clone().unwrap_or_else(|| parent_dir(&s.sample).join("gof.csv"));
    let line = format!("statistic,n,m,value\n{kind},{},{other_n},{value:.16e}\n", a.nrows());
    write_atomic(&out, line.as_bytes()).with_context(|| format!("writing {}", out.display()))?;
    m.artifact(&out);
    ctx.finish(&m, &parent_dir(&out))
}

// es-study -------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudySettings {
    pub copula: CopulaSettings,
    pub alpha: f64,
    pub methods: Vec<Method>,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub randomize: Randomization,
    pub model: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for StudySettings {
    fn default() -> Self {
        let c = StudyConfig::default();
        Self {
            copula: CopulaSettings::default(),
            alpha: c.alpha,
            methods: c.methods,
            n_grid: c.n_grid,
            replications: c.replications,
            seed: c.master_seed,
            randomize: c.randomization,
            model: None,
            out_dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct StudyArgs {
    /// Study settings JSON (or a previous manifest).
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip_serializing_if = "CopulaArgs::is_unset")]
    copula: CopulaArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    /// Comma-separated methods, e.g. cdm-mc,cdm-sobol,gan-sobol.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    methods: Option<Vec<String>>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    replications: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    randomize: Option<RandomizeArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out_dir: Option<PathBuf>,
}

pub fn es_study(ctx: &Context, args: StudyArgs) -> Result<()> {
    let s: StudySettings = resolve("es-study", args.config.as_deref(), &args)?;
    let copula = s.copula.spec()?;
    let es = EsSpec::new(s.alpha, copula.d())?;
    let mut m = Manifest::new("es-study", &s)?;
    let model = match &s.model {
        Some(p) => {
            m.input(p);
            Some(load_model(p)?)
        }
        None => None,
    };
    let config = StudyConfig {
        alpha: s.alpha,
        methods: s.methods.clone(),
        n_grid: s.n_grid.clone(),
        replications: s.replications,
        master_seed: s.seed,
        randomization: s.randomize,
    };
    let out = variance_study(&es, &copula, model.as_ref(), &config)?;
    for reason in &out.skipped {
        eprintln!("skipped {reason}");
    }
    create_dir(&s.out_dir)?;
    let files = [
        ("records.csv", records_csv(&out.records)),
        ("summary.csv", summary_csv(&out.summary)),
        ("summary.svg", summary_svg(&out.summary)),
    ];
    for (name, body) in &files {
        let path = s.out_dir.join(name);
        write_atomic(&path, body.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
        m.artifact(&path);
    }
    println!("{} records, {} summary rows in {}", out.records.len(), out.summary.len(), s.out_dir.display());
    ctx.finish(&m, &s.out_dir)
}
