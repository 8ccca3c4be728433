//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use vsmeasure_core::agreement::Category;
use vsmeasure_core::morphology::BoundaryConvention;
use vsmeasure_core::volume::{LabelVolume, Modality, OperativeStatus, SessionMeta};
use vsmeasure_core::{measure_session, MeasurementReport};

use crate::atomic::write_atomic;
use crate::canonical::{load_canonical, save_canonical};
use crate::error::{Error, Result};
use crate::nifti::{import_nifti, LabelMap};
use crate::{agree, batch, report, svg};

#[derive(Parser, Debug)]
#[command(name = "vsmeasure", version, about = "Measure vestibular schwannoma label masks")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a NIfTI-1 label map into the canonical format
    Import(ImportArgs),
    /// Measure one session and write its report
    Measure(MeasureArgs),
    /// Measure every session listed in a manifest
    Batch(BatchArgs),
    /// Agreement statistics between automated and manual diameters
    Agree(AgreeArgs),
    /// Render a slice overlay as SVG
    Render(RenderArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Default)]
enum ConventionArg {
    #[default]
    PixelCenters,
    PixelCorners,
}

impl From<ConventionArg> for BoundaryConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::PixelCenters => BoundaryConvention::PixelCenters,
            ConventionArg::PixelCorners => BoundaryConvention::PixelCorners,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CategoryArg {
    PreopExtrameatal,
    PreopIntrameatalOnly,
    Postop,
}

impl From<CategoryArg> for Category {
    fn from(c: CategoryArg) -> Self {
        match c {
            CategoryArg::PreopExtrameatal => Category::PreopExtrameatal,
            CategoryArg::PreopIntrameatalOnly => Category::PreopIntrameatalOnly,
            CategoryArg::Postop => Category::Postop,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModalityArg {
    #[value(name = "T1C", alias = "t1c")]
    T1C,
    #[value(name = "T2", alias = "t2")]
    T2,
    Unknown,
}

impl From<ModalityArg> for Modality {
    fn from(m: ModalityArg) -> Self {
        match m {
            ModalityArg::T1C => Modality::T1C,
            ModalityArg::T2 => Modality::T2,
            ModalityArg::Unknown => Modality::Unknown,
        }
    }
}

#[derive(Args, Debug)]
struct SessionArgs {
    /// Boundary point convention
    #[arg(long, value_enum, default_value_t)]
    convention: ConventionArg,
    /// Treat the session as post-operative regardless of its header
    #[arg(long)]
    post_op: bool,
}

#[derive(Args, Debug)]
struct ImportArgs {
    /// Input .nii or .nii.gz file
    input: PathBuf,
    /// Output header path (`<name>.vsm.json`)
    #[arg(short = 'o', long)]
    output: PathBuf,
    /// Stored-value to label mapping, e.g. `0=0,1=1,2=2`
    #[arg(long)]
    label_map: Option<String>,
    /// Defaults to the input file name without extension
    #[arg(long)]
    case_id: Option<String>,
    #[arg(long, default_value = "1")]
    session_id: String,
    #[arg(long, value_enum, default_value = "unknown")]
    modality: ModalityArg,
    #[arg(long)]
    post_op: bool,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// Canonical header (`<name>.vsm.json`)
    input: PathBuf,
    /// Report JSON path; standard output when omitted
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Also write the overlay of the chosen slice
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    session: SessionArgs,
}

#[derive(Args, Debug)]
struct BatchArgs {
    /// Manifest CSV (`header_path,operative_status,output_stem`)
    manifest: PathBuf,
    /// Results CSV path
    #[arg(short = 'o', long)]
    output: PathBuf,
    /// Worker threads; 1 runs serially
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t)]
    convention: ConventionArg,
}

#[derive(Args, Debug)]
struct AgreeArgs {
    /// Merged pairs CSV
    #[arg(long, conflicts_with_all = ["auto", "manual"], required_unless_present_all = ["auto", "manual"])]
    pairs: Option<PathBuf>,
    /// Batch results CSV
    #[arg(long, requires = "manual")]
    auto: Option<PathBuf>,
    /// Manual measurements CSV (`case_id,session_id,category,manual_mm,manual_kind`)
    #[arg(long, requires = "auto")]
    manual: Option<PathBuf>,
    /// Restrict to one category; all three by default
    #[arg(long, value_enum)]
    category: Option<CategoryArg>,
    /// Output directory
    #[arg(short = 'o', long)]
    output: PathBuf,
    /// Also write scatter and Bland-Altman SVG plots
    #[arg(long)]
    plots: bool,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Canonical header (`<name>.vsm.json`)
    input: PathBuf,
    /// SVG output path
    #[arg(short = 'o', long)]
    output: PathBuf,
    /// Slice to draw; the chosen diameter's slice by default
    #[arg(long)]
    slice: Option<usize>,
    #[command(flatten)]
    session: SessionArgs,
}

fn load_session(path: &Path, args: &SessionArgs) -> Result<(LabelVolume, MeasurementReport)> {
    let mut vol = load_canonical(path)?;
    if args.post_op {
        vol = vol.with_operative_status(OperativeStatus::PostOp);
    }
    let report = measure_session(&vol, args.convention.into())?;
    Ok((vol, report))
}

fn import(a: ImportArgs) -> Result<()> {
    let map = match &a.label_map {
        Some(s) => LabelMap::parse(s).map_err(|reason| Error::Nifti { path: a.input.clone(), reason })?,
        None => LabelMap::identity(),
    };
    let case_id = a.case_id.clone().unwrap_or_else(|| {
        let name = a.input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        name.trim_end_matches(".gz").trim_end_matches(".nii").to_string()
    });
    let status = if a.post_op { OperativeStatus::PostOp } else { OperativeStatus::PreOp };
    let mut session = SessionMeta::new(case_id, a.session_id.clone(), status);
    session.modality = a.modality.into();
    let vol = import_nifti(&a.input, &map, session)?;
    save_canonical(&vol, &a.output)
}

fn measure(a: MeasureArgs) -> Result<()> {
    let (vol, rep) = load_session(&a.input, &a.session)?;
    let json = report::report_json(&rep);
    let overlay = a.svg.as_ref().map(|_| svg::render_overlay(&vol, &rep)).transpose()?;
    if let (Some(path), Some(text)) = (&a.svg, &overlay) {
        write_atomic(path, text.as_bytes())?;
    }
    match &a.output {
        Some(path) => write_atomic(path, json.as_bytes()),
        None => std::io::stdout().write_all(json.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn run_batch(a: BatchArgs) -> Result<()> {
    let rows = batch::read_manifest(&a.manifest)?;
    let outcomes = batch::run_batch(&rows, a.convention.into(), a.jobs);
    for o in &outcomes {
        if let Err(e) = &o.result {
            eprintln!("vsmeasure: {}: {}", o.row.header_path.display(), e);
        }
    }
    batch::write_outputs(&outcomes, &a.output)
}

fn run_agree(a: AgreeArgs) -> Result<()> {
    let pairs = match (&a.pairs, &a.auto, &a.manual) {
        (Some(p), _, _) => agree::read_pairs(p)?,
        (None, Some(auto), Some(manual)) => agree::join_tables(auto, manual)?,
        _ => unreachable!("clap enforces an input source"),
    };
    let categories: Vec<Category> = match a.category {
        Some(c) => vec![c.into()],
        None => Category::ALL.to_vec(),
    };
    let results = agree::analyse_categories(&pairs, &categories);
    for r in &results {
        if let Err(e) = &r.outcome {
            eprintln!("vsmeasure: {} skipped: {}", r.category.as_str(), e);
        }
    }
    let files = agree::artifacts(&results, a.plots);
    std::fs::create_dir_all(&a.output).map_err(|e| Error::io(&a.output, e))?;
    for (name, text) in files {
        write_atomic(&a.output.join(name), text.as_bytes())?;
    }
    Ok(())
}

fn render(a: RenderArgs) -> Result<()> {
    let (vol, rep) = load_session(&a.input, &a.session)?;
    let text = match a.slice {
        Some(z) => svg::render_slice(&vol, &rep, z)?,
        None => svg::render_overlay(&vol, &rep)?,
    };
    write_atomic(&a.output, text.as_bytes())
}

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Import(a) => import(a),
        Command::Measure(a) => measure(a),
        Command::Batch(a) => run_batch(a),
        Command::Agree(a) => run_agree(a),
        Command::Render(a) => render(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("vsmeasure: {}", e);
            e.exit_code()
        }
    }
}

/// Parses the process arguments; usage errors exit with code 1.
pub fn main() -> ! {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(cli))
}
