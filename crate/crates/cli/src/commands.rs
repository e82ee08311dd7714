use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use envadj::io::{self, DataFormat, PointwiseTable, ReportDocument, RunManifest};
use envadj::sim::{render_table, NoiseModel, SimConfig};
use envadj::{analyze, fwer_experiment, permutation_curves, Direction, PvalueReport, TiePolicy};

use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn write_report(dir: &Path, report: &PvalueReport, manifest: &mut RunManifest) -> Result<()> {
    let csv_path = dir.join("report.csv");
    let json_path = dir.join("report.json");
    let manifest_path = dir.join("manifest.json");
    for p in [&csv_path, &json_path, &manifest_path] {
        manifest.outputs.push(display(p));
    }
    write(&csv_path, &io::write_report_csv(&PointwiseTable::from(report)))?;
    write(&json_path, &ReportDocument::new(report, manifest).to_json())?;
    write(&manifest_path, &manifest.stamped().to_json())?;
    println!(
        "M={} direction={} p_+={} ({}) p_+^ERL={} ({})",
        report.n_curves,
        report.direction,
        report.global_minrank,
        report.global_minrank.value(),
        report.global_erl,
        report.global_erl.value()
    );
    Ok(())
}

pub fn adjust(curves_path: &Path, direction: Direction, ties: TiePolicy, output: &Path) -> Result<()> {
    let curves = io::read_curveset(curves_path, ties)?;
    let report = analyze(&curves, direction);
    ensure_dir(output)?;
    let mut manifest = RunManifest::new("adjust");
    manifest.inputs.push(display(curves_path));
    manifest.direction = Some(direction);
    manifest.tie_policy = Some(ties);
    manifest.n_curves = Some(curves.n_curves());
    write_report(output, &report, &mut manifest)
}

pub struct TestArgs<'a> {
    pub data: &'a Path,
    pub direction: Direction,
    pub ties: TiePolicy,
    pub n_curves: usize,
    pub seed: u64,
    pub format: DataFormat,
    pub output: &'a Path,
}

pub fn test(args: &TestArgs<'_>) -> Result<()> {
    let data = io::read_two_group(args.data, args.format)?;
    let curves = permutation_curves(&data, args.n_curves, args.seed)?.with_tie_policy(args.ties)?;
    let report = analyze(&curves, args.direction);
    ensure_dir(args.output)?;
    let curves_path = args.output.join("curves.csv");
    write(&curves_path, &io::write_curveset(&curves))?;

    let mut manifest = RunManifest::new("test");
    manifest.inputs.push(display(args.data));
    manifest.direction = Some(args.direction);
    manifest.tie_policy = Some(args.ties);
    manifest.n_curves = Some(args.n_curves);
    manifest.seed = Some(args.seed);
    manifest.data_format = Some(args.format);
    manifest.outputs.push(display(&curves_path));
    write_report(args.output, &report, &mut manifest)
}

pub fn plot(report_path: &Path, curves_path: &Path, alpha: f64, output: &Path) -> Result<()> {
    let report = io::read_report_json(report_path)?;
    let curves = io::read_curveset(curves_path, TiePolicy::Conservative)?;
    let svg = envadj::plot::render_svg(&curves, &report, alpha)?;
    if envadj::plot::level_envelope(&curves, &report, alpha).is_none() {
        eprintln!("envadj: warning: no envelope attainable at alpha = {alpha}");
    }
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write(output, &svg)?;

    let mut manifest = RunManifest::new("plot");
    manifest.inputs = vec![display(report_path), display(curves_path)];
    manifest.direction = Some(report.direction);
    manifest.n_curves = Some(report.n_curves);
    manifest.alpha = Some(alpha);
    manifest.outputs.push(display(output));
    let mut sidecar = output.as_os_str().to_owned();
    sidecar.push(".manifest.json");
    write(Path::new(&sidecar), &manifest.stamped().to_json())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON config; flags given on the command line override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n0: Option<usize>,
    #[arg(long)]
    n1: Option<usize>,
    /// Number of grid points on [0, 1].
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(short = 'M')]
    n_curves: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    direction: Option<Direction>,
    /// `iid` or `smooth`.
    #[arg(long)]
    noise: Option<String>,
    /// Squared-exponential length-scale for smooth noise.
    #[arg(long)]
    length_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

fn sim_config(args: &SimulateArgs) -> Result<SimConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => SimConfig::default(),
    };
    if let Some(v) = args.n0 {
        cfg.n0 = v;
    }
    if let Some(v) = args.n1 {
        cfg.n1 = v;
    }
    if let Some(v) = args.grid_size {
        cfg.grid_size = v;
    }
    if let Some(v) = args.n_curves {
        cfg.n_curves = v;
    }
    if let Some(v) = args.replicates {
        cfg.replicates = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.direction {
        cfg.direction = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    match args.noise.as_deref() {
        None => {}
        Some("iid") => cfg.noise = NoiseModel::Iid,
        Some("smooth") => cfg.noise = NoiseModel::default(),
        Some(other) => return Err(CliError::Input(format!("unknown noise model {other:?}"))),
    }
    if let Some(rho) = args.length_scale {
        match &mut cfg.noise {
            NoiseModel::Smooth { length_scale } => *length_scale = rho,
            NoiseModel::Iid => {
                return Err(CliError::Input("--length-scale needs smooth noise".into()))
            }
        }
    }
    Ok(cfg)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = sim_config(args)?;
    let result = fwer_experiment(&cfg)?;
    ensure_dir(&args.output)?;
    let json_path = args.output.join("summary.json");
    let table_path = args.output.join("summary.txt");
    let manifest_path = args.output.join("manifest.json");
    let config_path = args.output.join("config.json");

    let mut config_json = serde_json::to_string_pretty(&cfg).expect("config serializes");
    config_json.push('\n');
    write(&config_path, &config_json)?;
    let mut json = serde_json::to_string_pretty(&result).expect("summary serializes");
    json.push('\n');
    let table = render_table(&result);
    write(&json_path, &json)?;
    write(&table_path, &table)?;

    let mut manifest = RunManifest::new("simulate");
    if let Some(c) = &args.config {
        manifest.inputs.push(display(c));
    }
    manifest.direction = Some(cfg.direction);
    manifest.n_curves = Some(cfg.n_curves);
    manifest.seed = Some(cfg.seed);
    manifest.alpha = Some(cfg.alpha);
    manifest.outputs = vec![
        display(&config_path),
        display(&json_path),
        display(&table_path),
        display(&manifest_path),
    ];
    write(&manifest_path, &manifest.stamped().to_json())?;
    print!("{table}");
    Ok(())
}
