use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sectorize::config::RunConfig;
use sectorize::cost::{build_context, sector_cost, CostReport};
use sectorize::error::Result;
use sectorize::formats;
use sectorize::geometry::Polygon;
use sectorize::render::{render_to_file, Overlays};
use sectorize::scenario::{generate_scenario, sweep_seed, CriticalPoint, Flow, ScenarioParams};
use sectorize::search::optimize;
use sectorize::subdivision::PlanarSubdivision;
use sectorize::throughput::WeatherObstacle;
use sectorize::traffic::Trajectory;

#[derive(Parser)]
#[command(name = "sectorize", version, about = "Local sector-boundary optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Sectorization file (JSON).
    #[arg(long)]
    sectors: PathBuf,
    /// Track CSV: flight_id,time_s,lon_deg,lat_deg.
    #[arg(long)]
    tracks: PathBuf,
    /// Dominant flows (JSON), optional.
    #[arg(long)]
    flows: Option<PathBuf>,
    /// Critical points (JSON), optional.
    #[arg(long)]
    critical_points: Option<PathBuf>,
    /// Weather obstacles (JSON), optional.
    #[arg(long)]
    weather: Option<PathBuf>,
    /// Run configuration (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Locally optimize a sectorization against traffic and constraints.
    Optimize {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also render before/after SVG files.
        #[arg(long)]
        svg: bool,
    },
    /// Evaluate the cost report for a sectorization without changing it.
    Evaluate {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Build a balanced-workload seed partition by sweeping the domain.
    SeedSweep {
        /// Sectorization providing the domain via its outer boundary.
        #[arg(long)]
        sectors: PathBuf,
        #[arg(long)]
        tracks: PathBuf,
        /// Number of sectors to create.
        #[arg(long, default_value_t = 4)]
        count: usize,
        /// Sweep direction as "dx,dy".
        #[arg(long, default_value = "1,0")]
        direction: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Generate a synthetic scenario: tracks, critical points, weather.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Render a sectorization and overlays to SVG.
    Render {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

struct Inputs {
    sub: PlanarSubdivision,
    tracks: Vec<Trajectory>,
    flows: Vec<Flow>,
    critical_points: Vec<CriticalPoint>,
    weather: Vec<WeatherObstacle>,
    config: RunConfig,
}

fn load_inputs(args: &InputArgs) -> Result<Inputs> {
    let sub = formats::load_sectorization(&args.sectors)?;
    let tracks = formats::load_tracks(&args.tracks)?;
    let flows = match &args.flows {
        Some(p) => formats::load_flows(p)?,
        None => Vec::new(),
    };
    let critical_points = match &args.critical_points {
        Some(p) => formats::load_critical_points(p)?,
        None => Vec::new(),
    };
    let weather = match &args.weather {
        Some(p) => formats::load_weather(p)?,
        None => Vec::new(),
    };
    let config = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    Ok(Inputs { sub, tracks, flows, critical_points, weather, config })
}

fn reports_for(inputs: &Inputs, sub: &PlanarSubdivision) -> Result<Vec<(String, CostReport)>> {
    let specs = inputs.config.constraint_specs();
    let opts = inputs.config.eval_options();
    (0..sub.faces.len())
        .map(|f| {
            let ctx = build_context(
                sub,
                f,
                &inputs.tracks,
                &inputs.flows,
                &inputs.critical_points,
                &inputs.weather,
                opts,
            )?;
            Ok((sub.faces[f].name.clone(), sector_cost(&ctx, &specs)?))
        })
        .collect()
}

fn overlays_with_costs<'a>(inputs: &'a Inputs, reports: &[(String, CostReport)]) -> Overlays<'a> {
    Overlays {
        flows: &inputs.flows,
        critical_points: &inputs.critical_points,
        weather: &inputs.weather,
        costs: reports.iter().enumerate().map(|(f, (_, r))| (f, r.total)).collect(),
    }
}

fn run_optimize(inputs: &Inputs, out_dir: &Path, svg: bool) -> Result<bool> {
    std::fs::create_dir_all(out_dir)?;
    let before = reports_for(inputs, &inputs.sub)?;
    formats::save_cost_report(&before, &out_dir.join("report_before.csv"))?;
    if svg {
        render_to_file(
            &inputs.sub,
            &overlays_with_costs(inputs, &before),
            &out_dir.join("before.svg"),
        )?;
    }

    let specs = inputs.config.constraint_specs();
    let opts = inputs.config.eval_options();
    let cfg = inputs.config.search_config();
    let cost_fn = |sub: &PlanarSubdivision, f: usize| -> Result<f64> {
        let ctx =
            build_context(sub, f, &inputs.tracks, &inputs.flows, &inputs.critical_points, &inputs.weather, opts)?;
        Ok(sector_cost(&ctx, &specs)?.total)
    };
    let (optimized, log) = optimize(&inputs.sub, &cfg, cost_fn)?;

    formats::save_sectorization(&optimized, &out_dir.join("optimized.json"))?;
    std::fs::write(
        out_dir.join("log.json"),
        serde_json::to_string_pretty(&log)? + "\n",
    )?;
    let after = reports_for(inputs, &optimized)?;
    formats::save_cost_report(&after, &out_dir.join("report_after.csv"))?;
    if svg {
        render_to_file(
            &optimized,
            &overlays_with_costs(inputs, &after),
            &out_dir.join("after.svg"),
        )?;
    }
    log::info!(
        "optimize: {} adjustments, truncated = {}",
        log.entries.len(),
        log.truncated
    );
    Ok(log.truncated)
}

fn run_evaluate(inputs: &Inputs, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let reports = reports_for(inputs, &inputs.sub)?;
    formats::save_cost_report(&reports, &out_dir.join("report.csv"))?;
    Ok(())
}

fn run_seed_sweep(
    sectors: &Path,
    tracks: &Path,
    count: usize,
    direction: &str,
    out_dir: &Path,
) -> Result<()> {
    let sub = formats::load_sectorization(sectors)?;
    let tracks = formats::load_tracks(tracks)?;
    let parts: Vec<f64> = direction
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| {
            sectorize::Error::InvalidInput(format!("bad direction '{direction}', want dx,dy"))
        })?;
    if parts.len() != 2 {
        return Err(sectorize::Error::InvalidInput("direction needs two components".into()));
    }
    let domain: Polygon = sub.outer_boundary()?;
    let seeded = sweep_seed(&domain, &tracks, count, sectorize::geometry::Point::new(parts[0], parts[1]))?;
    std::fs::create_dir_all(out_dir)?;
    formats::save_sectorization(&seeded, &out_dir.join("seed.json"))?;
    Ok(())
}

fn run_generate(seed: u64, out_dir: &Path) -> Result<()> {
    let params = ScenarioParams { seed, ..Default::default() };
    let scenario = generate_scenario(&params)?;
    std::fs::create_dir_all(out_dir)?;
    formats::save_tracks(&scenario.tracks, &out_dir.join("tracks.csv"))?;
    formats::save_flows(&scenario.flows, &out_dir.join("flows.json"))?;
    formats::save_critical_points(
        &scenario.critical_points,
        &out_dir.join("critical_points.json"),
    )?;
    formats::save_weather(&scenario.weather, &out_dir.join("weather.json"))?;
    let domain = sectorize::subdivision::from_face_polygons(&[(
        "s0".to_string(),
        scenario.domain.vertices().to_vec(),
    )])?;
    formats::save_sectorization(&domain, &out_dir.join("domain.json"))?;
    Ok(())
}

fn run_render(inputs: &Inputs, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let reports = reports_for(inputs, &inputs.sub)?;
    render_to_file(
        &inputs.sub,
        &overlays_with_costs(inputs, &reports),
        &out_dir.join("sectors.svg"),
    )?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome: Result<bool> = match &cli.command {
        Command::Optimize { inputs, out_dir, svg } => {
            load_inputs(inputs).and_then(|i| run_optimize(&i, out_dir, *svg))
        }
        Command::Evaluate { inputs, out_dir } => {
            load_inputs(inputs).and_then(|i| run_evaluate(&i, out_dir)).map(|_| false)
        }
        Command::SeedSweep { sectors, tracks, count, direction, out_dir } => {
            run_seed_sweep(sectors, tracks, *count, direction, out_dir).map(|_| false)
        }
        Command::Generate { seed, out_dir } => run_generate(*seed, out_dir).map(|_| false),
        Command::Render { inputs, out_dir } => {
            load_inputs(inputs).and_then(|i| run_render(&i, out_dir)).map(|_| false)
        }
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            log::warn!("iteration cap reached; result truncated");
            ExitCode::from(3)
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(2)
        }
    }
}
