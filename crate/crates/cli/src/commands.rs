use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use lidar_cfe::cfe::{generate_cfes, verify_result};
use lidar_cfe::par;
use lidar_cfe::scan::{assemble_state, GoalFeatures, Scan};

use crate::error::{write_text, CliError, CliResult};
use crate::files::{LoadedQuery, Scenario};
use crate::model_spec::{file_sha256, ModelShape, ModelSpec};
use crate::plot;
use crate::results::{Manifest, ResultsFile};

pub const OUT_ENV: &str = "LIDAR_CFE_OUT";
pub const DEFAULT_OUT: &str = "lidar-cfe-out";

/// `--out`, else `$LIDAR_CFE_OUT`, else `./lidar-cfe-out`.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

pub struct ScanOutput {
    pub scan_file: PathBuf,
    pub plot_file: PathBuf,
}

pub fn scan(scenario_path: &Path, out: &Path) -> CliResult<ScanOutput> {
    let scenario = Scenario::load(scenario_path)?;
    let scan = scenario.scan()?;
    let scan_file = out.join(format!("{}.scan.json", scenario.name));
    let plot_file = out.join(format!("{}.scan.svg", scenario.name));
    write_text(&scan_file, &scan.to_json())?;
    write_text(&plot_file, &plot::scan_svg(&scenario.name, &scan.scan, &scan.goal))?;
    Ok(ScanOutput { scan_file, plot_file })
}

pub struct ExplainArgs {
    pub query: PathBuf,
    pub model: ModelSpec,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub overrides: Vec<String>,
    pub timeout: Duration,
    pub plots: bool,
    pub command: Vec<String>,
}

pub struct ExplainOutput {
    pub results_file: PathBuf,
    pub manifest_file: PathBuf,
    pub results: ResultsFile,
    pub duration: Duration,
}

pub fn explain(args: &ExplainArgs) -> CliResult<ExplainOutput> {
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    let loaded = LoadedQuery::load(&args.query, &overrides)?;
    let LoadedQuery { query, mut ga, source, .. } = loaded;
    if args.workers == Some(0) {
        ga.parallel = false;
    }
    let shape = ModelShape {
        n_rays: query.base_scan.len(),
        max_range: query.base_scan.max_range(),
        outputs: query.bounds.len(),
        timeout: args.timeout,
    };
    let model = args.model.load(shape)?;
    let (inputs, outputs) = (model.model.input_len(), model.model.output_len());
    if inputs != query.base_scan.len() + 3 || outputs != query.bounds.len() {
        return Err(CliError::Model(lidar_cfe::model::ModelError::Config(format!(
            "model maps {inputs} inputs to {outputs} outputs; the query needs {} to {}",
            query.base_scan.len() + 3,
            query.bounds.len()
        ))));
    }

    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let batch = par::with_workers(args.workers.filter(|&w| w > 0), || generate_cfes(&query, &*model.model, &ga))?;
    let duration = clock.elapsed();

    for r in &batch.results {
        let found = verify_result(&query, &*model.model, r)?;
        if !found.is_empty() {
            return Err(CliError::Internal(format!("run {} does not reproduce: {found:?}", r.run_index)));
        }
    }

    let results = ResultsFile::new(model.id.clone(), query.clone(), ga.clone(), batch);
    let results_file = args.out.join("results.json");
    write_text(&results_file, &results.to_json())?;

    if args.plots {
        write_text(&args.out.join("base.svg"), &plot::scan_svg("base", &query.base_scan, &query.goal))?;
        for (rank, r) in results.results.iter().enumerate() {
            let title = format!(
                "CFE {rank} (run {}) action [{}] {}",
                r.run_index,
                r.achieved_action.values().iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(", "),
                if r.satisfied { "satisfied" } else { "not satisfied" }
            );
            let svg = plot::cfe_svg(&title, &query.base_scan, &r.combined_scan, &r.obstacles, &query.goal);
            write_text(&args.out.join(format!("cfe_{rank:03}.svg")), &svg)?;
        }
    }

    let manifest = Manifest {
        tool: "lidar-cfe".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: args.command.clone(),
        query_file: args.query.display().to_string(),
        query_sha256: file_sha256(&args.query)?,
        base_source: source.display().to_string(),
        model: model.id,
        seeds: (0..query.n_cfes as u64).map(|i| query.rng_seed.wrapping_add(i)).collect(),
        query,
        parallel: ga.parallel && par::available(),
        ga,
        workers: args.workers,
        results_file: "results.json".into(),
        results_sha256: file_sha256(&results_file)?,
        started_unix_s: started,
        duration_s: duration.as_secs_f64(),
    };
    let manifest_file = args.out.join("manifest.json");
    write_text(&manifest_file, &manifest.to_json())?;
    Ok(ExplainOutput { results_file, manifest_file, results, duration })
}

pub struct ValidateReport {
    pub spec: String,
    pub description: String,
    pub inputs: usize,
    pub outputs: usize,
    pub action: Vec<f64>,
    pub latency: Duration,
}

impl std::fmt::Display for ValidateReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ok")?;
        writeln!(f, "model: {} ({})", self.spec, self.description)?;
        writeln!(f, "inputs: {}", self.inputs)?;
        writeln!(f, "outputs: {}", self.outputs)?;
        writeln!(f, "probe action: {:?}", self.action)?;
        write!(f, "latency: {:.3} ms", self.latency.as_secs_f64() * 1e3)
    }
}

/// Loads the model and probes it with an empty scan and a goal straight
/// ahead at distance 0.
pub fn validate_model(spec: &ModelSpec, shape: ModelShape) -> CliResult<ValidateReport> {
    let loaded = spec.load(shape)?;
    let model = &*loaded.model;
    let n_rays = model.input_len().checked_sub(3).filter(|&n| n > 0).ok_or_else(|| {
        CliError::Input(format!("model takes {} inputs; at least 4 are needed", model.input_len()))
    })?;
    let probe = assemble_state(&Scan::empty(n_rays, shape.max_range), &GoalFeatures::from_bearing(0.0, 0.0)?, 1.0);
    let clock = Instant::now();
    let action = model.act(&probe)?;
    let latency = clock.elapsed();
    if action.len() != model.output_len() {
        return Err(CliError::Model(lidar_cfe::model::ModelError::Config(format!(
            "declared {} outputs, produced {}",
            model.output_len(),
            action.len()
        ))));
    }
    Ok(ValidateReport {
        spec: loaded.id.spec,
        description: loaded.id.description,
        inputs: model.input_len(),
        outputs: model.output_len(),
        action: action.values().to_vec(),
        latency,
    })
}
