//! Pipeline stages behind the subcommands.

use std::path::{Path, PathBuf};

use serde::Serialize;

use stochtopo::geometry::{Point2D, Rect};
use stochtopo::intensity::lambda_max_over;
use stochtopo::placement::{place_mec_pops, ring_reaches, PlacementResult};
use stochtopo::process::{
    assign_intensity_marks, collect_base_stations, generate_cell, generate_cells, matern1_thin, sample_with_bound,
    thin_by_marks, BaseStation, CellGeneration, QuadratureOptions,
};
use stochtopo::rng::{derive_seed, STREAM_SAMPLE, STREAM_TIE_MARKS};
use stochtopo::validation::{
    check_hardcore, check_matern1_witness, check_matern2_witness, check_placement, mc_counts, MonteCarloReport,
};
use stochtopo::{BorderMode, ProcessKind};

use crate::config::{ProcessName, RadiusName, RunConfig, Scenario};
use crate::output::{self, quantize, write_file, Summary};
use crate::{svg, CliError, EXIT_OK, EXIT_UNASSIGNABLE};

/// Command-line values that replace config fields before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub candidate_resolution: Option<f64>,
    pub radius_formula: Option<RadiusName>,
    pub process: Option<ProcessName>,
    pub replications: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(r) = self.candidate_resolution {
            cfg.candidate_resolution = r;
        }
        if let Some(f) = self.radius_formula {
            cfg.radius_formula = f;
        }
        if let Some(p) = self.process {
            cfg.process = p;
        }
        if let Some(n) = self.replications {
            cfg.validation.replications = n;
        }
    }
}

pub fn load_config_str(text: &str, overrides: &Overrides) -> Result<Scenario, CliError> {
    let mut cfg = RunConfig::parse(text)?;
    overrides.apply(&mut cfg);
    Ok(cfg.scenario(text)?)
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    load_config_str(&text, overrides).map_err(|e| match e {
        CliError::Config(c) => CliError::Config(crate::ConfigError { file: Some(path.display().to_string()), ..c }),
        other => other,
    })
}

/// What a stage wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub unassignable: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.unassignable > 0 {
            EXIT_UNASSIGNABLE
        } else {
            EXIT_OK
        }
    }
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn put(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_file(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

/// Generates every targeted cell and checks the hard-core property. Station
/// coordinates are rounded to the precision of `bs.csv`.
type Generated = (Vec<CellGeneration<f64>>, Vec<BaseStation<f64>>);

fn generate(s: &Scenario) -> Result<Generated, CliError> {
    let cells = generate_cells(&s.field, &s.region, &s.targets, &s.generation, s.seed)?;
    for c in &cells {
        check_hardcore(&c.survivors, c.radius, None).map_err(|x| {
            CliError::Invariant(format!(
                "cell {}: stations {} and {} are {} km apart, radius {}",
                c.cell_index, x.first, x.second, x.distance, c.radius
            ))
        })?;
    }
    let mut bss = collect_base_stations(&cells);
    for b in &mut bss {
        b.location = Point2D::new(quantize(b.location.x1), quantize(b.location.x2));
    }
    Ok((cells, bss))
}

fn place(s: &Scenario, bss: &[BaseStation<f64>]) -> Result<PlacementResult<f64>, CliError> {
    let result = place_mec_pops(bss, &s.rings, s.layout, s.budget);
    check_placement(bss, &s.rings, &s.budget, &result).map_err(CliError::Invariant)?;
    Ok(result)
}

fn write_placement(
    w: &mut Writer,
    s: &Scenario,
    bss: &[BaseStation<f64>],
    cells: &[CellGeneration<f64>],
    result: &PlacementResult<f64>,
    draw_svg: bool,
) -> Result<(), CliError> {
    let reach = ring_reaches(&s.rings, &s.budget);
    let pops_text = output::pops_csv(result);
    w.put("pops.csv", &pops_text)?;
    w.put("assignments.csv", &output::assignments_csv(result))?;
    let summary = Summary::new(s.seed, bss.len(), &s.rings, &reach, result, cells);
    w.put("summary.json", &output::to_json(&summary))?;
    if draw_svg {
        let pops = output::parse_pops_csv(&pops_text, "pops.csv")?;
        w.put("map.svg", &svg::render(&s.region.bounds, bss, &pops, &summary.ring_reach_km))?;
    }
    Ok(())
}

/// Generation then placement; writes `bs.csv`, `pops.csv`,
/// `assignments.csv`, `summary.json` and optionally `map.svg`.
pub fn run_full(s: &Scenario, draw_svg: bool) -> Result<Outcome, CliError> {
    let (cells, bss) = generate(s)?;
    let result = place(s, &bss)?;
    let mut w = Writer::new(&s.output_dir)?;
    w.put("bs.csv", &output::bs_csv(&bss))?;
    write_placement(&mut w, s, &bss, &cells, &result, draw_svg)?;
    Ok(Outcome { files: w.files, unassignable: result.unassignable.len() })
}

/// Writes only `bs.csv`.
pub fn generate_bs(s: &Scenario) -> Result<Outcome, CliError> {
    let (_, bss) = generate(s)?;
    let mut w = Writer::new(&s.output_dir)?;
    w.put("bs.csv", &output::bs_csv(&bss))?;
    Ok(Outcome { files: w.files, unassignable: 0 })
}

/// Placement over stations read from `bs_path`.
pub fn place_pops(s: &Scenario, bs_path: &Path, draw_svg: bool) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(bs_path).map_err(|e| CliError::Io(format!("{}: {e}", bs_path.display())))?;
    let bss = output::parse_bs_csv(&text, &bs_path.display().to_string())?;
    let result = place(s, &bss)?;
    let mut w = Writer::new(&s.output_dir)?;
    write_placement(&mut w, s, &bss, &[], &result, draw_svg)?;
    Ok(Outcome { files: w.files, unassignable: result.unassignable.len() })
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationEntry {
    pub cell: usize,
    pub target: u32,
    pub k: f64,
    pub radius_km: f64,
    pub process: &'static str,
    pub replications: usize,
    pub mean: f64,
    pub std_error: f64,
    pub analytic: f64,
    pub z_score: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Skipped {
    pub cell: usize,
    pub process: Option<&'static str>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub z_threshold: f64,
    pub invariant_checks: usize,
    pub reports: Vec<ValidationEntry>,
    pub skipped: Vec<Skipped>,
    pub all_pass: bool,
}

/// Replications per cell that also go through the O(n²) witness checks.
const WITNESS_REPLICATIONS: u64 = 100;

fn process_name(p: ProcessKind) -> &'static str {
    match p {
        ProcessKind::Matern1 => "matern1",
        ProcessKind::Matern2 => "matern2",
    }
}

fn is_constant(field: &stochtopo::intensity::IntensityField<f64>, window: &Rect<f64>) -> bool {
    let n = 16;
    let mut values = (0..n * n).map(|i| {
        let x1 = window.x1_left + (((i % n) as f64) + 0.5) / n as f64 * window.width();
        let x2 = window.x2_bottom + (((i / n) as f64) + 0.5) / n as f64 * window.height();
        field.intensity_at(Point2D::new(x1, x2))
    });
    let first = values.next().unwrap_or(0.0);
    values.all(|v| v == first)
}

/// Monte-Carlo vs quadrature on every configured validation cell, using
/// the cell's calibrated `k` and radius. Writes `validation.json`.
pub fn validate(s: &Scenario) -> Result<(Outcome, ValidationReport), CliError> {
    let v = &s.validation;
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    let mut invariant_checks = 0;
    let quadrature = QuadratureOptions { border: BorderMode::Truncate, ..s.generation.calibration.count_quadrature };
    for &ci in &v.cells {
        let Some(&target) = s.targets.get(&ci) else {
            skipped.push(Skipped { cell: ci, process: None, reason: "no target for this cell".into() });
            continue;
        };
        let cell = s.region.cell(ci).expect("validated cell index");
        let generation = generate_cell(&s.field, &s.region, &cell, target, &s.generation, s.seed)?;
        let scaled = s.field.with_scale(generation.k);
        let window = cell.bounds;
        let r = generation.radius;
        let seed = derive_seed(s.seed, &[ci as u64]);

        let bound = lambda_max_over(&scaled, &cell);
        for i in 0..WITNESS_REPLICATIONS {
            let raw = sample_with_bound(&scaled, &cell, bound, derive_seed(seed, &[i, STREAM_SAMPLE]));
            let m1 = matern1_thin(&raw, r)?;
            check_matern1_witness(&raw.locations(), &m1.locations(), r, None)
                .map_err(|e| CliError::Invariant(format!("cell {ci}, replication {i}, matern1: {e}")))?;
            let marked = assign_intensity_marks(&raw, &scaled, derive_seed(seed, &[i, STREAM_TIE_MARKS]));
            let m2 = thin_by_marks(&marked, r, BorderMode::Truncate)?;
            check_matern2_witness(&marked.points, &m2.points, r, None)
                .map_err(|e| CliError::Invariant(format!("cell {ci}, replication {i}, matern2: {e}")))?;
            invariant_checks += 2;
        }

        for process in [ProcessKind::Matern1, ProcessKind::Matern2] {
            if process == ProcessKind::Matern2 && is_constant(&scaled, &window) {
                skipped.push(Skipped {
                    cell: ci,
                    process: Some(process_name(process)),
                    reason: "intensity is constant on the cell".into(),
                });
                continue;
            }
            let counts = mc_counts(&scaled, &window, r, process, BorderMode::Truncate, v.replications, seed)?;
            let analytic = match process {
                ProcessKind::Matern1 => stochtopo::process::expected_count_matern1(&scaled, &window, r, &quadrature),
                ProcessKind::Matern2 => stochtopo::process::expected_count_matern2(&scaled, &window, r, &quadrature),
            };
            let mc = MonteCarloReport::from_counts(&counts, analytic);
            reports.push(ValidationEntry {
                cell: ci,
                target,
                k: generation.k,
                radius_km: r,
                process: process_name(process),
                replications: mc.replications,
                mean: mc.mean,
                std_error: mc.std_error,
                analytic: mc.analytic,
                z_score: mc.z_score,
                pass: mc.passes(v.z_threshold),
            });
        }
    }
    let report = ValidationReport {
        seed: s.seed,
        z_threshold: v.z_threshold,
        invariant_checks,
        all_pass: reports.iter().all(|r| r.pass),
        reports,
        skipped,
    };
    let mut w = Writer::new(&s.output_dir)?;
    w.put("validation.json", &output::to_json(&report))?;
    Ok((Outcome { files: w.files, unassignable: 0 }, report))
}
