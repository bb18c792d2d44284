//! Per-cell base-station generation.
//!
//! For every cell with a target count `N`: pick `k`, derive the repulsion
//! radius, sample the inhomogeneous Poisson process and thin it. Cells never
//! interact. Each cell draws from its own streams
//! (`derive_seed(seed, [cell, STREAM_SAMPLE])` for the Poisson sample and
//! `derive_seed(seed, [cell, STREAM_TIE_MARKS])` for Matérn II tie-breaks), so
//! the output does not depend on scheduling. Base-station ids are assigned
//! after merging, in cell order then sample order.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Cell, Point2D, Region};
use crate::intensity::{calibrate_k_with, CalibrationMode, CalibrationSettings, IntensityField};
use crate::rng::{derive_seed, STREAM_SAMPLE, STREAM_TIE_MARKS};
use crate::scalar::Scalar;

use super::sampling::sample_inhomogeneous_ppp;
use super::thinning::{matern1_thin, matern2_thin};
use super::ProcessKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiusFormula {
    /// `2·√(x1s·x2s) / ⌈√N⌉`
    Paper,
    /// `√(x1s·x2s) / (2·⌈√N⌉)`: `⌈√N⌉²` squares of side `2r` tile the cell.
    #[default]
    Tiling,
}

/// Repulsion radius for a cell of nominal size `cell_width × cell_height` and target `N`.
pub fn repulsion_radius<T: Scalar>(cell_width: T, cell_height: T, target: u32, formula: RadiusFormula) -> Result<T> {
    if target < 1 {
        return Err(Error::InvalidTarget(target));
    }
    let side = (cell_width * cell_height).sqrt();
    let per_side = T::lit(f64::from(target).sqrt().ceil());
    Ok(match formula {
        RadiusFormula::Paper => T::lit(2.0) * side / per_side,
        RadiusFormula::Tiling => side / (T::lit(2.0) * per_side),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleMode<T> {
    /// Use this `k` everywhere.
    Fixed(T),
    PreThin,
    PostThin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationOptions<T> {
    pub process: ProcessKind,
    pub radius_formula: RadiusFormula,
    pub scale: ScaleMode<T>,
    pub calibration: CalibrationSettings,
}

impl<T: Scalar> Default for GenerationOptions<T> {
    fn default() -> Self {
        Self {
            process: ProcessKind::Matern2,
            radius_formula: RadiusFormula::Tiling,
            scale: ScaleMode::PostThin,
            calibration: CalibrationSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseStation<T> {
    pub id: usize,
    pub location: Point2D<T>,
    pub cell_index: usize,
}

/// What happened in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeneration<T> {
    pub cell_index: usize,
    pub target: u32,
    pub k: T,
    pub radius: T,
    pub raw_count: usize,
    pub survivors: Vec<Point2D<T>>,
}

/// Generates one cell. `seed` is the run seed; the cell streams are derived from it.
pub fn generate_cell<T: Scalar>(
    field: &IntensityField<T>,
    region: &Region<T>,
    cell: &Cell<T>,
    target: u32,
    opts: &GenerationOptions<T>,
    seed: u64,
) -> Result<CellGeneration<T>> {
    let radius = repulsion_radius(region.cell_width, region.cell_height, target, opts.radius_formula)?;
    let k = match opts.scale {
        ScaleMode::Fixed(k) => k,
        ScaleMode::PreThin => calibrate_k_with(field, cell, target, CalibrationMode::PreThin, &opts.calibration)?,
        ScaleMode::PostThin => calibrate_k_with(
            field,
            cell,
            target,
            CalibrationMode::PostThin { radius, process: opts.process },
            &opts.calibration,
        )?,
    };
    let scaled = field.with_scale(k);
    let cell_id = cell.index as u64;
    let raw = sample_inhomogeneous_ppp(&scaled, cell, derive_seed(seed, &[cell_id, STREAM_SAMPLE]));
    let thinned = match opts.process {
        ProcessKind::Matern1 => matern1_thin(&raw, radius)?,
        ProcessKind::Matern2 => matern2_thin(&raw, radius, &scaled, derive_seed(seed, &[cell_id, STREAM_TIE_MARKS]))?,
    };
    Ok(CellGeneration {
        cell_index: cell.index,
        target,
        k,
        radius,
        raw_count: raw.len(),
        survivors: thinned.locations(),
    })
}

/// Runs every cell listed in `targets` (cell index → N), in parallel.
pub fn generate_cells<T: Scalar>(
    field: &IntensityField<T>,
    region: &Region<T>,
    targets: &BTreeMap<usize, u32>,
    opts: &GenerationOptions<T>,
    seed: u64,
) -> Result<Vec<CellGeneration<T>>> {
    let jobs: Vec<(Cell<T>, u32)> = targets
        .iter()
        .map(|(&i, &n)| {
            let cell = region.cell(i).ok_or_else(|| {
                Error::InvalidRegion(format!("cell {i} outside the {}-cell grid", region.cell_count()))
            })?;
            if n < 1 {
                return Err(Error::InvalidTarget(n));
            }
            Ok((cell, n))
        })
        .collect::<Result<_>>()?;
    jobs.par_iter().map(|(cell, n)| generate_cell(field, region, cell, *n, opts, seed)).collect()
}

pub fn collect_base_stations<T: Scalar>(cells: &[CellGeneration<T>]) -> Vec<BaseStation<T>> {
    cells
        .iter()
        .flat_map(|c| c.survivors.iter().map(move |&p| (c.cell_index, p)))
        .enumerate()
        .map(|(id, (cell_index, location))| BaseStation { id, location, cell_index })
        .collect()
}

pub fn generate_base_stations<T: Scalar>(
    field: &IntensityField<T>,
    region: &Region<T>,
    targets: &BTreeMap<usize, u32>,
    opts: &GenerationOptions<T>,
    seed: u64,
) -> Result<Vec<BaseStation<T>>> {
    Ok(collect_base_stations(&generate_cells(field, region, targets, opts, seed)?))
}
