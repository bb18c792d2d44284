//! Inhomogeneous Poisson sampling, Matérn I/II thinning, expected-count
//! quadratures and the per-cell generation pipeline.

pub mod pipeline;
pub mod quadrature;
pub mod sampling;
pub mod thinning;

pub use pipeline::{
    collect_base_stations, generate_base_stations, generate_cell, generate_cells, repulsion_radius, BaseStation,
    CellGeneration, GenerationOptions, RadiusFormula, ScaleMode,
};
pub use quadrature::{expected_count_matern1, expected_count_matern2, CountProfile, QuadratureOptions};
pub use sampling::{intensity_mark, sample_inhomogeneous_ppp, sample_with_bound, MarkedPoint, PointSample, Stage};
pub use thinning::{
    assign_intensity_marks, mark_order, matern1_thin, matern1_thin_with, matern2_thin, matern2_thin_with,
    thin_by_marks, BorderMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProcessKind {
    Matern1,
    #[default]
    Matern2,
}
