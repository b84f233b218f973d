//! Files in and out: experiment configuration, scan CSVs, matrix CSVs,
//! synthetic scan generation and the embedded six-mode OPO fixture.

pub mod config;
pub mod fixture;
pub mod generate;
pub mod matrix_csv;
pub mod scan;

pub use config::{AffineMap, BeamConfig, CavityConfig, CrossConfig, ExperimentConfig, GridSpec, Scheme, SCHEMA_VERSION};
pub use fixture::{load_fixture, Fixture, FixtureMatrix};
pub use generate::{generate_combined, generate_scan, NamedScan};
pub use matrix_csv::{read_matrix, read_matrix_from, write_covariance, write_spectral, MatrixFile};
pub use scan::{read_scan, read_scan_from, write_scan, write_scan_to, SCAN_HEADER};
