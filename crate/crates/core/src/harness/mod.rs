//! Configuration ingestion, the precision ledger, the built-in instance
//! catalog, verification workflows, and machine-readable reports.

pub mod catalog;
pub mod config;
pub mod ledger;
pub mod report;
pub mod verify;

pub use catalog::{catalog, catalog_entry, CatalogEntry};
pub use config::{parse_coefficient, CoefficientEntry, ConfigError, FlexInt, InstanceConfig};
pub use ledger::{compute_ledger, LedgerError, PrecisionLedger};
pub use report::{CheckResult, Checks, Status, VerificationReport};
pub use verify::{run_verify, verify_catalog_polygons, HarnessError, VerifyOutcome};
