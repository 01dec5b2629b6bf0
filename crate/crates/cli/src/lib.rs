//! Batch driver for the chernform checks: scenario files in, reports and CSVs out.

pub mod report;
pub mod run;
pub mod scenario;

use std::path::Path;

pub use run::{run_scenario, Check, Outcome, Overrides, Relation, SampleRow, Status};
pub use scenario::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Scenario {
        path: String,
        #[source]
        source: chernform::Error,
    },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Scenarios compiled into the binary, in `verify-all` order.
pub const SHIPPED: &[(&str, &str)] = &[
    ("berezin-det", include_str!("../scenarios/berezin-det.scn")),
    ("chern-random", include_str!("../scenarios/chern-random.scn")),
    ("fs-line", include_str!("../scenarios/fs-line.scn")),
    ("fs-plane", include_str!("../scenarios/fs-plane.scn")),
    ("fs-products", include_str!("../scenarios/fs-products.scn")),
    ("identities-rank2", include_str!("../scenarios/identities-rank2.scn")),
    ("identities-rank3", include_str!("../scenarios/identities-rank3.scn")),
    ("line-bundle-pl", include_str!("../scenarios/line-bundle-pl.scn")),
    ("line-z2", include_str!("../scenarios/line-z2.scn")),
    ("line-z3", include_str!("../scenarios/line-z3.scn")),
    ("point-c2", include_str!("../scenarios/point-c2.scn")),
    ("point-c2-squares", include_str!("../scenarios/point-c2-squares.scn")),
    ("point-c2-curved", include_str!("../scenarios/point-c2-curved.scn")),
    ("meo-degenerate", include_str!("../scenarios/meo-degenerate.scn")),
    ("bezout-p1-cubic", include_str!("../scenarios/bezout-p1-cubic.scn")),
    ("bezout-p1-infinity", include_str!("../scenarios/bezout-p1-infinity.scn")),
    ("bezout-p2-deg6", include_str!("../scenarios/bezout-p2-deg6.scn")),
];

pub fn parse_named(path: &str, src: &str) -> Result<Scenario, CliError> {
    scenario::parse(src).map_err(|source| CliError::Scenario {
        path: path.to_string(),
        source,
    })
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let src = std::fs::read_to_string(path)?;
    parse_named(&path.display().to_string(), &src)
}

pub fn shipped() -> Result<Vec<Scenario>, CliError> {
    SHIPPED.iter().map(|(name, src)| parse_named(name, src)).collect()
}

pub fn shipped_by_name(name: &str) -> Result<Scenario, CliError> {
    let (n, src) = SHIPPED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| CliError::UnknownScenario(name.to_string()))?;
    parse_named(n, src)
}
