//! MATPOWER case ingestion and the per-unit network model.

mod network;
mod parse;
mod polyload;

pub use network::{
    apply_loading, build_network, Branch, Bus, BusKind, InjectionScale, NetworkModel, PolyLoad,
    PvGen,
};
pub use parse::{parse_matpower, BranchRow, BusRow, GenRow, RawCase};
pub use polyload::{attach_poly_loads, parse_poly_loads, PolyLoadEntry};

use std::path::Path;

/// Reads and builds a case file in one go.
pub fn load_case(path: impl AsRef<Path>) -> Result<NetworkModel, LoadError> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let raw = parse_matpower(&text)?;
    Ok(build_network(&raw)?)
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Case(#[from] crate::error::CaseError),
}
