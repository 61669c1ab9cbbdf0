use serde::{Deserialize, Serialize};

use super::network::{NetworkModel, PolyLoad};
use crate::circuit::PolyLoadCoeffs;
use crate::error::CaseError;

/// One entry of the polynomial-load sidecar file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyLoadEntry {
    pub bus: i64,
    #[serde(rename = "gR")]
    pub g_r: [f64; 6],
    #[serde(rename = "gI")]
    pub g_i: [f64; 6],
}

pub fn parse_poly_loads(json: &str) -> Result<Vec<PolyLoadEntry>, CaseError> {
    let entries: Vec<PolyLoadEntry> =
        serde_json::from_str(json).map_err(|e| CaseError::PolyLoadFormat(e.to_string()))?;
    if entries.iter().any(|e| e.g_r.iter().chain(&e.g_i).any(|c| !c.is_finite())) {
        return Err(CaseError::PolyLoadFormat("coefficients must be finite".into()));
    }
    Ok(entries)
}

/// Returns a copy of `net` with the given polynomial loads attached.
pub fn attach_poly_loads(
    net: &NetworkModel,
    entries: &[PolyLoadEntry],
) -> Result<NetworkModel, CaseError> {
    let mut out = net.clone();
    for e in entries {
        let bus = net.index_of(e.bus).ok_or(CaseError::PolyLoadToUnknownBus(e.bus))?;
        out.poly_loads.push(PolyLoad { bus, coeffs: PolyLoadCoeffs { g_r: e.g_r, g_i: e.g_i } });
    }
    Ok(out)
}
