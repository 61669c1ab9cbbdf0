use serde::{Deserialize, Serialize};

use crate::error::DeviceError;

/// Lower bound on |V|² below which constant-power devices refuse to evaluate.
pub const VOLTAGE_GUARD: f64 = 1e-8;

/// ∂I/∂V block of a two-terminal (real, imaginary) current source.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurrentPartials {
    pub dir_dvr: f64,
    pub dir_dvi: f64,
    pub dii_dvr: f64,
    pub dii_dvi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionEval {
    pub i_r: f64,
    pub i_i: f64,
    pub partials: CurrentPartials,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvSourceEval {
    pub i_r: f64,
    pub i_i: f64,
    pub partials: CurrentPartials,
    pub dir_dq: f64,
    pub dii_dq: f64,
    /// vr² + vi² − v_set²
    pub constraint: f64,
    pub dcon_dvr: f64,
    pub dcon_dvi: f64,
}

/// Coefficients of the current-form polynomial load
/// `I = g1 + g2·vr + g3·vi + g4·vr·vi + g5·vr² + g6·vi²` for each part.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PolyLoadCoeffs {
    pub g_r: [f64; 6],
    pub g_i: [f64; 6],
}

impl PolyLoadCoeffs {
    pub fn scaled(&self, factor: f64) -> Self {
        Self { g_r: self.g_r.map(|g| g * factor), g_i: self.g_i.map(|g| g * factor) }
    }
}

/// Current drawn by a constant-power (P, Q) load: I = conj(S / V).
fn constant_power(p: f64, q: f64, vr: f64, vi: f64) -> Result<InjectionEval, DeviceError> {
    let m = vr * vr + vi * vi;
    if !(m >= VOLTAGE_GUARD) {
        return Err(DeviceError::VoltageCollapse(m));
    }
    let i_r = (p * vr + q * vi) / m;
    let i_i = (p * vi - q * vr) / m;
    let partials = CurrentPartials {
        dir_dvr: (p - 2.0 * vr * i_r) / m,
        dir_dvi: (q - 2.0 * vi * i_r) / m,
        dii_dvr: (-q - 2.0 * vr * i_i) / m,
        dii_dvi: (p - 2.0 * vi * i_i) / m,
    };
    Ok(InjectionEval { i_r, i_i, partials })
}

/// Real and imaginary load currents of a PQ bus with their partials.
pub fn eval_pq_load(p: f64, q: f64, vr: f64, vi: f64) -> Result<InjectionEval, DeviceError> {
    constant_power(p, q, vr, vi)
}

/// PV generator as a split current source with unknown reactive power `q_g`
/// plus the squared voltage-magnitude constraint.
pub fn eval_pv_source(
    p_g: f64,
    q_g: f64,
    vr: f64,
    vi: f64,
    v_set: f64,
) -> Result<PvSourceEval, DeviceError> {
    let base = constant_power(p_g, q_g, vr, vi)?;
    let m = vr * vr + vi * vi;
    Ok(PvSourceEval {
        i_r: base.i_r,
        i_i: base.i_i,
        partials: base.partials,
        dir_dq: vi / m,
        dii_dq: -vr / m,
        constraint: m - v_set * v_set,
        dcon_dvr: 2.0 * vr,
        dcon_dvi: 2.0 * vi,
    })
}

pub fn eval_polynomial_injection(c: &PolyLoadCoeffs, vr: f64, vi: f64) -> InjectionEval {
    let value = |g: &[f64; 6]| {
        g[0] + g[1] * vr + g[2] * vi + g[3] * vr * vi + g[4] * vr * vr + g[5] * vi * vi
    };
    let d_vr = |g: &[f64; 6]| g[1] + g[3] * vi + 2.0 * g[4] * vr;
    let d_vi = |g: &[f64; 6]| g[2] + g[3] * vr + 2.0 * g[5] * vi;
    InjectionEval {
        i_r: value(&c.g_r),
        i_i: value(&c.g_i),
        partials: CurrentPartials {
            dir_dvr: d_vr(&c.g_r),
            dir_dvi: d_vi(&c.g_r),
            dii_dvr: d_vr(&c.g_i),
            dii_dvi: d_vi(&c.g_i),
        },
    }
}
