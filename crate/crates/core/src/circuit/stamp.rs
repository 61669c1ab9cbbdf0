use num_complex::Complex64;

use super::devices::{eval_polynomial_injection, eval_pq_load, eval_pv_source, InjectionEval};
use super::layout::UnknownLayout;
use super::PolyLoadCoeffs;
use crate::case::{Branch, Bus};
use crate::error::DeviceError;

/// Additive contribution of one device to the global Jacobian and residual.
///
/// For linear devices the residual entries hold only the state-independent
/// offset; the `J·x` part is added by the assembler.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeviceStamp {
    pub jacobian: Vec<(usize, usize, f64)>,
    pub residual: Vec<(usize, f64)>,
}

impl DeviceStamp {
    fn push(&mut self, row: usize, col: usize, value: f64) {
        self.jacobian.push((row, col, value));
    }

    /// Stamps the network current `y · V_col` leaving bus `row_bus`.
    fn network_current(&mut self, layout: &UnknownLayout, row_bus: usize, col_bus: usize, y: Complex64) {
        let (re, im) = (layout.vr_index(row_bus), layout.vi_index(row_bus));
        let (cr, ci) = (layout.vr_index(col_bus), layout.vi_index(col_bus));
        // real: g·vr − b·vi, imag: b·vr + g·vi, drawn from the node
        self.push(re, cr, -y.re);
        self.push(re, ci, y.im);
        self.push(im, cr, -y.im);
        self.push(im, ci, -y.re);
    }

    /// A current drawn from (sign −1) or injected into (sign +1) `bus`.
    fn current_source(&mut self, layout: &UnknownLayout, bus: usize, eval: &InjectionEval, sign: f64) {
        let (re, im) = (layout.vr_index(bus), layout.vi_index(bus));
        let d = &eval.partials;
        self.push(re, re, sign * d.dir_dvr);
        self.push(re, im, sign * d.dir_dvi);
        self.push(im, re, sign * d.dii_dvr);
        self.push(im, im, sign * d.dii_dvi);
        self.residual.push((re, sign * eval.i_r));
        self.residual.push((im, sign * eval.i_i));
    }

    pub fn is_finite(&self) -> bool {
        self.jacobian.iter().all(|e| e.2.is_finite()) && self.residual.iter().all(|e| e.1.is_finite())
    }
}

/// Two-port admittances of a π-branch, MATPOWER convention (tap on the from side).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAdmittance {
    pub ff: Complex64,
    pub ft: Complex64,
    pub tf: Complex64,
    pub tt: Complex64,
}

pub fn branch_admittances(br: &Branch) -> Result<BranchAdmittance, DeviceError> {
    let z = Complex64::new(br.series_r, br.series_x);
    if z.norm_sqr() == 0.0 {
        return Err(DeviceError::ZeroImpedance);
    }
    let ys = z.inv();
    let tt = ys + Complex64::new(0.0, br.charging_b / 2.0);
    let ratio = Complex64::from_polar(br.tap, br.shift);
    Ok(BranchAdmittance {
        ff: tt / (br.tap * br.tap),
        ft: -ys / ratio.conj(),
        tf: -ys / ratio,
        tt,
    })
}

pub fn stamp_branch(br: &Branch, layout: &UnknownLayout) -> Result<DeviceStamp, DeviceError> {
    let y = branch_admittances(br)?;
    let mut s = DeviceStamp::default();
    s.network_current(layout, br.from, br.from, y.ff);
    s.network_current(layout, br.from, br.to, y.ft);
    s.network_current(layout, br.to, br.from, y.tf);
    s.network_current(layout, br.to, br.to, y.tt);
    Ok(s)
}

/// Fixed shunt admittance at a bus.
pub fn stamp_shunt(bus: &Bus, layout: &UnknownLayout) -> DeviceStamp {
    let mut s = DeviceStamp::default();
    if bus.g_shunt != 0.0 || bus.b_shunt != 0.0 {
        s.network_current(layout, bus.index, bus.index, Complex64::new(bus.g_shunt, bus.b_shunt));
    }
    s
}

/// Ideal voltage source at slack number `slack` with unknown injected current.
pub fn stamp_slack(bus: &Bus, slack: usize, layout: &UnknownLayout) -> DeviceStamp {
    let (ir, ii) = (layout.slack_ir_index(slack), layout.slack_ii_index(slack));
    let (vr, vi) = (layout.vr_index(bus.index), layout.vi_index(bus.index));
    let mut s = DeviceStamp::default();
    s.push(vr, ir, 1.0);
    s.push(vi, ii, 1.0);
    s.push(ir, vr, 1.0);
    s.push(ii, vi, 1.0);
    s.residual.push((ir, -bus.v_set * bus.theta_set.cos()));
    s.residual.push((ii, -bus.v_set * bus.theta_set.sin()));
    s
}

pub fn stamp_pq_load(
    bus: usize,
    p: f64,
    q: f64,
    layout: &UnknownLayout,
    x: &[f64],
) -> Result<DeviceStamp, DeviceError> {
    let eval = eval_pq_load(p, q, x[layout.vr_index(bus)], x[layout.vi_index(bus)])?;
    let mut s = DeviceStamp::default();
    s.current_source(layout, bus, &eval, -1.0);
    Ok(s)
}

pub fn stamp_poly_load(
    bus: usize,
    coeffs: &PolyLoadCoeffs,
    layout: &UnknownLayout,
    x: &[f64],
) -> DeviceStamp {
    let eval = eval_polynomial_injection(coeffs, x[layout.vr_index(bus)], x[layout.vi_index(bus)]);
    let mut s = DeviceStamp::default();
    s.current_source(layout, bus, &eval, -1.0);
    s
}

/// PV generator number `gen` with real output `p_gen` and setpoint `v_set`.
pub fn stamp_pv_source(
    gen: usize,
    bus: usize,
    p_gen: f64,
    v_set: f64,
    layout: &UnknownLayout,
    x: &[f64],
) -> Result<DeviceStamp, DeviceError> {
    let (re, im, qi) = (layout.vr_index(bus), layout.vi_index(bus), layout.q_index(gen));
    let e = eval_pv_source(p_gen, x[qi], x[re], x[im], v_set)?;
    let mut s = DeviceStamp::default();
    s.current_source(
        layout,
        bus,
        &InjectionEval { i_r: e.i_r, i_i: e.i_i, partials: e.partials },
        1.0,
    );
    s.push(re, qi, e.dir_dq);
    s.push(im, qi, e.dii_dq);
    s.push(qi, re, e.dcon_dvr);
    s.push(qi, im, e.dcon_dvi);
    s.residual.push((qi, e.constraint));
    Ok(s)
}
