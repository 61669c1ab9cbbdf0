use crate::case::NetworkModel;
use crate::circuit::{
    stamp_branch, stamp_poly_load, stamp_pq_load, stamp_pv_source, stamp_shunt, stamp_slack,
    DeviceStamp, UnknownLayout,
};
use crate::error::DeviceError;

use super::sparse::SparseMatrix;

/// Residual and Jacobian builder for one network. The state-independent
/// stamps (branches, shunts, slack sources) are collected once.
#[derive(Debug, Clone)]
pub struct Assembler<'a> {
    net: &'a NetworkModel,
    layout: UnknownLayout,
    linear: Vec<(usize, usize, f64)>,
    offset: Vec<f64>,
}

impl<'a> Assembler<'a> {
    pub fn new(net: &'a NetworkModel) -> Result<Self, DeviceError> {
        let layout = UnknownLayout::build(net);
        let mut asm = Self {
            net,
            offset: vec![0.0; layout.n_unknowns()],
            linear: Vec::new(),
            layout,
        };
        for br in net.branches.iter().filter(|b| b.in_service) {
            let s = stamp_branch(br, &asm.layout)?;
            asm.add_linear(s);
        }
        for bus in &net.buses {
            let s = stamp_shunt(bus, &asm.layout);
            asm.add_linear(s);
        }
        for (k, &bus) in asm.layout.slack_buses().to_vec().iter().enumerate() {
            let s = stamp_slack(&net.buses[bus], k, &asm.layout);
            asm.add_linear(s);
        }
        Ok(asm)
    }

    /// Adds a state-independent stamp on top of the network's own devices.
    pub fn with_extra_stamp(mut self, stamp: DeviceStamp) -> Self {
        self.add_linear(stamp);
        self
    }

    fn add_linear(&mut self, stamp: DeviceStamp) {
        self.linear.extend(stamp.jacobian);
        for (row, v) in stamp.residual {
            self.offset[row] += v;
        }
    }

    pub fn layout(&self) -> &UnknownLayout {
        &self.layout
    }

    pub fn network(&self) -> &NetworkModel {
        self.net
    }

    fn nonlinear_stamps(&self, x: &[f64]) -> Result<Vec<DeviceStamp>, DeviceError> {
        let net = self.net;
        let layout = &self.layout;
        let mut out = Vec::new();
        for bus in 0..net.n_bus() {
            let (p, q) = (net.p_load(bus), net.q_load(bus));
            if p != 0.0 || q != 0.0 {
                out.push(stamp_pq_load(bus, p, q, layout, x)?);
            }
        }
        for (g, gen) in net.pv_gens.iter().enumerate() {
            out.push(stamp_pv_source(g, gen.bus, net.p_gen(g), gen.v_set, layout, x)?);
        }
        for (k, load) in net.poly_loads.iter().enumerate() {
            out.push(stamp_poly_load(load.bus, &net.poly_coeffs(k), layout, x));
        }
        Ok(out)
    }

    fn linear_residual(&self, x: &[f64]) -> Vec<f64> {
        let mut f = self.offset.clone();
        for &(r, c, v) in &self.linear {
            f[r] += v * x[c];
        }
        f
    }

    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>, DeviceError> {
        let mut f = self.linear_residual(x);
        for s in self.nonlinear_stamps(x)? {
            for (r, v) in s.residual {
                f[r] += v;
            }
        }
        Ok(f)
    }

    /// Jacobian `∂f/∂x` and residual `f` at `x`.
    pub fn assemble(&self, x: &[f64]) -> Result<(SparseMatrix, Vec<f64>), DeviceError> {
        let mut f = self.linear_residual(x);
        let mut triplets = self.linear.clone();
        for s in self.nonlinear_stamps(x)? {
            triplets.extend(s.jacobian);
            for (r, v) in s.residual {
                f[r] += v;
            }
        }
        Ok((SparseMatrix::from_triplets(self.layout.n_unknowns(), triplets), f))
    }
}

/// One-shot assembly at `state`.
pub fn assemble(
    net: &NetworkModel,
    x: &[f64],
) -> Result<(SparseMatrix, Vec<f64>), DeviceError> {
    Assembler::new(net)?.assemble(x)
}
