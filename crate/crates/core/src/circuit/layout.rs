use crate::case::{BusKind, NetworkModel};

/// Position of every real unknown in the state vector:
/// `[V_R by bus | V_I by bus | Q_G by PV generator | (I_R, I_I) per slack]`.
///
/// KCL and constraint rows use the same positions: the real KCL row of a bus
/// sits at its `V_R` index, the PV magnitude constraint at the generator's
/// `Q_G` index, and the slack pin equations at the slack current indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownLayout {
    n_bus: usize,
    pv_bus: Vec<usize>,
    slack_bus: Vec<usize>,
}

impl UnknownLayout {
    pub fn build(net: &NetworkModel) -> Self {
        Self {
            n_bus: net.n_bus(),
            pv_bus: net.pv_gens.iter().map(|g| g.bus).collect(),
            slack_bus: net
                .buses
                .iter()
                .filter(|b| b.kind == BusKind::Slack)
                .map(|b| b.index)
                .collect(),
        }
    }

    pub fn n_bus(&self) -> usize {
        self.n_bus
    }

    pub fn n_pv(&self) -> usize {
        self.pv_bus.len()
    }

    pub fn n_slack(&self) -> usize {
        self.slack_bus.len()
    }

    pub fn n_unknowns(&self) -> usize {
        2 * self.n_bus + self.pv_bus.len() + 2 * self.slack_bus.len()
    }

    #[inline]
    pub fn vr_index(&self, bus: usize) -> usize {
        bus
    }

    #[inline]
    pub fn vi_index(&self, bus: usize) -> usize {
        self.n_bus + bus
    }

    #[inline]
    pub fn q_index(&self, gen: usize) -> usize {
        2 * self.n_bus + gen
    }

    #[inline]
    pub fn slack_ir_index(&self, slack: usize) -> usize {
        2 * self.n_bus + self.pv_bus.len() + 2 * slack
    }

    #[inline]
    pub fn slack_ii_index(&self, slack: usize) -> usize {
        self.slack_ir_index(slack) + 1
    }

    /// Bus of each PV generator, in generator order.
    pub fn pv_buses(&self) -> &[usize] {
        &self.pv_bus
    }

    pub fn slack_buses(&self) -> &[usize] {
        &self.slack_bus
    }
}
