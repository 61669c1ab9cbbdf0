use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::case::{BusKind, NetworkModel};
use crate::circuit::UnknownLayout;
use crate::error::OptionsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Convergence threshold on the ∞-norm of the full residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Start from 1 pu / 0 rad (setpoints at PV and slack buses) instead of
    /// the voltages stored in the case file.
    pub flat_start: bool,
    /// Initial reactive power of every PV generator, pu.
    pub q_init: f64,
    pub enable_limiting: bool,
    pub enable_stepping: bool,
    /// Bound on |V_R| and |V_I| enforced by the limiter.
    pub voltage_box: f64,
    /// Largest PV-bus voltage component step before damping kicks in.
    pub delta_max: f64,
    pub alpha_min: f64,
    /// First power-stepping increment.
    pub beta_step: f64,
    /// Power stepping gives up once its increment falls below this.
    pub beta_step_min: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 100,
            flat_start: true,
            q_init: 0.0,
            enable_limiting: true,
            enable_stepping: true,
            voltage_box: 2.0,
            delta_max: 0.1,
            alpha_min: 0.05,
            beta_step: 0.25,
            beta_step_min: 1.0 / 64.0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), OptionsError> {
        let fail = |m: &str| Err(OptionsError(m.to_string()));
        if !(self.tol > 0.0) {
            return fail("tol must be positive");
        }
        if self.max_iter < 1 {
            return fail("max_iter must be at least 1");
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= 1.0) {
            return fail("alpha_min must lie in (0, 1]");
        }
        if !(self.delta_max > 0.0) {
            return fail("delta_max must be positive");
        }
        if !(self.voltage_box > 0.0) {
            return fail("voltage_box must be positive");
        }
        if !self.q_init.is_finite() {
            return fail("q_init must be finite");
        }
        if !(self.beta_step > 0.0 && self.beta_step <= 1.0 && self.beta_step_min > 0.0) {
            return fail("power-stepping increments must lie in (0, 1]");
        }
        Ok(())
    }

    pub fn with_techniques(mut self, limiting: bool, stepping: bool) -> Self {
        self.enable_limiting = limiting;
        self.enable_stepping = stepping;
        self
    }
}

/// Values of all unknowns, ordered by [`UnknownLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub values: Vec<f64>,
    /// Newton iteration that produced this state.
    pub iteration: usize,
}

impl StateVector {
    /// Flat start: `V = v_set∠θ_set` at the slack, `v_set` at PV buses,
    /// 1 pu elsewhere; every `Q_G = q_init`; slack currents zero.
    pub fn flat_start(net: &NetworkModel, layout: &UnknownLayout, q_init: f64) -> Self {
        Self::from_voltages(net, layout, q_init, |bus| match bus.kind {
            BusKind::Slack => Complex64::from_polar(bus.v_set, bus.theta_set),
            BusKind::Pv => Complex64::new(bus.v_set, 0.0),
            BusKind::Pq => Complex64::new(1.0, 0.0),
        })
    }

    /// Starts from the voltages stored in the case file.
    pub fn case_start(net: &NetworkModel, layout: &UnknownLayout, q_init: f64) -> Self {
        Self::from_voltages(net, layout, q_init, |bus| match bus.kind {
            BusKind::Slack => Complex64::from_polar(bus.v_set, bus.theta_set),
            BusKind::Pv => Complex64::from_polar(bus.v_set, bus.va_case),
            BusKind::Pq => Complex64::from_polar(bus.vm_case, bus.va_case),
        })
    }

    pub fn initial(net: &NetworkModel, layout: &UnknownLayout, options: &SolverOptions) -> Self {
        if options.flat_start {
            Self::flat_start(net, layout, options.q_init)
        } else {
            Self::case_start(net, layout, options.q_init)
        }
    }

    fn from_voltages(
        net: &NetworkModel,
        layout: &UnknownLayout,
        q_init: f64,
        v: impl Fn(&crate::case::Bus) -> Complex64,
    ) -> Self {
        let mut values = vec![0.0; layout.n_unknowns()];
        for bus in &net.buses {
            let vb = v(bus);
            values[layout.vr_index(bus.index)] = vb.re;
            values[layout.vi_index(bus.index)] = vb.im;
        }
        for g in 0..layout.n_pv() {
            values[layout.q_index(g)] = q_init;
        }
        Self { values, iteration: 0 }
    }

    pub fn bus_voltages(&self, layout: &UnknownLayout) -> Vec<Complex64> {
        (0..layout.n_bus())
            .map(|b| Complex64::new(self.values[layout.vr_index(b)], self.values[layout.vi_index(b)]))
            .collect()
    }

    pub fn q_gen(&self, layout: &UnknownLayout) -> Vec<f64> {
        (0..layout.n_pv()).map(|g| self.values[layout.q_index(g)]).collect()
    }

    /// Largest |V_R| or |V_I| over all buses.
    pub fn max_component(&self, layout: &UnknownLayout) -> f64 {
        self.values[..2 * layout.n_bus()].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_magnitude(&self, layout: &UnknownLayout) -> f64 {
        self.bus_voltages(layout).iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let o = SolverOptions::default();
        assert!(o.validate().is_ok());
        assert_eq!((o.tol, o.max_iter, o.voltage_box, o.delta_max, o.alpha_min), (1e-6, 100, 2.0, 0.1, 0.05));
    }

    #[test]
    fn invalid_options() {
        let bad = [
            SolverOptions { tol: 0.0, ..Default::default() },
            SolverOptions { max_iter: 0, ..Default::default() },
            SolverOptions { alpha_min: 0.0, ..Default::default() },
            SolverOptions { alpha_min: 1.5, ..Default::default() },
            SolverOptions { delta_max: -1.0, ..Default::default() },
        ];
        for o in bad {
            assert!(o.validate().is_err(), "{o:?}");
        }
    }
}
