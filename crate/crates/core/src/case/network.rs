use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::parse::RawCase;
use crate::circuit::PolyLoadCoeffs;
use crate::error::CaseError;

const VSET_AGREEMENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

/// A bus in per-unit. `p_load`/`q_load` are nominal values; use the
/// accessors on [`NetworkModel`] to get them with loading and stepping
/// factors applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    /// Id from the case file.
    pub id: i64,
    pub index: usize,
    pub kind: BusKind,
    pub p_load: f64,
    pub q_load: f64,
    pub g_shunt: f64,
    pub b_shunt: f64,
    /// Voltage magnitude setpoint (slack and PV buses).
    pub v_set: f64,
    /// Voltage angle in radians (slack bus only).
    pub theta_set: f64,
    /// Voltage magnitude and angle (radians) stored in the case file, used
    /// when a solve does not start flat.
    pub vm_case: f64,
    pub va_case: f64,
}

/// π-model branch with an optional off-nominal transformer on the from side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub series_r: f64,
    pub series_x: f64,
    pub charging_b: f64,
    pub tap: f64,
    /// Phase shift in radians.
    pub shift: f64,
    pub in_service: bool,
}

/// Aggregated generation at a PV bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvGen {
    pub bus: usize,
    /// Nominal real power output.
    pub p_gen: f64,
    pub v_set: f64,
}

/// Voltage-dependent current-form load drawn from a bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyLoad {
    pub bus: usize,
    pub coeffs: PolyLoadCoeffs,
}

/// Multipliers on scheduled injections. `loading` comes from
/// [`apply_loading`], `beta` from power stepping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionScale {
    pub loading: f64,
    pub beta: f64,
}

impl Default for InjectionScale {
    fn default() -> Self {
        Self { loading: 1.0, beta: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub pv_gens: Vec<PvGen>,
    pub poly_loads: Vec<PolyLoad>,
    pub scale: InjectionScale,
}

impl NetworkModel {
    pub fn n_bus(&self) -> usize {
        self.buses.len()
    }

    pub fn slack_buses(&self) -> impl Iterator<Item = &Bus> {
        self.buses.iter().filter(|b| b.kind == BusKind::Slack)
    }

    pub fn slack_bus(&self) -> &Bus {
        self.slack_buses().next().expect("network has a slack bus")
    }

    fn load_factor(&self, bus: usize) -> f64 {
        match self.buses[bus].kind {
            BusKind::Slack => 1.0,
            BusKind::Pv | BusKind::Pq => self.scale.loading * self.scale.beta,
        }
    }

    /// Scheduled real load at `bus`, scaled.
    pub fn p_load(&self, bus: usize) -> f64 {
        self.buses[bus].p_load * self.load_factor(bus)
    }

    pub fn q_load(&self, bus: usize) -> f64 {
        self.buses[bus].q_load * self.load_factor(bus)
    }

    /// Scheduled real generation of PV generator `gen`, scaled.
    pub fn p_gen(&self, gen: usize) -> f64 {
        self.pv_gens[gen].p_gen * self.scale.loading * self.scale.beta
    }

    pub fn poly_coeffs(&self, k: usize) -> PolyLoadCoeffs {
        self.poly_loads[k].coeffs.scaled(self.scale.beta)
    }

    pub fn index_of(&self, id: i64) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }
}

/// Converts a raw case to per-unit, drops out-of-service elements and
/// aggregates generators per bus.
pub fn build_network(raw: &RawCase) -> Result<NetworkModel, CaseError> {
    let base = raw.base_mva;
    if !(base > 0.0) || !base.is_finite() {
        return Err(CaseError::InvalidBaseMva(base));
    }

    let mut index: HashMap<i64, usize> = HashMap::with_capacity(raw.bus_rows.len());
    let mut slack: Option<i64> = None;
    for (i, row) in raw.bus_rows.iter().enumerate() {
        if index.insert(row.id, i).is_some() {
            return Err(CaseError::DuplicateBusId(row.id));
        }
        if row.kind_code == 3 {
            if let Some(first) = slack {
                return Err(CaseError::MultipleSlack(first, row.id));
            }
            slack = Some(row.id);
        }
    }
    if slack.is_none() {
        return Err(CaseError::NoSlack);
    }

    // in-service generation per bus, in order of first appearance
    struct GenGroup {
        p: f64,
        q: f64,
        v_set: f64,
    }
    let mut groups: BTreeMap<usize, GenGroup> = BTreeMap::new();
    let mut gen_order: Vec<usize> = Vec::new();
    for g in &raw.gen_rows {
        let &bus = index.get(&g.bus).ok_or(CaseError::GenToUnknownBus(g.bus))?;
        if !g.in_service {
            continue;
        }
        match groups.get_mut(&bus) {
            Some(group) => {
                if (group.v_set - g.vg_pu).abs() > VSET_AGREEMENT {
                    return Err(CaseError::ConflictingVset(g.bus));
                }
                group.p += g.pg_mw / base;
                group.q += g.qg_mvar / base;
            }
            None => {
                gen_order.push(bus);
                groups.insert(bus, GenGroup { p: g.pg_mw / base, q: g.qg_mvar / base, v_set: g.vg_pu });
            }
        }
    }

    let mut buses = Vec::with_capacity(raw.bus_rows.len());
    for (i, row) in raw.bus_rows.iter().enumerate() {
        let group = groups.get(&i);
        let kind = match (row.kind_code, group) {
            (3, _) => BusKind::Slack,
            (2, Some(_)) => BusKind::Pv,
            _ => BusKind::Pq,
        };
        let mut p_load = row.pd_mw / base;
        let mut q_load = row.qd_mvar / base;
        // generation at a PQ bus is a negative load
        if let (BusKind::Pq, Some(g)) = (kind, group) {
            p_load -= g.p;
            q_load -= g.q;
        }
        let v_set = match (kind, group) {
            (BusKind::Pv, Some(g)) | (BusKind::Slack, Some(g)) => g.v_set,
            _ => row.vm_pu,
        };
        if kind != BusKind::Pq && !(v_set > 0.0) {
            return Err(CaseError::NonPositiveVset(row.id));
        }
        buses.push(Bus {
            id: row.id,
            index: i,
            kind,
            p_load,
            q_load,
            g_shunt: row.gs_mw / base,
            b_shunt: row.bs_mvar / base,
            v_set,
            theta_set: if kind == BusKind::Slack { row.va_deg.to_radians() } else { 0.0 },
            vm_case: row.vm_pu,
            va_case: row.va_deg.to_radians(),
        });
    }

    let pv_gens = gen_order
        .iter()
        .filter(|&&bus| buses[bus].kind == BusKind::Pv)
        .map(|&bus| PvGen { bus, p_gen: groups[&bus].p, v_set: groups[&bus].v_set })
        .collect();

    let mut branches = Vec::with_capacity(raw.branch_rows.len());
    for br in &raw.branch_rows {
        let (Some(&from), Some(&to)) = (index.get(&br.from), index.get(&br.to)) else {
            return Err(CaseError::BranchToUnknownBus { from: br.from, to: br.to });
        };
        if !br.in_service {
            continue;
        }
        if br.r_pu == 0.0 && br.x_pu == 0.0 {
            return Err(CaseError::InvalidBranch {
                from: br.from,
                to: br.to,
                reason: "zero series impedance".into(),
            });
        }
        let tap = if br.tap == 0.0 { 1.0 } else { br.tap };
        if !(tap > 0.0) {
            return Err(CaseError::InvalidBranch {
                from: br.from,
                to: br.to,
                reason: format!("tap ratio {tap} is not positive"),
            });
        }
        branches.push(Branch {
            from,
            to,
            series_r: br.r_pu,
            series_x: br.x_pu,
            charging_b: br.b_pu,
            tap,
            shift: br.shift_deg.to_radians(),
            in_service: true,
        });
    }

    Ok(NetworkModel {
        base_mva: base,
        buses,
        branches,
        pv_gens,
        poly_loads: Vec::new(),
        scale: InjectionScale::default(),
    })
}

/// Scales every non-slack load and every PV generator's real output by
/// `lambda`. Slack bus, shunts and polynomial loads are left alone.
pub fn apply_loading(net: &NetworkModel, lambda: f64) -> NetworkModel {
    let mut out = net.clone();
    out.scale.loading *= lambda;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::parse_matpower;

    const CASE2: &str = include_str!("../../fixtures/case2.m");
    const CASE14: &str = include_str!("../../fixtures/case14.m");

    fn two_bus_with(pd: f64, extra_gens: &str) -> String {
        CASE2
            .replace("\t2\t1\t0\t0\t0", &format!("\t2\t1\t{pd}\t0\t0"))
            .replace("mpc.gen = [\n", &format!("mpc.gen = [\n{extra_gens}"))
    }

    #[test]
    fn per_unit_conversion() {
        let net = build_network(&parse_matpower(&two_bus_with(100.0, "")).unwrap()).unwrap();
        assert_eq!(net.p_load(1), 1.0);
        assert_eq!(net.buses[0].kind, BusKind::Slack);
        assert_eq!(net.buses[1].kind, BusKind::Pq);
    }

    #[test]
    fn generators_at_one_bus_are_aggregated() {
        let text = two_bus_with(0.0, "\t2\t50\t0\t0\t0\t1.02\t100\t1;\n\t2\t30\t0\t0\t0\t1.02\t100\t1;\n")
            .replace("\t2\t1\t0\t0", "\t2\t2\t0\t0");
        let net = build_network(&parse_matpower(&text).unwrap()).unwrap();
        assert_eq!(net.pv_gens.len(), 1);
        assert!((net.pv_gens[0].p_gen - 0.8).abs() < 1e-15);
        assert_eq!(net.pv_gens[0].v_set, 1.02);
        assert_eq!(net.buses[1].kind, BusKind::Pv);
    }

    #[test]
    fn conflicting_setpoints() {
        let text = two_bus_with(0.0, "\t2\t50\t0\t0\t0\t1.02\t100\t1;\n\t2\t30\t0\t0\t0\t1.05\t100\t1;\n")
            .replace("\t2\t1\t0\t0", "\t2\t2\t0\t0");
        assert_eq!(
            build_network(&parse_matpower(&text).unwrap()),
            Err(CaseError::ConflictingVset(2))
        );
    }

    #[test]
    fn pv_bus_without_generator_is_demoted() {
        let text = two_bus_with(0.0, "\t2\t50\t0\t0\t0\t1.02\t100\t0;\n")
            .replace("\t2\t1\t0\t0", "\t2\t2\t0\t0");
        let net = build_network(&parse_matpower(&text).unwrap()).unwrap();
        assert_eq!(net.buses[1].kind, BusKind::Pq);
        assert!(net.pv_gens.is_empty());
    }

    #[test]
    fn slack_errors() {
        let mut raw = parse_matpower(CASE2).unwrap();
        raw.bus_rows[0].kind_code = 1;
        assert_eq!(build_network(&raw), Err(CaseError::NoSlack));
        raw.bus_rows[0].kind_code = 3;
        raw.bus_rows[1].kind_code = 3;
        assert_eq!(build_network(&raw), Err(CaseError::MultipleSlack(1, 2)));
    }

    #[test]
    fn reference_errors() {
        let mut raw = parse_matpower(CASE2).unwrap();
        raw.bus_rows[1].id = 1;
        assert_eq!(build_network(&raw), Err(CaseError::DuplicateBusId(1)));

        let mut raw = parse_matpower(CASE2).unwrap();
        raw.branch_rows[0].to = 7;
        assert_eq!(build_network(&raw), Err(CaseError::BranchToUnknownBus { from: 1, to: 7 }));

        let mut raw = parse_matpower(CASE2).unwrap();
        raw.branch_rows[0].r_pu = 0.0;
        raw.branch_rows[0].x_pu = 0.0;
        assert!(matches!(build_network(&raw), Err(CaseError::InvalidBranch { .. })));
    }

    #[test]
    fn out_of_service_branch_dropped() {
        let mut raw = parse_matpower(CASE14).unwrap();
        raw.branch_rows[3].in_service = false;
        let net = build_network(&raw).unwrap();
        assert_eq!(net.branches.len(), 19);
    }

    #[test]
    fn ieee14_structure() {
        let net = build_network(&parse_matpower(CASE14).unwrap()).unwrap();
        assert_eq!(net.n_bus(), 14);
        assert_eq!(net.pv_gens.len(), 4);
        assert_eq!(net.slack_bus().id, 1);
        assert_eq!(net.slack_bus().v_set, 1.06);
        assert_eq!(net.branches.len(), 20);
        assert!((net.buses[8].b_shunt - 0.19).abs() < 1e-15);
        let pv_ids: Vec<i64> = net.pv_gens.iter().map(|g| net.buses[g.bus].id).collect();
        assert_eq!(pv_ids, vec![2, 3, 6, 8]);
    }

    #[test]
    fn loading_identity_and_annihilation() {
        let net = build_network(&parse_matpower(CASE14).unwrap()).unwrap();
        assert_eq!(apply_loading(&net, 1.0), net);
        let zero = apply_loading(&net, 0.0);
        for i in 0..net.n_bus() {
            if net.buses[i].kind != BusKind::Slack {
                assert_eq!(zero.p_load(i), 0.0);
                assert_eq!(zero.q_load(i), 0.0);
            }
        }
        assert!((0..net.pv_gens.len()).all(|g| zero.p_gen(g) == 0.0));
        let four = apply_loading(&net, 4.0);
        for i in 0..net.n_bus() {
            assert_eq!(four.p_load(i), 4.0 * net.p_load(i));
            assert_eq!(four.buses[i].g_shunt, net.buses[i].g_shunt);
        }
    }

    #[test]
    fn build_is_deterministic() {
        let raw = parse_matpower(CASE14).unwrap();
        assert_eq!(build_network(&raw).unwrap(), build_network(&raw).unwrap());
    }
}
