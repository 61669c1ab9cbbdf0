use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::case::NetworkModel;

/// Dense complex bus admittance matrix.
pub fn build_ybus(net: &NetworkModel) -> DMatrix<Complex64> {
    let n = net.n_bus();
    let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for br in net.branches.iter().filter(|b| b.in_service) {
        let denom = br.series_r * br.series_r + br.series_x * br.series_x;
        let series = Complex64::new(br.series_r / denom, -br.series_x / denom);
        let half_charging = Complex64::new(0.0, 0.5 * br.charging_b);
        let (c, s) = (br.shift.cos(), br.shift.sin());
        // t = tap·e^{jφ}
        let t = Complex64::new(br.tap * c, br.tap * s);
        let (f, k) = (br.from, br.to);
        y[(f, f)] += (series + half_charging) / (br.tap * br.tap);
        y[(k, k)] += series + half_charging;
        y[(f, k)] -= series / t.conj();
        y[(k, f)] -= series / t;
    }
    for bus in &net.buses {
        y[(bus.index, bus.index)] += Complex64::new(bus.g_shunt, bus.b_shunt);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::{build_network, parse_matpower};
    use crate::circuit::{stamp_branch, stamp_shunt, UnknownLayout};
    use crate::solver::SparseMatrix;

    fn net(text: &str) -> NetworkModel {
        build_network(&parse_matpower(text).unwrap()).unwrap()
    }

    #[test]
    fn pure_reactance_entries() {
        let mut n = net(include_str!("../../fixtures/case2.m"));
        n.branches[0].series_r = 0.0;
        let y = build_ybus(&n);
        assert!((y[(0, 0)] - Complex64::new(0.0, -10.0)).norm() < 1e-12);
        assert!((y[(0, 1)] - Complex64::new(0.0, 10.0)).norm() < 1e-12);
        assert_eq!(y[(0, 1)], y[(1, 0)]);
    }

    /// The linear part of the split assembly is `−[[G, −B], [B, G]]`.
    #[test]
    fn split_stamps_match_negated_ybus() {
        let mut n = net(include_str!("../../fixtures/case14.m"));
        // exercise a phase shifter as well
        n.branches[7].shift = 0.05;
        let layout = UnknownLayout::build(&n);
        let mut triplets = Vec::new();
        for br in &n.branches {
            triplets.extend(stamp_branch(br, &layout).unwrap().jacobian);
        }
        for bus in &n.buses {
            triplets.extend(stamp_shunt(bus, &layout).jacobian);
        }
        let a = SparseMatrix::from_triplets(layout.n_unknowns(), triplets);
        let y = build_ybus(&n);
        for i in 0..n.n_bus() {
            for k in 0..n.n_bus() {
                let (g, b) = (y[(i, k)].re, y[(i, k)].im);
                let (ri, ii) = (layout.vr_index(i), layout.vi_index(i));
                let (rk, ik) = (layout.vr_index(k), layout.vi_index(k));
                for (got, want) in [
                    (a.get(ri, rk), -g),
                    (a.get(ri, ik), b),
                    (a.get(ii, rk), -b),
                    (a.get(ii, ik), -g),
                ] {
                    assert!((got - want).abs() < 1e-12, "bus {i},{k}: {got} vs {want}");
                }
            }
        }
    }
}
