use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::ybus::build_ybus;
use crate::case::{BusKind, NetworkModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolarError {
    #[error("the polar reference solver does not model polynomial loads")]
    PolyLoadsUnsupported,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarSolution {
    pub vm: Vec<f64>,
    pub va: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl PolarSolution {
    pub fn voltages(&self) -> Vec<Complex64> {
        self.vm.iter().zip(&self.va).map(|(&m, &a)| Complex64::from_polar(m, a)).collect()
    }
}

/// Unknown ordering: angles of all non-slack buses, then magnitudes of PQ buses.
struct PolarIndex {
    angle: Vec<usize>,
    magnitude: Vec<usize>,
}

impl PolarIndex {
    fn new(net: &NetworkModel) -> Self {
        Self {
            angle: net.buses.iter().filter(|b| b.kind != BusKind::Slack).map(|b| b.index).collect(),
            magnitude: net.buses.iter().filter(|b| b.kind == BusKind::Pq).map(|b| b.index).collect(),
        }
    }

    fn len(&self) -> usize {
        self.angle.len() + self.magnitude.len()
    }
}

fn injections(y: &DMatrix<Complex64>, vm: &[f64], va: &[f64]) -> Vec<Complex64> {
    let v: Vec<Complex64> = vm.iter().zip(va).map(|(&m, &a)| Complex64::from_polar(m, a)).collect();
    (0..v.len())
        .map(|i| v[i] * (0..v.len()).map(|k| y[(i, k)] * v[k]).sum::<Complex64>().conj())
        .collect()
}

/// `[ΔP (non-slack); ΔQ (PQ)]`, calculated minus scheduled.
pub fn polar_mismatch(net: &NetworkModel, vm: &[f64], va: &[f64]) -> Vec<f64> {
    let y = build_ybus(net);
    let idx = PolarIndex::new(net);
    let s = injections(&y, vm, va);
    let mut p_sched: Vec<f64> = (0..net.n_bus()).map(|i| -net.p_load(i)).collect();
    for g in 0..net.pv_gens.len() {
        p_sched[net.pv_gens[g].bus] += net.p_gen(g);
    }
    idx.angle
        .iter()
        .map(|&i| s[i].re - p_sched[i])
        .chain(idx.magnitude.iter().map(|&i| s[i].im + net.q_load(i)))
        .collect()
}

/// Analytic Jacobian of [`polar_mismatch`] with respect to `[θ; |V|]`.
/// It depends on the admittances and voltages only.
pub fn polar_jacobian(net: &NetworkModel, vm: &[f64], va: &[f64]) -> DMatrix<f64> {
    let y = build_ybus(net);
    let idx = PolarIndex::new(net);
    let s = injections(&y, vm, va);
    let n_ang = idx.angle.len();
    let mut j = DMatrix::zeros(idx.len(), idx.len());

    // ∂P_i, ∂Q_i with respect to θ_k and |V_k|
    let partials = |i: usize, k: usize| -> [f64; 4] {
        let (g, b) = (y[(i, k)].re, y[(i, k)].im);
        if i == k {
            let (p, q) = (s[i].re, s[i].im);
            let v = vm[i];
            [-q - b * v * v, p / v + g * v, p - g * v * v, q / v - b * v]
        } else {
            let (c, sn) = ((va[i] - va[k]).cos(), (va[i] - va[k]).sin());
            let vv = vm[i] * vm[k];
            [
                vv * (g * sn - b * c),
                vm[i] * (g * c + b * sn),
                -vv * (g * c + b * sn),
                vm[i] * (g * sn - b * c),
            ]
        }
    };

    for (r, &i) in idx.angle.iter().enumerate() {
        for (c, &k) in idx.angle.iter().enumerate() {
            j[(r, c)] = partials(i, k)[0];
        }
        for (c, &k) in idx.magnitude.iter().enumerate() {
            j[(r, n_ang + c)] = partials(i, k)[1];
        }
    }
    for (r, &i) in idx.magnitude.iter().enumerate() {
        for (c, &k) in idx.angle.iter().enumerate() {
            j[(n_ang + r, c)] = partials(i, k)[2];
        }
        for (c, &k) in idx.magnitude.iter().enumerate() {
            j[(n_ang + r, n_ang + c)] = partials(i, k)[3];
        }
    }
    j
}

/// Classic polar Newton-Raphson from a flat start, dense linear algebra.
pub fn polar_nr_reference(
    net: &NetworkModel,
    tol: f64,
    max_iter: usize,
) -> Result<PolarSolution, PolarError> {
    if !net.poly_loads.is_empty() {
        return Err(PolarError::PolyLoadsUnsupported);
    }
    let idx = PolarIndex::new(net);
    let mut vm: Vec<f64> = net
        .buses
        .iter()
        .map(|b| if b.kind == BusKind::Pq { 1.0 } else { b.v_set })
        .collect();
    let mut va: Vec<f64> = net
        .buses
        .iter()
        .map(|b| if b.kind == BusKind::Slack { b.theta_set } else { 0.0 })
        .collect();

    let out = |vm: Vec<f64>, va: Vec<f64>, converged, iterations| {
        Ok(PolarSolution { vm, va, converged, iterations })
    };
    for it in 0..=max_iter {
        let f = polar_mismatch(net, &vm, &va);
        let norm = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !norm.is_finite() {
            return out(vm, va, false, it);
        }
        if norm < tol {
            return out(vm, va, true, it);
        }
        if it == max_iter {
            break;
        }
        let jac = polar_jacobian(net, &vm, &va);
        let rhs = -DVector::from_vec(f);
        let Some(dx) = jac.lu().solve(&rhs) else {
            return out(vm, va, false, it);
        };
        for (r, &i) in idx.angle.iter().enumerate() {
            va[i] += dx[r];
        }
        for (r, &i) in idx.magnitude.iter().enumerate() {
            vm[i] += dx[idx.angle.len() + r];
        }
    }
    out(vm, va, false, max_iter)
}
