//! Residuals of the identities that hold exactly for every Finsler metric.

use std::sync::Arc;

use finsler_core::geometry::{min_order, Geometry, JetTensor, TensorValue};
use finsler_core::{JetContext, MetricModel};

use super::kernels::Gaps;

fn scaled_gap(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / scale
}

type Kernel = fn(&Geometry) -> TensorValue;

/// Kernels with their degree of homogeneity in `y`.
const LADDER: [(&str, i32, Kernel); 10] = [
    ("homogeneity g", 0, |g| g.fundamental_tensor()),
    ("homogeneity g_inv", 0, |g| g.inverse_fundamental()),
    ("homogeneity hilbert", 0, |g| g.hilbert_form().unwrap()),
    ("homogeneity landsberg", 0, |g| g.landsberg().unwrap()),
    ("homogeneity mean_landsberg", 0, |g| g.mean_landsberg().unwrap()),
    ("homogeneity christoffel", 0, |g| g.christoffel().unwrap()),
    ("homogeneity cartan", -1, |g| g.cartan().unwrap()),
    ("homogeneity mean_cartan", -1, |g| g.mean_cartan().unwrap()),
    ("homogeneity connection", 1, |g| g.nonlinear_connection().unwrap()),
    ("homogeneity spray", 2, |g| g.spray().unwrap()),
];

/// `f(x, 2y)` against `2^r f(x, y)`, and `Ric(x, 2y)` against `4 Ric(x, y)`.
pub fn homogeneity(model: &MetricModel, samples: usize, seed: u64, gaps: &mut Gaps) {
    let ctx = Arc::new(JetContext::new(model.dim(), min_order::RICCI).unwrap());
    for (x, y) in model.domain_sample(samples, seed).unwrap() {
        let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        let at = Geometry::with_context(model, &ctx, &x, &y).unwrap();
        let at2 = Geometry::with_context(model, &ctx, &x, &y2).unwrap();
        for (name, degree, kernel) in LADDER {
            let factor = 2f64.powi(degree);
            let expected: Vec<f64> = kernel(&at).comps.iter().map(|v| factor * v).collect();
            gaps.note(name, scaled_gap(&kernel(&at2).comps, &expected));
        }
        let ric = at.ricci_scalar().unwrap();
        gaps.note("homogeneity ricci", scaled_gap(&[at2.ricci_scalar().unwrap()], &[4.0 * ric]));
    }
}

/// `g_ij|k`, `g^ij_|k`, `L_|0`, `y^k C_ijk`, `y^i P_i`, `g^ij_·i + 2C^j` and
/// `y^j y^k Γ^i_jk − 2G^i`.
pub fn contractions(model: &MetricModel, samples: usize, seed: u64, gaps: &mut Gaps) {
    let n = model.dim();
    let ctx = Arc::new(JetContext::new(n, min_order::LANDSBERG).unwrap());
    for (x, y) in model.domain_sample(samples, seed).unwrap() {
        let geo = Geometry::with_context(model, &ctx, &x, &y).unwrap();
        let g = geo.chern_derivative(&geo.fundamental_jets()).unwrap();
        let ginv = geo.chern_derivative(&geo.inverse_fundamental_jets()).unwrap();
        gaps.note("g_ij|k", g.horizontal.max_abs());
        gaps.note("g^ij_|k", ginv.horizontal.max_abs());
        let l = geo.dynamical(&JetTensor::scalar(geo.lagrangian_jet().clone(), n)).unwrap();
        gaps.note("L_|0", l.comps()[0].value().abs() / geo.lagrangian().max(1.0));

        let c = geo.cartan().unwrap();
        let p = geo.mean_landsberg().unwrap();
        let gamma = geo.christoffel().unwrap();
        let spray = geo.spray().unwrap();
        let dginv = geo.vertical(&geo.inverse_fundamental_jets()).unwrap().value(geo.sample());
        let g_inv = geo.inverse_fundamental();
        let mean_c = geo.mean_cartan().unwrap();
        for i in 0..n {
            for j in 0..n {
                let yc: f64 = (0..n).map(|k| y[k] * c.get(&[i, j, k])).sum();
                gaps.note("y^k C_ijk", yc.abs());
            }
            let yyg: f64 = (0..n)
                .flat_map(|j| (0..n).map(move |k| (j, k)))
                .map(|(j, k)| y[j] * y[k] * gamma.get(&[i, j, k]))
                .sum();
            let two_g = 2.0 * spray.get(&[i]);
            gaps.note("y^j y^k Γ^i_jk − 2G^i", (yyg - two_g).abs() / two_g.abs().max(1.0));

            let trace: f64 = (0..n).map(|a| dginv.get(&[a, i, a])).sum();
            let want: f64 = -2.0 * (0..n).map(|a| g_inv.get(&[i, a]) * mean_c.get(&[a])).sum::<f64>();
            gaps.note("g^ij_·i + 2C^j", (trace - want).abs());
        }
        let yp: f64 = (0..n).map(|i| y[i] * p.get(&[i])).sum();
        gaps.note("y^i P_i", yp.abs());
    }
}
