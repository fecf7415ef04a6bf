//! Geometry kernels against finite-difference recomputations of their
//! defining formulas.

use std::collections::BTreeMap;
use std::sync::Arc;

use finsler_core::geometry::{min_order, Geometry};
use finsler_core::{JetContext, MetricModel};

use super::oracle::{along, jac_x, jac_y, rel_gap, richardson, Oracle};

/// Worst relative gap per kernel name.
#[derive(Default)]
pub struct Gaps(pub BTreeMap<&'static str, f64>);

impl Gaps {
    pub fn record(&mut self, name: &'static str, got: &[f64], want: &[f64]) {
        self.note(name, rel_gap(got, want));
    }

    pub fn note(&mut self, name: &'static str, gap: f64) {
        let slot = self.0.entry(name).or_insert(0.0);
        *slot = if gap.is_nan() { f64::NAN } else { slot.max(gap) };
    }

    /// Entries at or above `tol` (NaN included).
    pub fn above(&self, tol: f64) -> Vec<(&'static str, f64)> {
        self.0.iter().filter(|(_, g)| !(**g < tol)).map(|(k, g)| (*k, *g)).collect()
    }

    pub fn worst(&self) -> f64 {
        self.0.values().fold(0.0, |m, g| m.max(*g))
    }

    pub fn assert_below(&self, model: &str, tol: f64) {
        let bad = self.above(tol);
        assert!(bad.is_empty(), "{model}: residuals at or above {tol:e}: {bad:?}");
    }
}

/// Every kernel up to `Ric` against the oracle at `samples` points.
pub fn shallow_kernels(model: &MetricModel, samples: usize, seed: u64, gaps: &mut Gaps) {
    let n = model.dim();
    let ctx = Arc::new(JetContext::new(n, min_order::RICCI).unwrap());
    let shallow = Oracle { model, h: 2e-3 };
    let deep = Oracle { model, h: 6e-3 };
    let coarse = Oracle { model, h: 1.2e-2 };
    for (x, y) in model.domain_sample(samples, seed).unwrap() {
        let geo = Geometry::with_context(model, &ctx, &x, &y).unwrap();
        gaps.record("g", &geo.fundamental_tensor().comps, &shallow.fundamental(&x, &y));
        gaps.record("g_inv", &geo.inverse_fundamental().comps, &shallow.inverse_fundamental(&x, &y));
        gaps.record("cartan", &geo.cartan().unwrap().comps, &shallow.cartan(&x, &y));
        gaps.record("mean_cartan", &geo.mean_cartan().unwrap().comps, &shallow.mean_cartan(&x, &y));
        gaps.record("hilbert", &geo.hilbert_form().unwrap().comps, &shallow.hilbert_form(&x, &y));
        gaps.record("spray", &geo.spray().unwrap().comps, &shallow.spray(&x, &y));
        gaps.record(
            "connection",
            &geo.nonlinear_connection().unwrap().comps,
            &shallow.nonlinear_connection(&x, &y),
        );
        gaps.record("christoffel", &geo.christoffel().unwrap().comps, &shallow.christoffel(&x, &y));
        let (p_fine, mean_fine) = deep.landsberg(&x, &y);
        let (p_coarse, mean_coarse) = coarse.landsberg(&x, &y);
        gaps.record("landsberg", &geo.landsberg().unwrap().comps, &richardson(&p_fine, &p_coarse));
        gaps.record(
            "mean_landsberg",
            &geo.mean_landsberg().unwrap().comps,
            &richardson(&mean_fine, &mean_coarse),
        );
        let ric = richardson(&[deep.ricci_scalar(&x, &y)], &[coarse.ricci_scalar(&x, &y)]);
        gaps.record("ricci", &[geo.ricci_scalar().unwrap()], &ric);
    }
}

/// The vertical Hessian of `Ric` and the `𝔓` scalars, differenced from the
/// pipeline values one level down.
pub fn deep_kernels(model: &MetricModel, samples: usize, seed: u64, gaps: &mut Gaps) {
    let n = model.dim();
    let h = 2e-3;
    let ctx = |order| Arc::new(JetContext::new(n, order).unwrap());
    let (landsberg, ricci_ctx, pfrak_ctx) = (ctx(min_order::LANDSBERG), ctx(min_order::RICCI), ctx(min_order::PFRAK));
    let high = ctx(min_order::PFRAK_DYNAMICAL);
    let at = |x: &[f64], y: &[f64]| Geometry::with_context(model, &landsberg, x, y).unwrap();
    let ricci = |x: &[f64], y: &[f64]| {
        vec![Geometry::with_context(model, &ricci_ctx, x, y).unwrap().ricci_scalar().unwrap()]
    };
    let mean_p = |x: &[f64], y: &[f64]| at(x, y).mean_landsberg().unwrap().comps;
    // P_{i|j} = δ_j P_i − Γ^m_ji P_m at [i][j]
    let p_hor = |x: &[f64], y: &[f64]| {
        let geo = at(x, y);
        let nl = geo.nonlinear_connection().unwrap().comps;
        let gamma = geo.christoffel().unwrap().comps;
        let p = geo.mean_landsberg().unwrap().comps;
        let px = jac_x(&mean_p, x, y, h);
        let py = jac_y(&mean_p, x, y, h);
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = px[i * n + j];
                for a in 0..n {
                    v -= nl[a * n + j] * py[i * n + a];
                    v -= gamma[(a * n + j) * n + i] * p[a];
                }
                out[i * n + j] = v;
            }
        }
        out
    };
    let p_dyn = |x: &[f64], y: &[f64]| {
        let ph = p_hor(x, y);
        (0..n)
            .map(|i| (0..n).map(|j| y[j] * ph[i * n + j]).sum())
            .collect::<Vec<f64>>()
    };
    let pfrak = |x: &[f64], y: &[f64]| {
        vec![Geometry::with_context(model, &pfrak_ctx, x, y).unwrap().pfrak().unwrap()]
    };
    for (x, y) in model.domain_sample(samples, seed).unwrap() {
        let geo = Geometry::with_context(model, &high, &x, &y).unwrap();
        let hess = jac_y(&|x: &[f64], y: &[f64]| jac_y(&ricci, x, y, h), &x, &y, h);
        gaps.record("ricci_hessian", &geo.ricci_vertical_hessian().unwrap().comps, &hess);

        let ginv = geo.inverse_fundamental().comps;
        let p = geo.mean_landsberg().unwrap().comps;
        let ph = p_hor(&x, &y);
        let p0y = jac_y(&p_dyn, &x, &y, h);
        let mut want = 0.0;
        for i in 0..n {
            for j in 0..n {
                want += ginv[i * n + j] * (ph[i * n + j] - p[i] * p[j] + p0y[i * n + j]);
            }
        }
        gaps.record("pfrak", &[geo.pfrak().unwrap()], &[want]);

        // 𝔓_{|0} = yʲ∂_j𝔓 − yʲ Nᵃ_j ∂̇_a𝔓
        let nl = geo.nonlinear_connection().unwrap().comps;
        let dy_p = jac_y(&pfrak, &x, &y, h);
        let mut want = along(&pfrak, &x, &y, h)[0];
        for j in 0..n {
            for a in 0..n {
                want -= y[j] * nl[a * n + j] * dy_p[a];
            }
        }
        gaps.record("pfrak_dynamical", &[geo.pfrak_dynamical().unwrap()], &[want]);
    }
}
