//! The pointwise pipeline `L → g → G → N → Γ → P → Ric → 𝔓`, evaluated on
//! jets seeded at one tangent sample. Every stage loses derivative orders,
//! so deeper quantities need a larger context order; see [`min_order`].

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::OnceCell;

use super::tensor::{flat, unflat, DerivativeBundle, JetTensor, TangentSample, TensorValue, Variance};
use super::GeometryError;
use crate::jet::{seed, Jet, JetContext, JetError};
use crate::linalg;
use crate::metric::{MetricModel, SINGULAR_CONDITION};

/// Smallest context order each quantity can be evaluated with.
pub mod min_order {
    pub const FUNDAMENTAL: usize = 2;
    pub const HILBERT: usize = 2;
    pub const CARTAN: usize = 3;
    pub const SPRAY: usize = 3;
    pub const CONNECTION: usize = 3;
    pub const CHRISTOFFEL: usize = 4;
    pub const LANDSBERG: usize = 4;
    pub const RICCI: usize = 5;
    pub const RICCI_HESSIAN: usize = 6;
    pub const PFRAK: usize = 6;
    pub const PFRAK_DYNAMICAL: usize = 7;
    pub const SCHUR: usize = 7;
    pub const LEMMA1: usize = 7;
    pub const BIANCHI: usize = 7;
}

/// Which form of the Schur-corollary scalar to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SchurVariant {
    /// `g^{ij}(P_{i|j|0} − 2 P_i P_{j|0} − P_{i|0·j|0})`.
    AsPrinted,
    /// `𝔓_{|0}` evaluated directly.
    AsExpanded,
}

/// Integrands of the unconditional fiber identity at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Integrands {
    /// `{g^{ab} Ric_{·a·b} − (n+2) Ric/F²}_{|0}`
    pub lhs: f64,
    /// `−2 𝔓_{|0}`
    pub rhs_folded: f64,
    /// `−2 g^{ab} (P_{a|b} − P_a P_b + P_{a|0·b})_{|0}`
    pub rhs_printed: f64,
}

fn cached<'a, T>(
    cell: &'a OnceCell<T>,
    init: impl FnOnce() -> Result<T, GeometryError>,
) -> Result<&'a T, GeometryError> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = init()?;
    Ok(cell.get_or_init(|| v))
}

#[derive(Default)]
struct Cache {
    f: OnceCell<Jet>,
    cartan: OnceCell<Vec<Jet>>,
    spray: OnceCell<Vec<Jet>>,
    connection: OnceCell<Vec<Jet>>,
    connection_vertical: OnceCell<Vec<Jet>>,
    christoffel: OnceCell<Vec<Jet>>,
    landsberg: OnceCell<Vec<Jet>>,
    mean_landsberg: OnceCell<Vec<Jet>>,
    ricci: OnceCell<Jet>,
    ricci_hessian: OnceCell<Vec<Jet>>,
    mean_landsberg_h: OnceCell<JetTensor>,
    mean_landsberg_dv: OnceCell<JetTensor>,
    pfrak: OnceCell<Jet>,
}

/// All geometric objects of a model at one tangent sample.
///
/// Quantities are computed on first use and cached; a `Geometry` is cheap to
/// build when only low-order objects are needed.
pub struct Geometry<'m> {
    model: &'m MetricModel,
    sample: TangentSample,
    ctx: Arc<JetContext>,
    n: usize,
    xs: Vec<Jet>,
    ys: Vec<Jet>,
    l: Jet,
    g: Vec<Jet>,
    ginv: Vec<Jet>,
    cache: Cache,
}

impl<'m> Geometry<'m> {
    /// Builds a fresh jet context of the given order.
    pub fn new(model: &'m MetricModel, x: &[f64], y: &[f64], order: usize) -> Result<Self, GeometryError> {
        let ctx = Arc::new(JetContext::new(model.dim(), order)?);
        Self::with_context(model, &ctx, x, y)
    }

    /// Reuses a context; building one is the expensive part for high orders,
    /// so loops over samples should share it.
    pub fn with_context(
        model: &'m MetricModel,
        ctx: &Arc<JetContext>,
        x: &[f64],
        y: &[f64],
    ) -> Result<Self, GeometryError> {
        let n = model.dim();
        if ctx.dim() != n || x.len() != n || y.len() != n {
            return Err(JetError::DimensionMismatch {
                expected: n,
                found: if ctx.dim() != n { ctx.dim() } else { x.len().min(y.len()) },
            }
            .into());
        }
        require(ctx, "fundamental tensor", min_order::FUNDAMENTAL)?;
        if !model.contains(x, y) {
            return Err(GeometryError::OutsideDomain {
                x: x.to_vec(),
                y: y.to_vec(),
            });
        }
        let point: Vec<f64> = x.iter().chain(y).copied().collect();
        let mut seeds = seed(ctx, &point)?;
        let ys = seeds.split_off(n);
        let xs = seeds;
        let l = model.lagrangian(&xs, &ys)?;
        let dly = (0..n).map(|c| l.derivative(n + c)).collect::<Result<Vec<_>, _>>()?;
        let mut g = vec![l.zero_like(); n * n];
        for i in 0..n {
            for j in i..n {
                let gij = dly[i].derivative(n + j)?.scale(0.5);
                g[j * n + i] = gij.clone();
                g[i * n + j] = gij;
            }
        }
        let values: Vec<f64> = g.iter().map(Jet::value).collect();
        let condition = linalg::condition_number(&values, n);
        if !(condition <= SINGULAR_CONDITION) {
            return Err(GeometryError::Singular {
                condition,
                x: x.to_vec(),
                y: y.to_vec(),
            });
        }
        let ginv = linalg::inverse_jets(&g, n)?;
        Ok(Self {
            model,
            sample: TangentSample::new(x, y),
            ctx: Arc::clone(ctx),
            n,
            xs,
            ys,
            l,
            g,
            ginv,
            cache: Cache::default(),
        })
    }

    pub fn model(&self) -> &MetricModel {
        self.model
    }

    pub fn sample(&self) -> &TangentSample {
        &self.sample
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.ctx.max_order()
    }

    pub fn context(&self) -> &Arc<JetContext> {
        &self.ctx
    }

    fn require(&self, quantity: &'static str, min: usize) -> Result<(), GeometryError> {
        require(&self.ctx, quantity, min)
    }

    fn value_of(&self, slots: Vec<Variance>, comps: &[Jet]) -> TensorValue {
        TensorValue {
            dim: self.n,
            slots,
            comps: comps.iter().map(Jet::value).collect(),
            sample: self.sample.clone(),
        }
    }

    // ---- jets ------------------------------------------------------------

    /// Seed jets of the chart variables `x` and `y`.
    pub fn variables(&self) -> (&[Jet], &[Jet]) {
        (&self.xs, &self.ys)
    }

    pub fn lagrangian_jet(&self) -> &Jet {
        &self.l
    }

    /// `F = √L` as a jet.
    pub fn finsler_jet(&self) -> Result<&Jet, GeometryError> {
        cached(&self.cache.f, || {
            if self.l.value() <= 0.0 {
                return Err(GeometryError::NonPositiveLagrangian { value: self.l.value() });
            }
            Ok(self.l.sqrt()?)
        })
    }

    pub fn fundamental_jets(&self) -> JetTensor {
        JetTensor::new(self.n, vec![Variance::Covariant; 2], self.g.clone())
    }

    pub fn inverse_fundamental_jets(&self) -> JetTensor {
        JetTensor::new(self.n, vec![Variance::Contravariant; 2], self.ginv.clone())
    }

    fn cartan_jets(&self) -> Result<&Vec<Jet>, GeometryError> {
        self.require("Cartan tensor", min_order::CARTAN)?;
        cached(&self.cache.cartan, || {
            let n = self.n;
            let mut c = vec![self.l.zero_like(); n * n * n];
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let v = self.g[i * n + j].derivative(n + k)?.scale(0.5);
                        for p in permutations(i, j, k) {
                            c[flat(&p, n)] = v.clone();
                        }
                    }
                }
            }
            Ok(c)
        })
    }

    fn spray_jets(&self) -> Result<&Vec<Jet>, GeometryError> {
        self.require("spray", min_order::SPRAY)?;
        cached(&self.cache.spray, || {
            let n = self.n;
            // G^i = ¼ g^{ic} (y^a ∂_a ∂̇_c L − ∂_c L)
            let mut h = Vec::with_capacity(n);
            for c in 0..n {
                let dyc = self.l.derivative(n + c)?;
                let mut acc = self.l.derivative(c)?.neg();
                for a in 0..n {
                    acc = acc.add(&self.ys[a].mul(&dyc.derivative(a)?));
                }
                h.push(acc);
            }
            Ok((0..n)
                .map(|i| Jet::dot(&self.ginv[i * n..(i + 1) * n], &h).scale(0.25))
                .collect())
        })
    }

    /// `N^i_j` stored at `i·n + j`.
    fn connection_jets(&self) -> Result<&Vec<Jet>, GeometryError> {
        self.require("nonlinear connection", min_order::CONNECTION)?;
        cached(&self.cache.connection, || {
            let n = self.n;
            let spray = self.spray_jets()?;
            let mut out = Vec::with_capacity(n * n);
            for gi in spray {
                for j in 0..n {
                    out.push(gi.derivative(n + j)?);
                }
            }
            Ok(out)
        })
    }

    /// `∂̇_k N^a_j = G^a_{·j·k}` stored at `[a][j][k]`.
    fn connection_vertical_jets(&self) -> Result<&Vec<Jet>, GeometryError> {
        self.require("Landsberg tensor", min_order::LANDSBERG)?;
        cached(&self.cache.connection_vertical, || {
            let n = self.n;
            let nl = self.connection_jets()?;
            let mut out = vec![self.l.zero_like(); n * n * n];
            for a in 0..n {
                for j in 0..n {
                    for k in j..n {
                        let v = nl[a * n + j].derivative(n + k)?;
                        out[flat(&[a, k, j], n)] = v.clone();
                        out[flat(&[a, j, k], n)] = v;
                    }
                }
            }
            Ok(out)
        })
    }

    /// `δ_j f = ∂_j f − N^a_j ∂̇_a f`.
    fn delta(&self, f: &Jet, j: usize) -> Result<Jet, GeometryError> {
        let n = self.n;
        let nl = self.connection_jets()?;
        let mut out = f.derivative(j)?;
        for a in 0..n {
            out = out.sub(&nl[a * n + j].mul(&f.derivative(n + a)?));
        }
        Ok(out)
    }

    /// `Γ^i_jk` stored at `[i][j][k]`.
    fn christoffel_jets(&self) -> Result<&Vec<Jet>, GeometryError> {
        self.require("Chern connection", min_order::CHRISTOFFEL)?;
        cached(&self.cache.christoffel, || {
            let n = self.n;
            let nl = self.connection_jets()?;
            let cartan = self.cartan_jets()?;
            // D[j][s][k] = δ_j g_sk, with ∂̇_a g_sk = 2 C_ska
            let mut d = vec![self.l.zero_like(); n * n * n];
            for j in 0..n {
                for s in 0..n {
                    for k in s..n {
                        let mut v = self.g[s * n + k].derivative(j)?;
                        for a in 0..n {
                            v = v.add_scaled(&nl[a * n + j].mul(&cartan[flat(&[s, k, a], n)]), -2.0);
                        }
                        d[flat(&[j, k, s], n)] = v.clone();
                        d[flat(&[j, s, k], n)] = v;
                    }
                }
            }
            let mut gamma = vec![self.l.zero_like(); n * n * n];
            for j in 0..n {
                for k in j..n {
                    let lowered: Vec<Jet> = (0..n)
                        .map(|s| {
                            d[flat(&[j, s, k], n)]
                                .add(&d[flat(&[k, j, s], n)])
                                .sub(&d[flat(&[s, j, k], n)])
                        })
                        .collect();
                    for i in 0..n {
                        let v = Jet::dot(&self.ginv[i * n..(i + 1) * n], &lowered).scale(0.5);
                        gamma[flat(&[i, k, j], n)] = v.clone();
                        gamma[flat(&[i, j, k], n)] = v;
                    }
                }
            }
            Ok(gamma)
        })
    }

    fn landsberg_jets(&self) -> Result<&Vec<Jet>, GeometryError> {
        self.require("Landsberg tensor", min_order::LANDSBERG)?;
        cached(&self.cache.landsberg, || {
            let n = self.n;
            let dn = self.connection_vertical_jets()?;
            let gamma = self.christoffel_jets()?;
            let mut p = vec![self.l.zero_like(); n * n * n];
            for j in 0..n {
                for k in j..n {
                    let diff: Vec<Jet> = (0..n)
                        .map(|a| dn[flat(&[a, j, k], n)].sub(&gamma[flat(&[a, j, k], n)]))
                        .collect();
                    for i in 0..n {
                        let v = Jet::dot(&self.g[i * n..(i + 1) * n], &diff);
                        p[flat(&[i, k, j], n)] = v.clone();
                        p[flat(&[i, j, k], n)] = v;
                    }
                }
            }
            Ok(p)
        })
    }

    fn mean_landsberg_jets(&self) -> Result<&Vec<Jet>, GeometryError> {
        self.require("mean Landsberg tensor", min_order::LANDSBERG)?;
        cached(&self.cache.mean_landsberg, || {
            let n = self.n;
            let dn = self.connection_vertical_jets()?;
            let gamma = self.christoffel_jets()?;
            Ok((0..n)
                .map(|i| {
                    let mut acc = dn[flat(&[0, 0, i], n)].sub(&gamma[flat(&[0, 0, i], n)]);
                    for a in 1..n {
                        acc = acc
                            .add(&dn[flat(&[a, a, i], n)])
                            .sub(&gamma[flat(&[a, a, i], n)]);
                    }
                    acc
                })
                .collect())
        })
    }

    fn ricci_jet(&self) -> Result<&Jet, GeometryError> {
        self.require("Ricci scalar", min_order::RICCI)?;
        cached(&self.cache.ricci, || {
            let n = self.n;
            let spray = self.spray_jets()?;
            let nl = self.connection_jets()?;
            let mut trace = nl[0].clone();
            for i in 1..n {
                trace = trace.add(&nl[i * n + i]);
            }
            // 2 ∂_i G^i − y^j ∂_j ∂̇_i G^i + 2 G^j ∂̇_j ∂̇_i G^i − ∂̇_j G^i ∂̇_i G^j
            let mut ric = spray[0].derivative(0)?.scale(2.0);
            for i in 1..n {
                ric = ric.add_scaled(&spray[i].derivative(i)?, 2.0);
            }
            for j in 0..n {
                ric = ric.sub(&self.ys[j].mul(&trace.derivative(j)?));
                ric = ric.add_scaled(&spray[j].mul(&trace.derivative(n + j)?), 2.0);
            }
            for i in 0..n {
                for j in 0..n {
                    ric = ric.sub(&nl[i * n + j].mul(&nl[j * n + i]));
                }
            }
            Ok(ric)
        })
    }

    fn ricci_hessian_jets(&self) -> Result<&Vec<Jet>, GeometryError> {
        self.require("vertical Hessian of Ric", min_order::RICCI_HESSIAN)?;
        cached(&self.cache.ricci_hessian, || {
            let n = self.n;
            let ric = self.ricci_jet()?;
            let mut out = vec![ric.zero_like(); n * n];
            for i in 0..n {
                let di = ric.derivative(n + i)?;
                for j in i..n {
                    let v = di.derivative(n + j)?;
                    out[j * n + i] = v.clone();
                    out[i * n + j] = v;
                }
            }
            Ok(out)
        })
    }

    /// `P_{i|j}`
    fn mean_landsberg_horizontal(&self) -> Result<&JetTensor, GeometryError> {
        self.require("𝔓", min_order::PFRAK)?;
        cached(&self.cache.mean_landsberg_h, || {
            let p = JetTensor::covector(self.mean_landsberg_jets()?.clone());
            self.horizontal(&p)
        })
    }

    /// `P_{i|0·j}`
    fn mean_landsberg_dyn_vertical(&self) -> Result<&JetTensor, GeometryError> {
        self.require("𝔓", min_order::PFRAK)?;
        cached(&self.cache.mean_landsberg_dv, || {
            let p0 = self.contract_last_with_y(self.mean_landsberg_horizontal()?);
            self.vertical(&p0)
        })
    }

    fn pfrak_jet(&self) -> Result<&Jet, GeometryError> {
        self.require("𝔓", min_order::PFRAK)?;
        cached(&self.cache.pfrak, || {
            let n = self.n;
            let p = self.mean_landsberg_jets()?;
            let ph = self.mean_landsberg_horizontal()?;
            let pdv = self.mean_landsberg_dyn_vertical()?;
            let q: Vec<Jet> = (0..n * n)
                .map(|k| {
                    let (i, j) = (k / n, k % n);
                    ph.comps[k].sub(&p[i].mul(&p[j])).add(&pdv.comps[k])
                })
                .collect();
            Ok(self.trace_with_inverse(&q))
        })
    }

    /// `g^{ij} T_ij`
    fn trace_with_inverse(&self, t: &[Jet]) -> Jet {
        Jet::dot(&self.ginv, t)
    }

    // ---- covariant calculus ------------------------------------------------

    /// Horizontal Chern derivative `T_{…|j}`; the new covariant index is the
    /// last slot.
    pub fn horizontal(&self, t: &JetTensor) -> Result<JetTensor, GeometryError> {
        self.require("horizontal derivative", min_order::CHRISTOFFEL)?;
        let n = self.n;
        if t.dim != n {
            return Err(JetError::DimensionMismatch { expected: n, found: t.dim }.into());
        }
        if t.order() == 0 {
            return Err(GeometryError::OrderBudget {
                quantity: "horizontal derivative",
                required: self.order() + 1,
                available: self.order(),
            });
        }
        let gamma = self.christoffel_jets()?;
        let rank = t.rank();
        let mut comps = Vec::with_capacity(t.comps.len() * n);
        for (k, comp) in t.comps.iter().enumerate() {
            let idx = unflat(k, n, rank);
            for j in 0..n {
                let mut v = self.delta(comp, j)?;
                for (slot, variance) in t.slots.iter().enumerate() {
                    let mut moved = idx.clone();
                    for m in 0..n {
                        moved[slot] = m;
                        let other = &t.comps[flat(&moved, n)];
                        match variance {
                            Variance::Covariant => {
                                v = v.sub(&gamma[flat(&[m, j, idx[slot]], n)].mul(other));
                            }
                            Variance::Contravariant => {
                                v = v.add(&gamma[flat(&[idx[slot], j, m], n)].mul(other));
                            }
                        }
                    }
                }
                comps.push(v);
            }
        }
        let mut slots = t.slots.clone();
        slots.push(Variance::Covariant);
        Ok(JetTensor::new(n, slots, comps))
    }

    /// Vertical derivative `T_{…·j} = ∂̇_j T`; the new index is the last slot.
    pub fn vertical(&self, t: &JetTensor) -> Result<JetTensor, GeometryError> {
        let n = self.n;
        let mut comps = Vec::with_capacity(t.comps.len() * n);
        for comp in &t.comps {
            for j in 0..n {
                comps.push(comp.derivative(n + j)?);
            }
        }
        let mut slots = t.slots.clone();
        slots.push(Variance::Covariant);
        Ok(JetTensor::new(n, slots, comps))
    }

    /// Dynamical derivative `T_{…|0} = y^j T_{…|j}`.
    pub fn dynamical(&self, t: &JetTensor) -> Result<JetTensor, GeometryError> {
        Ok(self.contract_last_with_y(&self.horizontal(t)?))
    }

    fn contract_last_with_y(&self, t: &JetTensor) -> JetTensor {
        let n = self.n;
        let comps = t.comps.chunks(n).map(|c| Jet::dot(c, &self.ys)).collect();
        let mut slots = t.slots.clone();
        slots.pop();
        JetTensor::new(n, slots, comps)
    }

    /// Evaluates a tensor field on the seed jets.
    pub fn evaluate_field<Fld>(&self, field: Fld) -> Result<JetTensor, GeometryError>
    where
        Fld: FnOnce(&[Jet], &[Jet]) -> Result<JetTensor, JetError>,
    {
        let t = field(&self.xs, &self.ys)?;
        if t.dim != self.n {
            return Err(JetError::DimensionMismatch {
                expected: self.n,
                found: t.dim,
            }
            .into());
        }
        Ok(t)
    }

    /// Value, vertical, horizontal and dynamical derivatives of `t`.
    pub fn chern_derivative(&self, t: &JetTensor) -> Result<DerivativeBundle, GeometryError> {
        let horizontal = self.horizontal(t)?;
        let dynamical = self.contract_last_with_y(&horizontal);
        Ok(DerivativeBundle {
            value: t.value(&self.sample),
            vertical: self.vertical(t)?.value(&self.sample),
            horizontal: horizontal.value(&self.sample),
            dynamical: dynamical.value(&self.sample),
        })
    }

    // ---- values ------------------------------------------------------------

    pub fn lagrangian(&self) -> f64 {
        self.l.value()
    }

    pub fn finsler(&self) -> Result<f64, GeometryError> {
        Ok(self.finsler_jet()?.value())
    }

    /// `g_ij = ½ ∂̇_i ∂̇_j L`
    pub fn fundamental_tensor(&self) -> TensorValue {
        self.value_of(vec![Variance::Covariant; 2], &self.g)
    }

    /// `g^{ij}`
    pub fn inverse_fundamental(&self) -> TensorValue {
        self.value_of(vec![Variance::Contravariant; 2], &self.ginv)
    }

    /// `C_ijk = ½ ∂̇_k g_ij`
    pub fn cartan(&self) -> Result<TensorValue, GeometryError> {
        Ok(self.value_of(vec![Variance::Covariant; 3], self.cartan_jets()?))
    }

    /// `C_i = g^{ab} C_iab`
    pub fn mean_cartan(&self) -> Result<TensorValue, GeometryError> {
        let n = self.n;
        let c = self.cartan_jets()?;
        let comps: Vec<Jet> = (0..n)
            .map(|i| self.trace_with_inverse(&c[i * n * n..(i + 1) * n * n]))
            .collect();
        Ok(self.value_of(vec![Variance::Covariant], &comps))
    }

    /// Hilbert form `ω_i = g_ia yᵃ / F`.
    pub fn hilbert_form(&self) -> Result<TensorValue, GeometryError> {
        self.require("Hilbert form", min_order::HILBERT)?;
        let n = self.n;
        let f = self.finsler()?;
        let g = self.fundamental_tensor();
        let y = &self.sample.y;
        let comps = (0..n)
            .map(|i| (0..n).map(|a| g.comps[i * n + a] * y[a]).sum::<f64>() / f)
            .collect();
        Ok(TensorValue {
            dim: n,
            slots: vec![Variance::Covariant],
            comps,
            sample: self.sample.clone(),
        })
    }

    /// Spray coefficients `G^i`.
    pub fn spray(&self) -> Result<TensorValue, GeometryError> {
        Ok(self.value_of(vec![Variance::Contravariant], self.spray_jets()?))
    }

    /// `N^i_j = ∂̇_j G^i`
    pub fn nonlinear_connection(&self) -> Result<TensorValue, GeometryError> {
        Ok(self.value_of(
            vec![Variance::Contravariant, Variance::Covariant],
            self.connection_jets()?,
        ))
    }

    /// Chern Christoffel symbols `Γ^i_jk`.
    pub fn christoffel(&self) -> Result<TensorValue, GeometryError> {
        Ok(self.value_of(
            vec![Variance::Contravariant, Variance::Covariant, Variance::Covariant],
            self.christoffel_jets()?,
        ))
    }

    /// `P_ijk = g_ia (G^a_{·j·k} − Γ^a_jk)`
    pub fn landsberg(&self) -> Result<TensorValue, GeometryError> {
        Ok(self.value_of(vec![Variance::Covariant; 3], self.landsberg_jets()?))
    }

    /// `P_i = G^a_{·a·i} − Γ^a_ai`
    pub fn mean_landsberg(&self) -> Result<TensorValue, GeometryError> {
        Ok(self.value_of(vec![Variance::Covariant], self.mean_landsberg_jets()?))
    }

    pub fn ricci_scalar(&self) -> Result<f64, GeometryError> {
        Ok(self.ricci_jet()?.value())
    }

    /// `Ric_{·i·j}`
    pub fn ricci_vertical_hessian(&self) -> Result<TensorValue, GeometryError> {
        Ok(self.value_of(vec![Variance::Covariant; 2], self.ricci_hessian_jets()?))
    }

    /// `𝔓 = g^{ij}(P_{i|j} − P_i P_j + P_{i|0·j})`
    pub fn pfrak(&self) -> Result<f64, GeometryError> {
        Ok(self.pfrak_jet()?.value())
    }

    /// `𝔓_{|0} = yʲ δ_j 𝔓`
    pub fn pfrak_dynamical(&self) -> Result<f64, GeometryError> {
        self.require("𝔓_{|0}", min_order::PFRAK_DYNAMICAL)?;
        let p = JetTensor::scalar(self.pfrak_jet()?.clone(), self.n);
        Ok(self.dynamical(&p)?.comps[0].value())
    }

    pub fn schur_scalar(&self, variant: SchurVariant) -> Result<f64, GeometryError> {
        self.require("Schur scalar", min_order::SCHUR)?;
        match variant {
            SchurVariant::AsExpanded => self.pfrak_dynamical(),
            SchurVariant::AsPrinted => self.schur_expansion(-1.0),
        }
    }

    /// `g^{ij}(P_{i|j|0} − 2 P_i P_{j|0} + sign · P_{i|0·j|0})`. With
    /// `sign = +1` this is the term-by-term expansion of `𝔓_{|0}`.
    pub fn schur_expansion(&self, sign: f64) -> Result<f64, GeometryError> {
        self.require("Schur scalar", min_order::SCHUR)?;
        let n = self.n;
        let p = self.mean_landsberg_jets()?;
        let ph = self.mean_landsberg_horizontal()?;
        let p0 = self.contract_last_with_y(ph);
        let ph0 = self.dynamical(ph)?;
        let pdv0 = self.dynamical(self.mean_landsberg_dyn_vertical()?)?;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                let term = ph0.comps[k].value() - 2.0 * p[i].value() * p0.comps[j].value()
                    + sign * pdv0.comps[k].value();
                acc += self.ginv[k].value() * term;
            }
        }
        Ok(acc)
    }

    /// Pointwise integrands of the unconditional fiber identity.
    pub fn lemma1_integrands(&self) -> Result<Lemma1Integrands, GeometryError> {
        self.require("fiber identity integrands", min_order::LEMMA1)?;
        let n = self.n;
        let ric = self.ricci_jet()?;
        let hess = self.ricci_hessian_jets()?;
        let e = self
            .trace_with_inverse(hess)
            .sub(&ric.checked_div(&self.l)?.scale((n + 2) as f64));
        let lhs = self.dynamical(&JetTensor::scalar(e, n))?.comps[0].value();
        let p = self.mean_landsberg_jets()?;
        let ph = self.mean_landsberg_horizontal()?;
        let pdv = self.mean_landsberg_dyn_vertical()?;
        let q: Vec<Jet> = (0..n * n)
            .map(|k| ph.comps[k].sub(&p[k / n].mul(&p[k % n])).add(&pdv.comps[k]))
            .collect();
        let q0 = self.dynamical(&JetTensor::new(n, vec![Variance::Covariant; 2], q))?;
        let printed: f64 = (0..n * n)
            .map(|k| self.ginv[k].value() * q0.comps[k].value())
            .sum();
        Ok(Lemma1Integrands {
            lhs,
            rhs_folded: -2.0 * self.pfrak_dynamical()?,
            rhs_printed: -2.0 * printed,
        })
    }

    /// `∇_j(ric^{ji} − ½ S g^{ji})` for a Riemannian model, with
    /// `ric_ij = ½ Ric_{·i·j}` and `S = g^{ij} ric_ij`.
    pub fn contracted_bianchi(&self) -> Result<Vec<f64>, GeometryError> {
        if !self.model.flags().riemannian {
            return Err(GeometryError::NotRiemannian {
                model: self.model.name().into(),
            });
        }
        self.require("contracted Bianchi identity", min_order::BIANCHI)?;
        let n = self.n;
        let ric: Vec<Jet> = self.ricci_hessian_jets()?.iter().map(|j| j.scale(0.5)).collect();
        let s = self.trace_with_inverse(&ric);
        let dric = self.horizontal(&JetTensor::new(n, vec![Variance::Covariant; 2], ric))?;
        let ds = self.horizontal(&JetTensor::scalar(s, n))?;
        // lowered divergence d_b = g^{jk} ric_{jb|k} − ½ ∂_b S
        let lowered: Vec<f64> = (0..n)
            .map(|b| {
                let mut acc = -0.5 * ds.comps[b].value();
                for j in 0..n {
                    for k in 0..n {
                        acc += self.ginv[j * n + k].value() * dric.comps[flat(&[j, b, k], n)].value();
                    }
                }
                acc
            })
            .collect();
        Ok((0..n)
            .map(|i| (0..n).map(|b| self.ginv[i * n + b].value() * lowered[b]).sum())
            .collect())
    }
}

fn require(ctx: &JetContext, quantity: &'static str, min: usize) -> Result<(), GeometryError> {
    if ctx.max_order() < min {
        return Err(GeometryError::OrderBudget {
            quantity,
            required: min,
            available: ctx.max_order(),
        });
    }
    Ok(())
}

fn permutations(i: usize, j: usize, k: usize) -> [[usize; 3]; 6] {
    [[i, j, k], [i, k, j], [j, i, k], [j, k, i], [k, i, j], [k, j, i]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geo<'m>(model: &'m MetricModel, x: &[f64], y: &[f64]) -> Geometry<'m> {
        Geometry::new(model, x, y, crate::DEFAULT_JET_ORDER).unwrap()
    }

    #[test]
    fn euclidean_is_flat() {
        let m = MetricModel::euclidean(3).unwrap();
        let g = geo(&m, &[0.1, 0.2, 0.3], &[0.3, -1.0, 0.5]);
        let gij = g.fundamental_tensor();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(gij.get(&[i, j]), if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        assert!(g.cartan().unwrap().max_abs() < 1e-14);
        assert!(g.spray().unwrap().max_abs() < 1e-14);
        assert!(g.christoffel().unwrap().max_abs() < 1e-14);
        assert!(g.ricci_scalar().unwrap().abs() < 1e-14);
        assert!(g.pfrak_dynamical().unwrap().abs() < 1e-14);
    }

    #[test]
    fn hilbert_form_of_euclidean_unit_vector() {
        let m = MetricModel::euclidean(3).unwrap();
        let y = [0.6, 0.0, 0.8];
        let w = geo(&m, &[0.0; 3], &y).hilbert_form().unwrap();
        for i in 0..3 {
            assert_relative_eq!(w.get(&[i]), y[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn minkowski_randers_fundamental_tensor() {
        let m = MetricModel::minkowski_randers(&[0.5, 0.0, 0.0]).unwrap();
        let g = geo(&m, &[0.0; 3], &[1.0, 0.0, 0.0]);
        let gij = g.fundamental_tensor();
        assert_relative_eq!(gij.get(&[0, 0]), 2.25, epsilon = 1e-13);
        assert_relative_eq!(gij.get(&[1, 1]), 1.5, epsilon = 1e-13);
        assert_relative_eq!(gij.get(&[2, 2]), 1.5, epsilon = 1e-13);
        assert!(gij.get(&[0, 1]).abs() < 1e-13);
        let c = g.cartan().unwrap();
        assert!(c.get(&[0, 0, 0]).abs() < 1e-12);
        assert!(g.spray().unwrap().max_abs() < 1e-14);
        assert!(g.landsberg().unwrap().max_abs() < 1e-14);
        assert!(g.ricci_scalar().unwrap().abs() < 1e-14);
    }

    #[test]
    fn conformal_spray() {
        let m = MetricModel::parse_dsl("exp(2*x1)*(y1^2 + y2^2)", 2).unwrap();
        let g = geo(&m, &[0.0, 0.0], &[0.0, 1.0]);
        let spray = g.spray().unwrap();
        assert_relative_eq!(spray.get(&[0]), -0.5, epsilon = 1e-13);
        assert!(spray.get(&[1]).abs() < 1e-13);
    }

    #[test]
    fn round_sphere_is_einstein() {
        let m = MetricModel::sphere_round(3, 1.0).unwrap();
        let g = geo(&m, &[0.1, -0.2, 0.05], &[0.3, 0.7, -0.4]);
        assert_relative_eq!(g.ricci_scalar().unwrap() / g.lagrangian(), 2.0, epsilon = 1e-10);
        assert!(g.landsberg().unwrap().max_abs() < 1e-9);
        assert!(g.pfrak().unwrap().abs() < 1e-8);
        assert!(g.schur_scalar(SchurVariant::AsPrinted).unwrap().abs() < 1e-8);
        assert!(g.schur_scalar(SchurVariant::AsExpanded).unwrap().abs() < 1e-8);
    }

    #[test]
    fn order_budget_is_enforced() {
        let m = MetricModel::euclidean(2).unwrap();
        let g = Geometry::new(&m, &[0.0, 0.0], &[1.0, 0.0], 4).unwrap();
        assert!(g.christoffel().is_ok());
        match g.ricci_scalar() {
            Err(GeometryError::OrderBudget { required, available, .. }) => {
                assert_eq!(required, min_order::RICCI);
                assert_eq!(available, 4);
            }
            other => panic!("expected order budget error, got {other:?}"),
        }
    }

    #[test]
    fn outside_domain_is_rejected() {
        let m = MetricModel::funk(2).unwrap();
        assert!(matches!(
            Geometry::new(&m, &[1.2, 0.0], &[1.0, 0.0], 4),
            Err(GeometryError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn fundamental_tensor_is_symmetric_and_inverse_matches() {
        let m = MetricModel::funk(3).unwrap();
        let g = geo(&m, &[0.2, -0.1, 0.3], &[0.4, 1.0, -0.3]);
        let gij = g.fundamental_tensor();
        let ginv = g.inverse_fundamental();
        for i in 0..3 {
            for j in 0..3 {
                assert!(gij.asymmetry(0, 1) < 1e-14);
                let prod: f64 = (0..3).map(|k| gij.get(&[i, k]) * ginv.get(&[k, j])).sum();
                assert_relative_eq!(prod, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }
}
