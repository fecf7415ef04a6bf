//! Finite-difference recomputation of the geometric kernels from `L` alone.
//! Nothing here touches jets: every derivative is a central difference of
//! `f64` evaluations, so agreement with the pipeline is an independent check.

#![allow(dead_code)]

use finsler_core::MetricModel;

/// A vector-valued function of `(x, y)`.
pub type Field<'a> = dyn Fn(&[f64], &[f64]) -> Vec<f64> + 'a;

/// Fourth-order central first-derivative stencil.
const STENCIL: [(f64, f64); 4] = [
    (-2.0, 1.0 / 12.0),
    (-1.0, -8.0 / 12.0),
    (1.0, 8.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

/// `d/dt f(t)` at `t = 0`.
pub fn diff(f: impl Fn(f64) -> Vec<f64>, h: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for (t, c) in STENCIL {
        let v = f(t * h);
        if out.is_empty() {
            out = vec![0.0; v.len()];
        }
        for (o, vi) in out.iter_mut().zip(v) {
            *o += c * vi / h;
        }
    }
    out
}

fn shifted(v: &[f64], j: usize, t: f64) -> Vec<f64> {
    let mut w = v.to_vec();
    w[j] += t;
    w
}

pub fn dx(f: &Field, x: &[f64], y: &[f64], j: usize, h: f64) -> Vec<f64> {
    diff(|t| f(&shifted(x, j, t), y), h)
}

pub fn dy(f: &Field, x: &[f64], y: &[f64], j: usize, h: f64) -> Vec<f64> {
    diff(|t| f(x, &shifted(y, j, t)), h)
}

/// `yʲ ∂_j f`, as the derivative along the straight line `x + t y`.
pub fn along(f: &Field, x: &[f64], y: &[f64], h: f64) -> Vec<f64> {
    diff(
        |t| {
            let xt: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + t * b).collect();
            f(&xt, y)
        },
        h,
    )
}

/// `∂_{x^j} f_c` stored at `c·n + j`.
pub fn jac_x(f: &Field, x: &[f64], y: &[f64], h: f64) -> Vec<f64> {
    interleave((0..x.len()).map(|j| dx(f, x, y, j, h)).collect())
}

/// `∂̇_j f_c` stored at `c·n + j`.
pub fn jac_y(f: &Field, x: &[f64], y: &[f64], h: f64) -> Vec<f64> {
    interleave((0..y.len()).map(|j| dy(f, x, y, j, h)).collect())
}

fn interleave(cols: Vec<Vec<f64>>) -> Vec<f64> {
    let n = cols.len();
    let m = cols[0].len();
    let mut out = vec![0.0; m * n];
    for (j, col) in cols.iter().enumerate() {
        for (c, v) in col.iter().enumerate() {
            out[c * n + j] = *v;
        }
    }
    out
}

/// Gauss–Jordan inverse with partial pivoting of a row-major `n×n` matrix.
pub fn invert(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| m[p * n + col].abs().total_cmp(&m[q * n + col].abs()))
            .unwrap();
        for k in 0..n {
            m.swap(col * n + k, pivot * n + k);
            inv.swap(col * n + k, pivot * n + k);
        }
        let d = m[col * n + col];
        for k in 0..n {
            m[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * n + col];
                for k in 0..n {
                    m[r * n + k] -= f * m[col * n + k];
                    inv[r * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    inv
}

/// Richardson extrapolation of a nested fourth-order difference: the error
/// expands in even powers of the step, so `(16 D(h) − D(2h)) / 15` removes
/// the leading `h⁴` term.
pub fn richardson(fine: &[f64], coarse: &[f64]) -> Vec<f64> {
    fine.iter().zip(coarse).map(|(f, c)| (16.0 * f - c) / 15.0).collect()
}

/// Largest deviation between `a` and `b` relative to `max(1, max|b|)`.
pub fn rel_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / scale
}

/// Kernels recomputed from `L` by finite differences with step `h`.
pub struct Oracle<'m> {
    pub model: &'m MetricModel,
    pub h: f64,
}

impl<'m> Oracle<'m> {
    pub fn new(model: &'m MetricModel) -> Self {
        Self { model, h: 4e-3 }
    }

    fn n(&self) -> usize {
        self.model.dim()
    }

    pub fn lagrangian(&self, x: &[f64], y: &[f64]) -> f64 {
        self.model.lagrangian(x, y).expect("lagrangian")
    }

    fn l_field(&self) -> impl Fn(&[f64], &[f64]) -> Vec<f64> + '_ {
        move |x, y| vec![self.lagrangian(x, y)]
    }

    fn grad_y_l(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        jac_y(&self.l_field(), x, y, self.h)
    }

    /// `½ ∂̇_i ∂̇_j L`
    pub fn fundamental(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let grad = |x: &[f64], y: &[f64]| self.grad_y_l(x, y);
        let mut g = jac_y(&grad, x, y, self.h);
        g.iter_mut().for_each(|v| *v *= 0.5);
        g
    }

    pub fn inverse_fundamental(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        invert(&self.fundamental(x, y), self.n())
    }

    /// `½ ∂̇_k g_ij` at `[i][j][k]`.
    pub fn cartan(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let g = |x: &[f64], y: &[f64]| self.fundamental(x, y);
        let mut c = jac_y(&g, x, y, self.h);
        c.iter_mut().for_each(|v| *v *= 0.5);
        c
    }

    pub fn mean_cartan(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n();
        let ginv = self.inverse_fundamental(x, y);
        let c = self.cartan(x, y);
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        s += ginv[a * n + b] * c[(i * n + a) * n + b];
                    }
                }
                s
            })
            .collect()
    }

    /// `ω_i = ∂̇_i F = ½ ∂̇_i L / F`.
    pub fn hilbert_form(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let f = self.lagrangian(x, y).sqrt();
        self.grad_y_l(x, y).into_iter().map(|v| 0.5 * v / f).collect()
    }

    /// `Gⁱ = ¼ g^{il} (yᵏ ∂_k ∂̇_l L − ∂_l L)`.
    pub fn spray(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n();
        let ginv = self.inverse_fundamental(x, y);
        let grad = |x: &[f64], y: &[f64]| self.grad_y_l(x, y);
        let mixed = along(&grad, x, y, self.h);
        let dl = jac_x(&self.l_field(), x, y, self.h);
        (0..n)
            .map(|i| {
                0.25 * (0..n)
                    .map(|l| ginv[i * n + l] * (mixed[l] - dl[l]))
                    .sum::<f64>()
            })
            .collect()
    }

    /// `Nⁱ_j = ∂̇_j Gⁱ` at `[i][j]`.
    pub fn nonlinear_connection(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let spray = |x: &[f64], y: &[f64]| self.spray(x, y);
        jac_y(&spray, x, y, self.h)
    }

    /// `Γⁱ_jk = ½ g^{is}(δ_j g_sk + δ_k g_sj − δ_s g_jk)`, `δ_j = ∂_j − Nᵃ_j ∂̇_a`.
    pub fn christoffel(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n();
        let g = |x: &[f64], y: &[f64]| self.fundamental(x, y);
        let gx = jac_x(&g, x, y, self.h);
        let gy = jac_y(&g, x, y, self.h);
        let nl = self.nonlinear_connection(x, y);
        let ginv = self.inverse_fundamental(x, y);
        let delta = |j: usize, s: usize, k: usize| {
            let row = (s * n + k) * n;
            gx[row + j] - (0..n).map(|a| nl[a * n + j] * gy[row + a]).sum::<f64>()
        };
        let mut gamma = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    gamma[(i * n + j) * n + k] = 0.5
                        * (0..n)
                            .map(|s| ginv[i * n + s] * (delta(j, s, k) + delta(k, s, j) - delta(s, j, k)))
                            .sum::<f64>();
                }
            }
        }
        gamma
    }

    /// `G^a_{·j·k}` at `[a][j][k]`.
    pub fn spray_hessian(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let nl = |x: &[f64], y: &[f64]| self.nonlinear_connection(x, y);
        jac_y(&nl, x, y, self.h)
    }

    /// `P_ijk = g_ia (G^a_{·j·k} − Γ^a_jk)` and `P_i = G^a_{·a·i} − Γ^a_ai`.
    pub fn landsberg(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let g = self.fundamental(x, y);
        let gdd = self.spray_hessian(x, y);
        let gamma = self.christoffel(x, y);
        let gap = |a: usize, j: usize, k: usize| gdd[(a * n + j) * n + k] - gamma[(a * n + j) * n + k];
        let mut p = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    p[(i * n + j) * n + k] = (0..n).map(|a| g[i * n + a] * gap(a, j, k)).sum();
                }
            }
        }
        let mean = (0..n).map(|i| (0..n).map(|a| gap(a, a, i)).sum()).collect();
        (p, mean)
    }

    /// `Ric = Rᵏ_k` with `Rⁱ_k = 2∂_kGⁱ − yʲ∂_j∂̇_kGⁱ + 2Gʲ∂̇_j∂̇_kGⁱ − ∂̇_jGⁱ∂̇_kGʲ`.
    pub fn ricci_scalar(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.n();
        let h = self.h;
        let spray = |x: &[f64], y: &[f64]| self.spray(x, y);
        let trace = |x: &[f64], y: &[f64]| {
            vec![(0..n).map(|k| dy(&spray, x, y, k, h)[k]).sum::<f64>()]
        };
        let g = self.spray(x, y);
        let nl = self.nonlinear_connection(x, y);
        let mut ric = 2.0 * (0..n).map(|k| dx(&spray, x, y, k, h)[k]).sum::<f64>();
        ric -= along(&trace, x, y, h)[0];
        let dtrace = jac_y(&trace, x, y, h);
        ric += 2.0 * (0..n).map(|j| g[j] * dtrace[j]).sum::<f64>();
        for i in 0..n {
            for j in 0..n {
                ric -= nl[i * n + j] * nl[j * n + i];
            }
        }
        ric
    }
}

/// Levi-Civita quantities of a Riemannian model, from `g_ij(x)` obtained by
/// polarisation of the quadratic `L` and differenced in `x` only.
pub struct LeviCivita<'m> {
    pub model: &'m MetricModel,
    pub h: f64,
}

impl<'m> LeviCivita<'m> {
    pub fn new(model: &'m MetricModel) -> Self {
        Self { model, h: 1e-3 }
    }

    /// `g_ij = (L(e_i + e_j) − L(e_i − e_j)) / 4`.
    pub fn metric(&self, x: &[f64]) -> Vec<f64> {
        let n = self.model.dim();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut p = vec![0.0; n];
                let mut m = vec![0.0; n];
                p[i] += 1.0;
                p[j] += 1.0;
                m[i] += 1.0;
                m[j] -= 1.0;
                g[i * n + j] =
                    0.25 * (self.model.lagrangian(x, &p).unwrap() - self.model.lagrangian(x, &m).unwrap());
            }
        }
        g
    }

    /// `Γⁱ_jk` at `[i][j][k]`.
    pub fn christoffel(&self, x: &[f64]) -> Vec<f64> {
        let n = self.model.dim();
        let g = |x: &[f64], _: &[f64]| self.metric(x);
        let dg = jac_x(&g, x, &[], self.h);
        let ginv = invert(&self.metric(x), n);
        let d = |a: usize, b: usize, c: usize| dg[(a * n + b) * n + c];
        let mut gamma = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    gamma[(i * n + j) * n + k] = 0.5
                        * (0..n)
                            .map(|s| ginv[i * n + s] * (d(s, k, j) + d(s, j, k) - d(j, k, s)))
                            .sum::<f64>();
                }
            }
        }
        gamma
    }

    /// `ric_jk = ∂_iΓⁱ_jk − ∂_kΓⁱ_ji + Γⁱ_ipΓᵖ_jk − Γⁱ_kpΓᵖ_ji`.
    pub fn ricci_tensor(&self, x: &[f64]) -> Vec<f64> {
        let n = self.model.dim();
        let gamma_field = |x: &[f64], _: &[f64]| self.christoffel(x);
        let dgamma = jac_x(&gamma_field, x, &[], self.h);
        let gamma = self.christoffel(x);
        let gm = |i: usize, j: usize, k: usize| gamma[(i * n + j) * n + k];
        let dg = |i: usize, j: usize, k: usize, l: usize| dgamma[((i * n + j) * n + k) * n + l];
        let mut ric = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                let mut v = 0.0;
                for i in 0..n {
                    v += dg(i, j, k, i) - dg(i, j, i, k);
                    for p in 0..n {
                        v += gm(i, i, p) * gm(p, j, k) - gm(i, k, p) * gm(p, j, i);
                    }
                }
                ric[j * n + k] = v;
            }
        }
        ric
    }

    /// `ric_jk yʲ yᵏ`.
    pub fn ricci_scalar(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.model.dim();
        let ric = self.ricci_tensor(x);
        (0..n)
            .flat_map(|j| (0..n).map(move |k| (j, k)))
            .map(|(j, k)| ric[j * n + k] * y[j] * y[k])
            .sum()
    }
}
