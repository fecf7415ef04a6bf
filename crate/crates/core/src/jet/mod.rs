//! Truncated multivariate Taylor arithmetic over the chart variables
//! `(x¹..xⁿ, y¹..yⁿ)`.
//!
//! A [`Jet`] stores Taylor coefficients (partial derivative divided by the
//! multi-index factorial) up to its own truncation order, which never exceeds
//! the [`JetContext`] maximum. Differentiating a jet lowers its order by one;
//! binary operations truncate to the smaller operand order. This makes the
//! derivative budget of every downstream quantity explicit: a value is only
//! available while its order is non-negative.

mod context;
mod elementary;
mod scalar;

use alloc::sync::Arc;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use context::{JetContext, MAX_ORDER, MAX_VARS};
pub use scalar::Scalar;

/// Failures of jet construction and arithmetic.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error("dimension mismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("division by a jet with zero value")]
    DivisionByZero,
    #[error("{function} of non-positive value {value}")]
    NonPositive { function: &'static str, value: f64 },
    #[error("derivative order {requested} exceeds available jet order {available}")]
    OrderOverflow { requested: usize, available: usize },
    #[error("invalid jet context: {0}")]
    InvalidContext(String),
}

/// A truncated Taylor expansion of a scalar around a point of the chart.
#[derive(Clone, Debug)]
pub struct Jet {
    ctx: Arc<JetContext>,
    order: usize,
    coeffs: Vec<f64>,
}

/// Seeds one jet per chart variable at `point`, truncated at the context's
/// maximal order.
pub fn seed(ctx: &Arc<JetContext>, point: &[f64]) -> Result<Vec<Jet>, JetError> {
    seed_at_order(ctx, point, ctx.max_order())
}

/// Like [`seed`], but truncated at `order ≤ K`.
pub fn seed_at_order(
    ctx: &Arc<JetContext>,
    point: &[f64],
    order: usize,
) -> Result<Vec<Jet>, JetError> {
    if point.len() != ctx.nvars() {
        return Err(JetError::DimensionMismatch {
            expected: ctx.nvars(),
            found: point.len(),
        });
    }
    if order > ctx.max_order() {
        return Err(JetError::OrderOverflow {
            requested: order,
            available: ctx.max_order(),
        });
    }
    Ok(point
        .iter()
        .enumerate()
        .map(|(v, &value)| Jet::variable(ctx, order, v, value))
        .collect())
}

impl Jet {
    /// A constant jet of the given order.
    pub fn constant(ctx: &Arc<JetContext>, order: usize, value: f64) -> Self {
        let mut coeffs = vec![0.0; ctx.len_for_order(order)];
        coeffs[0] = value;
        Self {
            ctx: Arc::clone(ctx),
            order,
            coeffs,
        }
    }

    /// The jet of chart variable `var` expanded at `value`.
    pub fn variable(ctx: &Arc<JetContext>, order: usize, var: usize, value: f64) -> Self {
        let mut jet = Self::constant(ctx, order, value);
        if order >= 1 {
            jet.coeffs[1 + var] = 1.0;
        }
        jet
    }

    pub fn context(&self) -> &Arc<JetContext> {
        &self.ctx
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Value of the represented scalar at the expansion point.
    #[inline]
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficients in graded monomial order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn constant_like(&self, value: f64) -> Self {
        Self::constant(&self.ctx, self.order, value)
    }

    pub fn zero_like(&self) -> Self {
        self.constant_like(0.0)
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order {
            return self.clone();
        }
        Self {
            ctx: Arc::clone(&self.ctx),
            order,
            coeffs: self.coeffs[..self.ctx.len_for_order(order)].to_vec(),
        }
    }

    /// The partial derivative `∂^μ f` at the expansion point (Taylor
    /// coefficient times `μ!`).
    pub fn extract_partial(&self, multi_index: &[usize]) -> Result<f64, JetError> {
        let total: usize = multi_index.iter().sum();
        if total > self.order {
            return Err(JetError::OrderOverflow {
                requested: total,
                available: self.order,
            });
        }
        let m = self.ctx.position(multi_index)?;
        Ok(self.coeffs[m] * self.ctx.factorial(m))
    }

    /// The jet of `∂f/∂(var)`, one order lower.
    pub fn derivative(&self, var: usize) -> Result<Self, JetError> {
        if self.order == 0 {
            return Err(JetError::OrderOverflow {
                requested: 1,
                available: 0,
            });
        }
        let order = self.order - 1;
        let len = self.ctx.len_for_order(order);
        let mut coeffs = Vec::with_capacity(len);
        for m in 0..len {
            let bump = f64::from(self.ctx.exponents(m)[var]) + 1.0;
            coeffs.push(bump * self.coeffs[self.ctx.up(var, m)]);
        }
        Ok(Self {
            ctx: Arc::clone(&self.ctx),
            order,
            coeffs,
        })
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(Arc::ptr_eq(&self.ctx, &rhs.ctx));
        let order = self.order.min(rhs.order);
        let len = self.ctx.len_for_order(order);
        let coeffs = self.coeffs[..len]
            .iter()
            .zip(&rhs.coeffs[..len])
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self {
            ctx: Arc::clone(&self.ctx),
            order,
            coeffs,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// `self + c·rhs`
    pub fn add_scaled(&self, rhs: &Self, c: f64) -> Self {
        self.zip_with(rhs, |a, b| a + c * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            ctx: Arc::clone(&self.ctx),
            order: self.order,
            coeffs: self.coeffs.iter().map(|&a| c * a).collect(),
        }
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Truncated product. The operand with more zero coefficients drives the
    /// outer loop, so products with seeds and sparse polynomials are cheap.
    pub fn mul(&self, rhs: &Self) -> Self {
        debug_assert!(Arc::ptr_eq(&self.ctx, &rhs.ctx));
        let order = self.order.min(rhs.order);
        let len = self.ctx.len_for_order(order);
        let nnz = |c: &[f64]| c[..len].iter().filter(|v| **v != 0.0).count();
        let (outer, inner) = if nnz(&self.coeffs) <= nnz(&rhs.coeffs) {
            (&self.coeffs, &rhs.coeffs)
        } else {
            (&rhs.coeffs, &self.coeffs)
        };
        let mut out = vec![0.0; len];
        for (i, &a) in outer[..len].iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let room = order - self.ctx.degree(i);
            let count = self.ctx.len_for_order(room);
            for &(j, o) in self.ctx.products(i, count) {
                out[o as usize] += a * inner[j as usize];
            }
        }
        Self {
            ctx: Arc::clone(&self.ctx),
            order,
            coeffs: out,
        }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// `self / rhs`; fails when the value of `rhs` is zero.
    pub fn checked_div(&self, rhs: &Self) -> Result<Self, JetError> {
        Ok(self.mul(&rhs.recip()?))
    }

    /// Sum of `a_k · b_k`, truncated to the smallest order involved.
    pub fn dot(a: &[Jet], b: &[Jet]) -> Self {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = a[0].mul(&b[0]);
        for (p, q) in a.iter().zip(b).skip(1) {
            acc = acc.add(&p.mul(q));
        }
        acc
    }
}
