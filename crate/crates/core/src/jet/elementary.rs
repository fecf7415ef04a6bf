use alloc::vec::Vec;

use super::{Jet, JetError};
use crate::math;

impl Jet {
    /// Composes the univariate Taylor series `Σ c_k t^k` (around the value of
    /// `self`) with the non-constant part of `self`, via Horner's scheme.
    fn compose(&self, coeffs: &[f64]) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = self.constant_like(coeffs[self.order]);
        for k in (0..self.order).rev() {
            acc = acc.mul(&h).add_const(coeffs[k]);
        }
        acc
    }

    fn series(&self, mut term: impl FnMut(usize) -> f64) -> Vec<f64> {
        (0..=self.order).map(&mut term).collect()
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let a = self.value();
        if a == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let inv = 1.0 / a;
        let mut c = inv;
        let coeffs = self.series(|k| {
            let out = if k % 2 == 0 { c } else { -c };
            c *= inv;
            out
        });
        Ok(self.compose(&coeffs))
    }

    pub fn exp(&self) -> Self {
        let e = math::exp(self.value());
        let mut fact = 1.0;
        let coeffs = self.series(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            e / fact
        });
        self.compose(&coeffs)
    }

    pub fn ln(&self) -> Result<Self, JetError> {
        let a = self.value();
        if a <= 0.0 {
            return Err(JetError::NonPositive {
                function: "log",
                value: a,
            });
        }
        let coeffs = self.series(|k| {
            if k == 0 {
                math::ln(a)
            } else {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign / (k as f64 * math::powi(a, k as i32))
            }
        });
        Ok(self.compose(&coeffs))
    }

    /// Real power `self^r` for positive values.
    pub fn powf(&self, r: f64) -> Result<Self, JetError> {
        let a = self.value();
        if a <= 0.0 {
            return Err(JetError::NonPositive {
                function: "pow",
                value: a,
            });
        }
        // binom(r, k) a^(r - k)
        let mut binom = 1.0;
        let base = math::pow(a, r);
        let inv = 1.0 / a;
        let mut scale = base;
        let coeffs = self.series(|k| {
            if k > 0 {
                binom *= (r - (k as f64 - 1.0)) / k as f64;
                scale *= inv;
            }
            binom * scale
        });
        Ok(self.compose(&coeffs))
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let a = self.value();
        if a <= 0.0 {
            return Err(JetError::NonPositive {
                function: "sqrt",
                value: a,
            });
        }
        self.powf(0.5)
    }

    /// Integer power by repeated squaring; negative exponents go through
    /// [`Jet::recip`].
    pub fn powi(&self, e: i32) -> Result<Self, JetError> {
        if e < 0 {
            return self.recip()?.powi(-e);
        }
        let mut result = self.constant_like(1.0);
        let mut base = self.clone();
        let mut k = e as u32;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        Ok(result)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (math::sin(self.value()), math::cos(self.value()));
        self.compose(&trig_series(self.order, [s, c, -s, -c]))
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (math::sin(self.value()), math::cos(self.value()));
        self.compose(&trig_series(self.order, [c, -s, -c, s]))
    }
}

fn trig_series(order: usize, cycle: [f64; 4]) -> Vec<f64> {
    let mut fact = 1.0;
    (0..=order)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            cycle[k % 4] / fact
        })
        .collect()
}
