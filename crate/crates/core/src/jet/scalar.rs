use super::{Jet, JetError};
use crate::math;

/// The arithmetic a metric evaluator needs. Implemented for plain `f64`
/// (point evaluation) and for [`Jet`] (evaluation with derivatives), so one
/// metric definition serves both.
pub trait Scalar: Clone {
    fn value(&self) -> f64;
    fn lift(&self, c: f64) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn scale(&self, c: f64) -> Self;
    fn add_const(&self, c: f64) -> Self;
    fn div(&self, rhs: &Self) -> Result<Self, JetError>;
    fn sqrt(&self) -> Result<Self, JetError>;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self, JetError>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn powi(&self, e: i32) -> Result<Self, JetError>;
    fn powf(&self, r: f64) -> Result<Self, JetError>;

    fn neg(&self) -> Self {
        self.scale(-1.0)
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scale(&self, c: f64) -> Self {
        c * self
    }
    fn add_const(&self, c: f64) -> Self {
        self + c
    }
    fn div(&self, rhs: &Self) -> Result<Self, JetError> {
        if *rhs == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(self / rhs)
    }
    fn sqrt(&self) -> Result<Self, JetError> {
        if *self <= 0.0 {
            return Err(JetError::NonPositive {
                function: "sqrt",
                value: *self,
            });
        }
        Ok(math::sqrt(*self))
    }
    fn exp(&self) -> Self {
        math::exp(*self)
    }
    fn ln(&self) -> Result<Self, JetError> {
        if *self <= 0.0 {
            return Err(JetError::NonPositive {
                function: "log",
                value: *self,
            });
        }
        Ok(math::ln(*self))
    }
    fn sin(&self) -> Self {
        math::sin(*self)
    }
    fn cos(&self) -> Self {
        math::cos(*self)
    }
    fn powi(&self, e: i32) -> Result<Self, JetError> {
        if e < 0 && *self == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(math::powi(*self, e))
    }
    fn powf(&self, r: f64) -> Result<Self, JetError> {
        if *self <= 0.0 {
            return Err(JetError::NonPositive {
                function: "pow",
                value: *self,
            });
        }
        Ok(math::pow(*self, r))
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn lift(&self, c: f64) -> Self {
        self.constant_like(c)
    }
    fn add(&self, rhs: &Self) -> Self {
        Jet::add(self, rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Jet::sub(self, rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Jet::mul(self, rhs)
    }
    fn scale(&self, c: f64) -> Self {
        Jet::scale(self, c)
    }
    fn add_const(&self, c: f64) -> Self {
        Jet::add_const(self, c)
    }
    fn div(&self, rhs: &Self) -> Result<Self, JetError> {
        self.checked_div(rhs)
    }
    fn sqrt(&self) -> Result<Self, JetError> {
        Jet::sqrt(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Result<Self, JetError> {
        Jet::ln(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn powi(&self, e: i32) -> Result<Self, JetError> {
        Jet::powi(self, e)
    }
    fn powf(&self, r: f64) -> Result<Self, JetError> {
        Jet::powf(self, r)
    }
}
