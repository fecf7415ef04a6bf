//! Small dense linear algebra on row-major `n × n` arrays, for `f64` and for
//! jets.

use alloc::vec::Vec;

use crate::jet::{Jet, JetError};
use crate::math::abs;

/// Inverse by Gauss–Jordan elimination with partial pivoting; `None` when a
/// pivot vanishes.
pub fn inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv: Vec<f64> = (0..n * n)
        .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| abs(m[r * n + col]).total_cmp(&abs(m[s * n + col])))?;
        if m[pivot * n + col] == 0.0 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                m.swap(pivot * n + c, col * n + c);
                inv.swap(pivot * n + c, col * n + c);
            }
        }
        let p = 1.0 / m[col * n + col];
        for c in 0..n {
            m[col * n + c] *= p;
            inv[col * n + c] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f == 0.0 {
                continue;
            }
            for c in 0..n {
                m[r * n + c] -= f * m[col * n + c];
                inv[r * n + c] -= f * inv[col * n + c];
            }
        }
    }
    Some(inv)
}

/// Determinant via LU with partial pivoting.
pub fn determinant(a: &[f64], n: usize) -> f64 {
    let mut m = a.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| abs(m[r * n + col]).total_cmp(&abs(m[s * n + col])))
            .unwrap_or(col);
        if m[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..n {
                m.swap(pivot * n + c, col * n + c);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            for c in col..n {
                m[r * n + c] -= f * m[col * n + c];
            }
        }
    }
    det
}

fn norm1(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|c| (0..n).map(|r| abs(a[r * n + c])).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number; infinite for singular input.
pub fn condition_number(a: &[f64], n: usize) -> f64 {
    match inverse(a, n) {
        Some(inv) => norm1(a, n) * norm1(&inv, n),
        None => f64::INFINITY,
    }
}

/// Cholesky test for positive definiteness of a symmetric matrix.
pub fn is_positive_definite(a: &[f64], n: usize) -> bool {
    let mut l = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i * n + i] = crate::math::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    true
}

/// Inverse of a matrix of jets. Pivots are chosen on the constant parts, so
/// the elimination is the `f64` one lifted to truncated series.
pub fn inverse_jets(a: &[Jet], n: usize) -> Result<Vec<Jet>, JetError> {
    let mut m = a.to_vec();
    let one = a[0].constant_like(1.0);
    let zero = a[0].constant_like(0.0);
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| if k / n == k % n { one.clone() } else { zero.clone() })
        .collect();
    // track which entries of inv are still exactly zero to skip products
    let mut inv_zero: Vec<bool> = (0..n * n).map(|k| k / n != k % n).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| abs(m[r * n + col].value()).total_cmp(&abs(m[s * n + col].value())))
            .unwrap_or(col);
        if m[pivot * n + col].value() == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        if pivot != col {
            for c in 0..n {
                m.swap(pivot * n + c, col * n + c);
                inv.swap(pivot * n + c, col * n + c);
                inv_zero.swap(pivot * n + c, col * n + c);
            }
        }
        let p = m[col * n + col].recip()?;
        for c in col..n {
            m[col * n + c] = m[col * n + c].mul(&p);
        }
        for c in 0..n {
            if !inv_zero[col * n + c] {
                inv[col * n + c] = inv[col * n + c].mul(&p);
            }
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col].clone();
            for c in col..n {
                m[r * n + c] = m[r * n + c].sub(&f.mul(&m[col * n + c]));
            }
            for c in 0..n {
                if !inv_zero[col * n + c] {
                    inv[r * n + c] = inv[r * n + c].sub(&f.mul(&inv[col * n + c]));
                    inv_zero[r * n + c] = false;
                }
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_and_determinant() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let inv = inverse(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert_relative_eq!(v, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        assert_relative_eq!(determinant(&a, 3), 4.0 * (6.0 - 0.04) - 1.0 * (2.0 - 0.1) + 0.5 * (0.2 - 1.5), epsilon = 1e-13);
        assert!(is_positive_definite(&a, 3));
        assert!(!is_positive_definite(&[1.0, 0.0, 0.0, -1.0], 2));
    }

    #[test]
    fn singular_matrix() {
        assert!(inverse(&[1.0, 2.0, 2.0, 4.0], 2).is_none());
        assert!(condition_number(&[1.0, 2.0, 2.0, 4.0], 2).is_infinite());
    }
}
