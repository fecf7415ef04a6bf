use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::JetError;

/// Largest number of chart variables supported by the packed multi-index keys.
pub const MAX_VARS: usize = 16;
/// Largest total order supported by the packed multi-index keys.
pub const MAX_ORDER: usize = 15;

/// Monomial bookkeeping for truncated Taylor expansions in the `2n` chart
/// variables `(x¹..xⁿ, y¹..yⁿ)`.
///
/// Monomials are stored in graded order: all monomials of total degree `d`
/// precede those of degree `d + 1`. A jet truncated at order `k` therefore
/// owns exactly the first `prefix(k)` coefficients, and every table below is
/// laid out so that lower-order work uses a prefix of it.
#[derive(Debug)]
pub struct JetContext {
    dim: usize,
    nvars: usize,
    max_order: usize,
    exps: Vec<u8>,
    degree: Vec<u8>,
    factorial: Vec<f64>,
    prefix: Vec<usize>,
    index: BTreeMap<u64, u32>,
    // up[v * len + m] = index of m + e_v, for deg(m) < max_order
    up: Vec<u32>,
    // products: for monomial i, pairs (j, idx(i + j)) with j in graded order
    mul_start: Vec<usize>,
    mul_pairs: Vec<(u32, u32)>,
}

fn pack(exps: &[u8]) -> u64 {
    exps.iter()
        .enumerate()
        .fold(0u64, |acc, (v, &e)| acc | (u64::from(e) << (4 * v)))
}

fn enumerate_degree(nvars: usize, degree: usize, out: &mut Vec<u8>) {
    // lexicographic, first variable carrying the largest exponent first
    fn rec(v: usize, nvars: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<u8>) {
        if v + 1 == nvars {
            cur.push(left as u8);
            out.extend_from_slice(cur);
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e as u8);
            rec(v + 1, nvars, left - e, cur, out);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(nvars);
    rec(0, nvars, degree, &mut cur, out);
}

impl JetContext {
    /// Builds the tables for a manifold of dimension `dim` (so `2·dim` chart
    /// variables) and maximal total order `order`.
    pub fn new(dim: usize, order: usize) -> Result<Self, JetError> {
        if dim < 2 {
            return Err(JetError::InvalidContext(format!(
                "manifold dimension must be at least 2, got {dim}"
            )));
        }
        if 2 * dim > MAX_VARS {
            return Err(JetError::InvalidContext(format!(
                "at most {} chart variables are supported, got {}",
                MAX_VARS,
                2 * dim
            )));
        }
        if order == 0 || order > MAX_ORDER {
            return Err(JetError::InvalidContext(format!(
                "jet order must lie in 1..={MAX_ORDER}, got {order}"
            )));
        }
        let nvars = 2 * dim;

        let mut exps = Vec::new();
        let mut prefix = Vec::with_capacity(order + 1);
        for d in 0..=order {
            enumerate_degree(nvars, d, &mut exps);
            prefix.push(exps.len() / nvars);
        }
        let len = exps.len() / nvars;

        let mut degree = Vec::with_capacity(len);
        let mut factorial = Vec::with_capacity(len);
        let mut index = BTreeMap::new();
        for m in 0..len {
            let e = &exps[m * nvars..(m + 1) * nvars];
            degree.push(e.iter().sum::<u8>());
            factorial.push(
                e.iter()
                    .map(|&k| (1..=u32::from(k)).map(f64::from).product::<f64>())
                    .product(),
            );
            index.insert(pack(e), m as u32);
        }

        let mut up = alloc::vec![u32::MAX; nvars * len];
        for m in 0..prefix[order - 1] {
            let key = pack(&exps[m * nvars..(m + 1) * nvars]);
            for v in 0..nvars {
                up[v * len + m] = index[&(key + (1u64 << (4 * v)))];
            }
        }

        let keys: Vec<u64> = (0..len)
            .map(|m| pack(&exps[m * nvars..(m + 1) * nvars]))
            .collect();
        let mut mul_start = Vec::with_capacity(len + 1);
        let mut mul_pairs = Vec::new();
        for i in 0..len {
            mul_start.push(mul_pairs.len());
            let room = order - degree[i] as usize;
            for j in 0..prefix[room] {
                let out = index[&(keys[i] + keys[j])];
                mul_pairs.push((j as u32, out));
            }
        }
        mul_start.push(mul_pairs.len());

        Ok(Self {
            dim,
            nvars,
            max_order: order,
            exps,
            degree,
            factorial,
            prefix,
            index,
            up,
            mul_start,
            mul_pairs,
        })
    }

    /// Manifold dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of chart variables, `2n`.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Maximal total derivative order `K`.
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of multi-indices of total degree at most `order`.
    pub fn len_for_order(&self, order: usize) -> usize {
        self.prefix[order]
    }

    /// Total number of stored coefficients at the maximal order.
    pub fn len(&self) -> usize {
        self.prefix[self.max_order]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Chart variable label: `x1..xn` for the base block, `y1..yn` for the
    /// fiber block.
    pub fn label(&self, var: usize) -> String {
        if var < self.dim {
            format!("x{}", var + 1)
        } else {
            format!("y{}", var - self.dim + 1)
        }
    }

    /// Exponent vector of monomial `m`.
    pub fn exponents(&self, m: usize) -> &[u8] {
        &self.exps[m * self.nvars..(m + 1) * self.nvars]
    }

    pub(crate) fn degree(&self, m: usize) -> usize {
        self.degree[m] as usize
    }

    pub(crate) fn factorial(&self, m: usize) -> f64 {
        self.factorial[m]
    }

    /// Position of a multi-index in the coefficient array.
    pub fn position(&self, multi_index: &[usize]) -> Result<usize, JetError> {
        if multi_index.len() != self.nvars {
            return Err(JetError::DimensionMismatch {
                expected: self.nvars,
                found: multi_index.len(),
            });
        }
        let total: usize = multi_index.iter().sum();
        if total > self.max_order {
            return Err(JetError::OrderOverflow {
                requested: total,
                available: self.max_order,
            });
        }
        let key = multi_index
            .iter()
            .enumerate()
            .fold(0u64, |acc, (v, &e)| acc | ((e as u64) << (4 * v)));
        Ok(self.index[&key] as usize)
    }

    #[inline]
    pub(crate) fn up(&self, var: usize, m: usize) -> usize {
        self.up[var * self.len() + m] as usize
    }

    #[inline]
    pub(crate) fn products(&self, i: usize, count: usize) -> &[(u32, u32)] {
        let start = self.mul_start[i];
        &self.mul_pairs[start..start + count]
    }
}
