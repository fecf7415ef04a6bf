//! Jet arithmetic: linearity, the Leibniz rule, exactness on polynomials and
//! agreement of low-order partials of every reference Lagrangian with
//! central finite differences.

use std::sync::Arc;

use finsler_core::jet::seed;
use finsler_core::metric::reference_zoo;
use finsler_core::{Jet, JetContext};
use proptest::prelude::*;

fn ctx(n: usize, order: usize) -> Arc<JetContext> {
    Arc::new(JetContext::new(n, order).unwrap())
}

/// All multi-indices over `vars` variables with total degree `<= max`.
fn multi_indices(vars: usize, max: usize) -> Vec<Vec<usize>> {
    let base = max + 1;
    (0..base.pow(vars as u32))
        .map(|mut k| {
            (0..vars)
                .map(|_| {
                    let e = k % base;
                    k /= base;
                    e
                })
                .collect::<Vec<usize>>()
        })
        .filter(|m| m.iter().sum::<usize>() <= max)
        .collect()
}

fn f_of(v: &[Jet]) -> Jet {
    // x1·(y1)² + sin(x2)
    v[0].mul(&v[2].square()).add(&v[1].sin())
}

fn g_of(v: &[Jet]) -> Jet {
    // exp(y2)·x1 + (y1)³
    v[3].exp().mul(&v[0]).add(&v[2].powi(3).unwrap())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn extraction_is_linear(
        p in prop::collection::vec(-1.0f64..1.0, 4),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let c = ctx(2, 4);
        let v = seed(&c, &p).unwrap();
        let (f, g) = (f_of(&v), g_of(&v));
        let combo = f.scale(a).add(&g.scale(b));
        for mu in multi_indices(4, 4) {
            let lhs = combo.extract_partial(&mu).unwrap();
            let rhs = a * f.extract_partial(&mu).unwrap() + b * g.extract_partial(&mu).unwrap();
            prop_assert!(close(lhs, rhs, 1e-12), "{mu:?}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn leibniz_rule(p in prop::collection::vec(-1.0f64..1.0, 4)) {
        let c = ctx(2, 3);
        let v = seed(&c, &p).unwrap();
        let (f, g) = (f_of(&v), g_of(&v));
        let fg = f.mul(&g);
        for var in 0..4 {
            let mut mu = vec![0; 4];
            mu[var] = 1;
            let lhs = fg.extract_partial(&mu).unwrap();
            let rhs = f.value() * g.extract_partial(&mu).unwrap() + g.value() * f.extract_partial(&mu).unwrap();
            prop_assert!(close(lhs, rhs, 1e-12), "var {var}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn polynomials_are_exact(
        p in prop::collection::vec(-1.0f64..1.0, 4),
        terms in prop::collection::vec((-2.0f64..2.0, prop::collection::vec(0usize..3, 4)), 1..6),
    ) {
        let order = 6;
        let c = ctx(2, order);
        let v = seed(&c, &p).unwrap();
        let mut poly = v[0].zero_like();
        for (coef, exps) in &terms {
            let mut m = v[0].constant_like(*coef);
            for (var, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    m = m.mul(&v[var]);
                }
            }
            poly = poly.add(&m);
        }
        for mu in multi_indices(4, order) {
            let mut want = 0.0;
            for (coef, exps) in &terms {
                let mut term = *coef;
                for var in 0..4 {
                    if mu[var] > exps[var] {
                        term = 0.0;
                        break;
                    }
                    let falling: usize = (exps[var] - mu[var] + 1..=exps[var]).product();
                    term *= falling as f64 * p[var].powi((exps[var] - mu[var]) as i32);
                }
                want += term;
            }
            let got = poly.extract_partial(&mu).unwrap();
            prop_assert!(close(got, want, 1e-13), "{mu:?}: {got} vs {want}");
        }
    }
}

#[test]
fn cube_derivatives() {
    let c = ctx(2, 3);
    let v = seed(&c, &[0.0, 0.0, 2.0, 0.0]).unwrap();
    let f = v[2].powi(3).unwrap();
    let d = |k| {
        let mut mu = vec![0; 4];
        mu[2] = k;
        f.extract_partial(&mu).unwrap()
    };
    assert_eq!((d(1), d(2), d(3)), (12.0, 12.0, 6.0));
    assert_eq!(multi_indices(4, 4).len(), 70);
}

/// `∂^μ f` by nested fourth-order central differences, Richardson-extrapolated.
fn partial_fd(f: &dyn Fn(&[f64]) -> f64, p: &[f64], mu: &[usize], h: f64) -> f64 {
    let fine = nested(f, p, mu, h);
    let coarse = nested(f, p, mu, 2.0 * h);
    (16.0 * fine - coarse) / 15.0
}

fn nested(f: &dyn Fn(&[f64]) -> f64, p: &[f64], mu: &[usize], h: f64) -> f64 {
    let Some(var) = mu.iter().position(|&e| e > 0) else {
        return f(p);
    };
    let mut rest = mu.to_vec();
    rest[var] -= 1;
    [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)]
        .iter()
        .map(|&(t, c)| {
            let mut q = p.to_vec();
            q[var] += t * h;
            c * nested(f, &q, &rest, h)
        })
        .sum::<f64>()
        / (12.0 * h)
}

#[test]
fn lagrangian_partials_match_finite_differences() {
    for model in reference_zoo() {
        let n = model.dim();
        let c = ctx(n, 3);
        let indices = multi_indices(2 * n, 3);
        let lagrangian = |p: &[f64]| model.lagrangian(&p[..n], &p[n..]).unwrap();
        for (x, y) in model.domain_sample(100, 7).unwrap() {
            let p: Vec<f64> = x.iter().chain(&y).copied().collect();
            let vars = seed(&c, &p).unwrap();
            let l = model.lagrangian(&vars[..n], &vars[n..]).unwrap();
            for mu in &indices {
                let got = l.extract_partial(mu).unwrap();
                let want = partial_fd(&lagrangian, &p, mu, 1e-2);
                assert!(
                    close(got, want, 1e-5),
                    "{}: ∂^{mu:?} L = {got}, finite differences {want}",
                    model.name()
                );
            }
        }
    }
}

#[test]
fn flat_randers_fundamental_tensor() {
    let model = finsler_core::MetricModel::minkowski_randers(&[0.5, 0.0, 0.0]).unwrap();
    let c = ctx(3, 2);
    let vars = seed(&c, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
    let l = model.lagrangian(&vars[..3], &vars[3..]).unwrap();
    let lagrangian = |p: &[f64]| model.lagrangian(&p[..3], &p[3..]).unwrap();
    let point = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
    for (i, want) in [(3, 2.25), (4, 1.5), (5, 1.5)] {
        let mut mu = vec![0; 6];
        mu[i] = 2;
        let got = 0.5 * l.extract_partial(&mu).unwrap();
        let fd = 0.5 * partial_fd(&lagrangian, &point, &mu, 1e-2);
        assert!((got - want).abs() < 1e-12 && (fd - want).abs() < 1e-8, "{got} {fd} {want}");
    }
}
