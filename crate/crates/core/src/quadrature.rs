//! Adaptive Gauss–Legendre integration.
//!
//! Each panel is integrated with a fixed-order rule and compared against the
//! sum over its two halves; panels that disagree are bisected until the local
//! tolerance is met. Semi-infinite ranges are truncated by the caller at a
//! point where the remaining tail mass is negligible.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 60;

struct Rule {
    nodes: [f64; ORDER],
    weights: [f64; ORDER],
}

/// Gauss–Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
fn legendre_rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Rule { nodes, weights }
    })
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let rule = legendre_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.nodes
        .iter()
        .zip(rule.weights.iter())
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Requested accuracy: a panel is accepted when its error estimate is below
/// `max(abs, rel * |panel value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-13 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct State {
    error: f64,
    exhausted: bool,
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    abs_tol: f64,
    rel: f64,
    depth: u32,
    state: &mut State,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = panel(f, a, m);
    let right = panel(f, m, b);
    let split = left + right;
    let diff = (split - whole).abs();
    if diff <= abs_tol.max(rel * split.abs()) || diff == 0.0 {
        state.error += diff;
        return split;
    }
    if depth >= MAX_DEPTH || m <= a || m >= b {
        // Refinement is exhausted; the caller judges the accumulated error.
        state.error += diff;
        state.exhausted = true;
        return split;
    }
    adapt(f, a, m, left, 0.5 * abs_tol, rel, depth + 1, state)
        + adapt(f, m, b, right, 0.5 * abs_tol, rel, depth + 1, state)
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("integration bounds must be finite".into()));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut state = State { error: 0.0, exhausted: false };
    let whole = panel(&f, lo, hi);
    let value = adapt(&f, lo, hi, whole, tol.abs, tol.rel, 0, &mut state);
    let budget = tol.abs.max(tol.rel * value.abs());
    if !value.is_finite() || (state.exhausted && state.error > budget) {
        return Err(Error::Accuracy { achieved: state.error });
    }
    Ok(Estimate { value: sign * value, error: state.error })
}

/// Integrates over `[a, b]` split at the given interior break points.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tolerance) -> Result<Estimate> {
    let mut total = Estimate { value: 0.0, error: 0.0 };
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    for w in breaks.windows(2) {
        let piece_tol = Tolerance { abs: tol.abs / pieces, rel: tol.rel };
        let e = integrate(&f, w[0], w[1], piece_tol)?;
        total.value += e.value;
        total.error += e.error;
    }
    Ok(total)
}

/// Break points 0, h, 2h, 4h, ... up to `upper`; concentrates panels near the
/// origin where the rate integrands vary fastest.
pub fn geometric_breaks(first: f64, upper: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut x = first.min(upper);
    while x < upper {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(upper);
    breaks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_weights_sum_to_two() {
        let r = legendre_rule();
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_exact() {
        let e = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((e.value - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let e = integrate(|x| x.exp(), 1.0, 0.0, Tolerance::default()).unwrap();
        assert!((e.value + (std::f64::consts::E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn log_singularity_converges() {
        // ∫_0^1 ln x dx = -1
        let e = integrate(|x: f64| x.ln(), 0.0, 1.0, Tolerance { abs: 1e-12, rel: 0.0 }).unwrap();
        assert!((e.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn nonintegrable_reports_accuracy_failure() {
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, Tolerance { abs: 1e-12, rel: 0.0 });
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }
}
