//! One-dimensional rules: Gauss–Legendre, geometric radial panels, periodic trapezoid.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule on `[-1, 1]`, nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Result<GaussLegendre> {
        if n == 0 || n > 512 {
            return Err(Error::InvalidArgument(format!("Gauss-Legendre order {n}")));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| (c + h * x, h * w))
            .collect()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panels `[r_c, r_c·q], …, [R/q, R]` with ratio `q`; the innermost panel starts at `r_min`.
pub fn geometric_panels(r_max: f64, r_min: f64, ratio: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut hi = r_max;
    while hi > r_min * (1.0 + 1e-12) {
        let lo = (hi / ratio).max(r_min);
        out.push((lo, hi));
        hi = lo;
    }
    out.reverse();
    out
}

/// Composite Gauss–Legendre nodes over geometric panels.
pub fn graded_rule(r_max: f64, r_min: f64, ratio: f64, per_panel: usize) -> Result<Vec<(f64, f64)>> {
    let gl = GaussLegendre::new(per_panel)?;
    Ok(geometric_panels(r_max, r_min, ratio)
        .into_iter()
        .flat_map(|(a, b)| gl.on_interval(a, b))
        .collect())
}

/// Equispaced angles with equal weights on `[0, 2π)`.
pub fn periodic_rule(count: usize) -> Vec<(f64, f64)> {
    let h = 2.0 * PI / count as f64;
    (0..count).map(|k| ((k as f64 + 0.5) * h, h)).collect()
}

/// Gauss–Legendre nodes on `[0, 1]` graded toward `1` by the map `t = 1 − (1 − s)^2`.
pub fn graded_unit_rule(count: usize, toward_one: bool) -> Result<Vec<(f64, f64)>> {
    let gl = GaussLegendre::new(count)?;
    Ok(gl
        .on_interval(0.0, 1.0)
        .into_iter()
        .map(|(s, w)| {
            if toward_one {
                (1.0 - (1.0 - s) * (1.0 - s), 2.0 * (1.0 - s) * w)
            } else {
                (s, w)
            }
        })
        .collect())
}

/// Sum in a fixed order with compensation.
pub fn ordered_sum<I: IntoIterator<Item = f64>>(items: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in items {
        let y = x - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(16).unwrap();
        for k in 0..32 {
            let got: f64 = gl.on_interval(0.0, 1.0).iter().map(|(x, w)| w * x.powi(k)).sum();
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k={k}");
        }
        let w: f64 = GaussLegendre::new(3).unwrap().weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-15);
    }

    #[test]
    fn small_rules_match_tables() {
        let gl = GaussLegendre::new(2).unwrap();
        assert!((gl.nodes()[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let gl = GaussLegendre::new(3).unwrap();
        assert!(gl.nodes()[1].abs() < 1e-15);
        assert!((gl.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn panels_cover_the_range() {
        let p = geometric_panels(1.0, 1e-6, 2.0);
        assert!((p[0].0 - 1e-6).abs() < 1e-18);
        assert_eq!(p.last().unwrap().1, 1.0);
        for w in p.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        let rule = graded_rule(1.0, 1e-6, 2.0, 6).unwrap();
        let got = ordered_sum(rule.iter().map(|(r, w)| w * r.ln()));
        let exact = -1.0 - (1e-6 * (1e-6f64).ln() - 1e-6);
        assert!((got - exact).abs() < 1e-10);
    }

    #[test]
    fn graded_unit_rule_integrates() {
        let r = graded_unit_rule(12, true).unwrap();
        let got: f64 = r.iter().map(|(t, w)| w * (1.0 - t).sqrt()).sum();
        assert!((got - 2.0 / 3.0).abs() < 1e-10);
    }
}
