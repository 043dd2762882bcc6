//! One-dimensional Gauss–Legendre rules and a globally adaptive integrator.
//!
//! Each panel is integrated with an `m`-point Gauss rule on the whole panel and
//! on both halves; the difference is the panel's error estimate and the
//! half-panel sum is the accepted value. The panel with the largest estimate is
//! split until the summed estimate meets the requested tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1] from Newton iteration on P_m.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Gauss rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..(m + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self { nodes, weights }
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

    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if m == 0 { 1.0 } else { p1 };
    let d = m as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Absolute and relative error targets; the effective target is the larger of
/// `abs` and `rel * |value|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

impl Estimate {
    pub fn zero() -> Self {
        Self {
            value: 0.0,
            error: 0.0,
            evals: 0,
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
            evals: self.evals + rhs.evals,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl Panel {
    fn value(&self) -> f64 {
        self.left + self.right
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

#[derive(Debug, Clone)]
pub struct Adaptive {
    rule: GaussLegendre,
    pub tol: Tolerance,
    pub max_panels: usize,
}

impl Adaptive {
    pub fn new(nodes: usize, tol: Tolerance, max_panels: usize) -> Self {
        Self {
            rule: GaussLegendre::new(nodes),
            tol,
            max_panels,
        }
    }

    pub fn with_tolerance(&self, tol: Tolerance) -> Self {
        Self {
            rule: self.rule.clone(),
            tol,
            max_panels: self.max_panels,
        }
    }

    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    fn make_panel<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64, whole: f64) -> Panel {
        let m = 0.5 * (a + b);
        let left = self.rule.integrate(f, a, m);
        let right = self.rule.integrate(f, m, b);
        Panel {
            a,
            b,
            left,
            right,
            error: (left + right - whole).abs(),
        }
    }

    /// Integrate `f` over `[breaks[0], breaks[last]]`, starting from one panel
    /// per consecutive pair of (sorted) break points.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, breaks: &[f64]) -> Result<Estimate> {
        let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()));
        if pts.len() < 2 {
            return Ok(Estimate::zero());
        }
        let n = self.rule.len();
        let mut evals = 0usize;
        let mut heap = BinaryHeap::with_capacity(pts.len() * 2);
        let mut frozen: Vec<Panel> = Vec::new();
        for w in pts.windows(2) {
            let whole = self.rule.integrate(&mut f, w[0], w[1]);
            heap.push(self.make_panel(&mut f, w[0], w[1], whole));
            evals += 3 * n;
        }
        let mut panels = heap.len();
        loop {
            let (value, error, magnitude) = heap
                .iter()
                .chain(frozen.iter())
                .fold((0.0, 0.0, 0.0), |(v, e, s), p| {
                    (v + p.value(), e + p.error, s + p.left.abs() + p.right.abs())
                });
            let target = self.tol.target(value).max(64.0 * f64::EPSILON * magnitude);
            if error <= target && value.is_finite() {
                return Ok(Estimate {
                    value,
                    error,
                    evals,
                });
            }
            let worst = match heap.pop() {
                Some(p) => p,
                None => {
                    return Err(Error::NotConverged {
                        value,
                        residual: error,
                        target,
                    })
                }
            };
            if panels >= self.max_panels || !value.is_finite() {
                return Err(Error::NotConverged {
                    value,
                    residual: error,
                    target,
                });
            }
            let m = 0.5 * (worst.a + worst.b);
            if (worst.b - worst.a)
                <= 64.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE)
            {
                frozen.push(worst);
                continue;
            }
            heap.push(self.make_panel(&mut f, worst.a, m, worst.left));
            heap.push(self.make_panel(&mut f, m, worst.b, worst.right));
            evals += 4 * n;
            panels += 1;
        }
    }
}
