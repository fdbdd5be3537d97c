//! Gauss–Legendre rules and a globally adaptive integrator built on them.
//!
//! Each panel is integrated with an `n`-point and a `2n`-point rule; the
//! difference is the panel's error estimate. The panel with the largest
//! estimate is bisected until the summed estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use crate::{Error, Result, C64};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for k in 0..half {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Values the integrator can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// A fixed rule mapped onto arbitrary intervals.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(x, w)` pairs for the interval [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<T: QuadValue>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        self.mapped(a, b).fold(T::zero(), |acc, (x, w)| acc + f(x) * w)
    }
}

/// Absolute and relative tolerances; a result is accepted when its error
/// estimate is at most `max(abs, rel * |value|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    fn target(&self, magnitude: f64) -> f64 {
        self.abs.max(self.rel * magnitude)
    }
}

/// An integral value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Legendre integration.
#[derive(Clone, Debug)]
pub struct AdaptiveIntegrator {
    coarse: GaussLegendre,
    fine: GaussLegendre,
    pub tolerance: Tolerance,
    pub max_panels: usize,
}

impl Default for AdaptiveIntegrator {
    fn default() -> Self {
        Self::new(Tolerance::new(1e-12, 1e-10))
    }
}

impl AdaptiveIntegrator {
    pub fn new(tolerance: Tolerance) -> Self {
        AdaptiveIntegrator { coarse: GaussLegendre::new(10), fine: GaussLegendre::new(20), tolerance, max_panels: 4000 }
    }

    pub fn with_max_panels(mut self, n: usize) -> Self {
        self.max_panels = n;
        self
    }

    fn panel<T: QuadValue>(&self, a: f64, b: f64, f: &mut impl FnMut(f64) -> T) -> Panel<T> {
        let lo = self.coarse.integrate(a, b, &mut *f);
        let hi = self.fine.integrate(a, b, &mut *f);
        Panel { a, b, value: hi, error: (hi - lo).magnitude() }
    }

    /// ∫_a^b f, with the interval pre-split at `breakpoints` that fall inside it.
    pub fn integrate_with_breaks<T: QuadValue>(
        &self,
        a: f64,
        b: f64,
        breakpoints: &[f64],
        mut f: impl FnMut(f64) -> T,
    ) -> Result<Estimate<T>> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!("integration limits must be finite, got [{a}, {b}]")));
        }
        if a == b {
            return Ok(Estimate { value: T::zero(), error: 0.0, panels: 0 });
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&p| p > lo && p < hi).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = vec![lo];
        edges.extend(cuts);
        edges.push(hi);

        let mut heap = BinaryHeap::new();
        for w in edges.windows(2) {
            heap.push(self.panel(w[0], w[1], &mut f));
        }
        loop {
            let (value, error) = heap
                .iter()
                .fold((T::zero(), 0.0), |(v, e), p| (v + p.value, e + p.error));
            if error <= self.tolerance.target(value.magnitude()) {
                return Ok(Estimate { value: value * sign, error, panels: heap.len() });
            }
            if heap.len() >= self.max_panels {
                return Err(Error::Accuracy { estimate: value.magnitude() * sign, error_bound: error });
            }
            let worst = heap.pop().expect("nonempty panel set");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Panel can no longer be split in floating point.
                return Err(Error::Accuracy { estimate: value.magnitude() * sign, error_bound: error });
            }
            heap.push(self.panel(worst.a, mid, &mut f));
            heap.push(self.panel(mid, worst.b, &mut f));
        }
    }

    pub fn integrate<T: QuadValue>(&self, a: f64, b: f64, f: impl FnMut(f64) -> T) -> Result<Estimate<T>> {
        self.integrate_with_breaks(a, b, &[], f)
    }

    /// As [`Self::integrate_with_breaks`] for an integrand that can fail; the
    /// first error raised by `f` is returned.
    pub fn try_integrate_with_breaks<T: QuadValue>(
        &self,
        a: f64,
        b: f64,
        breakpoints: &[f64],
        mut f: impl FnMut(f64) -> Result<T>,
    ) -> Result<Estimate<T>> {
        let mut failure = None;
        let est = self.integrate_with_breaks(a, b, breakpoints, |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                T::zero()
            }
        });
        match failure {
            Some(e) => Err(e),
            None => est,
        }
    }
}
