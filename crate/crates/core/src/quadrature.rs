//! Gauss–Legendre rules and the product grid used for integrals over `CP1`.
//!
//! With `t = |z|²` and `u = t/(1+t)` the Fubini–Study volume form becomes
//! `dV_M = ½ du dφ` on `[0,1) × [0, 2π)`, and `|z|^{2j}(1+|z|²)^{-k}` becomes
//! the polynomial `u^j (1−u)^{k−j}`. Gauss–Legendre in `u` and the uniform
//! trapezoid rule in `φ` are therefore exact for every section inner product
//! once the node counts exceed the degree.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss–Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi's initial guess, refined by Newton on the three-term recurrence.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Product grid on `CP1`: Gauss–Legendre in `u ∈ [0,1]`, trapezoid in `φ`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    n_rad: usize,
    n_ang: usize,
    u: Vec<f64>,
    u_weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(n_rad: usize, n_ang: usize) -> Self {
        assert!(n_rad > 0 && n_ang > 0, "grid sizes must be positive");
        let (x, w) = gauss_legendre(n_rad);
        let u = x.iter().map(|xi| 0.5 * (xi + 1.0)).collect();
        let u_weights = w.iter().map(|wi| 0.5 * wi).collect();
        Self { n_rad, n_ang, u, u_weights }
    }

    /// Default sizes `N_rad = k + 16`, `N_ang = 2k + 4`.
    pub fn for_level(k: u32) -> Self {
        let k = k as usize;
        Self::new(k + 16, 2 * k + 4)
    }

    pub fn n_rad(&self) -> usize {
        self.n_rad
    }

    pub fn n_ang(&self) -> usize {
        self.n_ang
    }

    /// Radial nodes in the `u` variable together with their weights on `[0,1]`.
    pub fn radial(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.u.iter().copied().zip(self.u_weights.iter().copied())
    }

    pub fn angle(&self, l: usize) -> f64 {
        2.0 * PI * l as f64 / self.n_ang as f64
    }

    /// Chart point for radial node `u` and angular index `l`.
    pub fn point(&self, u: f64, l: usize) -> Complex64 {
        Complex64::from_polar((u / (1.0 - u)).sqrt(), self.angle(l))
    }

    /// Weight of node `(u, l)` against `dV_M`, given the `[0,1]` weight of `u`.
    pub fn volume_weight(&self, wu: f64) -> f64 {
        PI * wu / self.n_ang as f64
    }

    /// `∫_M f dV_M`.
    pub fn integrate_m(&self, f: impl Fn(Complex64) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for (u, wu) in self.radial() {
            let mut ring = 0.0;
            for l in 0..self.n_ang {
                let z = self.point(u, l);
                let v = f(z);
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample { z: format!("{z}") });
                }
                ring += v;
            }
            total += self.volume_weight(wu) * ring;
        }
        Ok(total)
    }

    pub fn integrate_m_complex(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for (u, wu) in self.radial() {
            let mut ring = Complex64::new(0.0, 0.0);
            for l in 0..self.n_ang {
                let z = self.point(u, l);
                let v = f(z);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFiniteSample { z: format!("{z}") });
                }
                ring += v;
            }
            total += self.volume_weight(wu) * ring;
        }
        Ok(total)
    }

    /// Dump nodes as CSV: `u, weight_u, l, phi, z_re, z_im, volume_weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "weight_u", "l", "phi", "z_re", "z_im", "volume_weight"])?;
        for (u, wu) in self.radial() {
            for l in 0..self.n_ang {
                let z = self.point(u, l);
                w.write_record(&[
                    format!("{u:.17e}"),
                    format!("{wu:.17e}"),
                    l.to_string(),
                    format!("{:.17e}", self.angle(l)),
                    format!("{:.17e}", z.re),
                    format!("{:.17e}", z.im),
                    format!("{:.17e}", self.volume_weight(wu)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `ln n!` for `n = 0..=n_max`.
pub(crate) fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for n in 1..=n_max {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}
