//! The test function `χ = ψ∗ψ` and its Fourier transform `χ̂ = ψ̂²`.
//!
//! `ψ` is the standard mollifier supported in `(−ε/2, ε/2)` and normalized in
//! `L²`. Fourier convention: `ĝ(s) = ∫ g(t) e^{−ist} dt`, so `∫χ̂ = 2πχ(0)`.
//!
//! `ψ̂` has no closed form. It is tabulated lazily on a uniform grid of step
//! `1e−3` in blocks of one unit of `s`, each block sharing one composite
//! Gauss–Legendre rule and advancing `e^{ist}` by rotation. Between grid nodes
//! `ψ̂` is interpolated by four-point Lagrange and then squared, which keeps
//! `χ̂ ≥ 0` exactly. Past the table end an envelope `exp(A − B√s)` fitted to
//! the local maxima over the last decade is used.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::CompositeRule;

/// Anything usable as the `χ̂` weight of a smoothed kernel.
pub trait ChiHat: Sync {
    fn chi_hat(&self, s: f64) -> f64;
}

/// `χ̂ ≡ c`, a test hook: with `c = 1` the smoothed kernel collapses to a
/// multiple of the Szegő kernel.
#[derive(Debug, Clone, Copy)]
pub struct ConstantChiHat(pub f64);

impl ChiHat for ConstantChiHat {
    fn chi_hat(&self, _s: f64) -> f64 {
        self.0
    }
}

pub const CACHE_STEP: f64 = 1e-3;
const BLOCK: usize = 1000;
const REANCHOR: usize = 64;
const GL_ORDER: usize = 16;
/// Table end in units of `1/ε`.
const S_MAX_EPS: f64 = 1024.0;
const CHI_PANELS: usize = 512;
const INNER_PANELS: usize = 32;

#[derive(Debug)]
pub struct TestFunctionChi {
    eps: f64,
    /// `L²` normalization of the raw bump.
    z_norm: f64,
    l1: f64,
    s_max: f64,
    blocks: Vec<OnceLock<Box<[f64]>>>,
    tail: OnceLock<(f64, f64)>,
    chi_table: OnceLock<ChiTable>,
    delta: OnceLock<f64>,
}

#[derive(Debug)]
struct ChiTable {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    chi: Vec<f64>,
}

fn raw_bump(t: f64, eps: f64) -> f64 {
    let x = 2.0 * t / eps;
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

impl TestFunctionChi {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {eps}")));
        }
        let a = 0.5 * eps;
        let fine = CompositeRule::new(-a, a, 256, GL_ORDER);
        let n2 = fine.integrate(|t| raw_bump(t, eps).powi(2));
        let z_norm = 1.0 / n2.sqrt();
        let l1 = z_norm * fine.integrate(|t| raw_bump(t, eps));
        let s_max = S_MAX_EPS / eps;
        let n_blocks = (s_max / (BLOCK as f64 * CACHE_STEP)).ceil() as usize + 1;
        Ok(Self {
            eps,
            z_norm,
            l1,
            s_max,
            blocks: (0..n_blocks).map(|_| OnceLock::new()).collect(),
            tail: OnceLock::new(),
            chi_table: OnceLock::new(),
            delta: OnceLock::new(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn psi(&self, t: f64) -> f64 {
        self.z_norm * raw_bump(t, self.eps)
    }

    /// `‖ψ‖_{L¹} = ψ̂(0)`.
    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    /// `χ̂(0) = ‖ψ‖²_{L¹}`.
    pub fn chi_hat_zero(&self) -> f64 {
        self.l1 * self.l1
    }

    fn panels_for(&self, s: f64) -> usize {
        (s.abs() * 0.5 * self.eps / 8.0).ceil() as usize + 8
    }

    /// `ψ̂(s) = 2∫_0^{ε/2} ψ(t) cos(st) dt` by composite Gauss–Legendre.
    pub fn psi_hat_direct(&self, s: f64) -> f64 {
        let rule = CompositeRule::new(0.0, 0.5 * self.eps, self.panels_for(s), GL_ORDER);
        2.0 * rule.integrate(|t| self.psi(t) * (s * t).cos())
    }

    pub fn chi_hat_direct(&self, s: f64) -> f64 {
        self.psi_hat_direct(s).powi(2)
    }

    fn block(&self, b: usize) -> &[f64] {
        self.blocks[b].get_or_init(|| {
            let s0 = (b * BLOCK) as f64 * CACHE_STEP;
            let s_end = ((b + 1) * BLOCK) as f64 * CACHE_STEP;
            let rule = CompositeRule::new(0.0, 0.5 * self.eps, self.panels_for(s_end), GL_ORDER);
            let amp: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(&t, &w)| 2.0 * w * self.psi(t)).collect();
            let step: Vec<Complex64> = rule.nodes.iter().map(|&t| Complex64::from_polar(1.0, CACHE_STEP * t)).collect();
            let mut rot: Vec<Complex64> = Vec::new();
            let mut out = Vec::with_capacity(BLOCK);
            for i in 0..BLOCK {
                if i % REANCHOR == 0 {
                    let s = ((b * BLOCK + i) as f64) * CACHE_STEP;
                    rot = rule.nodes.iter().map(|&t| Complex64::from_polar(1.0, s * t)).collect();
                } else {
                    for (r, st) in rot.iter_mut().zip(&step) {
                        *r *= st;
                    }
                }
                out.push(amp.iter().zip(&rot).map(|(a, r)| a * r.re).sum());
            }
            debug_assert!(s0 < s_end);
            out.into_boxed_slice()
        })
    }

    /// `ψ̂` at cache node `m ≥ 0`.
    fn node(&self, m: usize) -> f64 {
        self.block(m / BLOCK)[m % BLOCK]
    }

    fn last_node(&self) -> usize {
        (self.s_max / CACHE_STEP).round() as usize
    }

    /// Interpolated `ψ̂` inside the table.
    fn psi_hat_cached(&self, s: f64) -> f64 {
        let s = s.abs();
        let x = s / CACHE_STEP;
        let m = (x.floor() as usize).min(self.last_node() - 2);
        let p = x - m as f64;
        let at = |i: isize| -> f64 {
            let idx = m as isize + i;
            self.node(idx.unsigned_abs())
        };
        let (f0, f1, f2, f3) = (at(-1), at(0), at(1), at(2));
        // Lagrange weights on nodes −1, 0, 1, 2
        let w0 = -p * (p - 1.0) * (p - 2.0) / 6.0;
        let w1 = (p + 1.0) * (p - 1.0) * (p - 2.0) / 2.0;
        let w2 = -(p + 1.0) * p * (p - 2.0) / 2.0;
        let w3 = (p + 1.0) * p * (p - 1.0) / 6.0;
        w0 * f0 + w1 * f1 + w2 * f2 + w3 * f3
    }

    /// `(A, B)` with `ln χ̂(s) ≲ A − B√s` on the last decade of the table.
    pub fn tail_envelope(&self) -> (f64, f64) {
        *self.tail.get_or_init(|| {
            let lo = 0.1 * self.s_max;
            let window = 2.0 * PI / (0.5 * self.eps);
            let n_win = ((self.s_max - lo) / window).floor() as usize;
            let samples: Vec<(f64, f64)> = (0..n_win)
                .into_par_iter()
                .map(|w| {
                    let a = lo + w as f64 * window;
                    let mut best = (a, 0.0f64);
                    for i in 0..64 {
                        let s = a + window * i as f64 / 64.0;
                        let v = self.chi_hat_direct(s);
                        if v > best.1 {
                            best = (s, v);
                        }
                    }
                    best
                })
                .collect();
            let pts: Vec<(f64, f64)> =
                samples.into_iter().filter(|p| p.1 > 0.0).map(|(s, v)| (s.sqrt(), v.ln())).collect();
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let slope = (sxy / sxx).min(0.0);
            // shift up so the envelope dominates every sampled maximum
            let a = pts.iter().map(|p| p.1 - slope * p.0).fold(f64::NEG_INFINITY, f64::max);
            (a, -slope)
        })
    }

    /// `χ̂(s)`: table plus interpolation for `|s| ≤ S_max`, envelope beyond.
    pub fn chi_hat(&self, s: f64) -> f64 {
        let s = s.abs();
        if s <= self.s_max - 2.0 * CACHE_STEP {
            self.psi_hat_cached(s).powi(2)
        } else {
            let (a, b) = self.tail_envelope();
            (a - b * s.sqrt()).exp()
        }
    }

    /// Minimum of `χ̂` over the first `n` cache nodes (all of them when `None`).
    pub fn min_on_cache(&self, n: Option<usize>) -> f64 {
        let n = n.unwrap_or(self.last_node() + 1).min(self.blocks.len() * BLOCK);
        let n_blocks = n.div_ceil(BLOCK);
        (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let vals = self.block(b);
                let end = (n - b * BLOCK).min(BLOCK);
                vals[..end].iter().map(|v| v * v).fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// First `s > 0` with `χ̂(s) = ‖ψ‖²_{L¹}/2`, by bisection on the cached
    /// profile; `χ̂ ≥ ‖ψ‖²_{L¹}/2` on `[0, δ)`.
    pub fn delta(&self) -> Result<f64> {
        if let Some(d) = self.delta.get() {
            return Ok(*d);
        }
        let target = 0.5 * self.chi_hat_zero();
        let step = 0.01 / self.eps;
        let mut lo = 0.0;
        let mut hi = step;
        while self.chi_hat(hi) > target {
            lo = hi;
            hi += step;
            if hi > self.s_max {
                return Err(Error::SelfTest("χ̂ never drops to half its peak".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.chi_hat(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        let d = 0.5 * (lo + hi);
        Ok(*self.delta.get_or_init(|| d))
    }

    /// `χ(t) = ∫ ψ(τ) ψ(t − τ) dτ`, by direct quadrature over the overlap.
    pub fn chi(&self, t: f64) -> f64 {
        let t = t.abs();
        let a = 0.5 * self.eps;
        if t >= self.eps {
            return 0.0;
        }
        let rule = CompositeRule::new(t - a, a, INNER_PANELS, GL_ORDER);
        rule.integrate(|u| self.psi(u) * self.psi(t - u))
    }

    fn chi_table(&self) -> &ChiTable {
        self.chi_table.get_or_init(|| {
            let rule = CompositeRule::new(0.0, self.eps, CHI_PANELS, GL_ORDER);
            let chi = rule.nodes.par_iter().map(|&t| self.chi(t)).collect();
            ChiTable { nodes: rule.nodes, weights: rule.weights, chi }
        })
    }

    /// `G(y) = ∫_{−∞}^{y} χ̂ = π + 2∫_0^ε χ(t) sin(yt)/t dt`, computed from `χ`
    /// rather than from the `χ̂` table.
    pub fn big_g(&self, y: f64) -> f64 {
        let tab = self.chi_table();
        let mut acc = 0.0;
        for i in 0..tab.nodes.len() {
            let t = tab.nodes[i];
            acc += tab.weights[i] * tab.chi[i] * (y * t).sin() / t;
        }
        PI + 2.0 * acc
    }

    /// `G_k(η) = ∫_{−∞}^{η} χ̂_k` with `χ̂_k(s) = k^{−ξ} χ̂(s k^{−ξ})`.
    pub fn big_g_k(&self, eta: f64, k: u32, xi: f64) -> f64 {
        self.big_g(eta / (k as f64).powf(xi))
    }
}

impl ChiHat for TestFunctionChi {
    fn chi_hat(&self, s: f64) -> f64 {
        TestFunctionChi::chi_hat(self, s)
    }
}

/// Process-wide instance for a given `ε`, keyed by bit pattern.
pub fn shared(eps: f64) -> Result<&'static TestFunctionChi> {
    use std::collections::HashMap;
    use std::sync::Mutex;
    static POOL: OnceLock<Mutex<HashMap<u64, &'static TestFunctionChi>>> = OnceLock::new();
    let pool = POOL.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = pool.lock().expect("chi pool poisoned");
    if let Some(c) = map.get(&eps.to_bits()) {
        return Ok(c);
    }
    let c: &'static TestFunctionChi = Box::leak(Box::new(TestFunctionChi::new(eps)?));
    map.insert(eps.to_bits(), c);
    Ok(c)
}
