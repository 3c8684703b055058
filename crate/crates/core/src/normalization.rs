//! Startup self-test for the conventions frozen in `docs/NORMALIZATION.md`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ChartPoint, ModelKahlerSurface};
use crate::quadrature::QuadratureGrid;

/// Outcome of each check, as the absolute deviation from its target.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationReport {
    pub volume_dev: f64,
    pub degree_dev: f64,
    pub curvature_dev: f64,
    pub fiber_dev: f64,
}

const VOLUME_TOL: f64 = 1e-12;
const CURVATURE_TOL: f64 = 1e-6;

pub fn self_test() -> Result<NormalizationReport> {
    let model = ModelKahlerSurface::cp1();
    let grid = QuadratureGrid::for_level(8);

    let vol = grid.integrate_m(|_| 1.0)?;
    let volume_dev = (vol - PI).abs() / PI;
    let analytic = model.volume().unwrap_or(f64::NAN);

    // c₁(A) = (i/2π)Θ = ω/π, so deg A = vol/π.
    let degree_dev = (vol / PI - 1.0).abs();

    // Θ = ∂∂̄ log(1+|z|²) = −2i ω: the Laplacian of the potential is four
    // times the volume density.
    let h = 1e-3;
    let mut curvature_dev = 0.0f64;
    for z in [Complex64::new(0.0, 0.0), Complex64::new(0.7, -0.4), Complex64::new(-2.0, 1.5)] {
        let phi = |dz: Complex64| model.potential(&ChartPoint::scalar(z + dz));
        let lap = (phi(Complex64::new(h, 0.0))
            + phi(Complex64::new(-h, 0.0))
            + phi(Complex64::new(0.0, h))
            + phi(Complex64::new(0.0, -h))
            - 4.0 * phi(Complex64::new(0.0, 0.0)))
            / (h * h);
        let density = model.volume_density(&ChartPoint::scalar(z));
        curvature_dev = curvature_dev.max((lap / 4.0 - density).abs());
    }

    // dμ_X = (1/2π) α ∧ π*dV_M: the fiber average of 1 is 1.
    let n = 64;
    let fiber: f64 = (0..n).map(|_| 2.0 * PI / n as f64).sum::<f64>() / (2.0 * PI);
    let fiber_dev = (fiber - 1.0).abs();

    let report = NormalizationReport { volume_dev, degree_dev, curvature_dev, fiber_dev };
    if volume_dev > VOLUME_TOL || (analytic - PI).abs() > 0.0 {
        return Err(Error::SelfTest(format!("vol(CP1) = {vol}, expected π")));
    }
    if degree_dev > VOLUME_TOL {
        return Err(Error::SelfTest(format!("deg A = {}, expected 1", vol / PI)));
    }
    if curvature_dev > CURVATURE_TOL {
        return Err(Error::SelfTest(format!("curvature convention off by {curvature_dev:e}")));
    }
    if fiber_dev > VOLUME_TOL {
        return Err(Error::SelfTest(format!("fiber measure off by {fiber_dev:e}")));
    }
    Ok(report)
}

/// Runs [`self_test`] once per process.
pub fn ensure() -> Result<()> {
    static DONE: OnceLock<std::result::Result<(), String>> = OnceLock::new();
    DONE.get_or_init(|| self_test().map(|_| ()).map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::SelfTest)
}
