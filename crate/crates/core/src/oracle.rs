//! Deterministic analytic stand-in for the finite-element simulations.
//!
//! With the design normalized to the unit cube,
//! `u = (t_beam - 1.5) / 2.5`, `v = (t_cross - 0.8) / 0.8`,
//! `w = (spacing - 10) / 6`, the responses are
//!
//! ```text
//! fx = 4 + 48u + 18u² + 8uv + 4v - 5uw      [N]
//! fy = 0.25 fx + 2v                         [N]
//! dx = 33 - 12u - 4u² - 2v + 2w             [mm]
//! dy = 9 - 4u - v + w                       [mm]
//! ```
//!
//! Thicker beams stiffen the finger: force rises and tip displacement
//! falls. Wider crossbeam spacing softens it. Optional multiplicative
//! Gaussian noise is drawn per (record, response) from a counter-style
//! stream so generation order does not matter.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Provenance, SimRecord};
use crate::design_space::{enumerate_grid, DesignPoint, DesignSpace};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Relative standard deviation of the multiplicative noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn noise_free() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::config(
                "oracle.noise_sigma",
                "must be finite and non-negative",
            ));
        }
        Ok(())
    }
}

/// Oracle responses for one design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Responses<T> {
    pub fx: T,
    pub fy: T,
    pub dx: T,
    pub dy: T,
}

impl<T: Copy> Responses<T> {
    pub fn to_array(&self) -> [T; 4] {
        [self.fx, self.fy, self.dx, self.dy]
    }
}

fn noiseless<T: Scalar>(d: &DesignPoint<T>) -> Responses<T> {
    let l = T::lit;
    let u = (d.t_beam - l(1.5)) / l(2.5);
    let v = (d.t_cross - l(0.8)) / l(0.8);
    let w = (d.spacing - l(10.0)) / l(6.0);
    let fx = l(4.0) + l(48.0) * u + l(18.0) * u * u + l(8.0) * u * v + l(4.0) * v
        - l(5.0) * u * w;
    Responses {
        fx,
        fy: l(0.25) * fx + l(2.0) * v,
        dx: l(33.0) - l(12.0) * u - l(4.0) * u * u - l(2.0) * v + l(2.0) * w,
        dy: l(9.0) - l(4.0) * u - v + w,
    }
}

/// Evaluates one design. `record` selects the noise stream and is
/// ignored when the noise level is zero.
pub fn evaluate_indexed<T: Scalar>(
    design: &DesignPoint<T>,
    config: &OracleConfig,
    record: u64,
) -> Result<Responses<T>> {
    config.validate()?;
    DesignSpace::<T>::default().check(design)?;
    let r = noiseless(design);
    if config.noise_sigma == 0.0 {
        return Ok(r);
    }
    let normal = Normal::new(0.0, config.noise_sigma)
        .map_err(|e| Error::config("oracle.noise_sigma", e.to_string()))?;
    let mut stream = rng::stream(config.seed, record);
    let mut perturb = |x: T| x * (T::one() + T::lit(normal.sample(&mut stream)));
    Ok(Responses {
        fx: perturb(r.fx),
        fy: perturb(r.fy),
        dx: perturb(r.dx),
        dy: perturb(r.dy),
    })
}

pub fn evaluate<T: Scalar>(design: &DesignPoint<T>, config: &OracleConfig) -> Result<Responses<T>> {
    evaluate_indexed(design, config, 0)
}

/// Simulates every grid point of `space` in enumeration order.
pub fn generate_dataset<T: Scalar>(
    space: &DesignSpace<T>,
    config: &OracleConfig,
) -> Result<Dataset<T>> {
    config.validate()?;
    let grid = enumerate_grid(space)?;
    let records = grid
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let r = evaluate_indexed(d, config, i as u64)?;
            Ok(SimRecord {
                design: *d,
                fx: r.fx,
                fy: r.fy,
                dx: r.dx,
                dy: r.dy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(records, Provenance::OracleGenerated { seed: config.seed })
}
