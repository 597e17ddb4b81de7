//! The bounded three-parameter Fin-Ray design space, its factorial grid,
//! and min-max scaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Slack allowed when checking bounds and grid divisibility, in mm.
pub const BOUNDS_TOLERANCE: f64 = 1e-9;

/// Scaled values within this distance outside [0, 1] are snapped back in.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

pub const VARIABLE_NAMES: [&str; 3] = ["t_beam", "t_cross", "spacing"];

/// One internal geometry of the finger, all lengths in mm.
///
/// Front and support beams share the thickness `t_beam`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DesignPoint<T: Scalar> {
    pub t_beam: T,
    pub t_cross: T,
    pub spacing: T,
}

impl<T: Scalar> DesignPoint<T> {
    /// Builds a point and checks it against the default design space.
    pub fn new(t_beam: T, t_cross: T, spacing: T) -> Result<Self> {
        let p = Self::new_unchecked(t_beam, t_cross, spacing);
        DesignSpace::<T>::default().check(&p)?;
        Ok(p)
    }

    pub const fn new_unchecked(t_beam: T, t_cross: T, spacing: T) -> Self {
        Self {
            t_beam,
            t_cross,
            spacing,
        }
    }

    pub fn from_array(v: [T; 3]) -> Self {
        Self::new_unchecked(v[0], v[1], v[2])
    }

    pub fn to_array(&self) -> [T; 3] {
        [self.t_beam, self.t_cross, self.spacing]
    }
}

/// Bounds and grid increment for one design variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct VarRange<T: Scalar> {
    pub min: T,
    pub max: T,
    pub step: T,
}

impl<T: Scalar> VarRange<T> {
    pub fn new(min: f64, max: f64, step: f64) -> Self {
        Self {
            min: T::lit(min),
            max: T::lit(max),
            step: T::lit(step),
        }
    }

    pub fn fixed(value: T) -> Self {
        Self {
            min: value,
            max: value,
            step: T::zero(),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let bad = |reason: String| Error::InvalidSpace {
            variable: name.to_string(),
            reason,
        };
        let (min, max, step) = (self.min.as_f64(), self.max.as_f64(), self.step.as_f64());
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(bad("bounds and step must be finite".into()));
        }
        if min <= 0.0 {
            return Err(bad(format!("lower bound {min} must be strictly positive")));
        }
        if max < min {
            return Err(bad(format!("upper bound {max} is below lower bound {min}")));
        }
        if max == min {
            return Ok(());
        }
        if step <= 0.0 {
            return Err(bad(format!("step {step} must be positive")));
        }
        let intervals = (max - min) / step;
        if ((intervals - intervals.round()) * step).abs() > BOUNDS_TOLERANCE {
            return Err(bad(format!(
                "step {step} does not evenly divide the range {min}..{max}"
            )));
        }
        Ok(())
    }

    /// Number of grid values, assuming the range is valid.
    pub fn count(&self) -> usize {
        if self.max == self.min {
            1
        } else {
            ((self.max - self.min) / self.step).round().to_usize().unwrap_or(0) + 1
        }
    }

    /// Grid values from `min` to `max`. Interior values are snapped to a
    /// 1e-9 mm lattice so decimal steps such as 0.2 print cleanly.
    pub fn values(&self) -> Vec<T> {
        let n = self.count();
        let lattice = T::lit(1e9);
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.max
                } else {
                    let v = self.min + self.step * T::from_usize_lossy(i);
                    (v * lattice).round() / lattice
                }
            })
            .collect()
    }

    pub fn contains(&self, v: T) -> bool {
        let tol = T::lit(BOUNDS_TOLERANCE);
        v.is_finite() && v >= self.min - tol && v <= self.max + tol
    }
}

/// The box of admissible designs plus the sampling grid over it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DesignSpace<T: Scalar> {
    pub t_beam: VarRange<T>,
    pub t_cross: VarRange<T>,
    pub spacing: VarRange<T>,
}

impl<T: Scalar> Default for DesignSpace<T> {
    /// Beam thickness 1.5–4.0 step 0.5, crossbeam thickness 0.8–1.6 step
    /// 0.2, crossbeam spacing 10–16 step 2: 120 designs.
    fn default() -> Self {
        Self {
            t_beam: VarRange::new(1.5, 4.0, 0.5),
            t_cross: VarRange::new(0.8, 1.6, 0.2),
            spacing: VarRange::new(10.0, 16.0, 2.0),
        }
    }
}

impl<T: Scalar> DesignSpace<T> {
    pub fn ranges(&self) -> [(&'static str, &VarRange<T>); 3] {
        [
            (VARIABLE_NAMES[0], &self.t_beam),
            (VARIABLE_NAMES[1], &self.t_cross),
            (VARIABLE_NAMES[2], &self.spacing),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in self.ranges() {
            r.validate(name)?;
        }
        Ok(())
    }

    /// Checks that `p` lies inside the box (grid membership not required).
    pub fn check(&self, p: &DesignPoint<T>) -> Result<()> {
        for ((name, r), v) in self.ranges().into_iter().zip(p.to_array()) {
            if !r.contains(v) {
                return Err(Error::OutOfBounds {
                    variable: name.to_string(),
                    value: v.as_f64(),
                    min: r.min.as_f64(),
                    max: r.max.as_f64(),
                });
            }
        }
        Ok(())
    }

    pub fn grid_size(&self) -> usize {
        self.t_beam.count() * self.t_cross.count() * self.spacing.count()
    }

    /// Per-variable (min, max) bounds as a scaler over the three inputs.
    pub fn bounds_scaler(&self) -> ScalerParams<T> {
        ScalerParams {
            columns: self
                .ranges()
                .iter()
                .map(|(_, r)| ColumnBounds { min: r.min, max: r.max })
                .collect(),
        }
    }
}

/// Full factorial grid, `t_beam` outermost and `spacing` innermost.
pub fn enumerate_grid<T: Scalar>(space: &DesignSpace<T>) -> Result<Vec<DesignPoint<T>>> {
    space.validate()?;
    let (tb, tc, sp) = (
        space.t_beam.values(),
        space.t_cross.values(),
        space.spacing.values(),
    );
    let mut out = Vec::with_capacity(tb.len() * tc.len() * sp.len());
    for &b in &tb {
        for &c in &tc {
            for &s in &sp {
                out.push(DesignPoint::new_unchecked(b, c, s));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ColumnBounds<T: Scalar> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> ColumnBounds<T> {
    pub fn scale(&self, v: T) -> T {
        (v - self.min) / (self.max - self.min)
    }

    pub fn unscale(&self, s: T) -> T {
        self.min + s * (self.max - self.min)
    }
}

/// Result of scaling a value that is expected to fall in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized<T> {
    pub value: T,
    /// Set when the raw scaled value was outside [0, 1] by more than
    /// [`CLAMP_TOLERANCE`]; such values are left unclamped.
    pub out_of_range: bool,
}

/// Per-column min-max bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScalerParams<T: Scalar> {
    pub columns: Vec<ColumnBounds<T>>,
}

impl<T: Scalar> ScalerParams<T> {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.columns.iter().enumerate() {
            if !(c.min.is_finite() && c.max.is_finite()) {
                return Err(Error::NonFinite(format!("scaler column {i}")));
            }
            if c.max <= c.min {
                return Err(Error::DegenerateColumn {
                    column: i,
                    value: c.min.as_f64(),
                });
            }
        }
        Ok(())
    }

    pub fn scale(&self, column: usize, v: T) -> T {
        self.columns[column].scale(v)
    }

    pub fn unscale(&self, column: usize, s: T) -> T {
        self.columns[column].unscale(s)
    }

    /// Scales and snaps numerical noise at the [0, 1] edges.
    pub fn normalize(&self, column: usize, v: T) -> Normalized<T> {
        let s = self.scale(column, v);
        let tol = T::lit(CLAMP_TOLERANCE);
        if s < T::zero() {
            if s >= -tol {
                Normalized { value: T::zero(), out_of_range: false }
            } else {
                Normalized { value: s, out_of_range: true }
            }
        } else if s > T::one() {
            if s <= T::one() + tol {
                Normalized { value: T::one(), out_of_range: false }
            } else {
                Normalized { value: s, out_of_range: true }
            }
        } else {
            Normalized { value: s, out_of_range: false }
        }
    }

    pub fn scale_row(&self, row: &[T]) -> Vec<T> {
        row.iter().enumerate().map(|(i, &v)| self.scale(i, v)).collect()
    }

    pub fn unscale_row(&self, row: &[T]) -> Vec<T> {
        row.iter().enumerate().map(|(i, &v)| self.unscale(i, v)).collect()
    }
}

/// Records the exact per-column minimum and maximum of `rows`.
pub fn fit_scaler<T: Scalar, R: AsRef<[T]>>(rows: &[R]) -> Result<ScalerParams<T>> {
    if rows.len() < 2 {
        return Err(Error::Sizing {
            required: 2,
            available: rows.len(),
        });
    }
    let width = rows[0].as_ref().len();
    let mut columns = vec![
        ColumnBounds {
            min: T::infinity(),
            max: T::neg_infinity()
        };
        width
    ];
    for row in rows {
        let row = row.as_ref();
        if row.len() != width {
            return Err(Error::LengthMismatch {
                expected: width,
                actual: row.len(),
            });
        }
        for (c, &v) in columns.iter_mut().zip(row) {
            if !v.is_finite() {
                return Err(Error::NonFinite("scaler input".into()));
            }
            c.min = c.min.min(v);
            c.max = c.max.max(v);
        }
    }
    let params = ScalerParams { columns };
    params.validate()?;
    Ok(params)
}
