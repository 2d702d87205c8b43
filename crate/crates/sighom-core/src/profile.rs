//! Periodic interface profiles `g` on the surface cell `Y' = ]0,1[`.
//!
//! A profile must be positive, 1-periodic and Lipschitz. Two presets are
//! built in: a smooth sine `1 + 0.5 sin(2 pi y)` and a Lipschitz-only
//! sawtooth (triangle wave of mean 1 with slopes +-4, two teeth per cell,
//! values in [0.5, 1.5], kinks at multiples of 1/4). User profiles are
//! piecewise-linear sample tables.

use crate::error::{Error, Result};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Piecewise-linear 1-periodic table on `[0,1]`; shared by profiles and
/// conductances. Abscissae are strictly increasing, first 0 and last 1, and
/// the endpoint values must agree.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicTable1d {
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

impl PeriodicTable1d {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Validation("sample table needs at least 2 points".into()));
        }
        let ys: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
        if ys[0] != 0.0 || *ys.last().unwrap() != 1.0 {
            return Err(Error::Validation(
                "sample abscissae must start at 0 and end at 1".into(),
            ));
        }
        for w in ys.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Validation(format!(
                    "sample abscissae not strictly increasing at y'={}",
                    w[1]
                )));
            }
        }
        let last = values.len() - 1;
        if (values[0] - values[last]).abs() > 1e-14 * (1.0 + values[0].abs()) {
            return Err(Error::Validation(format!(
                "table not periodic: value {} at y'=0 vs {} at y'=1",
                values[0], values[last]
            )));
        }
        Ok(PeriodicTable1d { ys, values })
    }

    /// Value and right-limit slope at `y` (wrapped into `[0,1)`).
    pub fn eval(&self, y: f64) -> (f64, f64) {
        let y = wrap_unit(y);
        // segment index by scan; tables are short
        let mut seg = self.ys.len() - 2;
        for i in 0..self.ys.len() - 1 {
            if y < self.ys[i + 1] {
                seg = i;
                break;
            }
        }
        let (y0, y1) = (self.ys[seg], self.ys[seg + 1]);
        let (v0, v1) = (self.values[seg], self.values[seg + 1]);
        let slope = (v1 - v0) / (y1 - y0);
        (v0 + slope * (y - y0), slope)
    }

    pub fn max_slope_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.ys.len() - 1 {
            let s = (self.values[i + 1] - self.values[i]) / (self.ys[i + 1] - self.ys[i]);
            m = m.max(s.abs());
        }
        m
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact mean of the piecewise-linear interpolant.
    pub fn mean(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.ys.len() - 1 {
            acc += 0.5 * (self.values[i] + self.values[i + 1]) * (self.ys[i + 1] - self.ys[i]);
        }
        acc
    }

    /// Interior breakpoints in `(0,1)`.
    pub fn kinks(&self) -> Vec<f64> {
        self.ys[1..self.ys.len() - 1].to_vec()
    }
}

/// Wraps a coordinate into `[0,1)`.
pub fn wrap_unit(y: f64) -> f64 {
    let w = y - libm::floor(y);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileShape {
    /// `mean + amplitude * sin(2 pi y)`.
    Sine { mean: f64, amplitude: f64 },
    /// Triangle wave, two teeth per cell: trough `mean - slope/8` at 0 and
    /// 1/2, peak `mean + slope/8` at 1/4 and 3/4.
    Sawtooth { mean: f64, slope: f64 },
    Samples(PeriodicTable1d),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceProfile {
    pub shape: ProfileShape,
    pub lipschitz: f64,
}

impl InterfaceProfile {
    /// The smooth preset `1 + 0.5 sin(2 pi y)`.
    pub fn sine() -> Self {
        InterfaceProfile {
            shape: ProfileShape::Sine { mean: 1.0, amplitude: 0.5 },
            lipschitz: PI,
        }
    }

    /// The Lipschitz-only preset: mean 1, slopes +-4, values in [0.5, 1.5].
    pub fn sawtooth() -> Self {
        InterfaceProfile {
            shape: ProfileShape::Sawtooth { mean: 1.0, slope: 4.0 },
            lipschitz: 4.0,
        }
    }

    /// Constant profile `g = level` (zero-amplitude sine).
    pub fn flat(level: f64) -> Self {
        InterfaceProfile {
            shape: ProfileShape::Sine { mean: level, amplitude: 0.0 },
            lipschitz: 0.0,
        }
    }

    pub fn from_samples(samples: &[(f64, f64)]) -> Result<Self> {
        let table = PeriodicTable1d::new(samples)?;
        for (i, v) in table.values.iter().enumerate() {
            if *v <= 0.0 {
                return Err(Error::Validation(format!(
                    "profile sample {i} at y'={}: value {v} is not positive",
                    table.ys[i]
                )));
            }
        }
        let lip = table.max_slope_abs();
        Ok(InterfaceProfile { shape: ProfileShape::Samples(table), lipschitz: lip })
    }

    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            ProfileShape::Sine { mean, amplitude } => {
                if mean - amplitude.abs() <= 0.0 {
                    return Err(Error::Validation(format!(
                        "sine profile not positive: mean {mean}, amplitude {amplitude}"
                    )));
                }
            }
            ProfileShape::Sawtooth { mean, slope } => {
                if mean - slope.abs() / 8.0 <= 0.0 {
                    return Err(Error::Validation(format!(
                        "sawtooth profile not positive: mean {mean}, slope {slope}"
                    )));
                }
            }
            ProfileShape::Samples(table) => {
                for (i, v) in table.values.iter().enumerate() {
                    if *v <= 0.0 {
                        return Err(Error::Validation(format!(
                            "profile sample {i} at y'={}: value {v} is not positive",
                            table.ys[i]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `g(y)` and its right-limit slope, with periodic wraparound.
    pub fn eval(&self, y: f64) -> (f64, f64) {
        let y = wrap_unit(y);
        match &self.shape {
            ProfileShape::Sine { mean, amplitude } => (
                mean + amplitude * libm::sin(2.0 * PI * y),
                amplitude * 2.0 * PI * libm::cos(2.0 * PI * y),
            ),
            ProfileShape::Sawtooth { mean, slope } => {
                let w = wrap_unit(2.0 * y); // tooth phase
                let trough = mean - slope / 8.0;
                let peak = mean + slope / 8.0;
                if w < 0.5 {
                    (trough + slope * (w / 2.0), *slope)
                } else {
                    (peak - slope * ((w - 0.5) / 2.0), -*slope)
                }
            }
            ProfileShape::Samples(table) => table.eval(y),
        }
    }

    pub fn max_value(&self) -> f64 {
        match &self.shape {
            ProfileShape::Sine { mean, amplitude } => mean + amplitude.abs(),
            ProfileShape::Sawtooth { mean, slope } => mean + slope.abs() / 8.0,
            ProfileShape::Samples(table) => table.max_value(),
        }
    }

    pub fn min_value(&self) -> f64 {
        match &self.shape {
            ProfileShape::Sine { mean, amplitude } => mean - amplitude.abs(),
            ProfileShape::Sawtooth { mean, slope } => mean - slope.abs() / 8.0,
            ProfileShape::Samples(table) => table.min_value(),
        }
    }

    /// Exact cell mean of the profile.
    pub fn mean_value(&self) -> f64 {
        match &self.shape {
            ProfileShape::Sine { mean, .. } => *mean,
            ProfileShape::Sawtooth { mean, .. } => *mean,
            ProfileShape::Samples(table) => table.mean(),
        }
    }

    /// Interior slope breakpoints in `(0,1)`, for kink-aligned quadrature
    /// and meshing.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.shape {
            ProfileShape::Sine { .. } => Vec::new(),
            ProfileShape::Sawtooth { .. } => alloc::vec![0.25, 0.5, 0.75],
            ProfileShape::Samples(table) => table.kinks(),
        }
    }
}
