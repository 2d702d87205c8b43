//! Periodic coefficient matrices on the unit cell and interface
//! conductances on the surface cell.

use crate::error::{Error, Result};
use crate::profile::{wrap_unit, PeriodicTable1d};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Dense 2x2 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2 {
    pub a: [[f64; 2]; 2],
}

impl Matrix2 {
    pub fn identity() -> Self {
        Matrix2 { a: [[1.0, 0.0], [0.0, 1.0]] }
    }

    pub fn diag(d0: f64, d1: f64) -> Self {
        Matrix2 { a: [[d0, 0.0], [0.0, d1]] }
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a[0][0] * v[0] + self.a[0][1] * v[1],
            self.a[1][0] * v[0] + self.a[1][1] * v[1],
        ]
    }

    pub fn transpose(&self) -> Self {
        Matrix2 {
            a: [[self.a[0][0], self.a[1][0]], [self.a[0][1], self.a[1][1]]],
        }
    }

    pub fn scale(&self, t: f64) -> Self {
        Matrix2 {
            a: [
                [t * self.a[0][0], t * self.a[0][1]],
                [t * self.a[1][0], t * self.a[1][1]],
            ],
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for r in &self.a {
            for v in r {
                m = m.max(v.abs());
            }
        }
        m
    }

    /// Smallest eigenvalue of the symmetric part: the sharp constant in
    /// `(A v, v) >= alpha |v|^2`.
    pub fn min_symmetric_eig(&self) -> f64 {
        let s11 = self.a[0][0];
        let s22 = self.a[1][1];
        let s12 = 0.5 * (self.a[0][1] + self.a[1][0]);
        let mid = 0.5 * (s11 + s22);
        let rad = libm::sqrt(0.25 * (s11 - s22) * (s11 - s22) + s12 * s12);
        mid - rad
    }

    /// Largest singular value: the sharp constant in `|A v| <= beta |v|`.
    pub fn max_singular_value(&self) -> f64 {
        // largest eigenvalue of A^T A
        let t = self.transpose();
        let m = [
            [
                t.a[0][0] * self.a[0][0] + t.a[0][1] * self.a[1][0],
                t.a[0][0] * self.a[0][1] + t.a[0][1] * self.a[1][1],
            ],
            [
                t.a[1][0] * self.a[0][0] + t.a[1][1] * self.a[1][0],
                t.a[1][0] * self.a[0][1] + t.a[1][1] * self.a[1][1],
            ],
        ];
        let mid = 0.5 * (m[0][0] + m[1][1]);
        let s12 = 0.5 * (m[0][1] + m[1][0]);
        let rad = libm::sqrt(0.25 * (m[0][0] - m[1][1]) * (m[0][0] - m[1][1]) + s12 * s12);
        libm::sqrt((mid + rad).max(0.0))
    }
}

/// Piecewise-constant table of matrices on an n x n periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    pub n: usize,
    pub entries: Vec<Matrix2>, // row major, cell (i,j) = entries[i*n + j]
}

impl CoeffTable {
    pub fn new(n: usize, entries: Vec<Matrix2>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::Validation(format!(
                "coefficient table expects {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(CoeffTable { n, entries })
    }

    fn eval(&self, y: [f64; 2]) -> Matrix2 {
        let j = ((wrap_unit(y[0]) * self.n as f64) as usize).min(self.n - 1);
        let i = ((wrap_unit(y[1]) * self.n as f64) as usize).min(self.n - 1);
        self.entries[i * self.n + j]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoeffKind {
    Identity,
    Constant(Matrix2),
    /// `(base + amplitude sin(2 pi y1)) I` - layered media along the first
    /// cell coordinate.
    Layered { base: f64, amplitude: f64 },
    /// `R(angle) diag(base + amplitude sin(2 pi y1), cross) R(angle)^T`.
    RotatedAnisotropic { angle: f64, base: f64, amplitude: f64, cross: f64 },
    Table(CoeffTable),
}

/// Y-periodic coefficient matrix with its declared ellipticity constants.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicCoefficient {
    pub kind: CoeffKind,
    pub alpha: f64,
    pub beta: f64,
}

impl PeriodicCoefficient {
    pub fn identity() -> Self {
        PeriodicCoefficient { kind: CoeffKind::Identity, alpha: 1.0, beta: 1.0 }
    }

    pub fn constant(m: Matrix2) -> Self {
        let alpha = m.min_symmetric_eig();
        let beta = m.max_singular_value();
        PeriodicCoefficient { kind: CoeffKind::Constant(m), alpha, beta }
    }

    /// The layered preset `(2 + sin 2 pi y1) I` when called with (2, 1).
    pub fn layered(base: f64, amplitude: f64) -> Self {
        PeriodicCoefficient {
            kind: CoeffKind::Layered { base, amplitude },
            alpha: base - amplitude.abs(),
            beta: base + amplitude.abs(),
        }
    }

    pub fn rotated_anisotropic(angle: f64, base: f64, amplitude: f64, cross: f64) -> Self {
        PeriodicCoefficient {
            kind: CoeffKind::RotatedAnisotropic { angle, base, amplitude, cross },
            alpha: (base - amplitude.abs()).min(cross),
            beta: (base + amplitude.abs()).max(cross),
        }
    }

    pub fn table(table: CoeffTable) -> Self {
        let mut alpha = f64::INFINITY;
        let mut beta: f64 = 0.0;
        for m in &table.entries {
            alpha = alpha.min(m.min_symmetric_eig());
            beta = beta.max(m.max_singular_value());
        }
        PeriodicCoefficient { kind: CoeffKind::Table(table), alpha, beta }
    }

    /// Evaluates `A(y)` with both coordinates wrapped into `[0,1)`.
    pub fn eval(&self, y: [f64; 2]) -> Matrix2 {
        match &self.kind {
            CoeffKind::Identity => Matrix2::identity(),
            CoeffKind::Constant(m) => *m,
            CoeffKind::Layered { base, amplitude } => {
                let a = base + amplitude * libm::sin(2.0 * PI * wrap_unit(y[0]));
                Matrix2::diag(a, a)
            }
            CoeffKind::RotatedAnisotropic { angle, base, amplitude, cross } => {
                let a = base + amplitude * libm::sin(2.0 * PI * wrap_unit(y[0]));
                let (c, s) = (libm::cos(*angle), libm::sin(*angle));
                // R diag(a, cross) R^T
                Matrix2 {
                    a: [
                        [c * c * a + s * s * cross, c * s * (a - cross)],
                        [c * s * (a - cross), s * s * a + c * c * cross],
                    ],
                }
            }
            CoeffKind::Table(t) => t.eval(y),
        }
    }

    /// Checks assumption-style ellipticity bounds on a validation grid.
    pub fn validate(&self, grid_n: usize) -> Result<()> {
        if self.alpha <= 0.0 || self.beta < self.alpha {
            return Err(Error::Validation(format!(
                "ellipticity constants must satisfy 0 < alpha <= beta, got alpha={}, beta={}",
                self.alpha, self.beta
            )));
        }
        let tol = 1e-10 * (1.0 + self.beta);
        for i in 0..grid_n {
            for j in 0..grid_n {
                let y = [
                    (j as f64 + 0.5) / grid_n as f64,
                    (i as f64 + 0.5) / grid_n as f64,
                ];
                let m = self.eval(y);
                if m.min_symmetric_eig() < self.alpha - tol {
                    return Err(Error::Validation(format!(
                        "coefficient violates the lower ellipticity bound at y=({}, {}): \
                         min eig {} < alpha {}",
                        y[0],
                        y[1],
                        m.min_symmetric_eig(),
                        self.alpha
                    )));
                }
                if m.max_singular_value() > self.beta + tol {
                    return Err(Error::Validation(format!(
                        "coefficient violates the upper bound at y=({}, {}): |A| {} > beta {}",
                        y[0],
                        y[1],
                        m.max_singular_value(),
                        self.beta
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pointwise transpose, for the cell-problem duality check.
    pub fn transposed(&self) -> Self {
        let kind = match &self.kind {
            CoeffKind::Identity => CoeffKind::Identity,
            CoeffKind::Constant(m) => CoeffKind::Constant(m.transpose()),
            CoeffKind::Layered { base, amplitude } => {
                CoeffKind::Layered { base: *base, amplitude: *amplitude }
            }
            CoeffKind::RotatedAnisotropic { angle, base, amplitude, cross } => {
                CoeffKind::RotatedAnisotropic {
                    angle: *angle,
                    base: *base,
                    amplitude: *amplitude,
                    cross: *cross,
                }
            }
            CoeffKind::Table(t) => CoeffKind::Table(CoeffTable {
                n: t.n,
                entries: t.entries.iter().map(Matrix2::transpose).collect(),
            }),
        };
        PeriodicCoefficient { kind, alpha: self.alpha, beta: self.beta }
    }

    /// Scales the matrix (and its constants) by `t > 0`.
    pub fn scaled(&self, t: f64) -> Self {
        let kind = match &self.kind {
            CoeffKind::Identity => CoeffKind::Constant(Matrix2::identity().scale(t)),
            CoeffKind::Constant(m) => CoeffKind::Constant(m.scale(t)),
            CoeffKind::Layered { base, amplitude } => {
                CoeffKind::Layered { base: t * base, amplitude: t * amplitude }
            }
            CoeffKind::RotatedAnisotropic { angle, base, amplitude, cross } => {
                CoeffKind::RotatedAnisotropic {
                    angle: *angle,
                    base: t * base,
                    amplitude: t * amplitude,
                    cross: t * cross,
                }
            }
            CoeffKind::Table(tab) => CoeffKind::Table(CoeffTable {
                n: tab.n,
                entries: tab.entries.iter().map(|m| m.scale(t)).collect(),
            }),
        };
        PeriodicCoefficient { kind, alpha: t * self.alpha, beta: t * self.beta }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConductanceKind {
    Constant(f64),
    /// `mean + amplitude sin(2 pi y)`, positive when `mean > |amplitude|`.
    SinePositive { mean: f64, amplitude: f64 },
    Samples(PeriodicTable1d),
}

/// Y'-periodic interface conductance `h` with its lower bound `h0`.
/// `zero` selects the variant without any interface term.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceConductance {
    pub kind: ConductanceKind,
    pub h0: f64,
    pub zero: bool,
}

impl InterfaceConductance {
    pub fn constant(value: f64) -> Self {
        InterfaceConductance {
            kind: ConductanceKind::Constant(value),
            h0: 0.5 * value,
            zero: false,
        }
    }

    pub fn sine_positive(mean: f64, amplitude: f64) -> Self {
        InterfaceConductance {
            kind: ConductanceKind::SinePositive { mean, amplitude },
            h0: 0.5 * (mean - amplitude.abs()),
            zero: false,
        }
    }

    pub fn from_samples(samples: &[(f64, f64)]) -> Result<Self> {
        let table = PeriodicTable1d::new(samples)?;
        let h0 = 0.5 * table.min_value();
        Ok(InterfaceConductance { kind: ConductanceKind::Samples(table), h0, zero: false })
    }

    /// The `h == 0` variant.
    pub fn none() -> Self {
        InterfaceConductance { kind: ConductanceKind::Constant(0.0), h0: 0.0, zero: true }
    }

    pub fn eval(&self, y: f64) -> f64 {
        if self.zero {
            return 0.0;
        }
        match &self.kind {
            ConductanceKind::Constant(v) => *v,
            ConductanceKind::SinePositive { mean, amplitude } => {
                mean + amplitude * libm::sin(2.0 * PI * wrap_unit(y))
            }
            ConductanceKind::Samples(t) => t.eval(y).0,
        }
    }

    pub fn validate(&self, grid_n: usize) -> Result<()> {
        if self.zero {
            return Ok(());
        }
        if self.h0 <= 0.0 {
            return Err(Error::Validation(format!(
                "conductance lower bound h0 must be positive, got {}",
                self.h0
            )));
        }
        for i in 0..grid_n {
            let y = (i as f64 + 0.5) / grid_n as f64;
            let v = self.eval(y);
            if v < self.h0 {
                return Err(Error::Validation(format!(
                    "conductance below its lower bound at y'={y}: {v} < h0 {}",
                    self.h0
                )));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, t: f64) -> Self {
        let kind = match &self.kind {
            ConductanceKind::Constant(v) => ConductanceKind::Constant(t * v),
            ConductanceKind::SinePositive { mean, amplitude } => {
                ConductanceKind::SinePositive { mean: t * mean, amplitude: t * amplitude }
            }
            ConductanceKind::Samples(table) => ConductanceKind::Samples(PeriodicTable1d {
                ys: table.ys.clone(),
                values: table.values.iter().map(|v| t * v).collect(),
            }),
        };
        InterfaceConductance { kind, h0: t * self.h0, zero: self.zero }
    }

    /// Interior breakpoints of `h` in `(0,1)`.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.kind {
            ConductanceKind::Samples(t) => t.kinks(),
            _ => Vec::new(),
        }
    }
}
