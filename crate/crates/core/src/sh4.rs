//! Degree-4 real spherical harmonics.
//!
//! Basis ordering is `Y₄,₋₄ … Y₄,₄`: index `i` holds order `m = i - 4`.
//! Negative orders are the `sin(|m|φ)` harmonics, positive orders the
//! `cos(mφ)` ones, and no Condon–Shortley phase is applied. This is the
//! convention in which the coefficient-space rotation operators of
//! [`crate::rotation`] act as active rotations of the sphere function.

use std::f64::consts::PI;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{SVector, Vector3};

use crate::error::{Error, Result};

pub type Vector9 = SVector<f64, 9>;

/// Coefficients of a degree-4 harmonic over `Y₄,₋₄ … Y₄,₄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sh4Coeffs(Vector9);

impl Sh4Coeffs {
    pub fn zeros() -> Self {
        Sh4Coeffs(Vector9::zeros())
    }

    /// Unit coefficient vector `e_i`.
    pub fn unit(i: usize) -> Self {
        let mut v = Vector9::zeros();
        v[i] = 1.0;
        Sh4Coeffs(v)
    }

    pub fn from_array(c: [f64; 9]) -> Self {
        Sh4Coeffs(Vector9::from(c))
    }

    pub fn from_vector(v: Vector9) -> Self {
        Sh4Coeffs(v)
    }

    /// Checked construction from a slice; rejects wrong length and NaN/inf.
    pub fn try_from_slice(c: &[f64]) -> Result<Self> {
        if c.len() != 9 {
            return Err(Error::WrongLength(c.len()));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("coefficients"));
        }
        Ok(Sh4Coeffs(Vector9::from_column_slice(c)))
    }

    pub fn as_vector(&self) -> &Vector9 {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 9] {
        self.0.into()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn dot(&self, other: &Sh4Coeffs) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }
}

impl Index<usize> for Sh4Coeffs {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Sh4Coeffs {
    type Output = Sh4Coeffs;
    fn add(self, rhs: Sh4Coeffs) -> Sh4Coeffs {
        Sh4Coeffs(self.0 + rhs.0)
    }
}

impl Sub for Sh4Coeffs {
    type Output = Sh4Coeffs;
    fn sub(self, rhs: Sh4Coeffs) -> Sh4Coeffs {
        Sh4Coeffs(self.0 - rhs.0)
    }
}

impl Neg for Sh4Coeffs {
    type Output = Sh4Coeffs;
    fn neg(self) -> Sh4Coeffs {
        Sh4Coeffs(-self.0)
    }
}

impl Mul<Sh4Coeffs> for f64 {
    type Output = Sh4Coeffs;
    fn mul(self, rhs: Sh4Coeffs) -> Sh4Coeffs {
        Sh4Coeffs(rhs.0 * self)
    }
}

impl From<Vector9> for Sh4Coeffs {
    fn from(v: Vector9) -> Self {
        Sh4Coeffs(v)
    }
}

/// The reference octahedral harmonic `sqrt(7/12) Y₄,₀ + sqrt(5/12) Y₄,₄`.
pub fn reference_harmonic() -> Sh4Coeffs {
    let mut c = [0.0; 9];
    c[4] = (7.0_f64 / 12.0).sqrt();
    c[8] = (5.0_f64 / 12.0).sqrt();
    Sh4Coeffs::from_array(c)
}

/// A point on the unit sphere, `theta` polar in `[0, π]`, `phi` azimuth in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint {
    theta: f64,
    phi: f64,
}

impl SphericalPoint {
    /// Builds a canonical point from arbitrary finite angles.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut theta = theta.rem_euclid(2.0 * PI);
        let mut phi = phi;
        if theta > PI {
            theta = 2.0 * PI - theta;
            phi += PI;
        }
        let mut phi = phi.rem_euclid(2.0 * PI);
        // rem_euclid can round up to exactly 2π
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        SphericalPoint { theta, phi }
    }

    pub fn from_direction(d: &Vector3<f64>) -> Self {
        let n = d.norm();
        let theta = (d.z / n).clamp(-1.0, 1.0).acos();
        SphericalPoint::new(theta, d.y.atan2(d.x))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn direction(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }
}

/// Basis values at a unit direction `(x, y, z)`.
pub fn eval_basis_direction(d: &Vector3<f64>) -> [f64; 9] {
    let (x, y, z) = (d.x, d.y, d.z);
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let c35 = (35.0 / PI).sqrt();
    let c35h = (35.0 / (2.0 * PI)).sqrt();
    let c5 = (5.0 / PI).sqrt();
    let c5h = (5.0 / (2.0 * PI)).sqrt();
    [
        0.75 * c35 * x * y * (x2 - y2),
        0.75 * c35h * (3.0 * x2 - y2) * y * z,
        0.75 * c5 * x * y * (7.0 * z2 - 1.0),
        0.75 * c5h * y * z * (7.0 * z2 - 3.0),
        3.0 / 16.0 / PI.sqrt() * (35.0 * z2 * z2 - 30.0 * z2 + 3.0),
        0.75 * c5h * x * z * (7.0 * z2 - 3.0),
        0.375 * c5 * (x2 - y2) * (7.0 * z2 - 1.0),
        0.75 * c35h * (x2 - 3.0 * y2) * x * z,
        3.0 / 16.0 * c35 * (x2 * (x2 - 3.0 * y2) - y2 * (3.0 * x2 - y2)),
    ]
}

/// Values of `Y₄,₋₄ … Y₄,₄` at `p`.
pub fn eval_basis(p: &SphericalPoint) -> [f64; 9] {
    eval_basis_direction(&p.direction())
}

pub fn eval_harmonic(a: &Sh4Coeffs, p: &SphericalPoint) -> f64 {
    eval_basis(p).iter().zip(a.iter()).map(|(y, c)| y * c).sum()
}

/// Harmonic values on a uniform `(θ, φ)` grid. Rows are `θ` (poles included),
/// columns are `φ` (the `2π` endpoint excluded).
#[derive(Clone, Debug, PartialEq)]
pub struct SphereSampleGrid {
    n_theta: usize,
    n_phi: usize,
    values: Vec<f64>,
}

impl SphereSampleGrid {
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn theta(&self, j: usize) -> f64 {
        PI * j as f64 / (self.n_theta - 1) as f64
    }

    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_phi as f64
    }

    pub fn value(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.n_phi + k]
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn sample_sphere(a: &Sh4Coeffs, n_theta: usize, n_phi: usize) -> Result<SphereSampleGrid> {
    if n_theta < 2 || n_phi < 4 {
        return Err(Error::ResolutionTooSmall { n_theta, n_phi });
    }
    let mut values = Vec::with_capacity(n_theta * n_phi);
    for j in 0..n_theta {
        let theta = PI * j as f64 / (n_theta - 1) as f64;
        for k in 0..n_phi {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            values.push(eval_harmonic(a, &SphericalPoint::new(theta, phi)));
        }
    }
    Ok(SphereSampleGrid {
        n_theta,
        n_phi,
        values,
    })
}
