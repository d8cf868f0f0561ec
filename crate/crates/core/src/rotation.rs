//! Rotation operators on degree-4 coefficient vectors.
//!
//! `rz_matrix(γ)` and `rx90_matrix()` are the two primitive tables; the `y`
//! and `x` one-parameter families are obtained by conjugation:
//!
//! ```text
//! R_y(β) = R_x(π/2) · R_z(β) · R_x(π/2)ᵀ
//! R_x(α) = R_y(π/2)ᵀ · R_z(α) · R_y(π/2)
//! ```
//!
//! Convention (checked by the rotation-consistency tests): with
//! `Q = rotation3_from_euler(e)`,
//!
//! ```text
//! eval_harmonic(rotate_coeffs(a, e), p) == eval_harmonic(a, Q⁻¹ p)
//! ```
//!
//! i.e. coefficient rotation is the active rotation of the sphere function by
//! `Q = Rx(α) · Ry(−β) · Rz(γ)` in ordinary right-handed 3×3 matrices. Note
//! the sign on `β`: conjugating a z-rotation by `R_x(π/2)` yields a rotation
//! about `−y`.

use std::sync::OnceLock;

use nalgebra::{Matrix3, SMatrix};

use crate::sh4::Sh4Coeffs;

pub type Matrix9 = SMatrix<f64, 9, 9>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles { alpha, beta, gamma }
    }

    pub fn zero() -> Self {
        EulerAngles::new(0.0, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()
    }
}

/// An orthogonal 9×9 operator on [`Sh4Coeffs`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation9 {
    m: Matrix9,
}

impl Rotation9 {
    pub fn identity() -> Self {
        Rotation9 {
            m: Matrix9::identity(),
        }
    }

    /// Wraps a matrix without checking orthogonality.
    pub fn from_matrix_unchecked(m: Matrix9) -> Self {
        Rotation9 { m }
    }

    pub fn matrix(&self) -> &Matrix9 {
        &self.m
    }

    pub fn transpose(&self) -> Self {
        Rotation9 {
            m: self.m.transpose(),
        }
    }

    pub fn compose(&self, rhs: &Rotation9) -> Self {
        Rotation9 { m: self.m * rhs.m }
    }

    pub fn apply(&self, a: &Sh4Coeffs) -> Sh4Coeffs {
        Sh4Coeffs::from_vector(self.m * a.as_vector())
    }

    /// `max |M Mᵀ − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        (self.m * self.m.transpose() - Matrix9::identity()).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }

    /// `max |A − B|` entrywise.
    pub fn max_abs_diff(&self, other: &Rotation9) -> f64 {
        (self.m - other.m).amax()
    }
}

impl std::ops::Mul for Rotation9 {
    type Output = Rotation9;
    fn mul(self, rhs: Rotation9) -> Rotation9 {
        self.compose(&rhs)
    }
}

/// Rotation about z: rows `4 − k` and `4 + k` mix by angle `kγ`.
pub fn rz_matrix(gamma: f64) -> Rotation9 {
    let mut m = Matrix9::zeros();
    m[(4, 4)] = 1.0;
    for k in 1..=4usize {
        let (s, c) = (k as f64 * gamma).sin_cos();
        let (lo, hi) = (4 - k, 4 + k);
        m[(lo, lo)] = c;
        m[(lo, hi)] = s;
        m[(hi, lo)] = -s;
        m[(hi, hi)] = c;
    }
    Rotation9 { m }
}

fn build_rx90() -> Rotation9 {
    let s = f64::sqrt;
    #[rustfmt::skip]
    let rows: [[f64; 9]; 9] = [
        [0.0,           0.0,  0.0,           0.0,       0.0,       2.0 * s(14.0), 0.0,       -2.0 * s(2.0),  0.0],
        [0.0,          -6.0,  0.0,           2.0 * s(7.0), 0.0,    0.0,           0.0,        0.0,           0.0],
        [0.0,           0.0,  0.0,           0.0,       0.0,       2.0 * s(2.0),  0.0,        2.0 * s(14.0), 0.0],
        [0.0,           2.0 * s(7.0), 0.0,   6.0,       0.0,       0.0,           0.0,        0.0,           0.0],
        [0.0,           0.0,  0.0,           0.0,       3.0,       0.0,           2.0 * s(5.0), 0.0,         s(35.0)],
        [-2.0 * s(14.0), 0.0, -2.0 * s(2.0), 0.0,       0.0,       0.0,           0.0,        0.0,           0.0],
        [0.0,           0.0,  0.0,           0.0,       2.0 * s(5.0), 0.0,        4.0,        0.0,          -2.0 * s(7.0)],
        [2.0 * s(2.0),  0.0, -2.0 * s(14.0), 0.0,       0.0,       0.0,           0.0,        0.0,           0.0],
        [0.0,           0.0,  0.0,           0.0,       s(35.0),   0.0,          -2.0 * s(7.0), 0.0,         1.0],
    ];
    let mut m = Matrix9::zeros();
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = v / 8.0;
        }
    }
    Rotation9 { m }
}

/// The constant rotation by `π/2` about x.
pub fn rx90_matrix() -> Rotation9 {
    static RX90: OnceLock<Rotation9> = OnceLock::new();
    *RX90.get_or_init(build_rx90)
}

fn ry90_matrix() -> Rotation9 {
    static RY90: OnceLock<Rotation9> = OnceLock::new();
    *RY90.get_or_init(|| ry_matrix(std::f64::consts::FRAC_PI_2))
}

pub fn ry_matrix(beta: f64) -> Rotation9 {
    let rx90 = rx90_matrix();
    rx90 * rz_matrix(beta) * rx90.transpose()
}

pub fn rx_matrix(alpha: f64) -> Rotation9 {
    let ry90 = ry90_matrix();
    ry90.transpose() * rz_matrix(alpha) * ry90
}

/// The composite `R_x(α) · R_y(β) · R_z(γ)`.
pub fn euler_matrix(e: &EulerAngles) -> Rotation9 {
    rx_matrix(e.alpha) * ry_matrix(e.beta) * rz_matrix(e.gamma)
}

pub fn rotate_coeffs(a: &Sh4Coeffs, e: &EulerAngles) -> Sh4Coeffs {
    euler_matrix(e).apply(a)
}

/// The 3×3 rotation acting on the sphere that matches [`rotate_coeffs`].
pub fn rotation3_from_euler(e: &EulerAngles) -> Matrix3<f64> {
    rot3_x(e.alpha) * rot3_y(-e.beta) * rot3_z(e.gamma)
}

fn rot3_x(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot3_y(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn rot3_z(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Infinitesimal generators of active rotations about +x, +y, +z.
///
/// `d/dt D(rotation by t about axis k)` at `t = 0`; each is antisymmetric.
pub fn generators() -> &'static [Matrix9; 3] {
    static GENS: OnceLock<[Matrix9; 3]> = OnceLock::new();
    GENS.get_or_init(|| {
        let mut lz = Matrix9::zeros();
        for k in 1..=4usize {
            lz[(4 - k, 4 + k)] = k as f64;
            lz[(4 + k, 4 - k)] = -(k as f64);
        }
        let ry90 = ry90_matrix().m;
        let rx90 = rx90_matrix().m;
        let lx = ry90.transpose() * lz * ry90;
        // R_y(β) turns about −y
        let ly = -(rx90 * lz * rx90.transpose());
        [lx, ly, lz]
    })
}
