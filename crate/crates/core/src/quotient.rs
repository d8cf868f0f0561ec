//! Rotations modulo the octahedral group.
//!
//! The reference harmonic is fixed by the 24 rotations of the cube, so the
//! orbit of harmonics is parameterized by `SO(3)/O`. In Rodrigues
//! coordinates `r = tan(θ/2)·axis` one representative of each coset lies in
//! the truncated cube `max|rᵢ| ≤ √2 − 1`, `Σ|rᵢ| ≤ 1`.
//!
//! Quaternions are the primary carrier; Rodrigues vectors are only a view
//! and do not exist for half-turns.

use std::f64::consts::FRAC_PI_2;
use std::ops::Mul;
use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rotation::{euler_matrix, generators, EulerAngles, Rotation9};
use crate::sh4::{reference_harmonic, Sh4Coeffs, Vector9};

/// `tan(π/8)`: distance of the octagonal faces from the origin.
pub const OCTAGON_FACE: f64 = std::f64::consts::SQRT_2 - 1.0;

/// Unit quaternion `w + xi + yj + zk`; `q` and `−q` are the same rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl UnitQuaternion {
    /// Normalizes `(w, x, y, z)`.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::DegenerateQuaternion);
        }
        Ok(UnitQuaternion {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    pub fn identity() -> Self {
        UnitQuaternion {
            w: 1.0,
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }

    /// Rotation by `angle` about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let n = axis.normalize();
        let (s, c) = (0.5 * angle).sin_cos();
        UnitQuaternion {
            w: c,
            x: s * n.x,
            y: s * n.y,
            z: s * n.z,
        }
    }

    /// Exponential map of a rotation vector.
    pub fn from_rotation_vector(v: &Vector3<f64>) -> Self {
        let angle = v.norm();
        if angle < 1e-300 {
            return Self::identity();
        }
        Self::from_axis_angle(v, angle)
    }

    /// Uniformly distributed rotation.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let c: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            if let Ok(q) = Self::new(c[0], c[1], c[2], c[3]) {
                return q;
            }
        }
    }

    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn conjugate(&self) -> Self {
        UnitQuaternion {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn inverse(&self) -> Self {
        self.conjugate()
    }

    /// Representative with `w ≥ 0`; for `w = 0` the first nonzero of `(x, y, z)` is positive.
    pub fn canonical(&self) -> Self {
        let flip = if self.w != 0.0 {
            self.w < 0.0
        } else {
            [self.x, self.y, self.z]
                .into_iter()
                .find(|c| *c != 0.0)
                .is_some_and(|c| c < 0.0)
        };
        if flip {
            UnitQuaternion {
                w: -self.w,
                x: -self.x,
                y: -self.y,
                z: -self.z,
            }
        } else {
            *self
        }
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        2.0 * self.vector().norm().atan2(self.w.abs())
    }

    pub fn dot(&self, other: &UnitQuaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Angle between the rotations `self` and `other`.
    pub fn angle_to(&self, other: &UnitQuaternion) -> f64 {
        (self.inverse() * *other).angle()
    }

    pub fn to_rotation_matrix(&self) -> Matrix3<f64> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    /// Rodrigues view; `None` for half-turns.
    pub fn rodrigues(&self) -> Option<RodriguesVector> {
        let q = self.canonical();
        if q.w == 0.0 {
            return None;
        }
        Some(RodriguesVector {
            r: [q.x / q.w, q.y / q.w, q.z / q.w],
        })
    }

    pub fn from_rodrigues(r: &RodriguesVector) -> Self {
        let [x, y, z] = r.r;
        Self::new(1.0, x, y, z).expect("finite Rodrigues vector")
    }

    /// The coefficient-space operator of this rotation.
    pub fn rotation9(&self) -> Rotation9 {
        euler_matrix(&euler_from_quaternion(self))
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;

    /// Hamilton product; `(a * b)` rotates by `b` first, then `a`.
    fn mul(self, b: UnitQuaternion) -> UnitQuaternion {
        let a = self;
        UnitQuaternion {
            w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        }
    }
}

/// `tan(θ/2) · axis`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RodriguesVector {
    pub r: [f64; 3],
}

impl RodriguesVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        RodriguesVector { r: [x, y, z] }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::from(self.r)
    }
}

/// Membership in the truncated-cube fundamental zone.
pub fn in_fundamental_zone(r: &RodriguesVector, tol: f64) -> bool {
    let max = r.r.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let sum: f64 = r.r.iter().map(|c| c.abs()).sum();
    max <= OCTAGON_FACE + tol && sum <= 1.0 + tol
}

/// The 24 proper rotations of the cube, identity first.
#[derive(Clone, Debug, PartialEq)]
pub struct OctahedralGroup {
    elements: Vec<UnitQuaternion>,
}

impl OctahedralGroup {
    pub fn elements(&self) -> &[UnitQuaternion] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, i: usize) -> UnitQuaternion {
        self.elements[i]
    }

    /// Index of `q` (up to sign) in the group.
    pub fn index_of(&self, q: &UnitQuaternion, tol: f64) -> Option<usize> {
        self.elements
            .iter()
            .position(|g| (g.dot(q).abs() - 1.0).abs() <= tol)
    }
}

fn build_group() -> OctahedralGroup {
    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    let mut elements = vec![UnitQuaternion::identity()];
    for a in &axes {
        elements.push(UnitQuaternion::from_axis_angle(a, std::f64::consts::PI));
    }
    for a in &axes {
        elements.push(UnitQuaternion::from_axis_angle(a, FRAC_PI_2));
        elements.push(UnitQuaternion::from_axis_angle(a, -FRAC_PI_2));
    }
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                elements.push(UnitQuaternion {
                    w: 0.5,
                    x: 0.5 * sx,
                    y: 0.5 * sy,
                    z: 0.5 * sz,
                });
            }
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (x, y, z) in [
        (h, h, 0.0),
        (h, -h, 0.0),
        (h, 0.0, h),
        (h, 0.0, -h),
        (0.0, h, h),
        (0.0, h, -h),
    ] {
        elements.push(UnitQuaternion { w: 0.0, x, y, z });
    }
    let elements = elements.into_iter().map(|q| q.canonical()).collect();
    OctahedralGroup { elements }
}

pub fn octahedral_group() -> &'static OctahedralGroup {
    static GROUP: OnceLock<OctahedralGroup> = OnceLock::new();
    GROUP.get_or_init(build_group)
}

const TIE_TOLERANCE: f64 = 1e-12;

/// `q · gᵢ` of smallest rotation angle, with the index `i`.
///
/// Near-ties are broken towards the smaller index.
pub fn reduce_to_fundamental_zone(q: &UnitQuaternion) -> (UnitQuaternion, usize) {
    let group = octahedral_group();
    let cands: Vec<UnitQuaternion> = group.elements.iter().map(|g| *q * *g).collect();
    let best = cands.iter().fold(0.0_f64, |m, c| m.max(c.w.abs()));
    let i = cands
        .iter()
        .position(|c| c.w.abs() >= best - TIE_TOLERANCE)
        .expect("group is non-empty");
    (cands[i].canonical(), i)
}

/// Smallest rotation angle between `q1` and `q2` modulo the group (radians).
pub fn quotient_distance(q1: &UnitQuaternion, q2: &UnitQuaternion) -> f64 {
    let d = q1.inverse() * *q2;
    octahedral_group()
        .elements
        .iter()
        .map(|g| (d * *g).angle())
        .fold(f64::INFINITY, f64::min)
}

/// Quaternion of the rotation `Rx(α) · Ry(−β) · Rz(γ)` realized by
/// [`crate::rotate_coeffs`].
pub fn quaternion_from_euler(e: &EulerAngles) -> UnitQuaternion {
    UnitQuaternion::from_axis_angle(&Vector3::x(), e.alpha)
        * UnitQuaternion::from_axis_angle(&Vector3::y(), -e.beta)
        * UnitQuaternion::from_axis_angle(&Vector3::z(), e.gamma)
}

/// Inverse of [`quaternion_from_euler`] up to sign.
///
/// When `|β|` is within `1e-9` of `π/2` only `α ± γ` is determined; then
/// `α = 0` and `γ` carries the whole rotation about the remaining axis.
pub fn euler_from_quaternion(q: &UnitQuaternion) -> EulerAngles {
    let m = q.to_rotation_matrix();
    let cos_b = m[(0, 0)].hypot(m[(0, 1)]);
    // b is the y-rotation angle; β = −b
    let b = m[(0, 2)].atan2(cos_b);
    if cos_b < 1e-9 {
        let gamma = m[(1, 0)].atan2(m[(1, 1)]);
        return EulerAngles::new(0.0, -b, gamma);
    }
    let alpha = (-m[(1, 2)]).atan2(m[(2, 2)]);
    let gamma = (-m[(0, 1)]).atan2(m[(0, 0)]);
    EulerAngles::new(alpha, -b, gamma)
}

/// Result of [`nearest_symmetric`]: `a ≈ sign · rotation(ã)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NearestSymmetric {
    /// Euclidean distance in ℝ⁹.
    pub distance: f64,
    /// Fundamental-zone representative.
    pub rotation: UnitQuaternion,
    pub sign: f64,
}

impl NearestSymmetric {
    pub fn harmonic(&self) -> Sh4Coeffs {
        self.sign * self.rotation.rotation9().apply(&reference_harmonic())
    }
}

/// Seeded sample of the orbit of the reference harmonic, used as the coarse
/// stage of the nearest-symmetric search.
#[derive(Clone, Debug)]
pub struct OrbitSearch {
    samples: Vec<(UnitQuaternion, Vector9)>,
    gram_inv: Matrix3<f64>,
    tangents: [Vector9; 3],
}

/// Refinement starts taken from the best coarse samples.
const REFINE_STARTS: usize = 6;

impl OrbitSearch {
    pub const DEFAULT_SIZE: usize = 4096;
    pub const DEFAULT_SEED: u64 = 42;

    /// `size` uniform rotations drawn with `seed`, each reduced to the fundamental zone.
    pub fn new(size: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reference = reference_harmonic();
        let samples = (0..size.max(1))
            .map(|_| {
                let (q, _) = reduce_to_fundamental_zone(&UnitQuaternion::random(&mut rng));
                (q, *q.rotation9().apply(&reference).as_vector())
            })
            .collect();

        let gens = generators();
        let tangents: [Vector9; 3] = std::array::from_fn(|k| gens[k] * reference.as_vector());
        let gram = Matrix3::from_fn(|i, j| tangents[i].dot(&tangents[j]));
        let gram_inv = gram
            .try_inverse()
            .expect("orbit tangent vectors are independent");
        OrbitSearch {
            samples,
            gram_inv,
            tangents,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Nearest `±` rotation of the reference harmonic to `a`.
    ///
    /// Coarse stage: best `|⟨a, v⟩|` over the orbit samples. Each of the top
    /// candidates is then refined by `refine_iters` damped Gauss–Newton steps
    /// in a local rotation-vector chart `q ↦ q · exp(ω)`.
    pub fn nearest(&self, a: &Sh4Coeffs, refine_iters: usize) -> NearestSymmetric {
        let av = a.as_vector();
        let mut scored: Vec<(f64, usize)> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, (_, v))| (av.dot(v), i))
            .collect();
        scored.sort_by(|x, y| y.0.abs().total_cmp(&x.0.abs()).then(x.1.cmp(&y.1)));

        let reference = reference_harmonic();
        let mut best: Option<NearestSymmetric> = None;
        for &(dot, i) in scored.iter().take(REFINE_STARTS) {
            let sign = if dot < 0.0 { -1.0 } else { 1.0 };
            let (q, distance) = self.refine(av, self.samples[i].0, sign, refine_iters, &reference);
            if best.is_none_or(|b| distance < b.distance) {
                best = Some(NearestSymmetric {
                    distance,
                    rotation: q,
                    sign,
                });
            }
        }
        let mut best = best.expect("at least one sample");
        best.rotation = reduce_to_fundamental_zone(&best.rotation).0;
        best
    }

    fn refine(
        &self,
        a: &Vector9,
        mut q: UnitQuaternion,
        sign: f64,
        iters: usize,
        reference: &Sh4Coeffs,
    ) -> (UnitQuaternion, f64) {
        let dist = |q: &UnitQuaternion| (a - q.rotation9().apply(reference).as_vector() * sign).norm();
        let mut d = dist(&q);
        for _ in 0..iters {
            let b = q.rotation9().matrix().transpose() * a;
            let rhs = Vector3::from_fn(|k, _| self.tangents[k].dot(&b));
            let mut step = self.gram_inv * rhs * sign;
            if step.norm() < 1e-15 {
                break;
            }
            let mut improved = false;
            for _ in 0..30 {
                let cand = q * UnitQuaternion::from_rotation_vector(&step);
                let dc = dist(&cand);
                if dc < d {
                    q = cand;
                    d = dc;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (q, d)
    }
}

/// [`OrbitSearch::nearest`] with the default 4096-sample, seed-42 search.
pub fn nearest_symmetric(a: &Sh4Coeffs, refine_iters: usize) -> NearestSymmetric {
    static SEARCH: OnceLock<OrbitSearch> = OnceLock::new();
    SEARCH
        .get_or_init(|| OrbitSearch::new(OrbitSearch::DEFAULT_SIZE, OrbitSearch::DEFAULT_SEED))
        .nearest(a, refine_iters)
}
