//! The octahedral harmonic manifold as an intersection of quadrics.
//!
//! A unit coefficient vector `a` is a rotation of the reference harmonic
//! (up to sign) exactly when `aᵀa = 1` and `aᵀ Sₖ a = 0` for the five
//! symmetric matrices returned by [`quadric_matrices`]. The sum of squared
//! quadric residuals, [`deviation`], is invariant under rotation of `a`.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::rotation::Matrix9;
use crate::sh4::{Sh4Coeffs, Vector9};

/// The five quadric matrices `S₁ … S₅`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricSet {
    s: [Matrix9; 5],
}

impl QuadricSet {
    pub fn matrices(&self) -> &[Matrix9; 5] {
        &self.s
    }

    pub fn get(&self, k: usize) -> &Matrix9 {
        &self.s[k]
    }
}

fn build_quadrics() -> QuadricSet {
    let s = f64::sqrt;
    let sym = |entries: &[(usize, usize, f64)], scale: f64| {
        let mut m = Matrix9::zeros();
        for &(i, j, v) in entries {
            m[(i, j)] = scale * v;
            m[(j, i)] = scale * v;
        }
        m
    };

    let diag = [28.0, 7.0, -8.0, -17.0, -20.0, -17.0, -8.0, 7.0, 28.0];
    let s1 = sym(
        &diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect::<Vec<_>>(),
        s(2.0),
    );
    let s2 = sym(
        &[
            (0, 1, 14.0),
            (1, 2, 5.0 * s(7.0)),
            (2, 3, 9.0),
            (4, 5, 2.0 * s(5.0)),
            (5, 6, 9.0),
            (6, 7, 5.0 * s(7.0)),
            (7, 8, 14.0),
        ],
        s(3.0),
    );
    let s3 = sym(
        &[
            (0, 7, 14.0),
            (1, 6, 5.0 * s(7.0)),
            (1, 8, -14.0),
            (2, 5, 9.0),
            (2, 7, -5.0 * s(7.0)),
            (3, 4, 2.0 * s(5.0)),
            (3, 6, -9.0),
        ],
        s(3.0),
    );
    let s4 = sym(
        &[
            (0, 2, 2.0 * s(7.0)),
            (1, 3, 3.0 * s(7.0)),
            (3, 3, 10.0),
            (4, 6, 6.0 * s(5.0)),
            (5, 5, -10.0),
            (5, 7, 3.0 * s(7.0)),
            (6, 8, 2.0 * s(7.0)),
        ],
        s(6.0),
    );
    let s5 = sym(
        &[
            (0, 6, 2.0 * s(7.0)),
            (1, 5, 3.0 * s(7.0)),
            (2, 4, 6.0 * s(5.0)),
            (2, 8, -2.0 * s(7.0)),
            (3, 5, -10.0),
            (3, 7, -3.0 * s(7.0)),
        ],
        s(6.0),
    );
    QuadricSet {
        s: [s1, s2, s3, s4, s5],
    }
}

pub fn quadric_matrices() -> &'static QuadricSet {
    static QUADRICS: OnceLock<QuadricSet> = OnceLock::new();
    QUADRICS.get_or_init(build_quadrics)
}

/// `(aᵀa − 1, aᵀS₁a, …, aᵀS₅a)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualVector {
    pub norm_residual: f64,
    pub quadric_residuals: [f64; 5],
}

impl ResidualVector {
    pub fn as_array(&self) -> [f64; 6] {
        let q = self.quadric_residuals;
        [self.norm_residual, q[0], q[1], q[2], q[3], q[4]]
    }

    pub fn max_abs(&self) -> f64 {
        self.as_array().iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

pub fn residuals(a: &Sh4Coeffs) -> ResidualVector {
    let v = a.as_vector();
    let q = quadric_matrices();
    ResidualVector {
        norm_residual: v.dot(v) - 1.0,
        quadric_residuals: std::array::from_fn(|k| v.dot(&(q.s[k] * v))),
    }
}

/// Rotation-invariant deviation from octahedral symmetry, `Σₖ (aᵀSₖa)²`.
pub fn deviation(a: &Sh4Coeffs) -> f64 {
    residuals(a).quadric_residuals.iter().map(|r| r * r).sum()
}

pub fn is_on_manifold(a: &Sh4Coeffs, tol: f64) -> bool {
    residuals(a).max_abs() <= tol
}

/// Weights and line-search settings for [`symmetrize`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescentConfig {
    /// Weight of the squared normalization residual.
    pub w1: f64,
    /// Weight of the deviation term.
    pub w2: f64,
    pub initial_step: f64,
    pub max_iterations: usize,
    pub penalty_tolerance: f64,
    pub backtracking_factor: f64,
    pub armijo_constant: f64,
}

impl Default for DescentConfig {
    /// `w2 = 1/280` puts the slowest quadric curvature at the manifold
    /// (`2240·w2`) level with the radial one (`8·w1`); with equal weights the
    /// Hessian condition number is about 1100.
    fn default() -> Self {
        DescentConfig {
            w1: 1.0,
            w2: 1.0 / 280.0,
            initial_step: 0.1,
            max_iterations: 500,
            penalty_tolerance: 1e-12,
            backtracking_factor: 0.5,
            armijo_constant: 1e-4,
        }
    }
}

impl DescentConfig {
    pub fn with_weights(w1: f64, w2: f64) -> Self {
        DescentConfig {
            w1,
            w2,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let unit_open = |x: f64| x > 0.0 && x < 1.0;
        if !positive(self.w1) || !positive(self.w2) {
            return Err(Error::InvalidConfig(format!(
                "weights must be positive (w1 = {}, w2 = {})",
                self.w1, self.w2
            )));
        }
        if !positive(self.initial_step) {
            return Err(Error::InvalidConfig("initial_step must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        if !positive(self.penalty_tolerance) {
            return Err(Error::InvalidConfig("penalty_tolerance must be positive".into()));
        }
        if !unit_open(self.backtracking_factor) || !unit_open(self.armijo_constant) {
            return Err(Error::InvalidConfig(
                "backtracking_factor and armijo_constant must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// `w1 (aᵀa − 1)² + w2 Σₖ (aᵀSₖa)²`.
pub fn penalty(a: &Sh4Coeffs, cfg: &DescentConfig) -> f64 {
    let r = residuals(a);
    cfg.w1 * r.norm_residual * r.norm_residual
        + cfg.w2 * r.quadric_residuals.iter().map(|q| q * q).sum::<f64>()
}

pub fn penalty_gradient(a: &Sh4Coeffs, cfg: &DescentConfig) -> Vector9 {
    let v = a.as_vector();
    let q = quadric_matrices();
    let mut g = v * (4.0 * cfg.w1 * (v.dot(v) - 1.0));
    for s in &q.s {
        let sv = s * v;
        g += sv * (4.0 * cfg.w2 * v.dot(&sv));
    }
    g
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescentRecord {
    pub index: usize,
    pub a: Sh4Coeffs,
    pub penalty: f64,
    pub sqrt_penalty: f64,
    /// Accepted step length; zero for the starting record.
    pub step_size: f64,
    /// Gradient norm at `a`.
    pub gradient_norm: f64,
    pub distance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DescentStatus {
    Converged,
    /// `max_iterations` steps taken with the penalty still above tolerance.
    MaxIterations,
    /// Zero gradient at the start with penalty above tolerance (e.g. `a0 = 0`).
    DegenerateStart,
    /// Backtracking could not find a decreasing step.
    LineSearchFailed,
}

impl fmt::Display for DescentStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DescentStatus::Converged => "converged",
            DescentStatus::MaxIterations => "maximum iterations reached",
            DescentStatus::DegenerateStart => "degenerate start (zero gradient)",
            DescentStatus::LineSearchFailed => "line search failed",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescentTrace {
    pub records: Vec<DescentRecord>,
    pub status: DescentStatus,
}

impl DescentTrace {
    pub fn converged(&self) -> bool {
        self.status == DescentStatus::Converged
    }

    pub fn last(&self) -> &DescentRecord {
        self.records.last().expect("trace always holds the start record")
    }

    pub fn final_coeffs(&self) -> Sh4Coeffs {
        self.last().a
    }

    /// Number of accepted descent steps.
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }
}

/// Gradient descent with Armijo backtracking on [`penalty`].
pub fn symmetrize(a0: &Sh4Coeffs, cfg: &DescentConfig) -> Result<DescentTrace> {
    descend(a0, cfg, None)
}

/// Like [`symmetrize`], recording `distance(a)` at every iterate.
pub fn symmetrize_tracked<F>(a0: &Sh4Coeffs, cfg: &DescentConfig, distance: F) -> Result<DescentTrace>
where
    F: Fn(&Sh4Coeffs) -> f64,
{
    descend(a0, cfg, Some(&distance))
}

fn descend(
    a0: &Sh4Coeffs,
    cfg: &DescentConfig,
    distance: Option<&dyn Fn(&Sh4Coeffs) -> f64>,
) -> Result<DescentTrace> {
    cfg.validate()?;
    if !a0.is_finite() {
        return Err(Error::NonFinite("starting coefficients"));
    }

    let record = |index: usize, a: Sh4Coeffs, p: f64, step: f64, g: &Vector9| DescentRecord {
        index,
        a,
        penalty: p,
        sqrt_penalty: p.sqrt(),
        step_size: step,
        gradient_norm: g.norm(),
        distance: distance.map(|d| d(&a)),
    };

    let mut a = *a0;
    let mut p = penalty(&a, cfg);
    let mut g = penalty_gradient(&a, cfg);
    let mut records = vec![record(0, a, p, 0.0, &g)];

    let status = loop {
        if p <= cfg.penalty_tolerance {
            break DescentStatus::Converged;
        }
        let iter = records.len() - 1;
        let g2 = g.norm_squared();
        if g2 == 0.0 {
            break if iter == 0 {
                DescentStatus::DegenerateStart
            } else {
                DescentStatus::LineSearchFailed
            };
        }
        if iter >= cfg.max_iterations {
            break DescentStatus::MaxIterations;
        }

        let mut t = cfg.initial_step;
        let accepted = loop {
            let candidate = Sh4Coeffs::from_vector(a.as_vector() - g * t);
            let pc = penalty(&candidate, cfg);
            if pc < p && pc <= p - cfg.armijo_constant * t * g2 {
                break Some((candidate, pc));
            }
            t *= cfg.backtracking_factor;
            if t < 1e-20 {
                break None;
            }
        };
        let Some((next, pn)) = accepted else {
            break DescentStatus::LineSearchFailed;
        };
        a = next;
        p = pn;
        g = penalty_gradient(&a, cfg);
        records.push(record(iter + 1, a, p, t, &g));
    };

    Ok(DescentTrace { records, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotation::{rotate_coeffs, EulerAngles};
    use crate::sh4::reference_harmonic;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_coeffs(rng: &mut impl Rng, scale: f64) -> Sh4Coeffs {
        Sh4Coeffs::from_array(std::array::from_fn(|_| rng.gen_range(-scale..scale)))
    }

    fn random_euler(rng: &mut impl Rng) -> EulerAngles {
        EulerAngles::new(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI))
    }

    #[test]
    fn printed_entries() {
        let q = quadric_matrices();
        let r2 = 2f64.sqrt();
        let expect = [28.0, 7.0, -8.0, -17.0, -20.0, -17.0, -8.0, 7.0, 28.0];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(q.get(0)[(i, i)], r2 * e);
        }
        assert_eq!(q.get(2)[(0, 7)], 3f64.sqrt() * 14.0);
        assert_eq!(q.get(2)[(1, 8)], -3f64.sqrt() * 14.0);
        assert_eq!(q.get(3)[(4, 6)], 6f64.sqrt() * 6.0 * 5f64.sqrt());
        assert_eq!(q.get(4)[(3, 7)], -6f64.sqrt() * 3.0 * 7f64.sqrt());
    }

    #[test]
    fn symmetric_and_traceless() {
        for s in quadric_matrices().matrices() {
            assert_eq!(*s, s.transpose());
            assert!(s.trace().abs() < 1e-12);
        }
    }

    #[test]
    fn residual_examples() {
        assert!(residuals(&reference_harmonic()).max_abs() < 1e-12);
        let r0 = residuals(&Sh4Coeffs::zeros());
        assert_eq!(r0.norm_residual, -1.0);
        assert_eq!(r0.quadric_residuals, [0.0; 5]);
        let e0 = residuals(&Sh4Coeffs::unit(0));
        assert_eq!(e0.norm_residual, 0.0);
        assert_abs_diff_eq!(e0.quadric_residuals[0], 28.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(e0.quadric_residuals[0], 39.597_979_746_446_66, epsilon = 1e-12);
        for k in 1..5 {
            assert_eq!(e0.quadric_residuals[k], 0.0);
        }
        assert_abs_diff_eq!(deviation(&Sh4Coeffs::unit(0)), 1568.0, epsilon = 1e-9);
    }

    #[test]
    fn deviation_vanishes_on_orbit() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let a = rotate_coeffs(&reference_harmonic(), &random_euler(&mut rng));
            assert!(deviation(&a) < 1e-18);
            assert!(deviation(&-a) < 1e-18);
            assert!(is_on_manifold(&a, 1e-9));
        }
    }

    #[test]
    fn deviation_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_coeffs(&mut rng, 1.0);
            let lambda = rng.gen_range(0.1..3.0);
            let d = deviation(&a);
            assert!((deviation(&(lambda * a)) - lambda.powi(4) * d).abs() <= 1e-12 * lambda.powi(4) * d);
            let r = residuals(&a).quadric_residuals;
            let rl = residuals(&(lambda * a)).quadric_residuals;
            for k in 0..5 {
                assert!((rl[k] - lambda * lambda * r[k]).abs() <= 1e-12 * (lambda * lambda * r[k]).abs().max(1e-300));
            }
        }
    }

    #[test]
    fn deviation_rotation_invariant_but_residuals_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut max_change: f64 = 0.0;
        for _ in 0..200 {
            let a = random_coeffs(&mut rng, 1.0);
            let e = random_euler(&mut rng);
            let b = rotate_coeffs(&a, &e);
            let d = deviation(&a);
            assert!((deviation(&b) - d).abs() <= 1e-9 * (1.0 + d));
            let (ra, rb) = (residuals(&a).quadric_residuals, residuals(&b).quadric_residuals);
            for k in 0..5 {
                max_change = max_change.max((ra[k] - rb[k]).abs());
            }
        }
        assert!(max_change > 1e-3);
    }

    #[test]
    fn manifold_membership() {
        let a = reference_harmonic();
        assert!(is_on_manifold(&a, 1e-10));
        assert!(!is_on_manifold(&(0.99 * a), 1e-10));
        assert_abs_diff_eq!(residuals(&(0.99 * a)).norm_residual, -0.0199, epsilon = 1e-12);
    }

    #[test]
    fn penalty_examples() {
        let cfg = DescentConfig::with_weights(1.0, 1.0);
        let a = reference_harmonic();
        assert!(penalty(&a, &cfg) < 1e-16);
        let cfg2 = DescentConfig::with_weights(2.5, 0.3);
        assert_eq!(penalty(&Sh4Coeffs::zeros(), &cfg2), 2.5);
        assert_abs_diff_eq!(penalty(&(2.0 * a), &cfg), 9.0, epsilon = 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let a = reference_harmonic();
        // the printed S₁ rounds aᵀS₁a at ã to ~4e-15, so use the default weights here
        assert!(penalty_gradient(&a, &DescentConfig::default()).amax() < 1e-14);
        let cfg = DescentConfig::with_weights(1.0, 1.0);
        assert!(penalty_gradient(&a, &cfg).amax() < 1e-12);
        let g = penalty_gradient(&(2.0 * a), &DescentConfig::default());
        assert!((g - a.as_vector() * 24.0).amax() < 1e-12);
        let g = penalty_gradient(&(2.0 * a), &cfg);
        assert!((g - a.as_vector() * 24.0).amax() < 1e-10);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = 1e-5;
        for cfg in [DescentConfig::with_weights(1.0, 1.0), DescentConfig::default()] {
            for _ in 0..100 {
                let a = random_coeffs(&mut rng, 0.577);
                let g = penalty_gradient(&a, &cfg);
                for i in 0..9 {
                    let e = Sh4Coeffs::unit(i);
                    let fd = (penalty(&(a + h * e), &cfg) - penalty(&(a - h * e), &cfg)) / (2.0 * h);
                    assert!((fd - g[i]).abs() < 1e-6, "component {i}: {fd} vs {}", g[i]);
                }
            }
        }
    }

    #[test]
    fn symmetrize_at_reference_is_immediate() {
        let trace = symmetrize(&reference_harmonic(), &DescentConfig::default()).unwrap();
        assert!(trace.converged());
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].index, 0);
    }

    #[test]
    fn symmetrize_perturbed_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..10 {
            let d = random_coeffs(&mut rng, 1.0);
            let a0 = reference_harmonic() + (0.1 / d.norm()) * d;
            let trace = symmetrize(&a0, &DescentConfig::default()).unwrap();
            assert!(trace.converged());
            assert!(trace.iterations() <= 200);
            assert!(trace.last().penalty <= 1e-12);
            let cfg = DescentConfig::default();
            let implied = (cfg.penalty_tolerance / cfg.w1.min(cfg.w2)).sqrt();
            assert!(residuals(&trace.final_coeffs()).max_abs() <= implied);

            let strict = DescentConfig {
                penalty_tolerance: 1e-12 * cfg.w2,
                ..cfg
            };
            let trace = symmetrize(&a0, &strict).unwrap();
            assert!(trace.converged() && trace.iterations() <= 200);
            assert!(residuals(&trace.final_coeffs()).max_abs() <= 1e-6);
        }
    }

    #[test]
    fn symmetrize_monotone_from_random_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10 {
            let d = random_coeffs(&mut rng, 1.0);
            let a0 = (1.0 / d.norm()) * d;
            let trace = symmetrize(&a0, &DescentConfig::default()).unwrap();
            for w in trace.records.windows(2) {
                assert!(w[1].sqrt_penalty < w[0].sqrt_penalty);
                assert!(w[1].step_size > 0.0);
            }
            for r in &trace.records {
                assert!(r.penalty >= 0.0);
                assert!((r.sqrt_penalty - r.penalty.sqrt()).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn symmetrize_degenerate_and_budget() {
        let trace = symmetrize(&Sh4Coeffs::zeros(), &DescentConfig::default()).unwrap();
        assert_eq!(trace.status, DescentStatus::DegenerateStart);
        assert_eq!(trace.records.len(), 1);

        let cfg = DescentConfig {
            max_iterations: 3,
            ..Default::default()
        };
        let trace = symmetrize(&Sh4Coeffs::unit(0), &cfg).unwrap();
        assert_eq!(trace.status, DescentStatus::MaxIterations);
        assert_eq!(trace.records.len(), 4);
    }

    #[test]
    fn config_validation() {
        assert!(DescentConfig::default().validate().is_ok());
        for cfg in [
            DescentConfig::with_weights(0.0, 1.0),
            DescentConfig::with_weights(1.0, -1.0),
            DescentConfig {
                backtracking_factor: 1.0,
                ..Default::default()
            },
            DescentConfig {
                max_iterations: 0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                symmetrize(&reference_harmonic(), &cfg),
                Err(Error::InvalidConfig(_))
            ));
        }
        let mut c = [0.0; 9];
        c[0] = f64::INFINITY;
        assert!(symmetrize(&Sh4Coeffs::from_array(c), &DescentConfig::default()).is_err());
    }
}
