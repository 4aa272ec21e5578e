//! Poincaré-ball primitives: points, tangent vectors, distances, angles,
//! Möbius operations, and the exponential/logarithmic maps.
//!
//! The model is the open unit ball `{x : ||x|| < 1}` with constant curvature
//! -1. All functions here are pure and operate on `f64` coordinates.
//!
//! Numerical policy: arguments of `artanh`, `arcosh` and `arccos` are clamped
//! to their closed domains before evaluation, and every operation that
//! produces a ball point re-projects the result to norm at most
//! `1 - ball_eps`.

use thiserror::Error;

use crate::mat::Mat;

/// Errors raised by ball-geometry constructors and operations.
#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point norm {norm} is not strictly inside the unit ball")]
    NotInBall { norm: f64 },
    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("degenerate angle: zero tangent vector")]
    DegenerateAngle,
    #[error("invalid geometry config: require 0 < min_norm_eps < ball_eps < 1")]
    BadConfig,
}

/// Numerical guards shared by every ball operation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GeometryConfig {
    /// Points are kept at Euclidean norm `<= 1 - ball_eps`.
    pub ball_eps: f64,
    /// Norms below this are treated as zero (removable singularities).
    pub min_norm_eps: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { ball_eps: 1e-5, min_norm_eps: 1e-12 }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.min_norm_eps > 0.0 && self.ball_eps > self.min_norm_eps && self.ball_eps < 1.0 {
            Ok(())
        } else {
            Err(GeometryError::BadConfig)
        }
    }

    /// Largest Euclidean norm a produced point may have.
    pub fn max_norm(&self) -> f64 {
        1.0 - self.ball_eps
    }
}

/// A point strictly inside the open unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<f64>,
}

impl BallPoint {
    /// Validates that the coordinates are finite and of norm `< 1`.
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        check_finite(&coords)?;
        let norm = euclidean_norm(&coords);
        if norm < 1.0 {
            Ok(Self { coords })
        } else {
            Err(GeometryError::NotInBall { norm })
        }
    }

    pub fn origin(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn euclidean_norm(&self) -> f64 {
        euclidean_norm(&self.coords)
    }

    /// Componentwise negation; `-x` is the Möbius additive inverse of `x`.
    pub fn neg(&self) -> BallPoint {
        BallPoint { coords: self.coords.iter().map(|c| -c).collect() }
    }

    fn unchecked(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// An unconstrained vector in the tangent space at a ball point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    coords: Vec<f64>,
}

impl TangentVector {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        check_finite(&coords)?;
        Ok(Self { coords })
    }

    pub fn zero(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn euclidean_norm(&self) -> f64 {
        euclidean_norm(&self.coords)
    }
}

// ---- scalar helpers ----

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn euclidean_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn check_finite(v: &[f64]) -> Result<(), GeometryError> {
    match v.iter().position(|c| !c.is_finite()) {
        Some(index) => Err(GeometryError::NonFinite { index }),
        None => Ok(()),
    }
}

/// Upper bound for |artanh| arguments; keeps the log finite.
const ARTANH_LIMIT: f64 = 1.0 - 1e-15;
/// Upper bound for cosh/sinh arguments inside the exponential map.
const COSH_ARG_LIMIT: f64 = 350.0;

/// artanh with the argument clamped into (-1, 1).
pub(crate) fn artanh(x: f64) -> f64 {
    let x = x.clamp(-ARTANH_LIMIT, ARTANH_LIMIT);
    0.5 * ((1.0 + x) / (1.0 - x)).ln()
}

/// arcosh with the argument clamped to [1, inf).
pub(crate) fn arcosh(x: f64) -> f64 {
    let x = x.max(1.0);
    (x + (x * x - 1.0).sqrt()).ln()
}

// ---- operations ----

/// Conformal factor `lambda_x = 2 / (1 - ||x||^2)`; equals 2 at the origin.
pub fn conformal_factor(x: &BallPoint) -> f64 {
    2.0 / (1.0 - dot(x.coords(), x.coords()))
}

/// Geodesic distance
/// `d(x, y) = arcosh(1 + 2 ||x - y||^2 / ((1 - ||x||^2)(1 - ||y||^2)))`.
pub fn distance(x: &BallPoint, y: &BallPoint) -> f64 {
    assert_eq!(x.dim(), y.dim(), "distance: dimension mismatch");
    let diff_sq: f64 = x
        .coords()
        .iter()
        .zip(y.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let den = (1.0 - dot(x.coords(), x.coords())) * (1.0 - dot(y.coords(), y.coords()));
    arcosh(1.0 + 2.0 * diff_sq / den)
}

/// Distance from the origin, `2 artanh(||x||)`.
///
/// Agrees with `distance(origin, x)` through the identity
/// `arcosh((1 + r^2) / (1 - r^2)) = 2 artanh(r)`.
pub fn ball_norm(x: &BallPoint) -> f64 {
    2.0 * artanh(x.euclidean_norm())
}

/// Angle between two geodesics leaving a common base point, from their
/// initial tangent vectors. Conformality makes this the Euclidean angle,
/// independent of the base point.
pub fn angle_at(
    _base: &BallPoint,
    z1: &TangentVector,
    z2: &TangentVector,
) -> Result<f64, GeometryError> {
    let n1 = z1.euclidean_norm();
    let n2 = z2.euclidean_norm();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(GeometryError::DegenerateAngle);
    }
    let cos = (dot(z1.coords(), z2.coords()) / (n1 * n2)).clamp(-1.0, 1.0);
    Ok(cos.acos())
}

/// Exponential map at `x` applied to tangent vector `z`.
///
/// Vectors shorter than `min_norm_eps` return `x` unchanged (removable
/// singularity at `z = 0`). The result is re-projected into the clipped
/// ball.
pub fn exp_map(x: &BallPoint, z: &TangentVector, cfg: &GeometryConfig) -> BallPoint {
    assert_eq!(x.dim(), z.dim(), "exp_map: dimension mismatch");
    let nz = z.euclidean_norm();
    if nz < cfg.min_norm_eps {
        return x.clone();
    }
    let lambda = conformal_factor(x);
    let a = (lambda * nz).min(COSH_ARG_LIMIT);
    let ch = a.cosh();
    let sh = a.sinh();
    // <x, z/||z||>
    let xd = dot(x.coords(), z.coords()) / nz;
    let q = 1.0 + (lambda - 1.0) * ch + lambda * xd * sh;
    let coef_z = sh / (nz * q);
    let coef_x = lambda * (ch + xd * sh) / q;
    let out: Vec<f64> = x
        .coords()
        .iter()
        .zip(z.coords())
        .map(|(xi, zi)| coef_z * zi + coef_x * xi)
        .collect();
    project_to_ball(&out, cfg).expect("exp_map produced non-finite coordinates")
}

/// Logarithmic map at the origin, `artanh(||y||) * y / ||y||`; inverse of
/// `exp_map` based at the origin.
pub fn log_map_0(y: &BallPoint, cfg: &GeometryConfig) -> TangentVector {
    let ny = y.euclidean_norm();
    if ny < cfg.min_norm_eps {
        return TangentVector::zero(y.dim());
    }
    let coef = artanh(ny) / ny;
    TangentVector { coords: y.coords().iter().map(|c| coef * c).collect() }
}

/// Möbius addition
/// `x ⊕ y = ((1 + 2<x,y> + ||y||^2) x + (1 - ||x||^2) y) / (1 + 2<x,y> + ||x||^2 ||y||^2)`.
pub fn mobius_add(x: &BallPoint, y: &BallPoint, cfg: &GeometryConfig) -> BallPoint {
    assert_eq!(x.dim(), y.dim(), "mobius_add: dimension mismatch");
    let xx = dot(x.coords(), x.coords());
    let yy = dot(y.coords(), y.coords());
    let xy = dot(x.coords(), y.coords());
    let den = 1.0 + 2.0 * xy + xx * yy;
    let cx = (1.0 + 2.0 * xy + yy) / den;
    let cy = (1.0 - xx) / den;
    let out: Vec<f64> = x
        .coords()
        .iter()
        .zip(y.coords())
        .map(|(xi, yi)| cx * xi + cy * yi)
        .collect();
    project_to_ball(&out, cfg).expect("mobius_add produced non-finite coordinates")
}

/// Möbius scalar product `r ⊗ x = tanh(r * artanh(||x||)) * x / ||x||`.
pub fn mobius_scalar(r: f64, x: &BallPoint, cfg: &GeometryConfig) -> BallPoint {
    let nx = x.euclidean_norm();
    if nx < cfg.min_norm_eps {
        return BallPoint::origin(x.dim());
    }
    let coef = (r * artanh(nx)).tanh() / nx;
    let out: Vec<f64> = x.coords().iter().map(|c| coef * c).collect();
    project_to_ball(&out, cfg).expect("mobius_scalar produced non-finite coordinates")
}

/// Möbius matrix-vector product
/// `M ⊗ x = tanh((||Mx|| / ||x||) * artanh(||x||)) * Mx / ||Mx||`.
///
/// The origin maps to the origin, and so does any `x` in the kernel of `M`.
pub fn mobius_matvec(m: &Mat, x: &BallPoint, cfg: &GeometryConfig) -> BallPoint {
    assert_eq!(m.cols(), x.dim(), "mobius_matvec: dimension mismatch");
    let nx = x.euclidean_norm();
    if nx < cfg.min_norm_eps {
        return BallPoint::origin(m.rows());
    }
    let mx = m.matvec(x.coords());
    let nmx = euclidean_norm(&mx);
    if nmx < cfg.min_norm_eps {
        return BallPoint::origin(m.rows());
    }
    let coef = ((nmx / nx) * artanh(nx)).tanh() / nmx;
    let out: Vec<f64> = mx.iter().map(|c| coef * c).collect();
    project_to_ball(&out, cfg).expect("mobius_matvec produced non-finite coordinates")
}

/// Clips an arbitrary finite vector into the ball: vectors of norm
/// `<= 1 - ball_eps` pass through unchanged, longer ones are rescaled onto
/// that radius.
pub fn project_to_ball(v: &[f64], cfg: &GeometryConfig) -> Result<BallPoint, GeometryError> {
    check_finite(v)?;
    let norm = euclidean_norm(v);
    let max = cfg.max_norm();
    if norm <= max {
        Ok(BallPoint::unchecked(v.to_vec()))
    } else {
        let scale = max / norm;
        Ok(BallPoint::unchecked(v.iter().map(|c| scale * c).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> GeometryConfig {
        GeometryConfig::default()
    }

    fn point(coords: &[f64]) -> BallPoint {
        BallPoint::new(coords.to_vec()).unwrap()
    }

    fn tangent(coords: &[f64]) -> TangentVector {
        TangentVector::new(coords.to_vec()).unwrap()
    }

    /// Random point with norm at most `max_norm`, any dimension.
    pub(crate) fn random_point(rng: &mut ChaCha8Rng, dim: usize, max_norm: f64) -> BallPoint {
        let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = euclidean_norm(&dir).max(1e-12);
        let target = rng.gen_range(0.0..max_norm);
        BallPoint::new(dir.iter().map(|c| c / n * target).collect()).unwrap()
    }

    #[test]
    fn conformal_factor_examples() {
        assert_eq!(conformal_factor(&BallPoint::origin(3)), 2.0);
        let x = point(&[0.5, 0.0]);
        assert!((conformal_factor(&x) - 8.0 / 3.0).abs() < 1e-12);
        // Finite at the clipped boundary.
        let near = point(&[1.0 - cfg().ball_eps, 0.0]);
        assert!(conformal_factor(&near).is_finite());
        assert!(conformal_factor(&near) > 1e4);
    }

    #[test]
    fn distance_examples() {
        let o = BallPoint::origin(2);
        assert_eq!(distance(&o, &o), 0.0);
        let x = point(&[0.5, 0.0]);
        assert!((distance(&o, &x) - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn distance_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = random_point(&mut rng, 3, 0.95);
            let y = random_point(&mut rng, 3, 0.95);
            assert_eq!(distance(&x, &y), distance(&y, &x));
        }
    }

    #[test]
    fn ball_norm_examples() {
        assert_eq!(ball_norm(&BallPoint::origin(4)), 0.0);
        let x = point(&[0.5, 0.0]);
        assert!((ball_norm(&x) - 3.0f64.ln()).abs() < 1e-12);
        assert!((ball_norm(&x) - distance(&BallPoint::origin(2), &x)).abs() < 1e-12);
        // Strictly increasing along a ray.
        let mut last = -1.0;
        for k in 1..20 {
            let r = 0.05 * k as f64;
            let v = ball_norm(&point(&[r, 0.0]));
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn exp_map_examples() {
        let c = cfg();
        let o = BallPoint::origin(2);
        // Removable singularity at z = 0.
        let z0 = TangentVector::zero(2);
        assert_eq!(exp_map(&o, &z0, &c), o);

        // exp_0(z) = tanh(||z||) z / ||z||.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let dim = rng.gen_range(1..6);
            let z = tangent(
                &(0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect::<Vec<_>>(),
            );
            if z.euclidean_norm() < 1e-6 {
                continue;
            }
            let got = exp_map(&BallPoint::origin(dim), &z, &c);
            let nz = z.euclidean_norm();
            let coef = nz.tanh() / nz;
            for (g, zi) in got.coords().iter().zip(z.coords()) {
                assert!((g - coef * zi).abs() < 1e-12);
            }
        }

        // exp_0((artanh 1/2, 0)) = (1/2, 0).
        let z = tangent(&[artanh(0.5), 0.0]);
        let got = exp_map(&o, &z, &c);
        assert!((got.coords()[0] - 0.5).abs() < 1e-12);
        assert!(got.coords()[1].abs() < 1e-15);
    }

    /// The printed sinh/cosh form of the exponential map agrees with the
    /// gyrovector form `x ⊕ (tanh(lambda_x ||z|| / 2) z / ||z||)`.
    #[test]
    fn exp_map_agrees_with_mobius_form() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let dim = rng.gen_range(1..5);
            let x = random_point(&mut rng, dim, 0.9);
            let z = tangent(
                &(0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>(),
            );
            let nz = z.euclidean_norm();
            if nz < 1e-6 {
                continue;
            }
            let direct = exp_map(&x, &z, &c);
            let t = (conformal_factor(&x) * nz / 2.0).tanh();
            let step = BallPoint::new(z.coords().iter().map(|zi| t * zi / nz).collect()).unwrap();
            let via_mobius = mobius_add(&x, &step, &c);
            for (a, b) in direct.coords().iter().zip(via_mobius.coords()) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn log_map_examples() {
        let c = cfg();
        assert_eq!(log_map_0(&BallPoint::origin(3), &c), TangentVector::zero(3));
        let y = point(&[0.5, 0.0]);
        let z = log_map_0(&y, &c);
        assert!((z.coords()[0] - artanh(0.5)).abs() < 1e-12);
        assert_eq!(z.coords()[1], 0.0);
    }

    #[test]
    fn exp_log_round_trip() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let dim = rng.gen_range(1..6);
            let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = euclidean_norm(&dir).max(1e-9);
            let target = rng.gen_range(1e-3..3.0);
            let z = tangent(&dir.iter().map(|d| d / n * target).collect::<Vec<_>>());
            let y = exp_map(&BallPoint::origin(dim), &z, &c);
            let back = log_map_0(&y, &c);
            for (a, b) in back.coords().iter().zip(z.coords()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn angle_examples() {
        let base = point(&[0.3, -0.2]);
        let z = tangent(&[1.0, 2.0]);
        assert!(angle_at(&base, &z, &z).unwrap() < 1e-12);
        let z1 = tangent(&[1.0, 0.0]);
        let z2 = tangent(&[0.0, -3.0]);
        assert!((angle_at(&base, &z1, &z2).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let z3 = tangent(&[-2.0, 0.0]);
        assert!((angle_at(&base, &z1, &z3).unwrap() - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(
            angle_at(&base, &TangentVector::zero(2), &z1),
            Err(GeometryError::DegenerateAngle)
        );
    }

    #[test]
    fn angle_is_base_point_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z1 = tangent(&[0.4, -1.2, 0.3]);
        let z2 = tangent(&[-0.7, 0.1, 2.0]);
        let reference = angle_at(&BallPoint::origin(3), &z1, &z2).unwrap();
        for _ in 0..100 {
            let base = random_point(&mut rng, 3, 0.95);
            assert_eq!(angle_at(&base, &z1, &z2).unwrap(), reference);
        }
    }

    #[test]
    fn mobius_add_examples() {
        let c = cfg();
        let x = point(&[0.3, -0.4]);
        let o = BallPoint::origin(2);
        // Right identity.
        let r = mobius_add(&x, &o, &c);
        for (a, b) in r.coords().iter().zip(x.coords()) {
            assert!((a - b).abs() < 1e-15);
        }
        // Inverse.
        let inv = mobius_add(&x, &x.neg(), &c);
        assert!(inv.euclidean_norm() < 1e-15);
        // (0.5, 0) ⊕ (0.5, 0) = (0.8, 0).
        let h = point(&[0.5, 0.0]);
        let s = mobius_add(&h, &h, &c);
        assert!((s.coords()[0] - 0.8).abs() < 1e-12);
        assert!(s.coords()[1].abs() < 1e-15);
    }

    #[test]
    fn mobius_scalar_examples() {
        let c = cfg();
        let x = point(&[0.5, 0.0]);
        let one = mobius_scalar(1.0, &x, &c);
        for (a, b) in one.coords().iter().zip(x.coords()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(mobius_scalar(0.0, &x, &c).coords(), &[0.0, 0.0]);
        let twice = mobius_scalar(2.0, &x, &c);
        assert!((twice.coords()[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn mobius_matvec_examples() {
        let c = cfg();
        let x = point(&[0.5, 0.0]);
        let id = Mat::identity(2);
        let r = mobius_matvec(&id, &x, &c);
        for (a, b) in r.coords().iter().zip(x.coords()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(mobius_matvec(&id, &BallPoint::origin(2), &c), BallPoint::origin(2));
        let double = Mat::from_rows(&[&[2.0, 0.0], &[0.0, 2.0]]);
        let s = mobius_matvec(&double, &x, &c);
        assert!((s.coords()[0] - 0.8).abs() < 1e-12);
        // Kernel maps to the origin.
        let zero = Mat::zeros(2, 2);
        assert_eq!(mobius_matvec(&zero, &x, &c), BallPoint::origin(2));
    }

    #[test]
    fn project_examples() {
        let c = cfg();
        let inside = project_to_ball(&[0.1, 0.1], &c).unwrap();
        assert_eq!(inside.coords(), &[0.1, 0.1]);
        let far = project_to_ball(&[3.0, 4.0], &c).unwrap();
        assert!((far.coords()[0] - 0.6 * c.max_norm()).abs() < 1e-12);
        assert!((far.coords()[1] - 0.8 * c.max_norm()).abs() < 1e-12);
        assert_eq!(project_to_ball(&[0.0, 0.0], &c).unwrap(), BallPoint::origin(2));
        assert!(matches!(
            project_to_ball(&[f64::NAN, 0.0], &c),
            Err(GeometryError::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn gyro_distance_identity() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let x = random_point(&mut rng, 3, 0.95);
            let y = random_point(&mut rng, 3, 0.95);
            let lhs = distance(&x, &y);
            let rhs = ball_norm(&mobius_add(&x.neg(), &y, &c));
            assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn triangle_inequality_and_norm_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let x = random_point(&mut rng, 4, 0.95);
            let y = random_point(&mut rng, 4, 0.95);
            let z = random_point(&mut rng, 4, 0.95);
            assert!(distance(&x, &z) <= distance(&x, &y) + distance(&y, &z) + 1e-9);
            assert!((ball_norm(&x) - ball_norm(&y)).abs() <= distance(&x, &y) + 1e-9);
        }
    }

    #[test]
    fn produced_points_stay_clipped() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let x = random_point(&mut rng, 2, 0.999_99);
            let y = random_point(&mut rng, 2, 0.999_99);
            assert!(mobius_add(&x, &y, &c).euclidean_norm() <= c.max_norm() + 1e-15);
            let z = tangent(&[rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0)]);
            assert!(exp_map(&x, &z, &c).euclidean_norm() <= c.max_norm() + 1e-15);
        }
    }

    #[test]
    fn ball_point_rejects_outside() {
        assert!(matches!(
            BallPoint::new(vec![1.0, 0.0]),
            Err(GeometryError::NotInBall { .. })
        ));
        assert!(BallPoint::new(vec![0.999_999, 0.0]).is_ok());
    }
}
