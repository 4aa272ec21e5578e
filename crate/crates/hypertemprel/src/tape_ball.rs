//! Poincaré-ball operations recorded on the gradient tape.
//!
//! These mirror the `f64` implementations in [`crate::ball`] formula for
//! formula; the route-consistency tests below pin the two paths together.
//! Branching on forward values (for removable singularities and the ball
//! projection) is fine for first-order gradients.

use crate::ball::GeometryConfig;
use crate::tape::{self, Tape, Var};

/// Rescales a produced point back into the clipped ball when its forward
/// norm exceeds `1 - ball_eps`; identity otherwise.
pub fn reproject(t: &mut Tape, v: Vec<Var>, cfg: &GeometryConfig) -> Vec<Var> {
    let n = tape::norm(t, &v);
    if t.value(n) <= cfg.max_norm() {
        return v;
    }
    let max = t.constant(cfg.max_norm());
    let factor = t.div(max, n);
    tape::scale(t, &v, factor)
}

/// Conformal factor `2 / (1 - ||x||^2)`.
pub fn conformal_factor(t: &mut Tape, x: &[Var]) -> Var {
    let ns = tape::norm_sq(t, x);
    let one_minus = t.add_const(ns, -1.0);
    let den = t.neg(one_minus);
    let two = t.constant(2.0);
    t.div(two, den)
}

/// Geodesic distance, same arcosh form as the `f64` path.
pub fn distance(t: &mut Tape, x: &[Var], y: &[Var]) -> Var {
    assert_eq!(x.len(), y.len(), "distance: dimension mismatch");
    let mut diff_sq = t.constant(0.0);
    for (&a, &b) in x.iter().zip(y) {
        let d = t.sub(a, b);
        let sq = t.square(d);
        diff_sq = t.add(diff_sq, sq);
    }
    let nx = tape::norm_sq(t, x);
    let ny = tape::norm_sq(t, y);
    let ax = t.add_const(nx, -1.0);
    let one_minus_x = t.neg(ax);
    let ay = t.add_const(ny, -1.0);
    let one_minus_y = t.neg(ay);
    let den = t.mul(one_minus_x, one_minus_y);
    let ratio = t.div(diff_sq, den);
    let scaled = t.mul_const(ratio, 2.0);
    let arg = t.add_const(scaled, 1.0);
    t.arcosh(arg)
}

/// `2 artanh(||x||)`.
pub fn ball_norm(t: &mut Tape, x: &[Var]) -> Var {
    let n = tape::norm(t, x);
    let a = t.artanh(n);
    t.mul_const(a, 2.0)
}

/// Möbius addition with re-projection.
pub fn mobius_add(t: &mut Tape, x: &[Var], y: &[Var], cfg: &GeometryConfig) -> Vec<Var> {
    assert_eq!(x.len(), y.len(), "mobius_add: dimension mismatch");
    let xx = tape::norm_sq(t, x);
    let yy = tape::norm_sq(t, y);
    let xy = tape::dot(t, x, y);
    let two_xy = t.mul_const(xy, 2.0);
    // den = 1 + 2<x,y> + ||x||^2 ||y||^2
    let xxyy = t.mul(xx, yy);
    let den_partial = t.add(two_xy, xxyy);
    let den = t.add_const(den_partial, 1.0);
    // cx = (1 + 2<x,y> + ||y||^2) / den
    let cx_num_partial = t.add(two_xy, yy);
    let cx_num = t.add_const(cx_num_partial, 1.0);
    let cx = t.div(cx_num, den);
    // cy = (1 - ||x||^2) / den
    let neg_xx = t.neg(xx);
    let cy_num = t.add_const(neg_xx, 1.0);
    let cy = t.div(cy_num, den);
    let out: Vec<Var> = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let a = t.mul(cx, xi);
            let b = t.mul(cy, yi);
            t.add(a, b)
        })
        .collect();
    reproject(t, out, cfg)
}

pub fn neg(t: &mut Tape, x: &[Var]) -> Vec<Var> {
    tape::neg_vec(t, x)
}

/// Möbius matrix-vector product. Near-zero inputs or outputs fall back to
/// the linear map `Mx`, the smooth limit of the closed form.
pub fn mobius_matvec(
    t: &mut Tape,
    m: &[Var],
    rows: usize,
    cols: usize,
    x: &[Var],
    cfg: &GeometryConfig,
) -> Vec<Var> {
    let mx = tape::matvec(t, m, rows, cols, x);
    let nx = tape::norm(t, x);
    let nmx = tape::norm(t, &mx);
    if t.value(nx) < cfg.min_norm_eps || t.value(nmx) < cfg.min_norm_eps {
        return mx;
    }
    let ratio = t.div(nmx, nx);
    let a = t.artanh(nx);
    let arg = t.mul(ratio, a);
    let tanh = t.tanh(arg);
    let coef = t.div(tanh, nmx);
    let out = tape::scale(t, &mx, coef);
    reproject(t, out, cfg)
}

/// Möbius product with a diagonal matrix given by its diagonal entries.
pub fn mobius_diag_matvec(
    t: &mut Tape,
    diag: &[Var],
    x: &[Var],
    cfg: &GeometryConfig,
) -> Vec<Var> {
    assert_eq!(diag.len(), x.len(), "mobius_diag_matvec: dimension mismatch");
    let mx: Vec<Var> = diag.iter().zip(x).map(|(&d, &xi)| t.mul(d, xi)).collect();
    let nx = tape::norm(t, x);
    let nmx = tape::norm(t, &mx);
    if t.value(nx) < cfg.min_norm_eps || t.value(nmx) < cfg.min_norm_eps {
        return mx;
    }
    let ratio = t.div(nmx, nx);
    let a = t.artanh(nx);
    let arg = t.mul(ratio, a);
    let tanh = t.tanh(arg);
    let coef = t.div(tanh, nmx);
    let out = tape::scale(t, &mx, coef);
    reproject(t, out, cfg)
}

/// Exponential map at the origin, `tanh(||z||) z / ||z||`; tiny vectors pass
/// through unchanged (the smooth limit).
pub fn exp0(t: &mut Tape, z: &[Var], cfg: &GeometryConfig) -> Vec<Var> {
    let nz = tape::norm(t, z);
    if t.value(nz) < cfg.min_norm_eps {
        return z.to_vec();
    }
    let th = t.tanh(nz);
    let coef = t.div(th, nz);
    let out = tape::scale(t, z, coef);
    reproject(t, out, cfg)
}

/// Logarithmic map at the origin, `artanh(||y||) y / ||y||`.
pub fn log0(t: &mut Tape, y: &[Var], cfg: &GeometryConfig) -> Vec<Var> {
    let ny = tape::norm(t, y);
    if t.value(ny) < cfg.min_norm_eps {
        return y.to_vec();
    }
    let a = t.artanh(ny);
    let coef = t.div(a, ny);
    tape::scale(t, y, coef)
}
