//! Univariate B-splines and the per-axis smoothing operators applied to
//! closed-form sources.
//!
//! Smoothing convolves a source with the hat spline at scale `h` along one
//! or more axes. The convolution is evaluated by composite Gauss-Legendre
//! quadrature with panels split at the spline knots and at any knots of the
//! integrand itself, so piecewise-polynomial inputs are integrated exactly
//! (4 nodes per panel, exact through degree 7).

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::sources::Evaluable;

const GL4_X: [f64; 4] = [
    -0.8611363115940526,
    -0.33998104358485626,
    0.33998104358485626,
    0.8611363115940526,
];
const GL4_W: [f64; 4] = [
    0.34785484513745385,
    0.6521451548625461,
    0.6521451548625461,
    0.34785484513745385,
];

/// Centered B-spline of degree `j - 1`: the indicator of `[-1/2, 1/2]`
/// convolved with itself `j - 1` times. Supported on `[-j/2, j/2]`,
/// unit integral. Degrees 1 through 4 are provided in closed form.
pub fn bspline_eval(j: usize, t: f64) -> Result<f64> {
    let a = t.abs();
    match j {
        1 => Ok(if a <= 0.5 { 1.0 } else { 0.0 }),
        2 => Ok((1.0 - a).max(0.0)),
        3 => Ok(if a <= 0.5 {
            0.75 - t * t
        } else if a <= 1.5 {
            0.5 * (1.5 - a) * (1.5 - a)
        } else {
            0.0
        }),
        4 => Ok(if a <= 1.0 {
            (3.0 * a.powi(3) - 6.0 * t * t + 4.0) / 6.0
        } else if a <= 2.0 {
            (2.0 - a).powi(3) / 6.0
        } else {
            0.0
        }),
        _ => Err(Error::InvalidArgument(format!(
            "B-spline degree index j = {j} outside 1..=4"
        ))),
    }
}

/// Interior knots of the degree-(j-1) spline on its support.
fn bspline_knots(j: usize) -> Vec<f64> {
    match j {
        1 => vec![],
        2 => vec![0.0],
        3 => vec![-0.5, 0.5],
        4 => vec![-1.0, 0.0, 1.0],
        _ => vec![],
    }
}

/// Composite 4-point Gauss-Legendre over `[a, b]` with extra panel splits.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, splits: &[f64]) -> f64 {
    let mut pts: Vec<f64> = splits.iter().copied().filter(|&s| s > a && s < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo < 1e-300 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for (x, wgt) in GL4_X.iter().zip(&GL4_W) {
            acc += wgt * half * f(mid + half * x);
        }
    }
    acc
}

fn smooth_rec(f: &dyn Evaluable, x: &mut Vec<f64>, h: f64, j: usize, axes: &[usize]) -> f64 {
    if axes.is_empty() {
        return f.at(x);
    }
    let axis = axes[0];
    let rest = &axes[1..];
    let half = j as f64 / 2.0;
    let mut splits = bspline_knots(j);
    let x_axis = x[axis];
    for b in f.breakpoints(axis) {
        let t = (b - x_axis) / h;
        if t > -half && t < half {
            splits.push(t);
        }
    }
    let val = integrate(
        &mut |t: f64| {
            let theta = bspline_eval(j, t).expect("validated degree");
            if theta == 0.0 {
                return 0.0;
            }
            x[axis] = x_axis + t * h;
            let inner = smooth_rec(f, x, h, j, rest);
            theta * inner
        },
        -half,
        half,
        &splits,
    );
    x[axis] = x_axis;
    val
}

/// Value of the tensor smoothing operator at one point, convolving with the
/// degree-(j-1) spline at scale `h` along each axis in `axes`.
pub fn smooth_at_with(
    f: &dyn Evaluable,
    x: &[f64],
    h: f64,
    j: usize,
    axes: &[usize],
) -> Result<f64> {
    bspline_eval(j, 0.0)?;
    let mut buf = x.to_vec();
    let v = smooth_rec(f, &mut buf, h, j, axes);
    if !v.is_finite() {
        return Err(Error::QuadratureFailure { x: x.to_vec() });
    }
    Ok(v)
}

/// Hat-spline (j = 2) tensor smoothing, the operator the schemes use.
pub fn smooth_at(f: &dyn Evaluable, x: &[f64], h: f64, axes: &[usize]) -> Result<f64> {
    smooth_at_with(f, x, h, 2, axes)
}

/// Smooth a source over every axis except `skip_axis`, sampled on the
/// interior lattice (values in interior flat order).
pub fn smooth_source(
    f: &dyn Evaluable,
    grid: &GridSpec,
    skip_axis: Option<usize>,
) -> Result<Vec<f64>> {
    let n = grid.dim();
    let axes: Vec<usize> = (0..n).filter(|&a| Some(a) != skip_axis).collect();
    let h = grid.h();
    let mut out = Vec::with_capacity(grid.interior_slots().len());
    for &slot in grid.interior_slots() {
        out.push(smooth_at(f, &grid.point(slot), h, &axes)?);
    }
    Ok(out)
}

/// Maximum absolute defect of the commutation identity between the second
/// central difference and the hat-smoothed exact second derivative,
/// `D_i D_{-i} f = T^{h,2}_i (d^2 f / dx_i^2)`, over interior nodes.
pub fn commutation_residual(
    f: &dyn Evaluable,
    d2f: &dyn Evaluable,
    grid: &GridSpec,
    axis: usize,
) -> Result<f64> {
    let h = grid.h();
    let mut worst: f64 = 0.0;
    for &slot in grid.interior_slots() {
        let x = grid.point(slot);
        let smoothed = smooth_at(d2f, &x, h, &[axis])?;
        let mut up = x.clone();
        up[axis] += h;
        let mut dn = x.clone();
        dn[axis] -= h;
        let second = (f.at(&up) - 2.0 * f.at(&x) + f.at(&dn)) / (h * h);
        worst = worst.max((smoothed - second).abs());
    }
    Ok(worst)
}
