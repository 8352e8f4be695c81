//! Closed-form source functions: univariate profiles, their tensor products,
//! and the reflection extension across the coordinate hyperplanes.
//!
//! Everything the harness feeds to quadrature or samples on a grid is built
//! from these. Profiles carry their own derivatives up to fourth order, the
//! knots where they are only piecewise smooth, and (when applicable) an exact
//! support bound used by the corner-localized constructions.

use crate::error::{Error, Result};

/// Extension coefficients for the tensorized reflection operators.
///
/// `lam1` is always 1. The extend role solves
/// `lam_m1 + lam_m2 * 2^k = (-1)^k` for k in {2, 3}; the restrict role
/// solves `lam_m1 + lam_m2 * 2^k = (-1)^(k+1)` for k in {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionCoefficients {
    pub lam1: f64,
    pub lam_m1: f64,
    pub lam_m2: f64,
}

impl ExtensionCoefficients {
    pub fn extend() -> Self {
        let c = ExtensionCoefficients {
            lam1: 1.0,
            lam_m1: 3.0,
            lam_m2: -0.5,
        };
        debug_assert!((c.lam_m1 + c.lam_m2 * 4.0 - 1.0).abs() < 1e-15);
        debug_assert!((c.lam_m1 + c.lam_m2 * 8.0 + 1.0).abs() < 1e-15);
        c
    }

    pub fn restrict() -> Self {
        let c = ExtensionCoefficients {
            lam1: 1.0,
            lam_m1: -3.0,
            lam_m2: 2.0,
        };
        debug_assert!((c.lam_m1 + c.lam_m2 + 1.0).abs() < 1e-15);
        debug_assert!((c.lam_m1 + c.lam_m2 * 2.0 - 1.0).abs() < 1e-15);
        c
    }
}

/// A univariate profile with closed-form derivatives through order 4.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// sin^2(pi t): clamped at 0 and 1, naturally defined on all of R.
    Sin2Pi,
    /// t^2 (1-t)^2: clamped polynomial, naturally defined on all of R.
    ClampedQuartic,
    /// t^2 (2/3 - t)^4 on [0, 2/3], zero elsewhere. Vanishes with three
    /// derivatives at 2/3, so the zero continuation is C^3 there.
    CornerBump,
    /// t^k.
    Monomial(u32),
    Zero,
}

pub const CORNER_BUMP_UPPER: f64 = 2.0 / 3.0;

impl Profile {
    /// `order`-th derivative at `t` (order 0 is the value).
    pub fn d(&self, order: usize, t: f64) -> f64 {
        assert!(order <= 4, "profiles carry derivatives up to order 4");
        match self {
            Profile::Sin2Pi => {
                use std::f64::consts::PI;
                match order {
                    0 => (PI * t).sin().powi(2),
                    1 => PI * (2.0 * PI * t).sin(),
                    2 => 2.0 * PI * PI * (2.0 * PI * t).cos(),
                    3 => -4.0 * PI.powi(3) * (2.0 * PI * t).sin(),
                    _ => -8.0 * PI.powi(4) * (2.0 * PI * t).cos(),
                }
            }
            Profile::ClampedQuartic => match order {
                0 => t * t * (1.0 - t) * (1.0 - t),
                1 => 2.0 * t - 6.0 * t * t + 4.0 * t * t * t,
                2 => 2.0 - 12.0 * t + 12.0 * t * t,
                3 => -12.0 + 24.0 * t,
                _ => 24.0,
            },
            Profile::CornerBump => {
                if !(0.0..=CORNER_BUMP_UPPER).contains(&t) {
                    return 0.0;
                }
                // p(t) = c^4 t^2 - 4 c^3 t^3 + 6 c^2 t^4 - 4 c t^5 + t^6
                let c = CORNER_BUMP_UPPER;
                let coef = [c.powi(4), -4.0 * c.powi(3), 6.0 * c * c, -4.0 * c, 1.0];
                let pow = [2i32, 3, 4, 5, 6];
                let mut acc = 0.0;
                for (a, &p) in coef.iter().zip(&pow) {
                    let mut fac = 1.0;
                    for q in 0..order as i32 {
                        fac *= (p - q) as f64;
                    }
                    if p as usize >= order {
                        acc += a * fac * t.powi(p - order as i32);
                    }
                }
                acc
            }
            Profile::Monomial(k) => {
                let k = *k as i32;
                if (order as i32) > k {
                    return 0.0;
                }
                let mut fac = 1.0;
                for q in 0..order as i32 {
                    fac *= (k - q) as f64;
                }
                fac * t.powi(k - order as i32)
            }
            Profile::Zero => 0.0,
        }
    }

    /// `Some(c)` when the profile vanishes identically for `t >= c`.
    pub fn support_upper(&self) -> Option<f64> {
        match self {
            Profile::CornerBump => Some(CORNER_BUMP_UPPER),
            Profile::Zero => Some(0.0),
            _ => None,
        }
    }

    /// Knots where the profile is only piecewise smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile::CornerBump => vec![0.0, CORNER_BUMP_UPPER],
            _ => Vec::new(),
        }
    }
}

/// One axis of a tensor-product function: either the profile itself, or its
/// reflection extension across `t = 0` with the extend-role coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum AxisFn {
    Plain(Profile),
    Extended(Profile),
}

impl AxisFn {
    pub fn d(&self, order: usize, t: f64) -> f64 {
        match self {
            AxisFn::Plain(p) => p.d(order, t),
            AxisFn::Extended(p) => {
                if t >= 0.0 {
                    p.d(order, t)
                } else {
                    let c = ExtensionCoefficients::extend();
                    let s1 = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
                    let s2 = s1 * 2f64.powi(order as i32);
                    c.lam_m1 * s1 * p.d(order, -t) + c.lam_m2 * s2 * p.d(order, -2.0 * t)
                }
            }
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            AxisFn::Plain(p) => p.breakpoints(),
            AxisFn::Extended(p) => {
                let mut out = vec![0.0];
                for b in p.breakpoints() {
                    out.push(b);
                    out.push(-b);
                    out.push(-b / 2.0);
                }
                out.sort_by(|a, b| a.partial_cmp(b).unwrap());
                out.dedup();
                out
            }
        }
    }
}

/// Tensor product of univariate axis functions; the carrier for manufactured
/// solutions, their derived sources, and the reflection extension.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFn {
    axes: Vec<AxisFn>,
}

impl TensorFn {
    pub fn product(profiles: Vec<Profile>) -> Self {
        TensorFn {
            axes: profiles.into_iter().map(AxisFn::Plain).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[AxisFn] {
        &self.axes
    }

    /// Partial derivative with per-axis orders (all zero = plain value).
    pub fn partial(&self, orders: &[usize], x: &[f64]) -> f64 {
        debug_assert_eq!(orders.len(), self.axes.len());
        debug_assert_eq!(x.len(), self.axes.len());
        let mut acc = 1.0;
        for (a, axis) in self.axes.iter().enumerate() {
            acc *= axis.d(orders[a], x[a]);
            if acc == 0.0 {
                return 0.0;
            }
        }
        acc
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let orders = vec![0usize; self.axes.len()];
        self.partial(&orders, x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut orders = vec![0usize; n];
        (0..n)
            .map(|i| {
                orders[i] = 1;
                let v = self.partial(&orders, x);
                orders[i] = 0;
                v
            })
            .collect()
    }

    /// Second partial along one axis.
    pub fn d2_axis(&self, axis: usize, x: &[f64]) -> f64 {
        let mut orders = vec![0usize; self.dim()];
        orders[axis] = 2;
        self.partial(&orders, x)
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        (0..self.dim()).map(|i| self.d2_axis(i, x)).sum()
    }

    pub fn bilaplacian(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut orders = vec![0usize; n];
        let mut acc = 0.0;
        for i in 0..n {
            orders[i] = 4;
            acc += self.partial(&orders, x);
            orders[i] = 0;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                orders[i] = 2;
                orders[j] = 2;
                acc += 2.0 * self.partial(&orders, x);
                orders[i] = 0;
                orders[j] = 0;
            }
        }
        acc
    }

    pub fn breakpoints(&self, axis: usize) -> Vec<f64> {
        self.axes[axis].breakpoints()
    }

    /// True when every axis profile vanishes for arguments >= 2/3.
    pub fn corner_supported(&self) -> bool {
        self.axes.iter().all(|a| match a {
            AxisFn::Plain(p) | AxisFn::Extended(p) => p
                .support_upper()
                .is_some_and(|c| c <= CORNER_BUMP_UPPER + 1e-12),
        })
    }
}

/// The reflection extension across every hyperplane `x_i = 0`.
///
/// For tensor-product bases the reflection sum factorizes per axis, so the
/// result is again a tensor function. Profiles with a global formula are
/// continued naturally on the positive side; the extension only ever reads
/// base values at non-negative arguments.
pub fn extend_even(u: &TensorFn) -> Result<TensorFn> {
    let axes = u
        .axes
        .iter()
        .map(|a| match a {
            AxisFn::Plain(p) => Ok(AxisFn::Extended(p.clone())),
            AxisFn::Extended(_) => Err(Error::InvalidArgument(
                "source is already a reflection extension".into(),
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TensorFn { axes })
}

/// Evaluation views used by quadrature: a value plus the knots along each
/// axis where the integrand is only piecewise smooth.
pub trait Evaluable: Sync {
    fn at(&self, x: &[f64]) -> f64;
    fn breakpoints(&self, _axis: usize) -> Vec<f64> {
        Vec::new()
    }
}

impl Evaluable for TensorFn {
    fn at(&self, x: &[f64]) -> f64 {
        self.value(x)
    }
    fn breakpoints(&self, axis: usize) -> Vec<f64> {
        TensorFn::breakpoints(self, axis)
    }
}

/// Laplacian of a tensor function as an evaluable view.
pub struct LaplacianView<'a>(pub &'a TensorFn);

impl Evaluable for LaplacianView<'_> {
    fn at(&self, x: &[f64]) -> f64 {
        self.0.laplacian(x)
    }
    fn breakpoints(&self, axis: usize) -> Vec<f64> {
        self.0.breakpoints(axis)
    }
}

/// Bilaplacian view; the exact source for a manufactured solution.
pub struct BilaplacianView<'a>(pub &'a TensorFn);

impl Evaluable for BilaplacianView<'_> {
    fn at(&self, x: &[f64]) -> f64 {
        self.0.bilaplacian(x)
    }
    fn breakpoints(&self, axis: usize) -> Vec<f64> {
        self.0.breakpoints(axis)
    }
}

/// Second partial along a fixed axis as an evaluable view.
pub struct SecondPartialView<'a> {
    pub f: &'a TensorFn,
    pub axis: usize,
}

impl Evaluable for SecondPartialView<'_> {
    fn at(&self, x: &[f64]) -> f64 {
        self.f.d2_axis(self.axis, x)
    }
    fn breakpoints(&self, axis: usize) -> Vec<f64> {
        self.f.breakpoints(axis)
    }
}

/// Plain closure wrapper (no breakpoints).
pub struct FnSource<F: Fn(&[f64]) -> f64 + Sync>(pub F);

impl<F: Fn(&[f64]) -> f64 + Sync> Evaluable for FnSource<F> {
    fn at(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}
