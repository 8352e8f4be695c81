//! Difference quotients, the discrete Hessian/Laplacian/bilaplacian, and the
//! ghost-filling policies realizing the two discrete boundary conditions.
//!
//! All operators are applied matrix-free. Ghost filling is a separate pass
//! that returns a completed field, so norms and identity probes can reuse
//! completed fields and the boundary policy stays auditable.

use crate::error::{Error, Result};
use crate::field::LatticeField;
use crate::grid::{GridSpec, MirrorRule, PointClass, INVALID};
use std::sync::Arc;

/// Discrete boundary-condition variant.
///
/// `CenteredMirror` realizes zero boundary values together with a vanishing
/// centered normal difference (ghosts mirror the first interior layer).
/// `OneSidedZero` pins every point outside the open cube to zero, which is
/// the restated form of the one-sided condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcScheme {
    CenteredMirror,
    OneSidedZero,
}

impl BcScheme {
    pub fn name(self) -> &'static str {
        match self {
            BcScheme::CenteredMirror => "centered",
            BcScheme::OneSidedZero => "one-sided",
        }
    }
}

impl std::str::FromStr for BcScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centered" | "centered-mirror" | "mirror" => Ok(BcScheme::CenteredMirror),
            "one-sided" | "onesided" | "one-sided-zero" => Ok(BcScheme::OneSidedZero),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme `{other}` (expected `centered` or `one-sided`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffKind {
    Forward,
    Backward,
    Centered,
}

fn read(field: &LatticeField, idx: &[i64], axis: usize) -> Result<f64> {
    field.at_index(idx).ok_or_else(|| Error::OutOfDomain {
        index: idx.to_vec(),
        axis,
    })
}

/// One-dimensional difference quotient at a multi-index.
pub fn diff(field: &LatticeField, axis: usize, kind: DiffKind, idx: &[i64]) -> Result<f64> {
    let h = field.grid().h();
    let mut up = idx.to_vec();
    let mut dn = idx.to_vec();
    match kind {
        DiffKind::Forward => {
            up[axis] += 1;
            Ok((read(field, &up, axis)? - read(field, idx, axis)?) / h)
        }
        DiffKind::Backward => {
            dn[axis] -= 1;
            Ok((read(field, idx, axis)? - read(field, &dn, axis)?) / h)
        }
        DiffKind::Centered => {
            up[axis] += 1;
            dn[axis] -= 1;
            Ok((read(field, &up, axis)? - read(field, &dn, axis)?) / (2.0 * h))
        }
    }
}

/// Mixed second difference `D_i D_{-j}` at a slot; `None` when the stencil
/// leaves the extended lattice.
#[inline]
pub fn hessian_entry(field: &LatticeField, slot: u32, i: usize, j: usize) -> Option<f64> {
    let g = field.grid();
    let h = g.h();
    if i == j {
        let up = g.neighbor(slot, i, 1);
        let dn = g.neighbor(slot, i, 0);
        if up == INVALID || dn == INVALID {
            return None;
        }
        Some((field.get(up) - 2.0 * field.get(slot) + field.get(dn)) / (h * h))
    } else {
        let up = g.neighbor(slot, i, 1);
        let dn = g.neighbor(slot, j, 0);
        if up == INVALID || dn == INVALID {
            return None;
        }
        let updn = g.neighbor(up, j, 0);
        if updn == INVALID {
            return None;
        }
        Some((field.get(up) - field.get(updn) - field.get(slot) + field.get(dn)) / (h * h))
    }
}

/// The n-by-n tuple of mixed second differences, row-major.
pub fn discrete_hessian(field: &LatticeField, idx: &[i64]) -> Result<Vec<f64>> {
    let g = field.grid();
    let n = g.dim();
    let slot = g.slot(idx).ok_or_else(|| Error::OutOfDomain {
        index: idx.to_vec(),
        axis: 0,
    })?;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] =
                hessian_entry(field, slot, i, j).ok_or_else(|| Error::OutOfDomain {
                    index: idx.to_vec(),
                    axis: j,
                })?;
        }
    }
    Ok(out)
}

#[inline]
pub fn laplacian_at_slot(field: &LatticeField, slot: u32) -> Option<f64> {
    let g = field.grid();
    let h2 = g.h() * g.h();
    let n = g.dim();
    let mut acc = 0.0;
    let center = field.get(slot);
    for axis in 0..n {
        let up = g.neighbor(slot, axis, 1);
        let dn = g.neighbor(slot, axis, 0);
        if up == INVALID || dn == INVALID {
            return None;
        }
        acc += field.get(up) - 2.0 * center + field.get(dn);
    }
    Some(acc / h2)
}

pub fn discrete_laplacian(field: &LatticeField, idx: &[i64]) -> Result<f64> {
    let slot = field.grid().slot(idx).ok_or_else(|| Error::OutOfDomain {
        index: idx.to_vec(),
        axis: 0,
    })?;
    laplacian_at_slot(field, slot).ok_or_else(|| Error::OutOfDomain {
        index: idx.to_vec(),
        axis: 0,
    })
}

/// Composition of the discrete Laplacian with itself at one multi-index.
pub fn discrete_bilaplacian(field: &LatticeField, idx: &[i64]) -> Result<f64> {
    let g = field.grid();
    let n = g.dim();
    let h2 = g.h() * g.h();
    let lap = |at: &[i64]| -> Result<f64> {
        let mut acc = 0.0;
        let c = read(field, at, 0)?;
        for axis in 0..n {
            let mut up = at.to_vec();
            up[axis] += 1;
            let mut dn = at.to_vec();
            dn[axis] -= 1;
            acc += read(field, &up, axis)? - 2.0 * c + read(field, &dn, axis)?;
        }
        Ok(acc / h2)
    };
    let mut acc = 0.0;
    let c = lap(idx)?;
    for axis in 0..n {
        let mut up = idx.to_vec();
        up[axis] += 1;
        let mut dn = idx.to_vec();
        dn[axis] -= 1;
        acc += lap(&up)? - 2.0 * c + lap(&dn)?;
    }
    Ok(acc / h2)
}

/// Bilaplacian on every interior point of a completed field, via two
/// Laplacian passes. The first pass covers the interior and boundary, which
/// is exactly the set the second pass reads.
pub fn bilaplacian_interior(field: &LatticeField) -> Vec<f64> {
    let g = field.grid();
    let n = g.dim();
    let h2 = g.h() * g.h();
    let mut lap = vec![0.0; g.len()];
    for &slot in g.interior_slots().iter().chain(g.boundary_slots()) {
        let mut acc = 0.0;
        let c = field.get(slot);
        for axis in 0..n {
            acc += field.get(g.neighbor(slot, axis, 1)) - 2.0 * c
                + field.get(g.neighbor(slot, axis, 0));
        }
        lap[slot as usize] = acc / h2;
    }
    let mut out = vec![0.0; g.interior_slots().len()];
    for (k, &slot) in g.interior_slots().iter().enumerate() {
        let mut acc = 0.0;
        let c = lap[slot as usize];
        for axis in 0..n {
            acc += lap[g.neighbor(slot, axis, 1) as usize] - 2.0 * c
                + lap[g.neighbor(slot, axis, 0) as usize];
        }
        out[k] = acc / h2;
    }
    out
}

/// Complete a field given on the interior and boundary by filling the ghost
/// layer according to the scheme. Boundary values must be exactly zero.
pub fn fill_ghosts(field: &LatticeField, scheme: BcScheme) -> Result<LatticeField> {
    let g = field.grid();
    for &slot in g.boundary_slots() {
        let v = field.get(slot);
        if v != 0.0 {
            return Err(Error::NonzeroBoundary {
                index: g.index_of(slot),
                value: v,
            });
        }
    }
    let mut out = field.clone();
    fill_ghosts_inplace(&mut out, scheme);
    Ok(out)
}

pub(crate) fn fill_ghosts_inplace(field: &mut LatticeField, scheme: BcScheme) {
    let g = field.grid().clone();
    match scheme {
        BcScheme::OneSidedZero => {
            for &slot in g.ghost_slots() {
                field.set(slot, 0.0);
            }
        }
        BcScheme::CenteredMirror => {
            for (k, &slot) in g.ghost_slots().iter().enumerate() {
                match g.mirror_rules()[k] {
                    MirrorRule::Copy(src) => field.set(slot, field.get(src)),
                    MirrorRule::Zero => field.set(slot, 0.0),
                }
            }
        }
    }
}

/// Build a completed field from interior values (in interior flat order):
/// zero boundary plus scheme ghosts.
pub fn complete_interior(grid: &Arc<GridSpec>, interior: &[f64], scheme: BcScheme) -> LatticeField {
    assert_eq!(interior.len(), grid.interior_slots().len());
    let mut out = LatticeField::zeros(grid.clone());
    for (k, &slot) in grid.interior_slots().iter().enumerate() {
        out.set(slot, interior[k]);
    }
    fill_ghosts_inplace(&mut out, scheme);
    out
}

/// Force a field to satisfy a scheme's boundary hypotheses, keeping its
/// interior values. Returns the projected field and whether anything moved.
pub fn project_to_scheme(field: &LatticeField, scheme: BcScheme) -> (LatticeField, bool) {
    let g = field.grid();
    let interior: Vec<f64> = g.interior_slots().iter().map(|&s| field.get(s)).collect();
    let out = complete_interior(g, &interior, scheme);
    let changed = field.values().iter().zip(out.values()).any(|(a, b)| a != b);
    (out, changed)
}

/// Outward normals of a boundary slot, as (axis, outward direction) pairs.
pub fn outward_normals(grid: &GridSpec, slot: u32) -> Vec<(usize, usize)> {
    match grid.class_of(slot) {
        PointClass::Boundary { faces, .. } => faces.iter().map(|&f| (f / 2, f % 2)).collect(),
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn sample1d(m: i64, f: impl Fn(f64) -> f64) -> LatticeField {
        let g = GridSpec::new(1, m).unwrap();
        LatticeField::sample(g, |x| f(x[0]))
    }

    #[test]
    fn diff_examples() {
        // f(x) = x^2, forward at x = 0.5, h = 0.25 -> 1.25
        let f = sample1d(4, |x| x * x);
        assert!((diff(&f, 0, DiffKind::Forward, &[2]).unwrap() - 1.25).abs() < 1e-14);
        // f(x) = x^3, centered at x = 0 -> h^2
        let f = sample1d(4, |x| x * x * x);
        let h = 0.25;
        assert!((diff(&f, 0, DiffKind::Centered, &[0]).unwrap() - h * h).abs() < 1e-14);
        // constants are annihilated
        let f = sample1d(4, |_| 7.5);
        assert_eq!(diff(&f, 0, DiffKind::Backward, &[3]).unwrap(), 0.0);
        // stencil leaving the extended lattice is a domain error
        assert!(diff(&f, 0, DiffKind::Backward, &[-1]).is_err());
    }

    #[test]
    fn hessian_examples() {
        let g = GridSpec::new(2, 4).unwrap();
        // v = x1*x2: off-diagonal entries exactly 1
        let v = LatticeField::sample(g.clone(), |x| x[0] * x[1]);
        let hess = discrete_hessian(&v, &[2, 2]).unwrap();
        assert!((hess[1] - 1.0).abs() < 1e-13);
        assert!((hess[2] - 1.0).abs() < 1e-13);
        // v = x1^2: (1,1) entry 2, others 0
        let v = LatticeField::sample(g.clone(), |x| x[0] * x[0]);
        let hess = discrete_hessian(&v, &[2, 2]).unwrap();
        assert!((hess[0] - 2.0).abs() < 1e-12);
        assert!(hess[1].abs() < 1e-12 && hess[2].abs() < 1e-12 && hess[3].abs() < 1e-12);
        // affine -> zero matrix
        let v = LatticeField::sample(g, |x| 3.0 + 2.0 * x[0] - x[1]);
        let hess = discrete_hessian(&v, &[1, 3]).unwrap();
        assert!(hess.iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn bilaplacian_spike_weights() {
        // 1D: center weight 6/h^4
        let g = GridSpec::new(1, 8).unwrap();
        let mut v = LatticeField::zeros(g.clone());
        v.set(g.slot(&[4]).unwrap(), 1.0);
        let h4 = g.h().powi(4);
        assert!((discrete_bilaplacian(&v, &[4]).unwrap() - 6.0 / h4).abs() < 1e-6 / h4);
        // 2D: center weight 20/h^4
        let g = GridSpec::new(2, 8).unwrap();
        let mut v = LatticeField::zeros(g.clone());
        v.set(g.slot(&[4, 4]).unwrap(), 1.0);
        let h4 = g.h().powi(4);
        assert!((discrete_bilaplacian(&v, &[4, 4]).unwrap() - 20.0 / h4).abs() < 1e-6 / h4);
    }

    #[test]
    fn bilaplacian_kills_cubics() {
        let g = GridSpec::new(2, 8).unwrap();
        let v = LatticeField::sample(g.clone(), |x| {
            x[0].powi(3) + 2.0 * x[0].powi(2) * x[1] - x[1].powi(3) + x[0] * x[1]
        });
        for &slot in g.interior_slots() {
            let idx = g.index_of(slot);
            let val = discrete_bilaplacian(&v, &idx).unwrap();
            assert!(val.abs() < 1e-8, "bilaplacian {val} at {idx:?}");
        }
    }

    #[test]
    fn bulk_bilaplacian_matches_pointwise() {
        let g = GridSpec::new(2, 6).unwrap();
        let v = LatticeField::sample(g.clone(), |x| (3.1 * x[0]).sin() * (1.7 + x[1]).cos());
        let bulk = bilaplacian_interior(&v);
        for (k, &slot) in g.interior_slots().iter().enumerate() {
            let idx = g.index_of(slot);
            let p = discrete_bilaplacian(&v, &idx).unwrap();
            assert!((bulk[k] - p).abs() <= 1e-9 * p.abs().max(1.0));
        }
    }

    #[test]
    fn consistency_second_order() {
        // Centered first difference and bilaplacian are O(h^2) on smooth
        // functions: halving h divides the error by ~4.
        let f = |x: f64| (1.3 * x).sin();
        let df = |x: f64| 1.3 * (1.3 * x).cos();
        let d4f = |x: f64| 1.3f64.powi(4) * (1.3 * x).sin();
        let mut first_errs = Vec::new();
        let mut fourth_errs = Vec::new();
        for m in [8, 16, 32] {
            let g = GridSpec::new(1, m).unwrap();
            let v = LatticeField::sample(g.clone(), |x| f(x[0]));
            let mid = m / 2;
            let x = g.h() * mid as f64;
            let e1 = (diff(&v, 0, DiffKind::Centered, &[mid]).unwrap() - df(x)).abs();
            let e4 = (discrete_bilaplacian(&v, &[mid]).unwrap() - d4f(x)).abs();
            first_errs.push(e1);
            fourth_errs.push(e4);
        }
        for errs in [first_errs, fourth_errs] {
            for k in 0..errs.len() - 1 {
                let ratio = errs[k] / errs[k + 1];
                assert!(
                    (3.5..=4.5).contains(&ratio),
                    "error ratio {ratio} outside [3.5, 4.5]"
                );
            }
        }
    }

    #[test]
    fn fill_ghosts_1d_mirror() {
        // interior (a, b, c) at (h, 2h, 3h): ghost at -h equals a, at 1+h equals c
        let g = GridSpec::new(1, 4).unwrap();
        let completed = complete_interior(&g, &[1.5, -2.0, 0.75], BcScheme::CenteredMirror);
        assert_eq!(completed.at_index(&[-1]).unwrap(), 1.5);
        assert_eq!(completed.at_index(&[5]).unwrap(), 0.75);
        // the centered normal difference vanishes at both endpoints
        for &b in g.boundary_slots() {
            let idx = g.index_of(b);
            assert_eq!(diff(&completed, 0, DiffKind::Centered, &idx).unwrap(), 0.0);
        }
    }

    #[test]
    fn fill_ghosts_policies() {
        let g = GridSpec::new(2, 5).unwrap();
        let mut f = LatticeField::zeros(g.clone());
        for &s in g.interior_slots() {
            let idx = g.index_of(s);
            f.set(s, (idx[0] * 7 + idx[1]) as f64);
        }
        // zero field stays zero
        let z = fill_ghosts(&LatticeField::zeros(g.clone()), BcScheme::CenteredMirror).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        // one-sided: every ghost is zero
        let os = fill_ghosts(&f, BcScheme::OneSidedZero).unwrap();
        for &s in g.ghost_slots() {
            assert_eq!(os.get(s), 0.0);
        }
        // mirror: centered normal difference vanishes at non-singular
        // boundary points, ghosts across singular points are zero
        let cm = fill_ghosts(&f, BcScheme::CenteredMirror).unwrap();
        for &b in g.boundary_slots() {
            let idx = g.index_of(b);
            let singular = matches!(g.class_of(b), PointClass::Boundary { singular: true, .. });
            for (axis, _) in outward_normals(&g, b) {
                let d = diff(&cm, axis, DiffKind::Centered, &idx).unwrap();
                if !singular {
                    assert_eq!(d, 0.0);
                }
            }
        }
        for (k, &gslot) in g.ghost_slots().iter().enumerate() {
            if g.mirror_rules()[k] == MirrorRule::Zero {
                assert_eq!(cm.get(gslot), 0.0);
            }
        }
        // nonzero boundary is rejected
        let mut bad = f.clone();
        bad.set(g.boundary_slots()[0], 1.0);
        assert!(fill_ghosts(&bad, BcScheme::CenteredMirror).is_err());
    }

    #[test]
    fn one_sided_forward_normal_difference_vanishes() {
        let g = GridSpec::new(2, 4).unwrap();
        let mut f = LatticeField::zeros(g.clone());
        for &s in g.interior_slots() {
            f.set(s, 2.0 + g.coord(s, 0) as f64);
        }
        let os = fill_ghosts(&f, BcScheme::OneSidedZero).unwrap();
        for &b in g.boundary_slots() {
            let idx = g.index_of(b);
            for (axis, side) in outward_normals(&g, b) {
                // outward one-sided difference reads the ghost, which is zero
                let mut out = idx.clone();
                out[axis] += if side == 1 { 1 } else { -1 };
                let d = (os.at_index(&out).unwrap() - os.at_index(&idx).unwrap()) / g.h();
                assert_eq!(d, 0.0);
            }
        }
    }
}
