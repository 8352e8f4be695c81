//! Discrete inner products and norms.
//!
//! `h2h_norm` implements the three-sum Sobolev norm over the extended
//! lattice: point values, first differences wherever the forward neighbor
//! exists, and mixed second differences wherever the full four-point stencil
//! exists.
//!
//! The two Hessian inner products are the quadratic forms produced by the
//! summation-by-parts identities and are kept exactly identity-compatible:
//! the star flavor sums every entry over interior and boundary points, the
//! tilde flavor sums every entry over the interior, then adds the diagonal
//! boundary entries along extremal axes at half weight and the off-diagonal
//! boundary entries over the translate-square subsets at full weight.
//!
//! The fractional boundary seminorm is the double sum over ordered point
//! pairs weighted by |x-y|^(-n); callers supply an explicit zero collar when
//! pairs against the zero extension are wanted.

use crate::error::{Error, Result};
use crate::field::{FaceField, LatticeField};
use crate::grid::GridSpec;
use crate::ops::hessian_entry;
use std::collections::HashSet;
use std::sync::Arc;

/// Weighted dot product over a slot set (weight `h^n`).
pub fn l2h_inner(a: &LatticeField, b: &LatticeField, region: &[u32]) -> Result<f64> {
    if a.grid().len() != b.grid().len() || a.grid().dim() != b.grid().dim() {
        return Err(Error::ShapeMismatch("fields on different lattices".into()));
    }
    let hn = a.grid().h().powi(a.grid().dim() as i32);
    Ok(region.iter().map(|&s| hn * a.get(s) * b.get(s)).sum())
}

pub fn l2h_norm(a: &LatticeField, region: &[u32]) -> f64 {
    l2h_inner(a, a, region).expect("same field").sqrt()
}

/// The discrete Sobolev norm over the extended lattice.
pub fn h2h_norm(v: &LatticeField) -> f64 {
    h2h_norm_sq(v).sqrt()
}

pub fn h2h_norm_sq(v: &LatticeField) -> f64 {
    let g = v.grid();
    let n = g.dim();
    let h = g.h();
    let hn = h.powi(n as i32);
    let mut acc = 0.0;
    for slot in 0..g.len() as u32 {
        let val = v.get(slot);
        acc += hn * val * val;
    }
    for slot in 0..g.len() as u32 {
        for axis in 0..n {
            let up = g.neighbor(slot, axis, 1);
            if up != crate::grid::INVALID {
                let d = (v.get(up) - v.get(slot)) / h;
                acc += hn * d * d;
            }
        }
    }
    for slot in 0..g.len() as u32 {
        for i in 0..n {
            for j in 0..n {
                if let Some(d) = hessian_entry(v, slot, i, j) {
                    acc += hn * d * d;
                }
            }
        }
    }
    acc
}

/// Mixed second differences of a field at interior and boundary points,
/// with a mask marking the entries whose stencil fits the extended lattice.
#[derive(Debug, Clone)]
pub struct HessianField {
    grid: Arc<GridSpec>,
    entries: Vec<f64>,
    defined: Vec<bool>,
}

impl HessianField {
    pub fn of(field: &LatticeField) -> Self {
        let grid = field.grid().clone();
        let n = grid.dim();
        let mut entries = vec![0.0; grid.len() * n * n];
        let mut defined = vec![false; grid.len() * n * n];
        for &slot in grid.interior_slots().iter().chain(grid.boundary_slots()) {
            for i in 0..n {
                for j in 0..n {
                    if let Some(d) = hessian_entry(field, slot, i, j) {
                        let off = slot as usize * n * n + i * n + j;
                        entries[off] = d;
                        defined[off] = true;
                    }
                }
            }
        }
        HessianField {
            grid,
            entries,
            defined,
        }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    #[inline]
    pub fn get(&self, slot: u32, i: usize, j: usize) -> Option<f64> {
        let n = self.grid.dim();
        let off = slot as usize * n * n + i * n + j;
        self.defined[off].then(|| self.entries[off])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessianFlavor {
    Star,
    Tilde,
}

/// The Hessian quadratic forms of the summation-by-parts identities.
pub fn hessian_inner(f: &HessianField, g: &HessianField, flavor: HessianFlavor) -> Result<f64> {
    if f.grid.len() != g.grid.len() || f.grid.dim() != g.grid.dim() {
        return Err(Error::ShapeMismatch(
            "hessian fields on different lattices".into(),
        ));
    }
    let grid = &f.grid;
    let n = grid.dim();
    let hn = grid.h().powi(n as i32);
    let m = grid.m();
    let mut acc = 0.0;
    match flavor {
        HessianFlavor::Star => {
            for &slot in grid.interior_slots().iter().chain(grid.boundary_slots()) {
                for i in 0..n {
                    for j in 0..n {
                        if let (Some(a), Some(b)) = (f.get(slot, i, j), g.get(slot, i, j)) {
                            acc += hn * a * b;
                        }
                    }
                }
            }
        }
        HessianFlavor::Tilde => {
            for &slot in grid.interior_slots() {
                for i in 0..n {
                    for j in 0..n {
                        let (a, b) = (
                            f.get(slot, i, j).expect("interior stencils fit"),
                            g.get(slot, i, j).expect("interior stencils fit"),
                        );
                        acc += hn * a * b;
                    }
                }
            }
            for &slot in grid.boundary_slots() {
                for i in 0..n {
                    let c = grid.coord(slot, i);
                    if c == 0 || c == m {
                        if let (Some(a), Some(b)) = (f.get(slot, i, i), g.get(slot, i, i)) {
                            acc += 0.5 * hn * a * b;
                        }
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    for &slot in &grid.gamma_ij(i, j)? {
                        if let (Some(a), Some(b)) = (f.get(slot, i, j), g.get(slot, i, j)) {
                            acc += hn * a * b;
                        }
                    }
                }
            }
        }
    }
    Ok(acc)
}

pub fn hessian_norm(f: &HessianField, flavor: HessianFlavor) -> f64 {
    hessian_inner(f, f, flavor).expect("same field").sqrt()
}

/// L2 inner product of two face fields (weight `h^d` with `d` the face
/// dimension; fields may be stored on different boxes).
pub fn face_l2_inner(a: &FaceField, b: &FaceField) -> Result<f64> {
    if a.dim() != b.dim() || a.h() != b.h() {
        return Err(Error::ShapeMismatch(
            "face fields on different lattices".into(),
        ));
    }
    let hd = a.h().powi(a.dim() as i32);
    let mut acc = 0.0;
    a.for_each(|idx, v| {
        if v != 0.0 {
            acc += hd * v * b.get(idx);
        }
    });
    Ok(acc)
}

/// L2 norm squared of a face field (weight `h^d` with `d` the face dimension).
pub fn face_l2_norm_sq(w: &FaceField) -> f64 {
    let hd = w.h().powi(w.dim() as i32);
    w.values().iter().map(|v| hd * v * v).sum()
}

/// Fractional boundary seminorm squared over the stored points plus an
/// explicit set of zero-collar points.
///
/// The kernel is `|x - y|^(-n) h^(2n-2)` with `n = d + 1` the ambient
/// dimension of a face of the `n`-cube. Pairs in which both values vanish
/// contribute nothing and are skipped.
pub fn h_half_seminorm_sq_with_collar(w: &FaceField, collar: &[Vec<i64>]) -> f64 {
    let d = w.dim();
    let ambient = (d + 1) as i32;
    // physical kernel: h^{2n-2} * (h |dz|)^{-n} = h^{d-1} |dz|^{-n}
    let weight = w.h().powi(d as i32 - 1);

    let mut stored: Vec<(Vec<i64>, f64)> = Vec::new();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    w.for_each(|idx, v| {
        stored.push((idx.to_vec(), v));
        seen.insert(idx.to_vec());
    });
    let zeros: Vec<Vec<i64>> = collar
        .iter()
        .filter(|p| !seen.contains(*p))
        .cloned()
        .collect();

    let kernel = |a: &[i64], b: &[i64]| -> f64 {
        let mut d2 = 0.0;
        for (x, y) in a.iter().zip(b) {
            let t = (x - y) as f64;
            d2 += t * t;
        }
        d2.sqrt().powi(-ambient)
    };

    let mut acc = 0.0;
    // stored-vs-stored, ordered pairs
    for (k, (xa, va)) in stored.iter().enumerate() {
        for (xb, vb) in stored.iter().skip(k + 1) {
            let dv = va - vb;
            if dv != 0.0 {
                acc += 2.0 * dv * dv * kernel(xa, xb);
            }
        }
    }
    // stored-vs-collar, ordered pairs (collar values are zero)
    for (xa, va) in &stored {
        if *va == 0.0 {
            continue;
        }
        for xb in &zeros {
            acc += 2.0 * va * va * kernel(xa, xb);
        }
    }
    acc * weight
}

/// Seminorm over the stored points only (no collar).
pub fn h_half_seminorm(w: &FaceField) -> f64 {
    h_half_seminorm_sq_with_collar(w, &[]).sqrt()
}

/// The default zero collar: every lattice point of `[-2, 2]^d`.
pub fn default_collar(w: &FaceField) -> Vec<Vec<i64>> {
    let d = w.dim();
    let m = (1.0 / w.h()).round() as i64;
    let lo = -2 * m;
    let hi = 2 * m;
    let span = (hi - lo + 1) as usize;
    let mut out = Vec::with_capacity(span.pow(d as u32));
    let mut idx = vec![lo; d];
    loop {
        out.push(idx.clone());
        let mut a = d;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] <= hi {
                break;
            }
            idx[a] = lo;
        }
    }
}

/// Seminorm-plus-L2 norm against the default collar; the quantity the
/// boundary scaling studies track.
pub fn h_half_norm(w: &FaceField) -> f64 {
    let collar = default_collar(w);
    (h_half_seminorm_sq_with_collar(w, &collar) + face_l2_norm_sq(w)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::ops::{complete_interior, BcScheme};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &Arc<GridSpec>, seed: u64) -> LatticeField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = LatticeField::zeros(grid.clone());
        for s in 0..grid.len() as u32 {
            f.set(s, rng.gen_range(-1.0..1.0));
        }
        f
    }

    #[test]
    fn l2_examples() {
        let g = GridSpec::new(2, 4).unwrap();
        let ones = LatticeField::sample(g.clone(), |_| 1.0);
        let v = l2h_inner(&ones, &ones, g.interior_slots()).unwrap();
        assert!((v - 9.0 / 16.0).abs() < 1e-15);

        let mut spike = LatticeField::zeros(g.clone());
        spike.set(g.slot(&[2, 2]).unwrap(), 2.0);
        let v = l2h_inner(&spike, &spike, g.interior_slots()).unwrap();
        assert!((v - 0.25).abs() < 1e-15);

        let mut other = LatticeField::zeros(g.clone());
        other.set(g.slot(&[1, 1]).unwrap(), 5.0);
        assert_eq!(l2h_inner(&spike, &other, g.interior_slots()).unwrap(), 0.0);
    }

    /// Brute-force re-implementation of the three-sum norm using only
    /// index arithmetic and membership tests.
    fn h2h_oracle(v: &LatticeField) -> f64 {
        let g = v.grid();
        let n = g.dim();
        let h = g.h();
        let hn = h.powi(n as i32);
        let mut acc = 0.0;
        for slot in 0..g.len() as u32 {
            let z = g.index_of(slot);
            let val = v.at_index(&z).unwrap();
            acc += hn * val * val;
            for i in 0..n {
                let mut up = z.clone();
                up[i] += 1;
                if let Some(vu) = v.at_index(&up) {
                    let d = (vu - val) / h;
                    acc += hn * d * d;
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let mut a = z.clone();
                    a[i] += 1;
                    let mut b = z.clone();
                    b[j] -= 1;
                    let mut c = z.clone();
                    c[i] += 1;
                    c[j] -= 1;
                    if let (Some(va), Some(vb), Some(vc)) =
                        (v.at_index(&a), v.at_index(&b), v.at_index(&c))
                    {
                        let d = (va - vc - val + vb) / (h * h);
                        acc += hn * d * d;
                    }
                }
            }
        }
        acc.sqrt()
    }

    #[test]
    fn h2h_spike_against_oracle() {
        let g = GridSpec::new(1, 4).unwrap();
        let mut v = LatticeField::zeros(g.clone());
        v.set(g.slot(&[2]).unwrap(), 1.0);
        let norm = h2h_norm(&v);
        assert!((norm - h2h_oracle(&v)).abs() < 1e-13);
        // frozen value: 0.25 + 8 + 384
        assert!((norm * norm - 392.25).abs() < 1e-10);
    }

    #[test]
    fn h2h_matches_oracle_on_random_fields() {
        for (n, m, seed) in [(1usize, 6i64, 1u64), (2, 5, 2), (2, 16, 3), (3, 4, 4)] {
            let g = GridSpec::new(n, m).unwrap();
            let v = random_field(&g, seed);
            let a = h2h_norm(&v);
            let b = h2h_oracle(&v);
            assert!((a - b).abs() <= 1e-12 * b, "({n}, {m}): {a} vs {b}");
        }
    }

    #[test]
    fn h2h_affine_second_block_vanishes() {
        // for affine fields the second-difference block contributes zero:
        // the norm squared equals value block plus first-difference block
        let g = GridSpec::new(2, 5).unwrap();
        let v = LatticeField::sample(g.clone(), |x| 1.0 + 2.0 * x[0] - 0.5 * x[1]);
        let n = g.dim();
        let h = g.h();
        let hn = h.powi(n as i32);
        let mut manual = 0.0;
        for slot in 0..g.len() as u32 {
            let val = v.get(slot);
            manual += hn * val * val;
            for axis in 0..n {
                let up = g.neighbor(slot, axis, 1);
                if up != crate::grid::INVALID {
                    let d = (v.get(up) - val) / h;
                    manual += hn * d * d;
                }
            }
        }
        assert!((h2h_norm_sq(&v) - manual).abs() < 1e-10 * manual);
    }

    #[test]
    fn hessian_inner_point_masses() {
        let g = GridSpec::new(2, 4).unwrap();
        let hn = g.h() * g.h();
        let n = g.dim();
        // a single diagonal entry planted at one interior point
        let mut f = HessianField::of(&LatticeField::zeros(g.clone()));
        let slot = g.slot(&[2, 2]).unwrap();
        let off = slot as usize * n * n; // (0,0) entry
        f.entries[off] = 3.0;
        f.defined[off] = true;
        let star = hessian_inner(&f, &f, HessianFlavor::Star).unwrap();
        assert!((star - hn * 9.0).abs() < 1e-15);
        // interior diagonal entries carry unit weight in the tilde flavor;
        // the half weight lives on the boundary
        let tilde = hessian_inner(&f, &f, HessianFlavor::Tilde).unwrap();
        assert!((tilde - hn * 9.0).abs() < 1e-15);

        // same entry planted at a boundary point with extremal coordinate
        let mut f = HessianField::of(&LatticeField::zeros(g.clone()));
        let slot = g.slot(&[0, 2]).unwrap();
        let off = slot as usize * n * n;
        f.entries[off] = 3.0;
        f.defined[off] = true;
        let tilde = hessian_inner(&f, &f, HessianFlavor::Tilde).unwrap();
        assert!((tilde - 0.5 * hn * 9.0).abs() < 1e-15);

        // disjoint supports give zero in both flavors
        let a = {
            let mut v = LatticeField::zeros(g.clone());
            v.set(g.slot(&[1, 1]).unwrap(), 1.0);
            HessianField::of(&v)
        };
        let b = {
            let mut v = LatticeField::zeros(g.clone());
            v.set(g.slot(&[3, 3]).unwrap(), 1.0);
            HessianField::of(&v)
        };
        // fields with disjoint stencil influence at distance > 2
        let s = hessian_inner(&a, &b, HessianFlavor::Star).unwrap();
        let t = hessian_inner(&a, &b, HessianFlavor::Tilde).unwrap();
        assert!(s.abs() < 1e-12 && t.abs() < 1e-12);
    }

    #[test]
    fn hessian_tilde_is_the_mirror_energy() {
        // The tilde norm of a mirror-completed field equals the energy
        // <A v, v> of the folded operator; checked here in 1D by hand.
        let g = GridSpec::new(1, 4).unwrap();
        let (a, b, c) = (0.7, -1.3, 0.4);
        let v = complete_interior(&g, &[a, b, c], BcScheme::CenteredMirror);
        let hf = HessianField::of(&v);
        let tilde = hessian_inner(&hf, &hf, HessianFlavor::Tilde).unwrap();
        let h = g.h();
        let expect = (7.0 * a * a + 6.0 * b * b + 7.0 * c * c - 8.0 * a * b - 8.0 * b * c
            + 2.0 * a * c)
            / (h * h * h * h)
            * h;
        assert!(
            (tilde - expect).abs() < 1e-10 * expect.abs(),
            "{tilde} vs {expect}"
        );
    }

    #[test]
    fn norms_are_homogeneous_and_triangular() {
        let g = GridSpec::new(2, 6).unwrap();
        let a = random_field(&g, 11);
        let b = random_field(&g, 12);
        let sum = LatticeField::from_values(
            g.clone(),
            a.values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| x + y)
                .collect(),
        )
        .unwrap();
        let scaled =
            LatticeField::from_values(g.clone(), a.values().iter().map(|x| -2.5 * x).collect())
                .unwrap();
        assert!((h2h_norm(&scaled) - 2.5 * h2h_norm(&a)).abs() < 1e-12 * h2h_norm(&a));
        assert!(h2h_norm(&sum) <= h2h_norm(&a) + h2h_norm(&b) + 1e-12);
        let ha = HessianField::of(&a);
        let hb = HessianField::of(&b);
        // symmetry of the bilinear forms
        for flavor in [HessianFlavor::Star, HessianFlavor::Tilde] {
            let ab = hessian_inner(&ha, &hb, flavor).unwrap();
            let ba = hessian_inner(&hb, &ha, flavor).unwrap();
            assert!((ab - ba).abs() < 1e-12 * ab.abs().max(1.0));
        }
    }

    #[test]
    fn face_inner_product() {
        let mut a = FaceField::zeros(0.25, vec![0], vec![4]);
        a.set(&[1], 2.0);
        a.set(&[2], -1.0);
        let mut b = FaceField::zeros(0.25, vec![-2], vec![8]);
        b.set(&[1], 3.0);
        // weight h^1, overlap only at index 1
        assert!((face_l2_inner(&a, &b).unwrap() - 0.25 * 6.0).abs() < 1e-15);
        let c = FaceField::zeros(0.5, vec![0], vec![4]);
        assert!(face_l2_inner(&a, &c).is_err());
    }

    #[test]
    fn h_half_seminorm_example() {
        // ambient n = 2, 1D face, support {0, h, 2h}, w = (1, 0, 0)
        let mut w = FaceField::zeros(0.125, vec![0], vec![3]);
        w.set(&[0], 1.0);
        let sq = h_half_seminorm_sq_with_collar(&w, &[]);
        assert!((sq - 2.5).abs() < 1e-14, "{sq}");
        // constants have zero seminorm
        let c = FaceField::from_fn(0.125, vec![0], vec![3], |_| 4.2);
        assert_eq!(h_half_seminorm(&c), 0.0);
        // homogeneity
        let w2 = w.scale(2.0);
        assert!((h_half_seminorm(&w2) - 2.0 * h_half_seminorm(&w)).abs() < 1e-14);
    }

    #[test]
    fn h_half_translation_invariance() {
        let m = 8i64;
        let h = 1.0 / m as f64;
        let vals = [0.3, -1.1, 0.0, 2.2, 0.7];
        let w = FaceField::from_fn(h, vec![0], vec![5], |z| vals[z[0] as usize]);
        let shifted = FaceField::from_fn(h, vec![13], vec![5], |z| vals[(z[0] - 13) as usize]);
        let a = h_half_seminorm(&w);
        let b = h_half_seminorm(&shifted);
        assert!((a - b).abs() < 1e-13 * a);
    }

    #[test]
    fn h_half_poincare_lower_bound() {
        // seminorm against a zero collar covering [-2, -1) dominates
        // (3 sqrt(n))^{-n} times the squared face L2 norm (ambient n = 2)
        let m = 12i64;
        let h = 1.0 / m as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let w = FaceField::from_fn(h, vec![0], vec![(2 * m / 3) as usize + 1], |_| {
                rng.gen_range(-1.0..1.0)
            });
            let collar: Vec<Vec<i64>> = (-2 * m..=-m - 1).map(|z| vec![z]).collect();
            let semi_sq = h_half_seminorm_sq_with_collar(&w, &collar);
            let l2_sq = face_l2_norm_sq(&w);
            let bound = (3.0 * 2.0f64.sqrt()).powi(-2) * l2_sq;
            assert!(semi_sq >= bound, "{semi_sq} < {bound}");
        }
    }
}
