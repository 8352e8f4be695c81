//! Discrete geometry of the unit cube: the interior lattice, its boundary,
//! and the single ghost layer that carries the discrete boundary conditions.
//!
//! Points are addressed by integer multi-indices `z` (units of the spacing
//! `h = 1/m`), never by floating-point coordinates. The extended lattice
//! holds every point of `[-h, 1+h]^n` except the 2^n extreme corners whose
//! coordinates are all in `{-h, 1+h}`; those corners are unreachable by any
//! stencil anchored inside the cube. For `n = 1` the extreme "corners" are
//! the two ghost points themselves, so they are kept — dropping them would
//! leave the one-dimensional schemes without a ghost layer.

use crate::error::{Error, Result};
use std::sync::Arc;

pub const MAX_DIM: usize = 7;

/// Classification of a lattice multi-index relative to the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointClass {
    /// Point of the open cube, `1 <= z_i <= m-1` for every axis.
    Interior,
    /// Point of the topological boundary of the closed cube.
    Boundary {
        /// Faces containing the point, encoded as `axis*2 + side`
        /// (side 0 at coordinate 0, side 1 at coordinate 1).
        faces: Vec<usize>,
        /// True when the point lies on an edge or vertex of the boundary
        /// (at least two active faces).
        singular: bool,
    },
    /// Point of the extended lattice outside the closed cube.
    Ghost(GhostKind),
    /// Not a point of the extended lattice.
    Outside,
}

/// What a ghost point sits next to; fixes its value under ghost filling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GhostKind {
    /// Exactly one coordinate leaves `[0, m]`. `axis`/`side` name the face,
    /// `singular_adjacent` is set when the boundary point the ghost faces
    /// lies on an edge or vertex of the boundary.
    Face {
        axis: usize,
        side: usize,
        singular_adjacent: bool,
    },
    /// Two or more coordinates leave `[0, m]` (arises only for n >= 3).
    /// No difference-quotient boundary condition reaches these points.
    Edge,
}

/// Ghost-filling rule precomputed per ghost slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorRule {
    /// Copy the value of the interior point mirrored across the face.
    Copy(u32),
    /// Pin the value to zero.
    Zero,
}

pub const INVALID: u32 = u32::MAX;

/// The cube grid: index sets, flat orderings, and stencil tables.
///
/// Flat orderings are lexicographic in the multi-index, so every reduction
/// over a point set visits points in a deterministic order.
#[derive(Debug)]
pub struct GridSpec {
    n: usize,
    m: i64,
    h: f64,
    /// Box dimensions: each axis runs over `-1 ..= m+1`, i.e. `m+3` values.
    box_dim: usize,
    /// Row-major strides for the box.
    strides: Vec<usize>,
    /// Box offset -> slot in the extended lattice (INVALID if excluded).
    slot_of_box: Vec<u32>,
    /// Slot -> box offset.
    box_of_slot: Vec<u32>,
    class: Vec<PointClass>,
    interior: Vec<u32>,
    boundary: Vec<u32>,
    ghosts: Vec<u32>,
    /// Slot*2n + axis*2 + dir (dir 0 = -e_axis, 1 = +e_axis) -> neighbor slot.
    neighbors: Vec<u32>,
    /// Mirror rule per ghost (same order as `ghosts`).
    mirror: Vec<MirrorRule>,
    /// Slot -> position in `interior`, or INVALID.
    interior_rank: Vec<u32>,
}

impl GridSpec {
    pub fn new(n: usize, m: i64) -> Result<Arc<GridSpec>> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::GridSize(format!(
                "dimension n = {n} outside supported range 1..={MAX_DIM}"
            )));
        }
        if m < 4 {
            return Err(Error::GridSize(format!(
                "m = {m} too small; the bilaplacian stencil needs m >= 4"
            )));
        }
        let box_dim = (m + 3) as usize;
        let total: usize = box_dim.pow(n as u32);
        let mut strides = vec![0usize; n];
        let mut acc = 1usize;
        for axis in (0..n).rev() {
            strides[axis] = acc;
            acc *= box_dim;
        }

        let mut slot_of_box = vec![INVALID; total];
        let mut box_of_slot = Vec::new();
        let mut class = Vec::new();
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        let mut ghosts = Vec::new();

        let mut idx = vec![-1i64; n];
        #[allow(clippy::needless_range_loop)]
        for off in 0..total {
            let c = classify(n, m, &idx);
            if c != PointClass::Outside {
                let slot = box_of_slot.len() as u32;
                slot_of_box[off] = slot;
                box_of_slot.push(off as u32);
                match &c {
                    PointClass::Interior => interior.push(slot),
                    PointClass::Boundary { .. } => boundary.push(slot),
                    PointClass::Ghost(_) => ghosts.push(slot),
                    PointClass::Outside => unreachable!(),
                }
                class.push(c);
            }
            // lexicographic increment
            #[allow(clippy::needless_range_loop)]
            for axis in (0..n).rev() {
                idx[axis] += 1;
                if idx[axis] <= m + 1 {
                    break;
                }
                idx[axis] = -1;
            }
        }

        let slots = box_of_slot.len();
        let mut neighbors = vec![INVALID; slots * 2 * n];
        for slot in 0..slots {
            let off = box_of_slot[slot] as usize;
            for axis in 0..n {
                let coord = (off / strides[axis]) % box_dim;
                if coord > 0 {
                    let nb = slot_of_box[off - strides[axis]];
                    neighbors[slot * 2 * n + axis * 2] = nb;
                }
                if coord + 1 < box_dim {
                    let nb = slot_of_box[off + strides[axis]];
                    neighbors[slot * 2 * n + axis * 2 + 1] = nb;
                }
            }
        }

        let mut grid = GridSpec {
            n,
            m,
            h: 1.0 / m as f64,
            box_dim,
            strides,
            slot_of_box,
            box_of_slot,
            class,
            interior,
            boundary,
            ghosts,
            neighbors,
            mirror: Vec::new(),
            interior_rank: vec![INVALID; slots],
        };
        for (rank, &slot) in grid.interior.iter().enumerate() {
            grid.interior_rank[slot as usize] = rank as u32;
        }

        let mut mirror = Vec::with_capacity(grid.ghosts.len());
        for &g in &grid.ghosts {
            let rule = match &grid.class[g as usize] {
                PointClass::Ghost(GhostKind::Face {
                    axis,
                    side,
                    singular_adjacent,
                }) => {
                    if *singular_adjacent {
                        MirrorRule::Zero
                    } else {
                        // Reflection across the face: two steps inward.
                        let dir = if *side == 0 { 1 } else { 0 };
                        let b = grid.neighbor(g, *axis, dir);
                        let p = grid.neighbor(b, *axis, dir);
                        debug_assert!(matches!(grid.class[p as usize], PointClass::Interior));
                        MirrorRule::Copy(p)
                    }
                }
                PointClass::Ghost(GhostKind::Edge) => MirrorRule::Zero,
                _ => unreachable!(),
            };
            mirror.push(rule);
        }
        grid.mirror = mirror;

        Ok(Arc::new(grid))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of points of the extended lattice.
    pub fn len(&self) -> usize {
        self.box_of_slot.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn interior_slots(&self) -> &[u32] {
        &self.interior
    }

    pub fn boundary_slots(&self) -> &[u32] {
        &self.boundary
    }

    pub fn ghost_slots(&self) -> &[u32] {
        &self.ghosts
    }

    pub fn mirror_rules(&self) -> &[MirrorRule] {
        &self.mirror
    }

    pub fn class_of(&self, slot: u32) -> &PointClass {
        &self.class[slot as usize]
    }

    /// Neighbor slot one step along `axis` (dir 0 = -1, dir 1 = +1),
    /// or `INVALID` when the neighbor is not on the extended lattice.
    #[inline]
    pub fn neighbor(&self, slot: u32, axis: usize, dir: usize) -> u32 {
        self.neighbors[slot as usize * 2 * self.n + axis * 2 + dir]
    }

    /// Position of an interior slot in the interior ordering.
    #[inline]
    pub fn interior_rank(&self, slot: u32) -> u32 {
        self.interior_rank[slot as usize]
    }

    pub fn slot(&self, idx: &[i64]) -> Option<u32> {
        assert_eq!(idx.len(), self.n);
        let mut off = 0usize;
        for (axis, &z) in idx.iter().enumerate() {
            if z < -1 || z > self.m + 1 {
                return None;
            }
            off += (z + 1) as usize * self.strides[axis];
        }
        let s = self.slot_of_box[off];
        (s != INVALID).then_some(s)
    }

    pub fn index_of(&self, slot: u32) -> Vec<i64> {
        let mut off = self.box_of_slot[slot as usize] as usize;
        let mut idx = vec![0i64; self.n];
        for (axis, v) in idx.iter_mut().enumerate() {
            *v = (off / self.strides[axis]) as i64 - 1;
            off %= self.strides[axis];
        }
        idx
    }

    /// Integer coordinate of a slot along one axis.
    #[inline]
    pub fn coord(&self, slot: u32, axis: usize) -> i64 {
        let off = self.box_of_slot[slot as usize] as usize;
        ((off / self.strides[axis]) % self.box_dim) as i64 - 1
    }

    /// Physical coordinates `h * z` of a slot.
    pub fn point(&self, slot: u32) -> Vec<f64> {
        self.index_of(slot)
            .iter()
            .map(|&z| z as f64 * self.h)
            .collect()
    }

    pub fn classify(&self, idx: &[i64]) -> PointClass {
        classify(self.n, self.m, idx)
    }

    /// The boundary subset where the shifted mixed-difference square
    /// `z + h*{0, e_i, -e_j, e_i - e_j}` stays inside the closed cube.
    pub fn gamma_ij(&self, i: usize, j: usize) -> Result<Vec<u32>> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::InvalidArgument(format!(
                "gamma_ij requires distinct axes below {}, got ({i}, {j})",
                self.n
            )));
        }
        Ok(self
            .boundary
            .iter()
            .copied()
            .filter(|&s| self.coord(s, i) < self.m && self.coord(s, j) >= 1)
            .collect())
    }
}

/// Classify a multi-index against the grid `(n, m)`.
pub fn classify(n: usize, m: i64, idx: &[i64]) -> PointClass {
    assert_eq!(idx.len(), n);
    if idx.iter().any(|&z| z < -1 || z > m + 1) {
        return PointClass::Outside;
    }
    // Excluded extreme corners: every coordinate at -1 or m+1 (kept for n = 1).
    if n > 1 && idx.iter().all(|&z| z == -1 || z == m + 1) {
        return PointClass::Outside;
    }
    let exterior: Vec<usize> = (0..n)
        .filter(|&a| idx[a] == -1 || idx[a] == m + 1)
        .collect();
    if !exterior.is_empty() {
        if exterior.len() >= 2 {
            return PointClass::Ghost(GhostKind::Edge);
        }
        let axis = exterior[0];
        let side = if idx[axis] == -1 { 0 } else { 1 };
        // The adjacent boundary point is the projection onto the face; it is
        // singular exactly when some other coordinate is also extreme in [0, m].
        let singular_adjacent = (0..n).any(|a| a != axis && (idx[a] == 0 || idx[a] == m));
        return PointClass::Ghost(GhostKind::Face {
            axis,
            side,
            singular_adjacent,
        });
    }
    let faces: Vec<usize> = (0..n)
        .flat_map(|a| {
            let mut f = Vec::new();
            if idx[a] == 0 {
                f.push(a * 2);
            }
            if idx[a] == m {
                f.push(a * 2 + 1);
            }
            f
        })
        .collect();
    if faces.is_empty() {
        PointClass::Interior
    } else {
        let singular = faces.len() >= 2;
        PointClass::Boundary { faces, singular }
    }
}
