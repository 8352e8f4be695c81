//! Matrix-free assembly and conjugate-gradient solution of the two schemes.
//!
//! The system is posed on interior unknowns only: applying the operator
//! extends an interior vector by the zero boundary, fills the ghost layer
//! per the scheme, and applies the composed Laplacian twice. Boundary and
//! ghost values are reconstructed, never solved for.

use crate::error::{Error, Result};
use crate::field::LatticeField;
use crate::grid::GridSpec;
use crate::mollify;
use crate::ops::{bilaplacian_interior, complete_interior, BcScheme};
use crate::sources::Evaluable;
use std::sync::Arc;

/// The folded interior operator for one scheme on one grid.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    grid: Arc<GridSpec>,
    scheme: BcScheme,
}

impl LinearSystem {
    pub fn new(grid: Arc<GridSpec>, scheme: BcScheme) -> Self {
        LinearSystem { grid, scheme }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn scheme(&self) -> BcScheme {
        self.scheme
    }

    pub fn unknowns(&self) -> usize {
        self.grid.interior_slots().len()
    }

    /// `v -> bilaplacian(fill_ghosts(extend_by_zero_boundary(v)))` on the
    /// interior.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.unknowns());
        let completed = complete_interior(&self.grid, v, self.scheme);
        bilaplacian_interior(&completed)
    }

    /// Diagonal of the folded operator (for the optional Jacobi
    /// preconditioner). The mirror fill adds one unit of stencil weight per
    /// axis side whose reflected ghost lands back on the point itself.
    pub fn diagonal(&self) -> Vec<f64> {
        let g = &self.grid;
        let n = g.dim() as f64;
        let h4 = g.h().powi(4);
        let base = (4.0 * n * n + 2.0 * n) / h4;
        let m = g.m();
        g.interior_slots()
            .iter()
            .map(|&slot| {
                let mut d = base;
                if self.scheme == BcScheme::CenteredMirror {
                    for axis in 0..g.dim() {
                        let c = g.coord(slot, axis);
                        if c == 1 {
                            d += 1.0 / h4;
                        }
                        if c == m - 1 {
                            d += 1.0 / h4;
                        }
                    }
                }
                d
            })
            .collect()
    }
}

/// Mollified right-hand side: the tensor hat-smoothing of the source,
/// sampled on the interior.
pub fn assemble_rhs(f: &dyn Evaluable, grid: &GridSpec) -> Result<Vec<f64>> {
    mollify::smooth_source(f, grid, None)
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    /// Completed field: interior solution, zero boundary, scheme ghosts.
    pub field: LatticeField,
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    pub tol: f64,
    pub maxit: usize,
    pub jacobi: bool,
}

impl CgOptions {
    pub fn defaults_for(m: i64) -> Self {
        CgOptions {
            tol: 1e-10,
            // the condition number grows like h^-4, so the cap scales
            // generously with the per-axis resolution
            maxit: 100 * ((m + 1) * (m + 1)) as usize,
            jacobi: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cg tolerance {} outside (0, 1)",
                self.tol
            )));
        }
        if self.maxit < 1 {
            return Err(Error::InvalidArgument("cg maxit must be >= 1".into()));
        }
        Ok(())
    }
}

/// Conjugate gradient from a zero initial guess with a fixed reduction
/// order, so iteration counts are reproducible.
pub fn solve_system(system: &LinearSystem, rhs: &[f64], opts: CgOptions) -> Result<SolveOutput> {
    opts.validate()?;
    let len = system.unknowns();
    if rhs.len() != len {
        return Err(Error::ShapeMismatch(format!(
            "rhs length {} does not match {} unknowns",
            rhs.len(),
            len
        )));
    }
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let norm_b = dot(rhs, rhs).sqrt();
    let mut x = vec![0.0; len];
    if norm_b == 0.0 {
        return Ok(SolveOutput {
            field: complete_interior(&system.grid, &x, system.scheme),
            iterations: 0,
            residual: 0.0,
        });
    }
    let inv_diag: Option<Vec<f64>> = opts
        .jacobi
        .then(|| system.diagonal().iter().map(|d| 1.0 / d).collect());
    let precond = |r: &[f64]| -> Vec<f64> {
        match &inv_diag {
            Some(di) => r.iter().zip(di).map(|(a, b)| a * b).collect(),
            None => r.to_vec(),
        }
    };

    let mut r = rhs.to_vec();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    let mut best = f64::INFINITY;

    for it in 1..=opts.maxit {
        let ap = system.apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::CgFailure {
                tol: opts.tol,
                maxit: opts.maxit,
                residual: dot(&r, &r).sqrt() / norm_b,
                verdict: "operator lost positive definiteness",
                history,
            });
        }
        let alpha = rz / pap;
        for k in 0..len {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rel = dot(&r, &r).sqrt() / norm_b;
        history.push(rel);
        best = best.min(rel);
        if rel <= opts.tol {
            return Ok(SolveOutput {
                field: complete_interior(&system.grid, &x, system.scheme),
                iterations: it,
                residual: rel,
            });
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..len {
            p[k] = z[k] + beta * p[k];
        }
    }
    let last = *history.last().unwrap();
    let verdict = if last > 10.0 * best.max(opts.tol) {
        "diverging"
    } else {
        "converging too slowly"
    };
    Err(Error::CgFailure {
        tol: opts.tol,
        maxit: opts.maxit,
        residual: last,
        verdict,
        history,
    })
}

/// Assemble the mollified right-hand side for a source and solve.
pub fn solve(
    f: &dyn Evaluable,
    grid: &Arc<GridSpec>,
    scheme: BcScheme,
    opts: CgOptions,
) -> Result<SolveOutput> {
    let rhs = assemble_rhs(f, grid)?;
    let system = LinearSystem::new(grid.clone(), scheme);
    solve_system(&system, &rhs, opts)
}
