//! Executable verifications: summation-by-parts identity probes, Poincare
//! ratios, the per-axis mollification residuals, manufactured solutions,
//! boundary-seminorm scaling, and the convergence ladders.

use crate::error::{Error, Result};
use crate::extend::{build_e_hat, face_data, CutoffProfile, TraceVariant};
use crate::field::LatticeField;
use crate::grid::GridSpec;
use crate::mollify;
use crate::norms::{
    h2h_norm, h_half_norm, hessian_inner, hessian_norm, l2h_norm, HessianField, HessianFlavor,
};
use crate::ops::{bilaplacian_interior, hessian_entry, project_to_scheme, BcScheme};
use crate::report::{ConvergenceReport, StudyEntry};
use crate::solve::{assemble_rhs, solve_system, CgOptions, LinearSystem};
use crate::sources::{extend_even, BilaplacianView, LaplacianView, Profile, TensorFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// A closed-form solution of the continuous problem with its exact source.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub u: TensorFn,
    /// Claimed Sobolev smoothness.
    pub s_tag: f64,
    /// Value and normal derivative vanish on the boundary.
    pub clamped: bool,
}

impl ManufacturedCase {
    pub fn source(&self) -> BilaplacianView<'_> {
        BilaplacianView(&self.u)
    }

    /// The exact solution sampled on the whole extended lattice (profiles
    /// with a global formula are sampled outside the cube as well).
    pub fn sample_u(&self, grid: &Arc<GridSpec>) -> LatticeField {
        LatticeField::sample(grid.clone(), |x| self.u.value(x))
    }
}

/// The registered catalogue. `sine4` and `poly-clamped` are the study
/// cases; `corner-bump` is the corner-supported case the lifted-field
/// constructions require; `zero` is the trivial case.
pub fn manufactured_pair(name: &str, n: usize) -> Result<ManufacturedCase> {
    let profile = match name {
        "sine4" => Profile::Sin2Pi,
        "poly-clamped" => Profile::ClampedQuartic,
        "corner-bump" => Profile::CornerBump,
        "zero" => Profile::Zero,
        other => return Err(Error::UnknownCase(other.to_string())),
    };
    Ok(ManufacturedCase {
        name: name.to_string(),
        u: TensorFn::product(vec![profile; n]),
        s_tag: 4.0,
        clamped: true,
    })
}

pub fn case_names() -> &'static [&'static str] {
    &["sine4", "poly-clamped", "corner-bump", "zero"]
}

/// Uniform random field on the extended lattice (ghosts included), from a
/// fixed-seed generator so probe runs are reproducible.
pub fn random_lattice_field(grid: &Arc<GridSpec>, seed: u64) -> LatticeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = LatticeField::zeros(grid.clone());
    for s in 0..grid.len() as u32 {
        f.set(s, rng.gen_range(-1.0..1.0));
    }
    f
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-30)
}

/// Residuals of the summation-by-parts identities for one flavor.
#[derive(Debug, Clone, Copy)]
pub struct SbpResiduals {
    /// Main identity, left side against a direct index-arithmetic sum.
    pub main: f64,
    /// Main identity, left side against the Hessian inner product.
    pub via_inner: f64,
    /// Worst second-difference transfer identity over the axes.
    pub transfer: f64,
    /// True when the test function had to be projected onto the flavor's
    /// boundary hypotheses.
    pub projected: bool,
}

impl SbpResiduals {
    pub fn worst(&self) -> f64 {
        self.main.max(self.via_inner).max(self.transfer)
    }
}

/// Check the summation-by-parts identities on a pair of fields.
///
/// `v` is arbitrary on the extended lattice; `phi` is projected onto the
/// boundary hypotheses of the flavor (one-sided zeros for the star flavor,
/// mirrored ghosts for the tilde flavor) before the identities are formed.
pub fn sbp_residual(
    v: &LatticeField,
    phi: &LatticeField,
    flavor: HessianFlavor,
) -> Result<SbpResiduals> {
    let grid = v.grid().clone();
    if grid.len() != phi.grid().len() || grid.dim() != phi.grid().dim() {
        return Err(Error::ShapeMismatch("sbp pair on different grids".into()));
    }
    let scheme = match flavor {
        HessianFlavor::Star => BcScheme::OneSidedZero,
        HessianFlavor::Tilde => BcScheme::CenteredMirror,
    };
    let (phi, projected) = project_to_scheme(phi, scheme);

    let n = grid.dim();
    let m = grid.m();
    let hn = grid.h().powi(n as i32);
    let h2 = grid.h() * grid.h();

    // left side: the bilaplacian paired with phi over interior and boundary
    // (the boundary terms vanish since phi is zero there)
    let bilap = bilaplacian_interior(&v.clone());
    let lhs: f64 = grid
        .interior_slots()
        .iter()
        .enumerate()
        .map(|(k, &slot)| hn * bilap[k] * phi.get(slot))
        .sum();

    // direct route: index arithmetic only, independent of the stencil tables
    let dij = |f: &LatticeField, z: &[i64], i: usize, j: usize| -> Option<f64> {
        let mut a = z.to_vec();
        a[i] += 1;
        let mut b = z.to_vec();
        b[j] -= 1;
        let mut c = z.to_vec();
        c[i] += 1;
        c[j] -= 1;
        Some((f.at_index(&a)? - f.at_index(&c)? - f.at_index(z)? + f.at_index(&b)?) / h2)
    };
    let mut rhs_direct = 0.0;
    match flavor {
        HessianFlavor::Star => {
            for &slot in grid.interior_slots().iter().chain(grid.boundary_slots()) {
                let z = grid.index_of(slot);
                for i in 0..n {
                    for j in 0..n {
                        if let (Some(a), Some(b)) = (dij(v, &z, i, j), dij(&phi, &z, i, j)) {
                            rhs_direct += hn * a * b;
                        }
                    }
                }
            }
        }
        HessianFlavor::Tilde => {
            for &slot in grid.interior_slots() {
                let z = grid.index_of(slot);
                for i in 0..n {
                    for j in 0..n {
                        rhs_direct += hn * dij(v, &z, i, j).unwrap() * dij(&phi, &z, i, j).unwrap();
                    }
                }
            }
            for &slot in grid.boundary_slots() {
                let z = grid.index_of(slot);
                for i in 0..n {
                    if z[i] == 0 || z[i] == m {
                        if let (Some(a), Some(b)) = (dij(v, &z, i, i), dij(&phi, &z, i, i)) {
                            rhs_direct += 0.5 * hn * a * b;
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
                        let z = grid.index_of(slot);
                        if let (Some(a), Some(b)) = (dij(v, &z, i, j), dij(&phi, &z, i, j)) {
                            rhs_direct += hn * a * b;
                        }
                    }
                }
            }
        }
    }

    // inner-product route
    let hv = HessianField::of(v);
    let hp = HessianField::of(&phi);
    let rhs_inner = hessian_inner(&hv, &hp, flavor)?;

    // second-difference transfer identities, one per axis
    let mut transfer: f64 = 0.0;
    for i in 0..n {
        let mut lhs_i = 0.0;
        for &slot in grid.interior_slots().iter().chain(grid.boundary_slots()) {
            if let Some(d) = hessian_entry(v, slot, i, i) {
                lhs_i += hn * d * phi.get(slot);
            }
        }
        let mut rhs_i = 0.0;
        for &slot in grid.interior_slots() {
            if let Some(d) = hessian_entry(&phi, slot, i, i) {
                rhs_i += hn * v.get(slot) * d;
            }
        }
        match flavor {
            HessianFlavor::Star => {
                for &slot in grid.boundary_slots() {
                    if let Some(d) = hessian_entry(&phi, slot, i, i) {
                        rhs_i += hn * v.get(slot) * d;
                    }
                }
            }
            HessianFlavor::Tilde => {
                for &slot in grid.boundary_slots() {
                    if let Some(d) = hessian_entry(&phi, slot, i, i) {
                        rhs_i += 0.5 * hn * v.get(slot) * d;
                    }
                }
            }
        }
        transfer = transfer.max(rel_gap(lhs_i, rhs_i));
    }

    Ok(SbpResiduals {
        main: rel_gap(lhs, rhs_direct),
        via_inner: rel_gap(lhs, rhs_inner),
        transfer,
        projected,
    })
}

/// Ratio of the Sobolev norm to the flavor's Hessian seminorm after
/// projecting onto the flavor's boundary hypotheses. The discrete Poincare
/// inequalities assert this is bounded uniformly in the spacing.
pub fn poincare_ratio(v: &LatticeField, flavor: HessianFlavor) -> Result<f64> {
    let scheme = match flavor {
        HessianFlavor::Star => BcScheme::OneSidedZero,
        HessianFlavor::Tilde => BcScheme::CenteredMirror,
    };
    let (v, _) = project_to_scheme(v, scheme);
    let num = h2h_norm(&v);
    if num == 0.0 {
        return Err(Error::InvalidArgument(
            "field vanishes after projection; ratio undefined".into(),
        ));
    }
    let den = hessian_norm(&HessianField::of(&v), flavor);
    Ok(num / den)
}

/// The per-axis residual between the discrete Laplacian of the extension
/// and the tangentially mollified exact Laplacian, on interior and boundary
/// points (zero elsewhere). Vanishes on cubic polynomials.
pub fn phi_residual(u_tilde: &TensorFn, grid: &Arc<GridSpec>, axis: usize) -> Result<LatticeField> {
    let n = grid.dim();
    if axis >= n {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} out of range for dimension {n}"
        )));
    }
    let sampled = LatticeField::sample(grid.clone(), |x| u_tilde.value(x));
    let lap_view = LaplacianView(u_tilde);
    let axes: Vec<usize> = (0..n).filter(|&a| a != axis).collect();
    let h = grid.h();
    let mut out = LatticeField::zeros(grid.clone());
    for &slot in grid.interior_slots().iter().chain(grid.boundary_slots()) {
        let lap_h = crate::ops::laplacian_at_slot(&sampled, slot)
            .expect("laplacian stencil fits on interior and boundary");
        let smoothed = mollify::smooth_at(&lap_view, &grid.point(slot), h, &axes)?;
        out.set(slot, lap_h - smoothed);
    }
    Ok(out)
}

/// L2 norm of a phi residual over interior plus boundary.
pub fn phi_l2_norm(phi: &LatticeField) -> f64 {
    let grid = phi.grid();
    let slots: Vec<u32> = grid
        .interior_slots()
        .iter()
        .chain(grid.boundary_slots())
        .copied()
        .collect();
    l2h_norm(phi, &slots)
}

/// Least-squares slope of log(error) against log(h).
pub fn fit_rate(errors: &[f64], hs: &[f64]) -> Result<f64> {
    if errors.len() != hs.len() {
        return Err(Error::ShapeMismatch(
            "rate fit needs matching error/spacing lists".into(),
        ));
    }
    if errors.len() < 2 {
        return Err(Error::InvalidArgument(
            "rate fit needs at least two ladder points".into(),
        ));
    }
    if errors.iter().chain(hs).any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "rate fit needs positive finite errors and spacings".into(),
        ));
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    Ok(num / den)
}

pub fn pairwise_rates(errors: &[f64], hs: &[f64]) -> Vec<f64> {
    errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| {
            if e[0] > 0.0 && e[1] > 0.0 {
                (e[0] / e[1]).ln() / (h[0] / h[1]).ln()
            } else {
                0.0
            }
        })
        .collect()
}

fn validate_ladder(m_list: &[i64]) -> Result<()> {
    if m_list.is_empty() {
        return Err(Error::InvalidArgument("empty resolution ladder".into()));
    }
    if m_list.iter().any(|&m| m < 4) {
        return Err(Error::GridSize("every ladder entry needs m >= 4".into()));
    }
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "resolution ladder must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Solve the scheme over a resolution ladder and fit the error rate.
///
/// A solver failure stops the ladder; the entries computed so far are
/// returned in the report together with the failure text.
pub fn convergence_study(
    case: &ManufacturedCase,
    n: usize,
    scheme: BcScheme,
    m_list: &[i64],
    tol: f64,
    maxit: Option<usize>,
) -> Result<ConvergenceReport> {
    validate_ladder(m_list)?;
    let mut entries = Vec::new();
    let mut failure = None;
    for &m in m_list {
        let grid = GridSpec::new(n, m)?;
        let opts = CgOptions {
            tol,
            maxit: maxit.unwrap_or_else(|| CgOptions::defaults_for(m).maxit),
            jacobi: false,
        };
        let source = case.source();
        let rhs = assemble_rhs(&source, &grid)?;
        let system = LinearSystem::new(grid.clone(), scheme);
        match solve_system(&system, &rhs, opts) {
            Ok(out) => {
                let exact = case.sample_u(&grid);
                let err = h2h_norm(&exact.sub(&out.field)?);
                entries.push(StudyEntry {
                    m,
                    h: grid.h(),
                    error_h2h: err,
                    cg_iters: out.iterations,
                });
            }
            Err(e) => {
                failure = Some(format!("ladder stopped at m = {m}: {e}"));
                break;
            }
        }
    }
    let errors: Vec<f64> = entries.iter().map(|e| e.error_h2h).collect();
    let hs: Vec<f64> = entries.iter().map(|e| e.h).collect();
    let degenerate = errors.iter().any(|&e| e <= 1e-14) || errors.len() < 2;
    let fitted_rate = if degenerate {
        0.0
    } else {
        fit_rate(&errors, &hs)?
    };
    Ok(ConvergenceReport {
        case: case.name.clone(),
        scheme: scheme.name().to_string(),
        entries,
        pairwise_rates: if degenerate {
            Vec::new()
        } else {
            pairwise_rates(&errors, &hs)
        },
        fitted_rate,
        failure,
    })
}

/// One ladder entry of the boundary-seminorm scaling study.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryScalingEntry {
    pub m: i64,
    pub h: f64,
    pub centered_norm: f64,
    pub one_sided_norm: f64,
}

#[derive(Debug, Clone)]
pub struct BoundaryScalingReport {
    pub case: String,
    pub entries: Vec<BoundaryScalingEntry>,
    pub centered_rate: f64,
    pub one_sided_rate: f64,
}

/// Fractional-seminorm scaling of the extension's boundary data on the face
/// normal to the last axis, across a resolution ladder.
pub fn boundary_scaling_study(
    case: &ManufacturedCase,
    n: usize,
    m_list: &[i64],
) -> Result<BoundaryScalingReport> {
    validate_ladder(m_list)?;
    if n < 2 {
        return Err(Error::InvalidArgument(
            "boundary scaling needs dimension >= 2".into(),
        ));
    }
    let u = TensorFn::product(vec![
        match case.name.as_str() {
            "sine4" => Profile::Sin2Pi,
            "poly-clamped" => Profile::ClampedQuartic,
            "corner-bump" => Profile::CornerBump,
            "zero" => Profile::Zero,
            other => return Err(Error::UnknownCase(other.into())),
        };
        n
    ]);
    let ext = extend_even(&u)?;
    let mut entries = Vec::new();
    for &m in m_list {
        let grid = GridSpec::new(n, m)?;
        let g = face_data(&ext, &grid, n - 1, TraceVariant::Centered);
        let gs = face_data(&ext, &grid, n - 1, TraceVariant::OneSided);
        entries.push(BoundaryScalingEntry {
            m,
            h: grid.h(),
            centered_norm: h_half_norm(&g),
            one_sided_norm: h_half_norm(&gs),
        });
    }
    let hs: Vec<f64> = entries.iter().map(|e| e.h).collect();
    let centered: Vec<f64> = entries.iter().map(|e| e.centered_norm).collect();
    let one_sided: Vec<f64> = entries.iter().map(|e| e.one_sided_norm).collect();
    let rate = |vals: &[f64]| -> f64 {
        if vals.iter().all(|&v| v > 1e-300) {
            fit_rate(vals, &hs).unwrap_or(0.0)
        } else {
            0.0
        }
    };
    Ok(BoundaryScalingReport {
        case: case.name.clone(),
        entries: entries.clone(),
        centered_rate: rate(&centered),
        one_sided_rate: rate(&one_sided),
    })
}

/// The rigorous triangle bound behind the error decomposition: with
/// `psi = E - E_hat`, the scheme error satisfies
/// `|H psi|_tilde <= sum_i |phi_i| + |H E_hat|`.
#[derive(Debug, Clone, Copy)]
pub struct DecompositionCheck {
    pub psi_tilde: f64,
    pub e_tilde: f64,
    pub e_hat_l2: f64,
    pub phi_sum: f64,
}

impl DecompositionCheck {
    /// The provable inequality.
    pub fn holds(&self) -> bool {
        self.psi_tilde <= (self.e_hat_l2 + self.phi_sum) * (1.0 + 1e-9) + 1e-13
    }

    /// The looser display form with the full error on the left.
    pub fn display_form_holds(&self) -> bool {
        self.e_tilde <= (self.e_hat_l2 + self.phi_sum) * (1.0 + 1e-9) + 1e-13
    }
}

/// Solve the centered scheme for a corner-supported case and evaluate the
/// error-decomposition bound.
pub fn decomposition_check(
    case: &ManufacturedCase,
    n: usize,
    m: i64,
    tol: f64,
) -> Result<DecompositionCheck> {
    let grid = GridSpec::new(n, m)?;
    let ext = extend_even(&case.u)?;
    let source = case.source();
    let rhs = assemble_rhs(&source, &grid)?;
    let system = LinearSystem::new(grid.clone(), BcScheme::CenteredMirror);
    let out = solve_system(
        &system,
        &rhs,
        CgOptions {
            tol,
            maxit: CgOptions::defaults_for(m).maxit,
            jacobi: false,
        },
    )?;
    let u_tilde = LatticeField::sample(grid.clone(), |x| ext.value(x));
    let e = u_tilde.sub(&out.field)?;
    let (e_hat, _) = build_e_hat(
        &ext,
        &grid,
        TraceVariant::Centered,
        &CutoffProfile::standard(),
    )?;
    let psi = e.sub(&e_hat)?;

    let psi_tilde = hessian_norm(&HessianField::of(&psi), HessianFlavor::Tilde);
    let e_tilde = hessian_norm(&HessianField::of(&e), HessianFlavor::Tilde);
    let e_hat_l2 = hessian_norm(&HessianField::of(&e_hat), HessianFlavor::Star);
    let mut phi_sum = 0.0;
    for axis in 0..n {
        let phi = phi_residual(&ext, &grid, axis)?;
        phi_sum += phi_l2_norm(&phi);
    }
    Ok(DecompositionCheck {
        psi_tilde,
        e_tilde,
        e_hat_l2,
        phi_sum,
    })
}

/// One line of the verification suite.
#[derive(Debug, Clone)]
pub struct ProbeLine {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl ProbeLine {
    fn check(name: &str, value: f64, threshold: f64) -> Self {
        ProbeLine {
            name: name.to_string(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }
}

/// Worst relative commutation residual over the axes for polynomial sources
/// of total degree at most 4.
pub fn commutation_probe(grid: &Arc<GridSpec>) -> Result<f64> {
    let n = grid.dim();
    let mut worst: f64 = 0.0;
    for axis in 0..n {
        let mut cases = vec![{
            let mut p = vec![Profile::Monomial(0); n];
            p[axis] = Profile::Monomial(4);
            TensorFn::product(p)
        }];
        if n > 1 {
            cases.push(TensorFn::product(vec![Profile::Monomial(2); n]));
        }
        for f in &cases {
            let d2 = crate::sources::SecondPartialView { f, axis };
            let raw = mollify::commutation_residual(f, &d2, grid, axis)?;
            // scale by the magnitude of the second difference over the grid
            let mut scale: f64 = 0.0;
            for &slot in grid.interior_slots() {
                scale = scale.max(f.d2_axis(axis, &grid.point(slot)).abs());
            }
            worst = worst.max(raw / scale.max(1e-30));
        }
    }
    Ok(worst)
}

/// The identity and operator probe suite behind `verify`: summation by
/// parts (both flavors plus transfers), commutation, inverse-trace
/// reproduction, the restriction crossing identity, operator symmetry and
/// positivity, and the Poincare ratios.
pub fn verify_suite(n: usize, m: i64, seed: u64) -> Result<Vec<ProbeLine>> {
    let grid = GridSpec::new(n, m)?;
    let mut lines = Vec::new();

    // summation-by-parts identities on fixed-seed random pairs
    for flavor in [HessianFlavor::Star, HessianFlavor::Tilde] {
        let tag = match flavor {
            HessianFlavor::Star => "star",
            HessianFlavor::Tilde => "tilde",
        };
        let mut main: f64 = 0.0;
        let mut inner: f64 = 0.0;
        let mut transfer: f64 = 0.0;
        for k in 0..20u64 {
            let v = random_lattice_field(&grid, seed.wrapping_add(2 * k));
            let phi = random_lattice_field(&grid, seed.wrapping_add(2 * k + 1));
            let r = sbp_residual(&v, &phi, flavor)?;
            main = main.max(r.main);
            inner = inner.max(r.via_inner);
            transfer = transfer.max(r.transfer);
        }
        lines.push(ProbeLine::check(&format!("sbp {tag} direct"), main, 1e-12));
        lines.push(ProbeLine::check(
            &format!("sbp {tag} inner-product"),
            inner,
            1e-12,
        ));
        lines.push(ProbeLine::check(
            &format!("sbp {tag} transfer"),
            transfer,
            1e-12,
        ));
    }

    // commutation on the 1D line and the full grid
    let mut comm = commutation_probe(&GridSpec::new(1, m)?)?;
    if n > 1 {
        comm = comm.max(commutation_probe(&grid)?);
    }
    lines.push(ProbeLine::check("mollifier commutation", comm, 1e-9));

    // inverse-trace reproduction on a random periodized face
    if n >= 2 {
        let dim = n - 1;
        let h = grid.h();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xface);
        let face =
            crate::field::FaceField::from_fn(h, vec![-m; dim], vec![(2 * m) as usize; dim], |_| {
                rng.gen_range(-1.0..1.0)
            });
        let gamma = crate::extend::FourierCoeffs::of(&face)?;
        for variant in [TraceVariant::Centered, TraceVariant::OneSided] {
            let tag = match variant {
                TraceVariant::Centered => "centered",
                TraceVariant::OneSided => "one-sided",
            };
            let slab = crate::extend::inverse_trace_range(&gamma, variant, -1, 1);
            let mut zero_defect: f64 = 0.0;
            let mut repr_defect: f64 = 0.0;
            slab.slice(0).unwrap().for_each(|p, v| {
                zero_defect = zero_defect.max(v.abs());
                let q = match variant {
                    TraceVariant::Centered => (slab.get(p, 1) - slab.get(p, -1)) / (2.0 * h),
                    TraceVariant::OneSided => (slab.get(p, 0) - slab.get(p, -1)) / h,
                };
                repr_defect = repr_defect.max((q - face.get(p)).abs());
            });
            lines.push(ProbeLine::check(
                &format!("inverse-trace {tag} face value"),
                zero_defect,
                1e-12,
            ));
            lines.push(ProbeLine::check(
                &format!("inverse-trace {tag} reproduction"),
                repr_defect,
                1e-10,
            ));
        }

        // restriction crossing identity on random face slices
        let mut crossing: f64 = 0.0;
        let h2 = h * h;
        for k in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5105 + k));
            let w = crate::field::FaceField::from_fn(
                h,
                vec![-m; dim],
                vec![(2 * m) as usize; dim],
                |p| {
                    if p[1..].iter().any(|&c| c < 1) {
                        0.0
                    } else {
                        rng.gen_range(-1.0..1.0)
                    }
                },
            );
            let r = crate::extend::project_rh(&w, crate::extend::RhVariant::Mirror);
            let d2 = |f: &crate::field::FaceField, p: &[i64]| {
                let mut up = p.to_vec();
                up[0] += 1;
                let mut dn = p.to_vec();
                dn[0] -= 1;
                (f.get(&up) - 2.0 * f.get(p) + f.get(&dn)) / h2
            };
            let mut tail = vec![1i64; dim.saturating_sub(1)];
            for _ in 0..dim.max(1) {
                let mut p = vec![0i64];
                p.extend_from_slice(&tail);
                let lhs = d2(&r, &p);
                let mut pm = p.clone();
                pm[0] = -1;
                let rhs = 2.0 * d2(&w, &p) + 4.0 * d2(&w, &pm);
                crossing = crossing.max(rel_gap(lhs, rhs));
                if let Some(t) = tail.first_mut() {
                    *t += 1;
                }
            }
        }
        lines.push(ProbeLine::check(
            "restriction crossing identity",
            crossing,
            1e-12,
        ));
    }

    // operator symmetry and positivity
    for scheme in [BcScheme::CenteredMirror, BcScheme::OneSidedZero] {
        let sys = LinearSystem::new(grid.clone(), scheme);
        let len = sys.unknowns();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xab);
        let mut asym: f64 = 0.0;
        let mut min_rayleigh = f64::INFINITY;
        for _ in 0..20 {
            let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let av = sys.apply(&v);
            let aw = sys.apply(&w);
            let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
            asym = asym.max(rel_gap(dot(&av, &w), dot(&v, &aw)));
            min_rayleigh = min_rayleigh.min(dot(&av, &v) / dot(&v, &v));
        }
        lines.push(ProbeLine::check(
            &format!("operator symmetry ({})", scheme.name()),
            asym,
            1e-12,
        ));
        lines.push(ProbeLine {
            name: format!("operator positivity ({})", scheme.name()),
            value: min_rayleigh,
            threshold: 0.0,
            pass: min_rayleigh > 0.0,
        });
    }

    // Poincare ratios stay finite
    for flavor in [HessianFlavor::Star, HessianFlavor::Tilde] {
        let tag = match flavor {
            HessianFlavor::Star => "star",
            HessianFlavor::Tilde => "tilde",
        };
        let mut worst: f64 = 0.0;
        for k in 0..10u64 {
            let v = random_lattice_field(&grid, seed.wrapping_add(0x90 + k));
            worst = worst.max(poincare_ratio(&v, flavor)?);
        }
        lines.push(ProbeLine {
            name: format!("poincare ratio ({tag})"),
            value: worst,
            threshold: f64::INFINITY,
            pass: worst.is_finite() && worst > 0.0,
        });
    }

    Ok(lines)
}
