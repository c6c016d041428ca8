//! Locating maximizer sets ("centers") of the potentials and running the
//! containment, multiplicity, convergence, concavity, and two-body gap
//! experiments that exercise the theorems about where centers can sit.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rayon::prelude::*;
use thiserror::Error;

use crate::body::{dist, Body};
use crate::conebound::ConeError;
use crate::potentials::{evaluate, KernelSpec, KernelVariant, PotentialError};
use crate::quadrature::QuadOptions;
use crate::unfolded::UnfoldedRegion;

#[derive(Debug, Error)]
pub enum CentersError {
    #[error("admissible search region is empty")]
    EmptyAdmissibleRegion,
    #[error("point set is empty")]
    EmptySet,
    #[error("parameter sequence must be strictly decreasing and positive")]
    NonDecreasingParameters,
    #[error("concavity precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("no sample points found for the requested bands")]
    NoSamplePoints,
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

#[derive(Debug, Clone)]
pub struct CenterSet {
    /// Plateau points at the finest grid level, sorted lexicographically.
    pub points: Vec<Vec<f64>>,
    pub max_value: f64,
    pub plateau_tolerance: f64,
    pub resolution: f64,
    pub potential: KernelSpec,
    pub search_region: String,
}

impl CenterSet {
    pub fn nonempty(&self) -> bool {
        !self.points.is_empty()
    }
}

/// Evaluate the potential, treating a boundary-point rejection as "skip
/// this grid point".
fn eval_or_skip(
    body: &Body,
    spec: &KernelSpec,
    x: &[f64],
    opts: QuadOptions,
) -> Result<Option<(f64, f64)>, CentersError> {
    match evaluate(body, spec, x, opts) {
        Ok(v) => Ok(Some((v.value, v.estimated_error))),
        Err(PotentialError::BoundaryPoint { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn admissible(body: &Body, spec: &KernelSpec, x: &[f64], margin: f64) -> bool {
    match spec.variant {
        // the renormalized potential lives on interior points only
        KernelVariant::Renormalized { .. } => body.signed_distance(x) > margin,
        // bounded kernels have their maximizers in the convex hull
        _ => body.hull_contains(x),
    }
}

fn region_label(spec: &KernelSpec) -> String {
    match spec.variant {
        KernelVariant::Renormalized { .. } => "interior grid points".into(),
        _ => "convex hull of the body".into(),
    }
}

fn lattice_point(lo: &[f64; 3], step: f64, idx: &[i64; 3], dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|a| lo[a] + (idx[a] as f64 + 0.5) * step)
        .collect()
}

fn evaluate_lattice(
    body: &Body,
    spec: &KernelSpec,
    lo: &[f64; 3],
    step: f64,
    indices: &[[i64; 3]],
    opts: QuadOptions,
) -> Result<Vec<([i64; 3], f64, f64)>, CentersError> {
    let results: Vec<Result<Option<([i64; 3], f64, f64)>, CentersError>> = indices
        .par_iter()
        .map(|idx| {
            let p = lattice_point(lo, step, idx, body.dim);
            Ok(eval_or_skip(body, spec, &p, opts)?.map(|(v, e)| (*idx, v, e)))
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        if let Some(t) = r? {
            out.push(t);
        }
    }
    Ok(out)
}

/// Plateau under the given tolerance; `None` derives the default
/// tolerance, 10 x the quadrature error estimate at the incumbent
/// maximizer.
fn plateau_of(
    evaluated: &[([i64; 3], f64, f64)],
    tolerance: Option<f64>,
) -> (Vec<[i64; 3]>, f64, f64) {
    let (mut max_v, mut max_e) = (f64::NEG_INFINITY, 0.0);
    for &(_, v, e) in evaluated {
        if v > max_v {
            max_v = v;
            max_e = e;
        }
    }
    let tol = tolerance.unwrap_or(10.0 * max_e).max(1e-14 * max_v.abs());
    let pts = evaluated
        .iter()
        .filter(|&&(_, v, _)| v >= max_v - tol)
        .map(|&(i, _, _)| i)
        .collect();
    (pts, max_v, tol)
}

/// Largest value difference between lattice cells that are adjacent
/// (Chebyshev distance 1): an empirical bound on how much the potential
/// moves across one cell at this level.
fn adjacent_variation(evaluated: &[([i64; 3], f64, f64)]) -> f64 {
    let map: std::collections::HashMap<[i64; 3], f64> =
        evaluated.iter().map(|&(i, v, _)| (i, v)).collect();
    let mut worst = 0.0f64;
    for &(idx, v, _) in evaluated {
        for dk in -1i64..=1 {
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 && dk == 0 {
                        continue;
                    }
                    if let Some(&w) = map.get(&[idx[0] + di, idx[1] + dj, idx[2] + dk]) {
                        worst = worst.max((v - w).abs());
                    }
                }
            }
        }
    }
    worst
}

/// Coarse-to-fine maximizer search: three grid levels, each four times
/// finer than the last, refining around the running plateau; the final
/// level is an aligned lattice of the requested resolution so results are
/// directly comparable with the exhaustive oracle.
pub fn find_centers(
    body: &Body,
    spec: &KernelSpec,
    resolution: f64,
    plateau_tolerance: Option<f64>,
) -> Result<CenterSet, CentersError> {
    let levels = 3usize;
    let (blo, bhi) = body.bbox();
    let dim = body.dim;
    let margin = 2.0 * body.cell_size() * (dim as f64).sqrt();
    let opts = QuadOptions::coarse(dim);

    let full_lattice = |step: f64| -> Vec<[i64; 3]> {
        let mut v = Vec::new();
        let counts: Vec<i64> = (0..dim)
            .map(|a| (((bhi[a] - blo[a]) / step).ceil() as i64).max(1))
            .collect();
        let nz = if dim == 3 { counts[2] } else { 1 };
        for k in 0..nz {
            for j in 0..counts[1] {
                for i in 0..counts[0] {
                    let idx = [i, j, k];
                    let p = lattice_point(&blo, step, &idx, dim);
                    if admissible(body, spec, &p, margin) {
                        v.push(idx);
                    }
                }
            }
        }
        v
    };
    // start at the coarsest level whose lattice hits the admissible
    // region at all (thin bodies can slip between very coarse cells)
    let mut start = 0;
    let mut step = resolution * 4f64.powi(levels as i32 - 1);
    let mut candidates = full_lattice(step);
    while candidates.is_empty() && start + 1 < levels {
        start += 1;
        step /= 4.0;
        candidates = full_lattice(step);
    }
    if candidates.is_empty() {
        return Err(CentersError::EmptyAdmissibleRegion);
    }

    let mut plateau: Vec<[i64; 3]> = Vec::new();
    let mut max_v = f64::NEG_INFINITY;
    let mut tol = 0.0;
    for level in start..levels {
        let evaluated = evaluate_lattice(body, spec, &blo, step, &candidates, opts)?;
        if evaluated.is_empty() {
            return Err(CentersError::EmptyAdmissibleRegion);
        }
        // On coarse levels the lattice samples a basin off-center, so the
        // value at its best cell can sit below the max by up to one
        // cell-to-cell variation; widen the keep tolerance accordingly so
        // no basin is dropped before the final level resolves it.  The
        // coarsest level keeps everything: its few admissible cells may
        // not even be adjacent, leaving no variation estimate.
        let keep_tol = if level + 1 == levels {
            plateau_tolerance
        } else if level == start {
            Some(f64::INFINITY)
        } else {
            let base = plateau_tolerance.unwrap_or(0.0);
            Some(base.max(adjacent_variation(&evaluated)))
        };
        let (p, v, t) = plateau_of(&evaluated, keep_tol);
        plateau = p;
        max_v = v;
        tol = t;
        if level + 1 == levels {
            break;
        }
        // refine: lattice at step/4 within 1.5 x step of any plateau point
        let new_step = step / 4.0;
        let reach = (1.5 * step / new_step).ceil() as i64;
        let mut set: BTreeSet<[i64; 3]> = BTreeSet::new();
        for idx in &plateau {
            let base = [idx[0] * 4 + 1, idx[1] * 4 + 1, idx[2] * 4 + 1];
            let zr = if dim == 3 { -reach..=reach } else { 0..=0 };
            for dk in zr {
                for dj in -reach..=reach {
                    for di in -reach..=reach {
                        let c = [base[0] + di, base[1] + dj, base[2] + dk];
                        if c.iter().all(|&x| x >= 0) {
                            let p = lattice_point(&blo, new_step, &c, dim);
                            if (0..dim).all(|a| p[a] <= bhi[a])
                                && admissible(body, spec, &p, margin)
                            {
                                set.insert(c);
                            }
                        }
                    }
                }
            }
        }
        candidates = set.into_iter().collect();
        if candidates.is_empty() {
            return Err(CentersError::EmptyAdmissibleRegion);
        }
        step = new_step;
    }

    let mut points: Vec<Vec<f64>> = plateau
        .iter()
        .map(|idx| lattice_point(&blo, step, idx, dim))
        .collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    Ok(CenterSet {
        points,
        max_value: max_v,
        plateau_tolerance: tol,
        resolution,
        potential: spec.clone(),
        search_region: region_label(spec),
    })
}

/// Exhaustive single-level fine-grid argmax on the same aligned lattice:
/// the oracle guarding the coarse-to-fine search against missed basins.
pub fn exhaustive_centers(
    body: &Body,
    spec: &KernelSpec,
    resolution: f64,
    plateau_tolerance: Option<f64>,
) -> Result<CenterSet, CentersError> {
    let (blo, bhi) = body.bbox();
    let dim = body.dim;
    let margin = 2.0 * body.cell_size() * (dim as f64).sqrt();
    let step = resolution;
    let counts: Vec<i64> = (0..dim)
        .map(|a| (((bhi[a] - blo[a]) / step).ceil() as i64).max(1))
        .collect();
    let nz = if dim == 3 { counts[2] } else { 1 };
    let mut candidates = Vec::new();
    for k in 0..nz {
        for j in 0..counts[1] {
            for i in 0..counts[0] {
                let idx = [i, j, k];
                let p = lattice_point(&blo, step, &idx, dim);
                if admissible(body, spec, &p, margin) {
                    candidates.push(idx);
                }
            }
        }
    }
    if candidates.is_empty() {
        return Err(CentersError::EmptyAdmissibleRegion);
    }
    let evaluated = evaluate_lattice(body, spec, &blo, step, &candidates, QuadOptions::coarse(dim))?;
    if evaluated.is_empty() {
        return Err(CentersError::EmptyAdmissibleRegion);
    }
    let (plateau, max_v, tol) = plateau_of(&evaluated, plateau_tolerance);
    let mut points: Vec<Vec<f64>> = plateau
        .iter()
        .map(|idx| lattice_point(&blo, step, idx, dim))
        .collect();
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(CenterSet {
        points,
        max_value: max_v,
        plateau_tolerance: tol,
        resolution,
        potential: spec.clone(),
        search_region: format!("{} (exhaustive)", region_label(spec)),
    })
}

pub fn hausdorff_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64, CentersError> {
    if a.is_empty() || b.is_empty() {
        return Err(CentersError::EmptySet);
    }
    let directed = |from: &[Vec<f64>], to: &[Vec<f64>]| -> f64 {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| dist(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CenterContainment {
    pub point: Vec<f64>,
    pub in_unfolded: bool,
    pub in_inner_parallel: bool,
    pub boundary_distance: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ContainmentReport {
    pub per_center: Vec<CenterContainment>,
    pub inner_radius: f64,
    pub uf_slack: f64,
    pub all_pass: bool,
}

/// Check every center against the unfolded region (one-cell slack) and
/// the inner-parallel body of radius r_tilde (renormalized kernels) or
/// b * r_tilde (parametric kernels at small parameter).
pub fn containment_report(
    body: &Body,
    centers: &CenterSet,
    uf: &UnfoldedRegion,
    b: f64,
    r_tilde: f64,
) -> ContainmentReport {
    let inner_radius = match centers.potential.variant {
        KernelVariant::Renormalized { .. } => r_tilde,
        _ => b * r_tilde,
    };
    let uf_slack = body.cell_size().max(centers.resolution);
    let per_center: Vec<CenterContainment> = centers
        .points
        .iter()
        .map(|p| {
            let d = body.signed_distance(p);
            CenterContainment {
                point: p.clone(),
                in_unfolded: uf.contains(p, uf_slack),
                // the center lattice resolves distances to half a step
                in_inner_parallel: d >= inner_radius - centers.resolution,
                boundary_distance: d,
            }
        })
        .collect();
    let all_pass = per_center
        .iter()
        .all(|c| c.in_unfolded && c.in_inner_parallel);
    ContainmentReport { per_center, inner_radius, uf_slack, all_pass }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParametricFamily {
    Poisson,
    Heat,
}

impl ParametricFamily {
    pub fn spec(&self, dim: usize, parameter: f64) -> KernelSpec {
        let variant = match self {
            ParametricFamily::Poisson => KernelVariant::Poisson { h: parameter },
            ParametricFamily::Heat => KernelVariant::Heat { t: parameter },
        };
        KernelSpec { dim, variant }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceRecord {
    pub parameter: f64,
    pub center_set: CenterSet,
    pub hausdorff_to_reference: f64,
}

/// Center sets along a decreasing parameter sequence, with the Hausdorff
/// distance of each to a fixed reference set.
pub fn convergence_experiment(
    body: &Body,
    family: ParametricFamily,
    parameters: &[f64],
    reference: &CenterSet,
    resolution: f64,
    plateau_tolerance: Option<f64>,
) -> Result<Vec<ConvergenceRecord>, CentersError> {
    if parameters.is_empty()
        || parameters.iter().any(|&p| p <= 0.0)
        || parameters.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(CentersError::NonDecreasingParameters);
    }
    if reference.points.is_empty() {
        return Err(CentersError::EmptySet);
    }
    let mut records = Vec::new();
    for &p in parameters {
        let spec = family.spec(body.dim, p);
        let set = find_centers(body, &spec, resolution, plateau_tolerance)?;
        let d = hausdorff_distance(&set.points, &reference.points)?;
        records.push(ConvergenceRecord {
            parameter: p,
            center_set: set,
            hausdorff_to_reference: d,
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConcavityReport {
    pub trials: usize,
    pub violations: usize,
    pub min_margin: f64,
    pub single_cluster: bool,
}

/// Is the plateau one connected cluster at scale ~2.5 resolutions?
pub fn single_cluster(points: &[Vec<f64>], resolution: f64) -> bool {
    if points.len() <= 1 {
        return true;
    }
    let link = 2.5 * resolution;
    let n = points.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && dist(&points[i], &points[j]) <= link {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Midpoint-concavity probe on seeded random pairs in the inner-parallel
/// body of radius `inner_radius` (optionally intersected with the
/// unfolded region).  The kernel monotonicity precondition (k(r) r^{m-1}
/// decreasing on the relevant range, plus the height bound for the
/// normalized solid-angle kernel) is checked before probing.
#[allow(clippy::too_many_arguments)]
pub fn concavity_probe(
    body: &Body,
    spec: &KernelSpec,
    inner_radius: f64,
    uf: Option<&UnfoldedRegion>,
    trials: usize,
    seed: u64,
) -> Result<ConcavityReport, CentersError> {
    let m = body.dim;
    let d_min = inner_radius.max(1e-6);
    let d_max = body.diameter();
    check_concavity_precondition(spec, m, d_min, d_max)?;

    let (lo, hi) = body.bbox();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let opts = QuadOptions::coarse(m);
    let slack = body.cell_size();
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Option<Vec<f64>> {
        for _ in 0..10_000 {
            let p: Vec<f64> = (0..m).map(|a| rng.gen_range(lo[a]..hi[a])).collect();
            if body.signed_distance(&p) >= inner_radius
                && uf.map(|u| u.contains(&p, slack)).unwrap_or(true)
            {
                return Some(p);
            }
        }
        None
    };

    let mut violations = 0usize;
    let mut min_margin = f64::INFINITY;
    for _ in 0..trials {
        let x = draw(&mut rng).ok_or(CentersError::NoSamplePoints)?;
        let y = draw(&mut rng).ok_or(CentersError::NoSamplePoints)?;
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let (vx, ex) = eval_or_skip(body, spec, &x, opts)?.ok_or(CentersError::NoSamplePoints)?;
        let (vy, ey) = eval_or_skip(body, spec, &y, opts)?.ok_or(CentersError::NoSamplePoints)?;
        let (vm, em) =
            eval_or_skip(body, spec, &mid, opts)?.ok_or(CentersError::NoSamplePoints)?;
        let tol = em + 0.5 * (ex + ey) + 1e-12 * vm.abs().max(1.0);
        let margin = vm - 0.5 * (vx + vy);
        min_margin = min_margin.min(margin);
        if margin < -tol {
            violations += 1;
        }
    }
    Ok(ConcavityReport {
        trials,
        violations,
        min_margin,
        single_cluster: true,
    })
}

fn check_concavity_precondition(
    spec: &KernelSpec,
    m: usize,
    d_min: f64,
    d_max: f64,
) -> Result<(), CentersError> {
    // numeric monotonicity of k(r) r^{m-1} on [d_min, d_max]
    let profile: Box<dyn Fn(f64) -> f64> = match &spec.variant {
        KernelVariant::Renormalized { alpha } | KernelVariant::Riesz { alpha } => {
            let a = *alpha;
            Box::new(move |r: f64| r.powf(a - m as f64))
        }
        KernelVariant::Poisson { h } => {
            let bound = ((m as f64 - 1.0) / 2.0).sqrt() * d_min;
            if *h > bound {
                return Err(CentersError::PreconditionFailed(format!(
                    "height h = {h} exceeds the bound sqrt((m-1)/2) * d = {bound:.6}"
                )));
            }
            let hh = *h;
            Box::new(move |r: f64| (r * r + hh * hh).powf(-(m as f64 + 1.0) / 2.0))
        }
        KernelVariant::Heat { t } => {
            let tt = *t;
            Box::new(move |r: f64| (-r * r / (4.0 * tt)).exp())
        }
        KernelVariant::Custom { f, param, .. } => {
            let f = f.clone();
            let s = *param;
            Box::new(move |r: f64| f(r, s))
        }
    };
    let mut prev = f64::INFINITY;
    for i in 0..=256 {
        let r = d_min + (d_max - d_min) * i as f64 / 256.0;
        let v = profile(r) * r.powi(m as i32 - 1);
        if v > prev + 1e-12 * prev.abs() {
            return Err(CentersError::PreconditionFailed(format!(
                "k(r) r^{{m-1}} is not decreasing on [{d_min:.4}, {d_max:.4}] (rises near r = {r:.4})"
            )));
        }
        prev = v;
    }
    Ok(())
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GapReport {
    pub deep_min: f64,
    pub shallow_max: f64,
    pub margin: f64,
    pub deep_count: usize,
    pub shallow_count: usize,
    pub pass: bool,
}

/// Two-body comparison at a small parameter: every point of X at depth
/// >= R0 must beat every point within the b * r_tilde band around the
/// boundary of Y (interior and exterior sides).
pub fn small_parameter_gap_check(
    x_body: &Body,
    y_body: &Body,
    r0: f64,
    b: f64,
    family: ParametricFamily,
    parameter: f64,
) -> Result<GapReport, CentersError> {
    assert!(b > 0.0 && b < 1.0, "need 0 < b < 1");
    let m = x_body.dim;
    // r_tilde for Y from its cone data; the profile order for both
    // normalized families is alpha = -1.
    let p = crate::conebound::EParams {
        alpha: -1.0,
        kappa: y_body.cone.kappa,
        delta: y_body.cone.delta,
        d: y_body.diameter(),
        r0: y_body.inradius(),
        m,
    };
    let r_tilde = crate::conebound::r_tilde(&p, 1e-6 * y_body.inradius())?;
    let band = b * r_tilde;

    let deep = band_points(x_body, |s| s >= r0, 40)?;
    // both sides of the boundary of Y
    let shallow = band_points(y_body, |s| s.abs() <= band, 40)?;
    if deep.is_empty() || shallow.is_empty() {
        return Err(CentersError::NoSamplePoints);
    }
    let opts = QuadOptions::coarse(m);
    let spec_x = family.spec(m, parameter);
    let mut deep_min = f64::INFINITY;
    for pt in &deep {
        let (v, _) = eval_or_skip(x_body, &spec_x, pt, opts)?.ok_or(CentersError::NoSamplePoints)?;
        deep_min = deep_min.min(v);
    }
    let spec_y = family.spec(m, parameter);
    let mut shallow_max = f64::NEG_INFINITY;
    for pt in &shallow {
        let (v, _) = eval_or_skip(y_body, &spec_y, pt, opts)?.ok_or(CentersError::NoSamplePoints)?;
        shallow_max = shallow_max.max(v);
    }
    Ok(GapReport {
        deep_min,
        shallow_max,
        margin: deep_min - shallow_max,
        deep_count: deep.len(),
        shallow_count: shallow.len(),
        pass: deep_min > shallow_max,
    })
}

fn band_points<F: Fn(f64) -> bool>(
    body: &Body,
    keep: F,
    max_points: usize,
) -> Result<Vec<Vec<f64>>, CentersError> {
    let (lo, hi) = body.bbox();
    let dim = body.dim;
    let res = if dim == 2 { 96 } else { 32 };
    let cell = (0..dim)
        .map(|a| hi[a] - lo[a])
        .fold(0.0, f64::max)
        / res as f64;
    let dims: Vec<usize> = (0..dim)
        .map(|a| (((hi[a] - lo[a]) / cell).ceil() as usize + 2).max(1))
        .collect();
    let nz = if dim == 3 { dims[2] } else { 1 };
    let mut pts = Vec::new();
    for k in 0..nz {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let mut p = vec![0.0f64; dim];
                p[0] = lo[0] + (i as f64) * cell - 0.5 * cell;
                p[1] = lo[1] + (j as f64) * cell - 0.5 * cell;
                if dim == 3 {
                    p[2] = lo[2] + (k as f64) * cell - 0.5 * cell;
                }
                if keep(body.signed_distance(&p)) {
                    pts.push(p);
                }
            }
        }
    }
    if pts.len() > max_points {
        let stride = pts.len() / max_points;
        pts = pts.into_iter().step_by(stride.max(1)).collect();
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn renorm(dim: usize, alpha: f64) -> KernelSpec {
        KernelSpec { dim, variant: KernelVariant::Renormalized { alpha } }
    }

    fn poisson(dim: usize, h: f64) -> KernelSpec {
        KernelSpec { dim, variant: KernelVariant::Poisson { h } }
    }

    #[test]
    fn ball_center_is_the_origin() {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        for spec in [renorm(2, -1.0), poisson(2, 0.5)] {
            let set = find_centers(&b, &spec, 0.02, Some(1e-4)).unwrap();
            assert!(set.nonempty());
            for p in &set.points {
                assert!(
                    dist(p, &[0.0, 0.0]) <= 2.0 * 0.02,
                    "center {p:?} away from origin for {spec:?}"
                );
            }
        }
    }

    #[test]
    fn hausdorff_basics() {
        let a = vec![vec![0.0, 0.0]];
        let b = vec![vec![3.0, 0.0]];
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 3.0);
        let c = vec![vec![-1.0, 0.0], vec![1.0, 0.0]];
        assert_eq!(hausdorff_distance(&c, &a).unwrap(), 1.0);
        assert!(matches!(
            hausdorff_distance(&a, &[]),
            Err(CentersError::EmptySet)
        ));
    }

    #[test]
    fn coarse_to_fine_matches_exhaustive_oracle() {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let spec = renorm(2, -1.0);
        let fast = find_centers(&b, &spec, 0.04, Some(1e-4)).unwrap();
        let slow = exhaustive_centers(&b, &spec, 0.04, Some(1e-4)).unwrap();
        let d = hausdorff_distance(&fast.points, &slow.points).unwrap();
        assert!(d <= 0.04 + 1e-9, "hausdorff {d}");
    }

    #[test]
    fn symmetric_body_gives_symmetric_centers() {
        let b = Body::dumbbell(0.2).unwrap();
        let set = find_centers(&b, &renorm(2, -1.0), 0.05, Some(1e-3)).unwrap();
        // reflection x -> -x maps the plateau to itself within resolution
        for p in &set.points {
            let q = vec![-p[0], p[1]];
            let d = set
                .points
                .iter()
                .map(|r| dist(r, &q))
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 1.5 * 0.05, "no mirror partner for {p:?}");
        }
    }

    #[test]
    fn convergence_rejects_bad_parameters() {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let reference = find_centers(&b, &renorm(2, -1.0), 0.05, Some(1e-3)).unwrap();
        assert!(matches!(
            convergence_experiment(&b, ParametricFamily::Poisson, &[0.1, 0.2], &reference, 0.05, None),
            Err(CentersError::NonDecreasingParameters)
        ));
    }

    #[test]
    fn concavity_on_ball_has_no_violations() {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let spec = poisson(2, 0.05);
        let rep = concavity_probe(&b, &spec, 0.3, None, 40, 7).unwrap();
        assert_eq!(rep.violations, 0, "margins down to {}", rep.min_margin);
    }

    #[test]
    fn concavity_precondition_rejects_tall_heights() {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let spec = poisson(2, 5.0);
        assert!(matches!(
            concavity_probe(&b, &spec, 0.3, None, 10, 7),
            Err(CentersError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn degenerate_pair_is_equality() {
        // x = y: midpoint concavity holds with margin ~ 0 by construction;
        // covered via a direct evaluation identity
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let spec = poisson(2, 0.1);
        let opts = QuadOptions::coarse(2);
        let x = [0.2, -0.1];
        let (v1, _) = eval_or_skip(&b, &spec, &x, opts).unwrap().unwrap();
        let (v2, _) = eval_or_skip(&b, &spec, &x, opts).unwrap().unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn gap_check_on_ball() {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let rep =
            small_parameter_gap_check(&b, &b, 0.9, 0.5, ParametricFamily::Poisson, 1e-2).unwrap();
        assert!(rep.pass, "margin {}", rep.margin);
    }

    #[test]
    fn cluster_detection() {
        let pts = vec![vec![0.0, 0.0], vec![0.02, 0.0], vec![0.04, 0.0]];
        assert!(single_cluster(&pts, 0.01));
        let split = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert!(!single_cluster(&split, 0.01));
    }
}
