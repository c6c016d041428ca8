//! The minimal unfolded region: for each direction v, the smallest
//! threshold l(v) such that folding the body across every hyperplane
//! x . v = b with b >= l(v) keeps the reflected cap inside the body; the
//! region is the intersection of the halfspaces x . v <= l(v).
//!
//! With finitely many directions the computed region is an outer
//! approximation of the true one, which only weakens containment
//! assertions in the safe direction.

use rayon::prelude::*;
use thiserror::Error;

use crate::body::{fibonacci_direction, Body};

#[derive(Debug, Error)]
pub enum UnfoldedError {
    #[error("direction {0:?} is not a unit vector")]
    NonUnitDirection(Vec<f64>),
    #[error("direction_count {got} too small: need at least {need} for m = {m}")]
    TooFewDirections { got: usize, need: usize, m: usize },
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct UnfoldedRegion {
    pub directions: Vec<Vec<f64>>,
    pub thresholds: Vec<f64>,
    pub direction_count: usize,
    /// Grid tolerance the thresholds were resolved to (half a cell).
    pub tolerance: f64,
}

impl UnfoldedRegion {
    /// Membership: x . v_i <= l(v_i) + slack for every sampled direction.
    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        self.directions
            .iter()
            .zip(&self.thresholds)
            .all(|(v, &l)| dot(v, x) <= l + slack)
    }
}

pub fn uf_contains(region: &UnfoldedRegion, x: &[f64], slack: f64) -> bool {
    debug_assert!(slack >= 0.0);
    region.contains(x, slack)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Interior sample points on a uniform grid (cell centers with positive
/// signed distance).
fn interior_samples(body: &Body, resolution: usize) -> (Vec<Vec<f64>>, f64) {
    let (lo, hi) = body.bbox();
    let dim = body.dim;
    let longest = (0..dim).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
    let cell = longest / resolution as f64;
    let dims: Vec<usize> = (0..dim)
        .map(|a| (((hi[a] - lo[a]) / cell).ceil() as usize).max(1))
        .collect();
    let nz = if dim == 3 { dims[2] } else { 1 };
    let mut pts = Vec::new();
    for k in 0..nz {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let mut p = vec![0.0f64; dim];
                p[0] = lo[0] + (i as f64 + 0.5) * cell;
                p[1] = lo[1] + (j as f64 + 0.5) * cell;
                if dim == 3 {
                    p[2] = lo[2] + (k as f64 + 0.5) * cell;
                }
                if body.signed_distance(&p) > 0.0 {
                    pts.push(p);
                }
            }
        }
    }
    (pts, cell)
}

fn default_fold_resolution(dim: usize) -> usize {
    if dim <= 2 {
        256
    } else {
        56
    }
}

/// First exit time of the ray `p - t v` (t > 0) from the body, found by
/// sphere tracing (step = signed distance, floored at `min_step`) and
/// refined by bisection.  Returns `t_cap` if the ray stays inside.
fn first_exit(body: &Body, p: &[f64], v: &[f64], min_step: f64, t_cap: f64) -> f64 {
    let dim = body.dim;
    let mut q = vec![0.0f64; dim];
    let at = |q: &mut [f64], t: f64| {
        for a in 0..dim {
            q[a] = p[a] - t * v[a];
        }
    };
    let mut t_prev = 0.0f64;
    let mut t = min_step;
    while t <= t_cap {
        at(&mut q, t);
        let s = body.signed_distance(&q);
        if s < 0.0 {
            // refine the boundary crossing in (t_prev, t]
            let (mut lo, mut hi) = (t_prev, t);
            while hi - lo > min_step / 8.0 {
                let mid = 0.5 * (lo + hi);
                at(&mut q, mid);
                if body.signed_distance(&q) < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        t_prev = t;
        t += s.max(min_step);
    }
    t_cap
}

/// Smallest folding threshold for the direction v: the least l such that
/// folding the body across x . v = b keeps the cap inside the body for
/// every b >= l simultaneously.  Feasibility of a single fold is not
/// monotone in b (a symmetric body folds exactly across its symmetry
/// plane), so the threshold is computed per sample as the first exit of
/// the reflected ray: sample p constrains l > p . v - t*/2 where t* is
/// the first time p - t v leaves the body.
pub fn folding_threshold(body: &Body, v: &[f64]) -> Result<f64, UnfoldedError> {
    let (samples, cell) = interior_samples(body, default_fold_resolution(body.dim));
    folding_threshold_with_samples(body, &samples, cell, v)
}

fn folding_threshold_with_samples(
    body: &Body,
    samples: &[Vec<f64>],
    cell: f64,
    v: &[f64],
) -> Result<f64, UnfoldedError> {
    let norm = dot(v, v).sqrt();
    if (norm - 1.0).abs() > 1e-9 || v.len() != body.dim {
        return Err(UnfoldedError::NonUnitDirection(v.to_vec()));
    }
    let min_step = cell / 4.0;
    let projections: Vec<f64> = samples.iter().map(|p| dot(v, p)).collect();
    let lo0 = projections.iter().cloned().fold(f64::INFINITY, f64::min);
    // visit high-projection samples first: any sample with proj <= l
    // cannot raise the threshold, so the running max prunes most rays
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| projections[b].partial_cmp(&projections[a]).unwrap());
    let mut l = lo0;
    for i in order {
        let proj = projections[i];
        if proj <= l {
            break;
        }
        // beyond t_cap the fold plane is below every sample projection
        let t_cap = 2.0 * (proj - lo0) + 4.0 * cell;
        let t_star = first_exit(body, &samples[i], v, min_step, t_cap);
        let b_p = proj - 0.5 * t_star;
        if b_p > l {
            l = b_p;
        }
    }
    Ok(l)
}

fn equal_angle_directions(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

/// Compute the unfolded region from `direction_count` uniformly sampled
/// directions (equal angles in 2-D, Fibonacci sphere in 3-D).
pub fn unfolded_region(body: &Body, direction_count: usize) -> Result<UnfoldedRegion, UnfoldedError> {
    let need = if body.dim == 2 { 16 } else { 128 };
    if direction_count < need {
        return Err(UnfoldedError::TooFewDirections {
            got: direction_count,
            need,
            m: body.dim,
        });
    }
    let directions: Vec<Vec<f64>> = if body.dim == 2 {
        equal_angle_directions(direction_count)
    } else {
        (0..direction_count)
            .map(|i| fibonacci_direction(i, direction_count).to_vec())
            .collect()
    };
    let (samples, cell) = interior_samples(body, default_fold_resolution(body.dim));
    let thresholds: Vec<f64> = directions
        .par_iter()
        .map(|v| {
            folding_threshold_with_samples(body, &samples, cell, v).expect("unit directions")
        })
        .collect();
    Ok(UnfoldedRegion {
        direction_count,
        directions,
        thresholds,
        tolerance: cell / 2.0,
    })
}
