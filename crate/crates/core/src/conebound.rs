//! Cone-exclusion bounds: the integral of |xi|^(alpha - m) over a rotated
//! cone intersected with a ball, the comparison function E(R) against an
//! annulus, its unique zero r_tilde, and the closed-form profile available
//! for alpha = -1 with a half-space cone.
//!
//! Everything here is closed-form-plus-quadrature on smooth integrands, so
//! the module is generic over the scalar type.

use rayon::prelude::*;
use thiserror::Error;

use crate::scalar::{gauss_legendre_on, sin_power_integral, sphere_measure, Scalar};

#[derive(Debug, Error)]
pub enum ConeError {
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("unsupported dimension m = {m}: rotated cone integrals are implemented for m in {{2, 3}}")]
    UnsupportedDimension { m: usize },
    #[error(
        "rotation-minimality hypothesis violated: delta = {delta} lies strictly between \
         D - R = {lo} and sqrt(D^2 - R^2) = {hi}; the minimum at theta = 0 is not guaranteed there"
    )]
    HypothesisViolated { delta: f64, lo: f64, hi: f64 },
    #[error(
        "bracketing failed while isolating the zero of E: E({at}) = {value} has the wrong sign \
         (quadrature failure, since E must diverge to +inf as R -> 0)"
    )]
    BracketingFailed { at: f64, value: f64 },
}

/// Parameters of the cone-ball integral.  `delta` may be infinite; the
/// ball of radius `d` caps the cone either way.
#[derive(Debug, Clone, Copy)]
pub struct ConeIntegralParams<S: Scalar> {
    pub alpha: S,
    pub kappa: S,
    pub delta: S,
    pub theta: S,
    pub r: S,
    pub d: S,
    pub m: usize,
}

impl<S: Scalar> ConeIntegralParams<S> {
    fn validate(&self) -> Result<(), ConeError> {
        let pi = S::PI();
        if self.m < 2 {
            return Err(ConeError::UnsupportedDimension { m: self.m });
        }
        if !(self.kappa > S::zero() && self.kappa <= pi) {
            return Err(ConeError::InvalidRange(format!(
                "kappa = {} must lie in (0, pi]",
                self.kappa.as_f64()
            )));
        }
        if !(self.delta > S::zero()) {
            return Err(ConeError::InvalidRange(format!(
                "delta = {} must be positive (inf allowed)",
                self.delta.as_f64()
            )));
        }
        let theta_max = (pi - self.kappa) * S::of(0.5);
        if !(self.theta >= S::zero() && self.theta <= theta_max + S::of(1e-12)) {
            return Err(ConeError::InvalidRange(format!(
                "theta = {} must lie in [0, (pi - kappa)/2 = {}]",
                self.theta.as_f64(),
                theta_max.as_f64()
            )));
        }
        if !(self.r > S::zero() && self.d > S::zero() && self.r < self.d) {
            return Err(ConeError::InvalidRange(format!(
                "need 0 < R < D, got R = {}, D = {}",
                self.r.as_f64(),
                self.d.as_f64()
            )));
        }
        Ok(())
    }
}

/// Radial cap: largest rho with |R e1 + rho u|^2 <= D^2 for a direction u
/// whose component along e1 is `c` (c >= 0 throughout since the cone
/// aperture never crosses the equator).
fn rho_cap<S: Scalar>(r: S, d: S, c: S) -> S {
    -r * c + (r * r * c * c - r * r + d * d).sqrt()
}

/// Geometric radial panels from 0 to `hi` adapted to the transition
/// scale `r`.
fn rho_panels<S: Scalar>(r: S, hi: S) -> Vec<(S, S)> {
    let mut edges = vec![S::zero()];
    let mut e = r * S::of(0.5);
    while e < hi {
        edges.push(e);
        e = e * S::of(2.0);
        if edges.len() > 40 {
            break;
        }
    }
    edges.push(hi);
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Integral of |xi|^(alpha - m) over the rotated cone C_theta(R e1)
/// intersected with the ball B_D(0).
pub fn cone_ball_integral<S: Scalar>(p: &ConeIntegralParams<S>) -> Result<S, ConeError> {
    p.validate()?;
    if p.theta == S::zero() {
        return Ok(axial_integral(p));
    }
    match p.m {
        2 => Ok(rotated_integral_2d(p)),
        3 => Ok(rotated_integral_3d(p)),
        m => Err(ConeError::UnsupportedDimension { m }),
    }
}

/// theta = 0: axial symmetry reduces to (phi1, rho) with weight
/// sigma_{m-2}(S^{m-2}) rho^{m-1} sin^{m-2}(phi1); for m = 2 the measure
/// sigma_0(S^0) = 2 accounts for both signs of phi1.
fn axial_integral<S: Scalar>(p: &ConeIntegralParams<S>) -> S {
    let m = p.m;
    let exponent = (p.alpha - S::of_usize(m)) * S::of(0.5);
    let half = p.kappa * S::of(0.5);
    let sigma = sphere_measure::<S>(m - 2);
    let n_phi_panels = 8;
    let phi_rule: Vec<(S, S)> = (0..n_phi_panels)
        .flat_map(|i| {
            let a = half * S::of_usize(i) / S::of_usize(n_phi_panels);
            let b = half * S::of_usize(i + 1) / S::of_usize(n_phi_panels);
            gauss_legendre_on::<S>(24, a, b)
        })
        .collect();
    let mut total = S::zero();
    for &(phi, wphi) in &phi_rule {
        let c = phi.cos();
        let hi = rho_cap(p.r, p.d, c).min(p.delta);
        if hi <= S::zero() {
            continue;
        }
        let sin_w = if m == 2 {
            S::one()
        } else {
            phi.sin().powi(m as i32 - 2)
        };
        let mut inner = S::zero();
        for (a, b) in rho_panels(p.r, hi) {
            for (rho, wr) in gauss_legendre_on::<S>(24, a, b) {
                let q2 = rho * rho + p.r * p.r + S::of(2.0) * rho * p.r * c;
                inner = inner + wr * q2.powf(exponent) * rho.powi(m as i32 - 1);
            }
        }
        total = total + wphi * sin_w * inner;
    }
    sigma * total
}

/// theta > 0, m = 2: the angular variable runs over (-kappa/2, kappa/2)
/// and the axis is rotated by theta, so the e1-component is
/// cos(phi1 + theta).
fn rotated_integral_2d<S: Scalar>(p: &ConeIntegralParams<S>) -> S {
    let exponent = (p.alpha - S::of(2.0)) * S::of(0.5);
    let half = p.kappa * S::of(0.5);
    let n_panels = 8;
    let mut total = S::zero();
    for i in 0..n_panels {
        let a = -half + p.kappa * S::of_usize(i) / S::of_usize(n_panels);
        let b = -half + p.kappa * S::of_usize(i + 1) / S::of_usize(n_panels);
        for (phi, wphi) in gauss_legendre_on::<S>(24, a, b) {
            let c = (phi + p.theta).cos();
            let hi = rho_cap(p.r, p.d, c).min(p.delta);
            if hi <= S::zero() {
                continue;
            }
            let mut inner = S::zero();
            for (pa, pb) in rho_panels(p.r, hi) {
                for (rho, wr) in gauss_legendre_on::<S>(24, pa, pb) {
                    let q2 = rho * rho + p.r * p.r + S::of(2.0) * rho * p.r * c;
                    inner = inner + wr * q2.powf(exponent) * rho;
                }
            }
            total = total + wphi * inner;
        }
    }
    total
}

/// theta > 0, m = 3: spherical coordinates on the cone directions with the
/// rotated e1-component cos(theta) cos(phi1) - sin(theta) sin(phi1) sin(phi2).
fn rotated_integral_3d<S: Scalar>(p: &ConeIntegralParams<S>) -> S {
    let exponent = (p.alpha - S::of(3.0)) * S::of(0.5);
    let half = p.kappa * S::of(0.5);
    let (st, ct) = (p.theta.sin(), p.theta.cos());
    let n_phi2 = 48usize;
    let w_phi2 = S::of(2.0) * S::PI() / S::of_usize(n_phi2);
    let phi1_rule: Vec<(S, S)> = (0..6)
        .flat_map(|i| {
            let a = half * S::of_usize(i) / S::of(6.0);
            let b = half * S::of_usize(i + 1) / S::of(6.0);
            gauss_legendre_on::<S>(16, a, b)
        })
        .collect();
    let mut total = S::zero();
    for j in 0..n_phi2 {
        let phi2 = S::of(2.0) * S::PI() * (S::of_usize(j) + S::of(0.5)) / S::of_usize(n_phi2);
        for &(phi1, wphi1) in &phi1_rule {
            let (s1, c1) = (phi1.sin(), phi1.cos());
            let c = ct * c1 - st * s1 * phi2.sin();
            let hi = rho_cap(p.r, p.d, c).min(p.delta);
            if hi <= S::zero() {
                continue;
            }
            let mut inner = S::zero();
            for (pa, pb) in rho_panels(p.r, hi) {
                for (rho, wr) in gauss_legendre_on::<S>(16, pa, pb) {
                    let q2 = rho * rho + p.r * p.r + S::of(2.0) * rho * p.r * c;
                    inner = inner + wr * q2.powf(exponent) * rho * rho;
                }
            }
            total = total + w_phi2 * wphi1 * s1 * inner;
        }
    }
    total
}

/// Does the hypothesis guaranteeing the minimum at theta = 0 hold?
/// Required: delta <= D - R or delta >= sqrt(D^2 - R^2).
pub fn rotation_hypothesis_holds<S: Scalar>(delta: S, d: S, r: S) -> bool {
    delta <= d - r || delta * delta >= d * d - r * r
}

#[derive(Debug, Clone)]
pub struct RotationReport<S: Scalar> {
    pub thetas: Vec<S>,
    pub values: Vec<S>,
    pub min_at_zero: bool,
    pub tolerance: S,
}

/// Sweep a theta grid and assert that theta = 0 attains the minimum
/// within quadrature tolerance.  Refuses parameter sets where the
/// guaranteeing hypothesis fails.
pub fn verify_rotation_minimality<S: Scalar>(
    base: &ConeIntegralParams<S>,
    theta_samples: usize,
) -> Result<RotationReport<S>, ConeError> {
    let mut p0 = *base;
    p0.theta = S::zero();
    p0.validate()?;
    if base.m > 3 {
        return Err(ConeError::UnsupportedDimension { m: base.m });
    }
    if !rotation_hypothesis_holds(base.delta, base.d, base.r) {
        return Err(ConeError::HypothesisViolated {
            delta: base.delta.as_f64(),
            lo: (base.d - base.r).as_f64(),
            hi: (base.d * base.d - base.r * base.r).sqrt().as_f64(),
        });
    }
    let theta_max = (S::PI() - base.kappa) * S::of(0.5);
    let thetas: Vec<S> = (0..theta_samples)
        .map(|i| theta_max * S::of_usize(i) / S::of_usize(theta_samples.max(2) - 1))
        .collect();
    let values: Vec<S> = thetas
        .par_iter()
        .map(|&t| {
            let mut p = *base;
            p.theta = t;
            cone_ball_integral(&p).expect("validated parameters")
        })
        .collect();
    let v0 = values[0];
    let tolerance = v0.abs() * S::of(1e-5) + S::of(1e-10);
    let min_at_zero = values.iter().all(|&v| v0 <= v + tolerance);
    Ok(RotationReport { thetas, values, min_at_zero, tolerance })
}

/// Comparison-function parameters: E(R) = min over theta of the
/// cone-ball integral minus the annulus integral from R0 to D.
#[derive(Debug, Clone, Copy)]
pub struct EParams<S: Scalar> {
    pub alpha: S,
    pub kappa: S,
    pub delta: S,
    pub d: S,
    pub r0: S,
    pub m: usize,
}

impl<S: Scalar> EParams<S> {
    fn validate(&self) -> Result<(), ConeError> {
        if !(self.r0 > S::zero() && self.r0 <= self.d) {
            return Err(ConeError::InvalidRange(format!(
                "need 0 < R0 <= D, got R0 = {}, D = {}",
                self.r0.as_f64(),
                self.d.as_f64()
            )));
        }
        Ok(())
    }

    /// sigma(S^{m-1}) * integral of r^(alpha - 1) from R0 to D.
    fn annulus_term(&self) -> S {
        let sigma = sphere_measure::<S>(self.m - 1);
        if self.alpha == S::zero() {
            sigma * (self.d / self.r0).ln()
        } else {
            sigma * (self.d.powf(self.alpha) - self.r0.powf(self.alpha)) / self.alpha
        }
    }
}

/// E(R) with a flag saying whether the minimum over rotations was taken
/// numerically on a theta grid (true only when the theta = 0 guarantee
/// does not apply).
pub fn e_value_flagged<S: Scalar>(p: &EParams<S>, r: S) -> Result<(S, bool), ConeError> {
    p.validate()?;
    let mut cone = ConeIntegralParams {
        alpha: p.alpha,
        kappa: p.kappa,
        delta: p.delta,
        theta: S::zero(),
        r,
        d: p.d,
        m: p.m,
    };
    cone.validate()?;
    if rotation_hypothesis_holds(p.delta, p.d, r) {
        let v = cone_ball_integral(&cone)?;
        Ok((v - p.annulus_term(), false))
    } else {
        // The guarantee is silent in the middle delta range: take an
        // explicit minimum over a 32-point theta grid.
        let theta_max = (S::PI() - p.kappa) * S::of(0.5);
        let mut best = S::infinity();
        for i in 0..32 {
            cone.theta = theta_max * S::of_usize(i) / S::of(31.0);
            let v = cone_ball_integral(&cone)?;
            if v < best {
                best = v;
            }
        }
        Ok((best - p.annulus_term(), true))
    }
}

pub fn e_value<S: Scalar>(p: &EParams<S>, r: S) -> Result<S, ConeError> {
    e_value_flagged(p, r).map(|(v, _)| v)
}

#[derive(Debug, Clone)]
pub struct EProfile<S: Scalar> {
    pub r_samples: Vec<S>,
    pub e_values: Vec<S>,
    pub r_tilde: S,
    pub bracket: (S, S),
    pub tolerance: S,
    /// True if any sample needed the numeric theta-grid minimum.
    pub theta_min_numeric: bool,
}

/// Unique zero of E by bisection on (lo, R0); lo halves from R0/2 until
/// E(lo) > 0.
pub fn r_tilde<S: Scalar>(p: &EParams<S>, tolerance: S) -> Result<S, ConeError> {
    p.validate()?;
    if !(tolerance > S::zero()) {
        return Err(ConeError::InvalidRange("tolerance must be positive".into()));
    }
    let mut lo = p.r0 * S::of(0.5);
    let floor = p.r0 * S::of(1e-6);
    loop {
        let v = e_value(p, lo)?;
        if v > S::zero() {
            break;
        }
        lo = lo * S::of(0.5);
        if lo < floor {
            return Err(ConeError::BracketingFailed { at: lo.as_f64(), value: v.as_f64() });
        }
    }
    // E(R0) < 0 is guaranteed; fail loudly if quadrature disagrees.
    let mut hi = p.r0.min(p.d * S::of(0.999999));
    let vhi = e_value(p, hi)?;
    if vhi >= S::zero() {
        return Err(ConeError::BracketingFailed { at: hi.as_f64(), value: vhi.as_f64() });
    }
    while hi - lo > tolerance {
        let mid = (hi + lo) * S::of(0.5);
        if e_value(p, mid)? > S::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((hi + lo) * S::of(0.5))
}

/// Full E profile over `samples` radii plus the located zero.
pub fn e_profile<S: Scalar>(
    p: &EParams<S>,
    samples: usize,
    tolerance: S,
) -> Result<EProfile<S>, ConeError> {
    let root = r_tilde(p, tolerance)?;
    let lo = p.r0 * S::of(0.05);
    let hi = (p.r0 * S::of(2.0)).min(p.d * S::of(0.95));
    let r_samples: Vec<S> = (0..samples)
        .map(|i| lo + (hi - lo) * S::of_usize(i) / S::of_usize(samples - 1))
        .collect();
    let evals: Vec<(S, bool)> = r_samples
        .par_iter()
        .map(|&r| e_value_flagged(p, r).expect("validated parameters"))
        .collect();
    let theta_min_numeric = evals.iter().any(|&(_, f)| f);
    Ok(EProfile {
        r_samples,
        e_values: evals.into_iter().map(|(v, _)| v).collect(),
        r_tilde: root,
        bracket: (root - tolerance, root + tolerance),
        tolerance,
        theta_min_numeric,
    })
}

/// Closed form for alpha = -1, kappa = pi, delta = inf:
/// E(R) = (sigma_{m-2}(S^{m-2}) / R) * f(R) with
/// f(R) = sin^{m-1}(phi)/(m-1) + (R/D) int_phi^pi sin^{m-2}
///        - (R/R0) int_0^pi sin^{m-2},  phi = arccos(R/D).
/// Returns (E, f, f').
pub fn appendix_e_closed_form<S: Scalar>(
    r: S,
    d: S,
    r0: S,
    m: usize,
) -> Result<(S, S, S), ConeError> {
    if !(r > S::zero() && r < d && r0 > S::zero() && r0 <= d && m >= 2) {
        return Err(ConeError::InvalidRange(format!(
            "need 0 < R < D and 0 < R0 <= D, got R = {}, D = {}, R0 = {}",
            r.as_f64(),
            d.as_f64(),
            r0.as_f64()
        )));
    }
    let phi = (r / d).acos();
    let tail = sin_power_integral::<S>(m - 2, phi, S::PI());
    let full = sin_power_integral::<S>(m - 2, S::zero(), S::PI());
    let f = phi.sin().powi(m as i32 - 1) / S::of_usize(m - 1) + (r / d) * tail - (r / r0) * full;
    let f_prime = tail / d - full / r0;
    let e = sphere_measure::<S>(m - 2) / r * f;
    Ok((e, f, f_prime))
}

/// Root of the closed-form f by bisection (f is strictly decreasing with
/// f(0+) = 1/(m-1) > 0).
pub fn appendix_root<S: Scalar>(d: S, r0: S, m: usize, tolerance: S) -> Result<S, ConeError> {
    let mut lo = r0 * S::of(1e-9);
    let mut hi = r0;
    let flo = appendix_e_closed_form(lo, d, r0, m)?.1;
    let fhi = appendix_e_closed_form(hi, d, r0, m)?.1;
    if !(flo > S::zero() && fhi < S::zero()) {
        return Err(ConeError::BracketingFailed { at: hi.as_f64(), value: fhi.as_f64() });
    }
    while hi - lo > tolerance {
        let mid = (hi + lo) * S::of(0.5);
        if appendix_e_closed_form(mid, d, r0, m)?.1 > S::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((hi + lo) * S::of(0.5))
}

/// Closed-form lower bound on the zero for alpha = -1, kappa = pi,
/// delta = inf: R0 / (2 (m-1) int_0^{pi/2} sin^{m-2}); equals R0/pi for
/// m = 2 and R0/4 for m = 3.
pub fn lower_bound_r_tilde<S: Scalar>(r0: S, m: usize) -> S {
    let half = sin_power_integral::<S>(m - 2, S::zero(), S::PI() * S::of(0.5));
    r0 / (S::of(2.0) * S::of_usize(m - 1) * half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params(alpha: f64, kappa: f64, delta: f64, theta: f64, r: f64, d: f64, m: usize) -> ConeIntegralParams<f64> {
        ConeIntegralParams { alpha, kappa, delta, theta, r, d, m }
    }

    #[test]
    fn empty_cone_limits() {
        let v = cone_ball_integral(&params(-1.0, 1e-6, f64::INFINITY, 0.0, 0.5, 3.0, 2)).unwrap();
        assert!(v < 1e-5, "kappa -> 0 gives {v}");
        let v = cone_ball_integral(&params(-1.0, PI / 2.0, 1e-6, 0.0, 0.5, 3.0, 2)).unwrap();
        assert!(v < 1e-5, "delta -> 0 gives {v}");
    }

    #[test]
    fn axial_integral_matches_polar_oracle() {
        // m=2, alpha=-1, kappa=pi, delta=inf, theta=0:
        // 2 int_0^{phi(R)} int_{R/cos t}^{D} r^{-2} dr dt
        //   + (the part of the cone where the ray exits B_D before the
        //      cone boundary is exactly captured by phi(R) = arccos(R/D))
        // Oracle derived by the polar substitution centered at the origin:
        // 2 int_0^{pi/2} [1/max(R cos... )]  -- use the explicit form
        // 2 int_0^{phi} (cos t / R - 1/D) dt with phi = arccos(R/D).
        let r = 0.4f64;
        let d = 6.0f64;
        let phi = (r / d).acos();
        let oracle = 2.0 * ((phi.sin() / r) - phi / d);
        let v = cone_ball_integral(&params(-1.0, PI, f64::INFINITY, 0.0, r, d, 2)).unwrap();
        assert_relative_eq!(v, oracle, max_relative = 1e-8);
    }

    #[test]
    fn rotated_integral_continuous_at_theta_zero() {
        for &m in &[2usize, 3] {
            let p0 = params(-1.0, PI / 2.0, f64::INFINITY, 0.0, 0.5, 3.0, m);
            let v0 = cone_ball_integral(&p0).unwrap();
            let mut p1 = p0;
            p1.theta = 1e-7;
            let v1 = cone_ball_integral(&p1).unwrap();
            assert_relative_eq!(v0, v1, max_relative = 1e-5);
        }
    }

    #[test]
    fn rotation_minimality_reports() {
        let base = params(-1.0, PI / 2.0, f64::INFINITY, 0.0, 0.5, 3.0, 2);
        let rep = verify_rotation_minimality(&base, 16).unwrap();
        assert!(rep.min_at_zero, "values {:?}", rep.values);
        // alpha = 0 with a short cone, delta <= D - R
        let base = params(0.0, PI / 2.0, 0.3, 0.0, 0.5, 3.0, 2);
        let rep = verify_rotation_minimality(&base, 16).unwrap();
        assert!(rep.min_at_zero);
        // boundary case delta = D - R accepted
        let base = params(-1.0, PI / 2.0, 2.5, 0.0, 0.5, 3.0, 2);
        assert!(verify_rotation_minimality(&base, 8).unwrap().min_at_zero);
        // middle range refused
        let base = params(-1.0, PI / 2.0, 2.7, 0.0, 0.5, 3.0, 2);
        assert!(matches!(
            verify_rotation_minimality(&base, 8),
            Err(ConeError::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn e_sign_and_monotonicity() {
        let p = EParams { alpha: -1.0, kappa: PI, delta: f64::INFINITY, d: 6.0, r0: 1.0, m: 2 };
        // E(R) < 0 for R >= R0
        assert!(e_value(&p, 1.0).unwrap() < 0.0);
        assert!(e_value(&p, 1.5).unwrap() < 0.0);
        // R0 = D: annulus term zero, E > 0 for small R
        let pd = EParams { alpha: -1.0, kappa: PI, delta: f64::INFINITY, d: 6.0, r0: 6.0, m: 2 };
        assert!(e_value(&pd, 0.1).unwrap() > 0.0);
        // strict decrease on sampled pairs
        let mut prev = f64::INFINITY;
        for i in 1..=20 {
            let r = 0.1 + 0.2 * i as f64;
            let v = e_value(&p, r).unwrap();
            assert!(v < prev, "E not decreasing at R = {r}");
            prev = v;
        }
    }

    #[test]
    fn r_tilde_matches_appendix_root() {
        let p = EParams { alpha: -1.0, kappa: PI, delta: f64::INFINITY, d: 6.0, r0: 1.0, m: 2 };
        let root = r_tilde(&p, 1e-7).unwrap();
        let oracle = appendix_root(6.0, 1.0, 2, 1e-9).unwrap();
        assert!((root - oracle).abs() < 1e-4, "numeric {root} vs closed form {oracle}");
        assert!(root > 1.0 / PI && root < 1.0);
    }

    #[test]
    fn closed_form_agrees_with_quadrature() {
        for &m in &[2usize, 3] {
            let p = EParams {
                alpha: -1.0,
                kappa: PI,
                delta: f64::INFINITY,
                d: 6.0,
                r0: 1.0,
                m,
            };
            for &r in &[0.2, 0.5, 0.9] {
                let numeric = e_value(&p, r).unwrap();
                let (closed, _, _) = appendix_e_closed_form(r, 6.0, 1.0, m).unwrap();
                assert_relative_eq!(numeric, closed, max_relative = 1e-6, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn appendix_derivatives() {
        // f' < 0 everywhere sampled; f'' > 0 by finite differences
        let (d, r0, m) = (6.0, 1.0, 2);
        let mut prev_fp = f64::NEG_INFINITY;
        for i in 1..40 {
            let r = 0.1 + 0.14 * i as f64;
            let (_, _, fp) = appendix_e_closed_form(r, d, r0, m).unwrap();
            assert!(fp < 0.0, "f' >= 0 at R = {r}");
            assert!(fp > prev_fp, "f'' <= 0 near R = {r}");
            prev_fp = fp;
        }
        // lower bound -f(0)/f'(0) <= root
        let eps = 1e-9;
        let (_, f0, fp0) = appendix_e_closed_form(eps, d, r0, m).unwrap();
        let bound = -f0 / fp0;
        let root = appendix_root(d, r0, m, 1e-10).unwrap();
        assert!(bound <= root + 1e-6, "bound {bound} vs root {root}");
        assert!(lower_bound_r_tilde(1.0, 2) <= bound + 1e-6);
    }

    #[test]
    fn lower_bound_closed_forms() {
        assert_relative_eq!(lower_bound_r_tilde::<f64>(1.0, 2), 1.0 / PI, epsilon = 1e-14);
        assert_relative_eq!(lower_bound_r_tilde::<f64>(1.0, 3), 0.25, epsilon = 1e-14);
        assert_relative_eq!(lower_bound_r_tilde::<f64>(2.5, 2), 2.5 / PI, epsilon = 1e-14);
    }

    #[test]
    fn f32_path_agrees_with_f64() {
        let root32 = appendix_root::<f32>(6.0, 1.0, 2, 1e-4).unwrap();
        let root64 = appendix_root::<f64>(6.0, 1.0, 2, 1e-9).unwrap();
        assert!((root32 as f64 - root64).abs() < 1e-3);
        let lb32 = lower_bound_r_tilde::<f32>(1.0, 2);
        assert!((lb32 as f64 - 1.0 / PI).abs() < 1e-6);
    }

    #[test]
    fn profile_brackets_root() {
        let p = EParams { alpha: -1.0, kappa: PI / 2.0, delta: 0.5, d: 6.0, r0: 1.0, m: 2 };
        let prof = e_profile(&p, 50, 1e-6).unwrap();
        assert!(prof.r_tilde < p.r0);
        assert!(e_value(&p, prof.r_tilde - 1e-3).unwrap() > 0.0);
        assert!(e_value(&p, prof.r_tilde + 1e-3).unwrap() < 0.0);
        let mut prev = f64::INFINITY;
        for &v in &prof.e_values {
            assert!(v < prev);
            prev = v;
        }
    }
}
