//! The planar Laplace fundamental solution and the cyclotron-averaged
//! interaction kernel built from it.
//!
//! Averaging `e(ξ - ω_c⁻¹ R(θ) ⊥η)` over a full turn of `θ` yields, by the
//! mean-value property of harmonic functions, a kernel that equals `e(ξ)`
//! when the gyration circle of radius `|η|/|ω_c|` around `ξ` excludes the
//! origin and `e(η/ω_c)` otherwise. The closed form is evaluated by
//! [`gyro_kernel`]; [`gyro_average_oracle`] computes the defining average by
//! quadrature and serves as an independent check.
//!
//! Regularization replaces `|z|` by `sqrt(|z|² + δ²)` inside `e` and `∇e`
//! only. The indicator radii are never regularized.

use std::f64::consts::{PI, TAU};

use crate::ensemble::PhysicalParams;
use crate::error::{Error, Result};
use crate::geometry::{rotate, Vec2};

const INV_2PI: f64 = 1.0 / TAU;
const INV_4PI: f64 = 0.25 / PI;

/// Value of the averaged kernel together with its two gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: f64,
    pub grad_xi: Vec2,
    pub grad_eta: Vec2,
}

/// `e(z) = -(1/2π) ln sqrt(|z|² + δ²)`.
pub fn fundamental_solution(z: Vec2, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        if z == Vec2::ZERO {
            return Err(Error::Domain(
                "fundamental solution evaluated at z = 0".into(),
            ));
        }
        Ok(-z.norm().ln() * INV_2PI)
    } else {
        Ok(-(z.norm_sq() + delta * delta).ln() * INV_4PI)
    }
}

/// `∇e(z) = -z / (2π (|z|² + δ²))`.
pub fn grad_fundamental(z: Vec2, delta: f64) -> Result<Vec2> {
    let r2 = z.norm_sq() + delta * delta;
    if r2 == 0.0 {
        return Err(Error::Domain(
            "gradient of the fundamental solution evaluated at z = 0".into(),
        ));
    }
    Ok(z * (-INV_2PI / r2))
}

/// Unchecked `∇e`; callers guarantee `|z|² + δ² > 0`.
#[inline]
pub(crate) fn grad_fundamental_unchecked(z: Vec2, delta: f64) -> Vec2 {
    z * (-INV_2PI / (z.norm_sq() + delta * delta))
}

/// True when the pair interacts through the spatial branch,
/// `|ξ| > |η|/|ω_c|`. Ties go to the velocity branch.
#[inline]
pub fn spatial_branch(xi: Vec2, eta: Vec2, omega_c: f64) -> bool {
    xi.norm_sq() * (omega_c * omega_c) > eta.norm_sq()
}

fn check_origin(xi: Vec2, eta: Vec2, delta: f64) -> Result<()> {
    if delta == 0.0 && xi == Vec2::ZERO && eta == Vec2::ZERO {
        Err(Error::Domain(
            "averaged kernel evaluated at ξ = η = 0".into(),
        ))
    } else {
        Ok(())
    }
}

/// Closed form of the cyclotron-averaged kernel:
/// `e(η/ω_c)` if `|ξ| ≤ |η|/|ω_c|`, else `e(ξ)`.
pub fn gyro_kernel(xi: Vec2, eta: Vec2, params: &PhysicalParams) -> Result<f64> {
    check_origin(xi, eta, params.delta)?;
    if spatial_branch(xi, eta, params.omega_c) {
        fundamental_solution(xi, params.delta)
    } else {
        fundamental_solution(eta / params.omega_c, params.delta)
    }
}

/// Kernel value and gradients. Exactly one of the gradients is nonzero:
/// `∇_ξ = ∇e(ξ)` on the spatial branch, `∇_η = ω_c⁻¹ ∇e(η/ω_c)` on the
/// velocity branch.
pub fn gyro_kernel_gradients(xi: Vec2, eta: Vec2, params: &PhysicalParams) -> Result<KernelEval> {
    check_origin(xi, eta, params.delta)?;
    let delta = params.delta;
    if spatial_branch(xi, eta, params.omega_c) {
        Ok(KernelEval {
            value: fundamental_solution(xi, delta)?,
            grad_xi: grad_fundamental(xi, delta)?,
            grad_eta: Vec2::ZERO,
        })
    } else {
        let scaled = eta / params.omega_c;
        Ok(KernelEval {
            value: fundamental_solution(scaled, delta)?,
            grad_xi: Vec2::ZERO,
            grad_eta: grad_fundamental(scaled, delta)? / params.omega_c,
        })
    }
}

/// Nodes closer than this to the singularity of `e` are rejected when
/// `δ = 0`.
const SINGULARITY_MARGIN: f64 = 1e-12;

/// Grading order of the node-clustering substitution used for circles
/// passing close to the origin.
const GRADING_ORDER: i32 = 6;

/// Circle average `(1/2π) ∫ e(ξ - ω_c⁻¹ R(θ) ⊥η) dθ` by quadrature.
///
/// When the integrand is comfortably smooth the plain trapezoidal rule on
/// `n_nodes` equispaced angles is used. When the circle passes near the
/// origin, the trapezoidal rule is instead applied in a graded periodic
/// variable whose nodes cluster around the angle closest to the origin.
pub fn gyro_average_oracle(
    xi: Vec2,
    eta: Vec2,
    params: &PhysicalParams,
    n_nodes: usize,
) -> Result<f64> {
    if n_nodes < 8 {
        return Err(Error::InvalidParameter(format!(
            "n_nodes must be at least 8, got {n_nodes}"
        )));
    }
    let delta = params.delta;
    let inv_omega = 1.0 / params.omega_c;
    let eta_perp = eta.perp();
    let point = |theta: f64| xi - rotate(theta, eta_perp) * inv_omega;
    let integrand = |theta: f64| -> Result<f64> {
        let z = point(theta);
        if delta == 0.0 && z.norm() < SINGULARITY_MARGIN {
            return Err(Error::Domain(format!(
                "quadrature node at θ = {theta} lies on the singularity of e"
            )));
        }
        fundamental_solution(z, delta)
    };

    let radius = eta.norm() * inv_omega.abs();
    let center = xi.norm();
    let n = n_nodes as f64;
    let smooth = if radius == 0.0 || center == 0.0 {
        true
    } else {
        let ratio = radius.min(center) / radius.max(center);
        // Trapezoidal error on this integrand decays like ratio^n.
        n * ratio.ln() < -40.0
    };

    if smooth {
        let mut sum = 0.0;
        for k in 0..n_nodes {
            sum += integrand(TAU * k as f64 / n)?;
        }
        return Ok(sum / n);
    }

    // The graded rule places its (zero-weight) first node at the angle of
    // closest approach.
    if delta == 0.0 && (center - radius).abs() < SINGULARITY_MARGIN {
        return Err(Error::Domain(
            "gyration circle passes through the singularity of e".into(),
        ));
    }
    // Angle at which the circle comes closest to the origin: the circle
    // point equals xi + radius * u with u = -ξ/|ξ|.
    let target = xi * (params.omega_c.signum() / center);
    let nearest = target.y.atan2(target.x) - eta_perp.y.atan2(eta_perp.x);

    let mut sum = 0.0;
    for k in 1..n_nodes {
        let s = TAU * k as f64 / n;
        let (offset, jac) = graded_angle(s);
        sum += jac * integrand(nearest + offset)?;
    }
    Ok(sum / n)
}

/// Sigmoidal substitution `θ = w(s)` on `[0, 2π]` with `w^(j)(0) = 0` for
/// `j < GRADING_ORDER`. Returns `(w(s), w'(s))`.
fn graded_angle(s: f64) -> (f64, f64) {
    let p = GRADING_ORDER;
    let pf = p as f64;
    let v = |s: f64| {
        let u = (PI - s) / PI;
        (1.0 / pf - 0.5) * u * u * u + (s - PI) / (pf * PI) + 0.5
    };
    let dv = |s: f64| {
        let u = (PI - s) / PI;
        -3.0 / PI * (1.0 / pf - 0.5) * u * u + 1.0 / (pf * PI)
    };
    let (a, b) = (v(s), v(TAU - s));
    let (ap, bp) = (a.powi(p), b.powi(p));
    let denom = ap + bp;
    let w = TAU * ap / denom;
    let dw = TAU * pf * (a.powi(p - 1) * dv(s) * bp + ap * b.powi(p - 1) * dv(TAU - s))
        / (denom * denom);
    (w, dw)
}
