//! Direct-summation evaluation of the effective potential and of the
//! velocity and acceleration fields of the gyro-averaged dynamics.
//!
//! For a target `(x̃, ṽ)` and a partner `k` with `ξ = x̃ - x̃_k`,
//! `η = ṽ - ṽ_k`:
//!
//! ```text
//! 𝓥 = -(1/ω_c) Σ_k w_k ⊥∇e(ξ)        over pairs with |ξ| > |η|/|ω_c|
//! 𝓐 =          Σ_k w_k ⊥∇e(η/ω_c)    over pairs with |ξ| ≤ |η|/|ω_c|
//! ```
//!
//! which equals `-(1/ω_c) ⊥∇_x̃ φ̃` and `ω_c ⊥∇_ṽ φ̃` respectively.

use rayon::prelude::*;

use crate::ensemble::{Ensemble, Frame, Particle, PhysicalParams};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::kernel::{grad_fundamental_unchecked, gyro_kernel, spatial_branch};

/// Below this many targets, field evaluation stays on the calling thread.
pub(crate) const PARALLEL_THRESHOLD: usize = 256;

/// Effective velocity and acceleration at one phase point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub velocity: Vec2,
    pub acceleration: Vec2,
}

/// Running sums of the two gated gradient families, before the `⊥` and
/// prefactors are applied.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct GradSums {
    /// `Σ w_k ∇e(ξ_k)` over spatial-branch partners.
    pub spatial: Vec2,
    /// `Σ w_k ∇e(η_k/ω_c)` over velocity-branch partners.
    pub velocity: Vec2,
}

impl GradSums {
    #[inline]
    pub fn add_pair(&mut self, xi: Vec2, eta: Vec2, weight: f64, params: &PhysicalParams) {
        self.add_on_branch(
            spatial_branch(xi, eta, params.omega_c),
            xi,
            eta,
            weight,
            params,
        );
    }

    #[inline]
    pub fn add_on_branch(
        &mut self,
        spatial: bool,
        xi: Vec2,
        eta: Vec2,
        weight: f64,
        params: &PhysicalParams,
    ) {
        if spatial {
            self.spatial += grad_fundamental_unchecked(xi, params.delta) * weight;
        } else {
            self.velocity +=
                grad_fundamental_unchecked(eta / params.omega_c, params.delta) * weight;
        }
    }

    #[inline]
    pub fn into_sample(self, omega_c: f64) -> FieldSample {
        FieldSample {
            velocity: self.spatial.perp() * (-1.0 / omega_c),
            acceleration: self.velocity.perp(),
        }
    }
}

#[inline]
pub(crate) fn coincident(xi: Vec2, eta: Vec2, delta: f64) -> bool {
    delta == 0.0 && xi == Vec2::ZERO && eta == Vec2::ZERO
}

/// Field at `(pos, vel)` due to every particle except `skip`, with the
/// branch of each partner `k` chosen by `spatial(k, ξ, η)`.
fn field_with_branches<G>(
    particles: &[Particle],
    pos: Vec2,
    vel: Vec2,
    skip: Option<usize>,
    params: &PhysicalParams,
    spatial: G,
) -> Result<FieldSample>
where
    G: Fn(usize, Vec2, Vec2) -> bool,
{
    let mut sums = GradSums::default();
    for (k, p) in particles.iter().enumerate() {
        if Some(k) == skip {
            continue;
        }
        let xi = pos - p.pos;
        let eta = vel - p.vel;
        if coincident(xi, eta, params.delta) {
            return Err(Error::Coincidence(skip.unwrap_or(usize::MAX), k));
        }
        sums.add_on_branch(spatial(k, xi, eta), xi, eta, p.weight, params);
    }
    Ok(sums.into_sample(params.omega_c))
}

/// Field at `(pos, vel)` due to every particle except `skip`.
pub(crate) fn field_from_particles(
    particles: &[Particle],
    pos: Vec2,
    vel: Vec2,
    skip: Option<usize>,
    params: &PhysicalParams,
) -> Result<FieldSample> {
    field_with_branches(particles, pos, vel, skip, params, |_, xi, eta| {
        spatial_branch(xi, eta, params.omega_c)
    })
}

/// Fields at every particle with the branch of pair `(j, k)` prescribed
/// by `spatial(j, k)` instead of the indicator.
pub(crate) fn fields_with_branches<G>(
    particles: &[Particle],
    params: &PhysicalParams,
    spatial: G,
) -> Result<Vec<FieldSample>>
where
    G: Fn(usize, usize) -> bool + Sync,
{
    let eval = |j: usize| {
        let p = &particles[j];
        field_with_branches(particles, p.pos, p.vel, Some(j), params, |k, _, _| {
            spatial(j, k)
        })
    };
    if particles.len() >= PARALLEL_THRESHOLD {
        (0..particles.len()).into_par_iter().map(eval).collect()
    } else {
        (0..particles.len()).map(eval).collect()
    }
}

/// Fields at every particle, self-interaction excluded.
pub(crate) fn fields_of_particles(
    particles: &[Particle],
    params: &PhysicalParams,
) -> Result<Vec<FieldSample>> {
    let eval = |j: usize| {
        let p = &particles[j];
        field_from_particles(particles, p.pos, p.vel, Some(j), params)
    };
    if particles.len() >= PARALLEL_THRESHOLD {
        (0..particles.len()).into_par_iter().map(eval).collect()
    } else {
        (0..particles.len()).map(eval).collect()
    }
}

/// Effective potential `φ̃(x̃, ṽ) = Σ_k w_k 𝓔(x̃ - x̃_k, ṽ - ṽ_k)`.
/// Particles sitting exactly at the query point are left out.
pub fn potential_tilde(ens: &Ensemble, xt: Vec2, vt: Vec2) -> Result<f64> {
    ens.require_frame(Frame::Gyro)?;
    let mut phi = 0.0;
    for p in &ens.particles {
        if p.pos == xt && p.vel == vt {
            continue;
        }
        phi += p.weight * gyro_kernel(xt - p.pos, vt - p.vel, &ens.params)?;
    }
    Ok(phi)
}

/// Potential at an arbitrary phase point with particle `skip` left out.
/// Used to differentiate the potential seen by one particle.
pub fn potential_excluding(ens: &Ensemble, xt: Vec2, vt: Vec2, skip: usize) -> Result<f64> {
    ens.require_frame(Frame::Gyro)?;
    let mut phi = 0.0;
    for (k, p) in ens.particles.iter().enumerate() {
        if k == skip {
            continue;
        }
        phi += p.weight * gyro_kernel(xt - p.pos, vt - p.vel, &ens.params)?;
    }
    Ok(phi)
}

/// Fields at an arbitrary phase point, optionally leaving one particle out.
pub fn field_at(ens: &Ensemble, xt: Vec2, vt: Vec2, skip: Option<usize>) -> Result<FieldSample> {
    ens.require_frame(Frame::Gyro)?;
    field_from_particles(&ens.particles, xt, vt, skip, &ens.params)
}

fn particle_field(ens: &Ensemble, j: usize) -> Result<FieldSample> {
    ens.require_frame(Frame::Gyro)?;
    let p = ens
        .particles
        .get(j)
        .ok_or_else(|| Error::InvalidParameter(format!("particle index {j} out of range")))?;
    field_from_particles(&ens.particles, p.pos, p.vel, Some(j), &ens.params)
}

/// `𝓥` at particle `j`.
pub fn velocity_field(ens: &Ensemble, j: usize) -> Result<Vec2> {
    Ok(particle_field(ens, j)?.velocity)
}

/// `𝓐` at particle `j`.
pub fn acceleration_field(ens: &Ensemble, j: usize) -> Result<Vec2> {
    Ok(particle_field(ens, j)?.acceleration)
}

/// Both fields at every particle.
pub fn fields(ens: &Ensemble) -> Result<Vec<FieldSample>> {
    ens.require_frame(Frame::Gyro)?;
    fields_of_particles(&ens.particles, &ens.params)
}
