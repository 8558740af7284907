//! The stiff ε-scaled particle system
//!
//! ```text
//! dX/dt = V/ε,   dV/dt = (ω_c/ε) ⊥V − ∇φ(X)
//! ```
//!
//! advanced by Strang splitting into an exactly solved gyration and an
//! electric kick at frozen positions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{Ensemble, Frame, Particle, PhysicalParams, TrajectoryRecord};
use crate::error::{ConfigError, Result};
use crate::geometry::{rotate, Vec2};
use crate::kernel::grad_fundamental_unchecked;
use crate::limit::fields::PARALLEL_THRESHOLD;
use crate::stepping;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitStepConfig {
    pub dt: f64,
    pub substeps_per_cyclotron_period: u32,
    /// Debug switch: with the field off the run is pure gyration.
    pub field_enabled: bool,
}

impl Default for SplitStepConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            substeps_per_cyclotron_period: 20,
            field_enabled: true,
        }
    }
}

impl SplitStepConfig {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ConfigError::SplitDt(self.dt));
        }
        if self.substeps_per_cyclotron_period < 20 {
            return Err(ConfigError::Substeps(self.substeps_per_cyclotron_period));
        }
        Ok(())
    }

    /// Largest step that still resolves `T_c^ε` with the configured
    /// number of substeps.
    pub fn max_dt(&self, params: &PhysicalParams) -> f64 {
        params.fast_cyclotron_period() / self.substeps_per_cyclotron_period as f64
    }

    pub fn validate_for(&self, params: &PhysicalParams) -> std::result::Result<(), ConfigError> {
        self.validate()?;
        let max = self.max_dt(params);
        if self.dt > max * (1.0 + 1e-12) {
            return Err(ConfigError::SplitDtTooLarge { dt: self.dt, max });
        }
        Ok(())
    }

    /// Config whose step divides `span` evenly and resolves the period.
    pub fn resolving(params: &PhysicalParams, span: f64, substeps: u32) -> Self {
        let max = params.fast_cyclotron_period() / substeps as f64;
        let n = (span / max).ceil().max(1.0);
        Self {
            dt: span / n,
            substeps_per_cyclotron_period: substeps,
            field_enabled: true,
        }
    }
}

fn field_from(particles: &[Particle], x: Vec2, delta: f64) -> Vec2 {
    let mut g = Vec2::ZERO;
    for p in particles {
        let z = x - p.pos;
        if z.x == 0.0 && z.y == 0.0 {
            continue;
        }
        g += grad_fundamental_unchecked(z, delta) * p.weight;
    }
    -g
}

/// `-∇φ(x) = -Σ_k w_k ∇e(x - x_k)`. Particles sitting exactly at `x` are
/// left out, which also removes self-interaction.
pub fn electric_field(ens: &Ensemble, x: Vec2) -> Result<Vec2> {
    ens.require_frame(Frame::Lab)?;
    Ok(field_from(&ens.particles, x, ens.params.delta))
}

fn electric_fields(particles: &[Particle], delta: f64) -> Vec<Vec2> {
    let eval = |p: &Particle| field_from(particles, p.pos, delta);
    if particles.len() >= PARALLEL_THRESHOLD {
        particles.par_iter().map(eval).collect()
    } else {
        particles.iter().map(eval).collect()
    }
}

fn gyrate(p: &Particle, params: &PhysicalParams, dt: f64) -> Particle {
    let center = p.pos + p.vel.perp() / params.omega_c;
    let vel = rotate(-params.omega_c * dt / params.epsilon, p.vel);
    Particle {
        pos: center - vel.perp() / params.omega_c,
        vel,
        weight: p.weight,
    }
}

/// Exact flow of the magnetic part over `dt`: velocities rotate by
/// `-ω_c dt/ε` and positions follow the arc about `x + ⊥v/ω_c`.
pub fn cyclotron_substep(ens: &Ensemble, dt: f64) -> Result<Ensemble> {
    ens.require_frame(Frame::Lab)?;
    let particles = ens
        .particles
        .iter()
        .map(|p| gyrate(p, &ens.params, dt))
        .collect();
    Ok(Ensemble::new(
        particles,
        ens.params,
        ens.time + dt,
        Frame::Lab,
    ))
}

/// `V ← V + dt·(-∇φ)` at frozen positions; time is not advanced.
pub fn kick_substep(ens: &Ensemble, dt: f64) -> Result<Ensemble> {
    ens.require_frame(Frame::Lab)?;
    let fields = electric_fields(&ens.particles, ens.params.delta);
    let particles = ens
        .particles
        .iter()
        .zip(fields)
        .map(|(p, e)| Particle {
            pos: p.pos,
            vel: p.vel + e * dt,
            weight: p.weight,
        })
        .collect();
    Ok(Ensemble::new(particles, ens.params, ens.time, Frame::Lab))
}

fn strang(ens: &Ensemble, cfg: &SplitStepConfig, h: f64) -> Result<Ensemble> {
    let half = cyclotron_substep(ens, 0.5 * h)?;
    let kicked = if cfg.field_enabled {
        kick_substep(&half, h)?
    } else {
        half
    };
    let mut out = cyclotron_substep(&kicked, 0.5 * h)?;
    out.time = ens.time + h;
    Ok(out)
}

/// One Strang step `cyclotron(dt/2) ∘ kick(dt) ∘ cyclotron(dt/2)`.
/// Step-size guidance is not enforced here; see [`integrate_full`].
pub fn step_full(ens: &Ensemble, cfg: &SplitStepConfig) -> Result<Ensemble> {
    cfg.validate()?;
    strang(ens, cfg, cfg.dt)
}

/// Integrate to `t_end`. The step must resolve the fast cyclotron period.
pub fn integrate_full<O>(
    ens: &Ensemble,
    cfg: &SplitStepConfig,
    t_end: f64,
    snapshot_every: Option<f64>,
    observer: O,
) -> Result<TrajectoryRecord>
where
    O: FnMut(&Ensemble),
{
    ens.require_frame(Frame::Lab)?;
    cfg.validate_for(&ens.params)?;
    stepping::drive(
        ens,
        cfg.dt,
        t_end,
        snapshot_every,
        |e, h| strang(e, cfg, h),
        observer,
    )
}

/// Gyro-frame view of a lab-frame record, snapshot by snapshot, using
/// `params` for the transformation.
pub fn filtered_trajectory(
    record: &TrajectoryRecord,
    params: &PhysicalParams,
) -> Result<TrajectoryRecord> {
    if record.frame != Frame::Lab {
        return Err(crate::Error::FrameMismatch {
            expected: Frame::Lab,
            found: record.frame,
        });
    }
    let mut out = TrajectoryRecord::new(Frame::Gyro);
    for snap in &record.snapshots {
        let mut s = snap.clone();
        s.params = *params;
        out.push(s.to_gyro_frame()?)?;
    }
    Ok(out)
}
