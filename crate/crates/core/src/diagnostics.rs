//! Conserved quantities of the gyro-averaged system, the pairwise
//! conservation identity, and trajectory comparison.

use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::{Ensemble, Frame, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::kernel::{grad_fundamental, gyro_kernel, spatial_branch};
use crate::limit::fields::PARALLEL_THRESHOLD;

/// Weighted sums `Σ w_j ψ(x̃_j, ṽ_j)` for `ψ ∈ {1, x̃, ṽ, |x̃|², |ṽ|²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    pub mass: f64,
    pub mean_pos: Vec2,
    pub mean_vel: Vec2,
    pub pos_sq: f64,
    pub vel_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub electric: f64,
    pub kinetic: f64,
}

pub fn moments(ens: &Ensemble) -> Result<MomentSet> {
    ens.require_frame(Frame::Gyro)?;
    if ens.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut m = MomentSet {
        mass: 0.0,
        mean_pos: Vec2::ZERO,
        mean_vel: Vec2::ZERO,
        pos_sq: 0.0,
        vel_sq: 0.0,
    };
    for p in &ens.particles {
        m.mass += p.weight;
        m.mean_pos += p.pos * p.weight;
        m.mean_vel += p.vel * p.weight;
        m.pos_sq += p.weight * p.pos.norm_sq();
        m.vel_sq += p.weight * p.vel.norm_sq();
    }
    Ok(m)
}

/// `½ Σ_{j≠k} w_j w_k 𝓔(x̃_j − x̃_k, ṽ_j − ṽ_k)`, summed once per unordered
/// pair since the kernel is even.
pub fn electric_energy(ens: &Ensemble) -> Result<f64> {
    ens.require_frame(Frame::Gyro)?;
    let ps = &ens.particles;
    let row = |j: usize| -> Result<f64> {
        let mut acc = 0.0;
        for k in j + 1..ps.len() {
            let e = gyro_kernel(ps[j].pos - ps[k].pos, ps[j].vel - ps[k].vel, &ens.params)
                .map_err(|_| Error::Coincidence(j, k))?;
            acc += ps[k].weight * e;
        }
        Ok(ps[j].weight * acc)
    };
    let rows: Vec<f64> = if ps.len() >= PARALLEL_THRESHOLD {
        (0..ps.len())
            .into_par_iter()
            .map(row)
            .collect::<Result<_>>()?
    } else {
        (0..ps.len()).map(row).collect::<Result<_>>()?
    };
    Ok(rows.iter().sum())
}

pub fn kinetic_energy(ens: &Ensemble) -> Result<f64> {
    ens.require_frame(Frame::Gyro)?;
    Ok(0.5
        * ens
            .particles
            .iter()
            .map(|p| p.weight * p.vel.norm_sq())
            .sum::<f64>())
}

pub fn energy(ens: &Ensemble) -> Result<EnergyReport> {
    Ok(EnergyReport {
        electric: electric_energy(ens)?,
        kinetic: kinetic_energy(ens)?,
    })
}

/// Pairwise-symmetrized right-hand side of the weak conservation identity,
/// equal to `2 d/dt Σ_j w_j ψ(x̃_j, ṽ_j)` along the limit dynamics. `psi`
/// returns `(∇_x̃ψ, ∇_ṽψ)` at a phase point.
pub fn eq41_rhs<F>(ens: &Ensemble, psi: F) -> Result<f64>
where
    F: Fn(Vec2, Vec2) -> (Vec2, Vec2),
{
    ens.require_frame(Frame::Gyro)?;
    let ps = &ens.particles;
    let omega_c = ens.params.omega_c;
    let delta = ens.params.delta;
    let grads: Vec<(Vec2, Vec2)> = ps.iter().map(|p| psi(p.pos, p.vel)).collect();
    let mut total = 0.0;
    for (j, pj) in ps.iter().enumerate() {
        for (k, pk) in ps.iter().enumerate() {
            if j == k {
                continue;
            }
            let (xi, eta) = (pj.pos - pk.pos, pj.vel - pk.vel);
            let ww = pj.weight * pk.weight;
            if spatial_branch(xi, eta, omega_c) {
                let g = grad_fundamental(xi, delta).map_err(|_| Error::Coincidence(j, k))?;
                total += ww * (grads[k].0 - grads[j].0).dot(g.perp()) / omega_c;
            } else {
                let g =
                    grad_fundamental(eta / omega_c, delta).map_err(|_| Error::Coincidence(j, k))?;
                total += ww * (grads[j].1 - grads[k].1).dot(g.perp());
            }
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrajectoryMetric {
    /// Weighted RMS over matched markers.
    #[default]
    Rms,
    /// Largest single-marker distance.
    Sup,
}

fn check_matched(a: &TrajectoryRecord, b: &TrajectoryRecord) -> Result<()> {
    for r in [a, b] {
        if r.frame != Frame::Gyro {
            return Err(Error::FrameMismatch {
                expected: Frame::Gyro,
                found: r.frame,
            });
        }
    }
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Error::Mismatch(format!(
            "snapshot counts differ: {} vs {}",
            a.snapshots.len(),
            b.snapshots.len()
        )));
    }
    for (i, (sa, sb)) in a.snapshots.iter().zip(&b.snapshots).enumerate() {
        if (sa.time - sb.time).abs() > 1e-9 * sa.time.abs().max(1.0) {
            return Err(Error::Mismatch(format!(
                "snapshot {i} times differ: {} vs {}",
                sa.time, sb.time
            )));
        }
        if sa.len() != sb.len() {
            return Err(Error::Mismatch(format!(
                "snapshot {i} particle counts differ: {} vs {}",
                sa.len(),
                sb.len()
            )));
        }
    }
    Ok(())
}

/// Sup over snapshots of the distance between matched markers in
/// `(x̃, ṽ)`, positions and velocities weighted equally.
pub fn trajectory_error_with(
    a: &TrajectoryRecord,
    b: &TrajectoryRecord,
    metric: TrajectoryMetric,
) -> Result<f64> {
    check_matched(a, b)?;
    let mut worst = 0.0f64;
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        let d2 = sa
            .particles
            .iter()
            .zip(&sb.particles)
            .map(|(p, q)| (p.pos - q.pos).norm_sq() + (p.vel - q.vel).norm_sq());
        let e = match metric {
            TrajectoryMetric::Rms => {
                let (num, den) = d2.zip(&sb.particles).fold((0.0, 0.0), |(n, d), (s, q)| {
                    (n + q.weight * s, d + q.weight)
                });
                if den > 0.0 {
                    (num / den).sqrt()
                } else {
                    0.0
                }
            }
            TrajectoryMetric::Sup => d2.fold(0.0, f64::max).sqrt(),
        };
        worst = worst.max(e);
    }
    Ok(worst)
}

pub fn trajectory_error(filtered: &TrajectoryRecord, limit: &TrajectoryRecord) -> Result<f64> {
    trajectory_error_with(filtered, limit, TrajectoryMetric::Rms)
}

/// One row of the diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagRow {
    pub time: f64,
    pub moments: MomentSet,
    pub energy: EnergyReport,
}

/// Relative changes of the conserved quantities between two rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Drift {
    pub mass: f64,
    pub mean_pos: f64,
    pub mean_vel: f64,
    pub pos_sq: f64,
    pub vel_sq: f64,
    pub electric: f64,
}

impl Drift {
    /// Largest of the non-mass drifts.
    pub fn max_nonmass(&self) -> f64 {
        [
            self.mean_pos,
            self.mean_vel,
            self.pos_sq,
            self.vel_sq,
            self.electric,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn rel(change: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        change / reference
    } else {
        change
    }
}

impl DiagRow {
    pub fn of(ens: &Ensemble) -> Result<Self> {
        Ok(Self {
            time: ens.time,
            moments: moments(ens)?,
            energy: energy(ens)?,
        })
    }

    /// Drift of `self` relative to `base`. Vector moments are normalized by
    /// `max(|Q₀|, √(mass·second moment))` so that an initially centred
    /// ensemble does not divide by zero.
    pub fn drift_from(&self, base: &DiagRow) -> Drift {
        let (m, b) = (&self.moments, &base.moments);
        let pos_scale = b.mean_pos.norm().max((b.mass * b.pos_sq).sqrt());
        let vel_scale = b.mean_vel.norm().max((b.mass * b.vel_sq).sqrt());
        Drift {
            mass: rel((m.mass - b.mass).abs(), b.mass.abs()),
            mean_pos: rel((m.mean_pos - b.mean_pos).norm(), pos_scale),
            mean_vel: rel((m.mean_vel - b.mean_vel).norm(), vel_scale),
            pos_sq: rel((m.pos_sq - b.pos_sq).abs(), b.pos_sq.abs()),
            vel_sq: rel((m.vel_sq - b.vel_sq).abs(), b.vel_sq.abs()),
            electric: rel(
                (self.energy.electric - base.energy.electric).abs(),
                base.energy.electric.abs(),
            ),
        }
    }
}

/// Largest drift of each quantity over a series of rows, relative to the first.
pub fn max_drift(rows: &[DiagRow]) -> Option<Drift> {
    let base = rows.first()?;
    let mut out = base.drift_from(base);
    for r in rows {
        let d = r.drift_from(base);
        out.mass = out.mass.max(d.mass);
        out.mean_pos = out.mean_pos.max(d.mean_pos);
        out.mean_vel = out.mean_vel.max(d.mean_vel);
        out.pos_sq = out.pos_sq.max(d.pos_sq);
        out.vel_sq = out.vel_sq.max(d.vel_sq);
        out.electric = out.electric.max(d.electric);
    }
    Some(out)
}
