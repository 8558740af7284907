//! Time integration of the effective characteristics
//! `dX̃/dt = 𝓥[f̃](X̃, Ṽ)`, `dṼ/dt = 𝓐[f̃](X̃, Ṽ)` for all markers at once,
//! with the fields recomputed from the current stage state.

use serde::{Deserialize, Serialize};

use crate::ensemble::{Ensemble, Frame, Particle, PhysicalParams, TrajectoryRecord};
use crate::error::{ConfigError, Error, Result};
use crate::limit::fields::{fields_of_particles, FieldSample};
use crate::limit::gates::Gates;
use crate::limit::tree::{QuadTree, TreeOptions};
use crate::stepping;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rk4,
    ImplicitMidpoint,
}

/// How the pairwise field sums are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Summation {
    Direct,
    /// Quadtree with multipole far field for gate-open cells.
    Tree {
        mac_theta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub midpoint_tol: f64,
    pub midpoint_max_iters: usize,
    pub summation: Summation,
    /// With direct summation, stop at the instants where a pair switches
    /// branch instead of stepping across the jump in the field.
    pub locate_gate_crossings: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Rk4,
            dt: 1e-3,
            midpoint_tol: 1e-13,
            midpoint_max_iters: 100,
            summation: Summation::Direct,
            locate_gate_crossings: true,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn implicit_midpoint(dt: f64) -> Self {
        Self {
            scheme: Scheme::ImplicitMidpoint,
            dt,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ConfigError::IntegratorDt(self.dt));
        }
        if !(self.midpoint_tol.is_finite() && self.midpoint_tol > 0.0) {
            return Err(ConfigError::MidpointTol(self.midpoint_tol));
        }
        if self.midpoint_max_iters == 0 {
            return Err(ConfigError::MidpointMaxIters);
        }
        if let Summation::Tree { mac_theta } = self.summation {
            if !(0.0..1.0).contains(&mac_theta) {
                return Err(ConfigError::MacTheta(mac_theta));
            }
        }
        Ok(())
    }
}

/// Field used during one stage evaluation.
#[derive(Clone, Copy)]
enum Field<'a> {
    /// Branches from the indicator at each stage state.
    Live(Summation),
    /// Branches frozen by a pattern.
    Frozen(&'a Gates),
}

fn evaluate(
    particles: &[Particle],
    params: &PhysicalParams,
    field: Field,
) -> Result<Vec<FieldSample>> {
    match field {
        Field::Live(Summation::Direct) => fields_of_particles(particles, params),
        Field::Live(Summation::Tree { mac_theta }) => {
            let tree = QuadTree::build(particles, TreeOptions::default());
            tree.fields(particles, params, mac_theta)
        }
        Field::Frozen(gates) => gates.fields(particles, params),
    }
}

fn displaced(base: &[Particle], k: &[FieldSample], h: f64) -> Vec<Particle> {
    base.iter()
        .zip(k)
        .map(|(p, f)| Particle {
            pos: p.pos + f.velocity * h,
            vel: p.vel + f.acceleration * h,
            weight: p.weight,
        })
        .collect()
}

fn rk4(
    particles: &[Particle],
    params: &PhysicalParams,
    field: Field,
    h: f64,
) -> Result<Vec<Particle>> {
    let k1 = evaluate(particles, params, field)?;
    let k2 = evaluate(&displaced(particles, &k1, 0.5 * h), params, field)?;
    let k3 = evaluate(&displaced(particles, &k2, 0.5 * h), params, field)?;
    let k4 = evaluate(&displaced(particles, &k3, h), params, field)?;
    let c = h / 6.0;
    Ok(particles
        .iter()
        .enumerate()
        .map(|(j, p)| Particle {
            pos: p.pos
                + (k1[j].velocity + (k2[j].velocity + k3[j].velocity) * 2.0 + k4[j].velocity) * c,
            vel: p.vel
                + (k1[j].acceleration
                    + (k2[j].acceleration + k3[j].acceleration) * 2.0
                    + k4[j].acceleration)
                    * c,
            weight: p.weight,
        })
        .collect())
}

fn implicit_midpoint(
    particles: &[Particle],
    params: &PhysicalParams,
    cfg: &IntegratorConfig,
    field: Field,
    h: f64,
) -> Result<Vec<Particle>> {
    let k0 = evaluate(particles, params, field)?;
    let mut next = displaced(particles, &k0, h);
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.midpoint_max_iters {
        let mid: Vec<Particle> = particles
            .iter()
            .zip(&next)
            .map(|(a, b)| Particle {
                pos: (a.pos + b.pos) * 0.5,
                vel: (a.vel + b.vel) * 0.5,
                weight: a.weight,
            })
            .collect();
        let k = evaluate(&mid, params, field)?;
        let candidate = displaced(particles, &k, h);
        residual = candidate
            .iter()
            .zip(&next)
            .map(|(a, b)| {
                let (dx, dv) = (a.pos - b.pos, a.vel - b.vel);
                dx.x.abs().max(dx.y.abs()).max(dv.x.abs()).max(dv.y.abs())
            })
            .fold(0.0, f64::max);
        next = candidate;
        if residual <= cfg.midpoint_tol {
            return Ok(next);
        }
    }
    Err(Error::StepFailure {
        iters: cfg.midpoint_max_iters,
        residual,
    })
}

fn advance(
    particles: &[Particle],
    params: &PhysicalParams,
    cfg: &IntegratorConfig,
    field: Field,
    h: f64,
) -> Result<Vec<Particle>> {
    match cfg.scheme {
        Scheme::Rk4 => rk4(particles, params, field, h),
        Scheme::ImplicitMidpoint => implicit_midpoint(particles, params, cfg, field, h),
    }
}

/// Upper bound on branch switches handled inside one step; beyond it the
/// rest of the step is taken without further event location.
const MAX_EVENTS_PER_STEP: usize = 10_000;

/// Cubic Hermite interpolant of one particle over a step of size `s`,
/// evaluated at the fraction `t`.
fn hermite(
    y0: &Particle,
    f0: &FieldSample,
    y1: &Particle,
    f1: &FieldSample,
    s: f64,
    t: f64,
) -> Particle {
    let (t2, t3) = (t * t, t * t * t);
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = (t3 - 2.0 * t2 + t) * s;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = (t3 - t2) * s;
    Particle {
        pos: y0.pos * h00 + f0.velocity * h10 + y1.pos * h01 + f1.velocity * h11,
        vel: y0.vel * h00 + f0.acceleration * h10 + y1.vel * h01 + f1.acceleration * h11,
        weight: y0.weight,
    }
}

/// Illinois iteration for the first point of `[a, b]` where `crossed`
/// holds, given that it fails at `a` and holds at `b`. `f` is a signed
/// function positive before the crossing; `fa` and `fb` are its end values.
fn illinois<F>(
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
    tol: f64,
    mut f: F,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, bool)>,
{
    let mut side = 0;
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mut c = if fa != fb {
            (a * fb - b * fa) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let (fc, crossed) = f(c)?;
        if crossed {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(b)
}

/// Fraction of the step at which pair `(j, k)` first reaches the switching
/// surface along the interpolated trajectory, and the rate of change of its
/// oriented switching function there.
fn interpolated_crossing(
    gates: &Gates,
    ends: (&[Particle], &[FieldSample], &[Particle], &[FieldSample]),
    s: f64,
    (j, k): (usize, usize),
) -> (f64, f64) {
    let (y0, f0, y1, f1) = ends;
    let spatial = gates.spatial(j, k);
    let phi = |t: f64| {
        let a = hermite(&y0[j], &f0[j], &y1[j], &f1[j], s, t);
        let b = hermite(&y0[k], &f0[k], &y1[k], &f1[k], s, t);
        let g = crate::limit::gates::switching(&a, &b, gates.omega_c());
        if spatial {
            (g, g <= 0.0)
        } else {
            (-g, g > 0.0)
        }
    };
    const SCAN: usize = 16;
    let mut a = (0.0, phi(0.0).0);
    for i in 1..=SCAN {
        let t = i as f64 / SCAN as f64;
        let (g, crossed) = phi(t);
        if crossed {
            let root = illinois(a, (t, g), 1e-15, |t| Ok(phi(t))).unwrap_or(t);
            const H: f64 = 1e-7;
            let slope = (phi(root + H).0 - phi(root - H).0) / (2.0 * H);
            return (root, slope);
        }
        a = (t, g);
    }
    (1.0, 0.0)
}

/// Earliest crossing among `candidates`, all of which are crossed after a
/// frozen step of size `s_hi` from `start`. Returns the crossing time,
/// resolved to a small fraction of `h` and rounded towards the crossed
/// side, and the state there.
#[allow(clippy::too_many_arguments)]
fn first_crossing(
    start: &[Particle],
    f_start: &[FieldSample],
    params: &PhysicalParams,
    cfg: &IntegratorConfig,
    gates: &Gates,
    mut candidates: Vec<(usize, usize)>,
    mut s_hi: f64,
    mut y_hi: Vec<Particle>,
    h: f64,
) -> Result<(f64, Vec<Particle>)> {
    // Placing a switch late by τ costs O(τ) per event, so τ must stay well
    // below the local error of the scheme.
    let resolution = match cfg.scheme {
        Scheme::Rk4 => 1e-12,
        Scheme::ImplicitMidpoint => 1e-9,
    } * h.abs();
    loop {
        let f_hi = gates.fields(&y_hi, params)?;
        let ends = (start, f_start, y_hi.as_slice(), f_hi.as_slice());
        let (pair, (t_guess, slope)) = candidates
            .iter()
            .map(|&pair| (pair, interpolated_crossing(gates, ends, s_hi, pair)))
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .expect("candidates are nonempty");
        let (j, k) = pair;

        // The interpolated root is accurate to the order of the scheme. One
        // true step there and a Newton correction with the interpolated
        // slope normally pin the crossing; a step just past the corrected
        // root confirms it. Otherwise the crossing is bracketed.
        let dt = resolution / s_hi.abs();
        let mut states: Vec<(f64, Vec<Particle>)> = vec![(1.0, y_hi.clone())];
        let mut eval = |t: f64| -> Result<(f64, bool)> {
            let y = advance(start, params, cfg, Field::Frozen(gates), t * s_hi)?;
            let out = (gates.oriented(&y, j, k), gates.is_crossed(&y, j, k));
            states.push((t, y));
            Ok(out)
        };
        let mut hi = (1.0, gates.oriented(&y_hi, j, k));
        let mut lo = None;
        let mut target = t_guess;
        if t_guess < 1.0 {
            let (g, crossed) = eval(t_guess)?;
            if crossed {
                hi = (t_guess, g);
            } else {
                lo = Some((t_guess, g));
            }
            if slope < 0.0 {
                target = (t_guess - g / slope).clamp(0.0, 1.0);
            }
        }
        let past = (target + dt).min(hi.0);
        let t = match lo {
            _ if past >= hi.0 => hi.0,
            Some(l) if past <= l.0 => illinois(l, hi, dt, &mut eval)?,
            _ => match eval(past)? {
                (_, true) => past,
                (g, false) => illinois((past, g), hi, dt, &mut eval)?,
            },
        };
        let y_t = match states.iter().rev().find(|(s, _)| *s == t) {
            Some((_, y)) => y.clone(),
            None => advance(start, params, cfg, Field::Frozen(gates), t * s_hi)?,
        };
        let s = t * s_hi;

        let earlier: Vec<(usize, usize)> = gates
            .crossed(&y_t)
            .into_iter()
            .filter(|&p| p != pair)
            .collect();
        // Crossings closer together than the resolution are treated as
        // simultaneous; the caller switches every pair crossed at `s`.
        if earlier.is_empty() || (s_hi - s).abs() <= resolution {
            return Ok((s, y_t));
        }
        candidates = earlier;
        s_hi = s;
        y_hi = y_t;
    }
}

/// Step of size `h` that integrates each smooth piece separately and
/// switches branches at the located crossing times.
fn step_with_events(
    particles: &[Particle],
    params: &PhysicalParams,
    cfg: &IntegratorConfig,
    h: f64,
) -> Result<Vec<Particle>> {
    let mut y = particles.to_vec();
    let mut gates = Gates::new(&y, params.omega_c);
    let mut remaining = h;
    for _ in 0..MAX_EVENTS_PER_STEP {
        let y_end = advance(&y, params, cfg, Field::Frozen(&gates), remaining)?;
        let crossed = gates.crossed(&y_end);
        if crossed.is_empty() {
            return Ok(y_end);
        }
        let f_start = gates.fields(&y, params)?;
        let (s, y_c) = first_crossing(
            &y, &f_start, params, cfg, &gates, crossed, remaining, y_end, h,
        )?;
        for (j, k) in gates.crossed(&y_c) {
            gates.toggle(j, k);
        }
        y = y_c;
        remaining -= s;
    }
    advance(&y, params, cfg, Field::Live(cfg.summation), remaining)
}

fn step_particles(
    particles: &[Particle],
    params: &PhysicalParams,
    cfg: &IntegratorConfig,
    h: f64,
) -> Result<Vec<Particle>> {
    if cfg.locate_gate_crossings && cfg.summation == Summation::Direct {
        step_with_events(particles, params, cfg, h)
    } else {
        advance(particles, params, cfg, Field::Live(cfg.summation), h)
    }
}

/// Advance by an explicit step size `h`.
pub fn step_by(ens: &Ensemble, cfg: &IntegratorConfig, h: f64) -> Result<Ensemble> {
    ens.require_frame(Frame::Gyro)?;
    let particles = step_particles(&ens.particles, &ens.params, cfg, h)?;
    Ok(Ensemble::new(
        particles,
        ens.params,
        ens.time + h,
        Frame::Gyro,
    ))
}

/// One step of size `cfg.dt`.
pub fn step(ens: &Ensemble, cfg: &IntegratorConfig) -> Result<Ensemble> {
    cfg.validate()?;
    step_by(ens, cfg, cfg.dt)
}

/// Integrate to `t_end`, recording snapshots every `snapshot_every`
/// (plus the initial and final states) and handing each to `observer`.
pub fn integrate<O>(
    ens: &Ensemble,
    cfg: &IntegratorConfig,
    t_end: f64,
    snapshot_every: Option<f64>,
    observer: O,
) -> Result<TrajectoryRecord>
where
    O: FnMut(&Ensemble),
{
    cfg.validate()?;
    ens.require_frame(Frame::Gyro)?;
    stepping::drive(
        ens,
        cfg.dt,
        t_end,
        snapshot_every,
        |e, h| step_by(e, cfg, h),
        observer,
    )
}
