//! Weighted particles, the ensembles that carry them, and trajectory records.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result};
use crate::geometry::{from_gyro, to_gyro, Vec2};

/// Physical parameters shared by both models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Rescaled cyclotron frequency; nonzero, either sign.
    pub omega_c: f64,
    /// Scale parameter of the stiff model.
    pub epsilon: f64,
    /// Kernel regularization length.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    1e-3
}

impl PhysicalParams {
    pub fn new(omega_c: f64, epsilon: f64, delta: f64) -> std::result::Result<Self, ConfigError> {
        let p = Self {
            omega_c,
            epsilon,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        if !(self.omega_c.is_finite() && self.omega_c != 0.0) {
            return Err(ConfigError::OmegaC(self.omega_c));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(ConfigError::Epsilon(self.epsilon));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(ConfigError::Delta(self.delta));
        }
        Ok(())
    }

    /// Cyclotron period `2π/|ω_c|` on the slow time scale.
    pub fn cyclotron_period(&self) -> f64 {
        TAU / self.omega_c.abs()
    }

    /// Period of the fast gyration, `ε·2π/|ω_c|`.
    pub fn fast_cyclotron_period(&self) -> f64 {
        self.epsilon * self.cyclotron_period()
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }
}

/// Which coordinates the particles of an ensemble carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// Guiding-center position and phase-rotated velocity `(x̃, ṽ)`.
    Gyro,
    /// Physical position and velocity `(x, v)`.
    Lab,
}

impl Frame {
    pub fn as_str(self) -> &'static str {
        match self {
            Frame::Gyro => "gyro",
            Frame::Lab => "lab",
        }
    }
}

impl std::str::FromStr for Frame {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gyro" => Ok(Frame::Gyro),
            "lab" => Ok(Frame::Lab),
            other => Err(format!("unknown frame '{other}'")),
        }
    }
}

/// A weighted Dirac marker in phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub pos: Vec2,
    pub vel: Vec2,
    pub weight: f64,
}

impl Particle {
    pub fn new(pos: Vec2, vel: Vec2, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "particle weight must be positive, got {weight}"
            )));
        }
        if !(pos.is_finite() && vel.is_finite()) {
            return Err(Error::InvalidParameter(
                "particle coordinates must be finite".into(),
            ));
        }
        Ok(Self { pos, vel, weight })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub particles: Vec<Particle>,
    pub params: PhysicalParams,
    pub time: f64,
    pub frame: Frame,
}

impl Ensemble {
    pub fn new(particles: Vec<Particle>, params: PhysicalParams, time: f64, frame: Frame) -> Self {
        Self {
            particles,
            params,
            time,
            frame,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    pub fn require_frame(&self, expected: Frame) -> Result<()> {
        if self.frame == expected {
            Ok(())
        } else {
            Err(Error::FrameMismatch {
                expected,
                found: self.frame,
            })
        }
    }

    /// Re-express a lab-frame ensemble in gyro coordinates at its own time.
    pub fn to_gyro_frame(&self) -> Result<Ensemble> {
        self.require_frame(Frame::Lab)?;
        let particles = self
            .particles
            .iter()
            .map(|p| {
                let (pos, vel) = to_gyro(p.pos, p.vel, &self.params, self.time);
                Particle {
                    pos,
                    vel,
                    weight: p.weight,
                }
            })
            .collect();
        Ok(Ensemble::new(
            particles,
            self.params,
            self.time,
            Frame::Gyro,
        ))
    }

    pub fn to_lab_frame(&self) -> Result<Ensemble> {
        self.require_frame(Frame::Gyro)?;
        let particles = self
            .particles
            .iter()
            .map(|p| {
                let (pos, vel) = from_gyro(p.pos, p.vel, &self.params, self.time);
                Particle {
                    pos,
                    vel,
                    weight: p.weight,
                }
            })
            .collect();
        Ok(Ensemble::new(particles, self.params, self.time, Frame::Lab))
    }
}

/// Time series of ensemble snapshots from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub frame: Frame,
    pub snapshots: Vec<Ensemble>,
}

impl TrajectoryRecord {
    pub fn new(frame: Frame) -> Self {
        Self {
            frame,
            snapshots: Vec::new(),
        }
    }

    pub fn push(&mut self, ens: Ensemble) -> Result<()> {
        ens.require_frame(self.frame)?;
        self.snapshots.push(ens);
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn last(&self) -> Option<&Ensemble> {
        self.snapshots.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert_eq!(
            PhysicalParams::new(0.0, 1.0, 0.0),
            Err(ConfigError::OmegaC(0.0))
        );
        assert_eq!(
            PhysicalParams::new(1.0, 0.0, 0.0),
            Err(ConfigError::Epsilon(0.0))
        );
        assert_eq!(
            PhysicalParams::new(1.0, 1.0, -1.0),
            Err(ConfigError::Delta(-1.0))
        );
        let p = PhysicalParams::new(-2.0, 0.1, 0.0).unwrap();
        assert!((p.cyclotron_period() - std::f64::consts::PI).abs() < 1e-15);
        assert!((p.fast_cyclotron_period() - 0.1 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn particle_rejects_nonpositive_weight() {
        assert!(Particle::new(Vec2::ZERO, Vec2::ZERO, 0.0).is_err());
        assert!(Particle::new(Vec2::ZERO, Vec2::ZERO, -1.0).is_err());
        assert!(Particle::new(Vec2::new(f64::NAN, 0.0), Vec2::ZERO, 1.0).is_err());
        assert!(Particle::new(Vec2::ZERO, Vec2::ZERO, 1e-9).is_ok());
    }

    #[test]
    fn frame_conversions_check_tags() {
        let p = PhysicalParams::new(1.3, 0.2, 0.0).unwrap();
        let ens = Ensemble::new(
            vec![Particle::new(Vec2::new(1.0, 2.0), Vec2::new(-0.5, 0.25), 1.0).unwrap()],
            p,
            0.7,
            Frame::Lab,
        );
        assert!(matches!(
            ens.to_lab_frame(),
            Err(Error::FrameMismatch { .. })
        ));
        let back = ens.to_gyro_frame().unwrap().to_lab_frame().unwrap();
        let (a, b) = (ens.particles[0], back.particles[0]);
        assert!((a.pos - b.pos).norm() < 1e-14 && (a.vel - b.vel).norm() < 1e-14);
        assert_eq!(back.frame, Frame::Lab);
    }
}
