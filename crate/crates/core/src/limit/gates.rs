//! Frozen branch patterns for stepping across indicator switches.
//!
//! The right-hand side of the limit dynamics jumps whenever a pair crosses
//! `|ξ| = |η|/|ω_c|`. A step integrates the smooth field obtained by
//! freezing every pair on the branch it had at the start of the step, and
//! the crossing times are then located so that each switch is applied at
//! the right moment.

use rayon::prelude::*;

use crate::ensemble::{Particle, PhysicalParams};
use crate::error::Result;
use crate::kernel::spatial_branch;
use crate::limit::fields::{fields_with_branches, FieldSample, PARALLEL_THRESHOLD};

/// `ω_c²|ξ|² − |η|²`, positive exactly when the pair is on the spatial
/// branch.
#[inline]
pub(crate) fn switching(a: &Particle, b: &Particle, omega_c: f64) -> f64 {
    (a.pos - b.pos).norm_sq() * (omega_c * omega_c) - (a.vel - b.vel).norm_sq()
}

#[derive(Debug, Clone)]
pub(crate) struct Gates {
    reference: Vec<Particle>,
    /// Partners whose branch is the opposite of the one in `reference`.
    flips: Vec<Vec<usize>>,
    omega_c: f64,
}

impl Gates {
    pub fn new(reference: &[Particle], omega_c: f64) -> Self {
        Self {
            reference: reference.to_vec(),
            flips: vec![Vec::new(); reference.len()],
            omega_c,
        }
    }

    #[inline]
    pub fn spatial(&self, j: usize, k: usize) -> bool {
        let (a, b) = (&self.reference[j], &self.reference[k]);
        let base = spatial_branch(a.pos - b.pos, a.vel - b.vel, self.omega_c);
        let flips = &self.flips[j];
        base ^ (!flips.is_empty() && flips.contains(&k))
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn toggle(&mut self, j: usize, k: usize) {
        for (a, b) in [(j, k), (k, j)] {
            let row = &mut self.flips[a];
            match row.iter().position(|&x| x == b) {
                Some(i) => {
                    row.swap_remove(i);
                }
                None => row.push(b),
            }
        }
    }

    pub fn fields(
        &self,
        particles: &[Particle],
        params: &PhysicalParams,
    ) -> Result<Vec<FieldSample>> {
        fields_with_branches(particles, params, |j, k| self.spatial(j, k))
    }

    /// Pairs `j < k` whose actual branch in `particles` differs from the
    /// frozen one.
    pub fn crossed(&self, particles: &[Particle]) -> Vec<(usize, usize)> {
        let row = |j: usize| -> Vec<(usize, usize)> {
            let a = &particles[j];
            (j + 1..particles.len())
                .filter(|&k| {
                    let b = &particles[k];
                    spatial_branch(a.pos - b.pos, a.vel - b.vel, self.omega_c) != self.spatial(j, k)
                })
                .map(|k| (j, k))
                .collect()
        };
        if particles.len() >= PARALLEL_THRESHOLD {
            (0..particles.len())
                .into_par_iter()
                .flat_map_iter(row)
                .collect()
        } else {
            (0..particles.len()).flat_map(row).collect()
        }
    }

    /// Switching function of pair `(j, k)` oriented to be positive on its
    /// frozen branch.
    pub fn oriented(&self, particles: &[Particle], j: usize, k: usize) -> f64 {
        let g = switching(&particles[j], &particles[k], self.omega_c);
        if self.spatial(j, k) {
            g
        } else {
            -g
        }
    }

    pub fn is_crossed(&self, particles: &[Particle], j: usize, k: usize) -> bool {
        let (a, b) = (&particles[j], &particles[k]);
        spatial_branch(a.pos - b.pos, a.vel - b.vel, self.omega_c) != self.spatial(j, k)
    }
}
