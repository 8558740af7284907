//! Quadtree summation of the effective fields.
//!
//! Every node stores, besides its spatial extent, a bound on the spread of
//! its members' velocities. For a target `(x̃, ṽ)` this bounds both `|ξ|` and
//! `|η|/|ω_c|` over the whole node, so the branch indicator can often be
//! decided for all members at once:
//!
//! * spatial branch for every member: the node contributes only to `𝓥`,
//!   through a complex multipole expansion of `Σ w_k ∇e(ξ_k)` once the
//!   opening criterion `radius ≤ θ·distance` holds;
//! * velocity branch for every member: the node contributes nothing to `𝓥`
//!   and is summed directly for `𝓐`;
//! * otherwise the node is opened, and leaves are summed pair by pair.
//!
//! With `z = x + iy`, `∇e(ξ) = -conj(1/ξ)/(2π)`, so the spatial gradient sum
//! is `-conj(g)/(2π)` with `g(z) = Σ w_k/(z - z_k) = Σ_n a_n/(z - c)^{n+1}`
//! and `a_n = Σ w_k (z_k - c)^n`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ensemble::{Ensemble, Frame, Particle, PhysicalParams};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::kernel::grad_fundamental_unchecked;
use crate::limit::fields::{coincident, FieldSample, GradSums, PARALLEL_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeOptions {
    /// Maximum number of particles in a leaf.
    pub leaf_size: usize,
    /// Number of multipole terms beyond the monopole.
    pub order: usize,
    /// Relative error allowed per accepted cell from dropping the kernel
    /// regularization in the far field.
    pub tolerance: f64,
}

impl Default for TreeOptions {
    fn default() -> Self {
        Self {
            leaf_size: 32,
            order: 16,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    center: Vec2,
    radius: f64,
    vel_center: Vec2,
    vel_radius: f64,
    start: usize,
    end: usize,
    children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct QuadTree {
    nodes: Vec<Node>,
    /// Particle indices, grouped so that each node owns a contiguous range.
    index: Vec<usize>,
    /// `order + 1` moments per node.
    moments: Vec<Complex64>,
    order: usize,
    reg_tol: f64,
}

const MAX_DEPTH: usize = 48;
/// Relative slack on the whole-node branch decisions, so that roundoff in
/// the bounds never misclassifies a pair.
const GATE_SAFETY: f64 = 1e-12;

impl QuadTree {
    pub fn build(particles: &[Particle], options: TreeOptions) -> Self {
        let mut tree = QuadTree {
            nodes: Vec::new(),
            index: (0..particles.len()).collect(),
            moments: Vec::new(),
            order: options.order,
            reg_tol: options.tolerance,
        };
        if particles.is_empty() {
            return tree;
        }
        let (mut lo, mut hi) = (particles[0].pos, particles[0].pos);
        for p in particles {
            lo = Vec2::new(lo.x.min(p.pos.x), lo.y.min(p.pos.y));
            hi = Vec2::new(hi.x.max(p.pos.x), hi.y.max(p.pos.y));
        }
        tree.build_node(
            particles,
            0,
            particles.len(),
            lo,
            hi,
            0,
            options.leaf_size.max(1),
        );
        tree
    }

    fn build_node(
        &mut self,
        particles: &[Particle],
        start: usize,
        end: usize,
        lo: Vec2,
        hi: Vec2,
        depth: usize,
        leaf_size: usize,
    ) -> usize {
        let members = &self.index[start..end];
        let mass: f64 = members.iter().map(|&k| particles[k].weight).sum();
        let center = members.iter().fold(Vec2::ZERO, |acc, &k| {
            acc + particles[k].pos * particles[k].weight
        }) / mass;
        let radius = members
            .iter()
            .map(|&k| (particles[k].pos - center).norm())
            .fold(0.0, f64::max);

        let (mut vlo, mut vhi) = (particles[members[0]].vel, particles[members[0]].vel);
        for &k in members {
            let v = particles[k].vel;
            vlo = Vec2::new(vlo.x.min(v.x), vlo.y.min(v.y));
            vhi = Vec2::new(vhi.x.max(v.x), vhi.y.max(v.y));
        }
        let vel_center = (vlo + vhi) * 0.5;
        let vel_radius = members
            .iter()
            .map(|&k| (particles[k].vel - vel_center).norm())
            .fold(0.0, f64::max);

        let c = Complex64::new(center.x, center.y);
        let mut moments = vec![Complex64::new(0.0, 0.0); self.order + 1];
        for &k in members {
            let p = &particles[k];
            let t = Complex64::new(p.pos.x, p.pos.y) - c;
            let mut power = Complex64::new(p.weight, 0.0);
            for m in moments.iter_mut() {
                *m += power;
                power *= t;
            }
        }
        self.moments.extend(moments);

        let id = self.nodes.len();
        self.nodes.push(Node {
            center,
            radius,
            vel_center,
            vel_radius,
            start,
            end,
            children: Vec::new(),
        });

        if end - start <= leaf_size || depth >= MAX_DEPTH || radius == 0.0 {
            return id;
        }

        let mid = (lo + hi) * 0.5;
        let quadrant = |v: Vec2| (v.x >= mid.x) as usize + 2 * (v.y >= mid.y) as usize;
        let mut buckets: [Vec<usize>; 4] = Default::default();
        for &k in &self.index[start..end] {
            buckets[quadrant(particles[k].pos)].push(k);
        }
        let mut offset = start;
        let mut ranges = Vec::with_capacity(4);
        for (q, bucket) in buckets.iter().enumerate() {
            self.index[offset..offset + bucket.len()].copy_from_slice(bucket);
            if !bucket.is_empty() {
                ranges.push((q, offset, offset + bucket.len()));
            }
            offset += bucket.len();
        }
        let mut children = Vec::with_capacity(ranges.len());
        for (q, s, e) in ranges {
            let clo = Vec2::new(
                if q & 1 == 1 { mid.x } else { lo.x },
                if q & 2 == 2 { mid.y } else { lo.y },
            );
            let chi = Vec2::new(
                if q & 1 == 1 { hi.x } else { mid.x },
                if q & 2 == 2 { hi.y } else { mid.y },
            );
            children.push(self.build_node(particles, s, e, clo, chi, depth + 1, leaf_size));
        }
        self.nodes[id].children = children;
        id
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ w_k ∇e(z - z_k)` over the node's members, from the expansion.
    fn far_gradient(&self, node_id: usize, pos: Vec2) -> Vec2 {
        let node = &self.nodes[node_id];
        let a = &self.moments[node_id * (self.order + 1)..(node_id + 1) * (self.order + 1)];
        let inv = Complex64::new(pos.x - node.center.x, pos.y - node.center.y).inv();
        let mut acc = a[self.order];
        for m in a[..self.order].iter().rev() {
            acc = acc * inv + m;
        }
        let g = acc * inv;
        Vec2::new(-g.re, g.im) / std::f64::consts::TAU
    }

    fn accumulate(
        &self,
        particles: &[Particle],
        params: &PhysicalParams,
        pos: Vec2,
        vel: Vec2,
        skip: Option<usize>,
        mac_theta: f64,
        want_accel: bool,
    ) -> Result<GradSums> {
        let mut sums = GradSums::default();
        if self.nodes.is_empty() {
            return Ok(sums);
        }
        let inv_w = 1.0 / params.omega_c.abs();
        let delta = params.delta;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let d_center = (pos - node.center).norm();
            let d_min = (d_center - node.radius).max(0.0);
            let d_max = d_center + node.radius;
            let dv = (vel - node.vel_center).norm();
            let eta_max = (dv + node.vel_radius) * inv_w;
            let eta_min = (dv - node.vel_radius).max(0.0) * inv_w;

            if d_max * (1.0 + GATE_SAFETY) < eta_min * (1.0 - GATE_SAFETY) {
                if want_accel {
                    for &k in &self.index[node.start..node.end] {
                        if Some(k) == skip {
                            continue;
                        }
                        let p = &particles[k];
                        let scaled = (vel - p.vel) / params.omega_c;
                        sums.velocity += grad_fundamental_unchecked(scaled, delta) * p.weight;
                    }
                }
                continue;
            }

            let all_spatial = d_min * (1.0 - GATE_SAFETY) > eta_max * (1.0 + GATE_SAFETY);
            let accept = all_spatial
                && mac_theta > 0.0
                && node.radius <= mac_theta * d_center
                && (delta == 0.0 || delta * delta <= self.reg_tol * d_min * d_min);
            if accept {
                sums.spatial += self.far_gradient(id, pos);
                continue;
            }

            if node.children.is_empty() {
                for &k in &self.index[node.start..node.end] {
                    if Some(k) == skip {
                        continue;
                    }
                    let p = &particles[k];
                    let (xi, eta) = (pos - p.pos, vel - p.vel);
                    if coincident(xi, eta, delta) {
                        return Err(Error::Coincidence(skip.unwrap_or(usize::MAX), k));
                    }
                    if want_accel {
                        sums.add_pair(xi, eta, p.weight, params);
                    } else if crate::kernel::spatial_branch(xi, eta, params.omega_c) {
                        sums.spatial += grad_fundamental_unchecked(xi, delta) * p.weight;
                    }
                }
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        Ok(sums)
    }

    /// Both fields at `(pos, vel)`, leaving out particle `skip`.
    pub fn field(
        &self,
        particles: &[Particle],
        params: &PhysicalParams,
        pos: Vec2,
        vel: Vec2,
        skip: Option<usize>,
        mac_theta: f64,
    ) -> Result<FieldSample> {
        Ok(self
            .accumulate(particles, params, pos, vel, skip, mac_theta, true)?
            .into_sample(params.omega_c))
    }

    /// `𝓥` alone; cells decided for the velocity branch are skipped.
    pub fn velocity(
        &self,
        particles: &[Particle],
        params: &PhysicalParams,
        pos: Vec2,
        vel: Vec2,
        skip: Option<usize>,
        mac_theta: f64,
    ) -> Result<Vec2> {
        Ok(self
            .accumulate(particles, params, pos, vel, skip, mac_theta, false)?
            .into_sample(params.omega_c)
            .velocity)
    }

    /// Fields at every particle, self-interaction excluded.
    pub fn fields(
        &self,
        particles: &[Particle],
        params: &PhysicalParams,
        mac_theta: f64,
    ) -> Result<Vec<FieldSample>> {
        let eval = |j: usize| {
            let p = &particles[j];
            self.field(particles, params, p.pos, p.vel, Some(j), mac_theta)
        };
        if particles.len() >= PARALLEL_THRESHOLD {
            (0..particles.len()).into_par_iter().map(eval).collect()
        } else {
            (0..particles.len()).map(eval).collect()
        }
    }
}

/// Tree over a gyro-frame ensemble.
pub fn build_tree(ens: &Ensemble, options: TreeOptions) -> Result<QuadTree> {
    ens.require_frame(Frame::Gyro)?;
    Ok(QuadTree::build(&ens.particles, options))
}

/// Tree approximation of `𝓥` at particle `j`. `mac_theta = 0` never
/// accepts a multipole and reproduces direct summation.
pub fn fast_velocity_field(
    ens: &Ensemble,
    tree: &QuadTree,
    j: usize,
    mac_theta: f64,
) -> Result<Vec2> {
    ens.require_frame(Frame::Gyro)?;
    let p = ens
        .particles
        .get(j)
        .ok_or_else(|| Error::InvalidParameter(format!("particle index {j} out of range")))?;
    tree.velocity(
        &ens.particles,
        &ens.params,
        p.pos,
        p.vel,
        Some(j),
        mac_theta,
    )
}

/// Tree approximation of `𝓥` at every particle.
pub fn fast_velocity_fields(ens: &Ensemble, tree: &QuadTree, mac_theta: f64) -> Result<Vec<Vec2>> {
    ens.require_frame(Frame::Gyro)?;
    let ps = &ens.particles;
    let eval = |j: usize| tree.velocity(ps, &ens.params, ps[j].pos, ps[j].vel, Some(j), mac_theta);
    if ps.len() >= PARALLEL_THRESHOLD {
        (0..ps.len()).into_par_iter().map(eval).collect()
    } else {
        (0..ps.len()).map(eval).collect()
    }
}
