//! Deterministic midpoint sampling of the initial density on a tensor grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::app::config::{IcKind, InitialCondition, RunConfig, SamplingMode};
use crate::ensemble::{Ensemble, Frame, Particle};
use crate::error::Result;
use crate::geometry::Vec2;

/// Gaussian of standard deviation 1/2 times the cutoff
/// `exp(1 − 1/(1 − u²))`, which is smooth and vanishes with all its
/// derivatives at `|u| = 1`.
fn gaussian_bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    (-2.0 * u * u + 1.0 - 1.0 / (1.0 - u * u)).exp()
}

fn cosine_bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let c = (std::f64::consts::FRAC_PI_2 * u).cos();
    c * c
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `∫_a^b f` by composite Gauss–Legendre.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let s: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * f(mid + 0.5 * h * x))
            .sum();
        total += 0.5 * h * s;
    }
    total
}

fn base(kind: IcKind) -> fn(f64) -> f64 {
    match kind {
        IcKind::CosineBump => cosine_bump,
        IcKind::GaussianBump | IcKind::TwoStream => gaussian_bump,
    }
}

/// `∫_{-1}^{1}` of the unit bump used by `kind`.
pub fn bump_integral(kind: IcKind) -> f64 {
    integrate_1d(base(kind), -1.0, 1.0, 64, 20)
}

/// One coordinate of the separable density.
#[derive(Debug, Clone, Copy)]
struct Axis {
    center: f64,
    radius: f64,
    /// Beams at `±center` instead of one bump at `center`.
    paired: bool,
    bump: fn(f64) -> f64,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn single(center: f64, radius: f64, bump: fn(f64) -> f64) -> Self {
        Self {
            center,
            radius,
            paired: false,
            bump,
            lo: center - radius,
            hi: center + radius,
        }
    }

    fn pair(center: f64, radius: f64, bump: fn(f64) -> f64) -> Self {
        let reach = center.abs() + radius;
        Self {
            center,
            radius,
            paired: true,
            bump,
            lo: -reach,
            hi: reach,
        }
    }

    fn eval(&self, s: f64) -> f64 {
        let f = self.bump;
        if self.paired {
            0.5 * (f((s - self.center) / self.radius) + f((s + self.center) / self.radius))
        } else {
            f((s - self.center) / self.radius)
        }
    }
}

fn axes(ic: &InitialCondition) -> [Axis; 4] {
    let b = base(ic.kind);
    let (cx, cv) = (ic.center_x, ic.center_v);
    let v = |c: f64| match ic.kind {
        IcKind::TwoStream => Axis::pair(c, ic.radius_v, b),
        _ => Axis::single(c, ic.radius_v, b),
    };
    [
        Axis::single(cx.x, ic.radius_x, b),
        Axis::single(cx.y, ic.radius_x, b),
        v(cv.x),
        v(cv.y),
    ]
}

/// `total_mass / ∫ Π factors`.
fn normalization(ic: &InitialCondition) -> f64 {
    let i = bump_integral(ic.kind);
    ic.total_mass / (ic.radius_x * ic.radius_x * ic.radius_v * ic.radius_v * i.powi(4))
}

/// The initial density `f_in(x, v)`.
pub fn density(ic: &InitialCondition, x: Vec2, v: Vec2) -> f64 {
    let a = axes(ic);
    normalization(ic) * a[0].eval(x.x) * a[1].eval(x.y) * a[2].eval(v.x) * a[3].eval(v.y)
}

/// Support box per coordinate `(x1, x2, v1, v2)`.
pub fn support_box(ic: &InitialCondition) -> [(f64, f64); 4] {
    axes(ic).map(|a| (a.lo, a.hi))
}

/// Markers on an `n_x² × n_v²` midpoint grid (or jittered within its cells),
/// ordered with `x1` slowest and `v2` fastest. Zero-weight cells are dropped.
pub fn sample_markers(
    ic: &InitialCondition,
    n_x: usize,
    n_v: usize,
    mode: SamplingMode,
    seed: u64,
) -> Vec<Particle> {
    let a = axes(ic);
    let norm = normalization(ic);
    let cells = [n_x, n_x, n_v, n_v];
    let widths: [f64; 4] = std::array::from_fn(|i| (a[i].hi - a[i].lo) / cells[i] as f64);
    let volume: f64 = widths.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i0 in 0..n_x {
        for i1 in 0..n_x {
            for i2 in 0..n_v {
                for i3 in 0..n_v {
                    let idx = [i0, i1, i2, i3];
                    let z: [f64; 4] = std::array::from_fn(|d| {
                        let offset = match mode {
                            SamplingMode::Grid => 0.5,
                            SamplingMode::Jittered => rng.random::<f64>(),
                        };
                        a[d].lo + (idx[d] as f64 + offset) * widths[d]
                    });
                    let f = norm * (0..4).map(|d| a[d].eval(z[d])).product::<f64>();
                    let w = f * volume;
                    if w > 0.0 {
                        out.push(Particle {
                            pos: Vec2::new(z[0], z[1]),
                            vel: Vec2::new(z[2], z[3]),
                            weight: w,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Total weight of the midpoint grid, computed as a product of 1-D sums
/// (the grid quadrature is separable), without building the markers.
pub fn grid_mass(ic: &InitialCondition, n_x: usize, n_v: usize) -> f64 {
    let a = axes(ic);
    let cells = [n_x, n_x, n_v, n_v];
    let mut total = normalization(ic);
    for d in 0..4 {
        let h = (a[d].hi - a[d].lo) / cells[d] as f64;
        let s: f64 = (0..cells[d])
            .map(|i| a[d].eval(a[d].lo + (i as f64 + 0.5) * h))
            .sum();
        total *= h * s;
    }
    total
}

/// Lab-frame markers and their gyro-frame twin at `t = 0`.
pub fn sample_initial(cfg: &RunConfig) -> Result<(Ensemble, Ensemble)> {
    cfg.validate()?;
    let s = &cfg.sampling;
    let particles = sample_markers(&cfg.initial, s.n_per_dim, s.cells_v(), s.mode, cfg.run.seed);
    let lab = Ensemble::new(particles, cfg.params, 0.0, Frame::Lab);
    let gyro = lab.to_gyro_frame()?;
    Ok((lab, gyro))
}
