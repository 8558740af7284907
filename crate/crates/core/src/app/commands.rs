//! The work behind each command-line subcommand, independent of argument
//! parsing so that it can be driven from tests.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::app::config::RunConfig;
use crate::app::io::{self, DiagWriter};
use crate::app::sampling::sample_initial;
use crate::diagnostics::{trajectory_error_with, DiagRow, Drift, TrajectoryMetric};
use crate::ensemble::{Ensemble, Frame, PhysicalParams, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::full::{filtered_trajectory, integrate_full};
use crate::geometry::Vec2;
use crate::kernel::{gyro_average_oracle, gyro_kernel};
use crate::limit::integrate;

/// What a finished run wrote and how well it conserved.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub particles: usize,
    pub snapshots: usize,
    pub rows: Vec<DiagRow>,
    pub max_drift: Drift,
    pub out_dir: PathBuf,
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes one snapshot file and one diagnostics row per recorded state.
/// The observer callbacks of the integrators cannot fail, so the first
/// error is parked and reported afterwards.
struct Recorder {
    dir: PathBuf,
    diag: Option<DiagWriter<std::fs::File>>,
    rows: Vec<DiagRow>,
    count: usize,
    error: Option<Error>,
}

impl Recorder {
    fn new(dir: &Path) -> Result<Self> {
        create_dir(dir)?;
        let diag = DiagWriter::create(&dir.join("diag.csv"))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            diag: Some(diag),
            rows: Vec::new(),
            count: 0,
            error: None,
        })
    }

    fn record(&mut self, ens: &Ensemble) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = self.try_record(ens) {
            self.error = Some(e);
        }
    }

    fn try_record(&mut self, ens: &Ensemble) -> Result<()> {
        io::write_snapshot(&self.dir.join(io::snapshot_name(self.count)), ens)?;
        self.count += 1;
        let gyro = match ens.frame {
            Frame::Gyro => std::borrow::Cow::Borrowed(ens),
            Frame::Lab => std::borrow::Cow::Owned(ens.to_gyro_frame()?),
        };
        let row = DiagRow::of(&gyro)?;
        self.diag.as_mut().expect("open until finish").write(&row)?;
        self.rows.push(row);
        Ok(())
    }

    fn finish(mut self, particles: usize) -> Result<RunSummary> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.diag.take().expect("open until finish").finish()?;
        let max_drift = crate::diagnostics::max_drift(&self.rows).ok_or(Error::EmptyEnsemble)?;
        Ok(RunSummary {
            particles,
            snapshots: self.count,
            rows: self.rows,
            max_drift,
            out_dir: self.dir,
        })
    }
}

/// Sample the initial markers and integrate the limit model, writing
/// gyro-frame snapshots and `diag.csv` into `out`.
pub fn run_limit(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    let (_, gyro) = sample_initial(cfg)?;
    let mut rec = Recorder::new(out)?;
    integrate(
        &gyro,
        &cfg.integrator,
        cfg.run.t_end,
        Some(cfg.run.snapshot_every),
        |e| rec.record(e),
    )?;
    rec.finish(gyro.len())
}

/// Sample the initial markers and integrate the full model, writing
/// lab-frame snapshots and `diag.csv` (computed on the filtered state).
pub fn run_full(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    let (lab, _) = sample_initial(cfg)?;
    let split = cfg.split_for(&cfg.params)?;
    let mut rec = Recorder::new(out)?;
    integrate_full(
        &lab,
        &split,
        cfg.run.t_end,
        Some(cfg.run.snapshot_every),
        |e| rec.record(e),
    )?;
    rec.finish(lab.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    /// `(ε, trajectory error)` in the order of the sweep.
    pub rows: Vec<(f64, f64)>,
}

impl CompareReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].1 < w[0].1)
    }

    pub fn table(&self) -> String {
        let mut s = String::from("epsilon,trajectory_error\n");
        for (eps, err) in &self.rows {
            s.push_str(&format!("{eps},{err:e}\n"));
        }
        s
    }
}

/// Run the limit model once and the full model for each `ε` from the same
/// markers, and measure how far the filtered full trajectories are from the
/// limit one. With the electric field disabled the reference is the
/// motionless initial state, which the filter must reproduce exactly.
pub fn compare(
    cfg: &RunConfig,
    eps_list: &[f64],
    metric: TrajectoryMetric,
) -> Result<CompareReport> {
    crate::app::config::check_eps_list(eps_list)?;
    let (lab, gyro) = sample_initial(cfg)?;
    let (t_end, every) = (cfg.run.t_end, Some(cfg.run.snapshot_every));
    let reference = if cfg.split.field_enabled {
        integrate(&gyro, &cfg.integrator, t_end, every, |_| {})?
    } else {
        frozen_record(&gyro, t_end, cfg.run.snapshot_every)?
    };
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let params = cfg.params.with_epsilon(eps);
        let split = cfg.split_for(&params)?;
        let mut start = lab.clone();
        start.params = params;
        let full = integrate_full(&start, &split, t_end, every, |_| {})?;
        let filtered = filtered_trajectory(&full, &params)?;
        rows.push((eps, trajectory_error_with(&filtered, &reference, metric)?));
    }
    Ok(CompareReport { rows })
}

fn frozen_record(gyro: &Ensemble, t_end: f64, every: f64) -> Result<TrajectoryRecord> {
    let mut rec = TrajectoryRecord::new(Frame::Gyro);
    let n = crate::stepping::step_count(t_end - gyro.time, every);
    for i in 0..=n {
        let mut snap = gyro.clone();
        snap.time = if i == n {
            t_end
        } else {
            gyro.time + i as f64 * every
        };
        rec.push(snap)?;
    }
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    pub samples: usize,
    pub max_error: f64,
    pub mean_error: f64,
}

/// Closed-form kernel against its circle-average definition at random
/// points at least `1e-3` away from the switching surface, with
/// `ω_c ∈ {±1, ±1.7, ±3}` and no regularization.
pub fn verify_kernel(n_samples: usize, n_nodes: usize, seed: u64) -> Result<KernelReport> {
    const OMEGAS: [f64; 6] = [1.0, -1.0, 1.7, -1.7, 3.0, -3.0];
    const MARGIN: f64 = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max_error, mut total) = (0.0f64, 0.0);
    let mut done = 0;
    while done < n_samples {
        let omega_c = OMEGAS[rng.random_range(0..OMEGAS.len())];
        let mut draw = || Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (xi, eta) = (draw(), draw());
        if (xi.norm() - eta.norm() / omega_c.abs()).abs() <= MARGIN {
            continue;
        }
        let params = PhysicalParams::new(omega_c, 1.0, 0.0)?;
        let err = (gyro_kernel(xi, eta, &params)?
            - gyro_average_oracle(xi, eta, &params, n_nodes)?)
        .abs();
        max_error = max_error.max(err);
        total += err;
        done += 1;
    }
    let mean_error = if n_samples > 0 {
        total / n_samples as f64
    } else {
        0.0
    };
    Ok(KernelReport {
        samples: n_samples,
        max_error,
        mean_error,
    })
}

/// Diagnostics of stored snapshots; lab-frame files are filtered first.
pub fn diagnose(paths: &[PathBuf]) -> Result<Vec<DiagRow>> {
    paths
        .iter()
        .map(|p| {
            let ens = io::read_snapshot(p)?;
            let gyro = match ens.frame {
                Frame::Gyro => ens,
                Frame::Lab => ens.to_gyro_frame()?,
            };
            DiagRow::of(&gyro)
        })
        .collect()
}
