//! Fixed-step time loop shared by both models.

use crate::ensemble::{Ensemble, TrajectoryRecord};
use crate::error::{ConfigError, Error, Result};

fn near_integer(x: f64) -> Option<usize> {
    let r = x.round();
    if r >= 0.0 && (x - r).abs() <= 1e-9 * r.max(1.0) {
        Some(r as usize)
    } else {
        None
    }
}

/// Number of steps of nominal size `dt` that cover `span`. A trailing
/// partial step is used when `dt` does not divide `span`.
pub(crate) fn step_count(span: f64, dt: f64) -> usize {
    let n = span / dt;
    near_integer(n).unwrap_or_else(|| n.ceil() as usize)
}

/// Stride, in steps, between recorded snapshots.
pub(crate) fn snapshot_stride(every: f64, dt: f64) -> Result<usize> {
    if !(every.is_finite() && every > 0.0) {
        return Err(ConfigError::SnapshotEvery(every).into());
    }
    match near_integer(every / dt) {
        Some(s) if s >= 1 => Ok(s),
        _ => Err(ConfigError::SnapshotCadence { every, dt }.into()),
    }
}

/// Advance `ens` to `t_end` with `step(current, h)`, recording the initial
/// state, every `snapshot_every` units of time, and the final state. The
/// observer sees each recorded snapshot.
pub(crate) fn drive<S, O>(
    ens: &Ensemble,
    dt: f64,
    t_end: f64,
    snapshot_every: Option<f64>,
    mut step: S,
    mut observer: O,
) -> Result<TrajectoryRecord>
where
    S: FnMut(&Ensemble, f64) -> Result<Ensemble>,
    O: FnMut(&Ensemble),
{
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let t0 = ens.time;
    if !(t_end >= t0) {
        return Err(Error::InvalidParameter(format!(
            "t_end = {t_end} precedes the current time {t0}"
        )));
    }
    let stride = match snapshot_every {
        Some(every) => Some(snapshot_stride(every, dt)?),
        None => None,
    };
    let n_steps = step_count(t_end - t0, dt);

    let mut record = TrajectoryRecord::new(ens.frame);
    observer(ens);
    record.push(ens.clone())?;

    let mut current = ens.clone();
    for i in 1..=n_steps {
        let h = if i == n_steps {
            t_end - (t0 + (n_steps - 1) as f64 * dt)
        } else {
            dt
        };
        let mut next = step(&current, h)?;
        next.time = if i == n_steps {
            t_end
        } else {
            t0 + i as f64 * dt
        };
        let due = i == n_steps || stride.is_some_and(|s| i % s == 0);
        if due {
            observer(&next);
            record.push(next.clone())?;
        }
        current = next;
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{Frame, PhysicalParams};

    fn empty() -> Ensemble {
        Ensemble::new(
            vec![],
            PhysicalParams::new(1.0, 1.0, 0.0).unwrap(),
            0.0,
            Frame::Gyro,
        )
    }

    #[test]
    fn counts_and_strides() {
        assert_eq!(step_count(1.0, 0.1), 10);
        assert_eq!(step_count(1.0, 0.3), 4);
        assert_eq!(snapshot_stride(0.5, 0.1).unwrap(), 5);
        assert!(snapshot_stride(0.25, 0.1).is_err());
        assert!(snapshot_stride(0.0, 0.1).is_err());
    }

    #[test]
    fn zero_span_records_one_snapshot() {
        let mut seen = 0;
        let rec = drive(
            &empty(),
            0.1,
            0.0,
            Some(0.5),
            |e, _| Ok(e.clone()),
            |_| seen += 1,
        )
        .unwrap();
        assert_eq!(rec.snapshots.len(), 1);
        assert_eq!(seen, 1);
    }

    #[test]
    fn snapshot_times_are_exact_multiples() {
        let rec = drive(&empty(), 0.1, 1.05, Some(0.5), |e, _| Ok(e.clone()), |_| {}).unwrap();
        assert_eq!(rec.times(), vec![0.0, 0.5, 1.0, 1.05]);
        assert!(drive(&empty(), 0.1, -1.0, None, |e, _| Ok(e.clone()), |_| {}).is_err());
    }
}
