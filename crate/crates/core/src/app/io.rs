//! Snapshot and diagnostics tables.
//!
//! A snapshot file starts with a comment line carrying the ensemble
//! metadata, `# time=… frame=… omega_c=… epsilon=… delta=…`, followed by a
//! `id,x1,x2,v1,v2,w` table. Numbers use the shortest representation that
//! parses back to the same `f64`, so a write-read cycle is exact.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagRow;
use crate::ensemble::{Ensemble, Frame, Particle, PhysicalParams};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub const SNAPSHOT_COLUMNS: [&str; 6] = ["id", "x1", "x2", "v1", "v2", "w"];
pub const DIAG_COLUMNS: [&str; 10] = [
    "t", "mass", "mpx", "mpy", "mvx", "mvy", "possq", "velsq", "e_elec", "e_kin",
];
const UNITS: &str = "# units: dimensionless (ω_c, ε and δ as in the run parameters)";

pub fn snapshot_name(index: usize) -> String {
    format!("snapshot_{index:05}.csv")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| format_err(path, e.to_string())
}

pub fn write_snapshot(path: &Path, ens: &Ensemble) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(io_err(path))?;
    let p = &ens.params;
    writeln!(
        file,
        "# time={} frame={} omega_c={} epsilon={} delta={}",
        ens.time,
        ens.frame.as_str(),
        p.omega_c,
        p.epsilon,
        p.delta
    )
    .map_err(io_err(path))?;
    writeln!(file, "{UNITS}").map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(SNAPSHOT_COLUMNS).map_err(csv_err(path))?;
    for (i, q) in ens.particles.iter().enumerate() {
        w.write_record([
            i.to_string(),
            q.pos.x.to_string(),
            q.pos.y.to_string(),
            q.vel.x.to_string(),
            q.vel.y.to_string(),
            q.weight.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn parse_metadata(path: &Path, line: &str) -> Result<(f64, Frame, PhysicalParams)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| format_err(path, "missing '# time=… frame=…' metadata line"))?;
    let mut time = None;
    let mut frame = None;
    let (mut omega_c, mut epsilon, mut delta) = (None, None, None);
    for item in body.split_whitespace() {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| format_err(path, format!("malformed metadata entry '{item}'")))?;
        let num = || {
            value
                .parse::<f64>()
                .map_err(|_| format_err(path, format!("bad number for {key}: '{value}'")))
        };
        match key {
            "time" => time = Some(num()?),
            "frame" => frame = Some(value.parse::<Frame>().map_err(|m| format_err(path, m))?),
            "omega_c" => omega_c = Some(num()?),
            "epsilon" => epsilon = Some(num()?),
            "delta" => delta = Some(num()?),
            other => return Err(format_err(path, format!("unknown metadata key '{other}'"))),
        }
    }
    let missing = |name: &str| format_err(path, format!("metadata lacks '{name}'"));
    let params = PhysicalParams::new(
        omega_c.ok_or_else(|| missing("omega_c"))?,
        epsilon.ok_or_else(|| missing("epsilon"))?,
        delta.ok_or_else(|| missing("delta"))?,
    )
    .map_err(|e| format_err(path, e.to_string()))?;
    Ok((
        time.ok_or_else(|| missing("time"))?,
        frame.ok_or_else(|| missing("frame"))?,
        params,
    ))
}

pub fn read_snapshot(path: &Path) -> Result<Ensemble> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let first = text.lines().next().unwrap_or("");
    let (time, frame, params) = parse_metadata(path, first)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err(path))?;
    if header.iter().ne(SNAPSHOT_COLUMNS) {
        return Err(format_err(
            path,
            format!("expected columns {}", SNAPSHOT_COLUMNS.join(",")),
        ));
    }
    let mut particles = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err(path))?;
        let field = |i: usize| -> Result<f64> {
            record[i].parse::<f64>().map_err(|_| {
                format_err(
                    path,
                    format!(
                        "row {row}: bad value '{}' in column {}",
                        &record[i], SNAPSHOT_COLUMNS[i]
                    ),
                )
            })
        };
        let id: usize = record[0]
            .parse()
            .map_err(|_| format_err(path, format!("row {row}: bad id '{}'", &record[0])))?;
        if id != row {
            return Err(format_err(
                path,
                format!("row {row}: ids must run 0, 1, 2, … (found {id})"),
            ));
        }
        let p = Particle::new(
            Vec2::new(field(1)?, field(2)?),
            Vec2::new(field(3)?, field(4)?),
            field(5)?,
        )
        .map_err(|e| format_err(path, format!("row {row}: {e}")))?;
        particles.push(p);
    }
    Ok(Ensemble::new(particles, params, time, frame))
}

/// Streaming writer for `diag.csv` rows.
pub struct DiagWriter<W: Write> {
    path: PathBuf,
    inner: csv::Writer<W>,
}

impl DiagWriter<std::fs::File> {
    pub fn create(path: &Path) -> Result<Self> {
        let file = std::fs::File::create(path).map_err(io_err(path))?;
        Self::new(file, path)
    }
}

impl<W: Write> DiagWriter<W> {
    /// Writes the units comment and the header to `sink`; `label` names the
    /// destination in error messages.
    pub fn new(mut sink: W, label: &Path) -> Result<Self> {
        writeln!(sink, "{UNITS}").map_err(io_err(label))?;
        let mut inner = csv::Writer::from_writer(sink);
        inner.write_record(DIAG_COLUMNS).map_err(csv_err(label))?;
        Ok(Self {
            path: label.to_path_buf(),
            inner,
        })
    }

    pub fn write(&mut self, row: &DiagRow) -> Result<()> {
        let m = &row.moments;
        let values = [
            row.time,
            m.mass,
            m.mean_pos.x,
            m.mean_pos.y,
            m.mean_vel.x,
            m.mean_vel.y,
            m.pos_sq,
            m.vel_sq,
            row.energy.electric,
            row.energy.kinetic,
        ];
        self.inner
            .write_record(values.map(|v| v.to_string()))
            .map_err(csv_err(&self.path))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(io_err(&self.path))
    }
}

/// Rows of a `diag.csv` file as `[t, mass, …, e_kin]`.
pub fn read_diag(path: &Path) -> Result<Vec<[f64; 10]>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err(path))?;
    let header = reader.headers().map_err(csv_err(path))?;
    if header.iter().ne(DIAG_COLUMNS) {
        return Err(format_err(
            path,
            format!("expected columns {}", DIAG_COLUMNS.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err(path))?;
        let mut out = [0.0; 10];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = record[i].parse().map_err(|_| {
                format_err(path, format!("row {row}: bad value in {}", DIAG_COLUMNS[i]))
            })?;
        }
        rows.push(out);
    }
    Ok(rows)
}
