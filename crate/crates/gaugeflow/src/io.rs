//! On-disk formats: binary field snapshots with a text sidecar, and CSV
//! time-series writers.
//!
//! # Snapshot layout
//!
//! Everything is little-endian:
//!
//! | bytes            | content                                          |
//! |------------------|--------------------------------------------------|
//! | 8                | magic `FLDSNAP1`                                 |
//! | 4                | `u32` component count (1 scalar, 3 vector)       |
//! | 3 x 4            | `u32` grid dims `nx ny nz`                       |
//! | 3 x 8            | `f64` box lengths                                |
//! | 4 + len          | `u32` name byte length, then UTF-8 name          |
//! | 8                | `f64` simulation time                            |
//! | ncomp x n x 8    | `f64` values, component-major, x fastest         |
//!
//! A plain-text sidecar at `<path>.meta.txt` repeats the header fields so a
//! snapshot can be identified without tooling.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Backend, Grid, ScalarField, VectorField};

const MAGIC: &[u8; 8] = b"FLDSNAP1";
const MAX_NAME_BYTES: usize = 4096;
const MAX_COMPONENTS: u32 = 16;

pub fn write_scalar_snapshot(
    path: impl AsRef<Path>,
    name: &str,
    time: f64,
    field: &ScalarField,
) -> Result<()> {
    write_snapshot(path.as_ref(), name, time, field.grid(), &[field.values()])
}

pub fn write_vector_snapshot(
    path: impl AsRef<Path>,
    name: &str,
    time: f64,
    field: &VectorField,
) -> Result<()> {
    write_snapshot(
        path.as_ref(),
        name,
        time,
        field.grid(),
        &[field.component(0), field.component(1), field.component(2)],
    )
}

fn write_snapshot(
    path: &Path,
    name: &str,
    time: f64,
    grid: &Grid,
    components: &[&[f64]],
) -> Result<()> {
    if name.len() > MAX_NAME_BYTES {
        return Err(Error::MalformedSnapshot(format!(
            "field name exceeds {MAX_NAME_BYTES} bytes"
        )));
    }
    let dims = grid.shape();
    let lengths = grid.lengths();
    let mut buf = Vec::with_capacity(64 + name.len() + components.len() * grid.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(components.len() as u32).to_le_bytes());
    for d in dims {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for l in lengths {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
    buf.extend_from_slice(name.as_bytes());
    buf.extend_from_slice(&time.to_le_bytes());
    for comp in components {
        for v in *comp {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, &buf)?;

    let mut sidecar = fs::File::create(sidecar_path(path))?;
    writeln!(sidecar, "snapshot = FLDSNAP1")?;
    writeln!(sidecar, "name = {name}")?;
    writeln!(sidecar, "time = {time}")?;
    writeln!(sidecar, "components = {}", components.len())?;
    writeln!(sidecar, "dims = {} {} {}", dims[0], dims[1], dims[2])?;
    writeln!(
        sidecar,
        "lengths = {} {} {}",
        lengths[0], lengths[1], lengths[2]
    )?;
    writeln!(
        sidecar,
        "order = component-major; x fastest, then y, then z"
    )?;
    writeln!(sidecar, "scalar = f64 little-endian")?;
    Ok(())
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.txt");
    os.into()
}

/// A snapshot read back from disk, before any grid is attached.
#[derive(Debug, Clone)]
pub struct Snapshot {
    name: String,
    time: f64,
    dims: [usize; 3],
    lengths: [f64; 3],
    components: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.components[c]
    }

    fn grid(&self, backend: Backend) -> Result<Grid> {
        Grid::new(&self.dims, &self.lengths, backend)
    }

    pub fn to_scalar(&self, backend: Backend) -> Result<ScalarField> {
        if self.components.len() != 1 {
            return Err(Error::MalformedSnapshot(format!(
                "expected a 1-component snapshot for a scalar field, found {}",
                self.components.len()
            )));
        }
        ScalarField::from_values(&self.grid(backend)?, self.components[0].clone())
    }

    pub fn to_vector(&self, backend: Backend) -> Result<VectorField> {
        if self.components.len() != 3 {
            return Err(Error::MalformedSnapshot(format!(
                "expected a 3-component snapshot for a vector field, found {}",
                self.components.len()
            )));
        }
        let grid = self.grid(backend)?;
        let [x, y, z] = [0, 1, 2].map(|c| {
            ScalarField::from_values(&grid, self.components[c].clone()).expect("length checked")
        });
        VectorField::from_components(&grid, x, y, z)
    }
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let buf = fs::read(path.as_ref())?;
    let mut cur = Cursor { buf: &buf, at: 0 };
    let magic = cur.bytes(8)?;
    if magic != MAGIC {
        return Err(Error::MalformedSnapshot(
            "bad magic; not a field snapshot".into(),
        ));
    }
    let ncomp = cur.u32()?;
    if ncomp == 0 || ncomp > MAX_COMPONENTS {
        return Err(Error::MalformedSnapshot(format!(
            "implausible component count {ncomp}"
        )));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = cur.u32()? as usize;
        if *d == 0 {
            return Err(Error::MalformedSnapshot("zero grid dimension".into()));
        }
    }
    let mut lengths = [0.0f64; 3];
    for l in &mut lengths {
        *l = cur.f64()?;
        if !l.is_finite() || *l <= 0.0 {
            return Err(Error::MalformedSnapshot(format!("bad box length {l}")));
        }
    }
    let name_len = cur.u32()? as usize;
    if name_len > MAX_NAME_BYTES {
        return Err(Error::MalformedSnapshot(format!(
            "field name length {name_len} exceeds {MAX_NAME_BYTES}"
        )));
    }
    let name = std::str::from_utf8(cur.bytes(name_len)?)
        .map_err(|_| Error::MalformedSnapshot("field name is not UTF-8".into()))?
        .to_owned();
    let time = cur.f64()?;
    let n = dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .ok_or_else(|| Error::MalformedSnapshot("grid dimensions overflow".into()))?;
    let expected = n
        .checked_mul(ncomp as usize)
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| Error::MalformedSnapshot("field data size overflows".into()))?;
    let remaining = buf.len() - cur.at;
    if remaining < expected {
        return Err(Error::MalformedSnapshot("truncated snapshot".into()));
    }
    if remaining > expected {
        return Err(Error::MalformedSnapshot(format!(
            "{} trailing bytes after field data",
            remaining - expected
        )));
    }
    let mut components = Vec::with_capacity(ncomp as usize);
    for _ in 0..ncomp {
        let mut comp = Vec::with_capacity(n);
        for _ in 0..n {
            comp.push(cur.f64()?);
        }
        components.push(comp);
    }
    Ok(Snapshot {
        name,
        time,
        dims,
        lengths,
        components,
    })
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn bytes(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.at + len > self.buf.len() {
            return Err(Error::MalformedSnapshot("truncated snapshot".into()));
        }
        let out = &self.buf[self.at..self.at + len];
        self.at += len;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }
}

/// Line-buffered CSV writer with a fixed column count. Values are written
/// with Rust's shortest round-trip float formatting, so identical runs
/// produce byte-identical files.
pub struct CsvWriter {
    out: std::io::BufWriter<fs::File>,
    cols: usize,
}

impl CsvWriter {
    pub fn create(path: impl AsRef<Path>, header: &[&str]) -> Result<Self> {
        if header.is_empty() {
            return Err(Error::Config(
                "CSV header must name at least one column".into(),
            ));
        }
        let mut out = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(out, "{}", header.join(","))?;
        Ok(Self {
            out,
            cols: header.len(),
        })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "CSV row",
                expected: self.cols,
                got: values.len(),
            });
        }
        let mut line = String::new();
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v}"));
        }
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    #[test]
    fn scalar_snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.snap");
        let grid = Grid::new(&[8, 6, 4], &[TAU, 3.0, 2.5], Backend::CentralDiff2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let field = ScalarField::random_band_limited(&grid, 2, 1.0, &mut rng);
        write_scalar_snapshot(&path, "phi", 1.25, &field).unwrap();

        let snap = read_snapshot(&path).unwrap();
        assert_eq!(snap.name(), "phi");
        assert_eq!(snap.time(), 1.25);
        assert_eq!(snap.dims(), [8, 6, 4]);
        assert_eq!(snap.lengths(), [TAU, 3.0, 2.5]);
        assert_eq!(snap.component_count(), 1);
        assert_eq!(snap.component(0), field.values());

        let back = snap.to_scalar(Backend::CentralDiff2).unwrap();
        assert_eq!(back.values(), field.values());
        assert_eq!(back.grid().shape(), grid.shape());

        let meta = fs::read_to_string(path.with_extension("snap.meta.txt")).unwrap();
        assert!(meta.contains("name = phi"));
        assert!(meta.contains("dims = 8 6 4"));
        assert!(meta.contains("components = 1"));
    }

    #[test]
    fn vector_snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.snap");
        let grid = Grid::new(&[8, 8, 8], &[TAU; 3], Backend::Spectral).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let field = VectorField::random_band_limited(&grid, 2, 0.7, &mut rng);
        write_vector_snapshot(&path, "b", 0.0, &field).unwrap();

        let snap = read_snapshot(&path).unwrap();
        assert_eq!(snap.component_count(), 3);
        let back = snap.to_vector(Backend::Spectral).unwrap();
        for c in 0..3 {
            assert_eq!(back.component(c), field.component(c));
        }
        assert!(matches!(
            snap.to_scalar(Backend::Spectral),
            Err(Error::MalformedSnapshot(_))
        ));
    }

    #[test]
    fn malformed_snapshots_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let garbage = dir.path().join("garbage.snap");
        fs::write(&garbage, b"NOTASNAPxxxxyyyyzzzz").unwrap();
        assert!(matches!(
            read_snapshot(&garbage),
            Err(Error::MalformedSnapshot(_))
        ));

        let path = dir.path().join("w.snap");
        let grid = Grid::new(&[4, 4, 4], &[TAU; 3], Backend::CentralDiff2).unwrap();
        let field = ScalarField::from_fn(&grid, |x, _, _| x.sin());
        write_scalar_snapshot(&path, "w", 2.0, &field).unwrap();

        let full = fs::read(&path).unwrap();
        let truncated = dir.path().join("trunc.snap");
        fs::write(&truncated, &full[..full.len() - 10]).unwrap();
        assert!(matches!(
            read_snapshot(&truncated),
            Err(Error::MalformedSnapshot(_))
        ));

        let padded = dir.path().join("padded.snap");
        let mut bytes = full.clone();
        bytes.extend_from_slice(&[0u8; 4]);
        fs::write(&padded, &bytes).unwrap();
        assert!(matches!(
            read_snapshot(&padded),
            Err(Error::MalformedSnapshot(_))
        ));

        let snap = read_snapshot(&path).unwrap();
        assert!(matches!(
            snap.to_vector(Backend::CentralDiff2),
            Err(Error::MalformedSnapshot(_))
        ));
    }

    #[test]
    fn csv_is_deterministic_and_checks_width() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str| -> Vec<u8> {
            let path = dir.path().join(name);
            let mut csv = CsvWriter::create(&path, &["t", "H", "res"]).unwrap();
            csv.row(&[0.0, 0.5, 1e-12]).unwrap();
            csv.row(&[0.1, 0.5000000001, 2.5e-11]).unwrap();
            csv.finish().unwrap();
            fs::read(path).unwrap()
        };
        let a = write("a.csv");
        let b = write("b.csv");
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,H,res"));
        assert_eq!(lines.next(), Some("0,0.5,0.000000000001"));
        assert_eq!(text.lines().count(), 3);

        let mut csv = CsvWriter::create(dir.path().join("c.csv"), &["t", "H"]).unwrap();
        assert!(matches!(
            csv.row(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
