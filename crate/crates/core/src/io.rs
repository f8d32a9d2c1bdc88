//! Field snapshots and CSV output.
//!
//! Snapshot layout, all little endian:
//!
//! ```text
//! b"NLCK1"            magic
//! u64 x 3             extents
//! f64 x 3             spacing
//! u8  x 3             topology codes
//! f64 x 3 per node    row-major vector samples
//! ```

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{unit_defect, DirectorField, Grid, Topology, Vec3, VectorField};

pub const MAGIC: &[u8; 5] = b"NLCK1";

/// Largest grid exported point by point by [`write_field_csv`].
pub const CSV_MAX_NODES: usize = 1 << 18;

pub fn write_snapshot<W: Write>(mut w: W, f: &VectorField) -> Result<()> {
    let g = f.grid();
    w.write_all(MAGIC)?;
    for n in g.extents() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for h in g.spacing() {
        w.write_all(&h.to_le_bytes())?;
    }
    for t in g.topology() {
        w.write_all(&[t.code()])?;
    }
    let mut buf = Vec::with_capacity(24 * g.len());
    for v in f.values() {
        for c in 0..3 {
            buf.extend_from_slice(&v[c].to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_exact<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<VectorField> {
    if &read_exact::<_, 5>(&mut r)? != MAGIC {
        return Err(Error::InvalidInput("not a field snapshot (bad magic)".into()));
    }
    let mut n = [0usize; 3];
    for e in n.iter_mut() {
        *e = usize::try_from(u64::from_le_bytes(read_exact(&mut r)?))
            .map_err(|_| Error::InvalidInput("snapshot extent overflows".into()))?;
    }
    let mut h = [0.0; 3];
    for s in h.iter_mut() {
        *s = f64::from_le_bytes(read_exact(&mut r)?);
    }
    let mut topo = [Topology::Periodic; 3];
    for t in topo.iter_mut() {
        let [c] = read_exact::<_, 1>(&mut r)?;
        *t = Topology::from_code(c).ok_or_else(|| Error::InvalidInput(format!("unknown topology code {c}")))?;
    }
    let grid = Grid::new(n, h, topo)?;
    let mut raw = vec![0u8; 24 * grid.len()];
    r.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(24)
        .map(|c| {
            let x = |k: usize| f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().unwrap());
            Vec3::new(x(0), x(1), x(2))
        })
        .collect();
    VectorField::from_vec(&grid, data)
}

pub fn save_snapshot(path: &Path, f: &VectorField) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io_at(path, e))?;
    write_snapshot(std::io::BufWriter::new(file), f)
}

pub fn load_snapshot(path: &Path) -> Result<VectorField> {
    read_snapshot(std::io::BufReader::new(std::fs::File::open(path).map_err(|e| Error::io_at(path, e))?))
}

/// Largest unit-length defect accepted from a saved director.
///
/// Monitor-only runs never renormalize, so their snapshots carry the norm
/// drift of the time stepping (typically 1e-8 to 1e-5).
pub const SNAPSHOT_DIRECTOR_TOL: f64 = 1e-3;

/// Loads a saved director and renormalizes it, rejecting defects above
/// [`SNAPSHOT_DIRECTOR_TOL`]. Returns the field and the defect it had.
pub fn load_director_snapshot(path: &Path) -> Result<(DirectorField, f64)> {
    let f = load_snapshot(path)?;
    let defect = unit_defect(&f);
    if !(defect <= SNAPSHOT_DIRECTOR_TOL) {
        return Err(Error::Domain(format!(
            "{}: director deviates from unit length by {defect:e} (limit {SNAPSHOT_DIRECTOR_TOL:e})",
            path.display()
        )));
    }
    Ok((DirectorField::normalized(f)?, defect))
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// Minimal CSV writer for numeric tables.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, header: &[&str]) -> Result<Self> {
        writeln!(out, "{}", header.join(","))?;
        Ok(Self { out, columns: header.len() })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<()> {
        if cells.len() != self.columns {
            return Err(Error::InvalidInput(format!("row has {} cells, header {}", cells.len(), self.columns)));
        }
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Per-node export `i,j,k,x,y,z,v0,v1,v2` for small grids.
pub fn write_field_csv<W: Write>(out: W, f: &VectorField) -> Result<()> {
    let g = f.grid();
    if g.len() > CSV_MAX_NODES {
        return Err(Error::InvalidInput(format!("grid has {} nodes; CSV export is capped at {CSV_MAX_NODES}", g.len())));
    }
    let mut w = CsvWriter::new(out, &["i", "j", "k", "x", "y", "z", "v0", "v1", "v2"])?;
    for (idx, v) in f.values().iter().enumerate() {
        let c = g.coords(idx);
        let p = g.position(idx);
        let mut cells: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        cells.extend((0..3).map(|a| fmt17(p[a])));
        cells.extend((0..3).map(|a| fmt17(v[a])));
        w.row(&cells)?;
    }
    w.flush()
}
