//! K41F snapshots, physical-space CSV and run directories.
//!
//! K41F is little-endian: b"K41F", u32 version (1), u32 N, f64 L, f64 ν,
//! f64 t, then u₁, u₂, u₃ as N³ (re, im) pairs each in FFT slot order.

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::analysis::HistoryStats;
use crate::error::{K41Error, Result};
use crate::evolve::FlowHistory;
use crate::field::{PhysicalField, SpectralField};

const MAGIC: &[u8; 4] = b"K41F";
const VERSION: u32 = 1;
/// Refuse headers that would allocate more than 1024³ modes.
const MAX_N: u32 = 1024;

pub fn write_k41f<W: Write>(w: W, f: &SpectralField) -> Result<()> {
    let mut w = BufWriter::new(w);
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(f.n as u32)?;
    w.write_f64::<LittleEndian>(f.l)?;
    w.write_f64::<LittleEndian>(f.nu)?;
    w.write_f64::<LittleEndian>(f.t)?;
    for c in &f.coeffs {
        for z in c {
            w.write_f64::<LittleEndian>(z.re)?;
            w.write_f64::<LittleEndian>(z.im)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_k41f<R: Read>(r: R) -> Result<SpectralField> {
    let mut r = BufReader::new(r);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| K41Error::Format("file too short for a K41F header".into()))?;
    if &magic != MAGIC {
        return Err(K41Error::Format("bad magic, not a K41F file".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(K41Error::Format(format!("unsupported K41F version {version}")));
    }
    let n = r.read_u32::<LittleEndian>()?;
    if n > MAX_N {
        return Err(K41Error::Format(format!("grid size {n} too large")));
    }
    let l = r.read_f64::<LittleEndian>()?;
    let nu = r.read_f64::<LittleEndian>()?;
    let t = r.read_f64::<LittleEndian>()?;
    if !t.is_finite() {
        return Err(K41Error::Format("non-finite time".into()));
    }
    let mut f = SpectralField::zeros(n as usize, l, nu).map_err(|e| K41Error::Format(e.to_string()))?;
    f.t = t;
    for c in 0..3 {
        for z in f.coeffs[c].iter_mut() {
            let re = r.read_f64::<LittleEndian>().map_err(|_| K41Error::Format("truncated coefficient block".into()))?;
            let im = r.read_f64::<LittleEndian>().map_err(|_| K41Error::Format("truncated coefficient block".into()))?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(K41Error::Format("non-finite coefficient".into()));
            }
            *z = Complex64::new(re, im);
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(K41Error::Format("trailing bytes after the coefficient blocks".into()));
    }
    f.div_free = f.max_divergence() <= 1e-12 * f.max_coeff().max(f64::MIN_POSITIVE) * f.k0() * f.n as f64;
    Ok(f)
}

pub fn save_k41f(path: &Path, f: &SpectralField) -> Result<()> {
    write_k41f(File::create(path)?, f)
}

pub fn load_k41f(path: &Path) -> Result<SpectralField> {
    read_k41f(File::open(path)?)
}

/// `x,y,z,u1,u2,u3` for every unmasked sample.
pub fn write_physical_csv<W: Write>(w: W, p: &PhysicalField) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "x,y,z,u1,u2,u3")?;
    for q in 0..p.len() {
        if p.mask.as_ref().map_or(false, |m| !m[q]) {
            continue;
        }
        let x = p.position(q);
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            x[0], x[1], x[2], p.values[0][q], p.values[1][q], p.values[2][q]
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexRow {
    pub i: usize,
    pub t: f64,
    pub file: String,
    pub energy: f64,
    pub dissipation: f64,
}

pub const INDEX_FILE: &str = "index.csv";

/// Streams snapshots into a directory, keeping `index.csv` current.
pub struct HistoryWriter {
    dir: PathBuf,
    rows: Vec<IndexRow>,
}

impl HistoryWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(HistoryWriter { dir: dir.to_path_buf(), rows: Vec::new() })
    }

    pub fn push(&mut self, f: &SpectralField) -> Result<()> {
        let i = self.rows.len();
        let file = format!("snap_{i:05}.k41f");
        save_k41f(&self.dir.join(&file), f)?;
        self.rows.push(IndexRow { i, t: f.t, file, energy: f.energy(), dissipation: f.dissipation() });
        write_index(&self.dir.join(INDEX_FILE), &self.rows)
    }

    pub fn rows(&self) -> &[IndexRow] {
        &self.rows
    }
}

fn write_index(path: &Path, rows: &[IndexRow]) -> Result<()> {
    let mut wr = csv::Writer::from_path(path).map_err(|e| K41Error::Format(e.to_string()))?;
    wr.write_record(["i", "t", "file", "energy", "dissipation"]).map_err(|e| K41Error::Format(e.to_string()))?;
    for r in rows {
        wr.write_record(&[r.i.to_string(), format!("{:e}", r.t), r.file.clone(), format!("{:e}", r.energy), format!("{:e}", r.dissipation)])
            .map_err(|e| K41Error::Format(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_index(dir: &Path) -> Result<Vec<IndexRow>> {
    let path = dir.join(INDEX_FILE);
    let file = File::open(&path)?;
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let bad = |what: &str| K41Error::Format(format!("{}: {what}", path.display()));
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| bad(&e.to_string()))?;
        if rec.len() != 5 {
            return Err(bad("expected columns i,t,file,energy,dissipation"));
        }
        let num = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(&format!("bad number {:?}", &rec[k])));
        rows.push(IndexRow {
            i: rec[0].parse().map_err(|_| bad("bad index"))?,
            t: num(1)?,
            file: rec[2].to_string(),
            energy: num(3)?,
            dissipation: num(4)?,
        });
    }
    if rows.is_empty() {
        return Err(bad("no samples"));
    }
    Ok(rows)
}

/// Per-sample statistics of a run directory, one snapshot in memory at a time.
pub fn load_history_stats(dir: &Path) -> Result<HistoryStats> {
    let rows = read_index(dir)?;
    let mut stats: Option<HistoryStats> = None;
    for r in &rows {
        let f = load_k41f(&dir.join(&r.file))?;
        let s = stats.get_or_insert_with(|| HistoryStats::new(f.n, f.l, f.nu));
        if f.n != s.n || f.l != s.l || f.nu != s.nu {
            return Err(K41Error::Format(format!("{} differs in N, L or nu from the first snapshot", r.file)));
        }
        s.push(&f).map_err(|e| K41Error::Format(e.to_string()))?;
    }
    Ok(stats.expect("index is non-empty"))
}

pub fn load_history(dir: &Path) -> Result<FlowHistory> {
    let rows = read_index(dir)?;
    let samples = rows.iter().map(|r| load_k41f(&dir.join(&r.file))).collect::<Result<Vec<_>>>()?;
    FlowHistory::new(samples).map_err(|e| K41Error::Format(e.to_string()))
}
