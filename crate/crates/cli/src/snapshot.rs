//! Snapshot files: a fixed header followed by the samples on the sphere.
//!
//! | bytes | field |
//! |-------|-------|
//! | 8 | magic `DFSNAP\0\0` |
//! | 4 | version (u32) |
//! | 4 | rows, colatitude samples from 0 to π (u32) |
//! | 4 | cols, longitude samples from -π (u32) |
//! | 4 | flags, bit 0 set when complex (u32) |
//! | 8 | t (f64) |
//! | 8 | problem hash (u64) |
//!
//! All little-endian. The data follows row-major as f64, interleaved re/im
//! when complex.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use dfsphere::dfs::SphereSamples;
use dfsphere::C64;

pub const MAGIC: [u8; 8] = *b"DFSNAP\0\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub rows: usize,
    pub cols: usize,
    pub t: f64,
    pub problem_hash: u64,
    pub complex: bool,
    /// Row-major, `rows × cols`.
    pub values: Vec<C64>,
}

impl SnapshotFile {
    /// Marks the data complex when any imaginary part exceeds roundoff.
    pub fn from_samples(samples: &SphereSamples, t: f64, problem_hash: u64) -> Self {
        let (rows, cols) = samples.values.shape();
        let values: Vec<C64> = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|ix| samples.values[ix])
            .collect();
        let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let complex = values
            .iter()
            .any(|z| z.im.abs() > 1e-12 * scale.max(1e-300));
        Self {
            rows,
            cols,
            t,
            problem_hash,
            complex,
            values,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.values[row * self.cols + col]
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&MAGIC)?;
        for v in [
            VERSION,
            self.rows as u32,
            self.cols as u32,
            self.complex as u32,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.t.to_le_bytes())?;
        w.write_all(&self.problem_hash.to_le_bytes())?;
        for z in &self.values {
            w.write_all(&z.re.to_le_bytes())?;
            if self.complex {
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).context("truncated header")?;
        if magic != MAGIC {
            bail!("not a snapshot file (bad magic)");
        }
        let mut u32s = [0u32; 4];
        for v in &mut u32s {
            let mut b = [0u8; 4];
            r.read_exact(&mut b).context("truncated header")?;
            *v = u32::from_le_bytes(b);
        }
        let [version, rows, cols, flags] = u32s;
        if version != VERSION {
            bail!("unsupported snapshot version {version}");
        }
        let mut b = [0u8; 8];
        r.read_exact(&mut b).context("truncated header")?;
        let t = f64::from_le_bytes(b);
        r.read_exact(&mut b).context("truncated header")?;
        let problem_hash = u64::from_le_bytes(b);
        let complex = flags & 1 == 1;
        let (rows, cols) = (rows as usize, cols as usize);
        let count = rows.checked_mul(cols).context("snapshot too large")?;
        let mut data = Vec::new();
        r.read_to_end(&mut data)?;
        let per = if complex { 16 } else { 8 };
        if data.len() != count * per {
            bail!("expected {} data bytes, found {}", count * per, data.len());
        }
        let f = |k: usize| f64::from_le_bytes(data[8 * k..8 * k + 8].try_into().unwrap());
        let values = (0..count)
            .map(|i| {
                if complex {
                    C64::new(f(2 * i), f(2 * i + 1))
                } else {
                    C64::new(f(i), 0.0)
                }
            })
            .collect();
        Ok(Self {
            rows,
            cols,
            t,
            problem_hash,
            complex,
            values,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut f =
            std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Self::read_from(&mut f).with_context(|| format!("reading {}", path.display()))
    }
}
