//! Resumable binary cache of sieved [`CountVector`]s.
//!
//! One file per (q, limit, grid, artifact version). Layout, all little-endian:
//!
//! ```text
//! magic      8 bytes  "RACECNT\0"
//! format     u32      FORMAT_VERSION
//! version    u32 len + UTF-8 bytes (artifact version)
//! q          u64
//! limit      u64
//! grid_hash  u64      FNV-1a over the grid as u64 LE
//! grid_len   u32
//! records    u32      number of completed checkpoints that follow
//! record     x u64, pi[q] u64, pi2[q] u64, psi[q] f64, primes u64, semiprimes u64
//! ```
//!
//! A file with fewer records than grid points is a checkpoint of an
//! interrupted run; [`cached_counts`] resumes the sieve after its last record.

use std::path::{Path, PathBuf};

use races_core::race::{feed_sieve, Accumulator, CountVector};

use crate::error::CliError;

pub const MAGIC: &[u8; 8] = b"RACECNT\0";
pub const FORMAT_VERSION: u32 = 1;
pub const ENV_DIR: &str = "RACES_CACHE_DIR";

/// Checkpoint roughly every 1/16 of the sieve range.
const BATCHES: u64 = 16;

pub fn grid_hash(grid: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in grid {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

#[derive(Debug, Clone)]
pub struct CountCache {
    dir: PathBuf,
}

impl CountCache {
    pub fn new(dir: PathBuf) -> Self {
        CountCache { dir }
    }

    /// `explicit` if given, else `$RACES_CACHE_DIR` if set and non-empty.
    pub fn resolve(explicit: Option<PathBuf>) -> Option<Self> {
        explicit
            .or_else(|| std::env::var_os(ENV_DIR).filter(|v| !v.is_empty()).map(PathBuf::from))
            .map(CountCache::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, q: u64, grid: &[u64]) -> PathBuf {
        let limit = grid.last().copied().unwrap_or(0);
        self.dir.join(format!(
            "counts-q{q}-x{limit}-g{:016x}-v{}.bin",
            grid_hash(grid),
            races_core::VERSION
        ))
    }

    /// Completed records for this key, or none if absent or unreadable.
    pub fn load(&self, q: u64, grid: &[u64]) -> Vec<CountVector> {
        let path = self.path_for(q, grid);
        let Ok(bytes) = std::fs::read(&path) else {
            return Vec::new();
        };
        match decode(&bytes, q, grid) {
            Ok(records) => records,
            Err(msg) => {
                eprintln!("warning: ignoring cache {}: {msg}", path.display());
                Vec::new()
            }
        }
    }

    pub fn store(&self, q: u64, grid: &[u64], records: &[CountVector]) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::io("cannot create cache dir", &self.dir, e))?;
        let path = self.path_for(q, grid);
        let tmp = path.with_extension("bin.tmp");
        std::fs::write(&tmp, encode(q, grid, records)).map_err(|e| CliError::io("cannot write cache", &tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| CliError::io("cannot write cache", &path, e))
    }
}

pub fn encode(q: u64, grid: &[u64], records: &[CountVector]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let version = races_core::VERSION.as_bytes();
    out.extend_from_slice(&(version.len() as u32).to_le_bytes());
    out.extend_from_slice(version);
    out.extend_from_slice(&q.to_le_bytes());
    out.extend_from_slice(&grid.last().copied().unwrap_or(0).to_le_bytes());
    out.extend_from_slice(&grid_hash(grid).to_le_bytes());
    out.extend_from_slice(&(grid.len() as u32).to_le_bytes());
    out.extend_from_slice(&(records.len() as u32).to_le_bytes());
    for cv in records {
        out.extend_from_slice(&cv.x.to_le_bytes());
        for v in cv.pi.iter().chain(&cv.pi2) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &cv.psi {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&cv.primes_total.to_le_bytes());
        out.extend_from_slice(&cv.semiprimes_total.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or("truncated file")?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, String> {
        Ok(f64::from_bits(self.u64()?))
    }
}

pub fn decode(bytes: &[u8], q: u64, grid: &[u64]) -> Result<Vec<CountVector>, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err("bad magic".into());
    }
    let format = r.u32()?;
    if format != FORMAT_VERSION {
        return Err(format!("format {format}, expected {FORMAT_VERSION}"));
    }
    let vlen = r.u32()? as usize;
    let version = r.take(vlen)?;
    if version != races_core::VERSION.as_bytes() {
        return Err("written by a different version".into());
    }
    let (fq, limit, hash, glen) = (r.u64()?, r.u64()?, r.u64()?, r.u32()? as usize);
    if fq != q || limit != grid.last().copied().unwrap_or(0) || hash != grid_hash(grid) || glen != grid.len() {
        return Err("key mismatch".into());
    }
    let n = r.u32()? as usize;
    if n > glen {
        return Err("more records than grid points".into());
    }
    let qs = q as usize;
    let mut out = Vec::with_capacity(n);
    for &want in &grid[..n] {
        let mut cv = CountVector::zero(q, r.u64()?);
        if cv.x != want {
            return Err(format!("record at x={} where the grid has {want}", cv.x));
        }
        for i in 0..qs {
            cv.pi[i] = r.u64()?;
        }
        for i in 0..qs {
            cv.pi2[i] = r.u64()?;
        }
        for i in 0..qs {
            cv.psi[i] = r.f64()?;
        }
        cv.primes_total = r.u64()?;
        cv.semiprimes_total = r.u64()?;
        out.push(cv);
    }
    if r.pos != bytes.len() {
        return Err("trailing bytes".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheReport {
    /// Checkpoints read from the cache.
    pub loaded: usize,
    /// Checkpoints computed by this run.
    pub computed: usize,
}

/// Counts at every grid point, resuming from and checkpointing to `cache`.
pub fn cached_counts(
    q: u64,
    grid: &[u64],
    cache: Option<&CountCache>,
) -> Result<(Vec<CountVector>, CacheReport), CliError> {
    let mut records = cache.map(|c| c.load(q, grid)).unwrap_or_default();
    let loaded = records.len();
    let limit = grid.last().copied().ok_or_else(|| CliError::Usage("empty grid".into()))?;
    let step = (limit / BATCHES).max(1);
    while records.len() < grid.len() {
        let start = records.len();
        let state = records.last().cloned().unwrap_or_else(|| CountVector::zero(q, 1));
        let target = grid[start].max(state.x.saturating_add(step));
        let end = start + grid[start..].partition_point(|&x| x <= target).max(1);
        let batch = &grid[start..end];
        let mut acc = Accumulator::resume(state, batch)?;
        feed_sieve(&mut acc, *batch.last().unwrap())?;
        records.extend(acc.finish()?);
        if let Some(c) = cache {
            c.store(q, grid, &records)?;
        }
    }
    let computed = records.len() - loaded;
    Ok((records, CacheReport { loaded, computed }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use races_core::race::{accumulate, log_grid};

    #[test]
    fn round_trip() {
        let grid = log_grid(10, 50_000, 30);
        let counts = accumulate(4, &grid, false).unwrap();
        let bytes = encode(4, &grid, &counts);
        let back = decode(&bytes, 4, &grid).unwrap();
        assert_eq!(back, counts);
        assert!(decode(&bytes, 3, &grid).is_err());
        assert!(decode(&bytes[..bytes.len() - 1], 4, &grid).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad, 4, &grid).is_err());
    }

    #[test]
    fn resumes_from_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CountCache::new(dir.path().to_path_buf());
        let grid = log_grid(10, 200_000, 40);
        let full = accumulate(5, &grid, false).unwrap();
        cache.store(5, &grid, &full[..17]).unwrap();
        let (got, report) = cached_counts(5, &grid, Some(&cache)).unwrap();
        assert_eq!(report, CacheReport { loaded: 17, computed: 23 });
        assert_eq!(got, full);
        let (again, report) = cached_counts(5, &grid, Some(&cache)).unwrap();
        assert_eq!(report, CacheReport { loaded: 40, computed: 0 });
        assert_eq!(again, full);
    }

    #[test]
    fn batched_equals_single_pass() {
        let grid = log_grid(3, 1_000_000, 100);
        let (got, report) = cached_counts(4, &grid, None).unwrap();
        assert_eq!(report.loaded, 0);
        assert_eq!(got, accumulate(4, &grid, false).unwrap());
    }

    #[test]
    fn corrupt_file_is_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CountCache::new(dir.path().to_path_buf());
        let grid = log_grid(10, 10_000, 10);
        std::fs::write(cache.path_for(4, &grid), b"garbage").unwrap();
        let (got, report) = cached_counts(4, &grid, Some(&cache)).unwrap();
        assert_eq!(report.loaded, 0);
        assert_eq!(got, accumulate(4, &grid, false).unwrap());
    }
}
