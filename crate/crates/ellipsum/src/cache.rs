//! Binary on-disk cache for radii multisets and exponential-sum series.
//!
//! File layout: header {magic "ELSM", version u32, kind u8, n u32, matrix
//! entry count u32 + i64 entries, alpha-spec length u32 + UTF-8 bytes,
//! bound f64, element count u64}, little-endian payload arrays, then a
//! trailing SHA-256 digest of everything before it. Reads verify magic,
//! version, and digest; any mismatch is `CorruptCache` and callers must
//! recompute rather than reuse.

use crate::error::{Error, Result};
use crate::expsums::ExpSumSeries;
use crate::lattice::RadiiMultiset;
use crate::quadform::QuadFormCtx;
use num_complex::Complex64;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 4] = b"ELSM";
const VERSION: u32 = 1;
pub const KIND_RADII: u8 = 1;
pub const KIND_SERIES: u8 = 2;

/// Cache directory resolution: the ELLIPSUM_CACHE environment variable wins,
/// then an explicit configured directory, then `.ellipsum-cache`.
pub fn resolve_cache_dir(configured: Option<&Path>) -> PathBuf {
    if let Ok(dir) = std::env::var("ELLIPSUM_CACHE") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    configured
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(".ellipsum-cache"))
}

fn corrupt(reason: &str) -> Error {
    Error::CorruptCache {
        reason: reason.to_string(),
    }
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Writer {
        Writer { buf: Vec::new() }
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn bytes(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(v);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.buf.len() {
            return Err(corrupt("truncated file"));
        }
        let s = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn header(kind: u8, n: usize, matrix: &[i64], alpha_spec: &str, bound: f64, count: u64) -> Writer {
    let mut w = Writer::new();
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u8(kind);
    w.u32(n as u32);
    w.u32(matrix.len() as u32);
    for &e in matrix {
        w.i64(e);
    }
    w.u32(alpha_spec.len() as u32);
    w.bytes(alpha_spec.as_bytes());
    w.f64(bound);
    w.u64(count);
    w
}

/// Filename stem: hex of the SHA-256 of the identifying header fields.
pub fn cache_key(kind: u8, matrix: &[i64], alpha_spec: &str, bound: f64) -> String {
    let mut h = Sha256::new();
    h.update([kind]);
    for &e in matrix {
        h.update(e.to_le_bytes());
    }
    h.update(alpha_spec.as_bytes());
    h.update(bound.to_le_bytes());
    let d = h.finalize();
    d[..16].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn radii_path(dir: &Path, ctx: &QuadFormCtx, alpha_spec: &str, r_max: f64) -> PathBuf {
    dir.join(format!("{}.radii", cache_key(KIND_RADII, &ctx.m, alpha_spec, r_max)))
}

pub fn series_path(dir: &Path, ctx: &QuadFormCtx, alpha_spec: &str, p_max: u64) -> PathBuf {
    dir.join(format!(
        "{}.series",
        cache_key(KIND_SERIES, &ctx.m, alpha_spec, p_max as f64)
    ))
}

fn write_file(path: &Path, mut w: Writer) -> Result<()> {
    let digest = Sha256::digest(&w.buf);
    w.bytes(&digest);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &w.buf)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Verify magic, version, and the trailing digest; return the payload view.
fn open_checked(buf: &[u8], kind: u8) -> Result<Reader<'_>> {
    if buf.len() < 32 + 13 {
        return Err(corrupt("file too short"));
    }
    let (body, tail) = buf.split_at(buf.len() - 32);
    let digest = Sha256::digest(body);
    if digest.as_slice() != tail {
        return Err(corrupt("digest mismatch"));
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(corrupt("bad magic"));
    }
    if r.u32()? != VERSION {
        return Err(corrupt("unsupported version"));
    }
    if r.u8()? != kind {
        return Err(corrupt("wrong record kind"));
    }
    Ok(r)
}

pub fn write_radii(
    dir: &Path,
    ctx: &QuadFormCtx,
    alpha_spec: &str,
    rm: &RadiiMultiset,
) -> Result<PathBuf> {
    let mut w = header(
        KIND_RADII,
        ctx.n,
        &ctx.m,
        alpha_spec,
        rm.r_max,
        rm.radii.len() as u64,
    );
    w.bytes(&rm.ctx_digest);
    w.u64(rm.count);
    for &r in &rm.radii {
        w.f64(r);
    }
    let path = radii_path(dir, ctx, alpha_spec, rm.r_max);
    write_file(&path, w)?;
    Ok(path)
}

pub fn read_radii(path: &Path) -> Result<RadiiMultiset> {
    let buf = fs::read(path)?;
    let mut r = open_checked(&buf, KIND_RADII)?;
    let _n = r.u32()?;
    let m_len = r.u32()? as usize;
    for _ in 0..m_len {
        r.i64()?;
    }
    let a_len = r.u32()? as usize;
    r.take(a_len)?;
    let r_max = r.f64()?;
    let len = r.u64()? as usize;
    let ctx_digest: [u8; 32] = r.take(32)?.try_into().unwrap();
    let count = r.u64()?;
    let mut radii = Vec::with_capacity(len);
    for _ in 0..len {
        radii.push(r.f64()?);
    }
    Ok(RadiiMultiset {
        ctx_digest,
        r_max,
        radii,
        count,
    })
}

pub fn write_series(dir: &Path, ctx: &QuadFormCtx, series: &ExpSumSeries) -> Result<PathBuf> {
    let mut w = header(
        KIND_SERIES,
        series.n,
        &ctx.m,
        &series.alpha_spec,
        series.p_max as f64,
        series.r.len() as u64,
    );
    w.bytes(&series.matrix_digest);
    for c in &series.r {
        w.f64(c.re);
        w.f64(c.im);
    }
    for &v in &series.r_cum {
        w.f64(v);
    }
    let path = series_path(dir, ctx, &series.alpha_spec, series.p_max);
    write_file(&path, w)?;
    Ok(path)
}

pub fn read_series(path: &Path) -> Result<ExpSumSeries> {
    let buf = fs::read(path)?;
    let mut r = open_checked(&buf, KIND_SERIES)?;
    let n = r.u32()? as usize;
    let m_len = r.u32()? as usize;
    for _ in 0..m_len {
        r.i64()?;
    }
    let a_len = r.u32()? as usize;
    let alpha_spec = String::from_utf8(r.take(a_len)?.to_vec())
        .map_err(|_| corrupt("alpha spec not UTF-8"))?;
    let p_max = r.f64()? as u64;
    let len = r.u64()? as usize;
    let matrix_digest: [u8; 32] = r.take(32)?.try_into().unwrap();
    let mut rv = Vec::with_capacity(len);
    for _ in 0..len {
        let re = r.f64()?;
        let im = r.f64()?;
        rv.push(Complex64::new(re, im));
    }
    let mut r_cum = Vec::with_capacity(len);
    for _ in 0..len {
        r_cum.push(r.f64()?);
    }
    Ok(ExpSumSeries {
        matrix_digest,
        alpha_spec,
        n,
        p_max,
        r: rv,
        r_cum,
    })
}

/// Names and sizes of the cache entries in a directory, for `cache inspect`.
pub fn list_entries(dir: &Path) -> Result<Vec<(String, u64)>> {
    let mut out = Vec::new();
    if !dir.exists() {
        return Ok(out);
    }
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".radii") || name.ends_with(".series") {
            out.push((name, entry.metadata()?.len()));
        }
    }
    out.sort();
    Ok(out)
}

/// Remove all cache entries; returns the number removed.
pub fn clear_entries(dir: &Path) -> Result<usize> {
    let entries = list_entries(dir)?;
    for (name, _) in &entries {
        fs::remove_file(dir.join(name))?;
    }
    Ok(entries.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::parse_shift;
    use crate::expsums::rep_sums;
    use crate::lattice::build_radii;
    use crate::quadform::build_ctx;

    fn ctx2() -> QuadFormCtx {
        build_ctx(&[vec![1, 0], vec![0, 1]]).unwrap()
    }

    #[test]
    fn series_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = ctx2();
        let alpha = parse_shift("sqrt2-1,sqrt3-1", 2).unwrap();
        let series = rep_sums(&ctx, &alpha, 1000).unwrap();
        let path = write_series(dir.path(), &ctx, &series).unwrap();
        let back = read_series(&path).unwrap();
        assert_eq!(back.matrix_digest, series.matrix_digest);
        assert_eq!(back.alpha_spec, series.alpha_spec);
        assert_eq!(back.n, series.n);
        assert_eq!(back.p_max, series.p_max);
        assert_eq!(back.r, series.r);
        assert_eq!(back.r_cum, series.r_cum);
    }

    #[test]
    fn radii_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = ctx2();
        let alpha = parse_shift("sqrt2-1,sqrt3-1", 2).unwrap();
        let rm = build_radii(&ctx, &alpha, 25.0).unwrap();
        let path = write_radii(dir.path(), &ctx, &alpha.spec, &rm).unwrap();
        let back = read_radii(&path).unwrap();
        assert_eq!(back.ctx_digest, rm.ctx_digest);
        assert_eq!(back.r_max, rm.r_max);
        assert_eq!(back.radii, rm.radii);
        assert_eq!(back.count, rm.count);
    }

    #[test]
    fn tampered_byte_detected() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = ctx2();
        let alpha = parse_shift("0,0", 2).unwrap();
        let series = rep_sums(&ctx, &alpha, 100).unwrap();
        let path = write_series(dir.path(), &ctx, &series).unwrap();
        let mut buf = fs::read(&path).unwrap();
        let mid = buf.len() / 2;
        buf[mid] ^= 0x40;
        fs::write(&path, &buf).unwrap();
        assert!(matches!(
            read_series(&path),
            Err(Error::CorruptCache { .. })
        ));
        // wrong kind is also rejected
        let rm = build_radii(&ctx, &alpha, 10.0).unwrap();
        let rpath = write_radii(dir.path(), &ctx, &alpha.spec, &rm).unwrap();
        assert!(matches!(
            read_series(&rpath),
            Err(Error::CorruptCache { .. })
        ));
    }

    #[test]
    fn keys_distinguish_inputs() {
        let ctx = ctx2();
        let a = cache_key(KIND_SERIES, &ctx.m, "0,0", 100.0);
        let b = cache_key(KIND_SERIES, &ctx.m, "0,0", 200.0);
        let c = cache_key(KIND_SERIES, &ctx.m, "0.5,0", 100.0);
        let d = cache_key(KIND_RADII, &ctx.m, "0,0", 100.0);
        assert!(a != b && a != c && a != d && b != c);
        assert_eq!(a.len(), 32);
    }

    #[test]
    fn env_override_and_listing() {
        let dir = tempfile::tempdir().unwrap();
        // resolve order: configured fallback when env unset or empty
        std::env::remove_var("ELLIPSUM_CACHE");
        assert_eq!(
            resolve_cache_dir(Some(dir.path())),
            dir.path().to_path_buf()
        );
        std::env::set_var("ELLIPSUM_CACHE", dir.path());
        assert_eq!(resolve_cache_dir(None), dir.path().to_path_buf());
        std::env::remove_var("ELLIPSUM_CACHE");

        let ctx = ctx2();
        let alpha = parse_shift("0,0", 2).unwrap();
        let series = rep_sums(&ctx, &alpha, 50).unwrap();
        write_series(dir.path(), &ctx, &series).unwrap();
        let entries = list_entries(dir.path()).unwrap();
        assert_eq!(entries.len(), 1);
        assert!(entries[0].0.ends_with(".series"));
        assert_eq!(clear_entries(dir.path()).unwrap(), 1);
        assert!(list_entries(dir.path()).unwrap().is_empty());
    }
}
