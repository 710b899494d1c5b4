use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use super::fem::subdivisions;
use super::stabilizer::{build_reference_stabilizer_with_degree, ReferenceStabilizer};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"PDGSTAB1";

type Key = (usize, u64, usize);

fn registry() -> &'static Mutex<HashMap<Key, Arc<ReferenceStabilizer>>> {
    static REG: OnceLock<Mutex<HashMap<Key, Arc<ReferenceStabilizer>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Process-wide memoized reference stabilizer, keyed by (k', delta, moment degree).
pub fn shared_stabilizer(kprime: usize, delta: f64, moment_degree: usize) -> Result<Arc<ReferenceStabilizer>> {
    let key = (kprime, delta.to_bits(), moment_degree);
    if let Some(s) = registry().lock().unwrap().get(&key) {
        return Ok(s.clone());
    }
    let s = Arc::new(build_reference_stabilizer_with_degree(kprime, delta, moment_degree)?);
    registry().lock().unwrap().entry(key).or_insert_with(|| s.clone());
    Ok(s)
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_vec(out: &mut Vec<u8>, v: &[f64]) {
    put_u64(out, v.len() as u64);
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Parse { line: 0, msg: "truncated stabilizer cache".into() });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn vec(&mut self) -> Result<Vec<f64>> {
        let n = self.u64()? as usize;
        if n > self.buf.len() / 8 {
            return Err(Error::Parse { line: 0, msg: "corrupt length in stabilizer cache".into() });
        }
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn encode(s: &ReferenceStabilizer) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u64(&mut out, s.kprime as u64);
    out.extend_from_slice(&s.delta.to_le_bytes());
    put_u64(&mut out, s.m as u64);
    put_u64(&mut out, s.moment_degree as u64);
    put_u64(&mut out, s.lifts.len() as u64);
    for l in &s.lifts {
        put_vec(&mut out, l);
    }
    for v in [&s.s_hat, &s.g_hat, &s.kxx, &s.kxy, &s.kyy] {
        put_vec(&mut out, v);
    }
    let flat: Vec<f64> = s.points.iter().flat_map(|p| [p[0], p[1]]).collect();
    put_vec(&mut out, &flat);
    for w in [&s.w_val, &s.w_dx, &s.w_dy] {
        put_u64(&mut out, w.len() as u64);
        for row in w {
            put_vec(&mut out, row);
        }
    }
    out.extend_from_slice(&s.s_eig.0.to_le_bytes());
    out.extend_from_slice(&s.s_eig.1.to_le_bytes());
    out
}

/// Decodes a cache blob, returning `None` if it was built for other parameters.
pub fn decode(buf: &[u8], kprime: usize, delta: f64, moment_degree: usize) -> Result<Option<ReferenceStabilizer>> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8)? != MAGIC {
        return Ok(None);
    }
    let kp = r.u64()? as usize;
    let d = r.f64()?;
    let m = r.u64()? as usize;
    let md = r.u64()? as usize;
    if kp != kprime || d.to_bits() != delta.to_bits() || m != subdivisions(delta) || md != moment_degree {
        return Ok(None);
    }
    let nl = r.u64()? as usize;
    let lifts = (0..nl).map(|_| r.vec()).collect::<Result<Vec<_>>>()?;
    let s_hat = r.vec()?;
    let g_hat = r.vec()?;
    let kxx = r.vec()?;
    let kxy = r.vec()?;
    let kyy = r.vec()?;
    let flat = r.vec()?;
    let points = flat.chunks(2).map(|c| [c[0], c[1]]).collect();
    let mut ws = Vec::new();
    for _ in 0..3 {
        let n = r.u64()? as usize;
        ws.push((0..n).map(|_| r.vec()).collect::<Result<Vec<_>>>()?);
    }
    let s_eig = (r.f64()?, r.f64()?);
    let w_dy = ws.pop().unwrap();
    let w_dx = ws.pop().unwrap();
    let w_val = ws.pop().unwrap();
    Ok(Some(ReferenceStabilizer {
        kprime,
        delta,
        m,
        moment_degree,
        lifts,
        s_hat,
        g_hat,
        kxx,
        kxy,
        kyy,
        points,
        w_val,
        w_dx,
        w_dy,
        s_eig,
    }))
}

/// Loads the stabilizer from `path` if it matches the parameters, otherwise builds it
/// and rewrites the file.
pub fn load_or_build(path: impl AsRef<Path>, kprime: usize, delta: f64, moment_degree: usize) -> Result<ReferenceStabilizer> {
    let path = path.as_ref();
    if let Ok(mut f) = std::fs::File::open(path) {
        let mut buf = Vec::new();
        f.read_to_end(&mut buf).map_err(|e| Error::io(path, e))?;
        if let Ok(Some(s)) = decode(&buf, kprime, delta, moment_degree) {
            return Ok(s);
        }
    }
    let s = build_reference_stabilizer_with_degree(kprime, delta, moment_degree)?;
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(&s)).map_err(|e| Error::io(path, e))?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_invalidation() {
        let s = build_reference_stabilizer_with_degree(2, 0.25, 3).unwrap();
        let blob = encode(&s);
        assert_eq!(decode(&blob, 2, 0.25, 3).unwrap().unwrap(), s);
        assert!(decode(&blob, 3, 0.25, 3).unwrap().is_none());
        assert!(decode(&blob, 2, 0.125, 3).unwrap().is_none());
        assert!(decode(&blob[..blob.len() - 3], 2, 0.25, 3).is_err());
    }

    #[test]
    fn file_cache() {
        let dir = std::env::temp_dir().join(format!("polydg-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("stab.bin");
        let a = load_or_build(&path, 1, 1.0 / 3.0, 2).unwrap();
        let b = load_or_build(&path, 1, 1.0 / 3.0, 2).unwrap();
        assert_eq!(a, b);
        let c = load_or_build(&path, 2, 0.25, 3).unwrap();
        assert_eq!(c.kprime, 2);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn shared_instances_are_reused() {
        let a = shared_stabilizer(2, 0.25, 3).unwrap();
        let b = shared_stabilizer(2, 0.25, 3).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
