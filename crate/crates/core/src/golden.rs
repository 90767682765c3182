//! Golden-vector text format and the formal group law cache.
//!
//! ```text
//! FGLV1 p=<p> n=<n> N=<N> D=<D> M=<M>
//! <y-exponents>|<u-exponent>|<v-multidegree>|<valuation>|<unit>
//! ```
//!
//! Exponent lists are comma separated; the v-multidegree is empty at height 1.
//! Every stored coefficient carries `N - valuation` relative digits.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::coeff::{CoeffElem, CoeffParams, Key, PadicScaled, MAX_V};
use crate::error::{Error, Result};
use crate::fgl::FormalGroupLaw;
use crate::series::YSeries;

pub const HEADER_TAG: &str = "FGLV1";

/// Parsed header fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub p: u32,
    pub n: u32,
    pub precision: u32,
    pub vdeg: u32,
    pub order: usize,
}

impl Header {
    fn render(&self) -> String {
        format!(
            "{HEADER_TAG} p={} n={} N={} D={} M={}",
            self.p, self.n, self.precision, self.vdeg, self.order
        )
    }

    fn params(&self) -> Result<CoeffParams> {
        CoeffParams::new(self.p, self.n, self.precision, self.vdeg)
    }
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn write_coeff(out: &mut String, ys: &str, c: &CoeffElem) {
    let nv = c.params().num_v();
    for (key, x) in c.terms() {
        let v = join(key.v.iter().take(nv));
        let _ = writeln!(out, "{ys}|{}|{v}|{}|{}", key.u, x.valuation().unwrap_or(0), x.unit());
    }
}

/// Serialises the coefficient table of `F`; `M` is its total degree.
pub fn write_fgl(f: &FormalGroupLaw) -> String {
    let pr = f.params();
    let header = Header { p: pr.p, n: pr.n, precision: pr.precision, vdeg: pr.vdeg, order: f.degree() };
    let mut out = header.render();
    out.push('\n');
    for (a, row) in f.coefficients().iter().enumerate() {
        for (b, c) in row.iter().enumerate() {
            write_coeff(&mut out, &format!("{a},{b}"), c);
        }
    }
    out
}

/// Serialises a y-series; `M` is its order.
pub fn write_yseries(s: &YSeries) -> String {
    let pr = s.params();
    let header = Header { p: pr.p, n: pr.n, precision: pr.precision, vdeg: pr.vdeg, order: s.order() };
    let mut out = header.render();
    out.push('\n');
    for (i, c) in s.coeffs().iter().enumerate() {
        write_coeff(&mut out, &i.to_string(), c);
    }
    out
}

fn parse_header(line: &str) -> Result<Header> {
    let err = |msg: String| Error::Parse { line: 1, msg };
    let mut parts = line.split_whitespace();
    if parts.next() != Some(HEADER_TAG) {
        return Err(err(format!("expected {HEADER_TAG} header")));
    }
    let mut fields: HashMap<&str, u64> = HashMap::new();
    for part in parts {
        let (k, v) = part.split_once('=').ok_or_else(|| err(format!("malformed field {part:?}")))?;
        let v: u64 = v.parse().map_err(|_| err(format!("malformed value in {part:?}")))?;
        fields.insert(k, v);
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| err(format!("missing field {k}")));
    Ok(Header {
        p: get("p")? as u32,
        n: get("n")? as u32,
        precision: get("N")? as u32,
        vdeg: get("D")? as u32,
        order: get("M")? as usize,
    })
}

type Entry = (Vec<usize>, Key, PadicScaled);

fn parse_body(text: &str) -> Result<(Header, Vec<Entry>)> {
    let mut lines = text.lines();
    let header = parse_header(lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?)?;
    let params = header.params().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
    let mut entries = Vec::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse { line: lineno, msg: msg.to_string() };
        let cols: Vec<&str> = line.split('|').collect();
        if cols.len() != 5 {
            return Err(err("expected 5 '|'-separated columns"));
        }
        let ys: Vec<usize> = cols[0]
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| err("bad y-exponent")))
            .collect::<Result<_>>()?;
        let u: i32 = cols[1].trim().parse().map_err(|_| err("bad u-exponent"))?;
        let mut v = [0u8; MAX_V];
        if !cols[2].trim().is_empty() {
            let vs: Vec<u8> = cols[2]
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| err("bad v-exponent")))
                .collect::<Result<_>>()?;
            if vs.len() != params.num_v() {
                return Err(err("v-multidegree has the wrong length"));
            }
            v[..vs.len()].copy_from_slice(&vs);
        } else if params.num_v() != 0 {
            return Err(err("missing v-multidegree"));
        }
        let val: i32 = cols[3].trim().parse().map_err(|_| err("bad valuation"))?;
        let unit: u128 = cols[4].trim().parse().map_err(|_| err("bad unit"))?;
        let rel = params.precision as i64 - val as i64;
        if rel <= 0 {
            return Err(err("valuation at or beyond the precision"));
        }
        let c = PadicScaled::from_parts(params.p, val, unit, rel as u32)
            .map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
        entries.push((ys, Key { v, u }, c));
    }
    Ok((header, entries))
}

/// Parses a formal group law written by [`write_fgl`].
pub fn parse_fgl(text: &str) -> Result<FormalGroupLaw> {
    let (header, entries) = parse_body(text)?;
    let params = header.params()?;
    let t = header.order;
    let mut table: Vec<Vec<CoeffElem>> =
        (0..=t).map(|a| vec![CoeffElem::zero(params); t - a + 1]).collect();
    for (ys, key, c) in entries {
        if ys.len() != 2 || ys[0] + ys[1] > t {
            return Err(Error::Parse { line: 0, msg: format!("exponent {ys:?} outside the table") });
        }
        let cell = &mut table[ys[0]][ys[1]];
        *cell = &*cell + &CoeffElem::monomial(params, c, key);
    }
    FormalGroupLaw::from_coefficients(params, table)
}

/// Parses a series written by [`write_yseries`].
pub fn parse_yseries(text: &str) -> Result<YSeries> {
    let (header, entries) = parse_body(text)?;
    let params = header.params()?;
    let mut s = YSeries::zero(params, header.order);
    for (ys, key, c) in entries {
        if ys.len() != 1 || ys[0] > header.order {
            return Err(Error::Parse { line: 0, msg: format!("exponent {ys:?} outside the series") });
        }
        let cur = s.coeff(ys[0]).clone();
        s.set_coeff(ys[0], &cur + &CoeffElem::monomial(params, c, key));
    }
    Ok(s)
}

/// Builds formal group laws once per process and, when a directory is set,
/// persists them as golden files. A law of higher degree serves any lower one.
#[derive(Debug, Default)]
pub struct FglCache {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<CoeffParams, Arc<FormalGroupLaw>>>,
}

impl FglCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        FglCache { dir, memory: Mutex::new(HashMap::new()) }
    }

    /// Cache directory from `MORAVA_CACHE_DIR`, defaulting to `.cache/`.
    pub fn default_dir() -> PathBuf {
        std::env::var_os("MORAVA_CACHE_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".cache"))
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn file_for(&self, params: CoeffParams, degree: usize) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| {
            d.join(format!(
                "fgl_p{}_n{}_N{}_D{}_M{}.fglv1",
                params.p, params.n, params.precision, params.vdeg, degree
            ))
        })
    }

    /// A law with these parameters of degree at least `degree`.
    pub fn get(&self, params: CoeffParams, degree: usize) -> Result<Arc<FormalGroupLaw>> {
        if let Some(f) = self.memory.lock().expect("cache lock").get(&params) {
            if f.degree() >= degree {
                return Ok(f.clone());
            }
        }
        let f = Arc::new(self.load_or_build(params, degree)?);
        let mut mem = self.memory.lock().expect("cache lock");
        let slot = mem.entry(params).or_insert_with(|| f.clone());
        if slot.degree() < f.degree() {
            *slot = f.clone();
        }
        Ok(slot.clone())
    }

    fn load_or_build(&self, params: CoeffParams, degree: usize) -> Result<FormalGroupLaw> {
        // specialised laws are cheap and not representable in the header
        let persist = params.killed == 0;
        if persist {
            if let Some(path) = self.file_for(params, degree) {
                if let Ok(text) = std::fs::read_to_string(&path) {
                    if let Ok(f) = parse_fgl(&text) {
                        if f.params() == params && f.degree() == degree {
                            return Ok(f);
                        }
                    }
                }
            }
        }
        let f = FormalGroupLaw::build(params, degree)?;
        if persist {
            if let Some(path) = self.file_for(params, degree) {
                // a cache that cannot be written only costs time
                let _ = write_atomic(&path, &write_fgl(&f));
            }
        }
        Ok(f)
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fgl_round_trip() {
        let params = CoeffParams::new(2, 2, 12, 4).unwrap();
        let f = FormalGroupLaw::build(params, 12).unwrap();
        let text = write_fgl(&f);
        assert!(text.starts_with("FGLV1 p=2 n=2 N=12 D=4 M=12\n"));
        let g = parse_fgl(&text).unwrap();
        assert_eq!(f.coefficients(), g.coefficients());
        assert_eq!(*f.m_series(2), *g.m_series(2));
        assert_eq!(write_fgl(&g), text);
    }

    #[test]
    fn series_round_trip() {
        let params = CoeffParams::new(3, 1, 16, 0).unwrap();
        let f = FormalGroupLaw::build(params, 10).unwrap();
        let s = f.m_series(3);
        let back = parse_yseries(&write_yseries(&s)).unwrap();
        assert_eq!(*s, back);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(parse_fgl("FGLV2 p=2"), Err(Error::Parse { line: 1, .. })));
        let bad = "FGLV1 p=2 n=1 N=8 D=0 M=2\n1,0|0||0|1\n1,1|x||0|1\n";
        assert!(matches!(parse_fgl(bad), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn disk_cache_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let params = CoeffParams::new(3, 1, 10, 0).unwrap();
        let first = FglCache::new(Some(dir.path().to_path_buf())).get(params, 9).unwrap();
        let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
        let second = FglCache::new(Some(dir.path().to_path_buf())).get(params, 9).unwrap();
        assert_eq!(first.coefficients(), second.coefficients());
    }

    #[test]
    fn memory_cache_serves_lower_degrees() {
        let cache = FglCache::new(None);
        let params = CoeffParams::new(2, 1, 8, 0).unwrap();
        let big = cache.get(params, 12).unwrap();
        let small = cache.get(params, 6).unwrap();
        assert!(Arc::ptr_eq(&big, &small));
    }
}
