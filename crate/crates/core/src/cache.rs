//! On-disk cache of psi intersection numbers.
//!
//! Plain text: the header line `psi-cache v1`, then one entry per line,
//! `g<TAB>d1,d2,...<TAB>p/q<TAB>check`, exponents in decreasing order, entries sorted.
//! `check` is the FNV-1a hash of the first three fields, in hex, so a damaged value is
//! rejected instead of silently seeding the memo table.
//! Saving writes a sibling temporary file and renames it over the target.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::algebra::Rational;
use crate::calculus::psi::{psi_memo_entries, psi_memo_insert, psi_memo_lookup};
use crate::error::{Error, Result};

pub const CACHE_HEADER: &str = "psi-cache v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheEntry {
    pub g: u32,
    pub exps: Vec<u32>,
    pub value: Rational,
}

fn checksum(body: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in body.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn schema(line: usize, msg: impl Into<String>) -> Error {
    Error::CacheSchema { line, msg: msg.into() }
}

/// Parse cache text without touching the memo table.
pub fn parse_cache(text: &str) -> Result<Vec<CacheEntry>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CACHE_HEADER => {}
        Some((_, h)) => return Err(schema(1, format!("expected header {CACHE_HEADER:?}, found {h:?}"))),
        None => return Err(schema(1, "empty file")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let no = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(schema(no, format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let body = &line[..line.len() - fields[3].len() - 1];
        if checksum(body) != fields[3] {
            return Err(schema(no, "checksum mismatch"));
        }
        let g: u32 = fields[0].parse().map_err(|_| schema(no, format!("bad genus {:?}", fields[0])))?;
        let exps: Vec<u32> = if fields[1].is_empty() {
            Vec::new()
        } else {
            fields[1]
                .split(',')
                .map(|x| x.parse::<u32>().map_err(|_| schema(no, format!("bad exponent {x:?}"))))
                .collect::<Result<_>>()?
        };
        let value: Rational = fields[2].parse().map_err(|_| schema(no, format!("bad rational {:?}", fields[2])))?;
        let n = exps.len() as i64;
        if n == 0 || 2 * g as i64 - 2 + n <= 0 {
            return Err(schema(no, format!("unstable space M({g},{n})")));
        }
        let total: i64 = exps.iter().map(|&x| x as i64).sum();
        if total != 3 * g as i64 - 3 + n {
            return Err(schema(no, format!("exponents sum to {total}, dimension of M({g},{n}) is {}", 3 * g as i64 - 3 + n)));
        }
        if exps.windows(2).any(|w| w[0] < w[1]) {
            return Err(schema(no, "exponents must be in decreasing order"));
        }
        out.push(CacheEntry { g, exps, value });
    }
    Ok(out)
}

pub fn format_cache(entries: &[CacheEntry]) -> String {
    let mut s = String::from(CACHE_HEADER);
    s.push('\n');
    for e in entries {
        let exps: Vec<String> = e.exps.iter().map(|x| x.to_string()).collect();
        let body = format!("{}\t{}\t{}", e.g, exps.join(","), e.value);
        s.push_str(&format!("{body}\t{}\n", checksum(&body)));
    }
    s
}

/// Load a cache file into the memo table; a missing file loads nothing.
///
/// An entry disagreeing with a value already in memory is reported as a schema error.
pub fn load_cache(path: &Path) -> Result<usize> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(e.into()),
    };
    let entries = parse_cache(&text)?;
    // validate everything before seeding anything
    for (i, e) in entries.iter().enumerate() {
        if let Some(v) = psi_memo_lookup(e.g, &e.exps) {
            if v != e.value {
                return Err(schema(i + 2, format!("value {} conflicts with computed {v}", e.value)));
            }
        }
    }
    let count = entries.len();
    for e in entries {
        psi_memo_insert(e.g, e.exps, e.value);
    }
    Ok(count)
}

/// Current memo table as cache entries, sorted.
pub fn cache_entries() -> Vec<CacheEntry> {
    psi_memo_entries().into_iter().map(|(g, exps, value)| CacheEntry { g, exps, value }).collect()
}

/// Write the memo table to `path` through a temporary file and an atomic rename.
pub fn save_cache(path: &Path) -> Result<usize> {
    let entries = cache_entries();
    write_atomic(path, format_cache(&entries).as_bytes())?;
    Ok(entries.len())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Domain(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
