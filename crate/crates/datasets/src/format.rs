//! Container: a text header, then length-prefixed blocks of little-endian `f64`.
//!
//! ```text
//! bcm-trace-dataset <version>
//! header <byte length> <checksum>
//! <TOML manifest>
//! [u64 count][count x f64][u64 checksum]   repeated per block
//! ```
//! Checksums are the first eight bytes of the SHA-256 digest, little-endian.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::{DatasetError, Manifest, OracleBlock, TraceDataset, FORMAT_VERSION};

const MAGIC: &str = "bcm-trace-dataset";

fn checksum(bytes: &[u8]) -> u64 {
    let d = Sha256::digest(bytes);
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

fn block_names(ds: &TraceDataset) -> Vec<String> {
    let mf = &ds.manifest;
    let ng = mf.basis.n_gamma;
    let mut names = Vec::new();
    names.extend((0..ng).map(|l| format!("response/{l}")));
    names.extend((0..ng).map(|l| format!("generator/{l}")));
    for &m in &mf.truncated {
        names.extend((0..ng).map(|l| format!("direct/{m}/{l}")));
    }
    if mf.oracle {
        names.extend(["oracle/gram", "oracle/rhs0", "oracle/rhs1", "oracle/rhs2"].map(String::from));
    }
    names
}

pub fn write_dataset<W: Write>(ds: &TraceDataset, mut w: W) -> Result<(), DatasetError> {
    let header = toml::to_string(&ds.manifest).map_err(|e| DatasetError::Format(e.to_string()))?;
    writeln!(w, "{MAGIC} {}", ds.manifest.format_version)?;
    writeln!(w, "header {} {:016x}", header.len(), checksum(header.as_bytes()))?;
    w.write_all(header.as_bytes())?;
    let mut blocks: Vec<&[f64]> = Vec::new();
    blocks.extend(ds.response.iter().map(|v| v.as_slice()));
    blocks.extend(ds.generator.iter().map(|v| v.as_slice()));
    blocks.extend(ds.direct.iter().map(|v| v.as_slice()));
    if let Some(o) = &ds.oracle {
        blocks.push(&o.gram);
        blocks.extend(o.rhs.iter().map(|v| v.as_slice()));
    }
    if blocks.len() != block_names(ds).len() {
        return Err(DatasetError::Format("block list does not match the manifest".into()));
    }
    for b in blocks {
        let bytes: Vec<u8> = b.iter().flat_map(|v| v.to_le_bytes()).collect();
        w.write_all(&(b.len() as u64).to_le_bytes())?;
        w.write_all(&bytes)?;
        w.write_all(&checksum(&bytes).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset(ds: &TraceDataset, path: &Path) -> Result<(), DatasetError> {
    let f = fs::File::create(path)?;
    write_dataset(ds, BufWriter::new(f))
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<(), DatasetError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => DatasetError::Truncated(what.to_string()),
        _ => DatasetError::Io(e),
    })
}

fn read_line<R: BufRead>(r: &mut R, what: &str) -> Result<String, DatasetError> {
    let mut s = String::new();
    if r.read_line(&mut s)? == 0 {
        return Err(DatasetError::Truncated(what.into()));
    }
    Ok(s.trim_end_matches('\n').to_string())
}

/// Reads only the manifest.
pub fn read_manifest<R: BufRead>(r: &mut R) -> Result<Manifest, DatasetError> {
    let first = read_line(r, "magic line")?;
    let version = first
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| DatasetError::Format("not a trace dataset".into()))?
        .parse::<u32>()
        .map_err(|_| DatasetError::Format(format!("bad version field in {first:?}")))?;
    if version != FORMAT_VERSION {
        return Err(DatasetError::Version { found: version, expected: FORMAT_VERSION });
    }
    let line = read_line(r, "header line")?;
    let parts: Vec<&str> = line.split_whitespace().collect();
    let (len, sum) = match parts.as_slice() {
        ["header", len, sum] => (
            len.parse::<usize>().map_err(|_| DatasetError::Format("bad header length".into()))?,
            u64::from_str_radix(sum, 16).map_err(|_| DatasetError::Format("bad header checksum".into()))?,
        ),
        _ => return Err(DatasetError::Format(format!("bad header line {line:?}"))),
    };
    let mut buf = vec![0u8; len];
    read_exact_or(r, &mut buf, "header")?;
    if checksum(&buf) != sum {
        return Err(DatasetError::Checksum { block: "header".into() });
    }
    let text = String::from_utf8(buf).map_err(|_| DatasetError::Format("header is not UTF-8".into()))?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| DatasetError::Format(e.to_string()))?;
    if manifest.format_version != version {
        return Err(DatasetError::Format("header version disagrees with the magic line".into()));
    }
    Ok(manifest)
}

pub fn read_dataset<R: Read>(r: R) -> Result<TraceDataset, DatasetError> {
    let mut r = BufReader::new(r);
    let manifest = read_manifest(&mut r)?;
    let mut ds = TraceDataset { manifest, response: Vec::new(), generator: Vec::new(), direct: Vec::new(), oracle: None };
    let names = block_names(&ds);
    let mut blocks = Vec::with_capacity(names.len());
    for name in &names {
        let mut n = [0u8; 8];
        read_exact_or(&mut r, &mut n, name)?;
        let count = u64::from_le_bytes(n) as usize;
        let mut bytes = vec![0u8; count.checked_mul(8).ok_or_else(|| DatasetError::Format("block too large".into()))?];
        read_exact_or(&mut r, &mut bytes, name)?;
        let mut s = [0u8; 8];
        read_exact_or(&mut r, &mut s, name)?;
        if checksum(&bytes) != u64::from_le_bytes(s) {
            return Err(DatasetError::Checksum { block: name.clone() });
        }
        blocks.push(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect::<Vec<f64>>());
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(DatasetError::Format("trailing bytes after the last block".into()));
    }
    let ng = ds.manifest.basis.n_gamma;
    let mut it = blocks.into_iter();
    ds.response = it.by_ref().take(ng).collect();
    ds.generator = it.by_ref().take(ng).collect();
    ds.direct = it.by_ref().take(ng * ds.manifest.truncated.len()).collect();
    if ds.manifest.oracle {
        let gram = it.next().unwrap_or_default();
        let rhs = [it.next().unwrap_or_default(), it.next().unwrap_or_default(), it.next().unwrap_or_default()];
        ds.oracle = Some(OracleBlock { gram, rhs });
    }
    validate_shapes(&ds)?;
    Ok(ds)
}

fn validate_shapes(ds: &TraceDataset) -> Result<(), DatasetError> {
    let mf = &ds.manifest;
    let n = mf.n_controls();
    let checks = [
        ("response", &ds.response, mf.strip().len() * ds.n_time()),
        ("generator", &ds.generator, mf.support().len() * ds.n_time_double()),
        ("direct", &ds.direct, mf.support().len() * ds.n_time_double()),
    ];
    for (name, blocks, len) in checks {
        if let Some(b) = blocks.iter().find(|b| b.len() != len) {
            return Err(DatasetError::Format(format!("{name} block has {} values, expected {len}", b.len())));
        }
    }
    if let Some(o) = &ds.oracle {
        if o.gram.len() != n * n || o.rhs.iter().any(|r| r.len() != n) {
            return Err(DatasetError::Format("oracle block has the wrong size".into()));
        }
    }
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<TraceDataset, DatasetError> {
    read_dataset(fs::File::open(path)?)
}

/// Manifest of a dataset file without reading the payload.
pub fn load_manifest(path: &Path) -> Result<Manifest, DatasetError> {
    read_manifest(&mut BufReader::new(fs::File::open(path)?))
}

/// Any payload in the container layout: a kind tag, a version, a UTF-8 header
/// and `f64` blocks whose count is not fixed by the header.
#[derive(Clone, Debug, PartialEq)]
pub struct Container {
    pub kind: String,
    pub version: u32,
    pub header: String,
    pub blocks: Vec<Vec<f64>>,
}

pub fn write_container<W: Write>(c: &Container, mut w: W) -> Result<(), DatasetError> {
    if c.kind.is_empty() || c.kind.contains(char::is_whitespace) {
        return Err(DatasetError::Format(format!("bad container kind {:?}", c.kind)));
    }
    writeln!(w, "{} {}", c.kind, c.version)?;
    writeln!(w, "header {} {:016x}", c.header.len(), checksum(c.header.as_bytes()))?;
    w.write_all(c.header.as_bytes())?;
    w.write_all(&(c.blocks.len() as u64).to_le_bytes())?;
    for b in &c.blocks {
        let bytes: Vec<u8> = b.iter().flat_map(|v| v.to_le_bytes()).collect();
        w.write_all(&(b.len() as u64).to_le_bytes())?;
        w.write_all(&bytes)?;
        w.write_all(&checksum(&bytes).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a container, refusing a different kind tag.
pub fn read_container<R: Read>(r: R, kind: &str) -> Result<Container, DatasetError> {
    let mut r = BufReader::new(r);
    let first = read_line(&mut r, "magic line")?;
    let version = first
        .strip_prefix(kind)
        .filter(|rest| rest.starts_with(' '))
        .ok_or_else(|| DatasetError::Format(format!("not a {kind} file")))?
        .trim()
        .parse::<u32>()
        .map_err(|_| DatasetError::Format(format!("bad version field in {first:?}")))?;
    let line = read_line(&mut r, "header line")?;
    let (len, sum) = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["header", len, sum] => (
            len.parse::<usize>().map_err(|_| DatasetError::Format("bad header length".into()))?,
            u64::from_str_radix(sum, 16).map_err(|_| DatasetError::Format("bad header checksum".into()))?,
        ),
        _ => return Err(DatasetError::Format(format!("bad header line {line:?}"))),
    };
    let mut buf = vec![0u8; len];
    read_exact_or(&mut r, &mut buf, "header")?;
    if checksum(&buf) != sum {
        return Err(DatasetError::Checksum { block: "header".into() });
    }
    let header = String::from_utf8(buf).map_err(|_| DatasetError::Format("header is not UTF-8".into()))?;
    let mut n = [0u8; 8];
    read_exact_or(&mut r, &mut n, "block count")?;
    let count = u64::from_le_bytes(n) as usize;
    let mut blocks = Vec::new();
    for i in 0..count {
        let name = format!("block {i}");
        read_exact_or(&mut r, &mut n, &name)?;
        let len = u64::from_le_bytes(n) as usize;
        let mut bytes = vec![0u8; len.checked_mul(8).ok_or_else(|| DatasetError::Format("block too large".into()))?];
        read_exact_or(&mut r, &mut bytes, &name)?;
        read_exact_or(&mut r, &mut n, &name)?;
        if checksum(&bytes) != u64::from_le_bytes(n) {
            return Err(DatasetError::Checksum { block: name });
        }
        blocks.push(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect());
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(DatasetError::Format("trailing bytes after the last block".into()));
    }
    Ok(Container { kind: kind.to_string(), version, header, blocks })
}
