//! File formats.
//!
//! Tensor files (little-endian throughout):
//!
//! ```text
//! "TMPT" | u32 version = 1 | u8 rank | rank × u32 extents
//!        | f64 payload, row-major | u32 n | n bytes of UTF-8 JSON metadata
//! ```
//!
//! Diagram files are CSV with `#` header comments:
//!
//! ```text
//! # times=3
//! # dims=0,1
//! # thresholds=1;2;4
//! slice,dim,birth,death,right_open
//! 1,0,1,3,true
//! ```
//!
//! Births and deaths are zigzag times (`1, 1.5, ..., T`).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Result, TmpError};
use crate::pipeline::{DiagramGrid, PipelineConfig};
use crate::vectorize::{TensorMeta, TmpTensor};
use crate::zigzag::{Interval, ZigzagDiagram, ZigzagIndex};

pub const TENSOR_MAGIC: &[u8; 4] = b"TMPT";
pub const TENSOR_VERSION: u32 = 1;

pub fn write_tensor<W: Write>(t: &TmpTensor, mut w: W) -> Result<()> {
    w.write_all(&tensor_to_bytes(t)?)?;
    Ok(())
}

pub fn tensor_to_bytes(t: &TmpTensor) -> Result<Vec<u8>> {
    let rank = u8::try_from(t.shape().len()).map_err(|_| TmpError::Format("tensor rank exceeds 255".into()))?;
    let meta = serde_json::to_vec(t.meta())?;
    let mut out = Vec::with_capacity(13 + 4 * t.shape().len() + 8 * t.data().len() + meta.len());
    out.extend_from_slice(TENSOR_MAGIC);
    out.extend_from_slice(&TENSOR_VERSION.to_le_bytes());
    out.push(rank);
    for &e in t.shape() {
        let e = u32::try_from(e).map_err(|_| TmpError::Format("tensor extent exceeds u32".into()))?;
        out.extend_from_slice(&e.to_le_bytes());
    }
    for &x in t.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    let n = u32::try_from(meta.len()).map_err(|_| TmpError::Format("metadata too large".into()))?;
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&meta);
    Ok(out)
}

pub fn read_tensor<R: Read>(mut r: R) -> Result<TmpTensor> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    tensor_from_bytes(&bytes)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| TmpError::Format(format!("truncated tensor file at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn tensor_from_bytes(bytes: &[u8]) -> Result<TmpTensor> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4)? != TENSOR_MAGIC {
        return Err(TmpError::Format("not a tensor file (bad magic)".into()));
    }
    let version = c.u32()?;
    if version != TENSOR_VERSION {
        return Err(TmpError::Format(format!("unsupported tensor version {version}")));
    }
    let rank = c.take(1)?[0] as usize;
    let shape = (0..rank).map(|_| c.u32().map(|e| e as usize)).collect::<Result<Vec<_>>>()?;
    let len = shape
        .iter()
        .try_fold(1usize, |acc, &e| acc.checked_mul(e))
        .ok_or_else(|| TmpError::Format("tensor extents overflow".into()))?;
    let payload = c.take(len.checked_mul(8).ok_or_else(|| TmpError::Format("tensor too large".into()))?)?;
    let data = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let n = c.u32()? as usize;
    let meta: TensorMeta = serde_json::from_slice(c.take(n)?)?;
    if c.pos != bytes.len() {
        return Err(TmpError::Format(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    TmpTensor::new(shape, data, meta)
}

pub fn is_tensor_file(bytes: &[u8]) -> bool {
    bytes.starts_with(TENSOR_MAGIC)
}

/// Human-readable description of a tensor written next to it.
pub fn tensor_sidecar(t: &TmpTensor) -> String {
    let value = serde_json::json!({
        "shape": t.shape(),
        "meta": t.meta(),
    });
    let mut s = serde_json::to_string_pretty(&value).expect("metadata serializes");
    s.push('\n');
    s
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

pub fn write_diagrams<W: Write>(grid: &DiagramGrid, mut w: W) -> Result<()> {
    writeln!(w, "# times={}", grid.times())?;
    writeln!(w, "# dims={}", join(grid.dims(), ","))?;
    writeln!(w, "# thresholds={}", join(grid.thresholds(), ";"))?;
    writeln!(w, "slice,dim,birth,death,right_open")?;
    for j in 1..=grid.levels() {
        for &k in grid.dims() {
            let pd = grid.get(j, k).expect("cell exists");
            for iv in pd.intervals() {
                writeln!(w, "{j},{k},{},{},{}", iv.birth_time(), iv.death_time(), iv.right_open)?;
            }
        }
    }
    Ok(())
}

fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.strip_prefix('#')?.trim().strip_prefix(key)?.strip_prefix('=')
}

pub fn read_diagrams<R: Read>(r: R) -> Result<DiagramGrid> {
    let mut times = None;
    let mut dims: Option<Vec<usize>> = None;
    let mut thresholds: Option<Vec<f64>> = None;
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let lineno = i as u64 + 1;
        let bad = |message: String| TmpError::Ingest { line: lineno, message };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some(v) = header_value(trimmed, "times") {
                times = Some(v.trim().parse::<usize>().map_err(|e| bad(format!("times: {e}")))?);
            } else if let Some(v) = header_value(trimmed, "dims") {
                dims = Some(
                    v.split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| s.trim().parse().map_err(|e| bad(format!("dims: {e}"))))
                        .collect::<Result<_>>()?,
                );
            } else if let Some(v) = header_value(trimmed, "thresholds") {
                thresholds = Some(
                    v.split(';')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| s.trim().parse().map_err(|e| bad(format!("thresholds: {e}"))))
                        .collect::<Result<_>>()?,
                );
            }
            continue;
        }
        if !seen_header {
            if trimmed != "slice,dim,birth,death,right_open" {
                return Err(bad("expected header slice,dim,birth,death,right_open".into()));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(bad(format!("expected 5 fields, found {}", fields.len())));
        }
        let j: usize = fields[0].parse().map_err(|e| bad(format!("slice: {e}")))?;
        let k: usize = fields[1].parse().map_err(|e| bad(format!("dim: {e}")))?;
        let b: f64 = fields[2].parse().map_err(|e| bad(format!("birth: {e}")))?;
        let d: f64 = fields[3].parse().map_err(|e| bad(format!("death: {e}")))?;
        let open: bool = fields[4].parse().map_err(|e| bad(format!("right_open: {e}")))?;
        let b = ZigzagIndex::from_time(b).map_err(|e| bad(e.to_string()))?.encoded();
        let d = ZigzagIndex::from_time(d).map_err(|e| bad(e.to_string()))?.encoded();
        rows.push((lineno, j, k, Interval { birth: b, death: d, right_open: open }));
    }
    let missing = |what: &str| TmpError::Format(format!("diagram file lacks the {what} header"));
    let times = times.ok_or_else(|| missing("times"))?;
    let dims = dims.ok_or_else(|| missing("dims"))?;
    let thresholds = thresholds.ok_or_else(|| missing("thresholds"))?;
    if times == 0 {
        return Err(TmpError::Format("times must be at least 1".into()));
    }
    let m = thresholds.len();
    let mut buckets = vec![vec![Vec::new(); m]; dims.len()];
    for (lineno, j, k, iv) in rows {
        let d = dims.iter().position(|&x| x == k);
        match d {
            Some(d) if (1..=m).contains(&j) => buckets[d][j - 1].push(iv),
            _ => {
                return Err(TmpError::Ingest {
                    line: lineno,
                    message: format!("slice {j} dim {k} outside the declared grid"),
                })
            }
        }
    }
    let cells = buckets
        .into_iter()
        .zip(&dims)
        .map(|(col, &k)| {
            col.into_iter()
                .map(|ivs| ZigzagDiagram::new(k, 2 * times - 1, ivs))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    DiagramGrid::new(dims, times, thresholds, cells)
}

pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::Vectorization;

    fn sample() -> TmpTensor {
        let mut meta = TensorMeta::new(Vectorization::BettiZigzag, 2);
        meta.homology_dim = Some(1);
        meta.thresholds = vec![0.5, 1.0];
        TmpTensor::new(vec![2, 3], vec![0.0, 1.0, -2.5, 1e-300, 3.0, 0.1], meta).unwrap()
    }

    #[test]
    fn tensor_layout() {
        let bytes = tensor_to_bytes(&sample()).unwrap();
        assert_eq!(&bytes[..4], b"TMPT");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(bytes[8], 2);
        assert_eq!(&bytes[9..13], &[2, 0, 0, 0]);
        assert_eq!(&bytes[13..17], &[3, 0, 0, 0]);
        assert_eq!(&bytes[17..25], &0.0f64.to_le_bytes());
        assert_eq!(&bytes[25..33], &1.0f64.to_le_bytes());
        let n = u32::from_le_bytes(bytes[65..69].try_into().unwrap()) as usize;
        assert_eq!(bytes.len(), 69 + n);
        assert!(serde_json::from_slice::<serde_json::Value>(&bytes[69..]).is_ok());
    }

    #[test]
    fn tensor_round_trip() {
        let t = sample();
        let bytes = tensor_to_bytes(&t).unwrap();
        let back = tensor_from_bytes(&bytes).unwrap();
        assert_eq!(back, t);
        assert_eq!(tensor_to_bytes(&back).unwrap(), bytes);
    }

    #[test]
    fn corrupt_tensors_are_rejected() {
        let bytes = tensor_to_bytes(&sample()).unwrap();
        assert!(tensor_from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(tensor_from_bytes(b"NOPE").is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(tensor_from_bytes(&extra).is_err());
        let mut wrong_version = bytes;
        wrong_version[4] = 2;
        assert!(tensor_from_bytes(&wrong_version).is_err());
    }

    #[test]
    fn diagram_round_trip() {
        let iv = |b, d, n| Interval { birth: b, death: d, right_open: d == n };
        let cells = vec![
            vec![
                ZigzagDiagram::new(0, 5, vec![iv(1, 5, 5), iv(2, 2, 5)]).unwrap(),
                ZigzagDiagram::empty(0, 3),
            ],
            vec![ZigzagDiagram::empty(1, 3), ZigzagDiagram::new(1, 5, vec![iv(3, 4, 5)]).unwrap()],
        ];
        let grid = DiagramGrid::new(vec![0, 1], 3, vec![0.1, 2.0], cells).unwrap();
        let mut buf = Vec::new();
        write_diagrams(&grid, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("1,0,1,3,true\n"));
        assert!(text.contains("1,0,1.5,1.5,false\n"));
        assert!(text.contains("2,1,2,2.5,false\n"));
        assert_eq!(read_diagrams(buf.as_slice()).unwrap(), grid);
    }

    #[test]
    fn diagram_errors_carry_line_numbers() {
        let text = "# times=2\n# dims=0\n# thresholds=1\nslice,dim,birth,death,right_open\n1,0,1,x,true\n";
        match read_diagrams(text.as_bytes()) {
            Err(TmpError::Ingest { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
