//! `.grid` files: one JSON header line, then the samples in row-major order,
//! either one decimal per line or as raw little-endian `f64`.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Domain, Measure, SampledFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    #[default]
    Csv,
    F64le,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub dim: usize,
    pub domain: Domain,
    pub resolution: usize,
    pub measure: Measure,
    #[serde(default)]
    pub encoding: Encoding,
}

pub fn write_grid<W: Write>(f: &SampledFunction, encoding: Encoding, mut w: W) -> Result<()> {
    let header =
        GridHeader { dim: f.dim(), domain: f.domain(), resolution: f.resolution(), measure: f.measure(), encoding };
    writeln!(w, "{}", serde_json::to_string(&header)?)?;
    match encoding {
        Encoding::Csv => {
            for v in f.values() {
                // shortest representation that round-trips
                writeln!(w, "{v:?}")?;
            }
        }
        Encoding::F64le => {
            for v in f.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_grid<R: BufRead>(mut r: R) -> Result<SampledFunction> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: GridHeader = serde_json::from_str(line.trim())?;
    let len = header.resolution.checked_pow(header.dim as u32).ok_or_else(|| Error::Parse("grid too large".into()))?;
    let values = match header.encoding {
        Encoding::Csv => {
            let mut values = Vec::with_capacity(len);
            for (k, l) in r.lines().enumerate() {
                let l = l?;
                let t = l.trim();
                if t.is_empty() {
                    continue;
                }
                values.push(t.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", k + 2)))?);
            }
            values
        }
        Encoding::F64le => {
            let mut bytes = Vec::with_capacity(8 * len);
            r.read_to_end(&mut bytes)?;
            if bytes.len() != 8 * len {
                return Err(Error::Parse(format!("expected {} bytes of samples, got {}", 8 * len, bytes.len())));
            }
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()
        }
    };
    SampledFunction::new(header.dim, header.domain, header.resolution, header.measure, values)
}

pub fn load_grid(path: &Path) -> Result<SampledFunction> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_grid(std::io::BufReader::new(file))
}

pub fn save_grid(f: &SampledFunction, encoding: Encoding, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    write_grid(f, encoding, &mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_encodings_round_trip_bit_exactly() {
        let f = SampledFunction::boxed(2, 2.5, 7, |x| (x[0] * 3.1).sin() / (1.0 + x[1] * x[1])).unwrap();
        for enc in [Encoding::Csv, Encoding::F64le] {
            let mut buf = Vec::new();
            write_grid(&f, enc, &mut buf).unwrap();
            assert_eq!(read_grid(&buf[..]).unwrap(), f);
        }
    }

    #[test]
    fn short_payload_is_rejected() {
        let mut buf = Vec::new();
        let f = SampledFunction::torus(1, 4, |x| x[0]).unwrap();
        write_grid(&f, Encoding::Csv, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        let text = String::from_utf8(buf).unwrap();
        let trimmed: String = text.lines().take(4).collect::<Vec<_>>().join("\n");
        assert!(read_grid(trimmed.as_bytes()).is_err());
    }
}
