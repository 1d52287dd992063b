//! Grid file format: one JSON header line `{"dim", "box", "resolution"}`, then a CSV
//! body with one line per last-axis row, `inf` marking +∞.

use super::{ExtGridFn, GridSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridHeader {
    pub dim: usize,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub resolution: Vec<usize>,
}

pub fn write_grid(f: &ExtGridFn, mut out: impl Write) -> Result<()> {
    let g = f.grid();
    let header = GridHeader {
        dim: g.dim(),
        bounds: g.lo.iter().zip(&g.hi).map(|(a, b)| [*a, *b]).collect(),
        resolution: g.res.clone(),
    };
    writeln!(out, "{}", serde_json::to_string(&header).map_err(|e| Error::Parse(e.to_string()))?)?;
    let row = g.res[g.dim() - 1];
    for chunk in f.values().chunks(row) {
        let line: Vec<String> = chunk.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_grid(input: impl BufRead) -> Result<ExtGridFn> {
    let mut lines = input.lines();
    let head = lines.next().ok_or_else(|| Error::Parse("empty grid file".into()))??;
    let header: GridHeader =
        serde_json::from_str(&head).map_err(|e| Error::Parse(format!("grid header line 1: {e}")))?;
    if header.bounds.len() != header.dim || header.resolution.len() != header.dim {
        return Err(Error::Parse("grid header dimension does not match box/resolution".into()));
    }
    let grid = GridSpec::new(
        header.bounds.iter().map(|b| b[0]).collect(),
        header.bounds.iter().map(|b| b[1]).collect(),
        header.resolution.clone(),
    )?;
    let mut values = Vec::with_capacity(grid.len());
    for (ln, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for (col, tok) in line.split(',').enumerate() {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}, column {}: bad value '{}'", ln + 2, col + 1, tok.trim())))?;
            values.push(v);
        }
    }
    if values.len() != grid.len() {
        return Err(Error::Parse(format!("expected {} values, found {}", grid.len(), values.len())));
    }
    ExtGridFn::new(grid, values)
}

impl ExtGridFn {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        read_grid(std::io::BufReader::new(f))
    }

    /// Written to a temporary sibling and renamed into place.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::new();
        write_grid(self, &mut buf)?;
        crate::atomic_write(path.as_ref(), &buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_with_infinities() {
        let g = GridSpec::new(vec![0.0, -1.0], vec![1.0, 1.0], vec![2, 3]).unwrap();
        let f = ExtGridFn::new(g, vec![0.1, f64::INFINITY, 1.0 / 3.0, 2.0, 1e-300, f64::INFINITY]).unwrap();
        let mut buf = Vec::new();
        write_grid(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap().contains("inf"));
        let back = read_grid(&buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn bad_token_reports_position() {
        let text = "{\"dim\":1,\"box\":[[0,1]],\"resolution\":[2]}\n1.0,abc\n";
        let err = read_grid(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 2, column 2"), "{err}");
    }
}
