//! Text format for point sets:
//!
//! ```text
//! # qmcpoints v1 dim=<d> count=<m> provenance=<tag>
//! <x_1> <x_2> ... <x_d>
//! ...
//! ```
//!
//! Coordinates are written with 17 significant digits, which round-trips
//! every `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::PointSet;
use crate::error::{Error, Result};

const MAGIC: &str = "# qmcpoints v1";

pub fn write_points<W: Write>(set: &PointSet, mut out: W) -> Result<()> {
    let tag = set.provenance().replace(['\n', '\r'], " ");
    writeln!(out, "{MAGIC} dim={} count={} provenance={tag}", set.dim(), set.len())?;
    for p in set.iter() {
        let line: Vec<String> = p.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_points_file(set: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_points(set, &mut w)?;
    w.flush()?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_points<R: Read>(input: R) -> Result<PointSet> {
    let mut lines = BufReader::new(input).lines();
    let header = lines.next().ok_or_else(|| parse_err(1, "empty input"))??;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| parse_err(1, "missing qmcpoints v1 header"))?;
    let (fields, provenance) = match rest.find("provenance=") {
        Some(pos) => (&rest[..pos], rest[pos + "provenance=".len()..].to_string()),
        None => (rest, String::new()),
    };
    let mut dim = None;
    let mut count = None;
    for tok in fields.split_whitespace() {
        if let Some(v) = tok.strip_prefix("dim=") {
            dim = Some(v.parse::<usize>().map_err(|e| parse_err(1, format!("dim: {e}")))?);
        } else if let Some(v) = tok.strip_prefix("count=") {
            count = Some(v.parse::<usize>().map_err(|e| parse_err(1, format!("count: {e}")))?);
        } else {
            return Err(parse_err(1, format!("unexpected header field {tok}")));
        }
    }
    let dim = dim.ok_or_else(|| parse_err(1, "missing dim"))?;
    let count = count.ok_or_else(|| parse_err(1, "missing count"))?;

    let mut coords = Vec::with_capacity(dim * count);
    let mut seen = 0usize;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let before = coords.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|e| parse_err(lineno, format!("bad coordinate {tok}: {e}")))?;
            coords.push(v);
        }
        if coords.len() - before != dim {
            return Err(parse_err(lineno, format!("expected {dim} coordinates")));
        }
        seen += 1;
    }
    if seen != count {
        return Err(parse_err(seen + 1, format!("header says {count} points, found {seen}")));
    }
    PointSet::from_flat(dim, coords, provenance)
}

pub fn read_points_file(path: impl AsRef<Path>) -> Result<PointSet> {
    read_points(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_rows() {
        let set = PointSet::new(2, vec![vec![0.25, 0.5]], "demo(n=1)").unwrap();
        let mut buf = Vec::new();
        write_points(&set, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# qmcpoints v1 dim=2 count=1 provenance=demo(n=1)\n"));
        let back = read_points(text.as_bytes()).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn malformed_inputs() {
        assert!(read_points("".as_bytes()).is_err());
        assert!(read_points("# qmcpoints v1 dim=2 count=2 provenance=x\n0.1 0.2\n".as_bytes()).is_err());
        assert!(read_points("# qmcpoints v1 dim=2 count=1 provenance=x\n0.1\n".as_bytes()).is_err());
        assert!(read_points("# other\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(raw in prop::collection::vec(0.0f64..1.0, 0..60)) {
            let n = raw.len() / 3 * 3;
            let set = PointSet::from_flat(3, raw[..n].to_vec(), "prop").unwrap();
            let mut buf = Vec::new();
            write_points(&set, &mut buf).unwrap();
            let back = read_points(buf.as_slice()).unwrap();
            prop_assert_eq!(back, set);
        }
    }
}
