//! Reading observation files.
//!
//! The format is CSV with two numeric columns `x,y`. An optional header
//! row whose first field is not a number is skipped, and lines starting
//! with `#` are comments.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stats::PairedSample;

pub fn read_pairs<R: Read>(reader: R) -> Result<PairedSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut pairs = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(k as u64 + 1);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::Parse { line, msg: format!("expected 2 fields `x,y`, found {}", rec.len()) });
        }
        let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) => {
                if !x.is_finite() || !y.is_finite() {
                    return Err(Error::Parse { line, msg: "non-finite value".into() });
                }
                pairs.push((x, y));
            }
            (Err(_), _) if k == 0 && pairs.is_empty() => continue,
            _ => return Err(Error::Parse { line, msg: format!("cannot parse `{},{}`", &rec[0], &rec[1]) }),
        }
    }
    if pairs.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no observations".into() });
    }
    PairedSample::new(pairs)
}

pub fn read_pairs_file(path: &Path) -> Result<PairedSample> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_pairs(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_comments_and_blanks() {
        let s = read_pairs("# probe run\nx,y\n0.1, 2\n\n0.3,4\n".as_bytes()).unwrap();
        assert_eq!(s.pairs(), &[(0.1, 2.0), (0.3, 4.0)]);
    }

    #[test]
    fn reports_line_numbers() {
        let e = read_pairs("x,y\n1,2\n3,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        let e = read_pairs("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
        assert!(matches!(read_pairs("x,y\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_pairs("1,2\nnan,1\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
    }
}
