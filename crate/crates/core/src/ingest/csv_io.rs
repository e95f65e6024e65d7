use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::simulate::StreamSpec;
use crate::types::{Label, LabeledPoint};

fn parse_label(raw: &str) -> Option<Label> {
    let raw = raw.trim();
    raw.parse::<Label>().ok().or_else(|| {
        let v: f64 = raw.parse().ok()?;
        (v.fract() == 0.0 && v.abs() <= Label::MAX as f64).then_some(v as Label)
    })
}

/// Read labeled points from CSV text with a header row. Every column other
/// than `label_column` must be numeric. `origin` names the source in errors.
pub fn read_labeled_csv<R: Read>(
    reader: R,
    label_column: &str,
    origin: &Path,
) -> Result<Vec<LabeledPoint>> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(parse_err(1, e.to_string())),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(Vec::new());
    }
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| parse_err(1, format!("no label column `{label_column}` in header")))?;

    let width = headers.len();
    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(parse_err(
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let mut features = Vec::with_capacity(width - 1);
        let mut label = None;
        for (i, field) in record.iter().enumerate() {
            if i == label_idx {
                label = Some(parse_label(field).ok_or_else(|| {
                    parse_err(line, format!("label `{field}` is not an integer"))
                })?);
            } else {
                let v: f64 = field.trim().parse().map_err(|_| {
                    parse_err(
                        line,
                        format!("column `{}`: `{field}` is not a number", &headers[i]),
                    )
                })?;
                features.push(v);
            }
        }
        points.push(LabeledPoint::new(
            features,
            label.expect("label column present"),
        ));
    }
    Ok(points)
}

/// Load a labeled CSV file (header `f1,...,fm,label`), preserving row order.
pub fn load_labeled_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Vec<LabeledPoint>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_labeled_csv(file, label_column, path)
}

/// Write points as `f1,...,fm,label`.
pub fn write_labeled_csv<W: Write>(writer: W, points: &[LabeledPoint]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let dim = points.first().map_or(0, LabeledPoint::dim);
    let mut header: Vec<String> = (1..=dim).map(|i| format!("f{i}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for p in points {
        let mut row: Vec<String> = p.features.iter().map(|v| v.to_string()).collect();
        row.push(p.label.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Write a stream to `path` plus its change points, one per line, to
/// `path` with a `.changes` extension.
pub fn write_stream_csv(path: impl AsRef<Path>, stream: &StreamSpec) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_labeled_csv(file, &stream.points).map_err(|e| io_err(e.into()))?;
    let changes = path.with_extension("changes");
    let mut f = File::create(&changes).map_err(|source| Error::Io {
        path: changes.clone(),
        source,
    })?;
    for c in &stream.true_change_points {
        writeln!(f, "{c}").map_err(|source| Error::Io {
            path: changes.clone(),
            source,
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read(text: &str) -> Result<Vec<LabeledPoint>> {
        read_labeled_csv(text.as_bytes(), "label", Path::new("mem.csv"))
    }

    #[test]
    fn three_rows_two_features() {
        let pts = read("f1,f2,label\n0.1,0.2,1\n-1,3e-2,-1\n2,2,1\n").unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().all(|p| p.dim() == 2));
        assert_eq!(pts[1], LabeledPoint::new(vec![-1.0, 0.03], -1));
    }

    #[test]
    fn header_only_is_empty_pool() {
        assert!(read("f1,f2,label\n").unwrap().is_empty());
        assert!(read("").unwrap().is_empty());
    }

    #[test]
    fn missing_field_names_line() {
        let err = read("f1,f2,label\n0.1,1\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_and_unknown_label_column() {
        let err = read("f1,label\n0.5,1\nabc,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = read_labeled_csv("a,b\n1,2\n".as_bytes(), "class", Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("class"));
    }

    #[test]
    fn label_column_anywhere_and_float_labels() {
        let pts =
            read_labeled_csv("class,x\n2.0,0.5\n".as_bytes(), "class", Path::new("x")).unwrap();
        assert_eq!(pts[0], LabeledPoint::new(vec![0.5], 2));
    }

    proptest! {
        #[test]
        fn write_then_read_round_trips(
            rows in prop::collection::vec((prop::collection::vec(-1e6f64..1e6, 3), -3i32..4), 0..20)
        ) {
            let pts: Vec<LabeledPoint> = rows.into_iter().map(|(f, l)| LabeledPoint::new(f, l)).collect();
            let mut buf = Vec::new();
            write_labeled_csv(&mut buf, &pts).unwrap();
            let back = read_labeled_csv(buf.as_slice(), "label", Path::new("rt")).unwrap();
            prop_assert_eq!(back, pts);
        }
    }
}
