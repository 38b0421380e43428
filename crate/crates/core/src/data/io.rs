//! Dataset CSV format.
//!
//! ```text
//! f0,f1,...,f{d-1},true_label,candidates
//! 0.25,-1.5,...,2,0;2;3
//! ```
//!
//! `candidates` holds sorted, `;`-separated, 0-based class indices. Floats are
//! written in shortest round-trip form, so save/load is lossless.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::dataset::{Example, PllDataset};
use crate::error::{Error, Result};

pub fn write_dataset<W: Write>(dataset: &PllDataset, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| Error::Parse {
        line: 0,
        message: e.to_string(),
    };
    let mut header: Vec<String> = (0..dataset.feature_dim()).map(|i| format!("f{i}")).collect();
    header.push("true_label".into());
    header.push("candidates".into());
    w.write_record(&header).map_err(csv_err)?;
    for e in dataset.examples() {
        let mut record: Vec<String> = e.features.iter().map(|v| v.to_string()).collect();
        record.push(e.true_label.to_string());
        record.push(
            e.candidates
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        );
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    Ok(())
}

pub fn save_dataset(dataset: &PllDataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(dataset, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Parse { message, .. } => Error::io(path, std::io::Error::other(message)),
        other => other,
    })
}

/// Reads the CSV format. The class count is the larger of 2 and the highest
/// index seen plus one; use [`read_dataset_with_classes`] to pin it.
pub fn read_dataset<R: Read>(input: R) -> Result<PllDataset> {
    read_inner(input, None)
}

pub fn read_dataset_with_classes<R: Read>(input: R, num_classes: usize) -> Result<PllDataset> {
    read_inner(input, Some(num_classes))
}

pub fn load_dataset(path: &Path) -> Result<PllDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(std::io::BufReader::new(file))
}

fn read_inner<R: Read>(input: R, num_classes: Option<usize>) -> Result<PllDataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = reader.records();

    let header = match records.next() {
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
        Some(h) => h.map_err(|e| parse_error(1, e))?,
    };
    let n_fields = header.len();
    if n_fields < 2 || &header[n_fields - 2] != "true_label" || &header[n_fields - 1] != "candidates" {
        return Err(Error::Parse {
            line: 1,
            message: "header must end with `true_label,candidates`".into(),
        });
    }
    let dim = n_fields - 2;
    for (i, name) in header.iter().take(dim).enumerate() {
        if name != format!("f{i}") {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected column `f{i}`, found `{name}`"),
            });
        }
    }

    let mut examples = Vec::new();
    let mut max_class = 0usize;
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != n_fields {
            return Err(Error::Parse {
                line,
                message: format!("expected {n_fields} fields, found {}", record.len()),
            });
        }
        let features = record
            .iter()
            .take(dim)
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: format!("invalid feature value `{f}`"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let parse_index = |s: &str| {
            s.trim().parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("invalid class index `{s}`"),
            })
        };
        let true_label = parse_index(&record[dim])?;
        let candidates = record[dim + 1]
            .split(';')
            .map(parse_index)
            .collect::<Result<Vec<_>>>()?;
        if !candidates.contains(&true_label) {
            return Err(Error::Integrity {
                line,
                message: format!("candidates `{}` do not contain true label {true_label}", &record[dim + 1]),
            });
        }
        max_class = candidates.iter().copied().fold(max_class.max(true_label), usize::max);
        examples.push(Example::new(features, true_label, candidates).map_err(|e| Error::Integrity {
            line,
            message: e.to_string(),
        })?);
    }
    if examples.is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no data rows".into(),
        });
    }
    let k = num_classes.unwrap_or((max_class + 1).max(2));
    PllDataset::new(examples, k)
}

fn parse_error(line: usize, e: csv::Error) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate::{make_blobs, uniform_candidates};

    #[test]
    fn round_trip_in_memory() {
        let d = uniform_candidates(&make_blobs(3, 4, 2, 2.0, 1).unwrap(), 0.5, 2).unwrap();
        let mut buf = Vec::new();
        write_dataset(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("f0,f1,true_label,candidates\n"));
        assert!(!text.contains('\r'));
        let back = read_dataset_with_classes(buf.as_slice(), 3).unwrap();
        assert_eq!(back.examples(), d.examples());
    }

    #[test]
    fn integrity_error_names_line() {
        let text = "f0,true_label,candidates\n1.0,0,0;1\n2.0,1,0;2\n";
        match read_dataset(text.as_bytes()) {
            Err(Error::Integrity { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected integrity error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_rows() {
        assert!(matches!(read_dataset("".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            read_dataset("f0,true_label,candidates\nabc,0,0\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_dataset("f0,true_label,candidates\n1.0,0\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_dataset("x,true_label,candidates\n1.0,0,0\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
