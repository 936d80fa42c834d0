//! CSV datasets: UTF-8, comma separated, mandatory header, label column last.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use cls_core::{Dataset, TaskKind};

use crate::error::{Error, Result};

/// Parses `binary`, `regression` or `multiclass:K`.
pub fn parse_task(s: &str) -> Result<TaskKind> {
    match s.trim() {
        "binary" => Ok(TaskKind::Binary),
        "regression" => Ok(TaskKind::Regression),
        other => {
            let k = other
                .strip_prefix("multiclass:")
                .and_then(|k| k.parse::<usize>().ok())
                .ok_or_else(|| Error::usage(format!("unknown task '{other}' (binary, regression or multiclass:K)")))?;
            Ok(TaskKind::classification(k)?)
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, task: TaskKind) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, task, path)
}

/// Reads a dataset; `origin` only labels error messages. Rows are numbered
/// by file line, the header being row 1.
pub fn read_csv<R: Read>(reader: R, task: TaskKind, origin: &Path) -> Result<Dataset> {
    let parse_err = |row: usize, message: String| Error::Parse { path: origin.to_path_buf(), row, message };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header: Vec<String> = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.iter().map(|h| h.trim().to_string()).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(parse_err(1, "empty file or missing header".into()));
    }
    if header.len() < 2 {
        return Err(parse_err(1, "need at least one feature column and a label column".into()));
    }
    let p = header.len() - 1;
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| parse_err(e.position().map_or(0, |pos| pos.line() as usize), e.to_string()))?;
        let row = record.position().map_or(0, |pos| pos.line() as usize);
        if record.len() != header.len() {
            return Err(parse_err(row, format!("expected {} fields, found {}", header.len(), record.len())));
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| parse_err(row, format!("column '{}': '{}' is not a number", header[j], cell)))?;
            if !v.is_finite() {
                return Err(parse_err(row, format!("column '{}': non-finite value", header[j])));
            }
            if j < p {
                x.push(v);
            } else {
                if let Some(k) = task.classes() {
                    if v.fract() != 0.0 || v < 0.0 || v >= k as f64 {
                        return Err(parse_err(row, format!("label {v} is not a class id in 0..{k}")));
                    }
                }
                labels.push(v);
            }
        }
    }
    if labels.is_empty() {
        return Err(parse_err(2, "no data rows".into()));
    }
    let names = header[..p].to_vec();
    Ok(Dataset::new(x, p, labels, task)?.with_column_names(names)?)
}

pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(to_csv_string(data).as_bytes()).map_err(|e| Error::io(path, e))
}

/// Values are written in shortest round-trip form, so reloading is exact.
pub fn to_csv_string(data: &Dataset) -> String {
    let mut out = String::new();
    let names: Vec<String> = match data.column_names() {
        Some(n) => n.to_vec(),
        None => (1..=data.p()).map(|j| format!("x{j}")).collect(),
    };
    out.push_str(&names.join(","));
    out.push_str(",y\n");
    for (row, y) in data.rows().zip(data.labels()) {
        for v in row {
            out.push_str(&number(*v));
            out.push(',');
        }
        out.push_str(&number(*y));
        out.push('\n');
    }
    out
}

fn number(v: f64) -> String {
    let (plain, sci) = (v.to_string(), format!("{v:e}"));
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, task: TaskKind) -> Result<Dataset> {
        read_csv(text.as_bytes(), task, Path::new("mem.csv"))
    }

    #[test]
    fn three_row_file() {
        let d = parse("x1,x2,y\n0,0,0\n1,1,1\n2,2,1\n", TaskKind::Binary).unwrap();
        assert_eq!((d.n(), d.p(), d.task()), (3, 2, TaskKind::Binary));
        assert_eq!(d.labels(), &[0.0, 1.0, 1.0]);
        assert_eq!(d.column_names().unwrap(), &["x1".to_string(), "x2".to_string()]);
    }

    #[test]
    fn bad_cell_names_its_row() {
        let err = parse("x1,x2,y\n1,abc,0\n", TaskKind::Binary).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err}");
        let err = parse("x1,x2,y\n1,2,0\n1,2\n", TaskKind::Binary).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }), "{err}");
    }

    #[test]
    fn empty_and_header_only_files_fail() {
        assert!(parse("", TaskKind::Binary).is_err());
        assert!(parse("x1,y\n", TaskKind::Binary).is_err());
    }

    #[test]
    fn labels_outside_the_class_range_fail() {
        assert!(matches!(parse("x,y\n0,2\n", TaskKind::Binary), Err(Error::Parse { row: 2, .. })));
        assert!(parse("x,y\n0,0.5\n", TaskKind::Binary).is_err());
        assert!(parse("x,y\n0,0.5\n", TaskKind::Regression).is_ok());
    }

    #[test]
    fn round_trip_is_exact() {
        let d = Dataset::new(vec![0.1, 1.0 / 3.0, -2.5e-17, 7.0], 2, vec![1.25, -0.3], TaskKind::Regression).unwrap();
        let back = parse(&to_csv_string(&d), TaskKind::Regression).unwrap();
        assert_eq!(back.raw(), d.raw());
        assert_eq!(back.labels(), d.labels());
    }

    #[test]
    fn task_names() {
        assert_eq!(parse_task("binary").unwrap(), TaskKind::Binary);
        assert_eq!(parse_task("multiclass:4").unwrap(), TaskKind::MultiClass(4));
        assert_eq!(parse_task("multiclass:2").unwrap(), TaskKind::Binary);
        assert!(parse_task("multiclass").is_err());
        assert!(parse_task("multiclass:1").is_err());
    }
}
