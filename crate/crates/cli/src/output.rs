use std::fs;
use std::io::Write;
use std::path::Path;

use medpriv_core::Dataset;
use serde::Serialize;

use crate::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// A `# seed=` comment line followed by CSV text.
pub fn with_seed_line(seed: u64, csv: &str) -> String {
    format!("# seed={seed}\n{csv}")
}

pub fn csv_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

/// Renders a dataset with intervals as `[lo,hi]` and masked cells as `*`.
pub fn dataset_csv(ds: &Dataset) -> String {
    let header: Vec<String> = ds.schema().names().iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = (0..ds.n_rows()).map(|r| ds.row_tokens(r)).collect();
    csv_text(&header, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use medpriv_core::{read_csv, AttributeRole, Column, Interval, RoleMap};

    #[test]
    fn published_csv_round_trips() {
        let ds = Dataset::new(
            vec![
                ("age".into(), AttributeRole::QuasiIdentifier),
                ("thalach".into(), AttributeRole::Sensitive),
                ("cp".into(), AttributeRole::QuasiIdentifier),
                ("target".into(), AttributeRole::Target),
            ],
            vec![
                Column::Interval(vec![
                    Interval::new(29.0, 45.5).unwrap(),
                    Interval::point(60.0),
                ]),
                Column::Masked(vec!["*".into(), "*".into()]),
                Column::Categorical(vec!["{a|b}".into(), "c".into()]),
                Column::Numeric(vec![0.0, 1.0]),
            ],
        )
        .unwrap();
        let text = with_seed_line(9, &dataset_csv(&ds));
        assert!(text.starts_with("# seed=9\nage,thalach,cp,target\n\"[29,45.5]\",*,{a|b},0\n"));
        let roles: RoleMap = ds.roles();
        let back = read_csv(text.as_bytes(), &roles, None).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/x.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
