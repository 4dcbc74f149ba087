use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// Write `path` through a temporary file in the same directory and rename it
/// into place, so readers never see a partial file.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        fill(&mut out)?;
        out.flush()?;
    }
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        writeln!(out)?;
        Ok(())
    })
}

/// CSV with a header and one row per index of the given equal-length columns.
pub fn write_columns(path: &Path, names: &[&str], columns: &[&[f64]]) -> Result<()> {
    write_atomic(path, |out| {
        writeln!(out, "{}", names.join(","))?;
        let rows = columns.first().map_or(0, |c| c.len());
        for i in 0..rows {
            let row: Vec<String> = columns.iter().map(|c| format!("{:.16e}", c[i])).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("a.csv");
        write_columns(&path, &["x", "y"], &[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        write_columns(&path, &["x"], &[&[5.0]]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "x\n5.0000000000000000e0\n");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
