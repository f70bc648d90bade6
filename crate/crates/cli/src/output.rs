use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Where a subcommand's artifact goes.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    /// `--output` wins; a relative path is resolved against `out_dir` when
    /// one is configured. Without `--output` the artifact goes to stdout.
    pub fn resolve(output: Option<&Path>, out_dir: Option<&Path>) -> Sink {
        match (output, out_dir) {
            (None, _) => Sink::Stdout,
            (Some(p), Some(dir)) if p.is_relative() => Sink::File(dir.join(p)),
            (Some(p), _) => Sink::File(p.to_path_buf()),
        }
    }

    /// Writes `contents` in one piece. Files are written to a temporary
    /// sibling and renamed into place, so a failed run leaves nothing behind.
    pub fn write(&self, contents: &str) -> Result<()> {
        match self {
            Sink::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(contents.as_bytes())?;
                out.flush()?;
                Ok(())
            }
            Sink::File(path) => write_atomic(path, contents),
        }
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())
        .with_context(|| format!("cannot write {}", path.display()))?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot move output into {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolve_rules() {
        let dir = Path::new("/tmp/out");
        assert!(matches!(Sink::resolve(None, Some(dir)), Sink::Stdout));
        match Sink::resolve(Some(Path::new("a.csv")), Some(dir)) {
            Sink::File(p) => assert_eq!(p, PathBuf::from("/tmp/out/a.csv")),
            _ => panic!(),
        }
        match Sink::resolve(Some(Path::new("/x/a.csv")), Some(dir)) {
            Sink::File(p) => assert_eq!(p, PathBuf::from("/x/a.csv")),
            _ => panic!(),
        }
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("t.csv");
        Sink::File(target.clone()).write("a,b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&target).unwrap(), "a,b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(Sink::File(dir.path().join("missing/t.csv")).write("x").is_err());
    }
}
