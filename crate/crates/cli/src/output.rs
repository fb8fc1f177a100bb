use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use tempfile::TempDir;

/// Output directory assembled in a sibling temporary directory and moved
/// into place by [`Staged::commit`]. Dropping it without committing leaves
/// the target untouched.
pub struct Staged {
    dir: TempDir,
    target: PathBuf,
}

impl Staged {
    pub fn new(target: &Path) -> io::Result<Self> {
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)?;
        let dir = tempfile::Builder::new().prefix(".parlab-staging-").tempdir_in(&parent)?;
        Ok(Staged { dir, target: target.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> io::Result<()> {
        fs::write(self.dir.path().join(name), contents)
    }

    pub fn write_json(&self, name: &str, value: &serde_json::Value) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Replaces the target directory with the staged one.
    pub fn commit(self) -> io::Result<PathBuf> {
        let staged = self.dir.keep();
        if self.target.exists() {
            let parent = staged.parent().unwrap_or(Path::new("."));
            let old = tempfile::Builder::new().prefix(".parlab-old-").tempdir_in(parent)?.keep();
            fs::remove_dir(&old)?;
            fs::rename(&self.target, &old)?;
            if let Err(e) = fs::rename(&staged, &self.target) {
                fs::rename(&old, &self.target)?;
                return Err(e);
            }
            fs::remove_dir_all(&old)?;
        } else {
            fs::rename(&staged, &self.target)?;
        }
        Ok(self.target)
    }
}
