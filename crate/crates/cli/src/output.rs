use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Fixed 17-significant-digit rendering used for every CSV cell.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV table with a header row; cells are pre-rendered strings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for c in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            let _ = write!(self.text, "{}", c.as_ref());
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
        s.push('\n');
        self.write(name, &s)
    }
}

/// `[re, im]` pair for JSON output.
pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Row-major nested `[re, im]` rendering of a square matrix.
pub fn matrix<M>(m: &M, n: usize) -> Vec<Vec<[f64; 2]>>
where
    M: std::ops::Index<(usize, usize), Output = Complex64>,
{
    (0..n).map(|i| (0..n).map(|j| pair(m[(i, j)])).collect()).collect()
}
