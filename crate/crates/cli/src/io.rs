use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::Failure;

/// `-` stands for stdin or stdout.
pub fn is_std(path: &Path) -> bool {
    path.as_os_str() == "-"
}

pub fn check_input(path: &Path) -> Result<(), Failure> {
    if is_std(path) || path.is_file() {
        Ok(())
    } else if path.exists() {
        Err(Failure::data(format!("{} is not a file", path.display())))
    } else {
        Err(Failure::data(format!("{}: no such file", path.display())))
    }
}

pub fn check_dir(path: &Path) -> Result<(), Failure> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Failure::data(format!("{}: no such directory", path.display())))
    }
}

/// The parent directory of an output file must exist.
pub fn check_output(path: &Path) -> Result<(), Failure> {
    if is_std(path) {
        return Ok(());
    }
    if path.is_dir() {
        return Err(Failure::data(format!("{} is a directory", path.display())));
    }
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => {
            Err(Failure::data(format!("{}: no such directory", p.display())))
        }
        _ => Ok(()),
    }
}

/// Creates the directory when missing; its parent must exist.
pub fn prepare_out_dir(path: &Path) -> Result<(), Failure> {
    if path.is_dir() {
        return Ok(());
    }
    check_output(path)?;
    std::fs::create_dir(path)
        .map_err(|e| Failure::data(format!("cannot create {}: {e}", path.display())))
}

pub fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if is_std(path) {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(Box::new(BufReader::new(f)))
}

pub fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    open_input(path)?
        .read_to_string(&mut s)
        .with_context(|| format!("cannot read {}", path.display()))?;
    Ok(s)
}

pub fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    if is_std(path) {
        let mut out = io::stdout().lock();
        out.write_all(bytes)?;
        return out.flush().map_err(Into::into);
    }
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
    w.write_all(bytes)?;
    w.flush().with_context(|| format!("cannot write {}", path.display()))
}

/// `report.txt` → `report.txt.kv`
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
