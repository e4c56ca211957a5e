//! Sampled point clouds and their CSV + JSON sidecar persistence.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::manifold::Manifold;
use crate::scalar::Real;

/// `n` points in ambient coordinates, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    manifold: Manifold,
    seed: u64,
    coords: Vec<T>,
}

#[derive(Debug, thiserror::Error)]
pub enum CloudIoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid sidecar {path}: {source}")]
    Sidecar {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

/// Metadata stored next to a point-cloud CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudMeta {
    pub manifold: Manifold,
    pub n: usize,
    pub seed: u64,
}

impl<T: Real> PointCloud<T> {
    pub fn new(manifold: Manifold, seed: u64, coords: Vec<T>) -> Self {
        assert_eq!(coords.len() % manifold.ambient_dim(), 0, "ragged coordinate array");
        Self { manifold, seed, coords }
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.manifold.ambient_dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[T] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    pub fn meta(&self) -> CloudMeta {
        CloudMeta {
            manifold: self.manifold,
            n: self.len(),
            seed: self.seed,
        }
    }

    /// Sidecar path for a cloud CSV: same stem, `.json` extension.
    pub fn sidecar_path(csv: &Path) -> PathBuf {
        csv.with_extension("json")
    }

    /// Write `i,x0,...,x{d-1}` rows plus the JSON sidecar.
    pub fn write_csv(&self, path: &Path) -> Result<(), CloudIoError> {
        let io = |source| CloudIoError::Io { path: path.to_path_buf(), source };
        let file = fs::File::create(path).map_err(io)?;
        let mut w = BufWriter::new(file);
        let header: Vec<String> = std::iter::once("i".to_string())
            .chain((0..self.dim()).map(|k| format!("x{k}")))
            .collect();
        writeln!(w, "{}", header.join(",")).map_err(io)?;
        for (i, p) in self.points().enumerate() {
            write!(w, "{i}").map_err(io)?;
            for v in p {
                write!(w, ",{v:?}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)?;
        let side = Self::sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.meta()).expect("metadata serializes");
        fs::write(&side, json).map_err(|source| CloudIoError::Io { path: side, source })
    }

    /// Read a cloud written by [`PointCloud::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self, CloudIoError> {
        let side = Self::sidecar_path(path);
        let meta_text = fs::read_to_string(&side).map_err(|source| CloudIoError::Io { path: side.clone(), source })?;
        let meta: CloudMeta =
            serde_json::from_str(&meta_text).map_err(|source| CloudIoError::Sidecar { path: side, source })?;
        let file = fs::File::open(path).map_err(|source| CloudIoError::Io { path: path.to_path_buf(), source })?;
        let d = meta.manifold.ambient_dim();
        let parse_err = |line: usize, message: String| CloudIoError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut coords = Vec::with_capacity(meta.n * d);
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| CloudIoError::Io { path: path.to_path_buf(), source })?;
            if lineno == 0 {
                let expected = std::iter::once("i".to_string())
                    .chain((0..d).map(|k| format!("x{k}")))
                    .collect::<Vec<_>>()
                    .join(",");
                if line.trim() != expected {
                    return Err(parse_err(1, format!("expected header `{expected}`")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d + 1 {
                return Err(parse_err(lineno + 1, format!("expected {} fields, found {}", d + 1, fields.len())));
            }
            for f in &fields[1..] {
                let v: T = f
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(lineno + 1, format!("not a number: `{f}`")))?;
                coords.push(v);
            }
        }
        if coords.len() != meta.n * d {
            return Err(parse_err(0, format!("sidecar announces {} points, file has {}", meta.n, coords.len() / d)));
        }
        Ok(Self::new(meta.manifold, meta.seed, coords))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::sample;

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.csv");
        let cloud = sample::<f64>(Manifold::Sphere2, 257, 11);
        cloud.write_csv(&path).unwrap();
        let back = PointCloud::<f64>::read_csv(&path).unwrap();
        assert_eq!(back, cloud);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("i,x0,x1,x2\n"));
        let meta: CloudMeta = serde_json::from_str(&fs::read_to_string(dir.path().join("cloud.json")).unwrap()).unwrap();
        assert_eq!(meta, CloudMeta { manifold: Manifold::Sphere2, n: 257, seed: 11 });
    }

    #[test]
    fn truncated_csv_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        sample::<f64>(Manifold::Circle, 5, 1).write_csv(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut: Vec<&str> = text.lines().take(4).collect();
        fs::write(&path, cut.join("\n")).unwrap();
        assert!(matches!(PointCloud::<f64>::read_csv(&path), Err(CloudIoError::Parse { .. })));
    }
}
