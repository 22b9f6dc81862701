//! On-disk matrix cache: one `thc-matrix/1` file per (tile hash, k).

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::SystemTime;

use thc_core::io::{load_matrix, matrix_to_string};
use thc_core::{build_transfer_matrix, BlockTransferMatrix, Error, MatrixProvider, Result, Tile};

/// A matrix file found in the cache directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheEntry {
    pub tile_hash: String,
    pub k: usize,
    pub path: PathBuf,
    pub created: Option<SystemTime>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
}

pub struct MatrixCache {
    dir: PathBuf,
    loaded: Mutex<HashMap<(String, usize), Arc<BlockTransferMatrix>>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl MatrixCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
        Ok(MatrixCache {
            dir,
            loaded: Mutex::new(HashMap::new()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, tile_hash: &str, k: usize) -> PathBuf {
        self.dir.join(format!("{tile_hash}-k{k}.json"))
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats { hits: self.hits.load(Ordering::Relaxed), misses: self.misses.load(Ordering::Relaxed) }
    }

    /// Every well-named matrix file in the directory, sorted by path.
    pub fn entries(&self) -> Result<Vec<CacheEntry>> {
        let read = fs::read_dir(&self.dir).map_err(|source| Error::Io { path: self.dir.clone(), source })?;
        let mut out = Vec::new();
        for item in read.flatten() {
            let path = item.path();
            let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let Some((hash, k)) = stem.rsplit_once("-k") else { continue };
            let Ok(k) = k.parse() else { continue };
            out.push(CacheEntry {
                tile_hash: hash.to_string(),
                k,
                created: item.metadata().ok().and_then(|m| m.created().or_else(|_| m.modified()).ok()),
                path,
            });
        }
        out.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(out)
    }

    /// Load a stored matrix, checking it belongs to `tile` and `k`.
    fn load(&self, tile: &Tile, hash: &str, k: usize, path: &Path) -> Result<BlockTransferMatrix> {
        let (stored_hash, m) = load_matrix(path)?;
        let bad =
            |reason: String| Error::Format { what: format!("cached matrix {}", path.display()), reason };
        if stored_hash != hash {
            return Err(bad(format!("tile hash {stored_hash}, expected {hash}")));
        }
        if (m.k(), m.left_wall(), m.right_wall()) != (k, tile.left_size(), tile.right_size()) {
            return Err(bad(format!(
                "k = {} with walls ({}, {}), expected k = {k} with walls ({}, {})",
                m.k(),
                m.left_wall(),
                m.right_wall(),
                tile.left_size(),
                tile.right_size()
            )));
        }
        Ok(m)
    }

    fn store(&self, m: &BlockTransferMatrix, hash: &str, path: &Path) -> Result<()> {
        // write then rename, so a concurrent reader never sees half a file
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, matrix_to_string(m, hash))
            .map_err(|source| Error::Io { path: tmp.clone(), source })?;
        fs::rename(&tmp, path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
    }
}

impl MatrixProvider for MatrixCache {
    fn matrix(&self, tile: &Tile, k: usize) -> Result<Arc<BlockTransferMatrix>> {
        let hash = tile.canonical_hash();
        let key = (hash.clone(), k);
        if let Some(m) = self.loaded.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(m));
        }
        let path = self.path_for(&hash, k);
        let m = if path.exists() {
            self.hits.fetch_add(1, Ordering::Relaxed);
            self.load(tile, &hash, k, &path)?
        } else {
            self.misses.fetch_add(1, Ordering::Relaxed);
            let m = build_transfer_matrix(tile, k)?;
            self.store(&m, &hash, &path)?;
            m
        };
        let m = Arc::new(m);
        self.loaded.lock().expect("cache lock").insert(key, Arc::clone(&m));
        Ok(m)
    }
}
