use drh_core::Index;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::SystemTime;
use tokio::sync::RwLock;

/// Cache key: the file's identity at open time. A rebuild at the same path
/// changes length or mtime and misses the cache.
#[derive(Clone, PartialEq, Eq)]
struct FileStamp {
    len: u64,
    mtime: Option<SystemTime>,
}

struct CachedIndex {
    stamp: FileStamp,
    index: Arc<Index>,
}

/// Shared service state: opened indexes, keyed by canonical path.
#[derive(Default)]
pub struct AppState {
    indexes: RwLock<HashMap<PathBuf, CachedIndex>>,
}

impl AppState {
    /// Opens (or reuses) the fully validated index at `path`.
    pub async fn open_index(
        &self,
        path: &Path,
    ) -> std::io::Result<Result<Arc<Index>, drh_core::DrhError>> {
        let canonical = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
        let meta = std::fs::metadata(&canonical)?;
        let stamp = FileStamp {
            len: meta.len(),
            mtime: meta.modified().ok(),
        };
        {
            let cache = self.indexes.read().await;
            if let Some(hit) = cache.get(&canonical) {
                if hit.stamp == stamp {
                    return Ok(Ok(hit.index.clone()));
                }
            }
        }
        let opened = {
            let open_path = canonical.clone();
            tokio::task::spawn_blocking(move || Index::open(&open_path))
                .await
                .expect("index open task panicked")
        };
        match opened {
            Ok(index) => {
                let index = Arc::new(index);
                self.indexes.write().await.insert(
                    canonical,
                    CachedIndex {
                        stamp,
                        index: index.clone(),
                    },
                );
                Ok(Ok(index))
            }
            Err(err) => Ok(Err(err)),
        }
    }
}
