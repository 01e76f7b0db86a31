//! Content-addressed, persistent response cache: one file per cache key
//! holding the request metadata and the raw response. Safe for concurrent
//! readers; writes go through a temp file and an atomic rename.

use std::path::PathBuf;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::CacheKey;

#[derive(Debug, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model_id: String,
    pub tag: String,
    pub params: String,
    pub prompt: String,
    pub response: String,
}

#[derive(Debug)]
pub struct DiskCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
    // Read-through memory layer; disk stays authoritative for resume.
    hot: Mutex<std::collections::HashMap<String, String>>,
}

impl DiskCache {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            write_lock: Mutex::new(()),
            hot: Mutex::new(std::collections::HashMap::new()),
        })
    }

    fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.digest()))
    }

    /// A hit returns the raw response byte-identical to what was stored.
    pub fn get(&self, key: &CacheKey) -> Option<String> {
        if let Some(hit) = self.hot.lock().expect("cache lock").get(key.digest()) {
            return Some(hit.clone());
        }
        let raw = std::fs::read_to_string(self.path_for(key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&raw).ok()?;
        self.hot
            .lock()
            .expect("cache lock")
            .insert(key.digest().to_string(), entry.response.clone());
        Some(entry.response)
    }

    pub fn put(&self, key: &CacheKey, entry: &CacheEntry) -> std::io::Result<()> {
        {
            let _guard = self.write_lock.lock().expect("cache lock poisoned");
            let final_path = self.path_for(key);
            let tmp_path = final_path.with_extension("tmp");
            std::fs::write(&tmp_path, serde_json::to_string(entry).expect("entry serializes"))?;
            std::fs::rename(&tmp_path, &final_path)?;
        }
        self.hot
            .lock()
            .expect("cache lock")
            .insert(key.digest().to_string(), entry.response.clone());
        Ok(())
    }
}
