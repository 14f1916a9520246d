use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

/// Content-addressed storage for uploaded avatar images.
#[derive(Debug, Clone)]
pub struct BlobStore {
    dir: PathBuf,
}

impl BlobStore {
    pub fn open(data_dir: impl AsRef<Path>) -> io::Result<Self> {
        let dir = data_dir.as_ref().join("blobs");
        std::fs::create_dir_all(&dir)?;
        Ok(BlobStore { dir })
    }

    /// Stores `bytes` and returns their id, the hex SHA-256 digest.
    pub fn put(&self, bytes: &[u8]) -> io::Result<String> {
        let id = hex::encode(Sha256::digest(bytes));
        let path = self.dir.join(&id);
        if !path.exists() {
            let tmp = self.dir.join(format!("{id}.tmp"));
            std::fs::write(&tmp, bytes)?;
            std::fs::rename(&tmp, &path)?;
        }
        Ok(id)
    }

    pub fn get(&self, id: &str) -> io::Result<Option<Vec<u8>>> {
        if !is_blob_id(id) {
            return Ok(None);
        }
        match std::fs::read(self.dir.join(id)) {
            Ok(bytes) => Ok(Some(bytes)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn contains(&self, id: &str) -> bool {
        is_blob_id(id) && self.dir.join(id).is_file()
    }
}

fn is_blob_id(id: &str) -> bool {
    id.len() == 64 && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}
