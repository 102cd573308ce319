use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use crate::error::StoreError;

/// Namespaced blob storage for profiles, sessions, content and logs.
pub trait Store: Send + Sync {
    fn get(&self, ns: &str, key: &str) -> Result<Option<Vec<u8>>, StoreError>;
    /// Replaces the value atomically.
    fn put(&self, ns: &str, key: &str, value: &[u8]) -> Result<(), StoreError>;
    fn append(&self, ns: &str, key: &str, line: &str) -> Result<(), StoreError>;
    fn list(&self, ns: &str) -> Result<Vec<String>, StoreError>;
}

fn check_key(key: &str) -> Result<(), StoreError> {
    let ok = !key.is_empty()
        && key.split('/').all(|part| !part.is_empty() && part != "." && part != "..")
        && key.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '/' | '@'));
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidKey(key.to_string()))
    }
}

#[derive(Debug, Default)]
pub struct MemStore {
    data: RwLock<BTreeMap<(String, String), Vec<u8>>>,
}

impl MemStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Store for MemStore {
    fn get(&self, ns: &str, key: &str) -> Result<Option<Vec<u8>>, StoreError> {
        check_key(key)?;
        Ok(self.data.read().expect("store lock").get(&(ns.to_string(), key.to_string())).cloned())
    }

    fn put(&self, ns: &str, key: &str, value: &[u8]) -> Result<(), StoreError> {
        check_key(key)?;
        self.data.write().expect("store lock").insert((ns.to_string(), key.to_string()), value.to_vec());
        Ok(())
    }

    fn append(&self, ns: &str, key: &str, line: &str) -> Result<(), StoreError> {
        check_key(key)?;
        let mut data = self.data.write().expect("store lock");
        let entry = data.entry((ns.to_string(), key.to_string())).or_default();
        entry.extend_from_slice(line.as_bytes());
        entry.push(b'\n');
        Ok(())
    }

    fn list(&self, ns: &str) -> Result<Vec<String>, StoreError> {
        Ok(self
            .data
            .read()
            .expect("store lock")
            .keys()
            .filter(|(n, _)| n == ns)
            .map(|(_, k)| k.clone())
            .collect())
    }
}

/// Directory-backed store: `<root>/<ns>/<key>`.
#[derive(Debug, Clone)]
pub struct FsStore {
    root: PathBuf,
}

impl FsStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, ns: &str, key: &str) -> Result<PathBuf, StoreError> {
        check_key(ns)?;
        check_key(key)?;
        Ok(self.root.join(ns).join(key))
    }
}

impl Store for FsStore {
    fn get(&self, ns: &str, key: &str) -> Result<Option<Vec<u8>>, StoreError> {
        let path = self.path(ns, key)?;
        match fs::read(&path) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn put(&self, ns: &str, key: &str, value: &[u8]) -> Result<(), StoreError> {
        let path = self.path(ns, key)?;
        let dir = path.parent().expect("store path has a parent");
        fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(value)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| StoreError::Io(e.error))?;
        Ok(())
    }

    fn append(&self, ns: &str, key: &str, line: &str) -> Result<(), StoreError> {
        let path = self.path(ns, key)?;
        fs::create_dir_all(path.parent().expect("store path has a parent"))?;
        let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
        let mut buf = line.as_bytes().to_vec();
        buf.push(b'\n');
        f.write_all(&buf)?;
        Ok(())
    }

    fn list(&self, ns: &str) -> Result<Vec<String>, StoreError> {
        check_key(ns)?;
        let base = self.root.join(ns);
        let mut out = Vec::new();
        let mut stack = vec![base.clone()];
        while let Some(dir) = stack.pop() {
            let entries = match fs::read_dir(&dir) {
                Ok(e) => e,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(e) => return Err(e.into()),
            };
            for entry in entries {
                let path = entry?.path();
                if path.is_dir() {
                    stack.push(path);
                } else if let Ok(rel) = path.strip_prefix(&base) {
                    let key = rel.to_string_lossy().replace('\\', "/");
                    if !key.starts_with(".tmp") {
                        out.push(key);
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exercise(store: &dyn Store) {
        assert_eq!(store.get("p", "a").unwrap(), None);
        store.put("p", "a", b"one").unwrap();
        store.put("p", "a", b"two").unwrap();
        assert_eq!(store.get("p", "a").unwrap().as_deref(), Some(&b"two"[..]));
        store.put("p", "x/y.json", b"{}").unwrap();
        store.append("log", "l.jsonl", "1").unwrap();
        store.append("log", "l.jsonl", "2").unwrap();
        assert_eq!(store.get("log", "l.jsonl").unwrap().as_deref(), Some(&b"1\n2\n"[..]));
        assert_eq!(store.list("p").unwrap(), vec!["a".to_string(), "x/y.json".to_string()]);
        assert!(store.put("p", "../escape", b"").is_err());
    }

    #[test]
    fn mem_and_fs_agree() {
        exercise(&MemStore::new());
        let dir = tempfile::tempdir().unwrap();
        exercise(&FsStore::open(dir.path()).unwrap());
    }
}
