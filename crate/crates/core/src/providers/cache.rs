//! Content-addressed on-disk cache of raw provider responses.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::corpus::Language;
use crate::error::{Error, Result};

pub const CACHE_DIR_ENV: &str = "VERIDICT_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub kind: String,
    pub language: Language,
    pub response: String,
    pub created_at: u64,
}

#[derive(Debug, Clone)]
pub struct ResponseCache {
    root: PathBuf,
}

impl ResponseCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ResponseCache { root: root.into() }
    }

    /// Cache rooted at `$VERIDICT_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_DIR_ENV).map(ResponseCache::new)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Stable key over (kind, language, canonical payload).
    pub fn key(kind: &str, language: Language, payload: &Value) -> String {
        let mut h = Sha256::new();
        h.update(kind.as_bytes());
        h.update(b"\n");
        h.update(language.code().as_bytes());
        h.update(b"\n");
        h.update(canonical_json(payload).as_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, kind: &str, key: &str) -> PathBuf {
        self.root.join(kind).join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, kind: &str, key: &str) -> Result<Option<CacheEntry>> {
        let path = self.path(kind, key);
        match std::fs::read_to_string(&path) {
            Ok(text) => {
                let entry: CacheEntry = serde_json::from_str(&text).map_err(|e| Error::Malformed {
                    location: path.display().to_string(),
                    message: e.to_string(),
                })?;
                Ok(Some(entry))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Write via a temp file and rename, so readers never see partial entries.
    pub fn put(&self, kind: &str, key: &str, language: Language, response: &str) -> Result<()> {
        let path = self.path(kind, key);
        let dir = path.parent().expect("cache path has a parent");
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let entry = CacheEntry {
            key: key.to_string(),
            kind: kind.to_string(),
            language,
            response: response.to_string(),
            created_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let tmp = dir.join(format!(
            ".{key}.{}.{:?}.tmp",
            std::process::id(),
            std::thread::current().id()
        ));
        let mut file = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        file.write_all(&serde_json::to_vec(&entry)?)
            .and_then(|_| file.sync_all())
            .map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}

/// JSON with object keys sorted recursively and no insignificant whitespace.
pub fn canonical_json(value: &Value) -> String {
    fn write(value: &Value, out: &mut String) {
        match value {
            Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                out.push('{');
                for (i, k) in keys.into_iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&Value::String(k.clone()).to_string());
                    out.push(':');
                    write(&map[k], out);
                }
                out.push('}');
            }
            Value::Array(items) => {
                out.push('[');
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write(v, out);
                }
                out.push(']');
            }
            other => out.push_str(&other.to_string()),
        }
    }
    let mut out = String::new();
    write(value, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_ignores_field_order() {
        let a = json!({"b": 1, "a": [1, {"y": 2, "x": 1}]});
        let b: Value = serde_json::from_str(r#"{"a":[1,{"x":1,"y":2}],"b":1}"#).unwrap();
        assert_eq!(
            ResponseCache::key("embed", Language::En, &a),
            ResponseCache::key("embed", Language::En, &b)
        );
        assert_ne!(
            ResponseCache::key("embed", Language::En, &a),
            ResponseCache::key("embed", Language::De, &a)
        );
        assert_eq!(canonical_json(&a), r#"{"a":[1,{"x":1,"y":2}],"b":1}"#);
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::new(dir.path());
        let key = ResponseCache::key("chat", Language::Fr, &json!({"q": "x"}));
        assert!(cache.get("chat", &key).unwrap().is_none());
        cache.put("chat", &key, Language::Fr, "Oui.").unwrap();
        let entry = cache.get("chat", &key).unwrap().unwrap();
        assert_eq!(entry.response, "Oui.");
        assert_eq!(entry.language, Language::Fr);
        let leftovers: Vec<_> = walk(dir.path())
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e == "tmp"))
            .collect();
        assert!(leftovers.is_empty());
    }

    fn walk(dir: &Path) -> Vec<PathBuf> {
        let mut out = Vec::new();
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                out.extend(walk(&p));
            } else {
                out.push(p);
            }
        }
        out
    }
}
