//! Directory snapshots: `manifest.json`, `documents.jsonl`, `vectors.bin`
//! and `docids.txt`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Catalog, CatalogDocument, CatalogError, EMBEDDING_DIM};

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

const MANIFEST: &str = "manifest.json";
const DOCUMENTS: &str = "documents.jsonl";
const VECTORS: &str = "vectors.bin";
const DOCIDS: &str = "docids.txt";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    document_count: usize,
    dimensions: usize,
    /// Hex SHA-256 of each data file.
    checksums: BTreeMap<String, String>,
}

fn io(path: &Path, e: std::io::Error) -> CatalogError {
    CatalogError::Io(format!("{}: {e}", path.display()))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `catalog` into directory `dir`, creating it if needed. Output is
/// byte-identical for equal catalogs.
pub fn save_snapshot(catalog: &Catalog, dir: impl AsRef<Path>) -> Result<(), CatalogError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;

    let mut documents = Vec::new();
    let mut vectors = Vec::with_capacity(catalog.len() * EMBEDDING_DIM * 4);
    let mut docids = String::new();
    for doc in catalog.documents() {
        serde_json::to_writer(&mut documents, doc).map_err(|e| CatalogError::Io(e.to_string()))?;
        documents.push(b'\n');
        for x in catalog.vector(&doc.id).expect("indexed document has a vector") {
            vectors.extend_from_slice(&x.to_le_bytes());
        }
        docids.push_str(&doc.id);
        docids.push('\n');
    }

    let files: [(&str, &[u8]); 3] = [(DOCUMENTS, &documents), (VECTORS, &vectors), (DOCIDS, docids.as_bytes())];
    let manifest = Manifest {
        format_version: SNAPSHOT_FORMAT_VERSION,
        document_count: catalog.len(),
        dimensions: EMBEDDING_DIM,
        checksums: files.iter().map(|(name, bytes)| (name.to_string(), sha256_hex(bytes))).collect(),
    };
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
    }
    let mut json = serde_json::to_vec_pretty(&manifest).map_err(|e| CatalogError::Io(e.to_string()))?;
    json.push(b'\n');
    let path = dir.join(MANIFEST);
    fs::write(&path, json).map_err(|e| io(&path, e))
}

/// Reads a snapshot written by [`save_snapshot`], verifying checksums and
/// consistency between the files.
pub fn load_snapshot(dir: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let dir = dir.as_ref();
    let corrupt = |m: String| CatalogError::CorruptSnapshot(m);
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read(&path).map_err(|e| io(&path, e))
    };

    let manifest_bytes = read(MANIFEST)?;
    let value: serde_json::Value =
        serde_json::from_slice(&manifest_bytes).map_err(|e| corrupt(format!("manifest: {e}")))?;
    let found = value.get("format_version").and_then(|v| v.as_u64()).ok_or_else(|| corrupt("manifest has no format_version".into()))?;
    if found != u64::from(SNAPSHOT_FORMAT_VERSION) {
        return Err(CatalogError::VersionMismatch { found: found as u32, expected: SNAPSHOT_FORMAT_VERSION });
    }
    let manifest: Manifest = serde_json::from_value(value).map_err(|e| corrupt(format!("manifest: {e}")))?;
    if manifest.dimensions != EMBEDDING_DIM {
        return Err(corrupt(format!("vectors have {} dimensions", manifest.dimensions)));
    }

    let mut data = BTreeMap::new();
    for name in [DOCUMENTS, VECTORS, DOCIDS] {
        let bytes = read(name)?;
        let expected = manifest.checksums.get(name).ok_or_else(|| corrupt(format!("no checksum for {name}")))?;
        if sha256_hex(&bytes) != *expected {
            return Err(corrupt(format!("{name} does not match its checksum")));
        }
        data.insert(name, bytes);
    }

    let documents = std::str::from_utf8(&data[DOCUMENTS]).map_err(|_| corrupt(format!("{DOCUMENTS} is not UTF-8")))?;
    let docs: Vec<CatalogDocument> = documents
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| corrupt(format!("{DOCUMENTS}: {e}"))))
        .collect::<Result<_, _>>()?;
    let ids = std::str::from_utf8(&data[DOCIDS]).map_err(|_| corrupt(format!("{DOCIDS} is not UTF-8")))?;
    let ids: Vec<&str> = ids.lines().collect();
    if docs.len() != manifest.document_count || ids.len() != docs.len() {
        return Err(corrupt("document counts disagree".into()));
    }
    if docs.iter().zip(&ids).any(|(d, id)| d.id != *id) {
        return Err(corrupt(format!("{DOCIDS} does not match {DOCUMENTS}")));
    }
    let vectors = &data[VECTORS];
    if vectors.len() != docs.len() * EMBEDDING_DIM * 4 {
        return Err(corrupt(format!("{VECTORS} has the wrong length")));
    }

    let mut catalog = Catalog::new();
    for (doc, chunk) in docs.into_iter().zip(vectors.chunks_exact(EMBEDDING_DIM * 4)) {
        doc.validate()?;
        let vector = chunk.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
        catalog.insert(doc, vector);
    }
    Ok(catalog)
}
