//! Text and binary file formats.
//!
//! * collection: one item id per line, optionally followed by
//!   `\t<class_id>` and `\t<camera_id>`;
//! * ranked lists: `<query_id>: <id_1> <id_2> ... <id_L>` per line, LF endings;
//! * distances: magic `HRSFDM01`, `u32` LE size N, then N×N `f32` LE row-major.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rank::{Collection, DistanceMatrix, RankedList, RankerOutput};

pub const DISTANCE_MAGIC: &[u8; 8] = b"HRSFDM01";

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn parse_collection(text: &str) -> Result<Collection> {
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut cameras = Vec::new();
    let mut columns = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() > 3 {
            return Err(Error::Format(format!(
                "collection line {}: expected at most 3 tab-separated columns",
                lineno + 1
            )));
        }
        match columns {
            None => columns = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(Error::Format(format!(
                    "collection line {}: {} columns, previous lines have {c}",
                    lineno + 1,
                    fields.len()
                )))
            }
            _ => {}
        }
        ids.push(fields[0].to_string());
        if let Some(label) = fields.get(1) {
            labels.push(label.to_string());
        }
        if let Some(cam) = fields.get(2) {
            let cam = cam.trim().parse::<u32>().map_err(|_| {
                Error::Format(format!(
                    "collection line {}: camera id {cam:?} is not an integer",
                    lineno + 1
                ))
            })?;
            cameras.push(cam);
        }
    }
    let mut collection = Collection::new(ids)?;
    if !labels.is_empty() {
        collection = collection.with_labels(&labels)?;
    }
    if !cameras.is_empty() {
        collection = collection.with_cameras(cameras)?;
    }
    Ok(collection)
}

pub fn load_collection(path: impl AsRef<Path>) -> Result<Collection> {
    parse_collection(&read_to_string(path.as_ref())?)
}

pub fn format_collection(collection: &Collection) -> String {
    let mut out = String::new();
    for i in 0..collection.len() {
        out.push_str(collection.id(i));
        if let Some(labels) = collection.labels() {
            out.push('\t');
            out.push_str(collection.class_name(labels[i]));
            if let Some(cams) = collection.cameras() {
                out.push('\t');
                out.push_str(&cams[i].to_string());
            }
        }
        out.push('\n');
    }
    out
}

pub fn save_collection(collection: &Collection, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), format_collection(collection).as_bytes())
}

/// Parse ranked lists for every item of `collection`. Lines may come in any
/// order but each query must appear exactly once. A query not at the head of
/// its own list is moved there.
pub fn parse_ranked_lists(
    ranker_id: &str,
    text: &str,
    collection: &Collection,
) -> Result<RankerOutput> {
    let n = collection.len();
    let mut lists: Vec<Option<RankedList>> = vec![None; n];
    let mut depth = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let (query, rest) = line.split_once(':').ok_or_else(|| {
            Error::Format(format!("{ranker_id} line {lineno}: missing `:` after query id"))
        })?;
        let resolve = |id: &str| {
            collection.index_of(id).ok_or_else(|| {
                Error::Format(format!("{ranker_id} line {lineno}: unknown item id {id:?}"))
            })
        };
        let q = resolve(query.trim())?;
        let positions = rest
            .split_whitespace()
            .map(resolve)
            .collect::<Result<Vec<_>>>()?;
        match depth {
            None => depth = Some(positions.len()),
            Some(d) if d != positions.len() => {
                return Err(Error::Format(format!(
                    "{ranker_id} line {lineno}: inconsistent depths ({} vs {d})",
                    positions.len()
                )))
            }
            _ => {}
        }
        let list = RankedList::new(q, positions).map(RankedList::with_self_first).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{ranker_id} line {lineno}: {msg}")),
            other => other,
        })?;
        if lists[q].replace(list).is_some() {
            return Err(Error::Format(format!(
                "{ranker_id} line {lineno}: query {:?} listed twice",
                query.trim()
            )));
        }
    }
    let lists = lists
        .into_iter()
        .enumerate()
        .map(|(q, l)| {
            l.ok_or_else(|| {
                Error::Format(format!(
                    "{ranker_id}: no ranked list for query {:?}",
                    collection.id(q)
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RankerOutput::new(ranker_id, n, lists)
}

/// Load a ranked-list file; the ranker id is the file stem.
pub fn load_ranked_lists(path: impl AsRef<Path>, collection: &Collection) -> Result<RankerOutput> {
    let path = path.as_ref();
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "ranker".to_string());
    parse_ranked_lists(&id, &read_to_string(path)?, collection)
}

pub fn format_ranked_lists(ranker: &RankerOutput, collection: &Collection) -> String {
    let mut out = String::new();
    for list in ranker.lists() {
        out.push_str(collection.id(list.query()));
        out.push(':');
        for &item in list.positions() {
            out.push(' ');
            out.push_str(collection.id(item));
        }
        out.push('\n');
    }
    out
}

pub fn save_ranked_lists(
    ranker: &RankerOutput,
    collection: &Collection,
    path: impl AsRef<Path>,
) -> Result<()> {
    if ranker.size() != collection.len() {
        return Err(Error::Mismatch(format!(
            "ranker {} has {} queries, collection has {} items",
            ranker.id(),
            ranker.size(),
            collection.len()
        )));
    }
    write_bytes(path.as_ref(), format_ranked_lists(ranker, collection).as_bytes())
}

pub fn encode_distances(d: &DistanceMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * d.values().len());
    out.extend_from_slice(DISTANCE_MAGIC);
    out.extend_from_slice(&(d.size() as u32).to_le_bytes());
    for v in d.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_distances(bytes: &[u8]) -> Result<DistanceMatrix> {
    if bytes.len() < 12 || &bytes[..8] != DISTANCE_MAGIC {
        return Err(Error::Format("missing HRSFDM01 header".to_string()));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() != n * n * 4 {
        return Err(Error::Format(format!(
            "distance matrix of size {n} needs {} payload bytes, found {}",
            n * n * 4,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DistanceMatrix::new(n, values)
}

pub fn load_distances(path: impl AsRef<Path>) -> Result<DistanceMatrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_distances(&bytes)
}

pub fn save_distances(d: &DistanceMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_distances(d))
}
