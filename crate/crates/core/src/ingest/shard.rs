use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::record::{parse_entity_line, to_dump_json, EntityRecord, LineError, DEFAULT_LANGUAGE_CHAIN};
use crate::error::{Error, Result};

const READ_BUFFER: usize = 1 << 20;

/// Counters for one pass over a shard.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardStats {
    pub lines: u64,
    pub records: u64,
    pub skipped: u64,
}

impl ShardStats {
    pub fn merge(&mut self, other: &ShardStats) {
        self.lines += other.lines;
        self.records += other.records;
        self.skipped += other.skipped;
    }
}

struct CountingReader<R> {
    inner: R,
    count: Arc<AtomicU64>,
}

impl<R: Read> Read for CountingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.count.fetch_add(n as u64, Ordering::Relaxed);
        Ok(n)
    }
}

/// Streaming reader over one shard: Zstandard-compressed JSON Lines when the
/// file name ends in `.zst`, plain JSON Lines otherwise.
///
/// Memory use is bounded by the longest line. Lines that fail to parse are
/// counted in [`ShardStats::skipped`] and skipped; decompression and I/O
/// failures end the stream with an error.
pub struct ShardReader {
    path: PathBuf,
    reader: Box<dyn BufRead + Send>,
    compressed_offset: Arc<AtomicU64>,
    line: Vec<u8>,
    stats: ShardStats,
    languages: Option<Vec<String>>,
    failed: bool,
}

impl ShardReader {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path).map_err(Error::io(&path))?;
        let count = Arc::new(AtomicU64::new(0));
        let counting = CountingReader { inner: file, count: Arc::clone(&count) };
        let reader: Box<dyn BufRead + Send> = if is_zstd(&path) {
            let decoder = zstd::Decoder::new(counting).map_err(Error::io(&path))?;
            Box::new(BufReader::with_capacity(READ_BUFFER, decoder))
        } else {
            Box::new(BufReader::with_capacity(READ_BUFFER, counting))
        };
        Ok(ShardReader {
            path,
            reader,
            compressed_offset: count,
            line: Vec::new(),
            stats: ShardStats::default(),
            languages: Some(DEFAULT_LANGUAGE_CHAIN.iter().map(|s| s.to_string()).collect()),
            failed: false,
        })
    }

    /// Restrict retained label/description languages (`None` keeps all).
    pub fn languages(mut self, keep: Option<Vec<String>>) -> Self {
        self.languages = keep;
        self
    }

    pub fn stats(&self) -> ShardStats {
        self.stats
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn read_error(&self, e: io::Error) -> Error {
        match e.kind() {
            io::ErrorKind::InvalidData | io::ErrorKind::Other | io::ErrorKind::UnexpectedEof => Error::CorruptShard {
                path: self.path.clone(),
                offset: self.compressed_offset.load(Ordering::Relaxed),
                message: e.to_string(),
            },
            _ => Error::Io { path: self.path.clone(), source: e },
        }
    }
}

impl Iterator for ShardReader {
    type Item = Result<EntityRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.line.clear();
            match self.reader.read_until(b'\n', &mut self.line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(self.read_error(e)));
                }
            }
            let Ok(text) = std::str::from_utf8(&self.line) else {
                self.stats.lines += 1;
                self.stats.skipped += 1;
                continue;
            };
            let text = text.trim();
            // The full dump wraps entities in a JSON array with trailing commas.
            let text = text.strip_suffix(',').unwrap_or(text);
            if text.is_empty() || text == "[" || text == "]" {
                continue;
            }
            self.stats.lines += 1;
            match parse_entity_line(text, self.languages.as_deref()) {
                Ok(r) => {
                    self.stats.records += 1;
                    return Some(Ok(r));
                }
                Err(LineError::Json | LineError::BadId) => self.stats.skipped += 1,
            }
        }
    }
}

fn is_zstd(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "zst")
}

/// Open a shard for streaming.
pub fn stream_shard(path: impl AsRef<Path>) -> Result<ShardReader> {
    ShardReader::open(path)
}

/// Drain a shard into memory, returning records and counters.
pub fn read_shard(path: impl AsRef<Path>) -> Result<(Vec<EntityRecord>, ShardStats)> {
    let mut reader = ShardReader::open(path)?;
    let mut out = Vec::new();
    for r in reader.by_ref() {
        out.push(r?);
    }
    Ok((out, reader.stats()))
}

/// Write records as a shard in dump layout, compressed when `path` ends in
/// `.zst`.
pub fn write_shard<'a>(path: impl AsRef<Path>, records: impl IntoIterator<Item = &'a EntityRecord>) -> Result<()> {
    let lines = records.into_iter().map(to_dump_json);
    write_shard_lines(path, lines)
}

/// Write raw lines as a shard. Used to build fixtures with malformed lines.
pub fn write_shard_lines<S: AsRef<str>>(path: impl AsRef<Path>, lines: impl IntoIterator<Item = S>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(Error::io(path))?;
    let mut sink: Box<dyn Write> = if is_zstd(path) {
        Box::new(zstd::Encoder::new(file, 3).map_err(Error::io(path))?.auto_finish())
    } else {
        Box::new(io::BufWriter::new(file))
    };
    for l in lines {
        sink.write_all(l.as_ref().as_bytes()).map_err(Error::io(path))?;
        sink.write_all(b"\n").map_err(Error::io(path))?;
    }
    sink.flush().map_err(Error::io(path))?;
    Ok(())
}

/// Sorted list of shard files (`*.jsonl`, `*.jsonl.zst`, `*.json.zst`) in `dir`.
pub fn list_shards(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(Error::io(dir))? {
        let path = entry.map_err(Error::io(dir))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.ends_with(".jsonl") || name.ends_with(".jsonl.zst") || name.ends_with(".json.zst") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
