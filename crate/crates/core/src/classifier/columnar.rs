//! Parquet layout of classified output, one file per shard.
//!
//! | column | type | |
//! |---|---|---|
//! | `id` | utf8 | entity id |
//! | `label` | utf8, nullable | |
//! | `description` | utf8, nullable | |
//! | `category` | utf8, nullable | null when unclassified |
//! | `intrinsic_modules` | list&lt;utf8&gt; | declaration order |
//! | `relational_modules` | list&lt;utf8&gt; | declaration order |
//! | `core_claims` | utf8 | JSON array of routed claims |
//! | `intrinsic_claims` | utf8 | JSON array |
//! | `relational_claims` | utf8 | JSON array |
//! | `unclaimed_claims` | utf8 | JSON array |
//! | `sentences` | list&lt;utf8&gt; | one per claim, bucket order |
//! | `label_misses` | uint32 | unresolved ids while rendering |
//! | `shard` | uint32 | input shard index |

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use arrow_array::builder::{ListBuilder, StringBuilder, UInt32Builder};
use arrow_array::cast::AsArray;
use arrow_array::types::UInt32Type;
use arrow_array::{Array, ArrayRef, RecordBatch};
use arrow_schema::{DataType, Field, Schema, SchemaRef};
use parquet::arrow::arrow_reader::ParquetRecordBatchReaderBuilder;
use parquet::arrow::ArrowWriter;
use parquet::basic::{Compression, ZstdLevel};
use parquet::file::properties::WriterProperties;

use super::engine::{Buckets, ClassifiedRecord, RoutedClaim};
use crate::error::{Error, Result};

const BATCH_ROWS: usize = 4096;

const BUCKET_COLUMNS: [&str; 4] = ["core_claims", "intrinsic_claims", "relational_claims", "unclaimed_claims"];

pub fn arrow_schema() -> SchemaRef {
    let list = || DataType::List(Arc::new(Field::new("item", DataType::Utf8, true)));
    let mut fields = vec![
        Field::new("id", DataType::Utf8, false),
        Field::new("label", DataType::Utf8, true),
        Field::new("description", DataType::Utf8, true),
        Field::new("category", DataType::Utf8, true),
        Field::new("intrinsic_modules", list(), false),
        Field::new("relational_modules", list(), false),
    ];
    fields.extend(BUCKET_COLUMNS.iter().map(|c| Field::new(*c, DataType::Utf8, false)));
    fields.push(Field::new("sentences", list(), false));
    fields.push(Field::new("label_misses", DataType::UInt32, false));
    fields.push(Field::new("shard", DataType::UInt32, false));
    Arc::new(Schema::new(fields))
}

/// File name for shard `index` inside a classified output directory.
pub fn part_name(index: usize) -> String {
    format!("part-{index:05}.parquet")
}

fn to_batch(rows: &[ClassifiedRecord]) -> Result<RecordBatch> {
    let mut id = StringBuilder::new();
    let mut label = StringBuilder::new();
    let mut description = StringBuilder::new();
    let mut category = StringBuilder::new();
    let mut intrinsic = ListBuilder::new(StringBuilder::new());
    let mut relational = ListBuilder::new(StringBuilder::new());
    let mut bucket_cols: Vec<StringBuilder> = (0..4).map(|_| StringBuilder::new()).collect();
    let mut sentences = ListBuilder::new(StringBuilder::new());
    let mut misses = UInt32Builder::new();
    let mut shard = UInt32Builder::new();
    for r in rows {
        id.append_value(r.id.to_string());
        label.append_option(r.label.as_deref());
        description.append_option(r.description.as_deref());
        category.append_option(r.category.as_deref());
        for m in &r.intrinsic_modules {
            intrinsic.values().append_value(m);
        }
        intrinsic.append(true);
        for m in &r.relational_modules {
            relational.values().append_value(m);
        }
        relational.append(true);
        let b = &r.buckets;
        for (col, claims) in bucket_cols.iter_mut().zip([&b.core, &b.intrinsic, &b.relational, &b.unclaimed]) {
            col.append_value(serde_json::to_string(claims)?);
        }
        for s in r.sentences() {
            sentences.values().append_value(s);
        }
        sentences.append(true);
        misses.append_value(r.label_misses);
        shard.append_value(r.shard);
    }
    let mut cols: Vec<ArrayRef> = vec![
        Arc::new(id.finish()),
        Arc::new(label.finish()),
        Arc::new(description.finish()),
        Arc::new(category.finish()),
        Arc::new(intrinsic.finish()),
        Arc::new(relational.finish()),
    ];
    cols.extend(bucket_cols.iter_mut().map(|c| Arc::new(c.finish()) as ArrayRef));
    cols.push(Arc::new(sentences.finish()));
    cols.push(Arc::new(misses.finish()));
    cols.push(Arc::new(shard.finish()));
    Ok(RecordBatch::try_new(arrow_schema(), cols)?)
}

pub fn write_classified(path: impl AsRef<Path>, rows: &[ClassifiedRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(Error::io(path))?;
    let props = WriterProperties::builder()
        .set_compression(Compression::ZSTD(ZstdLevel::default()))
        .build();
    let mut w = ArrowWriter::try_new(file, arrow_schema(), Some(props))?;
    for chunk in rows.chunks(BATCH_ROWS) {
        w.write(&to_batch(chunk)?)?;
    }
    w.close()?;
    Ok(())
}

fn strings(col: &dyn Array) -> Vec<String> {
    let a = col.as_string::<i32>();
    (0..a.len()).filter(|&i| a.is_valid(i)).map(|i| a.value(i).to_string()).collect()
}

pub fn read_classified(path: impl AsRef<Path>) -> Result<Vec<ClassifiedRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(Error::io(path))?;
    let reader = ParquetRecordBatchReaderBuilder::try_new(file)?.build()?;
    let mut out = Vec::new();
    for batch in reader {
        let batch = batch?;
        let col = |name: &str| {
            batch
                .column_by_name(name)
                .ok_or_else(|| Error::Columnar(format!("{}: missing column {name}", path.display())))
        };
        let id = col("id")?.as_string::<i32>();
        let label = col("label")?.as_string::<i32>();
        let description = col("description")?.as_string::<i32>();
        let category = col("category")?.as_string::<i32>();
        let intrinsic = col("intrinsic_modules")?.as_list::<i32>();
        let relational = col("relational_modules")?.as_list::<i32>();
        let buckets: Vec<_> = BUCKET_COLUMNS
            .iter()
            .map(|c| col(c).map(|a| a.as_string::<i32>().clone()))
            .collect::<Result<_>>()?;
        let misses = col("label_misses")?.as_primitive::<UInt32Type>();
        let shard = col("shard")?.as_primitive::<UInt32Type>();
        let opt = |a: &arrow_array::StringArray, i: usize| a.is_valid(i).then(|| a.value(i).to_string());
        for i in 0..batch.num_rows() {
            let parse = |k: usize| -> Result<Vec<RoutedClaim>> { Ok(serde_json::from_str(buckets[k].value(i))?) };
            out.push(ClassifiedRecord {
                id: id.value(i).parse()?,
                label: opt(label, i),
                description: opt(description, i),
                category: opt(category, i),
                intrinsic_modules: strings(intrinsic.value(i).as_ref()),
                relational_modules: strings(relational.value(i).as_ref()),
                buckets: Buckets { core: parse(0)?, intrinsic: parse(1)?, relational: parse(2)?, unclaimed: parse(3)? },
                label_misses: misses.value(i),
                shard: shard.value(i),
            });
        }
    }
    Ok(out)
}

/// Part files in a classified output directory, in shard order.
pub fn list_parts(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut parts: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(Error::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "parquet"))
        .collect();
    parts.sort();
    Ok(parts)
}

/// Every record in a classified output directory, in shard then row order.
pub fn read_classified_dir(dir: impl AsRef<Path>) -> Result<Vec<ClassifiedRecord>> {
    let mut out = Vec::new();
    for p in list_parts(dir)? {
        out.extend(read_classified(p)?);
    }
    Ok(out)
}
