use serde::Serialize;
use serde_json::{json, Value};

use super::{CountTable, LambdaContext};
use crate::error::Result;

/// Provenance recorded at the top of every table export.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExportHeader {
    pub lambda: String,
    pub precision_bits: u32,
    pub lambda_digest: String,
}

impl ExportHeader {
    pub fn new(ctx: &LambdaContext) -> Self {
        Self {
            lambda: ctx.decimal(30),
            precision_bits: ctx.precision_bits(),
            lambda_digest: ctx.digest(),
        }
    }
}

/// CSV with columns `dim,kind,tag,value`, preceded by `#` comment lines
/// carrying the header.
pub fn tables_to_csv(header: &ExportHeader, tables: &[&CountTable]) -> Result<String> {
    let mut out = format!(
        "# lambda={}\n# precision_bits={}\n# lambda_digest={}\n",
        header.lambda, header.precision_bits, header.lambda_digest
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dim", "kind", "tag", "value"])?;
    for t in tables {
        for (dim, v) in t.iter() {
            w.write_record([
                dim.to_string(),
                t.kind.to_string(),
                v.tag.to_string(),
                v.value.to_string(),
            ])?;
        }
    }
    let body = w.into_inner().map_err(|e| e.into_error())?;
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}

pub fn tables_to_json(header: &ExportHeader, tables: &[&CountTable]) -> Value {
    let rows: Vec<Value> = tables
        .iter()
        .flat_map(|t| {
            t.iter().map(move |(dim, v)| {
                json!({
                    "dim": dim,
                    "kind": t.kind.to_string(),
                    "tag": v.tag,
                    "value": v.value.to_string(),
                })
            })
        })
        .collect();
    json!({ "header": header, "rows": rows })
}
