//! JSON plant files.
//!
//! A plant file is an object with `"partitions": {"n": [n1, n2], "m": [..],
//! "k": [..]}` and the matrices `A`, `B1`, `B2`, `C1`, `C2`, `D12`, `D21` as
//! row-major nested arrays. `D11` and `D22` may be present but must be zero.
//! Floats are written with 17 significant digits so files round-trip exactly.

use serde_json::value::RawValue;
use serde_json::Value;

use super::{Partition, TwoPlayerPlant};
use crate::linalg::Mat;
use crate::{Error, Result};

const MATRIX_KEYS: [&str; 7] = ["A", "B1", "B2", "C1", "C2", "D12", "D21"];

/// Row-major nested-array rendering with `{:.16e}` entries.
pub fn matrix_to_json(m: &Mat) -> Box<RawValue> {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cols: Vec<String> = (0..m.ncols())
                .map(|j| format!("{:.16e}", m[(i, j)]))
                .collect();
            format!("[{}]", cols.join(","))
        })
        .collect();
    RawValue::from_string(format!("[{}]", rows.join(","))).expect("well-formed JSON array")
}

/// Parse a row-major nested array. `[]` is the empty matrix.
pub fn matrix_from_json(v: &Value, key: &str) -> Result<Mat> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Format(format!("{key}: expected an array of rows")))?;
    if rows.is_empty() {
        return Ok(Mat::zeros(0, 0));
    }
    let mut data = Vec::new();
    let mut width = None;
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Format(format!("{key}: row {i} is not an array")))?;
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(Error::Format(format!(
                "{key}: row {i} has {} entries, expected {}",
                row.len(),
                width.unwrap()
            )));
        }
        for (j, x) in row.iter().enumerate() {
            let x = x
                .as_f64()
                .ok_or_else(|| Error::Format(format!("{key}: entry ({i},{j}) is not a number")))?;
            data.push(x);
        }
    }
    Ok(Mat::from_row_slice(rows.len(), width.unwrap_or(0), &data))
}

fn split(v: &Value, key: &str) -> Result<[usize; 2]> {
    let arr = v
        .get(key)
        .and_then(Value::as_array)
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::Format(format!("partitions.{key}: expected a pair of counts")))?;
    let mut out = [0; 2];
    for (o, x) in out.iter_mut().zip(arr) {
        *o = x.as_u64().ok_or_else(|| {
            Error::Format(format!(
                "partitions.{key}: counts must be nonnegative integers"
            ))
        })? as usize;
    }
    Ok(out)
}

pub fn plant_from_json(text: &str) -> Result<TwoPlayerPlant> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("not valid JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Format("top level must be an object".into()))?;
    let parts = obj
        .get("partitions")
        .ok_or_else(|| Error::Format("missing key \"partitions\"".into()))?;
    let partition = Partition::new(split(parts, "n")?, split(parts, "m")?, split(parts, "k")?)?;

    let mut mats = Vec::with_capacity(MATRIX_KEYS.len());
    for key in MATRIX_KEYS {
        let v = obj
            .get(key)
            .ok_or_else(|| Error::Format(format!("missing key \"{key}\"")))?;
        mats.push(matrix_from_json(v, key)?);
    }
    for key in ["D11", "D22"] {
        if let Some(v) = obj.get(key) {
            let d = matrix_from_json(v, key)?;
            if d.iter().any(|&x| x != 0.0) {
                return Err(Error::Format(format!(
                    "{key} must be zero (P11 and P22 are strictly proper)"
                )));
            }
        }
    }
    let [a, b1, b2, c1, c2, d12, d21]: [Mat; 7] = mats.try_into().expect("seven matrices");
    TwoPlayerPlant::new(a, b1, b2, c1, c2, d12, d21, partition)
}

pub fn plant_to_json(p: &TwoPlayerPlant) -> String {
    let part = &p.partition;
    let mut out = format!(
        "{{\n  \"partitions\": {{\"n\": [{}, {}], \"m\": [{}, {}], \"k\": [{}, {}]}}",
        part.n[0], part.n[1], part.m[0], part.m[1], part.k[0], part.k[1]
    );
    for (key, m) in MATRIX_KEYS
        .iter()
        .zip([&p.a, &p.b1, &p.b2, &p.c1, &p.c2, &p.d12, &p.d21])
    {
        out.push_str(&format!(",\n  \"{key}\": {}", matrix_to_json(m).get()));
    }
    out.push_str("\n}\n");
    out
}
