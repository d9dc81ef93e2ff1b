use super::InstanceError;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Fc,
    Tr,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            Family::Fc => "fc",
            Family::Tr => "tr",
        })
    }
}

/// One benchmark instance: `param` is ε/u for fc and the service count for tr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub family: Family,
    pub nodes: usize,
    pub param: f64,
    pub seed: u64,
}

impl ManifestRow {
    pub fn id(&self) -> String {
        format!("{}-{}-{}-{}", self.family, self.nodes, self.param, self.seed)
    }
}

/// CSV with header `family,nodes,param,seed`.
pub fn read_manifest(text: &str) -> Result<Vec<ManifestRow>, InstanceError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for r in rdr.deserialize() {
        let row: ManifestRow = r.map_err(|e| InstanceError::Malformed(e.to_string()))?;
        if row.nodes < 2 || row.nodes > 2000 || !row.param.is_finite() {
            return Err(InstanceError::Malformed(format!("row {} out of range", rows.len() + 1)));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_manifest(rows: &[ManifestRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("manifest row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf8")
}
