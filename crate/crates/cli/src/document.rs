//! Input documents. All indices are 1-based and every field is mandatory.

use mroot::volume::Axis;
use mroot::{JacobianF64, MetricFieldF64, MultiIndex, SymTensorF64};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub index: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorDocument {
    pub dim: usize,
    pub rank: usize,
    pub components: Vec<Component>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisDocument {
    pub min: f64,
    pub max: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDocument {
    pub dim: usize,
    pub rank: usize,
    #[serde(rename = "box")]
    pub axes: Vec<AxisDocument>,
    /// Component lists, one per lattice node, last axis fastest.
    pub nodes: Vec<Vec<Component>>,
}

/// `rows[j][i] = dx^j / dx'^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobianDocument {
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse<'a, D: Deserialize<'a>>(bytes: &'a [u8]) -> Result<D, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::schema(format!("malformed document: {e}")))
}

fn build(dim: usize, rank: usize, components: &[Component]) -> Result<SymTensorF64, CliError> {
    let entries = components
        .iter()
        .map(|c| Ok((MultiIndex::with_rank(c.index.clone(), dim, rank)?, c.value)))
        .collect::<mroot::Result<Vec<_>>>()?;
    Ok(SymTensorF64::build(dim, rank, entries)?)
}

impl TensorDocument {
    pub fn to_tensor(&self) -> Result<SymTensorF64, CliError> {
        build(self.dim, self.rank, &self.components)
    }

    /// One record per stored canonical slot.
    pub fn from_tensor(g: &SymTensorF64) -> Self {
        TensorDocument {
            dim: g.dim(),
            rank: g.rank(),
            components: g
                .iter()
                .map(|(idx, v)| Component {
                    index: idx.entries().to_vec(),
                    value: *v,
                })
                .collect(),
        }
    }
}

impl FieldDocument {
    pub fn to_field(&self) -> Result<MetricFieldF64, CliError> {
        if self.axes.len() != self.dim {
            return Err(CliError::schema(format!(
                "box has {} axes but dim is {}",
                self.axes.len(),
                self.dim
            )));
        }
        let axes = self
            .axes
            .iter()
            .map(|a| Axis {
                min: a.min,
                max: a.max,
                nodes: a.nodes,
            })
            .collect();
        let nodes = self
            .nodes
            .iter()
            .map(|c| build(self.dim, self.rank, c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MetricFieldF64::new(axes, nodes)?)
    }
}

impl JacobianDocument {
    pub fn to_jacobian(&self) -> Result<JacobianF64, CliError> {
        if self.rows.len() != self.dim {
            return Err(CliError::schema(format!(
                "jacobian has {} rows but dim is {}",
                self.rows.len(),
                self.dim
            )));
        }
        Ok(JacobianF64::from_rows(self.rows.clone())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        let doc = br#"{"dim": 2, "rank": 2, "components": [], "extra": 1}"#;
        assert_eq!(parse::<TensorDocument>(doc).unwrap_err().code, 2);
        let doc = br#"{"dim": 2, "rank": 2, "components": [{"index": [1, 1], "value": 1, "w": 0}]}"#;
        assert_eq!(parse::<TensorDocument>(doc).unwrap_err().code, 2);
    }

    #[test]
    fn missing_shape_is_rejected() {
        let doc = br#"{"rank": 2, "components": []}"#;
        assert_eq!(parse::<TensorDocument>(doc).unwrap_err().code, 2);
    }

    #[test]
    fn symmetric_duplicates_must_agree() {
        let mut doc: TensorDocument =
            parse(br#"{"dim": 2, "rank": 2, "components": [{"index": [1, 2], "value": 0.5}, {"index": [2, 1], "value": 0.5}]}"#)
                .unwrap();
        assert_eq!(doc.to_tensor().unwrap().stored_len(), 1);
        doc.components[1].value = 0.25;
        assert_eq!(doc.to_tensor().unwrap_err().code, 2);
    }

    #[test]
    fn bad_indices_are_schema_errors() {
        for idx in ["[0, 1]", "[1, 3]", "[1, 1, 1]"] {
            let doc = format!(r#"{{"dim": 2, "rank": 2, "components": [{{"index": {idx}, "value": 1}}]}}"#);
            let doc: TensorDocument = parse(doc.as_bytes()).unwrap();
            assert_eq!(doc.to_tensor().unwrap_err().code, 2, "{idx}");
        }
    }

    #[test]
    fn field_node_count_must_match_lattice() {
        let doc: FieldDocument = parse(
            br#"{"dim": 1, "rank": 2, "box": [{"min": 0, "max": 1, "nodes": 3}],
                 "nodes": [[{"index": [1, 1], "value": 1}], [{"index": [1, 1], "value": 1}]]}"#,
        )
        .unwrap();
        assert_eq!(doc.to_field().unwrap_err().code, 2);
    }
}
