//! Group-spec documents: the JSON interchange format for groups.
//!
//! ```json
//! {
//!   "name": "S3",
//!   "order": 6,
//!   "mult_table": [[0,1,...], ...],
//!   "subgroups": { "Z3": [0,1,2] },
//!   "irreps": [ { "label": "std", "dim": 2, "matrices": [[[ [re,im], ...]], ...] } ]
//! }
//! ```
//!
//! Indices are 0-based and element 0 must be the identity. Instead of a
//! multiplication table the document may supply `generators` as permutations;
//! the group is then the closure under composition and `order` must match.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::rep::UnitaryRep;

use super::FiniteGroup;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSpecDoc {
    pub name: String,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mult_table: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subgroups: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub irreps: Option<Vec<IrrepDoc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IrrepDoc {
    pub label: String,
    pub dim: usize,
    /// Per element: dim×dim rows of `[re, im]` pairs.
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone)]
pub struct LoadedGroup {
    pub group: Arc<FiniteGroup>,
    pub subgroups: BTreeMap<String, Vec<usize>>,
    /// Explicit irreps supplied by the document, if any (validated).
    pub irreps: Option<Vec<UnitaryRep>>,
}

pub fn parse_group_doc(text: &str) -> Result<GroupSpecDoc> {
    Ok(serde_json::from_str(text)?)
}

/// Validates and materializes a group-spec document.
pub fn load_group(doc: &GroupSpecDoc) -> Result<LoadedGroup> {
    let group = match (&doc.mult_table, &doc.generators) {
        (Some(table), _) => FiniteGroup::from_mult_table(&doc.name, table.clone())?,
        (None, Some(gens)) => FiniteGroup::from_generator_permutations(&doc.name, gens)?,
        (None, None) => {
            return Err(Error::GroupLoad(
                "document supplies neither mult_table nor generators".into(),
            ))
        }
    };
    if group.order != doc.order {
        return Err(Error::GroupLoad(format!(
            "declared order {} but the group has order {}",
            doc.order, group.order
        )));
    }
    if group.identity != 0 {
        return Err(Error::GroupLoad(format!(
            "element 0 must be the identity (found identity at {})",
            group.identity
        )));
    }

    let irreps = match &doc.irreps {
        None => None,
        Some(docs) => {
            let mut reps = Vec::with_capacity(docs.len());
            for irrep_doc in docs {
                reps.push(irrep_from_doc(&group, irrep_doc)?);
            }
            Some(reps)
        }
    };

    Ok(LoadedGroup {
        group,
        subgroups: doc.subgroups.clone(),
        irreps,
    })
}

fn irrep_from_doc(group: &Arc<FiniteGroup>, doc: &IrrepDoc) -> Result<UnitaryRep> {
    if doc.matrices.len() != group.order {
        return Err(Error::GroupLoad(format!(
            "irrep '{}' supplies {} matrices for a group of order {}",
            doc.label,
            doc.matrices.len(),
            group.order
        )));
    }
    let mut matrices = Vec::with_capacity(doc.matrices.len());
    for rows in &doc.matrices {
        if rows.len() != doc.dim || rows.iter().any(|r| r.len() != doc.dim) {
            return Err(Error::GroupLoad(format!(
                "irrep '{}' has a matrix that is not {}x{}",
                doc.label, doc.dim, doc.dim
            )));
        }
        let mut m = CMat::zeros(doc.dim, doc.dim);
        for (i, row) in rows.iter().enumerate() {
            for (j, &[re, im]) in row.iter().enumerate() {
                m[(i, j)] = c(re, im);
            }
        }
        matrices.push(m);
    }
    UnitaryRep::new(group.clone(), &doc.label, matrices)
}

/// Serializes a group (plus named subgroups) back into document form.
pub fn group_to_doc(
    group: &FiniteGroup,
    subgroups: &BTreeMap<String, Vec<usize>>,
) -> GroupSpecDoc {
    let table: Vec<Vec<usize>> = (0..group.order)
        .map(|a| (0..group.order).map(|b| group.mul(a, b)).collect())
        .collect();
    GroupSpecDoc {
        name: group.name.clone(),
        order: group.order,
        mult_table: Some(table),
        generators: None,
        subgroups: subgroups.clone(),
        irreps: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog;

    #[test]
    fn round_trip_catalog_group() {
        let cat = catalog::s3();
        let doc = group_to_doc(&cat.group, &cat.subgroups);
        let text = serde_json::to_string(&doc).unwrap();
        let parsed = parse_group_doc(&text).unwrap();
        let loaded = load_group(&parsed).unwrap();
        assert_eq!(loaded.group.order, 6);
        assert_eq!(loaded.group.num_classes(), 3);
        assert!(loaded.subgroups.contains_key("Z3"));
    }

    #[test]
    fn rejects_wrong_order() {
        let cat = catalog::s3();
        let mut doc = group_to_doc(&cat.group, &cat.subgroups);
        doc.order = 7;
        assert!(matches!(load_group(&doc), Err(Error::GroupLoad(_))));
    }

    #[test]
    fn loads_from_generators() {
        let doc = GroupSpecDoc {
            name: "S3".into(),
            order: 6,
            mult_table: None,
            generators: Some(vec![vec![1, 2, 0], vec![0, 2, 1]]),
            subgroups: BTreeMap::new(),
            irreps: None,
        };
        let loaded = load_group(&doc).unwrap();
        assert_eq!(loaded.group.order, 6);
    }

    #[test]
    fn validates_supplied_irreps() {
        let cat = catalog::cyclic(2);
        let mut doc = group_to_doc(&cat.group, &cat.subgroups);
        doc.irreps = Some(vec![IrrepDoc {
            label: "sign".into(),
            dim: 1,
            matrices: vec![vec![vec![[1.0, 0.0]]], vec![vec![[-1.0, 0.0]]]],
        }]);
        let loaded = load_group(&doc).unwrap();
        let reps = loaded.irreps.unwrap();
        assert_eq!(reps.len(), 1);

        // A non-homomorphism must be rejected.
        doc.irreps = Some(vec![IrrepDoc {
            label: "bad".into(),
            dim: 1,
            matrices: vec![vec![vec![[1.0, 0.0]]], vec![vec![[0.5, 0.0]]]],
        }]);
        assert!(load_group(&doc).is_err());
    }
}
