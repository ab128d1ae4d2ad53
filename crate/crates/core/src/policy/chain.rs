//! Loan-chain eligibility.
//!
//! An edge `parent -> child` means the parent loan's proceeds funded the
//! child. Stacking intermediary loans inflates the principal that could be
//! counted, so only the final link to a business borrower qualifies.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::LoanKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BorrowerType {
    EndBusinessBorrower,
    Intermediary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eligibility {
    Eligible,
    IneligibleChained,
    IneligibleNonBusiness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoanNode {
    pub id: String,
    pub kind: LoanKind,
    pub borrower: BorrowerType,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoanGraph {
    pub nodes: Vec<LoanNode>,
    /// `(parent, child)` pairs.
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("loan chain contains a cycle through {0:?}")]
    CycleDetected(Vec<String>),
    #[error("edge refers to unknown loan {0:?}")]
    UnknownNode(String),
    #[error("duplicate loan {0:?} in graph")]
    DuplicateNode(String),
}

/// Classification with consumer loans excluded.
pub fn classify_chain(graph: &LoanGraph) -> Result<BTreeMap<String, Eligibility>, ChainError> {
    classify_chain_with(graph, false)
}

pub fn classify_chain_with(
    graph: &LoanGraph,
    include_consumer: bool,
) -> Result<BTreeMap<String, Eligibility>, ChainError> {
    let mut index = HashMap::with_capacity(graph.nodes.len());
    for (i, n) in graph.nodes.iter().enumerate() {
        if index.insert(n.id.as_str(), i).is_some() {
            return Err(ChainError::DuplicateNode(n.id.clone()));
        }
    }
    let n = graph.nodes.len();
    let mut out_degree = vec![0usize; n];
    let mut in_degree = vec![0usize; n];
    let mut children = vec![Vec::new(); n];
    for (p, c) in &graph.edges {
        let pi = *index
            .get(p.as_str())
            .ok_or_else(|| ChainError::UnknownNode(p.clone()))?;
        let ci = *index
            .get(c.as_str())
            .ok_or_else(|| ChainError::UnknownNode(c.clone()))?;
        out_degree[pi] += 1;
        in_degree[ci] += 1;
        children[pi].push(ci);
    }

    // Kahn: whatever is never released sits on a cycle or downstream of one.
    let mut indeg = in_degree.clone();
    let mut queue: VecDeque<usize> = (0..n).filter(|i| indeg[*i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = queue.pop_front() {
        seen += 1;
        for &c in &children[i] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    if seen < n {
        let mut stuck: Vec<String> = (0..n)
            .filter(|i| indeg[*i] > 0)
            .map(|i| graph.nodes[i].id.clone())
            .collect();
        stuck.sort();
        return Err(ChainError::CycleDetected(stuck));
    }

    Ok(graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let business = match node.kind {
                LoanKind::Commercial | LoanKind::AtRiskVenture => true,
                LoanKind::Consumer => include_consumer,
            };
            let class = if out_degree[i] > 0 {
                Eligibility::IneligibleChained
            } else if node.borrower == BorrowerType::EndBusinessBorrower && business {
                Eligibility::Eligible
            } else {
                Eligibility::IneligibleNonBusiness
            };
            (node.id.clone(), class)
        })
        .collect())
}
