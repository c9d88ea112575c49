//! BALD scoring of augmented feature candidates from MC-dropout samples:
//! the mutual information between predictions and model parameters,
//! estimated as H[mean p] minus mean H[p].

use crate::models::McDropoutSamples;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which nodes the scalar score averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeSetTag {
    #[default]
    All,
    Unlabeled,
    Train,
}

impl std::fmt::Display for NodeSetTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NodeSetTag::All => "all",
            NodeSetTag::Unlabeled => "unlabeled",
            NodeSetTag::Train => "train",
        })
    }
}

/// BALD disagreement estimate in nats.
#[derive(Debug, Clone)]
pub struct BaldEstimate {
    /// Mean per-node score over the tagged node set.
    pub score: f64,
    /// One score per node, for all nodes regardless of the tag.
    pub per_node: Vec<f64>,
    pub n_mc: usize,
    pub tag: NodeSetTag,
}

const PROB_FLOOR: f64 = 1e-12;
const NEGATIVE_EPS: f64 = 1e-9;

/// Entropy with the documented probability floor inside the log. Zero
/// entries contribute exactly zero.
fn entropy(row: &[f64]) -> f64 {
    -row.iter().map(|&p| p * p.max(PROB_FLOOR).ln()).sum::<f64>()
}

/// Scores the disagreement between MC-dropout samples per node and averages
/// it over `node_set`.
///
/// Nodes whose sample rows are bit-identical score exactly zero (the
/// mathematical value; recomputing it in floating point would leave
/// round-off residue), which covers the n_mc = 1 case.
pub fn bald_score(
    samples: &McDropoutSamples,
    node_set: &[u32],
    tag: NodeSetTag,
) -> Result<BaldEstimate> {
    let n_mc = samples.n_mc();
    if n_mc == 0 {
        return Err(Error::Parameter("no MC samples".into()));
    }
    if node_set.is_empty() {
        return Err(Error::Parameter("empty node set".into()));
    }
    let (n, c) = samples.probs[0].shape();
    for (s, p) in samples.probs.iter().enumerate() {
        if p.shape() != (n, c) {
            return Err(Error::shape(
                "bald_score",
                format!("sample {s} is {:?}, expected {:?}", p.shape(), (n, c)),
            ));
        }
        for i in 0..n {
            let row = p.row(i);
            if row.iter().any(|&v| v < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
                return Err(Error::Numeric(format!(
                    "sample {s} row {i} is not a probability distribution"
                )));
            }
        }
    }
    for &i in node_set {
        if i as usize >= n {
            return Err(Error::Parameter(format!("node {i} out of range")));
        }
    }

    let mut per_node = Vec::with_capacity(n);
    let mut mean = vec![0.0; c];
    for i in 0..n {
        let first = samples.probs[0].row(i);
        if samples.probs[1..]
            .iter()
            .all(|p| p.row(i).iter().zip(first).all(|(a, b)| a.to_bits() == b.to_bits()))
        {
            per_node.push(0.0);
            continue;
        }
        mean.iter_mut().for_each(|v| *v = 0.0);
        let mut mean_entropy = 0.0;
        for p in &samples.probs {
            let row = p.row(i);
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
            mean_entropy += entropy(row);
        }
        for m in mean.iter_mut() {
            *m /= n_mc as f64;
        }
        mean_entropy /= n_mc as f64;
        let mut u = entropy(&mean) - mean_entropy;
        if u < 0.0 {
            if u < -NEGATIVE_EPS {
                return Err(Error::Numeric(format!(
                    "BALD score {u} at node {i} below the negative tolerance"
                )));
            }
            u = 0.0;
        }
        per_node.push(u);
    }

    let score = node_set
        .iter()
        .map(|&i| per_node[i as usize])
        .sum::<f64>()
        / node_set.len() as f64;
    Ok(BaldEstimate {
        score,
        per_node,
        n_mc,
        tag,
    })
}
