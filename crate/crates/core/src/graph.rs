//! Dataset loading, adjacency normalization, splits, feature masking,
//! neighbor-pair extraction, and random edge dropping.
//!
//! A dataset directory holds `meta.json`, `edges.tsv` (one `src<TAB>dst` per
//! line, 0-based), `features.tsv` (sparse `node<TAB>dim<TAB>value` triplets),
//! `labels.tsv` (line k = label of node k), and optionally `splits.json`
//! with train/val/test index arrays.

use crate::numerics::{DenseMatrix, RngState};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

/// A loaded graph: undirected edge list (each pair stored once, lower index
/// first), dense feature matrix, one class label per node, optional shipped
/// splits.
#[derive(Debug, Clone)]
pub struct GraphDataset {
    pub name: String,
    pub num_nodes: usize,
    pub num_features: usize,
    pub num_classes: usize,
    pub edges: Vec<(u32, u32)>,
    pub features: DenseMatrix,
    pub labels: Vec<u32>,
    pub splits: Option<SplitMasks>,
    /// Whether `features` was row-normalized at load time.
    pub features_row_normalized: bool,
}

/// CSR form of the symmetrically normalized adjacency with self-loops,
/// D^{-1/2} (A + I) D^{-1/2}. Column indices are ascending within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Entry (i, j), zero if absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }
}

/// Disjoint train/val/test node index sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SplitMasks {
    pub train: Vec<u32>,
    pub val: Vec<u32>,
    pub test: Vec<u32>,
}

#[derive(Deserialize)]
struct Meta {
    name: String,
    num_nodes: usize,
    num_features: usize,
    num_classes: usize,
}

fn data_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Data(format!("{}:{}: {msg}", path.display(), line))
}

/// Loads and validates a dataset directory. Duplicate undirected edges are
/// deduped; self-loop lines are an error. With `normalize_features` the
/// feature rows are scaled to sum to 1 (zero rows kept as-is).
pub fn load_dataset(dir: &Path, normalize_features: bool) -> Result<GraphDataset> {
    let meta_path = dir.join("meta.json");
    let meta: Meta = serde_json::from_str(
        &std::fs::read_to_string(&meta_path)
            .map_err(|e| Error::Data(format!("{}: {e}", meta_path.display())))?,
    )
    .map_err(|e| Error::Data(format!("{}: {e}", meta_path.display())))?;
    let n = meta.num_nodes;

    let edges_path = dir.join("edges.tsv");
    let edges_text = std::fs::read_to_string(&edges_path)
        .map_err(|e| Error::Data(format!("{}: {e}", edges_path.display())))?;
    let mut edge_set = BTreeSet::new();
    for (ln, line) in edges_text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut it = line.split('\t');
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(data_err(&edges_path, ln + 1, "expected `src<TAB>dst`")),
        };
        let u: u32 = a
            .parse()
            .map_err(|_| data_err(&edges_path, ln + 1, format!("bad node id {a:?}")))?;
        let v: u32 = b
            .parse()
            .map_err(|_| data_err(&edges_path, ln + 1, format!("bad node id {b:?}")))?;
        if u as usize >= n || v as usize >= n {
            return Err(data_err(
                &edges_path,
                ln + 1,
                format!("edge ({u}, {v}) out of range for {n} nodes"),
            ));
        }
        if u == v {
            return Err(data_err(&edges_path, ln + 1, format!("self-loop at node {u}")));
        }
        edge_set.insert((u.min(v), u.max(v)));
    }
    let edges: Vec<(u32, u32)> = edge_set.into_iter().collect();

    let feat_path = dir.join("features.tsv");
    let feat_text = std::fs::read_to_string(&feat_path)
        .map_err(|e| Error::Data(format!("{}: {e}", feat_path.display())))?;
    let mut features = DenseMatrix::zeros(n, meta.num_features);
    for (ln, line) in feat_text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut it = line.split('\t');
        let (a, b, c) = match (it.next(), it.next(), it.next(), it.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => {
                return Err(data_err(
                    &feat_path,
                    ln + 1,
                    "expected `node<TAB>dim<TAB>value`",
                ))
            }
        };
        let node: usize = a
            .parse()
            .map_err(|_| data_err(&feat_path, ln + 1, format!("bad node id {a:?}")))?;
        let dim: usize = b
            .parse()
            .map_err(|_| data_err(&feat_path, ln + 1, format!("bad dim {b:?}")))?;
        let value: f64 = c
            .parse()
            .map_err(|_| data_err(&feat_path, ln + 1, format!("bad value {c:?}")))?;
        if node >= n || dim >= meta.num_features {
            return Err(data_err(
                &feat_path,
                ln + 1,
                format!("({node}, {dim}) out of range for {n}x{}", meta.num_features),
            ));
        }
        if !value.is_finite() {
            return Err(data_err(&feat_path, ln + 1, "non-finite value"));
        }
        features.set(node, dim, value);
    }
    if normalize_features {
        features = features.row_normalize();
    }

    let labels_path = dir.join("labels.tsv");
    let labels_text = std::fs::read_to_string(&labels_path)
        .map_err(|e| Error::Data(format!("{}: {e}", labels_path.display())))?;
    let mut labels = Vec::with_capacity(n);
    for (ln, line) in labels_text.lines().enumerate() {
        let y: u32 = line
            .trim()
            .parse()
            .map_err(|_| data_err(&labels_path, ln + 1, format!("bad label {line:?}")))?;
        if y as usize >= meta.num_classes {
            return Err(data_err(
                &labels_path,
                ln + 1,
                format!("label {y} out of range for {} classes", meta.num_classes),
            ));
        }
        labels.push(y);
    }
    if labels.len() != n {
        return Err(Error::Data(format!(
            "{}: {} labels for {} nodes",
            labels_path.display(),
            labels.len(),
            n
        )));
    }

    let splits_path = dir.join("splits.json");
    let splits = if splits_path.exists() {
        let mut s: SplitMasks = serde_json::from_str(
            &std::fs::read_to_string(&splits_path)
                .map_err(|e| Error::Data(format!("{}: {e}", splits_path.display())))?,
        )
        .map_err(|e| Error::Data(format!("{}: {e}", splits_path.display())))?;
        s.train.sort_unstable();
        s.val.sort_unstable();
        s.test.sort_unstable();
        let mut seen = vec![false; n];
        for &i in s.train.iter().chain(&s.val).chain(&s.test) {
            if i as usize >= n {
                return Err(Error::Data(format!(
                    "{}: split index {i} out of range",
                    splits_path.display()
                )));
            }
            if seen[i as usize] {
                return Err(Error::Data(format!(
                    "{}: split index {i} appears twice",
                    splits_path.display()
                )));
            }
            seen[i as usize] = true;
        }
        Some(s)
    } else {
        None
    };

    Ok(GraphDataset {
        name: meta.name,
        num_nodes: n,
        num_features: meta.num_features,
        num_classes: meta.num_classes,
        edges,
        features,
        labels,
        splits,
        features_row_normalized: normalize_features,
    })
}

fn adjacency_from_edges(n: usize, edges: &[(u32, u32)]) -> NormalizedAdjacency {
    let mut neighbors: Vec<Vec<u32>> = (0..n).map(|i| vec![i as u32]).collect();
    for &(u, v) in edges {
        neighbors[u as usize].push(v);
        neighbors[v as usize].push(u);
    }
    let mut inv_sqrt_deg = vec![0.0; n];
    for i in 0..n {
        neighbors[i].sort_unstable();
        inv_sqrt_deg[i] = 1.0 / (neighbors[i].len() as f64).sqrt();
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for i in 0..n {
        for &j in &neighbors[i] {
            col_idx.push(j);
            values.push(inv_sqrt_deg[i] * inv_sqrt_deg[j as usize]);
        }
        row_ptr.push(col_idx.len());
    }
    NormalizedAdjacency {
        n,
        row_ptr,
        col_idx,
        values,
    }
}

/// Builds D^{-1/2} (A + I) D^{-1/2} in CSR with ascending columns per row.
pub fn normalize_adjacency(ds: &GraphDataset) -> NormalizedAdjacency {
    adjacency_from_edges(ds.num_nodes, &ds.edges)
}

/// Sparse-dense product `adj * b`. Each output row accumulates its stored
/// entries in ascending column order.
pub fn spmm(adj: &NormalizedAdjacency, b: &DenseMatrix) -> Result<DenseMatrix> {
    if adj.dim() != b.rows() {
        return Err(Error::shape(
            "spmm",
            format!("adj {}x{} * b {:?}", adj.dim(), adj.dim(), b.shape()),
        ));
    }
    let cols = b.cols();
    let mut out = DenseMatrix::zeros(adj.dim(), cols);
    for i in 0..adj.dim() {
        let (cs, vs) = adj.row(i);
        let orow = out.row_mut(i);
        for (&c, &v) in cs.iter().zip(vs) {
            let brow = b.row(c as usize);
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += v * bv;
            }
        }
    }
    Ok(out)
}

/// Split construction mode. Fixed uses the masks shipped with the dataset;
/// Random partitions each class 10% / 30% / 60% into train/val/test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    #[default]
    Fixed,
    Random,
}

pub fn build_splits(
    ds: &GraphDataset,
    mode: SplitMode,
    rng: &mut RngState,
) -> Result<SplitMasks> {
    match mode {
        SplitMode::Fixed => ds.splits.clone().ok_or_else(|| {
            Error::Data(format!("dataset {} ships no fixed splits", ds.name))
        }),
        SplitMode::Random => {
            let mut by_class: Vec<Vec<u32>> = vec![Vec::new(); ds.num_classes];
            for (i, &y) in ds.labels.iter().enumerate() {
                by_class[y as usize].push(i as u32);
            }
            let mut masks = SplitMasks {
                train: Vec::new(),
                val: Vec::new(),
                test: Vec::new(),
            };
            for (c, nodes) in by_class.iter().enumerate() {
                let m = nodes.len();
                if m < 3 {
                    return Err(Error::Data(format!(
                        "class {c} has only {m} nodes; random split needs at least 3"
                    )));
                }
                let perm = rng.permutation(m);
                let n_train = m / 10;
                let n_val = m * 3 / 10;
                for (k, &p) in perm.iter().enumerate() {
                    let node = nodes[p as usize];
                    if k < n_train {
                        masks.train.push(node);
                    } else if k < n_train + n_val {
                        masks.val.push(node);
                    } else {
                        masks.test.push(node);
                    }
                }
            }
            masks.train.sort_unstable();
            masks.val.sort_unstable();
            masks.test.sort_unstable();
            Ok(masks)
        }
    }
}

/// Zeroes floor(ratio * F) uniformly sampled attribute positions per row,
/// independently for each row.
pub fn mask_features(x: &DenseMatrix, ratio: f64, rng: &mut RngState) -> Result<DenseMatrix> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::Parameter(format!(
            "mask ratio must be in [0, 1), got {ratio}"
        )));
    }
    let f = x.cols();
    let k = (ratio * f as f64).floor() as usize;
    let mut out = x.clone();
    let mut idx: Vec<u32> = Vec::with_capacity(f);
    for i in 0..x.rows() {
        idx.clear();
        idx.extend(0..f as u32);
        // partial Fisher-Yates: the first k slots end up a uniform sample
        for t in 0..k {
            let j = t + rng.below((f - t) as u64) as usize;
            idx.swap(t, j);
        }
        let row = out.row_mut(i);
        for &p in &idx[..k] {
            row[p as usize] = 0.0;
        }
    }
    Ok(out)
}

/// Ordered conditioning pairs for generator training: (j, i) and (i, j) for
/// every stored edge, plus (i, i) for isolated nodes so every node has a
/// sample. Sorted ascending.
pub fn neighbor_pairs(ds: &GraphDataset) -> Vec<(u32, u32)> {
    let mut degree = vec![0usize; ds.num_nodes];
    let mut pairs = Vec::with_capacity(2 * ds.edges.len());
    for &(u, v) in &ds.edges {
        degree[u as usize] += 1;
        degree[v as usize] += 1;
        pairs.push((u, v));
        pairs.push((v, u));
    }
    for (i, &d) in degree.iter().enumerate() {
        if d == 0 {
            pairs.push((i as u32, i as u32));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Removes floor(p * |E|) undirected edges uniformly at random and
/// renormalizes the remainder.
pub fn drop_edge(ds: &GraphDataset, p: f64, rng: &mut RngState) -> Result<NormalizedAdjacency> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "drop_edge rate must be in [0, 1), got {p}"
        )));
    }
    let e = ds.edges.len();
    let k = (p * e as f64).floor() as usize;
    if k == 0 {
        return Ok(normalize_adjacency(ds));
    }
    let perm = rng.permutation(e);
    let mut kept: Vec<(u32, u32)> = perm[k..]
        .iter()
        .map(|&i| ds.edges[i as usize])
        .collect();
    kept.sort_unstable();
    Ok(adjacency_from_edges(ds.num_nodes, &kept))
}
