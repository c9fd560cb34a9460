//! Graph augmentations for contrastive training.
//!
//! Variable substitution renames variable and number nodes while leaving the
//! topology, edge labels and operator nodes untouched. The generic strategies
//! drop nodes or edges, or zero out node or edge feature rows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::embed::{FeaturedGraph, Featurizer};
use crate::formula::{MathGraph, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    VarSub,
    NodeDrop,
    EdgeDrop,
    NodeFeatureMask,
    EdgeFeatureMask,
    Random,
    Identity,
}

impl Strategy {
    /// The strategies the `Random` dispatcher draws from.
    pub const GENERIC: [Strategy; 4] =
        [Strategy::NodeDrop, Strategy::EdgeDrop, Strategy::NodeFeatureMask, Strategy::EdgeFeatureMask];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::VarSub => "VarSub",
            Strategy::NodeDrop => "NodeDrop",
            Strategy::EdgeDrop => "EdgeDrop",
            Strategy::NodeFeatureMask => "NodeFeatureMask",
            Strategy::EdgeFeatureMask => "EdgeFeatureMask",
            Strategy::Random => "Random",
            Strategy::Identity => "Identity",
        }
    }

    /// Case-insensitive; `_` and `-` are ignored (`node_drop`, `NodeDrop`).
    pub fn parse(s: &str) -> Option<Strategy> {
        let key: String = s.chars().filter(|c| *c != '_' && *c != '-').collect::<String>().to_ascii_lowercase();
        Some(match key.as_str() {
            "varsub" | "variablesubstitution" => Strategy::VarSub,
            "nodedrop" => Strategy::NodeDrop,
            "edgedrop" => Strategy::EdgeDrop,
            "nodefeaturemask" => Strategy::NodeFeatureMask,
            "edgefeaturemask" => Strategy::EdgeFeatureMask,
            "random" => Strategy::Random,
            "identity" | "none" => Strategy::Identity,
            _ => return None,
        })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubstitutionMode {
    /// Injective renaming shared by all occurrences of a lexeme.
    Consistent,
    /// Every variable/number node draws its own replacement.
    PerNode,
}

impl SubstitutionMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "consistent" => Some(SubstitutionMode::Consistent),
            "pernode" => Some(SubstitutionMode::PerNode),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SubstitutionMode::Consistent => "consistent",
            SubstitutionMode::PerNode => "per_node",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AugmentError {
    #[error("substitution needs {needed} distinct {what} replacements but the pool has {available}")]
    PoolTooSmall { what: &'static str, needed: usize, available: usize },
    #[error("no replacement for variable `{0}`")]
    IncompleteMap(String),
    #[error("invalid augmentation config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    pub strategy: Strategy,
    /// Fraction of nodes/edges dropped or masked.
    pub ratio: f64,
    pub var_pool: Vec<String>,
    pub num_pool: Vec<String>,
    pub mode: SubstitutionMode,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            strategy: Strategy::VarSub,
            ratio: 0.2,
            var_pool: (b'a'..=b'z').map(|c| (c as char).to_string()).collect(),
            num_pool: (0..10).map(|d| d.to_string()).collect(),
            mode: SubstitutionMode::Consistent,
        }
    }
}

impl AugmentConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        AugmentConfig { strategy, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(AugmentError::InvalidConfig(format!("ratio {} outside [0, 1]", self.ratio)));
        }
        if self.strategy == Strategy::VarSub && (self.var_pool.is_empty() || self.num_pool.is_empty()) {
            return Err(AugmentError::InvalidConfig("variable substitution needs non-empty pools".into()));
        }
        Ok(())
    }
}

/// Replacement lexemes for variable and number nodes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubstitutionMap {
    pub mode: Option<SubstitutionMode>,
    pub variables: BTreeMap<String, String>,
    pub numbers: BTreeMap<String, String>,
    /// Node id → replacement lexeme; used in per-node mode only.
    pub per_node: BTreeMap<usize, String>,
}

impl SubstitutionMap {
    pub fn consistent(variables: BTreeMap<String, String>, numbers: BTreeMap<String, String>) -> Self {
        SubstitutionMap { mode: Some(SubstitutionMode::Consistent), variables, numbers, per_node: BTreeMap::new() }
    }

    /// Inverse of an injective consistent map.
    pub fn inverse(&self) -> Option<SubstitutionMap> {
        let flip = |m: &BTreeMap<String, String>| -> Option<BTreeMap<String, String>> {
            let inv: BTreeMap<String, String> = m.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
            (inv.len() == m.len()).then_some(inv)
        };
        match self.mode {
            Some(SubstitutionMode::PerNode) => None,
            _ => Some(SubstitutionMap::consistent(flip(&self.variables)?, flip(&self.numbers)?)),
        }
    }
}

/// Distinct lexemes of the given kind, in node order.
fn distinct_lexemes(g: &MathGraph, kind: NodeKind) -> Vec<String> {
    let mut seen = BTreeSet::new();
    g.nodes
        .iter()
        .filter(|n| n.kind == kind && seen.insert(n.lexeme().to_string()))
        .map(|n| n.lexeme().to_string())
        .collect()
}

/// Random injective map `originals → pool` with no fixed points whenever one
/// exists (always, unless a lone original is the only pool entry).
fn injective_renaming(
    originals: &[String],
    pool: &[String],
    what: &'static str,
    rng: &mut impl Rng,
) -> Result<BTreeMap<String, String>, AugmentError> {
    let pool: Vec<&String> = pool.iter().collect::<BTreeSet<_>>().into_iter().collect();
    if originals.len() > pool.len() {
        return Err(AugmentError::PoolTooSmall { what, needed: originals.len(), available: pool.len() });
    }
    let mut last = Vec::new();
    for _ in 0..1000 {
        let picks: Vec<&String> = pool.choose_multiple(rng, originals.len()).copied().collect();
        let fixed = originals.iter().zip(&picks).any(|(o, p)| o == *p);
        last = picks;
        if !fixed {
            break;
        }
    }
    Ok(originals.iter().cloned().zip(last.into_iter().cloned()).collect())
}

/// A pool entry different from `original` when the pool allows it.
fn fresh_choice(original: &str, pool: &[String], rng: &mut impl Rng) -> String {
    let others: Vec<&String> = pool.iter().filter(|p| p.as_str() != original).collect();
    match others.choose(rng) {
        Some(p) => (*p).clone(),
        None => pool.choose(rng).cloned().unwrap_or_else(|| original.to_string()),
    }
}

pub fn sample_substitution(
    g: &MathGraph,
    cfg: &AugmentConfig,
    rng: &mut impl Rng,
) -> Result<SubstitutionMap, AugmentError> {
    if cfg.var_pool.is_empty() || cfg.num_pool.is_empty() {
        return Err(AugmentError::InvalidConfig("variable substitution needs non-empty pools".into()));
    }
    match cfg.mode {
        SubstitutionMode::Consistent => {
            let vars = distinct_lexemes(g, NodeKind::Variable);
            let nums = distinct_lexemes(g, NodeKind::Number);
            let variables = injective_renaming(&vars, &cfg.var_pool, "variable", rng)?;
            let numbers = injective_renaming(&nums, &cfg.num_pool, "number", rng)?;
            Ok(SubstitutionMap::consistent(variables, numbers))
        }
        SubstitutionMode::PerNode => {
            let mut per_node = BTreeMap::new();
            for (i, n) in g.nodes.iter().enumerate() {
                let pool = match n.kind {
                    NodeKind::Variable => &cfg.var_pool,
                    NodeKind::Number => &cfg.num_pool,
                    _ => continue,
                };
                per_node.insert(i, fresh_choice(n.lexeme(), pool, rng));
            }
            Ok(SubstitutionMap { mode: Some(SubstitutionMode::PerNode), per_node, ..Default::default() })
        }
    }
}

/// Relabels variable and number nodes; ids, kinds, edges and root are kept.
pub fn apply_substitution(g: &MathGraph, m: &SubstitutionMap) -> Result<MathGraph, AugmentError> {
    Ok(substitute_tracked(g, m)?.0)
}

/// Like [`apply_substitution`], also returning the ids of relabeled nodes.
fn substitute_tracked(g: &MathGraph, m: &SubstitutionMap) -> Result<(MathGraph, Vec<usize>), AugmentError> {
    let mut out = g.clone();
    let mut changed = Vec::new();
    for (i, node) in out.nodes.iter_mut().enumerate() {
        let replacement = match (m.mode, node.kind) {
            (Some(SubstitutionMode::PerNode), NodeKind::Variable | NodeKind::Number) => m.per_node.get(&i),
            (_, NodeKind::Variable) => Some(
                m.variables.get(node.lexeme()).ok_or_else(|| AugmentError::IncompleteMap(node.lexeme().to_string()))?,
            ),
            (_, NodeKind::Number) => m.numbers.get(node.lexeme()),
            _ => None,
        };
        if let Some(r) = replacement {
            if r != node.lexeme() {
                node.label = format!("{}{}", node.kind.prefix(), r);
                changed.push(i);
            }
        }
    }
    Ok((out, changed))
}

fn fraction_count(ratio: f64, n: usize) -> usize {
    ((ratio * n as f64) + 1e-9).floor() as usize
}

/// Removes `min(floor(ratio·|V|), |V|-1)` uniformly chosen non-root nodes and
/// their incident edges, returning the graph and the surviving original ids.
fn node_drop_kept(g: &MathGraph, ratio: f64, rng: &mut impl Rng) -> (MathGraph, Vec<usize>) {
    let n = g.node_count();
    let k = fraction_count(ratio, n).min(n.saturating_sub(1));
    let candidates: Vec<usize> = (0..n).filter(|&v| v != g.root).collect();
    let mut dropped = vec![false; n];
    for i in sample(rng, candidates.len(), k) {
        dropped[candidates[i]] = true;
    }
    let kept: Vec<usize> = (0..n).filter(|&v| !dropped[v]).collect();
    let mut remap = vec![usize::MAX; n];
    for (new, &old) in kept.iter().enumerate() {
        remap[old] = new;
    }
    let mut out = MathGraph::new(g.layout);
    out.nodes = kept.iter().map(|&v| g.nodes[v].clone()).collect();
    out.root = remap[g.root];
    for e in &g.edges {
        if !dropped[e.src] && !dropped[e.dst] {
            out.add_edge(remap[e.src], remap[e.dst], e.label);
        }
    }
    (out, kept)
}

pub fn node_drop(g: &MathGraph, ratio: f64, rng: &mut impl Rng) -> MathGraph {
    node_drop_kept(g, ratio, rng).0
}

/// Removes `floor(ratio·|E|)` uniformly chosen edges; returns surviving edge ids.
fn edge_drop_kept(g: &MathGraph, ratio: f64, rng: &mut impl Rng) -> (MathGraph, Vec<usize>) {
    let m = g.edge_count();
    let k = fraction_count(ratio, m).min(m);
    let mut dropped = vec![false; m];
    for i in sample(rng, m, k) {
        dropped[i] = true;
    }
    let kept: Vec<usize> = (0..m).filter(|&e| !dropped[e]).collect();
    let mut out = g.clone();
    out.edges = kept.iter().map(|&e| g.edges[e]).collect();
    (out, kept)
}

pub fn edge_drop(g: &MathGraph, ratio: f64, rng: &mut impl Rng) -> MathGraph {
    edge_drop_kept(g, ratio, rng).0
}

pub fn node_feature_mask(fg: &FeaturedGraph, ratio: f64, rng: &mut impl Rng) -> FeaturedGraph {
    let mut out = fg.clone();
    let n = out.node_features.rows;
    for r in sample(rng, n, fraction_count(ratio, n).min(n)) {
        out.node_features.row_mut(r).iter_mut().for_each(|x| *x = 0.0);
    }
    out
}

pub fn edge_feature_mask(fg: &FeaturedGraph, ratio: f64, rng: &mut impl Rng) -> FeaturedGraph {
    let mut out = fg.clone();
    let m = out.edge_features.rows;
    for r in sample(rng, m, fraction_count(ratio, m).min(m)) {
        out.edge_features.row_mut(r).iter_mut().for_each(|x| *x = 0.0);
    }
    out
}

/// Applies the configured strategy. Variable substitution re-featurizes the
/// renamed nodes through `featurizer`.
pub fn augment(
    fg: &FeaturedGraph,
    cfg: &AugmentConfig,
    featurizer: &mut Featurizer<'_>,
    rng: &mut impl Rng,
) -> Result<FeaturedGraph, AugmentError> {
    augment_traced(fg, cfg, featurizer, rng).map(|(g, _)| g)
}

/// [`augment`] that also reports which concrete strategy ran.
pub fn augment_traced(
    fg: &FeaturedGraph,
    cfg: &AugmentConfig,
    featurizer: &mut Featurizer<'_>,
    rng: &mut impl Rng,
) -> Result<(FeaturedGraph, Strategy), AugmentError> {
    cfg.validate()?;
    let strategy = match cfg.strategy {
        Strategy::Random => Strategy::GENERIC[rng.gen_range(0..Strategy::GENERIC.len())],
        s => s,
    };
    let out = match strategy {
        Strategy::Identity => fg.clone(),
        Strategy::VarSub => {
            let m = sample_substitution(&fg.graph, cfg, rng)?;
            let (graph, changed) = substitute_tracked(&fg.graph, &m)?;
            let mut out = FeaturedGraph { graph, ..fg.clone() };
            for i in changed {
                let v = featurizer.vector(&out.graph.nodes[i].label).to_vec();
                out.node_features.row_mut(i).copy_from_slice(&v);
            }
            out
        }
        Strategy::NodeDrop => {
            let (graph, kept) = node_drop_kept(&fg.graph, cfg.ratio, rng);
            let edges_kept: Vec<usize> = edge_survivors(&fg.graph, &kept);
            FeaturedGraph {
                graph,
                node_features: fg.node_features.select_rows(&kept),
                edge_features: fg.edge_features.select_rows(&edges_kept),
            }
        }
        Strategy::EdgeDrop => {
            let (graph, kept) = edge_drop_kept(&fg.graph, cfg.ratio, rng);
            FeaturedGraph { graph, node_features: fg.node_features.clone(), edge_features: fg.edge_features.select_rows(&kept) }
        }
        Strategy::NodeFeatureMask => node_feature_mask(fg, cfg.ratio, rng),
        Strategy::EdgeFeatureMask => edge_feature_mask(fg, cfg.ratio, rng),
        Strategy::Random => unreachable!("resolved above"),
    };
    Ok((out, strategy))
}

/// Ids of edges whose endpoints both survive a node drop, in edge order.
fn edge_survivors(g: &MathGraph, kept_nodes: &[usize]) -> Vec<usize> {
    let mut alive = vec![false; g.node_count()];
    for &v in kept_nodes {
        alive[v] = true;
    }
    (0..g.edge_count()).filter(|&e| alive[g.edges[e].src] && alive[g.edges[e].dst]).collect()
}
