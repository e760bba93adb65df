use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::LstagError;
use crate::address::GornAddress;
use crate::tag::DerivationTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum OperationKind {
    Substitution,
    Adjunction,
    SharedSubstitution,
}

impl fmt::Display for OperationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperationKind::Substitution => "substitution",
            OperationKind::Adjunction => "adjunction",
            OperationKind::SharedSubstitution => "shared-substitution",
        })
    }
}

/// An operation site, named by the instance that owns it and its address in
/// that instance's elementary tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Site {
    pub instance: usize,
    pub address: GornAddress,
}

/// One composition step. `left` is the single left site; `right` holds one
/// site per right node filled or adjoined at, so a shared substitution has
/// several. Plain TAG histories leave it empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DerivationRecord {
    pub kind: OperationKind,
    pub guest: usize,
    pub guest_name: String,
    pub left: Site,
    pub right: Vec<Site>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GraphEdge {
    pub from: usize,
    pub addr: GornAddress,
    pub to: usize,
}

/// A derivation structure whose nodes may have several parents. Node `i` is
/// instance `i`; `nodes[i]` is its label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivationGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<GraphEdge>,
}

impl DerivationGraph {
    pub fn in_degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.to == node).count()
    }

    /// Edges always run from an older instance to a newer one.
    pub fn is_acyclic(&self) -> bool {
        self.edges.iter().all(|e| e.from < e.to)
    }

    pub fn is_tree(&self) -> bool {
        self.is_acyclic() && (1..self.nodes.len()).all(|n| self.in_degree(n) == 1)
    }
}

impl fmt::Display for DerivationGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut edges = self.edges.clone();
        edges.sort();
        for e in edges {
            writeln!(f, "{} @ {} <- {}", self.nodes[e.from], e.addr, self.nodes[e.to])?;
        }
        Ok(())
    }
}

/// Distinct labels for instances: the pair name, then `name#2`, `name#3`
/// for later instances of the same pair.
pub fn instance_labels(instances: &[String]) -> Vec<String> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    instances
        .iter()
        .map(|n| {
            let k = seen.entry(n).or_default();
            *k += 1;
            if *k == 1 {
                n.clone()
            } else {
                format!("{n}#{k}")
            }
        })
        .collect()
}

/// Rebuilds the left derivation tree and the right derivation graph from a
/// history. Instance 0 is the start; record `i` must introduce instance
/// `i + 1`.
pub fn derivation_projections(
    instances: &[String],
    history: &[DerivationRecord],
) -> Result<(DerivationTree, DerivationGraph), LstagError> {
    let bad = |m: String| LstagError::InconsistentHistory(m);
    if instances.len() != history.len() + 1 {
        return Err(bad(format!(
            "{} instances for {} records",
            instances.len(),
            history.len()
        )));
    }
    let mut left_edges: Vec<(usize, GornAddress, usize)> = Vec::new();
    let mut right_edges = Vec::new();
    for (i, r) in history.iter().enumerate() {
        if r.guest != i + 1 || instances[r.guest] != r.guest_name {
            return Err(bad(format!(
                "record {i} introduces instance {} ({})",
                r.guest, r.guest_name
            )));
        }
        if r.left.instance >= r.guest || r.right.iter().any(|s| s.instance >= r.guest) {
            return Err(bad(format!(
                "record {i} attaches to an instance that does not exist yet"
            )));
        }
        left_edges.push((r.left.instance, r.left.address.clone(), r.guest));
        for s in &r.right {
            right_edges.push(GraphEdge {
                from: s.instance,
                addr: s.address.clone(),
                to: r.guest,
            });
        }
    }

    fn build(i: usize, instances: &[String], edges: &[(usize, GornAddress, usize)]) -> DerivationTree {
        let mut d = DerivationTree::leaf(instances[i].clone());
        for (from, a, to) in edges {
            if *from == i {
                d = d.with(a.clone(), build(*to, instances, edges));
            }
        }
        d
    }
    let left = build(0, instances, &left_edges);
    let right = DerivationGraph {
        nodes: instance_labels(instances),
        edges: right_edges,
    };
    Ok((left, right))
}

/// A key that identifies a derivation independently of the order its
/// operations were applied in. Instances are named by their path in the left
/// derivation tree, which is unique.
pub fn canonical_key(instances: &[String], history: &[DerivationRecord]) -> String {
    let mut paths = vec![instances[0].clone()];
    for r in history {
        let p = format!("{}/{}:{}", paths[r.left.instance], r.left.address, r.guest_name);
        paths.push(p);
    }
    let left = match derivation_projections(instances, history) {
        Ok((d, _)) => d.canonical(),
        Err(_) => String::from("?"),
    };
    let mut right: Vec<String> = history
        .iter()
        .flat_map(|r| {
            let to = &paths[r.guest];
            r.right
                .iter()
                .map(|s| format!("{}@{}<-{}", paths[s.instance], s.address, to))
                .collect::<Vec<_>>()
        })
        .collect();
    right.sort();
    format!("{left}|{}", right.join(";"))
}
