#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use lstag_core::address::GornAddress;
use lstag_core::grammar_file::GrammarDocument;
use lstag_core::tree::{NodeKind, SyntaxTree};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str) -> GrammarDocument {
    GrammarDocument::parse(&read_fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random tree with at most `max_nodes` nodes and the given root symbol.
/// With `aux`, one non-root leaf becomes a foot labelled like the root.
pub fn random_tree(rng: &mut impl Rng, symbols: &[&str], root: &str, max_nodes: usize, aux: bool) -> SyntaxTree {
    let mut nodes = BTreeMap::new();
    nodes.insert(GornAddress::root(), NodeKind::Interior(root.to_string()));
    let mut open = vec![GornAddress::root()];
    let budget = rng.gen_range(2..=max_nodes.max(2));
    while let Some(at) = open.pop() {
        let want = if at.is_root() {
            rng.gen_range(1..=3)
        } else {
            rng.gen_range(0..=3)
        };
        for k in 1..=want {
            if nodes.len() >= budget {
                break;
            }
            let child = at.child(k);
            let sym = symbols.choose(rng).unwrap().to_string();
            let kind = match rng.gen_range(0..3) {
                0 => {
                    open.insert(0, child.clone());
                    NodeKind::Interior(sym)
                }
                1 => NodeKind::SubstitutionSlot(sym),
                _ => NodeKind::Terminal(["a", "b", "c"].choose(rng).unwrap().to_string()),
            };
            nodes.insert(child, kind);
        }
    }
    if aux {
        let leaves: Vec<GornAddress> = nodes
            .keys()
            .filter(|a| !a.is_root() && !nodes.contains_key(&a.child(1)))
            .cloned()
            .collect();
        let at = leaves.choose(rng).expect("the root has a child").clone();
        nodes.insert(at, NodeKind::Foot(root.to_string()));
    }
    SyntaxTree::from_nodes(nodes).expect("generated trees are well formed")
}

/// Leaf labels left to right, computed straight from the node map:
/// slots as `⟨X↓⟩`, feet as `⟨X*⟩`, interior leaves omitted.
pub fn leaves_oracle(t: &SyntaxTree) -> Vec<String> {
    let nodes = t.nodes();
    nodes
        .iter()
        .filter(|(a, _)| !nodes.contains_key(&a.child(1)))
        .filter_map(|(_, k)| match k {
            NodeKind::Terminal(s) => Some(s.clone()),
            NodeKind::SubstitutionSlot(s) => Some(format!("⟨{s}↓⟩")),
            NodeKind::Foot(s) => Some(format!("⟨{s}*⟩")),
            NodeKind::Interior(_) => None,
        })
        .collect()
}

/// The labels of the leaves below `at`, and the labels before and after.
pub fn split_leaves(t: &SyntaxTree, at: &GornAddress) -> (Vec<String>, Vec<String>, Vec<String>) {
    let nodes = t.nodes();
    let (mut u, mut v, mut z) = (Vec::new(), Vec::new(), Vec::new());
    for (a, k) in nodes {
        if nodes.contains_key(&a.child(1)) {
            continue;
        }
        let label = match k {
            NodeKind::Terminal(s) => s.clone(),
            NodeKind::SubstitutionSlot(s) => format!("⟨{s}↓⟩"),
            NodeKind::Foot(s) => format!("⟨{s}*⟩"),
            NodeKind::Interior(_) => continue,
        };
        if at.is_prefix_of(a) {
            v.push(label);
        } else if a < at {
            u.push(label);
        } else {
            z.push(label);
        }
    }
    (u, v, z)
}
