//! Well-formedness restrictions on elementary pairs.
//!
//! Two checks. Left contiguity: the right nodes that the left tree stands
//! for (its correspondence image) must form one dominance-connected piece,
//! so the left tree never skips over part of the right tree. Lexical
//! contiguity: the terminals of a tree form one block on its frontier, with
//! no slot or foot between them. Coordinating pairs (non-empty phi) must be
//! lexically contiguous on both sides.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::address::GornAddress;
use crate::diag::{Diagnostic, DiagnosticKind};
use crate::lstag::{LstagGrammar, LstagPair};
use crate::tree::{NodeKind, SyntaxTree};

/// Left-tree address to right-tree address.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Correspondence {
    pairs: BTreeMap<GornAddress, GornAddress>,
}

impl Correspondence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry; returns false if `left` was already mapped.
    pub fn insert(&mut self, left: GornAddress, right: GornAddress) -> bool {
        if self.pairs.contains_key(&left) {
            return false;
        }
        self.pairs.insert(left, right);
        true
    }

    /// Maps every node of `tree` to itself.
    pub fn identity(tree: &SyntaxTree) -> Self {
        Correspondence {
            pairs: tree.nodes().keys().map(|a| (a.clone(), a.clone())).collect(),
        }
    }

    pub fn pairs(&self) -> &BTreeMap<GornAddress, GornAddress> {
        &self.pairs
    }

    pub fn image(&self) -> BTreeSet<GornAddress> {
        self.pairs.values().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl FromIterator<(GornAddress, GornAddress)> for Correspondence {
    fn from_iter<I: IntoIterator<Item = (GornAddress, GornAddress)>>(iter: I) -> Self {
        let mut c = Correspondence::new();
        for (l, r) in iter {
            c.insert(l, r);
        }
        c
    }
}

impl fmt::Display for Correspondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (l, r)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l} -> {r}")?;
        }
        f.write_str("]")
    }
}

/// Injectivity and endpoint resolution.
pub fn validate_correspondence(p: &LstagPair, c: &Correspondence) -> Vec<Diagnostic> {
    let at = format!("{}.correspond", p.name());
    let mut out = Vec::new();
    let mut seen: BTreeMap<&GornAddress, &GornAddress> = BTreeMap::new();
    for (l, r) in c.pairs() {
        if !p.left().contains(l) {
            out.push(Diagnostic::new(
                DiagnosticKind::InvalidCorrespondence,
                &at,
                format!("{l} is not a node of the left tree"),
            ));
        }
        if !p.right().contains(r) {
            out.push(Diagnostic::new(
                DiagnosticKind::InvalidCorrespondence,
                &at,
                format!("{r} is not a node of the right tree"),
            ));
        }
        if let Some(prev) = seen.insert(r, l) {
            out.push(Diagnostic::new(
                DiagnosticKind::InvalidCorrespondence,
                &at,
                format!("{prev} and {l} both map to {r}"),
            ));
        }
    }
    out
}

/// Nodes of `tree` that lie on a path between two image nodes but are not
/// in the image themselves.
pub fn gaps(tree: &SyntaxTree, image: &BTreeSet<GornAddress>) -> BTreeSet<GornAddress> {
    let Some(top) = image.iter().cloned().reduce(|a, b| a.common_ancestor(&b)) else {
        return BTreeSet::new();
    };
    let mut out = BTreeSet::new();
    for a in image {
        let mut cur = a.clone();
        while cur != top {
            cur = cur.parent().expect("top is an ancestor");
            if !image.contains(&cur) {
                out.insert(cur.clone());
            }
        }
    }
    out.retain(|a| tree.contains(a));
    out
}

/// Renders the right-tree material cut out by the gap rooted at `at`:
/// every descendant down to the next image node, e.g. `[S [NP↓] [VP]]`.
pub fn excised_segment(tree: &SyntaxTree, image: &BTreeSet<GornAddress>, at: &GornAddress) -> String {
    let kind = tree.node_at(at).expect("gap nodes are in the tree");
    let mut out = String::from("[");
    match kind {
        NodeKind::Interior(s) => out.push_str(s),
        NodeKind::SubstitutionSlot(s) => {
            out.push_str(s);
            out.push('↓');
        }
        NodeKind::Foot(s) => {
            out.push_str(s);
            out.push('*');
        }
        NodeKind::Terminal(t) => out.push_str(t),
    }
    for c in tree.children(at) {
        if !image.contains(&c) {
            out.push(' ');
            out.push_str(&excised_segment(tree, image, &c));
        }
    }
    out.push(']');
    out
}

/// Empty iff the correspondence image is dominance-connected in the right
/// tree. Each maximal run of skipped nodes is reported once.
pub fn check_left_contiguity(p: &LstagPair, c: &Correspondence) -> Vec<Diagnostic> {
    let image = c.image();
    let gap = gaps(p.right(), &image);
    gap.iter()
        .filter(|a| a.parent().is_none_or(|up| !gap.contains(&up)))
        .map(|a| {
            Diagnostic::new(
                DiagnosticKind::Discontiguous,
                p.name(),
                format!(
                    "left tree skips right-tree material; excised segment {} at {a}",
                    excised_segment(p.right(), &image, a)
                ),
            )
        })
        .collect()
}

/// Empty iff no slot or foot sits between two terminals on the frontier.
pub fn check_lexical_contiguity(t: &SyntaxTree) -> Vec<Diagnostic> {
    let frontier = t.frontier();
    let terms: Vec<usize> = frontier
        .iter()
        .enumerate()
        .filter(|(_, (_, k))| matches!(k, NodeKind::Terminal(_)))
        .map(|(i, _)| i)
        .collect();
    let (Some(&first), Some(&last)) = (terms.first(), terms.last()) else {
        return Vec::new();
    };
    frontier[first..last]
        .iter()
        .filter(|(_, k)| matches!(k, NodeKind::SubstitutionSlot(_) | NodeKind::Foot(_)))
        .map(|(a, k)| {
            Diagnostic::new(
                DiagnosticKind::LexicallyDiscontiguous,
                a.to_string(),
                format!(
                    "{} leaf between terminals of {}",
                    k.kind_name(),
                    t.partial_yield_string()
                ),
            )
        })
        .collect()
}

/// Every restriction that applies to one pair.
pub fn check_pair(p: &LstagPair) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if let Some(c) = p.correspondence() {
        let bad = validate_correspondence(p, c);
        if bad.is_empty() {
            out.extend(check_left_contiguity(p, c));
        } else {
            out.extend(bad);
        }
    }
    if p.is_coordinating() {
        for (side, tree) in [("left", p.left()), ("right", p.right())] {
            out.extend(
                check_lexical_contiguity(tree)
                    .into_iter()
                    .map(|d| Diagnostic::new(d.kind, format!("{}.{side}@{}", p.name(), d.location), d.message)),
            );
        }
    }
    out
}

/// Drops every pair with a restriction diagnostic and reports why.
pub fn admissible(g: &LstagGrammar) -> (LstagGrammar, Vec<Diagnostic>) {
    let mut kept = g.clone();
    let mut diags = Vec::new();
    for p in g.iter() {
        let d = check_pair(p);
        if !d.is_empty() {
            kept.remove(p.name());
            diags.extend(d);
        }
    }
    (kept, diags)
}
