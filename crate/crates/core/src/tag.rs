//! Plain TAG grammars, derivation trees, and replay of a derivation tree
//! into the derived tree it describes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::address::{rebase_address, GornAddress};
use crate::diag::{Diagnostic, DiagnosticKind};
use crate::tree::{self, NodeKind, SyntaxTree, TreeClass, TreeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryTree {
    tree: SyntaxTree,
    class: TreeClass,
}

impl ElementaryTree {
    pub fn new(tree: SyntaxTree) -> Result<Self, TreeError> {
        let class = tree.classify()?;
        Ok(ElementaryTree { tree, class })
    }

    pub fn tree(&self) -> &SyntaxTree {
        &self.tree
    }

    pub fn class(&self) -> TreeClass {
        self.class
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TagError {
    #[error("duplicate tree name `{0}`")]
    DuplicateName(String),
    #[error("unknown tree `{name}` at {path}")]
    UnknownTree { path: String, name: String },
    #[error("edge address {addr} does not exist in `{parent}` (at {path})")]
    EdgeAddressInvalid {
        path: String,
        parent: String,
        addr: GornAddress,
    },
    #[error("cannot attach `{child}` at {addr} of `{parent}` (at {path}): {detail}")]
    OperationMismatch {
        path: String,
        parent: String,
        child: String,
        addr: GornAddress,
        detail: String,
    },
    #[error("`{child}` has root {incoming} but {addr} of `{parent}` is {site} (at {path})")]
    SymbolMismatch {
        path: String,
        parent: String,
        child: String,
        addr: GornAddress,
        site: String,
        incoming: String,
    },
    #[error("two edges at {addr} under `{parent}` (at {path})")]
    DuplicateEdge {
        path: String,
        parent: String,
        addr: GornAddress,
    },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

impl TagError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        let (kind, location) = match self {
            TagError::DuplicateName(n) => (DiagnosticKind::DuplicateName, n.clone()),
            TagError::UnknownTree { path, .. } => (DiagnosticKind::UnknownTree, path.clone()),
            TagError::EdgeAddressInvalid { path, .. } => (DiagnosticKind::EdgeAddressInvalid, path.clone()),
            TagError::OperationMismatch { path, .. } => (DiagnosticKind::OperationMismatch, path.clone()),
            TagError::SymbolMismatch { path, .. } => (DiagnosticKind::SymbolMismatch, path.clone()),
            TagError::DuplicateEdge { path, .. } => (DiagnosticKind::DuplicateEdge, path.clone()),
            TagError::Tree(_) => (DiagnosticKind::MalformedTree, String::new()),
        };
        Diagnostic::new(kind, location, self.to_string())
    }
}

/// A set of named elementary trees.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagGrammar {
    entries: BTreeMap<String, ElementaryTree>,
}

impl TagGrammar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tree: SyntaxTree) -> Result<(), TagError> {
        let name = name.into();
        if self.entries.contains_key(&name) {
            return Err(TagError::DuplicateName(name));
        }
        self.entries.insert(name, ElementaryTree::new(tree)?);
        Ok(())
    }

    pub fn from_entries<'a>(entries: impl IntoIterator<Item = (&'a str, SyntaxTree)>) -> Result<Self, TagError> {
        let mut g = TagGrammar::new();
        for (name, tree) in entries {
            g.insert(name, tree)?;
        }
        Ok(g)
    }

    pub fn get(&self, name: &str) -> Option<&ElementaryTree> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ElementaryTree)> {
        self.entries.iter().map(|(n, e)| (n.as_str(), e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Which elementary tree was used, and what was attached to it where.
/// Edge addresses refer to the parent's elementary tree as written.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DerivationTree {
    pub name: String,
    pub children: Vec<DerivationEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DerivationEdge {
    pub addr: GornAddress,
    pub node: DerivationTree,
}

impl DerivationTree {
    pub fn leaf(name: impl Into<String>) -> Self {
        DerivationTree {
            name: name.into(),
            children: Vec::new(),
        }
    }

    pub fn with(mut self, addr: GornAddress, child: DerivationTree) -> Self {
        self.children.push(DerivationEdge { addr, node: child });
        self
    }

    /// Number of operations (edges) in the whole tree.
    pub fn operations(&self) -> usize {
        self.children.iter().map(|e| 1 + e.node.operations()).sum()
    }

    /// Order-insensitive rendering: `cooked(1:John,2.2:beans(1:dried))`.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        self.write_canonical(&mut out);
        out
    }

    fn write_canonical(&self, out: &mut String) {
        out.push_str(&self.name);
        if self.children.is_empty() {
            return;
        }
        let mut kids: Vec<(String, &DerivationEdge)> = self.children.iter().map(|e| (e.addr.to_string(), e)).collect();
        kids.sort_by(|a, b| {
            a.1.addr
                .cmp(&b.1.addr)
                .then_with(|| a.1.node.canonical().cmp(&b.1.node.canonical()))
        });
        out.push('(');
        for (i, (a, e)) in kids.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(a);
            out.push(':');
            e.node.write_canonical(out);
        }
        out.push(')');
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        for e in &self.children {
            writeln!(f, "{:width$}{} <- {}", "", e.addr, e.node.name, width = 2 * depth + 2)?;
            e.node.write_indented(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for DerivationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.name)?;
        self.write_indented(f, 0)
    }
}

fn child_path(path: &str, addr: &GornAddress) -> String {
    format!("{path}/{addr}")
}

fn check(grammar: &TagGrammar, d: &DerivationTree, path: &str, out: &mut Vec<TagError>) {
    let parent = grammar.get(&d.name);
    if parent.is_none() {
        out.push(TagError::UnknownTree {
            path: path.to_string(),
            name: d.name.clone(),
        });
    }
    let mut seen = BTreeSet::new();
    for edge in &d.children {
        let cpath = child_path(path, &edge.addr);
        check(grammar, &edge.node, &cpath, out);
        let Some(parent) = parent else { continue };
        if !seen.insert(&edge.addr) {
            out.push(TagError::DuplicateEdge {
                path: path.to_string(),
                parent: d.name.clone(),
                addr: edge.addr.clone(),
            });
            continue;
        }
        let Ok(site) = parent.tree().node_at(&edge.addr) else {
            out.push(TagError::EdgeAddressInvalid {
                path: path.to_string(),
                parent: d.name.clone(),
                addr: edge.addr.clone(),
            });
            continue;
        };
        let Some(child) = grammar.get(&edge.node.name) else {
            continue;
        };
        let mismatch = |detail: String| TagError::OperationMismatch {
            path: cpath.clone(),
            parent: d.name.clone(),
            child: edge.node.name.clone(),
            addr: edge.addr.clone(),
            detail,
        };
        let (needed, symbol) = match site {
            NodeKind::SubstitutionSlot(s) => (TreeClass::Initial, s),
            NodeKind::Interior(s) => (TreeClass::Auxiliary, s),
            other => {
                out.push(mismatch(format!(
                    "{} node {other} is not a composition site",
                    other.kind_name()
                )));
                continue;
            }
        };
        if child.class() != needed {
            let op = if needed == TreeClass::Initial {
                "substitution slot"
            } else {
                "adjunction site"
            };
            out.push(mismatch(format!(
                "{op} needs an {needed} tree, `{}` is {}",
                edge.node.name,
                child.class()
            )));
            continue;
        }
        if child.tree().root_symbol() != symbol {
            out.push(TagError::SymbolMismatch {
                path: cpath.clone(),
                parent: d.name.clone(),
                child: edge.node.name.clone(),
                addr: edge.addr.clone(),
                site: symbol.clone(),
                incoming: child.tree().root_symbol().to_string(),
            });
        }
    }
}

/// Every reason `replay` would fail, one diagnostic each. Empty iff replay
/// succeeds.
pub fn validate_derivation(grammar: &TagGrammar, d: &DerivationTree) -> Vec<Diagnostic> {
    let mut errs = Vec::new();
    check(grammar, d, "root", &mut errs);
    errs.iter().map(TagError::to_diagnostic).collect()
}

/// Rebuilds the derived tree bottom-up: children are replayed first, then
/// attached to their parent at the recorded addresses.
pub fn replay(grammar: &TagGrammar, d: &DerivationTree) -> Result<SyntaxTree, TagError> {
    let mut errs = Vec::new();
    check(grammar, d, "root", &mut errs);
    if let Some(first) = errs.into_iter().next() {
        return Err(first);
    }
    replay_checked(grammar, d)
}

fn replay_checked(grammar: &TagGrammar, d: &DerivationTree) -> Result<SyntaxTree, TagError> {
    let elementary = grammar.get(&d.name).expect("checked");
    let mut current = elementary.tree().clone();
    // adjunctions already performed at this level: (site, foot) in current coordinates
    let mut moves: Vec<(GornAddress, GornAddress)> = Vec::new();
    for edge in &d.children {
        let child = replay_checked(grammar, &edge.node)?;
        let site = moves
            .iter()
            .fold(edge.addr.clone(), |a, (s, f)| rebase_address(&a, s, f));
        match elementary.tree().node_at(&edge.addr)? {
            NodeKind::SubstitutionSlot(_) => current = tree::substitute(&current, &site, &child)?,
            _ => {
                let foot = child.foot().map(|(f, _)| f.clone()).expect("auxiliary keeps its foot");
                current = tree::adjoin(&current, &site, &child)?;
                moves.push((site, foot));
            }
        }
    }
    Ok(current)
}

/// Identifies a node by the elementary-tree instance it came from and its
/// address inside that elementary tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Origin {
    pub instance: usize,
    pub address: GornAddress,
}

impl Origin {
    pub fn new(instance: usize, address: GornAddress) -> Self {
        Origin { instance, address }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrackError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("address {address} of instance #{instance} already has an adjunction")]
    AlreadyAdjoined { instance: usize, address: GornAddress },
}

/// A derived tree that remembers, for every node, which elementary-tree
/// instance contributed it. Used to turn operation sequences back into
/// derivation trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackedTree {
    tree: SyntaxTree,
    origins: BTreeMap<GornAddress, Origin>,
    adjoined: BTreeSet<Origin>,
}

impl TrackedTree {
    pub fn new(tree: SyntaxTree, instance: usize) -> Self {
        let origins = tree
            .nodes()
            .keys()
            .map(|a| (a.clone(), Origin::new(instance, a.clone())))
            .collect();
        TrackedTree {
            tree,
            origins,
            adjoined: BTreeSet::new(),
        }
    }

    pub fn tree(&self) -> &SyntaxTree {
        &self.tree
    }

    pub fn origin(&self, addr: &GornAddress) -> Option<&Origin> {
        self.origins.get(addr)
    }

    pub fn is_adjoined(&self, origin: &Origin) -> bool {
        self.adjoined.contains(origin)
    }

    pub fn substitute(&self, addr: &GornAddress, filler: &SyntaxTree, instance: usize) -> Result<Self, TrackError> {
        let tree = tree::substitute(&self.tree, addr, filler)?;
        let guest = TrackedTree::new(filler.clone(), instance);
        Ok(TrackedTree {
            tree,
            origins: tree::graft(&self.origins, addr, &guest.origins, None),
            adjoined: self.adjoined.clone(),
        })
    }

    /// Adjoins and returns the foot address used, so callers can rebase
    /// their own addresses.
    pub fn adjoin(
        &self,
        addr: &GornAddress,
        aux: &SyntaxTree,
        instance: usize,
    ) -> Result<(Self, GornAddress), TrackError> {
        let origin = self
            .origin(addr)
            .cloned()
            .ok_or_else(|| TreeError::AddressNotFound(addr.clone()))?;
        if self.adjoined.contains(&origin) {
            return Err(TrackError::AlreadyAdjoined {
                instance: origin.instance,
                address: origin.address,
            });
        }
        let tree = tree::adjoin(&self.tree, addr, aux)?;
        let foot = aux.foot().map(|(f, _)| f.clone()).expect("adjoin checked the class");
        let guest = TrackedTree::new(aux.clone(), instance);
        let mut adjoined = self.adjoined.clone();
        adjoined.insert(origin);
        Ok((
            TrackedTree {
                tree,
                origins: tree::graft(&self.origins, addr, &guest.origins, Some(&foot)),
                adjoined,
            },
            foot,
        ))
    }
}
