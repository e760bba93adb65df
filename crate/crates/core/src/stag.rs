//! Synchronous TAG: paired trees joined by links. Composing a guest pair at
//! one link member rewrites both trees at once; the member is consumed and
//! every other link, host's and guest's, is carried into the result.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::address::{rebase_address, GornAddress};
use crate::tag::{DerivationTree, TagError, TagGrammar};
use crate::tree::{self, NodeKind, SyntaxTree, TreeError};

/// `left ~ right`: a node address in the left tree tied to one in the right.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Link {
    pub left: GornAddress,
    pub right: GornAddress,
}

impl Link {
    pub fn new(left: GornAddress, right: GornAddress) -> Self {
        Link { left, right }
    }

    pub fn reflexive(at: GornAddress) -> Self {
        Link {
            left: at.clone(),
            right: at,
        }
    }

    pub fn is_reflexive(&self) -> bool {
        self.left == self.right
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}~{}", self.left, self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StagError {
    #[error("pair `{pair}` has no link member {member}")]
    LinkNotFound { pair: String, member: String },
    #[error("link {link} joins a {left} node to a {right} node; both sides must perform the same operation")]
    OperationMismatch {
        link: Link,
        left: &'static str,
        right: &'static str,
    },
    #[error("symbol mismatch at {addr}: site is {site}, incoming root is {incoming}")]
    SymbolMismatch {
        addr: GornAddress,
        site: String,
        incoming: String,
    },
    #[error("link endpoint {endpoint} of `{pair}` does not resolve")]
    UnresolvedEndpoint { pair: String, endpoint: String },
    #[error("pair `{pair}` lists link {link} twice")]
    DuplicateLink { pair: String, link: Link },
    #[error("duplicate pair name `{0}`")]
    DuplicateName(String),
    #[error("unknown pair `{0}`")]
    UnknownPair(String),
    #[error(transparent)]
    Tree(TreeError),
    #[error(transparent)]
    Tag(#[from] TagError),
}

impl From<TreeError> for StagError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::SymbolMismatch { addr, site, incoming } => StagError::SymbolMismatch { addr, site, incoming },
            other => StagError::Tree(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagPair {
    name: String,
    left: SyntaxTree,
    right: SyntaxTree,
    links: Vec<Link>,
}

impl StagPair {
    pub fn new(
        name: impl Into<String>,
        left: SyntaxTree,
        right: SyntaxTree,
        links: Vec<Link>,
    ) -> Result<Self, StagError> {
        let name = name.into();
        for (i, l) in links.iter().enumerate() {
            if !left.contains(&l.left) {
                return Err(StagError::UnresolvedEndpoint {
                    pair: name,
                    endpoint: format!("left {}", l.left),
                });
            }
            if !right.contains(&l.right) {
                return Err(StagError::UnresolvedEndpoint {
                    pair: name,
                    endpoint: format!("right {}", l.right),
                });
            }
            if links[..i].contains(l) {
                return Err(StagError::DuplicateLink {
                    pair: name,
                    link: l.clone(),
                });
            }
        }
        Ok(StagPair {
            name,
            left,
            right,
            links,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn left(&self) -> &SyntaxTree {
        &self.left
    }

    pub fn right(&self) -> &SyntaxTree {
        &self.right
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StagGrammar {
    pairs: BTreeMap<String, StagPair>,
}

impl StagGrammar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pair: StagPair) -> Result<(), StagError> {
        if self.pairs.contains_key(&pair.name) {
            return Err(StagError::DuplicateName(pair.name));
        }
        self.pairs.insert(pair.name.clone(), pair);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&StagPair> {
        self.pairs.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &StagPair> {
        self.pairs.values()
    }

    pub fn left_grammar(&self) -> Result<TagGrammar, TagError> {
        TagGrammar::from_entries(self.pairs.values().map(|p| (p.name.as_str(), p.left.clone())))
    }

    pub fn right_grammar(&self) -> Result<TagGrammar, TagError> {
        TagGrammar::from_entries(self.pairs.values().map(|p| (p.name.as_str(), p.right.clone())))
    }
}

enum Step {
    Substitute,
    Adjoin,
}

fn step_for(link: &Link, left: &NodeKind, right: &NodeKind) -> Result<Step, StagError> {
    match (left, right) {
        (NodeKind::SubstitutionSlot(_), NodeKind::SubstitutionSlot(_)) => Ok(Step::Substitute),
        (NodeKind::Interior(_), NodeKind::Interior(_)) => Ok(Step::Adjoin),
        _ => Err(StagError::OperationMismatch {
            link: link.clone(),
            left: left.kind_name(),
            right: right.kind_name(),
        }),
    }
}

/// Composes `guest` into `host` at link member `member`. The result keeps
/// the host's name; its links are the host's minus the consumed member plus
/// the guest's, all moved to their addresses in the new trees.
pub fn stag_compose(host: &StagPair, member: usize, guest: &StagPair) -> Result<StagPair, StagError> {
    let link = host.links.get(member).ok_or_else(|| StagError::LinkNotFound {
        pair: host.name.clone(),
        member: member.to_string(),
    })?;
    let step = step_for(link, host.left.node_at(&link.left)?, host.right.node_at(&link.right)?)?;
    let (left, right, left_foot, right_foot) = match step {
        Step::Substitute => (
            tree::substitute(&host.left, &link.left, &guest.left)?,
            tree::substitute(&host.right, &link.right, &guest.right)?,
            None,
            None,
        ),
        Step::Adjoin => {
            let left = tree::adjoin(&host.left, &link.left, &guest.left)?;
            let right = tree::adjoin(&host.right, &link.right, &guest.right)?;
            let lf = guest.left.foot().map(|(f, _)| f.clone());
            let rf = guest.right.foot().map(|(f, _)| f.clone());
            (left, right, lf, rf)
        }
    };
    let carry = |a: &GornAddress, site: &GornAddress, foot: &Option<GornAddress>| match foot {
        Some(f) => rebase_address(a, site, f),
        None => a.clone(),
    };
    let mut links: Vec<Link> = host
        .links
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != member)
        .map(|(_, l)| {
            Link::new(
                carry(&l.left, &link.left, &left_foot),
                carry(&l.right, &link.right, &right_foot),
            )
        })
        .collect();
    links.extend(
        guest
            .links
            .iter()
            .map(|l| Link::new(link.left.join(&l.left), link.right.join(&l.right))),
    );
    StagPair::new(host.name.clone(), left, right, links)
}

/// A derivation over pairs; each edge names the link member of the parent
/// pair (as written in the grammar) that the child was composed at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StagDerivation {
    pub name: String,
    pub children: Vec<StagEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StagEdge {
    pub link: Link,
    pub node: StagDerivation,
}

impl StagDerivation {
    pub fn leaf(name: impl Into<String>) -> Self {
        StagDerivation {
            name: name.into(),
            children: Vec::new(),
        }
    }

    pub fn with(mut self, link: Link, child: StagDerivation) -> Self {
        self.children.push(StagEdge { link, node: child });
        self
    }

    fn project(&self, side: fn(&Link) -> &GornAddress) -> DerivationTree {
        DerivationTree {
            name: self.name.clone(),
            children: self
                .children
                .iter()
                .map(|e| crate::tag::DerivationEdge {
                    addr: side(&e.link).clone(),
                    node: e.node.project(side),
                })
                .collect(),
        }
    }

    /// The derivation as seen by the left grammar alone.
    pub fn left_projection(&self) -> DerivationTree {
        self.project(|l| &l.left)
    }

    pub fn right_projection(&self) -> DerivationTree {
        self.project(|l| &l.right)
    }
}

/// Replays a pair derivation bottom-up.
pub fn replay(grammar: &StagGrammar, d: &StagDerivation) -> Result<StagPair, StagError> {
    let mut current = grammar
        .get(&d.name)
        .cloned()
        .ok_or_else(|| StagError::UnknownPair(d.name.clone()))?;
    let mut moves: Vec<(Link, GornAddress, GornAddress)> = Vec::new();
    for edge in &d.children {
        let child = replay(grammar, &edge.node)?;
        let target = moves.iter().fold(edge.link.clone(), |l, (site, lf, rf)| {
            Link::new(
                rebase_address(&l.left, &site.left, lf),
                rebase_address(&l.right, &site.right, rf),
            )
        });
        let member = current
            .links
            .iter()
            .position(|l| *l == target)
            .ok_or_else(|| StagError::LinkNotFound {
                pair: d.name.clone(),
                member: edge.link.to_string(),
            })?;
        let adjoins = matches!(current.left.node_at(&target.left)?, NodeKind::Interior(_));
        current = stag_compose(&current, member, &child)?;
        if adjoins {
            let lf = child.left.foot().map(|(f, _)| f.clone()).expect("auxiliary");
            let rf = child.right.foot().map(|(f, _)| f.clone()).expect("auxiliary");
            moves.push((target, lf, rf));
        }
    }
    Ok(current)
}
