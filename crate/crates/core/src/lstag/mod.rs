//! Link-Sharing TAG.
//!
//! Each pair carries two link sets. `delta` holds ordinary links between the
//! left (constituency) tree and the right (dependency) tree. `phi` holds
//! reflexive links on the right tree only; they are never composed into
//! directly. Instead, when a pair with a non-empty `phi` is composed into a
//! host, its phi links are matched position by position with the host's
//! live links, and each match becomes one [`SharedLinkGroup`]: a single left
//! address tied to several right addresses. A later substitution on such a
//! group fills every right address with one shared instance of the guest,
//! which turns the right structure into a DAG.
//!
//! All phi links of a guest are consumed by the operation that introduces
//! it. Host links matched against them are replaced by the merged group;
//! they never survive next to it.

mod dag;
mod derived;
mod projection;

pub use dag::{NodeId, RightDag};
pub use derived::DerivedStructure;
pub use projection::{
    canonical_key, derivation_projections, instance_labels, DerivationGraph, DerivationRecord, GraphEdge,
    OperationKind, Site,
};

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::address::GornAddress;
use crate::diag::{Diagnostic, DiagnosticKind};
use crate::restrict::Correspondence;
use crate::stag::Link;
use crate::tag::{TagError, TagGrammar, TrackError};
use crate::tree::{SyntaxTree, TreeError};

/// How the canonical order of a pair's link lists is fixed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkOrder {
    /// Ascending Gorn order of the right endpoints.
    #[default]
    Gorn,
    /// Exactly as listed.
    Declared,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LstagPair {
    name: String,
    left: SyntaxTree,
    right: SyntaxTree,
    delta: Vec<Link>,
    phi: Vec<Link>,
    order: LinkOrder,
    correspondence: Option<Correspondence>,
}

impl LstagPair {
    /// Builds a pair without checking it; see [`validate_pair`]. Under
    /// [`LinkOrder::Gorn`] both lists are sorted by right endpoint.
    pub fn new(
        name: impl Into<String>,
        left: SyntaxTree,
        right: SyntaxTree,
        mut delta: Vec<Link>,
        mut phi: Vec<Link>,
        order: LinkOrder,
    ) -> Self {
        if order == LinkOrder::Gorn {
            delta.sort_by(|a, b| (&a.right, &a.left).cmp(&(&b.right, &b.left)));
            phi.sort_by(|a, b| (&a.right, &a.left).cmp(&(&b.right, &b.left)));
        }
        LstagPair {
            name: name.into(),
            left,
            right,
            delta,
            phi,
            order,
            correspondence: None,
        }
    }

    /// Declares which right node each left node stands for; used by the
    /// left-contiguity restriction.
    pub fn with_correspondence(mut self, c: Correspondence) -> Self {
        self.correspondence = Some(c);
        self
    }

    pub fn correspondence(&self) -> Option<&Correspondence> {
        self.correspondence.as_ref()
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

    pub fn delta(&self) -> &[Link] {
        &self.delta
    }

    pub fn phi(&self) -> &[Link] {
        &self.phi
    }

    pub fn order(&self) -> LinkOrder {
        self.order
    }

    /// Right-tree addresses of the phi links, in canonical order.
    pub fn phi_addresses(&self) -> Vec<GornAddress> {
        self.phi.iter().map(|l| l.right.clone()).collect()
    }

    pub fn is_coordinating(&self) -> bool {
        !self.phi.is_empty()
    }
}

/// Structural checks on a single pair: phi reflexivity, delta/phi
/// disjointness, endpoint resolution, and matching tree classes.
pub fn validate_pair(p: &LstagPair) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let at = |what: &str| format!("{}.{what}", p.name);
    for (side, tree) in [("left", &p.left), ("right", &p.right)] {
        if let Err(e) = tree.classify() {
            out.push(Diagnostic::new(DiagnosticKind::MalformedTree, at(side), e.to_string()));
        }
    }
    if let (Some(l), Some(r)) = (p.left.class(), p.right.class()) {
        if l != r {
            out.push(Diagnostic::new(
                DiagnosticKind::ClassMismatch,
                p.name.clone(),
                format!("left tree is {l} but right tree is {r}; the pair can never compose"),
            ));
        }
    }
    for link in &p.delta {
        if !p.left.contains(&link.left) {
            out.push(Diagnostic::new(
                DiagnosticKind::UnresolvedEndpoint,
                at("delta"),
                format!("left endpoint of {link} is not in the left tree"),
            ));
        }
        if !p.right.contains(&link.right) {
            out.push(Diagnostic::new(
                DiagnosticKind::UnresolvedEndpoint,
                at("delta"),
                format!("right endpoint of {link} is not in the right tree"),
            ));
        }
    }
    for link in &p.phi {
        if !link.is_reflexive() {
            out.push(Diagnostic::new(
                DiagnosticKind::NotReflexive,
                at("phi"),
                format!("{link} is not of the form a~a"),
            ));
        }
        for end in [&link.left, &link.right] {
            if !p.right.contains(end) {
                out.push(Diagnostic::new(
                    DiagnosticKind::UnresolvedEndpoint,
                    at("phi"),
                    format!("endpoint {end} of {link} is not in the right tree"),
                ));
            }
        }
        if p.delta.contains(link) {
            out.push(Diagnostic::new(
                DiagnosticKind::NotDisjoint,
                p.name.clone(),
                format!("{link} is in both delta and phi"),
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LstagGrammar {
    pairs: BTreeMap<String, LstagPair>,
}

impl LstagGrammar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, pair: LstagPair) -> Result<(), LstagError> {
        if self.pairs.contains_key(&pair.name) {
            return Err(LstagError::DuplicateName(pair.name));
        }
        self.pairs.insert(pair.name.clone(), pair);
        Ok(())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = LstagPair>) -> Result<Self, LstagError> {
        let mut g = LstagGrammar::new();
        for p in pairs {
            g.insert(p)?;
        }
        Ok(g)
    }

    pub fn get(&self, name: &str) -> Option<&LstagPair> {
        self.pairs.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &LstagPair> {
        self.pairs.values()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn remove(&mut self, name: &str) -> Option<LstagPair> {
        self.pairs.remove(name)
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        self.pairs.values().flat_map(validate_pair).collect()
    }

    /// The left projections as a plain TAG, keyed by pair name.
    pub fn left_grammar(&self) -> Result<TagGrammar, TagError> {
        TagGrammar::from_entries(self.pairs.values().map(|p| (p.name.as_str(), p.left.clone())))
    }

    pub fn right_grammar(&self) -> Result<TagGrammar, TagError> {
        TagGrammar::from_entries(self.pairs.values().map(|p| (p.name.as_str(), p.right.clone())))
    }
}

/// One left address tied to one or more right addresses. A group with a
/// single right address is an ordinary link.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SharedLinkGroup<R = GornAddress> {
    pub left: GornAddress,
    pub right: Vec<R>,
}

impl<R> SharedLinkGroup<R> {
    pub fn singleton(left: GornAddress, right: R) -> Self {
        SharedLinkGroup {
            left,
            right: vec![right],
        }
    }

    pub fn is_shared(&self) -> bool {
        self.right.len() > 1
    }
}

impl From<Link> for SharedLinkGroup {
    fn from(l: Link) -> Self {
        SharedLinkGroup::singleton(l.left, l.right)
    }
}

impl<R: fmt::Display> fmt::Display for SharedLinkGroup<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}~{{", self.left)?;
        for (i, r) in self.right.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("}")
    }
}

/// The sharing step: pairs the i-th host group with the i-th phi address
/// (both lists already in canonical order) and adds the phi address, mapped
/// into the composed right structure by `rebase`, to that group's right
/// side. Host groups beyond the phi list pass through unchanged. Every phi
/// address is used exactly once.
pub fn link_share<R: Clone>(
    delta: &[SharedLinkGroup<R>],
    phi: &[GornAddress],
    rebase: impl Fn(&GornAddress) -> R,
) -> Result<Vec<SharedLinkGroup<R>>, LstagError> {
    if delta.len() < phi.len() {
        return Err(LstagError::CardinalityViolation {
            host: delta.len(),
            phi: phi.len(),
        });
    }
    Ok(delta
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut g = g.clone();
            if let Some(eta) = phi.get(i) {
                g.right.push(rebase(eta));
            }
            g
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LstagError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("address {address} of instance #{instance} already has an adjunction")]
    AlreadyAdjoined { instance: usize, address: GornAddress },
    #[error("left site is a {left} node but right site is a {right} node; both sides must perform the same operation")]
    OperationMismatch { left: &'static str, right: &'static str },
    #[error("no live link joins left {left} to right {right}; substitution needs a link (use a shared substitution for shared groups)")]
    NotLinked { left: GornAddress, right: GornAddress },
    #[error("left site belongs to `{left}` but right site belongs to `{right}`; both sides must adjoin into the same elementary pair")]
    DifferentHosts { left: String, right: String },
    #[error("{phi} phi links to share but only {host} live host links")]
    CardinalityViolation { host: usize, phi: usize },
    #[error("no live link group {0}")]
    GroupNotLive(String),
    #[error("inconsistent history: {0}")]
    InconsistentHistory(String),
    #[error("duplicate pair name `{0}`")]
    DuplicateName(String),
    #[error("unknown pair `{0}`")]
    UnknownPair(String),
}

impl From<TrackError> for LstagError {
    fn from(e: TrackError) -> Self {
        match e {
            TrackError::Tree(t) => LstagError::Tree(t),
            TrackError::AlreadyAdjoined { instance, address } => LstagError::AlreadyAdjoined { instance, address },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::addr;
    use crate::diag::kinds;

    fn t(s: &str) -> SyntaxTree {
        s.parse().unwrap()
    }

    fn l(a: &str, b: &str) -> Link {
        Link::new(addr(a), addr(b))
    }

    fn eats() -> LstagPair {
        LstagPair::new(
            "eats",
            t(r#"V(V* Conj("and") V("eats"))"#),
            t(r#"S(NP! VP(V("eats") NP!) S*)"#),
            vec![],
            vec![Link::reflexive(addr("1")), Link::reflexive(addr("2.2"))],
            LinkOrder::Gorn,
        )
    }

    #[test]
    fn coordinating_pair_is_valid() {
        assert!(validate_pair(&eats()).is_empty());
    }

    #[test]
    fn pair_diagnostics() {
        let p = LstagPair::new(
            "p",
            t("S(NP! VP)"),
            t("S(NP! VP)"),
            vec![],
            vec![l("1", "2")],
            LinkOrder::Gorn,
        );
        assert_eq!(kinds(&validate_pair(&p)), [DiagnosticKind::NotReflexive]);

        let p = LstagPair::new(
            "p",
            t("S(NP! VP)"),
            t("S(NP! VP)"),
            vec![l("1", "1")],
            vec![l("1", "1")],
            LinkOrder::Gorn,
        );
        assert_eq!(kinds(&validate_pair(&p)), [DiagnosticKind::NotDisjoint]);

        let p = LstagPair::new(
            "p",
            t("S(NP! VP)"),
            t("S(NP! VP)"),
            vec![l("3", "1")],
            vec![Link::reflexive(addr("4"))],
            LinkOrder::Gorn,
        );
        assert_eq!(
            kinds(&validate_pair(&p)),
            [
                DiagnosticKind::UnresolvedEndpoint,
                DiagnosticKind::UnresolvedEndpoint,
                DiagnosticKind::UnresolvedEndpoint
            ]
        );

        let p = LstagPair::new("p", t("S(S* VP)"), t("S(NP! VP)"), vec![], vec![], LinkOrder::Gorn);
        assert_eq!(kinds(&validate_pair(&p)), [DiagnosticKind::ClassMismatch]);
    }

    #[test]
    fn gorn_order_is_the_default() {
        let p = LstagPair::new(
            "p",
            t("S(A B)"),
            t("S(A B)"),
            vec![l("2", "2"), l("1", "1")],
            vec![],
            LinkOrder::Gorn,
        );
        assert_eq!(p.delta(), &[l("1", "1"), l("2", "2")]);
        let p = LstagPair::new(
            "p",
            t("S(A B)"),
            t("S(A B)"),
            vec![l("2", "2"), l("1", "1")],
            vec![],
            LinkOrder::Declared,
        );
        assert_eq!(p.delta(), &[l("2", "2"), l("1", "1")]);
    }

    #[test]
    fn sharing_pairs_by_position() {
        let delta: Vec<SharedLinkGroup> = vec![l("1", "1").into(), l("2.2", "2.2").into()];
        // identity rebase, tagging which side each right address came from
        let out = link_share(&delta, &[addr("1"), addr("2.2")], |a| a.clone()).unwrap();
        assert_eq!(
            out,
            vec![
                SharedLinkGroup {
                    left: addr("1"),
                    right: vec![addr("1"), addr("1")]
                },
                SharedLinkGroup {
                    left: addr("2.2"),
                    right: vec![addr("2.2"), addr("2.2")]
                },
            ]
        );
        let shifted = link_share(&delta, &[addr("1"), addr("2.2")], |a| addr("7").join(a)).unwrap();
        assert_eq!(shifted[0].right, [addr("1"), addr("7.1")]);
        assert_eq!(shifted[1].right, [addr("2.2"), addr("7.2.2")]);
    }

    #[test]
    fn empty_phi_passes_everything_through() {
        let delta: Vec<SharedLinkGroup> = vec![l("2.2", "3").into(), l("1", "1").into()];
        assert_eq!(link_share(&delta, &[], |a| a.clone()).unwrap(), delta);
    }

    #[test]
    fn too_many_phi_links() {
        let delta: Vec<SharedLinkGroup> = vec![l("1", "1").into()];
        assert_eq!(
            link_share(&delta, &[addr("1"), addr("2")], |a| a.clone()),
            Err(LstagError::CardinalityViolation { host: 1, phi: 2 })
        );
    }

    #[test]
    fn permuting_phi_permutes_the_groups() {
        let delta: Vec<SharedLinkGroup> = vec![l("1", "1").into(), l("2.2", "2.2").into()];
        let a = link_share(&delta, &[addr("1"), addr("2.2")], |a| a.clone()).unwrap();
        let b = link_share(&delta, &[addr("2.2"), addr("1")], |a| a.clone()).unwrap();
        assert_eq!(a[0].right[1], b[1].right[1]);
        assert_eq!(a[1].right[1], b[0].right[1]);
        assert_ne!(a, b);
    }
}
