use std::collections::BTreeMap;

use super::dag::{NodeId, RightDag};
use super::projection::{
    canonical_key, derivation_projections, DerivationGraph, DerivationRecord, OperationKind, Site,
};
use super::{link_share, LstagError, LstagPair, SharedLinkGroup};
use crate::address::{rebase_address, GornAddress};
use crate::tag::{DerivationTree, TrackedTree};
use crate::tree::{NodeKind, SyntaxTree, TreeError};

/// A partially or fully derived pair: the left tree, the right DAG, the link
/// groups still available for composition, and the operations so far.
///
/// Live groups are kept in Gorn order of their first right node, which is
/// the order sharing pairs them with a guest's phi links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedStructure {
    instances: Vec<String>,
    left: TrackedTree,
    right: RightDag,
    live: Vec<SharedLinkGroup<NodeId>>,
    history: Vec<DerivationRecord>,
}

impl DerivedStructure {
    /// Starts a derivation from one pair. Its phi links have no host to
    /// share with and are dropped.
    pub fn from_pair(pair: &LstagPair) -> Self {
        let right = RightDag::from_tree(pair.right(), 0);
        let live = pair
            .delta()
            .iter()
            .map(|l| SharedLinkGroup::singleton(l.left.clone(), right.resolve(&l.right).expect("validated endpoint")))
            .collect();
        let mut s = DerivedStructure {
            instances: vec![pair.name().to_string()],
            left: TrackedTree::new(pair.left().clone(), 0),
            right,
            live,
            history: Vec::new(),
        };
        s.sort_live();
        s
    }

    pub fn instances(&self) -> &[String] {
        &self.instances
    }

    pub fn left(&self) -> &TrackedTree {
        &self.left
    }

    pub fn left_tree(&self) -> &SyntaxTree {
        self.left.tree()
    }

    pub fn right(&self) -> &RightDag {
        &self.right
    }

    pub fn history(&self) -> &[DerivationRecord] {
        &self.history
    }

    pub fn operations(&self) -> usize {
        self.history.len()
    }

    pub fn live_groups(&self) -> &[SharedLinkGroup<NodeId>] {
        &self.live
    }

    /// Live groups with right nodes written as their first root path.
    pub fn live_links(&self) -> Vec<SharedLinkGroup> {
        let canon = self.right.canonical_addresses();
        self.live
            .iter()
            .map(|g| SharedLinkGroup {
                left: g.left.clone(),
                right: g.right.iter().map(|id| canon[id].clone()).collect(),
            })
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.left.tree().is_complete() && self.right.unfold().is_complete()
    }

    pub fn projections(&self) -> (DerivationTree, DerivationGraph) {
        derivation_projections(&self.instances, &self.history).expect("history is built consistently")
    }

    pub fn key(&self) -> String {
        canonical_key(&self.instances, &self.history)
    }

    fn sort_live(&mut self) {
        let canon = self.right.canonical_addresses();
        self.live.sort_by(|a, b| {
            let ka = (&canon[&a.right[0]], &a.left);
            let kb = (&canon[&b.right[0]], &b.left);
            ka.cmp(&kb)
        });
    }

    fn right_site(&self, id: NodeId) -> Site {
        let o = self.right.origin(id);
        Site {
            instance: o.instance,
            address: o.address.clone(),
        }
    }

    fn left_site(&self, addr: &GornAddress) -> Result<Site, LstagError> {
        let o = self
            .left
            .origin(addr)
            .ok_or_else(|| TreeError::AddressNotFound(addr.clone()))?;
        Ok(Site {
            instance: o.instance,
            address: o.address.clone(),
        })
    }

    /// Composes `guest` at a left site and a right site. Both sites must be
    /// slots (substitution) or both interior nodes (adjunction). A
    /// substitution needs a live link that joins exactly these two sites; an
    /// adjunction needs both sites to belong to the same instance and
    /// consumes a link between them if there is one.
    pub fn compose(
        &self,
        left_site: &GornAddress,
        right_site: &GornAddress,
        guest: &LstagPair,
    ) -> Result<Self, LstagError> {
        let lkind = self.left.tree().node_at(left_site)?;
        let rid = self
            .right
            .resolve(right_site)
            .ok_or_else(|| TreeError::AddressNotFound(right_site.clone()))?;
        let rkind = self.right.kind(rid);
        match (lkind, rkind) {
            (NodeKind::SubstitutionSlot(_), NodeKind::SubstitutionSlot(_)) => {
                let g = self
                    .live
                    .iter()
                    .position(|g| &g.left == left_site && g.right == [rid])
                    .ok_or_else(|| LstagError::NotLinked {
                        left: left_site.clone(),
                        right: right_site.clone(),
                    })?;
                self.substitute_group(g, guest)
            }
            (NodeKind::Interior(_), NodeKind::Interior(_)) => self.adjoin_node(left_site, rid, guest),
            _ => Err(LstagError::OperationMismatch {
                left: lkind.kind_name(),
                right: rkind.kind_name(),
            }),
        }
    }

    /// Substitutes `guest` into every site of a live group at once: the left
    /// slot gets one copy, and all right slots point at a single shared copy.
    pub fn shared_substitute(&self, group: &SharedLinkGroup, guest: &LstagPair) -> Result<Self, LstagError> {
        let i = self
            .live_links()
            .iter()
            .position(|g| g == group)
            .ok_or_else(|| LstagError::GroupNotLive(group.to_string()))?;
        self.substitute_group(i, guest)
    }

    /// Shared substitution into the live group whose left address is
    /// `left_addr`.
    pub fn share_at(&self, left_addr: &GornAddress, guest: &LstagPair) -> Result<Self, LstagError> {
        let i = self
            .live
            .iter()
            .position(|g| &g.left == left_addr)
            .ok_or_else(|| LstagError::GroupNotLive(format!("{left_addr}~{{..}}")))?;
        self.substitute_group(i, guest)
    }

    /// Substitution into live group `i`.
    pub fn substitute_group(&self, i: usize, guest: &LstagPair) -> Result<Self, LstagError> {
        let group = self
            .live
            .get(i)
            .ok_or_else(|| LstagError::GroupNotLive(format!("#{i}")))?
            .clone();
        let instance = self.instances.len();
        let left = self.left.substitute(&group.left, guest.left(), instance)?;
        let (right, ids) = self.right.substitute(&group.right, guest.right(), instance)?;
        let record = DerivationRecord {
            kind: if group.is_shared() {
                OperationKind::SharedSubstitution
            } else {
                OperationKind::Substitution
            },
            guest: instance,
            guest_name: guest.name().to_string(),
            left: self.left_site(&group.left)?,
            right: group.right.iter().map(|&id| self.right_site(id)).collect(),
        };
        let mut host = self.live.clone();
        host.remove(i);
        self.finish(left, right, host, &group.left, &ids, guest, record)
    }

    /// Adjunction at a left address and a right node.
    pub fn adjoin_node(&self, left_site: &GornAddress, rid: NodeId, guest: &LstagPair) -> Result<Self, LstagError> {
        let lo = self
            .left
            .origin(left_site)
            .ok_or_else(|| TreeError::AddressNotFound(left_site.clone()))?;
        let ro = self.right.origin(rid);
        if lo.instance != ro.instance {
            return Err(LstagError::DifferentHosts {
                left: self.instances[lo.instance].clone(),
                right: self.instances[ro.instance].clone(),
            });
        }
        let instance = self.instances.len();
        let (left, foot) = self.left.adjoin(left_site, guest.left(), instance)?;
        let (right, ids) = self.right.adjoin(rid, guest.right(), instance)?;
        let record = DerivationRecord {
            kind: OperationKind::Adjunction,
            guest: instance,
            guest_name: guest.name().to_string(),
            left: self.left_site(left_site)?,
            right: vec![self.right_site(rid)],
        };
        let mut host: Vec<SharedLinkGroup<NodeId>> = self
            .live
            .iter()
            .filter(|g| !(&g.left == left_site && g.right == [rid]))
            .cloned()
            .collect();
        for g in &mut host {
            g.left = rebase_address(&g.left, left_site, &foot);
        }
        self.finish(left, right, host, left_site, &ids, guest, record)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        left: TrackedTree,
        right: RightDag,
        host: Vec<SharedLinkGroup<NodeId>>,
        left_site: &GornAddress,
        ids: &BTreeMap<GornAddress, NodeId>,
        guest: &LstagPair,
        record: DerivationRecord,
    ) -> Result<Self, LstagError> {
        let mut next = DerivedStructure {
            instances: self.instances.clone(),
            left,
            right,
            live: host,
            history: self.history.clone(),
        };
        next.sort_live();
        let mut live = link_share(&next.live, &guest.phi_addresses(), |a| ids[a])?;
        live.extend(
            guest
                .delta()
                .iter()
                .map(|l| SharedLinkGroup::singleton(left_site.join(&l.left), ids[&l.right])),
        );
        next.live = live;
        next.sort_live();
        next.instances.push(guest.name().to_string());
        next.history.push(record);
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::addr;
    use crate::lstag::LinkOrder;
    use crate::stag::Link;

    fn t(s: &str) -> SyntaxTree {
        s.parse().unwrap()
    }

    fn l(a: &str, b: &str) -> Link {
        Link::new(addr(a), addr(b))
    }

    fn same(name: &str, tree: &str, delta: Vec<Link>) -> LstagPair {
        LstagPair::new(name, t(tree), t(tree), delta, vec![], LinkOrder::Gorn)
    }

    fn cooks() -> LstagPair {
        same(
            "cooks",
            r#"S(NP! VP(V("cooks") NP!))"#,
            vec![l("1", "1"), l("2.2", "2.2")],
        )
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

    fn group(left: &str, right: &[&str]) -> SharedLinkGroup {
        SharedLinkGroup {
            left: addr(left),
            right: right.iter().map(|r| addr(r)).collect(),
        }
    }

    fn john_cooks_and_eats_beans() -> (DerivedStructure, Vec<DerivedStructure>) {
        let s0 = DerivedStructure::from_pair(&cooks());
        let s1 = s0.compose(&addr("2.1"), &addr("ε"), &eats()).unwrap();
        let s2 = s1
            .share_at(&addr("1"), &same("John", r#"NP(PN("John"))"#, vec![]))
            .unwrap();
        let s3 = s2
            .share_at(&addr("2.2"), &same("beans", r#"NP(N("beans"))"#, vec![]))
            .unwrap();
        (s3, vec![s0, s1, s2])
    }

    #[test]
    fn coordination_shares_subject_and_object() {
        let (done, steps) = john_cooks_and_eats_beans();
        assert_eq!(
            steps[1].live_links(),
            vec![group("1", &["3.1", "1"]), group("2.2", &["3.2.2", "2.2"])]
        );
        assert_eq!(
            steps[1].left_tree().partial_yield_string(),
            "⟨NP↓⟩ cooks and eats ⟨NP↓⟩"
        );

        assert_eq!(done.left_tree().yield_string().unwrap(), "John cooks and eats beans");
        assert!(done.live_links().is_empty());
        assert!(done.is_complete());
        let shared = done.right().shared_nodes();
        assert_eq!(shared.len(), 2);
        assert!(shared.iter().all(|(_, d)| *d == 2));
        let john = done.right().resolve(&addr("1")).unwrap();
        assert_eq!(done.right().resolve(&addr("3.1")), Some(john));
        assert_eq!(done.right().kind(john), &NodeKind::Interior("NP".into()));
        assert!(done.right().is_acyclic() && !done.right().is_tree());

        let (left, right) = done.projections();
        assert_eq!(left.canonical(), "cooks(1:John,2.1:eats,2.2:beans)");
        assert_eq!(right.in_degree(2), 2);
        assert_eq!(right.in_degree(3), 2);
        assert!(!right.is_tree());
        assert_eq!(done.history()[1].kind, OperationKind::SharedSubstitution);
    }

    #[test]
    fn substitution_order_does_not_change_the_key() {
        let (a, steps) = john_cooks_and_eats_beans();
        let b = steps[1]
            .share_at(&addr("2.2"), &same("beans", r#"NP(N("beans"))"#, vec![]))
            .unwrap()
            .share_at(&addr("1"), &same("John", r#"NP(PN("John"))"#, vec![]))
            .unwrap();
        assert_eq!(a.key(), b.key());
        assert_eq!(a.right().unfold(), b.right().unfold());
    }

    #[test]
    fn plain_substitution_needs_a_link() {
        let s = DerivedStructure::from_pair(&cooks());
        let john = same("John", r#"NP(PN("John"))"#, vec![]);
        assert!(matches!(
            s.compose(&addr("1"), &addr("2.2"), &john),
            Err(LstagError::NotLinked { .. })
        ));
        let ok = s.compose(&addr("1"), &addr("1"), &john).unwrap();
        assert_eq!(ok.live_links(), vec![group("2.2", &["2.2"])]);
        assert_eq!(ok.history()[0].kind, OperationKind::Substitution);

        let shared = s.compose(&addr("2.1"), &addr("ε"), &eats()).unwrap();
        assert!(matches!(
            shared.compose(&addr("1"), &addr("1"), &john),
            Err(LstagError::NotLinked { .. })
        ));
        assert!(shared.shared_substitute(&group("1", &["3.1", "1"]), &john).is_ok());
        assert!(matches!(
            shared.shared_substitute(&group("1", &["1"]), &john),
            Err(LstagError::GroupNotLive(_))
        ));
    }

    #[test]
    fn operation_kinds_must_agree() {
        let s = DerivedStructure::from_pair(&cooks());
        assert!(matches!(
            s.compose(&addr("1"), &addr("2"), &eats()),
            Err(LstagError::OperationMismatch {
                left: "slot",
                right: "interior"
            })
        ));
    }

    #[test]
    fn adjunction_sites_must_share_an_owner() {
        let s = DerivedStructure::from_pair(&cooks())
            .compose(&addr("1"), &addr("1"), &same("John", r#"NP(PN("John"))"#, vec![]))
            .unwrap();
        let adj = same("big", r#"NP(A("big") NP*)"#, vec![]);
        assert!(matches!(
            s.compose(&addr("1"), &addr("ε"), &adj),
            Err(LstagError::DifferentHosts { .. })
        ));
        let vp = same("often", r#"VP(Adv("often") VP*)"#, vec![]);
        assert!(s.compose(&addr("2"), &addr("2"), &vp).is_ok());
        let s_adj = LstagPair::new(
            "x",
            t(r#"PN(A("x") PN*)"#),
            t(r#"VP(A("x") VP*)"#),
            vec![],
            vec![],
            LinkOrder::Gorn,
        );
        assert!(matches!(
            s.compose(&addr("1.1"), &addr("2"), &s_adj),
            Err(LstagError::DifferentHosts { .. })
        ));
    }

    #[test]
    fn left_adjunction_rebases_live_links() {
        let s = DerivedStructure::from_pair(&cooks());
        let vp = same("often", r#"VP(Adv("often") VP*)"#, vec![]);
        let s = s.compose(&addr("2"), &addr("2"), &vp).unwrap();
        assert_eq!(s.live_links(), vec![group("1", &["1"]), group("2.2.2", &["2.2.2"])]);
    }

    #[test]
    fn too_many_phi_links_is_an_error() {
        let lone = same("lone", r#"S(NP! VP(V("sleeps")))"#, vec![]);
        let s = DerivedStructure::from_pair(&lone);
        assert!(matches!(
            s.compose(&addr("2.1"), &addr("ε"), &eats()),
            Err(LstagError::CardinalityViolation { host: 0, phi: 2 })
        ));
    }
}
