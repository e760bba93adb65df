use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::address::GornAddress;
use crate::tag::{Origin, TrackError};
use crate::tree::{NodeKind, SyntaxTree, TreeClass, TreeError};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
struct DagNode {
    kind: NodeKind,
    children: Vec<NodeId>,
    origin: Origin,
}

/// The right component of a derived structure: a rooted DAG of nodes in
/// which one node may hang under several parents.
///
/// Nodes live in an append-only arena, so a `NodeId` stays valid across
/// compositions. Nodes replaced by a substitution simply become
/// unreachable. Any root path is a valid Gorn address for the node it
/// reaches; a shared node has several.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RightDag {
    nodes: Vec<DagNode>,
    root: NodeId,
    adjoined: BTreeSet<Origin>,
}

impl RightDag {
    pub fn from_tree(tree: &SyntaxTree, instance: usize) -> Self {
        let mut dag = RightDag {
            nodes: Vec::new(),
            root: 0,
            adjoined: BTreeSet::new(),
        };
        let ids = dag.append(tree, instance, None);
        dag.root = ids[&GornAddress::root()];
        dag
    }

    /// Adds `tree` to the arena. With `foot_target`, the foot node is not
    /// created; its parent points at the given node instead. Returns the
    /// node id for every address of `tree`.
    fn append(
        &mut self,
        tree: &SyntaxTree,
        instance: usize,
        foot_target: Option<NodeId>,
    ) -> BTreeMap<GornAddress, NodeId> {
        let mut ids = BTreeMap::new();
        for (a, kind) in tree.nodes() {
            let id = match (kind, foot_target) {
                (NodeKind::Foot(_), Some(target)) => target,
                _ => {
                    self.nodes.push(DagNode {
                        kind: kind.clone(),
                        children: Vec::new(),
                        origin: Origin::new(instance, a.clone()),
                    });
                    self.nodes.len() - 1
                }
            };
            ids.insert(a.clone(), id);
        }
        for a in tree.nodes().keys() {
            if let Some(p) = a.parent() {
                let (pid, cid) = (ids[&p], ids[a]);
                self.nodes[pid].children.push(cid);
            }
        }
        ids
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id].kind
    }

    pub fn origin(&self, id: NodeId) -> &Origin {
        &self.nodes[id].origin
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn is_adjoined(&self, origin: &Origin) -> bool {
        self.adjoined.contains(origin)
    }

    /// Follows a root path.
    pub fn resolve(&self, addr: &GornAddress) -> Option<NodeId> {
        let mut id = self.root;
        for &k in addr.path() {
            id = *self.nodes[id].children.get(k as usize - 1)?;
        }
        Some(id)
    }

    /// Reachable nodes in first-visit preorder.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            order.push(id);
            stack.extend(self.nodes[id].children.iter().rev());
        }
        order
    }

    /// First path (in Gorn order) reaching every reachable node.
    pub fn canonical_addresses(&self) -> BTreeMap<NodeId, GornAddress> {
        let mut out = BTreeMap::new();
        let mut stack = vec![(self.root, GornAddress::root())];
        while let Some((id, a)) = stack.pop() {
            if out.contains_key(&id) {
                continue;
            }
            for (i, c) in self.nodes[id].children.iter().enumerate().rev() {
                stack.push((*c, a.child(i as u32 + 1)));
            }
            out.insert(id, a);
        }
        out
    }

    pub fn address_of(&self, id: NodeId) -> Option<GornAddress> {
        self.canonical_addresses().remove(&id)
    }

    /// Number of parent edges into each reachable node.
    pub fn in_degrees(&self) -> BTreeMap<NodeId, usize> {
        let reach = self.reachable();
        let mut deg: BTreeMap<NodeId, usize> = reach.iter().map(|&id| (id, 0)).collect();
        for id in reach {
            for c in &self.nodes[id].children {
                *deg.entry(*c).or_default() += 1;
            }
        }
        deg
    }

    /// Reachable nodes with more than one parent.
    pub fn shared_nodes(&self) -> Vec<(NodeId, usize)> {
        self.in_degrees().into_iter().filter(|(_, d)| *d > 1).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        // colour-marking DFS
        fn visit(dag: &RightDag, id: NodeId, state: &mut BTreeMap<NodeId, bool>) -> bool {
            match state.get(&id) {
                Some(true) => return true,
                Some(false) => return false,
                None => {}
            }
            state.insert(id, false);
            for &c in &dag.nodes[id].children {
                if !visit(dag, c, state) {
                    return false;
                }
            }
            state.insert(id, true);
            true
        }
        visit(self, self.root, &mut BTreeMap::new())
    }

    pub fn is_tree(&self) -> bool {
        self.is_acyclic() && self.shared_nodes().is_empty()
    }

    /// Unfolds the DAG into a tree, copying shared nodes once per path.
    pub fn unfold(&self) -> SyntaxTree {
        let mut nodes = BTreeMap::new();
        let mut stack = vec![(self.root, GornAddress::root())];
        while let Some((id, a)) = stack.pop() {
            for (i, c) in self.nodes[id].children.iter().enumerate() {
                stack.push((*c, a.child(i as u32 + 1)));
            }
            nodes.insert(a, self.nodes[id].kind.clone());
        }
        SyntaxTree::from_nodes(nodes).expect("an acyclic DAG unfolds to a well-formed tree")
    }

    /// Leaf labels of the unfolded tree, left to right; slots as `⟨X↓⟩`.
    pub fn partial_yield(&self) -> Vec<String> {
        self.unfold().partial_yield()
    }

    /// Bracketed text where a shared node is written in full at its first
    /// occurrence with a `#k=` tag and as `#k` afterwards.
    pub fn tangled_text(&self) -> String {
        let tags: BTreeMap<NodeId, usize> = self
            .reachable()
            .into_iter()
            .filter(|id| self.in_degrees()[id] > 1)
            .enumerate()
            .map(|(i, id)| (id, i + 1))
            .collect();
        let mut out = String::new();
        let mut written = BTreeSet::new();
        self.write_tangled(self.root, &tags, &mut written, &mut out);
        out
    }

    fn write_tangled(
        &self,
        id: NodeId,
        tags: &BTreeMap<NodeId, usize>,
        written: &mut BTreeSet<NodeId>,
        out: &mut String,
    ) {
        if let Some(t) = tags.get(&id) {
            if !written.insert(id) {
                let _ = write!(out, "#{t}");
                return;
            }
            let _ = write!(out, "#{t}=");
        }
        let _ = write!(out, "{}", self.nodes[id].kind);
        let kids = &self.nodes[id].children;
        if !kids.is_empty() {
            out.push('(');
            for (i, c) in kids.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                self.write_tangled(*c, tags, written, out);
            }
            out.push(')');
        }
    }

    /// Fills every slot in `sites` with one shared copy of `filler`.
    pub fn substitute(
        &self,
        sites: &[NodeId],
        filler: &SyntaxTree,
        instance: usize,
    ) -> Result<(Self, BTreeMap<GornAddress, NodeId>), TreeError> {
        match filler.classify() {
            Ok(TreeClass::Initial) => {}
            other => {
                return Err(TreeError::ClassMismatch {
                    expected: TreeClass::Initial,
                    found: other.map(|c| c.to_string()).unwrap_or_else(|_| "ill-formed".into()),
                })
            }
        }
        let canon = self.canonical_addresses();
        for &s in sites {
            let at = canon.get(&s).cloned().unwrap_or_default();
            match &self.nodes[s].kind {
                NodeKind::SubstitutionSlot(sym) if sym == filler.root_symbol() => {}
                NodeKind::SubstitutionSlot(sym) => {
                    return Err(TreeError::SymbolMismatch {
                        addr: at,
                        site: sym.clone(),
                        incoming: filler.root_symbol().to_string(),
                    })
                }
                other => {
                    return Err(TreeError::NotASlot {
                        addr: at,
                        found: other.clone(),
                    })
                }
            }
        }
        let mut out = self.clone();
        let ids = out.append(filler, instance, None);
        let new_root = ids[&GornAddress::root()];
        for node in out.nodes.iter_mut().take(self.nodes.len()) {
            for c in node.children.iter_mut() {
                if sites.contains(c) {
                    *c = new_root;
                }
            }
        }
        Ok((out, ids))
    }

    /// Adjoins `aux` at node `site`. Every parent of the site, however it is
    /// reached, now points at the auxiliary root; the site itself hangs
    /// under the auxiliary foot and keeps its id.
    pub fn adjoin(
        &self,
        site: NodeId,
        aux: &SyntaxTree,
        instance: usize,
    ) -> Result<(Self, BTreeMap<GornAddress, NodeId>), TrackError> {
        let at = self.address_of(site).unwrap_or_default();
        let sym = match &self.nodes[site].kind {
            NodeKind::Interior(s) => s,
            other => {
                return Err(TreeError::NotInterior {
                    addr: at,
                    found: other.clone(),
                }
                .into())
            }
        };
        if aux.classify() != Ok(TreeClass::Auxiliary) {
            return Err(TreeError::ClassMismatch {
                expected: TreeClass::Auxiliary,
                found: aux
                    .classify()
                    .map(|c| c.to_string())
                    .unwrap_or_else(|_| "ill-formed".into()),
            }
            .into());
        }
        if sym != aux.root_symbol() {
            return Err(TreeError::SymbolMismatch {
                addr: at,
                site: sym.clone(),
                incoming: aux.root_symbol().to_string(),
            }
            .into());
        }
        let origin = self.nodes[site].origin.clone();
        if self.adjoined.contains(&origin) {
            return Err(TrackError::AlreadyAdjoined {
                instance: origin.instance,
                address: origin.address,
            });
        }
        let mut out = self.clone();
        let next = out.nodes.len();
        let ids = out.append(aux, instance, Some(site));
        let new_root = ids[&GornAddress::root()];
        for node in out.nodes.iter_mut().take(next) {
            for c in node.children.iter_mut() {
                if *c == site {
                    *c = new_root;
                }
            }
        }
        if out.root == site {
            out.root = new_root;
        }
        out.adjoined.insert(origin);
        Ok((out, ids))
    }
}
