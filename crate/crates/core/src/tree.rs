//! Gorn-addressed syntax trees and the two TAG composition operations.
//!
//! A tree is stored as a map from address to node kind. Composition never
//! mutates its inputs; `substitute` and `adjoin` return new trees.
//!
//! The bracketed text form is `S(NP! VP(V("cooked") NP!))`: `!` marks a
//! substitution slot, `*` a foot node, and quoted atoms are terminals.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::address::GornAddress;
use crate::syntax::{self, Cursor, ParseError, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Interior(String),
    SubstitutionSlot(String),
    Foot(String),
    Terminal(String),
}

impl NodeKind {
    /// Nonterminal symbol, `None` for terminals.
    pub fn symbol(&self) -> Option<&str> {
        match self {
            NodeKind::Interior(s) | NodeKind::SubstitutionSlot(s) | NodeKind::Foot(s) => Some(s),
            NodeKind::Terminal(_) => None,
        }
    }

    /// Slots, feet and terminals never have children.
    pub fn must_be_leaf(&self) -> bool {
        !matches!(self, NodeKind::Interior(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NodeKind::Interior(_) => "interior",
            NodeKind::SubstitutionSlot(_) => "slot",
            NodeKind::Foot(_) => "foot",
            NodeKind::Terminal(_) => "terminal",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Interior(s) => write!(f, "{s}"),
            NodeKind::SubstitutionSlot(s) => write!(f, "{s}!"),
            NodeKind::Foot(s) => write!(f, "{s}*"),
            NodeKind::Terminal(t) => write_quoted(f, t),
        }
    }
}

fn write_quoted(f: &mut impl fmt::Write, t: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in t.chars() {
        if c == '"' || c == '\\' {
            f.write_char('\\')?;
        }
        f.write_char(c)?;
    }
    f.write_char('"')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeClass {
    Initial,
    Auxiliary,
}

impl fmt::Display for TreeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeClass::Initial => "initial",
            TreeClass::Auxiliary => "auxiliary",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("no node at address {0}")]
    AddressNotFound(GornAddress),
    #[error("node at {addr} is {found}, not a substitution slot")]
    NotASlot { addr: GornAddress, found: NodeKind },
    #[error("node at {addr} is {found}, not an interior node")]
    NotInterior { addr: GornAddress, found: NodeKind },
    #[error("symbol mismatch at {addr}: site is {site}, incoming root is {incoming}")]
    SymbolMismatch {
        addr: GornAddress,
        site: String,
        incoming: String,
    },
    #[error("expected an {expected} tree, found {found}")]
    ClassMismatch { expected: TreeClass, found: String },
    #[error("tree still has an open {0} at {1}")]
    IncompleteTree(NodeKind, GornAddress),
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A tree over Gorn addresses. Always has an interior root, a prefix-closed
/// and sibling-contiguous address set, and at most one foot.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SyntaxTree {
    nodes: BTreeMap<GornAddress, NodeKind>,
}

impl SyntaxTree {
    pub fn from_nodes(nodes: BTreeMap<GornAddress, NodeKind>) -> Result<Self, TreeError> {
        match nodes.get(&GornAddress::root()) {
            Some(NodeKind::Interior(_)) => {}
            Some(other) => return Err(TreeError::Malformed(format!("root is {other}, not interior"))),
            None => return Err(TreeError::Malformed("missing root".into())),
        }
        let mut feet = 0;
        for (a, kind) in &nodes {
            if let Some(parent) = a.parent() {
                match nodes.get(&parent) {
                    None => return Err(TreeError::Malformed(format!("{a} has no parent"))),
                    Some(p) if p.must_be_leaf() => {
                        return Err(TreeError::Malformed(format!("{p} at {parent} cannot have children")))
                    }
                    _ => {}
                }
                let k = a.last().unwrap_or(1);
                if k > 1 && !nodes.contains_key(&parent.child(k - 1)) {
                    return Err(TreeError::Malformed(format!("{a} has no left sibling")));
                }
            }
            if matches!(kind, NodeKind::Foot(_)) {
                feet += 1;
            }
        }
        if feet > 1 {
            return Err(TreeError::Malformed(format!("{feet} foot nodes")));
        }
        Ok(SyntaxTree { nodes })
    }

    /// A one-level tree `root(children...)`.
    pub fn node(root: &str, children: impl IntoIterator<Item = NodeKind>) -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(GornAddress::root(), NodeKind::Interior(root.to_string()));
        for (i, kind) in children.into_iter().enumerate() {
            nodes.insert(GornAddress::root().child(i as u32 + 1), kind);
        }
        SyntaxTree::from_nodes(nodes).expect("one-level tree is well formed")
    }

    pub fn nodes(&self) -> &BTreeMap<GornAddress, NodeKind> {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, addr: &GornAddress) -> bool {
        self.nodes.contains_key(addr)
    }

    pub fn node_at(&self, addr: &GornAddress) -> Result<&NodeKind, TreeError> {
        self.nodes
            .get(addr)
            .ok_or_else(|| TreeError::AddressNotFound(addr.clone()))
    }

    pub fn root_symbol(&self) -> &str {
        self.nodes[&GornAddress::root()].symbol().expect("root is interior")
    }

    pub fn foot(&self) -> Option<(&GornAddress, &str)> {
        self.nodes.iter().find_map(|(a, k)| match k {
            NodeKind::Foot(s) => Some((a, s.as_str())),
            _ => None,
        })
    }

    /// Initial or auxiliary; an error when the foot's symbol differs from
    /// the root's.
    pub fn classify(&self) -> Result<TreeClass, TreeError> {
        match self.foot() {
            None => Ok(TreeClass::Initial),
            Some((_, s)) if s == self.root_symbol() => Ok(TreeClass::Auxiliary),
            Some((a, s)) => Err(TreeError::Malformed(format!(
                "foot {s}* at {a} does not match root {}",
                self.root_symbol()
            ))),
        }
    }

    pub fn class(&self) -> Option<TreeClass> {
        self.classify().ok()
    }

    pub fn children(&self, addr: &GornAddress) -> Vec<GornAddress> {
        (1..)
            .map(|k| addr.child(k))
            .take_while(|c| self.nodes.contains_key(c))
            .collect()
    }

    /// Subtree rooted at `addr`, re-addressed so `addr` becomes the root.
    pub fn subtree(&self, addr: &GornAddress) -> BTreeMap<GornAddress, NodeKind> {
        self.nodes
            .range(addr.clone()..)
            .map_while(|(a, k)| a.strip_prefix(addr).map(|s| (s, k.clone())))
            .collect()
    }

    /// Leaves in left-to-right order.
    pub fn frontier(&self) -> Vec<(&GornAddress, &NodeKind)> {
        self.nodes
            .iter()
            .filter(|(a, k)| k.must_be_leaf() || !self.nodes.contains_key(&a.child(1)))
            .collect()
    }

    pub fn slots(&self) -> impl Iterator<Item = (&GornAddress, &str)> {
        self.nodes.iter().filter_map(|(a, k)| match k {
            NodeKind::SubstitutionSlot(s) => Some((a, s.as_str())),
            _ => None,
        })
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = (&GornAddress, &str)> {
        self.nodes.iter().filter_map(|(a, k)| match k {
            NodeKind::Interior(s) => Some((a, s.as_str())),
            _ => None,
        })
    }

    /// True when no slot or foot remains.
    pub fn is_complete(&self) -> bool {
        self.nodes
            .values()
            .all(|k| !matches!(k, NodeKind::SubstitutionSlot(_) | NodeKind::Foot(_)))
    }

    /// Terminal tokens left to right. Fails if any slot or foot is left open.
    pub fn yield_tokens(&self) -> Result<Vec<String>, TreeError> {
        self.nodes
            .iter()
            .filter_map(|(a, k)| match k {
                NodeKind::Terminal(t) => Some(Ok(t.clone())),
                NodeKind::SubstitutionSlot(_) | NodeKind::Foot(_) => {
                    Some(Err(TreeError::IncompleteTree(k.clone(), a.clone())))
                }
                NodeKind::Interior(_) => None,
            })
            .collect()
    }

    /// Like [`yield_tokens`](Self::yield_tokens) but open slots render as
    /// `⟨X↓⟩` and the foot as `⟨X*⟩`.
    pub fn partial_yield(&self) -> Vec<String> {
        self.nodes
            .values()
            .filter_map(|k| match k {
                NodeKind::Terminal(t) => Some(t.clone()),
                NodeKind::SubstitutionSlot(s) => Some(format!("⟨{s}↓⟩")),
                NodeKind::Foot(s) => Some(format!("⟨{s}*⟩")),
                NodeKind::Interior(_) => None,
            })
            .collect()
    }

    pub fn yield_string(&self) -> Result<String, TreeError> {
        Ok(self.yield_tokens()?.join(" "))
    }

    pub fn partial_yield_string(&self) -> String {
        self.partial_yield().join(" ")
    }

    /// Parses the bracketed text form.
    pub fn parse(text: &str) -> Result<Self, TreeError> {
        let toks = syntax::tokenize(text)?;
        let mut cur = Cursor::new(&toks, text);
        let tree = parse_tree(&mut cur)?;
        if !cur.at_end() {
            return Err(cur.unexpected("end of tree").into());
        }
        Ok(tree)
    }

    fn write_node(&self, f: &mut impl fmt::Write, addr: &GornAddress) -> fmt::Result {
        let kind = &self.nodes[addr];
        write!(f, "{kind}")?;
        let kids = self.children(addr);
        if !kids.is_empty() {
            f.write_char('(')?;
            for (i, c) in kids.iter().enumerate() {
                if i > 0 {
                    f.write_char(' ')?;
                }
                self.write_node(f, c)?;
            }
            f.write_char(')')?;
        }
        Ok(())
    }
}

/// Reads one bracketed tree from the cursor; used by the grammar reader too.
pub fn parse_tree(cur: &mut Cursor<'_>) -> Result<SyntaxTree, TreeError> {
    let mut nodes = BTreeMap::new();
    let (line, col) = cur.here();
    parse_node(cur, GornAddress::root(), &mut nodes)?;
    SyntaxTree::from_nodes(nodes).map_err(|e| match e {
        TreeError::Malformed(m) => ParseError::new(line, col, m).into(),
        other => other,
    })
}

fn parse_node(
    cur: &mut Cursor<'_>,
    at: GornAddress,
    nodes: &mut BTreeMap<GornAddress, NodeKind>,
) -> Result<(), TreeError> {
    match cur.peek() {
        Some(Tok::Str(t)) => {
            cur.next();
            nodes.insert(at, NodeKind::Terminal(t.clone()));
            Ok(())
        }
        Some(Tok::Ident(s)) => {
            let s = s.clone();
            cur.next();
            if cur.eat("!") {
                nodes.insert(at, NodeKind::SubstitutionSlot(s));
            } else if cur.eat("*") {
                nodes.insert(at, NodeKind::Foot(s));
            } else {
                nodes.insert(at.clone(), NodeKind::Interior(s));
                if cur.eat("(") {
                    let mut k = 1;
                    while !cur.eat(")") {
                        if cur.at_end() {
                            return Err(cur.unexpected("`)`").into());
                        }
                        parse_node(cur, at.child(k), nodes)?;
                        k += 1;
                    }
                }
            }
            Ok(())
        }
        _ => Err(cur.unexpected("tree node").into()),
    }
}

impl FromStr for SyntaxTree {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SyntaxTree::parse(s)
    }
}

impl fmt::Display for SyntaxTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_node(f, &GornAddress::root())
    }
}

impl fmt::Debug for SyntaxTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SyntaxTree({self})")
    }
}

struct NodeView<'a> {
    tree: &'a SyntaxTree,
    at: GornAddress,
}

impl Serialize for NodeView<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let kind = &self.tree.nodes[&self.at];
        let kids: Vec<NodeView<'_>> = self
            .tree
            .children(&self.at)
            .into_iter()
            .map(|at| NodeView { tree: self.tree, at })
            .collect();
        let mut st = serializer.serialize_struct("Node", 3)?;
        st.serialize_field("kind", kind.kind_name())?;
        match kind {
            NodeKind::Terminal(t) => st.serialize_field("token", t)?,
            other => st.serialize_field("symbol", other.symbol().unwrap_or_default())?,
        }
        if !kids.is_empty() {
            st.serialize_field("children", &kids)?;
        }
        st.end()
    }
}

impl Serialize for SyntaxTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        NodeView {
            tree: self,
            at: GornAddress::root(),
        }
        .serialize(serializer)
    }
}

/// Inserts `guest` at `site`.
///
/// Without a foot this is substitution: the entry at `site` is replaced.
/// With a foot it is adjunction: the subtree at `site` is lifted out and
/// re-planted where the guest's foot was, and the foot entry is dropped.
/// Generic over the payload so origin maps can follow the same moves.
pub(crate) fn graft<V: Clone>(
    target: &BTreeMap<GornAddress, V>,
    site: &GornAddress,
    guest: &BTreeMap<GornAddress, V>,
    foot: Option<&GornAddress>,
) -> BTreeMap<GornAddress, V> {
    let mut out = BTreeMap::new();
    for (a, v) in target {
        match (a.strip_prefix(site), foot) {
            (None, _) => {
                out.insert(a.clone(), v.clone());
            }
            (Some(suffix), Some(f)) => {
                out.insert(site.join(f).join(&suffix), v.clone());
            }
            (Some(_), None) => {}
        }
    }
    for (p, v) in guest {
        if Some(p) != foot {
            out.insert(site.join(p), v.clone());
        }
    }
    out
}

/// Replaces the slot at `addr` with `filler`.
pub fn substitute(target: &SyntaxTree, addr: &GornAddress, filler: &SyntaxTree) -> Result<SyntaxTree, TreeError> {
    let site = match target.node_at(addr)? {
        NodeKind::SubstitutionSlot(s) => s,
        found => {
            return Err(TreeError::NotASlot {
                addr: addr.clone(),
                found: found.clone(),
            })
        }
    };
    match filler.classify() {
        Ok(TreeClass::Initial) => {}
        other => {
            return Err(TreeError::ClassMismatch {
                expected: TreeClass::Initial,
                found: class_label(&other),
            })
        }
    }
    if site != filler.root_symbol() {
        return Err(TreeError::SymbolMismatch {
            addr: addr.clone(),
            site: site.clone(),
            incoming: filler.root_symbol().to_string(),
        });
    }
    Ok(SyntaxTree {
        nodes: graft(&target.nodes, addr, &filler.nodes, None),
    })
}

/// Adjoins `aux` at the interior node `addr`, wrapping the detached subtree
/// with the auxiliary tree's material on either side of its foot.
pub fn adjoin(target: &SyntaxTree, addr: &GornAddress, aux: &SyntaxTree) -> Result<SyntaxTree, TreeError> {
    let site = match target.node_at(addr)? {
        NodeKind::Interior(s) => s,
        found => {
            return Err(TreeError::NotInterior {
                addr: addr.clone(),
                found: found.clone(),
            })
        }
    };
    let foot = match (aux.classify(), aux.foot()) {
        (Ok(TreeClass::Auxiliary), Some((f, _))) => f.clone(),
        (other, _) => {
            return Err(TreeError::ClassMismatch {
                expected: TreeClass::Auxiliary,
                found: class_label(&other),
            })
        }
    };
    if site != aux.root_symbol() {
        return Err(TreeError::SymbolMismatch {
            addr: addr.clone(),
            site: site.clone(),
            incoming: aux.root_symbol().to_string(),
        });
    }
    Ok(SyntaxTree {
        nodes: graft(&target.nodes, addr, &aux.nodes, Some(&foot)),
    })
}

fn class_label(c: &Result<TreeClass, TreeError>) -> String {
    match c {
        Ok(c) => c.to_string(),
        Err(_) => "ill-formed auxiliary".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::addr;

    fn t(s: &str) -> SyntaxTree {
        SyntaxTree::parse(s).unwrap()
    }

    const COOKED: &str = r#"S(NP! VP(V("cooked") NP!))"#;

    #[test]
    fn node_at_follows_gorn_addresses() {
        let cooked = t(COOKED);
        assert_eq!(
            cooked.node_at(&addr("2.2")).unwrap(),
            &NodeKind::SubstitutionSlot("NP".into())
        );
        assert_eq!(
            cooked.node_at(&GornAddress::root()).unwrap(),
            &NodeKind::Interior("S".into())
        );
        assert_eq!(cooked.node_at(&addr("2.1")).unwrap(), &NodeKind::Interior("V".into()));
        assert_eq!(
            cooked.node_at(&addr("2.1.1")).unwrap(),
            &NodeKind::Terminal("cooked".into())
        );
        assert_eq!(cooked.node_at(&addr("3")), Err(TreeError::AddressNotFound(addr("3"))));
    }

    #[test]
    fn print_parse_is_bit_exact() {
        for s in [
            COOKED,
            r#"N(A("dried") N*)"#,
            r#"X("a \"quoted\" \\ token")"#,
            "S(NP VP)",
            r#"S(NP("peanuts") S(NP! VP(V("likes"))))"#,
        ] {
            assert_eq!(t(s).to_string(), s);
        }
        assert_eq!(t("S ( NP !  VP ( V ( \"x\" ) ) )").to_string(), r#"S(NP! VP(V("x")))"#);
    }

    #[test]
    fn rejects_malformed_trees() {
        assert!(SyntaxTree::parse(r#""x""#).is_err());
        assert!(SyntaxTree::parse("NP!").is_err());
        assert!(SyntaxTree::parse("S(A* B*)").is_err());
        assert!(SyntaxTree::parse("S(A").is_err());
        assert!(SyntaxTree::parse("S) ").is_err());
        assert!(SyntaxTree::parse("S(A!(B))").is_err());
        let mut gap = BTreeMap::new();
        gap.insert(GornAddress::root(), NodeKind::Interior("S".into()));
        gap.insert(addr("2"), NodeKind::Terminal("x".into()));
        assert!(SyntaxTree::from_nodes(gap).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(t(COOKED).classify(), Ok(TreeClass::Initial));
        assert_eq!(t(r#"N(A("dried") N*)"#).classify(), Ok(TreeClass::Auxiliary));
        assert!(t(r#"N(A("dried") V*)"#).classify().is_err());
    }

    #[test]
    fn substitution_builds_john_cooked_beans() {
        let cooked = t(COOKED);
        let john = t(r#"NP(PN("John"))"#);
        let beans = t(r#"NP(N("beans"))"#);
        let step = substitute(&cooked, &addr("1"), &john).unwrap();
        assert_eq!(step.partial_yield().len(), cooked.partial_yield().len());
        let done = substitute(&step, &addr("2.2"), &beans).unwrap();
        assert_eq!(done.yield_string().unwrap(), "John cooked beans");
        assert_eq!(
            done.node_at(&addr("2.2.1.1")).unwrap(),
            &NodeKind::Terminal("beans".into())
        );
    }

    #[test]
    fn substitution_errors() {
        let cooked = t(COOKED);
        let john = t(r#"NP(PN("John"))"#);
        assert_eq!(
            substitute(&cooked, &addr("3"), &john),
            Err(TreeError::AddressNotFound(addr("3")))
        );
        assert!(matches!(
            substitute(&cooked, &addr("2"), &john),
            Err(TreeError::NotASlot { .. })
        ));
        assert!(matches!(
            substitute(&cooked, &addr("1"), &t(r#"VP(V("x"))"#)),
            Err(TreeError::SymbolMismatch { .. })
        ));
        assert!(matches!(
            substitute(&cooked, &addr("1"), &t(r#"NP(A("x") NP*)"#)),
            Err(TreeError::ClassMismatch { .. })
        ));
    }

    #[test]
    fn adjunction_wraps() {
        let beans = t(r#"NP(N("beans"))"#);
        let dried = t(r#"N(A("dried") N*)"#);
        let out = adjoin(&beans, &addr("1"), &dried).unwrap();
        assert_eq!(out.to_string(), r#"NP(N(A("dried") N("beans")))"#);
        assert_eq!(out.yield_string().unwrap(), "dried beans");

        let identity = t("N(N*)");
        assert_eq!(
            adjoin(&beans, &addr("1"), &identity).unwrap().yield_string().unwrap(),
            "beans"
        );
    }

    #[test]
    fn adjunction_rebases_nodes_below_site() {
        let target = t(r#"S(X(A("a") B("b")) C("c"))"#);
        let aux = t(r#"X(P("p") X* Q("q"))"#);
        let out = adjoin(&target, &addr("1"), &aux).unwrap();
        assert_eq!(out.node_at(&addr("1.2.2")).unwrap(), &NodeKind::Interior("B".into()));
        assert_eq!(out.node_at(&addr("2")).unwrap(), &NodeKind::Interior("C".into()));
        assert_eq!(out.yield_string().unwrap(), "p a b q c");
    }

    #[test]
    fn adjunction_errors() {
        let cooked = t(COOKED);
        let dried = t(r#"N(A("dried") N*)"#);
        assert!(matches!(
            adjoin(&cooked, &addr("1"), &dried),
            Err(TreeError::NotInterior { .. })
        ));
        assert!(matches!(
            adjoin(&cooked, &addr("2"), &dried),
            Err(TreeError::SymbolMismatch { .. })
        ));
        assert!(matches!(
            adjoin(&cooked, &addr("2"), &t(r#"VP(V("x"))"#)),
            Err(TreeError::ClassMismatch { .. })
        ));
    }

    #[test]
    fn yields() {
        let cooked = t(COOKED);
        assert_eq!(cooked.partial_yield_string(), "⟨NP↓⟩ cooked ⟨NP↓⟩");
        assert!(matches!(cooked.yield_tokens(), Err(TreeError::IncompleteTree(..))));
        assert_eq!(t(r#"S("hello")"#).yield_string().unwrap(), "hello");
        assert_eq!(t(r#"N(A("dried") N*)"#).partial_yield_string(), "dried ⟨N*⟩");
    }

    #[test]
    fn json_shape() {
        let v = serde_json::to_value(t(r#"NP(N! "x")"#)).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"kind":"interior","symbol":"NP","children":[
                {"kind":"slot","symbol":"N"},{"kind":"terminal","token":"x"}]})
        );
    }
}
