//! Text, JSON and DOT renderings of derived structures.
//!
//! Right-DAG node ids in the output are renumbered in first-visit preorder,
//! so they do not depend on the order operations were applied in beyond
//! what the structure itself shows. Shared nodes are emitted once and carry
//! one edge per parent.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::address::GornAddress;
use crate::grammar_file::{Entry, GrammarDocument};
use crate::lstag::{instance_labels, DerivationGraph, DerivedStructure, NodeId, RightDag};
use crate::stag::{Link, StagPair};
use crate::tag::DerivationTree;
use crate::tree::{NodeKind, SyntaxTree};

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node_label(k: &NodeKind) -> String {
    match k {
        NodeKind::Interior(s) => s.clone(),
        NodeKind::SubstitutionSlot(s) => format!("{s}↓"),
        NodeKind::Foot(s) => format!("{s}*"),
        NodeKind::Terminal(t) => t.clone(),
    }
}

fn node_attrs(k: &NodeKind) -> &'static str {
    match k {
        NodeKind::Terminal(_) => ", shape=plaintext",
        NodeKind::SubstitutionSlot(_) | NodeKind::Foot(_) => ", shape=box",
        NodeKind::Interior(_) => "",
    }
}

fn node_json(k: &NodeKind) -> (&'static str, Value) {
    match k {
        NodeKind::Terminal(t) => ("token", json!(t)),
        other => ("symbol", json!(other.symbol().unwrap_or_default())),
    }
}

/// Writes `tree` as DOT statements with node ids `{prefix}{n}`, numbered in
/// Gorn order.
fn tree_dot(out: &mut String, prefix: &str, tree: &SyntaxTree, indent: &str) {
    let ids: BTreeMap<&GornAddress, usize> = tree.nodes().keys().enumerate().map(|(i, a)| (a, i)).collect();
    for (a, k) in tree.nodes() {
        let _ = writeln!(
            out,
            "{indent}{prefix}{} [label=\"{}\"{}];",
            ids[a],
            dot_escape(&node_label(k)),
            node_attrs(k)
        );
    }
    for a in tree.nodes().keys() {
        if let Some(p) = a.parent() {
            let _ = writeln!(out, "{indent}{prefix}{} -> {prefix}{};", ids[&p], ids[a]);
        }
    }
}

fn derivation_dot(out: &mut String, prefix: &str, d: &DerivationTree, indent: &str) {
    fn walk(out: &mut String, prefix: &str, d: &DerivationTree, next: &mut usize, indent: &str) -> usize {
        let me = *next;
        *next += 1;
        let _ = writeln!(out, "{indent}{prefix}{me} [label=\"{}\"];", dot_escape(&d.name));
        for e in &d.children {
            let c = walk(out, prefix, &e.node, next, indent);
            let _ = writeln!(out, "{indent}{prefix}{me} -> {prefix}{c} [label=\"{}\"];", e.addr);
        }
        me
    }
    walk(out, prefix, d, &mut 0, indent);
}

fn graph_dot(out: &mut String, prefix: &str, g: &DerivationGraph, indent: &str) {
    for (i, n) in g.nodes.iter().enumerate() {
        let _ = writeln!(out, "{indent}{prefix}{i} [label=\"{}\"];", dot_escape(n));
    }
    let mut edges = g.edges.clone();
    edges.sort();
    for e in edges {
        let _ = writeln!(
            out,
            "{indent}{prefix}{} -> {prefix}{} [label=\"{}\"];",
            e.from, e.to, e.addr
        );
    }
}

/// Reachable right nodes in first-visit preorder, and their new numbers.
fn renumber(dag: &RightDag) -> (Vec<NodeId>, BTreeMap<NodeId, usize>) {
    let order = dag.reachable();
    let index = order.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    (order, index)
}

fn dag_dot(out: &mut String, prefix: &str, dag: &RightDag, indent: &str) {
    let (order, index) = renumber(dag);
    let deg = dag.in_degrees();
    for &id in &order {
        let k = dag.kind(id);
        let shared = if deg[&id] > 1 { ", peripheries=2" } else { "" };
        let _ = writeln!(
            out,
            "{indent}{prefix}{} [label=\"{}\"{}{shared}];",
            index[&id],
            dot_escape(&node_label(k)),
            node_attrs(k)
        );
    }
    for &id in &order {
        for c in dag.children(id) {
            let _ = writeln!(out, "{indent}{prefix}{} -> {prefix}{};", index[&id], index[c]);
        }
    }
}

fn cluster(out: &mut String, name: &str, label: &str, body: impl FnOnce(&mut String)) {
    let _ = writeln!(out, "  subgraph cluster_{name} {{");
    let _ = writeln!(out, "    label=\"{label}\";");
    body(out);
    out.push_str("  }\n");
}

pub fn dag_json(dag: &RightDag) -> Value {
    let (order, index) = renumber(dag);
    let deg = dag.in_degrees();
    let nodes: Vec<Value> = order
        .iter()
        .map(|&id| {
            let k = dag.kind(id);
            let (field, v) = node_json(k);
            let o = dag.origin(id);
            let mut n = json!({
                "id": index[&id],
                "kind": k.kind_name(),
                "origin": { "instance": o.instance, "address": o.address.to_string() },
                "children": dag.children(id).iter().map(|c| index[c]).collect::<Vec<_>>(),
            });
            n[field] = v;
            n
        })
        .collect();
    let shared: Vec<Value> = order
        .iter()
        .filter(|id| deg[id] > 1)
        .map(|id| json!({ "node": index[id], "in_degree": deg[id] }))
        .collect();
    json!({ "root": index[&dag.root()], "nodes": nodes, "shared": shared })
}

pub fn derived_json(d: &DerivedStructure) -> Value {
    let (left, right) = d.projections();
    let live: Vec<Value> = d
        .live_links()
        .iter()
        .map(|g| json!({ "left": g.left.to_string(), "right": g.right.iter().map(|r| r.to_string()).collect::<Vec<_>>() }))
        .collect();
    json!({
        "instances": instance_labels(d.instances()),
        "left": d.left_tree(),
        "left_yield": d.left_tree().partial_yield_string(),
        "right": dag_json(d.right()),
        "right_yield": d.right().partial_yield().join(" "),
        "live_links": live,
        "history": d.history(),
        "left_derivation": left,
        "right_derivation": right,
    })
}

pub fn derived_dot(d: &DerivedStructure) -> String {
    let (left, right) = d.projections();
    let mut out = String::from("digraph derived {\n  node [fontname=\"Helvetica\"];\n");
    cluster(&mut out, "left", "left", |o| tree_dot(o, "l", d.left_tree(), "    "));
    cluster(&mut out, "right", "right", |o| dag_dot(o, "r", d.right(), "    "));
    cluster(&mut out, "left_derivation", "left derivation", |o| {
        derivation_dot(o, "ld", &left, "    ")
    });
    cluster(&mut out, "right_derivation", "right derivation", |o| {
        graph_dot(o, "rd", &right, "    ")
    });
    out.push_str("}\n");
    out
}

pub fn derived_text(d: &DerivedStructure) -> String {
    let (left, right) = d.projections();
    let mut out = String::new();
    let _ = writeln!(out, "left: {}", d.left_tree());
    let _ = writeln!(out, "left yield: {}", d.left_tree().partial_yield_string());
    let _ = writeln!(out, "right: {}", d.right().tangled_text());
    let _ = writeln!(out, "right yield: {}", d.right().partial_yield().join(" "));
    let live = d.live_links();
    if live.is_empty() {
        out.push_str("live links: none\n");
    } else {
        let groups: Vec<String> = live.iter().map(|g| g.to_string()).collect();
        let _ = writeln!(out, "live links: {}", groups.join(", "));
    }
    out.push_str("left derivation:\n");
    for line in left.to_string().lines() {
        let _ = writeln!(out, "  {line}");
    }
    out.push_str("right derivation:\n");
    if right.edges.is_empty() {
        let _ = writeln!(out, "  {}", right.nodes[0]);
    }
    for line in right.to_string().lines() {
        let _ = writeln!(out, "  {line}");
    }
    out
}

pub fn tag_json(tree: &SyntaxTree, d: &DerivationTree) -> Value {
    json!({
        "tree": tree,
        "yield": tree.partial_yield_string(),
        "derivation": d,
    })
}

pub fn tag_text(tree: &SyntaxTree, d: &DerivationTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tree: {tree}");
    let _ = writeln!(out, "yield: {}", tree.partial_yield_string());
    out.push_str("derivation:\n");
    for line in d.to_string().lines() {
        let _ = writeln!(out, "  {line}");
    }
    out
}

pub fn tag_dot(tree: &SyntaxTree, d: &DerivationTree) -> String {
    let mut out = String::from("digraph derived {\n  node [fontname=\"Helvetica\"];\n");
    cluster(&mut out, "tree", "derived tree", |o| tree_dot(o, "t", tree, "    "));
    cluster(&mut out, "derivation", "derivation", |o| {
        derivation_dot(o, "d", d, "    ")
    });
    out.push_str("}\n");
    out
}

fn links_text(links: &[Link]) -> String {
    links.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn stag_json(p: &StagPair, left: &DerivationTree, right: &DerivationTree) -> Value {
    json!({
        "left": p.left(),
        "right": p.right(),
        "left_yield": p.left().partial_yield_string(),
        "right_yield": p.right().partial_yield_string(),
        "links": p.links(),
        "left_derivation": left,
        "right_derivation": right,
    })
}

pub fn stag_text(p: &StagPair, left: &DerivationTree, right: &DerivationTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "left: {}", p.left());
    let _ = writeln!(out, "left yield: {}", p.left().partial_yield_string());
    let _ = writeln!(out, "right: {}", p.right());
    let _ = writeln!(out, "right yield: {}", p.right().partial_yield_string());
    let _ = writeln!(out, "links: [{}]", links_text(p.links()));
    for (label, d) in [("left derivation", left), ("right derivation", right)] {
        let _ = writeln!(out, "{label}:");
        for line in d.to_string().lines() {
            let _ = writeln!(out, "  {line}");
        }
    }
    out
}

pub fn stag_dot(p: &StagPair, left: &DerivationTree, right: &DerivationTree) -> String {
    let mut out = String::from("digraph derived {\n  node [fontname=\"Helvetica\"];\n");
    cluster(&mut out, "left", "left", |o| tree_dot(o, "l", p.left(), "    "));
    cluster(&mut out, "right", "right", |o| tree_dot(o, "r", p.right(), "    "));
    let lid: BTreeMap<&GornAddress, usize> = p.left().nodes().keys().enumerate().map(|(i, a)| (a, i)).collect();
    let rid: BTreeMap<&GornAddress, usize> = p.right().nodes().keys().enumerate().map(|(i, a)| (a, i)).collect();
    for l in p.links() {
        let _ = writeln!(
            out,
            "  l{} -> r{} [style=dashed, dir=none, constraint=false];",
            lid[&l.left], rid[&l.right]
        );
    }
    cluster(&mut out, "left_derivation", "left derivation", |o| {
        derivation_dot(o, "ld", left, "    ")
    });
    cluster(&mut out, "right_derivation", "right derivation", |o| {
        derivation_dot(o, "rd", right, "    ")
    });
    out.push_str("}\n");
    out
}

/// Every elementary tree and pair of a grammar, one cluster per entry.
/// Links are dashed; phi links are dotted self-loops on the right tree.
pub fn grammar_dot(doc: &GrammarDocument) -> String {
    let mut out = String::from("digraph grammar {\n  node [fontname=\"Helvetica\"];\n");
    for (i, e) in doc.entries.iter().enumerate() {
        let name = format!("e{i}");
        let label = dot_escape(e.name());
        match e {
            Entry::Tree(d) => cluster(&mut out, &name, &label, |o| {
                tree_dot(o, &format!("{name}_"), &d.tree, "    ")
            }),
            Entry::Pair(d) => cluster(&mut out, &name, &label, |o| {
                tree_dot(o, &format!("{name}_l"), &d.left, "    ");
                tree_dot(o, &format!("{name}_r"), &d.right, "    ");
                link_edges(o, &name, &d.left, &d.right, &d.links, "dashed");
            }),
            Entry::Lspair(d) => cluster(&mut out, &name, &label, |o| {
                tree_dot(o, &format!("{name}_l"), &d.left, "    ");
                tree_dot(o, &format!("{name}_r"), &d.right, "    ");
                link_edges(o, &name, &d.left, &d.right, &d.delta, "dashed");
                let rid: BTreeMap<&GornAddress, usize> =
                    d.right.nodes().keys().enumerate().map(|(i, a)| (a, i)).collect();
                for l in &d.phi {
                    if let (Some(a), Some(b)) = (rid.get(&l.left), rid.get(&l.right)) {
                        let _ = writeln!(
                            o,
                            "    {name}_r{a} -> {name}_r{b} [style=dotted, dir=none, constraint=false];"
                        );
                    }
                }
            }),
        }
    }
    out.push_str("}\n");
    out
}

fn link_edges(out: &mut String, name: &str, left: &SyntaxTree, right: &SyntaxTree, links: &[Link], style: &str) {
    let lid: BTreeMap<&GornAddress, usize> = left.nodes().keys().enumerate().map(|(i, a)| (a, i)).collect();
    let rid: BTreeMap<&GornAddress, usize> = right.nodes().keys().enumerate().map(|(i, a)| (a, i)).collect();
    for l in links {
        if let (Some(a), Some(b)) = (lid.get(&l.left), rid.get(&l.right)) {
            let _ = writeln!(
                out,
                "    {name}_l{a} -> {name}_r{b} [style={style}, dir=none, constraint=false];"
            );
        }
    }
}
