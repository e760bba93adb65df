//! Derivation scripts.
//!
//! Tree and pair grammars use an edge list. The root instance comes first;
//! every later line attaches a child instance at an address (or, for
//! synchronous pairs, at a link) of its parent. Repeated uses of one tree
//! are told apart as `name#2`, `name#3`:
//!
//! ```text
//! root cooked
//! cooked @ 1 <- John
//! cooked @ 2.2 <- beans
//! beans @ 1 <- dried
//! ```
//!
//! Link-sharing grammars use a sequence of steps applied to the derived
//! structure in order:
//!
//! ```text
//! start cooks
//! compose eats @ 2.1 ~ ε
//! share John @ 1
//! ```
//!
//! `compose P @ l ~ r` composes pair `P` at left address `l` and right
//! address `r`; `share P @ l` substitutes `P` into every right site of the
//! live link group whose left address is `l`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::address::GornAddress;
use crate::lstag::{DerivedStructure, LstagError, LstagGrammar};
use crate::stag::{Link, StagDerivation};
use crate::syntax::{tokenize, Cursor, ParseError, Tok};
use crate::tag::DerivationTree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeSite {
    Address(GornAddress),
    Link(Link),
}

impl fmt::Display for EdgeSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeSite::Address(a) => write!(f, "{a}"),
            EdgeSite::Link(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptEdge {
    pub line: usize,
    pub parent: String,
    pub site: EdgeSite,
    pub child: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepKind {
    Compose { left: GornAddress, right: GornAddress },
    Share { left: GornAddress },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub line: usize,
    pub pair: String,
    pub kind: StepKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Script {
    Edges { root: String, edges: Vec<ScriptEdge> },
    Steps { start: String, steps: Vec<Step> },
}

/// A failed script step. `step` counts from 1 over the lines after the
/// first; 0 means the `root`/`start` line.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("step {step} (line {line}): {message}")]
pub struct ScriptError {
    pub step: usize,
    pub line: usize,
    pub message: String,
}

/// The grammar name of an instance label: `beans#2` is an instance of
/// `beans`.
pub fn base_name(instance: &str) -> &str {
    instance.split_once('#').map_or(instance, |(n, _)| n)
}

fn instance(cur: &mut Cursor<'_>) -> Result<String, ParseError> {
    let mut name = cur.ident()?;
    if cur.eat("#") {
        match cur.next() {
            Some(Tok::Addr(a)) if a.depth() == 1 => name = format!("{name}#{a}"),
            _ => return Err(cur.error("expected an instance number after `#`")),
        }
    }
    Ok(name)
}

impl Script {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let toks = tokenize(src)?;
        let mut cur = Cursor::new(&toks, src);
        let (line, col) = cur.here();
        match cur.ident() {
            Ok(kw) if kw == "root" => {
                let root = instance(&mut cur)?;
                let mut edges = Vec::new();
                while !cur.at_end() {
                    let (line, _) = cur.here();
                    let parent = instance(&mut cur)?;
                    cur.expect("@")?;
                    let a = cur.address()?;
                    let site = if cur.eat("~") {
                        EdgeSite::Link(Link::new(a, cur.address()?))
                    } else {
                        EdgeSite::Address(a)
                    };
                    cur.expect("<-")?;
                    let child = instance(&mut cur)?;
                    edges.push(ScriptEdge {
                        line,
                        parent,
                        site,
                        child,
                    });
                }
                Ok(Script::Edges { root, edges })
            }
            Ok(kw) if kw == "start" => {
                let start = cur.ident()?;
                let mut steps = Vec::new();
                while !cur.at_end() {
                    let (line, col) = cur.here();
                    let verb = cur.ident()?;
                    let pair = cur.ident()?;
                    cur.expect("@")?;
                    let left = cur.address()?;
                    let kind = match verb.as_str() {
                        "compose" => {
                            cur.expect("~")?;
                            StepKind::Compose {
                                left,
                                right: cur.address()?,
                            }
                        }
                        "share" => StepKind::Share { left },
                        other => {
                            return Err(ParseError::new(
                                line,
                                col,
                                format!("unknown step `{other}`; use compose or share"),
                            ))
                        }
                    };
                    steps.push(Step { line, pair, kind });
                }
                Ok(Script::Steps { start, steps })
            }
            _ => Err(ParseError::new(
                line,
                col,
                "a script starts with `root NAME` or `start NAME`",
            )),
        }
    }
}

fn edge_error(i: usize, e: &ScriptEdge, message: String) -> ScriptError {
    ScriptError {
        step: i + 1,
        line: e.line,
        message,
    }
}

/// Assembles the edge list into a tree of instances. Every instance other
/// than the root needs exactly one parent edge, and the parent must be
/// reachable from the root.
fn assemble<S: Clone>(
    root: &str,
    edges: &[ScriptEdge],
    site: impl Fn(usize, &ScriptEdge) -> Result<S, ScriptError>,
) -> Result<BTreeMap<String, Vec<(S, String)>>, ScriptError> {
    let mut children: BTreeMap<String, Vec<(S, String)>> = BTreeMap::new();
    let mut has_parent = BTreeSet::new();
    for (i, e) in edges.iter().enumerate() {
        if e.child == root || !has_parent.insert(e.child.clone()) {
            return Err(edge_error(i, e, format!("`{}` is attached more than once", e.child)));
        }
        children
            .entry(e.parent.clone())
            .or_default()
            .push((site(i, e)?, e.child.clone()));
    }
    for (i, e) in edges.iter().enumerate() {
        if e.parent != root && !has_parent.contains(&e.parent) {
            return Err(edge_error(
                i,
                e,
                format!("`{}` is never attached to the root", e.parent),
            ));
        }
    }
    // a cycle among non-root instances leaves them unreachable
    let mut reached = BTreeSet::from([root.to_string()]);
    let mut stack = vec![root.to_string()];
    while let Some(n) = stack.pop() {
        for (_, c) in children.get(&n).into_iter().flatten() {
            if reached.insert(c.clone()) {
                stack.push(c.clone());
            }
        }
    }
    if let Some((i, e)) = edges.iter().enumerate().find(|(_, e)| !reached.contains(&e.child)) {
        return Err(edge_error(
            i,
            e,
            format!("`{}` is not reachable from `{root}`", e.child),
        ));
    }
    Ok(children)
}

fn need_edges(script: &Script) -> Result<(&str, &[ScriptEdge]), ScriptError> {
    match script {
        Script::Edges { root, edges } => Ok((root, edges)),
        Script::Steps { .. } => Err(ScriptError {
            step: 0,
            line: 1,
            message: "this grammar takes an edge script (`root NAME`)".into(),
        }),
    }
}

/// The derivation tree an edge script describes. Node names are grammar
/// names, with instance suffixes removed.
pub fn tag_derivation(script: &Script) -> Result<DerivationTree, ScriptError> {
    let (root, edges) = need_edges(script)?;
    let children = assemble(root, edges, |i, e| match &e.site {
        EdgeSite::Address(a) => Ok(a.clone()),
        EdgeSite::Link(_) => Err(edge_error(i, e, "tree grammars attach at addresses, not links".into())),
    })?;
    fn build(n: &str, children: &BTreeMap<String, Vec<(GornAddress, String)>>) -> DerivationTree {
        let mut d = DerivationTree::leaf(base_name(n));
        for (a, c) in children.get(n).into_iter().flatten() {
            d = d.with(a.clone(), build(c, children));
        }
        d
    }
    Ok(build(root, &children))
}

pub fn stag_derivation(script: &Script) -> Result<StagDerivation, ScriptError> {
    let (root, edges) = need_edges(script)?;
    let children = assemble(root, edges, |i, e| match &e.site {
        EdgeSite::Link(l) => Ok(l.clone()),
        EdgeSite::Address(_) => Err(edge_error(i, e, "pair grammars attach at links (`l~r`)".into())),
    })?;
    fn build(n: &str, children: &BTreeMap<String, Vec<(Link, String)>>) -> StagDerivation {
        let mut d = StagDerivation::leaf(base_name(n));
        for (l, c) in children.get(n).into_iter().flatten() {
            d = d.with(l.clone(), build(c, children));
        }
        d
    }
    Ok(build(root, &children))
}

/// Runs a step script. Returns the structure after every step, starting
/// with the start pair alone.
pub fn run_steps(script: &Script, g: &LstagGrammar) -> Result<Vec<DerivedStructure>, ScriptError> {
    let Script::Steps { start, steps } = script else {
        return Err(ScriptError {
            step: 0,
            line: 1,
            message: "link-sharing grammars take a step script (`start NAME`)".into(),
        });
    };
    let first = g.get(start).ok_or_else(|| ScriptError {
        step: 0,
        line: 1,
        message: LstagError::UnknownPair(start.clone()).to_string(),
    })?;
    let mut out = vec![DerivedStructure::from_pair(first)];
    for (i, s) in steps.iter().enumerate() {
        let fail = |e: LstagError| ScriptError {
            step: i + 1,
            line: s.line,
            message: e.to_string(),
        };
        let guest = g
            .get(&s.pair)
            .ok_or_else(|| fail(LstagError::UnknownPair(s.pair.clone())))?;
        let cur = out.last().expect("starts non-empty");
        let next = match &s.kind {
            StepKind::Compose { left, right } => cur.compose(left, right, guest),
            StepKind::Share { left } => cur.share_at(left, guest),
        }
        .map_err(fail)?;
        out.push(next);
    }
    Ok(out)
}
