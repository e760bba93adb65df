//! The plain-text grammar format.
//!
//! ```text
//! start S
//!
//! tree cooked = S(NP! VP(V("cooked") NP!))
//!
//! pair cooked {
//!   left: S(NP! VP(V("cooked") NP!))
//!   right: VP(NP! V("cooked") NP!)
//!   links: [1~1, 2.2~3]
//! }
//!
//! lspair eats {
//!   left: V(V* Conj("and") V("eats"))
//!   right: S(NP! VP(V("eats") NP!) S*)
//!   delta: []
//!   phi: [1, 2.2]
//!   correspond: [ε -> 2.1]
//!   order: declared
//! }
//! ```
//!
//! `//` starts a comment. Inside a block, fields may come in any order and
//! all but `left` and `right` are optional. Printing writes the fields in
//! the order above, omits `correspond` when absent and `order` when it is
//! the default (`gorn`), and separates entries with one blank line.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::address::GornAddress;
use crate::diag::{Diagnostic, DiagnosticKind};
use crate::lstag::{validate_pair, LinkOrder, LstagGrammar, LstagPair};
use crate::restrict::{self, Correspondence};
use crate::stag::{Link, StagError, StagGrammar, StagPair};
use crate::syntax::{tokenize, Cursor, ParseError};
use crate::tag::TagGrammar;
use crate::tree::{parse_tree, SyntaxTree, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeDecl {
    pub name: String,
    pub tree: SyntaxTree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairDecl {
    pub name: String,
    pub left: SyntaxTree,
    pub right: SyntaxTree,
    pub links: Vec<Link>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LspairDecl {
    pub name: String,
    pub left: SyntaxTree,
    pub right: SyntaxTree,
    pub delta: Vec<Link>,
    pub phi: Vec<Link>,
    pub correspond: Option<Vec<(GornAddress, GornAddress)>>,
    pub order: LinkOrder,
}

impl LspairDecl {
    pub fn to_pair(&self) -> LstagPair {
        let p = LstagPair::new(
            self.name.clone(),
            self.left.clone(),
            self.right.clone(),
            self.delta.clone(),
            self.phi.clone(),
            self.order,
        );
        match &self.correspond {
            Some(c) => p.with_correspondence(c.iter().cloned().collect()),
            None => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Entry {
    Tree(TreeDecl),
    Pair(PairDecl),
    Lspair(LspairDecl),
}

impl Entry {
    pub fn name(&self) -> &str {
        match self {
            Entry::Tree(d) => &d.name,
            Entry::Pair(d) => &d.name,
            Entry::Lspair(d) => &d.name,
        }
    }
}

/// Which formalism a document describes, decided by its entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrammarKind {
    Tag,
    Stag,
    Lstag,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GrammarDocument {
    pub start: Option<String>,
    pub entries: Vec<Entry>,
}

fn tree_here(cur: &mut Cursor<'_>) -> Result<SyntaxTree, ParseError> {
    let (line, col) = cur.here();
    parse_tree(cur).map_err(|e| match e {
        TreeError::Parse(p) => p,
        other => ParseError::new(line, col, other.to_string()),
    })
}

fn list<T>(
    cur: &mut Cursor<'_>,
    mut item: impl FnMut(&mut Cursor<'_>) -> Result<T, ParseError>,
) -> Result<Vec<T>, ParseError> {
    cur.expect("[")?;
    let mut out = Vec::new();
    if cur.eat("]") {
        return Ok(out);
    }
    loop {
        out.push(item(cur)?);
        if cur.eat("]") {
            return Ok(out);
        }
        cur.expect(",")?;
    }
}

fn link(cur: &mut Cursor<'_>) -> Result<Link, ParseError> {
    let l = cur.address()?;
    cur.expect("~")?;
    Ok(Link::new(l, cur.address()?))
}

/// `a` means `a~a`.
fn phi_link(cur: &mut Cursor<'_>) -> Result<Link, ParseError> {
    let l = cur.address()?;
    if cur.eat("~") {
        Ok(Link::new(l, cur.address()?))
    } else {
        Ok(Link::reflexive(l))
    }
}

fn arrow(cur: &mut Cursor<'_>) -> Result<(GornAddress, GornAddress), ParseError> {
    let l = cur.address()?;
    cur.expect("->")?;
    Ok((l, cur.address()?))
}

#[derive(Default)]
struct Fields {
    left: Option<SyntaxTree>,
    right: Option<SyntaxTree>,
    links: Option<Vec<Link>>,
    delta: Option<Vec<Link>>,
    phi: Option<Vec<Link>>,
    correspond: Option<Vec<(GornAddress, GornAddress)>>,
    order: Option<LinkOrder>,
}

fn block(cur: &mut Cursor<'_>, allowed: &[&str]) -> Result<Fields, ParseError> {
    cur.expect("{")?;
    let mut f = Fields::default();
    let mut seen = BTreeSet::new();
    while !cur.eat("}") {
        let (line, col) = cur.here();
        let key = cur.ident()?;
        if !allowed.contains(&key.as_str()) {
            return Err(ParseError::new(line, col, format!("unknown field `{key}`")));
        }
        if !seen.insert(key.clone()) {
            return Err(ParseError::new(line, col, format!("field `{key}` given twice")));
        }
        cur.expect(":")?;
        match key.as_str() {
            "left" => f.left = Some(tree_here(cur)?),
            "right" => f.right = Some(tree_here(cur)?),
            "links" => f.links = Some(list(cur, link)?),
            "delta" => f.delta = Some(list(cur, link)?),
            "phi" => f.phi = Some(list(cur, phi_link)?),
            "correspond" => f.correspond = Some(list(cur, arrow)?),
            "order" => {
                let (line, col) = cur.here();
                f.order = Some(match cur.ident()?.as_str() {
                    "gorn" => LinkOrder::Gorn,
                    "declared" => LinkOrder::Declared,
                    other => {
                        return Err(ParseError::new(
                            line,
                            col,
                            format!("unknown order `{other}`; use gorn or declared"),
                        ))
                    }
                });
            }
            _ => unreachable!("checked against the allowed list"),
        }
    }
    if f.left.is_none() || f.right.is_none() {
        return Err(cur.error("block needs both `left` and `right`"));
    }
    Ok(f)
}

impl GrammarDocument {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let toks = tokenize(src)?;
        let mut cur = Cursor::new(&toks, src);
        let mut doc = GrammarDocument::default();
        while !cur.at_end() {
            let (line, col) = cur.here();
            match cur.ident()?.as_str() {
                "start" => {
                    if doc.start.is_some() {
                        return Err(ParseError::new(line, col, "`start` given twice"));
                    }
                    doc.start = Some(cur.ident()?);
                }
                "tree" => {
                    let name = cur.ident()?;
                    cur.expect("=")?;
                    let tree = tree_here(&mut cur)?;
                    doc.entries.push(Entry::Tree(TreeDecl { name, tree }));
                }
                "pair" => {
                    let name = cur.ident()?;
                    let f = block(&mut cur, &["left", "right", "links"])?;
                    doc.entries.push(Entry::Pair(PairDecl {
                        name,
                        left: f.left.unwrap(),
                        right: f.right.unwrap(),
                        links: f.links.unwrap_or_default(),
                    }));
                }
                "lspair" => {
                    let name = cur.ident()?;
                    let f = block(&mut cur, &["left", "right", "delta", "phi", "correspond", "order"])?;
                    doc.entries.push(Entry::Lspair(LspairDecl {
                        name,
                        left: f.left.unwrap(),
                        right: f.right.unwrap(),
                        delta: f.delta.unwrap_or_default(),
                        phi: f.phi.unwrap_or_default(),
                        correspond: f.correspond,
                        order: f.order.unwrap_or_default(),
                    }));
                }
                other => {
                    return Err(ParseError::new(
                        line,
                        col,
                        format!("expected `start`, `tree`, `pair` or `lspair`, found `{other}`"),
                    ))
                }
            }
        }
        Ok(doc)
    }

    pub fn start_symbol(&self) -> &str {
        self.start.as_deref().unwrap_or("S")
    }

    pub fn kind(&self) -> GrammarKind {
        if self.entries.iter().any(|e| matches!(e, Entry::Lspair(_))) {
            GrammarKind::Lstag
        } else if self.entries.iter().any(|e| matches!(e, Entry::Pair(_))) {
            GrammarKind::Stag
        } else {
            GrammarKind::Tag
        }
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name() == name)
    }

    /// Every structural problem, plus restriction violations when
    /// `restrictions` is set.
    pub fn diagnostics(&self, restrictions: bool) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut names = BTreeSet::new();
        for e in &self.entries {
            if !names.insert(e.name()) {
                out.push(Diagnostic::new(
                    DiagnosticKind::DuplicateName,
                    e.name(),
                    format!("`{}` is defined more than once", e.name()),
                ));
            }
            match e {
                Entry::Tree(d) => {
                    if let Err(err) = d.tree.classify() {
                        out.push(Diagnostic::new(DiagnosticKind::MalformedTree, &d.name, err.to_string()));
                    }
                }
                Entry::Pair(d) => {
                    if let Err(err) = StagPair::new(d.name.clone(), d.left.clone(), d.right.clone(), d.links.clone()) {
                        out.push(stag_diagnostic(&d.name, &err));
                    }
                }
                Entry::Lspair(d) => {
                    let p = d.to_pair();
                    out.extend(validate_pair(&p));
                    if let Some(c) = &d.correspond {
                        let set: Correspondence = c.iter().cloned().collect();
                        if set.len() != c.len() {
                            out.push(Diagnostic::new(
                                DiagnosticKind::InvalidCorrespondence,
                                format!("{}.correspond", d.name),
                                "a left address is mapped twice",
                            ));
                        }
                    }
                    if restrictions {
                        out.extend(restrict::check_pair(&p));
                    } else if let Some(c) = p.correspondence() {
                        out.extend(restrict::validate_correspondence(&p, c));
                    }
                }
            }
        }
        out
    }

    pub fn tag_grammar(&self) -> TagGrammar {
        let mut g = TagGrammar::new();
        for e in &self.entries {
            if let Entry::Tree(d) = e {
                let _ = g.insert(d.name.clone(), d.tree.clone());
            }
        }
        g
    }

    pub fn stag_grammar(&self) -> StagGrammar {
        let mut g = StagGrammar::new();
        for e in &self.entries {
            if let Entry::Pair(d) = e {
                if let Ok(p) = StagPair::new(d.name.clone(), d.left.clone(), d.right.clone(), d.links.clone()) {
                    let _ = g.insert(p);
                }
            }
        }
        g
    }

    /// All lspairs; the first definition of a duplicated name wins.
    pub fn lstag_grammar(&self) -> LstagGrammar {
        let mut g = LstagGrammar::new();
        for e in &self.entries {
            if let Entry::Lspair(d) = e {
                let _ = g.insert(d.to_pair());
            }
        }
        g
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

fn stag_diagnostic(name: &str, e: &StagError) -> Diagnostic {
    let kind = match e {
        StagError::OperationMismatch { .. } => DiagnosticKind::OperationMismatch,
        StagError::SymbolMismatch { .. } => DiagnosticKind::SymbolMismatch,
        StagError::UnresolvedEndpoint { .. } => DiagnosticKind::UnresolvedEndpoint,
        StagError::DuplicateLink { .. } => DiagnosticKind::DuplicateEdge,
        _ => DiagnosticKind::MalformedTree,
    };
    Diagnostic::new(kind, name, e.to_string())
}

fn write_links(out: &mut String, links: &[Link], reflexive_short: bool) {
    out.push('[');
    for (i, l) in links.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if reflexive_short && l.is_reflexive() {
            let _ = write!(out, "{}", l.left);
        } else {
            let _ = write!(out, "{l}");
        }
    }
    out.push(']');
}

impl fmt::Display for GrammarDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut blocks = Vec::new();
        if let Some(s) = &self.start {
            blocks.push(format!("start {s}\n"));
        }
        for e in &self.entries {
            let mut out = String::new();
            match e {
                Entry::Tree(d) => {
                    let _ = writeln!(out, "tree {} = {}", d.name, d.tree);
                }
                Entry::Pair(d) => {
                    let _ = writeln!(out, "pair {} {{", d.name);
                    let _ = writeln!(out, "  left: {}", d.left);
                    let _ = writeln!(out, "  right: {}", d.right);
                    out.push_str("  links: ");
                    write_links(&mut out, &d.links, false);
                    out.push_str("\n}\n");
                }
                Entry::Lspair(d) => {
                    let _ = writeln!(out, "lspair {} {{", d.name);
                    let _ = writeln!(out, "  left: {}", d.left);
                    let _ = writeln!(out, "  right: {}", d.right);
                    out.push_str("  delta: ");
                    write_links(&mut out, &d.delta, false);
                    out.push_str("\n  phi: ");
                    write_links(&mut out, &d.phi, true);
                    out.push('\n');
                    if let Some(c) = &d.correspond {
                        out.push_str("  correspond: [");
                        for (i, (l, r)) in c.iter().enumerate() {
                            if i > 0 {
                                out.push_str(", ");
                            }
                            let _ = write!(out, "{l} -> {r}");
                        }
                        out.push_str("]\n");
                    }
                    if d.order == LinkOrder::Declared {
                        out.push_str("  order: declared\n");
                    }
                    out.push_str("}\n");
                }
            }
            blocks.push(out);
        }
        f.write_str(&blocks.join("\n"))
    }
}
