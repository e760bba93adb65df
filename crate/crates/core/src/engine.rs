//! Bounded enumeration of every derivation a grammar licenses.
//!
//! The search runs level by level: level `k` holds every distinct
//! derivation with exactly `k` operations. Each state on a level expands
//! independently, so with the `parallel` feature a level is expanded on the
//! rayon pool; results are collected in input order and merged the same way
//! either way, so both strategies return identical output.

use std::collections::BTreeSet;

use crate::lstag::{
    canonical_key, DerivationRecord, DerivedStructure, LstagGrammar, LstagPair, OperationKind, RightDag, Site,
};
use crate::restrict;
use crate::tag::{TagGrammar, TrackedTree};
use crate::tree::{NodeKind, SyntaxTree, TreeClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum BudgetError {
    #[error("max operations must be at least 1")]
    ZeroOperations,
    #[error("max structures must be at least 1")]
    ZeroStructures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    max_operations: usize,
    max_structures: usize,
}

impl EnumerationBudget {
    pub const DEFAULT_MAX_STRUCTURES: usize = 100_000;

    pub fn new(max_operations: usize, max_structures: usize) -> Result<Self, BudgetError> {
        if max_operations == 0 {
            return Err(BudgetError::ZeroOperations);
        }
        if max_structures == 0 {
            return Err(BudgetError::ZeroStructures);
        }
        Ok(EnumerationBudget {
            max_operations,
            max_structures,
        })
    }

    pub fn operations(max_operations: usize) -> Result<Self, BudgetError> {
        Self::new(max_operations, Self::DEFAULT_MAX_STRUCTURES)
    }

    pub fn max_operations(&self) -> usize {
        self.max_operations
    }

    pub fn max_structures(&self) -> usize {
        self.max_structures
    }
}

/// How a level is expanded. Without the `parallel` feature, `Parallel`
/// runs sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Debug, Clone)]
pub enum Grammar<'a> {
    Tag(&'a TagGrammar),
    Lstag(&'a LstagGrammar),
}

#[derive(Debug, Clone)]
pub struct Options {
    pub start: String,
    pub restrictions: bool,
    pub strategy: Strategy,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            start: "S".into(),
            restrictions: true,
            strategy: Strategy::default(),
        }
    }
}

/// One enumerated derivation. `right` is absent for plain TAG grammars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumerated {
    pub instances: Vec<String>,
    pub history: Vec<DerivationRecord>,
    pub key: String,
    pub left: SyntaxTree,
    pub right: Option<RightDag>,
    pub left_yield: String,
}

impl Enumerated {
    pub fn operations(&self) -> usize {
        self.history.len()
    }

    pub fn is_complete(&self) -> bool {
        self.left.is_complete() && self.right.as_ref().is_none_or(|r| r.unfold().is_complete())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub results: Vec<Enumerated>,
    /// Set when the structure budget cut the search short; the results are
    /// then not complete for the operation budget.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
enum State {
    Tag {
        instances: Vec<String>,
        tree: TrackedTree,
        history: Vec<DerivationRecord>,
    },
    Lstag(DerivedStructure),
}

impl State {
    fn key(&self) -> String {
        match self {
            State::Tag { instances, history, .. } => canonical_key(instances, history),
            State::Lstag(d) => d.key(),
        }
    }

    fn into_result(self, key: String) -> Enumerated {
        let (instances, history, left, right) = match self {
            State::Tag {
                instances,
                tree,
                history,
            } => (instances, history, tree.tree().clone(), None),
            State::Lstag(d) => (
                d.instances().to_vec(),
                d.history().to_vec(),
                d.left_tree().clone(),
                Some(d.right().clone()),
            ),
        };
        Enumerated {
            left_yield: left.partial_yield_string(),
            instances,
            history,
            key,
            left,
            right,
        }
    }
}

fn is_initial(t: &SyntaxTree) -> bool {
    t.class() == Some(TreeClass::Initial)
}

fn is_auxiliary(t: &SyntaxTree) -> bool {
    t.class() == Some(TreeClass::Auxiliary)
}

fn tag_successors(
    g: &TagGrammar,
    instances: &[String],
    tree: &TrackedTree,
    history: &[DerivationRecord],
) -> Vec<State> {
    let instance = instances.len();
    let mut out = Vec::new();
    let push = |out: &mut Vec<State>, name: &str, t: TrackedTree, kind, at: &crate::address::GornAddress| {
        let origin = tree.origin(at).expect("sites come from the tree");
        let mut instances = instances.to_vec();
        instances.push(name.to_string());
        let mut history = history.to_vec();
        history.push(DerivationRecord {
            kind,
            guest: instance,
            guest_name: name.to_string(),
            left: Site {
                instance: origin.instance,
                address: origin.address.clone(),
            },
            right: Vec::new(),
        });
        out.push(State::Tag {
            instances,
            tree: t,
            history,
        });
    };
    for (at, kind) in tree.tree().nodes() {
        match kind {
            NodeKind::SubstitutionSlot(sym) => {
                for (name, e) in g.iter() {
                    if is_initial(e.tree()) && e.tree().root_symbol() == sym {
                        if let Ok(t) = tree.substitute(at, e.tree(), instance) {
                            push(&mut out, name, t, OperationKind::Substitution, at);
                        }
                    }
                }
            }
            NodeKind::Interior(sym) => {
                for (name, e) in g.iter() {
                    if is_auxiliary(e.tree()) && e.tree().root_symbol() == sym {
                        if let Ok((t, _)) = tree.adjoin(at, e.tree(), instance) {
                            push(&mut out, name, t, OperationKind::Adjunction, at);
                        }
                    }
                }
            }
            _ => {}
        }
    }
    out
}

fn lstag_successors(pairs: &[&LstagPair], d: &DerivedStructure) -> Vec<State> {
    let mut out = Vec::new();
    for i in 0..d.live_groups().len() {
        for p in pairs.iter().filter(|p| is_initial(p.left()) && is_initial(p.right())) {
            if let Ok(next) = d.substitute_group(i, p) {
                out.push(State::Lstag(next));
            }
        }
    }
    let aux: Vec<&&LstagPair> = pairs
        .iter()
        .filter(|p| is_auxiliary(p.left()) && is_auxiliary(p.right()))
        .collect();
    if aux.is_empty() {
        return out;
    }
    let right = d.right();
    let right_sites: Vec<_> = right
        .canonical_addresses()
        .into_keys()
        .filter(|&id| matches!(right.kind(id), NodeKind::Interior(_)) && !right.is_adjoined(right.origin(id)))
        .collect();
    for (at, kind) in d.left_tree().nodes() {
        let NodeKind::Interior(lsym) = kind else { continue };
        let origin = d.left().origin(at).expect("every node has an origin");
        if d.left().is_adjoined(origin) {
            continue;
        }
        for &rid in right_sites
            .iter()
            .filter(|&&id| right.origin(id).instance == origin.instance)
        {
            let rsym = right.kind(rid).symbol();
            for p in aux
                .iter()
                .filter(|p| p.left().root_symbol() == lsym && Some(p.right().root_symbol()) == rsym)
            {
                if let Ok(next) = d.adjoin_node(at, rid, p) {
                    out.push(State::Lstag(next));
                }
            }
        }
    }
    out
}

struct Search<'a> {
    tag: Option<&'a TagGrammar>,
    pairs: Vec<&'a LstagPair>,
}

impl Search<'_> {
    fn successors(&self, s: &State) -> Vec<(String, State)> {
        let next = match (s, self.tag) {
            (
                State::Tag {
                    instances,
                    tree,
                    history,
                },
                Some(g),
            ) => tag_successors(g, instances, tree, history),
            (State::Lstag(d), _) => lstag_successors(&self.pairs, d),
            _ => Vec::new(),
        };
        next.into_iter().map(|s| (s.key(), s)).collect()
    }
}

fn expand(search: &Search<'_>, level: &[(String, State)], strategy: Strategy) -> Vec<(String, State)> {
    #[cfg(feature = "parallel")]
    if strategy == Strategy::Parallel {
        use rayon::prelude::*;
        let chunks: Vec<Vec<(String, State)>> = level.par_iter().map(|(_, s)| search.successors(s)).collect();
        return chunks.into_iter().flatten().collect();
    }
    let _ = strategy;
    level.iter().flat_map(|(_, s)| search.successors(s)).collect()
}

/// Every derivation from a start tree (or start pair) with at most
/// `max_operations` operations. Histories that differ only in the order of
/// their operations are one derivation and appear once.
///
/// Results are sorted by left yield, then operation count, then key.
pub fn enumerate(grammar: Grammar<'_>, budget: EnumerationBudget, opts: &Options) -> Enumeration {
    let filtered;
    let (search, starts) = match grammar {
        Grammar::Tag(g) => {
            let starts = g
                .iter()
                .filter(|(_, e)| is_initial(e.tree()) && e.tree().root_symbol() == opts.start)
                .map(|(name, e)| State::Tag {
                    instances: vec![name.to_string()],
                    tree: TrackedTree::new(e.tree().clone(), 0),
                    history: Vec::new(),
                })
                .collect::<Vec<_>>();
            (
                Search {
                    tag: Some(g),
                    pairs: Vec::new(),
                },
                starts,
            )
        }
        Grammar::Lstag(g) => {
            let g = if opts.restrictions {
                filtered = restrict::admissible(g).0;
                &filtered
            } else {
                g
            };
            let pairs: Vec<&LstagPair> = g.iter().collect();
            let starts = pairs
                .iter()
                .filter(|p| is_initial(p.left()) && is_initial(p.right()) && p.left().root_symbol() == opts.start)
                .map(|p| State::Lstag(DerivedStructure::from_pair(p)))
                .collect();
            (Search { tag: None, pairs }, starts)
        }
    };

    let mut seen = BTreeSet::new();
    let mut all: Vec<(String, State)> = Vec::new();
    let mut truncated = false;
    let mut level: Vec<(String, State)> = starts.into_iter().map(|s| (s.key(), s)).collect();
    for depth in 0..=budget.max_operations {
        if depth > 0 {
            level = expand(&search, &level, opts.strategy);
        }
        level.retain(|(k, _)| seen.insert(k.clone()));
        let room = budget.max_structures - all.len();
        if level.len() > room {
            level.truncate(room);
            truncated = true;
        }
        all.extend(level.iter().cloned());
        if truncated || level.is_empty() {
            break;
        }
    }

    let mut results: Vec<Enumerated> = all.into_iter().map(|(k, s)| s.into_result(k)).collect();
    results.sort_by(|a, b| (&a.left_yield, a.history.len(), &a.key).cmp(&(&b.left_yield, b.history.len(), &b.key)));
    Enumeration { results, truncated }
}

/// Distinct yields of complete derivations, sorted.
pub fn language_sample(grammar: Grammar<'_>, budget: EnumerationBudget, opts: &Options) -> Vec<String> {
    let e = enumerate(grammar, budget, opts);
    let set: BTreeSet<String> = e
        .results
        .into_iter()
        .filter(|r| r.is_complete())
        .map(|r| r.left_yield)
        .collect();
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> TagGrammar {
        TagGrammar::from_entries([
            ("cooked", r#"S(NP! VP(V("cooked") NP!))"#.parse().unwrap()),
            ("John", r#"NP(PN("John"))"#.parse().unwrap()),
            ("beans", r#"NP(N("beans"))"#.parse().unwrap()),
            ("dried", r#"N(A("dried") N*)"#.parse().unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn budget_must_be_positive() {
        assert_eq!(EnumerationBudget::operations(0), Err(BudgetError::ZeroOperations));
        assert_eq!(EnumerationBudget::new(1, 0), Err(BudgetError::ZeroStructures));
    }

    #[test]
    fn tag_fixture_counts() {
        let g = fig2();
        let e = enumerate(
            Grammar::Tag(&g),
            EnumerationBudget::operations(3).unwrap(),
            &Options::default(),
        );
        assert!(!e.truncated);
        assert_eq!(e.results.len(), 17);
        let lang = language_sample(
            Grammar::Tag(&g),
            EnumerationBudget::operations(3).unwrap(),
            &Options::default(),
        );
        assert!(lang.contains(&"John cooked beans".to_string()));
        assert!(lang.contains(&"John cooked dried beans".to_string()));
        assert_eq!(lang.len(), 8);
    }

    #[test]
    fn single_slot_free_tree() {
        let g = TagGrammar::from_entries([("hi", r#"S("hi")"#.parse().unwrap())]).unwrap();
        let e = enumerate(
            Grammar::Tag(&g),
            EnumerationBudget::operations(2).unwrap(),
            &Options::default(),
        );
        assert_eq!(e.results.len(), 1);
        assert_eq!(e.results[0].left_yield, "hi");
    }

    #[test]
    fn empty_grammar() {
        let g = TagGrammar::new();
        assert!(language_sample(
            Grammar::Tag(&g),
            EnumerationBudget::operations(3).unwrap(),
            &Options::default()
        )
        .is_empty());
    }

    #[test]
    fn structure_budget_truncates() {
        let g = fig2();
        let e = enumerate(
            Grammar::Tag(&g),
            EnumerationBudget::new(3, 5).unwrap(),
            &Options::default(),
        );
        assert!(e.truncated);
        assert_eq!(e.results.len(), 5);
    }

    #[test]
    fn strategies_agree() {
        let g = fig2();
        let b = EnumerationBudget::operations(4).unwrap();
        let seq = enumerate(
            Grammar::Tag(&g),
            b,
            &Options {
                strategy: Strategy::Sequential,
                ..Options::default()
            },
        );
        let par = enumerate(
            Grammar::Tag(&g),
            b,
            &Options {
                strategy: Strategy::Parallel,
                ..Options::default()
            },
        );
        assert_eq!(seq, par);
    }
}
