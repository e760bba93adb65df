mod common;

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};

use common::{fixture, leaves_oracle, load, random_tree, read_fixture, rng, split_leaves};
use lstag_core::address::{addr, rebase_address, GornAddress};
use lstag_core::engine::{self, EnumerationBudget, Grammar, Options};
use lstag_core::export;
use lstag_core::grammar_file::GrammarDocument;
use lstag_core::lstag::{derivation_projections, DerivationGraph, DerivedStructure, LstagGrammar, NodeId, RightDag};
use lstag_core::restrict::{check_left_contiguity, check_lexical_contiguity};
use lstag_core::script::{self, Script};
use lstag_core::stag::{stag_compose, Link, StagPair};
use lstag_core::tag::{self, DerivationTree, Origin};
use lstag_core::tree::{self, NodeKind, SyntaxTree};
use rand::seq::SliceRandom;
use rand::Rng;

fn script(name: &str) -> Script {
    Script::parse(&read_fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn steps(grammar: &str, script_name: &str) -> Vec<DerivedStructure> {
    let g = load(grammar).lstag_grammar();
    script::run_steps(&script(script_name), &g).unwrap()
}

fn node_named(d: &DerivedStructure, name: &str) -> NodeId {
    let dag = d.right();
    let hits: Vec<NodeId> = dag
        .reachable()
        .into_iter()
        .filter(|&id| dag.origin(id).address.is_root() && d.instances()[dag.origin(id).instance] == name)
        .collect();
    assert_eq!(hits.len(), 1, "{name} appears once in the right structure");
    hits[0]
}

fn replay_cooked() {
    let doc = load("cooked_tag.lstag");
    let g = doc.tag_grammar();
    let from_script = script::tag_derivation(&script("cooked_tag.script")).unwrap();
    let direct = DerivationTree::leaf("cooked")
        .with(addr("1"), DerivationTree::leaf("John"))
        .with(
            addr("2.2"),
            DerivationTree::leaf("beans").with(addr("1"), DerivationTree::leaf("dried")),
        );
    assert_eq!(from_script, direct);
    assert!(tag::validate_derivation(&g, &direct).is_empty());
    let t = tag::replay(&g, &direct).unwrap();
    assert_eq!(t.yield_string().unwrap(), "John cooked dried beans");
}

fn shared_coordination() {
    let all = steps("cooks_eats.lstag", "cooks_eats.script");
    let d = all.last().unwrap();
    let golden: serde_json::Value = serde_json::from_str(&read_fixture("golden/cooks_eats.json")).unwrap();
    assert_eq!(export::derived_json(d), golden);

    let g = load("cooks_eats.lstag").lstag_grammar();
    let direct = DerivedStructure::from_pair(g.get("cooks").unwrap())
        .compose(&addr("2.1"), &addr("ε"), g.get("eats").unwrap())
        .unwrap()
        .share_at(&addr("1"), g.get("John").unwrap())
        .unwrap()
        .share_at(&addr("2.2"), g.get("beans").unwrap())
        .unwrap();
    assert_eq!(&direct, d);

    assert_eq!(d.left_tree().yield_string().unwrap(), "John cooks and eats beans");
    let deg = d.right().in_degrees();
    assert_eq!(deg[&node_named(d, "John")], 2);
    assert_eq!(deg[&node_named(d, "beans")], 2);
    let (_, graph) = d.projections();
    assert!(graph.is_acyclic());
    assert!(!graph.is_tree());
}

fn random_links(r: &mut impl Rng, left: &SyntaxTree, right: &SyntaxTree) -> Vec<Link> {
    let mut out = Vec::new();
    for (la, lk) in left.nodes() {
        for (ra, rk) in right.nodes() {
            let same = match (lk, rk) {
                (NodeKind::SubstitutionSlot(a), NodeKind::SubstitutionSlot(b)) => a == b,
                (NodeKind::Interior(a), NodeKind::Interior(b)) => a == b,
                _ => false,
            };
            if same && r.gen_bool(0.4) {
                out.push(Link::new(la.clone(), ra.clone()));
            }
        }
    }
    out
}

fn random_pair(r: &mut impl Rng, name: &str, root: &str, aux: bool) -> StagPair {
    let syms = ["S", "NP", "VP"];
    let left = random_tree(r, &syms, root, 7, aux);
    let right = random_tree(r, &syms, root, 7, aux);
    let links = random_links(r, &left, &right);
    StagPair::new(name, left, right, links).unwrap()
}

fn stag_link_law() -> usize {
    let mut r = rng(7);
    let mut checked = 0;
    while checked < 1000 {
        let host = random_pair(&mut r, "host", "S", false);
        if host.links().is_empty() {
            continue;
        }
        let member = r.gen_range(0..host.links().len());
        let link = &host.links()[member];
        let (sym, aux) = match host.left().node_at(&link.left).unwrap() {
            NodeKind::SubstitutionSlot(s) => (s.clone(), false),
            NodeKind::Interior(s) => (s.clone(), true),
            k => panic!("link at a {k:?}"),
        };
        let guest = random_pair(&mut r, "guest", &sym, aux);
        let out = stag_compose(&host, member, &guest).unwrap();
        assert_eq!(out.links().len(), host.links().len() + guest.links().len() - 1);
        checked += 1;
    }
    checked
}

/// Every composition available from `d` in grammar `g`.
fn successors(d: &DerivedStructure, g: &LstagGrammar) -> Vec<DerivedStructure> {
    let mut out = Vec::new();
    for p in g.iter() {
        if p.left().foot().is_none() {
            for i in 0..d.live_groups().len() {
                out.extend(d.substitute_group(i, p).ok());
            }
        } else {
            let right: Vec<NodeId> = d.right().reachable();
            for (la, _) in d.left_tree().interior_nodes() {
                for &rid in &right {
                    out.extend(d.adjoin_node(la, rid, p).ok());
                }
            }
        }
    }
    out
}

fn phi_exhaustion() -> usize {
    let mut r = rng(11);
    let mut checked = 0;
    for (grammar, start) in [("cooks_eats.lstag", "cooks"), ("topicalization.lstag", "likes")] {
        let g = load(grammar).lstag_grammar();
        for _ in 0..100 {
            let mut d = DerivedStructure::from_pair(g.get(start).unwrap());
            for _ in 0..5 {
                let next = successors(&d, &g);
                let Some(n) = next.choose(&mut r) else { break };
                let guest = n.instances().len() - 1;
                let pair = g.get(&n.instances()[guest]).unwrap();
                for eta in pair.phi_addresses() {
                    let origin = Origin::new(guest, eta);
                    let hits: Vec<_> = n
                        .live_groups()
                        .iter()
                        .filter(|grp| grp.right.iter().any(|&id| *n.right().origin(id) == origin))
                        .collect();
                    assert_eq!(hits.len(), 1, "phi node sits in exactly one group");
                    assert!(hits[0].right.iter().any(|&id| n.right().origin(id).instance != guest));
                }
                let entries = |s: &DerivedStructure| s.live_groups().iter().map(|grp| grp.right.len()).sum::<usize>();
                let fresh = pair.delta().len() + pair.phi().len();
                let (before, after) = (entries(&d) + fresh, entries(n));
                let consumed = before - after;
                assert!(
                    consumed == 0 || d.live_groups().iter().any(|grp| grp.right.len() == consumed),
                    "at most one group is consumed"
                );
                if !pair.phi().is_empty() {
                    checked += 1;
                }
                d = n.clone();
            }
        }
    }
    assert!(checked > 0);
    checked
}

fn link_laws() {
    stag_link_law();
    phi_exhaustion();
}

fn restrictions() {
    let doc = load("excised.lstag");
    let g = doc.lstag_grammar();
    let p = g.get("likes_excised").unwrap();
    let diags = check_left_contiguity(p, p.correspondence().unwrap());
    assert!(diags.iter().any(|d| d.message.contains("[S [NP↓] [VP]]")), "{diags:?}");
    assert!(!doc.diagnostics(true).is_empty());
    assert!(doc.diagnostics(false).is_empty());

    let doc = load("topicalization.lstag");
    let g = doc.lstag_grammar();
    assert!(!check_lexical_contiguity(g.get("likes").unwrap().left()).is_empty());
    assert!(!check_lexical_contiguity(g.get("hates_conj").unwrap().right()).is_empty());
    let budget = EnumerationBudget::operations(3).unwrap();
    let sentence = "peanuts john likes and almonds hates".to_string();
    let on = engine::language_sample(Grammar::Lstag(&g), budget, &Options::default());
    assert!(!on.contains(&sentence), "{on:?}");
    let off = Options {
        restrictions: false,
        ..Options::default()
    };
    let off = engine::language_sample(Grammar::Lstag(&g), budget, &off);
    assert!(off.contains(&sentence), "{off:?}");
}

fn adjunction_wrapping() {
    let mut r = rng(5);
    let syms = ["S", "NP", "VP"];
    let mut checked = 0;
    while checked < 1000 {
        let t = random_tree(&mut r, &syms, "S", 8, false);
        let sites: Vec<(GornAddress, String)> = t.interior_nodes().map(|(a, s)| (a.clone(), s.to_string())).collect();
        let (site, sym) = sites.choose(&mut r).unwrap().clone();
        let aux = random_tree(&mut r, &syms, &sym, 8, true);
        let foot = aux.foot().unwrap().0.clone();
        let out = tree::adjoin(&t, &site, &aux).unwrap();

        let (u, v, z) = split_leaves(&t, &site);
        let (w1, _, w2) = split_leaves(&aux, &foot);
        let spliced: Vec<String> = [u, w1, v, w2, z].concat();
        assert_eq!(leaves_oracle(&out), spliced);
        assert_eq!(out.partial_yield(), spliced);

        assert_eq!(out.len(), t.len() + aux.len() - 1);
        for (a, k) in t.nodes() {
            assert_eq!(out.node_at(&rebase_address(a, &site, &foot)).unwrap(), k);
        }
        for (a, k) in aux.nodes() {
            if *a != foot {
                assert_eq!(out.node_at(&site.join(a)).unwrap(), k);
            }
        }
        checked += 1;
    }
}

/// The right derivation graph of an unshared derivation, as a tree.
fn graph_to_tree(g: &DerivationGraph, names: &[String]) -> DerivationTree {
    fn build(i: usize, g: &DerivationGraph, names: &[String]) -> DerivationTree {
        let mut d = DerivationTree::leaf(names[i].clone());
        for e in g.edges.iter().filter(|e| e.from == i) {
            d = d.with(e.addr.clone(), build(e.to, g, names));
        }
        d
    }
    assert!(g.is_tree());
    build(0, g, names)
}

fn check_unshared(
    instances: &[String],
    history: &[lstag_core::lstag::DerivationRecord],
    left: &SyntaxTree,
    right: &RightDag,
    g: &LstagGrammar,
) {
    let (l, rg) = derivation_projections(instances, history).unwrap();
    let r = graph_to_tree(&rg, instances);
    assert!(right.is_tree());
    assert_eq!(&tag::replay(&g.left_grammar().unwrap(), &l).unwrap(), left);
    assert_eq!(tag::replay(&g.right_grammar().unwrap(), &r).unwrap(), right.unfold());
}

fn degenerate_equivalence() {
    let g = load("cooked_sync.lstag").lstag_grammar();
    assert!(g.iter().all(|p| p.phi().is_empty()));
    let last = steps("cooked_sync.lstag", "cooked_sync.script").pop().unwrap();
    assert_eq!(last.left_tree().yield_string().unwrap(), "John cooked dried beans");
    assert_eq!(last.right().unfold().yield_string().unwrap(), "John cooked beans dried");
    check_unshared(last.instances(), last.history(), last.left_tree(), last.right(), &g);

    let e = engine::enumerate(
        Grammar::Lstag(&g),
        EnumerationBudget::operations(4).unwrap(),
        &Options::default(),
    );
    assert!(e.results.len() > 1);
    for d in &e.results {
        check_unshared(&d.instances, &d.history, &d.left, d.right.as_ref().unwrap(), &g);
    }
}

fn engine_lines(doc: &GrammarDocument, max_ops: usize) -> Vec<String> {
    let (tag_g, lstag_g);
    let grammar = if doc
        .entries
        .iter()
        .all(|e| matches!(e, lstag_core::grammar_file::Entry::Tree(_)))
    {
        tag_g = doc.tag_grammar();
        Grammar::Tag(&tag_g)
    } else {
        lstag_g = doc.lstag_grammar();
        Grammar::Lstag(&lstag_g)
    };
    let opts = Options {
        start: doc.start_symbol().to_string(),
        ..Options::default()
    };
    let e = engine::enumerate(grammar, EnumerationBudget::operations(max_ops).unwrap(), &opts);
    assert!(!e.truncated);
    let mut lines: Vec<String> = e
        .results
        .iter()
        .map(|r| {
            let (l, _) = derivation_projections(&r.instances, &r.history).unwrap();
            format!("{}\t{}", l.canonical(), r.left.partial_yield_string())
        })
        .collect();
    lines.sort();
    lines
}

fn enumeration_completeness() {
    for name in ["cooked_tag", "cooks_eats"] {
        let doc = load(&format!("{name}.lstag"));
        let mut hand: Vec<String> = read_fixture(&format!("{name}.derivations"))
            .lines()
            .map(String::from)
            .collect();
        hand.sort();
        assert_eq!(engine_lines(&doc, 4), hand, "{name}");
        for k in 1..4 {
            let within: Vec<String> = hand
                .iter()
                .filter(|l| l.split('\t').next().unwrap().matches(':').count() <= k)
                .cloned()
                .collect();
            assert_eq!(engine_lines(&doc, k), within, "{name} at {k}");
        }
    }
}

fn round_trips() {
    let mut names: Vec<String> = std::fs::read_dir(fixture(""))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".lstag"))
        .collect();
    names.sort();
    assert!(names.len() >= 7);
    for n in &names {
        let src = read_fixture(n);
        let doc = load(n);
        assert_eq!(doc.to_string(), src, "{n} prints back byte for byte");
        assert_eq!(GrammarDocument::parse(&doc.to_string()).unwrap(), doc, "{n}");
    }

    let d = steps("cooks_eats.lstag", "cooks_eats.script").pop().unwrap();
    assert_eq!(export::derived_dot(&d), read_fixture("golden/cooks_eats.dot"));

    let doc = load("cooked_tag.lstag");
    let t = script::tag_derivation(&script("cooked_tag.script")).unwrap();
    let tree = tag::replay(&doc.tag_grammar(), &t).unwrap();
    assert_eq!(export::tag_dot(&tree, &t), read_fixture("golden/cooked_tag.dot"));

    assert_eq!(
        export::grammar_dot(&load("cooks_eats.lstag")),
        read_fixture("golden/cooks_eats_grammar.dot")
    );
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn()); 8] = [
        ("replayed derivation yields \"John cooked dried beans\"", replay_cooked),
        (
            "shared coordination matches golden JSON with a tangled right side",
            shared_coordination,
        ),
        (
            "link counts follow the composition laws and phi links are exhausted",
            link_laws,
        ),
        (
            "contiguity restrictions block exactly the offending pairs",
            restrictions,
        ),
        ("adjunction wraps the excised yield", adjunction_wrapping),
        (
            "unshared derivations reduce to two plain TAG replays",
            degenerate_equivalence,
        ),
        (
            "enumeration matches the hand-made derivation lists",
            enumeration_completeness,
        ),
        ("grammar printing round-trips and DOT matches the goldens", round_trips),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let ok = panic::catch_unwind(AssertUnwindSafe(run)).is_ok();
        println!("[{}] {name}: {}", i + 1, if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn random_trees_stay_small() {
    let mut r = rng(1);
    let mut sizes = BTreeMap::new();
    for _ in 0..500 {
        let aux = r.gen_bool(0.5);
        let t = random_tree(&mut r, &["S", "NP"], "S", 8, aux);
        assert!(t.len() <= 8);
        *sizes.entry(t.len()).or_insert(0) += 1;
    }
    assert!(sizes.len() > 4, "the generator covers several sizes: {sizes:?}");
}
