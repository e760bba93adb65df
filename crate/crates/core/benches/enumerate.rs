use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lstag_core::engine::{enumerate, EnumerationBudget, Grammar, Options, Strategy};
use lstag_core::grammar_file::GrammarDocument;

fn grammars() -> Vec<(&'static str, GrammarDocument)> {
    [
        ("cooked_tag", include_str!("../fixtures/cooked_tag.lstag")),
        ("cooks_eats", include_str!("../fixtures/cooks_eats.lstag")),
    ]
    .into_iter()
    .map(|(n, src)| (n, GrammarDocument::parse(src).expect("fixture parses")))
    .collect()
}

fn strategies(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate");
    group.sample_size(20);
    for (name, doc) in grammars() {
        let (tag_g, lstag_g) = (doc.tag_grammar(), doc.lstag_grammar());
        let grammar = if lstag_g.is_empty() {
            Grammar::Tag(&tag_g)
        } else {
            Grammar::Lstag(&lstag_g)
        };
        let budget = EnumerationBudget::operations(5).expect("non-zero budget");
        for (label, strategy) in [("sequential", Strategy::Sequential), ("parallel", Strategy::Parallel)] {
            let opts = Options {
                strategy,
                ..Options::default()
            };
            group.bench_with_input(BenchmarkId::new(label, name), &opts, |b, opts| {
                b.iter(|| black_box(enumerate(grammar.clone(), budget, opts)))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, strategies);
criterion_main!(benches);
