//! The shipped evaluation files are exactly what the generator produces.

use lightpath::data::Resources;
use lightpath::eval::{EvalCorpus, BUNDLED_EVAL_CORPUS, BUNDLED_EVAL_RULES};
use lightpath::generator::{generate_eval_corpus, mock_rules_toml, DEFAULT_SEED};

#[test]
fn shipped_eval_files_match_the_generator() {
    let r = Resources::bundled();
    let cities: Vec<String> = r.registry.iter().map(|(c, _)| c.to_owned()).collect();
    let g = generate_eval_corpus(DEFAULT_SEED, &r.standards, &cities);
    assert_eq!(g.corpus.to_json(), BUNDLED_EVAL_CORPUS, "run `lightpath gen-corpus` to refresh");
    assert_eq!(mock_rules_toml(&g.mock_rules, g.planted.len()), BUNDLED_EVAL_RULES);
    let shipped = EvalCorpus::bundled();
    assert_eq!(shipped.seed, Some(DEFAULT_SEED));
    assert_eq!(shipped.cases.len(), 90);
}
