//! Library results checked against slow, independent reference computations.

mod oracle;

use proptest::prelude::*;
use tweetclf::models::SvmConfig;

#[test]
fn tfidf_matches_brute_force() {
    let worst = oracle::tfidf_worst_error().unwrap();
    assert!(worst <= 1e-9, "worst entry error {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tfidf_matches_brute_force_on_random_corpora(
        docs in proptest::collection::vec("(aa|bb|cc|dd|ee|x|covid|cases)( (aa|bb|cc|dd|ee|x|covid|cases)){0,7}", 1..8)
    ) {
        let corpus: Vec<&str> = docs.iter().map(String::as_str).collect();
        // Every document may lack tokens; the vocabulary must still exist.
        prop_assume!(corpus.iter().any(|d| !oracle::brute_tokens(d).is_empty()));
        let err = oracle::tfidf_error(&corpus, 1, 3).map_err(TestCaseError::fail)?;
        prop_assert!(err <= 1e-9, "{}", err);
    }
}

#[test]
fn naive_bayes_posteriors_match_hand_computation() {
    let worst = oracle::nb_worst_error();
    assert!(worst <= 1e-12, "worst posterior error {worst}");
}

#[test]
fn logistic_gradient_matches_central_differences() {
    let worst = oracle::logreg_worst_rel_error();
    assert!(worst < 1e-5, "worst relative error {worst}");
}

#[test]
fn smo_matches_exhaustive_dual() {
    // The default stopping tolerance alone keeps decision values within 1e-3;
    // a tight tolerance shows the solver converges to the oracle optimum.
    let loose = oracle::smo_worst_error(SvmConfig::default().tol);
    assert!(loose <= 1e-3, "worst decision-value error {loose}");
    let tight = oracle::smo_worst_error(1e-7);
    assert!(tight <= 1e-5, "worst decision-value error {tight}");
}

#[test]
fn knn_matches_exhaustive_scan() {
    assert_eq!(oracle::knn_mismatches(), 0);
}
