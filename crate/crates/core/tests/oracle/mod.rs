//! Slow, independent reference computations for the numeric routines.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tweetclf::features::{fit_tfidf, transform_tfidf, NgramRange};
use tweetclf::models::logreg::{objective, objective_and_gradient};
use tweetclf::models::svm::rbf;
use tweetclf::models::{Gamma, KNearest, KernelSvm, KnnConfig, MultinomialNb, NbConfig, SvmConfig};
use tweetclf::sparse::{FeatureMatrix, RowView, SparseVector};
use tweetclf::Label;

// ---------------------------------------------------------------- TF-IDF

pub fn brute_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if c.is_alphanumeric() || c == '_' {
            cur.push(c);
        } else {
            if cur.chars().count() >= 2 {
                out.push(cur.clone());
            }
            cur.clear();
        }
    }
    out
}

fn brute_terms(text: &str, lo: usize, hi: usize) -> Vec<String> {
    let toks = brute_tokens(text);
    let mut out = Vec::new();
    for n in lo..=hi {
        for w in toks.windows(n) {
            out.push(w.join(" "));
        }
    }
    out
}

/// Dense TF-IDF straight from the definition: raw counts times
/// `ln((1 + N) / (1 + df)) + 1`, rows scaled to unit length.
fn brute_tfidf(corpus: &[&str], lo: usize, hi: usize) -> BTreeMap<String, Vec<f64>> {
    let docs: Vec<Vec<String>> = corpus.iter().map(|d| brute_terms(d, lo, hi)).collect();
    let vocab: BTreeSet<String> = docs.iter().flatten().cloned().collect();
    let n = corpus.len() as f64;
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for term in &vocab {
        let df = docs.iter().filter(|d| d.contains(term)).count() as f64;
        let idf = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
        let col = docs
            .iter()
            .map(|d| d.iter().filter(|t| *t == term).count() as f64 * idf)
            .collect();
        columns.insert(term.clone(), col);
    }
    for i in 0..corpus.len() {
        let norm: f64 = columns.values().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in columns.values_mut() {
                c[i] /= norm;
            }
        }
    }
    columns
}

/// Largest entry difference between the library and the brute-force
/// matrix. `Err` if the vocabularies differ.
pub fn tfidf_error(corpus: &[&str], lo: usize, hi: usize) -> Result<f64, String> {
    let expected = brute_tfidf(corpus, lo, hi);
    let model = fit_tfidf(corpus, NgramRange::new(lo, hi).unwrap()).unwrap();
    let terms: Vec<&String> = expected.keys().collect();
    if model.vocab.terms().iter().collect::<Vec<_>>() != terms {
        return Err(format!("vocabulary differs for {corpus:?}"));
    }
    let mut worst: f64 = 0.0;
    for (i, doc) in corpus.iter().enumerate() {
        let row = transform_tfidf(&model, doc).to_dense();
        for (j, col) in expected.values().enumerate() {
            worst = worst.max((row[j] - col[i]).abs());
        }
    }
    Ok(worst)
}

pub const TOY_CORPORA: [&[&str]; 4] = [
    &["covid cases rise", "cases confirmed", "stay home"],
    &[
        "new cases new deaths new tests",
        "deaths deaths",
        "a b c",
        "tested positive today",
    ],
    &["Ünïcode wörds ok", "ok ok ok ok", "x_y z_9 10 20"],
    &["one", "one two", "one two three", "one two three four"],
];

/// Worst error over the toy corpora and a batch of seeded random ones.
pub fn tfidf_worst_error() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for corpus in TOY_CORPORA {
        for (lo, hi) in [(1, 1), (1, 3), (2, 2)] {
            worst = worst.max(tfidf_error(corpus, lo, hi)?);
        }
    }
    let words = ["aa", "bb", "cc", "dd", "ee", "x", "covid", "cases"];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..64 {
        let docs: Vec<String> = (0..rng.gen_range(1..8))
            .map(|_| {
                (0..rng.gen_range(1..9))
                    .map(|_| words[rng.gen_range(0..words.len())])
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let corpus: Vec<&str> = docs.iter().map(String::as_str).collect();
        if corpus.iter().any(|d| !brute_tokens(d).is_empty()) {
            worst = worst.max(tfidf_error(&corpus, 1, 3)?);
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------- naive Bayes

/// Largest posterior difference from a hand-worked three-term example.
pub fn nb_worst_error() -> f64 {
    // Three terms, four documents.
    let x = FeatureMatrix::dense(
        3,
        vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 3.0],
            vec![0.0, 0.0, 1.0],
        ],
    )
    .unwrap();
    let y = [
        Label::Informative,
        Label::Informative,
        Label::Uninformative,
        Label::Uninformative,
    ];
    let m = MultinomialNb::fit(&x, &y, NbConfig { alpha: 1.0 }).unwrap();

    // Class totals with alpha = 1 over 3 terms:
    // INFORMATIVE counts (3, 1, 0), total 4 + 3 = 7 -> theta = (4/7, 2/7, 1/7)
    // UNINFORMATIVE counts (0, 1, 4), total 5 + 3 = 8 -> theta = (1/8, 2/8, 5/8)
    let theta_pos = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
    let theta_neg = [1.0 / 8.0, 2.0 / 8.0, 5.0 / 8.0];
    let query = [
        [1.0, 1.0, 1.0],
        [0.0, 0.0, 0.0],
        [3.0, 0.0, 1.0],
        [0.0, 2.0, 0.0],
    ];
    let q = FeatureMatrix::dense(3, query.iter().map(|r| r.to_vec()).collect()).unwrap();
    let got = m.predict_proba(&q).unwrap();
    let mut worst: f64 = 0.0;
    for (row, p) in query.iter().zip(&got) {
        // Priors are both 1/2 and cancel.
        let lik_pos: f64 = row
            .iter()
            .zip(theta_pos)
            .map(|(c, t): (&f64, f64)| t.powf(*c))
            .product();
        let lik_neg: f64 = row
            .iter()
            .zip(theta_neg)
            .map(|(c, t): (&f64, f64)| t.powf(*c))
            .product();
        let post_pos = lik_pos / (lik_pos + lik_neg);
        worst = worst
            .max((p[0] - post_pos).abs())
            .max((p[1] - (1.0 - post_pos)).abs());
    }
    // [1,1,1]: pos 8/343, neg 10/512 -> pos wins.
    if m.predict(&q).unwrap()[0] != Label::Informative {
        return f64::INFINITY;
    }
    worst
}

// -------------------------------------------------- logistic regression

fn random_problem(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    sparse: bool,
) -> (FeatureMatrix, Vec<f64>) {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..d)
                .map(|_| {
                    if sparse && rng.gen_bool(0.6) {
                        0.0
                    } else {
                        rng.gen_range(-2.0..2.0)
                    }
                })
                .collect()
        })
        .collect();
    let y = (0..n)
        .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let x = if sparse {
        FeatureMatrix::sparse(
            d,
            rows.iter().map(|r| SparseVector::from_dense(r)).collect(),
        )
        .unwrap()
    } else {
        FeatureMatrix::dense(d, rows).unwrap()
    };
    (x, y)
}

/// Worst relative gap between the analytic gradient and central differences.
pub fn logreg_worst_rel_error() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let (x, y) = random_problem(&mut rng, 15, 6, trial % 2 == 0);
        let c = [0.1, 1.0, 10.0][trial % 3];
        let theta: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let (f, grad) = objective_and_gradient(&x, &y, &theta, c);
        if (f - objective(&x, &y, &theta, c)).abs() > 1e-12 * f.abs().max(1.0) {
            return f64::INFINITY;
        }
        for j in 0..theta.len() {
            let h = 1e-5 * theta[j].abs().max(1.0);
            let mut plus = theta.clone();
            let mut minus = theta.clone();
            plus[j] += h;
            minus[j] -= h;
            let fd = (objective(&x, &y, &plus, c) - objective(&x, &y, &minus, c)) / (2.0 * h);
            let rel = (fd - grad[j]).abs() / grad[j].abs().max(fd.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    worst
}

// ------------------------------------------------------------------ SVM

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (offset, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= f * p;
            }
            b[col + 1 + offset] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Exact dual optimum by enumerating every assignment of each multiplier to
/// {0, free, C}, solving the equality-constrained system on the free set and
/// keeping the assignment that satisfies all KKT conditions.
fn exhaustive_dual(k: &[Vec<f64>], y: &[f64], c: f64) -> (Vec<f64>, f64) {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let eps = 1e-9;
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for code in 0..3usize.pow(n as u32) {
        let mut state = vec![0u8; n];
        let mut rest = code;
        for s in state.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 1).collect();
        let mut alpha: Vec<f64> = state
            .iter()
            .map(|&s| if s == 2 { c } else { 0.0 })
            .collect();
        let b;
        if free.is_empty() {
            if y.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>().abs() > eps {
                continue;
            }
            // Gradient G_i = (Q alpha)_i - 1; b must lie in the KKT interval.
            let g: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| q(i, j) * alpha[j]).sum::<f64>() - 1.0)
                .collect();
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..n {
                // y_i f_i >= 1 at the lower bound, <= 1 at the upper bound,
                // with f_i = y_i (G_i + 1) + b.
                let at_lower = state[i] == 0;
                let bound = -y[i] * g[i];
                if (y[i] > 0.0) == at_lower {
                    lo = lo.max(bound);
                } else {
                    hi = hi.min(bound);
                }
            }
            if lo > hi + eps {
                continue;
            }
            b = 0.5 * (lo + hi);
        } else {
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut rhs = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[r][s] = q(i, j);
                }
                a[r][m] = y[i];
                rhs[r] = 1.0
                    - (0..n)
                        .filter(|&j| state[j] == 2)
                        .map(|j| q(i, j) * c)
                        .sum::<f64>();
                a[m][r] = y[i];
            }
            rhs[m] = -(0..n)
                .filter(|&j| state[j] == 2)
                .map(|j| y[j] * c)
                .sum::<f64>();
            let Some(sol) = solve_linear(a, rhs) else {
                continue;
            };
            if free
                .iter()
                .enumerate()
                .any(|(r, _)| sol[r] <= eps || sol[r] >= c - eps)
            {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
            b = sol[m];
        }
        let f: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| alpha[j] * y[j] * k[i][j]).sum::<f64>() + b)
            .collect();
        let kkt = (0..n).all(|i| match state[i] {
            0 => y[i] * f[i] >= 1.0 - 1e-7,
            2 => y[i] * f[i] <= 1.0 + 1e-7,
            _ => true,
        });
        if !kkt {
            continue;
        }
        let obj = 0.5
            * (0..n)
                .map(|i| (0..n).map(|j| alpha[i] * alpha[j] * q(i, j)).sum::<f64>())
                .sum::<f64>()
            - alpha.iter().sum::<f64>();
        if best.as_ref().is_none_or(|(o, _, _)| obj < *o) {
            best = Some((obj, alpha, b));
        }
    }
    let (_, alpha, b) = best.expect("a KKT point always exists");
    (alpha, b)
}

/// Worst decision-value gap between SMO and the exhaustive dual optimum.
pub fn smo_worst_error(tol: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for trial in 0..40 {
        let n = 3 + trial % 6;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
            .collect();
        let mut labels: Vec<Label> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Label::Informative
                } else {
                    Label::Uninformative
                }
            })
            .collect();
        labels[0] = Label::Informative;
        labels[1] = Label::Uninformative;
        let gamma = [0.3, 1.0, 2.5][trial % 3];
        let c = [0.5, 1.0, 10.0][(trial / 3) % 3];
        let x = FeatureMatrix::dense(2, rows.clone()).unwrap();
        let cfg = SvmConfig {
            c,
            gamma: Gamma::Value(gamma),
            tol,
            ..SvmConfig::default()
        };
        let model = KernelSvm::fit(&x, &labels, cfg).unwrap();

        let k: Vec<Vec<f64>> = rows
            .iter()
            .map(|a| {
                rows.iter()
                    .map(|b| rbf(gamma, RowView::Dense(a), RowView::Dense(b)))
                    .collect()
            })
            .collect();
        let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
        let (alpha, b) = exhaustive_dual(&k, &y, c);

        let probes: Vec<Vec<f64>> = rows
            .iter()
            .cloned()
            .chain((0..10).map(|_| vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]))
            .collect();
        let got = model
            .decision_function(&FeatureMatrix::dense(2, probes.clone()).unwrap())
            .unwrap();
        for (p, g) in probes.iter().zip(got) {
            let want: f64 = (0..n)
                .map(|j| alpha[j] * y[j] * rbf(gamma, RowView::Dense(&rows[j]), RowView::Dense(p)))
                .sum::<f64>()
                + b;
            worst = worst.max((g - want).abs());
        }
    }
    worst
}

// ------------------------------------------------------------------ kNN

fn brute_neighbours(train: &[Vec<f64>], q: &[f64], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, i)| i).collect()
}

fn brute_vote(train: &[Vec<f64>], labels: &[Label], q: &[f64], k: usize) -> Label {
    let mut votes = [0usize; 2];
    let mut dist = [0.0f64; 2];
    for i in brute_neighbours(train, q, k) {
        let c = usize::from(!labels[i].is_positive());
        votes[c] += 1;
        dist[c] += train[i]
            .iter()
            .zip(q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
    }
    if votes[0] > votes[1] || (votes[0] == votes[1] && dist[0] <= dist[1]) {
        Label::Informative
    } else {
        Label::Uninformative
    }
}

/// Number of queries whose neighbour list or vote differs from a full scan.
pub fn knn_mismatches() -> usize {
    let mut mismatches = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..30 {
        let (n, d) = (40, 12);
        let mut dense: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut r: Vec<f64> = (0..d)
                    .map(|_| {
                        if rng.gen_bool(0.7) {
                            0.0
                        } else {
                            rng.gen_range(0.0..1.0)
                        }
                    })
                    .collect();
                let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    r.iter_mut().for_each(|v| *v /= norm);
                }
                r
            })
            .collect();
        // Exact duplicates force distance ties.
        dense[7] = dense[3].clone();
        dense[20] = dense[3].clone();
        let labels: Vec<Label> = (0..n)
            .map(|i| {
                if i % 3 == 0 {
                    Label::Uninformative
                } else {
                    Label::Informative
                }
            })
            .collect();
        let k = 1 + trial % 7;
        let sparse_rows = dense.iter().map(|r| SparseVector::from_dense(r)).collect();
        for train in [
            FeatureMatrix::sparse(d, sparse_rows).unwrap(),
            FeatureMatrix::dense(d, dense.clone()).unwrap(),
        ] {
            let model = KNearest::fit(&train, &labels, KnnConfig { k }).unwrap();
            let mut queries: Vec<Vec<f64>> = (0..15)
                .map(|_| {
                    (0..d)
                        .map(|_| {
                            if rng.gen_bool(0.6) {
                                0.0
                            } else {
                                rng.gen_range(0.0..1.0)
                            }
                        })
                        .collect()
                })
                .collect();
            queries.push(dense[3].clone());
            queries.push(vec![0.0; d]);
            for q in &queries {
                let sq = SparseVector::from_dense(q);
                for view in [RowView::Sparse(&sq), RowView::Dense(q)] {
                    let got: Vec<usize> =
                        model.neighbours(view).into_iter().map(|(i, _)| i).collect();
                    if got != brute_neighbours(&dense, q, k)
                        || model.predict_row(view) != brute_vote(&dense, &labels, q, k)
                    {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    mismatches
}
