use lagnn::acquisition::{bald_score, NodeSetTag};
use lagnn::models::McDropoutSamples;
use lagnn::numerics::{DenseMatrix, RngState};
use lagnn::Error;

fn samples_from(rows: &[Vec<Vec<f64>>]) -> McDropoutSamples {
    // rows[s][i] is the class distribution of node i in sample s.
    let probs = rows
        .iter()
        .map(|s| {
            let n = s.len();
            let c = s[0].len();
            DenseMatrix::from_vec(n, c, s.concat()).unwrap()
        })
        .collect();
    McDropoutSamples { probs }
}

fn random_simplex_samples(n_mc: usize, n: usize, c: usize, rng: &mut RngState) -> McDropoutSamples {
    let probs = (0..n_mc)
        .map(|_| {
            let mut m = DenseMatrix::zeros(n, c);
            for i in 0..n {
                let row = m.row_mut(i);
                let mut total = 0.0;
                for v in row.iter_mut() {
                    *v = rng.uniform() + 1e-3;
                    total += *v;
                }
                for v in row.iter_mut() {
                    *v /= total;
                }
            }
            m
        })
        .collect();
    McDropoutSamples { probs }
}

#[test]
fn identical_samples_score_exactly_zero() {
    let mut rng = RngState::new(1);
    let one = random_simplex_samples(1, 5, 3, &mut rng);
    let repeated = McDropoutSamples {
        probs: vec![one.probs[0].clone(); 7],
    };
    let est = bald_score(&repeated, &[0, 1, 2, 3, 4], NodeSetTag::All).unwrap();
    assert_eq!(est.score, 0.0);
    assert!(est.per_node.iter().all(|&u| u == 0.0));
}

#[test]
fn single_sample_scores_zero() {
    let mut rng = RngState::new(2);
    let s = random_simplex_samples(1, 6, 4, &mut rng);
    let est = bald_score(&s, &[0, 1, 2, 3, 4, 5], NodeSetTag::All).unwrap();
    assert_eq!(est.score, 0.0);
    assert_eq!(est.n_mc, 1);
}

#[test]
fn two_one_hot_samples_score_ln_two() {
    let s = samples_from(&[
        vec![vec![1.0, 0.0]],
        vec![vec![0.0, 1.0]],
    ]);
    let est = bald_score(&s, &[0], NodeSetTag::All).unwrap();
    assert!((est.score - (2.0f64).ln()).abs() <= 1e-9, "score {}", est.score);
}

#[test]
fn scores_stay_within_entropy_bounds() {
    let mut rng = RngState::new(3);
    for trial in 0..200 {
        let c = 2 + (trial % 6);
        let s = random_simplex_samples(2 + (trial % 9), 8, c, &mut rng);
        let all: Vec<u32> = (0..8).collect();
        let est = bald_score(&s, &all, NodeSetTag::All).unwrap();
        let cap = (c as f64).ln() + 1e-9;
        assert!(est.score >= 0.0 && est.score <= cap, "score {}", est.score);
        assert!(est
            .per_node
            .iter()
            .all(|&u| (0.0..=cap).contains(&u)));
    }
}

#[test]
fn invariant_under_sample_permutation() {
    let mut rng = RngState::new(4);
    let s = random_simplex_samples(6, 10, 3, &mut rng);
    let all: Vec<u32> = (0..10).collect();
    let base = bald_score(&s, &all, NodeSetTag::All).unwrap();
    let mut shuffled = s.probs.clone();
    shuffled.rotate_left(2);
    shuffled.swap(0, 3);
    let permuted = bald_score(&McDropoutSamples { probs: shuffled }, &all, NodeSetTag::All).unwrap();
    assert!((base.score - permuted.score).abs() <= 1e-12);
    for (a, b) in base.per_node.iter().zip(&permuted.per_node) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn two_class_disagreement_is_monotone_in_q() {
    // p1 = (q, 1-q), p2 = (1-q, q): the mean is uniform, so the score is
    // ln 2 - H(q), decreasing on [0, 1/2] and zero at q = 1/2.
    let mut last = f64::INFINITY;
    for k in 0..=10 {
        let q = k as f64 * 0.05;
        let s = samples_from(&[
            vec![vec![q, 1.0 - q]],
            vec![vec![1.0 - q, q]],
        ]);
        let est = bald_score(&s, &[0], NodeSetTag::All).unwrap();
        let h = -(q * q.max(1e-12).ln() + (1.0 - q) * (1.0 - q).max(1e-12).ln());
        let expect = (2.0f64).ln() - h;
        assert!((est.score - expect).abs() <= 1e-12, "q={q}: {} vs {expect}", est.score);
        assert!(est.score <= last + 1e-12, "not decreasing at q={q}");
        last = est.score;
    }
    assert!(last.abs() <= 1e-12, "q=0.5 should score zero, got {last}");
}

#[test]
fn score_averages_over_the_node_set_only() {
    let s = samples_from(&[
        vec![vec![1.0, 0.0], vec![0.5, 0.5]],
        vec![vec![0.0, 1.0], vec![0.5, 0.5]],
    ]);
    let both = bald_score(&s, &[0, 1], NodeSetTag::All).unwrap();
    let first = bald_score(&s, &[0], NodeSetTag::Unlabeled).unwrap();
    let second = bald_score(&s, &[1], NodeSetTag::Train).unwrap();
    assert_eq!(second.score, 0.0);
    assert!((first.score - (2.0f64).ln()).abs() <= 1e-9);
    assert!((both.score - first.score / 2.0).abs() <= 1e-15);
    assert_eq!(first.tag, NodeSetTag::Unlabeled);
    assert_eq!(both.per_node.len(), 2);
    assert_eq!(first.per_node.len(), 2);
}

#[test]
fn rejects_bad_inputs() {
    let s = samples_from(&[vec![vec![0.7, 0.3]], vec![vec![0.2, 0.8]]]);
    assert!(matches!(
        bald_score(&s, &[], NodeSetTag::All),
        Err(Error::Parameter(_))
    ));
    assert!(bald_score(&s, &[1], NodeSetTag::All).is_err());

    let bad = samples_from(&[vec![vec![0.7, 0.2]], vec![vec![0.2, 0.8]]]);
    assert!(matches!(
        bald_score(&bad, &[0], NodeSetTag::All),
        Err(Error::Numeric(_))
    ));
    let negative = samples_from(&[vec![vec![1.2, -0.2]], vec![vec![0.2, 0.8]]]);
    assert!(bald_score(&negative, &[0], NodeSetTag::All).is_err());

    let ragged = McDropoutSamples {
        probs: vec![DenseMatrix::zeros(1, 2), DenseMatrix::zeros(2, 2)],
    };
    assert!(bald_score(&ragged, &[0], NodeSetTag::All).is_err());
}
