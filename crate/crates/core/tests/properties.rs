//! Randomized invariants across the public API.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use semforecast::evaluate::{
    diebold_mariano, make_supervised_dataset, nrmse, rmse, time_slice_folds, tune, CvPlan, Hyper, ModelSpec, Target,
};
use semforecast::lexicon::{bind, SemanticLexicon};
use semforecast::pathmodel::{decompose, fit_path_model, predict_path, Block, BlockKind, InnerEstimator, PathModelSpec};
use semforecast::reduce::{fit_reducer, fit_standardizer, ReducerKind};
use semforecast::regress::{fit_ar, fit_elastic_net, fit_ols, lag_design, PenaltyConfig};
use semforecast::textpipe::{tfidf_weight, Period, PeriodTermMatrix, Resolution, Vocabulary};
use semforecast::Error;

fn gaussian(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

fn sample_cov(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1.0)
}

fn two_blocks() -> Vec<Block> {
    vec![
        Block {
            name: "a".into(),
            indices: vec![0, 1, 2],
            kind: BlockKind::Estimated,
        },
        Block {
            name: "b".into(),
            indices: vec![3, 4],
            kind: BlockKind::Estimated,
        },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn folds_never_leak(folds in 1usize..12, initial in 2usize..40, validation in 1usize..8, extra in 0usize..20, expanding: bool) {
        let plan = CvPlan { folds, initial, validation, expanding };
        let n = plan.min_rows() + extra;
        let out = time_slice_folds(n, &plan).unwrap();
        prop_assert_eq!(out.len(), folds);
        for f in &out {
            prop_assert!(f.train.end <= f.validation.start);
            prop_assert!(f.validation.end <= n);
            prop_assert_eq!(f.validation.len(), validation);
        }
    }

    #[test]
    fn dm_is_antisymmetric(seed: u64, n in 10usize..80, h in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e1: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let e2: Vec<f64> = (0..n).map(|_| 1.3 * rng.sample::<f64, _>(StandardNormal)).collect();
        if let (Ok(a), Ok(b)) = (diebold_mariano(&e1, &e2, h), diebold_mariano(&e2, &e1, h)) {
            prop_assert_eq!(a.statistic, -b.statistic);
            prop_assert!((a.p_value + b.p_value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nrmse_is_rmse_over_range(seed: u64, n in 2usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let e: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let r = rmse(&e).unwrap();
        let range = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - y.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!((nrmse(r, &y).unwrap() * range - r).abs() < 1e-12 * r.max(1.0));
    }

    #[test]
    fn ridge_norm_shrinks_with_alpha2(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(&mut rng, 30, 6);
        let y = DVector::from_fn(30, |r, _| x[(r, 0)] - 0.5 * x[(r, 3)] + 0.2 * rng.sample::<f64, _>(StandardNormal));
        let mut last = f64::INFINITY;
        for a2 in [0.0, 0.01, 0.1, 1.0, 10.0] {
            let norm = fit_elastic_net(&x, &y, PenaltyConfig { alpha1: 0.01, alpha2: a2 }).unwrap().coefficients.norm();
            prop_assert!(norm <= last + 1e-9);
            last = norm;
        }
    }

    #[test]
    fn ar1_is_ols_on_lag_design(seed: u64, n in 8usize..60, h in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut y = vec![0.0];
        for t in 1..n {
            y.push(0.6 * y[t - 1] + rng.sample::<f64, _>(StandardNormal));
        }
        let ar = fit_ar(&y, 1, h).unwrap();
        let (x, target, _) = lag_design(&y, 1, h);
        let ols = fit_ols(&x, &target).unwrap();
        prop_assert!((ar.model.intercept - ols.intercept).abs() < 1e-10);
        prop_assert!((ar.model.coefficients[0] - ols.coefficients[0]).abs() < 1e-10);
    }

    #[test]
    fn pca_scores_uncorrelated(seed: u64, k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = gaussian(&mut rng, 25, 5);
        let x = fit_standardizer(&raw).unwrap().apply(&raw).unwrap();
        let r = fit_reducer(&x, ReducerKind::Pca, k).unwrap();
        let scores = r.apply(&x).unwrap();
        for i in 0..k {
            for j in 0..i {
                let c = sample_cov(scores.column(i).as_slice(), scores.column(j).as_slice());
                prop_assert!(c.abs() < 1e-9);
            }
        }
        let ev = r.explained_variance().unwrap();
        prop_assert!(ev.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        prop_assert!(ev.iter().sum::<f64>() <= 1.0 + 1e-12);
    }

    #[test]
    fn decomposition_identity_and_sign_flip(seed: u64, a1 in 0.0f64..0.3, a2 in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(&mut rng, 40, 6);
        let y = DVector::from_fn(40, |r, _| x[(r, 0)] + x[(r, 1)] - x[(r, 4)] + rng.sample::<f64, _>(StandardNormal));
        let inner = if a1 == 0.0 && a2 == 0.0 { InnerEstimator::Ols } else { InnerEstimator::Penalized(PenaltyConfig { alpha1: a1, alpha2: a2 }) };
        let m = fit_path_model(&x, &y, &PathModelSpec::new(two_blocks(), inner)).unwrap();
        let fresh = gaussian(&mut rng, 10, 6);
        let d = decompose(&m, &fresh).unwrap();
        prop_assert!(d.max_identity_error() < 1e-10);
        let mut flipped = m.clone();
        flipped.flip_sign(1);
        let p0 = predict_path(&m, &fresh).unwrap();
        let p1 = predict_path(&flipped, &fresh).unwrap();
        prop_assert!((p0 - p1).amax() < 1e-12);
    }

    #[test]
    fn ubiquitous_term_has_zero_weight(seed: u64, n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = Period::new(2001, 1, Resolution::Monthly).unwrap();
        let periods = Period::span(start, Period::new(2001 + (n as i32 - 1) / 12, ((n - 1) % 12) as u32 + 1, Resolution::Monthly).unwrap());
        let counts = DMatrix::from_fn(n, 3, |r, c| match c {
            0 => rng.random_range(1..9u64),
            1 => u64::from(r == 0),
            _ => rng.random_range(0..3u64),
        });
        let vocab = Vocabulary::new(["every", "once", "some"].map(String::from));
        let m = tfidf_weight(PeriodTermMatrix::from_counts(periods, vocab, counts).unwrap());
        let w = m.tfidf().unwrap();
        prop_assert!(w.column(0).iter().all(|&v| v == 0.0));
        if n > 1 {
            prop_assert!((w[(0, 1)] - (n as f64).ln()).abs() < 1e-12);
        }
    }
}

#[test]
fn shared_lexicon_term_indexed_in_both_constructs() {
    let lex = SemanticLexicon::from_pairs([("growth", "positive"), ("profit", "positive"), ("growth", "uncertain"), ("loss", "negative")]).unwrap();
    let vocab = Vocabulary::new(["growth", "loss", "profit"].map(String::from));
    let sets = bind(&lex, &vocab).unwrap();
    let idx = |name: &str| sets.constructs.iter().find(|c| c.name == name).unwrap().indices.clone();
    assert_eq!(idx("positive"), [0, 2]);
    assert_eq!(idx("uncertain"), [0]);
    assert_eq!(idx("negative"), [1]);
}

#[test]
fn self_comparison_is_degenerate() {
    let e: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
    assert!(matches!(diebold_mariano(&e, &e, 1), Err(Error::DegenerateDifferential)));
}

/// Standardize-then-ridge on each fold by closed form, averaged over folds.
fn brute_force_cv(x: &DMatrix<f64>, y: &DVector<f64>, alpha2: f64, plan: &CvPlan, n: usize) -> f64 {
    let folds = time_slice_folds(n, plan).unwrap();
    let mut total = 0.0;
    for f in &folds {
        let tr: Vec<usize> = f.train.clone().collect();
        let xt = x.select_rows(&tr);
        let yt = y.select_rows(&tr);
        let m = tr.len() as f64;
        let means = xt.row_mean();
        let sds: Vec<f64> = (0..x.ncols())
            .map(|j| (xt.column(j).iter().map(|v| (v - means[j]).powi(2)).sum::<f64>() / (m - 1.0)).sqrt())
            .collect();
        let z = DMatrix::from_fn(tr.len(), x.ncols(), |r, c| (xt[(r, c)] - means[c]) / sds[c]);
        let ym = yt.mean();
        let yc = yt.add_scalar(-ym);
        let gram = z.transpose() * &z + DMatrix::identity(x.ncols(), x.ncols()) * (2.0 * m * alpha2);
        let beta = gram.cholesky().unwrap().solve(&(z.transpose() * yc));
        let mut sse = 0.0;
        for r in f.validation.clone() {
            let pred = ym + (0..x.ncols()).map(|c| (x[(r, c)] - means[c]) / sds[c] * beta[c]).sum::<f64>();
            sse += (y[r] - pred).powi(2);
        }
        total += (sse / f.validation.len() as f64).sqrt();
    }
    total / folds.len() as f64
}

#[test]
fn tuning_matches_brute_force_cv() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 60;
    let features = gaussian(&mut rng, n, 4);
    let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let ds = make_supervised_dataset(&features, &y, Target::Level(1), 0).unwrap();
    let model: ModelSpec = "tfidf-ridge".parse().unwrap();
    let alphas = [0.001, 0.1, 10.0];
    let grid: Vec<Hyper> = alphas.iter().map(|&a| Hyper { alpha1: 0.0, alpha2: a, components: None }).collect();
    let plan = CvPlan::new(5, 30, 5);
    let result = tune(&ds, 55, &model, None, &grid, &plan).unwrap();
    let oracle: Vec<f64> = alphas.iter().map(|&a| brute_force_cv(&ds.x, &ds.y, a, &plan, 55)).collect();
    for (score, want) in result.table.iter().zip(&oracle) {
        assert!((score.cv_rmse.unwrap() - want).abs() < 1e-7, "{:?} vs {want}", score.cv_rmse);
    }
    let best = oracle.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert_eq!(result.best.alpha2, alphas[best]);
    assert!(result.fit_log.iter().all(|r| r.max_train_row < r.min_validation_row));
}
