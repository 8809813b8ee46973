use classikit::data::{load_csv, save_csv};
use classikit::evaluation::{kfold_cv, loo_cv};
use classikit::features::parse_transform_spec;
use classikit::oracle::{bayes_error, true_error, BayesErrorMethod, GaussianMixtureProblem};
use classikit::registry::{ModelFile, PipelineTrainer, TrainerSpec};
use classikit::{DecisionFunction, Seed};

fn problem() -> GaussianMixtureProblem {
    GaussianMixtureProblem::isotropic(0.5, vec![1.0, 0.0], vec![-1.0, 0.0], 1.0).unwrap()
}

#[test]
fn csv_train_save_reload_predicts_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.csv");
    save_csv(&problem().sample(120, Seed(1)).unwrap(), &path).unwrap();
    let ds = load_csv(&path).unwrap();

    let trainer = PipelineTrainer {
        steps: parse_transform_spec("poly2+standardize").unwrap(),
        spec: serde_json::from_str(r#"{"name":"logistic","lambda":0.01}"#).unwrap(),
    };
    let (file, _, transformed) = trainer.fit(&ds, Seed(2)).unwrap();
    let json = serde_json::to_string(&file).unwrap();
    let back: ModelFile = serde_json::from_str(&json).unwrap();
    assert_eq!(back, file);

    let test = problem().sample(50, Seed(3)).unwrap();
    let t1 = file.transform.apply(&test).unwrap();
    let t2 = back.transform.apply(&test).unwrap();
    for i in 0..test.len() {
        assert_eq!(file.model.score(t1.row(i)).unwrap(), back.model.score(t2.row(i)).unwrap());
    }
    assert_eq!(transformed.dim(), 2 + 3);
}

#[test]
fn learned_models_do_not_beat_bayes_error() {
    let p = problem();
    let eps = bayes_error(&p, BayesErrorMethod::MonteCarlo { n_mc: 200_000, seed: Seed(4) }).unwrap();
    let ds = p.sample(300, Seed(5)).unwrap();
    for s in [r#"{"name":"lda"}"#, r#"{"name":"knn","k":15}"#, r#"{"name":"tree","config":{"max_depth":3}}"#] {
        let spec: TrainerSpec = serde_json::from_str(s).unwrap();
        let (model, _) = spec.fit(&ds, Seed(6)).unwrap();
        let e = true_error(&model, &p, 200_000, Seed(7)).unwrap();
        assert!(e >= eps - 0.005, "{s}: {e} < {eps}");
    }
}

#[test]
fn transformed_trainer_cv_matches_loo_at_k_equals_n() {
    let ds = problem().sample(25, Seed(8)).unwrap();
    let trainer = PipelineTrainer {
        steps: parse_transform_spec("standardize+noise:2").unwrap(),
        spec: serde_json::from_str(r#"{"name":"knn","k":3}"#).unwrap(),
    };
    let a = kfold_cv(&trainer, &ds, ds.len(), false, Seed(9)).unwrap();
    let b = loo_cv(&trainer, &ds, Seed(9)).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}
