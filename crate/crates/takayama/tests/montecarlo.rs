use takayama::montecarlo::{
    bootstrap_variance, draw_mixture, ks_normality, mean_and_variance, run_replicates, substream, ReplicateRecord,
    ReplicateStudy, Target,
};
use takayama::{draw_mixture_sample, parse_model, Error};
use takayama_core::special::normal_quantile;
use takayama_core::{
    build_empirical, sigma_plugin, AnalyticDistribution, EmpiricalDistribution, MixtureModel, PovertyConfig,
};

use rand::Rng;

fn config(z: f64) -> PovertyConfig {
    PovertyConfig::new(z).unwrap()
}

#[test]
fn single_component_labels_are_identical() {
    let model = parse_model("exponential:1").unwrap();
    let sample = draw_mixture_sample(&model, 200, 1).unwrap();
    let labels = sample.group_labels().unwrap();
    assert!(labels.iter().all(|l| l == &labels[0]));
}

#[test]
fn component_frequency_follows_weights() {
    let model = parse_model("0.5*exponential:1+0.5*exponential:0.5").unwrap();
    let (_, groups) = draw_mixture(&model, 100_000, &mut substream(7, 0));
    let share = groups.iter().filter(|&&g| g == 0).count() as f64 / groups.len() as f64;
    assert!((share - 0.5).abs() < 0.01, "{share}");
}

#[test]
fn pooled_draws_follow_the_mixture_law() {
    let model = parse_model("0.3*exponential:1+0.7*uniform:0,2").unwrap();
    let (mut values, _) = draw_mixture(&model, 20_000, &mut substream(8, 0));
    values.sort_by(f64::total_cmp);
    let law = AnalyticDistribution::mixture(model);
    let n = values.len() as f64;
    let distance = values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let critical = (200f64.ln() / 2.0).sqrt() / n.sqrt();
    assert!(distance < critical, "{distance} vs {critical}");
}

#[test]
fn draws_are_reproducible() {
    let model = parse_model("uniform:0,1").unwrap();
    let a = draw_mixture_sample(&model, 50, 3).unwrap();
    let b = draw_mixture_sample(&model, 50, 3).unwrap();
    let c = draw_mixture_sample(&model, 50, 4).unwrap();
    assert_eq!(a.values(), b.values());
    assert_ne!(a.values(), c.values());
}

#[test]
fn empty_draw_is_rejected() {
    let model = parse_model("uniform:0,1").unwrap();
    assert!(matches!(draw_mixture_sample(&model, 0, 1), Err(Error::Usage(_))));
}

#[test]
fn one_replicate_gives_one_record() {
    let study = ReplicateStudy::new(parse_model("uniform:0,1").unwrap(), config(1.0), 100, 1, 5);
    let study = run_replicates(study, Target::Takayama).unwrap();
    assert_eq!(study.records.len(), 1);
    assert_eq!(study.records[0].index, 0);
    let summary = study.summary().unwrap();
    assert!(summary.empirical_variance.is_none());
    assert!(summary.normality.is_none());
}

#[test]
fn summary_before_running_is_an_error() {
    let study = ReplicateStudy::new(parse_model("uniform:0,1").unwrap(), config(1.0), 10, 5, 1);
    assert!(study.summary().is_err());
}

#[test]
fn flagged_records_are_kept_and_counted() {
    let study = ReplicateStudy::new(parse_model("uniform:0,1").unwrap(), config(1.0), 100, 3, 5);
    let mut study = run_replicates(study, Target::Takayama).unwrap();
    study.records[1] = ReplicateRecord {
        index: 1,
        statistic: f64::NAN,
        plugin_variance: f64::NAN,
        covered: false,
        mixed_reference: None,
        flag: Some("sample mean is zero".into()),
    };
    assert_eq!(study.records.len(), 3);
    assert_eq!(study.valid_records().count(), 2);
    assert_eq!(study.scaled_errors().len(), 2);
    assert_eq!(study.summary().unwrap().flagged, 1);
}

#[test]
fn uniform_variance_matches_the_limit() {
    let study = ReplicateStudy::new(parse_model("uniform:0,1").unwrap(), config(1.0), 2000, 1000, 11);
    let study = run_replicates(study, Target::Takayama).unwrap();
    let summary = study.summary().unwrap();
    let limit = summary.limiting_variance.unwrap();
    assert!((limit - 8.0 / 135.0).abs() < 1e-8, "{limit}");
    let empirical = summary.empirical_variance.unwrap();
    assert!((empirical - limit).abs() / limit < 0.10, "{empirical} vs {limit}");
    assert!((summary.truth - 1.0 / 3.0).abs() < 1e-10);
    assert_eq!(summary.flagged, 0);
}

#[test]
fn bootstrap_of_a_constant_non_poor_sample_is_zero() {
    let dist = EmpiricalDistribution::from_values(vec![7.0; 40]).unwrap();
    assert_eq!(bootstrap_variance(&dist, &config(1.0), 200, 3).unwrap(), 0.0);
}

#[test]
fn bootstrap_needs_enough_resamples() {
    let dist = EmpiricalDistribution::from_values(vec![1.0, 2.0, 3.0]).unwrap();
    assert!(bootstrap_variance(&dist, &config(2.5), 99, 3).is_err());
}

fn uniform_dist(n: usize, seed: u64) -> EmpiricalDistribution {
    build_empirical(&draw_mixture_sample(&parse_model("uniform:0,1").unwrap(), n, seed).unwrap()).unwrap()
}

#[test]
fn bootstrap_agrees_with_plugin() {
    let dist = uniform_dist(2000, 21);
    let plugin = sigma_plugin(&dist, &config(1.0)).total;
    let boot = bootstrap_variance(&dist, &config(1.0), 500, 22).unwrap();
    assert!((boot - plugin).abs() / plugin < 0.15, "{boot} vs {plugin}");
}

#[test]
fn bootstrap_is_stable_in_the_resample_count() {
    let dist = uniform_dist(1000, 23);
    let few = bootstrap_variance(&dist, &config(1.0), 100, 24).unwrap();
    let many = bootstrap_variance(&dist, &config(1.0), 1000, 24).unwrap();
    assert!((few - many).abs() / many < 0.25, "{few} vs {many}");
}

#[test]
fn ks_accepts_normal_draws() {
    let mut rng = substream(31, 0);
    let values: Vec<f64> = (0..10_000)
        .map(|_| normal_quantile(rng.gen_range(f64::EPSILON..1.0)))
        .collect();
    let outcome = ks_normality(&values).unwrap();
    assert!(outcome.passes, "{outcome:?}");
}

#[test]
fn ks_rejects_uniform_draws() {
    let mut rng = substream(32, 0);
    let values: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
    let outcome = ks_normality(&values).unwrap();
    assert!(!outcome.passes, "{outcome:?}");
}

#[test]
fn ks_rejects_short_and_constant_input() {
    assert!(ks_normality(&[0.5; 99]).is_err());
    assert!(ks_normality(&[0.5; 500]).is_err());
}

#[test]
fn gap_study_tracks_both_centrings() {
    let model = parse_model("0.5*exponential:1+0.5*exponential:0.5").unwrap();
    let study = ReplicateStudy::new(model, config(1.0), 2000, 400, 41);
    let study = run_replicates(study, Target::Gap).unwrap();
    let truth = study.truth.unwrap();
    let population = truth.variance.unwrap();
    let mixed = truth.mixed_variance.unwrap();
    let (_, v) = mean_and_variance(&study.scaled_errors());
    let (_, v0) = mean_and_variance(&study.mixed_scaled_errors());
    assert!((v - population).abs() / population < 0.25, "{v} vs {population}");
    assert!((v0 - mixed).abs() / mixed < 0.25, "{v0} vs {mixed}");
    let summary = study.summary().unwrap();
    let coverage = summary.coverage.unwrap();
    assert!(coverage > 0.9, "{coverage}");
}

#[test]
fn representation_residual_decays() {
    let run = |n, seed| {
        let study = ReplicateStudy::new(parse_model("uniform:0,1").unwrap(), config(1.0), n, 200, seed);
        run_replicates(study, Target::Representation)
            .unwrap()
            .summary()
            .unwrap()
            .median_abs_statistic
            .unwrap()
    };
    let small = run(250, 51);
    let large = run(4000, 52);
    assert!(large < small, "{large} vs {small}");
}

#[test]
fn thread_count_does_not_change_results() {
    let model: MixtureModel = parse_model("exponential:2").unwrap();
    let run = |threads| {
        let study = ReplicateStudy::new(model.clone(), config(0.5), 300, 50, 61).with_threads(threads);
        run_replicates(study, Target::Takayama)
            .unwrap()
            .records
            .iter()
            .map(|r| r.statistic.to_bits())
            .collect::<Vec<_>>()
    };
    assert_eq!(run(1), run(3));
}
