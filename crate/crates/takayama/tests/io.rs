use std::io::Write;

use takayama::io::{model_to_string, SurveyTable};
use takayama::{ingest_csv, parse_model, Error, RunConfig};

fn file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

fn data_error(result: takayama::Result<impl std::fmt::Debug>) -> String {
    match result {
        Err(e @ Error::Data(_)) => {
            assert_eq!(e.exit_code(), 2);
            e.to_string()
        }
        other => panic!("expected a data error, got {other:?}"),
    }
}

#[test]
fn two_rows_are_read_in_order() {
    let f = file("household_id,income\nh1,1\nh2,3\n");
    let sample = ingest_csv(f.path(), &RunConfig::default()).unwrap();
    assert_eq!(sample.values(), &[1.0, 3.0]);
}

#[test]
fn adult_equivalents_divide_income() {
    let f = file("household_id,income,adult_equiv\nh1,10,2\nh2,4,\n");
    let sample = ingest_csv(f.path(), &RunConfig::default()).unwrap();
    assert_eq!(sample.adjusted_values(), vec![5.0, 4.0]);
}

#[test]
fn non_numeric_income_names_the_row() {
    let f = file("household_id,income\nh1,abc\n");
    assert_eq!(data_error(ingest_csv(f.path(), &RunConfig::default())), "row 2: income not numeric");
    let f = file("household_id,income\nh1,1\nh2,2\nh3,x\n");
    assert!(data_error(ingest_csv(f.path(), &RunConfig::default())).starts_with("row 4:"));
}

#[test]
fn negative_income_and_bad_divisor_are_rejected() {
    let f = file("household_id,income\nh1,-1\n");
    assert!(data_error(ingest_csv(f.path(), &RunConfig::default())).contains("non-negative"));
    let f = file("household_id,income,adult_equiv\nh1,1,0\n");
    assert!(data_error(ingest_csv(f.path(), &RunConfig::default())).contains("adult_equiv"));
}

#[test]
fn missing_columns_are_named() {
    let f = file("id,income\nh1,1\n");
    assert!(data_error(ingest_csv(f.path(), &RunConfig::default())).contains("household_id"));
    let f = file("household_id,wage\nh1,1\n");
    assert!(data_error(ingest_csv(f.path(), &RunConfig::default())).contains("`income`"));
    let config = RunConfig {
        group_column: Some("region".into()),
        ..RunConfig::default()
    };
    let f = file("household_id,income\nh1,1\n");
    assert!(data_error(ingest_csv(f.path(), &config)).contains("region"));
}

#[test]
fn empty_files_are_rejected() {
    assert!(data_error(ingest_csv(file("").path(), &RunConfig::default())).contains("empty"));
    assert!(data_error(ingest_csv(file("household_id,income\n").path(), &RunConfig::default())).contains("empty"));
}

#[test]
fn missing_file_is_a_data_error() {
    let err = ingest_csv(std::path::Path::new("/nonexistent/survey.csv"), &RunConfig::default()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn group_labels_are_attached() {
    let config = RunConfig {
        group_column: Some("region".into()),
        ..RunConfig::default()
    };
    let f = file("household_id,region,income\nh1,north,1\nh2,south,2\nh3,north,3\n");
    let sample = ingest_csv(f.path(), &config).unwrap();
    assert_eq!(sample.group_labels().unwrap(), &["north", "south", "north"]);
}

#[test]
fn table_round_trips_through_csv() {
    let f = file("household_id,income,adult_equiv,group\nh1,1.5,2,a\nh2,3,,b\n");
    let table = SurveyTable::from_path(f.path(), Some("group")).unwrap();
    let mut bytes = Vec::new();
    table.write_csv(&mut bytes).unwrap();
    let again = SurveyTable::read_csv(bytes.as_slice(), Some("group")).unwrap();
    assert_eq!(table, again);
}

#[test]
fn config_parses_and_round_trips() {
    let config = RunConfig::from_json(r#"{"poverty_line": 143080, "seed": 9, "group_column": "region"}"#).unwrap();
    assert_eq!(config.poverty_line, Some(143080.0));
    assert_eq!(config.seed, 9);
    assert_eq!(config.confidence_level, 0.95);
    let text = serde_json::to_string(&config).unwrap();
    assert_eq!(RunConfig::from_json(&text).unwrap(), config);
}

#[test]
fn bad_configs_are_usage_errors() {
    for text in [
        r#"{"poverty_lin": 1}"#,
        r#"{"confidence_level": 1.5}"#,
        r#"{"poverty_line": -2}"#,
        r#"{"threads": 0}"#,
        "not json",
    ] {
        let err = RunConfig::from_json(text).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{text}");
    }
    assert_eq!(RunConfig::default().poverty_config().unwrap_err().exit_code(), 1);
}

#[test]
fn models_parse_and_print_back() {
    for text in ["uniform:0,1", "0.5*exponential:1+0.5*exponential:0.5"] {
        let model = parse_model(text).unwrap();
        assert_eq!(parse_model(&model_to_string(&model)).unwrap(), model);
    }
    let mixture = parse_model("0.25*exponential:1+0.75*uniform:0,2").unwrap();
    assert_eq!(mixture.len(), 2);
    assert_eq!(mixture.components()[1].weight, 0.75);
    assert!(parse_model("heavy*exponential:1").is_err());
    assert!(parse_model("cauchy:0,1").is_err());
}
