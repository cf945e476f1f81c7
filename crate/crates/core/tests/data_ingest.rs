use std::io::Write;

use perfsgd_core::data::{load_credit_csv, preprocess, CsvOptions, Dataset};
use perfsgd_core::environments::{compute_logistic_constants, StrategicEnv};
use perfsgd_core::rng::{seeded, standard_normal, uniform};

#[test]
fn credit_shaped_file_loads() {
    let n = 18_357;
    let mut file = tempfile::NamedTempFile::new().unwrap();
    let names: Vec<String> = (0..10).map(|i| format!("f{i}")).collect();
    writeln!(file, "id,{},SeriousDlqin2yrs", names.join(",")).unwrap();
    let mut rng = seeded(1);
    for i in 0..n {
        let row: Vec<String> = (0..10).map(|j| format!("{}", 3.0 * j as f64 + standard_normal(&mut rng))).collect();
        let y = u8::from(uniform(&mut rng) < 0.3);
        writeln!(file, "{i},{},{y}", row.join(",")).unwrap();
    }
    // One row with a missing value is dropped, not imputed.
    writeln!(file, "{n},{},1", [""; 10].join(",")).unwrap();
    file.flush().unwrap();

    let opts = CsvOptions {
        label_column: "SeriousDlqin2yrs".into(),
        feature_columns: Some(names),
    };
    let loaded = load_credit_csv(file.path(), &opts).unwrap();
    assert_eq!(loaded.dropped_rows, 1);
    assert_eq!((loaded.dataset.len(), loaded.dataset.dim()), (n, 10));

    let data = preprocess(&loaded.dataset).unwrap();
    let (means, stds) = data.column_moments();
    assert!(means.iter().all(|m| m.abs() < 1e-9));
    assert!(stds.iter().all(|s| (s - 1.0).abs() < 1e-9));

    let lambda = StrategicEnv::default_lambda(n);
    let c = compute_logistic_constants(&data, lambda, 100.0);
    assert!((c.gamma - 0.054).abs() < 5e-4);
    // Standardized features have mean squared norm d = 10.
    assert!((c.beta - (2.5 + c.gamma)).abs() < 1e-9);
    assert!(!c.in_convergence_regime());
}

#[test]
fn logistic_constants_formula_reproduces_reported_values() {
    // Mean squared norm 18.664 with n = 18357 and λ = 10³/n.
    let n = 18_357;
    let v = (18.664f64 / 10.0).sqrt();
    let features: Vec<f64> = (0..n * 10).map(|i| if i % 3 == 0 { v } else { -v }).collect();
    let labels: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
    let data = Dataset::new(features, 10, labels).unwrap();
    let c = compute_logistic_constants(&data, StrategicEnv::default_lambda(n), 100.0);
    assert!((c.beta - 4.72).abs() < 5e-4, "beta {}", c.beta);
    assert!((c.gamma - 0.054).abs() < 5e-4, "gamma {}", c.gamma);
    assert!((c.ratio() - 0.011).abs() < 1e-3);
}
