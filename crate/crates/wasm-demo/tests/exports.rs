use purify_wasm_demo::{box_size_curve, error_model, purify_slice};
use serde_json::Value;

#[test]
fn slice_reports_paths_and_centers() {
    let v: Value = serde_json::from_str(&purify_slice(3, 3, 2, 6, 0.0, 1).unwrap()).unwrap();
    assert_eq!(v["output_error_rate"], 0.0);
    assert_eq!(v["fine_dims"], serde_json::json!([18, 18, 12]));
    let paths = v["paths"].as_array().unwrap();
    assert!(!paths.is_empty());
    for p in paths {
        assert_eq!(
            p["points"].as_array().unwrap().len(),
            p["length"].as_u64().unwrap() as usize + 1
        );
    }
}

#[test]
fn error_model_matches_closed_form() {
    let v: Value = serde_json::from_str(&error_model(0.9999, 29.0, 0.006).unwrap()).unwrap();
    assert!((v["path_error"].as_f64().unwrap() - 0.0058).abs() < 1e-4);
    assert!((v["node_error"].as_f64().unwrap() - 0.0115).abs() < 1e-4);
    assert!((v["required_fidelity"].as_f64().unwrap() - 0.9999).abs() < 5e-5);
    let v: Value = serde_json::from_str(&error_model(0.99, 10.0, 0.7).unwrap()).unwrap();
    assert!(v["required_fidelity"].is_null());
}

#[test]
fn curve_has_one_point_per_size() {
    let v: Value = serde_json::from_str(&box_size_curve(0.0, &[6, 8], 1).unwrap()).unwrap();
    let pts = v.as_array().unwrap();
    assert_eq!(pts.len(), 2);
    assert_eq!(pts[1]["box_size"], 8);
    assert_eq!(pts[0]["mean_output_error"], 0.0);
}
