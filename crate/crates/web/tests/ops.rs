use prandtl_lab_web::{eigen_json, growth_json, profile_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn eigen_defaults_and_overrides() {
    let v = parse(&eigen_json("{}").unwrap());
    let tau = floats(&v["tau"]);
    assert!(tau[1] < 0.0);
    assert!(v["residual_norm"].as_f64().unwrap() < 1e-8);
    let jumps: Vec<Vec<f64>> = v["jumps"].as_array().unwrap().iter().map(floats).collect();
    assert!((jumps[0][0] + tau[0]).abs() < 1e-8 && (jumps[0][1] + tau[1]).abs() < 1e-8);
    assert!((jumps[2][0] - 2.0).abs() < 1e-8 && jumps[2][1].abs() < 1e-8);
    let n = floats(&v["z"]).len();
    assert!(n <= 300 && n == floats(&v["v_re"]).len());

    assert!(eigen_json("{\"nonsense\": 1}").is_err());
    assert!(eigen_json("not json").is_err());
}

#[test]
fn profile_path_starts_at_the_initial_maximum() {
    let v = parse(&profile_json("gaussian-bump", 3.0, 0.2, 10).unwrap());
    let a0 = v["a0"].as_f64().unwrap();
    let path: Vec<Vec<f64>> = v["path"].as_array().unwrap().iter().map(floats).collect();
    assert_eq!(path.len(), 11);
    assert_eq!(path[0][1], a0);
    assert!(path.iter().all(|p| p[2] < 0.0));
    assert!(v["stopped"].is_null());
    let u0 = floats(&v["u_initial"]);
    let u1 = floats(&v["u_final"]);
    assert_eq!(u1[0], 0.0);
    assert!(u1.iter().zip(&u0).all(|(a, b)| a.is_finite() && *b >= 0.0));
}

#[test]
fn profile_reports_where_the_path_stops() {
    let v = parse(&profile_json("gaussian-bump", 1.0, 0.25, 25).unwrap());
    assert!(v["stopped"].as_str().is_some());
    assert!(v["path"].as_array().unwrap().len() < 26);
    assert!(profile_json("blasius", 1.0, 0.1, 5).is_err());
    assert!(profile_json("gaussian-bump", 3.0, 0.0, 5).is_err());
}

#[test]
fn growth_from_critical_bump_tracks_the_spectrum() {
    let v = parse(&growth_json("gaussian-bump", 3.0, 64.0, 0.6, "critical").unwrap());
    let (measured, spectral) = (v["measured"].as_f64().unwrap(), v["spectral"].as_f64().unwrap());
    assert!(spectral > 0.0);
    assert!((measured / spectral - 1.0).abs() < 0.25, "{measured} {spectral}");
    assert!(v["predicted"].as_f64().unwrap() > 0.0);
    assert!(growth_json("gaussian-bump", 3.0, 64.0, 0.1, "other").is_err());
}
