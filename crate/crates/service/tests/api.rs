use std::path::{Path, PathBuf};
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use cnlproof::provers::ProverConfig;
use cnlproof_service::{app, Config, Library};
use http_body_util::BodyExt;
use tower::ServiceExt;

fn lib_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../lib")
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(format!("{name}.elfe"))).unwrap()
}

fn config() -> Config {
    Config { lib_dir: lib_dir(), ..Config::default() }
}

async fn send(router: Router, request: Request<Body>) -> (StatusCode, Vec<u8>) {
    let response = router.oneshot(request).await.unwrap();
    let status = response.status();
    (status, response.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn post(body: impl Into<Body>) -> Request<Body> {
    Request::post("/api/verify").header("content-type", "application/json").body(body.into()).unwrap()
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

fn verify_body(text: &str) -> String {
    serde_json::json!({ "text": text }).to_string()
}

#[tokio::test]
async fn injectivity_proof_verifies() {
    let (status, body) = send(app(config()), post(verify_body(&fixture("injectivity")))).await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!(v["verified"], true, "{v}");
    let obligations: Vec<_> = v["statements"].as_array().unwrap().iter().filter(|s| s.get("tptp").is_some()).collect();
    assert_eq!(obligations.len(), 3);
}

#[tokio::test]
async fn empty_text_is_verified_with_no_statements() {
    let (status, body) = send(app(config()), post(verify_body(""))).await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!(v["verified"], true);
    assert_eq!(v["statements"].as_array().unwrap().len(), 0);
}

#[tokio::test]
async fn parse_errors_are_reports_not_http_errors() {
    let (status, body) = send(app(config()), post(verify_body("Lemma: ∈."))).await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!(v["verified"], false);
    assert_eq!(v["statements"][0]["status"], "error");
}

#[tokio::test]
async fn report_matches_the_cli_json() {
    let text = fixture("relations_no_cases");
    let (_, body) = send(app(config()), post(verify_body(&text))).await;
    let options = cnlproof::verifier::Options { search: cnlproof::language::SearchPath::new(vec![lib_dir()]), ..Default::default() };
    let direct = cnlproof::verifier::verify_text(&text, &options).to_json();
    let strip = |mut v: serde_json::Value| {
        for s in v["statements"].as_array_mut().unwrap() {
            s["ms"] = 0.into();
        }
        v
    };
    assert_eq!(strip(json(&body)), strip(json(direct.as_bytes())));
    assert!(String::from_utf8(body).unwrap().starts_with("{\n  \"verified\""));
}

#[tokio::test]
async fn bad_requests_get_400() {
    for body in [
        "{not json".to_string(),
        r#"{"txt": "x"}"#.to_string(),
        r#"{"text": "x", "options": {"provers": ["nope"]}}"#.to_string(),
        r#"{"text": "x", "options": {"timeout": -1}}"#.to_string(),
        verify_body(&"a".repeat(64 * 1024 + 1)),
    ] {
        let (status, reply) = send(app(config()), post(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{}", &body[..body.len().min(60)]);
        assert!(json(&reply)["error"].is_string());
    }
}

#[tokio::test]
async fn request_options_select_provers_and_limits() {
    let body = serde_json::json!({ "text": fixture("relations_no_cases"), "options": { "provers": ["resolution"], "timeout": 2 } });
    let (status, reply) = send(app(config()), post(body.to_string())).await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&reply);
    let line8 = v["statements"].as_array().unwrap().iter().find(|s| s["span"]["startLine"] == 8).unwrap();
    assert_eq!(line8["status"], "unknown", "{line8}");
}

#[cfg(unix)]
#[tokio::test(flavor = "multi_thread")]
async fn requests_beyond_capacity_get_503() {
    use std::os::unix::fs::PermissionsExt;
    let dir = tempfile::tempdir().unwrap();
    let sleeper = dir.path().join("sleeper");
    std::fs::write(&sleeper, "#!/bin/sh\nsleep 2\necho '% SZS status Theorem'\n").unwrap();
    std::fs::set_permissions(&sleeper, std::fs::Permissions::from_mode(0o755)).unwrap();
    let config = Config {
        provers: vec![ProverConfig::external("sleeper", &format!("{} {{file}}", sleeper.display()), 5.0)],
        max_concurrent: 1,
        ..config()
    };
    let router = app(config);
    let slow = tokio::spawn(send(router.clone(), post(verify_body("Lemma: for all x. x = x."))));
    tokio::time::sleep(Duration::from_millis(300)).await;
    let (status, _) = send(router.clone(), post(verify_body("Lemma: for all x. x = x."))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (status, body) = slow.await.unwrap();
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json(&body)["verified"], true);
}

#[tokio::test]
async fn libraries_are_listed_and_reparse() {
    let (status, body) = send(app(config()), get("/api/libraries")).await;
    assert_eq!(status, StatusCode::OK);
    let libs: Vec<Library> = serde_json::from_slice(&body).unwrap();
    let names: Vec<&str> = libs.iter().map(|l| l.name.as_str()).collect();
    assert_eq!(names, ["sets", "relations", "functions"]);
    for lib in &libs {
        cnlproof::language::parse(&lib.source, &lib.name).unwrap_or_else(|e| panic!("{}: {e}", lib.name));
    }

    let empty = tempfile::tempdir().unwrap();
    let (_, body) = send(app(Config { lib_dir: empty.path().to_path_buf(), ..config() }), get("/api/libraries")).await;
    assert_eq!(json(&body), serde_json::json!([]));
}

#[tokio::test]
async fn static_files_fall_back_to_the_index() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>editor</html>").unwrap();
    std::fs::create_dir(dir.path().join("assets")).unwrap();
    std::fs::write(dir.path().join("assets/app-3f2a.js"), "console.log(1)").unwrap();
    let router = app(Config { static_dir: Some(dir.path().to_path_buf()), ..config() });

    let (status, body) = send(router.clone(), get("/")).await;
    assert_eq!((status, body.as_slice()), (StatusCode::OK, b"<html>editor</html>".as_slice()));
    let (status, body) = send(router.clone(), get("/assets/app-3f2a.js")).await;
    assert_eq!((status, body.as_slice()), (StatusCode::OK, b"console.log(1)".as_slice()));
    let (status, body) = send(router.clone(), get("/proofs/42")).await;
    assert_eq!((status, body.as_slice()), (StatusCode::OK, b"<html>editor</html>".as_slice()));
    let (status, _) = send(router.clone(), get("/api/unknown")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn without_a_front_end_a_placeholder_is_served() {
    let (status, body) = send(app(config()), get("/")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(body).unwrap().contains("/api/verify"));
    let (status, _) = send(app(config()), get("/api/unknown")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
