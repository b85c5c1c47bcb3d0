//! Drives the live session API in-process: create a session, send span
//! feedback for three turns, accept. Each request and reply is printed.
//!
//!     cargo run -p imt-server --example live_session

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use axum::Router;
use http_body_util::BodyExt;
use imt_core::ScriptedScorer;
use imt_server::session::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn send(app: &Router, method: &str, uri: &str, body: Value) -> anyhow::Result<Value> {
    println!("> {method} {uri} {body}");
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))?;
    let response = app.clone().oneshot(request).await?;
    let status = response.status();
    let bytes = response.into_body().collect().await?.to_bytes();
    let value: Value = serde_json::from_slice(&bytes)?;
    println!(
        "< {status} hypothesis={} charged={} totals={}",
        value["hypothesis"], value["charged"], value["totals"]
    );
    Ok(value)
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let scorer = ScriptedScorer::new([
        "Indiana is the sooner State to impose that condition.",
        "Indiana was the sooner State to impose such a condition.",
        "Indiana was the first State to impose such a prerequisite.",
        "Indiana was the first State to impose such a requirement.",
    ]);
    let app = router(AppState::new(Arc::new(scorer), ServiceConfig::default()));

    let created = send(
        &app,
        "POST",
        "/api/sessions",
        json!({ "source": "Indiana fue el primer Estado en imponer tal requisito." }),
    )
    .await?;
    let id = created["id"].as_str().unwrap_or_default().to_owned();
    let feedback = format!("/api/sessions/{id}/feedback");

    // Indiana | is -> was | the sooner | State to impose ...
    send(
        &app,
        "POST",
        &feedback,
        json!({
            "spans": [[0, 0], [4, 6]],
            "correction": { "after_segment_rank": 1, "word": "was" }
        }),
    )
    .await?;
    // Indiana was the | sooner -> first | State to impose such a
    send(
        &app,
        "POST",
        &feedback,
        json!({
            "spans": [[0, 2], [4, 8]],
            "correction": { "after_segment_rank": 1, "word": "first" }
        }),
    )
    .await?;
    // everything but the last word, which becomes "requirement."
    send(
        &app,
        "POST",
        &feedback,
        json!({
            "spans": [[0, 8]],
            "correction": { "after_segment_rank": 1, "word": "requirement." }
        }),
    )
    .await?;
    let accepted = send(
        &app,
        "POST",
        &format!("/api/sessions/{id}/accept"),
        json!({}),
    )
    .await?;
    println!("ratios: {}", accepted["ratios"]);
    Ok(())
}
