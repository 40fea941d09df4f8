use crate::error::ApiError;
use crate::state::AppState;
use axum::extract::{Query, State};
use axum::http::header;
use axum::response::IntoResponse;
use axum::Json;
use drh_client::api::*;
use drh_core::codebook::CodebookBackend;
use drh_core::fingerprint::fold;
use drh_core::index::QueryOptions;
use drh_core::simulate::{self, MutationModel};
use drh_core::{nw_distance, parse_sequence, AlignmentParams, Index, IndexConfig};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Serialize)]
pub struct Health {
    status: &'static str,
}

pub async fn health() -> Json<Health> {
    Json(Health { status: "ok" })
}

/// Runs blocking work on the blocking pool, optionally inside a dedicated
/// rayon pool so the caller controls worker count (results are identical
/// for any worker count; this is purely a resource knob).
async fn run_blocking<T, F>(threads: Option<usize>, work: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || match threads {
        None | Some(0) => work(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| ApiError::bad_request("config", e.to_string()))?
            .install(work),
    })
    .await
    .expect("blocking task panicked")
}

fn csv_response(csv: String) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv)
}

pub async fn dist(Json(req): Json<DistRequest>) -> Result<Json<DistResponse>, ApiError> {
    let defaults = AlignmentParams::default();
    let params = AlignmentParams {
        gap_cost: req.cg.unwrap_or(defaults.gap_cost),
        sub_cost: req.cs.unwrap_or(defaults.sub_cost),
        band: None,
    };
    let distance = run_blocking(None, move || {
        let a = parse_sequence(req.a.as_bytes())?;
        let b = parse_sequence(req.b.as_bytes())?;
        Ok(nw_distance(&a, &b, &params)?)
    })
    .await?;
    Ok(Json(DistResponse { distance }))
}

pub async fn encode(Json(req): Json<EncodeRequest>) -> Result<Json<EncodeResponse>, ApiError> {
    let cfg = req
        .encoder
        .resolve()
        .map_err(|e| ApiError::bad_request("config", e))?;
    let candidates = run_blocking(None, move || {
        let seq = parse_sequence(req.seq.as_bytes())?;
        Ok(drh_core::encode(&seq, &cfg)?)
    })
    .await?;
    Ok(Json(EncodeResponse {
        candidates: candidates
            .iter()
            .map(|c| CandidateDto {
                fingerprint: format!("{:016x}", fold(&c.bits)),
                bit_len: c.bits.len() as u32,
                final_distance: c.final_distance,
                bits_hex: c.bits.to_hex(),
            })
            .collect(),
    }))
}

fn load_text(
    inline: Option<String>,
    path: Option<String>,
    what: &str,
) -> Result<Vec<u8>, ApiError> {
    match (inline, path) {
        (Some(text), None) => Ok(text.into_bytes()),
        (None, Some(path)) => std::fs::read(&path)
            .map_err(|e| ApiError::bad_request("io", format!("cannot read {what} {path}: {e}"))),
        _ => Err(ApiError::bad_request(
            "config",
            format!("exactly one of {what}_text and {what}_path is required"),
        )),
    }
}

pub async fn build(Json(req): Json<BuildRequest>) -> Result<Json<BuildResponse>, ApiError> {
    let encoder = req
        .encoder
        .resolve()
        .map_err(|e| ApiError::bad_request("config", e))?;
    let cfg = IndexConfig {
        window_lens: req.window_lens,
        stride: req.stride,
        encoder,
    };
    let output_path = req.output_path;
    let text = load_text(req.reference_text, req.reference_path, "reference")?;
    let out = PathBuf::from(&output_path);
    let records = run_blocking(req.threads, move || {
        let reference = parse_sequence(&text)?;
        let index = Index::build(&reference, &cfg)?;
        index.write_to(&out)?;
        tracing::debug!(records = index.record_count(), path = %out.display(), "index written");
        Ok(index.record_count())
    })
    .await?;
    Ok(Json(BuildResponse {
        records,
        output_path,
    }))
}

/// Any explicitly supplied expectation must match the index header; a
/// mismatched codebook would silently return zero collisions.
fn verify_expectations(index: &Index, expect: &EncoderOpts) -> Result<(), ApiError> {
    if expect.is_empty() {
        return Ok(());
    }
    if expect.max_active.is_some() {
        return Err(ApiError::bad_request(
            "config",
            "max_active is a query-time knob, not an index expectation",
        ));
    }
    fn check(bad: &mut Vec<String>, name: &str, ours: String, theirs: String) {
        if ours != theirs {
            bad.push(format!("{name}: given {ours}, index has {theirs}"));
        }
    }
    let cb = index.codebook();
    let al = index.alignment();
    let mut bad = Vec::new();
    if let Some(v) = &expect.backend {
        let stored = match cb.backend {
            CodebookBackend::XorShift => "xorshift",
            CodebookBackend::Tans => "tans",
        };
        check(&mut bad, "backend", v.clone(), stored.to_string());
    }
    if let Some(v) = expect.n {
        check(&mut bad, "n", v.to_string(), cb.n.to_string());
    }
    if let Some(v) = expect.block_size {
        check(
            &mut bad,
            "block_size",
            v.to_string(),
            cb.block_size.to_string(),
        );
    }
    if let Some(v) = expect.seed {
        check(&mut bad, "seed", v.to_string(), cb.seed.to_string());
    }
    if let Some(v) = &expect.tans_counts {
        let stored = cb.tans_model.as_ref().map(|m| m.counts().to_vec());
        if stored.as_ref() != Some(v) {
            bad.push("tans_counts differ from the index model".to_string());
        }
    }
    if let Some(v) = expect.cg {
        check(&mut bad, "cg", v.to_string(), al.gap_cost.to_string());
    }
    if let Some(v) = expect.cs {
        check(&mut bad, "cs", v.to_string(), al.sub_cost.to_string());
    }
    if let Some(v) = expect.band {
        check(
            &mut bad,
            "band",
            v.to_string(),
            al.band.unwrap_or(0).to_string(),
        );
    }
    if let Some(v) = expect.candidates {
        check(
            &mut bad,
            "candidates",
            v.to_string(),
            index.n_candidates().to_string(),
        );
    }
    if let Some(v) = expect.slack {
        check(
            &mut bad,
            "slack",
            v.to_string(),
            index.candidate_slack().to_string(),
        );
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(ApiError::from(drh_core::DrhError::CodebookMismatch(
            bad.join("; "),
        )))
    }
}

pub async fn query(
    State(state): State<Arc<AppState>>,
    Json(req): Json<QueryRequest>,
) -> Result<Json<QueryResponse>, ApiError> {
    let index = state
        .open_index(std::path::Path::new(&req.index_path))
        .await
        .map_err(|e| ApiError::bad_request("io", format!("cannot open {}: {e}", req.index_path)))?
        .map_err(ApiError::from)?;
    verify_expectations(&index, &req.expect)?;
    let text = load_text(req.read_text, req.read_path, "read")?;
    let limit = req.limit.unwrap_or(100);
    let opts = QueryOptions {
        max_active: req.max_active.unwrap_or(QueryOptions::default().max_active),
    };
    let hits = run_blocking(None, move || {
        let read = parse_sequence(&text)?;
        Ok(index.query(&read, limit, &opts)?)
    })
    .await?;
    Ok(Json(QueryResponse {
        hits: hits
            .into_iter()
            .map(|h| QueryHitDto {
                position: h.position,
                window_len: h.window_len,
                rank: h.rank,
            })
            .collect(),
    }))
}

#[derive(Deserialize)]
pub struct MetaParams {
    path: String,
}

pub async fn index_meta(
    State(state): State<Arc<AppState>>,
    Query(params): Query<MetaParams>,
) -> Result<Json<IndexMetaResponse>, ApiError> {
    let index = state
        .open_index(std::path::Path::new(&params.path))
        .await
        .map_err(|e| ApiError::bad_request("io", format!("cannot open {}: {e}", params.path)))?
        .map_err(ApiError::from)?;
    let cb = index.codebook();
    let al = index.alignment();
    Ok(Json(IndexMetaResponse {
        record_count: index.record_count(),
        window_lens: index.window_lens().to_vec(),
        stride: index.stride(),
        backend: match cb.backend {
            CodebookBackend::XorShift => "xorshift".into(),
            CodebookBackend::Tans => "tans".into(),
        },
        n: cb.n,
        block_size: cb.block_size,
        seed: cb.seed,
        cg: al.gap_cost,
        cs: al.sub_cost,
        band: al.band.unwrap_or(0),
        n_candidates: index.n_candidates(),
        candidate_slack: index.candidate_slack(),
    }))
}

pub async fn simulate_curve(Json(req): Json<CurveRequest>) -> Result<impl IntoResponse, ApiError> {
    let points = simulate::rate_distortion_curve(&req.d_values)?;
    Ok(csv_response(simulate::curve_csv(&points)))
}

pub async fn simulate_hamming(
    Json(req): Json<HammingRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let csv = run_blocking(None, move || {
        let hist = simulate::hamming_toy_experiment(req.l_bits, req.rate, req.trials, req.seed)?;
        Ok(simulate::hamming_csv(
            req.l_bits, req.rate, req.trials, req.seed, &hist,
        ))
    })
    .await?;
    Ok(csv_response(csv))
}

pub async fn simulate_histogram(
    Json(req): Json<HistogramRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let cfg = req
        .encoder
        .resolve()
        .map_err(|e| ApiError::bad_request("config", e))?;
    let csv = run_blocking(req.threads, move || {
        let hists =
            simulate::drh_distortion_histogram(&req.window_lens, &cfg, req.trials, req.seed)?;
        Ok(simulate::histogram_csv(req.trials, req.seed, &hists))
    })
    .await?;
    Ok(csv_response(csv))
}

pub async fn simulate_recall(
    Json(req): Json<RecallRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let cfg = req
        .encoder
        .resolve()
        .map_err(|e| ApiError::bad_request("config", e))?;
    let model = MutationModel {
        p_sub: req.p_sub,
        p_ins: req.p_ins,
        p_del: req.p_del,
    };
    let csv = run_blocking(req.threads, move || {
        let report = simulate::collision_recall(
            req.ref_len,
            req.window_len,
            &model,
            &cfg,
            req.trials,
            req.seed,
        )?;
        Ok(simulate::recall_csv(
            req.ref_len,
            &model,
            req.trials,
            req.seed,
            &report,
        ))
    })
    .await?;
    Ok(csv_response(csv))
}
