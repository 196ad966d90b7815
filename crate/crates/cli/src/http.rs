//! JSON API over [`Service`]. Every handler returns the same value as the
//! matching CLI subcommand's `--json` output.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use crate::error::ServiceError;
use crate::service::{Service, SynthesisRequest};

type Shared = State<Arc<Service>>;

/// Query pairs in request order; keys may repeat.
type Pairs = Query<Vec<(String, String)>>;

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/api/schemes", get(schemes))
        .route("/api/validate", get(validate))
        .route("/api/classes/{notation}", get(class))
        .route("/api/search", get(search))
        .route("/api/browse", get(browse))
        .route("/api/explode", get(explode))
        .route("/api/broaden", get(broaden))
        .route("/api/related", get(related))
        .route("/api/suggest", post(suggest))
        .route("/api/synthesize", get(synthesize))
        .route("/api/expand-add", get(expand_add))
        .route("/api/chain-index", get(chain_index))
        .route("/api/relative-index", get(relative_index))
        .route("/api/authority/{notation}", get(authority))
        .route("/api/skos", get(skos))
        .route("/api/documents", post(documents))
        .route("/api/map", get(map))
        .with_state(service)
}

pub fn status(error: &ServiceError) -> StatusCode {
    match error {
        ServiceError::Usage(_) | ServiceError::Parse { .. } | ServiceError::Invalid(_) => StatusCode::BAD_REQUEST,
        ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
        ServiceError::Config(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn reply<T: Serialize>(result: Result<T, ServiceError>) -> Response {
    match result {
        Ok(value) => Json(value).into_response(),
        Err(e) => (status(&e), Json(e.body())).into_response(),
    }
}

struct Params(Vec<(String, String)>);

impl Params {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn all(&self, key: &str) -> impl Iterator<Item = &str> + '_ {
        let key = key.to_string();
        self.0.iter().filter(move |(k, _)| *k == key).map(|(_, v)| v.as_str())
    }

    fn scheme(&self) -> Option<&str> {
        self.get("scheme")
    }

    fn lang(&self) -> Option<&str> {
        self.get("lang")
    }

    fn required(&self, key: &str) -> Result<&str, ServiceError> {
        self.get(key)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| ServiceError::Usage(format!("missing query parameter `{key}`")))
    }

    fn flag(&self, key: &str) -> Result<bool, ServiceError> {
        match self.get(key) {
            None | Some("0" | "false" | "no") => Ok(false),
            Some("" | "1" | "true" | "yes") => Ok(true),
            Some(other) => Err(ServiceError::Usage(format!("`{key}` must be a boolean, got {other:?}"))),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ServiceError> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| ServiceError::Usage(format!("`{key}` must be a non-negative integer, got {v:?}")))
            })
            .transpose()
    }
}

/// Splits `name=value` at the first `=`; the value may itself start with
/// `=` (language auxiliaries).
pub fn split_assignment(text: &str) -> Result<(String, String), ServiceError> {
    match text.split_once('=') {
        Some((name, value)) if !name.is_empty() && !value.is_empty() => Ok((name.to_string(), value.to_string())),
        _ => Err(ServiceError::Usage(format!("expected name=value, got {text:?}"))),
    }
}

/// `main` selects auxiliary synthesis, `formula` a facet formula; `aux`
/// pairs are facet or slot assignments.
pub fn synthesis_request(
    main: Option<&str>,
    formula: Option<&str>,
    aux: &[(String, String)],
) -> Result<SynthesisRequest, ServiceError> {
    match (main, formula) {
        (Some(main), None) => Ok(SynthesisRequest::Auxiliaries {
            main: main.to_string(),
            aux: aux.to_vec(),
        }),
        (None, Some(name)) => Ok(SynthesisRequest::Formula {
            name: name.to_string(),
            components: aux.iter().cloned().collect(),
        }),
        _ => Err(ServiceError::Usage("give exactly one of main or formula".into())),
    }
}

async fn schemes(State(s): Shared) -> Response {
    reply(Ok(s.schemes()))
}

async fn validate(State(s): Shared) -> Response {
    reply(Ok(s.validate()))
}

async fn class(State(s): Shared, Path(notation): Path<String>, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply(s.class(p.scheme(), &notation, p.lang()))
}

async fn search(State(s): Shared, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply(p.required("q").and_then(|q| s.search(p.scheme(), q, p.lang())))
}

async fn browse(State(s): Shared, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply(
        p.flag("aggregate")
            .and_then(|agg| s.browse(p.scheme(), p.get("n"), agg, p.lang())),
    )
}

async fn explode(State(s): Shared, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply(s.explode(p.scheme(), p.get("n")))
}

async fn broaden(State(s): Shared, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply((|| {
        s.broaden(p.scheme(), p.required("n")?, p.count("min_hits")?, p.lang())
    })())
}

async fn related(State(s): Shared, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply(p.required("n").and_then(|n| s.related(p.scheme(), n, p.lang())))
}

async fn suggest(State(s): Shared, Query(q): Pairs, body: String) -> Response {
    let p = Params(q);
    reply(p.count("k").and_then(|k| s.suggest(p.scheme(), &body, p.lang(), k)))
}

async fn synthesize(State(s): Shared, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply((|| {
        let aux = p.all("aux").map(split_assignment).collect::<Result<Vec<_>, _>>()?;
        let request = synthesis_request(p.get("main"), p.get("formula"), &aux)?;
        s.synthesize(p.scheme(), &request)
    })())
}

async fn expand_add(State(s): Shared, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply((|| {
        s.expand_add(p.scheme(), p.required("base")?, p.required("source")?)
    })())
}

async fn chain_index(State(s): Shared, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply(s.chain_index(p.scheme(), p.lang()))
}

async fn relative_index(State(s): Shared, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply(s.relative_index(p.scheme(), p.lang()))
}

/// `langs` is comma separated.
async fn authority(State(s): Shared, Path(notation): Path<String>, Query(q): Pairs) -> Response {
    let p = Params(q);
    let langs: Option<Vec<String>> = p.get("langs").map(|l| {
        l.split(',')
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect()
    });
    reply(s.authority(p.scheme(), &[notation], langs.as_deref()))
}

async fn skos(State(s): Shared, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply(s.skos(p.scheme()))
}

async fn documents(State(s): Shared, body: String) -> Response {
    reply(s.ingest(&body))
}

async fn map(State(s): Shared, Query(q): Pairs) -> Response {
    let p = Params(q);
    reply((|| s.map(p.required("src")?, p.required("n")?, p.required("tgt")?))())
}

/// Serves until the process is stopped. A bind failure is returned before
/// any request is accepted.
pub async fn serve(
    service: Arc<Service>,
    addr: SocketAddr,
    ready: impl FnOnce(SocketAddr),
) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| ServiceError::Config(format!("cannot bind {addr}: {e}")))?;
    let local = listener
        .local_addr()
        .map_err(|e| ServiceError::Config(format!("cannot read bound address: {e}")))?;
    ready(local);
    axum::serve(listener, router(service))
        .await
        .map_err(|e| ServiceError::Config(format!("server error: {e}")))
}
