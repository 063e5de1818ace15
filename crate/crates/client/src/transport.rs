//! Byte-level request/response plumbing. Sessions talk to the server through
//! a [`Transport`] so tests can record, replay or tamper with traffic.

use std::fmt;
use std::future::Future;
use std::sync::{Arc, Mutex, PoisonError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Get,
    Post,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Get => "GET",
            Method::Post => "POST",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub method: Method,
    /// Path plus query string, e.g. `/api/board?from=0&to=3`.
    pub path: String,
    pub bearer: Option<String>,
    /// JSON body.
    pub body: Option<Vec<u8>>,
}

impl Request {
    pub fn get(path: impl Into<String>) -> Self {
        Request { method: Method::Get, path: path.into(), bearer: None, body: None }
    }

    pub fn post(path: impl Into<String>, body: Vec<u8>) -> Self {
        Request { method: Method::Post, path: path.into(), bearer: None, body: Some(body) }
    }

    pub fn bearer(mut self, token: &str) -> Self {
        self.bearer = Some(token.to_owned());
        self
    }

    /// `METHOD path`, the unit of a traffic transcript.
    pub fn summary(&self) -> String {
        format!("{} {}", self.method, self.path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub body: Vec<u8>,
}

impl Response {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("transport failure: {0}")]
pub struct TransportError(pub String);

pub trait Transport: Send + Sync {
    fn send(&self, request: Request) -> impl Future<Output = Result<Response, TransportError>> + Send;
}

/// Plain HTTP via reqwest. Cheap to clone; clones share a connection pool.
#[derive(Debug, Clone)]
pub struct HttpTransport {
    base: String,
    client: reqwest::Client,
}

impl HttpTransport {
    pub fn new(base_url: &str) -> Self {
        HttpTransport { base: base_url.trim_end_matches('/').to_owned(), client: reqwest::Client::new() }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }
}

impl Transport for HttpTransport {
    async fn send(&self, request: Request) -> Result<Response, TransportError> {
        let url = format!("{}{}", self.base, request.path);
        let mut builder = match request.method {
            Method::Get => self.client.get(url),
            Method::Post => self.client.post(url),
        };
        if let Some(token) = &request.bearer {
            builder = builder.bearer_auth(token);
        }
        if let Some(body) = request.body {
            builder = builder.header(reqwest::header::CONTENT_TYPE, "application/json").body(body);
        }
        let resp = builder.send().await.map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.bytes().await.map_err(|e| TransportError(e.to_string()))?.to_vec();
        Ok(Response { status, body })
    }
}

/// Full record of one exchange.
#[derive(Debug, Clone)]
pub struct Exchange {
    pub request: Request,
    pub response: Option<Response>,
}

/// Wraps a transport and keeps every exchange. Clones share the log.
#[derive(Debug, Clone)]
pub struct RecordingTransport<T> {
    inner: T,
    log: Arc<Mutex<Vec<Exchange>>>,
}

impl<T> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        RecordingTransport { inner, log: Arc::default() }
    }

    pub fn exchanges(&self) -> Vec<Exchange> {
        self.log.lock().unwrap_or_else(PoisonError::into_inner).clone()
    }

    /// One `METHOD path` line per request, newline-terminated.
    pub fn transcript(&self) -> String {
        self.exchanges().iter().map(|x| format!("{}\n", x.request.summary())).collect()
    }

    pub fn clear(&self) {
        self.log.lock().unwrap_or_else(PoisonError::into_inner).clear();
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    async fn send(&self, request: Request) -> Result<Response, TransportError> {
        let result = self.inner.send(request.clone()).await;
        let response = result.as_ref().ok().cloned();
        self.log.lock().unwrap_or_else(PoisonError::into_inner).push(Exchange { request, response });
        result
    }
}

/// Passes requests through and rewrites responses; the hook for simulating
/// a misbehaving server.
#[derive(Clone)]
pub struct InterceptTransport<T, F> {
    inner: T,
    rewrite: F,
}

impl<T, F> InterceptTransport<T, F>
where
    F: Fn(&Request, Response) -> Response + Send + Sync,
{
    pub fn new(inner: T, rewrite: F) -> Self {
        InterceptTransport { inner, rewrite }
    }
}

impl<T, F> Transport for InterceptTransport<T, F>
where
    T: Transport,
    F: Fn(&Request, Response) -> Response + Send + Sync,
{
    async fn send(&self, request: Request) -> Result<Response, TransportError> {
        let resp = self.inner.send(request.clone()).await?;
        Ok((self.rewrite)(&request, resp))
    }
}

impl<T: Transport> Transport for &T {
    fn send(&self, request: Request) -> impl Future<Output = Result<Response, TransportError>> + Send {
        (**self).send(request)
    }
}
