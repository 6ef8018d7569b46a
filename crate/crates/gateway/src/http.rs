//! Minimal HTTP/1.1 query API (GET only).
//!
//! ```text
//! GET /devices                                   JSON device listing
//! GET /devices/{id}/series?from&to&agg           JSON aggregated series
//! GET /devices/{id}/export.csv?from&to           CSV in the export schema
//! ```
//!
//! `from`/`to` accept RFC 3339 or epoch seconds and default to the full
//! range; `agg` is `raw`, `10min` or `hourly` (default `raw`).

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;

use crate::ingest::{spawn_accept_loop, ServerHandle};
use crate::query::{query_series, AggPoint, Aggregation};
use crate::store::Gateway;
use crate::GatewayError;

#[derive(Serialize)]
struct SeriesResponse {
    device_id: u16,
    agg: Aggregation,
    points: Vec<AggPoint>,
}

struct Response {
    status: u16,
    content_type: &'static str,
    body: Vec<u8>,
}

impl Response {
    fn json<T: Serialize>(value: &T) -> Self {
        Response {
            status: 200,
            content_type: "application/json",
            body: serde_json::to_vec(value).expect("serializable"),
        }
    }

    fn error(status: u16, message: &str) -> Self {
        let body = serde_json::json!({ "error": message });
        Response {
            status,
            content_type: "application/json",
            body: serde_json::to_vec(&body).unwrap(),
        }
    }
}

fn status_text(code: u16) -> &'static str {
    match code {
        200 => "OK",
        400 => "Bad Request",
        404 => "Not Found",
        405 => "Method Not Allowed",
        _ => "Internal Server Error",
    }
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' if i + 2 < bytes.len() => {
                let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).unwrap_or("");
                if let Ok(v) = u8::from_str_radix(hex, 16) {
                    out.push(v);
                    i += 3;
                    continue;
                }
                out.push(b'%');
                i += 1;
            }
            b'+' => {
                out.push(b' ');
                i += 1;
            }
            b => {
                out.push(b);
                i += 1;
            }
        }
    }
    String::from_utf8_lossy(&out).into_owned()
}

fn query_params(target: &str) -> (&str, Vec<(String, String)>) {
    match target.split_once('?') {
        None => (target, Vec::new()),
        Some((path, qs)) => {
            let params = qs
                .split('&')
                .filter(|kv| !kv.is_empty())
                .map(|kv| match kv.split_once('=') {
                    Some((k, v)) => (percent_decode(k), percent_decode(v)),
                    None => (percent_decode(kv), String::new()),
                })
                .collect();
            (path, params)
        }
    }
}

fn gateway_status(e: &GatewayError) -> u16 {
    match e {
        GatewayError::UnknownDevice(_) => 404,
        GatewayError::BadRange { .. } | GatewayError::BadQuery(_) => 400,
        _ => 500,
    }
}

fn parse_range(params: &[(String, String)]) -> Result<(u64, u64, Aggregation), GatewayError> {
    let mut from = 0u64;
    let mut to = u64::MAX;
    let mut agg = Aggregation::Raw;
    for (key, value) in params {
        match key.as_str() {
            "from" => {
                from = airnet_core::timefmt::parse_time(value).map_err(GatewayError::BadQuery)?
            }
            "to" => to = airnet_core::timefmt::parse_time(value).map_err(GatewayError::BadQuery)?,
            "agg" => agg = Aggregation::parse(value)?,
            other => {
                return Err(GatewayError::BadQuery(format!("unknown parameter {other:?}")));
            }
        }
    }
    if from > to {
        return Err(GatewayError::BadRange { from, to });
    }
    Ok((from, to, agg))
}

fn route(gateway: &Gateway, target: &str) -> Response {
    let (path, params) = query_params(target);
    let segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
    match segments.as_slice() {
        ["devices"] => Response::json(&gateway.devices()),
        ["devices", id, tail] => {
            let Ok(device_id) = id.parse::<u16>() else {
                return Response::error(404, "device ids are numeric");
            };
            match *tail {
                "series" => match parse_range(&params)
                    .and_then(|(from, to, agg)| {
                        Ok((agg, query_series(gateway, device_id, from, to, agg)?))
                    }) {
                    Ok((agg, points)) => Response::json(&SeriesResponse {
                        device_id,
                        agg,
                        points,
                    }),
                    Err(e) => Response::error(gateway_status(&e), &e.to_string()),
                },
                "export.csv" => {
                    let range = parse_range(&params);
                    match range.and_then(|(from, to, _)| {
                        gateway.channel_readings_in(device_id, from, to)
                    }) {
                        Ok(readings) => {
                            let mut body = Vec::new();
                            if let Err(e) = crate::csvio::export_csv(&readings, &mut body) {
                                return Response::error(500, &e.to_string());
                            }
                            Response {
                                status: 200,
                                content_type: "text/csv",
                                body,
                            }
                        }
                        Err(e) => Response::error(gateway_status(&e), &e.to_string()),
                    }
                }
                _ => Response::error(404, "no such endpoint"),
            }
        }
        _ => Response::error(404, "no such endpoint"),
    }
}

fn handle_connection(gateway: &Gateway, mut stream: TcpStream) {
    let _ = stream.set_read_timeout(Some(Duration::from_secs(5)));
    let mut buf = Vec::new();
    let mut chunk = [0u8; 1024];
    // Read until the end of the request head; GET requests carry no body.
    while !buf.windows(4).any(|w| w == b"\r\n\r\n") {
        match stream.read(&mut chunk) {
            Ok(0) => break,
            Ok(n) => buf.extend_from_slice(&chunk[..n]),
            Err(_) => return,
        }
        if buf.len() > 16 * 1024 {
            return;
        }
    }
    let head = String::from_utf8_lossy(&buf);
    let mut parts = head.lines().next().unwrap_or("").split_whitespace();
    let (method, target) = (parts.next().unwrap_or(""), parts.next().unwrap_or("/"));

    let response = if method != "GET" {
        Response::error(405, "only GET is supported")
    } else {
        route(gateway, target)
    };
    let header = format!(
        "HTTP/1.1 {} {}\r\nContent-Type: {}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        response.status,
        status_text(response.status),
        response.content_type,
        response.body.len()
    );
    let _ = stream.write_all(header.as_bytes());
    let _ = stream.write_all(&response.body);
}

/// Binds the HTTP listener and serves the query API.
pub fn serve_http(gateway: Arc<Gateway>, addr: &str) -> std::io::Result<ServerHandle> {
    let listener = TcpListener::bind(addr)?;
    spawn_accept_loop(listener, move |stream, _stop| {
        handle_connection(&gateway, stream)
    })
}
