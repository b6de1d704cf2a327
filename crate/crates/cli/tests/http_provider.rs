//! The HTTP embedding client against a throwaway local server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use chrono::NaiveDate;
use newsimpact::http::{embed_http, HttpConfig, HttpError};
use newsimpact_core::corpus::Headline;

struct Request {
    headers: Vec<String>,
    body: String,
}

/// Serves one response per entry of `replies`, built from each request
/// body, and reports the requests it saw.
fn serve(
    replies: Vec<Box<dyn Fn(&serde_json::Value) -> (u16, String) + Send>>,
) -> (String, mpsc::Receiver<Request>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/embed", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for reply in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut headers = Vec::new();
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end().to_string();
                if line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                headers.push(line);
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let body = String::from_utf8(body).unwrap();
            let (status, text) = reply(&serde_json::from_str(&body).unwrap());
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                text.len()
            )
            .unwrap();
            stream.flush().unwrap();
            tx.send(Request { headers, body }).unwrap();
        }
    });
    (url, rx)
}

/// Embeds each text as `[len, first byte, batch marker, 1]`.
fn echo(value: &serde_json::Value) -> (u16, String) {
    let rows: Vec<Vec<f64>> = value["texts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            let s = t.as_str().unwrap();
            vec![s.len() as f64, f64::from(s.as_bytes()[0]), 0.0, 1.0]
        })
        .collect();
    (200, serde_json::json!({ "embeddings": rows }).to_string())
}

fn headlines(titles: &[&str]) -> Vec<Headline> {
    let date = NaiveDate::from_ymd_opt(2024, 5, 8).unwrap();
    titles
        .iter()
        .enumerate()
        .map(|(i, t)| Headline {
            id: 10 + i as u64,
            date,
            title: t.to_string(),
        })
        .collect()
}

fn config(url: String, batch_size: usize, token: Option<&str>) -> HttpConfig {
    HttpConfig {
        endpoint: url,
        batch_size,
        timeout: Duration::from_secs(10),
        token: token.map(String::from),
    }
}

#[test]
fn batches_keep_input_order() {
    let (url, rx) = serve(vec![Box::new(echo), Box::new(echo)]);
    let hs = headlines(&["Apple hits record", "iPad event", "Antitrust ruling due"]);
    let m = embed_http(&hs, &config(url, 2, None)).unwrap();
    assert_eq!((m.len(), m.dim()), (3, 4));
    assert_eq!(m.ids(), ["10", "11", "12"]);
    for (i, h) in hs.iter().enumerate() {
        assert_eq!(m.row(i)[0], h.title.len() as f32);
        assert_eq!(m.row(i)[1], f32::from(h.title.as_bytes()[0]));
    }
    assert!(!m.is_normalized());
    let first: serde_json::Value = serde_json::from_str(&rx.recv().unwrap().body).unwrap();
    let second: serde_json::Value = serde_json::from_str(&rx.recv().unwrap().body).unwrap();
    assert_eq!(first["texts"].as_array().unwrap().len(), 2);
    assert_eq!(second["texts"][0], "Antitrust ruling due");
}

#[test]
fn bearer_token_is_sent() {
    let (url, rx) = serve(vec![Box::new(echo)]);
    embed_http(&headlines(&["a headline"]), &config(url, 8, Some("s3cret"))).unwrap();
    let req = rx.recv().unwrap();
    assert!(req
        .headers
        .iter()
        .any(|h| h.eq_ignore_ascii_case("authorization: Bearer s3cret")));
}

#[test]
fn row_count_mismatch() {
    let short = |_: &serde_json::Value| (200, r#"{"embeddings": [[1.0, 2.0]]}"#.to_string());
    let (url, _rx) = serve(vec![Box::new(short)]);
    let err = embed_http(&headlines(&["one", "two"]), &config(url, 4, None)).unwrap_err();
    assert_eq!(
        err,
        HttpError::RowCount {
            batch: 0,
            sent: 2,
            received: 1
        }
    );
}

#[test]
fn dimension_mismatch_across_batches() {
    let wide = |_: &serde_json::Value| (200, r#"{"embeddings": [[1.0, 2.0, 3.0]]}"#.to_string());
    let (url, _rx) = serve(vec![Box::new(echo), Box::new(wide)]);
    let err = embed_http(&headlines(&["one", "two"]), &config(url, 1, None)).unwrap_err();
    assert_eq!(
        err,
        HttpError::Dimension {
            batch: 1,
            expected: 4,
            got: 3
        }
    );
}

#[test]
fn error_status_carries_body_excerpt() {
    let fail = |_: &serde_json::Value| (503, format!("model warming up {}", "z".repeat(400)));
    let (url, _rx) = serve(vec![Box::new(fail)]);
    match embed_http(&headlines(&["x y"]), &config(url, 4, None)).unwrap_err() {
        HttpError::Status {
            status, excerpt, ..
        } => {
            assert_eq!(status, 503);
            assert!(excerpt.starts_with("model warming up"));
            assert!(excerpt.len() <= 203);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let cfg = config(format!("http://127.0.0.1:{port}/embed"), 4, None);
    assert!(matches!(
        embed_http(&headlines(&["x"]), &cfg),
        Err(HttpError::Transport { .. })
    ));
}
