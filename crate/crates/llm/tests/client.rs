use std::time::Duration;

use arena_llm::{ChatClient, ChatMessage, ChatRequest, EndpointConfig, HttpChatClient, MockReply, MockServer, TransportError};

fn request() -> ChatRequest {
    ChatRequest {
        model: "mock-model".into(),
        messages: vec![ChatMessage::user("pick C or D")],
        temperature: 0.0,
    }
}

fn client(server: &MockServer, timeout: Duration) -> HttpChatClient {
    let mut cfg = EndpointConfig::new(server.base_url(), "mock-model");
    cfg.api_key = Some("secret-key".into());
    cfg.timeout = timeout;
    HttpChatClient::new(cfg).unwrap()
}

#[test]
fn round_trip() {
    let server = MockServer::content("C").unwrap();
    let resp = client(&server, Duration::from_secs(5)).chat(&request()).unwrap();
    assert_eq!(resp.content, "C");
    assert_eq!(resp.usage.prompt_tokens, 10);
    assert_eq!(server.served(), 1);
    let body: serde_json::Value = serde_json::from_str(&server.bodies()[0]).unwrap();
    assert_eq!(body["model"], "mock-model");
    assert_eq!(body["messages"][0]["role"], "user");
    assert_eq!(body["messages"][0]["content"], "pick C or D");
    assert_eq!(body["temperature"], 0.0);
}

#[test]
fn error_status_is_a_transport_error() {
    let server = MockServer::start(vec![MockReply::Status(500)]).unwrap();
    let err = client(&server, Duration::from_secs(5)).chat(&request()).unwrap_err();
    assert!(matches!(err, TransportError::Status { status: 500, .. }), "{err:?}");
}

#[test]
fn slow_server_times_out() {
    let server = MockServer::start(vec![MockReply::Slow(Duration::from_millis(1500), "C".into())]).unwrap();
    let err = client(&server, Duration::from_millis(200)).chat(&request()).unwrap_err();
    assert_eq!(err, TransportError::Timeout);
}

#[test]
fn malformed_body_is_reported() {
    let server = MockServer::start(vec![MockReply::Malformed]).unwrap();
    let err = client(&server, Duration::from_secs(5)).chat(&request()).unwrap_err();
    assert!(matches!(err, TransportError::Malformed(_)), "{err:?}");
}

#[test]
fn unreachable_endpoint_is_a_connect_error() {
    let addr = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap()
    };
    let mut c = HttpChatClient::new(EndpointConfig::new(format!("http://{addr}"), "m")).unwrap();
    assert!(matches!(c.chat(&request()), Err(TransportError::Connect(_))));
}

#[test]
fn replies_follow_the_sequence() {
    let server = MockServer::start(vec![
        MockReply::Status(503),
        MockReply::Content("first".into()),
        MockReply::Content("again".into()),
    ])
    .unwrap();
    let mut c = client(&server, Duration::from_secs(5));
    assert!(c.chat(&request()).is_err());
    assert_eq!(c.chat(&request()).unwrap().content, "first");
    assert_eq!(c.chat(&request()).unwrap().content, "again");
    assert_eq!(c.chat(&request()).unwrap().content, "again");
    assert_eq!(server.served(), 4);
}

#[test]
fn debug_output_hides_the_key() {
    let mut cfg = EndpointConfig::new("http://localhost:1", "m");
    cfg.api_key = Some("sk-very-secret".into());
    let shown = format!("{cfg:?}");
    assert!(!shown.contains("sk-very-secret"));
    assert!(shown.contains("redacted"));
}

#[test]
fn explicit_values_beat_the_environment() {
    let cfg = EndpointConfig::from_env(Some("http://a".into()), Some("k".into()), Some("m".into())).unwrap();
    assert_eq!(cfg.base_url, "http://a");
    assert_eq!(cfg.model, "m");
    assert_eq!(cfg.api_key.as_deref(), Some("k"));
}
