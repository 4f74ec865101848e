use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::time::Duration;

use dactyl_sim::protocol::EventMessage;
use dactyl_sim::scenario::parse_scenario;
use dactyl_sim::server::{start, Pacing, ServerConfig, ServerHandle};
use dactyl_sim::{default_session, Event, SimConfig};

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn connect(handle: &ServerHandle) -> Self {
        let stream = TcpStream::connect(handle.tcp_addr).unwrap();
        stream
            .set_read_timeout(Some(Duration::from_secs(10)))
            .unwrap();
        let writer = stream.try_clone().unwrap();
        let client = Self {
            reader: BufReader::new(stream),
            writer,
        };
        // The connection is registered asynchronously; give it a moment so
        // broadcasts sent right after connecting are not missed.
        std::thread::sleep(Duration::from_millis(50));
        client
    }

    fn send(&mut self, line: &str) {
        self.writer.write_all(line.as_bytes()).unwrap();
        self.writer.write_all(b"\n").unwrap();
    }

    fn recv(&mut self) -> String {
        let mut line = String::new();
        self.reader
            .read_line(&mut line)
            .expect("line before timeout");
        assert!(line.ends_with('\n'));
        line.trim_end().to_string()
    }

    fn recv_event(&mut self) -> EventMessage {
        serde_json::from_str(&self.recv()).unwrap()
    }
}

fn lockstep() -> ServerHandle {
    let config = ServerConfig {
        tcp_bind: "127.0.0.1:0".into(),
        ws_bind: Some("127.0.0.1:0".into()),
        pacing: Pacing::Lockstep,
    };
    start(&config, default_session(SimConfig::default()).unwrap()).unwrap()
}

fn repo_file(rel: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn query_is_answered_and_broadcast() {
    let handle = lockstep();
    let mut a = Client::connect(&handle);
    let mut b = Client::connect(&handle);
    a.send(r#"{"type":"Query","seq":5,"t_ms":0}"#);
    let from_a = a.recv();
    let from_b = b.recv();
    assert_eq!(from_a, from_b);
    let event: EventMessage = serde_json::from_str(&from_a).unwrap();
    assert_eq!(event.seq, 5);
    assert!(matches!(event.event, Event::StateSnapshot(_)));
    handle.shutdown();
}

#[test]
fn malformed_line_is_reported_to_sender_only() {
    let handle = lockstep();
    let mut a = Client::connect(&handle);
    let mut b = Client::connect(&handle);
    a.send(r#"{"type":"Teleport","seq":3}"#);
    let reply = a.recv_event();
    assert_eq!(reply.seq, 3);
    assert!(matches!(
        reply.event,
        Event::Error {
            code: dactyl_sim::ErrorCode::Malformed,
            ..
        }
    ));
    a.send("garbage");
    assert_eq!(a.recv_event().seq, 0);

    // The connection survives, and b never saw the errors: its next line is
    // the answer to its own query.
    b.send(r#"{"type":"Query","seq":4}"#);
    assert_eq!(b.recv_event().seq, 4);
    assert_eq!(a.recv_event().seq, 4);
    handle.shutdown();
}

#[test]
fn command_events_reach_every_client() {
    let handle = lockstep();
    let mut a = Client::connect(&handle);
    let mut b = Client::connect(&handle);
    a.send(r#"{"type":"SetJointTarget","joint":12,"target_rad":0.4,"seq":1,"t_ms":0}"#);
    b.send(r#"{"type":"Query","seq":2,"t_ms":2000}"#);
    let mut seen_a = Vec::new();
    loop {
        let line = a.recv();
        let done = line.contains(r#""seq":2"#);
        seen_a.push(line);
        if done {
            break;
        }
    }
    let seen_b: Vec<String> = (0..seen_a.len()).map(|_| b.recv()).collect();
    assert_eq!(seen_a, seen_b);
    assert!(seen_a
        .iter()
        .any(|l| l.contains("TrajectoryCompleted") && l.contains(r#""seq":1"#)));
    handle.shutdown();
}

#[test]
fn websocket_carries_identical_bytes() {
    let handle = lockstep();
    let url = format!("ws://{}", handle.ws_addr.unwrap());
    let (mut ws, _) = tungstenite::connect(url).unwrap();
    let mut tcp = Client::connect(&handle);

    ws.send(tungstenite::Message::Text(
        r#"{"type":"Query","seq":1,"t_ms":40}"#.into(),
    ))
    .unwrap();
    let tcp_lines: Vec<String> = (0..3).map(|_| tcp.recv()).collect();
    let mut ws_lines = Vec::new();
    while ws_lines.len() < 3 {
        if let tungstenite::Message::Text(t) = ws.read().unwrap() {
            ws_lines.push(t.to_string());
        }
    }
    // Two periodic snapshots on the way to t = 40 ms, then the answer.
    assert_eq!(tcp_lines, ws_lines);
    assert!(ws_lines[2].contains(r#""seq":1"#));

    ws.send(tungstenite::Message::Text("{".into())).unwrap();
    loop {
        if let tungstenite::Message::Text(t) = ws.read().unwrap() {
            assert!(t.contains("malformed"));
            break;
        }
    }
    handle.shutdown();
}

#[test]
fn scenario_through_socket_matches_direct_replay() {
    let config: SimConfig = toml::from_str(&repo_file("scenarios/workbench.toml")).unwrap();
    let commands = parse_scenario(&repo_file("scenarios/dual_leg.jsonl")).unwrap();

    let mut direct = default_session(config.clone()).unwrap();
    let mut expected = Vec::new();
    for cmd in &commands {
        expected.extend(direct.submit(cmd).iter().map(EventMessage::to_line));
    }

    let server = ServerConfig {
        tcp_bind: "127.0.0.1:0".into(),
        ws_bind: None,
        pacing: Pacing::Lockstep,
    };
    let handle = start(&server, default_session(config).unwrap()).unwrap();
    let mut client = Client::connect(&handle);
    for cmd in &commands {
        client.send(&cmd.to_line());
    }
    let received: Vec<String> = (0..expected.len()).map(|_| client.recv()).collect();
    assert_eq!(received, expected);
    let session = handle.shutdown();
    assert_eq!(session.sim().snapshot(), direct.sim().snapshot());
}

#[test]
fn real_time_pacing_streams_telemetry() {
    let config = ServerConfig {
        tcp_bind: "127.0.0.1:0".into(),
        ws_bind: None,
        pacing: Pacing::RealTime,
    };
    let handle = start(&config, default_session(SimConfig::default()).unwrap()).unwrap();
    let mut client = Client::connect(&handle);
    let mut periodic = 0;
    while periodic < 3 {
        let e = client.recv_event();
        if e.seq == 0 && matches!(e.event, Event::StateSnapshot(_)) {
            assert_eq!(e.t_ms % 20, 0);
            periodic += 1;
        }
    }
    client.send(r#"{"type":"Query","seq":9}"#);
    loop {
        let e = client.recv_event();
        if e.seq == 9 {
            assert!(matches!(e.event, Event::StateSnapshot(_)));
            break;
        }
    }
    let session = handle.shutdown();
    assert!(session.clock() >= 60);
}
