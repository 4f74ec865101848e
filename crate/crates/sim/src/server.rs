//! Socket front ends: newline-delimited JSON over TCP, and the same
//! messages as websocket text frames for browser clients.
//!
//! One thread owns the session. Connection threads only move strings: they
//! forward inbound lines over a channel and write whatever the session
//! thread sends them. Events go to every connected client; a reply to an
//! unparseable line goes only to the client that sent it.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use tungstenite::Message;

use crate::protocol::{parse_command, CommandMessage, ErrorCode, Event, EventMessage};
use crate::session::Session;
use crate::SimError;

const POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pacing {
    /// One tick per millisecond of wall-clock time.
    RealTime,
    /// The clock only moves when a command asks for a later `t_ms`; every
    /// command's events are sent before the next command is read.
    Lockstep,
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub tcp_bind: String,
    pub ws_bind: Option<String>,
    pub pacing: Pacing,
}

enum Inbound {
    Connect { client: u64, outbox: Sender<String> },
    Line { client: u64, text: String },
    Disconnect { client: u64 },
}

pub struct ServerHandle {
    pub tcp_addr: SocketAddr,
    pub ws_addr: Option<SocketAddr>,
    stop: Arc<AtomicBool>,
    session: JoinHandle<Session>,
    acceptors: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    /// Stops accepting, stops the clock and hands back the session.
    pub fn shutdown(self) -> Session {
        self.stop.store(true, Ordering::SeqCst);
        for a in self.acceptors {
            let _ = a.join();
        }
        self.session.join().expect("session thread panicked")
    }

    /// Blocks until the session thread exits.
    pub fn wait(self) -> Session {
        self.session.join().expect("session thread panicked")
    }
}

pub fn start(config: &ServerConfig, session: Session) -> Result<ServerHandle, SimError> {
    let stop = Arc::new(AtomicBool::new(false));
    let ids = Arc::new(AtomicU64::new(1));
    let (tx, rx) = mpsc::channel();

    let tcp = bind(&config.tcp_bind)?;
    let tcp_addr = tcp.local_addr().map_err(|e| SimError::Io(e.to_string()))?;
    info!("ndjson endpoint on {tcp_addr}");
    let mut acceptors = vec![spawn_acceptor(
        tcp,
        tx.clone(),
        stop.clone(),
        ids.clone(),
        serve_tcp,
    )];

    let mut ws_addr = None;
    if let Some(addr) = &config.ws_bind {
        let ws = bind(addr)?;
        let local = ws.local_addr().map_err(|e| SimError::Io(e.to_string()))?;
        info!("websocket endpoint on {local}");
        ws_addr = Some(local);
        acceptors.push(spawn_acceptor(ws, tx.clone(), stop.clone(), ids, serve_ws));
    }
    drop(tx);

    let pacing = config.pacing;
    let loop_stop = stop.clone();
    let session = thread::spawn(move || run_session(session, rx, pacing, loop_stop));
    Ok(ServerHandle {
        tcp_addr,
        ws_addr,
        stop,
        session,
        acceptors,
    })
}

fn bind(addr: &str) -> Result<TcpListener, SimError> {
    let listener =
        TcpListener::bind(addr).map_err(|e| SimError::Io(format!("bind {addr}: {e}")))?;
    listener
        .set_nonblocking(true)
        .map_err(|e| SimError::Io(e.to_string()))?;
    Ok(listener)
}

fn spawn_acceptor(
    listener: TcpListener,
    tx: Sender<Inbound>,
    stop: Arc<AtomicBool>,
    ids: Arc<AtomicU64>,
    serve: fn(TcpStream, u64, Sender<Inbound>, Arc<AtomicBool>),
) -> JoinHandle<()> {
    thread::spawn(move || {
        while !stop.load(Ordering::SeqCst) {
            match listener.accept() {
                Ok((stream, peer)) => {
                    let client = ids.fetch_add(1, Ordering::SeqCst);
                    debug!("client {client} connected from {peer}");
                    if stream.set_nonblocking(false).is_err() {
                        continue;
                    }
                    let _ = stream.set_nodelay(true);
                    let tx = tx.clone();
                    let stop = stop.clone();
                    thread::spawn(move || serve(stream, client, tx, stop));
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(POLL),
                Err(e) => {
                    warn!("accept failed: {e}");
                    thread::sleep(POLL);
                }
            }
        }
    })
}

fn serve_tcp(stream: TcpStream, client: u64, tx: Sender<Inbound>, _stop: Arc<AtomicBool>) {
    let Ok(mut writer) = stream.try_clone() else {
        return;
    };
    let (out_tx, out_rx) = mpsc::channel::<String>();
    if tx
        .send(Inbound::Connect {
            client,
            outbox: out_tx,
        })
        .is_err()
    {
        return;
    }
    thread::spawn(move || {
        for line in out_rx {
            if writer
                .write_all(line.as_bytes())
                .and_then(|_| writer.write_all(b"\n"))
                .and_then(|_| writer.flush())
                .is_err()
            {
                break;
            }
        }
    });
    for line in BufReader::new(stream).lines() {
        let Ok(text) = line else { break };
        if text.trim().is_empty() {
            continue;
        }
        if tx.send(Inbound::Line { client, text }).is_err() {
            break;
        }
    }
    let _ = tx.send(Inbound::Disconnect { client });
}

fn serve_ws(stream: TcpStream, client: u64, tx: Sender<Inbound>, stop: Arc<AtomicBool>) {
    let mut ws = match tungstenite::accept(stream) {
        Ok(ws) => ws,
        Err(e) => {
            debug!("websocket handshake failed: {e}");
            return;
        }
    };
    if ws.get_ref().set_read_timeout(Some(POLL)).is_err() {
        return;
    }
    let (out_tx, out_rx) = mpsc::channel::<String>();
    if tx
        .send(Inbound::Connect {
            client,
            outbox: out_tx,
        })
        .is_err()
    {
        return;
    }
    'session: while !stop.load(Ordering::SeqCst) {
        match ws.read() {
            Ok(Message::Text(text)) => {
                for line in text.lines().filter(|l| !l.trim().is_empty()) {
                    if tx
                        .send(Inbound::Line {
                            client,
                            text: line.to_string(),
                        })
                        .is_err()
                    {
                        break 'session;
                    }
                }
            }
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(_) => break,
        }
        while let Ok(line) = out_rx.try_recv() {
            if ws.send(Message::Text(line)).is_err() {
                break 'session;
            }
        }
    }
    let _ = tx.send(Inbound::Disconnect { client });
}

struct Clients(BTreeMap<u64, Sender<String>>);

impl Clients {
    fn broadcast(&mut self, events: &[EventMessage]) {
        for e in events {
            let line = e.to_line();
            self.0.retain(|_, outbox| outbox.send(line.clone()).is_ok());
        }
    }

    fn reply(&mut self, client: u64, event: &EventMessage) {
        if let Some(outbox) = self.0.get(&client) {
            let _ = outbox.send(event.to_line());
        }
    }
}

/// Handles one inbound message. Returns a parsed command for the caller to
/// schedule, or `None` when nothing more is needed.
fn accept_inbound(msg: Inbound, clients: &mut Clients, clock: u64) -> Option<CommandMessage> {
    match msg {
        Inbound::Connect { client, outbox } => {
            clients.0.insert(client, outbox);
            None
        }
        Inbound::Disconnect { client } => {
            debug!("client {client} disconnected");
            clients.0.remove(&client);
            None
        }
        Inbound::Line { client, text } => match parse_command(&text) {
            Ok(cmd) => Some(cmd),
            Err((seq, message)) => {
                let event = EventMessage {
                    event: Event::Error {
                        code: ErrorCode::Malformed,
                        message,
                    },
                    seq,
                    t_ms: clock,
                };
                clients.reply(client, &event);
                None
            }
        },
    }
}

fn run_session(
    mut session: Session,
    rx: Receiver<Inbound>,
    pacing: Pacing,
    stop: Arc<AtomicBool>,
) -> Session {
    let mut clients = Clients(BTreeMap::new());
    match pacing {
        Pacing::Lockstep => loop {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            match rx.recv_timeout(POLL) {
                Ok(msg) => {
                    if let Some(cmd) = accept_inbound(msg, &mut clients, session.clock()) {
                        let events = session.submit(&cmd);
                        clients.broadcast(&events);
                    }
                }
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => break,
            }
        },
        Pacing::RealTime => {
            let epoch = Instant::now();
            let mut pending: Vec<CommandMessage> = Vec::new();
            while !stop.load(Ordering::SeqCst) {
                while let Ok(msg) = rx.try_recv() {
                    if let Some(cmd) = accept_inbound(msg, &mut clients, session.clock()) {
                        pending.push(cmd);
                    }
                }
                let clock = session.clock();
                let (due, later): (Vec<_>, Vec<_>) =
                    pending.drain(..).partition(|c| c.t_ms <= clock);
                pending = later;
                for cmd in &due {
                    let events = session.submit(cmd);
                    clients.broadcast(&events);
                }
                let next = epoch + Duration::from_millis(session.clock() + 1);
                let now = Instant::now();
                if now >= next {
                    let events = session.tick();
                    clients.broadcast(&events);
                } else {
                    thread::sleep((next - now).min(Duration::from_millis(1)));
                }
            }
        }
    }
    session
}
