//! Drives the UCI client and the external-agent client against small shell
//! scripts standing in for real engines.

use std::io::Write;
use std::os::unix::fs::PermissionsExt;
use std::path::PathBuf;

use sarfa_agents::{open_session, AgentError, ExternalSession, OracleConfig, OracleSession, SearchLimit, UciSession};
use sarfa_chess::Position;
use sarfa_core::QOracle;
use tempfile::TempDir;

fn script(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "#!/bin/sh\n{body}").unwrap();
    drop(f);
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

/// Answers the handshake and reports three lines for any `go`, always the
/// same start-position moves.
const START_ENGINE: &str = r#"
while read -r line; do
  case "$line" in
    uci) echo "id name stub"; echo "uciok" ;;
    isready) echo "readyok" ;;
    go*)
      echo "info string thinking"
      echo "info depth 1 multipv 1 score cp 40 pv e2e4 e7e5"
      echo "info depth 1 multipv 2 score cp 20 pv d2d4"
      echo "info depth 1 multipv 3 score cp 10 pv g1f3"
      echo "info depth 2 multipv 1 score cp 35 pv e2e4 e7e5"
      echo "info depth 2 multipv 2 score cp 30 upperbound pv d2d4"
      echo "info depth 2 multipv 2 score mate 3 pv d2d4"
      echo "info depth 2 multipv 3 score cp -15 pv g1f3"
      echo "bestmove e2e4" ;;
    quit) exit 0 ;;
  esac
done
"#;

fn config(path: PathBuf) -> OracleConfig {
    OracleConfig {
        handshake_timeout_ms: 2_000,
        eval_timeout_ms: 2_000,
        ..OracleConfig::uci(path)
    }
}

#[test]
fn uci_happy_path() {
    let dir = TempDir::new().unwrap();
    let mut session = UciSession::open(&config(script(&dir, "engine", START_ENGINE))).unwrap();
    let q = session.evaluate(&Position::start()).unwrap();
    let actions: Vec<_> = q.actions().collect();
    assert_eq!(actions, ["e2e4", "d2d4", "g1f3"]);
    assert_eq!(q.get("e2e4"), Some(0.35));
    assert_eq!(q.get("g1f3"), Some(-0.15));
    assert!(q.get("d2d4").unwrap() > 15.0, "mate outranks centipawns");
    assert_eq!(q.state_id(), Position::START_FEN);
    // Repeated evaluation gives the same move set.
    let again = session.evaluate(&Position::start()).unwrap();
    assert_eq!(again, q);
}

#[test]
fn uci_truncates_to_multipv() {
    let dir = TempDir::new().unwrap();
    let cfg = OracleConfig { multipv: 2, ..config(script(&dir, "engine", START_ENGINE)) };
    let mut session = UciSession::open(&cfg).unwrap();
    assert_eq!(session.evaluate(&Position::start()).unwrap().len(), 2);
}

#[test]
fn uci_sends_expected_commands() {
    let dir = TempDir::new().unwrap();
    let log = dir.path().join("log.txt");
    let body = format!(
        "while read -r line; do echo \"$line\" >> {log}; case \"$line\" in uci) echo uciok ;; isready) echo readyok ;; \
         go*) echo 'info depth 1 multipv 1 score cp 1 pv e2e4'; echo 'bestmove e2e4' ;; quit) exit 0 ;; esac; done",
        log = log.display()
    );
    let cfg = OracleConfig { multipv: 4, search_limit: SearchLimit::MoveTimeMs(50), ..config(script(&dir, "engine", &body)) };
    let mut session = UciSession::open(&cfg).unwrap();
    session.evaluate(&Position::start()).unwrap();
    drop(session);
    let sent = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = sent.lines().collect();
    assert_eq!(
        lines,
        [
            "uci",
            "setoption name Threads value 1",
            "setoption name MultiPV value 4",
            "isready",
            "ucinewgame",
            "isready",
            &format!("position fen {}", Position::START_FEN),
            "go movetime 50",
            "quit",
        ]
    );
}

#[test]
fn uci_terminal_position() {
    let dir = TempDir::new().unwrap();
    let mut session = UciSession::open(&config(script(&dir, "engine", START_ENGINE))).unwrap();
    let mated = Position::from_fen("rnb1kbnr/pppp1ppp/8/4p3/6Pq/5P2/PPPPP2P/RNBQKBNR w KQkq - 1 3").unwrap();
    assert!(matches!(session.evaluate(&mated), Err(AgentError::NoLegalMoves)));
}

#[test]
fn uci_bad_path() {
    assert!(matches!(
        open_session(&OracleConfig::uci("/definitely/not/here")),
        Err(AgentError::Spawn { .. })
    ));
}

#[test]
fn uci_handshake_timeout() {
    let dir = TempDir::new().unwrap();
    let cfg = OracleConfig { handshake_timeout_ms: 200, ..config(script(&dir, "mute", "sleep 5")) };
    assert!(matches!(UciSession::open(&cfg), Err(AgentError::Timeout(..))));
}

#[test]
fn uci_crash_mid_search() {
    let dir = TempDir::new().unwrap();
    let body = "while read -r line; do case \"$line\" in uci) echo uciok ;; isready) echo readyok ;; go*) exit 1 ;; esac; done";
    let mut session = UciSession::open(&config(script(&dir, "crash", body))).unwrap();
    assert!(matches!(session.evaluate(&Position::start()), Err(AgentError::Crashed)));
}

#[test]
fn uci_garbage_info_and_illegal_moves() {
    let dir = TempDir::new().unwrap();
    let garbage = "while read -r line; do case \"$line\" in uci) echo uciok ;; isready) echo readyok ;; \
                   go*) echo 'info depth 1 score cp oops pv e2e4'; echo 'bestmove e2e4' ;; esac; done";
    let mut s = UciSession::open(&config(script(&dir, "garbage", garbage))).unwrap();
    assert!(matches!(s.evaluate(&Position::start()), Err(AgentError::UnparseableInfo(_))));

    let illegal = "while read -r line; do case \"$line\" in uci) echo uciok ;; isready) echo readyok ;; \
                   go*) echo 'info depth 1 score cp 3 pv e2e5'; echo 'bestmove e2e5' ;; esac; done";
    let mut s = UciSession::open(&config(script(&dir, "illegal", illegal))).unwrap();
    assert!(matches!(s.evaluate(&Position::start()), Err(AgentError::Protocol(_))));

    let silent = "while read -r line; do case \"$line\" in uci) echo uciok ;; isready) echo readyok ;; \
                  go*) echo 'bestmove e2e4' ;; esac; done";
    let mut s = UciSession::open(&config(script(&dir, "silent", silent))).unwrap();
    assert!(matches!(s.evaluate(&Position::start()), Err(AgentError::Protocol(_))));
}

fn external(path: PathBuf) -> OracleConfig {
    OracleConfig { eval_timeout_ms: 2_000, ..OracleConfig::external(path, vec![]) }
}

#[test]
fn external_agent_round_trip() {
    let dir = TempDir::new().unwrap();
    // Echoes the payload length back as the value of `up`.
    let body = r#"while read -r verb payload; do
  n=$(printf '%s' "$payload" | base64 -d | wc -c | tr -d ' ')
  echo "QVALUES up:$n down:0.5"
done"#;
    let session = open_session(&external(script(&dir, "agent", body))).unwrap();
    let OracleSession::External(mut session) = session else { panic!("wrong kind") };
    let q = session.external_evaluate(b"hello").unwrap();
    assert_eq!(q.get("up"), Some(5.0));
    assert_eq!(q.get("down"), Some(0.5));
}

#[test]
fn external_agent_errors() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("empty", "while read -r l; do echo QVALUES; done"),
        ("dup", "while read -r l; do echo 'QVALUES a:1 a:2'; done"),
        ("err", "while read -r l; do echo 'ERR no model'; done"),
    ];
    for (name, body) in cases {
        let mut s = ExternalSession::open(&external(script(&dir, name, body))).unwrap();
        let err = s.external_evaluate(b"x").unwrap_err();
        match name {
            "err" => assert!(matches!(err, AgentError::Remote(ref m) if m == "no model"), "{err}"),
            _ => assert!(matches!(err, AgentError::MalformedReply(_)), "{name}: {err}"),
        }
    }
    let mut dead = ExternalSession::open(&external(script(&dir, "dead", "exit 0"))).unwrap();
    assert!(matches!(
        dead.external_evaluate(b"x"),
        Err(AgentError::Crashed | AgentError::BrokenPipe(_))
    ));
    let slow = OracleConfig { eval_timeout_ms: 200, ..external(script(&dir, "slow", "sleep 5")) };
    let mut slow = ExternalSession::open(&slow).unwrap();
    assert!(matches!(slow.external_evaluate(b"x"), Err(AgentError::Timeout(..))));
}
