//! The `silence` binary: output formats, exit codes, scenario lookup and
//! two-process links over UDP and a capture file.

use std::io::Write;
use std::net::{TcpListener, UdpSocket};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_silence"));
    c.current_dir(repo_root()).env_remove("SILENCE_SCENARIO_DIR");
    c
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn modes_table_and_csv() {
    let o = run(&["modes"]);
    assert_eq!(o.status.code(), Some(0));
    let table = stdout(&o);
    assert_eq!(table.lines().count(), 10);
    assert!(table.lines().nth(1).unwrap().contains("11667"));

    let o = run(&["modes", "--csv"]);
    let csv = stdout(&o);
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["id", "modulation", "clock_hz", "rll", "rs", "cc", "rate_bps"]);
    let rates: Vec<&str> = rows[1..].iter().map(|r| r[6]).collect();
    assert_eq!(rates, ["11667", "24444", "48889", "73333", "100000", "35556", "71111", "124444", "266667"]);
    assert!(rows[1..6].iter().all(|r| r[1] == "OOK" && r[3] == "Manchester"));
    assert!(rows[6..].iter().all(|r| r[1] == "VPPM" && r[3] == "4B6B"));
}

#[test]
fn exit_codes() {
    let usage = run(&["modes", "--bogus"]);
    assert_eq!(usage.status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));

    let config = run(&["perscan", "--mode", "9", "--distances", "1"]);
    assert_eq!(config.status.code(), Some(3));
    assert!(stderr(&config).contains("mode"));
    assert_eq!(run(&["tx", "--sps", "3", "--duration", "0"]).status.code(), Some(3));
    assert_eq!(run(&["stream", "--in", "Cargo.toml", "--rate", "0"]).status.code(), Some(3));

    let missing = run(&["tx", "--scenario", "no-such-scenario", "--duration", "0"]);
    assert_eq!(missing.status.code(), Some(4));
    assert!(stderr(&missing).contains("no-such-scenario"));

    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let busy = run(&["serve", "--bind", &addr, "--duration", "1"]);
    assert_eq!(busy.status.code(), Some(5), "{}", stderr(&busy));
}

#[test]
fn help_lists_exit_codes() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let h = stdout(&o);
    for line in ["0  success", "2  usage error", "3  invalid configuration", "4  scenario file not found", "5  transport or bind failure"] {
        assert!(h.contains(line), "{line}");
    }
    for sub in ["modes", "tx", "rx", "chat", "stream", "perscan", "serve"] {
        assert!(h.contains(sub), "{sub}");
    }
}

#[test]
fn scenario_dir_lookup_and_perscan_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bench"), "mode = 0\nsps = 2\nnoise_std_a = 7e-8\nseed = 3\n").unwrap();
    // not found from ./scenarios alone
    assert_eq!(run(&["perscan", "--scenario", "bench", "--mode", "0", "--distances", "1", "--frames", "5"]).status.code(), Some(4));

    let out = dir.path().join("scan.csv");
    let o = bin()
        .env("SILENCE_SCENARIO_DIR", dir.path())
        .args(["perscan", "--scenario", "bench", "--mode", "0", "--distances", "2,12", "--frames", "60", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["distance_m", "frames", "ok", "hdr_fail", "crc_fail", "lost", "per", "goodput_bps", "snr_db"]);
    assert_eq!(rows.len(), 3);
    for r in &rows[1..] {
        let n: [u64; 5] = std::array::from_fn(|i| r[1 + i].parse().unwrap());
        assert_eq!(n[0], 60);
        assert_eq!(n[1] + n[2] + n[3] + n[4], n[0], "outcomes partition the frames: {r:?}");
    }
    assert_eq!(rows[1][6].parse::<f64>().unwrap(), 0.0);
    assert!(rows[2][6].parse::<f64>().unwrap() > 0.9, "12 m is far past the edge");

    // shipped scenarios resolve from ./scenarios
    let o = run(&["perscan", "--scenario", "text-8m", "--mode", "0", "--distances", "8", "--frames", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("8,20,20,"));
}

fn free_udp_port() -> String {
    let s = UdpSocket::bind("127.0.0.1:0").unwrap();
    s.local_addr().unwrap().to_string()
}

/// Last stderr line of a node is its final stats JSON.
fn final_stats(o: &Output) -> serde_json::Value {
    let err = stderr(o);
    serde_json::from_str(err.lines().last().unwrap_or("")).unwrap_or_else(|_| panic!("stats line in {err}"))
}

#[test]
fn udp_chat_between_processes() {
    let addr = free_udp_port();
    let medium = format!("udp:{addr}");
    let common = ["--mode", "4", "--sps", "2", "--medium", &medium];
    let rx = bin().arg("rx").args(common).args(["--duration", "4"]).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    std::thread::sleep(Duration::from_millis(500));

    let mut tx = bin().arg("tx").args(common).args(["--duration", "2"]).stdin(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    let lines = ["first line", "second line", "ünïcödé third"];
    let mut stdin = tx.stdin.take().unwrap();
    for l in lines {
        writeln!(stdin, "{l}").unwrap();
    }
    drop(stdin);

    let t0 = Instant::now();
    let tx = tx.wait_with_output().unwrap();
    assert_eq!(tx.status.code(), Some(0), "{}", stderr(&tx));
    assert!(t0.elapsed() < Duration::from_secs(4), "--duration bounds the node after stdin EOF");
    let tx_stats = final_stats(&tx);
    assert!(tx_stats["frames_tx"].as_u64().unwrap() >= 3);
    assert!(tx_stats["per"].is_null(), "a tx-only node cannot observe outcomes");

    let rx = rx.wait_with_output().unwrap();
    assert_eq!(rx.status.code(), Some(0), "{}", stderr(&rx));
    let got: Vec<String> = stdout(&rx).lines().map(String::from).collect();
    assert_eq!(got, ["[0] first line", "[1] second line", "[2] ünïcödé third"]);
    let rx_stats = final_stats(&rx);
    assert_eq!(rx_stats["frames_ok"], rx_stats["frames_tx"]);
    assert_eq!(rx_stats["per"], 0.0);
}

#[test]
fn stream_through_capture_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.bin");
    let data: Vec<u8> = (0..5000u32).map(|i| (i * 7 + i / 251) as u8).collect();
    std::fs::write(&input, &data).unwrap();
    let capture = dir.path().join("air.slnc");
    let medium = format!("file:{}", capture.display());

    let o = bin().args(["stream", "--in"]).arg(&input).args(["--rate", "200000", "--mode", "8", "--sps", "2", "--medium", &medium]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(final_stats(&o)["frames_tx"], 5, "5000 bytes in 1023-byte frames");

    let out = dir.path().join("out.bin");
    let o = bin().args(["rx", "--mode", "8", "--sps", "2", "--medium", &medium, "--duration", "2", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read(&out).unwrap(), data);
    assert_eq!(final_stats(&o)["frames_ok"], 5);
}
