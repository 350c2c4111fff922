use std::path::Path;
use std::process::{Command, Output};

fn switchbf(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_switchbf")).args(args).current_dir(dir).output().unwrap()
}

const SMALL: &str = "trials = 2\nsnr_db_list = [0.0, 10.0]\nmethods = [\"UOP\", \"SHD-QRQU\", \"SHD-QRQU-PC\"]\n\
connectivity = \"interleaved:2\"\n[channel]\nn_clusters = 2\nn_rays = 3\n\
[channel.tx_geometry]\nn_y = 4\nn_z = 4\nspacing = 0.5\nsector_azimuth_halfwidth = 0.5\n\
sector_elevation_halfwidth = 0.25\nomni = false\n";

#[test]
fn sweep_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    let out = switchbf(
        &["sweep", "--config", "small.toml", "--out", "records.csv", "--summary", "summary.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert!(records.starts_with("method,"));
    // 2 trials x 2 SNRs x 3 methods
    assert_eq!(records.lines().count(), 1 + 12);
    for input in ["records.csv", "summary.csv"] {
        let out = switchbf(&["plot", "--input", input, "--out", "se.svg"], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let svg = std::fs::read_to_string(dir.path().join("se.svg")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
    }
}

#[test]
fn design_writes_json_and_dumps_the_channel() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    let out = switchbf(
        &["design", "--config", "small.toml", "--method", "SHD-NM", "--dump-channel", "h.txt", "--out", "d.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert_eq!(json["method"], "SHD-NM");
    assert!(json["report"]["mutual_information"].as_f64().unwrap() > 0.0);
    // designing again from the dump reproduces the result
    let again = switchbf(&["design", "--config", "small.toml", "--channel", "h.txt", "--out", "e.json"], dir.path());
    assert!(again.status.success());
    let json2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(json["report"]["mutual_information"], json2["report"]["mutual_information"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "trails = 3\n").unwrap();
    assert_eq!(switchbf(&["sweep", "--config", "bad.toml"], dir.path()).status.code(), Some(2));
    // every chain reaches only 3 of 8 antennas while each antenna sits on one chain
    std::fs::write(dir.path().join("g.txt"), "CONNSPEC1 8 2 4 1\n1 0\n1 0\n1 0\n0 0\n0 1\n0 1\n0 1\n0 1\n").unwrap();
    let out = switchbf(&["validate-spec", "g.txt"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stdout.is_empty());
}
