use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blaschke-forge"))
}

const SHIFT: &str = r#"{"kind":"shift","dim":128}"#;
const DISC: &str = r#"{"shape":"disc","center":[0,0],"radius":0.9}"#;

#[test]
fn build_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let frame = dir.path().join("frame.json");
    let cert = dir.path().join("cert.json");
    let st = bin()
        .args(["build-diag", "--op", SHIFT, "--region", DISC, "--targets", "[[0.3, 0.2]]", "--steps", "12"])
        .arg("--out")
        .arg(&frame)
        .arg("--cert")
        .arg(&cert)
        .status()
        .unwrap();
    assert!(st.success());
    let out = bin().args(["verify", "--op", SHIFT]).arg("--frame").arg(&frame).arg("--cert").arg(&cert).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn pinch_plan_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let op = r#"{"kind":"shift","dim":1024}"#;
    let st = bin().args(["pinch", "--op", op, "--blocks", "[[[[0,0]]]]"]).arg("--out").arg(&plan).status().unwrap();
    assert!(st.success());
    let st = bin().args(["verify", "--op", op]).arg("--plan").arg(&plan).status().unwrap();
    assert!(st.success());
}

#[test]
fn exit_codes() {
    let ok = bin().args(["check", "--kind", "kadison", "--seq", "[0.75, 0.25, 0.0]"]).status().unwrap();
    assert_eq!(ok.code(), Some(0));
    let neg = bin().args(["check", "--kind", "kadison", "--seq", "[0.75, 0.3333333333333333, 0.0]"]).status().unwrap();
    assert_eq!(neg.code(), Some(1));
    let bad = bin().args(["numrange", "--op", "{not json"]).status().unwrap();
    assert_eq!(bad.code(), Some(3));
}
