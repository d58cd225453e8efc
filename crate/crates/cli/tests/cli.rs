use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn zcmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zcmap"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn exit_code_table() {
    let dir = tempfile::tempdir().unwrap();
    let topo = fixture("ring.graphml");
    let good = fixture("ring-transitive.policy");
    let empty = write_temp(&dir, "empty.policy", "# nothing yet\n");
    let unknown = write_temp(&dir, "unknown.policy", "security Z1 -> Z9 : tcp/22\n");
    let broken = write_temp(&dir, "broken.policy", "security Z1 Z3 tcp/22\n");
    let garbage = write_temp(&dir, "bad.graphml", "<graphml><graph>");
    let lonely = write_temp(
        &dir,
        "lonely.graphml",
        r#"<graphml><key id="k" attr.name="kind"/><graph>
<node id="Z1"><data key="k">zone</data></node>
<node id="Z3"><data key="k">zone</data></node>
</graph></graphml>"#,
    );
    let plain = write_temp(&dir, "plain.policy", "security Z1 -> Z3 : tcp/22\n");
    let cases: [(&[&str], i32); 8] = [
        (&["map", &topo, &good], 0),
        (&["map", &topo, &empty], 0),
        (&["map", &topo, &unknown], 1),
        (&["map", &topo, &broken], 1),
        (&["map", &garbage, &good], 1),
        (&["map", &lonely, &plain], 2),
        (&["map", &topo, "/nonexistent.policy"], 1),
        (&["paths", &topo, &good, "Z1", "Z9"], 1),
    ];
    for (args, code) in cases {
        let out = zcmap(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn empty_policy_gives_empty_map() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_temp(&dir, "empty.policy", "");
    let out = zcmap(&[
        "map",
        "--format",
        "structured",
        &fixture("ring.graphml"),
        &empty,
    ]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["assignments"].as_array().unwrap().len(), 0);
    assert_eq!(doc["format"], "zcmap/map/1");
}

#[test]
fn diagnostics_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_temp(&dir, "unknown.policy", "security Z1 -> Z9 : tcp/22\n");
    let err = stderr(&zcmap(&["map", &fixture("ring.graphml"), &unknown]));
    assert!(err.contains("unknown zone Z9"), "{err}");

    let broken = write_temp(
        &dir,
        "broken.policy",
        "zone Z1 transitive\nsecurity Z1 Z3 tcp/22\n",
    );
    let err = stderr(&zcmap(&["map", &fixture("ring.graphml"), &broken]));
    assert!(err.contains("broken.policy: line 2"), "{err}");

    let cut = write_temp(
        &dir,
        "cut.policy",
        "zone Z2 non-transitive\nzone Z4 non-transitive\nsecurity Z1 -> Z3 : tcp/22\n",
    );
    let out = zcmap(&["map", &fixture("ring.graphml"), &cut]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("security Z1 -> Z3 : tcp/22"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn paths_prints_canonical_sets() {
    let topo = fixture("ring.graphml");
    let open = zcmap(&[
        "paths",
        &topo,
        &fixture("ring-transitive.policy"),
        "Z1",
        "Z3",
    ]);
    assert_eq!(
        stdout(&open),
        "{A12C23, A12D23, B12C23, B12D23, E14F43, E14G43}\n"
    );
    let closed = zcmap(&[
        "paths",
        &topo,
        &fixture("ring-z4-non-transitive.policy"),
        "Z1",
        "Z3",
    ]);
    assert_eq!(stdout(&closed), "{A12C23, A12D23, B12C23, B12D23}\n");
    let same = zcmap(&[
        "paths",
        &topo,
        &fixture("ring-transitive.policy"),
        "Z2",
        "Z2",
    ]);
    assert_eq!(stdout(&same), "{ε}\n");
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = [
        "map",
        "--format",
        "structured",
        &fixture("ring.graphml"),
        &fixture("ring-transitive.policy"),
    ];
    let first = zcmap(&args).stdout;
    for _ in 0..3 {
        assert_eq!(zcmap(&args).stdout, first);
    }
}

#[test]
fn map_output_verifies_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let topo = fixture("ring.graphml");
    let policy = fixture("ring-transitive.policy");
    for (format, convention) in [
        ("text", "ingress-inbound"),
        ("structured", "egress-outbound"),
    ] {
        let file = dir.path().join(format!("map.{format}"));
        let file = file.to_str().unwrap();
        let out = zcmap(&[
            "map",
            "--format",
            format,
            "--direction-convention",
            convention,
            "--out",
            file,
            &topo,
            &policy,
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        let check = zcmap(&["verify", "--format", "structured", &topo, &policy, file]);
        assert_eq!(check.status.code(), Some(0), "{}", stdout(&check));
        let report: Value = serde_json::from_slice(&check.stdout).unwrap();
        assert_eq!(report["totals"]["misallocations"], 0);
        assert_eq!(report["contexts"][0]["counts"]["correct"], 7);
    }
}

#[test]
fn perturbed_and_malformed_assignment_files() {
    let dir = tempfile::tempdir().unwrap();
    let topo = fixture("ring.graphml");
    let policy = fixture("ring-transitive.policy");
    let map = stdout(&zcmap(&["map", &topo, &policy]));
    let perturbed = map.replacen("C\tc-z2\tinbound", "C\tc-z2\toutbound", 1);
    let perturbed = write_temp(&dir, "perturbed.tsv", &perturbed);
    let out = zcmap(&["verify", &topo, &policy, &perturbed]);
    assert_eq!(out.status.code(), Some(3));
    assert!(
        stdout(&out).contains("incorrect-direction=1"),
        "{}",
        stdout(&out)
    );

    let malformed = write_temp(
        &dir,
        "malformed.tsv",
        "A\ta-z1\tsideways\tsecurity Z1 -> Z3 : tcp/22\n",
    );
    let out = zcmap(&["verify", &topo, &policy, &malformed]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("malformed.tsv: line 1"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn whatif_diffs() {
    let topo = fixture("ring.graphml");
    let policy = fixture("ring-transitive.policy");
    let none = zcmap(&["whatif", &topo, &policy]);
    assert_eq!(none.status.code(), Some(0));
    assert_eq!(stdout(&none), "");

    let z4 = zcmap(&["whatif", "--set-non-transitive", "Z4", &topo, &policy]);
    let text = stdout(&z4);
    let removed: Vec<&str> = text.lines().map(|l| &l[..3]).collect();
    assert_eq!(removed, ["- E", "- F", "- G"]);

    let out = zcmap(&[
        "whatif",
        "--format",
        "structured",
        "--drop-device",
        "A",
        "--drop-device",
        "B",
        "--drop-device",
        "E",
        &topo,
        &policy,
    ]);
    let diff: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(diff["newly_unreachable"][0], "security Z1 -> Z3 : tcp/22");

    let bad = zcmap(&["whatif", "--drop-device", "Nope", &topo, &policy]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn firewall_zones_flag_adds_zones() {
    let out = zcmap(&[
        "paths",
        "--firewall-zones",
        &fixture("ring.graphml"),
        &fixture("ring-transitive.policy"),
        "Z1",
        "fw-A",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // Direct A15 plus detours that enter A from zone 2.
    assert!(stdout(&out).ends_with(", A15}\n"), "{}", stdout(&out));
    assert!(stdout(&out).contains("B12A25"), "{}", stdout(&out));
}
