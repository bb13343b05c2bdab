use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn textgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_textgeom"))
        .args(args)
        .env_remove("TEXTGEOM_THREADS")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn lines(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.trim().is_empty()).count()
}

#[test]
fn synth_rasterize_nms_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let scenes = dir.path().join("scenes");
    let o =
        textgeom(&["synth", "--scenario", "random", "--seed", "4", "--count", "3", "--n", "12", "--out", p(&scenes)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let gt = scenes.join("gt");
    assert_eq!(std::fs::read_dir(&gt).unwrap().count(), 3);

    let inst = dir.path().join("inst.jsonl");
    let masks = dir.path().join("ppm");
    let o = textgeom(&[
        "rasterize",
        "--gt-format",
        "icdar15",
        "--in",
        p(&gt),
        "--out",
        p(&inst),
        "--dump-masks",
        p(&masks),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(lines(&inst), 36);
    let ppm = std::fs::read(masks.join("random_4.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n"));

    let kept = dir.path().join("kept.jsonl");
    let o = textgeom(&["nms", "--mode", "mask", "--in", p(&inst), "--out", p(&kept)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(lines(&kept), 36);
    let first: Value = serde_json::from_str(std::fs::read_to_string(&kept).unwrap().lines().next().unwrap()).unwrap();
    assert!(first["quad"].is_array());

    for mode in ["box", "mask"] {
        let report = dir.path().join(format!("report_{mode}.json"));
        let csv = dir.path().join(format!("per_image_{mode}.csv"));
        let o = textgeom(&[
            "eval",
            "--mode",
            mode,
            "--iou",
            "0.5",
            "--gt",
            p(&gt),
            "--det",
            p(&kept),
            "--report",
            p(&report),
            "--per-image-csv",
            p(&csv),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(doc["mode"], mode);
        assert_eq!(doc["corpus"]["hmean"], 1.0);
        assert_eq!(doc["images"].as_array().unwrap().len(), 3);
        assert_eq!(lines(&csv), 4);
        let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(summary["hmean"], 1.0);
    }
}

#[test]
fn eval_of_jitter_free_scene_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = textgeom(&["synth", "--scenario", "random", "--seed", "1", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = dir.path().join("r.json");
    let o = textgeom(&[
        "eval",
        "--gt",
        p(&dir.path().join("gt")),
        "--det",
        p(&dir.path().join("dets.jsonl")),
        "--report",
        p(&report),
        "--pretty",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("TOTAL"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["corpus"]["hmean"], 1.0);
}

#[test]
fn mask_nms_keeps_both_inclined_instances() {
    let dir = tempfile::tempdir().unwrap();
    let o = textgeom(&["synth", "--scenario", "inclined_pair", "--seed", "2", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dets = dir.path().join("dets.jsonl");
    let out = dir.path().join("out.jsonl");
    let o = textgeom(&["nms", "--mode", "mask", "--threshold", "0.5", "--in", p(&dets), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(lines(&out), 2);
    let o = textgeom(&["nms", "--mode", "standard", "--vote", "--in", p(&dets), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(lines(&out), 1);
}

#[test]
fn missing_gt_dir_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let det = dir.path().join("d.jsonl");
    std::fs::write(&det, "").unwrap();
    let missing = dir.path().join("missing");
    let o = textgeom(&["eval", "--gt", p(&missing), "--det", p(&det), "--report", p(&dir.path().join("r.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(p(&missing)));
}

#[test]
fn malformed_detections_report_line() {
    let dir = tempfile::tempdir().unwrap();
    let det = dir.path().join("d.jsonl");
    let good = r#"{"image_id":"a","score":0.5,"mask":{"x":0,"y":0,"w":1,"h":1,"rle":[0,1]},"quad":null}"#;
    std::fs::write(&det, format!("{good}\n{good}\n{{not json\n")).unwrap();
    let o = textgeom(&["nms", "--in", p(&det), "--out", p(&dir.path().join("o.jsonl"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains(p(&det)), "{err}");
}

#[test]
fn malformed_gt_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("gt_x.txt"), "0,0,10,0,10,10,0,10,ok\n1,2,3\n").unwrap();
    let o =
        textgeom(&["rasterize", "--gt-format", "icdar15", "--in", p(dir.path()), "--out", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("gt_x.txt") && err.contains("line 2"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(textgeom(&["eval", "--bogus"]).status.code(), Some(1));
    assert_eq!(textgeom(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(textgeom(&["nms", "--threshold", "1.5", "--in", "a", "--out", "b"]).status.code(), Some(1));
    assert_eq!(textgeom(&["anchors", "--width", "10"]).status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_textgeom"))
        .args(["anchors", "--width", "10", "--height", "10"])
        .env("TEXTGEOM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_exits_zero_everywhere() {
    for sub in ["rasterize", "nms", "eval", "anchors", "synth", "bench"] {
        let o = textgeom(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
    }
    assert_eq!(textgeom(&["--help"]).status.code(), Some(0));
}

#[test]
fn anchors_dump_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.jsonl");
    let o = textgeom(&["anchors", "--width", "100", "--height", "40", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    // 7 columns × 3 rows × 28 shapes
    assert_eq!(lines(&out), 7 * 3 * 28);
    let last: Value = serde_json::from_str(std::fs::read_to_string(&out).unwrap().lines().last().unwrap()).unwrap();
    assert_eq!((last["row"].as_u64(), last["col"].as_u64(), last["k"].as_u64()), (Some(2), Some(6), Some(27)));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let scenes = dir.path().join("s");
    textgeom(&["synth", "--scenario", "random", "--jitter", "2", "--count", "4", "--out", p(&scenes)]);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("n{threads}.jsonl"));
        let o =
            textgeom(&["--threads", threads, "nms", "--vote", "--in", p(&scenes.join("dets.jsonl")), "--out", p(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn bench_prints_rate() {
    for op in ["nms", "mask_nms", "rasterize"] {
        let o = textgeom(&["bench", "--op", op, "--n", "50", "--iters", "1"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["op"], op);
        assert!(v["ops_per_sec"].as_f64().unwrap() > 0.0);
    }
}
