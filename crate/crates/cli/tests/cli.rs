use std::path::Path;
use std::process::{Command, Output};

fn r2s(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_r2s")).current_dir(dir).args(args).env_remove("R2S_THREADS").output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = r2s(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

const SMALL: [&str; 6] = ["--naspect", "6", "--nroll", "4", "--nfreq", "8"];

fn frusta(dir: &Path) {
    ok(dir, &["gen-frusta", "--count", "3", "--seed", "4", "--segments", "24", "--out", "fr"]);
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(r2s(p, &["--help"]).status.code(), Some(0));
    assert_eq!(r2s(p, &["bogus"]).status.code(), Some(1));
    assert_eq!(r2s(p, &["simulate", "--out", "x.r2t"]).status.code(), Some(1));
    assert_eq!(r2s(p, &["simulate", "--mesh", "missing.obj", "--out", "x.r2t"]).status.code(), Some(2));
    std::fs::write(p.join("bad.obj"), "v 0 0 0\nf 1 2 3\n").unwrap();
    assert_eq!(r2s(p, &["simulate", "--mesh", "bad.obj", "--out", "x.r2t"]).status.code(), Some(2));
    frusta(p);
    let mut args = vec!["simulate", "--mesh", "fr/frustum_0000.obj", "--out", "a.r2t"];
    args.extend(SMALL);
    ok(p, &args);
    assert_eq!(r2s(p, &["mask", "--response", "a.r2t", "--coverage", "0.9", "--out", "m.r2t"]).status.code(), Some(1));
    assert_eq!(r2s(p, &["plot", "--response", "a.r2t", "--slice", "diag:0", "--out", "x.pgm"]).status.code(), Some(1));
}

#[test]
fn frusta_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    frusta(a.path());
    frusta(b.path());
    for i in 0..3 {
        for ext in ["json", "obj"] {
            let name = format!("fr/frustum_{i:04}.{ext}");
            assert_eq!(read(a.path(), &name), read(b.path(), &name));
        }
    }
    let profile: Vec<[f64; 2]> = serde_json::from_slice(&read(a.path(), "fr/frustum_0001.json")).unwrap();
    assert_eq!(profile[0][0], 0.0);
    assert_eq!(profile.last().unwrap()[0], 0.0);
}

#[test]
fn simulate_mask_noise_plot() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    frusta(p);
    let mut args = vec!["simulate", "--mesh", "fr/frustum_0000.obj", "--out", "a.r2t"];
    args.extend(SMALL);
    ok(p, &args);
    let first = read(p, "a.r2t");
    // 6×4×8 complex f32 values after a 6 + 3×8 byte header
    assert_eq!(first.len(), 30 + 6 * 4 * 8 * 8);
    assert_eq!(&first[..4], b"R2T1");
    assert!(p.join("a.r2t.json").is_file());

    let mut threaded = args.clone();
    threaded[4] = "b.r2t";
    threaded.extend(["--threads", "3"]);
    ok(p, &threaded);
    assert_eq!(read(p, "b.r2t"), first);
    ok(p, &args);
    assert_eq!(read(p, "a.r2t"), first);

    let mut sbr = args.clone();
    sbr[4] = "s.r2t";
    sbr.extend(["--sim", "sbr"]);
    ok(p, &sbr);
    assert_ne!(read(p, "s.r2t"), first);

    let mask = ok(p, &["mask", "--response", "a.r2t", "--coverage", "0.5", "--seed", "7", "--out", "m.r2t"]);
    let v: serde_json::Value = serde_json::from_str(mask.trim()).unwrap();
    assert_eq!(v["coverage"], 0.5);
    let again = ok(p, &["mask", "--response", "a.r2t", "--coverage", "0.5", "--seed", "7", "--out", "m2.r2t"]);
    assert_eq!(mask, again);
    assert_eq!(read(p, "m.r2t"), read(p, "m2.r2t"));

    ok(p, &["noise", "--response", "a.r2t", "--level-db", "-40", "--seed", "1", "--out", "n.r2t"]);
    ok(p, &["noise", "--response", "a.r2t", "--level-db", "-40", "--seed", "1", "--out", "n2.r2t"]);
    assert_eq!(read(p, "n.r2t"), read(p, "n2.r2t"));
    assert_ne!(read(p, "n.r2t"), first);

    ok(p, &["plot", "--response", "m.r2t", "--slice", "roll:1", "--out", "h.pgm"]);
    let img = read(p, "h.pgm");
    let header = b"P5\n8 6\n255\n";
    assert_eq!(&img[..header.len()], header);
    assert_eq!(img.len(), header.len() + 48);
    ok(p, &["plot", "--response", "a.r2t", "--slice", "freq:0", "--out", "f.pgm"]);
    assert!(read(p, "f.pgm").starts_with(b"P5\n4 6\n255\n"));
}

#[test]
fn simulate_centers_from_json() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    std::fs::write(
        p.join("c.json"),
        r#"[{"kind":"point","position":[0,0,0],"amplitude":1.0},{"kind":"point","position":[0,0,0.1],"amplitude":1.0}]"#,
    )
    .unwrap();
    let mut args = vec!["simulate", "--sim", "centers", "--mesh", "c.json", "--out", "c.r2t"];
    args.extend(SMALL);
    ok(p, &args);
    assert!(p.join("c.r2t").is_file());
}

#[test]
fn sdf_round_trip_and_evaluate() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    frusta(p);
    ok(p, &["sdf", "sample", "--mesh", "fr/frustum_0002.obj", "--resolution", "16", "--out", "g.r2t"]);
    assert_eq!(read(p, "g.r2t").len(), 6 + 24 + 16 * 16 * 16 * 8);
    ok(p, &["sdf", "extract", "--grid", "g.r2t", "--out", "g.obj"]);
    ok(p, &["sdf", "extract", "--grid", "g.r2t", "--iso", "-0.02", "--out", "inner.obj"]);

    let mut sim = vec!["simulate", "--mesh", "g.obj", "--no-normalize", "--out", "gt.r2t"];
    sim.extend(["--naspect", "3", "--nroll", "2", "--nfreq", "4"]);
    ok(p, &sim);
    // the response sidecar doubles as a simulation config
    std::fs::copy(p.join("gt.r2t.json"), p.join("sim.json")).unwrap();

    let base = [
        "evaluate", "--gt-mesh", "g.obj", "--samples", "2000", "--voxel-resolution", "24", "--gt-profile",
        "fr/frustum_0002.json", "--gt-response", "gt.r2t", "--sim-config", "sim.json",
    ];
    let mut same = base.to_vec();
    same.extend(["--pred-mesh", "g.obj", "--pred-profile", "fr/frustum_0002.json", "--out", "same.json"]);
    let stdout = ok(p, &same);
    let r: serde_json::Value = serde_json::from_slice(&read(p, "same.json")).unwrap();
    assert_eq!(r, serde_json::from_str::<serde_json::Value>(stdout.trim()).unwrap());
    assert_eq!(r["chamfer_x1e3"], 0.0);
    assert_eq!(r["iou"], 1.0);
    assert_eq!(r["f_score_1pct"], 1.0);
    assert_eq!(r["iou_s"], 1.0);
    assert_eq!(r["match_s"], 0.0);
    assert_eq!(r["iou_r"], 1.0);

    let mut other = base.to_vec();
    other.extend(["--pred-mesh", "inner.obj", "--pred-profile", "fr/frustum_0001.json", "--out", "other.json"]);
    ok(p, &other);
    let o: serde_json::Value = serde_json::from_slice(&read(p, "other.json")).unwrap();
    assert!(o["chamfer_x1e3"].as_f64().unwrap() > 0.0);
    assert!(o["iou"].as_f64().unwrap() < 1.0);
    assert!(o["match_s"].as_f64().unwrap() > 0.0);

    // --gt-response needs --sim-config
    let out = r2s(p, &["evaluate", "--pred-mesh", "g.obj", "--gt-mesh", "g.obj", "--gt-response", "gt.r2t", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_dataset_is_deterministic_across_threads() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["gen-frusta", "--count", "5", "--seed", "9", "--segments", "16", "--out", "fr"]);
    let cfg = r#"{"grid": {"aspects": [0.5, 1.5, 2.5], "rolls": [0.0, 3.0]}, "sweep": {"f_min": 8e9, "f_max": 12e9, "n": 4}, "noise_levels_db": [-30], "seed": 3}"#;
    std::fs::write(p.join("cfg.json"), cfg).unwrap();
    let run = |out: &str, threads: &str| {
        ok(p, &["gen-dataset", "--meshes", "fr", "--config", "cfg.json", "--test-fraction", "0.4", "--out", out, "--threads", threads]);
    };
    run("d1", "1");
    let env = Command::new(env!("CARGO_BIN_EXE_r2s"))
        .current_dir(p)
        .args(["gen-dataset", "--meshes", "fr", "--config", "cfg.json", "--test-fraction", "0.4", "--out", "d2"])
        .env("R2S_THREADS", "4")
        .output()
        .unwrap();
    assert!(env.status.success());
    let manifest = read(p, "d1/manifest.json");
    assert_eq!(manifest, read(p, "d2/manifest.json"));
    for i in 0..5 {
        let f = format!("responses/frustum_{i:04}__n-30.r2t");
        assert_eq!(read(p, &format!("d1/{f}")), read(p, &format!("d2/{f}")));
    }
    let m: serde_json::Value = serde_json::from_slice(&manifest).unwrap();
    let items = m["items"].as_array().unwrap();
    assert_eq!(items.len(), 5);
    assert_eq!(items.iter().filter(|i| i["split"] == "test").count(), 2);
}
