// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::thread;

use serde_json::json;

fn hlseval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hlseval"))
        .args(args)
        .env_remove("HLSEVAL_DESIGNS")
        .env_remove("HLSEVAL_ENDPOINT")
        .output()
        .expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn block(name: &str, body: &str) -> String {
    format!("<OUTPUT_CODE name=\"{name}\">\n{body}\n</OUTPUT_CODE>\n")
}

fn write_script(dir: &Path, script: serde_json::Value) -> PathBuf {
    let p = dir.join("script.json");
    fs::write(&p, script.to_string()).unwrap();
    p
}

fn gating_script(dir: &Path) -> PathBuf {
    write_script(
        dir,
        json!({ "per_sample": [
            block("mul64To128.cpp", "void k() {}"),
            "no tags at all",
            block("mul64To128.cpp", "// MOCK:compile=fail"),
            block("mul64To128.cpp", "// MOCK:run=fail"),
        ]}),
    )
}

fn files_under(dir: &Path, out: &mut Vec<PathBuf>) {
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            files_under(&p, out);
        } else {
            out.push(p);
        }
    }
}

#[test]
fn mock_eval_writes_run_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let script = gating_script(tmp.path());
    let out_root = tmp.path().join("runs");
    let args = [
        "eval",
        "gen",
        "--case",
        "df_mul64To128",
        "--mock-script",
        script.to_str().unwrap(),
        "--n",
        "4",
        "--csim-backend",
        "mock",
        "--synth-backend",
        "mock",
        "--out",
        out_root.to_str().unwrap(),
        "--run-id",
        "r1",
        "--jobs",
        "2",
    ];
    let o = hlseval(&args);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let stdout = text(&o.stdout);
    assert!(stdout.contains("| mock | 75.0% |"), "{stdout}");

    let run = out_root.join("r1");
    let snapshot: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("run.json")).unwrap()).unwrap();
    assert_eq!(snapshot["config"]["task"], "gen");
    assert_eq!(snapshot["config"]["template_digests"].as_object().unwrap().len(), 10);
    let trace = fs::read_to_string(run.join("trace.csv")).unwrap();
    assert!(trace.starts_with("# pool_size llm 4\n"));
    assert!(trace.contains("pool,task_id,event,t_seconds\n"));
    assert_eq!(trace.matches(",finished,").count(), 4 + 3 + 2);
    assert!(run.join("report.md").is_file());
    let sample = run.join("df_mul64To128/mock/gen/0");
    for f in ["response.txt", "record.json", "compile.log", "run.log", "synth.log", "files/mul64To128.cpp"] {
        assert!(sample.join(f).is_file(), "missing {f}");
    }

    // Resume leaves finished samples untouched.
    let record = fs::read_to_string(sample.join("record.json")).unwrap();
    let mut resumed = args.to_vec();
    resumed.push("--resume");
    let o = hlseval(&resumed);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert_eq!(fs::read_to_string(sample.join("record.json")).unwrap(), record);

    let o = hlseval(&["report", run.to_str().unwrap(), "--format", "csv", "--k", "2"]);
    assert!(o.status.success());
    let csv = text(&o.stdout);
    assert!(csv.starts_with("task,model,metric,k,rate\n"));
    assert!(csv.contains("gen,mock,parse,1,0.75\n"), "{csv}");
    assert!(csv.contains("gen,mock,run,2,0.5\n"), "{csv}");

    let o = hlseval(&["report", run.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["task"], "gen");
    assert_eq!(v[0]["ks"], json!([1, 4]));

    let o = hlseval(&["report", run.to_str().unwrap(), "--k", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn input_errors_exit_two_and_config_errors_exit_one() {
    let o = hlseval(&["eval", "gen", "--case", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(err.contains("unknown case `nope`") && err.contains("pb_gemm"), "{err}");

    let o = hlseval(&["eval", "edit", "--task", "pipelining"]);
    assert_eq!(o.status.code(), Some(2));

    // Keys only ever come from the environment.
    let o = hlseval(&["eval", "gen", "--api-key", "sk-x"]);
    assert_eq!(o.status.code(), Some(2));

    let o = hlseval(&["eval", "gen", "--jobs-llm", "0", "--csim-backend", "mock"]);
    assert_eq!(o.status.code(), Some(1));

    let o = hlseval(&["eval", "gen", "--csim-backend", "vendor", "--vitis-hls", "/nonexistent/vitis_hls"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("is not a file"));
}

#[test]
fn strict_tags_skips_untagged_cases() {
    let tmp = tempfile::tempdir().unwrap();
    let script = write_script(tmp.path(), json!({ "fallback": "nothing useful" }));
    let o = hlseval(&[
        "eval",
        "edit",
        "--task",
        "tiling",
        "--strict-tags",
        "--mock-script",
        script.to_str().unwrap(),
        "--n",
        "1",
        "--csim-backend",
        "mock",
        "--synth-backend",
        "none",
        "--out",
        tmp.path().join("runs").to_str().unwrap(),
        "--run-id",
        "t",
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let err = text(&o.stderr);
    assert!(err.contains("skipping df_mul64To128"), "{err}");
    let run = tmp.path().join("runs/t");
    assert!(run.join("pb_gemm/mock/tiling/0/record.json").is_file());
    assert!(!run.join("df_mul64To128").exists());
}

/// Serves `count` chat completion requests and returns the raw requests.
fn fake_endpoint(count: usize, reply: String) -> (String, thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        let mut seen = Vec::new();
        for stream in listener.incoming().take(count) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                head.push_str(&line);
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            seen.push(head + &String::from_utf8(body).unwrap());
            let payload = json!({ "choices": [{ "message": { "role": "assistant", "content": reply } }] }).to_string();
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            )
            .unwrap();
        }
        seen
    });
    (url, handle)
}

#[test]
fn remote_model_key_stays_out_of_outputs() {
    let secret = "sk-test-3b1f9c0e7d";
    let tmp = tempfile::tempdir().unwrap();
    let (url, server) = fake_endpoint(2, block("mul64To128.cpp", "void k() {}"));
    let out_root = tmp.path().join("runs");
    let o = Command::new(env!("CARGO_BIN_EXE_hlseval"))
        .args([
            "-v",
            "eval",
            "gen",
            "--case",
            "df_mul64To128",
            "--model",
            "remote-model",
            "--endpoint",
            &url,
            "--api-key-env",
            "HLSEVAL_IT_KEY",
            "--n",
            "2",
            "--csim-backend",
            "mock",
            "--synth-backend",
            "none",
            "--out",
            out_root.to_str().unwrap(),
            "--run-id",
            "remote",
        ])
        .env("HLSEVAL_IT_KEY", secret)
        .env("RUST_LOG", "debug")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", text(&o.stderr));
    let requests = server.join().unwrap();
    assert_eq!(requests.len(), 2);
    assert!(requests.iter().all(|r| r.contains(&format!("Bearer {secret}"))));
    assert!(requests.iter().any(|r| r.to_ascii_lowercase().contains("x-sample-index: 1")));

    assert!(!text(&o.stdout).contains(secret) && !text(&o.stderr).contains(secret));
    let mut files = Vec::new();
    files_under(&out_root, &mut files);
    assert!(files.len() > 5);
    for f in files {
        let content = fs::read(&f).unwrap();
        assert!(!text(&content).contains(secret), "key leaked into {}", f.display());
    }
    let rec: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(out_root.join("remote/df_mul64To128/remote-model/gen/1/record.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(rec["compilable"], true);
}

fn construct_case(dir: &Path) -> (PathBuf, PathBuf, String) {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("designs/df_mul64To128");
    fs::create_dir_all(dir).unwrap();
    for f in ["mul64To128.h", "mul64To128.cpp"] {
        fs::copy(src.join(f), dir.join(f)).unwrap();
    }
    let tb = fs::read_to_string(src.join("mul64To128_tb.cpp")).unwrap();
    (dir.join("mul64To128.h"), dir.join("mul64To128.cpp"), tb)
}

#[test]
fn construct_testbench_gates_promotion_on_the_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    let case = tmp.path().join("case");
    let (h, k, tb) = construct_case(&case);
    let reply = |s: &str| format!("```cpp\n{s}```\n");
    let args = |script: &Path| {
        vec![
            "construct".to_string(),
            "testbench".into(),
            "--src".into(),
            h.to_str().unwrap().into(),
            "--src".into(),
            k.to_str().unwrap().into(),
            "--top".into(),
            "mul64To128".into(),
            "--mock-script".into(),
            script.to_str().unwrap().into(),
            "--promote".into(),
        ]
    };

    let flipped = tb.replace("0x2236D88FE5618CF0ULL", "0x2236D88FE5618CF1ULL");
    let bad = write_script(tmp.path(), json!({ "queue": [reply(&flipped)] }));
    let a = args(&bad);
    let o = hlseval(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stdout).contains("verdict: rejected\ncompile exit: 0\nrun exit: 1"), "{}", text(&o.stdout));
    assert!(text(&o.stderr).contains("FAILED"));
    assert!(!case.join("mul64To128_tb.cpp").exists());
    assert!(case.join(".staging/mul64To128_tb.cpp").is_file());

    let good = write_script(tmp.path(), json!({ "queue": [reply(&tb)] }));
    let a = args(&good);
    let o = hlseval(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert_eq!(fs::read_to_string(case.join("mul64To128_tb.cpp")).unwrap(), tb);

    // A second promotion refuses to clobber without --force.
    let o = hlseval(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(2));
    let mut forced = a.clone();
    forced.push("--force".into());
    let o = hlseval(&forced.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(o.status.success());
}

#[test]
fn construct_hierarchy_reports_none() {
    let tmp = tempfile::tempdir().unwrap();
    let (h, k, _) = construct_case(&tmp.path().join("case"));
    let script = write_script(tmp.path(), json!({ "queue": ["```markdown\n- None\n```"] }));
    let o = hlseval(&[
        "construct",
        "hierarchy",
        "--src",
        h.to_str().unwrap(),
        "--src",
        k.to_str().unwrap(),
        "--top",
        "mul64To128",
        "--mock-script",
        script.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert_eq!(text(&o.stdout), "none\n");
    assert!(tmp.path().join("case/.staging/hierarchy.md").is_file());
}

#[test]
fn cases_lists_bundled_designs() {
    let o = hlseval(&["cases"]);
    assert!(o.status.success());
    let s = text(&o.stdout);
    assert_eq!(s.lines().count(), 3);
    assert!(s.contains("pp4fpga_fir\ttop=fir\tkernels=1"));
}
