// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use hlseval::case::{case_to_design, load_all, Design};
use hlseval::toolchain::{LocalCompiler, ToolchainBackend};

fn designs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("designs")
}

#[test]
fn every_bundled_reference_passes_local_csim() {
    let tmp = tempfile::tempdir().unwrap();
    let backend = ToolchainBackend::LocalCompiler(LocalCompiler::default());
    let cases = load_all(&designs()).unwrap();
    assert!(cases.len() >= 3);
    for case in cases {
        let dest = tmp.path().join(&case.name);
        let design = case_to_design(&case, &Default::default(), &dest.join("design")).unwrap();
        let out = backend.csim(&design, &dest.join("work")).unwrap();
        assert!(out.compile.succeeded(), "{}: {}", case.name, out.compile.stderr);
        let run = out.run.unwrap();
        assert_eq!(run.return_code, 0, "{}: {}{}", case.name, run.stdout, run.stderr);
    }
}

#[test]
fn design_from_path_round_trips_through_csim() {
    let tmp = tempfile::tempdir().unwrap();
    let design = Design::from_path(&designs().join("pp4fpga_fir")).unwrap();
    assert!(design.data_files().any(|p| p.ends_with("fir_input.dat")));
    let out = ToolchainBackend::LocalCompiler(LocalCompiler::default())
        .csim(&design, tmp.path())
        .unwrap();
    assert_eq!(out.run.map(|r| r.return_code), Some(0));
}

#[cfg(unix)]
mod unix {
    use std::fs;
    use std::os::unix::fs::PermissionsExt;
    use std::path::{Path, PathBuf};
    use std::time::Duration;

    use hlseval::case::Design;
    use hlseval::toolchain::{LocalCompiler, Timeouts, ToolchainBackend, VendorHls};
    use hlseval_core::synth_report::parse_synth_report;

    fn fixture() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/gemm_csynth.rpt")
    }

    fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, format!("#!/bin/sh\n{body}")).unwrap();
        fs::set_permissions(&p, fs::Permissions::from_mode(0o755)).unwrap();
        p
    }

    fn tiny_design(dir: &Path) -> Design {
        fs::create_dir_all(dir).unwrap();
        fs::write(dir.join("gemm.h"), "void gemm();\n").unwrap();
        fs::write(dir.join("gemm.cpp"), "void gemm() {}\n").unwrap();
        fs::write(dir.join("gemm_tb.cpp"), "int main() { return 0; }\n").unwrap();
        Design {
            design_dir: dir.to_path_buf(),
            source_files: vec!["gemm.h".into(), "gemm.cpp".into()],
            not_source_files: vec!["gemm_tb.cpp".into()],
            top_name: "gemm".into(),
        }
    }

    #[test]
    fn fixture_report_parses() {
        let r = parse_synth_report(&fs::read_to_string(fixture()).unwrap());
        assert_eq!(r.latency_cycles, Some(34817));
        assert_eq!(r.resources["LUT"], 403);
        assert_eq!(r.resources["FF"], 307);
        assert_eq!(r.resources["DSP"], 3);
        assert_eq!(r.resources["BRAM"], 0);
    }

    #[test]
    fn vendor_synth_reads_the_report_it_leaves_behind() {
        let tmp = tempfile::tempdir().unwrap();
        let tool = script(
            tmp.path(),
            "vitis_hls",
            &format!(
                "mkdir -p proj/solution1/syn/report\ncp '{}' proj/solution1/syn/report/gemm_csynth.rpt\n",
                fixture().display()
            ),
        );
        let design = tiny_design(&tmp.path().join("d"));
        let out = ToolchainBackend::VendorHls(VendorHls::new(tool))
            .synth(&design, &tmp.path().join("w"))
            .unwrap();
        assert!(out.exec.succeeded());
        assert_eq!(out.report.unwrap().latency_cycles, Some(34817));
    }

    #[test]
    fn vendor_synth_failure_has_no_report() {
        let tmp = tempfile::tempdir().unwrap();
        let tool = script(tmp.path(), "vitis_hls", "echo 'ERROR: [SYNCHK 200-61] unsupported' >&2\nexit 1\n");
        let design = tiny_design(&tmp.path().join("d"));
        let out = ToolchainBackend::VendorHls(VendorHls::new(tool))
            .synth(&design, &tmp.path().join("w"))
            .unwrap();
        assert_eq!(out.exec.return_code, 1);
        assert!(out.exec.stderr.contains("SYNCHK"));
        assert!(out.report.is_none());
    }

    #[test]
    fn hung_compiler_is_killed_at_the_timeout() {
        let tmp = tempfile::tempdir().unwrap();
        let cxx = script(tmp.path(), "slow-cxx", "sleep 30\n");
        let backend = ToolchainBackend::LocalCompiler(LocalCompiler {
            cxx,
            timeouts: Timeouts {
                compile: Duration::from_millis(300),
                ..Timeouts::default()
            },
            ..LocalCompiler::default()
        });
        let design = tiny_design(&tmp.path().join("d"));
        let started = std::time::Instant::now();
        let out = backend.csim(&design, &tmp.path().join("w")).unwrap();
        assert!(started.elapsed() < Duration::from_secs(10));
        assert!(out.compile.timed_out());
        assert!(out.run.is_none());
    }
}
