// SPDX-License-Identifier: Apache-2.0

//! Child processes with captured output and a wall-clock limit.

use std::io::Read;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

/// Exit code recorded for a process killed at its time limit. Disjoint from
/// anything a process can return on its own.
pub const TIMEOUT_RETURN_CODE: i32 = -1001;

const POLL_INTERVAL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone)]
pub struct Captured {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub duration: Duration,
    pub timed_out: bool,
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_end(&mut buf);
        }
        buf
    })
}

#[cfg(unix)]
fn isolate(cmd: &mut Command) {
    use std::os::unix::process::CommandExt;
    // Own process group, so a timeout takes down compiler subprocesses too.
    cmd.process_group(0);
}

#[cfg(not(unix))]
fn isolate(_cmd: &mut Command) {}

#[cfg(unix)]
fn kill_tree(child: &mut Child) {
    let pid = child.id() as libc::pid_t;
    // SAFETY: plain syscall on a process group we created.
    unsafe {
        libc::kill(-pid, libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_tree(child: &mut Child) {
    let _ = child.kill();
}

#[cfg(unix)]
fn exit_code(status: std::process::ExitStatus) -> i32 {
    use std::os::unix::process::ExitStatusExt;
    status
        .code()
        .unwrap_or_else(|| 128 + status.signal().unwrap_or(0))
}

#[cfg(not(unix))]
fn exit_code(status: std::process::ExitStatus) -> i32 {
    status.code().unwrap_or(-1)
}

/// Runs `cmd` to completion or until `timeout` elapses.
///
/// Spawn failures (such as a missing binary) are returned as errors; every
/// other outcome is a [`Captured`].
pub fn run_captured(mut cmd: Command, timeout: Duration) -> std::io::Result<Captured> {
    cmd.stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    isolate(&mut cmd);

    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let out = drain(child.stdout.take());
    let err = drain(child.stderr.take());

    let deadline = start + timeout;
    let (code, timed_out) = loop {
        if let Some(status) = child.try_wait()? {
            break (exit_code(status), false);
        }
        if Instant::now() >= deadline {
            kill_tree(&mut child);
            let _ = child.wait();
            break (TIMEOUT_RETURN_CODE, true);
        }
        thread::sleep(POLL_INTERVAL);
    };
    let duration = start.elapsed();
    Ok(Captured {
        code,
        stdout: out.join().unwrap_or_default(),
        stderr: err.join().unwrap_or_default(),
        duration,
        timed_out,
    })
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    fn sh(script: &str) -> Command {
        let mut c = Command::new("sh");
        c.arg("-c").arg(script);
        c
    }

    #[test]
    fn captures_streams_and_code() {
        let r = run_captured(sh("printf 'a\\nb'; printf 'err' >&2; exit 3"), Duration::from_secs(10)).unwrap();
        assert_eq!(r.code, 3);
        assert_eq!(r.stdout, b"a\nb");
        assert_eq!(r.stderr, b"err");
        assert!(!r.timed_out);
    }

    #[test]
    fn kills_at_the_limit() {
        let limit = Duration::from_millis(300);
        // The grandchild keeps the pipes open unless the whole group dies.
        let r = run_captured(sh("sleep 30 & sleep 30"), limit).unwrap();
        assert!(r.timed_out);
        assert_eq!(r.code, TIMEOUT_RETURN_CODE);
        assert!(r.duration < limit * 2, "took {:?}", r.duration);
    }

    #[test]
    fn missing_binary_is_an_error() {
        let err = run_captured(Command::new("/nonexistent/binary"), Duration::from_secs(1)).unwrap_err();
        assert_eq!(err.kind(), std::io::ErrorKind::NotFound);
    }
}
