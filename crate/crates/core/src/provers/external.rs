//! Running external SZS-conforming provers as child processes.

use std::io::{Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Condvar, Mutex, OnceLock};
use std::thread;
use std::time::{Duration, Instant};

use crate::tptp::{parse_szs, ProverVerdict, SzsStatus};

/// Extra wall-clock time granted beyond a prover's own limit.
pub const GRACE: Duration = Duration::from_secs(1);

/// Bounds the number of prover processes alive at once, process-wide.
pub struct ProcessSlots {
    free: Mutex<usize>,
    released: Condvar,
}

impl ProcessSlots {
    fn global() -> &'static ProcessSlots {
        static SLOTS: OnceLock<ProcessSlots> = OnceLock::new();
        SLOTS.get_or_init(|| {
            let n = thread::available_parallelism().map_or(4, |n| n.get()) * 2;
            ProcessSlots { free: Mutex::new(n), released: Condvar::new() }
        })
    }

    /// Changes the number of free slots by `delta` (may be negative).
    pub fn adjust(delta: isize) {
        let slots = Self::global();
        let mut free = slots.free.lock().unwrap();
        *free = free.saturating_add_signed(delta);
        slots.released.notify_all();
    }

    fn acquire(cancel: &AtomicBool, deadline: Instant) -> Option<SlotGuard> {
        let slots = Self::global();
        let mut free = slots.free.lock().unwrap();
        while *free == 0 {
            if cancel.load(Ordering::Relaxed) || Instant::now() > deadline {
                return None;
            }
            free = slots.released.wait_timeout(free, Duration::from_millis(20)).unwrap().0;
        }
        *free -= 1;
        Some(SlotGuard)
    }
}

struct SlotGuard;

impl Drop for SlotGuard {
    fn drop(&mut self) {
        ProcessSlots::adjust(1);
    }
}

fn error(message: impl Into<String>) -> ProverVerdict {
    let mut v = ProverVerdict::new(SzsStatus::Error);
    v.output = Some(message.into());
    v
}

#[cfg(unix)]
fn configure(cmd: &mut Command) {
    use std::os::unix::process::CommandExt;
    cmd.process_group(0);
}

#[cfg(not(unix))]
fn configure(_: &mut Command) {}

#[cfg(unix)]
fn kill_all(child: &mut Child) {
    // SAFETY: signals the process group created for this child only.
    unsafe {
        libc::kill(-(child.id() as i32), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_all(child: &mut Child) {
    let _ = child.kill();
}

fn drain(mut pipe: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = pipe.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

/// Writes `problem` to a temporary file and runs `template` on it.
/// `{file}` and `{timeout}` in the template are replaced by the file path
/// and the limit in whole seconds.
pub fn run_external(template: &str, timeout: Duration, problem: &str, cancel: &AtomicBool) -> ProverVerdict {
    let start = Instant::now();
    let verdict = run(template, timeout, problem, cancel);
    ProverVerdict { elapsed: start.elapsed(), ..verdict }
}

fn run(template: &str, timeout: Duration, problem: &str, cancel: &AtomicBool) -> ProverVerdict {
    let Some(words) = shlex::split(template) else {
        return error(format!("cannot split command `{template}`"));
    };
    let mut file = match tempfile::Builder::new().prefix("obligation").suffix(".p").tempfile() {
        Ok(f) => f,
        Err(e) => return error(format!("temporary file: {e}")),
    };
    if let Err(e) = file.write_all(problem.as_bytes()).and_then(|_| file.flush()) {
        return error(format!("temporary file: {e}"));
    }
    let path = file.path().to_string_lossy().into_owned();
    let secs = timeout.as_secs_f64().ceil().max(1.0).to_string();
    let argv: Vec<String> = words.iter().map(|w| w.replace("{file}", &path).replace("{timeout}", &secs)).collect();
    let Some((program, args)) = argv.split_first() else {
        return error("empty command");
    };
    let deadline = Instant::now() + timeout + GRACE;
    let Some(_slot) = ProcessSlots::acquire(cancel, deadline) else {
        return ProverVerdict::new(if cancel.load(Ordering::Relaxed) { SzsStatus::Unknown } else { SzsStatus::Timeout });
    };
    let mut cmd = Command::new(program);
    cmd.args(args).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::piped());
    configure(&mut cmd);
    let mut child = match cmd.spawn() {
        Ok(c) => c,
        Err(e) => return error(format!("cannot run `{program}`: {e}")),
    };
    let stdout = drain(child.stdout.take().unwrap());
    let stderr = drain(child.stderr.take().unwrap());
    let (status, stopped) = loop {
        match child.try_wait() {
            Ok(Some(status)) => break (Some(status), None),
            Ok(None) => {}
            Err(e) => {
                kill_all(&mut child);
                let _ = child.wait();
                return error(format!("waiting for `{program}`: {e}"));
            }
        }
        let stop = if cancel.load(Ordering::Relaxed) {
            Some(SzsStatus::Unknown)
        } else if Instant::now() > deadline {
            Some(SzsStatus::Timeout)
        } else {
            None
        };
        if let Some(s) = stop {
            kill_all(&mut child);
            let _ = child.wait();
            break (None, Some(s));
        }
        thread::sleep(Duration::from_millis(10));
    };
    #[cfg(unix)]
    // SAFETY: clears stragglers left in the child's process group.
    unsafe {
        libc::kill(-(child.id() as i32), libc::SIGKILL);
    }
    let out = stdout.join().unwrap_or_default();
    let err = stderr.join().unwrap_or_default();
    if let Some(s) = stopped {
        return ProverVerdict::new(s);
    }
    let verdict = parse_szs(&out);
    let exit_ok = status.is_some_and(|s| s.success());
    if verdict.output.is_some() && !exit_ok {
        return error(format!("`{program}` failed without an SZS status\n{out}{err}"));
    }
    verdict
}
