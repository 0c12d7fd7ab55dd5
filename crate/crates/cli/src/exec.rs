//! Line-pipe adapter around an external translator process.

use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use noisemt_core::Sentence;
use thiserror::Error;

const STDERR_TAIL: usize = 2048;

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("cannot start translator `{command}`: {source}")]
    Spawn { command: String, source: io::Error },
    #[error("translator i/o: {0}")]
    Io(#[from] io::Error),
    #[error("translator output is not UTF-8 at line {line}")]
    Utf8 { line: usize },
    #[error("translator timed out after {after:?} with {received} of {expected} lines received{}", tail(.stderr))]
    Timeout {
        after: Duration,
        received: usize,
        expected: usize,
        stderr: String,
    },
    #[error("translator exited with {status} after {received} of {expected} lines{}", tail(.stderr))]
    Failed {
        status: ExitStatus,
        received: usize,
        expected: usize,
        stderr: String,
    },
    #[error("translator returned {got} lines for {expected} inputs")]
    LineCount { expected: usize, got: usize },
}

fn tail(stderr: &str) -> String {
    let s = stderr.trim_end();
    if s.is_empty() {
        String::new()
    } else {
        format!("; stderr: {s}")
    }
}

fn shell(command: &str) -> Command {
    if cfg!(windows) {
        let mut c = Command::new("cmd");
        c.args(["/C", command]);
        c
    } else {
        let mut c = Command::new("sh");
        c.args(["-c", command]);
        #[cfg(unix)]
        std::os::unix::process::CommandExt::process_group(&mut c, 0);
        c
    }
}

/// Kills the child and, on Unix, everything it started.
fn kill(child: &mut Child) {
    #[cfg(unix)]
    if let Ok(pid) = libc::pid_t::try_from(child.id()) {
        // SAFETY: plain syscall on the process group created in `shell`
        unsafe {
            libc::kill(-pid, libc::SIGKILL);
        }
    }
    let _ = child.kill();
    let _ = child.wait();
}

fn keep_tail(buf: &mut Vec<u8>) {
    if buf.len() > STDERR_TAIL {
        buf.drain(..buf.len() - STDERR_TAIL);
    }
}

fn wait(child: &mut Child, timeout: Option<Duration>) -> io::Result<Option<ExitStatus>> {
    let Some(limit) = timeout else {
        return child.wait().map(Some);
    };
    let start = Instant::now();
    let mut pause = Duration::from_millis(1);
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok(Some(status));
        }
        if start.elapsed() >= limit {
            kill(child);
            return Ok(None);
        }
        thread::sleep(pause);
        pause = (pause * 2).min(Duration::from_millis(50));
    }
}

/// Sends one sentence per line to `command` (run through the shell) and
/// reads back exactly as many lines, in order.
pub fn exec_translate(
    sentences: &[Sentence],
    command: &str,
    timeout: Option<Duration>,
) -> Result<Vec<Sentence>, ExecError> {
    let mut child = shell(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| ExecError::Spawn {
            command: command.to_owned(),
            source,
        })?;

    let stdin = child.stdin.take().expect("piped stdin");
    let stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");

    let input: Vec<u8> = {
        let mut buf = Vec::new();
        for s in sentences {
            s.write_to(&mut buf)?;
            buf.push(b'\n');
        }
        buf
    };
    let writer = thread::spawn(move || -> io::Result<()> {
        let mut w = BufWriter::new(stdin);
        // a child that exits early closes the pipe; that is reported through
        // its exit status or the line count instead
        match w.write_all(&input).and_then(|_| w.flush()) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            other => other,
        }
    });
    let reader = thread::spawn(move || -> Result<Vec<Sentence>, ExecError> {
        let mut out = Vec::new();
        let mut r = BufReader::new(stdout);
        let mut line = Vec::new();
        loop {
            line.clear();
            if r.read_until(b'\n', &mut line)? == 0 {
                return Ok(out);
            }
            let text = std::str::from_utf8(&line).map_err(|_| ExecError::Utf8 { line: out.len() + 1 })?;
            out.push(Sentence::parse(text));
        }
    });
    let errs = thread::spawn(move || {
        let mut buf = Vec::new();
        let mut chunk = [0u8; 4096];
        while let Ok(n) = stderr.read(&mut chunk) {
            if n == 0 {
                break;
            }
            buf.extend_from_slice(&chunk[..n]);
            keep_tail(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    });

    let status = wait(&mut child, timeout)?;
    let writer_result = writer.join().expect("writer thread");
    let lines = reader.join().expect("reader thread");
    let stderr = errs.join().expect("stderr thread");
    let expected = sentences.len();
    let received = lines.as_ref().map_or(0, Vec::len);

    let status = match status {
        Some(s) => s,
        None => {
            return Err(ExecError::Timeout {
                after: timeout.unwrap_or_default(),
                received,
                expected,
                stderr,
            })
        }
    };
    if !status.success() {
        return Err(ExecError::Failed {
            status,
            received,
            expected,
            stderr,
        });
    }
    writer_result?;
    let lines = lines?;
    if lines.len() != expected {
        return Err(ExecError::LineCount {
            expected,
            got: lines.len(),
        });
    }
    Ok(lines)
}
