use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use noisemt_core::meta::Metadata;
use noisemt_core::{Error, Sentence};

use crate::CliError;

/// A data sink: a file with a metadata sidecar, or stdout.
pub struct Output {
    path: Option<PathBuf>,
    w: BufWriter<Box<dyn Write>>,
}

impl Output {
    pub fn create(path: Option<&Path>) -> Result<Self, CliError> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p).map_err(|e| Error::io(p, e))?),
            None => Box::new(io::stdout()),
        };
        Ok(Output {
            path: path.map(Path::to_path_buf),
            w: BufWriter::with_capacity(1 << 16, inner),
        })
    }

    /// Discards everything written.
    pub fn sink() -> Self {
        Output {
            path: None,
            w: BufWriter::new(Box::new(io::sink())),
        }
    }

    pub fn label(&self) -> PathBuf {
        self.path.clone().unwrap_or_else(|| PathBuf::from("<stdout>"))
    }

    pub fn err(&self, e: io::Error) -> CliError {
        Error::io(self.label(), e).into()
    }

    pub fn line(&mut self, text: impl AsRef<str>) -> Result<(), CliError> {
        let r = self
            .w
            .write_all(text.as_ref().as_bytes())
            .and_then(|_| self.w.write_all(b"\n"));
        r.map_err(|e| self.err(e))
    }

    pub fn sentence(&mut self, s: &Sentence) -> Result<(), CliError> {
        let r = s.write_to(&mut self.w).and_then(|_| self.w.write_all(b"\n"));
        r.map_err(|e| self.err(e))
    }

    pub fn finish(mut self, meta: &Metadata) -> Result<(), CliError> {
        self.w.flush().map_err(|e| self.err(e))?;
        if let Some(p) = &self.path {
            meta.write_for(p)?;
        }
        Ok(())
    }
}

impl Write for Output {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.w.write(buf)
    }

    fn write_all(&mut self, buf: &[u8]) -> io::Result<()> {
        self.w.write_all(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.w.flush()
    }
}
