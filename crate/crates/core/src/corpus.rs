//! Text data model and line-oriented corpus I/O.
//!
//! A token is a whitespace-separated unit of pre-tokenized input; a sentence
//! is one line; a document is a maximal run of non-blank lines. Readers
//! stream from disk and validate UTF-8 as they go.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-empty, whitespace-free unit of text.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(surface: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(Error::param(format!("invalid token {surface:?}")));
        }
        Ok(Token(surface))
    }

    /// Caller guarantees the surface is non-empty and whitespace-free.
    pub(crate) fn from_piece(piece: &str) -> Self {
        debug_assert!(!piece.is_empty() && !piece.chars().any(char::is_whitespace));
        Token(piece.to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Token::new(s)
    }
}

impl From<Token> for String {
    fn from(t: Token) -> String {
        t.0
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    /// Splits on any Unicode whitespace.
    pub fn parse(line: &str) -> Self {
        Sentence {
            tokens: line.split_whitespace().map(Token::from_piece).collect(),
        }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(Token::as_str)
    }

    /// Writes the tokens joined by single spaces, without a newline.
    pub fn write_to<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                w.write_all(b" ")?;
            }
            w.write_all(t.0.as_bytes())?;
        }
        Ok(())
    }
}

impl FromStr for Sentence {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(Sentence::parse(s))
    }
}

impl From<Vec<Token>> for Sentence {
    fn from(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&t.0)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(sentences: Vec<Sentence>) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::EmptyInput("document has no sentences".into()));
        }
        Ok(Document { sentences })
    }

    pub(crate) fn from_nonempty(sentences: Vec<Sentence>) -> Self {
        debug_assert!(!sentences.is_empty());
        Document { sentences }
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn into_sentences(self) -> Vec<Sentence> {
        self.sentences
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// One sentence per line, terminated by a newline.
    pub fn write_to<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        for s in &self.sentences {
            s.write_to(w)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Approximate in-memory footprint of the token text.
    pub fn text_bytes(&self) -> usize {
        self.sentences
            .iter()
            .flat_map(|s| s.tokens())
            .map(|t| t.as_str().len() + 1)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelPair {
    pub source: Sentence,
    pub target: Sentence,
}

impl ParallelPair {
    pub fn new(source: Sentence, target: Sentence) -> Result<Self> {
        if source.is_empty() || target.is_empty() {
            return Err(Error::EmptyInput("parallel pair side is empty".into()));
        }
        Ok(ParallelPair { source, target })
    }
}

/// One physical line of input.
#[derive(Debug)]
enum Line {
    Blank,
    Text(Sentence),
}

/// Line splitter that validates UTF-8 and tracks position for diagnostics.
struct RawLines<R> {
    reader: R,
    path: PathBuf,
    buf: Vec<u8>,
    offset: u64,
    line_no: usize,
    failed: bool,
}

impl<R: BufRead> RawLines<R> {
    fn new(reader: R, path: PathBuf) -> Self {
        RawLines {
            reader,
            path,
            buf: Vec::with_capacity(256),
            offset: 0,
            line_no: 0,
            failed: false,
        }
    }

    fn next_line(&mut self) -> Option<Result<Line>> {
        if self.failed {
            return None;
        }
        self.buf.clear();
        let n = match self.reader.read_until(b'\n', &mut self.buf) {
            Ok(0) => return None,
            Ok(n) => n,
            Err(e) => {
                self.failed = true;
                return Some(Err(Error::io(&self.path, e)));
            }
        };
        let start = self.offset;
        self.offset += n as u64;
        self.line_no += 1;
        let text = match std::str::from_utf8(&self.buf) {
            Ok(t) => t,
            Err(e) => {
                self.failed = true;
                return Some(Err(Error::Utf8 {
                    path: self.path.clone(),
                    line: self.line_no,
                    offset: start + e.valid_up_to() as u64,
                }));
            }
        };
        let sentence = Sentence::parse(text);
        Some(Ok(if sentence.is_empty() {
            Line::Blank
        } else {
            Line::Text(sentence)
        }))
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(|f| BufReader::with_capacity(1 << 16, f))
        .map_err(|e| Error::io(path, e))
}

/// Streams non-blank lines as sentences; blank lines are skipped and counted.
pub struct LineReader<R> {
    lines: RawLines<R>,
    skipped: usize,
}

impl<R: BufRead> LineReader<R> {
    /// `label` is used in error messages only.
    pub fn new(reader: R, label: impl Into<PathBuf>) -> Self {
        LineReader {
            lines: RawLines::new(reader, label.into()),
            skipped: 0,
        }
    }

    /// Blank lines seen so far.
    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

impl<R: BufRead> Iterator for LineReader<R> {
    type Item = Result<Sentence>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match self.lines.next_line()? {
                Ok(Line::Blank) => self.skipped += 1,
                Ok(Line::Text(s)) => return Some(Ok(s)),
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

pub fn read_lines(path: impl AsRef<Path>) -> Result<LineReader<BufReader<File>>> {
    let path = path.as_ref();
    Ok(LineReader::new(open(path)?, path))
}

/// Reads a whole file of sentences into memory.
pub fn load_sentences(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    read_lines(path)?.collect()
}

/// Streams every physical line; blank lines become empty sentences so that
/// line numbers stay aligned with other files.
pub struct AlignedReader<R> {
    lines: RawLines<R>,
}

impl<R: BufRead> AlignedReader<R> {
    pub fn new(reader: R, label: impl Into<PathBuf>) -> Self {
        AlignedReader {
            lines: RawLines::new(reader, label.into()),
        }
    }
}

impl<R: BufRead> Iterator for AlignedReader<R> {
    type Item = Result<Sentence>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.lines.next_line()?.map(|line| match line {
            Line::Blank => Sentence::default(),
            Line::Text(s) => s,
        }))
    }
}

pub fn read_aligned(path: impl AsRef<Path>) -> Result<AlignedReader<BufReader<File>>> {
    let path = path.as_ref();
    Ok(AlignedReader::new(open(path)?, path))
}

pub fn load_aligned(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    read_aligned(path)?.collect()
}

/// Streams blank-line separated documents.
pub struct DocumentReader<R> {
    lines: RawLines<R>,
}

impl<R: BufRead> DocumentReader<R> {
    pub fn new(reader: R, label: impl Into<PathBuf>) -> Self {
        DocumentReader {
            lines: RawLines::new(reader, label.into()),
        }
    }
}

impl<R: BufRead> Iterator for DocumentReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut sentences = Vec::new();
        loop {
            match self.lines.next_line() {
                None => break,
                Some(Err(e)) => return Some(Err(e)),
                Some(Ok(Line::Blank)) if sentences.is_empty() => continue,
                Some(Ok(Line::Blank)) => break,
                Some(Ok(Line::Text(s))) => sentences.push(s),
            }
        }
        (!sentences.is_empty()).then(|| Ok(Document::from_nonempty(sentences)))
    }
}

pub fn read_documents(path: impl AsRef<Path>) -> Result<DocumentReader<BufReader<File>>> {
    let path = path.as_ref();
    Ok(DocumentReader::new(open(path)?, path))
}

/// Documents separated by a single blank line.
pub fn write_documents<'a, W, I>(w: &mut W, docs: I) -> io::Result<()>
where
    W: Write + ?Sized,
    I: IntoIterator<Item = &'a Document>,
{
    for (i, doc) in docs.into_iter().enumerate() {
        if i > 0 {
            w.write_all(b"\n")?;
        }
        doc.write_to(w)?;
    }
    Ok(())
}

pub fn write_sentences<'a, W, I>(w: &mut W, sentences: I) -> io::Result<()>
where
    W: Write + ?Sized,
    I: IntoIterator<Item = &'a Sentence>,
{
    for s in sentences {
        s.write_to(w)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Pairs two line streams positionally.
pub struct ParallelReader<R> {
    src: RawLines<R>,
    tgt: RawLines<R>,
    done: bool,
}

impl<R: BufRead> ParallelReader<R> {
    pub fn new(src: R, src_label: impl Into<PathBuf>, tgt: R, tgt_label: impl Into<PathBuf>) -> Self {
        ParallelReader {
            src: RawLines::new(src, src_label.into()),
            tgt: RawLines::new(tgt, tgt_label.into()),
            done: false,
        }
    }

    /// Consumes the rest of `lines` and returns its total line count.
    fn drain_count(lines: &mut RawLines<R>) -> Result<usize> {
        while let Some(line) = lines.next_line() {
            line?;
        }
        Ok(lines.line_no)
    }

    fn mismatch(&mut self) -> Error {
        let src = match Self::drain_count(&mut self.src) {
            Ok(n) => n,
            Err(e) => return e,
        };
        let tgt = match Self::drain_count(&mut self.tgt) {
            Ok(n) => n,
            Err(e) => return e,
        };
        Error::mismatch("parallel corpus line counts (source, target)", src, tgt)
    }
}

impl<R: BufRead> Iterator for ParallelReader<R> {
    type Item = Result<ParallelPair>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = match (self.src.next_line(), self.tgt.next_line()) {
            (None, None) => {
                self.done = true;
                return None;
            }
            (Some(Err(e)), _) | (_, Some(Err(e))) => Err(e),
            (Some(Ok(_)), None) | (None, Some(Ok(_))) => Err(self.mismatch()),
            (Some(Ok(Line::Text(source))), Some(Ok(Line::Text(target)))) => Ok(ParallelPair { source, target }),
            (Some(Ok(_)), Some(Ok(_))) => Err(Error::Malformed {
                path: self.src.path.clone(),
                line: self.src.line_no,
                message: format!("empty side in parallel pair (target {})", self.tgt.path.display()),
            }),
        };
        if item.is_err() {
            self.done = true;
        }
        Some(item)
    }
}

pub fn read_parallel(
    src_path: impl AsRef<Path>,
    tgt_path: impl AsRef<Path>,
) -> Result<ParallelReader<BufReader<File>>> {
    let (s, t) = (src_path.as_ref(), tgt_path.as_ref());
    Ok(ParallelReader::new(open(s)?, s, open(t)?, t))
}
