//! Plain-text sample files: one decimal sample per line, `#` comments, and an
//! optional `# sample_rate=<Hz>` header.

use std::fmt;
use std::fs;
use std::path::Path;

use multitone::Signal;

#[derive(Debug, Clone, PartialEq)]
pub struct InputDocument {
    pub samples: Vec<f64>,
    pub sample_rate: Option<f64>,
    pub source_path: String,
}

#[derive(Debug)]
pub enum InputError {
    Io(String, std::io::Error),
    Parse { line: usize, text: String },
    BadSampleRate { line: usize, text: String },
    NonFinite { line: usize },
    TooShort(usize),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Io(path, e) => write!(f, "cannot read {path}: {e}"),
            InputError::Parse { line, text } => write!(f, "line {line}: not a number: {text:?}"),
            InputError::BadSampleRate { line, text } => write!(f, "line {line}: bad sample rate {text:?}"),
            InputError::NonFinite { line } => write!(f, "line {line}: sample is not finite"),
            InputError::TooShort(n) => write!(f, "need at least 2 samples, found {n}"),
        }
    }
}

impl std::error::Error for InputError {}

impl InputDocument {
    pub fn read(path: &Path) -> Result<Self, InputError> {
        let text = fs::read_to_string(path).map_err(|e| InputError::Io(path.display().to_string(), e))?;
        Self::parse(&text, path.display().to_string())
    }

    pub fn parse(text: &str, source_path: String) -> Result<Self, InputError> {
        let mut samples = Vec::new();
        let mut sample_rate = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(value) = comment.trim().strip_prefix("sample_rate=") {
                    let rate: f64 = value.trim().parse().map_err(|_| InputError::BadSampleRate {
                        line: line_no,
                        text: value.trim().into(),
                    })?;
                    if !(rate.is_finite() && rate > 0.0) {
                        return Err(InputError::BadSampleRate {
                            line: line_no,
                            text: value.trim().into(),
                        });
                    }
                    sample_rate = Some(rate);
                }
                continue;
            }
            let v: f64 = line.parse().map_err(|_| InputError::Parse {
                line: line_no,
                text: line.into(),
            })?;
            if !v.is_finite() {
                return Err(InputError::NonFinite { line: line_no });
            }
            samples.push(v);
        }
        if samples.len() < 2 {
            return Err(InputError::TooShort(samples.len()));
        }
        Ok(Self {
            samples,
            sample_rate,
            source_path,
        })
    }

    pub fn signal(&self) -> Signal {
        Signal::new(self.samples.clone()).expect("parsed samples are finite and at least two")
    }
}
