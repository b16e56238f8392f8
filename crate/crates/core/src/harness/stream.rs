//! JSON Lines update streams: one header line, then one event per line.

use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::clusterer::UpdateEvent;
use crate::error::Result;
use crate::metric::{MetricUniverse, PointId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Euclidean,
    Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamHeader {
    pub k: usize,
    pub delta: u64,
    pub metric: MetricKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Matrix mode: the full universe, in matrix row order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<PointId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl StreamHeader {
    pub fn euclidean(k: usize, delta: u64, dim: usize) -> Self {
        StreamHeader {
            k,
            delta,
            metric: MetricKind::Euclidean,
            dim: Some(dim),
            points: None,
            matrix: None,
        }
    }

    pub fn matrix(k: usize, delta: u64, points: Vec<PointId>, matrix: Vec<Vec<f64>>) -> Self {
        StreamHeader {
            k,
            delta,
            metric: MetricKind::Matrix,
            dim: None,
            points: Some(points),
            matrix: Some(matrix),
        }
    }

    /// The (initially empty, for Euclidean) universe this header declares.
    pub fn universe(&self) -> Result<MetricUniverse> {
        use crate::error::Error;
        match self.metric {
            MetricKind::Euclidean => {
                let dim = self
                    .dim
                    .ok_or_else(|| Error::Input("euclidean header needs dim".into()))?;
                if self.points.is_some() || self.matrix.is_some() {
                    return Err(Error::Input(
                        "euclidean header cannot carry a matrix".into(),
                    ));
                }
                MetricUniverse::euclidean(dim, self.delta)
            }
            MetricKind::Matrix => match (&self.points, &self.matrix) {
                (Some(points), Some(matrix)) => {
                    MetricUniverse::from_matrix(points.clone(), matrix.clone(), self.delta)
                }
                _ => Err(Error::Input("matrix header needs points and matrix".into())),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Header(StreamHeader),
    Insert {
        id: PointId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Vec<f64>>,
    },
    Delete {
        id: PointId,
    },
}

#[derive(Debug)]
pub enum StreamError {
    Io(io::Error),
    Parse { line: usize, message: String },
}

impl fmt::Display for StreamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamError::Io(e) => write!(f, "read error: {e}"),
            StreamError::Parse { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl std::error::Error for StreamError {}

impl From<io::Error> for StreamError {
    fn from(e: io::Error) -> Self {
        StreamError::Io(e)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> StreamError {
    StreamError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a stream lazily. The header is parsed on construction; events are
/// yielded with their 1-based line numbers. Blank lines are skipped.
pub struct StreamReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
    header: StreamHeader,
}

impl<R: BufRead> StreamReader<R> {
    pub fn new(reader: R) -> Result<Self, StreamError> {
        let mut lines = reader.lines();
        let mut line_no = 0;
        let header = loop {
            line_no += 1;
            let Some(text) = lines.next().transpose()? else {
                return Err(parse_err(line_no, "missing header"));
            };
            if text.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Line>(&text) {
                Ok(Line::Header(h)) => break h,
                Ok(_) => return Err(parse_err(line_no, "first line must be the header")),
                Err(e) => return Err(parse_err(line_no, e.to_string())),
            }
        };
        if header.k == 0 {
            return Err(parse_err(line_no, "k must be positive"));
        }
        Ok(StreamReader {
            lines,
            line_no,
            header,
        })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    /// Line number of the header.
    pub fn header_line(&self) -> usize {
        self.line_no
    }
}

impl<R: BufRead> Iterator for StreamReader<R> {
    type Item = Result<(usize, UpdateEvent), StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            if text.trim().is_empty() {
                continue;
            }
            let event = match serde_json::from_str::<Line>(&text) {
                Ok(Line::Header(_)) => Err(parse_err(self.line_no, "duplicate header")),
                Ok(Line::Insert { id, coords }) => Ok(UpdateEvent::Insert { id, coords }),
                Ok(Line::Delete { id }) => Ok(UpdateEvent::Delete { id }),
                Err(e) => Err(parse_err(self.line_no, e.to_string())),
            };
            return Some(event.map(|e| (self.line_no, e)));
        }
    }
}

/// A fully buffered stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub header: StreamHeader,
    pub events: Vec<UpdateEvent>,
}

impl Stream {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, StreamError> {
        let mut r = StreamReader::new(reader)?;
        let header = r.header.clone();
        let events = r
            .by_ref()
            .map(|e| e.map(|(_, e)| e))
            .collect::<Result<_, _>>()?;
        Ok(Stream { header, events })
    }

    pub fn parse_str(text: &str) -> Result<Self, StreamError> {
        Self::parse(text.as_bytes())
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header = Line::Header(self.header.clone());
        writeln!(out, "{}", serde_json::to_string(&header)?)?;
        for e in &self.events {
            writeln!(out, "{}", serde_json::to_string(e)?)?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits utf-8")
    }
}
