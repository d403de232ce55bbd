use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

pub const MA_WINDOW: usize = 100;
pub const CSV_HEADER: &str = "global_episode,worker_id,steps,return,ma100,wall_clock_s";

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based emission index.
    pub global_episode: u64,
    pub worker_id: usize,
    pub steps: usize,
    pub ret: f64,
    pub ma100: f64,
    pub wall_clock_s: f64,
}

impl EpisodeRecord {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6}",
            self.global_episode, self.worker_id, self.steps, self.ret, self.ma100, self.wall_clock_s
        )
    }

    pub fn parse_csv_line(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return Err(Error::config(format!("metrics line has {} fields: {line}", f.len())));
        }
        let bad = |what: &str| Error::config(format!("bad {what} in metrics line: {line}"));
        Ok(Self {
            global_episode: f[0].parse().map_err(|_| bad("global_episode"))?,
            worker_id: f[1].parse().map_err(|_| bad("worker_id"))?,
            steps: f[2].parse().map_err(|_| bad("steps"))?,
            ret: f[3].parse().map_err(|_| bad("return"))?,
            ma100: f[4].parse().map_err(|_| bad("ma100"))?,
            wall_clock_s: f[5].parse().map_err(|_| bad("wall_clock_s"))?,
        })
    }
}

/// Reads a whole metrics file, checking the header.
pub fn read_metrics_csv(path: &Path) -> Result<Vec<EpisodeRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::config(format!("{} lacks the metrics header", path.display())));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(EpisodeRecord::parse_csv_line)
        .collect()
}

/// Mean of the most recent (up to) `MA_WINDOW` values.
#[derive(Clone, Debug, Default)]
pub struct MovingAverage {
    window: VecDeque<f64>,
}

impl MovingAverage {
    pub fn push(&mut self, x: f64) -> f64 {
        if self.window.len() == MA_WINDOW {
            self.window.pop_front();
        }
        self.window.push_back(x);
        self.mean()
    }

    pub fn mean(&self) -> f64 {
        if self.window.is_empty() {
            return 0.0;
        }
        self.window.iter().sum::<f64>() / self.window.len() as f64
    }
}

/// Receives episode records in emission order. Called under the store's episode lock.
pub trait EpisodeSink: Send {
    fn emit(&mut self, record: &EpisodeRecord) -> Result<()>;

    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Keeps records in memory; clones share the same buffer.
#[derive(Clone, Default)]
pub struct MemorySink {
    records: Arc<Mutex<Vec<EpisodeRecord>>>,
}

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> Vec<EpisodeRecord> {
        self.records.lock().expect("sink poisoned").clone()
    }
}

impl EpisodeSink for MemorySink {
    fn emit(&mut self, record: &EpisodeRecord) -> Result<()> {
        self.records.lock().expect("sink poisoned").push(record.clone());
        Ok(())
    }
}

/// Writes `metrics.csv`.
pub struct CsvSink {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvSink {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{CSV_HEADER}").map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            out,
        })
    }
}

impl EpisodeSink for CsvSink {
    fn emit(&mut self, record: &EpisodeRecord) -> Result<()> {
        writeln!(self.out, "{}", record.to_csv_line()).map_err(|e| Error::io(&self.path, e))
    }

    fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

impl<S: EpisodeSink + ?Sized> EpisodeSink for Box<S> {
    fn emit(&mut self, record: &EpisodeRecord) -> Result<()> {
        (**self).emit(record)
    }

    fn flush(&mut self) -> Result<()> {
        (**self).flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_window() {
        let mut ma = MovingAverage::default();
        assert_eq!(ma.push(4.0), 4.0);
        assert_eq!(ma.push(2.0), 3.0);
        for _ in 0..200 {
            ma.push(1.0);
        }
        assert_eq!(ma.mean(), 1.0);
    }

    #[test]
    fn csv_line_round_trip() {
        let r = EpisodeRecord {
            global_episode: 12,
            worker_id: 3,
            steps: 87,
            ret: -86.0,
            ma100: -123.456789012345,
            wall_clock_s: 1.5,
        };
        let back = EpisodeRecord::parse_csv_line(&r.to_csv_line()).unwrap();
        assert_eq!(back, r);
        assert!(EpisodeRecord::parse_csv_line("1,2,3").is_err());
    }
}
