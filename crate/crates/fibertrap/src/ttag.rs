//! Photon time-tag streams and the TTAG container: magic "TTAG", u16 LE
//! version, u32 LE resolution in femtoseconds, then (u8 channel, u64 LE
//! timestamp) records. A `channel,timestamp` CSV twin exists for debugging.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const TTAG_MAGIC: [u8; 4] = *b"TTAG";
pub const TTAG_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TagRecord {
    pub channel: u8,
    /// Timestamp in units of the stream resolution.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeTagStream {
    /// Tick length in femtoseconds (0.8 ns = 800_000 fs).
    pub resolution_fs: u32,
    pub records: Vec<TagRecord>,
}

impl TimeTagStream {
    pub fn new(resolution_fs: u32) -> Self {
        TimeTagStream {
            resolution_fs,
            records: Vec::new(),
        }
    }

    pub fn from_records(resolution_fs: u32, records: Vec<TagRecord>) -> Self {
        TimeTagStream {
            resolution_fs,
            records,
        }
    }

    /// Serialize to the binary container in memory.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(10 + 9 * self.records.len());
        self.write_binary(&mut out).expect("vec write");
        out
    }

    /// Serialize to CSV text in memory.
    pub fn to_csv(&self) -> String {
        let mut out = Vec::with_capacity(32 + 16 * self.records.len());
        self.write_csv(&mut out).expect("vec write");
        String::from_utf8(out).expect("csv is ascii")
    }

    pub fn read_binary_file(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::io_context(path, e))?;
        Self::read_binary(std::io::BufReader::new(file))
    }

    pub fn read_csv_file(path: &std::path::Path, resolution_fs: u32) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::io_context(path, e))?;
        Self::read_csv(std::io::BufReader::new(file), resolution_fs)
    }

    pub fn resolution_seconds(&self) -> f64 {
        self.resolution_fs as f64 * 1e-15
    }

    /// Records of one channel, in stream order.
    pub fn channel(&self, ch: u8) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.channel == ch)
            .map(|r| r.timestamp)
            .collect()
    }

    pub fn channel_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for r in &self.records {
            if (r.channel as usize) < 2 {
                counts[r.channel as usize] += 1;
            }
        }
        counts
    }

    /// Checks the stream invariants: channels 0/1 only, timestamps
    /// nondecreasing per channel.
    pub fn validate(&self) -> Result<()> {
        let mut last = [0u64; 2];
        for r in &self.records {
            if r.channel > 1 {
                return Err(Error::Input(format!("bad channel {}", r.channel)));
            }
            let l = &mut last[r.channel as usize];
            if r.timestamp < *l {
                return Err(Error::Input(format!(
                    "timestamps decrease on channel {} at {}",
                    r.channel, r.timestamp
                )));
            }
            *l = r.timestamp;
        }
        Ok(())
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&TTAG_MAGIC)?;
        w.write_all(&TTAG_VERSION.to_le_bytes())?;
        w.write_all(&self.resolution_fs.to_le_bytes())?;
        for r in &self.records {
            w.write_all(&[r.channel])?;
            w.write_all(&r.timestamp.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 10];
        r.read_exact(&mut head)
            .map_err(|_| Error::Input("truncated TTAG header".into()))?;
        if head[0..4] != TTAG_MAGIC {
            return Err(Error::Input("not a TTAG file (bad magic)".into()));
        }
        let version = u16::from_le_bytes([head[4], head[5]]);
        if version != TTAG_VERSION {
            return Err(Error::Input(format!("unsupported TTAG version {version}")));
        }
        let resolution_fs = u32::from_le_bytes([head[6], head[7], head[8], head[9]]);
        if resolution_fs == 0 {
            return Err(Error::Input("zero TTAG resolution".into()));
        }
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() % 9 != 0 {
            return Err(Error::Input("truncated TTAG record".into()));
        }
        let records = body
            .chunks_exact(9)
            .map(|c| TagRecord {
                channel: c[0],
                timestamp: u64::from_le_bytes(c[1..9].try_into().unwrap()),
            })
            .collect();
        Ok(TimeTagStream {
            resolution_fs,
            records,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "channel,timestamp")?;
        for r in &self.records {
            writeln!(w, "{},{}", r.channel, r.timestamp)?;
        }
        Ok(())
    }

    /// CSV twin of the binary format. The resolution is not stored in the
    /// CSV, so the caller supplies it.
    pub fn read_csv<R: Read>(mut r: R, resolution_fs: u32) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "channel,timestamp" => {}
            _ => return Err(Error::Input("expected header 'channel,timestamp'".into())),
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (ch, ts) = line
                .split_once(',')
                .ok_or_else(|| Error::Input(format!("line {}: expected 'channel,timestamp'", i + 2)))?;
            records.push(TagRecord {
                channel: ch
                    .trim()
                    .parse()
                    .map_err(|_| Error::Input(format!("line {}: bad channel '{ch}'", i + 2)))?,
                timestamp: ts
                    .trim()
                    .parse()
                    .map_err(|_| Error::Input(format!("line {}: bad timestamp '{ts}'", i + 2)))?,
            });
        }
        Ok(TimeTagStream {
            resolution_fs,
            records,
        })
    }
}
