//! Sample serialization: decimal text, one value per line, or raw
//! little-endian `u64` words with no header.

use std::io::{self, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Binary,
}

pub fn write_samples<W: Write + ?Sized>(out: &mut W, values: &[u64], format: OutputFormat) -> io::Result<()> {
    let mut w = io::BufWriter::new(out);
    match format {
        OutputFormat::Text => {
            for v in values {
                writeln!(w, "{v}")?;
            }
        }
        OutputFormat::Binary => {
            for v in values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()
}

pub fn encode(values: &[u64], format: OutputFormat) -> Vec<u8> {
    let mut buf = Vec::new();
    write_samples(&mut buf, values, format).expect("writing to memory");
    buf
}

pub fn decode(bytes: &[u8], format: OutputFormat) -> Result<Vec<u64>> {
    match format {
        OutputFormat::Text => {
            let text = std::str::from_utf8(bytes).map_err(|e| Error::Malformed(e.to_string()))?;
            text.lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| {
                    l.trim()
                        .parse()
                        .map_err(|_| Error::Malformed(format!("line {}: {l:?} is not an integer", i + 1)))
                })
                .collect()
        }
        OutputFormat::Binary => {
            if !bytes.len().is_multiple_of(8) {
                return Err(Error::Malformed(format!(
                    "{} bytes is not a whole number of words",
                    bytes.len()
                )));
            }
            Ok(bytes
                .chunks_exact(8)
                .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect())
        }
    }
}
