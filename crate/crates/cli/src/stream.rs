//! Text format for encoded streams: a header line naming the delay and the
//! start index, then the payload bits as ASCII.
//!
//! ```text
//! k=2 start={00,01,10,11}|000
//! 1011110100
//! ```

use delaycode_core::bits::{to_ascii, BitString};
use delaycode_core::rct::ExpandedIndex;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamFile {
    pub k: usize,
    pub start: ExpandedIndex,
    pub payload: BitString,
}

pub fn write_stream(s: &StreamFile) -> String {
    format!(
        "k={} start={}\n{}\n",
        s.k,
        s.start.to_label(),
        to_ascii(&s.payload)
    )
}

pub fn parse_stream(text: &str) -> Result<StreamFile, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Parse("stream: empty input".into()))?;
    let mut k = None;
    let mut start = None;
    for field in header.split_whitespace() {
        if let Some(v) = field.strip_prefix("k=") {
            k = Some(
                v.parse::<usize>()
                    .map_err(|_| CliError::Parse(format!("stream header: bad k in {field:?}")))?,
            );
        } else if let Some(v) = field.strip_prefix("start=") {
            start = Some(v.to_string());
        } else {
            return Err(CliError::Parse(format!(
                "stream header: unknown field {field:?}"
            )));
        }
    }
    let k = k.ok_or_else(|| CliError::Parse("stream header: missing k=".into()))?;
    let start = start.ok_or_else(|| CliError::Parse("stream header: missing start=".into()))?;
    let start = ExpandedIndex::parse_label(k, &start)
        .map_err(|e| CliError::Parse(format!("stream header: {e}")))?;
    let mut payload = BitString::empty();
    for line in lines {
        for c in line.chars() {
            match c {
                '0' => payload.push(0),
                '1' => payload.push(1),
                c if c.is_whitespace() => {}
                c => {
                    return Err(CliError::Parse(format!(
                        "stream payload: invalid character {c:?}"
                    )))
                }
            }
        }
    }
    Ok(StreamFile { k, start, payload })
}
