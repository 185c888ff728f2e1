use std::fs;
use std::path::Path;

use popshm::synth::LabeledSample;

use crate::Failure;

pub fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::io(path, e))
}

/// One JSON object per line, in sample order.
pub fn to_jsonl(samples: &[LabeledSample]) -> Result<Vec<u8>, Failure> {
    let mut out = Vec::new();
    for s in samples {
        serde_json::to_writer(&mut out, s)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn parse_jsonl(text: &str) -> Result<Vec<LabeledSample>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

/// Samples and the raw bytes they were parsed from.
pub fn read_samples(path: &Path) -> Result<(Vec<LabeledSample>, Vec<u8>), Failure> {
    let bytes = read(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    let samples = parse_jsonl(text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    Ok((samples, bytes))
}
