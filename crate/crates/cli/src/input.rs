use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use plcoh::SeriesPair;

/// Reads a two-column CSV. A first row whose leading fields are not numbers
/// is taken as a header; columns past the second are ignored.
pub fn read_pair(path: &Path) -> Result<SeriesPair> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut warned = false;
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() < 2 {
            bail!("{}: row {} has {} column(s), expected 2", path.display(), i + 1, record.len());
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        let (a, b) = match parsed {
            (Ok(a), Ok(b)) => (a, b),
            _ if i == 0 => continue,
            _ => bail!(
                "{}: row {} is not numeric: {:?}",
                path.display(),
                i + 1,
                record.iter().collect::<Vec<_>>()
            ),
        };
        if record.len() > 2 && !warned {
            log::warn!("{}: ignoring columns beyond the second", path.display());
            warned = true;
        }
        x.push(a);
        y.push(b);
    }
    SeriesPair::new(x, y).with_context(|| format!("invalid series in {}", path.display()))
}

pub fn write_pair(path: &Path, pair: &SeriesPair) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "x,y")?;
    for (a, b) in pair.x().iter().zip(pair.y()) {
        writeln!(out, "{a},{b}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_scale_values(path: &Path, header: &str, entries: &[(usize, f64)]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{header}")?;
    for (s, v) in entries {
        writeln!(out, "{s},{v}")?;
    }
    out.flush()?;
    Ok(())
}
