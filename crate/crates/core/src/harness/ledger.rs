//! Versioned CSV persistence of regret ledgers.
//!
//! The first record is `nsslab-v1` followed by `key=value` summary fields,
//! then a header row and one row per episode.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::{EpisodeRow, RegretLedger, RunSummary};

pub const LEDGER_VERSION: &str = "nsslab-v1";
pub const COLUMNS: [&str; 10] =
    ["k", "cost", "vstar", "regret", "intervals", "resets_c", "resets_p", "t1", "t2", "t3"];

pub fn write_ledger<W: Write>(ledger: &RegretLedger, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).has_headers(false).from_writer(out);
    let s = &ledger.summary;
    w.write_record([
        LEDGER_VERSION.to_string(),
        format!("regret={:?}", s.regret),
        format!("interval_regret={:?}", s.interval_regret),
        format!("intervals={}", s.intervals),
        format!("b_star={:?}", s.b_star),
        format!("wallclock_secs={:?}", s.wallclock_secs),
    ])?;
    w.write_record(COLUMNS)?;
    for row in &ledger.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn summary_field<T: std::str::FromStr>(record: &csv::StringRecord, key: &str) -> Result<T> {
    record
        .iter()
        .skip(1)
        .filter_map(|f| f.split_once('='))
        .find(|(k, _)| *k == key)
        .and_then(|(_, v)| v.parse().ok())
        .ok_or_else(|| Error::Ledger(format!("summary field {key} missing or malformed")))
}

pub fn read_ledger<R: Read>(input: R) -> Result<RegretLedger> {
    let mut r = csv::ReaderBuilder::new().flexible(true).has_headers(false).from_reader(input);
    let mut records = r.records();
    let first = records.next().ok_or_else(|| Error::Ledger("empty ledger".into()))??;
    if first.get(0) != Some(LEDGER_VERSION) {
        return Err(Error::Ledger(format!("expected version tag {LEDGER_VERSION}")));
    }
    let summary = RunSummary {
        regret: summary_field(&first, "regret")?,
        interval_regret: summary_field(&first, "interval_regret")?,
        intervals: summary_field(&first, "intervals")?,
        b_star: summary_field(&first, "b_star")?,
        wallclock_secs: summary_field(&first, "wallclock_secs")?,
    };
    let header = records.next().ok_or_else(|| Error::Ledger("missing header row".into()))??;
    if !header.iter().eq(COLUMNS) {
        return Err(Error::Ledger(format!("unexpected columns {header:?}")));
    }
    let header = csv::StringRecord::from(COLUMNS.to_vec());
    let rows = records
        .map(|rec| Ok(rec?.deserialize::<EpisodeRow>(Some(&header))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegretLedger { rows, summary })
}

pub fn write_ledger_file(ledger: &RegretLedger, path: &Path) -> Result<()> {
    write_ledger(ledger, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_ledger_file(path: &Path) -> Result<RegretLedger> {
    read_ledger(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RegretLedger {
        let rows = (1..=3)
            .map(|k| EpisodeRow {
                k,
                cost: 0.1 * k as f64 + 1.0 / 3.0,
                vstar: std::f64::consts::E,
                regret: -1e-300 * k as f64,
                intervals: 2 * k,
                resets_c: k as u64,
                resets_p: 0,
                t1: 1,
                t2: 2,
                t3: 3,
            })
            .collect();
        RegretLedger {
            rows,
            summary: RunSummary {
                regret: 1.0 / 7.0,
                interval_regret: 2.5,
                intervals: 6,
                b_star: 2.0,
                wallclock_secs: 0.001,
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let mut buf = Vec::new();
        write_ledger(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("nsslab-v1,regret="));
        assert_eq!(text.lines().nth(1).unwrap(), "k,cost,vstar,regret,intervals,resets_c,resets_p,t1,t2,t3");
        assert_eq!(read_ledger(buf.as_slice()).unwrap(), sample());
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(read_ledger("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_ledger("".as_bytes()).is_err());
        assert!(read_ledger("nsslab-v1,regret=1\nk\n".as_bytes()).is_err());
    }
}
