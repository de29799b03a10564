//! CSV files: one `# config: <json>` comment line, a header line, then rows.
//! Floats are written with 17 significant digits so they read back exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, config_json: &str, header: &[&str]) -> Result<Self> {
        let mut file = BufWriter::new(File::create(path)?);
        writeln!(file, "# config: {config_json}")?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header).map_err(csv_error)?;
        Ok(Self { path: path.to_path_buf(), writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(csv_error)
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush()?;
        Ok(self.path)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// A path read back from a `simulate` output file.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub rep: u64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Reads `t,value` or `rep,t,value` files; rows of one replication must be
/// contiguous and in time order.
pub fn read_paths(path: &Path) -> Result<Vec<PathRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_error)?;
    let header = reader.headers().map_err(csv_error)?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let (t_col, v_col) = match (col("t"), col("value")) {
        (Some(t), Some(v)) => (t, v),
        _ => return Err(Error::Config(format!("{}: expected columns t,value", path.display()))),
    };
    let rep_col = col("rep");
    let mut out: Vec<PathRecord> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::Config("short CSV row".into()))
        };
        let num = |i: usize| -> Result<f64> {
            field(i)?.trim().parse().map_err(|_| Error::Config(format!("bad number `{}`", field(i).unwrap_or(""))))
        };
        let rep = match rep_col {
            Some(i) => field(i)?.trim().parse().map_err(|_| Error::Config("bad rep index".into()))?,
            None => 0,
        };
        if out.last().map(|p| p.rep) != Some(rep) {
            out.push(PathRecord { rep, times: Vec::new(), values: Vec::new() });
        }
        let last = out.last_mut().expect("pushed");
        last.times.push(num(t_col)?);
        last.values.push(num(v_col)?);
    }
    if out.is_empty() {
        return Err(Error::Config(format!("{}: no rows", path.display())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e17] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn write_and_read() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let mut w = CsvOut::create(&p, "{}", &["rep", "t", "value"]).unwrap();
        for rep in 0..2u64 {
            for k in 0..3 {
                w.row([rep.to_string(), fmt_float(k as f64 * 0.5), fmt_float(rep as f64 + 0.1 * k as f64)]).unwrap();
            }
        }
        w.finish().unwrap();
        let paths = read_paths(&p).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[1].values, vec![1.0, 1.1, 1.2]);
        assert_eq!(paths[0].times, vec![0.0, 0.5, 1.0]);
    }
}
