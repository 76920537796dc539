use std::io::{Read, Write};
use std::path::Path;

use crate::curvature::csv_err;
use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 11] = [
    "k",
    "i_k",
    "L",
    "f",
    "f_tilde",
    "grad_map_norm",
    "tau",
    "a",
    "A",
    "phi_star",
    "step_norm",
];

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub i_k: u32,
    /// `L_{k+1}` (or `M_{k+1}`, or `M̄` on the GGM stopping row).
    pub l: f64,
    pub f: f64,
    pub f_tilde: f64,
    pub grad_map_norm: Option<f64>,
    pub tau: Option<f64>,
    pub a: Option<f64>,
    pub a_total: Option<f64>,
    pub phi_star: Option<f64>,
    pub step_norm: f64,
}

impl IterationRecord {
    pub(crate) fn basic(k: usize, i_k: u32, l: f64, f: f64, f_tilde: f64, step_norm: f64) -> Self {
        IterationRecord {
            k,
            i_k,
            l,
            f,
            f_tilde,
            grad_map_norm: None,
            tau: None,
            a: None,
            a_total: None,
            phi_star: None,
            step_norm,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<IterationRecord>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `Σ i_k`
    pub fn total_doublings(&self) -> u64 {
        self.records.iter().map(|r| r.i_k as u64).sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(TRACE_HEADER).map_err(csv_err)?;
        for r in &self.records {
            wr.write_record([
                r.k.to_string(),
                r.i_k.to_string(),
                r.l.to_string(),
                r.f.to_string(),
                r.f_tilde.to_string(),
                opt(r.grad_map_norm),
                opt(r.tau),
                opt(r.a),
                opt(r.a_total),
                opt(r.phi_star),
                r.step_norm.to_string(),
            ])
            .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read_csv(file)
    }

    /// Parses a trace; row numbers in errors count data rows from 1.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().flexible(true).from_reader(r);
        let headers = rd.headers().map_err(csv_err)?.clone();
        if headers.iter().collect::<Vec<_>>() != TRACE_HEADER {
            return Err(Error::Parse {
                row: 0,
                message: format!("expected header `{}`", TRACE_HEADER.join(",")),
            });
        }
        let mut records = Vec::new();
        for (idx, rec) in rd.records().enumerate() {
            let row = idx + 1;
            let rec = rec.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            if rec.len() != TRACE_HEADER.len() {
                return Err(Error::Parse {
                    row,
                    message: format!("expected {} fields, found {}", TRACE_HEADER.len(), rec.len()),
                });
            }
            let bad = |col: &str, v: &str| Error::Parse {
                row,
                message: format!("column `{col}`: cannot parse `{v}`"),
            };
            let num = |j: usize| -> Result<f64> {
                let v = rec[j].trim();
                v.parse::<f64>().map_err(|_| bad(TRACE_HEADER[j], v))
            };
            let maybe = |j: usize| -> Result<Option<f64>> {
                if rec[j].trim().is_empty() {
                    Ok(None)
                } else {
                    num(j).map(Some)
                }
            };
            let k = rec[0].trim().parse::<usize>().map_err(|_| bad("k", &rec[0]))?;
            let i_k = rec[1].trim().parse::<u32>().map_err(|_| bad("i_k", &rec[1]))?;
            records.push(IterationRecord {
                k,
                i_k,
                l: num(2)?,
                f: num(3)?,
                f_tilde: num(4)?,
                grad_map_norm: maybe(5)?,
                tau: maybe(6)?,
                a: maybe(7)?,
                a_total: maybe(8)?,
                phi_star: maybe(9)?,
                step_norm: num(10)?,
            });
        }
        Ok(Trace { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_full_precision() {
        let mut r = IterationRecord::basic(0, 2, 0.1 + 0.2, 1.0 / 3.0, 1e-300, 0.0);
        r.tau = Some(std::f64::consts::PI);
        let t = Trace { records: vec![r] };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,i_k,L,f,f_tilde,grad_map_norm,tau,a,A,phi_star,step_norm\n"));
        assert_eq!(Trace::read_csv(&buf[..]).unwrap(), t);
    }

    #[test]
    fn parse_errors_name_the_row() {
        let text = format!("{}\n0,0,1,1,1,,,,,,0\n1,x,1,1,1,,,,,,0\n", TRACE_HEADER.join(","));
        match Trace::read_csv(text.as_bytes()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("{other:?}"),
        }
        assert!(Trace::read_csv("a,b\n".as_bytes()).is_err());
    }
}
