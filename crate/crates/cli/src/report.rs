//! JSON and CSV emitters. Floats are always written with 17 significant
//! digits so that parsing a report recovers every value bit for bit.

use std::io::{self, Write};
use std::path::Path;

use driftbound::optimizer::GammaProbe;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::CliError;

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

struct Sig17<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("reports serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// One line of a schedule table, in the column order `m, t, n, total cost`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub setting: Option<u8>,
    pub alpha: f64,
    pub algorithm: String,
    pub m: u64,
    pub t: u64,
    pub n: u64,
    pub total_cost: u64,
}

/// Writes schedule rows; the `setting` column appears when any row has one.
pub fn write_rows(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    let with_setting = rows.iter().any(|r| r.setting.is_some());
    let mut w = csv::Writer::from_path(path)?;
    let header = ["setting", "alpha", "algorithm", "m", "t", "n", "total_cost"];
    w.write_record(if with_setting { &header[..] } else { &header[1..] })?;
    for r in rows {
        let mut rec = vec![fmt17(r.alpha), r.algorithm.clone(), r.m.to_string(), r.t.to_string(), r.n.to_string(), r.total_cost.to_string()];
        if with_setting {
            rec.insert(0, r.setting.map_or(String::new(), |s| s.to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_probes(path: &Path, probes: &[GammaProbe]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["gamma", "gamma_r", "cost"])?;
    for p in probes {
        w.write_record([fmt17(p.gamma), fmt17(p.gamma_r), fmt17(p.cost)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
pub fn read_rows(path: &Path) -> Result<Vec<Row>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1e-5, 0.915, std::f64::consts::PI, 6.46e13, 5e-324, 0.0] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert_eq!(s.split('e').next().unwrap().replace(['.', '-'], "").len(), 17, "{s}");
        }
    }

    #[test]
    fn json_floats_use_fixed_precision() {
        let json = to_json(&serde_json::json!({"x": 0.1, "n": 3}));
        assert!(json.contains("1.0000000000000001e-1"), "{json}");
        assert!(json.contains("\"n\": 3"), "{json}");
    }

    #[test]
    fn csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![
            Row { setting: None, alpha: 0.1, algorithm: "one walk".into(), m: 1, t: 229, n: 101_023_136, total_cost: 101_023_365 },
            Row { setting: None, alpha: 1e-5, algorithm: "MA".into(), m: 27, t: 218, n: 5_396_777_444, total_cost: 145_718_876_874 },
        ];
        write_rows(&path, &rows).unwrap();
        assert_eq!(read_rows(&path).unwrap(), rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("alpha,algorithm,m,t,n,total_cost\n"), "{text}");
    }
}
