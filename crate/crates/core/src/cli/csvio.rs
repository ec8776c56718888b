//! Time-series CSV: header `step,hours,<channel>...`, LF line endings and
//! floats with 9 significant digits.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::sim::TimeSeriesFrame;

/// `%.9g`-style formatting.
pub fn format_g9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    let sci = format!("{v:.8e}");
    // rounding may carry into the next decade, so trust the printed exponent
    let (mantissa, e) = sci.split_once('e').expect("exponent present");
    let e: i32 = e.parse().unwrap_or(exp);
    if (-5..9).contains(&e) {
        let decimals = (8 - e).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if e < 0 { '-' } else { '+' }, e.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_frame<W: Write>(frame: &TimeSeriesFrame, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["step".to_string(), "hours".to_string()];
    header.extend(frame.channels().iter().cloned());
    w.write_record(&header)?;
    for r in 0..frame.len() {
        let mut rec = vec![frame.step(r).to_string(), format_g9(frame.hours(r))];
        rec.extend(frame.values().row(r).iter().map(|&v| format_g9(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_frame_file(frame: &TimeSeriesFrame, path: &Path) -> Result<()> {
    write_frame(frame, File::create(path)?)
}

/// Parses a frame written by [`write_frame`]. `dt` is recovered from the
/// first two rows; a single-row file is assumed hourly.
pub fn read_frame<R: Read>(input: R) -> Result<TimeSeriesFrame> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "step" || &header[1] != "hours" {
        return Err(Error::Config(
            "CSV header must start with `step,hours` followed by at least one channel".into(),
        ));
    }
    let channels: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut steps = Vec::new();
    let mut hours = Vec::new();
    let mut data = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |col: usize| Error::Config(format!("CSV row {}: cannot parse column {}", line + 2, col + 1));
        steps.push(rec[0].trim().parse::<i64>().map_err(|_| bad(0))?);
        hours.push(rec[1].trim().parse::<f64>().map_err(|_| bad(1))?);
        for c in 2..rec.len() {
            data.push(rec[c].trim().parse::<f64>().map_err(|_| bad(c))?);
        }
    }
    if steps.is_empty() {
        return Err(Error::Config("CSV has no data rows".into()));
    }
    if steps.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::Config("CSV steps must be consecutive integers".into()));
    }
    let dt = if steps.len() > 1 {
        (hours[1] - hours[0]) * 3600.0
    } else {
        3600.0
    };
    let values = Matrix::from_row_slice(steps.len(), channels.len(), &data);
    TimeSeriesFrame::new(dt, steps[0], channels, values)
}

pub fn read_frame_file(path: &Path) -> Result<TimeSeriesFrame> {
    read_frame(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_formatting() {
        assert_eq!(format_g9(0.0), "0");
        assert_eq!(format_g9(1.5), "1.5");
        assert_eq!(format_g9(-12.25), "-12.25");
        assert_eq!(format_g9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_g9(123456789.4), "123456789");
        assert_eq!(format_g9(1.0e-7), "1e-07");
        assert_eq!(format_g9(2.5e12), "2.5e+12");
        assert_eq!(format_g9(9.9999999999), "10");
    }

    #[test]
    fn round_trip_is_stable() {
        let values = Matrix::from_fn(5, 2, |r, c| (r as f64 + 1.0) / 7.0 - c as f64 * 1e-6);
        let f = TimeSeriesFrame::new(3600.0, 3, vec!["a".into(), "b".into()], values).unwrap();
        let mut first = Vec::new();
        write_frame(&f, &mut first).unwrap();
        let text = String::from_utf8(first.clone()).unwrap();
        assert!(text.starts_with("step,hours,a,b\n3,3,"));
        assert!(!text.contains('\r'));
        let back = read_frame(first.as_slice()).unwrap();
        assert_eq!(back.start_index(), 3);
        assert_eq!(back.dt(), 3600.0);
        assert!((back.values() - f.values()).amax() < 1e-9);
        let mut second = Vec::new();
        write_frame(&back, &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_frame("a,b,c\n1,2,3\n".as_bytes()).is_err());
        assert!(read_frame("step,hours,x\n".as_bytes()).is_err());
        assert!(read_frame("step,hours,x\n0,0,abc\n".as_bytes()).is_err());
        assert!(read_frame("step,hours,x\n0,0,1\n2,2,1\n".as_bytes()).is_err());
    }
}
