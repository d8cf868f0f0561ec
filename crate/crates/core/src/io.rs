//! File formats.
//!
//! * coefficients: `{"coeffs": [c0, …, c8]}` in index order (`m = −4 … 4`);
//! * sphere samples: CSV `theta,phi,value`, row-major over the grid;
//! * descent traces: CSV `iter,penalty,sqrt_penalty,step,grad_norm,distance`,
//!   with an empty distance field when distance was not tracked.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sh4::{Sh4Coeffs, SphereSampleGrid};
use crate::variety::DescentTrace;

#[derive(Serialize, Deserialize)]
struct CoeffFile {
    coeffs: Vec<f64>,
}

pub fn coeffs_from_json(s: &str) -> Result<Sh4Coeffs> {
    let file: CoeffFile = serde_json::from_str(s)?;
    Sh4Coeffs::try_from_slice(&file.coeffs)
}

pub fn coeffs_to_json(a: &Sh4Coeffs) -> String {
    let file = CoeffFile {
        coeffs: a.to_array().to_vec(),
    };
    serde_json::to_string(&file).expect("plain numbers serialize")
}

pub fn read_coeffs<R: Read>(mut r: R) -> Result<Sh4Coeffs> {
    let mut s = String::new();
    r.read_to_string(&mut s)?;
    coeffs_from_json(&s)
}

pub fn write_coeffs<W: Write>(mut w: W, a: &Sh4Coeffs) -> Result<()> {
    writeln!(w, "{}", coeffs_to_json(a))?;
    Ok(())
}

pub const SAMPLE_HEADER: &str = "theta,phi,value";
pub const TRACE_HEADER: &str = "iter,penalty,sqrt_penalty,step,grad_norm,distance";

pub fn write_sample_csv<W: Write>(mut w: W, grid: &SphereSampleGrid) -> Result<()> {
    writeln!(w, "{SAMPLE_HEADER}")?;
    for j in 0..grid.n_theta() {
        for k in 0..grid.n_phi() {
            writeln!(w, "{:e},{:e},{:e}", grid.theta(j), grid.phi(k), grid.value(j, k))?;
        }
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(mut w: W, trace: &DescentTrace) -> Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in &trace.records {
        let distance = r.distance.map(|d| format!("{d:e}")).unwrap_or_default();
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e},{}",
            r.index, r.penalty, r.sqrt_penalty, r.step_size, r.gradient_norm, distance
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::sh4::{reference_harmonic, sample_sphere};
    use crate::variety::{symmetrize, DescentConfig};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn json_round_trip(c in prop::array::uniform9(-1e6f64..1e6)) {
            let a = Sh4Coeffs::from_array(c);
            let back = coeffs_from_json(&coeffs_to_json(&a)).unwrap();
            prop_assert_eq!(back, a);
        }
    }

    #[test]
    fn json_rejects_bad_input() {
        assert!(matches!(coeffs_from_json("{\"coeffs\": [1, 2]}"), Err(Error::WrongLength(2))));
        assert!(matches!(coeffs_from_json("not json"), Err(Error::Json(_))));
        assert!(coeffs_from_json("{\"c\": []}").is_err());
    }

    #[test]
    fn sample_csv_layout() {
        let grid = sample_sphere(&reference_harmonic(), 3, 4).unwrap();
        let mut out = Vec::new();
        write_sample_csv(&mut out, &grid).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], SAMPLE_HEADER);
        assert_eq!(lines.len(), 1 + 12);
        let second: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(second[0], 0.0);
        assert_eq!(second[1], grid.phi(1));
        assert_eq!(second[2], grid.value(0, 1));
    }

    #[test]
    fn trace_csv_distance_column() {
        let a0 = 1.2 * reference_harmonic();
        let trace = symmetrize(&a0, &DescentConfig::default()).unwrap();
        let mut out = Vec::new();
        write_trace_csv(&mut out, &trace).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        for line in lines {
            let fields: Vec<_> = line.split(',').collect();
            assert_eq!(fields.len(), 6);
            assert_eq!(fields[5], "");
        }
    }
}
