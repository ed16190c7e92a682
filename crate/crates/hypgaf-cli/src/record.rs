//! Output records and their CSV/JSON renderings.
//!
//! Every float is printed with 17 significant digits (`{:.16e}`), so the
//! emitted text round-trips to the exact same doubles on parse.

use serde::{Deserialize, Serialize};
use std::io;

/// One evaluated parameter point, as written to sweep tables and printed
/// by the `variance` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Intensity.
    #[serde(rename = "L")]
    pub l: f64,
    /// Disc radius.
    pub r: f64,
    /// Method actually used: quad, closed, residue, asymptotic, crossover, mc.
    pub method: String,
    /// `E[n_L(r)]` (for mc: the estimated mean).
    pub expected_count: f64,
    /// `V[n_L(r)]` by the chosen method (for mc: the sample variance).
    pub variance: f64,
    /// Quadrature error estimate, or the half-width of the mc variance CI;
    /// absent for the asymptotic and crossover formulas.
    pub err_est_or_ci: Option<f64>,
    /// Regime classification at this point.
    pub regime: String,
    /// Wall-clock time of the evaluation in milliseconds.
    pub wall_time_ms: u64,
}

/// The fixed sweep CSV header.
pub const CSV_HEADER: &str = "L,r,method,mean,variance,err,regime,ms";

/// Render records as a CSV table under [`CSV_HEADER`]. A missing error
/// estimate becomes an empty cell.
pub fn to_csv(records: &[RunRecord]) -> String {
    let mut out = String::with_capacity(64 + 160 * records.len());
    out.push_str(CSV_HEADER);
    out.push('\n');
    for rec in records {
        let err = match rec.err_est_or_ci {
            Some(e) => format!("{e:.16e}"),
            None => String::new(),
        };
        out.push_str(&format!(
            "{:.16e},{:.16e},{},{:.16e},{:.16e},{},{},{}\n",
            rec.l, rec.r, rec.method, rec.expected_count, rec.variance, err, rec.regime,
            rec.wall_time_ms
        ));
    }
    out
}

/// JSON formatter that widens every double to 17 significant digits; all
/// other tokens use the default compact forms.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize any value to JSON with round-trippable doubles.
pub fn to_json_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("JSON serializer emits UTF-8"))
}
