use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{HarnessError, RunOutcome};
use crate::spectral::write_spectrum_csv;

/// Writes `report.json`, `spectrum_<label>_<n>.csv` for every computed
/// spectrum and `functionals_<label>.csv` for domains with functional grids.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    let mut json = outcome.report.to_json();
    json.push('\n');
    fs::write(dir.join("report.json"), json)?;
    write_spectrum_csvs(outcome, dir)?;
    for d in outcome
        .report
        .domains
        .iter()
        .filter(|d| !d.functionals.is_empty())
    {
        let mut out = BufWriter::new(File::create(
            dir.join(format!("functionals_{}.csv", d.label)),
        )?);
        writeln!(out, "functional,p,n,x,resolution,value")?;
        for f in &d.functionals {
            let shift = f.shift_power.map(|n| n.to_string()).unwrap_or_default();
            for s in &f.series.samples {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    f.functional, f.p, shift, f.x, s.n, s.value
                )?;
            }
        }
        out.flush()?;
    }
    Ok(())
}

pub fn write_spectrum_csvs(outcome: &RunOutcome, dir: &Path) -> Result<(), HarnessError> {
    for a in &outcome.spectra {
        let path = dir.join(format!("spectrum_{}_{}.csv", a.label, a.n));
        let mut out = BufWriter::new(File::create(path)?);
        write_spectrum_csv(&a.spectrum, &mut out)?;
        out.flush()?;
    }
    Ok(())
}
