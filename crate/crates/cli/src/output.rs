use std::path::Path;

use diracpdm::SpinorField;
use serde::Serialize;

use crate::report::SweepRow;
use crate::CliError;

#[derive(Serialize)]
struct WaveRow {
    x: f64,
    re_psi1: f64,
    im_psi1: f64,
    re_psi2: f64,
    im_psi2: f64,
    /// |psi|^2 h, so the column sums to the grid norm.
    prob_density: f64,
}

/// Header row plus one row per node; floats in shortest round-trip form.
pub fn write_wavefunction(path: &Path, psi: &SpinorField) -> Result<(), CliError> {
    let grid = psi.grid();
    let h = grid.spacing();
    let mut w = csv::Writer::from_path(path)?;
    for (j, &x) in grid.nodes().iter().enumerate() {
        let (a, b) = (psi.upper()[j], psi.lower()[j]);
        w.serialize(WaveRow {
            x,
            re_psi1: a.re,
            im_psi1: a.im,
            re_psi2: b.re,
            im_psi2: b.im,
            prob_density: (a.norm_sqr() + b.norm_sqr()) * h,
        })?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
