//! Plot-ready CSV files with the fixed schema `x,y,yerr,series`.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub const PLOT_HEADER: &str = "x,y,yerr,series";

#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub yerr: f64,
    pub series: String,
}

impl PlotPoint {
    pub fn new(x: f64, y: f64, yerr: f64, series: impl Into<String>) -> Self {
        Self {
            x,
            y,
            yerr,
            series: series.into(),
        }
    }
}

pub fn write_plot<W: Write>(points: &[PlotPoint], mut w: W) -> io::Result<()> {
    writeln!(w, "{PLOT_HEADER}")?;
    for p in points {
        writeln!(w, "{:e},{:e},{:e},{}", p.x, p.y, p.yerr, p.series)?;
    }
    w.flush()
}

/// Write `points` to `dir/name`.
pub fn emit_plot_data(dir: &Path, name: &str, points: &[PlotPoint]) -> io::Result<()> {
    write_plot(points, BufWriter::new(fs::File::create(dir.join(name))?))
}
