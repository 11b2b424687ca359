//! Adaptive Gauss-Kronrod (7, 15) quadrature on finite intervals.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol |I|)`. Error per interval is
//! `|K15 - G7|`, which overstates the true error of the Kronrod value for
//! smooth integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn absolute(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol: 0.0,
            ..Self::default()
        }
    }
}

/// A value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, lo: f64, hi: f64) -> Result<Piece> {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx)? + f(c + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * h;
    let error = ((kronrod - gauss) * h).abs();
    if !value.is_finite() {
        return Err(Error::Quadrature {
            lo,
            hi,
            value,
            error,
            intervals: 1,
        });
    }
    Ok(Piece { lo, hi, value, error })
}

/// Integrate a fallible integrand over `[lo, hi]`, splitting first at the
/// given interior breakpoints (out-of-range ones are ignored).
pub fn integrate_with<F>(mut f: F, lo: f64, hi: f64, breakpoints: &[f64], opts: QuadOptions) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::usage(format!("bad integration bounds [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > lo && b < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        heap.push(gk15(&mut f, w[0], w[1])?);
    }
    loop {
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(Estimate { value, error });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if heap.len() + 2 > opts.max_intervals || !(mid > worst.lo && mid < worst.hi) {
            return Err(Error::Quadrature {
                lo,
                hi,
                value,
                error,
                intervals: heap.len() + 1,
            });
        }
        heap.push(gk15(&mut f, worst.lo, mid)?);
        heap.push(gk15(&mut f, mid, worst.hi)?);
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, opts: QuadOptions) -> Result<Estimate> {
    integrate_with(|x| Ok(f(x)), lo, hi, &[], opts)
}
