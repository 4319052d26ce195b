use serde::{Deserialize, Serialize};

use super::DecomposeError;
use crate::spline::CubicSpline;
use crate::stats;

pub const MIN_EMD_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmdConfig {
    pub max_imf: usize,
    pub sift_tolerance: f64,
    pub max_sifts: usize,
}

impl Default for EmdConfig {
    fn default() -> Self {
        Self {
            max_imf: 10,
            sift_tolerance: 0.2,
            max_sifts: 50,
        }
    }
}

/// Intrinsic mode functions, fastest first, plus the residual trend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImfSet {
    pub imfs: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
}

impl ImfSet {
    pub fn len(&self) -> usize {
        self.imfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.imfs.is_empty()
    }

    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residual.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf) {
                *o += v;
            }
        }
        out
    }
}

/// Indices of local maxima and minima; a flat run counts once, at its middle.
pub fn extrema(xs: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    let n = xs.len();
    if n < 3 {
        return (maxima, minima);
    }
    let mut prev_dir = 0i8;
    let mut run_start = 0usize;
    for i in 1..n {
        let d = xs[i] - xs[i - 1];
        let dir = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if dir == 0 {
            continue;
        }
        if prev_dir == 1 && dir == -1 {
            maxima.push((run_start + i - 1) / 2);
        } else if prev_dir == -1 && dir == 1 {
            minima.push((run_start + i - 1) / 2);
        }
        prev_dir = dir;
        run_start = i;
    }
    (maxima, minima)
}

pub fn zero_crossings(xs: &[f64]) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for x in xs {
        if *x == 0.0 {
            continue;
        }
        if last != 0.0 && (last > 0.0) != (*x > 0.0) {
            count += 1;
        }
        last = *x;
    }
    count
}

/// Extrema count and zero-crossing count differ by at most one.
pub fn is_imf(xs: &[f64]) -> bool {
    let (mx, mn) = extrema(xs);
    (mx.len() + mn.len()).abs_diff(zero_crossings(xs)) <= 1
}

// Reflects the two outermost extrema about each end of the sample.
fn envelope(xs: &[f64], idx: &[usize]) -> Vec<f64> {
    let n = xs.len();
    let last = (n - 1) as f64;
    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(idx.len() + 4);
    for &i in idx.iter().take(2).rev() {
        knots.push((-(i as f64), xs[i]));
    }
    knots.extend(idx.iter().map(|&i| (i as f64, xs[i])));
    for &i in idx.iter().rev().take(2) {
        knots.push((2.0 * last - i as f64, xs[i]));
    }
    // an extremum sitting on an end reflects onto itself
    knots.dedup_by(|a, b| a.0 == b.0);
    let (kx, ky): (Vec<f64>, Vec<f64>) = knots.into_iter().unzip();
    CubicSpline::natural(&kx, &ky)
        .expect("reflected knots are strictly increasing")
        .eval_on_index_grid(n)
}

fn is_monotone_residual(xs: &[f64]) -> bool {
    let (mx, mn) = extrema(xs);
    mx.is_empty() || mn.is_empty()
}

fn sift(mut h: Vec<f64>, config: &EmdConfig) -> Vec<f64> {
    for _ in 0..config.max_sifts {
        let (mx, mn) = extrema(&h);
        if mx.is_empty() || mn.is_empty() {
            break;
        }
        let upper = envelope(&h, &mx);
        let lower = envelope(&h, &mn);
        let mut num = 0.0;
        let mut den = 0.0;
        let next: Vec<f64> = h
            .iter()
            .zip(upper.iter().zip(&lower))
            .map(|(v, (u, l))| {
                let m = 0.5 * (u + l);
                num += m * m;
                den += v * v;
                v - m
            })
            .collect();
        h = next;
        let sd = if den > 0.0 { num / den } else { 0.0 };
        if sd < config.sift_tolerance && is_imf(&h) {
            break;
        }
    }
    h
}

pub fn emd(xs: &[f64], config: &EmdConfig) -> Result<ImfSet, DecomposeError> {
    if xs.len() < MIN_EMD_LEN {
        return Err(DecomposeError::SeriesTooShort {
            needed: MIN_EMD_LEN,
            got: xs.len(),
        });
    }
    let first = xs[0];
    if xs.iter().all(|x| *x == first) {
        return Err(DecomposeError::ConstantSeries);
    }
    let mut residual = xs.to_vec();
    let mut imfs = Vec::new();
    while imfs.len() < config.max_imf && !is_monotone_residual(&residual) {
        let imf = sift(residual.clone(), config);
        for (r, v) in residual.iter_mut().zip(&imf) {
            *r -= v;
        }
        imfs.push(imf);
    }
    Ok(ImfSet { imfs, residual })
}

/// How many leading IMFs form the high-frequency part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitK {
    Fixed(usize),
    /// One less than the first IMF whose mean is nonzero at 5%.
    Auto,
}

impl Default for SplitK {
    fn default() -> Self {
        SplitK::Fixed(4)
    }
}

pub fn auto_k(imfs: &ImfSet) -> usize {
    imfs.imfs
        .iter()
        .position(|imf| stats::one_sample_t_pvalue(imf) < 0.05)
        .unwrap_or(imfs.len())
}

/// `(hfs, lfs, k)` with HFS the sum of IMFs `1..=k`.
pub fn emd_split_values(
    imfs: &ImfSet,
    k: SplitK,
) -> Result<(Vec<f64>, Vec<f64>, usize), DecomposeError> {
    let k = match k {
        SplitK::Fixed(k) => k,
        SplitK::Auto => auto_k(imfs),
    };
    if imfs.len() < k {
        return Err(DecomposeError::TooFewImfs {
            needed: k,
            got: imfs.len(),
        });
    }
    let n = imfs.residual.len();
    let mut hfs = vec![0.0; n];
    let mut lfs = imfs.residual.clone();
    for (i, imf) in imfs.imfs.iter().enumerate() {
        let target = if i < k { &mut hfs } else { &mut lfs };
        for (t, v) in target.iter_mut().zip(imf) {
            *t += v;
        }
    }
    Ok((hfs, lfs, k))
}
