use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::DecomposeError;

/// Range of periods searched by the automatic cutoff.
pub const AUTO_PERIOD_BAND: (f64, f64) = (10.0, 30.0);

fn forward(xs: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = xs.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

fn inverse_real(mut spec: Vec<Complex64>) -> Vec<f64> {
    let n = spec.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    spec.into_iter().map(|c| c.re / n as f64).collect()
}

/// Period in samples of DFT bin `k` (infinite for the mean bin).
pub fn bin_period(n: usize, k: usize) -> f64 {
    let f = k.min(n - k);
    if f == 0 {
        f64::INFINITY
    } else {
        n as f64 / f as f64
    }
}

/// One-sided amplitude spectrum of the mean-removed series: `(period, amplitude)`
/// for bins 1..=n/2.
pub fn amplitude_spectrum(xs: &[f64]) -> Vec<(f64, f64)> {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let spec = forward(&centred);
    (1..=n / 2)
        .map(|k| {
            let scale = if 2 * k == n { 1.0 } else { 2.0 };
            (bin_period(n, k), scale * spec[k].norm() / n as f64)
        })
        .collect()
}

/// Period of the amplitude minimum inside [`AUTO_PERIOD_BAND`].
pub fn auto_cutoff_period(xs: &[f64]) -> Option<f64> {
    let (lo, hi) = AUTO_PERIOD_BAND;
    amplitude_spectrum(xs)
        .into_iter()
        .filter(|(p, _)| *p >= lo && *p <= hi)
        .min_by(|a, b| a.1.total_cmp(&b.1).then(b.0.total_cmp(&a.0)))
        .map(|(p, _)| p)
}

/// Splits the mean-removed spectrum into bands by period.
///
/// `cutoffs` must be increasing; band `i` holds bins with period in
/// `[cutoffs[i-1], cutoffs[i])`, the last band also receives the mean.
pub fn fft_bands(xs: &[f64], cutoffs: &[f64]) -> Result<Vec<Vec<f64>>, DecomposeError> {
    let n = xs.len();
    let shortest = cutoffs.first().copied().unwrap_or(2.0);
    let needed = (4.0 * shortest).ceil() as usize;
    if n < needed.max(4) {
        return Err(DecomposeError::SeriesTooShort { needed, got: n });
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let spec = forward(&centred);
    let band_of = |k: usize| {
        let p = bin_period(n, k);
        cutoffs.iter().position(|c| p < *c).unwrap_or(cutoffs.len())
    };
    let mut out = Vec::with_capacity(cutoffs.len() + 1);
    for band in 0..=cutoffs.len() {
        let masked: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if band_of(k) == band {
                    *c
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        out.push(inverse_real(masked));
    }
    if let Some(last) = out.last_mut() {
        last.iter_mut().for_each(|v| *v += mean);
    }
    Ok(out)
}

/// `(hfs, lfs)`: periods below `cutoff_period` versus the rest plus the mean.
pub fn fft_split_values(
    xs: &[f64],
    cutoff_period: f64,
) -> Result<(Vec<f64>, Vec<f64>), DecomposeError> {
    let mut bands = fft_bands(xs, &[cutoff_period])?;
    let lfs = bands.pop().expect("two bands");
    let hfs = bands.pop().expect("two bands");
    Ok((hfs, lfs))
}
