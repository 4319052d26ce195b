//! Natural cubic spline used for smile interpolation and EMD envelopes.
//!
//! Second derivatives are solved with the Thomas algorithm under natural
//! boundary conditions (S'' = 0 at both end knots). Affine data is
//! reproduced exactly up to rounding, and evaluation at a knot returns the
//! stored ordinate bit-for-bit.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplineError {
    #[error("spline needs at least 2 knots, got {0}")]
    TooFewKnots(usize),
    #[error("knot abscissae must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("x and y lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("non-finite knot value at index {0}")]
    NonFinite(usize),
}

/// Behaviour for queries outside `[x_first, x_last]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extrapolation {
    /// Return the ordinate of the nearest end knot.
    #[default]
    Clamp,
    /// Continue the end polynomial.
    Extend,
}

#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(xs: &[f64], ys: &[f64]) -> Result<Self, SplineError> {
        let n = xs.len();
        if n != ys.len() {
            return Err(SplineError::LengthMismatch(n, ys.len()));
        }
        if n < 2 {
            return Err(SplineError::TooFewKnots(n));
        }
        for i in 0..n {
            if !xs[i].is_finite() || !ys[i].is_finite() {
                return Err(SplineError::NonFinite(i));
            }
            if i > 0 && xs[i] <= xs[i - 1] {
                return Err(SplineError::NotIncreasing(i));
            }
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // Interior system: h[i-1] m[i-1] + 2(h[i-1]+h[i]) m[i] + h[i] m[i+1] = rhs[i]
            let k = n - 2;
            let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for j in 0..k {
                let i = j + 1;
                diag[j] = 2.0 * (h[i - 1] + h[i]);
                upper[j] = h[i];
                rhs[j] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
            }
            // forward sweep; lower[j] = h[j] (= h[i-1])
            for j in 1..k {
                let w = h[j] / diag[j - 1];
                diag[j] -= w * upper[j - 1];
                rhs[j] -= w * rhs[j - 1];
            }
            let mut sol = vec![0.0; k];
            sol[k - 1] = rhs[k - 1] / diag[k - 1];
            for j in (0..k - 1).rev() {
                sol[j] = (rhs[j] - upper[j] * sol[j + 1]) / diag[j];
            }
            m[1..n - 1].copy_from_slice(&sol);
        }
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with(x, Extrapolation::Clamp)
    }

    pub fn eval_with(&self, x: f64, extrapolation: Extrapolation) -> f64 {
        let n = self.xs.len();
        if extrapolation == Extrapolation::Clamp {
            if x <= self.xs[0] {
                return self.ys[0];
            }
            if x >= self.xs[n - 1] {
                return self.ys[n - 1];
            }
        }
        // exact knot hits return the stored ordinate
        let i = match self.xs.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => return self.ys[i],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        self.eval_segment(i, x)
    }

    fn eval_segment(&self, i: usize, x: f64) -> f64 {
        let h = self.xs[i + 1] - self.xs[i];
        let a = self.xs[i + 1] - x;
        let b = x - self.xs[i];
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        (m0 * a * a * a + m1 * b * b * b) / (6.0 * h)
            + (self.ys[i] / h - m0 * h / 6.0) * a
            + (self.ys[i + 1] / h - m1 * h / 6.0) * b
    }

    /// Evaluates at every integer abscissa `0..len`, walking segments in order.
    pub fn eval_on_index_grid(&self, len: usize) -> Vec<f64> {
        let n = self.xs.len();
        let mut out = Vec::with_capacity(len);
        let mut seg = 0usize;
        for t in 0..len {
            let x = t as f64;
            while seg + 2 < n && x > self.xs[seg + 1] {
                seg += 1;
            }
            let v = if x == self.xs[seg] {
                self.ys[seg]
            } else if x == self.xs[seg + 1] {
                self.ys[seg + 1]
            } else {
                self.eval_segment(seg, x)
            };
            out.push(v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn knots_are_reproduced_exactly() {
        let xs = [0.6, 0.9, 0.975, 1.0, 1.025, 1.1, 1.3];
        let ys = [0.35, 0.25, 0.22, 0.21, 0.205, 0.2, 0.21];
        let s = CubicSpline::natural(&xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(ys.iter()) {
            assert_eq!(s.eval(*x), *y);
        }
    }

    #[test]
    fn two_knots_is_linear() {
        let s = CubicSpline::natural(&[0.0, 2.0], &[1.0, 3.0]).unwrap();
        assert!((s.eval(0.5) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn clamp_and_extend() {
        let s = CubicSpline::natural(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.eval(-1.0), 0.0);
        assert!((s.eval_with(3.0, Extrapolation::Extend) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_knots() {
        assert_eq!(
            CubicSpline::natural(&[0.0, 0.0], &[1.0, 1.0]).unwrap_err(),
            SplineError::NotIncreasing(1)
        );
        assert_eq!(
            CubicSpline::natural(&[0.0], &[1.0]).unwrap_err(),
            SplineError::TooFewKnots(1)
        );
    }

    #[test]
    fn index_grid_matches_pointwise() {
        let xs = [-2.0, 3.0, 7.5, 12.0, 20.0];
        let ys = [1.0, -1.0, 0.5, 2.0, -0.3];
        let s = CubicSpline::natural(&xs, &ys).unwrap();
        let grid = s.eval_on_index_grid(20);
        for (t, v) in grid.iter().enumerate() {
            assert!((v - s.eval(t as f64)).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn reproduces_affine_data(a in -2.0f64..2.0, b in -2.0f64..2.0, q in 0.0f64..1.0) {
            let xs = [0.0, 0.3, 1.1, 1.5, 2.9, 4.0];
            let ys: Vec<f64> = xs.iter().map(|x| a + b * x).collect();
            let s = CubicSpline::natural(&xs, &ys).unwrap();
            let x = 4.0 * q;
            prop_assert!((s.eval(x) - (a + b * x)).abs() < 1e-12);
        }
    }
}
