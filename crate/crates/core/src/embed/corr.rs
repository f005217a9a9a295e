//! Circular correlation and convolution kernels for HolE: a naive O(d^2)
//! path and an FFT-based O(d log d) path that must agree.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::num::{scalar, Scalar};

use super::EmbedError;

/// Naive circular correlation: (a star b)_k = sum_i a_i * b_{(i+k) mod d}.
pub fn circular_correlation_naive<S: Scalar>(a: &[S], b: &[S]) -> Result<Vec<S>, EmbedError> {
    if a.len() != b.len() {
        return Err(EmbedError::LengthMismatch(a.len(), b.len()));
    }
    let d = a.len();
    let mut out = vec![S::zero(); d];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = S::zero();
        for i in 0..d {
            acc = acc + a[i] * b[(i + k) % d];
        }
        *slot = acc;
    }
    Ok(out)
}

/// Naive circular convolution: (a conv b)_k = sum_i a_i * b_{(k-i) mod d}.
pub fn circular_convolution_naive<S: Scalar>(a: &[S], b: &[S]) -> Result<Vec<S>, EmbedError> {
    if a.len() != b.len() {
        return Err(EmbedError::LengthMismatch(a.len(), b.len()));
    }
    let d = a.len();
    let mut out = vec![S::zero(); d];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = S::zero();
        for i in 0..d {
            acc = acc + a[i] * b[(d + k - i) % d];
        }
        *slot = acc;
    }
    Ok(out)
}

fn fft_pair<S: Scalar>(a: &[S], b: &[S]) -> (Vec<Complex<S>>, Vec<Complex<S>>, FftPlanner<S>) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(a.len());
    let mut fa: Vec<Complex<S>> = a.iter().map(|&x| Complex::new(x, S::zero())).collect();
    let mut fb: Vec<Complex<S>> = b.iter().map(|&x| Complex::new(x, S::zero())).collect();
    fft.process(&mut fa);
    fft.process(&mut fb);
    (fa, fb, planner)
}

fn inverse_real<S: Scalar>(mut spectrum: Vec<Complex<S>>, planner: &mut FftPlanner<S>) -> Vec<S> {
    let d = spectrum.len();
    let ifft = planner.plan_fft_inverse(d);
    ifft.process(&mut spectrum);
    let norm: S = scalar(d as f64);
    spectrum.into_iter().map(|c| c.re / norm).collect()
}

/// FFT circular correlation: IFFT(conj(FFT(a)) . FFT(b)).
pub fn circular_correlation_fft<S: Scalar>(a: &[S], b: &[S]) -> Result<Vec<S>, EmbedError> {
    if a.len() != b.len() {
        return Err(EmbedError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let (fa, fb, mut planner) = fft_pair(a, b);
    let spectrum: Vec<Complex<S>> = fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect();
    Ok(inverse_real(spectrum, &mut planner))
}

/// FFT circular convolution: IFFT(FFT(a) . FFT(b)).
pub fn circular_convolution_fft<S: Scalar>(a: &[S], b: &[S]) -> Result<Vec<S>, EmbedError> {
    if a.len() != b.len() {
        return Err(EmbedError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let (fa, fb, mut planner) = fft_pair(a, b);
    let spectrum: Vec<Complex<S>> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    Ok(inverse_real(spectrum, &mut planner))
}

/// Naive below this length, FFT above: the per-call planner only pays off
/// for longer vectors.
const FFT_THRESHOLD: usize = 64;

pub fn circular_correlation<S: Scalar>(a: &[S], b: &[S]) -> Result<Vec<S>, EmbedError> {
    if a.len() <= FFT_THRESHOLD {
        circular_correlation_naive(a, b)
    } else {
        circular_correlation_fft(a, b)
    }
}

pub(crate) fn circular_correlation_dispatch<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    circular_correlation(a, b).expect("equal lengths inside a state")
}

pub(crate) fn circular_convolution_dispatch<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let result = if a.len() <= FFT_THRESHOLD {
        circular_convolution_naive(a, b)
    } else {
        circular_convolution_fft(a, b)
    };
    result.expect("equal lengths inside a state")
}
