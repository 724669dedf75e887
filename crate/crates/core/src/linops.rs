//! Linear sensing operators, the data-fidelity term and spectral-norm
//! estimation.
//!
//! Two concrete operators are provided: a dense row-major matrix and a masked
//! Fourier operator. The masked Fourier operator keeps all arithmetic real by
//! emitting, per sampled conjugate-frequency orbit, the real and imaginary
//! parts of the (unitary) 2-D DFT coefficient scaled by sqrt(2); self-conjugate
//! frequencies contribute a single real row. Rows built this way are
//! orthonormal, so the operator satisfies `apply . adjoint = identity` on the
//! measurement space and the full mask gives an orthogonal square transform.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use crate::error::{check_dim, Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Dense sensing matrix stored row-major.
#[derive(Debug, Clone)]
pub struct DenseSensingMatrix {
    matrix: Array2<f64>,
}

impl DenseSensingMatrix {
    pub fn new(matrix: Array2<f64>) -> Result<Self> {
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dense sensing matrix entries"));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: Array2::eye(n),
        }
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }
}

/// One conjugate-frequency orbit of the sampling mask. `partner == rep`
/// marks a self-conjugate frequency (DC or a Nyquist line crossing).
#[derive(Debug, Clone, Copy)]
struct Orbit {
    rep: usize,
    partner: usize,
}

/// Binary frequency-sampling mask composed with the orthonormal 2-D DFT.
///
/// The mask is a set of flat frequency indices `u * w + v`. Measurements are
/// produced per conjugate orbit of the mask closure, which makes the rows
/// orthonormal regardless of whether the stored mask is conjugate-symmetric.
#[derive(Clone)]
pub struct MaskedFourierOperator {
    h: usize,
    w: usize,
    mask: Vec<u32>,
    orbits: Vec<Orbit>,
    n_out: usize,
    fft_row_fwd: Arc<dyn Fft<f64>>,
    fft_col_fwd: Arc<dyn Fft<f64>>,
    fft_row_inv: Arc<dyn Fft<f64>>,
    fft_col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for MaskedFourierOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MaskedFourierOperator")
            .field("h", &self.h)
            .field("w", &self.w)
            .field("mask_len", &self.mask.len())
            .field("n_out", &self.n_out)
            .finish()
    }
}

impl MaskedFourierOperator {
    pub fn new(h: usize, w: usize, mask_indices: &[u32]) -> Result<Self> {
        if h == 0 || w == 0 {
            return Err(Error::InvalidParameter("grid dimensions must be positive".into()));
        }
        let n = h * w;
        let mut mask: Vec<u32> = mask_indices.to_vec();
        mask.sort_unstable();
        mask.dedup();
        if let Some(&bad) = mask.iter().find(|&&i| (i as usize) >= n) {
            return Err(Error::InvalidParameter(format!(
                "mask index {bad} out of range for {h}x{w} grid"
            )));
        }

        let conj = |flat: usize| -> usize {
            let u = flat / w;
            let v = flat % w;
            ((h - u) % h) * w + ((w - v) % w)
        };
        let mut reps: Vec<usize> = mask
            .iter()
            .map(|&i| {
                let i = i as usize;
                i.min(conj(i))
            })
            .collect();
        reps.sort_unstable();
        reps.dedup();
        let orbits: Vec<Orbit> = reps
            .into_iter()
            .map(|rep| Orbit {
                rep,
                partner: conj(rep),
            })
            .collect();
        let n_out = orbits
            .iter()
            .map(|o| if o.rep == o.partner { 1 } else { 2 })
            .sum();

        let mut planner = FftPlanner::new();
        Ok(Self {
            h,
            w,
            mask,
            orbits,
            n_out,
            fft_row_fwd: planner.plan_fft_forward(w),
            fft_col_fwd: planner.plan_fft_forward(h),
            fft_row_inv: planner.plan_fft_inverse(w),
            fft_col_inv: planner.plan_fft_inverse(h),
        })
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.h, self.w)
    }

    pub fn mask(&self) -> &[u32] {
        &self.mask
    }

    /// Unitary 2-D DFT of a real image given as a flat row-major vector.
    fn fft2(&self, x: &Array1<f64>) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fft2_in_place(&mut buf, true);
        buf
    }

    fn fft2_in_place(&self, buf: &mut [Complex<f64>], forward: bool) {
        let (row_fft, col_fft) = if forward {
            (&self.fft_row_fwd, &self.fft_col_fwd)
        } else {
            (&self.fft_row_inv, &self.fft_col_inv)
        };
        for row in buf.chunks_exact_mut(self.w) {
            row_fft.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); self.h];
        for j in 0..self.w {
            for i in 0..self.h {
                col[i] = buf[i * self.w + j];
            }
            col_fft.process(&mut col);
            for i in 0..self.h {
                buf[i * self.w + j] = col[i];
            }
        }
        let scale = 1.0 / ((self.h * self.w) as f64).sqrt();
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    fn apply_impl(&self, x: &Array1<f64>) -> Array1<f64> {
        let spectrum = self.fft2(x);
        let mut out = Vec::with_capacity(self.n_out);
        for o in &self.orbits {
            let c = spectrum[o.rep];
            if o.rep == o.partner {
                out.push(c.re);
            } else {
                out.push(SQRT_2 * c.re);
                out.push(SQRT_2 * c.im);
            }
        }
        Array1::from_vec(out)
    }

    fn adjoint_impl(&self, meas: &Array1<f64>) -> Array1<f64> {
        let n = self.h * self.w;
        let mut spectrum = vec![Complex::new(0.0, 0.0); n];
        let mut pos = 0;
        for o in &self.orbits {
            if o.rep == o.partner {
                spectrum[o.rep] = Complex::new(meas[pos], 0.0);
                pos += 1;
            } else {
                let alpha = Complex::new(meas[pos] / SQRT_2, meas[pos + 1] / SQRT_2);
                spectrum[o.rep] = alpha;
                spectrum[o.partner] = alpha.conj();
                pos += 2;
            }
        }
        self.fft2_in_place(&mut spectrum, false);
        Array1::from_iter(spectrum.iter().map(|c| c.re))
    }
}

/// A linear sensing operator with an exact adjoint.
#[derive(Debug, Clone)]
pub enum LinearMap {
    Dense(DenseSensingMatrix),
    MaskedFourier(MaskedFourierOperator),
}

impl LinearMap {
    pub fn identity(n: usize) -> Self {
        LinearMap::Dense(DenseSensingMatrix::identity(n))
    }

    pub fn n_in(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.cols(),
            LinearMap::MaskedFourier(op) => op.h * op.w,
        }
    }

    pub fn n_out(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.rows(),
            LinearMap::MaskedFourier(op) => op.n_out,
        }
    }

    /// Forward action `Φ x`.
    pub fn apply(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        check_dim("apply input", self.n_in(), x.len())?;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("apply input"));
        }
        Ok(self.apply_unchecked(x))
    }

    /// Adjoint action `Φᵀ w`.
    pub fn adjoint_apply(&self, w: &Array1<f64>) -> Result<Array1<f64>> {
        check_dim("adjoint input", self.n_out(), w.len())?;
        Ok(self.adjoint_unchecked(w))
    }

    fn apply_unchecked(&self, x: &Array1<f64>) -> Array1<f64> {
        match self {
            LinearMap::Dense(m) => m.matrix.dot(x),
            LinearMap::MaskedFourier(op) => op.apply_impl(x),
        }
    }

    fn adjoint_unchecked(&self, w: &Array1<f64>) -> Array1<f64> {
        match self {
            LinearMap::Dense(m) => m.matrix.t().dot(w),
            LinearMap::MaskedFourier(op) => op.adjoint_impl(w),
        }
    }
}

/// Least-squares data-fidelity term `f(x) = 1/2 ||Φx - z||²`.
#[derive(Debug, Clone)]
pub struct FidelityProblem {
    op: LinearMap,
    z: Array1<f64>,
}

impl FidelityProblem {
    pub fn new(op: LinearMap, z: Array1<f64>) -> Result<Self> {
        check_dim("measurement vector", op.n_out(), z.len())?;
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("measurement vector"));
        }
        Ok(Self { op, z })
    }

    pub fn op(&self) -> &LinearMap {
        &self.op
    }

    pub fn z(&self) -> &Array1<f64> {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.op.n_in()
    }

    /// `f(x) = 1/2 ||Φx - z||²`.
    pub fn value(&self, x: &Array1<f64>) -> Result<f64> {
        let residual = self.op.apply(x)? - &self.z;
        let v = 0.5 * residual.dot(&residual);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("fidelity value"))
        }
    }

    /// `∇f(x) = Φᵀ(Φx - z)`.
    pub fn gradient(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        let residual = self.op.apply(x)? - &self.z;
        self.op.adjoint_apply(&residual)
    }

    /// Lipschitz constant of `∇f`, namely `||Φ||²` estimated by power iteration.
    pub fn gradient_lipschitz(&self, iters: usize, seed: u64) -> Result<f64> {
        let norm = estimate_spectral_norm(&self.op, iters, seed)?;
        Ok(norm * norm)
    }
}

/// Estimates the induced 2-norm `||Φ||` by power iteration on `ΦᵀΦ`.
///
/// The returned value is the square root of the final Rayleigh quotient, which
/// is nondecreasing in the iteration count and never exceeds the true norm.
pub fn estimate_spectral_norm(op: &LinearMap, iters: usize, seed: u64) -> Result<f64> {
    if iters == 0 {
        return Err(Error::InvalidParameter(
            "spectral norm estimation needs at least one iteration".into(),
        ));
    }
    Ok(power_iteration_norm(op.n_in(), iters, seed, |v| {
        let y = op.apply_unchecked(v);
        op.adjoint_unchecked(&y)
    }))
}

/// Power iteration on a symmetric PSD operator `v ↦ GᵀG v` given as a closure;
/// returns the square root of the last Rayleigh quotient.
pub(crate) fn power_iteration_norm(
    n_in: usize,
    iters: usize,
    seed: u64,
    mut gram: impl FnMut(&Array1<f64>) -> Array1<f64>,
) -> f64 {
    if n_in == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Array1::from_iter((0..n_in).map(|_| StandardNormal.sample(&mut rng)));
    let norm = v.dot(&v).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    v /= norm;
    let mut rayleigh = 0.0f64;
    for _ in 0..iters {
        let w = gram(&v);
        rayleigh = v.dot(&w);
        let wn = w.dot(&w).sqrt();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / wn;
    }
    rayleigh.max(0.0).sqrt()
}
