//! Uniform grids on `ℂⁿ/(ℤ+iℤ)ⁿ` and Fourier derivatives.
//!
//! Real axes are ordered `x₁, y₁, x₂, y₂, …` with `x₁` fastest. An axis can be
//! collapsed to a single point when every field on it is constant along that
//! axis, which keeps band-limited scenarios that only excite a few directions
//! cheap. Collapsed axes contribute zero derivatives and the result is the
//! same as on the full `K^{2n}` grid.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    n: usize,
    k: usize,
    extents: Vec<usize>,
    strides: Vec<usize>,
}

impl TorusGrid {
    /// All `K^{2n}` points.
    pub fn full(n: usize, k: usize) -> Result<Self> {
        Self::reduced(n, k, &vec![true; 2 * n])
    }

    /// `K` points along active axes, one point along the others.
    pub fn reduced(n: usize, k: usize, active: &[bool]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("dimension must be positive".into()));
        }
        if k < 8 || !k.is_power_of_two() {
            return Err(Error::Argument(format!(
                "points per axis must be a power of two >= 8, got {k}"
            )));
        }
        if active.len() != 2 * n {
            return Err(Error::Argument(format!(
                "expected {} axis flags, got {}",
                2 * n,
                active.len()
            )));
        }
        let extents: Vec<usize> = active.iter().map(|&a| if a { k } else { 1 }).collect();
        let mut strides = Vec::with_capacity(2 * n);
        let mut s = 1;
        for &e in &extents {
            strides.push(s);
            s *= e;
        }
        Ok(Self {
            n,
            k,
            extents,
            strides,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Points per active real axis.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.extents[axis] > 1
    }

    pub fn is_full(&self) -> bool {
        self.extents.iter().all(|&e| e > 1)
    }

    /// Number of stored points.
    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of `point` along `axis`.
    pub fn axis_index(&self, point: usize, axis: usize) -> usize {
        (point / self.strides[axis]) % self.extents[axis]
    }

    /// Real coordinates `(x₁, y₁, …)` in `[0, 1)`.
    pub fn coordinates(&self, point: usize) -> Vec<f64> {
        (0..2 * self.n)
            .map(|a| self.axis_index(point, a) as f64 / self.k as f64)
            .collect()
    }

    /// Point index of full-grid multi-index `idx`, if it is stored.
    pub fn point_of(&self, idx: &[usize]) -> Option<usize> {
        let mut p = 0;
        for (a, &i) in idx.iter().enumerate() {
            if i >= self.extents[a] {
                return None;
            }
            p += i * self.strides[a];
        }
        Some(p)
    }

    /// Field from pointwise values.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|i| f(&self.coordinates(i)))
            .collect()
    }
}

/// First and second real partial derivatives of a field.
#[derive(Debug, Clone)]
pub struct RealDerivatives {
    dim: usize,
    len: usize,
    first: Vec<Option<Vec<f64>>>,
    second: Vec<Option<Vec<f64>>>,
}

impl RealDerivatives {
    fn pair(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        a * self.dim + b
    }

    pub fn first(&self, axis: usize, point: usize) -> f64 {
        self.first[axis].as_ref().map_or(0.0, |v| v[point])
    }

    pub fn second(&self, a: usize, b: usize, point: usize) -> f64 {
        self.second[self.pair(a, b)].as_ref().map_or(0.0, |v| v[point])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `φ_{jk̄}` as an `n×n` row-major array.
    pub fn ddbar(&self, point: usize) -> Vec<C64> {
        let n = self.dim / 2;
        let mut h = vec![C64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for k in 0..n {
                let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
                let re = 0.25 * (self.second(xj, xk, point) + self.second(yj, yk, point));
                let im = 0.25 * (self.second(xj, yk, point) - self.second(yj, xk, point));
                h[j * n + k] = C64::new(re, im);
            }
        }
        h
    }

    /// `∂_j φ = ½(φ_{x_j} − i φ_{y_j})`.
    pub fn dz(&self, point: usize) -> Vec<C64> {
        (0..self.dim / 2)
            .map(|j| {
                C64::new(
                    0.5 * self.first(2 * j, point),
                    -0.5 * self.first(2 * j + 1, point),
                )
            })
            .collect()
    }
}

/// FFT plans for a grid.
pub struct Spectral {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: &TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: grid.clone(),
            forward: planner.plan_fft_forward(grid.k),
            inverse: planner.plan_fft_inverse(grid.k),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn transform(&self, data: &mut [C64], inverse: bool) {
        let fft = if inverse { &self.inverse } else { &self.forward };
        let k = self.grid.k;
        let mut line = vec![C64::new(0.0, 0.0); k];
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..2 * self.grid.n {
            if !self.grid.is_active(axis) {
                continue;
            }
            let stride = self.grid.strides[axis];
            for start in 0..data.len() {
                if self.grid.axis_index(start, axis) != 0 {
                    continue;
                }
                for (m, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + m * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (m, v) in line.iter().enumerate() {
                    data[start + m * stride] = *v;
                }
            }
        }
    }

    /// Signed wavenumber of index `m` and whether it is the Nyquist mode.
    fn wavenumber(&self, m: usize) -> (f64, bool) {
        let k = self.grid.k;
        if m < k / 2 {
            (m as f64, false)
        } else if m == k / 2 {
            (m as f64, true)
        } else {
            (m as f64 - k as f64, false)
        }
    }

    /// Fourier coefficients, normalized so that a constant field `c` has
    /// coefficient `c` at the zero mode.
    pub fn forward(&self, values: &[f64]) -> Vec<C64> {
        let mut data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        let scale = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
        data
    }

    /// Real part of the synthesis of `coefficients`.
    pub fn inverse(&self, coefficients: &[C64]) -> Vec<f64> {
        let mut data = coefficients.to_vec();
        self.transform(&mut data, true);
        data.iter().map(|z| z.re).collect()
    }

    fn first_symbol(&self, axis: usize, point: usize) -> C64 {
        let (k, nyquist) = self.wavenumber(self.grid.axis_index(point, axis));
        if nyquist {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.0, 2.0 * PI * k)
        }
    }

    fn apply(&self, spectrum: &[C64], symbol: impl Fn(usize) -> C64) -> Vec<f64> {
        let multiplied: Vec<C64> = spectrum
            .iter()
            .enumerate()
            .map(|(i, z)| z * symbol(i))
            .collect();
        self.inverse(&multiplied)
    }

    /// All first and second partials of `values`.
    pub fn derivatives(&self, values: &[f64]) -> RealDerivatives {
        let dim = 2 * self.grid.n;
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let centred: Vec<f64> = values.iter().map(|v| v - mean).collect();
        let spectrum = self.forward(&centred);
        let active: Vec<usize> = (0..dim).filter(|&a| self.grid.is_active(a)).collect();
        let mut first = vec![None; dim];
        let mut second = vec![None; dim * dim];
        let results: Vec<(usize, usize, Vec<f64>)> = active
            .iter()
            .flat_map(|&a| {
                let mut jobs = vec![(a, usize::MAX)];
                jobs.extend(active.iter().filter(|&&b| b >= a).map(|&b| (a, b)));
                jobs
            })
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(a, b)| {
                let v = if b == usize::MAX {
                    self.apply(&spectrum, |i| self.first_symbol(a, i))
                } else if a == b {
                    self.apply(&spectrum, |i| {
                        let (k, _) = self.wavenumber(self.grid.axis_index(i, a));
                        C64::new(-(2.0 * PI * k).powi(2), 0.0)
                    })
                } else {
                    self.apply(&spectrum, |i| {
                        self.first_symbol(a, i) * self.first_symbol(b, i)
                    })
                };
                (a, b, v)
            })
            .collect();
        for (a, b, v) in results {
            if b == usize::MAX {
                first[a] = Some(v);
            } else {
                second[a * dim + b] = Some(v);
            }
        }
        RealDerivatives {
            dim,
            len: values.len(),
            first,
            second,
        }
    }

    /// Solves `Δ_ℂ u = rhs / c` for mean-zero `u`; the mean of `rhs` is
    /// dropped.
    pub fn solve_laplace(&self, rhs: &[f64], c: f64) -> Vec<f64> {
        let spectrum = self.forward(rhs);
        let dim = 2 * self.grid.n;
        let solved: Vec<C64> = spectrum
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let norm2: f64 = (0..dim)
                    .map(|a| self.wavenumber(self.grid.axis_index(i, a)).0.powi(2))
                    .sum();
                if norm2 == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    z / (-c * PI * PI * norm2)
                }
            })
            .collect();
        self.inverse(&solved)
    }
}
