//! Bit utilities, flat/2D index packing and the Walsh–Hadamard transform in
//! Hadamard (natural) order.
//!
//! Every basis index `r` of a `2n`-qubit register is a grid point: the lower
//! `n` bits hold the column `x`, the upper `n` bits the row `y`, so that
//! `r = N*y + x`. Walsh masks use the same bit layout, which makes the 2D
//! Walsh functions plain 1D Walsh functions over `r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest qubit count a mask or basis index may span.
pub const MAX_QUBITS: usize = usize::BITS as usize - 1;

/// Coefficients at or below this magnitude are treated as exact zeros.
pub const ZERO_COEFFICIENT: f64 = 1e-15;

/// Size of a square `N x N` grid with `N = 2^n`, stored on `m = 2n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridIndex {
    bits: u32,
}

impl GridIndex {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 {
            return Err(Error::param("n", "bits per axis must be at least 1"));
        }
        if 2 * bits as usize > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                qubits: 2 * bits as usize,
                max: MAX_QUBITS,
            });
        }
        Ok(GridIndex { bits })
    }

    /// Bits per axis, `n`.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Points per axis, `N = 2^n`.
    pub fn axis_len(&self) -> usize {
        1 << self.bits
    }

    /// Total qubits, `m = 2n`.
    pub fn qubits(&self) -> usize {
        2 * self.bits as usize
    }

    /// Number of grid points, `N^2 = 2^m`.
    pub fn len(&self) -> usize {
        1 << self.qubits()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pack(&self, x: usize, y: usize) -> Result<usize> {
        pack_index(x, y, self.axis_len())
    }

    pub fn unpack(&self, r: usize) -> Result<(usize, usize)> {
        unpack_index(r, self.axis_len())
    }
}

/// Reflected binary Gray code of `i`.
#[inline]
pub fn gray_code(i: usize) -> usize {
    i ^ (i >> 1)
}

#[inline]
pub fn hamming_distance(a: usize, b: usize) -> u32 {
    (a ^ b).count_ones()
}

/// Hadamard-ordered Walsh function `T_u(x) = (-1)^popcount(u & x)`.
#[inline]
pub fn walsh_value(u: usize, x: usize) -> i32 {
    if (u & x).count_ones() & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Base-2 logarithm of `len`, or an error if `len` is not a power of two.
pub fn log2_exact(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Unnormalized in-place butterfly: `data[u] <- sum_x data[x] T_u(x)`.
///
/// Applying it twice multiplies the input by its length.
pub fn fwht_in_place(data: &mut [f64]) -> Result<()> {
    let len = data.len();
    let m = log2_exact(len)?;
    if m > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            qubits: m,
            max: MAX_QUBITS,
        });
    }
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half <<= 1;
    }
    Ok(())
}

/// Forward transform `W(u) = 2^-m sum_x f(x) T_u(x)`.
pub fn fwht(values: &[f64]) -> Result<WalshSpectrum> {
    let mut coefficients = values.to_vec();
    fwht_in_place(&mut coefficients)?;
    let scale = 1.0 / values.len() as f64;
    coefficients.iter_mut().for_each(|c| *c *= scale);
    WalshSpectrum::from_coefficients(coefficients)
}

/// Walsh coefficients of a real function over `2^m` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalshSpectrum {
    coefficients: Vec<f64>,
    w_max: f64,
}

impl WalshSpectrum {
    pub fn from_coefficients(coefficients: Vec<f64>) -> Result<Self> {
        log2_exact(coefficients.len())?;
        let w_max = coefficients.iter().skip(1).fold(0.0_f64, |acc, c| acc.max(c.abs()));
        Ok(WalshSpectrum { coefficients, w_max })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn get(&self, mask: usize) -> f64 {
        self.coefficients[mask]
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn qubits(&self) -> usize {
        self.coefficients.len().trailing_zeros() as usize
    }

    /// Largest `|W(u)|` over `u != 0`.
    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    /// Number of masks `u != 0` whose coefficient is not an exact zero.
    pub fn nonzero_count(&self) -> usize {
        self.coefficients
            .iter()
            .skip(1)
            .filter(|c| c.abs() > ZERO_COEFFICIENT)
            .count()
    }

    /// Walsh expansion `f(x) = sum_u W(u) T_u(x)`.
    pub fn expand(&self) -> Vec<f64> {
        let mut values = self.coefficients.clone();
        fwht_in_place(&mut values).expect("length checked at construction");
        values
    }
}

/// Flat index `r = N*y + x`.
pub fn pack_index(x: usize, y: usize, axis_len: usize) -> Result<usize> {
    if x >= axis_len || y >= axis_len {
        return Err(Error::IndexOutOfRange(format!(
            "({x}, {y}) outside a {axis_len}x{axis_len} grid"
        )));
    }
    Ok(axis_len * y + x)
}

/// Inverse of [`pack_index`]: `x = r mod N`, `y = r div N`.
pub fn unpack_index(r: usize, axis_len: usize) -> Result<(usize, usize)> {
    if axis_len == 0 || r >= axis_len * axis_len {
        return Err(Error::IndexOutOfRange(format!(
            "flat index {r} outside a {axis_len}x{axis_len} grid"
        )));
    }
    Ok((r % axis_len, r / axis_len))
}
