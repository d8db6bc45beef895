//! Per-variable discrete Fourier transform of factors.
//!
//! Forward uses the kernel `e^{-j2πkx/N}` without scaling, inverse uses
//! `e^{+j2πkx/N}` with `1/N` per variable. Under this pair the transform of a
//! generalized convolution is exactly the pointwise product of transforms.

use std::cell::RefCell;
use std::f64::consts::TAU;

use rustfft::FftPlanner;

use super::factor::strides_of;
use super::{Complex, Factor, VarId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Transform `values` (laid out by `dims`) in place along axis `axis`.
fn transform_axis(values: &mut [Complex], dims: &[usize], axis: usize, direction: Direction) {
    let n = dims[axis];
    if n == 1 {
        return;
    }
    let stride = strides_of(dims)[axis];
    let fft = PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        match direction {
            Direction::Forward => planner.plan_fft_forward(n),
            Direction::Inverse => planner.plan_fft_inverse(n),
        }
    });
    let scale = match direction {
        Direction::Forward => 1.0,
        Direction::Inverse => 1.0 / n as f64,
    };

    if stride == 1 {
        fft.process(values);
    } else {
        // Gather the lanes contiguously, transform as one batch, scatter back.
        let block = n * stride;
        let mut buf = vec![Complex::new(0.0, 0.0); values.len()];
        let mut lane = 0;
        for outer in values.chunks(block) {
            for i in 0..stride {
                for k in 0..n {
                    buf[lane * n + k] = outer[k * stride + i];
                }
                lane += 1;
            }
        }
        fft.process(&mut buf);
        let mut lane = 0;
        for outer in values.chunks_mut(block) {
            for i in 0..stride {
                for k in 0..n {
                    outer[k * stride + i] = buf[lane * n + k];
                }
                lane += 1;
            }
        }
    }
    if scale != 1.0 {
        for z in values.iter_mut() {
            *z *= scale;
        }
    }
}

impl Factor {
    /// Transform over every scope variable.
    pub fn dft(&self, direction: Direction) -> Factor {
        let all = self.vars().to_vec();
        self.dft_over(&all, direction)
            .expect("scope variables are in scope")
    }

    /// Transform over the listed scope variables only.
    pub fn dft_over(&self, vars: &[VarId], direction: Direction) -> Result<Factor> {
        let mut axes = Vec::with_capacity(vars.len());
        for &v in vars {
            axes.push(self.position(v).ok_or(Error::UnknownVariable(v))?);
        }
        let dims = self.dims().to_vec();
        let scope: Vec<(VarId, usize)> = self.scope().collect();
        let mut values = self.clone().into_values();
        for axis in axes {
            transform_axis(&mut values, &dims, axis, direction);
        }
        Factor::new(scope, values)
    }

    /// Multiply pointwise by the character `e^{+j2π k x̄ / N}` along `var`,
    /// where `k` is the (dual) coordinate of `var`.
    pub fn apply_character(&self, var: VarId, value: usize) -> Result<Factor> {
        let p = self.position(var).ok_or(Error::UnknownVariable(var))?;
        let n = self.dims()[p];
        if value >= n {
            return Err(Error::ValueOutOfDomain {
                var,
                value,
                size: n,
            });
        }
        let stride = self.strides()[p];
        let phase: Vec<Complex> = (0..n)
            .map(|k| Complex::from_polar(1.0, TAU * ((k * value) % n) as f64 / n as f64))
            .collect();
        let scope: Vec<(VarId, usize)> = self.scope().collect();
        let values = self
            .values()
            .iter()
            .enumerate()
            .map(|(i, &z)| z * phase[(i / stride) % n])
            .collect();
        Factor::new(scope, values)
    }
}
