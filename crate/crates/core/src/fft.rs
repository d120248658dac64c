//! Multi-dimensional FFT on row-major arrays (last axis contiguous).

use rustfft::{FftDirection, FftPlanner};

use crate::numeric::C64;

/// In-place unnormalised transform along every axis of `data`.
pub fn fftn(data: &mut [C64], shape: &[usize], direction: FftDirection) {
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len(), "shape does not match data length");
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = 1;
    for axis in (0..shape.len()).rev() {
        let n = shape[axis];
        if n > 1 {
            let fft = planner.plan_fft(n, direction);
            let mut scratch = vec![C64::default(); fft.get_inplace_scratch_len()];
            let mut line = vec![C64::default(); n];
            let block = n * stride;
            for outer in 0..total / block {
                for inner in 0..stride {
                    let base = outer * block + inner;
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = data[base + k * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
        stride *= n;
    }
}

/// Forward transform followed by the inverse returns the input when this
/// factor is applied.
pub fn inverse_scale(shape: &[usize]) -> f64 {
    1.0 / shape.iter().product::<usize>() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d() {
        let shape = [4, 6];
        let orig: Vec<C64> = (0..24).map(|i| C64::new(i as f64, (i * i % 7) as f64)).collect();
        let mut d = orig.clone();
        fftn(&mut d, &shape, FftDirection::Forward);
        fftn(&mut d, &shape, FftDirection::Inverse);
        let s = inverse_scale(&shape);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a * s - b).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_transforms_to_ones() {
        let shape = [3, 5];
        let mut d = vec![C64::default(); 15];
        d[0] = C64::new(1.0, 0.0);
        fftn(&mut d, &shape, FftDirection::Forward);
        assert!(d.iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-14));
    }
}
