//! Richardson extrapolation on nested step ladders.
//!
//! Values `v_k = F(h_k)` with `h_k = h_0 / 2^k` (coarse to fine) whose error
//! expands in powers `h^p, h^{2p}, ...` are combined in a Neville tableau;
//! the entry with the smallest local error estimate wins (Ridders' rule).

use std::ops::{Add, Sub};

use crate::linalg::{CMat, C64};

pub trait Extrapolable: Clone + Add<Output = Self> + Sub<Output = Self> {
    fn size(&self) -> f64;
    fn scaled(self, k: f64) -> Self;
}

impl Extrapolable for C64 {
    fn size(&self) -> f64 {
        self.norm()
    }

    fn scaled(self, k: f64) -> Self {
        self * k
    }
}

impl Extrapolable for CMat {
    fn size(&self) -> f64 {
        crate::linalg::max_abs(self)
    }

    fn scaled(self, k: f64) -> Self {
        self * C64::new(k, 0.0)
    }
}

#[derive(Clone, Debug)]
pub struct Extrapolated<T> {
    pub value: T,
    pub error: f64,
}

/// Extrapolates `values` (ordered coarse to fine, step ratio 2) to `h = 0`
/// assuming an error series in powers of `h^power`.
pub fn richardson<T: Extrapolable>(values: &[T], power: u32) -> Option<Extrapolated<T>> {
    let first = values.first()?;
    if values.len() == 1 {
        return Some(Extrapolated {
            value: first.clone(),
            error: f64::INFINITY,
        });
    }
    let base = 2f64.powi(power as i32);
    let mut prev_row: Vec<T> = vec![first.clone()];
    let mut best = Extrapolated {
        value: first.clone(),
        error: f64::INFINITY,
    };
    for (i, v) in values.iter().enumerate().skip(1) {
        let mut row: Vec<T> = vec![v.clone()];
        let mut factor = base;
        for k in 1..=i {
            let cur = row[k - 1].clone();
            let coarse = prev_row[k - 1].clone();
            let diff = cur.clone() - coarse;
            let next = cur.clone() + diff.scaled(1.0 / (factor - 1.0));
            factor *= base;
            let err = (next.clone() - cur).size().max((next.clone() - prev_row[k - 1].clone()).size());
            if err <= best.error {
                best = Extrapolated {
                    value: next.clone(),
                    error: err,
                };
            }
            row.push(next);
        }
        // stop once the fine-scale diagonal degrades far beyond the best estimate
        let diag_err = (row[i].clone() - prev_row[i - 1].clone()).size();
        if diag_err >= 2.0 * best.error && i > 2 && best.error.is_finite() {
            break;
        }
        prev_row = row;
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::r;

    #[test]
    fn exp_derivative_by_central_differences() {
        // oracle: d/dx exp(x) at 0.3 is exp(0.3)
        let x = 0.3f64;
        let vals: Vec<C64> = (0..8)
            .map(|k| {
                let h = 0.1 / 2f64.powi(k);
                r(((x + h).exp() - (x - h).exp()) / (2.0 * h))
            })
            .collect();
        let e = richardson(&vals, 2).unwrap();
        assert!((e.value.re - x.exp()).abs() < 1e-12, "{:?}", e);
        assert!(e.error < 1e-9);
    }

    #[test]
    fn one_sided_series() {
        // f(h) = 2 + 3h + h^2 - h^3 is reproduced exactly after three levels
        let vals: Vec<C64> = (0..6)
            .map(|k| {
                let h = 0.5 / 2f64.powi(k);
                r(2.0 + 3.0 * h + h * h - h * h * h)
            })
            .collect();
        let e = richardson(&vals, 1).unwrap();
        assert!((e.value.re - 2.0).abs() < 1e-13);
    }

    #[test]
    fn empty_and_single() {
        assert!(richardson::<C64>(&[], 2).is_none());
        let e = richardson(&[r(1.0)], 2).unwrap();
        assert_eq!(e.value, r(1.0));
        assert!(e.error.is_infinite());
    }
}
