//! Unit-average-power QAM constellations with minimum-distance demapping.
//!
//! Square orders (4, 16, 64, ...) use per-axis Gray labels. 32-QAM is the
//! standard cross constellation (a 6×6 grid without its four corners) with a
//! serpentine Gray labeling, so horizontally adjacent points differ in one bit.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn validate_order(order: usize) -> Result<()> {
    if order == 32 || is_square_order(order) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("qam_order must be a power of 4 (>= 4) or 32, got {order}")))
    }
}

fn is_square_order(order: usize) -> bool {
    order >= 4 && order.is_power_of_two() && order.trailing_zeros().is_multiple_of(2)
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

#[derive(Debug, Clone)]
pub struct Constellation {
    /// `points[label]` is the complex point carrying `label`.
    points: Vec<Complex64>,
    bits_per_symbol: usize,
}

impl Constellation {
    pub fn new(order: usize) -> Result<Self> {
        validate_order(order)?;
        let raw = if order == 32 { cross32() } else { square(order) };
        let energy = raw.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        let scale = energy.sqrt().recip();
        Ok(Self {
            points: raw.into_iter().map(|p| p * scale).collect(),
            bits_per_symbol: order.trailing_zeros() as usize,
        })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Label of the point closest to `z`.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }

    /// Maps a bit stream (one bit per byte, MSB first per symbol) to symbols.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let b = self.bits_per_symbol;
        if !bits.len().is_multiple_of(b) {
            return Err(Error::InvalidArgument(format!(
                "{} bits is not a whole number of {b}-bit symbols",
                bits.len()
            )));
        }
        bits.chunks(b)
            .map(|chunk| {
                let mut label = 0usize;
                for &bit in chunk {
                    if bit > 1 {
                        return Err(Error::InvalidArgument(format!("bit value {bit}")));
                    }
                    label = (label << 1) | bit as usize;
                }
                Ok(self.points[label])
            })
            .collect()
    }

    pub fn demap_bits(&self, symbols: &[Complex64]) -> Vec<u8> {
        let b = self.bits_per_symbol;
        let mut out = Vec::with_capacity(symbols.len() * b);
        for &z in symbols {
            let label = self.nearest(z);
            for k in (0..b).rev() {
                out.push(((label >> k) & 1) as u8);
            }
        }
        out
    }
}

fn square(order: usize) -> Vec<Complex64> {
    let side = (order as f64).sqrt().round() as u32;
    let half_bits = side.trailing_zeros();
    let mut points = vec![Complex64::new(0.0, 0.0); order];
    for i in 0..side {
        for q in 0..side {
            let label = (gray(i) << half_bits) | gray(q);
            let re = 2.0 * i as f64 - (side - 1) as f64;
            let im = 2.0 * q as f64 - (side - 1) as f64;
            points[label as usize] = Complex64::new(re, im);
        }
    }
    points
}

fn cross32() -> Vec<Complex64> {
    let levels = [-5.0, -3.0, -1.0, 1.0, 3.0, 5.0];
    let mut seq = Vec::with_capacity(32);
    for (row, &im) in levels.iter().rev().enumerate() {
        let cols: Vec<f64> = if row % 2 == 0 { levels.to_vec() } else { levels.iter().rev().copied().collect() };
        for re in cols {
            if f64::abs(re) == 5.0 && f64::abs(im) == 5.0 {
                continue;
            }
            seq.push(Complex64::new(re, im));
        }
    }
    let mut points = vec![Complex64::new(0.0, 0.0); 32];
    for (i, p) in seq.into_iter().enumerate() {
        points[gray(i as u32) as usize] = p;
    }
    points
}
