use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::triage::LabelMap;

/// Number of generated (non-index) attributes per node.
pub const ATTRIBUTE_COUNT: usize = 100;

const TRAIN_PER_CLASS: usize = 200;
const TEST_PER_CLASS: usize = 1000;
const MAX_SHIFT: usize = 50;
const TOLERANCE: f64 = 0.05;

/// Probability curve over attributes arranged on a ring: `p_max` at
/// attribute 0, decaying exponentially with ring distance.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeCurve {
    pub p_max: f64,
    pub decay: f64,
}

impl Default for AttributeCurve {
    fn default() -> Self {
        AttributeCurve {
            p_max: 0.8,
            decay: 0.1,
        }
    }
}

impl AttributeCurve {
    pub fn probabilities(&self) -> Vec<f64> {
        (0..ATTRIBUTE_COUNT)
            .map(|j| {
                let dist = j.min(ATTRIBUTE_COUNT - j) as f64;
                self.p_max * (-self.decay * dist).exp()
            })
            .collect()
    }
}

/// Class-conditional attribute probabilities: class 0 uses `base_probs`,
/// class 1 the same curve rotated by `shift` positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeProfile {
    pub base_probs: Vec<f64>,
    pub shift: usize,
    /// GLRT accuracy measured while calibrating, if calibrated.
    pub measured_accuracy: Option<f64>,
}

impl AttributeProfile {
    pub fn new(base_probs: Vec<f64>, shift: usize) -> Result<Self> {
        if base_probs.len() != ATTRIBUTE_COUNT {
            return Err(Error::InvalidInput(format!(
                "expected {ATTRIBUTE_COUNT} attribute probabilities, got {}",
                base_probs.len()
            )));
        }
        if base_probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidInput(
                "attribute probability outside [0, 1]".into(),
            ));
        }
        if shift >= ATTRIBUTE_COUNT {
            return Err(Error::InvalidInput(format!("shift {shift} out of range")));
        }
        Ok(AttributeProfile {
            base_probs,
            shift,
            measured_accuracy: None,
        })
    }

    pub fn class_probs(&self, class: u8) -> Vec<f64> {
        if class == 0 {
            return self.base_probs.clone();
        }
        let n = self.base_probs.len();
        (0..n)
            .map(|j| self.base_probs[(j + n - self.shift) % n])
            .collect()
    }
}

fn sample_row<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Vec<bool> {
    probs.iter().map(|&p| rng.gen::<f64>() < p).collect()
}

/// Accuracy of a likelihood-ratio classifier whose per-attribute
/// Bernoulli parameters are estimated from simulated training cases.
pub fn glrt_accuracy<R: Rng + ?Sized>(p0: &[f64], p1: &[f64], rng: &mut R) -> f64 {
    let estimate = |probs: &[f64], rng: &mut R| -> Vec<f64> {
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..TRAIN_PER_CLASS {
            for (c, bit) in counts.iter_mut().zip(sample_row(probs, rng)) {
                *c += usize::from(bit);
            }
        }
        // Laplace smoothing keeps the log-likelihoods finite
        counts
            .iter()
            .map(|&c| (c as f64 + 1.0) / (TRAIN_PER_CLASS as f64 + 2.0))
            .collect()
    };
    let q0 = estimate(p0, rng);
    let q1 = estimate(p1, rng);
    let weights: Vec<(f64, f64)> = q0
        .iter()
        .zip(&q1)
        .map(|(&a, &b)| ((b / a).ln(), ((1.0 - b) / (1.0 - a)).ln()))
        .collect();
    let llr = |row: &[bool]| -> f64 {
        row.iter()
            .zip(&weights)
            .map(|(&bit, &(on, off))| if bit { on } else { off })
            .sum()
    };
    let mut correct = 0;
    for _ in 0..TEST_PER_CLASS {
        if llr(&sample_row(p0, rng)) <= 0.0 {
            correct += 1;
        }
        if llr(&sample_row(p1, rng)) > 0.0 {
            correct += 1;
        }
    }
    correct as f64 / (2 * TEST_PER_CLASS) as f64
}

/// Find the class-1 rotation whose simulated GLRT accuracy is closest to
/// `target_accuracy`. Each candidate shift draws from its own stream.
pub fn build_attribute_profile(
    target_accuracy: f64,
    curve: AttributeCurve,
    seed: u64,
) -> Result<AttributeProfile> {
    if !(0.0..=1.0).contains(&target_accuracy) {
        return Err(Error::InvalidInput(format!(
            "target accuracy {target_accuracy} outside [0, 1]"
        )));
    }
    let base = curve.probabilities();
    let scores: Vec<(usize, f64)> = (0..=MAX_SHIFT)
        .into_par_iter()
        .map(|s| {
            let profile = AttributeProfile::new(base.clone(), s).expect("valid shift");
            let mut rng = seed::rng_for(seed, "attribute-shift", &[s as u64]);
            (s, glrt_accuracy(&base, &profile.class_probs(1), &mut rng))
        })
        .collect();
    // nearest to target, smaller shift on ties
    let &(shift, accuracy) = scores
        .iter()
        .min_by(|a, b| {
            (a.1 - target_accuracy)
                .abs()
                .total_cmp(&(b.1 - target_accuracy).abs())
                .then(a.0.cmp(&b.0))
        })
        .expect("non-empty scan");
    if (accuracy - target_accuracy).abs() > TOLERANCE {
        return Err(Error::Calibration {
            target: target_accuracy,
            best_shift: shift,
            best_accuracy: accuracy,
        });
    }
    let mut profile = AttributeProfile::new(base, shift)?;
    profile.measured_accuracy = Some(accuracy);
    Ok(profile)
}

/// Dense bit matrix of node attributes: the generated block followed by a
/// one-hot block encoding each node's own index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u64>,
}

const MAGIC: &[u8; 4] = b"ATTR";

impl AttributeMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        AttributeMatrix {
            rows,
            cols,
            bits: vec![0; (rows * cols).div_ceil(64)],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(
            r < self.rows && c < self.cols,
            "attribute index out of range"
        );
        let i = r * self.cols + c;
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(
            r < self.rows && c < self.cols,
            "attribute index out of range"
        );
        let i = r * self.cols + c;
        if value {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    /// Serialized form: magic, rows and cols as little-endian u32, then
    /// the row-major bits packed LSB-first into bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let total = self.rows * self.cols;
        let mut out = Vec::with_capacity(12 + total.div_ceil(8));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        let bytes = self.bits.iter().flat_map(|w| w.to_le_bytes());
        out.extend(bytes.take(total.div_ceil(8)));
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < 12 || &data[..4] != MAGIC {
            return Err(Error::InvalidInput(
                "attribute file has no valid header".into(),
            ));
        }
        let rows = u32::from_le_bytes(data[4..8].try_into().expect("4 bytes")) as usize;
        let cols = u32::from_le_bytes(data[8..12].try_into().expect("4 bytes")) as usize;
        let body = &data[12..];
        if body.len() != (rows * cols).div_ceil(8) {
            return Err(Error::InvalidInput(format!(
                "attribute body has {} bytes, expected {}",
                body.len(),
                (rows * cols).div_ceil(8)
            )));
        }
        let mut m = AttributeMatrix::zeros(rows, cols);
        for (k, chunk) in body.chunks(8).enumerate() {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            m.bits[k] = u64::from_le_bytes(word);
        }
        Ok(m)
    }
}

/// Draw node attributes from the class-conditional profile and append the
/// one-hot index block.
pub fn generate_attributes<R: Rng + ?Sized>(
    labels: &LabelMap,
    profile: &AttributeProfile,
    rng: &mut R,
) -> AttributeMatrix {
    let n = labels.len();
    let width = profile.base_probs.len();
    let probs = [profile.class_probs(0), profile.class_probs(1)];
    let mut m = AttributeMatrix::zeros(n, width + n);
    for v in 0..n {
        for (j, &p) in probs[labels.get(v) as usize].iter().enumerate() {
            if rng.gen::<f64>() < p {
                m.set(v, j, true);
            }
        }
        m.set(v, width + v, true);
    }
    m
}
