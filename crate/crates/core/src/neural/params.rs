//! Named parameter tensors, gradient buffers, Adam and the binary
//! checkpoint format.

use std::io::{Read, Write};

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub usize);

/// Vectors are stored as `1 × n` matrices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Parameters {
    names: Vec<String>,
    values: Vec<Array2<f64>>,
}

impl Parameters {
    pub fn add(&mut self, name: &str, value: Array2<f64>) -> ParamId {
        assert!(self.find(name).is_none(), "duplicate parameter {name}");
        self.names.push(name.to_string());
        self.values.push(value);
        ParamId(self.values.len() - 1)
    }

    /// Uniform(−scale, scale) matrix.
    pub fn add_uniform(&mut self, name: &str, rows: usize, cols: usize, scale: f64, rng: &mut impl Rng) -> ParamId {
        let value = Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-scale..scale));
        self.add(name, value)
    }

    pub fn add_zeros(&mut self, name: &str, rows: usize, cols: usize) -> ParamId {
        self.add(name, Array2::zeros((rows, cols)))
    }

    pub fn get(&self, id: ParamId) -> &Array2<f64> {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.values[id.0]
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn scalar_count(&self) -> usize {
        self.values.iter().map(|v| v.len()).sum()
    }

    /// Serializes the tensors: count, then per tensor the name, shape and
    /// little-endian `f64` data.
    pub fn write_tensors(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for (name, value) in self.names.iter().zip(&self.values) {
            w.write_all(&(name.len() as u64).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&(value.nrows() as u64).to_le_bytes())?;
            w.write_all(&(value.ncols() as u64).to_le_bytes())?;
            for x in value.iter() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_tensors(r: &mut impl Read) -> Result<Parameters> {
        let count = read_u64(r)? as usize;
        let mut p = Parameters::default();
        for _ in 0..count {
            let len = read_u64(r)? as usize;
            if len > 1 << 16 {
                return Err(Error::Checkpoint(format!("tensor name length {len} is implausible")));
            }
            let mut name = vec![0u8; len];
            r.read_exact(&mut name)?;
            let name = String::from_utf8(name).map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?;
            let rows = read_u64(r)? as usize;
            let cols = read_u64(r)? as usize;
            let n = rows
                .checked_mul(cols)
                .filter(|&n| n <= 1 << 32)
                .ok_or_else(|| Error::Checkpoint(format!("tensor {name} has implausible shape {rows}x{cols}")))?;
            let mut data = vec![0u8; n * 8];
            r.read_exact(&mut data)?;
            let values: Vec<f64> = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
            let value = Array2::from_shape_vec((rows, cols), values).expect("length checked");
            if p.find(&name).is_some() {
                return Err(Error::Checkpoint(format!("duplicate tensor {name}")));
            }
            p.add(&name, value);
        }
        Ok(p)
    }
}

pub(crate) fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Gradient buffers shaped like a [`Parameters`] set.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    values: Vec<Array2<f64>>,
}

impl Gradients {
    pub fn zeros_like(p: &Parameters) -> Gradients {
        Gradients { values: p.values.iter().map(|v| Array2::zeros(v.raw_dim())).collect() }
    }

    pub fn get(&self, id: ParamId) -> &Array2<f64> {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.values[id.0]
    }

    pub fn fill_zero(&mut self) {
        for v in &mut self.values {
            v.fill(0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            v.mapv_inplace(|x| x * factor);
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.values.iter().flat_map(|v| v.iter()).map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Rescales to `max_norm` when the global norm exceeds it; returns the
    /// norm before clipping.
    pub fn clip(&mut self, max_norm: f64) -> f64 {
        let norm = self.global_norm();
        if norm > max_norm {
            self.scale(max_norm / norm);
        }
        norm
    }
}

#[derive(Clone, Debug)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: i32,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
}

impl Adam {
    pub fn new(params: &Parameters, learning_rate: f64) -> Adam {
        let zeros = || params.values.iter().map(|v| Array2::zeros(v.raw_dim())).collect();
        Adam { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, step: 0, m: zeros(), v: zeros() }
    }

    pub fn update(&mut self, params: &mut Parameters, grads: &Gradients) {
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let (lr, eps) = (self.learning_rate, self.epsilon);
        for (((p, g), m), v) in params.values.iter_mut().zip(&grads.values).zip(&mut self.m).zip(&mut self.v) {
            ndarray::Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn tensors_round_trip() {
        let mut p = Parameters::default();
        p.add("W", array![[1.0, -2.5], [f64::MIN_POSITIVE, 3.0]]);
        p.add("b", array![[0.125, 7.0, -1e300]]);
        let mut buf = Vec::new();
        p.write_tensors(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + (8 + 1 + 16 + 32) + (8 + 1 + 16 + 24));
        let q = Parameters::read_tensors(&mut buf.as_slice()).unwrap();
        assert_eq!(p, q);
        assert!(Parameters::read_tensors(&mut &buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn clipping() {
        let mut p = Parameters::default();
        p.add("a", array![[3.0, 4.0]]);
        let mut g = Gradients::zeros_like(&p);
        g.get_mut(ParamId(0)).assign(&array![[30.0, 40.0]]);
        assert_eq!(g.clip(5.0), 50.0);
        assert!((g.global_norm() - 5.0).abs() < 1e-12);
        assert_eq!(g.clip(5.0 + 1e-9), g.global_norm());
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let mut p = Parameters::default();
        p.add("a", array![[1.0, 1.0]]);
        let mut g = Gradients::zeros_like(&p);
        g.get_mut(ParamId(0)).assign(&array![[0.5, -2.0]]);
        let mut adam = Adam::new(&p, 0.01);
        adam.update(&mut p, &g);
        // The bias-corrected first step is lr · sign(g), up to epsilon.
        let a = p.get(ParamId(0));
        assert!((a[[0, 0]] - 0.99).abs() < 1e-7);
        assert!((a[[0, 1]] - 1.01).abs() < 1e-7);
    }

    #[test]
    fn zero_learning_rate_is_inert() {
        let mut p = Parameters::default();
        p.add("a", array![[1.0, 2.0]]);
        let before = p.clone();
        let mut g = Gradients::zeros_like(&p);
        g.get_mut(ParamId(0)).fill(1.0);
        let mut adam = Adam::new(&p, 0.0);
        adam.update(&mut p, &g);
        assert_eq!(p, before);
    }
}
