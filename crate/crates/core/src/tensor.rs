//! Dense row-major `f64` tensors.
//!
//! There are no views or strides: every operation returns a fresh value, and
//! every accumulation runs left to right in index order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementwiseOp {
    Add,
    Sub,
    Mul,
}

fn check_dims(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::InvalidShape("shape has no dimensions".into()));
    }
    if let Some(pos) = shape.iter().position(|&d| d == 0) {
        return Err(Error::InvalidShape(format!(
            "dimension {pos} of {shape:?} is zero"
        )));
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidShape(format!("{shape:?} overflows usize")))
}

impl Tensor {
    /// Tensor of the given shape with every element set to `fill`.
    pub fn full(shape: &[usize], fill: f64) -> Result<Self> {
        let len = check_dims(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![fill; len],
        })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::full(shape, 0.0)
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let len = check_dims(shape)?;
        if len != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} holds {len} elements, got {}",
                data.len()
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Rank-1 tensor over `data`. Empty input is rejected.
    pub fn vector(data: Vec<f64>) -> Result<Self> {
        let n = data.len();
        Self::from_vec(&[n], data)
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![value],
        }
    }

    /// Zero tensor with the same shape as `self`.
    pub fn zeros_like(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            data: vec![0.0; self.data.len()],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Mutable access to the elements. The shape stays fixed.
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Same elements under a new shape with an equal element count.
    pub fn reshape(&self, shape: &[usize]) -> Result<Self> {
        let len = check_dims(shape)?;
        if len != self.data.len() {
            return Err(Error::ShapeMismatch(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data: self.data.clone(),
        })
    }

    pub fn flatten(&self) -> Self {
        Self {
            shape: vec![self.data.len()],
            data: self.data.clone(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|x| x * factor)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, &x| acc + x)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
    }

    /// `self += other`, elementwise.
    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        ensure_same_shape(self, other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn elementwise(&self, other: &Tensor, op: ElementwiseOp) -> Result<Self> {
        elementwise(self, other, op)
    }

    pub fn matmul(&self, other: &Tensor) -> Result<Self> {
        matmul(self, other)
    }
}

fn ensure_same_shape(a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape != b.shape {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.shape, b.shape
        )));
    }
    Ok(())
}

pub fn elementwise(a: &Tensor, b: &Tensor, op: ElementwiseOp) -> Result<Tensor> {
    ensure_same_shape(a, b)?;
    let f = match op {
        ElementwiseOp::Add => |x: f64, y: f64| x + y,
        ElementwiseOp::Sub => |x: f64, y: f64| x - y,
        ElementwiseOp::Mul => |x: f64, y: f64| x * y,
    };
    Ok(Tensor {
        shape: a.shape.clone(),
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    })
}

/// Product of an `m×k` and a `k×n` matrix.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k) = match a.shape() {
        &[m, k] => (m, k),
        s => return Err(Error::ShapeMismatch(format!("matmul lhs must be rank 2, got {s:?}"))),
    };
    let (k2, n) = match b.shape() {
        &[k2, n] => (k2, n),
        s => return Err(Error::ShapeMismatch(format!("matmul rhs must be rank 2, got {s:?}"))),
    };
    if k != k2 {
        return Err(Error::ShapeMismatch(format!(
            "inner dimensions differ: {m}x{k} times {k2}x{n}"
        )));
    }
    let mut out = vec![0.0; m * n];
    // i-p-j order: for each output element the terms still arrive p = 0, 1, ..
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let x = a.data[i * k + p];
            let brow = &b.data[p * n..(p + 1) * n];
            for (o, &w) in row.iter_mut().zip(brow) {
                *o += x * w;
            }
        }
    }
    Tensor::from_vec(&[m, n], out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn create_fills() {
        let t = Tensor::full(&[2, 2], 0.0).unwrap();
        assert_eq!(t.data(), &[0.0; 4]);
        assert_eq!(Tensor::full(&[1], 7.5).unwrap().data(), &[7.5]);
        let t = Tensor::full(&[3, 2, 2], 1.0).unwrap();
        assert_eq!(t.len(), 12);
        assert!(t.data().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn create_rejects_zero_dims() {
        assert!(matches!(Tensor::full(&[2, 0], 1.0), Err(Error::InvalidShape(_))));
        assert!(matches!(Tensor::full(&[], 1.0), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn elementwise_examples() {
        let a = Tensor::vector(vec![1.0, 2.0]).unwrap();
        let b = Tensor::vector(vec![3.0, 4.0]).unwrap();
        assert_eq!(elementwise(&a, &b, ElementwiseOp::Add).unwrap().data(), &[4.0, 6.0]);
        let z = a.zeros_like();
        assert_eq!(elementwise(&a, &z, ElementwiseOp::Mul).unwrap().data(), &[0.0, 0.0]);
        let c = Tensor::vector(vec![2.0, 4.0]).unwrap();
        assert_eq!(elementwise(&c, &c, ElementwiseOp::Sub).unwrap().data(), &[0.0, 0.0]);
        let bad = Tensor::vector(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            elementwise(&a, &bad, ElementwiseOp::Add),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn matmul_examples() {
        let eye = Tensor::from_vec(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let a = Tensor::from_vec(&[2, 2], vec![1.5, -2.0, 3.0, 0.25]).unwrap();
        assert_eq!(matmul(&eye, &a).unwrap(), a);

        let row = Tensor::from_vec(&[1, 2], vec![1.0, 2.0]).unwrap();
        let col = Tensor::from_vec(&[2, 1], vec![3.0, 4.0]).unwrap();
        let p = matmul(&row, &col).unwrap();
        assert_eq!(p.shape(), &[1, 1]);
        assert_eq!(p.data(), &[11.0]);

        let z = Tensor::zeros(&[2, 3]).unwrap();
        assert!(matmul(&a, &z).unwrap().data().iter().all(|&x| x == 0.0));
        assert!(matches!(matmul(&a, &col.reshape(&[1, 2]).unwrap()), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn reshape_checks_count() {
        let t = Tensor::zeros(&[2, 3]).unwrap();
        assert_eq!(t.reshape(&[3, 2]).unwrap().shape(), &[3, 2]);
        assert!(t.reshape(&[4, 2]).is_err());
    }
}
