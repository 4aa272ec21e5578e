//! Reverse-mode differentiation over a scalar operation tape.
//!
//! Every primitive records its value, its (at most two) parent nodes, and
//! the local partial derivatives with respect to those parents, computed
//! eagerly during the forward pass. The backward sweep then visits nodes in
//! reverse topological order, which is simply reverse insertion order.
//!
//! Clamped primitives (`artanh`, `arcosh`, `arccos`, `clamp`, `relu`) follow
//! the subgradient convention: the partial is zero at and beyond the clamp
//! boundary.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TapeError {
    #[error("output node {index} is not recorded on this tape (len {len})")]
    InvalidNode { index: usize, len: usize },
}

const NO_PARENT: u32 = u32::MAX;
/// Domain clamp for artanh inputs, mirroring the ball module.
const ARTANH_LIMIT: f64 = 1.0 - 1e-15;

/// Handle to a scalar recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(u32);

#[derive(Debug, Clone, Copy)]
struct Node {
    value: f64,
    parents: [u32; 2],
    partials: [f64; 2],
}

/// Wengert list with eagerly computed local partials.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Drops all recorded nodes but keeps the allocation.
    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    pub fn value(&self, x: Var) -> f64 {
        self.nodes[x.0 as usize].value
    }

    fn push(&mut self, value: f64, parents: [u32; 2], partials: [f64; 2]) -> Var {
        let idx = self.nodes.len() as u32;
        self.nodes.push(Node { value, parents, partials });
        Var(idx)
    }

    /// Records an input node whose gradient will be tracked.
    pub fn leaf(&mut self, value: f64) -> Var {
        self.push(value, [NO_PARENT; 2], [0.0; 2])
    }

    /// Records a constant; identical to a leaf whose gradient is ignored.
    pub fn constant(&mut self, value: f64) -> Var {
        self.leaf(value)
    }

    fn unary(&mut self, a: Var, value: f64, da: f64) -> Var {
        self.push(value, [a.0, NO_PARENT], [da, 0.0])
    }

    fn binary(&mut self, a: Var, b: Var, value: f64, da: f64, db: f64) -> Var {
        self.push(value, [a.0, b.0], [da, db])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, self.value(a) + self.value(b), 1.0, 1.0)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, self.value(a) - self.value(b), 1.0, -1.0)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        self.binary(a, b, va * vb, vb, va)
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        self.binary(a, b, va / vb, 1.0 / vb, -va / (vb * vb))
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.unary(a, -self.value(a), -1.0)
    }

    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        self.unary(a, self.value(a) + c, 1.0)
    }

    pub fn mul_const(&mut self, a: Var, c: f64) -> Var {
        self.unary(a, self.value(a) * c, c)
    }

    pub fn square(&mut self, a: Var) -> Var {
        let v = self.value(a);
        self.unary(a, v * v, 2.0 * v)
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        let v = self.value(a);
        if v <= 0.0 {
            // Subgradient 0 at the kink; keeps norms of zero vectors inert.
            self.unary(a, 0.0, 0.0)
        } else {
            let s = v.sqrt();
            self.unary(a, s, 0.5 / s)
        }
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let e = self.value(a).exp();
        self.unary(a, e, e)
    }

    pub fn ln(&mut self, a: Var) -> Var {
        let v = self.value(a).max(1e-300);
        self.unary(a, v.ln(), 1.0 / v)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let t = self.value(a).tanh();
        self.unary(a, t, 1.0 - t * t)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.value(a);
        let s = 1.0 / (1.0 + (-v).exp());
        self.unary(a, s, s * (1.0 - s))
    }

    pub fn sinh(&mut self, a: Var) -> Var {
        let v = self.value(a);
        self.unary(a, v.sinh(), v.cosh())
    }

    pub fn cosh(&mut self, a: Var) -> Var {
        let v = self.value(a);
        self.unary(a, v.cosh(), v.sinh())
    }

    pub fn artanh(&mut self, a: Var) -> Var {
        let v = self.value(a);
        if v.abs() >= ARTANH_LIMIT {
            let c = v.clamp(-ARTANH_LIMIT, ARTANH_LIMIT);
            self.unary(a, 0.5 * ((1.0 + c) / (1.0 - c)).ln(), 0.0)
        } else {
            self.unary(a, 0.5 * ((1.0 + v) / (1.0 - v)).ln(), 1.0 / (1.0 - v * v))
        }
    }

    pub fn arcosh(&mut self, a: Var) -> Var {
        let v = self.value(a);
        if v <= 1.0 {
            self.unary(a, 0.0, 0.0)
        } else {
            let value = (v + (v * v - 1.0).sqrt()).ln();
            self.unary(a, value, 1.0 / (v * v - 1.0).sqrt())
        }
    }

    pub fn arccos(&mut self, a: Var) -> Var {
        let v = self.value(a);
        if v.abs() >= 1.0 {
            self.unary(a, v.clamp(-1.0, 1.0).acos(), 0.0)
        } else {
            self.unary(a, v.acos(), -1.0 / (1.0 - v * v).sqrt())
        }
    }

    pub fn arcsinh(&mut self, a: Var) -> Var {
        let v = self.value(a);
        self.unary(a, v.asinh(), 1.0 / (1.0 + v * v).sqrt())
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.value(a);
        if v > 0.0 {
            self.unary(a, v, 1.0)
        } else {
            self.unary(a, 0.0, 0.0)
        }
    }

    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let v = self.value(a);
        if v > lo && v < hi {
            self.unary(a, v, 1.0)
        } else {
            self.unary(a, v.clamp(lo, hi), 0.0)
        }
    }

    /// Accumulates d(output)/d(node) for every node up to `output`.
    pub fn backward(&self, output: Var) -> Result<Gradients, TapeError> {
        let out = output.0 as usize;
        if out >= self.nodes.len() {
            return Err(TapeError::InvalidNode { index: out, len: self.nodes.len() });
        }
        let mut grads = vec![0.0; out + 1];
        grads[out] = 1.0;
        for i in (0..=out).rev() {
            let g = grads[i];
            if g == 0.0 {
                continue;
            }
            let node = &self.nodes[i];
            for k in 0..2 {
                let p = node.parents[k];
                if p != NO_PARENT {
                    grads[p as usize] += node.partials[k] * g;
                }
            }
        }
        Ok(Gradients { grads })
    }
}

/// Gradients of one scalar output with respect to every tape node.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<f64>,
}

impl Gradients {
    /// Derivative of the output with respect to `v`; zero for nodes recorded
    /// after the output.
    pub fn wrt(&self, v: Var) -> f64 {
        self.grads.get(v.0 as usize).copied().unwrap_or(0.0)
    }
}

// ---- vector helpers ----

/// Records leaves for every entry of a slice.
pub fn leaves(t: &mut Tape, values: &[f64]) -> Vec<Var> {
    values.iter().map(|&v| t.leaf(v)).collect()
}

pub fn constants(t: &mut Tape, values: &[f64]) -> Vec<Var> {
    values.iter().map(|&v| t.constant(v)).collect()
}

pub fn dot(t: &mut Tape, xs: &[Var], ys: &[Var]) -> Var {
    assert_eq!(xs.len(), ys.len(), "dot: length mismatch");
    let mut acc = t.constant(0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let p = t.mul(x, y);
        acc = t.add(acc, p);
    }
    acc
}

pub fn norm_sq(t: &mut Tape, xs: &[Var]) -> Var {
    let mut acc = t.constant(0.0);
    for &x in xs {
        let s = t.square(x);
        acc = t.add(acc, s);
    }
    acc
}

pub fn norm(t: &mut Tape, xs: &[Var]) -> Var {
    let ns = norm_sq(t, xs);
    t.sqrt(ns)
}

pub fn sum(t: &mut Tape, xs: &[Var]) -> Var {
    let mut acc = t.constant(0.0);
    for &x in xs {
        acc = t.add(acc, x);
    }
    acc
}

pub fn scale(t: &mut Tape, xs: &[Var], s: Var) -> Vec<Var> {
    xs.iter().map(|&x| t.mul(x, s)).collect()
}

pub fn add_vec(t: &mut Tape, xs: &[Var], ys: &[Var]) -> Vec<Var> {
    xs.iter().zip(ys).map(|(&x, &y)| t.add(x, y)).collect()
}

pub fn neg_vec(t: &mut Tape, xs: &[Var]) -> Vec<Var> {
    xs.iter().map(|&x| t.neg(x)).collect()
}

/// Row-major matrix of vars applied to a var vector.
pub fn matvec(t: &mut Tape, m: &[Var], rows: usize, cols: usize, x: &[Var]) -> Vec<Var> {
    assert_eq!(m.len(), rows * cols, "matvec: matrix shape mismatch");
    assert_eq!(x.len(), cols, "matvec: vector length mismatch");
    (0..rows)
        .map(|r| dot(t, &m[r * cols..(r + 1) * cols], x))
        .collect()
}

/// Numerically stable log-sum-exp; the max shift cancels exactly, so the
/// derivative is the softmax of the inputs.
pub fn log_sum_exp(t: &mut Tape, xs: &[Var]) -> Var {
    let m = xs
        .iter()
        .map(|&x| t.value(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<Var> = xs.iter().map(|&x| t.add_const(x, -m)).collect();
    let exps: Vec<Var> = shifted.iter().map(|&x| t.exp(x)).collect();
    let s = sum(t, &exps);
    let l = t.ln(s);
    t.add_const(l, m)
}

/// Central finite difference oracle used by the gradient tests.
#[cfg(test)]
pub(crate) fn finite_difference<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    at: &[f64],
    h: f64,
) -> Vec<f64> {
    let mut grad = vec![0.0; at.len()];
    let mut x = at.to_vec();
    for i in 0..at.len() {
        let orig = x[i];
        x[i] = orig + h;
        let fp = f(&x);
        x[i] = orig - h;
        let fm = f(&x);
        x[i] = orig;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    grad
}
