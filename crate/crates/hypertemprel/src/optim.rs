//! Trainable parameters and the Adam family of optimizers.
//!
//! Euclidean parameters take the standard Adam update. Hyperbolic parameters
//! (single ball points) rescale the Euclidean gradient by the inverse metric
//! `(1 - ||x||^2)^2 / 4`, keep Adam moments on the rescaled gradient, and
//! move along the exponential map at the current point. Moments are kept as
//! raw vectors without parallel transport.

use rand::Rng;
use thiserror::Error;

use crate::ball::{self, BallPoint, GeometryConfig, TangentVector};

#[derive(Debug, Error, PartialEq)]
pub enum OptimError {
    #[error("non-finite gradient for parameter {name:?} at component {index}")]
    NonFiniteGradient { name: String, index: usize },
    #[error("gradient length {got} does not match parameter {name:?} of length {want}")]
    GradientShape { name: String, want: usize, got: usize },
    #[error("parameter {name:?} has space {space:?}, expected {expected:?}")]
    WrongSpace { name: String, space: Space, expected: Space },
}

/// Which geometry a parameter's update rule follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Space {
    Euclidean,
    Hyperbolic,
}

/// A named trainable tensor. Matrices are row-major; a hyperbolic parameter
/// is a single ball point (`rows = dim`, `cols = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub data: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub space: Space,
}

impl Parameter {
    pub fn euclidean(name: impl Into<String>, rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "parameter data length mismatch");
        Self { name: name.into(), data, rows, cols, space: Space::Euclidean }
    }

    /// Weight matrix initialized uniform in `±1/sqrt(fan_in)`.
    pub fn weight<R: Rng>(name: impl Into<String>, rows: usize, cols: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (cols as f64).sqrt();
        let data = (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect();
        Self::euclidean(name, rows, cols, data)
    }

    /// Ball-point parameter starting at the origin.
    pub fn ball_origin(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            data: vec![0.0; dim],
            rows: dim,
            cols: 1,
            space: Space::Hyperbolic,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_ball_point(&self) -> BallPoint {
        debug_assert_eq!(self.space, Space::Hyperbolic);
        BallPoint::new(self.data.clone()).expect("hyperbolic parameter escaped the ball")
    }
}

/// Adam hyperparameters. The learning rate default follows the model-training
/// setup; betas and eps are the conventional values.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self { lr, ..Self::default() }
    }
}

/// Per-parameter Adam state: step count and both moment accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self { step: 0, m: vec![0.0; len], v: vec![0.0; len] }
    }
}

fn check_gradient(p: &Parameter, grad: &[f64]) -> Result<(), OptimError> {
    if grad.len() != p.len() {
        return Err(OptimError::GradientShape {
            name: p.name.clone(),
            want: p.len(),
            got: grad.len(),
        });
    }
    if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
        return Err(OptimError::NonFiniteGradient { name: p.name.clone(), index });
    }
    Ok(())
}

fn adam_direction(state: &mut AdamState, grad: &[f64], cfg: &AdamConfig) -> Vec<f64> {
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    grad.iter()
        .enumerate()
        .map(|(i, &g)| {
            state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
            state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
            let m_hat = state.m[i] / bc1;
            let v_hat = state.v[i] / bc2;
            -cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps)
        })
        .collect()
}

/// Standard Adam update for a Euclidean parameter.
pub fn euclidean_adam_step(
    p: &mut Parameter,
    state: &mut AdamState,
    grad: &[f64],
    cfg: &AdamConfig,
) -> Result<(), OptimError> {
    if p.space != Space::Euclidean {
        return Err(OptimError::WrongSpace {
            name: p.name.clone(),
            space: p.space,
            expected: Space::Euclidean,
        });
    }
    check_gradient(p, grad)?;
    let step = adam_direction(state, grad, cfg);
    for (value, delta) in p.data.iter_mut().zip(step) {
        *value += delta;
    }
    Ok(())
}

/// Riemannian Adam update for a ball-point parameter: metric rescale, Adam
/// moments on the rescaled gradient, exponential-map retraction, projection.
pub fn riemannian_adam_step(
    p: &mut Parameter,
    state: &mut AdamState,
    grad: &[f64],
    cfg: &AdamConfig,
    geo: &GeometryConfig,
) -> Result<(), OptimError> {
    if p.space != Space::Hyperbolic {
        return Err(OptimError::WrongSpace {
            name: p.name.clone(),
            space: p.space,
            expected: Space::Hyperbolic,
        });
    }
    check_gradient(p, grad)?;
    let norm_sq: f64 = p.data.iter().map(|c| c * c).sum();
    let rescale = (1.0 - norm_sq) * (1.0 - norm_sq) / 4.0;
    let riem: Vec<f64> = grad.iter().map(|g| g * rescale).collect();
    let step = adam_direction(state, &riem, cfg);
    let here = p.as_ball_point();
    let dir = TangentVector::new(step).expect("finite Adam step");
    let next = ball::exp_map(&here, &dir, geo);
    p.data = next.into_coords();
    Ok(())
}

/// Drives one Adam state per parameter and dispatches on the parameter space.
#[derive(Debug)]
pub struct Optimizer {
    cfg: AdamConfig,
    geo: GeometryConfig,
    states: Vec<AdamState>,
}

impl Optimizer {
    pub fn new(cfg: AdamConfig, geo: GeometryConfig, params: &[&Parameter]) -> Self {
        let states = params.iter().map(|p| AdamState::new(p.len())).collect();
        Self { cfg, geo, states }
    }

    /// One update over all parameters; `grads` must parallel the parameter
    /// order given at construction.
    pub fn step(
        &mut self,
        params: &mut [&mut Parameter],
        grads: &[Vec<f64>],
    ) -> Result<(), OptimError> {
        assert_eq!(params.len(), self.states.len(), "optimizer arity mismatch");
        assert_eq!(grads.len(), self.states.len(), "gradient arity mismatch");
        for ((p, state), grad) in params.iter_mut().zip(&mut self.states).zip(grads) {
            match p.space {
                Space::Euclidean => euclidean_adam_step(p, state, grad, &self.cfg)?,
                Space::Hyperbolic => {
                    riemannian_adam_step(p, state, grad, &self.cfg, &self.geo)?
                }
            }
        }
        Ok(())
    }
}
