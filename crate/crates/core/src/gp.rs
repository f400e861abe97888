//! Gaussian-process regression: kernels, prediction, marginal likelihood,
//! hyperparameter fitting, expected kernels under uncertain inputs and the
//! Gaussian mutual-information identities.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::{Point2, SeededRng};
use crate::linalg::{Cholesky, Matrix};

/// Added to the kernel diagonal when the training noise is exactly zero.
pub const JITTER: f64 = 1e-10;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    SquaredExponential,
    SquaredExponentialArd,
    Matern52,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    lengthscales: Vec<f64>,
    signal_variance: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscales: Vec<f64>, signal_variance: f64) -> Result<Self> {
        if lengthscales.is_empty() {
            return Err(Error::InvalidParameter("kernel needs a lengthscale"));
        }
        if family != KernelFamily::SquaredExponentialArd && lengthscales.len() != 1 {
            return Err(Error::InvalidParameter("isotropic kernel takes one lengthscale"));
        }
        if lengthscales.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::NonPositive("lengthscale"));
        }
        if !(signal_variance > 0.0) || !signal_variance.is_finite() {
            return Err(Error::NonPositive("signal variance"));
        }
        Ok(Self {
            family,
            lengthscales,
            signal_variance,
        })
    }

    pub fn squared_exponential(lengthscale: f64, signal_variance: f64) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, vec![lengthscale], signal_variance)
    }

    pub fn squared_exponential_ard(lengthscales: Vec<f64>, signal_variance: f64) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponentialArd, lengthscales, signal_variance)
    }

    pub fn matern52(lengthscale: f64, signal_variance: f64) -> Result<Self> {
        Self::new(KernelFamily::Matern52, vec![lengthscale], signal_variance)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    /// Prior variance `k(x, x)`.
    pub fn prior_variance(&self) -> f64 {
        self.signal_variance
    }

    /// Covariance at distance `r` for the isotropic families.
    pub fn eval_distance(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::NegativeDistance(r));
        }
        if self.family == KernelFamily::SquaredExponentialArd {
            return Err(Error::InvalidParameter("ARD kernel needs a point pair"));
        }
        Ok(self.of_scaled(r / self.lengthscales[0]))
    }

    /// Covariance between two points of equal dimension.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let rho2 = if self.family == KernelFamily::SquaredExponentialArd {
            a.iter()
                .zip(b)
                .zip(self.lengthscales.iter().cycle())
                .map(|((x, y), l)| {
                    let d = (x - y) / l;
                    d * d
                })
                .sum::<f64>()
        } else {
            let l = self.lengthscales[0];
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / (l * l)
        };
        self.of_scaled_squared(rho2)
    }

    pub fn eval_points(&self, a: Point2, b: Point2) -> f64 {
        self.eval(&[a.x, a.y], &[b.x, b.y])
    }

    fn of_scaled(&self, rho: f64) -> f64 {
        match self.family {
            KernelFamily::Matern52 => {
                let s = libm::sqrt(5.0) * rho;
                self.signal_variance * (1.0 + s + s * s / 3.0) * libm::exp(-s)
            }
            _ => self.signal_variance * libm::exp(-0.5 * rho * rho),
        }
    }

    fn of_scaled_squared(&self, rho2: f64) -> f64 {
        match self.family {
            KernelFamily::Matern52 => self.of_scaled(libm::sqrt(rho2)),
            _ => self.signal_variance * libm::exp(-0.5 * rho2),
        }
    }

    fn log_params(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.lengthscales.iter().map(|l| libm::log(*l)).collect();
        p.push(libm::log(self.signal_variance));
        p
    }

    fn with_log_params(&self, p: &[f64]) -> Result<Self> {
        let n = self.lengthscales.len();
        Self::new(
            self.family,
            p[..n].iter().map(|v| libm::exp(*v)).collect(),
            libm::exp(p[n]),
        )
    }
}

/// Paired inputs and targets. Inputs are stored point by point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
    noise_variance: f64,
}

impl TrainingSet {
    pub fn new(dim: usize, inputs: Vec<f64>, targets: Vec<f64>, noise_variance: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("input dimension must be at least 1"));
        }
        if inputs.len() != dim * targets.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * targets.len(),
                found: inputs.len(),
            });
        }
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(Error::InvalidParameter("noise variance must be finite and >= 0"));
        }
        Ok(Self {
            dim,
            inputs,
            targets,
            noise_variance,
        })
    }

    pub fn from_points(points: &[Point2], targets: Vec<f64>, noise_variance: f64) -> Result<Self> {
        let inputs = points.iter().flat_map(|p| [p.x, p.y]).collect();
        Self::new(2, inputs, targets, noise_variance)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn with_noise_variance(&self, noise_variance: f64) -> Result<Self> {
        Self::new(self.dim, self.inputs.clone(), self.targets.clone(), noise_variance)
    }
}

/// `K(X, X) + σ_n² I` for any pairwise covariance.
pub fn noisy_gram<F: Fn(usize, usize) -> f64>(n: usize, noise_variance: f64, k: F) -> Matrix {
    let diag = if noise_variance > 0.0 { noise_variance } else { JITTER };
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = k(i, j);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m[(i, i)] = k(i, i) + diag;
    }
    m
}

/// A GP conditioned on a training set, ready for repeated prediction.
#[derive(Debug, Clone)]
pub struct GpModel {
    data: TrainingSet,
    spec: KernelSpec,
    factor: Option<Cholesky>,
    alpha: Vec<f64>,
}

impl GpModel {
    pub fn fit(data: &TrainingSet, spec: &KernelSpec) -> Result<Self> {
        let (factor, alpha) = if data.is_empty() {
            (None, Vec::new())
        } else {
            let gram = noisy_gram(data.len(), data.noise_variance(), |i, j| {
                spec.eval(data.input(i), data.input(j))
            });
            let chol = Cholesky::new(&gram)?;
            let alpha = chol.solve(data.targets());
            (Some(chol), alpha)
        };
        Ok(Self {
            data: data.clone(),
            spec: spec.clone(),
            factor,
            alpha,
        })
    }

    /// Predictive mean and variance at one query point.
    pub fn predict(&self, query: &[f64]) -> Result<(f64, f64)> {
        if query.len() != self.data.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.data.dim(),
                found: query.len(),
            });
        }
        let prior = self.spec.eval(query, query);
        let Some(chol) = &self.factor else {
            return Ok((0.0, prior));
        };
        let k_star: Vec<f64> = (0..self.data.len())
            .map(|i| self.spec.eval(self.data.input(i), query))
            .collect();
        let mean = k_star.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = chol.solve_lower(&k_star);
        let var = prior - v.iter().map(|x| x * x).sum::<f64>();
        Ok((mean, var.clamp(0.0, prior)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

/// Predict at `queries`, given point by point with the training dimension.
pub fn gp_predict(data: &TrainingSet, queries: &[f64], spec: &KernelSpec) -> Result<Prediction> {
    let d = data.dim();
    if queries.len() % d != 0 {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: queries.len() % d,
        });
    }
    let model = GpModel::fit(data, spec)?;
    let mut mean = Vec::with_capacity(queries.len() / d);
    let mut variance = Vec::with_capacity(queries.len() / d);
    for q in queries.chunks(d) {
        let (m, v) = model.predict(q)?;
        mean.push(m);
        variance.push(v);
    }
    Ok(Prediction { mean, variance })
}

/// `log p(y | X, θ)`.
pub fn log_marginal_likelihood(data: &TrainingSet, spec: &KernelSpec) -> Result<f64> {
    let n = data.len();
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    let gram = noisy_gram(n, data.noise_variance(), |i, j| spec.eval(data.input(i), data.input(j)));
    let chol = Cholesky::new(&gram)?;
    let alpha = chol.solve(data.targets());
    let fit: f64 = data.targets().iter().zip(&alpha).map(|(y, a)| y * a).sum();
    Ok(-0.5 * fit - 0.5 * chol.log_det() - 0.5 * n as f64 * LN_2PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Extra starts drawn around the best guess.
    pub random_restarts: usize,
    /// Simplex iterations per start.
    pub max_iterations: usize,
    /// Also fit the noise variance (otherwise the training set's is kept).
    pub fit_noise: bool,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            random_restarts: 5,
            max_iterations: 300,
            fit_noise: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedKernel {
    pub kernel: KernelSpec,
    pub noise_variance: f64,
    pub log_likelihood: f64,
}

/// Maximize the log marginal likelihood with restarted Nelder-Mead in
/// log-parameter space. The result is at least as likely as every guess.
pub fn fit_hyperparameters(
    data: &TrainingSet,
    guesses: &[KernelSpec],
    options: &FitOptions,
) -> Result<FittedKernel> {
    if data.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            found: data.len(),
        });
    }
    let Some(template) = guesses.first() else {
        return Err(Error::InvalidParameter("need at least one initial guess"));
    };
    let noise_floor = 1e-8;
    let decode = |p: &[f64]| -> Result<(KernelSpec, f64)> {
        let spec = template.with_log_params(p)?;
        let noise = if options.fit_noise {
            libm::exp(p[p.len() - 1]).max(noise_floor)
        } else {
            data.noise_variance()
        };
        Ok((spec, noise))
    };
    let objective = |p: &[f64]| -> f64 {
        let Ok((spec, noise)) = decode(p) else {
            return f64::INFINITY;
        };
        let lml = if options.fit_noise {
            data.with_noise_variance(noise)
                .and_then(|d| log_marginal_likelihood(&d, &spec))
        } else {
            log_marginal_likelihood(data, &spec)
        };
        match lml {
            Ok(v) if v.is_finite() => -v,
            _ => f64::INFINITY,
        }
    };
    let encode = |spec: &KernelSpec| {
        let mut p = spec.log_params();
        if options.fit_noise {
            p.push(libm::log(data.noise_variance().max(noise_floor)));
        }
        p
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let consider = |value: f64, p: Vec<f64>, best: &mut Option<(f64, Vec<f64>)>| {
        if value.is_finite() && best.as_ref().is_none_or(|(b, _)| value < *b) {
            *best = Some((value, p));
        }
    };
    for guess in guesses {
        if guess.family() != template.family() || guess.lengthscales().len() != template.lengthscales().len() {
            return Err(Error::InvalidParameter("guesses must share one kernel family"));
        }
        let start = encode(guess);
        let start_value = objective(&start);
        consider(start_value, start.clone(), &mut best);
        let (v, p) = nelder_mead(&objective, &start, 0.5, options.max_iterations);
        consider(v, p, &mut best);
    }
    let mut rng = SeededRng::new(options.seed);
    for _ in 0..options.random_restarts {
        let Some((_, centre)) = best.clone() else { break };
        let start: Vec<f64> = centre.iter().map(|c| c + rng.normal(0.0, 1.0)).collect();
        let (v, p) = nelder_mead(&objective, &start, 0.5, options.max_iterations);
        consider(v, p, &mut best);
    }
    let (value, p) = best.ok_or(Error::NotPositiveDefinite)?;
    let (kernel, noise_variance) = decode(&p)?;
    Ok(FittedKernel {
        kernel,
        noise_variance,
        log_likelihood: -value,
    })
}

/// Minimize `f` from `start`; returns the best value and point found.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    step: f64,
    max_iterations: usize,
) -> (f64, Vec<f64>) {
    let n = start.len();
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    simplex.push((f(start), start.to_vec()));
    if max_iterations == 0 {
        return simplex.swap_remove(0);
    }
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push((f(&p), p));
    }
    let order = |s: &mut Vec<(f64, Vec<f64>)>| s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let along = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect()
    };
    for _ in 0..max_iterations {
        order(&mut simplex);
        let spread = simplex[n].0 - simplex[0].0;
        if spread.is_finite() && spread.abs() < 1e-10 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (_, p) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].1.clone();
        let reflected = along(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].0 {
            let expanded = along(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            simplex[n] = if fe < fr { (fe, expanded) } else { (fr, reflected) };
        } else if fr < simplex[n - 1].0 {
            simplex[n] = (fr, reflected);
        } else {
            let contracted = if fr < simplex[n].0 {
                along(&centroid, &worst, -0.5)
            } else {
                along(&centroid, &worst, 0.5)
            };
            let fc = f(&contracted);
            if fc < simplex[n].0.min(fr) {
                simplex[n] = (fc, contracted);
            } else {
                let best = simplex[0].1.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let p = along(&best, &entry.1, 0.5);
                    *entry = (f(&p), p);
                }
            }
        }
    }
    order(&mut simplex);
    simplex.swap_remove(0)
}

/// One-dimensional Gauss-Hermite rule for the weight `exp(-x²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub const DEFAULT_ORDER: usize = 11;

    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::NonPositive("quadrature order"));
        }
        let n = order;
        let nf = n as f64;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let pim4 = 1.0 / libm::pow(PI, 0.25);
        let mut z = 0.0f64;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => libm::sqrt(2.0 * nf + 1.0) - 1.85575 * libm::pow(2.0 * nf + 1.0, -0.16667),
                1 => z - 1.14 * libm::pow(nf, 0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * libm::sqrt(2.0 / (jf + 1.0)) * p2 - libm::sqrt(jf / (jf + 1.0)) * p3;
                }
                pp = libm::sqrt(2.0 * nf) * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-14 {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        x.reverse();
        w.reverse();
        Ok(Self { nodes: x, weights: w })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Default for GaussHermite {
    fn default() -> Self {
        Self::new(Self::DEFAULT_ORDER).expect("default order is positive")
    }
}

/// Planar offsets and weights approximating `N(0, Σ)` with a tensorized rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    offsets: Vec<Point2>,
    weights: Vec<f64>,
    degenerate: bool,
}

impl Stencil {
    /// Nodes are laid out row-major: the first axis varies slowest.
    pub fn new(cov: [[f64; 2]; 2], scheme: &GaussHermite) -> Result<Self> {
        let scale = cov[0][0].abs().max(cov[1][1].abs()).max(1.0);
        if (cov[0][1] - cov[1][0]).abs() > 1e-12 * scale {
            return Err(Error::NotSymmetric);
        }
        let c01 = 0.5 * (cov[0][1] + cov[1][0]);
        let tol = 1e-12 * scale;
        if cov[0][0] < -tol || cov[1][1] < -tol || cov[0][0] * cov[1][1] - c01 * c01 < -tol * scale {
            return Err(Error::NotPositiveDefinite);
        }
        let degenerate = cov[0][0] == 0.0 && cov[1][1] == 0.0 && c01 == 0.0;
        let l00 = libm::sqrt(cov[0][0].max(0.0));
        let l10 = if l00 > 0.0 { c01 / l00 } else { 0.0 };
        let l11 = libm::sqrt((cov[1][1] - l10 * l10).max(0.0));
        let n = scheme.order();
        let mut offsets = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let (u, v) = (SQRT_2 * scheme.nodes()[a], SQRT_2 * scheme.nodes()[b]);
                offsets.push(Point2::new(l00 * u, l10 * u + l11 * v));
                weights.push(scheme.weights()[a] * scheme.weights()[b] / PI);
            }
        }
        Ok(Self {
            offsets,
            weights,
            degenerate,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// `E[k(x, other)]` with `x ~ N(mean, Σ)`.
    pub fn expect(&self, spec: &KernelSpec, mean: Point2, other: Point2) -> f64 {
        self.expect_fn(mean, |x| spec.eval_points(x, other))
    }

    /// `E[f(x)]` with `x ~ N(mean, Σ)`.
    pub fn expect_fn<F: Fn(Point2) -> f64>(&self, mean: Point2, f: F) -> f64 {
        if self.degenerate {
            return f(mean);
        }
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(o, w)| w * f(mean + *o))
            .sum()
    }
}

/// Expected kernel `E[k(x, other)]` for `x ~ N(input_mean, input_cov)`.
pub fn expected_kernel(
    spec: &KernelSpec,
    input_mean: Point2,
    input_cov: [[f64; 2]; 2],
    other: Point2,
    scheme: &GaussHermite,
) -> Result<f64> {
    Ok(Stencil::new(input_cov, scheme)?.expect(spec, input_mean, other))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief {
    mean: Vec<f64>,
    covariance: Matrix,
}

impl GaussianBelief {
    pub fn new(mean: Vec<f64>, covariance: Matrix) -> Result<Self> {
        if !covariance.is_square() || covariance.rows() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                found: covariance.rows(),
            });
        }
        if covariance.asymmetry() > 1e-12 {
            return Err(Error::NotSymmetric);
        }
        Cholesky::new(&covariance)?;
        Ok(Self { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    /// `h(X) = ½ log((2πe)ⁿ |Σ|)`.
    pub fn differential_entropy(&self) -> Result<f64> {
        let chol = Cholesky::new(&self.covariance)?;
        Ok(0.5 * (self.dim() as f64 * (LN_2PI + 1.0) + chol.log_det()))
    }

    /// Posterior after observing `z = H x + v`, `v ~ N(0, R)`.
    pub fn condition(&self, h: &Matrix, noise: &Matrix, z: &[f64]) -> Result<GaussianBelief> {
        let m = h.rows();
        if h.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: h.cols(),
            });
        }
        if noise.rows() != m || noise.cols() != m || z.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: noise.rows(),
            });
        }
        let sh = self.covariance.mul(&h.transpose())?;
        let mut s = h.mul(&sh)?;
        for i in 0..m {
            for j in 0..m {
                s[(i, j)] += noise[(i, j)];
            }
        }
        s.symmetrize();
        let chol = Cholesky::new(&s)?;
        let hx = h.mul(&Matrix::from_fn(self.dim(), 1, |r, _| self.mean[r]))?;
        let innovation: Vec<f64> = (0..m).map(|i| z[i] - hx[(i, 0)]).collect();
        let w = chol.solve(&innovation);
        let mean = (0..self.dim())
            .map(|r| self.mean[r] + (0..m).map(|c| sh[(r, c)] * w[c]).sum::<f64>())
            .collect();
        // Σ - (ΣHᵀ) S⁻¹ (HΣ)
        let mut cov = self.covariance.clone();
        for c in 0..self.dim() {
            let col: Vec<f64> = (0..m).map(|i| sh[(c, i)]).collect();
            let y = chol.solve(&col);
            for r in 0..self.dim() {
                cov[(r, c)] -= (0..m).map(|i| sh[(r, i)] * y[i]).sum::<f64>();
            }
        }
        cov.symmetrize();
        GaussianBelief::new(mean, cov)
    }
}

/// `I(X; Z) = ½ (log|Σ_X| − log|Σ_X|Z|)`.
pub fn mi_gaussian_exact(prior: &GaussianBelief, posterior: &GaussianBelief) -> Result<f64> {
    if prior.dim() != posterior.dim() {
        return Err(Error::DimensionMismatch {
            expected: prior.dim(),
            found: posterior.dim(),
        });
    }
    let a = Cholesky::new(prior.covariance())?.log_det();
    let b = Cholesky::new(posterior.covariance())?.log_det();
    Ok(0.5 * (a - b))
}

/// Sum of per-coordinate mutual informations from marginal variances.
pub fn mi_gaussian_marginal(prior: &GaussianBelief, posterior: &GaussianBelief) -> Result<f64> {
    if prior.dim() != posterior.dim() {
        return Err(Error::DimensionMismatch {
            expected: prior.dim(),
            found: posterior.dim(),
        });
    }
    let mut total = 0.0;
    for (a, b) in prior
        .covariance()
        .diagonal()
        .into_iter()
        .zip(posterior.covariance().diagonal())
    {
        if !(a > 0.0) || !(b > 0.0) {
            return Err(Error::NonPositive("marginal variance"));
        }
        total += libm::log(a) - libm::log(b);
    }
    Ok(0.5 * total)
}
