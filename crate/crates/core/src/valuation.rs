//! Two-factor private valuation model.
//!
//! A node's valuation is `v = alpha * v_h + beta * v_g`, where `v_h` is a
//! uniform priority/hypothesis draw on [a, b] and `v_g` a Rayleigh channel
//! gain draw with scale sigma. The module provides seeded sampling, the
//! analytic CDF of the composite value, and a quadrature pdf.

use crate::error::{Error, Result};
use crate::numeric;
use crate::rng::{self, tag};

/// Parameters of the composite valuation distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuationParams {
    /// Weight on the uniform hypothesis term.
    pub alpha: f64,
    /// Weight on the Rayleigh channel term.
    pub beta: f64,
    /// Lower bound of the uniform hypothesis support.
    pub a: f64,
    /// Upper bound of the uniform hypothesis support.
    pub b: f64,
    /// Rayleigh scale (sigma, so the variance parameter is sigma^2).
    pub sigma: f64,
}

impl ValuationParams {
    pub fn new(alpha: f64, beta: f64, a: f64, b: f64, sigma: f64) -> Result<Self> {
        let p = ValuationParams { alpha, beta, a, b, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("a", self.a),
            ("b", self.b),
            ("sigma", self.sigma),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        if self.b <= self.a {
            return Err(Error::InvalidParams(format!("b ({}) must exceed a ({})", self.b, self.a)));
        }
        if self.alpha < 0.0 || self.beta < 0.0 || self.alpha + self.beta <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "weights must be nonnegative with alpha + beta > 0, got alpha={} beta={}",
                self.alpha, self.beta
            )));
        }
        if self.sigma <= 0.0 {
            return Err(Error::InvalidParams(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Lower bound of the composite support: alpha*a (the channel term is >= 0).
    pub fn support_min(&self) -> f64 {
        self.alpha * self.a
    }

    /// Effective upper end of the composite support. The Rayleigh tail beyond
    /// 12 sigma carries less than 1e-30 of mass.
    pub fn support_max(&self) -> f64 {
        self.alpha * self.b + 12.0 * self.beta * self.sigma
    }
}

/// One valuation draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuationSample {
    /// Hypothesis/priority component in [a, b].
    pub v_h: f64,
    /// Channel gain component, >= 0.
    pub v_g: f64,
    /// Composite value alpha*v_h + beta*v_g.
    pub v: f64,
}

/// K x I matrix of i.i.d. valuation draws (K nodes, I auction replications),
/// reproducible bit-for-bit from (params, K, I, seed).
#[derive(Debug, Clone)]
pub struct ValuationMatrix {
    pub params: ValuationParams,
    pub nodes: usize,
    pub replications: usize,
    pub seed: u64,
    samples: Vec<ValuationSample>,
}

impl ValuationMatrix {
    #[inline]
    pub fn get(&self, node: usize, rep: usize) -> ValuationSample {
        self.samples[node * self.replications + rep]
    }

    pub fn node_row(&self, node: usize) -> &[ValuationSample] {
        &self.samples[node * self.replications..(node + 1) * self.replications]
    }

    /// Composite values of one replication column, in node order.
    pub fn replication_values(&self, rep: usize) -> Vec<f64> {
        (0..self.nodes).map(|k| self.get(k, rep).v).collect()
    }
}

/// Draw a K x I valuation matrix. Each (node, replication) cell has its own
/// counter-based substream, so results are independent of evaluation order.
pub fn sample(params: &ValuationParams, nodes: usize, replications: usize, seed: u64) -> Result<ValuationMatrix> {
    params.validate()?;
    if nodes == 0 || replications == 0 {
        return Err(Error::InvalidParams(format!(
            "need at least one node and one replication, got K={nodes}, I={replications}"
        )));
    }
    let mut samples = Vec::with_capacity(nodes * replications);
    for k in 0..nodes {
        for i in 0..replications {
            samples.push(sample_cell(params, seed, k as u64, i as u64));
        }
    }
    Ok(ValuationMatrix { params: *params, nodes, replications, seed, samples })
}

pub(crate) fn sample_cell(params: &ValuationParams, seed: u64, node: u64, rep: u64) -> ValuationSample {
    let mut rng = rng::stream(seed, &[tag::VALUATION, node, rep]);
    let v_h = rng::uniform_in(&mut rng, params.a, params.b);
    let v_g = rng::rayleigh(&mut rng, params.sigma);
    ValuationSample { v_h, v_g, v: params.alpha * v_h + params.beta * v_g }
}

/// Analytic CDF of the composite valuation.
///
/// For alpha, beta > 0 this is the convolution of the scaled uniform and
/// Rayleigh marginals. The closed form integrates the Rayleigh CDF over the
/// hypothesis support, capped at h <= v/alpha because the channel term
/// cannot be negative:
///
///   F(v) = (h* - a)/(b - a)
///        - (beta*sigma / ((b-a)*alpha)) * sqrt(pi/2)
///          * [erf((v - alpha*a)/(sqrt(2)*beta*sigma)) - erf((v - alpha*h*)/(sqrt(2)*beta*sigma))]
///
/// with h* = min(b, v/alpha). For v >= alpha*b the cap is inactive and the
/// expression reduces to the uncapped erf difference form. Degenerate
/// weights route to the exact marginal CDFs. Output is clamped to [0, 1]
/// against erf round-off.
pub fn cdf(params: &ValuationParams, v: f64) -> Result<f64> {
    params.validate()?;
    if !v.is_finite() {
        return Err(Error::Domain(format!("cdf input must be finite, got {v}")));
    }
    Ok(cdf_unchecked(params, v))
}

pub(crate) fn cdf_unchecked(params: &ValuationParams, v: f64) -> f64 {
    let &ValuationParams { alpha, beta, a, b, sigma } = params;
    if alpha == 0.0 {
        // Pure channel term: Rayleigh CDF of v / beta.
        if v <= 0.0 {
            return 0.0;
        }
        let g = v / beta;
        return (1.0 - (-g * g / (2.0 * sigma * sigma)).exp()).clamp(0.0, 1.0);
    }
    if beta == 0.0 {
        // Pure hypothesis term: uniform CDF of v / alpha on [a, b].
        return ((v / alpha - a) / (b - a)).clamp(0.0, 1.0);
    }
    if v <= alpha * a {
        return 0.0;
    }
    let h_star = (v / alpha).min(b);
    let s = std::f64::consts::SQRT_2 * beta * sigma;
    let coeff = beta * sigma / ((b - a) * alpha) * (std::f64::consts::PI / 2.0).sqrt();
    let erf_a = numeric::erf((v - alpha * a) / s);
    let erf_star = numeric::erf((v - alpha * h_star) / s);
    let f = (h_star - a) / (b - a) - coeff * (erf_a - erf_star);
    f.clamp(0.0, 1.0)
}

/// Density of the composite valuation, by 256-point Gauss-Legendre quadrature
/// of the exact convolution integral over the hypothesis support.
pub fn pdf(params: &ValuationParams, v: f64) -> Result<f64> {
    params.validate()?;
    if !v.is_finite() {
        return Err(Error::Domain(format!("pdf input must be finite, got {v}")));
    }
    let &ValuationParams { alpha, beta, a, b, sigma } = params;
    let rayleigh_pdf = |g: f64| {
        if g <= 0.0 {
            0.0
        } else {
            g / (sigma * sigma) * (-g * g / (2.0 * sigma * sigma)).exp()
        }
    };
    if alpha == 0.0 {
        return Ok(rayleigh_pdf(v / beta) / beta);
    }
    if beta == 0.0 {
        let h = v / alpha;
        return Ok(if h >= a && h <= b { 1.0 / ((b - a) * alpha) } else { 0.0 });
    }
    if v <= alpha * a {
        return Ok(0.0);
    }
    // Integrand vanishes for h > v/alpha, so integrate only where it is smooth.
    let h_star = (v / alpha).min(b);
    let f_h = 1.0 / (b - a);
    let integrand = |h: f64| f_h * rayleigh_pdf((v - alpha * h) / beta) / beta;
    Ok(numeric::gl256(&integrand, a, h_star).max(0.0))
}
