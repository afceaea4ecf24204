//! Offspring laws in the stable domain of attraction.
//!
//! Every law handled here has a tail with the same shape beyond k = 2:
//!
//! ```text
//! tail(k + 1) = tail(k) * (k - a) / (k - b),   k >= 2
//! ```
//!
//! with `a = alpha` and `b = 0` for the critical family and for theta, and
//! `b = 1` for their size-biased versions. A law is then fixed by
//! `pmf(0)`, `pmf(1)`, `tail(2)` and `b`, and `pmf(k) = tail(k) (a - b) / (k - b)`
//! for `k >= 2`. All values come from this product recursion, never from
//! Gamma functions.

use rand::distr::Open01;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest number of tabulated tail values.
const TABLE_MAX: usize = 1 << 18;
/// Tabulation stops once the tail falls below this level.
const TABLE_TAIL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawKind {
    /// gf(r) = r + gamma (1 - r)^alpha.
    StableRho { gamma: f64 },
    /// The alpha-offspring law theta_alpha.
    Theta,
    /// Size-biased critical family.
    SizeBiasedRho { gamma: f64 },
    /// Size-biased theta_alpha.
    SizeBiasedTheta,
    /// Any other member of the representation (repeated size-biasing at alpha = 2).
    Other,
}

#[derive(Debug, Clone)]
pub struct OffspringLaw {
    alpha: f64,
    kind: LawKind,
    b: f64,
    mean: f64,
    /// tail[k] = P(N >= k) for k = 0..tail.len().
    tail: Vec<f64>,
    /// Last table entry is exactly zero: the support is finite.
    bounded: bool,
    /// tail(k) ~ scale * (k - shift)^(b - a) beyond the table.
    scale: f64,
    shift: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (1, 2], got {alpha}"
        )));
    }
    Ok(())
}

impl OffspringLaw {
    fn build(alpha: f64, kind: LawKind, p0: f64, p1: f64, t2: f64, b: f64, mean: f64) -> Self {
        let a = alpha;
        let mut tail = vec![1.0, 1.0 - p0, t2];
        let mut k = 2usize;
        let mut bounded = t2 == 0.0;
        while !bounded && tail[k] >= TABLE_TAIL && tail.len() < TABLE_MAX {
            let next = tail[k] * (k as f64 - a) / (k as f64 - b);
            let next = next.max(0.0);
            tail.push(next);
            k += 1;
            bounded = next == 0.0;
        }
        debug_assert!((tail[1] - tail[2] - p1).abs() < 1e-12);
        let last = tail.len() - 1;
        let shift = (a + b + 1.0) / 2.0;
        let scale = if bounded {
            0.0
        } else {
            tail[last] * (last as f64 - shift).powf(a - b)
        };
        OffspringLaw {
            alpha,
            kind,
            b,
            mean,
            tail,
            bounded,
            scale,
            shift,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    /// Mean, `f64::INFINITY` for size-biased laws with alpha < 2.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// The family constant gamma, when the law belongs to the critical family.
    pub fn gamma(&self) -> Option<f64> {
        match self.kind {
            LawKind::StableRho { gamma } | LawKind::SizeBiasedRho { gamma } => Some(gamma),
            _ => None,
        }
    }

    /// Number of tabulated tail values.
    pub fn table_len(&self) -> usize {
        self.tail.len()
    }

    /// P(N >= k).
    pub fn tail(&self, k: u64) -> f64 {
        let len = self.tail.len() as u64;
        if k < len {
            return self.tail[k as usize];
        }
        if self.bounded {
            return 0.0;
        }
        self.scale * (k as f64 - self.shift).powf(self.b - self.alpha)
    }

    /// P(N = k).
    pub fn pmf(&self, k: u64) -> f64 {
        match k {
            0 | 1 => self.tail(k) - self.tail(k + 1),
            _ => self.tail(k) * (self.alpha - self.b) / (k as f64 - self.b),
        }
    }

    /// Generating function E[r^N] in closed form.
    pub fn gf(&self, r: f64) -> f64 {
        let a = self.alpha;
        let s = 1.0 - r;
        match self.kind {
            LawKind::StableRho { gamma } => r + gamma * s.powf(a),
            LawKind::Theta => (s.powf(a) - 1.0 + a * r) / (a - 1.0),
            LawKind::SizeBiasedRho { gamma } => r * (1.0 - a * gamma * s.powf(a - 1.0)),
            LawKind::SizeBiasedTheta => r - r * s.powf(a - 1.0),
            LawKind::Other => self.gf_by_summation(r, self.tail.len() as u64),
        }
    }

    /// Generating function by direct summation of pmf(0..=k_max).
    pub fn gf_by_summation(&self, r: f64, k_max: u64) -> f64 {
        let mut acc = 0.0;
        let mut pow = 1.0;
        for k in 0..=k_max {
            acc += self.pmf(k) * pow;
            pow *= r;
            if pow == 0.0 {
                break;
            }
        }
        acc
    }

    /// Largest k with tail(k) > u, for u in (0, 1).
    fn inverse_tail(&self, u: f64) -> f64 {
        let last = self.tail.len() - 1;
        if u >= self.tail[last] || self.bounded {
            let idx = self.tail.partition_point(|&t| t > u);
            return idx.saturating_sub(1) as f64;
        }
        let x = (u / self.scale).powf(-1.0 / (self.alpha - self.b));
        ((self.shift + x).ceil() - 1.0).max(last as f64)
    }

    /// Draw with unbounded range, as a float so that astronomically large
    /// counts from heavy tails remain representable.
    pub fn sample_real<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.inverse_tail(u)
    }

    /// Draw an offspring count, saturating at `u64::MAX`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        to_count(self.sample_real(rng))
    }

    /// Draw from the law conditioned on N >= k.
    pub fn sample_at_least<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> u64 {
        let u: f64 = rng.sample(Open01);
        to_count(self.inverse_tail(u * self.tail(k)).max(k as f64))
    }
}

fn to_count(x: f64) -> u64 {
    if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x as u64
    }
}

/// The critical family with generating function r + gamma (1 - r)^alpha.
pub fn make_stable_rho(alpha: f64, gamma: f64) -> Result<OffspringLaw> {
    check_alpha(alpha)?;
    if !(gamma > 0.0 && gamma <= 1.0 / alpha + 1e-15) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in (0, 1/alpha], got {gamma}"
        )));
    }
    let gamma = gamma.min(1.0 / alpha);
    let p1 = (1.0 - alpha * gamma).max(0.0);
    let t2 = gamma * (alpha - 1.0);
    Ok(OffspringLaw::build(
        alpha,
        LawKind::StableRho { gamma },
        gamma,
        p1,
        t2,
        0.0,
        1.0,
    ))
}

/// The alpha-offspring law; the point mass at 2 when alpha = 2.
pub fn make_theta(alpha: f64) -> Result<OffspringLaw> {
    check_alpha(alpha)?;
    Ok(OffspringLaw::build(
        alpha,
        LawKind::Theta,
        0.0,
        0.0,
        1.0,
        0.0,
        alpha / (alpha - 1.0),
    ))
}

/// Size-biased version k pmf(k) / mean.
pub fn size_bias(law: &OffspringLaw) -> Result<OffspringLaw> {
    let m = law.mean;
    if !(m > 0.0) {
        return Err(Error::InvalidParameter("size-biasing a zero-mean law".into()));
    }
    if !m.is_finite() {
        return Err(Error::InvalidParameter(
            "size-biasing a law with infinite mean".into(),
        ));
    }
    let a = law.alpha;
    let p1 = law.pmf(1) / m;
    let t2 = 1.0 - p1;
    let kind = match law.kind {
        LawKind::StableRho { gamma } => LawKind::SizeBiasedRho { gamma },
        LawKind::Theta => LawKind::SizeBiasedTheta,
        _ => LawKind::Other,
    };
    let mean = if a < 2.0 {
        f64::INFINITY
    } else {
        p1 + 2.0 * t2
    };
    Ok(OffspringLaw::build(a, kind, 0.0, p1, t2, 1.0, mean))
}

/// Survival probabilities q_n = P(height >= n) of a critical law.
#[derive(Debug, Clone)]
pub struct SurvivalTable {
    pub alpha: f64,
    pub gamma: f64,
    q: Vec<f64>,
}

impl SurvivalTable {
    pub fn q(&self, n: usize) -> f64 {
        self.q[n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    pub fn n_max(&self) -> usize {
        self.q.len() - 1
    }
}

/// q_0 = 1 and q_n = 1 - gf(1 - q_{n-1}); for the critical family this is
/// q_n = q_{n-1} - gamma q_{n-1}^alpha.
pub fn survival_probs(law: &OffspringLaw, n_max: usize) -> Result<SurvivalTable> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    if (law.mean - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "survival table needs a critical law, mean is {}",
            law.mean
        )));
    }
    let mut q = Vec::with_capacity(n_max + 1);
    q.push(1.0);
    let gamma = law.gamma().unwrap_or(f64::NAN);
    for n in 1..=n_max {
        let prev: f64 = q[n - 1];
        let next = match law.kind {
            LawKind::StableRho { gamma } => prev - gamma * prev.powf(law.alpha),
            _ => 1.0 - law.gf(1.0 - prev),
        };
        q.push(next);
    }
    Ok(SurvivalTable {
        alpha: law.alpha,
        gamma,
        q,
    })
}

/// The scalar laws V_alpha, R_alpha and the uniform law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialLaw {
    /// Density (a) (1 - x)^(a - 1) on [0, 1] with a = alpha / (alpha - 1).
    V { alpha: f64 },
    /// Tail (1 + x)^(-a) on [0, inf).
    R { alpha: f64 },
    Uniform,
}

impl SpecialLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        match *self {
            SpecialLaw::V { alpha } => 1.0 - u.powf((alpha - 1.0) / alpha),
            SpecialLaw::R { alpha } => u.powf(-(alpha - 1.0) / alpha) - 1.0,
            SpecialLaw::Uniform => u,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            SpecialLaw::V { alpha } => {
                let x = x.clamp(0.0, 1.0);
                1.0 - (1.0 - x).powf(alpha / (alpha - 1.0))
            }
            SpecialLaw::R { alpha } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (1.0 + x).powf(-alpha / (alpha - 1.0))
                }
            }
            SpecialLaw::Uniform => x.clamp(0.0, 1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_pmf() {
        let law = make_stable_rho(2.0, 0.5).unwrap();
        assert_eq!(law.pmf(0), 0.5);
        assert_eq!(law.pmf(1), 0.0);
        assert_eq!(law.pmf(2), 0.5);
        assert_eq!(law.pmf(3), 0.0);
        assert_eq!(law.tail(3), 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(make_stable_rho(1.0, 0.5).is_err());
        assert!(make_stable_rho(2.1, 0.4).is_err());
        assert!(make_stable_rho(1.5, 0.7).is_err());
        assert!(make_theta(0.9).is_err());
    }

    #[test]
    fn inverse_tail_matches_definition() {
        let law = make_theta(1.5).unwrap();
        for &u in &[0.9, 0.5, 0.2, 0.01, 1e-5] {
            let k = law.inverse_tail(u) as u64;
            assert!(law.tail(k) > u);
            assert!(law.tail(k + 1) <= u);
        }
    }

    #[test]
    fn far_tail_is_continuous_at_table_end() {
        let law = size_bias(&make_theta(1.5).unwrap()).unwrap();
        let last = law.table_len() as u64 - 1;
        let recursed = law.tail(last) * (last as f64 - 1.5) / (last as f64 - 1.0);
        assert!((law.tail(last + 1) / recursed - 1.0).abs() < 1e-9);
    }
}
