//! Random sphere-cap graphs: points on `S^d`, adjacency `‖x−y‖ ≥ 2−ε²` with
//! `ε = 1/(2√d)`, every pair decided with a rigorous floating-point error
//! bound. Pairs that cannot be separated from the threshold trigger
//! regeneration rather than rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::cover_family::CoverFamily;
use super::graph::{Graph, Provenance};
use crate::error::{invalid, Error, Result};
use crate::exact::pq;

/// Unit-norm tolerance for stored points.
pub const NORM_TOLERANCE: f64 = 1e-9;
const U: f64 = f64::EPSILON; // 2^-52, twice the unit roundoff

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapEmbedding {
    /// Sphere dimension `d`; points live in `R^{d+1}`.
    pub dimension: usize,
    pub points: Vec<Vec<f64>>,
    /// Rational approximation of `1/(2√d)`.
    #[serde(with = "pq")]
    pub epsilon: BigRational,
    /// Verified bound on `|epsilon − 1/(2√d)|`.
    #[serde(with = "pq")]
    pub epsilon_error: BigRational,
}

#[derive(Clone, Copy, Debug)]
pub struct CapConfig {
    pub max_dimension: usize,
    pub max_regenerations: usize,
    /// Subintervals for the cap-measure quadrature.
    pub quadrature_steps: usize,
}

impl Default for CapConfig {
    fn default() -> Self {
        CapConfig { max_dimension: 64, max_regenerations: 32, quadrature_steps: 4096 }
    }
}

fn epsilon_float(d: usize) -> f64 {
    1.0 / (2.0 * (d as f64).sqrt())
}

/// Lower and upper bounds on the normalized measure of a cap
/// `{y : x·y ≥ 1/(2√d)}` on `S^d`.
///
/// In polar angle the cap fraction is `∫_0^θ₀ sin^{d−1} / ∫_0^π sin^{d−1}`
/// with `θ₀ = arccos ε`. The integrand is increasing on `[0, π/2]`, so left
/// and right Riemann sums bracket both pieces; the result is then widened to
/// absorb floating-point rounding.
pub fn cap_fraction_bounds(d: usize, steps: usize) -> (f64, f64) {
    assert!(d >= 1);
    let theta0 = epsilon_float(d).acos();
    let slack = 1e-9;
    if d == 1 {
        let f = theta0 / std::f64::consts::PI;
        return (f * (1.0 - slack), f * (1.0 + slack));
    }
    let p = (d - 1) as i32;
    let sums = |a: f64, b: f64| {
        let h = (b - a) / steps as f64;
        let mut lo = 0.0;
        let mut hi = 0.0;
        for i in 0..steps {
            let l = a + h * i as f64;
            lo += l.sin().powi(p) * h;
            hi += (l + h).sin().powi(p) * h;
        }
        (lo, hi)
    };
    let (cap_lo, cap_hi) = sums(0.0, theta0);
    let (rest_lo, rest_hi) = sums(theta0, std::f64::consts::FRAC_PI_2);
    let lo = cap_lo / (2.0 * (cap_lo + rest_hi));
    let hi = cap_hi / (2.0 * (cap_hi + rest_lo));
    (lo * (1.0 - slack), hi * (1.0 + slack))
}

/// Smallest `d ≥ target` whose certified cap fraction exceeds ¼.
pub fn select_dimension(target: usize, config: &CapConfig) -> Result<usize> {
    let start = target.max(1);
    for d in start..=config.max_dimension.max(start) {
        if d > config.max_dimension {
            break;
        }
        if cap_fraction_bounds(d, config.quadrature_steps).0 > 0.25 {
            return Ok(d);
        }
    }
    Err(Error::BudgetExhausted(format!(
        "no sphere dimension in [{start}, {}] has certified cap measure > 1/4",
        config.max_dimension
    )))
}

/// Rational `ε ≈ 1/(2√d)` with an error bound verified by squaring exactly.
fn epsilon_rational(d: usize) -> (BigRational, BigRational) {
    let approx = BigRational::from_float(epsilon_float(d)).expect("finite");
    let err = BigRational::new(BigInt::one(), BigInt::one() << 40);
    let target = BigRational::new(BigInt::one(), BigInt::from(4 * d));
    let lo = &approx - &err;
    let hi = &approx + &err;
    assert!(&lo * &lo <= target && target <= &hi * &hi, "epsilon bound must bracket 1/(4d)");
    (approx, err)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Decision {
    Yes,
    No,
    Ambiguous,
}

impl CapEmbedding {
    fn eps_sq(&self) -> f64 {
        1.0 / (4.0 * self.dimension as f64)
    }

    /// `‖x−y‖ ≥ 2−ε²`, decided on squares with a forward error bound.
    fn decide_adjacent(&self, i: usize, j: usize) -> Decision {
        let (x, y) = (&self.points[i], &self.points[j]);
        let mut s = 0.0;
        let mut mag = 0.0;
        for (a, b) in x.iter().zip(y) {
            let t = a - b;
            s += t * t;
            mag += (a.abs() + b.abs()).powi(2);
        }
        let err = (x.len() as f64 + 4.0) * U * mag;
        let thr = (2.0 - self.eps_sq()).powi(2);
        let (thr_lo, thr_hi) = (thr * (1.0 - 4.0 * U), thr * (1.0 + 4.0 * U));
        if s - err > thr_hi {
            Decision::Yes
        } else if s + err < thr_lo {
            Decision::No
        } else {
            Decision::Ambiguous
        }
    }

    /// `x·y ≥ ε`.
    fn decide_in_cap(&self, center: usize, j: usize) -> Decision {
        let (x, y) = (&self.points[center], &self.points[j]);
        let mut p = 0.0;
        let mut mag = 0.0;
        for (a, b) in x.iter().zip(y) {
            p += a * b;
            mag += (a * b).abs();
        }
        let err = (x.len() as f64 + 4.0) * U * mag;
        let eps = epsilon_float(self.dimension);
        let (e_lo, e_hi) = (eps * (1.0 - 4.0 * U), eps * (1.0 + 4.0 * U));
        if p - err >= e_hi {
            Decision::Yes
        } else if p + err < e_lo {
            Decision::No
        } else {
            Decision::Ambiguous
        }
    }

    /// Builds the graph for explicit points; a threshold-ambiguous pair is an
    /// error (callers regenerate).
    pub fn from_points(dimension: usize, points: Vec<Vec<f64>>) -> Result<(Graph, CapEmbedding)> {
        if dimension == 0 {
            return invalid("sphere dimension must be positive");
        }
        if points.len() < 2 {
            return invalid("a cap graph needs at least two points");
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dimension + 1 {
                return invalid(format!("point {i} has {} coordinates, expected {}", p.len(), dimension + 1));
            }
            let norm = p.iter().map(|c| c * c).sum::<f64>().sqrt();
            if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
                return invalid(format!("point {i} has norm {norm}, not within {NORM_TOLERANCE} of 1"));
            }
        }
        let (epsilon, epsilon_error) = epsilon_rational(dimension);
        let emb = CapEmbedding { dimension, points, epsilon, epsilon_error };
        let n = emb.points.len();
        let mut ambiguous = None;
        let g = Graph::from_fn(n, Provenance::Cap, |u, v| match emb.decide_adjacent(u, v) {
            Decision::Yes => true,
            Decision::No => false,
            Decision::Ambiguous => {
                ambiguous.get_or_insert((u, v));
                false
            }
        })?;
        if let Some((u, v)) = ambiguous {
            return Err(Error::Indeterminate(format!("points {u} and {v} straddle the adjacency threshold")));
        }
        Ok((g, emb))
    }

    /// `H(x) = C(x) ∩ G` for every point.
    pub fn cap_family(&self) -> Result<CoverFamily> {
        let n = self.points.len();
        let mut sets = Vec::with_capacity(n);
        for x in 0..n {
            let mut set = Vec::new();
            for y in 0..n {
                match self.decide_in_cap(x, y) {
                    Decision::Yes => set.push(y),
                    Decision::No => {}
                    Decision::Ambiguous => {
                        return Err(Error::Indeterminate(format!("point {y} is on the boundary of cap {x}")))
                    }
                }
            }
            sets.push(set);
        }
        Ok(CoverFamily { sets })
    }

    pub fn epsilon_f64(&self) -> f64 {
        self.epsilon.to_f64().unwrap_or(f64::NAN)
    }
}

/// Samples `point_count` uniform points on `S^d` for the selected `d`;
/// threshold ties regenerate with the seed advanced by one.
pub fn generate_cap_graph(
    target_n: usize,
    point_count: usize,
    seed: u64,
    config: &CapConfig,
) -> Result<(Graph, CapEmbedding)> {
    if point_count < 2 {
        return invalid("point_count must be at least 2");
    }
    let d = select_dimension(target_n, config)?;
    let mut last = None;
    for attempt in 0..config.max_regenerations.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let points: Vec<Vec<f64>> = (0..point_count)
            .map(|_| loop {
                let v: Vec<f64> = (0..=d).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm > 1e-6 {
                    break v.into_iter().map(|c| c / norm).collect();
                }
            })
            .collect();
        match CapEmbedding::from_points(d, points) {
            Ok((g, emb)) => match emb.cap_family() {
                Ok(_) => return Ok((g, emb)),
                Err(e) => last = Some(e),
            },
            Err(e @ Error::Indeterminate(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::BudgetExhausted("cap graph regeneration".into())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antipodal_points_are_adjacent() {
        let (g, emb) = CapEmbedding::from_points(1, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!(g.is_adjacent(0, 1));
        assert_eq!(emb.epsilon, BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn orthogonal_points_are_not() {
        let (g, _) = CapEmbedding::from_points(1, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(!g.is_adjacent(0, 1));
    }

    #[test]
    fn bad_points_are_rejected() {
        assert!(CapEmbedding::from_points(1, vec![vec![1.0, 0.0]]).is_err());
        assert!(CapEmbedding::from_points(1, vec![vec![2.0, 0.0], vec![1.0, 0.0]]).is_err());
        assert!(CapEmbedding::from_points(2, vec![vec![1.0, 0.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn circle_cap_fraction_is_one_third() {
        let (lo, hi) = cap_fraction_bounds(1, 100);
        assert!(lo <= 1.0 / 3.0 && 1.0 / 3.0 <= hi);
        assert!(lo > 0.25);
    }

    #[test]
    fn quadrature_brackets_known_values() {
        // S^2: the cap fraction is (1 − ε)/2 with ε = 1/(2√2).
        let exact = (1.0 - 1.0 / (2.0 * 2f64.sqrt())) / 2.0;
        let (lo, hi) = cap_fraction_bounds(2, 4096);
        assert!(lo <= exact && exact <= hi, "{lo} {exact} {hi}");
        for d in 1..20 {
            let (lo, hi) = cap_fraction_bounds(d, 2048);
            assert!(lo <= hi && lo > 0.25, "d={d}: [{lo}, {hi}]");
        }
        assert_eq!(select_dimension(3, &CapConfig::default()).unwrap(), 3);
    }

    #[test]
    fn generated_caps_are_independent() {
        let (g, emb) = generate_cap_graph(2, 60, 5, &CapConfig::default()).unwrap();
        let fam = emb.cap_family().unwrap();
        for (x, set) in fam.sets.iter().enumerate() {
            assert!(set.contains(&x));
            for &y in set {
                for &z in set {
                    assert!(!g.is_adjacent(y, z), "cap {x} contains adjacent {y},{z}");
                }
            }
        }
    }
}
