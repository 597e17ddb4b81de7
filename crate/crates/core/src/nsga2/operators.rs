//! Variation and selection operators over genes in [0, 1].

use rand::Rng;

use super::Individual;
use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::scalar::Scalar;

/// Binary tournament. Lower rank wins, then larger crowding distance,
/// then the first contestant drawn.
pub fn tournament_select<T: Scalar>(population: &[Individual<T>], rng: &mut Prng) -> Result<usize> {
    let n = population.len();
    if n < 2 {
        return Err(Error::PopulationTooSmall(n));
    }
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    Ok(tournament_winner(population, a, b))
}

pub fn tournament_winner<T: Scalar>(population: &[Individual<T>], first: usize, second: usize) -> usize {
    let (p, q) = (&population[first], &population[second]);
    if p.rank != q.rank {
        return if p.rank < q.rank { first } else { second };
    }
    if q.crowding > p.crowding {
        second
    } else {
        first
    }
}

/// Spread factor β for a uniform draw `u`.
pub fn sbx_beta<T: Scalar>(u: T, eta: T) -> T {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let expo = T::one() / (eta + T::one());
    if u <= half {
        (two * u).powf(expo)
    } else {
        (T::one() / (two * (T::one() - u))).powf(expo)
    }
}

/// One gene of simulated binary crossover before clamping. The children
/// always sum to `p1 + p2`.
pub fn sbx_gene<T: Scalar>(p1: T, p2: T, u: T, eta: T) -> (T, T) {
    let beta = sbx_beta(u, eta);
    if p1 == p2 || beta == T::one() {
        return (p1, p2);
    }
    let half = T::lit(0.5);
    let c1 = half * ((T::one() + beta) * p1 + (T::one() - beta) * p2);
    let c2 = half * ((T::one() - beta) * p1 + (T::one() + beta) * p2);
    (c1, c2)
}

/// With probability `rate`, applies SBX to every gene; otherwise the
/// children are copies. Children are clamped to [0, 1].
pub fn sbx_crossover<T: Scalar>(
    p1: &[T],
    p2: &[T],
    rate: f64,
    eta: f64,
    rng: &mut Prng,
) -> (Vec<T>, Vec<T>) {
    debug_assert_eq!(p1.len(), p2.len());
    if rng.random::<f64>() >= rate {
        return (p1.to_vec(), p2.to_vec());
    }
    let eta = T::lit(eta);
    let mut c1 = Vec::with_capacity(p1.len());
    let mut c2 = Vec::with_capacity(p2.len());
    for (&a, &b) in p1.iter().zip(p2) {
        let u = T::lit(rng.random::<f64>());
        let (x, y) = sbx_gene(a, b, u, eta);
        c1.push(clamp_unit(x));
        c2.push(clamp_unit(y));
    }
    (c1, c2)
}

/// Bounded polynomial perturbation of `x` in [0, 1] for draw `u`.
pub fn polynomial_perturb<T: Scalar>(x: T, u: T, eta: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let power = one / (eta + one);
    let delta_q = if u <= half {
        let xy = one - x;
        let val = two * u + (one - two * u) * xy.powf(eta + one);
        val.powf(power) - one
    } else {
        let xy = x;
        let val = two * (one - u) + two * (u - half) * xy.powf(eta + one);
        one - val.powf(power)
    };
    clamp_unit(x + delta_q)
}

/// Mutates each gene independently with probability `rate`.
pub fn polynomial_mutation<T: Scalar>(genes: &[T], rate: f64, eta: f64, rng: &mut Prng) -> Vec<T> {
    let eta = T::lit(eta);
    genes
        .iter()
        .map(|&g| {
            if rng.random::<f64>() < rate {
                polynomial_perturb(g, T::lit(rng.random::<f64>()), eta)
            } else {
                g
            }
        })
        .collect()
}

pub fn clamp_unit<T: Scalar>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn ind(rank: usize, crowding: f64) -> Individual<f64> {
        Individual {
            genes: vec![0.5],
            objectives: vec![0.0],
            rank,
            crowding,
        }
    }

    #[test]
    fn tournament_rules() {
        let pop = vec![ind(0, 1.0), ind(1, f64::INFINITY)];
        assert_eq!(tournament_winner(&pop, 0, 1), 0);
        assert_eq!(tournament_winner(&pop, 1, 0), 0);
        let pop = vec![ind(0, f64::INFINITY), ind(0, 1.0)];
        assert_eq!(tournament_winner(&pop, 0, 1), 0);
        let pop = vec![ind(2, 0.5), ind(2, 0.5)];
        assert_eq!(tournament_winner(&pop, 1, 0), 1);
        assert!(tournament_select(&pop[..1], &mut rng::seeded(0)).is_err());
    }

    #[test]
    fn tournament_draws_distinct() {
        let pop = vec![ind(0, 1.0), ind(0, 2.0)];
        let mut r = rng::seeded(3);
        // With two members and distinct draws the larger crowding always wins.
        for _ in 0..100 {
            assert_eq!(tournament_select(&pop, &mut r).unwrap(), 1);
        }
    }

    #[test]
    fn sbx_identities() {
        let p = vec![0.2, 0.7, 0.4];
        let (c1, c2) = sbx_crossover(&p, &p, 1.0, 15.0, &mut rng::seeded(1));
        assert_eq!(c1, p);
        assert_eq!(c2, p);
        assert_eq!(sbx_beta(0.5, 15.0), 1.0);
        assert_eq!(sbx_gene(0.2, 0.8, 0.5, 15.0), (0.2, 0.8));
        let (c1, c2) = sbx_crossover(&[0.1], &[0.9], 0.0, 15.0, &mut rng::seeded(1));
        assert_eq!((c1, c2), (vec![0.1], vec![0.9]));
    }

    #[test]
    fn sbx_preserves_mean() {
        let mut r = rng::seeded(2);
        for _ in 0..10_000 {
            let (a, b, u): (f64, f64, f64) = (r.random(), r.random(), r.random());
            let (c1, c2) = sbx_gene(a, b, u, 15.0);
            assert!((c1 + c2 - a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mutation_edges() {
        let g = vec![0.3, 0.6];
        assert_eq!(polynomial_mutation(&g, 0.0, 20.0, &mut rng::seeded(4)), g);
        let mut r = rng::seeded(5);
        for _ in 0..1000 {
            let m = polynomial_mutation(&[0.0], 1.0, 20.0, &mut r);
            assert!((0.0..=1.0).contains(&m[0]));
        }
        assert_eq!(polynomial_perturb(0.5, 0.5, 20.0), 0.5);
        assert!(polynomial_perturb(0.5, 0.1, 20.0) < 0.5);
        assert!(polynomial_perturb(0.5, 0.9, 20.0) > 0.5);
    }
}
