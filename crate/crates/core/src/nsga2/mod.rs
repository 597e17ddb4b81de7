//! NSGA-II over genes normalized to [0, 1], minimizing every objective.

mod operators;
mod sorting;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use operators::{
    clamp_unit, polynomial_mutation, polynomial_perturb, sbx_beta, sbx_crossover, sbx_gene,
    tournament_select, tournament_winner,
};
pub use sorting::{crowding_distance, dominates, fast_non_dominated_sort, ranks_from_fronts};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

/// Genes closer than this (max-norm) are treated as the same solution.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Individual<T> {
    pub genes: Vec<T>,
    /// Empty until evaluated.
    pub objectives: Vec<T>,
    pub rank: usize,
    pub crowding: T,
}

impl<T: Scalar> Individual<T> {
    pub fn new(genes: Vec<T>) -> Self {
        Self {
            genes,
            objectives: Vec::new(),
            rank: 0,
            crowding: T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NsgaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    pub sbx_eta: f64,
    pub pm_eta: f64,
    pub seed: u64,
}

impl Default for NsgaConfig {
    fn default() -> Self {
        Self {
            population_size: 500,
            generations: 100,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            sbx_eta: 15.0,
            pm_eta: 20.0,
            seed: 0,
        }
    }
}

impl NsgaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 || self.population_size % 2 != 0 {
            return Err(Error::config(
                "nsga.population_size",
                "must be an even number of at least 4",
            ));
        }
        for (name, r) in [
            ("nsga.crossover_rate", self.crossover_rate),
            ("nsga.mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::config(name, "must lie in [0, 1]"));
            }
        }
        for (name, e) in [("nsga.sbx_eta", self.sbx_eta), ("nsga.pm_eta", self.pm_eta)] {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::config(name, "must be positive"));
            }
        }
        Ok(())
    }
}

/// Deduplicated rank-0 members of the final population.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFrontRaw<T> {
    pub members: Vec<(Vec<T>, Vec<T>)>,
}

impl<T: Scalar> ParetoFrontRaw<T> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct GenerationStats<T: Scalar> {
    pub generation: usize,
    pub front_size: usize,
    /// Per-objective minimum and maximum over the rank-0 set.
    pub min: Vec<T>,
    pub max: Vec<T>,
}

/// `gen,front_size,min_f1,max_f1,min_f2,max_f2` CSV for two objectives.
pub fn stats_csv<T: Scalar>(stats: &[GenerationStats<T>]) -> String {
    let mut out = String::from("gen,front_size,min_f1,max_f1,min_f2,max_f2\n");
    for s in stats {
        let get = |v: &[T], i: usize| v.get(i).map_or(String::new(), |x| x.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.generation,
            s.front_size,
            get(&s.min, 0),
            get(&s.max, 0),
            get(&s.min, 1),
            get(&s.max, 1)
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct NsgaOutcome<T: Scalar> {
    pub front: ParetoFrontRaw<T>,
    pub stats: Vec<GenerationStats<T>>,
    pub population: Vec<Individual<T>>,
}

fn evaluate_all<T, F>(individuals: &mut [Individual<T>], evaluator: &F) -> Result<()>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T> + Sync,
{
    let results: Vec<Vec<T>> = individuals
        .par_iter()
        .map(|ind| evaluator(&ind.genes))
        .collect();
    let width = results.first().map_or(0, Vec::len);
    for (ind, obj) in individuals.iter_mut().zip(results) {
        if obj.is_empty() || obj.len() != width || obj.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteObjective {
                genes: ind.genes.iter().map(|g| g.as_f64()).collect(),
            });
        }
        ind.objectives = obj;
    }
    Ok(())
}

/// Assigns rank and per-front crowding to every individual.
pub fn rank_and_crowd<T: Scalar>(population: &mut [Individual<T>]) -> Result<Vec<Vec<usize>>> {
    for (i, ind) in population.iter().enumerate() {
        if ind.objectives.is_empty() {
            return Err(Error::Unevaluated { index: i });
        }
    }
    let objs: Vec<&[T]> = population.iter().map(|p| p.objectives.as_slice()).collect();
    let fronts = fast_non_dominated_sort(&objs)?;
    let dists: Vec<Vec<T>> = fronts
        .iter()
        .map(|front| {
            let members: Vec<&[T]> = front.iter().map(|&i| objs[i]).collect();
            crowding_distance(&members)
        })
        .collect();
    for (r, (front, dist)) in fronts.iter().zip(dists).enumerate() {
        for (&i, d) in front.iter().zip(dist) {
            population[i].rank = r;
            population[i].crowding = d;
        }
    }
    Ok(fronts)
}

/// Keeps `size` individuals by front order, filling the last admitted
/// front by descending crowding distance.
fn survive<T: Scalar>(mut merged: Vec<Individual<T>>, size: usize) -> Result<Vec<Individual<T>>> {
    let fronts = rank_and_crowd(&mut merged)?;
    let mut keep = Vec::with_capacity(size);
    for front in fronts {
        if keep.len() + front.len() <= size {
            keep.extend(front);
        } else {
            let mut last = front;
            last.sort_by(|&a, &b| {
                merged[b]
                    .crowding
                    .partial_cmp(&merged[a].crowding)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            keep.extend(last.into_iter().take(size - keep.len()));
        }
        if keep.len() == size {
            break;
        }
    }
    let mut slots: Vec<Option<Individual<T>>> = merged.into_iter().map(Some).collect();
    Ok(keep
        .into_iter()
        .map(|i| slots[i].take().expect("each index kept once"))
        .collect())
}

fn stats_of<T: Scalar>(generation: usize, population: &[Individual<T>]) -> GenerationStats<T> {
    let front: Vec<&Individual<T>> = population.iter().filter(|p| p.rank == 0).collect();
    let m = front.first().map_or(0, |p| p.objectives.len());
    let mut min = vec![T::infinity(); m];
    let mut max = vec![T::neg_infinity(); m];
    for p in &front {
        for k in 0..m {
            min[k] = min[k].min(p.objectives[k]);
            max[k] = max[k].max(p.objectives[k]);
        }
    }
    GenerationStats {
        generation,
        front_size: front.len(),
        min,
        max,
    }
}

/// Rank-0 members with near-duplicate genes removed (first kept).
pub fn extract_front<T: Scalar>(population: &[Individual<T>]) -> ParetoFrontRaw<T> {
    let tol = T::lit(DUPLICATE_TOLERANCE);
    let mut members: Vec<(Vec<T>, Vec<T>)> = Vec::new();
    for p in population.iter().filter(|p| p.rank == 0) {
        let dup = members.iter().any(|(g, _)| {
            g.iter()
                .zip(&p.genes)
                .all(|(&a, &b)| (a - b).abs() <= tol)
        });
        if !dup {
            members.push((p.genes.clone(), p.objectives.clone()));
        }
    }
    ParetoFrontRaw { members }
}

pub fn run<T, F>(n_genes: usize, evaluator: F, config: &NsgaConfig) -> Result<NsgaOutcome<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T> + Sync,
{
    run_observed(n_genes, evaluator, config, |_, _| {})
}

/// Runs the generational loop, calling `observer` with each generation's
/// surviving population (generation 0 is the initial population).
pub fn run_observed<T, F, O>(
    n_genes: usize,
    evaluator: F,
    config: &NsgaConfig,
    mut observer: O,
) -> Result<NsgaOutcome<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T> + Sync,
    O: FnMut(usize, &[Individual<T>]),
{
    config.validate()?;
    if n_genes == 0 {
        return Err(Error::config("nsga.genes", "need at least one gene"));
    }
    let mut rng = rng::seeded(config.seed);
    let n = config.population_size;
    let mut population: Vec<Individual<T>> = (0..n)
        .map(|_| Individual::new((0..n_genes).map(|_| T::lit(rng.random::<f64>())).collect()))
        .collect();
    evaluate_all(&mut population, &evaluator)?;
    rank_and_crowd(&mut population)?;
    let mut stats = vec![stats_of(0, &population)];
    observer(0, &population);

    for generation in 1..=config.generations {
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let a = tournament_select(&population, &mut rng)?;
            let b = tournament_select(&population, &mut rng)?;
            let (c1, c2) = sbx_crossover(
                &population[a].genes,
                &population[b].genes,
                config.crossover_rate,
                config.sbx_eta,
                &mut rng,
            );
            for c in [c1, c2] {
                let m = polynomial_mutation(&c, config.mutation_rate, config.pm_eta, &mut rng);
                children.push(Individual::new(m));
            }
        }
        children.truncate(n);
        evaluate_all(&mut children, &evaluator)?;
        population.extend(children);
        population = survive(population, n)?;
        stats.push(stats_of(generation, &population));
        observer(generation, &population);
    }
    Ok(NsgaOutcome {
        front: extract_front(&population),
        stats,
        population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(NsgaConfig::default().validate().is_ok());
        assert!(NsgaConfig { population_size: 5, ..Default::default() }.validate().is_err());
        assert!(NsgaConfig { population_size: 2, ..Default::default() }.validate().is_err());
        assert!(NsgaConfig { mutation_rate: 1.5, ..Default::default() }.validate().is_err());
        assert!(NsgaConfig { sbx_eta: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn identity_problem_converges_to_origin() {
        let cfg = NsgaConfig { population_size: 100, generations: 50, seed: 1, ..Default::default() };
        let out = run(2, |g: &[f64]| g.to_vec(), &cfg).unwrap();
        assert!(!out.front.is_empty());
        for (_, obj) in &out.front.members {
            assert!(obj[0].hypot(obj[1]) < 0.05, "{obj:?}");
        }
    }

    #[test]
    fn same_seed_same_front() {
        let cfg = NsgaConfig { population_size: 20, generations: 10, seed: 4, ..Default::default() };
        let f = |g: &[f64]| vec![g[0], 1.0 - g[0] + g[1]];
        let a = run(2, f, &cfg).unwrap();
        let b = run(2, f, &cfg).unwrap();
        assert_eq!(a.front, b.front);
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.stats.len(), 11);
    }

    #[test]
    fn non_finite_objective_names_genes() {
        let cfg = NsgaConfig { population_size: 4, generations: 1, ..Default::default() };
        match run(1, |_: &[f64]| vec![f64::NAN], &cfg) {
            Err(Error::NonFiniteObjective { genes }) => assert_eq!(genes.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn front_is_deduplicated() {
        let pop = vec![
            Individual { genes: vec![0.5], objectives: vec![1.0], rank: 0, crowding: 0.0 },
            Individual { genes: vec![0.5], objectives: vec![1.0], rank: 0, crowding: 0.0 },
            Individual { genes: vec![0.7], objectives: vec![2.0], rank: 1, crowding: 0.0 },
        ];
        assert_eq!(extract_front(&pop).len(), 1);
    }

    #[test]
    fn stats_csv_layout() {
        let s = vec![GenerationStats { generation: 0, front_size: 2, min: vec![1.0, 2.0], max: vec![3.0, 4.0] }];
        assert_eq!(stats_csv(&s), "gen,front_size,min_f1,max_f1,min_f2,max_f2\n0,2,1,3,2,4\n");
    }
}
