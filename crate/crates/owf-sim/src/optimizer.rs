//! Elitist multi-objective genetic search over contract terms.
//!
//! [`run_moga`] is a generic two-objective minimizer over bounded real genes
//! (integer genes are rounded half-up before every evaluation): simulated
//! binary crossover, polynomial mutation, binary tournaments on
//! (rank, crowding) and combined parent/offspring survival. Evolution stalls
//! out when the front's hypervolume stops moving.
//!
//! [`optimize`] applies it to contracts: genes are the two availability
//! thresholds, the penalty cap fraction and the crew size. Objective one is
//! the conflict of interest, the absolute gap between min-max scaled owner
//! and contractor profits; objective two is the negated total profit. Both
//! are evaluated under common random numbers on a shared sample set, and the
//! surviving front is re-evaluated on a larger fresh sample set before
//! reporting.

pub mod pareto;

use crate::economics::{settle_terms, SettlementInputs};
use crate::model::{ContractTerms, ValidatedBundle};
use crate::simulator::{ScalingContext, ScenarioEngine};
use crate::stochastic::derive_seed;
use pareto::{compromise_index, crowding_distances, hypervolume, non_dominated_fronts};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{self, Write};

const ETA_CROSSOVER: f64 = 15.0;
const ETA_MUTATION: f64 = 20.0;

/// One bounded gene. Integer genes evolve as reals and are rounded half-up
/// for evaluation and reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneSpec {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

impl GeneSpec {
    pub fn real(name: &str, lower: f64, upper: f64) -> Self {
        GeneSpec {
            name: name.to_string(),
            lower,
            upper,
            integer: false,
        }
    }

    pub fn integer(name: &str, lower: f64, upper: f64) -> Self {
        GeneSpec {
            name: name.to_string(),
            lower,
            upper,
            integer: true,
        }
    }
}

/// Genetic algorithm knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population: usize,
    pub max_generations: u32,
    /// Stop after this many consecutive generations whose front hypervolume
    /// moved less than `hv_tolerance` relatively.
    pub stall_generations: u32,
    pub hv_tolerance: f64,
    /// Fraction of genetic children bred by crossover; the rest mutate.
    pub crossover_fraction: f64,
    /// Fraction of the population copied verbatim into the child pool.
    pub elite_fraction: f64,
    /// Seed of the evolution stream.
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 200,
            max_generations: 800,
            stall_generations: 100,
            hv_tolerance: 1e-4,
            crossover_fraction: 0.8,
            elite_fraction: 0.05,
            seed: 0,
        }
    }
}

/// One reported individual: raw genes plus its two minimized objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genes: Vec<f64>,
    pub objectives: [f64; 2],
}

/// Front hypervolume trace, one point per generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub generation: u32,
    pub hypervolume: f64,
    pub front_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MogaResult {
    /// The final rank-0 front, deduplicated, ascending in objective one.
    pub front: Vec<Individual>,
    pub convergence: Vec<ConvergencePoint>,
    pub generations: u32,
    pub stalled: bool,
}

struct Member {
    genes: Vec<f64>,
    objectives: [f64; 2],
    rank: usize,
    crowding: f64,
}

/// Genes as the objective function sees them: integer genes rounded half-up.
fn eval_genes(genes: &[f64], specs: &[GeneSpec]) -> Vec<f64> {
    genes
        .iter()
        .zip(specs)
        .map(|(g, s)| if s.integer { g.round() } else { *g })
        .collect()
}

fn cache_key(eval: &[f64]) -> Vec<u64> {
    eval.iter().map(|g| g.to_bits()).collect()
}

/// (rank asc, crowding desc, index asc) comparison for tournaments and
/// elite picking.
fn better(members: &[Member], i: usize, j: usize) -> usize {
    let (a, b) = (&members[i], &members[j]);
    if a.rank != b.rank {
        return if a.rank < b.rank { i } else { j };
    }
    if a.crowding != b.crowding {
        return if a.crowding > b.crowding { i } else { j };
    }
    i.min(j)
}

fn rank_population(members: &mut [Member]) {
    let points: Vec<[f64; 2]> = members.iter().map(|m| m.objectives).collect();
    let fronts = non_dominated_fronts(&points);
    for (rank, front) in fronts.iter().enumerate() {
        let crowd = crowding_distances(&points, front);
        for (&idx, &c) in front.iter().zip(&crowd) {
            members[idx].rank = rank;
            members[idx].crowding = c;
        }
    }
}

/// Keep the best `n` of `combined` by (rank, crowding), whole fronts first.
fn survival(mut combined: Vec<Member>, n: usize) -> Vec<Member> {
    rank_population(&mut combined);
    let mut order: Vec<usize> = (0..combined.len()).collect();
    order.sort_by(|&a, &b| {
        combined[a]
            .rank
            .cmp(&combined[b].rank)
            .then(
                combined[b]
                    .crowding
                    .partial_cmp(&combined[a].crowding)
                    .expect("crowding comparable"),
            )
            .then(a.cmp(&b))
    });
    order.truncate(n);
    order.sort_unstable();
    let mut keep: Vec<bool> = vec![false; combined.len()];
    for &i in &order {
        keep[i] = true;
    }
    let mut survivors = Vec::with_capacity(n);
    for (i, member) in combined.drain(..).enumerate() {
        if keep[i] {
            survivors.push(member);
        }
    }
    survivors
}

fn sbx_pair(
    rng: &mut ChaCha8Rng,
    a: &[f64],
    b: &[f64],
    specs: &[GeneSpec],
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = a.to_vec();
    let mut c2 = b.to_vec();
    for (i, spec) in specs.iter().enumerate() {
        if rng.random::<f64>() > 0.5 || (a[i] - b[i]).abs() < 1e-14 {
            continue;
        }
        let u: f64 = rng.random();
        let beta = if u <= 0.5 {
            (2.0 * u).powf(1.0 / (ETA_CROSSOVER + 1.0))
        } else {
            (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (ETA_CROSSOVER + 1.0))
        };
        let x1 = 0.5 * ((1.0 + beta) * a[i] + (1.0 - beta) * b[i]);
        let x2 = 0.5 * ((1.0 - beta) * a[i] + (1.0 + beta) * b[i]);
        c1[i] = x1.clamp(spec.lower, spec.upper);
        c2[i] = x2.clamp(spec.lower, spec.upper);
    }
    (c1, c2)
}

fn mutate(rng: &mut ChaCha8Rng, genes: &mut [f64], specs: &[GeneSpec]) {
    let per_gene = 1.0 / specs.len() as f64;
    for (i, spec) in specs.iter().enumerate() {
        if rng.random::<f64>() >= per_gene {
            continue;
        }
        let u: f64 = rng.random();
        let delta = if u < 0.5 {
            (2.0 * u).powf(1.0 / (ETA_MUTATION + 1.0)) - 1.0
        } else {
            1.0 - (2.0 * (1.0 - u)).powf(1.0 / (ETA_MUTATION + 1.0))
        };
        genes[i] = (genes[i] + delta * (spec.upper - spec.lower)).clamp(spec.lower, spec.upper);
    }
}

/// Minimize two objectives over bounded genes. Deterministic for a given
/// `params.seed`: the evolution consumes one sequential random stream and
/// every tie-break is explicit.
pub fn run_moga<F>(mut objective: F, specs: &[GeneSpec], params: &GaParams) -> MogaResult
where
    F: FnMut(&[f64]) -> [f64; 2],
{
    assert!(!specs.is_empty(), "at least one gene required");
    assert!(params.population >= 4, "population too small");
    assert!(params.max_generations >= 1, "need at least one generation");
    let n = params.population;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut cache: HashMap<Vec<u64>, [f64; 2]> = HashMap::new();

    let mut eval = |genes: &[f64], cache: &mut HashMap<Vec<u64>, [f64; 2]>| -> [f64; 2] {
        let eval = eval_genes(genes, specs);
        let key = cache_key(&eval);
        if let Some(hit) = cache.get(&key) {
            return *hit;
        }
        let objectives = objective(&eval);
        assert!(
            objectives.iter().all(|o| o.is_finite()),
            "objectives must be finite"
        );
        cache.insert(key, objectives);
        objectives
    };

    let mut population: Vec<Member> = (0..n)
        .map(|_| {
            let genes: Vec<f64> = specs
                .iter()
                .map(|s| s.lower + rng.random::<f64>() * (s.upper - s.lower))
                .collect();
            let objectives = eval(&genes, &mut cache);
            Member {
                genes,
                objectives,
                rank: 0,
                crowding: 0.0,
            }
        })
        .collect();
    rank_population(&mut population);

    // The hypervolume reference point is fixed from the initial spread so the
    // stall statistic is comparable across generations.
    let mut reference = [f64::NEG_INFINITY; 2];
    let mut low = [f64::INFINITY; 2];
    for m in &population {
        for o in 0..2 {
            reference[o] = reference[o].max(m.objectives[o]);
            low[o] = low[o].min(m.objectives[o]);
        }
    }
    for o in 0..2 {
        let span = (reference[o] - low[o]).max(1e-9);
        reference[o] += 0.1 * span;
    }

    let front_points = |members: &[Member]| -> Vec<[f64; 2]> {
        members
            .iter()
            .filter(|m| m.rank == 0)
            .map(|m| m.objectives)
            .collect()
    };

    // The randomly initialized population counts as generation 1, so a cap
    // of one generation reports the ranked initial population untouched.
    let mut convergence = Vec::new();
    let points = front_points(&population);
    let mut hv = hypervolume(&points, reference);
    convergence.push(ConvergencePoint {
        generation: 1,
        hypervolume: hv,
        front_size: points.len(),
    });

    let elite_count = ((params.elite_fraction * n as f64).ceil() as usize).min(n);
    let mut stall = 0u32;
    let mut stalled = false;
    let mut generations = 1u32;

    for gen in 2..=params.max_generations {
        generations = gen;

        // Child pool: elites verbatim, then crossover pairs, then mutants.
        let mut elite_order: Vec<usize> = (0..n).collect();
        elite_order.sort_by(|&a, &b| {
            population[a]
                .rank
                .cmp(&population[b].rank)
                .then(
                    population[b]
                        .crowding
                        .partial_cmp(&population[a].crowding)
                        .expect("crowding comparable"),
                )
                .then(a.cmp(&b))
        });
        let mut child_genes: Vec<Vec<f64>> = elite_order[..elite_count]
            .iter()
            .map(|&i| population[i].genes.clone())
            .collect();

        let genetic = n - elite_count;
        let n_cross = (params.crossover_fraction * genetic as f64).round() as usize;
        while child_genes.len() < elite_count + n_cross {
            let p1 = better(&population, rng.random_range(0..n), rng.random_range(0..n));
            let p2 = better(&population, rng.random_range(0..n), rng.random_range(0..n));
            let (c1, c2) = sbx_pair(&mut rng, &population[p1].genes, &population[p2].genes, specs);
            child_genes.push(c1);
            if child_genes.len() < elite_count + n_cross {
                child_genes.push(c2);
            }
        }
        while child_genes.len() < n {
            let p = better(&population, rng.random_range(0..n), rng.random_range(0..n));
            let mut genes = population[p].genes.clone();
            mutate(&mut rng, &mut genes, specs);
            child_genes.push(genes);
        }

        let children: Vec<Member> = child_genes
            .into_iter()
            .map(|genes| {
                let objectives = eval(&genes, &mut cache);
                Member {
                    genes,
                    objectives,
                    rank: 0,
                    crowding: 0.0,
                }
            })
            .collect();

        let mut combined = population;
        combined.extend(children);
        population = survival(combined, n);

        let points = front_points(&population);
        let new_hv = hypervolume(&points, reference);
        convergence.push(ConvergencePoint {
            generation: gen,
            hypervolume: new_hv,
            front_size: points.len(),
        });
        let rel = (new_hv - hv).abs() / hv.abs().max(1e-12);
        if rel < params.hv_tolerance {
            stall += 1;
        } else {
            stall = 0;
        }
        hv = new_hv;
        if stall >= params.stall_generations {
            stalled = true;
            break;
        }
    }

    // Report the rank-0 front, deduplicated on raw genes, in a stable order.
    let mut front: Vec<Individual> = population
        .iter()
        .filter(|m| m.rank == 0)
        .map(|m| Individual {
            genes: m.genes.clone(),
            objectives: m.objectives,
        })
        .collect();
    front.sort_by(|a, b| {
        a.objectives[0]
            .partial_cmp(&b.objectives[0])
            .unwrap()
            .then(a.objectives[1].partial_cmp(&b.objectives[1]).unwrap())
            .then_with(|| {
                a.genes
                    .iter()
                    .map(|g| g.to_bits())
                    .cmp(b.genes.iter().map(|g| g.to_bits()))
            })
    });
    front.dedup_by(|a, b| a.genes == b.genes);

    MogaResult {
        front,
        convergence,
        generations,
        stalled,
    }
}

/// Search box for the four contract genes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractBounds {
    pub threshold_us: (f64, f64),
    pub threshold_ld: (f64, f64),
    pub cap_fraction: (f64, f64),
    pub technicians: (u32, u32),
}

impl Default for ContractBounds {
    fn default() -> Self {
        ContractBounds {
            threshold_us: (0.50, 0.85),
            threshold_ld: (0.60, 0.95),
            cap_fraction: (0.25, 1.15),
            technicians: (7, 46),
        }
    }
}

/// Contract search configuration: GA knobs, the gene box, and the two Monte
/// Carlo sample counts (cheap during evolution, larger for the reported
/// front).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeParams {
    pub ga: GaParams,
    pub bounds: ContractBounds,
    pub search_samples: u32,
    pub final_samples: u32,
}

impl Default for OptimizeParams {
    fn default() -> Self {
        OptimizeParams {
            ga: GaParams::default(),
            bounds: ContractBounds::default(),
            search_samples: 200,
            final_samples: 2000,
        }
    }
}

/// One reported contract on the front, re-evaluated at the final sample
/// count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoSolution {
    pub threshold_us: f64,
    pub threshold_ld: f64,
    pub cap_fraction: f64,
    /// The raw crew gene before rounding.
    pub technicians_raw: f64,
    pub technicians: u32,
    /// Objective one: |scaled owner profit - scaled contractor profit|.
    pub conflict: f64,
    /// Negated objective two: expected owner plus contractor profit.
    pub total_profit: f64,
    pub owner_profit: f64,
    pub contractor_profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    /// Non-dominated contracts ascending in conflict.
    pub solutions: Vec<ParetoSolution>,
    /// Index into `solutions` of the compromise point.
    pub compromise: usize,
    pub convergence: Vec<ConvergencePoint>,
    pub scaling: ScalingContext,
    pub generations: u32,
    pub stalled: bool,
}

/// Profit means over precomputed per-sample inputs for one contract.
fn profit_means(
    inputs: &[SettlementInputs],
    contract: &ContractTerms,
    horizon_days: u32,
) -> (f64, f64) {
    let mut owner = 0.0;
    let mut contractor = 0.0;
    for input in inputs {
        let ledger = settle_terms(input, contract, horizon_days);
        owner += ledger.owner_profit;
        contractor += ledger.contractor_profit;
    }
    let n = inputs.len() as f64;
    (owner / n, contractor / n)
}

/// The scaling context comes from a coarse pre-sweep: every corner of the
/// threshold/cap box crossed with a short ladder of crew sizes. Profits seen
/// during the search are scaled against this grid and clamped to [0, 1].
fn presweep_scaling(
    engine: &ScenarioEngine,
    bounds: &ContractBounds,
    inputs_cache: &mut HashMap<u32, Vec<SettlementInputs>>,
) -> ScalingContext {
    let (q_lo, q_hi) = bounds.technicians;
    let mut crews: Vec<u32> = (0..5)
        .map(|i| q_lo + ((q_hi - q_lo) as f64 * i as f64 / 4.0).round() as u32)
        .collect();
    crews.dedup();
    let horizon = engine.bundle().sim.horizon_days;
    let mut grid = Vec::new();
    for q in crews {
        let inputs = inputs_cache
            .entry(q)
            .or_insert_with(|| engine.inputs_for_crew(q));
        for r_us in [bounds.threshold_us.0, bounds.threshold_us.1] {
            for r_ld in [bounds.threshold_ld.0, bounds.threshold_ld.1] {
                for lambda in [bounds.cap_fraction.0, bounds.cap_fraction.1] {
                    let mut contract = engine.bundle().contract.clone();
                    contract.technicians = q;
                    contract.threshold_us = r_us;
                    contract.threshold_ld = r_ld;
                    contract.cap_fraction = lambda;
                    grid.push(profit_means(inputs, &contract, horizon));
                }
            }
        }
    }
    ScalingContext::from_grid(grid)
}

/// Search the contract box for the conflict/total-profit Pareto front.
///
/// Three independent random streams derive from `master_seed`: the search
/// sample set, the evolution stream, and the final re-evaluation sample set.
/// The returned front is re-evaluated on the final set and re-filtered for
/// dominance, so reported numbers are not optimistically biased by search
/// noise.
pub fn optimize(
    bundle: &ValidatedBundle,
    params: &OptimizeParams,
    master_seed: u64,
) -> OptimizeResult {
    let search_seed = derive_seed(master_seed, "optimize/search");
    let final_seed = derive_seed(master_seed, "optimize/final");
    let evolve_seed = derive_seed(master_seed, "optimize/evolve");

    let engine = ScenarioEngine::new(bundle, search_seed, params.search_samples);
    let mut inputs_cache: HashMap<u32, Vec<SettlementInputs>> = HashMap::new();
    let scaling = presweep_scaling(&engine, &params.bounds, &mut inputs_cache);
    let horizon = bundle.sim.horizon_days;

    let specs = [
        GeneSpec::real(
            "threshold_us",
            params.bounds.threshold_us.0,
            params.bounds.threshold_us.1,
        ),
        GeneSpec::real(
            "threshold_ld",
            params.bounds.threshold_ld.0,
            params.bounds.threshold_ld.1,
        ),
        GeneSpec::real(
            "cap_fraction",
            params.bounds.cap_fraction.0,
            params.bounds.cap_fraction.1,
        ),
        GeneSpec::integer(
            "technicians",
            params.bounds.technicians.0 as f64,
            params.bounds.technicians.1 as f64,
        ),
    ];

    let base_contract = bundle.contract.clone();
    let objective = |genes: &[f64]| -> [f64; 2] {
        let mut contract = base_contract.clone();
        contract.threshold_us = genes[0];
        contract.threshold_ld = genes[1];
        contract.cap_fraction = genes[2];
        contract.technicians = genes[3].round() as u32;
        let inputs = inputs_cache
            .entry(contract.technicians)
            .or_insert_with(|| engine.inputs_for_crew(contract.technicians));
        let (owner, contractor) = profit_means(inputs, &contract, horizon);
        let conflict = (scaling.scale_owner(owner) - scaling.scale_contractor(contractor)).abs();
        [conflict, -(owner + contractor)]
    };

    let mut ga = params.ga.clone();
    ga.seed = evolve_seed;
    let moga = run_moga(objective, &specs, &ga);

    // Re-evaluate the front on a fresh, larger sample set and keep only the
    // contracts that stay non-dominated there.
    let final_engine = ScenarioEngine::new(bundle, final_seed, params.final_samples);
    let mut final_cache: HashMap<u32, Vec<SettlementInputs>> = HashMap::new();
    let mut candidates: Vec<(ParetoSolution, [f64; 2])> = Vec::new();
    for individual in &moga.front {
        let mut contract = base_contract.clone();
        contract.threshold_us = individual.genes[0];
        contract.threshold_ld = individual.genes[1];
        contract.cap_fraction = individual.genes[2];
        contract.technicians = individual.genes[3].round() as u32;
        let inputs = final_cache
            .entry(contract.technicians)
            .or_insert_with(|| final_engine.inputs_for_crew(contract.technicians));
        let (owner, contractor) = profit_means(inputs, &contract, horizon);
        let conflict = (scaling.scale_owner(owner) - scaling.scale_contractor(contractor)).abs();
        let objectives = [conflict, -(owner + contractor)];
        candidates.push((
            ParetoSolution {
                threshold_us: contract.threshold_us,
                threshold_ld: contract.threshold_ld,
                cap_fraction: contract.cap_fraction,
                technicians_raw: individual.genes[3],
                technicians: contract.technicians,
                conflict,
                total_profit: owner + contractor,
                owner_profit: owner,
                contractor_profit: contractor,
            },
            objectives,
        ));
    }
    let points: Vec<[f64; 2]> = candidates.iter().map(|(_, o)| *o).collect();
    let keep = if points.is_empty() {
        Vec::new()
    } else {
        non_dominated_fronts(&points).remove(0)
    };
    let mut solutions: Vec<ParetoSolution> = keep
        .into_iter()
        .map(|i| candidates[i].0.clone())
        .collect();
    solutions.sort_by(|a, b| {
        a.conflict
            .partial_cmp(&b.conflict)
            .unwrap()
            .then(a.total_profit.partial_cmp(&b.total_profit).unwrap())
    });
    let front_points: Vec<[f64; 2]> = solutions
        .iter()
        .map(|s| [s.conflict, -s.total_profit])
        .collect();
    let compromise = compromise_index(&front_points).unwrap_or(0);

    OptimizeResult {
        solutions,
        compromise,
        convergence: moga.convergence,
        scaling,
        generations: moga.generations,
        stalled: moga.stalled,
    }
}

/// Write the front as CSV with one row per solution: the three contract
/// fractions, the raw crew gene, the conflict objective and the total profit
/// objective (printed as the positive sum). Crew rounding, per-party profits
/// and the compromise flag live in the JSON output.
pub fn write_pareto_csv<W: Write>(result: &OptimizeResult, out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "r_us,r_ld,lambda,tech,obj1,obj2")?;
    for s in &result.solutions {
        writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{:.6e},{:.2}",
            s.threshold_us,
            s.threshold_ld,
            s.cap_fraction,
            s.technicians_raw,
            s.conflict,
            s.total_profit,
        )?;
    }
    out.flush()
}

/// Write the hypervolume trace as CSV.
pub fn write_convergence_csv<W: Write>(
    convergence: &[ConvergencePoint],
    out: W,
) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "generation,hypervolume,front_size")?;
    for p in convergence {
        writeln!(out, "{},{:.6e},{}", p.generation, p.hypervolume, p.front_size)?;
    }
    out.flush()
}

/// Write the full optimization result as pretty JSON.
pub fn write_optimize_json<W: Write>(result: &OptimizeResult, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, result)?;
    writeln!(out)
}
