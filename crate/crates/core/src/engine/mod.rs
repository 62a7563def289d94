//! Generational genetic algorithm with exhaustive operator application.

mod config;
mod record;

use std::time::Instant;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{export_structure, initialise, Conformation, DuplicateKey, Sequence};
use crate::energy::{contact_census, ContactMatrix, EnergyModelId, Scorer};
use crate::moves::{
    collinear_run, crossover, diagonal_with, macro_mutation, pull_with, rotation, tilt_with, MacroGuidance,
    MacroParams, MoveKind,
};

pub use config::{ClockKind, RunConfig, Variant};
pub use record::{RunRecord, TracePoint};

/// Work units per virtual second. One unit is one residue-pair check during
/// energy evaluation; operator applications are charged in the same units.
/// The rate matches one core of the reference machine to within about 10%.
pub const VIRTUAL_UNITS_PER_SECOND: f64 = 4.5e8;

// per operator application, fitted against pair-check cost
const MOVE_BASE_UNITS: u64 = 720;
const MOVE_RESIDUE_UNITS: u64 = 10;

/// Energies closer than this are treated as equal when judging improvement.
pub const ENERGY_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sequence '{0}' has no hydrophobic residues")]
    NoHydrophobic(String),
}

/// What distinguishes one algorithm version from another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantSpec {
    pub variant: Variant,
    pub search_model: EnergyModelId,
    /// `None` removes macro-mutation from the operator menu.
    pub macro_guidance: Option<MacroGuidance>,
}

pub fn make_variant(variant: Variant) -> VariantSpec {
    let (search_model, macro_guidance) = match variant {
        Variant::BH => (EnergyModelId::Bm, Some(MacroGuidance::Hcc)),
        Variant::BD => (EnergyModelId::Bm, Some(MacroGuidance::BmEnergy)),
        Variant::BM => (EnergyModelId::Bm, None),
        Variant::HP => (EnergyModelId::Hp, Some(MacroGuidance::Hcc)),
    };
    VariantSpec { variant, search_model, macro_guidance }
}

impl VariantSpec {
    /// Operators with positive weight that this variant may use.
    pub fn operator_menu(&self, config: &RunConfig) -> Vec<(MoveKind, f64)> {
        config
            .weights()
            .into_iter()
            .filter(|&(k, w)| w > 0.0 && (k != MoveKind::MacroMutation || self.macro_guidance.is_some()))
            .collect()
    }
}

/// Budget clock. Virtual time advances only with counted work, so runs with
/// the same seed and config stop at the same generation.
#[derive(Debug, Clone)]
pub struct Clock {
    kind: ClockKind,
    start: Instant,
    work: u64,
}

impl Clock {
    pub fn new(kind: ClockKind) -> Self {
        Clock { kind, start: Instant::now(), work: 0 }
    }

    pub fn charge(&mut self, units: u64) {
        self.work += units;
    }

    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn seconds(&self) -> f64 {
        match self.kind {
            ClockKind::Virtual => self.work as f64 / VIRTUAL_UNITS_PER_SECOND,
            ClockKind::Wall => self.start.elapsed().as_secs_f64(),
        }
    }
}

/// Everything a run needs besides the population: scorers, operator menu,
/// macro-mutation settings and the clock.
#[derive(Debug, Clone)]
pub struct EngineContext {
    pub spec: VariantSpec,
    pub seq: Sequence,
    pub search: Scorer,
    pub bm: Scorer,
    pub menu: Vec<(MoveKind, f64)>,
    pub macro_params: Option<MacroParams>,
    pub first_improvement: bool,
    pub clock: Clock,
}

impl EngineContext {
    pub fn new(seq: &Sequence, matrix: &ContactMatrix, config: &RunConfig) -> Self {
        let spec = make_variant(config.variant);
        let bm = Scorer::new(seq, EnergyModelId::Bm, matrix);
        let search = if spec.search_model == EnergyModelId::Bm {
            bm.clone()
        } else {
            Scorer::new(seq, spec.search_model, matrix)
        };
        let macro_params = spec
            .macro_guidance
            .map(|guidance| MacroParams { repeat: config.macro_repeat, p: config.macro_p, guidance });
        EngineContext {
            spec,
            seq: seq.clone(),
            search,
            bm,
            menu: spec.operator_menu(config),
            macro_params,
            first_improvement: config.first_improvement,
            clock: Clock::new(config.clock),
        }
    }

    /// Scores `c` with the search model, charging the work to the clock.
    pub fn evaluate(&mut self, mut c: Conformation) -> Conformation {
        let n = c.len() as u64;
        self.clock.charge(n * n.saturating_sub(1) / 2);
        let e = self.search.energy(c.coords());
        c.set_energy(e);
        c
    }

    fn charge_move(&mut self) {
        self.clock.charge(MOVE_BASE_UNITS + MOVE_RESIDUE_UNITS * self.seq.len() as u64);
    }
}

fn energy_of(c: &Conformation) -> f64 {
    c.energy().expect("population members are evaluated")
}

/// Fixed-capacity member list with exact-duplicate rejection.
#[derive(Debug, Clone)]
pub struct Population {
    members: Vec<Conformation>,
    keys: FxHashSet<DuplicateKey>,
    capacity: usize,
}

impl Population {
    pub fn new(capacity: usize) -> Self {
        Population { members: Vec::with_capacity(capacity), keys: FxHashSet::default(), capacity }
    }

    /// Inserts `c` unless the population is full or already holds an
    /// identical conformation.
    pub fn add_unique(&mut self, c: Conformation) -> bool {
        if self.members.len() >= self.capacity {
            return false;
        }
        if !self.keys.insert(c.duplicate_key()) {
            return false;
        }
        self.members.push(c);
        true
    }

    pub fn contains(&self, c: &Conformation) -> bool {
        self.keys.contains(&c.duplicate_key())
    }

    /// Swaps member `i` for `c` if that keeps members distinct.
    pub fn replace(&mut self, i: usize, c: Conformation) -> bool {
        let key = c.duplicate_key();
        let old = self.members[i].duplicate_key();
        if key != old && self.keys.contains(&key) {
            return false;
        }
        self.keys.remove(&old);
        self.keys.insert(key);
        self.members[i] = c;
        true
    }

    pub fn members(&self) -> &[Conformation] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_full(&self) -> bool {
        self.members.len() >= self.capacity
    }

    /// Lowest-energy member; the earliest wins ties.
    pub fn best(&self) -> Option<&Conformation> {
        self.members.iter().reduce(|a, b| if energy_of(b) < energy_of(a) { b } else { a })
    }

    fn worst_index(&self) -> Option<usize> {
        (0..self.members.len()).reduce(|a, b| if energy_of(&self.members[b]) >= energy_of(&self.members[a]) { b } else { a })
    }
}

/// Applies `op` at every residue position, keeping the best of the parent
/// and all valid mutants. Earlier candidates win ties, so the parent
/// survives unless strictly beaten. Macro-mutation has no site and is
/// applied once.
pub fn exhaustive_mutate<R: Rng + ?Sized>(
    parent: &Conformation,
    op: MoveKind,
    ctx: &mut EngineContext,
    rng: &mut R,
) -> Conformation {
    assert!(op.is_mutation(), "{op} is not a mutation operator");
    let mut best = parent.clone();
    let mut best_e = energy_of(parent);
    if op == MoveKind::MacroMutation {
        let Some(params) = ctx.macro_params else { return best };
        ctx.clock.charge((params.repeat * parent.len()) as u64 * 4);
        let report = macro_mutation(parent, &ctx.seq, &params, &ctx.bm, rng);
        if report.accepted.is_empty() {
            return best;
        }
        let m = ctx.evaluate(report.conformation);
        return if energy_of(&m) < best_e { m } else { best };
    }
    let occ = parent.occupancy();
    let rots = crate::lattice::lattice_rotations().len();
    for pos in 0..parent.len() {
        ctx.charge_move();
        let outcome = match op {
            MoveKind::Rotation => rotation(parent, pos, rng.gen_range(1..rots)),
            MoveKind::Diagonal => diagonal_with(parent, &occ, pos),
            MoveKind::Pull => pull_with(parent, &occ, pos, rng),
            MoveKind::Tilt => tilt_with(parent, &occ, pos, collinear_run(parent, pos)),
            MoveKind::Crossover | MoveKind::MacroMutation => unreachable!(),
        };
        if let Some(m) = outcome.into_conformation() {
            let m = ctx.evaluate(m);
            let e = energy_of(&m);
            if e < best_e {
                best = m;
                best_e = e;
                if ctx.first_improvement {
                    break;
                }
            }
        }
    }
    best
}

/// Crosses `a` and `b` at every split point and returns the two best
/// distinct conformations among both parents and all valid children. The
/// second is `None` only when every candidate is identical.
pub fn exhaustive_crossover(
    a: &Conformation,
    b: &Conformation,
    ctx: &mut EngineContext,
) -> (Conformation, Option<Conformation>) {
    let n = a.len();
    let mut pool = vec![a.clone(), b.clone()];
    for pos in 1..n.saturating_sub(1) {
        ctx.charge_move();
        if let Ok((x, y)) = crossover(a, b, pos) {
            pool.push(ctx.evaluate(x));
            pool.push(ctx.evaluate(y));
        }
    }
    // stable: among equal energies the parents, then earlier splits, win
    pool.sort_by(|p, q| energy_of(p).total_cmp(&energy_of(q)));
    let mut iter = pool.into_iter();
    let first = iter.next().expect("pool holds the parents");
    let key = first.duplicate_key();
    let second = iter.find(|c| c.duplicate_key() != key);
    (first, second)
}

/// Outcome counts of one random-walk phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RandomWalkStats {
    pub accepted: usize,
    pub failed: usize,
}

/// Perturbs population members with sweeps of pull moves.
///
/// A walk state is acceptable when its energy is within the configured
/// relative band of the start energy and its structural difference from
/// the start lies in the configured range. After the first sweep that
/// produces an acceptable state, the most different one seen replaces the
/// member. If the sweep cap passes without one, the member is kept.
pub fn random_walk<R: Rng + ?Sized>(
    pop: &mut Population,
    ctx: &mut EngineContext,
    config: &RunConfig,
    rng: &mut R,
) -> RandomWalkStats {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    // worst first; stable so equal energies keep population order
    order.sort_by(|&i, &j| energy_of(&pop.members[j]).total_cmp(&energy_of(&pop.members[i])));
    let targets = ((pop.len() as f64) * config.rw_target_fraction).round() as usize;
    let mut stats = RandomWalkStats::default();
    for &i in order.iter().take(targets) {
        let start = pop.members[i].clone();
        let replaced = walk_one(&start, ctx, config, rng).map_or(false, |c| pop.replace(i, c));
        match replaced {
            true => stats.accepted += 1,
            false => {
                log::debug!("random walk left member {i} unchanged");
                stats.failed += 1;
            }
        }
    }
    stats
}

fn walk_one<R: Rng + ?Sized>(
    start: &Conformation,
    ctx: &mut EngineContext,
    config: &RunConfig,
    rng: &mut R,
) -> Option<Conformation> {
    let e0 = energy_of(start);
    let mut current = start.clone();
    let mut chosen: Option<(f64, Conformation)> = None;
    for _ in 0..config.rw_sweep_cap {
        for pos in 0..start.len() {
            ctx.charge_move();
            let occ = current.occupancy();
            let Some(next) = pull_with(&current, &occ, pos, rng).into_conformation() else { continue };
            current = ctx.evaluate(next);
            let e = energy_of(&current);
            if (e - e0).abs() > config.rw_max_energy_change * e0.abs() + ENERGY_EPS {
                continue;
            }
            let diff = current.structural_difference(start);
            if diff < config.rw_min_difference || diff > config.rw_max_difference {
                continue;
            }
            if chosen.as_ref().map_or(true, |(d, _)| diff > *d) {
                chosen = Some((diff, current.clone()));
            }
        }
        if chosen.is_some() {
            break;
        }
    }
    chosen.map(|(_, c)| c)
}

fn random_member(ctx: &mut EngineContext, config: &RunConfig, rng: &mut ChaCha8Rng) -> Conformation {
    ctx.charge_move();
    let c = initialise(ctx.seq.len(), rng, config.init_attempt_cap);
    ctx.evaluate(c)
}

/// Tops the population up with fresh random walks; small chains may not
/// have enough distinct conformations, so attempts are capped.
fn fill_random(pop: &mut Population, ctx: &mut EngineContext, config: &RunConfig, rng: &mut ChaCha8Rng) {
    let mut attempts = 0;
    while !pop.is_full() && attempts < 10 * pop.capacity() {
        let c = random_member(ctx, config, rng);
        pop.add_unique(c);
        attempts += 1;
    }
}

fn mutation_generation(
    pop: &Population,
    op: MoveKind,
    ctx: &mut EngineContext,
    config: &RunConfig,
    rng: &mut ChaCha8Rng,
) -> Population {
    let mut next = Population::new(pop.capacity());
    for parent in pop.members() {
        let child = exhaustive_mutate(parent, op, ctx, rng);
        if !next.add_unique(child) {
            next.add_unique(parent.clone());
        }
    }
    fill_random(&mut next, ctx, config, rng);
    next
}

fn crossover_generation(
    pop: &Population,
    ctx: &mut EngineContext,
    config: &RunConfig,
    rng: &mut ChaCha8Rng,
) -> Population {
    let mut next = Population::new(pop.capacity());
    let members = pop.members();
    let mut attempts = 0;
    while !next.is_full() && attempts < 10 * pop.capacity() {
        let a = &members[rng.gen_range(0..members.len())];
        let b = &members[rng.gen_range(0..members.len())];
        let (x, y) = exhaustive_crossover(a, b, ctx);
        next.add_unique(x);
        if let Some(y) = y {
            next.add_unique(y);
        }
        attempts += 1;
    }
    let mut parents: Vec<&Conformation> = members.iter().collect();
    parents.sort_by(|p, q| energy_of(p).total_cmp(&energy_of(q)));
    for p in parents {
        if next.is_full() {
            break;
        }
        next.add_unique(p.clone());
    }
    fill_random(&mut next, ctx, config, rng);
    next
}

/// Runs the genetic algorithm until the budget is spent.
///
/// Each generation picks one operator from the menu by weight and applies
/// it to the whole population. After `rwt` consecutive generations without
/// a new best, the new population is random-walked and the counter resets.
/// The best conformation found is always kept in the population.
pub fn run(seq: &Sequence, matrix: &ContactMatrix, config: &RunConfig) -> Result<RunRecord, EngineError> {
    config.validate()?;
    if seq.h_count() == 0 {
        return Err(EngineError::NoHydrophobic(seq.id.clone()));
    }
    let mut ctx = EngineContext::new(seq, matrix, config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let weights = WeightedIndex::new(ctx.menu.iter().map(|(_, w)| *w))
        .map_err(|e| EngineError::Config(format!("operator weights: {e}")))?;

    let mut pop = Population::new(config.pop_size);
    fill_random(&mut pop, &mut ctx, config, &mut rng);
    let mut best = pop.best().expect("population is never empty").clone();
    let mut trace = vec![TracePoint { seconds: ctx.clock.seconds(), energy: energy_of(&best) }];
    let mut generations = 0u64;
    let mut stagnant = 0usize;
    let mut stagnation_events = Vec::new();
    let mut improved_flags = Vec::new();
    let mut walk_totals = RandomWalkStats::default();
    let mut operator_counts = vec![0u64; MoveKind::ALL.len()];

    let reached = |best: &Conformation| config.target_energy.is_some_and(|t| energy_of(best) <= t + ENERGY_EPS);
    while ctx.clock.seconds() < config.time_budget
        && config.max_generations.map_or(true, |m| generations < m)
        && !reached(&best)
    {
        let op = ctx.menu[weights.sample(&mut rng)].0;
        operator_counts[MoveKind::ALL.iter().position(|&k| k == op).unwrap()] += 1;
        let mut next = if op == MoveKind::Crossover {
            crossover_generation(&pop, &mut ctx, config, &mut rng)
        } else {
            mutation_generation(&pop, op, &mut ctx, config, &mut rng)
        };
        generations += 1;

        let gen_best = next.best().expect("population is never empty");
        let improved = energy_of(gen_best) < energy_of(&best) - ENERGY_EPS;
        if improved {
            best = gen_best.clone();
            stagnant = 0;
            trace.push(TracePoint { seconds: ctx.clock.seconds(), energy: energy_of(&best) });
        } else {
            stagnant += 1;
        }
        improved_flags.push(improved);

        if stagnant == config.rwt {
            let stats = random_walk(&mut next, &mut ctx, config, &mut rng);
            walk_totals.accepted += stats.accepted;
            walk_totals.failed += stats.failed;
            stagnation_events.push(generations);
            stagnant = 0;
            if let Some(b) = next.best() {
                if energy_of(b) < energy_of(&best) - ENERGY_EPS {
                    best = b.clone();
                    trace.push(TracePoint { seconds: ctx.clock.seconds(), energy: energy_of(&best) });
                }
            }
        }

        if !next.contains(&best) {
            if let Some(w) = next.worst_index() {
                next.replace(w, best.clone());
            }
        }
        pop = next;
    }

    let best_search_energy = energy_of(&best);
    let best_bm_energy = ctx.bm.energy(best.coords());
    let operator_counts = MoveKind::ALL
        .iter()
        .zip(operator_counts)
        .filter(|(_, n)| *n > 0)
        .map(|(k, n)| (k.to_string(), n))
        .collect();
    Ok(RunRecord {
        sequence_id: seq.id.clone(),
        sequence: seq.letters(),
        matrix: matrix.name.clone(),
        config: config.clone(),
        search_model: ctx.spec.search_model,
        operator_menu: ctx.menu.iter().map(|(k, _)| *k).collect(),
        best_search_energy,
        best_bm_energy,
        census: contact_census(&best, seq),
        best_structure: export_structure(&best, seq, &ctx.spec.search_model.to_string(), best_search_energy),
        trace,
        generations,
        improved: improved_flags,
        stagnation_events,
        random_walk_accepted: walk_totals.accepted,
        random_walk_failures: walk_totals.failed,
        operator_counts,
        elapsed_seconds: ctx.clock.seconds(),
        work_units: ctx.clock.work(),
    })
}
