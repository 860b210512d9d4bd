//! See-saw search for the quantum maximum of the Bell expression: exact
//! alternating maximization over Bob's observables, Alice's observables and
//! the shared state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bell::{bell_operator, bell_value};
use crate::construct::{check_quantum_n, MeasurementSetup, Observable, PureState, SetupDocument};
use crate::error::{PomError, Result};
use crate::numerics::{eig_hermitian, matrix_sign, reduce_to_a, reduce_to_b};
use crate::random::random_setup_on;

/// Largest local dimension the search accepts (joint dimension 256).
pub const MAX_SEESAW_DIM: usize = 16;

/// Allowed decrease per step before a trace counts as non-monotone.
pub const MONOTONE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeesawConfig {
    pub n: usize,
    pub dim: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl SeesawConfig {
    /// Defaults: local dimension `2^ceil(n/2)`, 10 restarts, 2000 iterations,
    /// tolerance 1e-12, seed 0.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            dim: 1 << n.div_ceil(2),
            restarts: 10,
            max_iterations: 2000,
            tolerance: 1e-12,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_quantum_n(self.n)?;
        if !self.dim.is_power_of_two() || self.dim > MAX_SEESAW_DIM {
            return Err(PomError::InvalidSetup(format!(
                "local dimension {} must be a power of two at most {MAX_SEESAW_DIM}",
                self.dim
            )));
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(PomError::InvalidSetup(
                "restarts and max_iterations must be positive".into(),
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(PomError::InvalidSetup(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SeesawTrace {
    pub restart: usize,
    /// Objective at the start and after every step.
    pub objectives: Vec<f64>,
    pub final_setup: MeasurementSetup,
    pub converged: bool,
}

impl SeesawTrace {
    pub fn best_objective(&self) -> f64 {
        *self
            .objectives
            .last()
            .expect("trace holds the starting objective")
    }

    /// Largest drop between consecutive objectives (0 for a monotone trace).
    pub fn max_decrease(&self) -> f64 {
        self.objectives
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }

    pub fn is_monotone(&self) -> bool {
        self.max_decrease() <= MONOTONE_TOL
    }
}

#[derive(Serialize)]
struct TraceDocument<'a> {
    restart: usize,
    objectives: &'a [f64],
    converged: bool,
    final_setup: SetupDocument,
}

impl Serialize for SeesawTrace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let doc = TraceDocument {
            restart: self.restart,
            objectives: &self.objectives,
            converged: self.converged,
            final_setup: SetupDocument::from_setup(&self.final_setup)
                .map_err(serde::ser::Error::custom)?,
        };
        doc.serialize(s)
    }
}

/// One round of exact coordinate updates: Bob, then Alice, then the state.
pub fn seesaw_step(setup: &MeasurementSetup) -> Result<MeasurementSetup> {
    setup.validate()?;
    let (da, db) = (setup.dim_a(), setup.dim_b());
    let mut next = setup.clone();

    let psi = next.state.vector().to_vec();
    next.bob = next
        .alice_combinations()?
        .iter()
        .map(|c| {
            Ok(Observable::new_unchecked(matrix_sign(&reduce_to_b(
                &psi, da, db, c,
            )?)?))
        })
        .collect::<Result<_>>()?;

    next.alice = next
        .bob_combinations()?
        .iter()
        .map(|d| {
            Ok(Observable::new_unchecked(matrix_sign(&reduce_to_a(
                &psi, da, db, d,
            )?)?))
        })
        .collect::<Result<_>>()?;

    let top = eig_hermitian(&bell_operator(&next)?.matrix)?.top_vector();
    next.state = PureState::normalized(top, da, db)?;
    Ok(next)
}

fn run_restart(cfg: &SeesawConfig, restart: usize) -> Result<SeesawTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let mut setup = random_setup_on(cfg.n, PureState::maximally_entangled(cfg.dim), &mut rng)?;
    let mut objectives = vec![bell_value(&setup)?];
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        setup = seesaw_step(&setup)?;
        let value = bell_value(&setup)?;
        let change = (value - objectives.last().copied().unwrap_or(value)).abs();
        objectives.push(value);
        if change < cfg.tolerance {
            converged = true;
            break;
        }
    }
    Ok(SeesawTrace {
        restart,
        objectives,
        final_setup: setup,
        converged,
    })
}

/// Every restart's trace, in restart order. Restart `k` draws its start
/// from stream `k` of a generator seeded with `cfg.seed`.
pub fn seesaw_restarts(cfg: &SeesawConfig) -> Result<Vec<SeesawTrace>> {
    cfg.validate()?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.restarts)
            .map(|k| scope.spawn(move || run_restart(cfg, k)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("see-saw worker panicked"))
            .collect()
    })
}

/// Index of the trace with the largest final objective, lowest index on ties.
pub fn best_trace(traces: &[SeesawTrace]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, t) in traces.iter().enumerate() {
        if best.is_none_or(|b| t.best_objective() > traces[b].best_objective()) {
            best = Some(k);
        }
    }
    best
}

/// Best trace over all restarts.
pub fn seesaw_run(cfg: &SeesawConfig) -> Result<SeesawTrace> {
    let mut traces = seesaw_restarts(cfg)?;
    let k = best_trace(&traces).expect("at least one restart");
    Ok(traces.swap_remove(k))
}
