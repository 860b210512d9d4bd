//! Success probability of the game: exactly via the Born rule, exactly via
//! the Bell value, and by seeded Monte Carlo simulation of the rounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bell::bell_value;
use crate::construct::{encode_ensemble, EncodingEnsemble, MeasurementSetup, Observable};
use crate::error::{PomError, Result};
use crate::numerics::ComplexMatrix;
use crate::task::{bounds, BitString};

/// Name of the pseudo-random generator behind [`simulate`]. Shard `k` uses
/// stream `k` of the generator seeded with the user seed.
pub const GENERATOR: &str =
    "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = shard index";

/// Slack allowed on Born probabilities before they are rejected.
pub const PROBABILITY_TOL: f64 = 1e-9;

/// Exact and closed-form success figures for one setup.
#[derive(Clone, Debug, Serialize)]
pub struct GameReport {
    pub n: usize,
    pub p_direct: f64,
    pub p_via_bell: f64,
    pub bell_value: f64,
    pub pnc_bound: f64,
    pub quantum_opt: f64,
}

/// `tr[rho_x Pi]` where `Pi = (I + B)/2` when `x_y = 0` (outcome +1 decodes
/// to bit 0), else `(I - B)/2`.
pub fn exact_success_direct(e: &EncodingEnsemble, bob: &[Observable]) -> Result<f64> {
    exact_success_with_decoding(e, bob, &vec![false; bob.len()])
}

/// As [`exact_success_direct`], but where `flipped[y]` is set Bob decodes
/// outcome +1 of `B_y` as bit 1.
pub fn exact_success_with_decoding(
    e: &EncodingEnsemble,
    bob: &[Observable],
    flipped: &[bool],
) -> Result<f64> {
    let n = e.n;
    if bob.len() != n || flipped.len() != n {
        return Err(PomError::InvalidSetup(format!(
            "{} Bob observables and {} decoding flags for n = {n}",
            bob.len(),
            flipped.len()
        )));
    }
    let dim = e.states[0].rows();
    if let Some(b) = bob.iter().find(|b| b.dim() != dim) {
        return Err(PomError::DimensionMismatch(format!(
            "Bob observable of dimension {} against states of dimension {dim}",
            b.dim()
        )));
    }
    let mut total = 0.0;
    for (v, rho) in e.states.iter().enumerate() {
        let x = BitString::new(n, v as u32)?;
        let tr_rho = rho.trace().re;
        for (y, b) in bob.iter().enumerate() {
            let expect_b = trace_product(rho, b.matrix());
            let plus_is_zero = !flipped[y];
            let want_plus = (x.bit(y + 1) == 0) == plus_is_zero;
            let sign = if want_plus { 1.0 } else { -1.0 };
            total += 0.5 * (tr_rho + sign * expect_b);
        }
    }
    Ok(total / (e.states.len() * n) as f64)
}

/// `Re tr[a b]` without forming the product.
fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.rows();
    let mut s = 0.0;
    for i in 0..d {
        for k in 0..d {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s
}

/// `1/2 + <B_n> / (2^n n)`.
pub fn exact_success_via_bell(setup: &MeasurementSetup) -> Result<f64> {
    let v = bell_value(setup)?;
    Ok(0.5 + v / ((1u64 << setup.n) as f64 * setup.n as f64))
}

/// `|p_direct - p_via_bell|`; zero up to rounding for every valid setup.
pub fn success_route_gap(setup: &MeasurementSetup) -> Result<f64> {
    let e = encode_ensemble(setup)?;
    let direct = exact_success_direct(&e, &setup.bob)?;
    Ok((direct - exact_success_via_bell(setup)?).abs())
}

pub fn game_report(setup: &MeasurementSetup) -> Result<GameReport> {
    let e = encode_ensemble(setup)?;
    let b = bounds(setup.n)?;
    Ok(GameReport {
        n: setup.n,
        p_direct: exact_success_direct(&e, &setup.bob)?,
        p_via_bell: exact_success_via_bell(setup)?,
        bell_value: bell_value(setup)?,
        pnc_bound: b.pnc,
        quantum_opt: b.quantum_opt,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationResult {
    pub rounds: u64,
    pub successes: u64,
    pub estimate: f64,
    pub seed: u64,
    pub standard_error: f64,
    pub shards: u32,
    pub generator: String,
}

impl SimulationResult {
    fn from_counts(rounds: u64, successes: u64, seed: u64, shards: u32) -> Self {
        let estimate = successes as f64 / rounds as f64;
        Self {
            rounds,
            successes,
            estimate,
            seed,
            standard_error: (estimate * (1.0 - estimate) / rounds as f64).sqrt(),
            shards,
            generator: GENERATOR.to_string(),
        }
    }
}

/// One simulated round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Round {
    /// Numeric value of Alice's input.
    pub x: u32,
    /// Requested bit, 1-based.
    pub y: u8,
    /// Bob's measurement outcome, `+1` or `-1`.
    pub outcome: i8,
    pub success: bool,
}

/// Probability of outcome +1 for each `(x, y)`, conditioned on `x`.
struct OutcomeTable {
    n: usize,
    plus: Vec<f64>,
}

impl OutcomeTable {
    fn new(setup: &MeasurementSetup) -> Result<Self> {
        let e = encode_ensemble(setup)?;
        let n = setup.n;
        let mut plus = Vec::with_capacity(e.states.len() * n);
        for (x, rho) in e.states.iter().enumerate() {
            let tr = rho.trace().re;
            for (y, b) in setup.bob.iter().enumerate() {
                let p = 0.5 * (tr + trace_product(rho, b.matrix())) / tr;
                if !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&p) {
                    return Err(PomError::InvalidProbability {
                        x,
                        y: y + 1,
                        value: p,
                    });
                }
                plus.push(p.clamp(0.0, 1.0));
            }
        }
        Ok(Self { n, plus })
    }

    fn play<R: Rng>(&self, rng: &mut R) -> Round {
        let x = rng.random_range(0..1u32 << self.n);
        let y = rng.random_range(0..self.n);
        let p = self.plus[x as usize * self.n + y];
        let outcome: i8 = if rng.random::<f64>() < p { 1 } else { -1 };
        let guess = if outcome == 1 { 0 } else { 1 };
        let bit = (x >> (self.n - 1 - y)) & 1;
        Round {
            x,
            y: (y + 1) as u8,
            outcome,
            success: guess == bit,
        }
    }
}

fn shard_rng(seed: u64, shard: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

fn shard_sizes(rounds: u64, shards: u32) -> Vec<u64> {
    let base = rounds / shards as u64;
    let extra = rounds % shards as u64;
    (0..shards as u64)
        .map(|k| base + u64::from(k < extra))
        .collect()
}

/// Plays `rounds` rounds on a single stream.
pub fn simulate(setup: &MeasurementSetup, rounds: u64, seed: u64) -> Result<SimulationResult> {
    simulate_sharded(setup, rounds, seed, 1)
}

/// Splits the rounds over `shards` independent streams run on worker
/// threads; the result depends only on `(setup, rounds, seed, shards)`.
pub fn simulate_sharded(
    setup: &MeasurementSetup,
    rounds: u64,
    seed: u64,
    shards: u32,
) -> Result<SimulationResult> {
    if rounds == 0 {
        return Err(PomError::EmptyRounds);
    }
    let shards = shards.max(1);
    let table = OutcomeTable::new(setup)?;
    let sizes = shard_sizes(rounds, shards);
    let successes: u64 = std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .enumerate()
            .map(|(k, &count)| {
                let table = &table;
                scope.spawn(move || {
                    let mut rng = shard_rng(seed, k as u32);
                    (0..count).filter(|_| table.play(&mut rng).success).count() as u64
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("shard panicked"))
            .sum()
    });
    Ok(SimulationResult::from_counts(
        rounds, successes, seed, shards,
    ))
}

/// Single-stream simulation that also returns every round.
pub fn simulate_transcript(
    setup: &MeasurementSetup,
    rounds: u64,
    seed: u64,
) -> Result<(SimulationResult, Vec<Round>)> {
    if rounds == 0 {
        return Err(PomError::EmptyRounds);
    }
    let table = OutcomeTable::new(setup)?;
    let mut rng = shard_rng(seed, 0);
    let transcript: Vec<Round> = (0..rounds).map(|_| table.play(&mut rng)).collect();
    let successes = transcript.iter().filter(|r| r.success).count() as u64;
    Ok((
        SimulationResult::from_counts(rounds, successes, seed, 1),
        transcript,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{alice_observables, bob_measurements, canonical_setup, PureState};
    use crate::numerics::{C64, ZERO};
    use crate::random::{haar_state, random_setup, random_setup_on};

    #[test]
    fn canonical_direct_success() {
        for (n, want) in [(2, 0.853_553_39), (3, 0.788_675_13), (4, 0.75)] {
            let setup = canonical_setup(n).unwrap();
            let e = encode_ensemble(&setup).unwrap();
            let p = exact_success_direct(&e, &setup.bob).unwrap();
            assert!((p - want).abs() < 1e-8, "n={n}: {p}");
            assert!((p - 0.5 * (1.0 + 1.0 / (n as f64).sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn via_bell_success() {
        let p3 = exact_success_via_bell(&canonical_setup(3).unwrap()).unwrap();
        assert!((p3 - (0.5 + 4.0 * 3f64.sqrt() / 24.0)).abs() < 1e-14);
        let p4 = exact_success_via_bell(&canonical_setup(4).unwrap()).unwrap();
        assert!((p4 - 0.75).abs() < 1e-14);

        let mut v = vec![ZERO; 4];
        v[0] = C64::new(1.0, 0.0);
        let product = MeasurementSetup::new(
            2,
            PureState::new(v, 2, 2).unwrap(),
            alice_observables(2).unwrap(),
            bob_measurements(2).unwrap(),
        )
        .unwrap();
        assert!((exact_success_via_bell(&product).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_on_canonical() {
        assert!(success_route_gap(&canonical_setup(3).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn identity_on_random_setups() {
        let mut rng = ChaCha8Rng::seed_from_u64(200);
        for _ in 0..200 {
            let setup = random_setup(3, 2, &mut rng).unwrap();
            assert!(success_route_gap(&setup).unwrap() < 1e-12);
        }
    }

    #[test]
    fn identity_with_haar_state_and_canonical_observables() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut setup = canonical_setup(2).unwrap();
        setup.state = haar_state(2, 2, &mut rng).unwrap();
        assert!(success_route_gap(&setup).unwrap() < 1e-12);
        let random = random_setup_on(2, haar_state(2, 2, &mut rng).unwrap(), &mut rng).unwrap();
        assert!(success_route_gap(&random).unwrap() < 1e-12);
    }

    #[test]
    fn decoding_relabel_invariance() {
        let setup = canonical_setup(3).unwrap();
        let e = encode_ensemble(&setup).unwrap();
        let base = exact_success_direct(&e, &setup.bob).unwrap();
        for mask in 0..8u32 {
            let flipped: Vec<bool> = (0..3).map(|y| mask >> y & 1 == 1).collect();
            let bob: Vec<Observable> = setup
                .bob
                .iter()
                .zip(&flipped)
                .map(|(b, &f)| {
                    if f {
                        Observable::new_unchecked(b.matrix().scale_real(-1.0))
                    } else {
                        b.clone()
                    }
                })
                .collect();
            let p = exact_success_with_decoding(&e, &bob, &flipped).unwrap();
            assert!((p - base).abs() < 1e-14);
        }
    }

    #[test]
    fn report_fields() {
        let r = game_report(&canonical_setup(3).unwrap()).unwrap();
        assert!((r.p_direct - r.p_via_bell).abs() < 1e-12);
        assert!((r.pnc_bound - 2.0 / 3.0).abs() < 1e-15);
        let keys: Vec<String> = serde_json::to_value(&r)
            .unwrap()
            .as_object()
            .unwrap()
            .keys()
            .cloned()
            .collect();
        assert_eq!(
            keys,
            [
                "n",
                "p_direct",
                "p_via_bell",
                "bell_value",
                "pnc_bound",
                "quantum_opt"
            ]
        );
    }

    #[test]
    fn zero_rounds_rejected() {
        let setup = canonical_setup(3).unwrap();
        assert!(matches!(simulate(&setup, 0, 1), Err(PomError::EmptyRounds)));
        assert!(matches!(
            simulate_transcript(&setup, 0, 1),
            Err(PomError::EmptyRounds)
        ));
    }

    #[test]
    fn single_round_estimate_is_binary() {
        let setup = canonical_setup(3).unwrap();
        for seed in 0..10 {
            let r = simulate(&setup, 1, seed).unwrap();
            assert!(r.estimate == 0.0 || r.estimate == 1.0);
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let setup = canonical_setup(3).unwrap();
        let a = simulate_transcript(&setup, 1000, 42).unwrap();
        let b = simulate_transcript(&setup, 1000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(simulate(&setup, 1000, 42).unwrap(), a.0);
        let c = simulate_transcript(&setup, 1000, 43).unwrap();
        assert_ne!(a.1, c.1);
        let s1 = simulate_sharded(&setup, 10_001, 7, 4).unwrap();
        let s2 = simulate_sharded(&setup, 10_001, 7, 4).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn estimates_converge() {
        let setup = canonical_setup(3).unwrap();
        let exact = 0.5 * (1.0 + 1.0 / 3f64.sqrt());
        for rounds in [10_000u64, 100_000, 1_000_000] {
            let r = simulate(&setup, rounds, 2024).unwrap();
            assert!(
                (r.estimate - exact).abs() < 4.0 * r.standard_error,
                "{rounds}: {}",
                r.estimate
            );
        }
    }

    #[test]
    fn standard_error_formula() {
        let r = SimulationResult::from_counts(100, 80, 0, 1);
        assert!((r.standard_error - (0.8f64 * 0.2 / 100.0).sqrt()).abs() < 1e-15);
    }
}
