//! Classical strategies: the first-bit strategy and the best shared-randomness
//! mixture of deterministic strategies subject to parity-obliviousness.

use std::io::Write;

use serde::Serialize;

use crate::error::{PomError, Result};
use crate::numerics::{simplex_maximize, LpProblem, LpSolution, LpStatus};
use crate::task::{parity_set, BitString, MAX_BITS};

/// Most deterministic strategies [`lp_optimal_classical`] will enumerate.
pub const VERTEX_CAP: u128 = 1 << 20;

/// Weights above this count toward the reported support.
pub const SUPPORT_TOL: f64 = 1e-9;

/// A deterministic strategy: Alice maps `x` to one of `alphabet` messages,
/// Bob maps `(message, y)` to a bit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassicalStrategy {
    pub n: usize,
    pub alphabet: usize,
    /// Indexed by the numeric value of `x`.
    pub encoder: Vec<usize>,
    /// Indexed by `message * n + (y - 1)`.
    pub decoder: Vec<u8>,
}

impl ClassicalStrategy {
    pub fn new(n: usize, alphabet: usize, encoder: Vec<usize>, decoder: Vec<u8>) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&n) || alphabet == 0 {
            return Err(PomError::InvalidSetup(format!(
                "n = {n}, alphabet = {alphabet}"
            )));
        }
        if encoder.len() != 1 << n || decoder.len() != alphabet * n {
            return Err(PomError::InvalidSetup(format!(
                "encoder has {} entries and decoder {}, expected {} and {}",
                encoder.len(),
                decoder.len(),
                1usize << n,
                alphabet * n
            )));
        }
        if encoder.iter().any(|&m| m >= alphabet) || decoder.iter().any(|&b| b > 1) {
            return Err(PomError::InvalidSetup("table entry out of range".into()));
        }
        Ok(Self {
            n,
            alphabet,
            encoder,
            decoder,
        })
    }

    pub fn decode(&self, message: usize, y: usize) -> u8 {
        self.decoder[message * self.n + (y - 1)]
    }
}

/// Alice sends `x_1`; Bob outputs it when asked for bit 1 and 0 otherwise.
pub fn first_bit_strategy(n: usize) -> Result<ClassicalStrategy> {
    if !(2..=MAX_BITS).contains(&n) {
        return Err(PomError::OutOfRange {
            what: "n",
            value: n,
            min: 2,
            max: MAX_BITS,
        });
    }
    let encoder = (0..1u32 << n)
        .map(|v| (v >> (n - 1)) as usize & 1)
        .collect();
    let mut decoder = vec![0u8; 2 * n];
    decoder[n] = 1; // message 1, y = 1
    ClassicalStrategy::new(n, 2, encoder, decoder)
}

/// Number of winning `(x, y)` pairs out of `2^n n`.
pub fn strategy_success_count(st: &ClassicalStrategy) -> (u64, u64) {
    let n = st.n;
    let mut wins = 0u64;
    for v in 0..1u32 << n {
        let x = BitString::new(n, v).expect("valid by construction");
        let m = st.encoder[v as usize];
        for y in 1..=n {
            if st.decode(m, y) == x.bit(y) {
                wins += 1;
            }
        }
    }
    (wins, (1u64 << n) * n as u64)
}

pub fn strategy_success(st: &ClassicalStrategy) -> f64 {
    let (wins, total) = strategy_success_count(st);
    wins as f64 / total as f64
}

/// Signed counts `|{x: enc(x)=m, s.x=0}| - |{x: enc(x)=m, s.x=1}|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityProfile {
    pub parities: Vec<BitString>,
    /// `counts[k][m]` for parity `parities[k]` and message `m`.
    pub counts: Vec<Vec<i64>>,
}

impl ParityProfile {
    pub fn is_zero(&self) -> bool {
        self.counts.iter().flatten().all(|&c| c == 0)
    }
}

pub fn strategy_parity_profile(st: &ClassicalStrategy) -> Result<ParityProfile> {
    encoder_profile(st.n, st.alphabet, &st.encoder)
}

fn encoder_profile(n: usize, alphabet: usize, encoder: &[usize]) -> Result<ParityProfile> {
    let parities = parity_set(n)?;
    let counts = parities
        .iter()
        .map(|s| {
            let mut row = vec![0i64; alphabet];
            for (v, &m) in encoder.iter().enumerate() {
                let x = BitString::new(n, v as u32).expect("valid by construction");
                row[m] += if s.dot(&x) == 0 { 1 } else { -1 };
            }
            row
        })
        .collect();
    Ok(ParityProfile { parities, counts })
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportEntry {
    pub encoder: Vec<usize>,
    pub decoder: Vec<u8>,
    pub weight: f64,
    pub success: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalLpReport {
    pub n: usize,
    pub alphabet: usize,
    pub optimal_value: f64,
    pub support_size: usize,
    /// Largest `|sum_t q_t profile_t[s][m]| / 2^n` over `(s, m)`.
    pub max_parity_deviation: f64,
    pub vertices: u64,
    pub status: LpStatus,
    #[serde(skip)]
    pub support: Vec<SupportEntry>,
}

/// Number of deterministic strategies `m^(2^n) 2^(m n)`.
pub fn vertex_count(n: usize, alphabet: usize) -> u128 {
    let enc = (alphabet as u128).checked_pow(1 << n);
    let dec = 1u128.checked_shl((alphabet * n) as u32);
    match (enc, dec) {
        (Some(e), Some(d)) => e.saturating_mul(d),
        _ => u128::MAX,
    }
}

/// Mixed-radix digits of `index` in base `alphabet`, least significant first.
fn encoder_from_index(mut index: u64, n: usize, alphabet: usize) -> Vec<usize> {
    (0..1usize << n)
        .map(|_| {
            let d = (index % alphabet as u64) as usize;
            index /= alphabet as u64;
            d
        })
        .collect()
}

fn decoder_from_index(index: u64, len: usize) -> Vec<u8> {
    (0..len).map(|k| (index >> k & 1) as u8).collect()
}

/// Best success over strategies whose message is independent of every parity
/// `s.x` given the shared randomness.
///
/// For each deterministic decoder (one value of the shared randomness) Alice
/// mixes deterministic encoders privately; the mixture's parity profile must
/// vanish. One LP per decoder, columns in encoder index order; the largest
/// value wins, ties going to the lowest decoder index.
pub fn lp_optimal_classical(n: usize, alphabet: usize) -> Result<ClassicalLpReport> {
    if !(2..=3).contains(&n) {
        return Err(PomError::OutOfRange {
            what: "n",
            value: n,
            min: 2,
            max: 3,
        });
    }
    if !(2..=4).contains(&alphabet) {
        return Err(PomError::OutOfRange {
            what: "alphabet",
            value: alphabet,
            min: 2,
            max: 4,
        });
    }
    let count = vertex_count(n, alphabet);
    if count > VERTEX_CAP {
        return Err(PomError::CapExceeded {
            count,
            cap: VERTEX_CAP,
        });
    }
    let encoders: Vec<Vec<usize>> = (0..(alphabet as u64).pow(1 << n))
        .map(|e| encoder_from_index(e, n, alphabet))
        .collect();
    let decoders = 1u64 << (alphabet * n);

    let parities = parity_set(n)?;
    let rows = parities.len() * alphabet + 1;
    let mut a = vec![vec![0.0; encoders.len()]; rows];
    for (col, encoder) in encoders.iter().enumerate() {
        let profile = encoder_profile(n, alphabet, encoder)?;
        for (k, row) in profile.counts.iter().enumerate() {
            for (m, &c) in row.iter().enumerate() {
                a[k * alphabet + m][col] = c as f64;
            }
        }
        a[rows - 1][col] = 1.0;
    }
    let mut b = vec![0.0; rows];
    b[rows - 1] = 1.0;

    let solve = |d: u64| -> Result<(LpProblem, LpSolution)> {
        let decoder = decoder_from_index(d, alphabet * n);
        let objective = encoders
            .iter()
            .map(|e| {
                let st = ClassicalStrategy {
                    n,
                    alphabet,
                    encoder: e.clone(),
                    decoder: decoder.clone(),
                };
                strategy_success(&st)
            })
            .collect();
        let problem = LpProblem::new(objective, a.clone(), b.clone())?;
        let solution = simplex_maximize(&problem);
        Ok((problem, solution))
    };

    let threads = std::thread::available_parallelism()
        .map_or(1, |p| p.get())
        .min(decoders as usize);
    let chunk = decoders.div_ceil(threads as u64);
    let per_thread: Vec<Result<Option<(u64, LpProblem, LpSolution)>>> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads as u64)
                .map(|t| {
                    let solve = &solve;
                    scope.spawn(move || {
                        let mut best: Option<(u64, LpProblem, LpSolution)> = None;
                        for d in t * chunk..((t + 1) * chunk).min(decoders) {
                            let (p, s) = solve(d)?;
                            if s.status != LpStatus::Optimal {
                                continue;
                            }
                            if best.as_ref().is_none_or(|(_, _, b)| s.value > b.value) {
                                best = Some((d, p, s));
                            }
                        }
                        Ok(best)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("LP worker panicked"))
                .collect()
        });

    let mut best: Option<(u64, LpProblem, LpSolution)> = None;
    for candidate in per_thread {
        if let Some(c) = candidate? {
            if best.as_ref().is_none_or(|(_, _, b)| c.2.value > b.value) {
                best = Some(c);
            }
        }
    }
    // the constant encoder is always feasible
    let (d, problem, solution) = best.expect("every decoder admits a feasible mixture");
    let decoder = decoder_from_index(d, alphabet * n);
    let support: Vec<SupportEntry> = solution
        .x
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > SUPPORT_TOL)
        .map(|(col, &w)| SupportEntry {
            encoder: encoders[col].clone(),
            decoder: decoder.clone(),
            weight: w,
            success: problem.objective()[col],
        })
        .collect();
    Ok(ClassicalLpReport {
        n,
        alphabet,
        optimal_value: solution.value,
        support_size: support.len(),
        max_parity_deviation: problem.max_violation(&solution.x) / (1u64 << n) as f64,
        vertices: count as u64,
        status: solution.status,
        support,
    })
}

/// Writes the optimal mixture's support as CSV: weight, success, encoder
/// table and decoder table (tables as digit strings).
pub fn write_support_csv<W: Write>(report: &ClassicalLpReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["weight", "success", "encoder", "decoder"])?;
    for s in &report.support {
        let enc: String = s
            .encoder
            .iter()
            .map(|d| char::from(b'0' + *d as u8))
            .collect();
        let dec: String = s.decoder.iter().map(|d| char::from(b'0' + *d)).collect();
        w.write_record([s.weight.to_string(), s.success.to_string(), enc, dec])?;
    }
    w.flush()?;
    Ok(())
}
