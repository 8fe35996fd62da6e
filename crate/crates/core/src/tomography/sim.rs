//! Distributed simulation of a d-outcome measurement by players who can
//! each send only `w` bits, and the k-outcome tomography pipeline built
//! on it.
//!
//! Protocol: partition the `d` outcomes into `B = ceil(d / (2^w - 1))`
//! blocks of at most `2^w - 1` outcomes. One round consumes `2B` players,
//! each holding one private sample of the distribution. Index player
//! `j < B` sends the within-block position (1-based) of its sample if the
//! sample lies in block `j`, else 0; flag player `j` sends one bit, set
//! iff its sample lies in block `j`. The referee accepts iff exactly one
//! index player sent a nonzero position and the matching flag player sent
//! 0, and outputs the position that player encoded.
//!
//! Acceptance with output `x` in block `j` has probability
//! `p_x (1 - p(B_j)) prod_{i != j} (1 - p(B_i)) = p_x prod_i (1 - p(B_i))`,
//! so conditioned on acceptance the output is an exact sample of `p`.
//! The price is the acceptance factor `prod_i (1 - p(B_i))`: at least
//! `1/4` when every block has mass at most `1/2`, but zero when some
//! block carries all the mass, so point masses make the protocol
//! degenerate (it never accepts; callers get the flag, not a silent
//! bias).

use rand::Rng;
use serde::Serialize;

use crate::linalg::{project_to_density, DensityMatrix, HermitianMatrix};
use crate::pauli::born_in_unitary_basis;
use crate::sampling;

use super::mub::{build_mub, mub_ls_estimate, MubFamily};
use super::{FrequencyVector, TomographyError};

/// Brute-force enumeration cap on `d^(2B)` message tuples.
const ENUM_CAP: u128 = 1 << 24;

/// Outcome blocks for a `w`-bit protocol on `d` outcomes.
#[derive(Clone, Copy, Debug)]
pub struct BlockPartition {
    d: usize,
    w_bits: usize,
    block_size: usize,
    n_blocks: usize,
}

impl BlockPartition {
    pub fn new(d: usize, w_bits: usize) -> Result<Self, TomographyError> {
        if d < 2 {
            return Err(TomographyError::UnsupportedDim(d));
        }
        if w_bits == 0 || w_bits > 16 {
            return Err(TomographyError::BadArgument {
                name: "w_bits",
                value: w_bits as f64,
                need: "in 1..=16",
            });
        }
        let block_size = (1usize << w_bits) - 1;
        let n_blocks = d.div_ceil(block_size);
        Ok(BlockPartition { d, w_bits, block_size, n_blocks })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn w_bits(&self) -> usize {
        self.w_bits
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    /// Players consumed per round: one index player and one flag player
    /// per block.
    pub fn players_per_round(&self) -> usize {
        2 * self.n_blocks
    }

    pub fn block_of(&self, outcome: usize) -> usize {
        outcome / self.block_size
    }

    /// 1-based position of an outcome inside its block; fits in `w` bits.
    pub fn position_in_block(&self, outcome: usize) -> u32 {
        (outcome % self.block_size + 1) as u32
    }

    /// Inverse of (block, position); `None` for padding positions past
    /// `d`.
    pub fn outcome_of(&self, block: usize, position: u32) -> Option<usize> {
        if position == 0 || position as usize > self.block_size {
            return None;
        }
        let outcome = block * self.block_size + position as usize - 1;
        (outcome < self.d).then_some(outcome)
    }

    /// Total probability mass per block.
    pub fn block_masses(&self, p: &[f64]) -> Vec<f64> {
        let mut masses = vec![0.0; self.n_blocks];
        for (x, &px) in p.iter().enumerate() {
            masses[self.block_of(x)] += px;
        }
        masses
    }
}

/// One player's `w`-bit report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SimMessage {
    /// Players `0..B` are index players, `B..2B` flag players.
    pub player: usize,
    /// Fits in `w` bits; flag players use only the lowest bit.
    pub payload: u32,
}

/// Compress one round's `2B` private samples into messages.
pub fn round_messages(
    part: &BlockPartition,
    samples: &[u16],
) -> Result<Vec<SimMessage>, TomographyError> {
    let need = part.players_per_round();
    if samples.len() != need {
        return Err(TomographyError::NotEnoughSamples { need, got: samples.len() });
    }
    let b = part.n_blocks();
    let mut msgs = Vec::with_capacity(need);
    for (player, &s) in samples.iter().enumerate() {
        let outcome = s as usize;
        if outcome >= part.dim() {
            return Err(TomographyError::OutcomeRange { d: part.dim(), got: outcome });
        }
        let payload = if player < b {
            if part.block_of(outcome) == player {
                part.position_in_block(outcome)
            } else {
                0
            }
        } else {
            u32::from(part.block_of(outcome) == player - b)
        };
        debug_assert!(payload < 1 << part.w_bits());
        msgs.push(SimMessage { player, payload });
    }
    Ok(msgs)
}

/// Deterministic referee: `Some(outcome)` on acceptance, `None` on
/// rejection.
pub fn referee(part: &BlockPartition, msgs: &[SimMessage]) -> Result<Option<usize>, TomographyError> {
    let b = part.n_blocks();
    if msgs.len() != 2 * b {
        return Err(TomographyError::NotEnoughSamples { need: 2 * b, got: msgs.len() });
    }
    let mut hit: Option<(usize, u32)> = None;
    for msg in &msgs[..b] {
        if msg.payload != 0 {
            if hit.is_some() {
                return Ok(None);
            }
            hit = Some((msg.player, msg.payload));
        }
    }
    let Some((j, position)) = hit else { return Ok(None) };
    if msgs[b + j].payload != 0 {
        return Ok(None);
    }
    Ok(part.outcome_of(j, position))
}

/// `prod_i (1 - p(B_i))`: the per-round acceptance probability.
pub fn acceptance_factor(part: &BlockPartition, p: &[f64]) -> f64 {
    part.block_masses(p).iter().map(|m| 1.0 - m).product()
}

/// A distribution the protocol can never accept on: some block holds
/// essentially all the mass.
pub fn is_degenerate(part: &BlockPartition, p: &[f64]) -> bool {
    acceptance_factor(part, p) <= f64::EPSILON
}

/// Rounds so that `(3/4)^r <= eta`; the abort budget for distributions
/// with block masses at most 1/2.
pub fn rounds_for(eta: f64) -> Result<u64, TomographyError> {
    if !(0.0 < eta && eta < 1.0) {
        return Err(TomographyError::BadArgument { name: "eta", value: eta, need: "in (0, 1)" });
    }
    let mut r = 0u64;
    let mut tail = 1.0f64;
    while tail > eta {
        tail *= 0.75;
        r += 1;
    }
    Ok(r)
}

/// Player budget `40 ceil(log2(1/eta)) ceil(d / (2^w - 1))` for one
/// simulated sample at abort rate `eta`.
pub fn eta_sim_budget(d: usize, w_bits: usize, eta: f64) -> Result<u64, TomographyError> {
    let part = BlockPartition::new(d, w_bits)?;
    if !(0.0 < eta && eta < 1.0) {
        return Err(TomographyError::BadArgument { name: "eta", value: eta, need: "in (0, 1)" });
    }
    let log_ceil = (1.0 / eta).log2().ceil().max(1.0) as u64;
    Ok(40 * log_ceil * part.n_blocks() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EtaOutcome {
    Accepted { outcome: usize, rounds_used: u64, samples_used: usize },
    /// All rounds rejected.
    Bot { rounds_used: u64, samples_used: usize },
}

/// Run up to `rounds` rounds of the protocol against pre-drawn private
/// samples (outcome indices below `d`), consuming `2B` per round. The
/// sample list must cover the full round budget up front.
pub fn eta_simulate(
    samples: &[u16],
    d: usize,
    w_bits: usize,
    rounds: u64,
) -> Result<EtaOutcome, TomographyError> {
    let part = BlockPartition::new(d, w_bits)?;
    let per_round = part.players_per_round();
    let need = per_round * rounds as usize;
    if samples.len() < need {
        return Err(TomographyError::NotEnoughSamples { need, got: samples.len() });
    }
    for r in 0..rounds {
        let at = r as usize * per_round;
        let msgs = round_messages(&part, &samples[at..at + per_round])?;
        if let Some(outcome) = referee(&part, &msgs)? {
            return Ok(EtaOutcome::Accepted {
                outcome,
                rounds_used: r + 1,
                samples_used: at + per_round,
            });
        }
    }
    Ok(EtaOutcome::Bot { rounds_used: rounds, samples_used: need })
}

/// Exact output law of one round by enumeration over all `d^(2B)` player
/// sample tuples.
#[derive(Clone, Debug)]
pub struct BruteForceLaw {
    /// `P[accept and output = x]`.
    pub joint: Vec<f64>,
    pub accept_prob: f64,
    /// Joint law normalized by the acceptance probability.
    pub conditional: Vec<f64>,
}

pub fn referee_law_bruteforce(
    part: &BlockPartition,
    p: &[f64],
) -> Result<BruteForceLaw, TomographyError> {
    let d = part.dim();
    if p.len() != d {
        return Err(TomographyError::OutcomeRange { d, got: p.len() });
    }
    let players = part.players_per_round();
    let tuples = (d as u128).pow(players as u32);
    if tuples > ENUM_CAP {
        return Err(TomographyError::EnumerationTooLarge(tuples));
    }
    let mut joint = vec![0.0f64; d];
    let mut accept_prob = 0.0f64;
    let mut tuple = vec![0u16; players];
    loop {
        let prob: f64 = tuple.iter().map(|&s| p[s as usize]).product();
        if prob > 0.0 {
            let msgs = round_messages(part, &tuple)?;
            if let Some(outcome) = referee(part, &msgs)? {
                joint[outcome] += prob;
                accept_prob += prob;
            }
        }
        // Odometer increment over the tuple space.
        let mut pos = 0usize;
        loop {
            if pos == players {
                let conditional = if accept_prob > 0.0 {
                    joint.iter().map(|&j| j / accept_prob).collect()
                } else {
                    vec![0.0; d]
                };
                return Ok(BruteForceLaw { joint, accept_prob, conditional });
            }
            tuple[pos] += 1;
            if (tuple[pos] as usize) < d {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
}

/// Bookkeeping of one k-outcome tomography run.
pub struct KOutcomeReport {
    pub d: usize,
    pub k: usize,
    pub w_bits: usize,
    /// Set when `k` was not a power of two and was rounded down to
    /// `2^w_bits`.
    pub k_rounded_down: bool,
    pub copies_budget: u64,
    pub copies_per_basis: u64,
    pub rounds_per_basis: u64,
    /// Copies discarded by the floor splits.
    pub leftover_copies: u64,
    /// Accepted simulated samples per basis.
    pub accepted: Vec<u64>,
    /// Acceptance rate per basis (accepted / rounds).
    pub acceptance_rate: Vec<f64>,
    /// Bases whose simulation never accepted (degenerate for this state);
    /// their frequency rows fall back to uniform.
    pub degenerate_bases: usize,
    /// Uniform labels drawn over the bases: half the accepted total.
    pub labels_drawn: u64,
    pub m_counts: Vec<u64>,
    /// Samples used per basis: `min(accepted_j, m_j)`.
    pub used: Vec<u64>,
    pub truncated_groups: usize,
    /// Player budget for one sample at abort rate 1/100, for scale.
    pub nominal_budget_per_sample: u64,
    /// `d^4 ln d / k`: the copy-complexity body (multiply by `1/eps^2`).
    pub complexity_body: f64,
    pub ls: HermitianMatrix,
    pub estimate: DensityMatrix,
}

/// Serializable slice of [`KOutcomeReport`] without the matrices.
#[derive(Serialize)]
pub struct KOutcomeSummary {
    pub d: usize,
    pub k: usize,
    pub w_bits: usize,
    pub k_rounded_down: bool,
    pub copies_budget: u64,
    pub copies_per_basis: u64,
    pub rounds_per_basis: u64,
    pub leftover_copies: u64,
    pub accepted: Vec<u64>,
    pub acceptance_rate: Vec<f64>,
    pub degenerate_bases: usize,
    pub labels_drawn: u64,
    pub m_counts: Vec<u64>,
    pub used: Vec<u64>,
    pub truncated_groups: usize,
    pub nominal_budget_per_sample: u64,
    pub complexity_body: f64,
}

impl KOutcomeReport {
    pub fn summary(&self) -> KOutcomeSummary {
        KOutcomeSummary {
            d: self.d,
            k: self.k,
            w_bits: self.w_bits,
            k_rounded_down: self.k_rounded_down,
            copies_budget: self.copies_budget,
            copies_per_basis: self.copies_per_basis,
            rounds_per_basis: self.rounds_per_basis,
            leftover_copies: self.leftover_copies,
            accepted: self.accepted.clone(),
            acceptance_rate: self.acceptance_rate.clone(),
            degenerate_bases: self.degenerate_bases,
            labels_drawn: self.labels_drawn,
            m_counts: self.m_counts.clone(),
            used: self.used.clone(),
            truncated_groups: self.truncated_groups,
            nominal_budget_per_sample: self.nominal_budget_per_sample,
            complexity_body: self.complexity_body,
        }
    }
}

/// Tomography with a `k`-outcome measurement device, `k < d`: each of the
/// `d + 1` bases is measured through the simulation protocol at
/// `w = floor(log2 k)` bits, every accepted round yields one exact basis
/// sample, and the grouped least-squares pipeline runs on the simulated
/// samples (accepted counts taking the role of the group allocation).
pub fn k_outcome_run(
    rho: &DensityMatrix,
    k: usize,
    copies: u64,
    rng: &mut impl Rng,
) -> Result<KOutcomeReport, TomographyError> {
    let d = rho.dim();
    if k < 2 || k >= d {
        return Err(TomographyError::BadOutcomeCount { d, k });
    }
    let w_bits = k.ilog2() as usize;
    let k_rounded_down = 1usize << w_bits != k;
    let part = BlockPartition::new(d, w_bits)?;
    let mub = build_mub(d)?;
    let groups = (d + 1) as u64;
    let per_round = part.players_per_round() as u64;
    if copies < groups * per_round {
        return Err(TomographyError::BadArgument {
            name: "copies",
            value: copies as f64,
            need: "at least (d+1) rounds' worth of players",
        });
    }
    let copies_per_basis = copies / groups;
    let rounds_per_basis = copies_per_basis / per_round;
    let leftover_copies = copies - groups * rounds_per_basis * per_round;

    let mut per_basis_samples: Vec<Vec<u16>> = Vec::with_capacity(groups as usize);
    let mut accepted = Vec::with_capacity(groups as usize);
    let mut acceptance_rate = Vec::with_capacity(groups as usize);
    let mut degenerate_bases = 0usize;
    for basis_idx in 0..groups as usize {
        let probs = born_in_unitary_basis(rho, mub.basis(basis_idx))?;
        let draws =
            sampling::sample_indices(&probs, (rounds_per_basis * per_round) as usize, rng);
        let mut sims = Vec::new();
        for chunk in draws.chunks_exact(per_round as usize) {
            let msgs = round_messages(&part, chunk)?;
            if let Some(outcome) = referee(&part, &msgs)? {
                sims.push(outcome as u16);
            }
        }
        accepted.push(sims.len() as u64);
        acceptance_rate.push(if rounds_per_basis > 0 {
            sims.len() as f64 / rounds_per_basis as f64
        } else {
            0.0
        });
        if sims.is_empty() {
            degenerate_bases += 1;
        }
        per_basis_samples.push(sims);
    }

    let total_accepted: u64 = accepted.iter().sum();
    let labels_drawn = total_accepted / 2;
    let uniform = vec![1.0 / groups as f64; groups as usize];
    let m_counts = sampling::sample_counts(&uniform, labels_drawn, rng);

    let mut counts_rows: Vec<Vec<u64>> = Vec::with_capacity(groups as usize);
    let mut used = Vec::with_capacity(groups as usize);
    let mut truncated_groups = 0usize;
    for (j, sims) in per_basis_samples.iter().enumerate() {
        let n_j = sims.len() as u64;
        if m_counts[j] > n_j {
            truncated_groups += 1;
        }
        let u_j = m_counts[j].min(n_j);
        used.push(u_j);
        let mut row = vec![0u64; d];
        for &s in &sims[..u_j as usize] {
            row[s as usize] += 1;
        }
        counts_rows.push(row);
    }
    let mut freqs = FrequencyVector::from_counts(d, &counts_rows)?;
    freqs.fill_empty_uniform();
    let ls = mub_ls_estimate(&freqs, &mub)?;
    let estimate = project_to_density(&ls)?;

    Ok(KOutcomeReport {
        d,
        k,
        w_bits,
        k_rounded_down,
        copies_budget: copies,
        copies_per_basis,
        rounds_per_basis,
        leftover_copies,
        accepted,
        acceptance_rate,
        degenerate_bases,
        labels_drawn,
        m_counts,
        used,
        truncated_groups,
        nominal_budget_per_sample: eta_sim_budget(d, w_bits, 0.01)?,
        complexity_body: (d as f64).powi(4) * (d as f64).ln() / k as f64,
        ls,
        estimate,
    })
}

/// Simulate accepted basis samples only, without the estimator: used to
/// check the conditional law of the protocol against the Born law.
pub fn simulate_basis_samples(
    rho: &DensityMatrix,
    mub: &MubFamily,
    basis_idx: usize,
    w_bits: usize,
    rounds: u64,
    rng: &mut impl Rng,
) -> Result<Vec<u16>, TomographyError> {
    let d = rho.dim();
    let part = BlockPartition::new(d, w_bits)?;
    let per_round = part.players_per_round() as u64;
    let probs = born_in_unitary_basis(rho, mub.basis(basis_idx))?;
    let draws = sampling::sample_indices(&probs, (rounds * per_round) as usize, rng);
    let mut out = Vec::new();
    for chunk in draws.chunks_exact(per_round as usize) {
        let msgs = round_messages(&part, chunk)?;
        if let Some(outcome) = referee(&part, &msgs)? {
            out.push(outcome as u16);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tests::random_density;
    use crate::linalg::trace_distance;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partition_layout() {
        let part = BlockPartition::new(4, 1).unwrap();
        assert_eq!(part.n_blocks(), 4);
        assert_eq!(part.players_per_round(), 8);
        assert_eq!(part.block_of(2), 2);
        assert_eq!(part.position_in_block(2), 1);

        let part = BlockPartition::new(16, 2).unwrap();
        assert_eq!(part.n_blocks(), 6);
        assert_eq!(part.block_of(5), 1);
        assert_eq!(part.position_in_block(5), 3);
        assert_eq!(part.outcome_of(1, 3), Some(5));
        assert_eq!(part.outcome_of(5, 3), None, "padding past d");
        assert_eq!(part.outcome_of(0, 0), None);
    }

    #[test]
    fn budget_formula() {
        assert_eq!(eta_sim_budget(4, 1, 0.5).unwrap(), 160);
        assert_eq!(eta_sim_budget(16, 2, 0.01).unwrap(), 1680);
        // Squaring eta doubles the log ceiling for powers of 1/2.
        assert_eq!(eta_sim_budget(4, 1, 0.25).unwrap(), 2 * eta_sim_budget(4, 1, 0.5).unwrap());
        assert_eq!(rounds_for(0.01).unwrap(), 17);
        assert!(rounds_for(1.5).is_err());
    }

    #[test]
    fn bruteforce_law_matches_closed_form() {
        // d=2, w=1: B=2, four players, 16 tuples.
        let part = BlockPartition::new(2, 1).unwrap();
        let p = vec![0.6, 0.4];
        let law = referee_law_bruteforce(&part, &p).unwrap();
        let factor = acceptance_factor(&part, &p);
        assert!((law.accept_prob - factor).abs() < 1e-15);
        for (x, &px) in p.iter().enumerate() {
            assert!((law.joint[x] - px * factor).abs() < 1e-15);
            assert!((law.conditional[x] - px).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_law_exact_for_random_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        for &d in &[2usize, 3, 4] {
            let part = BlockPartition::new(d, 1).unwrap();
            for _ in 0..3 {
                let mut p: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
                let total: f64 = p.iter().sum();
                for x in &mut p {
                    *x /= total;
                }
                if is_degenerate(&part, &p) {
                    continue;
                }
                let law = referee_law_bruteforce(&part, &p).unwrap();
                for (x, &px) in p.iter().enumerate() {
                    assert!((law.conditional[x] - px).abs() < 1e-12, "d={d}");
                }
            }
        }
    }

    #[test]
    fn degenerate_point_mass_never_accepts() {
        let part = BlockPartition::new(4, 1).unwrap();
        let p = vec![1.0, 0.0, 0.0, 0.0];
        assert!(is_degenerate(&part, &p));
        let law = referee_law_bruteforce(&part, &p).unwrap();
        assert_eq!(law.accept_prob, 0.0);

        // Non-degenerate spread distribution is fine.
        let q = vec![0.25; 4];
        assert!(!is_degenerate(&part, &q));
        assert!((acceptance_factor(&part, &q) - 0.75f64.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn eta_simulate_consumes_and_reports() {
        let part = BlockPartition::new(2, 1).unwrap();
        assert_eq!(part.players_per_round(), 4);
        // Crafted samples: first round rejects (two index hits), second
        // accepts outcome 1 (index player 1 fires alone, flag 1 silent).
        let samples: Vec<u16> = vec![
            0, 1, 0, 0, // round 1: both index players fire -> reject
            1, 1, 0, 0, // round 2: only index 1 fires, flag 1 holds outcome 0 -> accept 1
        ];
        let out = eta_simulate(&samples, 2, 1, 2).unwrap();
        assert_eq!(
            out,
            EtaOutcome::Accepted { outcome: 1, rounds_used: 2, samples_used: 8 }
        );

        // Insufficient samples for the budget is an error.
        assert!(matches!(
            eta_simulate(&samples, 2, 1, 3),
            Err(TomographyError::NotEnoughSamples { .. })
        ));

        // All-rejecting stream returns Bot.
        let noisy: Vec<u16> = [0, 1, 0, 0].repeat(5);
        let out = eta_simulate(&noisy, 2, 1, 5).unwrap();
        assert_eq!(out, EtaOutcome::Bot { rounds_used: 5, samples_used: 20 });

        // Out-of-range sample rejected.
        assert!(eta_simulate(&[7, 0, 0, 0], 2, 1, 1).is_err());
    }

    #[test]
    fn empirical_acceptance_matches_analytic() {
        let mut rng = ChaCha8Rng::seed_from_u64(707);
        let part = BlockPartition::new(4, 1).unwrap();
        let p = vec![0.4, 0.3, 0.2, 0.1];
        let factor = acceptance_factor(&part, &p);
        let rounds = 20_000u64;
        let draws = sampling::sample_indices(&p, rounds as usize * 8, &mut rng);
        let mut accepted = 0u64;
        for chunk in draws.chunks_exact(8) {
            let msgs = round_messages(&part, chunk).unwrap();
            if referee(&part, &msgs).unwrap().is_some() {
                accepted += 1;
            }
        }
        let rate = accepted as f64 / rounds as f64;
        let sigma = (factor * (1.0 - factor) / rounds as f64).sqrt();
        assert!((rate - factor).abs() < 5.0 * sigma, "rate {rate} factor {factor}");
    }

    #[test]
    fn simulated_samples_follow_conditional_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(808);
        let rho = random_density(4, &mut rng);
        let mub = build_mub(4).unwrap();
        let probs = born_in_unitary_basis(&rho, mub.basis(2)).unwrap();
        let sims = simulate_basis_samples(&rho, &mub, 2, 1, 30_000, &mut rng).unwrap();
        assert!(sims.len() > 5_000);
        let mut counts = [0u64; 4];
        for &s in &sims {
            counts[s as usize] += 1;
        }
        let total = sims.len() as f64;
        for x in 0..4 {
            let f = counts[x] as f64 / total;
            let sigma = (probs[x] * (1.0 - probs[x]) / total).sqrt();
            assert!((f - probs[x]).abs() < 5.0 * sigma.max(1e-4), "outcome {x}");
        }
    }

    #[test]
    fn k_outcome_run_end_to_end() {
        let mut rng = ChaCha8Rng::seed_from_u64(909);
        let rho = DensityMatrix::maximally_mixed(4);
        let report = k_outcome_run(&rho, 2, 100_000, &mut rng).unwrap();
        assert_eq!(report.w_bits, 1);
        assert!(!report.k_rounded_down);
        assert_eq!(report.copies_per_basis, 20_000);
        assert_eq!(report.rounds_per_basis, 2_500);
        assert_eq!(report.nominal_budget_per_sample, 1_120);
        for (j, &n_j) in report.accepted.iter().enumerate() {
            assert!(report.used[j] <= n_j);
            assert!(report.used[j] <= report.m_counts[j]);
        }
        let err = trace_distance(report.estimate.hermitian(), rho.hermitian()).unwrap();
        assert!(err < 0.2, "trace error {err}");

        assert!(k_outcome_run(&rho, 4, 1000, &mut rng).is_err(), "k must be < d");
        assert!(k_outcome_run(&rho, 1, 1000, &mut rng).is_err());

        // k = 3 rounds down to w = 1 with the flag set.
        let report3 = k_outcome_run(&rho, 3, 50_000, &mut rng).unwrap();
        assert_eq!(report3.w_bits, 1);
        assert!(report3.k_rounded_down);
    }
}
